use std::fs;
use std::path::Path;

use dialects_core::{prf, SecretSeed, Value};
use dialects_sim::{run, run_trial, trial_seed, ActorSpec, AttackerStrategy, Scenario, Slot};
use serde_json::json;

fn scenario(lingo: &str, actors: Vec<ActorSpec>, attacker: AttackerStrategy, trials: u64) -> Scenario {
    Scenario {
        seed: SecretSeed::from_hex("d3adb33fd3adb33fd3adb33fd3adb33f").unwrap(),
        lingo_spec: lingo.into(),
        actors,
        attacker,
        trials,
        max_steps: 5_000,
    }
}

fn clients(n: usize, script: &[&str]) -> Vec<ActorSpec> {
    let mut v = vec![ActorSpec::broker("broker")];
    for i in 0..n {
        v.push(ActorSpec::client(&format!("c{i}"), script));
    }
    v
}

fn load(name: &str) -> Scenario {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name);
    Scenario::from_json(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn handshake_safety() {
    for lingo in ["plain", "dnc", "sharp(dnc)", "auth(xorbseq,j=8,k=16)"] {
        let s = scenario(lingo, clients(4, &["connect"]), AttackerStrategy::None, 1);
        let o = run_trial(&s, &s.setup().unwrap(), 0, false).unwrap();
        for i in 0..4 {
            assert_eq!(o.states[&format!("c{i}")]["peer"], json!("broker"), "{lingo}");
        }
        assert_eq!(o.states["broker"]["peers"], json!(["c0", "c1", "c2", "c3"]), "{lingo}");
    }
}

#[test]
fn pub_sub_delivers_each_body_once_per_subscriber() {
    let actors = vec![
        ActorSpec::broker("broker"),
        ActorSpec::client("pub", &["connect", "publish:3:aa", "publish:3:bb", "publish:4:cc"]),
        ActorSpec::client("s1", &["connect", "subscribe:3"]),
        ActorSpec::client("s2", &["connect", "subscribe:3", "subscribe:4"]),
    ];
    // the publisher only starts once both subscriptions are in
    let mut s = scenario("fun(xorbseq,dnc)", actors, AttackerStrategy::None, 1);
    s.actors[1].script.insert(1, "subscribe:9".into());
    let o = run_trial(&s, &s.setup().unwrap(), 0, false).unwrap();
    let got = |id: &str| o.states[id]["received"].clone();
    let s2 = got("s2");
    assert_eq!(s2.as_array().unwrap().iter().filter(|m| m[0] == 3).count(), 2);
    assert!(s2.as_array().unwrap().contains(&json!([4, "cc"])));
    assert_eq!(got("s1").as_array().unwrap().len(), 2);
    assert_eq!(got("pub"), json!([]));
    assert_eq!(o.legit_delivered, o.legit_sent);
}

#[test]
fn counters_stay_in_step_without_an_attacker() {
    let s = scenario(
        "hor(xorbseq,dnc)",
        clients(3, &["connect", "subscribe:1", "publish:1:07", "publish:1:08"]),
        AttackerStrategy::None,
        5,
    );
    let setup = s.setup().unwrap();
    for t in 0..5 {
        let o = run_trial(&s, &setup, t, false).unwrap();
        for ((a, b), (sent, _)) in &o.counters {
            assert_eq!(*sent, o.counters[&(b.clone(), a.clone())].1);
        }
        assert_eq!(o.counter_desyncs, 0);
        assert_eq!(o.rejections, 0);
    }
}

#[test]
fn first_wire_payload_is_xored_with_the_first_prf_word() {
    let s = scenario("xorbseq", clients(1, &["connect"]), AttackerStrategy::None, 1);
    let setup = s.setup().unwrap();
    let o = run_trial(&s, &setup, 0, true).unwrap();
    let first = &o.trace[0];
    assert_eq!((first.ev, first.actor.as_str(), first.n), ("out", "c0", 0));
    let plain = Value::from_json(first.plain.as_ref().unwrap()).unwrap();
    let wire = Value::from_json(&first.wire).unwrap();
    let pad = prf(&trial_seed(&s.seed, 0), 0);
    assert_eq!(wire.as_natural().unwrap(), &(plain.as_natural().unwrap() ^ num_bigint::BigUint::from(pad)));
}

fn repeated_publishes(lingo: &str) -> (Scenario, Vec<dialects_sim::TraceEvent>) {
    let script: Vec<String> =
        std::iter::once("connect".to_string()).chain((0..40).map(|_| "publish:1:05".to_string())).collect();
    let refs: Vec<&str> = script.iter().map(String::as_str).collect();
    let s = scenario(lingo, clients(1, &refs), AttackerStrategy::None, 1);
    let o = run_trial(&s, &s.setup().unwrap(), 0, true).unwrap();
    let outs = o.trace.into_iter().filter(|e| e.ev == "out" && e.actor == "c0").skip(1).collect::<Vec<_>>();
    assert_eq!(outs.len(), 40);
    (s, outs)
}

#[test]
fn identical_payloads_change_on_the_wire() {
    for lingo in ["xorbseq", "xor:256", "auth(xorbseq,j=8,k=16)", "fun(xorbseq,dnc)"] {
        let (_, outs) = repeated_publishes(lingo);
        let repeats = outs.windows(2).filter(|w| w[0].wire == w[1].wire).count();
        assert_eq!(repeats, 0, "{lingo}");
    }
}

#[test]
fn dnc_repeats_small_payloads_exactly_when_both_divisors_exceed_them() {
    // f(p, a) = (1, p) whenever p < a + 2, so the wire only moves when a
    // parameter is small enough to divide p
    let (s, outs) = repeated_publishes("dnc");
    let seed = trial_seed(&s.seed, 0);
    let plain = Value::from_json(outs[0].plain.as_ref().unwrap()).unwrap();
    let p = u64::try_from(plain.as_natural().unwrap()).unwrap();
    let a = |n: u64| prf(&seed, n) % (1 << 16);
    let mut repeats = 0;
    for w in outs.windows(2) {
        let predicted = p < a(w[0].n).min(a(w[1].n)) + 2;
        assert_eq!(w[0].wire == w[1].wire, predicted, "n = {}", w[0].n);
        repeats += u32::from(predicted);
    }
    assert!(repeats > 0 && repeats < 39);
}

#[test]
fn replay_is_weaker_than_structural_zero_on_dnc() {
    let actors = clients(2, &["connect", "subscribe:1", "publish:1:10", "publish:1:20", "publish:1:30"]);
    let replay = run(&scenario("dnc", actors.clone(), AttackerStrategy::ReplayLast { rate: 1.0 }, 300)).unwrap();
    let zero =
        run(&scenario("dnc", actors, AttackerStrategy::StructuralZero { slot: Slot::Second, rate: 1.0 }, 300)).unwrap();
    assert!(replay.attacker_sent > 1_000);
    assert_eq!(zero.attacker_accept_rate, 1.0);
    assert!(replay.attacker_accept_rate < zero.attacker_accept_rate);
}

#[test]
fn xor_recipe_always_passes_the_dialect() {
    let r = run(&load("xor-recipe.json")).unwrap();
    assert!(r.attacker_sent > 0);
    assert_eq!(r.attacker_accept_rate, 1.0);
    assert_eq!(r.rejections, 0);
    // accepted forgeries show up as inner-protocol damage instead
    assert!(r.broker_non_peer_drops + r.broker_malformed + r.protocol_errors > 0);
}

#[test]
fn shipped_scenarios_run() {
    for entry in fs::read_dir(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")).unwrap() {
        let name = entry.unwrap().file_name().into_string().unwrap();
        let r = run(&load(&name)).unwrap();
        assert_eq!(r.timeouts, 0, "{name}");
        assert!(r.legit_delivered > 0, "{name}");
        let text = serde_json::to_string(&r).unwrap();
        assert!(!text.contains("0f1e2d3c"), "{name} leaks its seed");
    }
    let r = run(&load("mqtt-dnc.json")).unwrap();
    assert_eq!((r.legit_delivered, r.rejections, r.attacker_sent), (r.legit_sent, 0, 0));
}

#[test]
fn trials_differ_but_reports_repeat() {
    let s = scenario("dnc", clients(2, &["connect", "publish:1:01"]), AttackerStrategy::RandomInject { rate: 0.5 }, 8);
    let setup = s.setup().unwrap();
    let a = run_trial(&s, &setup, 0, true).unwrap();
    let b = run_trial(&s, &setup, 1, true).unwrap();
    assert_ne!(a.trace, b.trace);
    assert_eq!(serde_json::to_string(&run(&s).unwrap()).unwrap(), serde_json::to_string(&run(&s).unwrap()).unwrap());
}

#[test]
fn max_steps_cuts_runs_short() {
    let mut s = scenario("dnc", clients(2, &["connect", "subscribe:1", "publish:1:01"]), AttackerStrategy::None, 3);
    s.max_steps = 2;
    let r = run(&s).unwrap();
    assert_eq!(r.timeouts, 3);
}
