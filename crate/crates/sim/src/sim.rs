//! Deterministic network of reliable FIFO channels, one per ordered actor
//! pair, with an on-path attacker watching every emission.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fs;
use std::io::Write;
use std::path::Path;

use dialects_core::{Domain, SecretSeed, Value};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use crate::attacker::Attacker;
use crate::dialect::{DialectActor, Step, TraceEvent};
use crate::error::{Result, SimError};
use crate::message::Message;
use crate::mqtt::{Command, MqttActor, MqttBroker, MqttClient};
use crate::scenario::{Role, Scenario, Setup};

/// Upper bound on rule applications per actor per round.
const LOCAL_STEP_CAP: usize = 10_000;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub trials: u64,
    pub legit_sent: u64,
    pub legit_delivered: u64,
    pub attacker_sent: u64,
    pub attacker_accepted: u64,
    pub attacker_accept_rate: f64,
    pub rejections: u64,
    pub counter_desyncs: u64,
    pub default_hits: u64,
    pub broker_non_peer_drops: u64,
    pub broker_malformed: u64,
    pub protocol_errors: u64,
    /// Trials that hit `maxSteps` before going quiet.
    pub timeouts: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub traces: Option<String>,
}

impl Report {
    fn absorb(&mut self, t: &TrialOutcome) {
        self.trials += 1;
        self.legit_sent += t.legit_sent;
        self.legit_delivered += t.legit_delivered;
        self.attacker_sent += t.attacker_sent;
        self.attacker_accepted += t.attacker_accepted;
        self.rejections += t.rejections;
        self.counter_desyncs += t.counter_desyncs;
        self.default_hits += t.default_hits;
        self.broker_non_peer_drops += t.broker_non_peer_drops;
        self.broker_malformed += t.broker_malformed;
        self.protocol_errors += t.protocol_errors;
        self.timeouts += u64::from(!t.quiescent);
    }

    fn finish(mut self) -> Report {
        self.attacker_accept_rate = self.attacker_accepted as f64 / self.attacker_sent.max(1) as f64;
        self
    }
}

/// Everything observable about one trial.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrialOutcome {
    pub legit_sent: u64,
    pub legit_delivered: u64,
    pub attacker_sent: u64,
    pub attacker_accepted: u64,
    pub rejections: u64,
    pub counter_desyncs: u64,
    pub default_hits: u64,
    pub broker_non_peer_drops: u64,
    pub broker_malformed: u64,
    pub protocol_errors: u64,
    pub quiescent: bool,
    pub rounds: u64,
    /// Inner-protocol end state per actor.
    pub states: BTreeMap<String, Json>,
    /// Plain payloads each inner actor consumed, with senders.
    pub consumed: BTreeMap<String, Vec<(String, Value)>>,
    /// `(send, recv)` counters per ordered `(actor, peer)` pair.
    pub counters: BTreeMap<(String, String), (u64, u64)>,
    pub trace: Vec<TraceEvent>,
}

/// Seed shared by the enclave for trial `t`.
pub fn trial_seed(seed: &SecretSeed, t: u64) -> SecretSeed {
    seed.derive_indexed("trial", t)
}

pub fn run(s: &Scenario) -> Result<Report> {
    run_with_traces(s, None)
}

/// Runs every trial (in parallel) and, with `trace_dir`, writes
/// `trial-<t>.jsonl` there for each trial.
pub fn run_with_traces(s: &Scenario, trace_dir: Option<&Path>) -> Result<Report> {
    s.validate()?;
    let setup = s.setup()?;
    let tracing = trace_dir.is_some();
    let outcomes: Vec<TrialOutcome> =
        (0..s.trials).into_par_iter().map(|t| run_trial(s, &setup, t, tracing)).collect::<Result<_>>()?;
    let mut report = Report::default();
    for o in &outcomes {
        report.absorb(o);
    }
    if let Some(dir) = trace_dir {
        fs::create_dir_all(dir)?;
        for (t, o) in outcomes.iter().enumerate() {
            let mut f = std::io::BufWriter::new(fs::File::create(dir.join(format!("trial-{t}.jsonl")))?);
            for ev in &o.trace {
                serde_json::to_writer(&mut f, ev).map_err(|e| SimError::Config(e.to_string()))?;
                f.write_all(b"\n")?;
            }
            f.flush()?;
        }
        report.traces = Some(dir.display().to_string());
    }
    Ok(report.finish())
}

struct Network {
    channels: BTreeMap<(String, String), VecDeque<Message>>,
    next_seq: u64,
    injected: BTreeSet<u64>,
}

impl Network {
    fn push(&mut self, mut m: Message) -> u64 {
        self.next_seq += 1;
        m.seq = self.next_seq;
        let seq = m.seq;
        self.channels.entry((m.from.clone(), m.to.clone())).or_default().push_back(m);
        seq
    }

    fn is_empty(&self) -> bool {
        self.channels.values().all(VecDeque::is_empty)
    }
}

pub fn run_trial(s: &Scenario, setup: &Setup, t: u64, tracing: bool) -> Result<TrialOutcome> {
    let seed = trial_seed(&s.seed, t);
    let default_broker = s.default_broker();
    let mut actors = BTreeMap::new();
    for a in &s.actors {
        let inner = match a.role {
            Role::Broker => MqttActor::Broker(MqttBroker::new(&a.id, setup.codec.clone())),
            Role::Client => {
                let script = a.script.iter().map(|c| Command::parse(c)).collect::<Result<_>>()?;
                MqttActor::Client(MqttClient::new(&a.id, setup.codec.clone(), script, default_broker)?)
            }
        };
        let actor = DialectActor::new(&a.id, inner, setup.lingo.clone(), seed.clone())?.with_tracing(tracing);
        actors.insert(a.id.clone(), actor);
    }
    let wire_domain = setup.lingo.as_ref().map_or_else(|| setup.codec.domain(), |l| l.d2().clone());
    let mut attacker = Attacker::new(s.attacker.clone(), setup.lingo.as_ref(), wire_domain, seed.derive("attacker"))?;

    let mut net = Network { channels: BTreeMap::new(), next_seq: 0, injected: BTreeSet::new() };
    let mut out = TrialOutcome::default();
    let ids: Vec<String> = actors.keys().cloned().collect();

    while out.rounds < s.max_steps {
        out.rounds += 1;
        let mut progressed = false;

        let heads: Vec<Message> = net.channels.values_mut().filter_map(VecDeque::pop_front).collect();
        for m in heads {
            progressed = true;
            let Some(actor) = actors.get_mut(&m.to) else {
                continue;
            };
            let seq = m.seq;
            if actor.rule_in(m)? {
                score(&mut out, &net, &[seq], true);
            }
            out.trace.extend(actor.take_trace());
        }

        for id in &ids {
            let actor = actors.get_mut(id).expect("actor exists");
            for _ in 0..LOCAL_STEP_CAP {
                let step = actor.step()?;
                out.trace.extend(actor.take_trace());
                match step {
                    Step::Idle => break,
                    Step::Inner => {}
                    Step::InnerFault(_) => out.protocol_errors += 1,
                    Step::Out(msgs) => {
                        for m in msgs {
                            let injection = attacker.observe(&m);
                            net.push(m);
                            out.legit_sent += 1;
                            if let Some(inj) = injection {
                                let seq = net.push(inj);
                                net.injected.insert(seq);
                                out.attacker_sent += 1;
                            }
                        }
                    }
                    Step::Deliver { seqs, accepted } => {
                        if !accepted {
                            out.rejections += 1;
                        }
                        score(&mut out, &net, &seqs, accepted);
                    }
                }
                progressed = true;
            }
        }

        if !progressed && net.is_empty() {
            out.quiescent = true;
            break;
        }
    }

    for (id, a) in &actors {
        out.default_hits += a.default_hits();
        out.states.insert(id.clone(), a.inner().snapshot());
        out.consumed.insert(id.clone(), a.consumed().to_vec());
        if let MqttActor::Broker(b) = a.inner() {
            out.broker_non_peer_drops += b.dropped_from_non_peer();
            out.broker_malformed += b.malformed();
        }
        for peer in &ids {
            if peer != id {
                out.counters.insert((id.clone(), peer.clone()), a.counters().get(peer));
            }
        }
    }
    if setup.lingo.is_some() {
        for ((from, to), (sent, _)) in &out.counters {
            let received = out.counters.get(&(to.clone(), from.clone())).map_or(0, |c| c.1);
            out.counter_desyncs += u64::from(*sent != received);
        }
    }
    Ok(out)
}

fn score(out: &mut TrialOutcome, net: &Network, seqs: &[u64], accepted: bool) {
    if !accepted {
        return;
    }
    for seq in seqs {
        if net.injected.contains(seq) {
            out.attacker_accepted += 1;
        } else {
            out.legit_delivered += 1;
        }
    }
}

/// Wire domain sampled by random injections for a setup.
pub fn wire_domain(setup: &Setup) -> Domain {
    setup.lingo.as_ref().map_or_else(|| setup.codec.domain(), |l| l.d2().clone())
}
