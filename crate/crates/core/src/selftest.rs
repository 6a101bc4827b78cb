//! Sampled checks of the lingo laws over the shipped lingos, for quick
//! confidence runs outside the test suite.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::involution::Involution;
use crate::lingo::Lingo;
use crate::param::Parameter;
use crate::prf::SecretSeed;
use crate::spec::{parse_lingo, parse_lingo_with, SpecContext};
use crate::value::{random_bits, Value};

/// Lingo specs covered by [`selftest`].
pub const SHIPPED_SPECS: &[&str] = &[
    "xor:8",
    "xor:256",
    "xorbseq",
    "dnc",
    "rdnc",
    "sharp(xor:8)",
    "sharp(dnc)",
    "hor(xorbseq,dnc)",
    "hor(dnc,rdnc;bias=1,3)",
    "fun(xorbseq,dnc)",
    "fun(xor:8,sharp(xor:8))",
    "auth(xorbseq,j=8,k=16)",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SelfCheck {
    pub name: String,
    pub passed: u64,
    pub total: u64,
}

impl SelfCheck {
    pub fn ok(&self) -> bool {
        self.passed == self.total
    }
}

struct Tally {
    checks: Vec<SelfCheck>,
}

impl Tally {
    fn record(&mut self, name: impl Into<String>, outcomes: impl Iterator<Item = bool>) {
        let (mut passed, mut total) = (0, 0);
        for ok in outcomes {
            total += 1;
            passed += u64::from(ok);
        }
        self.checks.push(SelfCheck { name: name.into(), passed, total });
    }
}

fn draw(l: &Lingo, rng: &mut ChaCha8Rng) -> (Value, Parameter) {
    (l.d1().sample(rng), l.param_domain().sample(rng))
}

/// Runs every check with `samples` draws each, seeded by `seed`.
pub fn selftest(samples: u64, seed: u64) -> Vec<SelfCheck> {
    let mut t = Tally { checks: Vec::new() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lingos: Vec<Lingo> = SHIPPED_SPECS.iter().map(|s| parse_lingo(s).expect("shipped spec parses")).collect();

    for l in &lingos {
        t.record(
            format!("{}: g(f(d, a), a) = d", l.id()),
            (0..samples).map(|_| {
                let (d, a) = draw(l, &mut rng);
                l.apply_f(&d, &a).and_then(|e| l.apply_g(&e, &a)).is_ok_and(|back| back == d)
            }),
        );
        t.record(
            format!("{}: f injective", l.id()),
            (0..samples).map(|_| {
                let (d, a) = draw(l, &mut rng);
                let e = l.d1().sample(&mut rng);
                d == e || l.apply_f(&d, &a).ok() != l.apply_f(&e, &a).ok()
            }),
        );
        if l.is_f_checkable() {
            t.record(
                format!("{}: genuine encodings comply", l.id()),
                (0..samples).map(|_| {
                    let (d, a) = draw(l, &mut rng);
                    l.apply_f(&d, &a).and_then(|e| l.check_compliance(&e, &a)).unwrap_or(false)
                }),
            );
        }
    }

    let dnc = parse_lingo("dnc").expect("dnc");
    t.record(
        "dnc: remainders of at least a + 2 fail",
        (0..samples).map(|_| {
            let a: u64 = rng.gen_range(0..1 << 16);
            let y = a + 2 + rng.gen_range(0..1 << 20);
            let x: u64 = rng.gen_range(0..1 << 40);
            !dnc.check_compliance(&Value::nat_pair(x, y), &Parameter::scalar(a)).unwrap_or(false)
        }),
    );

    for (spec, base) in [("sharp(xor:8)", "xor:8"), ("sharp(dnc)", "dnc")] {
        let l = parse_lingo(spec).expect("sharp");
        let b = parse_lingo(base).expect("base");
        t.record(
            format!("{spec}: mixed-parameter witnesses fail"),
            (0..samples).map(|_| {
                let (d, a) = draw(&l, &mut rng);
                let e = loop {
                    let e = l.d1().sample(&mut rng);
                    if e != d {
                        break e;
                    }
                };
                let (a1, a2) = a.as_pair().expect("pair parameter");
                let w = Value::pair(b.apply_f(&d, a1).expect("f"), b.apply_f(&e, a2).expect("f"));
                !l.check_compliance(&w, &a).unwrap_or(false)
            }),
        );
    }

    let l = parse_lingo_with("auth(xorbseq,j=8,k=16)", &SpecContext { oids: vec!["a".into(), "b".into(), "c".into()] })
        .expect("auth");
    let auth = l.as_auth().expect("auth lingo");
    let ids = ["a", "b", "c"];
    t.record(
        "auth: code(f(d, param(n, A, B))) = hash(n, A, B)",
        (0..samples).map(|_| {
            let s = SecretSeed::from_u64(rng.next_u64());
            let nonce = rng.gen_range(0..1 << 16);
            let from = rng.gen_range(0..3);
            let to = (from + rng.gen_range(1..3)) % 3;
            let a = auth.param(&s, nonce, ids[from], ids[to]).expect("valid link");
            let d = l.d1().sample(&mut rng);
            l.apply_f(&d, &a).and_then(|b| auth.code(&b, &a)).is_ok_and(|c| c == auth.hash(nonce, ids[from], ids[to]))
        }),
    );
    t.record(
        "involutions: σ∘σ = id",
        (0..samples).map(|_| {
            let size = rng.gen_range(1..300);
            let s = Involution::from_seed(rng.next_u64(), size);
            let bits = random_bits(&mut rng, size);
            s.is_involution() && s.apply(&s.apply(&bits)) == bits
        }),
    );
    t.checks
}
