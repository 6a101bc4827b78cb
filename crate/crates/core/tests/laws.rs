use dialects_core::{param_for, parse_lingo, Lingo, Parameter, SecretSeed, Value};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SPECS: &[&str] = &[
    "xor:8",
    "xor:256",
    "xorbseq",
    "dnc",
    "rdnc",
    "sharp(xor:8)",
    "sharp(dnc)",
    "hor(xorbseq,dnc)",
    "hor(dnc,rdnc;bias=3,1)",
    "fun(xorbseq,dnc)",
    "fun(xor:8,sharp(xor:8))",
    "auth(xorbseq,j=8,k=16)",
    "auth(sharp(xor:8),j=8,k=4)",
    "sharp(hor(xorbseq,dnc))",
];

fn lingos() -> Vec<Lingo> {
    SPECS.iter().map(|s| parse_lingo(s).unwrap()).collect()
}

fn draw(l: &Lingo, seed: u64) -> (Value, Value, Parameter) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d1 = l.d1().sample(&mut rng);
    let d1b = l.d1().sample(&mut rng);
    (d1, d1b, l.param_domain().sample(&mut rng))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn round_trip(idx in 0..SPECS.len(), seed in any::<u64>()) {
        let l = &lingos()[idx];
        let (d1, _, a) = draw(l, seed);
        let d2 = l.apply_f(&d1, &a).unwrap();
        prop_assert!(l.d2().contains(&d2));
        prop_assert_eq!(l.apply_g(&d2, &a).unwrap(), d1);
    }

    #[test]
    fn encodings_are_injective(idx in 0..SPECS.len(), seed in any::<u64>()) {
        let l = &lingos()[idx];
        let (d1, d1b, a) = draw(l, seed);
        prop_assume!(d1 != d1b);
        prop_assert_ne!(l.apply_f(&d1, &a).unwrap(), l.apply_f(&d1b, &a).unwrap());
    }

    #[test]
    fn genuine_encodings_comply(idx in 0..SPECS.len(), seed in any::<u64>()) {
        let l = &lingos()[idx];
        let (d1, _, a) = draw(l, seed);
        prop_assert!(l.check_compliance(&l.apply_f(&d1, &a).unwrap(), &a).unwrap());
    }

    #[test]
    fn compliance_means_in_image(idx in 0..SPECS.len(), seed in any::<u64>()) {
        let l = &lingos()[idx];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = l.param_domain().sample(&mut rng);
        let d2 = l.d2().sample(&mut rng);
        if l.check_compliance(&d2, &a).unwrap() {
            let d1 = l.apply_g(&d2, &a).unwrap();
            prop_assert_eq!(l.apply_f(&d1, &a).unwrap(), d2);
        }
    }

    #[test]
    fn symmetric_xor_accepts_everything(seed in any::<u64>()) {
        let l = parse_lingo("xor:8").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (d2, a) = (l.d2().sample(&mut rng), l.param_domain().sample(&mut rng));
        prop_assert!(l.check_compliance(&d2, &a).unwrap());
    }

    #[test]
    fn dnc_oversized_remainder_fails(x in 0u64..1 << 40, extra in 0u64..1 << 20, a in 0u64..1 << 16) {
        let l = parse_lingo("dnc").unwrap();
        let pair = Value::nat_pair(x, a + 2 + extra);
        prop_assert!(!l.check_compliance(&pair, &Parameter::scalar(a)).unwrap());
    }

    #[test]
    fn sharp_witnesses_fail(seed in any::<u64>(), which in 0usize..2) {
        let l = parse_lingo(["sharp(xor:8)", "sharp(dnc)"][which]).unwrap();
        let (d1, d1b, a) = draw(&l, seed);
        prop_assume!(d1 != d1b);
        let (a1, a2) = a.as_pair().unwrap();
        let base = parse_lingo(["xor:8", "dnc"][which]).unwrap();
        let w = Value::pair(base.apply_f(&d1, a1).unwrap(), base.apply_f(&d1b, a2).unwrap());
        prop_assert!(!l.check_compliance(&w, &a).unwrap());
    }

    #[test]
    fn horizontal_of_checkable_branches_has_witnesses(seed in any::<u64>()) {
        let l = parse_lingo("hor(sharp(xorbseq),dnc)").unwrap();
        prop_assert!(l.is_f_checkable());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = l.param_domain().sample(&mut rng);
        let Parameter::Tagged { index, inner } = &a else { unreachable!() };
        let witness = if *index == 1 {
            let (a1, a2) = inner.as_pair().unwrap();
            Value::pair(Value::Nat(a1.as_scalar().unwrap() ^ num_bigint::BigUint::from(1u32)), Value::Nat(a2.as_scalar().unwrap().clone()))
        } else {
            Value::pair(Value::nat(1u32), Value::Nat(inner.as_scalar().unwrap() + 2u32))
        };
        prop_assert!(!l.check_compliance(&witness, &a).unwrap());
    }

    #[test]
    fn functional_inherits_second_checks(seed in any::<u64>(), x in 0u64..1 << 32, extra in 0u64..1000) {
        let l = parse_lingo("fun(xorbseq,dnc)").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = l.param_domain().sample(&mut rng);
        let second = a.as_pair().unwrap().1.as_scalar().unwrap();
        let forged = Value::pair(Value::nat(x), Value::Nat(second + 2u32 + extra));
        prop_assert!(!l.check_compliance(&forged, &a).unwrap());
    }

    #[test]
    fn derived_parameters_are_valid(idx in 0..SPECS.len(), seed in any::<u64>(), n in any::<u64>()) {
        let l = &lingos()[idx];
        let s = SecretSeed::from_u64(seed);
        let a = param_for(l, &s, n);
        prop_assert!(l.param_domain().contains(&a));
        prop_assert_eq!(&a, &param_for(l, &s, n));
    }
}

#[test]
fn auth_code_matches_hash() {
    let l = parse_lingo("auth(xorbseq,j=8,k=16,oids=a|b|c)").unwrap();
    let auth = l.as_auth().unwrap();
    let seed = SecretSeed::from_u64(99);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ids = ["a", "b", "c"];
    for i in 0..1_000u64 {
        let from = ids[(i % 3) as usize];
        let to = ids[((i / 3 + 1 + i) % 3) as usize];
        if from == to {
            continue;
        }
        let nonce = i * 61 % (1 << 16);
        let a = auth.param(&seed, nonce, from, to).unwrap();
        let d1 = l.d1().sample(&mut rng);
        let b = l.apply_f(&d1, &a).unwrap();
        assert_eq!(auth.code(&b, &a).unwrap(), auth.hash(nonce, from, to));
        assert_eq!(l.apply_g(&b, &a).unwrap(), d1);
    }
}
