//! Authenticating lingos: the base encoding is concatenated with a `j`-bit
//! code derived from the nonce and the two endpoints, then the whole bit
//! string is scrambled by a nonce-dependent involution.

use std::sync::Arc;

use num_bigint::BigUint;
use sha2::{Digest, Sha256};

use crate::error::{arg_err, domain_err, Result};
use crate::involution::Involution;
use crate::lingo::{Kind, Lingo};
use crate::param::{ParamDomain, Parameter};
use crate::prf::{param_for_link, prf, SecretSeed};
use crate::value::{mask, Domain, Value};

/// Bit width given to unbounded naturals on the input side by default.
pub const DEFAULT_NAT_WIDTH: u32 = 64;
/// Naturals on the output side are never narrower than a PRF word.
const MIN_OUTPUT_NAT_WIDTH: u32 = 64;

/// How a base-lingo value is laid out as a fixed-width bit string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Layout {
    Nat(u32),
    Vec(u32),
    Str(u32),
    Pair(Box<Layout>, Box<Layout>),
}

impl Layout {
    pub fn from_domain(d: &Domain, nat_width: u32) -> Result<Layout> {
        Ok(match d {
            Domain::Nats => Layout::Nat(nat_width),
            Domain::NatsBelow(b) => Layout::Nat(*b),
            Domain::BitVecs(w) => Layout::Vec(*w),
            Domain::BitStrs(l) => Layout::Str(*l),
            Domain::NatPairs => Layout::Pair(Box::new(Layout::Nat(nat_width)), Box::new(Layout::Nat(nat_width))),
            Domain::ProductOf(a, b) => {
                Layout::Pair(Box::new(Layout::from_domain(a, nat_width)?), Box::new(Layout::from_domain(b, nat_width)?))
            }
            Domain::UnionOf(_) => return arg_err(format!("{d} has no fixed-width bit layout")),
        })
    }

    pub fn width(&self) -> u32 {
        match self {
            Layout::Nat(w) | Layout::Vec(w) | Layout::Str(w) => *w,
            Layout::Pair(a, b) => a.width() + b.width(),
        }
    }

    pub fn domain(&self) -> Domain {
        match self {
            Layout::Nat(w) => Domain::NatsBelow(*w),
            Layout::Vec(w) => Domain::BitVecs(*w),
            Layout::Str(w) => Domain::BitStrs(*w),
            Layout::Pair(a, b) => Domain::product(a.domain(), b.domain()),
        }
    }

    pub fn to_bits(&self, v: &Value) -> Result<BigUint> {
        let fits = |x: &BigUint, w: u32| x.bits() <= u64::from(w);
        match (self, v) {
            (Layout::Nat(w), Value::Nat(x)) if fits(x, *w) => Ok(x.clone()),
            (Layout::Vec(w), Value::BitVec { width, v }) if width == w => Ok(v.clone()),
            (Layout::Str(w), Value::BitStr { len, bits }) if len == w => Ok(bits.clone()),
            (Layout::Pair(a, b), Value::Pair(x, y)) => Ok((a.to_bits(x)? << b.width()) | b.to_bits(y)?),
            _ => domain_err(format!("{v} does not fit a {}-bit layout", self.width())),
        }
    }

    pub fn from_bits(&self, bits: &BigUint) -> Value {
        match self {
            Layout::Nat(w) => Value::Nat(bits & mask(*w)),
            Layout::Vec(w) => Value::BitVec { width: *w, v: bits & mask(*w) },
            Layout::Str(w) => Value::BitStr { len: *w, bits: bits & mask(*w) },
            Layout::Pair(a, b) => Value::pair(a.from_bits(&(bits >> b.width())), b.from_bits(bits)),
        }
    }
}

#[derive(Debug)]
pub struct AuthLingo {
    base: Lingo,
    input: Layout,
    output: Layout,
    j: u32,
    k: u32,
    oids: Vec<String>,
}

/// `auth(base, j, k)` over identifier space `oids`, unbounded naturals
/// truncated to [`DEFAULT_NAT_WIDTH`] bits.
pub fn authenticating(base: Lingo, j: u32, k: u32, oids: Vec<String>) -> Result<Lingo> {
    authenticating_with_width(base, j, k, oids, DEFAULT_NAT_WIDTH)
}

pub fn authenticating_with_width(base: Lingo, j: u32, k: u32, oids: Vec<String>, nat_width: u32) -> Result<Lingo> {
    if !(1..=256).contains(&j) {
        return arg_err(format!("hash width j={j} must be in 1..=256"));
    }
    if !(1..=64).contains(&k) {
        return arg_err(format!("nonce width k={k} must be in 1..=64"));
    }
    if nat_width == 0 {
        return arg_err("natural width must be positive");
    }
    let mut distinct = oids.clone();
    distinct.sort();
    distinct.dedup();
    if distinct.len() < 2 {
        return arg_err("identifier space needs at least two distinct identifiers");
    }
    if base.as_auth().is_some() {
        return arg_err(format!("{} is already authenticating", base.id()));
    }
    let input = Layout::from_domain(base.d1(), nat_width)?;
    let output = Layout::from_domain(base.d2(), nat_width.max(MIN_OUTPUT_NAT_WIDTH))?;
    let size = output.width() + j;
    let auth = AuthLingo { base: base.clone(), input, output, j, k, oids };
    Ok(Lingo {
        id: format!("auth({},j={j},k={k})", base.id()),
        d1: auth.input.domain(),
        d2: Domain::BitStrs(size),
        params: ParamDomain::Auth { base: Box::new(base.param_domain().clone()), size, hash_bits: j },
        ingress_arity: 1,
        egress_arity: 1,
        f_checkable: true,
        kind: Kind::Auth(Arc::new(auth)),
    })
}

impl AuthLingo {
    pub fn base(&self) -> &Lingo {
        &self.base
    }

    /// Width of the base encoding slot.
    pub fn m(&self) -> u32 {
        self.output.width()
    }

    pub fn j(&self) -> u32 {
        self.j
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn size(&self) -> u32 {
        self.m() + self.j
    }

    pub fn oids(&self) -> &[String] {
        &self.oids
    }

    pub(crate) fn f(&self, d1: &Value, a: &Parameter) -> Result<Value> {
        let (a0, sigma, d) = triple(a)?;
        let encoded = self.output.to_bits(&self.base.f_raw(d1, a0)?)?;
        let joined = (encoded << self.j) | (d & mask(self.j));
        Ok(Value::BitStr { len: self.size(), bits: sigma.apply(&joined) })
    }

    pub(crate) fn g(&self, d2: &Value, a: &Parameter, hits: &mut u32) -> Result<Value> {
        let (a0, sigma, _) = triple(a)?;
        let b = self.unscramble(d2, sigma)?;
        self.base.g_raw(&self.output.from_bits(&(b >> self.j)), a0, hits)
    }

    fn unscramble(&self, d2: &Value, sigma: &Involution) -> Result<BigUint> {
        match d2 {
            Value::BitStr { len, bits } if *len == self.size() && sigma.size() == *len => Ok(sigma.apply(bits)),
            _ => domain_err(format!("{d2} is not a {}-bit string", self.size())),
        }
    }

    /// The last `j` bits of `σ(b)`.
    pub fn code(&self, received: &Value, a: &Parameter) -> Result<BigUint> {
        let (_, sigma, _) = triple(a)?;
        Ok(self.unscramble(received, sigma)? & mask(self.j))
    }

    /// Whether the code slot of `received` carries the expected hash `a.d`.
    pub fn auth_check(&self, received: &Value, a: &Parameter) -> Result<bool> {
        let (_, _, d) = triple(a)?;
        Ok(&self.code(received, a)? == d)
    }

    /// SHA-256 of `nonce (8 bytes BE) ‖ len(A) (4 bytes BE) ‖ A ‖ len(B) ‖ B`,
    /// truncated to its leading `j` bits.
    pub fn hash(&self, nonce: u64, from: &str, to: &str) -> BigUint {
        let mut h = Sha256::new();
        h.update(nonce.to_be_bytes());
        for id in [from, to] {
            h.update((id.len() as u32).to_be_bytes());
            h.update(id.as_bytes());
        }
        BigUint::from_bytes_be(&h.finalize()) >> (256 - self.j)
    }

    /// `(param0(nonce), ι(nonce), hash(nonce, A, B))` for a link `A → B`
    /// between distinct members of the identifier space.
    pub fn param(&self, seed: &SecretSeed, nonce: u64, from: &str, to: &str) -> Result<Parameter> {
        if self.k < 64 && nonce >> self.k != 0 {
            return arg_err(format!("nonce {nonce} exceeds {} bits", self.k));
        }
        if from == to {
            return arg_err(format!("link endpoints must differ, got {from} twice"));
        }
        for id in [from, to] {
            if !self.oids.iter().any(|o| o == id) {
                return arg_err(format!("{id} is not in the identifier space"));
            }
        }
        Ok(self.triple_for(seed, nonce, from, to))
    }

    /// The `k`-bit nonce used for message counter `n`.
    pub fn nonce(&self, seed: &SecretSeed, n: u64) -> u64 {
        prf(&seed.derive("auth.nonce"), n) & (u64::MAX >> (64 - self.k))
    }

    pub(crate) fn param_link(&self, seed: &SecretSeed, n: u64, link: Option<(&str, &str)>) -> Parameter {
        let (from, to) = link.unwrap_or((&self.oids[0], &self.oids[1]));
        self.triple_for(seed, self.nonce(seed, n), from, to)
    }

    fn triple_for(&self, seed: &SecretSeed, nonce: u64, from: &str, to: &str) -> Parameter {
        let sigma = Involution::from_seed(prf(&seed.derive("auth.iota"), nonce), self.size());
        Parameter::auth(param_for_link(&self.base, seed, nonce, Some((from, to))), sigma, self.hash(nonce, from, to))
    }
}

fn triple(a: &Parameter) -> Result<(&Parameter, &Involution, &BigUint)> {
    match a {
        Parameter::Auth { a0, sigma, d } => Ok((a0, sigma, d)),
        _ => domain_err(format!("authenticating lingos need an auth parameter, got {a}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::lingo::{dnc_lingo, xor_bseq_lingo, xor_lingo};
    use crate::sharp::sharp;

    fn oids() -> Vec<String> {
        vec!["alice".into(), "bob".into()]
    }

    fn auth_xorbseq() -> Lingo {
        authenticating(xor_bseq_lingo(), 8, 16, oids()).unwrap()
    }

    #[test]
    fn shape() {
        let l = auth_xorbseq();
        assert_eq!(l.id(), "auth(xorbseq,j=8,k=16)");
        assert_eq!(l.d1(), &Domain::NatsBelow(64));
        assert_eq!(l.d2(), &Domain::BitStrs(72));
        assert_eq!(l.as_auth().unwrap().m(), 64);
        let d = authenticating(dnc_lingo(), 4, 8, oids()).unwrap();
        assert_eq!(d.d2(), &Domain::BitStrs(132));
    }

    #[test]
    fn identity_involution_concatenates() {
        let l = authenticating(xor_lingo(8).unwrap(), 4, 8, oids()).unwrap();
        let a = Parameter::auth(Parameter::scalar(5u32), Involution::identity(12), 0b1010u32);
        let out = l.apply_f(&Value::bit_vec(8, 3u32).unwrap(), &a).unwrap();
        assert_eq!(out, Value::bit_str(12, 0b0000_0110_1010u32).unwrap());
        assert_eq!(l.as_auth().unwrap().code(&out, &a).unwrap(), BigUint::from(0b1010u32));
    }

    #[test]
    fn round_trip_and_code() {
        let l = auth_xorbseq();
        let auth = l.as_auth().unwrap();
        let seed = SecretSeed::from_u64(42);
        for nonce in 0..200u64 {
            let a = auth.param(&seed, nonce, "alice", "bob").unwrap();
            let d1 = Value::nat(nonce * 7919 + 1);
            let b = l.apply_f(&d1, &a).unwrap();
            assert_eq!(l.apply_g(&b, &a).unwrap(), d1);
            assert_eq!(auth.code(&b, &a).unwrap(), auth.hash(nonce, "alice", "bob"));
            assert!(auth.auth_check(&b, &a).unwrap());
            assert!(l.check_compliance(&b, &a).unwrap());
        }
    }

    #[test]
    fn flipping_a_code_bit_fails_the_check() {
        let l = auth_xorbseq();
        let auth = l.as_auth().unwrap();
        let seed = SecretSeed::from_u64(1);
        let a = auth.param(&seed, 77, "bob", "alice").unwrap();
        let Parameter::Auth { sigma, .. } = &a else { unreachable!() };
        let Value::BitStr { len, bits } = l.apply_f(&Value::nat(12345u32), &a).unwrap() else { unreachable!() };
        // code slot positions m+1..=m+j before scrambling sit at σ(p) on the wire
        for p in 65..=72u32 {
            let wire_pos = sigma.image(p);
            let mut flipped = bits.clone();
            let bit = u64::from(len - wire_pos);
            flipped.set_bit(bit, !bits.bit(bit));
            let v = Value::BitStr { len, bits: flipped };
            assert!(!auth.auth_check(&v, &a).unwrap());
        }
    }

    #[test]
    fn auth_check_length_mismatch() {
        let l = auth_xorbseq();
        let auth = l.as_auth().unwrap();
        let a = auth.param(&SecretSeed::from_u64(1), 0, "alice", "bob").unwrap();
        assert!(matches!(auth.auth_check(&Value::bit_str(71, 0u32).unwrap(), &a), Err(Error::Domain(_))));
    }

    #[test]
    fn param_validation() {
        let auth_l = auth_xorbseq();
        let auth = auth_l.as_auth().unwrap();
        let seed = SecretSeed::from_u64(1);
        assert!(auth.param(&seed, 1 << 16, "alice", "bob").is_err());
        assert!(auth.param(&seed, 1, "alice", "alice").is_err());
        assert!(auth.param(&seed, 1, "alice", "eve").is_err());
        assert!(authenticating(xor_bseq_lingo(), 0, 16, oids()).is_err());
        assert!(authenticating(xor_bseq_lingo(), 8, 65, oids()).is_err());
        assert!(authenticating(xor_bseq_lingo(), 8, 16, vec!["a".into(), "a".into()]).is_err());
        assert!(authenticating(auth_xorbseq(), 8, 16, oids()).is_err());
    }

    #[test]
    fn sharp_base_round_trips() {
        let l = authenticating(sharp(xor_lingo(8).unwrap()).unwrap(), 8, 4, oids()).unwrap();
        let auth = l.as_auth().unwrap();
        let seed = SecretSeed::from_u64(3);
        for n in 0..100 {
            let a = crate::prf::param_for(&l, &seed, n);
            let d1 = Value::bit_vec(8, (n * 37 % 256) as u32).unwrap();
            let b = l.apply_f(&d1, &a).unwrap();
            assert_eq!(l.apply_g(&b, &a).unwrap(), d1);
            assert!(auth.auth_check(&b, &a).unwrap());
        }
    }

    #[test]
    fn random_strings_rarely_authenticate() {
        use rand::SeedableRng;
        let l = auth_xorbseq();
        let auth = l.as_auth().unwrap();
        let a = auth.param(&SecretSeed::from_u64(9), 5, "alice", "bob").unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let trials = 20_000;
        let hits = (0..trials).filter(|_| auth.auth_check(&l.d2().sample(&mut rng), &a).unwrap()).count();
        assert!((hits as f64) / (trials as f64) < 0.01, "{hits}");
    }
}
