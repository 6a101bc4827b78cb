//! The executable lingo: an invertible, parameter-indexed payload transform
//! `(D1, D2, A, f, g)` with `g(f(d1, a), a) = d1` for every `d1 ∈ D1`, `a ∈ A`.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;

use crate::auth::AuthLingo;
use crate::compose::Horizontal;
use crate::error::{arg_err, domain_err, Error, Result};
use crate::param::{ParamDomain, Parameter};
use crate::value::{xor, Domain, Value};

/// Parameter-derivation rule tag; see [`crate::prf::param_for`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamRule {
    Xor(u32),
    XorBseq,
    Dnc,
    Sharp,
    Horizontal,
    Functional,
    Auth,
}

#[derive(Clone)]
pub(crate) enum Kind {
    Xor { width: u32 },
    XorBseq,
    Dnc { reversed: bool },
    Sharp(Arc<Lingo>),
    Horizontal(Arc<Horizontal>),
    Functional(Arc<Lingo>, Arc<Lingo>),
    Auth(Arc<AuthLingo>),
}

#[derive(Clone)]
pub struct Lingo {
    pub(crate) id: String,
    pub(crate) d1: Domain,
    pub(crate) d2: Domain,
    pub(crate) params: ParamDomain,
    pub(crate) ingress_arity: u32,
    pub(crate) egress_arity: u32,
    pub(crate) f_checkable: bool,
    pub(crate) kind: Kind,
}

impl fmt::Debug for Lingo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Lingo")
            .field("id", &self.id)
            .field("d1", &self.d1)
            .field("d2", &self.d2)
            .field("f_checkable", &self.f_checkable)
            .finish_non_exhaustive()
    }
}

impl fmt::Display for Lingo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id)
    }
}

/// The `XOR{n}` lingo over `n`-bit vectors.
pub fn xor_lingo(n: u32) -> Result<Lingo> {
    if n == 0 {
        return arg_err("xor lingo width must be at least 1");
    }
    Ok(Lingo {
        id: format!("xor:{n}"),
        d1: Domain::BitVecs(n),
        d2: Domain::BitVecs(n),
        params: ParamDomain::Bits(n),
        ingress_arity: 1,
        egress_arity: 1,
        f_checkable: false,
        kind: Kind::Xor { width: n },
    })
}

/// Xor over the binary expansions of unbounded naturals.
pub fn xor_bseq_lingo() -> Lingo {
    Lingo {
        id: "xorbseq".into(),
        d1: Domain::Nats,
        d2: Domain::Nats,
        params: ParamDomain::Nats,
        ingress_arity: 1,
        egress_arity: 1,
        f_checkable: false,
        kind: Kind::XorBseq,
    }
}

/// Divide and check: `n ↦ (quot(n + a + 2, a + 2), rem(n + a + 2, a + 2))`.
pub fn dnc_lingo() -> Lingo {
    dnc(false)
}

/// Divide and check with the output pair swapped.
pub fn reverse_dnc_lingo() -> Lingo {
    dnc(true)
}

fn dnc(reversed: bool) -> Lingo {
    Lingo {
        id: if reversed { "rdnc" } else { "dnc" }.into(),
        d1: Domain::Nats,
        d2: Domain::NatPairs,
        params: ParamDomain::Nats,
        ingress_arity: 1,
        egress_arity: 1,
        f_checkable: true,
        kind: Kind::Dnc { reversed },
    }
}

impl Lingo {
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn d1(&self) -> &Domain {
        &self.d1
    }

    pub fn d2(&self) -> &Domain {
        &self.d2
    }

    pub fn param_domain(&self) -> &ParamDomain {
        &self.params
    }

    pub fn ingress_arity(&self) -> u32 {
        self.ingress_arity
    }

    pub fn egress_arity(&self) -> u32 {
        self.egress_arity
    }

    pub fn is_f_checkable(&self) -> bool {
        self.f_checkable
    }

    pub fn param_rule(&self) -> ParamRule {
        match &self.kind {
            Kind::Xor { width } => ParamRule::Xor(*width),
            Kind::XorBseq => ParamRule::XorBseq,
            Kind::Dnc { .. } => ParamRule::Dnc,
            Kind::Sharp(_) => ParamRule::Sharp,
            Kind::Horizontal(_) => ParamRule::Horizontal,
            Kind::Functional(..) => ParamRule::Functional,
            Kind::Auth(_) => ParamRule::Auth,
        }
    }

    /// The authenticating structure, when this lingo was built by
    /// [`crate::auth::authenticating`].
    pub fn as_auth(&self) -> Option<&AuthLingo> {
        match &self.kind {
            Kind::Auth(a) => Some(a),
            _ => None,
        }
    }

    /// Same lingo, with messages fragmented into `ingress` inbound and
    /// `egress` outbound pieces. Values are split as right-nested pairs, so
    /// the corresponding domain must be a product chain of that length.
    pub fn with_arities(mut self, ingress: u32, egress: u32) -> Result<Lingo> {
        if ingress == 0 || egress == 0 {
            return arg_err("arities must be positive");
        }
        if product_chain_len(&self.d1) < ingress {
            return arg_err(format!("{} cannot be split into {ingress} parts", self.d1));
        }
        if product_chain_len(&self.d2) < egress {
            return arg_err(format!("{} cannot be split into {egress} parts", self.d2));
        }
        self.ingress_arity = ingress;
        self.egress_arity = egress;
        Ok(self)
    }

    pub fn apply_f(&self, d1: &Value, a: &Parameter) -> Result<Value> {
        if !self.d1.contains(d1) {
            return domain_err(format!("{d1} is not in the input domain {} of {}", self.d1, self.id));
        }
        self.check_param(a)?;
        let out = self.f_raw(d1, a)?;
        if !self.d2.contains(&out) {
            return domain_err(format!("{} produced {out} outside {}", self.id, self.d2));
        }
        Ok(out)
    }

    pub fn apply_g(&self, d2: &Value, a: &Parameter) -> Result<Value> {
        self.apply_g_counting(d2, a).map(|(v, _)| v)
    }

    /// `apply_g`, also reporting how many horizontal-composition default
    /// branches were taken while decoding.
    pub fn apply_g_counting(&self, d2: &Value, a: &Parameter) -> Result<(Value, u32)> {
        if !self.d2.contains(d2) {
            return domain_err(format!("{d2} is not in the output domain {} of {}", self.d2, self.id));
        }
        self.check_param(a)?;
        let mut hits = 0;
        let out = self.g_raw(d2, a, &mut hits)?;
        if !self.d1.contains(&out) {
            return domain_err(format!("{} decoded {d2} to {out} outside {}", self.id, self.d1));
        }
        Ok((out, hits))
    }

    /// Whether `d2` is a genuine encoding under `a`, decided by the
    /// equation `f(g(d2, a), a) = d2`.
    pub fn check_compliance(&self, d2: &Value, a: &Parameter) -> Result<bool> {
        if !self.d2.contains(d2) {
            return domain_err(format!("{d2} is not in the output domain {} of {}", self.d2, self.id));
        }
        self.check_param(a)?;
        if self.cheap_reject(d2, a) {
            return Ok(false);
        }
        let mut hits = 0;
        let Ok(d1) = self.g_raw(d2, a, &mut hits) else {
            return Ok(false);
        };
        if !self.d1.contains(&d1) {
            return Ok(false);
        }
        Ok(self.f_raw(&d1, a).is_ok_and(|back| &back == d2))
    }

    /// A constant-time sufficient condition for non-compliance, where the
    /// lingo has one (divide and check: the remainder slot is at least `a + 2`).
    pub fn cheap_reject(&self, d2: &Value, a: &Parameter) -> bool {
        match &self.kind {
            Kind::Dnc { reversed } => {
                let (Some((x, y)), Some(a)) = (d2.as_pair(), a.as_scalar()) else {
                    return false;
                };
                let rem = if *reversed { x } else { y };
                rem.as_natural().is_some_and(|r| *r >= a + 2u32)
            }
            _ => false,
        }
    }

    fn check_param(&self, a: &Parameter) -> Result<()> {
        if self.params.contains(a) {
            return Ok(());
        }
        if let (ParamDomain::Distinct(_), Parameter::Pair(x, y)) = (&self.params, a) {
            if x == y {
                return Err(Error::Arg(format!("{} requires distinct parameter halves, got ({x}, {y})", self.id)));
            }
        }
        domain_err(format!("parameter {a} is not valid for {}", self.id))
    }

    pub(crate) fn f_raw(&self, d1: &Value, a: &Parameter) -> Result<Value> {
        match &self.kind {
            Kind::Xor { width } => {
                let (Value::BitVec { v, .. }, Some(s)) = (d1, a.as_scalar()) else {
                    return shape_err(&self.id, d1, a);
                };
                Ok(Value::BitVec { width: *width, v: xor(v, s) })
            }
            Kind::XorBseq => {
                let (Value::Nat(v), Some(s)) = (d1, a.as_scalar()) else {
                    return shape_err(&self.id, d1, a);
                };
                Ok(Value::Nat(xor(v, s)))
            }
            Kind::Dnc { reversed } => {
                let (Value::Nat(n), Some(a)) = (d1, a.as_scalar()) else {
                    return shape_err(&self.id, d1, a);
                };
                let (q, r) = divide(n, a);
                Ok(if *reversed {
                    Value::pair(Value::Nat(r), Value::Nat(q))
                } else {
                    Value::pair(Value::Nat(q), Value::Nat(r))
                })
            }
            Kind::Sharp(base) => {
                let Some((a1, a2)) = a.as_pair() else {
                    return shape_err(&self.id, d1, a);
                };
                Ok(Value::pair(base.f_raw(d1, a1)?, base.f_raw(d1, a2)?))
            }
            Kind::Functional(first, second) => {
                let Some((a1, a2)) = a.as_pair() else {
                    return shape_err(&self.id, d1, a);
                };
                second.f_raw(&first.f_raw(d1, a1)?, a2)
            }
            Kind::Horizontal(h) => h.f(d1, a),
            Kind::Auth(auth) => auth.f(d1, a),
        }
    }

    pub(crate) fn g_raw(&self, d2: &Value, a: &Parameter, hits: &mut u32) -> Result<Value> {
        match &self.kind {
            Kind::Xor { width } => {
                let (Value::BitVec { v, .. }, Some(s)) = (d2, a.as_scalar()) else {
                    return shape_err(&self.id, d2, a);
                };
                Ok(Value::BitVec { width: *width, v: xor(v, s) })
            }
            Kind::XorBseq => {
                let (Value::Nat(v), Some(s)) = (d2, a.as_scalar()) else {
                    return shape_err(&self.id, d2, a);
                };
                Ok(Value::Nat(xor(v, s)))
            }
            Kind::Dnc { reversed } => {
                let (Some((first, second)), Some(a)) = (d2.as_pair(), a.as_scalar()) else {
                    return shape_err(&self.id, d2, a);
                };
                let (q, r) = if *reversed { (second, first) } else { (first, second) };
                let (Value::Nat(q), Value::Nat(r)) = (q, r) else {
                    return shape_err(&self.id, d2, &Parameter::Scalar(a.clone()));
                };
                undivide(q, r, a).map(Value::Nat)
            }
            Kind::Sharp(base) => {
                let (Some((x, _)), Some((a1, _))) = (d2.as_pair(), a.as_pair()) else {
                    return shape_err(&self.id, d2, a);
                };
                base.g_raw(x, a1, hits)
            }
            Kind::Functional(first, second) => {
                let Some((a1, a2)) = a.as_pair() else {
                    return shape_err(&self.id, d2, a);
                };
                first.g_raw(&second.g_raw(d2, a2, hits)?, a1, hits)
            }
            Kind::Horizontal(h) => h.g(d2, a, hits),
            Kind::Auth(auth) => auth.g(d2, a, hits),
        }
    }
}

fn shape_err<T>(id: &str, v: &Value, a: &Parameter) -> Result<T> {
    domain_err(format!("{id} is not defined on ({v}, {a})"))
}

/// `(quot(n + a + 2, a + 2), rem(n + a + 2, a + 2))`
fn divide(n: &BigUint, a: &BigUint) -> (BigUint, BigUint) {
    let m = a + 2u32;
    let t = n + &m;
    (&t / &m, &t % &m)
}

/// `x·(a + 2) + y − (a + 2)`, undefined when negative.
fn undivide(x: &BigUint, y: &BigUint, a: &BigUint) -> Result<BigUint> {
    let m = a + 2u32;
    let t = x * &m + y;
    if t < m {
        return domain_err(format!("({x}, {y}) decodes to a negative number under parameter {a}"));
    }
    Ok(t - m)
}

fn product_chain_len(d: &Domain) -> u32 {
    match d {
        Domain::ProductOf(_, b) => 1 + product_chain_len(b),
        Domain::NatPairs => 2,
        _ => 1,
    }
}

/// Splits a right-nested pair chain into `parts` values.
pub fn split_fragments(v: &Value, parts: u32) -> Option<Vec<Value>> {
    let mut out = Vec::with_capacity(parts as usize);
    let mut cur = v;
    for _ in 1..parts {
        let (a, b) = cur.as_pair()?;
        out.push(a.clone());
        cur = b;
    }
    out.push(cur.clone());
    Some(out)
}

/// Inverse of [`split_fragments`].
pub fn join_fragments(mut parts: Vec<Value>) -> Option<Value> {
    let mut acc = parts.pop()?;
    while let Some(v) = parts.pop() {
        acc = Value::pair(v, acc);
    }
    Some(acc)
}
