//! Payload values and the domains they inhabit.
//!
//! Every input, output and default element handled by a lingo is a [`Value`].
//! The universe is closed: naturals, fixed-width bit vectors, pairs and
//! fixed-length bit strings. A [`Domain`] is a decidable subset of it.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::RngCore;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Map, Value as Json};

use crate::error::{Error, Result};

/// Upper bound (exclusive) for naturals drawn by the samplers on unbounded domains.
pub const SAMPLE_NAT_BITS: u32 = 32;

/// A payload value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Nat(BigUint),
    /// `v < 2^width`
    BitVec {
        width: u32,
        v: BigUint,
    },
    Pair(Box<Value>, Box<Value>),
    /// `bits < 2^len`; bit 1 of the sequence is the most significant bit.
    BitStr {
        len: u32,
        bits: BigUint,
    },
}

impl Value {
    pub fn nat(v: impl Into<BigUint>) -> Value {
        Value::Nat(v.into())
    }

    pub fn bit_vec(width: u32, v: impl Into<BigUint>) -> Result<Value> {
        let v = v.into();
        if width == 0 {
            return Err(Error::Arg("bit vector width must be positive".into()));
        }
        if v.bits() > u64::from(width) {
            return Err(Error::Domain(format!("{v} does not fit in {width} bits")));
        }
        Ok(Value::BitVec { width, v })
    }

    pub fn bit_str(len: u32, bits: impl Into<BigUint>) -> Result<Value> {
        let bits = bits.into();
        if len == 0 {
            return Err(Error::Arg("bit string length must be positive".into()));
        }
        if bits.bits() > u64::from(len) {
            return Err(Error::Domain(format!("{bits} does not fit in {len} bits")));
        }
        Ok(Value::BitStr { len, bits })
    }

    pub fn pair(a: Value, b: Value) -> Value {
        Value::Pair(Box::new(a), Box::new(b))
    }

    pub fn nat_pair(a: u64, b: u64) -> Value {
        Value::pair(Value::nat(a), Value::nat(b))
    }

    /// Checks the width invariants of bit vectors and bit strings, recursively.
    pub fn is_well_formed(&self) -> bool {
        match self {
            Value::Nat(_) => true,
            Value::BitVec { width, v } => *width > 0 && v.bits() <= u64::from(*width),
            Value::BitStr { len, bits } => *len > 0 && bits.bits() <= u64::from(*len),
            Value::Pair(a, b) => a.is_well_formed() && b.is_well_formed(),
        }
    }

    /// The natural carried by a scalar value, if any.
    pub fn as_natural(&self) -> Option<&BigUint> {
        match self {
            Value::Nat(v) | Value::BitVec { v, .. } => Some(v),
            Value::BitStr { bits, .. } => Some(bits),
            Value::Pair(..) => None,
        }
    }

    pub fn as_pair(&self) -> Option<(&Value, &Value)> {
        match self {
            Value::Pair(a, b) => Some((a, b)),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Json {
        match self {
            Value::Nat(v) => json!({"t": "nat", "v": nat_to_json(v)}),
            Value::BitVec { width, v } => json!({"t": "bv", "w": width, "v": nat_to_json(v)}),
            Value::Pair(a, b) => json!({"t": "pair", "a": a.to_json(), "b": b.to_json()}),
            Value::BitStr { len, bits } => json!({"t": "bs", "l": len, "v": nat_to_json(bits)}),
        }
    }

    pub fn from_json(j: &Json) -> Result<Value> {
        let obj = j.as_object().ok_or_else(|| Error::Parse(format!("expected a value object, got {j}")))?;
        let value = match tag(obj)? {
            "nat" => Value::Nat(nat_from_json(field(obj, "v")?)?),
            "bv" => Value::bit_vec(width_from_json(field(obj, "w")?)?, nat_from_json(field(obj, "v")?)?)?,
            "bs" => Value::bit_str(width_from_json(field(obj, "l")?)?, nat_from_json(field(obj, "v")?)?)?,
            "pair" => Value::pair(Value::from_json(field(obj, "a")?)?, Value::from_json(field(obj, "b")?)?),
            other => return Err(Error::Parse(format!("unknown value tag {other:?}"))),
        };
        Ok(value)
    }

    /// Parses the command-line shorthand: bare decimal (natural), `w:v`
    /// (bit vector), `[x,y]` (pair), or the wire JSON object.
    pub fn parse_literal(text: &str) -> Result<Value> {
        let text: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if text.starts_with('{') {
            let j: Json = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
            return Value::from_json(&j);
        }
        let mut parser = LiteralParser { src: text.as_bytes(), pos: 0 };
        let v = parser.value()?;
        if parser.pos != parser.src.len() {
            return Err(Error::Parse(format!("trailing input in value literal {text:?}")));
        }
        Ok(v)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Nat(v) | Value::BitVec { v, .. } => write!(f, "{v}"),
            Value::BitStr { bits, .. } => write!(f, "{bits}"),
            Value::Pair(a, b) => write!(f, "[{a},{b}]"),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = Json::deserialize(d)?;
        Value::from_json(&j).map_err(serde::de::Error::custom)
    }
}

struct LiteralParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl LiteralParser<'_> {
    fn value(&mut self) -> Result<Value> {
        if self.eat(b'[') {
            let a = self.value()?;
            self.expect(b',')?;
            let b = self.value()?;
            self.expect(b']')?;
            return Ok(Value::pair(a, b));
        }
        let first = self.number()?;
        if self.eat(b':') {
            let width = first.to_u32().ok_or_else(|| Error::Parse(format!("bit vector width {first} too large")))?;
            let v = self.number()?;
            return Value::bit_vec(width, v);
        }
        Ok(Value::Nat(first))
    }

    fn number(&mut self) -> Result<BigUint> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Parse(format!("expected a number at offset {start}")));
        }
        BigUint::parse_bytes(&self.src[start..self.pos], 10).ok_or_else(|| Error::Parse("bad decimal".into()))
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.src.get(self.pos) == Some(&c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(Error::Parse(format!("expected {:?} at offset {}", c as char, self.pos)))
        }
    }
}

const JSON_SAFE_BITS: u64 = 53;

pub(crate) fn nat_to_json(v: &BigUint) -> Json {
    if v.bits() <= JSON_SAFE_BITS {
        // Strictly below 2^53 whenever bits() <= 53.
        json!(v.to_u64().expect("fits in u64"))
    } else {
        Json::String(v.to_str_radix(10))
    }
}

pub(crate) fn nat_from_json(j: &Json) -> Result<BigUint> {
    match j {
        Json::Number(n) => n.as_u64().map(BigUint::from).ok_or_else(|| Error::Parse(format!("not a natural: {n}"))),
        Json::String(s) => {
            BigUint::parse_bytes(s.as_bytes(), 10).ok_or_else(|| Error::Parse(format!("not a natural: {s:?}")))
        }
        other => Err(Error::Parse(format!("not a natural: {other}"))),
    }
}

pub(crate) fn width_from_json(j: &Json) -> Result<u32> {
    j.as_u64().and_then(|w| u32::try_from(w).ok()).ok_or_else(|| Error::Parse(format!("bad width {j}")))
}

pub(crate) fn tag(obj: &Map<String, Json>) -> Result<&str> {
    obj.get("t").and_then(Json::as_str).ok_or_else(|| Error::Parse("missing tag field \"t\"".into()))
}

pub(crate) fn field<'a>(obj: &'a Map<String, Json>, name: &str) -> Result<&'a Json> {
    obj.get(name).ok_or_else(|| Error::Parse(format!("missing field {name:?}")))
}

/// A decidable set of values.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Domain {
    Nats,
    /// Naturals strictly below `2^bits`.
    NatsBelow(u32),
    BitVecs(u32),
    NatPairs,
    BitStrs(u32),
    ProductOf(Box<Domain>, Box<Domain>),
    /// Branches carry distinct 1-based indices in increasing order.
    UnionOf(Vec<(u32, Domain)>),
}

impl Domain {
    pub fn product(a: Domain, b: Domain) -> Domain {
        Domain::ProductOf(Box::new(a), Box::new(b))
    }

    pub fn union(branches: Vec<Domain>) -> Domain {
        Domain::UnionOf(branches.into_iter().enumerate().map(|(i, d)| (i as u32 + 1, d)).collect())
    }

    pub fn contains(&self, v: &Value) -> bool {
        match (self, v) {
            (Domain::Nats, Value::Nat(_)) => true,
            (Domain::NatsBelow(bits), Value::Nat(n)) => n.bits() <= u64::from(*bits),
            (Domain::BitVecs(w), Value::BitVec { width, v }) => w == width && v.bits() <= u64::from(*w),
            (Domain::BitStrs(l), Value::BitStr { len, bits }) => l == len && bits.bits() <= u64::from(*l),
            (Domain::NatPairs, Value::Pair(a, b)) => matches!(**a, Value::Nat(_)) && matches!(**b, Value::Nat(_)),
            (Domain::ProductOf(da, db), Value::Pair(a, b)) => da.contains(a) && db.contains(b),
            (Domain::UnionOf(branches), v) => branches.iter().any(|(_, d)| d.contains(v)),
            _ => false,
        }
    }

    /// Structural normal form: `ProductOf(Nats, Nats)` is `NatPairs`.
    pub fn normalized(&self) -> Domain {
        match self {
            Domain::ProductOf(a, b) => {
                let (a, b) = (a.normalized(), b.normalized());
                if a == Domain::Nats && b == Domain::Nats {
                    Domain::NatPairs
                } else {
                    Domain::product(a, b)
                }
            }
            Domain::UnionOf(bs) => Domain::UnionOf(bs.iter().map(|(i, d)| (*i, d.normalized())).collect()),
            d => d.clone(),
        }
    }

    pub fn same_as(&self, other: &Domain) -> bool {
        self.normalized() == other.normalized()
    }

    /// Sufficient syntactic test for `self ⊆ other`.
    pub fn is_subset_of(&self, other: &Domain) -> bool {
        let (a, b) = (self.normalized(), other.normalized());
        if a == b {
            return true;
        }
        match (&a, &b) {
            (Domain::NatsBelow(_), Domain::Nats) => true,
            (Domain::NatsBelow(x), Domain::NatsBelow(y)) => x <= y,
            (Domain::ProductOf(a1, a2), Domain::ProductOf(b1, b2)) => a1.is_subset_of(b1) && a2.is_subset_of(b2),
            (Domain::ProductOf(a1, a2), Domain::NatPairs) => {
                a1.is_subset_of(&Domain::Nats) && a2.is_subset_of(&Domain::Nats)
            }
            (Domain::UnionOf(bs), _) => bs.iter().all(|(_, d)| d.is_subset_of(&b)),
            (_, Domain::UnionOf(bs)) => bs.iter().any(|(_, d)| a.is_subset_of(d)),
            _ => false,
        }
    }

    /// Whether the domain has at least two elements.
    pub fn has_two_elements(&self) -> bool {
        match self {
            Domain::NatsBelow(b) | Domain::BitVecs(b) | Domain::BitStrs(b) => *b >= 1,
            Domain::Nats | Domain::NatPairs => true,
            Domain::ProductOf(a, b) => a.has_two_elements() || b.has_two_elements(),
            Domain::UnionOf(bs) => bs.len() >= 2 || bs.iter().any(|(_, d)| d.has_two_elements()),
        }
    }

    /// A canonical element, used as the default horizontal-composition value.
    pub fn zero(&self) -> Value {
        match self {
            Domain::Nats | Domain::NatsBelow(_) => Value::Nat(BigUint::zero()),
            Domain::BitVecs(w) => Value::BitVec { width: *w, v: BigUint::zero() },
            Domain::BitStrs(l) => Value::BitStr { len: *l, bits: BigUint::zero() },
            Domain::NatPairs => Value::nat_pair(0, 0),
            Domain::ProductOf(a, b) => Value::pair(a.zero(), b.zero()),
            Domain::UnionOf(bs) => bs.first().map(|(_, d)| d.zero()).unwrap_or(Value::Nat(BigUint::zero())),
        }
    }

    /// Reinterprets a shorthand literal as an element of this domain: bare
    /// naturals become bit vectors or bit strings of the right width, pairs
    /// are coerced componentwise, unions take the first branch that fits.
    pub fn coerce(&self, v: Value) -> Result<Value> {
        if self.contains(&v) {
            return Ok(v);
        }
        let coerced = match (self, &v) {
            (Domain::BitVecs(w), Value::Nat(n)) => Value::bit_vec(*w, n.clone())?,
            (Domain::BitStrs(l), Value::Nat(n)) => Value::bit_str(*l, n.clone())?,
            (Domain::ProductOf(da, db), Value::Pair(a, b)) => {
                Value::pair(da.coerce((**a).clone())?, db.coerce((**b).clone())?)
            }
            (Domain::UnionOf(bs), _) => {
                return bs
                    .iter()
                    .find_map(|(_, d)| d.coerce(v.clone()).ok())
                    .ok_or_else(|| Error::Domain(format!("{v} is in no branch of {self}")))
            }
            _ => return Err(Error::Domain(format!("{v} is not in {self}"))),
        };
        if self.contains(&coerced) {
            Ok(coerced)
        } else {
            Err(Error::Domain(format!("{v} is not in {self}")))
        }
    }

    /// Draws an element. Unbounded naturals are drawn below `2^32`.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> Value {
        match self {
            Domain::Nats => Value::Nat(random_bits(rng, SAMPLE_NAT_BITS)),
            Domain::NatsBelow(b) => Value::Nat(random_bits(rng, *b)),
            Domain::BitVecs(w) => Value::BitVec { width: *w, v: random_bits(rng, *w) },
            Domain::BitStrs(l) => Value::BitStr { len: *l, bits: random_bits(rng, *l) },
            Domain::NatPairs => Value::pair(Domain::Nats.sample(rng), Domain::Nats.sample(rng)),
            Domain::ProductOf(a, b) => Value::pair(a.sample(rng), b.sample(rng)),
            Domain::UnionOf(bs) => {
                let i = (rng.next_u64() % bs.len() as u64) as usize;
                bs[i].1.sample(rng)
            }
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Nats => write!(f, "Nat"),
            Domain::NatsBelow(b) => write!(f, "Nat<2^{b}"),
            Domain::BitVecs(w) => write!(f, "BitVec{{{w}}}"),
            Domain::NatPairs => write!(f, "NatPair"),
            Domain::BitStrs(l) => write!(f, "BitStr{{{l}}}"),
            Domain::ProductOf(a, b) => write!(f, "({a} x {b})"),
            Domain::UnionOf(bs) => {
                write!(f, "(")?;
                for (k, (i, d)) in bs.iter().enumerate() {
                    if k > 0 {
                        write!(f, " | ")?;
                    }
                    write!(f, "{i}:{d}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Uniform natural below `2^bits`.
pub fn random_bits<R: RngCore + ?Sized>(rng: &mut R, bits: u32) -> BigUint {
    if bits == 0 {
        return BigUint::zero();
    }
    let mut bytes = vec![0u8; bits.div_ceil(8) as usize];
    rng.fill_bytes(&mut bytes);
    let v = BigUint::from_bytes_be(&bytes);
    v & mask(bits)
}

/// `2^bits - 1`
pub fn mask(bits: u32) -> BigUint {
    (BigUint::one() << bits) - BigUint::one()
}

/// Bitwise xor of two naturals' binary expansions.
pub fn xor(a: &BigUint, b: &BigUint) -> BigUint {
    a ^ b
}
