//! Lingo parameters and parameter carriers.

use std::fmt;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::RngCore;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value as Json};

use crate::error::{Error, Result};
use crate::involution::Involution;
use crate::value::{field, nat_from_json, nat_to_json, random_bits, tag, width_from_json, SAMPLE_NAT_BITS};

/// A parameter `a ∈ A` selecting one instance of a lingo.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parameter {
    Scalar(BigUint),
    Pair(Box<Parameter>, Box<Parameter>),
    /// Branch `index` (1-based) of a horizontal composition.
    Tagged {
        index: u32,
        inner: Box<Parameter>,
    },
    /// `(a0, σ, d)` of an authenticating lingo.
    Auth {
        a0: Box<Parameter>,
        sigma: Involution,
        d: BigUint,
    },
}

impl Parameter {
    pub fn scalar(v: impl Into<BigUint>) -> Parameter {
        Parameter::Scalar(v.into())
    }

    pub fn pair(a: Parameter, b: Parameter) -> Parameter {
        Parameter::Pair(Box::new(a), Box::new(b))
    }

    pub fn tagged(index: u32, inner: Parameter) -> Parameter {
        Parameter::Tagged { index, inner: Box::new(inner) }
    }

    pub fn auth(a0: Parameter, sigma: Involution, d: impl Into<BigUint>) -> Parameter {
        Parameter::Auth { a0: Box::new(a0), sigma, d: d.into() }
    }

    pub fn as_scalar(&self) -> Option<&BigUint> {
        match self {
            Parameter::Scalar(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_pair(&self) -> Option<(&Parameter, &Parameter)> {
        match self {
            Parameter::Pair(a, b) => Some((a, b)),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Json {
        match self {
            Parameter::Scalar(v) => json!({"t": "scalar", "v": nat_to_json(v)}),
            Parameter::Pair(a, b) => json!({"t": "ppair", "a": a.to_json(), "b": b.to_json()}),
            Parameter::Tagged { index, inner } => json!({"t": "tagged", "i": index, "p": inner.to_json()}),
            Parameter::Auth { a0, sigma, d } => {
                json!({"t": "auth", "a0": a0.to_json(), "sigma": sigma.mapping(), "d": nat_to_json(d)})
            }
        }
    }

    pub fn from_json(j: &Json) -> Result<Parameter> {
        let obj = j.as_object().ok_or_else(|| Error::Parse(format!("expected a parameter object, got {j}")))?;
        let p = match tag(obj)? {
            "scalar" => Parameter::Scalar(nat_from_json(field(obj, "v")?)?),
            "ppair" => {
                Parameter::pair(Parameter::from_json(field(obj, "a")?)?, Parameter::from_json(field(obj, "b")?)?)
            }
            "tagged" => Parameter::tagged(width_from_json(field(obj, "i")?)?, Parameter::from_json(field(obj, "p")?)?),
            "auth" => {
                let mapping = field(obj, "sigma")?
                    .as_array()
                    .ok_or_else(|| Error::Parse("sigma must be an array".into()))?
                    .iter()
                    .map(width_from_json)
                    .collect::<Result<Vec<_>>>()?;
                Parameter::auth(
                    Parameter::from_json(field(obj, "a0")?)?,
                    Involution::from_mapping(mapping)?,
                    nat_from_json(field(obj, "d")?)?,
                )
            }
            other => return Err(Error::Parse(format!("unknown parameter tag {other:?}"))),
        };
        Ok(p)
    }

    /// Command-line shorthand: decimal scalar, `[p,q]` pair, `i:p` tagged,
    /// or the JSON encoding.
    pub fn parse_literal(text: &str) -> Result<Parameter> {
        let text: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if text.starts_with('{') {
            let j: Json = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
            return Parameter::from_json(&j);
        }
        let (p, rest) = parse_param(&text)?;
        if !rest.is_empty() {
            return Err(Error::Parse(format!("trailing input {rest:?} in parameter literal")));
        }
        Ok(p)
    }
}

fn parse_param(s: &str) -> Result<(Parameter, &str)> {
    if let Some(rest) = s.strip_prefix('[') {
        let (a, rest) = parse_param(rest)?;
        let rest = rest.strip_prefix(',').ok_or_else(|| Error::Parse("expected ',' in parameter pair".into()))?;
        let (b, rest) = parse_param(rest)?;
        let rest = rest.strip_prefix(']').ok_or_else(|| Error::Parse("expected ']' closing parameter pair".into()))?;
        return Ok((Parameter::pair(a, b), rest));
    }
    let end = s.find(|c: char| !c.is_ascii_digit()).unwrap_or(s.len());
    if end == 0 {
        return Err(Error::Parse(format!("expected a number in parameter literal at {s:?}")));
    }
    let n = BigUint::parse_bytes(&s.as_bytes()[..end], 10).ok_or_else(|| Error::Parse("bad decimal".into()))?;
    let rest = &s[end..];
    if let Some(rest) = rest.strip_prefix(':') {
        let index = n.to_u32().ok_or_else(|| Error::Parse(format!("branch index {n} too large")))?;
        let (inner, rest) = parse_param(rest)?;
        return Ok((Parameter::tagged(index, inner), rest));
    }
    Ok((Parameter::Scalar(n), rest))
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parameter::Scalar(v) => write!(f, "{v}"),
            Parameter::Pair(a, b) => write!(f, "[{a},{b}]"),
            Parameter::Tagged { index, inner } => write!(f, "{index}:{inner}"),
            Parameter::Auth { a0, sigma, d } => write!(f, "auth({a0},σ/{},{d})", sigma.size()),
        }
    }
}

impl Serialize for Parameter {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Parameter {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = Json::deserialize(d)?;
        Parameter::from_json(&j).map_err(serde::de::Error::custom)
    }
}

/// The carrier set `A` of a lingo.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParamDomain {
    /// Scalars below `2^bits`.
    Bits(u32),
    Nats,
    /// `A ⊗ A`: pairs with distinct halves.
    Distinct(Box<ParamDomain>),
    Product(Box<ParamDomain>, Box<ParamDomain>),
    /// `⋃ A_i × {i}`; branch `i` is `branches[i - 1]`.
    Tagged(Vec<ParamDomain>),
    Auth {
        base: Box<ParamDomain>,
        size: u32,
        hash_bits: u32,
    },
}

impl ParamDomain {
    pub fn contains(&self, p: &Parameter) -> bool {
        match (self, p) {
            (ParamDomain::Bits(b), Parameter::Scalar(v)) => v.bits() <= u64::from(*b),
            (ParamDomain::Nats, Parameter::Scalar(_)) => true,
            (ParamDomain::Distinct(inner), Parameter::Pair(a, b)) => a != b && inner.contains(a) && inner.contains(b),
            (ParamDomain::Product(da, db), Parameter::Pair(a, b)) => da.contains(a) && db.contains(b),
            (ParamDomain::Tagged(bs), Parameter::Tagged { index, inner }) => {
                *index >= 1 && (*index as usize) <= bs.len() && bs[*index as usize - 1].contains(inner)
            }
            (ParamDomain::Auth { base, size, hash_bits }, Parameter::Auth { a0, sigma, d }) => {
                base.contains(a0) && sigma.size() == *size && d.bits() <= u64::from(*hash_bits)
            }
            _ => false,
        }
    }

    /// Draws a parameter. Unbounded scalars are drawn below `2^32`.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> Parameter {
        match self {
            ParamDomain::Bits(b) => Parameter::Scalar(random_bits(rng, *b)),
            ParamDomain::Nats => Parameter::Scalar(random_bits(rng, SAMPLE_NAT_BITS)),
            ParamDomain::Distinct(inner) => loop {
                let (a, b) = (inner.sample(rng), inner.sample(rng));
                if a != b {
                    break Parameter::pair(a, b);
                }
            },
            ParamDomain::Product(a, b) => Parameter::pair(a.sample(rng), b.sample(rng)),
            ParamDomain::Tagged(bs) => {
                let i = (rng.next_u64() % bs.len() as u64) as usize;
                Parameter::tagged(i as u32 + 1, bs[i].sample(rng))
            }
            ParamDomain::Auth { base, size, hash_bits } => Parameter::auth(
                base.sample(rng),
                Involution::from_seed(rng.next_u64(), *size),
                random_bits(rng, *hash_bits),
            ),
        }
    }
}
