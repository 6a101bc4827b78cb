//! Malleability recipes and their empirical verifier.
//!
//! A recipe `t(x, y)` lets an attacker who sees a genuine encoding `x` and
//! picks `y ∈ A0` produce a *different* encoding that is still compliant
//! with the unknown parameter.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{arg_err, domain_err, Result};
use crate::lingo::Lingo;
use crate::param::Parameter;
use crate::prf::{prf, SecretSeed};
use crate::value::{random_bits, xor, Value};

type Term = dyn Fn(&Value, &Parameter) -> Result<Value> + Send + Sync;
type Sampler = dyn Fn(u64) -> Parameter + Send + Sync;

#[derive(Clone)]
pub struct Recipe {
    id: String,
    target: String,
    term: Arc<Term>,
    a0: Arc<Sampler>,
}

impl fmt::Debug for Recipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Recipe").field("id", &self.id).field("target", &self.target).finish_non_exhaustive()
    }
}

impl Recipe {
    /// `term` is `t(x, y)`; `a0` maps a uniform 64-bit draw into `A0`.
    pub fn new(
        id: impl Into<String>,
        target_lingo_id: impl Into<String>,
        term: impl Fn(&Value, &Parameter) -> Result<Value> + Send + Sync + 'static,
        a0: impl Fn(u64) -> Parameter + Send + Sync + 'static,
    ) -> Recipe {
        Recipe { id: id.into(), target: target_lingo_id.into(), term: Arc::new(term), a0: Arc::new(a0) }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn target_lingo_id(&self) -> &str {
        &self.target
    }

    pub fn apply(&self, d2: &Value, a: &Parameter) -> Result<Value> {
        (self.term)(d2, a)
    }

    pub fn sample_a0(&self, draw: u64) -> Parameter {
        (self.a0)(draw)
    }
}

/// Uniform nonzero natural below `2^bits`.
fn nonzero_bits(draw: u64, bits: u32) -> BigUint {
    let v = random_bits(&mut ChaCha8Rng::seed_from_u64(draw), bits);
    if v == BigUint::default() {
        BigUint::from(1u32)
    } else {
        v
    }
}

fn xor_scalar(x: &Value, y: &Parameter, width: u32) -> Result<Value> {
    match (x, y.as_scalar()) {
        (Value::BitVec { width: w, v }, Some(s)) if *w == width && s.bits() <= u64::from(width) => {
            Ok(Value::BitVec { width, v: xor(v, s) })
        }
        _ => domain_err(format!("xor recipe is not defined on ({x}, {y})")),
    }
}

/// `t(x, y) = x ⊕ y` over `A0 = {0,1}ⁿ \ {0}`, for `xor:n`.
pub fn xor_recipe(n: u32) -> Result<Recipe> {
    if n == 0 {
        return arg_err("xor recipe width must be at least 1");
    }
    Ok(Recipe::new(
        "xor",
        format!("xor:{n}"),
        move |x, y| xor_scalar(x, y, n),
        move |draw| Parameter::Scalar(nonzero_bits(draw, n)),
    ))
}

/// `t((x1, x2), (y1, y2)) = (x1 ⊕ y1, x2 ⊕ y1)` for `sharp(xor:n)`. Only
/// `y1` perturbs the pair; `A0` requires `y1 ≠ 0`.
pub fn xor_sharp_recipe(n: u32) -> Result<Recipe> {
    if n < 2 {
        return arg_err("the sharp xor recipe needs width at least 2");
    }
    Ok(Recipe::new(
        "xor-sharp",
        format!("sharp(xor:{n})"),
        move |x, y| {
            let (Some((x1, x2)), Some((y1, _))) = (x.as_pair(), y.as_pair()) else {
                return domain_err(format!("sharp xor recipe is not defined on ({x}, {y})"));
            };
            Ok(Value::pair(xor_scalar(x1, y1, n)?, xor_scalar(x2, y1, n)?))
        },
        move |draw| {
            let y1 = nonzero_bits(draw, n);
            let mut rng = ChaCha8Rng::seed_from_u64(draw ^ 0x5eed);
            let y2 = loop {
                let v = random_bits(&mut rng, n);
                if v != y1 {
                    break v;
                }
            };
            Parameter::pair(Parameter::Scalar(y1), Parameter::Scalar(y2))
        },
    ))
}

/// `t(x, y) = f(x, y)` for lingos with `D2 ⊆ D1` whose encodings commute.
pub fn commuting_recipe(lingo: &Lingo, a0: impl Fn(u64) -> Parameter + Send + Sync + 'static) -> Result<Recipe> {
    if !lingo.d2().is_subset_of(lingo.d1()) {
        return arg_err(format!(
            "{}: output domain {} is not contained in input domain {}",
            lingo.id(),
            lingo.d2(),
            lingo.d1()
        ));
    }
    let l = lingo.clone();
    Ok(Recipe::new("commuting", lingo.id(), move |x, y| l.apply_f(x, y), a0))
}

/// Nonzero naturals below `2^32`, the `A0` used with `xorbseq`.
pub fn nonzero_nat_sampler(draw: u64) -> Parameter {
    Parameter::scalar(draw % u64::from(u32::MAX) + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MalleabilityReport {
    pub samples: u64,
    pub cond1_violations: u64,
    pub cond2_violations: u64,
    pub verdict: bool,
}

/// Draws `samples` triples `(d1, a, a')` and counts violations of the two
/// malleability conditions: the forgery must differ from the original, and
/// must be compliant with the original parameter. Sample `i` is drawn from
/// `prf(seed, i)` alone.
pub fn verify_malleability(lingo: &Lingo, recipe: &Recipe, samples: u64, seed: u64) -> Result<MalleabilityReport> {
    if recipe.target_lingo_id() != lingo.id() {
        return arg_err(format!("recipe {} targets {}, not {}", recipe.id(), recipe.target_lingo_id(), lingo.id()));
    }
    if samples == 0 {
        return arg_err("at least one sample is required");
    }
    let seed = SecretSeed::from_u64(seed);
    let mut report = MalleabilityReport { samples, cond1_violations: 0, cond2_violations: 0, verdict: false };
    for i in 0..samples {
        let mut rng = ChaCha8Rng::seed_from_u64(prf(&seed, i));
        let d1 = lingo.d1().sample(&mut rng);
        let a = lingo.param_domain().sample(&mut rng);
        let a_prime = recipe.sample_a0(rng.next_u64());
        let genuine = lingo.apply_f(&d1, &a)?;
        match recipe.apply(&genuine, &a_prime) {
            Ok(forged) => {
                if forged == genuine {
                    report.cond1_violations += 1;
                }
                if !lingo.check_compliance(&forged, &a).unwrap_or(false) {
                    report.cond2_violations += 1;
                }
            }
            Err(_) => report.cond2_violations += 1,
        }
    }
    report.verdict = report.cond1_violations == 0 && report.cond2_violations == 0;
    Ok(report)
}
