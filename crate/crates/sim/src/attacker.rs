//! The on-path attacker: sees every message on the wire and may queue its
//! own messages behind them, but never removes or alters traffic.

use std::fmt;

use dialects_core::malleability::{commuting_recipe, nonzero_nat_sampler, xor_recipe, xor_sharp_recipe};
use dialects_core::{prf, Domain, Lingo, ParamRule, Recipe, SecretSeed, Value};
use num_bigint::BigUint;
use rand::seq::index::sample;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::message::Message;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Slot {
    First,
    Second,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", deny_unknown_fields)]
pub enum AttackerStrategy {
    #[default]
    None,
    /// Re-sends each observed message verbatim.
    ReplayLast {
        #[serde(default = "one")]
        rate: f64,
    },
    /// Sends a uniformly drawn wire value.
    RandomInject {
        #[serde(default = "one")]
        rate: f64,
    },
    /// Applies a malleability recipe (`xor`, `xor-sharp`, `commuting`) to the observed payload.
    RecipeInject {
        recipe: String,
        #[serde(default = "one")]
        rate: f64,
    },
    /// Zeroes one slot of an observed pair, keeping the other slot positive.
    StructuralZero {
        slot: Slot,
        #[serde(default = "one")]
        rate: f64,
    },
    /// Flips `flips` distinct bits of the observed payload.
    BitFlipInject {
        flips: u32,
        #[serde(default = "one")]
        rate: f64,
    },
}

impl AttackerStrategy {
    pub fn rate(&self) -> f64 {
        match self {
            AttackerStrategy::None => 0.0,
            AttackerStrategy::ReplayLast { rate }
            | AttackerStrategy::RandomInject { rate }
            | AttackerStrategy::RecipeInject { rate, .. }
            | AttackerStrategy::StructuralZero { rate, .. }
            | AttackerStrategy::BitFlipInject { rate, .. } => *rate,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if *self == AttackerStrategy::None {
            return Ok(());
        }
        let rate = self.rate();
        if !(rate > 0.0 && rate <= 1.0) {
            return Err(SimError::Config(format!("attack rate {rate} is outside (0, 1]")));
        }
        if let AttackerStrategy::BitFlipInject { flips: 0, .. } = self {
            return Err(SimError::Config("bit-flip attacks need at least one flip".into()));
        }
        Ok(())
    }
}

impl fmt::Display for AttackerStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttackerStrategy::None => return write!(f, "none"),
            AttackerStrategy::ReplayLast { .. } => write!(f, "replayLast")?,
            AttackerStrategy::RandomInject { .. } => write!(f, "randomInject")?,
            AttackerStrategy::RecipeInject { recipe, .. } => write!(f, "recipeInject({recipe})")?,
            AttackerStrategy::StructuralZero { slot, .. } => {
                write!(f, "structuralZero({})", if *slot == Slot::First { "first" } else { "second" })?
            }
            AttackerStrategy::BitFlipInject { flips, .. } => write!(f, "bitFlipInject({flips})")?,
        }
        if self.rate() < 1.0 {
            write!(f, "@{}", self.rate())?;
        }
        Ok(())
    }
}

#[derive(Debug)]
pub struct Attacker {
    strategy: AttackerStrategy,
    wire_domain: Domain,
    recipe: Option<Recipe>,
    stream: SecretSeed,
    draws: u64,
}

impl Attacker {
    /// `wire_domain` is what the attacker samples random injections from;
    /// `lingo` is the public lingo structure, if traffic is dialected.
    pub fn new(
        strategy: AttackerStrategy,
        lingo: Option<&Lingo>,
        wire_domain: Domain,
        stream: SecretSeed,
    ) -> Result<Attacker> {
        strategy.validate()?;
        let recipe = match &strategy {
            AttackerStrategy::RecipeInject { recipe, .. } => Some(build_recipe(recipe, lingo)?),
            _ => None,
        };
        Ok(Attacker { strategy, wire_domain, recipe, stream, draws: 0 })
    }

    fn draw(&mut self) -> u64 {
        let v = prf(&self.stream, self.draws);
        self.draws += 1;
        v
    }

    /// Sees one message and returns the injection to queue behind it, if any.
    pub fn observe(&mut self, msg: &Message) -> Option<Message> {
        if self.strategy == AttackerStrategy::None {
            return None;
        }
        let gate = self.draw() as f64 / 18_446_744_073_709_551_616.0;
        if gate >= self.strategy.rate() {
            return None;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.draw());
        let payload = match &self.strategy {
            AttackerStrategy::None => return None,
            AttackerStrategy::ReplayLast { .. } => msg.payload.clone(),
            AttackerStrategy::RandomInject { .. } => self.wire_domain.sample(&mut rng),
            AttackerStrategy::RecipeInject { .. } => {
                let r = self.recipe.as_ref().expect("built with the strategy");
                r.apply(&msg.payload, &r.sample_a0(rng.next_u64())).ok()?
            }
            AttackerStrategy::StructuralZero { slot, .. } => structural_zero(&msg.payload, *slot)?,
            AttackerStrategy::BitFlipInject { flips, .. } => flip_bits(&msg.payload, *flips, &mut rng)?,
        };
        Some(Message { to: msg.to.clone(), from: msg.from.clone(), payload, dialected: msg.dialected, seq: 0 })
    }
}

fn build_recipe(id: &str, lingo: Option<&Lingo>) -> Result<Recipe> {
    let lingo = lingo.ok_or_else(|| SimError::Config("recipe attacks need a lingo".into()))?;
    let width = match lingo.d1() {
        Domain::BitVecs(w) => Some(*w),
        _ => None,
    };
    let recipe = match (id, lingo.param_rule(), width) {
        ("xor", ParamRule::Xor(n), _) => xor_recipe(n)?,
        ("xor-sharp", ParamRule::Sharp, Some(n)) => xor_sharp_recipe(n)?,
        ("commuting", _, _) => {
            if lingo.d1() == &Domain::Nats {
                commuting_recipe(lingo, nonzero_nat_sampler)?
            } else {
                let params = lingo.param_domain().clone();
                commuting_recipe(lingo, move |d| params.sample(&mut ChaCha8Rng::seed_from_u64(d)))?
            }
        }
        _ => return Err(SimError::Config(format!("recipe {id:?} does not apply to {}", lingo.id()))),
    };
    Ok(recipe)
}

/// `(0, max(y, 1))` or `(max(x, 1), 0)` for a pair of naturals.
pub fn structural_zero(v: &Value, slot: Slot) -> Option<Value> {
    let (Value::Nat(x), Value::Nat(y)) = v.as_pair()? else {
        return None;
    };
    let one = BigUint::from(1u32);
    let keep = |n: &BigUint| Value::Nat(n.max(&one).clone());
    let zero = Value::Nat(BigUint::default());
    Some(match slot {
        Slot::First => Value::pair(zero, keep(y)),
        Slot::Second => Value::pair(keep(x), zero),
    })
}

/// Flips `flips` distinct uniformly chosen bits of a bit string, bit vector
/// or natural (over its current bit length).
pub fn flip_bits<R: RngCore>(v: &Value, flips: u32, rng: &mut R) -> Option<Value> {
    let (len, bits) = match v {
        Value::BitStr { len, bits } => (u64::from(*len), bits),
        Value::BitVec { width, v } => (u64::from(*width), v),
        Value::Nat(n) => (n.bits().max(1), n),
        Value::Pair(..) => return None,
    };
    let mut out = bits.clone();
    let k = (flips as usize).min(len as usize);
    for pos in sample(rng, len as usize, k) {
        let p = pos as u64;
        out.set_bit(p, !bits.bit(p));
    }
    Some(match v {
        Value::BitStr { len, .. } => Value::BitStr { len: *len, bits: out },
        Value::BitVec { width, .. } => Value::BitVec { width: *width, v: out },
        _ => Value::Nat(out),
    })
}
