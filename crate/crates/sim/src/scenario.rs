use std::collections::BTreeSet;

use dialects_core::{parse_lingo_with, Lingo, SecretSeed, SpecContext};
use serde::Deserialize;

use crate::attacker::AttackerStrategy;
use crate::error::{Result, SimError};
use crate::mqtt::{Codec, Command};

/// Lingo spec that runs the protocol without a dialect.
pub const PLAIN: &str = "plain";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Role {
    Client,
    Broker,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActorSpec {
    pub id: String,
    pub role: Role,
    #[serde(default)]
    pub script: Vec<String>,
}

impl ActorSpec {
    pub fn client(id: &str, script: &[&str]) -> ActorSpec {
        ActorSpec { id: id.into(), role: Role::Client, script: script.iter().map(|s| s.to_string()).collect() }
    }

    pub fn broker(id: &str) -> ActorSpec {
        ActorSpec { id: id.into(), role: Role::Broker, script: Vec::new() }
    }
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct ScenarioFile {
    #[serde(alias = "seed")]
    seed_hex: String,
    lingo_spec: String,
    actors: Vec<ActorSpec>,
    #[serde(default)]
    attacker: AttackerStrategy,
    #[serde(default = "default_trials")]
    trials: u64,
    #[serde(default = "default_max_steps")]
    max_steps: u64,
}

fn default_trials() -> u64 {
    1
}

fn default_max_steps() -> u64 {
    10_000
}

/// A runnable experiment. The seed is held as a [`SecretSeed`] and never
/// written back out.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub seed: SecretSeed,
    pub lingo_spec: String,
    pub actors: Vec<ActorSpec>,
    pub attacker: AttackerStrategy,
    pub trials: u64,
    pub max_steps: u64,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Scenario> {
        let f: ScenarioFile = serde_json::from_str(text).map_err(|e| SimError::Config(format!("scenario: {e}")))?;
        let seed = SecretSeed::from_hex(&f.seed_hex).map_err(|e| SimError::Config(e.to_string()))?;
        let s = Scenario {
            seed,
            lingo_spec: f.lingo_spec,
            actors: f.actors,
            attacker: f.attacker,
            trials: f.trials,
            max_steps: f.max_steps,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let ids: BTreeSet<&str> = self.actors.iter().map(|a| a.id.as_str()).collect();
        if ids.len() != self.actors.len() {
            return Err(SimError::Config("actor ids must be unique".into()));
        }
        if self.actors.len() < 2 {
            return Err(SimError::Config("a scenario needs at least two actors".into()));
        }
        if self.trials == 0 || self.max_steps == 0 {
            return Err(SimError::Config("trials and maxSteps must be positive".into()));
        }
        self.attacker.validate()?;
        for a in &self.actors {
            if a.role == Role::Broker && !a.script.is_empty() {
                return Err(SimError::Config(format!("broker {} cannot have a script", a.id)));
            }
            for c in &a.script {
                if let Command::Connect(Some(b)) = Command::parse(c)? {
                    if !ids.contains(b.as_str()) {
                        return Err(SimError::Config(format!("{} connects to unknown actor {b}", a.id)));
                    }
                }
            }
        }
        self.setup().map(|_| ())
    }

    /// The lingo (none for [`PLAIN`]) and payload codec this scenario runs with.
    pub fn setup(&self) -> Result<Setup> {
        if self.lingo_spec.trim() == PLAIN {
            return Ok(Setup { lingo: None, codec: Codec::for_domain(&dialects_core::Domain::Nats)? });
        }
        let ctx = SpecContext { oids: self.actors.iter().map(|a| a.id.clone()).collect() };
        let lingo = parse_lingo_with(&self.lingo_spec, &ctx).map_err(|e| SimError::Config(e.to_string()))?;
        let codec = Codec::for_domain(lingo.d1())?;
        Ok(Setup { lingo: Some(lingo), codec })
    }

    pub(crate) fn default_broker(&self) -> Option<&str> {
        let mut brokers = self.actors.iter().filter(|a| a.role == Role::Broker);
        match (brokers.next(), brokers.next()) {
            (Some(b), None) => Some(&b.id),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Setup {
    pub lingo: Option<Lingo>,
    pub codec: Codec,
}

impl Setup {
    /// The same payload encoding with the dialect removed.
    pub fn undialected(&self) -> Setup {
        Setup { lingo: None, codec: self.codec.clone() }
    }
}
