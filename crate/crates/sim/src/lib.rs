//! Protocol dialects in action: a toy MQTT wrapped in dialect meta-actors,
//! run over a deterministic network with an on-path attacker.

pub mod attacker;
pub mod dialect;
pub mod error;
pub mod message;
pub mod mqtt;
pub mod scenario;
pub mod sim;
pub mod table;

pub use attacker::{Attacker, AttackerStrategy, Slot};
pub use dialect::{DialectActor, Step, TraceEvent};
pub use error::{ProtocolError, Result, SimError};
pub use message::Message;
pub use scenario::{ActorSpec, Role, Scenario, Setup, PLAIN};
pub use sim::{run, run_trial, run_with_traces, trial_seed, Report, TrialOutcome};
pub use table::{attack_table, render, TableRow};
