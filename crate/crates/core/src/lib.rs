//! Lingos: invertible, parameter-indexed payload transformations, with the
//! transforms and compositions used to build protocol dialects.
//!
//! ```
//! use dialects_core::{parse_lingo, Parameter, Value};
//!
//! let dnc = parse_lingo("dnc").unwrap();
//! let a = Parameter::scalar(3u32);
//! let wire = dnc.apply_f(&Value::nat(13u32), &a).unwrap();
//! assert_eq!(wire, Value::nat_pair(3, 3));
//! assert_eq!(dnc.apply_g(&wire, &a).unwrap(), Value::nat(13u32));
//! ```

pub mod auth;
pub mod compose;
pub mod error;
pub mod involution;
pub mod lingo;
pub mod malleability;
pub mod param;
pub mod prf;
pub mod selftest;
pub mod sharp;
pub mod spec;
pub mod value;

pub use auth::{authenticating, authenticating_with_width, AuthLingo};
pub use compose::{functional, horizontal, horizontal_param, throw_biased, HorizontalSpec};
pub use error::{Error, Result};
pub use involution::Involution;
pub use lingo::{dnc_lingo, reverse_dnc_lingo, xor_bseq_lingo, xor_lingo, Lingo, ParamRule};
pub use malleability::{verify_malleability, MalleabilityReport, Recipe};
pub use param::{ParamDomain, Parameter};
pub use prf::{param_for, param_for_link, prf, PeerCounters, SecretSeed};
pub use sharp::sharp;
pub use spec::{parse_lingo, parse_lingo_with, SpecContext};
pub use value::{Domain, Value};
