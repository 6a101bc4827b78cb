//! Keyed pseudo-randomness shared by the honest parties of a dialect: the
//! PRF, the per-lingo parameter rules and the per-peer message counters.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use sha2::{Digest, Sha256};

use crate::compose::horizontal_param_link;
use crate::error::{Error, Result};
use crate::lingo::{Kind, Lingo};
use crate::param::Parameter;
use crate::value::mask;

/// Parameter width for divide-and-check lingos.
pub const DNC_PARAM_BITS: u32 = 16;
/// Offset added to the inner counter when the two halves of a ♯ parameter collide.
pub const SHARP_RETRY_STRIDE: u64 = 0x9E37;

const MIN_SEED_BYTES: usize = 16;

/// Shared secret of an enclave. Never serialized; `Debug` is redacted.
#[derive(Clone, PartialEq, Eq)]
pub struct SecretSeed(Vec<u8>);

impl SecretSeed {
    pub fn new(bytes: Vec<u8>) -> Result<SecretSeed> {
        if bytes.len() < MIN_SEED_BYTES {
            return Err(Error::Arg(format!("seed must be at least {MIN_SEED_BYTES} bytes, got {}", bytes.len())));
        }
        Ok(SecretSeed(bytes))
    }

    pub fn from_hex(hex: &str) -> Result<SecretSeed> {
        let hex = hex.trim().trim_start_matches("0x");
        if !hex.len().is_multiple_of(2) || !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(Error::Parse("seed is not an even-length hex string".into()));
        }
        let bytes =
            (0..hex.len()).step_by(2).map(|i| u8::from_str_radix(&hex[i..i + 2], 16).expect("validated hex")).collect();
        SecretSeed::new(bytes)
    }

    /// 128-bit seed holding `v` big-endian in its low half.
    pub fn from_u64(v: u64) -> SecretSeed {
        let mut bytes = vec![0u8; 8];
        bytes.extend_from_slice(&v.to_be_bytes());
        SecretSeed(bytes)
    }

    /// Independent seed for a named sub-stream: `SHA-256(label ‖ 0x00 ‖ seed)`.
    pub fn derive(&self, label: &str) -> SecretSeed {
        let mut h = Sha256::new();
        h.update(label.as_bytes());
        h.update([0u8]);
        h.update(&self.0);
        SecretSeed(h.finalize().to_vec())
    }

    pub fn derive_indexed(&self, label: &str, index: u64) -> SecretSeed {
        let mut h = Sha256::new();
        h.update(label.as_bytes());
        h.update([0u8]);
        h.update(index.to_be_bytes());
        h.update(&self.0);
        SecretSeed(h.finalize().to_vec())
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Debug for SecretSeed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SecretSeed(<{} bytes>)", self.0.len())
    }
}

/// First eight bytes (big-endian) of `SHA-256(seed ‖ n as u64 big-endian)`.
pub fn prf(seed: &SecretSeed, n: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(&seed.0);
    h.update(n.to_be_bytes());
    let digest = h.finalize();
    u64::from_be_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}

/// `param : ℕ → A` for `lingo`. Authenticating lingos bind the parameter to
/// the first two identifiers of their identifier space.
pub fn param_for(lingo: &Lingo, seed: &SecretSeed, n: u64) -> Parameter {
    param_for_link(lingo, seed, n, None)
}

/// `param` for a message from `link.0` to `link.1`. Only authenticating
/// lingos (and compositions containing them) depend on the link.
pub fn param_for_link(lingo: &Lingo, seed: &SecretSeed, n: u64, link: Option<(&str, &str)>) -> Parameter {
    match &lingo.kind {
        Kind::Xor { width } => Parameter::Scalar(xor_param(seed, n, *width)),
        Kind::XorBseq => Parameter::scalar(prf(seed, n)),
        Kind::Dnc { .. } => Parameter::scalar(prf(seed, n) & ((1u64 << DNC_PARAM_BITS) - 1)),
        Kind::Sharp(base) => {
            let first = param_for_link(base, seed, n.wrapping_mul(2), link);
            let inner = n.wrapping_mul(2).wrapping_add(1);
            let mut retry = 0u64;
            loop {
                let second =
                    param_for_link(base, seed, inner.wrapping_add(retry.wrapping_mul(SHARP_RETRY_STRIDE)), link);
                if second != first {
                    break Parameter::pair(first, second);
                }
                retry += 1;
            }
        }
        Kind::Horizontal(_) => horizontal_param_link(lingo, seed, n, link).expect("horizontal lingo"),
        Kind::Functional(first, second) => Parameter::pair(
            param_for_link(first, seed, n, link),
            param_for_link(second, &seed.derive("fun.second"), n, link),
        ),
        Kind::Auth(auth) => auth.param_link(seed, n, link),
    }
}

fn xor_param(seed: &SecretSeed, n: u64, width: u32) -> BigUint {
    let words = u64::from(width.div_ceil(64));
    let mut acc = BigUint::default();
    if words == 1 {
        acc = BigUint::from(prf(seed, n));
    } else {
        let base = n.wrapping_mul(words);
        for i in 0..words {
            acc = (acc << 64) | BigUint::from(prf(seed, base.wrapping_add(i)));
        }
    }
    acc & mask(width)
}

/// Per-peer `(send, receive)` message counters, both starting at zero.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PeerCounters {
    counts: BTreeMap<String, (u64, u64)>,
}

impl PeerCounters {
    pub fn new() -> PeerCounters {
        PeerCounters::default()
    }

    pub fn bump_send(&mut self, peer: &str) {
        self.counts.entry(peer.to_string()).or_default().0 += 1;
    }

    pub fn bump_recv(&mut self, peer: &str) {
        self.counts.entry(peer.to_string()).or_default().1 += 1;
    }

    pub fn send_count(&self, peer: &str) -> u64 {
        self.counts.get(peer).map_or(0, |c| c.0)
    }

    pub fn recv_count(&self, peer: &str) -> u64 {
        self.counts.get(peer).map_or(0, |c| c.1)
    }

    pub fn get(&self, peer: &str) -> (u64, u64) {
        self.counts.get(peer).copied().unwrap_or_default()
    }

    pub fn peers(&self) -> impl Iterator<Item = (&str, (u64, u64))> {
        self.counts.iter().map(|(k, v)| (k.as_str(), *v))
    }
}
