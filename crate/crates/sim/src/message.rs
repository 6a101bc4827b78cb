use dialects_core::Value;

/// A message in flight or in an actor's buffers. `seq` is assigned by the
/// network when the message is enqueued and is zero before that.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub to: String,
    pub from: String,
    pub payload: Value,
    pub dialected: bool,
    pub seq: u64,
}

impl Message {
    pub fn plain(from: &str, to: &str, payload: Value) -> Message {
        Message { to: to.into(), from: from.into(), payload, dialected: false, seq: 0 }
    }
}
