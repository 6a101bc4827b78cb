//! A toy MQTT: connect handshake, subscribe, publish fan-out and disconnect
//! between clients and one broker, over payloads from a lingo's input domain.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use dialects_core::{Domain, Value};
use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Value as Json};

use crate::error::{ProtocolError, Result, SimError};
use crate::message::Message;

const TAG_BITS: u32 = 4;
const MAX_TOPIC_BITS: u32 = 8;
const MIN_WIDTH: u32 = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Packet {
    Connect,
    Connack,
    Subscribe { topic: u8 },
    Publish { topic: u8, body: BigUint },
    Disconnect,
}

impl Packet {
    fn tag(&self) -> u32 {
        match self {
            Packet::Connect => 1,
            Packet::Connack => 2,
            Packet::Subscribe { .. } => 3,
            Packet::Publish { .. } => 4,
            Packet::Disconnect => 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Carrier {
    Nat,
    BitVec,
}

/// Packs a packet into one natural, low bits first: a 4-bit tag, then the
/// topic, then the body. With a width `w` the topic takes
/// `min(8, (w - 4) / 2)` bits and the body the rest; unbounded naturals give
/// the topic 8 bits and the body no limit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codec {
    carrier: Carrier,
    width: Option<u32>,
}

impl Codec {
    pub fn for_domain(d: &Domain) -> Result<Codec> {
        let (carrier, width) = match d {
            Domain::Nats => (Carrier::Nat, None),
            Domain::NatsBelow(w) => (Carrier::Nat, Some(*w)),
            Domain::BitVecs(w) => (Carrier::BitVec, Some(*w)),
            _ => return Err(SimError::Config(format!("MQTT payloads cannot be carried in {d}"))),
        };
        if width.is_some_and(|w| w < MIN_WIDTH) {
            return Err(SimError::Config(format!("{d} is narrower than {MIN_WIDTH} bits")));
        }
        Ok(Codec { carrier, width })
    }

    pub fn domain(&self) -> Domain {
        match (self.carrier, self.width) {
            (Carrier::Nat, None) => Domain::Nats,
            (Carrier::Nat, Some(w)) => Domain::NatsBelow(w),
            (Carrier::BitVec, w) => Domain::BitVecs(w.expect("bit vectors have a width")),
        }
    }

    pub fn topic_bits(&self) -> u32 {
        self.width.map_or(MAX_TOPIC_BITS, |w| MAX_TOPIC_BITS.min((w - TAG_BITS) / 2))
    }

    /// Bits available to a publish body, `None` when unbounded.
    pub fn body_bits(&self) -> Option<u32> {
        self.width.map(|w| w - TAG_BITS - self.topic_bits())
    }

    pub fn encode(&self, p: &Packet) -> Result<Value> {
        let (topic, body) = match p {
            Packet::Subscribe { topic } => (*topic, BigUint::zero()),
            Packet::Publish { topic, body } => (*topic, body.clone()),
            _ => (0, BigUint::zero()),
        };
        if u32::from(topic) >> self.topic_bits() != 0 {
            return Err(SimError::Config(format!("topic {topic} needs more than {} bits", self.topic_bits())));
        }
        if let Some(b) = self.body_bits() {
            if body.bits() > u64::from(b) {
                return Err(SimError::Config(format!("body {body:x} needs more than {b} bits")));
            }
        }
        let shift = TAG_BITS + self.topic_bits();
        let v = (body << shift) | BigUint::from(u32::from(topic) << TAG_BITS | p.tag());
        Ok(match self.carrier {
            Carrier::Nat => Value::Nat(v),
            Carrier::BitVec => Value::BitVec { width: self.width.expect("bit vectors have a width"), v },
        })
    }

    /// Strict decoding: unknown tags and stray topic or body bits are errors.
    pub fn decode(&self, v: &Value) -> Option<Packet> {
        if !self.domain().contains(v) {
            return None;
        }
        let n = match v {
            Value::Nat(n) | Value::BitVec { v: n, .. } => n,
            _ => return None,
        };
        let tag = (n & BigUint::from(0xfu32)).to_u32()?;
        let topic = ((n >> TAG_BITS) & BigUint::from((1u32 << self.topic_bits()) - 1)).to_u8()?;
        let body = n >> (TAG_BITS + self.topic_bits());
        let bare = topic == 0 && body.is_zero();
        match tag {
            1 if bare => Some(Packet::Connect),
            2 if bare => Some(Packet::Connack),
            3 if body.is_zero() => Some(Packet::Subscribe { topic }),
            4 => Some(Packet::Publish { topic, body }),
            5 if bare => Some(Packet::Disconnect),
            _ => None,
        }
    }
}

/// One line of a client script.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    /// Connect to the named broker, or the scenario's only broker if `None`.
    Connect(Option<String>),
    Subscribe(u8),
    Publish(u8, BigUint),
    Disconnect,
}

impl Command {
    /// `connect`, `connect:<broker>`, `subscribe:<topic>`, `publish:<topic>:<hexbody>`, `disconnect`.
    pub fn parse(s: &str) -> Result<Command> {
        let bad = || SimError::Config(format!("bad script command {s:?}"));
        let topic = |t: &str| t.parse::<u8>().map_err(|_| bad());
        let parts: Vec<&str> = s.trim().split(':').collect();
        match parts.as_slice() {
            ["connect"] => Ok(Command::Connect(None)),
            ["connect", b] => Ok(Command::Connect(Some(b.to_string()))),
            ["subscribe", t] => Ok(Command::Subscribe(topic(t)?)),
            ["publish", t, body] => {
                let bytes = hex::decode(if body.len() % 2 == 1 { format!("0{body}") } else { body.to_string() })
                    .map_err(|_| bad())?;
                Ok(Command::Publish(topic(t)?, BigUint::from_bytes_be(&bytes)))
            }
            ["disconnect"] => Ok(Command::Disconnect),
            _ => Err(bad()),
        }
    }
}

/// Outcome of one inner-protocol step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InnerStep {
    Idle,
    Progress(Vec<Message>),
    Fault(ProtocolError),
}

#[derive(Debug, Clone)]
pub struct MqttClient {
    id: String,
    codec: Codec,
    script: VecDeque<Command>,
    /// Broker a connect was sent to and not yet acknowledged.
    pending: Option<String>,
    peer: Option<String>,
    received: Vec<(u8, BigUint)>,
    ignored: u64,
}

impl MqttClient {
    pub fn new(id: &str, codec: Codec, script: Vec<Command>, default_broker: Option<&str>) -> Result<MqttClient> {
        let script = script
            .into_iter()
            .map(|c| match c {
                Command::Connect(None) => default_broker
                    .map(|b| Command::Connect(Some(b.to_string())))
                    .ok_or_else(|| SimError::Config(format!("{id}: connect needs a broker"))),
                c => Ok(c),
            })
            .collect::<Result<_>>()?;
        Ok(MqttClient { id: id.into(), codec, script, pending: None, peer: None, received: Vec::new(), ignored: 0 })
    }

    pub fn peer(&self) -> Option<&str> {
        self.peer.as_deref()
    }

    pub fn received(&self) -> &[(u8, BigUint)] {
        &self.received
    }

    pub fn step(&mut self, inbox: Option<Message>) -> InnerStep {
        if let Some(m) = inbox {
            return self.receive(m);
        }
        let Some(cmd) = self.script.front() else {
            return InnerStep::Idle;
        };
        let (to, packet) = match cmd {
            Command::Connect(b) => {
                let b = b.clone().expect("resolved at construction");
                self.pending = Some(b.clone());
                (b, Packet::Connect)
            }
            Command::Subscribe(_) | Command::Publish(..) | Command::Disconnect => {
                let Some(peer) = self.peer.clone() else {
                    return InnerStep::Idle;
                };
                match cmd {
                    Command::Subscribe(t) => (peer, Packet::Subscribe { topic: *t }),
                    Command::Publish(t, body) => (peer, Packet::Publish { topic: *t, body: body.clone() }),
                    _ => {
                        self.peer = None;
                        (peer, Packet::Disconnect)
                    }
                }
            }
        };
        self.script.pop_front();
        match self.codec.encode(&packet) {
            Ok(v) => InnerStep::Progress(vec![Message::plain(&self.id, &to, v)]),
            Err(e) => self.fault(e.to_string()),
        }
    }

    fn receive(&mut self, m: Message) -> InnerStep {
        match self.codec.decode(&m.payload) {
            Some(Packet::Connack) => {
                if self.pending.as_deref() != Some(m.from.as_str()) {
                    return self.fault(format!("connack from unexpected broker {}", m.from));
                }
                self.pending = None;
                self.peer = Some(m.from);
            }
            Some(Packet::Publish { topic, body }) if self.peer.as_deref() == Some(m.from.as_str()) => {
                self.received.push((topic, body));
            }
            _ => self.ignored += 1,
        }
        InnerStep::Progress(Vec::new())
    }

    fn fault(&self, reason: String) -> InnerStep {
        InnerStep::Fault(ProtocolError { actor: self.id.clone(), reason })
    }

    pub fn snapshot(&self) -> Json {
        json!({
            "id": self.id,
            "peer": self.peer,
            "scriptLeft": self.script.len(),
            "received": self.received.iter().map(|(t, b)| json!([t, b.to_str_radix(16)])).collect::<Vec<_>>(),
            "ignored": self.ignored,
        })
    }
}

#[derive(Debug, Clone)]
pub struct MqttBroker {
    id: String,
    codec: Codec,
    peers: BTreeSet<String>,
    subs: BTreeMap<u8, BTreeSet<String>>,
    dropped_from_non_peer: u64,
    malformed: u64,
}

impl MqttBroker {
    pub fn new(id: &str, codec: Codec) -> MqttBroker {
        MqttBroker {
            id: id.into(),
            codec,
            peers: BTreeSet::new(),
            subs: BTreeMap::new(),
            dropped_from_non_peer: 0,
            malformed: 0,
        }
    }

    pub fn peers(&self) -> &BTreeSet<String> {
        &self.peers
    }

    pub fn subscribers(&self, topic: u8) -> impl Iterator<Item = &str> {
        self.subs.get(&topic).into_iter().flatten().map(String::as_str)
    }

    pub fn dropped_from_non_peer(&self) -> u64 {
        self.dropped_from_non_peer
    }

    pub fn malformed(&self) -> u64 {
        self.malformed
    }

    pub fn step(&mut self, inbox: Option<Message>) -> InnerStep {
        let Some(m) = inbox else {
            return InnerStep::Idle;
        };
        let Some(packet) = self.codec.decode(&m.payload) else {
            self.malformed += 1;
            return InnerStep::Progress(Vec::new());
        };
        if packet != Packet::Connect && !self.peers.contains(&m.from) {
            self.dropped_from_non_peer += 1;
            return InnerStep::Progress(Vec::new());
        }
        let out = match packet {
            Packet::Connect => {
                self.peers.insert(m.from.clone());
                vec![self.send(&m.from, &Packet::Connack)]
            }
            Packet::Subscribe { topic } => {
                self.subs.entry(topic).or_default().insert(m.from);
                Vec::new()
            }
            Packet::Publish { topic, body } => {
                let fwd = Packet::Publish { topic, body };
                self.subs
                    .get(&topic)
                    .into_iter()
                    .flatten()
                    .filter(|s| **s != m.from)
                    .map(|s| self.send(s, &fwd))
                    .collect()
            }
            Packet::Disconnect => {
                self.peers.remove(&m.from);
                for subs in self.subs.values_mut() {
                    subs.remove(&m.from);
                }
                self.subs.retain(|_, s| !s.is_empty());
                Vec::new()
            }
            Packet::Connack => {
                self.malformed += 1;
                Vec::new()
            }
        };
        InnerStep::Progress(out)
    }

    fn send(&self, to: &str, p: &Packet) -> Message {
        let v = self.codec.encode(p).expect("packets the broker forwards already fit the codec");
        Message::plain(&self.id, to, v)
    }

    pub fn snapshot(&self) -> Json {
        json!({
            "id": self.id,
            "peers": self.peers,
            "subs": self.subs.iter().map(|(t, s)| (t.to_string(), s)).collect::<BTreeMap<_, _>>(),
            "droppedFromNonPeer": self.dropped_from_non_peer,
            "malformed": self.malformed,
        })
    }
}

#[derive(Debug, Clone)]
pub enum MqttActor {
    Client(MqttClient),
    Broker(MqttBroker),
}

impl MqttActor {
    pub fn step(&mut self, inbox: Option<Message>) -> InnerStep {
        match self {
            MqttActor::Client(c) => c.step(inbox),
            MqttActor::Broker(b) => b.step(inbox),
        }
    }

    pub fn snapshot(&self) -> Json {
        match self {
            MqttActor::Client(c) => c.snapshot(),
            MqttActor::Broker(b) => b.snapshot(),
        }
    }
}
