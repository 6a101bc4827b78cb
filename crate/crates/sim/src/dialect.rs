//! The dialect meta-actor: wraps an inner protocol actor, encodes what it
//! sends with the lingo's `f`, buffers and decodes what it receives with
//! `g`, and rotates parameters with per-peer counters.

use std::collections::{BTreeMap, VecDeque};

use dialects_core::lingo::{join_fragments, split_fragments};
use dialects_core::{param_for_link, Lingo, Parameter, PeerCounters, SecretSeed, Value};
use serde::Serialize;
use serde_json::Value as Json;

use crate::error::{ProtocolError, Result, SimError};
use crate::message::Message;
use crate::mqtt::{InnerStep, MqttActor};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEvent {
    pub ev: &'static str,
    pub actor: String,
    pub peer: String,
    pub n: u64,
    pub wire: Json,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plain: Option<Json>,
}

/// What one call to [`DialectActor::step`] did.
#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Idle,
    /// The inner actor took a step; its output waits for the out rule.
    Inner,
    InnerFault(ProtocolError),
    Out(Vec<Message>),
    Deliver {
        seqs: Vec<u64>,
        accepted: bool,
    },
}

#[derive(Debug, Clone)]
pub struct DialectActor {
    id: String,
    inner: MqttActor,
    /// Plain messages produced by the inner actor, not yet sent.
    outbox: VecDeque<Message>,
    /// Decoded messages not yet consumed by the inner actor.
    decoded: VecDeque<Message>,
    in_buffer: VecDeque<Message>,
    counters: PeerCounters,
    /// `None` runs the inner protocol undialected.
    lingo: Option<Lingo>,
    seed: SecretSeed,
    /// Last inbound parameter per sender, reused while rejections hold the
    /// counter still.
    recv_params: BTreeMap<String, (u64, Parameter)>,
    rejected: u64,
    default_hits: u64,
    consumed: Vec<(String, Value)>,
    trace: Vec<TraceEvent>,
    tracing: bool,
}

impl DialectActor {
    pub fn new(id: &str, inner: MqttActor, lingo: Option<Lingo>, seed: SecretSeed) -> Result<DialectActor> {
        if let Some(l) = &lingo {
            if l.ingress_arity() != 1 {
                return Err(SimError::Config(format!("{} consumes several plain messages per encoding", l.id())));
            }
        }
        Ok(DialectActor {
            id: id.into(),
            inner,
            outbox: VecDeque::new(),
            decoded: VecDeque::new(),
            in_buffer: VecDeque::new(),
            counters: PeerCounters::new(),
            lingo,
            seed,
            recv_params: BTreeMap::new(),
            rejected: 0,
            default_hits: 0,
            consumed: Vec::new(),
            trace: Vec::new(),
            tracing: false,
        })
    }

    pub fn with_tracing(mut self, on: bool) -> DialectActor {
        self.tracing = on;
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn inner(&self) -> &MqttActor {
        &self.inner
    }

    pub fn counters(&self) -> &PeerCounters {
        &self.counters
    }

    pub fn rejected(&self) -> u64 {
        self.rejected
    }

    pub fn default_hits(&self) -> u64 {
        self.default_hits
    }

    pub fn in_buffer_len(&self) -> usize {
        self.in_buffer.len()
    }

    /// Plain payloads handed to the inner actor, with their senders, in order.
    pub fn consumed(&self) -> &[(String, Value)] {
        &self.consumed
    }

    pub fn take_trace(&mut self) -> Vec<TraceEvent> {
        std::mem::take(&mut self.trace)
    }

    /// Accepts a message from the network. Returns whether it went straight
    /// to the inner actor, which happens only when running undialected.
    pub fn rule_in(&mut self, msg: Message) -> Result<bool> {
        if msg.to != self.id {
            return Err(SimError::Routing(format!("{} received a message for {}", self.id, msg.to)));
        }
        if self.lingo.is_none() || !msg.dialected {
            // undialected traffic goes straight to the inner actor
            self.decoded.push_back(msg);
            return Ok(true);
        }
        let n = self.counters.recv_count(&msg.from);
        self.record("in", &msg.from, n, msg.payload.to_json(), None);
        self.in_buffer.push_back(msg);
        Ok(false)
    }

    /// Sends the oldest pending inner message, encoded under the next
    /// parameter for its recipient.
    pub fn rule_out(&mut self) -> Result<Option<Vec<Message>>> {
        let Some(msg) = self.outbox.pop_front() else {
            return Ok(None);
        };
        let Some(lingo) = &self.lingo else {
            return Ok(Some(vec![msg]));
        };
        let n = self.counters.send_count(&msg.to);
        let a = param_for_link(lingo, &self.seed, n, Some((&self.id, &msg.to)));
        let wire = lingo.apply_f(&msg.payload, &a)?;
        let parts = split_fragments(&wire, lingo.egress_arity()).expect("output domain splits into egress parts");
        self.counters.bump_send(&msg.to);
        self.record("out", &msg.to, n, wire.to_json(), Some(msg.payload.to_json()));
        Ok(Some(
            parts
                .into_iter()
                .map(|payload| Message { to: msg.to.clone(), from: self.id.clone(), payload, dialected: true, seq: 0 })
                .collect(),
        ))
    }

    /// Takes the oldest buffered message's sender's next `egressArity`
    /// messages, checks them under that sender's next parameter and either
    /// decodes them for the inner actor or counts a rejection.
    pub fn rule_deliver(&mut self) -> Option<(Vec<u64>, bool)> {
        let lingo = self.lingo.as_ref()?;
        let arity = lingo.egress_arity() as usize;
        let from = self.in_buffer.front()?.from.clone();
        let picks: Vec<usize> =
            self.in_buffer.iter().enumerate().filter(|(_, m)| m.from == from).map(|(i, _)| i).take(arity).collect();
        if picks.len() < arity {
            return None;
        }
        let mut selected: Vec<Message> =
            picks.iter().rev().map(|&i| self.in_buffer.remove(i).expect("index in range")).collect();
        selected.reverse();
        let seqs = selected.iter().map(|m| m.seq).collect();
        let wire = join_fragments(selected.into_iter().map(|m| m.payload).collect()).expect("at least one fragment");

        let n = self.counters.recv_count(&from);
        let a = match self.recv_params.get(&from) {
            Some((m, a)) if *m == n => a.clone(),
            _ => {
                let a = param_for_link(lingo, &self.seed, n, Some((&from, &self.id)));
                self.recv_params.insert(from.clone(), (n, a.clone()));
                a
            }
        };
        let passes = lingo.d2().contains(&wire)
            && (!lingo.is_f_checkable() || lingo.check_compliance(&wire, &a).unwrap_or(false))
            && lingo.as_auth().is_none_or(|auth| auth.auth_check(&wire, &a).unwrap_or(false));
        let decoded = if passes { lingo.apply_g_counting(&wire, &a).ok() } else { None };
        match decoded {
            Some((plain, hits)) => {
                self.default_hits += u64::from(hits);
                self.counters.bump_recv(&from);
                self.record("deliver", &from, n, wire.to_json(), Some(plain.to_json()));
                self.decoded.push_back(Message::plain(&from, &self.id, plain));
                Some((seqs, true))
            }
            None => {
                self.rejected += 1;
                self.record("reject", &from, n, wire.to_json(), None);
                Some((seqs, false))
            }
        }
    }

    /// Applies at most one rule, trying the inner actor first, then out,
    /// then deliver.
    pub fn step(&mut self) -> Result<Step> {
        let inbox = self.decoded.pop_front();
        if let Some(m) = &inbox {
            self.consumed.push((m.from.clone(), m.payload.clone()));
        }
        match self.inner.step(inbox) {
            InnerStep::Progress(out) => {
                self.outbox.extend(out);
                return Ok(Step::Inner);
            }
            InnerStep::Fault(e) => return Ok(Step::InnerFault(e)),
            InnerStep::Idle => {}
        }
        if let Some(out) = self.rule_out()? {
            return Ok(Step::Out(out));
        }
        if let Some((seqs, accepted)) = self.rule_deliver() {
            return Ok(Step::Deliver { seqs, accepted });
        }
        Ok(Step::Idle)
    }

    fn record(&mut self, ev: &'static str, peer: &str, n: u64, wire: Json, plain: Option<Json>) {
        if self.tracing {
            self.trace.push(TraceEvent { ev, actor: self.id.clone(), peer: peer.into(), n, wire, plain });
        }
    }
}
