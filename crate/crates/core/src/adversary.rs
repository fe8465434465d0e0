//! Adversary behaviours: how a faulty node chooses its own broadcast value,
//! what it does to values it relays, and when it withholds messages.
//!
//! Every draw is a pure function of the scenario seed, the adversary, the
//! time step and the relayed path prefix. A malicious node never keys on the
//! recipient, so it sends identical values to all out-neighbours by
//! construction. A Byzantine node picks one of its strategies by recipient.

use std::f64::consts::PI;
use std::fmt;

use thiserror::Error;

use crate::graph::{NodeId, Path};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdversaryError {
    #[error("adversary {node}: {msg}")]
    Invalid { node: NodeId, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AttackModel {
    /// Same falsified values to every out-neighbour.
    #[default]
    Malicious,
    /// Possibly different values to different out-neighbours.
    Byzantine,
}

impl fmt::Display for AttackModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AttackModel::Malicious => "malicious",
            AttackModel::Byzantine => "byzantine",
        })
    }
}

/// Integer-valued signal an adversary broadcasts over time.
#[derive(Debug, Clone, PartialEq)]
pub enum ValueStrategy {
    Constant(i64),
    /// `amplitude * sin(2πk / period) + offset`, rounded half up.
    QuantizedSine {
        amplitude: f64,
        period: f64,
        offset: f64,
    },
    /// `a` on even steps, `b` on odd steps.
    Oscillate {
        a: i64,
        b: i64,
    },
    /// Cycles through the sequence.
    Replay(Vec<i64>),
    /// Uniform on `lo..=hi`, redrawn for every step and key.
    RandomIn {
        lo: i64,
        hi: i64,
    },
}

impl ValueStrategy {
    fn validate(&self) -> Result<(), String> {
        match self {
            ValueStrategy::QuantizedSine {
                amplitude,
                period,
                offset,
            } => {
                if !(amplitude.is_finite()
                    && offset.is_finite()
                    && period.is_finite()
                    && *period > 0.0)
                {
                    return Err("sine needs finite parameters and a positive period".into());
                }
            }
            ValueStrategy::Replay(seq) if seq.is_empty() => {
                return Err("replay sequence is empty".into())
            }
            ValueStrategy::RandomIn { lo, hi } if lo > hi => {
                return Err(format!("random range {lo}..={hi} is empty"))
            }
            _ => {}
        }
        Ok(())
    }

    /// Value at step `k`; `key` feeds the random strategy only.
    pub fn value_at(&self, k: u64, key: u64) -> i64 {
        match self {
            ValueStrategy::Constant(c) => *c,
            ValueStrategy::QuantizedSine {
                amplitude,
                period,
                offset,
            } => {
                let y = amplitude * (2.0 * PI * k as f64 / period).sin() + offset;
                (y + 0.5).floor() as i64
            }
            ValueStrategy::Oscillate { a, b } => {
                if k.is_multiple_of(2) {
                    *a
                } else {
                    *b
                }
            }
            ValueStrategy::Replay(seq) => seq[(k % seq.len() as u64) as usize],
            ValueStrategy::RandomIn { lo, hi } => seed::keyed_range(key, &[k], *lo, *hi),
        }
    }
}

/// What an adversary does to values it forwards.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum RelayStrategy {
    #[default]
    PassThrough,
    /// Forwards its own current broadcast value instead.
    ReplaceWithOwn,
    /// Forwards values from its own strategy list.
    Replace(Vec<ValueStrategy>),
    /// Adds a constant to real values.
    Offset(i64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DropPolicy {
    #[default]
    Never,
    Always,
    /// Withholds everything originated before step `k`.
    Before(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdversaryBehavior {
    pub model: AttackModel,
    /// Own-value strategies. A malicious node uses the first one; a Byzantine
    /// node sends `own[recipient % own.len()]` to each recipient.
    pub own: Vec<ValueStrategy>,
    pub relay: RelayStrategy,
    pub drop: DropPolicy,
    /// Holds each emitted value for this many steps when set.
    pub schedule_override: Option<u64>,
}

impl AdversaryBehavior {
    pub fn malicious(own: ValueStrategy, relay: RelayStrategy) -> Self {
        AdversaryBehavior {
            model: AttackModel::Malicious,
            own: vec![own],
            relay,
            drop: DropPolicy::Never,
            schedule_override: None,
        }
    }

    pub fn byzantine(own: Vec<ValueStrategy>, relay: RelayStrategy) -> Self {
        AdversaryBehavior {
            model: AttackModel::Byzantine,
            own,
            relay,
            drop: DropPolicy::Never,
            schedule_override: None,
        }
    }

    pub fn with_drop(mut self, drop: DropPolicy) -> Self {
        self.drop = drop;
        self
    }

    pub fn with_hold(mut self, period: u64) -> Self {
        self.schedule_override = Some(period);
        self
    }

    pub fn validate(&self, node: NodeId) -> Result<(), AdversaryError> {
        let err = |msg: String| AdversaryError::Invalid { node, msg };
        if self.own.is_empty() {
            return Err(err("no own-value strategy".into()));
        }
        if self.schedule_override == Some(0) {
            return Err(err("hold period must be positive".into()));
        }
        if let RelayStrategy::Replace(list) = &self.relay {
            if list.is_empty() {
                return Err(err("relay replacement list is empty".into()));
            }
            list.iter().try_for_each(|s| s.validate().map_err(&err))?;
        }
        self.own.iter().try_for_each(|s| s.validate().map_err(&err))
    }
}

/// A behaviour bound to a node and a scenario seed.
#[derive(Debug, Clone, PartialEq)]
pub struct Adversary {
    pub node: NodeId,
    pub behavior: AdversaryBehavior,
    seed: u64,
}

const OWN_KEY: u64 = 0;
const RELAY_KEY: u64 = 1;

impl Adversary {
    pub fn new(
        node: NodeId,
        behavior: AdversaryBehavior,
        seed: u64,
    ) -> Result<Self, AdversaryError> {
        behavior.validate(node)?;
        Ok(Adversary {
            node,
            behavior,
            seed,
        })
    }

    pub fn is_malicious(&self) -> bool {
        self.behavior.model == AttackModel::Malicious
    }

    fn effective_step(&self, k: u64) -> u64 {
        match self.behavior.schedule_override {
            Some(h) => k - k % h,
            None => k,
        }
    }

    fn pick<'a>(&self, list: &'a [ValueStrategy], recipient: NodeId) -> (&'a ValueStrategy, u64) {
        match self.behavior.model {
            AttackModel::Malicious => (&list[0], u64::MAX),
            AttackModel::Byzantine => (&list[recipient % list.len()], recipient as u64),
        }
    }

    /// Own value sent to `recipient` at step `k`.
    pub fn emit_own(&self, k: u64, recipient: NodeId) -> i64 {
        let (strategy, who) = self.pick(&self.behavior.own, recipient);
        let key = seed::mix(
            self.seed,
            &[seed::ADVERSARY, self.node as u64, OWN_KEY, who],
        );
        strategy.value_at(self.effective_step(k), key)
    }

    /// The value shown for this node in traces.
    pub fn recorded_value(&self, k: u64) -> i64 {
        let key = seed::mix(
            self.seed,
            &[seed::ADVERSARY, self.node as u64, OWN_KEY, u64::MAX],
        );
        self.behavior.own[0].value_at(self.effective_step(k), key)
    }

    /// Value forwarded to `recipient` for a message on `path` that reached
    /// this node carrying `value`. The path itself is only read.
    pub fn tamper_relay(
        &self,
        value: Option<i64>,
        path: &Path,
        k: u64,
        recipient: NodeId,
    ) -> Option<i64> {
        match &self.behavior.relay {
            RelayStrategy::PassThrough => value,
            RelayStrategy::ReplaceWithOwn => Some(self.emit_own(k, recipient)),
            RelayStrategy::Offset(d) => value.map(|v| v + d),
            RelayStrategy::Replace(list) => {
                let (strategy, who) = self.pick(list, recipient);
                let mut words = vec![seed::ADVERSARY, self.node as u64, RELAY_KEY, who];
                words.extend(
                    path.nodes()
                        .iter()
                        .take_while(|&&v| v != self.node)
                        .map(|&v| v as u64),
                );
                Some(strategy.value_at(self.effective_step(k), seed::mix(self.seed, &words)))
            }
        }
    }

    /// Whether this node withholds a message originated at step `k`.
    pub fn drop_message(&self, _path: &Path, k: u64) -> bool {
        match self.behavior.drop {
            DropPolicy::Never => false,
            DropPolicy::Always => true,
            DropPolicy::Before(until) => k < until,
        }
    }
}
