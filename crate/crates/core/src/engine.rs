//! Discrete-time simulation of QMW-MSR on a relay network.
//!
//! At every step each node's current value is originated along every simple
//! path of at most `l` hops. Adversaries on a path rewrite or withhold the
//! value as it passes, and the receiver sees the result either immediately or
//! after a sampled lag. Normal nodes chosen by the schedule then run the
//! trimmed quantized update on what they hold.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::adversary::{Adversary, AdversaryBehavior, AdversaryError, AttackModel};
use crate::graph::{DirectedGraph, NodeId, NodeSet, Path};
use crate::protocol::{qmw_msr_step, FloorRule, InboxView, Message, ProtocolError, Quantizer};
use crate::robustness::FaultModel;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("hop count must be at least 1")]
    ZeroHops,
    #[error("x0 has {got} entries but the graph has {expected} nodes")]
    X0Length { expected: usize, got: usize },
    #[error("adversary {node} is not a node of the {n}-node graph")]
    AdversaryOutOfRange { node: NodeId, n: usize },
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error("adversary set {set} is not admissible under the {model} model")]
    FaultModelViolated { set: NodeSet, model: FaultModel },
    #[error("every node is an adversary")]
    NoNormalNodes,
    #[error("invalid schedule: {0}")]
    Schedule(String),
    #[error("invalid delay model: {0}")]
    Delay(String),
    #[error(transparent)]
    Quantizer(#[from] ProtocolError),
}

/// Which normal nodes update at each step.
#[derive(Debug, Clone, PartialEq)]
pub enum Schedule {
    /// Everyone, every step.
    Synchronous,
    /// Round-robin over `kbar` cohorts, so each node updates once every
    /// `kbar` steps.
    Deterministic { kbar: u64 },
    /// Explicit update sets, repeated cyclically.
    Scripted(Vec<NodeSet>),
    /// Node `i` updates with probability `p[i]` at each step.
    Randomized(Vec<f64>),
}

impl Schedule {
    pub fn randomized_uniform(n: usize, p: f64) -> Self {
        Schedule::Randomized(vec![p; n])
    }

    /// Longest possible wait between two updates of one node.
    fn max_gap(&self, normal: NodeSet) -> Option<u64> {
        match self {
            Schedule::Synchronous => Some(1),
            Schedule::Deterministic { kbar } => Some(*kbar),
            Schedule::Scripted(sets) => {
                let len = sets.len();
                normal
                    .iter()
                    .map(|i| {
                        let hits: Vec<usize> = (0..len).filter(|&k| sets[k].contains(i)).collect();
                        let gaps = hits.windows(2).map(|w| w[1] - w[0]);
                        let wrap = hits.first().map(|&a| a + len - hits[hits.len() - 1]);
                        gaps.chain(wrap).max().unwrap_or(usize::MAX) as u64
                    })
                    .max()
            }
            Schedule::Randomized(_) => None,
        }
    }
}

/// Transmission lags on relayed paths.
#[derive(Debug, Clone, PartialEq)]
pub enum DelayModel {
    None,
    /// Independent uniform lag in `0..=tau` per path and origination step.
    Uniform {
        tau: u64,
    },
    /// Lag `lags[h - 1]` for every path of `h` hops; the last entry repeats.
    FixedByHops {
        tau: u64,
        lags: Vec<u64>,
    },
}

impl DelayModel {
    pub fn tau(&self) -> u64 {
        match self {
            DelayModel::None => 0,
            DelayModel::Uniform { tau } | DelayModel::FixedByHops { tau, .. } => *tau,
        }
    }

    fn is_delayed(&self) -> bool {
        !matches!(self, DelayModel::None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Locality {
    #[default]
    Total,
    Local,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub graph: DirectedGraph,
    pub l: usize,
    pub f: usize,
    pub locality: Locality,
    pub adversaries: BTreeMap<NodeId, AdversaryBehavior>,
    pub schedule: Schedule,
    pub delays: DelayModel,
    pub x0: Vec<i64>,
    pub seed: u64,
    /// Maximum number of steps; defaults to `10 n kbar (tau + 1)`.
    pub horizon: Option<u64>,
    pub floor_rule: FloorRule,
}

impl Scenario {
    /// Synchronous, delay-free, adversary-free scenario under the `f`-total model.
    pub fn new(graph: DirectedGraph, l: usize, f: usize, x0: Vec<i64>) -> Self {
        Scenario {
            graph,
            l,
            f,
            locality: Locality::Total,
            adversaries: BTreeMap::new(),
            schedule: Schedule::Synchronous,
            delays: DelayModel::None,
            x0,
            seed: 0,
            horizon: None,
            floor_rule: FloorRule::Unbiased,
        }
    }

    pub fn with_adversary(mut self, node: NodeId, behavior: AdversaryBehavior) -> Self {
        self.adversaries.insert(node, behavior);
        self
    }

    pub fn with_schedule(mut self, schedule: Schedule) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn with_delays(mut self, delays: DelayModel) -> Self {
        self.delays = delays;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_horizon(mut self, horizon: u64) -> Self {
        self.horizon = Some(horizon);
        self
    }

    pub fn fault_model(&self) -> FaultModel {
        match self.locality {
            Locality::Total => FaultModel::total(self.f),
            Locality::Local => FaultModel::local(self.f, self.l),
        }
    }

    pub fn adversary_set(&self) -> NodeSet {
        self.adversaries.keys().copied().collect()
    }

    pub fn normal_set(&self) -> NodeSet {
        self.graph.nodes().difference(self.adversary_set())
    }

    pub fn default_horizon(&self) -> u64 {
        let n = self.graph.node_count() as u64;
        let kbar = match &self.schedule {
            Schedule::Randomized(p) => {
                let pmin = p.iter().copied().fold(1.0, f64::min);
                (1.0 / pmin).ceil() as u64
            }
            other => other.max_gap(self.normal_set()).unwrap_or(1),
        };
        10 * n * kbar.max(1) * (self.delays.tau() + 1)
    }

    pub fn horizon(&self) -> u64 {
        self.horizon.unwrap_or_else(|| self.default_horizon())
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let n = self.graph.node_count();
        if self.l == 0 {
            return Err(EngineError::ZeroHops);
        }
        if self.x0.len() != n {
            return Err(EngineError::X0Length {
                expected: n,
                got: self.x0.len(),
            });
        }
        for (&node, behavior) in &self.adversaries {
            if node >= n {
                return Err(EngineError::AdversaryOutOfRange { node, n });
            }
            behavior.validate(node)?;
        }
        let set = self.adversary_set();
        let model = self.fault_model();
        if !model.admits(&self.graph, set) {
            return Err(EngineError::FaultModelViolated { set, model });
        }
        let normal = self.normal_set();
        if normal.is_empty() {
            return Err(EngineError::NoNormalNodes);
        }
        if let FloorRule::Fixed(p) = self.floor_rule {
            if !(p > 0.0 && p < 1.0) {
                return Err(ProtocolError::BadProbability(p).into());
            }
        }
        let tau = self.delays.tau();
        match &self.delays {
            DelayModel::None => {}
            DelayModel::Uniform { .. } => {}
            DelayModel::FixedByHops { lags, .. } => {
                if lags.is_empty() {
                    return Err(EngineError::Delay("lag list is empty".into()));
                }
                if let Some(bad) = lags.iter().find(|&&d| d > tau) {
                    return Err(EngineError::Delay(format!("lag {bad} exceeds tau = {tau}")));
                }
            }
        }
        match &self.schedule {
            Schedule::Synchronous => {}
            Schedule::Deterministic { kbar: 0 } => {
                return Err(EngineError::Schedule("kbar must be positive".into()))
            }
            Schedule::Deterministic { .. } => {}
            Schedule::Scripted(sets) => {
                if sets.is_empty() {
                    return Err(EngineError::Schedule("scripted schedule is empty".into()));
                }
                let seen = sets.iter().fold(NodeSet::EMPTY, |acc, s| acc.union(*s));
                if let Some(i) = normal.difference(seen).first() {
                    return Err(EngineError::Schedule(format!(
                        "normal node {i} never updates"
                    )));
                }
            }
            Schedule::Randomized(p) => {
                if p.len() != n {
                    return Err(EngineError::Schedule(format!(
                        "{} probabilities for {n} nodes",
                        p.len()
                    )));
                }
                if let Some((i, q)) = p.iter().enumerate().find(|(_, &q)| !(q > 0.0 && q <= 1.0)) {
                    return Err(EngineError::Schedule(format!(
                        "update probability {q} of node {i} is outside (0, 1]"
                    )));
                }
            }
        }
        if self.delays.is_delayed() && tau > 0 {
            if let Some(gap) = self.schedule.max_gap(normal) {
                if gap > tau {
                    return Err(EngineError::Schedule(format!(
                        "update gap {gap} exceeds tau = {tau}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Normal,
    Adversary(AttackModel),
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Normal => f.write_str("normal"),
            Role::Adversary(m) => write!(f, "{m}"),
        }
    }
}

/// Recorded run. Row `k` of `values` is the state at step `k`; `updated[k]`
/// holds the normal nodes that computed row `k + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub seed: u64,
    pub roles: Vec<Role>,
    pub values: Vec<Vec<i64>>,
    pub updated: Vec<NodeSet>,
    /// Non-EMPTY relayed entries held by normal nodes at each step.
    pub messages: Vec<usize>,
    pub consensus_time: Option<u64>,
    pub safety_ok: bool,
    pub safety_interval: (i64, i64),
    /// Equality window used for agreement detection.
    pub tau: u64,
    pub synchronous: bool,
    /// Oldest value held on a path free of adversaries, in steps.
    pub max_normal_age: u64,
}

impl Trace {
    pub fn normal_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.roles
            .iter()
            .enumerate()
            .filter(|(_, r)| **r == Role::Normal)
            .map(|(i, _)| i)
    }

    pub fn steps(&self) -> usize {
        self.values.len()
    }

    pub fn final_values(&self) -> &[i64] {
        self.values.last().expect("a trace has at least one row")
    }

    /// Normal values at step `k`.
    pub fn normal_row(&self, k: usize) -> Vec<i64> {
        self.normal_nodes().map(|i| self.values[k][i]).collect()
    }

    pub fn agreed_value(&self) -> Option<i64> {
        self.consensus_time
            .map(|k| self.values[k as usize][self.normal_nodes().next().unwrap()])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,node,value,updated,role\n");
        for (k, row) in self.values.iter().enumerate() {
            let upd = self.updated.get(k).copied().unwrap_or(NodeSet::EMPTY);
            for (i, v) in row.iter().enumerate() {
                writeln!(
                    out,
                    "{k},{i},{v},{},{}",
                    u8::from(upd.contains(i)),
                    self.roles[i]
                )
                .unwrap();
            }
        }
        out
    }

    /// One row per step, one column per node.
    pub fn to_matrix(&self) -> String {
        let mut out = String::from("k");
        for i in 0..self.roles.len() {
            write!(out, ",x{i}").unwrap();
        }
        out.push('\n');
        for (k, row) in self.values.iter().enumerate() {
            write!(out, "{k}").unwrap();
            for v in row {
                write!(out, ",{v}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn summary(&self) -> String {
        let finals: Vec<String> = self.final_values().iter().map(|v| v.to_string()).collect();
        format!(
            "seed = {}\nconsensus_time = {}\nsafety_ok = {}\npreservation_ok = {}\nfinal_values = [{}]\n",
            self.seed,
            self.consensus_time.map_or("none".to_string(), |k| k.to_string()),
            verdict_safety(self),
            verdict_preservation(self),
            finals.join(", "),
        )
    }
}

/// Every normal value at every step lies in the safety interval.
pub fn verdict_safety(trace: &Trace) -> bool {
    let (lo, hi) = trace.safety_interval;
    trace
        .values
        .iter()
        .all(|row| trace.normal_nodes().all(|i| (lo..=hi).contains(&row[i])))
}

fn all_equal(v: &[i64]) -> bool {
    v.windows(2).all(|w| w[0] == w[1])
}

/// First step at which all normal values agree and have agreed on the same
/// value for the preceding `tau` steps.
pub fn verdict_agreement(trace: &Trace) -> Option<u64> {
    let w = trace.tau as usize;
    let mut run = 0usize;
    let mut last: Option<i64> = None;
    for k in 0..trace.steps() {
        let row = trace.normal_row(k);
        if all_equal(&row) {
            run = if last == Some(row[0]) { run + 1 } else { 1 };
            last = Some(row[0]);
        } else {
            run = 0;
            last = None;
        }
        if run > w.min(k) {
            return Some(k as u64);
        }
    }
    None
}

/// Once agreement is reached the normal values never change again.
pub fn verdict_preservation(trace: &Trace) -> bool {
    let Some(ka) = verdict_agreement(trace) else {
        return true;
    };
    let reference = trace.normal_row(ka as usize);
    (ka as usize..trace.steps()).all(|k| trace.normal_row(k) == reference)
}

/// Maximum of normal values never rises and the minimum never falls.
pub fn envelopes_monotone(trace: &Trace) -> bool {
    let env: Vec<(i64, i64)> = (0..trace.steps())
        .map(|k| {
            let row = trace.normal_row(k);
            (*row.iter().min().unwrap(), *row.iter().max().unwrap())
        })
        .collect();
    env.windows(2).all(|w| w[1].0 >= w[0].0 && w[1].1 <= w[0].1)
}

#[derive(Debug, Clone, Default)]
struct Slot {
    /// `(stamp, value)` of the newest arrival.
    latest: Option<(u64, i64)>,
    /// `(arrival, stamp, value)` still in flight.
    pending: Vec<(u64, u64, i64)>,
}

/// Step-by-step state of one run.
pub struct Simulation<'a> {
    scenario: &'a Scenario,
    adversaries: Vec<Option<Adversary>>,
    normal: NodeSet,
    paths: Vec<Vec<Path>>,
    clean: Vec<Vec<bool>>,
    slots: Vec<Vec<Slot>>,
    quantizers: Vec<Quantizer>,
    schedule_rng: ChaCha8Rng,
    state: Vec<i64>,
    k: u64,
    max_normal_age: u64,
}

impl<'a> Simulation<'a> {
    pub fn new(scenario: &'a Scenario) -> Result<Self, EngineError> {
        scenario.validate()?;
        let g = &scenario.graph;
        let n = g.node_count();
        let mut adversaries = vec![None; n];
        for (&node, b) in &scenario.adversaries {
            adversaries[node] = Some(Adversary::new(node, b.clone(), scenario.seed)?);
        }
        let adv_set = scenario.adversary_set();
        let normal = scenario.normal_set();
        let paths: Vec<Vec<Path>> = (0..n)
            .map(|i| {
                if normal.contains(i) {
                    g.paths_into(i, scenario.l)
                } else {
                    Vec::new()
                }
            })
            .collect();
        let clean = paths
            .iter()
            .map(|ps| {
                ps.iter()
                    .map(|p| p.node_set().is_disjoint(adv_set))
                    .collect()
            })
            .collect();
        let slots = paths
            .iter()
            .map(|ps| vec![Slot::default(); ps.len()])
            .collect();
        let quantizers = (0..n)
            .map(|i| {
                Quantizer::with_rule(
                    seed::stream(scenario.seed, &[seed::QUANTIZER, i as u64]),
                    scenario.floor_rule,
                )
            })
            .collect::<Result<_, _>>()?;
        let mut sim = Simulation {
            scenario,
            adversaries,
            normal,
            paths,
            clean,
            slots,
            quantizers,
            schedule_rng: seed::stream(scenario.seed, &[seed::SCHEDULE]),
            state: scenario.x0.clone(),
            k: 0,
            max_normal_age: 0,
        };
        sim.refresh_adversaries();
        Ok(sim)
    }

    pub fn state(&self) -> &[i64] {
        &self.state
    }

    pub fn time(&self) -> u64 {
        self.k
    }

    fn refresh_adversaries(&mut self) {
        for adv in self.adversaries.iter().flatten() {
            self.state[adv.node] = adv.recorded_value(self.k);
        }
    }

    /// Value that arrives at the end of `path` for a message originated at
    /// step `t`, or `None` when an adversary withholds it.
    fn originate(&self, path: &Path, t: u64) -> Option<i64> {
        let nodes = path.nodes();
        let src = nodes[0];
        let mut value = match &self.adversaries[src] {
            Some(adv) => {
                if adv.drop_message(path, t) {
                    return None;
                }
                let v = adv.emit_own(t, nodes[1]);
                if adv.is_malicious() {
                    assert_eq!(
                        v,
                        adv.emit_own(t, usize::MAX),
                        "malicious emission depends on recipient"
                    );
                }
                Some(v)
            }
            None => Some(self.state[src]),
        };
        for pos in 1..nodes.len() - 1 {
            if let Some(adv) = &self.adversaries[nodes[pos]] {
                if adv.drop_message(path, t) {
                    return None;
                }
                let next = adv.tamper_relay(value, path, t, nodes[pos + 1]);
                if adv.is_malicious() {
                    assert_eq!(
                        next,
                        adv.tamper_relay(value, path, t, usize::MAX),
                        "malicious relay depends on recipient"
                    );
                }
                value = next;
            }
        }
        value
    }

    fn lag(&self, dest: NodeId, idx: usize, hops: usize, t: u64) -> u64 {
        match &self.scenario.delays {
            DelayModel::None => 0,
            DelayModel::Uniform { tau } => {
                seed::mix(
                    self.scenario.seed,
                    &[seed::DELAY, dest as u64, idx as u64, t],
                ) % (tau + 1)
            }
            DelayModel::FixedByHops { lags, .. } => lags[(hops - 1).min(lags.len() - 1)],
        }
    }

    /// Inbox of normal node `i` at the current step. In delayed mode this
    /// reflects deliveries processed by [`Simulation::step`].
    pub fn generate_inbox(&self, i: NodeId) -> InboxView {
        let k = self.k;
        let mut entries = Vec::with_capacity(self.paths[i].len() + 1);
        entries.push(Message::new(self.state[i], Path::trivial(i), k));
        for (idx, path) in self.paths[i].iter().enumerate() {
            let msg = if self.scenario.delays.is_delayed() {
                match self.slots[i][idx].latest {
                    Some((stamp, v)) => Message::new(v, path.clone(), stamp),
                    None => Message::empty(path.clone(), k),
                }
            } else {
                match self.originate(path, k) {
                    Some(v) => Message::new(v, path.clone(), k),
                    None => Message::empty(path.clone(), k),
                }
            };
            entries.push(msg);
        }
        InboxView {
            node: i,
            own: self.state[i],
            entries,
        }
    }

    fn deliver(&mut self) {
        let k = self.k;
        for i in self.normal.iter() {
            for idx in 0..self.paths[i].len() {
                let path = &self.paths[i][idx];
                if let Some(v) = self.originate(path, k) {
                    let lag = self.lag(i, idx, path.hops(), k);
                    self.slots[i][idx].pending.push((k + lag, k, v));
                }
                let slot = &mut self.slots[i][idx];
                let mut j = 0;
                while j < slot.pending.len() {
                    let (arrival, stamp, v) = slot.pending[j];
                    if arrival <= k {
                        slot.pending.swap_remove(j);
                        if slot.latest.is_none_or(|(s, _)| stamp > s) {
                            slot.latest = Some((stamp, v));
                        }
                    } else {
                        j += 1;
                    }
                }
            }
        }
    }

    fn update_set(&mut self) -> NodeSet {
        let k = self.k;
        match &self.scenario.schedule {
            Schedule::Synchronous => self.normal,
            Schedule::Deterministic { kbar } => self
                .normal
                .iter()
                .enumerate()
                .filter(|&(pos, _)| pos as u64 % kbar == k % kbar)
                .map(|(_, i)| i)
                .collect(),
            Schedule::Scripted(sets) => {
                sets[(k % sets.len() as u64) as usize].intersection(self.normal)
            }
            Schedule::Randomized(p) => {
                let mut set = NodeSet::EMPTY;
                for i in self.normal.iter() {
                    if self.schedule_rng.gen::<f64>() < p[i] {
                        set.insert(i);
                    }
                }
                set
            }
        }
    }

    /// Advances one step. Returns the update set and the number of non-EMPTY
    /// relayed entries seen by normal nodes.
    pub fn step(&mut self) -> (NodeSet, usize) {
        if self.scenario.delays.is_delayed() {
            self.deliver();
        }
        let upd = self.update_set();
        let f = self.scenario.f;
        let mut next = self.state.clone();
        let mut messages = 0;
        for i in self.normal.iter() {
            let inbox = self.generate_inbox(i);
            for (m, &clean) in inbox.entries[1..].iter().zip(&self.clean[i]) {
                if m.value.is_some() {
                    messages += 1;
                    if clean {
                        self.max_normal_age = self.max_normal_age.max(self.k - m.stamp);
                    }
                }
            }
            if upd.contains(i) {
                next[i] = qmw_msr_step(&mut self.quantizers[i], &inbox, f).0;
            }
        }
        self.state = next;
        self.k += 1;
        self.refresh_adversaries();
        (upd, messages)
    }
}

/// Runs until agreement has held for `tau + 1` further steps or the horizon
/// is reached.
pub fn run(scenario: &Scenario) -> Result<Trace, EngineError> {
    let mut sim = Simulation::new(scenario)?;
    let horizon = scenario.horizon();
    let tau = scenario.delays.tau();
    let normal = sim.normal;
    let initial: Vec<i64> = normal.iter().map(|i| scenario.x0[i]).collect();
    let safety_interval = (
        *initial.iter().min().unwrap(),
        *initial.iter().max().unwrap(),
    );
    let roles = (0..scenario.graph.node_count())
        .map(|i| match scenario.adversaries.get(&i) {
            Some(b) => Role::Adversary(b.model),
            None => Role::Normal,
        })
        .collect();
    let mut trace = Trace {
        seed: scenario.seed,
        roles,
        values: vec![sim.state.clone()],
        updated: Vec::new(),
        messages: Vec::new(),
        consensus_time: None,
        safety_ok: true,
        safety_interval,
        tau,
        synchronous: scenario.schedule == Schedule::Synchronous && !scenario.delays.is_delayed(),
        max_normal_age: 0,
    };
    let mut consensus = verdict_agreement(&trace);
    while sim.k < horizon && consensus.is_none_or(|ka| sim.k < ka + tau + 1) {
        let (upd, messages) = sim.step();
        trace.updated.push(upd);
        trace.messages.push(messages);
        trace.values.push(sim.state.clone());
        if consensus.is_none() {
            consensus = verdict_agreement_tail(&trace);
        }
    }
    trace.updated.push(NodeSet::EMPTY);
    trace.messages.push(0);
    trace.consensus_time = consensus;
    trace.safety_ok = verdict_safety(&trace);
    trace.max_normal_age = sim.max_normal_age;
    Ok(trace)
}

/// Agreement check restricted to the newest row.
fn verdict_agreement_tail(trace: &Trace) -> Option<u64> {
    let k = trace.steps() - 1;
    let start = k.saturating_sub(trace.tau as usize);
    let first = trace.normal_row(start);
    if !all_equal(&first) {
        return None;
    }
    (start..=k)
        .all(|j| trace.normal_row(j) == first)
        .then_some(k as u64)
}

/// Runs `scenario` and, if it ends without agreement, once more with twice
/// the horizon.
pub fn run_with_retry(scenario: &Scenario) -> Result<Trace, EngineError> {
    let trace = run(scenario)?;
    if trace.consensus_time.is_some() {
        return Ok(trace);
    }
    let mut longer = scenario.clone();
    longer.horizon = Some(scenario.horizon() * 2);
    run(&longer)
}
