//! TOML scenario files.
//!
//! A file mirrors [`Scenario`] plus run controls. Unknown keys are rejected
//! and every semantic error names the key it concerns, e.g.
//! `adversary[1].strategy.period`. See `scenarios/template.toml` for a fully
//! commented example.

use std::fs;
use std::path::{Path, PathBuf};

use rqc_core::adversary::{
    AdversaryBehavior, AttackModel, DropPolicy, RelayStrategy, ValueStrategy,
};
use rqc_core::engine::{DelayModel, EngineError, Locality, Scenario, Schedule};
use rqc_core::graph::{gen_complete_bipartite, gen_cycle, gen_wheel, DirectedGraph, NodeSet};
use rqc_core::protocol::FloorRule;
use serde::Deserialize;
use thiserror::Error;

use crate::presets::{interleaved_k66, six_node_wheel};

#[derive(Debug, Error)]
pub enum ScenarioFileError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Syntax(String),
    #[error("{key}: {msg}")]
    Invalid { key: String, msg: String },
}

fn invalid(key: impl Into<String>, msg: impl ToString) -> ScenarioFileError {
    ScenarioFileError::Invalid {
        key: key.into(),
        msg: msg.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub graph: GraphSpec,
    pub l: usize,
    pub f: usize,
    #[serde(default)]
    pub model: ModelSpec,
    pub x0: Vec<i64>,
    #[serde(default)]
    pub seed: u64,
    pub horizon: Option<u64>,
    #[serde(default = "one")]
    pub num_seeds: u64,
    #[serde(default)]
    pub schedule: ScheduleSpec,
    #[serde(default)]
    pub delays: DelaySpec,
    #[serde(default, rename = "adversary")]
    pub adversaries: Vec<AdversarySpec>,
    pub floor_probability: Option<f64>,
    #[serde(default)]
    pub output: OutputSpec,
}

fn one() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSpec {
    Cycle {
        n: usize,
    },
    Wheel {
        n: usize,
    },
    Bipartite {
        n1: usize,
        n2: usize,
    },
    SixNodeWheel,
    InterleavedK66,
    /// Graph text file, relative to the scenario file.
    File {
        path: PathBuf,
    },
    Edges {
        n: usize,
        edges: Vec<[usize; 2]>,
        #[serde(default)]
        undirected: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSpec {
    #[default]
    Total,
    Local,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSpec {
    #[default]
    Synchronous,
    Deterministic {
        kbar: u64,
    },
    Randomized {
        p: Probabilities,
    },
    Scripted {
        sets: Vec<Vec<usize>>,
    },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Probabilities {
    Uniform(f64),
    PerNode(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DelaySpec {
    #[default]
    None,
    Uniform {
        tau: u64,
    },
    Fixed {
        tau: u64,
        lags: Vec<u64>,
    },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ValueSpec {
    Constant {
        c: i64,
    },
    QuantizedSine {
        amplitude: f64,
        period: f64,
        offset: f64,
    },
    Oscillate {
        a: i64,
        b: i64,
    },
    Replay {
        sequence: Vec<i64>,
    },
    RandomIn {
        lo: i64,
        hi: i64,
    },
}

impl ValueSpec {
    fn build(&self, key: &str) -> Result<ValueStrategy, ScenarioFileError> {
        Ok(match self {
            ValueSpec::Constant { c } => ValueStrategy::Constant(*c),
            ValueSpec::QuantizedSine {
                amplitude,
                period,
                offset,
            } => {
                if !(*period > 0.0 && period.is_finite()) {
                    return Err(invalid(
                        format!("{key}.period"),
                        "must be a positive number",
                    ));
                }
                ValueStrategy::QuantizedSine {
                    amplitude: *amplitude,
                    period: *period,
                    offset: *offset,
                }
            }
            ValueSpec::Oscillate { a, b } => ValueStrategy::Oscillate { a: *a, b: *b },
            ValueSpec::Replay { sequence } => {
                if sequence.is_empty() {
                    return Err(invalid(format!("{key}.sequence"), "must not be empty"));
                }
                ValueStrategy::Replay(sequence.clone())
            }
            ValueSpec::RandomIn { lo, hi } => {
                if lo > hi {
                    return Err(invalid(
                        format!("{key}.lo"),
                        format!("{lo} exceeds hi = {hi}"),
                    ));
                }
                ValueStrategy::RandomIn { lo: *lo, hi: *hi }
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RelaySpec {
    #[default]
    PassThrough,
    ReplaceWithOwn,
    Replace {
        values: Vec<ValueSpec>,
    },
    Offset {
        delta: i64,
    },
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DropSpec {
    #[default]
    Never,
    Always,
    Before {
        k: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackSpec {
    #[default]
    Malicious,
    Byzantine,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversarySpec {
    pub node: usize,
    #[serde(default)]
    pub model: AttackSpec,
    /// Single own-value strategy.
    pub strategy: Option<ValueSpec>,
    /// Recipient-indexed strategies of a Byzantine node.
    pub strategies: Option<Vec<ValueSpec>>,
    #[serde(default)]
    pub relay: RelaySpec,
    #[serde(default)]
    pub drop: DropSpec,
    pub hold: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub csv: Option<PathBuf>,
    pub plotdata: Option<PathBuf>,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, ScenarioFileError> {
        toml::from_str(text).map_err(|e| ScenarioFileError::Syntax(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioFileError> {
        let text = fs::read_to_string(path).map_err(|source| ScenarioFileError::Io {
            path: path.into(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Builds and validates the scenario for seed `self.seed`. Relative graph
    /// paths resolve against `base_dir`.
    pub fn to_scenario(&self, base_dir: &Path) -> Result<Scenario, ScenarioFileError> {
        let graph = build_graph(&self.graph, base_dir)?;
        let n = graph.node_count();
        let mut adversaries = std::collections::BTreeMap::new();
        for (idx, a) in self.adversaries.iter().enumerate() {
            let key = format!("adversary[{idx}]");
            if a.node >= n {
                return Err(invalid(
                    format!("{key}.node"),
                    format!("node {} is outside the {n}-node graph", a.node),
                ));
            }
            if adversaries.contains_key(&a.node) {
                return Err(invalid(
                    format!("{key}.node"),
                    format!("node {} is listed twice", a.node),
                ));
            }
            adversaries.insert(a.node, build_adversary(a, &key)?);
        }
        let schedule = match &self.schedule {
            ScheduleSpec::Synchronous => Schedule::Synchronous,
            ScheduleSpec::Deterministic { kbar } => Schedule::Deterministic { kbar: *kbar },
            ScheduleSpec::Randomized {
                p: Probabilities::Uniform(p),
            } => Schedule::randomized_uniform(n, *p),
            ScheduleSpec::Randomized {
                p: Probabilities::PerNode(p),
            } => Schedule::Randomized(p.clone()),
            ScheduleSpec::Scripted { sets } => {
                let mut out = Vec::new();
                for (j, set) in sets.iter().enumerate() {
                    if let Some(bad) = set.iter().find(|&&i| i >= n) {
                        return Err(invalid(
                            format!("schedule.sets[{j}]"),
                            format!("node {bad} is outside the graph"),
                        ));
                    }
                    out.push(set.iter().copied().collect::<NodeSet>());
                }
                Schedule::Scripted(out)
            }
        };
        let delays = match &self.delays {
            DelaySpec::None => DelayModel::None,
            DelaySpec::Uniform { tau } => DelayModel::Uniform { tau: *tau },
            DelaySpec::Fixed { tau, lags } => DelayModel::FixedByHops {
                tau: *tau,
                lags: lags.clone(),
            },
        };
        let scenario = Scenario {
            graph,
            l: self.l,
            f: self.f,
            locality: match self.model {
                ModelSpec::Total => Locality::Total,
                ModelSpec::Local => Locality::Local,
            },
            adversaries,
            schedule,
            delays,
            x0: self.x0.clone(),
            seed: self.seed,
            horizon: self.horizon,
            floor_rule: self
                .floor_probability
                .map_or(FloorRule::Unbiased, FloorRule::Fixed),
        };
        scenario
            .validate()
            .map_err(|e| invalid(engine_key(&e), e))?;
        Ok(scenario)
    }
}

fn engine_key(e: &EngineError) -> &'static str {
    match e {
        EngineError::ZeroHops => "l",
        EngineError::X0Length { .. } => "x0",
        EngineError::AdversaryOutOfRange { .. }
        | EngineError::Adversary(_)
        | EngineError::NoNormalNodes => "adversary",
        EngineError::FaultModelViolated { .. } => "f",
        EngineError::Schedule(_) => "schedule",
        EngineError::Delay(_) => "delays",
        EngineError::Quantizer(_) => "floor_probability",
    }
}

fn build_graph(graph: &GraphSpec, base_dir: &Path) -> Result<DirectedGraph, ScenarioFileError> {
    let g = match graph {
        GraphSpec::Cycle { n } => gen_cycle(*n),
        GraphSpec::Wheel { n } => gen_wheel(*n),
        GraphSpec::Bipartite { n1, n2 } => gen_complete_bipartite(*n1, *n2),
        GraphSpec::SixNodeWheel => Ok(six_node_wheel()),
        GraphSpec::InterleavedK66 => Ok(interleaved_k66()),
        GraphSpec::File { path } => {
            let full = base_dir.join(path);
            let text = fs::read_to_string(&full).map_err(|source| ScenarioFileError::Io {
                path: full.clone(),
                source,
            })?;
            return text
                .parse()
                .map_err(|e| invalid("graph.path", format!("{}: {e}", full.display())));
        }
        GraphSpec::Edges {
            n,
            edges,
            undirected,
        } => {
            let pairs = edges.iter().map(|&[a, b]| (a, b));
            if *undirected {
                DirectedGraph::undirected(*n, pairs)
            } else {
                DirectedGraph::new(*n, pairs)
            }
        }
    };
    g.map_err(|e| invalid("graph", e))
}

fn build_adversary(a: &AdversarySpec, key: &str) -> Result<AdversaryBehavior, ScenarioFileError> {
    let own = match (&a.strategy, &a.strategies) {
        (Some(s), None) => vec![s.build(&format!("{key}.strategy"))?],
        (None, Some(list)) if !list.is_empty() => list
            .iter()
            .enumerate()
            .map(|(j, s)| s.build(&format!("{key}.strategies[{j}]")))
            .collect::<Result<_, _>>()?,
        (None, Some(_)) => return Err(invalid(format!("{key}.strategies"), "must not be empty")),
        (None, None) => {
            return Err(invalid(
                format!("{key}.strategy"),
                "missing; give `strategy` or `strategies`",
            ))
        }
        (Some(_), Some(_)) => {
            return Err(invalid(
                format!("{key}.strategies"),
                "give either `strategy` or `strategies`, not both",
            ))
        }
    };
    let model = match a.model {
        AttackSpec::Malicious => AttackModel::Malicious,
        AttackSpec::Byzantine => AttackModel::Byzantine,
    };
    if model == AttackModel::Malicious && own.len() > 1 {
        return Err(invalid(
            format!("{key}.strategies"),
            "a malicious node sends one value to everyone",
        ));
    }
    let relay = match &a.relay {
        RelaySpec::PassThrough => RelayStrategy::PassThrough,
        RelaySpec::ReplaceWithOwn => RelayStrategy::ReplaceWithOwn,
        RelaySpec::Offset { delta } => RelayStrategy::Offset(*delta),
        RelaySpec::Replace { values } => {
            if values.is_empty() {
                return Err(invalid(format!("{key}.relay.values"), "must not be empty"));
            }
            RelayStrategy::Replace(
                values
                    .iter()
                    .enumerate()
                    .map(|(j, s)| s.build(&format!("{key}.relay.values[{j}]")))
                    .collect::<Result<_, _>>()?,
            )
        }
    };
    let drop = match a.drop {
        DropSpec::Never => DropPolicy::Never,
        DropSpec::Always => DropPolicy::Always,
        DropSpec::Before { k } => DropPolicy::Before(k),
    };
    if a.hold == Some(0) {
        return Err(invalid(format!("{key}.hold"), "must be positive"));
    }
    Ok(AdversaryBehavior {
        model,
        own,
        relay,
        drop,
        schedule_override: a.hold,
    })
}
