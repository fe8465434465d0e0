//! Built-in reproduction scenarios and the robustness table for the
//! cycle, complete bipartite and wheel families.
//!
//! Node ids are zero-based throughout, so a node conventionally labelled `k`
//! (counting from one) is node `k - 1` here.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use rqc_core::adversary::{AdversaryBehavior, RelayStrategy, ValueStrategy};
use rqc_core::engine::{DelayModel, Scenario, Schedule};
use rqc_core::graph::{gen_complete_bipartite, gen_cycle, gen_wheel, DirectedGraph, NodeSet};
use rqc_core::robustness::{is_rs_robust, is_strictly_robust, x_set, FaultModel, Witness};

use crate::sweep::{sweep, SweepSummary};

/// Initial values of the eight-node cycle runs.
pub const CYCLE_X0: [i64; 8] = [4, 5, 6, 7, 8, 9, 3, 1];
/// Initial values of the six-node wheel run.
pub const WHEEL_X0: [i64; 6] = [3, 5, 1, 7, 3, 9];
/// Twelve draws from `1..15` with `ChaCha8Rng::seed_from_u64(0)`, frozen.
pub const BIPARTITE_X0: [i64; 12] = [7, 10, 1, 13, 8, 12, 14, 12, 3, 13, 11, 8];

/// Rim order of the six-node wheel, as zero-based ids around the cycle.
pub const WHEEL_RIM: [usize; 5] = [1, 2, 4, 3, 5];

/// Six-node wheel with hub 0 and rim cycle 1-2-4-3-5. With this rim order
/// the pair `{2,4}` / `{1,3,5}` under fault set `{0}` is a witness against
/// 2-strict robustness with one hop.
pub fn six_node_wheel() -> DirectedGraph {
    let mut edges = Vec::new();
    for (w, &v) in WHEEL_RIM.iter().enumerate() {
        edges.push((0, v));
        edges.push((v, WHEEL_RIM[(w + 1) % WHEEL_RIM.len()]));
    }
    DirectedGraph::undirected(6, edges).expect("static graph")
}

/// `K_{6,6}` with even ids on one side and odd ids on the other.
pub fn interleaved_k66() -> DirectedGraph {
    let edges = (0..12).flat_map(|i| {
        (0..12)
            .filter(move |j| (i + j) % 2 == 1)
            .map(move |j| (i, j))
    });
    DirectedGraph::new(12, edges).expect("static graph")
}

/// Pair of halves `{0..5}` / `{6..11}` that blocks (4,4)-robustness of
/// [`interleaved_k66`] with one hop.
pub fn k66_halves() -> (NodeSet, NodeSet) {
    ((0..6).collect(), (6..12).collect())
}

fn cycle_sine() -> AdversaryBehavior {
    let sine = ValueStrategy::QuantizedSine {
        amplitude: 6.0,
        period: 12.0,
        offset: 5.0,
    };
    AdversaryBehavior::malicious(sine, RelayStrategy::ReplaceWithOwn)
}

fn wheel_byzantine() -> AdversaryBehavior {
    let values = vec![
        ValueStrategy::Constant(0),
        ValueStrategy::Constant(12),
        ValueStrategy::Oscillate { a: 1, b: 10 },
        ValueStrategy::QuantizedSine {
            amplitude: 5.0,
            period: 8.0,
            offset: 5.0,
        },
    ];
    AdversaryBehavior::byzantine(values.clone(), RelayStrategy::Replace(values))
}

fn low_oscillation() -> AdversaryBehavior {
    AdversaryBehavior::malicious(
        ValueStrategy::Oscillate { a: 0, b: 1 },
        RelayStrategy::ReplaceWithOwn,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    Fig3OneHop,
    Fig3FourHop,
    Fig4Async,
    Fig5Delays,
    Fig6OneHop,
    Fig6TwoHop,
    LemmaTable,
    ByzantineCycle,
}

impl Preset {
    pub const ALL: [Preset; 8] = [
        Preset::Fig3OneHop,
        Preset::Fig3FourHop,
        Preset::Fig4Async,
        Preset::Fig5Delays,
        Preset::Fig6OneHop,
        Preset::Fig6TwoHop,
        Preset::LemmaTable,
        Preset::ByzantineCycle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig3OneHop => "fig3_1hop",
            Preset::Fig3FourHop => "fig3_4hop",
            Preset::Fig4Async => "fig4_async",
            Preset::Fig5Delays => "fig5_delays",
            Preset::Fig6OneHop => "fig6_1hop",
            Preset::Fig6TwoHop => "fig6_2hop",
            Preset::LemmaTable => "lemma_table",
            Preset::ByzantineCycle => "byzantine_cycle",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Preset::Fig3OneHop => "8-cycle, sine-driven malicious node 7, synchronous, 1 hop: no agreement",
            Preset::Fig3FourHop => "8-cycle, sine-driven malicious node 7, synchronous, 4 hops: agreement in [3, 9]",
            Preset::Fig4Async => "8-cycle, sine-driven malicious node 7, randomized updates p = 0.5, 4 hops: agreement",
            Preset::Fig5Delays => "6-node wheel, Byzantine hub, round-robin updates, lags 0/1 by hop, 2 hops: agreement",
            Preset::Fig6OneHop => "interleaved K_{6,6}, oscillating malicious nodes 0, 2, 4, 1 hop: no agreement",
            Preset::Fig6TwoHop => "interleaved K_{6,6}, oscillating malicious nodes 0, 2, 4, 2 hops: agreement",
            Preset::LemmaTable => "robustness of cycles, complete bipartite graphs and wheels at their claimed hop counts",
            Preset::ByzantineCycle => "8-cycle is not 2-strictly robust at any hop count, so no Byzantine run is attempted",
        }
    }

    /// Scenario for one seed, for presets that simulate.
    pub fn scenario(self, seed: u64) -> Option<Scenario> {
        let cycle = |l: usize| {
            Scenario::new(gen_cycle(8).expect("static graph"), l, 1, CYCLE_X0.to_vec())
                .with_adversary(7, cycle_sine())
                .with_horizon(400)
        };
        let bipartite = |l: usize| {
            let mut sc =
                Scenario::new(interleaved_k66(), l, 3, BIPARTITE_X0.to_vec()).with_horizon(600);
            for a in [0, 2, 4] {
                sc = sc.with_adversary(a, low_oscillation());
            }
            sc
        };
        let sc = match self {
            Preset::Fig3OneHop => cycle(1),
            Preset::Fig3FourHop => cycle(4),
            Preset::Fig4Async => cycle(4)
                .with_schedule(Schedule::randomized_uniform(8, 0.5))
                .with_horizon(800),
            Preset::Fig5Delays => Scenario::new(six_node_wheel(), 2, 1, WHEEL_X0.to_vec())
                .with_adversary(0, wheel_byzantine())
                .with_schedule(Schedule::Deterministic { kbar: 2 })
                .with_delays(DelayModel::FixedByHops {
                    tau: 2,
                    lags: vec![0, 1],
                })
                .with_horizon(600),
            Preset::Fig6OneHop => bipartite(1),
            Preset::Fig6TwoHop => bipartite(2),
            Preset::LemmaTable | Preset::ByzantineCycle => return None,
        };
        Some(sc.with_seed(seed))
    }

    /// Whether every seed should reach agreement (`Some(true)`) or none
    /// should (`Some(false)`).
    pub fn expects_agreement(self) -> Option<bool> {
        match self {
            Preset::Fig3OneHop | Preset::Fig6OneHop => Some(false),
            Preset::Fig3FourHop | Preset::Fig4Async | Preset::Fig5Delays | Preset::Fig6TwoHop => {
                Some(true)
            }
            Preset::LemmaTable | Preset::ByzantineCycle => None,
        }
    }

    /// Graph conditions that should hold (or fail) before the runs mean
    /// anything.
    pub fn graph_claims(self) -> Vec<GraphClaim> {
        let c8 = || gen_cycle(8).expect("static graph");
        match self {
            Preset::Fig3OneHop => vec![GraphClaim::rs(
                c8(),
                "8-cycle",
                2,
                2,
                1,
                FaultModel::total(1),
                false,
            )],
            Preset::Fig3FourHop | Preset::Fig4Async => {
                vec![GraphClaim::rs(
                    c8(),
                    "8-cycle",
                    2,
                    2,
                    4,
                    FaultModel::total(1),
                    true,
                )]
            }
            Preset::Fig5Delays => vec![GraphClaim::strict(
                six_node_wheel(),
                "6-node wheel",
                2,
                2,
                FaultModel::total(1),
                true,
            )],
            Preset::Fig6OneHop => vec![GraphClaim::rs(
                interleaved_k66(),
                "interleaved K_{6,6}",
                4,
                4,
                1,
                FaultModel::total(3),
                false,
            )],
            Preset::Fig6TwoHop => vec![GraphClaim::rs(
                interleaved_k66(),
                "interleaved K_{6,6}",
                4,
                4,
                2,
                FaultModel::total(3),
                true,
            )],
            Preset::ByzantineCycle => (1..=7)
                .map(|l| GraphClaim::strict(c8(), "8-cycle", 2, l, FaultModel::total(1), false))
                .collect(),
            Preset::LemmaTable => Vec::new(),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Preset::ALL.iter().map(|p| p.name()).collect();
                format!("unknown preset `{s}`; expected one of {}", names.join(", "))
            })
    }
}

/// One robustness condition with its expected verdict.
#[derive(Debug, Clone)]
pub struct GraphClaim {
    pub graph: DirectedGraph,
    pub label: String,
    pub r: usize,
    pub s: usize,
    pub l: usize,
    pub model: FaultModel,
    pub strict: bool,
    pub expected: bool,
}

impl GraphClaim {
    pub fn rs(
        graph: DirectedGraph,
        label: &str,
        r: usize,
        s: usize,
        l: usize,
        model: FaultModel,
        expected: bool,
    ) -> Self {
        GraphClaim {
            graph,
            label: label.into(),
            r,
            s,
            l,
            model,
            strict: false,
            expected,
        }
    }

    pub fn strict(
        graph: DirectedGraph,
        label: &str,
        r: usize,
        l: usize,
        model: FaultModel,
        expected: bool,
    ) -> Self {
        GraphClaim {
            graph,
            label: label.into(),
            r,
            s: 1,
            l,
            model,
            strict: true,
            expected,
        }
    }

    pub fn property(&self) -> String {
        if self.strict {
            format!("{}-strictly robust, l = {}, {}", self.r, self.l, self.model)
        } else {
            format!(
                "({},{})-robust, l = {}, {}",
                self.r, self.s, self.l, self.model
            )
        }
    }

    /// Verdict and witness, if any.
    pub fn evaluate(&self) -> (bool, Option<Witness>) {
        let verdict = if self.strict {
            is_strictly_robust(&self.graph, self.r, self.l, self.model)
        } else {
            is_rs_robust(&self.graph, self.r, self.s, self.l, self.model)
        }
        .expect("claims stay within exhaustive range");
        (verdict.holds, verdict.witness)
    }
}

#[derive(Debug, Clone)]
pub struct ClaimResult {
    pub claim: String,
    pub expected: bool,
    pub observed: bool,
    pub witness: Option<Witness>,
}

impl ClaimResult {
    pub fn pass(&self) -> bool {
        self.expected == self.observed
    }
}

pub fn check_claims(claims: &[GraphClaim]) -> Vec<ClaimResult> {
    claims
        .iter()
        .map(|c| {
            let (observed, witness) = c.evaluate();
            ClaimResult {
                claim: format!("{}: {}", c.label, c.property()),
                expected: c.expected,
                observed,
                witness,
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct PresetReport {
    pub preset: Preset,
    pub claims: Vec<ClaimResult>,
    pub sweep: Option<SweepSummary>,
    pub lemma_rows: Vec<LemmaRow>,
    pub elapsed_ms: u128,
}

impl PresetReport {
    pub fn pass(&self) -> bool {
        let claims_ok = self.claims.iter().all(ClaimResult::pass);
        let rows_ok = self.lemma_rows.iter().all(LemmaRow::pass);
        let sweep_ok = match (&self.sweep, self.preset.expects_agreement()) {
            (Some(s), Some(expect)) => {
                let agreement_ok = if expect {
                    s.agreed == s.runs
                } else {
                    s.agreed == 0
                };
                agreement_ok
                    && s.safety_violations == 0
                    && s.preservation_violations == 0
                    && s.envelope_violations == 0
            }
            _ => true,
        };
        claims_ok && rows_ok && sweep_ok
    }
}

impl fmt::Display for PresetReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "preset = {}", self.preset)?;
        writeln!(f, "description = {}", self.preset.description())?;
        for c in &self.claims {
            let w = c
                .witness
                .map(|w| format!(" witness V1={} V2={} F={}", w.v1, w.v2, w.fault))
                .unwrap_or_default();
            writeln!(
                f,
                "claim {} expected={} observed={} {}{w}",
                c.claim,
                verdict_word(c.expected),
                verdict_word(c.observed),
                pass_word(c.pass())
            )?;
        }
        if !self.lemma_rows.is_empty() {
            write!(f, "{}", format_lemma_table(&self.lemma_rows))?;
        }
        if let Some(s) = &self.sweep {
            write!(f, "{s}")?;
            if let Some(expect) = self.preset.expects_agreement() {
                writeln!(
                    f,
                    "expected = {}",
                    if expect {
                        "agreement on every seed"
                    } else {
                        "agreement on no seed"
                    }
                )?;
            }
        }
        writeln!(f, "elapsed_ms = {}", self.elapsed_ms)?;
        writeln!(f, "result = {}", pass_word(self.pass()))
    }
}

fn verdict_word(b: bool) -> &'static str {
    if b {
        "holds"
    } else {
        "fails"
    }
}

fn pass_word(b: bool) -> &'static str {
    if b {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn run_preset(preset: Preset, seeds: Range<u64>) -> PresetReport {
    let start = Instant::now();
    let claims = check_claims(&preset.graph_claims());
    let lemma_rows = if preset == Preset::LemmaTable {
        lemma_table()
    } else {
        Vec::new()
    };
    let sweep = preset.scenario(0).map(|_| {
        let scenarios: Vec<Scenario> = seeds
            .clone()
            .map(|s| preset.scenario(s).expect("simulating preset"))
            .collect();
        SweepSummary::from_traces(&sweep(&scenarios).expect("presets are valid"))
    });
    PresetReport {
        preset,
        claims,
        sweep,
        lemma_rows,
        elapsed_ms: start.elapsed().as_millis(),
    }
}

/// One family member checked at its claimed hop count and one hop fewer.
#[derive(Debug, Clone)]
pub struct LemmaRow {
    pub graph: String,
    pub property: String,
    pub claimed_l: usize,
    pub holds_at_claimed: bool,
    /// Verdict one hop below the claim, when that is at least one hop.
    pub holds_below: Option<bool>,
    /// Whether the verdict one hop below is required to fail.
    pub must_fail_below: bool,
}

impl LemmaRow {
    pub fn pass(&self) -> bool {
        self.holds_at_claimed && !(self.must_fail_below && self.holds_below != Some(false))
    }
}

fn lemma_row(
    name: String,
    claim: impl Fn(usize) -> GraphClaim,
    claimed_l: usize,
    must_fail_below: bool,
) -> LemmaRow {
    let at = claim(claimed_l);
    let below = (claimed_l > 1).then(|| claim(claimed_l - 1).evaluate().0);
    LemmaRow {
        graph: name,
        property: at.property().replace(&format!(", l = {claimed_l}"), ""),
        claimed_l,
        holds_at_claimed: at.evaluate().0,
        holds_below: below,
        must_fail_below,
    }
}

/// Cycles `C_4..C_8` are (2,2)-robust with `ceil((n-1)/2)` hops, complete
/// bipartite graphs with smaller side `d` are `(d/2+1, d/2+1)`-robust with
/// two hops, and wheels `W_4..W_8` are 2-strictly robust with
/// `floor((n-1)/4)+1` hops.
pub fn lemma_table() -> Vec<LemmaRow> {
    let mut jobs: Vec<Box<dyn Fn() -> LemmaRow + Send + Sync>> = Vec::new();
    for n in 4..=8usize {
        jobs.push(Box::new(move || {
            let g = gen_cycle(n).expect("n > 2");
            let l = (n - 1).div_ceil(2);
            let label = format!("C_{n}");
            let claim = |l| GraphClaim::rs(g.clone(), &label, 2, 2, l, FaultModel::total(1), true);
            lemma_row(label.clone(), claim, l, n == 8)
        }));
    }
    for (n1, n2) in [(2usize, 2usize), (2, 3), (2, 5), (3, 3), (3, 4)] {
        jobs.push(Box::new(move || {
            let g = gen_complete_bipartite(n1, n2).expect("positive sides");
            let d = n1.min(n2);
            let r = d / 2 + 1;
            let label = format!("K_{{{n1},{n2}}}");
            let claim =
                |l| GraphClaim::rs(g.clone(), &label, r, r, l, FaultModel::total(d / 2), true);
            lemma_row(label.clone(), claim, 2, false)
        }));
    }
    for n in 4..=8usize {
        jobs.push(Box::new(move || {
            let g = gen_wheel(n).expect("n > 3");
            let l = (n - 1) / 4 + 1;
            let label = format!("W_{n}");
            let claim = |l| GraphClaim::strict(g.clone(), &label, 2, l, FaultModel::total(1), true);
            lemma_row(label.clone(), claim, l, n == 6)
        }));
    }
    jobs.par_iter().map(|job| job()).collect()
}

pub fn format_lemma_table(rows: &[LemmaRow]) -> String {
    let mut out = format!(
        "{:<10} {:<36} {:>3} {:>8} {:>9} {:>6}\n",
        "graph", "property", "l", "at l", "at l-1", "result"
    );
    for r in rows {
        let below = match r.holds_below {
            Some(b) => verdict_word(b),
            None => "-",
        };
        out.push_str(&format!(
            "{:<10} {:<36} {:>3} {:>8} {:>9} {:>6}\n",
            r.graph,
            r.property,
            r.claimed_l,
            verdict_word(r.holds_at_claimed),
            below,
            pass_word(r.pass())
        ));
    }
    out
}

/// Scenario that realizes a robustness witness as a stalemate: the nodes of
/// `X(V1)` and `X(V2)` become constant adversaries, `V1` starts at `low`,
/// `V2` at `high` and everything else halfway.
pub fn necessity_scenario(
    g: &DirectedGraph,
    w: &Witness,
    f: usize,
    l: usize,
    low: i64,
    high: i64,
) -> Scenario {
    let x1 = x_set(g, w.v1, w.fault, f + 1, l);
    let x2 = x_set(g, w.v2, w.fault, f + 1, l);
    let mid = low + (high - low) / 2;
    let x0 = g
        .nodes()
        .iter()
        .map(|i| {
            if w.v1.contains(i) {
                low
            } else if w.v2.contains(i) {
                high
            } else {
                mid
            }
        })
        .collect();
    let mut sc = Scenario::new(g.clone(), l, f, x0);
    for a in x1.union(x2).iter() {
        let c = if w.v1.contains(a) { low } else { high };
        sc = sc.with_adversary(
            a,
            AdversaryBehavior::malicious(ValueStrategy::Constant(c), RelayStrategy::ReplaceWithOwn),
        );
    }
    sc
}
