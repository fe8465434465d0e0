//! Parallel seed sweeps and their aggregate verdicts.

use std::fmt;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use rqc_core::engine::{
    envelopes_monotone, run_with_retry, verdict_preservation, verdict_safety, EngineError,
    Scenario, Trace,
};

/// Runs every scenario on the worker pool, in input order.
pub fn sweep(scenarios: &[Scenario]) -> Result<Vec<Trace>, EngineError> {
    scenarios.par_iter().map(run_with_retry).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedOutcome {
    pub seed: u64,
    pub consensus_time: Option<u64>,
    pub agreed_value: Option<i64>,
    pub safety_ok: bool,
    pub preservation_ok: bool,
    pub envelopes_ok: bool,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub runs: usize,
    pub agreed: usize,
    pub mean_consensus_time: Option<f64>,
    pub safety_violations: usize,
    pub preservation_violations: usize,
    /// Synchronous runs whose normal max rose or min fell.
    pub envelope_violations: usize,
    pub safety_interval: Option<(i64, i64)>,
    pub seeds: Vec<SeedOutcome>,
}

impl SweepSummary {
    pub fn from_traces(traces: &[Trace]) -> Self {
        let seeds: Vec<SeedOutcome> = traces
            .iter()
            .map(|t| SeedOutcome {
                seed: t.seed,
                consensus_time: t.consensus_time,
                agreed_value: t.agreed_value(),
                safety_ok: verdict_safety(t),
                preservation_ok: verdict_preservation(t),
                envelopes_ok: !t.synchronous || envelopes_monotone(t),
                steps: t.steps(),
            })
            .collect();
        let times: Vec<u64> = seeds.iter().filter_map(|s| s.consensus_time).collect();
        SweepSummary {
            runs: seeds.len(),
            agreed: times.len(),
            mean_consensus_time: (!times.is_empty())
                .then(|| times.iter().sum::<u64>() as f64 / times.len() as f64),
            safety_violations: seeds.iter().filter(|s| !s.safety_ok).count(),
            preservation_violations: seeds.iter().filter(|s| !s.preservation_ok).count(),
            envelope_violations: seeds.iter().filter(|s| !s.envelopes_ok).count(),
            safety_interval: traces.first().map(|t| t.safety_interval),
            seeds,
        }
    }

    pub fn consensus_rate(&self) -> f64 {
        if self.runs == 0 {
            0.0
        } else {
            self.agreed as f64 / self.runs as f64
        }
    }

    /// Whether every agreed value lies in the safety interval.
    pub fn agreed_values_safe(&self) -> bool {
        let Some((lo, hi)) = self.safety_interval else {
            return true;
        };
        self.seeds
            .iter()
            .filter_map(|s| s.agreed_value)
            .all(|v| (lo..=hi).contains(&v))
    }
}

impl fmt::Display for SweepSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.seeds {
            writeln!(
                f,
                "seed {:>4}: consensus_time = {:>5} value = {:>5} safety_ok = {} preservation_ok = {} steps = {}",
                s.seed,
                s.consensus_time.map_or("none".into(), |k| k.to_string()),
                s.agreed_value.map_or("-".into(), |v| v.to_string()),
                s.safety_ok,
                s.preservation_ok,
                s.steps,
            )?;
        }
        writeln!(f, "runs = {}", self.runs)?;
        writeln!(f, "consensus_rate = {:.3}", self.consensus_rate())?;
        match self.mean_consensus_time {
            Some(m) => writeln!(f, "mean_consensus_time = {m:.2}")?,
            None => writeln!(f, "mean_consensus_time = none")?,
        }
        if let Some((lo, hi)) = self.safety_interval {
            writeln!(f, "safety_interval = [{lo}, {hi}]")?;
        }
        writeln!(f, "safety_violations = {}", self.safety_violations)?;
        writeln!(
            f,
            "preservation_violations = {}",
            self.preservation_violations
        )?;
        writeln!(f, "envelope_violations = {}", self.envelope_violations)
    }
}

/// Writes `trace_seed<N>.csv` (long format) for each trace.
pub fn write_csv(dir: &Path, traces: &[Trace]) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    traces
        .par_iter()
        .try_for_each(|t| fs::write(dir.join(format!("trace_seed{}.csv", t.seed)), t.to_csv()))
}

/// Writes `plot_seed<N>.csv`, one row per step and one column per node.
pub fn write_plotdata(dir: &Path, traces: &[Trace]) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    traces
        .par_iter()
        .try_for_each(|t| fs::write(dir.join(format!("plot_seed{}.csv", t.seed)), t.to_matrix()))
}
