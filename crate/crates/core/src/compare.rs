//! Side-by-side evaluation of the scheduling policies on one circuit.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::bench::BenchmarkSpec;
use crate::dd::{self, DdConfig};
use crate::ir::{DeviceModel, Dt};
use crate::sched::{self, TimedCircuit};
use crate::sim::{self, DensityMatrixSimulator};
use crate::tuner::{self, Mode, TuneConfig};
use crate::{derive_seed, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ComparePolicy {
    Alap,
    Asap,
    Middle,
    TsSi,
    TsSiC,
    Dd,
    DdH,
    TsDd,
    TsDdH,
}

impl ComparePolicy {
    pub const ALL: [ComparePolicy; 9] = [
        ComparePolicy::Alap,
        ComparePolicy::Asap,
        ComparePolicy::Middle,
        ComparePolicy::TsSi,
        ComparePolicy::TsSiC,
        ComparePolicy::Dd,
        ComparePolicy::DdH,
        ComparePolicy::TsDd,
        ComparePolicy::TsDdH,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ComparePolicy::Alap => "ALAP",
            ComparePolicy::Asap => "ASAP",
            ComparePolicy::Middle => "Middle",
            ComparePolicy::TsSi => "TS-SI",
            ComparePolicy::TsSiC => "TS-SI+C",
            ComparePolicy::Dd => "DD",
            ComparePolicy::DdH => "DD(H)",
            ComparePolicy::TsDd => "TS+DD",
            ComparePolicy::TsDdH => "TS+DD(H)",
        }
    }
}

impl fmt::Display for ComparePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ComparePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ComparePolicy::ALL
            .into_iter()
            .find(|p| p.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Usage(format!("unknown policy '{s}'")))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CompareConfig {
    pub budget: usize,
    pub shots: u64,
    pub eval_shots: u64,
    pub seed: u64,
    pub dd_factor: f64,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            budget: tuner::DEFAULT_BUDGET,
            shots: tuner::DEFAULT_SHOTS,
            eval_shots: 10_000,
            seed: 0,
            dd_factor: dd::DEFAULT_HEURISTIC_FACTOR,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolicyRow {
    pub policy: ComparePolicy,
    pub total_duration: Dt,
    pub tuned_windows: usize,
    pub inserted_gates: usize,
    /// Sampled probability of success.
    pub pos: f64,
    /// `(pos - pos_alap) / pos_alap`.
    pub relative_pos: f64,
    /// Expected probability of success from the exact output distribution.
    pub pos_exact: f64,
    pub hellinger: f64,
}

impl PolicyRow {
    /// One standard deviation of the sampled POS.
    pub fn sigma(&self, shots: u64) -> f64 {
        (self.pos * (1.0 - self.pos) / shots as f64).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub benchmark: String,
    pub accepted: Vec<String>,
    pub num_windows: usize,
    pub budget: usize,
    pub shots: u64,
    pub eval_shots: u64,
    pub seed: u64,
    pub rows: Vec<PolicyRow>,
}

impl ComparisonReport {
    pub fn row(&self, p: ComparePolicy) -> &PolicyRow {
        self.rows
            .iter()
            .find(|r| r.policy == p)
            .expect("every policy has a row")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# compare benchmark={} accepted={} windows={} budget={} shots={} eval_shots={} seed={}",
            self.benchmark,
            self.accepted.join("+"),
            self.num_windows,
            self.budget,
            self.shots,
            self.eval_shots,
            self.seed
        );
        let _ = writeln!(
            out,
            "{:<10} {:>14} {:>6} {:>9} {:>9} {:>10} {:>9} {:>9}",
            "policy", "total_duration", "tuned", "inserted", "pos", "rel_pos", "pos_exact", "hellinger"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<10} {:>14} {:>6} {:>9} {:>9.4} {:>+10.4} {:>9.4} {:>9.4}",
                r.policy.label(),
                r.total_duration,
                r.tuned_windows,
                r.inserted_gates,
                r.pos,
                r.relative_pos,
                r.pos_exact,
                r.hellinger
            );
        }
        out
    }
}

/// Builds every policy's schedule, tuning against the device's own noise.
/// Each entry carries the number of tuned windows and inserted DD gates.
pub fn policy_schedules(
    spec: &BenchmarkSpec,
    device: &Arc<DeviceModel>,
    cfg: &CompareConfig,
) -> Result<Vec<(ComparePolicy, TimedCircuit, usize, usize)>> {
    let c = &spec.circuit;
    let backend = DensityMatrixSimulator::new();
    let tune = |mode: Mode, tag: u64| {
        tuner::run_pipeline(
            c,
            device,
            &backend,
            &TuneConfig {
                mode,
                budget: cfg.budget,
                shots: cfg.shots,
                seed: derive_seed(cfg.seed, &[tag]),
            },
        )
    };
    let ts_si = tune(Mode::TsSi, 1)?;
    let ts_si_c = tune(Mode::TsSiC, 2)?;
    let alap = ts_si.baseline.clone();
    let plain = DdConfig::default();
    let heur = DdConfig {
        heuristic: true,
        heuristic_factor: cfg.dd_factor,
        ..DdConfig::default()
    };
    let (dd_plain, n_plain) = dd::apply_dd(&alap, &plain)?;
    let (dd_heur, n_heur) = dd::apply_dd(&alap, &heur)?;
    let (ts_dd, n_ts_dd) = dd::apply_dd(&ts_si_c.stitched.schedule, &plain)?;
    let (ts_dd_h, n_ts_dd_h) = dd::apply_dd(&ts_si_c.stitched.schedule, &heur)?;
    let c_tuned = ts_si_c.report.tuned_count();
    Ok(vec![
        (ComparePolicy::Alap, alap, 0, 0),
        (ComparePolicy::Asap, sched::schedule(c, device, sched::Policy::Asap)?, 0, 0),
        (ComparePolicy::Middle, sched::schedule(c, device, sched::Policy::Middle)?, 0, 0),
        (ComparePolicy::TsSi, ts_si.stitched.schedule, ts_si.report.tuned_count(), 0),
        (ComparePolicy::TsSiC, ts_si_c.stitched.schedule, c_tuned, 0),
        (ComparePolicy::Dd, dd_plain, 0, n_plain),
        (ComparePolicy::DdH, dd_heur, 0, n_heur),
        (ComparePolicy::TsDd, ts_dd, c_tuned, n_ts_dd),
        (ComparePolicy::TsDdH, ts_dd_h, c_tuned, n_ts_dd_h),
    ])
}

/// Runs the nine-policy comparison. All policies are sampled with the same
/// evaluation seed so their differences are not dominated by sampling noise.
pub fn compare(
    spec: &BenchmarkSpec,
    device: &Arc<DeviceModel>,
    cfg: &CompareConfig,
) -> Result<ComparisonReport> {
    let schedules = policy_schedules(spec, device, cfg)?;
    let ideal = sim::ideal_distribution(&spec.circuit)?;
    let eval_seed = derive_seed(cfg.seed, &[0]);
    let mut rows = Vec::with_capacity(schedules.len());
    for (policy, tc, tuned, inserted) in &schedules {
        let probs = sim::exact_distribution(tc, device)?;
        let dist = sim::sample_distribution(&probs, cfg.eval_shots, eval_seed);
        let pos = sim::pos(&dist, &spec.accepted)?;
        let pos_exact: f64 = spec
            .accepted
            .iter()
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .map(|a| probs.get(a).copied().unwrap_or(0.0))
            .sum();
        rows.push(PolicyRow {
            policy: *policy,
            total_duration: tc.total_duration(),
            tuned_windows: *tuned,
            inserted_gates: *inserted,
            pos,
            relative_pos: 0.0,
            pos_exact,
            hellinger: sim::hellinger_fidelity(&dist.probabilities(), &ideal)?,
        });
    }
    let base = rows[0].pos;
    for r in &mut rows {
        r.relative_pos = if base > 0.0 { (r.pos - base) / base } else { 0.0 };
    }
    Ok(ComparisonReport {
        benchmark: spec.name.clone(),
        accepted: spec.accepted.clone(),
        num_windows: sched::find_slack_windows(&schedules[0].1).len(),
        budget: cfg.budget,
        shots: cfg.shots,
        eval_shots: cfg.eval_shots,
        seed: cfg.seed,
        rows,
    })
}

/// Exact noiseless distributions of every policy's schedule, for checking
/// that no policy changes what the circuit computes.
pub fn noiseless_distributions(
    schedules: &[(ComparePolicy, TimedCircuit, usize, usize)],
    device: &DeviceModel,
) -> Result<BTreeMap<ComparePolicy, BTreeMap<String, f64>>> {
    let quiet = device.noiseless();
    schedules
        .iter()
        .map(|(p, tc, _, _)| Ok((*p, sim::exact_distribution(tc, &quiet)?)))
        .collect()
}
