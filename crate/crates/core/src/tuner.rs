//! Budgeted per-window position sweeps and schedule stitching.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ir::{self, Circuit, DeviceModel, Dt, Qubit};
use crate::sched::{self, Policy, SlackWindow, TimedCircuit};
use crate::sim::OutcomeDistribution;
use crate::slice::{self, SICircuit};
use crate::{derive_seed, Error, Result};

pub const DEFAULT_BUDGET: usize = 900;
pub const DEFAULT_SHOTS: u64 = 1024;

/// Anything that can execute a timed circuit and return outcome counts.
pub trait Backend: Sync {
    fn run(&self, tc: &TimedCircuit, shots: u64, seed: u64) -> Result<OutcomeDistribution>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// Tune every window with a nonempty gate block.
    TsSi,
    /// Tune only windows whose SI circuit passes the CX-depth criteria.
    TsSiC,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::TsSi => "TS-SI",
            Mode::TsSiC => "TS-SI+C",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TuningPlan {
    pub budget: usize,
    pub per_window_slots: usize,
    pub shots: u64,
    /// Window id and its ascending offset grid.
    pub grids: Vec<(usize, Vec<Dt>)>,
}

/// `n` offsets spread uniformly over `[0, max]`, including both ends, capped
/// at the number of distinct dt slots.
pub fn offset_grid(max: Dt, n: usize) -> Vec<Dt> {
    let m = (n as u64).min(max + 1).max(1);
    if m == 1 {
        return vec![max];
    }
    let mut grid: Vec<Dt> = (0..m)
        .map(|k| ((k as u128 * max as u128) / (m as u128 - 1)) as Dt)
        .collect();
    grid.dedup();
    grid
}

pub fn plan_sweep(windows: &[SlackWindow], budget: usize, shots: u64) -> Result<TuningPlan> {
    if windows.is_empty() {
        return Err(Error::NoTunableWindows);
    }
    let per_window_slots = budget / windows.len();
    if per_window_slots < 2 {
        return Err(Error::BudgetTooSmall {
            budget,
            windows: windows.len(),
        });
    }
    Ok(TuningPlan {
        budget,
        per_window_slots,
        shots,
        grids: windows
            .iter()
            .map(|w| (w.window_id, offset_grid(w.max_offset(), per_window_slots)))
            .collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowResult {
    pub window_id: usize,
    /// Ground-truth frequency per grid offset, ascending by offset.
    pub scores: Vec<(Dt, f64)>,
    pub best_offset: Dt,
    pub baseline_offset: Dt,
}

impl WindowResult {
    pub fn score_at(&self, offset: Dt) -> Option<f64> {
        self.scores.iter().find(|(o, _)| *o == offset).map(|&(_, s)| s)
    }
}

/// Highest score, ties going to the larger offset.
pub fn best_of(scores: &[(Dt, f64)]) -> Option<Dt> {
    scores
        .iter()
        .copied()
        .max_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .map(|(o, _)| o)
}

/// A schedule to score and the bitstring that counts as success.
#[derive(Clone, Debug)]
pub struct Probe {
    pub timed: TimedCircuit,
    pub ground_truth: String,
}

impl From<SICircuit> for Probe {
    fn from(si: SICircuit) -> Self {
        Probe {
            ground_truth: si.ground_truth.clone(),
            timed: si.timed().clone(),
        }
    }
}

/// Sweeps `grid` for one window. `build` returns the probe circuit (normally
/// an SI circuit) at an offset; each offset gets its own seed derived from
/// `seed`, the window id and the grid position, so parallel and serial runs
/// agree.
pub fn tune_window<F>(
    window_id: usize,
    baseline_offset: Dt,
    grid: &[Dt],
    build: F,
    backend: &dyn Backend,
    shots: u64,
    seed: u64,
) -> Result<WindowResult>
where
    F: Fn(Dt) -> Result<Probe> + Sync,
{
    if grid.is_empty() {
        return Err(Error::Usage(format!("window {window_id}: empty offset grid")));
    }
    let scores = grid
        .par_iter()
        .enumerate()
        .map(|(k, &offset)| {
            let probe = build(offset)?;
            let s = derive_seed(seed, &[window_id as u64, k as u64]);
            let dist = backend.run(&probe.timed, shots, s)?;
            Ok((offset, dist.count(&probe.ground_truth) as f64 / shots as f64))
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::Backend {
            window: window_id,
            source: Box::new(e),
        })?;
    let best_offset = best_of(&scores).expect("grid is nonempty");
    Ok(WindowResult {
        window_id,
        scores,
        best_offset,
        baseline_offset,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct StitchedSchedule {
    pub schedule: TimedCircuit,
    pub results: BTreeMap<usize, WindowResult>,
}

/// Moves each tuned window's block to its best offset. Windows without a
/// result keep their baseline placement.
pub fn stitch(tc: &TimedCircuit, results: &[WindowResult]) -> Result<StitchedSchedule> {
    let windows = sched::find_slack_windows(tc);
    let mut moves = Vec::with_capacity(results.len());
    for r in results {
        let w = windows
            .get(r.window_id)
            .ok_or(Error::UnknownWindow(r.window_id))?;
        if r.best_offset > w.max_offset() {
            return Err(Error::OffsetOutOfRange {
                window: r.window_id,
                offset: r.best_offset,
                max: w.max_offset(),
            });
        }
        moves.push((w.clone(), r.best_offset));
    }
    Ok(StitchedSchedule {
        schedule: sched::move_blocks(tc, &moves)?,
        results: results.iter().map(|r| (r.window_id, r.clone())).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindowReport {
    pub window_id: usize,
    pub qubit: Qubit,
    pub start: Dt,
    pub duration: Dt,
    pub block_len: usize,
    pub slice_cx_depth: usize,
    pub si_cx_depth: usize,
    pub passes_criteria: bool,
    pub tuned: bool,
    pub baseline_offset: Dt,
    pub best_offset: Option<Dt>,
    pub scores: Vec<(Dt, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TuningReport {
    pub mode: Mode,
    pub budget: usize,
    pub shots: u64,
    pub seed: u64,
    pub original_cx_depth: usize,
    pub per_window_slots: usize,
    pub total_duration: Dt,
    pub windows: Vec<WindowReport>,
}

impl TuningReport {
    pub fn tuned_count(&self) -> usize {
        self.windows.iter().filter(|w| w.tuned).count()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# tuning mode={} budget={} shots={} seed={} slots_per_window={} original_cx_depth={} total_duration={}",
            self.mode, self.budget, self.shots, self.seed, self.per_window_slots,
            self.original_cx_depth, self.total_duration
        );
        let _ = writeln!(
            out,
            "window\tqubit\tstart\tduration\tblock\tslice_cx\tsi_cx\tcriteria\ttuned\talap_offset\tbest_offset\tdelta"
        );
        for w in &self.windows {
            let best = w.best_offset.unwrap_or(w.baseline_offset);
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                w.window_id,
                w.qubit,
                w.start,
                w.duration,
                w.block_len,
                w.slice_cx_depth,
                w.si_cx_depth,
                if w.passes_criteria { "pass" } else { "fail" },
                if w.tuned { "yes" } else { "no" },
                w.baseline_offset,
                best,
                best as i64 - w.baseline_offset as i64
            );
        }
        for w in self.windows.iter().filter(|w| w.tuned) {
            let _ = write!(out, "scores {}:", w.window_id);
            for (o, s) in &w.scores {
                let _ = write!(out, " {o}={s:.6}");
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub baseline: TimedCircuit,
    pub stitched: StitchedSchedule,
    pub report: TuningReport,
}

#[derive(Clone, Copy, Debug)]
pub struct TuneConfig {
    pub mode: Mode,
    pub budget: usize,
    pub shots: u64,
    pub seed: u64,
}

impl Default for TuneConfig {
    fn default() -> Self {
        TuneConfig {
            mode: Mode::TsSiC,
            budget: DEFAULT_BUDGET,
            shots: DEFAULT_SHOTS,
            seed: 0,
        }
    }
}

/// Schedules ALAP, selects tunable windows, sweeps each one and stitches the
/// optima into the baseline.
pub fn run_pipeline(
    c: &Circuit,
    device: &Arc<DeviceModel>,
    backend: &dyn Backend,
    cfg: &TuneConfig,
) -> Result<PipelineOutput> {
    let baseline = sched::schedule(c, device, Policy::Alap)?;
    let windows = sched::find_slack_windows(&baseline);
    let original_cx_depth = ir::cx_depth(c);

    let mut reports = Vec::with_capacity(windows.len());
    let mut slices = Vec::new();
    let mut tunable = Vec::new();
    for w in &windows {
        let s = slice::build_slice(&baseline, w)?;
        let slice_depth = s.cx_depth();
        let si_depth = 2 * slice_depth;
        let passes = si_depth <= original_cx_depth;
        let tuned = w.is_tunable() && (cfg.mode == Mode::TsSi || passes);
        reports.push(WindowReport {
            window_id: w.window_id,
            qubit: w.qubit,
            start: w.start,
            duration: w.duration,
            block_len: w.gate_block.len(),
            slice_cx_depth: slice_depth,
            si_cx_depth: si_depth,
            passes_criteria: passes,
            tuned,
            baseline_offset: w.offset(),
            best_offset: None,
            scores: Vec::new(),
        });
        if tuned {
            tunable.push(w.clone());
            slices.push(s);
        }
    }

    let mut results = Vec::new();
    let mut per_window_slots = 0;
    if !tunable.is_empty() {
        let plan = plan_sweep(&tunable, cfg.budget, cfg.shots)?;
        per_window_slots = plan.per_window_slots;
        results = tunable
            .par_iter()
            .zip(&slices)
            .zip(&plan.grids)
            .map(|((w, s), (_, grid))| {
                tune_window(
                    w.window_id,
                    w.offset(),
                    grid,
                    |o| slice::build_si_circuit(s, o).map(Probe::from),
                    backend,
                    cfg.shots,
                    cfg.seed,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        for r in &results {
            let rep = &mut reports[r.window_id];
            rep.best_offset = Some(r.best_offset);
            rep.scores = r.scores.clone();
        }
    }
    let stitched = stitch(&baseline, &results)?;
    let report = TuningReport {
        mode: cfg.mode,
        budget: cfg.budget,
        shots: cfg.shots,
        seed: cfg.seed,
        original_cx_depth,
        per_window_slots,
        total_duration: stitched.schedule.total_duration(),
        windows: reports,
    };
    Ok(PipelineOutput {
        baseline,
        stitched,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{self, DensityMatrixSimulator};
    use proptest::prelude::*;

    fn window(id: usize, duration: Dt, span: Dt) -> SlackWindow {
        SlackWindow {
            window_id: id,
            qubit: 0,
            start: 0,
            duration,
            gate_block: vec![0],
            block_start: duration - span,
            block_span: span,
            left_anchor: 0,
            right_anchor: 1,
        }
    }

    #[test]
    fn budget_arithmetic() {
        let ten: Vec<_> = (0..10).map(|i| window(i, 1000, 4)).collect();
        assert_eq!(plan_sweep(&ten, 900, 1024).unwrap().per_window_slots, 90);
        let nineteen: Vec<_> = (0..19).map(|i| window(i, 1000, 4)).collect();
        assert_eq!(plan_sweep(&nineteen, 900, 1024).unwrap().per_window_slots, 47);
        assert!(matches!(plan_sweep(&[], 900, 1), Err(Error::NoTunableWindows)));
        assert!(matches!(plan_sweep(&ten, 19, 1), Err(Error::BudgetTooSmall { .. })));
    }

    #[test]
    fn grid_capped_by_slots() {
        assert_eq!(offset_grid(5, 90), vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(offset_grid(0, 90), vec![0]);
        assert_eq!(offset_grid(100, 3), vec![0, 50, 100]);
    }

    #[test]
    fn ties_go_to_larger_offset() {
        assert_eq!(best_of(&[(0, 0.5), (5, 0.9), (9, 0.9), (12, 0.1)]), Some(9));
    }

    proptest! {
        #[test]
        fn grids_hold_endpoints(max in 0u64..100_000, n in 2usize..500) {
            let g = offset_grid(max, n);
            prop_assert_eq!(g[0], 0);
            prop_assert_eq!(*g.last().unwrap(), max);
            prop_assert!(g.windows(2).all(|p| p[0] < p[1]));
            prop_assert!(g.len() <= n);
        }
    }

    fn pure_t1(n: usize) -> Arc<DeviceModel> {
        let mut d = DeviceModel::ideal_line(n, 160, 1600, 4000);
        for p in &mut d.qubit_params {
            p.t1 = 20e-6;
            p.t2 = 40e-6;
        }
        Arc::new(d)
    }

    fn sweep(c: &Circuit, d: &Arc<DeviceModel>) -> WindowResult {
        let tc = sched::schedule(c, d, Policy::Alap).unwrap();
        let w = sched::find_slack_windows(&tc)
            .into_iter()
            .find(|w| w.is_tunable())
            .unwrap();
        let s = slice::build_slice(&tc, &w).unwrap();
        let grid = offset_grid(w.max_offset(), 11);
        tune_window(
            w.window_id,
            w.offset(),
            &grid,
            |o| slice::build_si_circuit(&s, o).map(Probe::from),
            &ExactBackend,
            1_000_000,
            1,
        )
        .unwrap()
    }

    // Scores with exact probabilities so the argmax is free of sampling noise.
    struct ExactBackend;

    impl Backend for ExactBackend {
        fn run(&self, tc: &TimedCircuit, shots: u64, _seed: u64) -> Result<OutcomeDistribution> {
            let dist = sim::exact_distribution(tc, tc.device())?;
            Ok(OutcomeDistribution {
                counts: dist
                    .into_iter()
                    .map(|(k, p)| (k, (p * shots as f64).round() as u64))
                    .collect(),
                shots,
            })
        }
    }

    #[test]
    fn pure_t1_prefers_asap_for_excited_qubit() {
        let d = pure_t1(2);
        let mut c = Circuit::new(2);
        c.x(0).cx(0, 1).delay(20_000, 0).x(0).cx(0, 1).measure_all();
        assert_eq!(sweep(&c, &d).best_offset, 0);
    }

    #[test]
    fn pure_t1_prefers_alap_for_ground_qubit() {
        let d = pure_t1(2);
        let mut c = Circuit::new(2);
        c.cx(0, 1).delay(20_000, 0).x(0).cx(0, 1).measure_all();
        let r = sweep(&c, &d);
        assert_eq!(r.best_offset, r.baseline_offset);
    }

    #[test]
    fn stitch_identity_cases() {
        let d = pure_t1(2);
        let mut c = Circuit::new(2);
        c.cx(0, 1).delay(2000, 0).x(0).cx(0, 1).measure_all();
        let tc = sched::schedule(&c, &d, Policy::Alap).unwrap();
        assert_eq!(stitch(&tc, &[]).unwrap().schedule, tc);
        let w = &sched::find_slack_windows(&tc)[0];
        let r = WindowResult {
            window_id: 0,
            scores: vec![],
            best_offset: w.offset(),
            baseline_offset: w.offset(),
        };
        assert_eq!(stitch(&tc, std::slice::from_ref(&r)).unwrap().schedule, tc);
        let bad = WindowResult { best_offset: w.max_offset() + 1, ..r.clone() };
        assert!(stitch(&tc, &[bad]).is_err());
        let unknown = WindowResult { window_id: 9, ..r };
        assert!(matches!(stitch(&tc, &[unknown]), Err(Error::UnknownWindow(9))));
    }

    #[test]
    fn pipeline_is_deterministic_and_preserves_duration() {
        let d = pure_t1(3);
        let mut c = Circuit::new(3);
        c.h(0).cx(0, 1).x(0).cx(1, 2).cx(1, 2).h(0).cx(0, 1).measure_all();
        let cfg = TuneConfig { mode: Mode::TsSi, budget: 40, shots: 256, seed: 9 };
        let backend = DensityMatrixSimulator::new();
        let a = run_pipeline(&c, &d, &backend, &cfg).unwrap();
        let b = run_pipeline(&c, &d, &backend, &cfg).unwrap();
        assert_eq!(a.stitched, b.stitched);
        assert_eq!(a.report.to_text(), b.report.to_text());
        assert_eq!(a.stitched.schedule.total_duration(), a.baseline.total_duration());
        assert!(a.report.tuned_count() > 0);
        let strict = run_pipeline(&c, &d, &backend, &TuneConfig { mode: Mode::TsSiC, ..cfg }).unwrap();
        for (s, l) in strict.report.windows.iter().zip(&a.report.windows) {
            assert!(!s.tuned || l.tuned);
        }
        let ideal = |tc: &TimedCircuit| sim::exact_distribution(tc, &d.noiseless()).unwrap();
        assert!(sim::total_variation(&ideal(&a.baseline), &ideal(&a.stitched.schedule)) < 1e-9);
    }
}
