//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints exactly one PASS/FAIL line; exits nonzero if any criterion fails.
//!
//! cargo test --release --test acceptance

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use slackstitch::bench::{hahn_circuit, hahn_ground_truth, make_benchmark, BenchParams, BenchmarkKind, HAHN_WINDOW_LEN};
use slackstitch::{cli, derive_seed};
use slackstitch::compare::{compare, noiseless_distributions, policy_schedules, CompareConfig, ComparePolicy};
use slackstitch::ir::{cx_depth, invert_circuit, Circuit, DeviceModel, GateKind};
use slackstitch::sched::{find_slack_windows, schedule, Policy, SlackWindow};
use slackstitch::sim::{exact_distribution, run_counts, run_statevector, total_variation, DensityMatrixSimulator};
use slackstitch::slice::{build_si_circuit, build_slice};
use slackstitch::tuner::{self, offset_grid, plan_sweep, tune_window, Mode, Probe, TuneConfig};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, u64);
type Sweep = (usize, u64, Vec<(u64, f64)>);

fn device(name: &str) -> Arc<DeviceModel> {
    let text = match name {
        "reference" => include_str!("../devices/reference.toml"),
        "detuning_only" => include_str!("../devices/detuning_only.toml"),
        "detuning_dominant" => include_str!("../devices/detuning_dominant.toml"),
        "pure_t1" => include_str!("../devices/pure_t1.toml"),
        "noise_free" => include_str!("../devices/noise_free.toml"),
        _ => unreachable!("unknown device {name}"),
    };
    Arc::new(DeviceModel::from_toml_str(text).expect("bundled device parses"))
}

fn bench(kind: BenchmarkKind, n: usize) -> slackstitch::bench::BenchmarkSpec {
    make_benchmark(kind, n, &BenchParams::default()).expect("benchmark builds")
}

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

fn sigma(p: f64, shots: u64) -> f64 {
    (p * (1.0 - p) / shots as f64).sqrt()
}

fn reversibility() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(1..=3);
        let mut c = Circuit::new(n);
        for _ in 0..rng.random_range(1..=20) {
            let q = rng.random_range(0..n);
            match rng.random_range(0..10) {
                0 => c.x(q),
                1 => c.y(q),
                2 => c.z(q),
                3 => c.h(q),
                4 => c.gate(GateKind::S, q),
                5 => c.gate(GateKind::Sdg, q),
                6 => c.gate(GateKind::SX, q),
                7 => c.gate(GateKind::SXdg, q),
                8 => c.rz(rng.random_range(-7.0..7.0), q),
                _ if n > 1 => {
                    let t = (q + rng.random_range(1..n)) % n;
                    c.cx(q, t)
                }
                _ => c.h(q),
            };
        }
        let inv = invert_circuit(&c).map_err(|e| e.to_string())?;
        c.append(&inv).map_err(|e| e.to_string())?;
        let psi = run_statevector(&c).map_err(|e| e.to_string())?;
        worst = worst.max((psi[0].norm() - 1.0).abs());
    }
    ensure!(worst < 1e-9, "max |amp(0)| deviation {worst:e}");
    Ok(format!("50 circuits, max deviation {worst:.1e}"))
}

fn si_ground_truth() -> Outcome {
    let d = device("reference");
    let quiet = d.noiseless();
    let mut circuits = 0;
    let mut worst = 0.0f64;
    for (kind, n) in [(BenchmarkKind::GhzEcho, 5), (BenchmarkKind::Qft, 4)] {
        let spec = bench(kind, n);
        let alap = schedule(&spec.circuit, &d, Policy::Alap).map_err(|e| e.to_string())?;
        let windows = find_slack_windows(&alap);
        let tunable: Vec<SlackWindow> = windows.iter().filter(|w| w.is_tunable()).cloned().collect();
        let per_window = plan_sweep(&tunable, tuner::DEFAULT_BUDGET, 1).map_err(|e| e.to_string())?.per_window_slots;
        for w in &windows {
            let s = build_slice(&alap, w).map_err(|e| e.to_string())?;
            for o in offset_grid(w.max_offset(), per_window) {
                let si = build_si_circuit(&s, o).map_err(|e| e.to_string())?;
                let p = exact_distribution(si.timed(), &quiet).map_err(|e| e.to_string())?;
                let p0 = p.get(&si.ground_truth).copied().unwrap_or(0.0);
                worst = worst.max((1.0 - p0).abs());
                circuits += 1;
            }
        }
    }
    ensure!(worst <= 1e-9, "max |1 - P(0..0)| = {worst:e}");
    Ok(format!("{circuits} SI circuits, max |1 - P(0..0)| = {worst:.1e}"))
}

fn preservation() -> Outcome {
    let d = device("reference");
    let cfg = CompareConfig { seed: 11, ..CompareConfig::default() };
    let mut checked = 0;
    for kind in BenchmarkKind::ALL {
        let spec = bench(kind, kind.default_size());
        let schedules = policy_schedules(&spec, &d, &cfg).map_err(|e| e.to_string())?;
        let alap = &schedules[0].1;
        for (p, tc, _, _) in &schedules {
            ensure!(
                tc.total_duration() == alap.total_duration(),
                "{} {p}: duration {} != ALAP {}",
                spec.name,
                tc.total_duration(),
                alap.total_duration()
            );
        }
        let dists = noiseless_distributions(&schedules, &d).map_err(|e| e.to_string())?;
        let base = &dists[&ComparePolicy::Alap];
        for (p, dist) in &dists {
            let tv = total_variation(base, dist);
            ensure!(tv < 1e-9, "{} {p}: TV {tv:e} from ALAP", spec.name);
            checked += 1;
        }
    }
    Ok(format!("{} benchmarks, {checked} noiseless distributions equal", BenchmarkKind::ALL.len()))
}

fn depth_criteria() -> Outcome {
    let d = device("reference");
    let spec = bench(BenchmarkKind::Qft, 4);
    let cfg = TuneConfig { mode: Mode::TsSiC, seed: 5, ..TuneConfig::default() };
    let out = tuner::run_pipeline(&spec.circuit, &d, &DensityMatrixSimulator::new(), &cfg).map_err(|e| e.to_string())?;
    let original = cx_depth(&spec.circuit);
    let windows = find_slack_windows(&out.baseline);
    let (mut accepted, mut rejected) = (0, 0);
    for (w, r) in windows.iter().zip(&out.report.windows) {
        if !w.is_tunable() {
            continue;
        }
        let s = build_slice(&out.baseline, w).map_err(|e| e.to_string())?;
        let si = build_si_circuit(&s, w.offset()).map_err(|e| e.to_string())?;
        let passes = si.cx_depth() <= original;
        ensure!(r.tuned == passes, "window {}: tuned={} but SI depth {} vs {original}", w.window_id, r.tuned, si.cx_depth());
        if passes {
            accepted += 1;
        } else {
            rejected += 1;
        }
    }
    ensure!(accepted >= 1 && rejected >= 1, "accepted {accepted}, rejected {rejected}");
    Ok(format!("qft-4 cx_depth {original}: {accepted} windows accepted, {rejected} rejected"))
}

/// Sweeps the 41-point split grid of the echo window and returns
/// (grid index of the best split, best offset, scores).
fn echo_sweep(d: &Arc<DeviceModel>, prep_one: bool, xbasis: bool) -> Result<Sweep, String> {
    let slot = d.gate_duration(GateKind::X);
    let grid: Vec<u64> = (0..=40).map(|k| k * HAHN_WINDOW_LEN / 40 * slot).collect();
    let truth = hahn_ground_truth(prep_one, xbasis);
    let build = |offset: u64| {
        let a = offset / slot;
        let c = hahn_circuit(a, HAHN_WINDOW_LEN - a, prep_one, xbasis, slot);
        Ok(Probe { timed: schedule(&c, d, Policy::Asap)?, ground_truth: truth.to_string() })
    };
    let r = tune_window(0, *grid.last().unwrap(), &grid, build, &DensityMatrixSimulator::new(), 10_000, 99)
        .map_err(|e| e.to_string())?;
    let idx = grid.iter().position(|&o| o == r.best_offset).unwrap();
    Ok((idx, r.best_offset, r.scores))
}

fn echo_optimum() -> Outcome {
    let det = device("detuning_only");
    let (idx, _, scores) = echo_sweep(&det, false, true)?;
    let mid = scores[20].1;
    ensure!(idx.abs_diff(20) <= 2, "x-basis peak at grid index {idx}, expected 20 +- 2");
    ensure!(mid >= 0.99, "mid-window POS {mid}");

    let t1 = device("pure_t1");
    let max = HAHN_WINDOW_LEN * t1.gate_duration(GateKind::X);
    let (_, best_one, _) = echo_sweep(&t1, true, false)?;
    ensure!(best_one == 0, "|1>+X picked offset {best_one}, expected 0");
    let (_, best_zero, _) = echo_sweep(&t1, false, false)?;
    ensure!(best_zero == max, "|0>+X picked offset {best_zero}, expected {max}");
    Ok(format!("x-basis peak at index {idx} (POS mid {mid:.4}); pure T1: |1>+X -> 0, |0>+X -> {max}"))
}

fn tuning_dominance() -> Outcome {
    let d = device("reference");
    let mut notes = Vec::new();
    for (kind, n) in [(BenchmarkKind::GhzEcho, 5), (BenchmarkKind::Qft, 4)] {
        let spec = bench(kind, n);
        let cfg = CompareConfig { seed: 7, eval_shots: 10_000, ..CompareConfig::default() };
        let r = compare(&spec, &d, &cfg).map_err(|e| e.to_string())?;
        let alap = r.row(ComparePolicy::Alap).pos;
        let c = r.row(ComparePolicy::TsSiC).pos;
        let si = r.row(ComparePolicy::TsSi).pos;
        let s_alap = 2.0 * sigma(alap, cfg.eval_shots);
        let s_c = 2.0 * sigma(c, cfg.eval_shots);
        ensure!(c >= alap - s_alap, "{}: TS-SI+C {c:.4} < ALAP {alap:.4} - {s_alap:.4}", spec.name);
        ensure!(si >= c - s_c, "{}: TS-SI {si:.4} < TS-SI+C {c:.4} - {s_c:.4}", spec.name);
        notes.push(format!("{} ALAP {alap:.4} TS-SI+C {c:.4} TS-SI {si:.4}", spec.name));
    }
    Ok(notes.join("; "))
}

fn dd_synergy() -> Outcome {
    let d = device("detuning_dominant");
    let spec = bench(BenchmarkKind::GhzEcho, 5);
    let cfg = CompareConfig { seed: 7, eval_shots: 10_000, ..CompareConfig::default() };
    let r = compare(&spec, &d, &cfg).map_err(|e| e.to_string())?;
    let both = r.row(ComparePolicy::TsDdH).pos;
    let c = r.row(ComparePolicy::TsSiC).pos;
    let dd = r.row(ComparePolicy::DdH).pos;
    let best = c.max(dd);
    let tol = 2.0 * sigma(best, cfg.eval_shots);
    ensure!(both >= best - tol, "TS+DD(H) {both:.4} < max(TS-SI+C {c:.4}, DD(H) {dd:.4}) - {tol:.4}");
    Ok(format!("TS+DD(H) {both:.4}, TS-SI+C {c:.4}, DD(H) {dd:.4}"))
}

fn budget_arithmetic() -> Outcome {
    let window = |id: usize, max: u64| SlackWindow {
        window_id: id,
        qubit: 0,
        start: 0,
        duration: max + 4,
        gate_block: vec![0],
        block_start: max,
        block_span: 4,
        left_anchor: 0,
        right_anchor: 1,
    };
    let ten: Vec<_> = (0..10).map(|i| window(i, 10_000)).collect();
    let n10 = plan_sweep(&ten, 900, 1024).map_err(|e| e.to_string())?.per_window_slots;
    ensure!(n10 == 90, "10 windows -> {n10}");
    let nineteen: Vec<_> = (0..19).map(|i| window(i, 10_000)).collect();
    let n19 = plan_sweep(&nineteen, 900, 1024).map_err(|e| e.to_string())?.per_window_slots;
    ensure!(n19 == 47, "19 windows -> {n19}");
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..500 {
        let windows: Vec<_> = (0..rng.random_range(1..30)).map(|i| window(i, rng.random_range(0..50_000))).collect();
        let plan = plan_sweep(&windows, 900, 1).map_err(|e| e.to_string())?;
        for (w, (id, grid)) in windows.iter().zip(&plan.grids) {
            ensure!(*id == w.window_id, "grid order");
            ensure!(grid.first() == Some(&0) && grid.last() == Some(&w.max_offset()), "window {id}: endpoints missing");
            ensure!(grid.windows(2).all(|p| p[0] < p[1]), "window {id}: grid not strictly ascending");
        }
    }
    Ok("900/10 = 90, 900/19 = 47, endpoints present in 500 random plans".into())
}

fn simulator_physics() -> Outcome {
    let d = device("pure_t1");
    let shots = 100_000;
    let q = &d.qubit_params[0];
    let (t1, t2) = (q.t1, q.t2);
    let mut worst = 0.0f64;
    for (i, frac) in [0.1, 0.3, 0.6, 1.0, 1.5].into_iter().enumerate() {
        let wait = (frac * t1 / d.dt).round() as u64;
        let secs = wait as f64 * d.dt;

        let mut decay = Circuit::new(1);
        decay.x(0).delay(wait, 0).measure(0);
        let tc = schedule(&decay, &d, Policy::Asap).map_err(|e| e.to_string())?;
        let exact = exact_distribution(&tc, &d).map_err(|e| e.to_string())?;
        ensure!((exact["1"] - (-secs / t1).exp()).abs() < 1e-9, "exact P(1) at {frac} T1: {}", exact["1"]);
        let p1 = run_counts(&tc, &d, shots, derive_seed(9, &[0, i as u64])).map_err(|e| e.to_string())?.count("1") as f64 / shots as f64;
        let want = (-secs / t1).exp();
        let z = (p1 - want).abs() / sigma(want, shots);
        ensure!(z <= 3.0, "P(1) at {frac} T1: {p1:.5} vs {want:.5} ({z:.2} sigma)");
        worst = worst.max(z);

        let mut ramsey = Circuit::new(1);
        ramsey.h(0).delay(wait, 0).h(0).measure(0);
        let tc = schedule(&ramsey, &d, Policy::Asap).map_err(|e| e.to_string())?;
        let exact = exact_distribution(&tc, &d).map_err(|e| e.to_string())?;
        ensure!((2.0 * exact["0"] - 1.0 - (-secs / t2).exp()).abs() < 1e-9, "exact coherence at {frac} T1");
        let p0 = run_counts(&tc, &d, shots, derive_seed(9, &[1, i as u64])).map_err(|e| e.to_string())?.count("0") as f64 / shots as f64;
        let coherence = 2.0 * p0 - 1.0;
        let want = (-secs / t2).exp();
        let z = (p0 - (1.0 + want) / 2.0).abs() / sigma((1.0 + want) / 2.0, shots);
        ensure!(z <= 3.0, "coherence at {frac} T1: {coherence:.5} vs {want:.5} ({z:.2} sigma)");
        worst = worst.max(z);
    }
    Ok(format!("10 points exact to 1e-9; sampled at 1e5 shots, worst deviation {worst:.2} sigma"))
}

fn determinism() -> Outcome {
    let run = || -> Result<Vec<u8>, String> {
        let mut out = Vec::new();
        cli::run(["slackstitch", "compare", "--bench", "ghz", "--n", "5", "--seed", "7"], &mut out).map_err(|e| e.to_string())?;
        Ok(out)
    };
    let a = run()?;
    let b = run()?;
    ensure!(a == b, "reports differ");
    ensure!(a.len() > 100, "report is suspiciously short");
    Ok(format!("two compare reports of {} bytes are identical", a.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("reversibility oracle", reversibility, 5),
        ("SI ground truth", si_ground_truth, 30),
        ("duration and semantics preservation", preservation, 60),
        ("depth criteria", depth_criteria, 600),
        ("echo optimum", echo_optimum, 120),
        ("tuning dominance", tuning_dominance, 600),
        ("DD synergy direction", dd_synergy, 600),
        ("budget arithmetic", budget_arithmetic, 600),
        ("simulator physics", simulator_physics, 120),
        ("determinism", determinism, 600),
    ];
    let mut failed = 0;
    for (i, (name, f, limit)) in criteria.into_iter().enumerate() {
        let t0 = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let took = t0.elapsed();
        let result = match result {
            Ok(msg) if took > Duration::from_secs(limit) => Err(format!("{msg}; took {took:.1?}, limit {limit} s")),
            r => r,
        };
        match result {
            Ok(msg) => println!("criterion {:>2} {name}: PASS ({msg}) [{took:.2?}]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({msg}) [{took:.2?}]", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of 10 criteria failed");
        std::process::exit(1);
    }
    println!("all 10 criteria passed");
}
