//! Fills the idle intervals of a GHZ schedule with XYXY and compares success
//! probabilities with and without the length heuristic.
//!
//! cargo run --release --example dynamical_decoupling -- [device.toml] [factor]

use std::sync::Arc;

use slackstitch::bench::{make_benchmark, BenchParams, BenchmarkKind};
use slackstitch::dd::{apply_dd, DdConfig};
use slackstitch::ir::DeviceModel;
use slackstitch::sched::{idle_intervals, schedule, Policy, TimedCircuit};
use slackstitch::sim::exact_distribution;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let device = match args.first() {
        Some(path) => DeviceModel::load(path)?,
        None => DeviceModel::from_toml_str(include_str!("../devices/detuning_dominant.toml"))?,
    };
    let factor: f64 = args.get(1).map_or(Ok(4.0), |s| s.parse())?;
    let device = Arc::new(device);
    let spec = make_benchmark(BenchmarkKind::GhzEcho, 5, &BenchParams::default())?;
    let alap = schedule(&spec.circuit, &device, Policy::Alap)?;
    println!("{} idle intervals in the ALAP schedule", idle_intervals(&alap).len());

    let heuristic = DdConfig { heuristic: true, heuristic_factor: factor, ..DdConfig::default() };
    let p_ok = |tc: &TimedCircuit| -> Result<f64, slackstitch::Error> {
        Ok(exact_distribution(tc, &device)?.get(&spec.accepted[0]).copied().unwrap_or(0.0))
    };
    println!("ALAP         pos {:.4}", p_ok(&alap)?);
    for (label, cfg) in [("DD", DdConfig::default()), ("DD(H)", heuristic)] {
        let (tc, inserted) = apply_dd(&alap, &cfg)?;
        println!("{label:<12} pos {:.4} ({inserted} gates, duration {})", p_ok(&tc)?, tc.total_duration());
    }
    Ok(())
}
