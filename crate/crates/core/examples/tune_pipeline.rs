//! Tunes every window of a benchmark on the simulator and prints the tuning
//! report and how far each gate block moved.
//!
//! cargo run --release --example tune_pipeline -- [kind] [n] [ts-si|ts-si-c] [seed]

use std::sync::Arc;

use slackstitch::bench::{make_benchmark, BenchParams, BenchmarkKind};
use slackstitch::ir::DeviceModel;
use slackstitch::sim::{exact_distribution, pos, sample_distribution, DensityMatrixSimulator};
use slackstitch::tuner::{run_pipeline, Mode, TuneConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let kind: BenchmarkKind = args.first().map(String::as_str).unwrap_or("qft").parse()?;
    let n = match args.get(1) {
        Some(s) => s.parse()?,
        None => kind.default_size(),
    };
    let mode = match args.get(2).map(String::as_str) {
        Some("ts-si") => Mode::TsSi,
        _ => Mode::TsSiC,
    };
    let seed = args.get(3).map_or(Ok(1), |s| s.parse())?;

    let spec = make_benchmark(kind, n, &BenchParams::default())?;
    let device = Arc::new(DeviceModel::from_toml_str(include_str!("../devices/reference.toml"))?);
    let cfg = TuneConfig { mode, seed, ..TuneConfig::default() };
    let out = run_pipeline(&spec.circuit, &device, &DensityMatrixSimulator::new(), &cfg)?;
    print!("{}", out.report.to_text());

    for (label, tc) in [("ALAP", &out.baseline), ("stitched", &out.stitched.schedule)] {
        let probs = exact_distribution(tc, &device)?;
        let dist = sample_distribution(&probs, 10_000, seed);
        println!("{label}: duration {} pos {:.4}", tc.total_duration(), pos(&dist, &spec.accepted)?);
    }
    Ok(())
}
