//! Builds the slice+inverse circuit of every slack window of a benchmark and
//! checks that the noiseless output is all zeros at the sweep endpoints.
//!
//! cargo run --release --example slice_inverse -- [ghz|qft|qaoa|adder|rep] [n]

use std::sync::Arc;

use slackstitch::bench::{make_benchmark, BenchParams, BenchmarkKind};
use slackstitch::ir::{cx_depth, DeviceModel};
use slackstitch::sched::{find_slack_windows, schedule, Policy};
use slackstitch::sim::exact_distribution;
use slackstitch::slice::{build_si_circuit, build_slice, passes_depth_criteria};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let kind: BenchmarkKind = args.first().map(String::as_str).unwrap_or("ghz").parse()?;
    let n = match args.get(1) {
        Some(s) => s.parse()?,
        None => kind.default_size(),
    };
    let spec = make_benchmark(kind, n, &BenchParams::default())?;
    let device = Arc::new(DeviceModel::from_toml_str(include_str!("../devices/reference.toml"))?);
    let quiet = device.noiseless();
    let alap = schedule(&spec.circuit, &device, Policy::Alap)?;

    println!("# {} cx_depth={}", spec.name, cx_depth(&spec.circuit));
    println!("window\tqubit\tslice_ops\tsi_cx\tcriteria\tp0(min)\tp0(max)");
    for w in find_slack_windows(&alap) {
        let s = build_slice(&alap, &w)?;
        let lo = build_si_circuit(&s, 0)?;
        let hi = build_si_circuit(&s, w.max_offset())?;
        let p0 = |si: &slackstitch::slice::SICircuit| -> Result<f64, slackstitch::Error> {
            Ok(exact_distribution(si.timed(), &quiet)?.get(&si.ground_truth).copied().unwrap_or(0.0))
        };
        println!(
            "{}\t{}\t{}\t{}\t{}\t{:.9}\t{:.9}",
            w.window_id,
            w.qubit,
            s.timed.timed().len(),
            lo.cx_depth(),
            if passes_depth_criteria(&lo, &spec.circuit) { "pass" } else { "fail" },
            p0(&lo)?,
            p0(&hi)?
        );
    }
    Ok(())
}
