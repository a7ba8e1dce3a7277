//! Runs the nine-policy comparison on a generated benchmark.
//!
//! cargo run --release --example policy_compare -- ghz 5 [device.toml] [seed]

use std::sync::Arc;

use slackstitch::bench::{make_benchmark, BenchParams, BenchmarkKind};
use slackstitch::compare::{compare, CompareConfig};
use slackstitch::ir::DeviceModel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let kind: BenchmarkKind = args.first().map(String::as_str).unwrap_or("ghz").parse()?;
    let n = match args.get(1) {
        Some(s) => s.parse()?,
        None => kind.default_size(),
    };
    let device = match args.get(2) {
        Some(path) => DeviceModel::load(path)?,
        None => DeviceModel::from_toml_str(include_str!("../devices/reference.toml"))?,
    };
    let seed = match args.get(3) {
        Some(s) => s.parse()?,
        None => 7,
    };
    let spec = make_benchmark(kind, n, &BenchParams::default())?;
    let cfg = CompareConfig { seed, ..CompareConfig::default() };
    let report = compare(&spec, &Arc::new(device), &cfg)?;
    print!("{}", report.to_text());
    Ok(())
}
