//! Sweeps the X position across an idle window of one qubit and prints the
//! success probability at each split.
//!
//! cargo run --release --example hahn_echo -- [device.toml] [zx] [prep]
//!
//! `zx` picks the measurement basis (default x), `prep` is 0 or 1.

use std::sync::Arc;

use slackstitch::bench::{hahn_circuit, hahn_ground_truth, HAHN_WINDOW_LEN};
use slackstitch::ir::{DeviceModel, GateKind};
use slackstitch::sched::{schedule, Policy};
use slackstitch::sim::exact_distribution;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let device = match args.first() {
        Some(path) => DeviceModel::load(path)?,
        None => DeviceModel::from_toml_str(include_str!("../devices/detuning_only.toml"))?,
    };
    let xbasis = args.get(1).is_none_or(|b| b != "z");
    let prep_one = args.get(2).is_some_and(|p| p == "1");
    let device = Arc::new(device);
    let slot = device.gate_duration(GateKind::X);
    let truth = hahn_ground_truth(prep_one, xbasis);

    println!("# window={HAHN_WINDOW_LEN} slots of {slot} dt, basis={}, prep={}", if xbasis { "x" } else { "z" }, prep_one as u8);
    println!("before\tafter\tp_success");
    let mut best = (0, f64::MIN);
    for k in 0..=40u64 {
        let a = k * HAHN_WINDOW_LEN / 40;
        let c = hahn_circuit(a, HAHN_WINDOW_LEN - a, prep_one, xbasis, slot);
        let tc = schedule(&c, &device, Policy::Asap)?;
        let p = exact_distribution(&tc, &device)?.get(truth).copied().unwrap_or(0.0);
        if p >= best.1 {
            best = (a, p);
        }
        println!("{a}\t{}\t{p:.6}", HAHN_WINDOW_LEN - a);
    }
    println!("# best split: {} slots before the X (p = {:.6})", best.0, best.1);
    Ok(())
}
