//! Schedules a circuit under each policy and lists its slack windows.
//!
//! cargo run --example slack_windows -- [circuit.qasm]

use std::sync::Arc;

use slackstitch::ir::{Circuit, DeviceModel};
use slackstitch::qasm;
use slackstitch::sched::{find_slack_windows, schedule, Policy};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let circuit = match std::env::args().nth(1) {
        Some(path) => qasm::parse(&std::fs::read_to_string(path)?)?,
        None => {
            let mut c = Circuit::new(3);
            c.cx(0, 1).cx(1, 2).x(0).cx(0, 1).measure_all();
            c
        }
    };
    let device = Arc::new(DeviceModel::ideal_line(circuit.num_qubits().max(2), 160, 1600, 4480));

    for policy in [Policy::Asap, Policy::Alap, Policy::Middle] {
        let tc = schedule(&circuit, &device, policy)?;
        println!("== {policy}");
        print!("{}", tc.report());
        for w in find_slack_windows(&tc) {
            println!(
                "window {} on q{}: [{}, {}) block of {} gate(s) at offset {} of {}",
                w.window_id,
                w.qubit,
                w.start,
                w.end(),
                w.gate_block.len(),
                w.offset(),
                w.max_offset()
            );
        }
    }
    Ok(())
}
