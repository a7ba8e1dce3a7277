//! Parses an OpenQASM 2 file, prints it back in canonical form and checks
//! that the output parses to the same circuit.
//!
//! cargo run --example qasm_roundtrip -- circuit.qasm

use slackstitch::qasm::{parse, serialize};

const SAMPLE: &str = "OPENQASM 2.0;
include \"qelib1.inc\";
qreg q[3];
creg c[3];
h q[0];
cx q[0],q[1];
rz(pi/8) q[1];
barrier q[0],q[1],q[2];
cx q[1],q[2];
measure q[0] -> c[0];
measure q[1] -> c[1];
measure q[2] -> c[2];
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => SAMPLE.to_string(),
    };
    let circuit = match parse(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(1);
        }
    };
    let out = serialize(&circuit);
    print!("{out}");
    assert_eq!(parse(&out)?, circuit);
    eprintln!("round trip ok: {} instructions on {} qubits", circuit.len(), circuit.num_qubits());
    Ok(())
}
