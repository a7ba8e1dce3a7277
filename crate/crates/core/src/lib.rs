//! Slack-window instruction scheduling for quantum circuits.
//!
//! The crate finds the idle windows that a timed circuit leaves on each qubit,
//! tunes where single-qubit gates sit inside those windows using
//! slice+inverse calibration circuits, stitches the per-window optima back
//! into a schedule of unchanged duration, and can fill idle intervals with
//! XYXY dynamical decoupling. A density-matrix simulator with T1/T2 decay,
//! coherent detuning, depolarizing gate error and readout error serves as the
//! backend.
//!
//! ```
//! use std::sync::Arc;
//! use slackstitch::{bench, sched};
//! use slackstitch::ir::DeviceModel;
//!
//! let device = Arc::new(DeviceModel::ideal_line(5, 160, 1600, 4000));
//! let ghz = bench::make_benchmark(bench::BenchmarkKind::GhzEcho, 5, &Default::default()).unwrap();
//! let alap = sched::schedule(&ghz.circuit, &device, sched::Policy::Alap).unwrap();
//! let windows = sched::find_slack_windows(&alap);
//! assert!(!windows.is_empty());
//! ```

pub mod bench;
pub mod cli;
pub mod compare;
pub mod dd;
mod error;
pub mod ir;
pub mod qasm;
pub mod sched;
pub mod sim;
pub mod slice;
pub mod tuner;

pub use error::{Error, Result};

/// Derives a child seed from a master seed and a path of indices.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    let mut state = splitmix(master);
    for &p in path {
        state = splitmix(state ^ splitmix(p.wrapping_add(0x51_7c_c1_b7_27_22_0a_95)));
    }
    state
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
