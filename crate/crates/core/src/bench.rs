//! Benchmark circuit generators.
//!
//! Every generator emits a circuit whose two-qubit gates act only on
//! neighbouring indices, so it runs unchanged on a line-coupled device.
//! Non-adjacent interactions are routed with SWAP chains (three CX each) that
//! are undone right after the gate. Accepted outputs are never hard-coded:
//! they are the most likely bitstrings of the noiseless statevector.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ir::{Circuit, DeviceModel, Dt, GateKind, Qubit};
use crate::sim;
use crate::{Error, Result};

/// Probabilities within this distance of the maximum count as modal.
const MODAL_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BenchmarkKind {
    GhzEcho,
    Qft,
    QaoaRing,
    Adder,
    RepEncoder,
}

impl BenchmarkKind {
    pub const ALL: [BenchmarkKind; 5] = [
        BenchmarkKind::GhzEcho,
        BenchmarkKind::Qft,
        BenchmarkKind::QaoaRing,
        BenchmarkKind::Adder,
        BenchmarkKind::RepEncoder,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BenchmarkKind::GhzEcho => "ghz",
            BenchmarkKind::Qft => "qft",
            BenchmarkKind::QaoaRing => "qaoa",
            BenchmarkKind::Adder => "adder",
            BenchmarkKind::RepEncoder => "rep",
        }
    }

    pub fn default_size(self) -> usize {
        match self {
            BenchmarkKind::GhzEcho => 5,
            BenchmarkKind::Qft => 4,
            BenchmarkKind::QaoaRing => 4,
            BenchmarkKind::Adder => 6,
            BenchmarkKind::RepEncoder => 5,
        }
    }

    pub fn supports(self, n: usize) -> bool {
        match self {
            BenchmarkKind::GhzEcho => (2..=7).contains(&n),
            BenchmarkKind::Qft => (3..=5).contains(&n),
            BenchmarkKind::QaoaRing => n == 4 || n == 6,
            BenchmarkKind::Adder => n == 6,
            BenchmarkKind::RepEncoder => n == 5,
        }
    }
}

impl fmt::Display for BenchmarkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchmarkKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "ghz" | "ghz-echo" | "ghz_echo" => BenchmarkKind::GhzEcho,
            "qft" => BenchmarkKind::Qft,
            "qaoa" | "qaoa-ring" | "qaoa_ring" => BenchmarkKind::QaoaRing,
            "adder" => BenchmarkKind::Adder,
            "rep" | "rep-encoder" | "rep_encoder" | "qec" => BenchmarkKind::RepEncoder,
            other => {
                return Err(Error::Usage(format!(
                    "unknown benchmark '{other}' (expected ghz, qft, qaoa, adder or rep)"
                )))
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Derived,
    File,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchParams {
    /// Basis state the QFT benchmark should output, highest qubit first.
    /// Defaults to alternating `1010...`.
    pub qft_target: Option<String>,
    /// Two-bit addends of the ripple-carry adder.
    pub adder_a: u8,
    pub adder_b: u8,
    /// QAOA cost and mixer angles.
    pub qaoa_gamma: f64,
    pub qaoa_beta: f64,
}

impl Default for BenchParams {
    fn default() -> Self {
        BenchParams {
            qft_target: None,
            adder_a: 3,
            adder_b: 1,
            qaoa_gamma: 23.0 * PI / 64.0,
            qaoa_beta: 9.0 * PI / 64.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkSpec {
    pub name: String,
    pub kind: Option<BenchmarkKind>,
    pub num_qubits: usize,
    pub circuit: Circuit,
    pub accepted: Vec<String>,
    pub provenance: Provenance,
}

impl BenchmarkSpec {
    /// Wraps a user circuit with user-supplied accepted outputs.
    pub fn from_file(name: &str, circuit: Circuit, accepted: Vec<String>) -> Result<Self> {
        if accepted.is_empty() {
            return Err(Error::Usage(format!("{name}: no accepted outputs given")));
        }
        Ok(BenchmarkSpec {
            name: name.to_string(),
            kind: None,
            num_qubits: circuit.num_qubits(),
            circuit,
            accepted,
            provenance: Provenance::File,
        })
    }
}

/// Bitstrings of maximal noiseless probability.
pub fn modal_outputs(c: &Circuit) -> Result<Vec<String>> {
    let dist = sim::ideal_distribution(c)?;
    let max = dist.values().cloned().fold(0.0, f64::max);
    Ok(dist
        .into_iter()
        .filter(|(_, p)| *p >= max - MODAL_TOLERANCE)
        .map(|(k, _)| k)
        .collect())
}

pub fn make_benchmark(kind: BenchmarkKind, n: usize, params: &BenchParams) -> Result<BenchmarkSpec> {
    if !kind.supports(n) {
        return Err(Error::UnsupportedSize {
            kind: kind.name().to_string(),
            n,
        });
    }
    let circuit = match kind {
        BenchmarkKind::GhzEcho => ghz_echo(n),
        BenchmarkKind::Qft => qft_benchmark(n, params)?,
        BenchmarkKind::QaoaRing => qaoa_ring(n, params.qaoa_gamma, params.qaoa_beta),
        BenchmarkKind::Adder => adder(params.adder_a, params.adder_b)?,
        BenchmarkKind::RepEncoder => rep_encoder(),
    };
    let accepted = modal_outputs(&circuit)?;
    Ok(BenchmarkSpec {
        name: format!("{}-{}", kind.name(), n),
        kind: Some(kind),
        num_qubits: n,
        circuit,
        accepted,
        provenance: Provenance::Derived,
    })
}

/// Builds circuits on a line, routing distant two-qubit gates through
/// neighbour swaps that are reverted afterwards.
struct LineBuilder {
    c: Circuit,
}

impl LineBuilder {
    fn new(n: usize) -> Self {
        LineBuilder { c: Circuit::new(n) }
    }

    fn swap(&mut self, a: Qubit, b: Qubit) {
        self.c.cx(a, b).cx(b, a).cx(a, b);
    }

    /// Runs `body(a', b)` with `a` carried next to `b`.
    fn near(&mut self, a: Qubit, b: Qubit, body: impl FnOnce(&mut Self, Qubit)) {
        let mut path = Vec::new();
        let mut pos = a;
        while pos.abs_diff(b) > 1 {
            let next = if pos < b { pos + 1 } else { pos - 1 };
            self.swap(pos, next);
            path.push((pos, next));
            pos = next;
        }
        body(self, pos);
        for (x, y) in path.into_iter().rev() {
            self.swap(x, y);
        }
    }

    fn cx(&mut self, control: Qubit, target: Qubit) {
        self.near(control, target, |s, c| {
            s.c.cx(c, target);
        });
    }

    /// Controlled phase `diag(1, 1, 1, e^{i theta})`, up to global phase.
    fn cp(&mut self, theta: f64, a: Qubit, b: Qubit) {
        self.near(a, b, |s, a| {
            s.c.rz(theta / 2.0, a).cx(a, b).rz(-theta / 2.0, b).cx(a, b).rz(theta / 2.0, b);
        });
    }

    /// `exp(-i gamma Z Z)`.
    fn zz(&mut self, gamma: f64, a: Qubit, b: Qubit) {
        self.near(a, b, |s, a| {
            s.c.cx(a, b).rz(2.0 * gamma, b).cx(a, b);
        });
    }

    fn toffoli(&mut self, c1: Qubit, c2: Qubit, t: Qubit) {
        let (tt, tdg) = (PI / 4.0, -PI / 4.0);
        self.c.h(t);
        self.cx(c2, t);
        self.c.rz(tdg, t);
        self.cx(c1, t);
        self.c.rz(tt, t);
        self.cx(c2, t);
        self.c.rz(tdg, t);
        self.cx(c1, t);
        self.c.rz(tt, c2).rz(tt, t).h(t);
        self.cx(c1, c2);
        self.c.rz(tt, c1).rz(tdg, c2);
        self.cx(c1, c2);
    }
}

/// Entangle with a CX ladder, flip every qubit, undo the ladder: the ideal
/// output is all zeros.
pub fn ghz_echo(n: usize) -> Circuit {
    let mut c = Circuit::new(n);
    c.h(0);
    for q in 0..n - 1 {
        c.cx(q, q + 1);
    }
    for q in 0..n {
        c.x(q);
    }
    for q in (0..n - 1).rev() {
        c.cx(q, q + 1);
    }
    c.h(0);
    c.measure_all();
    c
}

fn routed_qft(n: usize) -> Circuit {
    let mut b = LineBuilder::new(n);
    for j in (0..n).rev() {
        b.c.h(j);
        for k in (0..j).rev() {
            b.cp(PI / (1u64 << (j - k)) as f64, k, j);
        }
    }
    b.c
}

fn parse_target(target: &str, n: usize) -> Result<usize> {
    if target.len() != n || !target.chars().all(|c| c == '0' || c == '1') {
        return Err(Error::Usage(format!(
            "QFT target '{target}' must be {n} binary digits"
        )));
    }
    Ok(usize::from_str_radix(target, 2).expect("binary digits"))
}

/// Prepares the Fourier state that the routed QFT maps onto `target`, then
/// applies the QFT, so the ideal output is the single bitstring `target`.
pub fn qft_benchmark(n: usize, params: &BenchParams) -> Result<Circuit> {
    let target = params
        .qft_target
        .clone()
        .unwrap_or_else(|| "10".repeat(n).chars().take(n).collect());
    let index = parse_target(&target, n)?;
    let qft = routed_qft(n);

    // run the inverse QFT on |target> to recover the per-qubit phases
    let mut probe = Circuit::new(n);
    for q in (0..n).filter(|q| index >> q & 1 == 1) {
        probe.x(q);
    }
    probe.append(&crate::ir::invert_circuit(&qft)?)?;
    let psi = sim::run_statevector(&probe)?;
    let mut c = Circuit::new(n);
    for q in 0..n {
        let ratio = psi[1 << q] / psi[0];
        c.h(q).rz(ratio.arg(), q);
    }
    c.append(&qft)?;
    c.measure_all();
    Ok(c)
}

/// One-level QAOA for max-cut on an `n`-ring.
pub fn qaoa_ring(n: usize, gamma: f64, beta: f64) -> Circuit {
    let mut b = LineBuilder::new(n);
    for q in 0..n {
        b.c.h(q);
    }
    for q in 0..n {
        let (x, y) = (q, (q + 1) % n);
        b.zz(gamma, x.min(y), x.max(y));
    }
    for q in 0..n {
        b.c.h(q).rz(2.0 * beta, q).h(q);
    }
    b.c.measure_all();
    b.c
}

/// Two-bit ripple-carry adder on six qubits laid out `c0 b0 a0 b1 a1 z`.
/// The sum lands in the `b` qubits and the carry in `z`.
pub fn adder(a: u8, b_val: u8) -> Result<Circuit> {
    if a > 3 || b_val > 3 {
        return Err(Error::Usage("adder inputs must be in 0..=3".into()));
    }
    let (c0, b0, a0, b1, a1, z) = (0, 1, 2, 3, 4, 5);
    let mut b = LineBuilder::new(6);
    for (bit, q) in [(a & 1, a0), (a >> 1 & 1, a1), (b_val & 1, b0), (b_val >> 1 & 1, b1)] {
        if bit == 1 {
            b.c.x(q);
        }
    }
    let maj = |b: &mut LineBuilder, c: Qubit, bq: Qubit, aq: Qubit| {
        b.cx(aq, bq);
        b.cx(aq, c);
        b.toffoli(c, bq, aq);
    };
    let uma = |b: &mut LineBuilder, c: Qubit, bq: Qubit, aq: Qubit| {
        b.toffoli(c, bq, aq);
        b.cx(aq, c);
        b.cx(c, bq);
    };
    maj(&mut b, c0, b0, a0);
    maj(&mut b, a0, b1, a1);
    b.cx(a1, z);
    uma(&mut b, a0, b1, a1);
    uma(&mut b, c0, b0, a0);
    b.c.measure_all();
    Ok(b.c)
}

/// Five-qubit repetition-code encoder of |+> whose ideal output is an equal
/// superposition of two codewords.
pub fn rep_encoder() -> Circuit {
    let mut c = Circuit::new(5);
    c.h(0);
    c.cx(0, 1).cx(1, 2).cx(2, 3).cx(3, 4);
    c.cx(0, 1).cx(4, 3).cx(0, 1).cx(2, 1).cx(2, 3).cx(4, 3);
    c.measure_all();
    c
}

/// One member of the echo micro-benchmark: `a` and `b` idle single-qubit
/// slots before and after an X.
pub fn hahn_circuit(a: u64, b: u64, prep_one: bool, xbasis: bool, slot: Dt) -> Circuit {
    let mut c = Circuit::new(1);
    if prep_one {
        c.x(0);
    }
    if xbasis {
        c.h(0);
    }
    if a > 0 {
        c.delay(a * slot, 0);
    }
    c.x(0);
    if b > 0 {
        c.delay(b * slot, 0);
    }
    if xbasis {
        c.h(0);
    }
    c.measure(0);
    c
}

/// The whole family for a window of `window_len` idle slots, indexed by the
/// number of slots before the X. Slot length is the device's X duration.
pub fn hahn_micro(window_len: u64, prep_one: bool, xbasis: bool, d: &DeviceModel) -> Vec<Circuit> {
    let slot = d.gate_duration(GateKind::X);
    (0..=window_len)
        .map(|a| hahn_circuit(a, window_len - a, prep_one, xbasis, slot))
        .collect()
}

/// Outcome of a noiseless echo circuit.
pub fn hahn_ground_truth(prep_one: bool, xbasis: bool) -> &'static str {
    if prep_one == xbasis {
        "1"
    } else {
        "0"
    }
}

pub const HAHN_WINDOW_LEN: u64 = 799;
