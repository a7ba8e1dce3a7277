//! Gate-level circuit representation and the device model.
//!
//! A [`Circuit`] is the logical program: an ordered list of [`Instruction`]s
//! over indexed qubits. A [`DeviceModel`] supplies everything the scheduler
//! and the simulator need to know about hardware: the `dt` grid, per-gate
//! durations, coupling edges and per-qubit noise parameters.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Qubit = usize;

/// Durations and start times are integer multiples of the device `dt`.
pub type Dt = u64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IrError {
    #[error("measurement is not reversible")]
    MeasureNotInvertible,
    #[error("barrier has no inverse")]
    BarrierNotInvertible,
    #[error("{gate} expects {expected} qubit(s), got {got}")]
    Arity {
        gate: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("repeated qubit {0} in one instruction")]
    RepeatedQubit(Qubit),
    #[error("qubit {qubit} out of range for a {num_qubits}-qubit circuit")]
    QubitOutOfRange { qubit: Qubit, num_qubits: usize },
    #[error("rotation angle must be finite")]
    NonFiniteAngle,
    #[error("{0} after a measurement; measurements must form a trailing suffix")]
    AfterMeasure(&'static str),
}

#[derive(Debug, Error)]
pub enum DeviceError {
    #[error("reading device file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parsing device file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("serializing device: {0}")]
    Serialize(#[from] toml::ser::Error),
    #[error("invalid device model: {}", .0.join("; "))]
    Invalid(Vec<String>),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum GateKind {
    X,
    Y,
    Z,
    H,
    S,
    Sdg,
    SX,
    SXdg,
    RZ(f64),
    CX,
    Measure,
    Delay(Dt),
    Barrier,
}

impl GateKind {
    /// Lowercase OpenQASM name; also the key used for per-gate duration overrides.
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::H => "h",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::SX => "sx",
            GateKind::SXdg => "sxdg",
            GateKind::RZ(_) => "rz",
            GateKind::CX => "cx",
            GateKind::Measure => "measure",
            GateKind::Delay(_) => "delay",
            GateKind::Barrier => "barrier",
        }
    }

    pub fn inverse(&self) -> Result<GateKind, IrError> {
        Ok(match *self {
            GateKind::S => GateKind::Sdg,
            GateKind::Sdg => GateKind::S,
            GateKind::SX => GateKind::SXdg,
            GateKind::SXdg => GateKind::SX,
            GateKind::RZ(theta) => GateKind::RZ(-theta),
            GateKind::Measure => return Err(IrError::MeasureNotInvertible),
            GateKind::Barrier => return Err(IrError::BarrierNotInvertible),
            k @ (GateKind::X
            | GateKind::Y
            | GateKind::Z
            | GateKind::H
            | GateKind::CX
            | GateKind::Delay(_)) => k,
        })
    }

    /// A unitary acting on one qubit. These are the gates that slack tuning moves.
    pub fn is_single_qubit_gate(&self) -> bool {
        matches!(
            self,
            GateKind::X
                | GateKind::Y
                | GateKind::Z
                | GateKind::H
                | GateKind::S
                | GateKind::Sdg
                | GateKind::SX
                | GateKind::SXdg
                | GateKind::RZ(_)
        )
    }

    /// Operations that bound slack windows.
    pub fn is_anchor(&self) -> bool {
        matches!(self, GateKind::CX | GateKind::Measure | GateKind::Barrier)
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateKind::RZ(theta) => write!(f, "rz({theta})"),
            GateKind::Delay(n) => write!(f, "delay[{n}]"),
            k => f.write_str(k.name()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instruction {
    pub kind: GateKind,
    pub qubits: Vec<Qubit>,
}

impl Instruction {
    /// Checks arity and distinctness. Barriers accept any nonzero number of qubits.
    pub fn new(kind: GateKind, qubits: Vec<Qubit>) -> Result<Self, IrError> {
        let expected = match kind {
            GateKind::CX => Some(2),
            GateKind::Barrier => None,
            _ => Some(1),
        };
        match expected {
            Some(n) if qubits.len() != n => {
                return Err(IrError::Arity {
                    gate: kind.name(),
                    expected: n,
                    got: qubits.len(),
                })
            }
            None if qubits.is_empty() => {
                return Err(IrError::Arity {
                    gate: kind.name(),
                    expected: 1,
                    got: 0,
                })
            }
            _ => {}
        }
        let mut seen = BTreeSet::new();
        for &q in &qubits {
            if !seen.insert(q) {
                return Err(IrError::RepeatedQubit(q));
            }
        }
        if let GateKind::RZ(theta) = kind {
            if !theta.is_finite() {
                return Err(IrError::NonFiniteAngle);
            }
        }
        Ok(Instruction { kind, qubits })
    }

    pub fn single(kind: GateKind, q: Qubit) -> Self {
        Self::new(kind, vec![q]).expect("single-qubit instruction")
    }

    pub fn cx(control: Qubit, target: Qubit) -> Self {
        Self::new(GateKind::CX, vec![control, target]).expect("cx needs distinct qubits")
    }

    pub fn inverse(&self) -> Result<Instruction, IrError> {
        Ok(Instruction {
            kind: self.kind.inverse()?,
            qubits: self.qubits.clone(),
        })
    }

    pub fn shares_qubit(&self, other: &Instruction) -> bool {
        self.qubits.iter().any(|q| other.qubits.contains(q))
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        for (i, q) in self.qubits.iter().enumerate() {
            write!(f, "{}q{}", if i == 0 { " " } else { "," }, q)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    num_qubits: usize,
    instructions: Vec<Instruction>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Circuit {
            num_qubits,
            instructions: Vec::new(),
        }
    }

    pub fn from_instructions(
        num_qubits: usize,
        instructions: impl IntoIterator<Item = Instruction>,
    ) -> Result<Self, IrError> {
        let mut c = Circuit::new(num_qubits);
        for instr in instructions {
            c.push(instr)?;
        }
        Ok(c)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    pub fn has_measure(&self) -> bool {
        self.instructions
            .iter()
            .any(|i| i.kind == GateKind::Measure)
    }

    pub fn push(&mut self, instr: Instruction) -> Result<&mut Self, IrError> {
        for &q in &instr.qubits {
            if q >= self.num_qubits {
                return Err(IrError::QubitOutOfRange {
                    qubit: q,
                    num_qubits: self.num_qubits,
                });
            }
        }
        if instr.kind != GateKind::Measure && self.has_trailing_measure() {
            return Err(IrError::AfterMeasure(instr.kind.name()));
        }
        self.instructions.push(instr);
        Ok(self)
    }

    fn has_trailing_measure(&self) -> bool {
        self.instructions
            .last()
            .is_some_and(|i| i.kind == GateKind::Measure)
    }

    // Builder helpers. These panic on invalid qubits; use `push` for fallible construction.

    pub fn gate(&mut self, kind: GateKind, q: Qubit) -> &mut Self {
        self.push(Instruction::single(kind, q))
            .unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn x(&mut self, q: Qubit) -> &mut Self {
        self.gate(GateKind::X, q)
    }

    pub fn y(&mut self, q: Qubit) -> &mut Self {
        self.gate(GateKind::Y, q)
    }

    pub fn z(&mut self, q: Qubit) -> &mut Self {
        self.gate(GateKind::Z, q)
    }

    pub fn h(&mut self, q: Qubit) -> &mut Self {
        self.gate(GateKind::H, q)
    }

    pub fn rz(&mut self, theta: f64, q: Qubit) -> &mut Self {
        self.gate(GateKind::RZ(theta), q)
    }

    pub fn delay(&mut self, duration: Dt, q: Qubit) -> &mut Self {
        self.gate(GateKind::Delay(duration), q)
    }

    pub fn cx(&mut self, control: Qubit, target: Qubit) -> &mut Self {
        self.push(Instruction::cx(control, target))
            .unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn barrier(&mut self, qubits: &[Qubit]) -> &mut Self {
        let instr = Instruction::new(GateKind::Barrier, qubits.to_vec())
            .unwrap_or_else(|e| panic!("{e}"));
        self.push(instr).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn measure(&mut self, q: Qubit) -> &mut Self {
        self.gate(GateKind::Measure, q)
    }

    pub fn measure_all(&mut self) -> &mut Self {
        for q in 0..self.num_qubits {
            self.measure(q);
        }
        self
    }

    /// Appends every instruction of `other`; both circuits must have the same width.
    pub fn append(&mut self, other: &Circuit) -> Result<&mut Self, IrError> {
        for instr in &other.instructions {
            self.push(instr.clone())?;
        }
        Ok(self)
    }

    /// The circuit with every measurement removed.
    pub fn without_measurements(&self) -> Circuit {
        Circuit {
            num_qubits: self.num_qubits,
            instructions: self
                .instructions
                .iter()
                .filter(|i| i.kind != GateKind::Measure)
                .cloned()
                .collect(),
        }
    }

    /// Qubits measured by the circuit, ascending.
    pub fn measured_qubits(&self) -> Vec<Qubit> {
        let set: BTreeSet<Qubit> = self
            .instructions
            .iter()
            .filter(|i| i.kind == GateKind::Measure)
            .map(|i| i.qubits[0])
            .collect();
        set.into_iter().collect()
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "circuit over {} qubit(s)", self.num_qubits)?;
        for instr in &self.instructions {
            writeln!(f, "  {instr}")?;
        }
        Ok(())
    }
}

/// Reverses `c` and replaces every instruction by its inverse.
pub fn invert_circuit(c: &Circuit) -> Result<Circuit, IrError> {
    let instructions = c
        .instructions
        .iter()
        .rev()
        .map(Instruction::inverse)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Circuit {
        num_qubits: c.num_qubits,
        instructions,
    })
}

/// Number of CX gates on the longest path through the dependency DAG.
pub fn cx_depth(c: &Circuit) -> usize {
    cx_depth_of(c.num_qubits, c.instructions.iter())
}

pub(crate) fn cx_depth_of<'a>(
    num_qubits: usize,
    instructions: impl Iterator<Item = &'a Instruction>,
) -> usize {
    let mut depth = vec![0usize; num_qubits];
    for instr in instructions {
        let weight = usize::from(instr.kind == GateKind::CX);
        let level = instr.qubits.iter().map(|&q| depth[q]).max().unwrap_or(0) + weight;
        for &q in &instr.qubits {
            depth[q] = level;
        }
    }
    depth.into_iter().max().unwrap_or(0)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    TooManyQubits { circuit: usize, device: usize },
    QubitOutOfRange { index: usize, qubit: Qubit },
    UncoupledPair { index: usize, a: Qubit, b: Qubit },
    MissingDuration { index: usize, gate: &'static str },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TooManyQubits { circuit, device } => write!(
                f,
                "circuit uses {circuit} qubits but the device has {device}"
            ),
            Violation::QubitOutOfRange { index, qubit } => {
                write!(f, "instruction {index}: qubit index out of range ({qubit})")
            }
            Violation::UncoupledPair { index, a, b } => {
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                write!(f, "instruction {index}: uncoupled pair ({lo},{hi})")
            }
            Violation::MissingDuration { index, gate } => {
                write!(f, "instruction {index}: no duration for {gate}")
            }
        }
    }
}

/// Checks `c` against `d` and returns every violation found.
pub fn validate(c: &Circuit, d: &DeviceModel) -> Result<(), Vec<Violation>> {
    let mut violations = Vec::new();
    if c.num_qubits > d.num_qubits {
        violations.push(Violation::TooManyQubits {
            circuit: c.num_qubits,
            device: d.num_qubits,
        });
    }
    for (index, instr) in c.instructions.iter().enumerate() {
        let mut in_range = true;
        for &qubit in &instr.qubits {
            if qubit >= d.num_qubits {
                violations.push(Violation::QubitOutOfRange { index, qubit });
                in_range = false;
            }
        }
        if instr.kind == GateKind::CX && in_range {
            let (a, b) = (instr.qubits[0], instr.qubits[1]);
            if !d.coupled(a, b) {
                violations.push(Violation::UncoupledPair { index, a, b });
            }
        }
        if in_range && d.duration(instr).is_none() {
            violations.push(Violation::MissingDuration {
                index,
                gate: instr.kind.name(),
            });
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitParams {
    /// Seconds. May be `inf` for a qubit without energy relaxation.
    pub t1: f64,
    /// Seconds, with `0 < t2 <= 2 * t1`.
    pub t2: f64,
    /// Residual qubit frequency offset in Hz; accumulates as a coherent Z rotation while idle.
    #[serde(default)]
    pub detuning_hz: f64,
    /// Probability of reading 1 when the qubit is in 0.
    #[serde(default)]
    pub readout_p01: f64,
    /// Probability of reading 0 when the qubit is in 1.
    #[serde(default)]
    pub readout_p10: f64,
}

impl QubitParams {
    pub fn noiseless() -> Self {
        QubitParams {
            t1: f64::INFINITY,
            t2: f64::INFINITY,
            detuning_hz: 0.0,
            readout_p01: 0.0,
            readout_p10: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeDuration {
    pub qubits: [Qubit; 2],
    pub duration: Dt,
}

/// Gate durations in `dt`, keyed by gate class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateDurations {
    /// Shared by every single-qubit gate without an override.
    pub single_qubit: Dt,
    /// Per-gate overrides keyed by lowercase gate name (`rz = 0` models virtual Z).
    #[serde(default)]
    pub overrides: BTreeMap<String, Dt>,
    /// Default CX duration.
    #[serde(default)]
    pub cx: Option<Dt>,
    /// Per-edge CX durations; take precedence over `cx`.
    #[serde(default)]
    pub cx_edges: Vec<EdgeDuration>,
    #[serde(default)]
    pub measure: Option<Dt>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviceModel {
    /// Seconds per time unit.
    pub dt: f64,
    pub num_qubits: usize,
    pub qubit_params: Vec<QubitParams>,
    pub gate_durations: GateDurations,
    pub depol_1q: f64,
    pub depol_2q: f64,
    /// Undirected coupling edges.
    pub coupling: Vec<[Qubit; 2]>,
}

impl DeviceModel {
    /// Noise-free device on a line of `n` qubits.
    pub fn ideal_line(n: usize, single_qubit: Dt, cx: Dt, measure: Dt) -> Self {
        DeviceModel {
            dt: 2.2222e-10,
            num_qubits: n,
            qubit_params: vec![QubitParams::noiseless(); n],
            gate_durations: GateDurations {
                single_qubit,
                overrides: BTreeMap::new(),
                cx: Some(cx),
                cx_edges: Vec::new(),
                measure: Some(measure),
            },
            depol_1q: 0.0,
            depol_2q: 0.0,
            coupling: (1..n).map(|q| [q - 1, q]).collect(),
        }
    }

    /// Same device with every noise source switched off; timing is unchanged.
    pub fn noiseless(&self) -> Self {
        DeviceModel {
            qubit_params: vec![QubitParams::noiseless(); self.num_qubits],
            depol_1q: 0.0,
            depol_2q: 0.0,
            ..self.clone()
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, DeviceError> {
        let device: DeviceModel = toml::from_str(text)?;
        device.check()?;
        Ok(device)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DeviceError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| DeviceError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String, DeviceError> {
        Ok(toml::to_string(self)?)
    }

    /// Checks the physical and structural invariants of the model.
    pub fn check(&self) -> Result<(), DeviceError> {
        let mut problems = Vec::new();
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            problems.push(format!("dt must be positive and finite, got {}", self.dt));
        }
        if self.qubit_params.len() != self.num_qubits {
            problems.push(format!(
                "{} qubit_params entries for {} qubits",
                self.qubit_params.len(),
                self.num_qubits
            ));
        }
        let prob = |name: String, p: f64, problems: &mut Vec<String>| {
            if !(0.0..=1.0).contains(&p) {
                problems.push(format!("{name} = {p} is not a probability"));
            }
        };
        for (q, p) in self.qubit_params.iter().enumerate() {
            if p.t1.is_nan() || p.t1 <= 0.0 {
                problems.push(format!("qubit {q}: t1 must be positive"));
            }
            if !(p.t2 > 0.0 && p.t2 <= 2.0 * p.t1) {
                problems.push(format!("qubit {q}: t2 must satisfy 0 < t2 <= 2*t1"));
            }
            if !p.detuning_hz.is_finite() {
                problems.push(format!("qubit {q}: detuning must be finite"));
            }
            prob(format!("qubit {q} readout_p01"), p.readout_p01, &mut problems);
            prob(format!("qubit {q} readout_p10"), p.readout_p10, &mut problems);
        }
        prob("depol_1q".into(), self.depol_1q, &mut problems);
        prob("depol_2q".into(), self.depol_2q, &mut problems);
        let g = &self.gate_durations;
        if g.single_qubit == 0 {
            problems.push("single_qubit duration must be at least 1 dt".into());
        }
        for (name, &d) in &g.overrides {
            if d == 0 && name != "rz" {
                problems.push(format!("{name} duration must be at least 1 dt"));
            }
        }
        if g.cx == Some(0) || g.cx_edges.iter().any(|e| e.duration == 0) {
            problems.push("cx duration must be at least 1 dt".into());
        }
        if g.measure == Some(0) {
            problems.push("measure duration must be at least 1 dt".into());
        }
        for edge in self.coupling.iter().chain(g.cx_edges.iter().map(|e| &e.qubits)) {
            if edge[0] == edge[1] || edge[0] >= self.num_qubits || edge[1] >= self.num_qubits {
                problems.push(format!("bad edge ({},{})", edge[0], edge[1]));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(DeviceError::Invalid(problems))
        }
    }

    pub fn coupled(&self, a: Qubit, b: Qubit) -> bool {
        self.coupling
            .iter()
            .any(|e| (e[0] == a && e[1] == b) || (e[0] == b && e[1] == a))
    }

    /// Duration in `dt` of `instr` on this device, if the device defines one.
    pub fn duration(&self, instr: &Instruction) -> Option<Dt> {
        let g = &self.gate_durations;
        match instr.kind {
            GateKind::Delay(n) => Some(n),
            GateKind::Barrier => Some(0),
            GateKind::Measure => g.measure,
            GateKind::CX => {
                let (a, b) = (instr.qubits[0], instr.qubits[1]);
                g.cx_edges
                    .iter()
                    .find(|e| {
                        (e.qubits[0] == a && e.qubits[1] == b)
                            || (e.qubits[0] == b && e.qubits[1] == a)
                    })
                    .map(|e| e.duration)
                    .or(g.cx)
            }
            k => Some(
                g.overrides
                    .get(k.name())
                    .copied()
                    .unwrap_or(g.single_qubit),
            ),
        }
    }

    /// Duration of a single-qubit gate of `kind`.
    pub fn gate_duration(&self, kind: GateKind) -> Dt {
        self.gate_durations
            .overrides
            .get(kind.name())
            .copied()
            .unwrap_or(self.gate_durations.single_qubit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn inverse_of_self_inverse_pair() {
        let mut c = Circuit::new(2);
        c.h(0).cx(0, 1);
        let inv = invert_circuit(&c).unwrap();
        assert_eq!(
            inv.instructions(),
            &[Instruction::cx(0, 1), Instruction::single(GateKind::H, 0)]
        );
    }

    #[test]
    fn inverse_negates_rotation() {
        let mut c = Circuit::new(1);
        c.rz(PI / 4.0, 0);
        let inv = invert_circuit(&c).unwrap();
        assert_eq!(inv.instructions()[0].kind, GateKind::RZ(-PI / 4.0));
    }

    #[test]
    fn inverse_pairs() {
        assert_eq!(GateKind::S.inverse().unwrap(), GateKind::Sdg);
        assert_eq!(GateKind::SXdg.inverse().unwrap(), GateKind::SX);
        assert_eq!(GateKind::Delay(7).inverse().unwrap(), GateKind::Delay(7));
    }

    #[test]
    fn measure_is_rejected() {
        let mut c = Circuit::new(1);
        c.x(0).measure(0);
        assert_eq!(invert_circuit(&c), Err(IrError::MeasureNotInvertible));
    }

    #[test]
    fn gates_after_measure_are_rejected() {
        let mut c = Circuit::new(2);
        c.measure(0);
        assert!(matches!(
            c.push(Instruction::single(GateKind::X, 1)),
            Err(IrError::AfterMeasure("x"))
        ));
        assert!(c.push(Instruction::single(GateKind::Measure, 1)).is_ok());
    }

    #[test]
    fn instruction_checks() {
        assert!(matches!(
            Instruction::new(GateKind::CX, vec![1]),
            Err(IrError::Arity { .. })
        ));
        assert_eq!(
            Instruction::new(GateKind::CX, vec![1, 1]),
            Err(IrError::RepeatedQubit(1))
        );
        assert_eq!(
            Instruction::new(GateKind::RZ(f64::NAN), vec![0]),
            Err(IrError::NonFiniteAngle)
        );
        assert!(Instruction::new(GateKind::Barrier, vec![0, 1, 2]).is_ok());
    }

    #[test]
    fn cx_depth_examples() {
        let mut c = Circuit::new(4);
        c.cx(0, 1).cx(2, 3);
        assert_eq!(cx_depth(&c), 1);

        // DAG: a=CX01 -> b=CX12 -> d=CX01 and b -> X q1 -> d; longest path a,b,d = 3.
        let mut c = Circuit::new(3);
        c.cx(0, 1).cx(1, 2).x(1).cx(0, 1);
        assert_eq!(cx_depth(&c), 3);

        assert_eq!(cx_depth(&Circuit::new(3)), 0);
    }

    #[test]
    fn validate_reports_uncoupled_pair() {
        let d = DeviceModel::ideal_line(3, 4, 20, 40);
        let mut c = Circuit::new(3);
        c.cx(0, 2);
        let v = validate(&c, &d).unwrap_err();
        assert_eq!(v.len(), 1);
        assert!(v[0].to_string().contains("uncoupled pair (0,2)"));
    }

    #[test]
    fn validate_empty_and_out_of_range() {
        let d = DeviceModel::ideal_line(5, 4, 20, 40);
        assert!(validate(&Circuit::new(5), &d).is_ok());

        let mut c = Circuit::new(6);
        c.x(5);
        let v = validate(&c, &d).unwrap_err();
        assert!(v
            .iter()
            .any(|v| v.to_string().contains("qubit index out of range")));
    }

    #[test]
    fn validate_missing_duration() {
        let mut d = DeviceModel::ideal_line(2, 4, 20, 40);
        d.gate_durations.cx = None;
        d.gate_durations.measure = None;
        let mut c = Circuit::new(2);
        c.cx(0, 1).measure(0);
        let v = validate(&c, &d).unwrap_err();
        assert_eq!(v.len(), 2);
    }

    #[test]
    fn durations_by_class() {
        let mut d = DeviceModel::ideal_line(3, 160, 1600, 4000);
        d.gate_durations.overrides.insert("rz".into(), 0);
        d.gate_durations.cx_edges.push(EdgeDuration {
            qubits: [2, 1],
            duration: 1200,
        });
        assert_eq!(d.duration(&Instruction::single(GateKind::RZ(1.0), 0)), Some(0));
        assert_eq!(d.duration(&Instruction::single(GateKind::SX, 0)), Some(160));
        assert_eq!(d.duration(&Instruction::cx(0, 1)), Some(1600));
        assert_eq!(d.duration(&Instruction::cx(1, 2)), Some(1200));
        assert_eq!(d.duration(&Instruction::single(GateKind::Delay(9), 0)), Some(9));
    }

    #[test]
    fn device_physical_checks() {
        let mut d = DeviceModel::ideal_line(2, 4, 20, 40);
        d.qubit_params[0].t1 = 50e-6;
        d.qubit_params[0].t2 = 120e-6;
        d.depol_1q = 1.5;
        let err = d.check().unwrap_err().to_string();
        assert!(err.contains("t2"));
        assert!(err.contains("depol_1q"));
    }

    #[test]
    fn device_toml_round_trip_with_infinite_times() {
        let d = DeviceModel::ideal_line(3, 160, 1600, 4000);
        let text = d.to_toml_string().unwrap();
        let back = DeviceModel::from_toml_str(&text).unwrap();
        assert_eq!(back, d);
    }
}
