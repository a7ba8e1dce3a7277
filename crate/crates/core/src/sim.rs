//! Density-matrix noise simulation, a noiseless statevector oracle, and
//! outcome metrics.
//!
//! Noise model per qubit: amplitude damping and pure dephasing during idle
//! gaps (total coherence decay `exp(-t/T2)`), a coherent Z drift at the
//! qubit's detuning rate, depolarizing error after every timed gate, and a
//! classical readout confusion at measurement.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::ir::{Circuit, DeviceModel, Dt, GateKind, Qubit, QubitParams};
use crate::sched::TimedCircuit;
use crate::tuner::Backend;
use crate::{Error, Result};

/// Largest number of active qubits the density-matrix backend accepts.
pub const MAX_DENSITY_QUBITS: usize = 10;
/// Largest register the statevector oracle accepts.
pub const MAX_STATEVECTOR_QUBITS: usize = 20;

const TRACE_TOLERANCE: f64 = 1e-8;
const NORMALIZATION_TOLERANCE: f64 = 1e-9;

type C = Complex64;
type Mat2 = [[C; 2]; 2];

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);
const I: C = C::new(0.0, 1.0);

/// Ideal 2x2 matrix of a single-qubit gate; `None` for non-unitary kinds.
pub fn gate_matrix(kind: GateKind) -> Option<Mat2> {
    let h = C::new(FRAC_1_SQRT_2, 0.0);
    let half = C::new(0.5, 0.0);
    Some(match kind {
        GateKind::X => [[ZERO, ONE], [ONE, ZERO]],
        GateKind::Y => [[ZERO, -I], [I, ZERO]],
        GateKind::Z => [[ONE, ZERO], [ZERO, -ONE]],
        GateKind::H => [[h, h], [h, -h]],
        GateKind::S => [[ONE, ZERO], [ZERO, I]],
        GateKind::Sdg => [[ONE, ZERO], [ZERO, -I]],
        GateKind::SX => [[half + half * I, half - half * I], [half - half * I, half + half * I]],
        GateKind::SXdg => [[half - half * I, half + half * I], [half + half * I, half - half * I]],
        GateKind::RZ(theta) => [
            [C::from_polar(1.0, -theta / 2.0), ZERO],
            [ZERO, C::from_polar(1.0, theta / 2.0)],
        ],
        _ => return None,
    })
}

/// Idle-noise parameters for a gap of `t` dt.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub gamma: f64,
    pub lambda: f64,
    /// Coherent Z angle in radians.
    pub phase: f64,
}

pub fn idle_channel(t: Dt, params: &QubitParams, dt_seconds: f64) -> ChannelParams {
    let secs = t as f64 * dt_seconds;
    let gamma = if params.t1.is_finite() {
        1.0 - (-secs / params.t1).exp()
    } else {
        0.0
    };
    let inv_tphi = 1.0 / params.t2 - 0.5 / params.t1;
    let lambda = if inv_tphi > 0.0 {
        1.0 - (-2.0 * secs * inv_tphi).exp()
    } else {
        0.0
    };
    ChannelParams {
        gamma,
        lambda,
        phase: 2.0 * PI * params.detuning_hz * secs,
    }
}

/// A density matrix over `n` qubits, row-major, qubit `k` at bit `k`.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    n: usize,
    dim: usize,
    data: Vec<C>,
}

impl DensityMatrix {
    pub fn zero_state(n: usize) -> Self {
        let dim = 1usize << n;
        let mut data = vec![ZERO; dim * dim];
        data[0] = ONE;
        DensityMatrix { n, dim, data }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> C {
        self.data[row * self.dim + col]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i].re).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.data[i * self.dim + i].re.max(0.0)).collect()
    }

    /// Applies `f` to every 2x2 block indexed by the row and column bit of
    /// qubit `k`.
    fn for_blocks(&mut self, k: usize, mut f: impl FnMut(&mut Mat2)) {
        let m = 1usize << k;
        let dim = self.dim;
        for i in (0..dim).filter(|i| i & m == 0) {
            for j in (0..dim).filter(|j| j & m == 0) {
                let idx = [[i * dim + j, i * dim + (j | m)], [(i | m) * dim + j, (i | m) * dim + (j | m)]];
                let mut b = [
                    [self.data[idx[0][0]], self.data[idx[0][1]]],
                    [self.data[idx[1][0]], self.data[idx[1][1]]],
                ];
                f(&mut b);
                for r in 0..2 {
                    for c in 0..2 {
                        self.data[idx[r][c]] = b[r][c];
                    }
                }
            }
        }
    }

    pub fn apply_unitary(&mut self, k: usize, u: &Mat2) {
        self.for_blocks(k, |b| {
            let mut ub = [[ZERO; 2]; 2];
            for r in 0..2 {
                for c in 0..2 {
                    ub[r][c] = u[r][0] * b[0][c] + u[r][1] * b[1][c];
                }
            }
            for r in 0..2 {
                for c in 0..2 {
                    b[r][c] = ub[r][0] * u[c][0].conj() + ub[r][1] * u[c][1].conj();
                }
            }
        });
    }

    /// Amplitude damping, pure dephasing and a coherent Z rotation, composed.
    pub fn apply_idle(&mut self, k: usize, ch: &ChannelParams) {
        if ch.gamma == 0.0 && ch.lambda == 0.0 && ch.phase == 0.0 {
            return;
        }
        let decay = ((1.0 - ch.gamma) * (1.0 - ch.lambda)).sqrt();
        let rot = C::from_polar(decay, -ch.phase);
        let g = ch.gamma;
        self.for_blocks(k, |b| {
            b[0][0] += b[1][1] * g;
            b[1][1] *= 1.0 - g;
            b[0][1] *= rot;
            b[1][0] *= rot.conj();
        });
    }

    pub fn apply_depolarizing_1q(&mut self, k: usize, p: f64) {
        if p == 0.0 {
            return;
        }
        let keep = 1.0 - 4.0 * p / 3.0;
        let mix = 2.0 * p / 3.0;
        self.for_blocks(k, |b| {
            let (a, d) = (b[0][0], b[1][1]);
            b[0][0] = a * (1.0 - mix) + d * mix;
            b[1][1] = d * (1.0 - mix) + a * mix;
            b[0][1] *= keep;
            b[1][0] *= keep;
        });
    }

    pub fn apply_cx(&mut self, control: usize, target: usize) {
        let (cm, tm) = (1usize << control, 1usize << target);
        let dim = self.dim;
        for i in (0..dim).filter(|i| i & cm != 0 && i & tm == 0) {
            let i2 = i | tm;
            for j in 0..dim {
                self.data.swap(i * dim + j, i2 * dim + j);
            }
        }
        for j in (0..dim).filter(|j| j & cm != 0 && j & tm == 0) {
            let j2 = j | tm;
            for i in 0..dim {
                self.data.swap(i * dim + j, i * dim + j2);
            }
        }
    }

    /// Two-qubit depolarizing channel: with probability `16p/15` the pair is
    /// replaced by the maximally mixed state.
    pub fn apply_depolarizing_2q(&mut self, a: usize, b: usize, p: f64) {
        if p == 0.0 {
            return;
        }
        let w = 16.0 * p / 15.0;
        let (am, bm) = (1usize << a, 1usize << b);
        let dim = self.dim;
        let locals = [0, am, bm, am | bm];
        for r in (0..dim).filter(|r| r & (am | bm) == 0) {
            for c in (0..dim).filter(|c| c & (am | bm) == 0) {
                let tr: C = locals
                    .iter()
                    .map(|&l| self.data[(r | l) * dim + (c | l)])
                    .sum();
                for &lr in &locals {
                    for &lc in &locals {
                        let idx = (r | lr) * dim + (c | lc);
                        self.data[idx] *= 1.0 - w;
                        if lr == lc {
                            self.data[idx] += tr * (w / 4.0);
                        }
                    }
                }
            }
        }
    }
}

/// Outcome counts keyed by bitstring over the measured qubits in ascending
/// order, lowest qubit rightmost.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    pub counts: BTreeMap<String, u64>,
    pub shots: u64,
}

impl OutcomeDistribution {
    pub fn probabilities(&self) -> BTreeMap<String, f64> {
        self.counts
            .iter()
            .map(|(k, &v)| (k.clone(), v as f64 / self.shots as f64))
            .collect()
    }

    pub fn count(&self, bits: &str) -> u64 {
        self.counts.get(bits).copied().unwrap_or(0)
    }
}

pub fn bitstring(index: usize, width: usize) -> String {
    (0..width)
        .rev()
        .map(|b| if index >> b & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Fraction of shots landing in `accepted`.
pub fn pos<S: AsRef<str>>(dist: &OutcomeDistribution, accepted: &[S]) -> Result<f64> {
    if dist.shots == 0 {
        return Err(Error::EmptyDistribution);
    }
    let mut hits = 0;
    let mut seen = std::collections::BTreeSet::new();
    for a in accepted {
        if seen.insert(a.as_ref()) {
            hits += dist.count(a.as_ref());
        }
    }
    Ok(hits as f64 / dist.shots as f64)
}

fn check_normalized(p: &BTreeMap<String, f64>) -> Result<()> {
    let total: f64 = p.values().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOLERANCE || p.values().any(|&v| v < 0.0) {
        return Err(Error::NotNormalized(total));
    }
    Ok(())
}

pub fn hellinger_fidelity(p: &BTreeMap<String, f64>, q: &BTreeMap<String, f64>) -> Result<f64> {
    check_normalized(p)?;
    check_normalized(q)?;
    let bc: f64 = p
        .iter()
        .filter_map(|(k, &pv)| q.get(k).map(|&qv| (pv * qv).sqrt()))
        .sum();
    Ok((bc * bc).min(1.0))
}

pub fn total_variation(p: &BTreeMap<String, f64>, q: &BTreeMap<String, f64>) -> f64 {
    let mut keys: Vec<&String> = p.keys().chain(q.keys()).collect();
    keys.sort();
    keys.dedup();
    0.5 * keys
        .into_iter()
        .map(|k| (p.get(k).unwrap_or(&0.0) - q.get(k).unwrap_or(&0.0)).abs())
        .sum::<f64>()
}

/// Final state of a noisy execution, before readout.
#[derive(Clone, Debug)]
pub struct FinalState {
    pub rho: DensityMatrix,
    /// Original index of each simulated qubit; simulated qubit `k` is bit `k`.
    pub active: Vec<Qubit>,
    /// Measured qubits in ascending order.
    pub measured: Vec<Qubit>,
}

fn check_trace(rho: &DensityMatrix, after: impl FnOnce() -> String) -> Result<()> {
    let deviation = (rho.trace() - 1.0).abs();
    if deviation > TRACE_TOLERANCE {
        return Err(Error::TraceDeviation {
            deviation,
            after: after(),
        });
    }
    Ok(())
}

/// Evolves the density matrix through `tc` with noise taken from `noise`.
///
/// Qubits never touched are left out of the simulation. When the circuit has
/// no measurement every qubit is read out at the end of the schedule.
pub fn evolve(tc: &TimedCircuit, noise: &DeviceModel) -> Result<FinalState> {
    let timed = tc.timed();
    let mut measured: Vec<Qubit> = timed
        .iter()
        .filter(|t| t.instr.kind == GateKind::Measure)
        .map(|t| t.instr.qubits[0])
        .collect();
    let implicit_measure = measured.is_empty();
    if implicit_measure {
        measured = (0..tc.num_qubits()).collect();
    }
    measured.sort_unstable();
    measured.dedup();
    let mut active: Vec<Qubit> = timed
        .iter()
        .filter(|t| t.instr.kind != GateKind::Barrier)
        .flat_map(|t| t.instr.qubits.iter().copied())
        .chain(measured.iter().copied())
        .collect();
    active.sort_unstable();
    active.dedup();
    if active.len() > MAX_DENSITY_QUBITS {
        return Err(Error::QubitCap {
            qubits: active.len(),
            cap: MAX_DENSITY_QUBITS,
        });
    }
    if active.iter().any(|&q| q >= noise.num_qubits) {
        return Err(Error::Usage(format!(
            "noise device has {} qubits but the circuit uses qubit {}",
            noise.num_qubits,
            active.last().copied().unwrap_or(0)
        )));
    }
    let mut local = vec![usize::MAX; tc.num_qubits()];
    for (k, &q) in active.iter().enumerate() {
        local[q] = k;
    }

    let mut rho = DensityMatrix::zero_state(active.len());
    let mut clock = vec![0 as Dt; active.len()];
    let mut done = vec![false; active.len()];
    let idle = |rho: &mut DensityMatrix, clock: &mut [Dt], q: Qubit, k: usize, until: Dt| {
        if until > clock[k] {
            let ch = idle_channel(until - clock[k], &noise.qubit_params[q], noise.dt);
            rho.apply_idle(k, &ch);
        }
        clock[k] = clock[k].max(until);
    };

    let mut order: Vec<usize> = (0..timed.len()).collect();
    order.sort_by_key(|&i| (timed[i].start, i));
    for i in order {
        let t = &timed[i];
        match t.instr.kind {
            GateKind::Barrier | GateKind::Delay(_) => continue,
            GateKind::Measure => {
                let q = t.instr.qubits[0];
                let k = local[q];
                if !done[k] {
                    idle(&mut rho, &mut clock, q, k, t.start);
                    done[k] = true;
                }
            }
            GateKind::CX => {
                let (c, tq) = (t.instr.qubits[0], t.instr.qubits[1]);
                let (kc, kt) = (local[c], local[tq]);
                idle(&mut rho, &mut clock, c, kc, t.start);
                idle(&mut rho, &mut clock, tq, kt, t.start);
                rho.apply_cx(kc, kt);
                if t.duration > 0 {
                    rho.apply_depolarizing_2q(kc, kt, noise.depol_2q);
                }
                clock[kc] = t.end();
                clock[kt] = t.end();
            }
            kind => {
                let q = t.instr.qubits[0];
                let k = local[q];
                idle(&mut rho, &mut clock, q, k, t.start);
                let u = gate_matrix(kind).expect("single-qubit gate has a matrix");
                rho.apply_unitary(k, &u);
                if t.duration > 0 {
                    rho.apply_depolarizing_1q(k, noise.depol_1q);
                }
                clock[k] = t.end();
            }
        }
        check_trace(&rho, || format!("instruction {i} ({})", t.instr))?;
    }
    if implicit_measure {
        for (k, &q) in active.iter().enumerate() {
            idle(&mut rho, &mut clock, q, k, tc.total_duration());
        }
        check_trace(&rho, || "final idle".to_string())?;
    }
    Ok(FinalState {
        rho,
        active,
        measured,
    })
}

/// Exact outcome probabilities including readout error.
pub fn probabilities(tc: &TimedCircuit, noise: &DeviceModel) -> Result<Vec<f64>> {
    let state = evolve(tc, noise)?;
    Ok(readout(&state, noise))
}

fn readout(state: &FinalState, noise: &DeviceModel) -> Vec<f64> {
    let diag = state.rho.diagonal();
    let total: f64 = diag.iter().sum();
    let width = state.measured.len();
    let mut out = vec![0.0; 1usize << width];
    // marginalize onto the measured qubits
    let bits: Vec<usize> = state
        .measured
        .iter()
        .map(|q| state.active.binary_search(q).expect("measured qubits are active"))
        .collect();
    for (idx, p) in diag.iter().enumerate() {
        let mut o = 0;
        for (pos, &b) in bits.iter().enumerate() {
            o |= (idx >> b & 1) << pos;
        }
        out[o] += p / total;
    }
    for (pos, &q) in state.measured.iter().enumerate() {
        let QubitParams {
            readout_p01: p01,
            readout_p10: p10,
            ..
        } = noise.qubit_params[q];
        if p01 == 0.0 && p10 == 0.0 {
            continue;
        }
        let m = 1usize << pos;
        for o in (0..out.len()).filter(|o| o & m == 0) {
            let (z, one) = (out[o], out[o | m]);
            out[o] = z * (1.0 - p01) + one * p10;
            out[o | m] = z * p01 + one * (1.0 - p10);
        }
    }
    out
}

fn sample_iter(
    probs: impl ExactSizeIterator<Item = (usize, f64)>,
    label: impl Fn(usize) -> String,
    shots: u64,
    seed: u64,
) -> OutcomeDistribution {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = BTreeMap::new();
    let mut remaining = shots;
    let mut mass = 1.0f64;
    let len = probs.len();
    for (pos, (idx, p)) in probs.enumerate() {
        if remaining == 0 {
            break;
        }
        let k = if pos + 1 == len || mass <= p {
            remaining
        } else {
            let q = (p / mass).clamp(0.0, 1.0);
            Binomial::new(remaining, q)
                .expect("probability in [0, 1]")
                .sample(&mut rng)
        };
        mass -= p;
        remaining -= k;
        if k > 0 {
            counts.insert(label(idx), k);
        }
    }
    OutcomeDistribution { counts, shots }
}

/// Draws `shots` outcomes from `probs` (indexed by outcome) with a seeded
/// multinomial sampler.
pub fn sample(probs: &[f64], width: usize, shots: u64, seed: u64) -> OutcomeDistribution {
    sample_iter(probs.iter().copied().enumerate(), |i| bitstring(i, width), shots, seed)
}

/// Like [`sample`] for a distribution keyed by bitstring.
pub fn sample_distribution(probs: &BTreeMap<String, f64>, shots: u64, seed: u64) -> OutcomeDistribution {
    let keys: Vec<&String> = probs.keys().collect();
    sample_iter(probs.values().copied().enumerate(), |i| keys[i].clone(), shots, seed)
}

pub fn run_counts(
    tc: &TimedCircuit,
    noise: &DeviceModel,
    shots: u64,
    seed: u64,
) -> Result<OutcomeDistribution> {
    let state = evolve(tc, noise)?;
    let probs = readout(&state, noise);
    Ok(sample(&probs, state.measured.len(), shots, seed))
}

/// Exact noisy distribution keyed by bitstring, omitting zero entries.
pub fn exact_distribution(tc: &TimedCircuit, noise: &DeviceModel) -> Result<BTreeMap<String, f64>> {
    let state = evolve(tc, noise)?;
    let width = state.measured.len();
    Ok(to_map(&readout(&state, noise), width))
}

fn to_map(probs: &[f64], width: usize) -> BTreeMap<String, f64> {
    probs
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 1e-15)
        .map(|(i, &p)| (bitstring(i, width), p))
        .collect()
}

/// Ideal amplitudes of `c` on |0...0>; delays, barriers and measurements are
/// ignored.
pub fn run_statevector(c: &Circuit) -> Result<Vec<C>> {
    let n = c.num_qubits();
    if n > MAX_STATEVECTOR_QUBITS {
        return Err(Error::QubitCap {
            qubits: n,
            cap: MAX_STATEVECTOR_QUBITS,
        });
    }
    let mut psi = vec![ZERO; 1usize << n];
    psi[0] = ONE;
    for instr in c.instructions() {
        match instr.kind {
            GateKind::CX => {
                let (cm, tm) = (1usize << instr.qubits[0], 1usize << instr.qubits[1]);
                for i in (0..psi.len()).filter(|i| i & cm != 0 && i & tm == 0) {
                    psi.swap(i, i | tm);
                }
            }
            kind => {
                let Some(u) = gate_matrix(kind) else { continue };
                let m = 1usize << instr.qubits[0];
                for i in (0..psi.len()).filter(|i| i & m == 0) {
                    let (a, b) = (psi[i], psi[i | m]);
                    psi[i] = u[0][0] * a + u[0][1] * b;
                    psi[i | m] = u[1][0] * a + u[1][1] * b;
                }
            }
        }
    }
    Ok(psi)
}

/// Noiseless output distribution of `c` over its measured qubits (all qubits
/// when it has no measurement).
pub fn ideal_distribution(c: &Circuit) -> Result<BTreeMap<String, f64>> {
    let psi = run_statevector(c)?;
    let mut measured = c.measured_qubits();
    if measured.is_empty() {
        measured = (0..c.num_qubits()).collect();
    }
    let mut out = vec![0.0; 1usize << measured.len()];
    for (idx, a) in psi.iter().enumerate() {
        let mut o = 0;
        for (pos, &q) in measured.iter().enumerate() {
            o |= (idx >> q & 1) << pos;
        }
        out[o] += a.norm_sqr();
    }
    Ok(to_map(&out, measured.len()))
}

/// The shipped tuning backend.
#[derive(Clone, Debug, Default)]
pub struct DensityMatrixSimulator {
    /// Noise parameters; the schedule's own device when `None`.
    pub noise: Option<Arc<DeviceModel>>,
}

impl DensityMatrixSimulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_noise(noise: Arc<DeviceModel>) -> Self {
        DensityMatrixSimulator { noise: Some(noise) }
    }
}

impl Backend for DensityMatrixSimulator {
    fn run(&self, tc: &TimedCircuit, shots: u64, seed: u64) -> Result<OutcomeDistribution> {
        let noise = self.noise.as_deref().unwrap_or(tc.device());
        run_counts(tc, noise, shots, seed)
    }
}
