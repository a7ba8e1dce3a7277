//! Slice+inverse calibration circuits for slack windows.
//!
//! A slice is everything in the baseline schedule that finishes by a window's
//! right edge. Running the slice, then its time-mirrored inverse, ideally
//! returns every touched qubit to |0>, so the all-zeros frequency measures how
//! much noise the slice accumulated with the window's gate block at a given
//! offset.

use serde::Serialize;

use crate::ir::{self, Circuit, Dt, GateKind, Instruction, Qubit};
use crate::sched::{self, SlackWindow, TimedCircuit, TimedInstruction};
use crate::{Error, Result};

/// The part of a baseline schedule that ends by a window's right edge.
#[derive(Clone, Debug)]
pub struct Slice {
    pub window: SlackWindow,
    /// Slice instructions with their baseline start times and the window's
    /// block remapped to slice-local indices.
    pub timed: TimedCircuit,
    /// Index into the baseline schedule of each slice instruction.
    pub source: Vec<usize>,
    local_window: SlackWindow,
}

impl Slice {
    pub fn circuit(&self) -> Circuit {
        self.timed.to_circuit()
    }

    pub fn end(&self) -> Dt {
        self.window.end()
    }

    pub fn cx_depth(&self) -> usize {
        ir::cx_depth_of(
            self.timed.num_qubits(),
            self.timed.timed().iter().map(|t| &t.instr),
        )
    }
}

/// Collects every non-measurement instruction of `tc` ending no later than
/// the window's right edge. Such a set is closed under predecessors, so it is
/// the full dependency cone of everything up to the window end.
pub fn build_slice(tc: &TimedCircuit, w: &SlackWindow) -> Result<Slice> {
    let end = w.end();
    let mut source = Vec::new();
    let mut timed = Vec::new();
    let mut local = vec![usize::MAX; tc.timed().len()];
    for (i, t) in tc.timed().iter().enumerate() {
        if t.instr.kind != GateKind::Measure && t.end() <= end {
            local[i] = source.len();
            source.push(i);
            timed.push(t.clone());
        }
    }
    let mut local_window = w.clone();
    local_window.gate_block = w
        .gate_block
        .iter()
        .map(|&i| local[i])
        .collect::<Vec<_>>();
    local_window.left_anchor = local[w.left_anchor];
    if local_window.gate_block.contains(&usize::MAX) {
        return Err(Error::Timing(format!(
            "window {} block is not contained in its slice",
            w.window_id
        )));
    }
    let timed =
        TimedCircuit::with_total_duration(tc.device().clone(), tc.num_qubits(), timed, end)?;
    Ok(Slice {
        window: w.clone(),
        timed,
        source,
        local_window,
    })
}

#[derive(Clone, Debug)]
pub struct SICircuit {
    pub window_id: usize,
    pub offset: Dt,
    /// The slice with the block at `offset`, on `[0, E)`.
    pub forward: TimedCircuit,
    /// The time-mirrored inverse on `[E, 2E)`, followed by measurements.
    pub inverse: TimedCircuit,
    pub tunable_offset_range: (Dt, Dt),
    pub measured: Vec<Qubit>,
    pub ground_truth: String,
    combined: TimedCircuit,
}

impl SICircuit {
    /// Forward half, inverse half and measurements as one schedule.
    pub fn timed(&self) -> &TimedCircuit {
        &self.combined
    }

    pub fn cx_depth(&self) -> usize {
        ir::cx_depth_of(
            self.combined.num_qubits(),
            self.combined.timed().iter().map(|t| &t.instr),
        )
    }
}

fn mirrored(instr: &Instruction) -> Result<Instruction> {
    Ok(match instr.kind {
        GateKind::Barrier => instr.clone(),
        _ => instr.inverse()?,
    })
}

/// Builds the SI circuit with the window's gate block at `offset` from the
/// window start.
///
/// The forward half keeps the baseline timing of the slice. The inverse half
/// is its reflection in time about the window end `E`, so the inverted block
/// sits at the mirrored offset `duration - offset - block_span` inside the
/// mirrored window. Every touched qubit is measured at `2E`.
pub fn build_si_circuit(slice: &Slice, offset: Dt) -> Result<SICircuit> {
    let w = &slice.local_window;
    if offset > w.max_offset() {
        return Err(Error::OffsetOutOfRange {
            window: w.window_id,
            offset,
            max: w.max_offset(),
        });
    }
    let forward = sched::move_blocks(&slice.timed, &[(w.clone(), offset)])?;
    let device = forward.device().clone();
    let end = slice.end();
    let mut inverse = Vec::with_capacity(forward.timed().len());
    for t in forward.timed().iter().rev() {
        let instr = mirrored(&t.instr)?;
        let duration = device.duration(&instr).unwrap_or(Dt::MAX);
        if duration != t.duration {
            return Err(Error::Timing(format!(
                "inverse of {} has duration {duration} instead of {}",
                t.instr, t.duration
            )));
        }
        inverse.push(TimedInstruction {
            instr,
            start: 2 * end - t.end(),
            duration,
        });
    }
    let mut measured: Vec<Qubit> = forward
        .timed()
        .iter()
        .filter(|t| t.instr.kind != GateKind::Barrier)
        .flat_map(|t| t.instr.qubits.iter().copied())
        .collect();
    measured.sort_unstable();
    measured.dedup();
    let measure_duration = match measured.first() {
        Some(&q) => device
            .duration(&Instruction::single(GateKind::Measure, q))
            .ok_or_else(|| Error::Timing("device has no measurement duration".into()))?,
        None => 0,
    };
    for &q in &measured {
        inverse.push(TimedInstruction {
            instr: Instruction::single(GateKind::Measure, q),
            start: 2 * end,
            duration: measure_duration,
        });
    }
    let n = forward.num_qubits();
    let total = 2 * end + measure_duration;
    let inverse = TimedCircuit::with_total_duration(device.clone(), n, inverse, total)?;
    let combined = TimedCircuit::with_total_duration(
        device,
        n,
        forward.timed().iter().chain(inverse.timed()).cloned().collect(),
        total,
    )?;
    Ok(SICircuit {
        window_id: w.window_id,
        offset,
        tunable_offset_range: (0, w.max_offset()),
        ground_truth: "0".repeat(measured.len()),
        measured,
        forward,
        inverse,
        combined,
    })
}

/// Whether the SI circuit is no deeper in CX gates than the original.
pub fn passes_depth_criteria(si: &SICircuit, original: &Circuit) -> bool {
    si.cx_depth() <= ir::cx_depth(original)
}

/// Per-window summary used in manifests and tuning reports.
#[derive(Clone, Debug, Serialize)]
pub struct SliceSummary {
    pub window_id: usize,
    pub qubit: Qubit,
    pub offset_range: (Dt, Dt),
    pub slice_cx_depth: usize,
    pub si_cx_depth: usize,
    pub original_cx_depth: usize,
    pub passes: bool,
}
