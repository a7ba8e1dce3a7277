//! Start-time assignment and slack-window analysis.
//!
//! Times live on the device `dt` grid. A [`TimedCircuit`] keeps its
//! instructions in a dependency-respecting list order; for schedules produced
//! by [`schedule`] that order is the program order of the source circuit, so
//! list indices double as instruction references.

use std::fmt;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::ir::{self, Circuit, DeviceModel, Dt, GateKind, Instruction, Qubit};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Policy {
    Asap,
    Alap,
    Middle,
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Policy::Asap => "ASAP",
            Policy::Alap => "ALAP",
            Policy::Middle => "Middle",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimedInstruction {
    pub instr: Instruction,
    pub start: Dt,
    pub duration: Dt,
}

impl TimedInstruction {
    pub fn end(&self) -> Dt {
        self.start + self.duration
    }

    fn overlaps(&self, lo: Dt, hi: Dt) -> bool {
        // zero-length instructions count as points
        if self.duration == 0 {
            self.start >= lo && self.start < hi
        } else {
            self.start < hi && self.end() > lo
        }
    }
}

#[derive(Clone, Debug)]
pub struct TimedCircuit {
    device: Arc<DeviceModel>,
    num_qubits: usize,
    timed: Vec<TimedInstruction>,
    total_duration: Dt,
}

impl PartialEq for TimedCircuit {
    fn eq(&self, other: &Self) -> bool {
        self.num_qubits == other.num_qubits
            && self.timed == other.timed
            && self.total_duration == other.total_duration
    }
}

impl TimedCircuit {
    /// Builds a timed circuit and checks every timing invariant: durations
    /// match the device, and instructions sharing a qubit do not overlap and
    /// appear in time order.
    pub fn new(
        device: Arc<DeviceModel>,
        num_qubits: usize,
        timed: Vec<TimedInstruction>,
    ) -> Result<Self> {
        let total_duration = timed.iter().map(TimedInstruction::end).max().unwrap_or(0);
        Self::with_total_duration(device, num_qubits, timed, total_duration)
    }

    /// Like [`TimedCircuit::new`] but with an explicit makespan, which may
    /// exceed the last instruction end (trailing idle time).
    pub fn with_total_duration(
        device: Arc<DeviceModel>,
        num_qubits: usize,
        timed: Vec<TimedInstruction>,
        total_duration: Dt,
    ) -> Result<Self> {
        let tc = TimedCircuit {
            device,
            num_qubits,
            timed,
            total_duration,
        };
        tc.check()?;
        Ok(tc)
    }

    fn check(&self) -> Result<()> {
        let mut clock = vec![0 as Dt; self.num_qubits];
        for (i, t) in self.timed.iter().enumerate() {
            let expected = self.device.duration(&t.instr);
            if expected != Some(t.duration) {
                return Err(Error::Timing(format!(
                    "instruction {i} ({}) has duration {} but the device gives {:?}",
                    t.instr, t.duration, expected
                )));
            }
            if t.end() > self.total_duration {
                return Err(Error::Timing(format!(
                    "instruction {i} ends after the total duration"
                )));
            }
            for &q in &t.instr.qubits {
                if q >= self.num_qubits {
                    return Err(Error::Timing(format!(
                        "instruction {i} uses qubit {q} outside the circuit"
                    )));
                }
                if t.start < clock[q] {
                    return Err(Error::Timing(format!(
                        "instruction {i} ({}) starts at {} before qubit {q} is free at {}",
                        t.instr, t.start, clock[q]
                    )));
                }
                clock[q] = t.end();
            }
        }
        Ok(())
    }

    pub fn device(&self) -> &Arc<DeviceModel> {
        &self.device
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn timed(&self) -> &[TimedInstruction] {
        &self.timed
    }

    pub fn total_duration(&self) -> Dt {
        self.total_duration
    }

    /// Same schedule with a different device attached. Durations must agree.
    pub fn with_device(&self, device: Arc<DeviceModel>) -> Result<Self> {
        Self::with_total_duration(device, self.num_qubits, self.timed.clone(), self.total_duration)
    }

    /// List indices of the instructions touching `q`, in time order.
    pub fn qubit_ops(&self, q: Qubit) -> Vec<usize> {
        (0..self.timed.len())
            .filter(|&i| self.timed[i].instr.qubits.contains(&q))
            .collect()
    }

    /// Instructions in list order with measurements moved last.
    pub fn to_circuit(&self) -> Circuit {
        let mut c = Circuit::new(self.num_qubits);
        let (ops, measures): (Vec<_>, Vec<_>) = self
            .timed
            .iter()
            .partition(|t| t.instr.kind != GateKind::Measure);
        for t in ops.into_iter().chain(measures) {
            c.push(t.instr.clone()).expect("timed circuit holds valid instructions");
        }
        c
    }

    /// A logical circuit whose ASAP schedule reproduces these start times:
    /// every idle gap on every qubit is filled with an explicit delay.
    pub fn to_padded_circuit(&self) -> Circuit {
        let mut c = Circuit::new(self.num_qubits);
        let mut clock = vec![0 as Dt; self.num_qubits];
        let (ops, measures): (Vec<_>, Vec<_>) = self
            .timed
            .iter()
            .partition(|t| t.instr.kind != GateKind::Measure);
        let mut pad = |c: &mut Circuit, t: &TimedInstruction| {
            for &q in &t.instr.qubits {
                if t.start > clock[q] {
                    c.delay(t.start - clock[q], q);
                }
                clock[q] = t.end();
            }
        };
        for t in ops {
            pad(&mut c, t);
            c.push(t.instr.clone()).expect("timed circuit holds valid instructions");
        }
        // Delays before measurements go first so measurements stay a suffix.
        for t in &measures {
            pad(&mut c, t);
        }
        for t in measures {
            c.push(t.instr.clone()).expect("timed circuit holds valid instructions");
        }
        c
    }

    /// Number of instructions other than delays and barriers.
    pub fn gate_count(&self) -> usize {
        self.timed
            .iter()
            .filter(|t| !matches!(t.instr.kind, GateKind::Delay(_) | GateKind::Barrier))
            .count()
    }

    /// Per-qubit timeline report, one line per instruction.
    pub fn report(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# timed circuit: {} qubits, total_duration {} dt",
            self.num_qubits, self.total_duration
        );
        for q in 0..self.num_qubits {
            let _ = writeln!(out, "qubit {q}");
            for i in self.qubit_ops(q) {
                let t = &self.timed[i];
                let _ = writeln!(
                    out,
                    "  [{:>8}, {:>8})  {}",
                    t.start,
                    t.end(),
                    t.instr
                );
            }
        }
        out
    }
}

fn durations(c: &Circuit, d: &DeviceModel) -> Vec<Dt> {
    c.instructions()
        .iter()
        .map(|i| d.duration(i).expect("validated circuit has durations"))
        .collect()
}

fn asap_starts(c: &Circuit, dur: &[Dt]) -> (Vec<Dt>, Dt) {
    let mut clock = vec![0 as Dt; c.num_qubits()];
    let mut starts = Vec::with_capacity(c.len());
    let mut makespan = 0;
    for (instr, &d) in c.instructions().iter().zip(dur) {
        let start = instr.qubits.iter().map(|&q| clock[q]).max().unwrap_or(0);
        for &q in &instr.qubits {
            clock[q] = start + d;
        }
        makespan = makespan.max(start + d);
        starts.push(start);
    }
    (starts, makespan)
}

fn alap_starts(c: &Circuit, dur: &[Dt], makespan: Dt) -> Vec<Dt> {
    let mut latest = vec![makespan; c.num_qubits()];
    let mut starts = vec![0; c.len()];
    for (i, instr) in c.instructions().iter().enumerate().rev() {
        let end = instr.qubits.iter().map(|&q| latest[q]).min().unwrap_or(makespan);
        let start = end - dur[i];
        for &q in &instr.qubits {
            latest[q] = start;
        }
        starts[i] = start;
    }
    starts
}

/// Assigns start times to every instruction of `c`.
///
/// All three policies share the ASAP makespan. Under `Middle` each slack
/// window's gate block sits at `floor((duration - block_span) / 2)` from the
/// window start of the ALAP schedule.
pub fn schedule(c: &Circuit, device: &Arc<DeviceModel>, policy: Policy) -> Result<TimedCircuit> {
    ir::validate(c, device)?;
    let dur = durations(c, device);
    let (asap, makespan) = asap_starts(c, &dur);
    let starts = match policy {
        Policy::Asap => asap,
        Policy::Alap | Policy::Middle => alap_starts(c, &dur, makespan),
    };
    let timed = c
        .instructions()
        .iter()
        .zip(starts)
        .zip(dur)
        .map(|((instr, start), duration)| TimedInstruction {
            instr: instr.clone(),
            start,
            duration,
        })
        .collect();
    let tc = TimedCircuit::with_total_duration(device.clone(), c.num_qubits(), timed, makespan)?;
    if policy == Policy::Middle {
        let moves: Vec<(SlackWindow, Dt)> = find_slack_windows(&tc)
            .into_iter()
            .filter(SlackWindow::is_tunable)
            .map(|w| {
                let mid = w.max_offset() / 2;
                (w, mid)
            })
            .collect();
        return move_blocks(&tc, &moves);
    }
    Ok(tc)
}

pub fn total_duration(tc: &TimedCircuit) -> Dt {
    tc.total_duration()
}

/// A maximal idle interval on one qubit between two anchors, together with the
/// single-qubit gates it contains.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlackWindow {
    pub window_id: usize,
    pub qubit: Qubit,
    pub start: Dt,
    pub duration: Dt,
    /// List indices of the single-qubit gates inside the window, in order.
    pub gate_block: Vec<usize>,
    /// Absolute start of the first block gate (`start` when the block is empty).
    pub block_start: Dt,
    /// From the first block gate's start to the last one's end.
    pub block_span: Dt,
    /// List index of the instruction the window starts after.
    pub left_anchor: usize,
    /// List index of the instruction the window ends at.
    pub right_anchor: usize,
}

impl SlackWindow {
    pub fn end(&self) -> Dt {
        self.start + self.duration
    }

    /// Largest legal block offset; also the offset the block has under ALAP.
    pub fn max_offset(&self) -> Dt {
        self.duration - self.block_span
    }

    /// Current offset of the block from the window start.
    pub fn offset(&self) -> Dt {
        self.block_start - self.start
    }

    pub fn is_tunable(&self) -> bool {
        !self.gate_block.is_empty()
    }
}

/// All slack windows of `tc`, ordered by qubit then start.
///
/// A window spans from the end of one anchor (a two-qubit gate, barrier or
/// measurement, or the qubit's first instruction) to the start of the next
/// anchor, and has idle time left after its gate block. Delays count as idle
/// time. Time before a qubit's first instruction, after its measurement, or
/// after its last instruction is never slack.
pub fn find_slack_windows(tc: &TimedCircuit) -> Vec<SlackWindow> {
    let mut windows = Vec::new();
    for q in 0..tc.num_qubits() {
        let ops: Vec<usize> = tc
            .qubit_ops(q)
            .into_iter()
            .filter(|&i| !matches!(tc.timed[i].instr.kind, GateKind::Delay(_)))
            .collect();
        let Some(first_pos) = ops
            .iter()
            .position(|&i| tc.timed[i].instr.kind != GateKind::Barrier)
        else {
            continue;
        };
        let first = ops[first_pos];
        if tc.timed[first].instr.kind == GateKind::Measure {
            continue;
        }
        let mut left = tc.timed[first].end();
        let mut left_anchor = first;
        let mut block: Vec<usize> = Vec::new();
        let mut close = |left: Dt, left_anchor: usize, right: Dt, right_anchor: usize, block: &mut Vec<usize>| {
            let (block_start, block_span) = match (block.first(), block.last()) {
                (Some(&a), Some(&b)) => (tc.timed[a].start, tc.timed[b].end() - tc.timed[a].start),
                _ => (left, 0),
            };
            let duration = right - left;
            if duration > block_span {
                windows.push(SlackWindow {
                    window_id: 0,
                    qubit: q,
                    start: left,
                    duration,
                    gate_block: std::mem::take(block),
                    block_start,
                    block_span,
                    left_anchor,
                    right_anchor,
                });
            }
            block.clear();
        };
        for &i in &ops[first_pos + 1..] {
            let t = &tc.timed[i];
            if t.instr.kind.is_single_qubit_gate() {
                block.push(i);
                continue;
            }
            close(left, left_anchor, t.start, i, &mut block);
            left = t.end();
            left_anchor = i;
            if t.instr.kind == GateKind::Measure {
                break;
            }
        }
    }
    for (id, w) in windows.iter_mut().enumerate() {
        w.window_id = id;
    }
    windows
}

/// Moves each window's gate block rigidly to a new offset inside its window.
///
/// Delays on the window's qubit inside a moved window are dropped; the idle
/// time they encoded is still present as a gap. Anchors, durations and the
/// total duration are unchanged.
pub fn move_blocks(tc: &TimedCircuit, moves: &[(SlackWindow, Dt)]) -> Result<TimedCircuit> {
    let mut timed = tc.timed.clone();
    let mut drop = vec![false; timed.len()];
    for (w, offset) in moves {
        if *offset > w.max_offset() {
            return Err(Error::OffsetOutOfRange {
                window: w.window_id,
                offset: *offset,
                max: w.max_offset(),
            });
        }
        let new_start = w.start + offset;
        if new_start == w.block_start {
            continue;
        }
        for &i in &w.gate_block {
            timed[i].start = timed[i].start - w.block_start + new_start;
        }
        for (i, t) in tc.timed.iter().enumerate() {
            if matches!(t.instr.kind, GateKind::Delay(_))
                && t.instr.qubits[0] == w.qubit
                && t.overlaps(w.start, w.end())
            {
                drop[i] = true;
            }
        }
    }
    let timed = timed
        .into_iter()
        .zip(drop)
        .filter_map(|(t, d)| (!d).then_some(t))
        .collect();
    TimedCircuit::with_total_duration(tc.device.clone(), tc.num_qubits, timed, tc.total_duration)
}

/// A gap on one qubit with no gate running, as seen by decoupling insertion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdleInterval {
    pub qubit: Qubit,
    pub start: Dt,
    pub duration: Dt,
    /// List index of the instruction ending where the interval starts.
    pub after: usize,
}

/// Every idle gap between consecutive non-delay instructions on each qubit,
/// after the qubit's first instruction and up to its measurement.
pub fn idle_intervals(tc: &TimedCircuit) -> Vec<IdleInterval> {
    let mut out = Vec::new();
    for q in 0..tc.num_qubits() {
        let ops: Vec<usize> = tc
            .qubit_ops(q)
            .into_iter()
            .filter(|&i| !matches!(tc.timed[i].instr.kind, GateKind::Delay(_)))
            .collect();
        let Some(first_pos) = ops
            .iter()
            .position(|&i| tc.timed[i].instr.kind != GateKind::Barrier)
        else {
            continue;
        };
        let mut prev = ops[first_pos];
        if tc.timed[prev].instr.kind == GateKind::Measure {
            continue;
        }
        for &i in &ops[first_pos + 1..] {
            let (end, start) = (tc.timed[prev].end(), tc.timed[i].start);
            if start > end {
                out.push(IdleInterval {
                    qubit: q,
                    start: end,
                    duration: start - end,
                    after: prev,
                });
            }
            prev = i;
            if tc.timed[i].instr.kind == GateKind::Measure {
                break;
            }
        }
    }
    out
}

/// Inserts single-qubit instructions after given list positions. Each entry
/// names the idle interval `[lo, hi)` it fills; delays on that qubit
/// overlapping the interval are dropped.
pub(crate) fn insert_after(
    tc: &TimedCircuit,
    inserts: Vec<(usize, Qubit, Dt, Dt, Vec<TimedInstruction>)>,
) -> Result<TimedCircuit> {
    let mut by_pos: Vec<Vec<TimedInstruction>> = vec![Vec::new(); tc.timed.len()];
    let mut drop = vec![false; tc.timed.len()];
    for (pos, q, lo, hi, list) in inserts {
        for (i, t) in tc.timed.iter().enumerate() {
            if matches!(t.instr.kind, GateKind::Delay(_))
                && t.instr.qubits[0] == q
                && t.overlaps(lo, hi)
            {
                drop[i] = true;
            }
        }
        by_pos[pos].extend(list);
    }
    let mut timed = Vec::with_capacity(tc.timed.len());
    for (i, t) in tc.timed.iter().enumerate() {
        if !drop[i] {
            timed.push(t.clone());
        }
        timed.append(&mut by_pos[i]);
    }
    TimedCircuit::with_total_duration(tc.device.clone(), tc.num_qubits, timed, tc.total_duration)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn device() -> Arc<DeviceModel> {
        Arc::new(DeviceModel::ideal_line(4, 4, 20, 10))
    }

    fn example() -> Circuit {
        let mut c = Circuit::new(3);
        c.cx(0, 1).cx(1, 2).x(0).cx(0, 1);
        c
    }

    fn starts(tc: &TimedCircuit) -> Vec<Dt> {
        tc.timed().iter().map(|t| t.start).collect()
    }

    // Reference list scheduler: repeatedly picks the ready instruction with the
    // smallest index and starts it when all its qubits are free (ASAP), or the
    // mirror image on the reversed circuit (ALAP).
    fn reference_asap(c: &Circuit, d: &DeviceModel) -> Vec<Dt> {
        let n = c.len();
        let mut start = vec![0; n];
        for j in 0..n {
            for i in 0..j {
                if c.instructions()[i].shares_qubit(&c.instructions()[j]) {
                    let end = start[i] + d.duration(&c.instructions()[i]).unwrap();
                    start[j] = start[j].max(end);
                }
            }
        }
        start
    }

    #[test]
    fn alap_example() {
        let tc = schedule(&example(), &device(), Policy::Alap).unwrap();
        assert_eq!(starts(&tc), vec![0, 20, 36, 40]);
        assert_eq!(tc.total_duration(), 60);
    }

    #[test]
    fn asap_example_matches_reference() {
        let d = device();
        let tc = schedule(&example(), &d, Policy::Asap).unwrap();
        assert_eq!(starts(&tc)[2], 20);
        assert_eq!(starts(&tc), reference_asap(&example(), &d));
    }

    #[test]
    fn middle_example() {
        let tc = schedule(&example(), &device(), Policy::Middle).unwrap();
        assert_eq!(starts(&tc), vec![0, 20, 28, 40]);
        assert_eq!(tc.total_duration(), 60);
    }

    #[test]
    fn window_of_alap_example() {
        let tc = schedule(&example(), &device(), Policy::Alap).unwrap();
        let w = find_slack_windows(&tc);
        assert_eq!(w.len(), 1);
        assert_eq!((w[0].qubit, w[0].start, w[0].duration), (0, 20, 20));
        assert_eq!(w[0].gate_block, vec![2]);
        assert_eq!((w[0].left_anchor, w[0].right_anchor), (0, 3));
        assert_eq!(w[0].offset(), w[0].max_offset());
    }

    #[test]
    fn no_window_before_first_op() {
        let mut c = Circuit::new(2);
        c.x(0).cx(0, 1);
        let tc = schedule(&c, &device(), Policy::Alap).unwrap();
        assert!(find_slack_windows(&tc).is_empty());
    }

    #[test]
    fn explicit_delay_window() {
        let mut c = Circuit::new(2);
        c.cx(0, 1).delay(50, 0).cx(0, 1);
        let tc = schedule(&c, &device(), Policy::Alap).unwrap();
        let w: Vec<_> = find_slack_windows(&tc).into_iter().filter(|w| w.qubit == 0).collect();
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].duration, 50);
        assert!(w[0].gate_block.is_empty());
    }

    #[test]
    fn total_duration_examples() {
        let tc = schedule(&Circuit::new(2), &device(), Policy::Alap).unwrap();
        assert_eq!(total_duration(&tc), 0);
        let mut c = Circuit::new(1);
        c.x(0);
        let tc = schedule(&c, &device(), Policy::Alap).unwrap();
        assert_eq!(total_duration(&tc), 4);
    }

    #[test]
    fn measure_anchors_trailing_window() {
        let mut c = Circuit::new(3);
        c.cx(0, 1).x(0).cx(1, 2).cx(1, 2).measure_all();
        let tc = schedule(&c, &device(), Policy::Alap).unwrap();
        let w = find_slack_windows(&tc);
        let q0: Vec<_> = w.iter().filter(|w| w.qubit == 0).collect();
        assert_eq!(q0.len(), 1);
        assert_eq!(tc.timed()[q0[0].right_anchor].instr.kind, GateKind::Measure);
        assert_eq!(q0[0].duration, 40);
    }

    #[test]
    fn padded_circuit_reproduces_times() {
        let d = device();
        let tc = schedule(&example(), &d, Policy::Middle).unwrap();
        let padded = tc.to_padded_circuit();
        let again = schedule(&padded, &d, Policy::Asap).unwrap();
        let strip = |tc: &TimedCircuit| -> Vec<(String, Dt)> {
            tc.timed()
                .iter()
                .filter(|t| !matches!(t.instr.kind, GateKind::Delay(_)))
                .map(|t| (t.instr.to_string(), t.start))
                .collect()
        };
        assert_eq!(strip(&tc), strip(&again));
    }

    #[test]
    fn padding_keeps_measurements_last() {
        let d = Arc::new(DeviceModel::ideal_line(2, 4, 20, 10));
        let ti = |instr, start, duration| TimedInstruction { instr, start, duration };
        let tc = TimedCircuit::new(
            d,
            2,
            vec![
                ti(Instruction::single(GateKind::X, 0), 0, 4),
                ti(Instruction::single(GateKind::Measure, 0), 4, 10),
                ti(Instruction::single(GateKind::X, 1), 0, 4),
                ti(Instruction::single(GateKind::Measure, 1), 8, 10),
            ],
        )
        .unwrap();
        let kinds: Vec<String> = tc.to_padded_circuit().instructions().iter().map(|i| i.to_string()).collect();
        assert_eq!(kinds.len(), 5);
        assert!(kinds[2].starts_with("delay"), "{kinds:?}");
    }

    #[test]
    fn move_rejects_out_of_range_offset() {
        let tc = schedule(&example(), &device(), Policy::Alap).unwrap();
        let w = find_slack_windows(&tc).remove(0);
        let err = move_blocks(&tc, &[(w, 17)]).unwrap_err();
        assert!(matches!(err, Error::OffsetOutOfRange { max: 16, .. }));
    }

    #[test]
    fn timed_circuit_rejects_overlap() {
        let d = device();
        let timed = vec![
            TimedInstruction { instr: Instruction::single(GateKind::X, 0), start: 0, duration: 4 },
            TimedInstruction { instr: Instruction::single(GateKind::X, 0), start: 2, duration: 4 },
        ];
        assert!(TimedCircuit::new(d, 1, timed).is_err());
    }

    #[test]
    fn idle_intervals_skip_delays_and_pre_first_op() {
        let mut c = Circuit::new(2);
        c.x(1).cx(0, 1).delay(30, 0).cx(0, 1);
        let tc = schedule(&c, &device(), Policy::Alap).unwrap();
        let idle = idle_intervals(&tc);
        assert_eq!(idle.len(), 2);
        assert_eq!((idle[0].qubit, idle[0].start, idle[0].duration), (0, 24, 30));
        assert_eq!((idle[1].qubit, idle[1].duration), (1, 30));
    }
}
