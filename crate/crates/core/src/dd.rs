//! Dynamical decoupling: one round of a self-cancelling pulse sequence in each
//! idle interval long enough to hold it.

use serde::{Deserialize, Serialize};

use crate::ir::{DeviceModel, Dt, GateKind, Instruction, Qubit};
use crate::sched::{self, TimedCircuit, TimedInstruction};
use crate::{Error, Result};

pub const DEFAULT_HEURISTIC_FACTOR: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DdSequence {
    Xyxy,
    Xx,
}

impl DdSequence {
    pub fn gates(self) -> &'static [GateKind] {
        match self {
            DdSequence::Xyxy => &[GateKind::X, GateKind::Y, GateKind::X, GateKind::Y],
            DdSequence::Xx => &[GateKind::X, GateKind::X],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DdConfig {
    pub sequence: DdSequence,
    /// Also require the interval to be `heuristic_factor` times the sequence.
    pub heuristic: bool,
    pub heuristic_factor: f64,
}

impl Default for DdConfig {
    fn default() -> Self {
        DdConfig {
            sequence: DdSequence::Xyxy,
            heuristic: false,
            heuristic_factor: DEFAULT_HEURISTIC_FACTOR,
        }
    }
}

impl DdConfig {
    pub fn heuristic() -> Self {
        DdConfig {
            heuristic: true,
            ..Self::default()
        }
    }
}

/// Summed duration of the sequence's gates, without gaps.
pub fn sequence_duration(cfg: &DdConfig, d: &DeviceModel) -> Dt {
    cfg.sequence.gates().iter().map(|&g| d.gate_duration(g)).sum()
}

pub fn dd_fits(interval: Dt, cfg: &DdConfig, d: &DeviceModel) -> bool {
    let seq = sequence_duration(cfg, d);
    interval >= seq && (!cfg.heuristic || interval as f64 >= cfg.heuristic_factor * seq as f64)
}

/// Places the sequence in `[start, start + duration)` with equal gaps before,
/// between and after the pulses; leftover dt go to the leading gaps.
pub fn schedule_dd_in_interval(
    start: Dt,
    duration: Dt,
    qubit: Qubit,
    cfg: &DdConfig,
    d: &DeviceModel,
) -> Result<Vec<TimedInstruction>> {
    let seq = sequence_duration(cfg, d);
    if duration < seq {
        return Err(Error::DdDoesNotFit {
            duration,
            needed: seq,
        });
    }
    let gates = cfg.sequence.gates();
    let slots = gates.len() as Dt + 1;
    let gap = (duration - seq) / slots;
    let mut extra = (duration - seq) % slots;
    let mut t = start;
    let mut out = Vec::with_capacity(gates.len());
    for &g in gates {
        t += gap;
        if extra > 0 {
            t += 1;
            extra -= 1;
        }
        let dur = d.gate_duration(g);
        out.push(TimedInstruction {
            instr: Instruction::single(g, qubit),
            start: t,
            duration: dur,
        });
        t += dur;
    }
    Ok(out)
}

/// Inserts one round into every idle interval of `tc` that passes
/// [`dd_fits`]. Returns the new schedule and the number of inserted gates.
pub fn apply_dd(tc: &TimedCircuit, cfg: &DdConfig) -> Result<(TimedCircuit, usize)> {
    let d = tc.device().clone();
    let mut inserts = Vec::new();
    let mut count = 0;
    for iv in sched::idle_intervals(tc) {
        if dd_fits(iv.duration, cfg, &d) {
            let seq = schedule_dd_in_interval(iv.start, iv.duration, iv.qubit, cfg, &d)?;
            count += seq.len();
            inserts.push((iv.after, iv.qubit, iv.start, iv.start + iv.duration, seq));
        }
    }
    if inserts.is_empty() {
        return Ok((tc.clone(), 0));
    }
    Ok((sched::insert_after(tc, inserts)?, count))
}
