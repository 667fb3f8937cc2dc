use std::fmt;

use super::{microprogram, MicroAddress, Transfer, FETCH, HALT, LOADPC, RESET};
use crate::isa::{decode, Address, MemoryImage, Mnemonic, Word};

/// Memory as seen by one core: 256 addressable words.
pub trait Memory {
    fn read(&self, addr: Address) -> Word;
    fn write(&mut self, addr: Address, value: Word);
}

impl Memory for MemoryImage {
    fn read(&self, addr: Address) -> Word {
        MemoryImage::read(self, addr)
    }

    fn write(&mut self, addr: Address, value: Word) {
        MemoryImage::write(self, addr, value)
    }
}

/// Architectural and sequencer state of one hardware thread.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct CoreState {
    pub pc: Address,
    pub a: Word,
    pub mar: Address,
    pub ir: Word,
    pub buffer: Word,
    pub z: bool,
    pub c: bool,
    pub micro_pc: MicroAddress,
    pub cycles: u64,
}

impl CoreState {
    /// Reset state: every register and flag zero, sequencer at row 0.
    pub fn reset() -> Self {
        CoreState::default()
    }

    pub fn halted(&self) -> bool {
        self.micro_pc == HALT
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            cycle: self.cycles,
            micro_pc: self.micro_pc,
            pc: self.pc,
            a: self.a,
            mar: self.mar,
            ir: self.ir,
            buffer: self.buffer,
            z: self.z,
            c: self.c,
        }
    }
}

/// Executes one control-store row. Returns the row that ran.
///
/// All transfers read the pre-step registers; the branch condition also
/// sees pre-step IR and flags.
pub fn step<M: Memory + ?Sized>(state: &mut CoreState, mem: &mut M) -> MicroAddress {
    let here = state.micro_pc;
    let row = microprogram().row(here);
    let pre = *state;
    let mut next = pre;

    for t in &row.transfers {
        match t {
            Transfer::ClearPc => next.pc = 0,
            Transfer::MarFromPc => next.mar = pre.pc,
            Transfer::IrFromMem => next.ir = mem.read(pre.mar),
            Transfer::IncrementPc => next.pc = pre.pc.wrapping_add(1),
            Transfer::ComplementA => next.a = !pre.a,
            Transfer::IncrementA => {
                next.a = pre.a.wrapping_add(1);
                next.z = next.a == 0;
                next.c = pre.a == Word::MAX;
            }
            Transfer::DecrementA => {
                next.a = pre.a.wrapping_sub(1);
                next.z = next.a == 0;
                next.c = pre.a >= 1;
            }
            Transfer::AndBuffer => next.a = pre.a & pre.buffer,
            Transfer::BufferFromMem => next.buffer = mem.read(pre.mar),
            Transfer::MarFromBuffer => next.mar = pre.buffer,
            Transfer::AFromBuffer => next.a = pre.buffer,
            Transfer::MemFromA => mem.write(pre.mar, pre.a),
            Transfer::AddBuffer => {
                let (sum, carry) = pre.a.overflowing_add(pre.buffer);
                next.a = sum;
                next.z = sum == 0;
                next.c = carry;
            }
            Transfer::SubBuffer => {
                next.a = pre.a.wrapping_sub(pre.buffer);
                next.z = next.a == 0;
                next.c = pre.a >= pre.buffer;
            }
            Transfer::PcFromMem => next.pc = mem.read(pre.mar),
        }
    }

    next.micro_pc = row.next_address(here, pre.ir, pre.z, pre.c);
    next.cycles = pre.cycles + 1;
    *state = next;
    here
}

/// Register values after one cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Snapshot {
    pub cycle: u64,
    pub micro_pc: MicroAddress,
    pub pc: Address,
    pub a: Word,
    pub mar: Address,
    pub ir: Word,
    pub buffer: Word,
    pub z: bool,
    pub c: bool,
}

impl fmt::Display for Snapshot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {:02x} {:02x} {:02x} {:02x} {:02x} {} {}",
            self.cycle,
            self.micro_pc,
            self.pc,
            self.a,
            self.mar,
            self.ir,
            self.buffer,
            self.z as u8,
            self.c as u8
        )
    }
}

/// Per-cycle snapshots; renders as the trace file format
/// (`cycle upc pc a mar ir buffer z c`, one line per cycle).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace(pub Vec<Snapshot>);

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetiredInstruction {
    pub address: Address,
    pub mnemonic: Mnemonic,
    pub cycles: u32,
    /// Whether a JOZ/JOC loaded pc; `None` for other instructions.
    pub taken: Option<bool>,
}

/// Splits a stream of executed rows into per-instruction cycle counts.
#[derive(Debug, Clone, Default)]
pub struct InstructionMeter {
    current: Option<(Address, u32, bool)>,
    retired: Vec<RetiredInstruction>,
}

impl InstructionMeter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records that `row` executed, leaving the core in `after`.
    pub fn observe(&mut self, row: MicroAddress, after: &CoreState) {
        if row == FETCH {
            self.current = Some((after.pc, 0, false));
        }
        let Some((address, cycles, taken)) = self.current.as_mut() else {
            return;
        };
        *cycles += 1;
        *taken |= row == LOADPC;
        if after.micro_pc == FETCH || after.micro_pc == HALT {
            let mnemonic = decode(after.ir);
            self.retired.push(RetiredInstruction {
                address: *address,
                mnemonic,
                cycles: *cycles,
                taken: mnemonic.is_branch().then_some(*taken),
            });
            self.current = None;
        }
    }

    pub fn retired(&self) -> &[RetiredInstruction] {
        &self.retired
    }

    pub fn into_retired(self) -> Vec<RetiredInstruction> {
        self.retired
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub state: CoreState,
    pub memory: MemoryImage,
    pub trace: Option<Trace>,
    pub retired: Vec<RetiredInstruction>,
}

impl RunOutcome {
    /// Cycles from reset through the step that entered HALT.
    pub fn cycles(&self) -> u64 {
        self.state.cycles
    }
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("no HALT within {limit} cycles (pc={:#04x}, upc={})", .state.pc, .state.micro_pc)]
pub struct CycleLimitExceeded {
    pub limit: u64,
    pub state: Box<CoreState>,
    pub memory: Box<MemoryImage>,
}

/// Runs `img` from reset until HALT is entered.
pub fn run(
    img: &MemoryImage,
    max_cycles: u64,
    trace: bool,
) -> Result<RunOutcome, CycleLimitExceeded> {
    let mut state = CoreState::reset();
    debug_assert_eq!(state.micro_pc, RESET);
    let mut memory = img.clone();
    let mut snapshots = trace.then(Vec::new);
    let mut meter = InstructionMeter::new();

    while !state.halted() {
        if state.cycles >= max_cycles {
            return Err(CycleLimitExceeded {
                limit: max_cycles,
                state: Box::new(state),
                memory: Box::new(memory),
            });
        }
        let row = step(&mut state, &mut memory);
        meter.observe(row, &state);
        if let Some(s) = snapshots.as_mut() {
            s.push(state.snapshot());
        }
    }

    Ok(RunOutcome {
        state,
        memory,
        trace: snapshots.map(Trace),
        retired: meter.into_retired(),
    })
}
