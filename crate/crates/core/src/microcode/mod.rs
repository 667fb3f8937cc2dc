//! The horizontal control store and the single-thread core it drives.
//!
//! One row of the store executes per clock cycle. A row holds a set of
//! register transfers that all sample their sources before any destination
//! is written, plus a next-address field.
//!
//! ```text
//!  0        pc <- 0
//!  1 Fetch  MAR <- pc
//!  2        IR <- M(MAR); pc <- pc+1
//!  3 Decode I3?  -> 14 (MEMREF)
//!  4        XC0? -> 8  (CMA)
//!  5        XC1? -> 10 (INCA)
//!  6        XC2? -> 12 (DCRA)
//!  7        -> 52 (HALT)
//! 14 MEMREF XC0? -> 23 (LDSTO), 15: XC1? -> 32 (ADSUB), 16: XC2? -> 41 (JUMP)
//! 17..22    AND
//! 23..31    LOAD / STO     (26: I0=1? -> 30)
//! 32..40    ADD / SUB      (36: I0=1? -> 39)
//! 41..51    JOZ / JOC      (44: z? -> 50, 47: c? -> 50; 50: pc <- M(MAR))
//! 52 HALT   -> 52
//! ```

mod exec;

use std::fmt;
use std::sync::OnceLock;

use crate::isa::{encode, DecodeBits, Mnemonic};

pub use exec::{
    run, step, CoreState, CycleLimitExceeded, InstructionMeter, Memory, RetiredInstruction,
    RunOutcome, Snapshot, Trace,
};

/// Index into the control store.
pub type MicroAddress = u8;

pub const RESET: MicroAddress = 0;
pub const FETCH: MicroAddress = 1;
pub const DECODE: MicroAddress = 3;
pub const MEMREF: MicroAddress = 14;
pub const LOADPC: MicroAddress = 50;
pub const HALT: MicroAddress = 52;
pub const ROWS: usize = 53;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Transfer {
    /// `pc <- 0`
    ClearPc,
    /// `MAR <- pc`
    MarFromPc,
    /// `IR <- M(MAR)`
    IrFromMem,
    /// `pc <- pc + 1`
    IncrementPc,
    /// `A <- not A`
    ComplementA,
    /// `A <- A + 1`
    IncrementA,
    /// `A <- A - 1`
    DecrementA,
    /// `A <- A & Buffer`
    AndBuffer,
    /// `Buffer <- M(MAR)`
    BufferFromMem,
    /// `MAR <- Buffer`
    MarFromBuffer,
    /// `A <- Buffer`
    AFromBuffer,
    /// `M(MAR) <- A`
    MemFromA,
    /// `A <- A + Buffer`
    AddBuffer,
    /// `A <- A - Buffer`
    SubBuffer,
    /// `pc <- M(MAR)`
    PcFromMem,
}

/// Destination register of a transfer, used to check row well-formedness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Register {
    Pc,
    Mar,
    Ir,
    A,
    Buffer,
    Mem,
}

impl Transfer {
    pub fn destination(self) -> Register {
        match self {
            Transfer::ClearPc | Transfer::IncrementPc | Transfer::PcFromMem => Register::Pc,
            Transfer::MarFromPc | Transfer::MarFromBuffer => Register::Mar,
            Transfer::IrFromMem => Register::Ir,
            Transfer::ComplementA
            | Transfer::IncrementA
            | Transfer::DecrementA
            | Transfer::AndBuffer
            | Transfer::AFromBuffer
            | Transfer::AddBuffer
            | Transfer::SubBuffer => Register::A,
            Transfer::BufferFromMem => Register::Buffer,
            Transfer::MemFromA => Register::Mem,
        }
    }
}

impl fmt::Display for Transfer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Transfer::ClearPc => "pc <- 0",
            Transfer::MarFromPc => "MAR <- pc",
            Transfer::IrFromMem => "IR <- M(MAR)",
            Transfer::IncrementPc => "pc <- pc+1",
            Transfer::ComplementA => "A <- ~A",
            Transfer::IncrementA => "A <- A+1",
            Transfer::DecrementA => "A <- A-1",
            Transfer::AndBuffer => "A <- A & Buffer",
            Transfer::BufferFromMem => "Buffer <- M(MAR)",
            Transfer::MarFromBuffer => "MAR <- Buffer",
            Transfer::AFromBuffer => "A <- Buffer",
            Transfer::MemFromA => "M(MAR) <- A",
            Transfer::AddBuffer => "A <- A + Buffer",
            Transfer::SubBuffer => "A <- A - Buffer",
            Transfer::PcFromMem => "pc <- M(MAR)",
        })
    }
}

/// Branch condition of a row. Reads only IR decode bits and the flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    I3,
    Xc0,
    Xc1,
    Xc2,
    I0Clear,
    I0Set,
    Zero,
    Carry,
}

impl Condition {
    pub fn holds(self, ir: u8, z: bool, c: bool) -> bool {
        let bits = DecodeBits::from_word(ir);
        match self {
            Condition::I3 => bits.i3,
            Condition::Xc0 => bits.xc0(),
            Condition::Xc1 => bits.xc1(),
            Condition::Xc2 => bits.xc2(),
            Condition::I0Clear => !bits.i0,
            Condition::I0Set => bits.i0,
            Condition::Zero => z,
            Condition::Carry => c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Next,
    Goto(MicroAddress),
    If(Condition, MicroAddress),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MicroInstruction {
    pub label: Option<&'static str>,
    pub transfers: Vec<Transfer>,
    pub control: Control,
}

impl MicroInstruction {
    /// Address of the following row given the pre-step IR and flags.
    pub fn next_address(&self, here: MicroAddress, ir: u8, z: bool, c: bool) -> MicroAddress {
        match self.control {
            Control::Next => here + 1,
            Control::Goto(t) => t,
            Control::If(cond, t) if cond.holds(ir, z, c) => t,
            Control::If(..) => here + 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MicroProgram {
    rows: Vec<MicroInstruction>,
}

impl MicroProgram {
    pub fn rows(&self) -> &[MicroInstruction] {
        &self.rows
    }

    pub fn row(&self, addr: MicroAddress) -> &MicroInstruction {
        &self.rows[addr as usize]
    }

    pub fn address_of(&self, label: &str) -> Option<MicroAddress> {
        self.rows
            .iter()
            .position(|r| r.label == Some(label))
            .map(|i| i as MicroAddress)
    }
}

/// Builds the 53-row control store.
pub fn build_microprogram() -> MicroProgram {
    use Condition::*;
    use Control::{Goto, If, Next};
    use Transfer::*;

    let row = |label, transfers: &[Transfer], control| MicroInstruction {
        label,
        transfers: transfers.to_vec(),
        control,
    };
    let to_fetch = || row(None, &[], Goto(FETCH));

    let rows = vec![
        row(None, &[ClearPc], Next),                    // 0
        row(Some("Fetch"), &[MarFromPc], Next),         // 1
        row(None, &[IrFromMem, IncrementPc], Next),     // 2
        row(Some("Decode"), &[], If(I3, MEMREF)),       // 3
        row(None, &[], If(Xc0, 8)),                     // 4
        row(None, &[], If(Xc1, 10)),                    // 5
        row(None, &[], If(Xc2, 12)),                    // 6
        row(None, &[], Goto(HALT)),                     // 7
        row(Some("CMA"), &[ComplementA], Next),         // 8
        to_fetch(),                                     // 9
        row(Some("INCA"), &[IncrementA], Next),         // 10
        to_fetch(),                                     // 11
        row(Some("DCRA"), &[DecrementA], Next),         // 12
        to_fetch(),                                     // 13
        row(Some("MEMREF"), &[], If(Xc0, 23)),          // 14
        row(None, &[], If(Xc1, 32)),                    // 15
        row(None, &[], If(Xc2, 41)),                    // 16
        row(Some("AND"), &[MarFromPc], Next),           // 17
        row(None, &[BufferFromMem, IncrementPc], Next), // 18
        row(None, &[MarFromBuffer], Next),              // 19
        row(None, &[BufferFromMem], Next),              // 20
        row(None, &[AndBuffer], Next),                  // 21
        to_fetch(),                                     // 22
        row(Some("LDSTO"), &[MarFromPc], Next),         // 23
        row(None, &[BufferFromMem, IncrementPc], Next), // 24
        row(None, &[MarFromBuffer], Next),              // 25
        row(None, &[], If(I0Set, 30)),                  // 26
        row(Some("LOAD"), &[BufferFromMem], Next),      // 27
        row(None, &[AFromBuffer], Next),                // 28
        to_fetch(),                                     // 29
        row(Some("STO"), &[MemFromA], Next),            // 30
        to_fetch(),                                     // 31
        row(Some("ADSUB"), &[MarFromPc], Next),         // 32
        row(None, &[BufferFromMem, IncrementPc], Next), // 33
        row(None, &[MarFromBuffer], Next),              // 34
        row(None, &[BufferFromMem], Next),              // 35
        row(None, &[], If(I0Set, 39)),                  // 36
        row(Some("ADD"), &[AddBuffer], Next),           // 37
        to_fetch(),                                     // 38
        row(Some("SUB"), &[SubBuffer], Next),           // 39
        to_fetch(),                                     // 40
        row(Some("JUMP"), &[MarFromPc], Next),          // 41
        row(None, &[], If(I0Clear, 44)),                // 42
        row(None, &[], If(I0Set, 47)),                  // 43
        row(Some("JOZ"), &[], If(Zero, LOADPC)),        // 44
        row(None, &[IncrementPc], Next),                // 45
        to_fetch(),                                     // 46
        row(Some("JOC"), &[], If(Carry, LOADPC)),       // 47
        row(None, &[IncrementPc], Next),                // 48
        to_fetch(),                                     // 49
        row(Some("LOADPC"), &[PcFromMem], Next),        // 50
        to_fetch(),                                     // 51
        row(Some("HALT"), &[], Goto(HALT)),             // 52
    ];
    debug_assert_eq!(rows.len(), ROWS);
    MicroProgram { rows }
}

/// Shared instance of the control store.
pub fn microprogram() -> &'static MicroProgram {
    static PROGRAM: OnceLock<MicroProgram> = OnceLock::new();
    PROGRAM.get_or_init(build_microprogram)
}

/// Cycles one instruction spends in the control store, from the Fetch row
/// through the row that returns to Fetch (or enters HALT).
///
/// `taken` selects the flag value a conditional branch sees. It must be
/// given for JOZ/JOC and omitted otherwise.
///
/// # Panics
///
/// If `taken` is supplied for a non-branch or missing for a branch.
pub fn instruction_cycle_cost(m: Mnemonic, taken: Option<bool>) -> u32 {
    assert_eq!(
        m.is_branch(),
        taken.is_some(),
        "`taken` must be supplied exactly for JOZ/JOC"
    );
    let flag = taken.unwrap_or(false);
    let program = microprogram();
    let ir = encode(m);
    let mut upc = FETCH;
    let mut cycles = 0;
    loop {
        cycles += 1;
        let next = program.row(upc).next_address(upc, ir, flag, flag);
        if next == FETCH || next == HALT {
            return cycles;
        }
        upc = next;
    }
}
