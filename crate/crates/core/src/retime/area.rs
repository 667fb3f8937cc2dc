use std::fmt;

use serde::Serialize;

use crate::netlist::Netlist;

/// Register counts from an FPGA implementation of the accumulator CPU, before
/// and after 3-slow retiming. Kept as a reference point for the ratio the
/// netlist model predicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FpgaReference {
    pub simple_registers: u32,
    pub three_slow_registers: u32,
}

impl FpgaReference {
    pub fn ratio(&self) -> f64 {
        self.three_slow_registers as f64 / self.simple_registers as f64
    }
}

pub const MEASURED_FPGA: FpgaReference = FpgaReference {
    simple_registers: 2107,
    three_slow_registers: 4270,
};

/// Register and gate counts before and after a transformation. Gates are
/// unchanged by retiming and C-slow; only registers move or multiply.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AreaModel {
    pub registers_before: u64,
    pub registers_after: u64,
    pub gates_before: usize,
    pub gates_after: usize,
    /// `registers_after / registers_before`; `None` with no registers before.
    pub ratio: Option<f64>,
    pub fpga_reference: FpgaReference,
}

pub fn area_report(before: &Netlist, after: &Netlist) -> AreaModel {
    let registers_before = before.register_count();
    let registers_after = after.register_count();
    AreaModel {
        registers_before,
        registers_after,
        gates_before: before.gate_count(),
        gates_after: after.gate_count(),
        ratio: (registers_before > 0).then(|| registers_after as f64 / registers_before as f64),
        fpga_reference: MEASURED_FPGA,
    }
}

impl fmt::Display for AreaModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "registers {} -> {}, gates {} -> {}",
            self.registers_before, self.registers_after, self.gates_before, self.gates_after
        )?;
        match self.ratio {
            Some(r) => write!(f, ", register ratio {r:.2}")?,
            None => write!(f, ", register ratio n/a")?,
        }
        write!(
            f,
            " (FPGA reference {} -> {}, {:.2})",
            self.fpga_reference.simple_registers,
            self.fpga_reference.three_slow_registers,
            self.fpga_reference.ratio()
        )
    }
}
