pub mod cli;
pub mod corpus;
pub mod cslow;
pub mod isa;
pub mod microcode;
pub mod netlist;
pub mod retime;
