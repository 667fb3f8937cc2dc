//! Random-stimulus equivalence checking between a reference netlist and a
//! transformed one.
//!
//! Both netlists start with every register at 0. A retimed netlist can hold
//! a different (but equivalent) state for its first few cycles, so outputs
//! are compared only after a warm-up. C-slow netlists are driven with `C`
//! independent streams interleaved cycle by cycle; fast cycle `s * C + j` of
//! the transformed netlist must match cycle `s - latency` of the reference
//! fed with stream `j`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::RetimeError;
use crate::netlist::{simulate, BitStreams, Netlist};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceCheck {
    pub trials: usize,
    /// Reference cycles per trial.
    pub cycles: usize,
    pub seed: u64,
    /// Number of interleaved streams (the C of a C-slow netlist).
    pub interleave: usize,
    /// Extra registers on every input-to-output path of the transformed side.
    pub latency: usize,
    /// Reference cycles to skip before comparing; `None` picks
    /// [`retiming_warmup`].
    pub warmup: Option<usize>,
}

impl Default for EquivalenceCheck {
    fn default() -> Self {
        EquivalenceCheck {
            trials: 16,
            cycles: 256,
            seed: 0,
            interleave: 1,
            latency: 0,
            warmup: None,
        }
    }
}

impl EquivalenceCheck {
    pub fn new(trials: usize, cycles: usize, seed: u64) -> Self {
        EquivalenceCheck {
            trials,
            cycles,
            seed,
            ..Default::default()
        }
    }

    pub fn interleaved(mut self, c: usize) -> Self {
        self.interleave = c;
        self
    }

    pub fn with_latency(mut self, latency: usize) -> Self {
        self.latency = latency;
        self
    }

    pub fn with_warmup(mut self, warmup: usize) -> Self {
        self.warmup = Some(warmup);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub trial: usize,
    /// Reference cycle of the disagreeing sample.
    pub cycle: usize,
    pub stream: usize,
    pub output: String,
    pub expected: bool,
    pub got: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquivalenceReport {
    pub pass: bool,
    pub trials: usize,
    pub cycles: usize,
    pub warmup: usize,
    /// Output samples compared across all trials.
    pub compared: usize,
    pub mismatch: Option<Mismatch>,
}

impl EquivalenceReport {
    pub fn verdict(&self) -> &'static str {
        if self.pass {
            "PASS"
        } else {
            "FAIL"
        }
    }
}

/// Cycles after which two retimings of the same netlist, both started from
/// all-zero registers, must agree.
pub fn retiming_warmup(a: &Netlist, b: &Netlist) -> usize {
    let regs = a.register_count().max(b.register_count()) as usize;
    regs + a.len().max(b.len())
}

fn sorted(mut v: Vec<String>) -> Vec<String> {
    v.sort();
    v
}

/// Drives `reference` and `candidate` with the same random inputs and
/// reports the first disagreement, if any.
pub fn check_equivalence(
    reference: &Netlist,
    candidate: &Netlist,
    check: &EquivalenceCheck,
) -> Result<EquivalenceReport, RetimeError> {
    if check.interleave == 0 {
        return Err(RetimeError::BadC(0));
    }
    let inputs = reference.input_names();
    if sorted(inputs.clone()) != sorted(candidate.input_names()) {
        return Err(RetimeError::InterfaceMismatch("input"));
    }
    let outputs = reference.output_names();
    let candidate_outputs = candidate.output_names();
    if sorted(outputs.clone()) != sorted(candidate_outputs.clone()) {
        return Err(RetimeError::InterfaceMismatch("output"));
    }
    let out_index: Vec<usize> = outputs
        .iter()
        .map(|o| candidate_outputs.iter().position(|c| c == o).unwrap())
        .collect();

    let c = check.interleave;
    let cycles = check.cycles;
    let warmup = check
        .warmup
        .unwrap_or_else(|| retiming_warmup(reference, candidate));
    let mut rng = ChaCha8Rng::seed_from_u64(check.seed);
    let mut report = EquivalenceReport {
        pass: true,
        trials: check.trials,
        cycles,
        warmup,
        compared: 0,
        mismatch: None,
    };

    for trial in 0..check.trials {
        let streams: Vec<BitStreams> = (0..c)
            .map(|_| BitStreams::random(inputs.clone(), cycles, &mut rng))
            .collect();
        let expected: Vec<BitStreams> = streams
            .iter()
            .map(|s| simulate(reference, s, cycles).expect("streams cover every input"))
            .collect();
        let fast_bits = (0..inputs.len())
            .map(|i| {
                (0..cycles * c)
                    .map(|t| streams[t % c].bits[i][t / c])
                    .collect()
            })
            .collect();
        let fast = BitStreams::new(inputs.clone(), fast_bits);
        let got = simulate(candidate, &fast, cycles * c).expect("streams cover every input");

        for s in (check.latency + warmup)..cycles {
            for (j, exp) in expected.iter().enumerate() {
                for (o, name) in outputs.iter().enumerate() {
                    let e = exp.bits[o][s - check.latency];
                    let g = got.bits[out_index[o]][s * c + j];
                    report.compared += 1;
                    if e != g {
                        report.pass = false;
                        report.mismatch = Some(Mismatch {
                            trial,
                            cycle: s,
                            stream: j,
                            output: name.clone(),
                            expected: e,
                            got: g,
                        });
                        return Ok(report);
                    }
                }
            }
        }
    }
    Ok(report)
}
