//! The `cslow` command line: argument definitions and subcommand drivers.
//!
//! Every driver writes its report to the supplied writer so the commands can
//! be exercised in-process; the binary only maps [`CliError`] to an exit
//! status.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::cslow::{
    sequential_baseline, Bundle, CslowConfig, CslowError, CslowMachine, MemoryMode, RunReport,
};
use crate::isa::{assemble_str, AsmError, ImageError, MemoryImage};
use crate::microcode::{run, CoreState, CycleLimitExceeded};
use crate::netlist::{critical_path, Netlist, NetlistError};
use crate::retime::{
    area_report, check_equivalence, cslow_transform, min_period_retime, pipeline, retiming_warmup,
    EquivalenceCheck, RetimeError,
};

pub const DEFAULT_MAX_CYCLES: u64 = 1_000_000;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Asm { path: PathBuf, source: AsmError },
    #[error("{path}: {source}")]
    Image { path: PathBuf, source: ImageError },
    #[error("{path}: {source}")]
    Netlist { path: PathBuf, source: NetlistError },
    #[error("cycle limit of {0} reached before HALT")]
    CycleLimit(u64),
    #[error(transparent)]
    Cslow(CslowError),
    #[error(transparent)]
    Retime(#[from] RetimeError),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("writing output: {0}")]
    Output(#[from] io::Error),
}

impl CliError {
    /// 1 for bad input or usage, 2 for a simulation limit, 3 for a broken
    /// internal invariant.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::CycleLimit(_) | CliError::Cslow(CslowError::CycleLimitExceeded { .. }) => 2,
            CliError::Invariant(_) => 3,
            _ => 1,
        }
    }
}

impl From<CslowError> for CliError {
    fn from(e: CslowError) -> Self {
        CliError::Cslow(e)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "cslow",
    version,
    about = "Accumulator core, C-slow barrel machine and netlist retiming"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Seed for every randomized check.
    #[arg(long, env = "CSLOW_SEED", default_value_t = 0, global = true)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Assemble a source file into a memory image.
    Asm(AsmArgs),
    /// Run one image on the baseline core.
    Run(RunArgs),
    /// Run C images on the barrel machine.
    RunCslow(RunCslowArgs),
    /// Compare sequential and C-slow cycle counts for growing thread counts.
    Bench(BenchArgs),
    /// Pipeline, C-slow and retime a netlist.
    Retime(RetimeArgs),
}

#[derive(Debug, Args)]
pub struct AsmArgs {
    pub input: PathBuf,
    /// Image file to write.
    #[arg(short, long)]
    pub out: PathBuf,
    #[arg(long, default_value = "0", value_parser = parse_address)]
    pub origin: u8,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub image: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MAX_CYCLES)]
    pub max_cycles: u64,
    /// Write a per-cycle trace here.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunCslowArgs {
    /// One bundle file, or one image file per thread.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Thread count; defaults to the bundle's C or the number of images.
    #[arg(long)]
    pub c: Option<usize>,
    /// Defaults to the bundle's mode, or private.
    #[arg(long)]
    pub mode: Option<MemoryMode>,
    /// Per-thread cycle limit.
    #[arg(long, default_value_t = DEFAULT_MAX_CYCLES)]
    pub max_cycles: u64,
    /// Trace prefix; thread `i` is written to `<prefix>.t<i>`.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Assembly sources, one per thread.
    pub programs: Vec<PathBuf>,
    /// Thread counts to measure; defaults to 1 through the number of programs.
    #[arg(long = "c", value_delimiter = ',')]
    pub c_values: Vec<usize>,
    #[arg(long, default_value = "private")]
    pub mode: MemoryMode,
    #[arg(long, default_value_t = DEFAULT_MAX_CYCLES)]
    pub max_cycles: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RetimeArgs {
    pub netlist: PathBuf,
    #[arg(long = "cslow", default_value_t = 1)]
    pub c: usize,
    /// Registers to add behind every input before retiming.
    #[arg(long)]
    pub pipeline: Option<u32>,
    /// Random trials for the equivalence check; 0 skips it.
    #[arg(long, default_value_t = 0)]
    pub check: usize,
    /// Reference cycles per trial.
    #[arg(long, default_value_t = 256)]
    pub cycles: usize,
    /// Write the chosen lags here.
    #[arg(long)]
    pub lags: Option<PathBuf>,
    /// Write the transformed netlist here.
    #[arg(long)]
    pub emit: Option<PathBuf>,
}

fn parse_number(s: &str) -> Result<u32, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u32::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|_| format!("`{s}` is not a decimal or 0x-hex number"))
}

fn parse_address(s: &str) -> Result<u8, String> {
    let n = parse_number(s)?;
    u8::try_from(n).map_err(|_| format!("address {s} is outside 0..=0xff"))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn read_image(path: &Path) -> Result<MemoryImage, CliError> {
    read(path)?.parse().map_err(|source| CliError::Image {
        path: path.to_owned(),
        source,
    })
}

fn assemble_file(path: &Path, origin: u8) -> Result<crate::isa::Assembly, CliError> {
    assemble_str(&read(path)?, origin).map_err(|source| CliError::Asm {
        path: path.to_owned(),
        source,
    })
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run_cli<I, T, W>(args: I, out: &mut W) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
    W: Write,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()))?;
    execute(&cli, out)
}

pub fn execute<W: Write>(cli: &Cli, out: &mut W) -> Result<(), CliError> {
    match &cli.command {
        Command::Asm(a) => cmd_asm(a, out),
        Command::Run(a) => cmd_run(a, out),
        Command::RunCslow(a) => cmd_run_cslow(a, out),
        Command::Bench(a) => cmd_bench(a, out),
        Command::Retime(a) => cmd_retime(a, cli.seed, out),
    }
}

pub fn cmd_asm<W: Write>(args: &AsmArgs, out: &mut W) -> Result<(), CliError> {
    let assembly = assemble_file(&args.input, args.origin)?;
    for entry in &assembly.listing {
        writeln!(out, "{entry}")?;
    }
    write_file(&args.out, &assembly.image.to_string())
}

/// Final registers, memory cells that changed, and the cycle count.
pub fn write_final_state<W: Write>(
    out: &mut W,
    initial: &MemoryImage,
    state: &CoreState,
    memory: &MemoryImage,
) -> io::Result<()> {
    writeln!(
        out,
        "pc={:02x} a={:02x} mar={:02x} ir={:02x} buffer={:02x} z={} c={}",
        state.pc, state.a, state.mar, state.ir, state.buffer, state.z as u8, state.c as u8
    )?;
    for (addr, before, after) in initial.diff(memory) {
        writeln!(out, "mem[{addr:02x}] {before:02x} -> {after:02x}")?;
    }
    writeln!(out, "cycles={}", state.cycles)
}

pub fn cmd_run<W: Write>(args: &RunArgs, out: &mut W) -> Result<(), CliError> {
    let image = read_image(&args.image)?;
    let outcome =
        run(&image, args.max_cycles, args.trace.is_some()).map_err(|e: CycleLimitExceeded| {
            let _ = write_final_state(out, &image, &e.state, &e.memory);
            CliError::CycleLimit(e.limit)
        })?;
    if let (Some(path), Some(trace)) = (&args.trace, &outcome.trace) {
        write_file(path, &trace.to_string())?;
    }
    write_final_state(out, &image, &outcome.state, &outcome.memory)?;
    Ok(())
}

fn thread_trace_path(prefix: &Path, t: usize) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(format!(".t{t}"));
    PathBuf::from(name)
}

/// Prints each thread's final state in the `run` format, then the JSON run
/// report. With one thread the text block is byte-identical to `run`.
pub fn cmd_run_cslow<W: Write>(args: &RunCslowArgs, out: &mut W) -> Result<(), CliError> {
    let (file_mode, images) = if args.inputs.len() == 1 {
        let text = read(&args.inputs[0])?;
        if text.trim_start().starts_with(crate::cslow::BUNDLE_MAGIC) {
            let bundle: Bundle = text.parse()?;
            (Some(bundle.mode), bundle.images)
        } else {
            (None, vec![read_image(&args.inputs[0])?])
        }
    } else {
        let images = args
            .inputs
            .iter()
            .map(|p| read_image(p))
            .collect::<Result<Vec<_>, _>>()?;
        (None, images)
    };
    let mode = args.mode.or(file_mode).unwrap_or(MemoryMode::Private);
    let c = args.c.unwrap_or(images.len());
    let images = if mode == MemoryMode::Shared && images.len() == 1 {
        vec![images[0].clone(); c]
    } else {
        images
    };
    if images.len() != c {
        return Err(CliError::Usage(format!(
            "--c {c} needs {c} images, got {}",
            images.len()
        )));
    }

    let cfg =
        CslowConfig::new(c, mode).with_max_fast_cycles(args.max_cycles.saturating_mul(c as u64));
    let mut machine = CslowMachine::new(cfg, &images)?;
    if args.trace.is_some() {
        machine = machine.with_traces();
    }
    let metrics = machine.run_all()?;
    let sequential_sum = sequential_baseline(&images, args.max_cycles)?;

    if let (Some(prefix), Some(traces)) = (&args.trace, machine.traces()) {
        for (t, trace) in traces.iter().enumerate() {
            write_file(&thread_trace_path(prefix, t), &trace.to_string())?;
        }
    }
    for (t, (image, state)) in images.iter().zip(machine.contexts()).enumerate() {
        if c > 1 {
            writeln!(out, "thread {t}")?;
        }
        write_final_state(out, image, state, &machine.memory_view(t))?;
    }
    let report = RunReport::new(c, mode, &metrics, sequential_sum);
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(&report).expect("report serializes")
    )?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub n_threads: usize,
    pub sequential_sum: u64,
    pub cslow_rounds: u64,
    pub fast_cycles: u64,
    pub speedup: f64,
}

/// Sequential versus C-slow cycle counts as the thread count grows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub mode: MemoryMode,
    pub programs: Vec<String>,
    pub rows: Vec<BenchRow>,
}

/// Runs the first `n` images for every `n` in `c_values`.
pub fn bench_images(
    images: &[MemoryImage],
    c_values: &[usize],
    mode: MemoryMode,
    max_cycles: u64,
) -> Result<Vec<BenchRow>, CliError> {
    c_values
        .iter()
        .map(|&n| {
            if n == 0 || n > images.len() {
                return Err(CliError::Usage(format!(
                    "thread count {n} needs between 1 and {} programs",
                    images.len()
                )));
            }
            let subset = &images[..n];
            let sequential_sum = sequential_baseline(subset, max_cycles)?;
            let cfg =
                CslowConfig::new(n, mode).with_max_fast_cycles(max_cycles.saturating_mul(n as u64));
            let metrics = CslowMachine::new(cfg, subset)?.run_all()?;
            if metrics.fast_cycles_total > n as u64 * metrics.rounds {
                return Err(CliError::Invariant(format!(
                    "{} fast cycles exceed {n} x {} rounds",
                    metrics.fast_cycles_total, metrics.rounds
                )));
            }
            Ok(BenchRow {
                n_threads: n,
                sequential_sum,
                cslow_rounds: metrics.rounds,
                fast_cycles: metrics.fast_cycles_total,
                speedup: sequential_sum as f64 / metrics.rounds as f64,
            })
        })
        .collect()
}

pub fn cmd_bench<W: Write>(args: &BenchArgs, out: &mut W) -> Result<(), CliError> {
    if args.programs.is_empty() {
        return Err(CliError::Usage("bench needs at least one program".into()));
    }
    if args.mode == MemoryMode::Shared {
        return Err(CliError::Usage(
            "bench runs distinct programs; use private or tagged mode".into(),
        ));
    }
    let images = args
        .programs
        .iter()
        .map(|p| assemble_file(p, 0).map(|a| a.image))
        .collect::<Result<Vec<_>, _>>()?;
    let c_values: Vec<usize> = if args.c_values.is_empty() {
        (1..=images.len()).collect()
    } else {
        args.c_values.clone()
    };
    let rows = bench_images(&images, &c_values, args.mode, args.max_cycles)?;

    writeln!(
        out,
        "{:>9} {:>14} {:>12} {:>11} {:>8}",
        "n_threads", "sequential_sum", "cslow_rounds", "fast_cycles", "speedup"
    )?;
    for r in &rows {
        writeln!(
            out,
            "{:>9} {:>14} {:>12} {:>11} {:>8.3}",
            r.n_threads, r.sequential_sum, r.cslow_rounds, r.fast_cycles, r.speedup
        )?;
    }
    let report = BenchReport {
        mode: args.mode,
        programs: args
            .programs
            .iter()
            .map(|p| p.display().to_string())
            .collect(),
        rows,
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    match &args.out {
        Some(path) => write_file(path, &json),
        None => Ok(out.write_all(json.as_bytes())?),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RetimeReport {
    pub period_before: u64,
    pub period_after: u64,
    pub c: usize,
    pub pipeline: u32,
    pub registers_before: u64,
    pub registers_after: u64,
    pub ratio: Option<f64>,
    /// `PASS`, `FAIL`, or `SKIPPED` when no trials were requested.
    pub equivalence: String,
    pub warmup: usize,
}

pub fn cmd_retime<W: Write>(args: &RetimeArgs, seed: u64, out: &mut W) -> Result<(), CliError> {
    let original: Netlist = read(&args.netlist)?
        .parse()
        .map_err(|source| CliError::Netlist {
            path: args.netlist.clone(),
            source,
        })?;
    let period_before = critical_path(&original).period;
    let k = args.pipeline.unwrap_or(0);

    let mut current = original.clone();
    if args.pipeline.is_some() {
        current = pipeline(&current, k)?.netlist;
    }
    current = cslow_transform(&current, args.c)?;
    let best = min_period_retime(&current);
    let retimed = best.netlist;
    if critical_path(&retimed).period != best.period || best.period > critical_path(&current).period
    {
        return Err(CliError::Invariant(
            "retiming did not reach the period it reported".into(),
        ));
    }

    if let Some(path) = &args.lags {
        write_file(path, &best.retiming.to_text(&current))?;
    }
    if let Some(path) = &args.emit {
        write_file(path, &retimed.to_string())?;
    }

    let area = area_report(&original, &retimed);
    writeln!(out, "period {period_before} \u{2192} {}", best.period)?;
    writeln!(out, "{area}")?;

    let warmup = retiming_warmup(&original, &retimed);
    let mut equivalence = "SKIPPED".to_string();
    if args.check > 0 {
        if warmup + k as usize >= args.cycles {
            return Err(CliError::Usage(format!(
                "--cycles {} leaves nothing to compare after warmup {warmup} and latency {k}",
                args.cycles
            )));
        }
        let check = EquivalenceCheck::new(args.check, args.cycles, seed)
            .interleaved(args.c)
            .with_latency(k as usize)
            .with_warmup(warmup);
        let report = check_equivalence(&original, &retimed, &check)?;
        writeln!(
            out,
            "equivalence {} ({} trials x {} cycles, warmup {})",
            report.verdict(),
            report.trials,
            report.cycles,
            report.warmup
        )?;
        equivalence = report.verdict().to_string();
        if let Some(m) = &report.mismatch {
            writeln!(
                out,
                "first mismatch: trial {} cycle {} stream {} output {} expected {} got {}",
                m.trial, m.cycle, m.stream, m.output, m.expected as u8, m.got as u8
            )?;
        }
    }

    let report = RetimeReport {
        period_before,
        period_after: best.period,
        c: args.c,
        pipeline: k,
        registers_before: area.registers_before,
        registers_after: area.registers_after,
        ratio: area.ratio,
        equivalence,
        warmup,
    };
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(&report).expect("report serializes")
    )?;
    if report.equivalence == "FAIL" {
        return Err(CliError::Invariant(
            "transformed netlist is not equivalent to the original".into(),
        ));
    }
    Ok(())
}
