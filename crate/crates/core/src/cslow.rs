//! C-slow barrel machine.
//!
//! C copies of the core's register set share one control store and datapath.
//! A thread counter advances every fast clock tick, so thread `t` runs on
//! ticks `t, t + C, t + 2C, ...` and sees exactly the cycle sequence it would
//! see running alone. A thread that has entered HALT keeps its slot; the
//! slot idles until every thread is done.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::isa::{Address, ImageError, MemoryImage, Word, MEMORY_WORDS};
use crate::microcode::{
    self, step, CoreState, InstructionMeter, Memory, RetiredInstruction, Trace,
};

pub const MAX_THREADS: usize = 8;

/// How the threads see main memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MemoryMode {
    /// One full image per thread.
    Private,
    /// One image visible to every thread. No synchronization: accesses are
    /// ordered by the round-robin schedule.
    Shared,
    /// One store of `C * 256` words; thread `t` addresses `t * 256 + addr`.
    Tagged,
}

impl fmt::Display for MemoryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MemoryMode::Private => "private",
            MemoryMode::Shared => "shared",
            MemoryMode::Tagged => "tagged",
        })
    }
}

impl FromStr for MemoryMode {
    type Err = CslowError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "private" => Ok(MemoryMode::Private),
            "shared" => Ok(MemoryMode::Shared),
            "tagged" => Ok(MemoryMode::Tagged),
            _ => Err(CslowError::BadMode(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CslowError {
    #[error("thread count must be in 1..={MAX_THREADS}, got {0}")]
    BadThreadCount(usize),
    #[error("expected {expected} memory images, got {got}")]
    ImageCount { expected: usize, got: usize },
    #[error("shared memory mode needs identical images (image {0} differs from image 0)")]
    ImageMismatch(usize),
    #[error("threads {threads:?} did not halt within {limit} cycles")]
    CycleLimitExceeded { threads: Vec<usize>, limit: u64 },
    #[error("unknown memory mode `{0}` (expected private, shared or tagged)")]
    BadMode(String),
    #[error("bad bundle: {0}")]
    BadBundle(String),
    #[error(transparent)]
    Image(#[from] ImageError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CslowConfig {
    pub c: usize,
    pub mode: MemoryMode,
    /// Fast-clock ticks `run_all` may spend before giving up.
    pub max_fast_cycles: u64,
}

impl CslowConfig {
    pub fn new(c: usize, mode: MemoryMode) -> Self {
        CslowConfig {
            c,
            mode,
            max_fast_cycles: c as u64 * 1_000_000,
        }
    }

    pub fn with_max_fast_cycles(mut self, max: u64) -> Self {
        self.max_fast_cycles = max;
        self
    }
}

#[derive(Debug, Clone)]
enum MemorySystem {
    Private(Vec<MemoryImage>),
    Shared(Box<MemoryImage>),
    Tagged(Vec<Word>),
}

/// Window of the tagged store belonging to one thread.
struct TaggedView<'a>(&'a mut [Word]);

impl Memory for TaggedView<'_> {
    fn read(&self, addr: Address) -> Word {
        self.0[addr as usize]
    }

    fn write(&mut self, addr: Address, value: Word) {
        self.0[addr as usize] = value;
    }
}

#[derive(Debug, Clone)]
pub struct CslowMachine {
    cfg: CslowConfig,
    contexts: Vec<CoreState>,
    meters: Vec<InstructionMeter>,
    traces: Option<Vec<Trace>>,
    thread_counter: usize,
    memory: MemorySystem,
    fast_cycles: u64,
    idle_ticks: u64,
}

impl CslowMachine {
    /// Builds a machine with every context at reset.
    ///
    /// `images` holds one image per thread. Shared mode also accepts a single
    /// image; when several are given they must be identical.
    pub fn new(cfg: CslowConfig, images: &[MemoryImage]) -> Result<Self, CslowError> {
        let c = cfg.c;
        if c == 0 || c > MAX_THREADS {
            return Err(CslowError::BadThreadCount(c));
        }
        let memory = match cfg.mode {
            MemoryMode::Shared => {
                if images.len() != c && images.len() != 1 {
                    return Err(CslowError::ImageCount {
                        expected: c,
                        got: images.len(),
                    });
                }
                if let Some(i) = images.iter().position(|img| *img != images[0]) {
                    return Err(CslowError::ImageMismatch(i));
                }
                MemorySystem::Shared(Box::new(images[0].clone()))
            }
            _ if images.len() != c => {
                return Err(CslowError::ImageCount {
                    expected: c,
                    got: images.len(),
                })
            }
            MemoryMode::Private => MemorySystem::Private(images.to_vec()),
            MemoryMode::Tagged => {
                let mut store = Vec::with_capacity(c * MEMORY_WORDS);
                for img in images {
                    store.extend_from_slice(img.cells());
                }
                MemorySystem::Tagged(store)
            }
        };
        Ok(CslowMachine {
            cfg,
            contexts: vec![CoreState::reset(); c],
            meters: vec![InstructionMeter::new(); c],
            traces: None,
            thread_counter: 0,
            memory,
            fast_cycles: 0,
            idle_ticks: 0,
        })
    }

    /// Records a per-thread trace (one snapshot per non-idle tick).
    pub fn with_traces(mut self) -> Self {
        self.traces = Some(vec![Trace::default(); self.cfg.c]);
        self
    }

    pub fn config(&self) -> &CslowConfig {
        &self.cfg
    }

    pub fn threads(&self) -> usize {
        self.cfg.c
    }

    pub fn contexts(&self) -> &[CoreState] {
        &self.contexts
    }

    pub fn thread_counter(&self) -> usize {
        self.thread_counter
    }

    pub fn fast_cycles(&self) -> u64 {
        self.fast_cycles
    }

    pub fn idle_ticks(&self) -> u64 {
        self.idle_ticks
    }

    pub fn all_halted(&self) -> bool {
        self.contexts.iter().all(CoreState::halted)
    }

    pub fn traces(&self) -> Option<&[Trace]> {
        self.traces.as_deref()
    }

    pub fn retired(&self, thread: usize) -> &[RetiredInstruction] {
        self.meters[thread].retired()
    }

    /// Thread `t`'s view of memory.
    pub fn memory_view(&self, t: usize) -> MemoryImage {
        match &self.memory {
            MemorySystem::Private(images) => images[t].clone(),
            MemorySystem::Shared(img) => (**img).clone(),
            MemorySystem::Tagged(store) => {
                let mut cells = [0; MEMORY_WORDS];
                cells.copy_from_slice(&store[t * MEMORY_WORDS..(t + 1) * MEMORY_WORDS]);
                MemoryImage::from_cells(cells)
            }
        }
    }

    /// The tagged physical store, `C * 256` words. `None` in other modes.
    pub fn tagged_store(&self) -> Option<&[Word]> {
        match &self.memory {
            MemorySystem::Tagged(store) => Some(store),
            _ => None,
        }
    }

    /// Advances one fast clock tick.
    pub fn tick(&mut self) {
        let t = self.thread_counter;
        let state = &mut self.contexts[t];
        if state.halted() {
            // The HALT row loops on itself; nothing architectural changes.
            self.idle_ticks += 1;
        } else {
            let row = match &mut self.memory {
                MemorySystem::Private(images) => step(state, &mut images[t]),
                MemorySystem::Shared(img) => step(state, img.as_mut()),
                MemorySystem::Tagged(store) => step(
                    state,
                    &mut TaggedView(&mut store[t * MEMORY_WORDS..(t + 1) * MEMORY_WORDS]),
                ),
            };
            self.meters[t].observe(row, state);
            if let Some(traces) = self.traces.as_mut() {
                traces[t].0.push(state.snapshot());
            }
        }
        self.fast_cycles += 1;
        self.thread_counter = (self.fast_cycles % self.cfg.c as u64) as usize;
    }

    /// Ticks until every thread has entered HALT.
    pub fn run_all(&mut self) -> Result<RunMetrics, CslowError> {
        while !self.all_halted() {
            if self.fast_cycles >= self.cfg.max_fast_cycles {
                let threads = (0..self.cfg.c)
                    .filter(|&t| !self.contexts[t].halted())
                    .collect();
                return Err(CslowError::CycleLimitExceeded {
                    threads,
                    limit: self.cfg.max_fast_cycles,
                });
            }
            self.tick();
        }
        Ok(self.metrics())
    }

    pub fn metrics(&self) -> RunMetrics {
        let per_thread_cycles: Vec<u64> = self.contexts.iter().map(|s| s.cycles).collect();
        let busy: u64 = per_thread_cycles.iter().sum();
        let total = self.fast_cycles;
        let (occupancy, vertical_waste) = if total == 0 {
            (0.0, 0.0)
        } else {
            (
                busy as f64 / total as f64,
                self.idle_ticks as f64 / total as f64,
            )
        };
        RunMetrics {
            rounds: per_thread_cycles.iter().copied().max().unwrap_or(0),
            per_thread_cycles,
            fast_cycles_total: total,
            idle_ticks: self.idle_ticks,
            occupancy,
            vertical_waste,
            horizontal_waste: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetrics {
    /// Cycles each thread took from reset through HALT entry.
    pub per_thread_cycles: Vec<u64>,
    /// Slow-clock periods: the longest thread's cycle count.
    pub rounds: u64,
    pub fast_cycles_total: u64,
    pub idle_ticks: u64,
    pub occupancy: f64,
    /// Share of ticks whose scheduled thread had already halted.
    pub vertical_waste: f64,
    /// Always 0: a single-issue datapath has no partially filled issue slots.
    pub horizontal_waste: f64,
}

/// Sum of the single-thread cycle counts: the same programs run one after
/// another on the baseline core.
pub fn sequential_baseline(images: &[MemoryImage], max_cycles: u64) -> Result<u64, CslowError> {
    let mut total = 0;
    let mut failed = Vec::new();
    for (i, img) in images.iter().enumerate() {
        match microcode::run(img, max_cycles, false) {
            Ok(out) => total += out.cycles(),
            Err(_) => failed.push(i),
        }
    }
    if failed.is_empty() {
        Ok(total)
    } else {
        Err(CslowError::CycleLimitExceeded {
            threads: failed,
            limit: max_cycles,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub sequential_sum: u64,
    pub max_rounds: u64,
    pub fast_cycles: u64,
    pub speedup: f64,
    pub metrics: RunMetrics,
}

impl Comparison {
    /// `sequential_sum / max_rounds` in lowest terms.
    pub fn speedup_ratio(&self) -> (u64, u64) {
        let g = gcd(self.sequential_sum, self.max_rounds).max(1);
        (self.sequential_sum / g, self.max_rounds / g)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Runs `images` both sequentially on the baseline core and interleaved on
/// a `C = images.len()` machine.
pub fn compare(
    images: &[MemoryImage],
    mode: MemoryMode,
    max_cycles: u64,
) -> Result<Comparison, CslowError> {
    let c = images.len();
    let sequential_sum = sequential_baseline(images, max_cycles)?;
    let cfg = CslowConfig::new(c, mode).with_max_fast_cycles(max_cycles.saturating_mul(c as u64));
    let metrics = CslowMachine::new(cfg, images)?.run_all()?;
    Ok(Comparison {
        sequential_sum,
        max_rounds: metrics.rounds,
        fast_cycles: metrics.fast_cycles_total,
        speedup: sequential_sum as f64 / metrics.rounds as f64,
        metrics,
    })
}

/// The JSON run report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub c: usize,
    pub mode: MemoryMode,
    pub per_thread_cycles: Vec<u64>,
    pub rounds: u64,
    pub fast_cycles_total: u64,
    pub occupancy: f64,
    pub vertical_waste: f64,
    pub horizontal_waste: f64,
    pub sequential_sum: u64,
    pub speedup: f64,
}

impl RunReport {
    pub fn new(c: usize, mode: MemoryMode, metrics: &RunMetrics, sequential_sum: u64) -> Self {
        RunReport {
            c,
            mode,
            per_thread_cycles: metrics.per_thread_cycles.clone(),
            rounds: metrics.rounds,
            fast_cycles_total: metrics.fast_cycles_total,
            occupancy: metrics.occupancy,
            vertical_waste: metrics.vertical_waste,
            horizontal_waste: metrics.horizontal_waste,
            sequential_sum,
            speedup: sequential_sum as f64 / metrics.rounds as f64,
        }
    }
}

/// `C` memory images plus the mode they are meant to run under.
///
/// File format: a header line `cslow-bundle C=<n> mode=<m>` followed by the
/// `C` memory-image files concatenated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bundle {
    pub mode: MemoryMode,
    pub images: Vec<MemoryImage>,
}

pub const BUNDLE_MAGIC: &str = "cslow-bundle";

impl fmt::Display for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{BUNDLE_MAGIC} C={} mode={}",
            self.images.len(),
            self.mode
        )?;
        for img in &self.images {
            write!(f, "{img}")?;
        }
        Ok(())
    }
}

impl FromStr for Bundle {
    type Err = CslowError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |m: &str| CslowError::BadBundle(m.to_string());
        let (header, body) = s.split_once('\n').unwrap_or((s, ""));
        let mut fields = header.split_whitespace();
        if fields.next() != Some(BUNDLE_MAGIC) {
            return Err(bad("missing `cslow-bundle` header"));
        }
        let mut c = None;
        let mut mode = None;
        for field in fields {
            match field.split_once('=') {
                Some(("C", v)) => c = Some(v.parse::<usize>().map_err(|_| bad("bad C value"))?),
                Some(("mode", v)) => mode = Some(v.parse::<MemoryMode>()?),
                _ => return Err(bad(&format!("unexpected header field `{field}`"))),
            }
        }
        let c = c.ok_or_else(|| bad("header lacks C="))?;
        let mode = mode.ok_or_else(|| bad("header lacks mode="))?;
        if c == 0 || c > MAX_THREADS {
            return Err(CslowError::BadThreadCount(c));
        }
        let tokens = body.split_whitespace().count();
        if tokens != c * MEMORY_WORDS {
            return Err(bad(&format!(
                "expected {} bytes for C={c}, found {tokens}",
                c * MEMORY_WORDS
            )));
        }
        let mut it = body.split_whitespace();
        let images = (0..c)
            .map(|i| MemoryImage::from_tokens(&mut it, i * MEMORY_WORDS))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Bundle { mode, images })
    }
}
