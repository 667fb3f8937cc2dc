//! Two-pass assembler and linear-sweep disassembler.
//!
//! Source format, one statement per line:
//!
//! ```text
//! ; comment
//! START:  LOAD X        ; memory reference: opcode word, then X's address
//!         INCA
//!         HALT
//!         .org 0x80
//! X:      .word 7
//! ```
//!
//! Numbers are decimal or `0x` hex. `.word` accepts a number or a label.

use std::collections::HashMap;
use std::fmt;

use super::{decode, encode, Address, MemoryImage, Mnemonic, Word, MEMORY_WORDS};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AsmError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: label `{label}` already defined on line {first}")]
    DuplicateLabel {
        label: String,
        line: usize,
        first: usize,
    },
    #[error("line {line}: undefined label `{label}`")]
    UndefinedLabel { label: String, line: usize },
    #[error("line {line}: program does not fit in memory (address {address:#x})")]
    ImageOverflow { line: usize, address: u32 },
    #[error("line {line}: address {address:#04x} is emitted twice")]
    Overlap { line: usize, address: Address },
    #[error("line {line}: {mnemonic} takes no operand")]
    UnexpectedOperand { mnemonic: Mnemonic, line: usize },
    #[error("line {line}: {mnemonic} needs an operand address")]
    MissingOperand { mnemonic: Mnemonic, line: usize },
    #[error("line {line}: value {value} does not fit in a word")]
    ValueOutOfRange { line: usize, value: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Operand {
    Number(u32),
    Label(String),
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Number(n) => write!(f, "0x{n:02X}"),
            Operand::Label(l) => f.write_str(l),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Statement {
    Instr {
        mnemonic: Mnemonic,
        operand: Option<Operand>,
    },
    Org(u32),
    Word(Operand),
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Instr {
                mnemonic,
                operand: Some(op),
            } => write!(f, "{mnemonic} {op}"),
            Statement::Instr {
                mnemonic,
                operand: None,
            } => write!(f, "{mnemonic}"),
            Statement::Org(addr) => write!(f, ".org 0x{addr:02X}"),
            Statement::Word(op) => write!(f, ".word {op}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceLine {
    /// 1-based line number in the original text (0 for generated lines).
    pub line: usize,
    pub label: Option<String>,
    pub statement: Option<Statement>,
    pub comment: Option<String>,
}

impl fmt::Display for SourceLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(l) = &self.label {
            parts.push(format!("{l}:"));
        }
        if let Some(s) = &self.statement {
            parts.push(s.to_string());
        }
        if let Some(c) = &self.comment {
            parts.push(format!(";{c}"));
        }
        f.write_str(&parts.join(" "))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceProgram {
    pub lines: Vec<SourceLine>,
}

impl fmt::Display for SourceProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            writeln!(f, "{l}")?;
        }
        Ok(())
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn parse_number(tok: &str) -> Option<u32> {
    if let Some(hex) = tok.strip_prefix("0x").or_else(|| tok.strip_prefix("0X")) {
        u32::from_str_radix(hex, 16).ok()
    } else if tok.bytes().all(|b| b.is_ascii_digit()) {
        tok.parse().ok()
    } else {
        None
    }
}

fn parse_operand(tok: &str, line: usize) -> Result<Operand, AsmError> {
    if let Some(n) = parse_number(tok) {
        Ok(Operand::Number(n))
    } else if is_identifier(tok) {
        Ok(Operand::Label(tok.to_string()))
    } else {
        Err(AsmError::Syntax {
            line,
            message: format!("bad operand `{tok}`"),
        })
    }
}

impl SourceProgram {
    pub fn parse(text: &str) -> Result<Self, AsmError> {
        let mut lines = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let (code, comment) = match raw.split_once(';') {
                Some((code, c)) => (code, Some(c.to_string())),
                None => (raw, None),
            };
            let mut rest = code.trim();
            let mut label = None;
            if let Some((head, tail)) = rest.split_once(':') {
                let head = head.trim();
                if !is_identifier(head) {
                    return Err(AsmError::Syntax {
                        line,
                        message: format!("bad label `{head}`"),
                    });
                }
                label = Some(head.to_string());
                rest = tail.trim();
            }
            let statement = if rest.is_empty() {
                None
            } else {
                Some(parse_statement(rest, line)?)
            };
            if label.is_none() && statement.is_none() && comment.is_none() {
                continue;
            }
            lines.push(SourceLine {
                line,
                label,
                statement,
                comment,
            });
        }
        Ok(SourceProgram { lines })
    }
}

fn parse_statement(text: &str, line: usize) -> Result<Statement, AsmError> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let syntax = |message: String| AsmError::Syntax { line, message };
    match tokens.as_slice() {
        [".org", arg] => parse_number(arg)
            .map(Statement::Org)
            .ok_or_else(|| syntax(format!("`.org` needs a number, got `{arg}`"))),
        [".word", arg] => Ok(Statement::Word(parse_operand(arg, line)?)),
        [d, ..] if d.starts_with('.') => Err(syntax(format!("bad directive `{text}`"))),
        [m, args @ ..] => {
            let mnemonic: Mnemonic = m.parse().map_err(|e| syntax(format!("{e}")))?;
            let operand = match args {
                [] => None,
                [op] => Some(parse_operand(op, line)?),
                _ => return Err(syntax(format!("too many operands in `{text}`"))),
            };
            match (mnemonic.is_memory_reference(), operand.is_some()) {
                (true, false) => Err(AsmError::MissingOperand { mnemonic, line }),
                (false, true) => Err(AsmError::UnexpectedOperand { mnemonic, line }),
                _ => Ok(Statement::Instr { mnemonic, operand }),
            }
        }
        [] => unreachable!("caller skips empty statements"),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ListingEntry {
    pub address: Address,
    pub words: Vec<Word>,
    pub source: String,
}

impl fmt::Display for ListingEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let hex: Vec<String> = self.words.iter().map(|w| format!("{w:02x}")).collect();
        write!(
            f,
            "{:02x}  {:<6} {}",
            self.address,
            hex.join(" "),
            self.source
        )
    }
}

#[derive(Debug, Clone)]
pub struct Assembly {
    pub image: MemoryImage,
    pub labels: HashMap<String, Address>,
    pub listing: Vec<ListingEntry>,
}

/// Assembles `src` with the placement counter starting at `origin`.
pub fn assemble(src: &SourceProgram, origin: Address) -> Result<Assembly, AsmError> {
    // Pass 1: label addresses.
    let mut defs: HashMap<&str, (u32, usize)> = HashMap::new();
    let mut pc = origin as u32;
    for l in &src.lines {
        if let Some(label) = &l.label {
            if let Some(&(_, first)) = defs.get(label.as_str()) {
                return Err(AsmError::DuplicateLabel {
                    label: label.clone(),
                    line: l.line,
                    first,
                });
            }
            defs.insert(label, (pc, l.line));
        }
        match &l.statement {
            Some(Statement::Org(addr)) => pc = *addr,
            Some(Statement::Instr { mnemonic, .. }) => pc += mnemonic.size() as u32,
            Some(Statement::Word(_)) => pc += 1,
            None => {}
        }
    }

    let resolve = |op: &Operand, line: usize| -> Result<Word, AsmError> {
        let value = match op {
            Operand::Number(n) => *n,
            Operand::Label(l) => {
                defs.get(l.as_str())
                    .ok_or_else(|| AsmError::UndefinedLabel {
                        label: l.clone(),
                        line,
                    })?
                    .0
            }
        };
        Word::try_from(value).map_err(|_| AsmError::ValueOutOfRange { line, value })
    };

    // Pass 2: emission.
    let mut image = MemoryImage::new();
    let mut written = [false; MEMORY_WORDS];
    let mut listing = Vec::new();
    let mut pc = origin as u32;
    for l in &src.lines {
        let words = match &l.statement {
            Some(Statement::Org(addr)) => {
                if *addr as usize > MEMORY_WORDS {
                    return Err(AsmError::ImageOverflow {
                        line: l.line,
                        address: *addr,
                    });
                }
                pc = *addr;
                continue;
            }
            Some(Statement::Instr { mnemonic, operand }) => {
                let mut w = vec![encode(*mnemonic)];
                if let Some(op) = operand {
                    w.push(resolve(op, l.line)?);
                }
                w
            }
            Some(Statement::Word(op)) => vec![resolve(op, l.line)?],
            None => continue,
        };
        let start = pc;
        for w in &words {
            if pc as usize >= MEMORY_WORDS {
                return Err(AsmError::ImageOverflow {
                    line: l.line,
                    address: pc,
                });
            }
            if written[pc as usize] {
                return Err(AsmError::Overlap {
                    line: l.line,
                    address: pc as Address,
                });
            }
            written[pc as usize] = true;
            image.write(pc as Address, *w);
            pc += 1;
        }
        listing.push(ListingEntry {
            address: start as Address,
            words,
            source: l.to_string(),
        });
    }

    let labels = defs
        .into_iter()
        .filter_map(|(k, (addr, _))| Some((k.to_string(), Address::try_from(addr).ok()?)))
        .collect();
    Ok(Assembly {
        image,
        labels,
        listing,
    })
}

/// Parses and assembles in one step.
pub fn assemble_str(text: &str, origin: Address) -> Result<Assembly, AsmError> {
    assemble(&SourceProgram::parse(text)?, origin)
}

/// Renders `count` cells starting at `start` as source.
///
/// Canonical opcode words become instructions (a memory reference consumes
/// the following cell as its operand); everything else, including a
/// memory-reference opcode in the last cell of the range, becomes `.word`.
/// Re-assembling the listing reproduces the covered cells bit for bit.
pub fn disassemble(img: &MemoryImage, start: Address, count: usize) -> SourceProgram {
    let end = (start as usize + count).min(MEMORY_WORDS);
    let mut lines = Vec::new();
    let mut push = |statement| {
        lines.push(SourceLine {
            line: 0,
            label: None,
            statement: Some(statement),
            comment: None,
        })
    };
    if start != 0 && count > 0 {
        push(Statement::Org(start as u32));
    }
    let mut addr = start as usize;
    while addr < end {
        let w = img.read(addr as Address);
        let m = decode(w);
        let canonical = encode(m) == w;
        if canonical && !m.is_memory_reference() {
            push(Statement::Instr {
                mnemonic: m,
                operand: None,
            });
            addr += 1;
        } else if canonical && addr + 1 < end {
            let target = img.read((addr + 1) as Address);
            push(Statement::Instr {
                mnemonic: m,
                operand: Some(Operand::Number(target as u32)),
            });
            addr += 2;
        } else {
            push(Statement::Word(Operand::Number(w as u32)));
            addr += 1;
        }
    }
    SourceProgram { lines }
}
