use std::fmt;
use std::str::FromStr;

use super::{Address, Word};

pub const MEMORY_WORDS: usize = 256;

/// A full 256-word store: code and data share one address space.
#[derive(Clone, PartialEq, Eq)]
pub struct MemoryImage {
    cells: [Word; MEMORY_WORDS],
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ImageError {
    #[error("token {index} (`{token}`) is not a two-digit hex byte")]
    BadByte { index: usize, token: String },
    #[error("memory image must hold exactly 256 bytes, found {0}")]
    WrongLength(usize),
}

impl MemoryImage {
    pub fn new() -> Self {
        MemoryImage {
            cells: [0; MEMORY_WORDS],
        }
    }

    pub fn from_cells(cells: [Word; MEMORY_WORDS]) -> Self {
        MemoryImage { cells }
    }

    /// Copies `words` starting at `origin`; anything past address 255 is dropped.
    pub fn with_words(origin: Address, words: &[Word]) -> Self {
        let mut img = MemoryImage::new();
        for (i, w) in words.iter().enumerate() {
            if let Some(cell) = img.cells.get_mut(origin as usize + i) {
                *cell = *w;
            }
        }
        img
    }

    pub fn read(&self, addr: Address) -> Word {
        self.cells[addr as usize]
    }

    pub fn write(&mut self, addr: Address, value: Word) {
        self.cells[addr as usize] = value;
    }

    pub fn cells(&self) -> &[Word; MEMORY_WORDS] {
        &self.cells
    }

    pub fn cells_mut(&mut self) -> &mut [Word; MEMORY_WORDS] {
        &mut self.cells
    }

    /// Addresses whose contents differ between `self` and `other`.
    pub fn diff<'a>(
        &'a self,
        other: &'a MemoryImage,
    ) -> impl Iterator<Item = (Address, Word, Word)> + 'a {
        self.cells
            .iter()
            .zip(other.cells.iter())
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(i, (a, b))| (i as Address, *a, *b))
    }

    /// Parses whitespace-separated hex bytes, consuming exactly 256 tokens
    /// from `tokens`.
    pub(crate) fn from_tokens<'a>(
        tokens: &mut impl Iterator<Item = &'a str>,
        index_base: usize,
    ) -> Result<Self, ImageError> {
        let mut img = MemoryImage::new();
        for i in 0..MEMORY_WORDS {
            let tok = tokens.next().ok_or(ImageError::WrongLength(i))?;
            img.cells[i] = parse_hex_byte(tok).ok_or_else(|| ImageError::BadByte {
                index: index_base + i,
                token: tok.to_string(),
            })?;
        }
        Ok(img)
    }
}

fn parse_hex_byte(tok: &str) -> Option<Word> {
    if tok.len() != 2 || !tok.bytes().all(|b| b.is_ascii_hexdigit()) {
        return None;
    }
    u8::from_str_radix(tok, 16).ok()
}

impl Default for MemoryImage {
    fn default() -> Self {
        MemoryImage::new()
    }
}

impl fmt::Debug for MemoryImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let used: Vec<_> = self
            .cells
            .iter()
            .enumerate()
            .filter(|(_, w)| **w != 0)
            .map(|(i, w)| format!("{i:02x}:{w:02x}"))
            .collect();
        write!(f, "MemoryImage[{}]", used.join(" "))
    }
}

/// Sixteen bytes per line, lowercase hex.
impl fmt::Display for MemoryImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.cells.chunks(16) {
            let line: Vec<String> = row.iter().map(|b| format!("{b:02x}")).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

impl FromStr for MemoryImage {
    type Err = ImageError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let count = s.split_whitespace().count();
        if count != MEMORY_WORDS {
            return Err(ImageError::WrongLength(count));
        }
        MemoryImage::from_tokens(&mut s.split_whitespace(), 0)
    }
}
