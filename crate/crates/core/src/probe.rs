//! Probe sequences and probe sets.
//!
//! Probes are stored as packed 2-bit symbols, 32 nucleotides per `u64`, so
//! the Hamming distance between two probes is a handful of XOR/popcount
//! operations per word.

use std::fmt;
use std::str::FromStr;

use crate::error::{BlmpError, Result};

const BASES_PER_WORD: usize = 32;
const LOW_BITS: u64 = 0x5555_5555_5555_5555;

/// One nucleotide of the probe alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Base {
    A = 0,
    C = 1,
    G = 2,
    T = 3,
}

impl Base {
    pub const ALL: [Base; 4] = [Base::A, Base::C, Base::G, Base::T];

    pub fn from_char(c: char) -> Option<Base> {
        match c {
            'A' => Some(Base::A),
            'C' => Some(Base::C),
            'G' => Some(Base::G),
            'T' => Some(Base::T),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Base::A => 'A',
            Base::C => 'C',
            Base::G => 'G',
            Base::T => 'T',
        }
    }

    fn from_bits(bits: u64) -> Base {
        Base::ALL[(bits & 3) as usize]
    }
}

fn words_for(len: usize) -> usize {
    len.div_ceil(BASES_PER_WORD)
}

fn pack_into(bases: impl IntoIterator<Item = Base>, words: &mut [u64]) {
    for (i, b) in bases.into_iter().enumerate() {
        words[i / BASES_PER_WORD] |= (b as u64) << (2 * (i % BASES_PER_WORD));
    }
}

#[inline]
fn packed_distance(a: &[u64], b: &[u64]) -> u32 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x ^ y;
            ((d | (d >> 1)) & LOW_BITS).count_ones()
        })
        .sum()
}

/// A DNA probe: a fixed-length sequence over `{A, C, G, T}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Probe {
    len: usize,
    words: Vec<u64>,
}

impl Probe {
    pub fn from_bases(bases: &[Base]) -> Probe {
        let mut words = vec![0; words_for(bases.len())];
        pack_into(bases.iter().copied(), &mut words);
        Probe {
            len: bases.len(),
            words,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn base(&self, i: usize) -> Base {
        assert!(
            i < self.len,
            "base index {i} out of range for probe of length {}",
            self.len
        );
        Base::from_bits(self.words[i / BASES_PER_WORD] >> (2 * (i % BASES_PER_WORD)))
    }

    pub fn bases(&self) -> impl Iterator<Item = Base> + '_ {
        (0..self.len).map(move |i| self.base(i))
    }
}

impl FromStr for Probe {
    type Err = BlmpError;

    fn from_str(s: &str) -> Result<Probe> {
        let bases = s
            .chars()
            .enumerate()
            .map(|(i, c)| {
                Base::from_char(c).ok_or_else(|| {
                    BlmpError::invalid(format!("illegal symbol {c:?} at position {}", i + 1))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Probe::from_bases(&bases))
    }
}

impl fmt::Display for Probe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.bases().try_for_each(|b| write!(f, "{}", b.to_char()))
    }
}

impl fmt::Debug for Probe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Probe({self})")
    }
}

/// Number of positions at which two equal-length probes differ.
pub fn hamming(a: &Probe, b: &Probe) -> Result<u32> {
    if a.len != b.len {
        return Err(BlmpError::invalid(format!(
            "probe length mismatch: {} vs {}",
            a.len, b.len
        )));
    }
    Ok(packed_distance(&a.words, &b.words))
}

/// 1-based probe index into a [`ProbeSet`].
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize,
)]
#[serde(transparent)]
pub struct ProbeId(u32);

impl ProbeId {
    /// Panics on zero; probe ids are 1-based.
    pub fn new(id: u32) -> ProbeId {
        assert!(id > 0, "probe ids are 1-based");
        ProbeId(id)
    }

    pub(crate) fn from_index(index: usize) -> ProbeId {
        ProbeId(index as u32 + 1)
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// Zero-based position in the probe list.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for ProbeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

/// The input set of `dim²` probes of a common length, indexed `1..=dim²`.
#[derive(Clone, PartialEq, Eq)]
pub struct ProbeSet {
    dim: usize,
    probe_length: usize,
    words_per_probe: usize,
    packed: Vec<u64>,
    /// Row-major `len() x len()` distances; empty above `TABLE_MAX_PROBES`.
    table: Vec<u32>,
}

const TABLE_MAX_PROBES: usize = 2048;

impl ProbeSet {
    pub fn new(dim: usize, probes: Vec<Probe>) -> Result<ProbeSet> {
        if dim == 0 {
            return Err(BlmpError::invalid("dim must be positive"));
        }
        if probes.len() != dim * dim {
            return Err(BlmpError::invalid(format!(
                "expected {} probes for dim={dim}, got {}",
                dim * dim,
                probes.len()
            )));
        }
        let probe_length = probes[0].len();
        if probe_length == 0 {
            return Err(BlmpError::invalid("probe length must be positive"));
        }
        if let Some((i, p)) = probes
            .iter()
            .enumerate()
            .find(|(_, p)| p.len() != probe_length)
        {
            return Err(BlmpError::invalid(format!(
                "probe {} has length {}, expected {probe_length}",
                i + 1,
                p.len()
            )));
        }
        let words_per_probe = words_for(probe_length);
        let packed = probes.into_iter().flat_map(|p| p.words).collect();
        let mut sp = ProbeSet {
            dim,
            probe_length,
            words_per_probe,
            packed,
            table: Vec::new(),
        };
        sp.build_table();
        Ok(sp)
    }

    /// Parses one sequence per probe, in id order.
    pub fn from_strs<S: AsRef<str>>(dim: usize, seqs: &[S]) -> Result<ProbeSet> {
        let probes = seqs
            .iter()
            .map(|s| s.as_ref().parse())
            .collect::<Result<Vec<Probe>>>()?;
        ProbeSet::new(dim, probes)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn probe_length(&self) -> usize {
        self.probe_length
    }

    pub fn len(&self) -> usize {
        self.dim * self.dim
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn build_table(&mut self) {
        let n = self.len();
        if n > TABLE_MAX_PROBES {
            return;
        }
        let mut table = vec![0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = packed_distance(self.words(i), self.words(j));
                table[i * n + j] = d;
                table[j * n + i] = d;
            }
        }
        self.table = table;
    }

    fn words(&self, index: usize) -> &[u64] {
        let start = index * self.words_per_probe;
        &self.packed[start..start + self.words_per_probe]
    }

    pub fn probe(&self, id: ProbeId) -> Probe {
        Probe {
            len: self.probe_length,
            words: self.words(id.index()).to_vec(),
        }
    }

    pub fn probes(&self) -> impl Iterator<Item = Probe> + '_ {
        (0..self.len()).map(|i| self.probe(ProbeId::from_index(i)))
    }

    pub fn ids(&self) -> impl Iterator<Item = ProbeId> {
        (0..self.len()).map(ProbeId::from_index)
    }

    #[inline]
    pub fn distance(&self, a: ProbeId, b: ProbeId) -> u32 {
        if self.table.is_empty() {
            packed_distance(self.words(a.index()), self.words(b.index()))
        } else {
            self.table[a.index() * self.len() + b.index()]
        }
    }

    /// Keeps the first `dim²` probes of a larger set, for carving small
    /// instances out of a fixture.
    pub fn prefix(&self, dim: usize) -> Result<ProbeSet> {
        if dim == 0 || dim * dim > self.len() {
            return Err(BlmpError::invalid(format!(
                "cannot take {}-probe prefix of a {}-probe set",
                dim * dim,
                self.len()
            )));
        }
        ProbeSet::new(dim, self.probes().take(dim * dim).collect())
    }
}

impl fmt::Debug for ProbeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProbeSet")
            .field("dim", &self.dim)
            .field("probe_length", &self.probe_length)
            .field("probes", &self.probes().collect::<Vec<_>>())
            .finish()
    }
}
