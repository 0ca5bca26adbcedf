//! Subarray representation and the layout-alignment reduction.
//!
//! A selection over an `N`-element switched array is stored as a bit mask
//! where bit `i` is antenna `i` (zero-based). Two layouts that differ only
//! by a translation along the array or by a reflection have identical
//! beampattern magnitudes, so the candidate set can be reduced to one
//! aligned representative per class before any metric is evaluated.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;

use crate::error::{Error, Result};

/// Largest array size representable by [`SelectionVector`].
pub const MAX_ANTENNAS: usize = 64;

/// Uniform linear array: `n_antennas` elements spaced `spacing` half-wavelengths apart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    n_antennas: usize,
    spacing: f64,
}

impl ArrayGeometry {
    pub fn new(n_antennas: usize, spacing: f64) -> Result<Self> {
        if !(2..=MAX_ANTENNAS).contains(&n_antennas) {
            return Err(Error::invalid(format!(
                "array size must be in 2..={MAX_ANTENNAS}, got {n_antennas}"
            )));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::invalid(format!("spacing must be positive, got {spacing}")));
        }
        Ok(Self { n_antennas, spacing })
    }

    pub fn n_antennas(&self) -> usize {
        self.n_antennas
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Position of antenna `index` in half-wavelength units.
    pub fn position(&self, index: usize) -> f64 {
        index as f64 * self.spacing
    }
}

/// Binary antenna selection over an `N`-element array.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct SelectionVector {
    mask: u64,
    len: u8,
}

impl SelectionVector {
    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        if bits.is_empty() || bits.len() > MAX_ANTENNAS {
            return Err(Error::invalid(format!(
                "selection length must be in 1..={MAX_ANTENNAS}, got {}",
                bits.len()
            )));
        }
        let mask = bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .fold(0u64, |acc, (i, _)| acc | (1 << i));
        if mask == 0 {
            return Err(Error::EmptySelection);
        }
        Ok(Self { mask, len: bits.len() as u8 })
    }

    /// Parses a string of `0`/`1` characters, first character is antenna 0.
    pub fn parse(text: &str) -> Result<Self> {
        let bits = text
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("unexpected character {other:?} in selection"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_bits(&bits)
    }

    pub fn from_indices(len: usize, indices: &[usize]) -> Result<Self> {
        if len == 0 || len > MAX_ANTENNAS {
            return Err(Error::invalid(format!("selection length must be in 1..={MAX_ANTENNAS}")));
        }
        let mut mask = 0u64;
        for &i in indices {
            if i >= len {
                return Err(Error::invalid(format!("antenna index {i} out of range for length {len}")));
            }
            mask |= 1 << i;
        }
        Self::from_mask(len, mask)
    }

    pub fn from_mask(len: usize, mask: u64) -> Result<Self> {
        if len == 0 || len > MAX_ANTENNAS {
            return Err(Error::invalid(format!("selection length must be in 1..={MAX_ANTENNAS}")));
        }
        if len < MAX_ANTENNAS && mask >> len != 0 {
            return Err(Error::invalid("mask has bits beyond the selection length"));
        }
        if mask == 0 {
            return Err(Error::EmptySelection);
        }
        Ok(Self { mask, len: len as u8 })
    }

    /// All `len` antennas selected.
    pub fn full(len: usize) -> Result<Self> {
        Self::from_mask(len, low_bits(len))
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn popcount(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn bit(&self, index: usize) -> bool {
        index < self.len() && self.mask >> index & 1 == 1
    }

    pub fn bits(&self) -> Vec<bool> {
        (0..self.len()).map(|i| self.bit(i)).collect()
    }

    /// Selected antenna indices in ascending order.
    pub fn indices(&self) -> Indices {
        Indices { rest: self.mask }
    }

    pub fn with_cleared(&self, index: usize) -> Result<Self> {
        Self::from_mask(self.len(), self.mask & !(1 << index))
    }

    /// Bitwise subset test: every antenna of `self` is also in `other`.
    pub fn is_subset_of(&self, other: &SelectionVector) -> bool {
        self.len == other.len && self.mask & !other.mask == 0
    }
}

/// Ascending iterator over the set bits of a mask.
#[derive(Debug, Clone)]
pub struct Indices {
    rest: u64,
}

impl Iterator for Indices {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.rest == 0 {
            return None;
        }
        let i = self.rest.trailing_zeros() as usize;
        self.rest &= self.rest - 1;
        Some(i)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.rest.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Indices {}

// Lexicographic over the ascending index lists, then by length.
impl Ord for SelectionVector {
    fn cmp(&self, other: &Self) -> Ordering {
        self.indices().cmp(other.indices()).then(self.len.cmp(&other.len))
    }
}

impl PartialOrd for SelectionVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for SelectionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            f.write_str(if self.bit(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for SelectionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SelectionVector({self})")
    }
}

/// Sorted antenna positions in half-wavelength units.
#[derive(Debug, Clone, PartialEq)]
pub struct Subarray {
    positions: Vec<f64>,
}

impl Subarray {
    pub fn new(positions: Vec<f64>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::EmptySelection);
        }
        if positions.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("positions must be finite"));
        }
        if positions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("positions must be strictly increasing"));
        }
        Ok(Self { positions })
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The same layout reflected about its centre (`max - d`), re-sorted.
    pub fn mirrored(&self) -> Subarray {
        let hi = self.positions[self.positions.len() - 1];
        let positions = self.positions.iter().rev().map(|p| hi - p).collect();
        Subarray { positions }
    }
}

pub fn positions_from_selection(b: &SelectionVector, g: &ArrayGeometry) -> Result<Subarray> {
    if b.len() != g.n_antennas() {
        return Err(Error::LengthMismatch { expected: g.n_antennas(), found: b.len() });
    }
    Ok(Subarray { positions: b.indices().map(|i| g.position(i)).collect() })
}

fn check_sizes(n: usize, m: usize) -> Result<()> {
    if n == 0 || n > MAX_ANTENNAS {
        return Err(Error::invalid(format!("N must be in 1..={MAX_ANTENNAS}, got {n}")));
    }
    if m == 0 {
        return Err(Error::invalid("M must be at least 1"));
    }
    if m > n {
        return Err(Error::invalid(format!("M = {m} exceeds N = {n}")));
    }
    Ok(())
}

/// Every `M`-of-`N` selection, in lexicographic order of the index sets.
pub fn enumerate_subarrays(n: usize, m: usize) -> Result<Vec<SelectionVector>> {
    check_sizes(n, m)?;
    Ok((0..n)
        .combinations(m)
        .map(|idx| SelectionVector {
            mask: idx.iter().fold(0u64, |acc, &i| acc | (1 << i)),
            len: n as u8,
        })
        .collect())
}

/// Weighted sum with the n-th (1-based) antenna weighted `2^(n-1)`,
/// which is the mask read as an integer.
pub fn score(b: &SelectionVector) -> u64 {
    b.mask
}

fn low_bits(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn shift_to_front(mask: u64) -> u64 {
    mask >> mask.trailing_zeros()
}

fn flip(mask: u64, len: usize) -> u64 {
    mask.reverse_bits() >> (64 - len)
}

/// Canonical representative of the translation/reflection class of `b`.
///
/// Both `b` and its reflection are shifted toward antenna 0 until the
/// leading element is active. The candidate whose mass sits further left
/// (the lower score) is kept; on a tie the unreflected one is returned.
pub fn align_layout(b: &SelectionVector) -> SelectionVector {
    let shifted = shift_to_front(b.mask);
    let flipped = shift_to_front(flip(b.mask, b.len()));
    // the mask is its own score
    let mask = if flipped < shifted { flipped } else { shifted };
    SelectionVector { mask, len: b.len }
}

/// Table row describing the full and reduced candidate sets for `(N, M)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniqueSetStats {
    pub n: usize,
    pub m: usize,
    pub total_count: u64,
    pub unique_count: u64,
    pub ratio: f64,
    pub greedy_evaluations: u64,
    pub switches_full: u64,
    pub switches_unique: u64,
}

impl UniqueSetStats {
    pub const CSV_HEADER: &'static str = "N,M,F,F_unique,ratio,G,S,S_unique";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.4},{},{},{}",
            self.n,
            self.m,
            self.total_count,
            self.unique_count,
            self.ratio,
            self.greedy_evaluations,
            self.switches_full,
            self.switches_unique
        )
    }
}

/// Number of TRA evaluations made by the greedy removal search.
pub fn greedy_evaluation_count(n: usize, m: usize) -> u64 {
    if m >= n {
        return 0;
    }
    ((n + m + 1) * (n - m) / 2) as u64
}

/// Aligned, deduplicated candidate set in ascending [`SelectionVector`] order.
pub fn unique_subarray_set(n: usize, m: usize) -> Result<(Vec<SelectionVector>, UniqueSetStats)> {
    let all = enumerate_subarrays(n, m)?;
    let total = all.len() as u64;
    let unique: Vec<SelectionVector> =
        all.iter().map(align_layout).collect::<BTreeSet<_>>().into_iter().collect();
    let (switches_full, switches_unique) = switch_counts(&unique, n, m);
    let stats = UniqueSetStats {
        n,
        m,
        total_count: total,
        unique_count: unique.len() as u64,
        ratio: unique.len() as f64 / total as f64,
        greedy_evaluations: greedy_evaluation_count(n, m),
        switches_full,
        switches_unique,
    };
    Ok((unique, stats))
}

/// `(fully connected, unique-set)` switch counts.
///
/// In the unique-set network RF chain `r` connects to the `r`-th selected
/// antenna (ascending position) of each aligned layout; the count is the
/// number of distinct `(chain, antenna)` pairs needed.
pub fn switch_counts(unique: &[SelectionVector], n: usize, m: usize) -> (u64, u64) {
    let mut reach = vec![0u64; m];
    for b in unique {
        for (r, i) in b.indices().enumerate().take(m) {
            reach[r] |= 1 << i;
        }
    }
    let connected = reach.iter().map(|r| r.count_ones() as u64).sum();
    ((m * n) as u64, connected)
}
