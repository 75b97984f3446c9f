//! Unit fractions: floored greedy Egyptian decompositions, the dyadic grid
//! read along anti-diagonals, and the online Kraft-Chaitin code builder.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed};
use thiserror::Error;

use crate::binstr::BitString;
use crate::numerics::{harmonic_segment, pow2, ratio, recip, Enclosure, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EgyptianError {
    #[error("only positive rationals have an Egyptian decomposition, got {0}")]
    NotPositive(String),
    #[error("denominator floor must be at least 2, got {0}")]
    FloorTooSmall(u64),
    #[error("denominator {m} at position {index} is below 2")]
    DenominatorTooSmall { index: usize, m: u64 },
    #[error("greedy denominator reached {bits} bits after {terms} terms")]
    DenominatorTooLarge { bits: u64, terms: usize },
    #[error("Kraft inequality violated by request {index} (length {length})")]
    KraftViolation { index: usize, length: usize },
}

/// Distinct unit fractions `1/d`. The entries before `greedy_from` are the
/// consecutive harmonic run `N, N+1, ...`; the rest come from the greedy
/// phase and strictly increase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitFractionList {
    pub denominators: Vec<BigUint>,
    pub greedy_from: usize,
}

impl UnitFractionList {
    pub fn sum(&self) -> Rational {
        self.denominators.iter().map(recip).sum()
    }

    pub fn greedy_part(&self) -> &[BigUint] {
        &self.denominators[self.greedy_from..]
    }
}

impl std::fmt::Display for UnitFractionList {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.denominators.iter().map(|d| format!("1/{d}")).collect();
        f.write_str(&parts.join(" + "))
    }
}

/// Writes `q` as distinct unit fractions with every denominator `>= floor`:
/// first the longest harmonic run `1/N + ... + 1/(N+k) <= q`, then greedy
/// steps `1/M` with `M = ceil(1/remainder)`.
///
/// Greedy denominators can grow doubly exponentially, so this may run for a
/// very long time; see [`egyptian_floor_capped`].
pub fn egyptian_floor(q: &Rational, floor: u64) -> Result<UnitFractionList, EgyptianError> {
    egyptian_floor_inner(q, floor, None)
}

/// [`egyptian_floor`], giving up once a denominator, or the denominator of
/// the remainder still to be written, exceeds `max_bits` bits.
pub fn egyptian_floor_capped(
    q: &Rational,
    floor: u64,
    max_bits: u64,
) -> Result<UnitFractionList, EgyptianError> {
    egyptian_floor_inner(q, floor, Some(max_bits))
}

fn egyptian_floor_inner(
    q: &Rational,
    floor: u64,
    max_bits: Option<u64>,
) -> Result<UnitFractionList, EgyptianError> {
    if !q.is_positive() {
        return Err(EgyptianError::NotPositive(q.to_string()));
    }
    if floor < 2 {
        return Err(EgyptianError::FloorTooSmall(floor));
    }
    let mut denominators = Vec::new();
    let mut rest = q.clone();
    let mut next = floor;
    loop {
        let term = ratio(1, next);
        if term > rest {
            break;
        }
        rest -= term;
        denominators.push(BigUint::from(next));
        next += 1;
        // A large q means an exponentially long run; its remainder's
        // denominator grows with it.
        if let Some(cap) = max_bits {
            let bits = rest.denom().bits();
            if bits > cap {
                return Err(EgyptianError::DenominatorTooLarge {
                    bits,
                    terms: denominators.len(),
                });
            }
        }
    }
    let greedy_from = denominators.len();
    while rest.is_positive() {
        let m = rest.recip().ceil().to_integer();
        if let Some(cap) = max_bits {
            if m.bits() > cap {
                return Err(EgyptianError::DenominatorTooLarge {
                    bits: m.bits(),
                    terms: denominators.len(),
                });
            }
        }
        rest -= Rational::new(BigInt::one(), m.clone());
        denominators.push(m.to_biguint().expect("positive denominator"));
    }
    debug_assert!(greedy_from == 0 || {
        let run = harmonic_segment(floor, floor + greedy_from as u64 - 1).unwrap();
        run <= *q
    });
    Ok(UnitFractionList {
        denominators,
        greedy_from,
    })
}

/// One nonzero grid entry `2^-exponent`, taken from the binary expansion of
/// `1/m` in grid row `row` (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DyadicTerm {
    pub row: usize,
    pub exponent: u32,
}

impl DyadicTerm {
    pub fn value(&self) -> Rational {
        pow2(-(self.exponent as i64))
    }
}

// Long division of 1/m yielding the positions of the one digits.
#[derive(Debug, Clone)]
struct ReciprocalDigits {
    m: u128,
    remainder: u128,
    position: u32,
}

impl Iterator for ReciprocalDigits {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        while self.remainder != 0 {
            self.remainder *= 2;
            self.position += 1;
            if self.remainder >= self.m {
                self.remainder -= self.m;
                return Some(self.position);
            }
        }
        None
    }
}

/// Emits the nonzero entries of the grid whose row `i` is the binary
/// expansion of `1/m_i`, anti-diagonal by anti-diagonal. Within a diagonal
/// rows are visited from the highest index down to row 0, so the first terms
/// for denominators `2, 3, 4, 5, 6` are `1/2, 1/4, 1/4, 1/16, 1/8, ...`.
pub struct DyadicDiagonal<I> {
    source: I,
    source_done: bool,
    rows: Vec<Option<ReciprocalDigits>>,
    pending: Vec<DyadicTerm>,
    failed: bool,
}

impl<I: Iterator<Item = u64>> DyadicDiagonal<I> {
    pub fn new(source: I) -> Self {
        DyadicDiagonal {
            source,
            source_done: false,
            rows: Vec::new(),
            pending: Vec::new(),
            failed: false,
        }
    }

    // Fills `pending` with the next diagonal, in reverse emission order.
    fn advance_pass(&mut self) -> Result<bool, EgyptianError> {
        if !self.source_done {
            match self.source.next() {
                Some(m) if m < 2 => {
                    return Err(EgyptianError::DenominatorTooSmall {
                        index: self.rows.len(),
                        m,
                    })
                }
                Some(m) => self.rows.push(Some(ReciprocalDigits {
                    m: m as u128,
                    remainder: 1,
                    position: 0,
                })),
                None => self.source_done = true,
            }
        }
        let mut any_alive = false;
        for (row, slot) in self.rows.iter_mut().enumerate() {
            if let Some(digits) = slot {
                match digits.next() {
                    Some(exponent) => {
                        self.pending.push(DyadicTerm { row, exponent });
                        any_alive = true;
                    }
                    None => *slot = None,
                }
            }
        }
        Ok(any_alive || !self.source_done)
    }
}

impl<I: Iterator<Item = u64>> Iterator for DyadicDiagonal<I> {
    type Item = Result<DyadicTerm, EgyptianError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        while self.pending.is_empty() {
            match self.advance_pass() {
                Ok(true) => {}
                Ok(false) => return None,
                Err(e) => {
                    self.failed = true;
                    return Some(Err(e));
                }
            }
        }
        // Rows were pushed top-down, so popping yields bottom-up order.
        self.pending.pop().map(Ok)
    }
}

/// The first `budget` diagonal terms for the given denominators.
pub fn dyadic_diagonal<I>(ms: I, budget: usize) -> Result<Vec<DyadicTerm>, EgyptianError>
where
    I: IntoIterator<Item = u64>,
{
    DyadicDiagonal::new(ms.into_iter()).take(budget).collect()
}

/// Words of a prefix-free code in the order they were assigned.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CodeAssignment {
    pub words: Vec<BitString>,
}

impl CodeAssignment {
    pub fn lengths(&self) -> Vec<usize> {
        self.words.iter().map(BitString::len).collect()
    }

    /// `sum 2^-|w|` over the assigned words.
    pub fn omega(&self) -> Rational {
        self.words.iter().map(BitString::weight).sum()
    }
}

/// Online prefix-free code builder. It keeps at most one free subtree per
/// depth (the binary digits of the unused measure) and serves each request
/// from the deepest free subtree that is still shallow enough.
#[derive(Debug, Clone)]
pub struct KraftChaitin {
    free: BTreeMap<usize, BitString>,
    assigned: usize,
}

impl Default for KraftChaitin {
    fn default() -> Self {
        Self::new()
    }
}

impl KraftChaitin {
    pub fn new() -> Self {
        let mut free = BTreeMap::new();
        free.insert(0, BitString::empty());
        KraftChaitin { free, assigned: 0 }
    }

    /// Assigns a word of exactly `length` bits, or reports the 1-based index
    /// of the request that would push the total measure above 1.
    pub fn push(&mut self, length: usize) -> Result<BitString, EgyptianError> {
        self.assigned += 1;
        let Some((&depth, _)) = self.free.range(..=length).next_back() else {
            return Err(EgyptianError::KraftViolation {
                index: self.assigned,
                length,
            });
        };
        let node = self.free.remove(&depth).unwrap();
        let mut path = node.clone();
        for _ in depth..length {
            self.free.insert(path.len() + 1, path.with_bit(true));
            path.push(false);
        }
        Ok(path)
    }

    /// Measure not yet handed out.
    pub fn remaining(&self) -> Rational {
        self.free.keys().map(|&d| pow2(-(d as i64))).sum()
    }
}

/// Runs a whole length sequence through a fresh [`KraftChaitin`].
pub fn kraft_chaitin<I>(lengths: I) -> Result<CodeAssignment, EgyptianError>
where
    I: IntoIterator<Item = usize>,
{
    let mut kc = KraftChaitin::new();
    let words = lengths
        .into_iter()
        .map(|n| kc.push(n))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CodeAssignment { words })
}

/// Feeds the first `budget` diagonal terms of the unit fractions `1/m_i`
/// into Kraft-Chaitin, giving a prefix-free set whose Omega number grows
/// towards `sum 1/m_i`.
pub fn unit_sum_to_prefix_free<I>(ms: I, budget: usize) -> Result<CodeAssignment, EgyptianError>
where
    I: IntoIterator<Item = u64>,
{
    let mut kc = KraftChaitin::new();
    let mut words = Vec::new();
    for term in DyadicDiagonal::new(ms.into_iter()).take(budget) {
        words.push(kc.push(term?.exponent as usize)?);
    }
    Ok(CodeAssignment { words })
}

/// `[Omega of the partial code, sum 1/m_i]` for a finite denominator list.
pub fn unit_sum_enclosure(ms: &[u64], budget: usize) -> Result<Enclosure, EgyptianError> {
    let code = unit_sum_to_prefix_free(ms.iter().copied(), budget)?;
    let total: Rational = ms.iter().map(|&m| ratio(1, m)).sum();
    let lo = code.omega();
    debug_assert!(lo <= total);
    Ok(Enclosure::new(lo, total).expect("partial sums stay below the total"))
}
