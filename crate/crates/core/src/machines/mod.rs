//! Machines described by their halting domains: finite tables, a few
//! generated families, and constructions that build new domains from old
//! ones. Streams enumerate a domain in length-lexicographic order together
//! with a bound on the weight still to come, which is what turns partial
//! sums into certified enclosures.

mod primes;
mod stream;
mod sums;

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::One;
use thiserror::Error;

use crate::binstr::{bin, bin_inv, is_prefix_free, BitString};
use crate::iota::Budgets;
use crate::numerics::{recip, NumericsError, Rational};

pub use primes::PrimeTable;
pub use stream::{domain_stream, DomainStream};
pub use sums::{
    classify, count_up_to_length, density_statistic, fresh_index, omega_enclosure, product_closed_form,
    sanity_chain, weighted_sum, weighted_sum_enumerated, zeta_enclosure, Class, SanityChain, Verdict,
    Weight,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MachineError {
    #[error("domain string {0} listed twice")]
    DuplicateWord(BitString),
    #[error("domain is not prefix-free: {0} is a prefix of {1}")]
    NotPrefixFree(BitString, BitString),
    #[error("{0} needs a finite table operand")]
    NeedsFiniteOperand(&'static str),
    #[error("product operand must not contain the empty string")]
    EmptyWordInProduct,
    #[error("declared zeta bound {declared} for member {member} is below the computed lower bound {computed}")]
    BoundBelowComputed {
        member: usize,
        declared: Box<Rational>,
        computed: Box<Rational>,
    },
    #[error("declared zeta bound for member {0} must be positive")]
    NonPositiveBound(usize),
    #[error("universal machine needs at least one member")]
    NoMembers,
    #[error("exponent s = {0} is outside the allowed range")]
    BadExponent(Box<Rational>),
    #[error("budget of {budget} domain strings exhausted before {what}")]
    BudgetExhausted { budget: usize, what: &'static str },
    #[error("no domain strings of length <= {0}")]
    EmptyCount(usize),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// A finite domain, optionally with an output string for each element.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FiniteTable {
    entries: BTreeMap<BitString, Option<BitString>>,
}

impl FiniteTable {
    pub fn new(domain: impl IntoIterator<Item = BitString>) -> Result<Self, MachineError> {
        Self::with_outputs(domain.into_iter().map(|w| (w, None)))
    }

    pub fn with_outputs(
        entries: impl IntoIterator<Item = (BitString, Option<BitString>)>,
    ) -> Result<Self, MachineError> {
        let mut map = BTreeMap::new();
        for (w, out) in entries {
            if map.contains_key(&w) {
                return Err(MachineError::DuplicateWord(w));
            }
            map.insert(w, out);
        }
        Ok(FiniteTable { entries: map })
    }

    /// Domain strings in length-lex order.
    pub fn domain(&self) -> impl Iterator<Item = &BitString> {
        self.entries.keys()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&BitString, Option<&BitString>)> {
        self.entries.iter().map(|(k, v)| (k, v.as_ref()))
    }

    pub fn output(&self, w: &BitString) -> Option<Option<&BitString>> {
        self.entries.get(w).map(Option::as_ref)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_prefix_free(&self) -> bool {
        is_prefix_free(self.entries.keys())
    }

    /// The first pair `(p, q)` with `p` a proper prefix of `q`, if any.
    pub fn prefix_violation(&self) -> Option<(BitString, BitString)> {
        let words: Vec<&BitString> = self.entries.keys().collect();
        let mut lex = words.clone();
        lex.sort_by(|a, b| a.bits().cmp(b.bits()));
        lex.windows(2)
            .find(|w| w[0].is_prefix_of(w[1]))
            .map(|w| (w[0].clone(), w[1].clone()))
    }

    pub fn require_prefix_free(&self) -> Result<(), MachineError> {
        match self.prefix_violation() {
            Some((p, q)) => Err(MachineError::NotPrefixFree(p, q)),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Builtin {
    /// Every binary string.
    AllStrings,
    /// Pre-order codes of full binary trees, `L = 0 | 1 L L`.
    Lukasiewicz,
    /// Iota programs that reach a normal form within the budgets.
    Iota(Budgets),
    /// `{0^i 1 | i >= start}` together with finitely many extra strings.
    Geometric { start: usize, extra: Vec<BitString> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvergentMember {
    pub machine: MachineSpec,
    /// Trusted upper bound on the member's zeta number.
    pub bound: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MachineSpec {
    Finite(FiniteTable),
    Builtin(Builtin),
    /// Concatenations `p1 p2 ... pn` (n >= 0) of operand strings with
    /// nondecreasing `bin_inv`.
    Product(Box<MachineSpec>),
    /// `{xx | x in dom}`.
    Double(Box<MachineSpec>),
    /// Union of the sets `X(p)` over the operand domain.
    TuataraOf(Box<MachineSpec>),
    /// `{0^i 1 x | x in dom(C_i)}` for members `C_1, C_2, ...`.
    UniversalTuatara(Vec<MachineSpec>),
    /// `{0^J(i,M) 1 x | x in dom(C)}` where `M` is the member's rounded-up
    /// bound and `i` its position among members with the same `M`.
    UniversalConvergent(Vec<ConvergentMember>),
    /// `bin(n)` for every `n` whose prime factors all have the form `p_i`
    /// with `bin(i)` in the operand domain.
    PrimeProduct(Box<MachineSpec>),
}

impl MachineSpec {
    pub fn finite(domain: impl IntoIterator<Item = BitString>) -> Result<Self, MachineError> {
        Ok(MachineSpec::Finite(FiniteTable::new(domain)?))
    }

    /// Finite table from string literals; panics on malformed input.
    pub fn finite_from_strs(domain: &[&str]) -> Self {
        Self::finite(domain.iter().map(|s| s.parse().expect("bit string"))).expect("distinct strings")
    }

    pub fn as_finite(&self) -> Option<&FiniteTable> {
        match self {
            MachineSpec::Finite(t) => Some(t),
            _ => None,
        }
    }

    /// Structural checks, plus validation of declared zeta bounds against a
    /// lower bound computed from `budget` domain strings.
    pub fn validate(&self, budget: usize) -> Result<(), MachineError> {
        match self {
            MachineSpec::Finite(_) => Ok(()),
            MachineSpec::Builtin(Builtin::Geometric { start, extra }) => {
                for w in extra {
                    let is_spine = w.len() > *start
                        && w.hamming_weight() == 1
                        && w.bits().last() == Some(&true);
                    if is_spine {
                        return Err(MachineError::DuplicateWord(w.clone()));
                    }
                }
                let mut sorted = extra.clone();
                sorted.sort();
                if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
                    return Err(MachineError::DuplicateWord(w[0].clone()));
                }
                Ok(())
            }
            MachineSpec::Builtin(_) => Ok(()),
            MachineSpec::Product(c) => {
                let t = c.as_finite().ok_or(MachineError::NeedsFiniteOperand("product"))?;
                if t.domain().any(BitString::is_empty) {
                    return Err(MachineError::EmptyWordInProduct);
                }
                t.require_prefix_free()
            }
            MachineSpec::Double(c) | MachineSpec::PrimeProduct(c) => c.validate(budget),
            MachineSpec::TuataraOf(c) => {
                if let Some(t) = c.as_finite() {
                    t.require_prefix_free()?;
                }
                c.validate(budget)
            }
            MachineSpec::UniversalTuatara(members) => {
                if members.is_empty() {
                    return Err(MachineError::NoMembers);
                }
                members.iter().try_for_each(|m| m.validate(budget))
            }
            MachineSpec::UniversalConvergent(members) => {
                if members.is_empty() {
                    return Err(MachineError::NoMembers);
                }
                for (idx, m) in members.iter().enumerate() {
                    if m.bound <= Rational::from_integer(0.into()) {
                        return Err(MachineError::NonPositiveBound(idx + 1));
                    }
                    m.machine.validate(budget)?;
                    let z = zeta_enclosure(&m.machine, budget)?;
                    if z.lo() > &m.bound {
                        return Err(MachineError::BoundBelowComputed {
                            member: idx + 1,
                            declared: Box::new(m.bound.clone()),
                            computed: Box::new(z.lo().clone()),
                        });
                    }
                }
                Ok(())
            }
        }
    }
}

/// `X(p) = {p} ∪ {p 0^i | the i-th bit of p is 1}` in length-lex order,
/// with its exact sum of `1/bin_inv`.
pub fn tuatara_unit_identity(p: &BitString) -> (Vec<BitString>, Rational) {
    let set = x_set(p);
    let sum = set.iter().map(|x| recip(&bin_inv(x))).sum();
    (set, sum)
}

pub(crate) fn x_set(p: &BitString) -> Vec<BitString> {
    let mut out = vec![p.clone()];
    for (i, &b) in p.bits().iter().enumerate() {
        if b {
            out.push(p.concat(&BitString::zeros(i + 1)));
        }
    }
    out
}

/// Checks `0^i 1 bin(n) = bin(2^(i+1+floor(log2 n)) + n)`.
pub fn universal_prefix_identity(i: u32, n: u64) -> bool {
    assert!(n >= 1);
    let lhs = BitString::zeros(i as usize)
        .with_bit(true)
        .concat(&crate::binstr::bin_u64(n).expect("n >= 1"));
    let log = 63 - n.leading_zeros();
    let value = (BigUint::one() << (i + 1 + log)) + BigUint::from(n);
    bin(&value).is_ok_and(|rhs| rhs == lhs)
}

/// `J(i, M) = 2^i (2M + 1) - 1`.
pub fn j_pairing(i: u32, m: &BigUint) -> BigUint {
    (BigUint::one() << i) * (m * 2u32 + 1u32) - 1u32
}

/// Prefix lengths `J(i, M)` used for the members of a universal convergent
/// machine.
pub fn convergent_prefix_lengths(members: &[ConvergentMember]) -> Vec<BigUint> {
    let mut seen: BTreeMap<BigUint, u32> = BTreeMap::new();
    members
        .iter()
        .map(|m| {
            let ceil = m.bound.ceil().to_integer().to_biguint().unwrap_or_default();
            let m_int = ceil.max(BigUint::one());
            let i = seen.entry(m_int.clone()).or_insert(0);
            *i += 1;
            j_pairing(*i, &m_int)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{pow2, ratio};

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn x_set_examples() {
        let (set, sum) = tuatara_unit_identity(&bs("1011"));
        let names: Vec<String> = set.iter().map(|w| w.to_string()).collect();
        assert_eq!(names, ["1011", "10110", "1011000", "10110000"]);
        assert_eq!(sum, ratio(1, 16));
        let parts = ratio(1, 27) + ratio(1, 54) + ratio(1, 216) + ratio(1, 432);
        assert_eq!(parts, ratio(1, 16));
        let (set, sum) = tuatara_unit_identity(&bs("1"));
        assert_eq!(set, vec![bs("1"), bs("10")]);
        assert_eq!(sum, ratio(1, 2));
        let (set, sum) = tuatara_unit_identity(&bs("0"));
        assert_eq!(set, vec![bs("0")]);
        assert_eq!(sum, ratio(1, 2));
    }

    #[test]
    fn x_set_size_and_sum_exhaustive() {
        for len in 1..=12usize {
            for v in 0u32..1 << len {
                let p = BitString::from_bits((0..len).rev().map(|i| v >> i & 1 == 1).collect());
                let (set, sum) = tuatara_unit_identity(&p);
                assert_eq!(set.len(), p.hamming_weight() + 1);
                assert_eq!(sum, pow2(-(len as i64)), "p = {p}");
            }
        }
    }

    #[test]
    fn prefix_identity_examples() {
        assert!(universal_prefix_identity(1, 3));
        assert!(universal_prefix_identity(2, 1));
        for i in 0..=8 {
            for n in 1..=1024 {
                assert!(universal_prefix_identity(i, n));
            }
        }
    }

    #[test]
    fn j_pairing_values_and_injectivity() {
        assert_eq!(j_pairing(1, &BigUint::one()), BigUint::from(5u32));
        assert_eq!(j_pairing(2, &BigUint::one()), BigUint::from(11u32));
        let mut seen = std::collections::BTreeSet::new();
        for i in 1..=16 {
            for m in 1..=16u32 {
                assert!(seen.insert(j_pairing(i, &BigUint::from(m))));
            }
        }
    }

    #[test]
    fn convergent_prefixes_index_within_bound_class() {
        let t = MachineSpec::finite_from_strs(&["0"]);
        let members = vec![
            ConvergentMember { machine: t.clone(), bound: ratio(1, 2) },
            ConvergentMember { machine: t.clone(), bound: ratio(3, 2) },
            ConvergentMember { machine: t, bound: ratio(1, 1) },
        ];
        let js = convergent_prefix_lengths(&members);
        // (i, M) = (1, 1), (1, 2), (2, 1).
        assert_eq!(js, vec![BigUint::from(5u32), BigUint::from(9u32), BigUint::from(11u32)]);
    }

    #[test]
    fn validation_rejects_bad_specs() {
        let dup = FiniteTable::new([bs("0"), bs("0")]);
        assert_eq!(dup, Err(MachineError::DuplicateWord(bs("0"))));
        let not_pf = MachineSpec::finite_from_strs(&["0", "01"]);
        assert!(matches!(
            MachineSpec::TuataraOf(Box::new(not_pf.clone())).validate(10),
            Err(MachineError::NotPrefixFree(..))
        ));
        assert!(MachineSpec::Product(Box::new(not_pf)).validate(10).is_err());
        let lam = MachineSpec::finite_from_strs(&["eps"]);
        assert_eq!(
            MachineSpec::Product(Box::new(lam)).validate(10),
            Err(MachineError::EmptyWordInProduct)
        );
        let heavy = ConvergentMember {
            machine: MachineSpec::finite_from_strs(&["eps", "0"]),
            bound: ratio(1, 1),
        };
        assert!(matches!(
            MachineSpec::UniversalConvergent(vec![heavy]).validate(10),
            Err(MachineError::BoundBelowComputed { member: 1, .. })
        ));
        let geo = MachineSpec::Builtin(Builtin::Geometric { start: 0, extra: vec![bs("001")] });
        assert!(geo.validate(10).is_err());
    }
}
