//! Weighted sums over domains: Omega and zeta enclosures, classification,
//! counts and the fresh-index search.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use super::stream::domain_stream;
use super::{Builtin, FiniteTable, MachineError, MachineSpec, PrimeTable};
use crate::binstr::{bin, bin_inv, rational_of_prefix, BitString};
use crate::numerics::{int, ln2_enclosure, ln_enclosure, pow2, pow_neg_enclosure, recip, Enclosure, IntervalSum, Rational};
use crate::spectral::riemann_zeta;

const PREC: u32 = 128;

/// Weight of a domain string: `2^(-s|w|)` for Omega-type sums and
/// `bin_inv(w)^(-s)` for zeta-type sums.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Weight {
    Omega(Rational),
    Zeta(Rational),
}

impl Weight {
    pub fn omega() -> Self {
        Weight::Omega(Rational::one())
    }

    pub fn zeta() -> Self {
        Weight::Zeta(Rational::one())
    }

    pub fn exponent(&self) -> &Rational {
        match self {
            Weight::Omega(s) | Weight::Zeta(s) => s,
        }
    }

    pub fn of(&self, w: &BitString) -> Enclosure {
        match self {
            Weight::Omega(s) if s.is_integer() => {
                let e = s.to_integer() * BigInt::from(w.len());
                Enclosure::exact(pow2(-i64::try_from(e).expect("exponent fits")))
            }
            Weight::Omega(s) => pow_neg_enclosure(&(BigUint::one() << w.len()), s, PREC),
            Weight::Zeta(s) => pow_neg_enclosure(&bin_inv(w), s, PREC),
        }
    }

    fn check(&self) -> Result<(), MachineError> {
        let s = self.exponent();
        if *s <= Rational::zero() {
            return Err(MachineError::BadExponent(Box::new(s.clone())));
        }
        Ok(())
    }
}

// Enumeration stops once the rest weighs less than this many bits, below
// the rounding of the running sum.
const NEGLIGIBLE_TAIL_BITS: u32 = 200;

fn is_checkpoint(k: usize) -> bool {
    k < 64 || k.is_power_of_two()
}

/// Enclosure of the weighted sum from the domain stream alone: the first
/// `budget` strings plus the stream's bound on the rest. Finite tables are
/// summed in full.
pub fn weighted_sum_enumerated(spec: &MachineSpec, weight: &Weight, budget: usize) -> Result<Enclosure, MachineError> {
    weight.check()?;
    if let MachineSpec::Finite(t) = spec {
        let mut sum = IntervalSum::exact();
        for w in t.domain() {
            sum.add_bounds(&weight.of(w));
        }
        return Ok(sum.enclosure());
    }
    let mut stream = domain_stream(spec)?;
    let mut sum = IntervalSum::for_streams();
    let mut best: Option<Rational> = None;
    let mut update = |sum: &IntervalSum, rest: Option<Rational>| {
        if let Some(r) = rest {
            let hi = sum.hi() + r;
            if best.as_ref().is_none_or(|b| hi < *b) {
                best = Some(hi);
            }
        }
    };
    let negligible = pow2(-(NEGLIGIBLE_TAIL_BITS as i64));
    for k in 0..budget {
        if is_checkpoint(k) {
            let rest = stream.remaining_bound(weight);
            let done = rest.as_ref().is_some_and(|r| *r < negligible);
            update(&sum, rest);
            if done {
                return Ok(Enclosure::new(sum.lo().clone(), best.expect("just set").max(sum.lo().clone()))?);
            }
        }
        match stream.next_word() {
            Some(w) => sum.add_bounds(&weight.of(&w)),
            None => break,
        }
    }
    update(&sum, stream.remaining_bound(weight));
    Ok(match best {
        Some(hi) => Enclosure::new(sum.lo().clone(), hi.max(sum.lo().clone()))?,
        None => Enclosure::unbounded_above(sum.lo().clone()),
    })
}

/// Like [`weighted_sum_enumerated`], intersected with a closed form when
/// one is known for the machine.
pub fn weighted_sum(spec: &MachineSpec, weight: &Weight, budget: usize) -> Result<Enclosure, MachineError> {
    let direct = weighted_sum_enumerated(spec, weight, budget)?;
    Ok(match closed_form(spec, weight, budget)? {
        Some(c) => direct.intersect(&c).unwrap_or(direct),
        None => direct,
    })
}

pub fn omega_enclosure(spec: &MachineSpec, budget: usize) -> Result<Enclosure, MachineError> {
    weighted_sum(spec, &Weight::omega(), budget)
}

pub fn zeta_enclosure(spec: &MachineSpec, budget: usize) -> Result<Enclosure, MachineError> {
    weighted_sum(spec, &Weight::zeta(), budget)
}

/// `1 / (1 - x)` for `x` in `e`, with `e.hi() < 1`.
fn geometric(e: &Enclosure) -> Enclosure {
    let one = Rational::one();
    let lo = &one / (&one - e.lo());
    let hi = &one / (&one - e.hi().expect("bounded"));
    Enclosure::new(lo, hi).expect("monotone")
}

fn closed_form(spec: &MachineSpec, weight: &Weight, budget: usize) -> Result<Option<Enclosure>, MachineError> {
    let one = Rational::one();
    let s = weight.exponent();
    Ok(match (spec, weight) {
        (MachineSpec::Builtin(Builtin::AllStrings), Weight::Omega(_)) if *s > one => {
            Some(geometric(&pow_neg_enclosure(&BigUint::from(2u32), &(s - &one), PREC)))
        }
        (MachineSpec::Builtin(Builtin::AllStrings), Weight::Zeta(_)) if *s > one => Some(riemann_zeta(s, budget.max(1))?),
        (MachineSpec::Builtin(Builtin::Lukasiewicz), Weight::Omega(_)) if s.is_one() => Some(Enclosure::exact(one)),
        (MachineSpec::Builtin(Builtin::Geometric { start, extra }), Weight::Omega(_)) => {
            let x = pow_neg_enclosure(&BigUint::from(2u32), s, PREC);
            let first = pow_neg_enclosure(&(BigUint::one() << (start + 1)), s, PREC);
            let mut e = first.mul_nonneg(&geometric(&x));
            for w in extra {
                e = e.add(&weight.of(w));
            }
            Some(e)
        }
        (MachineSpec::Product(c), Weight::Omega(_)) => match c.as_finite() {
            Some(t) => Some(product_closed_form(t, s)?),
            None => None,
        },
        (MachineSpec::PrimeProduct(c), Weight::Zeta(_)) if *s > one => match c.as_finite() {
            Some(t) => euler_product(t, s),
            None => None,
        },
        _ => None,
    })
}

/// `prod_{p in dom} 1/(1 - 2^(-s|p|))`, the Omega_s value of the product
/// machine (the empty concatenation included).
pub fn product_closed_form(operand: &FiniteTable, s: &Rational) -> Result<Enclosure, MachineError> {
    if *s <= Rational::zero() {
        return Err(MachineError::BadExponent(Box::new(s.clone())));
    }
    if operand.domain().any(BitString::is_empty) {
        return Err(MachineError::EmptyWordInProduct);
    }
    let mut e = Enclosure::exact(Rational::one());
    for p in operand.domain() {
        let x = pow_neg_enclosure(&(BigUint::one() << p.len()), s, PREC);
        e = e.mul_nonneg(&geometric(&x));
    }
    Ok(e)
}

/// `prod_{p in P} 1/(1 - p^-s)` for the primes indexed by the table; `None`
/// when an index is too large to sieve.
fn euler_product(operand: &FiniteTable, s: &Rational) -> Option<Enclosure> {
    let mut table = PrimeTable::new();
    let mut e = Enclosure::exact(Rational::one());
    for w in operand.domain() {
        let i = u32::try_from(bin_inv(w)).ok().filter(|&i| i <= 1 << 20)?;
        let p = BigUint::from(table.nth(i as usize));
        e = e.mul_nonneg(&geometric(&pow_neg_enclosure(&p, s, PREC)));
    }
    Some(e)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Class {
    Divergent,
    /// Finite sum greater than one.
    Convergent,
    /// Sum at most one.
    Tuatara,
    Unknown,
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Class::Divergent => "divergent",
            Class::Convergent => "convergent",
            Class::Tuatara => "tuatara",
            Class::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub class: Class,
    pub certified: bool,
    pub witness: Enclosure,
}

fn verdict(e: Enclosure) -> Verdict {
    let one = Rational::one();
    let class = match e.hi() {
        Some(hi) if *hi <= one => Class::Tuatara,
        Some(_) if *e.lo() > one => Class::Convergent,
        _ => Class::Unknown,
    };
    Verdict {
        certified: class != Class::Unknown,
        class,
        witness: e,
    }
}

fn tighten(e: &Enclosure, lo: Rational, hi: Option<Rational>) -> Enclosure {
    let lo = lo.max(e.lo().clone());
    let hi = match (e.hi(), hi) {
        (Some(a), Some(b)) => Some(a.clone().min(b)),
        (a, b) => a.cloned().or(b),
    };
    match hi {
        Some(h) if h >= lo => Enclosure::new(lo, h).expect("ordered"),
        Some(_) => e.clone(),
        None => Enclosure::unbounded_above(lo),
    }
}

/// Zeta and Omega verdicts. Uses `zeta <= Omega <= 2 zeta`, which holds
/// term by term, to sharpen each enclosure with the other. Divergence is
/// only ever certified for the all-strings machine.
pub fn classify(spec: &MachineSpec, budget: usize) -> Result<(Verdict, Verdict), MachineError> {
    let z = zeta_enclosure(spec, budget)?;
    let o = omega_enclosure(spec, budget)?;
    if matches!(spec, MachineSpec::Builtin(Builtin::AllStrings)) {
        let div = |w| Verdict {
            class: Class::Divergent,
            certified: true,
            witness: w,
        };
        return Ok((div(z), div(o)));
    }
    let two = int(2);
    let z2 = tighten(&z, o.lo() / &two, o.hi().cloned());
    let o2 = tighten(&o, z.lo().clone(), z.hi().map(|h| h * &two));
    Ok((verdict(z2), verdict(o2)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SanityChain {
    pub omega: Rational,
    pub zeta: Rational,
    /// `1 >= Omega >= zeta >= Omega/2 >= 0`.
    pub holds: bool,
    /// True when the domain is nonempty and no `bin_inv` is a power of two.
    pub strict_expected: bool,
    /// `1 > Omega > zeta > Omega/2 > 0`.
    pub strict_holds: bool,
}

pub fn sanity_chain(table: &FiniteTable) -> Result<SanityChain, MachineError> {
    table.require_prefix_free()?;
    let omega: Rational = table.domain().map(BitString::weight).sum();
    let zeta: Rational = table.domain().map(|w| recip(&bin_inv(w))).sum();
    let one = Rational::one();
    let zero = Rational::zero();
    let half = &omega / int(2);
    let holds = one >= omega && omega >= zeta && zeta >= half && half >= zero;
    let strict_holds = one > omega && omega > zeta && zeta > half && half > zero;
    let strict_expected = !table.is_empty()
        && table.domain().all(|w| {
            let n = bin_inv(w);
            (&n & (&n - 1u32)) != BigUint::zero()
        });
    Ok(SanityChain {
        omega,
        zeta,
        holds,
        strict_expected,
        strict_holds,
    })
}

/// Number of domain strings of length `<= len`, from the stream's count
/// when it has one, else by enumerating at most `budget` strings.
pub fn count_up_to_length(spec: &MachineSpec, len: usize, budget: usize) -> Result<BigUint, MachineError> {
    let mut stream = domain_stream(spec)?;
    if let Some(c) = stream.count_up_to_length(len) {
        return Ok(c);
    }
    let mut count = BigUint::zero();
    for _ in 0..budget {
        match stream.next_word() {
            Some(w) if w.len() > len => return Ok(count),
            Some(_) => count += 1u32,
            None => {
                return if stream.remaining_bound(&Weight::omega()) == Some(Rational::zero()) {
                    Ok(count)
                } else {
                    Err(MachineError::BudgetExhausted { budget, what: "the stream ended early" })
                };
            }
        }
    }
    Err(MachineError::BudgetExhausted {
        budget,
        what: "all strings up to the length were counted",
    })
}

/// `(1/n) log2 #{w in dom | |w| <= n}`, as an enclosure.
pub fn density_statistic(spec: &MachineSpec, n: usize, budget: usize) -> Result<Enclosure, MachineError> {
    assert!(n >= 1);
    let count = count_up_to_length(spec, n, budget)?;
    if count.is_zero() {
        return Err(MachineError::EmptyCount(n));
    }
    let c = Rational::from_integer(BigInt::from(count));
    let log = ln_enclosure(&c, 96)?.div_nonneg(&ln2_enclosure(96))?;
    Ok(log.scale(&Rational::new(BigInt::one(), BigInt::from(n))))
}

/// Enumerates the domain until the sum of `1/bin_inv` strictly exceeds
/// `0.y`, then returns `bin(j)` for the least positive `j` not enumerated.
pub fn fresh_index(spec: &MachineSpec, y: &BitString, budget: usize) -> Result<BitString, MachineError> {
    let threshold = rational_of_prefix(y);
    let mut stream = domain_stream(spec)?;
    let mut sum = IntervalSum::for_streams();
    let mut seen = BTreeSet::new();
    for _ in 0..budget {
        let Some(w) = stream.next_word() else { break };
        let n = bin_inv(&w);
        sum.add_exact(&recip(&n));
        seen.insert(n);
        if *sum.lo() > threshold {
            let mut j = BigUint::one();
            while seen.contains(&j) {
                j += 1u32;
            }
            return Ok(bin(&j).expect("j >= 1"));
        }
    }
    Err(MachineError::BudgetExhausted {
        budget,
        what: "the unit-fraction sum passed the threshold",
    })
}
