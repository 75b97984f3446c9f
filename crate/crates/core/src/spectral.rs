//! Sums with a free exponent `s`: Omega_s and zeta_s of machines, the
//! Riemann zeta function with certified tails, and the two normalized
//! halting probabilities built from them.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::machines::{weighted_sum, MachineError, MachineSpec, PrimeTable, Weight};
use crate::numerics::{int, ln_enclosure, pow2, pow_neg_enclosure, Enclosure, IntervalSum, Rational};

const PREC: u32 = 128;

fn require_above(s: &Rational, floor: i64, strict: bool) -> Result<(), MachineError> {
    let f = int(floor);
    let ok = if strict { *s > f } else { *s >= f };
    if ok {
        Ok(())
    } else {
        Err(MachineError::BadExponent(Box::new(s.clone())))
    }
}

/// `sum_{p in dom} 2^(-s|p|)`.
pub fn omega_s(m: &MachineSpec, s: &Rational, budget: usize) -> Result<Enclosure, MachineError> {
    require_above(s, 0, true)?;
    weighted_sum(m, &Weight::Omega(s.clone()), budget)
}

/// `sum_{w in dom} bin_inv(w)^(-s)`, for `s >= 1`.
pub fn zeta_s(m: &MachineSpec, s: &Rational, budget: usize) -> Result<Enclosure, MachineError> {
    require_above(s, 1, false)?;
    weighted_sum(m, &Weight::Zeta(s.clone()), budget)
}

/// `sum_{n>=1} n^-s` for `s > 1`: the first `budget` terms plus the
/// integral bracket `[(N+1)^(1-s), N^(1-s)] / (s-1)` on the rest.
pub fn riemann_zeta(s: &Rational, budget: usize) -> Result<Enclosure, MachineError> {
    require_above(s, 1, true)?;
    let n = budget.max(1);
    let mut sum = IntervalSum::for_streams();
    for k in 1..=n {
        sum.add_bounds(&pow_neg_enclosure(&BigUint::from(k), s, PREC));
    }
    let sm1 = s - Rational::one();
    let lo_tail = pow_neg_enclosure(&BigUint::from(n + 1), &sm1, PREC).lo() / &sm1;
    let hi_tail = pow_neg_enclosure(&BigUint::from(n), &sm1, PREC).hi().expect("bounded") / &sm1;
    Ok(Enclosure::new(sum.lo() + lo_tail, sum.hi() + hi_tail)?)
}

/// `(1 - 2^(1-s)) Omega_s`: Omega_s divided by its value for the machine
/// that halts on every string.
pub fn kappa(m: &MachineSpec, s: &Rational, budget: usize) -> Result<Enclosure, MachineError> {
    require_above(s, 1, true)?;
    let x = pow_neg_enclosure(&BigUint::from(2u32), &(s - Rational::one()), PREC);
    let one = Rational::one();
    let factor = Enclosure::new(&one - x.hi().expect("bounded"), &one - x.lo())?;
    Ok(omega_s(m, s, budget)?.mul_nonneg(&factor))
}

/// `zeta_s / zeta(s)`.
pub fn kappa_natural(m: &MachineSpec, s: &Rational, budget: usize) -> Result<Enclosure, MachineError> {
    require_above(s, 1, true)?;
    let num = zeta_s(m, s, budget)?;
    let den = riemann_zeta(s, budget)?;
    Ok(num.div_nonneg(&den)?)
}

/// `sum_{n=1}^{2^L - 1} 2^(-2 floor(log2 n))`, grouped by `floor(log2 n)`.
pub fn dyadic_weight_sum(levels: u32) -> Rational {
    assert!(levels >= 1);
    let mut sum = Rational::zero();
    for k in 0..levels as i64 {
        // 2^k integers n have floor(log2 n) = k.
        sum += pow2(k) * pow2(-2 * k);
    }
    sum
}

/// Every `i` in `(5, upper]` for which `i ln i < p_i` cannot be certified.
///
/// Works in blocks `[a, b]`: ln is increasing, so `i hi(ln b) < p_i` settles
/// the whole block with one logarithm. Indices the block bound misses are
/// retried with their own logarithm.
pub fn pnt_check(upper: u64) -> Vec<u64> {
    assert!(upper >= 6);
    let mut primes = PrimeTable::new();
    let mut bad = Vec::new();
    let ln_hi = |i: u64, prec: u32| ln_enclosure(&int(i as i64), prec).expect("positive").hi().expect("bounded").clone();
    let mut a = 6u64;
    while a <= upper {
        let b = (a + a / 8).min(upper);
        let block = ln_hi(b, 64);
        for i in a..=b {
            let p = int(BigInt::from(primes.nth(i as usize)));
            let n = int(i as i64);
            let holds = &block * &n < p || [64u32, 256].iter().any(|&prec| ln_hi(i, prec) * &n < p);
            if !holds {
                bad.push(i);
            }
        }
        a = b + 1;
    }
    bad
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binstr::BitString;
    use crate::machines::Builtin;
    use crate::numerics::{parse_rational, ratio};

    fn fin(ws: &[&str]) -> MachineSpec {
        MachineSpec::finite_from_strs(ws)
    }

    fn near(e: &Enclosure, quoted: &str) -> bool {
        let t = parse_rational(quoted).unwrap();
        let k = quoted.split_once('.').map_or(0, |(_, f)| f.len());
        let u = Rational::new(BigInt::one(), num_traits::pow(BigInt::from(10), k));
        e.lo() <= &(&t + &u) && e.hi().unwrap() >= &(&t - &u)
    }

    #[test]
    fn omega_s_examples() {
        assert_eq!(omega_s(&fin(&["0"]), &int(2), 0).unwrap().exact_value(), Some(&ratio(1, 4)));
        let all = MachineSpec::Builtin(Builtin::AllStrings);
        assert_eq!(omega_s(&all, &int(2), 100).unwrap().exact_value(), Some(&int(2)));
        let d = MachineSpec::Double(Box::new(fin(&["0", "11"])));
        assert_eq!(omega_s(&d, &int(1), 10).unwrap().exact_value(), Some(&ratio(5, 16)));
        assert!(omega_s(&d, &int(0), 10).is_err());
    }

    #[test]
    fn omega_s_non_integer_brackets() {
        let e = omega_s(&fin(&["0", "11"]), &ratio(3, 2), 0).unwrap();
        // 2^-1.5 + 2^-3 = 0.478553...
        let v = 2f64.powf(-1.5) + 0.125;
        assert!(near(&e, &format!("{v:.12}")));
        assert!(e.width().unwrap() < pow2(-100));
    }

    #[test]
    fn zeta_s_examples() {
        assert_eq!(zeta_s(&fin(&["1011"]), &int(2), 0).unwrap().exact_value(), Some(&ratio(1, 729)));
        let lam = fin(&["eps"]);
        for s in [int(1), int(3), ratio(5, 2)] {
            assert_eq!(zeta_s(&lam, &s, 0).unwrap().exact_value(), Some(&int(1)));
        }
        let pp = MachineSpec::PrimeProduct(Box::new(fin(&["eps", "0"])));
        assert!(zeta_s(&pp, &int(2), 5000).unwrap().contains(&ratio(3, 2)));
        assert!(zeta_s(&lam, &ratio(1, 2), 0).is_err());
    }

    #[test]
    fn riemann_zeta_examples() {
        let z2 = riemann_zeta(&int(2), 10_000).unwrap();
        assert!(near(&z2, "1.6449340"));
        assert!(z2.width().unwrap() < ratio(1, 10_000));
        let z4 = riemann_zeta(&int(4), 1000).unwrap();
        assert!(near(&z4, "1.0823232"));
        let z3 = riemann_zeta(&int(3), 1000).unwrap();
        let z2 = riemann_zeta(&int(2), 1000).unwrap();
        assert!(z3.hi().unwrap() < z2.lo() && z4.hi().unwrap() < z3.lo());
        let wide = riemann_zeta(&int(2), 100).unwrap();
        assert!(z2.is_within(&wide));
        assert!(riemann_zeta(&int(1), 10).is_err());
    }

    #[test]
    fn kappa_examples() {
        let all = MachineSpec::Builtin(Builtin::AllStrings);
        assert_eq!(kappa(&all, &int(2), 10).unwrap().exact_value(), Some(&int(1)));
        assert_eq!(kappa(&fin(&["0"]), &int(2), 0).unwrap().exact_value(), Some(&ratio(1, 8)));
        let empty = MachineSpec::finite(Vec::<BitString>::new()).unwrap();
        assert_eq!(kappa(&empty, &int(2), 0).unwrap().exact_value(), Some(&int(0)));
        assert!(kappa(&fin(&["0"]), &int(1), 0).is_err());
    }

    #[test]
    fn kappa_is_ratio_of_sums() {
        // Denominator: sum over all strings of 2^-s|w| = 1/(1 - 2^(1-s)).
        for ws in [&["0"][..], &["0", "10", "11"], &["eps", "01"]] {
            for s in 2..5i64 {
                let m = fin(ws);
                let num = omega_s(&m, &int(s), 0).unwrap().exact_value().unwrap().clone();
                let den = Rational::one() / (Rational::one() - pow2(1 - s));
                assert_eq!(kappa(&m, &int(s), 0).unwrap().exact_value(), Some(&(num / den)));
            }
        }
    }

    #[test]
    fn kappa_natural_examples() {
        let all = MachineSpec::Builtin(Builtin::AllStrings);
        assert!(kappa_natural(&all, &int(2), 1000).unwrap().contains(&int(1)));
        let lam = kappa_natural(&fin(&["eps"]), &int(2), 10_000).unwrap();
        assert!(near(&lam, "0.6079"));
        let pp = MachineSpec::PrimeProduct(Box::new(fin(&["eps", "0"])));
        let e = kappa_natural(&pp, &int(2), 10_000).unwrap();
        assert!(near(&e, "0.9119"));
    }

    #[test]
    fn dyadic_examples() {
        assert_eq!(dyadic_weight_sum(1), int(1));
        assert_eq!(dyadic_weight_sum(3), ratio(7, 4));
        assert_eq!(dyadic_weight_sum(20), int(2) - pow2(-19));
        // Direct sum over n for a small case.
        let direct: Rational = (1u64..(1 << 10))
            .map(|n| pow2(-2 * (63 - n.leading_zeros() as i64)))
            .sum();
        assert_eq!(dyadic_weight_sum(10), direct);
    }

    #[test]
    fn pnt_bound_holds() {
        assert!(pnt_check(100).is_empty());
        // 5 ln 5 = 8.047 < p_5 = 11 as well.
        assert!(5.0 * 5f64.ln() < 11.0);
    }
}
