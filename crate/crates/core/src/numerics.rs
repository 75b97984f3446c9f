//! Exact rational arithmetic, certified enclosures and the handful of real
//! functions (exp, ln, Lambert W, real powers) needed to bound the series in
//! this crate without ever touching floating point.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::binstr::BitString;

/// Exact arbitrary-precision fraction, always kept in lowest terms.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumericsError {
    #[error("harmonic segment needs 1 <= i <= j, got i={i}, j={j}")]
    BadHarmonicRange { i: u64, j: u64 },
    #[error("enclosure bounds out of order: lo={lo} > hi={hi}")]
    InvalidBounds { lo: String, hi: String },
    #[error("Lambert W is only evaluated on the principal branch over [0, inf); got {0}")]
    NegativeArgument(String),
    #[error("tolerance must be positive")]
    NonPositiveTolerance,
    #[error("logarithm of a non-positive number")]
    NonPositiveLogArgument,
    #[error("enclosure has no finite upper bound")]
    Unbounded,
    #[error("could not separate the value from the target within {bits} bits of precision")]
    PrecisionExhausted { bits: u32 },
}

/// `n / d` as a reduced rational. Panics if `d == 0`.
pub fn ratio(n: impl Into<BigInt>, d: impl Into<BigInt>) -> Rational {
    Rational::new(n.into(), d.into())
}

pub fn int(n: impl Into<BigInt>) -> Rational {
    Rational::from_integer(n.into())
}

/// `2^e` for any integer exponent.
pub fn pow2(e: i64) -> Rational {
    let p = BigInt::one() << e.unsigned_abs();
    if e >= 0 {
        Rational::from_integer(p)
    } else {
        Rational::new(BigInt::one(), p)
    }
}

pub fn recip(n: &BigUint) -> Rational {
    Rational::new(BigInt::one(), BigInt::from(n.clone()))
}

/// Largest multiple of `2^-bits` that is `<= q`.
pub fn round_down(q: &Rational, bits: u32) -> Rational {
    let scale = BigInt::one() << bits;
    let n = (q * Rational::from_integer(scale.clone())).floor().to_integer();
    Rational::new(n, scale)
}

/// Smallest multiple of `2^-bits` that is `>= q`.
pub fn round_up(q: &Rational, bits: u32) -> Rational {
    let scale = BigInt::one() << bits;
    let n = (q * Rational::from_integer(scale.clone())).ceil().to_integer();
    Rational::new(n, scale)
}

fn denom_bits(q: &Rational) -> u64 {
    q.denom().bits()
}

/// Certified bounds `[lo, hi]` on a real number; `hi == None` means no
/// finite upper bound is known.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Enclosure {
    lo: Rational,
    hi: Option<Rational>,
}

impl Enclosure {
    pub fn exact(q: Rational) -> Self {
        Enclosure {
            lo: q.clone(),
            hi: Some(q),
        }
    }

    pub fn new(lo: Rational, hi: Rational) -> Result<Self, NumericsError> {
        if lo > hi {
            return Err(NumericsError::InvalidBounds {
                lo: lo.to_string(),
                hi: hi.to_string(),
            });
        }
        Ok(Enclosure { lo, hi: Some(hi) })
    }

    pub fn unbounded_above(lo: Rational) -> Self {
        Enclosure { lo, hi: None }
    }

    pub fn zero() -> Self {
        Self::exact(Rational::zero())
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> Option<&Rational> {
        self.hi.as_ref()
    }

    pub fn is_bounded(&self) -> bool {
        self.hi.is_some()
    }

    pub fn is_exact(&self) -> bool {
        self.hi.as_ref() == Some(&self.lo)
    }

    /// The value when `lo == hi`.
    pub fn exact_value(&self) -> Option<&Rational> {
        if self.is_exact() {
            Some(&self.lo)
        } else {
            None
        }
    }

    pub fn width(&self) -> Option<Rational> {
        self.hi.as_ref().map(|h| h - &self.lo)
    }

    pub fn midpoint(&self) -> Option<Rational> {
        self.hi.as_ref().map(|h| (h + &self.lo) / int(2))
    }

    pub fn contains(&self, q: &Rational) -> bool {
        &self.lo <= q && self.hi.as_ref().is_none_or(|h| q <= h)
    }

    /// True when every point of `self` lies in `other`.
    pub fn is_within(&self, other: &Enclosure) -> bool {
        if self.lo < other.lo {
            return false;
        }
        match (&self.hi, &other.hi) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some(a), Some(b)) => a <= b,
        }
    }

    pub fn add(&self, other: &Enclosure) -> Enclosure {
        Enclosure {
            lo: &self.lo + &other.lo,
            hi: match (&self.hi, &other.hi) {
                (Some(a), Some(b)) => Some(a + b),
                _ => None,
            },
        }
    }

    /// Multiplies by a non-negative constant.
    pub fn scale(&self, c: &Rational) -> Enclosure {
        debug_assert!(!c.is_negative());
        if c.is_zero() {
            return Enclosure::zero();
        }
        Enclosure {
            lo: &self.lo * c,
            hi: self.hi.as_ref().map(|h| h * c),
        }
    }

    /// Product of two enclosures with non-negative lower bounds.
    pub fn mul_nonneg(&self, other: &Enclosure) -> Enclosure {
        debug_assert!(!self.lo.is_negative() && !other.lo.is_negative());
        let lo = &self.lo * &other.lo;
        let hi = match (&self.hi, &other.hi) {
            (Some(a), Some(b)) => Some(a * b),
            // 0 * unbounded stays 0 only when the bounded side is exactly 0.
            (Some(a), None) | (None, Some(a)) if a.is_zero() => Some(Rational::zero()),
            _ => None,
        };
        Enclosure { lo, hi }
    }

    /// Quotient of a non-negative enclosure by one bounded away from zero.
    pub fn div_nonneg(&self, denom: &Enclosure) -> Result<Enclosure, NumericsError> {
        debug_assert!(!self.lo.is_negative());
        if !denom.lo.is_positive() {
            return Err(NumericsError::Unbounded);
        }
        let lo = match &denom.hi {
            Some(dh) => &self.lo / dh,
            None => Rational::zero(),
        };
        let hi = self.hi.as_ref().map(|h| h / &denom.lo);
        Ok(Enclosure { lo, hi })
    }

    /// Intersection, or `None` when the enclosures are disjoint.
    pub fn intersect(&self, other: &Enclosure) -> Option<Enclosure> {
        let lo = (&self.lo).max(&other.lo).clone();
        let hi = match (&self.hi, &other.hi) {
            (Some(a), Some(b)) => Some(a.min(b).clone()),
            (Some(a), None) | (None, Some(a)) => Some(a.clone()),
            (None, None) => None,
        };
        if hi.as_ref().is_some_and(|h| h < &lo) {
            return None;
        }
        Some(Enclosure { lo, hi })
    }

    /// Replaces the bounds by nearby multiples of `2^-bits`, rounding outward.
    pub fn rounded_outward(&self, bits: u32) -> Enclosure {
        Enclosure {
            lo: round_down(&self.lo, bits),
            hi: self.hi.as_ref().map(|h| round_up(h, bits)),
        }
    }

    /// `true` if the whole enclosure lies strictly below `q`.
    pub fn is_below(&self, q: &Rational) -> bool {
        self.hi.as_ref().is_some_and(|h| h < q)
    }

    /// `true` if the whole enclosure lies strictly above `q`.
    pub fn is_above(&self, q: &Rational) -> bool {
        &self.lo > q
    }
}

impl fmt::Display for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.hi {
            Some(h) => write!(f, "[{}, {}]", self.lo, h),
            None => write!(f, "[{}, inf]", self.lo),
        }
    }
}

/// Running sum of non-negative terms kept as a pair of rational bounds.
///
/// In exact mode nothing is ever rounded. Otherwise, once a bound's
/// denominator grows past `limit_bits`, the bound is rounded outward to a
/// multiple of `2^-prec`, which keeps long zeta-type sums (whose exact
/// denominators are the lcm of every index seen) tractable.
#[derive(Debug, Clone)]
pub struct IntervalSum {
    lo: Rational,
    hi: Rational,
    rounding: Option<(u32, u64)>,
}

impl IntervalSum {
    pub fn exact() -> Self {
        IntervalSum {
            lo: Rational::zero(),
            hi: Rational::zero(),
            rounding: None,
        }
    }

    pub fn rounded(prec: u32, limit_bits: u64) -> Self {
        IntervalSum {
            lo: Rational::zero(),
            hi: Rational::zero(),
            rounding: Some((prec, limit_bits)),
        }
    }

    /// Default rounding used for long stream sums.
    pub fn for_streams() -> Self {
        Self::rounded(192, 512)
    }

    pub fn add_exact(&mut self, q: &Rational) {
        self.lo += q;
        self.hi += q;
        self.normalize();
    }

    /// Adds a term known only through bounds. Panics if `e` is unbounded.
    pub fn add_bounds(&mut self, e: &Enclosure) {
        self.lo += e.lo();
        self.hi += e.hi().expect("term enclosure must be bounded");
        self.normalize();
    }

    fn normalize(&mut self) {
        if let Some((prec, limit)) = self.rounding {
            if denom_bits(&self.lo) > limit {
                self.lo = round_down(&self.lo, prec);
            }
            if denom_bits(&self.hi) > limit {
                self.hi = round_up(&self.hi, prec);
            }
        }
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn enclosure(&self) -> Enclosure {
        Enclosure {
            lo: self.lo.clone(),
            hi: Some(self.hi.clone()),
        }
    }
}

/// `H_{i,j} = 1/i + 1/(i+1) + ... + 1/j`.
pub fn harmonic_segment(i: u64, j: u64) -> Result<Rational, NumericsError> {
    if i < 1 || j < i {
        return Err(NumericsError::BadHarmonicRange { i, j });
    }
    Ok((i..=j).map(|k| ratio(1, k)).sum())
}

/// The k-th Catalan number `binomial(2k, k) / (k + 1)`.
pub fn catalan(k: u32) -> BigUint {
    let mut c = BigUint::one();
    for n in 0..k {
        // C_{n+1} = C_n * 2(2n+1) / (n+2), always exact.
        c = c * BigUint::from(2 * (2 * n as u64 + 1)) / BigUint::from(n as u64 + 2);
    }
    c
}

/// `binomial(2n, n)`.
pub fn central_binomial(n: u32) -> BigUint {
    catalan(n) * BigUint::from(n as u64 + 1)
}

/// Bounds on Euler's number from `sum_{k<=terms} 1/k!` and the remainder
/// bound `2/(terms+1)!`.
pub fn euler_bounds(terms: u32) -> Enclosure {
    let mut sum = Rational::zero();
    let mut fact = BigUint::one();
    for k in 0..=terms {
        if k > 0 {
            fact *= BigUint::from(k);
        }
        sum += recip(&fact);
    }
    fact *= BigUint::from(terms + 1);
    let rem = Rational::new(BigInt::from(2), BigInt::from(fact));
    Enclosure {
        hi: Some(&sum + rem),
        lo: sum,
    }
}

fn taylor_exp_fraction(f: &Rational, prec: u32) -> (Rational, Rational) {
    // f in [0, 1). Remainder after the k-th term is at most
    // f^(k+1)/(k+1)! * (k+2)/(k+2-f) <= 2 f^(k+1)/(k+1)!.
    let tol = pow2(-(prec as i64) - 4);
    let mut sum = Rational::one();
    let mut term = Rational::one();
    let mut k: u64 = 0;
    loop {
        k += 1;
        term = term * f / int(k);
        sum += &term;
        let next = &term * f / int(k + 1) * int(2);
        if next <= tol {
            return (sum.clone(), sum + next);
        }
    }
}

/// Certified bounds on `e^x` for `x >= 0`, accurate to roughly `prec` bits
/// relative to the value.
pub fn exp_enclosure(x: &Rational, prec: u32) -> Enclosure {
    assert!(!x.is_negative(), "exp_enclosure expects x >= 0");
    let n = x.floor().to_integer().to_biguint().unwrap_or_default();
    let f = x - Rational::from_integer(BigInt::from(n.clone()));
    let guard = prec + 2 * (n.bits() as u32) + 16;
    let (flo, fhi) = taylor_exp_fraction(&f, guard);
    let mut lo = round_down(&flo, guard);
    let mut hi = round_up(&fhi, guard);
    if !n.is_zero() {
        // Enough Taylor terms that 2/(K+1)! is far below 2^-guard.
        let mut terms = 8;
        let e = loop {
            let e = euler_bounds(terms);
            if e.width().unwrap() < pow2(-(guard as i64) - 4) {
                break e;
            }
            terms += 8;
        };
        let (mut base_lo, mut base_hi) = (round_down(e.lo(), guard), round_up(e.hi().unwrap(), guard));
        let mut pow_lo = Rational::one();
        let mut pow_hi = Rational::one();
        let mut k = n;
        while !k.is_zero() {
            if k.is_odd() {
                pow_lo = round_down(&(&pow_lo * &base_lo), guard);
                pow_hi = round_up(&(&pow_hi * &base_hi), guard);
            }
            k >>= 1;
            if !k.is_zero() {
                base_lo = round_down(&(&base_lo * &base_lo), guard);
                base_hi = round_up(&(&base_hi * &base_hi), guard);
            }
        }
        lo = round_down(&(lo * pow_lo), guard);
        hi = round_up(&(hi * pow_hi), guard);
    }
    Enclosure { lo, hi: Some(hi) }
}

/// `atanh(y)` for `0 <= y <= 1/3` via its odd power series.
fn atanh_small(y: &Rational, prec: u32) -> (Rational, Rational) {
    let tol = pow2(-(prec as i64) - 4);
    let y2 = y * y;
    let mut power = y.clone();
    let mut sum = Rational::zero();
    let mut k: u64 = 0;
    loop {
        sum += &power / int(2 * k + 1);
        power *= &y2;
        k += 1;
        // Remainder <= y^(2k+1) / ((2k+1)(1 - y^2)).
        let rem = &power / int(2 * k + 1) / (Rational::one() - &y2);
        if rem <= tol || power.is_zero() {
            return (sum.clone(), sum + rem);
        }
    }
}

/// Certified bounds on `ln 2`.
pub fn ln2_enclosure(prec: u32) -> Enclosure {
    let (lo, hi) = atanh_small(&ratio(1, 3), prec + 2);
    Enclosure {
        lo: round_down(&(lo * int(2)), prec + 4),
        hi: Some(round_up(&(hi * int(2)), prec + 4)),
    }
}

/// Certified bounds on `ln x` for rational `x > 0`, with absolute error
/// around `2^-prec` (plus a relative term for very large arguments).
pub fn ln_enclosure(x: &Rational, prec: u32) -> Result<Enclosure, NumericsError> {
    if !x.is_positive() {
        return Err(NumericsError::NonPositiveLogArgument);
    }
    if x < &Rational::one() {
        let inv = ln_enclosure(&x.recip(), prec)?;
        return Ok(Enclosure {
            lo: -inv.hi.clone().unwrap(),
            hi: Some(-inv.lo),
        });
    }
    let k = x.floor().to_integer().bits() as i64 - 1;
    let r = x * pow2(-k);
    let y = (&r - Rational::one()) / (&r + Rational::one());
    let (alo, ahi) = atanh_small(&y, prec + 2);
    let kbits = 64 - (k.unsigned_abs()).leading_zeros();
    let ln2 = ln2_enclosure(prec + kbits + 2);
    let lo = int(k) * ln2.lo() + alo * int(2);
    let hi = int(k) * ln2.hi().unwrap() + ahi * int(2);
    Ok(Enclosure {
        lo: round_down(&lo, prec + 4),
        hi: Some(round_up(&hi, prec + 4)),
    })
}

const MAX_SEPARATION_BITS: u32 = 1 << 14;

/// Sign of `w * e^w - x` for `w > 0`, refined until certain.
fn compare_w_exp_w(w: &Rational, x: &Rational) -> Result<Ordering, NumericsError> {
    let mut prec = 64 + x.numer().bits().min(1 << 12) as u32;
    loop {
        let e = exp_enclosure(w, prec);
        if w * e.lo() > *x {
            return Ok(Ordering::Greater);
        }
        if w * e.hi().unwrap() < *x {
            return Ok(Ordering::Less);
        }
        if prec >= MAX_SEPARATION_BITS {
            return Err(NumericsError::PrecisionExhausted { bits: prec });
        }
        prec *= 2;
    }
}

/// Principal-branch Lambert W on `[0, inf)` by bisection on `w e^w - x`.
///
/// The returned enclosure has width `<= tol`. The power series of W only
/// converges for `|x| < 1/e`, so it is not used here.
pub fn lambert_w(x: &Rational, tol: &Rational) -> Result<Enclosure, NumericsError> {
    if x.is_negative() {
        return Err(NumericsError::NegativeArgument(x.to_string()));
    }
    if !tol.is_positive() {
        return Err(NumericsError::NonPositiveTolerance);
    }
    if x.is_zero() {
        return Ok(Enclosure::zero());
    }
    // W(x) < 1 for x < e, and W(x) <= ln x <= log2 x otherwise.
    let upper = x.ceil().to_integer().bits().max(1);
    let mut lo = Rational::zero();
    let mut hi = int(upper);
    while &hi - &lo > *tol {
        let mid = (&lo + &hi) / int(2);
        match compare_w_exp_w(&mid, x)? {
            Ordering::Greater => hi = mid,
            _ => lo = mid,
        }
    }
    Enclosure::new(lo, hi)
}

/// W over an enclosure of its argument. W is increasing, so the result is
/// `[lo(W(x.lo)), hi(W(x.hi))]`.
pub fn lambert_w_of(x: &Enclosure, tol: &Rational) -> Result<Enclosure, NumericsError> {
    let hi_arg = x.hi().ok_or(NumericsError::Unbounded)?;
    let lo = lambert_w(x.lo(), tol)?;
    let hi = lambert_w(hi_arg, tol)?;
    Enclosure::new(lo.lo().clone(), hi.hi().unwrap().clone())
}

/// Bounds on `W(2^m) / (m ln 2)`, which tends to 1 as `m` grows.
pub fn w_ratio(m: u32, tol: &Rational) -> Result<Enclosure, NumericsError> {
    let w = lambert_w(&pow2(m as i64), tol)?;
    let prec = 32 + (-(tol.to_f64().unwrap_or(1e-12).log2())).max(0.0) as u32;
    let denom = ln2_enclosure(prec).scale(&int(m));
    w.div_nonneg(&denom)
}

/// Certified bounds on `base^(-s)` for an integer `base >= 1` and rational
/// `s >= 0`. Exact when `s` is an integer; otherwise the `b`-th root of
/// `base^a` (with `s = a/b`) is bracketed to about `prec` bits.
pub fn pow_neg_enclosure(base: &BigUint, s: &Rational, prec: u32) -> Enclosure {
    assert!(!s.is_negative() && !base.is_zero());
    let a = s.numer().to_biguint().unwrap();
    let b = s.denom().to_u32().expect("exponent denominator too large");
    let a_small = a.to_u32().expect("exponent numerator too large");
    let n = base.pow(a_small);
    if b == 1 {
        return Enclosure::exact(recip(&n));
    }
    let scaled = &n << (b as u64 * prec as u64);
    let r = scaled.nth_root(b);
    let scale = Rational::from_integer(BigInt::one() << prec);
    if r.pow(b) == scaled {
        return Enclosure::exact(scale / Rational::from_integer(BigInt::from(r)));
    }
    let lo = &scale / Rational::from_integer(BigInt::from(&r + 1u32));
    let hi = scale / Rational::from_integer(BigInt::from(r));
    Enclosure { lo, hi: Some(hi) }
}

/// A prefix of the unending binary expansion of every real in an enclosure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitResult {
    pub digits: BitString,
    pub determined_count: usize,
}

// First k digits of the unending expansion of x in [0, 1], as an integer.
fn unending_prefix(x: &Rational, k: usize) -> BigInt {
    if x.is_zero() {
        return BigInt::zero();
    }
    let scaled = x * Rational::from_integer(BigInt::one() << k);
    scaled.ceil().to_integer() - BigInt::one()
}

/// Longest common prefix (at most `n` digits) of the unending binary
/// expansions of all reals in `e`. Dyadic rationals use their trailing-ones
/// form, so `1/2` reads `0111...`.
pub fn digits(e: &Enclosure, n: usize) -> DigitResult {
    let empty = DigitResult {
        digits: BitString::empty(),
        determined_count: 0,
    };
    let Some(hi) = e.hi() else { return empty };
    if e.lo().is_negative() || hi > &Rational::one() {
        return empty;
    }
    let mut count = 0;
    for k in 1..=n {
        if unending_prefix(e.lo(), k) != unending_prefix(hi, k) {
            break;
        }
        count = k;
    }
    if count == 0 {
        return empty;
    }
    let p = unending_prefix(e.lo(), count).to_biguint().unwrap();
    let bits = (0..count).rev().map(|i| p.bit(i as u64)).collect();
    DigitResult {
        digits: BitString::from_bits(bits),
        determined_count: count,
    }
}

/// Decimal rendering showing only digits shared by every point of the
/// enclosure (truncated expansions), at most `max_frac` after the point.
/// Returns `None` if not even the integer part is determined.
pub fn certified_decimal(e: &Enclosure, max_frac: usize) -> Option<String> {
    let hi = e.hi()?;
    let lo = e.lo();
    let mut best: Option<(usize, BigInt)> = None;
    let mut scale = BigInt::one();
    for k in 0..=max_frac {
        let s = Rational::from_integer(scale.clone());
        let a = (lo * &s).floor().to_integer();
        let b = (hi * &s).floor().to_integer();
        if a != b {
            break;
        }
        best = Some((k, a));
        scale *= 10;
    }
    let (k, v) = best?;
    let neg = v.is_negative();
    let digits = v.abs().to_string();
    let digits = if digits.len() <= k {
        format!("{}{}", "0".repeat(k + 1 - digits.len()), digits)
    } else {
        digits
    };
    let (ip, fp) = digits.split_at(digits.len() - k);
    let sign = if neg { "-" } else { "" };
    Some(if k == 0 {
        format!("{sign}{ip}")
    } else {
        format!("{sign}{ip}.{fp}")
    })
}

/// Parses `a/b`, an integer, or a finite decimal such as `0.125` exactly.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let t = text.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    if let Some((ip, fp)) = t.split_once('.') {
        if fp.is_empty() || !fp.bytes().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let neg = ip.starts_with('-');
        let ip_digits = ip.trim_start_matches(['-', '+']);
        let whole: BigInt = if ip_digits.is_empty() {
            BigInt::zero()
        } else {
            ip_digits.parse().ok()?
        };
        let frac: BigInt = fp.parse().ok()?;
        let scale = num_traits::pow(BigInt::from(10), fp.len());
        let v = Rational::new(whole * &scale + frac, scale);
        return Some(if neg { -v } else { v });
    }
    t.parse::<BigInt>().ok().map(Rational::from_integer)
}
