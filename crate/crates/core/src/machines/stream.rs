//! Length-lex enumeration of machine domains with upper bounds on the weight
//! not yet emitted.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};

use super::primes::PrimeTable;
use super::sums::Weight;
use super::{convergent_prefix_lengths, x_set, Builtin, MachineError, MachineSpec};
use crate::binstr::{bin, bin_inv, BitString};
use crate::iota::{program_tail_closed_form, programs_of_length, reduce, Budgets, IotaTerm, ProgramsOfLength};
use crate::numerics::{catalan, pow2, pow_neg_enclosure, Rational};

const PREC: u32 = 128;
// Prefixes longer than this are never materialized; their weight stays in
// the remaining bound.
const MAX_PREFIX: u64 = 1 << 16;
// Largest prime index the prime-product stream will sieve for.
const PRIME_INDEX_CAP: u64 = 1 << 20;

/// A single-consumer enumeration of a domain in length-lex order.
///
/// `remaining_bound` bounds the total weight of every domain string not yet
/// returned by `next_word`, including strings the stream will never reach
/// (a stream may stop early and leave their weight in the bound). `None`
/// means no finite bound is available.
pub trait DomainStream {
    fn next_word(&mut self) -> Option<BitString>;
    fn remaining_bound(&self, weight: &Weight) -> Option<Rational>;
    /// Exact number of domain strings of length `<= len`, when it is known
    /// without enumeration.
    fn count_up_to_length(&self, _len: usize) -> Option<BigUint> {
        None
    }
}

pub type BoxedStream = Box<dyn DomainStream>;

pub fn domain_stream(spec: &MachineSpec) -> Result<BoxedStream, MachineError> {
    spec.validate(0)?;
    Ok(build(spec))
}

fn build(spec: &MachineSpec) -> BoxedStream {
    match spec {
        MachineSpec::Finite(t) => Box::new(FiniteStream {
            words: t.domain().cloned().collect(),
            pos: 0,
        }),
        MachineSpec::Builtin(Builtin::AllStrings) => Box::new(AllStrings {
            next: BitString::empty(),
        }),
        MachineSpec::Builtin(Builtin::Lukasiewicz) => Box::new(Lukasiewicz::new(None)),
        MachineSpec::Builtin(Builtin::Iota(b)) => Box::new(Lukasiewicz::new(Some(*b))),
        MachineSpec::Builtin(Builtin::Geometric { start, extra }) => {
            let mut extra = extra.clone();
            extra.sort();
            Box::new(Geometric {
                start: *start,
                extra,
                pos: 0,
                next_i: *start,
            })
        }
        MachineSpec::Double(c) => Box::new(Double { inner: build(c) }),
        MachineSpec::TuataraOf(c) => Box::new(Tuatara {
            inner: Peeked::new(build(c)),
            heap: BinaryHeap::new(),
            last: None,
        }),
        MachineSpec::Product(c) => {
            let elems: Vec<BitString> = c.as_finite().expect("validated").domain().cloned().collect();
            Box::new(Product::new(elems))
        }
        MachineSpec::UniversalTuatara(ms) => Box::new(Universal::new(
            ms.iter()
                .enumerate()
                .map(|(i, m)| (build(m), BigUint::from(i + 1)))
                .collect(),
        )),
        MachineSpec::UniversalConvergent(ms) => {
            let js = convergent_prefix_lengths(ms);
            Box::new(Universal::new(
                ms.iter().zip(js).map(|(m, j)| (build(&m.machine), j)).collect(),
            ))
        }
        MachineSpec::PrimeProduct(c) => Box::new(PrimeProduct::new(build(c))),
    }
}

/// Upper bound on `2^(-s k)`.
fn pow2_neg_hi(k: &BigUint, s: &Rational) -> Rational {
    let k = k.to_u64().unwrap_or(u64::MAX).min(MAX_PREFIX * 64);
    if s.is_integer() {
        let e = s.to_integer() * BigInt::from(k);
        return pow2(-e.to_i64().expect("exponent fits"));
    }
    if k <= 4096 {
        let base = BigUint::one() << k;
        return pow_neg_enclosure(&base, s, PREC).hi().expect("bounded").clone();
    }
    let e = (s * Rational::from_integer(k.into())).floor().to_integer();
    pow2(-e.to_i64().expect("exponent fits"))
}

fn pow2_neg_hi_u(k: usize, s: &Rational) -> Rational {
    pow2_neg_hi(&BigUint::from(k), s)
}

/// Upper bound on `n^(-s)`.
fn pow_neg_hi(n: &BigUint, s: &Rational) -> Rational {
    pow_neg_enclosure(n, s, PREC).hi().expect("bounded").clone()
}

fn one() -> Rational {
    Rational::one()
}

/// Upper bound on `1 / (1 - 2^-s)` for `s > 0`.
fn geometric_factor_hi(s: &Rational) -> Rational {
    one() / (one() - pow2_neg_hi_u(1, s))
}

fn word_weight_hi(weight: &Weight, w: &BitString) -> Rational {
    weight.of(w).hi().expect("bounded").clone()
}

struct FiniteStream {
    words: Vec<BitString>,
    pos: usize,
}

impl DomainStream for FiniteStream {
    fn next_word(&mut self) -> Option<BitString> {
        let w = self.words.get(self.pos).cloned();
        self.pos += w.is_some() as usize;
        w
    }

    fn remaining_bound(&self, weight: &Weight) -> Option<Rational> {
        Some(self.words[self.pos..].iter().map(|w| word_weight_hi(weight, w)).sum())
    }

    fn count_up_to_length(&self, len: usize) -> Option<BigUint> {
        Some(self.words.iter().filter(|w| w.len() <= len).count().into())
    }
}

struct AllStrings {
    next: BitString,
}

impl DomainStream for AllStrings {
    fn next_word(&mut self) -> Option<BitString> {
        let w = self.next.clone();
        self.next = w.lenlex_succ();
        Some(w)
    }

    // Strings left at the current length count 2^-sL each (an upper bound
    // for zeta weights too); longer lengths sum to r^(L+1) / (1 - r) with
    // r = 2^(1-s).
    fn remaining_bound(&self, weight: &Weight) -> Option<Rational> {
        let s = weight.exponent();
        if *s <= one() {
            return None;
        }
        let len = self.next.len();
        let left = (BigUint::one() << len) - self.next.numeral();
        let here = Rational::from_integer(BigInt::from(left)) * pow2_neg_hi_u(len, s);
        let sm1 = s - one();
        let r = pow2_neg_hi_u(1, &sm1);
        Some(here + pow2_neg_hi_u(len + 1, &sm1) / (one() - r))
    }

    fn count_up_to_length(&self, len: usize) -> Option<BigUint> {
        Some((BigUint::one() << (len + 1)) - 1u32)
    }
}

/// Full binary tree codes by length, optionally keeping only Iota programs
/// that halt within the budgets.
struct Lukasiewicz {
    len: usize,
    iter: ProgramsOfLength,
    seen_in_len: BigUint,
    halting: Option<Budgets>,
}

impl Lukasiewicz {
    fn new(halting: Option<Budgets>) -> Self {
        Lukasiewicz {
            len: 1,
            iter: programs_of_length(1),
            seen_in_len: BigUint::zero(),
            halting,
        }
    }
}

impl DomainStream for Lukasiewicz {
    fn next_word(&mut self) -> Option<BitString> {
        loop {
            match self.iter.next() {
                Some(w) => {
                    self.seen_in_len += 1u32;
                    let keep = match self.halting {
                        None => true,
                        Some(b) => {
                            let t = IotaTerm::parse(&w).expect("enumerated program").to_comb();
                            reduce(&t, b).normal_form().is_some()
                        }
                    };
                    if keep {
                        return Some(w);
                    }
                }
                None => {
                    self.len += 2;
                    self.iter = programs_of_length(self.len);
                    self.seen_in_len = BigUint::zero();
                }
            }
        }
    }

    // Unseen programs of the current length at 2^-sL each, plus the
    // closed-form weight of all longer programs scaled by 2^-(s-1)(L+2).
    fn remaining_bound(&self, weight: &Weight) -> Option<Rational> {
        let s = weight.exponent();
        if *s < one() {
            return None;
        }
        let k = (self.len - 1) / 2;
        let left = catalan(k as u32) - &self.seen_in_len;
        let here = Rational::from_integer(BigInt::from(left)) * pow2_neg_hi_u(self.len, s);
        let longer = program_tail_closed_form(k as u32 + 1) * pow2_neg_hi_u(self.len + 2, &(s - one()));
        Some(here + longer)
    }

    fn count_up_to_length(&self, len: usize) -> Option<BigUint> {
        if self.halting.is_some() {
            return None;
        }
        if len == 0 {
            return Some(BigUint::zero());
        }
        Some((0..=(len - 1) / 2).map(|k| catalan(k as u32)).sum())
    }
}

struct Geometric {
    start: usize,
    extra: Vec<BitString>,
    pos: usize,
    next_i: usize,
}

impl DomainStream for Geometric {
    fn next_word(&mut self) -> Option<BitString> {
        let spine = BitString::zeros(self.next_i).with_bit(true);
        match self.extra.get(self.pos) {
            Some(e) if *e < spine => {
                self.pos += 1;
                Some(e.clone())
            }
            _ => {
                self.next_i += 1;
                Some(spine)
            }
        }
    }

    // (2^(i+1) + 1)^-s <= 2^-s(i+1), so the spine bound serves both weights.
    fn remaining_bound(&self, weight: &Weight) -> Option<Rational> {
        let s = weight.exponent();
        let extra: Rational = self.extra[self.pos..].iter().map(|w| word_weight_hi(weight, w)).sum();
        Some(extra + pow2_neg_hi_u(self.next_i + 1, s) * geometric_factor_hi(s))
    }

    fn count_up_to_length(&self, len: usize) -> Option<BigUint> {
        let extra = self.extra.iter().filter(|w| w.len() <= len).count();
        Some((extra + len.saturating_sub(self.start)).into())
    }
}

struct Double {
    inner: BoxedStream,
}

impl DomainStream for Double {
    fn next_word(&mut self) -> Option<BitString> {
        self.inner.next_word().map(|x| x.concat(&x))
    }

    // 2^-s|xx| = 2^-2s|x|, and bin_inv(xx) >= 2^|xx|.
    fn remaining_bound(&self, weight: &Weight) -> Option<Rational> {
        self.inner.remaining_bound(&Weight::Omega(weight.exponent() * Rational::from_integer(2.into())))
    }

    fn count_up_to_length(&self, len: usize) -> Option<BigUint> {
        self.inner.count_up_to_length(len / 2)
    }
}

/// A stream with its next element pulled in advance.
struct Peeked {
    inner: BoxedStream,
    head: Option<BitString>,
}

impl Peeked {
    fn new(mut inner: BoxedStream) -> Self {
        let head = inner.next_word();
        Peeked { inner, head }
    }

    fn pop(&mut self) -> Option<BitString> {
        let h = self.head.take();
        if h.is_some() {
            self.head = self.inner.next_word();
        }
        h
    }

    fn remaining_bound(&self, weight: &Weight) -> Option<Rational> {
        let head = self.head.as_ref().map_or_else(Rational::zero, |w| word_weight_hi(weight, w));
        Some(head + self.inner.remaining_bound(weight)?)
    }
}

struct Tuatara {
    inner: Peeked,
    heap: BinaryHeap<Reverse<BitString>>,
    last: Option<BitString>,
}

impl DomainStream for Tuatara {
    fn next_word(&mut self) -> Option<BitString> {
        loop {
            // Every element of X(p) is >= p, so p must be expanded before
            // anything larger leaves the heap.
            let expand = match (&self.inner.head, self.heap.peek()) {
                (Some(p), Some(Reverse(h))) => p <= h,
                (Some(_), None) => true,
                (None, _) => false,
            };
            if expand {
                let p = self.inner.pop().expect("head present");
                self.heap.extend(x_set(&p).into_iter().map(Reverse));
                continue;
            }
            let Reverse(w) = self.heap.pop()?;
            if self.last.as_ref() == Some(&w) {
                continue;
            }
            self.last = Some(w.clone());
            return Some(w);
        }
    }

    // Per operand string p: the X(p) Omega weights sum to at most
    // 2^-s|p| / (1 - 2^-s); for s >= 1 the zeta weights sum to at most
    // (sum of 1/bin_inv)^s = 2^-s|p|.
    fn remaining_bound(&self, weight: &Weight) -> Option<Rational> {
        let s = weight.exponent();
        let factor = match weight {
            Weight::Omega(_) => geometric_factor_hi(s),
            Weight::Zeta(_) if *s >= one() => one(),
            Weight::Zeta(_) => return None,
        };
        let pending: Rational = self.heap.iter().map(|Reverse(w)| word_weight_hi(weight, w)).sum();
        let inner = self.inner.remaining_bound(&Weight::Omega(s.clone()))?;
        Some(pending + inner * factor)
    }
}

/// Concatenations of operand strings with nondecreasing `bin_inv`, one
/// length at a time.
struct Product {
    elems: Vec<BitString>,
    next_len: usize,
    buffer: VecDeque<BitString>,
    // counts[l] = number of domain strings of length l, for l < next_len.
    counts: Vec<BigUint>,
}

impl Product {
    fn new(elems: Vec<BitString>) -> Self {
        Product {
            elems,
            next_len: 0,
            buffer: VecDeque::new(),
            counts: Vec::new(),
        }
    }

    fn fill(&mut self, len: usize) {
        let mut out = Vec::new();
        let mut stack: Vec<usize> = Vec::new();
        self.collect(0, len, &mut stack, &mut out);
        out.sort();
        self.counts.push(out.len().into());
        self.buffer.extend(out);
    }

    fn collect(&self, from: usize, left: usize, stack: &mut Vec<usize>, out: &mut Vec<BitString>) {
        if left == 0 {
            let mut w = BitString::empty();
            for &i in stack.iter() {
                w = w.concat(&self.elems[i]);
            }
            out.push(w);
            return;
        }
        for i in from..self.elems.len() {
            let l = self.elems[i].len();
            if l > left {
                break;
            }
            stack.push(i);
            self.collect(i, left - l, stack, out);
            stack.pop();
        }
    }
}

impl DomainStream for Product {
    fn next_word(&mut self) -> Option<BitString> {
        while self.buffer.is_empty() {
            if self.elems.is_empty() && self.next_len > 0 {
                return None;
            }
            let len = self.next_len;
            self.fill(len);
            self.next_len += 1;
        }
        self.buffer.pop_front()
    }

    // With f(y) = prod 1/(1 - y^|p|) = sum_l a_l y^l and x = 2^-s <= y < 1,
    // sum_{l >= L} a_l x^l <= (x/y)^L (f(y) - sum_{l < L} a_l y^l).
    fn remaining_bound(&self, weight: &Weight) -> Option<Rational> {
        let buffered: Rational = self.buffer.iter().map(|w| word_weight_hi(weight, w)).sum();
        if self.elems.is_empty() {
            let lambda = if self.next_len == 0 { one() } else { Rational::zero() };
            return Some(buffered + lambda);
        }
        let s = weight.exponent();
        let x = pow2_neg_hi_u(1, s);
        let y = (one() + &x) / Rational::from_integer(2.into());
        let mut f = one();
        for p in &self.elems {
            f /= one() - num_traits::pow(y.clone(), p.len());
        }
        let mut known = Rational::zero();
        let mut y_pow = one();
        for c in &self.counts {
            known += Rational::from_integer(BigInt::from(c.clone())) * &y_pow;
            y_pow *= &y;
        }
        let ratio = num_traits::pow(x / &y, self.next_len);
        Some(buffered + ratio * (f - known))
    }
}

struct Member {
    stream: Peeked,
    prefix_len: BigUint,
    prefix: Option<BitString>,
}

impl Member {
    fn word(&self) -> Option<BitString> {
        Some(self.prefix.as_ref()?.concat(self.stream.head.as_ref()?))
    }
}

/// Merge of `{0^J 1 x | x in dom(C)}` over members with distinct `J`.
struct Universal {
    members: Vec<Member>,
}

impl Universal {
    fn new(parts: Vec<(BoxedStream, BigUint)>) -> Self {
        let members = parts
            .into_iter()
            .map(|(s, j)| {
                let prefix = j
                    .to_u64()
                    .filter(|&j| j <= MAX_PREFIX)
                    .map(|j| BitString::zeros(j as usize).with_bit(true));
                Member {
                    stream: Peeked::new(s),
                    prefix_len: j,
                    prefix,
                }
            })
            .collect();
        Universal { members }
    }
}

impl DomainStream for Universal {
    fn next_word(&mut self) -> Option<BitString> {
        let (idx, w) = self
            .members
            .iter()
            .enumerate()
            .filter_map(|(i, m)| m.word().map(|w| (i, w)))
            .min_by(|a, b| a.1.cmp(&b.1))?;
        self.members[idx].stream.pop();
        Some(w)
    }

    // 2^-s|0^J 1 x| = 2^-s(J+1) 2^-s|x|, and
    // bin_inv(0^J 1 x) = 2^(J+1+|x|) + bin_inv(x) >= (2^J + 1) bin_inv(x).
    fn remaining_bound(&self, weight: &Weight) -> Option<Rational> {
        let s = weight.exponent();
        let mut total = Rational::zero();
        for m in &self.members {
            let rest = m.stream.remaining_bound(weight)?;
            if rest.is_zero() {
                continue;
            }
            let scale = match weight {
                Weight::Omega(_) => pow2_neg_hi(&(&m.prefix_len + 1u32), s),
                Weight::Zeta(_) => match m.prefix_len.to_u64().filter(|&j| j <= 4096) {
                    Some(j) => pow_neg_hi(&((BigUint::one() << j) + 1u32), s),
                    None => pow2_neg_hi(&m.prefix_len, s),
                },
            };
            total += rest * scale;
        }
        Some(total)
    }
}

/// `bin(n)` for the smooth numbers over `{p_i | bin(i) in operand}`, in
/// increasing order. Each smooth `n > 1` is reached once as `m * P[k]`,
/// where `P[k]` is its largest prime factor; popping `(m, k)` schedules
/// its sibling `(m, k+1)` and its child `(m P[k], k)`.
struct PrimeProduct {
    operand: Peeked,
    table: PrimeTable,
    primes: Vec<BigUint>,
    heap: BinaryHeap<Reverse<(BigUint, BigUint, usize)>>,
    // Multipliers waiting for prime number `primes.len()`.
    waiting: Vec<BigUint>,
    started: bool,
    truncated: bool,
    last: BigUint,
    recip_sum: Rational,
}

impl PrimeProduct {
    fn new(operand: BoxedStream) -> Self {
        PrimeProduct {
            operand: Peeked::new(operand),
            table: PrimeTable::new(),
            primes: Vec::new(),
            heap: BinaryHeap::new(),
            waiting: vec![BigUint::one()],
            started: false,
            truncated: false,
            last: BigUint::zero(),
            recip_sum: Rational::zero(),
        }
    }

    fn emit(&mut self, n: BigUint) -> BitString {
        self.recip_sum += Rational::new(BigInt::one(), BigInt::from(n.clone()));
        let w = bin(&n).expect("n >= 1");
        self.last = n;
        w
    }

    fn operand_done(&self) -> bool {
        self.operand.head.is_none() && self.operand.inner.remaining_bound(&Weight::Omega(one())) == Some(Rational::zero())
    }

    /// Upper bound on `sum_{n > last} 1/n^s` over smooth `n`, valid when
    /// the prime set is finite and fully known.
    fn zeta_rest(&self, s: &Rational) -> Option<Rational> {
        if self.truncated || !self.operand_done() {
            return None;
        }
        if self.started && self.heap.is_empty() {
            return Some(Rational::zero());
        }
        let mut euler = one();
        for p in &self.primes {
            let p = Rational::from_integer(BigInt::from(p.clone()));
            euler *= &p / (&p - one());
        }
        // sum_{n > N} n^-s <= (N+1)^(1-s) sum_{n > N} 1/n.
        let rest1 = euler - &self.recip_sum;
        let factor = pow_neg_hi(&(&self.last + 1u32), &(s - one()));
        Some(rest1 * factor)
    }
}

impl DomainStream for PrimeProduct {
    fn next_word(&mut self) -> Option<BitString> {
        if !self.started {
            self.started = true;
            return Some(self.emit(BigUint::one()));
        }
        if self.truncated {
            return None;
        }
        loop {
            let top = self.heap.peek().map(|Reverse((v, _, _))| v.clone());
            if let Some(w) = &self.operand.head {
                let i = bin_inv(w);
                // p_i > i, so the prime is irrelevant while i >= top.
                let needed = top.as_ref().is_none_or(|t| &i < t);
                if needed {
                    match i.to_u64().filter(|&i| i <= PRIME_INDEX_CAP) {
                        Some(i) => {
                            let p = BigUint::from(self.table.nth(i as usize));
                            self.operand.pop();
                            let k = self.primes.len();
                            self.primes.push(p.clone());
                            for m in std::mem::take(&mut self.waiting) {
                                self.heap.push(Reverse((&m * &p, m, k)));
                            }
                            continue;
                        }
                        None => {
                            self.truncated = true;
                            return None;
                        }
                    }
                }
            }
            let Reverse((v, m, k)) = self.heap.pop()?;
            self.heap.push(Reverse((&v * &self.primes[k], v.clone(), k)));
            if k + 1 < self.primes.len() {
                self.heap.push(Reverse((&m * &self.primes[k + 1], m, k + 1)));
            } else {
                self.waiting.push(m);
            }
            return Some(self.emit(v));
        }
    }

    // Omega weights: 2^-s floor(log2 n) <= 2^s n^-s.
    fn remaining_bound(&self, weight: &Weight) -> Option<Rational> {
        let s = weight.exponent();
        if *s < one() {
            return None;
        }
        let z = self.zeta_rest(s)?;
        Some(match weight {
            Weight::Zeta(_) => z,
            Weight::Omega(_) => z / pow2_neg_lo_1(s),
        })
    }
}

/// Lower bound on `2^-s`.
fn pow2_neg_lo_1(s: &Rational) -> Rational {
    pow_neg_enclosure(&BigUint::from(2u32), s, PREC).lo().clone()
}
