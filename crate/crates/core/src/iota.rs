//! The Iota combinator language: a program is the pre-order traversal of a
//! full binary tree, `0` for the combinator `ι = λf.fSK` and `1` for
//! application. Terms are reduced in normal order over S, K and ι.

use std::fmt;
use std::mem;
use std::rc::Rc;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::binstr::{bin_inv, BitString};
use crate::numerics::{central_binomial, pow2, recip, Enclosure, IntervalSum, Rational};

pub const DEFAULT_STEP_BUDGET: u64 = 100_000;
pub const DEFAULT_SIZE_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IotaError {
    #[error("program ends with {open} subterm(s) still open")]
    Incomplete { open: usize },
    #[error("complete program ends at bit {at}; the rest is trailing")]
    TrailingBits { at: usize },
    #[error("reduction budget exhausted after {steps} steps (largest term {max_size} nodes)")]
    BudgetExceeded { steps: u64, max_size: u64 },
    #[error("list element {index} is neither a pair nor the terminator")]
    MalformedList { index: usize },
}

/// A syntactically complete Iota program, stored as its pre-order bits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IotaTerm {
    bits: BitString,
}

impl IotaTerm {
    pub fn parse(bits: &BitString) -> Result<IotaTerm, IotaError> {
        let mut open = 1usize;
        for (pos, &b) in bits.bits().iter().enumerate() {
            if open == 0 {
                return Err(IotaError::TrailingBits { at: pos });
            }
            if b {
                open += 1;
            } else {
                open -= 1;
            }
        }
        if open > 0 {
            return Err(IotaError::Incomplete { open });
        }
        Ok(IotaTerm { bits: bits.clone() })
    }

    pub fn unparse(&self) -> &BitString {
        &self.bits
    }

    pub fn leaf_count(&self) -> usize {
        self.bits.len().div_ceil(2)
    }

    /// The equivalent applicative term with `ι` kept as an atom.
    pub fn to_comb(&self) -> CombTerm {
        let mut stack: Vec<CombTerm> = Vec::new();
        for &b in self.bits.bits().iter().rev() {
            if b {
                let f = stack.pop().expect("validated program");
                let x = stack.pop().expect("validated program");
                stack.push(CombTerm::app(f, x));
            } else {
                stack.push(CombTerm::iota());
            }
        }
        stack.pop().expect("validated program")
    }
}

pub fn is_program(bits: &BitString) -> bool {
    IotaTerm::parse(bits).is_ok()
}

/// Number of programs of exactly `len` bits, by counting ballot paths.
pub fn count_programs(len: usize) -> BigUint {
    // ways[k] = prefixes of the current length with k subterms still open.
    let mut ways = vec![BigUint::zero(); len + 2];
    ways[1] = BigUint::one();
    for _ in 0..len {
        let mut next = vec![BigUint::zero(); len + 2];
        for k in 1..=len {
            if ways[k].is_zero() {
                continue;
            }
            next[k + 1] += &ways[k];
            next[k - 1] += &ways[k];
        }
        ways = next;
    }
    ways[0].clone()
}

/// All programs of exactly `len` bits in lexicographic order.
#[derive(Debug, Clone)]
pub struct ProgramsOfLength {
    len: usize,
    bits: Vec<bool>,
    // open[i] = subterms still open before bit i.
    open: Vec<usize>,
    started: bool,
    done: bool,
}

impl ProgramsOfLength {
    pub fn new(len: usize) -> Self {
        ProgramsOfLength {
            len,
            bits: vec![false; len],
            open: vec![0; len + 1],
            started: false,
            done: len.is_multiple_of(2),
        }
    }

    fn feasible(&self, pos: usize, open: usize) -> bool {
        let rest = self.len - pos;
        if open == 0 {
            return rest == 0;
        }
        open <= rest
    }

    // Smallest completion of bits[..from] given open[from].
    fn fill_from(&mut self, from: usize) {
        for i in from..self.len {
            let k = self.open[i];
            if k >= 1 && self.feasible(i + 1, k - 1) {
                self.bits[i] = false;
                self.open[i + 1] = k - 1;
            } else {
                self.bits[i] = true;
                self.open[i + 1] = k + 1;
            }
        }
    }
}

impl Iterator for ProgramsOfLength {
    type Item = BitString;

    fn next(&mut self) -> Option<BitString> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            self.open[0] = 1;
            self.fill_from(0);
        } else {
            let pivot = (0..self.len)
                .rev()
                .find(|&i| !self.bits[i] && self.feasible(i + 1, self.open[i] + 1));
            match pivot {
                Some(i) => {
                    self.bits[i] = true;
                    self.open[i + 1] = self.open[i] + 1;
                    self.fill_from(i + 1);
                }
                None => {
                    self.done = true;
                    return None;
                }
            }
        }
        Some(BitString::from_bits(self.bits.clone()))
    }
}

pub fn programs_of_length(len: usize) -> ProgramsOfLength {
    ProgramsOfLength::new(len)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Atom {
    S,
    K,
    Iota,
    /// An inert placeholder, never a redex head.
    Var(u32),
}

#[derive(Debug)]
enum Node {
    Atom(Atom),
    App(CombTerm, CombTerm, u64),
}

/// An applicative term over S, K, ι and placeholder variables. Subterms are
/// shared, so cloning is cheap.
#[derive(Debug, Clone)]
pub struct CombTerm(Rc<Node>);

thread_local! {
    static FILLER: CombTerm = CombTerm(Rc::new(Node::Atom(Atom::S)));
}

// Long spines would otherwise be freed recursively.
impl Drop for Node {
    fn drop(&mut self) {
        let Node::App(l, r, _) = self else { return };
        if Rc::strong_count(&l.0) > 1 && Rc::strong_count(&r.0) > 1 {
            return;
        }
        let Ok(filler) = FILLER.try_with(CombTerm::clone) else {
            return;
        };
        let mut stack = vec![mem::replace(l, filler.clone()), mem::replace(r, filler.clone())];
        while let Some(CombTerm(rc)) = stack.pop() {
            // Node implements Drop, so its fields cannot be moved out by the pattern.
            #[allow(clippy::collapsible_match)]
            if let Ok(mut node) = Rc::try_unwrap(rc) {
                if let Node::App(l, r, _) = &mut node {
                    stack.push(mem::replace(l, filler.clone()));
                    stack.push(mem::replace(r, filler.clone()));
                }
            }
        }
    }
}

impl CombTerm {
    pub fn atom(a: Atom) -> CombTerm {
        CombTerm(Rc::new(Node::Atom(a)))
    }

    pub fn s() -> CombTerm {
        Self::atom(Atom::S)
    }

    pub fn k() -> CombTerm {
        Self::atom(Atom::K)
    }

    pub fn iota() -> CombTerm {
        Self::atom(Atom::Iota)
    }

    pub fn var(n: u32) -> CombTerm {
        Self::atom(Atom::Var(n))
    }

    pub fn app(f: CombTerm, x: CombTerm) -> CombTerm {
        let size = 1u64.saturating_add(f.size()).saturating_add(x.size());
        CombTerm(Rc::new(Node::App(f, x, size)))
    }

    /// `f x1 x2 ...`, associating to the left.
    pub fn apply_all(f: CombTerm, args: impl IntoIterator<Item = CombTerm>) -> CombTerm {
        args.into_iter().fold(f, CombTerm::app)
    }

    /// Node count of the unshared tree (saturating).
    pub fn size(&self) -> u64 {
        match &*self.0 {
            Node::Atom(_) => 1,
            Node::App(_, _, n) => *n,
        }
    }

    pub fn as_atom(&self) -> Option<Atom> {
        match &*self.0 {
            Node::Atom(a) => Some(*a),
            Node::App(..) => None,
        }
    }

    pub fn as_app(&self) -> Option<(&CombTerm, &CombTerm)> {
        match &*self.0 {
            Node::App(f, x, _) => Some((f, x)),
            Node::Atom(_) => None,
        }
    }

    /// Head atom and arguments of the left spine.
    pub fn spine(&self) -> (Atom, Vec<CombTerm>) {
        let mut args = Vec::new();
        let mut cur = self.clone();
        loop {
            let next = match &*cur.0 {
                Node::Atom(a) => {
                    args.reverse();
                    return (*a, args);
                }
                Node::App(f, x, _) => {
                    args.push(x.clone());
                    f.clone()
                }
            };
            cur = next;
        }
    }

    /// True if the term contains no S, K or ι redex.
    pub fn is_normal(&self) -> bool {
        let mut stack = vec![self.clone()];
        while let Some(t) = stack.pop() {
            let (head, args) = t.spine();
            let arity = match head {
                Atom::S => 3,
                Atom::K => 2,
                Atom::Iota => 1,
                Atom::Var(_) => usize::MAX,
            };
            if args.len() >= arity {
                return false;
            }
            stack.extend(args);
        }
        true
    }
}

impl PartialEq for CombTerm {
    fn eq(&self, other: &Self) -> bool {
        let mut stack = vec![(self.clone(), other.clone())];
        while let Some((a, b)) = stack.pop() {
            if Rc::ptr_eq(&a.0, &b.0) {
                continue;
            }
            match (&*a.0, &*b.0) {
                (Node::Atom(x), Node::Atom(y)) if x == y => {}
                (Node::App(f1, x1, n1), Node::App(f2, x2, n2)) if n1 == n2 => {
                    stack.push((f1.clone(), f2.clone()));
                    stack.push((x1.clone(), x2.clone()));
                }
                _ => return false,
            }
        }
        true
    }
}

impl Eq for CombTerm {}

impl fmt::Display for CombTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        enum Item {
            Term(CombTerm, bool),
            Text(&'static str),
        }
        let mut out = String::new();
        let mut stack = vec![Item::Term(self.clone(), false)];
        while let Some(item) = stack.pop() {
            match item {
                Item::Text(s) => out.push_str(s),
                Item::Term(t, parens) => {
                    let (head, args) = t.spine();
                    if parens && !args.is_empty() {
                        out.push('(');
                        stack.push(Item::Text(")"));
                    }
                    match head {
                        Atom::S => out.push('S'),
                        Atom::K => out.push('K'),
                        Atom::Iota => out.push('i'),
                        Atom::Var(n) => out.push_str(&format!("v{n}")),
                    }
                    for a in args.into_iter().rev() {
                        stack.push(Item::Term(a, true));
                        stack.push(Item::Text(" "));
                    }
                }
            }
        }
        f.write_str(&out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReductionOutcome {
    NormalForm { term: CombTerm, steps: u64 },
    BudgetExceeded { steps: u64, max_size: u64 },
}

impl ReductionOutcome {
    pub fn normal_form(&self) -> Option<&CombTerm> {
        match self {
            ReductionOutcome::NormalForm { term, .. } => Some(term),
            ReductionOutcome::BudgetExceeded { .. } => None,
        }
    }

    pub fn into_result(self) -> Result<CombTerm, IotaError> {
        match self {
            ReductionOutcome::NormalForm { term, .. } => Ok(term),
            ReductionOutcome::BudgetExceeded { steps, max_size } => {
                Err(IotaError::BudgetExceeded { steps, max_size })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budgets {
    pub steps: u64,
    pub size: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            steps: DEFAULT_STEP_BUDGET,
            size: DEFAULT_SIZE_BUDGET,
        }
    }
}

impl Budgets {
    pub fn steps(steps: u64) -> Self {
        Budgets {
            steps,
            ..Budgets::default()
        }
    }
}

fn take_arg(args: &mut Vec<CombTerm>, size: &mut u64) -> CombTerm {
    let x = args.pop().expect("arity checked");
    *size = size.saturating_sub(x.size() + 1);
    x
}

// A head-normal term whose arguments are being normalized left to right.
struct Frame {
    head: Atom,
    done: Vec<CombTerm>,
    pending: Vec<CombTerm>,
    size: u64,
}

struct Reducer {
    budgets: Budgets,
    steps: u64,
    max_size: u64,
    context: u64,
}

impl Reducer {
    fn check(&mut self, current: u64) -> bool {
        let total = current.saturating_add(self.context);
        self.max_size = self.max_size.max(total);
        self.steps <= self.budgets.steps && total <= self.budgets.size
    }

    // Contracts head redexes until the spine head is stuck.
    fn head_normal(&mut self, t: CombTerm) -> Option<(Atom, Vec<CombTerm>)> {
        // Arguments are kept in reverse, so the first argument is last.
        let mut args: Vec<CombTerm> = Vec::new();
        let mut args_size = 0u64;
        let mut head = t;
        loop {
            let atom = match &*head.0 {
                Node::App(f, x, _) => {
                    args_size = args_size.saturating_add(x.size() + 1);
                    args.push(x.clone());
                    let f = f.clone();
                    head = f;
                    continue;
                }
                Node::Atom(a) => *a,
            };
            let arity = match atom {
                Atom::S => 3,
                Atom::K => 2,
                Atom::Iota => 1,
                Atom::Var(_) => usize::MAX,
            };
            if args.len() < arity {
                args.reverse();
                return Some((atom, args));
            }
            let x = take_arg(&mut args, &mut args_size);
            head = match atom {
                Atom::S => {
                    let y = take_arg(&mut args, &mut args_size);
                    let z = take_arg(&mut args, &mut args_size);
                    CombTerm::app(CombTerm::app(x, z.clone()), CombTerm::app(y, z))
                }
                Atom::K => {
                    take_arg(&mut args, &mut args_size);
                    x
                }
                Atom::Iota => CombTerm::app(CombTerm::app(x, CombTerm::s()), CombTerm::k()),
                Atom::Var(_) => unreachable!(),
            };
            self.steps += 1;
            if !self.check(head.size().saturating_add(args_size)) {
                return None;
            }
        }
    }

    fn normalize(&mut self, t: CombTerm) -> Option<CombTerm> {
        let mut stack: Vec<Frame> = Vec::new();
        let mut current = t;
        loop {
            let (head, mut args) = self.head_normal(current)?;
            let mut value = if args.is_empty() {
                CombTerm::atom(head)
            } else {
                args.reverse();
                let first = args.pop().unwrap();
                let size = args.iter().map(CombTerm::size).fold(args.len() as u64 + 2, u64::saturating_add);
                self.context = self.context.saturating_add(size);
                stack.push(Frame {
                    head,
                    done: Vec::new(),
                    pending: args,
                    size,
                });
                current = first;
                continue;
            };
            loop {
                let Some(frame) = stack.last_mut() else {
                    return Some(value);
                };
                self.context = self.context.saturating_add(value.size());
                frame.size = frame.size.saturating_add(value.size());
                frame.done.push(value);
                if let Some(next) = frame.pending.pop() {
                    self.context -= next.size().min(self.context);
                    frame.size -= next.size().min(frame.size);
                    current = next;
                    break;
                }
                let frame = stack.pop().unwrap();
                self.context -= frame.size.min(self.context);
                value = CombTerm::apply_all(CombTerm::atom(frame.head), frame.done);
            }
        }
    }
}

/// Normal-order reduction to normal form, within the given budgets.
pub fn reduce(t: &CombTerm, budgets: Budgets) -> ReductionOutcome {
    let mut r = Reducer {
        budgets,
        steps: 0,
        max_size: t.size(),
        context: 0,
    };
    if !r.check(t.size()) {
        return ReductionOutcome::BudgetExceeded {
            steps: 0,
            max_size: r.max_size,
        };
    }
    match r.normalize(t.clone()) {
        Some(term) => ReductionOutcome::NormalForm { term, steps: r.steps },
        None => ReductionOutcome::BudgetExceeded {
            steps: r.steps,
            max_size: r.max_size,
        },
    }
}

/// `K`, used as false and as the list terminator.
pub const FALSE_BITS: &str = "1010100";
/// `ι(ιι)`, which behaves as `K I`; used as true.
pub const TRUE_BITS: &str = "10100";
/// A pairing combinator with `P x y z = z x y`.
pub const PAIRING_BITS: &str = concat!(
    "1110101010011101010100110101001010101001110101010011010100101",
    "0100111010101001101010010101010011101010100110101001101010100",
    "10011101010100110101001010100100110101001010100"
);
/// The 183-bit pairing string as usually printed. It reduces
/// `P x y z` to `z x (x z)`, so it cannot extract list tails; kept for
/// comparison only.
pub const PAIRING_AS_PRINTED: &str = concat!(
    "1110101010011101010100110101001010101001110101010011010100101",
    "0100111010101001101010010101010011101010100110101001101010100",
    "1001110101010011010100101010010011101010100110101001010100100"
);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IotaConstants {
    pub false_: IotaTerm,
    pub true_: IotaTerm,
    pub pairing: IotaTerm,
}

fn constant(bits: &str) -> IotaTerm {
    IotaTerm::parse(&bits.parse().expect("constant is a bit string")).expect("constant parses")
}

pub fn iota_constants() -> IotaConstants {
    IotaConstants {
        false_: constant(FALSE_BITS),
        true_: constant(TRUE_BITS),
        pairing: constant(PAIRING_BITS),
    }
}

/// Checks `P x y F = x` and `P x y T = y` by reduction.
pub fn selector_check(x: &CombTerm, y: &CombTerm, budgets: Budgets) -> Result<bool, IotaError> {
    let c = iota_constants();
    let pair = CombTerm::apply_all(c.pairing.to_comb(), [x.clone(), y.clone()]);
    let first = reduce(&CombTerm::app(pair.clone(), c.false_.to_comb()), budgets).into_result()?;
    let second = reduce(&CombTerm::app(pair, c.true_.to_comb()), budgets).into_result()?;
    Ok(&first == x && &second == y)
}

/// Encodes `x` as the Iota list `<b1, <b2, ... F>>` with `T` for 1 and `F`
/// for 0; each bit costs `2 + |P| + |boolean|` bits.
pub fn encode_bits(x: &BitString) -> BitString {
    let pairing: BitString = PAIRING_BITS.parse().unwrap();
    let t: BitString = TRUE_BITS.parse().unwrap();
    let f: BitString = FALSE_BITS.parse().unwrap();
    let mut out = Vec::new();
    for &b in x.bits() {
        out.extend_from_slice(&[true, true]);
        out.extend_from_slice(pairing.bits());
        out.extend_from_slice(if b { t.bits() } else { f.bits() });
    }
    out.extend_from_slice(f.bits());
    BitString::from_bits(out)
}

/// Reads a list built by [`encode_bits`] back by running it: each cell is
/// probed with marker variables to tell pairs from the terminator and to
/// read the head Boolean. The budgets apply to each probe separately.
pub fn decode_bits(p: &BitString, budgets: Budgets) -> Result<BitString, IotaError> {
    let c = iota_constants();
    let (f, t) = (c.false_.to_comb(), c.true_.to_comb());
    let (a, b) = (CombTerm::var(0), CombTerm::var(1));
    let probe = CombTerm::app(CombTerm::k(), CombTerm::app(CombTerm::k(), a.clone()));
    let pair_shape = CombTerm::app(a.clone(), b.clone());
    let mut cur = IotaTerm::parse(p)?.to_comb();
    let mut out = BitString::empty();
    for index in 0.. {
        // pair z w = z h t; with z = K(K a) that leaves `a w`, while the
        // terminator K gives back z itself.
        let shape = reduce(&CombTerm::apply_all(cur.clone(), [probe.clone(), b.clone()]), budgets).into_result()?;
        if shape == probe {
            return Ok(out);
        }
        if shape != pair_shape {
            return Err(IotaError::MalformedList { index });
        }
        let head = reduce(&CombTerm::apply_all(cur.clone(), [f.clone(), a.clone(), b.clone()]), budgets).into_result()?;
        if head == a {
            out.push(false);
        } else if head == b {
            out.push(true);
        } else {
            return Err(IotaError::MalformedList { index });
        }
        cur = reduce(&CombTerm::app(cur, t.clone()), budgets).into_result()?;
    }
    unreachable!()
}

/// `1 - sum_{n <= n_max} C_{n-1} 2^-(2n-1)`, the weight of all programs
/// longer than `2 n_max - 1` bits. Equals `binomial(2N, N) / 4^N`.
pub fn program_tail_weight(n_max: u32) -> Rational {
    let mut partial = Rational::zero();
    for n in 1..=n_max {
        partial += Rational::from_integer(crate::numerics::catalan(n - 1).into()) * pow2(-(2 * n as i64 - 1));
    }
    Rational::one() - partial
}

/// Closed form of [`program_tail_weight`].
pub fn program_tail_closed_form(n_max: u32) -> Rational {
    Rational::from_integer(central_binomial(n_max).into()) * pow2(-2 * n_max as i64)
}

/// Enclosure of the zeta number of the set of all Iota programs: exact
/// contributions of programs up to `2 n_max - 1` bits plus the weight of
/// the longer ones (`1/bin_inv(w) <= 2^-|w|`).
pub fn iota_zeta_partial(n_max: u32) -> Enclosure {
    let mut sum = IntervalSum::for_streams();
    for n in 1..=n_max as usize {
        for w in programs_of_length(2 * n - 1) {
            sum.add_exact(&recip(&bin_inv(&w)));
        }
    }
    let tail = program_tail_closed_form(n_max);
    Enclosure::new(sum.lo().clone(), sum.hi() + tail).expect("ordered bounds")
}
