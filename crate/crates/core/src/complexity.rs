//! Budgeted brute-force complexity: shortest witnesses on machines with
//! outputs, the natural (index) complexity, universality factors, and
//! deficiency reports for digit prefixes.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::binstr::{bin_inv, BitString};
use crate::iota::{decode_bits, Budgets, IotaError};
use crate::machines::{domain_stream, Builtin, DomainStream, FiniteTable, MachineError, MachineSpec};
use crate::numerics::{int, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComplexityError {
    #[error("domain string {0} has no output")]
    MissingOutput(BitString),
    #[error("program-size complexity needs a prefix-free domain: {0} is a prefix of {1}")]
    NotPrefixFree(BitString, BitString),
    #[error("deficiency needs a nonempty digit string")]
    EmptyDigits,
    #[error("exponent s = {0} must be at least 1")]
    BadExponent(Box<Rational>),
    #[error(transparent)]
    Machine(#[from] MachineError),
}

/// A machine that can be run on an input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExecutableMachine {
    /// Finite table; every domain string carries an output.
    Table(FiniteTable),
    /// `M(w) = w` on every string.
    Identity,
    /// Iota programs; the output is the bit list the normal form encodes.
    Iota(Budgets),
    /// `W(0^i 1 x) = C_i(x)` for members `C_1, C_2, ...`.
    UniversalTuatara(Vec<ExecutableMachine>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunResult {
    Output(BitString),
    Undefined,
    /// The reduction budget ran out.
    Unknown,
}

impl ExecutableMachine {
    pub fn table(t: FiniteTable) -> Result<Self, ComplexityError> {
        if let Some((w, _)) = t.entries().find(|(_, o)| o.is_none()) {
            return Err(ComplexityError::MissingOutput(w.clone()));
        }
        Ok(ExecutableMachine::Table(t))
    }

    pub fn run(&self, w: &BitString) -> RunResult {
        match self {
            ExecutableMachine::Table(t) => match t.output(w) {
                Some(Some(out)) => RunResult::Output(out.clone()),
                _ => RunResult::Undefined,
            },
            ExecutableMachine::Identity => RunResult::Output(w.clone()),
            ExecutableMachine::Iota(b) => match decode_bits(w, *b) {
                Ok(out) => RunResult::Output(out),
                Err(IotaError::BudgetExceeded { .. }) => RunResult::Unknown,
                Err(_) => RunResult::Undefined,
            },
            ExecutableMachine::UniversalTuatara(ms) => {
                let Some(i) = w.bits().iter().position(|&b| b) else {
                    return RunResult::Undefined;
                };
                match i.checked_sub(1).and_then(|k| ms.get(k)) {
                    Some(m) => m.run(&BitString::from_bits(w.bits()[i + 1..].to_vec())),
                    None => RunResult::Undefined,
                }
            }
        }
    }

    /// The halting domain as a machine spec; its stream lists candidate
    /// inputs in length-lex order.
    pub fn domain_spec(&self) -> MachineSpec {
        match self {
            ExecutableMachine::Table(t) => MachineSpec::Finite(t.clone()),
            ExecutableMachine::Identity => MachineSpec::Builtin(Builtin::AllStrings),
            ExecutableMachine::Iota(_) => MachineSpec::Builtin(Builtin::Lukasiewicz),
            ExecutableMachine::UniversalTuatara(ms) => {
                MachineSpec::UniversalTuatara(ms.iter().map(Self::domain_spec).collect())
            }
        }
    }

    fn check_prefix_free(&self) -> Result<(), ComplexityError> {
        match self {
            ExecutableMachine::Table(t) => match t.prefix_violation() {
                Some((p, q)) => Err(ComplexityError::NotPrefixFree(p, q)),
                None => Ok(()),
            },
            ExecutableMachine::Identity => Err(ComplexityError::NotPrefixFree(
                BitString::empty(),
                "0".parse().expect("bit string"),
            )),
            ExecutableMachine::Iota(_) => Ok(()),
            ExecutableMachine::UniversalTuatara(ms) => ms.iter().try_for_each(Self::check_prefix_free),
        }
    }
}

/// The least witness found, in length-lex order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub input: BitString,
    /// False when an earlier candidate exhausted the reduction budget, so a
    /// smaller witness may exist.
    pub exact: bool,
}

impl Witness {
    pub fn length(&self) -> usize {
        self.input.len()
    }

    /// Index `n` with `bin(n) = input`.
    pub fn index(&self) -> BigUint {
        bin_inv(&self.input)
    }
}

/// First input (length-lex) among at most `budget` candidates with
/// `M(w) = x`. `None` means no witness within the budget.
pub fn least_witness(m: &ExecutableMachine, x: &BitString, budget: usize) -> Result<Option<Witness>, ComplexityError> {
    let mut stream: Box<dyn DomainStream> = domain_stream(&m.domain_spec())?;
    let mut exact = true;
    for _ in 0..budget {
        let Some(w) = stream.next_word() else { break };
        match m.run(&w) {
            RunResult::Output(out) if out == *x => return Ok(Some(Witness { input: w, exact })),
            RunResult::Unknown => exact = false,
            _ => {}
        }
    }
    Ok(None)
}

/// `K_M(x)`: least witness length.
pub fn plain_k(m: &ExecutableMachine, x: &BitString, budget: usize) -> Result<Option<Witness>, ComplexityError> {
    least_witness(m, x, budget)
}

/// `H_C(x)`: as [`plain_k`], on a machine with prefix-free domain.
pub fn program_size_h(c: &ExecutableMachine, x: &BitString, budget: usize) -> Result<Option<Witness>, ComplexityError> {
    c.check_prefix_free()?;
    least_witness(c, x, budget)
}

/// `nabla_V(x)`: least `n` with `V(bin(n)) = x`.
pub fn nabla(v: &ExecutableMachine, x: &BitString, budget: usize) -> Result<Option<BigUint>, ComplexityError> {
    Ok(least_witness(v, x, budget)?.map(|w| w.index()))
}

/// `max nabla_W(x) / nabla_V(x)` over the sample; `None` if some `nabla`
/// has no witness within the budget.
pub fn universality_factor(
    w: &ExecutableMachine,
    v: &ExecutableMachine,
    sample: &[BitString],
    budget: usize,
) -> Result<Option<Rational>, ComplexityError> {
    let mut worst: Option<Rational> = None;
    for x in sample {
        let (Some(a), Some(b)) = (nabla(w, x, budget)?, nabla(v, x, budget)?) else {
            return Ok(None);
        };
        let r = Rational::new(a.into(), b.into());
        if worst.as_ref().is_none_or(|c| r > *c) {
            worst = Some(r);
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    Plain,
    ProgramSize,
    /// `floor(log2 nabla)`, reported with `2^-m nabla` per row.
    Nabla,
}

/// A complexity measure against a fixed machine and budget.
#[derive(Debug, Clone)]
pub struct Oracle<'a> {
    pub machine: &'a ExecutableMachine,
    pub measure: Measure,
    pub budget: usize,
}

impl Oracle<'_> {
    pub fn evaluate(&self, x: &BitString) -> Result<Option<Witness>, ComplexityError> {
        match self.measure {
            Measure::Plain | Measure::Nabla => plain_k(self.machine, x, self.budget),
            Measure::ProgramSize => program_size_h(self.machine, x, self.budget),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeficiencyRow {
    pub m: usize,
    /// `None` when no witness was found within the budget.
    pub complexity: Option<usize>,
    pub exact: bool,
    pub threshold: Rational,
    pub slack: Option<Rational>,
    /// `2^-m nabla(prefix)` for the nabla measure.
    pub nabla_ratio: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeficiencyReport {
    pub s: Rational,
    pub rows: Vec<DeficiencyRow>,
    /// Least slack over rows with a witness.
    pub worst_slack: Option<Rational>,
}

/// Slack `C(digits[..m]) - m/s` for every `m` in `1..=|digits|`.
pub fn deficiency(digits: &BitString, s: &Rational, oracle: &Oracle) -> Result<DeficiencyReport, ComplexityError> {
    if digits.is_empty() {
        return Err(ComplexityError::EmptyDigits);
    }
    if *s < Rational::one() {
        return Err(ComplexityError::BadExponent(Box::new(s.clone())));
    }
    let mut rows = Vec::with_capacity(digits.len());
    for m in 1..=digits.len() {
        let prefix = BitString::from_bits(digits.bits()[..m].to_vec());
        let found = oracle.evaluate(&prefix)?;
        let threshold = int(m as i64) / s;
        let slack = found.as_ref().map(|w| int(w.length() as i64) - &threshold);
        let nabla_ratio = match (&found, oracle.measure) {
            (Some(w), Measure::Nabla) => Some(Rational::new(w.index().into(), (BigUint::one() << m).into())),
            _ => None,
        };
        rows.push(DeficiencyRow {
            m,
            complexity: found.as_ref().map(Witness::length),
            exact: found.as_ref().is_some_and(|w| w.exact),
            threshold,
            slack,
            nabla_ratio,
        });
    }
    let worst_slack = rows.iter().filter_map(|r| r.slack.clone()).min();
    Ok(DeficiencyReport {
        s: s.clone(),
        rows,
        worst_slack,
    })
}

/// `min_n C(digits[..n]) / n` over the prefixes that have a witness: a
/// finite-prefix proxy for the lower asymptotic complexity, not the limit.
pub fn liminf_proxy(digits: &BitString, oracle: &Oracle) -> Result<Option<Rational>, ComplexityError> {
    let mut best: Option<Rational> = None;
    for n in 1..=digits.len() {
        let prefix = BitString::from_bits(digits.bits()[..n].to_vec());
        if let Some(w) = oracle.evaluate(&prefix)? {
            let r = Rational::new(w.length().into(), n.into());
            if best.as_ref().is_none_or(|b| r < *b) {
                best = Some(r);
            }
        }
    }
    Ok(best)
}

/// `floor(log2 n)` for `n >= 1`.
pub fn floor_log2(n: &BigUint) -> u64 {
    assert!(!n.is_zero());
    n.bits() - 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iota::encode_bits;
    use crate::numerics::ratio;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn mapped(pairs: &[(&str, &str)]) -> ExecutableMachine {
        let t = FiniteTable::with_outputs(pairs.iter().map(|(a, b)| (bs(a), Some(bs(b))))).unwrap();
        ExecutableMachine::table(t).unwrap()
    }

    #[test]
    fn plain_k_examples() {
        let id = ExecutableMachine::Identity;
        for x in ["eps", "0", "101", "0000"] {
            assert_eq!(plain_k(&id, &bs(x), 1000).unwrap().unwrap().length(), bs(x).len());
        }
        let m = mapped(&[("00", "1"), ("1", "1")]);
        assert_eq!(plain_k(&m, &bs("1"), 10).unwrap().unwrap().input, bs("1"));
        assert_eq!(plain_k(&m, &bs("0"), 10).unwrap(), None);
        let no_output = FiniteTable::new([bs("0")]).unwrap();
        assert!(ExecutableMachine::table(no_output).is_err());
    }

    #[test]
    fn program_size_examples() {
        let c = mapped(&[("0", "eps")]);
        assert_eq!(program_size_h(&c, &bs("eps"), 10).unwrap().unwrap().length(), 1);
        let c = mapped(&[("10", "1"), ("11", "1")]);
        assert_eq!(program_size_h(&c, &bs("1"), 10).unwrap().unwrap().length(), 2);
        let c = mapped(&[("0", "1"), ("10", "1")]);
        assert_eq!(program_size_h(&c, &bs("1"), 10).unwrap().unwrap().length(), 1);
        let bad = mapped(&[("0", "1"), ("01", "1")]);
        assert!(matches!(program_size_h(&bad, &bs("1"), 10), Err(ComplexityError::NotPrefixFree(..))));
    }

    #[test]
    fn nabla_examples() {
        assert_eq!(nabla(&mapped(&[("0", "eps")]), &bs("eps"), 10).unwrap(), Some(BigUint::from(2u32)));
        assert_eq!(nabla(&mapped(&[("eps", "1")]), &bs("1"), 10).unwrap(), Some(BigUint::one()));
    }

    #[test]
    fn universal_run_and_factor() {
        let v = mapped(&[("0", "1"), ("11", "0")]);
        let w = ExecutableMachine::UniversalTuatara(vec![v.clone()]);
        assert_eq!(w.run(&bs("010")), RunResult::Output(bs("1")));
        assert_eq!(w.run(&bs("0111")), RunResult::Output(bs("0")));
        assert_eq!(w.run(&bs("10")), RunResult::Undefined);
        let sample = [bs("1"), bs("0")];
        assert_eq!(universality_factor(&v, &v, &sample, 100).unwrap(), Some(Rational::one()));
        let f = universality_factor(&w, &v, &sample, 100).unwrap().unwrap();
        // 010 = bin(10) vs 0 = bin(2); 0111 = bin(23) vs 11 = bin(7). At a
        // power-of-two index the factor is 2^(i+1) + 1, not 2^(i+1).
        assert_eq!(f, ratio(5, 1));
        let other = mapped(&[("0", "00")]);
        assert_eq!(universality_factor(&other, &v, &sample, 100).unwrap(), None);
    }

    #[test]
    fn k_is_floor_log_nabla() {
        let m = mapped(&[("eps", "1"), ("0", "1"), ("10", "0"), ("011", "11")]);
        for x in ["1", "0", "11"] {
            let k = plain_k(&m, &bs(x), 100).unwrap().unwrap().length() as u64;
            let n = nabla(&m, &bs(x), 100).unwrap().unwrap();
            assert_eq!(k, floor_log2(&n));
        }
    }

    #[test]
    fn iota_machine_outputs_lists() {
        let m = ExecutableMachine::Iota(Budgets::steps(10_000));
        let p = encode_bits(&bs("10"));
        assert_eq!(m.run(&p), RunResult::Output(bs("10")));
        assert_eq!(m.run(&bs("0")), RunResult::Undefined);
        // The empty list is the 7-bit constant F, the shortest list program.
        let w = plain_k(&m, &BitString::empty(), 100).unwrap().unwrap();
        assert!(w.length() <= 7);
    }

    #[test]
    fn deficiency_identity_machine() {
        let id = ExecutableMachine::Identity;
        let oracle = Oracle { machine: &id, measure: Measure::Plain, budget: 1 << 17 };
        let digits = BitString::zeros(16);
        let rep = deficiency(&digits, &Rational::one(), &oracle).unwrap();
        assert_eq!(rep.rows.len(), 16);
        assert!(rep.rows.iter().all(|r| r.slack == Some(Rational::zero())));
        assert_eq!(rep.worst_slack, Some(Rational::zero()));
        let big_s = int(1_000_000);
        let rep = deficiency(&bs("0110"), &big_s, &oracle).unwrap();
        for r in &rep.rows {
            assert_eq!(r.slack.clone().unwrap(), int(r.complexity.unwrap() as i64) - int(r.m as i64) / &big_s);
        }
        assert!(deficiency(&BitString::empty(), &Rational::one(), &oracle).is_err());
        assert!(deficiency(&digits, &ratio(1, 2), &oracle).is_err());
    }

    #[test]
    fn nabla_rows_report_ratio() {
        let id = ExecutableMachine::Identity;
        let oracle = Oracle { machine: &id, measure: Measure::Nabla, budget: 1000 };
        let rep = deficiency(&bs("101"), &int(2), &oracle).unwrap();
        // nabla(1) = 3, nabla(10) = 6, nabla(101) = 13.
        let ratios: Vec<Rational> = rep.rows.iter().map(|r| r.nabla_ratio.clone().unwrap()).collect();
        assert_eq!(ratios, vec![ratio(3, 2), ratio(6, 4), ratio(13, 8)]);
    }

    #[test]
    fn liminf_proxy_examples() {
        let id = ExecutableMachine::Identity;
        let oracle = Oracle { machine: &id, measure: Measure::Plain, budget: 1000 };
        assert_eq!(liminf_proxy(&bs("0110101"), &oracle).unwrap(), Some(Rational::one()));
        let m = mapped(&[("0", "11111111"), ("1", "1")]);
        let short = Oracle { machine: &m, measure: Measure::Plain, budget: 10 };
        assert_eq!(liminf_proxy(&bs("11111111"), &short).unwrap(), Some(ratio(1, 8)));
        let mut prev: Option<Rational> = None;
        for budget in [1, 2, 5] {
            let o = Oracle { machine: &m, measure: Measure::Plain, budget };
            let v = liminf_proxy(&bs("11111111"), &o).unwrap();
            if let (Some(p), Some(c)) = (&prev, &v) {
                assert!(c <= p);
            }
            prev = v.or(prev);
        }
    }
}
