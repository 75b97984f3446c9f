//! Line-oriented machine descriptions.
//!
//! ```text
//! # a prefix-free table with outputs
//! machine c
//! kind finite
//! require prefix-free
//! domain 0
//! map 10 -> 1
//!
//! machine w
//! kind construction
//! construct universal_convergent c,c
//! bound 1/2
//! bound 3/2
//! ```
//!
//! A file may define several machines; later ones refer to earlier ones by
//! name, and the last one is the machine the file describes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;
use tuatara_core::binstr::BitString;
use tuatara_core::iota::Budgets;
use tuatara_core::machines::{Builtin, ConvergentMember, FiniteTable, MachineSpec};
use tuatara_core::numerics::{parse_rational, Rational};

// Domain strings summed when checking declared zeta bounds.
const VALIDATION_BUDGET: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        message: message.into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Finite,
    Builtin,
    Construction,
}

#[derive(Debug, Default)]
struct Block {
    name: String,
    start: usize,
    kind: Option<Kind>,
    domain: Vec<(BitString, Option<BitString>, usize)>,
    require_prefix_free: bool,
    generator: Option<(Vec<String>, usize)>,
    extra: Vec<BitString>,
    construct: Option<(String, Vec<String>, usize)>,
    bounds: Vec<(Rational, usize)>,
}

/// Named machines in definition order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MachineLibrary {
    pub machines: Vec<(String, MachineSpec)>,
}

impl MachineLibrary {
    pub fn get(&self, name: &str) -> Option<&MachineSpec> {
        self.machines.iter().find(|(n, _)| n == name).map(|(_, m)| m)
    }

    pub fn last(&self) -> Option<&MachineSpec> {
        self.machines.last().map(|(_, m)| m)
    }
}

fn bits(line: usize, s: &str) -> Result<BitString, ParseError> {
    s.parse().or_else(|e| err(line, format!("bad bit string {s:?}: {e}")))
}

pub fn parse_machine_file(text: &str) -> Result<MachineSpec, ParseError> {
    let lib = parse_library(text)?;
    match lib.machines.into_iter().last() {
        Some((_, m)) => Ok(m),
        None => err(1, "no machine defined"),
    }
}

pub fn parse_library(text: &str) -> Result<MachineLibrary, ParseError> {
    let mut blocks: Vec<Block> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, rest) = content.split_once(char::is_whitespace).unwrap_or((content, ""));
        let rest = rest.trim();
        if key == "machine" {
            if rest.is_empty() || rest.contains(char::is_whitespace) || rest.contains(',') {
                return err(line, "expected `machine NAME`");
            }
            blocks.push(Block {
                name: rest.to_string(),
                start: line,
                ..Block::default()
            });
            continue;
        }
        let Some(b) = blocks.last_mut() else {
            return err(line, "expected `machine NAME` first");
        };
        match key {
            "kind" => {
                if b.kind.is_some() {
                    return err(line, "duplicate `kind` line");
                }
                b.kind = Some(match rest {
                    "finite" => Kind::Finite,
                    "builtin" => Kind::Builtin,
                    "construction" => Kind::Construction,
                    other => return err(line, format!("unknown kind {other:?}")),
                });
            }
            "domain" => {
                let w = bits(line, rest)?;
                b.domain.push((w, None, line));
            }
            "map" => {
                let Some((a, o)) = rest.split_once("->") else {
                    return err(line, "expected `map BITS -> BITS`");
                };
                let (a, o) = (bits(line, a.trim())?, bits(line, o.trim())?);
                match b.domain.iter_mut().find(|(w, _, _)| *w == a) {
                    Some((_, out @ None, _)) => *out = Some(o),
                    Some(_) => return err(line, format!("second output for {a}")),
                    None => b.domain.push((a, Some(o), line)),
                }
            }
            "require" => match rest {
                "prefix-free" => b.require_prefix_free = true,
                other => return err(line, format!("unknown requirement {other:?}")),
            },
            "generator" => {
                if b.generator.is_some() {
                    return err(line, "duplicate `generator` line");
                }
                b.generator = Some((rest.split_whitespace().map(String::from).collect(), line));
            }
            "extra" => b.extra.push(bits(line, rest)?),
            "construct" => {
                if b.construct.is_some() {
                    return err(line, "duplicate `construct` line");
                }
                let (kind, ops) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
                let ops: Vec<String> = ops
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect();
                b.construct = Some((kind.to_string(), ops, line));
            }
            "bound" => {
                let q = parse_rational(rest).map_or_else(|| err(line, format!("bad rational {rest:?}")), Ok)?;
                b.bounds.push((q, line));
            }
            other => return err(line, format!("unknown key {other:?}")),
        }
    }
    let mut lib = MachineLibrary::default();
    for b in blocks {
        if lib.get(&b.name).is_some() {
            return err(b.start, format!("machine {:?} defined twice", b.name));
        }
        let spec = build(&b, &lib)?;
        spec.validate(VALIDATION_BUDGET).or_else(|e| err(b.start, e.to_string()))?;
        lib.machines.push((b.name, spec));
    }
    Ok(lib)
}

fn build(b: &Block, lib: &MachineLibrary) -> Result<MachineSpec, ParseError> {
    let Some(kind) = b.kind else {
        return err(b.start, format!("machine {:?} has no `kind` line", b.name));
    };
    let misplaced = |what: &str, ok: bool, line: usize| if ok { Ok(()) } else { err(line, format!("`{what}` not allowed for this kind")) };
    if let Some((_, _, line)) = b.domain.first() {
        misplaced("domain", kind == Kind::Finite, *line)?;
    }
    if let Some((_, line)) = &b.generator {
        misplaced("generator", kind == Kind::Builtin, *line)?;
    }
    if let Some((_, _, line)) = &b.construct {
        misplaced("construct", kind == Kind::Construction, *line)?;
    }
    match kind {
        Kind::Finite => {
            let mut seen = BTreeMap::new();
            for (w, _, line) in &b.domain {
                if let Some(first) = seen.insert(w.clone(), *line) {
                    return err(*line, format!("duplicate domain string {w} (first on line {first})"));
                }
            }
            let table = FiniteTable::with_outputs(b.domain.iter().map(|(w, o, _)| (w.clone(), o.clone())))
                .or_else(|e| err(b.start, e.to_string()))?;
            if b.require_prefix_free {
                if let Some((p, q)) = table.prefix_violation() {
                    let line = b.domain.iter().find(|(w, _, _)| *w == q).map_or(b.start, |d| d.2);
                    return err(line, format!("domain is not prefix-free: {p} is a prefix of {q}"));
                }
            }
            Ok(MachineSpec::Finite(table))
        }
        Kind::Builtin => {
            let Some((words, line)) = &b.generator else {
                return err(b.start, "builtin machine needs a `generator` line");
            };
            let line = *line;
            let spec = match words.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
                ["all_strings"] => Builtin::AllStrings,
                ["lukasiewicz"] => Builtin::Lukasiewicz,
                ["iota"] => Builtin::Iota(Budgets::default()),
                ["iota", steps] => Builtin::Iota(Budgets::steps(
                    steps.parse().or_else(|_| err(line, format!("bad step budget {steps:?}")))?,
                )),
                ["geometric", k] => Builtin::Geometric {
                    start: k.parse().or_else(|_| err(line, format!("bad geometric start {k:?}")))?,
                    extra: b.extra.clone(),
                },
                _ => return err(line, format!("unknown generator {:?}", words.join(" "))),
            };
            if !b.extra.is_empty() && !matches!(spec, Builtin::Geometric { .. }) {
                return err(line, "`extra` lines need the geometric generator");
            }
            Ok(MachineSpec::Builtin(spec))
        }
        Kind::Construction => {
            let Some((name, ops, line)) = &b.construct else {
                return err(b.start, "construction needs a `construct` line");
            };
            let line = *line;
            let mut operands = Vec::new();
            for op in ops {
                match lib.get(op) {
                    Some(m) => operands.push(m.clone()),
                    None => return err(line, format!("unknown machine {op:?}")),
                }
            }
            let single = |mut ops: Vec<MachineSpec>| {
                if ops.len() == 1 {
                    Ok(Box::new(ops.remove(0)))
                } else {
                    err(line, format!("{name} takes exactly one operand"))
                }
            };
            if name != "universal_convergent" && !b.bounds.is_empty() {
                return err(b.bounds[0].1, "`bound` lines belong to universal_convergent");
            }
            Ok(match name.as_str() {
                "product" => MachineSpec::Product(single(operands)?),
                "double" => MachineSpec::Double(single(operands)?),
                "tuatara_of" => MachineSpec::TuataraOf(single(operands)?),
                "prime_product" => MachineSpec::PrimeProduct(single(operands)?),
                "universal_tuatara" => {
                    if operands.is_empty() {
                        return err(line, "universal_tuatara needs at least one operand");
                    }
                    MachineSpec::UniversalTuatara(operands)
                }
                "universal_convergent" => {
                    if operands.is_empty() || b.bounds.len() != operands.len() {
                        return err(line, format!("{} operands but {} `bound` lines", operands.len(), b.bounds.len()));
                    }
                    MachineSpec::UniversalConvergent(
                        operands
                            .into_iter()
                            .zip(&b.bounds)
                            .map(|(machine, (bound, _))| ConvergentMember {
                                machine,
                                bound: bound.clone(),
                            })
                            .collect(),
                    )
                }
                other => return err(line, format!("unknown construction {other:?}")),
            })
        }
    }
}

/// Renders a spec (and its operands, as separate named machines) so that
/// [`parse_machine_file`] gives it back.
pub fn render_machine_file(name: &str, spec: &MachineSpec) -> String {
    let mut out = String::new();
    let mut counter = 0;
    render_into(name, spec, &mut out, &mut counter);
    out
}

fn render_into(name: &str, spec: &MachineSpec, out: &mut String, counter: &mut usize) {
    let mut operand = |m: &MachineSpec, out: &mut String| {
        let n = format!("{name}_{counter}");
        *counter += 1;
        render_into(&n, m, out, counter);
        n
    };
    let mut body = String::new();
    let kind = match spec {
        MachineSpec::Finite(t) => {
            for (w, o) in t.entries() {
                match o {
                    Some(o) => writeln!(body, "map {w} -> {o}"),
                    None => writeln!(body, "domain {w}"),
                }
                .unwrap();
            }
            "finite"
        }
        MachineSpec::Builtin(b) => {
            let _ = match b {
                Builtin::AllStrings => writeln!(body, "generator all_strings"),
                Builtin::Lukasiewicz => writeln!(body, "generator lukasiewicz"),
                Builtin::Iota(budgets) if *budgets == Budgets::default() => writeln!(body, "generator iota"),
                Builtin::Iota(budgets) => writeln!(body, "generator iota {}", budgets.steps),
                Builtin::Geometric { start, extra } => {
                    let _ = writeln!(body, "generator geometric {start}");
                    for w in extra {
                        let _ = writeln!(body, "extra {w}");
                    }
                    Ok(())
                }
            };
            "builtin"
        }
        MachineSpec::Product(c) | MachineSpec::Double(c) | MachineSpec::TuataraOf(c) | MachineSpec::PrimeProduct(c) => {
            let kind = match spec {
                MachineSpec::Product(_) => "product",
                MachineSpec::Double(_) => "double",
                MachineSpec::TuataraOf(_) => "tuatara_of",
                _ => "prime_product",
            };
            let n = operand(c, out);
            let _ = writeln!(body, "construct {kind} {n}");
            "construction"
        }
        MachineSpec::UniversalTuatara(ms) => {
            let names: Vec<String> = ms.iter().map(|m| operand(m, out)).collect();
            let _ = writeln!(body, "construct universal_tuatara {}", names.join(","));
            "construction"
        }
        MachineSpec::UniversalConvergent(ms) => {
            let names: Vec<String> = ms.iter().map(|m| operand(&m.machine, out)).collect();
            let _ = writeln!(body, "construct universal_convergent {}", names.join(","));
            for m in ms {
                let _ = writeln!(body, "bound {}", m.bound);
            }
            "construction"
        }
    };
    let _ = writeln!(out, "machine {name}\nkind {kind}");
    out.push_str(&body);
    out.push('\n');
}
