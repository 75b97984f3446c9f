//! Command-line front end: argument handling, machine files and reports.
//!
//! [`run`] takes the argument list and two sinks and returns the exit code:
//! 0 on success, 1 for usage errors, 2 when a computation fails and 3 when
//! the budget ran out before anything could be certified.

pub mod machine_file;
pub mod report;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;
use tuatara_core::binstr::BitString;
use tuatara_core::complexity::{self, ComplexityError, ExecutableMachine, Measure, Oracle};
use tuatara_core::egyptian::{self, EgyptianError, KraftChaitin};
use tuatara_core::iota::{self, Budgets, IotaError, IotaTerm, ReductionOutcome};
use tuatara_core::machines::{self, Builtin, Class, MachineError, MachineSpec};
use tuatara_core::numerics::{parse_rational, Rational};
use tuatara_core::spectral;

pub use machine_file::{parse_library, parse_machine_file, render_machine_file, MachineLibrary, ParseError};
pub use report::{report_table, Format, ReportRow, Table};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Compute(String),
    #[error("{0}")]
    NoCertificate(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Compute(_) => 2,
            CliError::NoCertificate(_) => 3,
        }
    }
}

impl From<MachineError> for CliError {
    fn from(e: MachineError) -> Self {
        match e {
            MachineError::BudgetExhausted { .. } => CliError::NoCertificate(e.to_string()),
            _ => CliError::Compute(e.to_string()),
        }
    }
}

impl From<ComplexityError> for CliError {
    fn from(e: ComplexityError) -> Self {
        match e {
            ComplexityError::Machine(m) => m.into(),
            _ => CliError::Compute(e.to_string()),
        }
    }
}

impl From<EgyptianError> for CliError {
    fn from(e: EgyptianError) -> Self {
        CliError::Compute(e.to_string())
    }
}

impl From<IotaError> for CliError {
    fn from(e: IotaError) -> Self {
        match e {
            IotaError::BudgetExceeded { .. } => CliError::NoCertificate(e.to_string()),
            _ => CliError::Compute(e.to_string()),
        }
    }
}

fn rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).ok_or_else(|| format!("not a rational: {s:?} (use a/b or a decimal)"))
}

#[derive(Debug, Parser)]
#[command(name = "tuatara", version, about = "Certified zeta and Omega numbers of machine domains")]
struct Cli {
    /// Stream elements to enumerate (also the reduction step budget).
    #[arg(long, global = true, default_value_t = 100_000)]
    budget: usize,
    /// Most digits to print after the point.
    #[arg(long, global = true, default_value_t = 20)]
    digits: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Machine description file.
    #[arg(long, global = true)]
    machine: Option<PathBuf>,
    /// Exponent, as a/b or a decimal.
    #[arg(short = 's', global = true, value_parser = rational_arg)]
    s: Option<Rational>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sum of 1/bin_inv(w) over the domain.
    Zeta,
    /// Sum of 2^-|w| over the domain.
    Omega,
    /// Tuatara, convergent or divergent.
    Classify,
    ZetaS,
    OmegaS,
    Kappa,
    KappaNatural,
    /// Distinct unit fractions with denominators at least FLOOR.
    Egyptian {
        #[arg(value_parser = rational_arg)]
        q: Rational,
        #[arg(long, default_value_t = 1)]
        floor: u64,
        /// Give up once a denominator needs more bits than this.
        #[arg(long, default_value_t = 4096)]
        max_bits: u64,
    },
    /// Prefix-free codewords for the requested lengths, assigned online.
    Kraft { lengths: Vec<usize> },
    /// Diagonal terms of the dyadic grid of 1/m for the given denominators.
    Grid {
        denominators: Vec<u64>,
        #[arg(long, default_value_t = 20)]
        terms: usize,
    },
    /// Least index missing from the domain once the sum passes 0.Y.
    FreshIndex { y: BitString },
    /// Normalized count of domain strings of length at most N.
    Density { n: usize },
    Iota {
        #[command(subcommand)]
        command: IotaCommand,
    },
    /// Least index n with M(bin(n)) = X.
    Nabla { x: BitString },
    /// Plain, program-size and natural complexity of X.
    Complexity { x: BitString },
    /// Complexity of each prefix of DIGITS against m/s.
    Deficiency {
        #[arg(value_name = "DIGITS")]
        sequence: BitString,
        #[arg(long, value_enum, default_value_t = MeasureArg::Plain)]
        measure: MeasureArg,
    },
    /// Exact Omega and zeta of a finite prefix-free table and their ordering.
    Sanity,
}

#[derive(Debug, Subcommand)]
enum IotaCommand {
    /// Print a program as a combinator term.
    Parse { program: BitString },
    /// Reduce a program to normal form.
    Run { program: BitString },
    /// Program whose normal form encodes the bit list.
    Encode { bits: BitString },
    /// Bit list encoded by a program's normal form.
    Decode { program: BitString },
    /// Number of programs of the given length.
    Count { length: usize },
    /// Enclosure of the zeta sum over programs of up to 2N-1 bits plus tail.
    Zeta { n: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum MeasureArg {
    Plain,
    ProgramSize,
    Nabla,
}

/// Parses `args` (including the program name) and executes the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli) {
        Ok(text) => {
            let _ = out.write_all(text.as_bytes());
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn load_machine(cli: &Cli) -> Result<MachineSpec, CliError> {
    let path = cli.machine.as_ref().ok_or_else(|| CliError::Usage("this command needs --machine FILE".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    parse_machine_file(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn exponent(cli: &Cli) -> Result<&Rational, CliError> {
    cli.s.as_ref().ok_or_else(|| CliError::Usage("this command needs -s RATIONAL".into()))
}

fn executable(spec: &MachineSpec) -> Result<ExecutableMachine, CliError> {
    Ok(match spec {
        MachineSpec::Finite(t) => ExecutableMachine::table(t.clone())?,
        MachineSpec::Builtin(Builtin::AllStrings) => ExecutableMachine::Identity,
        MachineSpec::Builtin(Builtin::Iota(b)) => ExecutableMachine::Iota(*b),
        MachineSpec::UniversalTuatara(ms) => {
            ExecutableMachine::UniversalTuatara(ms.iter().map(executable).collect::<Result<_, _>>()?)
        }
        _ => return Err(CliError::Compute("this machine has no outputs to run".into())),
    })
}

fn reduction_budgets(cli: &Cli) -> Budgets {
    Budgets::steps(cli.budget as u64)
}

/// A single value; CSV output gives it a `value` header.
fn scalar(cli: &Cli, value: impl ToString) -> String {
    match cli.format {
        Format::Table => format!("{}\n", value.to_string()),
        Format::Csv => format!("value\n{}\n", value.to_string()),
    }
}

fn certified_report(cli: &Cli, rows: Vec<ReportRow>) -> Result<String, CliError> {
    let text = report_table(&rows, cli.digits).render(cli.format);
    match rows.iter().find(|r| !r.certified) {
        Some(r) => Err(CliError::NoCertificate(format!(
            "no upper bound for {} within budget {}\n{text}",
            r.label, cli.budget
        ))),
        None => Ok(text),
    }
}

fn execute(cli: &Cli) -> Result<String, CliError> {
    let b = cli.budget;
    match &cli.command {
        Command::Zeta => {
            let e = machines::zeta_enclosure(&load_machine(cli)?, b)?;
            certified_report(cli, vec![ReportRow::new("zeta", e, b)])
        }
        Command::Omega => {
            let e = machines::omega_enclosure(&load_machine(cli)?, b)?;
            certified_report(cli, vec![ReportRow::new("omega", e, b)])
        }
        Command::ZetaS => {
            let e = spectral::zeta_s(&load_machine(cli)?, exponent(cli)?, b)?;
            certified_report(cli, vec![ReportRow::new("zeta_s", e, b)])
        }
        Command::OmegaS => {
            let e = spectral::omega_s(&load_machine(cli)?, exponent(cli)?, b)?;
            certified_report(cli, vec![ReportRow::new("omega_s", e, b)])
        }
        Command::Kappa => {
            let e = spectral::kappa(&load_machine(cli)?, exponent(cli)?, b)?;
            certified_report(cli, vec![ReportRow::new("kappa", e, b)])
        }
        Command::KappaNatural => {
            let e = spectral::kappa_natural(&load_machine(cli)?, exponent(cli)?, b)?;
            certified_report(cli, vec![ReportRow::new("kappa_natural", e, b)])
        }
        Command::Classify => {
            let (z, o) = machines::classify(&load_machine(cli)?, b)?;
            let mut headers = report::REPORT_HEADERS.to_vec();
            headers.push("class");
            let mut t = Table::new(&headers);
            for (label, v) in [("zeta", &z), ("omega", &o)] {
                let mut row = ReportRow::new(label, v.witness.clone(), b);
                row.certified = v.certified;
                let mut cells = row.cells(cli.digits);
                cells.push(v.class.to_string());
                t.push(cells);
            }
            let text = t.render(cli.format);
            if z.class == Class::Unknown {
                Err(CliError::NoCertificate(format!("class not certified within budget {b}\n{text}")))
            } else {
                Ok(text)
            }
        }
        Command::Egyptian { q, floor, max_bits } => {
            let list = egyptian::egyptian_floor_capped(q, *floor, *max_bits)?;
            Ok(scalar(cli, list))
        }
        Command::Kraft { lengths } => {
            let mut kc = KraftChaitin::new();
            let mut t = Table::new(&["index", "length", "word"]);
            for (i, &len) in lengths.iter().enumerate() {
                let w = kc.push(len)?;
                t.push(vec![(i + 1).to_string(), len.to_string(), w.to_string()]);
            }
            Ok(t.render(cli.format))
        }
        Command::Grid { denominators, terms } => {
            if denominators.contains(&0) {
                return Err(CliError::Usage("denominators must be positive".into()));
            }
            let diag = egyptian::dyadic_diagonal(denominators.iter().copied(), *terms)?;
            let mut t = Table::new(&["index", "row", "denominator", "value"]);
            for (i, term) in diag.iter().enumerate() {
                let m = denominators.get(term.row).map_or_else(String::new, u64::to_string);
                t.push(vec![(i + 1).to_string(), term.row.to_string(), m, term.value().to_string()]);
            }
            Ok(t.render(cli.format))
        }
        Command::FreshIndex { y } => {
            let j = machines::fresh_index(&load_machine(cli)?, y, b)?;
            Ok(scalar(cli, j))
        }
        Command::Density { n } => {
            let e = machines::density_statistic(&load_machine(cli)?, *n, b)?;
            certified_report(cli, vec![ReportRow::new(format!("density({n})"), e, b)])
        }
        Command::Iota { command } => iota_command(cli, command),
        Command::Nabla { x } => {
            let m = executable(&load_machine(cli)?)?;
            match complexity::least_witness(&m, x, b)? {
                Some(w) if w.exact => Ok(scalar(cli, w.index())),
                Some(w) => Err(CliError::NoCertificate(format!(
                    "found index {} but an earlier candidate ran out of reduction steps",
                    w.index()
                ))),
                None => Err(CliError::NoCertificate(format!("no witness for {x} among {b} candidates"))),
            }
        }
        Command::Complexity { x } => complexity_command(cli, x),
        Command::Deficiency { sequence, measure } => {
            let m = executable(&load_machine(cli)?)?;
            let s = exponent(cli)?;
            let measure = match measure {
                MeasureArg::Plain => Measure::Plain,
                MeasureArg::ProgramSize => Measure::ProgramSize,
                MeasureArg::Nabla => Measure::Nabla,
            };
            let oracle = Oracle {
                machine: &m,
                measure,
                budget: b,
            };
            let rep = complexity::deficiency(sequence, s, &oracle)?;
            let mut t = Table::new(&["m", "complexity", "exact", "threshold", "slack", "nabla_ratio"]);
            let opt = |o: Option<String>| o.unwrap_or_else(|| "-".into());
            for r in &rep.rows {
                t.push(vec![
                    r.m.to_string(),
                    opt(r.complexity.map(|c| c.to_string())),
                    r.exact.to_string(),
                    r.threshold.to_string(),
                    opt(r.slack.as_ref().map(Rational::to_string)),
                    opt(r.nabla_ratio.as_ref().map(Rational::to_string)),
                ]);
            }
            Ok(t.render(cli.format))
        }
        Command::Sanity => {
            let spec = load_machine(cli)?;
            let table = spec
                .as_finite()
                .ok_or_else(|| CliError::Compute("sanity needs a finite machine".into()))?;
            let c = machines::sanity_chain(table)?;
            let mut t = Table::new(&["omega", "zeta", "holds", "strict_expected", "strict_holds"]);
            t.push(vec![
                c.omega.to_string(),
                c.zeta.to_string(),
                c.holds.to_string(),
                c.strict_expected.to_string(),
                c.strict_holds.to_string(),
            ]);
            Ok(t.render(cli.format))
        }
    }
}

fn iota_command(cli: &Cli, command: &IotaCommand) -> Result<String, CliError> {
    let budgets = reduction_budgets(cli);
    match command {
        IotaCommand::Parse { program } => Ok(scalar(cli, IotaTerm::parse(program)?.to_comb())),
        IotaCommand::Run { program } => {
            let term = IotaTerm::parse(program)?.to_comb();
            match iota::reduce(&term, budgets) {
                ReductionOutcome::NormalForm { term, steps } => {
                    let mut t = Table::new(&["normal_form", "steps"]);
                    t.push(vec![term.to_string(), steps.to_string()]);
                    Ok(t.render(cli.format))
                }
                ReductionOutcome::BudgetExceeded { steps, max_size } => {
                    Err(IotaError::BudgetExceeded { steps, max_size }.into())
                }
            }
        }
        IotaCommand::Encode { bits } => Ok(scalar(cli, iota::encode_bits(bits))),
        IotaCommand::Decode { program } => Ok(scalar(cli, iota::decode_bits(program, budgets)?)),
        IotaCommand::Count { length } => Ok(scalar(cli, iota::count_programs(*length))),
        IotaCommand::Zeta { n } => {
            if *n == 0 {
                return Err(CliError::Usage("N must be at least 1".into()));
            }
            let e = iota::iota_zeta_partial(*n);
            certified_report(cli, vec![ReportRow::new(format!("iota_zeta({n})"), e, cli.budget)])
        }
    }
}

fn complexity_command(cli: &Cli, x: &BitString) -> Result<String, CliError> {
    let m = executable(&load_machine(cli)?)?;
    let b = cli.budget;
    let mut t = Table::new(&["measure", "value", "witness", "exact"]);
    let plain = complexity::plain_k(&m, x, b)?;
    let Some(k) = plain else {
        return Err(CliError::NoCertificate(format!("no witness for {x} among {b} candidates")));
    };
    let index = k.index();
    t.push(vec!["K".into(), k.length().to_string(), k.input.to_string(), k.exact.to_string()]);
    match complexity::program_size_h(&m, x, b) {
        Ok(Some(h)) => t.push(vec!["H".into(), h.length().to_string(), h.input.to_string(), h.exact.to_string()]),
        Ok(None) | Err(ComplexityError::NotPrefixFree(..)) => {
            t.push(vec!["H".into(), "-".into(), "-".into(), "false".into()])
        }
        Err(e) => return Err(e.into()),
    }
    t.push(vec!["nabla".into(), index.to_string(), k.input.to_string(), k.exact.to_string()]);
    Ok(t.render(cli.format))
}
