//! Command-line front end: `eval`, `integrate`, `profile`, `check`.

use std::cmp::Ordering;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::cf::CauchyReal;
use crate::dyadic::{Decimal, Dyadic, ParseDyadicError, Rounding};
use crate::expr::{compile, CompileError};
use crate::funclib::{audit_bounds, lift_to_oracle_machine, AuditConfig, Bounds, C2Function};
use crate::integrator::{integrate_to_dyadic, IntegrateError};
use crate::profiler::{fit_space_growth, profile_integration, write_csv, ProfileError};

/// Largest precision accepted on the command line. Node counts grow as
/// `2^n`, so anything near this is already far beyond a desk-scale run.
pub const MAX_N: u32 = 64;

#[derive(Debug, Parser)]
#[command(
    name = "cfreal",
    version,
    about = "Exact reals, certified integration and space profiling"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Plain,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate f(x) to within 2^-n.
    Eval {
        #[arg(long = "fn")]
        fn_source: String,
        #[arg(long)]
        x: String,
        #[arg(long)]
        n: u32,
        #[arg(long, value_enum, default_value = "plain")]
        format: Format,
    },
    /// Integrate f over [0, x] to within 2^-n.
    Integrate {
        #[arg(long = "fn")]
        fn_source: String,
        #[arg(long)]
        x: String,
        #[arg(long)]
        n: u32,
        #[arg(long, value_enum, default_value = "plain")]
        format: Format,
    },
    /// Measure integration resources over a precision sweep.
    Profile {
        #[arg(long = "fn")]
        fn_source: String,
        #[arg(long)]
        x: String,
        /// lo:hi[:step], inclusive
        #[arg(long = "n-range")]
        n_range: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "plain")]
        format: Format,
    },
    /// Audit the derivative bounds and envelopes of f.
    Check {
        #[arg(long = "fn")]
        fn_source: String,
        #[arg(long, value_enum, default_value = "plain")]
        format: Format,
        /// Replace the certified b2 (for exercising the audit).
        #[arg(long = "override-b2", hide = true)]
        override_b2: Option<String>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Compile(#[from] CompileError),
    #[error("invalid --x: {0}")]
    Point(ParseDyadicError),
    #[error("--x {0} lies outside [0, 1]")]
    OutsideDomain(String),
    #[error("n = {0} exceeds the limit of {MAX_N}: the integrator uses C2*2^n nodes, so the run would never finish")]
    PrecisionCap(u32),
    #[error("invalid --n-range `{0}`: expected lo:hi[:step] with lo <= hi and step >= 1")]
    Range(String),
    #[error("invalid --override-b2: {0}")]
    Override(ParseDyadicError),
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("bound audit failed")]
    AuditFailed,
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::AuditFailed => 1,
            _ => 2,
        }
    }
}

fn check_n(n: u32) -> Result<u32, CliError> {
    if n > MAX_N {
        Err(CliError::PrecisionCap(n))
    } else {
        Ok(n)
    }
}

fn unit_point(text: &str) -> Result<Decimal, CliError> {
    let dec = Decimal::parse(text).map_err(CliError::Point)?;
    if dec.compare_dyadic(&Dyadic::zero()) == Ordering::Less
        || dec.compare_dyadic(&Dyadic::one()) == Ordering::Greater
    {
        return Err(CliError::OutsideDomain(text.to_string()));
    }
    Ok(dec)
}

/// `⌈n·log₁₀2⌉ + 1`.
fn decimal_digits(n: u32) -> u32 {
    (n as f64 * std::f64::consts::LOG10_2).ceil() as u32 + 1
}

pub fn parse_range(text: &str) -> Result<Vec<u32>, CliError> {
    let bad = || CliError::Range(text.to_string());
    let parts: Vec<&str> = text.split(':').collect();
    if !(2..=3).contains(&parts.len()) {
        return Err(bad());
    }
    let num = |s: &str| s.trim().parse::<u32>().map_err(|_| bad());
    let lo = num(parts[0])?;
    let hi = num(parts[1])?;
    let step = match parts.get(2) {
        Some(s) => num(s)?,
        None => 1,
    };
    if lo > hi || step == 0 {
        return Err(bad());
    }
    check_n(hi)?;
    Ok((lo..=hi).step_by(step as usize).collect())
}

pub fn run<W: Write>(cli: &Cli, out: &mut W) -> Result<(), CliError> {
    match &cli.command {
        Command::Eval {
            fn_source,
            x,
            n,
            format,
        } => cmd_eval(fn_source, x, check_n(*n)?, *format, out),
        Command::Integrate {
            fn_source,
            x,
            n,
            format,
        } => cmd_integrate(fn_source, x, check_n(*n)?, *format, out),
        Command::Profile {
            fn_source,
            x,
            n_range,
            out: path,
            format,
        } => cmd_profile(fn_source, x, n_range, path.as_ref(), *format, out),
        Command::Check {
            fn_source,
            format,
            override_b2,
        } => cmd_check(fn_source, override_b2.as_deref(), *format, out),
    }
}

pub fn cmd_eval<W: Write>(
    fn_source: &str,
    x: &str,
    n: u32,
    format: Format,
    out: &mut W,
) -> Result<(), CliError> {
    let f = compile(fn_source)?;
    let point = unit_point(x)?;
    let oracle = CauchyReal::from_fn_unchecked(x.to_string(), move |p| {
        point.to_dyadic(p + 1, Rounding::NearestEven)
    });
    let y = lift_to_oracle_machine(&f).apply(&oracle).approx(n);
    let decimal = y.to_decimal_string(decimal_digits(n));
    match format {
        Format::Plain => {
            writeln!(out, "f(x) = {y} ± 2^-{n}")?;
            writeln!(out, "decimal = {decimal}")?;
        }
        Format::Csv => {
            writeln!(out, "fn,x,n,value,decimal")?;
            writeln!(out, "{},{x},{n},{y},{decimal}", f.description())?;
        }
    }
    Ok(())
}

pub fn cmd_integrate<W: Write>(
    fn_source: &str,
    x: &str,
    n: u32,
    format: Format,
    out: &mut W,
) -> Result<(), CliError> {
    let f = compile(fn_source)?;
    let point = unit_point(x)?;
    let grid = 2 * n;
    let limit = point.to_dyadic(grid, Rounding::NearestEven);
    let grid_error = if point.compare_dyadic(&limit) == Ordering::Equal {
        Dyadic::zero()
    } else {
        f.b0().mul_pow2(-(grid as i64))
    };
    let r = integrate_to_dyadic(&f, &limit, n)?;
    let b = &r.budget;
    let decimal = r.value.to_decimal_string(decimal_digits(n));
    let total = &b.total + &grid_error;
    match format {
        Format::Plain => {
            writeln!(out, "integral of {} over [0, {x}]", f.description())?;
            writeln!(
                out,
                "n = {n}, m = {}, k = {}, c2 = {}",
                r.schedule.m,
                r.schedule.k,
                r.schedule.c2()
            )?;
            writeln!(out, "value = {}", r.value)?;
            writeln!(out, "decimal = {decimal} ± 2^-{n}")?;
            writeln!(out, "point_error_total = {}", b.point_error_total)?;
            writeln!(out, "remainder_bound = {}", b.remainder_bound)?;
            writeln!(out, "output_rounding = {}", b.output_rounding)?;
            writeln!(out, "input_grid_error = {grid_error}")?;
            writeln!(out, "total = {total}")?;
        }
        Format::Csv => {
            writeln!(
                out,
                "fn,x,n,m,k,value,decimal,point_error_total,remainder_bound,output_rounding,input_grid_error,total"
            )?;
            writeln!(
                out,
                "{},{x},{n},{},{},{},{decimal},{},{},{},{grid_error},{total}",
                f.description(),
                r.schedule.m,
                r.schedule.k,
                r.value,
                b.point_error_total,
                b.remainder_bound,
                b.output_rounding
            )?;
        }
    }
    Ok(())
}

pub fn cmd_profile<W: Write>(
    fn_source: &str,
    x: &str,
    n_range: &str,
    path: Option<&PathBuf>,
    format: Format,
    out: &mut W,
) -> Result<(), CliError> {
    let f = compile(fn_source)?;
    let n_values = parse_range(n_range)?;
    let point = unit_point(x)?;
    let grid = 2 * n_values[0].max(1);
    let limit = point.to_dyadic(grid, Rounding::NearestEven);
    let reports = profile_integration(&f, &limit, &n_values)?;
    match path {
        Some(p) => {
            let mut file = BufWriter::new(File::create(p)?);
            write_csv(&mut file, &reports)?;
            file.flush()?;
            writeln!(out, "wrote {} rows to {}", reports.len(), p.display())?;
        }
        None => write_csv(&mut *out, &reports)?,
    }
    let fit = fit_space_growth(&reports)?;
    if path.is_none() && format == Format::Csv {
        eprintln!("{fit}");
    } else {
        writeln!(out, "{fit}")?;
    }
    Ok(())
}

pub fn cmd_check<W: Write>(
    fn_source: &str,
    override_b2: Option<&str>,
    format: Format,
    out: &mut W,
) -> Result<(), CliError> {
    let mut f: C2Function = compile(fn_source)?;
    if let Some(b2) = override_b2 {
        let b2: Dyadic = b2.parse().map_err(CliError::Override)?;
        f = f.with_bounds(Bounds::new(f.b0().clone(), f.b1().clone(), b2));
    }
    let report = audit_bounds(&f, &AuditConfig::default());
    match format {
        Format::Plain => {
            writeln!(
                out,
                "{}: b0={} b1={} b2={}",
                f.description(),
                f.b0(),
                f.b1(),
                f.b2()
            )?;
            write!(out, "{report}")?;
        }
        Format::Csv => {
            writeln!(out, "check,passed,detail")?;
            for c in &report.checks {
                writeln!(
                    out,
                    "{},{},\"{}\"",
                    c.name,
                    c.passed,
                    c.detail.replace('"', "'")
                )?;
            }
        }
    }
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::AuditFailed)
    }
}
