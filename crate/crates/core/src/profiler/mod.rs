//! Resource measurement for integration runs.
//!
//! Space is measured as the peak, over the run, of the summed bit sizes of
//! all live instrumented dyadics, plus `⌈log₂(k+1)⌉` bits for the loop
//! counter. That is the library analogue of work-tape contents; it ignores
//! allocator overhead and the fixed-size bookkeeping of the loop.

pub mod sink;

use std::fmt;
use std::io::{self, Write};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::dyadic::Dyadic;
use crate::funclib::C2Function;
use crate::integrator::{integrate_to_dyadic, IntegrateError};

pub use sink::{Session, SinkError, SinkStats};

pub const CSV_HEADER: &str = "n,k,oracle_calls,peak_live_bits,peak_single_bits,wall_time_ms";

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("instrumentation unavailable: {0}")]
    Sink(#[from] SinkError),
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
    #[error("precision values must be strictly ascending")]
    NotAscending,
    #[error("result at n={n} is inconsistent with the n={} run", n + 4)]
    Envelope { n: u32 },
    #[error("need at least 3 reports with distinct n, got {0}")]
    InsufficientData(usize),
    #[error("no precision n in the sweep has 2n within the sweep range")]
    NoDoublingPair,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResourceReport {
    pub n: u32,
    pub k: u64,
    pub oracle_calls: u64,
    pub peak_live_bits: u64,
    pub peak_single_bits: u64,
    /// Largest number of simultaneously live dyadics.
    pub peak_live_values: u64,
    pub wall_time: Duration,
}

impl ResourceReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.3}",
            self.n,
            self.k,
            self.oracle_calls,
            self.peak_live_bits,
            self.peak_single_bits,
            self.wall_time.as_secs_f64() * 1e3
        )
    }
}

/// Integrates once under a fresh session and reports what it used.
pub fn measure(
    f: &C2Function,
    x: &Dyadic,
    n: u32,
) -> Result<(Dyadic, ResourceReport), ProfileError> {
    let session = Session::start()?;
    let start = Instant::now();
    // the limit is input data held for the whole run
    let limit = x.clone();
    let result = integrate_to_dyadic(f, &limit, n)?;
    let wall_time = start.elapsed();
    let stats = session.stats();
    drop(session);
    let k = result.schedule.k;
    // ⌈log₂(k+1)⌉ = bit length of k
    let counter_bits = (64 - k.leading_zeros()) as u64;
    Ok((
        result.value,
        ResourceReport {
            n,
            k,
            oracle_calls: stats.oracle_calls,
            peak_live_bits: stats.peak_live_bits + counter_bits,
            peak_single_bits: stats.peak_single_bits,
            peak_live_values: stats.peak_live_count,
            wall_time,
        },
    ))
}

/// One report per `n`; each result is also checked against an unprofiled
/// run at `n + 4`.
pub fn profile_integration(
    f: &C2Function,
    x: &Dyadic,
    n_values: &[u32],
) -> Result<Vec<ResourceReport>, ProfileError> {
    if n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ProfileError::NotAscending);
    }
    let mut reports = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let (value, report) = measure(f, x, n)?;
        let finer = integrate_to_dyadic(f, x, n + 4)?.value;
        let allowed = &Dyadic::pow2(-(n as i64)) + &Dyadic::pow2(-(n as i64) - 4);
        if (&value - &finer).abs() > allowed {
            return Err(ProfileError::Envelope { n });
        }
        reports.push(report);
    }
    Ok(reports)
}

pub fn write_csv<W: Write>(mut out: W, reports: &[ResourceReport]) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in reports {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

/// Least-squares line of `peak_live_bits` against `n`, plus a doubling
/// diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest `peak(2n) / peak(n)` over the sweep. `peak(2n)` is linearly
    /// interpolated between measured points when `2n` was not measured.
    pub max_ratio: f64,
    /// `|observed - fitted| / fitted` per report, in input order.
    pub relative_residuals: Vec<f64>,
}

impl GrowthFit {
    pub fn fitted(&self, n: u32) -> f64 {
        self.slope * n as f64 + self.intercept
    }
}

impl fmt::Display for GrowthFit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "slope={:.4} intercept={:.4} max_ratio={:.4}",
            self.slope, self.intercept, self.max_ratio
        )
    }
}

pub fn fit_space_growth(reports: &[ResourceReport]) -> Result<GrowthFit, ProfileError> {
    let mut points: Vec<(f64, f64)> = reports
        .iter()
        .map(|r| (r.n as f64, r.peak_live_bits as f64))
        .collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    points.dedup_by(|a, b| a.0 == b.0);
    if reports.len() < 3 || points.len() != reports.len() {
        return Err(ProfileError::InsufficientData(points.len()));
    }
    let count = points.len() as f64;
    let mean_n = points.iter().map(|p| p.0).sum::<f64>() / count;
    let mean_b = points.iter().map(|p| p.1).sum::<f64>() / count;
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_n) * (p.1 - mean_b)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_n).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = mean_b - slope * mean_n;

    let interpolate = |n: f64| -> Option<f64> {
        points.windows(2).find_map(|w| {
            let ((n0, b0), (n1, b1)) = (w[0], w[1]);
            (n0 <= n && n <= n1).then(|| b0 + (b1 - b0) * (n - n0) / (n1 - n0))
        })
    };
    let max_ratio = points
        .iter()
        .filter_map(|&(n, b)| interpolate(2.0 * n).map(|b2| b2 / b))
        .reduce(f64::max)
        .ok_or(ProfileError::NoDoublingPair)?;

    let relative_residuals = reports
        .iter()
        .map(|r| {
            let fitted = slope * r.n as f64 + intercept;
            (r.peak_live_bits as f64 - fitted).abs() / fitted
        })
        .collect();
    Ok(GrowthFit {
        slope,
        intercept,
        max_ratio,
        relative_residuals,
    })
}
