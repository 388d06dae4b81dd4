//! Reals in the Cauchy-function representation.
//!
//! A [`CauchyReal`] is an approximator `n -> d` with `|d - x| <= 2^-n` for
//! every precision index `n`. Approximations are returned with at most
//! `n + 1` fractional bits.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dyadic::Dyadic;

type Approximator = Arc<dyn Fn(u32) -> Dyadic + Send + Sync>;
type Machine = Arc<dyn Fn(&CauchyReal, u32) -> Dyadic + Send + Sync>;

#[derive(Clone)]
pub struct CauchyReal {
    approx: Approximator,
    description: Option<String>,
}

impl CauchyReal {
    /// Wraps an approximator that already honours the `2^-n` envelope and
    /// the `n + 1` fractional-bit cap. Nothing is checked.
    pub fn from_fn_unchecked<F>(description: impl Into<Option<String>>, f: F) -> CauchyReal
    where
        F: Fn(u32) -> Dyadic + Send + Sync + 'static,
    {
        CauchyReal {
            approx: Arc::new(f),
            description: description.into(),
        }
    }

    /// Admits a user-supplied approximator.
    ///
    /// The output is `round_to(f(n + 2), n + 1)`, which keeps the envelope
    /// (`2^-(n+2) + 2^-(n+2)`) and caps the fractional bits. Debug builds
    /// additionally cross-check `f(n + 2)` against `f(n + 4)` on every call.
    pub fn from_approximator<F>(description: impl Into<Option<String>>, f: F) -> CauchyReal
    where
        F: Fn(u32) -> Dyadic + Send + Sync + 'static,
    {
        CauchyReal::from_fn_unchecked(description, move |n| {
            let coarse = f(n + 2);
            #[cfg(debug_assertions)]
            {
                let fine = f(n + 4);
                let gap = (&coarse - &fine).abs();
                let allowed = &Dyadic::pow2(-(n as i64) - 2) + &Dyadic::pow2(-(n as i64) - 4);
                debug_assert!(
                    gap <= allowed,
                    "approximator violates the Cauchy envelope between n={} and n={}",
                    n + 2,
                    n + 4
                );
            }
            coarse.round_to(n + 1)
        })
    }

    /// The exact dyadic `d`: `approx(n) = round_to(d, n + 1)`.
    pub fn constant(d: Dyadic) -> CauchyReal {
        let description = format!("{d}");
        CauchyReal::from_fn_unchecked(description, move |n| d.round_to(n + 1))
    }

    pub fn approx(&self, n: u32) -> Dyadic {
        (self.approx)(n)
    }

    pub fn description(&self) -> Option<&str> {
        self.description.as_deref()
    }
}

impl fmt::Debug for CauchyReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CauchyReal")
            .field("description", &self.description)
            .finish_non_exhaustive()
    }
}

/// A function-oracle computation: maps an approximator of `x` to one of
/// `f(x)`.
#[derive(Clone)]
pub struct OracleMachine {
    run: Machine,
    description: String,
}

impl OracleMachine {
    pub fn new<F>(description: impl Into<String>, run: F) -> OracleMachine
    where
        F: Fn(&CauchyReal, u32) -> Dyadic + Send + Sync + 'static,
    {
        OracleMachine {
            run: Arc::new(run),
            description: description.into(),
        }
    }

    pub fn apply(&self, x: &CauchyReal) -> CauchyReal {
        let run = Arc::clone(&self.run);
        let x = x.clone();
        let description = format!("{}({})", self.description, x.description().unwrap_or("x"));
        CauchyReal::from_fn_unchecked(description, move |n| run(&x, n))
    }

    pub fn description(&self) -> &str {
        &self.description
    }
}

impl fmt::Debug for OracleMachine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OracleMachine({})", self.description)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub n1: u32,
    pub n2: u32,
    pub gap: Dyadic,
    pub allowed: Dyadic,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConsistencyReport {
    pub checked: usize,
    pub violations: Vec<Violation>,
}

impl ConsistencyReport {
    pub fn is_consistent(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Flags every pair with `|approx(n1) - approx(n2)| > 2^-n1 + 2^-n2`.
pub fn check_consistency(r: &CauchyReal, pairs: &[(u32, u32)]) -> ConsistencyReport {
    let mut report = ConsistencyReport::default();
    for &(n1, n2) in pairs {
        let gap = (&r.approx(n1) - &r.approx(n2)).abs();
        let allowed = &Dyadic::pow2(-(n1 as i64)) + &Dyadic::pow2(-(n2 as i64));
        report.checked += 1;
        if gap > allowed {
            report.violations.push(Violation {
                n1,
                n2,
                gap,
                allowed,
            });
        }
    }
    report
}

/// `count` deterministic pseudo-random precision pairs with entries in
/// `0..=max_n`.
pub fn sample_pairs(count: usize, max_n: u32, seed: u64) -> Vec<(u32, u32)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (rng.gen_range(0..=max_n), rng.gen_range(0..=max_n)))
        .collect()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NodeError {
    #[error("node count {0} is not a power of two")]
    NotPowerOfTwo(u64),
    #[error("node index {i} exceeds node count {k}")]
    IndexOutOfRange { i: u64, k: u64 },
}

/// The oracle for `t_i = (i / k) * x` with `k` a power of two.
///
/// `psi(n) = round_to((i/k) * x.approx(n + 1), n + 1)`: the scaled oracle
/// error is at most `2^-(n+1)` because `i/k <= 1`, and rounding adds at most
/// `2^-(n+2)`.
pub fn node_oracle(x: &CauchyReal, i: u64, k: u64) -> Result<CauchyReal, NodeError> {
    if !k.is_power_of_two() {
        return Err(NodeError::NotPowerOfTwo(k));
    }
    if i > k {
        return Err(NodeError::IndexOutOfRange { i, k });
    }
    let shift = -(k.trailing_zeros() as i64);
    let x = x.clone();
    let description = format!("({i}/{k})*{}", x.description().unwrap_or("x"));
    Ok(CauchyReal::from_fn_unchecked(description, move |n| {
        if i == 0 {
            return Dyadic::zero();
        }
        x.approx(n + 1).mul_int_pow2(i, shift).round_to(n + 1)
    }))
}
