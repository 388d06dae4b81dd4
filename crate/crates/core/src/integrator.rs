//! Streaming composite trapezoidal integration `g(x) = ∫₀ˣ f(t) dt`.
//!
//! For target precision `n` the point precision is `m = 2n` and the node
//! count is `k = C₂·2ⁿ`, where `C₂` is `b2 / 12` rounded up to a power of
//! two (at least 1). The total error is then
//!
//! ```text
//! x·2^-m  +  b2 / (12 k²)  <=  2^-2n + 2^-2n / C₂  <=  2^-n
//! ```
//!
//! Nodes `t_i = i·x / k` are exact dyadics because `k` is a power of two.
//! The loop visits `i = 0..=k` once, keeping only the running sum: weights
//! are folded in as integer multipliers and the single scaling by `x / 2k`
//! happens at the end.

use std::thread;

use thiserror::Error;

use crate::cf::OracleMachine;
use crate::dyadic::{Dyadic, Rounding};
use crate::funclib::{C2Function, DomainError};
use crate::profiler::sink::{self, ParallelGuard, SinkError};
use crate::CauchyReal;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("target precision must be at least 1")]
    ZeroPrecision,
    #[error("second-derivative bound {0} is negative")]
    NegativeBound(Dyadic),
    #[error("node count 2^{log2_k} does not fit in 64 bits")]
    TooManyNodes { log2_k: u32 },
    #[error("schedule bound check failed for n={n}")]
    BoundCheck { n: u32 },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IntegrateError {
    #[error("upper limit {0} lies outside [0, 1]")]
    OutsideUnitInterval(Dyadic),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("error budget {total} exceeds 2^-{n}")]
    BudgetExceeded { total: Dyadic, n: u32 },
    #[error(transparent)]
    Sink(#[from] SinkError),
}

/// Derived quantities for one target precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrecisionSchedule {
    pub n: u32,
    /// Per-point evaluation precision, `2n`.
    pub m: u32,
    /// `C₂ = 2^log2_c2`.
    pub log2_c2: u32,
    /// `k = 2^log2_k`; also the shift representing `h = x / k`.
    pub log2_k: u32,
    pub k: u64,
}

impl PrecisionSchedule {
    pub fn c2(&self) -> Dyadic {
        Dyadic::pow2(self.log2_c2 as i64)
    }
}

pub fn make_schedule(b2: &Dyadic, n: u32) -> Result<PrecisionSchedule, ScheduleError> {
    if n == 0 {
        return Err(ScheduleError::ZeroPrecision);
    }
    if b2.is_negative() {
        return Err(ScheduleError::NegativeBound(b2.clone()));
    }
    let twelve = Dyadic::from_int(12);
    let mut log2_c2 = 0u32;
    while &twelve.mul_pow2(log2_c2 as i64) < b2 {
        log2_c2 += 1;
    }
    let log2_k = log2_c2 + n;
    if log2_k >= 64 {
        return Err(ScheduleError::TooManyNodes { log2_k });
    }
    // 2^-2n + (b2/12)/k² <= 2^-n, multiplied through by 12k²
    let twelve_k2 = twelve.mul_pow2(2 * log2_k as i64);
    let lhs = &twelve_k2.mul_pow2(-2 * n as i64) + b2;
    let rhs = twelve_k2.mul_pow2(-(n as i64));
    if lhs > rhs {
        return Err(ScheduleError::BoundCheck { n });
    }
    Ok(PrecisionSchedule {
        n,
        m: 2 * n,
        log2_c2,
        log2_k,
        k: 1u64 << log2_k,
    })
}

/// Error decomposition of one integration result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorBudget {
    /// `(x / 2k) · Σ wᵢ · 2^-m = x · 2^-m`.
    pub point_error_total: Dyadic,
    /// Upper bound on `b2 / (12 k²)`.
    pub remainder_bound: Dyadic,
    /// `2^-(n+3)` when the result was rounded to `n + 2` bits, else 0.
    pub output_rounding: Dyadic,
    pub total: Dyadic,
}

impl ErrorBudget {
    fn zero() -> ErrorBudget {
        ErrorBudget {
            point_error_total: Dyadic::zero(),
            remainder_bound: Dyadic::zero(),
            output_rounding: Dyadic::zero(),
            total: Dyadic::zero(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Integration {
    pub value: Dyadic,
    pub budget: ErrorBudget,
    pub schedule: PrecisionSchedule,
}

/// `Σ wᵢ f*(tᵢ)` over `range`, with `w₀ = w_k = 1` and `wᵢ = 2` otherwise.
fn weighted_sum(
    f: &C2Function,
    x: &Dyadic,
    schedule: &PrecisionSchedule,
    range: std::ops::RangeInclusive<u64>,
) -> Result<Dyadic, DomainError> {
    let k = schedule.k;
    let shift = -(schedule.log2_k as i64);
    let mut acc = Dyadic::zero();
    for i in range {
        let t = x.mul_int_pow2(i, shift);
        sink::count_oracle_call();
        let v = f.eval_approx(&t, schedule.m)?;
        drop(t);
        acc = if i == 0 || i == k {
            &acc + &v
        } else {
            &acc + &v.mul_pow2(1)
        };
    }
    Ok(acc)
}

fn check_limit(x: &Dyadic) -> Result<(), IntegrateError> {
    if x.in_unit_interval() {
        Ok(())
    } else {
        Err(IntegrateError::OutsideUnitInterval(x.clone()))
    }
}

/// Scales the weighted sum, rounds when the budget allows, and verifies
/// the budget.
fn finish(
    f: &C2Function,
    x: &Dyadic,
    schedule: &PrecisionSchedule,
    sum: Dyadic,
) -> Result<Integration, IntegrateError> {
    let n = schedule.n;
    let exact = &sum * &x.mul_pow2(-(schedule.log2_k as i64) - 1);
    drop(sum);
    let point_error_total = x.mul_pow2(-(schedule.m as i64));
    // b2/(12k²) = (b2/3) / (4k²); b2/3 rounded up on a grid where 4·C₂ is exact
    let remainder_bound = f
        .b2()
        .div_int(3, 2 * n + 6, Rounding::Ceil)
        .mul_pow2(-2 - 2 * schedule.log2_k as i64);
    // values are dropped as soon as possible to keep the live count small
    let base = &point_error_total + &remainder_bound;
    let rounded = &base + &Dyadic::pow2(-(n as i64) - 3);
    let (value, output_rounding, total) = if rounded <= Dyadic::pow2(-(n as i64)) {
        drop(base);
        let value = exact.round_to(n + 2);
        drop(exact);
        (value, Dyadic::pow2(-(n as i64) - 3), rounded)
    } else {
        drop(rounded);
        (exact, Dyadic::zero(), base)
    };
    if total > Dyadic::pow2(-(n as i64)) {
        return Err(IntegrateError::BudgetExceeded { total, n });
    }
    Ok(Integration {
        value,
        budget: ErrorBudget {
            point_error_total,
            remainder_bound,
            output_rounding,
            total,
        },
        schedule: schedule.clone(),
    })
}

/// `g*(x)` with `|g*(x) - ∫₀ˣ f| <= 2^-n` for a dyadic `x ∈ [0, 1]`.
///
/// Performs exactly `k + 1` point evaluations (none when `x = 0`).
pub fn integrate_to_dyadic(
    f: &C2Function,
    x: &Dyadic,
    n: u32,
) -> Result<Integration, IntegrateError> {
    check_limit(x)?;
    let schedule = make_schedule(f.b2(), n)?;
    if x.is_zero() {
        return Ok(Integration {
            value: Dyadic::zero(),
            budget: ErrorBudget::zero(),
            schedule,
        });
    }
    let sum = weighted_sum(f, x, &schedule, 0..=schedule.k)?;
    finish(f, x, &schedule, sum)
}

/// Same result as [`integrate_to_dyadic`], bit for bit, with the node range
/// split across `threads` workers. Exact partial sums are merged in order.
/// Refuses to run while an instrumentation session is active.
pub fn integrate_to_dyadic_parallel(
    f: &C2Function,
    x: &Dyadic,
    n: u32,
    threads: usize,
) -> Result<Integration, IntegrateError> {
    let _guard = ParallelGuard::enter()?;
    check_limit(x)?;
    let schedule = make_schedule(f.b2(), n)?;
    if x.is_zero() {
        return Ok(Integration {
            value: Dyadic::zero(),
            budget: ErrorBudget::zero(),
            schedule,
        });
    }
    let nodes = schedule.k + 1;
    let chunks = (threads.max(1) as u64).min(nodes);
    let per = nodes.div_ceil(chunks);
    let partials: Vec<Result<Dyadic, DomainError>> = thread::scope(|scope| {
        let handles: Vec<_> = (0..chunks)
            .map(|c| {
                let lo = c * per;
                let hi = ((c + 1) * per).min(nodes) - 1;
                let schedule = &schedule;
                scope.spawn(move || weighted_sum(f, x, schedule, lo..=hi))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("integration worker panicked"))
            .collect()
    });
    let mut sum = Dyadic::zero();
    for p in partials {
        sum = &sum + &p?;
    }
    finish(f, x, &schedule, sum)
}

/// `g(x)` for an oracle-given `x ∈ [0, 1]`.
///
/// Queries `x̂ = x.approx(n + 2 + L)` with `2^L >= 1 + b0`, so moving the
/// upper limit costs at most `b0·2^-(n+2+L) < 2^-(n+2)`. The integral at
/// `x̂` is computed to `2^-(n+1)` and the result rounded to `n + 1`
/// fractional bits (`2^-(n+2)`).
pub fn integrate_oracle(f: &C2Function, x: &CauchyReal, n: u32) -> Result<Dyadic, IntegrateError> {
    let guard = 2 + f.b0().log2_ceil_one_plus();
    let p = n + guard;
    let limit = x.approx(p).clamp_unit();
    let inner = integrate_to_dyadic(f, &limit, n + 1)?;
    drop(limit);
    let endpoint = f.b0().mul_pow2(-(p as i64));
    let total = &(&inner.budget.total + &endpoint) + &Dyadic::pow2(-(n as i64) - 2);
    if total > Dyadic::pow2(-(n as i64)) {
        return Err(IntegrateError::BudgetExceeded { total, n });
    }
    Ok(inner.value.round_to(n + 1))
}

/// `g = ∫₀ˣ f` as a function-oracle computation: approximators of `x` map
/// to approximators of `g(x)`.
pub fn integral_as_function(f: &C2Function) -> OracleMachine {
    let f = f.clone();
    let description = format!("integral[{}]", f.description());
    OracleMachine::new(description, move |x, n| {
        integrate_oracle(&f, x, n).unwrap_or_else(|e| panic!("integration failed at n={n}: {e}"))
    })
}
