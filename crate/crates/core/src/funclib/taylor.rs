//! Taylor-series evaluators for `exp`, `sin` and `cos` on `[0, 1]`.
//!
//! Each evaluator targets `|result - f(t)| <= 2^-m` and splits the budget:
//! truncation `<= 2^-(m+1)`, accumulated term rounding `<= 2^-(m+2)`, and a
//! final rounding to `m + 1` fractional bits `<= 2^-(m+2)`.
//!
//! Terms follow the recurrence `T_j = T_{j-1} * t^r / q_j` with `q_j >= 1`
//! and `t <= 1`. Rounding each term to the working grid `2^-w` costs
//! `u = 2^-(w+1)` per step, and the propagated error of every term stays
//! below `2u`. Summing `count` terms therefore costs at most `count * 2^-w`,
//! which fits the rounding share once `w >= m + 2 + bits(count)`.

use num_bigint::BigUint;
use num_traits::One;

use crate::dyadic::{Dyadic, Rounding};

/// Smallest `N` with `numerator / (N + 1)! <= 2^-(m+1)`, searching factorials
/// along `step`-sized index jumps starting from `first`.
fn terms_needed(m: u32, numerator: u32, first: u64, step: u64) -> u64 {
    // first omitted index = first + step * count
    let target = BigUint::from(numerator) << (m as usize + 1);
    let mut fact = BigUint::one();
    let mut idx = 0u64;
    let mut count = 0u64;
    loop {
        let omitted = first + step * count;
        while idx < omitted {
            idx += 1;
            fact *= idx;
        }
        if fact >= target {
            return count;
        }
        count += 1;
    }
}

fn working_precision(m: u32, terms: u64) -> u32 {
    m + 2 + (64 - terms.leading_zeros())
}

/// `exp(t)`; remainder after the degree-`N` partial sum is at most
/// `3 / (N + 1)!` on `[0, 1]`.
pub(crate) fn exp(t: &Dyadic, m: u32) -> Dyadic {
    let degree = terms_needed(m, 3, 1, 1);
    let w = working_precision(m, degree.max(1));
    let mut sum = Dyadic::one();
    let mut term = Dyadic::one();
    for j in 1..=degree {
        let prod = &term * t;
        term = prod.div_int(j, w, Rounding::NearestEven);
        drop(prod);
        sum = &sum + &term;
    }
    drop(term);
    sum.round_to(m + 1)
}

/// Shared driver for the alternating series of `sin` (`first = 1`) and
/// `cos` (`first = 0`). The remainder is bounded by the first omitted term,
/// itself at most `1 / (first + 2 * count)!`.
fn alternating(t: &Dyadic, m: u32, first: u64) -> Dyadic {
    let count = terms_needed(m, 1, first, 2);
    let w = working_precision(m, count.max(1));
    let mut term = if first == 1 {
        t.round_to(w)
    } else {
        Dyadic::one()
    };
    let mut sum = term.clone();
    for j in 1..count {
        let p = first + 2 * j;
        let once = &term * t;
        let twice = &once * t;
        drop(once);
        term = twice.div_int((p - 1) * p, w, Rounding::NearestEven);
        drop(twice);
        sum = if j % 2 == 1 {
            &sum - &term
        } else {
            &sum + &term
        };
    }
    drop(term);
    sum.round_to(m + 1)
}

pub(crate) fn sin(t: &Dyadic, m: u32) -> Dyadic {
    alternating(t, m, 1)
}

pub(crate) fn cos(t: &Dyadic, m: u32) -> Dyadic {
    alternating(t, m, 0)
}
