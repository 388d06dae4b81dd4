//! Empirical audit of a [`C2Function`]'s certificate.
//!
//! Finite differences at interior sample points are compared against the
//! claimed bounds, and the evaluator's envelope is cross-checked against a
//! finer evaluation. A pass is evidence, not proof; a fail is a definite
//! counterexample up to the stated slack.

use std::fmt;

use crate::cf::{check_consistency, sample_pairs, CauchyReal};
use crate::dyadic::{Dyadic, Rounding};

use super::{lift_to_oracle_machine, C2Function};

#[derive(Debug, Clone)]
pub struct AuditConfig {
    pub samples: u32,
    /// Finite-difference step is `2^-step_log2`.
    pub step_log2: u32,
    /// Evaluation precision for finite differences.
    pub precision: u32,
    /// Allowed excess over `b1`/`b2`, as `2^-slack_log2`.
    pub slack_log2: u32,
    pub envelope_pairs: usize,
    pub envelope_max_n: u32,
    pub seed: u64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig {
            samples: 50,
            step_log2: 15,
            precision: 60,
            slack_log2: 5,
            envelope_pairs: 100,
            envelope_max_n: 40,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct AuditReport {
    pub checks: Vec<AuditCheck>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let verdict = if c.passed { "PASS" } else { "FAIL" };
            writeln!(f, "{verdict} {}: {}", c.name, c.detail)?;
        }
        Ok(())
    }
}

/// Points `j / (samples + 1)` for `j = 1..=samples`, snapped to 20 bits.
fn sample_points(samples: u32) -> Vec<Dyadic> {
    (1..=samples)
        .map(|j| Dyadic::from_int(j).div_int(samples + 1, 20, Rounding::NearestEven))
        .collect()
}

pub fn audit_bounds(f: &C2Function, config: &AuditConfig) -> AuditReport {
    let eval = |t: &Dyadic, m: u32| f.eval_approx(t, m).expect("audit points lie in [0, 1]");
    let p = config.precision;
    let h = Dyadic::pow2(-(config.step_log2 as i64));
    let slack = Dyadic::pow2(-(config.slack_log2 as i64));
    let eval_err = Dyadic::pow2(-(p as i64));

    let mut max0 = Dyadic::zero();
    let mut max1 = Dyadic::zero();
    let mut max2 = Dyadic::zero();
    let mut endpoints = vec![Dyadic::zero(), Dyadic::one()];
    let points = sample_points(config.samples);
    endpoints.extend(points.iter().cloned());
    for t in &endpoints {
        max0 = max0.max(eval(t, p).abs());
    }
    for t in &points {
        let lo = eval(&(t - &h), p);
        let mid = eval(t, p);
        let hi = eval(&(t + &h), p);
        // (f(t+h) - f(t-h)) / 2h and (f(t+h) - 2f(t) + f(t-h)) / h^2
        let d1 = (&hi - &lo).mul_pow2(config.step_log2 as i64 - 1).abs();
        let d2 = (&(&hi + &lo) - &mid.mul_int(2))
            .mul_pow2(2 * config.step_log2 as i64)
            .abs();
        max1 = max1.max(d1);
        max2 = max2.max(d2);
    }

    let mut checks = Vec::new();
    let bound_check = |name: &str, observed: &Dyadic, bound: &Dyadic, tol: &Dyadic| {
        let passed = *observed <= bound + tol;
        AuditCheck {
            name: name.to_string(),
            passed,
            detail: format!(
                "observed {:.6} vs bound {} (+ {:e})",
                observed.to_f64(),
                bound,
                tol.to_f64()
            ),
        }
    };
    checks.push(bound_check("sup|f| <= b0", &max0, f.b0(), &eval_err));
    checks.push(bound_check("sup|f'| <= b1", &max1, f.b1(), &slack));
    checks.push(bound_check("sup|f''| <= b2", &max2, f.b2(), &slack));

    let mut envelope_ok = true;
    let mut worst = String::from("all within envelope");
    for (i, t) in points.iter().enumerate().step_by(5) {
        let m = (i as u32 * 7) % 41;
        let coarse = eval(t, m);
        let fine = eval(t, m + 20);
        let allowed = &Dyadic::pow2(-(m as i64)) + &Dyadic::pow2(-(m as i64) - 20);
        if (&coarse - &fine).abs() > allowed {
            envelope_ok = false;
            worst = format!("t={t} m={m}: {coarse} vs {fine}");
        }
    }
    checks.push(AuditCheck {
        name: "evaluation envelope".into(),
        passed: envelope_ok,
        detail: worst,
    });

    let machine = lift_to_oracle_machine(f);
    let pairs = sample_pairs(config.envelope_pairs, config.envelope_max_n, config.seed);
    let mut violations = 0;
    let probes = [Dyadic::zero(), Dyadic::new(1, -1), Dyadic::one()];
    for x in &probes {
        let y = machine.apply(&CauchyReal::constant(x.clone()));
        violations += check_consistency(&y, &pairs).violations.len();
    }
    checks.push(AuditCheck {
        name: "lifted oracle consistency".into(),
        passed: violations == 0,
        detail: format!(
            "{} pairs at {} points, {violations} violations",
            pairs.len(),
            probes.len()
        ),
    });

    AuditReport { checks }
}
