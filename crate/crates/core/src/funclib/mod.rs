//! Computable C² functions on `[0, 1]` with certified derivative bounds.
//!
//! A [`C2Function`] pairs a point evaluator (`|eval(t, m) - f(t)| <= 2^-m`)
//! with upper bounds `b0 >= sup|f|`, `b1 >= sup|f'|`, `b2 >= sup|f''|`.
//! `b2` is the constant that drives the integrator's node count.

mod audit;
mod taylor;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::cf::OracleMachine;
use crate::dyadic::Dyadic;

pub use audit::{audit_bounds, AuditCheck, AuditConfig, AuditReport};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DomainError {
    #[error("point {0} lies outside [0, 1]")]
    OutsideUnitInterval(Dyadic),
}

/// Sup-norm bounds on `|f|`, `|f'|`, `|f''|` over `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bounds {
    pub b0: Dyadic,
    pub b1: Dyadic,
    pub b2: Dyadic,
}

impl Bounds {
    pub fn new(b0: Dyadic, b1: Dyadic, b2: Dyadic) -> Bounds {
        Bounds { b0, b1, b2 }
    }

    pub fn uniform(b: Dyadic) -> Bounds {
        Bounds::new(b.clone(), b.clone(), b)
    }

    pub fn zero() -> Bounds {
        Bounds::uniform(Dyadic::zero())
    }
}

type Evaluator = Arc<dyn Fn(&Dyadic, u32) -> Dyadic + Send + Sync>;

#[derive(Clone)]
pub struct C2Function {
    eval: Evaluator,
    bounds: Bounds,
    description: String,
}

impl C2Function {
    /// Admits an arbitrary evaluator. The caller certifies both the `2^-m`
    /// evaluation envelope on `[0, 1]` and the bounds.
    pub fn from_parts<F>(description: impl Into<String>, bounds: Bounds, eval: F) -> C2Function
    where
        F: Fn(&Dyadic, u32) -> Dyadic + Send + Sync + 'static,
    {
        C2Function {
            eval: Arc::new(eval),
            bounds,
            description: description.into(),
        }
    }

    pub fn eval_approx(&self, t: &Dyadic, m: u32) -> Result<Dyadic, DomainError> {
        if !t.in_unit_interval() {
            return Err(DomainError::OutsideUnitInterval(t.clone()));
        }
        Ok((self.eval)(t, m))
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn b0(&self) -> &Dyadic {
        &self.bounds.b0
    }

    pub fn b1(&self) -> &Dyadic {
        &self.bounds.b1
    }

    pub fn b2(&self) -> &Dyadic {
        &self.bounds.b2
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// Same evaluator with replaced bounds. Only sound if the new bounds
    /// still dominate the true sup-norms.
    pub fn with_bounds(&self, bounds: Bounds) -> C2Function {
        C2Function {
            eval: Arc::clone(&self.eval),
            bounds,
            description: self.description.clone(),
        }
    }

    pub fn with_description(mut self, description: impl Into<String>) -> C2Function {
        self.description = description.into();
        self
    }

    /// Adds `slack` to `b0`, for functions that stand in for a nearby one.
    pub fn widen_b0(&self, slack: &Dyadic) -> C2Function {
        let mut bounds = self.bounds.clone();
        bounds.b0 = &bounds.b0 + &slack.abs();
        self.with_bounds(bounds)
    }
}

impl fmt::Debug for C2Function {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("C2Function")
            .field("description", &self.description)
            .field("b0", &self.bounds.b0)
            .field("b1", &self.bounds.b1)
            .field("b2", &self.bounds.b2)
            .finish()
    }
}

/// `sum_j coeffs[j] * t^j`, evaluated exactly then rounded to `2^-m`.
pub fn poly(coeffs: Vec<Dyadic>) -> C2Function {
    let mut b0 = Dyadic::zero();
    let mut b1 = Dyadic::zero();
    let mut b2 = Dyadic::zero();
    for (j, a) in coeffs.iter().enumerate() {
        let a = a.abs();
        let j = j as i64;
        b0 = &b0 + &a;
        b1 = &b1 + &a.mul_int(j);
        b2 = &b2 + &a.mul_int(j * (j - 1).max(0));
    }
    let description = describe_poly(&coeffs);
    C2Function::from_parts(description, Bounds::new(b0, b1, b2), move |t, m| {
        let mut acc = match coeffs.last() {
            Some(a) => a.clone(),
            None => return Dyadic::zero(),
        };
        for a in coeffs.iter().rev().skip(1) {
            let prod = &acc * t;
            acc = &prod + a;
        }
        acc.round_to(m)
    })
}

fn describe_poly(coeffs: &[Dyadic]) -> String {
    let terms: Vec<String> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, a)| !a.is_zero())
        .map(|(j, a)| match j {
            0 => format!("{a}"),
            1 => format!("{a}*x"),
            _ => format!("{a}*x^{j}"),
        })
        .collect();
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join(" + ")
    }
}

/// `exp` with `b0 = b1 = b2 = 3` (`e < 3`).
pub fn exp_fn() -> C2Function {
    C2Function::from_parts("exp(x)", Bounds::uniform(Dyadic::from_int(3)), taylor::exp)
}

pub fn sin_fn() -> C2Function {
    C2Function::from_parts("sin(x)", Bounds::uniform(Dyadic::one()), taylor::sin)
}

pub fn cos_fn() -> C2Function {
    C2Function::from_parts("cos(x)", Bounds::uniform(Dyadic::one()), taylor::cos)
}

/// Pointwise sum. Operands are evaluated at `m + 2`, the sum is rounded to
/// `m + 1` fractional bits: `2^-(m+2) * 2 + 2^-(m+2) <= 2^-m`.
pub fn sum(f: &C2Function, g: &C2Function) -> C2Function {
    let bounds = Bounds::new(f.b0() + g.b0(), f.b1() + g.b1(), f.b2() + g.b2());
    let (fe, ge) = (Arc::clone(&f.eval), Arc::clone(&g.eval));
    let description = format!("({} + {})", f.description, g.description);
    C2Function::from_parts(description, bounds, move |t, m| {
        let a = fe(t, m + 2);
        let b = ge(t, m + 2);
        (&a + &b).round_to(m + 1)
    })
}

/// `c * f`. The operand is evaluated at `m + 2 + L` with `2^L >= 1 + |c|`.
pub fn scale(c: &Dyadic, f: &C2Function) -> C2Function {
    let description = format!("{c}*{}", f.description);
    if c.is_zero() {
        return C2Function::from_parts(description, Bounds::zero(), |_, _| Dyadic::zero());
    }
    let magnitude = c.abs();
    let bounds = Bounds::new(
        &magnitude * f.b0(),
        &magnitude * f.b1(),
        &magnitude * f.b2(),
    );
    let guard = 2 + c.log2_ceil_one_plus();
    let fe = Arc::clone(&f.eval);
    let c = c.clone();
    C2Function::from_parts(description, bounds, move |t, m| {
        let v = fe(t, m + guard);
        (&c * &v).round_to(m + 1)
    })
}

/// Pointwise product with Leibniz bounds.
///
/// `|fg - f~g~| <= b0(f)|g - g~| + (b0(g) + |g - g~|)|f - f~|`; `g` is
/// evaluated at `m + 3 + L(b0(f))` and `f` at `m + 3 + L(b0(g) + 1)`, so
/// each term is at most `2^-(m+3)`, and the final rounding to `m + 1` bits
/// adds `2^-(m+2)`.
pub fn product(f: &C2Function, g: &C2Function) -> C2Function {
    let b0 = f.b0() * g.b0();
    let b1 = &(f.b1() * g.b0()) + &(f.b0() * g.b1());
    let b2 = &(&(f.b2() * g.b0()) + &(f.b1() * g.b1()).mul_int(2)) + &(f.b0() * g.b2());
    let f_guard = 3 + (g.b0() + &Dyadic::one()).log2_ceil_one_plus();
    let g_guard = 3 + f.b0().log2_ceil_one_plus();
    let (fe, ge) = (Arc::clone(&f.eval), Arc::clone(&g.eval));
    let description = format!("({} * {})", f.description, g.description);
    C2Function::from_parts(description, Bounds::new(b0, b1, b2), move |t, m| {
        let a = fe(t, m + f_guard);
        let b = ge(t, m + g_guard);
        (&a * &b).round_to(m + 1)
    })
}

/// The oracle machine computing `f(x)` from an approximator of `x` in
/// `[0, 1]`.
///
/// `psi(n) = round_to(eval(clamp(x.approx(p)), n + 2), n + 1)` with
/// `p = n + 1 + L`, `2^L >= 1 + b1`: Lipschitz error `b1 * 2^-p < 2^-(n+1)`,
/// evaluation and rounding `2^-(n+2)` each. Clamping never moves the query
/// further from `x`.
pub fn lift_to_oracle_machine(f: &C2Function) -> OracleMachine {
    let guard = 1 + f.b1().log2_ceil_one_plus();
    let fe = Arc::clone(&f.eval);
    OracleMachine::new(f.description.clone(), move |x, n| {
        let point = x.approx(n + guard).clamp_unit();
        let v = fe(&point, n + 2);
        drop(point);
        v.round_to(n + 1)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cf::{check_consistency, sample_pairs, CauchyReal};

    fn d(m: i64, e: i64) -> Dyadic {
        Dyadic::new(m, e)
    }

    fn ints(v: &[i64]) -> Vec<Dyadic> {
        v.iter().map(|&i| Dyadic::from_int(i)).collect()
    }

    fn within(a: &Dyadic, b: &Dyadic, m: u32) -> bool {
        (a - b).abs() <= Dyadic::pow2(-(m as i64))
    }

    #[test]
    fn poly_examples() {
        let p = poly(ints(&[1, 0, 2]));
        assert_eq!(p.eval_approx(&d(1, -1), 20).unwrap(), d(3, -1));
        assert_eq!(p.b2(), &Dyadic::from_int(4));
        assert_eq!(poly(ints(&[0, 1])).b2(), &Dyadic::zero());
        let neg = poly(ints(&[1, -1, 0, 1]));
        assert_eq!(neg.b0(), &Dyadic::from_int(3));
        assert_eq!(neg.b1(), &Dyadic::from_int(4));
        assert_eq!(neg.b2(), &Dyadic::from_int(6));
        assert_eq!(
            poly(vec![]).eval_approx(&d(1, -1), 4).unwrap(),
            Dyadic::zero()
        );
    }

    #[test]
    fn catalog_bounds() {
        assert_eq!(exp_fn().b2(), &Dyadic::from_int(3));
        assert_eq!(sin_fn().b0(), &Dyadic::one());
        assert_eq!(cos_fn().b1(), &Dyadic::one());
    }

    #[test]
    fn domain_errors() {
        let e = exp_fn();
        assert_eq!(
            e.eval_approx(&d(3, -1), 10),
            Err(DomainError::OutsideUnitInterval(d(3, -1)))
        );
        assert!(sin_fn().eval_approx(&d(-1, -4), 10).is_err());
        assert!(e.eval_approx(&Dyadic::one(), 10).is_ok());
        assert!(e.eval_approx(&Dyadic::zero(), 10).is_ok());
        assert_eq!(e.eval_approx(&Dyadic::zero(), 20).unwrap(), Dyadic::one());
    }

    #[test]
    fn sum_matches_poly() {
        let s = sum(&poly(ints(&[0, 1])), &poly(ints(&[1])));
        let p = poly(ints(&[1, 1]));
        for i in 0..10 {
            let t = Dyadic::new(i, -3).clamp_unit();
            let m = 3 + 4 * i as u32;
            let a = s.eval_approx(&t, m).unwrap();
            let b = p.eval_approx(&t, m).unwrap();
            assert!(within(&a, &b, m));
        }
        assert_eq!(s.bounds(), &Bounds::new(d(2, 0), d(1, 0), Dyadic::zero()));
    }

    #[test]
    fn scale_zero_and_negative() {
        let z = scale(&Dyadic::zero(), &exp_fn());
        assert!(z.eval_approx(&d(1, -1), 12).unwrap().is_zero());
        assert_eq!(z.bounds(), &Bounds::zero());
        let n = scale(&d(-5, 0), &poly(ints(&[0, 1])));
        assert_eq!(n.eval_approx(&d(3, -2), 10).unwrap(), d(-15, -2));
        assert_eq!(n.b1(), &d(5, 0));
    }

    #[test]
    fn product_leibniz() {
        let x = poly(ints(&[0, 1]));
        let xx = product(&x, &x);
        let direct = poly(ints(&[0, 0, 1]));
        assert_eq!(xx.b2(), &Dyadic::from_int(2));
        assert_eq!(xx.b2(), direct.b2());
        assert_eq!(xx.b1(), direct.b1());
        assert_eq!(xx.b0(), direct.b0());
        assert_eq!(xx.eval_approx(&d(3, -2), 8).unwrap(), d(9, -4));
    }

    #[test]
    fn lift_examples() {
        let half = CauchyReal::constant(d(1, -1));
        let id = lift_to_oracle_machine(&poly(ints(&[0, 1]))).apply(&half);
        assert!(within(&id.approx(10), &d(1, -1), 10));
        let e0 = lift_to_oracle_machine(&exp_fn()).apply(&CauchyReal::constant(Dyadic::zero()));
        assert!(within(&e0.approx(10), &Dyadic::one(), 10));
        let p = lift_to_oracle_machine(&poly(ints(&[1, 0, 2]))).apply(&half);
        assert!(within(&p.approx(20), &d(3, -1), 20));
    }

    #[test]
    fn lift_clamps_out_of_range_approximations() {
        // approximations of 1 from above
        let one_plus = CauchyReal::from_fn_unchecked(None, |n| {
            &Dyadic::one() + &Dyadic::pow2(-(n as i64) - 1)
        });
        let y = lift_to_oracle_machine(&exp_fn()).apply(&one_plus);
        let pairs = sample_pairs(40, 30, 3);
        assert!(check_consistency(&y, &pairs).is_consistent());
    }

    #[test]
    fn lifted_outputs_cap_fraction_bits() {
        let x = CauchyReal::constant(d(5, -4));
        for f in [exp_fn(), sin_fn(), product(&exp_fn(), &cos_fn())] {
            let y = lift_to_oracle_machine(&f).apply(&x);
            for n in [0, 9, 33] {
                assert!(y.approx(n).frac_bits() <= n as u64 + 1);
            }
        }
    }
}
