//! Exact-rational reference values, independent of the crate's evaluators.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use cfreal::Dyadic;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn to_rational(d: &Dyadic) -> BigRational {
    let e = d.exponent();
    if e >= 0 {
        BigRational::from_integer(d.mantissa() << e as usize)
    } else {
        BigRational::new(
            d.mantissa().clone(),
            BigInt::one() << e.unsigned_abs() as usize,
        )
    }
}

pub fn pow2(e: i64) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(BigInt::one() << e as usize)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << e.unsigned_abs() as usize)
    }
}

pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(p.into(), q.into())
}

/// A rational approximation with a certified error radius.
#[derive(Debug, Clone)]
pub struct Enclosure {
    pub center: BigRational,
    pub radius: BigRational,
}

impl Enclosure {
    pub fn exact(center: BigRational) -> Enclosure {
        Enclosure {
            center,
            radius: BigRational::zero(),
        }
    }

    /// True when every point of the enclosure lies within `2^-n` of `d`.
    pub fn certifies(&self, d: &Dyadic, n: i64) -> bool {
        (to_rational(d) - &self.center).abs() + &self.radius <= pow2(-n)
    }

    pub fn gap(&self, d: &Dyadic) -> f64 {
        let g = (to_rational(d) - &self.center).abs();
        ratio_to_f64(&g)
    }

    pub fn sub(&self, other: &Enclosure) -> Enclosure {
        Enclosure {
            center: &self.center - &other.center,
            radius: &self.radius + &other.radius,
        }
    }

    pub fn scale(&self, c: &BigRational) -> Enclosure {
        Enclosure {
            center: &self.center * c,
            radius: &self.radius * c.abs(),
        }
    }
}

pub fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `Σ_{j ∈ powers} sign_j t^j / j!` until the first omitted term is below
/// `2^-bits`; the tail is bounded by `3 ×` that term (covers exp on [0,1]
/// and the alternating series).
fn series(t: &BigRational, bits: i64, start: u32, step: u32, alternating: bool) -> Enclosure {
    let eps = pow2(-bits);
    let mut sum = BigRational::zero();
    let mut j = start;
    let mut sign = BigRational::one();
    loop {
        let mut fact = BigInt::one();
        for i in 2..=j {
            fact *= i;
        }
        let term = num_traits::pow(t.clone(), j as usize) / BigRational::from_integer(fact);
        if term < eps && j > start + 2 * step {
            return Enclosure {
                center: sum,
                radius: term * BigRational::from_integer(3.into()),
            };
        }
        sum += &sign * term;
        if alternating {
            sign = -sign;
        }
        j += step;
    }
}

pub fn exp_ref(t: &BigRational, bits: i64) -> Enclosure {
    series(t, bits, 0, 1, false)
}

pub fn sin_ref(t: &BigRational, bits: i64) -> Enclosure {
    series(t, bits, 1, 2, true)
}

pub fn cos_ref(t: &BigRational, bits: i64) -> Enclosure {
    series(t, bits, 0, 2, true)
}

/// `∫₀ˣ Σ aⱼ tʲ dt = Σ aⱼ x^{j+1} / (j+1)`.
pub fn poly_integral(coeffs: &[BigRational], x: &BigRational) -> BigRational {
    coeffs
        .iter()
        .enumerate()
        .map(|(j, a)| {
            a * num_traits::pow(x.clone(), j + 1) / BigRational::from_integer((j as i64 + 1).into())
        })
        .fold(BigRational::zero(), |acc, v| acc + v)
}

pub fn poly_value(coeffs: &[BigRational], x: &BigRational) -> BigRational {
    coeffs
        .iter()
        .rev()
        .fold(BigRational::zero(), |acc, a| acc * x + a)
}

pub fn dyadics(v: &[i64]) -> Vec<Dyadic> {
    v.iter().map(|&i| Dyadic::from_int(i)).collect()
}

pub fn rationals(v: &[i64]) -> Vec<BigRational> {
    v.iter()
        .map(|&i| BigRational::from_integer(i.into()))
        .collect()
}

/// Random source text over the full grammar (no composition).
pub fn random_expr(rng: &mut ChaCha8Rng, depth: u32) -> String {
    let leaf = depth == 0 || rng.gen_bool(0.3);
    if leaf {
        return match rng.gen_range(0..6) {
            0 => "x".into(),
            1 => format!("{}", rng.gen_range(0..10)),
            2 => format!("{}/2^{}", rng.gen_range(1..16), rng.gen_range(0..5)),
            3 => "0.1".into(),
            4 => ["exp(x)", "sin(x)", "cos(x)"][rng.gen_range(0..3)].into(),
            _ => "x".into(),
        };
    }
    let a = random_expr(rng, depth - 1);
    let b = random_expr(rng, depth - 1);
    match rng.gen_range(0..5) {
        0 => format!("{a} + {b}"),
        1 => format!("{a} - ({b})"),
        2 => format!("({a})*({b})"),
        3 => format!("-({a})"),
        _ => format!("({a})"),
    }
}
