//! Exact dyadic rationals `mantissa * 2^exponent`.
//!
//! Values are kept in canonical form (odd mantissa, or zero with exponent
//! zero), so structural equality is value equality. Addition, subtraction
//! and multiplication are exact; the only lossy operations take an explicit
//! precision and a [`Rounding`] mode.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::profiler::sink;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseDyadicError {
    #[error("empty numeric literal")]
    Empty,
    #[error("malformed numeric literal `{0}`")]
    Malformed(String),
    #[error("`{0}` is not a dyadic rational")]
    NotDyadic(String),
    #[error("exponent in `{0}` is out of range")]
    ExponentRange(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rounding {
    /// Round to nearest, ties to even.
    NearestEven,
    /// Toward +infinity.
    Ceil,
    /// Toward -infinity.
    Floor,
}

pub struct Dyadic {
    mantissa: BigInt,
    exponent: i64,
    // Instrumentation session this value was registered with (0: none).
    tag: u32,
}

fn checked_exp(e: Option<i64>) -> i64 {
    e.expect("dyadic exponent overflow")
}

/// Divides `num` by `den > 0`, rounding the quotient to an integer.
fn div_round(num: &BigInt, den: &BigInt, mode: Rounding) -> BigInt {
    let (q, r) = num.div_mod_floor(den);
    if r.is_zero() {
        return q;
    }
    match mode {
        Rounding::Floor => q,
        Rounding::Ceil => q + 1,
        Rounding::NearestEven => {
            let twice: BigInt = &r << 1usize;
            match twice.cmp(den) {
                Ordering::Less => q,
                Ordering::Greater => q + 1,
                Ordering::Equal => {
                    if q.is_even() {
                        q
                    } else {
                        q + 1
                    }
                }
            }
        }
    }
}

impl Dyadic {
    /// Builds `mantissa * 2^exponent`, canonicalizing.
    pub fn new(mantissa: impl Into<BigInt>, exponent: i64) -> Dyadic {
        Self::from_parts(mantissa.into(), exponent)
    }

    fn from_parts(mut mantissa: BigInt, mut exponent: i64) -> Dyadic {
        if mantissa.is_zero() {
            exponent = 0;
        } else {
            let tz = mantissa.trailing_zeros().unwrap_or(0);
            if tz > 0 {
                mantissa >>= tz as usize;
                exponent = checked_exp(exponent.checked_add(tz as i64));
            }
        }
        let tag = sink::register(mantissa.bits() + exponent.unsigned_abs());
        Dyadic {
            mantissa,
            exponent,
            tag,
        }
    }

    pub fn zero() -> Dyadic {
        Self::from_parts(BigInt::zero(), 0)
    }

    pub fn one() -> Dyadic {
        Self::from_parts(BigInt::one(), 0)
    }

    pub fn from_int(i: impl Into<BigInt>) -> Dyadic {
        Self::from_parts(i.into(), 0)
    }

    /// `2^e`.
    pub fn pow2(e: i64) -> Dyadic {
        Self::from_parts(BigInt::one(), e)
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    pub fn signum(&self) -> i32 {
        match self.mantissa.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    /// `bits(|mantissa|) + |exponent|`.
    pub fn bit_size(&self) -> u64 {
        self.mantissa.bits() + self.exponent.unsigned_abs()
    }

    /// Number of bits after the binary point in canonical form.
    pub fn frac_bits(&self) -> u64 {
        if self.exponent < 0 {
            self.exponent.unsigned_abs()
        } else {
            0
        }
    }

    pub fn abs(&self) -> Dyadic {
        Self::from_parts(self.mantissa.abs(), self.exponent)
    }

    /// Exact multiplication by `2^shift`.
    pub fn mul_pow2(&self, shift: i64) -> Dyadic {
        if self.is_zero() {
            return Dyadic::zero();
        }
        Self::from_parts(
            self.mantissa.clone(),
            checked_exp(self.exponent.checked_add(shift)),
        )
    }

    /// Exact multiplication by an integer.
    pub fn mul_int(&self, factor: impl Into<BigInt>) -> Dyadic {
        Self::from_parts(&self.mantissa * factor.into(), self.exponent)
    }

    /// Exact `self * factor * 2^shift`, built in one step.
    pub fn mul_int_pow2(&self, factor: impl Into<BigInt>, shift: i64) -> Dyadic {
        Self::from_parts(
            &self.mantissa * factor.into(),
            checked_exp(self.exponent.checked_add(shift)),
        )
    }

    /// `true` when `0 <= self <= 1`.
    pub fn in_unit_interval(&self) -> bool {
        if self.is_negative() {
            return false;
        }
        match self.exponent.cmp(&0) {
            // odd mantissa, so m * 2^e <= 1 iff m < 2^-e
            Ordering::Less => self.mantissa.bits() <= self.exponent.unsigned_abs(),
            Ordering::Equal => self.mantissa <= BigInt::one(),
            Ordering::Greater => false,
        }
    }

    /// Clamps to `[0, 1]`.
    pub fn clamp_unit(&self) -> Dyadic {
        if self.is_negative() {
            Dyadic::zero()
        } else if self.in_unit_interval() {
            self.clone()
        } else {
            Dyadic::one()
        }
    }

    /// Rounds to the grid `2^-m` (round to nearest, ties to even).
    ///
    /// The result is within `2^-(m+1)` of `self` and has at most `m`
    /// fractional bits.
    pub fn round_to(&self, m: u32) -> Dyadic {
        self.round_with(m, Rounding::NearestEven)
    }

    pub fn round_with(&self, m: u32, mode: Rounding) -> Dyadic {
        let grid = -(m as i64);
        if self.exponent >= grid {
            return self.clone();
        }
        let shift = (grid - self.exponent) as usize;
        let den = BigInt::one() << shift;
        Self::from_parts(div_round(&self.mantissa, &den, mode), grid)
    }

    /// `self / divisor` rounded onto the grid `2^-prec`.
    pub fn div_int(&self, divisor: impl Into<BigInt>, prec: u32, mode: Rounding) -> Dyadic {
        let mut den: BigInt = divisor.into();
        assert!(den.is_positive(), "division by a non-positive integer");
        // self / divisor = mantissa * 2^(exponent + prec) / divisor * 2^-prec
        let scale = checked_exp(self.exponent.checked_add(prec as i64));
        let num = if scale >= 0 {
            &self.mantissa << scale as usize
        } else {
            den <<= scale.unsigned_abs() as usize;
            self.mantissa.clone()
        };
        Self::from_parts(div_round(&num, &den, mode), -(prec as i64))
    }

    /// Smallest `L >= 0` with `1 + |self| <= 2^L`.
    pub fn log2_ceil_one_plus(&self) -> u32 {
        let ceil = self.abs().ceil_int();
        ceil.bits() as u32
    }

    /// `⌈self⌉` as an integer.
    pub fn ceil_int(&self) -> BigInt {
        if self.exponent >= 0 {
            &self.mantissa << self.exponent as usize
        } else {
            let den = BigInt::one() << self.exponent.unsigned_abs() as usize;
            div_round(&self.mantissa, &den, Rounding::Ceil)
        }
    }

    /// Parses a finite decimal literal and rounds it to the grid `2^-m`.
    pub fn from_decimal(s: &str, m: u32) -> Result<Dyadic, ParseDyadicError> {
        let dec = Decimal::parse(s)?;
        Ok(dec.to_dyadic(m, Rounding::NearestEven))
    }

    /// Lossy conversion for reporting.
    pub fn to_f64(&self) -> f64 {
        let bits = self.mantissa.bits() as i64;
        let keep = 60i64;
        let (m, e) = if bits > keep {
            (
                &self.mantissa >> (bits - keep) as usize,
                self.exponent + bits - keep,
            )
        } else {
            (self.mantissa.clone(), self.exponent)
        };
        m.to_f64().unwrap_or(f64::NAN) * 2f64.powi(e.clamp(-2000, 2000) as i32)
    }

    /// Decimal rendering with exactly `digits` fractional digits, rounding
    /// half away from zero at the last digit.
    pub fn to_decimal_string(&self, digits: u32) -> String {
        let ten_pow = BigInt::from(10u32).pow(digits);
        let mag = self.mantissa.abs() * ten_pow;
        let scaled = if self.exponent >= 0 {
            mag << self.exponent as usize
        } else {
            let shift = self.exponent.unsigned_abs() as usize;
            let den = BigInt::one() << shift;
            let (q, r) = mag.div_mod_floor(&den);
            if (&r << 1usize) >= den {
                q + 1
            } else {
                q
            }
        };
        let mut text = scaled.to_string();
        let digits = digits as usize;
        if digits > 0 {
            if text.len() <= digits {
                text = "0".repeat(digits + 1 - text.len()) + &text;
            }
            text.insert(text.len() - digits, '.');
        }
        if self.is_negative() && scaled_nonzero(&text) {
            text.insert(0, '-');
        }
        text
    }
}

fn scaled_nonzero(text: &str) -> bool {
    text.bytes().any(|b| (b'1'..=b'9').contains(&b))
}

/// An exact finite decimal `digits / 10^scale`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decimal {
    numerator: BigInt,
    scale: u32,
}

impl Decimal {
    pub fn parse(s: &str) -> Result<Decimal, ParseDyadicError> {
        let t = s.trim();
        if t.is_empty() {
            return Err(ParseDyadicError::Empty);
        }
        let (negative, body) = match t.as_bytes()[0] {
            b'-' => (true, &t[1..]),
            b'+' => (false, &t[1..]),
            _ => (false, t),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        let all_digits = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
        if int_part.is_empty() || !all_digits(int_part) || !all_digits(frac_part) {
            return Err(ParseDyadicError::Malformed(s.to_string()));
        }
        if body.contains('.') && frac_part.is_empty() {
            return Err(ParseDyadicError::Malformed(s.to_string()));
        }
        let digits = format!("{int_part}{frac_part}");
        let mut numerator: BigInt = digits
            .parse()
            .map_err(|_| ParseDyadicError::Malformed(s.to_string()))?;
        if negative {
            numerator = -numerator;
        }
        Ok(Decimal {
            numerator,
            scale: frac_part.len() as u32,
        })
    }

    pub fn numerator(&self) -> &BigInt {
        &self.numerator
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    fn denominator(&self) -> BigInt {
        BigInt::from(10u32).pow(self.scale)
    }

    /// Rounds onto the grid `2^-m`.
    pub fn to_dyadic(&self, m: u32, mode: Rounding) -> Dyadic {
        let num = &self.numerator << m as usize;
        Dyadic::from_parts(div_round(&num, &self.denominator(), mode), -(m as i64))
    }

    /// The exact value, when it is dyadic.
    pub fn exact_dyadic(&self) -> Option<Dyadic> {
        // 10^s = 2^s 5^s: dyadic iff 5^s divides the numerator
        let five = BigInt::from(5u32).pow(self.scale);
        let (q, r) = self.numerator.div_mod_floor(&five);
        r.is_zero()
            .then(|| Dyadic::from_parts(q, -(self.scale as i64)))
    }

    pub fn compare_dyadic(&self, d: &Dyadic) -> Ordering {
        // numerator / 10^s  vs  m 2^e, scaled by 10^s 2^max(0,-e)
        let lhs_shift = (-d.exponent).max(0) as usize;
        let rhs_shift = d.exponent.max(0) as usize;
        let lhs = &self.numerator << lhs_shift;
        let rhs = (&d.mantissa * self.denominator()) << rhs_shift;
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut text = self.numerator.abs().to_string();
        let s = self.scale as usize;
        if s > 0 {
            if text.len() <= s {
                text = "0".repeat(s + 1 - text.len()) + &text;
            }
            text.insert(text.len() - s, '.');
        }
        if self.numerator.is_negative() {
            text.insert(0, '-');
        }
        f.write_str(&text)
    }
}

impl Drop for Dyadic {
    fn drop(&mut self) {
        if self.tag != 0 {
            sink::release(self.tag, self.bit_size());
        }
    }
}

impl Clone for Dyadic {
    fn clone(&self) -> Dyadic {
        let tag = sink::register(self.bit_size());
        Dyadic {
            mantissa: self.mantissa.clone(),
            exponent: self.exponent,
            tag,
        }
    }
}

impl PartialEq for Dyadic {
    fn eq(&self, other: &Dyadic) -> bool {
        self.exponent == other.exponent && self.mantissa == other.mantissa
    }
}

impl Eq for Dyadic {}

impl Hash for Dyadic {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.mantissa.hash(state);
        self.exponent.hash(state);
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Dyadic) -> Ordering {
        let (sa, sb) = (self.signum(), other.signum());
        if sa != sb {
            return sa.cmp(&sb);
        }
        let e = self.exponent.min(other.exponent);
        let a = &self.mantissa << (self.exponent - e) as usize;
        let b = &other.mantissa << (other.exponent - e) as usize;
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Dyadic) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dyadic({self})")
    }
}

/// Canonical `p/2^q` form; integers print without the denominator.
impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent >= 0 {
            write!(f, "{}", &self.mantissa << self.exponent as usize)
        } else {
            write!(f, "{}/2^{}", self.mantissa, self.exponent.unsigned_abs())
        }
    }
}

/// Accepts `p/2^q` and decimal literals whose value is exactly dyadic.
impl FromStr for Dyadic {
    type Err = ParseDyadicError;

    fn from_str(s: &str) -> Result<Dyadic, ParseDyadicError> {
        let t = s.trim();
        if let Some((p, q)) = t.split_once('/') {
            let q = q
                .trim()
                .strip_prefix("2^")
                .ok_or_else(|| ParseDyadicError::Malformed(s.to_string()))?;
            let p: BigInt = p
                .trim()
                .parse()
                .map_err(|_| ParseDyadicError::Malformed(s.to_string()))?;
            if q.is_empty() || !q.bytes().all(|b| b.is_ascii_digit()) {
                return Err(ParseDyadicError::Malformed(s.to_string()));
            }
            let q: i64 = q
                .parse()
                .map_err(|_| ParseDyadicError::ExponentRange(s.to_string()))?;
            return Ok(Dyadic::from_parts(p, -q));
        }
        Decimal::parse(t)?
            .exact_dyadic()
            .ok_or_else(|| ParseDyadicError::NotDyadic(s.to_string()))
    }
}

impl From<i64> for Dyadic {
    fn from(v: i64) -> Dyadic {
        Dyadic::from_int(v)
    }
}

impl From<&BigUint> for Dyadic {
    fn from(v: &BigUint) -> Dyadic {
        Dyadic::from_int(BigInt::from(v.clone()))
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;

    fn add(self, rhs: &Dyadic) -> Dyadic {
        if rhs.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return rhs.clone();
        }
        let e = self.exponent.min(rhs.exponent);
        let a = &self.mantissa << (self.exponent - e) as usize;
        let b = &rhs.mantissa << (rhs.exponent - e) as usize;
        Dyadic::from_parts(a + b, e)
    }
}

impl Sub for &Dyadic {
    type Output = Dyadic;

    fn sub(self, rhs: &Dyadic) -> Dyadic {
        let e = self.exponent.min(rhs.exponent);
        let a = &self.mantissa << (self.exponent - e) as usize;
        let b = &rhs.mantissa << (rhs.exponent - e) as usize;
        Dyadic::from_parts(a - b, e)
    }
}

impl Mul for &Dyadic {
    type Output = Dyadic;

    fn mul(self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() || rhs.is_zero() {
            return Dyadic::zero();
        }
        Dyadic::from_parts(
            &self.mantissa * &rhs.mantissa,
            checked_exp(self.exponent.checked_add(rhs.exponent)),
        )
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;

    fn neg(self) -> Dyadic {
        Dyadic::from_parts(-&self.mantissa, self.exponent)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr for Dyadic {
            type Output = Dyadic;
            fn $method(self, rhs: Dyadic) -> Dyadic {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Dyadic> for Dyadic {
            type Output = Dyadic;
            fn $method(self, rhs: &Dyadic) -> Dyadic {
                (&self).$method(rhs)
            }
        }
        impl $tr<Dyadic> for &Dyadic {
            type Output = Dyadic;
            fn $method(self, rhs: Dyadic) -> Dyadic {
                self.$method(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Dyadic {
    type Output = Dyadic;

    fn neg(self) -> Dyadic {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn d(m: i64, e: i64) -> Dyadic {
        Dyadic::new(m, e)
    }

    fn rational(x: &Dyadic) -> BigRational {
        let one = BigInt::one();
        if x.exponent() >= 0 {
            BigRational::from_integer(x.mantissa() << x.exponent() as usize)
        } else {
            BigRational::new(
                x.mantissa().clone(),
                one << x.exponent().unsigned_abs() as usize,
            )
        }
    }

    fn pow2_rational(e: i64) -> BigRational {
        rational(&Dyadic::pow2(e))
    }

    #[test]
    fn add_examples() {
        assert_eq!(&d(1, -1) + &d(1, -2), d(3, -2));
        assert_eq!(&d(5, -7) + &Dyadic::zero(), d(5, -7));
        let s = &d(5, -3) + &d(3, -3);
        assert_eq!(s.mantissa(), &BigInt::one());
        assert_eq!(s.exponent(), 0);
    }

    #[test]
    fn mul_examples() {
        assert_eq!(&d(3, -2) * &d(1, -1), d(3, -3));
        assert_eq!(&d(-9, -4) * &Dyadic::one(), d(-9, -4));
        assert_eq!(&d(-5, -2) * &d(3, 1), d(-15, -1));
    }

    #[test]
    fn canonical_zero() {
        let z = &d(3, -4) - &d(3, -4);
        assert_eq!(z.exponent(), 0);
        assert!(z.is_zero());
        assert_eq!(Dyadic::new(0, 17), Dyadic::zero());
    }

    #[test]
    fn round_to_examples() {
        assert_eq!(d(3, -2).round_to(0), Dyadic::one());
        assert_eq!(d(5, -3).round_to(1), d(1, -1));
        assert_eq!(d(5, -3).round_to(3), d(5, -3));
        assert_eq!(d(5, -3).round_to(9), d(5, -3));
        // 1/4 sits between 0 and 1/2; tie goes to even mantissa 0
        assert_eq!(d(1, -2).round_to(1), Dyadic::zero());
        assert_eq!(d(-3, -2).round_to(0), d(-1, 0));
    }

    #[test]
    fn compare_examples() {
        assert!(d(1, -1) < d(3, -2));
        assert_eq!(d(7, -9).cmp(&d(7, -9)), Ordering::Equal);
        assert!(Dyadic::one() > d(7, -3));
        assert!(d(-1, 5) < d(1, -5));
    }

    #[test]
    fn from_decimal_examples() {
        assert_eq!(Dyadic::from_decimal("0.5", 10).unwrap(), d(1, -1));
        let tenth = Dyadic::from_decimal("0.1", 4).unwrap();
        let err = rational(&tenth) - BigRational::new(1.into(), 10.into());
        assert!(err.abs() <= pow2_rational(-4));
        assert_eq!(tenth, d(1, -3));
        assert!(matches!(
            Dyadic::from_decimal("abc", 4),
            Err(ParseDyadicError::Malformed(_))
        ));
        assert!(Dyadic::from_decimal("1.", 4).is_err());
        assert!(Dyadic::from_decimal("", 4).is_err());
        assert_eq!(Dyadic::from_decimal("-2.25", 0).unwrap(), d(-2, 0));
    }

    #[test]
    fn text_forms() {
        assert_eq!(d(-15, -1).to_string(), "-15/2^1");
        assert_eq!(d(3, 2).to_string(), "12");
        assert_eq!("-15/2^1".parse::<Dyadic>().unwrap(), d(-15, -1));
        assert_eq!("12/2^3".parse::<Dyadic>().unwrap(), d(3, -1));
        assert_eq!("0.375".parse::<Dyadic>().unwrap(), d(3, -3));
        assert!(matches!(
            "0.1".parse::<Dyadic>(),
            Err(ParseDyadicError::NotDyadic(_))
        ));
        assert!("1/3".parse::<Dyadic>().is_err());
        assert_eq!(d(1, -1).to_decimal_string(3), "0.500");
        assert_eq!(d(5, -4).to_decimal_string(1), "0.3");
        assert_eq!(d(-5, -4).to_decimal_string(1), "-0.3");
        assert_eq!(d(-1, -8).to_decimal_string(1), "0.0");
        assert_eq!(d(7, 0).to_decimal_string(0), "7");
    }

    #[test]
    fn div_int_rounding() {
        let third = Dyadic::one().div_int(3, 4, Rounding::NearestEven);
        assert_eq!(third, d(5, -4));
        assert_eq!(Dyadic::one().div_int(3, 4, Rounding::Ceil), d(6, -4));
        assert_eq!(Dyadic::one().div_int(3, 4, Rounding::Floor), d(5, -4));
        assert_eq!(d(3, 5).div_int(3, 0, Rounding::Floor), d(1, 5));
    }

    #[test]
    fn log2_ceil_one_plus() {
        assert_eq!(Dyadic::zero().log2_ceil_one_plus(), 0);
        assert_eq!(Dyadic::one().log2_ceil_one_plus(), 1);
        assert_eq!(d(3, 0).log2_ceil_one_plus(), 2);
        assert_eq!(d(4, 0).log2_ceil_one_plus(), 3);
        assert_eq!(d(1, -3).log2_ceil_one_plus(), 1);
    }

    #[test]
    fn decimal_comparison() {
        let dec = Decimal::parse("0.1").unwrap();
        assert_eq!(dec.compare_dyadic(&d(1, -3)), Ordering::Less);
        assert_eq!(dec.compare_dyadic(&d(1, -4)), Ordering::Greater);
        assert_eq!(
            Decimal::parse("1.0")
                .unwrap()
                .compare_dyadic(&Dyadic::one()),
            Ordering::Equal
        );
        assert_eq!(Decimal::parse("-0.50").unwrap().to_string(), "-0.50");
    }

    #[test]
    #[should_panic(expected = "dyadic exponent overflow")]
    fn exponent_overflow_is_fatal() {
        let _ = d(1, i64::MAX).mul_pow2(1);
    }

    fn arb_dyadic() -> impl Strategy<Value = Dyadic> {
        (any::<i64>(), -80i64..80).prop_map(|(m, e)| Dyadic::new(m, e))
    }

    proptest! {
        #[test]
        fn arithmetic_is_exact(a in arb_dyadic(), b in arb_dyadic()) {
            prop_assert_eq!(rational(&(&a + &b)), rational(&a) + rational(&b));
            prop_assert_eq!(rational(&(&a - &b)), rational(&a) - rational(&b));
            prop_assert_eq!(rational(&(&a * &b)), rational(&a) * rational(&b));
            prop_assert_eq!(a.cmp(&b), rational(&a).cmp(&rational(&b)));
        }

        #[test]
        fn results_are_canonical(a in arb_dyadic(), b in arb_dyadic()) {
            for r in [&a + &b, &a * &b, a.round_to(7)] {
                prop_assert!(r.is_zero() && r.exponent() == 0 || r.mantissa().is_odd());
                let again = Dyadic::new(r.mantissa().clone(), r.exponent());
                prop_assert_eq!(again.mantissa(), r.mantissa());
                prop_assert_eq!(again.exponent(), r.exponent());
            }
        }

        #[test]
        fn round_to_envelope(a in arb_dyadic(), m in 0u32..100) {
            let r = a.round_to(m);
            let err = (rational(&r) - rational(&a)).abs();
            prop_assert!(err <= pow2_rational(-(m as i64) - 1));
            prop_assert!(r.frac_bits() <= m as u64);
            let int_bits = a.abs().ceil_int().bits();
            prop_assert!(r.mantissa().bits() <= int_bits + m as u64 + 1);
            prop_assert!(r.bit_size() <= int_bits + 2 * m as u64 + 1);
        }

        #[test]
        fn text_round_trip(a in arb_dyadic()) {
            prop_assert_eq!(a.to_string().parse::<Dyadic>().unwrap(), a);
        }

        #[test]
        fn from_decimal_envelope(int in 0u32..1000, frac in 0u64..1_000_000_000, m in 0u32..70) {
            let s = format!("{int}.{frac:09}");
            let x = Dyadic::from_decimal(&s, m).unwrap();
            let exact = BigRational::new(
                BigInt::from(int) * BigInt::from(1_000_000_000u64) + BigInt::from(frac),
                BigInt::from(1_000_000_000u64),
            );
            prop_assert!((rational(&x) - exact).abs() <= pow2_rational(-(m as i64)));
        }
    }
}
