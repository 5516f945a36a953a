//! Scalar domain shared by every evaluator.
//!
//! Evaluators are generic over [`Scalar`], implemented for [`Exact`]
//! (arbitrary-precision rationals), `f64` and `f32`. An integer exponent
//! can be evaluated in any of them; a real exponent has no exact rational
//! value and is rejected by [`Exact`]. [`ArithValue`] is the tagged carrier
//! used where the mode is only known at run time (reports, the CLI).

use std::cmp::Ordering;
use std::fmt::{self, Debug, Display};
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Num, One, Pow, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational scalar, always in lowest terms with a positive denominator.
pub type Exact = BigRational;

/// Largest |s| accepted for an exact power. p^s with larger exponents is
/// representable but no identity in this crate needs it.
pub const MAX_EXACT_EXPONENT: i64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Approx,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Approx => "approx",
        }
    }
}

impl Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The exponent `s` of a Dirichlet-type sum.
///
/// `Int` selects the exact pipeline, `Real` the floating-point one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "value", rename_all = "lowercase")]
pub enum SParam {
    Int(i64),
    Real(f64),
}

impl SParam {
    pub fn mode(&self) -> Mode {
        match self {
            SParam::Int(_) => Mode::Exact,
            SParam::Real(_) => Mode::Approx,
        }
    }

    /// Name of the mode as it appears in reports: `integer` or `real`.
    pub fn mode_name(&self) -> &'static str {
        match self {
            SParam::Int(_) => "integer",
            SParam::Real(_) => "real",
        }
    }

    pub fn as_f64(&self) -> f64 {
        match *self {
            SParam::Int(k) => k as f64,
            SParam::Real(x) => x,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_f64() == 0.0
    }

    /// `s + k`
    pub fn offset(&self, k: i64) -> SParam {
        match *self {
            SParam::Int(s) => SParam::Int(s.saturating_add(k)),
            SParam::Real(s) => SParam::Real(s + k as f64),
        }
    }

    /// `k * s`
    pub fn scale(&self, k: i64) -> SParam {
        match *self {
            SParam::Int(s) => SParam::Int(s.saturating_mul(k)),
            SParam::Real(s) => SParam::Real(s * k as f64),
        }
    }

    pub fn greater_than(&self, bound: i64) -> bool {
        match *self {
            SParam::Int(s) => s > bound,
            SParam::Real(s) => s > bound as f64,
        }
    }
}

impl Display for SParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SParam::Int(k) => write!(f, "{k}"),
            SParam::Real(x) => write!(f, "{x}"),
        }
    }
}

/// A field of numbers the identity evaluators can run in.
pub trait Scalar:
    Clone + Debug + Display + PartialEq + PartialOrd + Num + Signed + Send + Sync + 'static
{
    const MODE: Mode;

    fn from_u64(v: u64) -> Self;

    fn from_i64(v: i64) -> Self;

    fn from_biguint(v: &BigUint) -> Self;

    /// `base^(-s)`.
    fn inv_pow(base: u64, s: &SParam) -> Result<Self>;

    fn to_f64(&self) -> f64;

    /// Converts a tagged value into this scalar. Exact targets reject
    /// approximate inputs.
    fn from_value(v: &ArithValue) -> Result<Self>;

    fn into_value(self) -> ArithValue;

    fn try_div(self, rhs: Self, context: &'static str) -> Result<Self> {
        if rhs.is_zero() {
            Err(Error::DivisionByZero(context))
        } else {
            Ok(self / rhs)
        }
    }

    fn try_recip(self, context: &'static str) -> Result<Self> {
        Self::one().try_div(self, context)
    }

    /// `num / den` as a scalar.
    fn ratio(num: i64, den: u64) -> Result<Self> {
        Self::from_i64(num).try_div(Self::from_u64(den), "ratio")
    }
}

fn check_base(base: u64) -> Result<()> {
    if base == 0 {
        Err(Error::Domain("power of zero".into()))
    } else {
        Ok(())
    }
}

impl Scalar for Exact {
    const MODE: Mode = Mode::Exact;

    fn from_u64(v: u64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_biguint(v: &BigUint) -> Self {
        BigRational::from_integer(BigInt::from(v.clone()))
    }

    fn inv_pow(base: u64, s: &SParam) -> Result<Self> {
        check_base(base)?;
        let k = match *s {
            SParam::Int(k) => k,
            SParam::Real(x) => {
                return Err(Error::Capability(format!(
                    "real exponent {x} has no exact rational power"
                )))
            }
        };
        if k.abs() > MAX_EXACT_EXPONENT {
            return Err(Error::Capability(format!("exact exponent {k} too large")));
        }
        let power: BigInt = Pow::pow(BigInt::from(base), k.unsigned_abs());
        Ok(match k.cmp(&0) {
            Ordering::Less => BigRational::from_integer(power),
            // 1/p^k is already reduced
            _ => BigRational::new_raw(BigInt::one(), power),
        })
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_value(v: &ArithValue) -> Result<Self> {
        match v {
            ArithValue::Exact(q) => Ok(q.clone()),
            ArithValue::Approx(x) => Err(Error::Capability(format!(
                "approximate value {x} cannot enter an exact computation"
            ))),
        }
    }

    fn into_value(self) -> ArithValue {
        ArithValue::Exact(self)
    }
}

macro_rules! impl_float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            const MODE: Mode = Mode::Approx;

            fn from_u64(v: u64) -> Self {
                v as $t
            }

            fn from_i64(v: i64) -> Self {
                v as $t
            }

            fn from_biguint(v: &BigUint) -> Self {
                ToPrimitive::to_f64(v).unwrap_or(f64::INFINITY) as $t
            }

            fn inv_pow(base: u64, s: &SParam) -> Result<Self> {
                check_base(base)?;
                Ok((base as f64).powf(-s.as_f64()) as $t)
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn from_value(v: &ArithValue) -> Result<Self> {
                Ok(v.to_f64() as $t)
            }

            fn into_value(self) -> ArithValue {
                ArithValue::Approx(self as f64)
            }
        }
    };
}

impl_float_scalar!(f64);
impl_float_scalar!(f32);

/// `p^(-s)` for a prime `p`.
pub fn prime_power_s<S: Scalar>(p: u64, s: &SParam) -> Result<S> {
    if p < 2 {
        return Err(Error::Domain(format!("{p} is not a prime")));
    }
    S::inv_pow(p, s)
}

/// Exact-or-approximate value. Mixing the two yields an approximation.
#[derive(Debug, Clone, PartialEq)]
pub enum ArithValue {
    Exact(Exact),
    Approx(f64),
}

impl ArithValue {
    pub fn integer(v: i64) -> Self {
        ArithValue::Exact(Exact::from_i64(v))
    }

    pub fn ratio(num: i64, den: u64) -> Result<Self> {
        Exact::ratio(num, den).map(ArithValue::Exact)
    }

    pub fn mode(&self) -> Mode {
        match self {
            ArithValue::Exact(_) => Mode::Exact,
            ArithValue::Approx(_) => Mode::Approx,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ArithValue::Exact(q) => Scalar::to_f64(q),
            ArithValue::Approx(x) => *x,
        }
    }

    pub fn as_exact(&self) -> Option<&Exact> {
        match self {
            ArithValue::Exact(q) => Some(q),
            ArithValue::Approx(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ArithValue::Exact(q) => q.is_zero(),
            ArithValue::Approx(x) => *x == 0.0,
        }
    }

    pub fn abs(&self) -> ArithValue {
        match self {
            ArithValue::Exact(q) => ArithValue::Exact(q.abs()),
            ArithValue::Approx(x) => ArithValue::Approx(x.abs()),
        }
    }

    /// `|self - other|` as a float; exact pairs are subtracted exactly first.
    pub fn abs_diff(&self, other: &ArithValue) -> f64 {
        match (self, other) {
            (ArithValue::Exact(a), ArithValue::Exact(b)) => Scalar::to_f64(&(a - b).abs()),
            _ => (self.to_f64() - other.to_f64()).abs(),
        }
    }

    /// `base^(-s)` in the mode selected by `s`.
    pub fn inv_pow(base: u64, s: &SParam) -> Result<ArithValue> {
        match s.mode() {
            Mode::Exact => Exact::inv_pow(base, s).map(ArithValue::Exact),
            Mode::Approx => f64::inv_pow(base, s).map(ArithValue::Approx),
        }
    }

    pub fn checked_div(&self, rhs: &ArithValue) -> Result<ArithValue> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero("value division"));
        }
        Ok(match (self, rhs) {
            (ArithValue::Exact(a), ArithValue::Exact(b)) => ArithValue::Exact(a / b),
            _ => ArithValue::Approx(self.to_f64() / rhs.to_f64()),
        })
    }
}

impl Display for ArithValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArithValue::Exact(q) => write!(f, "{q}"),
            ArithValue::Approx(x) => write!(f, "{x}"),
        }
    }
}

impl From<Exact> for ArithValue {
    fn from(q: Exact) -> Self {
        ArithValue::Exact(q)
    }
}

impl From<f64> for ArithValue {
    fn from(x: f64) -> Self {
        ArithValue::Approx(x)
    }
}

macro_rules! contagious_op {
    ($trait:ident, $method:ident) => {
        impl $trait<&ArithValue> for &ArithValue {
            type Output = ArithValue;

            fn $method(self, rhs: &ArithValue) -> ArithValue {
                match (self, rhs) {
                    (ArithValue::Exact(a), ArithValue::Exact(b)) => {
                        ArithValue::Exact($trait::$method(a, b))
                    }
                    _ => ArithValue::Approx($trait::$method(self.to_f64(), rhs.to_f64())),
                }
            }
        }

        impl $trait for ArithValue {
            type Output = ArithValue;

            fn $method(self, rhs: ArithValue) -> ArithValue {
                $trait::$method(&self, &rhs)
            }
        }
    };
}

contagious_op!(Add, add);
contagious_op!(Sub, sub);
contagious_op!(Mul, mul);

impl Neg for ArithValue {
    type Output = ArithValue;

    fn neg(self) -> ArithValue {
        match self {
            ArithValue::Exact(q) => ArithValue::Exact(-q),
            ArithValue::Approx(x) => ArithValue::Approx(-x),
        }
    }
}

/// Exact pairs compare as rationals and ignore `rel_tol`; anything else
/// passes when `|a - b| <= rel_tol * max(1, |a|, |b|)`.
pub fn approx_equal(a: &ArithValue, b: &ArithValue, rel_tol: f64) -> bool {
    if let (ArithValue::Exact(x), ArithValue::Exact(y)) = (a, b) {
        return x == y;
    }
    let (x, y) = (a.to_f64(), b.to_f64());
    if !x.is_finite() || !y.is_finite() {
        return false;
    }
    let scale = 1f64.max(x.abs()).max(y.abs());
    (x - y).abs() <= rel_tol * scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: u64) -> Exact {
        Exact::ratio(n, d).unwrap()
    }

    #[test]
    fn prime_power_examples() {
        assert_eq!(prime_power_s::<Exact>(2, &SParam::Int(2)).unwrap(), q(1, 4));
        assert_eq!(prime_power_s::<Exact>(3, &SParam::Int(0)).unwrap(), q(1, 1));
        assert_eq!(
            prime_power_s::<Exact>(3, &SParam::Int(-2)).unwrap(),
            q(9, 1)
        );
        let half = prime_power_s::<f64>(2, &SParam::Real(0.5)).unwrap();
        assert!((half - std::f64::consts::FRAC_1_SQRT_2).abs() <= 1e-15);
        assert!(prime_power_s::<Exact>(1, &SParam::Int(1)).is_err());
    }

    #[test]
    fn exact_rejects_real_exponent() {
        let err = Exact::inv_pow(2, &SParam::Real(0.5)).unwrap_err();
        assert!(matches!(err, Error::Capability(_)));
    }

    #[test]
    fn approx_equal_examples() {
        let three_halves = ArithValue::Exact(q(3, 2));
        assert!(approx_equal(&three_halves, &three_halves, 1.0));
        assert!(approx_equal(&1.5.into(), &(1.5 + 1e-15).into(), 1e-12));
        assert!(!approx_equal(&three_halves, &1.4.into(), 1e-12));
        // exact pairs ignore the tolerance entirely
        assert!(!approx_equal(
            &ArithValue::Exact(q(1, 1)),
            &ArithValue::Exact(q(1_000_001, 1_000_000)),
            1.0
        ));
    }

    #[test]
    fn mode_is_contagious() {
        let a = ArithValue::Exact(q(1, 2));
        let b = ArithValue::Approx(0.25);
        assert_eq!((&a + &b).mode(), Mode::Approx);
        assert_eq!((&a * &a).mode(), Mode::Exact);
        assert_eq!((a.clone() * b).to_f64(), 0.125);
    }

    #[test]
    fn division_by_zero_is_an_error() {
        assert!(matches!(
            Exact::one().try_div(Exact::zero(), "t"),
            Err(Error::DivisionByZero("t"))
        ));
        assert!(ArithValue::integer(1)
            .checked_div(&ArithValue::Approx(0.0))
            .is_err());
    }

    #[test]
    fn rendering() {
        assert_eq!(ArithValue::Exact(q(3, 1)).to_string(), "3");
        assert_eq!(ArithValue::Exact(q(-2, 4)).to_string(), "-1/2");
        assert_eq!(ArithValue::Approx(0.1).to_string(), "0.1");
        assert_eq!(SParam::Real(0.5).to_string(), "0.5");
    }

    proptest! {
        #[test]
        fn exact_to_approx_round_trip(num in 1i64..1_000_000, den in 1u64..1_000_000, neg: bool) {
            let v = q(if neg { -num } else { num }, den);
            let mag = Scalar::to_f64(&v.abs());
            prop_assume!((1e-6..=1e6).contains(&mag));
            let exact = ArithValue::Exact(v);
            let approx = ArithValue::Approx(exact.to_f64());
            prop_assert!(approx_equal(&exact, &approx, 1e-12));
        }

        #[test]
        fn exact_sums_are_order_independent(terms in proptest::collection::vec((-50i64..50, 1u64..60), 1..20)) {
            let values: Vec<Exact> = terms.iter().map(|&(n, d)| q(n, d)).collect();
            let forward = values.iter().fold(Exact::zero(), |acc, v| acc + v);
            let backward = values.iter().rev().fold(Exact::zero(), |acc, v| acc + v);
            prop_assert_eq!(forward, backward);
        }
    }
}
