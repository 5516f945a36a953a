//! Divisor-sum and squarefree Euler-product evaluators.
//!
//! Every identity here has a "sum side", evaluated by enumerating divisors,
//! and a "product side", evaluated from the prime factorization alone. The
//! two sides never share code beyond the scalar primitives.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{self, Factorization, SquarefreeDivisor};
use crate::error::{Error, Result};
use crate::numerics::{ArithValue, Exact, SParam, Scalar};
use crate::zeta;

/// Which divisors a sum side walked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Enumeration {
    /// Only the `2^omega` squarefree divisors (the weight carries a `mu^2` factor).
    Squarefree,
    /// Every divisor.
    Full,
}

impl Enumeration {
    pub fn as_str(self) -> &'static str {
        match self {
            Enumeration::Squarefree => "squarefree",
            Enumeration::Full => "full",
        }
    }
}

/// A divisor of `n` seen during full enumeration, with its exponent vector
/// relative to the factorization of `n`.
#[derive(Debug, Clone, Copy)]
pub struct Divisor<'a> {
    pub d: u64,
    pub exponents: &'a [u32],
    pub of: &'a Factorization,
}

impl Divisor<'_> {
    fn present(&self) -> impl Iterator<Item = (u64, u32)> + '_ {
        self.of
            .primes()
            .zip(self.exponents.iter().copied())
            .filter(|&(_, e)| e > 0)
    }

    pub fn is_squarefree(&self) -> bool {
        self.exponents.iter().all(|&e| e <= 1)
    }

    pub fn mu(&self) -> i8 {
        if !self.is_squarefree() {
            return 0;
        }
        if self.present().count().is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    pub fn phi(&self) -> u64 {
        self.present()
            .map(|(p, e)| p.pow(e - 1) * (p - 1))
            .product()
    }
}

/// `sum_{d | n} numerator(d) * d^(-s)` over every divisor.
pub fn divisor_sum<S: Scalar>(
    f: &Factorization,
    mut numerator: impl FnMut(&Divisor<'_>) -> Result<S>,
    s: &SParam,
) -> Result<S> {
    let mut total = S::zero();
    let mut failure = None;
    arith::for_each_divisor(f, |d, exponents| {
        if failure.is_some() {
            return;
        }
        let term = numerator(&Divisor {
            d,
            exponents,
            of: f,
        })
        .and_then(|w| {
            Ok(if w.is_zero() {
                w
            } else {
                w * S::inv_pow(d, s)?
            })
        });
        match term {
            Ok(t) => total = total.clone() + t,
            Err(e) => failure = Some(e),
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

/// `sum_{d | n} mu^2(d) * term(d)`, walking only the squarefree divisors.
pub fn squarefree_sum<S: Scalar>(
    f: &Factorization,
    mut term: impl FnMut(&SquarefreeDivisor) -> Result<S>,
) -> Result<S> {
    arith::squarefree_divisor_terms(f)
        .iter()
        .try_fold(S::zero(), |acc, t| Ok(acc + term(t)?))
}

type WeightFn = dyn Fn(u64, &SParam) -> Result<ArithValue> + Send + Sync;

/// A prime-indexed weight `g(p)`; the identity it defines is
/// `prod_{p | n} (1 + g(p)) = sum_{d | n} mu^2(d) prod_{p | d} g(p)`.
#[derive(Clone)]
pub struct LocalWeight {
    name: String,
    description: String,
    g: Arc<WeightFn>,
}

impl fmt::Debug for LocalWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LocalWeight")
            .field("name", &self.name)
            .field("description", &self.description)
            .finish_non_exhaustive()
    }
}

impl LocalWeight {
    pub fn new(
        name: impl Into<String>,
        description: impl Into<String>,
        g: impl Fn(u64, &SParam) -> Result<ArithValue> + Send + Sync + 'static,
    ) -> Self {
        LocalWeight {
            name: name.into(),
            description: description.into(),
            g: Arc::new(g),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn value(&self, p: u64, s: &SParam) -> Result<ArithValue> {
        (self.g)(p, s)
    }

    pub fn eval<S: Scalar>(&self, p: u64, s: &SParam) -> Result<S> {
        S::from_value(&self.value(p, s)?)
    }

    /// `g(p) = 1/(p-1)`, the weight behind `n/phi(n)`.
    pub fn totient_reciprocal() -> Self {
        Self::new("phi_recip", "1/(p-1)", |p, _| ArithValue::ratio(1, p - 1))
    }

    /// `g(p) = 1/p`.
    pub fn prime_reciprocal() -> Self {
        Self::new("recip", "1/p", |p, _| ArithValue::ratio(1, p))
    }

    /// `g(p) = p^(-s)`.
    pub fn prime_power() -> Self {
        Self::new("power", "p^(-s)", ArithValue::inv_pow)
    }

    /// `g(p) = 1/((p-1) p^s)`.
    pub fn generalized_dineva() -> Self {
        Self::new("gdineva", "1/((p-1) p^s)", |p, s| {
            ArithValue::inv_pow(p, s)?.checked_div(&ArithValue::integer(p as i64 - 1))
        })
    }

    /// Pseudo-random rational weight, a pure function of `(seed, p)`.
    pub fn seeded_rational(seed: u64) -> Self {
        Self::new(
            format!("seeded:{seed}"),
            "seeded random rational a/b",
            move |p, _| {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ p);
                let num: i64 = rng.gen_range(-12..=12);
                let den: u64 = rng.gen_range(1..=16);
                ArithValue::ratio(num, den)
            },
        )
    }

    /// Looks up a built-in weight by name: `phi_recip`, `recip`, `power`,
    /// `gdineva` or `seeded:<seed>`.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "phi_recip" => Some(Self::totient_reciprocal()),
            "recip" => Some(Self::prime_reciprocal()),
            "power" => Some(Self::prime_power()),
            "gdineva" => Some(Self::generalized_dineva()),
            _ => name
                .strip_prefix("seeded:")
                .and_then(|seed| seed.parse().ok())
                .map(Self::seeded_rational),
        }
    }
}

/// `prod_{p | n} (1 + g(p))`.
pub fn squarefree_euler_product<S: Scalar>(
    f: &Factorization,
    g: &LocalWeight,
    s: &SParam,
) -> Result<S> {
    f.primes()
        .try_fold(S::one(), |acc, p| Ok(acc * (S::one() + g.eval::<S>(p, s)?)))
}

/// Both sides of the identity built from `g`:
/// `(sum_{d | n} mu^2(d) prod_{p | d} g(p), prod_{p | n} (1 + g(p)))`.
pub fn identity_pair<S: Scalar>(f: &Factorization, g: &LocalWeight, s: &SParam) -> Result<(S, S)> {
    let weights: Vec<S> = f.primes().map(|p| g.eval(p, s)).collect::<Result<_>>()?;
    let sum_side = squarefree_sum(f, |t| {
        Ok((0..weights.len())
            .filter(|i| t.mask >> i & 1 == 1)
            .fold(S::one(), |acc, i| acc * weights[i].clone()))
    })?;
    let product_side = squarefree_euler_product(f, g, s)?;
    Ok((sum_side, product_side))
}

/// `sum_{d | n} mu^2(d) / phi(d)`, which equals `n / phi(n)`.
pub fn dineva(f: &Factorization) -> Exact {
    squarefree_sum(f, |t| Exact::ratio(1, t.phi)).expect("phi(d) >= 1")
}

/// `n / phi(n)`.
pub fn dineva_closed(f: &Factorization) -> Exact {
    Exact::ratio(f.n() as i64, arith::totient(f)).expect("phi(n) >= 1")
}

/// The interchangeable ways of evaluating the generalized Dineva sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DinevaForm {
    /// `sum_{d | n} mu^2(d) / (phi(d) d^s)`
    DivisorSum,
    /// `prod_{p | n} (1 + 1/((p-1) p^s))`
    Product,
    /// `prod_{p | n} (1 - p^-1 + p^-(s+1)) / (1 - p^-1)`
    Alternate,
    /// `prod_{p | n} (1 + zeta_p(1) / p^(s+1))`
    ZetaLocal,
}

impl DinevaForm {
    pub const ALL: [DinevaForm; 4] = [
        DinevaForm::DivisorSum,
        DinevaForm::Product,
        DinevaForm::Alternate,
        DinevaForm::ZetaLocal,
    ];

    pub const PRODUCTS: [DinevaForm; 3] = [
        DinevaForm::Product,
        DinevaForm::Alternate,
        DinevaForm::ZetaLocal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DinevaForm::DivisorSum => "divisor_sum",
            DinevaForm::Product => "product",
            DinevaForm::Alternate => "alternate",
            DinevaForm::ZetaLocal => "zeta_local",
        }
    }
}

impl std::str::FromStr for DinevaForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DinevaForm::ALL
            .into_iter()
            .find(|form| form.as_str() == s)
            .ok_or_else(|| Error::Domain(format!("unknown form `{s}`")))
    }
}

/// `sum_{d | n} mu^2(d) / (phi(d) d^s)` in the requested form.
pub fn generalized_dineva<S: Scalar>(f: &Factorization, s: &SParam, form: DinevaForm) -> Result<S> {
    let one = S::one;
    match form {
        DinevaForm::DivisorSum => squarefree_sum(f, |t| {
            S::inv_pow(t.d, s)?.try_div(S::from_u64(t.phi), "phi(d)")
        }),
        DinevaForm::Product => f.primes().try_fold(one(), |acc, p| {
            let local = S::inv_pow(p, s)?.try_div(S::from_u64(p - 1), "p - 1")?;
            Ok(acc * (one() + local))
        }),
        DinevaForm::Alternate => f.primes().try_fold(one(), |acc, p| {
            let inv_p = S::ratio(1, p)?;
            let num = one() - inv_p.clone() + S::inv_pow(p, &s.offset(1))?;
            Ok(acc * num.try_div(one() - inv_p, "1 - 1/p")?)
        }),
        DinevaForm::ZetaLocal => f.primes().try_fold(one(), |acc, p| {
            let zeta_p1: S = zeta::local_zeta(p, &SParam::Int(1))?;
            Ok(acc * (one() + zeta_p1 * S::inv_pow(p, &s.offset(1))?))
        }),
    }
}

/// `sum_{d | n} mu(d) / d^s`.
pub fn mobius_divisor_sum<S: Scalar>(f: &Factorization, s: &SParam) -> Result<S> {
    squarefree_sum(f, |t| {
        let w = S::inv_pow(t.d, s)?;
        Ok(if t.mu < 0 { -w } else { w })
    })
}

/// `prod_{p | n} (1 - p^-s)`.
pub fn mobius_product<S: Scalar>(f: &Factorization, s: &SParam) -> Result<S> {
    f.primes()
        .try_fold(S::one(), |acc, p| Ok(acc * (S::one() - S::inv_pow(p, s)?)))
}

/// `sum_{d | n} mu^2(d) / d^s`.
pub fn squarefree_dirichlet_sum<S: Scalar>(f: &Factorization, s: &SParam) -> Result<S> {
    squarefree_sum(f, |t| S::inv_pow(t.d, s))
}

/// `prod_{p | n} (1 + p^-s)`.
pub fn squarefree_product<S: Scalar>(f: &Factorization, s: &SParam) -> Result<S> {
    f.primes()
        .try_fold(S::one(), |acc, p| Ok(acc * (S::one() + S::inv_pow(p, s)?)))
}

/// The multiplicative functions with built-in local values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Multiplicative {
    Mobius,
    MobiusSquared,
    Totient,
    Sigma,
}

impl Multiplicative {
    pub const ALL: [Multiplicative; 4] = [
        Multiplicative::Mobius,
        Multiplicative::MobiusSquared,
        Multiplicative::Totient,
        Multiplicative::Sigma,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Multiplicative::Mobius => "mu",
            Multiplicative::MobiusSquared => "mu2",
            Multiplicative::Totient => "phi",
            Multiplicative::Sigma => "sigma",
        }
    }

    /// `f(p^j)`.
    pub fn local<S: Scalar>(self, p: u64, j: u32) -> S {
        match (self, j) {
            (_, 0) => S::one(),
            (Multiplicative::Mobius, 1) => -S::one(),
            (Multiplicative::MobiusSquared, 1) => S::one(),
            (Multiplicative::Mobius | Multiplicative::MobiusSquared, _) => S::zero(),
            (Multiplicative::Totient, j) => S::from_u64(p.pow(j - 1) * (p - 1)),
            (Multiplicative::Sigma, j) => S::from_biguint(&arith::sigma_prime_power(p, j)),
        }
    }
}

/// `prod_{p^k || n} sum_{j=0}^{k} f(p^j) / p^(js)` for a multiplicative `f`
/// given by its values on prime powers.
pub fn multiplicative_dirichlet_sum<S: Scalar>(
    f: &Factorization,
    f_local: impl Fn(u64, u32) -> Result<S>,
    s: &SParam,
) -> Result<S> {
    let mut total = S::one();
    for &(p, k) in f.factors() {
        if f_local(p, 0)? != S::one() {
            return Err(Error::Contract(format!("f(1) != 1 at p = {p}")));
        }
        let mut local = S::zero();
        for j in 0..=k {
            local = local + f_local(p, j)? * S::inv_pow(p, &s.scale(i64::from(j)))?;
        }
        total = total * local;
    }
    Ok(total)
}

/// `sum_{d | n} phi(d)`, which equals `n`.
pub fn totient_sum_check(f: &Factorization) -> Exact {
    let mut total = 0u128;
    arith::for_each_divisor(f, |d, exponents| {
        total += u128::from(
            Divisor {
                d,
                exponents,
                of: f,
            }
            .phi(),
        );
    });
    Exact::from_integer(total.into())
}
