//! Partial zeta functions `zeta_n(s) = prod_{p | n} 1/(1 - p^-s)`, the
//! divisor-sum identities they satisfy, local sigma factors, and truncated
//! global Euler products with a series reference for `zeta(s)`.

use rayon::prelude::*;

use crate::arith::{self, Factorization};
use crate::error::{Error, Result};
use crate::identities::{self, Enumeration};
use crate::numerics::{approx_equal, Exact, SParam, Scalar};
use crate::verify::IdentityReport;

/// Hard cap on the truncation depth of a local sigma series.
pub const MAX_TRUNCATION: u32 = 1000;

/// Largest prime bound accepted by [`truncated_global_product`].
pub const MAX_PRIME_BOUND: u64 = 100_000_000;

/// Largest number of terms [`zeta_reference`] will sum.
pub const MAX_REFERENCE_TERMS: u64 = 100_000_000;

const PRODUCT_CHUNK: usize = 4096;

/// `zeta_p(s) = 1/(1 - p^-s)`.
pub fn local_zeta<S: Scalar>(p: u64, s: &SParam) -> Result<S> {
    if s.is_zero() {
        return Err(Error::Singularity(format!(
            "zeta_{p}(s) has a pole at s = 0"
        )));
    }
    (S::one() - S::inv_pow(p, s)?).try_recip("1 - p^-s")
}

/// `zeta_n(s)`; `zeta_1(s) = 1` for every `s`.
pub fn partial_zeta<S: Scalar>(f: &Factorization, s: &SParam) -> Result<S> {
    f.primes()
        .try_fold(S::one(), |acc, p| Ok(acc * local_zeta::<S>(p, s)?))
}

/// `(sum_{d | n} mu^2(d)/d^s, zeta_n(s)/zeta_n(2s))`.
pub fn zeta_ratio_identity_check<S: Scalar>(f: &Factorization, s: &SParam) -> Result<(S, S)> {
    let lhs = identities::squarefree_dirichlet_sum(f, s)?;
    let rhs = partial_zeta::<S>(f, s)?.try_div(partial_zeta(f, &s.scale(2))?, "zeta_n(2s)")?;
    Ok((lhs, rhs))
}

/// `(zeta_n(1), n/phi(n))`.
pub fn zeta_totient_identity(f: &Factorization) -> (Exact, Exact) {
    let lhs = partial_zeta(f, &SParam::Int(1)).expect("s = 1 is regular");
    (lhs, identities::dineva_closed(f))
}

/// `(n zeta_n(s)/phi(n), prod_{p | n} 1/((1 - p^-1)(1 - p^-s)))`.
pub fn zeta_product_identity<S: Scalar>(f: &Factorization, s: &SParam) -> Result<(S, S)> {
    let lhs = (S::from_u64(f.n()) * partial_zeta(f, s)?)
        .try_div(S::from_u64(arith::totient(f)), "phi(n)")?;
    let rhs = f.primes().try_fold(S::one(), |acc, p| {
        let a = S::one() - S::ratio(1, p)?;
        let b = S::one() - S::inv_pow(p, s)?;
        Ok(acc * (a * b).try_recip("(1 - 1/p)(1 - p^-s)")?)
    })?;
    Ok((lhs, rhs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaFactorMode {
    /// `1/((1 - p^-s)(1 - p^(1-s)))`
    Closed,
    /// `sum_{k=0}^{K} sigma(p^k)/p^(ks)`
    Truncated(u32),
}

/// Local generating factor of `sigma` at the prime `p`.
pub fn sigma_local_factor<S: Scalar>(p: u64, s: &SParam, mode: SigmaFactorMode) -> Result<S> {
    match mode {
        SigmaFactorMode::Closed => {
            if s.is_zero() || s.offset(-1).is_zero() {
                return Err(Error::Singularity(format!(
                    "sigma local factor at p = {p} is singular at s = {s}"
                )));
            }
            let a = S::one() - S::inv_pow(p, s)?;
            let b = S::one() - S::inv_pow(p, &s.offset(-1))?;
            (a * b).try_recip("sigma local factor")
        }
        SigmaFactorMode::Truncated(depth) => (0..=depth).try_fold(S::zero(), |acc, k| {
            let term = S::from_biguint(&arith::sigma_prime_power(p, k))
                * S::inv_pow(p, &s.scale(i64::from(k)))?;
            Ok(acc + term)
        }),
    }
}

/// Upper bound on `closed - truncated(K)` for `s > 1`, from
/// `sigma(p^k) <= (k+1) p^k`: `sum_{k>K} (k+1) r^k` with `r = p^(1-s)`.
pub fn sigma_tail_bound(p: u64, s: f64, depth: u32) -> f64 {
    let r = (p as f64).powf(1.0 - s);
    let m = f64::from(depth) + 1.0;
    r.powf(m) * ((m + 1.0) - m * r) / ((1.0 - r) * (1.0 - r))
}

/// Smallest depth `K <= MAX_TRUNCATION` for which the truncated product of
/// local sigma factors over `p | n` is provably within `tol / 2` of the
/// closed product. Returns the cap when no smaller depth suffices.
pub fn choose_sigma_depth(f: &Factorization, s: f64, tol: f64) -> u32 {
    let closed: Vec<f64> = f
        .primes()
        .map(|p| {
            let p = p as f64;
            1.0 / ((1.0 - p.powf(-s)) * (1.0 - p.powf(1.0 - s)))
        })
        .collect();
    let total: f64 = closed.iter().product();
    // prod L - prod T <= sum_i eps_i prod_{j != i} L_j when T_i <= L_i
    let error = |depth: u32| -> f64 {
        f.primes()
            .zip(&closed)
            .map(|(p, l)| sigma_tail_bound(p, s, depth) * total / l)
            .sum()
    };
    (0..MAX_TRUNCATION)
        .find(|&k| error(k) <= tol / 2.0)
        .unwrap_or(MAX_TRUNCATION)
}

/// Checks `prod_{p | n} sum_k sigma(p^k)/p^(ks) = zeta_n(s) zeta_n(s - 1)`.
///
/// The closed local factors are compared with the zeta product in the
/// scalar `S` (exactly, for rationals). The truncated series, at depth
/// `depth` or at a tail-bound-chosen depth when `None`, is the report's
/// left side and is compared within `tol`.
pub fn sigma_partial_zeta_check<S: Scalar>(
    f: &Factorization,
    s: &SParam,
    depth: Option<u32>,
    tol: f64,
) -> Result<IdentityReport> {
    if !s.greater_than(1) {
        return Err(Error::Convergence(format!(
            "sigma series needs s > 1, got {s}"
        )));
    }
    let depth = depth.unwrap_or_else(|| choose_sigma_depth(f, s.as_f64(), tol));
    let zeta_side: S = partial_zeta::<S>(f, s)? * partial_zeta(f, &s.offset(-1))?;
    let mut closed = S::one();
    let mut truncated = S::one();
    for p in f.primes() {
        closed = closed * sigma_local_factor::<S>(p, s, SigmaFactorMode::Closed)?;
        truncated = truncated * sigma_local_factor::<S>(p, s, SigmaFactorMode::Truncated(depth))?;
    }
    let (zeta_value, closed_value) = (zeta_side.into_value(), closed.into_value());
    let truncated_value = truncated.to_f64().into();
    let closed_ok = approx_equal(&closed_value, &zeta_value, tol);
    let passed = closed_ok && approx_equal(&truncated_value, &zeta_value, tol);
    let abs_discrepancy = truncated_value
        .abs_diff(&zeta_value)
        .max(closed_value.abs_diff(&zeta_value));
    Ok(IdentityReport {
        identity: "sigma_partial".into(),
        n: f.n(),
        s: *s,
        lhs: truncated_value,
        rhs: zeta_value,
        mode: crate::numerics::Mode::Approx,
        passed,
        abs_discrepancy,
        enumeration: Enumeration::Full,
    })
}

/// `prod_{p <= P} (1 + p^-s)` with a bound on the missing factor.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalProduct {
    pub prime_bound: u64,
    pub prime_count: usize,
    pub value: f64,
    /// Upper bound on `prod_{p > P} (1 + p^-s)`, via
    /// `exp(sum_{p > P} p^-s) <= exp(P^(1-s)/(s-1))`.
    pub tail_factor: f64,
}

impl GlobalProduct {
    /// Upper bound on the infinite product.
    pub fn upper_bound(&self) -> f64 {
        self.value * self.tail_factor
    }
}

/// Truncated Euler product for `zeta(s)/zeta(2s)`.
///
/// Primes are multiplied in ascending order within fixed-size chunks and
/// the chunk products are combined in ascending chunk order, so the result
/// does not depend on the thread count.
pub fn truncated_global_product(prime_bound: u64, s: f64) -> Result<GlobalProduct> {
    if s.is_nan() || s <= 1.0 {
        return Err(Error::Convergence(format!(
            "Euler product needs s > 1, got {s}"
        )));
    }
    if prime_bound > MAX_PRIME_BOUND {
        return Err(Error::Resource(format!(
            "prime bound {prime_bound} exceeds {MAX_PRIME_BOUND}"
        )));
    }
    let primes = arith::primes_up_to(prime_bound);
    let chunks: Vec<f64> = primes
        .par_chunks(PRODUCT_CHUNK)
        .map(|chunk| {
            chunk
                .iter()
                .fold(1.0, |acc, &p| acc * (1.0 + (p as f64).powf(-s)))
        })
        .collect();
    let value = chunks.into_iter().fold(1.0, |acc, c| acc * c);
    let tail_factor = ((prime_bound.max(1) as f64).powf(1.0 - s) / (s - 1.0)).exp();
    Ok(GlobalProduct {
        prime_bound,
        prime_count: primes.len(),
        value,
        tail_factor,
    })
}

/// `zeta(s)` by direct summation.
#[derive(Debug, Clone, PartialEq)]
pub struct ZetaReference {
    pub value: f64,
    pub terms: u64,
    pub error_bound: f64,
}

/// `zeta(s) = sum_{k <= N} k^-s + tail`, with the tail bracketed by
/// `int_{N+1}^inf x^-s dx <= tail <= int_N^inf x^-s dx` and estimated by
/// the midpoint of the bracket. `N` is the smallest count whose half
/// bracket width is at most `tol`.
pub fn zeta_reference(s: f64, tol: f64) -> Result<ZetaReference> {
    if s.is_nan() || s <= 1.0 {
        return Err(Error::Domain(format!("zeta series needs s > 1, got {s}")));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Domain(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let tail = |n: f64| n.powf(1.0 - s) / (s - 1.0);
    let half_width = |n: u64| (tail(n as f64) - tail(n as f64 + 1.0)) / 2.0;
    // half_width(N) ~ N^-s / 2
    let mut terms = ((2.0 * tol).powf(-1.0 / s).ceil() as u64).max(1);
    while terms > 1 && half_width(terms - 1) <= tol {
        terms -= 1;
    }
    while half_width(terms) > tol {
        terms += 1 + terms / 8;
    }
    if terms > MAX_REFERENCE_TERMS {
        return Err(Error::Resource(format!(
            "zeta({s}) to {tol} needs {terms} terms, cap is {MAX_REFERENCE_TERMS}"
        )));
    }
    // Neumaier summation, smallest terms first
    let (mut partial, mut carry) = (0.0f64, 0.0f64);
    for k in (1..=terms).rev() {
        let x = (k as f64).powf(-s);
        let t = partial + x;
        carry += if partial.abs() >= x.abs() {
            (partial - t) + x
        } else {
            (x - t) + partial
        };
        partial = t;
    }
    let value = partial + carry + (tail(terms as f64) + tail(terms as f64 + 1.0)) / 2.0;
    // one rounding per powf plus the compensated-sum residue
    let rounding = 4.0 * f64::EPSILON * value;
    Ok(ZetaReference {
        value,
        terms,
        error_bound: half_width(terms) + rounding,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::factorize;
    use num_traits::One;
    use std::f64::consts::PI;

    fn fac(n: u64) -> Factorization {
        factorize(n, None).unwrap()
    }

    fn q(n: i64, d: u64) -> Exact {
        Exact::ratio(n, d).unwrap()
    }

    const S1: SParam = SParam::Int(1);
    const S2: SParam = SParam::Int(2);

    #[test]
    fn partial_zeta_examples() {
        assert_eq!(partial_zeta::<Exact>(&fac(1), &S2).unwrap(), q(1, 1));
        assert_eq!(
            partial_zeta::<Exact>(&fac(1), &SParam::Int(0)).unwrap(),
            q(1, 1)
        );
        // 1/((3/4)(8/9))
        assert_eq!(partial_zeta::<Exact>(&fac(6), &S2).unwrap(), q(3, 2));
        assert_eq!(
            partial_zeta::<Exact>(&fac(5usize.pow(3) as u64), &S1).unwrap(),
            q(5, 4)
        );
        assert!(matches!(
            partial_zeta::<Exact>(&fac(6), &SParam::Int(0)),
            Err(Error::Singularity(_))
        ));
        assert!(partial_zeta::<f64>(&fac(6), &SParam::Real(0.0)).is_err());
    }

    #[test]
    fn ratio_identity_examples() {
        let (l, r) = zeta_ratio_identity_check::<Exact>(&fac(6), &S1).unwrap();
        assert_eq!((l, r), (q(2, 1), q(2, 1)));
        let (l, r) = zeta_ratio_identity_check::<Exact>(&fac(1), &S2).unwrap();
        assert_eq!((l, r), (q(1, 1), q(1, 1)));
        for p in [2u64, 3, 101] {
            for s in [-2, 1, 3] {
                let s = SParam::Int(s);
                let expected = Exact::one() + Exact::inv_pow(p, &s).unwrap();
                let (l, r) = zeta_ratio_identity_check::<Exact>(&fac(p), &s).unwrap();
                assert_eq!(l, expected);
                assert_eq!(r, expected);
            }
        }
    }

    #[test]
    fn totient_and_product_identity_examples() {
        assert_eq!(zeta_totient_identity(&fac(1)), (q(1, 1), q(1, 1)));
        assert_eq!(zeta_totient_identity(&fac(12)), (q(3, 1), q(3, 1)));
        assert_eq!(zeta_totient_identity(&fac(30)), (q(15, 4), q(15, 4)));
        assert_eq!(
            zeta_product_identity::<Exact>(&fac(1), &S2).unwrap(),
            (q(1, 1), q(1, 1))
        );
        assert_eq!(
            zeta_product_identity::<Exact>(&fac(2), &S2).unwrap(),
            (q(8, 3), q(8, 3))
        );
        assert_eq!(
            zeta_product_identity::<Exact>(&fac(6), &S2).unwrap(),
            (q(9, 2), q(9, 2))
        );
    }

    #[test]
    fn sigma_local_factor_examples() {
        // 1/((3/4)(1/2))
        assert_eq!(
            sigma_local_factor::<Exact>(2, &S2, SigmaFactorMode::Closed).unwrap(),
            q(8, 3)
        );
        assert_eq!(
            sigma_local_factor::<Exact>(2, &S2, SigmaFactorMode::Truncated(0)).unwrap(),
            q(1, 1)
        );
        let t20: Exact = sigma_local_factor(2, &S2, SigmaFactorMode::Truncated(20)).unwrap();
        assert!((Scalar::to_f64(&t20) - 8.0 / 3.0).abs() < 1e-5);
        for s in [0, 1] {
            assert!(matches!(
                sigma_local_factor::<Exact>(3, &SParam::Int(s), SigmaFactorMode::Closed),
                Err(Error::Singularity(_))
            ));
        }
        // truncation accepts any s
        assert!(
            sigma_local_factor::<Exact>(3, &SParam::Int(-1), SigmaFactorMode::Truncated(4)).is_ok()
        );
    }

    #[test]
    fn sigma_tail_bound_dominates_the_error() {
        for p in [2u64, 3, 5] {
            for s in [2i64, 3] {
                let sp = SParam::Int(s);
                let closed: Exact = sigma_local_factor(p, &sp, SigmaFactorMode::Closed).unwrap();
                for depth in [0u32, 1, 5, 30] {
                    let t: Exact =
                        sigma_local_factor(p, &sp, SigmaFactorMode::Truncated(depth)).unwrap();
                    let gap = Scalar::to_f64(&(closed.clone() - t));
                    assert!(gap >= 0.0);
                    assert!(gap <= sigma_tail_bound(p, s as f64, depth) * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn sigma_partial_examples() {
        let report = sigma_partial_zeta_check::<Exact>(&fac(2), &S2, None, 1e-9).unwrap();
        assert!(report.passed);
        assert_eq!(report.rhs, q(8, 3).into());
        let closed: Exact = sigma_local_factor(2, &S2, SigmaFactorMode::Closed).unwrap();
        assert_eq!(closed, q(4, 3) * q(2, 1));

        let report =
            sigma_partial_zeta_check::<Exact>(&fac(1), &SParam::Int(5), None, 1e-9).unwrap();
        assert!(report.passed);
        assert_eq!(report.rhs, q(1, 1).into());

        let report =
            sigma_partial_zeta_check::<Exact>(&fac(6), &SParam::Int(3), Some(30), 1e-9).unwrap();
        assert!(report.passed, "{report:?}");

        let shallow = sigma_partial_zeta_check::<Exact>(&fac(6), &S2, Some(2), 1e-9).unwrap();
        assert!(!shallow.passed);

        assert!(matches!(
            sigma_partial_zeta_check::<Exact>(&fac(6), &S1, None, 1e-9),
            Err(Error::Convergence(_))
        ));
        let real =
            sigma_partial_zeta_check::<f64>(&fac(30), &SParam::Real(2.5), None, 1e-9).unwrap();
        assert!(real.passed, "{real:?}");
    }

    #[test]
    fn global_product_examples() {
        let g = truncated_global_product(2, 2.0).unwrap();
        assert_eq!(g.value, 1.25);
        assert_eq!(g.prime_count, 1);
        assert!(matches!(
            truncated_global_product(100, 1.0),
            Err(Error::Convergence(_))
        ));
        assert!(matches!(
            truncated_global_product(MAX_PRIME_BOUND + 1, 2.0),
            Err(Error::Resource(_))
        ));

        let target2 =
            zeta_reference(2.0, 1e-12).unwrap().value / zeta_reference(4.0, 1e-12).unwrap().value;
        assert!((target2 - 15.0 / (PI * PI)).abs() < 1e-9);
        let g = truncated_global_product(10_000, 2.0).unwrap();
        assert!((g.value - target2).abs() < 1e-3);

        let target3 =
            zeta_reference(3.0, 1e-13).unwrap().value / zeta_reference(6.0, 1e-13).unwrap().value;
        let g = truncated_global_product(100_000, 3.0).unwrap();
        assert!((g.value - target3).abs() < 1e-6);
    }

    #[test]
    fn global_product_is_monotone_and_bounded() {
        let reference =
            zeta_reference(2.0, 1e-12).unwrap().value / zeta_reference(4.0, 1e-12).unwrap().value;
        let mut last = 0.0;
        for bound in [2u64, 3, 10, 100, 1000, 10_000, 100_000] {
            let g = truncated_global_product(bound, 2.0).unwrap();
            assert!(g.value > last);
            assert!(g.value <= reference + 1e-12);
            assert!(reference <= g.upper_bound() + 1e-12);
            last = g.value;
        }
    }

    #[test]
    fn zeta_reference_examples() {
        let z2 = zeta_reference(2.0, 1e-10).unwrap();
        assert!((z2.value - PI * PI / 6.0).abs() <= 1e-10 + 1e-13);
        assert!(z2.error_bound <= 1e-10 + 1e-12);
        let z4 = zeta_reference(4.0, 1e-12).unwrap();
        assert!((z4.value - PI.powi(4) / 90.0).abs() <= 1e-12 + 1e-14);
        let z30 = zeta_reference(30.0, 1e-15).unwrap();
        assert!((z30.value - (1.0 + 2f64.powi(-30) + 3f64.powi(-30))).abs() < 1e-15);
        assert!(matches!(zeta_reference(1.0, 1e-9), Err(Error::Domain(_))));
    }

    #[test]
    fn partial_zeta_depends_on_radical_only() {
        for n in 1..=2000u64 {
            let f = fac(n);
            for s in [S1, S2, SParam::Int(-1)] {
                assert_eq!(
                    partial_zeta::<Exact>(&f, &s).unwrap(),
                    partial_zeta::<Exact>(&f.radical(), &s).unwrap()
                );
            }
        }
    }
}
