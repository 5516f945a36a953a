//! Identity registry and verification harness.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{self, Factorization};
use crate::error::{Error, Result};
use crate::identities::{self, DinevaForm, Divisor, Enumeration, LocalWeight};
use crate::numerics::{approx_equal, ArithValue, Exact, Mode, SParam, Scalar};
use crate::{selberg, zeta};

pub const DEFAULT_TOL: f64 = 1e-12;

/// The closed set of verifiable identities plus one custom escape hatch.
#[derive(Debug, Clone)]
pub enum Identity {
    /// `sum mu^2(d)/phi(d) = n/phi(n)`
    Dineva,
    /// `sum mu^2(d)/(phi(d) d^s) = prod (1 + 1/((p-1) p^s))`, all product forms
    GeneralizedDineva,
    /// `sum mu(d)/d^s = prod (1 - p^-s) = 1/zeta_n(s)`
    MobiusSum,
    /// `sum mu^2(d)/d^s = prod (1 + p^-s) = zeta_n(s)/zeta_n(2s)`
    SquarefreeSum,
    /// `sum phi(d) = n`
    TotientSum,
    /// `prod_p sum_k sigma(p^k)/p^(ks) = zeta_n(s) zeta_n(s-1)`
    SigmaPartial,
    /// ratio-form and product-form sieve weights coincide;
    /// `sum_d lambda_d = prod h/(1+h)`
    SelbergLambdaEquiv,
    /// `sum mu^2(d) prod_{p|d} g(p) = prod (1 + g(p))`
    Custom(LocalWeight),
}

impl Identity {
    pub const NAMES: [&'static str; 7] = [
        "dineva",
        "generalized_dineva",
        "mobius_sum",
        "squarefree_sum",
        "totient_sum",
        "sigma_partial",
        "selberg_lambda_equiv",
    ];

    /// Resolves a registry name. `gdineva` is accepted for
    /// `generalized_dineva`; `custom:<weight>` builds a custom identity
    /// from a built-in [`LocalWeight`].
    pub fn lookup(name: &str) -> Result<Identity> {
        Ok(match name {
            "dineva" => Identity::Dineva,
            "generalized_dineva" | "gdineva" => Identity::GeneralizedDineva,
            "mobius_sum" => Identity::MobiusSum,
            "squarefree_sum" => Identity::SquarefreeSum,
            "totient_sum" => Identity::TotientSum,
            "sigma_partial" => Identity::SigmaPartial,
            "selberg_lambda_equiv" => Identity::SelbergLambdaEquiv,
            _ => {
                let weight = name
                    .strip_prefix("custom:")
                    .and_then(LocalWeight::builtin)
                    .ok_or_else(|| Error::Lookup(name.into()))?;
                Identity::Custom(weight)
            }
        })
    }

    pub fn name(&self) -> String {
        match self {
            Identity::Custom(g) => format!("custom:{}", g.name()),
            other => Self::NAMES[other.index()].to_string(),
        }
    }

    fn index(&self) -> usize {
        match self {
            Identity::Dineva => 0,
            Identity::GeneralizedDineva => 1,
            Identity::MobiusSum => 2,
            Identity::SquarefreeSum => 3,
            Identity::TotientSum => 4,
            Identity::SigmaPartial => 5,
            Identity::SelbergLambdaEquiv => 6,
            Identity::Custom(_) => 7,
        }
    }

    /// False for identities with no exponent; those always run at `s = 0`.
    pub fn uses_s(&self) -> bool {
        !matches!(self, Identity::Dineva | Identity::TotientSum)
    }

    /// True when both sides depend on `n` only through its radical.
    pub fn is_squarefree_supported(&self) -> bool {
        !matches!(self, Identity::TotientSum)
    }

    /// Every identity with no free parameters beyond `s`.
    pub fn registered() -> Vec<Identity> {
        Self::NAMES
            .iter()
            .map(|n| Self::lookup(n).expect("registered name"))
            .collect()
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Relative tolerance for approximate comparisons; ignored in exact mode.
    pub tol: f64,
    /// Walk every divisor on the sum side even when the weight carries `mu^2`.
    pub full_enumeration: bool,
    /// Fixed depth for truncated series; chosen from the tail bound when `None`.
    pub truncation: Option<u32>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            tol: DEFAULT_TOL,
            full_enumeration: false,
            truncation: None,
        }
    }
}

/// Both sides of an identity at one `(n, s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sides<S> {
    /// Divisor-sum side.
    pub lhs: S,
    /// Primary closed form.
    pub rhs: S,
    /// Further closed forms that must equal `lhs`.
    pub alternatives: Vec<S>,
    /// Termwise pairs that must agree (e.g. per-divisor weights).
    pub pointwise: Vec<(S, S)>,
    pub enumeration: Enumeration,
}

fn full_sum<S: Scalar>(
    f: &Factorization,
    s: &SParam,
    numerator: impl FnMut(&Divisor<'_>) -> Result<S>,
) -> Result<(S, Enumeration)> {
    Ok((identities::divisor_sum(f, numerator, s)?, Enumeration::Full))
}

fn mu2_over_phi<S: Scalar>(d: &Divisor<'_>) -> Result<S> {
    if d.mu() == 0 {
        Ok(S::zero())
    } else {
        S::ratio(1, d.phi())
    }
}

/// Evaluates both sides of `identity` in the scalar `S`.
pub fn sides<S: Scalar>(
    identity: &Identity,
    f: &Factorization,
    s: &SParam,
    opts: &VerifyOptions,
) -> Result<Sides<S>> {
    let full = opts.full_enumeration;
    let sq = Enumeration::Squarefree;
    let mut alternatives = Vec::new();
    let mut pointwise = Vec::new();
    let ((lhs, enumeration), rhs) = match identity {
        Identity::Dineva => {
            let s0 = SParam::Int(0);
            let lhs = if full {
                full_sum(f, &s0, mu2_over_phi)?
            } else {
                (identities::squarefree_sum(f, |t| S::ratio(1, t.phi))?, sq)
            };
            let rhs = S::from_u64(f.n()).try_div(S::from_u64(arith::totient(f)), "phi(n)")?;
            (lhs, rhs)
        }
        Identity::GeneralizedDineva => {
            let lhs = if full {
                full_sum(f, s, mu2_over_phi)?
            } else {
                (
                    identities::generalized_dineva(f, s, DinevaForm::DivisorSum)?,
                    sq,
                )
            };
            alternatives.push(identities::generalized_dineva(f, s, DinevaForm::Alternate)?);
            alternatives.push(identities::generalized_dineva(f, s, DinevaForm::ZetaLocal)?);
            (
                lhs,
                identities::generalized_dineva(f, s, DinevaForm::Product)?,
            )
        }
        Identity::MobiusSum => {
            let lhs = if full {
                full_sum(f, s, |d| Ok(S::from_i64(i64::from(d.mu()))))?
            } else {
                (identities::mobius_divisor_sum(f, s)?, sq)
            };
            if !s.is_zero() || f.n() == 1 {
                alternatives.push(zeta::partial_zeta::<S>(f, s)?.try_recip("zeta_n(s)")?);
            }
            (lhs, identities::mobius_product(f, s)?)
        }
        Identity::SquarefreeSum => {
            let lhs = if full {
                full_sum(f, s, |d| Ok(if d.mu() == 0 { S::zero() } else { S::one() }))?
            } else {
                (identities::squarefree_dirichlet_sum(f, s)?, sq)
            };
            if !s.is_zero() || f.n() == 1 {
                alternatives.push(zeta::zeta_ratio_identity_check::<S>(f, s)?.1);
            }
            (lhs, identities::squarefree_product(f, s)?)
        }
        Identity::TotientSum => {
            let total = identities::totient_sum_check(f);
            let lhs = S::from_value(&ArithValue::Exact(total))?;
            ((lhs, Enumeration::Full), S::from_u64(f.n()))
        }
        Identity::SigmaPartial => {
            if !s.greater_than(1) {
                return Err(Error::Convergence(format!(
                    "sigma series needs s > 1, got {s}"
                )));
            }
            let lhs = f.primes().try_fold(S::one(), |acc, p| {
                Ok(acc * zeta::sigma_local_factor::<S>(p, s, zeta::SigmaFactorMode::Closed)?)
            })?;
            let rhs = zeta::partial_zeta::<S>(f, s)? * zeta::partial_zeta(f, &s.offset(-1))?;
            ((lhs, Enumeration::Full), rhs)
        }
        Identity::SelbergLambdaEquiv => {
            let mut total = S::zero();
            for d in arith::squarefree_divisors(f) {
                let ratio = selberg::lambda_ratio::<S>(d, f, s)?;
                let product = selberg::lambda_product::<S>(d, s)?;
                total = total + ratio.clone();
                pointwise.push((ratio, product));
            }
            // sum_{d | n} mu(d) prod_{p | d} 1/(1+h) = prod_{p | n} h/(1+h)
            let rhs = f.primes().try_fold(S::one(), |acc, p| {
                let h = selberg::h_weight::<S>(p, s)?;
                Ok(acc * h.clone().try_div(S::one() + h, "1 + h")?)
            })?;
            ((total, sq), rhs)
        }
        Identity::Custom(g) => {
            if full {
                let weights: Vec<S> = f.primes().map(|p| g.eval(p, s)).collect::<Result<_>>()?;
                let lhs = full_sum(f, &SParam::Int(0), |d| {
                    if d.mu() == 0 {
                        return Ok(S::zero());
                    }
                    Ok(d.exponents
                        .iter()
                        .zip(&weights)
                        .filter(|(&e, _)| e == 1)
                        .fold(S::one(), |acc, (_, w)| acc * w.clone()))
                })?;
                (lhs, identities::squarefree_euler_product(f, g, s)?)
            } else {
                let (lhs, rhs) = identities::identity_pair(f, g, s)?;
                ((lhs, sq), rhs)
            }
        }
    };
    Ok(Sides {
        lhs,
        rhs,
        alternatives,
        pointwise,
        enumeration,
    })
}

/// Outcome of verifying one identity at one `(n, s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub identity: String,
    pub n: u64,
    pub s: SParam,
    pub lhs: ArithValue,
    pub rhs: ArithValue,
    pub mode: Mode,
    pub passed: bool,
    pub abs_discrepancy: f64,
    pub enumeration: Enumeration,
}

/// Flat, string-valued form of an [`IdentityReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub identity: String,
    pub n: u64,
    pub s_mode: String,
    pub s_value: String,
    pub lhs: String,
    pub rhs: String,
    pub mode: Mode,
    pub passed: bool,
    pub abs_discrepancy: f64,
    pub enumeration: Enumeration,
}

impl IdentityReport {
    pub fn record(&self) -> ReportRecord {
        ReportRecord {
            identity: self.identity.clone(),
            n: self.n,
            s_mode: self.s.mode_name().into(),
            s_value: self.s.to_string(),
            lhs: self.lhs.to_string(),
            rhs: self.rhs.to_string(),
            mode: self.mode,
            passed: self.passed,
            abs_discrepancy: self.abs_discrepancy,
            enumeration: self.enumeration,
        }
    }
}

fn report_from_sides<S: Scalar>(
    identity: &Identity,
    f: &Factorization,
    s: &SParam,
    tol: f64,
    sides: Sides<S>,
) -> IdentityReport {
    let lhs = sides.lhs.into_value();
    let rhs = sides.rhs.into_value();
    let mut passed = approx_equal(&lhs, &rhs, tol);
    let mut discrepancy = lhs.abs_diff(&rhs);
    for alt in sides.alternatives {
        let alt = alt.into_value();
        passed &= approx_equal(&lhs, &alt, tol);
        discrepancy = discrepancy.max(lhs.abs_diff(&alt));
    }
    for (a, b) in sides.pointwise {
        let (a, b) = (a.into_value(), b.into_value());
        passed &= approx_equal(&a, &b, tol);
        discrepancy = discrepancy.max(a.abs_diff(&b));
    }
    IdentityReport {
        identity: identity.name(),
        n: f.n(),
        s: *s,
        mode: S::MODE,
        lhs,
        rhs,
        passed,
        abs_discrepancy: discrepancy,
        enumeration: sides.enumeration,
    }
}

fn verify_in<S: Scalar>(
    identity: &Identity,
    f: &Factorization,
    s: &SParam,
    opts: &VerifyOptions,
) -> Result<IdentityReport> {
    if let Identity::SigmaPartial = identity {
        return zeta::sigma_partial_zeta_check::<S>(f, s, opts.truncation, opts.tol);
    }
    let sides = sides::<S>(identity, f, s, opts)?;
    Ok(report_from_sides(identity, f, s, opts.tol, sides))
}

/// Verifies `identity` at an already factored `n`. Integer `s` runs
/// exactly (the tolerance is ignored); real `s` runs in `f64`.
pub fn verify_factored(
    identity: &Identity,
    f: &Factorization,
    s: &SParam,
    opts: &VerifyOptions,
) -> Result<IdentityReport> {
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::Domain(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    let s = if identity.uses_s() {
        *s
    } else {
        SParam::Int(0)
    };
    match s.mode() {
        Mode::Exact => verify_in::<Exact>(identity, f, &s, opts),
        Mode::Approx => verify_in::<f64>(identity, f, &s, opts),
    }
}

pub fn verify(
    identity: &Identity,
    n: u64,
    s: &SParam,
    opts: &VerifyOptions,
) -> Result<IdentityReport> {
    verify_factored(identity, &arith::factorize(n, None)?, s, opts)
}

/// Verifies every `n` in `lo..=hi`, returning reports in ascending `n`
/// regardless of how the work was scheduled.
pub fn verify_range(
    identity: &Identity,
    lo: u64,
    hi: u64,
    s: &SParam,
    opts: &VerifyOptions,
    parallelism: usize,
) -> Result<Vec<IdentityReport>> {
    if lo == 0 || lo > hi {
        return Err(Error::Domain(format!("invalid range {lo}:{hi}")));
    }
    if parallelism == 0 {
        return Err(Error::Domain("parallelism must be at least 1".into()));
    }
    let table = arith::build_spf_table(hi.clamp(2, arith::DEFAULT_SPF_LIMIT))?;
    let run = |n: u64| verify_factored(identity, &arith::factorize(n, Some(&table))?, s, opts);
    if parallelism == 1 {
        return (lo..=hi).map(run).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::Resource(e.to_string()))?;
    pool.install(|| (lo..=hi).into_par_iter().map(run).collect())
}

/// Aggregate over a batch of reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub max_discrepancy: f64,
}

impl Summary {
    pub fn of(reports: &[IdentityReport]) -> Summary {
        let passed = reports.iter().filter(|r| r.passed).count();
        Summary {
            total: reports.len(),
            passed,
            failed: reports.len() - passed,
            max_discrepancy: reports
                .iter()
                .map(|r| r.abs_discrepancy)
                .fold(0.0, f64::max),
        }
    }

    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} checked, {} passed, {} failed, max discrepancy {:e}",
            self.total, self.passed, self.failed, self.max_discrepancy
        )
    }
}

/// Left side of `identity` as a tagged value; used by the multiplicativity
/// and radical-invariance checks.
pub fn lhs_value(identity: &Identity, f: &Factorization, s: &SParam) -> Result<ArithValue> {
    let opts = VerifyOptions::default();
    let s = if identity.uses_s() {
        *s
    } else {
        SParam::Int(0)
    };
    Ok(match s.mode() {
        Mode::Exact => sides::<Exact>(identity, f, &s, &opts)?.lhs.into_value(),
        Mode::Approx => sides::<f64>(identity, f, &s, &opts)?.lhs.into_value(),
    })
}
