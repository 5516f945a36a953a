//! Sieve densities `J_n(s)`, the weights `lambda_d` in ratio and product
//! form, and the finite quadratic form `Q`.
//!
//! Weights are indexed by the squarefree divisors of a modulus `n`. The
//! cofactor `n/d` in `J_{n/d}` is taken inside the squarefree kernel,
//! i.e. as `rad(n)/d`, so that the weights depend on `n` only through its
//! prime support.

use serde::{Deserialize, Serialize};

use crate::arith::{self, Factorization};
use crate::error::{Error, Result};
use crate::numerics::{approx_equal, ArithValue, SParam, Scalar};

/// `h_s(p) = 1/((p-1) p^s)`.
pub fn h_weight<S: Scalar>(p: u64, s: &SParam) -> Result<S> {
    if p < 2 {
        return Err(Error::Domain(format!("{p} is not a prime")));
    }
    S::inv_pow(p, s)?.try_div(S::from_u64(p - 1), "p - 1")
}

/// `J_n(s) = sum_{d | n} mu^2(d) prod_{p | d} h_s(p)`.
pub fn j_value<S: Scalar>(f: &Factorization, s: &SParam) -> Result<S> {
    let h: Vec<S> = f.primes().map(|p| h_weight(p, s)).collect::<Result<_>>()?;
    arith::squarefree_divisor_terms(f)
        .iter()
        .try_fold(S::zero(), |acc, t| {
            let term = (0..h.len())
                .filter(|i| t.mask >> i & 1 == 1)
                .fold(S::one(), |prod, i| prod * h[i].clone());
            Ok(acc + term)
        })
}

fn squarefree_mask(d: u64, f: &Factorization) -> Result<u32> {
    f.squarefree_mask_of(d)
        .ok_or_else(|| Error::Domain(format!("{d} is not a squarefree divisor of {}", f.n())))
}

fn signed<S: Scalar>(mu: i8, v: S) -> S {
    if mu < 0 {
        -v
    } else {
        v
    }
}

/// `lambda_d = mu(d) J_{n/d} / J_n`.
pub fn lambda_ratio<S: Scalar>(d: u64, f: &Factorization, s: &SParam) -> Result<S> {
    let mask = squarefree_mask(d, f)?;
    let cofactor = f.squarefree_part(f.full_mask() ^ mask);
    let mu = if mask.count_ones() % 2 == 0 { 1 } else { -1 };
    let ratio = j_value::<S>(&cofactor, s)?.try_div(j_value(f, s)?, "J_n")?;
    Ok(signed(mu, ratio))
}

/// `lambda_d = mu(d) prod_{p | d} 1/(1 + h_s(p))`.
pub fn lambda_product<S: Scalar>(d: u64, s: &SParam) -> Result<S> {
    let fd = arith::factorize(d, None)?;
    if !fd.is_squarefree() {
        return Err(Error::Domain(format!("{d} is not squarefree")));
    }
    let magnitude = fd.primes().try_fold(S::one(), |acc, p| {
        Ok(acc * (S::one() + h_weight::<S>(p, s)?).try_recip("1 + h")?)
    })?;
    Ok(signed(arith::mobius(&fd), magnitude))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SieveEntry<S> {
    pub d: u64,
    pub mu: i8,
    /// `J_{n/d}`
    pub j_cofactor: S,
    pub lambda: S,
}

/// `lambda_d` and `J` over the squarefree divisors of `n`, ascending in `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SieveWeights<S> {
    pub n: u64,
    pub s: SParam,
    pub j_n: S,
    pub entries: Vec<SieveEntry<S>>,
}

impl<S: Scalar> SieveWeights<S> {
    pub fn lambda(&self, d: u64) -> Option<&S> {
        self.entries
            .binary_search_by_key(&d, |e| e.d)
            .ok()
            .map(|i| &self.entries[i].lambda)
    }

    pub fn record(&self) -> SieveWeightsRecord {
        SieveWeightsRecord {
            n: self.n,
            s_mode: self.s.mode_name().into(),
            s_value: self.s.to_string(),
            j_n: self.j_n.to_string(),
            weights: self
                .entries
                .iter()
                .map(|e| SieveRow {
                    d: e.d,
                    mu: e.mu,
                    j_over_d: e.j_cofactor.to_string(),
                    lambda: e.lambda.to_string(),
                })
                .collect(),
        }
    }
}

/// Serialized form of [`SieveWeights`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SieveWeightsRecord {
    pub n: u64,
    pub s_mode: String,
    pub s_value: String,
    #[serde(rename = "J_n")]
    pub j_n: String,
    pub weights: Vec<SieveRow>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SieveRow {
    pub d: u64,
    pub mu: i8,
    #[serde(rename = "J_over_d")]
    pub j_over_d: String,
    pub lambda: String,
}

/// Builds the weight table from the ratio form, with `J` recomposed
/// multiplicatively over the subset lattice, and checks every weight
/// against the product form.
pub fn weight_table<S: Scalar>(f: &Factorization, s: &SParam) -> Result<SieveWeights<S>> {
    let one_plus_h: Vec<S> = f
        .primes()
        .map(|p| Ok(S::one() + h_weight::<S>(p, s)?))
        .collect::<Result<_>>()?;
    // j[mask] = prod over the primes in mask of (1 + h)
    let size = 1usize << f.omega();
    let mut j: Vec<S> = Vec::with_capacity(size);
    j.push(S::one());
    for mask in 1..size {
        let low = mask.trailing_zeros() as usize;
        let prev = j[mask & (mask - 1)].clone();
        j.push(prev * one_plus_h[low].clone());
    }
    let full = size - 1;
    let j_n = j[full].clone();

    let tol = 1e-12;
    let mut entries = Vec::with_capacity(size);
    for term in arith::squarefree_divisor_terms(f) {
        let mask = term.mask as usize;
        let j_cofactor = j[full ^ mask].clone();
        let lambda = signed(term.mu, j_cofactor.clone().try_div(j_n.clone(), "J_n")?);
        let check = lambda_product::<S>(term.d, s)?;
        if !approx_equal(
            &lambda.clone().into_value(),
            &check.clone().into_value(),
            tol,
        ) {
            return Err(Error::Internal(format!(
                "lambda_{} disagrees: ratio form {lambda}, product form {check}",
                term.d
            )));
        }
        entries.push(SieveEntry {
            d: term.d,
            mu: term.mu,
            j_cofactor,
            lambda,
        });
    }
    entries.sort_by_key(|e| e.d);
    Ok(SieveWeights {
        n: f.n(),
        s: *s,
        j_n,
        entries,
    })
}

/// `Q = sum_{m <= X} (sum_{d | m, d <= R} lambda_d)^2`, where `d` ranges
/// over the table's index set and missing indices contribute zero.
pub fn quadratic_form_q<S: Scalar>(x: u64, r: u64, w: &SieveWeights<S>) -> Result<S> {
    if x == 0 || r == 0 {
        return Err(Error::Domain("Q needs X >= 1 and R >= 1".into()));
    }
    let mut inner = vec![S::zero(); x as usize + 1];
    for e in w.entries.iter().filter(|e| e.d <= r && e.d <= x) {
        for m in (e.d..=x).step_by(e.d as usize) {
            let slot = &mut inner[m as usize];
            *slot = slot.clone() + e.lambda.clone();
        }
    }
    Ok(inner
        .into_iter()
        .skip(1)
        .fold(S::zero(), |acc, v| acc + v.clone() * v))
}

/// `|lambda_d|` for every squarefree `d | n` across a list of exponents.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayProfile {
    pub s_values: Vec<SParam>,
    pub rows: Vec<DecayRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayRow {
    pub d: u64,
    /// One entry per exponent, in the order of `s_values`.
    pub magnitudes: Vec<ArithValue>,
}

impl DecayRow {
    /// True when `|lambda_d|` strictly decreases along the profile.
    pub fn is_strictly_decreasing(&self) -> bool {
        self.magnitudes.windows(2).all(|w| less(&w[1], &w[0]))
    }

    /// True when `|lambda_d|` strictly increases along the profile.
    pub fn is_strictly_increasing(&self) -> bool {
        self.magnitudes.windows(2).all(|w| less(&w[0], &w[1]))
    }
}

fn less(a: &ArithValue, b: &ArithValue) -> bool {
    match (a.as_exact(), b.as_exact()) {
        (Some(x), Some(y)) => x < y,
        _ => a.to_f64() < b.to_f64(),
    }
}

pub fn weight_decay_profile(f: &Factorization, s_values: &[SParam]) -> Result<DecayProfile> {
    let rows = arith::squarefree_divisors(f)
        .into_iter()
        .map(|d| {
            let magnitudes = s_values
                .iter()
                .map(|s| {
                    Ok(match s {
                        SParam::Int(_) => lambda_product::<crate::Exact>(d, s)?.into_value(),
                        SParam::Real(_) => lambda_product::<f64>(d, s)?.into_value(),
                    }
                    .abs())
                })
                .collect::<Result<_>>()?;
            Ok(DecayRow { d, magnitudes })
        })
        .collect::<Result<_>>()?;
    Ok(DecayProfile {
        s_values: s_values.to_vec(),
        rows,
    })
}
