use eulerprod::arith::{self, Factorization};
use eulerprod::selberg::{self, DecayProfile};
use eulerprod::{
    factorize, identities, verify_range, zeta, ArithValue, Exact, Identity, IdentityReport,
    LocalWeight, Mode, SParam, Scalar, SieveWeights, Summary, VerifyOptions,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{EvalArgs, Format, Global, Quantity, SieveArgs, VerifyArgs, ZetaArgs};
use crate::render::{csv_rows, json_array, table, Output};

/// Largest `X` accepted for the quadratic form; it allocates `X` accumulators.
const MAX_Q_TERMS: u64 = 100_000_000;

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Internal(String),
}

impl From<eulerprod::Error> for Failure {
    fn from(e: eulerprod::Error) -> Self {
        if e.is_internal() {
            Failure::Internal(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

fn check_tol(tol: f64) -> Result<(), Failure> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Failure::Usage(format!(
            "--tol must be positive and finite, got {tol}"
        )))
    }
}

fn threads(g: &Global) -> usize {
    g.parallelism
        .map(usize::from)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn weight(name: &str, seed: u64) -> Result<LocalWeight, Failure> {
    if name == "seeded" {
        return Ok(LocalWeight::seeded_rational(seed));
    }
    LocalWeight::builtin(name).ok_or_else(|| Failure::Usage(format!("unknown weight `{name}`")))
}

#[derive(Serialize)]
struct EvalRow {
    quantity: String,
    n: u64,
    s_mode: &'static str,
    s_value: String,
    value: String,
    mode: Mode,
}

pub fn eval(a: &EvalArgs, g: &Global) -> Result<Output, Failure> {
    check_tol(g.tol)?;
    let f = factorize(a.n, None)?;
    let s = a.s.value();
    let value = match a.quantity {
        Quantity::Dineva => identities::dineva(&f).into(),
        Quantity::Phi => integer(arith::totient(&f)),
        Quantity::Sigma => Exact::from_biguint(&arith::sigma(&f)).into(),
        Quantity::Mu => ArithValue::integer(arith::mobius(&f).into()),
        Quantity::Radical => integer(arith::radical(&f)),
        Quantity::TotientSum => identities::totient_sum_check(&f).into(),
        q => {
            let w = match q {
                Quantity::Custom => Some(weight(&a.weight, g.seed)?),
                _ => None,
            };
            if q == Quantity::Lambda && a.d.is_none() {
                return Err(Failure::Usage("lambda needs --d".into()));
            }
            match s.mode() {
                Mode::Exact => with_s::<Exact>(q, &f, &s, a, w.as_ref())?.into_value(),
                Mode::Approx => with_s::<f64>(q, &f, &s, a, w.as_ref())?.into_value(),
            }
        }
    };

    let mut name = value_name(a.quantity);
    match a.quantity {
        Quantity::Gdineva => name = format!("{name}:{}", a.form.as_str()),
        Quantity::Lambda => name = format!("{name}:{}", a.d.unwrap_or(1)),
        Quantity::Custom => name = format!("{name}:{}", a.weight),
        _ => {}
    }
    let row = EvalRow {
        quantity: name,
        n: a.n,
        s_mode: s.mode_name(),
        s_value: s.to_string(),
        value: value.to_string(),
        mode: value.mode(),
    };
    let body = match g.output {
        Format::Text => format!("{} ({})\n", row.value, row.mode.as_str()),
        Format::Csv => csv_rows(&[row])?,
        Format::Json => json_array(&[row])?,
    };
    Ok(Output::ok(body))
}

fn integer(v: u64) -> ArithValue {
    Exact::from_u64(v).into()
}

fn value_name(q: Quantity) -> String {
    use clap::ValueEnum;
    q.to_possible_value()
        .map_or_else(String::new, |v| v.get_name().to_string())
}

fn with_s<S: Scalar>(
    q: Quantity,
    f: &Factorization,
    s: &SParam,
    a: &EvalArgs,
    w: Option<&LocalWeight>,
) -> eulerprod::Result<S> {
    match (q, w) {
        (Quantity::Gdineva, _) => identities::generalized_dineva(f, s, a.form),
        (Quantity::ZetaN, _) => zeta::partial_zeta(f, s),
        (Quantity::J, _) => selberg::j_value(f, s),
        (Quantity::Lambda, _) => selberg::lambda_ratio(a.d.unwrap_or(1), f, s),
        (Quantity::MobiusSum, _) => identities::mobius_divisor_sum(f, s),
        (Quantity::SquarefreeSum, _) => identities::squarefree_dirichlet_sum(f, s),
        (Quantity::Custom, Some(w)) => identities::squarefree_euler_product(f, w, s),
        (q, _) => Err(eulerprod::Error::Internal(format!(
            "{q:?} takes no exponent"
        ))),
    }
}

#[derive(Serialize)]
struct VerifyRow {
    identity: String,
    n: u64,
    s_mode: String,
    s_value: String,
    lhs: String,
    rhs: String,
    mode: Mode,
    passed: bool,
    abs_discrepancy: String,
}

pub fn verify(a: &VerifyArgs, g: &Global) -> Result<Output, Failure> {
    check_tol(g.tol)?;
    let identity = match a.identity.as_str() {
        "custom:seeded" => Identity::Custom(LocalWeight::seeded_rational(g.seed)),
        name => Identity::lookup(name).map_err(|_| {
            Failure::Usage(format!(
                "unknown identity `{name}`; known: {}, custom:<weight>",
                Identity::NAMES.join(", ")
            ))
        })?,
    };
    let s = a.s.value();
    let opts = VerifyOptions {
        tol: g.tol,
        full_enumeration: a.full_enumeration,
        truncation: a.truncation,
    };
    let reports = match (a.n, a.n_range, a.sample) {
        (Some(n), _, _) => vec![eulerprod::verify(&identity, n, &s, &opts)?],
        (None, Some((lo, hi)), None) => verify_range(&identity, lo, hi, &s, &opts, threads(g))?,
        (None, Some((lo, hi)), Some(count)) => sampled(&identity, lo, hi, count, &s, &opts, g)?,
        (None, None, _) => return Err(Failure::Usage("verify needs --n or --n-range".into())),
    };

    let summary = Summary::of(&reports);
    let summary_line = format!("summary: {summary}");
    let records: Vec<_> = reports.iter().map(IdentityReport::record).collect();
    let mut out = Output::ok(String::new());
    match g.output {
        Format::Text => {
            let mut body = String::new();
            for r in &records {
                body.push_str(&format!(
                    "{} n={} s={} ({}) lhs={} rhs={} {} {} diff={:e}\n",
                    r.identity,
                    r.n,
                    r.s_value,
                    r.s_mode,
                    r.lhs,
                    r.rhs,
                    r.mode.as_str(),
                    if r.passed { "PASS" } else { "FAIL" },
                    r.abs_discrepancy
                ));
            }
            body.push_str(&summary_line);
            body.push('\n');
            out.body = body;
        }
        Format::Csv => {
            let rows: Vec<VerifyRow> = records
                .into_iter()
                .map(|r| VerifyRow {
                    identity: r.identity,
                    n: r.n,
                    s_mode: r.s_mode,
                    s_value: r.s_value,
                    lhs: r.lhs,
                    rhs: r.rhs,
                    mode: r.mode,
                    passed: r.passed,
                    abs_discrepancy: format!("{:e}", r.abs_discrepancy),
                })
                .collect();
            out.body = csv_rows(&rows)?;
            out.note = Some(summary_line);
        }
        Format::Json => {
            out.body = json_array(&records)?;
            out.note = Some(summary_line);
        }
    }
    out.failed = !summary.all_passed();
    Ok(out)
}

/// Verifies `count` distinct values of `n` drawn uniformly from `lo..=hi`,
/// reported in ascending order.
fn sampled(
    identity: &Identity,
    lo: u64,
    hi: u64,
    count: u64,
    s: &SParam,
    opts: &VerifyOptions,
    g: &Global,
) -> Result<Vec<IdentityReport>, Failure> {
    if lo == 0 || lo > hi {
        return Err(Failure::Usage(format!("invalid range {lo}:{hi}")));
    }
    let len = hi - lo + 1;
    if count == 0 || count > len {
        return Err(Failure::Usage(format!(
            "--sample must be in 1..={len}, got {count}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
    let len =
        usize::try_from(len).map_err(|_| Failure::Usage("range too large to sample".into()))?;
    let mut ns: Vec<u64> = rand::seq::index::sample(&mut rng, len, count as usize)
        .into_iter()
        .map(|i| lo + i as u64)
        .collect();
    ns.sort_unstable();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads(g))
        .build()
        .map_err(|e| Failure::Internal(e.to_string()))?;
    let reports: eulerprod::Result<Vec<_>> = pool.install(|| {
        ns.par_iter()
            .map(|&n| eulerprod::verify(identity, n, s, opts))
            .collect()
    });
    Ok(reports?)
}

#[derive(Serialize)]
struct ZetaRow {
    s: f64,
    prime_bound: u64,
    prime_count: usize,
    product: f64,
    reference: f64,
    abs_difference: f64,
    tail_factor: f64,
    reference_error_bound: f64,
}

pub fn zeta(a: &ZetaArgs, g: &Global) -> Result<Output, Failure> {
    check_tol(g.tol)?;
    let product = zeta::truncated_global_product(a.prime_bound, a.s)?;
    let num = zeta::zeta_reference(a.s, g.tol)?;
    let den = zeta::zeta_reference(2.0 * a.s, g.tol)?;
    let reference = num.value / den.value;
    let row = ZetaRow {
        s: a.s,
        prime_bound: product.prime_bound,
        prime_count: product.prime_count,
        product: product.value,
        reference,
        abs_difference: (product.value - reference).abs(),
        tail_factor: product.tail_factor,
        reference_error_bound: reference
            * (num.error_bound / num.value + den.error_bound / den.value),
    };
    let body = match g.output {
        Format::Text => format!(
            "s = {}\nprime bound = {} ({} primes)\ntruncated product = {}\n\
             reference zeta(s)/zeta(2s) = {}\nabs difference = {:e}\n\
             tail factor bound = {}\nreference error bound = {:e}\n",
            row.s,
            row.prime_bound,
            row.prime_count,
            row.product,
            row.reference,
            row.abs_difference,
            row.tail_factor,
            row.reference_error_bound
        ),
        Format::Csv => csv_rows(&[row])?,
        Format::Json => json_array(&[row])?,
    };
    Ok(Output::ok(body))
}

#[derive(Serialize)]
struct SieveReport {
    #[serde(flatten)]
    table: selberg::SieveWeightsRecord,
    #[serde(rename = "Q", skip_serializing_if = "Option::is_none")]
    q: Option<QValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    decay: Option<Vec<DecayRow>>,
}

#[derive(Serialize)]
struct QValue {
    #[serde(rename = "X")]
    x: u64,
    #[serde(rename = "R")]
    r: u64,
    value: String,
}

#[derive(Serialize)]
struct DecayRow {
    d: u64,
    s_values: Vec<String>,
    magnitudes: Vec<String>,
}

#[derive(Serialize)]
struct SieveCsvRow<'a> {
    n: u64,
    s_mode: &'a str,
    s_value: &'a str,
    #[serde(rename = "J_n")]
    j_n: &'a str,
    d: u64,
    mu: i8,
    #[serde(rename = "J_over_d")]
    j_over_d: &'a str,
    lambda: &'a str,
}

fn sieve_in<S: Scalar>(
    f: &Factorization,
    s: &SParam,
    q: Option<(u64, u64)>,
) -> eulerprod::Result<(selberg::SieveWeightsRecord, Option<QValue>)> {
    let w: SieveWeights<S> = selberg::weight_table(f, s)?;
    let q = match q {
        Some((x, r)) => Some(QValue {
            x,
            r,
            value: selberg::quadratic_form_q(x, r, &w)?.to_string(),
        }),
        None => None,
    };
    Ok((w.record(), q))
}

pub fn sieve(a: &SieveArgs, g: &Global) -> Result<Output, Failure> {
    check_tol(g.tol)?;
    let f = factorize(a.n, None)?;
    let s = a.s.value();
    let q = match a.q.as_deref() {
        Some(&[x, r]) if x > MAX_Q_TERMS => {
            return Err(Failure::Usage(format!(
                "X = {x} exceeds {MAX_Q_TERMS} (R = {r})"
            )))
        }
        Some(&[x, r]) => Some((x, r)),
        Some(_) => return Err(Failure::Usage("--Q takes X and R".into())),
        None => None,
    };
    let (record, q) = match s.mode() {
        Mode::Exact => sieve_in::<Exact>(&f, &s, q)?,
        Mode::Approx => sieve_in::<f64>(&f, &s, q)?,
    };
    let decay = match &a.decay {
        Some(s_values) => Some(decay_rows(&selberg::weight_decay_profile(&f, s_values)?)),
        None => None,
    };

    let mut extra = String::new();
    if let Some(q) = &q {
        extra.push_str(&format!("Q(X={}, R={}) = {}\n", q.x, q.r, q.value));
    }
    if let Some(rows) = &decay {
        extra.push_str(&decay_text(rows));
    }

    let mut out = Output::ok(String::new());
    match g.output {
        Format::Text => {
            let rows: Vec<Vec<String>> = record
                .weights
                .iter()
                .map(|w| {
                    vec![
                        w.d.to_string(),
                        w.mu.to_string(),
                        w.j_over_d.clone(),
                        w.lambda.clone(),
                    ]
                })
                .collect();
            out.body = format!(
                "n = {}, s = {} ({}), J_n = {}\n{}{extra}",
                record.n,
                record.s_value,
                record.s_mode,
                record.j_n,
                table(&["d", "mu", "J_over_d", "lambda"], &rows)
            );
        }
        Format::Csv => {
            let rows: Vec<SieveCsvRow> = record
                .weights
                .iter()
                .map(|w| SieveCsvRow {
                    n: record.n,
                    s_mode: &record.s_mode,
                    s_value: &record.s_value,
                    j_n: &record.j_n,
                    d: w.d,
                    mu: w.mu,
                    j_over_d: &w.j_over_d,
                    lambda: &w.lambda,
                })
                .collect();
            out.body = csv_rows(&rows)?;
            if !extra.is_empty() {
                out.note = Some(extra.trim_end().to_string());
            }
        }
        Format::Json => {
            out.body = json_array(&[SieveReport {
                table: record,
                q,
                decay,
            }])?
        }
    }
    Ok(out)
}

fn decay_rows(profile: &DecayProfile) -> Vec<DecayRow> {
    let s_values: Vec<String> = profile.s_values.iter().map(|s| s.to_string()).collect();
    profile
        .rows
        .iter()
        .map(|row| DecayRow {
            d: row.d,
            s_values: s_values.clone(),
            magnitudes: row.magnitudes.iter().map(|m| m.to_string()).collect(),
        })
        .collect()
}

fn decay_text(rows: &[DecayRow]) -> String {
    let Some(first) = rows.first() else {
        return String::new();
    };
    let mut header = vec!["d".to_string()];
    header.extend(first.s_values.iter().map(|s| format!("|lambda| s={s}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            std::iter::once(r.d.to_string())
                .chain(r.magnitudes.iter().cloned())
                .collect()
        })
        .collect();
    table(&header, &body)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn internal_errors_map_to_internal() {
        let e = Failure::from(eulerprod::Error::Internal("x".into()));
        assert!(matches!(e, Failure::Internal(_)));
        let e = Failure::from(eulerprod::Error::DivisionByZero("x"));
        assert!(matches!(e, Failure::Internal(_)));
        let e = Failure::from(eulerprod::Error::Domain("x".into()));
        assert!(matches!(e, Failure::Usage(_)));
    }

    #[test]
    fn quantity_names() {
        assert_eq!(value_name(Quantity::ZetaN), "zeta_n");
        assert_eq!(value_name(Quantity::J), "J");
        assert_eq!(value_name(Quantity::MobiusSum), "mobius_sum");
    }
}
