use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use eulerprod::{DinevaForm, SParam};

#[derive(Debug, Parser)]
#[command(
    name = "eulerprod",
    version,
    about = "Evaluate and verify squarefree Euler-product identities"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub global: Global,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub output: Format,

    /// Write the report to FILE instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,

    /// Relative tolerance for approximate comparisons.
    #[arg(long, global = true, default_value_t = eulerprod::verify::DEFAULT_TOL)]
    pub tol: f64,

    /// Worker threads for range verification (defaults to the CPU count).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub parallelism: Option<u16>,

    /// Seed for sampled sweeps and `seeded` weights.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one quantity at one n.
    Eval(EvalArgs),
    /// Check an identity at n or over a range of n.
    Verify(VerifyArgs),
    /// Compare a truncated Euler product with zeta(s)/zeta(2s).
    Zeta(ZetaArgs),
    /// Print sieve weights for a modulus, with optional Q and decay profile.
    Sieve(SieveArgs),
}

/// The exponent `s`. `--s-int` runs exactly, `--s-real` in floating point;
/// `--s` picks exact when the value parses as an integer.
#[derive(Debug, Args)]
#[group(multiple = false)]
pub struct SArgs {
    /// Exponent, exact if it is an integer literal.
    #[arg(long, allow_negative_numbers = true, value_parser = parse_s)]
    pub s: Option<SParam>,

    /// Integer exponent (exact arithmetic).
    #[arg(long = "s-int", allow_negative_numbers = true)]
    pub s_int: Option<i64>,

    /// Real exponent (floating-point arithmetic).
    #[arg(long = "s-real", allow_negative_numbers = true)]
    pub s_real: Option<f64>,
}

impl SArgs {
    /// `s = 0` when no flag is given.
    pub fn value(&self) -> SParam {
        match (self.s, self.s_int, self.s_real) {
            (Some(s), _, _) => s,
            (_, Some(k), _) => SParam::Int(k),
            (_, _, Some(x)) => SParam::Real(x),
            _ => SParam::Int(0),
        }
    }
}

fn parse_s(raw: &str) -> Result<SParam, String> {
    if let Ok(k) = raw.parse::<i64>() {
        return Ok(SParam::Int(k));
    }
    match raw.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(SParam::Real(x)),
        _ => Err(format!("`{raw}` is not a finite number")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Quantity {
    /// sum mu^2(d)/phi(d)
    Dineva,
    /// sum mu^2(d)/(phi(d) d^s), in the form chosen by --form
    Gdineva,
    /// prod_{p | n} 1/(1 - p^-s)
    ZetaN,
    /// sieve normalizer J_n(s)
    #[value(name = "J")]
    J,
    /// sieve weight lambda_d(s) for --d
    Lambda,
    Phi,
    Sigma,
    Mu,
    Radical,
    /// sum mu(d)/d^s
    MobiusSum,
    /// sum mu^2(d)/d^s
    SquarefreeSum,
    /// sum phi(d)
    TotientSum,
    /// prod_{p | n} (1 + g(p)) for the weight named by --weight
    Custom,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(value_enum)]
    pub quantity: Quantity,

    #[arg(long)]
    pub n: u64,

    #[command(flatten)]
    pub s: SArgs,

    /// Evaluation form for gdineva.
    #[arg(long, value_parser = parse_form, default_value = "divisor_sum")]
    pub form: DinevaForm,

    /// Divisor index for lambda.
    #[arg(long)]
    pub d: Option<u64>,

    /// Local weight for custom: phi_recip, recip, power, gdineva,
    /// seeded:<seed>, or seeded (uses --seed).
    #[arg(long, default_value = "seeded")]
    pub weight: String,
}

fn parse_form(raw: &str) -> Result<DinevaForm, String> {
    raw.parse().map_err(|e: eulerprod::Error| e.to_string())
}

#[derive(Debug, Args)]
#[group(id = "target", required = true, multiple = false, args = ["n", "n_range"])]
pub struct VerifyArgs {
    /// Registered identity name, or custom:<weight>.
    #[arg(long)]
    pub identity: String,

    #[arg(long)]
    pub n: Option<u64>,

    /// Inclusive range `a:b`.
    #[arg(long = "n-range", value_name = "A:B", value_parser = parse_range)]
    pub n_range: Option<(u64, u64)>,

    #[command(flatten)]
    pub s: SArgs,

    /// Walk every divisor instead of only the squarefree ones.
    #[arg(long)]
    pub full_enumeration: bool,

    /// Fixed truncation depth for series identities.
    #[arg(long = "K", value_name = "K")]
    pub truncation: Option<u32>,

    /// Check COUNT distinct n drawn from the range with --seed.
    #[arg(long, value_name = "COUNT", requires = "n_range")]
    pub sample: Option<u64>,
}

fn parse_range(raw: &str) -> Result<(u64, u64), String> {
    let (lo, hi) = raw.split_once(':').ok_or("expected A:B")?;
    let lo = lo
        .trim()
        .parse()
        .map_err(|_| format!("bad lower bound `{lo}`"))?;
    let hi = hi
        .trim()
        .parse()
        .map_err(|_| format!("bad upper bound `{hi}`"))?;
    Ok((lo, hi))
}

#[derive(Debug, Args)]
pub struct ZetaArgs {
    /// Real exponent, must exceed 1.
    #[arg(long, allow_negative_numbers = true)]
    pub s: f64,

    /// Multiply over primes up to this bound.
    #[arg(long, default_value_t = 10_000)]
    pub prime_bound: u64,
}

#[derive(Debug, Args)]
pub struct SieveArgs {
    #[arg(long)]
    pub n: u64,

    #[command(flatten)]
    pub s: SArgs,

    /// Evaluate the quadratic form with X terms and divisors up to R.
    #[arg(long = "Q", num_args = 2, value_names = ["X", "R"])]
    pub q: Option<Vec<u64>>,

    /// Tabulate |lambda_d| at each listed exponent.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, value_parser = parse_s)]
    pub decay: Option<Vec<SParam>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn s_literal_selects_mode() {
        assert_eq!(parse_s("2"), Ok(SParam::Int(2)));
        assert_eq!(parse_s("-1"), Ok(SParam::Int(-1)));
        assert_eq!(parse_s("2.5"), Ok(SParam::Real(2.5)));
        assert!(parse_s("nan").is_err());
        assert!(parse_s("x").is_err());
    }

    #[test]
    fn range_literal() {
        assert_eq!(parse_range("1:10"), Ok((1, 10)));
        assert_eq!(parse_range("0:10"), Ok((0, 10)));
        assert!(parse_range("10").is_err());
        assert!(parse_range("a:3").is_err());
    }

    #[test]
    fn command_line_is_well_formed() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
