//! Factorization, sieving, divisor enumeration and the classical
//! multiplicative functions.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default bound for the bulk smallest-prime-factor table.
pub const DEFAULT_SPF_LIMIT: u64 = 10_000_000;

/// Largest table [`build_spf_table`] will allocate (4 bytes per entry).
pub const MAX_SPF_LIMIT: u64 = 1 << 28;

/// Canonical prime-power decomposition of a positive integer.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Factorization {
    n: u64,
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn one() -> Self {
        Factorization {
            n: 1,
            factors: Vec::new(),
        }
    }

    /// Builds a factorization from `(prime, exponent)` pairs, checking every
    /// invariant: strictly increasing primes, positive exponents, and a
    /// product that fits in `u64`.
    pub fn from_factors(factors: Vec<(u64, u32)>) -> Result<Self> {
        let mut n: u64 = 1;
        let mut last = 1;
        for &(p, e) in &factors {
            if p <= last {
                return Err(Error::Domain("primes must be strictly increasing".into()));
            }
            if e == 0 {
                return Err(Error::Domain(format!("zero exponent on {p}")));
            }
            if !is_prime(p) {
                return Err(Error::Domain(format!("{p} is not prime")));
            }
            n = p
                .checked_pow(e)
                .and_then(|pe| n.checked_mul(pe))
                .ok_or_else(|| Error::Capability("product exceeds 64 bits".into()))?;
            last = p;
        }
        Ok(Factorization { n, factors })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    /// Number of distinct prime factors.
    pub fn omega(&self) -> usize {
        self.factors.len()
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    pub fn divisor_count(&self) -> u64 {
        self.factors
            .iter()
            .map(|&(_, e)| u64::from(e) + 1)
            .product()
    }

    /// Factorization of the radical: every exponent set to one.
    pub fn radical(&self) -> Factorization {
        let factors: Vec<_> = self.factors.iter().map(|&(p, _)| (p, 1)).collect();
        let n = factors.iter().map(|&(p, _)| p).product();
        Factorization { n, factors }
    }

    /// Factorization of `self * other`.
    pub fn multiply(&self, other: &Factorization) -> Result<Factorization> {
        let n = self
            .n
            .checked_mul(other.n)
            .ok_or_else(|| Error::Capability("product exceeds 64 bits".into()))?;
        let mut factors = Vec::with_capacity(self.factors.len() + other.factors.len());
        let (mut i, mut j) = (0, 0);
        while i < self.factors.len() || j < other.factors.len() {
            match (self.factors.get(i), other.factors.get(j)) {
                (Some(&(p, a)), Some(&(q, b))) if p == q => {
                    factors.push((p, a + b));
                    i += 1;
                    j += 1;
                }
                (Some(&(p, a)), Some(&(q, _))) if p < q => {
                    factors.push((p, a));
                    i += 1;
                }
                (Some(&(p, a)), None) => {
                    factors.push((p, a));
                    i += 1;
                }
                (_, Some(&(q, b))) => {
                    factors.push((q, b));
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        Ok(Factorization { n, factors })
    }

    /// Sub-factorization made of the primes selected by `mask`
    /// (bit `i` selects the `i`-th prime), each to exponent one.
    pub fn squarefree_part(&self, mask: u32) -> Factorization {
        let factors: Vec<_> = self
            .factors
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &(p, _))| (p, 1))
            .collect();
        let n = factors.iter().map(|&(p, _)| p).product();
        Factorization { n, factors }
    }

    pub fn full_mask(&self) -> u32 {
        debug_assert!(self.factors.len() < 32);
        ((1u64 << self.factors.len()) - 1) as u32
    }

    /// Bit mask of the primes of `d` within this factorization, or `None`
    /// when `d` is not a squarefree divisor of `n`.
    pub fn squarefree_mask_of(&self, d: u64) -> Option<u32> {
        if d == 0 || !self.n.is_multiple_of(d) {
            return None;
        }
        let mut rest = d;
        let mut mask = 0u32;
        for (i, &(p, _)) in self.factors.iter().enumerate() {
            if rest.is_multiple_of(p) {
                rest /= p;
                if rest.is_multiple_of(p) {
                    return None;
                }
                mask |= 1 << i;
            }
        }
        (rest == 1).then_some(mask)
    }
}

impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("1");
        }
        for (i, &(p, e)) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str(" * ")?;
            }
            if e == 1 {
                write!(f, "{p}")?;
            } else {
                write!(f, "{p}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Smallest-prime-factor table for bulk factorization.
#[derive(Debug, Clone)]
pub struct SpfTable {
    limit: u64,
    spf: Vec<u32>,
    primes: Vec<u32>,
}

impl SpfTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Smallest prime factor of `m`, for `2 <= m <= limit`.
    pub fn spf(&self, m: u64) -> Option<u64> {
        if m < 2 || m > self.limit {
            return None;
        }
        Some(u64::from(self.spf[m as usize]))
    }

    pub fn is_prime(&self, m: u64) -> Option<bool> {
        self.spf(m).map(|p| p == m)
    }

    /// All primes up to `limit`, ascending.
    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    fn factorize(&self, mut m: u64) -> Factorization {
        let n = m;
        let mut factors: Vec<(u64, u32)> = Vec::new();
        while m > 1 {
            let p = u64::from(self.spf[m as usize]);
            m /= p;
            match factors.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => factors.push((p, 1)),
            }
        }
        Factorization { n, factors }
    }
}

/// Linear sieve computing the smallest prime factor of every `m <= limit`.
pub fn build_spf_table(limit: u64) -> Result<SpfTable> {
    if limit < 2 {
        return Err(Error::Domain(format!("sieve limit {limit} < 2")));
    }
    if limit > MAX_SPF_LIMIT {
        return Err(Error::Resource(format!(
            "sieve limit {limit} exceeds the {MAX_SPF_LIMIT} entry budget"
        )));
    }
    let len = limit as usize + 1;
    let mut spf = vec![0u32; len];
    let mut primes: Vec<u32> = Vec::new();
    for i in 2..len {
        if spf[i] == 0 {
            spf[i] = i as u32;
            primes.push(i as u32);
        }
        let si = spf[i];
        for &p in &primes {
            let m = i * p as usize;
            if p > si || m >= len {
                break;
            }
            spf[m] = p;
        }
    }
    Ok(SpfTable { limit, spf, primes })
}

/// Primes up to `limit` by an odd-only sieve of Eratosthenes.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    // index i stands for 2i + 1
    let half = (limit as usize - 1) / 2 + 1;
    let mut composite = vec![false; half];
    let mut i = 1;
    while (2 * i + 1) * (2 * i + 1) <= limit as usize {
        if !composite[i] {
            let p = 2 * i + 1;
            let mut j = p * p / 2;
            while j < half {
                composite[j] = true;
                j += p;
            }
        }
        i += 1;
    }
    let mut primes = vec![2];
    primes.extend(
        (1..half)
            .filter(|&i| !composite[i])
            .map(|i| 2 * i as u64 + 1),
    );
    primes
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin, exact for every `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        r += 1;
    }
    // Sinclair's base set covers all n < 2^64.
    'witness: for a in [2u64, 325, 9375, 28178, 450775, 9780504, 1795265022] {
        let a = a % n;
        if a == 0 {
            continue;
        }
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Brent's variant of Pollard's rho. `n` must be an odd composite.
fn find_factor(n: u64) -> u64 {
    for c in 1u64.. {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut g) = (2u64, 2u64, 1u64);
        let mut q = 1u64;
        let mut ys = 2u64;
        let mut r = 1u64;
        const BATCH: u64 = 128;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..BATCH.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd(q, n);
                k += BATCH;
            }
            r *= 2;
        }
        if g == n {
            // batch overshot; replay one step at a time
            loop {
                ys = f(ys);
                g = gcd(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
    }
    unreachable!()
}

fn split_into(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let d = find_factor(n);
    split_into(d, out);
    split_into(n / d, out);
}

/// Canonical factorization of `n`.
///
/// Uses `hint` when `n` is within its range; otherwise trial division by
/// small primes followed by Pollard rho with a Miller-Rabin primality test.
/// The result is always checked by multiplying it back out.
pub fn factorize(n: u64, hint: Option<&SpfTable>) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::Domain("cannot factorize 0".into()));
    }
    if let Some(table) = hint {
        if n <= table.limit {
            return Ok(if n == 1 {
                Factorization::one()
            } else {
                table.factorize(n)
            });
        }
    }
    let mut rest = n;
    let mut primes = Vec::new();
    while rest.is_multiple_of(2) {
        rest /= 2;
        primes.push(2);
    }
    let mut p = 3;
    while p <= 997 && p * p <= rest {
        while rest.is_multiple_of(p) {
            rest /= p;
            primes.push(p);
        }
        p += 2;
    }
    split_into(rest, &mut primes);
    primes.sort_unstable();

    let mut factors: Vec<(u64, u32)> = Vec::new();
    for q in primes {
        match factors.last_mut() {
            Some((r, e)) if *r == q => *e += 1,
            _ => factors.push((q, 1)),
        }
    }
    let product = factors.iter().try_fold(1u64, |acc, &(q, e)| {
        q.checked_pow(e).and_then(|x| acc.checked_mul(x))
    });
    if product != Some(n) {
        return Err(Error::Internal(format!(
            "factorization of {n} does not multiply back"
        )));
    }
    Ok(Factorization { n, factors })
}

/// Arbitrary-precision entry point; values that do not fit in 64 bits are
/// rejected with a capability error.
pub fn factorize_big(n: &BigUint, hint: Option<&SpfTable>) -> Result<Factorization> {
    let small = n
        .to_u64()
        .ok_or_else(|| Error::Capability(format!("{n} exceeds 64 bits")))?;
    factorize(small, hint)
}

/// Visits every divisor with its exponent vector, using a mixed-radix
/// counter over the exponents. Order is the counter order, not ascending.
pub fn for_each_divisor(f: &Factorization, mut visit: impl FnMut(u64, &[u32])) {
    let factors = f.factors();
    let mut exps = vec![0u32; factors.len()];
    let mut d = 1u64;
    loop {
        visit(d, &exps);
        let mut i = 0;
        loop {
            if i == factors.len() {
                return;
            }
            let (p, alpha) = factors[i];
            if exps[i] < alpha {
                exps[i] += 1;
                d *= p;
                break;
            }
            d /= p.pow(alpha);
            exps[i] = 0;
            i += 1;
        }
    }
}

/// All divisors of `n`, ascending.
pub fn divisors(f: &Factorization) -> Vec<u64> {
    let mut out = Vec::with_capacity(f.divisor_count() as usize);
    for_each_divisor(f, |d, _| out.push(d));
    out.sort_unstable();
    out
}

/// A squarefree divisor together with the values needed by the hot loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SquarefreeDivisor {
    pub d: u64,
    pub mu: i8,
    /// `phi(d) = prod (p - 1)`, read off the subset.
    pub phi: u64,
    /// Bit `i` set when the `i`-th prime of `n` divides `d`.
    pub mask: u32,
}

/// The `2^omega` squarefree divisors, indexed by their prime mask:
/// `terms[m].mask == m`.
pub fn squarefree_divisor_terms(f: &Factorization) -> Vec<SquarefreeDivisor> {
    let mut terms = Vec::with_capacity(1 << f.omega());
    terms.push(SquarefreeDivisor {
        d: 1,
        mu: 1,
        phi: 1,
        mask: 0,
    });
    for (i, p) in f.primes().enumerate() {
        let bit = 1u32 << i;
        for j in 0..terms.len() {
            let t = terms[j];
            terms.push(SquarefreeDivisor {
                d: t.d * p,
                mu: -t.mu,
                phi: t.phi * (p - 1),
                mask: t.mask | bit,
            });
        }
    }
    terms
}

/// Squarefree divisors of `n`, ascending.
pub fn squarefree_divisors(f: &Factorization) -> Vec<u64> {
    let mut out: Vec<u64> = squarefree_divisor_terms(f).iter().map(|t| t.d).collect();
    out.sort_unstable();
    out
}

pub fn mobius(f: &Factorization) -> i8 {
    if f.is_squarefree() {
        if f.omega().is_multiple_of(2) {
            1
        } else {
            -1
        }
    } else {
        0
    }
}

pub fn totient(f: &Factorization) -> u64 {
    f.factors()
        .iter()
        .map(|&(p, e)| p.pow(e - 1) * (p - 1))
        .product()
}

/// Sum of divisors. Can exceed 64 bits even when `n` does not.
pub fn sigma(f: &Factorization) -> BigUint {
    f.factors().iter().fold(BigUint::one(), |acc, &(p, e)| {
        let p = BigUint::from(p);
        let num = p.pow(e + 1) - 1u32;
        acc * (num / (p - 1u32))
    })
}

pub fn radical(f: &Factorization) -> u64 {
    f.primes().product()
}

/// `sigma(p^k) = (p^(k+1) - 1) / (p - 1)`.
pub fn sigma_prime_power(p: u64, k: u32) -> BigUint {
    let p = BigUint::from(p);
    (p.pow(k + 1) - 1u32) / (p - 1u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fac(n: u64) -> Factorization {
        factorize(n, None).unwrap()
    }

    fn trial_is_prime(n: u64) -> bool {
        n >= 2
            && (2..)
                .take_while(|d| d * d <= n)
                .all(|d| !n.is_multiple_of(d))
    }

    fn brute_phi(n: u64) -> u64 {
        (1..=n).filter(|&k| gcd(k, n) == 1).count() as u64
    }

    #[test]
    fn factorize_examples() {
        assert!(fac(1).factors().is_empty());
        assert_eq!(fac(12).factors(), &[(2, 2), (3, 1)]);
        let m31 = (1u64 << 31) - 1;
        assert!(trial_is_prime(m31));
        assert_eq!(fac(m31).factors(), &[(m31, 1)]);
        assert!(matches!(factorize(0, None), Err(Error::Domain(_))));
    }

    #[test]
    fn factorize_large_composites() {
        // products of two ~32-bit primes exercise the rho path
        let a = 4_294_967_291u64;
        let b = 2_147_483_629u64;
        assert_eq!(fac(a * b).factors(), &[(b, 1), (a, 1)]);
        assert_eq!(fac(1 << 62).factors(), &[(2, 62)]);
        let c = 1_000_000_007u64;
        assert_eq!(fac(c * c).factors(), &[(c, 2)]);
        assert!(fac(u64::MAX).factors().iter().all(|&(p, _)| is_prime(p)));
    }

    #[test]
    fn factorize_big_rejects_wide_values() {
        let wide = BigUint::from(u64::MAX) + 1u32;
        assert!(matches!(
            factorize_big(&wide, None),
            Err(Error::Capability(_))
        ));
        assert_eq!(
            factorize_big(&BigUint::from(360u32), None).unwrap(),
            fac(360)
        );
    }

    #[test]
    fn spf_examples() {
        let t = build_spf_table(10).unwrap();
        assert_eq!(t.spf(9), Some(3));
        assert_eq!(t.spf(7), Some(7));
        let t = build_spf_table(100).unwrap();
        let trial = (2..).find(|d| 91 % d == 0).unwrap();
        assert_eq!(t.spf(91), Some(trial));
        assert!(matches!(build_spf_table(1), Err(Error::Domain(_))));
        assert!(matches!(
            build_spf_table(MAX_SPF_LIMIT + 1),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn spf_invariants_and_hint() {
        let t = build_spf_table(5000).unwrap();
        for m in 2..=5000u64 {
            let p = t.spf(m).unwrap();
            assert!(trial_is_prime(p) && m % p == 0);
            assert_eq!(p == m, trial_is_prime(m));
            assert_eq!(factorize(m, Some(&t)).unwrap(), fac(m));
        }
        assert_eq!(t.primes().len(), primes_up_to(5000).len());
    }

    #[test]
    fn primes_up_to_matches_trial_division() {
        let expected: Vec<u64> = (0..=1000).filter(|&n| trial_is_prime(n)).collect();
        assert_eq!(primes_up_to(1000), expected);
        assert_eq!(primes_up_to(2), vec![2]);
        assert!(primes_up_to(1).is_empty());
    }

    #[test]
    fn divisor_examples() {
        assert_eq!(divisors(&fac(1)), vec![1]);
        assert_eq!(divisors(&fac(12)), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(divisors(&fac(81)), vec![1, 3, 9, 27, 81]);
        assert_eq!(squarefree_divisors(&fac(12)), vec![1, 2, 3, 6]);
        assert_eq!(squarefree_divisors(&fac(125)), vec![1, 5]);
        assert_eq!(squarefree_divisors(&fac(1)), vec![1]);
    }

    #[test]
    fn function_examples() {
        assert_eq!(mobius(&fac(1)), 1);
        assert_eq!(mobius(&fac(12)), 0);
        assert_eq!(mobius(&fac(30)), -1);
        assert_eq!(totient(&fac(1)), 1);
        assert_eq!(totient(&fac(49)), 49 - 7);
        assert_eq!(totient(&fac(12)), brute_phi(12));
        assert_eq!(sigma(&fac(1)), BigUint::one());
        assert_eq!(sigma(&fac(6)), BigUint::from(1u32 + 2 + 3 + 6));
        assert_eq!(sigma(&fac(27)), BigUint::from(1u32 + 3 + 9 + 27));
        assert_eq!(sigma_prime_power(2, 3), BigUint::from(15u32));
        assert_eq!(radical(&fac(12)), 6);
        assert_eq!(radical(&fac(1)), 1);
        assert_eq!(radical(&fac(360)), 30);
    }

    #[test]
    fn squarefree_terms_carry_mu_and_phi() {
        let f = fac(2 * 3 * 5 * 7 * 4);
        for t in squarefree_divisor_terms(&f) {
            let g = fac(t.d);
            assert_eq!(t.mu, mobius(&g));
            assert_eq!(t.phi, brute_phi(t.d));
            assert_eq!(f.squarefree_mask_of(t.d), Some(t.mask));
            assert_eq!(f.squarefree_part(t.mask).n(), t.d);
        }
        assert_eq!(f.squarefree_mask_of(4), None);
        assert_eq!(f.squarefree_mask_of(11), None);
    }

    #[test]
    fn totient_sum_over_divisors_is_n() {
        let t = build_spf_table(100_000).unwrap();
        for n in 1..=100_000u64 {
            let f = factorize(n, Some(&t)).unwrap();
            let mut total = 0u64;
            for_each_divisor(&f, |_, exps| {
                total += f
                    .factors()
                    .iter()
                    .zip(exps)
                    .filter(|(_, &e)| e > 0)
                    .map(|(&(p, _), &e)| p.pow(e - 1) * (p - 1))
                    .product::<u64>();
            });
            assert_eq!(total, n);
        }
    }

    #[test]
    fn multiplicativity_over_coprime_pairs() {
        let t = build_spf_table(10_000).unwrap();
        for a in (1..=10_000u64).step_by(97) {
            for b in (1..=10_000u64).step_by(89) {
                if gcd(a, b) != 1 {
                    continue;
                }
                let (fa, fb) = (
                    factorize(a, Some(&t)).unwrap(),
                    factorize(b, Some(&t)).unwrap(),
                );
                let fab = fa.multiply(&fb).unwrap();
                assert_eq!(fab, fac(a * b));
                assert_eq!(totient(&fab), totient(&fa) * totient(&fb));
                assert_eq!(sigma(&fab), sigma(&fa) * sigma(&fb));
                assert_eq!(mobius(&fab), mobius(&fa) * mobius(&fb));
            }
        }
    }

    proptest! {
        #[test]
        fn refactorizing_a_product_round_trips(n in 1u64..u64::MAX) {
            let f = fac(n);
            let rebuilt = Factorization::from_factors(f.factors().to_vec()).unwrap();
            prop_assert_eq!(rebuilt.n(), n);
            prop_assert_eq!(fac(rebuilt.n()), f);
        }

        #[test]
        fn divisor_lists_are_sorted_and_counted(n in 1u64..2_000_000) {
            let f = fac(n);
            let all = divisors(&f);
            prop_assert!(all.windows(2).all(|w| w[0] < w[1]));
            prop_assert_eq!(all.len() as u64, f.divisor_count());
            prop_assert!(all.iter().all(|d| n % d == 0));
            let sf = squarefree_divisors(&f);
            prop_assert_eq!(sf.len(), 1usize << f.omega());
            // mu^2(d) = 1 exactly when d is among its own squarefree divisors
            for d in all {
                let g = fac(d);
                let own = squarefree_divisors(&g).contains(&d);
                prop_assert_eq!(own, mobius(&g) != 0);
                prop_assert_eq!(own, g.is_squarefree());
            }
        }
    }
}
