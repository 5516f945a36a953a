//! Brute-force oracles. Nothing here calls into the library: divisors come
//! from trial division, phi from gcd counting, mu from trial factoring.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;

pub fn rat(num: i64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn trial_divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

pub fn trial_factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn trial_mu(n: u64) -> i64 {
    let f = trial_factor(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

pub fn trial_radical(n: u64) -> u64 {
    trial_factor(n).iter().map(|&(p, _)| p).product()
}

/// `phi(k)` for `k <= limit` by counting `gcd(j, k) = 1`.
pub fn gcd_phi_table(limit: u64) -> Vec<u64> {
    (0..=limit)
        .map(|k| (1..=k).filter(|&j| j.gcd(&k) == 1).count() as u64)
        .collect()
}

/// `sigma(k)` for `k <= limit` by summing trial divisors.
pub fn trial_sigma_table(limit: u64) -> Vec<u64> {
    (0..=limit)
        .map(|k| {
            if k == 0 {
                0
            } else {
                trial_divisors(k).iter().sum()
            }
        })
        .collect()
}

/// `d^(-s)` as an exact rational, computed by repeated multiplication.
pub fn inv_pow(d: u64, s: i64) -> BigRational {
    let mut power = BigInt::from(1);
    for _ in 0..s.unsigned_abs() {
        power *= d;
    }
    if s >= 0 {
        BigRational::new(BigInt::from(1), power)
    } else {
        BigRational::from_integer(power)
    }
}
