//! Small modular-arithmetic helpers shared across the crate.

use alloc::vec::Vec;

use num_bigint::BigUint;

pub fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Inverse of `a` modulo `n`, if it exists. Every residue is a unit mod 1.
pub fn mod_inverse(a: usize, n: usize) -> Option<usize> {
    if n == 1 {
        return Some(0);
    }
    let (mut old_r, mut r) = (a as i64 % n as i64, n as i64);
    let (mut old_s, mut s) = (1i64, 0i64);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(n as i64) as usize)
}

/// The unit group of Z_n in ascending order. Z_1^× is {0}.
pub fn units(n: usize) -> Vec<usize> {
    if n == 1 {
        return alloc::vec![0];
    }
    (1..n).filter(|&k| gcd(k, n) == 1).collect()
}

pub fn totient(n: usize) -> usize {
    units(n).len()
}

/// Divisors of `n` in ascending order.
pub fn divisors(n: usize) -> Vec<usize> {
    (1..=n).filter(|d| n % d == 0).collect()
}

pub fn binomial_big(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Binomial coefficient saturating at `u128::MAX`; only used for ordering heuristics.
pub fn binomial_saturating(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(x) => x / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}
