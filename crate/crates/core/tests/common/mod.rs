//! Brute-force reference arithmetic, written without the library's helpers.
#![allow(dead_code)]

use std::collections::BTreeMap;

use pbrig_core::ExponentTuple;

/// Prime factorization by trial division.
pub fn factor(mut n: u64) -> BTreeMap<u64, u32> {
    let mut out = BTreeMap::new();
    let mut p = 2;
    while p * p <= n {
        while n % p == 0 {
            *out.entry(p).or_insert(0) += 1;
            n /= p;
        }
        p += 1;
    }
    if n > 1 {
        *out.entry(n).or_insert(0) += 1;
    }
    out
}

fn combine(values: &[u64], pick: fn(u32, u32) -> u32, empty: u128) -> u128 {
    if values.is_empty() {
        return empty;
    }
    let fs: Vec<_> = values.iter().map(|&v| factor(v)).collect();
    let primes: std::collections::BTreeSet<u64> =
        fs.iter().flat_map(|f| f.keys().copied()).collect();
    primes
        .into_iter()
        .map(|p| {
            let e = fs
                .iter()
                .map(|f| f.get(&p).copied().unwrap_or(0))
                .reduce(pick)
                .unwrap();
            (p as u128).pow(e)
        })
        .product()
}

/// lcm through prime exponents (max).
pub fn lcm(values: &[u64]) -> u128 {
    combine(values, u32::max, 1)
}

/// gcd through prime exponents (min); 0 for the empty list.
pub fn gcd(values: &[u64]) -> u128 {
    combine(values, u32::min, 0)
}

pub fn others(s: &[u64], i: usize) -> Vec<u64> {
    s.iter()
        .enumerate()
        .filter(|&(k, _)| k != i)
        .map(|(_, &v)| v)
        .collect()
}

pub fn j_set(s: &[u64]) -> Vec<usize> {
    (0..s.len())
        .filter(|&i| lcm(&others(s, i)) % s[i] as u128 != 0)
        .collect()
}

pub fn j_star(s: &[u64]) -> Vec<usize> {
    (0..s.len())
        .filter(|&i| s[i] as u128 % gcd(&others(s, i)) != 0)
        .collect()
}

pub fn g(s: &[u64], i: usize) -> u64 {
    gcd(&[s[i], lcm(&others(s, i)) as u64]) as u64
}

/// `s ≤ⁱ t` straight from the definition.
pub fn leq_at(s: &[u64], t: &[u64], i: usize) -> bool {
    (0..s.len()).all(|k| k == i || s[k] == t[k]) && t[i] % s[i] == 0 && s[i] % g(t, i) == 0
}

pub fn in_tn(s: &[u64]) -> bool {
    s.iter().all(|&a| a >= 2) && s.iter().filter(|&&a| a == 2).count() <= 1
}

/// Σ 1/a_i as a reduced fraction (num, den).
pub fn recip_sum(values: &[u64]) -> (u128, u128) {
    let den = lcm(values).max(1);
    let num: u128 = values.iter().map(|&a| den / a as u128).sum();
    let d = gcd_u128(num, den);
    if num == 0 {
        (0, 1)
    } else {
        (num / d, den / d)
    }
}

fn gcd_u128(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd_u128(b, a % b)
    }
}

/// Compares p/q with r/s.
pub fn frac_le(a: (u128, u128), b: (u128, u128)) -> bool {
    a.0 * b.1 <= b.0 * a.1
}

pub fn frac_lt(a: (u128, u128), b: (u128, u128)) -> bool {
    a.0 * b.1 < b.0 * a.1
}

pub fn t(v: &[u64]) -> ExponentTuple {
    ExponentTuple::new(v.to_vec()).unwrap()
}

/// Every tuple of length `n` with entries in `1..=max`.
pub fn all_tuples(n: usize, max: u64) -> Vec<Vec<u64>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p: Vec<u64>| {
                (1..=max).map(move |v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}
