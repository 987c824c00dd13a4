//! Exact integer and rational helpers shared by the tuple invariants.

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Arbitrary-precision natural number used for every lcm-derived quantity.
pub type Natural = BigUint;

/// Exact rational number, always kept in lowest terms.
pub type Rational = BigRational;

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// gcd of a sequence; the empty gcd is 0.
pub fn gcd_of<I: IntoIterator<Item = u64>>(values: I) -> u64 {
    values.into_iter().fold(0, gcd_u64)
}

/// lcm of a sequence when it fits in `u128`.
pub fn lcm_small<I: IntoIterator<Item = u64>>(values: I) -> Option<u128> {
    values.into_iter().try_fold(1u128, |acc, v| {
        let v = v as u128;
        (acc / acc.gcd(&v)).checked_mul(v)
    })
}

/// lcm of a sequence; the empty lcm is 1.
///
/// Accumulates in `u128` and only switches to a big integer on overflow.
pub fn lcm_of<I: IntoIterator<Item = u64>>(values: I) -> Natural {
    let mut iter = values.into_iter();
    let mut small: u128 = 1;
    for v in iter.by_ref() {
        let v = v as u128;
        let g = small.gcd(&v);
        match (small / g).checked_mul(v) {
            Some(next) => small = next,
            None => {
                let mut big = Natural::from(small).lcm(&Natural::from(v));
                for rest in iter {
                    big = big.lcm(&Natural::from(rest));
                }
                return big;
            }
        }
    }
    Natural::from(small)
}

/// gcd of a non-empty list of naturals.
pub fn gcd_naturals<'a, I: IntoIterator<Item = &'a Natural>>(values: I) -> Natural {
    values
        .into_iter()
        .fold(Natural::zero(), |acc, v| acc.gcd(v))
}

pub fn divides(d: u64, n: &Natural) -> bool {
    (n % d).is_zero()
}

/// `gcd(a, n)` for a machine-sized `a`; the result always fits back in `u64`.
pub fn gcd_with(a: u64, n: &Natural) -> u64 {
    let r = n % a;
    let r: u64 = r.try_into().expect("remainder below a u64 modulus");
    gcd_u64(a, r)
}

/// All positive divisors of `n`, ascending.
pub fn divisors(n: u64) -> Vec<u64> {
    assert!(n > 0, "divisors of zero");
    let mut low = Vec::new();
    let mut high = Vec::new();
    let mut d = 1u64;
    while d <= n / d {
        if n.is_multiple_of(d) {
            low.push(d);
            if d != n / d {
                high.push(n / d);
            }
        }
        d += 1;
    }
    low.extend(high.into_iter().rev());
    low
}

/// Smallest prime that does not divide `n`.
pub fn smallest_prime_not_dividing(n: &Natural) -> u64 {
    let mut p = 2u64;
    loop {
        if is_prime(p) && !divides(p, n) {
            return p;
        }
        p += 1;
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// `1 / a` as an exact rational.
pub fn reciprocal(a: u64) -> Rational {
    Rational::new(One::one(), a.into())
}

/// Renders a rational as `p/q`, or `p` when the denominator is 1.
pub fn render_rational(r: &Rational) -> String {
    r.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lcm_promotes_past_u128() {
        let primes = [
            1_000_003u64,
            1_000_033,
            1_000_037,
            1_000_039,
            1_000_081,
            1_000_099,
            1_000_117,
        ];
        let l = lcm_of(primes);
        let mut expected = Natural::one();
        for p in primes {
            expected *= Natural::from(p);
        }
        assert_eq!(l, expected);
        assert!(l > Natural::from(u128::MAX) || primes.len() < 7);
    }

    #[test]
    fn empty_conventions() {
        assert_eq!(lcm_of([]), Natural::one());
        assert_eq!(gcd_of([]), 0);
    }

    #[test]
    fn divisors_ascending() {
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(divisors(1), vec![1]);
        assert_eq!(divisors(49), vec![1, 7, 49]);
    }

    #[test]
    fn fresh_prime() {
        assert_eq!(smallest_prime_not_dividing(&Natural::from(12u32)), 5);
        assert_eq!(smallest_prime_not_dividing(&Natural::from(7u32)), 2);
    }

    #[test]
    fn rational_rendering() {
        let r = reciprocal(5) + reciprocal(6) + reciprocal(8);
        assert_eq!(render_rational(&r), "59/120");
        assert_eq!(render_rational(&(reciprocal(2) + reciprocal(2))), "1");
    }
}
