//! Factorization of rational integers: trial division plus Brent's variant of
//! Pollard rho, with deterministic Miller-Rabin below 3.3e24.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Miller-Rabin witnesses that make the test deterministic for n < 3.3e24.
const MR_WITNESSES: [u32; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

pub fn is_prime(n: &BigUint) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    for p in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41] {
        let p = BigUint::from(p);
        if *n == p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    // n - 1 = d * 2^s with d odd
    let n_minus_1 = n - 1u32;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'witness: for a in MR_WITNESSES {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_rho(n: &BigUint) -> BigUint {
    // Brent's cycle detection; deterministic parameter sweep.
    let one = BigUint::one();
    let two = BigUint::from(2u32);
    if (n % &two).is_zero() {
        return two;
    }
    for c in 1u32..64 {
        let c = BigUint::from(c);
        let mut y = BigUint::from(2u32);
        let mut r = BigUint::one();
        let mut q = BigUint::one();
        let mut g = BigUint::one();
        let mut x = BigUint::zero();
        let mut ys = BigUint::zero();
        let m = 128u32;
        while g.is_one() {
            x = y.clone();
            let mut i = BigUint::zero();
            while i < r {
                y = (&y * &y + &c) % n;
                i += 1u32;
            }
            let mut k = BigUint::zero();
            while k < r && g.is_one() {
                ys = y.clone();
                let lim = (&r - &k).min(BigUint::from(m));
                let mut j = BigUint::zero();
                while j < lim {
                    y = (&y * &y + &c) % n;
                    let diff = if x > y { &x - &y } else { &y - &x };
                    q = (&q * &diff) % n;
                    j += 1u32;
                }
                g = q.gcd(n);
                k += m;
            }
            r *= 2u32;
        }
        if g == *n {
            // backtrack
            loop {
                ys = (&ys * &ys + &c) % n;
                let diff = if x > ys { &x - &ys } else { &ys - &x };
                g = diff.gcd(n);
                if g > one {
                    break;
                }
            }
        }
        if g != *n && g > one {
            return g;
        }
    }
    unreachable!("pollard rho failed on composite {n}")
}

fn factor_biguint_into(n: &BigUint, out: &mut Vec<(BigUint, u32)>) {
    if n.is_one() {
        return;
    }
    if is_prime(n) {
        out.push((n.clone(), 1));
        return;
    }
    let d = pollard_rho(n);
    let q = n / &d;
    factor_biguint_into(&d, out);
    factor_biguint_into(&q, out);
}

/// Factor a positive integer into sorted `(prime, exponent)` pairs.
pub fn factor_biguint(n: &BigUint) -> Vec<(BigUint, u32)> {
    let mut n = n.clone();
    assert!(!n.is_zero(), "cannot factor zero");
    let mut out: Vec<(BigUint, u32)> = Vec::new();
    // trial division first keeps rho inputs honest
    let mut p = 2u64;
    while p < 10_000 && BigUint::from(p) * BigUint::from(p) <= n {
        let bp = BigUint::from(p);
        if (&n % &bp).is_zero() {
            let mut e = 0u32;
            while (&n % &bp).is_zero() {
                n /= &bp;
                e += 1;
            }
            out.push((bp, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if !n.is_one() {
        let mut rest = Vec::new();
        factor_biguint_into(&n, &mut rest);
        rest.sort();
        let mut i = 0;
        while i < rest.len() {
            let mut e = rest[i].1;
            let mut j = i + 1;
            while j < rest.len() && rest[j].0 == rest[i].0 {
                e += rest[j].1;
                j += 1;
            }
            out.push((rest[i].0.clone(), e));
            i = j;
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

/// Factor a nonzero signed integer; the sign is returned separately.
pub fn factor_bigint(n: &BigInt) -> (i8, Vec<(BigInt, u32)>) {
    let sign = if n.is_negative() { -1 } else { 1 };
    let mag = n.magnitude();
    let fs = factor_biguint(mag)
        .into_iter()
        .map(|(p, e)| (BigInt::from(p), e))
        .collect();
    (sign, fs)
}

/// True when every prime exponent of `n` is at most 2.
pub fn is_cube_free(n: &BigInt) -> bool {
    !n.is_zero() && factor_bigint(n).1.iter().all(|(_, e)| *e <= 2)
}

/// p-adic valuation of a nonzero integer.
pub fn valuation(n: &BigInt, p: &BigInt) -> u32 {
    assert!(!n.is_zero());
    let mut n = n.clone();
    let mut v = 0;
    while (&n % p).is_zero() {
        n /= p;
        v += 1;
    }
    v
}

/// Strip all factors of `p` from `n`, returning `(v, n / p^v)`.
pub fn strip(n: &BigInt, p: &BigInt) -> (u32, BigInt) {
    let mut n = n.clone();
    let mut v = 0;
    while (&n % p).is_zero() {
        n /= p;
        v += 1;
    }
    (v, n)
}

pub fn is_prime_i64(n: i64) -> bool {
    n > 1 && is_prime(&BigUint::from(n as u64))
}

/// Smallest `u` with `u^((p-1)/3) != 1 (mod p)`, i.e. a cubic non-residue.
/// Only meaningful for primes `p = 1 (mod 3)`.
pub fn least_cubic_nonresidue(p: &BigInt) -> BigInt {
    let pu = p.to_biguint().expect("positive prime");
    let e = (&pu - 1u32) / 3u32;
    let mut a = BigUint::from(2u32);
    loop {
        if !a.modpow(&e, &pu).is_one() {
            return BigInt::from(a);
        }
        a += 1u32;
        assert!(a.to_u64().unwrap_or(u64::MAX) < 1_000_000, "no non-residue found");
    }
}
