//! Cubic residue symbols and cube tests in residue fields and local fields.
//!
//! The symbol `(alpha/q)_3` is defined for primes `q` of `Z[w]` coprime to 3
//! by `alpha^((N(q)-1)/3) = w^e (mod q)`; it is trivial exactly on cubes in
//! the residue field. No symbol is defined at the ramified prime — questions
//! above 3 are routed through the local solvers instead.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eisenstein::{EisensteinInt, Modulus};
use crate::intfactor;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ResidueError {
    #[error("the cubic residue symbol is not defined at the ramified prime")]
    RamifiedModulus,
    #[error("symbol arguments must be coprime: {alpha} shares a factor with {q}")]
    NotCoprime { alpha: String, q: String },
    #[error("argument must be nonzero")]
    ZeroArgument,
    #[error("{0} is not prime")]
    NotPrime(String),
}

/// Value `w^exponent` of a cubic residue symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubicSymbol {
    pub exponent: u8,
}

impl CubicSymbol {
    pub fn trivial() -> Self {
        CubicSymbol { exponent: 0 }
    }

    pub fn new(e: i64) -> Self {
        CubicSymbol { exponent: e.rem_euclid(3) as u8 }
    }

    pub fn is_trivial(self) -> bool {
        self.exponent == 0
    }

    pub fn mul(self, other: CubicSymbol) -> CubicSymbol {
        CubicSymbol::new(self.exponent as i64 + other.exponent as i64)
    }

    pub fn inverse(self) -> CubicSymbol {
        CubicSymbol::new(-(self.exponent as i64))
    }
}

impl std::fmt::Display for CubicSymbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.exponent {
            0 => f.write_str("1"),
            1 => f.write_str("w"),
            _ => f.write_str("w^2"),
        }
    }
}

/// The cubic residue symbol `(alpha/q)_3` for a prime `q` coprime to 3,
/// computed by modular exponentiation in `Z[w]/(q)`.
pub fn cubic_symbol(alpha: &EisensteinInt, q: &EisensteinInt) -> Result<CubicSymbol, ResidueError> {
    if alpha.is_zero() {
        return Err(ResidueError::ZeroArgument);
    }
    let nq = q.norm();
    if (&nq % 3u32).is_zero() {
        return Err(ResidueError::RamifiedModulus);
    }
    if nq <= BigInt::one() || !q.is_prime() {
        return Err(ResidueError::NotPrime(q.to_string()));
    }
    let md = Modulus::new(q).expect("prime modulus is nonzero");
    if md.divides(alpha) {
        return Err(ResidueError::NotCoprime { alpha: alpha.to_string(), q: q.to_string() });
    }
    let e = ((&nq - BigInt::one()) / BigInt::from(3))
        .to_biguint()
        .expect("norm > 1");
    let r = md.pow(alpha, &e);
    for exp in 0u8..3 {
        let target = match exp {
            0 => EisensteinInt::one(),
            1 => EisensteinInt::omega(),
            _ => EisensteinInt::omega_sq(),
        };
        if r == md.reduce(&target) {
            return Ok(CubicSymbol { exponent: exp });
        }
    }
    Err(ResidueError::NotCoprime { alpha: alpha.to_string(), q: q.to_string() })
}

/// Whether `u != 0` is a cube in `Q_p^*`.
///
/// `u` is a cube iff `v_p(u) = 0 (mod 3)` and its unit part is: for
/// `p = 2 (mod 3)` every unit is a cube; for `p = 1 (mod 3)` the unit `u0`
/// is a cube iff `u0^((p-1)/3) = 1 (mod p)`; for `p = 3` iff `u0 = +-1 (mod 9)`.
pub fn is_cube_in_qp(u: &BigRational, p: &BigInt) -> Result<bool, ResidueError> {
    if u.is_zero() {
        return Err(ResidueError::ZeroArgument);
    }
    // a/b is a cube iff a*b^2 is: clear the denominator
    let n = u.numer() * u.denom() * u.denom();
    let (v, unit) = intfactor::strip(&n, p);
    if v % 3 != 0 {
        return Ok(false);
    }
    if (p % 3u32) == BigInt::from(2) {
        Ok(true)
    } else if (p % 3u32).is_one() {
        Ok(is_cube_unit_mod_p(&unit, p))
    } else {
        let r = unit.mod_floor(&BigInt::from(9));
        Ok(r.is_one() || r == BigInt::from(8))
    }
}

/// Canonical representative `3^k * 2^i` of the class of `u` in
/// `Q_3^*/(Q_3^*)^3`. The unit classes are read off mod 9:
/// `{1,8} -> 2^0`, `{2,7} -> 2^1`, `{4,5} -> 2^2`.
pub fn cube_class_q3(u: &BigRational) -> Result<(u8, u8), ResidueError> {
    if u.is_zero() {
        return Err(ResidueError::ZeroArgument);
    }
    let three = BigInt::from(3);
    let n = u.numer() * u.denom() * u.denom();
    let (v, unit) = intfactor::strip(&n, &three);
    Ok(((v % 3) as u8, unit_class_mod9(&unit)))
}

/// The `2^i` class of a 3-adic unit, read off mod 9.
pub fn unit_class_mod9(unit: &BigInt) -> u8 {
    let r = unit.mod_floor(&BigInt::from(9));
    let digits = r.to_u32_digits().1;
    match digits.first().copied().unwrap_or(0) {
        1 | 8 => 0,
        2 | 7 => 1,
        4 | 5 => 2,
        other => panic!("not a 3-adic unit mod 9: {other}"),
    }
}

/// Cube test of an integer unit in the residue field `F_p` (prime `p != 3`).
pub fn is_cube_unit_mod_p(u: &BigInt, p: &BigInt) -> bool {
    if (p % 3u32) == BigInt::from(2) {
        return true;
    }
    let pu = p.to_biguint().unwrap();
    let e = (&pu - 1u32) / 3u32;
    let base = u.mod_floor(p).to_biguint().unwrap();
    assert!(!base.is_zero(), "unit expected");
    base.modpow(&e, &pu).is_one()
}

/// Exponent of a unit in `F_p^* / (F_p^*)^3` relative to the least cubic
/// non-residue, for split `p = 1 (mod 3)`; always 0 for inert `p`.
pub fn unit_class_mod_p(u: &BigInt, p: &BigInt) -> u8 {
    if (p % 3u32) == BigInt::from(2) {
        return 0;
    }
    let g = intfactor::least_cubic_nonresidue(p);
    for i in 0u8..3 {
        // u = g^i mod cubes  <=>  u * g^(2i) is a cube
        let cand = (u * g.modpow(&BigInt::from(2 * i as u32), p)).mod_floor(p);
        if is_cube_unit_mod_p(&cand, p) {
            return i;
        }
    }
    unreachable!("classes 0..2 are exhaustive")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eisenstein::{ei, factor};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rat(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn rng() -> ChaCha8Rng {
        let seed = std::env::var("CUBIC_DESCENT_SEED")
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or(0x5E1_F00D);
        ChaCha8Rng::seed_from_u64(seed)
    }

    /// The primary prime of norm 7 that reduces w to 2.
    fn q7_omega_to_2() -> EisensteinInt {
        let f = factor(&ei(7, 0)).unwrap();
        for (q, _) in f.factors {
            let md = Modulus::new(&q).unwrap();
            if md.reduce(&EisensteinInt::omega()) == md.reduce(&ei(2, 0)) {
                return q;
            }
        }
        panic!("no norm-7 prime sends w to 2");
    }

    #[test]
    fn symbol_of_omega_at_2() {
        // (2^2 - 1)/3 = 1
        let s = cubic_symbol(&EisensteinInt::omega(), &ei(2, 0)).unwrap();
        assert_eq!(s.exponent, 1);
    }

    #[test]
    fn symbol_of_one_is_trivial() {
        for q in [ei(2, 0), ei(5, 0), ei(2, 3), ei(-1, -3)] {
            assert!(cubic_symbol(&EisensteinInt::one(), &q).unwrap().is_trivial());
        }
    }

    #[test]
    fn symbol_of_2_at_norm7_prime() {
        let q7 = q7_omega_to_2();
        assert_eq!(q7, ei(-1, -3));
        // cubes mod 7 are {1, 6}; 2^((7-1)/3) = 4, the image of w^2
        let cubes: std::collections::BTreeSet<u64> = (1u64..7).map(|x| x * x * x % 7).collect();
        assert_eq!(cubes, [1u64, 6].into_iter().collect());
        let s = cubic_symbol(&ei(2, 0), &q7).unwrap();
        assert_eq!(s.exponent, 2);
    }

    #[test]
    fn symbol_errors() {
        assert_eq!(
            cubic_symbol(&EisensteinInt::omega(), &EisensteinInt::lambda()),
            Err(ResidueError::RamifiedModulus)
        );
        assert!(matches!(
            cubic_symbol(&ei(4, 0), &ei(2, 0)),
            Err(ResidueError::NotCoprime { .. })
        ));
        assert!(matches!(
            cubic_symbol(&ei(3, 0), &ei(4, 0)),
            Err(ResidueError::NotPrime(_))
        ));
    }

    fn random_coprime(rng: &mut ChaCha8Rng, q: &EisensteinInt) -> EisensteinInt {
        let md = Modulus::new(q).unwrap();
        loop {
            let x = ei(rng.gen_range(-50..=50), rng.gen_range(-50..=50));
            if !x.is_zero() && !md.divides(&x) {
                return x;
            }
        }
    }

    #[test]
    fn symbol_multiplicative() {
        let mut rng = rng();
        let primes = [ei(2, 0), ei(5, 0), ei(2, 3), ei(-1, -3), ei(11, 0), ei(5, 3)];
        for _ in 0..300 {
            let q = primes[rng.gen_range(0..primes.len())].clone();
            let a = random_coprime(&mut rng, &q);
            let b = random_coprime(&mut rng, &q);
            let sab = cubic_symbol(&(&a * &b), &q).unwrap();
            let sa = cubic_symbol(&a, &q).unwrap();
            let sb = cubic_symbol(&b, &q).unwrap();
            assert_eq!(sab, sa.mul(sb));
        }
    }

    #[test]
    fn symbol_of_cubes_trivial() {
        let mut rng = rng();
        let primes = [ei(2, 0), ei(5, 0), ei(2, 3), ei(11, 0)];
        for _ in 0..200 {
            let q = primes[rng.gen_range(0..primes.len())].clone();
            let a = random_coprime(&mut rng, &q);
            assert!(cubic_symbol(&a.pow(3), &q).unwrap().is_trivial());
        }
    }

    #[test]
    fn symbol_detects_cubes_in_residue_field() {
        // exhaustive for primes of norm <= 200
        let mut primes: Vec<EisensteinInt> = vec![ei(2, 0), ei(5, 0), ei(11, 0)];
        for p in [7i64, 13, 19, 31, 37, 43, 61, 67, 73, 79, 97, 103, 109, 127, 139, 151, 157, 163, 181, 193, 199] {
            let f = factor(&ei(p, 0)).unwrap();
            primes.extend(f.factors.into_iter().map(|(q, _)| q));
        }
        for q in primes {
            let md = Modulus::new(&q).unwrap();
            let mut cubes = std::collections::BTreeSet::new();
            for r in md.residues() {
                if !md.divides(&r) {
                    let c = md.mul(&md.mul(&r, &r), &r);
                    cubes.insert((c.a.clone(), c.b.clone()));
                }
            }
            for r in md.residues() {
                if md.divides(&r) {
                    continue;
                }
                let s = cubic_symbol(&r, &q).unwrap();
                let is_cube = cubes.contains(&(r.a.clone(), r.b.clone()));
                assert_eq!(s.is_trivial(), is_cube, "q = {q}, r = {r}");
            }
        }
    }

    #[test]
    fn rational_units_are_cubes_at_inert_primes() {
        let mut rng = rng();
        for p in [2i64, 5, 11, 17, 23, 29] {
            let q = ei(p, 0);
            for _ in 0..30 {
                let u = rng.gen_range(1i64..500);
                if u % p == 0 {
                    continue;
                }
                let s = cubic_symbol(&ei(u, 0), &q).unwrap();
                assert!(s.is_trivial(), "({u}/{p})_3 should be 1");
            }
        }
    }

    #[test]
    fn qp_cube_examples() {
        assert!(is_cube_in_qp(&rat(10), &BigInt::from(3)).unwrap()); // 10 = 1 mod 9
        assert!(is_cube_in_qp(&rat(7), &BigInt::from(5)).unwrap()); // 5 = 2 mod 3
        assert!(!is_cube_in_qp(&rat(2), &BigInt::from(7)).unwrap()); // 2 non-cube mod 7
        assert_eq!(
            is_cube_in_qp(&rat(0), &BigInt::from(5)),
            Err(ResidueError::ZeroArgument)
        );
    }

    #[test]
    fn qp_cube_matches_exhaustive() {
        // u is a cube in Q_p iff x^3 = unit(u) (mod p^5) is solvable and
        // v_p(u) = 0 (mod 3); exhaustive for u, p <= 50. One sweep of all
        // x mod p^5 per prime collects the unit cubes hit by any target.
        use std::collections::BTreeSet;
        for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
            let bp = BigInt::from(p);
            let m = p.pow(5);
            let units: Vec<(i64, u64)> = (1i64..=50)
                .filter_map(|u| {
                    let (v, unit) = intfactor::strip(&BigInt::from(u), &bp);
                    if v % 3 != 0 {
                        return None;
                    }
                    let u0: u64 = unit.to_string().parse().unwrap();
                    Some((u, u0 % m))
                })
                .collect();
            let targets: BTreeSet<u64> = units.iter().map(|(_, u0)| *u0).collect();
            let mut hit: BTreeSet<u64> = BTreeSet::new();
            for x in 1..m {
                if x % p == 0 {
                    continue;
                }
                let c = (x * x) % m * x % m;
                if targets.contains(&c) {
                    hit.insert(c);
                }
            }
            for u in 1i64..=50 {
                let claimed = is_cube_in_qp(&rat(u), &bp).unwrap();
                let brute = units
                    .iter()
                    .find(|(v, _)| *v == u)
                    .map(|(_, u0)| hit.contains(u0))
                    .unwrap_or(false);
                assert_eq!(claimed, brute, "u = {u}, p = {p}");
            }
        }
    }

    #[test]
    fn q3_class_examples() {
        assert_eq!(cube_class_q3(&rat(5)).unwrap(), (0, 2));
        assert_eq!(cube_class_q3(&rat(1)).unwrap(), (0, 0));
        assert_eq!(cube_class_q3(&rat(12)).unwrap(), (1, 2));
        // u is a cube iff its class is (0, 0)
        for u in 1i64..100 {
            if u % 3 == 0 {
                continue;
            }
            let cls = cube_class_q3(&rat(u)).unwrap();
            let cube = is_cube_in_qp(&rat(u), &BigInt::from(3)).unwrap();
            assert_eq!(cls == (0, 0), cube, "u = {u}");
        }
    }

    #[test]
    fn q3_class_of_ratio() {
        // 22/550 = 1/25; 25 sits in the 2^1 coset so the ratio is in 2^2
        let r = BigRational::new(BigInt::from(22), BigInt::from(550));
        assert_eq!(cube_class_q3(&r).unwrap(), (0, 2));
    }

    #[test]
    fn unit_class_mod_p_consistent() {
        let p = BigInt::from(7);
        for u in 1i64..7 {
            let c = unit_class_mod_p(&BigInt::from(u), &p);
            assert_eq!(c == 0, is_cube_unit_mod_p(&BigInt::from(u), &p));
        }
    }
}
