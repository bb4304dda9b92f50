//! Independent brute-force oracles used by the test suite to validate every
//! analytic shortcut.
//!
//! Nothing here calls into `localsolve` beyond sharing its data types: the
//! local search below is a digit-by-digit depth-first tree walk on exact
//! `Z[w]` values (the flat solver refines residue levels breadth-first on
//! small machine-word models), the counting routines enumerate residues
//! directly, and all arithmetic goes through the `eisenstein` ring layer.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::eisenstein::{EisensteinInt, Modulus};
use crate::intfactor;
use crate::localsolve::{Certificate, CurveSpec, Place};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("curve has bad reduction at {0}")]
    BadReduction(String),
    #[error("operation requires rational coefficients, got {0}")]
    NonRationalCurve(String),
    #[error("modulus must be at least 2")]
    ModulusTooSmall,
    #[error("{0} is not prime")]
    NotPrime(String),
    #[error("coefficients must be nonzero")]
    ZeroCoefficient,
}

/// Exhaustive count of nontrivial solutions of a congruence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueReport {
    pub modulus: String,
    pub nontrivial_solutions: u64,
    /// at most `MAX_REPRESENTATIVES` witnesses, in enumeration order
    pub representatives: Vec<[String; 3]>,
}

const MAX_REPRESENTATIVES: usize = 8;

/// Count triples `(x, y, z) mod n` satisfying `a x^3 + b y^3 = c z^3` that
/// are not simultaneously divisible by any prime of `n`.
pub fn count_solutions_mod(curve: &CurveSpec, n: u64) -> Result<ResidueReport, OracleError> {
    count_solutions_mod_impl(curve, n, cfg!(feature = "parallel"))
}

/// Always-sequential twin of [`count_solutions_mod`].
pub fn count_solutions_mod_seq(curve: &CurveSpec, n: u64) -> Result<ResidueReport, OracleError> {
    count_solutions_mod_impl(curve, n, false)
}

fn count_solutions_mod_impl(
    curve: &CurveSpec,
    n: u64,
    parallel: bool,
) -> Result<ResidueReport, OracleError> {
    if n < 2 {
        return Err(OracleError::ModulusTooSmall);
    }
    let (a, b, c) = curve
        .rational_ints()
        .ok_or_else(|| OracleError::NonRationalCurve(curve.to_string()))?;
    let bn = BigInt::from(n);
    let am = a.mod_floor(&bn).to_u64().unwrap();
    let bm = b.mod_floor(&bn).to_u64().unwrap();
    let cm = c.mod_floor(&bn).to_u64().unwrap();
    let primes: Vec<u64> = intfactor::factor_biguint(&n.into())
        .into_iter()
        .map(|(p, _)| p.to_u64().unwrap())
        .collect();
    let cubes: Vec<u64> = (0..n).map(|x| ((x as u128).pow(3) % n as u128) as u64).collect();
    let count_for_x = |x: u64| -> (u64, Vec<[String; 3]>) {
        let mut count = 0;
        let mut reps = Vec::new();
        for y in 0..n {
            let lhs = ((am as u128 * cubes[x as usize] as u128)
                + (bm as u128 * cubes[y as usize] as u128))
                % n as u128;
            for z in 0..n {
                let rhs = (cm as u128 * cubes[z as usize] as u128) % n as u128;
                if lhs == rhs && primes.iter().all(|p| x % p != 0 || y % p != 0 || z % p != 0) {
                    count += 1;
                    if reps.len() < MAX_REPRESENTATIVES {
                        reps.push([x.to_string(), y.to_string(), z.to_string()]);
                    }
                }
            }
        }
        (count, reps)
    };
    #[cfg(feature = "parallel")]
    let per_x: Vec<(u64, Vec<[String; 3]>)> = if parallel {
        (0..n).into_par_iter().map(count_for_x).collect()
    } else {
        (0..n).map(count_for_x).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let per_x: Vec<(u64, Vec<[String; 3]>)> = {
        let _ = parallel;
        (0..n).map(count_for_x).collect()
    };
    let mut total = 0;
    let mut representatives = Vec::new();
    for (count, reps) in per_x {
        total += count;
        for r in reps {
            if representatives.len() < MAX_REPRESENTATIVES {
                representatives.push(r);
            }
        }
    }
    Ok(ResidueReport { modulus: n.to_string(), nontrivial_solutions: total, representatives })
}

/// Eisenstein-modulus variant: count residue triples mod `m` (typically a
/// prime power) not simultaneously divisible by any prime of `m`.
pub fn count_solutions_mod_eisenstein(
    curve: &CurveSpec,
    m: &EisensteinInt,
) -> Result<ResidueReport, OracleError> {
    let md = Modulus::new(m).map_err(|_| OracleError::ModulusTooSmall)?;
    if md.size() < BigInt::from(2) {
        return Err(OracleError::ModulusTooSmall);
    }
    let prime_mods: Vec<Modulus> = crate::eisenstein::factor(m)
        .map_err(|_| OracleError::ModulusTooSmall)?
        .factors
        .into_iter()
        .map(|(q, _)| Modulus::new(&q).unwrap())
        .collect();
    let residues: Vec<EisensteinInt> = md.residues().collect();
    let syms = [curve.a.clone(), curve.b.clone(), -&curve.c];
    let mut total = 0u64;
    let mut representatives = Vec::new();
    for x in &residues {
        let tx = md.mul(&syms[0], &md.mul(&md.mul(x, x), x));
        for y in &residues {
            let ty = md.mul(&syms[1], &md.mul(&md.mul(y, y), y));
            let txy = md.reduce(&(&tx + &ty));
            for z in &residues {
                let tz = md.mul(&syms[2], &md.mul(&md.mul(z, z), z));
                if !md.reduce(&(&txy + &tz)).is_zero() {
                    continue;
                }
                let nontrivial = prime_mods
                    .iter()
                    .all(|pm| !(pm.divides(x) && pm.divides(y) && pm.divides(z)));
                if nontrivial {
                    total += 1;
                    if representatives.len() < MAX_REPRESENTATIVES {
                        representatives.push([x.to_string(), y.to_string(), z.to_string()]);
                    }
                }
            }
        }
    }
    Ok(ResidueReport { modulus: m.to_string(), nontrivial_solutions: total, representatives })
}

/// Number of projective points of the reduced curve over the residue field
/// of a good-reduction place. Checks the Hasse window
/// `|count - (f + 1)| <= 2 sqrt(f)` before returning.
pub fn finite_field_point_count(curve: &CurveSpec, place: &Place) -> Result<u64, OracleError> {
    let q = match place {
        Place::Rational(p) => {
            if p.is_negative() || !intfactor::is_prime(&p.to_biguint().unwrap_or_default()) {
                return Err(OracleError::NotPrime(p.to_string()));
            }
            EisensteinInt::from_int(p)
        }
        Place::Eisenstein(q) => {
            if !q.is_prime() {
                return Err(OracleError::NotPrime(q.to_string()));
            }
            q.clone()
        }
        Place::Lambda => return Err(OracleError::BadReduction("lambda".to_string())),
    };
    let syms = [curve.a.clone(), curve.b.clone(), -&curve.c];
    if let Place::Rational(_) = place {
        if !curve.is_rational() {
            return Err(OracleError::NonRationalCurve(curve.to_string()));
        }
    }
    // good reduction: the place is coprime to 3abc
    let qmod = Modulus::new(&q).unwrap();
    if (q.norm() % 3u32).is_zero() || syms.iter().any(|s| qmod.divides(s)) {
        return Err(OracleError::BadReduction(place.to_string()));
    }
    // over Q_p the residue field is F_p even when p splits in Z[w]
    let (f, field, size): (Modulus, Vec<EisensteinInt>, BigInt) = match place {
        Place::Rational(p) => {
            let pu = p.to_u64().expect("desk-scale prime");
            let f = Modulus::new(&EisensteinInt::from_int(p)).unwrap();
            let field = (0..pu).map(|i| EisensteinInt::from_int(&BigInt::from(i))).collect();
            (f, field, p.clone())
        }
        _ => {
            let rs: Vec<EisensteinInt> = qmod.residues().collect();
            let size = qmod.size();
            (qmod, rs, size)
        }
    };
    let cube = |x: &EisensteinInt| f.mul(&f.mul(x, x), x);
    let mut count = 0u64;
    // affine chart z = 1
    for x in &field {
        let tx = f.mul(&syms[0], &cube(x));
        for y in &field {
            let v = &tx + &(&f.mul(&syms[1], &cube(y)) + &syms[2]);
            if f.reduce(&v).is_zero() {
                count += 1;
            }
        }
    }
    // line z = 0, chart y = 1: a x^3 + b = 0
    for x in &field {
        let v = &f.mul(&syms[0], &cube(x)) + &syms[1];
        if f.reduce(&v).is_zero() {
            count += 1;
        }
    }
    // (1 : 0 : 0) lies on the curve only under bad reduction, already excluded
    let size = size.to_f64().unwrap();
    let diff = (count as f64 - (size + 1.0)).abs();
    assert!(
        diff <= 2.0 * size.sqrt() + 1e-9,
        "Hasse bound violated: {count} points over field of size {size}"
    );
    assert!(count >= 1, "smooth genus-1 curve over a finite field must have a point");
    Ok(count)
}

/// Outcome of the independent local search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BruteOutcome {
    Solvable { certificate: Certificate },
    Insolvable { exhausted_depth: u32 },
    /// Search depth below the certified bound and no certificate found.
    Unknown { searched_depth: u32, required_depth: u32 },
}

impl BruteOutcome {
    pub fn is_solvable(&self) -> Option<bool> {
        match self {
            BruteOutcome::Solvable { .. } => Some(true),
            BruteOutcome::Insolvable { .. } => Some(false),
            BruteOutcome::Unknown { .. } => None,
        }
    }
}

struct DfsContext {
    pi: EisensteinInt,
    pi_pow: Vec<EisensteinInt>,
    digits: Vec<EisensteinInt>,
    coeffs: [EisensteinInt; 3],
    depth: u32,
}

impl DfsContext {
    fn valuation_capped(&self, x: &EisensteinInt) -> u32 {
        if x.is_zero() {
            return self.depth + 1; // exact zero: beyond any finite depth
        }
        let mut x = x.clone();
        let mut v = 0;
        while v <= self.depth {
            match x.divrem(&self.pi) {
                Ok((q, r)) if r.is_zero() => {
                    x = q;
                    v += 1;
                }
                _ => break,
            }
        }
        v.min(self.depth + 1)
    }

    fn dfs(&self, coords: &[EisensteinInt; 3], free: [usize; 2], level: u32) -> Option<Certificate> {
        let three = EisensteinInt::from_int(&BigInt::from(3));
        let mut f = EisensteinInt::zero();
        let mut gmin = self.depth + 1;
        for i in 0..3 {
            f = &f + &(&self.coeffs[i] * &coords[i].pow(3));
            let grad = &(&self.coeffs[i] * &three) * &coords[i].pow(2);
            gmin = gmin.min(self.valuation_capped(&grad));
        }
        if f.is_zero() {
            return Some(Certificate::ExactPoint {
                x: coords[0].to_string(),
                y: coords[1].to_string(),
                z: coords[2].to_string(),
            });
        }
        let fv = self.valuation_capped(&f);
        if gmin <= self.depth && fv > 2 * gmin {
            return Some(Certificate::ResiduePoint {
                x: coords[0].to_string(),
                y: coords[1].to_string(),
                z: coords[2].to_string(),
                level,
                f_valuation: fv,
                min_gradient_valuation: gmin,
            });
        }
        if fv < level || level >= self.depth {
            return None;
        }
        let shift = &self.pi_pow[level as usize];
        for d0 in &self.digits {
            let mut c0 = coords.clone();
            c0[free[0]] = &c0[free[0]] + &(d0 * shift);
            for d1 in &self.digits {
                let mut c = c0.clone();
                c[free[1]] = &c[free[1]] + &(d1 * shift);
                if let Some(cert) = self.dfs(&c, free, level + 1) {
                    return Some(cert);
                }
            }
        }
        None
    }
}

/// Digit-by-digit depth-first local search with Hensel certification; the
/// independent cross-check for the flat solver. `Unknown` is returned when
/// `depth` is below the certified bound `2(v(3) + 2) + 1` and no certificate
/// was found; an early dead tree is a sound insolvability proof at any depth.
pub fn brute_local(
    curve: &CurveSpec,
    place: &Place,
    depth: u32,
) -> Result<BruteOutcome, OracleError> {
    if curve.a.is_zero() || curve.b.is_zero() || curve.c.is_zero() {
        return Err(OracleError::ZeroCoefficient);
    }
    let (pi, digits, v3) = match place {
        Place::Rational(p) => {
            if !curve.is_rational() {
                return Err(OracleError::NonRationalCurve(curve.to_string()));
            }
            let pu = p.to_u64().ok_or_else(|| OracleError::NotPrime(p.to_string()))?;
            if !intfactor::is_prime(&pu.into()) {
                return Err(OracleError::NotPrime(p.to_string()));
            }
            let digits: Vec<EisensteinInt> =
                (0..pu).map(|i| EisensteinInt::from_int(&BigInt::from(i))).collect();
            let v3 = if pu == 3 { 1 } else { 0 };
            (EisensteinInt::from_int(p), digits, v3)
        }
        Place::Eisenstein(q) => {
            if !q.is_prime() || (q.norm() % 3u32).is_zero() {
                return Err(OracleError::NotPrime(q.to_string()));
            }
            let md = Modulus::new(q).unwrap();
            (q.clone(), md.residues().collect(), 0)
        }
        Place::Lambda => {
            let digits = vec![
                EisensteinInt::zero(),
                EisensteinInt::one(),
                EisensteinInt::from_int(&BigInt::from(2)),
            ];
            (EisensteinInt::lambda(), digits, 2)
        }
    };
    let required = 2 * (v3 + 2) + 1;

    // strip cube powers of pi from each coefficient, then the common power
    let pi3 = pi.pow(3);
    let mut syms = [curve.a.clone(), curve.b.clone(), -&curve.c];
    let mut vals = [0u32; 3];
    for i in 0..3 {
        while syms[i].is_divisible_by(&pi3) {
            syms[i] = syms[i].exact_div(&pi3).unwrap();
        }
        let mut t = syms[i].clone();
        let mut v = 0;
        while t.is_divisible_by(&pi) {
            t = t.exact_div(&pi).unwrap();
            v += 1;
        }
        vals[i] = v;
    }
    let m = *vals.iter().min().unwrap();
    for s in syms.iter_mut() {
        for _ in 0..m {
            *s = s.exact_div(&pi).unwrap();
        }
    }

    let mut pi_pow = Vec::with_capacity(depth as usize + 1);
    let mut acc = EisensteinInt::one();
    for _ in 0..=depth {
        pi_pow.push(acc.clone());
        acc = &acc * &pi;
    }
    let ctx = DfsContext { pi, pi_pow, digits, coeffs: syms, depth };

    // branch 0: (1, *, *); branch 1: (pi*, 1, *); branch 2: (pi*, pi*, 1)
    let one = EisensteinInt::one();
    let zero = EisensteinInt::zero();
    let branches: [([EisensteinInt; 3], [usize; 2]); 3] = [
        ([one.clone(), zero.clone(), zero.clone()], [1, 2]),
        ([zero.clone(), one.clone(), zero.clone()], [0, 2]),
        ([zero.clone(), zero.clone(), one.clone()], [0, 1]),
    ];
    for (start, free) in branches {
        let fixed = 3 - free[0] - free[1];
        for d0 in &ctx.digits {
            // coordinates before the fixed unit coordinate are non-units
            if free[0] < fixed && !d0.is_zero() {
                continue;
            }
            for d1 in &ctx.digits {
                if free[1] < fixed && !d1.is_zero() {
                    continue;
                }
                let mut coords = start.clone();
                coords[free[0]] = d0.clone();
                coords[free[1]] = d1.clone();
                if let Some(cert) = ctx.dfs(&coords, free, 1) {
                    return Ok(BruteOutcome::Solvable { certificate: cert });
                }
            }
        }
    }
    if depth >= required {
        Ok(BruteOutcome::Insolvable { exhausted_depth: depth })
    } else {
        Ok(BruteOutcome::Unknown { searched_depth: depth, required_depth: required })
    }
}
