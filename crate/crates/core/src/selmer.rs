//! The cube-descent Selmer group `S(A)` of `E_A : x^3 + y^3 = A z^3` over
//! `k = Q(w)`.
//!
//! `S(A)` sits inside `k^*/(k^*)^3`; a class `alpha` belongs to it iff the
//! torsor `alpha x^3 + alpha^-1 y^3 = A z^3` has points in every completion
//! of `k`. Valuation constraints force representatives of the shape
//! `w^m * prod q_i^{m_i}` over the primes of `A`, and quotienting by the
//! always-present class of `A` (its torsor has the point `(1, 0, 1)`) leaves
//! `3^r` candidates to test at the primes dividing `3A`; good reduction
//! covers every other place.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::eisenstein::{self, EisensteinInt, EisensteinError, Unit};
use crate::intfactor;
use crate::localsolve::{
    solvable_kq_torsor, solvable_lambda, CurveSpec, LocalError, LocalVerdict,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SelmerError {
    #[error("{0} is not cube-free")]
    NotCubeFree(String),
    #[error("A must be an integer other than 0 and +-1, got {0}")]
    UnitOrZero(String),
    #[error("parity violation: s = {s} but s0 = {s0}; this indicates a solver bug")]
    ParityViolation { s: i64, s0: i64 },
    #[error("survivor set is not a coset transversal of a subgroup; solver bug")]
    GroupClosureViolation,
    #[error("point {0} does not lie on the curve")]
    NotOnCurve(String),
    #[error(transparent)]
    Local(#[from] LocalError),
    #[error(transparent)]
    Eisenstein(#[from] EisensteinError),
}

/// An element of `k^*/(k^*)^3`: a unit exponent (power of `w`) together with
/// a square-free-style support of primary primes with exponents in `{1, 2}`.
/// Signs are absorbed (`-1` is a cube).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CubeClass {
    pub unit_exp: u8,
    pub support: Vec<(EisensteinInt, u8)>,
}

impl CubeClass {
    pub fn identity() -> Self {
        CubeClass { unit_exp: 0, support: Vec::new() }
    }

    pub fn is_identity(&self) -> bool {
        self.unit_exp == 0 && self.support.is_empty()
    }

    /// The class of a nonzero element, via cube-free decomposition.
    pub fn of(x: &EisensteinInt) -> Result<Self, EisensteinError> {
        let (cubefree, _) = eisenstein::cube_free_decompose(x)?;
        let f = eisenstein::factor(&cubefree)?;
        debug_assert!(!f.unit.neg);
        let support = f
            .factors
            .into_iter()
            .map(|(q, e)| (q, (e % 3) as u8))
            .filter(|(_, e)| *e != 0)
            .collect();
        Ok(CubeClass { unit_exp: f.unit.omega_exp, support })
    }

    pub fn of_int(n: i64) -> Self {
        CubeClass::of(&EisensteinInt::from_int(&BigInt::from(n))).expect("nonzero")
    }

    /// Canonical integral representative `w^m * prod q^e`.
    pub fn representative(&self) -> EisensteinInt {
        let mut x = Unit::new(false, self.unit_exp).to_eisenstein();
        for (q, e) in &self.support {
            x = &x * &q.pow(*e as u32);
        }
        x
    }

    pub fn mul(&self, other: &CubeClass) -> CubeClass {
        let mut exps: std::collections::BTreeMap<(BigInt, BigInt, BigInt), (EisensteinInt, u8)> =
            std::collections::BTreeMap::new();
        for (q, e) in self.support.iter().chain(other.support.iter()) {
            let key = (q.norm(), q.a.clone(), q.b.clone());
            let entry = exps.entry(key).or_insert_with(|| (q.clone(), 0));
            entry.1 = (entry.1 + e) % 3;
        }
        let support = exps.into_values().filter(|(_, e)| *e != 0).collect();
        CubeClass { unit_exp: (self.unit_exp + other.unit_exp) % 3, support }
    }

    pub fn inverse(&self) -> CubeClass {
        CubeClass {
            unit_exp: (3 - self.unit_exp % 3) % 3,
            support: self
                .support
                .iter()
                .map(|(q, e)| (q.clone(), (3 - e) % 3))
                .collect(),
        }
    }

    pub fn pow(&self, e: u8) -> CubeClass {
        match e % 3 {
            0 => CubeClass::identity(),
            1 => self.clone(),
            _ => self.mul(self),
        }
    }
}

impl fmt::Display for CubeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return f.write_str("1");
        }
        let mut parts: Vec<String> = Vec::new();
        match self.unit_exp {
            0 => {}
            1 => parts.push("w".to_string()),
            _ => parts.push("w^2".to_string()),
        }
        for (q, e) in &self.support {
            let base = if q.is_rational() {
                format!("{}", q.a)
            } else {
                format!("({q})")
            };
            if *e == 1 {
                parts.push(base);
            } else {
                parts.push(format!("{base}^{e}"));
            }
        }
        f.write_str(&parts.join("*"))
    }
}

/// A projective point with exact `Z[w]` coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: EisensteinInt,
    pub y: EisensteinInt,
    pub z: EisensteinInt,
}

impl CurvePoint {
    pub fn new(x: EisensteinInt, y: EisensteinInt, z: EisensteinInt) -> Self {
        CurvePoint { x, y, z }
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero() && self.z.is_zero()
    }
}

impl fmt::Display for CurvePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} : {} : {})", self.x, self.y, self.z)
    }
}

/// A global point proving a class lies in the subgroup of torsors with
/// `k`-rational points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorsorWitness {
    pub class: String,
    pub curve: String,
    pub point: CurvePoint,
}

/// A candidate rejected by some local test, with every failing verdict.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateRejection {
    pub class: String,
    pub failures: Vec<LocalVerdict>,
}

/// Result of the Selmer group computation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelmerResult {
    #[serde(with = "crate::serde_util::big")]
    pub a_value: BigInt,
    /// F_3-basis of `S(A)`; the class of `A` always comes first.
    pub basis: Vec<CubeClass>,
    pub basis_display: Vec<String>,
    pub dimension: usize,
    pub s: i64,
    pub s0: i64,
    pub root_sign: i8,
    pub c_witnesses: Vec<TorsorWitness>,
    pub candidates_tested: usize,
    pub survivors: Vec<CubeClass>,
    pub rejections: Vec<CandidateRejection>,
    /// Set when `|S(A)| = 9`: naming the finiteness hypothesis under which
    /// every class of `S(A)` comes from a global point.
    pub conditional_note: Option<String>,
}

impl SelmerResult {
    /// Membership test in the span of the computed basis.
    pub fn contains(&self, class: &CubeClass) -> bool {
        span_contains(&self.basis, class)
    }
}

fn validate_a(a: &BigInt) -> Result<(), SelmerError> {
    if a.is_zero() || a.magnitude().is_one() {
        return Err(SelmerError::UnitOrZero(a.to_string()));
    }
    if !intfactor::is_cube_free(a) {
        return Err(SelmerError::NotCubeFree(a.to_string()));
    }
    Ok(())
}

/// The `3^r` candidate classes `w^m * prod_{i<r} q_i^{m_i}` over the primes
/// of `A` in `Z[w]`, the last prime in `(norm, a, b)` order being dropped as
/// the coset representative choice for the subgroup generated by `A`.
pub fn candidate_alphas(a: &BigInt) -> Result<Vec<CubeClass>, SelmerError> {
    validate_a(a)?;
    let fact = eisenstein::factor(&EisensteinInt::from_int(a))?;
    let mut primes: Vec<EisensteinInt> = fact.factors.iter().map(|(q, _)| q.clone()).collect();
    primes.pop(); // quotient by <A>
    let r = primes.len() + 1;
    let mut out = Vec::with_capacity(3usize.pow(r as u32));
    let total = 3usize.pow(r as u32);
    for idx in 0..total {
        let mut rem = idx;
        let unit_exp = (rem % 3) as u8;
        rem /= 3;
        let mut support = Vec::new();
        for q in &primes {
            let e = (rem % 3) as u8;
            rem /= 3;
            if e != 0 {
                support.push((q.clone(), e));
            }
        }
        out.push(CubeClass { unit_exp, support });
    }
    Ok(out)
}

/// The reduced integral model of the torsor `alpha x^3 + alpha^-1 y^3 = A z^3`:
/// representatives of `(alpha, alpha^-1, A)` with the common prime powers of
/// the equation stripped.
pub fn torsor_reduced(a: &BigInt, alpha: &CubeClass) -> CurveSpec {
    let fact = eisenstein::factor(&EisensteinInt::from_int(a)).expect("A nonzero");
    let inv = alpha.inverse();
    // collect every prime appearing in alpha or A
    let mut primes: Vec<EisensteinInt> = fact.factors.iter().map(|(q, _)| q.clone()).collect();
    for (q, _) in &alpha.support {
        if !primes.contains(q) {
            primes.push(q.clone());
        }
    }
    let exp_in = |cls: &CubeClass, q: &EisensteinInt| -> u32 {
        cls.support
            .iter()
            .find(|(p, _)| p == q)
            .map(|(_, e)| *e as u32)
            .unwrap_or(0)
    };
    let exp_in_a = |q: &EisensteinInt| -> u32 {
        fact.factors
            .iter()
            .find(|(p, _)| p == q)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    };
    let mut ca = Unit::new(false, alpha.unit_exp).to_eisenstein();
    let mut cb = Unit::new(false, inv.unit_exp).to_eisenstein();
    let mut cc = fact.unit.to_eisenstein();
    for q in &primes {
        let va = exp_in(alpha, q);
        let vb = exp_in(&inv, q);
        let vc = exp_in_a(q);
        let m = va.min(vb).min(vc);
        ca = &ca * &q.pow(va - m);
        cb = &cb * &q.pow(vb - m);
        cc = &cc * &q.pow(vc - m);
    }
    let curve = CurveSpec::new(ca, cb, cc).expect("nonzero coefficients");
    debug_assert!({
        // b/a = alpha (mod cubes) and abc = A (mod cubes)
        let ratio = CubeClass::of(&(&curve.b * &curve.a.pow(2))).unwrap();
        let prod = CubeClass::of(&(&(&curve.a * &curve.b) * &curve.c)).unwrap();
        ratio == *alpha && prod == CubeClass::of(&EisensteinInt::from_int(a)).unwrap()
    });
    curve
}

/// The cleared model `g^2 u^2 x^3 + y^3 = g u A z^3` for `alpha = u * g`.
pub fn torsor_cleared(a: &BigInt, alpha: &CubeClass) -> CurveSpec {
    let rep = alpha.representative();
    let a_eis = EisensteinInt::from_int(a);
    CurveSpec::new(rep.pow(2), EisensteinInt::one(), &rep * &a_eis).expect("nonzero")
}

/// Every local verdict for one candidate class at the primes dividing `3A`.
pub fn class_local_verdicts(
    a: &BigInt,
    class: &CubeClass,
) -> Result<Vec<LocalVerdict>, SelmerError> {
    let a_eis = EisensteinInt::from_int(a);
    let fact = eisenstein::factor(&a_eis)?;
    let rep = class.representative();
    let mut verdicts = Vec::new();
    for (q, _) in &fact.factors {
        if *q == EisensteinInt::lambda() {
            continue;
        }
        verdicts.push(solvable_kq_torsor(&a_eis, &rep, q)?);
    }
    // the ramified place is always among the primes of 3A
    verdicts.push(solvable_lambda(&torsor_cleared(a, class))?);
    Ok(verdicts)
}

/// True when every local test at the primes dividing `3A` passes.
pub fn class_passes_local_tests(a: &BigInt, class: &CubeClass) -> Result<bool, SelmerError> {
    Ok(class_local_verdicts(a, class)?.iter().all(|v| v.solvable))
}

// --- F_3 linear algebra over the coordinate system (w, q_1, ..., q_r) ---

fn class_vector(class: &CubeClass, primes: &[EisensteinInt]) -> Vec<u8> {
    let mut v = vec![0u8; primes.len() + 1];
    v[0] = class.unit_exp % 3;
    for (q, e) in &class.support {
        let idx = primes.iter().position(|p| p == q).expect("support inside prime list");
        v[idx + 1] = *e % 3;
    }
    v
}

fn gauss_rank(vectors: &mut Vec<Vec<u8>>) -> usize {
    let cols = vectors.first().map(|v| v.len()).unwrap_or(0);
    let mut rank = 0;
    for col in 0..cols {
        if let Some(pivot) = (rank..vectors.len()).find(|&i| vectors[i][col] != 0) {
            vectors.swap(rank, pivot);
            let inv = if vectors[rank][col] == 1 { 1 } else { 2 }; // inverse mod 3
            for c in 0..cols {
                vectors[rank][c] = vectors[rank][c] * inv % 3;
            }
            for i in 0..vectors.len() {
                if i != rank && vectors[i][col] != 0 {
                    let f = vectors[i][col];
                    for c in 0..cols {
                        vectors[i][c] = (vectors[i][c] + (3 - f) * vectors[rank][c]) % 3;
                    }
                }
            }
            rank += 1;
        }
    }
    rank
}

fn span_contains(basis: &[CubeClass], class: &CubeClass) -> bool {
    // coordinates over the union of supports
    let mut primes: Vec<EisensteinInt> = Vec::new();
    for c in basis.iter().chain(std::iter::once(class)) {
        for (q, _) in &c.support {
            if !primes.contains(q) {
                primes.push(q.clone());
            }
        }
    }
    let mut vecs: Vec<Vec<u8>> = basis.iter().map(|c| class_vector(c, &primes)).collect();
    let base_rank = gauss_rank(&mut vecs.clone());
    vecs.push(class_vector(class, &primes));
    gauss_rank(&mut vecs) == base_rank
}

/// Options for [`compute_selmer_with`].
#[derive(Clone, Debug)]
pub struct SelmerOptions {
    /// Norm bound for global-point searches on surviving torsors.
    pub witness_bound: u64,
}

impl Default for SelmerOptions {
    fn default() -> Self {
        SelmerOptions { witness_bound: 20 }
    }
}

pub fn compute_selmer(a: &BigInt) -> Result<SelmerResult, SelmerError> {
    compute_selmer_with(a, &SelmerOptions::default())
}

/// Compute `S(A)`: test every candidate at every prime dividing `3A`, close
/// the survivors under the group law together with the class of `A`, and
/// extract an F_3-basis with the class of `A` first.
pub fn compute_selmer_with(a: &BigInt, opts: &SelmerOptions) -> Result<SelmerResult, SelmerError> {
    validate_a(a)?;
    let a_eis = EisensteinInt::from_int(a);
    let fact = eisenstein::factor(&a_eis)?;
    let primes: Vec<EisensteinInt> = fact.factors.iter().map(|(q, _)| q.clone()).collect();
    let candidates = candidate_alphas(a)?;

    let evaluate = |class: &CubeClass| -> Result<(CubeClass, Vec<LocalVerdict>), SelmerError> {
        Ok((class.clone(), class_local_verdicts(a, class)?))
    };
    #[cfg(feature = "parallel")]
    let outcomes: Result<Vec<_>, SelmerError> = candidates.par_iter().map(evaluate).collect();
    #[cfg(not(feature = "parallel"))]
    let outcomes: Result<Vec<_>, SelmerError> = candidates.iter().map(evaluate).collect();
    let outcomes = outcomes?;

    let mut survivors: Vec<CubeClass> = Vec::new();
    let mut rejections: Vec<CandidateRejection> = Vec::new();
    for (class, verdicts) in outcomes {
        if verdicts.iter().all(|v| v.solvable) {
            survivors.push(class);
        } else {
            rejections.push(CandidateRejection {
                class: class.to_string(),
                failures: verdicts.into_iter().filter(|v| !v.solvable).collect(),
            });
        }
    }

    let a_class = CubeClass::of(&a_eis)?;
    // |S(A)| = 3 * #survivors; the survivor count must be a power of 3
    let mut pow = survivors.len();
    let mut log3 = 0usize;
    while pow % 3 == 0 {
        pow /= 3;
        log3 += 1;
    }
    if pow != 1 {
        return Err(SelmerError::GroupClosureViolation);
    }
    let expected_dim = 1 + log3;

    // Gaussian elimination with the class of A pinned as the first basis vector
    let mut basis: Vec<CubeClass> = vec![a_class.clone()];
    for s in &survivors {
        if s.is_identity() {
            continue;
        }
        if !span_contains(&basis, s) {
            basis.push(s.clone());
        }
    }
    {
        let mut vecs: Vec<Vec<u8>> = basis.iter().map(|c| class_vector(c, &primes)).collect();
        let rank = gauss_rank(&mut vecs);
        if rank != basis.len() || rank != expected_dim {
            return Err(SelmerError::GroupClosureViolation);
        }
    }
    let dimension = basis.len();
    let s = dimension as i64 - 1;
    let s0 = s0_of(a)?;
    if (s - s0).rem_euclid(2) != 0 {
        return Err(SelmerError::ParityViolation { s, s0 });
    }
    let root_sign = root_sign(a)?;

    let mut c_witnesses = Vec::new();
    for class in &survivors {
        if let Some(w) = torsor_point_search(a, class, opts.witness_bound)? {
            c_witnesses.push(w);
        }
    }

    let conditional_note = if dimension == 2 {
        Some(format!(
            "if Sha(E_{a}/Q) is finite then every class of S({a}) comes from a global point"
        ))
    } else {
        None
    };

    Ok(SelmerResult {
        a_value: a.clone(),
        basis_display: basis.iter().map(|c| c.to_string()).collect(),
        basis,
        dimension,
        s,
        s0,
        root_sign,
        c_witnesses,
        candidates_tested: candidates.len(),
        survivors,
        rejections,
        conditional_note,
    })
}

/// The explicit parity quantity: with `m` the number of distinct rational
/// prime factors of `A` congruent to 2 mod 3, it equals `m` when
/// `A = +-3 (mod 9)`, `m - 1` when `A = 0, +-2, +-4 (mod 9)`, and `m - 2`
/// when `A = +-1 (mod 9)`.
pub fn s0_of(a: &BigInt) -> Result<i64, SelmerError> {
    validate_a(a)?;
    let m = count_inert_prime_factors(a);
    let r = a.mod_floor(&BigInt::from(9)).to_i64().unwrap();
    Ok(match r {
        3 | 6 => m,
        0 | 2 | 7 | 4 | 5 => m - 1,
        1 | 8 => m - 2,
        _ => unreachable!(),
    })
}

fn count_inert_prime_factors(a: &BigInt) -> i64 {
    intfactor::factor_bigint(a)
        .1
        .iter()
        .filter(|(p, _)| (p % 3u32) == BigInt::from(2))
        .count() as i64
}

/// The sign of the functional equation of `L(E_A/Q; s)`:
/// `-w_3 * prod w_p` with `w_3 = -1` iff `A = +-1, +-3 (mod 9)` and
/// `w_p = -1` for each `p | A` with `p = 2 (mod 3)`.
pub fn root_sign(a: &BigInt) -> Result<i8, SelmerError> {
    validate_a(a)?;
    let r = a.mod_floor(&BigInt::from(9)).to_i64().unwrap();
    let w3: i64 = match r {
        1 | 8 | 3 | 6 => -1,
        _ => 1,
    };
    let m = count_inert_prime_factors(a);
    let sign = -w3 * if m % 2 == 0 { 1 } else { -1 };
    Ok(sign as i8)
}

/// The degree-3 isogeny on `E_A` whose kernel is the group of cube roots of
/// unity: `(x, y, z) -> (w x^3 - w^2 y^3, w y^3 - w^2 x^3, (w - w^2) x y z)`.
pub fn sqrt_minus3_map(p: &CurvePoint, a: &BigInt) -> Result<CurvePoint, SelmerError> {
    let curve = CurveSpec::new(
        EisensteinInt::one(),
        EisensteinInt::one(),
        EisensteinInt::from_int(a),
    )?;
    if p.is_zero() || !curve.contains(&p.x, &p.y, &p.z) {
        return Err(SelmerError::NotOnCurve(p.to_string()));
    }
    let w = EisensteinInt::omega();
    let w2 = EisensteinInt::omega_sq();
    let x3 = p.x.pow(3);
    let y3 = p.y.pow(3);
    let img = CurvePoint::new(
        &(&w * &x3) - &(&w2 * &y3),
        &(&w * &y3) - &(&w2 * &x3),
        &(&(&w - &w2) * &(&p.x * &p.y)) * &p.z,
    );
    if img.is_zero() || !curve.contains(&img.x, &img.y, &img.z) {
        return Err(SelmerError::NotOnCurve(img.to_string()));
    }
    Ok(img)
}

/// All Eisenstein integers of norm at most `bound`, sorted by
/// `(norm, a, b)`; includes zero.
fn elements_of_norm_up_to(bound: u64) -> Vec<EisensteinInt> {
    let lim = (2.0 * (bound as f64 / 3.0).sqrt()).ceil() as i64 + 1;
    let mut out = Vec::new();
    for a in -lim..=lim {
        for b in -lim..=lim {
            let n = a * a - a * b + b * b;
            if n as u64 <= bound {
                out.push(EisensteinInt::new(BigInt::from(a), BigInt::from(b)));
            }
        }
    }
    // rational and positive representatives first among equal norms, so the
    // canonical points (1, 0, 1) and (1, -1, 0) are hit before unit twists
    out.sort_by_key(|x| (x.norm(), x.b.abs(), -&x.a, -&x.b));
    out
}

/// Exact cube root in `Z[w]`, if one exists: round the complex cube roots to
/// the lattice and verify exactly.
pub fn exact_cube_root(v: &EisensteinInt) -> Option<EisensteinInt> {
    if v.is_zero() {
        return Some(EisensteinInt::zero());
    }
    let a = v.a.to_f64()?;
    let b = v.b.to_f64()?;
    let re = a - b / 2.0;
    let im = b * 3f64.sqrt() / 2.0;
    let r = (re * re + im * im).powf(1.0 / 6.0);
    let theta = im.atan2(re) / 3.0;
    for j in 0..3 {
        let ang = theta + 2.0 * std::f64::consts::PI * j as f64 / 3.0;
        let cre = r * ang.cos();
        let cim = r * ang.sin();
        let cb = 2.0 * cim / 3f64.sqrt();
        let ca = cre + cim / 3f64.sqrt();
        for da in [0.0, -1.0, 1.0] {
            for db in [0.0, -1.0, 1.0] {
                let cand = EisensteinInt::new(
                    BigInt::from((ca + da).round() as i64),
                    BigInt::from((cb + db).round() as i64),
                );
                if cand.pow(3) == *v {
                    return Some(cand);
                }
            }
        }
    }
    None
}

pub fn torsor_point_search(
    a: &BigInt,
    alpha: &CubeClass,
    bound: u64,
) -> Result<Option<TorsorWitness>, SelmerError> {
    torsor_point_search_impl(a, alpha, bound, cfg!(feature = "parallel"))
}

/// Always-sequential twin of [`torsor_point_search`].
pub fn torsor_point_search_seq(
    a: &BigInt,
    alpha: &CubeClass,
    bound: u64,
) -> Result<Option<TorsorWitness>, SelmerError> {
    torsor_point_search_impl(a, alpha, bound, false)
}

/// Bounded search for a `k`-point on the reduced torsor model: enumerate
/// `(x, y)` with norms at most `bound`, solve for `z` by exact division and
/// cube root. A hit proves the class has a global point; a miss proves
/// nothing.
fn torsor_point_search_impl(
    a: &BigInt,
    alpha: &CubeClass,
    bound: u64,
    parallel: bool,
) -> Result<Option<TorsorWitness>, SelmerError> {
    validate_a(a)?;
    let curve = torsor_reduced(a, alpha);
    Ok(curve_point_search_impl(&curve, bound, parallel)?.map(|mut w| {
        w.class = alpha.to_string();
        w
    }))
}

/// Bounded `k`-point search on an arbitrary diagonal cubic curve.
pub fn curve_point_search(
    curve: &CurveSpec,
    bound: u64,
) -> Result<Option<TorsorWitness>, SelmerError> {
    curve_point_search_impl(curve, bound, cfg!(feature = "parallel"))
}

fn curve_point_search_impl(
    curve: &CurveSpec,
    bound: u64,
    parallel: bool,
) -> Result<Option<TorsorWitness>, SelmerError> {
    let els = elements_of_norm_up_to(bound);
    let try_pair = |x: &EisensteinInt, y: &EisensteinInt| -> Option<CurvePoint> {
        if x.is_zero() && y.is_zero() {
            return None;
        }
        let lhs = &(&curve.a * &x.pow(3)) + &(&curve.b * &y.pow(3));
        let z3 = lhs.exact_div(&curve.c).ok()?;
        let z = exact_cube_root(&z3)?;
        let pt = CurvePoint::new(x.clone(), y.clone(), z);
        debug_assert!(curve.contains(&pt.x, &pt.y, &pt.z));
        Some(pt)
    };
    let search_x = |x: &EisensteinInt| -> Option<CurvePoint> {
        els.iter().find_map(|y| try_pair(x, y))
    };
    let found: Option<CurvePoint> = if parallel {
        #[cfg(feature = "parallel")]
        {
            els.par_iter().find_map_first(search_x)
        }
        #[cfg(not(feature = "parallel"))]
        {
            els.iter().find_map(search_x)
        }
    } else {
        els.iter().find_map(search_x)
    };
    Ok(found.map(|point| TorsorWitness {
        class: String::new(),
        curve: curve.to_string(),
        point,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eisenstein::ei;
    use crate::localsolve::Certificate;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn big(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn candidate_counts() {
        assert_eq!(candidate_alphas(&big(550)).unwrap().len(), 27);
        assert_eq!(candidate_alphas(&big(2)).unwrap().len(), 3);
        assert_eq!(candidate_alphas(&big(7)).unwrap().len(), 9);
        assert!(candidate_alphas(&big(8)).is_err());
        assert!(candidate_alphas(&big(1)).is_err());
    }

    #[test]
    fn candidate_support_is_norm_sorted_without_last() {
        // 550 = 2 * 5^2 * 11, all inert: drop 11, keep {2, 5}
        let cands = candidate_alphas(&big(550)).unwrap();
        for c in &cands {
            for (q, _) in &c.support {
                assert!(*q == ei(2, 0) || *q == ei(5, 0), "unexpected support {q}");
            }
        }
    }

    #[test]
    fn class_arithmetic() {
        let c242 = CubeClass::of_int(242);
        let c550 = CubeClass::of_int(550);
        let c10 = CubeClass::of_int(10);
        // 242 = 550^2 * 10^2 modulo cubes
        assert_eq!(c550.pow(2).mul(&c10.pow(2)), c242);
        assert!(c242.mul(&c242.inverse()).is_identity());
        // representative of the class of 550 is 550 itself (cube-free)
        assert_eq!(c550.representative(), ei(550, 0));
    }

    #[test]
    fn selmer_550() {
        let r = compute_selmer(&big(550)).unwrap();
        assert_eq!(r.dimension, 2);
        assert_eq!(r.s, 1);
        assert_eq!(r.s0, 1);
        assert_eq!(r.root_sign, -1);
        assert_eq!(r.candidates_tested, 27);
        assert_eq!(r.survivors.len(), 3);
        // basis spans <[550], [242]>
        assert!(r.contains(&CubeClass::of_int(242)));
        assert!(r.contains(&CubeClass::of_int(550)));
        assert!(!r.contains(&CubeClass::of_int(2)));
        assert!(r.conditional_note.is_some());
        // the class of A always has the witness (1, 0, 1) on its torsor
        assert!(!r.c_witnesses.is_empty());
    }

    #[test]
    fn selmer_550_rejection_evidence() {
        let r = compute_selmer(&big(550)).unwrap();
        // every candidate with a unit part is rejected at 2 by a symbol
        for rej in &r.rejections {
            if rej.class.starts_with('w') {
                let at2 = rej
                    .failures
                    .iter()
                    .find(|v| v.place == "q(2)")
                    .unwrap_or_else(|| panic!("unit-class {} lacks a rejection at 2", rej.class));
                match &at2.certificate {
                    Certificate::SymbolCriterion { symbol_exponent, .. } => {
                        assert_ne!(*symbol_exponent, 0)
                    }
                    other => panic!("expected symbol certificate at 2, got {other:?}"),
                }
            }
        }
        // the candidate [2] is rejected exactly at the ramified place by the
        // unit-class obstruction mod 9
        let rej2 = r
            .rejections
            .iter()
            .find(|rej| rej.class == "2")
            .expect("[2] must be rejected");
        assert_eq!(rej2.failures.len(), 1);
        assert_eq!(rej2.failures[0].place, "lambda");
        match &rej2.failures[0].certificate {
            Certificate::DelegatedQ3 { inner } => match **inner {
                Certificate::Q3UnitClasses { k, i, j } => {
                    assert_eq!(k, 0);
                    assert!(i != 0 && j != 0 && i != j, "classes must be pairwise distinct");
                }
                ref other => panic!("expected unit-class certificate, got {other:?}"),
            },
            other => panic!("expected delegated certificate, got {other:?}"),
        }
    }

    #[test]
    fn selmer_407044() {
        // (2 * 11 * 29)^2
        let r = compute_selmer(&big(407_044)).unwrap();
        assert_eq!(r.dimension, 2);
        assert!(r.contains(&CubeClass::of_int(242)));
        // unit classes are rejected at the inert prime 29 via the symbol
        for rej in &r.rejections {
            if rej.class.starts_with('w') {
                let at29 = rej
                    .failures
                    .iter()
                    .find(|v| v.place == "q(29)")
                    .unwrap_or_else(|| panic!("unit-class {} lacks a rejection at 29", rej.class));
                match &at29.certificate {
                    Certificate::SymbolCriterion { symbol_exponent, .. }
                    | Certificate::ResidueCube { symbol_exponent, .. } => {
                        assert_ne!(*symbol_exponent, 0)
                    }
                    other => panic!("expected symbol certificate at 29, got {other:?}"),
                }
            }
        }
    }

    #[test]
    fn selmer_6() {
        let r = compute_selmer(&big(6)).unwrap();
        assert!(r.dimension >= 1);
        assert!(r.contains(&CubeClass::of_int(6)));
        assert_eq!(r.s0, 1);
    }

    #[test]
    fn s0_examples() {
        assert_eq!(s0_of(&big(550)).unwrap(), 1);
        assert_eq!(s0_of(&big(6)).unwrap(), 1);
        assert_eq!(s0_of(&big(2)).unwrap(), 0);
    }

    #[test]
    fn root_sign_examples() {
        assert_eq!(root_sign(&big(550)).unwrap(), -1);
        assert_eq!(root_sign(&big(7)).unwrap(), -1);
        assert_eq!(root_sign(&big(3)).unwrap(), 1);
    }

    #[test]
    fn isogeny_kernel_and_identity() {
        let a = big(6);
        let o = CurvePoint::new(ei(1, 0), ei(-1, 0), ei(0, 0));
        let img = sqrt_minus3_map(&o, &a).unwrap();
        // O maps to O projectively: image is (-1, 1, 0)
        assert!(img.z.is_zero());
        assert_eq!(&img.x * &o.y, &img.y * &o.x);
        for j in 0..3u8 {
            let y = -&Unit::new(false, j).to_eisenstein();
            let t = CurvePoint::new(ei(1, 0), y, ei(0, 0));
            let img = sqrt_minus3_map(&t, &a).unwrap();
            assert!(img.z.is_zero(), "kernel points map to the identity");
            assert_eq!(&img.x + &img.y, EisensteinInt::zero());
        }
    }

    #[test]
    fn isogeny_on_known_points() {
        let pts: Vec<(i64, CurvePoint)> = vec![
            (7, CurvePoint::new(ei(2, 0), ei(-1, 0), ei(1, 0))),
            (6, CurvePoint::new(ei(17, 0), ei(37, 0), ei(21, 0))),
            (9, CurvePoint::new(ei(2, 0), ei(1, 0), ei(1, 0))),
            (2, CurvePoint::new(ei(1, 0), ei(1, 0), ei(1, 0))),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(0x1504);
        for (a, p) in pts {
            let a = big(a);
            let img = sqrt_minus3_map(&p, &a).unwrap();
            let curve =
                CurveSpec::new(ei(1, 0), ei(1, 0), EisensteinInt::from_int(&a)).unwrap();
            assert!(curve.contains(&img.x, &img.y, &img.z));
            // scaled copies stay on the curve and map onto the curve
            for _ in 0..5 {
                let u = ei(rng.gen_range(-3i64..=3), rng.gen_range(-3i64..=3));
                if u.is_zero() {
                    continue;
                }
                let q = CurvePoint::new(&p.x * &u, &p.y * &u, &p.z * &u);
                let img = sqrt_minus3_map(&q, &a).unwrap();
                assert!(curve.contains(&img.x, &img.y, &img.z));
            }
        }
    }

    #[test]
    fn torsor_search_examples() {
        // class of A: the torsor has (1, 0, 1)
        let w = torsor_point_search(&big(550), &CubeClass::of_int(550), 10)
            .unwrap()
            .expect("point (1,0,1)");
        assert_eq!(w.point, CurvePoint::new(ei(1, 0), ei(0, 0), ei(1, 0)));
        // trivial class: the curve is E_A itself with identity (1, -1, 0)
        let w = torsor_point_search(&big(550), &CubeClass::identity(), 10)
            .unwrap()
            .expect("identity point");
        assert_eq!(w.point, CurvePoint::new(ei(1, 0), ei(-1, 0), ei(0, 0)));
        // parallel and sequential agree
        let a = torsor_point_search(&big(550), &CubeClass::of_int(242), 12).unwrap();
        let b = torsor_point_search_seq(&big(550), &CubeClass::of_int(242), 12).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn torsor_hit_implies_local_solvability() {
        // a global point forces every local test to pass
        for (a, class) in [(550i64, 550i64), (550, 100), (6, 6), (7, 7)] {
            let a = big(a);
            let class = CubeClass::of_int(class);
            if torsor_point_search(&a, &class, 25).unwrap().is_some() {
                assert!(class_passes_local_tests(&a, &class).unwrap());
            }
        }
    }

    #[test]
    fn basis_products_pass_local_tests() {
        let r = compute_selmer(&big(550)).unwrap();
        for x in &r.basis {
            for y in &r.basis {
                assert!(class_passes_local_tests(&big(550), &x.mul(y)).unwrap());
            }
        }
    }

    #[test]
    fn parity_small_range() {
        for a in 2i64..=30 {
            if !intfactor::is_cube_free(&big(a)) {
                continue;
            }
            let r = compute_selmer(&big(a)).unwrap();
            assert_eq!((r.s - r.s0).rem_euclid(2), 0, "A = {a}");
            assert_eq!(r.s % 2 != 0, r.root_sign == -1, "A = {a}");
        }
    }

    #[test]
    fn cube_root_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0B3);
        for _ in 0..200 {
            let x = ei(rng.gen_range(-40i64..=40), rng.gen_range(-40i64..=40));
            let c = x.pow(3);
            let root = exact_cube_root(&c).expect("cube has a root");
            assert_eq!(root.pow(3), c);
        }
        assert!(exact_cube_root(&ei(2, 0)).is_none());
        assert!(exact_cube_root(&EisensteinInt::omega()).is_none());
    }
}
