//! Exact arithmetic in `Z[w]`, the ring of integers of `Q(w)` for a primitive
//! cube root of unity `w` (so `w^2 = -1 - w`).
//!
//! Conventions used throughout the crate:
//!
//! * elements are written on the basis `{1, w}` as `a + b*w`;
//! * `norm(a + b*w) = a^2 - a*b + b^2`, which is multiplicative;
//! * the ramified prime above 3 is `lambda = 1 - w`, with `3 = -w^2 * lambda^2`;
//! * a prime coprime to `lambda` is *primary* when it is `= 2 (mod 3)`, i.e.
//!   `a = 2, b = 0 (mod 3)`; every such prime has exactly one primary
//!   associate, and inert rational primes `p = 2 (mod 3)` are already primary;
//! * cube classes absorb signs (`-1` is a cube), so normalized unit parts live
//!   in `{1, w, w^2}`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::intfactor;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EisensteinError {
    #[error("division by zero in Z[w]")]
    DivisionByZero,
    #[error("operation requires a nonzero argument")]
    ZeroInput,
    #[error("element is divisible by lambda and has no primary associate")]
    NoPrimaryAssociate,
    #[error("element is not divisible as claimed")]
    InexactDivision,
    #[error("cannot parse {0:?} as an Eisenstein integer (expected forms like \"3\", \"w\", \"1-2*w\")")]
    Parse(String),
}

/// An element `a + b*w` of `Z[w]`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct EisensteinInt {
    pub a: BigInt,
    pub b: BigInt,
}

pub fn ei(a: i64, b: i64) -> EisensteinInt {
    EisensteinInt::new(BigInt::from(a), BigInt::from(b))
}

impl EisensteinInt {
    pub fn new(a: BigInt, b: BigInt) -> Self {
        EisensteinInt { a, b }
    }

    pub fn zero() -> Self {
        ei(0, 0)
    }

    pub fn one() -> Self {
        ei(1, 0)
    }

    /// The primitive cube root of unity `w`.
    pub fn omega() -> Self {
        ei(0, 1)
    }

    /// `w^2 = -1 - w`.
    pub fn omega_sq() -> Self {
        ei(-1, -1)
    }

    /// The ramified prime `lambda = 1 - w` above 3.
    pub fn lambda() -> Self {
        ei(1, -1)
    }

    pub fn from_int(n: &BigInt) -> Self {
        EisensteinInt::new(n.clone(), BigInt::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero()
    }

    /// True when the element lies in `Z`.
    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn is_unit(&self) -> bool {
        self.norm().is_one()
    }

    /// `a^2 - a*b + b^2 >= 0`, multiplicative, zero only at zero.
    pub fn norm(&self) -> BigInt {
        &self.a * &self.a - &self.a * &self.b + &self.b * &self.b
    }

    /// Complex conjugate: `a + b*w -> (a - b) - b*w`.
    pub fn conjugate(&self) -> Self {
        EisensteinInt::new(&self.a - &self.b, -&self.b)
    }

    /// Multiplication by `w`: `a + b*w -> -b + (a - b)*w`.
    pub fn mul_omega(&self) -> Self {
        EisensteinInt::new(-&self.b, &self.a - &self.b)
    }

    pub fn mul_unit(&self, u: &Unit) -> Self {
        let mut x = self.clone();
        for _ in 0..u.omega_exp {
            x = x.mul_omega();
        }
        if u.neg {
            x = -&x;
        }
        x
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = EisensteinInt::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Euclidean division: `self = q*y + r` with `norm(r) <= (3/4) norm(y)`.
    ///
    /// Each coordinate of the exact quotient is rounded to the nearest
    /// integer, ties toward zero.
    pub fn divrem(&self, y: &EisensteinInt) -> Result<(EisensteinInt, EisensteinInt), EisensteinError> {
        if y.is_zero() {
            return Err(EisensteinError::DivisionByZero);
        }
        let n = y.norm();
        let num = self * &y.conjugate();
        let qa = round_nearest(&num.a, &n);
        let qb = round_nearest(&num.b, &n);
        let q = EisensteinInt::new(qa, qb);
        let r = self - &(&q * y);
        debug_assert!(r.norm() < y.norm(), "Euclidean property violated");
        Ok((q, r))
    }

    /// Exact division; errors when `y` does not divide `self`.
    pub fn exact_div(&self, y: &EisensteinInt) -> Result<EisensteinInt, EisensteinError> {
        let (q, r) = self.divrem(y)?;
        if r.is_zero() {
            Ok(q)
        } else {
            Err(EisensteinError::InexactDivision)
        }
    }

    pub fn is_divisible_by(&self, y: &EisensteinInt) -> bool {
        match self.divrem(y) {
            Ok((_, r)) => r.is_zero(),
            Err(_) => false,
        }
    }

    /// `lambda`-adic valuation of a nonzero element.
    pub fn v_lambda(&self) -> u32 {
        assert!(!self.is_zero());
        let lam = EisensteinInt::lambda();
        let mut x = self.clone();
        let mut v = 0;
        while x.is_divisible_by(&lam) {
            x = x.exact_div(&lam).unwrap();
            v += 1;
        }
        v
    }

    /// Valuation at an arbitrary prime `q`.
    pub fn valuation(&self, q: &EisensteinInt) -> u32 {
        assert!(!self.is_zero());
        let mut x = self.clone();
        let mut v = 0;
        while x.is_divisible_by(q) {
            x = x.exact_div(q).unwrap();
            v += 1;
        }
        v
    }

    /// True for primes of `Z[w]`: associates of `lambda`, inert rational
    /// primes `p = 2 (mod 3)`, and elements of prime norm.
    pub fn is_prime(&self) -> bool {
        let n = self.norm();
        if n <= BigInt::one() {
            return false;
        }
        let nu = n.to_biguint().unwrap();
        if n == BigInt::from(3) {
            return true; // associates of lambda
        }
        if intfactor::is_prime(&nu) {
            return true;
        }
        // inert: norm p^2 with p = 2 mod 3 and the element an associate of p
        if let Some(root) = nu.sqrt().to_bigint_checked() {
            if &root * &root == n
                && intfactor::is_prime(root.magnitude())
                && (&root % 3u32) == BigInt::from(2)
            {
                return self.is_divisible_by(&EisensteinInt::from_int(&root));
            }
        }
        false
    }
}

trait ToBigIntChecked {
    fn to_bigint_checked(&self) -> Option<BigInt>;
}

impl ToBigIntChecked for BigUint {
    fn to_bigint_checked(&self) -> Option<BigInt> {
        Some(BigInt::from(self.clone()))
    }
}

/// Round `n / d` (d > 0) to the nearest integer, ties toward zero.
fn round_nearest(n: &BigInt, d: &BigInt) -> BigInt {
    debug_assert!(d.is_positive());
    let (q, r) = n.div_rem(d); // truncated toward zero
    let two_r = r.abs() * 2;
    if two_r > *d {
        if n.is_negative() {
            q - 1
        } else {
            q + 1
        }
    } else {
        q
    }
}

impl<'a, 'b> Add<&'b EisensteinInt> for &'a EisensteinInt {
    type Output = EisensteinInt;
    fn add(self, rhs: &'b EisensteinInt) -> EisensteinInt {
        EisensteinInt::new(&self.a + &rhs.a, &self.b + &rhs.b)
    }
}

impl<'a, 'b> Sub<&'b EisensteinInt> for &'a EisensteinInt {
    type Output = EisensteinInt;
    fn sub(self, rhs: &'b EisensteinInt) -> EisensteinInt {
        EisensteinInt::new(&self.a - &rhs.a, &self.b - &rhs.b)
    }
}

impl<'a, 'b> Mul<&'b EisensteinInt> for &'a EisensteinInt {
    type Output = EisensteinInt;
    fn mul(self, rhs: &'b EisensteinInt) -> EisensteinInt {
        // (a + b w)(c + d w) = (ac - bd) + (ad + bc - bd) w
        let ac = &self.a * &rhs.a;
        let bd = &self.b * &rhs.b;
        let ad = &self.a * &rhs.b;
        let bc = &self.b * &rhs.a;
        EisensteinInt::new(ac - &bd, ad + bc - bd)
    }
}

impl<'a> Neg for &'a EisensteinInt {
    type Output = EisensteinInt;
    fn neg(self) -> EisensteinInt {
        EisensteinInt::new(-&self.a, -&self.b)
    }
}

/// One of the six units `(-1)^neg * w^omega_exp`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Unit {
    pub neg: bool,
    pub omega_exp: u8,
}

impl Unit {
    pub fn one() -> Self {
        Unit { neg: false, omega_exp: 0 }
    }

    pub fn new(neg: bool, omega_exp: u8) -> Self {
        Unit { neg, omega_exp: omega_exp % 3 }
    }

    pub fn all() -> [Unit; 6] {
        [
            Unit::new(false, 0),
            Unit::new(false, 1),
            Unit::new(false, 2),
            Unit::new(true, 0),
            Unit::new(true, 1),
            Unit::new(true, 2),
        ]
    }

    pub fn to_eisenstein(self) -> EisensteinInt {
        EisensteinInt::one().mul_unit(&self)
    }

    pub fn mul(self, other: Unit) -> Unit {
        Unit::new(self.neg ^ other.neg, (self.omega_exp + other.omega_exp) % 3)
    }

    pub fn inverse(self) -> Unit {
        Unit::new(self.neg, (3 - self.omega_exp % 3) % 3)
    }

    /// Recognize a unit element; `None` when `x` is not one of the six units.
    pub fn from_element(x: &EisensteinInt) -> Option<Unit> {
        Unit::all().into_iter().find(|u| u.to_eisenstein() == *x)
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match (self.neg, self.omega_exp) {
            (false, 0) => "1",
            (false, 1) => "w",
            (false, 2) => "w^2",
            (true, 0) => "-1",
            (true, 1) => "-w",
            (true, 2) => "-w^2",
            _ => unreachable!(),
        };
        f.write_str(s)
    }
}

/// Greatest common divisor via the Euclidean algorithm. The result is
/// normalized to its primary associate when coprime to `lambda`; otherwise
/// the raw remainder chain result is returned.
pub fn gcd(x: &EisensteinInt, y: &EisensteinInt) -> EisensteinInt {
    let mut a = x.clone();
    let mut b = y.clone();
    while !b.is_zero() {
        let (_, r) = a.divrem(&b).expect("b nonzero");
        a = b;
        b = r;
    }
    if a.is_zero() {
        return a;
    }
    if a.is_unit() {
        return EisensteinInt::one();
    }
    match primary_associate(&a) {
        Ok((_, p)) => p,
        Err(_) => a,
    }
}

/// Extended gcd: returns `(g, s, t)` with `s*x + t*y = g`.
pub fn xgcd(x: &EisensteinInt, y: &EisensteinInt) -> (EisensteinInt, EisensteinInt, EisensteinInt) {
    let (mut r0, mut r1) = (x.clone(), y.clone());
    let (mut s0, mut s1) = (EisensteinInt::one(), EisensteinInt::zero());
    let (mut t0, mut t1) = (EisensteinInt::zero(), EisensteinInt::one());
    while !r1.is_zero() {
        let (q, r) = r0.divrem(&r1).expect("r1 nonzero");
        let s = &s0 - &(&q * &s1);
        let t = &t0 - &(&q * &t1);
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s);
        t0 = std::mem::replace(&mut t1, t);
    }
    (r0, s0, t0)
}

/// The unique associate `= 2 (mod 3)` of an element coprime to `lambda`,
/// together with the unit `u` such that `input = u * primary`.
pub fn primary_associate(q: &EisensteinInt) -> Result<(Unit, EisensteinInt), EisensteinError> {
    if q.is_zero() {
        return Err(EisensteinError::ZeroInput);
    }
    if (q.norm() % 3u32).is_zero() {
        return Err(EisensteinError::NoPrimaryAssociate);
    }
    let three = BigInt::from(3);
    for v in Unit::all() {
        let cand = q.mul_unit(&v);
        if cand.a.mod_floor(&three) == BigInt::from(2) && cand.b.mod_floor(&three).is_zero() {
            // q = v^{-1} * cand
            return Ok((v.inverse(), cand));
        }
    }
    unreachable!("every element coprime to lambda has a primary associate")
}

/// `unit * prod primes^exp`, primes in primary form (the ramified prime is
/// stored as `lambda` itself), pairwise non-associate, sorted by
/// `(norm, a, b)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EisensteinFactorization {
    pub unit: Unit,
    pub factors: Vec<(EisensteinInt, u32)>,
}

impl EisensteinFactorization {
    /// Reassemble the factored element.
    pub fn product(&self) -> EisensteinInt {
        let mut x = self.unit.to_eisenstein();
        for (p, e) in &self.factors {
            x = &x * &p.pow(*e);
        }
        x
    }
}

/// Complete factorization of a nonzero element, driven by factoring its norm
/// over `Z`. Rational primes `p = 2 (mod 3)` stay inert, `p = 1 (mod 3)`
/// split into two conjugate primary primes, and `3 = -w^2 * lambda^2`.
pub fn factor(x: &EisensteinInt) -> Result<EisensteinFactorization, EisensteinError> {
    if x.is_zero() {
        return Err(EisensteinError::ZeroInput);
    }
    let mut rest = x.clone();
    let mut factors: Vec<(EisensteinInt, u32)> = Vec::new();
    let norm = x.norm().to_biguint().unwrap();
    for (p, _) in intfactor::factor_biguint(&norm) {
        let p = BigInt::from(p);
        if p == BigInt::from(3) {
            let lam = EisensteinInt::lambda();
            let mut e = 0;
            while rest.is_divisible_by(&lam) {
                rest = rest.exact_div(&lam).unwrap();
                e += 1;
            }
            if e > 0 {
                factors.push((lam, e));
            }
        } else if (&p % 3u32) == BigInt::from(2) {
            let ip = EisensteinInt::from_int(&p);
            let mut e = 0;
            while rest.is_divisible_by(&ip) {
                rest = rest.exact_div(&ip).unwrap();
                e += 1;
            }
            if e > 0 {
                factors.push((ip, e));
            }
        } else {
            // split prime: find the canonical root of x^2+x+1 mod p
            let q = split_prime_above(&p);
            for prime in [q.clone(), q.conjugate()] {
                let (_, prime) = primary_associate(&prime).expect("split prime coprime to lambda");
                let mut e = 0;
                while rest.is_divisible_by(&prime) {
                    rest = rest.exact_div(&prime).unwrap();
                    e += 1;
                }
                if e > 0 {
                    factors.push((prime, e));
                }
            }
        }
    }
    let unit = Unit::from_element(&rest).expect("cofactor after factoring must be a unit");
    factors.sort_by(|(p1, _), (p2, _)| {
        (p1.norm(), &p1.a, &p1.b).cmp(&(p2.norm(), &p2.a, &p2.b))
    });
    Ok(EisensteinFactorization { unit, factors })
}

/// A primary prime above the split rational prime `p = 1 (mod 3)`,
/// deterministic in `p`.
pub fn split_prime_above(p: &BigInt) -> EisensteinInt {
    let pu = p.to_biguint().expect("positive prime");
    let e = (&pu - 1u32) / 3u32;
    // find an element of order 3 in F_p^*
    let mut a = BigUint::from(2u32);
    let u = loop {
        let c = a.modpow(&e, &pu);
        if !c.is_one() {
            break BigInt::from(c);
        }
        a += 1u32;
    };
    // the two roots of x^2 + x + 1 are u and -1-u; pick the smaller
    let other = (p - BigInt::one() - &u).mod_floor(p);
    let u0 = u.min(other);
    let g = gcd(&EisensteinInt::from_int(p), &EisensteinInt::new(u0, -BigInt::one()));
    debug_assert_eq!(g.norm(), *p);
    primary_associate(&g).expect("split prime coprime to lambda").1
}

/// Write `x = cubefree * cube^3` with all prime exponents of `cubefree` in
/// `{0, 1, 2}` and its unit part normalized to `w^m` (signs are absorbed
/// into the cube since `-1 = (-1)^3`).
pub fn cube_free_decompose(x: &EisensteinInt) -> Result<(EisensteinInt, EisensteinInt), EisensteinError> {
    let f = factor(x)?;
    let mut cubefree = Unit::new(false, f.unit.omega_exp).to_eisenstein();
    let mut cube = if f.unit.neg {
        -&EisensteinInt::one()
    } else {
        EisensteinInt::one()
    };
    for (p, e) in &f.factors {
        let r = e % 3;
        let k = e / 3;
        if r > 0 {
            cubefree = &cubefree * &p.pow(r);
        }
        if k > 0 {
            cube = &cube * &p.pow(k);
        }
    }
    debug_assert_eq!(&cubefree * &cube.pow(3), *x);
    Ok((cubefree, cube))
}

/// Canonical residue arithmetic modulo a nonzero element.
///
/// The ideal `(m)` is a rank-2 lattice in coordinates `(a, b)`; this struct
/// holds a triangular basis for it so every coset has a unique representative
/// with `0 <= a < wx` and `0 <= b < g`.
#[derive(Clone, Debug)]
pub struct Modulus {
    pub modulus: EisensteinInt,
    u: (BigInt, BigInt), // basis vector (ua, g)
    wx: BigInt,          // basis vector (wx, 0)
    g: BigInt,
}

impl Modulus {
    pub fn new(m: &EisensteinInt) -> Result<Self, EisensteinError> {
        if m.is_zero() {
            return Err(EisensteinError::ZeroInput);
        }
        // lattice generated by m = (ma, mb) and w*m = (-mb, ma - mb)
        let v1 = (m.a.clone(), m.b.clone());
        let v2 = (-&m.b, &m.a - &m.b);
        let ext = v1.1.extended_gcd(&v2.1);
        let g = ext.gcd.clone();
        let (s, t) = (ext.x, ext.y);
        debug_assert!(!g.is_zero());
        let u = (&s * &v1.0 + &t * &v2.0, g.clone());
        let norm = m.norm();
        let wx = (&norm / &g).abs();
        let g = g.abs();
        Ok(Modulus { modulus: m.clone(), u, wx, g })
    }

    /// Number of residues, equal to `norm(modulus)`.
    pub fn size(&self) -> BigInt {
        &self.wx * &self.g
    }

    /// Unique coset representative with `0 <= a < wx`, `0 <= b < g`.
    pub fn reduce(&self, x: &EisensteinInt) -> EisensteinInt {
        let k = x.b.div_floor(&self.u.1);
        let a = &x.a - &k * &self.u.0;
        let b = &x.b - &k * &self.u.1;
        let a = a.mod_floor(&self.wx);
        debug_assert!(b >= BigInt::zero() && b < self.g);
        EisensteinInt::new(a, b)
    }

    pub fn divides(&self, x: &EisensteinInt) -> bool {
        self.reduce(x).is_zero()
    }

    pub fn mul(&self, x: &EisensteinInt, y: &EisensteinInt) -> EisensteinInt {
        self.reduce(&(x * y))
    }

    pub fn pow(&self, x: &EisensteinInt, e: &BigUint) -> EisensteinInt {
        let mut result = self.reduce(&EisensteinInt::one());
        let mut base = self.reduce(x);
        let bits = e.bits();
        for i in 0..bits {
            if e.bit(i) {
                result = self.mul(&result, &base);
            }
            if i + 1 < bits {
                base = self.mul(&base, &base);
            }
        }
        result
    }

    /// All residues, in lexicographic `(a, b)` order. Intended for small
    /// moduli (tests and residue-field sweeps).
    pub fn residues(&self) -> impl Iterator<Item = EisensteinInt> + '_ {
        let wx = self.wx.to_u64().expect("modulus too large to enumerate");
        let g = self.g.to_u64().expect("modulus too large to enumerate");
        (0..wx).flat_map(move |a| {
            (0..g).map(move |b| EisensteinInt::new(BigInt::from(a), BigInt::from(b)))
        })
    }
}

impl fmt::Display for EisensteinInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        let omega_part = |f: &mut fmt::Formatter<'_>, b: &BigInt, leading: bool| -> fmt::Result {
            let mag = b.abs();
            let sign = if b.is_negative() {
                "-"
            } else if leading {
                ""
            } else {
                "+"
            };
            if mag.is_one() {
                write!(f, "{sign}w")
            } else {
                write!(f, "{sign}{mag}*w")
            }
        };
        if self.a.is_zero() {
            omega_part(f, &self.b, true)
        } else {
            write!(f, "{}", self.a)?;
            omega_part(f, &self.b, false)
        }
    }
}

impl fmt::Debug for EisensteinInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self)
    }
}

impl FromStr for EisensteinInt {
    type Err = EisensteinError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(EisensteinError::Parse(s.to_string()));
        }
        // split into signed terms at top level
        let mut terms: Vec<String> = Vec::new();
        let mut cur = String::new();
        for (i, c) in compact.chars().enumerate() {
            if (c == '+' || c == '-') && i > 0 {
                terms.push(std::mem::take(&mut cur));
                cur.push(c);
            } else {
                cur.push(c);
            }
        }
        terms.push(cur);
        let mut a = BigInt::zero();
        let mut b = BigInt::zero();
        for t in terms {
            if t.is_empty() || t == "+" || t == "-" {
                return Err(EisensteinError::Parse(s.to_string()));
            }
            let (sign, body) = match t.strip_prefix('-') {
                Some(rest) => (-1, rest.to_string()),
                None => (1, t.strip_prefix('+').unwrap_or(&t).to_string()),
            };
            if let Some(coeff) = body.strip_suffix('w') {
                let coeff = coeff.strip_suffix('*').unwrap_or(coeff);
                let c = if coeff.is_empty() {
                    BigInt::one()
                } else {
                    BigInt::from_str(coeff).map_err(|_| EisensteinError::Parse(s.to_string()))?
                };
                b += c * sign;
            } else {
                let c = BigInt::from_str(&body).map_err(|_| EisensteinError::Parse(s.to_string()))?;
                a += c * sign;
            }
        }
        Ok(EisensteinInt::new(a, b))
    }
}

impl Serialize for EisensteinInt {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for EisensteinInt {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
