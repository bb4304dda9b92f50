//! Descent machinery for diagonal cubic equations.
//!
//! The crate is organized around the field `k = Q(w)` where `w` is a primitive
//! cube root of unity:
//!
//! * [`eisenstein`] — exact arithmetic, units, primes and factorization in the
//!   Euclidean ring `Z[w]`.
//! * [`residues`] — cubic residue symbols and cube tests in residue fields,
//!   `Q_p` and `Q_3`.
//! * [`localsolve`] — decision procedures for local points on diagonal cubic
//!   curves `a*x^3 + b*y^3 = c*z^3` over every completion of `Q` and of `k`,
//!   with Hensel-certified enumeration as backstop.
//! * [`selmer`] — the cube-descent Selmer group `S(A)` of `x^3 + y^3 = A*z^3`
//!   over `k`, parity data, root numbers and global point witnesses.
//! * [`surface`] — the diagonal cubic surface pipeline: normalization,
//!   everywhere-local tests, the cube-ratio criterion, birationality over
//!   `Q_p`, sufficiency criteria, descent witness search and point search.
//! * [`oracle`] — independent brute-force checks used by the test suite to
//!   validate every analytic shortcut.
//!
//! With the default `parallel` feature the expensive enumerations and sweeps
//! run on rayon; disabling it yields a fully sequential build with identical
//! results. Functions with a `_seq` suffix are always-sequential twins kept
//! for benchmarking the two execution modes against each other.

pub mod eisenstein;
pub mod intfactor;
pub mod localsolve;
pub mod oracle;
pub mod residues;
pub mod selmer;
pub(crate) mod serde_util;
pub mod surface;

pub use eisenstein::EisensteinInt;
