//! Numerical toolkit for Hankel operators and commutators on the circle.
//!
//! The crate works with finitely supported Fourier data and dense truncations
//! of the Szegő projection `P`, multiplication operators and their
//! commutators `[P, a]`. On top of that it provides:
//!
//! - ordered-Lidskii residue sequences `Σ_{l≤N} ⟨G e_l, e_l⟩ / log(N+2)` and a
//!   classifier that separates convergent from oscillating log-averages,
//! - the Fourier-side and kernel-integral forms of the logarithmic trace of
//!   `P[P,a][P,b]`, including lacunary (Weierstrass-type) symbols,
//! - singular value spectra, weak-Schatten quasinorms and decay fits,
//! - Littlewood–Paley blocks with the associated Hölder and Besov norms,
//! - Clifford matrices and truncated trace sums on (noncommutative) tori.
//!
//! All inner products use the circle normalized to volume one, so `{e_k}` is
//! orthonormal.

pub mod closed_forms;
pub mod dixmier;
pub mod error;
pub mod fourier;
pub mod littlewood_paley;
pub mod nc_torus;
pub mod operators;
pub mod sequence;
pub mod spectral;

pub use error::{Error, Result};
pub use fourier::{CSequence, Extension, FourierSymbol, WeierstrassParams};
pub use num_complex::Complex64;
pub use sequence::IndexedSequence;
