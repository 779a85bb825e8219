//! Clifford matrices, Dirac phases `F(k) = c(k)/|k|` and truncated trace
//! sums for products of commutators on (noncommutative) tori.
//!
//! In two dimensions the printed reduction of `tr(γ F(k₄) C_{K,k₄})` to cross
//! products does not hold. The matrix trace is `2i·Im(X)` with
//! `X = w(w̄-z̄)(z-u)(ū-w̄)`, and for unit `w, z, u`
//! `X = 2i(Im(uw̄) + Im(wz̄) + Im(zū))`; the printed identity drops the last
//! term. Both the printed forms and the corrected ones are provided so the
//! discrepancy stays checkable.
//!
//! The θ-phase `∏ exp(iθ(k_j, Σ_{l>j} k_l))` does not cancel on the zero-sum
//! set once there are three or more modes: it equals
//! `exp(i Σ_{j<l≤k} θ(k_j, k_l))`. With two modes it is identically one.

use std::collections::BTreeMap;

use faer::{c64, Mat};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Gamma matrices for `Cl(ℝ^n)` on spinors of dimension `2^{⌊n/2⌋}`.
///
/// `γ_{2j-1} = Z^{⊗(j-1)} ⊗ X ⊗ I...` and `γ_{2j} = Z^{⊗(j-1)} ⊗ (-Y) ⊗ I...`;
/// for odd `n` the last one is `Z^{⊗m}`. The grading (even `n` only) is
/// `Z^{⊗m}`. With this choice `c(k) = [[0, k₁+ik₂], [k₁-ik₂, 0]]` for `n = 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct CliffordRep {
    pub n: usize,
    pub dim_s: usize,
    pub gammas: Vec<Mat<c64>>,
    pub grading: Option<Mat<c64>>,
}

fn pauli(which: char) -> Mat<c64> {
    let (o, z, i) = (c64::new(1.0, 0.0), c64::new(0.0, 0.0), c64::new(0.0, 1.0));
    let e = match which {
        'I' => [o, z, z, o],
        'X' => [z, o, o, z],
        // -Y
        'y' => [z, i, -i, z],
        'Z' => [o, z, z, -o],
        _ => unreachable!(),
    };
    Mat::from_fn(2, 2, |r, c| e[2 * r + c])
}

fn kron(a: &Mat<c64>, b: &Mat<c64>) -> Mat<c64> {
    let (br, bc) = (b.nrows(), b.ncols());
    Mat::from_fn(a.nrows() * br, a.ncols() * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

fn kron_all(factors: &[Mat<c64>]) -> Mat<c64> {
    factors
        .iter()
        .fold(Mat::from_fn(1, 1, |_, _| c64::new(1.0, 0.0)), |acc, f| kron(&acc, f))
}

pub fn clifford_rep(n: usize) -> Result<CliffordRep> {
    if !(1..=8).contains(&n) {
        return Err(Error::InvalidParameter(format!("torus dimension must be in 1..=8, got {n}")));
    }
    let m = n / 2;
    let word = |j: usize, mid: char| -> Mat<c64> {
        let f: Vec<Mat<c64>> = (0..m)
            .map(|p| match p.cmp(&j) {
                std::cmp::Ordering::Less => pauli('Z'),
                std::cmp::Ordering::Equal => pauli(mid),
                std::cmp::Ordering::Greater => pauli('I'),
            })
            .collect();
        kron_all(&f)
    };
    let mut gammas = Vec::with_capacity(n);
    for j in 0..m {
        gammas.push(word(j, 'X'));
        gammas.push(word(j, 'y'));
    }
    let chirality = kron_all(&vec![pauli('Z'); m]);
    let grading = if n % 2 == 0 {
        Some(chirality)
    } else {
        gammas.push(chirality);
        None
    };
    Ok(CliffordRep {
        n,
        dim_s: 1 << m,
        gammas,
        grading,
    })
}

impl CliffordRep {
    pub fn identity(&self) -> Mat<c64> {
        Mat::from_fn(self.dim_s, self.dim_s, |i, j| c64::new(f64::from(i == j), 0.0))
    }

    fn check_vec(&self, k: &[i64]) -> Result<()> {
        if k.len() != self.n {
            return Err(Error::InvalidParameter(format!(
                "lattice vector has {} components, expected {}",
                k.len(),
                self.n
            )));
        }
        Ok(())
    }

    /// Clifford multiplication `c(k) = Σ k_i γ_i`.
    pub fn clifford(&self, k: &[i64]) -> Result<Mat<c64>> {
        self.check_vec(k)?;
        let d = self.dim_s;
        Ok(Mat::from_fn(d, d, |r, c| {
            k.iter().zip(&self.gammas).map(|(&ki, g)| g[(r, c)] * ki as f64).sum()
        }))
    }
}

fn norm(k: &[i64]) -> f64 {
    (k.iter().map(|&x| (x * x) as f64).sum::<f64>()).sqrt()
}

/// `c(k)/|k|`, and the zero matrix at `k = 0`.
pub fn dirac_phase(rep: &CliffordRep, k: &[i64]) -> Result<Mat<c64>> {
    let c = rep.clifford(k)?;
    let nk = norm(k);
    let s = if nk == 0.0 { 0.0 } else { 1.0 / nk };
    Ok(Mat::from_fn(rep.dim_s, rep.dim_s, |i, j| c[(i, j)] * s))
}

/// An antisymmetric real form `θ(k, k') = Σ k_i θ_ij k'_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct AntisymmetricForm {
    theta: Vec<Vec<f64>>,
}

impl TryFrom<Vec<Vec<f64>>> for AntisymmetricForm {
    type Error = Error;

    fn try_from(theta: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(theta)
    }
}

impl From<AntisymmetricForm> for Vec<Vec<f64>> {
    fn from(f: AntisymmetricForm) -> Self {
        f.theta
    }
}

impl AntisymmetricForm {
    pub fn new(theta: Vec<Vec<f64>>) -> Result<Self> {
        let n = theta.len();
        if theta.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidParameter("theta must be square".into()));
        }
        for i in 0..n {
            for j in 0..n {
                if !theta[i][j].is_finite() || theta[i][j] != -theta[j][i] {
                    return Err(Error::InvalidParameter("theta must be antisymmetric".into()));
                }
            }
        }
        Ok(Self { theta })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            theta: vec![vec![0.0; n]; n],
        }
    }

    /// The antisymmetric form with upper-triangular entries taken from
    /// `upper` row by row.
    pub fn from_upper(n: usize, upper: &[f64]) -> Result<Self> {
        if upper.len() != n * (n - 1) / 2 {
            return Err(Error::InvalidParameter("wrong number of upper-triangular entries".into()));
        }
        let mut theta = vec![vec![0.0; n]; n];
        let mut it = upper.iter();
        for i in 0..n {
            for j in i + 1..n {
                let v = *it.next().unwrap();
                theta[i][j] = v;
                theta[j][i] = -v;
            }
        }
        Self::new(theta)
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    pub fn apply(&self, k: &[i64], kp: &[i64]) -> f64 {
        let mut s = 0.0;
        for (i, &ki) in k.iter().enumerate() {
            for (j, &kj) in kp.iter().enumerate() {
                s += ki as f64 * self.theta[i][j] * kj as f64;
            }
        }
        s
    }
}

/// `K = (k_1, ..., k_k)` together with `k_{k+1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeTuple {
    pub k: Vec<Vec<i64>>,
    pub k_last: Vec<i64>,
}

fn add(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

impl ModeTuple {
    pub fn new(k: Vec<Vec<i64>>, k_last: Vec<i64>) -> Self {
        Self { k, k_last }
    }

    pub fn in_zero_sum_set(&self) -> bool {
        let n = self.k_last.len();
        self.k.iter().fold(vec![0; n], |acc, v| add(&acc, v)).iter().all(|&x| x == 0)
    }

    /// `Σ_{l=j}^{k+1} k_l` for `j = 1..=k+1` (zero-based: index `j-1`).
    fn suffix_sums(&self) -> Vec<Vec<i64>> {
        let mut out = vec![self.k_last.clone()];
        for kj in self.k.iter().rev() {
            let next = add(out.last().unwrap(), kj);
            out.push(next);
        }
        out.reverse();
        out
    }
}

fn mat_mul(a: &Mat<c64>, b: &Mat<c64>) -> Mat<c64> {
    a * b
}

/// `C_{K,k_{k+1}} = ∏_{j=1}^{k} (F(Σ_{l≥j} k_l) - F(Σ_{l>j} k_l))`, left to
/// right in `j`.
pub fn c_matrix(rep: &CliffordRep, modes: &ModeTuple) -> Result<Mat<c64>> {
    rep.check_vec(&modes.k_last)?;
    for v in &modes.k {
        rep.check_vec(v)?;
    }
    let sums = modes.suffix_sums();
    let phases: Vec<Mat<c64>> = sums.iter().map(|s| dirac_phase(rep, s)).collect::<Result<_>>()?;
    let mut acc = rep.identity();
    for j in 0..modes.k.len() {
        let diff = &phases[j] - &phases[j + 1];
        acc = mat_mul(&acc, &diff);
    }
    Ok(acc)
}

pub fn mat_trace(m: &Mat<c64>) -> Complex64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

/// `k × k' = k₂k₁' - k₁k₂'`.
pub fn cross(k: &[i64], kp: &[i64]) -> i64 {
    k[1] * kp[0] - k[0] * kp[1]
}

fn check_2d_triple(modes: &ModeTuple) -> Result<()> {
    if modes.k.len() != 3 || modes.k_last.len() != 2 || modes.k.iter().any(|v| v.len() != 2) {
        return Err(Error::InvalidParameter("expected three vectors K and k₄ in ℤ²".into()));
    }
    if !modes.in_zero_sum_set() {
        return Err(Error::NotInZeroSumSet);
    }
    Ok(())
}

fn inv_or_zero(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        1.0 / x
    }
}

/// The printed closed form
/// `-4(k₃×k₄/(|k₃+k₄||k₄|) + k₁×k₄/(|k₄-k₁||k₄|))`, with `|0|^{-1} = 0`.
/// It does not agree with the matrix trace; see the module notes.
pub fn trace_gamma_c_2d(modes: &ModeTuple) -> Result<f64> {
    check_2d_triple(modes)?;
    let (k1, k3, k4) = (&modes.k[0], &modes.k[2], &modes.k_last);
    let n4 = inv_or_zero(norm(k4));
    let t1 = cross(k3, k4) as f64 * inv_or_zero(norm(&add(k3, k4))) * n4;
    let d: Vec<i64> = k4.iter().zip(k1).map(|(a, b)| a - b).collect();
    let t2 = cross(k1, k4) as f64 * inv_or_zero(norm(&d)) * n4;
    Ok(-4.0 * (t1 + t2))
}

/// `k/|k|` as a complex number under `ℤ² ≅ ℤ + iℤ`, zero at `k = 0`.
fn unit(k: &[i64]) -> Complex64 {
    Complex64::new(k[0] as f64, k[1] as f64) * inv_or_zero(norm(k))
}

/// `(w, z, u) = (k₄, k₂+k₃+k₄, k₃+k₄)` normalized.
fn wzu(modes: &ModeTuple) -> (Complex64, Complex64, Complex64) {
    let s = modes.suffix_sums();
    (unit(&s[0]), unit(&s[1]), unit(&s[2]))
}

/// `w(w̄-z̄)(z-u)(ū-w̄)`.
pub fn wzu_product(w: Complex64, z: Complex64, u: Complex64) -> Complex64 {
    w * (w.conj() - z.conj()) * (z - u) * (u.conj() - w.conj())
}

/// Right-hand side of the printed identity, `2i(Im(uw̄) + Im(wz̄))`.
pub fn wzu_printed_rhs(w: Complex64, z: Complex64, u: Complex64) -> Complex64 {
    Complex64::new(0.0, 2.0 * ((u * w.conj()).im + (w * z.conj()).im))
}

/// `2i(Im(uw̄) + Im(wz̄) + Im(zū))`, which equals [`wzu_product`] for unit
/// `w, z, u`.
pub fn wzu_corrected_rhs(w: Complex64, z: Complex64, u: Complex64) -> Complex64 {
    Complex64::new(0.0, 2.0 * ((u * w.conj()).im + (w * z.conj()).im + (z * u.conj()).im))
}

/// `tr(γ F(k₄) C_{K,k₄})` in the `2i·Im(X)` form.
pub fn trace_gamma_f_c_2d_phase(modes: &ModeTuple) -> Result<Complex64> {
    check_2d_triple(modes)?;
    let (w, z, u) = wzu(modes);
    Ok(Complex64::new(0.0, 2.0 * wzu_product(w, z, u).im))
}

/// Corrected closed form of `tr(γ F(k₄) C_{K,k₄})`: `2·X` expanded by the
/// three-term identity when `w, z, u` are all units, and `2i·Im(X)` when one
/// of them vanishes.
pub fn trace_gamma_f_c_2d_corrected(modes: &ModeTuple) -> Result<Complex64> {
    check_2d_triple(modes)?;
    let (w, z, u) = wzu(modes);
    if w == ZERO || z == ZERO || u == ZERO {
        return Ok(Complex64::new(0.0, 2.0 * wzu_product(w, z, u).im));
    }
    Ok(wzu_corrected_rhs(w, z, u) * 2.0)
}

/// `∏_j exp(iθ(k_j, Σ_{l>j} k_l))`, the sum running through `k_{k+1}`.
pub fn theta_phase(modes: &ModeTuple, theta: &AntisymmetricForm) -> Complex64 {
    let sums = modes.suffix_sums();
    let angle: f64 = modes.k.iter().enumerate().map(|(j, kj)| theta.apply(kj, &sums[j + 1])).sum();
    Complex64::from_polar(1.0, angle)
}

/// A finitely supported function on `ℤ^n`. JSON form:
/// `{"modes": [[[k1, ..., kn], re, im], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LatticeJson", into = "LatticeJson")]
pub struct LatticeSymbol {
    pub dim: usize,
    pub coeffs: BTreeMap<Vec<i64>, Complex64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatticeJson {
    pub modes: Vec<(Vec<i64>, f64, f64)>,
}

impl TryFrom<LatticeJson> for LatticeSymbol {
    type Error = Error;

    fn try_from(j: LatticeJson) -> Result<Self> {
        let dim = j.modes.first().map_or(0, |m| m.0.len());
        if j.modes.iter().any(|m| m.0.len() != dim || !m.1.is_finite() || !m.2.is_finite()) {
            return Err(Error::InvalidParameter("lattice modes must share a dimension and be finite".into()));
        }
        Ok(Self::from_modes(dim, j.modes.into_iter().map(|(k, re, im)| (k, Complex64::new(re, im)))))
    }
}

impl From<LatticeSymbol> for LatticeJson {
    fn from(s: LatticeSymbol) -> Self {
        Self {
            modes: s.coeffs.into_iter().map(|(k, c)| (k, c.re, c.im)).collect(),
        }
    }
}

impl LatticeSymbol {
    pub fn from_modes(dim: usize, modes: impl IntoIterator<Item = (Vec<i64>, Complex64)>) -> Self {
        let mut coeffs: BTreeMap<Vec<i64>, Complex64> = BTreeMap::new();
        for (k, c) in modes {
            assert_eq!(k.len(), dim);
            *coeffs.entry(k).or_insert(ZERO) += c;
        }
        coeffs.retain(|_, c| *c != ZERO);
        Self { dim, coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// Fourier coefficients `T(k)` of an equivariant operator on spinor fields.
#[derive(Debug, Clone, PartialEq)]
pub enum TCoefficients {
    Identity,
    Grading,
    /// `T(k) = F(k)`.
    Phase,
    /// `T(k) = γ F(k)`.
    GradingPhase,
    /// Explicit matrices, zero where absent.
    Table(BTreeMap<Vec<i64>, Mat<c64>>),
}

impl TCoefficients {
    pub fn at(&self, rep: &CliffordRep, k: &[i64]) -> Result<Mat<c64>> {
        let grading = || {
            rep.grading
                .clone()
                .ok_or_else(|| Error::InvalidParameter("grading exists only in even dimension".into()))
        };
        Ok(match self {
            TCoefficients::Identity => rep.identity(),
            TCoefficients::Grading => grading()?,
            TCoefficients::Phase => dirac_phase(rep, k)?,
            TCoefficients::GradingPhase => mat_mul(&grading()?, &dirac_phase(rep, k)?),
            TCoefficients::Table(t) => t
                .get(k)
                .cloned()
                .unwrap_or_else(|| Mat::zeros(rep.dim_s, rep.dim_s)),
        })
    }
}

/// Cap on the size of the support product enumerated for `K`.
pub const DEFAULT_TUPLE_CAP: u128 = 10_000_000;

/// The truncated sums of the torus trace formula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusTrace {
    /// `N = 0..=N_max`.
    pub indices: Vec<u64>,
    /// `Σ_{|k_{k+1}| ≤ N^{1/n}} Σ_{K∈I} (∏ a_{j,k_j} e^{iθ(...)}) tr(T(k_{k+1}) C_{K,k_{k+1}}) / log(2+N)`.
    pub values: Vec<Complex64>,
    /// Number of tuples `K ∈ I` found in the support product.
    pub tuples_in_i: usize,
    pub lattice_points: usize,
}

/// Smallest `N` with `|k|² ^ n ≤ N²`, i.e. `|k| ≤ N^{1/n}`.
fn n_min(k: &[i64], n: u32) -> Option<u64> {
    let r2: u128 = k.iter().map(|&x| (x * x) as u128).sum();
    let p = r2.checked_pow(n)?;
    let mut s = (p as f64).sqrt() as u128;
    while s * s < p {
        s += 1;
    }
    while s > 0 && (s - 1) * (s - 1) >= p {
        s -= 1;
    }
    u64::try_from(s).ok()
}

pub fn torus_trace_partial(
    rep: &CliffordRep,
    t: &TCoefficients,
    symbols: &[LatticeSymbol],
    n_max: u64,
    theta: &AntisymmetricForm,
    tuple_cap: u128,
) -> Result<TorusTrace> {
    let n = rep.n;
    if theta.dim() != n || symbols.iter().any(|s| !s.is_zero() && s.dim != n) {
        return Err(Error::InvalidParameter("symbol or theta dimension does not match the torus".into()));
    }
    let size: u128 = symbols.iter().map(|s| s.coeffs.len() as u128).product();
    if size > tuple_cap {
        return Err(Error::Resource {
            what: "mode tuple enumeration",
            size,
            cap: tuple_cap,
        });
    }

    // K ∈ I with the product of coefficients
    let mut tuples: Vec<(Vec<Vec<i64>>, Complex64)> = vec![(Vec::new(), Complex64::new(1.0, 0.0))];
    for s in symbols {
        let mut next = Vec::with_capacity(tuples.len() * s.coeffs.len());
        for (ks, c) in &tuples {
            for (k, a) in &s.coeffs {
                let mut v = ks.clone();
                v.push(k.clone());
                next.push((v, c * a));
            }
        }
        tuples = next;
    }
    tuples.retain(|(ks, _)| ModeTuple::new(ks.clone(), vec![0; n]).in_zero_sum_set());

    // lattice points of the largest ball, tagged with the first N reaching them
    let radius = (n_max as f64).powf(1.0 / n as f64).floor() as i64 + 1;
    let mut points: Vec<(u64, Vec<i64>)> = Vec::new();
    let mut k = vec![-radius; n];
    loop {
        if let Some(m) = n_min(&k, n as u32).filter(|&m| m <= n_max) {
            points.push((m, k.clone()));
        }
        let mut i = 0;
        while i < n && k[i] == radius {
            k[i] = -radius;
            i += 1;
        }
        if i == n {
            break;
        }
        k[i] += 1;
    }
    points.sort();

    let mut contrib = vec![ZERO; n_max as usize + 1];
    for (m, k_last) in &points {
        let tk = t.at(rep, k_last)?;
        let mut acc = ZERO;
        for (ks, coeff) in &tuples {
            let modes = ModeTuple::new(ks.clone(), k_last.clone());
            let c = c_matrix(rep, &modes)?;
            acc += coeff * theta_phase(&modes, theta) * mat_trace(&mat_mul(&tk, &c));
        }
        contrib[*m as usize] += acc;
    }
    let mut run = ZERO;
    let values = contrib
        .iter()
        .enumerate()
        .map(|(nn, v)| {
            run += v;
            run / (2.0 + nn as f64).ln()
        })
        .collect();
    Ok(TorusTrace {
        indices: (0..=n_max).collect(),
        values,
        tuples_in_i: tuples.len(),
        lattice_points: points.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scaled(m: &Mat<c64>, s: c64) -> Mat<c64> {
        Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * s)
    }

    fn max_abs(m: &Mat<c64>) -> f64 {
        let mut d = 0.0f64;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                d = d.max(m[(i, j)].norm());
            }
        }
        d
    }

    #[test]
    fn clifford_invariants() {
        for n in 1..=8 {
            let rep = clifford_rep(n).unwrap();
            assert_eq!(rep.dim_s, 1 << (n / 2));
            let id = rep.identity();
            for (i, gi) in rep.gammas.iter().enumerate() {
                assert!(max_abs(&(gi - gi.adjoint().to_owned())) < 1e-15);
                assert!(max_abs(&(gi * gi.adjoint() - &id)) < 1e-15);
                for (j, gj) in rep.gammas.iter().enumerate() {
                    let ac = gi * gj + gj * gi;
                    let expected = if i == j { scaled(&id, c64::new(2.0, 0.0)) } else { Mat::zeros(rep.dim_s, rep.dim_s) };
                    assert!(max_abs(&(ac - expected)) < 1e-15, "n={n} i={i} j={j}");
                }
                if let Some(g) = &rep.grading {
                    assert!(max_abs(&(g * gi + gi * g)) < 1e-15);
                }
            }
            if let Some(g) = &rep.grading {
                assert!(max_abs(&(g * g - &id)) < 1e-15);
            }
        }
        assert!(clifford_rep(0).is_err() && clifford_rep(9).is_err());
    }

    #[test]
    fn low_dimensional_examples() {
        let r1 = clifford_rep(1).unwrap();
        assert_eq!(r1.gammas[0][(0, 0)], c64::new(1.0, 0.0));

        let r2 = clifford_rep(2).unwrap();
        let f = dirac_phase(&r2, &[3, 4]).unwrap();
        assert!((f[(0, 1)] - c64::new(0.6, 0.8)).norm() < 1e-15);
        assert!((f[(1, 0)] - c64::new(0.6, -0.8)).norm() < 1e-15);
        assert_eq!(f[(0, 0)], c64::new(0.0, 0.0));
        let g = r2.grading.as_ref().unwrap();
        assert_eq!((g[(0, 0)], g[(1, 1)]), (c64::new(1.0, 0.0), c64::new(-1.0, 0.0)));

        let r3 = clifford_rep(3).unwrap();
        let vol = &(&r3.gammas[0] * &r3.gammas[1]) * &r3.gammas[2];
        let i = c64::new(0.0, 1.0);
        let diff_plus = max_abs(&(&vol - scaled(&r3.identity(), i)));
        let diff_minus = max_abs(&(&vol + scaled(&r3.identity(), i)));
        assert!(diff_plus.min(diff_minus) < 1e-15);
    }

    #[test]
    fn dirac_phase_examples() {
        let rep = clifford_rep(4).unwrap();
        assert_eq!(max_abs(&dirac_phase(&rep, &[0, 0, 0, 0]).unwrap()), 0.0);
        let e1 = dirac_phase(&rep, &[1, 0, 0, 0]).unwrap();
        assert!(max_abs(&(&e1 - &rep.gammas[0])) < 1e-15);
        let f = dirac_phase(&rep, &[1, -2, 3, 5]).unwrap();
        assert!(max_abs(&(&f * &f - rep.identity())) < 1e-14);
        assert!(dirac_phase(&rep, &[1, 2]).is_err());
    }

    #[test]
    fn c_matrix_examples() {
        let rep = clifford_rep(2).unwrap();
        let z = c_matrix(&rep, &ModeTuple::new(vec![vec![0, 0]], vec![2, 1])).unwrap();
        assert_eq!(max_abs(&z), 0.0);

        let kl = vec![1, 2];
        let c = c_matrix(&rep, &ModeTuple::new(vec![vec![-2, -4]], kl.clone())).unwrap();
        let expected = scaled(&dirac_phase(&rep, &kl).unwrap(), c64::new(-2.0, 0.0));
        assert!(max_abs(&(c - expected)) < 1e-15);
    }

    #[test]
    fn printed_closed_form_example() {
        let modes = ModeTuple::new(vec![vec![1, 0], vec![0, 1], vec![-1, -1]], vec![1, 0]);
        assert_eq!(trace_gamma_c_2d(&modes).unwrap(), 4.0);
        let par = ModeTuple::new(vec![vec![2, 0], vec![-1, 0], vec![-1, 0]], vec![3, 0]);
        assert_eq!(trace_gamma_c_2d(&par).unwrap(), 0.0);
        let bad = ModeTuple::new(vec![vec![1, 0], vec![0, 1], vec![0, 0]], vec![1, 0]);
        assert_eq!(trace_gamma_c_2d(&bad), Err(Error::NotInZeroSumSet));
    }

    fn random_tuple(rng: &mut ChaCha8Rng) -> ModeTuple {
        let mut v = || vec![rng.random_range(-4i64..=4), rng.random_range(-4i64..=4)];
        let (k1, k2, k4) = (v(), v(), v());
        let k3 = vec![-k1[0] - k2[0], -k1[1] - k2[1]];
        ModeTuple::new(vec![k1, k2, k3], k4)
    }

    #[test]
    fn corrected_forms_match_matrix_trace() {
        let rep = clifford_rep(2).unwrap();
        let g = rep.grading.clone().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let m = random_tuple(&mut rng);
            let c = c_matrix(&rep, &m).unwrap();
            let f = dirac_phase(&rep, &m.k_last).unwrap();
            let matrix = mat_trace(&(&(&g * &f) * &c));
            assert!((matrix - trace_gamma_f_c_2d_phase(&m).unwrap()).norm() < 1e-12);
            assert!((matrix - trace_gamma_f_c_2d_corrected(&m).unwrap()).norm() < 1e-12);
            // without F the grading trace of an odd product vanishes
            assert!(mat_trace(&(&g * &c)).norm() < 1e-15);
        }
    }

    #[test]
    fn printed_identity_fails_and_corrected_identity_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut printed_err = 0.0f64;
        for _ in 0..1000 {
            let mut u = || Complex64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU);
            let (w, z, v) = (u(), u(), u());
            let x = wzu_product(w, z, v);
            assert!((x - wzu_corrected_rhs(w, z, v)).norm() < 1e-12);
            printed_err = printed_err.max((x - wzu_printed_rhs(w, z, v)).norm());
        }
        assert!(printed_err > 1.0);
    }

    #[test]
    fn theta_phase_examples() {
        let m = ModeTuple::new(vec![vec![1, 2], vec![-3, 1], vec![2, -3]], vec![5, 7]);
        assert_eq!(theta_phase(&m, &AntisymmetricForm::zero(2)), Complex64::new(1.0, 0.0));
        let t = 0.7318;
        let th = AntisymmetricForm::from_upper(2, &[t]).unwrap();
        // on I with three modes the phase reduces to exp(iθ(k₁,k₂)), not 1
        let expected = Complex64::from_polar(1.0, th.apply(&m.k[0], &m.k[1]));
        assert!((theta_phase(&m, &th) - expected).norm() < 1e-12);
        assert!((expected - Complex64::new(1.0, 0.0)).norm() > 0.1);
        // with two modes it does cancel
        let two = ModeTuple::new(vec![vec![4, -1], vec![-4, 1]], vec![2, 9]);
        assert!((theta_phase(&two, &th) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let off = ModeTuple::new(vec![vec![1, 2], vec![-3, 1]], vec![5, 7]);
        let p = theta_phase(&off, &th);
        assert!((p.norm() - 1.0).abs() < 1e-15 && p.arg().abs() > 1e-3);
        assert!(AntisymmetricForm::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).is_err());
    }

    fn pair(k: [i64; 2]) -> LatticeSymbol {
        LatticeSymbol::from_modes(2, [(k.to_vec(), Complex64::new(1.0, 0.0)), (vec![-k[0], -k[1]], Complex64::new(1.0, 0.0))])
    }

    #[test]
    fn torus_sum_matches_closed_forms_and_ignores_theta() {
        let rep = clifford_rep(2).unwrap();
        let syms = [pair([1, 0]), pair([0, 1]), pair([1, 1])];
        let n_max = 200;
        let base = torus_trace_partial(&rep, &TCoefficients::GradingPhase, &syms, n_max, &AntisymmetricForm::zero(2), DEFAULT_TUPLE_CAP).unwrap();
        assert_eq!(base.tuples_in_i, 2);

        // direct sum with the corrected closed form
        let mut acc = vec![ZERO; n_max as usize + 1];
        for x in -15i64..=15 {
            for y in -15i64..=15 {
                let r2 = (x * x + y * y) as u64;
                if r2 > n_max {
                    continue;
                }
                for sign in [1i64, -1] {
                    let m = ModeTuple::new(vec![vec![sign, 0], vec![0, sign], vec![-sign, -sign]], vec![x, y]);
                    acc[r2 as usize] += trace_gamma_f_c_2d_corrected(&m).unwrap();
                }
            }
        }
        let mut run = ZERO;
        for (nn, v) in acc.iter().enumerate() {
            run += v;
            assert!((base.values[nn] - run / (2.0 + nn as f64).ln()).norm() < 1e-10, "N={nn}");
        }

        // both tuples carry the phase exp(iθ₁₂), so a nonzero θ rotates the sum
        let t = 0.9;
        let th = AntisymmetricForm::from_upper(2, &[t]).unwrap();
        let other = torus_trace_partial(&rep, &TCoefficients::GradingPhase, &syms, n_max, &th, DEFAULT_TUPLE_CAP).unwrap();
        let rot = Complex64::from_polar(1.0, t);
        for (a, b) in base.values.iter().zip(&other.values) {
            assert!((a * rot - b).norm() < 1e-10);
        }
        assert!(base.values.iter().any(|v| v.norm() > 1e-3));
    }

    #[test]
    fn two_commutators_are_theta_independent() {
        let rep = clifford_rep(2).unwrap();
        let a = LatticeSymbol::from_modes(2, [(vec![1, 2], Complex64::new(1.0, 0.5)), (vec![-1, 0], Complex64::new(0.3, 0.0))]);
        let b = LatticeSymbol::from_modes(2, [(vec![-1, -2], Complex64::new(2.0, 0.0)), (vec![1, 0], Complex64::new(0.0, 1.0))]);
        let t = TCoefficients::Identity;
        let zero = torus_trace_partial(&rep, &t, &[a.clone(), b.clone()], 60, &AntisymmetricForm::zero(2), DEFAULT_TUPLE_CAP).unwrap();
        let th = AntisymmetricForm::from_upper(2, &[2.3]).unwrap();
        let other = torus_trace_partial(&rep, &t, &[a, b], 60, &th, DEFAULT_TUPLE_CAP).unwrap();
        assert_eq!(zero.tuples_in_i, 2);
        for (x, y) in zero.values.iter().zip(&other.values) {
            assert!((x - y).norm() < 1e-12);
        }
        assert!(zero.values.iter().any(|v| v.norm() > 1e-3));
    }

    #[test]
    fn torus_sum_degenerate_cases() {
        let rep1 = clifford_rep(1).unwrap();
        let a = LatticeSymbol::from_modes(1, [(vec![0], Complex64::new(2.0, 0.0)), (vec![3], Complex64::new(1.0, 0.0))]);
        let t = torus_trace_partial(&rep1, &TCoefficients::Identity, &[a], 50, &AntisymmetricForm::zero(1), DEFAULT_TUPLE_CAP).unwrap();
        assert!(t.values.iter().all(|v| v.norm() < 1e-15));

        let rep2 = clifford_rep(2).unwrap();
        let zero = LatticeSymbol::from_modes(2, []);
        let t = torus_trace_partial(&rep2, &TCoefficients::GradingPhase, &[zero.clone(), zero.clone(), zero], 30, &AntisymmetricForm::zero(2), DEFAULT_TUPLE_CAP)
            .unwrap();
        assert!(t.values.iter().all(|v| *v == ZERO));

        let big = LatticeSymbol::from_modes(2, (0..300).map(|i| (vec![i, 0], Complex64::new(1.0, 0.0))));
        let r = torus_trace_partial(&rep2, &TCoefficients::Identity, &[big.clone(), big.clone(), big], 4, &AntisymmetricForm::zero(2), DEFAULT_TUPLE_CAP);
        assert!(matches!(r, Err(Error::Resource { .. })));
    }

    #[test]
    fn ball_membership() {
        assert_eq!(n_min(&[0, 0], 2), Some(0));
        assert_eq!(n_min(&[3, 4], 2), Some(25));
        // |k| = sqrt 2 in 3 dimensions: N ≥ 2^{3/2}
        assert_eq!(n_min(&[1, 1, 0], 3), Some(3));
    }
}
