//! Singular values, Hermitian eigenvalues, weak-Schatten quasinorms and
//! log-log decay fits.

use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::TruncatedOperator;

/// Singular values `μ_0 ≥ μ_1 ≥ ... ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularSpectrum {
    pub mu: Vec<f64>,
}

impl SingularSpectrum {
    /// Sorts and validates raw values.
    pub fn from_values(mut mu: Vec<f64>) -> Result<Self> {
        if mu.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Decomposition("singular values must be finite and nonnegative".into()));
        }
        mu.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { mu })
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    /// Number of values above `tol`.
    pub fn numerical_rank(&self, tol: f64) -> usize {
        self.mu.iter().take_while(|&&m| m > tol).count()
    }
}

fn decomposition_err(e: impl std::fmt::Debug) -> Error {
    Error::Decomposition(format!("{e:?}"))
}

/// Full singular spectrum. Real matrices go through the real solvers, and
/// real symmetric ones (every Hankel truncation) through the symmetric
/// eigensolver, whose absolute eigenvalues are the singular values.
pub fn singular_values(op: &TruncatedOperator) -> Result<SingularSpectrum> {
    let (r, c) = (op.nrows(), op.ncols());
    if r == 0 || c == 0 {
        return Ok(SingularSpectrum { mu: Vec::new() });
    }
    let m = &op.matrix;
    if op.max_abs().is_nan() {
        return Err(Error::Decomposition("matrix has non-finite entries".into()));
    }
    let raw = if op.is_real() {
        let re = Mat::<f64>::from_fn(r, c, |i, j| m[(i, j)].re);
        let symmetric = r == c && (0..c).all(|j| (0..j).all(|i| re[(i, j)] == re[(j, i)]));
        if symmetric {
            re.self_adjoint_eigenvalues(Side::Lower)
                .map_err(decomposition_err)?
                .into_iter()
                .map(f64::abs)
                .collect()
        } else {
            re.singular_values().map_err(decomposition_err)?
        }
    } else {
        m.singular_values().map_err(decomposition_err)?
    };
    SingularSpectrum::from_values(raw)
}

/// `sup_k (1+k)^{1/p} μ_k` over the available spectrum.
pub fn weak_quasinorm(spec: &SingularSpectrum, p: f64) -> f64 {
    assert!(p >= 1.0, "p must be >= 1, got {p}");
    spec.mu
        .iter()
        .enumerate()
        .map(|(k, &m)| (1.0 + k as f64).powf(1.0 / p) * m)
        .fold(0.0, f64::max)
}

/// Unweighted least-squares slope of `log μ_k` against `log k` over the
/// inclusive window `k_lo..=k_hi`.
pub fn decay_slope(spec: &SingularSpectrum, k_lo: usize, k_hi: usize) -> Result<f64> {
    if k_lo < 1 || k_lo >= k_hi || k_hi >= spec.len() {
        return Err(Error::InvalidParameter(format!(
            "fit window [{k_lo}, {k_hi}] invalid for spectrum of length {}",
            spec.len()
        )));
    }
    if let Some(k) = (k_lo..=k_hi).find(|&k| spec.mu[k] <= 0.0) {
        return Err(Error::ZeroInWindow(k));
    }
    let pts: Vec<(f64, f64)> = (k_lo..=k_hi).map(|k| ((k as f64).ln(), spec.mu[k].ln())).collect();
    Ok(least_squares(&pts).1)
}

/// `(intercept, slope)` of the least-squares line through `pts`.
pub(crate) fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    (my - slope * mx, slope)
}

/// Tolerance for self-adjointness checks.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Real eigenvalues sorted by decreasing modulus, with `±λ` ties (up to
/// rounding) listed positive first.
///
/// Without `use_hermitian_part` the operator must equal its adjoint to
/// [`HERMITIAN_TOL`]; with it, `(G + G^H)/2` is diagonalized instead.
pub fn hermitian_eigenvalues(op: &TruncatedOperator, use_hermitian_part: bool) -> Result<Vec<f64>> {
    if !op.is_square_same_basis() {
        return Err(Error::BasisMismatch("eigenvalues need equal row and column bases".into()));
    }
    let h = if use_hermitian_part {
        op.hermitian_part()?
    } else {
        let deviation = op.hermitian_deviation();
        if !(deviation <= HERMITIAN_TOL) {
            return Err(Error::NotHermitian { deviation });
        }
        op.clone()
    };
    if h.nrows() == 0 {
        return Ok(Vec::new());
    }
    let vals = if h.is_real() {
        let re = Mat::<f64>::from_fn(h.nrows(), h.ncols(), |i, j| h.matrix[(i, j)].re);
        re.self_adjoint_eigenvalues(Side::Lower).map_err(decomposition_err)?
    } else {
        h.matrix.self_adjoint_eigenvalues(Side::Lower).map_err(decomposition_err)?
    };
    Ok(order_by_modulus(vals))
}

/// Sorts by decreasing `|λ|`, grouping moduli equal up to a relative
/// `1e-12` and ordering each group by decreasing value.
pub fn order_by_modulus(mut vals: Vec<f64>) -> Vec<f64> {
    vals.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    let scale = vals.first().map_or(0.0, |v| v.abs());
    let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let mut out = Vec::with_capacity(vals.len());
    let mut i = 0;
    while i < vals.len() {
        let lead = vals[i].abs();
        let mut j = i + 1;
        while j < vals.len() && lead - vals[j].abs() <= tol {
            j += 1;
        }
        let mut group = vals[i..j].to_vec();
        group.sort_by(|a, b| b.total_cmp(a));
        out.extend(group);
        i = j;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::FourierSymbol;
    use crate::operators::{
        compressed_product, hankel_matrix, operator_product, szego_reflection, BasisIndexMap,
    };
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn singular_value_examples() {
        let h = hankel_matrix(&FourierSymbol::monomial(1, c(1.0)), 8).unwrap();
        let s = singular_values(&h).unwrap();
        assert_eq!(s.len(), 8);
        assert!((s.mu[0] - 1.0).abs() < 1e-15);
        assert!(s.mu[1..].iter().all(|&m| m < 1e-15));

        let z = TruncatedOperator::zeros(BasisIndexMap::hardy(3), BasisIndexMap::anti_hardy(5));
        assert_eq!(singular_values(&z).unwrap().mu, vec![0.0; 3]);
    }

    #[test]
    fn complex_and_rectangular_paths_agree_with_known_values() {
        // diag(3i, -2, 1) padded to a 3x4 matrix
        let mut op = TruncatedOperator::zeros(BasisIndexMap::hardy(3), BasisIndexMap::hardy(4));
        op.matrix[(0, 0)] = Complex64::new(0.0, 3.0);
        op.matrix[(1, 1)] = c(-2.0);
        op.matrix[(2, 2)] = c(1.0);
        let s = singular_values(&op).unwrap();
        for (got, want) in s.mu.iter().zip([3.0, 2.0, 1.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        // real, non-symmetric
        let mut op = TruncatedOperator::zeros(BasisIndexMap::hardy(2), BasisIndexMap::hardy(2));
        op.matrix[(0, 1)] = c(5.0);
        let s = singular_values(&op).unwrap();
        assert!((s.mu[0] - 5.0).abs() < 1e-14 && s.mu[1].abs() < 1e-14);
    }

    #[test]
    fn quasinorm_examples() {
        let s = SingularSpectrum::from_values((0..50).map(|k| 1.0 / (1.0 + k as f64)).collect()).unwrap();
        assert!((weak_quasinorm(&s, 1.0) - 1.0).abs() < 1e-14);
        let s = SingularSpectrum::from_values(vec![1.0, 0.0, 0.0]).unwrap();
        for p in [1.0, 2.0, 7.5] {
            assert_eq!(weak_quasinorm(&s, p), 1.0);
        }
    }

    #[test]
    fn quasinorm_monotone_in_p() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let mut v: Vec<f64> = (0..64).map(|_| rng.random::<f64>()).collect();
            v.push(1.0);
            let s = SingularSpectrum::from_values(v).unwrap();
            let norms: Vec<f64> = [1.0, 1.5, 2.0, 3.0, 10.0].iter().map(|&p| weak_quasinorm(&s, p)).collect();
            assert!(norms.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn slope_examples() {
        let s = SingularSpectrum::from_values((0..4096).map(|k| 2.5 * (k.max(1) as f64).powf(-0.7)).collect()).unwrap();
        assert!((decay_slope(&s, 4, 4000).unwrap() + 0.7).abs() < 1e-10);

        let s = SingularSpectrum::from_values((0..1 << 16).map(|k| (1.0 + k as f64).powf(-0.5)).collect()).unwrap();
        let narrow = decay_slope(&s, 2, 16).unwrap();
        let wide = decay_slope(&s, 1 << 10, (1 << 16) - 1).unwrap();
        assert!((wide + 0.5).abs() < (narrow + 0.5).abs());
        assert!((wide + 0.5).abs() < 1e-3);

        let s = SingularSpectrum::from_values(vec![1.0, 0.5, 0.0, 0.0]).unwrap();
        assert_eq!(decay_slope(&s, 1, 3), Err(Error::ZeroInWindow(2)));
        assert!(decay_slope(&s, 0, 2).is_err());
        assert!(decay_slope(&s, 1, 4).is_err());
    }

    #[test]
    fn eigenvalue_examples() {
        let e = hermitian_eigenvalues(&szego_reflection(2).unwrap(), false).unwrap();
        assert_eq!(e, vec![1.0, 1.0, 1.0, -1.0, -1.0]);

        let h = hankel_matrix(&FourierSymbol::monomial(1, c(1.0)), 5).unwrap();
        let g = operator_product(&[h.clone(), h.adjoint()]).unwrap().scale(c(-1.0));
        let e = hermitian_eigenvalues(&g, false).unwrap();
        assert!((e[0] + 1.0).abs() < 1e-14);
        assert!(e[1..].iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn eigen_rejects_non_hermitian() {
        let mut op = TruncatedOperator::zeros(BasisIndexMap::hardy(2), BasisIndexMap::hardy(2));
        op.matrix[(0, 1)] = c(1.0);
        assert!(matches!(hermitian_eigenvalues(&op, false), Err(Error::NotHermitian { .. })));
        let e = hermitian_eigenvalues(&op, true).unwrap();
        assert_eq!(e.len(), 2);
        assert!((e[0] - 0.5).abs() < 1e-15 && (e[1] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn compressed_product_with_conjugate_is_self_adjoint() {
        let w = FourierSymbol::cosine(1).add(&FourierSymbol::cosine(4).scale(c(0.5)));
        let g = compressed_product(&w, &w, 32).unwrap();
        assert!(g.hermitian_deviation() < 1e-15);
        let re = g.hermitian_part().unwrap();
        assert!(re.max_abs_diff(&g) < 1e-15);
    }

    #[test]
    fn self_adjoint_spectrum_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 24;
        let a = TruncatedOperator::from_fn(BasisIndexMap::hardy(n), BasisIndexMap::hardy(n), |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let h = a.hermitian_part().unwrap();
        let e = hermitian_eigenvalues(&h, false).unwrap();
        let mut abs: Vec<f64> = e.iter().map(|v| v.abs()).collect();
        abs.sort_by(|x, y| y.total_cmp(x));
        let s = singular_values(&h).unwrap();
        for (x, y) in abs.iter().zip(&s.mu) {
            assert!((x - y).abs() < 1e-10);
        }
        assert!((e.iter().sum::<f64>() - h.trace().re).abs() < 1e-10);

        // unitary reordering of the basis leaves singular values unchanged
        let perm: Vec<usize> = (0..n).rev().collect();
        let mut b = a.clone();
        for i in 0..n {
            for j in 0..n {
                b.matrix[(i, j)] = a.matrix[(perm[i], perm[j])];
            }
        }
        let (sa, sb) = (singular_values(&a).unwrap(), singular_values(&b).unwrap());
        for (x, y) in sa.mu.iter().zip(&sb.mu) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn tie_ordering() {
        assert_eq!(order_by_modulus(vec![-2.0, 0.5, 2.0, -0.5, 1.0]), vec![2.0, -2.0, 1.0, 0.5, -0.5]);
    }
}
