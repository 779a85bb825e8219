//! Dense truncations of `P`, multiplication operators, Hankel operators and
//! commutators `[P, a]` in explicit Fourier bases.
//!
//! Sign conventions follow from `[P,a] = P a (1-P) - (1-P) a P`. On the Hardy
//! space this gives `P[P,a][P,b] = -P a (1-P) b P`, which is what
//! [`compressed_product`] returns.

use faer::{c64, Mat};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::FourierSymbol;

/// How Fourier modes are laid out along a matrix axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisRule {
    /// `0, 1, ..., N-1`.
    HardyNatural,
    /// `0, 1, -1, 2, -2, ..., N, -N`: decreasing eigenvalues of
    /// `(1+Δ)^{-s}`, ties broken nonnegative first.
    FullByModulus,
    /// `-1, -2, ..., -N`: the columns of a Hankel matrix.
    AntiHardy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisIndexMap {
    pub rule: BasisRule,
    pub labels: Vec<i64>,
}

impl BasisIndexMap {
    pub fn hardy(n: usize) -> Self {
        Self {
            rule: BasisRule::HardyNatural,
            labels: (0..n as i64).collect(),
        }
    }

    /// Modes `-n..=n`, `2n+1` of them.
    pub fn full(n: usize) -> Self {
        let mut labels = Vec::with_capacity(2 * n + 1);
        labels.push(0);
        for m in 1..=n as i64 {
            labels.push(m);
            labels.push(-m);
        }
        Self {
            rule: BasisRule::FullByModulus,
            labels,
        }
    }

    pub fn anti_hardy(n: usize) -> Self {
        Self {
            rule: BasisRule::AntiHardy,
            labels: (1..=n as i64).map(|i| -i).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Position of mode `k` in this basis.
    pub fn position(&self, k: i64) -> Option<usize> {
        match self.rule {
            BasisRule::HardyNatural => usize::try_from(k).ok(),
            BasisRule::FullByModulus => Some(match k {
                0 => 0,
                k if k > 0 => 2 * k as usize - 1,
                k => 2 * k.unsigned_abs() as usize,
            }),
            BasisRule::AntiHardy => (k < 0).then(|| k.unsigned_abs() as usize - 1),
        }
        .filter(|&i| i < self.len())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedOperator {
    pub matrix: Mat<c64>,
    pub row_basis: BasisIndexMap,
    pub col_basis: BasisIndexMap,
}

impl TruncatedOperator {
    pub fn zeros(row_basis: BasisIndexMap, col_basis: BasisIndexMap) -> Self {
        Self {
            matrix: Mat::zeros(row_basis.len(), col_basis.len()),
            row_basis,
            col_basis,
        }
    }

    /// Matrix of a map given by its entries `(row mode, column mode)`.
    pub fn from_fn(
        row_basis: BasisIndexMap,
        col_basis: BasisIndexMap,
        mut f: impl FnMut(i64, i64) -> Complex64,
    ) -> Self {
        let matrix = Mat::from_fn(row_basis.len(), col_basis.len(), |i, j| {
            f(row_basis.labels[i], col_basis.labels[j])
        });
        Self {
            matrix,
            row_basis,
            col_basis,
        }
    }

    /// Diagonal operator with `values[i]` at basis position `i`.
    pub fn diagonal(basis: BasisIndexMap, values: &[Complex64]) -> Self {
        assert_eq!(basis.len(), values.len());
        let mut op = Self::zeros(basis.clone(), basis);
        for (i, v) in values.iter().enumerate() {
            op.matrix[(i, i)] = *v;
        }
        op
    }

    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn is_square_same_basis(&self) -> bool {
        self.row_basis == self.col_basis
    }

    /// Entry at `(row mode, column mode)`; zero outside the truncation.
    pub fn entry(&self, m: i64, l: i64) -> Complex64 {
        match (self.row_basis.position(m), self.col_basis.position(l)) {
            (Some(i), Some(j)) => self.matrix[(i, j)],
            _ => Complex64::new(0.0, 0.0),
        }
    }

    pub fn diagonal_entries(&self) -> Vec<Complex64> {
        (0..self.nrows().min(self.ncols())).map(|i| self.matrix[(i, i)]).collect()
    }

    pub fn trace(&self) -> Complex64 {
        self.diagonal_entries().into_iter().sum()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint().to_owned(),
            row_basis: self.col_basis.clone(),
            col_basis: self.row_basis.clone(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            matrix: Mat::from_fn(self.nrows(), self.ncols(), |i, j| self.matrix[(i, j)] * s),
            row_basis: self.row_basis.clone(),
            col_basis: self.col_basis.clone(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.row_basis != other.row_basis || self.col_basis != other.col_basis {
            return Err(Error::BasisMismatch("sum of operators on different bases".into()));
        }
        Ok(Self {
            matrix: &self.matrix + &other.matrix,
            row_basis: self.row_basis.clone(),
            col_basis: self.col_basis.clone(),
        })
    }

    /// Largest `|A_ij - B_ij|`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.nrows(), self.ncols()), (other.nrows(), other.ncols()));
        let mut d = 0.0f64;
        for j in 0..self.ncols() {
            for i in 0..self.nrows() {
                d = d.max((self.matrix[(i, j)] - other.matrix[(i, j)]).norm());
            }
        }
        d
    }

    pub fn max_abs(&self) -> f64 {
        let mut d = 0.0f64;
        for j in 0..self.ncols() {
            for i in 0..self.nrows() {
                d = d.max(self.matrix[(i, j)].norm());
            }
        }
        d
    }

    /// Largest deviation from self-adjointness, `max |A - A^H|`.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square_same_basis() {
            return f64::INFINITY;
        }
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_real(&self) -> bool {
        (0..self.ncols()).all(|j| (0..self.nrows()).all(|i| self.matrix[(i, j)].im == 0.0))
    }

    /// `(A + A^H)/2`.
    pub fn hermitian_part(&self) -> Result<Self> {
        if !self.is_square_same_basis() {
            return Err(Error::BasisMismatch("Hermitian part needs equal row and column bases".into()));
        }
        let adj = self.adjoint();
        Ok(Self {
            matrix: Mat::from_fn(self.nrows(), self.ncols(), |i, j| {
                (self.matrix[(i, j)] + adj.matrix[(i, j)]) * 0.5
            }),
            row_basis: self.row_basis.clone(),
            col_basis: self.col_basis.clone(),
        })
    }

    /// Restriction to the given row and column modes (which must be present).
    pub fn restrict(&self, rows: BasisIndexMap, cols: BasisIndexMap) -> Result<Self> {
        let ri = positions(&self.row_basis, &rows)?;
        let ci = positions(&self.col_basis, &cols)?;
        Ok(Self {
            matrix: Mat::from_fn(rows.len(), cols.len(), |i, j| self.matrix[(ri[i], ci[j])]),
            row_basis: rows,
            col_basis: cols,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&OperatorJson::from(self)).expect("operator serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: OperatorJson = serde_json::from_str(s).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        Self::try_from(j)
    }
}

fn positions(from: &BasisIndexMap, sub: &BasisIndexMap) -> Result<Vec<usize>> {
    sub.labels
        .iter()
        .map(|&k| {
            from.position(k)
                .ok_or_else(|| Error::BasisMismatch(format!("mode {k} is not in the source basis")))
        })
        .collect()
}

/// Export form: both bases plus row-major `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorJson {
    pub row_basis: BasisIndexMap,
    pub col_basis: BasisIndexMap,
    pub rows: Vec<Vec<[f64; 2]>>,
}

impl From<&TruncatedOperator> for OperatorJson {
    fn from(op: &TruncatedOperator) -> Self {
        let rows = (0..op.nrows())
            .map(|i| {
                (0..op.ncols())
                    .map(|j| {
                        let v = op.matrix[(i, j)];
                        [v.re, v.im]
                    })
                    .collect()
            })
            .collect();
        Self {
            row_basis: op.row_basis.clone(),
            col_basis: op.col_basis.clone(),
            rows,
        }
    }
}

impl TryFrom<OperatorJson> for TruncatedOperator {
    type Error = Error;

    fn try_from(j: OperatorJson) -> Result<Self> {
        for basis in [&j.row_basis, &j.col_basis] {
            let canonical = match basis.rule {
                BasisRule::HardyNatural => BasisIndexMap::hardy(basis.len()),
                BasisRule::AntiHardy => BasisIndexMap::anti_hardy(basis.len()),
                BasisRule::FullByModulus => BasisIndexMap::full(basis.len() / 2),
            };
            if &canonical != basis {
                return Err(Error::BasisMismatch("labels do not follow the declared rule".into()));
            }
        }
        let (r, c) = (j.row_basis.len(), j.col_basis.len());
        if j.rows.len() != r || j.rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidParameter("matrix shape does not match bases".into()));
        }
        if j.rows.iter().flatten().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite matrix entry".into()));
        }
        Ok(Self {
            matrix: Mat::from_fn(r, c, |i, k| {
                let [re, im] = j.rows[i][k];
                c64::new(re, im)
            }),
            row_basis: j.row_basis,
            col_basis: j.col_basis,
        })
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidParameter("truncation N must be >= 1".into()));
    }
    Ok(())
}

/// `P a (1-P)` on Hardy rows `0..N-1` and anti-holomorphic columns
/// `e_{-1-i}`: `H[l,i] = a_{l+i+1}`.
pub fn hankel_matrix(a: &FourierSymbol, n: usize) -> Result<TruncatedOperator> {
    check_n(n)?;
    let mut op = TruncatedOperator::zeros(BasisIndexMap::hardy(n), BasisIndexMap::anti_hardy(n));
    for (k, c) in a.modes().filter(|&(k, _)| k >= 1 && k < 2 * n as i64) {
        let s = (k - 1) as usize;
        for l in s.saturating_sub(n - 1)..=s.min(n - 1) {
            op.matrix[(l, s - l)] = c;
        }
    }
    Ok(op)
}

/// `(1-P) b P` from Hardy columns `0..N-1` to anti-holomorphic rows
/// `e_{-1-i}`: `K[i,l] = b_{-(i+l+1)}`.
pub fn anti_hankel_matrix(b: &FourierSymbol, n: usize) -> Result<TruncatedOperator> {
    check_n(n)?;
    let mut op = TruncatedOperator::zeros(BasisIndexMap::anti_hardy(n), BasisIndexMap::hardy(n));
    for (k, c) in b.modes().filter(|&(k, _)| k <= -1 && k > -(2 * n as i64)) {
        let s = (-k - 1) as usize;
        for i in s.saturating_sub(n - 1)..=s.min(n - 1) {
            op.matrix[(i, s - i)] = c;
        }
    }
    Ok(op)
}

/// Multiplication by `a` on modes `-N..=N`: entry `[m,l] = a_{m-l}`.
pub fn multiplication_matrix(a: &FourierSymbol, n: usize) -> Result<TruncatedOperator> {
    check_n(n)?;
    let basis = BasisIndexMap::full(n);
    Ok(build_sparse(a, basis, |_, _| true))
}

/// `[P, a]` on modes `-N..=N`: entry `[m,l] = (1_{m≥0} - 1_{l≥0}) a_{m-l}`.
pub fn commutator_matrix(a: &FourierSymbol, n: usize) -> Result<TruncatedOperator> {
    check_n(n)?;
    let mut op = build_sparse(a, BasisIndexMap::full(n), |m, l| (m >= 0) != (l >= 0));
    for j in 0..op.ncols() {
        for i in 0..op.nrows() {
            let (m, l) = (op.row_basis.labels[i], op.col_basis.labels[j]);
            if m < 0 {
                debug_assert!(l >= 0 || op.matrix[(i, j)] == c64::new(0.0, 0.0));
                op.matrix[(i, j)] = -op.matrix[(i, j)];
            }
        }
    }
    Ok(op)
}

fn build_sparse(
    a: &FourierSymbol,
    basis: BasisIndexMap,
    keep: impl Fn(i64, i64) -> bool,
) -> TruncatedOperator {
    let n = (basis.len() / 2) as i64;
    let mut op = TruncatedOperator::zeros(basis.clone(), basis);
    for (k, c) in a.modes().filter(|&(k, _)| k.abs() <= 2 * n) {
        for l in (-n).max(-n - k)..=n.min(n - k) {
            let m = l + k;
            if keep(m, l) {
                let (i, j) = (op.row_basis.position(m).unwrap(), op.col_basis.position(l).unwrap());
                op.matrix[(i, j)] = c;
            }
        }
    }
    op
}

/// `P` on modes `-N..=N`.
pub fn projection_matrix(n: usize) -> Result<TruncatedOperator> {
    check_n(n)?;
    let basis = BasisIndexMap::full(n);
    let d: Vec<Complex64> = basis.labels.iter().map(|&m| c64::new(f64::from(m >= 0), 0.0)).collect();
    Ok(TruncatedOperator::diagonal(basis, &d))
}

/// `2P - 1` on modes `-N..=N`.
pub fn szego_reflection(n: usize) -> Result<TruncatedOperator> {
    check_n(n)?;
    let basis = BasisIndexMap::full(n);
    let d: Vec<Complex64> = basis
        .labels
        .iter()
        .map(|&m| c64::new(if m >= 0 { 1.0 } else { -1.0 }, 0.0))
        .collect();
    Ok(TruncatedOperator::diagonal(basis, &d))
}

/// Ordered matrix product `ops[0] · ops[1] · ...`.
pub fn operator_product(ops: &[TruncatedOperator]) -> Result<TruncatedOperator> {
    let (first, rest) = ops
        .split_first()
        .ok_or_else(|| Error::InvalidParameter("empty operator product".into()))?;
    let mut acc = first.clone();
    for (i, op) in rest.iter().enumerate() {
        if acc.col_basis != op.row_basis {
            return Err(Error::BasisMismatch(format!(
                "factor {} columns do not match factor {} rows",
                i,
                i + 1
            )));
        }
        acc = TruncatedOperator {
            matrix: &acc.matrix * &op.matrix,
            row_basis: acc.row_basis,
            col_basis: op.col_basis.clone(),
        };
    }
    Ok(acc)
}

/// `P[P,a][P,b]` compressed to Hardy modes `0..N-1`, computed as
/// `-H(a)·K(b)` with `K(b)[i,l] = b_{-(i+l+1)}`. Entries with both modes at
/// most `N - d` agree with the untruncated operator when `d` bounds the
/// degree of `b_-`.
pub fn compressed_product(a: &FourierSymbol, b: &FourierSymbol, n: usize) -> Result<TruncatedOperator> {
    let h = hankel_matrix(a, n)?;
    let k = anti_hankel_matrix(b, n)?;
    Ok(operator_product(&[h, k])?.scale(c64::new(-1.0, 0.0)))
}

/// Modes `0..safe_band(N, d)` of a truncation at `N` are free of boundary
/// effects for symbols of degree `d`.
pub fn safe_band(n: usize, degree: u64) -> usize {
    n.saturating_sub(degree as usize)
}
