//! Ordered-Lidskii residue sequences, Cesàro and logarithmic averages, and a
//! classifier for the limiting behaviour of such sequences.
//!
//! Extended limits are not computable, so the classifier is a surrogate. A
//! `Convergent` verdict says the tail settles, so every extended limit would
//! agree with it. `Oscillating` reports two separated cluster values that
//! different extended limits can pick out. Anything else is `Inconclusive`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{BasisRule, TruncatedOperator};
use crate::spectral::least_squares;

/// `Res_N = Σ_{l≤N} ⟨G e_l, e_l⟩ / log(N+2)`, `N = 0..size-1`, in the order
/// of the operator's basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidueSequence {
    pub values: Vec<Complex64>,
    pub basis_rule: BasisRule,
}

impl ResidueSequence {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    /// Undoes the `log(N+2)` normalization: the raw partial sums.
    pub fn partial_sums(&self) -> Vec<Complex64> {
        self.values
            .iter()
            .enumerate()
            .map(|(n, v)| v * ((n + 2) as f64).ln())
            .collect()
    }
}

pub fn residue_sequence(op: &TruncatedOperator) -> Result<ResidueSequence> {
    if !op.is_square_same_basis() {
        return Err(Error::BasisMismatch("residue sequence needs equal row and column bases".into()));
    }
    let rule = op.row_basis.rule;
    if rule == BasisRule::AntiHardy {
        return Err(Error::BasisMismatch("residue sequence needs a Hardy or full-circle basis".into()));
    }
    Ok(ResidueSequence {
        values: residue_from_diagonal(&op.diagonal_entries()),
        basis_rule: rule,
    })
}

/// Residue sequence of the given ordered diagonal.
pub fn residue_from_diagonal(diag: &[Complex64]) -> Vec<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    diag.iter()
        .enumerate()
        .map(|(n, d)| {
            acc += d;
            acc / ((n + 2) as f64).ln()
        })
        .collect()
}

/// `C(x)_N = (1/(N+1)) Σ_{n≤N} x_n`.
pub fn cesaro_mean(x: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    x.iter()
        .enumerate()
        .map(|(n, v)| {
            acc += v;
            acc / (n + 1) as f64
        })
        .collect()
}

/// `(Mx)_k = (Σ_{l≤k} x_l/(l+1)) / log(k+2)`.
pub fn m_transform(x: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    x.iter()
        .enumerate()
        .map(|(l, v)| {
            acc += v / (l + 1) as f64;
            acc / ((l + 2) as f64).ln()
        })
        .collect()
}

/// Values at `N = γ^m - 1 + offset` for `m = 0, 1, ...` inside the sequence,
/// as `(N, x_N)`. With `offset = 1` these are the indices `N = γ^m`.
pub fn gamma_adic_probe(x: &[f64], gamma: u64, offset: u64) -> Vec<(u64, f64)> {
    assert!(gamma >= 2);
    std::iter::successors(Some(1u64), |p| p.checked_mul(gamma))
        .map(|p| p - 1 + offset)
        .take_while(|&n| n < x.len() as u64)
        .map(|n| (n, x[n as usize]))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyPolicy {
    pub window_count: usize,
    pub rel_gap: f64,
    pub abs_floor: f64,
    /// Windows are `[b^j, b^{j+1})`; 2 gives dyadic windows, `γ` gives the
    /// `γ`-adic probe.
    #[serde(default = "default_base")]
    pub window_base: u64,
}

fn default_base() -> u64 {
    2
}

impl Default for ClassifyPolicy {
    fn default() -> Self {
        Self {
            window_count: 5,
            rel_gap: 0.02,
            abs_floor: 1e-9,
            window_base: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    Convergent,
    Oscillating,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurabilityVerdict {
    pub kind: VerdictKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub limit: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub upper: Option<f64>,
    pub windows_used: usize,
    pub policy: ClassifyPolicy,
}

impl MeasurabilityVerdict {
    pub fn gap(&self) -> Option<f64> {
        Some(self.upper? - self.lower?)
    }
}

#[derive(Debug, Clone, Copy)]
struct Window {
    mean: f64,
    min: f64,
    max: f64,
}

/// Classifies the tail of `x` from its last `window_count` complete windows
/// `[b^j, b^{j+1})`.
///
/// Let `center` be the average of the window means and
/// `scale = max(|center|, abs_floor)`. If the window means spread by at most
/// `rel_gap · scale` the verdict is `Convergent(center)`. If they spread more
/// but move monotonically with shrinking steps (a slowly converging tail),
/// the verdict is `Inconclusive`. Otherwise it is `Oscillating`, with the
/// smallest and largest values seen inside those windows as clusters.
pub fn classify_limit(x: &[f64], policy: &ClassifyPolicy) -> Result<MeasurabilityVerdict> {
    let b = policy.window_base;
    if b < 2 || policy.window_count < 2 || !(policy.rel_gap > 0.0) || !(policy.abs_floor >= 0.0) {
        return Err(Error::InvalidParameter("classification policy is out of range".into()));
    }
    let needed = b
        .checked_pow(policy.window_count as u32 + 2)
        .and_then(|v| usize::try_from(v).ok())
        .ok_or_else(|| Error::InvalidParameter("window count too large".into()))?;
    if x.len() < needed {
        return Err(Error::SequenceTooShort { len: x.len(), needed });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("sequence has non-finite entries".into()));
    }

    let mut windows = Vec::new();
    let mut lo = 1usize;
    while let Some(hi) = lo.checked_mul(b as usize).filter(|&hi| hi <= x.len()) {
        let w = &x[lo..hi];
        windows.push(Window {
            mean: w.iter().sum::<f64>() / w.len() as f64,
            min: w.iter().copied().fold(f64::INFINITY, f64::min),
            max: w.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        });
        lo = hi;
    }
    let tail = &windows[windows.len() - policy.window_count..];
    let means: Vec<f64> = tail.iter().map(|w| w.mean).collect();
    let center = means.iter().sum::<f64>() / means.len() as f64;
    let scale = center.abs().max(policy.abs_floor);
    let spread = means.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - means.iter().copied().fold(f64::INFINITY, f64::min);

    let mut verdict = MeasurabilityVerdict {
        kind: VerdictKind::Inconclusive,
        limit: None,
        lower: None,
        upper: None,
        windows_used: tail.len(),
        policy: *policy,
    };
    if spread <= policy.rel_gap * scale {
        verdict.kind = VerdictKind::Convergent;
        verdict.limit = Some(center);
    } else if !settling(&means) {
        verdict.kind = VerdictKind::Oscillating;
        verdict.lower = Some(tail.iter().map(|w| w.min).fold(f64::INFINITY, f64::min));
        verdict.upper = Some(tail.iter().map(|w| w.max).fold(f64::NEG_INFINITY, f64::max));
    }
    Ok(verdict)
}

/// Monotone means whose step sizes do not grow.
fn settling(means: &[f64]) -> bool {
    let steps: Vec<f64> = means.windows(2).map(|w| w[1] - w[0]).collect();
    let monotone = steps.iter().all(|&s| s >= 0.0) || steps.iter().all(|&s| s <= 0.0);
    monotone && steps.windows(2).all(|s| s[1].abs() <= s[0].abs())
}

/// Least-squares fit `x_N ≈ L + C/log(N+2)` over the tail half; returns
/// `(L, C)`.
pub fn log_extrapolate(x: &[f64]) -> Result<(f64, f64)> {
    if x.len() < 16 {
        return Err(Error::SequenceTooShort { len: x.len(), needed: 16 });
    }
    let start = x.len() / 2;
    let idx: Vec<u64> = (start as u64..x.len() as u64).collect();
    Ok(log_fit(&idx, &x[start..], 2.0))
}

/// Fit `v ≈ L + C/log(N + offset)` through the tail half of sparse points
/// `(N, v)`; needs at least four points. Returns `(L, C)`.
pub fn log_extrapolate_points(indices: &[u64], values: &[f64], offset: f64) -> Result<(f64, f64)> {
    assert_eq!(indices.len(), values.len());
    if indices.len() < 4 {
        return Err(Error::SequenceTooShort { len: indices.len(), needed: 4 });
    }
    let start = indices.len() / 2;
    Ok(log_fit(&indices[start..], &values[start..], offset))
}

fn log_fit(indices: &[u64], values: &[f64], offset: f64) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = indices
        .iter()
        .zip(values)
        .map(|(&n, &v)| (1.0 / (n as f64 + offset).ln(), v))
        .collect();
    least_squares(&pts)
}

/// `(1/log M) Σ_{N=2}^{M} (-γ)^{⌊log_γ ⌊log_γ(N+1)⌋⌋} / (N log N)` for
/// `M = 2..len+1`, the divergent average whose failure to converge witnesses
/// that Dixmier traces of block-indicator Weierstrass products depend on the
/// extended limit. The `N = 1` term is omitted since `log 1 = 0`.
pub fn block_indicator_witness(gamma: u64, len: usize) -> Vec<f64> {
    assert!(gamma >= 2);
    let g = -(gamma as f64);
    let mut acc = 0.0;
    (2..len as u64 + 2)
        .map(|n| {
            let inner = (n + 1).ilog(gamma) as u64;
            acc += g.powi(inner.ilog(gamma) as i32) / (n as f64 * (n as f64).ln());
            acc / (n as f64).ln()
        })
        .collect()
}
