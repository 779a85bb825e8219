//! Symbols as finitely supported Fourier series on the circle.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sparse Fourier data `a = Σ_k a_k e_k` with `e_k(θ) = e^{ikθ}`.
///
/// Zero coefficients are never stored. `real_valued` is computed on
/// construction and holds exactly when `a_{-k} = conj(a_k)` for every stored
/// mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SymbolJson", into = "SymbolJson")]
pub struct FourierSymbol {
    coeffs: BTreeMap<i64, Complex64>,
    real_valued: bool,
}

/// Interchange form: `{"modes": [[k, re, im], ...]}` sorted by `k`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymbolJson {
    pub modes: Vec<(i64, f64, f64)>,
}

impl TryFrom<SymbolJson> for FourierSymbol {
    type Error = Error;

    fn try_from(json: SymbolJson) -> Result<Self> {
        if json.modes.iter().any(|&(_, re, im)| !re.is_finite() || !im.is_finite()) {
            return Err(Error::InvalidParameter("non-finite symbol coefficient".into()));
        }
        Ok(FourierSymbol::from_modes(
            json.modes.into_iter().map(|(k, re, im)| (k, Complex64::new(re, im))),
        ))
    }
}

impl From<FourierSymbol> for SymbolJson {
    fn from(a: FourierSymbol) -> Self {
        SymbolJson {
            modes: a.coeffs.iter().map(|(&k, c)| (k, c.re, c.im)).collect(),
        }
    }
}

impl Default for FourierSymbol {
    fn default() -> Self {
        Self::zero()
    }
}

impl FourierSymbol {
    pub fn zero() -> Self {
        Self {
            coeffs: BTreeMap::new(),
            real_valued: true,
        }
    }

    /// Builds a symbol from `(mode, coefficient)` pairs. Repeated modes are
    /// summed and exact zeros dropped.
    pub fn from_modes(modes: impl IntoIterator<Item = (i64, Complex64)>) -> Self {
        let mut coeffs: BTreeMap<i64, Complex64> = BTreeMap::new();
        for (k, c) in modes {
            *coeffs.entry(k).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        coeffs.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        Self::from_canonical(coeffs)
    }

    fn from_canonical(coeffs: BTreeMap<i64, Complex64>) -> Self {
        let real_valued = coeffs
            .iter()
            .all(|(&k, c)| coeffs.get(&-k).is_some_and(|m| *m == c.conj()));
        Self {
            coeffs,
            real_valued,
        }
    }

    pub fn monomial(k: i64, c: Complex64) -> Self {
        Self::from_modes([(k, c)])
    }

    pub fn constant(c: Complex64) -> Self {
        Self::monomial(0, c)
    }

    /// `cos(kθ) = (e_k + e_{-k}) / 2`.
    pub fn cosine(k: i64) -> Self {
        Self::from_modes([(k, Complex64::new(0.5, 0.0)), (-k, Complex64::new(0.5, 0.0))])
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        self.coeffs.get(&k).copied().unwrap_or_default()
    }

    pub fn modes(&self) -> impl DoubleEndedIterator<Item = (i64, Complex64)> + '_ {
        self.coeffs.iter().map(|(&k, &c)| (k, c))
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_real_valued(&self) -> bool {
        self.real_valued
    }

    /// Largest `|k|` with a nonzero coefficient (0 for the zero symbol).
    pub fn n_max(&self) -> u64 {
        let lo = self.coeffs.keys().next().map_or(0, |k| k.unsigned_abs());
        let hi = self.coeffs.keys().next_back().map_or(0, |k| k.unsigned_abs());
        lo.max(hi)
    }

    /// Largest positive mode (0 if there is none).
    pub fn max_positive_mode(&self) -> u64 {
        self.coeffs
            .keys()
            .next_back()
            .filter(|&&k| k > 0)
            .map_or(0, |&k| k as u64)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_modes(self.modes().map(|(k, c)| (k, c * s)))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_modes(self.modes().chain(other.modes()))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_modes(self.modes().chain(other.modes().map(|(k, c)| (k, -c))))
    }

    /// Pointwise complex conjugate: `conj(a)_k = conj(a_{-k})`.
    pub fn conj(&self) -> Self {
        Self::from_modes(self.modes().map(|(k, c)| (-k, c.conj())))
    }

    /// Pointwise product (sparse convolution of coefficients).
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.support_len() * other.support_len());
        for (k, c) in self.modes() {
            for (j, d) in other.modes() {
                out.push((k + j, c * d));
            }
        }
        Self::from_modes(out)
    }

    /// Keeps only the modes satisfying `keep`.
    pub fn filter_modes(&self, keep: impl Fn(i64) -> bool) -> Self {
        Self::from_canonical(
            self.coeffs
                .iter()
                .filter(|(&k, _)| keep(k))
                .map(|(&k, &c)| (k, c))
                .collect(),
        )
    }

    /// Largest coefficient difference against `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .keys()
            .chain(other.coeffs.keys())
            .map(|&k| (self.coeff(k) - other.coeff(k)).norm())
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("symbol serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidParameter(e.to_string()))
    }
}

/// How a finite prefix of a coefficient sequence `c_n` is continued.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extension {
    /// `c_n = 0` past the prefix.
    Zero,
    /// `c_n = value` past the prefix.
    Constant(f64),
    /// The prefix repeats.
    Periodic,
    /// Indicator of `ℕ \ ∪_k [γ^{2k}, γ^{2k+1})` with the given base `γ`.
    BlockIndicator(u64),
    /// `sqrt(2 + cos(log n))`, with `log` read as 0 at `n = 0`.
    SqrtTwoPlusCosLog,
}

/// A bounded real sequence: explicit prefix values, then an extension rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CSequence {
    #[serde(default)]
    pub values: Vec<f64>,
    pub extend: Extension,
}

impl CSequence {
    pub fn constant(v: f64) -> Self {
        Self {
            values: Vec::new(),
            extend: Extension::Constant(v),
        }
    }

    pub fn finite(values: Vec<f64>) -> Self {
        Self {
            values,
            extend: Extension::Zero,
        }
    }

    pub fn periodic(values: Vec<f64>) -> Self {
        Self {
            values,
            extend: Extension::Periodic,
        }
    }

    pub fn block_indicator(gamma: u64) -> Self {
        Self {
            values: Vec::new(),
            extend: Extension::BlockIndicator(gamma),
        }
    }

    pub fn sqrt_two_plus_cos_log() -> Self {
        Self {
            values: Vec::new(),
            extend: Extension::SqrtTwoPlusCosLog,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("c-sequence has non-finite entries".into()));
        }
        match self.extend {
            Extension::Constant(v) if !v.is_finite() => Err(Error::InvalidParameter(
                "c-sequence constant tail is not finite".into(),
            )),
            Extension::Periodic if self.values.is_empty() => Err(Error::InvalidParameter(
                "periodic c-sequence needs at least one value".into(),
            )),
            Extension::BlockIndicator(g) if g < 2 => Err(Error::InvalidParameter(format!(
                "block indicator base must be >= 2, got {g}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn value(&self, n: u64) -> f64 {
        if let Some(&v) = usize::try_from(n).ok().and_then(|i| self.values.get(i)) {
            return v;
        }
        match self.extend {
            Extension::Zero => 0.0,
            Extension::Constant(v) => v,
            Extension::Periodic => self.values[(n % self.values.len() as u64) as usize],
            Extension::BlockIndicator(gamma) => block_indicator(gamma, n),
            Extension::SqrtTwoPlusCosLog => (2.0 + (n.max(1) as f64).ln().cos()).sqrt(),
        }
    }

    pub fn take(&self, len: usize) -> Vec<f64> {
        (0..len as u64).map(|n| self.value(n)).collect()
    }
}

/// `⌊log_γ n⌋` for `n ≥ 1`, computed in integers.
pub(crate) fn ilog(gamma: u64, n: u64) -> u32 {
    debug_assert!(gamma >= 2 && n >= 1);
    n.ilog(gamma)
}

fn block_indicator(gamma: u64, n: u64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    if ilog(gamma, n) % 2 == 0 {
        0.0
    } else {
        1.0
    }
}

/// Parameters of `W_{α,γ,c}(θ) = 2 Σ_n γ^{-αn} c_n cos(γ^n θ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeierstrassParams {
    pub alpha: f64,
    pub gamma: u64,
    pub c: CSequence,
}

impl WeierstrassParams {
    pub fn new(alpha: f64, gamma: u64, c: CSequence) -> Result<Self> {
        let p = Self { alpha, gamma, c };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0,1), got {}",
                self.alpha
            )));
        }
        if self.gamma < 2 {
            return Err(Error::InvalidParameter(format!(
                "gamma must be >= 2, got {}",
                self.gamma
            )));
        }
        self.c.validate()
    }

    /// Lacunary levels `(n, γ^n)` with `γ^n ≤ cutoff`.
    pub fn levels(&self, cutoff: u64) -> impl Iterator<Item = (u64, u64)> + '_ {
        let gamma = self.gamma;
        std::iter::successors(Some(1u64), move |&p| p.checked_mul(gamma))
            .take_while(move |&p| p <= cutoff)
            .enumerate()
            .map(|(n, p)| (n as u64, p))
    }
}

/// Fourier data of `W_{α,γ,c}` truncated to modes `|k| ≤ k_cutoff`: the
/// coefficient `γ^{-αn} c_n` sits at both `±γ^n`.
pub fn weierstrass_symbol(params: &WeierstrassParams, k_cutoff: u64) -> Result<FourierSymbol> {
    params.validate()?;
    if k_cutoff < 1 {
        return Err(Error::InvalidParameter("k_cutoff must be >= 1".into()));
    }
    let g = params.gamma as f64;
    let mut modes = Vec::new();
    for (n, p) in params.levels(k_cutoff) {
        let amp = g.powf(-params.alpha * n as f64) * params.c.value(n);
        let k = i64::try_from(p).map_err(|_| Error::InvalidParameter("mode overflow".into()))?;
        modes.push((k, Complex64::new(amp, 0.0)));
        modes.push((-k, Complex64::new(amp, 0.0)));
    }
    Ok(FourierSymbol::from_modes(modes))
}

/// Default pruning threshold for FFT-derived symbols, relative to the
/// largest coefficient.
pub const DEFAULT_PRUNE: f64 = 1e-13;

/// Fourier coefficients of samples on the uniform grid `θ_j = 2πj/G`,
/// normalized so that sampling `e_k` returns 1 at mode `k`. Modes are folded
/// to `[-G/2, G/2)`.
pub fn sample_to_symbol(samples: &[Complex64]) -> Result<FourierSymbol> {
    sample_to_symbol_pruned(samples, DEFAULT_PRUNE)
}

/// As [`sample_to_symbol`], dropping coefficients with modulus at most
/// `rel_prune` times the largest one.
pub fn sample_to_symbol_pruned(samples: &[Complex64], rel_prune: f64) -> Result<FourierSymbol> {
    let g = samples.len();
    if g == 0 || !g.is_power_of_two() {
        return Err(Error::NonPowerOfTwo(g));
    }
    let mut buf = samples.to_vec();
    FftPlanner::new().plan_fft_forward(g).process(&mut buf);
    let inv = 1.0 / g as f64;
    let max = buf.iter().map(|c| c.norm()).fold(0.0, f64::max) * inv;
    let cut = rel_prune * max;
    let half = (g / 2) as i64;
    let modes = buf.into_iter().enumerate().filter_map(|(j, c)| {
        let c = c * inv;
        if c.norm() <= cut {
            return None;
        }
        let j = j as i64;
        let k = if j >= half { j - g as i64 } else { j };
        Some((k, c))
    });
    Ok(FourierSymbol::from_modes(modes))
}

/// `Σ_k a_k e^{ikθ}` at each angle.
pub fn symbol_eval(a: &FourierSymbol, angles: &[f64]) -> Vec<Complex64> {
    angles
        .iter()
        .map(|&theta| {
            a.modes()
                .map(|(k, c)| c * Complex64::from_polar(1.0, k as f64 * theta))
                .sum()
        })
        .collect()
}

/// Samples of `a` on the uniform `g`-point grid. Phases are reduced modulo
/// `g` in integer arithmetic, so large modes stay exact.
pub fn sample_grid(a: &FourierSymbol, g: usize) -> Vec<Complex64> {
    let roots = unit_roots(g);
    let gi = g as i64;
    let mut out = vec![Complex64::new(0.0, 0.0); g];
    for (k, c) in a.modes() {
        let step = k.rem_euclid(gi) as usize;
        let mut idx = 0usize;
        for v in out.iter_mut() {
            *v += c * roots[idx];
            idx += step;
            if idx >= g {
                idx -= g;
            }
        }
    }
    out
}

/// `e^{2πi m/g}` for `m = 0..g`.
pub fn unit_roots(g: usize) -> Vec<Complex64> {
    (0..g)
        .map(|m| Complex64::from_polar(1.0, 2.0 * PI * m as f64 / g as f64))
        .collect()
}

pub fn grid_angles(g: usize) -> Vec<f64> {
    (0..g).map(|j| 2.0 * PI * j as f64 / g as f64).collect()
}

/// `(a_+, a_-)` with `a_+ = P a` keeping modes `k ≥ 0` and `a_- = a - a_+`.
pub fn hardy_split(a: &FourierSymbol) -> (FourierSymbol, FourierSymbol) {
    (a.filter_modes(|k| k >= 0), a.filter_modes(|k| k < 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn w_half_two_one(cutoff: u64) -> FourierSymbol {
        let p = WeierstrassParams::new(0.5, 2, CSequence::constant(1.0)).unwrap();
        weierstrass_symbol(&p, cutoff).unwrap()
    }

    #[test]
    fn weierstrass_coefficient_at_level_two() {
        let a = w_half_two_one(16);
        assert_eq!(a.coeff(4), c(0.5));
        assert_eq!(a.coeff(-4), c(0.5));
        assert!(a.is_real_valued());
        let modes: Vec<i64> = a.modes().map(|(k, _)| k).collect();
        assert_eq!(modes, vec![-16, -8, -4, -2, -1, 1, 2, 4, 8, 16]);
    }

    #[test]
    fn weierstrass_zero_sequence_gives_zero_symbol() {
        let p = WeierstrassParams::new(0.5, 2, CSequence::constant(0.0)).unwrap();
        assert!(weierstrass_symbol(&p, 16).unwrap().is_zero());
    }

    #[test]
    fn weierstrass_periodic_base_three() {
        let p = WeierstrassParams::new(0.3, 3, CSequence::periodic(vec![1.0, 2.0])).unwrap();
        let a = weierstrass_symbol(&p, 100).unwrap();
        let modes: Vec<i64> = a.modes().map(|(k, _)| k).collect();
        assert_eq!(modes, vec![-81, -27, -9, -3, -1, 1, 3, 9, 27, 81]);
        assert!((a.coeff(9).re - 3f64.powf(-0.6)).abs() < 1e-15);
        assert!((a.coeff(3).re - 2.0 * 3f64.powf(-0.3)).abs() < 1e-15);
        // the sampled function has the same coefficients
        let back = sample_to_symbol(&sample_grid(&a, 256)).unwrap();
        assert!(back.max_abs_diff(&a) < 1e-12);
    }

    #[test]
    fn weierstrass_rejects_bad_params() {
        for (alpha, gamma) in [(0.0, 2), (1.0, 2), (-0.2, 2), (0.5, 1), (f64::NAN, 2)] {
            let p = WeierstrassParams {
                alpha,
                gamma,
                c: CSequence::constant(1.0),
            };
            assert!(matches!(
                weierstrass_symbol(&p, 8),
                Err(Error::InvalidParameter(_))
            ));
        }
    }

    #[test]
    fn sampling_pure_mode_and_constant() {
        let g = 16;
        let samples: Vec<_> = grid_angles(g)
            .iter()
            .map(|&t| Complex64::from_polar(1.0, 3.0 * t))
            .collect();
        let a = sample_to_symbol_pruned(&samples, 0.0).unwrap();
        assert!((a.coeff(3) - c(1.0)).norm() < 1e-15);
        for (k, v) in a.modes().filter(|&(k, _)| k != 3) {
            assert!(v.norm() < 1e-12, "mode {k} = {v}");
        }
        let two = sample_to_symbol(&vec![c(2.0); g]).unwrap();
        assert_eq!(two.support_len(), 1);
        assert!((two.coeff(0) - c(2.0)).norm() < 1e-15);
    }

    #[test]
    fn sampling_weierstrass_round_trip() {
        let a = w_half_two_one(8);
        let samples = symbol_eval(&a, &grid_angles(64));
        let back = sample_to_symbol(&samples).unwrap();
        assert!(back.max_abs_diff(&a) < 1e-12);
    }

    #[test]
    fn sampling_rejects_non_power_of_two() {
        assert_eq!(sample_to_symbol(&[c(1.0); 12]), Err(Error::NonPowerOfTwo(12)));
        assert_eq!(sample_to_symbol(&[]), Err(Error::NonPowerOfTwo(0)));
    }

    #[test]
    fn hardy_split_examples() {
        let a = FourierSymbol::from_modes([(1, c(1.0)), (-1, c(1.0))]);
        let (p, m) = hardy_split(&a);
        assert_eq!(p, FourierSymbol::monomial(1, c(1.0)));
        assert_eq!(m, FourierSymbol::monomial(-1, c(1.0)));

        let (p, m) = hardy_split(&FourierSymbol::constant(c(1.0)));
        assert_eq!(p, FourierSymbol::constant(c(1.0)));
        assert!(m.is_zero());

        let (p, m) = hardy_split(&w_half_two_one(8));
        assert_eq!(p.modes().map(|(k, _)| k).collect::<Vec<_>>(), vec![1, 2, 4, 8]);
        assert_eq!(m.modes().map(|(k, _)| k).collect::<Vec<_>>(), vec![-8, -4, -2, -1]);
    }

    #[test]
    fn eval_examples() {
        let z = FourierSymbol::monomial(1, c(1.0));
        assert!((symbol_eval(&z, &[0.0])[0] - c(1.0)).norm() < 1e-15);
        let cos2 = FourierSymbol::from_modes([(1, c(1.0)), (-1, c(1.0))]);
        assert!(symbol_eval(&cos2, &[PI / 2.0])[0].norm() < 1e-15);

        let w = w_half_two_one(64);
        let expected: f64 = (0..=6).map(|n| 2.0 * 2f64.powf(-0.5 * n as f64)).sum();
        assert!((symbol_eval(&w, &[0.0])[0] - c(expected)).norm() < 1e-13);
    }

    #[test]
    fn json_interchange_is_sorted() {
        let a = FourierSymbol::from_modes([(3, Complex64::new(1.0, -2.0)), (-1, c(0.5))]);
        assert_eq!(a.to_json(), r#"{"modes":[[-1,0.5,0.0],[3,1.0,-2.0]]}"#);
        assert_eq!(FourierSymbol::from_json(&a.to_json()).unwrap(), a);
    }

    #[test]
    fn block_indicator_values() {
        let s = CSequence::block_indicator(2);
        // zero on [1,2), [4,8), [16,32)
        let v = s.take(20);
        let expected = [1., 0., 1., 1., 0., 0., 0., 0., 1., 1., 1., 1., 1., 1., 1., 1., 0., 0., 0., 0.];
        assert_eq!(v, expected);
    }

    #[test]
    fn conj_and_mul() {
        let a = FourierSymbol::from_modes([(2, Complex64::new(1.0, 1.0))]);
        assert_eq!(a.conj().coeff(-2), Complex64::new(1.0, -1.0));
        let p = a.mul(&a.conj());
        assert_eq!(p, FourierSymbol::constant(c(2.0)));
        assert!(p.is_real_valued());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn symbol(max_mode: i64) -> impl Strategy<Value = FourierSymbol> {
            prop::collection::vec((-max_mode..=max_mode, -1.0f64..1.0, -1.0f64..1.0), 0..12)
                .prop_map(|v| {
                    FourierSymbol::from_modes(
                        v.into_iter().map(|(k, re, im)| (k, Complex64::new(re, im))),
                    )
                })
        }

        proptest! {
            #[test]
            fn sample_round_trip(a in symbol(15)) {
                let back = sample_to_symbol_pruned(&sample_grid(&a, 32), 1e-15).unwrap();
                prop_assert!(back.max_abs_diff(&a) < 1e-12);
            }

            #[test]
            fn hardy_split_reassembles(a in symbol(40)) {
                let (p, m) = hardy_split(&a);
                prop_assert_eq!(p.add(&m), a);
            }
        }
    }
}
