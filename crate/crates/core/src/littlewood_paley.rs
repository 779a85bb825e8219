//! Discrete Littlewood–Paley blocks `w_{n,γ}` and the norms built on them.
//!
//! Block `n > 0` is a hat in frequency: 0 at `γ^{n-1}`, 1 at `γ^n`, 0 at
//! `γ^{n+1}`, linear in between. Those hats alone leave modes `±1` only
//! partially covered (the hat for `n = 1` vanishes at `k = 1`), so the
//! partition is closed by two level-0 side blocks equal to 1 at `±1` and
//! falling linearly to 0 at `±γ`. With them, every `k ≠ 0` satisfies
//! `Σ_n ŵ_n(k) = 1`, and mode 0 belongs to the constant block alone.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fourier::{sample_grid, FourierSymbol};

/// Which block of the partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BlockIndex {
    /// `w_0 = 1` at mode 0.
    Constant,
    /// Hat peaked at `+γ^level` (level 0 is the side block at `k = 1`).
    Positive(u32),
    /// Mirror image of `Positive(level)` on negative modes.
    Negative(u32),
}

impl BlockIndex {
    /// Scale exponent `|n|` used in the weights `γ^{|n|t}`.
    pub fn level(self) -> u32 {
        match self {
            BlockIndex::Constant => 0,
            BlockIndex::Positive(l) | BlockIndex::Negative(l) => l,
        }
    }

    /// The blocks whose support meets mode `k`.
    pub fn covering(k: i64, gamma: u64) -> Vec<BlockIndex> {
        if k == 0 {
            return vec![BlockIndex::Constant];
        }
        let m = k.unsigned_abs();
        let e = m.ilog(gamma);
        let mut levels = vec![e];
        if m != gamma.pow(e) {
            levels.push(e + 1);
        }
        levels
            .into_iter()
            .map(|l| if k > 0 { BlockIndex::Positive(l) } else { BlockIndex::Negative(l) })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LPBlock {
    pub index: BlockIndex,
    pub gamma: u64,
}

/// Block `n` of the dyadic-type partition with base `gamma`; the sign of `n`
/// picks the half-line. Panics if `gamma < 2`.
pub fn lp_block(n: i64, gamma: u64) -> LPBlock {
    assert!(gamma >= 2, "gamma must be >= 2");
    let level = u32::try_from(n.unsigned_abs()).expect("block level out of range");
    let index = match n {
        0 => BlockIndex::Constant,
        n if n > 0 => BlockIndex::Positive(level),
        _ => BlockIndex::Negative(level),
    };
    LPBlock { index, gamma }
}

impl LPBlock {
    pub fn new(index: BlockIndex, gamma: u64) -> Self {
        assert!(gamma >= 2, "gamma must be >= 2");
        Self { index, gamma }
    }

    /// Profile value `ŵ(k)`.
    pub fn value(&self, k: i64) -> f64 {
        match self.index {
            BlockIndex::Constant => f64::from(k == 0),
            BlockIndex::Positive(l) if k > 0 => hat(self.gamma, l, k as u64),
            BlockIndex::Negative(l) if k < 0 => hat(self.gamma, l, k.unsigned_abs()),
            _ => 0.0,
        }
    }

    /// Modes where the profile can be nonzero, as an inclusive range.
    pub fn support(&self) -> (i64, i64) {
        let g = self.gamma as i64;
        let (lo, hi) = match self.index {
            BlockIndex::Constant => return (0, 0),
            BlockIndex::Positive(0) | BlockIndex::Negative(0) => (1, g - 1),
            BlockIndex::Positive(l) | BlockIndex::Negative(l) => {
                let p = g.pow(l);
                (p / g + 1, p * g - 1)
            }
        };
        match self.index {
            BlockIndex::Negative(_) => (-hi, -lo),
            _ => (lo, hi),
        }
    }

    /// The full profile as a symbol. Its size grows like `γ^{level+1}`, so this
    /// is meant for inspection of low levels.
    pub fn profile(&self) -> FourierSymbol {
        let (lo, hi) = self.support();
        FourierSymbol::from_modes((lo..=hi).map(|k| (k, Complex64::new(self.value(k), 0.0))))
    }
}

fn hat(gamma: u64, level: u32, m: u64) -> f64 {
    let p = gamma.pow(level);
    let next = p * gamma;
    if level == 0 {
        return if m < gamma { (gamma - m) as f64 / (gamma - 1) as f64 } else { 0.0 };
    }
    let prev = p / gamma;
    if m <= prev || m >= next {
        0.0
    } else if m <= p {
        (m - prev) as f64 / (p - prev) as f64
    } else {
        (next - m) as f64 / (next - p) as f64
    }
}

/// `w_{n,γ} * a`: the Fourier coefficients of `a` multiplied by the profile.
pub fn lp_convolve(a: &FourierSymbol, n: i64, gamma: u64) -> FourierSymbol {
    block_convolve(a, &lp_block(n, gamma))
}

pub fn block_convolve(a: &FourierSymbol, block: &LPBlock) -> FourierSymbol {
    FourierSymbol::from_modes(a.modes().map(|(k, c)| (k, c * block.value(k))))
}

/// Blocks whose support meets the support of `a`, in sorted order.
pub fn active_blocks(a: &FourierSymbol, gamma: u64) -> Vec<LPBlock> {
    let mut idx: Vec<BlockIndex> = a
        .modes()
        .flat_map(|(k, _)| BlockIndex::covering(k, gamma))
        .collect();
    idx.sort();
    idx.dedup();
    idx.into_iter().map(|i| LPBlock::new(i, gamma)).collect()
}

/// Exponent `p` or `q` of a Lebesgue or sequence norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    fn check(self) {
        if let Exponent::Finite(p) = self {
            assert!(p >= 1.0, "norm exponent must be >= 1, got {p}");
        }
    }
}

fn default_grid(a: &FourierSymbol) -> usize {
    (8 * a.n_max() as usize).max(8)
}

/// `‖f‖_{L^p}` on the circle of volume one, by grid quadrature on `g` points.
/// For trigonometric polynomials of degree below `g/2` the `L^2` value is exact.
pub fn lp_norm(a: &FourierSymbol, p: Exponent, g: usize) -> f64 {
    p.check();
    if a.is_zero() {
        return 0.0;
    }
    let vals = sample_grid(a, g);
    match p {
        Exponent::Infinity => vals.iter().map(|v| v.norm()).fold(0.0, f64::max),
        Exponent::Finite(p) => {
            let mean = vals.iter().map(|v| v.norm().powf(p)).sum::<f64>() / g as f64;
            mean.powf(1.0 / p)
        }
    }
}

fn seq_norm(xs: &[f64], q: Exponent) -> f64 {
    q.check();
    match q {
        Exponent::Infinity => xs.iter().copied().fold(0.0, f64::max),
        Exponent::Finite(q) => xs.iter().map(|x| x.powf(q)).sum::<f64>().powf(1.0 / q),
    }
}

/// `sup_n γ^{|n|α} ‖w_{n,γ} * a‖_{L^∞}`, with `L^∞` read off a grid of at
/// least `sup_angles` points (raised to `4·n_max` if smaller).
pub fn holder_norm_star(a: &FourierSymbol, alpha: f64, gamma: u64, sup_angles: usize) -> f64 {
    let g = sup_angles.max(4 * a.n_max() as usize).max(4);
    let terms: Vec<f64> = active_blocks(a, gamma)
        .iter()
        .map(|b| {
            let w = (gamma as f64).powf(alpha * b.index.level() as f64);
            w * lp_norm(&block_convolve(a, b), Exponent::Infinity, g)
        })
        .collect();
    seq_norm(&terms, Exponent::Infinity)
}

/// `‖(γ^{|n|t} ‖w_{n,γ} * a‖_{L^p})_n‖_{ℓ^q}` over the blocks meeting the
/// support of `a`.
pub fn besov_norm(a: &FourierSymbol, t: f64, p: Exponent, q: Exponent, gamma: u64) -> f64 {
    let g = default_grid(a);
    let terms: Vec<f64> = active_blocks(a, gamma)
        .iter()
        .map(|b| {
            let w = (gamma as f64).powf(t * b.index.level() as f64);
            w * lp_norm(&block_convolve(a, b), p, g)
        })
        .collect();
    seq_norm(&terms, q)
}

/// `(Σ_k (max(|k|,1)^s |a_k|)²)^{1/2}`, the Sobolev-type sum that
/// `besov_norm(a, s, 2, 2, γ)` reproduces exactly on lacunary symbols.
pub fn sobolev_sum(a: &FourierSymbol, s: f64) -> f64 {
    a.modes()
        .map(|(k, c)| ((k.unsigned_abs().max(1) as f64).powf(s) * c.norm()).powi(2))
        .sum::<f64>()
        .sqrt()
}
