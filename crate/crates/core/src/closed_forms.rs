//! Explicit scalar formulas for logarithmic traces on the circle, with the
//! matrix computations they are checked against.
//!
//! Sign bookkeeping: `Pa(1-P)bP` carries a plus sign on the Fourier side,
//! `Σ k a_k b_{-k}`, while `P[P,a][P,b] = -Pa(1-P)bP` on the Hardy space
//! carries a minus. Every function states which of the two it computes.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{hardy_split, sample_grid, sample_to_symbol_pruned, CSequence, FourierSymbol};
use crate::operators::{commutator_matrix, operator_product, szego_reflection};
use crate::sequence::IndexedSequence;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A piecewise-constant partial sum `M ↦ Σ_{k ≤ M} t_k`, stored at the
/// indices where it jumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepSums<T> {
    pub breakpoints: Vec<u64>,
    pub sums: Vec<T>,
}

impl<T: Copy + Default> StepSums<T> {
    /// The partial sum up to and including index `m`.
    pub fn sum_at(&self, m: u64) -> T {
        match self.breakpoints.partition_point(|&b| b <= m) {
            0 => T::default(),
            i => self.sums[i - 1],
        }
    }
}

/// `Σ_{0<k≤M} k a_k b_{-k}` as a step function of `M`.
pub fn fourier_partial_sums(a: &FourierSymbol, b: &FourierSymbol) -> StepSums<Complex64> {
    let mut out = StepSums {
        breakpoints: Vec::new(),
        sums: Vec::new(),
    };
    let mut acc = ZERO;
    for (k, ak) in a.modes().filter(|&(k, _)| k > 0) {
        let bk = b.coeff(-k);
        if bk != ZERO {
            acc += ak * bk * k as f64;
            out.breakpoints.push(k as u64);
            out.sums.push(acc);
        }
    }
    out
}

fn check_n(n: u64) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("N must be >= 2, got {n}")));
    }
    Ok(())
}

/// `M ↦ (1/log M) Σ_{k=0}^{M} k a_k b_{-k}` for `M = 2..=N`: the logarithmic
/// trace of `Pa(1-P)bP`, plus sign.
pub fn fourier_side_trace(a: &FourierSymbol, b: &FourierSymbol, n: u64) -> Result<IndexedSequence<Complex64>> {
    check_n(n)?;
    let steps = fourier_partial_sums(a, b);
    let indices: Vec<u64> = (2..=n).collect();
    let values = indices.iter().map(|&m| steps.sum_at(m) / (m as f64).ln()).collect();
    Ok(IndexedSequence::new(indices, values))
}

/// `M ↦ -(1/log M) Σ_{k=-M}^{M} |k| a_k b_{-k}` for `M = 2..=N`: the
/// logarithmic trace of `[P,a][P,b]` on the whole circle.
pub fn symmetric_fourier_trace(a: &FourierSymbol, b: &FourierSymbol, n: u64) -> Result<IndexedSequence<Complex64>> {
    check_n(n)?;
    let pos = fourier_partial_sums(a, b);
    let neg = fourier_partial_sums(&reflect(a), &reflect(b));
    let indices: Vec<u64> = (2..=n).collect();
    let values = indices
        .iter()
        .map(|&m| -(pos.sum_at(m) + neg.sum_at(m)) / (m as f64).ln())
        .collect();
    Ok(IndexedSequence::new(indices, values))
}

/// `a(θ) ↦ a(-θ)`: coefficient `a_k` moves to mode `-k`.
fn reflect(a: &FourierSymbol) -> FourierSymbol {
    FourierSymbol::from_modes(a.modes().map(|(k, c)| (-k, c)))
}

/// `Σ_{l=0}^{N} Σ_{k>l} a_k b_{-k} = Σ_{k≥1} min(k, N+1) a_k b_{-k}`: the
/// partial diagonal sum of `Pa(1-P)bP`, without normalization.
pub fn lidskii_double_sum(a: &FourierSymbol, b: &FourierSymbol, n: u64) -> Complex64 {
    a.modes()
        .filter(|&(k, _)| k > 0)
        .map(|(k, ak)| ak * b.coeff(-k) * (k as u64).min(n + 1) as f64)
        .sum()
}

/// The logarithmic trace of `P[P,W_{1/2,γ,c}][P,W_{1/2,γ,d}]` along the
/// Fourier side: `M ↦ -(1/log M) Σ_{γ^n ≤ M} c_n d_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeierstrassTrace {
    pub gamma: u64,
    pub n_max: u64,
    /// Partial sums `Σ_{j≤n} c_j d_j`, jumping at `γ^n`.
    pub steps: StepSums<f64>,
}

impl WeierstrassTrace {
    /// Value at `M` (`2 ≤ M ≤ N`).
    pub fn value_at(&self, m: u64) -> f64 {
        assert!(m >= 2 && m <= self.n_max, "M = {m} outside [2, {}]", self.n_max);
        -self.steps.sum_at(m) / (m as f64).ln()
    }

    /// Values at the breakpoints `γ^n ≥ 2`, where the partial sum has just
    /// jumped.
    pub fn at_breakpoints(&self) -> IndexedSequence<f64> {
        let indices: Vec<u64> = self.steps.breakpoints.iter().copied().filter(|&m| m >= 2).collect();
        let values = indices.iter().map(|&m| self.value_at(m)).collect();
        IndexedSequence::new(indices, values)
    }
}

pub fn weierstrass_trace(gamma: u64, c: &CSequence, d: &CSequence, n: u64) -> Result<WeierstrassTrace> {
    if gamma < 2 {
        return Err(Error::InvalidParameter(format!("gamma must be >= 2, got {gamma}")));
    }
    check_n(n)?;
    c.validate()?;
    d.validate()?;
    let mut steps = StepSums {
        breakpoints: Vec::new(),
        sums: Vec::new(),
    };
    let mut acc = 0.0;
    let levels = std::iter::successors(Some(1u64), |p| p.checked_mul(gamma)).take_while(|&p| p <= n);
    for (level, p) in levels.enumerate() {
        acc += c.value(level as u64) * d.value(level as u64);
        steps.breakpoints.push(p);
        steps.sums.push(acc);
    }
    Ok(WeierstrassTrace { gamma, n_max: n, steps })
}

/// `e^w - 1` without cancellation for small `w`.
fn expm1(w: Complex64) -> Complex64 {
    let (s, c) = w.im.sin_cos();
    let half = (w.im / 2.0).sin();
    Complex64::new(w.re.exp_m1() * c - 2.0 * half * half, w.re.exp() * s)
}

/// `log t` accurate near `t = 1`.
fn ln_near_one(t: Complex64) -> Complex64 {
    let (u, v) = (t.re - 1.0, t.im);
    Complex64::new(0.5 * (2.0 * u + u * u + v * v).ln_1p(), v.atan2(t.re))
}

/// Below this distance from the pole the kernel switches to the split form.
pub const KERNEL_SWITCH: f64 = 1.0 / (1u64 << 20) as f64;

/// `k_N(z, ζ) = (1/log N)·(1 - (zζ)^{N+1}) / (1 - zζ)^2`.
///
/// The kernel has a simple pole at `zζ = 1`, reported as
/// [`Error::KernelPole`]. Within [`KERNEL_SWITCH`] of it the exact split
/// `Σ_{k≤N} (k+1) t^k + (N+1) t^{N+1}/(1-t)` is used instead of the
/// quotient.
pub fn kn_kernel(z: Complex64, zeta: Complex64, n: u64) -> Result<Complex64> {
    check_n(n)?;
    let t = z * zeta;
    let ln_n = (n as f64).ln();
    if t == Complex64::new(1.0, 0.0) {
        return Err(Error::KernelPole);
    }
    if t == ZERO {
        return Ok(Complex64::new(1.0 / ln_n, 0.0));
    }
    let one_minus = Complex64::new(1.0 - t.re, -t.im);
    let np1 = (n + 1) as f64;
    let v = if one_minus.norm() < KERNEL_SWITCH {
        regular_poly(t, n) + t.powf(np1) * np1 / one_minus
    } else {
        -expm1(ln_near_one(t) * np1) / (one_minus * one_minus)
    };
    Ok(v / ln_n)
}

fn regular_poly(t: Complex64, n: u64) -> Complex64 {
    (0..=n).rev().fold(ZERO, |acc, k| acc * t + (k + 1) as f64)
}

/// `(1/log N) Σ_{k≤N} (k+1) t^k`, the polynomial part of `k_N` at `t = zζ`.
/// At `t = 1` it equals `(N+1)(N+2)/(2 log N)`.
pub fn kn_regular_part(t: Complex64, n: u64) -> Result<Complex64> {
    check_n(n)?;
    Ok(regular_poly(t, n) / (n as f64).ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub n: u64,
    pub r: f64,
    pub grid: usize,
}

impl KernelParams {
    pub fn validate(&self) -> Result<()> {
        check_n(self.n)?;
        if !(self.r > 0.0 && self.r < 1.0) {
            return Err(Error::InvalidParameter(format!("r must lie in (0,1), got {}", self.r)));
        }
        if !self.grid.is_power_of_two() {
            return Err(Error::NonPowerOfTwo(self.grid));
        }
        if (self.grid as u64) < 8 * self.n {
            return Err(Error::InvalidParameter(format!(
                "grid {} must be at least 8·N = {}",
                self.grid,
                8 * self.n
            )));
        }
        Ok(())
    }

    /// The second radius used for the convergence check and extrapolation.
    pub fn check_radius(&self) -> f64 {
        1.0 - (1.0 - self.r) / 10.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralTrace {
    /// `-(1/log N)` times the extrapolated double integral.
    pub value: Complex64,
    /// Double integral without the `-1/log N` factor, extrapolated to `r = 1`.
    pub raw: Complex64,
    pub raw_at_r: Complex64,
    pub raw_at_check: Complex64,
    pub r: f64,
    pub r_check: f64,
}

/// `-∬ a_+(ζ̄) b_-(z) k_N(rz, ζ) dζ dz` over two unit circles, with
/// `dz ↦ z dθ/2π` (the normalized `dz/2πi`, volume one).
///
/// The integrand is sampled on `grid` points per circle. Against the
/// band-limited `a_+`, `b_-` only kernel modes below `grid` survive, so the
/// kernel is replaced by its exact truncation `Σ_{m<grid} (min(m,N)+1) w^m`,
/// evaluated by FFT; the trapezoidal rule is then exact and computes
/// `Σ_k min(k, N+1) r^{k-1} a_k b_{-k}`. The limit `r ↗ 1` is taken by linear
/// extrapolation in `1-r` between `r` and [`KernelParams::check_radius`].
pub fn integral_trace(a: &FourierSymbol, b: &FourierSymbol, params: &KernelParams) -> Result<IntegralTrace> {
    params.validate()?;
    let (a_plus, _) = hardy_split(a);
    let (_, b_minus) = hardy_split(b);
    let band = a_plus.n_max().max(b_minus.n_max());
    if (params.grid as u64) < 2 * band + 2 {
        return Err(Error::GridTooCoarse { grid: params.grid, band });
    }
    let g = params.grid;
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(g);
    let inv = planner.plan_fft_inverse(g);

    // A_j = a_+(ω^{-j}), B_i = b_-(ω^i); their cyclic convolution groups the
    // pairs (i, j) by s = i + j, the only index the kernel sees.
    let mut conv = sample_grid(&reflect(&a_plus), g);
    let mut bs = sample_grid(&b_minus, g);
    fwd.process(&mut conv);
    fwd.process(&mut bs);
    for (x, y) in conv.iter_mut().zip(&bs) {
        *x *= y / g as f64;
    }
    inv.process(&mut conv);

    let raw_at = |r: f64| -> Complex64 {
        // F_s = ω^s K_G(r ω^s)
        let mut kern: Vec<Complex64> = (0..g)
            .map(|m| Complex64::new(((m as u64).min(params.n) + 1) as f64 * r.powi(m as i32), 0.0))
            .collect();
        inv.process(&mut kern);
        let mut acc = ZERO;
        for (s, (k, c)) in kern.iter().zip(&conv).enumerate() {
            acc += k * Complex64::from_polar(1.0, 2.0 * PI * s as f64 / g as f64) * c;
        }
        acc / (g as f64 * g as f64)
    };
    let (r1, r2) = (params.r, params.check_radius());
    let (i1, i2) = (raw_at(r1), raw_at(r2));
    let (h1, h2) = (1.0 - r1, 1.0 - r2);
    let raw = (i2 * h1 - i1 * h2) / (h1 - h2);
    Ok(IntegralTrace {
        value: -raw / (params.n as f64).ln(),
        raw,
        raw_at_r: i1,
        raw_at_check: i2,
        r: r1,
        r_check: r2,
    })
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn check_m(m: u32) -> Result<()> {
    if m < 1 {
        return Err(Error::InvalidParameter("m must be >= 1".into()));
    }
    Ok(())
}

/// `h_N(t) = (1/m) Σ_{k=0}^{N} C(k+m-1, m-1) (1-t)^k`, the polynomial form
/// used for evaluation. For `m = 1` it is `(1 - (1-t)^{N+1})/t`.
pub fn hn_eval(t: f64, n: u64, m: u32) -> Result<f64> {
    check_m(m)?;
    let s = 1.0 - t;
    let mm = u64::from(m);
    let sum = (0..=n).rev().fold(0.0, |acc, k| acc * s + binomial(k + mm - 1, mm - 1));
    Ok(sum / mm as f64)
}

/// `(1/(m-1)!) d^{m-1}/dt^{m-1} (1 - (1-t)^{N+m})/t`, computed by the
/// Leibniz rule. Note that this equals `(-1)^{m-1} m h_N(t)`.
pub fn hn_derivative_raw(t: f64, n: u64, m: u32) -> Result<f64> {
    check_m(m)?;
    if t == 0.0 {
        return Err(Error::InvalidParameter("derivative form is singular at t = 0".into()));
    }
    let p = u64::from(m - 1);
    let l = n + u64::from(m);
    let s = 1.0 - t;
    // u = 1 - s^L, v = 1/t
    let du = |i: u64| -> f64 {
        if i == 0 {
            1.0 - s.powi(l as i32)
        } else {
            let falling = (0..i).fold(1.0, |acc, j| acc * (l - j) as f64);
            let sign = if i % 2 == 0 { -1.0 } else { 1.0 };
            sign * falling * s.powi((l - i) as i32)
        }
    };
    let dv = |q: u64| -> f64 {
        let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
        sign * (1..=q).fold(1.0, |acc, j| acc * j as f64) / t.powi(q as i32 + 1)
    };
    let d: f64 = (0..=p).map(|i| binomial(p, i) * du(i) * dv(p - i)).sum();
    let fact = (1..=p).fold(1.0, |acc, j| acc * j as f64);
    Ok(d / fact)
}

/// `((-1)^{m-1}/m!) d^{m-1}/dt^{m-1} (1 - (1-t)^{N+m})/t`, which agrees with
/// [`hn_eval`].
pub fn hn_derivative_form(t: f64, n: u64, m: u32) -> Result<f64> {
    let raw = hn_derivative_raw(t, n, m)?;
    let sign = if (m - 1) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * raw / f64::from(m))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindingTrace {
    /// Real part of `tr((2P-1)[P,a][P,a^{-1}])`.
    pub value: f64,
    pub imag: f64,
    /// Out-of-band share of the sampled inverse, `‖outside‖_2 / ‖all‖_2`.
    pub inverse_residual: f64,
    pub inverse_band: u64,
    /// Diagonal modes `|l| ≤ safe_band` are free of truncation effects.
    pub safe_band: u64,
}

/// Pointwise inverse of `a`, sampled and projected to modes `|k| ≤ band`.
/// Returns the projection and the relative out-of-band residual.
pub fn symbol_inverse(a: &FourierSymbol, band: u64) -> Result<(FourierSymbol, f64)> {
    let g = ((32 * a.n_max().max(band)).max(256) as usize).next_power_of_two();
    let samples = sample_grid(a, g);
    let max = samples.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let min = samples.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    if !(min > 1e-12 * max.max(1.0)) {
        return Err(Error::NotInvertible { min_modulus: min });
    }
    let inv: Vec<Complex64> = samples.iter().map(|v| v.inv()).collect();
    let full = sample_to_symbol_pruned(&inv, 0.0)?;
    let total: f64 = full.modes().map(|(_, c)| c.norm_sqr()).sum();
    let outside: f64 = full
        .modes()
        .filter(|&(k, _)| k.unsigned_abs() > band)
        .map(|(_, c)| c.norm_sqr())
        .sum();
    let kept = full.filter_modes(|k| k.unsigned_abs() <= band);
    let cut = 1e-15 * kept.modes().map(|(_, c)| c.norm()).fold(0.0, f64::max);
    let kept = kept.filter_modes(|k| kept.coeff(k).norm() > cut);
    Ok((kept, (outside / total).sqrt()))
}

/// Plain trace of `(2P-1)[P,a][P,a^{-1}]` on modes `-N..=N`, with `a^{-1}`
/// from grid inversion projected to four times the band of `a`.
pub fn winding_trace(a: &FourierSymbol, n: usize) -> Result<WindingTrace> {
    if n < 1 {
        return Err(Error::InvalidParameter("N must be >= 1".into()));
    }
    let band = 4 * a.n_max().max(1);
    let (ainv, residual) = symbol_inverse(a, band)?;
    let prod = operator_product(&[
        szego_reflection(n)?,
        commutator_matrix(a, n)?,
        commutator_matrix(&ainv, n)?,
    ])?;
    let tr = prod.trace();
    Ok(WindingTrace {
        value: tr.re,
        imag: tr.im,
        inverse_residual: residual,
        inverse_band: band,
        safe_band: (n as u64).saturating_sub(a.n_max() + band),
    })
}
