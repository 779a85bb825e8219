use std::path::Path;

use dixtrace_core::closed_forms::{
    fourier_side_trace, hn_derivative_form, hn_eval, integral_trace, lidskii_double_sum, weierstrass_trace, winding_trace,
    KernelParams,
};
use dixtrace_core::dixmier::{cesaro_mean, classify_limit, log_extrapolate_points, m_transform, residue_sequence};
use dixtrace_core::nc_torus::{clifford_rep, torus_trace_partial, AntisymmetricForm, TCoefficients};
use dixtrace_core::operators::{commutator_matrix, compressed_product, hankel_matrix, safe_band, TruncatedOperator};
use dixtrace_core::spectral::{decay_slope, singular_values, weak_quasinorm};
use dixtrace_core::{CSequence, Complex64, Extension};

use crate::config::*;
use crate::error::CliError;
use crate::report::{emit_report, Report};

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn check_matrix(n: usize, limits: &Limits) -> Result<(), CliError> {
    if n > limits.max_matrix {
        return Err(CliError::Resource(format!(
            "matrix dimension {n} exceeds the cap {}",
            limits.max_matrix
        )));
    }
    Ok(())
}

fn params_json(e: &Experiment) -> serde_json::Value {
    serde_json::to_value(e)
        .ok()
        .and_then(|mut v| v.get_mut("params").map(serde_json::Value::take))
        .unwrap_or(serde_json::Value::Null)
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Report, CliError> {
    let e = &config.experiment;
    let mut report = Report::new(e.kind(), params_json(e));
    let limits = &config.limits;
    match e {
        Experiment::WeierstrassTrace(p) => weierstrass(p, &mut report)?,
        Experiment::Measurability(p) => measurability(p, limits, &mut report)?,
        Experiment::SingularValueSweep(p) => sweep(p, limits, &mut report)?,
        Experiment::KernelCheck(p) => kernel_check(p, &mut report)?,
        Experiment::Winding(p) => winding(p, limits, &mut report)?,
        Experiment::NcTorus(p) => nc_torus(p, limits, &mut report)?,
        Experiment::HnCheck(p) => hn_check(p, &mut report)?,
        Experiment::FourierTrace(p) => fourier_trace(p, limits, &mut report)?,
    }
    Ok(report)
}

/// The matrix behind an experiment, for `--dump-operator`.
pub fn experiment_operator(config: &ExperimentConfig) -> Result<TruncatedOperator, CliError> {
    let limits = &config.limits;
    match &config.experiment {
        Experiment::SingularValueSweep(p) => {
            let n = *p.sizes.first().ok_or_else(|| invalid("sizes must not be empty"))?;
            check_matrix(n, limits)?;
            let a = p.symbol.build(2 * n as u64)?;
            Ok(hankel_matrix(&a, n)?)
        }
        Experiment::FourierTrace(p) => {
            check_matrix(p.n, limits)?;
            Ok(compressed_product(&p.a.build(p.n as u64 / 2)?, &p.b.build(p.n as u64 / 2)?, p.n)?)
        }
        Experiment::Winding(p) => {
            check_matrix(2 * p.n + 1, limits)?;
            Ok(commutator_matrix(&p.a.build((p.n / 4).max(1) as u64)?, p.n)?)
        }
        other => Err(invalid(format!("experiment kind {} has no operator to dump", other.kind()))),
    }
}

/// Runs a config and writes its report to the configured path, or returns
/// the bytes when no path is set.
pub fn execute(config: &ExperimentConfig, dump_operator: Option<&Path>) -> Result<Option<Vec<u8>>, CliError> {
    if let Some(path) = dump_operator {
        std::fs::write(path, experiment_operator(config)?.to_json())?;
    }
    let report = run_experiment(config)?;
    let bytes = emit_report(&report, config.output.resolved_format())?;
    match &config.output.path {
        Some(path) => {
            std::fs::write(path, &bytes)?;
            Ok(None)
        }
        None => Ok(Some(bytes)),
    }
}

fn eventual_constant(c: &CSequence) -> Option<f64> {
    match c.extend {
        Extension::Constant(v) => Some(v),
        Extension::Zero => Some(0.0),
        Extension::Periodic if c.values.iter().all(|&v| v == c.values[0]) => Some(c.values[0]),
        _ => None,
    }
}

fn weierstrass(p: &WeierstrassTraceParams, r: &mut Report) -> Result<(), CliError> {
    if p.alpha != 0.5 {
        return Err(invalid("the Weierstrass trace formula is stated for alpha = 1/2"));
    }
    if p.gamma < 2 || p.n_max < p.gamma {
        return Err(invalid("need gamma >= 2 and n_max >= gamma"));
    }
    let d = p.d.clone().unwrap_or_else(|| p.c.clone());
    p.c.validate()?;
    d.validate()?;
    let t = weierstrass_trace(p.gamma, &p.c, &d, p.n_max)?;
    let bp = t.at_breakpoints();

    // independent evaluation of the same partial sums
    let direct: Vec<f64> = bp
        .indices
        .iter()
        .map(|&big_m| {
            let levels = std::iter::successors(Some(1u64), |q| q.checked_mul(p.gamma)).take_while(|&q| q <= big_m).count();
            let sum: f64 = (0..levels as u64).map(|n| p.c.value(n) * d.value(n)).sum();
            -sum / (big_m as f64).ln()
        })
        .collect();
    let discrepancy = bp.values.iter().zip(&direct).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let norm = "1/log M";
    r.series(
        "trace",
        "tr(P[P,W_c][P,W_d]) Fourier side, -(1/log M) sum_{gamma^n <= M} c_n d_n at M = gamma^m",
        norm,
        bp.indices.clone(),
        bp.values.clone(),
    );
    r.series(
        "closed_form",
        "-(1/log M) sum_{n=0}^{m} c_n d_n by direct summation at M = gamma^m",
        norm,
        bp.indices.clone(),
        direct,
    );
    r.scalar("max_discrepancy", discrepancy, "max_M |trace - closed_form|", "none");
    match log_extrapolate_points(&bp.indices, &bp.values, 0.0) {
        Ok((limit, slope)) => {
            r.scalar("extrapolated_limit", limit, "L in the fit trace(M) = L + C/log M over all breakpoints", norm);
            r.scalar("extrapolation_slope", slope, "C in the fit trace(M) = L + C/log M", norm);
        }
        Err(e) => r.note(format!("extrapolation skipped: {e}")),
    }
    if let (Some(c), Some(dd)) = (eventual_constant(&p.c), eventual_constant(&d)) {
        r.scalar(
            "expected_limit",
            -c * dd / (p.gamma as f64).ln(),
            "-c d / log(gamma) for eventually constant c, d",
            norm,
        );
    }
    r.note("sign: minus the Fourier side sum, as in tr(P[P,a][P,b])");
    Ok(())
}

fn measurability(p: &MeasurabilityParams, limits: &Limits, r: &mut Report) -> Result<(), CliError> {
    if p.len > limits.max_sequence {
        return Err(CliError::Resource(format!(
            "sequence length {} exceeds the cap {}",
            p.len, limits.max_sequence
        )));
    }
    p.c.validate()?;
    let sq: Vec<f64> = (1..=p.len as u64).map(|n| p.c.value(n).powi(2)).collect();
    let (x, expr) = match p.transform {
        Transform::Cesaro => (cesaro_mean(&sq), "Cesaro mean (1/(N+1)) sum_{n<=N} c_n^2"),
        Transform::MTransform => (m_transform(&sq), "M-transform (1/log(N+2)) sum_{n<=N} c_n^2/(n+1)"),
        Transform::Raw => (sq, "c_n^2"),
    };
    let v = classify_limit(&x, &p.policy)?;
    r.label(
        "verdict",
        serde_json::to_value(v.kind)
            .ok()
            .and_then(|s| s.as_str().map(str::to_string))
            .unwrap_or_default(),
    );
    let window = "window means over [b^j, b^{j+1})";
    if let Some(l) = v.limit {
        r.scalar("limit", l, &format!("mean of {window} of the {expr}"), "none");
    }
    if let (Some(lo), Some(hi)) = (v.lower, v.upper) {
        r.scalar("lower", lo, &format!("min over tail windows of the {expr}"), "none");
        r.scalar("upper", hi, &format!("max over tail windows of the {expr}"), "none");
        r.scalar("gap", hi - lo, "upper - lower", "none");
    }
    r.scalar("windows_used", v.windows_used as f64, "number of tail windows compared", "count");
    let probe: Vec<(u64, f64)> = std::iter::successors(Some(1u64), |n| n.checked_mul(2))
        .take_while(|&n| n <= p.len as u64)
        .map(|n| (n, x[n as usize - 1]))
        .collect();
    r.series(
        "probe",
        &format!("{expr} sampled at N = 2^j"),
        "none",
        probe.iter().map(|q| q.0).collect(),
        probe.iter().map(|q| q.1).collect(),
    );
    Ok(())
}

fn sweep(p: &SweepParams, limits: &Limits, r: &mut Report) -> Result<(), CliError> {
    if p.sizes.is_empty() {
        return Err(invalid("sizes must not be empty"));
    }
    for &n in &p.sizes {
        if n < 2 {
            return Err(invalid("matrix sizes must be >= 2"));
        }
        check_matrix(n, limits)?;
    }
    let max = *p.sizes.iter().max().unwrap();
    let a = p.symbol.build(2 * max as u64)?;
    for &n in &p.sizes {
        let s = singular_values(&hankel_matrix(&a, n)?)?;
        r.series(
            &format!("mu_{n}"),
            &format!("singular values mu_k of the Hankel matrix a_{{l+i+1}}, N={n}"),
            "none",
            (0..s.len() as u64).collect(),
            s.mu.clone(),
        );
        r.scalar(
            &format!("rank_{n}"),
            s.numerical_rank(1e-12) as f64,
            &format!("#{{k: mu_k > 1e-12}}, N={n}"),
            "count",
        );
        let (lo, hi) = p.fit.unwrap_or(((n / 128).max(1), n / 4));
        if hi >= n || lo >= hi {
            return Err(invalid(format!("fit window [{lo},{hi}] does not fit N={n}")));
        }
        match decay_slope(&s, lo, hi) {
            Ok(slope) => r.scalar(
                &format!("slope_{n}"),
                slope,
                &format!("least-squares slope of log mu_k against log(1+k), k in [{lo},{hi}]"),
                "log-log",
            ),
            Err(e) => r.note(format!("slope for N={n} skipped: {e}")),
        }
        if let Some(q) = p.p {
            if !(q > 0.0) {
                return Err(invalid("quasinorm exponent must be positive"));
            }
            r.scalar(
                &format!("weak_quasinorm_{n}"),
                weak_quasinorm(&s, q),
                &format!("sup_k (1+k)^(1/p) mu_k, p={q}"),
                "none",
            );
        }
    }
    Ok(())
}

fn complex_scalars(r: &mut Report, name: &str, v: Complex64, expression: &str, normalization: &str) {
    r.scalar(&format!("{name}_re"), v.re, &format!("Re {expression}"), normalization);
    r.scalar(&format!("{name}_im"), v.im, &format!("Im {expression}"), normalization);
}

fn kernel_check(p: &KernelCheckParams, r: &mut Report) -> Result<(), CliError> {
    let params = KernelParams {
        n: p.n,
        r: p.r,
        grid: p.grid,
    };
    params.validate()?;
    let cutoff = (p.grid as u64 / 2).saturating_sub(1);
    let (a, b) = (p.a.build(cutoff)?, p.b.build(cutoff)?);
    let it = integral_trace(&a, &b, &params)?;
    let double = lidskii_double_sum(&a, &b, p.n);
    let integral = "double integral of a_+(conj zeta) b_-(z) k_N(rz, zeta) over the unit circles, r -> 1";
    complex_scalars(r, "integral", it.raw, integral, "none");
    complex_scalars(r, "integral_at_r", it.raw_at_r, "the same integral at the given r", "none");
    complex_scalars(r, "double_sum", double, "sum_{l<=N} sum_{k>l} a_k b_{-k}", "none");
    r.scalar("discrepancy", (it.raw - double).norm(), "|integral - double_sum|", "none");
    complex_scalars(r, "value", it.value, "-(integral)/log N", "1/log N");
    Ok(())
}

fn winding(p: &WindingParams, limits: &Limits, r: &mut Report) -> Result<(), CliError> {
    check_matrix(2 * p.n + 1, limits)?;
    let a = p.a.build((p.n / 4).max(1) as u64)?;
    let w = winding_trace(&a, p.n)?;
    let expr = "tr((2P-1)[P,a][P,a^{-1}]) on modes -N..N";
    r.scalar("trace_re", w.value, &format!("Re {expr}"), "none");
    r.scalar("trace_im", w.imag, &format!("Im {expr}"), "none");
    r.scalar("nearest_integer", w.value.round(), "round(Re trace); equals minus the winding number", "none");
    r.scalar("integrality_defect", (w.value - w.value.round()).abs(), "|Re trace - round(Re trace)|", "none");
    r.scalar(
        "inverse_residual",
        w.inverse_residual,
        "relative l2 mass of the sampled 1/a outside the kept band",
        "none",
    );
    Ok(())
}

fn nc_torus(p: &NcTorusParams, limits: &Limits, r: &mut Report) -> Result<(), CliError> {
    let rep = clifford_rep(p.dim)?;
    let t = match p.t {
        TKind::Identity => TCoefficients::Identity,
        TKind::Grading => TCoefficients::Grading,
        TKind::Phase => TCoefficients::Phase,
        TKind::GradingPhase => TCoefficients::GradingPhase,
    };
    // rough lattice count of the largest ball, checked before enumeration
    let side = 2.0 * (p.n_max as f64).powf(1.0 / p.dim as f64) + 3.0;
    let points = side.powi(p.dim as i32);
    if points > limits.max_tuples as f64 {
        return Err(CliError::Resource(format!(
            "lattice ball with about {points:.0} points exceeds the cap {}",
            limits.max_tuples
        )));
    }
    let cap = u128::from(limits.max_tuples);
    let zero = AntisymmetricForm::zero(p.dim);
    let base = torus_trace_partial(&rep, &t, &p.symbols, p.n_max, &zero, cap)?;
    let expr = "sum_{|k_{k+1}| <= N^{1/n}} sum_{K in I} (prod a_{j,k_j}) phase_theta tr(T(k_{k+1}) C_{K,k_{k+1}})";
    let norm = "1/log(2+N)";
    r.series("trace_re", &format!("Re {expr}, theta = 0"), norm, base.indices.clone(), base.values.iter().map(|v| v.re).collect());
    r.series("trace_im", &format!("Im {expr}, theta = 0"), norm, base.indices.clone(), base.values.iter().map(|v| v.im).collect());
    r.scalar("tuples_in_zero_sum_set", base.tuples_in_i as f64, "#{K in supp a_1 x ... x supp a_k : sum k_j = 0}", "count");
    r.scalar("lattice_points", base.lattice_points as f64, "#{k : |k| <= N_max^{1/n}}", "count");
    if let Some(theta) = &p.theta {
        let th = AntisymmetricForm::new(theta.clone())?;
        let other = torus_trace_partial(&rep, &t, &p.symbols, p.n_max, &th, cap)?;
        let dev = base.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        r.series("trace_theta_re", &format!("Re {expr}, given theta"), norm, other.indices.clone(), other.values.iter().map(|v| v.re).collect());
        r.series("trace_theta_im", &format!("Im {expr}, given theta"), norm, other.indices, other.values.iter().map(|v| v.im).collect());
        r.scalar("theta_deviation", dev, "max_N |trace(theta) - trace(0)|", norm);
    }
    Ok(())
}

fn hn_check(p: &HnCheckParams, r: &mut Report) -> Result<(), CliError> {
    if p.m_max < 1 || p.m_max > 16 || p.n_values.is_empty() || p.t_grid.is_empty() {
        return Err(invalid("need 1 <= m_max <= 16 and non-empty N and t grids"));
    }
    if p.t_grid.iter().any(|&t| !(t > 0.0 && t <= 1.0)) {
        return Err(invalid("t grid must lie in (0, 1]"));
    }
    let mut ns = p.n_values.clone();
    ns.sort_unstable();
    ns.dedup();
    let mut overall = 0.0f64;
    for m in 1..=p.m_max {
        let mut devs = Vec::with_capacity(ns.len());
        for &n in &ns {
            let mut d = 0.0f64;
            for &t in &p.t_grid {
                let h = hn_eval(t, n, m)?;
                d = d.max((h - hn_derivative_form(t, n, m)?).abs() / h.abs().max(1.0));
            }
            devs.push(d);
            overall = overall.max(d);
        }
        r.series(
            &format!("deviation_m{m}"),
            &format!("max_t |binomial form - derivative form| of h_N, m={m}"),
            "relative to max(1, |h_N|)",
            ns.clone(),
            devs,
        );
    }
    let mut geo = 0.0f64;
    for &n in &ns {
        for &t in &p.t_grid {
            let closed = (1.0 - (1.0 - t).powi(n as i32 + 1)) / t;
            geo = geo.max((hn_eval(t, n, 1)? - closed).abs() / closed.abs().max(1.0));
        }
    }
    r.scalar("max_deviation", overall, "max over m, N, t of the form discrepancy", "relative to max(1, |h_N|)");
    r.scalar("geometric_deviation", geo, "max |h_N(t) - (1-(1-t)^{N+1})/t| at m = 1", "relative to max(1, |h_N|)");
    Ok(())
}

fn fourier_trace(p: &FourierTraceParams, limits: &Limits, r: &mut Report) -> Result<(), CliError> {
    if p.n < 2 {
        return Err(invalid("truncation n must be >= 2"));
    }
    check_matrix(p.n, limits)?;
    let (a, b) = (p.a.build(p.n as u64 / 2)?, p.b.build(p.n as u64 / 2)?);
    let res = residue_sequence(&compressed_product(&a, &b, p.n)?)?;
    let band = safe_band(p.n, b.n_max());
    if band == 0 {
        return Err(invalid("symbol degree leaves no untruncated diagonal entries; raise n"));
    }
    let idx: Vec<u64> = (0..band as u64).collect();
    let mut lidskii = Vec::with_capacity(band);
    let mut dev = 0.0f64;
    for (l, v) in res.values.iter().take(band).enumerate() {
        let o = -lidskii_double_sum(&a, &b, l as u64) / ((l + 2) as f64).ln();
        dev = dev.max((v - o).norm());
        lidskii.push(o);
    }
    let norm = "1/log(N+2)";
    let res_expr = "Res_N = sum_{l<=N} <P[P,a][P,b] e_l, e_l>";
    r.series("residue_re", &format!("Re {res_expr}"), norm, idx.clone(), res.values[..band].iter().map(|v| v.re).collect());
    r.series("residue_im", &format!("Im {res_expr}"), norm, idx.clone(), res.values[..band].iter().map(|v| v.im).collect());
    let lid_expr = "-sum_{l<=N} sum_{k>l} a_k b_{-k}";
    r.series("lidskii_re", &format!("Re {lid_expr}"), norm, idx.clone(), lidskii.iter().map(|v| v.re).collect());
    r.series("lidskii_im", &format!("Im {lid_expr}"), norm, idx, lidskii.iter().map(|v| v.im).collect());
    r.scalar("max_discrepancy", dev, "max over the safe band of |residue - lidskii|", norm);
    let f = fourier_side_trace(&a, &b, p.n as u64)?;
    let f_expr = "(1/log M) sum_{k<=M} k a_k b_{-k}; the residue tends to minus this";
    r.series("fourier_side_re", &format!("Re {f_expr}"), "1/log M", f.indices.clone(), f.values.iter().map(|v| v.re).collect());
    r.series("fourier_side_im", &format!("Im {f_expr}"), "1/log M", f.indices.clone(), f.values.iter().map(|v| v.im).collect());
    Ok(())
}
