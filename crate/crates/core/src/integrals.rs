//! Critical-line integrals of quotients ζ(s)/ζ(s+ε) and of Möbius
//! approximations to 1/ζ, with monitors for the accompanying bounds.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::arithmetic::{mobius_table, ArithmeticError, MobiusPolynomial};
use crate::hilbert::{line_breakpoints, log_mean_tail, LineOptions};
use crate::numerics::{integrate, integrate_panels, merge_breakpoints, QuadOptions, QuadratureResult};
use crate::report::{fmt_float, MonitorReport};
use crate::special_functions::{
    ln_gamma, zeta, zeta_derivative, EvaluationAccuracy, SpecialFunctionError, EULER_GAMMA, MAX_IMAG,
};
use crate::zeros::ZeroTable;

#[derive(Debug, Error)]
pub enum IntegralError {
    #[error("eps = {0} outside (0, 1/2]")]
    EpsOutOfRange(f64),
    #[error("zero table height {height} below required {required}")]
    ZerosInsufficient { height: f64, required: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("integrand produced a non-finite value")]
    NonFinite,
    #[error(transparent)]
    Special(#[from] SpecialFunctionError),
    #[error(transparent)]
    Arithmetic(#[from] ArithmeticError),
}

/// β(τ) = log log log(16+|τ|) / (2 log log(16+|τ|)).
pub fn beta(tau: f64) -> f64 {
    let ll = (16.0 + tau.abs()).ln().ln();
    ll.ln() / (2.0 * ll)
}

/// κ(τ) = ½ log log log|τ| / log log|τ|, defined for |τ| ≥ 16.
pub fn kappa(tau: f64) -> Option<f64> {
    if tau.abs() < 16.0 {
        return None;
    }
    let ll = tau.abs().ln().ln();
    Some(0.5 * ll.ln() / ll)
}

fn check_eps(eps: f64) -> Result<(), IntegralError> {
    if eps > 0.0 && eps <= 0.5 {
        Ok(())
    } else {
        Err(IntegralError::EpsOutOfRange(eps))
    }
}

fn acc() -> EvaluationAccuracy {
    EvaluationAccuracy::default()
}

fn nan_c() -> Complex64 {
    Complex64::new(f64::NAN, f64::NAN)
}

/// ζ(s)/ζ(s+ε) at s = ½ + iτ.
pub fn zeta_quotient(tau: f64, eps: f64) -> Result<Complex64, IntegralError> {
    let a = zeta(Complex64::new(0.5, tau), &acc())?;
    let b = zeta(Complex64::new(0.5 + eps, tau), &acc())?;
    Ok(a / b)
}

/// The quotient from the Hadamard product, using the zeros of `table` and a
/// smooth correction for the zeros above the table.
pub fn hadamard_quotient(tau: f64, eps: f64, table: &ZeroTable) -> Complex64 {
    let s = Complex64::new(0.5, tau);
    let se = s + eps;
    let mut log_q = -eps / 2.0 * PI.ln() + ((se * (se - 1.0)) / (s * (s - 1.0))).ln() + ln_gamma(se / 2.0)
        - ln_gamma(s / 2.0);
    let d = Complex64::new(eps * eps, 2.0 * eps * tau);
    for &g in table.ordinates() {
        let num = g * g - tau * tau;
        log_q += (Complex64::new(num, 0.0) / (d + num)).ln();
    }
    let h = table.height();
    log_q -= d * (((h / (2.0 * PI)).ln() + 1.0) / (2.0 * PI * h));
    log_q.exp()
}

/// (γ−1)/ζ(1+ε) − ζ′(1+ε)/ζ(1+ε)².
pub fn l_closed(eps: f64) -> Result<f64, IntegralError> {
    let s = Complex64::new(1.0 + eps, 0.0);
    let z = zeta(s, &acc())?.re;
    let dz = zeta_derivative(s, &acc())?.re;
    Ok((EULER_GAMMA - 1.0) / z - dz / (z * z))
}

/// 1 − (γ+1)ε, the first-order expansion of [`l_closed`].
pub fn l_first_order(eps: f64) -> f64 {
    1.0 - (EULER_GAMMA + 1.0) * eps
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct JklResult {
    pub eps: f64,
    pub tau_max: f64,
    #[serde(rename = "K")]
    pub k: QuadratureResult<f64>,
    pub l_quad: QuadratureResult<f64>,
    pub l_closed: f64,
    /// K − 2 L_closed + 1.
    #[serde(rename = "J")]
    pub j: f64,
    /// K − 2 L_quad + 1.
    pub j_quad: f64,
    /// (1/π)(1/T + 2Cε/√T), the tail envelope of K and L beyond τ_max.
    pub tail_k: f64,
    /// Empirical constant C in |ζ(s)/ζ(s+ε)|² ≤ 1 + Cε|s|^{1/2} on [T/2, T].
    pub envelope_c: f64,
}

fn require_zeros(table: &ZeroTable, tau_max: f64) -> Result<(), IntegralError> {
    if table.height() < tau_max {
        return Err(IntegralError::ZerosInsufficient { height: table.height(), required: tau_max });
    }
    Ok(())
}

/// max over a grid of `[T/2, T]` of (|q|² − 1)/(ε|s|^{1/2}).
pub fn quotient_envelope_constant(eps: f64, tau_max: f64) -> Result<f64, IntegralError> {
    let steps = (tau_max / 2.0 / 0.25).ceil() as usize;
    let mut c: f64 = 0.0;
    for k in 0..=steps {
        let tau = tau_max / 2.0 + k as f64 * (tau_max / 2.0) / steps as f64;
        let q = zeta_quotient(tau, eps)?;
        let s_abs = (0.25 + tau * tau).sqrt();
        c = c.max((q.norm_sqr() - 1.0) / (eps * s_abs.sqrt()));
    }
    Ok(c)
}

/// K_ε, L_ε by quadrature on |τ| ≤ τ_max, L_ε by residues, and J_ε.
pub fn jkl_integrals(eps: f64, tau_max: f64, table: &ZeroTable) -> Result<JklResult, IntegralError> {
    check_eps(eps)?;
    if !(tau_max >= 1e3 && tau_max <= MAX_IMAG) {
        return Err(IntegralError::InvalidParameter(format!("tau_max = {tau_max} < 1000")));
    }
    require_zeros(table, tau_max)?;
    let opts = LineOptions::default();
    let breaks = line_breakpoints(tau_max, table.ordinates(), eps, opts.base_width);
    // real part carries |q|², imaginary part carries Re q
    let integrand = |t: f64| {
        let q = zeta_quotient(t, eps).unwrap_or_else(|_| nan_c());
        Complex64::new(q.norm_sqr(), q.re) / (0.25 + t * t)
    };
    let quad = integrate_panels(&integrand, &breaks, &opts.quad);
    if !(quad.value.re.is_finite() && quad.value.im.is_finite()) {
        return Err(IntegralError::NonFinite);
    }
    let k = QuadratureResult {
        value: quad.value.re / PI,
        error_bound: quad.error_bound / PI,
        panels: quad.panels,
        converged: quad.converged,
    };
    let l_quad = QuadratureResult { value: quad.value.im / PI, ..k };
    let l_closed = l_closed(eps)?;
    let c = quotient_envelope_constant(eps, tau_max)?.max(0.0);
    let tail_k = (1.0 / tau_max + 2.0 * c * eps / tau_max.sqrt()) / PI;
    Ok(JklResult {
        eps,
        tau_max,
        k,
        l_quad,
        l_closed,
        j: k.value - 2.0 * l_closed + 1.0,
        j_quad: k.value - 2.0 * l_quad.value + 1.0,
        tail_k,
        envelope_c: c,
    })
}

pub const JKL_CSV_HEADER: &str = "eps,K,L_quad,L_closed,J,tail_K";

pub fn jkl_csv(rows: &[JklResult]) -> String {
    let mut out = format!("{JKL_CSV_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_float(r.eps),
            fmt_float(r.k.value),
            fmt_float(r.l_quad.value),
            fmt_float(r.l_closed),
            fmt_float(r.j),
            fmt_float(r.tail_k)
        );
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct IResult {
    #[serde(rename = "N")]
    pub n: u64,
    pub eps: f64,
    /// Upper end N^{3/4} of the integrated range.
    pub split: f64,
    pub quad: QuadratureResult<f64>,
    /// Dyadic extrapolation of the part |τ| > N^{3/4}; not added to `quad`.
    pub tail_estimate: f64,
    /// Largest block ratio I_N(T)/(T^{-3/2}(T+N) log N) seen in range.
    pub block_constant: f64,
    pub blocks: MonitorReport,
}

/// I_{N,ε} on |τ| ≤ N^{3/4} with a separate estimate of the remainder.
pub fn i_n_eps(n: u64, eps: f64, table: &ZeroTable) -> Result<IResult, IntegralError> {
    check_eps(eps)?;
    if n == 0 || n > 100_000 {
        return Err(IntegralError::InvalidParameter(format!("N = {n} outside 1..=100000")));
    }
    let split = (n as f64).powf(0.75);
    require_zeros(table, split)?;
    let mobius = mobius_table(n)?;
    let poly = MobiusPolynomial::new(&mobius, n, 0.5 + eps)?;
    let integrand = |t: f64| {
        let z = zeta(Complex64::new(0.5, t), &acc()).unwrap_or_else(|_| nan_c());
        let ze = zeta(Complex64::new(0.5 + eps, t), &acc()).unwrap_or_else(|_| nan_c());
        let diff = poly.eval(t) - 1.0 / ze;
        z.norm_sqr() * diff.norm_sqr() / (0.25 + t * t)
    };
    let opts = LineOptions::default();
    let log_n = (n as f64).ln();
    let bound = |t: f64| t.powf(-1.5) * (t + n as f64) * log_n.max(f64::MIN_POSITIVE);
    let mut blocks = MonitorReport::new("dyadic_block_vs_T^-3/2(T+N)logN")
        .with_note("lhs = (1/pi) int_{T<=tau<=2T}; rhs = T^(-3/2)(T+N)log N");
    let mut dyadic = Vec::new();
    let mut lo = split / 2.0;
    while lo >= 1.0 && dyadic.len() < 6 {
        dyadic.push(lo);
        lo /= 2.0;
    }
    let mut breaks = line_breakpoints(split, table.ordinates(), eps, opts.base_width);
    breaks = merge_breakpoints(0.0, split, breaks.into_iter().chain(dyadic.iter().copied()));
    let quad = integrate_panels(&integrand, &breaks, &opts.quad).map(|v| v / PI, 1.0 / PI);
    if !quad.value.is_finite() {
        return Err(IntegralError::NonFinite);
    }
    let mut c: f64 = 0.0;
    for &t in dyadic.iter().rev() {
        let sub: Vec<f64> = breaks.iter().copied().filter(|&b| b >= t && b <= 2.0 * t).collect();
        let part = integrate_panels(&integrand, &merge_breakpoints(t, 2.0 * t, sub), &opts.quad).value / PI;
        if n > 1 {
            blocks.push(t, part, bound(t));
            c = c.max(part / bound(t));
        }
    }
    // Σ_{k ≥ 0} T_k^{-3/2}(T_k + N) log N over T_k = 2^k N^{3/4}
    let geometric = (split.powf(-0.5) / (1.0 - 0.5f64.sqrt())
        + n as f64 * split.powf(-1.5) / (1.0 - 0.5f64.powf(1.5)))
        * log_n;
    let tail_estimate = if n > 1 {
        c * geometric
    } else {
        // no log N scale at N = 1; fall back to the mean-value fit
        log_mean_tail(&|t: f64| integrand(t) * (0.25 + t * t), split.max(4.0))
    };
    Ok(IResult { n, eps, split, quad, tail_estimate, block_constant: c, blocks })
}

pub const I_CSV_HEADER: &str = "N,eps,I,tail_I";

pub fn i_csv(rows: &[IResult]) -> String {
    let mut out = format!("{I_CSV_HEADER}\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.n, fmt_float(r.eps), fmt_float(r.quad.value), fmt_float(r.tail_estimate));
    }
    out
}

/// The three quotient bounds on a τ-grid.
#[derive(Debug, Clone, Serialize)]
pub struct QuotientMonitor {
    /// |q|² against |s|^ε.
    pub bound_i: MonitorReport,
    /// |q|² against 1 + ε|s|^{1/2}.
    pub bound_ii: MonitorReport,
    /// |q/(s(1−s))| against |s|^{ε/2}/|s−1|².
    pub bound_iii: MonitorReport,
}

pub fn quotient_monitor(eps: f64, tau_grid: &[f64]) -> Result<QuotientMonitor, IntegralError> {
    check_eps(eps)?;
    let mut i = MonitorReport::new("quotient_sq_vs_abs_s_pow_eps");
    let mut ii = MonitorReport::new("quotient_sq_vs_one_plus_eps_sqrt_abs_s");
    let mut iii = MonitorReport::new("quotient_over_s1ms_vs_abs_s_pow_half_eps_over_abs_sm1_sq");
    for &tau in tau_grid {
        let q = zeta_quotient(tau, eps)?;
        let s = Complex64::new(0.5, tau);
        let a = s.norm();
        i.push(tau, q.norm_sqr(), a.powf(eps));
        ii.push(tau, q.norm_sqr(), 1.0 + eps * a.sqrt());
        iii.push(tau, (q / (s * (1.0 - s))).norm(), a.powf(eps / 2.0) / (s - 1.0).norm_sqr());
    }
    Ok(QuotientMonitor { bound_i: i, bound_ii: ii, bound_iii: iii })
}

/// ∫_T^{2T} |M_N(½+ε+iτ)|² dτ against (T+N) Σ μ²(n) n^{-1-2ε}.
pub fn mean_value_monitor(n: u64, eps: f64, big_t: f64) -> Result<MonitorReport, IntegralError> {
    if !(eps > 0.0) || n == 0 || !(big_t >= (n as f64).powf(0.75)) {
        return Err(IntegralError::InvalidParameter(format!("N = {n}, eps = {eps}, T = {big_t}")));
    }
    let mobius = mobius_table(n)?;
    let poly = MobiusPolynomial::new(&mobius, n, 0.5 + eps)?;
    let f = |t: f64| poly.eval(t).norm_sqr();
    let breaks = merge_breakpoints(big_t, 2.0 * big_t, (1..(big_t as usize)).map(|k| big_t + k as f64));
    let opts = QuadOptions { abs_tol: 1e-9 * big_t, rel_tol: 1e-10, max_subdivisions: 100 };
    let lhs = integrate_panels(&f, &breaks, &opts).value;
    let rhs = (big_t + n as f64) * poly.mean_square();
    let mut r = MonitorReport::new("dirichlet_mean_square_vs_montgomery_vaughan")
        .with_note(format!("N = {n}, eps = {eps}; parameter is T"));
    r.push(big_t, lhs, rhs);
    Ok(r)
}

/// |ζ(½+iτ)|² against (1+|τ|)^{β(τ)}.
pub fn zeta_growth_monitor(tau_grid: &[f64]) -> Result<MonitorReport, IntegralError> {
    let mut r = MonitorReport::new("zeta_sq_vs_one_plus_tau_pow_beta");
    for &tau in tau_grid {
        let z = zeta(Complex64::new(0.5, tau), &acc())?;
        r.push(tau, z.norm_sqr(), (1.0 + tau.abs()).powf(beta(tau)));
    }
    Ok(r)
}

/// (1/π) ∫_0^T of a nonnegative line integrand, used for small checks.
pub fn line_integral<F: Fn(f64) -> f64 + Sync>(f: &F, tau_max: f64) -> QuadratureResult<f64> {
    integrate(f, 0.0, tau_max, &QuadOptions::default()).map(|v| v / PI, 1.0 / PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponents() {
        for tau in [0.0, 1.0, 1e3, 1e9, -5.0] {
            let b = beta(tau);
            assert!(b > 0.0 && b < 0.5, "beta({tau}) = {b}");
        }
        assert!(kappa(10.0).is_none());
        assert!(kappa(16.0).unwrap() > 0.0);
    }

    #[test]
    fn residue_value() {
        let l = l_closed(0.1).unwrap();
        assert!((l - 0.8520).abs() < 5e-4, "{l}");
        for eps in [0.01, 0.05, 0.1] {
            assert!((l_closed(eps).unwrap() - l_first_order(eps)).abs() <= 3.0 * eps * eps);
        }
    }

    #[test]
    fn quotient_limits() {
        let q = zeta_quotient(20.0, 1e-9).unwrap();
        assert!((q - 1.0).norm() < 1e-7);
        let m = quotient_monitor(0.1, &[0.001, 5.0]).unwrap();
        assert!(m.bound_i.grid.iter().all(|r| r.ratio.is_finite() && r.ratio > 0.0));
    }

    #[test]
    fn mean_value_trivial_case() {
        let r = mean_value_monitor(1, 0.1, 10.0).unwrap();
        assert!((r.grid[0].lhs - 10.0).abs() < 1e-8);
        assert_eq!(r.grid[0].rhs, 11.0);
        assert!(r.max_ratio < 1.0);
    }
}
