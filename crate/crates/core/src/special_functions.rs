//! ζ, ζ′, the completed ξ, complex log-Γ and the Riemann–Siegel phase.
//!
//! ζ is evaluated by Euler–Maclaurin summation with eight correction terms.
//! The number of leading terms is the smallest one for which Backlund's
//! remainder bound meets the requested absolute error, so the cost grows
//! like `|τ|` on the critical line. For `σ < 0` the functional equation maps
//! the evaluation back to `σ > 1`.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use thiserror::Error;

use crate::numerics::CompensatedComplexSum;
use crate::ComplexValue;

/// Euler's constant γ.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_61;
/// log 2π.
pub const LN_2PI: f64 = 1.837_877_066_409_345_483_56;
/// First Stieltjes constant γ₁.
pub const STIELTJES_1: f64 = -0.072_815_845_483_676_724_86;
/// Second Stieltjes constant γ₂.
pub const STIELTJES_2: f64 = -0.009_690_363_192_872_318_48;

const LN_PI: f64 = 1.144_729_885_849_400_174_14;

/// Largest |Im s| for which [`zeta`] is supported.
pub const MAX_IMAG: f64 = 1e7;

/// Correction terms in the Euler–Maclaurin tail.
const EM_CORRECTIONS: usize = 8;

/// B₂, B₄, …, B₂₀.
pub(crate) const BERNOULLI_EVEN: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecialFunctionError {
    #[error("ζ has a pole at s = 1")]
    PoleAtOne,
    #[error("accuracy {target:e} needs {needed} terms, more than the allowed {max_terms}")]
    AccuracyUnreachable { target: f64, needed: u64, max_terms: u64 },
    #[error("|Im s| = {0} lies outside the supported envelope |Im s| <= 1e7")]
    OutsideEnvelope(f64),
    #[error("Riemann–Siegel phase requested at t = {0} < 2")]
    DomainTooSmall(f64),
    #[error("invalid accuracy request: {0}")]
    InvalidAccuracy(String),
}

/// Requested absolute accuracy for series evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvaluationAccuracy {
    target_abs_error: f64,
    max_terms: u64,
}

impl EvaluationAccuracy {
    pub const MIN_TARGET: f64 = 1e-14;
    pub const MIN_TERMS: u64 = 16;

    pub fn new(target_abs_error: f64, max_terms: u64) -> Result<Self, SpecialFunctionError> {
        if !(target_abs_error >= Self::MIN_TARGET) || !target_abs_error.is_finite() {
            return Err(SpecialFunctionError::InvalidAccuracy(format!(
                "target {target_abs_error:e} must be finite and >= 1e-14"
            )));
        }
        if max_terms < Self::MIN_TERMS {
            return Err(SpecialFunctionError::InvalidAccuracy(format!("max_terms {max_terms} < 16")));
        }
        Ok(Self { target_abs_error, max_terms })
    }

    pub fn target_abs_error(&self) -> f64 {
        self.target_abs_error
    }

    pub fn max_terms(&self) -> u64 {
        self.max_terms
    }
}

impl Default for EvaluationAccuracy {
    fn default() -> Self {
        Self { target_abs_error: 1e-13, max_terms: 20_000_000 }
    }
}

#[inline]
fn check_domain(s: Complex64) -> Result<(), SpecialFunctionError> {
    if s.re == 1.0 && s.im == 0.0 {
        return Err(SpecialFunctionError::PoleAtOne);
    }
    if !(s.im.abs() <= MAX_IMAG) {
        return Err(SpecialFunctionError::OutsideEnvelope(s.im.abs()));
    }
    Ok(())
}

/// `n^{-s}` for a positive integer `n` whose logarithm is `ln_n`.
#[inline]
pub fn int_pow_neg(ln_n: f64, s: Complex64) -> Complex64 {
    let mag = (-s.re * ln_n).exp();
    let (sin, cos) = (s.im * ln_n).sin_cos();
    Complex64::new(mag * cos, -mag * sin)
}

/// Euler–Maclaurin cut-off and the remainder bound it achieves.
///
/// Returns the smallest `N` with `|R| <= target`, where `|R|` is Backlund's
/// bound `|s(s+1)…(s+2p+1) B_{2p+2}| N^{-σ-2p-1} / ((2p+2)! (σ+2p+1))`,
/// optionally inflated by `extra(N)` for derivative bounds.
fn em_cutoff(s: Complex64, target: f64, extra: impl Fn(f64) -> f64) -> (u64, f64) {
    let p = EM_CORRECTIONS;
    let a = s.re + (2 * p + 1) as f64;
    debug_assert!(a > 0.0);
    let mut log_c = BERNOULLI_EVEN[p].abs().ln() - ln_factorial(2 * p + 2) - a.ln();
    for j in 0..=(2 * p + 1) {
        log_c += (s + j as f64).norm().ln();
    }
    let bound = |n: f64| (log_c - a * n.ln()).exp() * extra(n);
    let mut n = ((log_c - target.ln()) / a).exp().ceil().max(8.0);
    // the inflation factor grows slowly, so a few upward steps settle it
    while bound(n) > target && n < 1e15 {
        n = (n * 1.05).ceil();
    }
    (n as u64, bound(n))
}

fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// Riemann ζ(s) to absolute error `acc.target_abs_error()`.
pub fn zeta(s: ComplexValue, acc: &EvaluationAccuracy) -> Result<ComplexValue, SpecialFunctionError> {
    check_domain(s)?;
    if s.re < 0.0 {
        return zeta_reflected(s, acc);
    }
    zeta_em(s, acc)
}

fn zeta_em(s: Complex64, acc: &EvaluationAccuracy) -> Result<Complex64, SpecialFunctionError> {
    let (n, _) = em_cutoff(s, acc.target_abs_error, |_| 1.0);
    if n > acc.max_terms {
        return Err(SpecialFunctionError::AccuracyUnreachable {
            target: acc.target_abs_error,
            needed: n,
            max_terms: acc.max_terms,
        });
    }
    let mut sum = CompensatedComplexSum::new();
    for k in 1..n {
        sum.add(int_pow_neg((k as f64).ln(), s));
    }
    let nf = n as f64;
    let ln_n = nf.ln();
    let n_pow = int_pow_neg(ln_n, s); // N^{-s}
    sum.add(n_pow * nf / (s - 1.0));
    sum.add(n_pow * 0.5);
    // B_{2k}/(2k)! s(s+1)…(s+2k-2) N^{-s-2k+1}
    let mut poly = s;
    let mut npow = n_pow / nf;
    let mut fact = 2.0;
    for k in 1..=EM_CORRECTIONS {
        sum.add(poly * npow * (BERNOULLI_EVEN[k - 1] / fact));
        let j = (2 * k) as f64;
        poly = poly * (s + (j - 1.0)) * (s + j);
        npow /= nf * nf;
        fact *= (j + 1.0) * (j + 2.0);
    }
    Ok(sum.value())
}

/// ζ(s) = 2^s π^{s-1} sin(πs/2) Γ(1-s) ζ(1-s), evaluated in logarithmic form.
fn zeta_reflected(s: Complex64, acc: &EvaluationAccuracy) -> Result<Complex64, SpecialFunctionError> {
    let one_minus = Complex64::new(1.0, 0.0) - s;
    let log_factor = s * LN_2 + (s - 1.0) * LN_PI + ln_sin(s * (PI / 2.0)) + ln_gamma(one_minus);
    let factor = log_factor.exp();
    let inner_target = (acc.target_abs_error / factor.norm().max(1.0)).max(EvaluationAccuracy::MIN_TARGET);
    let inner = EvaluationAccuracy { target_abs_error: inner_target, max_terms: acc.max_terms };
    Ok(factor * zeta_em(one_minus, &inner)?)
}

/// ζ′(s) to absolute error `acc.target_abs_error()`.
pub fn zeta_derivative(
    s: ComplexValue,
    acc: &EvaluationAccuracy,
) -> Result<ComplexValue, SpecialFunctionError> {
    check_domain(s)?;
    if s.re < 0.0 {
        // ζ(s) = χ(s) ζ(1-s):  ζ′(s) = χ(s) [χ′/χ(s) ζ(1-s) − ζ′(1-s)]
        let one_minus = Complex64::new(1.0, 0.0) - s;
        let chi = (s * LN_2 + (s - 1.0) * LN_PI + ln_sin(s * (PI / 2.0)) + ln_gamma(one_minus)).exp();
        let log_deriv = Complex64::new(LN_2 + LN_PI, 0.0) + (s * (PI / 2.0)).cos() / (s * (PI / 2.0)).sin() * (PI / 2.0)
            - digamma(one_minus);
        let scale = chi.norm().max(1.0) * (1.0 + log_deriv.norm());
        let inner = EvaluationAccuracy {
            target_abs_error: (acc.target_abs_error / scale).max(EvaluationAccuracy::MIN_TARGET),
            max_terms: acc.max_terms,
        };
        let z = zeta_em(one_minus, &inner)?;
        let dz = zeta_derivative_em(one_minus, &inner)?;
        return Ok(chi * (log_deriv * z - dz));
    }
    zeta_derivative_em(s, acc)
}

fn zeta_derivative_em(s: Complex64, acc: &EvaluationAccuracy) -> Result<Complex64, SpecialFunctionError> {
    let p = EM_CORRECTIONS;
    // Σ_j Π_{i≠j} |s+i| / Π_i |s+i|, computed without dividing by a vanishing factor
    let factors: Vec<f64> = (0..=(2 * p + 1)).map(|j| (s + j as f64).norm()).collect();
    let prod: f64 = factors.iter().product();
    let mut leave_one_out = 0.0;
    for j in 0..factors.len() {
        leave_one_out += factors.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, f)| f).product::<f64>();
    }
    let ratio = if prod > 0.0 { leave_one_out / prod } else { f64::INFINITY };
    let a = s.re + (2 * p + 1) as f64;
    let extra = move |n: f64| n.ln() + 1.0 / a + ratio.min(1e6);
    let (n, _) = em_cutoff(s, acc.target_abs_error, extra);
    if n > acc.max_terms {
        return Err(SpecialFunctionError::AccuracyUnreachable {
            target: acc.target_abs_error,
            needed: n,
            max_terms: acc.max_terms,
        });
    }
    let mut sum = CompensatedComplexSum::new();
    for k in 2..n {
        let ln_k = (k as f64).ln();
        sum.add(-int_pow_neg(ln_k, s) * ln_k);
    }
    let nf = n as f64;
    let ln_n = nf.ln();
    let n_pow = int_pow_neg(ln_n, s);
    let sm1 = s - 1.0;
    sum.add(n_pow * nf * (-ln_n / sm1 - 1.0 / (sm1 * sm1)));
    sum.add(-n_pow * (0.5 * ln_n));
    let mut poly = s;
    let mut dpoly = Complex64::new(1.0, 0.0);
    let mut npow = n_pow / nf;
    let mut fact = 2.0;
    for k in 1..=p {
        sum.add(npow * (dpoly - poly * ln_n) * (BERNOULLI_EVEN[k - 1] / fact));
        let j = (2 * k) as f64;
        let q = (s + (j - 1.0)) * (s + j);
        let dq = s * 2.0 + (2.0 * j - 1.0);
        dpoly = dpoly * q + poly * dq;
        poly = poly * q;
        npow /= nf * nf;
        fact *= (j + 1.0) * (j + 2.0);
    }
    Ok(sum.value())
}

/// log sin z on a branch that is safe to exponentiate for large |Im z|.
pub fn ln_sin(z: Complex64) -> Complex64 {
    if z.im.abs() < 1.0 {
        return z.sin().ln();
    }
    if z.im > 0.0 {
        // sin z = e^{-iz} (e^{2iz} − 1) / (2i), |e^{2iz}| < 1
        let i = Complex64::new(0.0, 1.0);
        let w = (i * z * 2.0).exp();
        -i * z + ((w - 1.0) / (i * 2.0)).ln()
    } else {
        ln_sin(z.conj()).conj()
    }
}

/// log Γ(z): Stirling series after an upward shift, reflection for Re z < 0.
///
/// For Re z ≥ 0 the imaginary part is the continuous branch.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.0 {
        // Γ(z)Γ(1−z) = π / sin(πz)
        return Complex64::new(LN_PI, 0.0) - ln_sin(z * PI) - ln_gamma(Complex64::new(1.0, 0.0) - z);
    }
    let mut shift = Complex64::new(0.0, 0.0);
    let mut w = z;
    while w.norm() < 16.0 {
        shift += w.ln();
        w += 1.0;
    }
    const STIRLING: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
        -3617.0 / 122_400.0,
    ];
    let inv = 1.0 / w;
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut pw = inv;
    for c in STIRLING {
        series += pw * c;
        pw *= inv2;
    }
    (w - 0.5) * w.ln() - w + 0.5 * LN_2PI + series - shift
}

/// Digamma ψ(z) = Γ′/Γ(z).
pub fn digamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // ψ(1−z) − ψ(z) = π cot(πz)
        let pz = z * PI;
        return digamma(Complex64::new(1.0, 0.0) - z) - pz.cos() / pz.sin() * PI;
    }
    let mut shift = Complex64::new(0.0, 0.0);
    let mut w = z;
    while w.norm() < 16.0 {
        shift += 1.0 / w;
        w += 1.0;
    }
    let inv2 = 1.0 / (w * w);
    let mut series = Complex64::new(0.0, 0.0);
    let mut pw = inv2;
    for (k, b) in BERNOULLI_EVEN.iter().take(8).enumerate() {
        series += pw * (b / (2 * (k + 1)) as f64);
        pw *= inv2;
    }
    w.ln() - 0.5 / w - series - shift
}

/// Completed zeta ξ(s) = ½ s(s−1) π^{−s/2} Γ(s/2) ζ(s).
pub fn xi_completed(s: ComplexValue) -> ComplexValue {
    let one = Complex64::new(1.0, 0.0);
    let h = s - 1.0;
    if h.norm() < 1e-3 {
        // (s−1)ζ(s) = 1 + γ h − γ₁ h² + γ₂ h³/2 + …
        let reg = one + h * EULER_GAMMA - h * h * STIELTJES_1 + h * h * h * (STIELTJES_2 / 2.0);
        return s * 0.5 * (-(s * 0.5) * LN_PI + ln_gamma(s * 0.5)).exp() * reg;
    }
    if s.norm() < 1e-3 {
        return xi_completed(one - s);
    }
    // trivial zeros of ζ cancel the poles of Γ(s/2)
    if s.re < 0.0 && s.im.abs() < 1e-3 {
        let k = (-s.re / 2.0).round();
        if k >= 1.0 && (s.re + 2.0 * k).abs() < 1e-3 {
            return xi_completed(one - s);
        }
    }
    let acc = EvaluationAccuracy { target_abs_error: 1e-14, max_terms: 20_000_000 };
    let z = match zeta(s, &acc) {
        Ok(z) => z,
        Err(_) => return Complex64::new(f64::NAN, f64::NAN),
    };
    s * h * 0.5 * (-(s * 0.5) * LN_PI + ln_gamma(s * 0.5)).exp() * z
}

/// Riemann–Siegel phase θ(t) = Im log Γ(¼ + it/2) − (t/2) log π.
///
/// Uses the asymptotic expansion for t ≥ 10 and log-Γ below.
pub fn rs_theta(t: f64) -> Result<f64, SpecialFunctionError> {
    if !(t >= 2.0) {
        return Err(SpecialFunctionError::DomainTooSmall(t));
    }
    if t < 10.0 {
        return Ok(ln_gamma(Complex64::new(0.25, 0.5 * t)).im - 0.5 * t * LN_PI);
    }
    let inv = 1.0 / t;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 48.0
            + inv2 * (7.0 / 5760.0 + inv2 * (31.0 / 80640.0 + inv2 * (127.0 / 430_080.0 + inv2 * (511.0 / 1_216_512.0)))));
    Ok(0.5 * t * (t / (2.0 * PI)).ln() - 0.5 * t - PI / 8.0 + series)
}

/// Smooth zero-counting approximation θ(t)/π + 1.
pub fn riemann_von_mangoldt(t: f64) -> Result<f64, SpecialFunctionError> {
    Ok(rs_theta(t)? / PI + 1.0)
}
