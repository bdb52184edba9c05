//! The space H = L²(0,∞; t⁻² dt): inner products of χ = [t ≥ 1] and the
//! dilates e_n(t) = {t/n}, the Gram system, d_N and ν_{N,ε}.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::arithmetic::{mobius_table, ArithmeticError, MobiusPolynomial};
use crate::numerics::{
    integrate_panels, refined_breakpoints, CompensatedSum, QuadOptions, QuadratureResult,
};
use crate::report::fmt_float;
use crate::special_functions::{
    zeta, EvaluationAccuracy, SpecialFunctionError, BERNOULLI_EVEN, EULER_GAMMA, MAX_IMAG,
};
use crate::ComplexValue;

/// Largest index accepted by [`inner_e`].
pub const INNER_INDEX_MAX: u64 = 10_000;
/// Largest N for the dense Gram path.
pub const GRAM_MAX: usize = 500;
/// Relative eigenvalue cut-off in [`distance_dn`].
pub const EIGEN_CUTOFF: f64 = 1e-13;
/// Default tolerance requested from [`inner_e`].
pub const INNER_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum HilbertError {
    #[error("index {0} outside 1..=10000")]
    IndexOutOfRange(u64),
    #[error("N = {0} outside the dense envelope 1..=500")]
    DimensionOutOfRange(usize),
    #[error("tail bound {bound:e} exceeds tolerance {tol:e} at cutoff {cutoff}")]
    CutoffInsufficient { bound: f64, tol: f64, cutoff: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("integrand produced a non-finite value")]
    NonFinite,
    #[error(transparent)]
    Special(#[from] SpecialFunctionError),
    #[error(transparent)]
    Arithmetic(#[from] ArithmeticError),
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

const GL8_X: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_W: [f64; 4] = [
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Euler–Maclaurin order used for the tail over whole periods.
const PERIOD_EM_ORDER: usize = 6;
/// ζ(12) bounds ζ(2p) for the remainder estimate.
const ZETA_2P: f64 = 1.000_246_086_553_308;

/// Pieces of one period `[0, m n]` on which both fractional parts are affine:
/// `(u, v, a, b)` with `a = ⌊t/m⌋`, `b = ⌊t/n⌋` on `[u, v)`.
fn period_pieces(m: u64, n: u64) -> Vec<(u64, u64, u64, u64)> {
    let p = m * n;
    let mut out = Vec::with_capacity((m + n) as usize);
    let (mut next_m, mut next_n) = (m, n);
    let mut u = 0;
    while u < p {
        let v = next_m.min(next_n);
        out.push((u, v, u / m, u / n));
        if next_m == v {
            next_m += m;
        }
        if next_n == v {
            next_n += n;
        }
        u = v;
    }
    out
}

/// ⟨e_m, e_n⟩ for coprime `m, n` with `K` explicit periods.
fn inner_coprime(m: u64, n: u64, periods: u64) -> (f64, f64, f64, usize) {
    let pieces = period_pieces(m, n);
    let p = (m * n) as f64;
    let (mf, nf) = (m as f64, n as f64);
    let inv_mn = 1.0 / p;
    let mut acc = CompensatedSum::new();
    let mut magnitude = 0.0;
    // first stretch, where both fractional parts equal t/m and t/n
    let (_, v0, _, _) = pieces[0];
    acc.add(v0 as f64 * inv_mn);
    for j in 0..periods {
        let shift = j * m * n;
        for (idx, &(u, v, a, b)) in pieces.iter().enumerate() {
            if j == 0 && idx == 0 {
                continue;
            }
            let (u, v) = ((u + shift) as f64, (v + shift) as f64);
            let (a, b) = ((a + j * n) as f64, (b + j * m) as f64);
            let w = v - u;
            let t1 = w * inv_mn;
            let t2 = (a / nf + b / mf) * (w / u).ln_1p();
            let t3 = a * b * w / (u * v);
            acc.add(t1);
            acc.add(-t2);
            acc.add(t3);
            magnitude += t1 + t2.abs() + t3;
        }
    }
    // Σ_{j ≥ K} ∫_0^P f(x) (jP + x)^{-2} dx by Euler–Maclaurin in j, with
    // Q_k = P^{-2} ∫_0^P f(x) (P/(KP + x))^k dx.
    let kp = periods as f64 * p;
    let kmax = 2 * PERIOD_EM_ORDER + 1;
    let mut q = vec![0.0; kmax + 1];
    for &(u, v, a, b) in &pieces {
        let (u, v) = (u as f64, v as f64);
        let (c, h) = (0.5 * (u + v), 0.5 * (v - u));
        for (xi, wi) in GL8_X.iter().zip(GL8_W) {
            for x in [c - h * xi, c + h * xi] {
                let f = (x / mf - a as f64) * (x / nf - b as f64);
                let r = p / (kp + x);
                let mut rk = 1.0;
                for qk in q.iter_mut().skip(1) {
                    rk *= r;
                    *qk += wi * h * f * rk;
                }
            }
        }
    }
    for qk in &mut q {
        *qk /= p * p;
    }
    acc.add(q[1] + 0.5 * q[2]);
    for k in 1..=PERIOD_EM_ORDER {
        acc.add(BERNOULLI_EVEN[k - 1] * q[2 * k + 1]);
    }
    let fact: f64 = (1..=2 * PERIOD_EM_ORDER).map(|i| i as f64).product();
    let remainder = 2.0 * ZETA_2P * fact / (2.0 * std::f64::consts::PI).powi(2 * PERIOD_EM_ORDER as i32)
        * q[kmax];
    let rounding = 4.0 * f64::EPSILON * (magnitude + acc.value().abs());
    let npieces = pieces.len() * (periods as usize + 1);
    (acc.value(), remainder, rounding, npieces)
}

/// ⟨e_m, e_n⟩ = ∫₀^∞ {t/m}{t/n} t⁻² dt to absolute error `tol`.
///
/// The pair is reduced by its gcd, integrated exactly over whole periods and
/// the remaining periods are summed by Euler–Maclaurin.
pub fn inner_e_with_tol(m: u64, n: u64, tol: f64) -> Result<QuadratureResult<f64>, HilbertError> {
    for k in [m, n] {
        if k == 0 || k > INNER_INDEX_MAX {
            return Err(HilbertError::IndexOutOfRange(k));
        }
    }
    let g = gcd(m, n);
    let (m, n) = ((m / g).min(n / g), (m / g).max(n / g));
    let mut periods = 16;
    loop {
        let (value, remainder, rounding, panels) = inner_coprime(m, n, periods);
        let bound = remainder + rounding;
        if bound <= tol {
            return Ok(QuadratureResult {
                value: value / g as f64,
                error_bound: bound / g as f64,
                panels,
                converged: true,
            });
        }
        // more periods only help while truncation dominates rounding
        if periods >= 1024 || remainder <= rounding {
            return Err(HilbertError::CutoffInsufficient {
                bound,
                tol,
                cutoff: (periods * m * n) as f64,
            });
        }
        periods *= 2;
    }
}

pub fn inner_e(m: u64, n: u64) -> Result<QuadratureResult<f64>, HilbertError> {
    inner_e_with_tol(m, n, INNER_TOL)
}

/// H_K − log K − γ by its asymptotic expansion.
fn harmonic_tail(k: f64) -> f64 {
    let k2 = k * k;
    1.0 / (2.0 * k) - 1.0 / (12.0 * k2) + 1.0 / (120.0 * k2 * k2) - 1.0 / (252.0 * k2 * k2 * k2)
}

/// ⟨χ, e_n⟩ = ∫₁^∞ {t/n} t⁻² dt.
///
/// Pieces `[kn, (k+1)n)` contribute `(log(1+1/k) − 1/(k+1))/n`; the first
/// `K − 1` are summed and the rest is `(H_K − log K − γ)/n`.
pub fn inner_chi_e(n: u64) -> Result<QuadratureResult<f64>, HilbertError> {
    if n == 0 {
        return Err(HilbertError::IndexOutOfRange(0));
    }
    const K: u64 = 1000;
    let nf = n as f64;
    let mut acc = CompensatedSum::new();
    acc.add(nf.ln());
    for k in 1..K {
        let kf = k as f64;
        acc.add((1.0 / kf).ln_1p());
        acc.add(-1.0 / (kf + 1.0));
    }
    acc.add(harmonic_tail(K as f64));
    let value = acc.value() / nf;
    Ok(QuadratureResult {
        value,
        error_bound: 4.0 * f64::EPSILON * (1.0 + value.abs()) + 1.0 / (240.0 * (K as f64).powi(8)),
        panels: K as usize,
        converged: true,
    })
}

/// 𝔐e_α(s) = α^{-s} ζ(s)/(−s), and 𝔐χ(s) = 1/s.
pub fn mellin_e(alpha: f64, s: ComplexValue) -> Result<ComplexValue, HilbertError> {
    if !(alpha > 0.0) {
        return Err(HilbertError::InvalidParameter(format!("alpha = {alpha}")));
    }
    let z = zeta(s, &EvaluationAccuracy::default())?;
    Ok((-s * alpha.ln()).exp() * z / (-s))
}

pub fn mellin_chi(s: ComplexValue) -> ComplexValue {
    1.0 / s
}

#[derive(Debug, Clone, Serialize)]
pub struct GramSystem {
    pub n: usize,
    /// Row-major `n × n`, entry `[m-1][k-1] = ⟨e_m, e_k⟩`.
    pub gram: Vec<Vec<f64>>,
    /// `rhs[k-1] = ⟨χ, e_k⟩`.
    pub rhs: Vec<f64>,
    pub chi_norm: f64,
    pub entry_error: f64,
}

impl GramSystem {
    /// The system for `e_1, …, e_k`, `k ≤ n`.
    pub fn leading(&self, k: usize) -> GramSystem {
        assert!(k <= self.n);
        GramSystem {
            n: k,
            gram: self.gram[..k].iter().map(|row| row[..k].to_vec()).collect(),
            rhs: self.rhs[..k].to_vec(),
            chi_norm: self.chi_norm,
            entry_error: self.entry_error,
        }
    }
}

/// Gram matrix and right-hand side for `e_1, …, e_N`.
///
/// Only coprime pairs are integrated; the other entries follow from
/// ⟨e_{gm}, e_{gn}⟩ = ⟨e_m, e_n⟩/g.
pub fn gram_system(n: usize) -> Result<GramSystem, HilbertError> {
    if n == 0 || n > GRAM_MAX {
        return Err(HilbertError::DimensionOutOfRange(n));
    }
    let mut reduced: BTreeMap<(u64, u64), (f64, f64)> = BTreeMap::new();
    for i in 1..=n as u64 {
        for j in i..=n as u64 {
            let g = gcd(i, j);
            reduced.insert((i / g, j / g), (0.0, 0.0));
        }
    }
    let keys: Vec<(u64, u64)> = reduced.keys().copied().collect();
    let values: Vec<Result<QuadratureResult<f64>, HilbertError>> =
        keys.par_iter().map(|&(a, b)| inner_e(a, b)).collect();
    let mut entry_error: f64 = 0.0;
    for (key, v) in keys.iter().zip(values) {
        let v = v?;
        entry_error = entry_error.max(v.error_bound);
        reduced.insert(*key, (v.value, v.error_bound));
    }
    let mut gram = vec![vec![0.0; n]; n];
    for i in 1..=n as u64 {
        for j in i..=n as u64 {
            let g = gcd(i, j);
            let (v, _) = reduced[&(i / g, j / g)];
            let x = v / g as f64;
            gram[(i - 1) as usize][(j - 1) as usize] = x;
            gram[(j - 1) as usize][(i - 1) as usize] = x;
        }
    }
    let mut rhs = Vec::with_capacity(n);
    for k in 1..=n as u64 {
        let r = inner_chi_e(k)?;
        entry_error = entry_error.max(r.error_bound);
        rhs.push(r.value);
    }
    Ok(GramSystem { n, gram, rhs, chi_norm: 1.0, entry_error })
}

#[derive(Debug, Clone, Serialize)]
pub struct DistanceResult {
    pub n: usize,
    pub dn_squared: f64,
    pub coefficients: Vec<f64>,
    pub truncated_modes: usize,
    pub residual_check: f64,
    /// More than half of the eigenmodes were discarded.
    pub ill_conditioned: bool,
}

/// d_N² = min_c ‖χ − Σ c_k e_k‖² by a truncated eigen-solve of G c = b.
pub fn distance_dn(sys: &GramSystem) -> DistanceResult {
    let n = sys.n;
    if n == 0 {
        return DistanceResult {
            n,
            dn_squared: sys.chi_norm,
            coefficients: Vec::new(),
            truncated_modes: 0,
            residual_check: 0.0,
            ill_conditioned: false,
        };
    }
    let g = DMatrix::from_fn(n, n, |i, j| sys.gram[i][j]);
    let b = DVector::from_column_slice(&sys.rhs);
    let eig = SymmetricEigen::new(g.clone());
    let lambda_max = eig.eigenvalues.iter().fold(0.0f64, |a, &x| a.max(x));
    let cutoff = EIGEN_CUTOFF * lambda_max;
    let mut c = DVector::zeros(n);
    let mut explained = CompensatedSum::new();
    let mut truncated = 0;
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam <= cutoff {
            truncated += 1;
            continue;
        }
        let v = eig.eigenvectors.column(i);
        let proj = v.dot(&b);
        explained.add(proj * proj / lam);
        c += v * (proj / lam);
    }
    let residual = (&g * &c - &b).amax();
    DistanceResult {
        n,
        dn_squared: sys.chi_norm - explained.value(),
        coefficients: c.iter().copied().collect(),
        truncated_modes: truncated,
        residual_check: residual,
        ill_conditioned: truncated > n / 2,
    }
}

/// ‖χ − Σ c_k e_k‖² expanded through the Gram system.
pub fn norm_via_gram(sys: &GramSystem, chi_weight: f64, coeffs: &[f64]) -> f64 {
    assert_eq!(coeffs.len(), sys.n);
    let mut acc = CompensatedSum::new();
    acc.add(chi_weight * chi_weight * sys.chi_norm);
    for (i, &ci) in coeffs.iter().enumerate() {
        acc.add(2.0 * chi_weight * ci * sys.rhs[i]);
        for (j, &cj) in coeffs.iter().enumerate() {
            acc.add(ci * cj * sys.gram[i][j]);
        }
    }
    acc.value()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NuRoute {
    Gram,
    MellinLine,
}

/// ν together with the part of it that was not integrated.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NuResult {
    pub quad: QuadratureResult<f64>,
    /// Estimate of ∫_{|τ|>τ_max}; zero on the Gram route. Already added
    /// into `quad.value`.
    pub tail_estimate: f64,
}

/// Coefficients μ(n) n^{-ε} of ν_{N,ε}.
pub fn nu_coefficients(n: usize, eps: f64) -> Result<Vec<f64>, HilbertError> {
    let table = mobius_table(n as u64)?;
    Ok((1..=n as u64).map(|k| table.mu(k) as f64 * (-eps * (k as f64).ln()).exp()).collect())
}

/// ν_{N,ε} = ‖χ + Σ μ(n) n^{-ε} e_n‖² from the Gram entries.
pub fn nu_gram(sys: &GramSystem, eps: f64) -> Result<QuadratureResult<f64>, HilbertError> {
    if !(eps > 0.0) {
        return Err(HilbertError::InvalidParameter(format!("eps = {eps}")));
    }
    let c = nu_coefficients(sys.n, eps)?;
    let value = norm_via_gram(sys, 1.0, &c);
    let l1: f64 = c.iter().map(|x| x.abs()).sum();
    Ok(QuadratureResult {
        value,
        error_bound: sys.entry_error * (2.0 * l1 + l1 * l1),
        panels: sys.n * sys.n,
        converged: true,
    })
}

/// Settings for integrals over the critical line.
#[derive(Debug, Clone, Copy)]
pub struct LineOptions {
    pub quad: QuadOptions,
    /// Panel width away from zero ordinates.
    pub base_width: f64,
}

impl Default for LineOptions {
    fn default() -> Self {
        Self {
            quad: QuadOptions { abs_tol: 1e-9, rel_tol: 1e-11, max_subdivisions: 100 },
            base_width: 1.0,
        }
    }
}

/// Breakpoints on `[0, tau_max]` with the panel `[0, 1]` kept whole and
/// width `eps/4` within `2 eps` of every ordinate.
pub fn line_breakpoints(tau_max: f64, ordinates: &[f64], eps: f64, base: f64) -> Vec<f64> {
    let zeros: Vec<f64> = ordinates.iter().copied().filter(|&g| g <= tau_max + 2.0 * eps).collect();
    let mut pts = refined_breakpoints(1.0, tau_max, base, &zeros, 2.0 * eps, eps / 4.0);
    pts.insert(0, 0.0);
    pts
}

/// Tail of `(1/π) ∫_T^∞ m(τ) τ^{-2} dτ` where the mean of `m` is modelled as
/// `a + b log τ`, fitted to windowed means on `[T/4, T/2]` and `[T/2, T]`.
pub fn log_mean_tail<F: Fn(f64) -> f64 + Sync>(m: &F, tau_max: f64) -> f64 {
    let window_mean = |lo: f64, hi: f64| {
        let steps = ((hi - lo) / 0.05).ceil() as usize;
        let h = (hi - lo) / steps as f64;
        let vals: Vec<(f64, f64)> = (0..steps)
            .into_par_iter()
            .map(|k| {
                let t = lo + (k as f64 + 0.5) * h;
                (m(t), t.ln())
            })
            .collect();
        let mean: CompensatedSum = vals.iter().map(|v| v.0).collect();
        let lmean: CompensatedSum = vals.iter().map(|v| v.1).collect();
        (mean.value() / steps as f64, lmean.value() / steps as f64)
    };
    let (m1, l1) = window_mean(tau_max / 4.0, tau_max / 2.0);
    let (m2, l2) = window_mean(tau_max / 2.0, tau_max);
    let b = (m2 - m1) / (l2 - l1);
    let a = m2 - b * l2;
    let tail = (a + b * (tau_max.ln() + 1.0)) / (std::f64::consts::PI * tau_max);
    if tail > 0.0 {
        tail
    } else {
        m2.max(0.0) / (std::f64::consts::PI * tau_max)
    }
}

/// `(1/2π) ∫_{|τ| ≤ T} |g(½+iτ)|² |s|^{-2} dτ` for `g` with `g(s̄) = conj g(s)`,
/// plus the tail estimate from [`log_mean_tail`].
pub fn critical_line_norm<G>(
    g: &G,
    tau_max: f64,
    ordinates: &[f64],
    eps: f64,
    opts: &LineOptions,
) -> Result<NuResult, HilbertError>
where
    G: Fn(f64) -> Complex64 + Sync,
{
    if !(tau_max > 1.0 && tau_max <= MAX_IMAG) {
        return Err(HilbertError::InvalidParameter(format!("tau_max = {tau_max}")));
    }
    let breaks = line_breakpoints(tau_max, ordinates, eps, opts.base_width);
    let integrand = |t: f64| g(t).norm_sqr() / (0.25 + t * t);
    let scale = 1.0 / std::f64::consts::PI;
    let quad = integrate_panels(&integrand, &breaks, &opts.quad).map(|v| v * scale, scale);
    if !quad.value.is_finite() {
        return Err(HilbertError::NonFinite);
    }
    let tail = log_mean_tail(&|t: f64| g(t).norm_sqr() * t * t / (0.25 + t * t), tau_max);
    Ok(NuResult {
        quad: QuadratureResult { value: quad.value + tail, ..quad },
        tail_estimate: tail,
    })
}

fn zeta_on_line(t: f64) -> Complex64 {
    zeta(Complex64::new(0.5, t), &EvaluationAccuracy::default())
        .unwrap_or(Complex64::new(f64::NAN, f64::NAN))
}

/// ν_{N,ε} = (1/2π) ∫ |1 − ζ(s) M_N(s+ε)|² |s|^{-2} dτ on σ = ½.
pub fn nu_mellin_line(
    n: usize,
    eps: f64,
    tau_max: f64,
    ordinates: &[f64],
    opts: &LineOptions,
) -> Result<NuResult, HilbertError> {
    if !(eps > 0.0) {
        return Err(HilbertError::InvalidParameter(format!("eps = {eps}")));
    }
    let table = mobius_table(n as u64)?;
    let poly = MobiusPolynomial::new(&table, n as u64, 0.5 + eps)?;
    let g = |t: f64| Complex64::new(1.0, 0.0) - zeta_on_line(t) * poly.eval(t);
    critical_line_norm(&g, tau_max, ordinates, eps, opts)
}

/// ν_{N,ε} by either route. `tau_max` and `ordinates` only matter on the
/// Mellin-line route, which requires `tau_max ≥ 1000`.
pub fn nu(
    n: usize,
    eps: f64,
    route: NuRoute,
    tau_max: f64,
    ordinates: &[f64],
) -> Result<NuResult, HilbertError> {
    match route {
        NuRoute::Gram => {
            let sys = gram_system(n)?;
            Ok(NuResult { quad: nu_gram(&sys, eps)?, tail_estimate: 0.0 })
        }
        NuRoute::MellinLine => {
            if tau_max < 1e3 {
                return Err(HilbertError::InvalidParameter(format!("tau_max = {tau_max} < 1000")));
            }
            nu_mellin_line(n, eps, tau_max, ordinates, &LineOptions::default())
        }
    }
}

/// ‖e_1‖² along the critical line, for the Plancherel check.
pub fn e1_norm_on_line(tau_max: f64, ordinates: &[f64]) -> Result<NuResult, HilbertError> {
    critical_line_norm(&zeta_on_line, tau_max, ordinates, 0.25, &LineOptions::default())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub dn2: f64,
    pub nu: f64,
    pub eps: f64,
    pub truncated_modes: usize,
    pub entry_error: f64,
}

/// d_N² and ν_{N,ε} (Gram route) for `N = 1..=n_max`.
pub fn dn_sweep(n_max: usize, eps: f64) -> Result<Vec<SweepRow>, HilbertError> {
    let full = gram_system(n_max)?;
    let mut rows = Vec::with_capacity(n_max);
    for k in 1..=n_max {
        let sys = full.leading(k);
        let d = distance_dn(&sys);
        let nu = nu_gram(&sys, eps)?;
        rows.push(SweepRow {
            n: k,
            dn2: d.dn_squared,
            nu: nu.value,
            eps,
            truncated_modes: d.truncated_modes,
            entry_error: full.entry_error,
        });
    }
    Ok(rows)
}

pub const SWEEP_CSV_HEADER: &str = "N,dn2,nu,eps,truncated_modes,entry_error";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.n,
            fmt_float(r.dn2),
            fmt_float(r.nu),
            fmt_float(r.eps),
            r.truncated_modes,
            fmt_float(r.entry_error)
        );
    }
    out
}

/// ‖e_1‖² = log 2π − γ.
pub fn e1_norm_closed() -> f64 {
    crate::special_functions::LN_2PI - EULER_GAMMA
}
