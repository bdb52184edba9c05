//! Perron's formula for `M_N(iτ) = Σ_{n≤N} μ(n) n^{-iτ}` and the deformed
//! contour `𝒮_N` built from per-integer typical heights.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::arithmetic::{mobius_table, ArithmeticError, MobiusTable, VonMangoldtTable};
use crate::integrals::{beta, kappa};
use crate::numerics::{
    integrate_panels, refined_breakpoints, CompensatedComplexSum, QuadOptions, QuadratureResult,
};
use crate::report::MonitorReport;
use crate::special_functions::{int_pow_neg, zeta, EvaluationAccuracy, SpecialFunctionError};
use crate::zeros::{min_typical_v, ZeroError, ZeroTable};

/// Closest admissible approach of the path to the pole `z = iτ`.
pub const POLE_CLEARANCE: f64 = 1e-3;
/// Shift applied to τ when it coincides with a horizontal segment height.
pub const TAU_NUDGE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ContourError {
    #[error("kappa = {kappa} >= K = {big_k} for N = {n}; the construction needs kappa < K, pass an explicit kappa override")]
    KappaExceedsK { n: u64, kappa: u64, big_k: u64 },
    #[error("zero table height {height} below the contour top {required}")]
    ZeroTableTooShort { height: f64, required: f64 },
    #[error("V_{n} = {v} puts the vertical segment beyond abscissa 1 + 1/log N")]
    AbscissaOutOfRange { n: u64, v: u32 },
    #[error("path passes within {distance} of the pole at i*{tau}")]
    NearPole { tau: f64, distance: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Zeros(#[from] ZeroError),
    #[error(transparent)]
    Arithmetic(#[from] ArithmeticError),
    #[error(transparent)]
    Special(#[from] SpecialFunctionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentKind {
    Vertical,
    Horizontal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub kind: SegmentKind,
    pub start: Complex64,
    pub end: Complex64,
}

impl Segment {
    fn length(&self) -> f64 {
        (self.end - self.start).norm()
    }
}

/// The upper half of `𝒮_N`; the lower half is its mirror image.
#[derive(Debug, Clone)]
pub struct ContourPath {
    pub n_param: u64,
    pub kappa: u64,
    pub big_k: u64,
    pub n0: f64,
    pub n1: f64,
    pub segments: Vec<Segment>,
    pub v_table: BTreeMap<u64, u32>,
    /// Whether κ came from an override instead of the formula.
    pub kappa_overridden: bool,
}

/// `⌊(log N)^{1/2} (log log N)^{5/2}⌋` and `⌊log N / log 2⌋`.
pub fn kappa_and_k(n: u64) -> (u64, u64) {
    let l = (n as f64).ln();
    let kappa = (l.sqrt() * l.ln().powf(2.5)).floor() as u64;
    // exact integer log2 avoids rounding at powers of two
    let big_k = 63 - u64::from(n.leading_zeros());
    (kappa, big_k)
}

fn abscissa(v: f64, log_n: f64) -> f64 {
    0.5 + v / log_n
}

/// Build the upper half of `𝒮_N`.
pub fn build_contour(
    n: u64,
    kappa_override: Option<u64>,
    table: &ZeroTable,
    lam: &VonMangoldtTable,
    delta: f64,
) -> Result<ContourPath, ContourError> {
    if n < 16 {
        return Err(ContourError::InvalidParameter(format!("N = {n} < 16")));
    }
    let (formula_kappa, big_k) = kappa_and_k(n);
    let kappa = match kappa_override {
        Some(k) => {
            if k < 2 || k >= big_k {
                return Err(ContourError::InvalidParameter(format!(
                    "kappa override {k} outside [2, K-1] with K = {big_k}"
                )));
            }
            k
        }
        None if formula_kappa >= big_k => {
            return Err(ContourError::KappaExceedsK { n, kappa: formula_kappa, big_k });
        }
        None => formula_kappa.max(2),
    };
    let n0 = 1u64 << kappa;
    let n1 = 1u64 << big_k;
    if table.height() < n1 as f64 + 2.0 {
        return Err(ContourError::ZeroTableTooShort { height: table.height(), required: n1 as f64 + 2.0 });
    }
    if lam.limit() < n1 {
        return Err(ContourError::InvalidParameter(format!(
            "von Mangoldt table limit {} below N_1 = {n1}",
            lam.limit()
        )));
    }
    let log_n = (n as f64).ln();
    let v_max = (0.5 * log_n + 1.0).floor() as u32;
    let vs: Vec<(u64, u32)> = (n0..n1)
        .into_par_iter()
        .map(|m| {
            let t_k = 1u64 << (63 - m.leading_zeros());
            let r = min_typical_v(m, t_k as f64, table, lam, delta)?;
            if r.v > v_max {
                return Err(ContourError::AbscissaOutOfRange { n: m, v: r.v });
            }
            Ok((m, r.v))
        })
        .collect::<Result<_, ContourError>>()?;
    let v_table: BTreeMap<u64, u32> = vs.into_iter().collect();

    let a0 = abscissa(1.0, log_n);
    let x = |m: u64| abscissa(f64::from(v_table[&m]), log_n);
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let mut segments = Vec::with_capacity(2 * (n1 - n0) as usize + 2);
    segments.push(Segment { kind: SegmentKind::Vertical, start: c(a0, 0.0), end: c(a0, n0 as f64) });
    segments.push(Segment { kind: SegmentKind::Horizontal, start: c(a0, n0 as f64), end: c(x(n0), n0 as f64) });
    for m in n0..n1 {
        let (lo, hi) = (m as f64, (m + 1) as f64);
        segments.push(Segment { kind: SegmentKind::Vertical, start: c(x(m), lo), end: c(x(m), hi) });
        let next = if m + 1 < n1 { x(m + 1) } else { 1.0 + 1.0 / log_n };
        segments.push(Segment { kind: SegmentKind::Horizontal, start: c(x(m), hi), end: c(next, hi) });
    }
    Ok(ContourPath {
        n_param: n,
        kappa,
        big_k,
        n0: n0 as f64,
        n1: n1 as f64,
        segments,
        v_table,
        kappa_overridden: kappa_override.is_some(),
    })
}

impl ContourPath {
    /// Largest gap between consecutive segment endpoints.
    pub fn max_gap(&self) -> f64 {
        self.segments.windows(2).map(|w| (w[0].end - w[1].start).norm()).fold(0.0, f64::max)
    }

    /// Smallest and largest abscissa on the path.
    pub fn abscissa_range(&self) -> (f64, f64) {
        self.segments
            .iter()
            .flat_map(|s| [s.start.re, s.end.re])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
    }

    pub fn last_point(&self) -> Complex64 {
        self.segments.last().map_or(Complex64::new(0.0, 0.0), |s| s.end)
    }

    pub fn export(&self) -> ContourExport {
        ContourExport {
            n: self.n_param,
            kappa: self.kappa,
            big_k: self.big_k,
            n0: self.n0,
            n1: self.n1,
            kappa_overridden: self.kappa_overridden,
            segments: self
                .segments
                .iter()
                .map(|s| SegmentRecord { kind: s.kind, re0: s.start.re, im0: s.start.im, re1: s.end.re, im1: s.end.im })
                .collect(),
            v_table: self.v_table.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SegmentRecord {
    pub kind: SegmentKind,
    pub re0: f64,
    pub im0: f64,
    pub re1: f64,
    pub im1: f64,
}

/// Plot-ready form of a [`ContourPath`].
#[derive(Debug, Clone, Serialize)]
pub struct ContourExport {
    #[serde(rename = "N")]
    pub n: u64,
    pub kappa: u64,
    #[serde(rename = "K")]
    pub big_k: u64,
    pub n0: f64,
    pub n1: f64,
    pub kappa_overridden: bool,
    pub segments: Vec<SegmentRecord>,
    pub v_table: BTreeMap<u64, u32>,
}

fn contour_quad_options() -> QuadOptions {
    QuadOptions { abs_tol: 1e-10, rel_tol: 1e-12, max_subdivisions: 200 }
}

/// `ζ(z)^{-1} N^z / (z − iτ)`.
fn perron_integrand(z: Complex64, log_n: f64, tau: f64) -> Complex64 {
    let acc = EvaluationAccuracy::default();
    match zeta(z, &acc) {
        Ok(zv) => (z * log_n).exp() / (zv * (z - Complex64::new(0.0, tau))),
        Err(_) => Complex64::new(f64::NAN, f64::NAN),
    }
}

/// ∫ over one segment of the integrand, with breakpoints clustered near zero
/// ordinates when the segment is vertical.
fn segment_integral(seg: &Segment, log_n: f64, tau: f64, ordinates: &[f64]) -> QuadratureResult<Complex64> {
    let len = seg.length();
    if len == 0.0 {
        return QuadratureResult::exact(Complex64::new(0.0, 0.0));
    }
    let dir = (seg.end - seg.start) / len;
    let breaks = match seg.kind {
        SegmentKind::Vertical => {
            let d = (seg.start.re - 0.5).max(1e-3);
            let (lo, hi) = (seg.start.im.min(seg.end.im), seg.start.im.max(seg.end.im));
            let centers: Vec<f64> = ordinates
                .iter()
                .flat_map(|&g| [g, -g])
                .filter(|&g| g >= lo - 2.0 * d && g <= hi + 2.0 * d)
                .map(|g| (g - seg.start.im) * dir.im)
                .collect();
            refined_breakpoints(0.0, len, 1.0, &centers, 2.0 * d, d / 4.0)
        }
        SegmentKind::Horizontal => vec![0.0, len],
    };
    let f = |u: f64| perron_integrand(seg.start + dir * u, log_n, tau) * dir;
    integrate_panels(&f, &breaks, &contour_quad_options())
}

fn mirror(seg: &Segment) -> Segment {
    Segment { kind: seg.kind, start: seg.end.conj(), end: seg.start.conj() }
}

fn sum_results(parts: impl Iterator<Item = QuadratureResult<Complex64>>) -> QuadratureResult<Complex64> {
    let mut acc = CompensatedComplexSum::new();
    let mut out = QuadratureResult::exact(Complex64::new(0.0, 0.0));
    for p in parts {
        acc.add(p.value);
        out.error_bound += p.error_bound;
        out.panels += p.panels;
        out.converged &= p.converged;
    }
    out.value = acc.value();
    out
}

fn nudged_tau(tau: f64, heights: impl Iterator<Item = f64>) -> f64 {
    let mut t = tau;
    for h in heights {
        if (t.abs() - h).abs() < TAU_NUDGE {
            t += TAU_NUDGE;
        }
    }
    t
}

fn check_clearance(segments: &[Segment], tau: f64) -> Result<(), ContourError> {
    let pole = Complex64::new(0.0, tau);
    let distance = segments
        .iter()
        .map(|s| {
            let d = s.end - s.start;
            let l2 = d.norm_sqr();
            let u = if l2 == 0.0 { 0.0 } else { (((pole - s.start) * d.conj()).re / l2).clamp(0.0, 1.0) };
            (s.start + d * u - pole).norm()
        })
        .fold(f64::INFINITY, f64::min);
    if distance < POLE_CLEARANCE {
        return Err(ContourError::NearPole { tau, distance });
    }
    Ok(())
}

/// `B_N = (2πi)^{-1} ∫ ζ(z)^{-1} N^z/(z − iτ) dz` along the full symmetric
/// `𝒮_N`, from `1+1/log N − iN_1` to `1+1/log N + iN_1`.
pub fn b_n_integral(tau: f64, path: &ContourPath, table: &ZeroTable) -> Result<QuadratureResult<Complex64>, ContourError> {
    let log_n = (path.n_param as f64).ln();
    let tau = nudged_tau(
        tau,
        path.segments.iter().filter(|s| s.kind == SegmentKind::Horizontal).map(|s| s.start.im),
    );
    let full: Vec<Segment> = path.segments.iter().rev().map(mirror).chain(path.segments.iter().copied()).collect();
    check_clearance(&full, tau)?;
    let ords = table.ordinates();
    let parts: Vec<_> = full.par_iter().map(|s| segment_integral(s, log_n, tau, ords)).collect();
    Ok(scale_by_two_pi_i(sum_results(parts.into_iter())))
}

fn scale_by_two_pi_i(r: QuadratureResult<Complex64>) -> QuadratureResult<Complex64> {
    let k = Complex64::new(0.0, 2.0 * PI);
    QuadratureResult { value: r.value / k, error_bound: r.error_bound / (2.0 * PI), ..r }
}

/// `B_N` on the straight segment `Re z = 1 + 1/log N`, `|Im z| ≤ N_1`.
pub fn b_n_straight(n: u64, tau: f64) -> Result<QuadratureResult<Complex64>, ContourError> {
    if n < 2 {
        return Err(ContourError::InvalidParameter(format!("N = {n} < 2")));
    }
    let log_n = (n as f64).ln();
    let n1 = (1u64 << (63 - n.leading_zeros())) as f64;
    let c = 1.0 + 1.0 / log_n;
    let seg = Segment { kind: SegmentKind::Vertical, start: Complex64::new(c, -n1), end: Complex64::new(c, n1) };
    check_clearance(&[seg], tau)?;
    let f = |y: f64| perron_integrand(Complex64::new(c, y), log_n, tau) * Complex64::i();
    let steps = (2.0 * n1).ceil() as usize;
    let breaks: Vec<f64> = (0..=steps).map(|k| -n1 + 2.0 * n1 * k as f64 / steps as f64).collect();
    Ok(scale_by_two_pi_i(integrate_panels(&f, &breaks, &contour_quad_options())))
}

/// `M_N(iτ)` summed directly.
pub fn m_n_direct(mobius: &MobiusTable, n: u64, tau: f64) -> Complex64 {
    let s = Complex64::new(0.0, tau);
    let mut acc = CompensatedComplexSum::new();
    for k in 1..=n {
        let mu = mobius.mu(k);
        if mu != 0 {
            acc.add(int_pow_neg((k as f64).ln(), s) * f64::from(mu));
        }
    }
    acc.value()
}

/// Residual `|M_N(iτ) − N^{-iτ} B_N|` against `(1+|τ|) log N`.
pub fn perron_check(tau: f64, path: &ContourPath, table: &ZeroTable) -> Result<MonitorReport, ContourError> {
    let n = path.n_param;
    if tau.abs() > n as f64 / 5.0 {
        return Err(ContourError::InvalidParameter(format!("|tau| = {} > N/5", tau.abs())));
    }
    let mobius = mobius_table(n)?;
    let direct = m_n_direct(&mobius, n, tau);
    let b = b_n_integral(tau, path, table)?;
    let phase = Complex64::from_polar(1.0, -tau * (n as f64).ln());
    let residual = (direct - phase * b.value).norm();
    let mut r = MonitorReport::new("perron_residual_vs_(1+|tau|)logN")
        .with_note(format!("N = {n}; quadrature error bound {:e}", b.error_bound));
    r.push(tau, residual, (1.0 + tau.abs()) * (n as f64).ln());
    Ok(r)
}

#[derive(Debug, Clone, Serialize)]
pub struct TailIdentity {
    #[serde(rename = "N")]
    pub n: u64,
    pub eps: f64,
    pub tau: f64,
    pub t_max: u64,
    /// 1/ζ(s+ε) − M_N(s+ε) at s = ½ + iτ.
    pub lhs: [f64; 2],
    /// −M_N(iτ) N^{-1/2-ε} + (½+ε) ∫_N^{t_max} t^{-3/2-ε} M_t(iτ) dt.
    pub rhs: [f64; 2],
    pub residual: f64,
    /// ((½+ε)/ε) t_max^{-ε} max_{N≤t≤t_max} |M_t(iτ)|/√t.
    pub tail_estimate: f64,
}

/// Check the partial-summation identity for `1/ζ(s+ε) − M_N(s+ε)`, with the
/// integral summed exactly over the unit steps of `M_t`.
pub fn tail_identity_check(n: u64, eps: f64, tau: f64, t_max: u64) -> Result<TailIdentity, ContourError> {
    if !(eps > 0.0) || n == 0 || t_max < 100 * n {
        return Err(ContourError::InvalidParameter(format!("N = {n}, eps = {eps}, t_max = {t_max}")));
    }
    let mobius = mobius_table(t_max)?;
    let a = 0.5 + eps;
    let s = Complex64::new(a, tau);
    let it = Complex64::new(0.0, tau);
    let mut m_sigma = CompensatedComplexSum::new();
    let mut m_t = CompensatedComplexSum::new();
    let mut integral = CompensatedComplexSum::new();
    let mut max_ratio: f64 = 0.0;
    let mut m_at_n = Complex64::new(0.0, 0.0);
    for k in 1..t_max {
        let mu = mobius.mu(k);
        let lk = (k as f64).ln();
        if mu != 0 {
            let m = f64::from(mu);
            m_t.add(int_pow_neg(lk, it) * m);
            if k <= n {
                m_sigma.add(int_pow_neg(lk, s) * m);
            }
        }
        if k < n {
            continue;
        }
        let mk = m_t.value();
        if k == n {
            m_at_n = mk;
        }
        max_ratio = max_ratio.max(mk.norm() / (k as f64).sqrt());
        // ∫_k^{k+1} t^{-1-a} dt · a = k^{-a} − (k+1)^{-a}
        let step = -(-a * lk).exp() * (-a * (1.0 / k as f64).ln_1p()).exp_m1();
        integral.add(mk * step);
    }
    let lhs = 1.0 / zeta(s, &EvaluationAccuracy::default())? - m_sigma.value();
    let rhs = -m_at_n * (-a * (n as f64).ln()).exp() + integral.value();
    let tail_estimate = a / eps * (t_max as f64).powf(-eps) * max_ratio;
    Ok(TailIdentity {
        n,
        eps,
        tau,
        t_max,
        lhs: [lhs.re, lhs.im],
        rhs: [rhs.re, rhs.im],
        residual: (lhs - rhs).norm(),
        tail_estimate,
    })
}

/// Ratio tables for the three bounds on `M_N(iτ)` and on `1/ζ − M_N`.
#[derive(Debug, Clone, Serialize)]
pub struct MnBoundMonitors {
    /// |M_N(iτ)| against (1+|τ|) √N exp C(log N).
    pub uniform: MonitorReport,
    /// |M_N(iτ)| against N^{1/2} |τ|^{1/2−κ(τ)} inside its τ-window.
    pub large_tau: MonitorReport,
    /// |1/ζ(s+ε) − M_N(s+ε)| against N^{-ε/4} (1+|τ|)^{1/2−β(τ)}.
    pub difference: MonitorReport,
}

/// `C(u) = u^{1/2} (log u)^{5/2+δ}`.
pub fn growth_c(u: f64, delta: f64) -> f64 {
    u.sqrt() * u.ln().powf(2.5 + delta)
}

/// τ-window `[exp(3 (log N)^{1/2} (log log N)^{5/2+6δ}), N^{3/4}]`.
pub fn large_tau_window(n: u64, delta: f64) -> (f64, f64) {
    let l = (n as f64).ln();
    ((3.0 * l.sqrt() * l.ln().powf(2.5 + 6.0 * delta)).exp(), (n as f64).powf(0.75))
}

/// Smallest ε admitted by the difference bound, `25 (log log N)^{5/2+6δ} (log N)^{-1/2}`.
pub fn difference_eps_threshold(n: u64, delta: f64) -> f64 {
    let l = (n as f64).ln();
    25.0 * l.ln().powf(2.5 + 6.0 * delta) / l.sqrt()
}

pub fn mn_bound_monitors(n: u64, eps: f64, tau_grid: &[f64], delta: f64) -> Result<MnBoundMonitors, ContourError> {
    if n < 16 || !(eps > 0.0) || !(delta > 0.0) {
        return Err(ContourError::InvalidParameter(format!("N = {n}, eps = {eps}, delta = {delta}")));
    }
    let mobius = mobius_table(n)?;
    let l = (n as f64).ln();
    let sqrt_n = (n as f64).sqrt();
    let (w_lo, w_hi) = large_tau_window(n, delta);
    let mut uniform = MonitorReport::new("M_N(i tau) vs (1+|tau|) sqrt(N) exp C(log N)");
    let mut large = MonitorReport::new("M_N(i tau) vs N^(1/2) |tau|^(1/2-kappa(tau))")
        .with_note(format!("window [{w_lo:e}, {w_hi:e}]"));
    let threshold = difference_eps_threshold(n, delta);
    let mut diff = MonitorReport::new("1/zeta(s+eps) - M_N(s+eps) vs N^(-eps/4) (1+|tau|)^(1/2-beta(tau))")
        .with_note(format!("eps = {eps}, admissible from eps >= {threshold:e}; tau restricted to |tau| <= N^(3/4)"));
    let acc = EvaluationAccuracy::default();
    for &tau in tau_grid {
        let m = m_n_direct(&mobius, n, tau).norm();
        uniform.push(tau, m, (1.0 + tau.abs()) * sqrt_n * growth_c(l, delta).exp());
        if tau.abs() >= w_lo && tau.abs() <= w_hi {
            if let Some(k) = kappa(tau) {
                large.push(tau, m, sqrt_n * tau.abs().powf(0.5 - k));
            }
        }
        if tau.abs() <= w_hi {
            let s = Complex64::new(0.5 + eps, tau);
            let mut partial = CompensatedComplexSum::new();
            for k in 1..=n {
                let mu = mobius.mu(k);
                if mu != 0 {
                    partial.add(int_pow_neg((k as f64).ln(), s) * f64::from(mu));
                }
            }
            let d = (1.0 / zeta(s, &acc)? - partial.value()).norm();
            diff.push(tau, d, (n as f64).powf(-eps / 4.0) * (1.0 + tau.abs()).powf(0.5 - beta(tau)));
        }
    }
    if w_lo > w_hi {
        large = large.mark_empty(format!("lower end {w_lo:e} exceeds N^(3/4) = {w_hi:e}"));
    } else if large.grid.is_empty() {
        large = large.mark_empty("no grid point inside the window");
    }
    Ok(MnBoundMonitors { uniform, large_tau: large, difference: diff })
}
