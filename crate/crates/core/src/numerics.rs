//! Compensated summation and adaptive Gauss–Kronrod quadrature.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Componentwise compensated accumulator for complex sums.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl CompensatedComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    #[inline]
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Values that the quadrature routines know how to accumulate.
pub trait QuadValue:
    Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
    fn is_finite_value(&self) -> bool;
    fn accumulate(values: impl Iterator<Item = Self>) -> Self;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
    fn accumulate(values: impl Iterator<Item = Self>) -> Self {
        values.collect::<CompensatedSum>().value()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn is_finite_value(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn accumulate(values: impl Iterator<Item = Self>) -> Self {
        let mut acc = CompensatedComplexSum::new();
        for v in values {
            acc.add(v);
        }
        acc.value()
    }
}

/// Value of an integral together with its error bound and panel count.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QuadratureResult<V> {
    pub value: V,
    pub error_bound: f64,
    /// Number of subintervals in the final partition.
    pub panels: usize,
    /// False when some panel hit its subdivision cap before meeting tolerance.
    pub converged: bool,
}

impl<V: QuadValue> QuadratureResult<V> {
    pub fn exact(value: V) -> Self {
        Self { value, error_bound: 0.0, panels: 0, converged: true }
    }

    pub fn map<W: QuadValue>(self, f: impl FnOnce(V) -> W, scale: f64) -> QuadratureResult<W> {
        QuadratureResult {
            value: f(self.value),
            error_bound: self.error_bound * scale.abs(),
            panels: self.panels,
            converged: self.converged,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 1e-10, max_subdivisions: 200 }
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy)]
struct Segment<V> {
    a: f64,
    b: f64,
    value: V,
    error: f64,
}

/// One 15-point Kronrod / 7-point Gauss evaluation with the QUADPACK
/// error heuristic.
fn gk15<V: QuadValue, F: Fn(f64) -> V + ?Sized>(f: &F, a: f64, b: f64) -> Segment<V> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut fv1 = [V::zero(); 7];
    let mut fv2 = [V::zero(); 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod = kronrod + (f1 + f2) * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + (f1 + f2) * WG[j / 2];
        }
    }
    let mean = kronrod * 0.5;
    let mut resasc = WGK[7] * (fc - mean).magnitude();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).magnitude() + (fv2[j] - mean).magnitude());
    }
    resasc *= half.abs();
    let value = kronrod * half;
    let mut error = ((kronrod - gauss) * half).magnitude();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    let resabs = value.magnitude();
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    if !value.is_finite_value() {
        error = f64::INFINITY;
    }
    Segment { a, b, value, error }
}

/// Globally adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
pub fn integrate<V, F>(f: &F, a: f64, b: f64, opts: &QuadOptions) -> QuadratureResult<V>
where
    V: QuadValue,
    F: Fn(f64) -> V + ?Sized,
{
    if a == b {
        return QuadratureResult::exact(V::zero());
    }
    let mut segments = vec![gk15(f, a, b)];
    loop {
        let total = V::accumulate(segments.iter().map(|s| s.value));
        let err: f64 = segments.iter().map(|s| s.error).sum();
        let target = opts.abs_tol.max(opts.rel_tol * total.magnitude());
        if err <= target || segments.len() >= opts.max_subdivisions {
            return QuadratureResult {
                value: total,
                error_bound: err,
                panels: segments.len(),
                converged: err <= target,
            };
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, s)| if s.error > acc.1 { (i, s.error) } else { acc });
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // interval exhausted at machine resolution
            segments.push(seg);
            let total = V::accumulate(segments.iter().map(|s| s.value));
            return QuadratureResult {
                value: total,
                error_bound: segments.iter().map(|s| s.error).sum(),
                panels: segments.len(),
                converged: false,
            };
        }
        segments.push(gk15(f, seg.a, mid));
        segments.push(gk15(f, mid, seg.b));
        // keep a canonical order so that the final reduction is deterministic
        segments.sort_by(|x, y| x.a.total_cmp(&y.a));
    }
}

/// Integrate over consecutive panels `[breaks[i], breaks[i+1]]`.
///
/// The absolute tolerance is shared between panels in proportion to their
/// length; panels are processed in parallel and reduced in index order.
pub fn integrate_panels<V, F>(f: &F, breaks: &[f64], opts: &QuadOptions) -> QuadratureResult<V>
where
    V: QuadValue,
    F: Fn(f64) -> V + Sync + ?Sized,
{
    if breaks.len() < 2 {
        return QuadratureResult::exact(V::zero());
    }
    let span = breaks[breaks.len() - 1] - breaks[0];
    let parts: Vec<QuadratureResult<V>> = breaks
        .par_windows(2)
        .map(|w| {
            let local = QuadOptions {
                abs_tol: opts.abs_tol * ((w[1] - w[0]) / span).abs(),
                rel_tol: opts.rel_tol,
                max_subdivisions: opts.max_subdivisions,
            };
            integrate(f, w[0], w[1], &local)
        })
        .collect();
    QuadratureResult {
        value: V::accumulate(parts.iter().map(|p| p.value)),
        error_bound: parts.iter().map(|p| p.error_bound).sum(),
        panels: parts.iter().map(|p| p.panels).sum(),
        converged: parts.iter().all(|p| p.converged),
    }
}

/// Sorted, deduplicated breakpoints restricted to `[a, b]`, endpoints included.
pub fn merge_breakpoints(a: f64, b: f64, interior: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut pts: Vec<f64> = interior.into_iter().filter(|x| *x > a && *x < b).collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * (1.0 + y.abs()));
    pts
}

/// Breakpoints on `[a, b]` with spacing `base`, refined to spacing `fine`
/// within `radius` of every point in `centers`.
pub fn refined_breakpoints(a: f64, b: f64, base: f64, centers: &[f64], radius: f64, fine: f64) -> Vec<f64> {
    assert!(base > 0.0 && fine > 0.0 && b >= a);
    let mut pts = Vec::new();
    let coarse = ((b - a) / base).ceil() as usize;
    pts.extend((1..coarse).map(|k| a + k as f64 * (b - a) / coarse as f64));
    for &c in centers {
        if c + radius < a || c - radius > b {
            continue;
        }
        let steps = (2.0 * radius / fine).ceil() as usize;
        let lo = c - radius;
        pts.extend((0..=steps).map(|k| lo + k as f64 * (2.0 * radius / steps as f64)));
    }
    merge_breakpoints(a, b, pts)
}
