//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

pub fn zero_table_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/zeros_1e5.txt")
}

/// Adaptive Simpson on `[a, b]` to absolute tolerance `tol`.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn step<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Richardson elimination of the powers `powers[0], powers[1], …` of the
/// step from values at successively doubled cutoffs.
pub fn richardson(values: &[f64], powers: &[f64]) -> f64 {
    let mut v = values.to_vec();
    for &p in powers.iter().take(values.len() - 1) {
        let f = 2f64.powf(p);
        v = v.windows(2).map(|w| (f * w[1] - w[0]) / (f - 1.0)).collect();
    }
    v[0]
}

/// ∫_0^X of a function smooth between the multiples of `m` and of `n`.
fn piecewise<F: Fn(f64, f64) -> f64>(f: &F, m: f64, n: f64, x: f64, tol: f64) -> f64 {
    let mut pts: Vec<f64> = (1..=(x / m) as u64).map(|k| k as f64 * m).chain((1..=(x / n) as u64).map(|k| k as f64 * n)).collect();
    pts.push(0.0);
    pts.push(x);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts.windows(2)
        .map(|w| {
            // evaluate with the floor fixed on the open piece
            let mid = 0.5 * (w[0] + w[1]);
            simpson(&|t| f(t, mid), w[0], w[1], tol)
        })
        .sum()
}

/// ⟨e_m, e_n⟩ = ∫_0^∞ {t/m}{t/n} t^{-2} dt by piecewise adaptive Simpson on
/// `[0, K·lcm]`, the exact mean-value term `μ/X` and Richardson in `1/X` over
/// K = 8, 16, 32, 64 periods.
pub fn inner_e_oracle(m: u64, n: u64) -> f64 {
    let g = {
        let (mut a, mut b) = (m, n);
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a
    };
    let period = (m / g * n) as f64;
    let (mf, nf) = (m as f64, n as f64);
    let prod = |t: f64, mid: f64| (t / mf - (mid / mf).floor()) * (t / nf - (mid / nf).floor());
    let integrand = |t: f64, mid: f64| if t == 0.0 { 1.0 / (mf * nf) } else { prod(t, mid) / (t * t) };
    let mean = piecewise(&prod, mf, nf, period, 1e-14) / period;
    let vals: Vec<f64> = [8.0, 16.0, 32.0, 64.0]
        .iter()
        .map(|k| {
            let x = k * period;
            piecewise(&integrand, mf, nf, x, 1e-15) + mean / x
        })
        .collect();
    richardson(&vals, &[2.0, 3.0, 4.0])
}

/// 𝔐e_α(s) = ∫_0^∞ {t/α} t^{-s-1} dt for real `0 < s < 1`, by the same
/// cutoff-and-extrapolate scheme with the exact mean term `X^{-s}/(2s)`.
pub fn mellin_e_oracle(alpha: f64, s: f64) -> f64 {
    let f = |t: f64, mid: f64| {
        if t == 0.0 {
            0.0
        } else {
            (t / alpha - (mid / alpha).floor()) * t.powf(-s - 1.0)
        }
    };
    let vals: Vec<f64> = [32.0, 64.0, 128.0, 256.0, 512.0]
        .iter()
        .map(|k| {
            let x = k * alpha;
            // the first piece has an integrable t^{-s} singularity at 0
            let head = alpha.powf(1.0 - s) / (alpha * (1.0 - s));
            head + piecewise(&f, alpha, alpha, x, 1e-14) - simpson(&|t| f(t, 0.5 * alpha), 0.0, alpha, 1e-14)
                + x.powf(-s) / (2.0 * s)
        })
        .collect();
    richardson(&vals, &[s + 1.0, s + 2.0, s + 3.0, s + 4.0])
}
