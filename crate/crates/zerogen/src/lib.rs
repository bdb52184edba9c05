//! Critical-line zeros of ζ from the Riemann–Siegel Z function.
//!
//! Z is evaluated with the Riemann–Siegel main sum and the corrections
//! C₀…C₄, or through ζ itself at small heights. Zeros are isolated block by
//! block between good Gram points and polished with Brent's method.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io;
use std::path::Path;

use nyman_core::special_functions::{rs_theta, zeta, EvaluationAccuracy};
use nyman_core::Complex64;
use roots::{find_root_brent, SimpleConvergency};
use thiserror::Error;

/// Below this height Z is computed from ζ directly.
pub const EXACT_BELOW: f64 = 300.0;
const CHEB_DEGREE: usize = 48;
const MAX_REFINEMENT: u32 = 12;

#[derive(Debug, Error)]
pub enum ZeroGenError {
    #[error("block [{lo}, {hi}] holds {found} sign changes, expected {expected}")]
    BlockMismatch { lo: f64, hi: f64, found: usize, expected: usize },
    #[error("root refinement failed near t = {0}")]
    Refinement(f64),
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn psi(z: Complex64) -> Complex64 {
    let two_pi = Complex64::new(2.0 * PI, 0.0);
    (two_pi * (z * z - z - 1.0 / 16.0)).cos() / (two_pi * z).cos()
}

/// Ψ and its first `kmax` derivatives at real `p`, by the Cauchy integral on
/// a circle of radius 3/4.
fn psi_derivatives(p: f64, kmax: usize) -> Vec<f64> {
    const M: usize = 96;
    const R: f64 = 0.75;
    let samples: Vec<(Complex64, f64)> = (0..M)
        .map(|j| {
            let phi = 2.0 * PI * (j as f64 + 0.5) / M as f64;
            (psi(Complex64::new(p, 0.0) + Complex64::from_polar(R, phi)), phi)
        })
        .collect();
    let mut out = Vec::with_capacity(kmax + 1);
    let mut fact = 1.0;
    for k in 0..=kmax {
        if k > 0 {
            fact *= k as f64;
        }
        let s: Complex64 = samples.iter().map(|(v, phi)| v * Complex64::from_polar(1.0, -(k as f64) * phi)).sum();
        out.push(fact * s.re / (M as f64 * R.powi(k as i32)));
    }
    out
}

/// C₀(p)…C₄(p) of the Riemann–Siegel remainder.
fn corrections_exact(p: f64) -> [f64; 5] {
    let d = psi_derivatives(p, 12);
    let pi2 = PI * PI;
    let (pi4, pi6, pi8) = (pi2 * pi2, pi2 * pi2 * pi2, pi2 * pi2 * pi2 * pi2);
    [
        d[0],
        -d[3] / (96.0 * pi2),
        d[2] / (64.0 * pi2) + d[6] / (18432.0 * pi4),
        -d[1] / (64.0 * pi2) - d[5] / (3840.0 * pi4) - d[9] / (5_308_416.0 * pi6),
        d[0] / (128.0 * pi2)
            + 19.0 * d[4] / (24576.0 * pi4)
            + 11.0 * d[8] / (5_898_240.0 * pi6)
            + d[12] / (2_038_431_744.0 * pi8),
    ]
}

/// Chebyshev interpolants of C₀…C₄ on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct RsCorrections {
    coeffs: [Vec<f64>; 5],
}

impl Default for RsCorrections {
    fn default() -> Self {
        Self::new()
    }
}

impl RsCorrections {
    pub fn new() -> Self {
        let m = CHEB_DEGREE + 1;
        let nodes: Vec<f64> = (0..m).map(|j| (PI * (j as f64 + 0.5) / m as f64).cos()).collect();
        let values: Vec<[f64; 5]> = nodes.iter().map(|x| corrections_exact(0.5 * (x + 1.0))).collect();
        let coeffs = std::array::from_fn(|c| {
            (0..m)
                .map(|k| {
                    let s: f64 = (0..m)
                        .map(|j| values[j][c] * (PI * k as f64 * (j as f64 + 0.5) / m as f64).cos())
                        .sum();
                    s * if k == 0 { 1.0 } else { 2.0 } / m as f64
                })
                .collect()
        });
        Self { coeffs }
    }

    pub fn eval(&self, p: f64) -> [f64; 5] {
        let x = 2.0 * p - 1.0;
        std::array::from_fn(|c| {
            let a = &self.coeffs[c];
            let (mut b1, mut b2) = (0.0, 0.0);
            for &ak in a.iter().skip(1).rev() {
                (b1, b2) = (2.0 * x * b1 - b2 + ak, b1);
            }
            x * b1 - b2 + a[0]
        })
    }
}

/// Z(t) = e^{iθ(t)} ζ(½ + it) from ζ itself.
pub fn z_exact(t: f64) -> f64 {
    let theta = rs_theta(t.abs()).expect("height inside envelope");
    let z = zeta(Complex64::new(0.5, t.abs()), &EvaluationAccuracy::default()).expect("height inside envelope");
    (Complex64::from_polar(1.0, theta) * z).re
}

/// Riemann–Siegel evaluation of Z(t) for `t ≥ 2π`.
pub fn z_riemann_siegel(t: f64, corr: &RsCorrections) -> f64 {
    let a = (t / (2.0 * PI)).sqrt();
    let n = a.floor();
    let p = a - n;
    let theta = rs_theta(t).expect("height inside envelope");
    let mut sum = 0.0;
    for k in 1..=n as u64 {
        let kf = k as f64;
        sum += (theta - t * kf.ln()).cos() / kf.sqrt();
    }
    let u = 1.0 / a;
    let c = corr.eval(p);
    let series = c[0] + u * (c[1] + u * (c[2] + u * (c[3] + u * c[4])));
    let sign = if (n as u64) % 2 == 1 { 1.0 } else { -1.0 };
    2.0 * sum + sign * u.sqrt() * series
}

/// Z(t), exact below [`EXACT_BELOW`] and Riemann–Siegel above.
pub fn z_function(t: f64, corr: &RsCorrections) -> f64 {
    if t < EXACT_BELOW {
        z_exact(t)
    } else {
        z_riemann_siegel(t, corr)
    }
}

/// The Gram point g_n, θ(g_n) = nπ, for `n ≥ -1`.
pub fn gram_point(n: i64, guess: Option<f64>) -> f64 {
    let target = n as f64 * PI;
    let mut g = guess.unwrap_or_else(|| {
        // θ(t) ≈ (t/2) log(t/2πe) − π/8
        let mut t: f64 = 20.0;
        for _ in 0..50 {
            t = (2.0 * (target + PI / 8.0) / (t / (2.0 * PI * std::f64::consts::E)).ln()).max(10.0);
        }
        t
    });
    for _ in 0..60 {
        let f = rs_theta(g).expect("height inside envelope") - target;
        let step = f / (0.5 * (g / (2.0 * PI)).ln());
        g -= step;
        if step.abs() < 1e-13 * g {
            break;
        }
    }
    g
}

fn sign_changes(samples: &[(f64, f64)]) -> usize {
    samples.windows(2).filter(|w| w[0].1.signum() != w[1].1.signum()).count()
}

/// Ordinates of the first `count` zeros above the real axis.
pub fn find_zeros(count: usize) -> Result<Vec<f64>, ZeroGenError> {
    let corr = RsCorrections::new();
    let z = |t: f64| z_function(t, &corr);
    let mut zeros = Vec::with_capacity(count + 8);
    // g_{-1} ≈ 9.667 is good: Z < 0 below the first zero
    let mut n: i64 = -1;
    let mut g = gram_point(-1, None);
    let mut block: Vec<(f64, f64)> = vec![(g, z(g))];
    let mut block_start = n;
    while zeros.len() < count {
        let spacing = 2.0 * PI / (g / (2.0 * PI)).ln();
        n += 1;
        g = gram_point(n, Some(g + spacing));
        let zg = z(g);
        block.push((g, zg));
        let good = if n % 2 == 0 { zg > 0.0 } else { zg < 0.0 };
        if !good {
            continue;
        }
        let expected = (n - block_start) as usize;
        let mut depth = 0;
        while sign_changes(&block) < expected && depth < MAX_REFINEMENT {
            let mut finer = Vec::with_capacity(2 * block.len());
            for w in block.windows(2) {
                finer.push(w[0]);
                let mid = 0.5 * (w[0].0 + w[1].0);
                finer.push((mid, z(mid)));
            }
            finer.push(*block.last().expect("nonempty block"));
            block = finer;
            depth += 1;
        }
        let found = sign_changes(&block);
        if found != expected {
            return Err(ZeroGenError::BlockMismatch {
                lo: block[0].0,
                hi: g,
                found,
                expected,
            });
        }
        for w in block.windows(2) {
            if w[0].1.signum() != w[1].1.signum() {
                // a few ulps of the ordinate
                let mut conv = SimpleConvergency { eps: (w[0].0 * 1e-15).max(1e-11), max_iter: 200 };
                let root = find_root_brent(w[0].0, w[1].0, &z, &mut conv)
                    .map_err(|_| ZeroGenError::Refinement(w[0].0))?;
                zeros.push(root);
            }
        }
        block = vec![(g, zg)];
        block_start = n;
    }
    zeros.truncate(count);
    Ok(zeros)
}

/// Plain-text table: `#` comment header, then one ordinate per line.
pub fn render_table(zeros: &[f64]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# imaginary parts of the first {} nontrivial zeros of zeta", zeros.len());
    let _ = writeln!(out, "# Riemann-Siegel Z with corrections C0..C4, Gram blocks, Brent refinement");
    for g in zeros {
        let _ = writeln!(out, "{g:.10}");
    }
    out
}

pub fn write_table(path: &Path, zeros: &[f64]) -> Result<(), ZeroGenError> {
    std::fs::write(path, render_table(zeros))?;
    Ok(())
}
