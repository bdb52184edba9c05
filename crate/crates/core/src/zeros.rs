//! Zero tables, zero counting and V-typical ordinates.

use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::arithmetic::VonMangoldtTable;
use crate::numerics::CompensatedComplexSum;
use crate::report::MonitorReport;
use crate::special_functions::{int_pow_neg, riemann_von_mangoldt};

/// Largest admissible |count(0,t) − (θ(t)/π + 1)| during validation.
pub const RVM_TOLERANCE: f64 = 3.0;

#[derive(Debug, Error)]
pub enum ZeroError {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("validation failed at t = {t}: {reason}")]
    Validation { t: f64, reason: String },
    #[error("height {requested} exceeds table height {height}")]
    HeightExceeded { requested: f64, height: f64 },
    #[error("von Mangoldt table of limit {limit} cannot cover x = {x}")]
    TableTooSmall { x: f64, limit: u64 },
    #[error("no typical V in {lo}..={hi} for n = {n}")]
    NoTypicalV { n: u64, lo: u32, hi: u32 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Ascending ordinates of critical-line zeros, validated against the
/// Riemann–von Mangoldt formula.
#[derive(Debug, Clone, Serialize)]
pub struct ZeroTable {
    ordinates: Vec<f64>,
    height: f64,
    source: String,
}

impl ZeroTable {
    pub fn from_ordinates(ordinates: Vec<f64>, source: impl Into<String>) -> Result<Self, ZeroError> {
        let Some(&first) = ordinates.first() else {
            return Err(ZeroError::Validation { t: 0.0, reason: "empty table".into() });
        };
        if !(first > 14.13 && first < 14.14) {
            return Err(ZeroError::Validation { t: first, reason: "first ordinate not in (14.13, 14.14)".into() });
        }
        for w in ordinates.windows(2) {
            if !(w[1] > w[0]) {
                return Err(ZeroError::Validation { t: w[1], reason: "ordinates not strictly increasing".into() });
            }
        }
        // the deviation only jumps at ordinates, so both one-sided limits suffice
        for (k, &g) in ordinates.iter().enumerate() {
            let smooth = riemann_von_mangoldt(g).map_err(|e| ZeroError::Validation { t: g, reason: e.to_string() })?;
            let below = k as f64 - smooth;
            let at = (k + 1) as f64 - smooth;
            if below.abs() > RVM_TOLERANCE || at.abs() > RVM_TOLERANCE {
                return Err(ZeroError::Validation {
                    t: g,
                    reason: format!("count deviates from theta(t)/pi + 1 by {:.3}", if below.abs() > at.abs() { below } else { at }),
                });
            }
        }
        let height = *ordinates.last().expect("nonempty");
        Ok(Self { ordinates, height, source: source.into() })
    }

    pub fn ordinates(&self) -> &[f64] {
        &self.ordinates
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.ordinates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordinates.is_empty()
    }

    /// Ordinates in the closed interval `[a, b]`.
    pub fn slice(&self, a: f64, b: f64) -> &[f64] {
        let lo = self.ordinates.partition_point(|&g| g < a);
        let hi = self.ordinates.partition_point(|&g| g <= b);
        &self.ordinates[lo..hi.max(lo)]
    }

    fn require_height(&self, t: f64) -> Result<(), ZeroError> {
        if t > self.height {
            Err(ZeroError::HeightExceeded { requested: t, height: self.height })
        } else {
            Ok(())
        }
    }
}

/// Parse a table: one ordinate per line, `#` comments and blank lines skipped.
pub fn parse_zero_table(text: &str, source: impl Into<String>) -> Result<ZeroTable, ZeroError> {
    let mut ords = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|_| ZeroError::Format { line: i + 1, message: format!("not a number: {line:?}") })?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(ZeroError::Format { line: i + 1, message: format!("ordinate must be positive: {v}") });
        }
        ords.push(v);
    }
    ZeroTable::from_ordinates(ords, source)
}

pub fn load_zero_table(path: &Path) -> Result<ZeroTable, ZeroError> {
    let text = std::fs::read_to_string(path)?;
    parse_zero_table(&text, path.display().to_string())
}

/// Number of ordinates in `(a, b]`.
pub fn zero_count(table: &ZeroTable, a: f64, b: f64) -> Result<usize, ZeroError> {
    table.require_height(b)?;
    if b <= a {
        return Ok(0);
    }
    let lo = table.ordinates.partition_point(|&g| g <= a);
    let hi = table.ordinates.partition_point(|&g| g <= b);
    Ok(hi - lo)
}

/// Prime powers `n ≤ x` with their weights `Λ(n)/log n` and `log n`.
#[derive(Debug, Clone)]
pub struct PrimePowerSum {
    x: f64,
    terms: Vec<(f64, f64)>,
}

impl PrimePowerSum {
    pub fn new(x: f64, lam: &VonMangoldtTable) -> Result<Self, ZeroError> {
        if !(x >= 2.0) {
            return Err(ZeroError::InvalidParameter(format!("x = {x} < 2")));
        }
        let xi = x.floor() as u64;
        if xi > lam.limit() {
            return Err(ZeroError::TableTooSmall { x, limit: lam.limit() });
        }
        let lx = x.ln();
        let terms = (2..=xi)
            .filter_map(|n| {
                let l = lam.lambda(n);
                (l > 0.0).then(|| {
                    let ln = (n as f64).ln();
                    (l / ln * (lx - ln) / lx, ln)
                })
            })
            .collect();
        Ok(Self { x, terms })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    /// |Σ_{n ≤ x} Λ(n) n^{-σ-it} (log n)^{-1} log(x/n)/log x|.
    pub fn modulus(&self, t: f64, sigma: f64) -> f64 {
        let s = Complex64::new(sigma, t);
        let mut acc = CompensatedComplexSum::new();
        for &(w, ln) in &self.terms {
            if w != 0.0 {
                acc.add(int_pow_neg(ln, s) * w);
            }
        }
        acc.value().norm()
    }
}

/// The weighted prime-power sum of typicality criterion (i).
pub fn criterion_i_sum(t: f64, sigma: f64, x: f64, lam: &VonMangoldtTable) -> Result<f64, ZeroError> {
    if !(sigma >= 0.5) {
        return Err(ZeroError::InvalidParameter(format!("sigma = {sigma} < 1/2")));
    }
    Ok(PrimePowerSum::new(x, lam)?.modulus(t, sigma))
}

/// Abscissae at which criterion (i) is tested: ½, ½ + 10·2^{-j} for
/// `j = 0..=20`, and 50.
pub fn sigma_samples() -> Vec<f64> {
    let mut s = vec![0.5];
    s.extend((0..=20).map(|j| 0.5 + 10.0 * 0.5f64.powi(j)));
    s.push(50.0);
    s
}

/// Largest number of ordinates in a closed window of length `len` inside
/// `[lo, hi]`, and one window attaining it.
pub fn max_window_count(ordinates: &[f64], lo: f64, hi: f64, len: f64) -> (usize, (f64, f64)) {
    let lo_i = ordinates.partition_point(|&g| g < lo);
    let hi_i = ordinates.partition_point(|&g| g <= hi);
    let inside = &ordinates[lo_i..hi_i.max(lo_i)];
    if len >= hi - lo {
        return (inside.len(), (lo, hi));
    }
    let mut best = (0, (lo, lo + len));
    let mut j = 0;
    for (i, &g) in inside.iter().enumerate() {
        // a window starting at g, pushed back inside [lo, hi] if needed
        let end = (g + len).min(hi);
        j = j.max(i);
        while j < inside.len() && inside[j] <= end {
            j += 1;
        }
        if j - i > best.0 {
            best = (j - i, (end - len, end));
        }
    }
    best
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct TypicalityReport {
    pub t: f64,
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(rename = "T")]
    pub big_t: f64,
    pub x: f64,
    pub pass_i: bool,
    pub pass_ii: bool,
    pub pass_iii: bool,
    /// Largest |sum| over the σ samples.
    pub witness_i: f64,
    pub witness_ii: usize,
    pub witness_iii: usize,
    pub window_ii: (f64, f64),
    pub window_iii: (f64, f64),
    pub in_range: bool,
}

impl TypicalityReport {
    pub fn typical(&self) -> bool {
        self.pass_i && self.pass_ii && self.pass_iii && self.in_range
    }
}

/// Window lengths of criteria (ii) and (iii). For `V ≤ e` the (iii) window
/// is the whole of `[t-1, t+1]`.
pub fn typicality_windows(v: f64, big_t: f64, delta: f64) -> (f64, f64) {
    let lt = big_t.ln();
    let ii = 2.0 * std::f64::consts::PI * delta * v / lt;
    let iii = if v > std::f64::consts::E {
        2.0 * std::f64::consts::PI * v / (v.ln() * lt)
    } else {
        2.0
    };
    (ii, iii.min(2.0))
}

/// Evaluate the three typicality criteria at `t` for parameters `V`, `T`.
pub fn is_v_typical(
    t: f64,
    v: f64,
    big_t: f64,
    table: &ZeroTable,
    lam: &VonMangoldtTable,
    delta: f64,
) -> Result<TypicalityReport, ZeroError> {
    if !(v >= 1.0) || !(big_t > std::f64::consts::E) || !(delta > 0.0 && delta <= 0.5) {
        return Err(ZeroError::InvalidParameter(format!("V = {v}, T = {big_t}, delta = {delta}")));
    }
    table.require_height(t + 1.0)?;
    let x = big_t.powf(1.0 / v);
    let sum = PrimePowerSum::new(x.max(2.0), lam)?;
    typicality_with(t, v, big_t, table, &sum, delta)
}

fn typicality_with(
    t: f64,
    v: f64,
    big_t: f64,
    table: &ZeroTable,
    sum: &PrimePowerSum,
    delta: f64,
) -> Result<TypicalityReport, ZeroError> {
    table.require_height(t + 1.0)?;
    let (len_ii, len_iii) = typicality_windows(v, big_t, delta);
    let (c2, w2) = max_window_count(&table.ordinates, t - 1.0, t + 1.0, len_ii);
    let (c3, w3) = max_window_count(&table.ordinates, t - 1.0, t + 1.0, len_iii);
    let pass_ii = (c2 as f64) <= (1.0 + delta) * v;
    let pass_iii = (c3 as f64) <= v;
    let mut witness_i: f64 = 0.0;
    let mut pass_i = true;
    // (ii) and (iii) are cheap; skip the sum when they already fail
    if pass_ii && pass_iii {
        for sigma in sigma_samples() {
            let m = sum.modulus(t, sigma);
            witness_i = witness_i.max(m);
            if m > 2.0 * v {
                pass_i = false;
                break;
            }
        }
    } else {
        witness_i = f64::NAN;
        pass_i = false;
    }
    Ok(TypicalityReport {
        t,
        v,
        big_t,
        x: sum.x(),
        pass_i,
        pass_ii,
        pass_iii,
        witness_i,
        witness_ii: c2,
        witness_iii: c3,
        window_ii: w2,
        window_iii: w3,
        in_range: big_t <= t && t <= 2.0 * big_t,
    })
}

/// The V-range `[(log log T)², log T / log log T]`.
pub fn paper_v_window(big_t: f64) -> (f64, f64) {
    let l = big_t.ln();
    (l.ln().powi(2), l / l.ln())
}

/// `½ log n/log log n + (½+δ) log n · log log log n/(log log n)² + 1`.
pub fn theoretical_v_cap(n: f64, delta: f64) -> f64 {
    let l = n.ln();
    let ll = l.ln();
    0.5 * l / ll + (0.5 + delta) * l * ll.ln() / (ll * ll) + 1.0
}

#[derive(Debug, Clone, Serialize)]
pub struct MinTypicalV {
    pub n: u64,
    #[serde(rename = "T")]
    pub big_t: f64,
    #[serde(rename = "V")]
    pub v: u32,
    /// Integer range actually searched.
    pub search: (u32, u32),
    pub paper_window: (f64, f64),
    /// False when no V of the paper's window works (or the window holds no
    /// integer) and the fallback range `[1, max(⌈log T⌉, 8)]` was used.
    pub in_paper_window: bool,
    pub theoretical_cap: f64,
    pub samples: usize,
}

/// Sample points of `[n, n+1]` at spacing at most `2πδV/(4 log T)`.
pub fn unit_grid(n: u64, v: f64, big_t: f64, delta: f64) -> Vec<f64> {
    let h = 2.0 * std::f64::consts::PI * delta * v / (4.0 * big_t.ln());
    let k = (1.0 / h).ceil() as usize;
    (0..=k).map(|i| n as f64 + i as f64 / k as f64).collect()
}

/// Smallest integer V such that every grid point of `[n, n+1]` is V-typical
/// of size `T_k`, searched in the paper's V-window first and then in the
/// fallback range.
pub fn min_typical_v(
    n: u64,
    big_t: f64,
    table: &ZeroTable,
    lam: &VonMangoldtTable,
    delta: f64,
) -> Result<MinTypicalV, ZeroError> {
    if !((n as f64) >= big_t && (n as f64) < 2.0 * big_t) {
        return Err(ZeroError::InvalidParameter(format!("n = {n} outside [T, 2T) for T = {big_t}")));
    }
    table.require_height(n as f64 + 2.0)?;
    let window = paper_v_window(big_t);
    let (lo, hi) = (window.0.ceil().max(1.0) as u32, window.1.floor() as u32);
    let fallback = (1, (big_t.ln().ceil() as u32).max(8));
    let cap = theoretical_v_cap(n as f64, delta);
    let mut ranges = Vec::with_capacity(2);
    if lo <= hi {
        ranges.push(((lo, hi), true));
    }
    ranges.push((fallback, false));
    for (search, in_window) in ranges {
        for v in search.0..=search.1 {
            let vf = v as f64;
            let sum = PrimePowerSum::new(big_t.powf(1.0 / vf).max(2.0), lam)?;
            let grid = unit_grid(n, vf, big_t, delta);
            let mut ok = true;
            for &t in &grid {
                let r = typicality_with(t, vf, big_t, table, &sum, delta)?;
                // the right endpoint n+1 may reach 2T; the range test is on n
                if !(r.pass_i && r.pass_ii && r.pass_iii) {
                    ok = false;
                    break;
                }
            }
            if ok {
                return Ok(MinTypicalV {
                    n,
                    big_t,
                    v,
                    search,
                    paper_window: window,
                    in_paper_window: in_window,
                    theoretical_cap: cap,
                    samples: grid.len(),
                });
            }
        }
    }
    Err(ZeroError::NoTypicalV { n, lo: fallback.0, hi: fallback.1 })
}

/// Right-hand side `(log t)/(2 log log t) + ½ log t · log log log t/(log log t)²`.
pub fn gg_bound(t: f64) -> f64 {
    let l = t.ln();
    let ll = l.ln();
    l / (2.0 * ll) + 0.5 * l * ll.ln() / (ll * ll)
}

/// `N(t+h) − N(t−h) − (h/π) log(t/2π)` against [`gg_bound`] on a grid of `t`.
pub fn gg_monitor(ts: &[f64], h: f64, table: &ZeroTable) -> Result<MonitorReport, ZeroError> {
    let mut report = MonitorReport::new("local_zero_excess_vs_loglog_bound")
        .with_note("lhs = N(t+h)-N(t-h)-(h/pi)log(t/2pi); rhs = log t/(2 loglog t) + log t logloglog t/(2 (loglog t)^2)");
    for &t in ts {
        if !(h > 0.0 && h <= t.sqrt()) || t < 16.0 {
            return Err(ZeroError::InvalidParameter(format!("t = {t}, h = {h}")));
        }
        let c = zero_count(table, t - h, t + h)? as f64;
        let lhs = c - h / std::f64::consts::PI * (t / (2.0 * std::f64::consts::PI)).ln();
        report.push(t, lhs, gg_bound(t));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIRST: [f64; 10] = [
        14.134725142,
        21.022039639,
        25.010857580,
        30.424876126,
        32.935061588,
        37.586178159,
        40.918719012,
        43.327073281,
        48.005150881,
        49.773832478,
    ];

    #[test]
    fn single_line_table() {
        let t = parse_zero_table("# header\n14.134725\n", "inline").unwrap();
        assert_eq!(t.height(), 14.134725);
        assert_eq!(t.len(), 1);
        assert!(parse_zero_table("", "empty").is_err());
        assert!(parse_zero_table("# only a comment\n", "empty").is_err());
        assert!(matches!(parse_zero_table("abc", "bad"), Err(ZeroError::Format { line: 1, .. })));
    }

    #[test]
    fn validation_rejects_bad_tables() {
        assert!(ZeroTable::from_ordinates(vec![14.2], "x").is_err());
        assert!(ZeroTable::from_ordinates(vec![14.1347, 14.0], "x").is_err());
        // a gap of many zeros breaks the Riemann-von Mangoldt check
        let err = ZeroTable::from_ordinates(vec![14.134725, 100.0], "x").unwrap_err();
        assert!(matches!(err, ZeroError::Validation { .. }));
    }

    #[test]
    fn counts() {
        let t = ZeroTable::from_ordinates(FIRST.to_vec(), "x").unwrap();
        assert_eq!(zero_count(&t, 0.0, 15.0).unwrap(), 1);
        assert_eq!(zero_count(&t, 20.0, 20.0).unwrap(), 0);
        assert_eq!(zero_count(&t, 0.0, 49.773832478).unwrap(), 10);
        assert!(zero_count(&t, 0.0, 60.0).is_err());
        assert_eq!(t.slice(20.0, 31.0).len(), 3);
    }

    #[test]
    fn window_scan() {
        let ords = [1.0, 1.1, 1.2, 2.0, 3.0];
        let (c, w) = max_window_count(&ords, 0.0, 4.0, 0.25);
        assert_eq!(c, 3);
        assert!(w.0 <= 1.0 && w.1 >= 1.2);
        assert_eq!(max_window_count(&ords, 0.0, 4.0, 10.0).0, 5);
        // windows are clipped to the interval
        assert_eq!(max_window_count(&ords, 1.05, 2.5, 0.3).0, 2);
    }

    #[test]
    fn sigma_grid() {
        let s = sigma_samples();
        assert_eq!(s.len(), 23);
        assert_eq!(s[1], 10.5);
        assert_eq!(*s.last().unwrap(), 50.0);
    }

    #[test]
    fn windows_and_caps() {
        let (lo, hi) = paper_v_window(2f64.powi(14));
        assert!(lo > hi);
        assert!((theoretical_v_cap(2f64.powi(14), 0.1) - 4.06).abs() < 0.01);
        let (a, b) = typicality_windows(2.0, 1e4, 0.1);
        assert!(a > 0.0 && a < 0.2);
        assert_eq!(b, 2.0);
    }
}
