//! Sieved arithmetic functions: μ, Λ, Mertens sums, Dirichlet partial sums
//! and Chebyshev's sandwich.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use num_rational::Ratio;
use serde::Serialize;
use thiserror::Error;

use crate::numerics::{CompensatedComplexSum, CompensatedSum};
use crate::special_functions::int_pow_neg;
use crate::ComplexValue;

/// Largest limit accepted by [`mobius_table`].
pub const MOBIUS_LIMIT_MAX: u64 = 1_000_000_000;
/// Largest limit accepted by [`von_mangoldt_table`].
pub const VON_MANGOLDT_LIMIT_MAX: u64 = 100_000_000;
const SIEVE_BLOCK: usize = 1 << 20;
const MERTENS_MAGIC: &[u8; 8] = b"MERTENS1";

#[derive(Debug, Error)]
pub enum ArithmeticError {
    #[error("limit {limit} exceeds the supported maximum {max}")]
    LimitTooLarge { limit: u64, max: u64 },
    #[error("limit must be at least 1")]
    EmptyTable,
    #[error("index {index} outside table of limit {limit}")]
    OutOfRange { index: u64, limit: u64 },
    #[error("malformed Mertens file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Primes up to `limit` by the plain sieve of Eratosthenes.
pub fn primes_up_to(limit: usize) -> Vec<usize> {
    if limit < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            primes.push(i);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// μ(n) and M(n) for `1 <= n <= limit`.
#[derive(Debug, Clone)]
pub struct MobiusTable {
    limit: u64,
    values: Vec<i8>,
    prefix: Vec<i32>,
}

/// Segmented sieve for the Möbius function in blocks of 2²⁰.
pub fn mobius_table(limit: u64) -> Result<MobiusTable, ArithmeticError> {
    if limit == 0 {
        return Err(ArithmeticError::EmptyTable);
    }
    if limit > MOBIUS_LIMIT_MAX {
        return Err(ArithmeticError::LimitTooLarge { limit, max: MOBIUS_LIMIT_MAX });
    }
    let root = isqrt(limit) as usize;
    let primes = primes_up_to(root);
    let n = limit as usize;
    let mut values = vec![0i8; n];
    let mut sign = vec![1i8; SIEVE_BLOCK];
    let mut product = vec![1u64; SIEVE_BLOCK];
    let mut lo = 1usize;
    while lo <= n {
        let hi = (lo + SIEVE_BLOCK - 1).min(n);
        let len = hi - lo + 1;
        sign[..len].fill(1);
        product[..len].fill(1);
        for &p in &primes {
            let first = lo.div_ceil(p) * p;
            let mut m = first;
            while m <= hi {
                sign[m - lo] = -sign[m - lo];
                product[m - lo] *= p as u64;
                m += p;
            }
            let sq = p * p;
            if sq > hi {
                continue;
            }
            let mut m = lo.div_ceil(sq) * sq;
            while m <= hi {
                sign[m - lo] = 0;
                m += sq;
            }
        }
        for i in 0..len {
            let k = (lo + i) as u64;
            let mut v = sign[i];
            // a single prime factor above √limit remains
            if v != 0 && product[i] != k {
                v = -v;
            }
            values[lo + i - 1] = v;
        }
        lo = hi + 1;
    }
    let mut prefix = Vec::with_capacity(n);
    let mut m = 0i32;
    for &v in &values {
        m += v as i32;
        prefix.push(m);
    }
    Ok(MobiusTable { limit, values, prefix })
}

impl MobiusTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// μ(n) for `1 <= n <= limit`.
    pub fn mu(&self, n: u64) -> i8 {
        self.values[(n - 1) as usize]
    }

    /// Mertens function M(n); M(0) = 0.
    pub fn mertens(&self, n: u64) -> i64 {
        if n == 0 {
            0
        } else {
            self.prefix[(n - 1) as usize] as i64
        }
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    /// Σ_{n ≤ terms} μ(n) n^{-s}, compensated.
    pub fn partial_sum(&self, terms: u64, s: ComplexValue) -> Result<ComplexValue, ArithmeticError> {
        if terms > self.limit {
            return Err(ArithmeticError::OutOfRange { index: terms, limit: self.limit });
        }
        let mut acc = CompensatedComplexSum::new();
        for n in 1..=terms {
            let mu = self.values[(n - 1) as usize];
            if mu != 0 {
                acc.add(int_pow_neg((n as f64).ln(), s) * mu as f64);
            }
        }
        Ok(acc.value())
    }

    /// Write M(1..N) in the `MERTENS1` little-endian binary layout.
    pub fn write_mertens(&self, path: &Path) -> Result<(), ArithmeticError> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(MERTENS_MAGIC)?;
        w.write_all(&(self.limit as i64).to_le_bytes())?;
        for &m in &self.prefix {
            w.write_all(&(m as i64).to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Σ_{n ≤ N} μ(n) n^{-s}.
pub fn dirichlet_partial_sum(table: &MobiusTable, s: ComplexValue) -> ComplexValue {
    table.partial_sum(table.limit, s).expect("full table length")
}

/// Read the prefix sums written by [`MobiusTable::write_mertens`].
pub fn read_mertens(path: &Path) -> Result<Vec<i64>, ArithmeticError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MERTENS_MAGIC {
        return Err(ArithmeticError::Format("bad magic".into()));
    }
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    let n = i64::from_le_bytes(buf);
    if n < 0 {
        return Err(ArithmeticError::Format(format!("negative length {n}")));
    }
    let mut out = Vec::with_capacity(n as usize);
    for _ in 0..n {
        r.read_exact(&mut buf)
            .map_err(|_| ArithmeticError::Format("truncated payload".into()))?;
        out.push(i64::from_le_bytes(buf));
    }
    if r.read(&mut buf)? != 0 {
        return Err(ArithmeticError::Format("trailing bytes".into()));
    }
    Ok(out)
}

/// The Dirichlet polynomial `Σ_{n ≤ N} μ(n) n^{-σ-iτ}` on a fixed abscissa σ.
///
/// The moduli `μ(n) n^{-σ}` and the logarithms are shared across all τ.
#[derive(Debug, Clone)]
pub struct MobiusPolynomial {
    sigma: f64,
    log_n: Vec<f64>,
    coeff: Vec<f64>,
}

impl MobiusPolynomial {
    pub fn new(table: &MobiusTable, terms: u64, sigma: f64) -> Result<Self, ArithmeticError> {
        if terms > table.limit {
            return Err(ArithmeticError::OutOfRange { index: terms, limit: table.limit });
        }
        let mut log_n = Vec::new();
        let mut coeff = Vec::new();
        for n in 1..=terms {
            let mu = table.mu(n);
            if mu != 0 {
                let l = (n as f64).ln();
                log_n.push(l);
                coeff.push(mu as f64 * (-sigma * l).exp());
            }
        }
        Ok(Self { sigma, log_n, coeff })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Value at `σ + iτ`.
    pub fn eval(&self, tau: f64) -> Complex64 {
        let mut acc = CompensatedComplexSum::new();
        for (l, c) in self.log_n.iter().zip(&self.coeff) {
            let (sin, cos) = (tau * l).sin_cos();
            acc.add(Complex64::new(c * cos, -c * sin));
        }
        acc.value()
    }

    /// Batched evaluation over a τ-grid.
    pub fn eval_grid(&self, taus: &[f64]) -> Vec<Complex64> {
        taus.iter().map(|&t| self.eval(t)).collect()
    }

    /// Σ μ(n)² n^{-2σ}, the mean square of the polynomial on its line.
    pub fn mean_square(&self) -> f64 {
        self.coeff.iter().map(|c| c * c).collect::<CompensatedSum>().value()
    }
}

/// Λ(n) for `1 <= n <= limit`.
#[derive(Debug, Clone)]
pub struct VonMangoldtTable {
    limit: u64,
    values: Vec<f64>,
}

pub fn von_mangoldt_table(limit: u64) -> Result<VonMangoldtTable, ArithmeticError> {
    if limit == 0 {
        return Err(ArithmeticError::EmptyTable);
    }
    if limit > VON_MANGOLDT_LIMIT_MAX {
        return Err(ArithmeticError::LimitTooLarge { limit, max: VON_MANGOLDT_LIMIT_MAX });
    }
    let n = limit as usize;
    let mut values = vec![0.0; n];
    for p in primes_up_to(n) {
        let lp = (p as f64).ln();
        let mut q = p;
        loop {
            values[q - 1] = lp;
            match q.checked_mul(p) {
                Some(next) if next <= n => q = next,
                _ => break,
            }
        }
    }
    Ok(VonMangoldtTable { limit, values })
}

impl VonMangoldtTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn lambda(&self, n: u64) -> f64 {
        self.values[(n - 1) as usize]
    }

    /// Chebyshev's ψ(x) = Σ_{n ≤ x} Λ(n).
    pub fn psi(&self, x: u64) -> f64 {
        self.values[..x.min(self.limit) as usize].iter().copied().collect::<CompensatedSum>().value()
    }
}

/// φ(x) = −{x} + {x/2} + {x/3} + {x/5} − {x/30}.
pub fn chebyshev_phi(x: f64) -> f64 {
    let fr = |y: f64| y - y.floor();
    -fr(x) + fr(x / 2.0) + fr(x / 3.0) + fr(x / 5.0) - fr(x / 30.0)
}

/// A = log(2^{1/2} 3^{1/3} 5^{1/5} / 30^{1/30}).
pub fn chebyshev_constant() -> f64 {
    2f64.ln() / 2.0 + 3f64.ln() / 3.0 + 5f64.ln() / 5.0 - 30f64.ln() / 30.0
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct SandwichReport {
    pub x: f64,
    pub phi: f64,
    pub upper: f64,
    pub chi: u8,
    pub holds: bool,
    /// Number of dilations `x/6^k` summed.
    pub terms: u32,
    /// Bound 5·x/6^{terms} on the omitted part of the series.
    pub truncation_bound: f64,
}

/// Relative slack; φ is integer valued, so only rounding in the
/// fractional parts needs absorbing.
const SANDWICH_SLACK: f64 = 1e-12;

/// Check φ(x) ≤ χ(x) ≤ Σ_{k ≥ 0} φ(x/6^k) in floating point.
///
/// Without `kmax` the series is summed until `x/6^k < 10⁻⁶`.
pub fn chebyshev_sandwich(x: f64, kmax: Option<u32>) -> SandwichReport {
    assert!(x > 0.0, "sandwich needs x > 0");
    let mut upper = CompensatedSum::new();
    let mut y = x;
    let mut terms = 0u32;
    loop {
        if let Some(k) = kmax {
            if terms > k {
                break;
            }
        } else if y < 1e-6 {
            break;
        }
        upper.add(chebyshev_phi(y));
        y /= 6.0;
        terms += 1;
    }
    let phi = chebyshev_phi(x);
    let upper = upper.value();
    let chi = u8::from(x >= 1.0);
    let c = chi as f64;
    let slack = SANDWICH_SLACK * x.max(1.0);
    SandwichReport {
        x,
        phi,
        upper,
        chi,
        holds: phi <= c + slack && c <= upper + slack,
        terms,
        truncation_bound: 5.0 * y,
    }
}

pub type Rational = Ratio<i128>;

#[derive(Debug, Clone, PartialEq)]
pub struct ExactSandwich {
    pub phi: Rational,
    pub upper: Rational,
    pub chi: u8,
    pub holds: bool,
}

/// φ at a positive rational argument, exactly.
pub fn chebyshev_phi_exact(x: Rational) -> Rational {
    let fr = |d: i128| {
        let y = x / d;
        y - y.floor()
    };
    -fr(1) + fr(2) + fr(3) + fr(5) - fr(30)
}

/// Exact sandwich at a positive rational. Terms with `x/6^k < 1` vanish
/// identically (−1 + ½ + ⅓ + ⅕ − 1/30 = 0), so the sum is finite.
pub fn chebyshev_sandwich_exact(x: Rational) -> ExactSandwich {
    assert!(x > Rational::from_integer(0));
    let one = Rational::from_integer(1);
    let mut upper = Rational::from_integer(0);
    let mut y = x;
    while y >= one {
        upper += chebyshev_phi_exact(y);
        y /= 6;
    }
    let phi = chebyshev_phi_exact(x);
    let chi = u8::from(x >= one);
    let c = Rational::from_integer(chi as i128);
    ExactSandwich { holds: phi <= c && c <= upper, phi, upper, chi }
}

/// |M(N)|/√N against exp((log N)^{1/2}(log log N)^{5/2+δ}) at the given N.
pub fn mertens_growth_monitor(table: &MobiusTable, grid: &[u64], delta: f64) -> crate::report::MonitorReport {
    let mut report = crate::report::MonitorReport::new("mertens_over_sqrt_vs_exp_bound")
        .with_note("lhs = |M(N)|/sqrt(N); rhs = exp((log N)^(1/2) (log log N)^(5/2+delta))");
    for &n in grid.iter().filter(|&&n| n >= 3 && n <= table.limit) {
        let nf = n as f64;
        let l = nf.ln();
        let lhs = table.mertens(n).unsigned_abs() as f64 / nf.sqrt();
        let rhs = (l.sqrt() * l.ln().powf(2.5 + delta)).exp();
        report.push(nf, lhs, rhs);
    }
    report
}
