//! Acceptance criteria 1–12. Runs without the libtest harness and prints one
//! PASS/FAIL line per criterion; the process fails if any criterion fails.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use nyman_core::arithmetic::{chebyshev_constant, chebyshev_sandwich_exact, von_mangoldt_table, Rational};
use nyman_core::contour::{b_n_integral, b_n_straight, build_contour, tail_identity_check};
use nyman_core::hilbert::{
    distance_dn, dn_sweep, e1_norm_closed, gcd, gram_system, inner_e, nu, nu_gram, NuRoute,
};
use nyman_core::integrals::{i_n_eps, jkl_integrals, l_closed, l_first_order};
use nyman_core::special_functions::EULER_GAMMA;
use nyman_core::zeros::{is_v_typical, load_zero_table, min_typical_v, zero_count, ZeroTable};
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn table() -> ZeroTable {
    load_zero_table(&support::zero_table_path()).expect("zero table loads")
}

fn within(elapsed: Duration, budget_s: u64) -> Result<(), String> {
    if elapsed.as_secs() <= budget_s {
        Ok(())
    } else {
        Err(format!("took {elapsed:.1?}, budget {budget_s} s"))
    }
}

fn residue_oracle() -> Outcome {
    let t = table();
    let mut parts = Vec::new();
    let mut ok = true;
    for eps in [0.05, 0.1, 0.2] {
        let start = Instant::now();
        let r = jkl_integrals(eps, 1e3, &t).map_err(|e| e.to_string())?;
        within(start.elapsed(), 120)?;
        let gap = (r.l_quad.value - r.l_closed).abs();
        let tol = r.l_quad.error_bound + r.tail_k;
        ok &= gap <= tol;
        parts.push(format!("eps={eps}: |dL|={gap:.2e} <= {tol:.2e}"));
    }
    check(ok, parts.join("; "))
}

fn laurent_check() -> Outcome {
    let mut worst: f64 = 0.0;
    for k in 1..=100 {
        let eps = 1e-3 * f64::from(k);
        let d = (l_closed(eps).map_err(|e| e.to_string())? - l_first_order(eps)).abs();
        worst = worst.max(d / (eps * eps));
    }
    check(worst <= 3.0, format!("max |L - (1-(g+1)e)|/e^2 = {worst:.4} on e in [0.001, 0.1]"))
}

fn two_route_nu() -> Outcome {
    let t = table();
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for (n, eps) in [(2usize, 0.1), (10, 0.2), (50, 0.3)] {
        let g = nu(n, eps, NuRoute::Gram, 1e3, t.ordinates()).map_err(|e| e.to_string())?;
        let l = nu(n, eps, NuRoute::MellinLine, 1e3, t.ordinates()).map_err(|e| e.to_string())?;
        let diff = (g.quad.value - l.quad.value).abs();
        let tol = 1e-4f64.max(l.tail_estimate);
        ok &= diff <= tol;
        parts.push(format!("({n},{eps}): {diff:.1e} <= {tol:.1e}"));
    }
    within(start.elapsed(), 300)?;
    check(ok, parts.join("; "))
}

fn projection_chain() -> Outcome {
    let t = table();
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for (n, eps) in [(10usize, 0.3), (100, 0.3)] {
        let sys = gram_system(n).map_err(|e| e.to_string())?;
        let d2 = distance_dn(&sys).dn_squared;
        let nu = nu_gram(&sys, eps).map_err(|e| e.to_string())?;
        let i = i_n_eps(n as u64, eps, &t).map_err(|e| e.to_string())?;
        let j = jkl_integrals(eps, 1e3, &t).map_err(|e| e.to_string())?;
        let lower_ok = d2 <= nu.value + nu.error_bound;
        // truncated I and K sit below their full values; tails and error bounds enter the upper side
        let upper = 2.0 * (i.quad.value + i.quad.error_bound + i.tail_estimate)
            + 2.0 * (j.j + j.k.error_bound + j.tail_k);
        let bare = 2.0 * i.quad.value + 2.0 * j.j;
        ok &= lower_ok && nu.value - nu.error_bound <= upper;
        parts.push(format!("N={n}: d2={d2:.4} <= nu={:.4} <= 2I+2J={bare:.4} (with tails {upper:.4})", nu.value));
    }
    within(start.elapsed(), 600)?;
    check(ok, parts.join("; "))
}

fn dn_sweep_check() -> Outcome {
    let start = Instant::now();
    let rows = dn_sweep(100, 0.1).map_err(|e| e.to_string())?;
    within(start.elapsed(), 600)?;
    let positive = rows.iter().all(|r| r.dn2 > 0.0);
    let monotone = rows.windows(2).all(|w| w[1].dn2 <= w[0].dn2);
    let closed = 1.0 - (1.0 - EULER_GAMMA).powi(2) / e1_norm_closed();
    let first = (rows[0].dn2 - closed).abs();
    let corridor: Vec<f64> = rows[49..].iter().map(|r| r.dn2 * (r.n as f64).ln()).collect();
    let (lo, hi) = corridor.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    check(
        positive && monotone && first <= 1e-6 && lo >= 0.01 && hi <= 1.0,
        format!("positive={positive} nonincreasing={monotone} |d1^2-closed|={first:.1e} d2*logN in [{lo:.4}, {hi:.4}]"),
    )
}

fn inner_product_oracles() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    for m in 1..=12u64 {
        for n in m..=12 {
            if gcd(m, n) != 1 {
                continue;
            }
            let got = inner_e(m, n).map_err(|e| e.to_string())?.value;
            worst = worst.max((got - support::inner_e_oracle(m, n)).abs());
            pairs += 1;
        }
    }
    let mut rng = rand::rngs::StdRng::seed_from_u64(2024);
    let mut scaling_ok = true;
    for _ in 0..500 {
        let k = rng.gen_range(1..50u64);
        let (m, n) = (rng.gen_range(1..200u64), rng.gen_range(1..200u64));
        let a = inner_e(k * m, k * n).map_err(|e| e.to_string())?;
        let b = inner_e(m, n).map_err(|e| e.to_string())?;
        let bound = a.error_bound + b.error_bound / k as f64 + 4.0 * f64::EPSILON * a.value;
        scaling_ok &= (a.value - b.value / k as f64).abs() <= bound;
    }
    within(start.elapsed(), 120)?;
    check(worst <= 1e-7 && scaling_ok, format!("{pairs} coprime pairs, max deviation {worst:.1e}; 500 scaling triples ok={scaling_ok}"))
}

fn tail_identity() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for (n, eps, tau) in [(1000u64, 0.3, 0.0), (1000, 0.3, 2.5), (100, 0.5, 1.0)] {
        let r = tail_identity_check(n, eps, tau, 100 * n).map_err(|e| e.to_string())?;
        ok &= r.residual <= r.tail_estimate + 1e-6;
        parts.push(format!("({n},{eps},{tau}): {:.1e} <= {:.1e}", r.residual, r.tail_estimate));
    }
    within(start.elapsed(), 180)?;
    check(ok, parts.join("; "))
}

fn cauchy_invariance() -> Outcome {
    let t = table();
    let start = Instant::now();
    let n = 1u64 << 10;
    let lam = von_mangoldt_table(n).map_err(|e| e.to_string())?;
    let path = build_contour(n, Some(5), &t, &lam, 0.1).map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut parts = Vec::new();
    for tau in [0.0, 3.0] {
        let s = b_n_integral(tau, &path, &t).map_err(|e| e.to_string())?;
        let l = b_n_straight(n, tau).map_err(|e| e.to_string())?;
        let diff = (s.value - l.value).norm();
        let tol = s.error_bound + l.error_bound;
        ok &= diff <= tol;
        parts.push(format!("tau={tau}: {diff:.1e} <= {tol:.1e}"));
    }
    within(start.elapsed(), 300)?;
    check(ok, parts.join("; "))
}

fn zero_table_validation() -> Outcome {
    let start = Instant::now();
    let t = table();
    let load = start.elapsed();
    let count = zero_count(&t, 0.0, 100.0).map_err(|e| e.to_string())?;
    check(
        t.len() == 100_000 && count == 29 && load.as_secs() < 5,
        format!("{} ordinates to height {:.4}, validated in {load:.1?}; count(0,100)={count}", t.len(), t.height()),
    )
}

fn typicality_engine() -> Outcome {
    let t = table();
    let start = Instant::now();
    let big_t = 16_384.0;
    let lam = von_mangoldt_table(1 << 15).map_err(|e| e.to_string())?;
    let mut rng = rand::rngs::StdRng::seed_from_u64(99);
    let mut worst = 0;
    let mut cap_ok = true;
    for _ in 0..50 {
        let n = rng.gen_range(16_384u64..32_768);
        let r = min_typical_v(n, big_t, &t, &lam, 0.1).map_err(|e| e.to_string())?;
        worst = worst.max(r.v);
        cap_ok &= f64::from(r.v) <= r.theoretical_cap;
    }
    let mut monotone = true;
    for _ in 0..20 {
        let tt = big_t * rng.gen_range(1.0..2.0);
        let v = f64::from(rng.gen_range(1..8u32));
        let lo = is_v_typical(tt, v, big_t, &t, &lam, 0.1).map_err(|e| e.to_string())?;
        let hi = is_v_typical(tt, v + 1.0, big_t, &t, &lam, 0.1).map_err(|e| e.to_string())?;
        monotone &= !lo.typical() || hi.typical();
    }
    within(start.elapsed(), 300)?;
    check(cap_ok && monotone, format!("max V over 50 samples = {worst}, within cap={cap_ok}; monotone on 20 cases={monotone}"))
}

fn sandwich() -> Outcome {
    let mut rng = rand::rngs::StdRng::seed_from_u64(4);
    let mut failures = 0;
    for _ in 0..10_000 {
        let q: i128 = rng.gen_range(1..=1000);
        let p: i128 = rng.gen_range(1..10_000 * q);
        if !chebyshev_sandwich_exact(Rational::new(p, q)).holds {
            failures += 1;
        }
    }
    let a = format!("{:.8}", chebyshev_constant());
    check(failures == 0 && a == "0.92129202", format!("10000 exact samples, {failures} failures; A = {a}"))
}

fn run_cli(out: &Path, args: &[&str]) -> Result<std::process::Output, String> {
    Command::new(env!("CARGO_BIN_EXE_nyman-lab"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .arg("--zero-table")
        .arg(support::zero_table_path())
        .output()
        .map_err(|e| e.to_string())
}

fn payloads(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .map(|rd| rd.filter_map(Result::ok).map(|e| e.path()).collect())
        .unwrap_or_default();
    files.retain(|p| p.file_name().is_some_and(|n| n != "manifest.json"));
    files.sort();
    files.into_iter().map(|p| (p.file_name().unwrap().into(), std::fs::read(&p).unwrap())).collect()
}

fn determinism() -> Outcome {
    let commands: [&[&str]; 13] = [
        &["dn-sweep", "--n-max", "30"],
        &["nu", "--n", "5", "--eps", "0.2"],
        &["nu", "--n", "2", "--eps", "0.1", "--route", "mellin-line"],
        &["jkl", "--eps", "0.1"],
        &["ieps", "--n", "10,30", "--eps", "0.3"],
        &["mertens", "--limit", "100000", "--binary"],
        &["sandwich", "--samples", "2000"],
        &["typical", "--samples", "10"],
        &["contour", "--n", "256", "--kappa", "3"],
        &["perron", "--n", "256", "--kappa", "3", "--tau", "0,2"],
        &["tail-identity", "--n", "100", "--eps", "0.3", "--tau", "1"],
        &["zeros-import"],
        &["monitors", "--n", "200"],
    ];
    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut mismatched = Vec::new();
    for (k, args) in commands.iter().enumerate() {
        let mut runs = Vec::new();
        let dir = root.path().join(k.to_string());
        for _ in 0..2 {
            let _ = std::fs::remove_dir_all(&dir);
            let out = run_cli(&dir, args)?;
            if !out.status.success() {
                return Err(format!("{} failed: {}", args[0], String::from_utf8_lossy(&out.stderr)));
            }
            runs.push((out.stdout.clone(), payloads(&dir)));
        }
        if runs[0] != runs[1] || runs[0].1.is_empty() {
            mismatched.push(args[0]);
        }
    }
    let dir = root.path().join("kappa");
    let out = run_cli(&dir, &["contour", "--n", "1000000"])?;
    let err = std::fs::read_to_string(dir.join("error.json")).unwrap_or_default();
    let kappa_ok = out.status.code() == Some(2) && err.contains("perron_contour.KappaExceedsK");
    check(
        mismatched.is_empty() && kappa_ok,
        format!("{} command runs byte-identical, mismatches {mismatched:?}; contour --n 1e6 exits 2 with KappaExceedsK={kappa_ok}", commands.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("residue oracle for L", residue_oracle),
        ("Laurent expansion of L", laurent_check),
        ("two-route nu", two_route_nu),
        ("projection chain d2 <= nu <= 2I + 2J", projection_chain),
        ("d_N sweep", dn_sweep_check),
        ("inner-product oracles", inner_product_oracles),
        ("partial-summation identity", tail_identity),
        ("Cauchy invariance of B_N", cauchy_invariance),
        ("zero-table validation", zero_table_validation),
        ("typicality engine", typicality_engine),
        ("Chebyshev sandwich and A", sandwich),
        ("CLI determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({secs:.1} s): {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({secs:.1} s): {detail}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
