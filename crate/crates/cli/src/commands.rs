use std::collections::BTreeMap;
use std::fmt::Write as _;

use clap::{Subcommand, ValueEnum};
use nyman_core::arithmetic::{
    chebyshev_constant, chebyshev_sandwich_exact, mertens_growth_monitor, mobius_table, von_mangoldt_table, Rational,
};
use nyman_core::contour::{
    b_n_integral, b_n_straight, build_contour, mn_bound_monitors, perron_check, tail_identity_check,
};
use nyman_core::hilbert::{dn_sweep, nu, sweep_csv, NuRoute};
use nyman_core::integrals::{
    i_csv, i_n_eps, jkl_csv, jkl_integrals, mean_value_monitor, quotient_monitor, zeta_growth_monitor,
};
use nyman_core::report::fmt_float;
use nyman_core::zeros::{gg_monitor, load_zero_table, min_typical_v, zero_count, ZeroTable};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;
use serde_json::json;

use crate::errors::CliError;
use crate::{Output, RunConfig};

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    Gram,
    MellinLine,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// d_N² and ν_{N,ε} for N = 1..n_max (CSV).
    DnSweep {
        #[arg(long, default_value_t = 100)]
        n_max: usize,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
    },
    /// ν_{N,ε} by the Gram route or on the critical line.
    Nu {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long, value_enum, default_value = "gram")]
        route: Route,
        #[arg(long, default_value_t = 1000.0)]
        tau_max: f64,
    },
    /// K_ε, L_ε (quadrature and residues) and J_ε.
    Jkl {
        #[arg(long, value_delimiter = ',', default_value = "0.1")]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 1000.0)]
        tau_max: f64,
    },
    /// I_{N,ε} on |τ| ≤ N^{3/4}.
    Ieps {
        #[arg(long, value_delimiter = ',')]
        n: Vec<u64>,
        #[arg(long)]
        eps: f64,
    },
    /// Mertens function table and growth monitor.
    Mertens {
        #[arg(long, default_value_t = 1_000_000)]
        limit: u64,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        /// Also write the binary prefix-sum file.
        #[arg(long)]
        binary: bool,
    },
    /// Chebyshev's sandwich on random rationals, in exact arithmetic.
    Sandwich {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 10_000)]
        x_max: u64,
    },
    /// Smallest typical V for integers sampled from [T, 2T).
    Typical {
        #[arg(long = "T", default_value_t = 16_384)]
        big_t: u64,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
    },
    /// Build the deformed contour and export its segments.
    Contour {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        kappa: Option<u64>,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
    },
    /// Compare M_N(iτ) with the contour value of B_N.
    Perron {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        kappa: Option<u64>,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        tau: Vec<f64>,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        /// Also evaluate B_N on the straight line.
        #[arg(long)]
        straight: bool,
    },
    /// Partial-summation identity for 1/ζ(s+ε) − M_N(s+ε).
    TailIdentity {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0.0)]
        tau: f64,
        /// Defaults to 100 N.
        #[arg(long)]
        t_max: Option<u64>,
    },
    /// Validate a zero table and print its height and length.
    ZerosImport {
        /// Defaults to the global zero table.
        #[arg(long)]
        file: Option<std::path::PathBuf>,
    },
    /// Ratio monitors for the bounds on ζ, on ζ(s)/ζ(s+ε) and on M_N.
    Monitors {
        #[arg(long, default_value_t = 1000)]
        n: u64,
        #[arg(long, default_value_t = 0.3)]
        eps: f64,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2,5,10,20,50,100,200,500,1000")]
        tau: Vec<f64>,
    },
}

fn text(name: &str, contents: String) -> Output {
    Output { name: name.to_string(), contents: contents.into_bytes() }
}

fn json_out<T: Serialize>(name: &str, value: &T) -> Result<Output, CliError> {
    Ok(text(name, serde_json::to_string_pretty(value)? + "\n"))
}

fn zeros(config: &RunConfig) -> Result<ZeroTable, CliError> {
    Ok(load_zero_table(&config.zero_table)?)
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<(), CliError> {
    if cond {
        Ok(())
    } else {
        Err(CliError::Param(msg()))
    }
}

/// Run one command; returns the payload files and a stdout summary.
pub fn run(config: &RunConfig) -> Result<(Vec<Output>, String), CliError> {
    let mut summary = String::new();
    let outputs = match &config.command {
        Command::DnSweep { n_max, eps } => {
            let rows = dn_sweep(*n_max, *eps)?;
            vec![text("dn_sweep.csv", sweep_csv(&rows))]
        }
        Command::Nu { n, eps, route, tau_max } => {
            let (route_core, ords) = match route {
                Route::Gram => (NuRoute::Gram, Vec::new()),
                Route::MellinLine => (NuRoute::MellinLine, zeros(config)?.ordinates().to_vec()),
            };
            let r = nu(*n, *eps, route_core, *tau_max, &ords)?;
            let _ = writeln!(summary, "nu = {}", fmt_float(r.quad.value));
            vec![json_out("nu.json", &json!({ "N": n, "eps": eps, "route": route, "tau_max": tau_max, "result": r }))?]
        }
        Command::Jkl { eps, tau_max } => {
            let table = zeros(config)?;
            let rows = eps.iter().map(|&e| jkl_integrals(e, *tau_max, &table)).collect::<Result<Vec<_>, _>>()?;
            let records: Vec<_> = rows
                .iter()
                .map(|r| {
                    let gap = (r.l_quad.value - r.l_closed).abs();
                    let tol = r.l_quad.error_bound + r.tail_k;
                    json!({ "result": r, "L_gap": gap, "L_tolerance": tol, "within_tolerance": gap <= tol })
                })
                .collect();
            vec![text("jkl.csv", jkl_csv(&rows)), json_out("jkl.json", &records)?]
        }
        Command::Ieps { n, eps } => {
            require(!n.is_empty(), || "--n needs at least one value".into())?;
            let table = zeros(config)?;
            let rows = n.iter().map(|&k| i_n_eps(k, *eps, &table)).collect::<Result<Vec<_>, _>>()?;
            vec![text("ieps.csv", i_csv(&rows)), json_out("ieps.json", &rows)?]
        }
        Command::Mertens { limit, delta, binary } => {
            let table = mobius_table(*limit)?;
            let mut grid = Vec::new();
            let mut p = 1u64;
            while p <= *limit {
                grid.extend([p, 2 * p, 5 * p].into_iter().filter(|&x| x <= *limit));
                p = p.saturating_mul(10);
            }
            let mut csv = String::from("x,M\n");
            for &x in &grid {
                let _ = writeln!(csv, "{x},{}", table.mertens(x));
            }
            let mut out = vec![text("mertens.csv", csv), json_out("mertens_growth.json", &mertens_growth_monitor(&table, &grid, *delta))?];
            if *binary {
                std::fs::create_dir_all(&config.out_dir)?;
                let path = config.out_dir.join("mertens.bin");
                table.write_mertens(&path)?;
                out.push(Output { name: "mertens.bin".into(), contents: std::fs::read(&path)? });
            }
            out
        }
        Command::Sandwich { samples, x_max } => {
            require(*x_max >= 1, || "--x-max must be positive".into())?;
            let mut rng = StdRng::seed_from_u64(config.seed);
            let mut failures = Vec::new();
            for _ in 0..*samples {
                let q: i128 = rng.gen_range(1..=1000);
                let p: i128 = rng.gen_range(1..(*x_max as i128) * q);
                let r = chebyshev_sandwich_exact(Rational::new(p, q));
                if !r.holds {
                    failures.push(format!("{p}/{q}"));
                }
            }
            let a = chebyshev_constant();
            let _ = writeln!(summary, "A = {a:.8}");
            vec![json_out(
                "sandwich.json",
                &json!({ "A": format!("{a:.8}"), "A_value": a, "samples": samples, "x_max": x_max, "holds_all": failures.is_empty(), "failures": failures }),
            )?]
        }
        Command::Typical { big_t, samples, delta } => {
            let table = zeros(config)?;
            let lam = von_mangoldt_table(*big_t)?;
            let mut rng = StdRng::seed_from_u64(config.seed);
            let mut ns: Vec<u64> = (0..*samples).map(|_| rng.gen_range(*big_t..2 * big_t)).collect();
            ns.sort_unstable();
            let rows = ns
                .iter()
                .map(|&n| min_typical_v(n, *big_t as f64, &table, &lam, *delta))
                .collect::<Result<Vec<_>, _>>()?;
            let mut histogram = BTreeMap::new();
            for r in &rows {
                *histogram.entry(r.v).or_insert(0usize) += 1;
            }
            let worst = rows.iter().map(|r| r.v).max().unwrap_or(0);
            let cap = rows.iter().map(|r| r.theoretical_cap).fold(f64::INFINITY, f64::min);
            let _ = writeln!(summary, "max V = {worst}, smallest cap = {cap:.4}");
            vec![json_out(
                "typical.json",
                &json!({ "T": big_t, "delta": delta, "histogram": histogram, "max_v": worst, "min_cap": cap, "within_cap": f64::from(worst) <= cap, "rows": rows }),
            )?]
        }
        Command::Contour { n, kappa, delta } => {
            let path = contour_for(config, *n, *kappa, *delta)?.0;
            vec![json_out("contour.json", &path.export())?]
        }
        Command::Perron { n, kappa, tau, delta, straight } => {
            let (path, table) = contour_for(config, *n, *kappa, *delta)?;
            let mut rows = Vec::new();
            for &t in tau {
                let monitor = perron_check(t, &path, &table)?;
                let b = b_n_integral(t, &path, &table)?;
                let line = if *straight { Some(b_n_straight(*n, t)?) } else { None };
                rows.push(json!({ "tau": t, "B_N": [b.value.re, b.value.im], "error_bound": b.error_bound, "straight": line.map(|l| json!({ "B_N": [l.value.re, l.value.im], "error_bound": l.error_bound })), "monitor": monitor }));
            }
            vec![json_out("perron.json", &json!({ "N": n, "kappa": path.kappa, "K": path.big_k, "rows": rows }))?]
        }
        Command::TailIdentity { n, eps, tau, t_max } => {
            let r = tail_identity_check(*n, *eps, *tau, t_max.unwrap_or(100 * n))?;
            let _ = writeln!(summary, "residual = {}, tail estimate = {}", fmt_float(r.residual), fmt_float(r.tail_estimate));
            vec![json_out("tail_identity.json", &r)?]
        }
        Command::ZerosImport { file } => {
            let path = file.as_ref().unwrap_or(&config.zero_table);
            let table = load_zero_table(path)?;
            let small = zero_count(&table, 0.0, 100.0_f64.min(table.height()))?;
            let _ = writeln!(summary, "height = {}\ncount = {}", fmt_float(table.height()), table.len());
            vec![json_out(
                "zeros_import.json",
                &json!({ "source": table.source(), "count": table.len(), "height": table.height(), "count_0_100": small }),
            )?]
        }
        Command::Monitors { n, eps, delta, tau } => {
            let table = zeros(config)?;
            let quotient = quotient_monitor(*eps, tau)?;
            let growth = zeta_growth_monitor(tau)?;
            let mn = mn_bound_monitors(*n, *eps, tau, *delta)?;
            let split = (*n as f64).powf(0.75).ceil();
            let mean_value = [1.0, 2.0, 4.0]
                .iter()
                .map(|k| mean_value_monitor(*n, *eps, k * split))
                .collect::<Result<Vec<_>, _>>()?;
            let gg_ts: Vec<f64> = tau.iter().copied().filter(|&t| t >= 100.0 && t + 2.0 <= table.height()).collect();
            let gg = gg_monitor(&gg_ts, 1.0, &table)?;
            vec![json_out(
                "monitors.json",
                &json!({ "quotient": quotient, "zeta_growth": growth, "m_n": mn, "mean_value": mean_value, "zero_count_increments": gg }),
            )?]
        }
    };
    Ok((outputs, summary))
}

fn contour_for(
    config: &RunConfig,
    n: u64,
    kappa: Option<u64>,
    delta: f64,
) -> Result<(nyman_core::contour::ContourPath, ZeroTable), CliError> {
    // fail on κ before touching the zero table
    let (formula, big_k) = nyman_core::contour::kappa_and_k(n.max(16));
    if kappa.is_none() && n >= 16 && formula >= big_k {
        return Err(nyman_core::contour::ContourError::KappaExceedsK { n, kappa: formula, big_k }.into());
    }
    let table = zeros(config)?;
    let lam = von_mangoldt_table(1u64 << big_k)?;
    let path = build_contour(n, kappa, &table, &lam, delta)?;
    Ok((path, table))
}
