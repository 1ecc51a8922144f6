//! `suscept` — command-line laboratory for the susceptibility and
//! component-size moments of sparse random graphs.
//!
//! Exit codes: 0 on success, 1 on usage or domain errors, 2 when a `verify`
//! suite ran to completion but a statistical verdict failed.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use suscept::borel::BorelMomentTable;
use suscept::experiments::{
    run_clt_suite, run_covariance_suite, run_critical_scaling_suite, run_drift_suite,
    run_inverse_chi_suite, run_lln_suite, run_replicates, run_subcritical_suite,
    run_supercritical_suite, solve_rho, CriticalScalingParams, Density, DriftParams,
    ExperimentConfig, InverseChiParams, SubcriticalParams, SuiteReport, SupercriticalParams,
};
use suscept::families::{conjecture_report, PolyCache};
use suscept::graph::{trajectory, SnapshotSummary};

#[derive(Parser)]
#[command(
    name = "suscept",
    version,
    about = "Susceptibility and component-size moment laboratory for sparse random graphs",
    long_about = "Exact polynomial tables, Borel-distribution utilities, an incremental \
                  graph-process simulator, and seeded Monte Carlo suites that verify the \
                  moment, variance and normality laws of the susceptibility."
)]
struct Cli {
    /// Master seed (fixed default, never wall-clock entropy).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output format; each subcommand picks a sensible default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write the output to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for replicated runs; affects scheduling only, never
    /// results (seeds derive from replicate indices).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Family {
    /// Moment polynomials p_k (E S_k ~ n p_k(1/(1-nt))), k >= 2.
    P,
    /// Reduced moment polynomials q_k = p_k / x^k, k >= 3.
    Q,
    /// Covariance polynomials hp_{k,l} (Cov(S_k,S_l) ~ n hp_{k,l}), k,l >= 2.
    Hp,
    /// One-vertex increment polynomials pi_k = p_{k+1}/x, k >= 2.
    Pi,
    /// Mgf-derivative polynomials r_m (r_m = p_{m+1} for m >= 1), m >= 0.
    R,
    /// Quadratic-variation drift polynomials px_k, k >= 2.
    Px,
    /// Integrated quadratic-variation polynomials py_k (py_k(1) = 0), k >= 2.
    Py,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Suite {
    /// Sample means of chi and S_k/n against the p_k table (law of large numbers).
    Lln,
    /// Sample variances/covariances against the hp_{k,l} table.
    Covariance,
    /// Jarque-Bera normality of chi, with positive/negative harness controls.
    Clt,
    /// lln + covariance + clt on one shared replicate set.
    Subcritical,
    /// Uniform O(n^{-1/3}) bound on 1/chi - (1-nt)_+ across the transition.
    InverseChi,
    /// Giant-component dominance of S_k and the survival-probability fixed point.
    Supercritical,
    /// Scale stability of n^{-4/3} S_2 at p = 1/n.
    CriticalScaling,
    /// Mean increment of S_2 over a short window against the exact drift.
    Drift,
}

#[derive(Subcommand)]
enum Command {
    /// Print a polynomial family table (canonical text or coefficient lists).
    ///
    /// `--family p --k 8` reproduces the standard table of p_2..p_8;
    /// `--family hp --k 4 --l 4` the covariance table for k,l <= 4.
    Polys {
        #[arg(long, value_enum)]
        family: Family,
        /// Largest k (or m for the r family); rows are emitted in ascending order.
        #[arg(long, default_value_t = 8)]
        k: u64,
        /// Largest l (hp family only; defaults to --k).
        #[arg(long)]
        l: Option<u64>,
    },

    /// Borel distribution tables: pmf, moments E beta^m = p_{m+1}(1/(1-lambda)),
    /// cumulants, and size-biased moments. With --sample, draw seeded total
    /// progeny values from the branching process instead.
    Borel {
        /// Subcritical mean offspring, in (0, 1).
        #[arg(long)]
        lambda: f64,
        /// pmf table length.
        #[arg(long, default_value_t = 20)]
        jmax: u64,
        /// Highest moment order.
        #[arg(long, default_value_t = 5)]
        mmax: u64,
        /// Draw this many samples instead of printing the table.
        #[arg(long)]
        sample: Option<u64>,
        /// Abort threshold for one branching-process draw.
        #[arg(long, default_value_t = suscept::borel::DEFAULT_TRUNCATION_CAP)]
        truncation_cap: u64,
    },

    /// Sample seeded G(n, p) replicates and report the component-size moments.
    Simulate {
        #[arg(long)]
        n: u64,
        /// Bernoulli edge probability.
        #[arg(long)]
        p: Option<f64>,
        /// Process time t (p = 1 - e^{-t}).
        #[arg(long)]
        t: Option<f64>,
        /// Relative density nt.
        #[arg(long)]
        nt: Option<f64>,
        /// Exact edge count (runs the fixed-m process instead).
        #[arg(long)]
        m: Option<u64>,
        #[arg(long, default_value_t = 4)]
        kmax: usize,
        #[arg(long, default_value_t = 1)]
        replicates: u64,
    },

    /// Run the edge-ordered graph process once, reporting S_1..S_kmax, chi and
    /// the two largest components at each checkpoint edge count.
    Trajectory {
        #[arg(long)]
        n: u64,
        /// Strictly increasing edge counts, e.g. --checkpoints 0,100,250.
        #[arg(long, value_delimiter = ',', required = true)]
        checkpoints: Vec<u64>,
        #[arg(long, default_value_t = 4)]
        kmax: usize,
    },

    /// Monte Carlo verification suites; exits 2 when a statistical verdict fails.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        /// Vertex count (default 100000; 10000 for inverse-chi and drift).
        #[arg(long)]
        n: Option<u64>,
        /// Relative density nt (subcritical suites; exclusive with --p/--t).
        #[arg(long)]
        nt: Option<f64>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        t: Option<f64>,
        /// Replicates (defaults per suite: lln/subcritical/critical-scaling 200,
        /// covariance/clt 2000, supercritical 50, inverse-chi 30, drift 500).
        #[arg(long)]
        replicates: Option<u64>,
        #[arg(long, default_value_t = 4)]
        kmax: usize,
        /// Mean offspring for the supercritical suite (> 1).
        #[arg(long, default_value_t = 1.5)]
        lambda: f64,
        /// Sizes for the critical-scaling suite.
        #[arg(long, value_delimiter = ',', default_values_t = [10_000u64, 40_000, 160_000])]
        n_list: Vec<u64>,
        /// Density grid for the inverse-chi suite.
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0])]
        grid: Vec<f64>,
        /// Size multiplier for the inverse-chi shrink test.
        #[arg(long, default_value_t = 8)]
        scale_factor: u64,
    },

    /// Survival probability of the supercritical branching process: the root
    /// of rho = 1 - e^{-lambda rho} in (0, 1), to 1e-12.
    Rho {
        /// Mean offspring (> 1).
        #[arg(long)]
        lambda: f64,
    },

    /// Compare the stated asymptotic variance polynomials qm_{k,l} with the
    /// covariance polynomials hp_{k,l}, coefficient by coefficient. The
    /// (2,2) entry disagrees in the x^4 term; the diff is reported verbatim
    /// with no pass/fail judgment.
    Conjecture,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{err}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{err}");
                    ExitCode::from(1)
                }
            };
        }
    };
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(Outcome { output, failed }) => {
            if let Err(e) = emit(&cli.out, &output) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            if failed {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

struct Outcome {
    output: String,
    /// Set when a verify suite completed with a failing verdict (exit 2).
    failed: bool,
}

impl Outcome {
    fn ok(output: String) -> Self {
        Outcome {
            output,
            failed: false,
        }
    }
}

fn emit(out: &Option<PathBuf>, content: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, content),
        None => std::io::stdout().write_all(content.as_bytes()),
    }
}

fn run(cli: &Cli) -> Result<Outcome, String> {
    match &cli.command {
        Command::Polys { family, k, l } => {
            polys(*family, *k, *l, effective_format(cli, Format::Text))
        }
        Command::Borel {
            lambda,
            jmax,
            mmax,
            sample,
            truncation_cap,
        } => match sample {
            Some(count) => borel_samples(
                *lambda,
                *count,
                *truncation_cap,
                cli.seed,
                effective_format(cli, Format::Csv),
            ),
            None => borel_table(*lambda, *jmax, *mmax, effective_format(cli, Format::Json)),
        },
        Command::Simulate {
            n,
            p,
            t,
            nt,
            m,
            kmax,
            replicates,
        } => {
            let density = pick_density(*p, *t, *nt, *m)?;
            simulate(
                *n,
                density,
                *kmax,
                *replicates,
                cli.seed,
                effective_format(cli, Format::Csv),
            )
        }
        Command::Trajectory {
            n,
            checkpoints,
            kmax,
        } => run_trajectory(
            *n,
            checkpoints,
            *kmax,
            cli.seed,
            effective_format(cli, Format::Csv),
        ),
        Command::Verify {
            suite,
            n,
            nt,
            p,
            t,
            replicates,
            kmax,
            lambda,
            n_list,
            grid,
            scale_factor,
        } => {
            let density = match (p, t, nt) {
                (None, None, None) => Density::Nt(0.5),
                _ => pick_density(*p, *t, *nt, None)?,
            };
            verify(
                *suite,
                VerifyArgs {
                    n: n.unwrap_or(match suite {
                        Suite::InverseChi | Suite::Drift => 10_000,
                        _ => 100_000,
                    }),
                    density,
                    replicates: replicates.unwrap_or(match suite {
                        Suite::Covariance | Suite::Clt => 2000,
                        Suite::Supercritical => 50,
                        Suite::InverseChi => 30,
                        Suite::Drift => 500,
                        _ => 200,
                    }),
                    kmax: *kmax,
                    lambda: *lambda,
                    n_list: n_list.clone(),
                    grid: grid.clone(),
                    scale_factor: *scale_factor,
                    master_seed: cli.seed,
                },
                effective_format(cli, Format::Json),
            )
        }
        Command::Rho { lambda } => rho(*lambda, effective_format(cli, Format::Text)),
        Command::Conjecture => conjecture(effective_format(cli, Format::Text)),
    }
}

fn effective_format(cli: &Cli, default: Format) -> Format {
    cli.format.unwrap_or(default)
}

fn pick_density(
    p: Option<f64>,
    t: Option<f64>,
    nt: Option<f64>,
    m: Option<u64>,
) -> Result<Density, String> {
    let given = [p.is_some(), t.is_some(), nt.is_some(), m.is_some()]
        .iter()
        .filter(|&&b| b)
        .count();
    if given != 1 {
        return Err("specify exactly one density parameter: --p, --t, --nt or --m".to_string());
    }
    Ok(if let Some(p) = p {
        Density::P(p)
    } else if let Some(t) = t {
        Density::T(t)
    } else if let Some(nt) = nt {
        Density::Nt(nt)
    } else {
        Density::M(m.expect("one parameter set"))
    })
}

// ---- polys ----

struct PolyRow {
    family: &'static str,
    k: u64,
    l: Option<u64>,
    poly: suscept::Polynomial,
}

impl PolyRow {
    fn label(&self) -> String {
        match self.l {
            Some(l) => format!("{}_{},{}", self.family, self.k, l),
            None => format!("{}_{}", self.family, self.k),
        }
    }
}

fn polys(family: Family, k: u64, l: Option<u64>, format: Format) -> Result<Outcome, String> {
    let mut cache = PolyCache::new();
    let mut rows = Vec::new();
    let fail = |e: suscept::families::FamilyError| e.to_string();
    match family {
        Family::P => {
            for j in 2..=k {
                rows.push(PolyRow {
                    family: "p",
                    k: j,
                    l: None,
                    poly: cache.p(j).map_err(fail)?,
                });
            }
        }
        Family::Q => {
            for j in 3..=k {
                rows.push(PolyRow {
                    family: "q",
                    k: j,
                    l: None,
                    poly: cache.q(j).map_err(fail)?,
                });
            }
        }
        Family::Hp => {
            let lmax = l.unwrap_or(k);
            for a in 2..=k {
                for b in 2..=lmax {
                    rows.push(PolyRow {
                        family: "hp",
                        k: a,
                        l: Some(b),
                        poly: cache.hp(a, b).map_err(fail)?,
                    });
                }
            }
        }
        Family::Pi => {
            for j in 2..=k {
                rows.push(PolyRow {
                    family: "pi",
                    k: j,
                    l: None,
                    poly: cache.pi(j).map_err(fail)?,
                });
            }
        }
        Family::R => {
            for j in 0..=k {
                rows.push(PolyRow {
                    family: "r",
                    k: j,
                    l: None,
                    poly: cache.r(j).map_err(fail)?,
                });
            }
        }
        Family::Px => {
            for j in 2..=k {
                rows.push(PolyRow {
                    family: "px",
                    k: j,
                    l: None,
                    poly: cache.px(j).map_err(fail)?,
                });
            }
        }
        Family::Py => {
            for j in 2..=k {
                rows.push(PolyRow {
                    family: "py",
                    k: j,
                    l: None,
                    poly: cache.py(j).map_err(fail)?,
                });
            }
        }
    }

    let mut out = String::new();
    match format {
        Format::Text => {
            for row in &rows {
                writeln!(out, "{}(x) = {}", row.label(), row.poly).unwrap();
            }
        }
        Format::Json => {
            let items: Vec<serde_json::Value> = rows
                .iter()
                .map(|row| {
                    serde_json::json!({
                        "family": row.family,
                        "k": row.k,
                        "l": row.l,
                        "degree": row.poly.degree(),
                        "coeffs": row.poly.coeff_strings(),
                        "text": row.poly.to_string(),
                    })
                })
                .collect();
            out = serde_json::to_string_pretty(&items).unwrap();
            out.push('\n');
        }
        Format::Csv => {
            out.push_str("family,k,l,degree,coeffs,text\n");
            for row in &rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    row.family,
                    row.k,
                    row.l.map(|v| v.to_string()).unwrap_or_default(),
                    row.poly.degree().map(|d| d.to_string()).unwrap_or_default(),
                    row.poly.coeff_strings().join(";"),
                    row.poly
                )
                .unwrap();
            }
        }
    }
    Ok(Outcome::ok(out))
}

// ---- borel ----

fn borel_table(lambda: f64, jmax: u64, mmax: u64, format: Format) -> Result<Outcome, String> {
    let table = BorelMomentTable::compute(lambda, jmax, mmax).map_err(|e| e.to_string())?;
    let mut out = String::new();
    match format {
        Format::Json => {
            out = serde_json::to_string_pretty(&table).unwrap();
            out.push('\n');
        }
        Format::Text => {
            writeln!(out, "Borel distribution, lambda = {lambda}").unwrap();
            writeln!(out, "pmf:").unwrap();
            for (i, v) in table.pmf.iter().enumerate() {
                writeln!(out, "  P(beta = {}) = {v}", i + 1).unwrap();
            }
            writeln!(out, "moments E beta^m:").unwrap();
            for (m, v) in table.moments.iter().enumerate() {
                writeln!(out, "  m = {m}: {v}").unwrap();
            }
            writeln!(out, "cumulants kappa_m:").unwrap();
            for (i, v) in table.cumulants.iter().enumerate() {
                writeln!(out, "  m = {}: {v}", i + 1).unwrap();
            }
            writeln!(out, "size-biased moments E bhat^m:").unwrap();
            for (m, v) in table.size_biased_moments.iter().enumerate() {
                writeln!(out, "  m = {m}: {v}").unwrap();
            }
        }
        Format::Csv => {
            out.push_str("kind,index,value\n");
            for (i, v) in table.pmf.iter().enumerate() {
                writeln!(out, "pmf,{},{v}", i + 1).unwrap();
            }
            for (m, v) in table.moments.iter().enumerate() {
                writeln!(out, "moment,{m},{v}").unwrap();
            }
            for (i, v) in table.cumulants.iter().enumerate() {
                writeln!(out, "cumulant,{},{v}", i + 1).unwrap();
            }
            for (m, v) in table.size_biased_moments.iter().enumerate() {
                writeln!(out, "size_biased_moment,{m},{v}").unwrap();
            }
        }
    }
    Ok(Outcome::ok(out))
}

fn borel_samples(
    lambda: f64,
    count: u64,
    truncation_cap: u64,
    seed: u64,
    format: Format,
) -> Result<Outcome, String> {
    let params =
        suscept::borel::BorelParams::with_cap(lambda, truncation_cap).map_err(|e| e.to_string())?;
    let mut rng = suscept::rng::replicate_rng(suscept::rng::derive_seed(seed, 0));
    let draws = (0..count)
        .map(|_| suscept::borel::sample(&params, &mut rng))
        .collect::<Result<Vec<u64>, _>>()
        .map_err(|e| e.to_string())?;
    let mut out = String::new();
    match format {
        Format::Json => {
            out = serde_json::to_string_pretty(&serde_json::json!({
                "lambda": lambda,
                "samples": draws,
            }))
            .unwrap();
            out.push('\n');
        }
        Format::Csv => {
            out.push_str("index,total_progeny\n");
            for (i, d) in draws.iter().enumerate() {
                writeln!(out, "{i},{d}").unwrap();
            }
        }
        Format::Text => {
            for d in &draws {
                writeln!(out, "{d}").unwrap();
            }
        }
    }
    Ok(Outcome::ok(out))
}

// ---- simulate / trajectory ----

fn render_snapshots(rows: &[SnapshotSummary], kmax: usize, format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Csv => {
            writeln!(out, "{}", SnapshotSummary::csv_header(kmax)).unwrap();
            for row in rows {
                writeln!(out, "{}", row.to_csv_row()).unwrap();
            }
        }
        Format::Json => {
            out = serde_json::to_string_pretty(rows).unwrap();
            out.push('\n');
        }
        Format::Text => {
            for row in rows {
                writeln!(
                    out,
                    "replicate {}: n={} m={} nt={:.6} chi={} largest=({}, {})",
                    row.replicate, row.n, row.m, row.nt, row.chi, row.largest1, row.largest2
                )
                .unwrap();
            }
        }
    }
    out
}

fn simulate(
    n: u64,
    density: Density,
    kmax: usize,
    replicates: u64,
    seed: u64,
    format: Format,
) -> Result<Outcome, String> {
    if replicates == 0 {
        return Err("need at least 1 replicate".to_string());
    }
    let rows = if replicates == 1 {
        // single snapshot; the replicated config requires R >= 2
        let resolved = density.resolve(n).map_err(|e| e.to_string())?;
        let replicate_seed = suscept::rng::derive_seed(seed, 0);
        let row = match resolved.m {
            Some(m) => {
                let mut rows =
                    trajectory(n, kmax, &[m], replicate_seed).map_err(|e| e.to_string())?;
                rows.pop().expect("one checkpoint")
            }
            None => suscept::graph::sample_gnp(n, resolved.p, kmax, replicate_seed, 0)
                .map_err(|e| e.to_string())?,
        };
        vec![row]
    } else {
        let config = ExperimentConfig {
            n,
            density,
            kmax,
            replicates,
            master_seed: seed,
        };
        run_replicates(&config).map_err(|e| e.to_string())?
    };
    Ok(Outcome::ok(render_snapshots(&rows, kmax, format)))
}

fn run_trajectory(
    n: u64,
    checkpoints: &[u64],
    kmax: usize,
    seed: u64,
    format: Format,
) -> Result<Outcome, String> {
    let rows = trajectory(n, kmax, checkpoints, seed).map_err(|e| e.to_string())?;
    Ok(Outcome::ok(render_snapshots(&rows, kmax, format)))
}

// ---- verify ----

struct VerifyArgs {
    n: u64,
    density: Density,
    replicates: u64,
    kmax: usize,
    lambda: f64,
    n_list: Vec<u64>,
    grid: Vec<f64>,
    scale_factor: u64,
    master_seed: u64,
}

fn verify(suite: Suite, args: VerifyArgs, format: Format) -> Result<Outcome, String> {
    let started = Instant::now();
    let subcritical = SubcriticalParams {
        n: args.n,
        density: args.density,
        replicates: args.replicates,
        master_seed: args.master_seed,
        kmax: args.kmax,
    };
    let report = match suite {
        Suite::Lln => run_lln_suite(&subcritical),
        Suite::Covariance => run_covariance_suite(&subcritical),
        Suite::Clt => run_clt_suite(&subcritical),
        Suite::Subcritical => run_subcritical_suite(&subcritical),
        Suite::InverseChi => run_inverse_chi_suite(&InverseChiParams {
            n: args.n,
            scale_factor: args.scale_factor,
            nt_grid: args.grid.clone(),
            replicates: args.replicates,
            master_seed: args.master_seed,
        }),
        Suite::Supercritical => run_supercritical_suite(&SupercriticalParams {
            n: args.n,
            lambda: args.lambda,
            replicates: args.replicates,
            master_seed: args.master_seed,
            kmax: args.kmax,
        }),
        Suite::CriticalScaling => run_critical_scaling_suite(&CriticalScalingParams {
            n_list: args.n_list.clone(),
            replicates: args.replicates,
            master_seed: args.master_seed,
        }),
        Suite::Drift => {
            let nt = args.density.resolve(args.n).map_err(|e| e.to_string())?.nt;
            run_drift_suite(&DriftParams {
                n: args.n,
                nt,
                window_replicates: args.replicates,
                master_seed: args.master_seed,
            })
        }
    }
    .map_err(|e| e.to_string())?;
    // timing goes to stderr so reports stay byte-reproducible
    eprintln!(
        "suite {} finished in {:.2}s: {}",
        report.suite,
        started.elapsed().as_secs_f64(),
        if report.passed { "pass" } else { "FAIL" }
    );
    let output = match format {
        Format::Json => {
            let mut s = report.to_json();
            s.push('\n');
            s
        }
        Format::Text => render_report_text(&report),
        Format::Csv => render_report_csv(&report),
    };
    Ok(Outcome {
        output,
        failed: !report.passed,
    })
}

fn render_report_text(report: &SuiteReport) -> String {
    let mut out = String::new();
    writeln!(out, "suite: {}", report.suite).unwrap();
    for warning in &report.warnings {
        writeln!(out, "warning: {warning}").unwrap();
    }
    for c in &report.per_statistic {
        write!(
            out,
            "{:<34} empirical={:<24} theory={:<24}",
            c.name, c.empirical, c.theory
        )
        .unwrap();
        if let Some(z) = c.z {
            write!(out, " z={z:<+10.3}").unwrap();
        }
        writeln!(out, " [{}]", c.verdict).unwrap();
    }
    writeln!(
        out,
        "overall: {}",
        if report.passed { "pass" } else { "fail" }
    )
    .unwrap();
    out
}

fn render_report_csv(report: &SuiteReport) -> String {
    let mut out = String::from("name,empirical,theory,se,z,verdict,source\n");
    for c in &report.per_statistic {
        writeln!(
            out,
            "{},{},{},{},{},{},\"{}\"",
            c.name,
            c.empirical,
            c.theory,
            c.se.map(|v| v.to_string()).unwrap_or_default(),
            c.z.map(|v| v.to_string()).unwrap_or_default(),
            c.verdict,
            c.source
        )
        .unwrap();
    }
    out
}

// ---- rho / conjecture ----

fn rho(lambda: f64, format: Format) -> Result<Outcome, String> {
    let value = solve_rho(lambda).map_err(|e| e.to_string())?;
    let residual = (1.0 - (-lambda * value).exp() - value).abs();
    let out = match format {
        Format::Text => format!("{value:.12}\n"),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&serde_json::json!({
                "lambda": lambda,
                "rho": value,
                "residual": residual,
            }))
            .unwrap();
            s.push('\n');
            s
        }
        Format::Csv => format!("lambda,rho,residual\n{lambda},{value},{residual}\n"),
    };
    Ok(Outcome::ok(out))
}

fn conjecture(format: Format) -> Result<Outcome, String> {
    let mut cache = PolyCache::new();
    let entries = conjecture_report(&mut cache).map_err(|e| e.to_string())?;
    let mut out = String::new();
    match format {
        Format::Text => {
            for e in &entries {
                writeln!(out, "qm_{},{} (stated)  : {}", e.k, e.l, e.stated).unwrap();
                writeln!(out, "hp_{},{} (computed): {}", e.k, e.l, e.computed).unwrap();
                if e.identical() {
                    writeln!(out, "  coefficients identical").unwrap();
                } else {
                    for (power, stated, computed) in &e.diffs {
                        writeln!(out, "  x^{power}: stated {stated}, computed {computed}").unwrap();
                    }
                }
            }
        }
        Format::Json | Format::Csv => {
            let items: Vec<serde_json::Value> = entries
                .iter()
                .map(|e| {
                    serde_json::json!({
                        "k": e.k,
                        "l": e.l,
                        "stated": e.stated.to_string(),
                        "stated_coeffs": e.stated.coeff_strings(),
                        "computed": e.computed.to_string(),
                        "computed_coeffs": e.computed.coeff_strings(),
                        "identical": e.identical(),
                        "diffs": e.diffs.iter().map(|(power, s, c)| {
                            serde_json::json!({
                                "power": power,
                                "stated": s.to_string(),
                                "computed": c.to_string(),
                            })
                        }).collect::<Vec<_>>(),
                    })
                })
                .collect();
            out = serde_json::to_string_pretty(&items).unwrap();
            out.push('\n');
        }
    }
    Ok(Outcome::ok(out))
}
