use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use sparse_soc::report::counterexample::{dyadic_schedule, reproduce_j2_counterexample, CounterexampleReport};
use sparse_soc::report::fdcheck::fd_check_suite;
use sparse_soc::report::{self, Config, Status, SCHEMA_VERSION};
use sparse_soc::solver::solve_ocp;
use sparse_soc::{Error, GridFunction};

#[derive(Parser)]
#[command(name = "sparse-soc", version, about = "Second-order optimality checks for sparse optimal control")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Overrides the seed of the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the number of sampled critical directions.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Write the JSON report here.
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    /// Write CSV tables into this directory.
    #[arg(long = "csv-dir", global = true)]
    csv_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve, certify first order, evaluate second-order sums and probe growth.
    Analyze { config: PathBuf },
    /// Truncated unbounded critical direction for j2 at zero.
    Counterexample {
        #[arg(long, default_value_t = 512)]
        grid: usize,
        #[arg(long, default_value_t = 1.0 / 1024.0)]
        tmin: f64,
    },
    /// Finite-difference and brute-force consistency table; fails on any failing row.
    Fdcheck { config: Option<PathBuf> },
    /// Solve the control problem and write the solution.
    Solve {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(path: Option<&Path>, cli: &Cli) -> Result<Config> {
    let mut cfg = match path {
        Some(p) => Config::load(p).with_context(|| format!("reading {}", p.display()))?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.analysis.seed = seed;
    }
    if let Some(n) = cli.samples {
        cfg.analysis.samples = n;
    }
    Ok(cfg)
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n").with_context(|| format!("writing {}", path.display()))
}

fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

fn analyze(cli: &Cli, config: &Path) -> Result<ExitCode> {
    let cfg = load(Some(config), cli)?;
    let report = report::analyze(&cfg)?;
    report::write_report(&report, cli.json.as_deref(), cli.csv_dir.as_deref())?;
    println!("status: {}", serde_json::to_value(report.status)?.as_str().unwrap_or("?"));
    if let Some(e) = &report.error {
        println!("error: {e}");
    }
    if let Some(s) = &report.solver {
        println!("solver: {} iterations, J = {:.12e}, zero fraction {:.3}", s.iterations, s.objective, s.zero_fraction);
    }
    if let Some(f) = &report.first_order {
        println!("first order: residual {:.3e} (tol {:.1e}) {}", f.residual, f.tol, verdict(f.pass));
    }
    let n = report.critical_samples.len();
    let ok = report.critical_samples.iter().filter(|s| s.pass).count();
    println!("critical directions: {ok}/{n} with positive second-order sum{}", if report.cone_grid_dependent { " (grid-dependent cone)" } else { "" });
    if let Some(g) = &report.growth {
        println!(
            "growth: min ratio {:.6e} over {} samples in radius {:.1e}, threshold {:.3e} {}",
            g.min_ratio,
            g.samples + g.directed_samples,
            g.radius,
            g.threshold,
            verdict(g.pass)
        );
    }
    Ok(if report.status == Status::Ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn print_counterexample(r: &CounterexampleReport) {
    println!("{:>12} {:>12} {:>12} {:>12} {:>12} {:>12}", "t", "j2", "j2 exact", "pairing", "exact", "quotient");
    for row in &r.rows {
        println!(
            "{:>12.6e} {:>12.8} {:>12.8} {:>12.8} {:>12.8} {:>12.8}",
            row.t, row.j2, row.j2_exact, row.pairing, row.pairing_exact, row.quotient
        );
    }
    println!("extrapolated limit {:.8} (expected {:.8})", r.extrapolated_limit, r.expected_limit);
}

fn counterexample(cli: &Cli, grid: usize, tmin: f64) -> Result<ExitCode> {
    let r = reproduce_j2_counterexample(grid, &dyadic_schedule(tmin))?;
    print_counterexample(&r);
    if let Some(path) = &cli.json {
        write_json(path, &serde_json::json!({ "schema_version": SCHEMA_VERSION, "timestamp": timestamp(), "counterexample": r }))?;
    }
    if let Some(dir) = &cli.csv_dir {
        std::fs::create_dir_all(dir)?;
        let mut w = csv::Writer::from_path(dir.join("counterexample.csv"))?;
        for row in &r.rows {
            w.serialize(row)?;
        }
        w.flush()?;
    }
    Ok(ExitCode::SUCCESS)
}

fn fdcheck(cli: &Cli, config: Option<&Path>) -> Result<ExitCode> {
    let cfg = load(config, cli)?;
    let rows = fd_check_suite(&cfg)?;
    for r in &rows {
        let order = r.order.map_or("-".to_string(), |p| format!("{p:.3}"));
        let max = r.errors.iter().cloned().fold(0.0, f64::max);
        println!("{:<16} {} max error {:.3e} order {}", r.name, verdict(r.pass), max, order);
    }
    if let Some(path) = &cli.json {
        write_json(path, &serde_json::json!({ "schema_version": SCHEMA_VERSION, "timestamp": timestamp(), "rows": rows }))?;
    }
    if let Some(dir) = &cli.csv_dir {
        std::fs::create_dir_all(dir)?;
        let mut w = csv::Writer::from_path(dir.join("fdcheck.csv"))?;
        w.write_record(["name", "pass", "max_error", "order"])?;
        for r in &rows {
            let max = r.errors.iter().cloned().fold(0.0, f64::max);
            w.write_record([r.name.clone(), r.pass.to_string(), format!("{max:e}"), r.order.map_or(String::new(), |p| p.to_string())])?;
        }
        w.flush()?;
    }
    Ok(if rows.iter().all(|r| r.pass) { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn solve(cli: &Cli, config: &Path, out: &Path) -> Result<ExitCode> {
    let cfg = load(Some(config), cli)?;
    let problem = cfg.problem()?;
    let u0 = GridFunction::zeros(problem.pde.spec);
    let (sol, converged) = match solve_ocp(&problem, &u0, cfg.solve_options()) {
        Ok(s) => (s, true),
        Err(Error::MaxIterReached(best)) => (*best, false),
        Err(e) => return Err(e.into()),
    };
    report::write_solution(&problem, &sol, out)?;
    println!(
        "{} after {} iterations, KKT residual {:.3e}; written to {}",
        if converged { "converged" } else { "iteration cap reached" },
        sol.iterations,
        sol.kkt_residual,
        out.display()
    );
    Ok(if converged { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze { config } => analyze(&cli, config),
        Command::Counterexample { grid, tmin } => counterexample(&cli, *grid, *tmin),
        Command::Fdcheck { config } => fdcheck(&cli, config.as_deref()),
        Command::Solve { config, out } => solve(&cli, config, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
