use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use clorbit::counting::{
    count_conjugacy_class, count_coset_orbit, count_cylinder_restricted, count_full_orbit, fit_rate, CountSeries,
    Measure,
};
use clorbit::spectral::system_delta;
use clorbit::{Error, Result};
use clorbit_cli::config::{hash_text, Experiment, ExperimentConfig};
use clorbit_cli::pipeline::{self, Artifacts};

#[derive(Parser, Debug)]
#[command(name = "clorbit", version, about = "Orbit and conjugacy-class counting experiments")]
struct Cli {
    /// Experiment configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; defaults to `[output] dir`, else `<root>/<name>`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Default output root when neither --out nor `[output] dir` is given.
    #[arg(long, global = true, env = "CLORBIT_OUT", hide_env_values = true)]
    out_root: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Cylinder depth, overriding `[potential] depth`.
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Largest threshold for `count`, overriding the configured one.
    #[arg(long, global = true)]
    tmax: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the geodesic acceptor.
    Acceptor,
    /// Build, verify and write the coset acceptor of the centralizer of g.
    CosetAcceptor,
    /// Pressure curve of the maximal component.
    Pressure,
    /// Critical exponent by depth and the component structure.
    Delta,
    /// One count series.
    Count {
        kind: CountKind,
        /// Accepted prefix for `cylinder`.
        #[arg(long, default_value = "")]
        prefix: String,
    },
    /// Fit the growth rate of a count series CSV.
    Fit {
        #[arg(long)]
        series: PathBuf,
        /// `LO,HI`.
        #[arg(long, value_parser = parse_window)]
        window: (f64, f64),
        /// Lattice span; restricts the fit to realized jumps.
        #[arg(long)]
        lattice: Option<f64>,
    },
    /// Oracle and invariant checks only.
    Verify,
    /// The full pipeline.
    Run,
    /// Print a finished run's summary.
    Report,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CountKind {
    Full,
    Coset,
    Cylinder,
    Conjugacy,
}

fn parse_window(s: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected LO,HI")?;
    Ok((
        lo.trim().parse().map_err(|e| format!("{e}"))?,
        hi.trim().parse().map_err(|e| format!("{e}"))?,
    ))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error[usage]: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            match e {
                Error::Usage(_) | Error::Config(_) | Error::Parse(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn load(cli: &Cli) -> Result<Experiment> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Usage("--config is required".to_string()))?;
    let text = std::fs::read_to_string(path)?;
    let mut config = ExperimentConfig::parse(&text)?;
    let mut hashed = text.clone();
    if let Some(d) = cli.depth {
        config.potential.depth = d;
        hashed.push_str(&format!("\n# --depth {d}\n"));
    }
    config.build(&hashed)
}

fn out_dir(cli: &Cli, exp: Option<&Experiment>) -> Result<PathBuf> {
    match (exp, &cli.out) {
        (_, Some(p)) => Ok(p.clone()),
        (Some(e), None) => Ok(e.output_dir(None, cli.out_root.as_deref())),
        (None, None) => Err(Error::Usage("--out or --config is required".to_string())),
    }
}

fn finish(art: Artifacts) -> Result<ExitCode> {
    for p in art.commit()? {
        println!("wrote {}", p.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn dispatch(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Fit { series, window, lattice } => {
            let text = std::fs::read_to_string(series)?;
            let s = CountSeries::from_csv(&text)?;
            let fit = fit_rate(&s, *window, *lattice)?;
            let dir = match &cli.out {
                Some(p) => p.clone(),
                None => series.parent().unwrap_or(Path::new(".")).to_path_buf(),
            };
            let stem = series.file_stem().and_then(|s| s.to_str()).unwrap_or("series");
            let name = format!("fit_{}.json", stem.trim_start_matches("count_"));
            let mut art = Artifacts::new(&dir)?;
            art.write_json(&name, &pipeline::fit_json(&fit))?;
            println!("rate {} over {} points", clorbit::output::sci(fit.rate), fit.points);
            finish(art)
        }
        Command::Report => {
            let exp = cli.config.as_ref().map(|_| load(cli)).transpose()?;
            let dir = out_dir(cli, exp.as_ref())?;
            let path = dir.join("summary.json");
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Error::Usage(format!("{}: {e}; run `clorbit run` first", path.display())))?;
            let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
            print!("{}", report(&v));
            Ok(ExitCode::SUCCESS)
        }
        _ => {
            let exp = load(cli)?;
            let dir = out_dir(cli, Some(&exp))?;
            let mut art = Artifacts::new(&dir)?;
            let result = command(cli, &exp, &mut art);
            match result {
                Ok(true) => finish(art),
                Ok(false) => {
                    finish(art)?;
                    Ok(ExitCode::from(1))
                }
                Err(e) => {
                    eprintln!("partial artifacts left in {}", art.dir().display());
                    Err(e)
                }
            }
        }
    }
}

/// Runs a configured command; `Ok(false)` reports failed checks.
fn command(cli: &Cli, exp: &Experiment, art: &mut Artifacts) -> Result<bool> {
    let cfg = &exp.config;
    match &cli.command {
        Command::Acceptor => {
            pipeline::check_space(exp)?;
            art.write("acceptor.txt", &pipeline::geodesic_acceptor(exp).to_text(exp.gens()))?;
        }
        Command::CosetAcceptor => {
            pipeline::check_space(exp)?;
            let a = pipeline::coset_acceptor(exp)?;
            println!("{} states, verified to length {}", a.num_vertices(), a.verified_len().unwrap_or(0));
            art.write("coset_acceptor.txt", &a.to_text(exp.gens()))?;
        }
        Command::Pressure => {
            let c = pipeline::build_codings(exp)?;
            let sd = system_delta(&c.geodesic_roof, &c.geodesic_graph, cfg.potential.depth)?;
            let curve = sd.maximal_transfer().pressure_curve(&cfg.potential.pressure_t)?;
            println!("root {}", clorbit::output::sci(curve.root));
            art.write("pressure_curve.csv", &curve.to_csv())?;
        }
        Command::Delta => {
            let c = pipeline::build_codings(exp)?;
            let mut depths = cfg.potential.stability_depths.clone();
            depths.retain(|&d| d < cfg.potential.depth);
            depths.push(cfg.potential.depth);
            let rows = pipeline::delta_by_depth(&c, &depths)?;
            for (d, v) in &rows {
                println!("depth {d}: delta {}", clorbit::output::sci(*v));
            }
            art.write("delta_by_depth.csv", &pipeline::delta_csv(&rows))?;
            let st = pipeline::structure(&c, cfg.potential.depth)?;
            println!("coset shift: {} maximal of {} components, m = {}", st.maximal.len(), st.components, st.m);
        }
        Command::Count { kind, prefix } => {
            let mut c = pipeline::build_codings(exp)?;
            let cn = &cfg.counting;
            let sd = system_delta(&c.geodesic_roof, &c.geodesic_graph, cfg.potential.depth)?;
            let verdict = sd.maximal_transfer().lattice_test(cfg.potential.lattice_max_period)?;
            let grid = pipeline::grid_for(exp, &verdict);
            let (name, series) = match kind {
                CountKind::Full => {
                    let t = cli.tmax.unwrap_or(cn.t_max_full);
                    ("count_full.csv".to_string(), count_full_orbit(&exp.system, &c.geodesic, &grid, t)?)
                }
                CountKind::Coset => {
                    let t = cli.tmax.unwrap_or(cn.t_max_coset);
                    pipeline::ensure_verified(exp, &mut c.coset, Measure::Displacement, t)?;
                    ("count_coset.csv".to_string(), count_coset_orbit(&exp.system, &c.coset, &grid, t)?)
                }
                CountKind::Cylinder => {
                    let t = cli.tmax.unwrap_or(cn.t_max_coset);
                    let u = exp.gens().parse(prefix)?;
                    pipeline::ensure_verified(exp, &mut c.coset, Measure::Displacement, t)?;
                    let label = if prefix.is_empty() { "e" } else { prefix.as_str() };
                    (
                        format!("count_cylinder_{label}.csv"),
                        count_cylinder_restricted(&exp.system, &c.coset, u.letters(), &grid, t)?,
                    )
                }
                CountKind::Conjugacy => {
                    let t = cli.tmax.unwrap_or(cn.t_max_conjugacy);
                    pipeline::ensure_verified(exp, &mut c.coset, Measure::Conjugate(exp.g.clone()), t)?;
                    (
                        "count_conjugacy.csv".to_string(),
                        count_conjugacy_class(&exp.system, &c.coset, &exp.g, &grid, t)?,
                    )
                }
            };
            let hash = match cli.tmax {
                Some(t) => hash_text(&format!("{}{t}", exp.hash)),
                None => exp.hash.clone(),
            };
            let series = series.with_provenance(&hash);
            println!("N({}) = {}", series.thresholds.last().copied().unwrap_or(0.0), series.counts.last().copied().unwrap_or(0));
            art.write(&name, &series.to_csv())?;
        }
        Command::Verify => {
            let report = pipeline::verify(exp);
            for c in &report.checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if let Some(v) = &report.lattice_verdict {
                println!("lattice: {v}");
            }
            art.write_json("verify.json", &report)?;
            return Ok(report.passed());
        }
        Command::Run => {
            let s = pipeline::run(exp, art)?;
            print!("{}", report(&serde_json::to_value(&s).map_err(|e| Error::Parse(e.to_string()))?));
        }
        Command::Fit { .. } | Command::Report => unreachable!("handled without a config"),
    }
    Ok(true)
}

fn report(v: &serde_json::Value) -> String {
    let mut out = String::new();
    for key in [
        "name",
        "g",
        "delta_pressure",
        "delta_fit",
        "coset_rate",
        "conjugacy_rate",
        "ratio",
        "m",
        "maximal_components",
        "block_triangular",
        "lattice_verdict",
        "lattice_span",
        "mixing_hypothesis_flag",
        "dominated",
        "audit_rho",
        "c_prediction_ratio",
    ] {
        out.push_str(&format!("{key:24} {}\n", v[key]));
    }
    if let Some(rows) = v["c_estimates"].as_array() {
        for r in rows {
            out.push_str(&format!("{:24} {} (low confidence: {})\n", format!("C at l = {}", r["l"]), r["value"], r["low_confidence"]));
        }
    }
    out
}
