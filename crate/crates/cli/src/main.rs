use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use nonlocality::cglmp::{optimize_cglmp_gamma, optimize_cglmp_state_and_settings, PhaseSearch};
use nonlocality::chsh::{analytic_max_chsh, optimize_chsh};
use nonlocality::detection::{chsh_optimal_critical_efficiency, in_anomaly_regime, optimize_critical_efficiency};
use nonlocality::hardy::{hardy_certificate, hardy_scan, optimize_hardy};
use nonlocality::nlb::{chsh_of_behavior, pr_box_behavior, sample_pr_box};
use nonlocality::polytope::{enumerate_vertices, optimize_kl, optimize_kl_global};
use nonlocality::quantum::{entanglement_entropy, Scenario};
use nonlocality::report::{reproduce_all, ReproConfig, ToleranceProfile};
use nonlocality::State;

#[derive(Parser)]
#[command(name = "nonlocality", version, about = "Bell non-locality measures and the reproduction report")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Seed for every randomized component.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// `default`, or `strict` for tolerances ten times tighter.
    #[arg(long, global = true)]
    tolerance_profile: Option<ToleranceProfile>,
    /// TOML file with seed, profile, tolerances and grids; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Optimized CHSH against the closed form on a theta grid.
    ChshScan {
        #[arg(long, default_value_t = 50)]
        points: usize,
    },
    /// Optimized critical detection efficiency on a theta grid.
    DetectionScan {
        #[arg(long, default_value_t = 20)]
        points: usize,
    },
    /// CGLMP maximum over phases, at fixed gamma or jointly over gamma.
    CglmpOpt {
        #[arg(long, conflicts_with = "global")]
        gamma: Option<f64>,
        #[arg(long)]
        global: bool,
        /// Grid points per phase axis.
        #[arg(long, default_value_t = 24)]
        grid: usize,
    },
    /// KL distance to the local polytope, maximized over phases (and gamma).
    KlOpt {
        #[arg(long, conflicts_with = "global")]
        gamma: Option<f64>,
        #[arg(long)]
        global: bool,
    },
    /// Hardy certificates and scans.
    Hardy {
        /// The named state to certify (the default).
        #[arg(long, value_enum, conflicts_with_all = ["theta", "scan"])]
        state: Option<NamedState>,
        #[arg(long, conflicts_with = "scan")]
        theta: Option<f64>,
        /// Scan this many theta values over [0, pi/4].
        #[arg(long)]
        scan: Option<usize>,
    },
    /// The PR box table, or an empirical table sampled from it.
    Prbox {
        #[arg(long)]
        sample: Option<u64>,
    },
    /// Local polytope utilities.
    Polytope {
        #[command(subcommand)]
        command: PolytopeCommand,
    },
    /// Run every acceptance check and write the report.
    ReproduceAll,
}

#[derive(Clone, Copy, ValueEnum)]
enum NamedState {
    Hardy,
}

#[derive(Subcommand)]
enum PolytopeCommand {
    /// Deterministic vertices of the local polytope.
    Vertices {
        /// settings_a,settings_b,outcomes_a,outcomes_b
        #[arg(long, value_parser = parse_shape)]
        shape: Scenario,
    },
}

fn parse_shape(s: &str) -> Result<Scenario, String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [a, b, oa, ob] if parts.iter().all(|&n| n > 0) => Ok(Scenario::new(a, b, oa, ob)),
        _ => Err("expected four positive integers a,b,oa,ob".into()),
    }
}

type CliResult<T> = Result<T, Box<dyn std::error::Error>>;

struct Output<'a> {
    global: &'a Global,
}

impl Output<'_> {
    fn write_bytes(&self, bytes: &[u8]) -> CliResult<()> {
        match &self.global.out {
            Some(path) => fs::write(path, bytes)?,
            None => io::stdout().lock().write_all(bytes)?,
        }
        Ok(())
    }

    fn json<T: Serialize + ?Sized>(&self, value: &T) -> CliResult<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.write_bytes(s.as_bytes())
    }

    fn csv<R: Serialize>(&self, rows: &[R]) -> CliResult<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        self.write_bytes(&w.into_inner()?)
    }

    /// Rows as CSV, or as a JSON array.
    fn rows<R: Serialize>(&self, rows: &[R]) -> CliResult<()> {
        match self.global.format {
            Format::Json => self.json(rows),
            Format::Csv => self.csv(rows),
        }
    }
}

fn load_config(global: &Global) -> CliResult<ReproConfig> {
    let mut config = match &global.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| format!("reading {}: {e}", path.display()))?;
            toml::from_str(&text).map_err(|e| format!("parsing {}: {e}", path.display()))?
        }
        None => ReproConfig::default(),
    };
    if let Some(seed) = global.seed {
        config.seed = seed;
    }
    if let Some(p) = global.tolerance_profile {
        config.profile = p;
    }
    Ok(config)
}

fn theta_grid(points: usize, include_zero: bool) -> CliResult<Vec<f64>> {
    if points < 2 {
        return Err("need at least 2 points".into());
    }
    let q = std::f64::consts::FRAC_PI_4;
    Ok(if include_zero {
        (0..points).map(|i| q * i as f64 / (points - 1) as f64).collect()
    } else {
        (1..=points).map(|i| q * i as f64 / points as f64).collect()
    })
}

#[derive(Serialize)]
struct ChshRow {
    theta: f64,
    chsh: f64,
    analytic: f64,
    entanglement_bits: f64,
}

#[derive(Serialize)]
struct DetectionRow {
    theta: f64,
    eta_c: f64,
    eta_c_chsh_optimal: f64,
    chsh: f64,
    below_local_model_threshold: bool,
}

#[derive(Serialize)]
struct CglmpRow {
    value: f64,
    gamma: Option<f64>,
    entropy_bits: f64,
    alpha1: f64,
    alpha2: f64,
    beta1: f64,
    beta2: f64,
}

#[derive(Serialize)]
struct KlRow {
    distance_bits: f64,
    gamma: f64,
    phases: [f64; 4],
    solver_gap: f64,
    iterations: usize,
}

#[derive(Serialize)]
struct KlCsvRow {
    distance_bits: f64,
    gamma: f64,
    alpha1: f64,
    alpha2: f64,
    beta1: f64,
    beta2: f64,
    solver_gap: f64,
    iterations: usize,
}

#[derive(Serialize)]
struct PrBoxOut {
    chsh: f64,
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    table: Option<Vec<Vec<Vec<Vec<f64>>>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    empirical_table: Option<Vec<Vec<Vec<Vec<f64>>>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rng: Option<&'static str>,
}

#[derive(Serialize)]
struct CellRow {
    x: usize,
    y: usize,
    a: usize,
    b: usize,
    probability: f64,
}

fn cells(t: &nonlocality::Behavior) -> Vec<CellRow> {
    let s = t.scenario();
    let mut rows = Vec::new();
    for x in 0..s.settings_a {
        for y in 0..s.settings_b {
            for a in 0..s.outcomes_a {
                for b in 0..s.outcomes_b {
                    rows.push(CellRow { x, y, a, b, probability: t.prob(x, y, a, b) });
                }
            }
        }
    }
    rows
}

fn run(cli: &Cli) -> CliResult<bool> {
    let g = &cli.global;
    let out = Output { global: g };
    let seed = || -> CliResult<u64> { Ok(load_config(g)?.seed) };
    match &cli.command {
        Command::ChshScan { points } => {
            let rows = theta_grid(*points, true)?
                .into_iter()
                .map(|theta| {
                    Ok(ChshRow {
                        theta,
                        chsh: optimize_chsh(theta)?.result.value,
                        analytic: analytic_max_chsh(theta),
                        entanglement_bits: entanglement_entropy(&State::theta(theta)?),
                    })
                })
                .collect::<nonlocality::Result<Vec<_>>>()?;
            out.rows(&rows)?;
        }
        Command::DetectionScan { points } => {
            let seed = seed()?;
            let rows = theta_grid(*points, false)?
                .into_iter()
                .enumerate()
                .map(|(i, theta)| {
                    let opt = optimize_critical_efficiency(theta, seed.wrapping_add(i as u64 + 1))?;
                    Ok(DetectionRow {
                        theta,
                        eta_c: opt.eta_c,
                        eta_c_chsh_optimal: chsh_optimal_critical_efficiency(theta)?,
                        chsh: opt.chsh,
                        below_local_model_threshold: in_anomaly_regime(opt.eta_c),
                    })
                })
                .collect::<nonlocality::Result<Vec<_>>>()?;
            out.rows(&rows)?;
        }
        Command::CglmpOpt { gamma, global, grid } => {
            let search = PhaseSearch {
                grid_points: *grid,
                ..PhaseSearch::default()
            };
            let opt = if *global {
                optimize_cglmp_state_and_settings::<f64>(&search)?
            } else {
                optimize_cglmp_gamma(gamma.unwrap_or(1.0), &search)?
            };
            match g.format {
                Format::Json => out.json(&opt)?,
                Format::Csv => out.csv(&[CglmpRow {
                    value: opt.value,
                    gamma: opt.gamma,
                    entropy_bits: opt.entropy_bits,
                    alpha1: opt.phases[0],
                    alpha2: opt.phases[1],
                    beta1: opt.phases[2],
                    beta2: opt.phases[3],
                }])?,
            }
        }
        Command::KlOpt { gamma, global } => {
            let search = load_config(g)?.grids.kl;
            let opt = if *global {
                optimize_kl_global::<f64>(&search)?
            } else {
                optimize_kl(gamma.unwrap_or(1.0), &search)?
            };
            match g.format {
                Format::Json => out.json(&KlRow {
                    distance_bits: opt.distance_bits,
                    gamma: opt.gamma,
                    phases: opt.phases,
                    solver_gap: opt.solver_gap,
                    iterations: opt.iterations,
                })?,
                Format::Csv => out.csv(&[KlCsvRow {
                    distance_bits: opt.distance_bits,
                    gamma: opt.gamma,
                    alpha1: opt.phases[0],
                    alpha2: opt.phases[1],
                    beta1: opt.phases[2],
                    beta2: opt.phases[3],
                    solver_gap: opt.solver_gap,
                    iterations: opt.iterations,
                }])?,
            }
        }
        Command::Hardy { theta, scan, .. } => {
            if let Some(n) = scan {
                let rows = hardy_scan(&theta_grid(*n, true)?)?;
                out.rows(&rows)?;
            } else if let Some(t) = theta {
                let fixed = hardy_certificate(&State::theta(*t)?)?;
                let optimized = optimize_hardy(*t)?;
                #[derive(Serialize)]
                struct ThetaOut {
                    theta: f64,
                    certificate: nonlocality::hardy::HardyCertificate<f64>,
                    optimized: nonlocality::hardy::HardyOptimum<f64>,
                }
                let o = ThetaOut {
                    theta: *t,
                    certificate: fixed,
                    optimized,
                };
                match g.format {
                    Format::Json => out.json(&o)?,
                    Format::Csv => out.csv(&[fixed])?,
                }
            } else {
                let cert = hardy_certificate(&State::hardy())?;
                match g.format {
                    Format::Json => out.json(&cert)?,
                    Format::Csv => out.csv(&[cert])?,
                }
            }
        }
        Command::Prbox { sample } => {
            let o = match sample {
                Some(n) => {
                    let log = sample_pr_box(seed()?, *n)?;
                    let table = log.empirical::<f64>()?;
                    if g.format == Format::Csv {
                        return out.csv(&cells(&table)).map(|_| true);
                    }
                    PrBoxOut {
                        chsh: chsh_of_behavior(&table)?,
                        seed: Some(log.seed),
                        table: None,
                        empirical_table: Some(table.to_nested()),
                        n: Some(log.n),
                        rng: Some(log.rng),
                    }
                }
                None => {
                    let table = pr_box_behavior::<f64>();
                    if g.format == Format::Csv {
                        return out.csv(&cells(&table)).map(|_| true);
                    }
                    PrBoxOut {
                        chsh: chsh_of_behavior(&table)?,
                        seed: None,
                        table: Some(table.to_nested()),
                        empirical_table: None,
                        n: None,
                        rng: None,
                    }
                }
            };
            out.json(&o)?;
        }
        Command::Polytope {
            command: PolytopeCommand::Vertices { shape },
        } => {
            let poly = enumerate_vertices::<f64>(*shape)?;
            match g.format {
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    let mut header = vec!["vertex".to_string(), "strategy_a".into(), "strategy_b".into()];
                    for c in cells(&poly.vertices()[0]) {
                        header.push(format!("p_{}{}{}{}", c.x, c.y, c.a, c.b));
                    }
                    w.write_record(&header)?;
                    for (i, (v, s)) in poly.vertices().iter().zip(poly.strategies()).enumerate() {
                        let join = |o: &[usize]| o.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(" ");
                        let mut rec = vec![i.to_string(), join(&s.a), join(&s.b)];
                        rec.extend(v.probs().iter().map(|p| p.to_string()));
                        w.write_record(&rec)?;
                    }
                    out.write_bytes(&w.into_inner()?)?;
                }
                Format::Json => {
                    #[derive(Serialize)]
                    struct Vertex<'a> {
                        strategy: &'a nonlocality::polytope::Strategy,
                        probs: Vec<Vec<Vec<Vec<f64>>>>,
                    }
                    let vs: Vec<_> = poly
                        .vertices()
                        .iter()
                        .zip(poly.strategies())
                        .map(|(v, s)| Vertex {
                            strategy: s,
                            probs: v.to_nested(),
                        })
                        .collect();
                    out.json(&vs)?;
                }
            }
        }
        Command::ReproduceAll => {
            let config = load_config(g)?;
            let report = reproduce_all(&config)?;
            eprint!("{}", report.render_table());
            match g.format {
                Format::Json => out.json(&report)?,
                Format::Csv => out.csv(&report.entries)?,
            }
            return Ok(report.all_pass);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
