//! `fracdim`: attractor samples, dimension estimates and sweeps from the
//! command line.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use fracdim::covering::{premeasure_upper_bound, write_premeasure_csv};
use fracdim::dimension::{
    boxdim_graph, correlation_integral, default_fit_range, fit_dimension, graph_cloud, lower_bound_dimension,
    tally_boxes, GraphFitPolicy,
};
use fracdim::functions::{
    besov_synthesize, make_besov_coefficients, CoefficientMode, WeierstrassParams, DEFAULT_RHO, DEFAULT_TRUNCATION,
};
use fracdim::geometry::{generate_attractor, IfsSpec};
use fracdim::harness::{
    csv_string, detect_transition, run_sweep, summarize, summary_csv_string, svg_string, ExperimentConfig, SetInput,
};
use fracdim::{FracError, FracResult};

#[derive(Parser, Debug)]
#[command(name = "fracdim", version, about = "Graph dimensions of rough functions on self-similar sets")]
struct Cli {
    /// Master seed; for `sweep` and `transition` it replaces the config's seed list.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Writes the level-L attractor sample as CSV.
    GenSet(SetArgs),
    /// Box-counting tally and slope of a set.
    Boxdim {
        #[command(flatten)]
        set: SetArgs,
        /// Fit range `LO:HI`; derived from the sample resolution when absent.
        #[arg(long, value_parser = parse_range)]
        range: Option<(u32, u32)>,
    },
    /// Correlation-integral curves and the stable exponent of a set.
    Corrdim {
        #[command(flatten)]
        set: SetArgs,
        /// Sampled pairs per curve.
        #[arg(long, default_value_t = 100_000)]
        pairs: usize,
        /// Spacing of the exponent grid.
        #[arg(long, default_value_t = 0.05)]
        t_step: f64,
    },
    /// Box dimension of the graph of a test function over a set.
    Graphdim {
        #[command(flatten)]
        set: SetArgs,
        #[command(flatten)]
        function: FunctionArgs,
    },
    /// Pre-measure upper bounds of a synthesized series for a range of j1.
    Premeasure {
        #[command(flatten)]
        set: SetArgs,
        /// Smoothness of the series.
        #[arg(long)]
        s: f64,
        /// Exponent; defaults to `d + 1 − s + 0.1`.
        #[arg(long)]
        t: Option<f64>,
        #[arg(long, default_value_t = 3)]
        j1_min: u32,
        #[arg(long, default_value_t = 8)]
        j1_max: u32,
        /// Levels synthesized; the tail starts at `min(j1 + 12, levels)`.
        #[arg(long, default_value_t = 20)]
        levels: u32,
    },
    /// Runs the config's sweep and writes the row CSV.
    ///
    /// With `--out`, a summary CSV and an SVG plot are written next to it.
    Sweep,
    /// Runs the config's sweep and reports the breakpoint for each set.
    Transition,
}

#[derive(clap::Args, Debug)]
struct SetArgs {
    /// Preset name (`interval`, `square`, `cantor`, `carpet`, `two-ended-<q>`)
    /// or an inline JSON object `{"n":..,"r":..,"translations":[..]}`.
    #[arg(long, default_value = "cantor")]
    set: String,
    /// Generation level.
    #[arg(long, default_value_t = 12)]
    level: u32,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Kind {
    Weierstrass,
    BesovSynth,
}

#[derive(clap::Args, Debug)]
struct FunctionArgs {
    #[arg(long, value_enum, default_value_t = Kind::Weierstrass)]
    function: Kind,
    /// Smoothness exponent in (0, 1].
    #[arg(long, default_value_t = 0.5)]
    s: f64,
    #[arg(long, default_value_t = DEFAULT_RHO)]
    rho: f64,
    #[arg(long, default_value_t = DEFAULT_TRUNCATION)]
    truncation: usize,
    /// Levels synthesized for `besov-synth`.
    #[arg(long, default_value_t = 12)]
    besov_levels: u32,
}

fn parse_range(text: &str) -> Result<(u32, u32), String> {
    let (lo, hi) = text.split_once(':').ok_or("expected LO:HI")?;
    let lo = lo.trim().parse().map_err(|e| format!("{e}"))?;
    let hi = hi.trim().parse().map_err(|e| format!("{e}"))?;
    Ok((lo, hi))
}

fn parse_set(text: &str) -> FracResult<IfsSpec> {
    let input = if text.trim_start().starts_with('{') {
        serde_json::from_str(text).map_err(|e| FracError::Config(e.to_string()))?
    } else {
        SetInput::Named(text.to_string())
    };
    input.build()
}

fn io_err(path: &Path, e: io::Error) -> FracError {
    FracError::Io { path: path.display().to_string(), message: e.to_string() }
}

/// Runs `body` against the `--out` file or standard output.
fn with_output<F>(out: &Option<PathBuf>, body: F) -> FracResult<()>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| io_err(path, e))?;
            let mut w = BufWriter::new(file);
            body(&mut w).and_then(|_| w.flush()).map_err(|e| io_err(path, e))
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            match body(&mut w) {
                Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
                other => other.map_err(|e| io_err(Path::new("<stdout>"), e)),
            }
        }
    }
}

fn write_file(path: &Path, text: &str) -> FracResult<()> {
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

fn load_config(cli: &Cli) -> FracResult<ExperimentConfig> {
    let path = cli.config.as_ref().ok_or_else(|| FracError::Config("--config is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut config = ExperimentConfig::from_json(&text)?;
    if let Some(seed) = cli.seed {
        config.seeds = vec![seed];
    }
    Ok(config)
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

/// Returns whether every row or estimate succeeded.
fn run(cli: &Cli) -> FracResult<bool> {
    let seed = cli.seed.unwrap_or(0);
    match &cli.command {
        Command::GenSet(args) => {
            let mu = generate_attractor(&parse_set(&args.set)?, args.level)?;
            with_output(&cli.out, |w| mu.write_csv(w))?;
            Ok(true)
        }
        Command::Boxdim { set, range } => {
            let mu = generate_attractor(&parse_set(&set.set)?, set.level)?;
            let tally = tally_boxes(mu.coords(), mu.dim(), 0, 20)?;
            let range = match range {
                Some(r) => *r,
                None => default_fit_range(&tally, mu.resolution())?,
            };
            let fit = fit_dimension(&tally, range)?;
            with_output(&cli.out, |w| tally.write_csv(w))?;
            eprintln!(
                "slope {:.6} over j in [{}, {}], residual {:.3e}",
                fit.slope, fit.j_range.0, fit.j_range.1, fit.residual_rms
            );
            Ok(true)
        }
        Command::Corrdim { set, pairs, t_step } => {
            let spec = parse_set(&set.set)?;
            if !(*t_step > 0.0) {
                return Err(FracError::InvalidParameter("t-step must be positive".into()));
            }
            let top = spec.ambient_dim() as f64;
            let t_values: Vec<f64> = (1..).map(|k| k as f64 * t_step).take_while(|t| *t <= top + 1e-9).collect();
            let levels = [set.level.saturating_sub(4).max(1), set.level.saturating_sub(2).max(1), set.level];
            let mut curves = Vec::new();
            for l in levels {
                let mu = generate_attractor(&spec, l)?;
                curves.push(correlation_integral(&mu, &t_values, *pairs, seed)?);
            }
            let t_star = lower_bound_dimension(&curves)?;
            with_output(&cli.out, |w| {
                writeln!(w, "level,t,sum,pair_count")?;
                for c in &curves {
                    for (t, s) in c.t_values.iter().zip(&c.sums) {
                        writeln!(w, "{},{t},{s:.12e},{}", c.level, c.pair_count)?;
                    }
                }
                Ok(())
            })?;
            eprintln!("t* {t_star:.3} (levels {levels:?})");
            Ok(true)
        }
        Command::Graphdim { set, function } => {
            let spec = parse_set(&set.set)?;
            let mu = generate_attractor(&spec, set.level)?;
            let cloud = match function.function {
                Kind::Weierstrass => {
                    let w = WeierstrassParams::random(
                        spec.ambient_dim(),
                        function.s,
                        function.rho,
                        function.truncation,
                        seed,
                    )?;
                    graph_cloud(&mu, |x| w.value(x))?
                }
                Kind::BesovSynth => {
                    let series = make_besov_coefficients(
                        &spec,
                        function.s,
                        function.besov_levels,
                        CoefficientMode::SignedRandom,
                        seed,
                    )?;
                    graph_cloud(&mu, |x| besov_synthesize(&series, x))?
                }
            };
            let fit = boxdim_graph(&cloud, &GraphFitPolicy::default())?;
            with_output(&cli.out, |w| {
                writeln!(w, "j,count,unresolved")?;
                for c in &fit.counts {
                    writeln!(w, "{},{},{}", c.j, c.count, c.unresolved)?;
                }
                Ok(())
            })?;
            let e = &fit.estimate;
            eprintln!(
                "graph slope {:.6} over j in [{}, {}], residual {:.3e}, d = {:.6}",
                e.slope,
                e.j_range.0,
                e.j_range.1,
                e.residual_rms,
                spec.dimension()
            );
            Ok(true)
        }
        Command::Premeasure { set, s, t, j1_min, j1_max, levels } => {
            let spec = parse_set(&set.set)?;
            let d = spec.dimension();
            let t = t.unwrap_or(d + 1.0 - s + 0.1);
            let series = make_besov_coefficients(&spec, *s, *levels, CoefficientMode::SignedRandom, seed)?;
            let mu = generate_attractor(&spec, set.level)?;
            let bounds = (*j1_min..=*j1_max)
                .map(|j1| premeasure_upper_bound(&series, &mu, t, j1, (j1 + 12).min(*levels)))
                .collect::<FracResult<Vec<_>>>()?;
            with_output(&cli.out, |w| write_premeasure_csv(&bounds, w))?;
            Ok(true)
        }
        Command::Sweep => {
            let config = load_config(cli)?;
            let rows = run_sweep(&config);
            let csv = csv_string(&rows);
            match &cli.out {
                Some(path) => {
                    write_file(path, &csv)?;
                    write_file(&sibling(path, ".summary.csv"), &summary_csv_string(&summarize(&rows)))?;
                    write_file(&sibling(path, ".svg"), &svg_string(&rows))?;
                }
                None => print!("{csv}"),
            }
            for r in rows.iter().filter(|r| !r.is_ok()) {
                eprintln!("row d={} s={} seed={} failed: {}", r.d, r.s, r.seed, r.error.as_deref().unwrap_or(""));
            }
            Ok(rows.iter().all(|r| r.is_ok()))
        }
        Command::Transition => {
            let config = load_config(cli)?;
            let rows = run_sweep(&config);
            let mut ds: Vec<f64> = rows.iter().filter(|r| r.is_ok()).map(|r| r.d).collect();
            ds.sort_by(f64::total_cmp);
            ds.dedup();
            let mut report = vec!["d,s_star".to_string()];
            let mut all_ok = rows.iter().all(|r| r.is_ok());
            for d in ds {
                let group: Vec<_> = rows.iter().filter(|r| r.d == d).cloned().collect();
                match detect_transition(&group) {
                    Ok(s_star) => report.push(format!("{d},{s_star}")),
                    Err(e) => {
                        eprintln!("d={d}: {e}");
                        report.push(format!("{d},"));
                        all_ok = false;
                    }
                }
            }
            with_output(&cli.out, |w| writeln!(w, "{}", report.join("\n")))?;
            Ok(all_ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
