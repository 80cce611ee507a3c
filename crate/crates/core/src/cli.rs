//! The `jbtest` command-line front end.
//!
//! Results go to standard output and are deterministic for given flags.
//! The resolved configuration and timings go to standard error, every line
//! prefixed with `#`. Exit status: 0 success, 1 usage, 2 data, 3 numeric.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::dist::{jb_test, pjb, qjb, SampleSize};
use crate::error::{Error, Result};
use crate::moments::{Sample, StatisticKind};
use crate::rng::GeneratorKind;
use crate::simulate::{
    default_p_grid, moment_diagnostics_with, MomentDiagnostics, Progress, SimConfig, Simulator,
    DEFAULT_CHUNK_SIZE, DEFAULT_N_GRID, DEFAULT_REPLICATIONS,
};
use crate::surface::{fit_surface, plot_data, save_fits_to_path, FitOptions, DEFAULT_ORDER};
use crate::table::{load_table_from_path, save_table_to_path};

pub const QUICK_N_GRID: [usize; 5] = [10, 20, 50, 100, 500];
pub const QUICK_REPLICATIONS: u64 = 100_000;

/// p-values below this print as `< 2.2e-16`.
pub const TINY_P: f64 = 2.2e-16;

#[derive(Debug, Parser)]
#[command(
    name = "jbtest",
    version,
    about = "Finite-sample Jarque-Bera LM/ALM normality tests"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate null quantile tables of LM and ALM.
    Simulate(SimulateArgs),
    /// Fit power series in 1/N to table rows.
    Fit(FitArgs),
    /// Distribution function P(S <= q).
    Pvalue(PvalueArgs),
    /// Quantile function.
    Quantile(QuantileArgs),
    /// Test a data file for normality.
    Test(TestArgs),
    /// Compare simulated skewness/kurtosis moments with their exact values.
    Diagnose(DiagnoseArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Preset {
    /// The full default grids.
    Paper,
    /// Five sample sizes and 1e5 replications.
    Quick,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Lm,
    Alm,
    Both,
}

impl KindArg {
    fn kinds(self) -> Vec<StatisticKind> {
        match self {
            KindArg::Lm => vec![StatisticKind::Lm],
            KindArg::Alm => vec![StatisticKind::Alm],
            KindArg::Both => StatisticKind::ALL.to_vec(),
        }
    }
}

fn parse_count(s: &str) -> std::result::Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    match s.parse::<f64>() {
        Ok(v) if v >= 1.0 && v.fract() == 0.0 && v <= u64::MAX as f64 => Ok(v as u64),
        _ => Err(format!("`{s}` is not a positive whole number")),
    }
}

fn parse_kind(s: &str) -> std::result::Result<StatisticKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_generator(s: &str) -> std::result::Result<GeneratorKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_sample_size(s: &str) -> std::result::Result<SampleSize, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, value_enum, default_value = "paper")]
    preset: Preset,
    /// Sample sizes, overriding the preset.
    #[arg(long = "n", value_delimiter = ',', num_args = 1..)]
    n_grid: Vec<usize>,
    /// Probabilities, overriding the preset.
    #[arg(long = "p", value_delimiter = ',', num_args = 1..)]
    p_grid: Vec<f64>,
    /// Replications per sample size; accepts forms such as 1e6.
    #[arg(long, value_parser = parse_count)]
    replications: Option<u64>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value = "counter", value_parser = parse_generator)]
    generator: GeneratorKind,
    /// Worker threads; 0 uses one per CPU. Never changes the result.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long, default_value_t = DEFAULT_CHUNK_SIZE, value_parser = parse_count)]
    chunk_size: u64,
    /// Report progress on standard error.
    #[arg(long)]
    progress: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long)]
    table: PathBuf,
    #[arg(long = "p", value_delimiter = ',', num_args = 1.., default_values_t = [0.90, 0.95, 0.99])]
    p: Vec<f64>,
    /// Order K of the series.
    #[arg(long, short = 'K', default_value_t = DEFAULT_ORDER)]
    order: usize,
    #[arg(long, value_enum, default_value = "both")]
    kind: KindArg,
    /// Leave out tabulated sample sizes below this.
    #[arg(long)]
    min_n: Option<usize>,
    /// Weight points by the inverse variance of their quantile.
    #[arg(long)]
    weighted: bool,
    #[arg(long)]
    out: PathBuf,
    /// Directory for the per-p plot-data files; defaults to the directory
    /// of --out.
    #[arg(long)]
    plot_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PvalueArgs {
    #[arg(long = "q", value_delimiter = ',', num_args = 1.., required = true, allow_negative_numbers = true)]
    q: Vec<f64>,
    #[arg(long = "n", default_value = "inf", value_parser = parse_sample_size)]
    n: SampleSize,
    #[arg(long, default_value = "LM", value_parser = parse_kind)]
    kind: StatisticKind,
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct QuantileArgs {
    #[arg(long = "p", value_delimiter = ',', num_args = 1.., required = true, allow_negative_numbers = true)]
    p: Vec<f64>,
    #[arg(long = "n", default_value = "inf", value_parser = parse_sample_size)]
    n: SampleSize,
    #[arg(long, default_value = "LM", value_parser = parse_kind)]
    kind: StatisticKind,
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TestArgs {
    /// One observation per line.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "both")]
    kind: KindArg,
}

#[derive(Debug, Args)]
struct DiagnoseArgs {
    #[arg(long = "n", value_delimiter = ',', num_args = 1.., default_values_t = [10usize])]
    n: Vec<usize>,
    #[arg(long, value_parser = parse_count, default_value = "1000000")]
    replications: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value = "counter", value_parser = parse_generator)]
    generator: GeneratorKind,
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a, out, err),
        Command::Fit(a) => fit(a, out, err),
        Command::Pvalue(a) => pvalue(a, out, err),
        Command::Quantile(a) => quantile(a, out, err),
        Command::Test(a) => test(a, out, err),
        Command::Diagnose(a) => diagnose(a, out, err),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn write_diagnostics(out: &mut dyn Write, diags: &[MomentDiagnostics]) -> Result<()> {
    writeln!(
        out,
        "{:>7} {:>10} {:>10} {:>7} {:>10} {:>10} {:>7} {:>12} {:>10} {:>7}",
        "N", "mean(b2)", "c2", "z", "var(b2)", "c3", "z", "var(sqrt b1)", "c1", "z"
    )?;
    for d in diags {
        writeln!(
            out,
            "{:>7} {:>10.6} {:>10.6} {:>7.2} {:>10.6} {:>10.6} {:>7.2} {:>12.6} {:>10.6} {:>7.2}",
            d.n,
            d.mean_b2,
            d.expected.c2,
            d.z_mean_b2,
            d.var_b2,
            d.expected.c3,
            d.z_var_b2,
            d.var_sqrt_b1,
            d.expected.c1,
            d.z_var_sqrt_b1
        )?;
    }
    Ok(())
}

fn simulate(a: SimulateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let (preset_n, preset_r): (Vec<usize>, u64) = match a.preset {
        Preset::Paper => (DEFAULT_N_GRID.to_vec(), DEFAULT_REPLICATIONS),
        Preset::Quick => (QUICK_N_GRID.to_vec(), QUICK_REPLICATIONS),
    };
    let n_grid = if a.n_grid.is_empty() {
        preset_n
    } else {
        a.n_grid
    };
    let p_grid = if a.p_grid.is_empty() {
        default_p_grid()
    } else {
        a.p_grid
    };
    let cfg = SimConfig::new(n_grid, p_grid, a.replications.unwrap_or(preset_r), a.seed)
        .with_generator(a.generator)
        .with_chunk_size(a.chunk_size);
    cfg.validate()?;

    writeln!(
        out,
        "config: generator={} seed={} replications={} chunk_size={}",
        cfg.generator, cfg.seed, cfg.replications, cfg.chunk_size
    )?;
    writeln!(out, "config: n_grid={}", join(&cfg.n_grid))?;
    writeln!(
        out,
        "config: p_grid={} points in [{}, {}]",
        cfg.p_grid.len(),
        cfg.p_grid[0],
        cfg.p_grid[cfg.p_grid.len() - 1]
    )?;
    writeln!(err, "# workers={}", a.workers)?;

    let started = Instant::now();
    let reported = AtomicU64::new(0);
    let hook = |p: Progress| {
        let tenth = p.completed * 10 / p.total.max(1);
        if reported.fetch_max(tenth, Ordering::Relaxed) < tenth {
            eprintln!("# progress: {}/{} replications", p.completed, p.total);
        }
    };
    let mut sim = Simulator::new(&cfg).workers(a.workers);
    if a.progress {
        sim = sim.progress(&hook);
    }
    let result = sim.run()?;
    write_diagnostics(out, &result.diagnostics)?;
    save_table_to_path(&result.table, &a.out)?;
    writeln!(out, "wrote {}", a.out.display())?;
    writeln!(err, "# elapsed {:.3} s", started.elapsed().as_secs_f64())?;
    Ok(())
}

fn plot_file_name(kind: StatisticKind, p: f64) -> String {
    format!("plot_{kind}_p{p}.csv")
}

fn fit(a: FitArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let table = load_table_from_path(&a.table)?;
    let plot_dir = match a.plot_dir {
        Some(d) => d,
        None => a
            .out
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from(".")),
    };
    writeln!(
        err,
        "# config: table={} order={} kinds={} p={} min_n={:?} weighted={}",
        a.table.display(),
        a.order,
        join(&a.kind.kinds()),
        join(&a.p),
        a.min_n,
        a.weighted
    )?;
    let options = FitOptions {
        min_n: a.min_n,
        weighted: a.weighted,
    };
    let mut fits = Vec::new();
    writeln!(
        out,
        "{:>4} {:>8} {:>3} {:>12} {:>12}",
        "kind", "p", "K", "rms", "max"
    )?;
    for kind in a.kind.kinds() {
        for &p in &a.p {
            let f = fit_surface(&table, kind, p, a.order, options)?;
            writeln!(
                out,
                "{:>4} {:>8} {:>3} {:>12.4e} {:>12.4e}",
                kind.name(),
                p,
                f.order(),
                f.diagnostics.rms_residual,
                f.diagnostics.max_residual
            )?;
            let plot_path = plot_dir.join(plot_file_name(kind, p));
            fs::write(&plot_path, plot_data(&f, &table)?)?;
            fits.push(f);
        }
    }
    save_fits_to_path(&fits, &a.out)?;
    writeln!(out, "wrote {}", a.out.display())?;
    Ok(())
}

fn load_optional(path: &Option<PathBuf>) -> Result<Option<crate::simulate::QuantileTable>> {
    path.as_ref().map(load_table_from_path).transpose()
}

fn pvalue(a: PvalueArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    writeln!(
        err,
        "# config: n={} kind={} table={:?}",
        a.n, a.kind, a.table
    )?;
    let table = load_optional(&a.table)?;
    for &q in &a.q {
        match pjb(q, a.n, a.kind, table.as_ref())?.value {
            Some(p) => writeln!(out, "{p}")?,
            None => writeln!(out, "NA")?,
        }
    }
    Ok(())
}

fn quantile(a: QuantileArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    writeln!(
        err,
        "# config: n={} kind={} table={:?}",
        a.n, a.kind, a.table
    )?;
    let table = load_optional(&a.table)?;
    for &p in &a.p {
        writeln!(out, "{}", qjb(p, a.n, a.kind, table.as_ref())?)?;
    }
    Ok(())
}

pub(crate) fn read_observations(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let v = t.parse::<f64>().map_err(|_| Error::Parse {
            line: i + 1,
            msg: format!("bad observation `{t}`"),
        })?;
        values.push(v);
    }
    Ok(values)
}

/// Probabilities at 4 decimals, small ones in scientific notation and
/// anything below 2.2e-16 as `< 2.2e-16`.
pub fn format_p_value(p: f64) -> String {
    if p < TINY_P {
        "< 2.2e-16".to_string()
    } else if p < 1e-4 {
        format!("= {p:.3e}")
    } else {
        format!("= {p:.4}")
    }
}

fn test(a: TestArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    writeln!(
        err,
        "# config: data={} table={:?} kinds={}",
        a.data.display(),
        a.table,
        join(&a.kind.kinds())
    )?;
    let sample = Sample::new(read_observations(&a.data)?)?;
    let table = load_optional(&a.table)?;
    let r = jb_test(&sample, table.as_ref())?;
    let kinds = a.kind.kinds();

    writeln!(out, "Jarque-Bera Test")?;
    writeln!(out)?;
    writeln!(out, "data:  {}", a.data.display())?;
    writeln!(out, "N = {}", r.n)?;
    writeln!(out, "LM = {:.4}, ALM = {:.4},", r.lm, r.alm)?;
    let finite: Vec<String> = kinds
        .iter()
        .map(|&k| match r.p_value(k).value {
            Some(p) => format!("{k} p-value {}", format_p_value(p)),
            None => format!("{k} p-value = NA"),
        })
        .collect();
    writeln!(out, "{},", finite.join(", "))?;
    writeln!(out, "p-value {}", format_p_value(r.p_asymptotic))?;
    Ok(())
}

fn diagnose(a: DiagnoseArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    writeln!(
        err,
        "# config: n={} replications={} seed={} generator={} workers={}",
        join(&a.n),
        a.replications,
        a.seed,
        a.generator,
        a.workers
    )?;
    writeln!(
        out,
        "config: generator={} seed={} replications={}",
        a.generator, a.seed, a.replications
    )?;
    let started = Instant::now();
    let diags =
        a.n.iter()
            .map(|&n| moment_diagnostics_with(n, a.replications, a.seed, a.generator, a.workers))
            .collect::<Result<Vec<_>>>()?;
    write_diagnostics(out, &diags)?;
    writeln!(err, "# elapsed {:.3} s", started.elapsed().as_secs_f64())?;
    Ok(())
}
