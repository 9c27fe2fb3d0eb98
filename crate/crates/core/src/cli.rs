//! Command implementations behind the `spinor-qcrb` binary.
//!
//! Every subcommand accepts `--config <file.toml>`. Keys in the file are flag
//! names without the leading dashes, either at top level or in a table named
//! after the subcommand; the table wins over top level and flags on the
//! command line win over both.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::error::Error;
use crate::fock3::{optimal_prepared_state, ControlGrid, PreparationMethod, PreparedState};
use crate::optimize::{
    individual_resource_bounds, optimize_sum_variance_with, scan_theta, Ensemble, OptimizerSettings, ScalingRow,
    ScalingTable, StateFamily,
};
use crate::qfim::{ghz_qfim, product_qfim, qcrb_simultaneous, PrecisionBound};
use crate::random::DEFAULT_SEED;
use crate::readout::{fft_estimate, signal_sweep, SignalSeries, SpectrumOptions, TimeGrid};
use crate::spin::{uniform_state, SpinConfig};

#[derive(Debug, Parser)]
#[command(
    name = "spinor-qcrb",
    version,
    about = "Joint (p, q) Zeeman precision bounds and interferometer simulation"
)]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bounds for the uniform, spin-coherent and optimal input states.
    Bounds(BoundsArgs),
    /// Bounds against atom number with log-log slope fits.
    Scaling(ScalingArgs),
    /// Optimal pair-basis state from spin mixing or ground-state preparation.
    Prepare(PrepareArgs),
    /// Simulate the interferometer and recover (p, q) from the spectra.
    Estimate(EstimateArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Bounds(_) => "bounds",
            Command::Scaling(_) => "scaling",
            Command::Prepare(_) => "prepare",
            Command::Estimate(_) => "estimate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// TOML file with default flag values.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundsFamily {
    Uniform,
    Binomial,
    Optimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EnsembleArg {
    Product,
    Ghz,
}

impl From<EnsembleArg> for Ensemble {
    fn from(e: EnsembleArg) -> Self {
        match e {
            EnsembleArg::Product => Ensemble::Product,
            EnsembleArg::Ghz => Ensemble::Ghz,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SearchArg {
    General,
    ThreeAmplitude,
}

impl From<SearchArg> for StateFamily {
    fn from(s: SearchArg) -> Self {
        match s {
            SearchArg::General => StateFamily::General,
            SearchArg::ThreeAmplitude => StateFamily::ThreeAmplitude,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    #[arg(long, value_enum, default_value = "optimal")]
    pub family: BoundsFamily,
    /// Spin values: `3`, `1,2,5` or `1..5`.
    #[arg(long = "F", default_value = "1")]
    pub spin: String,
    #[arg(long = "N", default_value_t = 1)]
    pub atoms: u32,
    #[arg(long, value_enum, default_value = "product")]
    pub ensemble: EnsembleArg,
    /// Search space for `--family optimal`.
    #[arg(long, value_enum, default_value = "general")]
    pub search: SearchArg,
    /// For `--family binomial`: emit the theta scan with this many samples.
    #[arg(long)]
    pub theta_samples: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub duration: f64,
    #[arg(long, default_value_t = 1)]
    pub trials: u32,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScalingMode {
    Product,
    Ghz,
    Simultaneous,
    Individual,
    Smd,
    Qpt,
}

impl ScalingMode {
    fn name(self) -> &'static str {
        match self {
            ScalingMode::Product => "product",
            ScalingMode::Ghz => "ghz",
            ScalingMode::Simultaneous => "simultaneous",
            ScalingMode::Individual => "individual",
            ScalingMode::Smd => "smd",
            ScalingMode::Qpt => "qpt",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ScalingArgs {
    #[arg(long, value_enum)]
    pub mode: ScalingMode,
    /// Atom numbers: `8,16,32` or `start..end[:step]` (inclusive).
    #[arg(long = "N")]
    pub atoms: String,
    #[arg(long = "F", default_value_t = 1)]
    pub spin: u32,
    /// Search space for the product, ghz and simultaneous modes.
    #[arg(long, value_enum, default_value = "three-amplitude")]
    pub search: SearchArg,
    /// Also write the slope summary as JSON to this path.
    #[arg(long)]
    pub summary_out: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Smd,
    Qpt,
}

impl From<MethodArg> for PreparationMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Smd => PreparationMethod::Smd,
            MethodArg::Qpt => PreparationMethod::Qpt,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Lower end of the control grid (t for smd, epsilon/|c2| for qpt).
    #[arg(long)]
    pub grid_lo: Option<f64>,
    #[arg(long)]
    pub grid_hi: Option<f64>,
    #[arg(long)]
    pub grid_points: Option<usize>,
}

impl GridArgs {
    fn resolve(&self, method: PreparationMethod) -> ControlGrid {
        let d = method.default_grid();
        ControlGrid {
            lo: self.grid_lo.unwrap_or(d.lo),
            hi: self.grid_hi.unwrap_or(d.hi),
            points: self.grid_points.unwrap_or(d.points),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct PrepareArgs {
    #[arg(long, value_enum)]
    pub method: MethodArg,
    #[arg(long = "N")]
    pub atoms: usize,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    #[arg(long = "N", default_value_t = 20)]
    pub atoms: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub p: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub q: f64,
    #[arg(long, value_enum, default_value = "smd")]
    pub method: MethodArg,
    /// Bound on |p| used to size the time grid; defaults to |p|.
    #[arg(long)]
    pub p_guess: Option<f64>,
    #[arg(long, default_value_t = crate::readout::DEFAULT_SAMPLES)]
    pub samples: usize,
    /// Time step; defaults to the largest step passing the sampling guard.
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub hann: bool,
    /// Write both time series as CSV to this path.
    #[arg(long)]
    pub series_out: Option<PathBuf>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// Parses arguments after splicing in values from `--config`.
pub fn parse_with_config<I, T>(args: I) -> anyhow::Result<Cli>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let first = Cli::try_parse_from(&args).map_err(anyhow::Error::from)?;
    let config = match &first.command {
        Command::Bounds(a) => a.common.config.clone(),
        Command::Scaling(a) => a.common.config.clone(),
        Command::Prepare(a) => a.common.config.clone(),
        Command::Estimate(a) => a.common.config.clone(),
    };
    let Some(path) = config else {
        return Ok(first);
    };
    let injected = config_args(&path, first.command.name())?;
    let pos = args
        .iter()
        .position(|a| a == first.command.name())
        .ok_or_else(|| anyhow!("subcommand not found in arguments"))?;
    let mut merged = args[..=pos].to_vec();
    merged.extend(injected.into_iter().map(OsString::from));
    merged.extend_from_slice(&args[pos + 1..]);
    Cli::try_parse_from(merged).map_err(anyhow::Error::from)
}

fn config_args(path: &Path, command: &str) -> anyhow::Result<Vec<String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let table: toml::Table = text.parse().with_context(|| format!("parsing {}", path.display()))?;
    let mut out = Vec::new();
    let mut push = |key: &str, value: &toml::Value| -> anyhow::Result<()> {
        if key == "config" {
            bail!("config files cannot reference other config files");
        }
        let flag = format!("--{key}");
        match value {
            toml::Value::Boolean(true) => out.push(flag),
            toml::Value::Boolean(false) => {}
            toml::Value::String(s) => out.extend([flag, s.clone()]),
            toml::Value::Integer(i) => out.extend([flag, i.to_string()]),
            toml::Value::Float(f) => out.extend([flag, format!("{f:e}")]),
            toml::Value::Array(items) => {
                let parts: Vec<String> = items
                    .iter()
                    .map(|v| match v {
                        toml::Value::Integer(i) => Ok(i.to_string()),
                        toml::Value::Float(f) => Ok(f.to_string()),
                        toml::Value::String(s) => Ok(s.clone()),
                        _ => Err(anyhow!("unsupported array entry for `{key}`")),
                    })
                    .collect::<anyhow::Result<_>>()?;
                out.extend([flag, parts.join(",")]);
            }
            _ => bail!("unsupported value for `{key}` in config file"),
        }
        Ok(())
    };
    for (key, value) in &table {
        if !value.is_table() {
            push(key, value)?;
        }
    }
    if let Some(toml::Value::Table(section)) = table.get(command) {
        for (key, value) in section {
            push(key, value)?;
        }
    }
    Ok(out)
}

/// Parses `3`, `1,2,5` or `a..b[:step]` (inclusive) into a list.
pub fn parse_list(spec: &str) -> anyhow::Result<Vec<u32>> {
    let spec = spec.trim();
    if let Some((range, step)) = spec.split_once("..").map(|(a, rest)| {
        let (b, step) = rest.split_once(':').unwrap_or((rest, "1"));
        ((a, b), step)
    }) {
        let (a, b) = range;
        let (a, b, step): (u32, u32, u32) = (a.trim().parse()?, b.trim().parse()?, step.trim().parse()?);
        if step == 0 || b < a {
            bail!("invalid range `{spec}`");
        }
        return Ok((a..=b).step_by(step as usize).collect());
    }
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<u32>()
                .map_err(|e| anyhow!("invalid number `{s}`: {e}"))
        })
        .collect()
}

/// Round-trip-safe formatting: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn json_f64(x: f64) -> serde_json::Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(fmt_f64(x))
    }
}

fn open_out(path: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Bounds(a) => cmd_bounds(&a),
        Command::Scaling(a) => cmd_scaling(&a),
        Command::Prepare(a) => cmd_prepare(&a),
        Command::Estimate(a) => cmd_estimate(&a),
    }
}

#[derive(Debug, Clone, Serialize)]
struct BoundsRow {
    #[serde(rename = "F")]
    spin: u32,
    family: &'static str,
    ensemble: &'static str,
    #[serde(rename = "N")]
    atoms: u32,
    delta_p: f64,
    delta_q: f64,
    /// Populations of `m = -F..=F` for the optimal family.
    #[serde(skip_serializing_if = "Option::is_none")]
    populations: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
}

fn ensemble_name(e: Ensemble) -> &'static str {
    match e {
        Ensemble::Product => "product",
        Ensemble::Ghz => "ghz",
    }
}

pub fn cmd_bounds(a: &BoundsArgs) -> anyhow::Result<()> {
    let spins = parse_list(&a.spin)?;
    let ensemble: Ensemble = a.ensemble.into();
    let format = a.common.format.unwrap_or(Format::Csv);
    for &f in &spins {
        SpinConfig::new(f, a.atoms)?
            .with_duration(a.duration)?
            .with_trials(a.trials)?;
    }
    let mut out = open_out(&a.common.out)?;

    if let (BoundsFamily::Binomial, Some(samples)) = (a.family, a.theta_samples) {
        let mut rows = Vec::new();
        for &f in &spins {
            for r in scan_theta(f, a.atoms, samples)? {
                rows.push((f, r));
            }
        }
        match format {
            Format::Csv => {
                writeln!(out, "F,N,theta,delta_p,delta_q")?;
                for (f, r) in &rows {
                    writeln!(
                        out,
                        "{f},{},{},{},{}",
                        a.atoms,
                        fmt_f64(r.theta),
                        fmt_f64(r.delta_p),
                        fmt_f64(r.delta_q)
                    )?;
                }
            }
            Format::Json => {
                let v: Vec<_> = rows
                    .iter()
                    .map(|(f, r)| json!({"F": f, "N": a.atoms, "theta": r.theta, "delta_p": json_f64(r.delta_p), "delta_q": json_f64(r.delta_q)}))
                    .collect();
                serde_json::to_writer_pretty(&mut out, &v)?;
                writeln!(out)?;
            }
        }
        out.flush()?;
        return Ok(());
    }

    let mut rows = Vec::new();
    for &f in &spins {
        let config = SpinConfig::new(f, a.atoms)?
            .with_duration(a.duration)?
            .with_trials(a.trials)?;
        let row = match a.family {
            BoundsFamily::Uniform => {
                let s = uniform_state(f)?;
                let qfim = match ensemble {
                    Ensemble::Product => product_qfim(&s, &config),
                    Ensemble::Ghz => ghz_qfim(&s, &config),
                };
                let b = qcrb_simultaneous(&qfim, a.trials)?;
                BoundsRow {
                    spin: f,
                    family: "uniform",
                    ensemble: ensemble_name(ensemble),
                    atoms: a.atoms,
                    delta_p: b.delta_p,
                    delta_q: b.delta_q,
                    populations: None,
                    theta: None,
                }
            }
            BoundsFamily::Binomial | BoundsFamily::Optimal => {
                let family = if a.family == BoundsFamily::Binomial {
                    StateFamily::CoherentTheta
                } else {
                    a.search.into()
                };
                let settings = OptimizerSettings {
                    seed: a.common.seed,
                    ..Default::default()
                };
                let r = optimize_sum_variance_with(&config, ensemble, family, &settings)?;
                let theta = (family == StateFamily::CoherentTheta).then(|| {
                    // Recover theta from the |m = F> population cos^(4F)(theta/2).
                    let w = r.best_state.populations()[2 * f as usize];
                    2.0 * w.powf(1.0 / (4.0 * f64::from(f))).acos()
                });
                BoundsRow {
                    spin: f,
                    family: if a.family == BoundsFamily::Binomial {
                        "binomial"
                    } else {
                        "optimal"
                    },
                    ensemble: ensemble_name(ensemble),
                    atoms: a.atoms,
                    delta_p: r.bound.delta_p,
                    delta_q: r.bound.delta_q,
                    populations: (a.family == BoundsFamily::Optimal).then(|| r.best_state.populations()),
                    theta,
                }
            }
        };
        rows.push(row);
    }
    match format {
        Format::Csv => {
            writeln!(out, "F,family,ensemble,N,delta_p,delta_q")?;
            for r in &rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.spin,
                    r.family,
                    r.ensemble,
                    r.atoms,
                    fmt_f64(r.delta_p),
                    fmt_f64(r.delta_q)
                )?;
            }
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &rows)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Rows of the scaling table for one mode.
pub fn scaling_rows(
    mode: ScalingMode,
    spin: u32,
    atoms: &[u32],
    search: StateFamily,
) -> anyhow::Result<(ScalingTable, &'static str)> {
    use rayon::prelude::*;
    let (rows, family): (Vec<ScalingRow>, &'static str) = match mode {
        ScalingMode::Product | ScalingMode::Ghz | ScalingMode::Simultaneous => {
            let ensemble = if mode == ScalingMode::Product {
                Ensemble::Product
            } else {
                Ensemble::Ghz
            };
            let table = crate::optimize::scan_scaling(spin, atoms, ensemble, search)?;
            return Ok((table, search.name()));
        }
        ScalingMode::Individual => (
            atoms
                .iter()
                .map(|&n| {
                    let b = individual_resource_bounds(spin, n)?;
                    Ok(ScalingRow {
                        atoms: n,
                        delta_p: b.delta_p,
                        delta_q: b.delta_q,
                    })
                })
                .collect::<crate::Result<_>>()?,
            "ghz_half_resources",
        ),
        ScalingMode::Smd | ScalingMode::Qpt => {
            let method = if mode == ScalingMode::Smd {
                PreparationMethod::Smd
            } else {
                PreparationMethod::Qpt
            };
            let grid = method.default_grid();
            (
                atoms
                    .par_iter()
                    .map(|&n| {
                        let r = optimal_prepared_state(method, n as usize, &grid)?;
                        Ok(ScalingRow {
                            atoms: n,
                            delta_p: r.bound.delta_p,
                            delta_q: r.bound.delta_q,
                        })
                    })
                    .collect::<crate::Result<_>>()?,
                "pair_basis",
            )
        }
    };
    crate::optimize::check_atom_sweep(atoms)?;
    Ok((ScalingTable::from_rows(rows)?, family))
}

pub fn cmd_scaling(a: &ScalingArgs) -> anyhow::Result<()> {
    let atoms = parse_list(&a.atoms)?;
    if matches!(a.mode, ScalingMode::Smd | ScalingMode::Qpt) {
        if let Some(bad) = atoms.iter().find(|n| **n % 2 != 0 || **n < 2) {
            bail!(Error::Domain(format!(
                "{} mode needs even N >= 2 (pair basis), got N = {bad}",
                a.mode.name()
            )));
        }
    }
    crate::optimize::check_atom_sweep(&atoms)?;
    let (table, family) = scaling_rows(a.mode, a.spin, &atoms, a.search.into())?;
    let mut out = open_out(&a.common.out)?;
    let summary = json!({
        "mode": a.mode.name(),
        "family": family,
        "F": a.spin,
        "slope_p": table.slope_p,
        "slope_q": table.slope_q,
    });
    match a.common.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            writeln!(out, "N,delta_p,delta_q,mode,family")?;
            for r in &table.rows {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.atoms,
                    fmt_f64(r.delta_p),
                    fmt_f64(r.delta_q),
                    a.mode.name(),
                    family
                )?;
            }
            eprintln!(
                "slope_p = {}, slope_q = {}",
                fmt_f64(table.slope_p),
                fmt_f64(table.slope_q)
            );
        }
        Format::Json => {
            let mut v = summary.clone();
            v["rows"] = serde_json::to_value(&table.rows)?;
            serde_json::to_writer_pretty(&mut out, &v)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    if let Some(path) = &a.summary_out {
        std::fs::write(path, serde_json::to_string_pretty(&summary)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn prepared_json(atoms: usize, r: &PreparedState) -> serde_json::Value {
    json!({
        "N": atoms,
        "method": r.method.name(),
        "control": r.control,
        "alphas_re": r.state.alphas().iter().map(|a| a.re).collect::<Vec<_>>(),
        "alphas_im": r.state.alphas().iter().map(|a| a.im).collect::<Vec<_>>(),
        "delta_p": json_f64(r.bound.delta_p),
        "delta_q": json_f64(r.bound.delta_q),
    })
}

pub fn cmd_prepare(a: &PrepareArgs) -> anyhow::Result<()> {
    let method: PreparationMethod = a.method.into();
    let r = optimal_prepared_state(method, a.atoms, &a.grid.resolve(method))?;
    let mut out = open_out(&a.common.out)?;
    match a.common.format.unwrap_or(Format::Json) {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &prepared_json(a.atoms, &r))?;
            writeln!(out)?;
        }
        Format::Csv => {
            writeln!(out, "k,alpha_re,alpha_im")?;
            for (k, x) in r.state.alphas().iter().enumerate() {
                writeln!(out, "{k},{},{}", fmt_f64(x.re), fmt_f64(x.im))?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn write_series(path: &Path, a: &SignalSeries, b: &SignalSeries) -> anyhow::Result<()> {
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    writeln!(w, "t,sq_p0,sq_m0")?;
    for ((t, x), y) in a.times.iter().zip(&a.values).zip(&b.values) {
        writeln!(w, "{},{},{}", fmt_f64(*t), fmt_f64(*x), fmt_f64(*y))?;
    }
    w.flush()?;
    Ok(())
}

fn bound_json(b: &PrecisionBound) -> serde_json::Value {
    json!({"delta_p": json_f64(b.delta_p), "delta_q": json_f64(b.delta_q)})
}

pub fn cmd_estimate(a: &EstimateArgs) -> anyhow::Result<()> {
    let method: PreparationMethod = a.method.into();
    let p_guess = a.p_guess.unwrap_or(a.p.abs());
    let grid = match a.step {
        Some(step) => TimeGrid::new(0.0, step, a.samples)?,
        None => {
            let d = TimeGrid::default_for(p_guess)?;
            TimeGrid::new(0.0, d.step, a.samples)?
        }
    };
    let prepared = optimal_prepared_state(method, a.atoms, &a.grid.resolve(method))?;
    let series = signal_sweep(&prepared.state, a.p, a.q, &grid, p_guess)?;
    if let Some(path) = &a.series_out {
        write_series(path, &series.sq_p0, &series.sq_m0)?;
    }
    let est = match fft_estimate(&series, SpectrumOptions { hann: a.hann }) {
        Ok(e) => e,
        Err(Error::Estimation { reason, peaks }) => {
            eprintln!("frequency,magnitude,bin");
            for pk in &peaks {
                eprintln!("{},{},{}", fmt_f64(pk.frequency), fmt_f64(pk.magnitude), pk.bin);
            }
            return Err(anyhow!(Error::Estimation { reason, peaks }));
        }
        Err(e) => return Err(e.into()),
    };
    let mut out = open_out(&a.common.out)?;
    match a.common.format.unwrap_or(Format::Json) {
        Format::Json => {
            let v = json!({
                "N": a.atoms,
                "method": method.name(),
                "control": prepared.control,
                "prepared_bound": bound_json(&prepared.bound),
                "p": a.p,
                "q": a.q,
                "p_guess": p_guess,
                "time_step": grid.step,
                "samples": grid.samples,
                "p_hat": est.p_hat,
                "q_hat": est.q_hat,
                "resolution": est.resolution,
                "peak_frequencies": est.peak_frequencies,
                "consistency_frequency": est.consistency_frequency,
                "flags": est.flags,
                "peaks_sq_p0": est.peaks_sq_p0,
                "peaks_sq_m0": est.peaks_sq_m0,
            });
            serde_json::to_writer_pretty(&mut out, &v)?;
            writeln!(out)?;
        }
        Format::Csv => {
            writeln!(out, "observable,frequency,magnitude,bin")?;
            for (name, peaks) in [("sq_p0", &est.peaks_sq_p0), ("sq_m0", &est.peaks_sq_m0)] {
                for pk in peaks {
                    writeln!(
                        out,
                        "{name},{},{},{}",
                        fmt_f64(pk.frequency),
                        fmt_f64(pk.magnitude),
                        pk.bin
                    )?;
                }
            }
        }
    }
    out.flush()?;
    if est.flags.any() {
        eprintln!("warning: estimate flagged {:?}", est.flags);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_ranges() {
        assert_eq!(parse_list("3").unwrap(), vec![3]);
        assert_eq!(parse_list("1,2, 5").unwrap(), vec![1, 2, 5]);
        assert_eq!(parse_list("1..5").unwrap(), vec![1, 2, 3, 4, 5]);
        assert_eq!(parse_list("10..16:2").unwrap(), vec![10, 12, 14, 16]);
        assert!(parse_list("5..1").is_err());
        assert!(parse_list("a").is_err());
    }

    #[test]
    fn seventeen_digits() {
        let s = fmt_f64(0.1);
        assert_eq!(s.parse::<f64>().unwrap(), 0.1);
        assert_eq!(s.split('e').next().unwrap().replace('.', "").len(), 17);
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "F = \"2\"\nN = 7\n[bounds]\nN = 9\nfamily = \"uniform\"\n").unwrap();
        let p = path.to_str().unwrap();
        let cli = parse_with_config(["spinor-qcrb", "bounds", "--config", p]).unwrap();
        let Command::Bounds(a) = cli.command else { panic!() };
        assert_eq!((a.spin.as_str(), a.atoms, a.family), ("2", 9, BoundsFamily::Uniform));
        let cli = parse_with_config(["spinor-qcrb", "bounds", "--config", p, "--N", "4"]).unwrap();
        let Command::Bounds(a) = cli.command else { panic!() };
        assert_eq!(a.atoms, 4);
    }
}
