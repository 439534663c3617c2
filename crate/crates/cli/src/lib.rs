//! Experiment runners behind the `hamdd` binary. Every command produces a
//! [`Table`]: a `#`-prefixed `key=value` metadata block followed by CSV.

use std::fmt;
use std::io::{self, Write};
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use hamdd::dd::dot::{parse_angle, DiagramObject};
use hamdd::models::{trotter_step_circuit, ModelFamily};
use hamdd::oracle::{check_cap, dense_apply_circuit, DenseState};
use hamdd::sweeps::{grid_points, landscape_point, scaling_series};
use hamdd::{Config, EvolutionMode, EvolutionPlan, Manager, ModelSpec, ObservableSpec, Tolerance};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numeric contract violated: {0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<hamdd::Error> for CliError {
    fn from(e: hamdd::Error) -> Self {
        if e.is_numeric_contract() {
            CliError::Numeric(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(io::Error::other(e))
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "hamdd", version, about = "Decision-diagram simulation of spin-chain time evolution")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Node counts over a grid of single-site and two-site rotation angles.
    Landscape(LandscapeArgs),
    /// Node count after every Trotter step for a range of system sizes.
    Scaling(ScalingArgs),
    /// Observable time series.
    Evolve(EvolveArgs),
    /// Wall-time comparison of the diagram engine and the dense reference.
    Bench(BenchArgs),
    /// Graphviz export of a named state or operator.
    ExportDot(DotArgs),
}

/// Inclusive site range written `N` or `A..B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SiteRange(pub usize, pub usize);

impl SiteRange {
    pub fn iter(self) -> RangeInclusive<usize> {
        self.0..=self.1
    }
}

impl FromStr for SiteRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad site count {t:?}"));
        let (lo, hi) = match s.split_once("..") {
            Some((a, b)) => (num(a)?, num(b.strip_prefix('=').unwrap_or(b))?),
            None => (num(s)?, num(s)?),
        };
        if lo > hi {
            return Err(format!("empty site range {s}"));
        }
        Ok(SiteRange(lo, hi))
    }
}

impl fmt::Display for SiteRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == self.1 {
            write!(f, "{}", self.0)
        } else {
            write!(f, "{}..{}", self.0, self.1)
        }
    }
}

/// Shortest round-trip form, switching to exponent notation for very
/// small or large magnitudes.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

fn angle(s: &str) -> Result<f64, String> {
    parse_angle(s).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Weight-table tolerance.
    #[arg(long, default_value_t = hamdd::numerics::DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    /// Stored-node count that triggers garbage collection.
    #[arg(long, default_value_t = hamdd::dd::DEFAULT_GC_THRESHOLD)]
    pub gc_threshold: usize,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

impl Common {
    fn config(&self) -> CliResult<Config> {
        let tolerance = Tolerance::new(self.tolerance)?;
        if self.gc_threshold == 0 {
            return Err(CliError::Config("gc threshold must be positive".into()));
        }
        Ok(Config { tolerance, gc_threshold: self.gc_threshold, caching: true })
    }

    fn meta(&self, t: &mut Table) {
        t.meta("tolerance", num(self.tolerance));
        t.meta("gc_threshold", self.gc_threshold);
        t.meta("threads", rayon::current_num_threads());
    }
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, default_value = "ising")]
    pub model: ModelFamily,
    /// Coupling J.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub coupling: f64,
    /// Field g (Ising) or h (Heisenberg). Defaults to 0.001 and 1.
    #[arg(long, allow_negative_numbers = true)]
    pub field: Option<f64>,
    /// Seed for the spin-glass couplings.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.1)]
    pub dt: f64,
}

impl ModelArgs {
    fn field(&self) -> f64 {
        self.field.unwrap_or(match self.model {
            ModelFamily::Ising => 0.001,
            _ => 1.0,
        })
    }

    fn spec(&self, sites: usize) -> CliResult<ModelSpec> {
        let m = match self.model {
            ModelFamily::Ising => ModelSpec::ising(sites, self.coupling, self.field()),
            ModelFamily::Heisenberg => ModelSpec::heisenberg(sites, self.coupling, self.field()),
            ModelFamily::SpinGlass => ModelSpec::spin_glass(sites, self.seed)?,
        };
        m.validate()?;
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(CliError::Config(format!("dt must be positive, got {}", self.dt)));
        }
        Ok(m)
    }

    fn meta(&self, t: &mut Table) {
        t.meta("model", self.model);
        match self.model {
            ModelFamily::SpinGlass => t.meta("seed", self.seed),
            _ => {
                t.meta("coupling", self.coupling);
                t.meta("field", self.field());
            }
        }
        t.meta("dt", self.dt);
    }
}

#[derive(Debug, Clone, Args)]
pub struct LandscapeArgs {
    #[arg(long, default_value = "ising")]
    pub model: ModelFamily,
    #[arg(long, default_value_t = 12)]
    pub sites: usize,
    /// Largest Trotter step count; rows are written for 1..=steps.
    #[arg(long, default_value_t = 2)]
    pub steps: usize,
    /// Grid points per axis.
    #[arg(long, default_value_t = 101)]
    pub grid: usize,
    /// Angle bounds, e.g. `--angle-range -pi pi`.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], value_parser = angle, allow_hyphen_values = true)]
    pub angle_range: Option<Vec<f64>>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct ScalingArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Site count or inclusive range `A..B`.
    #[arg(long, default_value = "2..10")]
    pub sites: SiteRange,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 5)]
    pub sites: usize,
    /// Number of sampled steps after `t = 0`.
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    /// `sz(i)` or `sxsx(i,j)`; repeatable. Defaults to `sz` at the centre.
    #[arg(long = "observable")]
    pub observables: Vec<ObservableSpec>,
    #[arg(long, default_value = "stepwise")]
    pub mode: EvolutionMode,
    /// Also run the dense reference and report deviations.
    #[arg(long)]
    pub dense_check: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value = "4")]
    pub sites: SiteRange,
    #[arg(long, default_value_t = 1)]
    pub steps: usize,
    #[arg(long = "observable")]
    pub observables: Vec<ObservableSpec>,
    /// Timed repetitions, after one untimed warm-up run.
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct DotArgs {
    /// Object description, e.g. `ghz 3`, `basis 0101`, `rxx pi/2`. Quote
    /// descriptions with negative angles: `"rz -pi/4 0 2"`.
    #[arg(required = true, num_args = 1..)]
    pub object: Vec<String>,
    #[command(flatten)]
    pub common: Common,
}

/// Command output: metadata lines then a CSV table, or raw text.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub raw: Option<String>,
}

impl Table {
    fn new(command: &str) -> Self {
        let mut t = Table::default();
        t.meta("command", command);
        t.meta("version", env!("CARGO_PKG_VERSION"));
        t
    }

    pub fn meta(&mut self, key: &str, value: impl fmt::Display) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn write_to(&self, w: &mut impl Write) -> CliResult<()> {
        if let Some(raw) = &self.raw {
            w.write_all(raw.as_bytes())?;
            return Ok(());
        }
        for (k, v) in &self.meta {
            writeln!(w, "# {k}={v}")?;
        }
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(&self.header)?;
        for r in &self.rows {
            csv.write_record(r)?;
        }
        csv.flush()?;
        Ok(())
    }
}

pub fn run(cli: &Cli) -> CliResult<Table> {
    let common = match &cli.command {
        Command::Landscape(a) => &a.common,
        Command::Scaling(a) => &a.common,
        Command::Evolve(a) => &a.common,
        Command::Bench(a) => &a.common,
        Command::ExportDot(a) => &a.common,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(common.threads)
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let start = Instant::now();
    let mut table = pool.install(|| match &cli.command {
        Command::Landscape(a) => landscape(a),
        Command::Scaling(a) => scaling(a),
        Command::Evolve(a) => evolve(a),
        Command::Bench(a) => bench(a),
        Command::ExportDot(a) => export_dot(a),
    })?;
    if table.raw.is_none() {
        table.meta("wall_ms", format!("{:.3}", start.elapsed().as_secs_f64() * 1e3));
    }
    Ok(table)
}

/// Run and write to `--out` or standard output.
pub fn run_and_write(cli: &Cli) -> CliResult<()> {
    let table = run(cli)?;
    let out = match &cli.command {
        Command::Landscape(a) => &a.common.out,
        Command::Scaling(a) => &a.common.out,
        Command::Evolve(a) => &a.common.out,
        Command::Bench(a) => &a.common.out,
        Command::ExportDot(a) => &a.common.out,
    };
    match out {
        Some(path) => {
            let mut f = io::BufWriter::new(std::fs::File::create(path)?);
            table.write_to(&mut f)?;
            f.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            table.write_to(&mut lock)?;
        }
    }
    Ok(())
}

fn landscape(a: &LandscapeArgs) -> CliResult<Table> {
    let config = a.common.config()?;
    let (lo, hi) = match a.angle_range.as_deref() {
        Some([lo, hi]) => (*lo, *hi),
        _ => (-std::f64::consts::PI, std::f64::consts::PI),
    };
    let grid = grid_points(lo, hi, a.grid)?;
    if a.steps == 0 {
        return Err(CliError::Config("landscape needs at least one Trotter step".into()));
    }
    // Validates family and size before the sweep starts.
    hamdd::models::circuit_from_angles(a.model, a.sites, 0.0, 0.0)?;
    let points: Vec<(f64, f64)> = grid.iter().flat_map(|&s| grid.iter().map(move |&t| (s, t))).collect();
    let results: Vec<_> = points
        .par_iter()
        .map(|&(s, t)| landscape_point(a.model, a.sites, a.steps, s, t, config))
        .collect::<Result<_, _>>()?;

    let mut t = Table::new("landscape");
    t.meta("model", a.model);
    t.meta("sites", a.sites);
    t.meta("steps", a.steps);
    t.meta("grid", a.grid);
    t.meta("angle_range", format!("{} {}", num(lo), num(hi)));
    a.common.meta(&mut t);
    t.header = ["theta_single", "theta_two", "trotter_steps", "node_count"].map(String::from).to_vec();
    for p in results.into_iter().flatten() {
        t.rows.push(vec![
            num(p.theta_single),
            num(p.theta_two),
            p.trotter_steps.to_string(),
            p.node_count.to_string(),
        ]);
    }
    Ok(t)
}

fn scaling(a: &ScalingArgs) -> CliResult<Table> {
    let config = a.common.config()?;
    let specs: Vec<ModelSpec> = a.sites.iter().map(|l| a.model.spec(l)).collect::<CliResult<_>>()?;
    let series: Vec<Vec<usize>> = specs
        .par_iter()
        .map(|m| scaling_series(m, a.model.dt, a.steps, config))
        .collect::<Result<_, _>>()?;

    let mut t = Table::new("scaling");
    a.model.meta(&mut t);
    t.meta("sites", a.sites);
    t.meta("steps", a.steps);
    a.common.meta(&mut t);
    t.header = ["L", "step", "node_count"].map(String::from).to_vec();
    for (m, s) in specs.iter().zip(series) {
        for (step, n) in s.into_iter().enumerate() {
            t.rows.push(vec![m.sites.to_string(), step.to_string(), n.to_string()]);
        }
    }
    Ok(t)
}

fn observables_or_default(obs: &[ObservableSpec], model: &ModelSpec) -> Vec<ObservableSpec> {
    if obs.is_empty() {
        vec![ObservableSpec::Sz(model.center_site())]
    } else {
        obs.to_vec()
    }
}

/// Dense reference values for each sampled step, following the same
/// circuit sequence as the diagram run.
fn dense_reference(plan: &EvolutionPlan) -> CliResult<Vec<Vec<f64>>> {
    let l = plan.model.sites;
    let psi0 = DenseState::basis(l, 0)?;
    let mut out = Vec::new();
    match plan.mode {
        EvolutionMode::Stepwise => {
            let c = trotter_step_circuit(&plan.model, plan.dt)?;
            let mut psi = psi0;
            let mut done = 0;
            for k in plan.sample_steps() {
                while done < k {
                    psi = dense_apply_circuit(&psi, &c)?;
                    done += 1;
                }
                out.push(plan.observables.iter().map(|o| psi.observable_expectation(o)).collect::<Result<_, _>>()?);
            }
        }
        EvolutionMode::SingleStep => {
            for k in plan.sample_steps() {
                let psi = if k == 0 {
                    psi0.clone()
                } else {
                    dense_apply_circuit(&psi0, &trotter_step_circuit(&plan.model, k as f64 * plan.dt)?)?
                };
                out.push(plan.observables.iter().map(|o| psi.observable_expectation(o)).collect::<Result<_, _>>()?);
            }
        }
    }
    Ok(out)
}

fn evolve(a: &EvolveArgs) -> CliResult<Table> {
    let config = a.common.config()?;
    let model = a.model.spec(a.sites)?;
    if a.dense_check {
        check_cap(a.sites).map_err(|e| CliError::Config(format!("--dense-check refused: {e}")))?;
    }
    let obs = observables_or_default(&a.observables, &model);
    let plan = EvolutionPlan::new(model, a.model.dt, a.steps).with_observables(obs.clone()).with_mode(a.mode);
    plan.validate()?;
    let mut m = Manager::new(config);
    let psi0 = m.zero_state(a.sites)?;
    let ev = m.evolve(&plan, &psi0)?;
    let reference = if a.dense_check { Some(dense_reference(&plan)?) } else { None };

    let mut t = Table::new("evolve");
    a.model.meta(&mut t);
    t.meta("sites", a.sites);
    t.meta("steps", a.steps);
    t.meta("mode", a.mode);
    t.meta("observables", obs.iter().map(|o| o.to_string()).collect::<Vec<_>>().join(" "));
    t.meta("dense_check", a.dense_check);
    t.meta("initial_state", "zero");
    a.common.meta(&mut t);
    for w in &ev.warnings {
        t.meta("warning", w);
    }
    t.header.push("t".into());
    t.header.extend(obs.iter().map(|o| o.to_string()));
    t.header.extend(["node_count".to_string(), "wall_ms".to_string()]);
    if reference.is_some() {
        t.header.extend(obs.iter().map(|o| format!("oracle_{o}")));
        t.header.extend(obs.iter().map(|o| format!("abs_err_{o}")));
    }
    let mut max_err = vec![0.0f64; obs.len()];
    for (i, s) in ev.samples.iter().enumerate() {
        let mut row = vec![num(s.t)];
        row.extend(s.values.iter().map(|&v| num(v)));
        row.push(s.node_count.to_string());
        row.push(format!("{:.3}", s.wall_ms));
        if let Some(r) = &reference {
            row.extend(r[i].iter().map(|&v| num(v)));
            for (k, (v, o)) in s.values.iter().zip(&r[i]).enumerate() {
                let e = (v - o).abs();
                max_err[k] = max_err[k].max(e);
                row.push(format!("{e:e}"));
            }
        }
        t.rows.push(row);
    }
    if reference.is_some() {
        for (o, e) in obs.iter().zip(max_err) {
            t.meta(&format!("max_abs_err_{o}"), format!("{e:e}"));
        }
    }
    Ok(t)
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn time_reps(reps: usize, mut f: impl FnMut() -> CliResult<()>) -> CliResult<(f64, f64)> {
    f()?;
    let mut times = Vec::with_capacity(reps);
    for _ in 0..reps {
        let start = Instant::now();
        f()?;
        times.push(start.elapsed().as_secs_f64() * 1e3);
    }
    let mean = times.iter().sum::<f64>() / reps as f64;
    Ok((median(&mut times), mean))
}

fn bench(a: &BenchArgs) -> CliResult<Table> {
    let config = a.common.config()?;
    if a.reps == 0 {
        return Err(CliError::Config("--reps must be at least 1".into()));
    }
    let mut t = Table::new("bench");
    a.model.meta(&mut t);
    t.meta("sites", a.sites);
    t.meta("steps", a.steps);
    t.meta("reps", a.reps);
    t.meta("warmup", 1);
    a.common.meta(&mut t);
    t.header = ["L", "steps", "method", "reps", "median_ms", "mean_ms"].map(String::from).to_vec();
    for l in a.sites.iter() {
        let model = a.model.spec(l)?;
        let obs = observables_or_default(&a.observables, &model);
        let plan = EvolutionPlan::new(model.clone(), a.model.dt, a.steps).with_observables(obs.clone());
        plan.validate()?;
        let (med, mean) = time_reps(a.reps, || {
            let mut m = Manager::new(config);
            let psi0 = m.zero_state(l)?;
            m.evolve(&plan, &psi0)?;
            Ok(())
        })?;
        let row = |method: &str, med: String, mean: String| {
            vec![l.to_string(), a.steps.to_string(), method.to_string(), a.reps.to_string(), med, mean]
        };
        t.rows.push(row("dd", format!("{med:.6}"), format!("{mean:.6}")));
        if check_cap(l).is_ok() {
            let (med, mean) = time_reps(a.reps, || {
                dense_reference(&plan)?;
                Ok(())
            })?;
            t.rows.push(row("dense", format!("{med:.6}"), format!("{mean:.6}")));
        } else {
            t.rows.push(row("dense", "unavailable".into(), "unavailable".into()));
        }
    }
    Ok(t)
}

fn export_dot(a: &DotArgs) -> CliResult<Table> {
    let obj: DiagramObject = a.object.join(" ").parse()?;
    let mut m = Manager::new(a.common.config()?);
    let root = obj.build(&mut m)?;
    Ok(Table { raw: Some(m.dot_string(root)), ..Table::default() })
}
