//! Experiment execution and CSV rendering.

use std::path::{Path, PathBuf};
use std::time::Instant;

use super::config::{ConfigError, Experiment, ExperimentConfig, StartSpec};
use crate::coupling::TaggedState;
use crate::error::Error;
use crate::estimators::{
    coalescence_tail, empty_fraction_tail, mixing_time_upper, scaling_experiment, Estimate, MixingOptions, StartClass,
    TailOptions,
};
use crate::oracle::{na_check, ExactChain, ExactTaggedChain, MixingStart, STATIONARY_TOL};
use crate::process::simulate;
use crate::rng::RngStream;

/// Failure of a run: bad configuration or an error raised while running.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Io(String),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        let field = match &e {
            Error::InvalidParameter { name, .. } => (*name).to_string(),
            Error::CapExceeded { .. } => "cap".to_string(),
            Error::LengthMismatch { .. } | Error::ParticleMismatch { .. } | Error::SiteOutOfRange { .. } => {
                "start".to_string()
            }
            _ => "experiment".to_string(),
        };
        RunError::Config(ConfigError::new(field, e.to_string()))
    }
}

/// One CSV artifact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub csv: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub artifacts: Vec<Artifact>,
}

/// Formats a float as its shortest round-trip representation.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x != 0.0 && x.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

struct Table {
    lines: Vec<String>,
}

impl Table {
    fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self {
            lines: vec![join(header)],
        }
    }

    fn row<S: AsRef<str>>(&mut self, cells: &[S]) {
        self.lines.push(join(cells));
    }

    fn finish(self, name: &str) -> Artifact {
        let mut csv = self.lines.join("\n");
        csv.push('\n');
        Artifact {
            name: name.to_string(),
            csv,
        }
    }
}

fn join<S: AsRef<str>>(cells: &[S]) -> String {
    cells.iter().map(AsRef::as_ref).collect::<Vec<_>>().join(",")
}

fn occ_header(sites: usize) -> Vec<String> {
    (0..sites).map(|x| format!("occ_{x}")).collect()
}

fn estimate_cells(e: &Estimate) -> [String; 5] {
    [
        fmt_f64(e.value),
        fmt_f64(e.ci_low),
        fmt_f64(e.ci_high),
        e.trials.to_string(),
        e.master_seed.to_string(),
    ]
}

const ESTIMATE_HEADER: [&str; 5] = ["estimate", "ci_low", "ci_high", "trials", "seed"];

/// Runs the experiment described by `config` on `workers` threads (the
/// `workers` setting, or rayon's default).
pub fn run(config: &ExperimentConfig) -> Result<RunOutput, RunError> {
    match config.opt::<usize>("workers")? {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| RunError::Config(ConfigError::new("workers", e.to_string())))?;
            pool.install(|| dispatch(config))
        }
        None => dispatch(config),
    }
}

fn dispatch(c: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let artifacts = match c.experiment() {
        Experiment::Simulate => run_simulate(c)?,
        Experiment::Exact => run_exact(c)?,
        Experiment::Couple => run_couple(c)?,
        Experiment::Tails => run_tails(c)?,
        Experiment::Empty => run_empty(c)?,
        Experiment::Mixing => run_mixing(c)?,
        Experiment::Scaling => run_scaling(c)?,
        Experiment::NaCheck => run_na_check(c)?,
    };
    Ok(RunOutput { artifacts })
}

fn shape(c: &ExperimentConfig) -> Result<(usize, u32), ConfigError> {
    let sites = c.sites()?;
    Ok((sites, c.particles()?.for_sites(sites)?))
}

fn stream(c: &ExperimentConfig) -> Result<RngStream, ConfigError> {
    Ok(RngStream::new(c.get("seed")?, 0))
}

fn run_simulate(c: &ExperimentConfig) -> Result<Vec<Artifact>, RunError> {
    let (sites, particles) = shape(c)?;
    let eta0 = c.start()?.configuration(sites, particles)?;
    let horizon: u64 = c.get("horizon")?;
    let observe = c.observe()?;
    let traj = simulate(&eta0, horizon, stream(c)?, observe)?;

    let mut header = vec!["t".to_string()];
    if observe.nonempty {
        header.push("nonempty".into());
    }
    if observe.sup_norm {
        header.push("sup_norm".into());
    }
    if observe.occupancy {
        header.extend(occ_header(sites));
    }
    let mut table = Table::new(&header);
    for obs in &traj.observations {
        let mut row = vec![obs.time.to_string()];
        row.extend(obs.nonempty.map(|v| v.to_string()));
        row.extend(obs.sup_norm.map(|v| v.to_string()));
        if let Some(occ) = &obs.occupancy {
            row.extend(occ.iter().map(u32::to_string));
        }
        table.row(&row);
    }
    let mut last = Table::new(&occ_header(sites));
    last.row(&traj.final_state.occ().iter().map(u32::to_string).collect::<Vec<_>>());
    Ok(vec![table.finish("trajectory"), last.finish("final")])
}

fn run_exact(c: &ExperimentConfig) -> Result<Vec<Artifact>, RunError> {
    let (sites, particles) = shape(c)?;
    let chain = ExactChain::with_cap(sites, particles, c.get("cap")?)?;
    let law = if c.flag("stationary")? {
        chain.stationary_dense(STATIONARY_TOL)?
    } else {
        let eta0 = c.start()?.configuration(sites, particles)?;
        chain.distribution_at_dense(&eta0, c.get("t")?)?
    };
    let mut header = vec!["index".to_string()];
    header.extend(occ_header(sites));
    header.push("probability".into());
    let mut table = Table::new(&header);
    for (i, &p) in law.iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(chain.space().occ(i).iter().map(u32::to_string));
        row.push(fmt_f64(p));
        table.row(&row);
    }
    Ok(vec![table.finish("distribution")])
}

fn run_couple(c: &ExperimentConfig) -> Result<Vec<Artifact>, RunError> {
    let (sites, particles) = shape(c)?;
    let zeta = c.start()?.configuration(sites, particles)?;
    let start =
        TaggedState::for_move(&zeta, c.get("x")?, c.get("y")?).map_err(|e| ConfigError::new("x", e.to_string()))?;
    let t_max: u64 = c.get("t")?;
    let grid: Vec<u64> = (1..=t_max).collect();
    let curve = coalescence_tail(&start, &grid, c.get("trials")?, stream(c)?)?;
    let exact = if c.flag("exact")? {
        let oracle = ExactTaggedChain::new(sites, particles - 1)?;
        Some(oracle.survival(&start, t_max)?)
    } else {
        None
    };
    let mut header = vec!["t".to_string()];
    header.extend(ESTIMATE_HEADER.map(String::from));
    if exact.is_some() {
        header.push("exact".into());
    }
    let mut table = Table::new(&header);
    for (t, est) in &curve.points {
        let mut row = vec![t.to_string()];
        row.extend(estimate_cells(est));
        if let Some(ex) = &exact {
            row.push(fmt_f64(ex[*t as usize]));
        }
        table.row(&row);
    }
    Ok(vec![table.finish("survival")])
}

fn run_tails(c: &ExperimentConfig) -> Result<Vec<Artifact>, RunError> {
    let (sites, particles) = shape(c)?;
    let eta0 = c.start()?.configuration(sites, particles)?;
    let t: u64 = c.get("t")?;
    let levels = c.float_list("levels")?;
    let opts = TailOptions {
        drift: c.get("drift")?,
        ..TailOptions::default()
    };
    let tail = crate::estimators::occupation_tail(&eta0, t, &levels, c.get("trials")?, stream(c)?, &opts)?;

    let mut header = vec!["drift".to_string(), "level".into(), "hits".into()];
    header.extend(ESTIMATE_HEADER.map(String::from));
    let mut levels_table = Table::new(&header);
    let mut fits = Table::new(&["drift", "rate", "intercept", "r_squared", "levels_used"]);
    let all = std::iter::once((&tail.levels, &tail.fit)).chain(tail.sensitivity.iter().map(|(l, f)| (l, f)));
    for (lv, fit) in all {
        for l in lv {
            let mut row = vec![fmt_f64(l.drift), fmt_f64(l.level), l.hits.to_string()];
            row.extend(estimate_cells(&l.estimate));
            levels_table.row(&row);
        }
        if let Some(f) = fit {
            fits.row(&[
                fmt_f64(f.drift),
                fmt_f64(f.rate),
                fmt_f64(f.intercept),
                fmt_f64(f.r_squared),
                f.levels_used.to_string(),
            ]);
        }
    }
    Ok(vec![levels_table.finish("tail_levels"), fits.finish("tail_fit")])
}

fn run_empty(c: &ExperimentConfig) -> Result<Vec<Artifact>, RunError> {
    let (sites, particles) = shape(c)?;
    let eta0 = c.start()?.configuration(sites, particles)?;
    let t: u64 = c.get("t")?;
    let eps: f64 = c.get("eps")?;
    let est = empty_fraction_tail(&eta0, t, eps, c.get("trials")?, stream(c)?)?;
    let mut header = vec!["L".to_string(), "N".into(), "t".into(), "eps".into()];
    header.extend(ESTIMATE_HEADER.map(String::from));
    let mut table = Table::new(&header);
    let mut row = vec![sites.to_string(), particles.to_string(), t.to_string(), fmt_f64(eps)];
    row.extend(estimate_cells(&est));
    table.row(&row);
    Ok(vec![table.finish("empty_fraction")])
}

fn mixing_options(c: &ExperimentConfig) -> Result<MixingOptions, ConfigError> {
    Ok(MixingOptions {
        references: c.get("references")?,
        trials_per_pair: c.get("trials")?,
        max_horizon: c.opt("max_horizon")?,
        ..MixingOptions::default()
    })
}

const MIXING_HEADER: [&str; 14] = [
    "L",
    "N",
    "eps",
    "start",
    "time",
    "grid_time",
    "bound",
    "ci_low",
    "ci_high",
    "runs",
    "mean_path_len",
    "max_horizon",
    "trials_per_pair",
    "seed",
];

fn run_mixing(c: &ExperimentConfig) -> Result<Vec<Artifact>, RunError> {
    let (sites, particles) = shape(c)?;
    let eps: f64 = c.get("eps")?;
    let spec = c.start()?;
    if c.flag("exact")? {
        let chain = ExactChain::with_cap(sites, particles, c.get("cap")?)?;
        let (from, name) = match &spec {
            StartSpec::Class(StartClass::Worst) => (MixingStart::Worst, "worst".to_string()),
            other => {
                let eta = other.configuration(sites, particles)?;
                let name = eta.occ().iter().map(u32::to_string).collect::<Vec<_>>().join(":");
                (MixingStart::State(eta), name)
            }
        };
        let t = chain.mixing_time_exact(eps, &from)?;
        let mut table = Table::new(&["L", "N", "eps", "start", "mixing_time"]);
        table.row(&[
            sites.to_string(),
            particles.to_string(),
            fmt_f64(eps),
            name,
            t.to_string(),
        ]);
        return Ok(vec![table.finish("mixing_exact")]);
    }
    let StartSpec::Class(class) = spec else {
        return Err(ConfigError::new("start", "Monte Carlo mixing needs `worst` or `flat`").into());
    };
    let opts = mixing_options(c)?;
    let est = mixing_time_upper(sites, particles, eps, class, stream(c)?, &opts)?;
    let mut table = Table::new(&MIXING_HEADER);
    table.row(&mixing_row(
        sites,
        particles,
        eps,
        class,
        &est,
        opts.trials_per_pair,
        c.get("seed")?,
    ));
    Ok(vec![table.finish("mixing")])
}

fn opt_cell(v: Option<u64>) -> String {
    v.map_or_else(|| "censored".to_string(), |t| t.to_string())
}

fn mixing_row(
    sites: usize,
    particles: u32,
    eps: f64,
    class: StartClass,
    est: &crate::estimators::MixingEstimate,
    trials_per_pair: u64,
    seed: u64,
) -> Vec<String> {
    vec![
        sites.to_string(),
        particles.to_string(),
        fmt_f64(eps),
        class.name().to_string(),
        opt_cell(est.time),
        opt_cell(est.grid_time),
        fmt_f64(est.bound.value),
        fmt_f64(est.bound.ci_low),
        fmt_f64(est.bound.ci_high),
        est.runs.to_string(),
        fmt_f64(est.mean_path_len),
        est.max_horizon.to_string(),
        trials_per_pair.to_string(),
        seed.to_string(),
    ]
}

fn run_scaling(c: &ExperimentConfig) -> Result<Vec<Artifact>, RunError> {
    let sites = c.site_list()?;
    let density: f64 = c.get("r")?;
    let eps: f64 = c.get("eps")?;
    let opts = mixing_options(c)?;
    let result = scaling_experiment(&sites, density, eps, stream(c)?, &opts)?;
    let seed: u64 = c.get("seed")?;
    let mut table = Table::new(&MIXING_HEADER);
    for r in &result.records {
        table.row(&mixing_row(
            r.sites,
            r.particles,
            eps,
            r.class,
            &r.estimate,
            r.trials_per_pair,
            seed,
        ));
    }
    let mut summary = Table::new(&["quantity", "L", "value"]);
    if let Some(fit) = result.worst_fit {
        summary.row(&["worst_slope".into(), "all".into(), fmt_f64(fit.slope)]);
        summary.row(&["worst_intercept".into(), "all".into(), fmt_f64(fit.intercept)]);
        summary.row(&["worst_r_squared".into(), "all".into(), fmt_f64(fit.r_squared)]);
    }
    for (l, ratio) in &result.flat_ratios {
        summary.row(&["flat_time_per_site".into(), l.to_string(), fmt_f64(*ratio)]);
    }
    Ok(vec![table.finish("scaling"), summary.finish("scaling_summary")])
}

fn run_na_check(c: &ExperimentConfig) -> Result<Vec<Artifact>, RunError> {
    let max_sites = u32::try_from(c.sites()?).map_err(|_| ConfigError::new("L", "too large"))?;
    let max_m: u32 = c.get("m")?;
    let lambdas = c.float_list("lambda")?;
    let mut table = Table::new(&["m", "L", "lambda", "lhs", "rhs", "holds"]);
    for m in 0..=max_m {
        for l in 1..=max_sites {
            for &lambda in &lambdas {
                let r = na_check(m, l, lambda)?;
                table.row(&[
                    m.to_string(),
                    l.to_string(),
                    fmt_f64(lambda),
                    fmt_f64(r.lhs),
                    fmt_f64(r.rhs),
                    r.holds.to_string(),
                ]);
            }
        }
    }
    Ok(vec![table.finish("na_check")])
}

/// Runs `config` and writes `<name>.csv` for every artifact plus
/// `manifest.txt` into `dir`. Returns the written CSV paths.
pub fn run_to_dir(config: &ExperimentConfig, dir: &Path) -> Result<(RunOutput, Vec<PathBuf>), RunError> {
    let started = Instant::now();
    let output = run(config)?;
    let elapsed = started.elapsed().as_secs_f64();
    let io = |e: std::io::Error| RunError::Io(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut paths = Vec::new();
    for a in &output.artifacts {
        let path = dir.join(format!("{}.csv", a.name));
        std::fs::write(&path, &a.csv).map_err(io)?;
        paths.push(path);
    }
    let manifest = config.manifest(&[
        ("version", env!("CARGO_PKG_VERSION").to_string()),
        ("wall_time_s", fmt_f64(elapsed)),
    ]);
    std::fs::write(dir.join("manifest.txt"), manifest).map_err(io)?;
    Ok((output, paths))
}
