//! Experiment configuration: `key=value` files and `--key value` flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use crate::estimators::StartClass;
use crate::state::Configuration;

/// A configuration problem, tied to the field that caused it.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid `{field}`: {reason}")]
pub struct ConfigError {
    pub field: String,
    pub reason: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Experiment {
    Simulate,
    Exact,
    Couple,
    Tails,
    Empty,
    Mixing,
    Scaling,
    NaCheck,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Simulate,
        Experiment::Exact,
        Experiment::Couple,
        Experiment::Tails,
        Experiment::Empty,
        Experiment::Mixing,
        Experiment::Scaling,
        Experiment::NaCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Simulate => "simulate",
            Experiment::Exact => "exact",
            Experiment::Couple => "couple",
            Experiment::Tails => "tails",
            Experiment::Empty => "empty",
            Experiment::Mixing => "mixing",
            Experiment::Scaling => "scaling",
            Experiment::NaCheck => "na-check",
        }
    }

    /// Experiment-specific keys with their defaults (`None`: no default).
    fn keys(self) -> &'static [(&'static str, Option<&'static str>)] {
        match self {
            Experiment::Simulate => &[
                ("start", Some("flat")),
                ("horizon", Some("10")),
                ("observe", Some("nonempty,sup_norm,occupancy")),
            ],
            Experiment::Exact => &[
                ("start", Some("worst")),
                ("t", Some("0")),
                ("stationary", Some("false")),
                ("cap", Some("2000000")),
            ],
            Experiment::Couple => &[
                ("start", Some("worst")),
                ("x", Some("0")),
                ("y", Some("1")),
                ("t", Some("10")),
                ("trials", Some("100000")),
                ("exact", Some("false")),
                ("cap", Some("2000000")),
            ],
            Experiment::Tails => &[
                ("start", Some("flat")),
                ("t", Some("50")),
                ("levels", Some("2,3,4,5,6,7,8")),
                ("drift", Some("0.632")),
                ("trials", Some("10000")),
            ],
            Experiment::Empty => &[
                ("start", Some("flat")),
                ("t", Some("2")),
                ("eps", Some("0.2")),
                ("trials", Some("10000")),
            ],
            Experiment::Mixing => &[
                ("start", Some("worst")),
                ("eps", Some("0.25")),
                ("exact", Some("false")),
                ("trials", Some("4")),
                ("references", Some("32")),
                ("max_horizon", None),
                ("cap", Some("2000000")),
            ],
            Experiment::Scaling => &[
                ("eps", Some("0.25")),
                ("trials", Some("4")),
                ("references", Some("32")),
                ("max_horizon", None),
            ],
            Experiment::NaCheck => &[("m", Some("6")), ("lambda", Some("0.5,1,2"))],
        }
    }

    fn needs_particles(self) -> bool {
        self != Experiment::NaCheck
    }

    /// Whether the experiment consumes randomness.
    pub fn stochastic(self, exact: bool) -> bool {
        match self {
            Experiment::Exact | Experiment::NaCheck => false,
            Experiment::Mixing => !exact,
            _ => true,
        }
    }
}

impl FromStr for Experiment {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| ConfigError::new("experiment", format!("unknown experiment `{s}`")))
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Keys shared by every experiment.
const COMMON_KEYS: [&str; 8] = ["experiment", "L", "N", "r", "seed", "trials", "out", "workers"];

/// Keys given as bare flags on the command line.
pub const BOOLEAN_FLAGS: [&str; 2] = ["stationary", "exact"];

/// Start state: explicit occupancies or a start class.
#[derive(Debug, Clone, PartialEq)]
pub enum StartSpec {
    Class(StartClass),
    Explicit(Vec<u32>),
}

impl StartSpec {
    pub fn configuration(&self, sites: usize, particles: u32) -> Result<Configuration, ConfigError> {
        let err = |e: crate::Error| ConfigError::new("start", e.to_string());
        match self {
            StartSpec::Class(c) => c.representative(sites, particles).map_err(err),
            StartSpec::Explicit(occ) => {
                if occ.len() != sites {
                    return Err(ConfigError::new(
                        "start",
                        format!("has {} sites, expected L = {sites}", occ.len()),
                    ));
                }
                let total: u64 = occ.iter().map(|&n| u64::from(n)).sum();
                if total != u64::from(particles) {
                    return Err(ConfigError::new(
                        "start",
                        format!("holds {total} particles, expected N = {particles}"),
                    ));
                }
                Configuration::new(occ.clone()).map_err(err)
            }
        }
    }
}

impl FromStr for StartSpec {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "worst" => Ok(StartSpec::Class(StartClass::Worst)),
            "flat" => Ok(StartSpec::Class(StartClass::Flat)),
            _ => parse_list(s, "start").map(StartSpec::Explicit),
        }
    }
}

/// Particle count given directly or as a density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Particles {
    Count(u32),
    Density(f64),
}

impl Particles {
    pub fn for_sites(self, sites: usize) -> Result<u32, ConfigError> {
        match self {
            Particles::Count(n) => Ok(n),
            Particles::Density(r) => {
                crate::estimators::particles_for(sites, r).map_err(|e| ConfigError::new("r", e.to_string()))
            }
        }
    }
}

/// Validated experiment configuration.
///
/// Every recognised key is stored as text with defaults filled in, so the
/// manifest written from it reproduces the run exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    experiment: Experiment,
    values: BTreeMap<String, String>,
}

impl ExperimentConfig {
    /// Validates raw `key=value` pairs and fills in defaults.
    pub fn from_pairs(pairs: BTreeMap<String, String>) -> Result<Self, ConfigError> {
        let experiment: Experiment = pairs
            .get("experiment")
            .ok_or_else(|| ConfigError::new("experiment", "missing; give a subcommand"))?
            .parse()?;
        let specific = experiment.keys();
        for key in pairs.keys() {
            if !COMMON_KEYS.contains(&key.as_str()) && !specific.iter().any(|(k, _)| k == key) {
                return Err(ConfigError::new(
                    key.as_str(),
                    format!("not a setting of `{experiment}`"),
                ));
            }
        }
        let mut values = pairs;
        for (key, default) in specific {
            if let Some(d) = default {
                values.entry((*key).to_string()).or_insert_with(|| (*d).to_string());
            }
        }
        if experiment == Experiment::NaCheck {
            values.entry("L".into()).or_insert_with(|| "6".into());
        }
        let config = Self { experiment, values };
        config.validate()?;
        Ok(config)
    }

    /// Parses the contents of a configuration file.
    pub fn parse_file(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
        let mut pairs = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::new(format!("line {}", lineno + 1), "expected key=value"))?;
            pairs.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(pairs)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let e = self.experiment;
        let sites = self.site_list()?;
        if e != Experiment::Scaling && sites.len() != 1 {
            return Err(ConfigError::new("L", "expected a single site count"));
        }
        match (self.values.contains_key("N"), self.values.contains_key("r")) {
            (true, true) => return Err(ConfigError::new("N", "give exactly one of N and r")),
            (false, false) if e.needs_particles() => {
                return Err(ConfigError::new("N", "give exactly one of N and r"));
            }
            (true, false) if e == Experiment::Scaling => {
                return Err(ConfigError::new("N", "scaling takes a density r, not N"));
            }
            _ => {}
        }
        if e.needs_particles() {
            let p = self.particles()?;
            for &l in &sites {
                p.for_sites(l)?;
            }
        }
        if e.stochastic(self.flag("exact")?) && !self.values.contains_key("seed") {
            return Err(ConfigError::new("seed", format!("required by `{e}`")));
        }
        self.opt::<u64>("seed")?;
        if let Some(w) = self.opt::<usize>("workers")? {
            if w == 0 {
                return Err(ConfigError::new("workers", "must be at least 1"));
            }
        }
        for key in BOOLEAN_FLAGS {
            self.flag(key)?;
        }
        for (key, _) in e.keys() {
            self.check_value(key)?;
        }
        if matches!(e, Experiment::Mixing | Experiment::Scaling) {
            let eps: f64 = self.get("eps")?;
            if !(eps > 0.0 && eps < 0.5) {
                return Err(ConfigError::new("eps", format!("{eps} is outside (0, 1/2)")));
            }
        }
        if e == Experiment::Mixing && !self.flag("exact")? {
            if let StartSpec::Explicit(_) = self.start()? {
                return Err(ConfigError::new("start", "Monte Carlo mixing needs `worst` or `flat`"));
            }
        }
        Ok(())
    }

    fn check_value(&self, key: &str) -> Result<(), ConfigError> {
        match key {
            "start" => self.start().map(drop),
            "horizon" | "t" | "trials" | "max_horizon" => self.opt::<u64>(key).map(drop),
            "x" | "y" | "references" => self.opt::<usize>(key).map(drop),
            "m" => self.opt::<u32>(key).map(drop),
            "cap" => self.opt::<u128>(key).map(drop),
            "eps" | "drift" => self.opt::<f64>(key).map(drop),
            "levels" | "lambda" => self.float_list(key).map(drop),
            "observe" => self.observe().map(drop),
            "stationary" | "exact" => self.flag(key).map(drop),
            _ => Ok(()),
        }
    }

    pub fn experiment(&self) -> Experiment {
        self.experiment
    }

    /// All settings, sorted by key.
    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn opt<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        self.values
            .get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| ConfigError::new(key, format!("cannot parse `{v}`")))
            })
            .transpose()
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T, ConfigError> {
        self.opt(key)?.ok_or_else(|| ConfigError::new(key, "missing"))
    }

    pub fn flag(&self, key: &str) -> Result<bool, ConfigError> {
        Ok(self.opt::<bool>(key)?.unwrap_or(false))
    }

    pub fn site_list(&self) -> Result<Vec<usize>, ConfigError> {
        let raw = self.values.get("L").ok_or_else(|| ConfigError::new("L", "missing"))?;
        let sites: Vec<usize> = parse_list(raw, "L")?;
        if sites.is_empty() || sites.contains(&0) {
            return Err(ConfigError::new("L", "site counts must be positive"));
        }
        if sites.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ConfigError::new("L", "site counts must be strictly increasing"));
        }
        Ok(sites)
    }

    pub fn sites(&self) -> Result<usize, ConfigError> {
        Ok(self.site_list()?[0])
    }

    pub fn particles(&self) -> Result<Particles, ConfigError> {
        if let Some(raw) = self.values.get("N") {
            let n: f64 = raw
                .parse()
                .map_err(|_| ConfigError::new("N", format!("cannot parse `{raw}`")))?;
            if !(n >= 0.0 && n.fract() == 0.0 && n <= f64::from(u32::MAX)) {
                return Err(ConfigError::new("N", format!("{raw} is not a non-negative integer")));
            }
            return Ok(Particles::Count(n as u32));
        }
        let r: f64 = self.get("r")?;
        Ok(Particles::Density(r))
    }

    pub fn start(&self) -> Result<StartSpec, ConfigError> {
        self.get("start")
    }

    pub fn float_list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        let raw = self.values.get(key).ok_or_else(|| ConfigError::new(key, "missing"))?;
        parse_list(raw, key)
    }

    pub fn observe(&self) -> Result<crate::process::Observables, ConfigError> {
        let mut obs = crate::process::Observables::NONE;
        for tok in self.raw("observe").unwrap_or("").split(',').map(str::trim) {
            match tok {
                "" => {}
                "nonempty" => obs.nonempty = true,
                "sup_norm" => obs.sup_norm = true,
                "occupancy" => obs.occupancy = true,
                other => return Err(ConfigError::new("observe", format!("unknown observable `{other}`"))),
            }
        }
        Ok(obs)
    }

    pub fn out(&self) -> Option<PathBuf> {
        self.values.get("out").map(PathBuf::from)
    }

    /// Manifest text: every setting as `key=value`, followed by comments.
    pub fn manifest(&self, comments: &[(&str, String)]) -> String {
        let mut text = String::new();
        for (k, v) in &self.values {
            text.push_str(&format!("{k}={v}\n"));
        }
        for (k, v) in comments {
            text.push_str(&format!("# {k}: {v}\n"));
        }
        text
    }
}

fn parse_list<T: FromStr>(raw: &str, field: &str) -> Result<Vec<T>, ConfigError> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| ConfigError::new(field, format!("cannot parse `{s}`")))
        })
        .collect()
}

/// Result of reading the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum Invocation {
    Help,
    Run(ExperimentConfig),
}

/// Reads `[subcommand] [--config FILE] [--key value | --flag]...`.
///
/// File values are read first and flags override them.
pub fn parse_args<I, S>(args: I) -> Result<Invocation, ConfigError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let args: Vec<String> = args.into_iter().map(|s| s.as_ref().to_string()).collect();
    let mut flags = BTreeMap::new();
    let mut config_file = None;
    let mut i = 0;
    while i < args.len() {
        let arg = &args[i];
        i += 1;
        let Some(body) = arg.strip_prefix("--") else {
            if flags.contains_key("experiment") {
                return Err(ConfigError::new("experiment", format!("unexpected argument `{arg}`")));
            }
            flags.insert("experiment".to_string(), arg.clone());
            continue;
        };
        if body == "help" {
            return Ok(Invocation::Help);
        }
        let (key, value) = match body.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None if BOOLEAN_FLAGS.contains(&body) => (body.to_string(), "true".to_string()),
            None => {
                let v = args
                    .get(i)
                    .ok_or_else(|| ConfigError::new(body, "flag needs a value"))?
                    .clone();
                i += 1;
                (body.to_string(), v)
            }
        };
        if key == "config" {
            config_file = Some(value);
        } else {
            flags.insert(key, value);
        }
    }
    let mut pairs = match config_file {
        Some(path) => {
            let text =
                std::fs::read_to_string(&path).map_err(|e| ConfigError::new("config", format!("{path}: {e}")))?;
            ExperimentConfig::parse_file(&text)?
        }
        None if flags.is_empty() => return Ok(Invocation::Help),
        None => BTreeMap::new(),
    };
    pairs.extend(flags);
    ExperimentConfig::from_pairs(pairs).map(Invocation::Run)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(args: &[&str]) -> Result<ExperimentConfig, ConfigError> {
        match parse_args(args)? {
            Invocation::Run(c) => Ok(c),
            Invocation::Help => panic!("unexpected help"),
        }
    }

    #[test]
    fn defaults_are_filled_in() {
        let c = config(&["exact", "--L", "2", "--N", "2", "--stationary"]).unwrap();
        assert_eq!(c.raw("stationary"), Some("true"));
        assert_eq!(c.raw("t"), Some("0"));
        assert_eq!(c.raw("start"), Some("worst"));
    }

    #[test]
    fn exactly_one_of_n_and_r() {
        assert_eq!(config(&["exact", "--L", "2"]).unwrap_err().field, "N");
        assert_eq!(
            config(&["exact", "--L", "2", "--N", "2", "--r", "1"])
                .unwrap_err()
                .field,
            "N"
        );
        assert!(config(&["exact", "--L", "2", "--r", "1"]).is_ok());
    }

    #[test]
    fn errors_name_the_field() {
        assert_eq!(config(&["exact", "--L", "2", "--N", "2.5"]).unwrap_err().field, "N");
        assert_eq!(config(&["exact", "--L", "3", "--r", "0.5"]).unwrap_err().field, "r");
        let e = config(&["mixing", "--L", "2", "--N", "2", "--eps", "0.6", "--exact"]).unwrap_err();
        assert_eq!(e.field, "eps");
        assert_eq!(config(&["tails", "--L", "4", "--N", "4"]).unwrap_err().field, "seed");
        assert_eq!(
            config(&["exact", "--L", "2", "--N", "2", "--bogus", "1"])
                .unwrap_err()
                .field,
            "bogus"
        );
        assert_eq!(config(&["simulate", "--L", "x", "--N", "2"]).unwrap_err().field, "L");
    }

    #[test]
    fn seed_is_optional_for_deterministic_runs() {
        assert!(config(&["mixing", "--L", "2", "--N", "2", "--eps", "0.3", "--exact"]).is_ok());
        assert!(config(&["na-check"]).is_ok());
        assert_eq!(config(&["mixing", "--L", "2", "--N", "2"]).unwrap_err().field, "seed");
    }

    #[test]
    fn start_syntax() {
        assert_eq!(
            "worst".parse::<StartSpec>().unwrap(),
            StartSpec::Class(StartClass::Worst)
        );
        assert_eq!(
            "3,0,0".parse::<StartSpec>().unwrap(),
            StartSpec::Explicit(vec![3, 0, 0])
        );
        assert!("3,x".parse::<StartSpec>().is_err());
        let spec = StartSpec::Explicit(vec![3, 0]);
        assert_eq!(spec.configuration(3, 3).unwrap_err().field, "start");
        assert_eq!(spec.configuration(2, 2).unwrap_err().field, "start");
    }

    #[test]
    fn flags_override_file_and_manifest_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "# comment\nexperiment=empty\nL=8\nN=8\nseed=1\ntrials=2000\n").unwrap();
        let p = path.to_str().unwrap();
        let c = config(&["--config", p, "--trials", "3000"]).unwrap();
        assert_eq!(c.raw("trials"), Some("3000"));
        let manifest = c.manifest(&[("version", "x".into())]);
        let again = ExperimentConfig::from_pairs(ExperimentConfig::parse_file(&manifest).unwrap()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn no_arguments_means_help() {
        assert_eq!(parse_args(Vec::<String>::new()).unwrap(), Invocation::Help);
        assert_eq!(parse_args(["--help"]).unwrap(), Invocation::Help);
    }
}
