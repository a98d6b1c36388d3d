//! Reproducible experiment runner behind the `rbb` binary.
//!
//! An experiment is described by `key=value` settings, read from a file
//! (`--config FILE`) and/or flags (`--key value`); flags win. Every run
//! produces one or more CSV artifacts and a manifest listing the full
//! settings, which can be fed back through `--config` to reproduce the CSV
//! bytes with any worker count.

mod config;
mod run;

pub use config::{parse_args, ConfigError, Experiment, ExperimentConfig, Invocation, Particles, StartSpec};
pub use run::{fmt_f64, run, run_to_dir, Artifact, RunError, RunOutput};

pub const HELP: &str = "\
rbb: simulation and verification lab for repeated balls-into-bins

USAGE:
    rbb <experiment> [--key value]... [--flag]...
    rbb --config FILE [--key value]...

Settings come from FILE (key=value lines, `#` comments) and flags; flags
override the file. With --out DIR the CSV artifacts and manifest.txt are
written to DIR; otherwise the CSVs are printed. Sites are numbered from 0.

COMMON:
    --L n            number of sites (scaling: comma list, increasing)
    --N n | --r x    particles, or density with N = r*L (exactly one)
    --seed s         master seed (required by stochastic experiments)
    --trials n       trial count
    --out DIR        output directory
    --workers k      worker threads; results do not depend on k
    --start S        comma-separated occupancies, `worst` or `flat`

EXPERIMENTS AND CSV SCHEMAS:
  simulate   --start (flat) --horizon (10) --observe (nonempty,sup_norm,occupancy)
      trajectory.csv: t[,nonempty][,sup_norm][,occ_0..occ_{L-1}]
      final.csv:      occ_0..occ_{L-1}
  exact      --start (worst) --t (0) --stationary --cap (2000000)
      distribution.csv: index,occ_0..occ_{L-1},probability
      (law at time t from start, or the stationary law with --stationary)
  couple     --start (worst) --x (0) --y (1) --t (10) --trials (100000) --exact
      Tagged coupling whose X copy is `start` and whose tagged particle
      sits at x in the X copy and at y in the Y copy.
      survival.csv: t,estimate,ci_low,ci_high,trials,seed[,exact]
  tails      --start (flat) --t (50) --levels (2,...,8) --drift (0.632) --trials (10000)
      tail_levels.csv: drift,level,hits,estimate,ci_low,ci_high,trials,seed
      tail_fit.csv:    drift,rate,intercept,r_squared,levels_used
  empty      --start (flat) --t (2) --eps (0.2) --trials (10000)
      empty_fraction.csv: L,N,t,eps,estimate,ci_low,ci_high,trials,seed
      (probability that at least a 1-eps fraction of sites is occupied)
  mixing     --start (worst) --eps (0.25) --exact --trials (4, per pair)
             --references (32) --max_horizon --cap (2000000)
      mixing_exact.csv: L,N,eps,start,mixing_time
      mixing.csv:       L,N,eps,start,time,grid_time,bound,ci_low,ci_high,
                        runs,mean_path_len,max_horizon,trials_per_pair,seed
      With --exact and start `worst` the maximum over all starts is used.
  scaling    --L list --r x --eps (0.25) --trials (4) --references (32) --max_horizon
      scaling.csv:         as mixing.csv, one row per (L, start class)
      scaling_summary.csv: quantity,L,value
  na-check   --L (6) --m (6) --lambda (0.5,1,2)
      na_check.csv: m,L,lambda,lhs,rhs,holds  (all m' <= m, L' <= L)

Numbers are written in shortest round-trip form. Times that exceed the
search horizon are written as `censored`.
";
