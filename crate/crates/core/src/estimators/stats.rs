//! Interval and regression helpers shared by the estimators.

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// 95% Wilson score interval for `hits` successes out of `trials`.
pub fn wilson(hits: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z_95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let low = if hits == 0 { 0.0 } else { (center - half).clamp(0.0, p) };
    let high = if hits == trials {
        1.0
    } else {
        (center + half).clamp(p, 1.0)
    };
    (low, high)
}

/// Monte Carlo point estimate with its confidence interval and provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub trials: u64,
    pub master_seed: u64,
}

impl Estimate {
    /// Proportion `hits / trials` with a Wilson interval.
    pub fn proportion(hits: u64, trials: u64, master_seed: u64) -> Self {
        let value = if trials == 0 { 0.0 } else { hits as f64 / trials as f64 };
        let (ci_low, ci_high) = wilson(hits, trials);
        Self {
            value,
            ci_low,
            ci_high,
            trials,
            master_seed,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.ci_low <= x && x <= self.ci_high
    }

    /// `true` when `x` lies within `k` binomial standard errors of the
    /// point estimate, using `x` itself for the variance.
    pub fn within_sigmas(&self, x: f64, k: f64) -> bool {
        let se = (x * (1.0 - x) / self.trials as f64).sqrt();
        (self.value - x).abs() <= k * se + 1e-12
    }
}

/// Ordinary least squares line `y = intercept + slope · x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Least squares fit; `None` with fewer than two distinct abscissae.
pub fn linear_fit(points: &[(f64, f64)]) -> Option<LinearFit> {
    let n = points.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Some(LinearFit {
        slope,
        intercept,
        r_squared,
        points: n,
    })
}
