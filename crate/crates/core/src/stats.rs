//! Small statistical helpers shared by the simulation and reporting code.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Mergeable running moments (count, mean, sum of squared deviations).
///
/// `merge` uses the pairwise update of Chan et al., so partial accumulators can
/// be combined in any grouping. Bit-for-bit reproducibility still requires a
/// fixed merge order; callers that need it fold values sequentially.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n;
        self.m2 += other.m2 + delta * delta * (self.count as f64) * (other.count as f64) / n;
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; zero for fewer than two observations.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    /// Standard error of the mean, `stddev / sqrt(count)`.
    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

impl FromIterator<f64> for Moments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = Moments::new();
        for x in iter {
            m.push(x);
        }
        m
    }
}

/// Two-sided standard-normal critical value for confidence `level` (e.g. 0.99).
pub fn normal_critical(level: f64) -> f64 {
    let normal = Normal::standard();
    normal.inverse_cdf(0.5 + level / 2.0)
}

/// Ordinary least-squares slope and intercept of `y` on `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Slope of `ln(value)` against `ln(rank)` over points with positive value.
/// Ranks are 1-based and given by position in `values`.
pub fn log_log_slope(values: &[f64]) -> Option<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0)
        .map(|(i, v)| (((i + 1) as f64).ln(), v.ln()))
        .unzip();
    linear_fit(&xs, &ys).map(|(slope, _)| slope)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquaredTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson goodness-of-fit of observed counts against expected probabilities.
///
/// Adjacent categories are pooled left to right until each pooled expected
/// count is at least `min_expected`; a short remainder is folded into the last
/// pool. Returns `None` when fewer than two pools remain.
pub fn chi_squared_gof(
    observed: &[u64],
    probabilities: &[f64],
    min_expected: f64,
) -> Option<ChiSquaredTest> {
    assert_eq!(observed.len(), probabilities.len());
    let total: u64 = observed.iter().sum();
    if total == 0 {
        return None;
    }
    let total = total as f64;
    let mut pools: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probabilities) {
        obs += o as f64;
        exp += p * total;
        if exp >= min_expected {
            pools.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    if exp > 0.0 || obs > 0.0 {
        match pools.last_mut() {
            Some(last) => {
                last.0 += obs;
                last.1 += exp;
            }
            None => pools.push((obs, exp)),
        }
    }
    if pools.len() < 2 {
        return None;
    }
    let statistic = pools.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = pools.len() - 1;
    let dist = ChiSquared::new(dof as f64).ok()?;
    Some(ChiSquaredTest {
        statistic,
        dof,
        p_value: 1.0 - dist.cdf(statistic),
    })
}
