//! Post-processing of sampled `C(r, t)` fields and entropy series: threshold
//! contours and front / entanglement velocities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values on a `(site, time)` grid, stored as `values[site_index][time_index]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScramblingField {
    sites: Vec<usize>,
    times: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl ScramblingField {
    pub fn new(sites: Vec<usize>, times: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if sites.is_empty() || times.is_empty() {
            return Err(Error::Empty("scrambling field"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidSpec("time grid must be finite and strictly increasing".into()));
        }
        if values.len() != sites.len() {
            return Err(Error::DimensionMismatch {
                expected: sites.len(),
                got: values.len(),
            });
        }
        for row in &values {
            if row.len() != times.len() {
                return Err(Error::DimensionMismatch {
                    expected: times.len(),
                    got: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidSpec("field values must be finite".into()));
            }
        }
        Ok(Self { sites, times, values })
    }

    /// Builds a field by evaluating `f(site, time)` on the grid.
    pub fn from_fn(sites: Vec<usize>, times: Vec<f64>, mut f: impl FnMut(usize, f64) -> f64) -> Result<Self> {
        let values = sites
            .iter()
            .map(|&r| times.iter().map(|&t| f(r, t)).collect())
            .collect();
        Self::new(sites, times, values)
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn series(&self, site: usize) -> Option<&[f64]> {
        self.sites
            .iter()
            .position(|&r| r == site)
            .map(|i| self.values[i].as_slice())
    }
}

/// First-crossing times `t_theta(r)`; `None` where the site never reaches
/// the threshold inside the sampled window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourResult {
    pub threshold: f64,
    pub sites: Vec<usize>,
    pub crossings: Vec<Option<f64>>,
    /// Number of upward crossings per site; values above 1 flag oscillation.
    pub crossing_counts: Vec<usize>,
}

impl ContourResult {
    /// `(site, time)` pairs for sites that cross.
    pub fn points(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.sites
            .iter()
            .zip(&self.crossings)
            .filter_map(|(&r, t)| t.map(|t| (r, t)))
    }

    pub fn crossing(&self, site: usize) -> Option<f64> {
        self.sites
            .iter()
            .position(|&r| r == site)
            .and_then(|i| self.crossings[i])
    }
}

/// First time the series reaches `threshold` from below, linearly
/// interpolated, together with the number of upward crossings.
pub fn first_crossing(times: &[f64], values: &[f64], threshold: f64) -> (Option<f64>, usize) {
    let mut first = None;
    let mut count = 0;
    if let Some(&v0) = values.first() {
        if v0 >= threshold {
            first = Some(times[0]);
            count = 1;
        }
    }
    for k in 1..values.len() {
        let (a, b) = (values[k - 1], values[k]);
        if a < threshold && b >= threshold {
            count += 1;
            if first.is_none() {
                let frac = (threshold - a) / (b - a);
                first = Some(times[k - 1] + frac * (times[k] - times[k - 1]));
            }
        }
    }
    (first, count)
}

pub fn extract_contour(field: &ScramblingField, threshold: f64) -> ContourResult {
    let (crossings, crossing_counts) = field
        .values
        .iter()
        .map(|row| first_crossing(&field.times, row, threshold))
        .unzip();
    ContourResult {
        threshold,
        sites: field.sites.clone(),
        crossings,
        crossing_counts,
    }
}

/// Least-squares slope of a linear fit together with its window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VelocityFit {
    pub velocity: f64,
    pub intercept: f64,
    pub window: (f64, f64),
    /// RMS deviation of the fitted points; time units for `v_B`, entropy
    /// units for `v_E`.
    pub residual: f64,
    pub points: usize,
}

/// Ordinary least squares `y = slope * x + intercept`.
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

/// Sites `4..=N-2`, skipping the seed and the open boundary.
pub fn default_butterfly_window(n_qubits: usize) -> (usize, usize) {
    (4, n_qubits.saturating_sub(2))
}

/// `v_B = dr/dt` from the contour points with sites in `window` (inclusive).
pub fn fit_butterfly_velocity(contour: &ContourResult, window: (usize, usize)) -> Result<VelocityFit> {
    let (r, t): (Vec<f64>, Vec<f64>) = contour
        .points()
        .filter(|(r, _)| (window.0..=window.1).contains(r))
        .map(|(r, t)| (r as f64, t))
        .unzip();
    if r.len() < 3 {
        return Err(Error::InsufficientPoints { needed: 3, got: r.len() });
    }
    let (velocity, intercept) = linear_fit(&t, &r);
    // residual measured along t, the sampled axis
    let residual = if velocity.abs() > 0.0 {
        let ss: f64 = r
            .iter()
            .zip(&t)
            .map(|(ri, ti)| (ti - (ri - intercept) / velocity).powi(2))
            .sum();
        (ss / r.len() as f64).sqrt()
    } else {
        f64::INFINITY
    };
    Ok(VelocityFit {
        velocity,
        intercept,
        window: (window.0 as f64, window.1 as f64),
        residual,
        points: r.len(),
    })
}

/// Time window between the first samples where the entropy reaches
/// `0.1 S_P` and `0.5 S_P`.
pub fn default_entanglement_window(times: &[f64], entropies: &[f64], page: f64) -> Option<(f64, f64)> {
    let lo = first_crossing(times, entropies, 0.1 * page).0?;
    let hi = first_crossing(times, entropies, 0.5 * page).0?;
    (hi > lo).then_some((lo, hi))
}

/// `v_E = dS/dt` from samples with time in `window` (inclusive).
pub fn fit_entanglement_velocity(times: &[f64], entropies: &[f64], window: (f64, f64)) -> Result<VelocityFit> {
    if times.len() != entropies.len() {
        return Err(Error::DimensionMismatch {
            expected: times.len(),
            got: entropies.len(),
        });
    }
    let (t, s): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(entropies)
        .filter(|(t, _)| **t >= window.0 && **t <= window.1)
        .map(|(t, s)| (*t, *s))
        .unzip();
    if t.len() < 3 {
        return Err(Error::InsufficientPoints { needed: 3, got: t.len() });
    }
    let (velocity, intercept) = linear_fit(&t, &s);
    let ss: f64 = t
        .iter()
        .zip(&s)
        .map(|(ti, si)| (si - velocity * ti - intercept).powi(2))
        .sum();
    Ok(VelocityFit {
        velocity,
        intercept,
        window,
        residual: (ss / t.len() as f64).sqrt(),
        points: t.len(),
    })
}
