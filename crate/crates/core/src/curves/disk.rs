//! The unit disk `D` with density `2/(π(1 − |z|²)²)` against `dx∧dy`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::integrate::{smooth_box, Rule};
use super::C64;
use crate::error::{invalid, Result};

/// Closed form (`truncation = None`) or the partial sum
/// `(2/π) Σ_{n<N} (n + 1)|z|^{2n}` of the orthonormal-basis expansion.
pub fn disk_density(z: C64, truncation: Option<usize>) -> Result<f64> {
    let r2 = z.norm_sqr();
    if !(r2 < 1.0) {
        return Err(invalid(format!("point {z} is not inside the unit disk")));
    }
    Ok(match truncation {
        None => closed_form(z),
        Some(n) => partial_sum(r2, n),
    })
}

fn closed_form(z: C64) -> f64 {
    let w = 1.0 - z.norm_sqr();
    2.0 / (PI * w * w)
}

fn partial_sum(r2: f64, n: usize) -> f64 {
    let mut s = 0.0;
    let mut p = 1.0;
    for k in 0..n {
        s += (k + 1) as f64 * p;
        p *= r2;
    }
    2.0 / PI * s
}

/// Density of the disk of radius `r`: `(2/(πr²)) (1 − |z/r|²)^{-2}`.
pub fn subdisk_density(z: C64, r: f64) -> Result<f64> {
    if !(r > 0.0) || z.norm() >= r {
        return Err(invalid(format!(
            "point {z} is not inside the disk of radius {r}"
        )));
    }
    Ok(closed_form(z / r) / (r * r))
}

/// `φ_a(z) = (z − a)/(1 − āz)` and `|φ_a'(z)|²`.
pub fn mobius(a: C64, z: C64) -> (C64, f64) {
    let den = C64::new(1.0, 0.0) - a.conj() * z;
    let w = (z - a) / den;
    let d = (1.0 - a.norm_sqr()) / den.norm_sqr();
    (w, d * d)
}

/// `μ(D_r) = 2r²/(1 − r²)`.
pub fn disk_measure(r: f64) -> f64 {
    2.0 * r * r / (1.0 - r * r)
}

/// `∫_{|z|<r} ρ dA` by Gauss–Legendre in polar coordinates.
pub fn disk_measure_quadrature(density: &(dyn Fn(C64) -> f64 + Sync), r: f64) -> f64 {
    let rule = Rule::new(16);
    let f = |t: f64, theta: f64| t * density(C64::from_polar(t, theta));
    smooth_box(&f, &rule, [0.0, r, 0.0, 2.0 * PI], 1e-14)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusMeasure {
    pub radius: f64,
    pub closed_form: f64,
    pub quadrature: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationError {
    pub terms: usize,
    pub sup_error: f64,
    pub empirical_lipschitz: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiskReport {
    pub grid: usize,
    pub density_at_zero: f64,
    pub measures: Vec<RadiusMeasure>,
    /// `sup_{|z| ≤ 1/2}` of the truncation error, per truncation.
    pub truncations: Vec<TruncationError>,
    pub truncation_errors_decrease: bool,
    /// Gradient bound of the closed form on `|z| ≤ 1/2`, which dominates
    /// every partial sum.
    pub lipschitz_bound: f64,
    pub mobius_parameters: usize,
    pub mobius_max_relative_error: f64,
    pub subdisk_monotone: bool,
    pub exhaustion_monotone: bool,
    /// `max |ρ_{D_r} − ρ_D|` over grid points inside the smallest disk,
    /// for each radius.
    pub exhaustion_gaps: Vec<f64>,
}

pub const TRUNCATIONS: [usize; 6] = [10, 20, 30, 40, 50, 60];
const MOBIUS_PARAMETERS: usize = 10;

/// Runs the disk checks with the closed-form density.
pub fn disk_model_checks(radii: &[f64], grid: usize, seed: u64) -> Result<DiskReport> {
    disk_model_checks_with(&closed_form, radii, grid, seed)
}

/// Runs the disk checks against a caller-supplied density for `D`.
/// Partial sums are always computed from the series itself.
pub fn disk_model_checks_with(
    density: &(dyn Fn(C64) -> f64 + Sync),
    radii: &[f64],
    grid: usize,
    seed: u64,
) -> Result<DiskReport> {
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
        return Err(invalid("radii must lie in (0, 1)"));
    }
    if grid < 2 {
        return Err(invalid("grid needs at least 2 points per side"));
    }
    let mut sorted = radii.to_vec();
    sorted.sort_by(f64::total_cmp);
    let points: Vec<C64> = (0..grid)
        .flat_map(|i| (0..grid).map(move |j| (i, j)))
        .map(|(i, j)| {
            let t = |k: usize| -1.0 + 2.0 * k as f64 / (grid - 1) as f64;
            C64::new(t(i), t(j))
        })
        .filter(|z| z.norm() < 1.0)
        .collect();

    let measures = sorted
        .iter()
        .map(|&r| RadiusMeasure {
            radius: r,
            closed_form: disk_measure(r),
            quadrature: disk_measure_quadrature(density, r),
        })
        .collect();

    // Uniform convergence on |z| ≤ 1/2: grid points plus the boundary circle.
    let half: Vec<C64> = points
        .iter()
        .cloned()
        .filter(|z| z.norm() <= 0.5)
        .chain((0..4 * grid).map(|k| C64::from_polar(0.5, 2.0 * PI * k as f64 / (4 * grid) as f64)))
        .collect();
    let step = 2.0 / (grid - 1) as f64;
    let truncations: Vec<TruncationError> = TRUNCATIONS
        .iter()
        .map(|&n| {
            let sup_error = half
                .iter()
                .map(|&z| (partial_sum(z.norm_sqr(), n) - density(z)).abs())
                .fold(0.0, f64::max);
            let mut lip: f64 = 0.0;
            for &z in &half {
                for dz in [C64::new(step, 0.0), C64::new(0.0, step)] {
                    let w = z + dz;
                    if w.norm() <= 0.5 {
                        let d = (partial_sum(w.norm_sqr(), n) - partial_sum(z.norm_sqr(), n)).abs();
                        lip = lip.max(d / step);
                    }
                }
            }
            TruncationError {
                terms: n,
                sup_error,
                empirical_lipschitz: lip,
            }
        })
        .collect();
    let truncation_errors_decrease = truncations
        .windows(2)
        .all(|w| w[1].sup_error <= w[0].sup_error);
    // d/dr of 2/(π(1 − r²)²) at r = 1/2
    let lipschitz_bound = 8.0 * 0.5 / (PI * (1.0f64 - 0.25).powi(3));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mobius_max_relative_error: f64 = 0.0;
    for _ in 0..MOBIUS_PARAMETERS {
        let a = C64::from_polar(rng.gen_range(0.0..0.9), rng.gen_range(0.0..2.0 * PI));
        for &z in points.iter().filter(|z| z.norm() < 0.95) {
            let (w, jac) = mobius(a, z);
            let lhs = density(w) * jac;
            let rhs = density(z);
            mobius_max_relative_error = mobius_max_relative_error.max((lhs - rhs).abs() / rhs);
        }
    }

    let mut subdisk_monotone = true;
    for &r in &sorted {
        for &z in points.iter().filter(|z| z.norm() < r) {
            if density(z / r) / (r * r) < density(z) {
                subdisk_monotone = false;
            }
        }
    }

    let inner: Vec<C64> = points
        .iter()
        .cloned()
        .filter(|z| z.norm() < sorted[0])
        .collect();
    let mut exhaustion_monotone = true;
    let mut previous: Option<Vec<f64>> = None;
    let mut exhaustion_gaps = Vec::new();
    for &r in &sorted {
        let gaps: Vec<f64> = inner
            .iter()
            .map(|&z| density(z / r) / (r * r) - density(z))
            .collect();
        if let Some(prev) = &previous {
            if gaps.iter().zip(prev).any(|(g, p)| g > p) {
                exhaustion_monotone = false;
            }
        }
        exhaustion_gaps.push(gaps.iter().cloned().fold(0.0, f64::max));
        previous = Some(gaps);
    }

    Ok(DiskReport {
        grid,
        density_at_zero: density(C64::new(0.0, 0.0)),
        measures,
        truncations,
        truncation_errors_decrease,
        lipschitz_bound,
        mobius_parameters: MOBIUS_PARAMETERS,
        mobius_max_relative_error,
        subdisk_monotone,
        exhaustion_monotone,
        exhaustion_gaps,
    })
}
