//! Hyperelliptic curves `y² = f(x)` with the basis `ω_i = x^{i−1} dx/y`,
//! their period matrices and Hodge Gram matrices, the canonical density
//! in the chart `x`, and the Poincaré disk model.
//!
//! Densities are reported against `(i/2) dz∧dz̄ = dx∧dy`.

mod density;
mod disk;
mod integrate;
mod periods;

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub use density::{
    canonical_density, extremal_check, hodge_gram, measure_of_region, regular_sample_points,
    total_mass, total_mass_with_order, CanonicalDensity, ExtremalReport, GramMatrix, MassReport,
    Rectangle, BRANCH_PROXIMITY,
};
pub use disk::{
    disk_density, disk_measure, disk_measure_quadrature, disk_model_checks, disk_model_checks_with,
    mobius, subdisk_density, DiskReport,
};
pub use integrate::{integrate_plane, integrate_rectangle, DEFAULT_ORDER};
pub use periods::{periods, BranchOrdering, PeriodData, MIN_PERIOD_NODES};

pub type C64 = Complex<f64>;

/// Roots closer than this multiple of the root scale are treated as equal.
pub const ROOT_SEPARATION: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CurveJson", into = "CurveJson")]
pub struct HyperellipticCurve {
    coefficients: Vec<C64>,
    genus: u32,
    branch_points: Vec<C64>,
}

/// Coefficients in ascending powers of `x`, each as `[re, im]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct CurveJson {
    coefficients: Vec<[f64; 2]>,
}

impl TryFrom<CurveJson> for HyperellipticCurve {
    type Error = Error;
    fn try_from(j: CurveJson) -> Result<Self> {
        make_curve(
            &j.coefficients
                .iter()
                .map(|c| C64::new(c[0], c[1]))
                .collect::<Vec<_>>(),
        )
    }
}

impl From<HyperellipticCurve> for CurveJson {
    fn from(c: HyperellipticCurve) -> Self {
        CurveJson {
            coefficients: c.coefficients.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl HyperellipticCurve {
    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Ascending coefficients.
    pub fn coefficients(&self) -> &[C64] {
        &self.coefficients
    }

    pub fn leading(&self) -> C64 {
        *self.coefficients.last().expect("nonempty")
    }

    /// Finite branch points (roots of `f`).
    pub fn branch_points(&self) -> &[C64] {
        &self.branch_points
    }

    /// `∞` is a branch point when `deg f` is odd.
    pub fn branched_at_infinity(&self) -> bool {
        self.degree() % 2 == 1
    }

    pub fn eval(&self, x: C64) -> C64 {
        horner(&self.coefficients, x)
    }

    pub fn eval_derivative(&self, x: C64) -> C64 {
        let n = self.coefficients.len();
        let mut acc = C64::new(0.0, 0.0);
        for k in (1..n).rev() {
            acc = acc * x + self.coefficients[k] * k as f64;
        }
        acc
    }

    pub fn centroid(&self) -> C64 {
        self.branch_points.iter().sum::<C64>() / self.branch_points.len() as f64
    }

    /// `max(1, max |e|)`.
    pub fn scale(&self) -> f64 {
        self.branch_points
            .iter()
            .map(|z| z.norm())
            .fold(1.0, f64::max)
    }

    /// Distance to the nearest finite branch point.
    pub fn nearest_branch_point(&self, x: C64) -> (usize, f64) {
        self.branch_points
            .iter()
            .enumerate()
            .map(|(k, e)| (k, (x - e).norm()))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
    }

    /// The curve `y² = f(λu)` in the variable `u`.
    pub fn rescaled(&self, lambda: C64) -> Result<HyperellipticCurve> {
        let mut p = C64::new(1.0, 0.0);
        let coeffs: Vec<C64> = self
            .coefficients
            .iter()
            .map(|c| {
                let v = c * p;
                p *= lambda;
                v
            })
            .collect();
        make_curve(&coeffs)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("curve serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| invalid(format!("curve JSON: {e}")))
    }
}

fn horner(coeffs: &[C64], x: C64) -> C64 {
    coeffs
        .iter()
        .rev()
        .fold(C64::new(0.0, 0.0), |acc, &c| acc * x + c)
}

/// Curve from ascending coefficients. Genus is `⌈deg/2⌉ − 1`.
pub fn make_curve(coefficients: &[C64]) -> Result<HyperellipticCurve> {
    let mut coeffs = coefficients.to_vec();
    while coeffs.last().is_some_and(|c| *c == C64::new(0.0, 0.0)) {
        coeffs.pop();
    }
    if coeffs
        .iter()
        .any(|c| !c.re.is_finite() || !c.im.is_finite())
    {
        return Err(invalid("coefficients must be finite"));
    }
    let deg = coeffs.len().saturating_sub(1);
    if deg < 3 {
        return Err(invalid(format!("need degree at least 3, got {deg}")));
    }
    let roots = polynomial_roots(&coeffs)?;
    let scale = roots.iter().map(|z| z.norm()).fold(1.0, f64::max);
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            if (roots[i] - roots[j]).norm() <= ROOT_SEPARATION * scale {
                return Err(Error::SingularCurve(format!(
                    "roots {} and {} coincide within {:e}",
                    roots[i],
                    roots[j],
                    ROOT_SEPARATION * scale
                )));
            }
        }
    }
    Ok(HyperellipticCurve {
        coefficients: coeffs,
        genus: (deg as u32).div_ceil(2) - 1,
        branch_points: roots,
    })
}

/// Real-coefficient convenience constructor.
pub fn make_real_curve(coefficients: &[f64]) -> Result<HyperellipticCurve> {
    make_curve(
        &coefficients
            .iter()
            .map(|&c| C64::new(c, 0.0))
            .collect::<Vec<_>>(),
    )
}

/// All roots of a polynomial (ascending coefficients) by Aberth iteration
/// followed by Newton polishing.
pub fn polynomial_roots(coeffs: &[C64]) -> Result<Vec<C64>> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let monic: Vec<C64> = coeffs.iter().map(|c| c / lead).collect();
    let deriv: Vec<C64> = (1..=n).map(|k| monic[k] * k as f64).collect();
    let bound = 1.0 + monic[..n].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut z: Vec<C64> = (0..n)
        .map(|k| {
            C64::from_polar(
                0.5 * bound,
                2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4,
            )
        })
        .collect();
    let tol = 1e-15 * bound;
    let mut converged = false;
    for _ in 0..1000 {
        let mut worst: f64 = 0.0;
        for k in 0..n {
            let p = horner(&monic, z[k]);
            if p == C64::new(0.0, 0.0) {
                continue;
            }
            let ratio = p / horner(&deriv, z[k]);
            let repulsion: C64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| (z[k] - z[j]).inv())
                .sum();
            let step = ratio / (C64::new(1.0, 0.0) - ratio * repulsion);
            if step.re.is_finite() && step.im.is_finite() {
                z[k] -= step;
                worst = worst.max(step.norm());
            }
        }
        if worst <= tol {
            converged = true;
            break;
        }
    }
    for zk in z.iter_mut() {
        for _ in 0..3 {
            let d = horner(&deriv, *zk);
            if d.norm() > 0.0 {
                let step = horner(&monic, *zk) / d;
                if step.re.is_finite() && step.im.is_finite() {
                    *zk -= step;
                }
            }
        }
    }
    if !converged {
        // Clustered roots converge slowly; callers reject them by separation.
        let residual = z
            .iter()
            .map(|&x| horner(&monic, x).norm())
            .fold(0.0, f64::max);
        if residual > 1e-6 * bound.powi(n as i32) {
            return Err(Error::Precision(format!(
                "root finder did not converge (residual {residual:e})"
            )));
        }
    }
    Ok(z)
}
