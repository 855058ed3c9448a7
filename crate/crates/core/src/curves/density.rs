use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::integrate::{integrate_plane, integrate_rectangle, DEFAULT_ORDER};
use super::periods::PeriodData;
use super::{HyperellipticCurve, C64};
use crate::error::{invalid, Error, Result};

const HERMITIAN_TOLERANCE: f64 = 1e-9;
/// Points closer than this to a branch point are rejected.
pub const BRANCH_PROXIMITY: f64 = 1e-6;
/// Rectangles must keep branch points this far from their boundary.
pub const REGION_MARGIN: f64 = 1e-4;
const MASS_DOUBLING_TOLERANCE: f64 = 1e-3;

/// `G_ij = (ω_i, ω_j) = (i/2) ∫ ω_i ∧ ω̄_j`.
#[derive(Clone, Debug)]
pub struct GramMatrix {
    matrix: DMatrix<C64>,
    min_eigenvalue: f64,
    hermitian_defect: f64,
}

impl GramMatrix {
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    /// `max |G − Gᴴ| / max |G|` before symmetrization.
    pub fn hermitian_defect(&self) -> f64 {
        self.hermitian_defect
    }

    pub fn inverse(&self) -> DMatrix<C64> {
        self.matrix
            .clone()
            .try_inverse()
            .expect("positive definite")
    }

    /// Largest `|G_ij| / √(G_ii G_jj)` over `i ≠ j`.
    pub fn off_diagonal_ratio(&self) -> f64 {
        let g = &self.matrix;
        let mut worst: f64 = 0.0;
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                if i != j {
                    worst = worst.max(g[(i, j)].norm() / (g[(i, i)].re * g[(j, j)].re).sqrt());
                }
            }
        }
        worst
    }
}

/// Gram matrix from the period matrix by the bilinear relation
/// `∫ α∧β = P(α)ᵀ J^{-T} P(β)`, with `J` the intersection matrix of the
/// cycles carrying the periods `P`.
pub fn hodge_gram(curve: &HyperellipticCurve, p: &PeriodData) -> Result<GramMatrix> {
    let g = curve.genus() as usize;
    if p.periods.nrows() != g || p.periods.ncols() != 2 * g {
        return Err(invalid("period matrix has the wrong shape"));
    }
    let j = p.intersection_matrix();
    let j_inv = j
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Convention("intersection matrix is singular".into()))?;
    let j_inv_t = j_inv.transpose().map(|v| C64::new(v.round(), 0.0));
    let raw = &p.periods * j_inv_t * p.periods.adjoint() * C64::new(0.0, 0.5);
    let scale = raw.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let defect = (&raw - raw.adjoint())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        / scale;
    if !(defect <= HERMITIAN_TOLERANCE) {
        return Err(Error::Convention(format!(
            "Gram matrix is not Hermitian (relative defect {defect:e})"
        )));
    }
    let matrix = (&raw + raw.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(matrix.clone());
    let min_eigenvalue = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if !(min_eigenvalue > 0.0) {
        return Err(Error::Convention(format!(
            "Gram matrix is not positive definite: eigenvalues {:?}, intersection {:?}",
            eig.eigenvalues.as_slice(),
            p.intersection
        )));
    }
    Ok(GramMatrix {
        matrix,
        min_eigenvalue,
        hermitian_defect: defect,
    })
}

/// `ρ(x) = Σ_{ij} (G⁻¹)_{ji} a_i(x) ā_j(x)` with `a_i = x^{i−1}/y`.
#[derive(Clone, Debug)]
pub struct CanonicalDensity {
    curve: HyperellipticCurve,
    inverse: DMatrix<C64>,
}

impl CanonicalDensity {
    pub fn new(curve: &HyperellipticCurve, gram: &GramMatrix) -> Self {
        Self {
            curve: curve.clone(),
            inverse: gram.inverse(),
        }
    }

    pub fn curve(&self) -> &HyperellipticCurve {
        &self.curve
    }

    /// `(1, x, …, x^{g−1}) / y(x)` up to a unimodular factor.
    pub fn coefficients(&self, x: C64) -> DVector<C64> {
        let g = self.curve.genus() as usize;
        let y = self.curve.eval(x).sqrt();
        let mut p = C64::new(1.0, 0.0);
        DVector::from_fn(g, |_, _| {
            let v = p / y;
            p *= x;
            v
        })
    }

    pub fn check_point(&self, x: C64) -> Result<()> {
        let (k, d) = self.curve.nearest_branch_point(x);
        if d < BRANCH_PROXIMITY {
            return Err(Error::BranchProximity {
                point: x.to_string(),
                branch: self.curve.branch_points()[k].to_string(),
                distance: d,
            });
        }
        Ok(())
    }

    pub fn value(&self, x: C64) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.value_unchecked(x))
    }

    pub fn value_unchecked(&self, x: C64) -> f64 {
        let g = self.curve.genus() as usize;
        let mut powers = Vec::with_capacity(g);
        let mut p = C64::new(1.0, 0.0);
        for _ in 0..g {
            powers.push(p);
            p *= x;
        }
        let mut s = C64::new(0.0, 0.0);
        for i in 0..g {
            for j in 0..g {
                s += powers[i].conj() * self.inverse[(i, j)] * powers[j];
            }
        }
        s.re / self.curve.eval(x).norm()
    }
}

pub fn canonical_density(
    curve: &HyperellipticCurve,
    gram: &GramMatrix,
    x: C64,
    sheet: i8,
) -> Result<f64> {
    if sheet != 1 && sheet != -1 {
        return Err(invalid("sheet must be +1 or -1"));
    }
    CanonicalDensity::new(curve, gram).value(x)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassReport {
    pub genus: u32,
    pub mass: f64,
    pub mass_doubled_nodes: f64,
    pub doubling_change: f64,
    pub inner: f64,
    pub outer: f64,
    pub order: usize,
    pub square_half_width: f64,
    /// The tail is integrated exactly after a change of variables, so no
    /// truncation bound enters the result.
    pub tail_bound: f64,
}

/// `∫ 2ρ dA` over the `x`-plane (two sheets), at Gauss–Legendre order
/// [`DEFAULT_ORDER`] and twice that.
pub fn total_mass(curve: &HyperellipticCurve, gram: &GramMatrix) -> Result<MassReport> {
    total_mass_with_order(curve, gram, DEFAULT_ORDER)
}

pub fn total_mass_with_order(
    curve: &HyperellipticCurve,
    gram: &GramMatrix,
    order: usize,
) -> Result<MassReport> {
    let rho = CanonicalDensity::new(curve, gram);
    let center = curve.centroid();
    let reach = curve
        .branch_points()
        .iter()
        .map(|e| (e - center).norm())
        .fold(0.0, f64::max);
    let half = 2.0 * reach + 1.0;
    let tol = 1e-10 * curve.genus() as f64;
    let f = |x: f64, y: f64| 2.0 * rho.value_unchecked(C64::new(x, y));
    let (inner, outer) = integrate_plane(&f, center, half, curve.branch_points(), order, tol);
    let (inner2, outer2) = integrate_plane(&f, center, half, curve.branch_points(), 2 * order, tol);
    let change = ((inner2 + outer2) - (inner + outer)).abs();
    if !(change < MASS_DOUBLING_TOLERANCE) {
        return Err(Error::Precision(format!(
            "mass changed by {change:e} when doubling the quadrature order"
        )));
    }
    Ok(MassReport {
        genus: curve.genus(),
        mass: inner2 + outer2,
        mass_doubled_nodes: inner + outer,
        doubling_change: change,
        inner: inner2,
        outer: outer2,
        order: 2 * order,
        square_half_width: half,
        tail_bound: 0.0,
    })
}

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]` in the `x`-chart.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rectangle {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }

    pub fn is_empty(&self) -> bool {
        self.x1 <= self.x0 || self.y1 <= self.y0
    }

    fn boundary_distance(&self, z: C64) -> f64 {
        let inside = z.re >= self.x0 && z.re <= self.x1 && z.im >= self.y0 && z.im <= self.y1;
        if inside {
            (z.re - self.x0)
                .min(self.x1 - z.re)
                .min(z.im - self.y0)
                .min(self.y1 - z.im)
        } else {
            let dx = (self.x0 - z.re).max(z.re - self.x1).max(0.0);
            let dy = (self.y0 - z.im).max(z.im - self.y1).max(0.0);
            dx.hypot(dy)
        }
    }
}

/// `sheets · ∫_R ρ dA`. Branch points may lie inside the rectangle but
/// not within [`REGION_MARGIN`] of its boundary.
pub fn measure_of_region(
    curve: &HyperellipticCurve,
    gram: &GramMatrix,
    region: Rectangle,
    sheets: u8,
) -> Result<f64> {
    if sheets != 1 && sheets != 2 {
        return Err(invalid("sheet count must be 1 or 2"));
    }
    if region.is_empty() {
        return Ok(0.0);
    }
    for e in curve.branch_points() {
        let d = region.boundary_distance(*e);
        if d < REGION_MARGIN {
            return Err(Error::BranchProximity {
                point: format!("rectangle {:?}", region),
                branch: e.to_string(),
                distance: d,
            });
        }
    }
    let rho = CanonicalDensity::new(curve, gram);
    let f = |x: f64, y: f64| rho.value_unchecked(C64::new(x, y));
    let v = integrate_rectangle(
        &f,
        [region.x0, region.x1, region.y0, region.y1],
        curve.branch_points(),
        DEFAULT_ORDER,
        1e-12,
    );
    Ok(sheets as f64 * v)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtremalReport {
    pub point: [f64; 2],
    pub rho: f64,
    pub trials: usize,
    /// Largest `|a_φ(x)|² / ρ(x)` over sampled unit-norm `φ`.
    pub max_sample_ratio: f64,
    /// `|a_φ(x)|² / ρ(x)` for the optimal combination.
    pub optimal_ratio: f64,
    pub bound_holds: bool,
    pub optimum_attained: bool,
}

/// Samples random combinations `φ = Σ v_i ω_i` of Hodge norm one and
/// compares `|a_φ(x)|²` against `ρ(x)`; also evaluates the maximizer
/// `v = conj(G⁻¹a)/√ρ`.
pub fn extremal_check(
    curve: &HyperellipticCurve,
    gram: &GramMatrix,
    x: C64,
    trials: usize,
    seed: u64,
) -> Result<ExtremalReport> {
    let density = CanonicalDensity::new(curve, gram);
    density.check_point(x)?;
    let rho = density.value_unchecked(x);
    let a = density.coefficients(x);
    let g = gram.matrix();
    let norm_sq = |v: &DVector<C64>| (v.transpose() * g * v.conjugate())[(0, 0)].re;
    let value = |v: &DVector<C64>| (v.transpose() * &a)[(0, 0)].norm_sqr();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = a.len();
    let mut max_ratio: f64 = 0.0;
    for _ in 0..trials {
        let v = DVector::from_fn(n, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let v = &v / C64::new(norm_sq(&v).sqrt(), 0.0);
        max_ratio = max_ratio.max(value(&v) / rho);
    }
    let best = (gram.inverse() * &a).conjugate() / C64::new(rho.sqrt(), 0.0);
    let best = &best / C64::new(norm_sq(&best).sqrt(), 0.0);
    let optimal_ratio = value(&best) / rho;
    Ok(ExtremalReport {
        point: [x.re, x.im],
        rho,
        trials,
        max_sample_ratio: max_ratio,
        optimal_ratio,
        bound_holds: max_ratio <= 1.0 + 1e-9,
        optimum_attained: optimal_ratio >= 1.0 - 1e-6,
    })
}

/// Seeded points in a box around the branch points, each at least a
/// twentieth of the curve scale away from every branch point.
pub fn regular_sample_points(curve: &HyperellipticCurve, count: usize, seed: u64) -> Vec<C64> {
    let center = curve.centroid();
    let reach = curve
        .branch_points()
        .iter()
        .map(|e| (e - center).norm())
        .fold(1.0, f64::max);
    let gap = 0.05 * curve.scale();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x = center + C64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)) * reach;
        if curve.nearest_branch_point(x).1 > gap {
            out.push(x);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::{make_real_curve, periods};
    use super::*;

    fn setup(coeffs: &[f64]) -> (HyperellipticCurve, GramMatrix) {
        let c = make_real_curve(coeffs).unwrap();
        let p = periods(&c, 64).unwrap();
        let g = hodge_gram(&c, &p).unwrap();
        (c, g)
    }

    #[test]
    fn gram_is_hermitian_positive() {
        for coeffs in [
            vec![-1.0, 0.0, 0.0, 0.0, 0.0, 1.0],
            vec![-1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
            vec![0.0, -1.0, 0.0, 1.0],
        ] {
            let (_, g) = setup(&coeffs);
            assert!(g.hermitian_defect() < 1e-9);
            assert!(g.min_eigenvalue() > 0.0);
        }
    }

    #[test]
    fn density_at_origin_for_quintic() {
        let (c, g) = setup(&[-1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let rho = canonical_density(&c, &g, C64::new(0.0, 0.0), 1).unwrap();
        assert!((rho - g.inverse()[(0, 0)].re).abs() < 1e-12 * rho);
        assert!(g.off_diagonal_ratio() < 1e-8);
        assert!(matches!(
            canonical_density(&c, &g, C64::new(1.0 + 1e-8, 0.0), -1),
            Err(Error::BranchProximity { .. })
        ));
    }

    #[test]
    fn extremal_at_origin() {
        let (c, g) = setup(&[-1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let r = extremal_check(&c, &g, C64::new(0.0, 0.0), 100, 7).unwrap();
        assert!(r.bound_holds && r.optimum_attained);
        // ω₁/√G₁₁ is optimal at 0
        let v = 1.0 / g.matrix()[(0, 0)].re;
        assert!((v - r.rho).abs() < 1e-12 * r.rho);
    }

    #[test]
    fn region_additivity_and_margin() {
        let (c, g) = setup(&[0.0, -1.0, 0.0, 1.0]);
        let whole = measure_of_region(&c, &g, Rectangle::new(-1.5, 1.5, -0.5, 0.7), 2).unwrap();
        let left = measure_of_region(&c, &g, Rectangle::new(-1.5, 0.2, -0.5, 0.7), 2).unwrap();
        let right = measure_of_region(&c, &g, Rectangle::new(0.2, 1.5, -0.5, 0.7), 2).unwrap();
        assert!((whole - left - right).abs() < 1e-8);
        assert_eq!(
            measure_of_region(&c, &g, Rectangle::new(1.0, 1.0, 0.0, 1.0), 1).unwrap(),
            0.0
        );
        assert!(measure_of_region(&c, &g, Rectangle::new(0.0, 2.0, -1.0, 1.0), 1).is_err());
    }
}
