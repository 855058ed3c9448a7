//! Discrete Hodge theory on 1-cochains.
//!
//! The cochain inner product is the unweighted one (cells orthonormal).
//! Harmonic 1-cochains are the kernel of `Δ₁ = d⁰(d⁰)ᵀ + (d¹)ᵀd¹`, and
//! the canonical measure of an edge is half the diagonal entry of the
//! orthogonal projector onto them.

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complexes::{surface_relator, CwSurface};
use crate::covers::{
    build_cover_with_limits, deck_permutation, verify_tower, CoverLimits, CoverSpec, DeclaredLimit,
    TowerSpec,
};
use crate::error::{invalid, Error, Result};

/// Relative eigenvalue threshold `1e-9 · (λ_max + 1)` for the kernel of
/// the Laplacian.
pub const EIGENVALUE_THRESHOLD: f64 = 1e-9;

/// Largest edge count for which a dense projector is formed.
pub const DEFAULT_MAX_HODGE_EDGES: usize = 4096;

pub const DEFAULT_LIMIT_NODES_RANK1: usize = 2048;
pub const DEFAULT_LIMIT_NODES_RANK2: usize = 256;

const DECK_TOLERANCE: f64 = 1e-9;
const TOTAL_TOLERANCE: f64 = 1e-9;

/// Orthogonal projector onto harmonic 1-cochains.
#[derive(Clone, Debug)]
pub struct HarmonicProjector {
    matrix: DMatrix<f64>,
    rank: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectorDefects {
    /// `max |P² − P|`.
    pub idempotence: f64,
    /// `max |P − Pᵀ|`.
    pub symmetry: f64,
    /// `|tr P − b¹|`.
    pub trace: f64,
}

impl HarmonicProjector {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    pub fn defects(&self, b1: u64) -> ProjectorDefects {
        let p = &self.matrix;
        ProjectorDefects {
            idempotence: (p * p - p).amax(),
            symmetry: (p - p.transpose()).amax(),
            trace: (p.trace() - b1 as f64).abs(),
        }
    }

    /// `max |P_{σ(i)σ(j)} − P_{ij}|` for an edge permutation `σ`.
    pub fn commutator_defect(&self, perm: &[usize]) -> f64 {
        let p = &self.matrix;
        let n = p.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((p[(perm[i], perm[j])] - p[(i, j)]).abs());
            }
        }
        worst
    }

    /// `½ Tr(1_A P 1_A)` for the coordinate projection onto `subset`.
    pub fn subset_measure(&self, subset: &[usize]) -> f64 {
        0.5 * subset.iter().map(|&e| self.matrix[(e, e)]).sum::<f64>()
    }

    /// The same quantity computed as `½ Σ ⟨u_k, P u_k⟩` for a random
    /// orthonormal basis `u_k` of the span of the indicators of `subset`.
    pub fn subset_measure_random_basis(&self, subset: &[usize], seed: u64) -> f64 {
        let k = subset.len();
        if k == 0 {
            return 0.0;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(k, k, |_, _| rng.gen_range(-1.0..1.0));
        let q = a.qr().q();
        let mut total = 0.0;
        for col in 0..k {
            for (i, &ei) in subset.iter().enumerate() {
                for (j, &ej) in subset.iter().enumerate() {
                    total += q[(i, col)] * self.matrix[(ei, ej)] * q[(j, col)];
                }
            }
        }
        0.5 * total
    }
}

pub fn harmonic_projector(c: &CwSurface) -> Result<HarmonicProjector> {
    harmonic_projector_with_cap(c, DEFAULT_MAX_HODGE_EDGES)
}

pub fn harmonic_projector_with_cap(c: &CwSurface, max_edges: usize) -> Result<HarmonicProjector> {
    let e = c.edge_count();
    if e > max_edges {
        return Err(Error::ResourceCap {
            what: "edges for dense harmonic projector".into(),
            requested: e as u128,
            cap: max_edges as u128,
        });
    }
    let maps = c.boundary_matrices();
    let d0 = maps.d0.to_f64();
    let d1 = maps.d1.to_f64();
    let lap = &d0 * d0.transpose() + d1.transpose() * &d1;
    let eig = SymmetricEigen::new(lap);
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let tau = EIGENVALUE_THRESHOLD * (lmax + 1.0);
    let mut p = DMatrix::zeros(e, e);
    let mut rank = 0;
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda.abs() <= tau {
            let v = eig.eigenvectors.column(k);
            p += v * v.transpose();
            rank += 1;
        }
    }
    let b1 = c.betti_numbers().b1 as usize;
    if rank != b1 {
        return Err(Error::Consistency(format!(
            "harmonic space has numerical dimension {rank} but b¹ = {b1}"
        )));
    }
    Ok(HarmonicProjector { matrix: p, rank })
}

/// Nonnegative measure on edges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeMeasure {
    pub values: Vec<f64>,
    pub labels: Vec<String>,
    pub total: f64,
}

impl EdgeMeasure {
    pub fn new(values: Vec<f64>, labels: Vec<String>) -> Self {
        let total = values.iter().sum();
        Self {
            values,
            labels,
            total,
        }
    }

    pub fn sup_distance(&self, other: &EdgeMeasure) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub const CSV_HEADER: &'static str = "edge_id,label,value";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for (i, (v, l)) in self.values.iter().zip(&self.labels).enumerate() {
            out.push_str(&format!("{i},{l},{v:.17e}\n"));
        }
        out
    }
}

/// `a1, b1, …` on the one-vertex model, `e<k>` otherwise; cover edges get
/// the base label with the sheet appended.
pub fn edge_labels(c: &CwSurface) -> Vec<String> {
    let standard = |e: usize| {
        if c.vertex_count() == 1 && c.edge_count() == 2 * c.genus() as usize {
            base_edge_name(e)
        } else {
            format!("e{e}")
        }
    };
    match c.labels() {
        Some(l) => l
            .edges
            .iter()
            .map(|&(base, sheet)| format!("{}@{sheet}", base_edge_name(base)))
            .collect(),
        None => (0..c.edge_count()).map(standard).collect(),
    }
}

fn base_edge_name(e: usize) -> String {
    format!(
        "{}{}",
        if e.is_multiple_of(2) { "a" } else { "b" },
        e / 2 + 1
    )
}

/// Edge `e` gets `½·P_ee`; the total is `½·b¹`.
pub fn canonical_edge_measure(c: &CwSurface) -> Result<EdgeMeasure> {
    let p = harmonic_projector(c)?;
    let values = (0..c.edge_count())
        .map(|e| 0.5 * p.matrix[(e, e)])
        .collect();
    Ok(EdgeMeasure::new(values, edge_labels(c)))
}

/// Canonical measure of the cover read off at one lift of each base edge.
/// All lifts must agree (deck invariance), so this is also the average
/// over lifts; the total is `½·b¹(cover)/d`.
pub fn pushforward_measure(base: &CwSurface, spec: &CoverSpec) -> Result<EdgeMeasure> {
    pushforward_measure_with_limits(base, spec, CoverLimits::default())
}

pub fn pushforward_measure_with_limits(
    base: &CwSurface,
    spec: &CoverSpec,
    limits: CoverLimits,
) -> Result<EdgeMeasure> {
    let cover = build_cover_with_limits(base, spec, limits)?;
    let p = harmonic_projector(&cover)?;
    let d = spec.degree();
    let identity = spec.group.identity();
    let mut values = Vec::with_capacity(base.edge_count());
    for e in 0..base.edge_count() {
        let lift = 0.5 * p.matrix[(e * d + identity, e * d + identity)];
        for q in 0..d {
            let other = 0.5 * p.matrix[(e * d + q, e * d + q)];
            if (other - lift).abs() > DECK_TOLERANCE {
                return Err(Error::Consistency(format!(
                    "lifts of edge {e} carry different measures ({lift} vs {other})"
                )));
            }
        }
        values.push(lift);
    }
    Ok(EdgeMeasure::new(values, edge_labels(base)))
}

/// Largest deviation of the projector of a cover from commuting with its
/// deck transformations.
pub fn deck_commutator_defect(base: &CwSurface, spec: &CoverSpec, p: &HarmonicProjector) -> f64 {
    (0..spec.degree())
        .map(|h| p.commutator_defect(&deck_permutation(base, spec, h).edges))
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelMeasure {
    pub level: usize,
    pub degree: usize,
    pub measure: EdgeMeasure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub genus: u32,
    pub levels: Vec<LevelMeasure>,
    /// `sup_e |μ_{k+1}(e) − μ_k(e)|`.
    pub successive_differences: Vec<f64>,
    pub totals: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<LimitMeasure>,
}

impl ConvergenceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Pushforward measures along a verified tower. Totals are checked
/// against `(g − 1) + 1/d_k`; for abelian limits of rank 1 or 2 the
/// torus limit measure is attached.
pub fn measure_convergence_experiment(
    base: &CwSurface,
    tower: &TowerSpec,
) -> Result<ConvergenceReport> {
    measure_convergence_experiment_with_limits(base, tower, CoverLimits::default())
}

pub fn measure_convergence_experiment_with_limits(
    base: &CwSurface,
    tower: &TowerSpec,
    limits: CoverLimits,
) -> Result<ConvergenceReport> {
    let g = base.genus();
    verify_tower(tower, g)?;
    let levels = tower
        .levels
        .par_iter()
        .enumerate()
        .map(|(k, spec)| {
            Ok(LevelMeasure {
                level: k + 1,
                degree: spec.degree(),
                measure: pushforward_measure_with_limits(base, spec, limits)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let totals: Vec<f64> = levels.iter().map(|l| l.measure.total).collect();
    if base.betti_numbers().b1 == 2 * g as u64 {
        for l in &levels {
            let expected = g as f64 - 1.0 + 1.0 / l.degree as f64;
            if (l.measure.total - expected).abs() > TOTAL_TOLERANCE {
                return Err(Error::Consistency(format!(
                    "level {} total {} differs from (g − 1) + 1/d = {expected}",
                    l.level, l.measure.total
                )));
            }
        }
    }
    let successive_differences = levels
        .windows(2)
        .map(|w| w[1].measure.sup_distance(&w[0].measure))
        .collect();
    let limit = match (&tower.declared_limit, tower.limit_weights()) {
        (DeclaredLimit::Z | DeclaredLimit::Zd(1 | 2), Some(w)) if is_one_vertex_model(base) => {
            let nodes = if w[0].len() == 1 {
                DEFAULT_LIMIT_NODES_RANK1
            } else {
                DEFAULT_LIMIT_NODES_RANK2
            };
            Some(fourier_limit_measure(g, w, nodes)?)
        }
        _ => None,
    };
    Ok(ConvergenceReport {
        genus: g,
        levels,
        successive_differences,
        totals,
        limit,
    })
}

fn is_one_vertex_model(c: &CwSurface) -> bool {
    c.vertex_count() == 1
        && c.face_count() == 1
        && c.edge_count() == 2 * c.genus() as usize
        && c.faces()[0] == surface_relator(c.genus())
}

/// Twisted boundary maps of the one-vertex genus-`g` model at the
/// character `z_j = e^{iθ_j}` of `Z^d`: `d⁰(θ)` is `2g × 1` with entries
/// `z^{w_e} − 1`, and `d¹(θ)` is `1 × 2g`, read off the relator with
/// running deck weights.
pub fn twisted_boundaries(
    g: u32,
    weights: &[Vec<i64>],
    angles: &[f64],
) -> (DMatrix<Complex<f64>>, DMatrix<Complex<f64>>) {
    let chi = |w: &[i64]| -> Complex<f64> {
        let phase: f64 = w.iter().zip(angles).map(|(&k, &a)| k as f64 * a).sum();
        Complex::from_polar(1.0, phase)
    };
    let n = 2 * g as usize;
    let d0 = DMatrix::from_fn(n, 1, |e, _| chi(&weights[e]) - 1.0);
    let mut d1 = DMatrix::from_element(1, n, Complex::new(0.0, 0.0));
    let dim = angles.len();
    let mut cur = vec![0i64; dim];
    for (e, sign) in surface_relator(g) {
        if sign > 0 {
            d1[(0, e)] += chi(&cur);
            cur.iter_mut().zip(&weights[e]).for_each(|(c, w)| *c += w);
        } else {
            cur.iter_mut().zip(&weights[e]).for_each(|(c, w)| *c -= w);
            d1[(0, e)] -= chi(&cur);
        }
    }
    (d0, d1)
}

/// Diagonal of the harmonic projector of the twisted complex at `angles`,
/// with the numerical rank of that projector.
pub fn twisted_projector_diagonal(
    g: u32,
    weights: &[Vec<i64>],
    angles: &[f64],
) -> (Vec<f64>, usize) {
    let (d0, d1) = twisted_boundaries(g, weights, angles);
    let lap = &d0 * d0.adjoint() + d1.adjoint() * &d1;
    let eig = SymmetricEigen::new(lap);
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let tau = EIGENVALUE_THRESHOLD * (lmax + 1.0);
    let n = 2 * g as usize;
    let mut diag = vec![0.0; n];
    let mut rank = 0;
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda.abs() <= tau {
            rank += 1;
            for (i, d) in diag.iter_mut().enumerate() {
                *d += eig.eigenvectors[(i, k)].norm_sqr();
            }
        }
    }
    (diag, rank)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitMeasure {
    pub measure: EdgeMeasure,
    /// Grid nodes per circle.
    pub nodes: usize,
    /// Grid nodes (as angle vectors) discarded because the projector rank
    /// differs from `2g − 2`.
    pub excluded: Vec<Vec<f64>>,
}

fn check_weights(g: u32, weights: &[Vec<i64>]) -> Result<usize> {
    if weights.len() != 2 * g as usize {
        return Err(invalid("one weight vector per generator required"));
    }
    let d = weights[0].len();
    if !(1..=2).contains(&d) || weights.iter().any(|w| w.len() != d) {
        return Err(invalid(
            "torus limit supports weight vectors of a common rank 1 or 2",
        ));
    }
    Ok(d)
}

fn grid_angles(nodes: usize, d: usize, idx: usize) -> Vec<f64> {
    let mut idx = idx;
    (0..d)
        .map(|_| {
            let k = idx % nodes;
            idx /= nodes;
            2.0 * PI * k as f64 / nodes as f64
        })
        .collect()
}

/// Limit measure for the abelian cover `Z^{2g} → Z^d` (d ∈ {1, 2}): half
/// the torus average of the twisted projector diagonal, on a uniform grid
/// through `θ = 0`. Nodes whose projector rank is not `2g − 2` are
/// dropped and listed.
pub fn fourier_limit_measure(g: u32, weights: &[Vec<i64>], nodes: usize) -> Result<LimitMeasure> {
    let d = check_weights(g, weights)?;
    if nodes == 0 {
        return Err(invalid("need at least one grid node"));
    }
    let n = 2 * g as usize;
    let generic = n - 2;
    let total = nodes.pow(d as u32);
    let samples: Vec<(Vec<f64>, usize)> = (0..total)
        .into_par_iter()
        .map(|idx| twisted_projector_diagonal(g, weights, &grid_angles(nodes, d, idx)))
        .collect();
    let mut sum = vec![0.0; n];
    let mut kept = 0usize;
    let mut excluded = Vec::new();
    for (idx, (diag, rank)) in samples.into_iter().enumerate() {
        if rank == generic {
            kept += 1;
            sum.iter_mut().zip(&diag).for_each(|(s, v)| *s += v);
        } else {
            excluded.push(grid_angles(nodes, d, idx));
        }
    }
    if kept == 0 {
        return Err(Error::Precision(
            "every grid node has a degenerate projector rank".into(),
        ));
    }
    let values = sum.into_iter().map(|s| 0.5 * s / kept as f64).collect();
    Ok(LimitMeasure {
        measure: EdgeMeasure::new(values, (0..n).map(base_edge_name).collect()),
        nodes,
        excluded,
    })
}

/// Finite-level counterpart: half the average of the twisted projector
/// diagonal over all characters of `∏ Z/n_j`, rank jumps included.
pub fn character_average_measure(
    g: u32,
    weights: &[Vec<i64>],
    moduli: &[u64],
) -> Result<EdgeMeasure> {
    let d = check_weights(g, weights)?;
    if moduli.len() != d || moduli.contains(&0) {
        return Err(invalid(
            "one positive modulus per weight coordinate required",
        ));
    }
    let n = 2 * g as usize;
    let order: usize = moduli.iter().map(|&m| m as usize).product();
    let mut sum = vec![0.0; n];
    for j in 0..order {
        let mut idx = j;
        let angles: Vec<f64> = moduli
            .iter()
            .map(|&m| {
                let k = idx % m as usize;
                idx /= m as usize;
                2.0 * PI * k as f64 / m as f64
            })
            .collect();
        let (diag, _) = twisted_projector_diagonal(g, weights, &angles);
        sum.iter_mut().zip(&diag).for_each(|(s, v)| *s += v);
    }
    let values = sum.into_iter().map(|s| 0.5 * s / order as f64).collect();
    Ok(EdgeMeasure::new(
        values,
        (0..n).map(base_edge_name).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexes::genus_surface_complex;
    use crate::covers::{cyclic_cover_spec, FiniteGroup};

    #[test]
    fn base_projector_is_identity() {
        for g in 1..=3 {
            let c = genus_surface_complex(g).unwrap();
            let p = harmonic_projector(&c).unwrap();
            assert!(
                (p.matrix() - DMatrix::identity(2 * g as usize, 2 * g as usize)).amax() < 1e-12
            );
            let m = canonical_edge_measure(&c).unwrap();
            assert!(m.values.iter().all(|v| (v - 0.5).abs() < 1e-12));
            assert!((m.total - g as f64).abs() < 1e-12);
            assert_eq!(m.labels[0], "a1");
        }
    }

    #[test]
    fn double_cover_projector() {
        let base = genus_surface_complex(2).unwrap();
        let spec = cyclic_cover_spec(2, 0, 2).unwrap();
        let cover = build_cover_with_limits(&base, &spec, CoverLimits::default()).unwrap();
        let p = harmonic_projector(&cover).unwrap();
        assert_eq!(p.rank(), 6);
        let d = p.defects(6);
        assert!(d.idempotence < 1e-10 && d.symmetry < 1e-10 && d.trace < 1e-8);
        assert!(deck_commutator_defect(&base, &spec, &p) < 1e-10);
        let m = pushforward_measure(&base, &spec).unwrap();
        assert!((m.total - 1.5).abs() < 1e-12);
    }

    #[test]
    fn trivial_and_torus_pushforward() {
        let base = genus_surface_complex(2).unwrap();
        let trivial = CoverSpec {
            group: FiniteGroup::trivial(),
            images: vec![0; 4],
        };
        let m = pushforward_measure(&base, &trivial).unwrap();
        assert!(m.values.iter().all(|v| (v - 0.5).abs() < 1e-12));
        let torus = genus_surface_complex(1).unwrap();
        let m = pushforward_measure(&torus, &cyclic_cover_spec(1, 0, 4).unwrap()).unwrap();
        assert!((m.total - 0.25).abs() < 1e-12);
    }

    #[test]
    fn twisted_complex_is_a_complex() {
        let w = vec![
            vec![1, -2],
            vec![0, 3],
            vec![2, 1],
            vec![-1, 1],
            vec![1, 1],
            vec![0, 0],
        ];
        for angles in [[0.3, 1.1], [2.0, -0.7], [0.0, 0.0]] {
            let (d0, d1) = twisted_boundaries(3, &w, &angles);
            assert!((d1 * d0)[(0, 0)].norm() < 1e-12);
        }
    }

    #[test]
    fn twisted_genus_two_example() {
        let w = vec![vec![1], vec![0], vec![0], vec![0]];
        let (diag, rank) = twisted_projector_diagonal(2, &w, &[0.9]);
        assert_eq!(rank, 2);
        for (v, e) in diag.iter().zip([0.0, 0.0, 1.0, 1.0]) {
            assert!((v - e).abs() < 1e-12);
        }
        let limit = fourier_limit_measure(2, &w, 64).unwrap();
        assert_eq!(limit.excluded, vec![vec![0.0]]);
        assert!((limit.measure.total - 1.0).abs() < 1e-12);
        let avg = character_average_measure(2, &w, &[4]).unwrap();
        for (v, e) in avg.values.iter().zip([0.125, 0.125, 0.5, 0.5]) {
            assert!((v - e).abs() < 1e-12);
        }
    }

    #[test]
    fn subset_measure_basis_independence() {
        let base = genus_surface_complex(2).unwrap();
        let spec = cyclic_cover_spec(2, 1, 3).unwrap();
        let cover = build_cover_with_limits(&base, &spec, CoverLimits::default()).unwrap();
        let p = harmonic_projector(&cover).unwrap();
        let subset = [0, 3, 5, 7, 10];
        let direct = p.subset_measure(&subset);
        for seed in 0..4 {
            assert!((p.subset_measure_random_basis(&subset, seed) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_layout() {
        let m = canonical_edge_measure(&genus_surface_complex(1).unwrap()).unwrap();
        let csv = m.to_csv();
        assert!(csv.starts_with("edge_id,label,value\n0,a1,5"));
        assert_eq!(csv.lines().count(), 3);
    }
}
