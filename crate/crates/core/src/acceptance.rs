//! The acceptance suite: nine criteria, each with a time budget.

use std::f64::consts::PI;
use std::time::Instant;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::complexes::genus_surface_complex;
use crate::covers::{build_cover, cyclic_tower, deck_permutation, homology_tower, CoverLimits};
use crate::curves::{
    disk_model_checks_with, extremal_check, hodge_gram, periods, regular_sample_points, total_mass,
    C64,
};
use crate::error::Result;
use crate::fixtures::{base_surfaces, cover_fixtures, test_curves};
use crate::hodge::{
    character_average_measure, deck_commutator_defect, fourier_limit_measure, harmonic_projector,
    measure_convergence_experiment, pushforward_measure,
};
use crate::l2approx::{
    kernel_dims_finite, lueck_betti_sequence, seeded_group_ring_matrix, vn_kernel_dim_fourier,
    AbelianQuotient, DEFAULT_MAX_QUOTIENT_ORDER, DEFAULT_VN_NODES,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    /// Everything except the curve-mass integration.
    Fast,
    Full,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub skipped: bool,
    pub seconds: f64,
    pub limit_seconds: f64,
    pub detail: String,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        let status = if self.skipped {
            "SKIP"
        } else if self.passed {
            "PASS"
        } else {
            "FAIL"
        };
        format!(
            "criterion {} [{status}] {} ({:.2}s / {:.0}s): {}",
            self.id, self.name, self.seconds, self.limit_seconds, self.detail
        )
    }
}

pub const SEEDED_MATRIX_SEEDS: [u64; 5] = [0, 1, 2, 3, 4];
pub const DISK_RADII: [f64; 4] = [0.5, 0.9, 0.99, 0.999];
pub const DISK_GRID: usize = 50;

type Check = fn(u64) -> Result<(bool, String)>;

struct Criterion {
    id: u8,
    name: &'static str,
    limit: f64,
    check: Check,
}

const CRITERIA: [Criterion; 9] = [
    Criterion {
        id: 1,
        name: "Lueck approximation on surfaces",
        limit: 5.0,
        check: lueck_surface_tower,
    },
    Criterion {
        id: 2,
        name: "homology cover level",
        limit: 30.0,
        check: homology_level,
    },
    Criterion {
        id: 3,
        name: "Gauss-Bonnet totals",
        limit: 30.0,
        check: gauss_bonnet,
    },
    Criterion {
        id: 4,
        name: "strong convergence of pushforward measures",
        limit: 60.0,
        check: strong_convergence,
    },
    Criterion {
        id: 5,
        name: "kernel approximation vs torus oracle",
        limit: 60.0,
        check: oracle_agreement,
    },
    Criterion {
        id: 6,
        name: "mass equals genus",
        limit: 300.0,
        check: mass_equals_genus,
    },
    Criterion {
        id: 7,
        name: "extremal characterization",
        limit: 60.0,
        check: extremal,
    },
    Criterion {
        id: 8,
        name: "disk model",
        limit: 30.0,
        check: disk_model,
    },
    Criterion {
        id: 9,
        name: "structural invariants",
        limit: 60.0,
        check: structural,
    },
];

pub fn criterion_ids() -> Vec<u8> {
    CRITERIA.iter().map(|c| c.id).collect()
}

fn finish(c: &Criterion, start: Instant, outcome: Result<(bool, String)>) -> CriterionResult {
    let seconds = start.elapsed().as_secs_f64();
    let (ok, mut detail) = match outcome {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    let in_time = seconds <= c.limit;
    if !in_time {
        detail.push_str(&format!("; exceeded time budget of {}s", c.limit));
    }
    CriterionResult {
        id: c.id,
        name: c.name.to_string(),
        passed: ok && in_time,
        skipped: false,
        seconds,
        limit_seconds: c.limit,
        detail,
    }
}

/// Runs a single criterion by id.
pub fn run_criterion(id: u8, seed: u64) -> Option<CriterionResult> {
    let c = CRITERIA.iter().find(|c| c.id == id)?;
    let start = Instant::now();
    let outcome = (c.check)(seed);
    Some(finish(c, start, outcome))
}

pub fn run_suite(suite: Suite, seed: u64) -> Vec<CriterionResult> {
    CRITERIA
        .iter()
        .map(|c| {
            if suite == Suite::Fast && c.id == 6 {
                CriterionResult {
                    id: c.id,
                    name: c.name.to_string(),
                    passed: true,
                    skipped: true,
                    seconds: 0.0,
                    limit_seconds: c.limit,
                    detail: "curve-mass integration runs in the full suite".into(),
                }
            } else {
                run_criterion(c.id, seed).expect("known id")
            }
        })
        .collect()
}

pub fn all_passed(results: &[CriterionResult]) -> bool {
    results.iter().all(|r| r.passed)
}

fn lueck_surface_tower(_: u64) -> Result<(bool, String)> {
    let base = genus_surface_complex(2)?;
    let tower = cyclic_tower(2, 0, &[1, 2, 4, 8, 16])?;
    let seq = lueck_betti_sequence(&base, &tower, 1)?;
    let got = seq.normalized();
    let expected = [
        Ratio::new(4, 1),
        Ratio::new(3, 1),
        Ratio::new(5, 2),
        Ratio::new(9, 4),
        Ratio::new(17, 8),
    ];
    let exact = got == expected;
    let decreasing = got.windows(2).all(|w| w[1] < w[0]);
    let limit = seq.limit == Some(2);
    let shown: Vec<String> = got.iter().map(|r| r.to_string()).collect();
    Ok((
        exact && decreasing && limit,
        format!("b1/n = [{}], limit {:?}", shown.join(", "), seq.limit),
    ))
}

fn homology_level(_: u64) -> Result<(bool, String)> {
    let base = genus_surface_complex(2)?;
    let tower = homology_tower(2, &[2], CoverLimits::default())?;
    let seq = lueck_betti_sequence(&base, &tower, 1)?;
    let r = &seq.records[0];
    Ok((
        r.degree == 16 && r.dim == 34 && r.normalized() == Ratio::new(17, 8),
        format!(
            "degree {}, b1 = {}, normalized {}",
            r.degree,
            r.dim,
            r.normalized()
        ),
    ))
}

fn gauss_bonnet(_: u64) -> Result<(bool, String)> {
    let base = genus_surface_complex(2)?;
    let tower = cyclic_tower(2, 0, &[1, 2, 4, 8, 16])?;
    let report = measure_convergence_experiment(&base, &tower)?;
    let mut ok = true;
    for (spec, level) in tower.levels.iter().zip(&report.levels) {
        let d = spec.degree() as i64;
        let b1 = build_cover(&base, spec)?.betti_numbers().b1 as i64;
        // ½·b¹/d must equal (g − 1) + 1/d as a rational number
        ok &= Ratio::new(b1, 2 * d) == Ratio::new(d + 1, d);
        ok &= (level.measure.total - (1.0 + 1.0 / d as f64)).abs() <= 1e-12;
    }
    let limit = report
        .limit
        .as_ref()
        .map(|l| l.measure.total)
        .unwrap_or(f64::NAN);
    let torus = fourier_limit_measure(1, &[vec![1], vec![0]], 2048)?
        .measure
        .total;
    let z2 = fourier_limit_measure(2, &[vec![1, 0], vec![0, 0], vec![0, 1], vec![0, 0]], 256)?
        .measure
        .total;
    ok &= (limit - 1.0).abs() < 1e-6 && torus.abs() < 1e-6 && (z2 - 1.0).abs() < 1e-6;
    Ok((
        ok,
        format!(
            "totals {:?}; limit {limit:.12}; torus limit {torus:.2e}; Z^2 limit {z2:.12}",
            report.totals
        ),
    ))
}

fn strong_convergence(_: u64) -> Result<(bool, String)> {
    let base = genus_surface_complex(2)?;
    let weights = vec![vec![1], vec![0], vec![0], vec![0]];
    let limit = fourier_limit_measure(2, &weights, 2048)?.measure;
    let target = [0.0, 0.0, 0.5, 0.5];
    let mut ok = limit
        .values
        .iter()
        .zip(target)
        .all(|(v, t)| (v - t).abs() < 1e-9);
    let mut distances = Vec::new();
    for n in [1u64, 2, 4, 8, 16] {
        let m = pushforward_measure(&base, &crate::covers::cyclic_cover_spec(2, 0, n)?)?;
        let h = 0.5 / n as f64;
        ok &= m
            .values
            .iter()
            .zip([h, h, 0.5, 0.5])
            .all(|(v, t)| (v - t).abs() < 1e-9);
        let avg = character_average_measure(2, &weights, &[n])?;
        ok &= avg.sup_distance(&m) < 1e-9;
        let dist = m.sup_distance(&limit);
        ok &= (dist - h).abs() < 1e-9;
        distances.push(dist);
    }
    ok &= distances.windows(2).all(|w| w[1] < w[0]);
    Ok((ok, format!("sup distances to limit {distances:?}")))
}

fn oracle_agreement(_: u64) -> Result<(bool, String)> {
    let mut ok = true;
    let mut parts = Vec::new();
    for seed in SEEDED_MATRIX_SEEDS {
        let f = seeded_group_ring_matrix(seed);
        let vn = vn_kernel_dim_fourier(&f, DEFAULT_VN_NODES)?;
        let mut dims = Vec::new();
        for k in 1..=8u32 {
            let order = 1u64 << k;
            let dims_k = kernel_dims_finite(
                &f,
                &AbelianQuotient::cyclic(order)?,
                DEFAULT_MAX_QUOTIENT_ORDER,
            )?;
            let normalized = dims_k.exact as f64 / order as f64;
            ok &= (normalized - vn.value).abs() <= 1.0 / order as f64 + vn.error_bound;
            dims.push(dims_k.exact);
        }
        parts.push(format!(
            "seed {seed} ({}x{}): vn {} dims {:?}",
            f.nrows(),
            f.ncols(),
            vn.value,
            dims
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn mass_equals_genus(_: u64) -> Result<(bool, String)> {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, c) in test_curves() {
        let g = hodge_gram(&c, &periods(&c, 64)?)?;
        let m = total_mass(&c, &g)?;
        ok &= (m.mass - c.genus() as f64).abs() <= 1e-2;
        parts.push(format!("{name}: {:.10}", m.mass));
    }
    Ok((ok, parts.join(", ")))
}

fn extremal(seed: u64) -> Result<(bool, String)> {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, c) in test_curves() {
        let g = hodge_gram(&c, &periods(&c, 64)?)?;
        let mut worst: f64 = 0.0;
        let mut best: f64 = f64::INFINITY;
        for (k, x) in regular_sample_points(&c, 20, seed).into_iter().enumerate() {
            let r = extremal_check(&c, &g, x, 100, seed.wrapping_add(k as u64))?;
            ok &= r.bound_holds && r.optimum_attained;
            worst = worst.max(r.max_sample_ratio);
            best = best.min(r.optimal_ratio);
        }
        parts.push(format!(
            "{name}: max sample/rho {worst:.6}, optimal/rho {best:.12}"
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn closed_disk_density(z: C64) -> f64 {
    let w = 1.0 - z.norm_sqr();
    2.0 / (PI * w * w)
}

fn disk_model(seed: u64) -> Result<(bool, String)> {
    disk_criterion(&closed_disk_density, seed)
}

/// Disk criterion against a supplied closed form for the disk density.
pub fn disk_criterion(density: &(dyn Fn(C64) -> f64 + Sync), seed: u64) -> Result<(bool, String)> {
    let r = disk_model_checks_with(density, &DISK_RADII, DISK_GRID, seed)?;
    let at_zero = (r.density_at_zero - 2.0 / PI).abs() <= 1e-12;
    let half = r
        .measures
        .iter()
        .find(|m| m.radius == 0.5)
        .map(|m| m.quadrature)
        .unwrap_or(f64::NAN);
    let measure = (half - 2.0 / 3.0).abs() <= 1e-6;
    let last = r.truncations.last().expect("truncations");
    let uniform = r.truncation_errors_decrease && last.terms == 60 && last.sup_error < 1e-6;
    let lipschitz = r
        .truncations
        .iter()
        .all(|t| t.empirical_lipschitz <= r.lipschitz_bound * (1.0 + 1e-9));
    let mobius = r.mobius_max_relative_error <= 1e-10;
    let ok = at_zero
        && measure
        && uniform
        && lipschitz
        && mobius
        && r.subdisk_monotone
        && r.exhaustion_monotone;
    Ok((
        ok,
        format!(
            "rho(0) = {:.15}, mu(D_1/2) = {half:.12}, sup error at N=60 {:.1e}, mobius {:.1e}, monotone {}, exhaustion {}",
            r.density_at_zero, last.sup_error, r.mobius_max_relative_error, r.subdisk_monotone, r.exhaustion_monotone
        ),
    ))
}

fn structural(_: u64) -> Result<(bool, String)> {
    let mut ok = true;
    let mut checked = 0;
    for (_, c) in base_surfaces() {
        let maps = c.boundary_matrices();
        ok &= maps.d1.mul(&maps.d0).is_zero();
        let p = harmonic_projector(&c)?;
        let d = p.defects(c.betti_numbers().b1);
        ok &= d.idempotence < 1e-10 && d.symmetry < 1e-10 && d.trace < 1e-8;
        checked += 1;
    }
    let mut worst_deck: f64 = 0.0;
    for fx in cover_fixtures() {
        let cover = build_cover(&fx.base, &fx.spec)?;
        let maps = cover.boundary_matrices();
        ok &= maps.d1.mul(&maps.d0).is_zero();
        let p = harmonic_projector(&cover)?;
        let d = p.defects(cover.betti_numbers().b1);
        ok &= d.idempotence < 1e-10 && d.symmetry < 1e-10 && d.trace < 1e-8;
        let deck = deck_commutator_defect(&fx.base, &fx.spec, &p);
        ok &= deck < 1e-10;
        worst_deck = worst_deck.max(deck);
        for h in 0..fx.spec.degree() {
            ok &= crate::covers::is_free_automorphism(
                &cover,
                &deck_permutation(&fx.base, &fx.spec, h),
            );
        }
        checked += 1;
    }
    let mut min_eig = f64::INFINITY;
    for (_, c) in test_curves() {
        let g = hodge_gram(&c, &periods(&c, 64)?)?;
        ok &= g.hermitian_defect() < 1e-9 && g.min_eigenvalue() > 0.0;
        min_eig = min_eig.min(g.min_eigenvalue());
        checked += 1;
    }
    Ok((
        ok,
        format!("{checked} fixtures; worst deck commutator {worst_deck:.1e}; smallest Gram eigenvalue {min_eig:.4}"),
    ))
}
