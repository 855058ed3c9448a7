use std::f64::consts::PI;

use kazhdan_core::curves::{
    hodge_gram, integrate_plane, make_real_curve, measure_of_region, periods,
    regular_sample_points, total_mass, CanonicalDensity, GramMatrix, HyperellipticCurve,
    PeriodData, Rectangle, C64, DEFAULT_ORDER,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn quintic() -> Vec<f64> {
    vec![-1.0, 0.0, 0.0, 0.0, 0.0, 1.0]
}

fn sextic() -> Vec<f64> {
    vec![-1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]
}

fn cubic() -> Vec<f64> {
    vec![0.0, -1.0, 0.0, 1.0]
}

fn setup(coeffs: &[f64]) -> (HyperellipticCurve, PeriodData, GramMatrix) {
    let c = make_real_curve(coeffs).unwrap();
    let p = periods(&c, 64).unwrap();
    let g = hodge_gram(&c, &p).unwrap();
    (c, p, g)
}

#[test]
fn mass_equals_genus() {
    for (coeffs, genus) in [(quintic(), 2.0), (sextic(), 2.0), (cubic(), 1.0)] {
        let (c, _, g) = setup(&coeffs);
        let m = total_mass(&c, &g).unwrap();
        assert!(
            (m.mass - genus).abs() < 1e-2,
            "mass {} for genus {genus}",
            m.mass
        );
        assert!(m.doubling_change < 1e-3);
    }
}

#[test]
fn mass_of_a_generic_curve() {
    let (c, _, g) = setup(&[0.3, -1.2, 0.5, 0.7, -0.4, 1.0]);
    assert_eq!(c.genus(), 2);
    let m = total_mass(&c, &g).unwrap();
    assert!((m.mass - 2.0).abs() < 1e-2, "mass {}", m.mass);
}

/// The rotation `x ↦ ζx` multiplies `ω_i` by `ζ^i`, so the rotated period
/// columns must be integer combinations of the original ones.
fn assert_symmetry(coeffs: &[f64], order: u32) {
    let (c, p, g) = setup(coeffs);
    let genus = c.genus() as usize;
    let zeta = C64::from_polar(1.0, 2.0 * PI / order as f64);
    let real = |m: &DMatrix<C64>| {
        DMatrix::from_fn(2 * genus, m.ncols(), |r, col| {
            let z = m[(r % genus, col)];
            if r < genus {
                z.re
            } else {
                z.im
            }
        })
    };
    let rotated = DMatrix::from_fn(genus, 2 * genus, |i, j| {
        p.periods[(i, j)] * zeta.powu(i as u32 + 1)
    });
    let m = real(&p.periods).try_inverse().unwrap() * real(&rotated);
    for v in m.iter() {
        assert!(
            (v - v.round()).abs() < 1e-8,
            "non-integral transport coefficient {v}"
        );
    }
    assert!(m.determinant().round().abs() == 1.0);
    assert!(g.off_diagonal_ratio() < 1e-8);
}

#[test]
fn rotation_symmetry_quintic() {
    assert_symmetry(&quintic(), 5);
}

#[test]
fn rotation_symmetry_sextic() {
    assert_symmetry(&sextic(), 6);
}

#[test]
fn periods_stable_under_doubling() {
    for coeffs in [quintic(), sextic(), cubic()] {
        let c = make_real_curve(&coeffs).unwrap();
        let a = periods(&c, 64).unwrap();
        let b = periods(&c, 2 * a.nodes).unwrap();
        let scale = a.periods.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let diff = (&a.periods - &b.periods)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(diff / scale < 1e-9);
        assert!(a
            .periods
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite()));
    }
}

#[test]
fn gram_transforms_under_rescaling() {
    let (c, _, g) = setup(&[0.3, -1.2, 0.5, 0.7, -0.4, 1.0]);
    let lambda = C64::new(0.8, 0.45);
    let scaled = c.rescaled(lambda).unwrap();
    let gs = hodge_gram(&scaled, &periods(&scaled, 64).unwrap()).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            let expected = g.matrix()[(i, j)]
                * lambda.powi(-(i as i32 + 1))
                * lambda.conj().powi(-(j as i32 + 1));
            assert!((gs.matrix()[(i, j)] - expected).norm() < 1e-8 * expected.norm().max(1e-3));
        }
    }
}

/// `⟨ω₁, ω₁⟩ = ∫ ω₁ ∧ ⋆ω̄₁ = 2 ∫_S |a₁|² dA` from a direct area integral
/// must equal `2 (ω₁, ω₁) = 2 G₁₁` from the periods.
#[test]
fn l2_norm_is_twice_hodge_norm() {
    for coeffs in [quintic(), sextic(), cubic()] {
        let (c, _, g) = setup(&coeffs);
        let f = |x: f64, y: f64| 1.0 / c.eval(C64::new(x, y)).norm();
        let (a, b) = integrate_plane(
            &f,
            c.centroid(),
            3.0,
            c.branch_points(),
            DEFAULT_ORDER,
            1e-11,
        );
        let l2 = 2.0 * 2.0 * (a + b);
        assert!(
            (l2 - 2.0 * g.matrix()[(0, 0)].re).abs() < 1e-7 * l2,
            "{l2} vs {}",
            g.matrix()[(0, 0)].re
        );
    }
}

#[test]
fn exhaustion_by_rectangles() {
    let (c, _, g) = setup(&sextic());
    let mass = total_mass(&c, &g).unwrap().mass;
    let values: Vec<f64> = [4.0, 16.0, 64.0]
        .iter()
        .map(|&h| measure_of_region(&c, &g, Rectangle::new(-h, h, -h, h), 2).unwrap())
        .collect();
    assert!(values.windows(2).all(|w| w[1] > w[0]));
    assert!((values[2] - mass).abs() < 1e-2);
}

#[test]
fn density_is_nonnegative_and_basis_free() {
    let (c, _, g) = setup(&quintic());
    let rho = CanonicalDensity::new(&c, &g);
    let chol = g.matrix().clone().cholesky().unwrap();
    let l_inv = chol.l().try_inverse().unwrap();
    // a unitary from the QR factorization of a fixed complex matrix
    let u = DMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(0.3, 0.9),
            C64::new(-1.1, 0.2),
            C64::new(0.5, -0.4),
            C64::new(0.7, 0.6),
        ],
    )
    .qr()
    .q();
    let basis = u * l_inv;
    for x in regular_sample_points(&c, 50, 3) {
        let a = rho.coefficients(x);
        let mixed: DVector<C64> = &basis * &a;
        let v = rho.value(x).unwrap();
        assert!(v >= 0.0);
        assert!((mixed.norm_squared() - v).abs() < 1e-12 * v);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn generic_quartics_and_quintics(coeffs in prop::collection::vec(-2.0f64..2.0, 4..6)) {
        let mut coeffs = coeffs;
        coeffs.push(1.0);
        if let Ok(c) = make_real_curve(&coeffs) {
            if let Ok(p) = periods(&c, 64) {
                prop_assert_eq!(p.intersection_determinant().abs(), 1);
                let g = hodge_gram(&c, &p).unwrap();
                prop_assert!(g.hermitian_defect() < 1e-9);
                prop_assert!(g.min_eigenvalue() > 0.0);
                let rho = CanonicalDensity::new(&c, &g);
                for x in regular_sample_points(&c, 10, 0) {
                    prop_assert!(rho.value(x).unwrap() >= 0.0);
                }
            }
        }
    }
}
