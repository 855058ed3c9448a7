//! Shipped complexes, covers and curves used by the acceptance suite and
//! the structural checks.

use crate::complexes::{genus_surface_complex, CwSurface};
use crate::covers::{
    abelian_weight_cover_spec, cyclic_cover_spec, homology_cover_spec, CoverLimits, CoverSpec,
    FiniteGroup,
};
use crate::curves::{make_real_curve, HyperellipticCurve};

#[derive(Clone, Debug)]
pub struct CoverFixture {
    pub name: String,
    pub base: CwSurface,
    pub spec: CoverSpec,
}

/// One-vertex models of genus 1, 2 and 3.
pub fn base_surfaces() -> Vec<(String, CwSurface)> {
    (1..=3)
        .map(|g| {
            (
                format!("genus-{g}"),
                genus_surface_complex(g).expect("positive genus"),
            )
        })
        .collect()
}

/// `S_3` with elements the permutations of `{0, 1, 2}` in lexicographic
/// order.
pub fn s3_group() -> FiniteGroup {
    let perms: Vec<[usize; 3]> = vec![
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let idx = |p: [usize; 3]| perms.iter().position(|&q| q == p).expect("permutation");
    let table = perms
        .iter()
        .map(|a| {
            perms
                .iter()
                .map(|b| idx([a[b[0]], a[b[1]], a[b[2]]]))
                .collect()
        })
        .collect();
    FiniteGroup::from_table(table, 0).expect("S3 table")
}

pub fn cover_fixtures() -> Vec<CoverFixture> {
    let g1 = genus_surface_complex(1).expect("genus 1");
    let g2 = genus_surface_complex(2).expect("genus 2");
    let g3 = genus_surface_complex(3).expect("genus 3");
    let mut out = Vec::new();
    let mut push = |name: String, base: &CwSurface, spec: CoverSpec| {
        out.push(CoverFixture {
            name,
            base: base.clone(),
            spec,
        })
    };
    for n in [2, 3, 4, 8, 16] {
        push(
            format!("genus-2 cyclic a1 n={n}"),
            &g2,
            cyclic_cover_spec(2, 0, n).expect("cyclic"),
        );
    }
    push(
        "genus-1 cyclic a n=4".into(),
        &g1,
        cyclic_cover_spec(1, 0, 4).expect("cyclic"),
    );
    push(
        "genus-3 cyclic b2 n=3".into(),
        &g3,
        cyclic_cover_spec(3, 3, 3).expect("cyclic"),
    );
    push(
        "genus-2 Z/2xZ/3".into(),
        &g2,
        abelian_weight_cover_spec(
            2,
            &[vec![1, 0], vec![0, 0], vec![0, 1], vec![1, 1]],
            &[2, 3],
        )
        .expect("abelian"),
    );
    push(
        "genus-2 mod-2 homology".into(),
        &g2,
        homology_cover_spec(2, 2, CoverLimits::default()).expect("homology"),
    );
    push(
        "genus-2 S3".into(),
        &g2,
        CoverSpec {
            group: s3_group(),
            images: vec![2, 0, 3, 0],
        },
    );
    out
}

/// `x⁵ − 1`, `x⁶ − 1` and `x³ − x` (ascending coefficients).
pub fn test_curve_coefficients() -> Vec<(String, Vec<f64>)> {
    vec![
        ("x^5-1".into(), vec![-1.0, 0.0, 0.0, 0.0, 0.0, 1.0]),
        ("x^6-1".into(), vec![-1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]),
        ("x^3-x".into(), vec![0.0, -1.0, 0.0, 1.0]),
    ]
}

pub fn test_curves() -> Vec<(String, HyperellipticCurve)> {
    test_curve_coefficients()
        .into_iter()
        .map(|(n, c)| (n, make_real_curve(&c).expect("shipped curve")))
        .collect()
}
