use kazhdan_core::complexes::{genus_surface_complex, BettiVector, CwSurface};
use kazhdan_core::covers::{
    abelian_weight_cover_spec, build_cover, cyclic_tower, deck_permutation, homology_tower,
    is_free_automorphism, relative_cover, CoverLimits, CoverSpec,
};
use kazhdan_core::exact::IntMatrix;
use kazhdan_core::fixtures::cover_fixtures;
use proptest::prelude::*;

/// Rank from the Smith normal form, computed by gcd row/column
/// reductions on a dense `i128` copy.
fn snf_rank(m: &IntMatrix) -> usize {
    let mut a: Vec<Vec<i128>> = m
        .to_dense()
        .into_iter()
        .map(|r| r.into_iter().map(i128::from).collect())
        .collect();
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut t = 0;
    while t < rows.min(cols) {
        // smallest nonzero pivot in the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if a[i][j] != 0 && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let p = a[t][t];
            let mut clean = true;
            for i in t + 1..rows {
                let q = a[i][t] / p;
                if q != 0 {
                    for j in t..cols {
                        a[i][j] -= q * a[t][j];
                    }
                }
                if a[i][t] != 0 {
                    clean = false;
                }
            }
            for j in t + 1..cols {
                let q = a[t][j] / p;
                if q != 0 {
                    for row in a.iter_mut().skip(t) {
                        row[j] -= q * row[t];
                    }
                }
                if a[t][j] != 0 {
                    clean = false;
                }
            }
            if clean {
                break;
            }
            // move a smaller remainder into the pivot position
            let mut best = (t, t);
            for i in t..rows {
                if a[i][t] != 0 && a[i][t].abs() < a[best.0][best.1].abs() {
                    best = (i, t);
                }
            }
            for j in t..cols {
                if a[t][j] != 0 && a[t][j].abs() < a[best.0][best.1].abs() {
                    best = (t, j);
                }
            }
            a.swap(t, best.0);
            for row in a.iter_mut() {
                row.swap(t, best.1);
            }
        }
        t += 1;
    }
    t
}

fn snf_betti(c: &CwSurface) -> BettiVector {
    let maps = c.boundary_matrices();
    let (r0, r1) = (snf_rank(&maps.d0) as u64, snf_rank(&maps.d1) as u64);
    let (v, e, f) = (
        c.vertex_count() as u64,
        c.edge_count() as u64,
        c.face_count() as u64,
    );
    BettiVector {
        b0: v - r0,
        b1: e - r0 - r1,
        b2: f - r1,
    }
}

fn check_surface(c: &CwSurface) {
    let maps = c.boundary_matrices();
    assert!(maps.d1.mul(&maps.d0).is_zero());
    let b = c.betti_numbers();
    assert_eq!(b, c.betti_via_kernels());
    assert_eq!((b.b0, b.b2), (1, 1));
    assert_eq!(b.b1 as i64, 2 - c.euler_characteristic());
    if c.cell_count() <= 200 {
        assert_eq!(b, snf_betti(c));
    }
}

#[test]
fn snf_oracle_sanity() {
    let m = IntMatrix::from_rows(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]);
    assert_eq!(snf_rank(&m), 3);
    let m = IntMatrix::from_rows(&[vec![1, 2], vec![2, 4], vec![3, 6]]);
    assert_eq!(snf_rank(&m), 1);
}

#[test]
fn shipped_complexes_and_covers() {
    for g in 1..=4 {
        check_surface(&genus_surface_complex(g).unwrap());
    }
    for fx in cover_fixtures() {
        let cover = build_cover(&fx.base, &fx.spec).unwrap();
        check_surface(&cover);
        let d = fx.spec.degree() as i64;
        assert_eq!(
            cover.euler_characteristic(),
            d * fx.base.euler_characteristic(),
            "{}",
            fx.name
        );
        let g = fx.base.genus() as i64;
        assert_eq!(cover.betti_numbers().b1 as i64, 2 + d * (2 * g - 2));
        let perms: Vec<_> = (0..fx.spec.degree())
            .map(|h| deck_permutation(&fx.base, &fx.spec, h))
            .collect();
        for p in &perms {
            assert!(is_free_automorphism(&cover, p));
        }
        // transitive on the fiber over each base edge
        for e in 0..fx.base.edge_count() {
            let lift = e * fx.spec.degree() + fx.spec.group.identity();
            let mut fiber: Vec<usize> = perms.iter().map(|p| p.edges[lift]).collect();
            fiber.sort();
            assert_eq!(
                fiber,
                (e * fx.spec.degree()..(e + 1) * fx.spec.degree()).collect::<Vec<_>>()
            );
        }
    }
}

fn check_composition(base: &CwSurface, tower: &kazhdan_core::covers::TowerSpec) {
    for k in 0..tower.levels.len() - 1 {
        let rel = relative_cover(base, tower, k).unwrap();
        let fine = &tower.levels[k + 1].group;
        let composed = build_cover(&rel.intermediate, &rel.spec).unwrap();
        let direct = build_cover(base, &tower.levels[k + 1]).unwrap();
        let kd = rel.kernel.len();
        let d = rel.section.len();
        assert_eq!(composed.edge_count(), direct.edge_count());
        let vmap: Vec<usize> = (0..composed.vertex_count())
            .map(|i| rel.direct_index(i, fine))
            .collect();
        let emap: Vec<usize> = (0..composed.edge_count())
            .map(|i| rel.direct_index(i, fine))
            .collect();
        let fmap: Vec<usize> = (0..composed.face_count())
            .map(|i| rel.direct_index(i, fine))
            .collect();
        for map in [&vmap, &emap, &fmap] {
            let mut sorted = map.to_vec();
            sorted.sort();
            sorted.dedup();
            assert_eq!(sorted.len(), map.len(), "label map is not a bijection");
        }
        for (i, &[s, t]) in composed.edges().iter().enumerate() {
            assert_eq!(direct.edges()[emap[i]], [vmap[s], vmap[t]]);
        }
        for (i, word) in composed.faces().iter().enumerate() {
            let mapped: Vec<_> = word.iter().map(|&(e, s)| (emap[e], s)).collect();
            assert_eq!(direct.faces()[fmap[i]], mapped);
        }
        assert_eq!(kd * d, fine.order());
    }
}

#[test]
fn tower_composition_matches_direct_build() {
    let g2 = genus_surface_complex(2).unwrap();
    check_composition(&g2, &cyclic_tower(2, 0, &[1, 2, 4, 8]).unwrap());
    check_composition(&g2, &cyclic_tower(2, 3, &[3, 6, 12]).unwrap());
    check_composition(
        &g2,
        &homology_tower(2, &[2, 4], CoverLimits { max_degree: 300 }).unwrap(),
    );
}

#[test]
fn trivial_group_cover_is_relabelled_base() {
    for g in 1..=3 {
        let base = genus_surface_complex(g).unwrap();
        let spec = CoverSpec {
            group: kazhdan_core::covers::FiniteGroup::trivial(),
            images: vec![0; 2 * g as usize],
        };
        let c = build_cover(&base, &spec).unwrap();
        assert_eq!(c.edges(), base.edges());
        assert_eq!(c.faces(), base.faces());
    }
}

fn shuffled(n: usize, keys: &[u64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by_key(|&i| (keys[i % keys.len()].wrapping_mul(i as u64 + 1), i));
    idx
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn abelian_covers_satisfy_invariants(
        g in 1u32..=3,
        moduli in prop::collection::vec(1u64..=4, 1..=2),
        raw in prop::collection::vec(prop::collection::vec(-3i64..=3, 2), 6),
    ) {
        let weights: Vec<Vec<i64>> = raw[..2 * g as usize].iter().map(|w| w[..moduli.len()].to_vec()).collect();
        let base = genus_surface_complex(g).unwrap();
        // non-surjective weight maps are rejected; skip those
        if let Ok(spec) = abelian_weight_cover_spec(g, &weights, &moduli) {
            let c = build_cover(&base, &spec).unwrap();
            check_surface(&c);
            let d = spec.degree() as i64;
            prop_assert_eq!(c.betti_numbers().b1 as i64, 2 + d * (2 * g as i64 - 2));
        }
    }

    #[test]
    fn rank_is_permutation_invariant(
        rows in prop::collection::vec(prop::collection::vec(-4i64..=4, 5), 1..7),
        keys in prop::collection::vec(any::<u64>(), 1..8),
    ) {
        let m = IntMatrix::from_rows(&rows);
        let rp = shuffled(m.nrows(), &keys);
        let cp = shuffled(m.ncols(), &keys.iter().rev().cloned().collect::<Vec<_>>());
        let p = m.permuted(&rp, &cp);
        prop_assert_eq!(m.rank(), p.rank());
        prop_assert_eq!(m.rank(), snf_rank(&m));
        prop_assert_eq!(m.rank(), m.transpose().rank());
    }

    #[test]
    fn cover_betti_is_permutation_invariant(n in 2u64..=6, gen in 0usize..4, keys in prop::collection::vec(any::<u64>(), 1..8)) {
        let base = genus_surface_complex(2).unwrap();
        let c = build_cover(&base, &kazhdan_core::covers::cyclic_cover_spec(2, gen, n).unwrap()).unwrap();
        let maps = c.boundary_matrices();
        let vp = shuffled(c.vertex_count(), &keys);
        let ep = shuffled(c.edge_count(), &keys);
        let fp = shuffled(c.face_count(), &keys);
        let r0 = maps.d0.permuted(&ep, &vp).rank();
        let r1 = maps.d1.permuted(&fp, &ep).rank();
        prop_assert_eq!(r0, maps.d0.rank());
        prop_assert_eq!(r1, maps.d1.rank());
    }
}
