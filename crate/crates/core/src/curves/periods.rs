use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{HyperellipticCurve, C64};
use crate::error::{invalid, Error, Result};

pub const MIN_PERIOD_NODES: usize = 32;
const MAX_PERIOD_NODES: usize = 1 << 17;
const TARGET_CHANGE: f64 = 1e-9;
const FAIL_CHANGE: f64 = 1e-6;
/// A chain is preferred only if every segment keeps the other branch
/// points and non-adjacent segments at least this fraction of its length
/// away.
const CHAIN_QUALITY: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchOrdering {
    /// By angle around the centroid, then modulus.
    Angular,
    /// By real part, then imaginary part.
    Lexicographic,
}

/// Periods of `ω_1..ω_g` over the cycles lying over the segments
/// `[e_k, e_{k+1}]` of a chain through the finite branch points.
#[derive(Clone, Debug)]
pub struct PeriodData {
    /// Branch point indices in chain order.
    pub order: Vec<usize>,
    pub ordering: BranchOrdering,
    /// Each cycle as the pair of branch point indices it encircles.
    pub cycles: Vec<(usize, usize)>,
    /// Intersection numbers `γ_a · γ_b`.
    pub intersection: Vec<Vec<i64>>,
    /// `g × 2g`, entry `(i, j)` is `∮_{γ_j} ω_{i+1}`.
    pub periods: DMatrix<C64>,
    pub nodes: usize,
    /// Relative change of the period matrix at the last node doubling.
    pub relative_change: f64,
}

impl PeriodData {
    pub fn intersection_matrix(&self) -> DMatrix<f64> {
        let n = self.intersection.len();
        DMatrix::from_fn(n, n, |i, j| self.intersection[i][j] as f64)
    }

    pub fn intersection_determinant(&self) -> i64 {
        self.intersection_matrix().determinant().round() as i64
    }

    pub fn to_json(&self) -> serde_json::Value {
        let periods: Vec<Vec<[f64; 2]>> = (0..self.periods.nrows())
            .map(|i| {
                (0..self.periods.ncols())
                    .map(|j| [self.periods[(i, j)].re, self.periods[(i, j)].im])
                    .collect()
            })
            .collect();
        json!({
            "order": self.order,
            "ordering": self.ordering,
            "cycles": self.cycles,
            "intersection": self.intersection,
            "periods": periods,
            "nodes": self.nodes,
            "relative_change": self.relative_change,
        })
    }
}

fn point_segment_distance(x: C64, p: C64, q: C64) -> f64 {
    let d = q - p;
    let t = ((x - p) * d.conj()).re / d.norm_sqr();
    (x - (p + d * t.clamp(0.0, 1.0))).norm()
}

fn cross(a: C64, b: C64) -> f64 {
    (a.conj() * b).im
}

fn segments_cross(p1: C64, q1: C64, p2: C64, q2: C64) -> bool {
    let d1 = cross(q1 - p1, p2 - p1);
    let d2 = cross(q1 - p1, q2 - p1);
    let d3 = cross(q2 - p2, p1 - p2);
    let d4 = cross(q2 - p2, q1 - p2);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

fn segment_distance(p1: C64, q1: C64, p2: C64, q2: C64) -> f64 {
    if segments_cross(p1, q1, p2, q2) {
        return 0.0;
    }
    point_segment_distance(p1, p2, q2)
        .min(point_segment_distance(q1, p2, q2))
        .min(point_segment_distance(p2, p1, q1))
        .min(point_segment_distance(q2, p1, q1))
}

/// Smallest clearance of the chain `pts[order[0]] – pts[order[1]] – …`
/// (first `segments` segments) relative to segment length.
fn chain_quality(pts: &[C64], order: &[usize], segments: usize) -> f64 {
    let mut q = f64::INFINITY;
    for a in 0..segments {
        let (p, r) = (pts[order[a]], pts[order[a + 1]]);
        let len = (r - p).norm();
        for (k, &x) in pts.iter().enumerate() {
            if k != order[a] && k != order[a + 1] {
                q = q.min(point_segment_distance(x, p, r) / len);
            }
        }
        for b in a + 2..segments {
            let (p2, r2) = (pts[order[b]], pts[order[b + 1]]);
            let len2 = (r2 - p2).norm();
            q = q.min(segment_distance(p, r, p2, r2) / len.min(len2));
        }
    }
    q
}

fn angular_order(pts: &[C64]) -> Vec<usize> {
    let c = pts.iter().sum::<C64>() / pts.len() as f64;
    let scale = pts
        .iter()
        .map(|z| (z - c).norm())
        .fold(0.0, f64::max)
        .max(1e-300);
    let key = |z: C64| {
        let d = z - c;
        if d.norm() <= 1e-12 * scale {
            (0.0, 0.0)
        } else {
            (d.im.atan2(d.re).rem_euclid(2.0 * PI), d.norm())
        }
    };
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&a, &b| {
        let (ka, kb) = (key(pts[a]), key(pts[b]));
        if (ka.0 - kb.0).abs() <= 1e-12 {
            ka.1.total_cmp(&kb.1)
        } else {
            ka.0.total_cmp(&kb.0)
        }
    });
    idx
}

fn lexicographic_order(pts: &[C64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&a, &b| {
        pts[a]
            .re
            .total_cmp(&pts[b].re)
            .then(pts[a].im.total_cmp(&pts[b].im))
    });
    idx
}

fn choose_chain(pts: &[C64], segments: usize) -> Result<(Vec<usize>, BranchOrdering)> {
    let angular = angular_order(pts);
    let qa = chain_quality(pts, &angular, segments);
    if qa >= CHAIN_QUALITY {
        return Ok((angular, BranchOrdering::Angular));
    }
    let lex = lexicographic_order(pts);
    let ql = chain_quality(pts, &lex, segments);
    if ql > qa && ql > 0.0 {
        Ok((lex, BranchOrdering::Lexicographic))
    } else if qa > 0.0 {
        Ok((angular, BranchOrdering::Angular))
    } else {
        Err(Error::Convention(
            "no simple chain through the branch points".into(),
        ))
    }
}

/// Continuous branch of `√(c ∏_{k ≠ p, q} (x − e_k))` along a segment.
struct SegmentBranch {
    sqrt_lead: C64,
    others: Vec<(C64, C64, C64)>,
}

impl SegmentBranch {
    fn new(curve: &HyperellipticCurve, ip: usize, iq: usize) -> Self {
        let pts = curve.branch_points();
        let mid = (pts[ip] + pts[iq]) * 0.5;
        let others = pts
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != ip && k != iq)
            .map(|(_, &e)| {
                let m = mid - e;
                let w = m.conj() / m.norm();
                (e, w, w.sqrt().inv())
            })
            .collect();
        Self {
            sqrt_lead: curve.leading().sqrt(),
            others,
        }
    }

    fn eval(&self, x: C64) -> C64 {
        self.others
            .iter()
            .fold(self.sqrt_lead, |acc, &(e, w, inv_sqrt_w)| {
                acc * (w * (x - e)).sqrt() * inv_sqrt_w
            })
    }
}

/// `∫_0^π x^{i} / g(x(φ)) dφ` for `i < genus`, midpoint rule in `φ` with
/// `x = p + (q − p)(1 − cos φ)/2`.
fn segment_integrals(
    branch: &SegmentBranch,
    p: C64,
    q: C64,
    genus: usize,
    nodes: usize,
) -> Vec<C64> {
    let mut acc = vec![C64::new(0.0, 0.0); genus];
    let h = PI / nodes as f64;
    for k in 0..nodes {
        let phi = (k as f64 + 0.5) * h;
        let x = p + (q - p) * (0.5 * (1.0 - phi.cos()));
        let inv = branch.eval(x).inv();
        let mut power = C64::new(1.0, 0.0);
        for a in acc.iter_mut() {
            *a += power * inv;
            power *= x;
        }
    }
    acc.into_iter().map(|a| a * h).collect()
}

fn period_matrix(
    curve: &HyperellipticCurve,
    order: &[usize],
    branches: &[SegmentBranch],
    nodes: usize,
) -> DMatrix<C64> {
    let g = curve.genus() as usize;
    let pts = curve.branch_points();
    let mut m = DMatrix::from_element(g, 2 * g, C64::new(0.0, 0.0));
    for (j, branch) in branches.iter().enumerate() {
        let (p, q) = (pts[order[j]], pts[order[j + 1]]);
        // ∮ = 2 ∫_p^q h dx / y with y = i (q − p) √(s(1 − s)) g(x).
        for (i, v) in segment_integrals(branch, p, q, g, nodes)
            .into_iter()
            .enumerate()
        {
            m[(i, j)] = v * C64::new(0.0, -2.0);
        }
    }
    m
}

fn relative_change(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
        / scale
}

/// Period matrix with node doubling until the relative change drops below
/// `1e-9`. Convergence worse than `1e-6` is an error.
pub fn periods(curve: &HyperellipticCurve, nodes: usize) -> Result<PeriodData> {
    if nodes < MIN_PERIOD_NODES {
        return Err(invalid(format!(
            "need at least {MIN_PERIOD_NODES} quadrature nodes, got {nodes}"
        )));
    }
    let g = curve.genus() as usize;
    let segments = 2 * g;
    let pts = curve.branch_points();
    let (order, ordering) = choose_chain(pts, segments)?;
    let branches: Vec<SegmentBranch> = (0..segments)
        .map(|j| SegmentBranch::new(curve, order[j], order[j + 1]))
        .collect();

    let mut n = nodes;
    let mut current = period_matrix(curve, &order, &branches, n);
    let mut change;
    loop {
        let refined = period_matrix(curve, &order, &branches, 2 * n);
        change = relative_change(&refined, &current);
        current = refined;
        n *= 2;
        if change < TARGET_CHANGE || n >= MAX_PERIOD_NODES {
            break;
        }
    }
    if !(change <= FAIL_CHANGE) {
        return Err(Error::Precision(format!(
            "period quadrature changed by {change:e} at {n} nodes"
        )));
    }

    let mut intersection = vec![vec![0i64; segments]; segments];
    for a in 0..segments - 1 {
        let b = pts[order[a + 1]];
        let c_b = curve.eval_derivative(b).sqrt();
        let (pa, qa) = (pts[order[a]], b);
        let (pb, qb) = (b, pts[order[a + 2]]);
        // Local coordinate t = y / √f'(b); the cycle over a segment leaves
        // its start along +t and arrives at its end along −t.
        let va = -(C64::i() * (qa - pa) * branches[a].eval(b)) / c_b;
        let vb = (C64::i() * (qb - pb) * branches[a + 1].eval(b)) / c_b;
        let s = (va.conj() * vb).im / (va.norm() * vb.norm());
        if s.abs() < 1e-8 {
            return Err(Error::Convention(format!(
                "cycles {a} and {} are tangent at branch point {b}",
                a + 1
            )));
        }
        let sign = if s > 0.0 { 1 } else { -1 };
        intersection[a][a + 1] = sign;
        intersection[a + 1][a] = -sign;
    }

    Ok(PeriodData {
        cycles: (0..segments).map(|j| (order[j], order[j + 1])).collect(),
        order,
        ordering,
        intersection,
        periods: current,
        nodes: n,
        relative_change: change,
    })
}

#[cfg(test)]
mod tests {
    use super::super::make_real_curve;
    use super::*;

    fn lemniscate() -> f64 {
        // π / AGM(1, √2)
        let (mut a, mut b) = (1.0f64, 2.0f64.sqrt());
        for _ in 0..30 {
            let next = ((a + b) / 2.0, (a * b).sqrt());
            a = next.0;
            b = next.1;
        }
        PI / a
    }

    #[test]
    fn elliptic_periods_match_lemniscate_constant() {
        let c = make_real_curve(&[0.0, -1.0, 0.0, 1.0]).unwrap();
        let p = periods(&c, 64).unwrap();
        assert_eq!(p.ordering, BranchOrdering::Lexicographic);
        let w = 2.0 * lemniscate();
        for j in 0..2 {
            assert!((p.periods[(0, j)].norm() - w).abs() < 1e-10);
        }
        assert_eq!(p.intersection_determinant().abs(), 1);
        // a · b = +1 forces Im(B/A) > 0
        let (a, b) = if p.intersection[0][1] == 1 {
            (0, 1)
        } else {
            (1, 0)
        };
        assert!((p.periods[(0, b)] / p.periods[(0, a)]).im > 0.0);
    }

    #[test]
    fn angular_chain_on_roots_of_unity() {
        let c = make_real_curve(&[-1.0, 0.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        let p = periods(&c, 32).unwrap();
        assert_eq!(p.ordering, BranchOrdering::Angular);
        assert!(p.relative_change < 1e-9);
        let j = &p.intersection;
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(j[a][b], -j[b][a]);
                if a.abs_diff(b) != 1 {
                    assert_eq!(j[a][b], 0);
                }
            }
        }
        assert_eq!(p.intersection_determinant().abs(), 1);
    }

    #[test]
    fn too_few_nodes() {
        let c = make_real_curve(&[0.0, -1.0, 0.0, 1.0]).unwrap();
        assert!(periods(&c, 8).is_err());
    }
}
