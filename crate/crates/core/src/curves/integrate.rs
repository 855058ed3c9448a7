//! Adaptive tensor Gauss–Legendre quadrature for densities with
//! `1/|x − e|`-type singularities at finitely many points of the plane.

use std::f64::consts::PI;

use gauss_quad::GaussLegendre;
use rayon::prelude::*;

use super::C64;

/// Gauss–Legendre nodes per direction on each cell.
pub const DEFAULT_ORDER: usize = 12;
const MAX_DEPTH: u32 = 12;

/// Nodes and weights on `[0, 1]`.
pub(crate) struct Rule {
    pairs: Vec<(f64, f64)>,
}

impl Rule {
    pub(crate) fn new(order: usize) -> Self {
        let gl = GaussLegendre::new(order.max(2)).expect("order at least 2");
        Self {
            pairs: gl
                .as_node_weight_pairs()
                .iter()
                .map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w))
                .collect(),
        }
    }

    fn tensor(&self, f: &(dyn Fn(f64, f64) -> f64 + Sync), b: [f64; 4]) -> f64 {
        let (dx, dy) = (b[1] - b[0], b[3] - b[2]);
        let mut s = 0.0;
        for &(u, wu) in &self.pairs {
            let x = b[0] + dx * u;
            let mut row = 0.0;
            for &(v, wv) in &self.pairs {
                row += wv * f(x, b[2] + dy * v);
            }
            s += wu * row;
        }
        s * dx * dy
    }
}

fn quarters(b: [f64; 4]) -> [[f64; 4]; 4] {
    let xm = 0.5 * (b[0] + b[1]);
    let ym = 0.5 * (b[2] + b[3]);
    [
        [b[0], xm, b[2], ym],
        [xm, b[1], b[2], ym],
        [b[0], xm, ym, b[3]],
        [xm, b[1], ym, b[3]],
    ]
}

fn adapt(
    f: &(dyn Fn(f64, f64) -> f64 + Sync),
    rule: &Rule,
    b: [f64; 4],
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let kids = quarters(b);
    let parts: Vec<f64> = kids.iter().map(|&k| rule.tensor(f, k)).collect();
    let sum: f64 = parts.iter().sum();
    if (sum - whole).abs() <= tol.max(1e-15 * sum.abs()) || depth >= MAX_DEPTH {
        return sum;
    }
    kids.iter()
        .zip(parts)
        .map(|(&k, p)| adapt(f, rule, k, p, 0.5 * tol, depth + 1))
        .sum()
}

/// Integral of a smooth function over a box `[x0, x1] × [y0, y1]`.
pub(crate) fn smooth_box(
    f: &(dyn Fn(f64, f64) -> f64 + Sync),
    rule: &Rule,
    b: [f64; 4],
    tol: f64,
) -> f64 {
    adapt(f, rule, b, rule.tensor(f, b), tol, 0)
}

/// Cell with an integrable `1/r` singularity at corner `(cx, cy)`: split
/// along the diagonal and map each triangle to the unit square with the
/// Duffy substitution, whose Jacobian cancels the singularity.
fn duffy_cell(
    f: &(dyn Fn(f64, f64) -> f64 + Sync),
    rule: &Rule,
    b: [f64; 4],
    corner: (f64, f64),
    tol: f64,
) -> f64 {
    let (cx, cy) = corner;
    let a = if cx == b[0] { b[1] - b[0] } else { b[0] - b[1] };
    let c = if cy == b[2] { b[3] - b[2] } else { b[2] - b[3] };
    let jac = (a * c).abs();
    let lower = move |u: f64, v: f64| jac * u * f(cx + a * u, cy + c * u * v);
    let upper = move |u: f64, v: f64| jac * u * f(cx + a * u * v, cy + c * u);
    let unit = [0.0, 1.0, 0.0, 1.0];
    smooth_box(&lower, rule, unit, 0.5 * tol) + smooth_box(&upper, rule, unit, 0.5 * tol)
}

fn cell(
    f: &(dyn Fn(f64, f64) -> f64 + Sync),
    rule: &Rule,
    b: [f64; 4],
    singular: &[(f64, f64)],
    tol: f64,
    depth: u32,
) -> f64 {
    let eps = 1e-12 * (b[1] - b[0]).abs().max((b[3] - b[2]).abs()).max(1.0);
    let corners: Vec<(f64, f64)> = [(b[0], b[2]), (b[1], b[2]), (b[0], b[3]), (b[1], b[3])]
        .into_iter()
        .filter(|&(x, y)| {
            singular
                .iter()
                .any(|&(sx, sy)| (sx - x).abs() <= eps && (sy - y).abs() <= eps)
        })
        .collect();
    match corners.len() {
        0 => smooth_box(f, rule, b, tol),
        1 => duffy_cell(f, rule, b, corners[0], tol),
        _ if depth < MAX_DEPTH => quarters(b)
            .iter()
            .map(|&k| cell(f, rule, k, singular, 0.25 * tol, depth + 1))
            .sum(),
        _ => smooth_box(f, rule, b, tol),
    }
}

fn sorted_cuts(lo: f64, hi: f64, extra: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = std::iter::once(lo)
        .chain(extra.filter(|&t| t > lo && t < hi))
        .chain(std::iter::once(hi))
        .collect();
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + b.abs()));
    v
}

/// Integral over the rectangle `[x0, x1] × [y0, y1]` of a density that
/// may blow up like `1/|x − e|` at the points `singular` (which must not
/// lie on the boundary). The rectangle is cut along the coordinates of the
/// interior singular points so that each becomes a cell corner.
pub fn integrate_rectangle(
    f: &(dyn Fn(f64, f64) -> f64 + Sync),
    rect: [f64; 4],
    singular: &[C64],
    order: usize,
    tol: f64,
) -> f64 {
    if rect[1] <= rect[0] || rect[3] <= rect[2] {
        return 0.0;
    }
    let rule = Rule::new(order);
    let inside: Vec<(f64, f64)> = singular
        .iter()
        .filter(|z| z.re > rect[0] && z.re < rect[1] && z.im > rect[2] && z.im < rect[3])
        .map(|z| (z.re, z.im))
        .collect();
    let xs = sorted_cuts(rect[0], rect[1], inside.iter().map(|p| p.0));
    let ys = sorted_cuts(rect[2], rect[3], inside.iter().map(|p| p.1));
    // Snap singular points to the cut lines they produced.
    let snap = |t: f64, cuts: &[f64]| {
        cuts.iter()
            .cloned()
            .min_by(|a, b| (a - t).abs().total_cmp(&(b - t).abs()))
            .unwrap_or(t)
    };
    let snapped: Vec<(f64, f64)> = inside
        .iter()
        .map(|&(x, y)| (snap(x, &xs), snap(y, &ys)))
        .collect();
    let cells: Vec<[f64; 4]> = xs
        .windows(2)
        .flat_map(|wx| ys.windows(2).map(move |wy| [wx[0], wx[1], wy[0], wy[1]]))
        .collect();
    let per_cell = tol / cells.len() as f64;
    cells
        .par_iter()
        .map(|&b| cell(f, &rule, b, &snapped, per_cell, 0))
        .collect::<Vec<_>>()
        .into_iter()
        .sum()
}

/// Integral over the plane, split into the square of half-width `half`
/// about `center` and its complement. The complement is parametrized in
/// polar coordinates by `r = r_min(θ)/s`, `s ∈ (0, 1]`, which maps the
/// unbounded tail onto a finite box; densities decaying at least like
/// `|x|^{-3}` give a bounded integrand. Returns `(inside, outside)`.
pub fn integrate_plane(
    f: &(dyn Fn(f64, f64) -> f64 + Sync),
    center: C64,
    half: f64,
    singular: &[C64],
    order: usize,
    tol: f64,
) -> (f64, f64) {
    let inner = integrate_rectangle(
        f,
        [
            center.re - half,
            center.re + half,
            center.im - half,
            center.im + half,
        ],
        singular,
        order,
        0.5 * tol,
    );
    let rule = Rule::new(order);
    let outer_fn = move |theta: f64, s: f64| {
        let (sin, cos) = theta.sin_cos();
        let rmin = half / cos.abs().max(sin.abs());
        let r = rmin / s;
        rmin * rmin / (s * s * s) * f(center.re + r * cos, center.im + r * sin)
    };
    let outer: f64 = (0..4)
        .into_par_iter()
        .map(|k| {
            let a = -PI / 4.0 + k as f64 * PI / 2.0;
            smooth_box(&outer_fn, &rule, [a, a + PI / 2.0, 0.0, 1.0], 0.125 * tol)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    (inner, outer)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_box() {
        let f = |x: f64, y: f64| x * x * y + 1.0;
        let v = integrate_rectangle(&f, [0.0, 2.0, -1.0, 3.0], &[], 6, 1e-12);
        // ∫_0^2 x² dx ∫_{-1}^3 y dy + 8 = (8/3)(4) + 8
        assert!((v - (32.0 / 3.0 + 8.0)).abs() < 1e-12);
    }

    #[test]
    fn inverse_distance_singularity() {
        // ∫ over [-1,1]² of 1/|x| equals 8 asinh(1)
        let f = |x: f64, y: f64| 1.0 / (x * x + y * y).sqrt();
        let v = integrate_rectangle(&f, [-1.0, 1.0, -1.0, 1.0], &[C64::new(0.0, 0.0)], 10, 1e-12);
        assert!((v - 8.0 * 1.0f64.asinh()).abs() < 1e-10);
    }

    #[test]
    fn whole_plane() {
        // ∫ (1 + |x|²)^{-2} dA = π
        let f = |x: f64, y: f64| (1.0 + x * x + y * y).powi(-2);
        let (a, b) = integrate_plane(&f, C64::new(0.3, -0.2), 2.0, &[], 10, 1e-12);
        assert!((a + b - PI).abs() < 1e-10);
    }
}
