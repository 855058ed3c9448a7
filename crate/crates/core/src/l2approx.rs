//! Lück approximation along towers of finite quotients.
//!
//! Matrices over the integral group ring of `Z^d` are specialized to the
//! finite quotients `∏ Z/n_i`; their kernel dimensions are computed exactly
//! (integer rank in the permutation basis) and, independently, as a sum of
//! numerical coranks over the characters of the quotient. The von Neumann
//! dimension of the kernel is the average corank of the symbol over the
//! torus `T^d`, estimated on a uniform grid.

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix};
use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complexes::CwSurface;
use crate::covers::{
    build_cover_with_limits, verify_tower, CoverLimits, DeclaredLimit, FiniteGroup, TowerSpec,
};
use crate::error::{invalid, Error, Result};
use crate::exact::IntMatrix;

/// Relative singular-value threshold: `τ = 1e-8 · (σ_max + 1)`.
pub const SINGULAR_VALUE_THRESHOLD: f64 = 1e-8;

/// Default grid size per circle for [`vn_kernel_dim_fourier`].
pub const DEFAULT_VN_NODES: usize = 4096;

/// Default cap on the order of a finite quotient.
pub const DEFAULT_MAX_QUOTIENT_ORDER: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub exp: Vec<i64>,
    pub coef: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub r: usize,
    pub c: usize,
    pub terms: Vec<Term>,
}

/// Matrix over `Z[Z^d]`: each entry is a Laurent polynomial in `d`
/// variables with integer coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGroupRingMatrix", into = "RawGroupRingMatrix")]
pub struct GroupRingMatrix {
    rank_d: usize,
    rows: usize,
    cols: usize,
    entries: Vec<Entry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RawGroupRingMatrix {
    rank_d: usize,
    rows: usize,
    cols: usize,
    entries: Vec<Entry>,
}

impl TryFrom<RawGroupRingMatrix> for GroupRingMatrix {
    type Error = Error;
    fn try_from(r: RawGroupRingMatrix) -> Result<Self> {
        GroupRingMatrix::new(r.rank_d, r.rows, r.cols, r.entries)
    }
}

impl From<GroupRingMatrix> for RawGroupRingMatrix {
    fn from(m: GroupRingMatrix) -> Self {
        RawGroupRingMatrix {
            rank_d: m.rank_d,
            rows: m.rows,
            cols: m.cols,
            entries: m.entries,
        }
    }
}

impl GroupRingMatrix {
    pub fn new(rank_d: usize, rows: usize, cols: usize, entries: Vec<Entry>) -> Result<Self> {
        for e in &entries {
            if e.r >= rows || e.c >= cols {
                return Err(invalid(format!(
                    "entry ({}, {}) outside a {rows}×{cols} matrix",
                    e.r, e.c
                )));
            }
            if e.terms.iter().any(|t| t.exp.len() != rank_d) {
                return Err(invalid(format!(
                    "exponent vector length differs from rank {rank_d}"
                )));
            }
        }
        Ok(Self {
            rank_d,
            rows,
            cols,
            entries,
        })
    }

    /// `rows × cols` zero matrix over `Z[Z^d]`.
    pub fn zero(rank_d: usize, rows: usize, cols: usize) -> Self {
        Self {
            rank_d,
            rows,
            cols,
            entries: Vec::new(),
        }
    }

    /// 1×1 matrix over `Z[Z]` from `(exponent, coefficient)` pairs.
    pub fn laurent(terms: &[(i64, i64)]) -> Self {
        Self::from_laurent_entries(1, 1, &[(0, 0, terms.to_vec())])
    }

    /// Matrix over `Z[Z]` from `(row, col, [(exponent, coefficient)])`.
    pub fn from_laurent_entries(
        rows: usize,
        cols: usize,
        entries: &[(usize, usize, Vec<(i64, i64)>)],
    ) -> Self {
        let entries = entries
            .iter()
            .map(|(r, c, terms)| Entry {
                r: *r,
                c: *c,
                terms: terms
                    .iter()
                    .map(|&(e, coef)| Term { exp: vec![e], coef })
                    .collect(),
            })
            .collect();
        Self::new(1, rows, cols, entries).expect("well-formed laurent matrix")
    }

    pub fn rank_d(&self) -> usize {
        self.rank_d
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    /// `true` when every exponent vector is zero.
    pub fn is_constant(&self) -> bool {
        self.entries
            .iter()
            .flat_map(|e| &e.terms)
            .all(|t| t.exp.iter().all(|&x| x == 0))
    }

    /// Block-diagonal sum `self ⊕ other`.
    pub fn direct_sum(&self, other: &GroupRingMatrix) -> Result<GroupRingMatrix> {
        if self.rank_d != other.rank_d {
            return Err(invalid("direct sum of matrices over different group rings"));
        }
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().map(|e| Entry {
            r: e.r + self.rows,
            c: e.c + self.cols,
            terms: e.terms.clone(),
        }));
        GroupRingMatrix::new(
            self.rank_d,
            self.rows + other.rows,
            self.cols + other.cols,
            entries,
        )
    }

    /// Appends `k` zero columns.
    pub fn with_zero_columns(&self, k: usize) -> GroupRingMatrix {
        let mut m = self.clone();
        m.cols += k;
        m
    }

    /// Symbol at the point `(e^{iθ_1}, …, e^{iθ_d})` of the torus.
    pub fn symbol(&self, angles: &[f64]) -> DMatrix<Complex<f64>> {
        let mut m = DMatrix::from_element(self.rows, self.cols, Complex::new(0.0, 0.0));
        for e in &self.entries {
            for t in &e.terms {
                let phase: f64 = t.exp.iter().zip(angles).map(|(&k, &a)| k as f64 * a).sum();
                m[(e.r, e.c)] += Complex::from_polar(t.coef as f64, phase);
            }
        }
        m
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("matrix serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| invalid(format!("group ring matrix JSON: {e}")))
    }
}

/// Finite abelian quotient `∏ Z/n_i` of `Z^d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbelianQuotient {
    pub moduli: Vec<u64>,
}

impl AbelianQuotient {
    pub fn new(moduli: &[u64]) -> Result<Self> {
        if moduli.contains(&0) {
            return Err(invalid("quotient moduli must be positive"));
        }
        Ok(Self {
            moduli: moduli.to_vec(),
        })
    }

    pub fn cyclic(n: u64) -> Result<Self> {
        Self::new(&[n])
    }

    pub fn order(&self) -> usize {
        self.moduli.iter().map(|&n| n as usize).product()
    }

    /// Angles of character `j` (mixed radix, first factor fastest).
    pub fn character_angles(&self, j: usize) -> Vec<f64> {
        let mut j = j;
        self.moduli
            .iter()
            .map(|&n| {
                let k = j % n as usize;
                j /= n as usize;
                2.0 * PI * k as f64 / n as f64
            })
            .collect()
    }

    /// `true` if every modulus of `self` divides the matching one of `finer`.
    pub fn divides(&self, finer: &AbelianQuotient) -> bool {
        self.moduli.len() == finer.moduli.len()
            && self
                .moduli
                .iter()
                .zip(&finer.moduli)
                .all(|(a, b)| b % a == 0)
    }
}

/// Evaluations of `f` at every character of the quotient, in ascending
/// character index. Their direct sum is unitarily equivalent to the
/// finite-level matrix on `C[Q]^n`.
pub fn specialize(f: &GroupRingMatrix, q: &AbelianQuotient) -> Result<Vec<DMatrix<Complex<f64>>>> {
    check_rank(f, q)?;
    Ok((0..q.order())
        .map(|j| f.symbol(&q.character_angles(j)))
        .collect())
}

/// Integer matrix of `f` on `Z[Q]^n` in the permutation basis: row
/// `(r, x)`, column `(c, x + exp)`, indices `r·|Q| + x`.
pub fn finite_level_matrix(f: &GroupRingMatrix, q: &AbelianQuotient) -> Result<IntMatrix> {
    check_rank(f, q)?;
    let group = FiniteGroup::abelian(&q.moduli)?;
    let n = group.order();
    let mut m = IntMatrix::zeros(f.rows * n, f.cols * n);
    for e in &f.entries {
        for t in &e.terms {
            let shift = group.element(&t.exp).expect("rank checked");
            for x in 0..n {
                m.add_to(e.r * n + x, e.c * n + group.mul(x, shift), t.coef);
            }
        }
    }
    Ok(m)
}

fn check_rank(f: &GroupRingMatrix, q: &AbelianQuotient) -> Result<()> {
    if f.rank_d != q.moduli.len() {
        return Err(invalid(format!(
            "matrix over Z^{} cannot be specialized to a quotient of rank {}",
            f.rank_d,
            q.moduli.len()
        )));
    }
    Ok(())
}

/// Numerical kernel dimension (columns minus numerical rank) of a complex
/// matrix using the relative singular-value threshold.
pub fn numerical_kernel_dim(m: &DMatrix<Complex<f64>>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return m.ncols();
    }
    let sv = m.clone().singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let tau = SINGULAR_VALUE_THRESHOLD * (smax + 1.0);
    m.ncols() - sv.iter().filter(|&&s| s > tau).count()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelDims {
    /// From the exact integer rank.
    pub exact: usize,
    /// Sum of numerical character coranks.
    pub numeric: usize,
}

/// Kernel dimension of the finite-level matrix, computed exactly and from
/// character evaluations. Disagreement is an internal consistency error.
pub fn kernel_dim_finite(f: &GroupRingMatrix, q: &AbelianQuotient) -> Result<usize> {
    kernel_dims_finite(f, q, DEFAULT_MAX_QUOTIENT_ORDER).map(|k| k.exact)
}

pub fn kernel_dims_finite(
    f: &GroupRingMatrix,
    q: &AbelianQuotient,
    max_order: usize,
) -> Result<KernelDims> {
    check_rank(f, q)?;
    if q.order() > max_order {
        return Err(Error::ResourceCap {
            what: "quotient order".into(),
            requested: q.order() as u128,
            cap: max_order as u128,
        });
    }
    let exact = finite_level_matrix(f, q)?.nullity();
    let numeric: usize = (0..q.order())
        .into_par_iter()
        .map(|j| numerical_kernel_dim(&f.symbol(&q.character_angles(j))))
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    if exact != numeric {
        return Err(Error::Consistency(format!(
            "exact kernel dimension {exact} differs from character sum {numeric} at quotient {:?}",
            q.moduli
        )));
    }
    Ok(KernelDims { exact, numeric })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LueckRecord {
    /// 1-based level index.
    pub level: usize,
    pub degree: u64,
    /// Exact kernel dimension or Betti number at this level.
    pub dim: u64,
    pub normalized_num: u64,
    pub normalized_den: u64,
}

impl LueckRecord {
    fn new(level: usize, degree: u64, dim: u64) -> Self {
        let r = Ratio::new(dim, degree);
        Self {
            level,
            degree,
            dim,
            normalized_num: *r.numer(),
            normalized_den: *r.denom(),
        }
    }

    pub fn normalized(&self) -> Ratio<u64> {
        Ratio::new(self.normalized_num, self.normalized_den)
    }

    pub fn normalized_f64(&self) -> f64 {
        self.normalized_num as f64 / self.normalized_den as f64
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LueckSequence {
    pub records: Vec<LueckRecord>,
    /// Known limit of the normalized values, when available.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<i64>,
}

impl LueckSequence {
    pub fn normalized(&self) -> Vec<Ratio<u64>> {
        self.records.iter().map(LueckRecord::normalized).collect()
    }

    pub const CSV_HEADER: &'static str = "level,degree,dim,normalized_num,normalized_den";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.level, r.degree, r.dim, r.normalized_num, r.normalized_den
            ));
        }
        out
    }
}

/// Exact normalized kernel dimensions of `f` along a divisibility chain of
/// quotients.
pub fn lueck_kernel_sequence(
    f: &GroupRingMatrix,
    tower: &[AbelianQuotient],
) -> Result<LueckSequence> {
    for (k, w) in tower.windows(2).enumerate() {
        if !w[0].divides(&w[1]) {
            return Err(Error::Tower {
                level: k + 1,
                reason: format!(
                    "quotient {:?} is not nested in {:?}",
                    w[1].moduli, w[0].moduli
                ),
            });
        }
    }
    let records = tower
        .iter()
        .enumerate()
        .map(|(k, q)| {
            let dim = kernel_dims_finite(f, q, DEFAULT_MAX_QUOTIENT_ORDER)?.exact;
            Ok(LueckRecord::new(k + 1, q.order() as u64, dim as u64))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LueckSequence {
        records,
        limit: None,
    })
}

/// Deterministic random matrix over `Z[Z]`: shape up to 3×3, each entry
/// zero with probability 1/3 and otherwise supported on at most 5
/// exponents in `-2..=2` with coefficients in `-3..=3`.
pub fn seeded_group_ring_matrix(seed: u64) -> GroupRingMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = rng.gen_range(1..=3);
    let cols = rng.gen_range(1..=3);
    let mut entries = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if rng.gen_range(0..3) == 0 {
                continue;
            }
            let support = rng.gen_range(1..=5usize);
            let mut exps: Vec<i64> = (-2..=2).collect();
            exps.shuffle(&mut rng);
            let terms: Vec<Term> = exps[..support]
                .iter()
                .map(|&e| Term {
                    exp: vec![e],
                    coef: loop {
                        let v = rng.gen_range(-3..=3i64);
                        if v != 0 {
                            break v;
                        }
                    },
                })
                .collect();
            entries.push(Entry { r, c, terms });
        }
    }
    GroupRingMatrix::new(1, rows, cols, entries).expect("generated matrix is well formed")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VnMethod {
    ClosedForm,
    Quadrature,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VnDimEstimate {
    pub value: f64,
    pub method: VnMethod,
    /// Grid nodes per circle (0 for closed form).
    pub nodes: usize,
    pub error_bound: f64,
}

/// `dim_{Z^d} ker f` as the average corank of the symbol over a uniform
/// grid on `T^d` with nodes at `2π(k + ½)/N`. Rank-drop loci of a nonzero
/// symbol are measure zero, so for generic `f` the estimate is the generic
/// corank. The reported error bound is the grid resolution `1/N`.
pub fn vn_kernel_dim_fourier(f: &GroupRingMatrix, nodes: usize) -> Result<VnDimEstimate> {
    vn_kernel_dim_fourier_with_max_rank(f, nodes, 2)
}

pub fn vn_kernel_dim_fourier_with_max_rank(
    f: &GroupRingMatrix,
    nodes: usize,
    max_rank: usize,
) -> Result<VnDimEstimate> {
    if f.is_constant() {
        let m = IntMatrix::from_rows(
            &(0..f.rows)
                .map(|r| {
                    (0..f.cols)
                        .map(|c| {
                            f.entries
                                .iter()
                                .filter(|e| e.r == r && e.c == c)
                                .flat_map(|e| &e.terms)
                                .map(|t| t.coef)
                                .sum()
                        })
                        .collect()
                })
                .collect::<Vec<Vec<i64>>>(),
        );
        let value = if f.rows == 0 { f.cols } else { m.nullity() };
        return Ok(VnDimEstimate {
            value: value as f64,
            method: VnMethod::ClosedForm,
            nodes: 0,
            error_bound: 0.0,
        });
    }
    if f.rank_d > max_rank {
        return Err(invalid(format!(
            "torus quadrature supports rank ≤ {max_rank}, got {}",
            f.rank_d
        )));
    }
    if nodes == 0 {
        return Err(invalid("need at least one grid node"));
    }
    let total = nodes
        .checked_pow(f.rank_d as u32)
        .ok_or_else(|| invalid("grid too large"))?;
    let corank_sum: usize = (0..total)
        .into_par_iter()
        .map(|idx| {
            let mut idx = idx;
            let angles: Vec<f64> = (0..f.rank_d)
                .map(|_| {
                    let k = idx % nodes;
                    idx /= nodes;
                    2.0 * PI * (k as f64 + 0.5) / nodes as f64
                })
                .collect();
            numerical_kernel_dim(&f.symbol(&angles))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    Ok(VnDimEstimate {
        value: corank_sum as f64 / total as f64,
        method: VnMethod::Quadrature,
        nodes,
        error_bound: 1.0 / nodes as f64,
    })
}

/// Exact `b^p(X_k)/r_k` along a verified tower over a genus-`g` base.
/// The known limit is attached when the declared limit group is `Z` or
/// `Z^d`: `2g − 2` in degree 1 and `0` in degrees 0 and 2.
pub fn lueck_betti_sequence(
    base: &CwSurface,
    tower: &TowerSpec,
    p: usize,
) -> Result<LueckSequence> {
    lueck_betti_sequence_with_limits(base, tower, p, CoverLimits::default())
}

pub fn lueck_betti_sequence_with_limits(
    base: &CwSurface,
    tower: &TowerSpec,
    p: usize,
    limits: CoverLimits,
) -> Result<LueckSequence> {
    if p > 2 {
        return Err(invalid(format!("degree p = {p} out of range 0..=2")));
    }
    let g = base.genus();
    verify_tower(tower, g)?;
    let records = tower
        .levels
        .par_iter()
        .enumerate()
        .map(|(k, spec)| {
            let cover = build_cover_with_limits(base, spec, limits)?;
            let b = cover.betti_numbers().get(p);
            Ok(LueckRecord::new(k + 1, spec.degree() as u64, b))
        })
        .collect::<Result<Vec<_>>>()?;
    let limit = match tower.declared_limit {
        DeclaredLimit::Z | DeclaredLimit::Zd(_) => Some(if p == 1 { 2 * g as i64 - 2 } else { 0 }),
        DeclaredLimit::Other => None,
    };
    Ok(LueckSequence { records, limit })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(n: u64, d: u64) -> Ratio<u64> {
        Ratio::new(n, d)
    }

    fn t_minus_one() -> GroupRingMatrix {
        GroupRingMatrix::laurent(&[(1, 1), (0, -1)])
    }

    #[test]
    fn specialize_t_minus_one() {
        let vals = specialize(&t_minus_one(), &AbelianQuotient::cyclic(3).unwrap()).unwrap();
        let z = Complex::from_polar(1.0, 2.0 * PI / 3.0);
        let expected = [Complex::new(0.0, 0.0), z - 1.0, z * z - 1.0];
        for (m, e) in vals.iter().zip(expected) {
            assert!((m[(0, 0)] - e).norm() < 1e-14);
        }
        assert_eq!(
            kernel_dim_finite(&t_minus_one(), &AbelianQuotient::cyclic(3).unwrap()).unwrap(),
            1
        );
    }

    #[test]
    fn scalar_and_zero() {
        let two = GroupRingMatrix::laurent(&[(0, 2)]);
        let zero = GroupRingMatrix::zero(1, 1, 1);
        for k in 1..6 {
            let q = AbelianQuotient::cyclic(k).unwrap();
            assert!(specialize(&two, &q)
                .unwrap()
                .iter()
                .all(|m| (m[(0, 0)].re - 2.0).abs() < 1e-15));
            assert_eq!(kernel_dim_finite(&two, &q).unwrap(), 0);
            assert_eq!(kernel_dim_finite(&zero, &q).unwrap(), k as usize);
        }
    }

    #[test]
    fn finite_kernels() {
        let f = GroupRingMatrix::laurent(&[(1, 1), (-1, 1), (0, -1)]);
        let g = GroupRingMatrix::from_laurent_entries(2, 2, &[(0, 0, vec![(1, 1), (0, -1)])]);
        for k in 1..=24u64 {
            let q = AbelianQuotient::cyclic(k).unwrap();
            assert_eq!(kernel_dim_finite(&t_minus_one(), &q).unwrap(), 1);
            assert_eq!(
                kernel_dim_finite(&f, &q).unwrap(),
                if k % 6 == 0 { 2 } else { 0 }
            );
            assert_eq!(kernel_dim_finite(&g, &q).unwrap(), k as usize + 1);
        }
    }

    #[test]
    fn sequences() {
        let qs: Vec<_> = [2, 4, 8]
            .iter()
            .map(|&n| AbelianQuotient::cyclic(n).unwrap())
            .collect();
        let s = lueck_kernel_sequence(&t_minus_one(), &qs).unwrap();
        assert_eq!(s.normalized(), vec![ratio(1, 2), ratio(1, 4), ratio(1, 8)]);
        let s = lueck_kernel_sequence(&GroupRingMatrix::zero(1, 1, 1), &qs).unwrap();
        assert!(s.normalized().iter().all(|r| *r == ratio(1, 1)));
        let f = GroupRingMatrix::laurent(&[(1, 1), (-1, 1), (0, -1)]);
        let qs: Vec<_> = [6, 12, 24]
            .iter()
            .map(|&n| AbelianQuotient::cyclic(n).unwrap())
            .collect();
        let s = lueck_kernel_sequence(&f, &qs).unwrap();
        assert_eq!(s.normalized(), vec![ratio(1, 3), ratio(1, 6), ratio(1, 12)]);
        let bad: Vec<_> = [2, 3]
            .iter()
            .map(|&n| AbelianQuotient::cyclic(n).unwrap())
            .collect();
        assert!(lueck_kernel_sequence(&f, &bad).is_err());
    }

    #[test]
    fn fourier_estimates() {
        let e = vn_kernel_dim_fourier(&t_minus_one(), 1024).unwrap();
        assert_eq!(e.method, VnMethod::Quadrature);
        assert_eq!(e.value, 0.0);
        let z = vn_kernel_dim_fourier(&GroupRingMatrix::zero(1, 2, 2), 1024).unwrap();
        assert_eq!((z.value, z.method), (2.0, VnMethod::ClosedForm));
        let g = GroupRingMatrix::from_laurent_entries(2, 2, &[(0, 0, vec![(1, 1), (0, -1)])]);
        assert_eq!(vn_kernel_dim_fourier(&g, 1024).unwrap().value, 1.0);
    }

    #[test]
    fn csv_layout() {
        let qs: Vec<_> = [2, 4]
            .iter()
            .map(|&n| AbelianQuotient::cyclic(n).unwrap())
            .collect();
        let s = lueck_kernel_sequence(&t_minus_one(), &qs).unwrap();
        assert_eq!(
            s.to_csv(),
            "level,degree,dim,normalized_num,normalized_den\n1,2,1,1,2\n2,4,1,1,4\n"
        );
    }

    #[test]
    fn json_layout() {
        let f = t_minus_one();
        let v: serde_json::Value = serde_json::from_str(&f.to_json()).unwrap();
        assert_eq!(v["rank_d"], 1);
        assert_eq!(
            v["entries"][0]["terms"][0],
            serde_json::json!({"exp": [1], "coef": 1})
        );
        assert_eq!(GroupRingMatrix::from_json(&f.to_json()).unwrap(), f);
        let bad = r#"{"rank_d":2,"rows":1,"cols":1,"entries":[{"r":0,"c":0,"terms":[{"exp":[1],"coef":1}]}]}"#;
        assert!(GroupRingMatrix::from_json(bad).is_err());
    }
}
