//! Finite Galois covers of surface complexes and towers of them.
//!
//! A cover is described by a finite group `Q` and one element of `Q` per
//! base edge (a voltage assignment). For the one-vertex base these are the
//! images of the generators `a_1, b_1, …` under an epimorphism
//! `π₁(S) → Q`. Cover cells are indexed `(base cell, deck element)`
//! lexicographically: cell `(c, q)` has index `c·|Q| + q`.

use std::collections::VecDeque;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::complexes::{surface_relator, CellLabels, CwSurface, SignedEdge};
use crate::error::{invalid, Error, Result};

/// Default cap on the number of sheets of a cover built in memory.
pub const DEFAULT_MAX_DEGREE: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoverLimits {
    pub max_degree: usize,
}

impl Default for CoverLimits {
    fn default() -> Self {
        Self {
            max_degree: DEFAULT_MAX_DEGREE,
        }
    }
}

impl CoverLimits {
    fn check(&self, what: &str, degree: u128) -> Result<()> {
        if degree > self.max_degree as u128 {
            return Err(Error::ResourceCap {
                what: what.to_string(),
                requested: degree,
                cap: self.max_degree as u128,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum GroupLaw {
    Table {
        table: Vec<Vec<usize>>,
        inverse: Vec<usize>,
    },
    /// `∏ Z/n_i`, element id `Σ x_i · stride_i` with the first coordinate
    /// varying fastest.
    Abelian { moduli: Vec<u64> },
}

/// A finite group given either by an explicit multiplication table or as a
/// product of cyclic groups.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGroup", into = "RawGroup")]
pub struct FiniteGroup {
    order: usize,
    identity: usize,
    law: GroupLaw,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RawGroup {
    order: usize,
    table: Vec<Vec<usize>>,
    identity: usize,
}

impl TryFrom<RawGroup> for FiniteGroup {
    type Error = Error;
    fn try_from(raw: RawGroup) -> Result<Self> {
        if raw.table.len() != raw.order {
            return Err(invalid("group table row count does not match order"));
        }
        FiniteGroup::from_table(raw.table, raw.identity)
    }
}

impl From<FiniteGroup> for RawGroup {
    fn from(g: FiniteGroup) -> Self {
        RawGroup {
            order: g.order,
            table: g.table(),
            identity: g.identity,
        }
    }
}

impl FiniteGroup {
    /// Validates a multiplication table: closure, identity, inverses and
    /// associativity (exhaustive up to order 64, otherwise `10·d²` sampled
    /// triples).
    pub fn from_table(table: Vec<Vec<usize>>, identity: usize) -> Result<Self> {
        let d = table.len();
        if d == 0 {
            return Err(invalid("group must be nonempty"));
        }
        if identity >= d {
            return Err(invalid("identity id out of range"));
        }
        for row in &table {
            if row.len() != d || row.iter().any(|&x| x >= d) {
                return Err(invalid("group table is not a square table of element ids"));
            }
        }
        for a in 0..d {
            if table[identity][a] != a || table[a][identity] != a {
                return Err(invalid(format!("identity law fails at element {a}")));
            }
        }
        let mut inverse = vec![usize::MAX; d];
        for a in 0..d {
            let b = (0..d)
                .find(|&b| table[a][b] == identity)
                .ok_or_else(|| invalid(format!("element {a} has no right inverse")))?;
            if table[b][a] != identity {
                return Err(invalid(format!("element {a} has mismatched inverses")));
            }
            inverse[a] = b;
        }
        let assoc = |a: usize, b: usize, c: usize| table[table[a][b]][c] == table[a][table[b][c]];
        if d <= 64 {
            for a in 0..d {
                for b in 0..d {
                    for c in 0..d {
                        if !assoc(a, b, c) {
                            return Err(invalid(format!("associativity fails at ({a},{b},{c})")));
                        }
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            for _ in 0..10 * d * d {
                let (a, b, c) = (
                    rng.gen_range(0..d),
                    rng.gen_range(0..d),
                    rng.gen_range(0..d),
                );
                if !assoc(a, b, c) {
                    return Err(invalid(format!("associativity fails at ({a},{b},{c})")));
                }
            }
        }
        Ok(Self {
            order: d,
            identity,
            law: GroupLaw::Table { table, inverse },
        })
    }

    /// `∏ Z/n_i`. Rejects zero moduli.
    pub fn abelian(moduli: &[u64]) -> Result<Self> {
        if moduli.contains(&0) {
            return Err(invalid("cyclic factor of order 0"));
        }
        let order = moduli
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n as usize))
            .ok_or_else(|| invalid("group order overflows"))?;
        Ok(Self {
            order,
            identity: 0,
            law: GroupLaw::Abelian {
                moduli: moduli.to_vec(),
            },
        })
    }

    pub fn cyclic(n: u64) -> Result<Self> {
        Self::abelian(&[n])
    }

    pub fn trivial() -> Self {
        Self::abelian(&[]).expect("trivial group")
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    /// Cyclic factors when the group was built as an abelian product.
    pub fn abelian_moduli(&self) -> Option<&[u64]> {
        match &self.law {
            GroupLaw::Abelian { moduli } => Some(moduli),
            GroupLaw::Table { .. } => None,
        }
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        match &self.law {
            GroupLaw::Table { table, .. } => table[a][b],
            GroupLaw::Abelian { moduli } => {
                let (mut a, mut b) = (a, b);
                let mut out = 0;
                let mut stride = 1;
                for &n in moduli {
                    let n = n as usize;
                    out += ((a % n + b % n) % n) * stride;
                    a /= n;
                    b /= n;
                    stride *= n;
                }
                out
            }
        }
    }

    pub fn inv(&self, a: usize) -> usize {
        match &self.law {
            GroupLaw::Table { inverse, .. } => inverse[a],
            GroupLaw::Abelian { moduli } => {
                let mut a = a;
                let mut out = 0;
                let mut stride = 1;
                for &n in moduli {
                    let n = n as usize;
                    out += ((n - a % n) % n) * stride;
                    a /= n;
                    stride *= n;
                }
                out
            }
        }
    }

    /// Coordinates of an element of an abelian product group.
    pub fn coords(&self, a: usize) -> Option<Vec<u64>> {
        let moduli = self.abelian_moduli()?;
        let mut a = a;
        Some(
            moduli
                .iter()
                .map(|&n| {
                    let x = (a % n as usize) as u64;
                    a /= n as usize;
                    x
                })
                .collect(),
        )
    }

    /// Element id from coordinates (reduced modulo each factor).
    pub fn element(&self, coords: &[i64]) -> Option<usize> {
        let moduli = self.abelian_moduli()?;
        if moduli.len() != coords.len() {
            return None;
        }
        let mut out = 0;
        let mut stride = 1;
        for (&n, &x) in moduli.iter().zip(coords) {
            out += x.rem_euclid(n as i64) as usize * stride;
            stride *= n as usize;
        }
        Some(out)
    }

    /// Materialized multiplication table.
    pub fn table(&self) -> Vec<Vec<usize>> {
        match &self.law {
            GroupLaw::Table { table, .. } => table.clone(),
            GroupLaw::Abelian { .. } => (0..self.order)
                .map(|a| (0..self.order).map(|b| self.mul(a, b)).collect())
                .collect(),
        }
    }

    /// Size of the subgroup generated by `gens` (orbit closure of the
    /// identity under right multiplication).
    pub fn generated_order(&self, gens: &[usize]) -> usize {
        let mut seen = vec![false; self.order];
        let mut queue = VecDeque::from([self.identity]);
        seen[self.identity] = true;
        let mut count = 1;
        while let Some(x) = queue.pop_front() {
            for &s in gens {
                let y = self.mul(x, s);
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    queue.push_back(y);
                }
            }
        }
        count
    }

    /// Evaluates a signed edge word under an assignment of group elements.
    pub fn evaluate(&self, word: &[SignedEdge], images: &[usize]) -> usize {
        word.iter().fold(self.identity, |acc, &(e, sign)| {
            let x = if sign > 0 {
                images[e]
            } else {
                self.inv(images[e])
            };
            self.mul(acc, x)
        })
    }
}

/// A finite Galois cover: group plus one element per base edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverSpec {
    pub group: FiniteGroup,
    pub images: Vec<usize>,
}

impl CoverSpec {
    pub fn degree(&self) -> usize {
        self.group.order()
    }

    /// Checks the spec as an epimorphism from the genus-`g` surface group:
    /// one image per generator, the relator maps to the identity, and the
    /// images generate.
    pub fn validate(&self, genus: u32) -> Result<()> {
        let n = 2 * genus as usize;
        if self.images.len() != n {
            return Err(invalid(format!(
                "cover spec has {} generator images, genus {genus} needs {n}",
                self.images.len()
            )));
        }
        if self.images.iter().any(|&x| x >= self.group.order()) {
            return Err(invalid("generator image out of range"));
        }
        if self.group.evaluate(&surface_relator(genus), &self.images) != self.group.identity() {
            return Err(invalid("surface relator does not map to the identity"));
        }
        if self.group.generated_order(&self.images) != self.group.order() {
            return Err(invalid(
                "generator images do not generate the group (cover is disconnected)",
            ));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("cover spec serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| invalid(format!("cover spec JSON: {e}")))
    }
}

/// Cover of the genus-`g` surface with deck group `Z/n`, the chosen
/// generator mapping to 1 and all others to 0.
pub fn cyclic_cover_spec(g: u32, generator: usize, n: u64) -> Result<CoverSpec> {
    if generator >= 2 * g as usize {
        return Err(invalid(format!(
            "generator index {generator} out of range for genus {g}"
        )));
    }
    let mut weights = vec![0; 2 * g as usize];
    weights[generator] = 1;
    cyclic_weight_cover_spec(g, &weights, n)
}

/// Cover with deck group `Z/n` through the homomorphism `Z^{2g} → Z`
/// given by integer weights on the generators, reduced mod `n`.
pub fn cyclic_weight_cover_spec(g: u32, weights: &[i64], n: u64) -> Result<CoverSpec> {
    if n == 0 {
        return Err(invalid("cyclic cover of order 0"));
    }
    if weights.len() != 2 * g as usize {
        return Err(invalid("one weight per generator required"));
    }
    let group = FiniteGroup::cyclic(n)?;
    let images = weights
        .iter()
        .map(|&w| group.element(&[w]).expect("abelian"))
        .collect();
    let spec = CoverSpec { group, images };
    spec.validate(g)?;
    Ok(spec)
}

/// Cover with deck group `∏ Z/n_j` through integer weight vectors on the
/// generators (`weights[i]` is the image of generator `i` in `Z^d`).
pub fn abelian_weight_cover_spec(
    g: u32,
    weights: &[Vec<i64>],
    moduli: &[u64],
) -> Result<CoverSpec> {
    if weights.len() != 2 * g as usize {
        return Err(invalid("one weight vector per generator required"));
    }
    let group = FiniteGroup::abelian(moduli)?;
    let images = weights
        .iter()
        .map(|w| {
            group
                .element(w)
                .ok_or_else(|| invalid("weight vector has the wrong rank"))
        })
        .collect::<Result<Vec<_>>>()?;
    let spec = CoverSpec { group, images };
    spec.validate(g)?;
    Ok(spec)
}

/// Mod-`n` homology cover: deck group `(Z/n)^{2g}`, generator `i` mapping
/// to the `i`-th standard basis vector.
pub fn homology_cover_spec(g: u32, n: u64, limits: CoverLimits) -> Result<CoverSpec> {
    if n < 2 {
        return Err(invalid("homology cover needs n ≥ 2"));
    }
    let degree = (n as u128).checked_pow(2 * g).unwrap_or(u128::MAX);
    limits.check("homology cover degree", degree)?;
    let weights: Vec<Vec<i64>> = (0..2 * g as usize)
        .map(|i| (0..2 * g as usize).map(|j| i64::from(i == j)).collect())
        .collect();
    abelian_weight_cover_spec(g, &weights, &vec![n; 2 * g as usize])
}

/// Builds the cover of `base` described by `spec` (one group element per
/// base edge). Cells are labelled `(base cell, deck element)`.
pub fn build_cover(base: &CwSurface, spec: &CoverSpec) -> Result<CwSurface> {
    build_cover_with_limits(base, spec, CoverLimits::default())
}

pub fn build_cover_with_limits(
    base: &CwSurface,
    spec: &CoverSpec,
    limits: CoverLimits,
) -> Result<CwSurface> {
    let group = &spec.group;
    let d = group.order();
    limits.check("cover degree", d as u128)?;
    if spec.images.len() != base.edge_count() {
        return Err(invalid(format!(
            "cover spec has {} edge images but the base (genus {}) has {} edges",
            spec.images.len(),
            base.genus(),
            base.edge_count()
        )));
    }
    if spec.images.iter().any(|&x| x >= d) {
        return Err(invalid("edge image out of range"));
    }
    for (f, word) in base.faces().iter().enumerate() {
        if group.evaluate(word, &spec.images) != group.identity() {
            return Err(invalid(format!("face {f} does not lift to a closed path")));
        }
    }

    let edges: Vec<[usize; 2]> = base
        .edges()
        .iter()
        .enumerate()
        .flat_map(|(e, &[s, t])| {
            let img = spec.images[e];
            (0..d).map(move |q| [s * d + q, t * d + group.mul(q, img)])
        })
        .collect();

    let mut faces = Vec::with_capacity(base.face_count() * d);
    for word in base.faces() {
        for q in 0..d {
            let mut cur = q;
            let lifted: Vec<SignedEdge> = word
                .iter()
                .map(|&(e, sign)| {
                    if sign > 0 {
                        let letter = (e * d + cur, 1);
                        cur = group.mul(cur, spec.images[e]);
                        letter
                    } else {
                        cur = group.mul(cur, group.inv(spec.images[e]));
                        (e * d + cur, -1)
                    }
                })
                .collect();
            faces.push(lifted);
        }
    }

    let label = |count: usize| -> Vec<(usize, usize)> {
        (0..count)
            .flat_map(|c| (0..d).map(move |q| (c, q)))
            .collect()
    };
    let labels = CellLabels {
        vertices: label(base.vertex_count()),
        edges: label(base.edge_count()),
        faces: label(base.face_count()),
    };
    // χ(cover) = d·χ(base), so genus' = 1 + d·(g - 1)
    let chi = d as i64 * base.euler_characteristic();
    let genus = u32::try_from((2 - chi) / 2).map_err(|_| invalid("cover genus overflows"))?;
    CwSurface::new(genus, base.vertex_count() * d, edges, faces, Some(labels))
}

/// Index permutations of the deck transformation `(c, q) ↦ (c, h·q)` on
/// vertices, edges and faces of a cover built by [`build_cover`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeckPermutation {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
    pub faces: Vec<usize>,
}

pub fn deck_permutation(base: &CwSurface, spec: &CoverSpec, h: usize) -> DeckPermutation {
    let d = spec.degree();
    let perm = |count: usize| -> Vec<usize> {
        (0..count)
            .flat_map(|c| (0..d).map(move |q| (c, q)))
            .map(|(c, q)| c * d + spec.group.mul(h, q))
            .collect()
    };
    DeckPermutation {
        vertices: perm(base.vertex_count()),
        edges: perm(base.edge_count()),
        faces: perm(base.face_count()),
    }
}

/// Checks that `perm` is a cellular automorphism of `cover` fixing no cell
/// unless it is the identity permutation.
pub fn is_free_automorphism(cover: &CwSurface, perm: &DeckPermutation) -> bool {
    let identity = perm.vertices.iter().enumerate().all(|(i, &j)| i == j);
    for (e, &[s, t]) in cover.edges().iter().enumerate() {
        let [s2, t2] = cover.edges()[perm.edges[e]];
        if s2 != perm.vertices[s] || t2 != perm.vertices[t] {
            return false;
        }
    }
    for (f, word) in cover.faces().iter().enumerate() {
        let image = &cover.faces()[perm.faces[f]];
        let mapped: Vec<SignedEdge> = word.iter().map(|&(e, s)| (perm.edges[e], s)).collect();
        if &mapped != image {
            return false;
        }
    }
    if identity {
        return true;
    }
    perm.vertices.iter().enumerate().all(|(i, &j)| i != j)
        && perm.edges.iter().enumerate().all(|(i, &j)| i != j)
        && perm.faces.iter().enumerate().all(|(i, &j)| i != j)
}

/// Declared limit deck group of a tower.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DeclaredLimit {
    Z,
    /// `Z^d`
    Zd(u32),
    Other,
}

impl fmt::Display for DeclaredLimit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeclaredLimit::Z => write!(f, "Z"),
            DeclaredLimit::Zd(d) => write!(f, "Z^{d}"),
            DeclaredLimit::Other => write!(f, "other"),
        }
    }
}

impl TryFrom<String> for DeclaredLimit {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        match s.as_str() {
            "Z" => Ok(DeclaredLimit::Z),
            "other" => Ok(DeclaredLimit::Other),
            _ => s
                .strip_prefix("Z^")
                .and_then(|d| d.parse::<u32>().ok())
                .filter(|&d| d >= 1)
                .map(|d| {
                    if d == 1 {
                        DeclaredLimit::Z
                    } else {
                        DeclaredLimit::Zd(d)
                    }
                })
                .ok_or_else(|| invalid(format!("unknown declared limit {s:?}"))),
        }
    }
}

impl From<DeclaredLimit> for String {
    fn from(l: DeclaredLimit) -> String {
        l.to_string()
    }
}

impl Serialize for DeclaredLimit {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for DeclaredLimit {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        DeclaredLimit::try_from(s).map_err(serde::de::Error::custom)
    }
}

/// Shipped tower families. The limit deck group and the intersection
/// property of their fundamental groups are known for these.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum TowerFamily {
    /// `Z^{2g} → Z^d` given by per-generator weight vectors, reduced mod
    /// the level moduli.
    Abelian { weights: Vec<Vec<i64>> },
    /// Mod-`n` homology covers.
    Homology,
}

/// Ordered list of covers with connecting homomorphisms `Q_{k+1} → Q_k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerSpec {
    pub levels: Vec<CoverSpec>,
    /// `connecting[k][x]` is the image in `Q_k` of `x ∈ Q_{k+1}`.
    pub connecting: Vec<Vec<usize>>,
    pub declared_limit: DeclaredLimit,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<TowerFamily>,
}

impl TowerSpec {
    pub fn degrees(&self) -> Vec<usize> {
        self.levels.iter().map(CoverSpec::degree).collect()
    }

    /// Per-generator weights into `Z^d` for abelian shipped families.
    pub fn limit_weights(&self) -> Option<&[Vec<i64>]> {
        match &self.family {
            Some(TowerFamily::Abelian { weights }) => Some(weights),
            _ => None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("tower serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| invalid(format!("tower JSON: {e}")))
    }
}

/// Tower of abelian covers: level `k` has deck group `∏_j Z/moduli[k][j]`
/// and generator `i` maps to `weights[i]`. Connecting maps are reduction
/// modulo the coarser moduli; non-divisible chains produce maps that
/// [`verify_tower`] rejects.
pub fn abelian_tower(g: u32, weights: &[Vec<i64>], moduli: &[Vec<u64>]) -> Result<TowerSpec> {
    let rank = weights.first().map_or(0, Vec::len);
    if rank == 0 || weights.iter().any(|w| w.len() != rank) {
        return Err(invalid("weight vectors must share a positive rank"));
    }
    let levels = moduli
        .iter()
        .map(|m| abelian_weight_cover_spec(g, weights, m))
        .collect::<Result<Vec<_>>>()?;
    let connecting = levels
        .windows(2)
        .map(|w| {
            let (coarse, fine) = (&w[0].group, &w[1].group);
            (0..fine.order())
                .map(|x| {
                    let c: Vec<i64> = fine
                        .coords(x)
                        .expect("abelian")
                        .iter()
                        .map(|&v| v as i64)
                        .collect();
                    coarse.element(&c).expect("same rank")
                })
                .collect()
        })
        .collect();
    let declared_limit = if rank == 1 {
        DeclaredLimit::Z
    } else {
        DeclaredLimit::Zd(rank as u32)
    };
    Ok(TowerSpec {
        levels,
        connecting,
        declared_limit,
        family: Some(TowerFamily::Abelian {
            weights: weights.to_vec(),
        }),
    })
}

/// Single-generator cyclic tower `Z/n_1, Z/n_2, …` (limit `Z`).
pub fn cyclic_tower(g: u32, generator: usize, moduli: &[u64]) -> Result<TowerSpec> {
    if generator >= 2 * g as usize {
        return Err(invalid(format!(
            "generator index {generator} out of range for genus {g}"
        )));
    }
    let weights: Vec<Vec<i64>> = (0..2 * g as usize)
        .map(|i| vec![i64::from(i == generator)])
        .collect();
    cyclic_weight_tower(g, &weights.iter().map(|w| w[0]).collect::<Vec<_>>(), moduli)
}

/// Cyclic tower through a weight homomorphism `Z^{2g} → Z`.
pub fn cyclic_weight_tower(g: u32, weights: &[i64], moduli: &[u64]) -> Result<TowerSpec> {
    let w: Vec<Vec<i64>> = weights.iter().map(|&x| vec![x]).collect();
    let m: Vec<Vec<u64>> = moduli.iter().map(|&n| vec![n]).collect();
    abelian_tower(g, &w, &m)
}

/// Tower of mod-`n` homology covers (limit approximants of `Z^{2g}`).
pub fn homology_tower(g: u32, moduli: &[u64], limits: CoverLimits) -> Result<TowerSpec> {
    for &n in moduli {
        homology_cover_spec(g, n, limits)?;
    }
    let dim = 2 * g as usize;
    let weights: Vec<Vec<i64>> = (0..dim)
        .map(|i| (0..dim).map(|j| i64::from(i == j)).collect())
        .collect();
    let m: Vec<Vec<u64>> = moduli.iter().map(|&n| vec![n; dim]).collect();
    let mut t = abelian_tower(g, &weights, &m)?;
    t.family = Some(TowerFamily::Homology);
    Ok(t)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerReport {
    pub degrees: Vec<usize>,
    pub declared_limit: DeclaredLimit,
    /// Status of the condition that the fundamental groups of the levels
    /// intersect to that of the limit cover.
    pub intersection_status: String,
}

/// Verifies every level as a cover of the genus-`g` surface and every
/// connecting map as a surjective homomorphism compatible with the
/// generator images.
pub fn verify_tower(t: &TowerSpec, g: u32) -> Result<TowerReport> {
    if t.levels.is_empty() {
        return Err(Error::Tower {
            level: 0,
            reason: "tower has no levels".into(),
        });
    }
    if t.connecting.len() + 1 != t.levels.len() {
        return Err(Error::Tower {
            level: 0,
            reason: "need exactly one connecting map per consecutive pair".into(),
        });
    }
    for (k, spec) in t.levels.iter().enumerate() {
        spec.validate(g).map_err(|e| Error::Tower {
            level: k,
            reason: e.to_string(),
        })?;
    }
    for (k, phi) in t.connecting.iter().enumerate() {
        let (coarse, fine) = (&t.levels[k], &t.levels[k + 1]);
        let fail = |reason: String| Error::Tower {
            level: k + 1,
            reason,
        };
        if phi.len() != fine.degree() || phi.iter().any(|&x| x >= coarse.degree()) {
            return Err(fail(
                "connecting map has the wrong domain or codomain".into(),
            ));
        }
        if phi[fine.group.identity()] != coarse.group.identity() {
            return Err(fail("connecting map does not preserve the identity".into()));
        }
        // multiplicativity on (all elements) × (generators) suffices since
        // the generator images generate the finer group
        for x in 0..fine.degree() {
            for &s in &fine.images {
                if phi[fine.group.mul(x, s)] != coarse.group.mul(phi[x], phi[s]) {
                    return Err(fail(format!(
                        "connecting map is not a homomorphism Q_{} → Q_{k} (order {} → {})",
                        k + 1,
                        fine.degree(),
                        coarse.degree()
                    )));
                }
            }
        }
        let mut hit = vec![false; coarse.degree()];
        for &y in phi {
            hit[y] = true;
        }
        if hit.iter().any(|h| !h) {
            return Err(fail("connecting map is not surjective".into()));
        }
        for (i, (&a, &b)) in fine.images.iter().zip(&coarse.images).enumerate() {
            if phi[a] != b {
                return Err(fail(format!("generator {i} images are incompatible")));
            }
        }
    }
    let intersection_status = match &t.family {
        Some(_) => "holds for shipped family".to_string(),
        None => "declared, unverified".to_string(),
    };
    Ok(TowerReport {
        degrees: t.degrees(),
        declared_limit: t.declared_limit.clone(),
        intersection_status,
    })
}

/// Level `k+1` of a tower presented as a Galois cover of level `k`.
pub struct RelativeCover {
    pub intermediate: CwSurface,
    pub spec: CoverSpec,
    /// `kernel[i]` is the element of `Q_{k+1}` labelled `i` in `K`.
    pub kernel: Vec<usize>,
    /// `section[q]` lifts `q ∈ Q_k` to `Q_{k+1}`.
    pub section: Vec<usize>,
}

/// Realizes level `k+1` of a verified tower as a Galois cover of level `k`
/// with deck group `K = ker(Q_{k+1} → Q_k)`. Cell `((c, q), κ)` of the
/// relative cover corresponds to cell `(c, κ·s(q))` of the direct level-`k+1`
/// cover, where `s` is a fixed section of the connecting map.
pub fn relative_cover(base: &CwSurface, t: &TowerSpec, k: usize) -> Result<RelativeCover> {
    if k + 1 >= t.levels.len() {
        return Err(invalid("relative cover needs a level above k"));
    }
    let (coarse, fine) = (&t.levels[k], &t.levels[k + 1]);
    let phi = &t.connecting[k];
    let qf = &fine.group;
    let intermediate = build_cover(base, coarse)?;

    let mut section = vec![usize::MAX; coarse.degree()];
    for x in 0..fine.degree() {
        if section[phi[x]] == usize::MAX {
            section[phi[x]] = x;
        }
    }
    let kernel: Vec<usize> = (0..fine.degree())
        .filter(|&x| phi[x] == coarse.group.identity())
        .collect();
    let mut index = vec![usize::MAX; fine.degree()];
    for (i, &x) in kernel.iter().enumerate() {
        index[x] = i;
    }
    let table: Vec<Vec<usize>> = kernel
        .iter()
        .map(|&a| kernel.iter().map(|&b| index[qf.mul(a, b)]).collect())
        .collect();
    let group = FiniteGroup::from_table(table, index[qf.identity()])?;

    let d = coarse.degree();
    let mut images = Vec::with_capacity(intermediate.edge_count());
    for e in 0..base.edge_count() {
        for q in 0..d {
            let target = coarse.group.mul(q, coarse.images[e]);
            let v = qf.mul(qf.mul(section[q], fine.images[e]), qf.inv(section[target]));
            if index[v] == usize::MAX {
                return Err(Error::Consistency(
                    "relative voltage outside the kernel".into(),
                ));
            }
            images.push(index[v]);
        }
    }
    Ok(RelativeCover {
        intermediate,
        spec: CoverSpec { group, images },
        kernel,
        section,
    })
}

impl RelativeCover {
    /// Index in the direct cover (sheet count `d_fine`) of the relative
    /// cell `((c, q), κ)` given by its relative index.
    pub fn direct_index(&self, relative_index: usize, fine: &FiniteGroup) -> usize {
        let kd = self.kernel.len();
        let d = self.section.len();
        let (intermediate_cell, kappa) = (relative_index / kd, relative_index % kd);
        let (c, q) = (intermediate_cell / d, intermediate_cell % d);
        c * fine.order() + fine.mul(self.kernel[kappa], self.section[q])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexes::genus_surface_complex;

    #[test]
    fn cyclic_spec_images() {
        let s = cyclic_cover_spec(2, 0, 5).unwrap();
        assert_eq!(s.images, vec![1, 0, 0, 0]);
        assert_eq!(s.degree(), 5);
        assert!(cyclic_cover_spec(2, 0, 0).is_err());
        assert!(cyclic_cover_spec(2, 4, 3).is_err());
    }

    #[test]
    fn genus_two_double_cover() {
        let base = genus_surface_complex(2).unwrap();
        let cover = build_cover(&base, &cyclic_cover_spec(2, 0, 2).unwrap()).unwrap();
        assert_eq!(
            (cover.vertex_count(), cover.edge_count(), cover.face_count()),
            (2, 8, 2)
        );
        assert_eq!(cover.euler_characteristic(), -4);
        assert_eq!(cover.betti_numbers().b1, 6);
        let d0 = cover.boundary_matrices().d0;
        assert_eq!(d0.nonzero_rows(), 2);
        for r in 0..d0.nrows() {
            let row = d0.row_entries(r);
            if !row.is_empty() {
                assert!(r < 2, "only lifts of a1 are non-loops");
                let mut vals: Vec<i64> = row.iter().map(|&(_, v)| v).collect();
                vals.sort();
                assert_eq!(vals, vec![-1, 1]);
            }
        }
    }

    #[test]
    fn torus_covers_are_tori() {
        let base = genus_surface_complex(1).unwrap();
        for k in 1..=6 {
            let c = build_cover(&base, &cyclic_cover_spec(1, 0, k).unwrap()).unwrap();
            let k = k as usize;
            assert_eq!(
                (c.vertex_count(), c.edge_count(), c.face_count()),
                (k, 2 * k, k)
            );
            assert_eq!(c.betti_numbers().b1, 2);
        }
    }

    #[test]
    fn trivial_cover_is_base() {
        let base = genus_surface_complex(2).unwrap();
        let spec = CoverSpec {
            group: FiniteGroup::trivial(),
            images: vec![0; 4],
        };
        let c = build_cover(&base, &spec).unwrap();
        assert_eq!(c.edges(), base.edges());
        assert_eq!(c.faces(), base.faces());
    }

    #[test]
    fn homology_cover_cap() {
        let err = homology_cover_spec(2, 11, CoverLimits::default()).unwrap_err();
        assert!(matches!(err, Error::ResourceCap { .. }));
        assert_eq!(
            homology_cover_spec(2, 3, CoverLimits::default())
                .unwrap()
                .degree(),
            81
        );
    }

    #[test]
    fn relator_failure_and_non_generation() {
        // S3 as a table: images that do not satisfy the torus relator
        let s3 = crate::fixtures::s3_group();
        let bad = CoverSpec {
            group: s3.clone(),
            images: vec![1, 3],
        };
        assert!(bad.validate(1).is_err());
        let z4 = FiniteGroup::cyclic(4).unwrap();
        let not_gen = CoverSpec {
            group: z4,
            images: vec![2, 0],
        };
        assert!(not_gen.validate(1).is_err());
    }

    #[test]
    fn bad_tables_rejected() {
        assert!(FiniteGroup::from_table(vec![vec![0, 1], vec![1, 1]], 0).is_err());
        assert!(FiniteGroup::from_table(vec![vec![0, 1], vec![1, 0]], 0).is_ok());
        // identity fails
        assert!(FiniteGroup::from_table(vec![vec![1, 0], vec![0, 1]], 0).is_err());
    }

    #[test]
    fn non_abelian_cover() {
        // genus 2 onto S3: a1 ↦ (01), b1 ↦ id, a2 ↦ (012), b2 ↦ id; relator is trivial
        let s3 = crate::fixtures::s3_group();
        let spec = CoverSpec {
            group: s3,
            images: vec![2, 0, 3, 0],
        };
        spec.validate(2).unwrap();
        let base = genus_surface_complex(2).unwrap();
        let c = build_cover(&base, &spec).unwrap();
        assert_eq!(c.euler_characteristic(), -12);
        assert_eq!(c.betti_numbers().b1, 14);
        for h in 0..6 {
            assert!(is_free_automorphism(&c, &deck_permutation(&base, &spec, h)));
        }
    }

    #[test]
    fn towers() {
        let ok = cyclic_tower(2, 0, &[1, 2, 4, 8]).unwrap();
        let rep = verify_tower(&ok, 2).unwrap();
        assert_eq!(rep.degrees, vec![1, 2, 4, 8]);
        assert_eq!(rep.declared_limit, DeclaredLimit::Z);
        let h = homology_tower(2, &[2, 4], CoverLimits::default()).unwrap();
        let rep = verify_tower(&h, 2).unwrap();
        assert_eq!(rep.declared_limit.to_string(), "Z^4");
        let bad = cyclic_tower(2, 0, &[2, 3]).unwrap();
        match verify_tower(&bad, 2) {
            Err(Error::Tower { level, .. }) => assert_eq!(level, 1),
            other => panic!("expected tower error, got {other:?}"),
        }
    }

    #[test]
    fn user_tower_status() {
        let mut t = cyclic_tower(1, 0, &[2, 4]).unwrap();
        t.family = None;
        let t = TowerSpec::from_json(&t.to_json()).unwrap();
        assert_eq!(
            verify_tower(&t, 1).unwrap().intersection_status,
            "declared, unverified"
        );
    }

    #[test]
    fn incompatible_images_rejected() {
        let mut t = cyclic_tower(2, 0, &[2, 4]).unwrap();
        // a1 ↦ 2 reduces to 0 in Z/2, but the coarse level sends a1 to 1
        t.levels[1].images = vec![2, 1, 0, 0];
        assert!(verify_tower(&t, 2).is_err());
    }

    #[test]
    fn json_layout() {
        let s = cyclic_cover_spec(1, 0, 3).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s.to_json()).unwrap();
        assert_eq!(v["group"]["order"], 3);
        assert_eq!(v["group"]["identity"], 0);
        assert_eq!(v["group"]["table"][1], serde_json::json!([1, 2, 0]));
        assert_eq!(v["images"], serde_json::json!([1, 0]));
        assert_eq!(
            CoverSpec::from_json(&s.to_json()).unwrap().group.table(),
            s.group.table()
        );
        let t = cyclic_tower(1, 0, &[2, 4]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(v["declared_limit"], "Z");
        assert_eq!(v["connecting"][0], serde_json::json!([0, 1, 0, 1]));
    }
}
