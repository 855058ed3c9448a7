//! Finite CW models of closed orientable surfaces and their exact cochain
//! algebra.
//!
//! A surface is stored as vertices, oriented edges, and faces given by
//! attaching words (closed edge paths). Coboundaries are integer matrices:
//! `d0` is edges × vertices, `d1` is faces × edges.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exact::IntMatrix;

/// One letter of an attaching word: `(edge id, sign)` with sign ±1.
pub type SignedEdge = (usize, i8);

/// `(base cell id, deck element id)` for a cell of a cover.
pub type CellLabel = (usize, usize);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellLabels {
    pub vertices: Vec<CellLabel>,
    pub edges: Vec<CellLabel>,
    pub faces: Vec<CellLabel>,
}

/// Validated CW structure of a closed connected orientable surface.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSurface", into = "RawSurface")]
pub struct CwSurface {
    genus: u32,
    vertices: usize,
    edges: Vec<[usize; 2]>,
    faces: Vec<Vec<SignedEdge>>,
    labels: Option<CellLabels>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RawSurface {
    genus: u32,
    vertices: usize,
    edges: Vec<[usize; 2]>,
    faces: Vec<Vec<SignedEdge>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<CellLabels>,
}

impl TryFrom<RawSurface> for CwSurface {
    type Error = Error;

    fn try_from(raw: RawSurface) -> Result<Self> {
        CwSurface::new(raw.genus, raw.vertices, raw.edges, raw.faces, raw.labels)
    }
}

impl From<CwSurface> for RawSurface {
    fn from(s: CwSurface) -> Self {
        RawSurface {
            genus: s.genus,
            vertices: s.vertices,
            edges: s.edges,
            faces: s.faces,
            labels: s.labels,
        }
    }
}

/// Integer coboundary matrices of a surface complex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryMaps {
    /// edges × vertices
    pub d0: IntMatrix,
    /// faces × edges
    pub d1: IntMatrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BettiVector {
    pub b0: u64,
    pub b1: u64,
    pub b2: u64,
}

impl BettiVector {
    pub fn get(&self, p: usize) -> u64 {
        match p {
            0 => self.b0,
            1 => self.b1,
            2 => self.b2,
            _ => 0,
        }
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.b0 as i64 - self.b1 as i64 + self.b2 as i64
    }
}

impl CwSurface {
    /// Validates and builds a surface complex.
    pub fn new(
        genus: u32,
        vertices: usize,
        edges: Vec<[usize; 2]>,
        faces: Vec<Vec<SignedEdge>>,
        labels: Option<CellLabels>,
    ) -> Result<Self> {
        if vertices == 0 {
            return Err(invalid("complex has no vertices"));
        }
        for (e, &[s, t]) in edges.iter().enumerate() {
            if s >= vertices || t >= vertices {
                return Err(invalid(format!("edge {e} has an endpoint out of range")));
            }
        }
        for (f, word) in faces.iter().enumerate() {
            if word.is_empty() {
                return Err(invalid(format!("face {f} has an empty attaching word")));
            }
            for &(e, sign) in word {
                if e >= edges.len() {
                    return Err(invalid(format!("face {f} uses unknown edge {e}")));
                }
                if sign != 1 && sign != -1 {
                    return Err(invalid(format!("face {f} has sign {sign}, expected ±1")));
                }
            }
            for k in 0..word.len() {
                let end = path_end(&edges, word[k]);
                let next_start = path_start(&edges, word[(k + 1) % word.len()]);
                if end != next_start {
                    return Err(invalid(format!(
                        "attaching word of face {f} is not a closed edge path at letter {k}"
                    )));
                }
            }
        }
        // closed and orientable: every edge is traversed once in each direction
        let mut uses = vec![(0u32, 0u32); edges.len()];
        for &(e, sign) in faces.iter().flatten() {
            if sign > 0 {
                uses[e].0 += 1;
            } else {
                uses[e].1 += 1;
            }
        }
        if let Some(e) = uses.iter().position(|&u| u != (1, 1)) {
            return Err(invalid(format!(
                "edge {e} is not traversed exactly once in each direction by the faces"
            )));
        }
        if let Some(l) = &labels {
            if l.vertices.len() != vertices
                || l.edges.len() != edges.len()
                || l.faces.len() != faces.len()
            {
                return Err(invalid("label counts do not match cell counts"));
            }
        }
        let surface = CwSurface {
            genus,
            vertices,
            edges,
            faces,
            labels,
        };
        let chi = surface.euler_characteristic();
        if chi != 2 - 2 * genus as i64 {
            return Err(invalid(format!(
                "Euler characteristic {chi} does not match genus {genus}"
            )));
        }
        if !surface.is_connected() {
            return Err(invalid("1-skeleton is not connected"));
        }
        let maps = surface.boundary_matrices();
        if !maps.d1.mul(&maps.d0).is_zero() {
            return Err(invalid("coboundary composite d1·d0 is nonzero"));
        }
        Ok(surface)
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn faces(&self) -> &[Vec<SignedEdge>] {
        &self.faces
    }

    pub fn labels(&self) -> Option<&CellLabels> {
        self.labels.as_ref()
    }

    pub fn cell_count(&self) -> usize {
        self.vertices + self.edges.len() + self.faces.len()
    }

    /// Start vertex of an attaching word.
    pub fn word_start(&self, word: &[SignedEdge]) -> usize {
        path_start(&self.edges, word[0])
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    pub fn boundary_matrices(&self) -> BoundaryMaps {
        let mut d0 = IntMatrix::zeros(self.edges.len(), self.vertices);
        for (e, &[s, t]) in self.edges.iter().enumerate() {
            d0.add_to(e, t, 1);
            d0.add_to(e, s, -1);
        }
        let mut d1 = IntMatrix::zeros(self.faces.len(), self.edges.len());
        for (f, word) in self.faces.iter().enumerate() {
            for &(e, sign) in word {
                d1.add_to(f, e, sign as i64);
            }
        }
        BoundaryMaps { d0, d1 }
    }

    /// Betti numbers over Q via `b^p = n_p - rank d^p - rank d^{p-1}`.
    pub fn betti_numbers(&self) -> BettiVector {
        let maps = self.boundary_matrices();
        let r0 = maps.d0.rank() as u64;
        let r1 = maps.d1.rank() as u64;
        BettiVector {
            b0: self.vertices as u64 - r0,
            b1: self.edges.len() as u64 - r1 - r0,
            b2: self.faces.len() as u64 - r1,
        }
    }

    /// Betti numbers as `dim ker d^p - dim im d^{p-1}`, with kernel
    /// dimensions taken from an elimination of the transposed matrices.
    pub fn betti_via_kernels(&self) -> BettiVector {
        let maps = self.boundary_matrices();
        let ker0 = self.vertices - maps.d0.transpose().rank();
        let ker1 = self.edges.len() - maps.d1.transpose().rank();
        let im0 = maps.d0.rank();
        let im1 = maps.d1.rank();
        BettiVector {
            b0: ker0 as u64,
            b1: (ker1 - im0) as u64,
            b2: (self.faces.len() - im1) as u64,
        }
    }

    fn is_connected(&self) -> bool {
        let mut parent: Vec<usize> = (0..self.vertices).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut components = self.vertices;
        for &[s, t] in &self.edges {
            let (a, b) = (find(&mut parent, s), find(&mut parent, t));
            if a != b {
                parent[a] = b;
                components -= 1;
            }
        }
        components == 1
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("surface serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| invalid(format!("surface JSON: {e}")))
    }
}

fn path_start(edges: &[[usize; 2]], (e, sign): SignedEdge) -> usize {
    if sign > 0 {
        edges[e][0]
    } else {
        edges[e][1]
    }
}

fn path_end(edges: &[[usize; 2]], (e, sign): SignedEdge) -> usize {
    if sign > 0 {
        edges[e][1]
    } else {
        edges[e][0]
    }
}

/// Edge id of generator `a_i` (0-based `i`) in the one-vertex model.
pub fn a_edge(i: usize) -> usize {
    2 * i
}

/// Edge id of generator `b_i` (0-based `i`) in the one-vertex model.
pub fn b_edge(i: usize) -> usize {
    2 * i + 1
}

/// The surface relator `[a_1,b_1]⋯[a_g,b_g]` as a signed edge word.
pub fn surface_relator(g: u32) -> Vec<SignedEdge> {
    (0..g as usize)
        .flat_map(|i| {
            [
                (a_edge(i), 1),
                (b_edge(i), 1),
                (a_edge(i), -1),
                (b_edge(i), -1),
            ]
        })
        .collect()
}

/// One-vertex CW structure of the closed genus-`g` surface: edges
/// `a_1, b_1, …, a_g, b_g` (all loops) and one face attached along the
/// product of commutators.
pub fn genus_surface_complex(g: u32) -> Result<CwSurface> {
    if g == 0 {
        return Err(invalid("genus must be at least 1"));
    }
    let edges = vec![[0, 0]; 2 * g as usize];
    CwSurface::new(g, 1, edges, vec![surface_relator(g)], None)
}
