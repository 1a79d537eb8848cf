//! Edge fields on 2-dimensional simplicial complexes.
//!
//! An [`EdgeField`] assigns a group element `h_{i,j}` to every oriented edge,
//! with `h_{j,i} = h_{i,j}⁻¹`. Path holonomy composes contravariantly: the last
//! edge is the leftmost factor, so `Hol(c * c') = Hol(c')·Hol(c)`.
//!
//! Vertex gauges `g_i` are holonomies along tree paths from the base vertex.
//! The tree is a depth-first spanning tree visiting neighbors in increasing
//! order; on a full simplex it is the chain `s_0 → s_1 → … → s_n`.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{Element, Group, ALGEBRA_TOL};
use crate::pc_matrix::{GaugeVector, IndicatorMap, PcMatrix, Variance};

/// A 2-dimensional simplicial complex with a base vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplicialComplex2 {
    vertices: usize,
    edges: Vec<(usize, usize)>,
    edge_index: HashMap<(usize, usize), usize>,
    triangles: Vec<[usize; 3]>,
    adjacency: Vec<Vec<usize>>,
    base: usize,
}

impl SimplicialComplex2 {
    /// Builds a complex. Edges may be given in either orientation and are
    /// stored as `(i, j)` with `i < j`; triangles are stored sorted.
    pub fn new(
        vertices: usize,
        edges: &[(usize, usize)],
        triangles: &[[usize; 3]],
        base: usize,
    ) -> Result<Self> {
        if base >= vertices {
            return Err(Error::InvalidComplex(format!(
                "base vertex {base} out of range for {vertices} vertices"
            )));
        }
        let mut edge_index = HashMap::new();
        let mut canon = Vec::with_capacity(edges.len());
        let mut adjacency = vec![Vec::new(); vertices];
        for &(a, b) in edges {
            if a >= vertices || b >= vertices || a == b {
                return Err(Error::InvalidComplex(format!("bad edge {a}-{b}")));
            }
            let e = (a.min(b), a.max(b));
            if edge_index.insert(e, canon.len()).is_some() {
                return Err(Error::InvalidComplex(format!("duplicate edge {}-{}", e.0, e.1)));
            }
            canon.push(e);
            adjacency[e.0].push(e.1);
            adjacency[e.1].push(e.0);
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        let mut tris = Vec::with_capacity(triangles.len());
        let mut seen = std::collections::HashSet::new();
        for t in triangles {
            let mut s = *t;
            s.sort_unstable();
            if s[0] == s[1] || s[1] == s[2] {
                return Err(Error::InvalidComplex(format!("degenerate triangle {t:?}")));
            }
            for (a, b) in [(s[0], s[1]), (s[1], s[2]), (s[0], s[2])] {
                if !edge_index.contains_key(&(a, b)) {
                    return Err(Error::InvalidComplex(format!(
                        "triangle {s:?} is missing edge {a}-{b}"
                    )));
                }
            }
            if !seen.insert(s) {
                return Err(Error::InvalidComplex(format!("duplicate triangle {s:?}")));
            }
            tris.push(s);
        }
        Ok(SimplicialComplex2 {
            vertices,
            edges: canon,
            edge_index,
            triangles: tris,
            adjacency,
            base,
        })
    }

    /// The full `dim`-simplex: `dim + 1` vertices, every edge and triangle.
    pub fn full_simplex(dim: usize) -> Self {
        let v = dim + 1;
        let mut edges = Vec::new();
        let mut tris = Vec::new();
        for i in 0..v {
            for j in i + 1..v {
                edges.push((i, j));
                for k in j + 1..v {
                    tris.push([i, j, k]);
                }
            }
        }
        Self::new(v, &edges, &tris, 0).expect("full simplex is well formed")
    }

    /// An `m × m` square grid, each cell split along its main diagonal.
    /// Vertex `(r, c)` has index `r·(m+1) + c`.
    pub fn grid(m: usize) -> Self {
        let w = m + 1;
        let idx = |r: usize, c: usize| r * w + c;
        let mut edges = Vec::new();
        let mut tris = Vec::new();
        for r in 0..w {
            for c in 0..w {
                if c + 1 < w {
                    edges.push((idx(r, c), idx(r, c + 1)));
                }
                if r + 1 < w {
                    edges.push((idx(r, c), idx(r + 1, c)));
                }
                if r + 1 < w && c + 1 < w {
                    edges.push((idx(r, c), idx(r + 1, c + 1)));
                    tris.push([idx(r, c), idx(r, c + 1), idx(r + 1, c + 1)]);
                    tris.push([idx(r, c), idx(r + 1, c), idx(r + 1, c + 1)]);
                }
            }
        }
        Self::new(w * w, &edges, &tris, 0).expect("grid is well formed")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edge_index.contains_key(&(a.min(b), a.max(b)))
    }

    pub fn edge_id(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_index.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn is_connected(&self) -> bool {
        self.spanning_forest().roots.len() == 1
    }

    fn spanning_forest(&self) -> Forest {
        let mut parent = vec![None; self.vertices];
        let mut root = vec![usize::MAX; self.vertices];
        let mut roots = Vec::new();
        let starts = std::iter::once(self.base).chain(0..self.vertices);
        for start in starts {
            if root[start] != usize::MAX {
                continue;
            }
            roots.push(start);
            root[start] = start;
            // iterative preorder DFS, neighbors in increasing order
            let mut stack = vec![(start, 0usize)];
            while let Some((v, next)) = stack.last_mut() {
                let v = *v;
                if let Some(&w) = self.adjacency[v].get(*next) {
                    *next += 1;
                    if root[w] == usize::MAX {
                        root[w] = start;
                        parent[w] = Some(v);
                        stack.push((w, 0));
                    }
                } else {
                    stack.pop();
                }
            }
        }
        Forest { parent, root, roots }
    }

    /// Tree path from the component root to `v`.
    pub fn tree_path(&self, v: usize) -> EdgePath {
        self.spanning_forest().path_to(v)
    }
}

struct Forest {
    parent: Vec<Option<usize>>,
    root: Vec<usize>,
    roots: Vec<usize>,
}

impl Forest {
    fn path_to(&self, v: usize) -> EdgePath {
        let mut path = vec![v];
        let mut cur = v;
        while let Some(p) = self.parent[cur] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        EdgePath { vertices: path }
    }
}

/// A vertex sequence; consecutive vertices must be joined by edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EdgePath {
    pub vertices: Vec<usize>,
}

impl EdgePath {
    pub fn new(vertices: Vec<usize>) -> Self {
        EdgePath { vertices }
    }

    pub fn is_loop(&self) -> bool {
        self.vertices.len() > 1 && self.vertices.first() == self.vertices.last()
    }

    pub fn reversed(&self) -> EdgePath {
        let mut v = self.vertices.clone();
        v.reverse();
        EdgePath { vertices: v }
    }

    /// `self * other`; `other` must start where `self` ends.
    pub fn concat(&self, other: &EdgePath) -> Result<EdgePath> {
        match (self.vertices.last(), other.vertices.first()) {
            (Some(a), Some(b)) if a != b => Err(Error::InvalidArgument(format!(
                "cannot concatenate path ending at {a} with path starting at {b}"
            ))),
            (None, _) => Ok(other.clone()),
            _ => {
                let mut v = self.vertices.clone();
                v.extend(other.vertices.iter().skip(1));
                Ok(EdgePath { vertices: v })
            }
        }
    }

    /// Boundary loop `i → j → k → i` of a triangle.
    pub fn triangle_boundary(t: [usize; 3]) -> EdgePath {
        EdgePath {
            vertices: vec![t[0], t[1], t[2], t[0]],
        }
    }
}

/// Group elements on the edges of a complex, indexed like
/// [`SimplicialComplex2::edges`].
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeField {
    group: Group,
    values: Vec<Element>,
}

impl EdgeField {
    /// Builds a field from values keyed by edge; each key may use either
    /// orientation, `(j, i)` meaning the value of the reversed edge.
    pub fn new(
        complex: &SimplicialComplex2,
        group: Group,
        values: &BTreeMap<(usize, usize), Element>,
    ) -> Result<Self> {
        let mut out: Vec<Option<Element>> = vec![None; complex.edges.len()];
        for (&(a, b), e) in values {
            if e.group() != group {
                return Err(Error::GroupMismatch(group.tag(), e.group().tag()));
            }
            let id = complex.edge_id(a, b).ok_or(Error::ExtraEdge(a, b))?;
            if out[id].is_some() {
                return Err(Error::InvalidArgument(format!("edge {a}-{b} given twice")));
            }
            out[id] = Some(if a < b { *e } else { e.inverse() });
        }
        let values = out
            .into_iter()
            .zip(&complex.edges)
            .map(|(v, &(a, b))| v.ok_or(Error::MissingEdge(a, b)))
            .collect::<Result<Vec<_>>>()?;
        Ok(EdgeField { group, values })
    }

    /// Builds a field from canonical-edge values in edge order.
    pub fn from_values(
        complex: &SimplicialComplex2,
        group: Group,
        values: Vec<Element>,
    ) -> Result<Self> {
        if values.len() != complex.edges.len() {
            return Err(Error::LengthMismatch {
                expected: complex.edges.len(),
                got: values.len(),
            });
        }
        if let Some(bad) = values.iter().find(|e| e.group() != group) {
            return Err(Error::GroupMismatch(group.tag(), bad.group().tag()));
        }
        Ok(EdgeField { group, values })
    }

    pub fn identity(complex: &SimplicialComplex2, group: Group) -> Self {
        EdgeField {
            group,
            values: vec![group.identity(); complex.edges.len()],
        }
    }

    /// The flat field `h_{i,j} = λ_j·λ_i⁻¹`.
    pub fn from_vertex_gauge(complex: &SimplicialComplex2, lambda: &GaugeVector) -> Result<Self> {
        if lambda.len() != complex.vertices {
            return Err(Error::LengthMismatch {
                expected: complex.vertices,
                got: lambda.len(),
            });
        }
        let l = lambda.as_slice();
        let values = complex
            .edges
            .iter()
            .map(|&(i, j)| l[j].mul(&l[i].inverse()))
            .collect::<Result<Vec<_>>>()?;
        Ok(EdgeField {
            group: lambda.group(),
            values,
        })
    }

    pub fn group(&self) -> Group {
        self.group
    }

    /// Values on canonical edges, in edge order.
    pub fn values(&self) -> &[Element] {
        &self.values
    }

    fn check(&self, complex: &SimplicialComplex2) -> Result<()> {
        if self.values.len() == complex.edges.len() {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                expected: complex.edges.len(),
                got: self.values.len(),
            })
        }
    }

    /// `h_{a,b}`, inverting the stored value for reversed orientation.
    pub fn get(&self, complex: &SimplicialComplex2, a: usize, b: usize) -> Result<Element> {
        let id = complex.edge_id(a, b).ok_or(Error::NonAdjacentStep(a, b))?;
        let h = self.values[id];
        Ok(if a < b { h } else { h.inverse() })
    }
}

/// Holonomy `h_{v_{m−1},v_m}·…·h_{v_0,v_1}` along a path.
pub fn path_holonomy(
    complex: &SimplicialComplex2,
    field: &EdgeField,
    path: &EdgePath,
) -> Result<Element> {
    field.check(complex)?;
    let mut acc: Option<Element> = None;
    for w in path.vertices.windows(2) {
        let h = field.get(complex, w[0], w[1])?;
        acc = Some(match acc {
            None => h,
            Some(a) => h.mul(&a)?,
        });
    }
    Ok(acc.unwrap_or_else(|| field.group.identity()))
}

fn forest_gauge(
    complex: &SimplicialComplex2,
    field: &EdgeField,
    forest: &Forest,
) -> Result<Vec<Element>> {
    (0..complex.vertices)
        .map(|v| path_holonomy(complex, field, &forest.path_to(v)))
        .collect()
}

/// Vertex gauge `g_i = Hol(γ_i)` along the spanning-tree path from the base.
pub fn spanning_tree_gauge(complex: &SimplicialComplex2, field: &EdgeField) -> Result<GaugeVector> {
    field.check(complex)?;
    let forest = complex.spanning_forest();
    if let Some(v) = (0..complex.vertices).find(|&v| forest.root[v] != complex.base) {
        return Err(Error::DisconnectedComplex(v));
    }
    GaugeVector::new(forest_gauge(complex, field, &forest)?)
}

/// The gauge-fixed PC matrix `a[i][j] = g_j·Hol(γ_i * [s_i,s_j] * γ_j⁻¹)·g_i⁻¹`.
///
/// Entries for vertex pairs without an edge are gaps. The matrix is
/// contravariant; with `g_i = Hol(γ_i)` it reproduces the edge values.
pub fn holonomy_pc_matrix(complex: &SimplicialComplex2, field: &EdgeField) -> Result<PcMatrix> {
    let g = spanning_tree_gauge(complex, field)?;
    let g = g.as_slice();
    let forest = complex.spanning_forest();
    let n = complex.vertices;
    let mut entries = vec![None; n * n];
    for i in 0..n {
        entries[i * n + i] = Some(field.group.identity());
    }
    for &(i, j) in &complex.edges {
        let loop_path = forest
            .path_to(i)
            .concat(&EdgePath::new(vec![i, j]))?
            .concat(&forest.path_to(j).reversed())?;
        let hol = path_holonomy(complex, field, &loop_path)?;
        let a = g[j].mul(&hol)?.mul(&g[i].inverse())?;
        entries[i * n + j] = Some(a);
        entries[j * n + i] = Some(a.inverse());
    }
    PcMatrix::from_entries(field.group, n, entries, Variance::Contravariant)
}

/// Local plaquette `h_{k,i}·h_{j,k}·h_{i,j}` of a sorted triangle.
pub fn local_plaquette(
    complex: &SimplicialComplex2,
    field: &EdgeField,
    t: [usize; 3],
) -> Result<Element> {
    path_holonomy(complex, field, &EdgePath::triangle_boundary(t))
}

fn find_triangle(complex: &SimplicialComplex2, t: [usize; 3]) -> Result<[usize; 3]> {
    let mut s = t;
    s.sort_unstable();
    if complex.triangles.contains(&s) {
        Ok(s)
    } else {
        Err(Error::UnknownTriangle(t))
    }
}

/// Holonomy of the based loop `γ_i * [s_i,s_j] * [s_j,s_k] * [s_k,s_i] * γ_i⁻¹`,
/// i.e. the local plaquette conjugated by `g_i⁻¹`.
///
/// On a disconnected complex the loop is based at the root of the triangle's
/// component.
pub fn triangle_curvature(
    complex: &SimplicialComplex2,
    field: &EdgeField,
    t: [usize; 3],
) -> Result<Element> {
    field.check(complex)?;
    let s = find_triangle(complex, t)?;
    let forest = complex.spanning_forest();
    based_curvature(complex, field, &forest, s)
}

fn based_curvature(
    complex: &SimplicialComplex2,
    field: &EdgeField,
    forest: &Forest,
    s: [usize; 3],
) -> Result<Element> {
    let gamma = forest.path_to(s[0]);
    let lp = gamma
        .concat(&EdgePath::triangle_boundary(s))?
        .concat(&gamma.reversed())?;
    path_holonomy(complex, field, &lp)
}

/// Indicator value of every triangle's curvature, in triangle order.
pub fn curvature_values<I: IndicatorMap + ?Sized>(
    complex: &SimplicialComplex2,
    field: &EdgeField,
    indicator: &I,
) -> Result<Vec<([usize; 3], f64)>> {
    field.check(complex)?;
    let forest = complex.spanning_forest();
    complex
        .triangles
        .iter()
        .map(|&t| Ok((t, indicator.eval(&based_curvature(complex, field, &forest, t)?))))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GlobalIi {
    pub value: f64,
    /// Worst triangle; `None` when the complex has no 2-simplices.
    pub triangle: Option<[usize; 3]>,
}

/// Supremum of `In(curvature)` over all triangles, lexicographic tie-break.
pub fn global_ii<I: IndicatorMap + ?Sized>(
    complex: &SimplicialComplex2,
    field: &EdgeField,
    indicator: &I,
) -> Result<GlobalIi> {
    let at_identity = indicator.eval(&field.group.identity());
    if at_identity.abs() > ALGEBRA_TOL || at_identity.is_nan() {
        return Err(Error::NotIndicatorMap(at_identity));
    }
    let mut vals = curvature_values(complex, field, indicator)?;
    vals.sort_by_key(|v| v.0);
    let mut best = GlobalIi {
        value: 0.0,
        triangle: None,
    };
    for (t, v) in vals {
        if best.triangle.is_none() || v > best.value {
            best = GlobalIi {
                value: v,
                triangle: Some(t),
            };
        }
    }
    Ok(best)
}

/// Vertex gauge action `h_{i,j} ↦ μ_j·h_{i,j}·μ_i⁻¹`.
pub fn gauge_transform_field(
    complex: &SimplicialComplex2,
    field: &EdgeField,
    mu: &GaugeVector,
) -> Result<EdgeField> {
    field.check(complex)?;
    if mu.len() != complex.vertices {
        return Err(Error::LengthMismatch {
            expected: complex.vertices,
            got: mu.len(),
        });
    }
    let m = mu.as_slice();
    let values = complex
        .edges
        .iter()
        .zip(&field.values)
        .map(|(&(i, j), h)| m[j].mul(h)?.mul(&m[i].inverse()))
        .collect::<Result<Vec<_>>>()?;
    Ok(EdgeField {
        group: field.group,
        values,
    })
}
