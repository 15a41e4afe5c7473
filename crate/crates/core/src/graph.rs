//! Undirected multigraphs with integer edge weights, and the graph-building
//! primitives used by the constructions: Cayley graphs, overlay, edge
//! subdivision and the `K₄`-blowup `G(H, ℓ)`.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use crate::algebra::{FiniteGroup, GeneratingSet};
use crate::error::{Error, Result};

/// Optional provenance of a vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexLabel {
    /// Position of a group element in its group's enumeration.
    Element(usize),
    /// Copy `copy` of base vertex `vertex` in the `K₄` blowup.
    Hub { copy: usize, vertex: usize },
    /// Interior vertex `step` (1-based) of subdivision path `path`.
    PathInterior { path: usize, step: usize },
}

/// Symmetric nonnegative-integer adjacency structure on `n` vertices.
///
/// `weight(u, v)` is the number of parallel edges between `u` and `v`; a
/// diagonal entry is a loop contributing its weight once to the degree.
#[derive(Clone, Debug, Default)]
pub struct Graph {
    rows: Vec<BTreeMap<usize, u64>>,
    labels: Option<Vec<VertexLabel>>,
}

impl PartialEq for Graph {
    /// Adjacency equality; labels are annotations and do not take part.
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows
    }
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Self {
            rows: vec![BTreeMap::new(); n],
            labels: None,
        }
    }

    /// Graph from an unordered edge list; repeated pairs accumulate weight.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut g = Self::new(n);
        for (u, v) in edges {
            g.add_edge(u, v, 1);
        }
        g
    }

    pub fn with_labels(mut self, labels: Vec<VertexLabel>) -> Self {
        assert_eq!(labels.len(), self.n());
        self.labels = Some(labels);
        self
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn labels(&self) -> Option<&[VertexLabel]> {
        self.labels.as_deref()
    }

    /// Adds `w` parallel edges between `u` and `v` (a loop when `u == v`).
    pub fn add_edge(&mut self, u: usize, v: usize, w: u64) {
        assert!(u < self.n() && v < self.n(), "vertex out of range");
        if w == 0 {
            return;
        }
        *self.rows[u].entry(v).or_insert(0) += w;
        if u != v {
            *self.rows[v].entry(u).or_insert(0) += w;
        }
    }

    fn remove_weight(&mut self, u: usize, v: usize, w: u64) {
        for (a, b) in [(u, v), (v, u)] {
            let entry = self.rows[a].get_mut(&b).expect("edge present");
            *entry -= w;
            if *entry == 0 {
                self.rows[a].remove(&b);
            }
            if u == v {
                break;
            }
        }
    }

    pub fn weight(&self, u: usize, v: usize) -> u64 {
        self.rows[u].get(&v).copied().unwrap_or(0)
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.rows[u].iter().map(|(&v, &w)| (v, w))
    }

    /// Weighted degree `Σ_u weight(v, u)`.
    pub fn degree(&self, v: usize) -> u64 {
        self.rows[v].values().sum()
    }

    pub fn max_degree(&self) -> u64 {
        (0..self.n()).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    /// Edges `(u, v, w)` with `u <= v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(u, row)| row.range(u..).map(move |(&v, &w)| (u, v, w)))
    }

    /// Number of edges counted with multiplicity.
    pub fn edge_units(&self) -> u64 {
        self.edges().map(|(_, _, w)| w).sum()
    }

    pub fn has_loops(&self) -> bool {
        (0..self.n()).any(|v| self.rows[v].contains_key(&v))
    }

    /// Errors unless every vertex has weighted degree `d`.
    pub fn check_regular(&self, d: u64) -> Result<()> {
        match (0..self.n()).find(|&v| self.degree(v) != d) {
            Some(vertex) => Err(Error::NotRegular {
                expected: d,
                vertex,
                found: self.degree(vertex),
            }),
            None => Ok(()),
        }
    }

    /// Breadth-first reachability over positive-weight edges.
    pub fn is_connected(&self) -> bool {
        if self.n() == 0 {
            return true;
        }
        let mut seen = vec![false; self.n()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(u) = queue.pop_front() {
            for &v in self.rows[u].keys() {
                if !seen[v] {
                    seen[v] = true;
                    reached += 1;
                    queue.push_back(v);
                }
            }
        }
        reached == self.n()
    }

    /// Subgraph induced on all vertices except `v` (later vertices shift down).
    pub fn delete_vertex(&self, v: usize) -> Graph {
        let shift = |u: usize| if u > v { u - 1 } else { u };
        let mut g = Graph::new(self.n() - 1);
        for (a, b, w) in self.edges() {
            if a != v && b != v {
                g.add_edge(shift(a), shift(b), w);
            }
        }
        g
    }

    /// Row-major dense adjacency matrix.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n();
        let mut a = vec![0.0; n * n];
        for (u, row) in self.rows.iter().enumerate() {
            for (&v, &w) in row {
                a[u * n + v] = w as f64;
            }
        }
        a
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (u, row) in self.rows.iter().enumerate() {
            y[u] = row.iter().map(|(&v, &w)| w as f64 * x[v]).sum();
        }
    }

    /// Text form: `graph v1 <n>` then one `u v w` line per edge, `u <= v`,
    /// sorted lexicographically.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "graph v1 {}", self.n()).unwrap();
        for (u, v, w) in self.edges() {
            writeln!(out, "{u} {v} {w}").unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Graph> {
        let err = |line: usize, message: String| Error::Parse { line, message };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let (hline, header) = lines
            .by_ref()
            .find(|(_, l)| !l.is_empty())
            .ok_or_else(|| err(1, "empty input".into()))?;
        let n = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["graph", "v1", n] => n
                .parse::<usize>()
                .map_err(|e| err(hline, format!("bad vertex count: {e}")))?,
            _ => {
                return Err(err(
                    hline,
                    format!("expected `graph v1 <n>`, got `{header}`"),
                ))
            }
        };
        let mut g = Graph::new(n);
        for (line, text) in lines {
            if text.is_empty() {
                continue;
            }
            let fields: Vec<&str> = text.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(err(line, format!("expected `u v w`, got `{text}`")));
            }
            let vertex = |s: &str| -> Result<usize> {
                let v: usize = s
                    .parse()
                    .map_err(|e| err(line, format!("bad vertex `{s}`: {e}")))?;
                if v >= n {
                    return Err(err(line, format!("vertex {v} out of range")));
                }
                Ok(v)
            };
            let (u, v) = (vertex(fields[0])?, vertex(fields[1])?);
            let w: u64 = fields[2]
                .parse()
                .map_err(|e| err(line, format!("bad weight `{}`: {e}", fields[2])))?;
            if w == 0 {
                return Err(err(line, "weight must be positive".into()));
            }
            if g.weight(u, v) != 0 {
                return Err(err(line, format!("duplicate edge {u} {v}")));
            }
            g.add_edge(u, v, w);
        }
        Ok(g)
    }
}

/// A multiset of existing edges, keyed by `(u, v)` with `u <= v`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EdgeSelection {
    edges: BTreeMap<(usize, usize), u64>,
}

impl EdgeSelection {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, u: usize, v: usize, multiplicity: u64) {
        let key = (u.min(v), u.max(v));
        *self.edges.entry(key).or_insert(0) += multiplicity;
    }

    /// Every edge of `g` with its full weight.
    pub fn all_of(g: &Graph) -> Self {
        let mut sel = Self::new();
        for (u, v, w) in g.edges() {
            sel.add(u, v, w);
        }
        sel
    }

    pub fn units(&self) -> u64 {
        self.edges.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.edges.iter().map(|(&(u, v), &w)| (u, v, w))
    }
}

/// `Cay(Γ, S)`: vertex `i` is the `i`-th element of `Γ`, and `weight(g, h)`
/// counts the `s ∈ S` with `gs = h`. Every vertex has degree `|S|`.
pub fn cayley_graph(gamma: &FiniteGroup, set: &GeneratingSet) -> Result<Graph> {
    for s in set.elements() {
        if !gamma.contains(s) {
            return Err(Error::UnknownElement(s.to_string()));
        }
    }
    let n = gamma.order();
    let mut g = Graph::new(n);
    for (i, x) in gamma.elements().iter().enumerate() {
        for s in set.elements() {
            let j = gamma.index_of(&gamma.mul(x, s)).expect("closed");
            // S is symmetric, so counting from each row yields a symmetric matrix
            *g.rows[i].entry(j).or_insert(0) += 1;
        }
    }
    let labels = (0..n).map(VertexLabel::Element).collect();
    Ok(g.with_labels(labels))
}

/// Weights add; both graphs must have the same vertex count.
pub fn overlay(h1: &Graph, h2: &Graph) -> Result<Graph> {
    if h1.n() != h2.n() {
        return Err(Error::SizeMismatch {
            left: h1.n(),
            right: h2.n(),
        });
    }
    let mut g = h1.clone();
    for (u, v, w) in h2.edges() {
        g.add_edge(u, v, w);
    }
    Ok(g)
}

/// Replaces every selected edge unit by a fresh path of `m` edges.
///
/// The `m - 1` interior vertices of each path are appended after the existing
/// vertices, paths in selection order, interiors in order from the smaller
/// endpoint to the larger one.
pub fn subdivide(g: &Graph, sel: &EdgeSelection, m: usize) -> Result<Graph> {
    if m == 0 {
        return Err(Error::Domain("path length must be at least 1".into()));
    }
    for (u, v, k) in sel.iter() {
        if u >= g.n() || v >= g.n() {
            return Err(Error::InvalidSelection(format!(
                "edge {u} {v} out of range"
            )));
        }
        if u == v {
            return Err(Error::InvalidSelection(format!(
                "loop at {u} cannot be subdivided"
            )));
        }
        if g.weight(u, v) < k {
            return Err(Error::InvalidSelection(format!(
                "edge {u} {v} selected {k} times but has weight {}",
                g.weight(u, v)
            )));
        }
    }
    if m == 1 {
        return Ok(g.clone());
    }
    let added = (m - 1) * sel.units() as usize;
    let mut out = g.clone();
    out.rows.extend(std::iter::repeat_n(BTreeMap::new(), added));
    let mut labels = g.labels.clone();
    let mut next = g.n();
    let mut path = 0;
    for (u, v, k) in sel.iter() {
        out.remove_weight(u, v, k);
        for _ in 0..k {
            let mut prev = u;
            for step in 1..m {
                out.add_edge(prev, next, 1);
                if let Some(l) = labels.as_mut() {
                    l.push(VertexLabel::PathInterior { path, step });
                }
                prev = next;
                next += 1;
            }
            out.add_edge(prev, v, 1);
            path += 1;
        }
    }
    out.labels = labels;
    Ok(out)
}

/// Overlay `h1` and `h2`, then subdivide every edge of `h2` into `m` edges.
pub fn overlay_subdivide(h1: &Graph, h2: &Graph, m: usize) -> Result<Graph> {
    subdivide(&overlay(h1, h2)?, &EdgeSelection::all_of(h2), m)
}

/// The `K₄` blowup of a 3-regular graph: vertex `(i, v)` is `i·N + v`; the
/// four copies of each base vertex form a `K₄`, and each of the four copies
/// of every base edge becomes a path of `ℓ` edges. The result has
/// `(6ℓ − 2)·N` vertices and maximum degree 6.
pub fn build_g_of_h(h: &Graph, ell: usize) -> Result<Graph> {
    if ell < 2 {
        return Err(Error::Precondition(format!(
            "path length {ell} must be at least 2"
        )));
    }
    if h.has_loops() {
        return Err(Error::Precondition("base graph has loops".into()));
    }
    h.check_regular(3)?;
    let n = h.n();
    let mut h1 = Graph::new(4 * n);
    let mut h2 = Graph::new(4 * n);
    for v in 0..n {
        for i in 0..4 {
            for j in i + 1..4 {
                h1.add_edge(i * n + v, j * n + v, 1);
            }
        }
    }
    for i in 0..4 {
        for (u, v, w) in h.edges() {
            h2.add_edge(i * n + u, i * n + v, w);
        }
    }
    let mut g = overlay_subdivide(&h1, &h2, ell)?;
    if let Some(labels) = g.labels.as_mut() {
        labels.clear();
    }
    let mut labels: Vec<VertexLabel> = (0..4 * n)
        .map(|x| VertexLabel::Hub {
            copy: x / n,
            vertex: x % n,
        })
        .collect();
    for path in 0..h2.edge_units() as usize {
        labels.extend((1..ell).map(|step| VertexLabel::PathInterior { path, step }));
    }
    g.labels = Some(labels);
    Ok(g)
}

/// Whether `g` is connected.
pub fn is_connected(g: &Graph) -> bool {
    g.is_connected()
}

/// Largest weighted degree.
pub fn max_degree(g: &Graph) -> u64 {
    g.max_degree()
}

/// Standard small graphs used throughout the tests and fixtures.
pub mod named {
    use super::Graph;

    pub fn complete(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))))
    }

    pub fn cycle(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).map(|u| (u, (u + 1) % n)))
    }

    pub fn path(n: usize) -> Graph {
        Graph::from_edges(n, (0..n.saturating_sub(1)).map(|u| (u, u + 1)))
    }

    /// Outer 5-cycle `0..5`, inner pentagram `5..10`, spokes `i`–`i+5`.
    pub fn petersen() -> Graph {
        let mut edges = Vec::new();
        for i in 0..5 {
            edges.push((i, (i + 1) % 5));
            edges.push((5 + i, 5 + (i + 2) % 5));
            edges.push((i, i + 5));
        }
        Graph::from_edges(10, edges)
    }
}

#[cfg(test)]
mod tests {
    use super::named::*;
    use super::*;
    use crate::algebra::{GroupElement, GroupSpec};
    use std::sync::Arc;

    #[test]
    fn small_cayley_graphs() {
        let z4 = Arc::new(FiniteGroup::cyclic(4).unwrap());
        let s = GeneratingSet::new(
            z4.clone(),
            [GroupElement::Cyclic(1), GroupElement::Cyclic(3)],
        )
        .unwrap();
        let g = cayley_graph(&z4, &s).unwrap();
        assert_eq!(g, cycle(4));

        let u5 = Arc::new(FiniteGroup::units(5).unwrap());
        let s = GeneratingSet::new(u5.clone(), (2..5).map(GroupElement::Unit)).unwrap();
        assert_eq!(cayley_graph(&u5, &s).unwrap(), complete(4));

        let z2 = Arc::new(FiniteGroup::cyclic(2).unwrap());
        let s = GeneratingSet::new(z2.clone(), [GroupElement::Cyclic(1)]).unwrap();
        let g = cayley_graph(&z2, &s).unwrap();
        assert_eq!(g.weight(0, 1), 1);
        assert_eq!(g.degree(0), 1);
    }

    #[test]
    fn cayley_degree_is_set_size() {
        let gamma = Arc::new(
            "semidirect:sl2:3:vec2"
                .parse::<GroupSpec>()
                .unwrap()
                .build()
                .unwrap(),
        );
        let t =
            GroupElement::semidirect(GroupElement::Mat2([1, 0, 0, 1]), GroupElement::Vec2([1, 0]));
        let s = GeneratingSet::symmetric_closure(
            gamma.clone(),
            [
                t,
                GroupElement::semidirect(
                    GroupElement::Mat2([1, 1, 0, 1]),
                    GroupElement::Vec2([0, 0]),
                ),
            ],
        )
        .unwrap();
        let g = cayley_graph(&gamma, &s).unwrap();
        g.check_regular(s.len() as u64).unwrap();
    }

    #[test]
    fn overlay_adds_weights() {
        let k2 = complete(2);
        let g = overlay(&k2, &k2).unwrap();
        assert_eq!(g.weight(0, 1), 2);
        assert_eq!(overlay(&k2, &Graph::new(2)).unwrap(), k2);
        assert!(matches!(
            overlay(&k2, &complete(3)),
            Err(Error::SizeMismatch { .. })
        ));
    }

    #[test]
    fn subdivision_basics() {
        let k2 = complete(2);
        let p = subdivide(&k2, &EdgeSelection::all_of(&k2), 3).unwrap();
        assert_eq!(p.n(), 4);
        assert_eq!(
            p.edges().collect::<Vec<_>>(),
            vec![(0, 2, 1), (1, 3, 1), (2, 3, 1)]
        );

        let tri = complete(3);
        assert_eq!(
            subdivide(&tri, &EdgeSelection::all_of(&tri), 1).unwrap(),
            tri
        );
        let hex = subdivide(&tri, &EdgeSelection::all_of(&tri), 2).unwrap();
        assert_eq!(hex.n(), 6);
        hex.check_regular(2).unwrap();
        assert!(hex.is_connected());

        let mut bad = EdgeSelection::new();
        bad.add(0, 1, 2);
        assert!(matches!(
            subdivide(&tri, &bad, 2),
            Err(Error::InvalidSelection(_))
        ));
    }

    #[test]
    fn g_of_h_counts() {
        let g = build_g_of_h(&complete(4), 2).unwrap();
        assert_eq!(g.n(), (12 - 2) * 4);
        let g = build_g_of_h(&petersen(), 11).unwrap();
        assert_eq!(g.n(), 640);
        assert_eq!(g.max_degree(), 6);
        assert!(g.is_connected());
        let deg6 = (0..g.n()).filter(|&v| g.degree(v) == 6).count();
        let deg2 = (0..g.n()).filter(|&v| g.degree(v) == 2).count();
        assert_eq!((deg6, deg2), (40, 6 * 10 * 10));
        assert!(matches!(
            build_g_of_h(&cycle(5), 11),
            Err(Error::NotRegular { .. })
        ));
    }

    #[test]
    fn connectivity() {
        assert!(path(4).is_connected());
        assert!(!Graph::from_edges(4, [(0, 1), (2, 3)]).is_connected());
    }

    #[test]
    fn text_format() {
        let k4 = complete(4);
        let text = k4.to_text();
        assert!(text.starts_with("graph v1 4\n0 1 1\n0 2 1\n"));
        assert_eq!(Graph::from_text(&text).unwrap(), k4);
        let err = Graph::from_text("graph v1 3\n0 1 1\n1 2 x\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        assert!(matches!(
            Graph::from_text("graph v2 3\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            Graph::from_text("graph v1 2\n0 5 1\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            Graph::from_text("graph v1 2\n0 1 0\n"),
            Err(Error::Parse { .. })
        ));
    }
}
