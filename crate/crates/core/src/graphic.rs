//! Graphic-matroid construction of coding matrices.
//!
//! Packets become edges of a multigraph, placed one at a time so that the
//! edges of every Wants set stay a forest. Forests in a graph are exactly
//! the independent column sets of its signed incidence matrix over any
//! field, so dropping one vertex row gives a coding matrix that satisfies
//! S-1 over every GF(q).
//!
//! Iteration `k`:
//!
//! 1. collect the constraint sets `W_n ∩ {p_1..p_k}` over receivers
//!    wanting `p_k`;
//! 2. forbid each vertex pair already connected by the placed edges of
//!    some constraint set, since an edge there would close a cycle;
//! 3. place `e_k` at the lexicographically smallest allowed pair, or add
//!    vertex `v_U` and place it at `(v_1, v_U)` when every pair is
//!    forbidden.
//!
//! The graph starts with two vertices and no edges.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::gf::Field;
use crate::linalg::CodingMatrix;
use crate::model::{PacketSet, WantsCollection};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("packet p{} has not been placed yet", .0 + 1)]
    UnplacedPacket(usize),
    #[error("packet index {packet} is outside 0..{packets}")]
    PacketOutOfRange { packet: usize, packets: usize },
    #[error("only {placed} of {packets} edges are placed")]
    Incomplete { placed: usize, packets: usize },
    #[error("edge location must join two distinct existing vertices, got {0}")]
    BadLocation(Location),
}

/// An unordered vertex pair `(lo, hi)` with `lo < hi`, 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Location {
    pub lo: usize,
    pub hi: usize,
}

impl Location {
    pub fn new(a: usize, b: usize) -> Self {
        Location { lo: a.min(b), hi: a.max(b) }
    }
}

/// Prints 1-based vertex indices, `(1,2)` for `(v_1, v_2)`.
impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.lo + 1, self.hi + 1)
    }
}

/// Multigraph with edge `e_k` labeled by packet `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledMultigraph {
    vertices: usize,
    edges: Vec<Location>,
}

impl Default for LabeledMultigraph {
    fn default() -> Self {
        Self::new()
    }
}

impl LabeledMultigraph {
    /// Two vertices, no edges.
    pub fn new() -> Self {
        LabeledMultigraph { vertices: 2, edges: Vec::new() }
    }

    /// A graph with the given edges; edge `i` carries packet `i`.
    pub fn from_edges(vertices: usize, edges: Vec<Location>) -> Result<Self, GraphError> {
        if let Some(&bad) = edges.iter().find(|l| l.lo >= l.hi || l.hi >= vertices) {
            return Err(GraphError::BadLocation(bad));
        }
        Ok(LabeledMultigraph { vertices, edges })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    /// Number of placed edges; packets `0..placed()` have locations.
    pub fn placed(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, packet: usize) -> Option<Location> {
        self.edges.get(packet).copied()
    }

    pub fn edges(&self) -> &[Location] {
        &self.edges
    }

    /// All `U(U-1)/2` vertex pairs in lexicographic order.
    pub fn locations(&self) -> impl Iterator<Item = Location> {
        let n = self.vertices;
        (0..n).flat_map(move |lo| (lo + 1..n).map(move |hi| Location { lo, hi }))
    }
}

/// The constraint sets for placing packet `packet`: each contains it and
/// otherwise only lower-indexed packets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationConstraints {
    pub packet: usize,
    pub sets: Vec<PacketSet>,
}

/// `{ W_n ∩ {p_1..p_k} : p_k ∈ W_n }` with duplicates removed, in order of
/// first appearance. Sets contained in others are kept.
pub fn constraints_for(wants: &WantsCollection, packet: usize) -> Result<IterationConstraints, GraphError> {
    if packet >= wants.packets() {
        return Err(GraphError::PacketOutOfRange { packet, packets: wants.packets() });
    }
    let prefix = PacketSet::prefix(packet + 1);
    let mut sets: Vec<PacketSet> = Vec::new();
    for &w in wants.sets() {
        if w.contains(packet) {
            let s = w.intersection(prefix);
            if !sets.contains(&s) {
                sets.push(s);
            }
        }
    }
    Ok(IterationConstraints { packet, sets })
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Vertex pairs where `e_k` would close a cycle inside some constraint set:
/// pairs already connected by that set's other (placed) edges.
pub fn forbidden_locations(
    graph: &LabeledMultigraph,
    constraints: &IterationConstraints,
) -> Result<BTreeSet<Location>, GraphError> {
    let mut forbidden = BTreeSet::new();
    for set in &constraints.sets {
        let others = set.without(constraints.packet);
        if others.is_empty() {
            continue;
        }
        let mut dsu = DisjointSet::new(graph.vertices);
        for p in others.iter() {
            let e = graph.edge(p).ok_or(GraphError::UnplacedPacket(p))?;
            dsu.union(e.lo, e.hi);
        }
        for loc in graph.locations() {
            if dsu.find(loc.lo) == dsu.find(loc.hi) {
                forbidden.insert(loc);
            }
        }
    }
    Ok(forbidden)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Placement {
    pub location: Location,
    /// Set when every location was forbidden and a vertex was added.
    pub new_vertex: bool,
}

/// Places the next edge, which must carry packet `graph.placed()`.
pub fn place_edge(
    graph: &mut LabeledMultigraph,
    packet: usize,
    forbidden: &BTreeSet<Location>,
) -> Result<Placement, GraphError> {
    if packet != graph.edges.len() {
        return Err(GraphError::UnplacedPacket(graph.edges.len()));
    }
    let allowed = graph.locations().find(|l| !forbidden.contains(l));
    let placement = match allowed {
        Some(location) => Placement { location, new_vertex: false },
        None => {
            graph.vertices += 1;
            Placement { location: Location { lo: 0, hi: graph.vertices - 1 }, new_vertex: true }
        }
    };
    graph.edges.push(placement.location);
    Ok(placement)
}

/// Signed incidence matrix with the first vertex row removed: edge `e_k` at
/// `(v_i, v_j)`, `i < j`, gets `1` in row `i` and `-1` in row `j`.
pub fn to_matrix(graph: &LabeledMultigraph, field: &Field, packets: usize) -> Result<CodingMatrix, GraphError> {
    if graph.placed() != packets {
        return Err(GraphError::Incomplete { placed: graph.placed(), packets });
    }
    let rows = graph.vertices.saturating_sub(1);
    let mut m = CodingMatrix::zeros(field.clone(), rows, packets);
    let minus_one = field.neg_one().value();
    for (k, e) in graph.edges.iter().enumerate() {
        if e.lo > 0 {
            m.set_raw(e.lo - 1, k, 1);
        }
        m.set_raw(e.hi - 1, k, minus_one);
    }
    Ok(m)
}

/// One iteration of the construction, for `--trace` output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationTrace {
    pub packet: usize,
    pub constraint_sets: usize,
    pub forbidden: Vec<Location>,
    pub allowed: Vec<Location>,
    pub placement: Placement,
}

impl fmt::Display for IterationTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list(f: &mut fmt::Formatter<'_>, locs: &[Location]) -> fmt::Result {
            f.write_str("{")?;
            for (i, l) in locs.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{l}")?;
            }
            f.write_str("}")
        }
        write!(f, "k={} |I|={} F=", self.packet + 1, self.constraint_sets)?;
        list(f, &self.forbidden)?;
        f.write_str(" F*=")?;
        list(f, &self.allowed)?;
        if self.placement.new_vertex {
            write!(f, " -> new-vertex v{} {}", self.placement.location.hi + 1, self.placement.location)
        } else {
            write!(f, " -> {}", self.placement.location)
        }
    }
}

/// Runs all `K` iterations and returns the graph with a per-iteration trace.
pub fn build_graph(wants: &WantsCollection) -> (LabeledMultigraph, Vec<IterationTrace>) {
    let mut graph = LabeledMultigraph::new();
    let mut trace = Vec::with_capacity(wants.packets());
    for k in 0..wants.packets() {
        let constraints = constraints_for(wants, k).expect("k < K");
        // Every set holds only packets <= k, and 0..k are placed.
        let forbidden = forbidden_locations(&graph, &constraints).expect("lower packets placed");
        let allowed = graph.locations().filter(|l| !forbidden.contains(l)).collect();
        let placement = place_edge(&mut graph, k, &forbidden).expect("next packet");
        trace.push(IterationTrace {
            packet: k,
            constraint_sets: constraints.sets.len(),
            forbidden: forbidden.into_iter().collect(),
            allowed,
            placement,
        });
    }
    (graph, trace)
}

/// Coding matrix from the graphic construction.
///
/// Returns the `0×K` matrix when no receiver wants anything. With `prune`
/// set, redundant rows are then removed lowest-index first.
pub fn build_solution(wants: &WantsCollection, field: &Field, prune: bool) -> CodingMatrix {
    if wants.max_wants() == 0 {
        return CodingMatrix::zeros(field.clone(), 0, wants.packets());
    }
    let (graph, _) = build_graph(wants);
    let matrix = to_matrix(&graph, field, wants.packets()).expect("all edges placed");
    if prune {
        // Wants sets are forests by construction, so S-1 holds.
        matrix.prune_rows(wants).expect("graphic construction satisfies S-1")
    } else {
        matrix
    }
}
