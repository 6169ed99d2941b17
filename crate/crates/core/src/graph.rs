//! Vertices, weighted edges, graph streams and matchings.
//!
//! Edges are always stored in canonical orientation `u < v`. Their heaviness
//! is the lexicographic order on [`BetaKey`] `(weight, u, v)`, a strict total
//! order on distinct edges even when weights tie.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::Hash;
use std::ops::Add;

use ordered_float::NotNan;

use crate::error::{Error, Result};

/// A vertex of a graph on `[n]⁻ = {0, .., n-1}`.
pub type Vertex = u32;

/// Real-valued edge weight for the insert-only path (non-negative, never NaN).
pub type RealWeight = NotNan<f64>;

/// An edge weight: totally ordered, non-negative and summable.
///
/// Implemented for `u64` (exact, used wherever weights key sketches) and for
/// [`RealWeight`] (insert-only streams with decimal weights).
pub trait Weight:
    Copy + Ord + Hash + Default + fmt::Debug + fmt::Display + Add<Output = Self> + Send + Sync + 'static
{
    /// Parses a decimal token, rejecting negative or non-finite values.
    fn parse_decimal(token: &str) -> Option<Self>;

    fn to_f64(self) -> f64;
}

impl Weight for u64 {
    fn parse_decimal(token: &str) -> Option<Self> {
        token.parse().ok()
    }

    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Weight for RealWeight {
    fn parse_decimal(token: &str) -> Option<Self> {
        let value: f64 = token.parse().ok()?;
        if !value.is_finite() || value < 0.0 {
            return None;
        }
        NotNan::new(value).ok()
    }

    fn to_f64(self) -> f64 {
        self.into_inner()
    }
}

/// Builds a [`RealWeight`], panicking on NaN or negative input.
pub fn real(value: f64) -> RealWeight {
    assert!(value >= 0.0, "edge weights are non-negative, got {value}");
    NotNan::new(value).expect("edge weight is NaN")
}

/// An undirected weighted edge in canonical orientation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge<W> {
    u: Vertex,
    v: Vertex,
    wt: W,
}

impl<W: Weight> Edge<W> {
    /// Creates an edge, swapping the endpoints so that `u <= v`.
    ///
    /// Self-loops are representable so that stream validation can report
    /// them; every algorithm in this crate expects `u < v`.
    pub fn new(a: Vertex, b: Vertex, wt: W) -> Self {
        let (u, v) = if a <= b { (a, b) } else { (b, a) };
        Edge { u, v, wt }
    }

    pub fn u(&self) -> Vertex {
        self.u
    }

    pub fn v(&self) -> Vertex {
        self.v
    }

    pub fn weight(&self) -> W {
        self.wt
    }

    pub fn endpoints(&self) -> (Vertex, Vertex) {
        (self.u, self.v)
    }

    pub fn is_loop(&self) -> bool {
        self.u == self.v
    }

    pub fn beta(&self) -> BetaKey<W> {
        BetaKey {
            wt: self.wt,
            u: self.u,
            v: self.v,
        }
    }

    /// Same endpoints, different weight.
    pub fn with_weight<V: Weight>(&self, wt: V) -> Edge<V> {
        Edge {
            u: self.u,
            v: self.v,
            wt,
        }
    }
}

impl<W: fmt::Display> fmt::Display for Edge<W> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.u, self.v, self.wt)
    }
}

/// The heaviness key `(weight, u, v)`, compared lexicographically.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BetaKey<W> {
    pub wt: W,
    pub u: Vertex,
    pub v: Vertex,
}

/// Orders two canonical edges by heaviness; `Greater` means `e1` is heavier.
pub fn beta_compare<W: Weight>(e1: &Edge<W>, e2: &Edge<W>) -> Ordering {
    e1.beta().cmp(&e2.beta())
}

/// Number of vertex pairs of a simple graph on `n` vertices.
pub fn edge_universe(n: u32) -> u64 {
    let n = n as u64;
    n * n.saturating_sub(1) / 2
}

/// Index of the pair `u < v` in `[n(n-1)/2]⁻`, row-major over `u`.
pub fn edge_index(n: u32, u: Vertex, v: Vertex) -> u64 {
    debug_assert!(u < v && v < n, "edge ({u},{v}) is not canonical in [{n}]");
    let (n, u, v) = (n as u64, u as u64, v as u64);
    u * n - u * (u + 1) / 2 + (v - u - 1)
}

/// Inverse of [`edge_index`].
pub fn edge_from_index(n: u32, eid: u64) -> (Vertex, Vertex) {
    debug_assert!(eid < edge_universe(n));
    let row_start = |u: u64| u * n as u64 - u * (u + 1) / 2;
    // invariant: row_start(lo) <= eid < row_start(hi); row_start(n-1) is the universe size
    let (mut lo, mut hi) = (0u64, n as u64 - 1);
    while lo + 1 < hi {
        let mid = (lo + hi) / 2;
        if row_start(mid) <= eid {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let v = eid - row_start(lo) + lo + 1;
    (lo as Vertex, v as Vertex)
}

/// Stream update kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Op {
    Insert,
    Delete,
}

/// One stream element: an edge update.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StreamElement<W> {
    pub edge: Edge<W>,
    pub op: Op,
}

impl<W: Weight> StreamElement<W> {
    pub fn insert(u: Vertex, v: Vertex, wt: W) -> Self {
        StreamElement {
            edge: Edge::new(u, v, wt),
            op: Op::Insert,
        }
    }

    pub fn delete(u: Vertex, v: Vertex, wt: W) -> Self {
        StreamElement {
            edge: Edge::new(u, v, wt),
            op: Op::Delete,
        }
    }
}

/// Streaming model of a stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Insertions only.
    InsertOnly,
    /// Insertions and deletions.
    Dynamic,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::InsertOnly => "ins",
            Mode::Dynamic => "dyn",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A graph stream over vertex set `[n]⁻` with the matching parameter `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Stream<W> {
    pub n: u32,
    pub k: usize,
    pub mode: Mode,
    pub elements: Vec<StreamElement<W>>,
}

impl<W: Weight> Stream<W> {
    pub fn new(n: u32, k: usize, mode: Mode) -> Self {
        Stream {
            n,
            k,
            mode,
            elements: Vec::new(),
        }
    }

    pub fn push(&mut self, element: StreamElement<W>) {
        self.elements.push(element);
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Why a stream element is illegal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    SelfLoop {
        vertex: Vertex,
    },
    VertexOutOfRange {
        vertex: Vertex,
        n: u32,
    },
    DuplicateInsert {
        u: Vertex,
        v: Vertex,
    },
    DeleteOfAbsent {
        u: Vertex,
        v: Vertex,
    },
    WeightMismatch {
        u: Vertex,
        v: Vertex,
        live: String,
        requested: String,
    },
    DeleteInInsertOnly,
}

/// The first illegal element of a stream, with its 1-based position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StreamViolation {
    pub position: usize,
    pub kind: ViolationKind,
}

impl fmt::Display for StreamViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "element {}: ", self.position)?;
        match &self.kind {
            ViolationKind::SelfLoop { vertex } => write!(f, "self-loop at vertex {vertex}"),
            ViolationKind::VertexOutOfRange { vertex, n } => {
                write!(f, "vertex {vertex} outside [0, {n})")
            }
            ViolationKind::DuplicateInsert { u, v } => {
                write!(f, "edge ({u},{v}) inserted while already live")
            }
            ViolationKind::DeleteOfAbsent { u, v } => {
                write!(f, "edge ({u},{v}) deleted but not live")
            }
            ViolationKind::WeightMismatch { u, v, live, requested } => write!(
                f,
                "edge ({u},{v}) deleted with weight {requested}, live weight is {live}"
            ),
            ViolationKind::DeleteInInsertOnly => write!(f, "deletion in an insert-only stream"),
        }
    }
}

/// The live edge set of a graph, keyed by canonical endpoints.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LiveGraph<W> {
    n: u32,
    edges: BTreeMap<(Vertex, Vertex), W>,
}

impl<W: Weight> LiveGraph<W> {
    pub fn new(n: u32) -> Self {
        LiveGraph {
            n,
            edges: BTreeMap::new(),
        }
    }

    pub fn from_edges(n: u32, edges: impl IntoIterator<Item = Edge<W>>) -> Self {
        let mut g = LiveGraph::new(n);
        for e in edges {
            g.edges.insert(e.endpoints(), e.weight());
        }
        g
    }

    pub fn vertex_count(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn weight_of(&self, u: Vertex, v: Vertex) -> Option<W> {
        let key = if u <= v { (u, v) } else { (v, u) };
        self.edges.get(&key).copied()
    }

    /// True if `e` is live with exactly its weight.
    pub fn contains(&self, e: &Edge<W>) -> bool {
        self.edges.get(&e.endpoints()) == Some(&e.weight())
    }

    /// Live edges in endpoint order.
    pub fn edges(&self) -> Vec<Edge<W>> {
        self.edges.iter().map(|(&(u, v), &w)| Edge::new(u, v, w)).collect()
    }

    /// Applies one element, or reports why it is illegal.
    pub(crate) fn apply(&mut self, el: &StreamElement<W>, mode: Mode) -> std::result::Result<(), ViolationKind> {
        let e = &el.edge;
        if e.is_loop() {
            return Err(ViolationKind::SelfLoop { vertex: e.u() });
        }
        if e.v() >= self.n {
            return Err(ViolationKind::VertexOutOfRange {
                vertex: e.v(),
                n: self.n,
            });
        }
        let (u, v) = e.endpoints();
        match el.op {
            Op::Insert => {
                if self.edges.contains_key(&(u, v)) {
                    return Err(ViolationKind::DuplicateInsert { u, v });
                }
                self.edges.insert((u, v), e.weight());
            }
            Op::Delete => {
                if mode == Mode::InsertOnly {
                    return Err(ViolationKind::DeleteInInsertOnly);
                }
                match self.edges.get(&(u, v)) {
                    None => return Err(ViolationKind::DeleteOfAbsent { u, v }),
                    Some(&live) if live != e.weight() => {
                        return Err(ViolationKind::WeightMismatch {
                            u,
                            v,
                            live: live.to_string(),
                            requested: e.weight().to_string(),
                        })
                    }
                    Some(_) => {
                        self.edges.remove(&(u, v));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Replays a stream and returns its final live edge set.
pub fn materialize<W: Weight>(stream: &Stream<W>) -> Result<LiveGraph<W>> {
    let mut g = LiveGraph::new(stream.n);
    for (i, el) in stream.elements.iter().enumerate() {
        g.apply(el, stream.mode)
            .map_err(|kind| Error::MalformedStream(StreamViolation { position: i + 1, kind }))?;
    }
    Ok(g)
}

/// Checks a stream against the model; `Err` carries the first violation.
pub fn validate_stream<W: Weight>(stream: &Stream<W>) -> std::result::Result<(), StreamViolation> {
    match materialize(stream) {
        Ok(_) => Ok(()),
        Err(Error::MalformedStream(v)) => Err(v),
        Err(other) => unreachable!("materialize only reports stream violations: {other}"),
    }
}

/// A set of vertex-disjoint edges with its total weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching<W> {
    edges: Vec<Edge<W>>,
    weight: W,
}

impl<W: Weight> Matching<W> {
    /// Wraps `edges`, sorting them heaviest first. Does not check disjointness.
    pub fn new(mut edges: Vec<Edge<W>>) -> Self {
        edges.sort_by(|a, b| beta_compare(b, a));
        let weight = edges.iter().fold(W::default(), |acc, e| acc + e.weight());
        Matching { edges, weight }
    }

    pub fn edges(&self) -> &[Edge<W>] {
        &self.edges
    }

    pub fn weight(&self) -> W {
        self.weight
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// True if no two edges share an endpoint and none is a loop.
    pub fn is_vertex_disjoint(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.edges
            .iter()
            .all(|e| !e.is_loop() && seen.insert(e.u()) && seen.insert(e.v()))
    }

    /// True if this is a matching of `g` whose edges carry their live weights.
    pub fn is_matching_of(&self, g: &LiveGraph<W>) -> bool {
        self.is_vertex_disjoint() && self.edges.iter().all(|e| g.contains(e))
    }
}
