//! The induced clean graph `Cl₂(R)` on pairs `(e, u)` with `e ≠ 0`.
//!
//! Vertices are laid out cell by cell: vertex `(e_i, u_j)` has id `i·φ + j`, so
//! cell `V_i` is the contiguous id range `[i·φ, (i+1)·φ)`. Adjacency is a dense
//! symmetric bit matrix.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ring::{FactoredRing, IdempotentTable, RingElement, UnitTable};

pub const DEFAULT_VERTEX_BUDGET: u64 = 50_000;

/// Shortest-path length, with a sentinel for unreachable pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Distance {
    Finite(u32),
    Infinite,
}

impl Distance {
    pub fn finite(self) -> Option<u32> {
        match self {
            Distance::Finite(d) => Some(d),
            Distance::Infinite => None,
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Finite(d) => write!(f, "{d}"),
            Distance::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Distance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" => Ok(Distance::Infinite),
            t => t
                .parse()
                .map(Distance::Finite)
                .map_err(|_| Error::InvalidInput(format!("bad distance {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CleanVertex {
    pub idem_index: usize,
    pub unit_index: usize,
}

impl CleanVertex {
    pub fn new(idem_index: usize, unit_index: usize) -> Self {
        CleanVertex {
            idem_index,
            unit_index,
        }
    }

    pub fn id(&self, phi: usize) -> usize {
        self.idem_index * phi + self.unit_index
    }

    pub fn from_id(id: usize, phi: usize) -> Self {
        CleanVertex {
            idem_index: id / phi,
            unit_index: id % phi,
        }
    }

    pub fn label(&self) -> String {
        format!("e{}_u{}", self.idem_index, self.unit_index)
    }
}

/// Dense square bit matrix, one row of `words` u64 per vertex.
#[derive(Debug, Clone)]
struct BitMatrix {
    n: usize,
    words: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    fn new(n: usize) -> Self {
        let words = n.div_ceil(64);
        BitMatrix {
            n,
            words,
            data: vec![0; n * words],
        }
    }

    #[inline]
    fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.words..(i + 1) * self.words]
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> bool {
        self.row(i)[j / 64] >> (j % 64) & 1 == 1
    }
}

fn set_bit(row: &mut [u64], j: usize) {
    row[j / 64] |= 1 << (j % 64);
}

fn clear_bit(row: &mut [u64], j: usize) {
    row[j / 64] &= !(1 << (j % 64));
}

/// Sets bits `[lo, hi)`.
fn set_range(row: &mut [u64], lo: usize, hi: usize) {
    if lo >= hi {
        return;
    }
    let (lw, hw) = (lo / 64, (hi - 1) / 64);
    let lmask = !0u64 << (lo % 64);
    let hmask = !0u64 >> (63 - (hi - 1) % 64);
    if lw == hw {
        row[lw] |= lmask & hmask;
        return;
    }
    row[lw] |= lmask;
    for w in &mut row[lw + 1..hw] {
        *w = !0;
    }
    row[hw] |= hmask;
}

fn popcount(bits: &[u64]) -> usize {
    bits.iter().map(|w| w.count_ones() as usize).sum()
}

fn ones(bits: &[u64]) -> impl Iterator<Item = usize> + '_ {
    bits.iter().enumerate().flat_map(|(wi, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            if w == 0 {
                return None;
            }
            let b = w.trailing_zeros() as usize;
            w &= w - 1;
            Some(wi * 64 + b)
        })
    })
}

/// All-pairs distance statistics gathered by one BFS per source.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DistanceProfile {
    /// `ordered_counts[d]` = number of ordered pairs `(a, b)`, `a ≠ b`, at distance `d`.
    pub ordered_counts: Vec<u64>,
    pub unreachable_ordered: u64,
    pub max_finite: u32,
}

impl DistanceProfile {
    fn merge(mut self, other: DistanceProfile) -> DistanceProfile {
        if other.ordered_counts.len() > self.ordered_counts.len() {
            self.ordered_counts.resize(other.ordered_counts.len(), 0);
        }
        for (d, c) in other.ordered_counts.iter().enumerate() {
            self.ordered_counts[d] += c;
        }
        self.unreachable_ordered += other.unreachable_ordered;
        self.max_finite = self.max_finite.max(other.max_finite);
        self
    }

    pub fn is_connected(&self) -> bool {
        self.unreachable_ordered == 0
    }

    pub fn diameter(&self) -> Distance {
        if self.is_connected() {
            Distance::Finite(self.max_finite)
        } else {
            Distance::Infinite
        }
    }

    /// Unordered pair counts per distance; `None` if some count is odd, which
    /// would mean the BFS runs disagree on symmetric pairs.
    pub fn unordered_counts(&self) -> Option<Vec<u64>> {
        self.ordered_counts
            .iter()
            .map(|&c| (c % 2 == 0).then_some(c / 2))
            .collect()
    }
}

struct BfsScratch {
    visited: Vec<u64>,
    frontier: Vec<u64>,
    next: Vec<u64>,
}

impl BfsScratch {
    fn new(words: usize) -> Self {
        BfsScratch {
            visited: vec![0; words],
            frontier: vec![0; words],
            next: vec![0; words],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Dot,
    Json,
    CsvEdges,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dot" => Ok(ExportFormat::Dot),
            "json" => Ok(ExportFormat::Json),
            "csv-edges" => Ok(ExportFormat::CsvEdges),
            other => Err(Error::InvalidInput(format!(
                "unknown export format {other:?}"
            ))),
        }
    }
}

#[derive(Serialize)]
struct GraphJson<'a> {
    ring: String,
    num_vertices: usize,
    partition_sizes: Vec<usize>,
    edges: &'a [[usize; 2]],
}

/// `Cl₂(R)` with its idempotent and unit tables.
#[derive(Debug, Clone)]
pub struct CleanGraph {
    ring: FactoredRing,
    idempotents: IdempotentTable,
    units: UnitTable,
    adjacency: BitMatrix,
}

impl CleanGraph {
    pub fn build(ring: &FactoredRing) -> Result<Self> {
        Self::build_with_budget(ring, DEFAULT_VERTEX_BUDGET)
    }

    pub fn build_with_budget(ring: &FactoredRing, budget: u64) -> Result<Self> {
        let vertices = ring.vertex_count()?;
        if vertices > budget {
            return Err(Error::BudgetExceeded { vertices, budget });
        }
        let idempotents = ring.enumerate_idempotents();
        let units = ring.enumerate_units();
        let (cells, phi) = (idempotents.len(), units.len());
        let n = cells * phi;

        let orthogonal: Vec<Vec<bool>> = (0..cells)
            .map(|i| {
                (0..cells)
                    .map(|k| ring.is_zero(&ring.mul(idempotents.get(i), idempotents.get(k))))
                    .collect()
            })
            .collect();

        let mut adjacency = BitMatrix::new(n);
        let words = adjacency.words;
        for (id, row) in adjacency.data.chunks_exact_mut(words).enumerate() {
            let (i, j) = (id / phi, id % phi);
            let inv = units.inverse_index(j);
            for (k, &orth) in orthogonal[i].iter().enumerate() {
                if orth {
                    set_range(row, k * phi, (k + 1) * phi);
                }
                set_bit(row, k * phi + inv);
            }
            clear_bit(row, id);
        }
        Ok(CleanGraph {
            ring: ring.clone(),
            idempotents,
            units,
            adjacency,
        })
    }

    pub fn ring(&self) -> &FactoredRing {
        &self.ring
    }

    pub fn idempotents(&self) -> &IdempotentTable {
        &self.idempotents
    }

    pub fn units(&self) -> &UnitTable {
        &self.units
    }

    pub fn num_vertices(&self) -> usize {
        self.adjacency.n
    }

    pub fn phi(&self) -> usize {
        self.units.len()
    }

    /// Sizes of the cells `V_1, …, V_{2ⁿ−1}`.
    pub fn partition_sizes(&self) -> Vec<usize> {
        vec![self.phi(); self.idempotents.len()]
    }

    pub fn vertex(&self, id: usize) -> CleanVertex {
        CleanVertex::from_id(id, self.phi())
    }

    pub fn vertex_id(&self, v: CleanVertex) -> Result<usize> {
        if v.idem_index >= self.idempotents.len() || v.unit_index >= self.phi() {
            return Err(Error::Domain(format!(
                "vertex {} is not in the graph",
                v.label()
            )));
        }
        Ok(v.id(self.phi()))
    }

    pub fn elements(&self, v: CleanVertex) -> (&RingElement, &RingElement) {
        (
            self.idempotents.get(v.idem_index),
            self.units.get(v.unit_index),
        )
    }

    /// Adjacency by id, no validation; `false` on the diagonal.
    #[inline]
    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency.get(a, b)
    }

    pub fn is_adjacent(&self, a: CleanVertex, b: CleanVertex) -> Result<bool> {
        let (ia, ib) = (self.vertex_id(a)?, self.vertex_id(b)?);
        if ia == ib {
            return Err(Error::Domain("adjacency of a vertex with itself".into()));
        }
        Ok(self.has_edge(ia, ib))
    }

    pub fn neighbors(&self, id: usize) -> impl Iterator<Item = usize> + '_ {
        ones(self.adjacency.row(id))
    }

    pub fn degree(&self, id: usize) -> usize {
        popcount(self.adjacency.row(id))
    }

    pub fn edge_count(&self) -> usize {
        (0..self.num_vertices())
            .map(|i| self.degree(i))
            .sum::<usize>()
            / 2
    }

    /// Edges `(i, j)` with `i < j`, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.num_vertices()).flat_map(move |i| {
            self.neighbors(i)
                .filter(move |&j| j > i)
                .map(move |j| (i, j))
        })
    }

    /// Level-synchronous BFS from `source`. `on_level(d, members)` is called for
    /// every nonempty level `d ≥ 1`; returning `false` stops the search.
    /// Returns the number of vertices visited, source included.
    fn bfs(
        &self,
        source: usize,
        scratch: &mut BfsScratch,
        mut on_level: impl FnMut(u32, &[u64]) -> bool,
    ) -> usize {
        let n = self.num_vertices();
        let words = self.adjacency.words;
        let BfsScratch {
            visited,
            frontier,
            next,
        } = scratch;
        visited.fill(0);
        frontier.fill(0);
        set_bit(visited, source);
        set_bit(frontier, source);
        let tail_mask = if n.is_multiple_of(64) {
            !0
        } else {
            (1u64 << (n % 64)) - 1
        };

        let mut seen = 1usize;
        let mut frontier_len = 1usize;
        let mut level = 0u32;
        while seen < n {
            level += 1;
            let unvisited = n - seen;
            if frontier_len * 4 <= unvisited {
                // top-down: union of frontier rows
                next.fill(0);
                for v in ones(frontier) {
                    for (x, r) in next.iter_mut().zip(self.adjacency.row(v)) {
                        *x |= r;
                    }
                }
                for (x, s) in next.iter_mut().zip(visited.iter()) {
                    *x &= !s;
                }
            } else {
                // bottom-up: each unvisited vertex looks for a frontier neighbor
                let lo = frontier.iter().position(|&w| w != 0).unwrap_or(0);
                let hi = frontier.iter().rposition(|&w| w != 0).map_or(0, |p| p + 1);
                next.fill(0);
                for wi in 0..words {
                    let mut free = !visited[wi];
                    if wi == words - 1 {
                        free &= tail_mask;
                    }
                    while free != 0 {
                        let b = free.trailing_zeros() as usize;
                        free &= free - 1;
                        let w = wi * 64 + b;
                        let row = &self.adjacency.row(w)[lo..hi];
                        if row.iter().zip(&frontier[lo..hi]).any(|(r, f)| r & f != 0) {
                            next[wi] |= 1 << b;
                        }
                    }
                }
            }
            let found = popcount(next);
            if found == 0 {
                break;
            }
            for (s, x) in visited.iter_mut().zip(next.iter()) {
                *s |= x;
            }
            seen += found;
            frontier_len = found;
            std::mem::swap(frontier, next);
            if !on_level(level, frontier) {
                break;
            }
        }
        seen
    }

    pub fn bfs_distance(&self, a: CleanVertex, b: CleanVertex) -> Result<Distance> {
        let (ia, ib) = (self.vertex_id(a)?, self.vertex_id(b)?);
        Ok(self.bfs_distance_by_id(ia, ib))
    }

    pub fn bfs_distance_by_id(&self, a: usize, b: usize) -> Distance {
        if a == b {
            return Distance::Finite(0);
        }
        let mut scratch = BfsScratch::new(self.adjacency.words);
        let mut found = Distance::Infinite;
        self.bfs(a, &mut scratch, |d, level| {
            if level[b / 64] >> (b % 64) & 1 == 1 {
                found = Distance::Finite(d);
                return false;
            }
            true
        });
        found
    }

    /// Distances from `source` to every vertex.
    pub fn distances_from(&self, source: usize) -> Vec<Distance> {
        let mut out = vec![Distance::Infinite; self.num_vertices()];
        out[source] = Distance::Finite(0);
        let mut scratch = BfsScratch::new(self.adjacency.words);
        self.bfs(source, &mut scratch, |d, level| {
            for v in ones(level) {
                out[v] = Distance::Finite(d);
            }
            true
        });
        out
    }

    pub fn closed_form_distance(&self, a: CleanVertex, b: CleanVertex) -> Result<Distance> {
        self.vertex_id(a)?;
        self.vertex_id(b)?;
        closed_form_distance(&self.ring, self.elements(a), self.elements(b))
    }

    pub fn is_connected(&self) -> bool {
        let mut scratch = BfsScratch::new(self.adjacency.words);
        self.bfs(0, &mut scratch, |_, _| true) == self.num_vertices()
    }

    fn source_profile(&self, source: usize, scratch: &mut BfsScratch) -> DistanceProfile {
        let mut profile = DistanceProfile::default();
        let seen = self.bfs(source, scratch, |d, level| {
            let d = d as usize;
            if profile.ordered_counts.len() <= d {
                profile.ordered_counts.resize(d + 1, 0);
            }
            profile.ordered_counts[d] += popcount(level) as u64;
            true
        });
        profile.max_finite = profile.ordered_counts.len().saturating_sub(1) as u32;
        profile.unreachable_ordered = (self.num_vertices() - seen) as u64;
        profile
    }

    /// One BFS per source, fanned out over workers when parallel execution is
    /// enabled.
    pub fn distance_profile(&self) -> DistanceProfile {
        let words = self.adjacency.words;
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            (0..self.num_vertices())
                .into_par_iter()
                .map_init(
                    || BfsScratch::new(words),
                    |scratch, s| self.source_profile(s, scratch),
                )
                .reduce(DistanceProfile::default, DistanceProfile::merge)
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = words;
            self.distance_profile_sequential()
        }
    }

    /// Single-threaded variant of [`CleanGraph::distance_profile`].
    pub fn distance_profile_sequential(&self) -> DistanceProfile {
        let mut scratch = BfsScratch::new(self.adjacency.words);
        (0..self.num_vertices()).fold(DistanceProfile::default(), |acc, s| {
            acc.merge(self.source_profile(s, &mut scratch))
        })
    }

    pub fn diameter(&self) -> Distance {
        self.distance_profile().diameter()
    }

    /// Parses `(e,u)` (residues, CRT view only) or `e#i,u#j` (table indices).
    pub fn parse_vertex(&self, s: &str) -> Result<CleanVertex> {
        let t = s.trim();
        let bad = || Error::InvalidInput(format!("bad vertex literal {s:?}"));
        if let Some(rest) = t.strip_prefix("e#") {
            let (i, j) = rest.split_once(",u#").ok_or_else(bad)?;
            let v = CleanVertex::new(
                i.trim().parse().map_err(|_| bad())?,
                j.trim().parse().map_err(|_| bad())?,
            );
            self.vertex_id(v)?;
            return Ok(v);
        }
        let inner = t
            .strip_prefix('(')
            .and_then(|x| x.strip_suffix(')'))
            .ok_or_else(bad)?;
        let (e, u) = inner.split_once(',').ok_or_else(bad)?;
        let (e, u): (u64, u64) = (
            e.trim().parse().map_err(|_| bad())?,
            u.trim().parse().map_err(|_| bad())?,
        );
        let Some(modulus) = self.ring.modulus() else {
            return Err(Error::InvalidInput(format!(
                "ring {} has no single-modulus view; use the e#i,u#j form",
                self.ring
            )));
        };
        if e >= modulus || u >= modulus {
            return Err(Error::Domain(format!("residue out of range mod {modulus}")));
        }
        let ei = self
            .idempotents
            .index_of(&self.ring.from_residue(e))
            .ok_or_else(|| {
                Error::Domain(format!("{e} is not a nonzero idempotent mod {modulus}"))
            })?;
        let uj = self
            .units
            .index_of(&self.ring.from_residue(u))
            .ok_or_else(|| Error::Domain(format!("{u} is not a unit mod {modulus}")))?;
        Ok(CleanVertex::new(ei, uj))
    }

    /// `(e,u)` in residues when available, else the index form.
    pub fn format_vertex(&self, v: CleanVertex) -> String {
        let (e, u) = self.elements(v);
        match (self.ring.to_residue(e), self.ring.to_residue(u)) {
            (Some(e), Some(u)) => format!("({e},{u})"),
            _ => format!("e#{},u#{}", v.idem_index, v.unit_index),
        }
    }

    pub fn export<W: Write>(&self, format: ExportFormat, out: &mut W) -> io::Result<()> {
        match format {
            ExportFormat::Dot => {
                writeln!(out, "graph cl2 {{")?;
                for id in 0..self.num_vertices() {
                    writeln!(out, "  {id} [label=\"{}\"];", self.vertex(id).label())?;
                }
                for (i, j) in self.edges() {
                    writeln!(out, "  {i} -- {j};")?;
                }
                writeln!(out, "}}")
            }
            ExportFormat::Json => {
                let edges: Vec<[usize; 2]> = self.edges().map(|(i, j)| [i, j]).collect();
                let doc = GraphJson {
                    ring: self.ring.to_string(),
                    num_vertices: self.num_vertices(),
                    partition_sizes: self.partition_sizes(),
                    edges: &edges,
                };
                serde_json::to_writer(&mut *out, &doc)?;
                writeln!(out)
            }
            ExportFormat::CsvEdges => {
                writeln!(out, "i,j")?;
                for (i, j) in self.edges() {
                    writeln!(out, "{i},{j}")?;
                }
                Ok(())
            }
        }
    }
}

/// Distance between `(e_i, u_j)` and `(e_k, u_l)` read off the idempotent and
/// unit products alone, for rings with at least two local factors.
pub fn closed_form_distance(
    ring: &FactoredRing,
    (ei, uj): (&RingElement, &RingElement),
    (ek, ul): (&RingElement, &RingElement),
) -> Result<Distance> {
    if ring.n() < 2 {
        return Err(Error::Unsupported(format!(
            "closed-form distance needs at least two local factors; {ring} has one"
        )));
    }
    if ei == ek && uj == ul {
        return Err(Error::Domain(
            "closed-form distance of a vertex to itself".into(),
        ));
    }
    let d = if ring.is_zero(&ring.mul(ei, ek)) || ring.is_one(&ring.mul(uj, ul)) {
        1
    } else if ei == ek && ring.is_one(ei) {
        3
    } else {
        2
    };
    Ok(Distance::Finite(d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(n: u64) -> FactoredRing {
        FactoredRing::from_modulus(n).unwrap()
    }

    fn v(g: &CleanGraph, s: &str) -> CleanVertex {
        g.parse_vertex(s).unwrap()
    }

    #[test]
    fn build_examples() {
        let g = CleanGraph::build(&z(15)).unwrap();
        assert_eq!(g.num_vertices(), 24);

        let k7 = CleanGraph::build(&FactoredRing::make_ring(&[(2, 1); 3]).unwrap()).unwrap();
        assert_eq!(k7.num_vertices(), 7);
        assert_eq!(k7.edge_count(), 21);

        let z4 = CleanGraph::build(&z(4)).unwrap();
        assert_eq!(z4.num_vertices(), 2);
        assert_eq!(z4.edge_count(), 0);
    }

    #[test]
    fn budget_is_enforced() {
        let err = CleanGraph::build_with_budget(&z(15), 10).unwrap_err();
        assert_eq!(
            err,
            Error::BudgetExceeded {
                vertices: 24,
                budget: 10
            }
        );
    }

    #[test]
    fn adjacency_examples() {
        let g = CleanGraph::build(&z(15)).unwrap();
        assert!(g.is_adjacent(v(&g, "(6,2)"), v(&g, "(10,7)")).unwrap());
        assert!(g.is_adjacent(v(&g, "(6,2)"), v(&g, "(6,8)")).unwrap());
        assert!(!g.is_adjacent(v(&g, "(1,2)"), v(&g, "(1,4)")).unwrap());
        let a = v(&g, "(1,2)");
        assert!(matches!(g.is_adjacent(a, a), Err(Error::Domain(_))));
    }

    #[test]
    fn adjacency_matches_predicate() {
        for ring in [
            z(15),
            z(12),
            z(30),
            FactoredRing::make_ring(&[(3, 1), (3, 1)]).unwrap(),
        ] {
            let g = CleanGraph::build(&ring).unwrap();
            for a in 0..g.num_vertices() {
                assert!(!g.has_edge(a, a));
                for b in 0..g.num_vertices() {
                    if a == b {
                        continue;
                    }
                    let (e, u) = g.elements(g.vertex(a));
                    let (f, w) = g.elements(g.vertex(b));
                    let want = ring.is_zero(&ring.mul(e, f)) || ring.is_one(&ring.mul(u, w));
                    assert_eq!(g.has_edge(a, b), want, "{ring}: {a} {b}");
                }
            }
        }
    }

    #[test]
    fn bfs_distance_examples() {
        let g = CleanGraph::build(&z(15)).unwrap();
        assert_eq!(
            g.bfs_distance(v(&g, "(1,2)"), v(&g, "(1,4)")).unwrap(),
            Distance::Finite(3)
        );
        let a = v(&g, "(6,7)");
        assert_eq!(g.bfs_distance(a, a).unwrap(), Distance::Finite(0));

        let z4 = CleanGraph::build(&z(4)).unwrap();
        assert_eq!(
            z4.bfs_distance(v(&z4, "(1,1)"), v(&z4, "(1,3)")).unwrap(),
            Distance::Infinite
        );
    }

    #[test]
    fn closed_form_examples() {
        let g = CleanGraph::build(&z(15)).unwrap();
        let d = |a, b| g.closed_form_distance(v(&g, a), v(&g, b)).unwrap();
        assert_eq!(d("(1,2)", "(1,4)"), Distance::Finite(3));
        assert_eq!(d("(6,2)", "(6,4)"), Distance::Finite(2));
        assert_eq!(d("(6,2)", "(10,11)"), Distance::Finite(1));
        let a = v(&g, "(6,2)");
        assert!(matches!(
            g.closed_form_distance(a, a),
            Err(Error::Domain(_))
        ));

        let z4 = CleanGraph::build(&z(4)).unwrap();
        let r = z4.closed_form_distance(v(&z4, "(1,1)"), v(&z4, "(1,3)"));
        assert!(matches!(r, Err(Error::Unsupported(_))));
    }

    #[test]
    fn connectivity_and_diameter() {
        let g = CleanGraph::build(&z(15)).unwrap();
        assert!(g.is_connected());
        assert_eq!(g.diameter(), Distance::Finite(3));

        let k7 = CleanGraph::build(&FactoredRing::make_ring(&[(2, 1); 3]).unwrap()).unwrap();
        assert!(k7.is_connected());
        assert_eq!(k7.diameter(), Distance::Finite(1));

        let k3 = CleanGraph::build(&FactoredRing::make_ring(&[(2, 1); 2]).unwrap()).unwrap();
        assert!(k3.is_connected());

        let z4 = CleanGraph::build(&z(4)).unwrap();
        assert!(!z4.is_connected());
        assert_eq!(z4.diameter(), Distance::Infinite);
    }

    #[test]
    fn sequential_and_default_profiles_agree() {
        for n in [15, 12, 30, 4, 35] {
            let g = CleanGraph::build(&z(n)).unwrap();
            assert_eq!(g.distance_profile(), g.distance_profile_sequential());
        }
    }

    #[test]
    fn distances_from_agrees_with_pairwise_bfs() {
        let g = CleanGraph::build(&z(21)).unwrap();
        let row = g.distances_from(5);
        for (b, d) in row.iter().enumerate() {
            assert_eq!(*d, g.bfs_distance_by_id(5, b));
        }
    }

    #[test]
    fn vertex_literals() {
        let g = CleanGraph::build(&z(15)).unwrap();
        let a = v(&g, "(6,2)");
        assert_eq!(g.format_vertex(a), "(6,2)");
        let same = v(&g, &format!("e#{},u#{}", a.idem_index, a.unit_index));
        assert_eq!(a, same);
        assert!(g.parse_vertex("(5,2)").is_err());
        assert!(g.parse_vertex("(6,3)").is_err());
        assert!(g.parse_vertex("e#9,u#0").is_err());
        assert!(g.parse_vertex("6,2").is_err());

        let v4 = CleanGraph::build(&FactoredRing::make_ring(&[(2, 1), (2, 1)]).unwrap()).unwrap();
        assert!(v4.parse_vertex("(1,1)").is_err());
        assert_eq!(v4.format_vertex(CleanVertex::new(2, 0)), "e#2,u#0");
    }

    #[test]
    fn distance_text_round_trip() {
        for d in [Distance::Finite(0), Distance::Finite(3), Distance::Infinite] {
            assert_eq!(d.to_string().parse::<Distance>().unwrap(), d);
        }
        assert_eq!(Distance::Infinite.to_string(), "inf");
    }

    #[test]
    fn set_range_edges() {
        for (lo, hi) in [
            (0, 0),
            (0, 1),
            (3, 64),
            (63, 65),
            (0, 128),
            (5, 200),
            (64, 128),
        ] {
            let mut row = vec![0u64; 4];
            set_range(&mut row, lo, hi);
            let got: Vec<usize> = ones(&row).collect();
            assert_eq!(got, (lo..hi).collect::<Vec<_>>());
        }
    }
}
