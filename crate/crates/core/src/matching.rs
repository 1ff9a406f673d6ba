//! Matchings in `Cl₂(R)`: the explicit block construction, its verification,
//! the closed-form matching number and an exact maximum-matching oracle.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::CleanGraph;
use crate::ring::FactoredRing;

/// Largest graph the maximum-matching oracle accepts.
pub const MATCHING_ORACLE_BUDGET: usize = 2_000;

const NONE: usize = usize::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchingResult {
    /// Matched pairs `(a, b)` of vertex ids with `a < b`.
    pub edges: Vec<(usize, usize)>,
    pub num_vertices: usize,
}

#[derive(Serialize)]
struct MatchingJson<'a> {
    size: usize,
    perfect: bool,
    edges: Vec<[usize; 2]>,
    unsaturated: &'a [usize],
}

impl MatchingResult {
    fn from_mate(mate: &[usize]) -> Self {
        let edges = mate
            .iter()
            .enumerate()
            .filter(|&(a, &b)| b != NONE && a < b)
            .map(|(a, &b)| (a, b))
            .collect();
        MatchingResult {
            edges,
            num_vertices: mate.len(),
        }
    }

    pub fn size(&self) -> usize {
        self.edges.len()
    }

    pub fn is_perfect(&self) -> bool {
        2 * self.size() == self.num_vertices
    }

    /// Saturation flags; `None` if some vertex is covered twice or out of range.
    pub fn saturated(&self) -> Option<Vec<bool>> {
        let mut seen = vec![false; self.num_vertices];
        for &(a, b) in &self.edges {
            for v in [a, b] {
                if v >= self.num_vertices || seen[v] {
                    return None;
                }
                seen[v] = true;
            }
        }
        Some(seen)
    }

    pub fn unsaturated(&self) -> Vec<usize> {
        self.saturated()
            .map(|s| {
                s.iter()
                    .enumerate()
                    .filter(|(_, &x)| !x)
                    .map(|(v, _)| v)
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let unsaturated = self.unsaturated();
        let doc = MatchingJson {
            size: self.size(),
            perfect: self.is_perfect(),
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
            unsaturated: &unsaturated,
        };
        serde_json::to_value(doc).expect("matching serializes")
    }
}

/// Builds the block matching: complement-pair and consecutive-idempotent edges
/// for each couple of self-inverse units, same-idempotent edges for each
/// inverse pair `(u, u⁻¹)`, and a path-style pairing for a leftover
/// self-inverse unit that leaves `(e_{2ⁿ−1}, u)` unsaturated.
pub fn construct_block_matching(g: &CleanGraph) -> Result<MatchingResult> {
    let ring = g.ring();
    if ring.n() < 2 {
        return Err(Error::Unsupported(format!(
            "block matching needs at least two local factors; {ring} has one"
        )));
    }
    let phi = g.phi();
    let cells = g.idempotents().len();
    let self_inverse = g.units().self_inverse().len();
    // e_k is 1-based, matching the table order e₁ = 1, e_{2m+1} = 1 − e_{2m}
    let id = |k: usize, u: usize| (k - 1) * phi + u;

    let mut edges = Vec::with_capacity(g.num_vertices() / 2);
    let mut push = |a: usize, b: usize| edges.push((a.min(b), a.max(b)));

    let mut t = 0;
    while t + 1 < self_inverse {
        let (ui, uj) = (t, t + 1);
        for k in 1..=(cells - 3) / 2 {
            push(id(2 * k, ui), id(2 * k + 1, ui));
        }
        for k in 1..=(cells - 1) / 2 {
            push(id(2 * k - 1, uj), id(2 * k, uj));
        }
        push(id(1, ui), id(cells, ui));
        push(id(cells - 1, ui), id(cells, uj));
        t += 2;
    }
    if self_inverse % 2 == 1 {
        let u = self_inverse - 1;
        for i in 1..=(cells - 1) / 2 {
            push(id(2 * i - 1, u), id(2 * i, u));
        }
    }
    let mut p = self_inverse;
    while p + 1 < phi {
        for k in 1..=cells {
            push(id(k, p), id(k, p + 1));
        }
        p += 2;
    }
    edges.sort_unstable();
    Ok(MatchingResult {
        edges,
        num_vertices: g.num_vertices(),
    })
}

/// Every edge exists in `g` and no vertex is used twice.
pub fn verify_matching(g: &CleanGraph, m: &MatchingResult) -> bool {
    m.num_vertices == g.num_vertices()
        && m.saturated().is_some()
        && m.edges.iter().all(|&(a, b)| a != b && g.has_edge(a, b))
}

/// `(2ⁿ − 1)·|U| / 2` when `|U|` is even, `((2ⁿ − 1)·|U| − 1) / 2` otherwise.
pub fn matching_number_closed_form(ring: &FactoredRing) -> Result<u64> {
    if ring.n() < 2 {
        return Err(Error::Unsupported(format!(
            "matching number formula needs at least two local factors; {ring} has one"
        )));
    }
    let vertices = ring.vertex_count()?;
    Ok(if ring.phi().is_multiple_of(2) {
        vertices / 2
    } else {
        (vertices - 1) / 2
    })
}

/// Exact maximum matching (Edmonds' blossom algorithm) seeded by a greedy
/// matching.
pub fn maximum_matching_oracle(g: &CleanGraph) -> Result<MatchingResult> {
    let n = g.num_vertices();
    if n > MATCHING_ORACLE_BUDGET {
        return Err(Error::BudgetExceeded {
            vertices: n as u64,
            budget: MATCHING_ORACLE_BUDGET as u64,
        });
    }
    let adj: Vec<Vec<usize>> = (0..n).map(|v| g.neighbors(v).collect()).collect();
    Ok(MatchingResult::from_mate(&max_matching(&adj)))
}

/// Maximum cardinality matching of a general graph given by adjacency lists.
/// Returns `mate[v]`, or `usize::MAX` for unmatched vertices.
pub fn max_matching(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut mate = vec![NONE; n];
    for v in 0..n {
        if mate[v] == NONE {
            if let Some(&w) = adj[v].iter().find(|&&w| w != v && mate[w] == NONE) {
                mate[v] = w;
                mate[w] = v;
            }
        }
    }
    let mut search = BlossomSearch::new(n);
    for root in 0..n {
        if mate[root] == NONE {
            if let Some(end) = search.find_augmenting_path(adj, &mate, root) {
                search.augment(&mut mate, end);
            }
        }
    }
    mate
}

struct BlossomSearch {
    parent: Vec<usize>,
    base: Vec<usize>,
    used: Vec<bool>,
    blossom: Vec<bool>,
    queue: VecDeque<usize>,
}

impl BlossomSearch {
    fn new(n: usize) -> Self {
        BlossomSearch {
            parent: vec![NONE; n],
            base: (0..n).collect(),
            used: vec![false; n],
            blossom: vec![false; n],
            queue: VecDeque::new(),
        }
    }

    fn lca(&self, mate: &[usize], mut a: usize, mut b: usize) -> usize {
        let mut on_path = vec![false; mate.len()];
        loop {
            a = self.base[a];
            on_path[a] = true;
            if mate[a] == NONE {
                break;
            }
            a = self.parent[mate[a]];
        }
        loop {
            b = self.base[b];
            if on_path[b] {
                return b;
            }
            b = self.parent[mate[b]];
        }
    }

    fn mark_path(&mut self, mate: &[usize], mut v: usize, b: usize, mut child: usize) {
        while self.base[v] != b {
            self.blossom[self.base[v]] = true;
            self.blossom[self.base[mate[v]]] = true;
            self.parent[v] = child;
            child = mate[v];
            v = self.parent[mate[v]];
        }
    }

    /// Returns the free endpoint of an augmenting path from `root`, leaving the
    /// path encoded in `parent`.
    fn find_augmenting_path(
        &mut self,
        adj: &[Vec<usize>],
        mate: &[usize],
        root: usize,
    ) -> Option<usize> {
        let n = adj.len();
        self.used.fill(false);
        self.parent.fill(NONE);
        for (i, b) in self.base.iter_mut().enumerate() {
            *b = i;
        }
        self.queue.clear();
        self.used[root] = true;
        self.queue.push_back(root);
        while let Some(v) = self.queue.pop_front() {
            for &to in &adj[v] {
                if self.base[v] == self.base[to] || mate[v] == to {
                    continue;
                }
                if to == root || (mate[to] != NONE && self.parent[mate[to]] != NONE) {
                    let cur = self.lca(mate, v, to);
                    self.blossom.fill(false);
                    self.mark_path(mate, v, cur, to);
                    self.mark_path(mate, to, cur, v);
                    for i in 0..n {
                        if self.blossom[self.base[i]] {
                            self.base[i] = cur;
                            if !self.used[i] {
                                self.used[i] = true;
                                self.queue.push_back(i);
                            }
                        }
                    }
                } else if self.parent[to] == NONE {
                    self.parent[to] = v;
                    if mate[to] == NONE {
                        return Some(to);
                    }
                    let next = mate[to];
                    self.used[next] = true;
                    self.queue.push_back(next);
                }
            }
        }
        None
    }

    fn augment(&self, mate: &mut [usize], mut v: usize) {
        while v != NONE {
            let pv = self.parent[v];
            let ppv = mate[pv];
            mate[v] = pv;
            mate[pv] = v;
            v = ppv;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(factors: &[(u64, u32)]) -> CleanGraph {
        CleanGraph::build(&FactoredRing::make_ring(factors).unwrap()).unwrap()
    }

    fn zn(n: u64) -> CleanGraph {
        CleanGraph::build(&FactoredRing::from_modulus(n).unwrap()).unwrap()
    }

    /// Exhaustive maximum matching for tiny graphs.
    fn brute_matching_number(adj: &[Vec<usize>]) -> usize {
        fn go(v: usize, used: &mut Vec<bool>, adj: &[Vec<usize>]) -> usize {
            if v == adj.len() {
                return 0;
            }
            if used[v] {
                return go(v + 1, used, adj);
            }
            let mut best = go(v + 1, used, adj);
            used[v] = true;
            for &w in &adj[v] {
                if w > v && !used[w] {
                    used[w] = true;
                    best = best.max(1 + go(v + 1, used, adj));
                    used[w] = false;
                }
            }
            used[v] = false;
            best
        }
        go(0, &mut vec![false; adj.len()], adj)
    }

    #[test]
    fn block_matching_examples() {
        let g = zn(15);
        let m = construct_block_matching(&g).unwrap();
        assert!(verify_matching(&g, &m));
        assert_eq!(m.size(), 12);
        assert!(m.is_perfect());

        let k7 = graph(&[(2, 1); 3]);
        let m = construct_block_matching(&k7).unwrap();
        assert!(verify_matching(&k7, &m));
        assert_eq!(m.size(), 3);
        assert_eq!(m.unsaturated(), vec![6]);

        let g = zn(12);
        let m = construct_block_matching(&g).unwrap();
        assert!(verify_matching(&g, &m));
        assert_eq!(m.size(), 6);
        assert!(m.is_perfect());

        assert!(matches!(
            construct_block_matching(&zn(9)),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn verify_rejects_bad_matchings() {
        let g = zn(15);
        let a = g.vertex_id(g.parse_vertex("(1,2)").unwrap()).unwrap();
        let b = g.vertex_id(g.parse_vertex("(1,4)").unwrap()).unwrap();
        let bad = MatchingResult {
            edges: vec![(a.min(b), a.max(b))],
            num_vertices: 24,
        };
        assert!(!verify_matching(&g, &bad));

        let c = g.vertex_id(g.parse_vertex("(1,8)").unwrap()).unwrap();
        let d = g.vertex_id(g.parse_vertex("(6,8)").unwrap()).unwrap();
        let twice = MatchingResult {
            edges: vec![(a, c), (a.min(d), a.max(d))],
            num_vertices: 24,
        };
        assert!(!verify_matching(&g, &twice));

        let empty = MatchingResult {
            edges: vec![],
            num_vertices: 24,
        };
        assert!(verify_matching(&g, &empty));
    }

    #[test]
    fn closed_form_examples() {
        let n = |r: FactoredRing| matching_number_closed_form(&r).unwrap();
        assert_eq!(n(FactoredRing::from_modulus(15).unwrap()), 12);
        assert_eq!(n(FactoredRing::make_ring(&[(2, 1); 3]).unwrap()), 3);
        assert_eq!(n(FactoredRing::from_modulus(12).unwrap()), 6);
        assert!(matching_number_closed_form(&FactoredRing::from_modulus(8).unwrap()).is_err());
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(
            maximum_matching_oracle(&graph(&[(2, 1); 2]))
                .unwrap()
                .size(),
            1
        );
        assert_eq!(maximum_matching_oracle(&zn(15)).unwrap().size(), 12);
        assert_eq!(
            maximum_matching_oracle(&graph(&[(2, 1); 3]))
                .unwrap()
                .size(),
            3
        );
    }

    #[test]
    fn oracle_budget() {
        let big =
            CleanGraph::build(&FactoredRing::from_modulus(2 * 3 * 5 * 7 * 11).unwrap()).unwrap();
        assert!(big.num_vertices() > MATCHING_ORACLE_BUDGET);
        assert!(matches!(
            maximum_matching_oracle(&big),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn blossom_handles_odd_cycles() {
        // Petersen graph: perfect matching of size 5
        let edges = [
            (0, 1),
            (1, 2),
            (2, 3),
            (3, 4),
            (4, 0),
            (0, 5),
            (1, 6),
            (2, 7),
            (3, 8),
            (4, 9),
            (5, 7),
            (7, 9),
            (9, 6),
            (6, 8),
            (8, 5),
        ];
        let mut adj = vec![Vec::new(); 10];
        for (a, b) in edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mate = max_matching(&adj);
        assert_eq!(mate.iter().filter(|&&m| m != NONE).count(), 10);

        // two triangles joined by a path: greedy picks poorly, blossom fixes it
        let mut adj = vec![Vec::new(); 7];
        for (a, b) in [
            (0, 1),
            (1, 2),
            (2, 0),
            (2, 3),
            (3, 4),
            (4, 5),
            (5, 6),
            (6, 4),
        ] {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mate = max_matching(&adj);
        assert_eq!(
            mate.iter().filter(|&&m| m != NONE).count() / 2,
            brute_matching_number(&adj)
        );
    }

    #[test]
    fn blossom_matches_brute_force_on_small_random_graphs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..300 {
            let n = rng.gen_range(1..=11);
            let p = rng.gen_range(0.1..0.9);
            let mut adj = vec![Vec::new(); n];
            for a in 0..n {
                for b in a + 1..n {
                    if rng.gen_bool(p) {
                        adj[a].push(b);
                        adj[b].push(a);
                    }
                }
            }
            let mate = max_matching(&adj);
            for (a, &b) in mate.iter().enumerate() {
                if b != NONE {
                    assert_eq!(mate[b], a);
                    assert!(adj[a].contains(&b));
                }
            }
            let size = mate.iter().filter(|&&m| m != NONE).count() / 2;
            assert_eq!(size, brute_matching_number(&adj));
        }
    }

    #[test]
    fn matching_json_shape() {
        let m = construct_block_matching(&graph(&[(2, 1); 3])).unwrap();
        let json = m.to_json();
        assert_eq!(json["size"], 3);
        assert_eq!(json["perfect"], false);
        assert_eq!(json["unsaturated"], serde_json::json!([6]));
        assert_eq!(json["edges"].as_array().unwrap().len(), 3);
    }
}
