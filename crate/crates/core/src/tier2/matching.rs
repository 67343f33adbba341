//! Bipartite matchings between SUEs (left) and SCBs (right).

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub sue: usize,
    pub scb: usize,
    pub weight: f64,
}

impl Edge {
    pub fn new(sue: usize, scb: usize, weight: f64) -> Self {
        Edge { sue, scb, weight }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Matching {
    /// Matched edges, ascending by SUE.
    pub edges: Vec<Edge>,
    pub total_weight: f64,
}

impl Matching {
    fn from_edges(mut edges: Vec<Edge>) -> Self {
        edges.sort_by_key(|e| (e.sue, e.scb));
        let total_weight = edges.iter().map(|e| e.weight).sum();
        Matching { edges, total_weight }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn pairs(&self) -> BTreeSet<(usize, usize)> {
        self.edges.iter().map(|e| (e.sue, e.scb)).collect()
    }

    pub fn edge_of_sue(&self, sue: usize) -> Option<&Edge> {
        self.edges.iter().find(|e| e.sue == sue)
    }
}

fn side_sizes(edges: &[Edge]) -> (usize, usize) {
    edges.iter().fold((0, 0), |(l, r), e| (l.max(e.sue + 1), r.max(e.scb + 1)))
}

/// Heaviest-edge-first maximal matching. Equal weights resolve towards the
/// lower SUE index, then the lower SCB index. Always within a factor two of
/// the optimum.
pub fn greedy_matching(edges: &[Edge]) -> Matching {
    let (left, right) = side_sizes(edges);
    let mut order: Vec<&Edge> = edges.iter().collect();
    order.sort_by(|a, b| {
        b.weight
            .total_cmp(&a.weight)
            .then(a.sue.cmp(&b.sue))
            .then(a.scb.cmp(&b.scb))
    });
    let mut left_used = vec![false; left];
    let mut right_used = vec![false; right];
    let mut chosen = Vec::new();
    for e in order {
        if !left_used[e.sue] && !right_used[e.scb] {
            left_used[e.sue] = true;
            right_used[e.scb] = true;
            chosen.push(*e);
        }
    }
    Matching::from_edges(chosen)
}

/// Maximum-weight matching via the Hungarian method on the dense weight
/// matrix, O(n^2 m) for n <= m. Absent edges are padded with zero weight
/// and dropped from the result. Weights must be non-negative.
pub fn exact_max_weight_matching(edges: &[Edge]) -> Matching {
    if edges.is_empty() {
        return Matching::default();
    }
    let (left, right) = side_sizes(edges);
    let transpose = left > right;
    let (rows, cols) = if transpose { (right, left) } else { (left, right) };
    // Keep the heaviest copy of any duplicated edge.
    let mut weight: Vec<Vec<Option<f64>>> = vec![vec![None; cols]; rows];
    for e in edges {
        let (r, c) = if transpose { (e.scb, e.sue) } else { (e.sue, e.scb) };
        let cell = &mut weight[r][c];
        if cell.is_none_or(|w| e.weight > w) {
            *cell = Some(e.weight);
        }
    }
    let cost = |r: usize, c: usize| -weight[r][c].unwrap_or(0.0);
    let row_of_col = hungarian(rows, cols, cost);

    let mut chosen = Vec::new();
    for (c, r) in row_of_col.into_iter().enumerate() {
        let Some(r) = r else { continue };
        if let Some(w) = weight[r][c] {
            let (sue, scb) = if transpose { (c, r) } else { (r, c) };
            chosen.push(Edge::new(sue, scb, w));
        }
    }
    Matching::from_edges(chosen)
}

/// Minimum-cost assignment of every row to a distinct column (rows <= cols)
/// with row/column potentials. Returns the row assigned to each column.
fn hungarian(rows: usize, cols: usize, cost: impl Fn(usize, usize) -> f64) -> Vec<Option<usize>> {
    debug_assert!(rows <= cols);
    // 1-based internally; index 0 is the virtual source column.
    let mut u = vec![0.0; rows + 1];
    let mut v = vec![0.0; cols + 1];
    let mut p = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];
    for i in 1..=rows {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; cols + 1];
        let mut used = vec![false; cols + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=cols {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=cols {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=cols).map(|j| (p[j] != 0).then(|| p[j] - 1)).collect()
}
