#![allow(dead_code)]

use relay_auction::model::MueBid;
use relay_auction::tier2::Edge;

/// Maximum matching weight by dynamic programming over subsets of the right
/// side; fine up to 8 vertices per side.
pub fn exhaustive_max_weight(edges: &[Edge], left: usize, right: usize) -> f64 {
    let mut w = vec![vec![None; right]; left];
    for e in edges {
        w[e.sue][e.scb] = Some(e.weight);
    }
    let mut best = vec![f64::NEG_INFINITY; 1 << right];
    best[0] = 0.0;
    for row in &w {
        let mut next = best.clone();
        for (mask, &here) in best.iter().enumerate() {
            if here == f64::NEG_INFINITY {
                continue;
            }
            for (k, weight) in row.iter().enumerate() {
                if let Some(x) = weight {
                    if mask & (1 << k) == 0 {
                        let m = mask | (1 << k);
                        next[m] = next[m].max(here + x);
                    }
                }
            }
        }
        best = next;
    }
    best.into_iter().fold(0.0, f64::max)
}

/// Best single-price revenue over a set of unit budgets, trying every
/// member's unit budget as the price.
pub fn brute_opt(unit_budgets: &[f64]) -> f64 {
    unit_budgets
        .iter()
        .map(|&p| p * unit_budgets.iter().filter(|&&x| x >= p).count() as f64)
        .fold(0.0, f64::max)
}

/// Reference group auction under a fixed split, straight from the
/// definition: extract the smaller half revenue from the other half by the
/// largest feasible buyer count, then sell to everyone strictly able.
/// Returns `(price, winners, gathered)` or `None` when nothing sells.
pub fn reference_auction(bids: &[MueBid], first: &[bool]) -> Option<(f64, Vec<usize>, f64)> {
    let ub = |j: usize| bids[j].budget / f64::from(bids[j].demand);
    let h1: Vec<f64> = (0..bids.len()).filter(|&j| first[j]).map(ub).collect();
    let h2: Vec<f64> = (0..bids.len()).filter(|&j| !first[j]).map(ub).collect();
    let (r1, r2) = (brute_opt(&h1), brute_opt(&h2));
    let extract = |half: &[f64], target: f64| -> Option<f64> {
        // Largest j such that at least j members of the half afford target/j.
        (1..=half.len())
            .rev()
            .find(|&j| half.iter().filter(|&&x| x * j as f64 >= target).count() >= j)
            .map(|j| target / j as f64)
    };
    let price = if r1 < r2 {
        extract(&h2, r1)?
    } else if r1 > r2 {
        extract(&h1, r2)?
    } else {
        return None;
    };
    let winners: Vec<usize> = (0..bids.len())
        .filter(|&j| {
            let p = price * f64::from(bids[j].demand);
            p < bids[j].budget && p < bids[j].valuation
        })
        .collect();
    let gathered = winners.iter().map(|&j| price * f64::from(bids[j].demand)).sum();
    Some((price, winners, gathered))
}
