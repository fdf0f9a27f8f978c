//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::Rng;
use rltsdp::graph::{LoopGraph, NodeSet};

/// Exact treewidth by dynamic programming over vertex subsets (n <= 16).
pub fn exact_treewidth(g: &LoopGraph) -> usize {
    let nodes: Vec<usize> = g.nodes().iter().copied().collect();
    let n = nodes.len();
    assert!(n <= 16, "exact treewidth limited to 16 nodes");
    if n == 0 {
        return 0;
    }
    let pos: BTreeMap<usize, usize> = nodes.iter().enumerate().map(|(k, &v)| (v, k)).collect();
    let adj: Vec<u32> = nodes.iter().map(|&v| g.neighbors(v).iter().fold(0, |m, u| m | 1 << pos[u])).collect();
    // Vertices outside `s` and `v` reachable from `v` through `s`.
    let q = |s: u32, v: usize| {
        let (mut seen, mut out, mut stack) = (1u32 << v, 0u32, vec![v]);
        while let Some(x) = stack.pop() {
            let mut nb = adj[x] & !seen;
            while nb != 0 {
                let u = nb.trailing_zeros() as usize;
                nb &= nb - 1;
                seen |= 1 << u;
                if s >> u & 1 == 1 {
                    stack.push(u);
                } else {
                    out |= 1 << u;
                }
            }
        }
        out.count_ones() as usize
    };
    let full = (1u32 << n) - 1;
    let mut tw = vec![usize::MAX; 1 << n];
    tw[0] = 0;
    for s in 1..=full {
        for v in (0..n).filter(|v| s >> v & 1 == 1) {
            let r = s & !(1 << v);
            tw[s as usize] = tw[s as usize].min(tw[r as usize].max(q(r, v)));
        }
    }
    tw[full as usize]
}

/// Erdős–Rényi edge list on nodes `1..=n`.
pub fn random_edges(rng: &mut impl Rng, n: usize, density: f64) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for a in 1..=n {
        for b in a + 1..=n {
            if rng.gen_bool(density) {
                edges.push((a, b));
            }
        }
    }
    edges
}

/// Connected node set of up to `target` nodes grown from a random seed.
pub fn random_connected_set(rng: &mut impl Rng, g: &LoopGraph, target: usize) -> NodeSet {
    let nodes: Vec<usize> = g.nodes().iter().copied().collect();
    let mut set: NodeSet = [nodes[rng.gen_range(0..nodes.len())]].into();
    while set.len() < target {
        let frontier: Vec<usize> = g.neighborhood(&set).into_iter().collect();
        if frontier.is_empty() {
            break;
        }
        set.insert(frontier[rng.gen_range(0..frontier.len())]);
    }
    set
}
