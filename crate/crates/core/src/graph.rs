//! Graphs with signed loops and the structural checks built on them.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

pub type NodeSet = BTreeSet<usize>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("node {0} is not in the graph")]
    UnknownNode(usize),
    #[error("self edge on node {0}")]
    SelfEdge(usize),
    #[error("node {0} carries both a plus and a minus loop")]
    ConflictingLoops(usize),
    #[error("node set {0:?} does not induce a connected subgraph")]
    NotConnected(Vec<usize>),
    #[error("empty node set")]
    Empty,
}

/// Undirected graph on an explicit node set, with plus and minus loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopGraph {
    nodes: NodeSet,
    edges: BTreeSet<(usize, usize)>,
    plus_loops: NodeSet,
    minus_loops: NodeSet,
    adj: BTreeMap<usize, NodeSet>,
}

impl LoopGraph {
    /// Graph on nodes `1..=n`.
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        plus: impl IntoIterator<Item = usize>,
        minus: impl IntoIterator<Item = usize>,
    ) -> Result<Self, GraphError> {
        Self::from_parts((1..=n).collect(), edges, plus, minus)
    }

    pub fn from_parts(
        nodes: NodeSet,
        edges: impl IntoIterator<Item = (usize, usize)>,
        plus: impl IntoIterator<Item = usize>,
        minus: impl IntoIterator<Item = usize>,
    ) -> Result<Self, GraphError> {
        let check = |v: usize| if nodes.contains(&v) { Ok(v) } else { Err(GraphError::UnknownNode(v)) };
        let mut adj: BTreeMap<usize, NodeSet> = nodes.iter().map(|&v| (v, NodeSet::new())).collect();
        let mut edge_set = BTreeSet::new();
        for (a, b) in edges {
            check(a)?;
            check(b)?;
            if a == b {
                return Err(GraphError::SelfEdge(a));
            }
            edge_set.insert((a.min(b), a.max(b)));
            adj.get_mut(&a).unwrap().insert(b);
            adj.get_mut(&b).unwrap().insert(a);
        }
        let plus_loops = plus.into_iter().map(check).collect::<Result<NodeSet, _>>()?;
        let minus_loops = minus.into_iter().map(check).collect::<Result<NodeSet, _>>()?;
        if let Some(&v) = plus_loops.intersection(&minus_loops).next() {
            return Err(GraphError::ConflictingLoops(v));
        }
        Ok(Self { nodes, edges: edge_set, plus_loops, minus_loops, adj })
    }

    pub fn nodes(&self) -> &NodeSet {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Edges as `(i, j)` with `i < j`.
    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn plus_loops(&self) -> &NodeSet {
        &self.plus_loops
    }

    pub fn minus_loops(&self) -> &NodeSet {
        &self.minus_loops
    }

    pub fn neighbors(&self, v: usize) -> &NodeSet {
        &self.adj[&v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj.get(&v).map_or(0, BTreeSet::len)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    /// Connected components of the subgraph induced by `subset`, each sorted,
    /// ordered by smallest member.
    pub fn induced_components(&self, subset: &NodeSet) -> Vec<NodeSet> {
        let mut seen = NodeSet::new();
        let mut out = Vec::new();
        for &start in subset {
            if !seen.insert(start) {
                continue;
            }
            let mut comp = NodeSet::from([start]);
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &w in &self.adj[&v] {
                    if subset.contains(&w) && seen.insert(w) {
                        comp.insert(w);
                        queue.push_back(w);
                    }
                }
            }
            out.push(comp);
        }
        out
    }

    /// Maximal connected sets of the subgraph induced by the plus-loop nodes.
    pub fn plus_components(&self) -> Vec<NodeSet> {
        self.induced_components(&self.plus_loops)
    }

    /// Nodes outside `set` adjacent to some node of `set`.
    pub fn neighborhood(&self, set: &NodeSet) -> NodeSet {
        set.iter()
            .filter_map(|v| self.adj.get(v))
            .flatten()
            .filter(|w| !set.contains(w))
            .copied()
            .collect()
    }

    /// True iff some plus component has three or more nodes.
    pub fn has_connected_plus_triplet(&self) -> bool {
        self.plus_components().iter().any(|c| c.len() >= 3)
    }

    pub fn is_connected_subset(&self, set: &NodeSet) -> bool {
        !set.is_empty() && self.induced_components(set).len() == 1
    }

    /// Removes the connected node set `component` and turns its neighborhood
    /// into a clique. Loops on surviving nodes are kept.
    pub fn eliminate_component(&self, component: &NodeSet) -> Result<LoopGraph, GraphError> {
        if component.is_empty() {
            return Err(GraphError::Empty);
        }
        if let Some(&v) = component.iter().find(|v| !self.nodes.contains(v)) {
            return Err(GraphError::UnknownNode(v));
        }
        if !self.is_connected_subset(component) {
            return Err(GraphError::NotConnected(component.iter().copied().collect()));
        }
        let boundary: Vec<usize> = self.neighborhood(component).into_iter().collect();
        let nodes: NodeSet = self.nodes.difference(component).copied().collect();
        let mut edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .filter(|(a, b)| !component.contains(a) && !component.contains(b))
            .copied()
            .collect();
        for (k, &a) in boundary.iter().enumerate() {
            for &b in &boundary[k + 1..] {
                edges.push((a, b));
            }
        }
        let keep = |s: &NodeSet| s.difference(component).copied().collect::<Vec<_>>();
        LoopGraph::from_parts(nodes, edges, keep(&self.plus_loops), keep(&self.minus_loops))
    }

    /// Min-fill elimination ordering turned into a tree decomposition.
    /// Ties on fill count go to the smallest node index.
    pub fn min_fill_tree_decomposition(&self) -> TreeDecomp {
        let mut adj: BTreeMap<usize, NodeSet> = self.adj.clone();
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut bag_of_node: BTreeMap<usize, usize> = BTreeMap::new();
        let mut bags: Vec<NodeSet> = Vec::new();
        let mut elim_nbrs: Vec<NodeSet> = Vec::new();

        while !adj.is_empty() {
            let mut best: Option<(usize, usize)> = None;
            for (&v, nbrs) in &adj {
                let fill = fill_in(&adj, nbrs);
                if best.is_none_or(|(f, _)| fill < f) {
                    best = Some((fill, v));
                }
                if fill == 0 {
                    break;
                }
            }
            let (_, v) = best.unwrap();
            let nbrs = adj.remove(&v).unwrap();
            let nv: Vec<usize> = nbrs.iter().copied().collect();
            for (k, &a) in nv.iter().enumerate() {
                adj.get_mut(&a).unwrap().remove(&v);
                for &b in &nv[k + 1..] {
                    adj.get_mut(&a).unwrap().insert(b);
                    adj.get_mut(&b).unwrap().insert(a);
                }
            }
            let mut bag = nbrs.clone();
            bag.insert(v);
            bag_of_node.insert(v, bags.len());
            bags.push(bag);
            elim_nbrs.push(nbrs);
            order.push(v);
        }

        let position: BTreeMap<usize, usize> = order.iter().enumerate().map(|(k, &v)| (v, k)).collect();
        let mut tree_edges = Vec::new();
        let mut roots = Vec::new();
        for (k, nbrs) in elim_nbrs.iter().enumerate() {
            match nbrs.iter().min_by_key(|w| position[w]) {
                Some(next) => tree_edges.push((k, bag_of_node[next])),
                None => roots.push(k),
            }
        }
        for pair in roots.windows(2) {
            tree_edges.push((pair[0], pair[1]));
        }
        TreeDecomp { bags, tree_edges }
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph G {\n");
        for &v in &self.nodes {
            let shape = if self.plus_loops.contains(&v) {
                format!(" [label=\"{v}+\"]")
            } else if self.minus_loops.contains(&v) {
                format!(" [label=\"{v}-\"]")
            } else {
                String::new()
            };
            let _ = writeln!(out, "  {v}{shape};");
        }
        for (a, b) in &self.edges {
            let _ = writeln!(out, "  {a} -- {b};");
        }
        out.push_str("}\n");
        out
    }
}

fn fill_in(adj: &BTreeMap<usize, NodeSet>, nbrs: &NodeSet) -> usize {
    let nv: Vec<usize> = nbrs.iter().copied().collect();
    let mut fill = 0;
    for (k, a) in nv.iter().enumerate() {
        for b in &nv[k + 1..] {
            if !adj[a].contains(b) {
                fill += 1;
            }
        }
    }
    fill
}

/// Bags plus tree edges (pairs of bag indices).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TreeDecomp {
    pub bags: Vec<NodeSet>,
    pub tree_edges: Vec<(usize, usize)>,
}

impl TreeDecomp {
    /// Largest bag size minus one; zero for a decomposition without nodes.
    pub fn width(&self) -> usize {
        self.bags.iter().map(BTreeSet::len).max().unwrap_or(1).saturating_sub(1)
    }

    /// Checks the tree shape and the three decomposition properties.
    pub fn validate(&self, g: &LoopGraph) -> Result<(), String> {
        let m = self.bags.len();
        if m == 0 {
            return if g.node_count() == 0 { Ok(()) } else { Err("no bags".into()) };
        }
        if self.tree_edges.len() != m - 1 {
            return Err(format!("{} tree edges for {} bags", self.tree_edges.len(), m));
        }
        let mut tadj = vec![Vec::new(); m];
        for &(a, b) in &self.tree_edges {
            if a >= m || b >= m || a == b {
                return Err(format!("bad tree edge ({a}, {b})"));
            }
            tadj[a].push(b);
            tadj[b].push(a);
        }
        if reach(&tadj, 0, |_| true).len() != m {
            return Err("tree is disconnected".into());
        }
        for &v in g.nodes() {
            let holding: BTreeSet<usize> = (0..m).filter(|&t| self.bags[t].contains(&v)).collect();
            let Some(&first) = holding.iter().next() else {
                return Err(format!("node {v} in no bag"));
            };
            if reach(&tadj, first, |t| holding.contains(&t)).len() != holding.len() {
                return Err(format!("bags holding node {v} are not connected"));
            }
        }
        for &(a, b) in g.edges() {
            if !self.bags.iter().any(|bag| bag.contains(&a) && bag.contains(&b)) {
                return Err(format!("edge ({a}, {b}) in no bag"));
            }
        }
        Ok(())
    }

    /// Decomposition of `g.eliminate_component(component)` derived from this
    /// decomposition of `g`. The component is dropped from every bag and a new
    /// bag holding its neighborhood hangs off a bag that met the component.
    /// Each neighbor is carried along the tree path from that bag to the
    /// nearest bag already holding it. The anchor with the smallest resulting
    /// width is kept.
    pub fn after_elimination(&self, g: &LoopGraph, component: &NodeSet) -> TreeDecomp {
        let boundary = g.neighborhood(component);
        let m = self.bags.len();
        let mut tadj = vec![Vec::new(); m];
        for &(a, b) in &self.tree_edges {
            tadj[a].push(b);
            tadj[b].push(a);
        }
        let mut anchors: Vec<usize> = (0..m).filter(|&t| !self.bags[t].is_disjoint(component)).collect();
        if anchors.is_empty() {
            anchors.push(0);
        }
        let mut best: Option<TreeDecomp> = None;
        for anchor in anchors.into_iter().filter(|&a| a < m.max(1)) {
            let mut bags: Vec<NodeSet> = self.bags.iter().map(|b| b.difference(component).copied().collect()).collect();
            if m > 0 {
                // Breadth-first parents from the anchor give the tree paths.
                let mut parent = vec![usize::MAX; m];
                let mut order = vec![anchor];
                parent[anchor] = anchor;
                let mut k = 0;
                while k < order.len() {
                    let t = order[k];
                    k += 1;
                    for &u in &tadj[t] {
                        if parent[u] == usize::MAX {
                            parent[u] = t;
                            order.push(u);
                        }
                    }
                }
                for &v in &boundary {
                    let Some(&hit) = order.iter().find(|&&t| self.bags[t].contains(&v)) else { continue };
                    let mut t = hit;
                    while t != anchor {
                        t = parent[t];
                        bags[t].insert(v);
                    }
                }
            }
            let mut tree_edges = self.tree_edges.clone();
            if m > 0 {
                tree_edges.push((anchor, bags.len()));
            }
            bags.push(boundary.clone());
            let td = TreeDecomp { bags, tree_edges };
            if best.as_ref().is_none_or(|b| td.width() < b.width()) {
                best = Some(td);
            }
        }
        best.expect("at least one anchor")
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph T {\n");
        for (t, bag) in self.bags.iter().enumerate() {
            let label: Vec<String> = bag.iter().map(ToString::to_string).collect();
            let _ = writeln!(out, "  b{t} [label=\"{{{}}}\"];", label.join(","));
        }
        for (a, b) in &self.tree_edges {
            let _ = writeln!(out, "  b{a} -- b{b};");
        }
        out.push_str("}\n");
        out
    }
}

fn reach(tadj: &[Vec<usize>], start: usize, allowed: impl Fn(usize) -> bool) -> BTreeSet<usize> {
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(t) = stack.pop() {
        for &u in &tadj[t] {
            if allowed(u) && seen.insert(u) {
                stack.push(u);
            }
        }
    }
    seen
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentInfo {
    pub nodes: Vec<usize>,
    pub neighborhood: Vec<usize>,
}

/// Outcome of the polynomial-size structure checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureReport {
    pub components: Vec<ComponentInfo>,
    pub has_triplet: bool,
    pub max_plus_degree: usize,
    /// Min-fill width of the graph itself.
    pub width_bound: usize,
    /// Width of the plus-free remainder after eliminating every plus component.
    pub eliminated_width_bound: usize,
    /// `max(width_bound, d_max - 1)` with `d_max` the largest neighborhood.
    pub elimination_limit: usize,
    pub width_cap: usize,
    pub degree_cap: usize,
    pub poly_ok: bool,
    pub reasons: Vec<String>,
}

pub const DEFAULT_WIDTH_CAP: usize = 10;
pub const DEFAULT_DEGREE_CAP: usize = 12;

/// Checks the no-triplet, width and plus-degree conditions against concrete
/// caps.
pub fn check_poly_conditions(g: &LoopGraph, width_cap: usize, degree_cap: usize) -> StructureReport {
    let comps = g.plus_components();
    let components: Vec<ComponentInfo> = comps
        .iter()
        .map(|c| ComponentInfo {
            nodes: c.iter().copied().collect(),
            neighborhood: g.neighborhood(c).into_iter().collect(),
        })
        .collect();
    let has_triplet = comps.iter().any(|c| c.len() >= 3);
    let max_plus_degree = g.plus_loops().iter().map(|&v| g.degree(v)).max().unwrap_or(0);
    let td = g.min_fill_tree_decomposition();
    let width_bound = td.width();
    let d_max = components.iter().map(|c| c.neighborhood.len()).max().unwrap_or(0);
    let elimination_limit = width_bound.max(d_max.saturating_sub(1));

    let (mut current, mut constructed) = (g.clone(), td);
    for comp in &comps {
        constructed = constructed.after_elimination(&current, comp);
        current = current.eliminate_component(comp).expect("plus components are connected");
    }
    let eliminated_width_bound = if comps.is_empty() {
        width_bound
    } else {
        current.min_fill_tree_decomposition().width().min(constructed.width())
    };

    let mut reasons = Vec::new();
    for c in comps.iter().filter(|c| c.len() >= 3) {
        let list: Vec<String> = c.iter().map(ToString::to_string).collect();
        reasons.push(format!("connected-plus-triplet {{{}}}", list.join(",")));
    }
    if width_bound > width_cap {
        reasons.push(format!("width {width_bound} exceeds cap {width_cap}"));
    }
    if max_plus_degree > degree_cap {
        reasons.push(format!("plus-node degree {max_plus_degree} exceeds cap {degree_cap}"));
    }
    StructureReport {
        components,
        has_triplet,
        max_plus_degree,
        width_bound,
        eliminated_width_bound,
        elimination_limit,
        width_cap,
        degree_cap,
        poly_ok: reasons.is_empty(),
        reasons,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[usize]) -> NodeSet {
        v.iter().copied().collect()
    }

    pub(crate) fn example_two() -> LoopGraph {
        LoopGraph::new(3, [(1, 2), (1, 3), (2, 3)], [1, 2], [3]).unwrap()
    }

    fn example_three() -> LoopGraph {
        LoopGraph::new(3, [(1, 2), (1, 3), (2, 3)], [1, 2, 3], []).unwrap()
    }

    #[test]
    fn plus_components_examples() {
        assert_eq!(example_two().plus_components(), vec![set(&[1, 2])]);
        assert_eq!(example_three().plus_components(), vec![set(&[1, 2, 3])]);
        let g = LoopGraph::new(4, [(1, 2)], [], [1]).unwrap();
        assert!(g.plus_components().is_empty());
    }

    #[test]
    fn neighborhoods() {
        assert_eq!(example_two().neighborhood(&set(&[1, 2])), set(&[3]));
        assert_eq!(example_three().neighborhood(&set(&[1, 2, 3])), set(&[]));
        let g = LoopGraph::new(4, [(1, 2)], [], []).unwrap();
        assert_eq!(g.neighborhood(&set(&[4])), set(&[]));
    }

    #[test]
    fn triplets() {
        assert!(example_three().has_connected_plus_triplet());
        assert!(!example_two().has_connected_plus_triplet());
        let g = LoopGraph::new(6, [], 1..=6, []).unwrap();
        assert!(!g.has_connected_plus_triplet());
        // a plus path 1-2-3 is a triplet even without the closing edge
        let path = LoopGraph::new(3, [(1, 2), (2, 3)], [1, 2, 3], []).unwrap();
        assert!(path.has_connected_plus_triplet());
    }

    #[test]
    fn min_fill_small_cases() {
        let path = LoopGraph::new(3, [(1, 2), (2, 3)], [], []).unwrap();
        let td = path.min_fill_tree_decomposition();
        td.validate(&path).unwrap();
        assert_eq!(td.width(), 1);

        let k4 = LoopGraph::new(4, [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)], [], []).unwrap();
        let td = k4.min_fill_tree_decomposition();
        td.validate(&k4).unwrap();
        assert_eq!(td.width(), 3);

        let isolated = LoopGraph::new(3, [], [], []).unwrap();
        let td = isolated.min_fill_tree_decomposition();
        td.validate(&isolated).unwrap();
        assert_eq!(td.width(), 0);
    }

    #[test]
    fn validate_rejects_broken_decompositions() {
        let path = LoopGraph::new(3, [(1, 2), (2, 3)], [], []).unwrap();
        let missing_edge = TreeDecomp { bags: vec![set(&[1, 2]), set(&[3])], tree_edges: vec![(0, 1)] };
        assert!(missing_edge.validate(&path).unwrap_err().contains("edge (2, 3)"));
        let broken_subtree = TreeDecomp {
            bags: vec![set(&[1, 2]), set(&[3]), set(&[2, 3])],
            tree_edges: vec![(0, 1), (1, 2)],
        };
        assert!(broken_subtree.validate(&path).unwrap_err().contains("node 2"));
    }

    #[test]
    fn eliminate_star_center() {
        let star = LoopGraph::new(4, [(4, 1), (4, 2), (4, 3)], [4], [1]).unwrap();
        let h = star.eliminate_component(&set(&[4])).unwrap();
        assert_eq!(h.nodes(), &set(&[1, 2, 3]));
        assert_eq!(h.edges(), &BTreeSet::from([(1, 2), (1, 3), (2, 3)]));
        assert_eq!(h.minus_loops(), &set(&[1]));
        assert!(h.plus_loops().is_empty());
    }

    #[test]
    fn eliminate_example_two_component() {
        let h = example_two().eliminate_component(&set(&[1, 2])).unwrap();
        assert_eq!(h.nodes(), &set(&[3]));
        assert!(h.edges().is_empty());
    }

    #[test]
    fn eliminate_errors() {
        let g = LoopGraph::new(4, [(1, 2)], [], []).unwrap();
        assert_eq!(g.eliminate_component(&set(&[1, 3])), Err(GraphError::NotConnected(vec![1, 3])));
        assert_eq!(g.eliminate_component(&set(&[9])), Err(GraphError::UnknownNode(9)));
        assert_eq!(g.eliminate_component(&set(&[])), Err(GraphError::Empty));
    }

    #[test]
    fn poly_conditions_examples() {
        let r = check_poly_conditions(&example_two(), 2, 3);
        assert!(r.poly_ok);
        assert_eq!(r.max_plus_degree, 2);
        assert!(!r.has_triplet);
        let r = check_poly_conditions(&example_three(), 100, 100);
        assert!(!r.poly_ok);
        assert_eq!(r.reasons, vec!["connected-plus-triplet {1,2,3}".to_string()]);
        let empty = LoopGraph::new(1, [], [], []).unwrap();
        assert!(check_poly_conditions(&empty, 0, 0).poly_ok);
    }

    #[test]
    fn loop_conflicts_rejected() {
        assert_eq!(LoopGraph::new(2, [], [1], [1]), Err(GraphError::ConflictingLoops(1)));
        assert_eq!(LoopGraph::new(2, [(1, 1)], [], []), Err(GraphError::SelfEdge(1)));
        assert_eq!(LoopGraph::new(2, [(1, 3)], [], []), Err(GraphError::UnknownNode(3)));
    }

    #[test]
    fn dot_export() {
        let dot = example_two().to_dot();
        assert!(dot.contains("1 [label=\"1+\"]") && dot.contains("3 [label=\"3-\"]") && dot.contains("1 -- 2"));
        let td = example_two().min_fill_tree_decomposition();
        assert!(td.to_dot().contains("{1,2,3}"));
    }
}
