//! Port graphs over the gate alphabet.
//!
//! Every gate port is numbered; the numbering encodes the clockwise order of
//! the local planar embedding. An edge is keyed by its tail, which is either a
//! gate out-port or an IN leaf, so an edge reference is simply that tail.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::group::GroupElem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LeafId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Endpoint {
    Port(NodeId, u8),
    Leaf(LeafId),
}

impl Endpoint {
    pub fn node(&self) -> Option<NodeId> {
        match self {
            Endpoint::Port(n, _) => Some(*n),
            Endpoint::Leaf(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dir {
    In,
    Out,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    Lambda,
    FanOut,
    App,
    Dilation(GroupElem),
    Term,
}

impl GateKind {
    pub fn arity(&self) -> u8 {
        match self {
            GateKind::Term => 1,
            _ => 3,
        }
    }

    /// Port direction table: λ 1=in 2,3=out; Υ 1=in 2,3=out;
    /// ∧ and dilation 1,2=in 3=out; ⊤ 1=in.
    pub fn port_dir(&self, port: u8) -> Option<Dir> {
        if port == 0 || port > self.arity() {
            return None;
        }
        Some(match (self, port) {
            (GateKind::Lambda | GateKind::FanOut, 1) => Dir::In,
            (GateKind::Lambda | GateKind::FanOut, _) => Dir::Out,
            (GateKind::App | GateKind::Dilation(_), 3) => Dir::Out,
            (GateKind::App | GateKind::Dilation(_), _) => Dir::In,
            (GateKind::Term, _) => Dir::In,
        })
    }

    pub fn in_ports(&self) -> impl Iterator<Item = u8> + '_ {
        (1..=self.arity()).filter(move |p| self.port_dir(*p) == Some(Dir::In))
    }

    pub fn out_ports(&self) -> impl Iterator<Item = u8> + '_ {
        (1..=self.arity()).filter(move |p| self.port_dir(*p) == Some(Dir::Out))
    }

    pub fn tag(&self) -> &'static str {
        match self {
            GateKind::Lambda => "lambda",
            GateKind::FanOut => "fanout",
            GateKind::App => "app",
            GateKind::Dilation(_) => "dil",
            GateKind::Term => "term",
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateKind::Dilation(g) => write!(f, "dil {}", g),
            k => f.write_str(k.tag()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Leaf {
    pub id: LeafId,
    pub dir: Dir,
    pub label: Option<String>,
}

/// Ordered IN and OUT leaves. Part of graph identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Boundary {
    pub ins: Vec<LeafId>,
    pub outs: Vec<LeafId>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("unknown leaf {0:?}")]
    UnknownLeaf(LeafId),
    #[error("node {0} has no port {1}")]
    NoSuchPort(NodeId, u8),
    #[error("direction mismatch connecting {0:?} -> {1:?}")]
    DirectionMismatch(Endpoint, Endpoint),
    #[error("endpoint {0:?} is already covered")]
    PortAlreadyCovered(Endpoint),
    #[error("invalid graph: {0:?}")]
    Invalid(Vec<Issue>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Issue {
    UncoveredPort(NodeId, u8),
    UncoveredLeaf(LeafId),
    DirectionViolation(Endpoint, Endpoint),
    DanglingReference(Endpoint),
}

#[derive(Clone, Debug, Default)]
pub struct PortGraph {
    nodes: BTreeMap<NodeId, GateKind>,
    /// tail -> head
    fwd: BTreeMap<Endpoint, Endpoint>,
    /// head -> tail
    bwd: BTreeMap<Endpoint, Endpoint>,
    leaves: Vec<Leaf>,
    loops: usize,
    next_node: u32,
    next_leaf: u32,
}

impl PortGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_gate(&mut self, kind: GateKind) -> NodeId {
        let id = NodeId(self.next_node);
        self.next_node += 1;
        self.nodes.insert(id, kind);
        id
    }

    /// Inserts a gate under a caller-chosen id (used by the text parser).
    pub fn insert_gate(&mut self, id: NodeId, kind: GateKind) -> Result<(), GraphError> {
        if self.nodes.contains_key(&id) {
            return Err(GraphError::PortAlreadyCovered(Endpoint::Port(id, 0)));
        }
        self.nodes.insert(id, kind);
        self.next_node = self.next_node.max(id.0 + 1);
        Ok(())
    }

    pub fn add_leaf(&mut self, dir: Dir, label: Option<String>) -> LeafId {
        let id = LeafId(self.next_leaf);
        self.next_leaf += 1;
        self.leaves.push(Leaf { id, dir, label });
        id
    }

    pub fn add_in(&mut self) -> LeafId {
        self.add_leaf(Dir::In, None)
    }

    pub fn add_out(&mut self) -> LeafId {
        self.add_leaf(Dir::Out, None)
    }

    fn endpoint_dir(&self, e: Endpoint) -> Result<Dir, GraphError> {
        match e {
            Endpoint::Port(n, p) => {
                let kind = self.nodes.get(&n).ok_or(GraphError::UnknownNode(n))?;
                kind.port_dir(p).ok_or(GraphError::NoSuchPort(n, p))
            }
            Endpoint::Leaf(l) => {
                let leaf = self.leaf(l).ok_or(GraphError::UnknownLeaf(l))?;
                // an IN leaf emits, so it plays the role of an out-port
                Ok(match leaf.dir {
                    Dir::In => Dir::Out,
                    Dir::Out => Dir::In,
                })
            }
        }
    }

    pub fn connect(&mut self, tail: Endpoint, head: Endpoint) -> Result<(), GraphError> {
        let (td, hd) = (self.endpoint_dir(tail)?, self.endpoint_dir(head)?);
        if td != Dir::Out || hd != Dir::In {
            return Err(GraphError::DirectionMismatch(tail, head));
        }
        if self.fwd.contains_key(&tail) {
            return Err(GraphError::PortAlreadyCovered(tail));
        }
        if self.bwd.contains_key(&head) {
            return Err(GraphError::PortAlreadyCovered(head));
        }
        self.fwd.insert(tail, head);
        self.bwd.insert(head, tail);
        Ok(())
    }

    /// Adds a fresh IN leaf, an OUT leaf and the wire between them.
    pub fn add_wire(&mut self) -> (LeafId, LeafId) {
        let i = self.add_in();
        let o = self.add_out();
        self.connect(Endpoint::Leaf(i), Endpoint::Leaf(o)).expect("fresh leaves");
        (i, o)
    }

    pub fn disconnect_tail(&mut self, tail: Endpoint) -> Option<Endpoint> {
        let head = self.fwd.remove(&tail)?;
        self.bwd.remove(&head);
        Some(head)
    }

    /// Removes a node and every edge touching it.
    pub fn remove_node(&mut self, n: NodeId) -> Option<GateKind> {
        let kind = self.nodes.remove(&n)?;
        for p in 1..=kind.arity() {
            let e = Endpoint::Port(n, p);
            if let Some(h) = self.fwd.remove(&e) {
                self.bwd.remove(&h);
            }
            if let Some(t) = self.bwd.remove(&e) {
                self.fwd.remove(&t);
            }
        }
        Some(kind)
    }

    pub fn nodes(&self) -> &BTreeMap<NodeId, GateKind> {
        &self.nodes
    }

    pub fn kind(&self, n: NodeId) -> Option<&GateKind> {
        self.nodes.get(&n)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn count_kind(&self, pred: impl Fn(&GateKind) -> bool) -> usize {
        self.nodes.values().filter(|k| pred(k)).count()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Endpoint, Endpoint)> + '_ {
        self.fwd.iter().map(|(t, h)| (*t, *h))
    }

    pub fn edge_count(&self) -> usize {
        self.fwd.len()
    }

    pub fn head_of(&self, tail: Endpoint) -> Option<Endpoint> {
        self.fwd.get(&tail).copied()
    }

    pub fn tail_of(&self, head: Endpoint) -> Option<Endpoint> {
        self.bwd.get(&head).copied()
    }

    /// The endpoint on the other side of whatever edge touches `e`.
    pub fn opposite(&self, e: Endpoint) -> Option<Endpoint> {
        self.fwd.get(&e).or_else(|| self.bwd.get(&e)).copied()
    }

    pub fn leaves(&self) -> &[Leaf] {
        &self.leaves
    }

    pub fn leaf(&self, id: LeafId) -> Option<&Leaf> {
        self.leaves.iter().find(|l| l.id == id)
    }

    pub fn leaf_by_label(&self, label: &str) -> Option<&Leaf> {
        self.leaves.iter().find(|l| l.label.as_deref() == Some(label))
    }

    pub fn set_leaf_label(&mut self, id: LeafId, label: Option<String>) {
        if let Some(l) = self.leaves.iter_mut().find(|l| l.id == id) {
            l.label = label;
        }
    }

    pub fn boundary(&self) -> Boundary {
        Boundary {
            ins: self.in_leaves(),
            outs: self.out_leaves(),
        }
    }

    pub fn in_leaves(&self) -> Vec<LeafId> {
        self.leaves.iter().filter(|l| l.dir == Dir::In).map(|l| l.id).collect()
    }

    pub fn out_leaves(&self) -> Vec<LeafId> {
        self.leaves.iter().filter(|l| l.dir == Dir::Out).map(|l| l.id).collect()
    }

    pub fn loops(&self) -> usize {
        self.loops
    }

    pub fn set_loops(&mut self, loops: usize) {
        self.loops = loops;
    }

    pub fn add_loops(&mut self, k: usize) {
        self.loops += k;
    }

    /// Removes a leaf record; its edge must already be gone.
    pub(crate) fn drop_leaf(&mut self, id: LeafId) {
        self.leaves.retain(|l| l.id != id);
    }

    /// Rewrites the ordered leaf list in place; the closure must keep the
    /// same set of records.
    pub(crate) fn reorder_leaf_records(&mut self, f: impl FnOnce(&mut Vec<Leaf>)) {
        f(&mut self.leaves);
    }

    /// Number of edges that are wires (IN leaf straight to OUT leaf).
    pub fn wire_count(&self) -> usize {
        self.edges()
            .filter(|(t, h)| matches!((t, h), (Endpoint::Leaf(_), Endpoint::Leaf(_))))
            .count()
    }

    pub fn validate(&self) -> Result<(), Vec<Issue>> {
        let mut issues = Vec::new();
        for (&n, kind) in &self.nodes {
            for p in 1..=kind.arity() {
                let e = Endpoint::Port(n, p);
                if !self.fwd.contains_key(&e) && !self.bwd.contains_key(&e) {
                    issues.push(Issue::UncoveredPort(n, p));
                }
            }
        }
        for leaf in &self.leaves {
            let e = Endpoint::Leaf(leaf.id);
            let covered = match leaf.dir {
                Dir::In => self.fwd.contains_key(&e),
                Dir::Out => self.bwd.contains_key(&e),
            };
            if !covered {
                issues.push(Issue::UncoveredLeaf(leaf.id));
            }
        }
        for (t, h) in self.edges() {
            for e in [t, h] {
                if self.endpoint_dir(e).is_err() {
                    issues.push(Issue::DanglingReference(e));
                }
            }
            if let (Ok(td), Ok(hd)) = (self.endpoint_dir(t), self.endpoint_dir(h)) {
                if td != Dir::Out || hd != Dir::In {
                    issues.push(Issue::DirectionViolation(t, h));
                }
            }
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(issues)
        }
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_ok()
    }

    pub fn ensure_valid(&self) -> Result<(), GraphError> {
        self.validate().map_err(GraphError::Invalid)
    }

    /// Copies `other` next to `self`, returning the id translation maps.
    /// Leaves of `other` are appended after the leaves of `self`.
    pub fn disjoint_union(
        &self,
        other: &PortGraph,
    ) -> (PortGraph, BTreeMap<NodeId, NodeId>, BTreeMap<LeafId, LeafId>) {
        let mut g = self.clone();
        let mut nmap = BTreeMap::new();
        for (&n, k) in &other.nodes {
            nmap.insert(n, g.add_gate(k.clone()));
        }
        let mut lmap = BTreeMap::new();
        for leaf in &other.leaves {
            lmap.insert(leaf.id, g.add_leaf(leaf.dir, leaf.label.clone()));
        }
        let tr = |e: Endpoint| match e {
            Endpoint::Port(n, p) => Endpoint::Port(nmap[&n], p),
            Endpoint::Leaf(l) => Endpoint::Leaf(lmap[&l]),
        };
        for (t, h) in other.edges() {
            let (t, h) = (tr(t), tr(h));
            g.fwd.insert(t, h);
            g.bwd.insert(h, t);
        }
        g.loops += other.loops;
        (g, nmap, lmap)
    }

    /// Grafts an OUT leaf onto an IN leaf: whatever fed the OUT leaf now
    /// feeds whatever the IN leaf fed. Both leaves disappear.
    pub fn join(&mut self, out_leaf: LeafId, in_leaf: LeafId) -> Result<(), GraphError> {
        let (o, i) = (Endpoint::Leaf(out_leaf), Endpoint::Leaf(in_leaf));
        let src = self.tail_of(o).ok_or(GraphError::UnknownLeaf(out_leaf))?;
        let dst = self.head_of(i).ok_or(GraphError::UnknownLeaf(in_leaf))?;
        self.disconnect_tail(src);
        if src == i {
            // the OUT leaf was fed directly by the IN leaf: closes a loop
            self.loops += 1;
        } else {
            self.disconnect_tail(i);
            self.fwd.insert(src, dst);
            self.bwd.insert(dst, src);
        }
        self.drop_leaf(out_leaf);
        self.drop_leaf(in_leaf);
        Ok(())
    }

    /// Routes the out-port `tail` to whatever the IN leaf `in_leaf` fed, and
    /// drops that leaf.
    pub fn join_from(&mut self, tail: Endpoint, in_leaf: LeafId) -> Result<(), GraphError> {
        let i = Endpoint::Leaf(in_leaf);
        let dst = self.disconnect_tail(i).ok_or(GraphError::UnknownLeaf(in_leaf))?;
        self.drop_leaf(in_leaf);
        self.connect(tail, dst)
    }

    /// Relabels nodes through an injective map; used by tests and search.
    pub fn renumber(&self, map: &BTreeMap<NodeId, NodeId>) -> PortGraph {
        let tr = |e: Endpoint| match e {
            Endpoint::Port(n, p) => Endpoint::Port(map[&n], p),
            leaf => leaf,
        };
        let mut g = PortGraph {
            leaves: self.leaves.clone(),
            loops: self.loops,
            next_leaf: self.next_leaf,
            ..Default::default()
        };
        for (n, k) in &self.nodes {
            g.nodes.insert(map[n], k.clone());
        }
        g.next_node = g.nodes.keys().map(|n| n.0 + 1).max().unwrap_or(0);
        for (t, h) in self.edges() {
            g.fwd.insert(tr(t), tr(h));
            g.bwd.insert(tr(h), tr(t));
        }
        g
    }

    /// Nodes reachable from `start` ignoring orientation, without crossing
    /// the edge whose tail is `cut`.
    pub fn component_without(&self, start: NodeId, cut: Option<Endpoint>) -> (BTreeSet<NodeId>, bool) {
        let mut seen = BTreeSet::new();
        let mut touches_leaf = false;
        let mut stack = vec![start];
        while let Some(n) = stack.pop() {
            if !seen.insert(n) {
                continue;
            }
            let kind = &self.nodes[&n];
            for p in 1..=kind.arity() {
                let here = Endpoint::Port(n, p);
                let (tail, other) = match (self.fwd.get(&here), self.bwd.get(&here)) {
                    (Some(h), _) => (here, *h),
                    (_, Some(t)) => (*t, *t),
                    _ => continue,
                };
                if Some(tail) == cut {
                    continue;
                }
                match other {
                    Endpoint::Port(m, _) => stack.push(m),
                    Endpoint::Leaf(_) => touches_leaf = true,
                }
            }
        }
        (seen, touches_leaf)
    }

    /// Subgraph on `keep`. Original leaves touching it are kept in order;
    /// every edge crossing the cut becomes a fresh leaf, appended in edge order.
    pub fn induced(&self, keep: &BTreeSet<NodeId>) -> PortGraph {
        let inside = |e: &Endpoint| match e {
            Endpoint::Port(n, _) => keep.contains(n),
            Endpoint::Leaf(_) => false,
        };
        let mut g = PortGraph::new();
        let mut nmap = BTreeMap::new();
        for n in keep {
            nmap.insert(*n, g.add_gate(self.nodes[n].clone()));
        }
        let tr = |e: Endpoint| match e {
            Endpoint::Port(n, p) => Endpoint::Port(nmap[&n], p),
            leaf => leaf,
        };
        let mut lmap = BTreeMap::new();
        for leaf in &self.leaves {
            let e = Endpoint::Leaf(leaf.id);
            let other = match leaf.dir {
                Dir::In => self.fwd.get(&e),
                Dir::Out => self.bwd.get(&e),
            };
            if other.is_some_and(inside) {
                lmap.insert(leaf.id, g.add_leaf(leaf.dir, leaf.label.clone()));
            }
        }
        let mut pending = Vec::new();
        for (&t, &h) in &self.fwd {
            let t2 = match t {
                Endpoint::Leaf(l) if lmap.contains_key(&l) => Some(Endpoint::Leaf(lmap[&l])),
                _ if inside(&t) => Some(tr(t)),
                _ => None,
            };
            let h2 = match h {
                Endpoint::Leaf(l) if lmap.contains_key(&l) => Some(Endpoint::Leaf(lmap[&l])),
                _ if inside(&h) => Some(tr(h)),
                _ => None,
            };
            pending.push((t2, h2));
        }
        for (t, h) in pending {
            match (t, h) {
                (Some(t), Some(h)) => g.connect(t, h).expect("induced edge"),
                (Some(t), None) => {
                    let o = g.add_out();
                    g.connect(t, Endpoint::Leaf(o)).expect("cut edge");
                }
                (None, Some(h)) => {
                    let i = g.add_in();
                    g.connect(Endpoint::Leaf(i), h).expect("cut edge");
                }
                (None, None) => {}
            }
        }
        g
    }

    /// Distinct dilation scales used in the graph, in order.
    pub fn scales(&self) -> Vec<GroupElem> {
        let set: BTreeSet<GroupElem> = self
            .nodes
            .values()
            .filter_map(|k| match k {
                GateKind::Dilation(g) => Some(g.clone()),
                _ => None,
            })
            .collect();
        set.into_iter().collect()
    }

    pub fn next_node_id(&self) -> u32 {
        self.next_node
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: NodeId, k: u8) -> Endpoint {
        Endpoint::Port(n, k)
    }

    fn identity_graph() -> PortGraph {
        let mut g = PortGraph::new();
        let l = g.add_gate(GateKind::Lambda);
        let r = g.add_out();
        g.connect(p(l, 2), p(l, 1)).unwrap();
        g.connect(p(l, 3), Endpoint::Leaf(r)).unwrap();
        g
    }

    #[test]
    fn add_gate_leaves_ports_pending() {
        let mut g = PortGraph::new();
        g.add_gate(GateKind::Lambda);
        assert_eq!(g.validate().unwrap_err().len(), 3);
        let mut g = PortGraph::new();
        g.add_gate(GateKind::Term);
        assert_eq!(g.validate().unwrap_err().len(), 1);
        let mut g = PortGraph::new();
        g.add_gate(GateKind::Lambda);
        g.add_gate(GateKind::App);
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.validate().unwrap_err().len(), 6);
    }

    #[test]
    fn connect_checks_orientation() {
        let mut g = PortGraph::new();
        let l = g.add_gate(GateKind::Lambda);
        let a = g.add_gate(GateKind::App);
        g.connect(p(l, 3), p(a, 1)).unwrap();
        assert!(matches!(g.connect(p(a, 3), p(l, 3)), Err(GraphError::DirectionMismatch(..))));
        assert!(matches!(g.connect(p(l, 2), p(a, 1)), Err(GraphError::PortAlreadyCovered(_))));
    }

    #[test]
    fn identity_wiring_is_valid() {
        assert!(identity_graph().is_valid());
    }

    #[test]
    fn lambda_with_one_connection_reports_two_uncovered_ports() {
        let mut g = PortGraph::new();
        let l = g.add_gate(GateKind::Lambda);
        let r = g.add_out();
        g.connect(p(l, 3), Endpoint::Leaf(r)).unwrap();
        let issues = g.validate().unwrap_err();
        assert_eq!(issues.len(), 2);
        assert!(issues.iter().all(|i| matches!(i, Issue::UncoveredPort(_, _))));
    }

    #[test]
    fn loops_only_graph_is_valid() {
        let mut g = PortGraph::new();
        g.set_loops(2);
        assert!(g.is_valid());
    }

    #[test]
    fn join_of_wire_endpoints_closes_loop() {
        let mut g = PortGraph::new();
        let (i, o) = g.add_wire();
        g.join(o, i).unwrap();
        assert_eq!(g.loops(), 1);
        assert!(g.leaves().is_empty());
        assert!(g.is_valid());
    }
}
