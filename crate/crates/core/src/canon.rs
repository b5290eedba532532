//! Canonical forms and isomorphism.
//!
//! Port graphs are rigid: once one node is identified, the numbered ports fix
//! the image of its whole connected component. Components touching the
//! boundary are therefore labelled by a traversal seeded from the ordered
//! leaves; closed components are labelled from every candidate root and the
//! lexicographically smallest encoding wins.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write;

use crate::graph::{Endpoint, GraphError, NodeId, PortGraph};

/// Canonical string of the graph with no nodes, leaves, or loops.
pub const EMPTY_CANON: &str = "glc1;b=;c=;l=0";

struct Labelling {
    order: Vec<NodeId>,
    index: BTreeMap<NodeId, usize>,
}

impl Labelling {
    fn new() -> Self {
        Labelling {
            order: Vec::new(),
            index: BTreeMap::new(),
        }
    }

    fn visit(&mut self, n: NodeId, queue: &mut VecDeque<NodeId>) {
        if !self.index.contains_key(&n) {
            self.index.insert(n, self.order.len());
            self.order.push(n);
            queue.push_back(n);
        }
    }
}

fn flood(g: &PortGraph, lab: &mut Labelling, mut queue: VecDeque<NodeId>) {
    while let Some(n) = queue.pop_front() {
        let arity = g.kind(n).map(|k| k.arity()).unwrap_or(0);
        for p in 1..=arity {
            if let Some(Endpoint::Port(m, _)) = g.opposite(Endpoint::Port(n, p)) {
                lab.visit(m, &mut queue);
            }
        }
    }
}

fn encode(g: &PortGraph, lab: &Labelling, leaf_pos: &BTreeMap<Endpoint, String>) -> String {
    let code = |e: Endpoint| -> String {
        match e {
            Endpoint::Port(n, p) => format!("{}.{}", lab.index[&n], p),
            leaf => leaf_pos[&leaf].clone(),
        }
    };
    let mut s = String::new();
    for n in &lab.order {
        let kind = g.kind(*n).expect("labelled node exists");
        let _ = write!(s, "[{}]", kind);
    }
    s.push(':');
    let mut edges: Vec<(String, String)> = Vec::new();
    for n in &lab.order {
        let kind = g.kind(*n).expect("labelled node exists");
        for p in kind.out_ports() {
            let t = Endpoint::Port(*n, p);
            if let Some(h) = g.head_of(t) {
                edges.push((code(t), code(h)));
            }
        }
    }
    // edges leaving IN leaves belong to the boundary-seeded part
    for (t, h) in g.edges() {
        if leaf_pos.contains_key(&t) {
            edges.push((code(t), code(h)));
        }
    }
    edges.sort();
    for (t, h) in edges {
        let _ = write!(s, "{}>{},", t, h);
    }
    s
}

pub fn canonical_form(g: &PortGraph) -> Result<String, GraphError> {
    g.ensure_valid()?;
    let ins = g.in_leaves();
    let outs = g.out_leaves();
    let mut leaf_pos = BTreeMap::new();
    for (k, l) in ins.iter().enumerate() {
        leaf_pos.insert(Endpoint::Leaf(*l), format!("i{}", k));
    }
    for (k, l) in outs.iter().enumerate() {
        leaf_pos.insert(Endpoint::Leaf(*l), format!("o{}", k));
    }

    let mut lab = Labelling::new();
    let mut queue = VecDeque::new();
    for l in ins.iter().chain(outs.iter()) {
        if let Some(Endpoint::Port(n, _)) = g.opposite(Endpoint::Leaf(*l)) {
            lab.visit(n, &mut queue);
        }
        flood(g, &mut lab, std::mem::take(&mut queue));
    }
    let boundary_part = encode(g, &lab, &leaf_pos);

    // closed components
    let mut rest: BTreeSet<NodeId> = g
        .nodes()
        .keys()
        .filter(|n| !lab.index.contains_key(n))
        .copied()
        .collect();
    let empty_leaves = BTreeMap::new();
    let mut comps = Vec::new();
    while let Some(&start) = rest.iter().next() {
        let (members, _) = g.component_without(start, None);
        let mut best: Option<String> = None;
        for &root in &members {
            let mut l = Labelling::new();
            let mut q = VecDeque::new();
            l.visit(root, &mut q);
            flood(g, &mut l, q);
            let enc = encode(g, &l, &empty_leaves);
            if best.as_ref().is_none_or(|b| enc < *b) {
                best = Some(enc);
            }
        }
        for m in &members {
            rest.remove(m);
        }
        comps.push(best.expect("component has a root"));
    }
    comps.sort();

    let mut out = String::from("glc1;b=");
    if !(ins.is_empty() && outs.is_empty() && lab.order.is_empty()) {
        let _ = write!(out, "{}/{}:{}", ins.len(), outs.len(), boundary_part);
    }
    out.push_str(";c=");
    out.push_str(&comps.join("|"));
    let _ = write!(out, ";l={}", g.loops());
    Ok(out)
}

pub fn isomorphic(a: &PortGraph, b: &PortGraph) -> Result<bool, GraphError> {
    Ok(canonical_form(a)? == canonical_form(b)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GateKind;

    fn identity(order_swap: bool) -> PortGraph {
        let mut g = PortGraph::new();
        if order_swap {
            g.add_gate(GateKind::Term);
        }
        let l = g.add_gate(GateKind::Lambda);
        let r = g.add_out();
        g.connect(Endpoint::Port(l, 2), Endpoint::Port(l, 1)).unwrap();
        g.connect(Endpoint::Port(l, 3), Endpoint::Leaf(r)).unwrap();
        if order_swap {
            g.remove_node(NodeId(0));
        }
        g
    }

    #[test]
    fn node_order_does_not_matter() {
        assert!(isomorphic(&identity(false), &identity(true)).unwrap());
    }

    #[test]
    fn empty_graph_sentinel() {
        assert_eq!(canonical_form(&PortGraph::new()).unwrap(), EMPTY_CANON);
    }

    #[test]
    fn loop_count_distinguishes() {
        let mut a = PortGraph::new();
        a.add_wire();
        a.set_loops(1);
        let mut b = a.clone();
        b.set_loops(2);
        assert!(!isomorphic(&a, &b).unwrap());
    }

    #[test]
    fn closed_components_compare_up_to_root_choice() {
        // two loops-through-a-lambda closed components, built in different orders
        let build = |flip: bool| {
            let mut g = PortGraph::new();
            let l = g.add_gate(GateKind::Lambda);
            let t1 = g.add_gate(GateKind::Term);
            let t2 = g.add_gate(GateKind::Term);
            let (a, b) = if flip { (t2, t1) } else { (t1, t2) };
            g.connect(Endpoint::Port(l, 2), Endpoint::Port(a, 1)).unwrap();
            g.connect(Endpoint::Port(l, 3), Endpoint::Port(b, 1)).unwrap();
            let i = g.add_in();
            g.connect(Endpoint::Leaf(i), Endpoint::Port(l, 1)).unwrap();
            g
        };
        assert!(isomorphic(&build(false), &build(true)).unwrap());
    }
}
