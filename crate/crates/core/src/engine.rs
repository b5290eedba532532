//! Matching and application of moves.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::canon::canonical_form;
use crate::graph::{Endpoint, GateKind, GraphError, NodeId, PortGraph};
use crate::group::GroupElem;
use crate::rules::{find_move, Direction, FEnd, Fragment, Move, NodePat, RuleBody, Scale, SideCondition};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("unknown move `{0}`")]
    UnknownMove(String),
    #[error("move `{0}` cannot be applied in reverse")]
    DirectionNotAllowed(String),
    #[error("binding does not match the current graph")]
    StaleBinding,
    #[error("side condition of `{0}` is violated")]
    SideConditionViolated(String),
    #[error("not a fan-out bottleneck")]
    NotABottleneck,
    #[error("the two subgraphs are not isomorphic copies")]
    CopiesNotIsomorphic,
    #[error("no edge with tail {0:?}")]
    UnknownEdge(Endpoint),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A host edge, named by its tail, or one of the free loops.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeRef {
    Edge(Endpoint),
    Loop(usize),
}

/// One concrete match of a move.
///
/// For local moves `nodes[i]` is the host image of fragment node `i` and
/// `wires[k]` the host edge under the fragment's `k`-th pass-through wire.
/// Two wires on the same host edge are chained; `variant` 1 puts the second
/// wire first. `params` is the full assignment of the move's scale variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Binding {
    pub rule: &'static str,
    pub dir: Direction,
    pub nodes: Vec<NodeId>,
    pub wires: Vec<EdgeRef>,
    pub variant: u8,
    pub params: Vec<GroupElem>,
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "apply {} {}", self.rule, self.dir)?;
        let mut anchors = Vec::new();
        anchors.extend(self.nodes.iter().map(|n| n.to_string()));
        anchors.extend(self.wires.iter().map(|w| match w {
            EdgeRef::Edge(Endpoint::Port(n, p)) => format!("{}.{}", n, p),
            EdgeRef::Edge(Endpoint::Leaf(l)) => format!("@{}", l.0),
            EdgeRef::Loop(k) => format!("loop{}", k),
        }));
        if self.variant != 0 {
            anchors.push(format!("v{}", self.variant));
        }
        anchors.extend(self.params.iter().map(|p| format!("s={}", p)));
        if !anchors.is_empty() {
            write!(f, " at {}", anchors.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default)]
pub struct EnumOptions {
    /// Scales offered to reverse moves that introduce dilations, on top of
    /// the identity and the scales already present in the graph.
    pub extra_scales: Vec<GroupElem>,
}

pub fn lookup(name: &str) -> Result<Move, EngineError> {
    find_move(name).ok_or_else(|| EngineError::UnknownMove(name.to_string()))
}

fn sides(body: &RuleBody, dir: Direction) -> Option<(&Fragment, &Fragment)> {
    match body {
        RuleBody::Local { lhs, rhs, .. } => Some(match dir {
            Direction::Fwd => (lhs, rhs),
            Direction::Rev => (rhs, lhs),
        }),
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// local matching

struct NodeMatch {
    nodes: Vec<NodeId>,
}

/// Connected groups of fragment nodes, each listed in propagation order.
fn fragment_components(f: &Fragment) -> Vec<Vec<usize>> {
    let n = f.nodes.len();
    let mut adj = vec![Vec::new(); n];
    for (t, h) in &f.edges {
        if let (FEnd::Port(a, _), FEnd::Port(b, _)) = (t, h) {
            adj[*a].push(*b);
            adj[*b].push(*a);
        }
    }
    let mut seen = vec![false; n];
    let mut comps = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut order = vec![s];
        seen[s] = true;
        let mut i = 0;
        while i < order.len() {
            for &m in &adj[order[i]] {
                if !seen[m] {
                    seen[m] = true;
                    order.push(m);
                }
            }
            i += 1;
        }
        comps.push(order);
    }
    comps
}

/// Extends a partial assignment rigidly from the component root.
fn propagate(g: &PortGraph, f: &Fragment, comp: &[usize], assign: &mut [Option<NodeId>]) -> bool {
    let mut changed = true;
    while changed {
        changed = false;
        for (t, h) in &f.edges {
            let (FEnd::Port(a, p), FEnd::Port(b, q)) = (t, h) else {
                continue;
            };
            if !comp.contains(a) {
                continue;
            }
            match (assign[*a], assign[*b]) {
                (Some(x), Some(y)) => {
                    if g.head_of(Endpoint::Port(x, *p)) != Some(Endpoint::Port(y, *q)) {
                        return false;
                    }
                }
                (Some(x), None) => match g.head_of(Endpoint::Port(x, *p)) {
                    Some(Endpoint::Port(y, q2)) if q2 == *q => {
                        assign[*b] = Some(y);
                        changed = true;
                    }
                    _ => return false,
                },
                (None, Some(y)) => match g.tail_of(Endpoint::Port(y, *q)) {
                    Some(Endpoint::Port(x, p2)) if p2 == *p => {
                        assign[*a] = Some(x);
                        changed = true;
                    }
                    _ => return false,
                },
                (None, None) => {}
            }
        }
    }
    comp.iter().all(|&i| match assign[i] {
        Some(x) => g.kind(x).is_some_and(|k| f.nodes[i].same_shape(k)),
        None => false,
    })
}

fn match_nodes(g: &PortGraph, f: &Fragment) -> Vec<NodeMatch> {
    let comps = fragment_components(f);
    let mut partial: Vec<Vec<Option<NodeId>>> = vec![vec![None; f.nodes.len()]];
    for comp in &comps {
        let root = comp[0];
        let mut next = Vec::new();
        for p in &partial {
            let used: BTreeSet<NodeId> = p.iter().flatten().copied().collect();
            for (&x, k) in g.nodes() {
                if !f.nodes[root].same_shape(k) || used.contains(&x) {
                    continue;
                }
                let mut a = p.clone();
                a[root] = Some(x);
                if !propagate(g, f, comp, &mut a) {
                    continue;
                }
                let imgs: Vec<NodeId> = comp.iter().map(|&i| a[i].expect("assigned")).collect();
                let distinct: BTreeSet<_> = imgs.iter().collect();
                if distinct.len() != imgs.len() || imgs.iter().any(|n| used.contains(n)) {
                    continue;
                }
                next.push(a);
            }
        }
        partial = next;
    }
    partial
        .into_iter()
        .map(|a| NodeMatch {
            nodes: a.into_iter().map(|x| x.expect("assigned")).collect(),
        })
        .collect()
}

/// Assignments of the scale variables consistent with the matched gates.
fn solve_scales(
    g: &PortGraph,
    f: &Fragment,
    nodes: &[NodeId],
    vars: usize,
    candidates: &[GroupElem],
) -> Vec<Vec<GroupElem>> {
    let mut constraints: Vec<(&Scale, GroupElem)> = Vec::new();
    for (i, pat) in f.nodes.iter().enumerate() {
        if let (NodePat::Dil(s), Some(GateKind::Dilation(e))) = (pat, g.kind(nodes[i])) {
            constraints.push((s, e.clone()));
        }
    }
    let mut out = Vec::new();
    let mut cur: Vec<Option<GroupElem>> = vec![None; vars];
    fn rec(
        v: usize,
        cur: &mut Vec<Option<GroupElem>>,
        constraints: &[(&Scale, GroupElem)],
        candidates: &[GroupElem],
        out: &mut Vec<Vec<GroupElem>>,
    ) {
        if v == cur.len() {
            let vals: Vec<GroupElem> = cur.iter().map(|x| x.clone().expect("set")).collect();
            if constraints.iter().all(|(s, e)| s.eval(&vals) == *e) {
                out.push(vals);
            }
            return;
        }
        let mut forced = None;
        for (s, e) in constraints {
            forced = match s {
                Scale::Var(i) if *i == v => Some(e.clone()),
                Scale::Inv(i) if *i == v => Some(e.inv()),
                Scale::Mul(i, j) if *j == v && *i < v => cur[*i].as_ref().map(|a| e.mul(&a.inv())),
                Scale::Mul(i, j) if *i == v && *j < v => cur[*j].as_ref().map(|b| e.mul(&b.inv())),
                _ => None,
            };
            if forced.is_some() {
                break;
            }
        }
        let choices = match forced {
            Some(x) => vec![x],
            None => candidates.to_vec(),
        };
        for c in choices {
            cur[v] = Some(c);
            rec(v + 1, cur, constraints, candidates, out);
        }
        cur[v] = None;
    }
    rec(0, &mut cur, &constraints, candidates, &mut out);
    out
}

fn wire_choices(g: &PortGraph, k: usize, matched: &BTreeSet<NodeId>) -> Vec<(Vec<EdgeRef>, u8)> {
    let touches = |t: Endpoint, h: Endpoint| {
        t.node().is_some_and(|n| matched.contains(&n)) || h.node().is_some_and(|n| matched.contains(&n))
    };
    let mut single: Vec<EdgeRef> = g
        .edges()
        .filter(|(t, h)| !touches(*t, *h))
        .map(|(t, _)| EdgeRef::Edge(t))
        .collect();
    if g.loops() > 0 {
        single.push(EdgeRef::Loop(0));
    }
    match k {
        0 => vec![(vec![], 0)],
        1 => single.into_iter().map(|e| (vec![e], 0)).collect(),
        2 => {
            let mut out = Vec::new();
            for &a in &single {
                for &b in &single {
                    if a == b {
                        out.push((vec![a, a], 0));
                        if matches!(a, EdgeRef::Edge(_)) {
                            out.push((vec![a, a], 1));
                        }
                    } else {
                        out.push((vec![a, b], 0));
                    }
                }
                if a == EdgeRef::Loop(0) && g.loops() > 1 {
                    out.push((vec![a, EdgeRef::Loop(1)], 0));
                }
            }
            out
        }
        _ => unreachable!("fragments have at most two pass-through wires"),
    }
}

fn scale_candidates(g: &PortGraph, opts: &EnumOptions, params_hint: &[GroupElem]) -> Vec<GroupElem> {
    let mut set: BTreeSet<GroupElem> = g.scales().into_iter().collect();
    set.insert(GroupElem::identity());
    set.extend(opts.extra_scales.iter().cloned());
    set.extend(params_hint.iter().cloned());
    set.into_iter().collect()
}

fn enumerate_local(
    g: &PortGraph,
    mv: &Move,
    dir: Direction,
    opts: &EnumOptions,
    params_hint: &[GroupElem],
) -> Vec<Binding> {
    let RuleBody::Local { vars, side, .. } = &mv.body else {
        unreachable!()
    };
    let (pat, _) = sides(&mv.body, dir).expect("local");
    let candidates = scale_candidates(g, opts, params_hint);
    let nwires = pat.wires().len();
    let mut out = Vec::new();
    for m in match_nodes(g, pat) {
        let matched: BTreeSet<NodeId> = m.nodes.iter().copied().collect();
        let scales = solve_scales(g, pat, &m.nodes, *vars, &candidates);
        for (wires, variant) in wire_choices(g, nwires, &matched) {
            for params in &scales {
                let b = Binding {
                    rule: mv.name,
                    dir,
                    nodes: m.nodes.clone(),
                    wires: wires.clone(),
                    variant,
                    params: params.clone(),
                };
                if let (Some(SideCondition::NoPath { from, to }), Direction::Fwd) = (side, dir) {
                    if !no_path_holds(g, &b.nodes, *from, *to) {
                        continue;
                    }
                }
                out.push(b);
            }
        }
    }
    if let (Some(SideCondition::NoPath { from, to }), Direction::Rev) = (side, dir) {
        out.retain(|b| match apply_local_with_map(g, mv, b) {
            Ok((res, newids)) => no_path_holds(&res, &newids, *from, *to),
            Err(_) => false,
        });
    }
    out.sort();
    out
}

fn no_path_holds(g: &PortGraph, nodes: &[NodeId], from: (usize, u8), to: (usize, u8)) -> bool {
    let from_tail = Endpoint::Port(nodes[from.0], from.1);
    let Some(to_tail) = g.tail_of(Endpoint::Port(nodes[to.0], to.1)) else {
        return false;
    };
    !oriented_path_exists(g, from_tail, to_tail).unwrap_or(true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Outside {
    Host(Endpoint),
    Slot(usize),
}

/// Applies a local binding without re-checking it; returns the new graph and
/// the host ids of the produced fragment's nodes.
fn apply_local_with_map(g: &PortGraph, mv: &Move, b: &Binding) -> Result<(PortGraph, Vec<NodeId>), EngineError> {
    let (pat, rep) = sides(&mv.body, b.dir).expect("local");
    let (nin, nout) = (pat.ins(), pat.outs());
    let mut src: Vec<Option<Outside>> = vec![None; nin];
    let mut dst: Vec<Option<Outside>> = vec![None; nout];
    let slot_of_port = |n: NodeId, p: u8| -> Option<FEnd> {
        let i = b.nodes.iter().position(|&x| x == n)?;
        pat.edges.iter().find_map(|(t, h)| {
            if *t == FEnd::Port(i, p) {
                Some(*h)
            } else if *h == FEnd::Port(i, p) {
                Some(*t)
            } else {
                None
            }
        })
    };
    for (t, h) in &pat.edges {
        match (t, h) {
            (FEnd::In(j), FEnd::Port(a, p)) => {
                let tail = g.tail_of(Endpoint::Port(b.nodes[*a], *p)).ok_or(EngineError::StaleBinding)?;
                src[*j] = Some(match tail {
                    Endpoint::Port(n, q) if b.nodes.contains(&n) => match slot_of_port(n, q) {
                        Some(FEnd::Out(k)) => Outside::Slot(k),
                        _ => return Err(EngineError::StaleBinding),
                    },
                    other => Outside::Host(other),
                });
            }
            (FEnd::Port(a, p), FEnd::Out(k)) => {
                let head = g.head_of(Endpoint::Port(b.nodes[*a], *p)).ok_or(EngineError::StaleBinding)?;
                dst[*k] = Some(match head {
                    Endpoint::Port(n, q) if b.nodes.contains(&n) => match slot_of_port(n, q) {
                        Some(FEnd::In(j)) => Outside::Slot(j),
                        _ => return Err(EngineError::StaleBinding),
                    },
                    other => Outside::Host(other),
                });
            }
            _ => {}
        }
    }
    let wires = pat.wires();
    if wires.len() != b.wires.len() {
        return Err(EngineError::StaleBinding);
    }
    let mut consumed_loops = BTreeSet::new();
    let mut cut_edges = BTreeSet::new();
    let mut k = 0;
    while k < wires.len() {
        let here = b.wires[k];
        let chained = k + 1 < wires.len() && b.wires[k + 1] == here;
        let group: Vec<(usize, usize)> = if chained {
            if b.variant == 1 {
                vec![wires[k + 1], wires[k]]
            } else {
                vec![wires[k], wires[k + 1]]
            }
        } else {
            vec![wires[k]]
        };
        match here {
            EdgeRef::Edge(t) => {
                let h = g.head_of(t).ok_or(EngineError::StaleBinding)?;
                if !cut_edges.insert(t) {
                    return Err(EngineError::StaleBinding);
                }
                src[group[0].0] = Some(Outside::Host(t));
                for w in 0..group.len() - 1 {
                    dst[group[w].1] = Some(Outside::Slot(group[w + 1].0));
                    src[group[w + 1].0] = Some(Outside::Slot(group[w].1));
                }
                dst[group[group.len() - 1].1] = Some(Outside::Host(h));
            }
            EdgeRef::Loop(l) => {
                if l >= g.loops() || !consumed_loops.insert(l) {
                    return Err(EngineError::StaleBinding);
                }
                let n = group.len();
                for w in 0..n {
                    let nx = (w + 1) % n;
                    dst[group[w].1] = Some(Outside::Slot(group[nx].0));
                    src[group[nx].0] = Some(Outside::Slot(group[w].1));
                }
            }
        }
        k += if chained { 2 } else { 1 };
    }
    let src: Vec<Outside> = src.into_iter().map(|x| x.ok_or(EngineError::StaleBinding)).collect::<Result<_, _>>()?;
    let dst: Vec<Outside> = dst.into_iter().map(|x| x.ok_or(EngineError::StaleBinding)).collect::<Result<_, _>>()?;

    let mut out = g.clone();
    for &n in &b.nodes {
        out.remove_node(n);
    }
    for &t in &cut_edges {
        out.disconnect_tail(t);
    }
    out.set_loops(g.loops() - consumed_loops.len());
    let new_ids: Vec<NodeId> = rep
        .nodes
        .iter()
        .map(|p| out.add_gate(p.instantiate(&b.params)))
        .collect();

    let mut from_in: Vec<Option<FEnd>> = vec![None; nin];
    for (t, h) in &rep.edges {
        if let FEnd::In(j) = t {
            from_in[*j] = Some(*h);
        }
    }
    let mut visited_in = vec![false; nin];
    // follow a fragment head outward until a real host endpoint is reached
    let resolve = |mut head: FEnd, visited_in: &mut Vec<bool>| -> Result<Endpoint, EngineError> {
        loop {
            match head {
                FEnd::Port(a, p) => return Ok(Endpoint::Port(new_ids[a], p)),
                FEnd::Out(k) => match dst[k] {
                    Outside::Host(h) => return Ok(h),
                    Outside::Slot(j) => {
                        if visited_in[j] {
                            return Err(EngineError::StaleBinding);
                        }
                        visited_in[j] = true;
                        head = from_in[j].ok_or(EngineError::StaleBinding)?;
                    }
                },
                FEnd::In(_) => return Err(EngineError::StaleBinding),
            }
        }
    };
    let mut new_edges = Vec::new();
    for (t, h) in &rep.edges {
        if let FEnd::Port(a, p) = t {
            new_edges.push((Endpoint::Port(new_ids[*a], *p), resolve(*h, &mut visited_in)?));
        }
    }
    for j in 0..nin {
        if let Outside::Host(t) = src[j] {
            if visited_in[j] {
                return Err(EngineError::StaleBinding);
            }
            visited_in[j] = true;
            let h = from_in[j].ok_or(EngineError::StaleBinding)?;
            new_edges.push((t, resolve(h, &mut visited_in)?));
        }
    }
    for j in 0..nin {
        if !visited_in[j] {
            // the remaining slots close up into cycles through the outside
            visited_in[j] = true;
            let mut head = from_in[j].ok_or(EngineError::StaleBinding)?;
            loop {
                match head {
                    FEnd::Out(k) => match dst[k] {
                        Outside::Slot(j2) if j2 == j => break,
                        Outside::Slot(j2) if !visited_in[j2] => {
                            visited_in[j2] = true;
                            head = from_in[j2].ok_or(EngineError::StaleBinding)?;
                        }
                        _ => return Err(EngineError::StaleBinding),
                    },
                    _ => return Err(EngineError::StaleBinding),
                }
            }
            out.add_loops(1);
        }
    }
    for (t, h) in new_edges {
        out.connect(t, h)?;
    }
    Ok((out, new_ids))
}

// ---------------------------------------------------------------------------
// paths

/// Whether a directed walk leads from the edge with tail `from` to the edge
/// with tail `to`; inside a gate every in-port reaches every out-port.
pub fn oriented_path_exists(g: &PortGraph, from: Endpoint, to: Endpoint) -> Result<bool, EngineError> {
    for e in [from, to] {
        if g.head_of(e).is_none() {
            return Err(EngineError::UnknownEdge(e));
        }
    }
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::from([from]);
    while let Some(t) = queue.pop_front() {
        if t == to {
            return Ok(true);
        }
        if !seen.insert(t) {
            continue;
        }
        if let Some(Endpoint::Port(n, _)) = g.head_of(t) {
            for p in g.kind(n).expect("valid").out_ports() {
                queue.push_back(Endpoint::Port(n, p));
            }
        }
    }
    Ok(false)
}

// ---------------------------------------------------------------------------
// global moves

/// The closed subgraph behind the edge with tail `root`, if that edge is its
/// only connection to the rest.
fn closed_behind(g: &PortGraph, root: Endpoint) -> Option<BTreeSet<NodeId>> {
    let Endpoint::Port(r, _) = root else {
        return None;
    };
    let head = g.head_of(root)?;
    let (comp, touches_leaf) = g.component_without(r, Some(root));
    if touches_leaf || head.node().is_some_and(|h| comp.contains(&h)) {
        return None;
    }
    Some(comp)
}

fn subgraph_with_output(g: &PortGraph, members: &BTreeSet<NodeId>, root: Endpoint) -> PortGraph {
    let mut s = PortGraph::new();
    let mut map = BTreeMap::new();
    for &n in members {
        map.insert(n, s.add_gate(g.kind(n).expect("member").clone()));
    }
    for (t, h) in g.edges() {
        if let (Endpoint::Port(a, p), Endpoint::Port(b, q)) = (t, h) {
            if members.contains(&a) && members.contains(&b) {
                s.connect(Endpoint::Port(map[&a], p), Endpoint::Port(map[&b], q))
                    .expect("copied edge");
            }
        }
    }
    let o = s.add_out();
    if let Endpoint::Port(r, p) = root {
        s.connect(Endpoint::Port(map[&r], p), Endpoint::Leaf(o)).expect("root edge");
    }
    s
}

fn fan_out_forward_site(g: &PortGraph, u: NodeId) -> Result<(Endpoint, BTreeSet<NodeId>), EngineError> {
    if g.kind(u) != Some(&GateKind::FanOut) {
        return Err(EngineError::NotABottleneck);
    }
    let root = g.tail_of(Endpoint::Port(u, 1)).ok_or(EngineError::NotABottleneck)?;
    let comp = closed_behind(g, root).ok_or(EngineError::NotABottleneck)?;
    if comp.contains(&u) {
        return Err(EngineError::NotABottleneck);
    }
    Ok((root, comp))
}

fn fan_out_forward(g: &PortGraph, u: NodeId) -> Result<PortGraph, EngineError> {
    let (root, comp) = fan_out_forward_site(g, u)?;
    let t2 = g.head_of(Endpoint::Port(u, 2)).ok_or(EngineError::StaleBinding)?;
    let t3 = g.head_of(Endpoint::Port(u, 3)).ok_or(EngineError::StaleBinding)?;
    let mut out = g.clone();
    out.remove_node(u);
    let mut map = BTreeMap::new();
    for &n in &comp {
        map.insert(n, out.add_gate(g.kind(n).expect("member").clone()));
    }
    for (t, h) in g.edges() {
        if let (Endpoint::Port(a, p), Endpoint::Port(b, q)) = (t, h) {
            if comp.contains(&a) && comp.contains(&b) {
                out.connect(Endpoint::Port(map[&a], p), Endpoint::Port(map[&b], q))?;
            }
        }
    }
    out.connect(root, t2)?;
    let Endpoint::Port(r, p) = root else { unreachable!() };
    out.connect(Endpoint::Port(map[&r], p), t3)?;
    Ok(out)
}

/// Candidate one-output closed subgraphs, keyed by their output edge.
fn one_output_subgraphs(g: &PortGraph) -> Vec<(Endpoint, BTreeSet<NodeId>, String)> {
    let mut out = Vec::new();
    for (t, _) in g.edges() {
        if let Some(comp) = closed_behind(g, t) {
            let canon = canonical_form(&subgraph_with_output(g, &comp, t)).expect("valid subgraph");
            out.push((t, comp, canon));
        }
    }
    out
}

fn fan_out_reverse_pairs(g: &PortGraph) -> Vec<(Endpoint, Endpoint)> {
    let subs = one_output_subgraphs(g);
    let mut pairs = Vec::new();
    for (i, (ta, ca, ka)) in subs.iter().enumerate() {
        for (tb, cb, kb) in subs.iter().skip(i + 1) {
            if ka == kb && ca.is_disjoint(cb) {
                let (x, y) = if ta.node() <= tb.node() { (*ta, *tb) } else { (*tb, *ta) };
                pairs.push((x, y));
            }
        }
    }
    pairs.sort();
    pairs
}

fn fan_out_reverse(g: &PortGraph, keep: Endpoint, drop: Endpoint) -> Result<PortGraph, EngineError> {
    let ck = closed_behind(g, keep).ok_or(EngineError::CopiesNotIsomorphic)?;
    let cd = closed_behind(g, drop).ok_or(EngineError::CopiesNotIsomorphic)?;
    if !ck.is_disjoint(&cd)
        || canonical_form(&subgraph_with_output(g, &ck, keep))? != canonical_form(&subgraph_with_output(g, &cd, drop))?
    {
        return Err(EngineError::CopiesNotIsomorphic);
    }
    let t1 = g.head_of(keep).ok_or(EngineError::StaleBinding)?;
    let t2 = g.head_of(drop).ok_or(EngineError::StaleBinding)?;
    let mut out = g.clone();
    for n in &cd {
        out.remove_node(*n);
    }
    out.disconnect_tail(keep);
    let u = out.add_gate(GateKind::FanOut);
    out.connect(keep, Endpoint::Port(u, 1))?;
    out.connect(Endpoint::Port(u, 2), t1)?;
    out.connect(Endpoint::Port(u, 3), t2)?;
    Ok(out)
}

/// Applies global fan-out at an explicit anchor: a Υ node forwards, or the
/// output edges (tails) of the two copies in reverse.
pub fn global_fan_out(g: &PortGraph, dir: Direction, anchor: &[Endpoint]) -> Result<PortGraph, EngineError> {
    g.ensure_valid()?;
    match (dir, anchor) {
        (Direction::Fwd, [Endpoint::Port(u, _)]) => fan_out_forward(g, *u),
        (Direction::Fwd, _) => Err(EngineError::NotABottleneck),
        (Direction::Rev, [a, b]) => fan_out_reverse(g, *a, *b),
        (Direction::Rev, _) => Err(EngineError::CopiesNotIsomorphic),
    }
}

fn prune_site(g: &PortGraph, t: NodeId) -> Option<BTreeSet<NodeId>> {
    if g.kind(t) != Some(&GateKind::Term) {
        return None;
    }
    let root = g.tail_of(Endpoint::Port(t, 1))?;
    closed_behind(g, root)
}

// ---------------------------------------------------------------------------
// public entry points

pub fn enumerate_with(g: &PortGraph, mv: &Move, dir: Direction, opts: &EnumOptions) -> Result<Vec<Binding>, EngineError> {
    g.ensure_valid()?;
    if !mv.allows(dir) {
        return Err(EngineError::DirectionNotAllowed(mv.name.to_string()));
    }
    let simple = |nodes: Vec<NodeId>, wires: Vec<EdgeRef>| Binding {
        rule: mv.name,
        dir,
        nodes,
        wires,
        variant: 0,
        params: vec![],
    };
    Ok(match &mv.body {
        RuleBody::Local { .. } => enumerate_local(g, mv, dir, opts, &[]),
        RuleBody::GlobalFanOut => match dir {
            Direction::Fwd => g
                .nodes()
                .keys()
                .filter(|u| fan_out_forward_site(g, **u).is_ok())
                .map(|u| simple(vec![*u], vec![]))
                .collect(),
            Direction::Rev => fan_out_reverse_pairs(g)
                .into_iter()
                .map(|(a, b)| {
                    simple(
                        vec![a.node().expect("port"), b.node().expect("port")],
                        vec![EdgeRef::Edge(a), EdgeRef::Edge(b)],
                    )
                })
                .collect(),
        },
        RuleBody::GlobalPrune => g
            .nodes()
            .keys()
            .filter(|t| prune_site(g, **t).is_some())
            .map(|t| simple(vec![*t], vec![]))
            .collect(),
        RuleBody::LoopRemove => {
            if g.loops() > 0 {
                vec![simple(vec![], vec![EdgeRef::Loop(0)])]
            } else {
                vec![]
            }
        }
        RuleBody::LoopAdd => vec![simple(vec![], vec![])],
    })
}

pub fn enumerate_redexes(g: &PortGraph, name: &str, dir: Direction) -> Result<Vec<Binding>, EngineError> {
    enumerate_with(g, &lookup(name)?, dir, &EnumOptions::default())
}

/// Applies a binding produced by enumeration, without re-validating it.
pub(crate) fn apply_unchecked(g: &PortGraph, b: &Binding) -> Result<PortGraph, EngineError> {
    let mv = lookup(b.rule)?;
    match &mv.body {
        RuleBody::Local { .. } => apply_local_with_map(g, &mv, b).map(|(g, _)| g),
        RuleBody::GlobalFanOut => match (b.dir, b.wires.as_slice()) {
            (Direction::Fwd, _) => fan_out_forward(g, *b.nodes.first().ok_or(EngineError::StaleBinding)?),
            (Direction::Rev, [EdgeRef::Edge(a), EdgeRef::Edge(c)]) => fan_out_reverse(g, *a, *c),
            _ => Err(EngineError::StaleBinding),
        },
        RuleBody::GlobalPrune => {
            let t = *b.nodes.first().ok_or(EngineError::StaleBinding)?;
            let comp = prune_site(g, t).ok_or(EngineError::StaleBinding)?;
            let mut out = g.clone();
            out.remove_node(t);
            for n in comp {
                out.remove_node(n);
            }
            Ok(out)
        }
        RuleBody::LoopRemove => {
            if g.loops() == 0 {
                return Err(EngineError::StaleBinding);
            }
            let mut out = g.clone();
            out.set_loops(g.loops() - 1);
            Ok(out)
        }
        RuleBody::LoopAdd => {
            let mut out = g.clone();
            out.add_loops(1);
            Ok(out)
        }
    }
}

/// Applies a binding of a local move that need not be in the catalogue,
/// e.g. a deliberately broken variant used as a negative control.
pub fn apply_with(g: &PortGraph, mv: &Move, b: &Binding) -> Result<PortGraph, EngineError> {
    if !mv.is_local() {
        return Err(EngineError::UnknownMove(mv.name.to_string()));
    }
    apply_local_with_map(g, mv, b).map(|(g, _)| g)
}

/// Checks the binding against the graph and applies it.
pub fn apply_move(g: &PortGraph, b: &Binding) -> Result<PortGraph, EngineError> {
    let mv = lookup(b.rule)?;
    if !mv.allows(b.dir) {
        return Err(EngineError::DirectionNotAllowed(mv.name.to_string()));
    }
    g.ensure_valid()?;
    let offered = match &mv.body {
        RuleBody::Local { side, .. } => {
            let opts = EnumOptions {
                extra_scales: b.params.clone(),
            };
            let all = enumerate_local(g, &mv, b.dir, &opts, &b.params);
            if !all.contains(b) {
                if side.is_some() {
                    // distinguish a failing side condition from a stale match
                    let mut relaxed = mv.clone();
                    if let RuleBody::Local { side, .. } = &mut relaxed.body {
                        *side = None;
                    }
                    if enumerate_local(g, &relaxed, b.dir, &opts, &b.params).contains(b) {
                        return Err(EngineError::SideConditionViolated(mv.name.to_string()));
                    }
                }
                return Err(EngineError::StaleBinding);
            }
            true
        }
        _ => enumerate_with(g, &mv, b.dir, &EnumOptions::default())?.contains(b),
    };
    if !offered {
        return Err(EngineError::StaleBinding);
    }
    apply_unchecked(g, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::isomorphic;
    use crate::format::parse_glc;

    fn beta_lhs() -> PortGraph {
        parse_glc(
            "node n0 lambda\nnode n1 app\nedge n0.3 -> n1.1\n\
             in a -> n0.1\nout n0.2 -> b\nin c -> n1.2\nout n1.3 -> d\n",
        )
        .unwrap()
    }

    #[test]
    fn beta_on_its_own_pattern_gives_two_wires() {
        let g = beta_lhs();
        let bs = enumerate_redexes(&g, "beta", Direction::Fwd).unwrap();
        assert_eq!(bs.len(), 1);
        let r = apply_move(&g, &bs[0]).unwrap();
        assert_eq!(r.node_count(), 0);
        assert_eq!(r.wire_count(), 2);
        assert_eq!(r.boundary(), g.boundary());
    }

    #[test]
    fn reverse_beta_on_single_wire_self_pairs() {
        let mut g = PortGraph::new();
        g.add_wire();
        let bs = enumerate_redexes(&g, "beta", Direction::Rev).unwrap();
        assert_eq!(bs.len(), 2);
        for b in &bs {
            let r = apply_move(&g, b).unwrap();
            assert!(r.is_valid());
            assert_eq!(r.node_count(), 2);
        }
    }

    #[test]
    fn reverse_beta_on_loop_then_forward_restores_loop() {
        let mut g = PortGraph::new();
        g.set_loops(1);
        let bs = enumerate_redexes(&g, "beta", Direction::Rev).unwrap();
        assert_eq!(bs.len(), 1);
        let closed = apply_move(&g, &bs[0]).unwrap();
        assert_eq!(closed.loops(), 0);
        assert_eq!(closed.node_count(), 2);
        let fwd = enumerate_redexes(&closed, "beta", Direction::Fwd).unwrap();
        let back = apply_move(&closed, &fwd[0]).unwrap();
        assert!(isomorphic(&back, &g).unwrap());
    }

    #[test]
    fn r2_merges_scales() {
        let g = parse_glc(
            "node n0 fanout\nnode n1 dil 1/2\nnode n2 dil 1/3\n\
             in x -> n0.1\nedge n0.2 -> n1.1\nedge n0.3 -> n2.1\nin y -> n2.2\n\
             edge n2.3 -> n1.2\nout n1.3 -> o\n",
        )
        .unwrap();
        let bs = enumerate_redexes(&g, "r2", Direction::Fwd).unwrap();
        assert_eq!(bs.len(), 1);
        let r = apply_move(&g, &bs[0]).unwrap();
        assert_eq!(r.node_count(), 1);
        assert_eq!(r.scales(), vec![GroupElem::ratio(1, 6)]);
    }

    #[test]
    fn prune_is_forward_only() {
        let g = beta_lhs();
        assert!(matches!(
            enumerate_redexes(&g, "prune_app", Direction::Rev),
            Err(EngineError::DirectionNotAllowed(_))
        ));
    }

    #[test]
    fn path_to_itself() {
        let g = beta_lhs();
        let e = Endpoint::Port(NodeId(0), 3);
        assert!(oriented_path_exists(&g, e, e).unwrap());
    }

    #[test]
    fn stale_binding_rejected() {
        let g = beta_lhs();
        let mut b = enumerate_redexes(&g, "beta", Direction::Fwd).unwrap().remove(0);
        b.nodes.swap(0, 1);
        assert!(apply_move(&g, &b).is_err());
    }
}
