//! Reusable graph constructions: combinators, zippers, grafting versus
//! application, currying, arrow packing and fixed points.
//!
//! A [`MacroGraph`] is a port graph whose boundary leaves carry names, so
//! constructions can be wired together by role rather than by leaf index.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::canon::isomorphic;
use crate::engine::{enumerate_redexes, EdgeRef, EngineError};
use crate::graph::{Dir, Endpoint, GateKind, GraphError, LeafId, PortGraph};
use crate::lambda::{self, Term};
use crate::rules::Direction;
use crate::script::{run_script, MoveScript, ScriptError, Step};

#[derive(Debug, Error)]
pub enum MacroError {
    #[error("unknown combinator {0}")]
    UnknownName(String),
    #[error("a zipper needs at least one pair")]
    EmptyZipper,
    #[error("role mismatch: {0}")]
    RoleMismatch(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Script(#[from] ScriptError),
}

/// A graph plus named boundary leaves.
#[derive(Clone, Debug)]
pub struct MacroGraph {
    pub graph: PortGraph,
    pub roles: BTreeMap<String, LeafId>,
}

impl MacroGraph {
    /// Roles must name distinct boundary leaves of `graph`.
    pub fn new(graph: PortGraph, roles: BTreeMap<String, LeafId>) -> Result<Self, MacroError> {
        let distinct: BTreeSet<LeafId> = roles.values().copied().collect();
        if distinct.len() != roles.len() {
            return Err(MacroError::RoleMismatch("two roles share a leaf".into()));
        }
        if let Some((r, _)) = roles.iter().find(|(_, l)| graph.leaf(**l).is_none()) {
            return Err(MacroError::RoleMismatch(format!("role {r} names no leaf")));
        }
        Ok(Self { graph, roles })
    }

    /// Term graph: free variables become IN roles of the same name, the
    /// root is the role `out`.
    pub fn from_term(t: &Term) -> Self {
        let graph = lambda::to_graph(t);
        let mut roles = BTreeMap::new();
        for leaf in graph.leaves() {
            match (leaf.dir, &leaf.label) {
                (Dir::In, Some(x)) => {
                    roles.insert(x.clone(), leaf.id);
                }
                (Dir::Out, _) => {
                    roles.insert("out".to_string(), leaf.id);
                }
                _ => {}
            }
        }
        Self { graph, roles }
    }

    /// A single arrow from role `in` to role `out`.
    pub fn wire() -> Self {
        let mut graph = PortGraph::new();
        let (i, o) = graph.add_wire();
        let roles = BTreeMap::from([("in".to_string(), i), ("out".to_string(), o)]);
        Self { graph, roles }
    }

    pub fn role(&self, name: &str) -> Result<LeafId, MacroError> {
        self.roles
            .get(name)
            .copied()
            .ok_or_else(|| MacroError::RoleMismatch(format!("no role {name}")))
    }

    fn roles_of(&self, dir: Dir) -> Vec<(&String, LeafId)> {
        self.roles
            .iter()
            .filter(|(_, l)| self.graph.leaf(**l).map(|x| x.dir) == Some(dir))
            .map(|(r, l)| (r, *l))
            .collect()
    }

    pub fn input_roles(&self) -> Vec<&String> {
        self.roles_of(Dir::In).into_iter().map(|(r, _)| r).collect()
    }

    pub fn output_roles(&self) -> Vec<&String> {
        self.roles_of(Dir::Out).into_iter().map(|(r, _)| r).collect()
    }

    fn sole(&self, dir: Dir) -> Result<(String, LeafId), MacroError> {
        match self.roles_of(dir).as_slice() {
            [(r, l)] => Ok(((*r).clone(), *l)),
            other => Err(MacroError::RoleMismatch(format!(
                "expected one {dir:?} role, found {}",
                other.len()
            ))),
        }
    }

    /// Turns a closed one-output graph `a` into the one-input graph `x ↦ a ∧ x`.
    pub fn applicator(&self) -> Result<MacroGraph, MacroError> {
        let (_, out) = self.sole(Dir::Out)?;
        let mut g = self.graph.clone();
        let src = g.tail_of(Endpoint::Leaf(out)).expect("role leaf is covered");
        g.disconnect_tail(src);
        g.drop_leaf(out);
        let app = g.add_gate(GateKind::App);
        let i = g.add_in();
        let o = g.add_out();
        g.connect(src, Endpoint::Port(app, 1))?;
        g.connect(Endpoint::Leaf(i), Endpoint::Port(app, 2))?;
        g.connect(Endpoint::Port(app, 3), Endpoint::Leaf(o))?;
        let mut roles: BTreeMap<String, LeafId> =
            self.roles.iter().filter(|(_, l)| **l != out).map(|(r, l)| (r.clone(), *l)).collect();
        roles.insert("in".into(), i);
        roles.insert("out".into(), o);
        MacroGraph::new(g, roles)
    }
}

pub fn combinator_term(name: &str) -> Result<Term, MacroError> {
    let text = match name {
        "I" => "\\x.x",
        "K" => "\\x.\\y.x",
        "S" => "\\x.\\y.\\z.x z (y z)",
        _ => return Err(MacroError::UnknownName(name.to_string())),
    };
    Ok(lambda::parse_term(text).expect("fixed combinator text"))
}

pub fn combinator(name: &str) -> Result<MacroGraph, MacroError> {
    Ok(MacroGraph::from_term(&combinator_term(name)?))
}

/// The n-zipper: λ gates L1..Ln chained body-first (Li.3 → Li+1.1) facing
/// ∧ gates An..A1 (Ln.3 → An.1, Ak.3 → Ak-1.1).
///
/// Roles: `body` feeds L1, `arg{k}` feeds Ak, `var{k}` is the bound output
/// of Lk, `out` is the output of A1. Only Ln/An is a beta redex, and firing
/// it leaves an (n-1)-zipper plus the arrow `arg{n}` → `var{n}`.
pub fn zipper(n: usize) -> Result<MacroGraph, MacroError> {
    if n == 0 {
        return Err(MacroError::EmptyZipper);
    }
    let mut g = PortGraph::new();
    let ls: Vec<_> = (0..n).map(|_| g.add_gate(GateKind::Lambda)).collect();
    let aps: Vec<_> = (0..n).map(|_| g.add_gate(GateKind::App)).collect();
    let mut roles = BTreeMap::new();
    let body = g.add_leaf(Dir::In, Some("body".into()));
    roles.insert("body".to_string(), body);
    g.connect(Endpoint::Leaf(body), Endpoint::Port(ls[0], 1))?;
    for k in 0..n {
        let a = g.add_leaf(Dir::In, Some(format!("arg{}", k + 1)));
        roles.insert(format!("arg{}", k + 1), a);
        g.connect(Endpoint::Leaf(a), Endpoint::Port(aps[k], 2))?;
    }
    for k in 0..n {
        let v = g.add_leaf(Dir::Out, Some(format!("var{}", k + 1)));
        roles.insert(format!("var{}", k + 1), v);
        g.connect(Endpoint::Port(ls[k], 2), Endpoint::Leaf(v))?;
    }
    let out = g.add_leaf(Dir::Out, Some("out".into()));
    roles.insert("out".to_string(), out);
    for k in 0..n - 1 {
        g.connect(Endpoint::Port(ls[k], 3), Endpoint::Port(ls[k + 1], 1))?;
    }
    g.connect(Endpoint::Port(ls[n - 1], 3), Endpoint::Port(aps[n - 1], 1))?;
    for k in (1..n).rev() {
        g.connect(Endpoint::Port(aps[k], 3), Endpoint::Port(aps[k - 1], 1))?;
    }
    g.connect(Endpoint::Port(aps[0], 3), Endpoint::Leaf(out))?;
    MacroGraph::new(g, roles)
}

fn merge_roles(
    into: &mut BTreeMap<String, LeafId>,
    from: &BTreeMap<String, LeafId>,
    lmap: &BTreeMap<LeafId, LeafId>,
    prefix: &str,
    skip: &[LeafId],
) {
    for (r, l) in from {
        if !skip.contains(l) {
            into.insert(format!("{prefix}{r}"), lmap.get(l).copied().unwrap_or(*l));
        }
    }
}

/// Grafts the single output of `b` onto the input role `at` of `a`. Roles
/// of `a` keep their names, other roles of `b` get the prefix `b.`.
pub fn graft(a: &MacroGraph, at: &str, b: &MacroGraph) -> Result<MacroGraph, MacroError> {
    let target = a.role(at)?;
    if a.graph.leaf(target).map(|l| l.dir) != Some(Dir::In) {
        return Err(MacroError::RoleMismatch(format!("{at} is not an input")));
    }
    let (_, b_out) = b.sole(Dir::Out)?;
    let (mut g, _, lmap) = a.graph.disjoint_union(&b.graph);
    g.join(lmap[&b_out], target)?;
    let mut roles = BTreeMap::new();
    merge_roles(&mut roles, &a.roles, &BTreeMap::new(), "", &[target]);
    merge_roles(&mut roles, &b.roles, &lmap, "b.", &[b_out]);
    MacroGraph::new(g, roles)
}

/// `a ∧ b`: an application gate over the single outputs of `a` and `b`.
/// Other roles get the prefixes `a.` and `b.`; the new output is `out`.
pub fn apply_pair(a: &MacroGraph, b: &MacroGraph) -> Result<MacroGraph, MacroError> {
    let (_, a_out) = a.sole(Dir::Out)?;
    let (_, b_out) = b.sole(Dir::Out)?;
    let (mut g, _, lmap) = a.graph.disjoint_union(&b.graph);
    let fa = g.tail_of(Endpoint::Leaf(a_out)).expect("covered");
    let fb = g.tail_of(Endpoint::Leaf(lmap[&b_out])).expect("covered");
    g.disconnect_tail(fa);
    g.disconnect_tail(fb);
    g.drop_leaf(a_out);
    g.drop_leaf(lmap[&b_out]);
    let app = g.add_gate(GateKind::App);
    g.connect(fa, Endpoint::Port(app, 1))?;
    g.connect(fb, Endpoint::Port(app, 2))?;
    let out = g.add_out();
    g.connect(Endpoint::Port(app, 3), Endpoint::Leaf(out))?;
    let mut roles = BTreeMap::new();
    merge_roles(&mut roles, &a.roles, &BTreeMap::new(), "a.", &[a_out]);
    merge_roles(&mut roles, &b.roles, &lmap, "b.", &[b_out]);
    roles.insert("out".into(), out);
    MacroGraph::new(g, roles)
}

/// Left-nested application `((f a1) a2) .. ak`.
pub fn apply_all(f: &MacroGraph, args: &[&MacroGraph]) -> Result<MacroGraph, MacroError> {
    let mut cur = f.clone();
    for a in args {
        cur = apply_pair(&cur, a)?;
    }
    Ok(cur)
}

/// Closes the inputs of `a` (taken in role order, or in `order` if given)
/// under a chain of λ gates: the root λ binds the first input. The result
/// has no inputs and applying it to k arguments opens in k beta moves.
pub fn curry(a: &MacroGraph, order: Option<&[&str]>) -> Result<MacroGraph, MacroError> {
    let (_, out) = a.sole(Dir::Out)?;
    let ins: Vec<String> = match order {
        Some(o) => o.iter().map(|s| s.to_string()).collect(),
        None => a.input_roles().into_iter().cloned().collect(),
    };
    if ins.is_empty() {
        return Err(MacroError::RoleMismatch("nothing to curry".into()));
    }
    let mut g = a.graph.clone();
    let mut src = g.tail_of(Endpoint::Leaf(out)).expect("covered");
    g.disconnect_tail(src);
    g.drop_leaf(out);
    for name in ins.iter().rev() {
        let leaf = a.role(name)?;
        if a.graph.leaf(leaf).map(|l| l.dir) != Some(Dir::In) {
            return Err(MacroError::RoleMismatch(format!("{name} is not an input")));
        }
        let l = g.add_gate(GateKind::Lambda);
        g.connect(src, Endpoint::Port(l, 1))?;
        // an input wired straight to the output was `src` itself and is now λ.1
        g.join_from(Endpoint::Port(l, 2), leaf)?;
        src = Endpoint::Port(l, 3);
    }
    let o = g.add_out();
    g.connect(src, Endpoint::Leaf(o))?;
    let roles = BTreeMap::from([("out".to_string(), o)]);
    MacroGraph::new(g, roles)
}

/// The two-arrow packer `λf.f a b` (roles `in1`, `in2`, `out`) and the
/// unpacker `p (λy.λx.y)` (roles `in`, `out1`, `out2`). In the unpacker
/// `out1` is the application result and `out2` the bound `x`.
pub fn pack_arrows() -> (MacroGraph, MacroGraph) {
    let t = lambda::parse_term("\\f.f a b").expect("fixed text");
    let pg = lambda::to_graph(&t);
    let by_label = |g: &PortGraph, s: &str| g.leaf_by_label(s).expect("free variable").id;
    let mut roles = BTreeMap::new();
    roles.insert("in1".to_string(), by_label(&pg, "a"));
    roles.insert("in2".to_string(), by_label(&pg, "b"));
    roles.insert("out".to_string(), pg.out_leaves()[0]);
    let packer = MacroGraph::new(pg, roles).expect("distinct roles");

    let mut g = PortGraph::new();
    let app = g.add_gate(GateKind::App);
    let ly = g.add_gate(GateKind::Lambda);
    let lx = g.add_gate(GateKind::Lambda);
    let i = g.add_in();
    let o1 = g.add_out();
    let o2 = g.add_out();
    let wires = [
        (Endpoint::Leaf(i), Endpoint::Port(app, 1)),
        (Endpoint::Port(ly, 3), Endpoint::Port(app, 2)),
        (Endpoint::Port(lx, 3), Endpoint::Port(ly, 1)),
        (Endpoint::Port(ly, 2), Endpoint::Port(lx, 1)),
        (Endpoint::Port(app, 3), Endpoint::Leaf(o1)),
        (Endpoint::Port(lx, 2), Endpoint::Leaf(o2)),
    ];
    for (t, h) in wires {
        g.connect(t, h).expect("fresh ports");
    }
    let roles = BTreeMap::from([
        ("in".to_string(), i),
        ("out1".to_string(), o1),
        ("out2".to_string(), o2),
    ]);
    let unpacker = MacroGraph::new(g, roles).expect("distinct roles");
    (packer, unpacker)
}

/// Packer followed by unpacker through a single arrow.
pub fn pack_unpack() -> MacroGraph {
    let (p, u) = pack_arrows();
    let mut r = graft(&u, "in", &p).expect("matching roles");
    for (from, to) in [("b.in1", "in1"), ("b.in2", "in2")] {
        let l = r.roles.remove(from).expect("packer role");
        r.roles.insert(to.into(), l);
    }
    r
}

/// One-input one-output encoding of λ: its bound output and root packed
/// into one arrow (root first).
pub fn packed_lambda() -> MacroGraph {
    let (p, _) = pack_arrows();
    let mut g = p.graph.clone();
    let l = g.add_gate(GateKind::Lambda);
    let i = g.add_in();
    g.connect(Endpoint::Leaf(i), Endpoint::Port(l, 1)).expect("fresh");
    g.join_from(Endpoint::Port(l, 3), p.roles["in1"]).expect("packer input");
    g.join_from(Endpoint::Port(l, 2), p.roles["in2"]).expect("packer input");
    let roles = BTreeMap::from([("in".to_string(), i), ("out".to_string(), p.roles["out"])]);
    MacroGraph::new(g, roles).expect("distinct roles")
}

/// One-input one-output encoding of ∧: the packed (function, argument)
/// pair is unpacked into the gate. Composed after [`packed_lambda`] it
/// opens in four betas to an arrow and one loop.
pub fn packed_app() -> MacroGraph {
    let (_, u) = pack_arrows();
    let mut g = u.graph.clone();
    let a = g.add_gate(GateKind::App);
    for (role, port) in [("out1", 1), ("out2", 2)] {
        let leaf = u.roles[role];
        let src = g.tail_of(Endpoint::Leaf(leaf)).expect("covered");
        g.disconnect_tail(src);
        g.drop_leaf(leaf);
        g.connect(src, Endpoint::Port(a, port)).expect("fresh");
    }
    let o = g.add_out();
    g.connect(Endpoint::Port(a, 3), Endpoint::Leaf(o)).expect("fresh");
    let roles = BTreeMap::from([("in".to_string(), u.roles["in"]), ("out".to_string(), o)]);
    MacroGraph::new(g, roles).expect("distinct roles")
}

/// A fixed point `b` of a one-input one-output graph `a`, together with the
/// graft `a(b)` and a move script taking `a(b)` to a graph isomorphic to `b`.
#[derive(Clone, Debug)]
pub struct FixedPoint {
    pub point: MacroGraph,
    pub host: MacroGraph,
    pub witness: MoveScript,
}

/// `b = U ∧ U` with `U = λx.a(x ∧ x)`. A closed one-output `a` is first
/// turned into `x ↦ a ∧ x`. The witness is a reverse global fan-out that
/// merges the two copies of `U`, then a reverse beta that rebuilds the
/// outer application.
pub fn fixpoint(a: &MacroGraph) -> Result<FixedPoint, MacroError> {
    let a = if a.input_roles().is_empty() { a.applicator()? } else { a.clone() };
    let (a_in, _) = a.sole(Dir::In)?;
    a.sole(Dir::Out)?;

    // U = λx. a(x ∧ x)
    let mut diag = PortGraph::new();
    let u = diag.add_gate(GateKind::FanOut);
    let app = diag.add_gate(GateKind::App);
    let i = diag.add_in();
    let o = diag.add_out();
    for (t, h) in [
        (Endpoint::Leaf(i), Endpoint::Port(u, 1)),
        (Endpoint::Port(u, 2), Endpoint::Port(app, 1)),
        (Endpoint::Port(u, 3), Endpoint::Port(app, 2)),
        (Endpoint::Port(app, 3), Endpoint::Leaf(o)),
    ] {
        diag.connect(t, h)?;
    }
    let diag = MacroGraph::new(diag, BTreeMap::from([("x".to_string(), i), ("out".to_string(), o)]))?;
    let body = graft(&a, &a_in, &diag)?;
    let x = body.role("b.x")?;
    let out = body.role("out")?;
    let mut ug = body.graph.clone();
    let lam = ug.add_gate(GateKind::Lambda);
    ug.join_from(Endpoint::Port(lam, 2), x)?;
    let src = ug.tail_of(Endpoint::Leaf(out)).expect("covered");
    ug.disconnect_tail(src);
    ug.connect(src, Endpoint::Port(lam, 1))?;
    ug.connect(Endpoint::Port(lam, 3), Endpoint::Leaf(out))?;
    let um = MacroGraph::new(ug, BTreeMap::from([("out".to_string(), out)]))?;
    let point = apply_pair(&um, &um)?;
    let host = graft(&a, &a_in, &point)?;

    let witness = fixpoint_witness(&host.graph, &point.graph)?;
    Ok(FixedPoint { point, host, witness })
}

fn fixpoint_witness(host: &PortGraph, point: &PortGraph) -> Result<MoveScript, MacroError> {
    let no_witness = || MacroError::RoleMismatch("no fixed-point witness found".into());
    let merges = enumerate_redexes(host, "global_fan_out", Direction::Rev)?;
    for m in merges {
        let step1 = Step::exact(&m);
        let Ok((mid, _)) = run_script(host, std::slice::from_ref(&step1)) else {
            continue;
        };
        let Some(&EdgeRef::Edge(kept)) = m.wires.first() else {
            continue;
        };
        let root = mid.tail_of(Endpoint::Leaf(mid.out_leaves()[0])).expect("covered");
        for b in enumerate_redexes(&mid, "beta", Direction::Rev)? {
            let mut ws = b.wires.clone();
            ws.sort();
            let mut want = vec![EdgeRef::Edge(kept), EdgeRef::Edge(root)];
            want.sort();
            if ws != want {
                continue;
            }

            let script = vec![step1.clone(), Step::exact(&b)];
            if let Ok((end, _)) = run_script(host, &script) {
                if isomorphic(&end, point)? {
                    return Ok(script);
                }
            }
        }
    }
    Err(no_witness())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::apply_move;
    use crate::script::{reduce, Status};

    fn beta_all(g: &PortGraph, cap: usize) -> (PortGraph, usize) {
        let mut cur = g.clone();
        for k in 0..cap {
            let bs = enumerate_redexes(&cur, "beta", Direction::Fwd).unwrap();
            let Some(b) = bs.first() else { return (cur, k) };
            cur = apply_move(&cur, b).unwrap();
        }
        (cur, cap)
    }

    fn wires_only(g: &PortGraph) -> bool {
        g.node_count() == 0 && g.loops() == 0
    }

    #[test]
    fn combinators_match_terms() {
        for n in ["I", "K", "S"] {
            let m = combinator(n).unwrap();
            assert!(isomorphic(&m.graph, &lambda::to_graph(&combinator_term(n).unwrap())).unwrap());
            assert!(lambda::is_lambda_graph(&m.graph).unwrap());
        }
        let k = combinator("K").unwrap();
        assert_eq!(k.graph.count_kind(|g| *g == GateKind::Term), 1);
        assert!(matches!(combinator("Y"), Err(MacroError::UnknownName(_))));
    }

    #[test]
    fn one_zipper_is_the_beta_pattern() {
        let z = zipper(1).unwrap();
        assert_eq!(z.graph.node_count(), 2);
        let bs = enumerate_redexes(&z.graph, "beta", Direction::Fwd).unwrap();
        assert_eq!(bs.len(), 1);
        let g = apply_move(&z.graph, &bs[0]).unwrap();
        assert!(wires_only(&g));
        assert_eq!(g.wire_count(), 2);
    }

    #[test]
    fn zipper_step_peels_one_arrow() {
        for n in 2..6 {
            let z = zipper(n).unwrap();
            let bs = enumerate_redexes(&z.graph, "beta", Direction::Fwd).unwrap();
            assert_eq!(bs.len(), 1, "only the inner pair is a redex");
            let g = apply_move(&z.graph, &bs[0]).unwrap();
            // compare against a fresh (n-1)-zipper next to one wire
            let mut expect = zipper(n - 1).unwrap().graph;
            let _ = expect.add_wire();
            let arg = z.roles[&format!("arg{n}")];
            let var = z.roles[&format!("var{n}")];
            assert_eq!(g.head_of(Endpoint::Leaf(arg)), Some(Endpoint::Leaf(var)));
            assert_eq!(g.node_count(), expect.node_count());
            assert_eq!(g.wire_count(), 1);
        }
    }

    #[test]
    fn zipper_opens_in_n_betas() {
        for n in 1..=10 {
            let z = zipper(n).unwrap();
            let (g, k) = beta_all(&z.graph, 100);
            assert_eq!(k, n);
            assert!(wires_only(&g));
            assert_eq!(g.wire_count(), n + 1);
            assert_eq!(g.leaves().len(), 2 * n + 2);
        }
        assert!(matches!(zipper(0), Err(MacroError::EmptyZipper)));
    }

    #[test]
    fn i_applied_reduces_in_one_beta() {
        let i = combinator("I").unwrap();
        let g = apply_pair(&i, &i).unwrap();
        let r = reduce(&g.graph, "beta-priority", 50).unwrap();
        assert_eq!(r.steps, 1);
        assert!(isomorphic(&r.graph, &i.graph).unwrap());
    }

    #[test]
    fn k_discards_second_argument() {
        let (k, i, s) = (combinator("K").unwrap(), combinator("I").unwrap(), combinator("S").unwrap());
        let g = apply_all(&k, &[&i, &s]).unwrap();
        let r = reduce(&g.graph, "beta-priority", 50).unwrap();
        assert_eq!(r.status, Status::Normal);
        assert!(isomorphic(&r.graph, &i.graph).unwrap());
    }

    #[test]
    fn graft_is_substitution_for_single_occurrence() {
        let a = MacroGraph::from_term(&lambda::parse_term("\\y. x y").unwrap());
        let b = combinator("K").unwrap();
        let g = graft(&a, "x", &b).unwrap();
        let want = lambda::to_graph(&lambda::parse_term("\\y. (\\p.\\q.p) y").unwrap());
        assert!(isomorphic(&g.graph, &want).unwrap());
        assert!(matches!(graft(&a, "out", &b), Err(MacroError::RoleMismatch(_))));
    }

    #[test]
    fn packing_opens_in_three_betas() {
        let (p, u) = pack_arrows();
        assert!(lambda::is_lambda_graph(&p.graph).unwrap());
        assert_eq!((p.graph.in_leaves().len(), p.graph.out_leaves().len()), (2, 1));
        assert_eq!((u.graph.in_leaves().len(), u.graph.out_leaves().len()), (1, 2));
        let pu = pack_unpack();
        let (g, k) = beta_all(&pu.graph, 10);
        assert_eq!(k, 3);
        assert!(wires_only(&g));
        assert_eq!(g.head_of(Endpoint::Leaf(pu.roles["in1"])), Some(Endpoint::Leaf(pu.roles["out1"])));
        assert_eq!(g.head_of(Endpoint::Leaf(pu.roles["in2"])), Some(Endpoint::Leaf(pu.roles["out2"])));
    }

    #[test]
    fn packed_gates_cancel_along_a_line() {
        let l = packed_lambda();
        let a = packed_app();
        let line = graft(&a, "in", &l).unwrap();
        let (g, k) = beta_all(&line.graph, 10);
        // the λ meets its own bound output, which closes into a loop
        assert_eq!(k, 4);
        assert_eq!((g.node_count(), g.wire_count(), g.loops()), (0, 1, 1));
    }

    #[test]
    fn curried_graph_reopens() {
        let a = MacroGraph::from_term(&lambda::parse_term("u v").unwrap());
        let c = curry(&a, Some(&["u", "v"])).unwrap();
        assert!(c.input_roles().is_empty());
        let (i, k) = (combinator("I").unwrap(), combinator("K").unwrap());
        let applied = apply_all(&c, &[&i, &k]).unwrap();
        let (g, n) = beta_all(&applied.graph, 2);
        assert_eq!(n, 2);
        let want = apply_pair(&i, &k).unwrap();
        assert!(isomorphic(&g, &want.graph).unwrap());

        let c1 = curry(&MacroGraph::wire(), None).unwrap();
        let wire_i = combinator("I").unwrap();
        assert!(isomorphic(&c1.graph, &wire_i.graph).unwrap());
    }

    #[test]
    fn fixpoint_witness_replays() {
        let fp = fixpoint(&combinator("I").unwrap()).unwrap();
        assert!(fp.witness.len() <= 4);
        let (end, _) = run_script(&fp.host.graph, &fp.witness).unwrap();
        assert_eq!(
            crate::canon::canonical_form(&end).unwrap(),
            crate::canon::canonical_form(&fp.point.graph).unwrap()
        );
    }

    #[test]
    fn fixpoint_of_a_wire_is_omega() {
        let fp = fixpoint(&MacroGraph::wire()).unwrap();
        let omega = lambda::to_graph(&lambda::parse_term("(\\x.x x) (\\x.x x)").unwrap());
        assert!(isomorphic(&fp.point.graph, &omega).unwrap());
        let r = reduce(&fp.point.graph, "beta-priority", 20).unwrap();
        assert_eq!(r.status, Status::Cycle);
    }
}
