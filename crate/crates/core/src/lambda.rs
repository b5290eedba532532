//! Untyped lambda terms and their translation into port graphs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::engine::{apply_unchecked, enumerate_redexes};
use crate::graph::{Dir, Endpoint, GateKind, GraphError, NodeId, PortGraph};
use crate::rules::Direction;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Abs(String, Box<Term>),
    App(Box<Term>, Box<Term>),
}

pub fn var(x: &str) -> Term {
    Term::Var(x.to_string())
}

pub fn abs(x: &str, body: Term) -> Term {
    Term::Abs(x.to_string(), Box::new(body))
}

pub fn app(f: Term, a: Term) -> Term {
    Term::App(Box::new(f), Box::new(a))
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => f.write_str(x),
            Term::Abs(x, b) => write!(f, "\\{}.{}", x, b),
            Term::App(a, b) => {
                match **a {
                    Term::Abs(..) => write!(f, "({})", a)?,
                    _ => write!(f, "{}", a)?,
                }
                match **b {
                    Term::Var(_) => write!(f, " {}", b),
                    _ => write!(f, " ({})", b),
                }
            }
        }
    }
}

impl Term {
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::Abs(_, b) => 1 + b.size(),
            Term::App(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn at(&self, path: &[u8]) -> Option<&Term> {
        match (self, path.split_first()) {
            (t, None) => Some(t),
            (Term::Abs(_, b), Some((0, rest))) => b.at(rest),
            (Term::App(a, _), Some((0, rest))) => a.at(rest),
            (Term::App(_, b), Some((1, rest))) => b.at(rest),
            _ => None,
        }
    }

    /// Paths of all beta redexes, in pre-order.
    pub fn redexes(&self) -> Vec<Vec<u8>> {
        fn walk(t: &Term, path: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
            match t {
                Term::Var(_) => {}
                Term::Abs(_, b) => {
                    path.push(0);
                    walk(b, path, out);
                    path.pop();
                }
                Term::App(a, b) => {
                    if matches!(**a, Term::Abs(..)) {
                        out.push(path.clone());
                    }
                    path.push(0);
                    walk(a, path, out);
                    path.pop();
                    path.push(1);
                    walk(b, path, out);
                    path.pop();
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }
}

// ---------------------------------------------------------------------------
// parsing

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("column {pos}: {msg}")]
pub struct TermSyntaxError {
    pub pos: usize,
    pub msg: String,
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn err(&self, msg: impl Into<String>) -> TermSyntaxError {
        TermSyntaxError {
            pos: self.pos + 1,
            msg: msg.into(),
        }
    }

    fn ident(&mut self) -> Result<String, TermSyntaxError> {
        self.skip_ws();
        let start = self.pos;
        while self
            .chars
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_alphanumeric() || *c == '_' || *c == '\'')
        {
            self.pos += 1;
        }
        if start == self.pos || !self.chars[start].is_ascii_alphabetic() {
            self.pos = start;
            return Err(self.err("expected a variable name"));
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn term(&mut self) -> Result<Term, TermSyntaxError> {
        let mut items = Vec::new();
        loop {
            match self.peek() {
                Some('\\') | Some('λ') => {
                    self.pos += 1;
                    let x = self.ident()?;
                    if self.peek() != Some('.') {
                        return Err(self.err("expected `.` after the bound variable"));
                    }
                    self.pos += 1;
                    items.push(abs(&x, self.term()?));
                    break;
                }
                Some('(') => {
                    self.pos += 1;
                    let t = self.term()?;
                    if self.peek() != Some(')') {
                        return Err(self.err("expected `)`"));
                    }
                    self.pos += 1;
                    items.push(t);
                }
                Some(c) if c.is_ascii_alphabetic() => items.push(Term::Var(self.ident()?)),
                _ => break,
            }
        }
        let mut it = items.into_iter();
        let first = it.next().ok_or_else(|| self.err("expected a term"))?;
        Ok(it.fold(first, app))
    }
}

pub fn parse_term(text: &str) -> Result<Term, TermSyntaxError> {
    let mut p = Parser {
        chars: text.chars().collect(),
        pos: 0,
    };
    let t = p.term()?;
    if p.peek().is_some() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(t)
}

// ---------------------------------------------------------------------------
// term-level operations

pub fn free_vars(t: &Term) -> BTreeSet<String> {
    match t {
        Term::Var(x) => BTreeSet::from([x.clone()]),
        Term::Abs(x, b) => {
            let mut s = free_vars(b);
            s.remove(x);
            s
        }
        Term::App(a, b) => {
            let mut s = free_vars(a);
            s.extend(free_vars(b));
            s
        }
    }
}

/// Free variables in order of first occurrence, left to right.
pub fn free_vars_ordered(t: &Term) -> Vec<String> {
    fn walk(t: &Term, bound: &mut Vec<String>, out: &mut Vec<String>) {
        match t {
            Term::Var(x) => {
                if !bound.contains(x) && !out.contains(x) {
                    out.push(x.clone());
                }
            }
            Term::Abs(x, b) => {
                bound.push(x.clone());
                walk(b, bound, out);
                bound.pop();
            }
            Term::App(a, b) => {
                walk(a, bound, out);
                walk(b, bound, out);
            }
        }
    }
    let mut out = Vec::new();
    walk(t, &mut Vec::new(), &mut out);
    out
}

fn all_names(t: &Term, out: &mut BTreeSet<String>) {
    match t {
        Term::Var(x) => {
            out.insert(x.clone());
        }
        Term::Abs(x, b) => {
            out.insert(x.clone());
            all_names(b, out);
        }
        Term::App(a, b) => {
            all_names(a, out);
            all_names(b, out);
        }
    }
}

fn fresh(base: &str, avoid: &BTreeSet<String>) -> String {
    let mut x = format!("{base}'");
    while avoid.contains(&x) {
        x.push('\'');
    }
    x
}

/// Capture-avoiding substitution `t[x := r]`.
pub fn subst(t: &Term, x: &str, r: &Term) -> Term {
    match t {
        Term::Var(y) if y == x => r.clone(),
        Term::Var(_) => t.clone(),
        Term::App(a, b) => app(subst(a, x, r), subst(b, x, r)),
        Term::Abs(y, _) if y == x => t.clone(),
        Term::Abs(y, b) => {
            let fr = free_vars(r);
            if fr.contains(y) && free_vars(b).contains(x) {
                let mut avoid = fr;
                all_names(b, &mut avoid);
                avoid.insert(x.to_string());
                let y2 = fresh(y, &avoid);
                let b2 = subst(b, y, &Term::Var(y2.clone()));
                abs(&y2, subst(&b2, x, r))
            } else {
                abs(y, subst(b, x, r))
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("no beta redex at path {0:?}")]
pub struct NotARedex(pub Vec<u8>);

pub fn beta_step(t: &Term, path: &[u8]) -> Result<Term, NotARedex> {
    let bad = || NotARedex(path.to_vec());
    match (t, path.split_first()) {
        (Term::App(f, a), None) => match &**f {
            Term::Abs(x, body) => Ok(subst(body, x, a)),
            _ => Err(bad()),
        },
        (Term::Abs(x, b), Some((0, rest))) => Ok(abs(x, beta_step(b, rest).map_err(|_| bad())?)),
        (Term::App(f, a), Some((0, rest))) => Ok(app(beta_step(f, rest).map_err(|_| bad())?, (**a).clone())),
        (Term::App(f, a), Some((1, rest))) => Ok(app((**f).clone(), beta_step(a, rest).map_err(|_| bad())?)),
        _ => Err(bad()),
    }
}

pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    fn go<'a>(a: &'a Term, b: &'a Term, env: &mut Vec<(&'a str, &'a str)>) -> bool {
        match (a, b) {
            (Term::Var(x), Term::Var(y)) => {
                match (
                    env.iter().rev().position(|(p, _)| *p == x),
                    env.iter().rev().position(|(_, q)| *q == y),
                ) {
                    (Some(i), Some(j)) => i == j,
                    (None, None) => x == y,
                    _ => false,
                }
            }
            (Term::Abs(x, p), Term::Abs(y, q)) => {
                env.push((x, y));
                let r = go(p, q, env);
                env.pop();
                r
            }
            (Term::App(p1, p2), Term::App(q1, q2)) => go(p1, q1, env) && go(p2, q2, env),
            _ => false,
        }
    }
    go(a, b, &mut Vec::new())
}

/// Leftmost-outermost reduction; `None` if no normal form within `max_steps`.
pub fn normalize(t: &Term, max_steps: usize) -> Option<(Term, usize)> {
    let mut cur = t.clone();
    for k in 0..=max_steps {
        match cur.redexes().first() {
            None => return Some((cur, k)),
            Some(p) if k < max_steps => cur = beta_step(&cur, p).expect("listed redex"),
            Some(_) => break,
        }
    }
    None
}

/// A closed term of exactly `size` nodes. Binders are drawn from a pool of
/// three names, so shadowing and capture-prone substitutions are common.
pub fn random_closed_term<R: Rng>(rng: &mut R, size: usize) -> Term {
    fn go<R: Rng>(rng: &mut R, n: usize, scope: &mut Vec<String>) -> Term {
        if n == 1 {
            return Term::Var(scope.choose(rng).expect("non-empty scope").clone());
        }
        // an application needs a variable in each of its two sides
        if scope.is_empty() || n == 2 || rng.gen_bool(0.4) {
            let x = ["x", "y", "z"].choose(rng).expect("non-empty").to_string();
            scope.push(x.clone());
            let body = go(rng, n - 1, scope);
            scope.pop();
            return abs(&x, body);
        }
        let k = rng.gen_range(1..n - 1);
        app(go(rng, k, scope), go(rng, n - 1 - k, scope))
    }
    go(rng, size.max(2), &mut Vec::new())
}

// ---------------------------------------------------------------------------
// bound-variable list

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Letter {
    LambdaL,
    LambdaR,
    AppL,
    AppR,
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Letter::LambdaL => "λL",
            Letter::LambdaR => "λR",
            Letter::AppL => "∧L",
            Letter::AppR => "∧R",
        })
    }
}

pub type PathWord = Vec<Letter>;

/// Binders in left-to-right leaf order, each with the word read from its
/// variable leaf up to the root of the syntax tree.
pub fn bound_list(t: &Term) -> Vec<(String, PathWord)> {
    fn walk(t: &Term, up: &mut Vec<Letter>, out: &mut Vec<(String, PathWord)>) {
        match t {
            Term::Var(_) => {}
            Term::Abs(x, b) => {
                let mut w = vec![Letter::LambdaL];
                w.extend(up.iter().rev());
                out.push((x.clone(), w));
                up.push(Letter::LambdaR);
                walk(b, up, out);
                up.pop();
            }
            Term::App(a, b) => {
                up.push(Letter::AppL);
                walk(a, up, out);
                up.pop();
                up.push(Letter::AppR);
                walk(b, up, out);
                up.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(t, &mut Vec::new(), &mut out);
    out
}

// ---------------------------------------------------------------------------
// translation

#[derive(Clone, Copy)]
enum Src {
    Tail(Endpoint),
    Occ(usize, usize),
}

struct Builder {
    g: PortGraph,
    /// per variable slot: its source and the heads of its occurrences
    slots: Vec<(Endpoint, Vec<Option<Endpoint>>)>,
    free: BTreeMap<String, usize>,
    positions: BTreeMap<Vec<u8>, NodeId>,
}

impl Builder {
    fn link(&mut self, s: Src, head: Endpoint) {
        match s {
            Src::Tail(t) => self.g.connect(t, head).expect("fresh ports"),
            Src::Occ(v, k) => self.slots[v].1[k] = Some(head),
        }
    }

    fn build(&mut self, t: &Term, env: &mut Vec<(String, usize)>, path: &mut Vec<u8>) -> Src {
        match t {
            Term::Var(x) => {
                let v = match env.iter().rev().find(|(n, _)| n == x) {
                    Some((_, v)) => *v,
                    None => match self.free.get(x) {
                        Some(v) => *v,
                        None => {
                            let leaf = self.g.add_leaf(Dir::In, Some(x.clone()));
                            self.slots.push((Endpoint::Leaf(leaf), Vec::new()));
                            self.free.insert(x.clone(), self.slots.len() - 1);
                            self.slots.len() - 1
                        }
                    },
                };
                self.slots[v].1.push(None);
                Src::Occ(v, self.slots[v].1.len() - 1)
            }
            Term::Abs(x, b) => {
                let l = self.g.add_gate(GateKind::Lambda);
                self.positions.insert(path.clone(), l);
                self.slots.push((Endpoint::Port(l, 2), Vec::new()));
                env.push((x.clone(), self.slots.len() - 1));
                path.push(0);
                let body = self.build(b, env, path);
                path.pop();
                env.pop();
                self.link(body, Endpoint::Port(l, 1));
                Src::Tail(Endpoint::Port(l, 3))
            }
            Term::App(f, a) => {
                let n = self.g.add_gate(GateKind::App);
                self.positions.insert(path.clone(), n);
                path.push(0);
                let fs = self.build(f, env, path);
                path.pop();
                path.push(1);
                let as_ = self.build(a, env, path);
                path.pop();
                self.link(fs, Endpoint::Port(n, 1));
                self.link(as_, Endpoint::Port(n, 2));
                Src::Tail(Endpoint::Port(n, 3))
            }
        }
    }
}

/// Feeds `source` to `heads` in order through a left-combed Υ tree; no
/// heads means a ⊤ gate.
pub(crate) fn fan_to(g: &mut PortGraph, source: Endpoint, heads: &[Endpoint]) {
    match heads.len() {
        0 => {
            let t = g.add_gate(GateKind::Term);
            g.connect(source, Endpoint::Port(t, 1)).expect("fresh");
        }
        1 => g.connect(source, heads[0]).expect("fresh"),
        k => {
            let u = g.add_gate(GateKind::FanOut);
            g.connect(source, Endpoint::Port(u, 1)).expect("fresh");
            g.connect(Endpoint::Port(u, 3), heads[k - 1]).expect("fresh");
            fan_to(g, Endpoint::Port(u, 2), &heads[..k - 1]);
        }
    }
}

/// Graph of a term plus the gate of every abstraction and application,
/// keyed by its path in the syntax tree.
pub fn to_graph_with_positions(t: &Term) -> (PortGraph, BTreeMap<Vec<u8>, NodeId>) {
    let mut b = Builder {
        g: PortGraph::new(),
        slots: Vec::new(),
        free: BTreeMap::new(),
        positions: BTreeMap::new(),
    };
    let root = b.build(t, &mut Vec::new(), &mut Vec::new());
    let out = b.g.add_leaf(Dir::Out, None);
    b.link(root, Endpoint::Leaf(out));
    let slots = std::mem::take(&mut b.slots);
    for (source, heads) in slots {
        let heads: Vec<Endpoint> = heads.into_iter().map(|h| h.expect("every occurrence linked")).collect();
        fan_to(&mut b.g, source, &heads);
    }
    (b.g, b.positions)
}

pub fn to_graph(t: &Term) -> PortGraph {
    to_graph_with_positions(t).0
}

/// The graphic beta move at the gates of the term redex at `path`, followed
/// by pruning and forward fan-out until stable and left-comb Υ trees.
pub fn graph_beta_at(t: &Term, path: &[u8]) -> Result<PortGraph, NotARedex> {
    let bad = || NotARedex(path.to_vec());
    let (g, pos) = to_graph_with_positions(t);
    let mut lam = path.to_vec();
    lam.push(0);
    let (Some(&l), Some(&a)) = (pos.get(&lam), pos.get(path)) else {
        return Err(bad());
    };
    let b = enumerate_redexes(&g, "beta", Direction::Fwd)
        .expect("catalogue move")
        .into_iter()
        .find(|b| b.nodes == [l, a])
        .ok_or_else(bad)?;
    let h = apply_unchecked(&g, &b).expect("enumerated binding applies");
    let h = crate::script::cleanup(&h, &mut crate::script::Trace::new(&h), true);
    Ok(fanout_normalize(&h).expect("valid"))
}

/// No dilation gates, and every edge reachable from a λ's bound-variable
/// output can still reach a ⊤ gate or that λ's own input edge.
pub fn is_lambda_graph(g: &PortGraph) -> Result<bool, GraphError> {
    g.ensure_valid()?;
    if g.count_kind(|k| matches!(k, GateKind::Dilation(_))) > 0 {
        return Ok(false);
    }
    let succ = |t: Endpoint| -> Vec<Endpoint> {
        match g.head_of(t) {
            Some(Endpoint::Port(n, _)) => g.kind(n).expect("valid").out_ports().map(|p| Endpoint::Port(n, p)).collect(),
            _ => Vec::new(),
        }
    };
    // walks stop once they enter `stop`
    let reach = |start: Endpoint, stop: Endpoint| -> BTreeSet<Endpoint> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![start];
        while let Some(t) = stack.pop() {
            if seen.insert(t) && t != stop {
                stack.extend(succ(t));
            }
        }
        seen
    };
    for (&l, k) in g.nodes() {
        if *k != GateKind::Lambda {
            continue;
        }
        let into_l = g.tail_of(Endpoint::Port(l, 1)).expect("valid");
        for t in reach(Endpoint::Port(l, 2), into_l) {
            let ok = reach(t, into_l).into_iter().any(|e| {
                e == into_l || matches!(g.head_of(e), Some(Endpoint::Port(n, _)) if g.kind(n) == Some(&GateKind::Term))
            });
            if !ok {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Rewrites every Υ tree to left-comb shape using reverse co-associativity.
pub fn fanout_normalize(g: &PortGraph) -> Result<PortGraph, GraphError> {
    g.ensure_valid()?;
    let mut cur = g.clone();
    let cap = 4 * (g.node_count() + 1) * (g.node_count() + 1);
    for _ in 0..cap {
        let bs = enumerate_redexes(&cur, "co_assoc", Direction::Rev).expect("catalogue move");
        let Some(b) = bs.into_iter().next() else {
            break;
        };
        cur = apply_unchecked(&cur, &b).expect("enumerated binding applies");
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::isomorphic;
    use crate::format::parse_glc;

    #[test]
    fn parses_named_terms() {
        assert_eq!(parse_term("\\x.x").unwrap(), abs("x", var("x")));
        let omega = parse_term("(\\x.(x x)) (\\x.(x x))").unwrap();
        let w = abs("x", app(var("x"), var("x")));
        assert_eq!(omega, app(w.clone(), w));
        let s = parse_term("\\x.\\y.\\z.((x z)(y z))").unwrap();
        assert_eq!(
            s,
            abs("x", abs("y", abs("z", app(app(var("x"), var("z")), app(var("y"), var("z"))))))
        );
        assert_eq!(parse_term("λx.x").unwrap(), abs("x", var("x")));
    }

    #[test]
    fn syntax_errors_have_positions() {
        let e = parse_term("\\x x").unwrap_err();
        assert_eq!(e.pos, 4);
        assert!(parse_term("(x").is_err());
        assert!(parse_term("").is_err());
    }

    #[test]
    fn display_reparses() {
        for s in ["\\x.\\y.\\z.x z (y z)", "(\\x.x x) (\\x.x x)", "a (b c) d"] {
            let t = parse_term(s).unwrap();
            assert_eq!(parse_term(&t.to_string()).unwrap(), t, "{s}");
        }
    }

    #[test]
    fn beta_step_basics() {
        let t = parse_term("(\\x.x) y").unwrap();
        assert_eq!(beta_step(&t, &[]).unwrap(), var("y"));
        assert!(beta_step(&var("x"), &[]).is_err());
    }

    #[test]
    fn substitution_avoids_capture() {
        let t = parse_term("\\y.x").unwrap();
        let r = subst(&t, "x", &var("y"));
        assert_eq!(r, abs("y'", var("y")));
    }

    #[test]
    fn alpha_equivalence() {
        assert!(alpha_eq(&parse_term("\\x.x").unwrap(), &parse_term("\\y.y").unwrap()));
        assert!(!alpha_eq(&parse_term("\\x.\\y.x").unwrap(), &parse_term("\\x.\\y.y").unwrap()));
        assert!(!alpha_eq(&parse_term("\\x.y").unwrap(), &parse_term("\\x.z").unwrap()));
    }

    #[test]
    fn bound_lists() {
        use Letter::*;
        let i = parse_term("\\x.x").unwrap();
        assert_eq!(bound_list(&i), vec![("x".to_string(), vec![LambdaL])]);
        let s = parse_term("\\x.\\y.\\z.((x z)(y z))").unwrap();
        assert_eq!(
            bound_list(&s),
            vec![
                ("x".to_string(), vec![LambdaL]),
                ("y".to_string(), vec![LambdaL, LambdaR]),
                ("z".to_string(), vec![LambdaL, LambdaR, LambdaR]),
            ]
        );
        let o = parse_term("(\\x.(x x)) (\\x.(x x))").unwrap();
        assert_eq!(
            bound_list(&o),
            vec![("x".to_string(), vec![LambdaL, AppL]), ("x".to_string(), vec![LambdaL, AppR])]
        );
    }

    #[test]
    fn identity_graph_shape() {
        let g = to_graph(&parse_term("\\x.x").unwrap());
        let expected = parse_glc("node n1 lambda\nedge n1.2 -> n1.1\nout n1.3 -> r\n").unwrap();
        assert!(isomorphic(&g, &expected).unwrap());
    }

    #[test]
    fn k_graph_shape() {
        let g = to_graph(&parse_term("\\x.\\y.x").unwrap());
        assert_eq!(g.count_kind(|k| *k == GateKind::Lambda), 2);
        assert_eq!(g.count_kind(|k| *k == GateKind::Term), 1);
        let expected = parse_glc(
            "node n0 lambda\nnode n1 lambda\nnode n2 term\n\
             edge n0.2 -> n1.1\nedge n1.3 -> n0.1\nedge n1.2 -> n2.1\nout n0.3 -> r\n",
        )
        .unwrap();
        assert!(isomorphic(&g, &expected).unwrap());
    }

    #[test]
    fn free_variable_feeds_fanout_tree() {
        let g = to_graph(&parse_term("(\\x.(x y))(\\x.(x y))").unwrap());
        assert_eq!(g.in_leaves().len(), 1);
        let y = Endpoint::Leaf(g.in_leaves()[0]);
        let Some(Endpoint::Port(u, 1)) = g.head_of(y) else {
            panic!("y should feed a fan-out");
        };
        assert_eq!(g.kind(u), Some(&GateKind::FanOut));
    }

    #[test]
    fn lambda_graph_predicate() {
        for s in ["\\x.x", "\\x.\\y.x", "\\x.\\y.\\z.((x z)(y z))", "(\\x.(x x)) (\\x.(x x))", "(\\x.(x y))(\\x.(x y))"] {
            assert!(is_lambda_graph(&to_graph(&parse_term(s).unwrap())).unwrap(), "{s}");
        }
        let leaky = parse_glc("node n0 lambda\nin a -> n0.1\nout n0.2 -> b\nout n0.3 -> c\n").unwrap();
        assert!(!is_lambda_graph(&leaky).unwrap());
        let dil = parse_glc("node n0 dil 1/2\nin a -> n0.1\nin b -> n0.2\nout n0.3 -> c\n").unwrap();
        assert!(!is_lambda_graph(&dil).unwrap());
    }

    #[test]
    fn normalize_finds_normal_form() {
        let skk = parse_term("(\\x.\\y.\\z.((x z)(y z))) (\\x.\\y.x) (\\x.\\y.x)").unwrap();
        let (nf, _) = normalize(&skk, 50).unwrap();
        assert!(alpha_eq(&nf, &parse_term("\\z.z").unwrap()));
        let omega = parse_term("(\\x.(x x)) (\\x.(x x))").unwrap();
        assert!(normalize(&omega, 20).is_none());
    }

    #[test]
    fn fanout_normalize_left_combs() {
        // right comb with four leaves
        let right = parse_glc(
            "node n0 fanout\nnode n1 fanout\nnode n2 fanout\nin a -> n0.1\n\
             out n0.2 -> o1\nedge n0.3 -> n1.1\nout n1.2 -> o2\nedge n1.3 -> n2.1\n\
             out n2.2 -> o3\nout n2.3 -> o4\n",
        )
        .unwrap();
        let mut left = PortGraph::new();
        let a = left.add_in();
        let outs: Vec<Endpoint> = (0..4).map(|_| Endpoint::Leaf(left.add_out())).collect();
        fan_to(&mut left, Endpoint::Leaf(a), &outs);
        let n = fanout_normalize(&right).unwrap();
        assert!(isomorphic(&n, &left).unwrap());
        assert!(isomorphic(&fanout_normalize(&n).unwrap(), &n).unwrap());
        let i = to_graph(&parse_term("\\x.x").unwrap());
        assert!(isomorphic(&fanout_normalize(&i).unwrap(), &i).unwrap());
    }
}
