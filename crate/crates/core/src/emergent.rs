//! Emergent-algebra sector: dilation macros, exact evaluation in the
//! vector model `x ∘_ε y = (1-ε)x + εy`, and soundness checks for the moves
//! of the sector against that model.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::canon::canonical_form;
use crate::engine::{apply_with, enumerate_with, Binding, EnumOptions};
use crate::graph::{Dir, Endpoint, GateKind, GraphError, LeafId, NodeId, PortGraph};
use crate::group::GroupElem;
use crate::macros::MacroGraph;
use crate::rules::{find_move, Direction, Directionality, FEnd, Fragment, Move, NodePat, RuleBody, Scale};
use crate::script::{MoveScript, Step};

pub type Vector = Vec<BigRational>;
/// Values on leaves, all of one dimension.
pub type Valuation = BTreeMap<LeafId, Vector>;
/// Numeric values for the formal symbols of scales.
pub type Assignment = BTreeMap<String, BigRational>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("the graph has an oriented cycle")]
    CyclicGraph,
    #[error("no value for input leaf {0:?}")]
    MissingInput(LeafId),
    #[error("no value for symbol {0}")]
    SymbolUnassigned(String),
    #[error("gate {0} is outside the emergent sector")]
    NotInSector(NodeId),
    #[error("input vectors differ in dimension")]
    DimensionMismatch,
    #[error("the linear system has no unique solution")]
    Indeterminate,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

// ---------------------------------------------------------------------------
// the vector model

/// `x ∘_ε y = (1-ε)x + εy`.
pub fn dilate(eps: &BigRational, x: &[BigRational], y: &[BigRational]) -> Vector {
    let one_minus = BigRational::one() - eps;
    x.iter().zip(y).map(|(a, b)| &one_minus * a + eps * b).collect()
}

/// `x •_ε y = x + (y-x)/ε`, the solution `z` of `x ∘_ε z = y`.
pub fn dilate_back(eps: &BigRational, x: &[BigRational], y: &[BigRational]) -> Vector {
    x.iter().zip(y).map(|(a, b)| a + (b - a) / eps).collect()
}

fn scale_value(s: &GroupElem, assign: &Assignment) -> Result<BigRational, EvalError> {
    if let Some(sym) = s.exponents().keys().find(|k| !assign.contains_key(*k)) {
        return Err(EvalError::SymbolUnassigned(sym.clone()));
    }
    s.value(assign).map_err(|_| EvalError::SymbolUnassigned(String::new()))
}

fn dimension(inputs: &Valuation) -> Result<usize, EvalError> {
    let mut dims = inputs.values().map(|v| v.len());
    let d = dims.next().unwrap_or(0);
    if dims.any(|e| e != d) {
        return Err(EvalError::DimensionMismatch);
    }
    Ok(d)
}

/// Propagates values from IN leaves to OUT leaves: Υ copies, a dilation
/// computes `port1 ∘_ε port2`, ⊤ discards. Only gates feeding an OUT leaf
/// are visited; a cycle among them is an error.
pub fn evaluate(g: &PortGraph, inputs: &Valuation, assign: &Assignment) -> Result<Valuation, EvalError> {
    g.ensure_valid()?;
    dimension(inputs)?;
    let mut memo: BTreeMap<Endpoint, Vector> = BTreeMap::new();
    let mut out = Valuation::new();
    for o in g.out_leaves() {
        let src = g.tail_of(Endpoint::Leaf(o)).expect("valid");
        let mut active = BTreeSet::new();
        let v = value_of(g, src, inputs, assign, &mut memo, &mut active)?;
        out.insert(o, v);
    }
    Ok(out)
}

fn value_of(
    g: &PortGraph,
    tail: Endpoint,
    inputs: &Valuation,
    assign: &Assignment,
    memo: &mut BTreeMap<Endpoint, Vector>,
    active: &mut BTreeSet<NodeId>,
) -> Result<Vector, EvalError> {
    if let Some(v) = memo.get(&tail) {
        return Ok(v.clone());
    }
    let v = match tail {
        Endpoint::Leaf(l) => inputs.get(&l).cloned().ok_or(EvalError::MissingInput(l))?,
        Endpoint::Port(n, _) => {
            if !active.insert(n) {
                return Err(EvalError::CyclicGraph);
            }
            let src = |p: u8| g.tail_of(Endpoint::Port(n, p)).expect("valid");
            let v = match g.kind(n).expect("valid") {
                GateKind::FanOut => value_of(g, src(1), inputs, assign, memo, active)?,
                GateKind::Dilation(s) => {
                    let x = value_of(g, src(1), inputs, assign, memo, active)?;
                    let y = value_of(g, src(2), inputs, assign, memo, active)?;
                    dilate(&scale_value(s, assign)?, &x, &y)
                }
                _ => return Err(EvalError::NotInSector(n)),
            };
            active.remove(&n);
            v
        }
    };
    memo.insert(tail, v.clone());
    Ok(v)
}

/// Like [`evaluate`] but cycles are allowed: every gate output feeding an
/// OUT leaf is an unknown of an affine system, which must have a unique
/// solution.
pub fn solve(g: &PortGraph, inputs: &Valuation, assign: &Assignment) -> Result<Valuation, EvalError> {
    g.ensure_valid()?;
    let d = dimension(inputs)?;
    // unknown gate outputs, found by walking back from the OUT leaves
    let mut index: BTreeMap<Endpoint, usize> = BTreeMap::new();
    let mut order = Vec::new();
    let mut queue: VecDeque<Endpoint> =
        g.out_leaves().iter().map(|o| g.tail_of(Endpoint::Leaf(*o)).expect("valid")).collect();
    while let Some(t) = queue.pop_front() {
        let Endpoint::Port(n, _) = t else { continue };
        if index.contains_key(&t) {
            continue;
        }
        index.insert(t, order.len());
        order.push(t);
        let ins: &[u8] = match g.kind(n).expect("valid") {
            GateKind::FanOut => &[1],
            GateKind::Dilation(_) => &[1, 2],
            _ => return Err(EvalError::NotInSector(n)),
        };
        for p in ins {
            queue.push_back(g.tail_of(Endpoint::Port(n, *p)).expect("valid"));
        }
    }
    let m = order.len();
    let zero = || vec![BigRational::zero(); d];
    let mut a = vec![vec![BigRational::zero(); m]; m];
    let mut b = vec![zero(); m];
    for (i, t) in order.iter().enumerate() {
        let Endpoint::Port(n, _) = *t else { unreachable!() };
        a[i][i] += BigRational::one();
        let terms: Vec<(u8, BigRational)> = match g.kind(n).expect("valid") {
            GateKind::FanOut => vec![(1, BigRational::one())],
            GateKind::Dilation(s) => {
                let eps = scale_value(s, assign)?;
                vec![(1, BigRational::one() - &eps), (2, eps)]
            }
            _ => unreachable!("checked above"),
        };
        for (p, c) in terms {
            match g.tail_of(Endpoint::Port(n, p)).expect("valid") {
                Endpoint::Leaf(l) => {
                    let x = inputs.get(&l).ok_or(EvalError::MissingInput(l))?;
                    for k in 0..d {
                        b[i][k] += &c * &x[k];
                    }
                }
                src => a[i][index[&src]] -= c,
            }
        }
    }
    let z = gauss(a, b).ok_or(EvalError::Indeterminate)?;
    let mut out = Valuation::new();
    for o in g.out_leaves() {
        let v = match g.tail_of(Endpoint::Leaf(o)).expect("valid") {
            Endpoint::Leaf(l) => inputs.get(&l).cloned().ok_or(EvalError::MissingInput(l))?,
            t => z[index[&t]].clone(),
        };
        out.insert(o, v);
    }
    Ok(out)
}

/// Solves `a z = b` for a square `a` and vector-valued right-hand side.
fn gauss(mut a: Vec<Vec<BigRational>>, mut b: Vec<Vector>) -> Option<Vec<Vector>> {
    let m = a.len();
    for col in 0..m {
        let piv = (col..m).find(|r| !a[*r][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        let p = a[col][col].clone();
        for x in a[col].iter_mut() {
            *x /= &p;
        }
        for x in b[col].iter_mut() {
            *x /= &p;
        }
        for r in 0..m {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in col..m {
                let delta = &f * &a[col][c];
                a[r][c] -= delta;
            }
            for k in 0..b[r].len() {
                let delta = &f * &b[col][k];
                b[r][k] -= delta;
            }
        }
    }
    Some(b)
}

fn has_oriented_cycle(g: &PortGraph) -> bool {
    let mut indeg: BTreeMap<NodeId, usize> = g.nodes().keys().map(|n| (*n, 0)).collect();
    for (t, h) in g.edges() {
        if let (Endpoint::Port(_, _), Endpoint::Port(m, _)) = (t, h) {
            *indeg.get_mut(&m).expect("node") += 1;
        }
    }
    let mut ready: Vec<NodeId> = indeg.iter().filter(|(_, d)| **d == 0).map(|(n, _)| *n).collect();
    let mut done = 0;
    while let Some(n) = ready.pop() {
        done += 1;
        for p in g.kind(n).expect("node").out_ports() {
            if let Some(Endpoint::Port(m, _)) = g.head_of(Endpoint::Port(n, p)) {
                let d = indeg.get_mut(&m).expect("node");
                *d -= 1;
                if *d == 0 {
                    ready.push(m);
                }
            }
        }
    }
    done < g.node_count()
}

/// [`evaluate`] when the graph is acyclic, [`solve`] otherwise.
pub fn evaluate_any(g: &PortGraph, inputs: &Valuation, assign: &Assignment) -> Result<Valuation, EvalError> {
    if has_oriented_cycle(g) {
        solve(g, inputs, assign)
    } else {
        evaluate(g, inputs, assign)
    }
}

// ---------------------------------------------------------------------------
// sector membership and macros

/// No λ or ∧ gates, and every dilation scale uses only the listed symbols.
/// ⊤ gates are admitted as pruning residue.
pub fn in_emer_sector(g: &PortGraph, symbols: &[&str]) -> Result<bool, GraphError> {
    g.ensure_valid()?;
    Ok(g.nodes().values().all(|k| match k {
        GateKind::Lambda | GateKind::App => false,
        GateKind::Dilation(s) => s.within_symbols(symbols),
        GateKind::FanOut | GateKind::Term => true,
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MacroKind {
    /// approximate sum `x •_ε ((x ∘_ε u) ∘_ε v)`
    Sigma,
    /// approximate difference `(x ∘_ε u) •_ε (x ∘_ε v)`
    Delta,
    /// approximate inverse `(x ∘_ε u) •_ε x`
    Inv,
}

#[derive(Clone, Debug)]
pub struct EmerMacro {
    pub kind: MacroKind,
    pub scale: GroupElem,
    /// roles `x`, `u`, `v` (not for `Inv`) and `out`
    pub mac: MacroGraph,
}

struct Wiring {
    g: PortGraph,
    roles: BTreeMap<String, LeafId>,
}

impl Wiring {
    fn new() -> Self {
        Wiring { g: PortGraph::new(), roles: BTreeMap::new() }
    }

    fn input(&mut self, name: &str) -> Endpoint {
        let l = self.g.add_leaf(Dir::In, Some(name.into()));
        self.roles.insert(name.into(), l);
        Endpoint::Leaf(l)
    }

    fn output(&mut self, from: Endpoint) {
        let l = self.g.add_leaf(Dir::Out, Some("out".into()));
        self.roles.insert("out".into(), l);
        self.g.connect(from, Endpoint::Leaf(l)).expect("fresh");
    }

    fn fan(&mut self, from: Endpoint) -> (Endpoint, Endpoint) {
        let u = self.g.add_gate(GateKind::FanOut);
        self.g.connect(from, Endpoint::Port(u, 1)).expect("fresh");
        (Endpoint::Port(u, 2), Endpoint::Port(u, 3))
    }

    fn dil(&mut self, s: &GroupElem, x: Endpoint, y: Endpoint) -> Endpoint {
        let d = self.g.add_gate(GateKind::Dilation(s.clone()));
        self.g.connect(x, Endpoint::Port(d, 1)).expect("fresh");
        self.g.connect(y, Endpoint::Port(d, 2)).expect("fresh");
        Endpoint::Port(d, 3)
    }

    fn finish(self) -> MacroGraph {
        MacroGraph::new(self.g, self.roles).expect("distinct roles")
    }
}

/// The macro graph of `kind` at scale `eps`; `•_ε` is a dilation by `ε⁻¹`.
pub fn build_emer_macro(kind: MacroKind, eps: &GroupElem) -> EmerMacro {
    let back = eps.inv();
    let mut w = Wiring::new();
    let x = w.input("x");
    let u = w.input("u");
    let (x1, x2) = w.fan(x);
    let res = match kind {
        MacroKind::Sigma => {
            let v = w.input("v");
            let d1 = w.dil(eps, x1, u);
            let d2 = w.dil(eps, d1, v);
            w.dil(&back, x2, d2)
        }
        MacroKind::Delta => {
            let v = w.input("v");
            let d1 = w.dil(eps, x1, u);
            let d2 = w.dil(eps, x2, v);
            w.dil(&back, d1, d2)
        }
        MacroKind::Inv => {
            let d1 = w.dil(eps, x1, u);
            w.dil(&back, d1, x2)
        }
    };
    w.output(res);
    EmerMacro { kind, scale: eps.clone(), mac: w.finish() }
}

/// `Δ^x_ε(u, x)`: the difference macro with its `v` input fed by a second
/// copy of `x`. Roles `x`, `u`, `out`.
pub fn delta_shared(eps: &GroupElem) -> MacroGraph {
    let back = eps.inv();
    let mut w = Wiring::new();
    let x = w.input("x");
    let u = w.input("u");
    let (xs, xv) = w.fan(x);
    let (x1, x2) = w.fan(xs);
    let d1 = w.dil(eps, x1, u);
    let d2 = w.dil(eps, x2, xv);
    let res = w.dil(&back, d1, d2);
    w.output(res);
    w.finish()
}

/// Moves taking [`delta_shared`] to the inverse macro: re-associate the
/// Υ tree so both copies of `x` entering the same dilation share a Υ, then
/// collapse `x ∘_ε x` by idempotency.
pub fn delta_to_inv_script(g: &PortGraph) -> Option<MoveScript> {
    let assoc = find_move("co_assoc").expect("catalogue");
    let idem = find_move("r1a").expect("catalogue");
    let opts = EnumOptions::default();
    for b in enumerate_with(g, &assoc, Direction::Fwd, &opts).ok()? {
        let mid = crate::engine::apply_move(g, &b).ok()?;
        if let Some(c) = enumerate_with(&mid, &idem, Direction::Fwd, &opts).ok()?.into_iter().next() {
            return Some(vec![Step::exact(&b), Step::exact(&c)]);
        }
    }
    None
}

// ---------------------------------------------------------------------------
// soundness of moves against the model

/// Moves of the emergent sector checked against the model.
pub const SECTOR_MOVES: [&str; 13] = [
    "co_assoc",
    "co_comm",
    "r1a",
    "r1b",
    "r2",
    "ext2",
    "prune_fanout_2",
    "prune_fanout_3",
    "prune_dil",
    "global_fan_out",
    "global_prune",
    "loop_remove",
    "loop_add",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SoundnessReport {
    pub rule: String,
    pub trials: usize,
    pub failures: usize,
    pub first_counterexample: Option<String>,
}

impl SoundnessReport {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.trials > 0
    }
}

impl fmt::Display for SoundnessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} trials={} failures={}", self.rule, self.trials, self.failures)?;
        if let Some(c) = &self.first_counterexample {
            write!(f, " counterexample: {c}")?;
        }
        Ok(())
    }
}

fn scale_pool() -> Vec<GroupElem> {
    let a = GroupElem::symbol("a");
    let b = GroupElem::symbol("b");
    vec![
        GroupElem::ratio(1, 2),
        GroupElem::ratio(3, 1),
        GroupElem::ratio(2, 5),
        a.clone(),
        b.clone(),
        a.inv(),
        a.mul(&b),
        a.mul(&GroupElem::ratio(1, 3)),
    ]
}

fn random_rational<R: Rng>(rng: &mut R) -> BigRational {
    rat(rng.gen_range(-9..=9), rng.gen_range(1..=5))
}

/// A random instance of a move's source side inside a random emergent host.
struct Planter<'r, R: Rng> {
    rng: &'r mut R,
    g: PortGraph,
    avail: Vec<Endpoint>,
    pool: Vec<GroupElem>,
}

impl<R: Rng> Planter<'_, R> {
    fn take(&mut self) -> Endpoint {
        if self.avail.is_empty() {
            let l = self.g.add_in();
            self.avail.push(Endpoint::Leaf(l));
        }
        let i = self.rng.gen_range(0..self.avail.len());
        self.avail.swap_remove(i)
    }

    fn noise(&mut self, steps: usize) {
        for _ in 0..steps {
            if self.avail.len() < 2 || self.rng.gen_bool(0.4) {
                let t = self.take();
                let u = self.g.add_gate(GateKind::FanOut);
                self.g.connect(t, Endpoint::Port(u, 1)).expect("fresh");
                self.avail.extend([Endpoint::Port(u, 2), Endpoint::Port(u, 3)]);
            } else {
                let (x, y) = (self.take(), self.take());
                let s = self.pool.choose(self.rng).expect("pool").clone();
                let d = self.g.add_gate(GateKind::Dilation(s));
                self.g.connect(x, Endpoint::Port(d, 1)).expect("fresh");
                self.g.connect(y, Endpoint::Port(d, 2)).expect("fresh");
                self.avail.push(Endpoint::Port(d, 3));
            }
        }
    }

    fn plant(&mut self, f: &Fragment, vars: &[GroupElem]) {
        let ins: Vec<Endpoint> = (0..f.ins()).map(|_| self.take()).collect();
        let ids: Vec<NodeId> = f.nodes.iter().map(|p| self.g.add_gate(p.instantiate(vars))).collect();
        let mut outs = vec![None; f.outs()];
        for (t, h) in &f.edges {
            let tail = match t {
                FEnd::In(j) => ins[*j],
                FEnd::Port(a, p) => Endpoint::Port(ids[*a], *p),
                FEnd::Out(_) => unreachable!("outputs are heads"),
            };
            match h {
                FEnd::Out(k) => outs[*k] = Some(tail),
                FEnd::Port(a, p) => self.g.connect(tail, Endpoint::Port(ids[*a], *p)).expect("fresh"),
                FEnd::In(_) => unreachable!("inputs are tails"),
            }
        }
        self.avail.extend(outs.into_iter().map(|o| o.expect("every output is fed")));
    }

    /// A closed kink: values inside it are never determined by the inputs.
    fn closed_part(&mut self, s: GroupElem) -> Endpoint {
        let d = self.g.add_gate(GateKind::Dilation(s));
        let u = self.g.add_gate(GateKind::FanOut);
        let v = self.g.add_gate(GateKind::FanOut);
        let e = [
            (Endpoint::Port(d, 3), Endpoint::Port(u, 1)),
            (Endpoint::Port(u, 2), Endpoint::Port(d, 1)),
            (Endpoint::Port(u, 3), Endpoint::Port(v, 1)),
            (Endpoint::Port(v, 2), Endpoint::Port(d, 2)),
        ];
        for (t, h) in e {
            self.g.connect(t, h).expect("fresh");
        }
        Endpoint::Port(v, 3)
    }

    fn terminate(&mut self, t: Endpoint) {
        let k = self.g.add_gate(GateKind::Term);
        self.g.connect(t, Endpoint::Port(k, 1)).expect("fresh");
    }

    fn close(mut self) -> PortGraph {
        for t in std::mem::take(&mut self.avail) {
            let o = self.g.add_out();
            self.g.connect(t, Endpoint::Leaf(o)).expect("fresh");
        }
        self.g
    }
}

fn random_host<R: Rng>(rng: &mut R, mv: &Move, dir: Direction) -> (PortGraph, Vec<GroupElem>) {
    let pool = scale_pool();
    let mut p = Planter { rng, g: PortGraph::new(), avail: Vec::new(), pool };
    let n_in = p.rng.gen_range(1..=3);
    for _ in 0..n_in {
        let l = p.g.add_in();
        p.avail.push(Endpoint::Leaf(l));
    }
    let before = p.rng.gen_range(0..4);
    p.noise(before);
    let mut vars = Vec::new();
    match &mv.body {
        RuleBody::Local { lhs, rhs, vars: nv, .. } => {
            vars = (0..*nv).map(|_| p.pool.choose(p.rng).expect("pool").clone()).collect();
            let src = if dir == Direction::Fwd { lhs } else { rhs };
            p.plant(src, &vars);
        }
        RuleBody::GlobalFanOut => {
            let s = p.pool.choose(p.rng).expect("pool").clone();
            if dir == Direction::Fwd {
                let root = p.closed_part(s);
                let u = p.g.add_gate(GateKind::FanOut);
                p.g.connect(root, Endpoint::Port(u, 1)).expect("fresh");
                p.terminate(Endpoint::Port(u, 2));
                p.terminate(Endpoint::Port(u, 3));
            } else {
                for _ in 0..2 {
                    let root = p.closed_part(s.clone());
                    p.terminate(root);
                }
            }
        }
        RuleBody::GlobalPrune => {
            let s = p.pool.choose(p.rng).expect("pool").clone();
            let root = p.closed_part(s);
            p.terminate(root);
        }
        RuleBody::LoopRemove | RuleBody::LoopAdd => {
            let k = p.rng.gen_range(1..=2);
            p.g.add_loops(k);
        }
    }
    let after = p.rng.gen_range(0..4);
    p.noise(after);
    (p.close(), vars)
}

fn random_inputs<R: Rng>(rng: &mut R, g: &PortGraph, dim: usize) -> Valuation {
    g.in_leaves().into_iter().map(|l| (l, (0..dim).map(|_| random_rational(rng)).collect())).collect()
}

fn random_assignment<R: Rng>(rng: &mut R) -> Assignment {
    ["a", "b"]
        .iter()
        .map(|s| (s.to_string(), rat(rng.gen_range(1..=9), rng.gen_range(2..=7))))
        .collect()
}

fn show_valuation(v: &Valuation) -> String {
    v.iter()
        .map(|(l, x)| format!("{}=({})", l.0, x.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")))
        .collect::<Vec<_>>()
        .join(" ")
}

fn apply_any(g: &PortGraph, mv: &Move, b: &Binding) -> Result<PortGraph, String> {
    if find_move(mv.name).as_ref() == Some(mv) {
        crate::engine::apply_move(g, b).map_err(|e| e.to_string())
    } else {
        apply_with(g, mv, b).map_err(|e| e.to_string())
    }
}

/// Plants random instances of `mv` in random emergent hosts, applies a
/// random match (alternating directions for reversible moves) and compares
/// exact OUT valuations before and after.
pub fn check_soundness_of(mv: &Move, trials: usize, dim: usize, seed: u64) -> SoundnessReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SoundnessReport {
        rule: mv.name.to_string(),
        trials: 0,
        failures: 0,
        first_counterexample: None,
    };
    let fail = |report: &mut SoundnessReport, msg: String| {
        report.failures += 1;
        report.first_counterexample.get_or_insert(msg);
    };
    for t in 0..trials {
        let dir = if t % 2 == 1 && mv.directionality == Directionality::Bidirectional {
            Direction::Rev
        } else {
            Direction::Fwd
        };
        let (host, vars) = random_host(&mut rng, mv, dir);
        let opts = EnumOptions { extra_scales: vars };
        let bindings = match enumerate_with(&host, mv, dir, &opts) {
            Ok(bs) if !bs.is_empty() => bs,
            _ => {
                fail(&mut report, format!("no match in planted host ({dir})"));
                report.trials += 1;
                continue;
            }
        };
        let b = bindings.choose(&mut rng).expect("non-empty").clone();
        report.trials += 1;
        let after = match apply_any(&host, mv, &b) {
            Ok(a) => a,
            Err(e) => {
                fail(&mut report, format!("{b}: {e}"));
                continue;
            }
        };
        let inputs = random_inputs(&mut rng, &host, dim);
        let assign = random_assignment(&mut rng);
        match (evaluate_any(&host, &inputs, &assign), evaluate_any(&after, &inputs, &assign)) {
            (Ok(x), Ok(y)) if x == y => {}
            (x, y) => fail(
                &mut report,
                format!(
                    "{b} inputs {} before {:?} after {:?}",
                    show_valuation(&inputs),
                    x.map(|v| show_valuation(&v)),
                    y.map(|v| show_valuation(&v))
                ),
            ),
        }
    }
    report
}

pub fn check_move_soundness(rule: &str, trials: usize, dim: usize, seed: u64) -> Option<SoundnessReport> {
    find_move(rule).map(|mv| check_soundness_of(&mv, trials, dim, seed))
}

/// Idempotency applied without the shared argument: `x ∘_ε y → y`, with
/// `x` discarded. Unsound, so the checker must reject it.
pub fn miswired_r1a() -> Move {
    use FEnd::{In, Out, Port};
    Move {
        name: "r1a_miswired",
        directionality: Directionality::ForwardOnly,
        body: RuleBody::Local {
            lhs: Fragment {
                nodes: vec![NodePat::Dil(Scale::Var(0))],
                edges: vec![(In(0), Port(0, 1)), (In(1), Port(0, 2)), (Port(0, 3), Out(0))],
            },
            rhs: Fragment {
                nodes: vec![NodePat::Term],
                edges: vec![(In(0), Port(0, 1)), (In(1), Out(0))],
            },
            vars: 1,
            side: None,
        },
    }
}

// ---------------------------------------------------------------------------
// finite differences

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FdError {
    #[error("the scale must be nonzero")]
    DivisionByZeroScale,
}

/// `T^x_ε f(u) = f(x) •_ε f(x ∘_ε u) = f(x) + (f(x + ε(u-x)) - f(x))/ε`.
pub fn finite_difference(
    f: &dyn Fn(&[BigRational]) -> Vector,
    x: &[BigRational],
    eps: &BigRational,
    u: &[BigRational],
) -> Result<Vector, FdError> {
    if eps.is_zero() {
        return Err(FdError::DivisionByZeroScale);
    }
    let fx = f(x);
    let moved = f(&dilate(eps, x, u));
    Ok(dilate_back(eps, &fx, &moved))
}

// ---------------------------------------------------------------------------
// computability

#[derive(Clone, Debug)]
pub enum Verdict {
    /// moves that reach a separated graph
    Yes(MoveScript),
    /// the bounded search closed out without success
    No { explored: usize },
    /// depth or state budget exhausted
    Unknown { explored: usize },
}

/// Dilations use only the listed symbols and never share an edge with a λ
/// or ∧ gate, so the graph splits into sector parts and λ-calculus parts.
fn separated(g: &PortGraph, symbols: &[&str]) -> bool {
    let lam = |n: NodeId| matches!(g.kind(n), Some(GateKind::Lambda | GateKind::App));
    let dil = |n: NodeId| matches!(g.kind(n), Some(GateKind::Dilation(_)));
    g.nodes().values().all(|k| match k {
        GateKind::Dilation(s) => s.within_symbols(symbols),
        _ => true,
    }) && g.edges().all(|(t, h)| match (t.node(), h.node()) {
        (Some(a), Some(b)) => !((dil(a) && lam(b)) || (lam(a) && dil(b))),
        _ => true,
    })
}

/// `x, u ↦ x ∘_ε g(x •_ε u)`, sharing `x` through a Υ.
pub fn conjugate(g: &MacroGraph, eps: &GroupElem) -> Result<PortGraph, crate::macros::MacroError> {
    let a = if g.input_roles().is_empty() { g.applicator()? } else { g.clone() };
    let ins = a.input_roles().into_iter().cloned().collect::<Vec<_>>();
    let outs = a.output_roles().into_iter().cloned().collect::<Vec<_>>();
    let ([input], [output]) = (ins.as_slice(), outs.as_slice()) else {
        return Err(crate::macros::MacroError::RoleMismatch("need one input and one output".into()));
    };
    let mut w = Wiring::new();
    let x = w.input("x");
    let u = w.input("u");
    let (x1, x2) = w.fan(x);
    let inner = w.dil(&eps.inv(), x1, u);
    let (mut host, _, lmap) = w.g.disjoint_union(&a.graph);
    let i = lmap[&a.roles[input]];
    host.join_from(inner, i)?;
    let o = lmap[&a.roles[output]];
    let src = host.tail_of(Endpoint::Leaf(o)).expect("covered");
    host.disconnect_tail(src);
    let d = host.add_gate(GateKind::Dilation(eps.clone()));
    host.connect(x2, Endpoint::Port(d, 1))?;
    host.connect(src, Endpoint::Port(d, 2))?;
    host.connect(Endpoint::Port(d, 3), Endpoint::Leaf(o))?;
    Ok(host)
}

/// Bounded search for moves taking the conjugate of `g` by a rational
/// dilation to a separated graph.
pub fn is_computable_instance(g: &MacroGraph, symbols: &[&str], depth: usize) -> Result<Verdict, crate::macros::MacroError> {
    if g.graph.node_count() == 0 {
        return Ok(Verdict::Yes(Vec::new()));
    }
    let start = conjugate(g, &GroupElem::ratio(1, 2))?;
    let moves: Vec<(Move, Direction)> = [
        ("r2", Direction::Fwd),
        ("ext2", Direction::Fwd),
        ("r1a", Direction::Fwd),
        ("co_assoc", Direction::Fwd),
        ("co_assoc", Direction::Rev),
        ("co_comm", Direction::Fwd),
        ("prune_fanout_2", Direction::Fwd),
        ("prune_fanout_3", Direction::Fwd),
        ("prune_dil", Direction::Fwd),
        ("global_prune", Direction::Fwd),
    ]
    .iter()
    .map(|(n, d)| (find_move(n).expect("catalogue"), *d))
    .collect();
    const MAX_STATES: usize = 5000;
    let mut seen = BTreeSet::from([canonical_form(&start)?]);
    let mut frontier = vec![(start, Vec::<Step>::new())];
    let mut explored = 0;
    for level in 0..=depth {
        let mut next = Vec::new();
        for (h, path) in frontier {
            explored += 1;
            if separated(&h, symbols) {
                return Ok(Verdict::Yes(path));
            }
            if level == depth {
                continue;
            }
            for (mv, dir) in &moves {
                for b in enumerate_with(&h, mv, *dir, &EnumOptions::default())? {
                    let nh = crate::engine::apply_move(&h, &b)?;
                    if seen.insert(canonical_form(&nh)?) {
                        let mut p = path.clone();
                        p.push(Step::exact(&b));
                        next.push((nh, p));
                    }
                }
            }
            if seen.len() > MAX_STATES {
                return Ok(Verdict::Unknown { explored });
            }
        }
        if next.is_empty() {
            return Ok(Verdict::No { explored });
        }
        frontier = next;
    }
    Ok(Verdict::Unknown { explored })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::isomorphic;
    use crate::macros::combinator;
    use crate::script::run_script;

    fn v(xs: &[i64]) -> Vector {
        xs.iter().map(|x| rat(*x, 1)).collect()
    }

    fn one_dil(s: GroupElem) -> (PortGraph, LeafId, LeafId, LeafId) {
        let mut g = PortGraph::new();
        let (x, y, o) = (g.add_in(), g.add_in(), g.add_out());
        let d = g.add_gate(GateKind::Dilation(s));
        g.connect(Endpoint::Leaf(x), Endpoint::Port(d, 1)).unwrap();
        g.connect(Endpoint::Leaf(y), Endpoint::Port(d, 2)).unwrap();
        g.connect(Endpoint::Port(d, 3), Endpoint::Leaf(o)).unwrap();
        (g, x, y, o)
    }

    #[test]
    fn dilation_at_origin_scales() {
        let (g, x, y, o) = one_dil(GroupElem::ratio(1, 3));
        let inputs = Valuation::from([(x, v(&[0, 0])), (y, v(&[3, 6]))]);
        let out = evaluate(&g, &inputs, &Assignment::new()).unwrap();
        assert_eq!(out[&o], v(&[1, 2]));
    }

    #[test]
    fn identity_dilation_returns_second_argument() {
        let (g, x, y, o) = one_dil(GroupElem::identity());
        let inputs = Valuation::from([(x, v(&[5])), (y, v(&[-2]))]);
        assert_eq!(evaluate(&g, &inputs, &Assignment::new()).unwrap()[&o], v(&[-2]));
    }

    #[test]
    fn nested_dilations_multiply() {
        // x ∘_ε (x ∘_μ y) = x ∘_{εμ} y
        let (e, m) = (rat(2, 3), rat(5, 7));
        let (x, y) = (v(&[1, -4]), v(&[3, 2]));
        let lhs = dilate(&e, &x, &dilate(&m, &x, &y));
        assert_eq!(lhs, dilate(&(&e * &m), &x, &y));
    }

    #[test]
    fn quasigroup_laws_hold_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let eps = rat(rng.gen_range(1..=20), rng.gen_range(1..=9));
            let x: Vector = (0..2).map(|_| random_rational(&mut rng)).collect();
            let y: Vector = (0..2).map(|_| random_rational(&mut rng)).collect();
            assert_eq!(dilate(&eps, &x, &x), x);
            let z = dilate_back(&eps, &x, &y);
            assert_eq!(dilate(&eps, &x, &z), y);
            assert_eq!(dilate_back(&eps, &x, &dilate(&eps, &x, &y)), y);
            assert_eq!(dilate(&BigRational::one(), &x, &y), y);
        }
    }

    #[test]
    fn missing_inputs_and_symbols_are_reported() {
        let (g, x, _, _) = one_dil(GroupElem::symbol("a"));
        let partial = Valuation::from([(x, v(&[1]))]);
        assert!(matches!(evaluate(&g, &partial, &Assignment::new()), Err(EvalError::MissingInput(_))));
        let full: Valuation = g.in_leaves().into_iter().map(|l| (l, v(&[1]))).collect();
        assert_eq!(evaluate(&g, &full, &Assignment::new()), Err(EvalError::SymbolUnassigned("a".into())));
    }

    #[test]
    fn cyclic_kink_needs_the_solver() {
        let g = crate::format::parse_glc(
            "node n0 dil 1/3\nnode n1 fanout\nedge n0.3 -> n1.1\nedge n1.2 -> n0.1\n\
             in i -> n0.2\nout n1.3 -> o\n",
        )
        .unwrap();
        let i = g.in_leaves()[0];
        let inputs = Valuation::from([(i, v(&[4, -1]))]);
        assert_eq!(evaluate(&g, &inputs, &Assignment::new()), Err(EvalError::CyclicGraph));
        let out = solve(&g, &inputs, &Assignment::new()).unwrap();
        assert_eq!(out[&g.out_leaves()[0]], v(&[4, -1]));
    }

    #[test]
    fn solver_agrees_with_propagation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mv = find_move("r2").unwrap();
        for _ in 0..30 {
            let (g, _) = random_host(&mut rng, &mv, Direction::Fwd);
            let inputs = random_inputs(&mut rng, &g, 2);
            let assign = random_assignment(&mut rng);
            assert_eq!(evaluate(&g, &inputs, &assign).unwrap(), solve(&g, &inputs, &assign).unwrap());
        }
    }

    fn eval_macro(m: &EmerMacro, vals: &[(&str, Vector)], assign: &Assignment) -> Vector {
        let inputs: Valuation = vals.iter().map(|(r, x)| (m.mac.roles[*r], x.clone())).collect();
        evaluate(&m.mac.graph, &inputs, assign).unwrap()[&m.mac.roles["out"]].clone()
    }

    #[test]
    fn sigma_oracle() {
        // (1-ε)(u-x) + v, expanded by hand from the three dilations
        let eps = rat(2, 5);
        let m = build_emer_macro(MacroKind::Sigma, &GroupElem::rational(eps.clone()).unwrap());
        let (x, u, w) = (v(&[1, 2]), v(&[-3, 5]), v(&[7, 0]));
        let got = eval_macro(&m, &[("x", x.clone()), ("u", u.clone()), ("v", w.clone())], &Assignment::new());
        let want: Vector = (0..2).map(|k| (BigRational::one() - &eps) * (&u[k] - &x[k]) + &w[k]).collect();
        assert_eq!(got, want);
        let at_origin = eval_macro(&m, &[("x", v(&[0, 0])), ("u", u.clone()), ("v", w.clone())], &Assignment::new());
        let want0: Vector = (0..2).map(|k| (BigRational::one() - &eps) * &u[k] + &w[k]).collect();
        assert_eq!(at_origin, want0);
    }

    #[test]
    fn sigma_at_identity_is_v() {
        let m = build_emer_macro(MacroKind::Sigma, &GroupElem::identity());
        let got = eval_macro(&m, &[("x", v(&[3])), ("u", v(&[8])), ("v", v(&[-1]))], &Assignment::new());
        assert_eq!(got, v(&[-1]));
    }

    #[test]
    fn delta_and_inv_oracles() {
        let eps = rat(3, 4);
        let e = GroupElem::rational(eps.clone()).unwrap();
        let (x, u, w) = (v(&[2]), v(&[6]), v(&[-2]));
        let d = build_emer_macro(MacroKind::Delta, &e);
        let got = eval_macro(&d, &[("x", x.clone()), ("u", u.clone()), ("v", w.clone())], &Assignment::new());
        assert_eq!(got, dilate_back(&eps, &dilate(&eps, &x, &u), &dilate(&eps, &x, &w)));
        let i = build_emer_macro(MacroKind::Inv, &e);
        let got = eval_macro(&i, &[("x", x.clone()), ("u", u.clone())], &Assignment::new());
        assert_eq!(got, dilate_back(&eps, &dilate(&eps, &x, &u), &x));
    }

    #[test]
    fn macro_gate_counts() {
        let a = GroupElem::symbol("a");
        for (k, dils) in [(MacroKind::Sigma, 3), (MacroKind::Delta, 3), (MacroKind::Inv, 2)] {
            let m = build_emer_macro(k, &a);
            assert_eq!(m.mac.graph.count_kind(|g| matches!(g, GateKind::Dilation(_))), dils);
            assert_eq!(m.mac.graph.count_kind(|g| *g == GateKind::FanOut), 1);
            assert!(in_emer_sector(&m.mac.graph, &["a"]).unwrap());
            assert!(!in_emer_sector(&m.mac.graph, &[]).unwrap());
        }
        assert!(!in_emer_sector(&combinator("I").unwrap().graph, &["a"]).unwrap());
    }

    #[test]
    fn delta_with_shared_argument_becomes_inverse() {
        let a = GroupElem::symbol("a");
        let g = delta_shared(&a);
        let script = delta_to_inv_script(&g.graph).unwrap();
        let (end, _) = run_script(&g.graph, &script).unwrap();
        assert!(isomorphic(&end, &build_emer_macro(MacroKind::Inv, &a).mac.graph).unwrap());
    }

    #[test]
    fn sector_moves_are_sound() {
        for rule in SECTOR_MOVES {
            let r = check_move_soundness(rule, 40, 2, 3).unwrap();
            assert!(r.passed(), "{r}");
        }
    }

    #[test]
    fn miswired_rule_is_caught() {
        let r = check_soundness_of(&miswired_r1a(), 40, 2, 3);
        assert!(r.failures > 0, "{r}");
    }

    #[test]
    fn finite_differences() {
        let m = [[rat(2, 1), rat(-1, 3)], [rat(0, 1), rat(5, 2)]];
        let lin = |w: &[BigRational]| -> Vector { (0..2).map(|i| &m[i][0] * &w[0] + &m[i][1] * &w[1]).collect() };
        let (x, u) = (v(&[3, -1]), v(&[1, 4]));
        for eps in [rat(1, 2), rat(7, 3)] {
            assert_eq!(finite_difference(&lin, &x, &eps, &u).unwrap(), lin(&u));
        }
        let c = |_: &[BigRational]| v(&[9]);
        assert_eq!(finite_difference(&c, &v(&[1]), &rat(1, 5), &v(&[2])).unwrap(), v(&[9]));
        let sq = |w: &[BigRational]| -> Vector { vec![&w[0] * &w[0]] };
        assert_eq!(finite_difference(&sq, &v(&[0]), &rat(1, 2), &v(&[1])).unwrap(), vec![rat(1, 2)]);
        assert_eq!(finite_difference(&sq, &v(&[0]), &rat(0, 1), &v(&[1])), Err(FdError::DivisionByZeroScale));
    }

    #[test]
    fn computability_search() {
        assert!(matches!(is_computable_instance(&MacroGraph::wire(), &[], 2).unwrap(), Verdict::Yes(s) if s.is_empty()));
        let a = GroupElem::symbol("a");
        let (g, x, y, o) = one_dil(a);
        // feed both ports from one input: x ↦ x ∘_a x
        let mut gg = g;
        let i = gg.add_in();
        let fan = gg.add_gate(GateKind::FanOut);
        gg.connect(Endpoint::Leaf(i), Endpoint::Port(fan, 1)).unwrap();
        gg.join_from(Endpoint::Port(fan, 2), x).unwrap();
        gg.join_from(Endpoint::Port(fan, 3), y).unwrap();
        let dil = MacroGraph::new(gg, BTreeMap::from([("in".to_string(), i), ("out".to_string(), o)])).unwrap();
        assert!(matches!(is_computable_instance(&dil, &["a"], 3).unwrap(), Verdict::Yes(_)));
    }
}
