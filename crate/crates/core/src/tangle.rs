//! Oriented tangle diagrams, their translation into port graphs, and the
//! oriented Reidemeister moves.
//!
//! A crossing lists its four ends counter-clockwise starting at the incoming
//! under-strand, so the under-strand runs `ends[0] → ends[2]`. At a positive
//! crossing the over-strand runs `ends[3] → ends[1]`, at a negative one
//! `ends[1] → ends[3]`. Arcs join an outgoing end (a crossing output or an
//! open `in` end) to an incoming end. Diagrams are only locally planar.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::canon::{canonical_form, isomorphic};
use crate::engine::{enumerate_redexes, EngineError};
use crate::graph::{Dir, Endpoint, GateKind, GraphError, NodeId, PortGraph};
use crate::group::GroupElem;
use crate::rules::Direction;
use crate::script::{run_script, search, MoveScript, ScriptError, SearchOptions, Step};

pub type EndId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Pos,
    Neg,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Crossing {
    pub sign: Sign,
    pub ends: [EndId; 4],
}

impl Crossing {
    pub fn under_in(&self) -> EndId {
        self.ends[0]
    }

    pub fn under_out(&self) -> EndId {
        self.ends[2]
    }

    pub fn over_in(&self) -> EndId {
        match self.sign {
            Sign::Pos => self.ends[3],
            Sign::Neg => self.ends[1],
        }
    }

    pub fn over_out(&self) -> EndId {
        match self.sign {
            Sign::Pos => self.ends[1],
            Sign::Neg => self.ends[3],
        }
    }

    fn from_roles(sign: Sign, ui: EndId, oi: EndId, uo: EndId, oo: EndId) -> Crossing {
        let ends = match sign {
            Sign::Pos => [ui, oo, uo, oi],
            Sign::Neg => [ui, oi, uo, oo],
        };
        Crossing { sign, ends }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TangleError {
    #[error("unknown move {0}")]
    UnknownName(String),
    #[error("invalid diagram: {0}")]
    InvalidDiagram(String),
    #[error("no crossing {0}")]
    UnknownCrossing(u32),
    #[error("no free loop to remove")]
    NoLoop,
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("no witness within depth {0}")]
    NotFoundWithinDepth(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Script(#[from] ScriptError),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TangleDiagram {
    pub crossings: BTreeMap<u32, Crossing>,
    /// outgoing end → incoming end
    pub arcs: BTreeMap<EndId, EndId>,
    /// boundary ends in order; `In` means a strand enters the diagram there
    pub open: Vec<(EndId, Dir)>,
    pub loops: usize,
}

/// Pairing of the open `in` ends with the open `out` ends they reach once
/// every crossing is spliced. Loops are discarded.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ReducedForm {
    pub matching: BTreeMap<EndId, EndId>,
}

impl fmt::Display for ReducedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.matching.iter().map(|(a, b)| format!("{a}->{b}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

impl TangleDiagram {
    fn tails(&self) -> Vec<EndId> {
        let mut v: Vec<EndId> = self.open.iter().filter(|(_, d)| *d == Dir::In).map(|(e, _)| *e).collect();
        for c in self.crossings.values() {
            v.extend([c.under_out(), c.over_out()]);
        }
        v
    }

    fn heads(&self) -> Vec<EndId> {
        let mut v: Vec<EndId> = self.open.iter().filter(|(_, d)| *d == Dir::Out).map(|(e, _)| *e).collect();
        for c in self.crossings.values() {
            v.extend([c.under_in(), c.over_in()]);
        }
        v
    }

    pub fn validate(&self) -> Result<(), TangleError> {
        let bad = |m: String| Err(TangleError::InvalidDiagram(m));
        let (tails, heads) = (self.tails(), self.heads());
        let mut all = BTreeSet::new();
        for e in tails.iter().chain(&heads) {
            if !all.insert(*e) {
                return bad(format!("end {e} used twice"));
            }
        }
        let tails: BTreeSet<EndId> = tails.into_iter().collect();
        let heads: BTreeSet<EndId> = heads.into_iter().collect();
        let keys: BTreeSet<EndId> = self.arcs.keys().copied().collect();
        let vals: Vec<EndId> = self.arcs.values().copied().collect();
        let val_set: BTreeSet<EndId> = vals.iter().copied().collect();
        if keys != tails {
            return bad("every outgoing end needs exactly one arc".into());
        }
        if vals.len() != val_set.len() || val_set != heads {
            return bad("every incoming end needs exactly one arc".into());
        }
        Ok(())
    }

    pub fn crossing_count(&self) -> usize {
        self.crossings.len()
    }

    fn fresh_end(&self) -> EndId {
        let top = self.arcs.iter().flat_map(|(a, b)| [*a, *b]).max().unwrap_or(0);
        let top_open = self.open.iter().map(|(e, _)| *e).max().unwrap_or(0);
        top.max(top_open) + 1
    }

    fn fresh_crossing(&self) -> u32 {
        self.crossings.keys().next_back().map_or(0, |c| c + 1)
    }
}

// ---------------------------------------------------------------------------
// text format

pub fn parse_tangle(text: &str) -> Result<TangleDiagram, TangleError> {
    let mut t = TangleDiagram::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |msg: &str| TangleError::Syntax { line, msg: msg.to_string() };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        let num = |s: &str| s.parse::<u32>().map_err(|_| err(&format!("expected a number, got `{s}`")));
        match toks.as_slice() {
            ["x", id, sign, a, b, c, d] => {
                let sign = match *sign {
                    "+" => Sign::Pos,
                    "-" => Sign::Neg,
                    _ => return Err(err("crossing sign must be + or -")),
                };
                let ends = [num(a)?, num(b)?, num(c)?, num(d)?];
                if t.crossings.insert(num(id)?, Crossing { sign, ends }).is_some() {
                    return Err(err("duplicate crossing id"));
                }
            }
            ["arc", a, b] => {
                if t.arcs.insert(num(a)?, num(b)?).is_some() {
                    return Err(err("end already has an arc"));
                }
            }
            ["open", e, d] => {
                let dir = match *d {
                    "in" => Dir::In,
                    "out" => Dir::Out,
                    _ => return Err(err("open end must be in or out")),
                };
                t.open.push((num(e)?, dir));
            }
            ["loops", k] => t.loops = num(k)? as usize,
            _ => return Err(err("expected x, arc, open or loops")),
        }
    }
    t.validate()?;
    Ok(t)
}

pub fn emit_tangle(t: &TangleDiagram) -> String {
    let mut s = String::new();
    for (id, c) in &t.crossings {
        let sign = if c.sign == Sign::Pos { '+' } else { '-' };
        let [a, b, cc, d] = c.ends;
        s.push_str(&format!("x {id} {sign} {a} {b} {cc} {d}\n"));
    }
    for (e, d) in &t.open {
        s.push_str(&format!("open {e} {}\n", if *d == Dir::In { "in" } else { "out" }));
    }
    for (a, b) in &t.arcs {
        s.push_str(&format!("arc {a} {b}\n"));
    }
    if t.loops > 0 {
        s.push_str(&format!("loops {}\n", t.loops));
    }
    s
}

// ---------------------------------------------------------------------------
// splice, loops and the reduced form

/// Replaces crossing `c` by its oriented smoothing: each incoming end is
/// joined to the outgoing end of the other strand. Closed circuits made of
/// the crossing's own ends become free loops.
pub fn splice(t: &TangleDiagram, c: u32) -> Result<TangleDiagram, TangleError> {
    let mut out = t.clone();
    let cr = out.crossings.remove(&c).ok_or(TangleError::UnknownCrossing(c))?;
    let cont = BTreeMap::from([(cr.under_in(), cr.over_out()), (cr.over_in(), cr.under_out())]);
    let own_tails = [cr.under_out(), cr.over_out()];
    let mut reached = BTreeSet::new();
    let mut arcs = BTreeMap::new();
    for (&s, &h) in &t.arcs {
        if own_tails.contains(&s) {
            continue;
        }
        let mut head = h;
        while let Some(&tail) = cont.get(&head) {
            reached.insert(tail);
            head = t.arcs[&tail];
        }
        arcs.insert(s, head);
    }
    let mut seen = reached;
    for start in own_tails {
        if seen.contains(&start) {
            continue;
        }
        out.loops += 1;
        let mut tail = start;
        while seen.insert(tail) {
            tail = cont[&t.arcs[&tail]];
        }
    }
    out.arcs = arcs;
    Ok(out)
}

/// Inverse of [`splice`]: cuts the arcs leaving `a` and `b` and routes them
/// through a new crossing of the given sign whose smoothing restores them.
/// With `a == b` the new crossing is a kink on that arc.
pub fn unsplice(t: &TangleDiagram, a: EndId, b: EndId, sign: Sign) -> Result<(TangleDiagram, u32), TangleError> {
    let ha = *t.arcs.get(&a).ok_or_else(|| TangleError::InvalidDiagram(format!("no arc from {a}")))?;
    let hb = *t.arcs.get(&b).ok_or_else(|| TangleError::InvalidDiagram(format!("no arc from {b}")))?;
    let mut out = t.clone();
    let id = t.fresh_crossing();
    let base = t.fresh_end();
    let (ui, oi, uo, oo) = (base, base + 1, base + 2, base + 3);
    out.crossings.insert(id, Crossing::from_roles(sign, ui, oi, uo, oo));
    out.arcs.insert(a, ui);
    out.arcs.insert(oo, ha);
    if a == b {
        // the second smoothing arc closes into a loop
        out.arcs.insert(uo, oi);
        out.loops = out.loops.saturating_sub(1);
    } else {
        out.arcs.insert(b, oi);
        out.arcs.insert(uo, hb);
    }
    Ok((out, id))
}

pub fn loop_move(t: &TangleDiagram, add: bool) -> Result<TangleDiagram, TangleError> {
    let mut out = t.clone();
    if add {
        out.loops += 1;
    } else if out.loops == 0 {
        return Err(TangleError::NoLoop);
    } else {
        out.loops -= 1;
    }
    Ok(out)
}

pub fn reduced(t: &TangleDiagram) -> Result<ReducedForm, TangleError> {
    t.validate()?;
    let mut cur = t.clone();
    let ids: Vec<u32> = cur.crossings.keys().copied().collect();
    for c in ids {
        cur = splice(&cur, c)?;
    }
    Ok(ReducedForm { matching: cur.arcs })
}

// ---------------------------------------------------------------------------
// translation

/// How an emergent crossing macro is wired: the Υ on the over-strand
/// continues the strand on port `over_branch` and feeds its other branch
/// into port `base_port` of the dilation on the under-strand.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EmerWiring {
    pub over_branch: u8,
    pub base_port: u8,
}

/// A wiring for which every type-1 and type-2 witness exists. Its mirror
/// `over_branch: 2` works too, at the cost of an extra `co_comm` per move.
pub const EMER_WIRING: EmerWiring = EmerWiring { over_branch: 3, base_port: 1 };

pub const ALL_EMER_WIRINGS: [EmerWiring; 4] = [
    EmerWiring { over_branch: 2, base_port: 1 },
    EmerWiring { over_branch: 2, base_port: 2 },
    EmerWiring { over_branch: 3, base_port: 1 },
    EmerWiring { over_branch: 3, base_port: 2 },
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CrossingStyle {
    /// Υ on the over-strand feeding a dilation by ε (positive) or ε⁻¹
    /// (negative) on the under-strand.
    Emergent(GroupElem),
    /// A λ and an ∧ gate joined as in the beta pattern; a splice is a beta move.
    Lambda,
}

/// The two gates standing for each crossing.
pub type CrossingGates = BTreeMap<u32, (NodeId, NodeId)>;

/// Graph of a diagram plus the gates of each crossing.
pub fn translate_with_map(
    t: &TangleDiagram,
    style: &CrossingStyle,
    wiring: EmerWiring,
) -> Result<(PortGraph, CrossingGates), TangleError> {
    t.validate()?;
    let mut g = PortGraph::new();
    let mut at: BTreeMap<EndId, Endpoint> = BTreeMap::new();
    for (e, d) in &t.open {
        let l = g.add_leaf(*d, Some(format!("e{e}")));
        at.insert(*e, Endpoint::Leaf(l));
    }
    let mut map = BTreeMap::new();
    for (id, c) in &t.crossings {
        let (ui, oi, uo, oo) = (c.under_in(), c.over_in(), c.under_out(), c.over_out());
        match style {
            CrossingStyle::Lambda => {
                let l = g.add_gate(GateKind::Lambda);
                let a = g.add_gate(GateKind::App);
                g.connect(Endpoint::Port(l, 3), Endpoint::Port(a, 1))?;
                // positive: over on the λ, under through the ∧; negative swaps
                let (lin, lout, ain, aout) = match c.sign {
                    Sign::Pos => (oi, oo, ui, uo),
                    Sign::Neg => (ui, uo, oi, oo),
                };
                at.insert(lin, Endpoint::Port(l, 1));
                at.insert(lout, Endpoint::Port(l, 2));
                at.insert(ain, Endpoint::Port(a, 2));
                at.insert(aout, Endpoint::Port(a, 3));
                map.insert(*id, (l, a));
            }
            CrossingStyle::Emergent(eps) => {
                let s = if c.sign == Sign::Pos { eps.clone() } else { eps.inv() };
                let u = g.add_gate(GateKind::FanOut);
                let d = g.add_gate(GateKind::Dilation(s));
                let other = 5 - wiring.over_branch;
                let strand_port = 3 - wiring.base_port;
                g.connect(Endpoint::Port(u, other), Endpoint::Port(d, wiring.base_port))?;
                at.insert(oi, Endpoint::Port(u, 1));
                at.insert(oo, Endpoint::Port(u, wiring.over_branch));
                at.insert(ui, Endpoint::Port(d, strand_port));
                at.insert(uo, Endpoint::Port(d, 3));
                map.insert(*id, (u, d));
            }
        }
    }
    for (a, b) in &t.arcs {
        g.connect(at[a], at[b])?;
    }
    g.set_loops(t.loops);
    Ok((g, map))
}

pub fn translate(t: &TangleDiagram, style: &CrossingStyle) -> Result<PortGraph, TangleError> {
    translate_with_map(t, style, EMER_WIRING).map(|(g, _)| g)
}

/// Graphs built only from λ–∧ pairs joined as in the beta pattern.
pub fn is_lambda_tangle(g: &PortGraph) -> bool {
    g.nodes().iter().all(|(n, k)| match k {
        GateKind::Lambda => matches!(
            g.head_of(Endpoint::Port(*n, 3)),
            Some(Endpoint::Port(a, 1)) if g.kind(a) == Some(&GateKind::App)
        ),
        GateKind::App => matches!(
            g.tail_of(Endpoint::Port(*n, 1)),
            Some(Endpoint::Port(l, 3)) if g.kind(l) == Some(&GateKind::Lambda)
        ),
        _ => false,
    })
}

// ---------------------------------------------------------------------------
// Reidemeister moves

/// One strand's passages through crossings: (crossing index, passes over).
type Walk = Vec<(usize, bool)>;

/// Builds a diagram from crossing signs and strand walks. Strand `k` enters
/// at end `900 + k` and leaves at `950 + k`. Crossing `c` owns ends
/// `10c + 1 ..= 10c + 4`.
fn assemble(signs: &[Sign], strands: &[Walk]) -> TangleDiagram {
    let mut t = TangleDiagram::default();
    let role = |c: usize, k: u32| 10 * c as u32 + k;
    for (c, s) in signs.iter().enumerate() {
        t.crossings
            .insert(c as u32, Crossing::from_roles(*s, role(c, 1), role(c, 2), role(c, 3), role(c, 4)));
    }
    for k in 0..strands.len() as u32 {
        t.open.push((900 + k, Dir::In));
    }
    for k in 0..strands.len() as u32 {
        t.open.push((950 + k, Dir::Out));
    }
    for (k, walk) in strands.iter().enumerate() {
        let mut prev = 900 + k as u32;
        for &(c, over) in walk {
            let (head, next) = if over { (role(c, 2), role(c, 4)) } else { (role(c, 1), role(c, 3)) };
            t.arcs.insert(prev, head);
            prev = next;
        }
        t.arcs.insert(prev, 950 + k as u32);
    }
    t
}

fn cross(o: (i64, i64), u: (i64, i64)) -> Sign {
    if o.0 * u.1 - o.1 * u.0 > 0 {
        Sign::Pos
    } else {
        Sign::Neg
    }
}

/// Three straight strands: L1 on y = 0, L2 on y = x, L3 on y = -x + c with
/// L1 over L2 over L3. The move slides L3 from c = 2 to c = -2 across the
/// crossing of L1 and L2. `orient[i]` reverses line i when false.
fn type3(orient: [bool; 3], c: i64) -> TangleDiagram {
    let dir = |i: usize, d: (i64, i64)| if orient[i] { d } else { (-d.0, -d.1) };
    let d = [dir(0, (1, 0)), dir(1, (1, 1)), dir(2, (1, -1))];
    // crossing 0: L1∩L2 at x=0, 1: L1∩L3 at x=c, 2: L2∩L3 at x=c/2
    let xs = [0, 2 * c, c];
    let pairs = [(0, 1), (0, 2), (1, 2)];
    let signs: Vec<Sign> = pairs.iter().map(|&(i, j)| cross(d[i], d[j])).collect();
    let mut strands = Vec::new();
    for line in 0..3 {
        let mut visits: Vec<(i64, usize, bool)> = pairs
            .iter()
            .enumerate()
            .filter(|(_, (i, j))| *i == line || *j == line)
            .map(|(k, (i, _))| {
                let along = if orient[line] { xs[k] } else { -xs[k] };
                (along, k, *i == line)
            })
            .collect();
        visits.sort();
        strands.push(visits.into_iter().map(|(_, k, over)| (k, over)).collect());
    }
    // crossing points are at doubled x so that c/2 stays integral
    assemble(&signs, &strands)
}

/// The triangle between the three lines is coherently oriented.
fn cyclic(orient: [bool; 3]) -> bool {
    orient == [true, false, false] || orient == [false, true, true]
}

pub const MOVE_NAMES: [&str; 16] = [
    "R1a", "R1b", "R1c", "R1d", "R2a", "R2b", "R2c", "R2d", "R3a", "R3b", "R3c", "R3d", "R3e", "R3f", "R3g", "R3h",
];

fn type3_orientations() -> Vec<[bool; 3]> {
    let all: Vec<[bool; 3]> = (0..8u8).map(|m| [m & 1 == 0, m & 2 == 0, m & 4 == 0]).collect();
    let mut out = vec![[true, false, false]];
    out.extend(all.into_iter().filter(|o| !cyclic(*o)));
    out.push([false, true, true]);
    out
}

/// Both sides of an oriented Reidemeister move, with equal boundaries.
///
/// R1a..R1d: a kink with crossing sign +, +, −, − entered first as the
/// over-strand (a, c) or the under-strand (b, d). R2a, R2b: parallel
/// strands, left or right strand over. R2c, R2d: antiparallel strands,
/// upward or downward strand over. R3a and R3h: the two orientations whose
/// middle triangle is cyclic; R3b..R3g: the other six.
pub fn reidemeister(name: &str) -> Result<(TangleDiagram, TangleDiagram), TangleError> {
    use Sign::{Neg, Pos};
    let one = || assemble(&[], &[vec![]]);
    let two = || assemble(&[], &[vec![], vec![]]);
    let kink = |s: Sign, over_first: bool| assemble(&[s], &[vec![(0, over_first), (0, !over_first)]]);
    let parallel = |signs: [Sign; 2], left_over: bool| {
        assemble(&signs, &[vec![(0, left_over), (1, left_over)], vec![(0, !left_over), (1, !left_over)]])
    };
    let anti = |signs: [Sign; 2], up_over: bool| {
        assemble(&signs, &[vec![(0, up_over), (1, up_over)], vec![(1, !up_over), (0, !up_over)]])
    };
    Ok(match name {
        "R1a" => (kink(Pos, true), one()),
        "R1b" => (kink(Pos, false), one()),
        "R1c" => (kink(Neg, true), one()),
        "R1d" => (kink(Neg, false), one()),
        "R2a" => (parallel([Pos, Neg], true), two()),
        "R2b" => (parallel([Neg, Pos], false), two()),
        "R2c" => (anti([Neg, Pos], true), two()),
        "R2d" => (anti([Pos, Neg], false), two()),
        n if n.len() == 3 && n.starts_with("R3") => {
            let k = (n.as_bytes()[2] as char)
                .to_digit(36)
                .and_then(|v| v.checked_sub(10))
                .filter(|v| *v < 8)
                .ok_or_else(|| TangleError::UnknownName(n.to_string()))?;
            let o = type3_orientations()[k as usize];
            (type3(o, 2), type3(o, -2))
        }
        _ => return Err(TangleError::UnknownName(name.to_string())),
    })
}

// ---------------------------------------------------------------------------
// realizability

#[derive(Clone, Debug)]
pub enum Verdict {
    /// a replayable script of beta and loop moves between the translations
    Realizable(MoveScript),
    /// the reduced forms of the two sides differ
    Obstructed { lhs: ReducedForm, rhs: ReducedForm },
    Unknown,
}

#[derive(Clone, Debug)]
pub struct Classification {
    pub name: &'static str,
    pub verdict: Verdict,
}

fn forward_betas(g: &PortGraph) -> Result<(Vec<PortGraph>, MoveScript), TangleError> {
    let mut states = vec![g.clone()];
    let mut steps = Vec::new();
    loop {
        let cur = states.last().expect("non-empty");
        let Some(b) = enumerate_redexes(cur, "beta", Direction::Fwd)?.into_iter().next() else {
            break;
        };
        let next = crate::engine::apply_move(cur, &b)?;
        steps.push(Step::exact(&b));
        states.push(next);
    }
    Ok((states, steps))
}

/// Splices both sides by forward betas, balances loops, then walks the
/// right-hand betas backwards. `None` when the fully spliced sides differ.
pub fn realize_lambda(lhs: &TangleDiagram, rhs: &TangleDiagram) -> Result<Option<MoveScript>, TangleError> {
    let gl = translate(lhs, &CrossingStyle::Lambda)?;
    let gr = translate(rhs, &CrossingStyle::Lambda)?;
    let (ls, mut script) = forward_betas(&gl)?;
    let (rs, _) = forward_betas(&gr)?;
    let mut cur = ls.last().expect("non-empty").clone();
    let target = rs.last().expect("non-empty");
    while cur.loops() != target.loops() {
        let rule = if cur.loops() > target.loops() { "loop_remove" } else { "loop_add" };
        let b = enumerate_redexes(&cur, rule, Direction::Fwd)?.remove(0);
        cur = crate::engine::apply_move(&cur, &b)?;
        script.push(Step::exact(&b));
    }
    if canonical_form(&cur)? != canonical_form(target)? {
        return Ok(None);
    }
    for prev in rs.iter().rev().skip(1) {
        let want = canonical_form(prev)?;
        let mut found = None;
        for b in enumerate_redexes(&cur, "beta", Direction::Rev)? {
            let h = crate::engine::apply_move(&cur, &b)?;
            if canonical_form(&h)? == want {
                found = Some((b, h));
                break;
            }
        }
        let Some((b, h)) = found else { return Ok(None) };
        script.push(Step::exact(&b));
        cur = h;
    }
    let (end, _) = run_script(&gl, &script)?;
    Ok(isomorphic(&end, &gr)?.then_some(script))
}

/// Classifies every move in the lambda style. Scripts longer than `depth`
/// are reported as unknown.
pub fn classify_moves(depth: usize) -> Result<Vec<Classification>, TangleError> {
    let mut out = Vec::new();
    for name in MOVE_NAMES {
        let (l, r) = reidemeister(name)?;
        let (rl, rr) = (reduced(&l)?, reduced(&r)?);
        let verdict = if rl != rr {
            Verdict::Obstructed { lhs: rl, rhs: rr }
        } else {
            match realize_lambda(&l, &r)? {
                Some(s) if s.len() <= depth => Verdict::Realizable(s),
                _ => Verdict::Unknown,
            }
        };
        out.push(Classification { name, verdict });
    }
    Ok(out)
}

/// Moves allowed in emergent-style witnesses.
pub const EMERGENT_FAMILY: [&str; 11] = [
    "r1a",
    "r1b",
    "r2",
    "ext2",
    "co_assoc",
    "co_comm",
    "global_fan_out",
    "prune_fanout_2",
    "prune_fanout_3",
    "prune_dil",
    "global_prune",
];

/// A script between the emergent translations of both sides of a type-1 or
/// type-2 move, found by breadth-first search.
pub fn check_emergent_type12(name: &str, eps: &GroupElem, wiring: EmerWiring, depth: usize) -> Result<MoveScript, TangleError> {
    if !name.starts_with("R1") && !name.starts_with("R2") {
        return Err(TangleError::UnknownName(name.to_string()));
    }
    let (l, r) = reidemeister(name)?;
    let style = CrossingStyle::Emergent(eps.clone());
    let gl = translate_with_map(&l, &style, wiring)?.0;
    let gr = translate_with_map(&r, &style, wiring)?.0;
    let moves: Vec<(&str, Direction)> = vec![
        ("r1a", Direction::Fwd),
        ("r1b", Direction::Fwd),
        ("r2", Direction::Fwd),
        ("ext2", Direction::Fwd),
        ("co_assoc", Direction::Fwd),
        ("co_assoc", Direction::Rev),
        ("co_comm", Direction::Fwd),
        ("prune_fanout_2", Direction::Fwd),
        ("prune_fanout_3", Direction::Fwd),
        ("prune_dil", Direction::Fwd),
        ("global_prune", Direction::Fwd),
    ];
    let found = search(&gl, &gr, &moves, depth, &SearchOptions::default())
        .ok_or(TangleError::NotFoundWithinDepth(depth))?;
    let script: MoveScript = found.iter().map(Step::exact).collect();
    let (end, _) = run_script(&gl, &script)?;
    if !isomorphic(&end, &gr)? {
        return Err(TangleError::NotFoundWithinDepth(depth));
    }
    Ok(script)
}

// ---------------------------------------------------------------------------
// random diagrams

/// A random diagram with up to `max_crossings` crossings: random signs, a
/// random pairing of outgoing with incoming ends and a few loops.
pub fn random_diagram<R: Rng>(rng: &mut R, max_crossings: usize) -> TangleDiagram {
    let mut t = TangleDiagram::default();
    let n = rng.gen_range(0..=max_crossings);
    let opens = rng.gen_range(if n == 0 { 1 } else { 0 }..=3u32);
    for c in 0..n as u32 {
        let sign = if rng.gen_bool(0.5) { Sign::Pos } else { Sign::Neg };
        let b = 10 * c + 1;
        t.crossings.insert(c, Crossing::from_roles(sign, b, b + 1, b + 2, b + 3));
    }
    for k in 0..opens {
        t.open.push((900 + k, Dir::In));
    }
    for k in 0..opens {
        t.open.push((950 + k, Dir::Out));
    }
    let tails = t.tails();
    let mut heads = t.heads();
    heads.shuffle(rng);
    t.arcs = tails.into_iter().zip(heads).collect();
    t.loops = rng.gen_range(0..=2);
    t
}
