//! Move scripts, replayable traces, the reduction strategy and bounded search.
//!
//! Script syntax, one step per line:
//!
//! ```text
//! apply beta fwd at n3 n5
//! apply beta rev at n0.3 n0.3 v1
//! apply r1a rev at @2 s=1/2
//! ```
//!
//! Anchor tokens: `nK` node, `nK.P` edge by its tail port, `@K` edge leaving
//! IN leaf `K`, `loopK` a free loop, `vK` chaining variant, `s=<scale>` scale
//! parameters in order. A step must select exactly one binding.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt::Write;

use thiserror::Error;

use crate::canon::canonical_form;
use crate::engine::{apply_move, apply_unchecked, enumerate_with, lookup, Binding, EdgeRef, EngineError, EnumOptions};
use crate::format::emit_glc;
use crate::graph::{Endpoint, LeafId, NodeId, PortGraph};
use crate::group::GroupElem;
use crate::rules::{Direction, LOCAL_PRUNING};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScriptError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("step {step}: no binding matches the anchor")]
    NoMatch { step: usize },
    #[error("step {step}: anchor selects {count} bindings")]
    AmbiguousAnchor { step: usize, count: usize },
    #[error("step {step}: {source}")]
    Engine { step: usize, source: EngineError },
    #[error("replay diverged at step {step}")]
    ReplayMismatch { step: usize },
    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Anchor {
    pub nodes: Vec<NodeId>,
    pub edges: Vec<EdgeRef>,
    pub variant: Option<u8>,
    pub params: Vec<GroupElem>,
}

impl Anchor {
    pub fn nodes(nodes: &[NodeId]) -> Self {
        Anchor {
            nodes: nodes.to_vec(),
            ..Default::default()
        }
    }

    fn selects(&self, b: &Binding) -> bool {
        let contains_all = |want: &[NodeId], have: &[NodeId]| want.iter().all(|w| have.contains(w));
        let edges_ok = {
            let mut have = b.wires.clone();
            self.edges.iter().all(|e| match have.iter().position(|h| h == e) {
                Some(i) => {
                    have.remove(i);
                    true
                }
                None => false,
            })
        };
        contains_all(&self.nodes, &b.nodes)
            && edges_ok
            && self.variant.is_none_or(|v| v == b.variant)
            && (self.params.is_empty() || self.params == b.params)
    }

    /// The anchor that pins a binding completely.
    pub fn exact(b: &Binding) -> Self {
        Anchor {
            nodes: b.nodes.clone(),
            edges: b.wires.clone(),
            variant: Some(b.variant),
            params: b.params.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub rule: String,
    pub dir: Direction,
    pub anchor: Anchor,
}

impl Step {
    pub fn new(rule: &str, dir: Direction, anchor: Anchor) -> Self {
        Step {
            rule: rule.to_string(),
            dir,
            anchor,
        }
    }

    pub fn exact(b: &Binding) -> Self {
        Step::new(b.rule, b.dir, Anchor::exact(b))
    }
}

pub type MoveScript = Vec<Step>;

fn parse_anchor_token(tok: &str) -> Option<AnchorToken> {
    if let Some(rest) = tok.strip_prefix("s=") {
        return rest.parse().ok().map(AnchorToken::Param);
    }
    if let Some(rest) = tok.strip_prefix("loop") {
        return rest.parse().ok().map(|k| AnchorToken::Edge(EdgeRef::Loop(k)));
    }
    if let Some(rest) = tok.strip_prefix('@') {
        return rest
            .parse()
            .ok()
            .map(|k| AnchorToken::Edge(EdgeRef::Edge(Endpoint::Leaf(LeafId(k)))));
    }
    if let Some(rest) = tok.strip_prefix('v') {
        return rest.parse().ok().map(AnchorToken::Variant);
    }
    let rest = tok.strip_prefix('n')?;
    match rest.split_once('.') {
        Some((n, p)) => Some(AnchorToken::Edge(EdgeRef::Edge(Endpoint::Port(
            NodeId(n.parse().ok()?),
            p.parse().ok()?,
        )))),
        None => rest.parse().ok().map(|n| AnchorToken::Node(NodeId(n))),
    }
}

enum AnchorToken {
    Node(NodeId),
    Edge(EdgeRef),
    Variant(u8),
    Param(GroupElem),
}

pub fn parse_script(text: &str) -> Result<MoveScript, ScriptError> {
    let mut steps = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("");
        let words: Vec<&str> = body.split_whitespace().collect();
        if words.is_empty() {
            continue;
        }
        let syntax = |msg: String| ScriptError::Syntax { line, msg };
        if words[0] != "apply" || words.len() < 3 {
            return Err(syntax("expected `apply <move> <fwd|rev> [at <anchor>...]`".into()));
        }
        let dir: Direction = words[2].parse().map_err(syntax)?;
        let mut anchor = Anchor::default();
        if words.len() > 3 {
            if words[3] != "at" {
                return Err(syntax(format!("expected `at`, got `{}`", words[3])));
            }
            for tok in &words[4..] {
                match parse_anchor_token(tok) {
                    Some(AnchorToken::Node(n)) => anchor.nodes.push(n),
                    Some(AnchorToken::Edge(e)) => anchor.edges.push(e),
                    Some(AnchorToken::Variant(v)) => anchor.variant = Some(v),
                    Some(AnchorToken::Param(p)) => anchor.params.push(p),
                    None => return Err(syntax(format!("bad anchor token `{tok}`"))),
                }
            }
        }
        steps.push(Step::new(words[1], dir, anchor));
    }
    Ok(steps)
}

pub fn emit_script(steps: &[Step]) -> String {
    let mut s = String::new();
    for st in steps {
        let _ = write!(s, "apply {} {}", st.rule, st.dir);
        let a = &st.anchor;
        let mut toks: Vec<String> = a.nodes.iter().map(|n| n.to_string()).collect();
        toks.extend(a.edges.iter().map(|e| match e {
            EdgeRef::Edge(Endpoint::Port(n, p)) => format!("{}.{}", n, p),
            EdgeRef::Edge(Endpoint::Leaf(l)) => format!("@{}", l.0),
            EdgeRef::Loop(k) => format!("loop{}", k),
        }));
        if let Some(v) = a.variant {
            if v != 0 {
                toks.push(format!("v{}", v));
            }
        }
        toks.extend(a.params.iter().map(|p| format!("s={}", p)));
        if !toks.is_empty() {
            let _ = write!(s, " at {}", toks.join(" "));
        }
        s.push('\n');
    }
    s
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub binding: Binding,
    pub canon: String,
}

#[derive(Clone, Debug)]
pub struct Trace {
    pub initial: PortGraph,
    pub steps: Vec<TraceStep>,
}

impl Trace {
    pub fn new(initial: &PortGraph) -> Self {
        Trace {
            initial: initial.clone(),
            steps: Vec::new(),
        }
    }

    fn record(&mut self, b: Binding, g: &PortGraph) {
        let canon = canonical_form(g).expect("moves preserve validity");
        self.steps.push(TraceStep { binding: b, canon });
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn count(&self, rule: &str) -> usize {
        self.steps.iter().filter(|s| s.binding.rule == rule).count()
    }

    pub fn rules(&self) -> Vec<&'static str> {
        self.steps.iter().map(|s| s.binding.rule).collect()
    }

    pub fn script(&self) -> MoveScript {
        self.steps.iter().map(|s| Step::exact(&s.binding)).collect()
    }

    /// Re-applies every step from the initial graph, checking each
    /// intermediate canonical form.
    pub fn replay(&self) -> Result<PortGraph, ScriptError> {
        let mut g = self.initial.clone();
        for (k, st) in self.steps.iter().enumerate() {
            g = apply_move(&g, &st.binding).map_err(|source| ScriptError::Engine { step: k + 1, source })?;
            if canonical_form(&g).ok().as_deref() != Some(st.canon.as_str()) {
                return Err(ScriptError::ReplayMismatch { step: k + 1 });
            }
        }
        Ok(g)
    }

    /// Initial graph, script, and a snapshot after every step.
    pub fn export(&self) -> String {
        let mut s = String::from("# initial\n");
        s.push_str(&emit_glc(&self.initial));
        let mut g = self.initial.clone();
        for (k, st) in self.steps.iter().enumerate() {
            let _ = writeln!(s, "# step {}: {}", k + 1, st.binding);
            if let Ok(next) = apply_unchecked(&g, &st.binding) {
                g = next;
                s.push_str(&emit_glc(&g));
            }
        }
        s
    }
}

fn options_for(step: &Step) -> EnumOptions {
    EnumOptions {
        extra_scales: step.anchor.params.clone(),
    }
}

pub fn resolve_step(g: &PortGraph, step: &Step, k: usize) -> Result<Binding, ScriptError> {
    let engine = |source| ScriptError::Engine { step: k, source };
    let mv = lookup(&step.rule).map_err(engine)?;
    let all = enumerate_with(g, &mv, step.dir, &options_for(step)).map_err(engine)?;
    let mut hits: Vec<Binding> = all.into_iter().filter(|b| step.anchor.selects(b)).collect();
    if hits.len() > 1 {
        // an anchor listed in binding order breaks ties between permutations
        let ordered: Vec<Binding> = hits
            .iter()
            .filter(|b| b.wires == step.anchor.edges && b.nodes == step.anchor.nodes)
            .cloned()
            .collect();
        if ordered.len() == 1 {
            hits = ordered;
        }
    }
    match hits.len() {
        0 => Err(ScriptError::NoMatch { step: k }),
        1 => Ok(hits.remove(0)),
        count => Err(ScriptError::AmbiguousAnchor { step: k, count }),
    }
}

pub fn run_script(g: &PortGraph, script: &[Step]) -> Result<(PortGraph, Trace), ScriptError> {
    let mut cur = g.clone();
    let mut trace = Trace::new(g);
    for (i, step) in script.iter().enumerate() {
        let b = resolve_step(&cur, step, i + 1)?;
        cur = apply_unchecked(&cur, &b).map_err(|source| ScriptError::Engine { step: i + 1, source })?;
        trace.record(b, &cur);
    }
    Ok((cur, trace))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Normal,
    Ceiling,
    Cycle,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Normal => "normal",
            Status::Ceiling => "ceiling",
            Status::Cycle => "cycle",
        })
    }
}

#[derive(Clone, Debug)]
pub struct Reduction {
    pub graph: PortGraph,
    pub trace: Trace,
    pub status: Status,
    /// Number of beta steps taken.
    pub steps: usize,
}

fn first(g: &PortGraph, rule: &str, dir: Direction) -> Option<Binding> {
    let mv = lookup(rule).ok()?;
    enumerate_with(g, &mv, dir, &EnumOptions::default()).ok()?.into_iter().next()
}

/// Forward fan-out at the bottleneck with the smallest duplicated part;
/// such a part holds no further bottleneck, so repetition terminates.
pub fn innermost_fan_out(g: &PortGraph) -> Option<Binding> {
    let mv = lookup("global_fan_out").ok()?;
    let all = enumerate_with(g, &mv, Direction::Fwd, &EnumOptions::default()).ok()?;
    all.into_iter().min_by_key(|b| {
        let u = b.nodes[0];
        let part = g
            .tail_of(Endpoint::Port(u, 1))
            .and_then(|r| r.node())
            .map(|r| g.component_without(r, g.tail_of(Endpoint::Port(u, 1))).0.len())
            .unwrap_or(usize::MAX);
        (part, u)
    })
}

/// Applies pruning, loop removal and forward fan-out until none applies.
pub fn cleanup(g: &PortGraph, trace: &mut Trace, fan_out: bool) -> PortGraph {
    let mut cur = g.clone();
    loop {
        let mut next = None;
        for rule in LOCAL_PRUNING.iter().chain(["global_prune", "loop_remove"].iter()) {
            if let Some(b) = first(&cur, rule, Direction::Fwd) {
                next = Some(b);
                break;
            }
        }
        if next.is_none() && fan_out {
            next = innermost_fan_out(&cur);
        }
        let Some(b) = next else {
            return cur;
        };
        cur = apply_unchecked(&cur, &b).expect("enumerated binding applies");
        trace.record(b, &cur);
    }
}

/// Beta-priority reduction: take the first forward beta in enumeration
/// order, then clean up; stop on a repeated canonical form.
pub fn reduce(g: &PortGraph, strategy: &str, max_steps: usize) -> Result<Reduction, ScriptError> {
    if strategy != "beta-priority" {
        return Err(ScriptError::UnknownStrategy(strategy.to_string()));
    }
    let mut trace = Trace::new(g);
    let mut cur = cleanup(g, &mut trace, true);
    let mut seen = HashSet::new();
    seen.insert(canonical_form(&cur).map_err(|e| ScriptError::Engine {
        step: 0,
        source: e.into(),
    })?);
    let mut steps = 0;
    loop {
        let Some(b) = first(&cur, "beta", Direction::Fwd) else {
            return Ok(Reduction {
                graph: cur,
                trace,
                status: Status::Normal,
                steps,
            });
        };
        if steps == max_steps {
            return Ok(Reduction {
                graph: cur,
                trace,
                status: Status::Ceiling,
                steps,
            });
        }
        cur = apply_unchecked(&cur, &b).map_err(|source| ScriptError::Engine {
            step: trace.len() + 1,
            source,
        })?;
        trace.record(b, &cur);
        steps += 1;
        cur = cleanup(&cur, &mut trace, true);
        if !seen.insert(canonical_form(&cur).expect("valid")) {
            return Ok(Reduction {
                graph: cur,
                trace,
                status: Status::Cycle,
                steps,
            });
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub max_states: usize,
    pub enum_options: EnumOptions,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            max_states: 20_000,
            enum_options: EnumOptions::default(),
        }
    }
}

/// Shortest sequence of the given moves leading from `start` to a graph
/// isomorphic to `target`, by breadth-first search with canonical dedup.
pub fn search(
    start: &PortGraph,
    target: &PortGraph,
    moves: &[(&str, Direction)],
    max_depth: usize,
    opts: &SearchOptions,
) -> Option<Vec<Binding>> {
    let goal = canonical_form(target).ok()?;
    let root = canonical_form(start).ok()?;
    if root == goal {
        return Some(Vec::new());
    }
    let resolved: Vec<_> = moves
        .iter()
        .filter_map(|(name, dir)| lookup(name).ok().map(|m| (m, *dir)))
        .collect();
    let mut parent: HashMap<String, (String, Binding)> = HashMap::new();
    let mut seen: HashSet<String> = HashSet::from([root.clone()]);
    let mut frontier: VecDeque<(PortGraph, String)> = VecDeque::from([(start.clone(), root.clone())]);
    for _depth in 0..max_depth {
        let mut next = VecDeque::new();
        while let Some((g, key)) = frontier.pop_front() {
            for (mv, dir) in &resolved {
                let Ok(bs) = enumerate_with(&g, mv, *dir, &opts.enum_options) else {
                    continue;
                };
                for b in bs {
                    let Ok(h) = apply_unchecked(&g, &b) else {
                        continue;
                    };
                    let Ok(k) = canonical_form(&h) else {
                        continue;
                    };
                    if !seen.insert(k.clone()) {
                        continue;
                    }
                    parent.insert(k.clone(), (key.clone(), b));
                    if k == goal {
                        return Some(unwind(&parent, &root, &k));
                    }
                    if seen.len() >= opts.max_states {
                        return None;
                    }
                    next.push_back((h, k));
                }
            }
        }
        frontier = next;
    }
    None
}

fn unwind(parent: &HashMap<String, (String, Binding)>, root: &str, end: &str) -> Vec<Binding> {
    let mut out = Vec::new();
    let mut k = end.to_string();
    while k != root {
        let (p, b) = &parent[&k];
        out.push(b.clone());
        k = p.clone();
    }
    out.reverse();
    out
}

/// Replays bindings found by [`search`] from `start`.
pub fn replay_bindings(start: &PortGraph, bs: &[Binding]) -> Result<(PortGraph, Trace), ScriptError> {
    let mut cur = start.clone();
    let mut trace = Trace::new(start);
    for (k, b) in bs.iter().enumerate() {
        cur = apply_move(&cur, b).map_err(|source| ScriptError::Engine { step: k + 1, source })?;
        trace.record(b.clone(), &cur);
    }
    Ok((cur, trace))
}

/// Per-rule counts of a trace, for reporting.
pub fn tally(trace: &Trace) -> BTreeMap<&'static str, usize> {
    let mut m = BTreeMap::new();
    for r in trace.rules() {
        *m.entry(r).or_insert(0) += 1;
    }
    m
}
