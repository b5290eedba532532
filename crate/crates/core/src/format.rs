//! The line-oriented `.glc` text format and DOT export.
//!
//! ```text
//! # the identity combinator
//! node n1 lambda
//! edge n1.2 -> n1.1
//! out n1.3 -> r
//! ```
//!
//! Leaves are declared by the `in`, `out` and `wire` statements that mention
//! them; declaration order is boundary order. When wires make that order
//! ambiguous, an `order in|out <leaf>...` line pins it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use thiserror::Error;

use crate::graph::{Dir, Endpoint, GateKind, GraphError, Issue, LeafId, NodeId, PortGraph};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: unknown node `{name}`")]
    UnknownNode { line: usize, col: usize, name: String },
    #[error("{line}: {source}")]
    Graph { line: usize, source: GraphError },
    #[error("graph is not valid: {0:?}")]
    Invalid(Vec<Issue>),
}

fn col_of(raw: &str, token: &str) -> usize {
    raw.find(token).map(|c| c + 1).unwrap_or(1)
}

fn parse_kind(words: &[&str]) -> Option<GateKind> {
    match words {
        ["lambda"] => Some(GateKind::Lambda),
        ["app"] => Some(GateKind::App),
        ["fanout"] => Some(GateKind::FanOut),
        ["term"] => Some(GateKind::Term),
        ["dil", lit] => lit.parse().ok().map(GateKind::Dilation),
        _ => None,
    }
}

fn node_number(name: &str) -> Option<u32> {
    name.strip_prefix('n').and_then(|d| d.parse().ok())
}

struct Ctx<'a> {
    names: &'a BTreeMap<String, NodeId>,
    line: usize,
    raw: &'a str,
}

impl Ctx<'_> {
    fn syntax(&self, token: &str, msg: impl Into<String>) -> FormatError {
        FormatError::Syntax {
            line: self.line,
            col: col_of(self.raw, token),
            msg: msg.into(),
        }
    }

    fn port(&self, token: &str) -> Result<Endpoint, FormatError> {
        let (name, port) = token
            .rsplit_once('.')
            .ok_or_else(|| self.syntax(token, format!("expected <node>.<port>, got `{token}`")))?;
        let port: u8 = port
            .parse()
            .map_err(|_| self.syntax(token, format!("bad port number in `{token}`")))?;
        let id = self.names.get(name).ok_or_else(|| FormatError::UnknownNode {
            line: self.line,
            col: col_of(self.raw, token),
            name: name.to_string(),
        })?;
        Ok(Endpoint::Port(*id, port))
    }
}

pub fn parse_glc(text: &str) -> Result<PortGraph, FormatError> {
    let lines: Vec<(usize, &str, Vec<&str>)> = text
        .lines()
        .enumerate()
        .map(|(i, raw)| {
            let body = raw.split('#').next().unwrap_or("");
            (i + 1, raw, body.split_whitespace().collect::<Vec<_>>())
        })
        .filter(|(_, _, w)| !w.is_empty())
        .collect();

    // pass 1: node declarations
    let mut decls: Vec<(usize, &str, String, GateKind)> = Vec::new();
    for (line, raw, words) in &lines {
        if words[0] == "node" {
            let syntax = |msg: &str| FormatError::Syntax {
                line: *line,
                col: 1,
                msg: msg.to_string(),
            };
            if words.len() < 3 {
                return Err(syntax("expected `node <id> <kind>`"));
            }
            let kind = parse_kind(&words[2..]).ok_or_else(|| FormatError::Syntax {
                line: *line,
                col: col_of(raw, words[2]),
                msg: format!("unknown gate kind `{}`", words[2..].join(" ")),
            })?;
            decls.push((*line, raw, words[1].to_string(), kind));
        }
    }
    let mut g = PortGraph::new();
    let mut names = BTreeMap::new();
    let reserved: BTreeSet<u32> = decls.iter().filter_map(|d| node_number(&d.2)).collect();
    let mut fresh = reserved.iter().next_back().map(|m| m + 1).unwrap_or(0);
    for (line, raw, name, kind) in decls {
        if names.contains_key(&name) {
            return Err(FormatError::Syntax {
                line,
                col: col_of(raw, &name),
                msg: format!("node `{name}` declared twice"),
            });
        }
        let id = match node_number(&name) {
            Some(k) => NodeId(k),
            None => {
                fresh += 1;
                NodeId(fresh - 1)
            }
        };
        g.insert_gate(id, kind).map_err(|source| FormatError::Graph { line, source })?;
        names.insert(name, id);
    }

    // pass 2: leaves and edges
    let mut leaves: BTreeMap<String, LeafId> = BTreeMap::new();
    let mut order: Vec<(usize, Dir, Vec<String>)> = Vec::new();
    for (line, raw, words) in &lines {
        let ctx = Ctx {
            names: &names,
            line: *line,
            raw,
        };
        let mut new_leaf = |g: &mut PortGraph, name: &str, dir: Dir| -> Result<LeafId, FormatError> {
            if leaves.contains_key(name) {
                return Err(ctx.syntax(name, format!("leaf `{name}` declared twice")));
            }
            let id = g.add_leaf(dir, Some(name.to_string()));
            leaves.insert(name.to_string(), id);
            Ok(id)
        };
        let graph_err = |source| FormatError::Graph { line: *line, source };
        let arrow = |w: &[&str]| w.len() == 4 && w[2] == "->";
        match words[0] {
            "node" => {}
            "edge" if arrow(words) => {
                let (t, h) = (ctx.port(words[1])?, ctx.port(words[3])?);
                g.connect(t, h).map_err(graph_err)?;
            }
            "in" if arrow(words) => {
                let h = ctx.port(words[3])?;
                let l = new_leaf(&mut g, words[1], Dir::In)?;
                g.connect(Endpoint::Leaf(l), h).map_err(graph_err)?;
            }
            "out" if arrow(words) => {
                let t = ctx.port(words[1])?;
                let l = new_leaf(&mut g, words[3], Dir::Out)?;
                g.connect(t, Endpoint::Leaf(l)).map_err(graph_err)?;
            }
            "wire" if arrow(words) => {
                let i = new_leaf(&mut g, words[1], Dir::In)?;
                let o = new_leaf(&mut g, words[3], Dir::Out)?;
                g.connect(Endpoint::Leaf(i), Endpoint::Leaf(o)).map_err(graph_err)?;
            }
            "loop" if words.len() == 2 => {
                let k: usize = words[1]
                    .parse()
                    .map_err(|_| ctx.syntax(words[1], "loop count must be a non-negative integer"))?;
                g.add_loops(k);
            }
            "order" if words.len() >= 2 && (words[1] == "in" || words[1] == "out") => {
                let dir = if words[1] == "in" { Dir::In } else { Dir::Out };
                order.push((*line, dir, words[2..].iter().map(|s| s.to_string()).collect()));
            }
            w => return Err(ctx.syntax(w, format!("unrecognised statement `{}`", words.join(" ")))),
        }
    }
    for (line, dir, names) in order {
        let ids: Vec<LeafId> = names
            .iter()
            .map(|n| {
                leaves.get(n).copied().ok_or_else(|| FormatError::Syntax {
                    line,
                    col: 1,
                    msg: format!("unknown leaf `{n}` in order line"),
                })
            })
            .collect::<Result<_, _>>()?;
        g = reorder_leaves(&g, dir, &ids).ok_or_else(|| FormatError::Syntax {
            line,
            col: 1,
            msg: "order line must list every leaf of that direction once".into(),
        })?;
    }
    g.validate().map_err(FormatError::Invalid)?;
    Ok(g)
}

fn reorder_leaves(g: &PortGraph, dir: Dir, ids: &[LeafId]) -> Option<PortGraph> {
    let current: Vec<LeafId> = g.leaves().iter().filter(|l| l.dir == dir).map(|l| l.id).collect();
    let mut sorted_a = current.clone();
    let mut sorted_b = ids.to_vec();
    sorted_a.sort();
    sorted_b.sort();
    if sorted_a != sorted_b {
        return None;
    }
    let mut out = g.clone();
    let records: Vec<_> = g.leaves().to_vec();
    out.reorder_leaf_records(|list| {
        let mut others: Vec<_> = records.iter().filter(|l| l.dir != dir).cloned().collect();
        let mut mine: Vec<_> = ids
            .iter()
            .map(|id| records.iter().find(|l| l.id == *id).cloned().expect("present"))
            .collect();
        list.clear();
        list.append(&mut mine);
        list.append(&mut others);
    });
    Some(out)
}

fn leaf_names(g: &PortGraph) -> BTreeMap<LeafId, String> {
    let mut names = BTreeMap::new();
    let mut used = BTreeSet::new();
    let labels_ok = {
        let labels: Vec<_> = g.leaves().iter().filter_map(|l| l.label.clone()).collect();
        let set: BTreeSet<_> = labels.iter().collect();
        set.len() == labels.len()
            && labels.iter().all(|s| {
                !s.is_empty() && !s.contains(char::is_whitespace) && !s.contains('#') && !s.contains('.')
            })
    };
    let (mut ki, mut ko) = (0, 0);
    for l in g.leaves() {
        let name = match (&l.label, labels_ok) {
            (Some(s), true) => s.clone(),
            _ => {
                let mut n;
                loop {
                    n = match l.dir {
                        Dir::In => {
                            ki += 1;
                            format!("i{}", ki - 1)
                        }
                        Dir::Out => {
                            ko += 1;
                            format!("o{}", ko - 1)
                        }
                    };
                    if !used.contains(&n) && !g.leaves().iter().any(|x| labels_ok && x.label.as_deref() == Some(n.as_str())) {
                        break;
                    }
                }
                n
            }
        };
        used.insert(name.clone());
        names.insert(l.id, name);
    }
    names
}

pub fn emit_glc(g: &PortGraph) -> String {
    let names = leaf_names(g);
    let ep = |e: Endpoint| match e {
        Endpoint::Port(n, p) => format!("{}.{}", n, p),
        Endpoint::Leaf(l) => names[&l].clone(),
    };
    let mut s = String::new();
    for (n, k) in g.nodes() {
        let _ = writeln!(s, "node {} {}", n, k);
    }
    for (t, h) in g.edges() {
        if let (Endpoint::Port(..), Endpoint::Port(..)) = (t, h) {
            let _ = writeln!(s, "edge {} -> {}", ep(t), ep(h));
        }
    }
    let mut declared_out = Vec::new();
    let mut declared_in = Vec::new();
    for leaf in g.leaves() {
        let e = Endpoint::Leaf(leaf.id);
        match leaf.dir {
            Dir::In => {
                let h = g.head_of(e).expect("valid graph");
                if let Endpoint::Leaf(o) = h {
                    let _ = writeln!(s, "wire {} -> {}", names[&leaf.id], names[&o]);
                    declared_out.push(o);
                } else {
                    let _ = writeln!(s, "in {} -> {}", names[&leaf.id], ep(h));
                }
                declared_in.push(leaf.id);
            }
            Dir::Out => {
                let t = g.tail_of(e).expect("valid graph");
                if let Endpoint::Leaf(_) = t {
                    continue;
                }
                let _ = writeln!(s, "out {} -> {}", ep(t), names[&leaf.id]);
                declared_out.push(leaf.id);
            }
        }
    }
    if declared_out != g.out_leaves() {
        let list: Vec<_> = g.out_leaves().iter().map(|l| names[l].clone()).collect();
        let _ = writeln!(s, "order out {}", list.join(" "));
    }
    if declared_in != g.in_leaves() {
        let list: Vec<_> = g.in_leaves().iter().map(|l| names[l].clone()).collect();
        let _ = writeln!(s, "order in {}", list.join(" "));
    }
    if g.loops() > 0 {
        let _ = writeln!(s, "loop {}", g.loops());
    }
    s
}

pub fn to_dot(g: &PortGraph) -> Result<String, GraphError> {
    g.ensure_valid()?;
    let names = leaf_names(g);
    let mut s = String::from("digraph glc {\n");
    for (n, k) in g.nodes() {
        let label = match k {
            GateKind::Dilation(e) => format!("dil {}", e),
            other => other.tag().to_string(),
        };
        let _ = writeln!(s, "  {} [label=\"{}\"];", n, label);
    }
    for leaf in g.leaves() {
        let dir = match leaf.dir {
            Dir::In => "IN",
            Dir::Out => "OUT",
        };
        let _ = writeln!(
            s,
            "  leaf{} [shape=plaintext, label=\"{} {}\"];",
            leaf.id.0, dir, names[&leaf.id]
        );
    }
    let node_id = |e: Endpoint| match e {
        Endpoint::Port(n, _) => n.to_string(),
        Endpoint::Leaf(l) => format!("leaf{}", l.0),
    };
    let port_label = |e: Endpoint| match e {
        Endpoint::Port(_, p) => p.to_string(),
        Endpoint::Leaf(_) => String::new(),
    };
    for (t, h) in g.edges() {
        let _ = writeln!(
            s,
            "  {} -> {} [taillabel=\"{}\", headlabel=\"{}\"];",
            node_id(t),
            node_id(h),
            port_label(t),
            port_label(h)
        );
    }
    for k in 0..g.loops() {
        let _ = writeln!(s, "  loop{k} [shape=circle, label=\"loop\"];");
        let _ = writeln!(s, "  loop{k} -> loop{k};");
    }
    s.push_str("}\n");
    Ok(s)
}
