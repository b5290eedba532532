//! The move catalogue.
//!
//! A local move is a pair of fragments with the same numbered boundary. A
//! fragment edge runs between gate ports and boundary slots; an edge from an
//! IN slot straight to an OUT slot is a pass-through wire that matches any
//! host edge or free loop.

use std::fmt;

use crate::graph::GateKind;
use crate::group::GroupElem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Fwd,
    Rev,
}

impl Direction {
    pub fn flip(self) -> Direction {
        match self {
            Direction::Fwd => Direction::Rev,
            Direction::Rev => Direction::Fwd,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Fwd => "fwd",
            Direction::Rev => "rev",
        })
    }
}

impl std::str::FromStr for Direction {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fwd" => Ok(Direction::Fwd),
            "rev" => Ok(Direction::Rev),
            _ => Err(format!("direction must be fwd or rev, got `{s}`")),
        }
    }
}

/// Scale carried by a dilation in a fragment, in terms of rule variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Scale {
    Var(usize),
    Mul(usize, usize),
    Inv(usize),
    Identity,
}

impl Scale {
    pub fn eval(&self, vars: &[GroupElem]) -> GroupElem {
        match self {
            Scale::Var(i) => vars[*i].clone(),
            Scale::Mul(i, j) => vars[*i].mul(&vars[*j]),
            Scale::Inv(i) => vars[*i].inv(),
            Scale::Identity => GroupElem::identity(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodePat {
    Lambda,
    FanOut,
    App,
    Term,
    Dil(Scale),
}

impl NodePat {
    pub fn same_shape(&self, kind: &GateKind) -> bool {
        matches!(
            (self, kind),
            (NodePat::Lambda, GateKind::Lambda)
                | (NodePat::FanOut, GateKind::FanOut)
                | (NodePat::App, GateKind::App)
                | (NodePat::Term, GateKind::Term)
                | (NodePat::Dil(_), GateKind::Dilation(_))
        )
    }

    pub fn instantiate(&self, vars: &[GroupElem]) -> GateKind {
        match self {
            NodePat::Lambda => GateKind::Lambda,
            NodePat::FanOut => GateKind::FanOut,
            NodePat::App => GateKind::App,
            NodePat::Term => GateKind::Term,
            NodePat::Dil(s) => GateKind::Dilation(s.eval(vars)),
        }
    }

    pub fn arity(&self) -> u8 {
        match self {
            NodePat::Term => 1,
            _ => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FEnd {
    Port(usize, u8),
    In(usize),
    Out(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fragment {
    pub nodes: Vec<NodePat>,
    pub edges: Vec<(FEnd, FEnd)>,
}

impl Fragment {
    pub fn ins(&self) -> usize {
        self.edges
            .iter()
            .filter_map(|(t, _)| match t {
                FEnd::In(j) => Some(j + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn outs(&self) -> usize {
        self.edges
            .iter()
            .filter_map(|(_, h)| match h {
                FEnd::Out(j) => Some(j + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// Pass-through wires as (in slot, out slot), in edge order.
    pub fn wires(&self) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .filter_map(|e| match e {
                (FEnd::In(i), FEnd::Out(o)) => Some((*i, *o)),
                _ => None,
            })
            .collect()
    }

    pub fn size(&self) -> usize {
        self.nodes.len() + self.edges.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Directionality {
    Bidirectional,
    ForwardOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SideCondition {
    /// No oriented path from the edge leaving `from` to the edge entering
    /// `to`; both are (node, port) of the forward left-hand side.
    NoPath { from: (usize, u8), to: (usize, u8) },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RuleBody {
    Local {
        lhs: Fragment,
        rhs: Fragment,
        vars: usize,
        side: Option<SideCondition>,
    },
    GlobalFanOut,
    GlobalPrune,
    LoopRemove,
    LoopAdd,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Move {
    pub name: &'static str,
    pub directionality: Directionality,
    pub body: RuleBody,
}

impl Move {
    pub fn allows(&self, dir: Direction) -> bool {
        dir == Direction::Fwd || self.directionality == Directionality::Bidirectional
    }

    pub fn is_local(&self) -> bool {
        matches!(self.body, RuleBody::Local { .. })
    }
}

use FEnd::{In, Out, Port};

fn frag(nodes: Vec<NodePat>, edges: Vec<(FEnd, FEnd)>) -> Fragment {
    Fragment { nodes, edges }
}

fn local(
    name: &'static str,
    directionality: Directionality,
    lhs: Fragment,
    rhs: Fragment,
    vars: usize,
) -> Move {
    debug_assert_eq!(lhs.ins(), rhs.ins(), "{name}");
    debug_assert_eq!(lhs.outs(), rhs.outs(), "{name}");
    Move {
        name,
        directionality,
        body: RuleBody::Local {
            lhs,
            rhs,
            vars,
            side: None,
        },
    }
}

fn prune_fanout(name: &'static str, dead: u8) -> Move {
    let live = 5 - dead;
    local(
        name,
        Directionality::ForwardOnly,
        frag(
            vec![NodePat::FanOut, NodePat::Term],
            vec![(In(0), Port(0, 1)), (Port(0, dead), Port(1, 1)), (Port(0, live), Out(0))],
        ),
        frag(vec![], vec![(In(0), Out(0))]),
        0,
    )
}

fn prune_binary(name: &'static str, gate: NodePat, vars: usize) -> Move {
    local(
        name,
        Directionality::ForwardOnly,
        frag(
            vec![gate, NodePat::Term],
            vec![(In(0), Port(0, 1)), (In(1), Port(0, 2)), (Port(0, 3), Port(1, 1))],
        ),
        frag(
            vec![NodePat::Term, NodePat::Term],
            vec![(In(0), Port(0, 1)), (In(1), Port(1, 1))],
        ),
        vars,
    )
}

/// All moves, in catalogue order.
pub fn move_catalogue() -> Vec<Move> {
    use Directionality::*;
    let beta = local(
        "beta",
        Bidirectional,
        // slot in0 enters λ.1, in1 enters ∧.2; out0 leaves ∧.3, out1 leaves λ.2
        frag(
            vec![NodePat::Lambda, NodePat::App],
            vec![
                (Port(0, 3), Port(1, 1)),
                (In(0), Port(0, 1)),
                (Port(0, 2), Out(1)),
                (In(1), Port(1, 2)),
                (Port(1, 3), Out(0)),
            ],
        ),
        frag(vec![], vec![(In(0), Out(0)), (In(1), Out(1))]),
        0,
    );
    let co_assoc = local(
        "co_assoc",
        Bidirectional,
        frag(
            vec![NodePat::FanOut, NodePat::FanOut],
            vec![
                (In(0), Port(0, 1)),
                (Port(0, 2), Port(1, 1)),
                (Port(1, 2), Out(0)),
                (Port(1, 3), Out(1)),
                (Port(0, 3), Out(2)),
            ],
        ),
        frag(
            vec![NodePat::FanOut, NodePat::FanOut],
            vec![
                (In(0), Port(0, 1)),
                (Port(0, 2), Out(0)),
                (Port(0, 3), Port(1, 1)),
                (Port(1, 2), Out(1)),
                (Port(1, 3), Out(2)),
            ],
        ),
        0,
    );
    let co_comm = local(
        "co_comm",
        Bidirectional,
        frag(
            vec![NodePat::FanOut],
            vec![(In(0), Port(0, 1)), (Port(0, 2), Out(0)), (Port(0, 3), Out(1))],
        ),
        frag(
            vec![NodePat::FanOut],
            vec![(In(0), Port(0, 1)), (Port(0, 3), Out(0)), (Port(0, 2), Out(1))],
        ),
        0,
    );
    let r1a = local(
        "r1a",
        Bidirectional,
        frag(
            vec![NodePat::FanOut, NodePat::Dil(Scale::Var(0))],
            vec![
                (In(0), Port(0, 1)),
                (Port(0, 2), Port(1, 1)),
                (Port(0, 3), Port(1, 2)),
                (Port(1, 3), Out(0)),
            ],
        ),
        frag(vec![], vec![(In(0), Out(0))]),
        1,
    );
    // the dilation's output is fanned out and one copy returns as its base point
    let r1b = local(
        "r1b",
        Bidirectional,
        frag(
            vec![NodePat::FanOut, NodePat::Dil(Scale::Var(0))],
            vec![
                (In(0), Port(1, 2)),
                (Port(1, 3), Port(0, 1)),
                (Port(0, 2), Port(1, 1)),
                (Port(0, 3), Out(0)),
            ],
        ),
        frag(vec![], vec![(In(0), Out(0))]),
        1,
    );
    // node 1 is the outer dilation, node 2 the inner one
    let r2 = local(
        "r2",
        Bidirectional,
        frag(
            vec![
                NodePat::FanOut,
                NodePat::Dil(Scale::Var(0)),
                NodePat::Dil(Scale::Var(1)),
            ],
            vec![
                (In(0), Port(0, 1)),
                (Port(0, 2), Port(1, 1)),
                (Port(0, 3), Port(2, 1)),
                (In(1), Port(2, 2)),
                (Port(2, 3), Port(1, 2)),
                (Port(1, 3), Out(0)),
            ],
        ),
        frag(
            vec![NodePat::Dil(Scale::Mul(0, 1))],
            vec![(In(0), Port(0, 1)), (In(1), Port(0, 2)), (Port(0, 3), Out(0))],
        ),
        2,
    );
    let ext2 = local(
        "ext2",
        Bidirectional,
        frag(
            vec![NodePat::Dil(Scale::Identity)],
            vec![(In(0), Port(0, 1)), (In(1), Port(0, 2)), (Port(0, 3), Out(0))],
        ),
        frag(vec![NodePat::Term], vec![(In(0), Port(0, 1)), (In(1), Out(0))]),
        0,
    );
    let prune_lambda = local(
        "prune_lambda",
        ForwardOnly,
        frag(
            vec![NodePat::Lambda, NodePat::Term, NodePat::Term],
            vec![(In(0), Port(0, 1)), (Port(0, 2), Port(1, 1)), (Port(0, 3), Port(2, 1))],
        ),
        frag(vec![NodePat::Term], vec![(In(0), Port(0, 1))]),
        0,
    );
    let mut ext1 = local(
        "ext1",
        Bidirectional,
        // node 0 is the ∧ gate, node 1 the λ gate
        frag(
            vec![NodePat::App, NodePat::Lambda],
            vec![
                (In(0), Port(0, 1)),
                (Port(0, 3), Port(1, 1)),
                (Port(1, 2), Port(0, 2)),
                (Port(1, 3), Out(0)),
            ],
        ),
        frag(vec![], vec![(In(0), Out(0))]),
        0,
    );
    if let RuleBody::Local { side, .. } = &mut ext1.body {
        *side = Some(SideCondition::NoPath {
            from: (1, 3),
            to: (0, 1),
        });
    }
    vec![
        beta,
        co_assoc,
        co_comm,
        r1a,
        r1b,
        r2,
        ext2,
        prune_fanout("prune_fanout_2", 2),
        prune_fanout("prune_fanout_3", 3),
        prune_binary("prune_app", NodePat::App, 0),
        prune_binary("prune_dil", NodePat::Dil(Scale::Var(0)), 1),
        prune_lambda,
        ext1,
        Move {
            name: "global_fan_out",
            directionality: Bidirectional,
            body: RuleBody::GlobalFanOut,
        },
        Move {
            name: "global_prune",
            directionality: ForwardOnly,
            body: RuleBody::GlobalPrune,
        },
        Move {
            name: "loop_remove",
            directionality: ForwardOnly,
            body: RuleBody::LoopRemove,
        },
        Move {
            name: "loop_add",
            directionality: ForwardOnly,
            body: RuleBody::LoopAdd,
        },
    ]
}

pub fn find_move(name: &str) -> Option<Move> {
    move_catalogue().into_iter().find(|m| m.name == name)
}

/// Local pruning moves, applied forward only.
pub const LOCAL_PRUNING: [&str; 5] = [
    "prune_fanout_2",
    "prune_fanout_3",
    "prune_app",
    "prune_dil",
    "prune_lambda",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalogue_names_are_unique() {
        let cat = move_catalogue();
        let mut names: Vec<_> = cat.iter().map(|m| m.name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), cat.len());
        assert_eq!(cat.len(), 17);
    }

    #[test]
    fn directionality_flags() {
        assert_eq!(find_move("beta").unwrap().directionality, Directionality::Bidirectional);
        assert_eq!(find_move("prune_app").unwrap().directionality, Directionality::ForwardOnly);
        assert!(!find_move("global_prune").unwrap().allows(Direction::Rev));
    }

    #[test]
    fn local_fragments_share_boundaries() {
        for m in move_catalogue() {
            if let RuleBody::Local { lhs, rhs, .. } = &m.body {
                assert_eq!(lhs.ins(), rhs.ins(), "{}", m.name);
                assert_eq!(lhs.outs(), rhs.outs(), "{}", m.name);
                assert!(lhs.size() <= 10 && rhs.size() <= 10, "{}", m.name);
            }
        }
    }
}
