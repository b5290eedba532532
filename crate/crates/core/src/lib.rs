//! Graphic lambda calculus: port graphs over the λ, Υ, ∧, dilation and ⊤
//! gates, their local and global moves, and the lambda-term, emergent-algebra
//! and tangle frontends built on top of them.

pub mod canon;
pub mod cli;
pub mod emergent;
pub mod engine;
pub mod format;
pub mod graph;
pub mod lambda;
pub mod macros;
pub mod group;
pub mod rules;
pub mod script;
pub mod tangle;

pub use canon::{canonical_form, isomorphic};
pub use graph::{Dir, Endpoint, GateKind, GraphError, LeafId, NodeId, PortGraph};
pub use group::GroupElem;
