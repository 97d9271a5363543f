//! Typed feature structures in an undoable constraint store.

mod build;
mod fs;
mod store;

pub use fs::{Fs, FsNode};
pub use store::{Checkpoint, Goal, GoalId, GoalKind, GoalState, Licensing, NodeId, Snapshot, Store};
pub(crate) use store::Task;
