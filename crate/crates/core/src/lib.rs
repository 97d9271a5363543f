//! Bidirectional word analysis and generation with typed feature
//! structures, delayed conditional constraints and extended two-level
//! morphology.

pub mod constraints;
pub mod error;
pub mod feature_structures;
pub mod grammar;
pub mod lexicon;
pub mod syntax;
pub mod twolevel;
pub mod type_system;

pub use constraints::{Builtin, ConditionalConstraint, ConstraintId, ConstraintSet, Requirement, Verdict};
pub use error::{EngineError, Fail, LoadError};
pub use feature_structures::{Checkpoint, Fs, FsNode, GoalId, GoalKind, GoalState, Licensing, NodeId, Store};
pub use grammar::{check, demo, Analysis, CheckReport, Engine, EngineConfig, Generation, Grammar, Source};
pub use syntax::{Desc, DescBody};
pub use type_system::{FeatId, Meet, TypeError, TypeHierarchy, TypeId, STRING, TOP};
