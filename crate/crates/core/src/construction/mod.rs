//! Generational construction of boundary points visible from a base point,
//! with the tree measure, path assembly and ball-count diagnostics.

pub mod chain;
pub mod collection;
pub mod diagnostics;
pub mod john;
pub mod measure;
pub mod tree;

pub use chain::{chain_path, ChainPath, ChainRecord};
pub use collection::{
    admissible_centers, chainable_component, separated_net, well_placed_subcollection, BallCollection,
    CollectionKind, Region,
};
pub use tree::{
    run_construction, ConstructionConfig, EtaBound, Expansion, GenerationTree, HaltReason, StepOneReading, TreeNode,
    TreeParams,
};
pub use john::{assemble_all, assemble_john_path, assemble_node_path, john_bound, john_constant_of_path, JohnPath, LevelPiece};
pub use measure::{build_tree_measure, frostman_scan, FrostmanScan, TreeMeasure};
pub use diagnostics::{
    build_test_function, test_function_setup, verify_ball_count, BallCountReport, DiagnosticsConfig, LevelCount,
    TestFunction, TestFunctionSetup,
};
