//! Combinatorial rigidity of symmetric and periodic frameworks in
//! non-Euclidean normed planes.
//!
//! The crate decides generic rigidity questions for frameworks whose
//! symmetry is a rank-two translation lattice, a reflection, or both
//! combined, with distances measured in a smooth `q`-norm or the maximum
//! norm.  Frameworks are described by gain graphs: quotient multigraphs
//! whose edges carry symmetry-group elements.
//!
//! The main entry points are:
//!
//! - [`gain_graph::GainGraph`] with [`group::GroupElement`] gains, plus
//!   switching and derived (covering) graphs;
//! - [`sparsity`]: pebble-game tightness checkers with violation
//!   witnesses, and an independent exhaustive oracle;
//! - [`moves`]: tightness-preserving construction moves, random generation
//!   of tight graphs, and reduction back to base graphs with exact replay;
//! - [`numerics`]: orbit rigidity matrices, randomized rank estimates and
//!   rigidity verdicts, and the induced edge colourings of the maximum
//!   norm;
//! - [`crossval`]: cross-validation harness comparing the combinatorial
//!   checkers against numerical rank computations;
//! - [`io`]: the graph file format, configurations and replay files.

pub mod crossval;
pub mod gain_graph;
pub mod group;
pub mod io;
pub mod moves;
pub mod numerics;
pub mod sparsity;
