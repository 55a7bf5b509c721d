//! Monochromatic path decompositions of edge-colored complete graphs on
//! initial segments of the naturals: finite solvers, limit constructions
//! driven by largeness notions, and computable adversaries.

pub mod adversary;
pub mod coloring;
pub mod error;
pub mod largeness;
pub mod paths;
pub mod limit_sim;
pub mod solver;

pub use coloring::{Color, Coloring, ColoringKind, StablePresentation, Vertex};
pub use error::{Error, Result};
pub use paths::{DecompState, ExtensionStep, Path, StepKind, Trace, TraceEnd};
