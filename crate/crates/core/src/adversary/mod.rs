//! Adversarial colorings: a stable coloring encoding a toy halting set, and
//! a diagonalization against finitely many approximated decomposers.

pub mod diagonal;
pub mod halting;

pub use diagonal::{
    check_monotone, diagonal_build, verify_defeat, CandidateDecomposer, CandidateKind, CandidateReport, DefeatReport,
    DiagonalBuild, Evidence, LevelChoice, StageLog, Verdict,
};
pub use halting::{
    decode, decode_markers, decode_membership, halting_coloring_build, intended_decomposition, Decoded, Flip,
    HaltingBuild, MachineEntry, MarkerTable, ProtectedInterval, ToyHaltingOracle,
};
