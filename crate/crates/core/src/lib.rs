//! Factorized metrics and Dyson maps for quasi-Hermitian Hamiltonians, the
//! lattice of intermediate representations between them, and tools to pick,
//! score and evolve in those representations.

pub mod bgosc;
pub mod chains;
pub mod conjugation;
pub mod error;
pub mod evolve;
pub mod lattice;
pub mod matkernel;
pub mod scoring;
pub mod toymodel;

pub use bgosc::{compare_spectra, BGParams, GridSpec, SpectralReport};
pub use chains::{
    dyson_from_metrics, metrics_from_dyson, validate, CumulativeCertificate, DysonChain,
    FactorOrder, FactorizationMode, LevelCertificate, MetricChain,
};
pub use conjugation::{
    check_observable, is_quasi_hermitian, sharp, MetricContext, QuasiHermiticityReport,
};
pub use error::{Error, Result};
pub use evolve::{
    compare_representations, propagate, AgreementReport, EvolutionSpec, EvolutionTrace, Method,
};
pub use lattice::{
    build_lattice, census, diagonal_map, enumerate_paths, representation, Choice,
    HermitizationPath, Lattice, LatticeNode, NodeIndex, PathCensus, Representation,
};
pub use matkernel::{ComplexMatrix, Tolerance, C64};
pub use scoring::{rank, score, ComplexityScore, Weights};
pub use toymodel::{verify_fixtures, FixtureReport, ToyModelInstance, ToyParams};
