//! Evolutionary diversity optimization driven by the star discrepancy of
//! feature vectors.
//!
//! The library evolves multisets of solutions that all meet a quality gate
//! while the star discrepancy of their scaled feature vectors in [0,1]^d is
//! minimized. Three survivor-selection variants are provided: discrepancy
//! minimization (`D`), weighted feature contribution (`C`), and discrepancy
//! with contribution tie-breaking (`T`).
//!
//! Two problem domains ship with the crate: TSP instances that are hard for
//! a 2-opt local search (quality = approximation ratio against an exact
//! optimum) and raster images close to a reference (quality = mean squared
//! error), the latter mutated by a self-adaptive offset random walk.

pub mod discrepancy;
pub mod diversity;
pub mod harness;
pub mod image;
pub mod tsp;

pub use discrepancy::{
    box_deviation, min_removal_scan, star_discrepancy, star_discrepancy_oracle, DiscrepancyError,
    DiscrepancyMeasure, PointSet, UnitPoint,
};
pub use diversity::{
    run_ea, scale_features, weighted_contribution, EaConfig, EaError, EaRun, EvolutionDomain,
    FeatureSpec, GenerationTrace, Individual, SelectionMode,
};
