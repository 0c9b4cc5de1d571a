//! Generic (mu+lambda) evolutionary diversity optimizer.
//!
//! The optimizer keeps a multiset of individuals that all pass a
//! domain-specific quality gate while minimizing the star discrepancy of
//! their scaled feature vectors. Three survivor-selection variants exist:
//!
//! * `D` — remove the individual whose deletion minimizes the discrepancy of
//!   the remainder,
//! * `C` — remove the individual with the smallest weighted feature
//!   contribution,
//! * `T` — like `D`, breaking discrepancy ties by the smallest weighted
//!   contribution.
//!
//! All tie cascades end in lowest-index removal so that runs are exactly
//! reproducible from a seed.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::discrepancy::{
    min_removal_scan_with, DiscrepancyError, DiscrepancyMeasure, PointSet, UnitPoint,
};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("feature `{name}`: f_min {f_min} must be strictly below f_max {f_max}")]
    EmptyRange {
        name: String,
        f_min: f64,
        f_max: f64,
    },
    #[error("feature `{name}`: weight {weight} must be non-negative and finite")]
    BadWeight { name: String, weight: f64 },
    #[error("feature count mismatch: {got} raw values for {expected} specs")]
    CountMismatch { expected: usize, got: usize },
    #[error("feature `{name}`: raw value {value} is not finite")]
    NonFiniteValue { name: String, value: f64 },
    #[error("weighted contribution needs a population of at least two, got {0}")]
    PopulationTooSmall(usize),
}

#[derive(Debug, Error)]
pub enum EaError {
    #[error("invalid run setup: {0}")]
    InvalidConfig(String),
    #[error("domain `{domain}` failed to initialize the population: {source}")]
    Initialization {
        domain: String,
        source: Box<dyn std::error::Error + Send + Sync>,
    },
    #[error("mutation failed: {0}")]
    Mutation(Box<dyn std::error::Error + Send + Sync>),
    #[error("quality evaluation failed: {0}")]
    Quality(Box<dyn std::error::Error + Send + Sync>),
    #[error("feature extraction failed: {0}")]
    FeatureExtraction(Box<dyn std::error::Error + Send + Sync>),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Discrepancy(#[from] DiscrepancyError),
}

/// One feature axis: its name, the raw range mapped onto [0,1], and the
/// weight it carries in the contribution measure.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureSpec {
    pub name: String,
    pub f_min: f64,
    pub f_max: f64,
    #[serde(default = "default_weight")]
    pub weight: f64,
}

fn default_weight() -> f64 {
    1.0
}

impl FeatureSpec {
    pub fn new(
        name: impl Into<String>,
        f_min: f64,
        f_max: f64,
        weight: f64,
    ) -> Result<Self, FeatureError> {
        let spec = Self {
            name: name.into(),
            f_min,
            f_max,
            weight,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), FeatureError> {
        if !(self.f_min < self.f_max) {
            return Err(FeatureError::EmptyRange {
                name: self.name.clone(),
                f_min: self.f_min,
                f_max: self.f_max,
            });
        }
        if !(self.weight >= 0.0 && self.weight.is_finite()) {
            return Err(FeatureError::BadWeight {
                name: self.name.clone(),
                weight: self.weight,
            });
        }
        Ok(())
    }
}

/// Maps raw feature values into [0,1]^d: affine scaling by each spec's
/// range, clamped so unanticipated values land on 0 or 1.
pub fn scale_features(raw: &[f64], specs: &[FeatureSpec]) -> Result<UnitPoint, FeatureError> {
    if raw.len() != specs.len() {
        return Err(FeatureError::CountMismatch {
            expected: specs.len(),
            got: raw.len(),
        });
    }
    let mut coords = Vec::with_capacity(raw.len());
    for (value, spec) in raw.iter().zip(specs) {
        if !value.is_finite() {
            return Err(FeatureError::NonFiniteValue {
                name: spec.name.clone(),
                value: *value,
            });
        }
        let scaled = (value - spec.f_min) / (spec.f_max - spec.f_min);
        coords.push(scaled.clamp(0.0, 1.0));
    }
    Ok(UnitPoint::new(coords).expect("clamped coordinates are in range"))
}

/// A genotype together with its cached feature vectors and quality.
///
/// Quality is evaluated once, when the individual is created, with the run's
/// generator; stochastic gates (the TSP approximation ratio) are therefore
/// judged on their creation-time value.
#[derive(Debug, Clone)]
pub struct Individual<G> {
    pub genotype: G,
    pub raw_features: Vec<f64>,
    pub scaled_features: UnitPoint,
    pub quality: f64,
}

/// Survivor-selection variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SelectionMode {
    /// Discrepancy minimization.
    D,
    /// Weighted feature contribution.
    C,
    /// Discrepancy minimization with contribution tie-breaking.
    T,
}

impl std::fmt::Display for SelectionMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SelectionMode::D => write!(f, "D"),
            SelectionMode::C => write!(f, "C"),
            SelectionMode::T => write!(f, "T"),
        }
    }
}

/// Per-generation record: post-selection discrepancy, whether any offspring
/// passed the gate, the raw feature ranges of the surviving population, and
/// an optional domain value (the image domain reports its walk length).
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationTrace {
    pub generation: usize,
    pub discrepancy: f64,
    pub accepted: bool,
    pub feature_ranges: Vec<(f64, f64)>,
    pub aux: Option<f64>,
}

/// Problem-specific half of the optimizer.
///
/// A domain owns its parameters (and any self-adaptive state) and produces,
/// evaluates, and mutates genotypes. All randomness flows through the
/// generator passed in, so a run is a pure function of its seed.
pub trait EvolutionDomain {
    type Genotype: Clone;
    type Error: std::error::Error + Send + Sync + 'static;

    /// Short name used in error messages.
    fn name(&self) -> &'static str;

    /// Number of raw features [`EvolutionDomain::raw_features`] returns.
    fn feature_count(&self) -> usize;

    /// Produces one gate-passing individual and the quality value recorded
    /// at its creation.
    fn init_individual(
        &mut self,
        rng: &mut dyn RngCore,
    ) -> Result<(Self::Genotype, f64), Self::Error>;

    fn mutate(
        &mut self,
        parent: &Self::Genotype,
        rng: &mut dyn RngCore,
    ) -> Result<Self::Genotype, Self::Error>;

    /// Quality of a freshly created genotype; called once per offspring.
    fn quality(
        &mut self,
        genotype: &Self::Genotype,
        rng: &mut dyn RngCore,
    ) -> Result<f64, Self::Error>;

    fn gate_passes(&self, quality: f64) -> bool;

    fn raw_features(&self, genotype: &Self::Genotype) -> Result<Vec<f64>, Self::Error>;

    /// Feedback after each generation: whether the population-level
    /// diversity objective improved. Self-adaptive operators react here.
    fn observe_outcome(&mut self, _success: bool) {}

    /// Label and current value of an auxiliary per-generation trace column.
    fn aux_trace(&self) -> Option<(&'static str, f64)> {
        None
    }
}

/// Weighted diversity contribution c(I,P) of the member at `index`.
///
/// Per feature, the sorted scaled values contribute gap products
/// `(v - prev) * (next - v)`. The holder of a unique minimum or maximum
/// gets +inf instead, so range endpoints are never removed; once an extreme
/// value is duplicated, dropping a copy loses nothing and every copy
/// contributes 0.
pub fn weighted_contribution<G>(
    index: usize,
    members: &[Individual<G>],
    specs: &[FeatureSpec],
) -> Result<f64, FeatureError> {
    Ok(weighted_contributions(members, specs)?[index])
}

/// c(I,P) for every member at once; one sort per feature.
pub fn weighted_contributions<G>(
    members: &[Individual<G>],
    specs: &[FeatureSpec],
) -> Result<Vec<f64>, FeatureError> {
    let k = members.len();
    if k < 2 {
        return Err(FeatureError::PopulationTooSmall(k));
    }
    let mut contributions = vec![0.0f64; k];
    for (axis, spec) in specs.iter().enumerate() {
        if spec.weight == 0.0 {
            continue;
        }
        let values: Vec<f64> = members
            .iter()
            .map(|m| m.scaled_features.coords()[axis])
            .collect();
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| {
            values[a]
                .partial_cmp(&values[b])
                .unwrap()
                .then(a.cmp(&b))
        });
        let min_value = values[order[0]];
        let max_value = values[order[k - 1]];
        let min_unique = values.iter().filter(|&&v| v == min_value).count() == 1;
        let max_unique = values.iter().filter(|&&v| v == max_value).count() == 1;
        for (position, &member) in order.iter().enumerate() {
            let v = values[member];
            let gap = if v == min_value {
                if min_unique {
                    f64::INFINITY
                } else {
                    0.0
                }
            } else if v == max_value {
                if max_unique {
                    f64::INFINITY
                } else {
                    0.0
                }
            } else {
                (v - values[order[position - 1]]) * (values[order[position + 1]] - v)
            };
            contributions[member] += spec.weight * gap;
        }
    }
    Ok(contributions)
}

/// Population-level contribution diversity: the sum of all finite member
/// contributions. Used as the success signal for mode `C`, where no
/// discrepancy value is being optimized.
pub fn population_contribution<G>(
    members: &[Individual<G>],
    specs: &[FeatureSpec],
) -> Result<f64, FeatureError> {
    let k = members.len();
    if k < 2 {
        return Err(FeatureError::PopulationTooSmall(k));
    }
    let mut total = 0.0;
    for (axis, spec) in specs.iter().enumerate() {
        if spec.weight == 0.0 {
            continue;
        }
        let mut values: Vec<f64> = members
            .iter()
            .map(|m| m.scaled_features.coords()[axis])
            .collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for s in 1..k.saturating_sub(1) {
            total += spec.weight * (values[s] - values[s - 1]) * (values[s + 1] - values[s]);
        }
    }
    Ok(total)
}

/// Shrinks the population to `mu` members by repeated single removals.
pub fn survivor_selection<G>(
    members: &mut Vec<Individual<G>>,
    mu: usize,
    mode: SelectionMode,
    specs: &[FeatureSpec],
    measure: DiscrepancyMeasure,
) -> Result<(), EaError> {
    debug_assert!(mu >= 1);
    while members.len() > mu {
        let victim = match mode {
            SelectionMode::D => {
                let (tied, _) = min_removal_scan_with(&point_set_of(members)?, measure)?;
                tied[0]
            }
            SelectionMode::C => {
                let contributions = weighted_contributions(members, specs)?;
                argmin(&contributions)
            }
            SelectionMode::T => {
                let (tied, _) = min_removal_scan_with(&point_set_of(members)?, measure)?;
                let contributions = weighted_contributions(members, specs)?;
                let mut best = tied[0];
                for &candidate in &tied[1..] {
                    if contributions[candidate] < contributions[best] {
                        best = candidate;
                    }
                }
                best
            }
        };
        members.remove(victim);
    }
    Ok(())
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (index, value) in values.iter().enumerate().skip(1) {
        if *value < values[best] {
            best = index;
        }
    }
    best
}

/// The scaled feature vectors of a population as a point multiset.
pub fn point_set_of<G>(members: &[Individual<G>]) -> Result<PointSet, DiscrepancyError> {
    PointSet::new(members.iter().map(|m| m.scaled_features.clone()).collect())
}

/// Static parameters of one optimizer run.
#[derive(Debug, Clone)]
pub struct EaConfig {
    pub mu: usize,
    pub lambda: usize,
    pub generations: usize,
    pub mode: SelectionMode,
    pub specs: Vec<FeatureSpec>,
    pub measure: DiscrepancyMeasure,
}

impl EaConfig {
    pub fn validate(&self) -> Result<(), EaError> {
        if self.mu < 1 {
            return Err(EaError::InvalidConfig("mu must be at least 1".into()));
        }
        if self.lambda < 1 {
            return Err(EaError::InvalidConfig("lambda must be at least 1".into()));
        }
        if self.generations < 1 {
            return Err(EaError::InvalidConfig(
                "generations must be at least 1".into(),
            ));
        }
        let d = self.specs.len();
        if !(1..=3).contains(&d) {
            return Err(EaError::InvalidConfig(format!(
                "exact discrepancy supports 1 to 3 features, got {d}"
            )));
        }
        for spec in &self.specs {
            spec.validate()?;
        }
        Ok(())
    }
}

/// Result of a completed run.
#[derive(Debug, Clone)]
pub struct EaRun<G> {
    /// Discrepancy of the freshly initialized population.
    pub initial_discrepancy: f64,
    /// One entry per generation.
    pub trace: Vec<GenerationTrace>,
    /// Final population of exactly `mu` gate-passing members.
    pub population: Vec<Individual<G>>,
    /// Stored-quality gate failures observed in any post-selection
    /// population; always 0 unless the engine is broken.
    pub gate_violations: usize,
}

/// One generation: lambda uniformly drawn parents (with replacement) each
/// produce one offspring; gate-passing offspring join the population and
/// survivor selection restores size `mu`. Returns the trace entry.
pub fn ea_generation<D: EvolutionDomain>(
    members: &mut Vec<Individual<D::Genotype>>,
    config: &EaConfig,
    domain: &mut D,
    rng: &mut dyn RngCore,
    generation: usize,
) -> Result<GenerationTrace, EaError> {
    let aux = domain.aux_trace().map(|(_, value)| value);
    let mut accepted = false;
    for _ in 0..config.lambda {
        let parent = rng.gen_range(0..config.mu);
        let genotype = domain
            .mutate(&members[parent].genotype, rng)
            .map_err(|e| EaError::Mutation(Box::new(e)))?;
        let quality = domain
            .quality(&genotype, rng)
            .map_err(|e| EaError::Quality(Box::new(e)))?;
        if domain.gate_passes(quality) {
            let raw_features = domain
                .raw_features(&genotype)
                .map_err(|e| EaError::FeatureExtraction(Box::new(e)))?;
            let scaled_features = scale_features(&raw_features, &config.specs)?;
            members.push(Individual {
                genotype,
                raw_features,
                scaled_features,
                quality,
            });
            accepted = true;
        }
    }
    survivor_selection(members, config.mu, config.mode, &config.specs, config.measure)?;
    let discrepancy = config.measure.evaluate(&point_set_of(members)?)?;
    Ok(GenerationTrace {
        generation,
        discrepancy,
        accepted,
        feature_ranges: feature_ranges(members, config.specs.len()),
        aux,
    })
}

/// Runs the full optimizer: initializes `mu` gate-passing individuals, then
/// executes exactly `generations` generations. Identical config and seed
/// produce an identical run.
pub fn run_ea<D: EvolutionDomain>(
    config: &EaConfig,
    domain: &mut D,
    rng: &mut dyn RngCore,
) -> Result<EaRun<D::Genotype>, EaError> {
    config.validate()?;
    if domain.feature_count() != config.specs.len() {
        return Err(EaError::InvalidConfig(format!(
            "domain `{}` extracts {} features but {} specs were configured",
            domain.name(),
            domain.feature_count(),
            config.specs.len()
        )));
    }

    let mut members: Vec<Individual<D::Genotype>> = Vec::with_capacity(config.mu + config.lambda);
    for _ in 0..config.mu {
        let (genotype, quality) =
            domain
                .init_individual(rng)
                .map_err(|e| EaError::Initialization {
                    domain: domain.name().to_string(),
                    source: Box::new(e),
                })?;
        debug_assert!(domain.gate_passes(quality));
        let raw_features = domain
            .raw_features(&genotype)
            .map_err(|e| EaError::FeatureExtraction(Box::new(e)))?;
        let scaled_features = scale_features(&raw_features, &config.specs)?;
        members.push(Individual {
            genotype,
            raw_features,
            scaled_features,
            quality,
        });
    }

    let initial_discrepancy = config.measure.evaluate(&point_set_of(&members)?)?;
    let mut previous_discrepancy = initial_discrepancy;
    let mut previous_contribution = if config.mode == SelectionMode::C {
        population_contribution(&members, &config.specs)?
    } else {
        0.0
    };

    let mut trace = Vec::with_capacity(config.generations);
    let mut gate_violations = 0usize;
    for generation in 1..=config.generations {
        let entry = ea_generation(&mut members, config, domain, rng, generation)?;
        gate_violations += members
            .iter()
            .filter(|m| !domain.gate_passes(m.quality))
            .count();
        let success = match config.mode {
            SelectionMode::D | SelectionMode::T => entry.discrepancy < previous_discrepancy,
            SelectionMode::C => {
                let contribution = population_contribution(&members, &config.specs)?;
                let improved = contribution > previous_contribution;
                previous_contribution = contribution;
                improved
            }
        };
        domain.observe_outcome(success);
        previous_discrepancy = entry.discrepancy;
        trace.push(entry);
    }

    Ok(EaRun {
        initial_discrepancy,
        trace,
        population: members,
        gate_violations,
    })
}

fn feature_ranges<G>(members: &[Individual<G>], d: usize) -> Vec<(f64, f64)> {
    (0..d)
        .map(|axis| {
            let mut min = f64::INFINITY;
            let mut max = f64::NEG_INFINITY;
            for member in members {
                let v = member.raw_features[axis];
                min = min.min(v);
                max = max.max(v);
            }
            (min, max)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec(name: &str, f_min: f64, f_max: f64, weight: f64) -> FeatureSpec {
        FeatureSpec::new(name, f_min, f_max, weight).unwrap()
    }

    fn unit_specs(d: usize) -> Vec<FeatureSpec> {
        (0..d).map(|i| spec(&format!("f{i}"), 0.0, 1.0, 1.0)).collect()
    }

    fn individual(coords: &[f64], specs: &[FeatureSpec]) -> Individual<Vec<f64>> {
        let scaled = scale_features(coords, specs).unwrap();
        Individual {
            genotype: coords.to_vec(),
            raw_features: coords.to_vec(),
            scaled_features: scaled,
            quality: 1.0,
        }
    }

    #[test]
    fn scaling_examples() {
        let specs = vec![spec("f", 0.0, 2.0, 1.0)];
        assert_eq!(scale_features(&[1.0], &specs).unwrap().coords(), &[0.5]);
        assert_eq!(scale_features(&[3.0], &specs).unwrap().coords(), &[1.0]);
        assert_eq!(scale_features(&[-1.0], &specs).unwrap().coords(), &[0.0]);
    }

    #[test]
    fn scaling_rejects_empty_range() {
        assert!(matches!(
            FeatureSpec::new("f", 2.0, 2.0, 1.0),
            Err(FeatureError::EmptyRange { .. })
        ));
        assert!(FeatureSpec::new("f", 3.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn contribution_gap_product_and_sentinels() {
        let specs = unit_specs(1);
        let members: Vec<_> = [[0.1], [0.4], [0.9]]
            .iter()
            .map(|c| individual(c, &specs))
            .collect();
        let c = weighted_contributions(&members, &specs).unwrap();
        assert_eq!(c[0], f64::INFINITY);
        assert!((c[1] - 0.15).abs() < 1e-15);
        assert_eq!(c[2], f64::INFINITY);
        assert_eq!(weighted_contribution(1, &members, &specs).unwrap(), c[1]);
    }

    #[test]
    fn contribution_duplicate_extreme_is_zero() {
        let specs = unit_specs(1);
        let members: Vec<_> = [[0.2], [0.2], [0.8]]
            .iter()
            .map(|c| individual(c, &specs))
            .collect();
        let c = weighted_contributions(&members, &specs).unwrap();
        // the duplicated minimum is safe to drop, so both copies score 0
        assert_eq!(c[0], 0.0);
        assert_eq!(c[1], 0.0);
        assert_eq!(c[2], f64::INFINITY); // unique maximum stays
    }

    #[test]
    fn contribution_zero_weight_feature_is_ignored() {
        let specs = vec![spec("a", 0.0, 1.0, 0.0), spec("b", 0.0, 1.0, 1.0)];
        let members: Vec<_> = [[0.9, 0.1], [0.1, 0.4], [0.5, 0.9]]
            .iter()
            .map(|c| individual(c, &specs))
            .collect();
        let c = weighted_contributions(&members, &specs).unwrap();
        // only feature b counts: 0.1 and 0.9 are extremes, 0.4 is interior
        assert_eq!(c[0], f64::INFINITY);
        assert!((c[1] - 0.15).abs() < 1e-15);
        assert_eq!(c[2], f64::INFINITY);
    }

    #[test]
    fn contribution_requires_two_members() {
        let specs = unit_specs(1);
        let members = vec![individual(&[0.5], &specs)];
        assert!(matches!(
            weighted_contributions(&members, &specs),
            Err(FeatureError::PopulationTooSmall(1))
        ));
    }

    #[test]
    fn population_contribution_sums_interior_gap_products() {
        let specs = unit_specs(2);
        let members: Vec<_> = [[0.1, 0.3], [0.35, 0.8], [0.6, 0.1], [0.9, 0.55]]
            .iter()
            .map(|c| individual(c, &specs))
            .collect();
        // feature 0: 0.25*0.25 + 0.25*0.3; feature 1: 0.2*0.25 + 0.25*0.25
        let expected = (0.0625 + 0.075) + (0.05 + 0.0625);
        let total = population_contribution(&members, &specs).unwrap();
        assert!((total - expected).abs() < 1e-12);
    }

    #[test]
    fn population_contribution_matches_finite_sum_in_one_dimension() {
        // with a single feature the finite member contributions are exactly
        // the interior gap products
        let specs = unit_specs(1);
        let members: Vec<_> = [[0.1], [0.4], [0.6], [0.9]]
            .iter()
            .map(|c| individual(c, &specs))
            .collect();
        let per_member = weighted_contributions(&members, &specs).unwrap();
        let finite_sum: f64 = per_member.iter().filter(|v| v.is_finite()).sum();
        let total = population_contribution(&members, &specs).unwrap();
        assert!((total - finite_sum).abs() < 1e-12);
        assert!((total - 0.12).abs() < 1e-12);
    }

    #[test]
    fn survivor_selection_keeps_population_unchanged_at_capacity() {
        let specs = unit_specs(2);
        let mut members: Vec<_> = [[0.2, 0.2], [0.8, 0.8]]
            .iter()
            .map(|c| individual(c, &specs))
            .collect();
        let before: Vec<Vec<f64>> = members.iter().map(|m| m.raw_features.clone()).collect();
        survivor_selection(
            &mut members,
            2,
            SelectionMode::D,
            &specs,
            DiscrepancyMeasure::TwoSided,
        )
        .unwrap();
        let after: Vec<Vec<f64>> = members.iter().map(|m| m.raw_features.clone()).collect();
        assert_eq!(before, after);
    }

    #[test]
    fn survivor_selection_mode_d_removes_corner_point() {
        let specs = unit_specs(2);
        let mut members: Vec<_> = [[1.0, 1.0], [0.5, 0.5]]
            .iter()
            .map(|c| individual(c, &specs))
            .collect();
        survivor_selection(
            &mut members,
            1,
            SelectionMode::D,
            &specs,
            DiscrepancyMeasure::TwoSided,
        )
        .unwrap();
        assert_eq!(members.len(), 1);
        assert_eq!(members[0].raw_features, vec![0.5, 0.5]);
    }

    #[test]
    fn survivor_selection_mode_t_breaks_duplicate_tie_by_index() {
        // the two duplicates tie both in removal discrepancy and in
        // contribution, so the cascade ends at the lower index
        let specs = unit_specs(2);
        let mut members: Vec<_> = [[0.1, 0.1], [0.1, 0.1], [0.9, 0.9]]
            .iter()
            .map(|c| individual(c, &specs))
            .collect();
        members[0].quality = 10.0; // marker to identify which copy survives
        survivor_selection(
            &mut members,
            2,
            SelectionMode::T,
            &specs,
            DiscrepancyMeasure::TwoSided,
        )
        .unwrap();
        assert_eq!(members.len(), 2);
        // index 0 was removed, so the marker is gone
        assert!(members.iter().all(|m| m.quality == 1.0));
    }

    /// Minimal deterministic domain over points in [0,1]^d. Mutation adds a
    /// uniform offset and clamps; quality is the first coordinate when
    /// `gated` is set (gate at >= 0.0 always passes) so gate rejection can
    /// be forced by construction.
    struct ToyDomain {
        d: usize,
        step: f64,
        reject_all_offspring: bool,
    }

    #[derive(Debug, Error)]
    #[error("toy domain never fails")]
    struct ToyError;

    impl EvolutionDomain for ToyDomain {
        type Genotype = Vec<f64>;
        type Error = ToyError;

        fn name(&self) -> &'static str {
            "toy"
        }

        fn feature_count(&self) -> usize {
            self.d
        }

        fn init_individual(
            &mut self,
            rng: &mut dyn rand::RngCore,
        ) -> Result<(Self::Genotype, f64), Self::Error> {
            let g: Vec<f64> = (0..self.d).map(|_| rand::Rng::gen_range(&mut *rng, 0.0..=1.0)).collect();
            Ok((g, 1.0))
        }

        fn mutate(
            &mut self,
            parent: &Self::Genotype,
            rng: &mut dyn rand::RngCore,
        ) -> Result<Self::Genotype, Self::Error> {
            Ok(parent
                .iter()
                .map(|v| (v + rand::Rng::gen_range(&mut *rng, -self.step..=self.step)).clamp(0.0, 1.0))
                .collect())
        }

        fn quality(
            &mut self,
            _genotype: &Self::Genotype,
            _rng: &mut dyn rand::RngCore,
        ) -> Result<f64, Self::Error> {
            Ok(if self.reject_all_offspring { -1.0 } else { 1.0 })
        }

        fn gate_passes(&self, quality: f64) -> bool {
            quality >= 0.0
        }

        fn raw_features(&self, genotype: &Self::Genotype) -> Result<Vec<f64>, Self::Error> {
            Ok(genotype.clone())
        }
    }

    fn toy_config(mode: SelectionMode, mu: usize, generations: usize, d: usize) -> EaConfig {
        EaConfig {
            mu,
            lambda: 1,
            generations,
            mode,
            specs: unit_specs(d),
            measure: DiscrepancyMeasure::TwoSided,
        }
    }

    #[test]
    fn run_rejects_zero_generations() {
        let config = toy_config(SelectionMode::D, 4, 0, 2);
        let mut domain = ToyDomain {
            d: 2,
            step: 0.1,
            reject_all_offspring: false,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            run_ea(&config, &mut domain, &mut rng),
            Err(EaError::InvalidConfig(_))
        ));
    }

    #[test]
    fn rejected_offspring_leaves_population_unchanged() {
        let config = toy_config(SelectionMode::D, 5, 10, 2);
        let mut domain = ToyDomain {
            d: 2,
            step: 0.1,
            reject_all_offspring: true,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let run = run_ea(&config, &mut domain, &mut rng).unwrap();
        assert!(run.trace.iter().all(|t| !t.accepted));
        assert!(run
            .trace
            .iter()
            .all(|t| t.discrepancy == run.initial_discrepancy));
        assert_eq!(run.population.len(), 5);
    }

    #[test]
    fn population_size_and_gate_hold_every_generation() {
        for mode in [SelectionMode::D, SelectionMode::C, SelectionMode::T] {
            let config = toy_config(mode, 6, 40, 2);
            let mut domain = ToyDomain {
                d: 2,
                step: 0.15,
                reject_all_offspring: false,
            };
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let run = run_ea(&config, &mut domain, &mut rng).unwrap();
            assert_eq!(run.population.len(), 6);
            assert_eq!(run.gate_violations, 0);
            assert_eq!(run.trace.len(), 40);
        }
    }

    #[test]
    fn discrepancy_is_monotone_for_modes_d_and_t() {
        for mode in [SelectionMode::D, SelectionMode::T] {
            let config = toy_config(mode, 8, 60, 2);
            let mut domain = ToyDomain {
                d: 2,
                step: 0.2,
                reject_all_offspring: false,
            };
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let run = run_ea(&config, &mut domain, &mut rng).unwrap();
            let mut previous = run.initial_discrepancy;
            for entry in &run.trace {
                assert!(
                    entry.discrepancy <= previous + 1e-12,
                    "mode {mode}: generation {} rose from {previous} to {}",
                    entry.generation,
                    entry.discrepancy
                );
                previous = entry.discrepancy;
            }
        }
    }

    #[test]
    fn identical_seeds_give_identical_runs() {
        let config = toy_config(SelectionMode::T, 5, 30, 2);
        let mut runs = Vec::new();
        for _ in 0..2 {
            let mut domain = ToyDomain {
                d: 2,
                step: 0.15,
                reject_all_offspring: false,
            };
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            runs.push(run_ea(&config, &mut domain, &mut rng).unwrap());
        }
        assert_eq!(runs[0].trace, runs[1].trace);
        assert_eq!(runs[0].initial_discrepancy, runs[1].initial_discrepancy);
        let a: Vec<&[f64]> = runs[0].population.iter().map(|m| m.raw_features.as_slice()).collect();
        let b: Vec<&[f64]> = runs[1].population.iter().map(|m| m.raw_features.as_slice()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn scaled_features_stay_in_unit_interval() {
        let config = toy_config(SelectionMode::D, 5, 25, 3);
        let mut domain = ToyDomain {
            d: 3,
            step: 0.3,
            reject_all_offspring: false,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let run = run_ea(&config, &mut domain, &mut rng).unwrap();
        for member in &run.population {
            for &c in member.scaled_features.coords() {
                assert!((0.0..=1.0).contains(&c));
            }
        }
    }

    proptest! {
        #[test]
        fn scaling_always_lands_in_unit_interval(
            raw in prop::collection::vec(-1e6..1e6f64, 1..=3),
            f_min in -100.0..100.0f64,
            width in 0.001..100.0f64,
        ) {
            let specs: Vec<FeatureSpec> = (0..raw.len())
                .map(|i| FeatureSpec::new(format!("f{i}"), f_min, f_min + width, 1.0).unwrap())
                .collect();
            let point = scale_features(&raw, &specs).unwrap();
            for &c in point.coords() {
                prop_assert!((0.0..=1.0).contains(&c));
            }
        }

        #[test]
        fn contribution_argmin_is_weight_scale_invariant(
            rows in prop::collection::vec(
                prop::collection::vec(0.0..=1.0f64, 2),
                3..=10,
            ),
            scale in 0.01..100.0f64,
        ) {
            let base = unit_specs(2);
            let scaled: Vec<FeatureSpec> = base
                .iter()
                .map(|s| FeatureSpec::new(s.name.clone(), s.f_min, s.f_max, s.weight * scale).unwrap())
                .collect();
            let members: Vec<_> = rows.iter().map(|r| individual(r, &base)).collect();
            let a = weighted_contributions(&members, &base).unwrap();
            let b = weighted_contributions(&members, &scaled).unwrap();
            prop_assert_eq!(argmin(&a), argmin(&b));
        }
    }
}
