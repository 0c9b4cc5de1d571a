//! Experiment runner: JSON config ingestion, seeded repetitions, summary
//! statistics, and CSV export of traces, populations, and feature vectors.
//!
//! One experiment executes `repetitions` independent optimizer runs with
//! seeds `base_seed + i` and writes, per repetition,
//! `<outdir>/rep_<i>/{trace.csv, population.csv, features.csv, genotypes/}`
//! plus a `summary.csv` at the experiment root. Reruns with the same config
//! and seed produce byte-identical files regardless of the worker count.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::discrepancy::{DiscrepancyError, DiscrepancyMeasure, PointSet};
use crate::diversity::{
    run_ea, EaConfig, EaError, EaRun, FeatureSpec, GenerationTrace, Individual, SelectionMode,
};
use crate::image::{ImageDomain, ImageError, ImageFeature, ImageParams, RasterImage, WalkParams};
use crate::tsp::{TspDomain, TspError, TspFeature, TspInstance, TspParams};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config key {key}: {message}")]
    Config { key: String, message: String },
    #[error("config parse: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("i/o on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Ea(#[from] EaError),
    #[error(transparent)]
    Tsp(#[from] TspError),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Discrepancy(#[from] DiscrepancyError),
}

fn config_error(key: &str, message: impl Into<String>) -> HarnessError {
    HarnessError::Config {
        key: key.to_string(),
        message: message.into(),
    }
}

fn io_at(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Which problem domain an experiment runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Tsp,
    Image,
}

/// TSP-specific configuration section.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TspSection {
    /// Number of cities (4..=18; the exact solver bounds the size).
    pub n: usize,
    /// Mutation offset standard deviation; default 0.025.
    #[serde(default)]
    pub sigma: Option<f64>,
    /// Per-city mutation probability; default 3/n.
    #[serde(default)]
    pub p_m: Option<f64>,
    /// Evaluation budget per initialization hill-climb; default 20000.
    #[serde(default)]
    pub init_budget: Option<usize>,
}

/// Image-specific configuration section.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageSection {
    /// Path of the reference image (binary PPM, maxval 255).
    pub reference: PathBuf,
    #[serde(default)]
    pub walk: Option<WalkParams>,
    #[serde(default)]
    pub circular_hue_mean: bool,
}

/// A full experiment: algorithm variant, features, budgets, seeds, output.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: DomainKind,
    pub mode: SelectionMode,
    pub mu: usize,
    pub lambda: usize,
    pub generations: usize,
    pub features: Vec<FeatureSpec>,
    /// Quality threshold: minimum approximation ratio for TSP (default
    /// 1.18), MSE bound for images (default 500).
    #[serde(default)]
    pub alpha: Option<f64>,
    pub repetitions: usize,
    pub base_seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Minimize the literal one-sided discrepancy instead of the standard
    /// two-sided star discrepancy. Comparison runs only.
    #[serde(default)]
    pub one_sided: bool,
    #[serde(default)]
    pub tsp: Option<TspSection>,
    #[serde(default)]
    pub image: Option<ImageSection>,
}

impl ExperimentConfig {
    pub fn measure(&self) -> DiscrepancyMeasure {
        if self.one_sided {
            DiscrepancyMeasure::OneSided
        } else {
            DiscrepancyMeasure::TwoSided
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.mu < 2 {
            return Err(config_error("mu", "must be at least 2"));
        }
        if self.lambda < 1 {
            return Err(config_error("lambda", "must be at least 1"));
        }
        if self.generations < 1 {
            return Err(config_error("generations", "must be at least 1"));
        }
        if self.repetitions < 1 {
            return Err(config_error("repetitions", "must be at least 1"));
        }
        let d = self.features.len();
        if !(1..=3).contains(&d) {
            return Err(config_error(
                "features",
                format!("exact discrepancy supports 1 to 3 features, got {d}"),
            ));
        }
        for (i, spec) in self.features.iter().enumerate() {
            spec.validate()
                .map_err(|e| config_error(&format!("features[{i}]"), e.to_string()))?;
            let known = match self.domain {
                DomainKind::Tsp => TspFeature::from_name(&spec.name).is_some(),
                DomainKind::Image => ImageFeature::from_name(&spec.name).is_some(),
            };
            if !known {
                return Err(config_error(
                    &format!("features[{i}].name"),
                    format!("unknown feature `{}` for this domain", spec.name),
                ));
            }
        }
        match self.domain {
            DomainKind::Tsp => {
                if self.image.is_some() {
                    return Err(config_error("image", "not used when domain = tsp"));
                }
                let section = self
                    .tsp
                    .as_ref()
                    .ok_or_else(|| config_error("tsp", "section required when domain = tsp"))?;
                self.tsp_params(section)
                    .map_err(|e| config_error("tsp", e.to_string()))?;
            }
            DomainKind::Image => {
                if self.tsp.is_some() {
                    return Err(config_error("tsp", "not used when domain = image"));
                }
                let section = self.image.as_ref().ok_or_else(|| {
                    config_error("image", "section required when domain = image")
                })?;
                if !section.reference.is_file() {
                    return Err(config_error(
                        "image.reference",
                        format!("reference image not found: {}", section.reference.display()),
                    ));
                }
                if let Some(walk) = &section.walk {
                    walk.validate()
                        .map_err(|e| config_error("image.walk", e.to_string()))?;
                }
                if let Some(alpha) = self.alpha {
                    if !(alpha > 0.0) {
                        return Err(config_error("alpha", "mse limit must be positive"));
                    }
                }
            }
        }
        Ok(())
    }

    fn tsp_params(&self, section: &TspSection) -> Result<TspParams, TspError> {
        let mut params = TspParams::new(section.n, self.alpha.unwrap_or(1.18))?;
        if let Some(sigma) = section.sigma {
            params.sigma = sigma;
        }
        if let Some(p_m) = section.p_m {
            params.p_m = p_m;
        }
        if let Some(budget) = section.init_budget {
            params.init_budget = budget;
        }
        params.validate()?;
        Ok(params)
    }

    fn ea_config(&self) -> EaConfig {
        EaConfig {
            mu: self.mu,
            lambda: self.lambda,
            generations: self.generations,
            mode: self.mode,
            specs: self.features.clone(),
            measure: self.measure(),
        }
    }

    fn build_domain(&self) -> Result<DomainProto, HarnessError> {
        match self.domain {
            DomainKind::Tsp => {
                let section = self
                    .tsp
                    .as_ref()
                    .ok_or_else(|| config_error("tsp", "section required when domain = tsp"))?;
                let params = self.tsp_params(section)?;
                let features = self
                    .features
                    .iter()
                    .map(|s| {
                        TspFeature::from_name(&s.name).ok_or_else(|| {
                            config_error("features", format!("unknown tsp feature `{}`", s.name))
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(DomainProto::Tsp(TspDomain::new(params, features)?))
            }
            DomainKind::Image => {
                let section = self.image.as_ref().ok_or_else(|| {
                    config_error("image", "section required when domain = image")
                })?;
                let reference = RasterImage::read_ppm(&section.reference)?;
                let params = ImageParams {
                    mse_limit: self.alpha.unwrap_or(500.0),
                    walk: section.walk.clone().unwrap_or_default(),
                    circular_hue_mean: section.circular_hue_mean,
                };
                let features = self
                    .features
                    .iter()
                    .map(|s| {
                        ImageFeature::from_name(&s.name).ok_or_else(|| {
                            config_error("features", format!("unknown image feature `{}`", s.name))
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(DomainProto::Image(ImageDomain::new(
                    reference, params, features,
                )?))
            }
        }
    }
}

#[derive(Clone)]
enum DomainProto {
    Tsp(TspDomain),
    Image(ImageDomain),
}

/// Parses and validates a UTF-8 JSON experiment config; unknown keys are
/// rejected and every invariant violation names the offending key.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(io_at(path))?;
    let config: ExperimentConfig = serde_json::from_str(&text)?;
    config.validate()?;
    Ok(config)
}

/// Minimum, arithmetic mean, and population standard deviation.
///
/// Panics on an empty slice; statistics of nothing are a caller bug.
pub fn summarize(values: &[f64]) -> (f64, f64, f64) {
    assert!(!values.is_empty(), "summarize needs at least one value");
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64;
    (min, mean, variance.sqrt())
}

/// What one repetition produced, independent of the genotype domain.
#[derive(Debug, Clone)]
pub struct RepetitionData {
    pub initial_discrepancy: f64,
    pub final_discrepancy: f64,
    pub trace: Vec<GenerationTrace>,
    /// Creation-time quality of each final population member.
    pub final_qualities: Vec<f64>,
    pub gate_violations: usize,
}

#[derive(Debug, Clone)]
pub struct RepetitionOutcome {
    pub repetition: usize,
    pub seed: u64,
    pub result: Result<RepetitionData, String>,
}

/// Aggregate of one experiment.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub outcomes: Vec<RepetitionOutcome>,
    /// (min, mean, std) of the final discrepancies over completed
    /// repetitions; `None` when every repetition failed.
    pub aggregate: Option<(f64, f64, f64)>,
}

impl RunSummary {
    pub fn all_completed(&self) -> bool {
        self.outcomes.iter().all(|o| o.result.is_ok())
    }

    fn from_outcomes(outcomes: Vec<RepetitionOutcome>) -> Self {
        let finals: Vec<f64> = outcomes
            .iter()
            .filter_map(|o| o.result.as_ref().ok().map(|d| d.final_discrepancy))
            .collect();
        let aggregate = if finals.is_empty() {
            None
        } else {
            Some(summarize(&finals))
        };
        Self { outcomes, aggregate }
    }
}

/// Runs every repetition (seeds `base_seed + i`), writes all artifacts under
/// `output_dir`, and returns the summary. `jobs` caps the worker threads;
/// results do not depend on it.
pub fn run_experiment(config: &ExperimentConfig, jobs: usize) -> Result<RunSummary, HarnessError> {
    config.validate()?;
    let output_dir = config
        .output_dir
        .clone()
        .ok_or_else(|| config_error("output_dir", "required to run an experiment"))?;
    std::fs::create_dir_all(&output_dir).map_err(io_at(&output_dir))?;

    let normalized = serde_json::to_string_pretty(config)?;
    let config_path = output_dir.join("config.json");
    std::fs::write(&config_path, normalized.as_bytes()).map_err(io_at(&config_path))?;

    let proto = config.build_domain()?;
    let ea_config = config.ea_config();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| config_error("jobs", e.to_string()))?;
    let outcomes: Vec<RepetitionOutcome> = pool.install(|| {
        (0..config.repetitions)
            .into_par_iter()
            .map(|repetition| {
                let seed = config.base_seed.wrapping_add(repetition as u64);
                let rep_dir = output_dir.join(format!("rep_{repetition:03}"));
                let result =
                    run_single_repetition(&ea_config, proto.clone(), seed, &rep_dir)
                        .map_err(|e| e.to_string());
                RepetitionOutcome {
                    repetition,
                    seed,
                    result,
                }
            })
            .collect()
    });

    let summary = RunSummary::from_outcomes(outcomes);
    write_summary_csv(&summary, &output_dir.join("summary.csv"))?;
    Ok(summary)
}

/// One independent run: builds a fresh domain state from the prototype,
/// seeds the generator, executes the optimizer, and writes this
/// repetition's artifact files.
fn run_single_repetition(
    ea_config: &EaConfig,
    proto: DomainProto,
    seed: u64,
    rep_dir: &Path,
) -> Result<RepetitionData, HarnessError> {
    std::fs::create_dir_all(rep_dir).map_err(io_at(rep_dir))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match proto {
        DomainProto::Tsp(mut domain) => {
            let run = run_ea(ea_config, &mut domain, &mut rng)?;
            write_artifacts(rep_dir, &run, &ea_config.specs, None, "tsp", |g, path| {
                std::fs::write(path, g.to_text()).map_err(io_at(path))
            })?;
            Ok(repetition_data(run))
        }
        DomainProto::Image(mut domain) => {
            let run = run_ea(ea_config, &mut domain, &mut rng)?;
            write_artifacts(
                rep_dir,
                &run,
                &ea_config.specs,
                Some("t_max"),
                "ppm",
                |g: &RasterImage, path| g.write_ppm(path).map_err(HarnessError::from),
            )?;
            Ok(repetition_data(run))
        }
    }
}

fn repetition_data<G>(run: EaRun<G>) -> RepetitionData {
    RepetitionData {
        initial_discrepancy: run.initial_discrepancy,
        final_discrepancy: run
            .trace
            .last()
            .map(|t| t.discrepancy)
            .unwrap_or(run.initial_discrepancy),
        final_qualities: run.population.iter().map(|m| m.quality).collect(),
        gate_violations: run.gate_violations,
        trace: run.trace,
    }
}

fn write_artifacts<G>(
    rep_dir: &Path,
    run: &EaRun<G>,
    specs: &[FeatureSpec],
    aux_label: Option<&str>,
    genotype_ext: &str,
    write_genotype: impl Fn(&G, &Path) -> Result<(), HarnessError>,
) -> Result<(), HarnessError> {
    let trace_path = rep_dir.join("trace.csv");
    std::fs::write(&trace_path, trace_csv_string(&run.trace, specs, aux_label))
        .map_err(io_at(&trace_path))?;

    let points = crate::diversity::point_set_of(&run.population)?;
    let population_path = rep_dir.join("population.csv");
    std::fs::write(&population_path, points.to_csv_string()).map_err(io_at(&population_path))?;

    let features_path = rep_dir.join("features.csv");
    std::fs::write(&features_path, feature_csv_string(&run.population, specs))
        .map_err(io_at(&features_path))?;

    let genotype_dir = rep_dir.join("genotypes");
    std::fs::create_dir_all(&genotype_dir).map_err(io_at(&genotype_dir))?;
    let mut sidecar = String::from("index,path\n");
    for (index, member) in run.population.iter().enumerate() {
        let name = format!("member_{index:03}.{genotype_ext}");
        write_genotype(&member.genotype, &genotype_dir.join(&name))?;
        let _ = writeln!(sidecar, "{index},genotypes/{name}");
    }
    let sidecar_path = rep_dir.join("genotypes.csv");
    std::fs::write(&sidecar_path, sidecar).map_err(io_at(&sidecar_path))?;
    Ok(())
}

/// Trace CSV: `generation,discrepancy,accepted,<f>_min,<f>_max,...` with an
/// optional trailing domain column (e.g. `t_max`).
pub fn trace_csv_string(
    trace: &[GenerationTrace],
    specs: &[FeatureSpec],
    aux_label: Option<&str>,
) -> String {
    let mut out = String::from("generation,discrepancy,accepted");
    for spec in specs {
        let _ = write!(out, ",{}_min,{}_max", spec.name, spec.name);
    }
    if let Some(label) = aux_label {
        let _ = write!(out, ",{label}");
    }
    out.push('\n');
    for entry in trace {
        let _ = write!(
            out,
            "{},{:.16e},{}",
            entry.generation, entry.discrepancy, entry.accepted
        );
        for (min, max) in &entry.feature_ranges {
            let _ = write!(out, ",{min:.16e},{max:.16e}");
        }
        if aux_label.is_some() {
            match entry.aux {
                Some(aux) => {
                    let _ = write!(out, ",{aux:.16e}");
                }
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}

/// Feature CSV: one row per individual with raw features, scaled features,
/// and the creation-time quality.
pub fn feature_csv_string<G>(members: &[Individual<G>], specs: &[FeatureSpec]) -> String {
    let mut out = String::from("index");
    for spec in specs {
        let _ = write!(out, ",raw_{}", spec.name);
    }
    for spec in specs {
        let _ = write!(out, ",scaled_{}", spec.name);
    }
    out.push_str(",quality\n");
    for (index, member) in members.iter().enumerate() {
        let _ = write!(out, "{index}");
        for value in &member.raw_features {
            let _ = write!(out, ",{value:.16e}");
        }
        for value in member.scaled_features.coords() {
            let _ = write!(out, ",{value:.16e}");
        }
        let _ = writeln!(out, ",{:.16e}", member.quality);
    }
    out
}

/// Writes the per-individual feature CSV for a final population.
pub fn export_feature_csv<G>(
    members: &[Individual<G>],
    specs: &[FeatureSpec],
    path: &Path,
) -> Result<(), HarnessError> {
    assert!(!members.is_empty(), "export needs a non-empty population");
    std::fs::write(path, feature_csv_string(members, specs)).map_err(io_at(path))
}

fn csv_quote(text: &str) -> String {
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

fn write_summary_csv(summary: &RunSummary, path: &Path) -> Result<(), HarnessError> {
    let mut out =
        String::from("record,repetition,seed,status,initial_discrepancy,final_discrepancy,error\n");
    for outcome in &summary.outcomes {
        match &outcome.result {
            Ok(data) => {
                let _ = writeln!(
                    out,
                    "run,{},{},completed,{:.16e},{:.16e},",
                    outcome.repetition, outcome.seed, data.initial_discrepancy,
                    data.final_discrepancy
                );
            }
            Err(message) => {
                let _ = writeln!(
                    out,
                    "run,{},{},failed,,,{}",
                    outcome.repetition,
                    outcome.seed,
                    csv_quote(message)
                );
            }
        }
    }
    if let Some((min, mean, std)) = summary.aggregate {
        let _ = writeln!(out, "aggregate_min,,,,,{min:.16e},");
        let _ = writeln!(out, "aggregate_mean,,,,,{mean:.16e},");
        let _ = writeln!(out, "aggregate_std,,,,,{std:.16e},");
    }
    std::fs::write(path, out).map_err(io_at(path))
}

/// Star discrepancy of a point-set CSV file.
pub fn discrepancy_of_file(path: &Path, measure: DiscrepancyMeasure) -> Result<f64, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(io_at(path))?;
    let points = PointSet::from_csv_str(&text)?;
    Ok(measure.evaluate(&points)?)
}

/// Feature vector of a single instance file, as (name, value) pairs.
pub fn features_of_file(domain: DomainKind, path: &Path) -> Result<Vec<(String, f64)>, HarnessError> {
    match domain {
        DomainKind::Tsp => {
            let text = std::fs::read_to_string(path).map_err(io_at(path))?;
            let instance = TspInstance::from_text(&text)?;
            Ok(TspFeature::ALL
                .iter()
                .map(|f| (f.name().to_string(), f.extract(&instance)))
                .collect())
        }
        DomainKind::Image => {
            let image = RasterImage::read_ppm(path)?;
            Ok(ImageFeature::ALL
                .iter()
                .map(|f| (f.name().to_string(), f.extract(&image, false)))
                .collect())
        }
    }
}
