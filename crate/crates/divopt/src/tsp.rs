//! TSP instances as genotypes: coordinate mutation, the approximation-ratio
//! quality gate (best-of-three 2-opt against an exact Held-Karp optimum),
//! and the instance hardness features.
//!
//! Instances live in the unit square. An instance is "hard" when a 2-opt
//! local search stays noticeably above the optimal tour length; the gate
//! accepts instances whose approximation ratio reaches a threshold alpha.

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::diversity::EvolutionDomain;

/// Largest instance the exact Held-Karp solver accepts. The DP table grows
/// as 2^(n-1) * n; past this it stops being a desk-scale computation.
pub const HELD_KARP_MAX_CITIES: usize = 18;

/// Improvement threshold for 2-opt moves; exchanges closer to zero than
/// this are rounding noise and would let the scan cycle.
const TWO_OPT_MIN_IMPROVEMENT: f64 = 1e-12;

/// Attempts to redraw an offset that keeps a city inside the unit square
/// before falling back to clamping.
const MUTATION_MAX_RESAMPLES: usize = 100;

#[derive(Debug, Error)]
pub enum TspError {
    #[error("city {index} at ({x}, {y}) lies outside the unit square")]
    CityOutOfRange { index: usize, x: f64, y: f64 },
    #[error("instance must contain at least one city")]
    NoCities,
    #[error(
        "exact solver supports at most {HELD_KARP_MAX_CITIES} cities, got {0}; \
         configure a smaller instance size"
    )]
    TooLargeForExact(usize),
    #[error("degenerate instance: optimal tour length is zero (coincident cities)")]
    DegenerateInstance,
    #[error("tour is not a permutation of 0..{expected}")]
    InvalidTour { expected: usize },
    #[error(
        "initialization failed: no instance reached ratio {alpha} within {budget} \
         evaluations (best found: {best_ratio})"
    )]
    InitializationFailure {
        alpha: f64,
        budget: usize,
        best_ratio: f64,
    },
    #[error("instance parameters: {0}")]
    BadParams(String),
    #[error("instance file: {0}")]
    Parse(String),
}

/// A TSP instance: n city coordinates in [0,1]^2.
#[derive(Debug, Clone, PartialEq)]
pub struct TspInstance {
    cities: Vec<(f64, f64)>,
}

impl TspInstance {
    pub fn new(cities: Vec<(f64, f64)>) -> Result<Self, TspError> {
        if cities.is_empty() {
            return Err(TspError::NoCities);
        }
        for (index, &(x, y)) in cities.iter().enumerate() {
            if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
                return Err(TspError::CityOutOfRange { index, x, y });
            }
        }
        Ok(Self { cities })
    }

    /// Uniform random instance with `n` cities.
    pub fn random(n: usize, rng: &mut dyn RngCore) -> Self {
        let cities = (0..n)
            .map(|_| (rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=1.0)))
            .collect();
        Self { cities }
    }

    pub fn len(&self) -> usize {
        self.cities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cities.is_empty()
    }

    pub fn cities(&self) -> &[(f64, f64)] {
        &self.cities
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        let (xa, ya) = self.cities[a];
        let (xb, yb) = self.cities[b];
        let dx = xa - xb;
        let dy = ya - yb;
        (dx * dx + dy * dy).sqrt()
    }

    /// Instance text format: first line `n`, then one `x y` line per city
    /// with full-precision coordinates.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.cities.len());
        for &(x, y) in &self.cities {
            out.push_str(&format!("{x:.16e} {y:.16e}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, TspError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let n: usize = lines
            .next()
            .ok_or_else(|| TspError::Parse("empty input".into()))?
            .trim()
            .parse()
            .map_err(|e| TspError::Parse(format!("bad city count: {e}")))?;
        let mut cities = Vec::with_capacity(n);
        for line in lines {
            let mut fields = line.split_whitespace();
            let x: f64 = fields
                .next()
                .ok_or_else(|| TspError::Parse("missing x".into()))?
                .parse()
                .map_err(|e| TspError::Parse(format!("bad x: {e}")))?;
            let y: f64 = fields
                .next()
                .ok_or_else(|| TspError::Parse("missing y".into()))?
                .parse()
                .map_err(|e| TspError::Parse(format!("bad y: {e}")))?;
            cities.push((x, y));
        }
        if cities.len() != n {
            return Err(TspError::Parse(format!(
                "found {} cities, header says {n}",
                cities.len()
            )));
        }
        Self::new(cities)
    }
}

/// A Hamiltonian cycle as a permutation of city indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Tour {
    order: Vec<usize>,
}

impl Tour {
    pub fn new(order: Vec<usize>, n: usize) -> Result<Self, TspError> {
        if order.len() != n {
            return Err(TspError::InvalidTour { expected: n });
        }
        let mut seen = vec![false; n];
        for &city in &order {
            if city >= n || seen[city] {
                return Err(TspError::InvalidTour { expected: n });
            }
            seen[city] = true;
        }
        Ok(Self { order })
    }

    /// Uniform random permutation.
    pub fn random(n: usize, rng: &mut dyn RngCore) -> Self {
        use rand::seq::SliceRandom;
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        Self { order }
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// Euclidean length of the cycle, including the closing edge.
///
/// The edges are accumulated in a rotation- and direction-independent order
/// (starting at city 0, walking toward the smaller neighbor), so every
/// representation of the same cycle yields the same floating-point value.
pub fn tour_length(instance: &TspInstance, tour: &Tour) -> f64 {
    let n = instance.len();
    assert_eq!(tour.len(), n, "tour does not match instance size");
    if n == 1 {
        return 0.0;
    }
    let order = tour.order();
    let start = order.iter().position(|&c| c == 0).expect("city 0 present");
    let next = order[(start + 1) % n];
    let prev = order[(start + n - 1) % n];
    let forward = next <= prev;
    let mut length = 0.0;
    let mut position = start;
    for _ in 0..n {
        let here = order[position];
        let there = if forward {
            order[(position + 1) % n]
        } else {
            order[(position + n - 1) % n]
        };
        length += instance.distance(here, there);
        position = if forward {
            (position + 1) % n
        } else {
            (position + n - 1) % n
        };
    }
    length
}

/// 2-opt local search: repeatedly applies the first improving edge exchange
/// found in a randomized scan order until no exchange shortens the tour.
pub fn two_opt(instance: &TspInstance, start: &Tour, rng: &mut dyn RngCore) -> Tour {
    use rand::seq::SliceRandom;
    let n = instance.len();
    assert_eq!(start.len(), n, "tour does not match instance size");
    let mut order = start.order().to_vec();
    if n < 4 {
        return Tour { order };
    }

    let mut moves: Vec<(usize, usize)> = Vec::with_capacity(n * (n - 3) / 2);
    for i in 0..n - 1 {
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue; // reverses the whole cycle, changes nothing
            }
            moves.push((i, j));
        }
    }

    loop {
        moves.shuffle(rng);
        let mut improved = false;
        for &(i, j) in &moves {
            let a = order[i];
            let b = order[i + 1];
            let c = order[j];
            let d = order[(j + 1) % n];
            let delta = instance.distance(a, c) + instance.distance(b, d)
                - instance.distance(a, b)
                - instance.distance(c, d);
            if delta < -TWO_OPT_MIN_IMPROVEMENT {
                order[i + 1..=j].reverse();
                improved = true;
                break;
            }
        }
        if !improved {
            return Tour { order };
        }
    }
}

/// Tour length reached by the best of three independent 2-opt runs from
/// uniformly random start tours. This is the heuristic A(I) of the
/// approximation-ratio gate.
pub fn heuristic_value(instance: &TspInstance, rng: &mut dyn RngCore) -> f64 {
    (0..3)
        .map(|_| {
            let start = Tour::random(instance.len(), rng);
            tour_length(instance, &two_opt(instance, &start, rng))
        })
        .fold(f64::INFINITY, f64::min)
}

/// Exact optimal cycle length via Held-Karp dynamic programming.
///
/// The optimal tour is reconstructed and re-measured with [`tour_length`],
/// so the returned value is comparable, bit for bit, with any other tour
/// length of this instance.
pub fn exact_opt(instance: &TspInstance) -> Result<f64, TspError> {
    let n = instance.len();
    if n > HELD_KARP_MAX_CITIES {
        return Err(TspError::TooLargeForExact(n));
    }
    if n == 1 {
        return Ok(0.0);
    }

    let dist: Vec<Vec<f64>> = (0..n)
        .map(|a| (0..n).map(|b| instance.distance(a, b)).collect())
        .collect();

    // dp over subsets of cities 1..n-1; bit j stands for city j+1
    let m = n - 1;
    let full: usize = (1 << m) - 1;
    let mut dp = vec![f64::INFINITY; (full + 1) * m];
    let mut parent = vec![u8::MAX; (full + 1) * m];
    for j in 0..m {
        dp[(1 << j) * m + j] = dist[0][j + 1];
    }
    for mask in 1..=full {
        if mask.count_ones() < 2 {
            continue;
        }
        let mut bits = mask;
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let prev_mask = mask & !(1 << j);
            let mut best = f64::INFINITY;
            let mut best_i = u8::MAX;
            let mut prev_bits = prev_mask;
            while prev_bits != 0 {
                let i = prev_bits.trailing_zeros() as usize;
                prev_bits &= prev_bits - 1;
                let candidate = dp[prev_mask * m + i] + dist[i + 1][j + 1];
                if candidate < best {
                    best = candidate;
                    best_i = i as u8;
                }
            }
            dp[mask * m + j] = best;
            parent[mask * m + j] = best_i;
        }
    }

    let mut best = f64::INFINITY;
    let mut best_j = 0;
    for j in 0..m {
        let candidate = dp[full * m + j] + dist[j + 1][0];
        if candidate < best {
            best = candidate;
            best_j = j;
        }
    }

    let mut order = Vec::with_capacity(n);
    let mut mask = full;
    let mut j = best_j;
    loop {
        order.push(j + 1);
        let p = parent[mask * m + j];
        mask &= !(1 << j);
        if p == u8::MAX {
            break;
        }
        j = p as usize;
    }
    order.push(0);
    order.reverse();
    let tour = Tour::new(order, n).expect("reconstructed tour is a permutation");
    Ok(tour_length(instance, &tour))
}

/// Approximation ratio alpha_A(I) = A(I) / OPT(I): best-of-three 2-opt over
/// the exact optimum. Always at least 1; an instance is accepted into a
/// population when the ratio reaches the configured threshold.
pub fn approximation_ratio(instance: &TspInstance, rng: &mut dyn RngCore) -> Result<f64, TspError> {
    let opt = exact_opt(instance)?;
    if opt == 0.0 {
        return Err(TspError::DegenerateInstance);
    }
    Ok(heuristic_value(instance, rng) / opt)
}

/// Perturbs each city independently with probability `p_m` by a 2-D normal
/// offset (standard deviation `sigma` per axis). Offsets that leave the
/// unit square are redrawn for that city, with a clamp as the final
/// fallback.
pub fn mutate_instance(
    instance: &TspInstance,
    sigma: f64,
    p_m: f64,
    rng: &mut dyn RngCore,
) -> TspInstance {
    assert!(sigma > 0.0, "sigma must be positive");
    let normal = Normal::new(0.0, sigma).expect("valid normal");
    let cities = instance
        .cities()
        .iter()
        .map(|&(x, y)| {
            if !rng.gen_bool(p_m) {
                return (x, y);
            }
            let mut candidate = (x, y);
            for _ in 0..MUTATION_MAX_RESAMPLES {
                let nx = x + normal.sample(rng);
                let ny = y + normal.sample(rng);
                candidate = (nx, ny);
                if (0.0..=1.0).contains(&nx) && (0.0..=1.0).contains(&ny) {
                    return candidate;
                }
            }
            (candidate.0.clamp(0.0, 1.0), candidate.1.clamp(0.0, 1.0))
        })
        .collect();
    TspInstance { cities }
}

/// One edge of the minimum spanning tree; `parent` is the endpoint that was
/// already in the tree when the edge was added.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MstEdge {
    pub parent: usize,
    pub child: usize,
    pub weight: f64,
}

/// Euclidean minimum spanning tree via Prim's construction from city 0,
/// breaking ties toward the lowest city index. Returns n-1 edges (empty for
/// a single city).
pub fn mst(instance: &TspInstance) -> Vec<MstEdge> {
    let n = instance.len();
    if n < 2 {
        return Vec::new();
    }
    let mut in_tree = vec![false; n];
    let mut best_dist = vec![f64::INFINITY; n];
    let mut best_parent = vec![usize::MAX; n];
    best_dist[0] = 0.0;
    let mut edges = Vec::with_capacity(n - 1);
    for _ in 0..n {
        let mut u = usize::MAX;
        for v in 0..n {
            if !in_tree[v] && (u == usize::MAX || best_dist[v] < best_dist[u]) {
                u = v;
            }
        }
        in_tree[u] = true;
        if u != 0 {
            edges.push(MstEdge {
                parent: best_parent[u],
                child: u,
                weight: best_dist[u],
            });
        }
        for v in 0..n {
            if !in_tree[v] {
                let w = instance.distance(u, v);
                if w < best_dist[v] {
                    best_dist[v] = w;
                    best_parent[v] = u;
                }
            }
        }
    }
    edges
}

/// Mean over cities of the angle subtended at the city by its two nearest
/// neighbors, in radians within [0, pi]. Nearest-neighbor ties break toward
/// the lowest index; a zero-length ray (coincident neighbor) contributes an
/// angle of 0.
pub fn feature_angle_mean(instance: &TspInstance) -> f64 {
    let n = instance.len();
    assert!(n >= 3, "angle feature needs at least three cities");
    let mut total = 0.0;
    for c in 0..n {
        let mut neighbors: Vec<usize> = (0..n).filter(|&v| v != c).collect();
        neighbors.sort_by(|&a, &b| {
            instance
                .distance(c, a)
                .partial_cmp(&instance.distance(c, b))
                .unwrap()
                .then(a.cmp(&b))
        });
        let (x, y) = instance.cities()[c];
        let (xa, ya) = instance.cities()[neighbors[0]];
        let (xb, yb) = instance.cities()[neighbors[1]];
        let (ux, uy) = (xa - x, ya - y);
        let (vx, vy) = (xb - x, yb - y);
        let nu = (ux * ux + uy * uy).sqrt();
        let nv = (vx * vx + vy * vy).sqrt();
        if nu == 0.0 || nv == 0.0 {
            continue; // degenerate angle counts as 0
        }
        let cos = ((ux * vx + uy * vy) / (nu * nv)).clamp(-1.0, 1.0);
        total += cos.acos();
    }
    total / n as f64
}

/// Mean Euclidean distance from the cities to their centroid.
pub fn feature_centroid_mean_dist(instance: &TspInstance) -> f64 {
    let n = instance.len() as f64;
    let cx = instance.cities().iter().map(|c| c.0).sum::<f64>() / n;
    let cy = instance.cities().iter().map(|c| c.1).sum::<f64>() / n;
    instance
        .cities()
        .iter()
        .map(|&(x, y)| ((x - cx).powi(2) + (y - cy).powi(2)).sqrt())
        .sum::<f64>()
        / n
}

/// Mean edge weight of the minimum spanning tree.
pub fn feature_mst_dists_mean(instance: &TspInstance) -> f64 {
    let edges = mst(instance);
    assert!(!edges.is_empty(), "mst feature needs at least two cities");
    edges.iter().map(|e| e.weight).sum::<f64>() / edges.len() as f64
}

/// Mean over cities of the distance to the nearest other city.
pub fn feature_nnds_mean(instance: &TspInstance) -> f64 {
    let n = instance.len();
    assert!(n >= 2, "nearest-neighbor feature needs at least two cities");
    let mut total = 0.0;
    for c in 0..n {
        let nearest = (0..n)
            .filter(|&v| v != c)
            .map(|v| instance.distance(c, v))
            .fold(f64::INFINITY, f64::min);
        total += nearest;
    }
    total / n as f64
}

/// Mean node depth of the minimum spanning tree rooted at city 0 (the root
/// has depth 0). A single city has depth 0.
pub fn feature_mst_depth_mean(instance: &TspInstance) -> f64 {
    let n = instance.len();
    if n == 1 {
        return 0.0;
    }
    let edges = mst(instance);
    let mut adjacency = vec![Vec::new(); n];
    for edge in &edges {
        adjacency[edge.parent].push(edge.child);
        adjacency[edge.child].push(edge.parent);
    }
    let mut depth = vec![usize::MAX; n];
    depth[0] = 0;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        for &v in &adjacency[u] {
            if depth[v] == usize::MAX {
                depth[v] = depth[u] + 1;
                queue.push_back(v);
            }
        }
    }
    depth.iter().map(|&d| d as f64).sum::<f64>() / n as f64
}

/// The TSP feature battery, addressable by config name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TspFeature {
    AngleMean,
    CentroidMeanDist,
    NndsMean,
    MstDistsMean,
    MstDepthMean,
}

impl TspFeature {
    pub const ALL: [TspFeature; 5] = [
        TspFeature::AngleMean,
        TspFeature::CentroidMeanDist,
        TspFeature::NndsMean,
        TspFeature::MstDistsMean,
        TspFeature::MstDepthMean,
    ];

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "angle_mean" => Some(TspFeature::AngleMean),
            "centroid_mean_dist" => Some(TspFeature::CentroidMeanDist),
            "nnds_mean" => Some(TspFeature::NndsMean),
            "mst_dists_mean" => Some(TspFeature::MstDistsMean),
            "mst_depth_mean" => Some(TspFeature::MstDepthMean),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TspFeature::AngleMean => "angle_mean",
            TspFeature::CentroidMeanDist => "centroid_mean_dist",
            TspFeature::NndsMean => "nnds_mean",
            TspFeature::MstDistsMean => "mst_dists_mean",
            TspFeature::MstDepthMean => "mst_depth_mean",
        }
    }

    pub fn extract(&self, instance: &TspInstance) -> f64 {
        match self {
            TspFeature::AngleMean => feature_angle_mean(instance),
            TspFeature::CentroidMeanDist => feature_centroid_mean_dist(instance),
            TspFeature::NndsMean => feature_nnds_mean(instance),
            TspFeature::MstDistsMean => feature_mst_dists_mean(instance),
            TspFeature::MstDepthMean => feature_mst_depth_mean(instance),
        }
    }

    /// Default scaling range (f_min, f_max). The first four are the ranges
    /// reported for instance-diversity runs at n = 50; the MST depth range
    /// is a desk-scale default.
    pub fn default_range(&self) -> (f64, f64) {
        match self {
            TspFeature::AngleMean => (0.8, 2.8),
            TspFeature::CentroidMeanDist => (0.24, 0.6),
            TspFeature::NndsMean => (0.1, 0.7),
            TspFeature::MstDistsMean => (0.06, 0.15),
            TspFeature::MstDepthMean => (1.0, 8.0),
        }
    }
}

/// Parameters of the TSP evolution domain.
#[derive(Debug, Clone)]
pub struct TspParams {
    /// Number of cities; 4 ..= [`HELD_KARP_MAX_CITIES`].
    pub n: usize,
    /// Quality gate: accepted instances have approximation ratio >= alpha.
    pub alpha: f64,
    /// Standard deviation of the per-axis mutation offset.
    pub sigma: f64,
    /// Per-city mutation probability.
    pub p_m: f64,
    /// Evaluation budget of each initialization hill-climb.
    pub init_budget: usize,
}

impl TspParams {
    /// Desk-scale defaults for a given instance size: sigma 0.025 and
    /// p_m = 3/n, the coordinate-perturbation convention of instance
    /// evolution studies.
    pub fn new(n: usize, alpha: f64) -> Result<Self, TspError> {
        let params = Self {
            n,
            alpha,
            sigma: 0.025,
            p_m: 3.0 / n as f64,
            init_budget: 20_000,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), TspError> {
        if self.n < 4 {
            return Err(TspError::BadParams(format!(
                "n must be at least 4, got {}",
                self.n
            )));
        }
        if self.n > HELD_KARP_MAX_CITIES {
            return Err(TspError::TooLargeForExact(self.n));
        }
        if !(self.alpha >= 1.0) {
            return Err(TspError::BadParams(format!(
                "alpha must be at least 1, got {}",
                self.alpha
            )));
        }
        if !(self.sigma > 0.0) {
            return Err(TspError::BadParams(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        if !(0.0..=1.0).contains(&self.p_m) {
            return Err(TspError::BadParams(format!(
                "p_m must lie in [0,1], got {}",
                self.p_m
            )));
        }
        if self.init_budget < 1 {
            return Err(TspError::BadParams("init_budget must be at least 1".into()));
        }
        Ok(())
    }
}

/// (1+1) hill-climb maximizing the approximation ratio from a uniform random
/// instance; returns the first instance whose creation-time ratio reaches
/// alpha, together with that ratio. Equal ratios are accepted so the climb
/// can drift across plateaus; the ratio sequence is non-decreasing.
pub fn init_hard_instance(
    params: &TspParams,
    rng: &mut dyn RngCore,
) -> Result<(TspInstance, f64), TspError> {
    let mut current = TspInstance::random(params.n, rng);
    let mut ratio = approximation_ratio(&current, rng)?;
    let mut evaluations = 1;
    while ratio < params.alpha {
        if evaluations >= params.init_budget {
            return Err(TspError::InitializationFailure {
                alpha: params.alpha,
                budget: params.init_budget,
                best_ratio: ratio,
            });
        }
        let candidate = mutate_instance(&current, params.sigma, params.p_m, rng);
        let candidate_ratio = approximation_ratio(&candidate, rng)?;
        evaluations += 1;
        if candidate_ratio >= ratio {
            current = candidate;
            ratio = candidate_ratio;
        }
    }
    Ok((current, ratio))
}

/// The TSP side of the diversity optimizer.
#[derive(Debug, Clone)]
pub struct TspDomain {
    params: TspParams,
    features: Vec<TspFeature>,
}

impl TspDomain {
    pub fn new(params: TspParams, features: Vec<TspFeature>) -> Result<Self, TspError> {
        params.validate()?;
        if features.is_empty() {
            return Err(TspError::BadParams("at least one feature required".into()));
        }
        Ok(Self { params, features })
    }

    pub fn params(&self) -> &TspParams {
        &self.params
    }

    pub fn features(&self) -> &[TspFeature] {
        &self.features
    }
}

impl EvolutionDomain for TspDomain {
    type Genotype = TspInstance;
    type Error = TspError;

    fn name(&self) -> &'static str {
        "tsp"
    }

    fn feature_count(&self) -> usize {
        self.features.len()
    }

    fn init_individual(
        &mut self,
        rng: &mut dyn RngCore,
    ) -> Result<(Self::Genotype, f64), Self::Error> {
        init_hard_instance(&self.params, rng)
    }

    fn mutate(
        &mut self,
        parent: &Self::Genotype,
        rng: &mut dyn RngCore,
    ) -> Result<Self::Genotype, Self::Error> {
        Ok(mutate_instance(parent, self.params.sigma, self.params.p_m, rng))
    }

    fn quality(
        &mut self,
        genotype: &Self::Genotype,
        rng: &mut dyn RngCore,
    ) -> Result<f64, Self::Error> {
        approximation_ratio(genotype, rng)
    }

    fn gate_passes(&self, quality: f64) -> bool {
        quality >= self.params.alpha
    }

    fn raw_features(&self, genotype: &Self::Genotype) -> Result<Vec<f64>, Self::Error> {
        Ok(self.features.iter().map(|f| f.extract(genotype)).collect())
    }
}
