//! Exact star-discrepancy computation for small point sets in [0,1]^d.
//!
//! The star discrepancy of a point set P measures the worst-case deviation
//! between the fraction of points inside an origin-anchored axis-parallel box
//! and that box's volume. For finite sets the supremum over boxes is attained
//! on the critical grid built from the point coordinates and 1, so for the
//! small dimensions used here (d <= 3) it can be computed exactly by
//! enumerating that grid.
//!
//! Two one-sided deviations matter at every grid corner `u`:
//!
//! * the closed-box overcount `|{p : p <= u}|/k - vol(u)`, and
//! * the open-box undercount `vol(u) - |{p : p < u}|/k`.
//!
//! [`star_discrepancy`] returns the maximum of both over all corners (the
//! standard two-sided value); [`star_discrepancy_one_sided`] exposes the
//! literal one-sided supremum over half-open boxes for comparison runs.

use thiserror::Error;

/// Largest dimension the exact enumeration accepts. The grid has (k+1)^d
/// corners; beyond three axes the cost is no longer negligible inside an
/// evolutionary loop.
pub const MAX_EXACT_DIMENSION: usize = 3;

/// Largest point count [`star_discrepancy_oracle`] accepts.
pub const ORACLE_MAX_POINTS: usize = 12;

/// Absolute tolerance that groups removal candidates into a tie set in
/// [`min_removal_scan`]. Discrepancy values are short sums and products of
/// coordinates, so anything closer than this is rounding noise rather than a
/// genuinely different box.
pub const REMOVAL_TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum DiscrepancyError {
    #[error("coordinate {value} at axis {axis} lies outside [0,1]")]
    CoordinateOutOfRange { axis: usize, value: f64 },
    #[error("point must have at least one coordinate")]
    ZeroDimensional,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("exact star discrepancy supports d <= {MAX_EXACT_DIMENSION}, got d = {0}")]
    UnsupportedDimension(usize),
    #[error("point set must contain at least one point")]
    EmptyPointSet,
    #[error("removal scan needs at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("oracle accepts at most {ORACLE_MAX_POINTS} points, got {0}")]
    OracleTooManyPoints(usize),
    #[error("point csv: {0}")]
    Csv(String),
}

/// A point in the unit cube: the scaled feature vector of one individual.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitPoint {
    coords: Vec<f64>,
}

impl UnitPoint {
    /// Builds a point, rejecting NaN and coordinates outside [0,1].
    pub fn new(coords: Vec<f64>) -> Result<Self, DiscrepancyError> {
        if coords.is_empty() {
            return Err(DiscrepancyError::ZeroDimensional);
        }
        for (axis, &value) in coords.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(DiscrepancyError::CoordinateOutOfRange { axis, value });
            }
        }
        Ok(Self { coords })
    }

    pub fn dimension(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

/// A non-empty multiset of points sharing one dimension.
///
/// Duplicates are permitted: a population may contain the same individual,
/// and therefore the same scaled feature vector, more than once.
#[derive(Debug, Clone)]
pub struct PointSet {
    dimension: usize,
    points: Vec<UnitPoint>,
}

impl PointSet {
    pub fn new(points: Vec<UnitPoint>) -> Result<Self, DiscrepancyError> {
        let dimension = points
            .first()
            .ok_or(DiscrepancyError::EmptyPointSet)?
            .dimension();
        for point in &points {
            if point.dimension() != dimension {
                return Err(DiscrepancyError::DimensionMismatch {
                    expected: dimension,
                    got: point.dimension(),
                });
            }
        }
        Ok(Self { dimension, points })
    }

    /// Convenience constructor from raw coordinate rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, DiscrepancyError> {
        let points = rows
            .iter()
            .map(|row| UnitPoint::new(row.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(points)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Number of points, counted with multiplicity.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[UnitPoint] {
        &self.points
    }

    /// The set with the point at `index` removed.
    ///
    /// Panics if `index` is out of bounds or the set has fewer than two
    /// points (the remainder must stay non-empty).
    pub fn without(&self, index: usize) -> PointSet {
        assert!(self.points.len() >= 2, "remainder would be empty");
        let mut points = self.points.clone();
        points.remove(index);
        PointSet {
            dimension: self.dimension,
            points,
        }
    }

    /// Serializes to CSV: a `# d=<d> k=<k>` header line followed by one
    /// point per line with full-precision coordinates.
    pub fn to_csv_string(&self) -> String {
        let mut out = format!("# d={} k={}\n", self.dimension, self.points.len());
        for point in &self.points {
            let row: Vec<String> = point.coords().iter().map(|c| format!("{c:.16e}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Parses the CSV form produced by [`PointSet::to_csv_string`].
    pub fn from_csv_str(text: &str) -> Result<Self, DiscrepancyError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| DiscrepancyError::Csv("empty input".into()))?;
        let header = header.trim();
        if !header.starts_with('#') {
            return Err(DiscrepancyError::Csv(format!(
                "expected `# d=<d> k=<k>` header, got `{header}`"
            )));
        }
        let mut dim: Option<usize> = None;
        let mut count: Option<usize> = None;
        for token in header.trim_start_matches('#').split_whitespace() {
            if let Some(v) = token.strip_prefix("d=") {
                dim = v.parse().ok();
            } else if let Some(v) = token.strip_prefix("k=") {
                count = v.parse().ok();
            }
        }
        let dim = dim.ok_or_else(|| DiscrepancyError::Csv("header missing d=".into()))?;
        let count = count.ok_or_else(|| DiscrepancyError::Csv("header missing k=".into()))?;

        let mut rows = Vec::with_capacity(count);
        for line in lines {
            let coords = line
                .trim()
                .split(',')
                .map(|field| {
                    field
                        .trim()
                        .parse::<f64>()
                        .map_err(|e| DiscrepancyError::Csv(format!("bad value `{field}`: {e}")))
                })
                .collect::<Result<Vec<f64>, _>>()?;
            if coords.len() != dim {
                return Err(DiscrepancyError::Csv(format!(
                    "row has {} values, header says d={dim}",
                    coords.len()
                )));
            }
            rows.push(UnitPoint::new(coords)?);
        }
        if rows.len() != count {
            return Err(DiscrepancyError::Csv(format!(
                "found {} points, header says k={count}",
                rows.len()
            )));
        }
        Self::new(rows)
    }
}

/// Which discrepancy the optimizer minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiscrepancyMeasure {
    /// Standard two-sided star discrepancy (max of over- and undercount).
    #[default]
    TwoSided,
    /// Literal one-sided supremum of `count/k - vol` over half-open boxes.
    /// Degenerates on corner-clustered sets; exposed for comparison only.
    OneSided,
}

impl DiscrepancyMeasure {
    pub fn evaluate(&self, points: &PointSet) -> Result<f64, DiscrepancyError> {
        match self {
            DiscrepancyMeasure::TwoSided => star_discrepancy(points),
            DiscrepancyMeasure::OneSided => star_discrepancy_one_sided(points),
        }
    }
}

/// Counting deviations of one anchored box against a point set.
///
/// `over` is the closed-box overcount `|{p : p_i <= u_i forall i}|/k - vol`,
/// `under` the open-box undercount `vol - |{p : p_i < u_i forall i}|/k`.
/// Boundary comparisons are exact; scaled features are stored as-is.
pub fn box_deviation(
    points: &PointSet,
    corner: &UnitPoint,
) -> Result<(f64, f64), DiscrepancyError> {
    if corner.dimension() != points.dimension() {
        return Err(DiscrepancyError::DimensionMismatch {
            expected: points.dimension(),
            got: corner.dimension(),
        });
    }
    let k = points.len() as f64;
    let mut closed = 0usize;
    let mut strict = 0usize;
    for point in points.points() {
        let c = point.coords();
        let u = corner.coords();
        if c.iter().zip(u).all(|(p, b)| p <= b) {
            closed += 1;
        }
        if c.iter().zip(u).all(|(p, b)| p < b) {
            strict += 1;
        }
    }
    let volume: f64 = corner.coords().iter().product();
    Ok((closed as f64 / k - volume, volume - strict as f64 / k))
}

/// Exact two-sided star discrepancy of a point set with d <= 3.
///
/// Enumerates, per axis, the critical values {coordinates of all points} u {1}
/// and evaluates both one-sided deviations at every grid corner; the supremum
/// of the piecewise-monotone deviation is attained there. Counting uses a
/// rank histogram with axis-wise prefix sums, so each corner lookup is O(1)
/// after an O(k log k + G) build (G = number of grid cells).
pub fn star_discrepancy(points: &PointSet) -> Result<f64, DiscrepancyError> {
    check_exact_dimension(points)?;
    let grid = GridCounts::build(points, false);
    let k = points.len() as f64;
    let mut best = f64::NEG_INFINITY;
    grid.for_each_corner(|index, volume| {
        let over = grid.closed_count(index) as f64 / k - volume;
        let under = volume - grid.strict_count(index) as f64 / k;
        best = best.max(over.max(under));
    });
    Ok(best)
}

/// Literal one-sided discrepancy: sup over half-open anchored boxes of
/// `count/k - vol`. Points with any coordinate equal to 1 are never inside a
/// half-open box, so they are excluded from every count; the supremum is at
/// least 0 because the box volume can shrink to nothing.
pub fn star_discrepancy_one_sided(points: &PointSet) -> Result<f64, DiscrepancyError> {
    check_exact_dimension(points)?;
    let grid = GridCounts::build(points, true);
    let k = points.len() as f64;
    let mut best = 0.0f64;
    grid.for_each_corner(|index, volume| {
        let over = grid.closed_count(index) as f64 / k - volume;
        best = best.max(over);
    });
    Ok(best)
}

/// Brute-force star discrepancy over the full cartesian grid of per-axis
/// critical values, with both strict and non-strict counting done by naive
/// per-box point scans. Slow reference implementation used by tests to
/// cross-check [`star_discrepancy`]; limited to k <= 12, d <= 3.
pub fn star_discrepancy_oracle(points: &PointSet) -> Result<f64, DiscrepancyError> {
    check_exact_dimension(points)?;
    if points.len() > ORACLE_MAX_POINTS {
        return Err(DiscrepancyError::OracleTooManyPoints(points.len()));
    }
    let d = points.dimension();
    let mut axes: Vec<Vec<f64>> = Vec::with_capacity(d);
    for axis in 0..d {
        let mut values: Vec<f64> = points.points().iter().map(|p| p.coords()[axis]).collect();
        values.push(1.0);
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        values.dedup();
        axes.push(values);
    }

    let k = points.len() as f64;
    let mut best = f64::NEG_INFINITY;
    let mut corner = vec![0usize; d];
    loop {
        let u: Vec<f64> = (0..d).map(|i| axes[i][corner[i]]).collect();
        let volume: f64 = u.iter().product();
        let mut closed = 0usize;
        let mut strict = 0usize;
        for point in points.points() {
            let c = point.coords();
            if c.iter().zip(&u).all(|(p, b)| p <= b) {
                closed += 1;
            }
            if c.iter().zip(&u).all(|(p, b)| p < b) {
                strict += 1;
            }
        }
        best = best.max(closed as f64 / k - volume);
        best = best.max(volume - strict as f64 / k);

        // odometer increment
        let mut axis = 0;
        loop {
            corner[axis] += 1;
            if corner[axis] < axes[axis].len() {
                break;
            }
            corner[axis] = 0;
            axis += 1;
            if axis == d {
                return Ok(best);
            }
        }
    }
}

/// Scans all delete-one subsets: returns the minimum achievable discrepancy
/// and every index whose removal lands within [`REMOVAL_TIE_TOLERANCE`] of
/// it, in ascending order. This is the inner step of survivor selection.
pub fn min_removal_scan(points: &PointSet) -> Result<(Vec<usize>, f64), DiscrepancyError> {
    min_removal_scan_with(points, DiscrepancyMeasure::TwoSided)
}

/// [`min_removal_scan`] under an explicit discrepancy measure.
pub fn min_removal_scan_with(
    points: &PointSet,
    measure: DiscrepancyMeasure,
) -> Result<(Vec<usize>, f64), DiscrepancyError> {
    let k = points.len();
    if k < 2 {
        return Err(DiscrepancyError::TooFewPoints(k));
    }
    let mut values = Vec::with_capacity(k);
    let mut best = f64::INFINITY;
    for index in 0..k {
        let value = measure.evaluate(&points.without(index))?;
        best = best.min(value);
        values.push(value);
    }
    let tied: Vec<usize> = (0..k)
        .filter(|&index| values[index] <= best + REMOVAL_TIE_TOLERANCE)
        .collect();
    Ok((tied, best))
}

fn check_exact_dimension(points: &PointSet) -> Result<(), DiscrepancyError> {
    if points.dimension() > MAX_EXACT_DIMENSION {
        return Err(DiscrepancyError::UnsupportedDimension(points.dimension()));
    }
    Ok(())
}

/// Rank histogram of a point set over its critical grid, with axis-wise
/// prefix sums so closed and strict box counts are O(1) lookups.
struct GridCounts {
    dims: Vec<usize>,
    strides: Vec<usize>,
    axes: Vec<Vec<f64>>,
    cumulative: Vec<u32>,
}

impl GridCounts {
    /// `cap_at_boundary` drops points with any coordinate equal to 1 from
    /// the histogram; no half-open box ever contains them.
    fn build(points: &PointSet, cap_at_boundary: bool) -> Self {
        let d = points.dimension();
        let mut axes: Vec<Vec<f64>> = Vec::with_capacity(d);
        for axis in 0..d {
            let mut values: Vec<f64> = points.points().iter().map(|p| p.coords()[axis]).collect();
            values.push(1.0);
            values.sort_by(|a, b| a.partial_cmp(b).unwrap());
            values.dedup();
            axes.push(values);
        }
        let dims: Vec<usize> = axes.iter().map(Vec::len).collect();
        let mut strides = vec![1usize; d];
        for axis in 1..d {
            strides[axis] = strides[axis - 1] * dims[axis - 1];
        }
        let total: usize = dims.iter().product();
        let mut cumulative = vec![0u32; total];

        for point in points.points() {
            let coords = point.coords();
            if cap_at_boundary && coords.iter().any(|&c| c == 1.0) {
                continue;
            }
            let mut flat = 0usize;
            for axis in 0..d {
                let rank = axes[axis]
                    .binary_search_by(|v| v.partial_cmp(&coords[axis]).unwrap())
                    .expect("point coordinate present in its own grid");
                flat += rank * strides[axis];
            }
            cumulative[flat] += 1;
        }

        // prefix sums along each axis turn the histogram into closed counts
        for axis in 0..d {
            let stride = strides[axis];
            let len = dims[axis];
            for base in 0..total {
                let pos = (base / stride) % len;
                if pos > 0 {
                    cumulative[base] += cumulative[base - stride];
                }
            }
        }

        Self {
            dims,
            strides,
            axes,
            cumulative,
        }
    }

    fn flat(&self, index: &[usize]) -> usize {
        index
            .iter()
            .zip(&self.strides)
            .map(|(i, s)| i * s)
            .sum()
    }

    /// Points with rank <= index on every axis.
    fn closed_count(&self, index: &[usize]) -> u32 {
        self.cumulative[self.flat(index)]
    }

    /// Points with rank < index on every axis.
    fn strict_count(&self, index: &[usize]) -> u32 {
        if index.iter().any(|&i| i == 0) {
            return 0;
        }
        let shifted: Vec<usize> = index.iter().map(|&i| i - 1).collect();
        self.cumulative[self.flat(&shifted)]
    }

    fn for_each_corner(&self, mut visit: impl FnMut(&[usize], f64)) {
        let d = self.dims.len();
        let mut index = vec![0usize; d];
        loop {
            let volume: f64 = (0..d).map(|axis| self.axes[axis][index[axis]]).product();
            visit(&index, volume);
            let mut axis = 0;
            loop {
                index[axis] += 1;
                if index[axis] < self.dims[axis] {
                    break;
                }
                index[axis] = 0;
                axis += 1;
                if axis == d {
                    return;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(rows: &[&[f64]]) -> PointSet {
        PointSet::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn box_deviation_single_point_at_its_own_corner() {
        let points = set(&[&[0.5, 0.5]]);
        let corner = UnitPoint::new(vec![0.5, 0.5]).unwrap();
        let (over, under) = box_deviation(&points, &corner).unwrap();
        assert_eq!(over, 1.0 - 0.25);
        assert_eq!(under, 0.25);
    }

    #[test]
    fn box_deviation_point_on_box_boundary() {
        // (0.75, 0.75) sits on the closed box boundary: counted by the
        // closed count (over = 2/2 - 0.75) but not by the strict count
        // (under = 0.75 - 1/2).
        let points = set(&[&[0.25, 0.25], &[0.75, 0.75]]);
        let corner = UnitPoint::new(vec![1.0, 0.75]).unwrap();
        let (over, under) = box_deviation(&points, &corner).unwrap();
        assert!((over - 0.25).abs() < 1e-15);
        assert!((under - 0.25).abs() < 1e-15);
    }

    #[test]
    fn box_deviation_corner_point() {
        let points = set(&[&[1.0, 1.0]]);
        let corner = UnitPoint::new(vec![1.0, 1.0]).unwrap();
        let (over, under) = box_deviation(&points, &corner).unwrap();
        assert_eq!(over, 0.0);
        assert_eq!(under, 1.0);
    }

    #[test]
    fn box_deviation_dimension_mismatch() {
        let points = set(&[&[0.5, 0.5]]);
        let corner = UnitPoint::new(vec![0.5]).unwrap();
        assert!(matches!(
            box_deviation(&points, &corner),
            Err(DiscrepancyError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn star_discrepancy_of_corner_point_is_one() {
        assert_eq!(star_discrepancy(&set(&[&[1.0, 1.0]])).unwrap(), 1.0);
        assert_eq!(star_discrepancy_oracle(&set(&[&[1.0, 1.0]])).unwrap(), 1.0);
    }

    #[test]
    fn star_discrepancy_of_midpoint_sets_is_closed_form() {
        for n in 1..=16usize {
            let rows: Vec<Vec<f64>> = (1..=n)
                .map(|i| vec![(2 * i - 1) as f64 / (2 * n) as f64])
                .collect();
            let points = PointSet::from_rows(&rows).unwrap();
            let expected = 1.0 / (2 * n) as f64;
            assert!(
                (star_discrepancy(&points).unwrap() - expected).abs() <= 1e-12,
                "midpoint set n={n}"
            );
        }
    }

    #[test]
    fn star_discrepancy_two_diagonal_points() {
        let points = set(&[&[0.25, 0.25], &[0.75, 0.75]]);
        let value = star_discrepancy(&points).unwrap();
        // maximized at the closed box [0, 0.25]^2: 1/2 - 0.0625
        assert!((value - 0.4375).abs() <= 1e-12);
        assert!((star_discrepancy_oracle(&points).unwrap() - 0.4375).abs() <= 1e-12);
    }

    #[test]
    fn oracle_single_center_point() {
        let points = set(&[&[0.5, 0.5]]);
        assert!((star_discrepancy_oracle(&points).unwrap() - 0.75).abs() <= 1e-12);
        assert!((star_discrepancy(&points).unwrap() - 0.75).abs() <= 1e-12);
    }

    #[test]
    fn point_on_lower_face_forces_full_discrepancy() {
        // A zero coordinate puts the point inside a closed box of volume 0.
        let points = set(&[&[0.0, 0.5]]);
        assert_eq!(star_discrepancy(&points).unwrap(), 1.0);
        assert_eq!(star_discrepancy_oracle(&points).unwrap(), 1.0);
    }

    #[test]
    fn unsupported_dimension_is_rejected() {
        let points = set(&[&[0.1, 0.2, 0.3, 0.4]]);
        assert!(matches!(
            star_discrepancy(&points),
            Err(DiscrepancyError::UnsupportedDimension(4))
        ));
    }

    #[test]
    fn unit_point_rejects_out_of_range() {
        assert!(matches!(
            UnitPoint::new(vec![0.5, 1.5]),
            Err(DiscrepancyError::CoordinateOutOfRange { axis: 1, .. })
        ));
        assert!(UnitPoint::new(vec![]).is_err());
        assert!(UnitPoint::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn min_removal_scan_duplicates_tie() {
        let points = set(&[&[0.1, 0.1], &[0.1, 0.1], &[0.9, 0.9]]);
        let (tied, _value) = min_removal_scan(&points).unwrap();
        assert!(tied.contains(&0) && tied.contains(&1));
    }

    #[test]
    fn min_removal_scan_prefers_removing_corner_point() {
        let points = set(&[&[1.0, 1.0], &[0.5, 0.5]]);
        let (tied, value) = min_removal_scan(&points).unwrap();
        assert_eq!(tied, vec![0]);
        assert!((value - 0.75).abs() <= 1e-12);
    }

    #[test]
    fn min_removal_scan_rejects_singletons() {
        let points = set(&[&[0.5]]);
        assert!(matches!(
            min_removal_scan(&points),
            Err(DiscrepancyError::TooFewPoints(1))
        ));
    }

    #[test]
    fn one_sided_never_counts_boundary_points() {
        // no half-open box contains (1,1), so the literal formula sees an
        // empty set and the supremum collapses to 0
        assert_eq!(
            star_discrepancy_one_sided(&set(&[&[1.0, 1.0]])).unwrap(),
            0.0
        );
        // a centered point still leaves the overcount at 1 - 0.25
        assert!(
            (star_discrepancy_one_sided(&set(&[&[0.5, 0.5]])).unwrap() - 0.75).abs() <= 1e-12
        );
    }

    /// Test-local brute force for the literal one-sided supremum.
    fn one_sided_brute_force(points: &PointSet) -> f64 {
        let d = points.dimension();
        let mut axes: Vec<Vec<f64>> = Vec::new();
        for axis in 0..d {
            let mut values: Vec<f64> = points.points().iter().map(|p| p.coords()[axis]).collect();
            values.push(1.0);
            values.sort_by(|a, b| a.partial_cmp(b).unwrap());
            values.dedup();
            axes.push(values);
        }
        let k = points.len() as f64;
        let mut best = 0.0f64;
        let mut corner = vec![0usize; d];
        'outer: loop {
            let u: Vec<f64> = (0..d).map(|i| axes[i][corner[i]]).collect();
            let volume: f64 = u.iter().product();
            let count = points
                .points()
                .iter()
                .filter(|p| p.coords().iter().zip(&u).all(|(c, b)| c <= b && *c < 1.0))
                .count();
            best = best.max(count as f64 / k - volume);
            let mut axis = 0;
            loop {
                corner[axis] += 1;
                if corner[axis] < axes[axis].len() {
                    break;
                }
                corner[axis] = 0;
                axis += 1;
                if axis == d {
                    break 'outer;
                }
            }
        }
        best
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let points = set(&[&[0.1, 0.9], &[1.0 / 3.0, 2.0 / 3.0], &[1.0, 0.0]]);
        let text = points.to_csv_string();
        assert!(text.starts_with("# d=2 k=3\n"));
        let reloaded = PointSet::from_csv_str(&text).unwrap();
        assert_eq!(reloaded.len(), 3);
        for (a, b) in points.points().iter().zip(reloaded.points()) {
            assert_eq!(a.coords(), b.coords());
        }
    }

    #[test]
    fn csv_rejects_malformed_input() {
        assert!(PointSet::from_csv_str("").is_err());
        assert!(PointSet::from_csv_str("0.5,0.5\n").is_err());
        assert!(PointSet::from_csv_str("# d=2 k=2\n0.5,0.5\n").is_err());
        assert!(PointSet::from_csv_str("# d=2 k=1\n0.5\n").is_err());
    }

    fn arbitrary_point_set(max_points: usize) -> impl Strategy<Value = PointSet> {
        (1..=3usize)
            .prop_flat_map(move |d| {
                prop::collection::vec(
                    prop::collection::vec(0.0..=1.0f64, d),
                    1..=max_points,
                )
            })
            .prop_map(|rows| PointSet::from_rows(&rows).unwrap())
    }

    proptest! {
        #[test]
        fn matches_oracle_on_small_sets(points in arbitrary_point_set(8)) {
            let fast = star_discrepancy(&points).unwrap();
            let slow = star_discrepancy_oracle(&points).unwrap();
            prop_assert!((fast - slow).abs() <= 1e-9);
        }

        #[test]
        fn value_is_positive_and_at_most_one(points in arbitrary_point_set(12)) {
            let value = star_discrepancy(&points).unwrap();
            prop_assert!(value > 0.0);
            prop_assert!(value <= 1.0);
        }

        #[test]
        fn permutation_invariant(points in arbitrary_point_set(8), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut shuffled = points.points().to_vec();
            shuffled.shuffle(&mut rng);
            let reordered = PointSet::new(shuffled).unwrap();
            let a = star_discrepancy(&points).unwrap();
            let b = star_discrepancy(&reordered).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn removal_scan_matches_independent_subsets(points in arbitrary_point_set(7)) {
            prop_assume!(points.len() >= 2);
            let (tied, value) = min_removal_scan(&points).unwrap();
            let mut best = f64::INFINITY;
            for index in 0..points.len() {
                best = best.min(star_discrepancy(&points.without(index)).unwrap());
            }
            prop_assert!((value - best).abs() <= 1e-15);
            prop_assert!(!tied.is_empty());
            for index in &tied {
                let direct = star_discrepancy(&points.without(*index)).unwrap();
                prop_assert!(direct <= value + REMOVAL_TIE_TOLERANCE);
            }
        }

        #[test]
        fn one_sided_matches_its_brute_force(points in arbitrary_point_set(8)) {
            let fast = star_discrepancy_one_sided(&points).unwrap();
            let slow = one_sided_brute_force(&points);
            prop_assert!((fast - slow).abs() <= 1e-9);
        }

        #[test]
        fn two_sided_dominates_one_sided(points in arbitrary_point_set(8)) {
            let two = star_discrepancy(&points).unwrap();
            let one = star_discrepancy_one_sided(&points).unwrap();
            prop_assert!(one <= two + 1e-15);
        }
    }
}
