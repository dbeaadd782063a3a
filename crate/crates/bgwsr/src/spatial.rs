//! Locations, distances, kernel weight functions and adjacency structures.
//!
//! Every model in this crate shares the same notion of spatial weighting: a
//! kernel `f(d | h)` maps the distance `d` between two locations to a weight
//! in `[0, 1]`, and the set of location pairs with positive weight forms the
//! adjacency relation used by the fused prior.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A planar location. Coordinates are abstract planar units; latitude and
/// longitude inputs are treated as already projected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Location {
    pub s1: f64,
    pub s2: f64,
}

impl Location {
    pub fn new(s1: f64, s2: f64) -> Self {
        Location { s1, s2 }
    }

    pub fn is_finite(&self) -> bool {
        self.s1.is_finite() && self.s2.is_finite()
    }
}

/// Euclidean distance between two locations.
pub fn distance(a: Location, b: Location) -> f64 {
    let d1 = a.s1 - b.s1;
    let d2 = a.s2 - b.s2;
    (d1 * d1 + d2 * d2).sqrt()
}

/// Kernel families used to turn distances into weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    /// `1 - (d/h)^2` inside the bandwidth, zero beyond it.
    Bisquare,
    /// Indicator of `d < h`.
    Boxcar,
    /// `exp(-d^2 / (2 h^2))`; positive everywhere.
    Gaussian,
}

impl KernelFamily {
    /// Kernel weight for distance `d` under bandwidth `h`.
    ///
    /// `h` must be positive and `d` non-negative; this is checked by
    /// [`KernelSpec::weight`] and assumed here.
    #[inline]
    pub fn weight(self, h: f64, d: f64) -> f64 {
        match self {
            KernelFamily::Bisquare => {
                if d < h {
                    let r = d / h;
                    1.0 - r * r
                } else {
                    0.0
                }
            }
            KernelFamily::Boxcar => {
                if d < h {
                    1.0
                } else {
                    0.0
                }
            }
            KernelFamily::Gaussian => (-d * d / (2.0 * h * h)).exp(),
        }
    }

    /// Whether weights are exactly zero beyond the bandwidth.
    pub fn compact_support(self) -> bool {
        !matches!(self, KernelFamily::Gaussian)
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Bisquare => "bisquare",
            KernelFamily::Boxcar => "boxcar",
            KernelFamily::Gaussian => "gaussian",
        }
    }
}

impl std::str::FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bisquare" => Ok(KernelFamily::Bisquare),
            "boxcar" => Ok(KernelFamily::Boxcar),
            "gaussian" => Ok(KernelFamily::Gaussian),
            other => Err(Error::invalid(format!(
                "unknown kernel family `{other}` (expected bisquare, boxcar or gaussian)"
            ))),
        }
    }
}

/// A kernel family together with a bandwidth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub bandwidth: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, bandwidth: f64) -> Result<Self> {
        if !(bandwidth > 0.0) || !bandwidth.is_finite() {
            return Err(Error::invalid(format!(
                "bandwidth must be positive and finite, got {bandwidth}"
            )));
        }
        Ok(KernelSpec { family, bandwidth })
    }

    /// Weight for a distance `d`. Negative distances are rejected.
    pub fn weight(&self, d: f64) -> Result<f64> {
        if !(d >= 0.0) {
            return Err(Error::invalid(format!("distance must be non-negative, got {d}")));
        }
        Ok(self.family.weight(self.bandwidth, d))
    }
}

/// Observed spatial data: locations, an `n x p` covariate matrix and the
/// response vector. An intercept, if desired, is an explicit all-ones column.
#[derive(Debug, Clone)]
pub struct SpatialDataset {
    locations: Vec<Location>,
    x: DMatrix<f64>,
    y: DVector<f64>,
}

impl SpatialDataset {
    /// Validates sizes, finiteness and pairwise-distinct locations.
    ///
    /// Duplicate coordinates are rejected: two coincident sites would be
    /// adjacent with weight one at distance zero, which degenerates the
    /// fused difference prior.
    pub fn new(locations: Vec<Location>, x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        let n = locations.len();
        if n < 2 {
            return Err(Error::invalid(format!("need at least 2 locations, got {n}")));
        }
        if x.nrows() != n || y.len() != n {
            return Err(Error::invalid(format!(
                "shape mismatch: {n} locations, {} covariate rows, {} responses",
                x.nrows(),
                y.len()
            )));
        }
        if x.ncols() < 1 {
            return Err(Error::invalid("need at least one covariate column"));
        }
        if locations.iter().any(|l| !l.is_finite())
            || x.iter().any(|v| !v.is_finite())
            || y.iter().any(|v| !v.is_finite())
        {
            return Err(Error::invalid("non-finite entry in dataset"));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if locations[i] == locations[j] {
                    return Err(Error::DuplicateLocations { first: i, second: j });
                }
            }
        }
        Ok(SpatialDataset { locations, x, y })
    }

    pub fn n(&self) -> usize {
        self.locations.len()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn locations(&self) -> &[Location] {
        &self.locations
    }

    pub fn covariates(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn response(&self) -> &DVector<f64> {
        &self.y
    }

    /// The `k`-th covariate column.
    pub fn covariate(&self, k: usize) -> DVector<f64> {
        self.x.column(k).into_owned()
    }
}

/// Dense pairwise distance matrix, computed once and shared.
///
/// Every bandwidth proposal re-evaluates kernel weights, so distances are
/// cached up front.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    pub fn compute(locations: &[Location]) -> Self {
        let n = locations.len();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let dist = distance(locations[i], locations[j]);
                d[i * n + j] = dist;
                d[j * n + i] = dist;
            }
        }
        DistanceMatrix { n, d }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    pub fn max(&self) -> f64 {
        self.d.iter().cloned().fold(0.0, f64::max)
    }
}

/// One row of spatial weights: the diagonal of `W(s_i)` stored sparsely as
/// `(j, w_j(s_i))` with ascending `j` and only positive weights kept.
pub type WeightRow = Vec<(usize, f64)>;

/// Builds the weight row for location `i` under bandwidth `h`.
pub fn weight_row(dists: &DistanceMatrix, i: usize, h: f64, family: KernelFamily) -> WeightRow {
    let n = dists.n();
    let mut row = Vec::new();
    for j in 0..n {
        let w = family.weight(h, dists.get(i, j));
        if w > 0.0 {
            row.push((j, w));
        }
    }
    row
}

/// Adjacency structure: the pair set `C`, per-location neighbor sets and
/// counts, and the per-location weight rows.
///
/// With per-location bandwidths the directional weights are asymmetric; the
/// pair set is symmetrized by union, so `(i, j)` is present when either
/// direction has positive weight. The fused prior then uses each unordered
/// pair once.
#[derive(Debug, Clone)]
pub struct AdjacencyStructure {
    n: usize,
    weights: Vec<WeightRow>,
    pairs: BTreeSet<(usize, usize)>,
    neighbor_sets: Vec<Vec<usize>>,
    neighbor_counts: Vec<usize>,
}

impl AdjacencyStructure {
    /// Builds the structure from cached distances and per-location bandwidths.
    pub fn build(
        dists: &DistanceMatrix,
        bandwidths: &[f64],
        family: KernelFamily,
    ) -> Result<Self> {
        let n = dists.n();
        if bandwidths.len() != n {
            return Err(Error::invalid(format!(
                "expected {n} bandwidths, got {}",
                bandwidths.len()
            )));
        }
        if bandwidths.iter().any(|&h| !(h > 0.0) || !h.is_finite()) {
            return Err(Error::invalid("all bandwidths must be positive and finite"));
        }
        let weights: Vec<WeightRow> = (0..n)
            .map(|i| weight_row(dists, i, bandwidths[i], family))
            .collect();
        let mut adj = AdjacencyStructure {
            n,
            weights,
            pairs: BTreeSet::new(),
            neighbor_sets: vec![Vec::new(); n],
            neighbor_counts: vec![0; n],
        };
        adj.rebuild_pairs();
        Ok(adj)
    }

    fn rebuild_pairs(&mut self) {
        self.pairs.clear();
        for i in 0..self.n {
            for &(j, _) in &self.weights[i] {
                if j != i {
                    let key = (i.min(j), i.max(j));
                    self.pairs.insert(key);
                }
            }
        }
        for set in &mut self.neighbor_sets {
            set.clear();
        }
        for &(i, j) in &self.pairs {
            self.neighbor_sets[i].push(j);
            self.neighbor_sets[j].push(i);
        }
        for set in &mut self.neighbor_sets {
            set.sort_unstable();
        }
        for i in 0..self.n {
            self.neighbor_counts[i] = self.neighbor_sets[i].len();
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The unordered adjacent pair set `C`, sorted with `i < j`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    pub fn contains_pair(&self, i: usize, j: usize) -> bool {
        self.pairs.contains(&(i.min(j), i.max(j)))
    }

    /// Indices adjacent to `i`, ascending (excludes `i` itself).
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbor_sets[i]
    }

    /// `n_i`, the number of locations adjacent to `i`.
    pub fn neighbor_count(&self, i: usize) -> usize {
        self.neighbor_counts[i]
    }

    pub fn neighbor_counts(&self) -> &[usize] {
        &self.neighbor_counts
    }

    /// The sparse weight row of `W(s_i)`, including the self weight at `d = 0`.
    pub fn row(&self, i: usize) -> &WeightRow {
        &self.weights[i]
    }

    /// `w_j(s_i)`, or zero when outside the kernel support.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        match self.weights[i].binary_search_by_key(&j, |&(idx, _)| idx) {
            Ok(pos) => self.weights[i][pos].1,
            Err(_) => 0.0,
        }
    }

    /// Column sums of squared weights: `g_j = sum_i w_j(s_i)^2`, the diagonal
    /// of `sum_i W(s_i)^2` used by the coefficient and variance updates.
    pub fn column_squared_sums(&self) -> Vec<f64> {
        let mut g = vec![0.0; self.n];
        for row in &self.weights {
            for &(j, w) in row {
                g[j] += w * w;
            }
        }
        g
    }

    /// Replaces row `i` with weights computed under a new bandwidth and keeps
    /// the symmetrized pair set consistent. Used by the per-location
    /// Metropolis-Hastings bandwidth update.
    pub fn replace_row(&mut self, i: usize, new_row: WeightRow) {
        let old_row = std::mem::replace(&mut self.weights[i], new_row);
        // A pair (i, j) survives if either direction is still positive.
        let mut touched: BTreeSet<usize> = old_row.iter().map(|&(j, _)| j).collect();
        touched.extend(self.weights[i].iter().map(|&(j, _)| j));
        touched.remove(&i);
        for j in touched {
            let forward = self.weight(i, j) > 0.0;
            let backward = self.weight(j, i) > 0.0;
            let key = (i.min(j), i.max(j));
            if forward || backward {
                if self.pairs.insert(key) {
                    insert_sorted(&mut self.neighbor_sets[i], j);
                    insert_sorted(&mut self.neighbor_sets[j], i);
                }
            } else if self.pairs.remove(&key) {
                remove_sorted(&mut self.neighbor_sets[i], j);
                remove_sorted(&mut self.neighbor_sets[j], i);
            }
        }
        for idx in 0..self.n {
            self.neighbor_counts[idx] = self.neighbor_sets[idx].len();
        }
    }
}

fn insert_sorted(v: &mut Vec<usize>, value: usize) {
    if let Err(pos) = v.binary_search(&value) {
        v.insert(pos, value);
    }
}

fn remove_sorted(v: &mut Vec<usize>, value: usize) {
    if let Ok(pos) = v.binary_search(&value) {
        v.remove(pos);
    }
}

/// Builds the adjacency structure for a dataset under per-location bandwidths.
pub fn build_adjacency(
    data: &SpatialDataset,
    bandwidths: &[f64],
    family: KernelFamily,
) -> Result<AdjacencyStructure> {
    let dists = DistanceMatrix::compute(data.locations());
    AdjacencyStructure::build(&dists, bandwidths, family)
}
