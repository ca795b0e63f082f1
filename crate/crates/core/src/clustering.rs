//! One-dimensional k-means over GOP view estimates and the mapping from
//! clusters to storage tiers.
//!
//! Values are sorted once up front; in one dimension every Lloyd partition is
//! a set of contiguous runs of the sorted values, so the assignment step is a
//! binary search for the midpoints between neighbouring centroids and the
//! update step reads prefix sums.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::costmodel::Tier;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KMeansConfig {
    pub k: usize,
    pub seed: u64,
    /// Stop once no centroid moves by more than this fraction of its value.
    pub tol: f64,
    pub max_iter: usize,
    /// Independent k-means++ restarts; the lowest WCSS wins.
    pub n_init: usize,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            k: 4,
            seed: 0x5eed,
            tol: 1e-6,
            max_iter: 100,
            n_init: 50,
        }
    }
}

impl KMeansConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.max_iter == 0 || self.n_init == 0 || !(self.tol >= 0.0) {
            return Err(Error::Config(format!("invalid k-means settings: {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterResult {
    /// Cluster of each input value, in input order.
    pub assignments: Vec<usize>,
    /// Cluster centres. `kmeans_1d` returns them in descending order.
    pub centroids: Vec<f64>,
    /// Lloyd update steps taken by the winning restart.
    pub iterations: usize,
    /// Within-cluster sum of squares about the cluster means.
    pub wcss: f64,
    /// WCSS after every update step of the winning restart.
    pub wcss_trace: Vec<f64>,
}

impl ClusterResult {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k()];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }
}

struct Sorted {
    xs: Vec<f64>,
    s1: Vec<f64>,
    s2: Vec<f64>,
}

impl Sorted {
    fn new(xs: Vec<f64>) -> Self {
        let mut s1 = Vec::with_capacity(xs.len() + 1);
        let mut s2 = Vec::with_capacity(xs.len() + 1);
        let (mut a, mut b) = (0.0, 0.0);
        s1.push(0.0);
        s2.push(0.0);
        for &x in &xs {
            a += x;
            b += x * x;
            s1.push(a);
            s2.push(b);
        }
        Self { xs, s1, s2 }
    }

    fn len(&self) -> usize {
        self.xs.len()
    }

    fn mean(&self, lo: usize, hi: usize) -> f64 {
        (self.s1[hi] - self.s1[lo]) / (hi - lo) as f64
    }

    /// Sum of squared distances from `c` over `[lo, hi)`.
    fn sq_dist(&self, lo: usize, hi: usize, c: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        let n = (hi - lo) as f64;
        let s1 = self.s1[hi] - self.s1[lo];
        (self.s2[hi] - self.s2[lo] - 2.0 * c * s1 + c * c * n).max(0.0)
    }

    fn range_wcss(&self, lo: usize, hi: usize) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        let sum = self.s1[hi] - self.s1[lo];
        (self.s2[hi] - self.s2[lo] - sum * sum / (hi - lo) as f64).max(0.0)
    }

    /// Exact WCSS of a partition given by run ends, summed directly.
    fn exact_wcss(&self, ends: &[usize]) -> f64 {
        let mut start = 0;
        let mut total = 0.0;
        for &end in ends {
            if end > start {
                let m = self.mean(start, end);
                total += self.xs[start..end]
                    .iter()
                    .map(|x| (x - m) * (x - m))
                    .sum::<f64>();
            }
            start = end;
        }
        total
    }

    /// Run ends for ascending `centers`: cluster i owns `[ends[i-1], ends[i])`.
    /// A value exactly between two centres joins the larger one.
    fn assign(&self, centers: &[f64]) -> Vec<usize> {
        let mut ends = Vec::with_capacity(centers.len());
        for w in centers.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            ends.push(self.xs.partition_point(|&x| x < mid));
        }
        ends.push(self.len());
        ends
    }
}

/// k-means++ seeding. Nearest-centre regions are contiguous runs of the
/// sorted values, so squared distances to the nearest centre are summed per
/// run from prefix sums and the weighted pick is a binary search.
fn kmeans_pp(data: &Sorted, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = data.len();
    let mut centers = vec![data.xs[rng.random_range(0..n)]];
    while centers.len() < k {
        let ends = data.assign(&centers);
        let mut runs = Vec::with_capacity(centers.len());
        let mut total = 0.0;
        let mut start = 0;
        for (&c, &end) in centers.iter().zip(&ends) {
            let d = data.sq_dist(start, end, c);
            runs.push((start, end, c, d));
            total += d;
            start = end;
        }
        if !(total > 0.0) {
            break;
        }
        let mut target = rng.random::<f64>() * total;
        let mut pick = None;
        for &(lo, hi, c, d) in &runs {
            if target < d {
                // first index whose cumulative weight passes the target
                let (mut a, mut b) = (lo, hi - 1);
                while a < b {
                    let mid = a + (b - a) / 2;
                    if data.sq_dist(lo, mid + 1, c) <= target {
                        a = mid + 1;
                    } else {
                        b = mid;
                    }
                }
                pick = Some(a);
                break;
            }
            target -= d;
        }
        let mut p = pick.unwrap_or(n - 1);
        if centers.contains(&data.xs[p]) {
            // rounding left the pick on a centre; take the farthest value instead
            let mut far = (f64::NEG_INFINITY, 0);
            for &(lo, hi, c, _) in &runs {
                if hi > lo {
                    for i in [lo, hi - 1] {
                        let d = (data.xs[i] - c).abs();
                        if d > far.0 {
                            far = (d, i);
                        }
                    }
                }
            }
            p = far.1;
        }
        centers.push(data.xs[p]);
        centers.sort_by(f64::total_cmp);
    }
    centers
}

/// Moves the centre of every empty run onto the value farthest from its own
/// centre, then reassigns. Each move creates a zero-distance member, so at
/// most `k` rounds are needed when `k` does not exceed the distinct count.
fn assign_nonempty(data: &Sorted, centers: &mut [f64]) -> Vec<usize> {
    let k = centers.len();
    let mut ends = data.assign(centers);
    for _ in 0..k {
        let mut start = 0;
        let mut empty = None;
        for (i, &end) in ends.iter().enumerate() {
            if end == start {
                empty = Some(i);
                break;
            }
            start = end;
        }
        let Some(e) = empty else { break };

        let mut far = (f64::NEG_INFINITY, 0.0);
        let mut start = 0;
        for (i, &end) in ends.iter().enumerate() {
            if end > start {
                for x in [data.xs[start], data.xs[end - 1]] {
                    let d = (x - centers[i]).abs();
                    if d > far.0 {
                        far = (d, x);
                    }
                }
            }
            start = end;
        }
        if !(far.0 > 0.0) {
            break;
        }
        centers[e] = far.1;
        centers.sort_by(f64::total_cmp);
        ends = data.assign(centers);
    }
    ends
}

struct Run {
    centers: Vec<f64>,
    ends: Vec<usize>,
    wcss: f64,
    iterations: usize,
    trace: Vec<f64>,
}

/// Moves single values across run boundaries while that lowers the WCSS.
/// Lloyd stops once every value is nearest its own mean; a boundary move
/// also counts both means shifting, so it can leave such a partition.
fn refine_boundaries(data: &Sorted, ends: &mut [usize]) -> bool {
    let mut moved = false;
    for _ in 0..data.len() {
        let mut improved = false;
        for i in 0..ends.len().saturating_sub(1) {
            let lo = if i == 0 { 0 } else { ends[i - 1] };
            let (b, hi) = (ends[i], ends[i + 1]);
            let old = data.range_wcss(lo, b) + data.range_wcss(b, hi);
            let eps = 1e-10 * (data.s2[hi] - data.s2[lo]);
            for nb in [b - 1, b + 1] {
                if nb > lo && nb < hi {
                    let new = data.range_wcss(lo, nb) + data.range_wcss(nb, hi);
                    if new < old - eps {
                        ends[i] = nb;
                        improved = true;
                        break;
                    }
                }
            }
        }
        if !improved {
            break;
        }
        moved = true;
    }
    moved
}

fn lloyd(data: &Sorted, mut centers: Vec<f64>, cfg: &KMeansConfig) -> Run {
    let mut ends = assign_nonempty(data, &mut centers);
    let mut trace = Vec::new();
    let mut iterations = 0;
    loop {
        while iterations < cfg.max_iter {
            iterations += 1;
            let mut start = 0;
            let mut movement: f64 = 0.0;
            let mut wcss = 0.0;
            for (i, &end) in ends.iter().enumerate() {
                if end > start {
                    let m = data.mean(start, end);
                    let scale = centers[i].abs().max(f64::MIN_POSITIVE);
                    movement = movement.max((m - centers[i]).abs() / scale);
                    centers[i] = m;
                    wcss += data.range_wcss(start, end);
                }
                start = end;
            }
            trace.push(wcss);
            let next = assign_nonempty(data, &mut centers);
            let settled = next == ends || movement < cfg.tol;
            ends = next;
            if settled {
                break;
            }
        }
        if iterations >= cfg.max_iter || !refine_boundaries(data, &mut ends) {
            break;
        }
    }
    let wcss = ends
        .iter()
        .scan(0, |start, &end| {
            let w = data.range_wcss(*start, end);
            *start = end;
            Some(w)
        })
        .sum();
    Run {
        centers,
        ends,
        wcss,
        iterations,
        trace,
    }
}

/// Lloyd's k-means on scalars with deterministic k-means++ seeding.
///
/// `k` is reduced to the number of distinct values when there are fewer.
/// Centroids come back in descending order, so cluster 0 is the hottest.
pub fn kmeans_1d(values: &[f64], cfg: &KMeansConfig) -> Result<ClusterResult> {
    cfg.validate()?;
    if values.is_empty() {
        return Err(Error::InvalidArgument(
            "k-means needs at least one value".into(),
        ));
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "non-finite value {bad} in k-means input"
        )));
    }

    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let data = Sorted::new(order.iter().map(|&i| values[i]).collect());
    let distinct = 1 + data.xs.windows(2).filter(|w| w[0] != w[1]).count();
    let k = cfg.k.min(distinct);

    let mut best: Option<Run> = None;
    for restart in 0..cfg.n_init {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(restart as u64);
        let run = lloyd(&data, kmeans_pp(&data, k, &mut rng), cfg);
        if best.as_ref().is_none_or(|b| run.wcss < b.wcss) {
            best = Some(run);
        }
        if k == 1 {
            break;
        }
    }
    let run = best.expect("at least one restart");

    let k = run.centers.len();
    let mut assignments = vec![0; values.len()];
    let mut start = 0;
    for (i, &end) in run.ends.iter().enumerate() {
        // ascending run i becomes descending cluster k-1-i
        for &orig in &order[start..end] {
            assignments[orig] = k - 1 - i;
        }
        start = end;
    }
    let mut centroids = run.centers;
    centroids.reverse();

    Ok(ClusterResult {
        assignments,
        centroids,
        iterations: run.iterations,
        wcss: data.exact_wcss(&run.ends),
        wcss_trace: run.trace,
    })
}

/// Tier of each cluster: highest centroid to tier 1 and so on down. Equal
/// centroids are ordered by cluster size (larger first), then cluster index.
pub fn map_clusters_to_tiers(result: &ClusterResult) -> Result<Vec<Tier>> {
    let k = result.k();
    if k == 0 || k > Tier::ALL.len() {
        return Err(Error::InvalidArgument(format!(
            "cannot map {k} clusters onto {} storage tiers",
            Tier::ALL.len()
        )));
    }
    let sizes = result.cluster_sizes();
    let mut rank: Vec<usize> = (0..k).collect();
    rank.sort_by(|&a, &b| {
        result.centroids[b]
            .total_cmp(&result.centroids[a])
            .then_with(|| sizes[b].cmp(&sizes[a]))
            .then(a.cmp(&b))
    });
    let mut tiers = vec![Tier::Standard; k];
    for (pos, &cluster) in rank.iter().enumerate() {
        tiers[cluster] = Tier::ALL[pos];
    }
    Ok(tiers)
}

/// Tier of every input value, given a clustering of those values.
pub fn tiers_for_values(result: &ClusterResult) -> Result<Vec<Tier>> {
    let tiers = map_clusters_to_tiers(result)?;
    Ok(result.assignments.iter().map(|&c| tiers[c]).collect())
}
