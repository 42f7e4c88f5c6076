//! Grid-bucketed nearest-neighbor queries for planar point sets: resolution
//! estimates, one-sided and symmetric Hausdorff distances.

use num_complex::Complex64;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Uniform bucket grid over a point set, CSR layout. Average O(1) nearest
/// queries for well-spread sets; exact to floating precision.
pub(crate) struct BucketGrid {
    pts: Vec<Complex64>,
    min_x: f64,
    min_y: f64,
    cell: f64,
    cols: usize,
    rows: usize,
    starts: Vec<u32>,
    order: Vec<u32>,
}

impl BucketGrid {
    pub fn build(pts: Vec<Complex64>) -> Self {
        assert!(!pts.is_empty(), "bucket grid needs at least one point");
        let mut min_x = f64::INFINITY;
        let mut min_y = f64::INFINITY;
        let mut max_x = f64::NEG_INFINITY;
        let mut max_y = f64::NEG_INFINITY;
        for p in &pts {
            min_x = min_x.min(p.re);
            min_y = min_y.min(p.im);
            max_x = max_x.max(p.re);
            max_y = max_y.max(p.im);
        }
        let w = (max_x - min_x).max(0.0);
        let h = (max_y - min_y).max(0.0);
        let n = pts.len();
        let mut cell = if w > 0.0 && h > 0.0 {
            (w * h / n as f64).sqrt()
        } else {
            // collinear set: one bucket per point along the long axis
            w.max(h) / (n.min(65_536) as f64)
        };
        if !(cell > 0.0) {
            cell = 1.0;
        }
        let (mut cols, mut rows);
        loop {
            cols = (w / cell) as usize + 1;
            rows = (h / cell) as usize + 1;
            if cols.saturating_mul(rows) <= 4 * n + 64 {
                break;
            }
            cell *= 2.0;
        }

        let bucket_index = |p: &Complex64| -> usize {
            let i = (((p.re - min_x) / cell) as usize).min(cols - 1);
            let j = (((p.im - min_y) / cell) as usize).min(rows - 1);
            j * cols + i
        };
        let mut counts = vec![0u32; cols * rows + 1];
        for p in &pts {
            counts[bucket_index(p) + 1] += 1;
        }
        for k in 1..counts.len() {
            counts[k] += counts[k - 1];
        }
        let starts = counts;
        let mut cursor = starts.clone();
        let mut order = vec![0u32; n];
        for (idx, p) in pts.iter().enumerate() {
            let b = bucket_index(p);
            order[cursor[b] as usize] = idx as u32;
            cursor[b] += 1;
        }
        Self {
            pts,
            min_x,
            min_y,
            cell,
            cols,
            rows,
            starts,
            order,
        }
    }

    fn scan_bucket(&self, i: usize, j: usize, p: Complex64, exclude: Option<u32>, best: &mut f64) {
        let b = j * self.cols + i;
        let lo = self.starts[b] as usize;
        let hi = self.starts[b + 1] as usize;
        for &idx in &self.order[lo..hi] {
            if Some(idx) == exclude {
                continue;
            }
            let d = (self.pts[idx as usize] - p).norm();
            if d < *best {
                *best = d;
            }
        }
    }

    /// Distance from `p` to the nearest stored point, optionally skipping
    /// one index (for self-queries).
    pub fn nearest(&self, p: Complex64, exclude: Option<u32>) -> f64 {
        let ci = (((p.re - self.min_x) / self.cell) as isize).clamp(0, self.cols as isize - 1);
        let cj = (((p.im - self.min_y) / self.cell) as isize).clamp(0, self.rows as isize - 1);
        let mut best = f64::INFINITY;
        let max_ring = self.cols.max(self.rows);
        for ring in 0..=max_ring {
            let k = ring as isize;
            if ring == 0 {
                self.scan_bucket(ci as usize, cj as usize, p, exclude, &mut best);
            } else {
                for i in (ci - k).max(0)..=(ci + k).min(self.cols as isize - 1) {
                    for j in [cj - k, cj + k] {
                        if j >= 0 && j < self.rows as isize {
                            self.scan_bucket(i as usize, j as usize, p, exclude, &mut best);
                        }
                    }
                }
                for j in (cj - k + 1).max(0)..=(cj + k - 1).min(self.rows as isize - 1) {
                    for i in [ci - k, ci + k] {
                        if i >= 0 && i < self.cols as isize {
                            self.scan_bucket(i as usize, j as usize, p, exclude, &mut best);
                        }
                    }
                }
            }
            // anything outside the scanned rings is at least ring·cell away
            if best.is_finite() && ring as f64 * self.cell >= best {
                break;
            }
        }
        best
    }
}

/// Values with exact duplicates removed, used for resolution estimates so
/// repeated grid values (e.g. θ-independent closed forms) do not collapse
/// nearest-neighbor spacings to zero.
pub(crate) fn distinct_values(values: &[Complex64]) -> Vec<Complex64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v.dedup_by(|a, b| a.re == b.re && a.im == b.im);
    v
}

/// Max nearest-neighbor spacing over the distinct values; 0 for fewer than
/// two distinct points.
pub(crate) fn max_nn_spacing(values: &[Complex64]) -> f64 {
    let distinct = distinct_values(values);
    if distinct.len() < 2 {
        return 0.0;
    }
    let grid = BucketGrid::build(distinct.clone());
    let query = |i: usize| grid.nearest(distinct[i], Some(i as u32));
    #[cfg(feature = "parallel")]
    {
        (0..distinct.len())
            .into_par_iter()
            .map(query)
            .reduce(|| 0.0, f64::max)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..distinct.len()).map(query).fold(0.0, f64::max)
    }
}

/// `sup_{a ∈ from} dist(a, to)`.
pub(crate) fn one_sided_hausdorff(from: &[Complex64], to: &BucketGrid) -> f64 {
    let query = |p: &Complex64| to.nearest(*p, None);
    #[cfg(feature = "parallel")]
    {
        from.par_iter().map(query).reduce(|| 0.0, f64::max)
    }
    #[cfg(not(feature = "parallel"))]
    {
        from.iter().map(query).fold(0.0, f64::max)
    }
}
