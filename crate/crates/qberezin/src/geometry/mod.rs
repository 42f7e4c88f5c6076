//! Sampling `Ber_q(T)` as a planar point cloud and estimating `ber_q(T)`.
//!
//! A [`SampleGrid`] fixes radii (uniform in the t-parameter by default,
//! since every in-scope closed form is driven by `t`), a sweep of `w₁`
//! phases, both ± branches per grid node, and optionally the circle branch
//! at `w₁ = 0`. Grid evaluation is embarrassingly parallel: with the
//! `parallel` feature (default) the points are computed by rayon and
//! written back in pre-assigned order, so the output is deterministic and
//! identical to the sequential fallback.

mod checks;
mod nn;

pub use checks::{
    compare_to_closed_form, convexity_midpoint_test, expected_convexity,
    expected_symmetry_axis, expects_rotation_invariance, geometry_report, rotation_test,
    symmetry_test, Axis, ClosedFormDeviation, ConvexityVerdict, GeometryReport, ReportOptions,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::kernel::{
    minus_branch_argmin, radius_for_t, solve_pairs, t_at_radius, t_range, ConstrainedPair,
    DiskPoint, PairBranch, QParam,
};
use crate::operators::{berezin_value_closed, OperatorSpec};
use crate::{Error, Result, BERQ_R_MAX, DEFAULT_R_MAX};

const TAU: f64 = std::f64::consts::TAU;

/// How sampled radii are spaced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialSchedule {
    /// Radii chosen so the t-parameter is uniform over its attainable
    /// range; equidistributes range coverage for t-driven closed forms.
    UniformInT,
    /// Radii uniform in `(0, r_max]`; matches figure-style sweeps.
    UniformInR,
}

/// Sampling plan for one operator/q combination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    pub q: QParam,
    pub radial_count: usize,
    pub angular_count: usize,
    pub r_max: f64,
    pub radial_schedule: RadialSchedule,
    pub include_circle_branch: bool,
}

impl SampleGrid {
    pub fn new(
        q: QParam,
        radial_count: usize,
        angular_count: usize,
        r_max: f64,
        radial_schedule: RadialSchedule,
        include_circle_branch: bool,
    ) -> Result<Self> {
        if radial_count < 2 {
            return Err(Error::InvalidGrid(format!(
                "radial_count must be at least 2, got {radial_count}"
            )));
        }
        if angular_count < 1 {
            return Err(Error::InvalidGrid(format!(
                "angular_count must be at least 1, got {angular_count}"
            )));
        }
        if !(r_max > 0.0 && r_max < 1.0) {
            return Err(Error::InvalidGrid(format!(
                "r_max must lie in (0, 1), got {r_max}"
            )));
        }
        Ok(Self {
            q,
            radial_count,
            angular_count,
            r_max,
            radial_schedule,
            include_circle_branch,
        })
    }

    /// Plotting defaults: 400 radii, 720 angles, r_max 0.995, uniform in t,
    /// circle branch included.
    pub fn with_defaults(q: QParam) -> Self {
        Self {
            q,
            radial_count: 400,
            angular_count: 720,
            r_max: DEFAULT_R_MAX,
            radial_schedule: RadialSchedule::UniformInT,
            include_circle_branch: true,
        }
    }

    /// The radii this grid samples, in deterministic order.
    pub fn radii(&self) -> Result<Vec<f64>> {
        match self.radial_schedule {
            RadialSchedule::UniformInR => Ok((1..=self.radial_count)
                .map(|i| self.r_max * i as f64 / self.radial_count as f64)
                .collect()),
            RadialSchedule::UniformInT => {
                let q = self.q;
                let t_hi = t_at_radius(q, self.r_max, PairBranch::Plus)?;
                let t_lo = if q.value() < 1.0 {
                    if minus_branch_argmin(q) <= self.r_max {
                        t_range(q).lo
                    } else {
                        t_at_radius(q, self.r_max, PairBranch::Minus)?
                    }
                } else {
                    // at q = 1 the range is (0, 1); stay strictly positive
                    t_hi * 0.5 / self.radial_count as f64
                };
                let n = self.radial_count;
                (0..n)
                    .map(|i| {
                        let t = t_lo + (t_hi - t_lo) * i as f64 / (n - 1) as f64;
                        let branch = if t > 0.0 { PairBranch::Plus } else { PairBranch::Minus };
                        radius_for_t(q, t, branch)
                    })
                    .collect()
            }
        }
    }
}

/// One sampled value with the pair that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    #[serde(with = "crate::complex_serde")]
    pub value: Complex64,
    pub w1: DiskPoint,
    pub w2: DiskPoint,
    pub branch: PairBranch,
    /// Phase of `w₁` on the ± branches; the circle phase of `w₂` on the
    /// circle branch.
    pub theta: f64,
}

/// A sampled q-Berezin range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub q: f64,
    pub points: Vec<SamplePoint>,
    /// Estimated max nearest-neighbor spacing over distinct values; 0 for
    /// degenerate clouds.
    pub resolution: f64,
}

impl PointCloud {
    pub fn from_samples(q: f64, points: Vec<SamplePoint>) -> Self {
        let values: Vec<Complex64> = points.iter().map(|p| p.value).collect();
        let resolution = nn::max_nn_spacing(&values);
        Self {
            q,
            points,
            resolution,
        }
    }

    pub fn values(&self) -> Vec<Complex64> {
        self.points.iter().map(|p| p.value).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The sub-cloud on one branch (`"plus"`, `"minus"`, `"circle"`).
    pub fn branch_subcloud(&self, label: &str) -> PointCloud {
        let points: Vec<SamplePoint> = self
            .points
            .iter()
            .filter(|p| p.branch.label() == label)
            .copied()
            .collect();
        PointCloud::from_samples(self.q, points)
    }

    /// A cloud with every value transformed, keeping provenance; the
    /// resolution is re-estimated.
    pub fn map_values(&self, f: impl Fn(Complex64) -> Complex64) -> PointCloud {
        let points: Vec<SamplePoint> = self
            .points
            .iter()
            .map(|p| SamplePoint {
                value: f(p.value),
                ..*p
            })
            .collect();
        PointCloud::from_samples(self.q, points)
    }
}

#[derive(Debug, Clone, Copy)]
struct Job {
    radial: usize,
    angular: usize,
    r: f64,
    theta: f64,
    branch: PairBranch,
}

fn build_jobs(grid: &SampleGrid) -> Result<Vec<Job>> {
    let radii = grid.radii()?;
    let mut jobs =
        Vec::with_capacity(radii.len() * grid.angular_count * 2 + grid.angular_count);
    for (i, &r) in radii.iter().enumerate() {
        for j in 0..grid.angular_count {
            let theta = TAU * j as f64 / grid.angular_count as f64;
            for branch in [PairBranch::Plus, PairBranch::Minus] {
                jobs.push(Job {
                    radial: i,
                    angular: j,
                    r,
                    theta,
                    branch,
                });
            }
        }
    }
    if grid.include_circle_branch {
        for j in 0..grid.angular_count {
            let theta = TAU * j as f64 / grid.angular_count as f64;
            jobs.push(Job {
                radial: 0,
                angular: j,
                r: 0.0,
                theta,
                branch: PairBranch::CirclePhase(theta),
            });
        }
    }
    Ok(jobs)
}

fn eval_job<F>(q: QParam, job: &Job, f: &F) -> Result<SamplePoint>
where
    F: Fn(&ConstrainedPair) -> Result<Complex64>,
{
    let located = |e: Error| Error::AtGridPoint {
        radial: job.radial,
        angular: job.angular,
        branch: job.branch.label(),
        source: Box::new(e),
    };
    let pair = match job.branch {
        PairBranch::CirclePhase(theta) => {
            solve_pairs(q, DiskPoint::origin(), PairBranch::CirclePhase(theta))
        }
        branch => DiskPoint::from_polar(job.r, job.theta)
            .and_then(|w1| solve_pairs(q, w1, branch)),
    }
    .map_err(located)?;
    let value = f(&pair).map_err(located)?;
    Ok(SamplePoint {
        value,
        w1: pair.w1(),
        w2: pair.w2(),
        branch: pair.branch(),
        theta: job.theta,
    })
}

fn run_jobs_sequential<F>(q: QParam, jobs: &[Job], f: &F) -> Result<Vec<SamplePoint>>
where
    F: Fn(&ConstrainedPair) -> Result<Complex64>,
{
    jobs.iter().map(|job| eval_job(q, job, f)).collect()
}

#[cfg(feature = "parallel")]
fn run_jobs_parallel<F>(q: QParam, jobs: &[Job], f: &F) -> Result<Vec<SamplePoint>>
where
    F: Fn(&ConstrainedPair) -> Result<Complex64> + Sync,
{
    jobs.par_iter()
        .with_min_len(256)
        .map(|job| eval_job(q, job, f))
        .collect()
}

/// Samples any pair-evaluation function over the grid. Deterministic
/// ordering by (radial index, angular index, branch), circle block last.
pub fn sample_range_with<F>(grid: &SampleGrid, f: F) -> Result<PointCloud>
where
    F: Fn(&ConstrainedPair) -> Result<Complex64> + Sync,
{
    let jobs = build_jobs(grid)?;
    #[cfg(feature = "parallel")]
    let points = run_jobs_parallel(grid.q, &jobs, &f)?;
    #[cfg(not(feature = "parallel"))]
    let points = run_jobs_sequential(grid.q, &jobs, &f)?;
    Ok(PointCloud::from_samples(grid.q.value(), points))
}

/// Samples the closed-form Berezin values of `op` over the grid.
pub fn sample_range(op: &OperatorSpec, grid: &SampleGrid) -> Result<PointCloud> {
    sample_range_with(grid, |pair| berezin_value_closed(op, pair).map(|v| v.value))
}

/// Sequential twin of [`sample_range`]; always available, used by the
/// benchmark suite to compare against the parallel path.
pub fn sample_range_sequential(op: &OperatorSpec, grid: &SampleGrid) -> Result<PointCloud> {
    let jobs = build_jobs(grid)?;
    let f = |pair: &ConstrainedPair| berezin_value_closed(op, pair).map(|v| v.value);
    let points = run_jobs_sequential(grid.q, &jobs, &f)?;
    Ok(PointCloud::from_samples(grid.q.value(), points))
}

/// Rayon twin of [`sample_range_sequential`].
#[cfg(feature = "parallel")]
pub fn sample_range_parallel(op: &OperatorSpec, grid: &SampleGrid) -> Result<PointCloud> {
    let jobs = build_jobs(grid)?;
    let f = |pair: &ConstrainedPair| berezin_value_closed(op, pair).map(|v| v.value);
    let points = run_jobs_parallel(grid.q, &jobs, &f)?;
    Ok(PointCloud::from_samples(grid.q.value(), points))
}

/// Where and how large the ber_q lower bound was found.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerqEstimate {
    pub value: f64,
    pub r: f64,
    pub theta: f64,
    pub branch: PairBranch,
}

/// Lower-bound estimate of `ber_q(T)`: coarse grid plus golden-section
/// refinement in `r` on the best branch, with a full angular sweep at each
/// radius. The coarse maximum is a guaranteed lower bound; the refinement
/// is a heuristic that exploits the (radial profile) × (unimodular phase)
/// structure of the in-scope closed forms.
pub fn estimate_berq_with<F>(q: QParam, budget: usize, f: F) -> Result<BerqEstimate>
where
    F: Fn(&ConstrainedPair) -> Result<Complex64> + Sync,
{
    const NTHETA: usize = 64;
    let nr = (budget / (4 * NTHETA)).clamp(16, 8192);

    let sweep = |r: f64, branch: PairBranch| -> Result<(f64, f64)> {
        let mut best = (0.0f64, 0.0f64);
        for j in 0..NTHETA {
            let theta = TAU * j as f64 / NTHETA as f64;
            let pair = solve_pairs(q, DiskPoint::from_polar(r, theta)?, branch)?;
            let m = f(&pair)?.norm();
            if m > best.0 {
                best = (m, theta);
            }
        }
        Ok(best)
    };

    // circle branch
    let mut best = BerqEstimate {
        value: 0.0,
        r: 0.0,
        theta: 0.0,
        branch: PairBranch::CirclePhase(0.0),
    };
    for j in 0..NTHETA {
        let theta = TAU * j as f64 / NTHETA as f64;
        let pair = solve_pairs(q, DiskPoint::origin(), PairBranch::CirclePhase(theta))?;
        let m = f(&pair)?.norm();
        if m > best.value {
            best = BerqEstimate {
                value: m,
                r: 0.0,
                theta,
                branch: PairBranch::CirclePhase(theta),
            };
        }
    }

    let coarse_grid = SampleGrid::new(
        q,
        nr,
        1,
        BERQ_R_MAX,
        RadialSchedule::UniformInT,
        false,
    )?;
    let mut radii = coarse_grid.radii()?;
    radii.sort_by(f64::total_cmp);
    radii.dedup();

    let coarse_one = |(&r, branch): (&f64, PairBranch)| -> Result<(f64, f64, f64, PairBranch)> {
        let (m, theta) = sweep(r, branch)?;
        Ok((m, r, theta, branch))
    };
    let mut tasks = Vec::with_capacity(radii.len() * 2);
    for branch in [PairBranch::Plus, PairBranch::Minus] {
        for r in &radii {
            tasks.push((r, branch));
        }
    }
    #[cfg(feature = "parallel")]
    let coarse: Vec<(f64, f64, f64, PairBranch)> = tasks
        .par_iter()
        .map(|t| coarse_one(*t))
        .collect::<Result<_>>()?;
    #[cfg(not(feature = "parallel"))]
    let coarse: Vec<(f64, f64, f64, PairBranch)> =
        tasks.iter().map(|t| coarse_one(*t)).collect::<Result<_>>()?;

    let mut best_idx = None;
    for (k, c) in coarse.iter().enumerate() {
        if c.0 > best.value {
            best = BerqEstimate {
                value: c.0,
                r: c.1,
                theta: c.2,
                branch: c.3,
            };
            best_idx = Some(k);
        }
    }

    // golden-section refinement around the coarse argmax
    if let Some(k) = best_idx {
        let branch = coarse[k].3;
        let i = k % radii.len();
        let a0 = if i > 0 { radii[i - 1] } else { radii[0].min(1e-6) };
        let b0 = if i + 1 < radii.len() { radii[i + 1] } else { BERQ_R_MAX };
        const INV_PHI: f64 = 0.618_033_988_749_894_9;
        let (mut a, mut b) = (a0, b0);
        let mut x1 = b - INV_PHI * (b - a);
        let mut x2 = a + INV_PHI * (b - a);
        let mut f1 = sweep(x1, branch)?;
        let mut f2 = sweep(x2, branch)?;
        for _ in 0..48 {
            if f1.0 > f2.0 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - INV_PHI * (b - a);
                f1 = sweep(x1, branch)?;
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + INV_PHI * (b - a);
                f2 = sweep(x2, branch)?;
            }
        }
        for (x, fx) in [(x1, f1), (x2, f2)] {
            if fx.0 > best.value {
                best = BerqEstimate {
                    value: fx.0,
                    r: x,
                    theta: fx.1,
                    branch,
                };
            }
        }
    }

    Ok(best)
}

/// [`estimate_berq_with`] on the closed-form values of `op`, with argmax
/// detail.
pub fn estimate_berq_detailed(
    op: &OperatorSpec,
    q: QParam,
    budget: usize,
) -> Result<BerqEstimate> {
    estimate_berq_with(q, budget, |pair| {
        berezin_value_closed(op, pair).map(|v| v.value)
    })
}

/// Lower-bound estimate of `ber_q(T)`.
pub fn estimate_berq(op: &OperatorSpec, q: QParam, budget: usize) -> Result<f64> {
    Ok(estimate_berq_detailed(op, q, budget)?.value)
}

/// Symmetric Hausdorff distance between two sampled clouds.
pub fn hausdorff(a: &PointCloud, b: &PointCloud) -> f64 {
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    let av = a.values();
    let bv = b.values();
    let ga = nn::BucketGrid::build(av.clone());
    let gb = nn::BucketGrid::build(bv.clone());
    nn::one_sided_hausdorff(&av, &gb).max(nn::one_sided_hausdorff(&bv, &ga))
}
