//! Geometric evidence tests on sampled clouds: convexity by midpoint
//! probing, reflection and rotation defects, and comparison against the
//! analytic range descriptions.
//!
//! Verdicts are evidence, not proofs: the witness threshold of
//! 10 × resolution separates genuine gaps from sampling artifacts, and
//! defects below 2 × resolution count as evidence of the corresponding
//! invariance.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::closed_form::{
    closed_form_range, toeplitz_ellipse_point, ClosedFormRange, TOEPLITZ_ELLIPSES_ID,
};
use crate::geometry::nn::{distinct_values, one_sided_hausdorff, BucketGrid};
use crate::geometry::{estimate_berq, PointCloud};
use crate::kernel::{PairBranch, QParam};
use crate::operators::{OperatorSpec, SequenceLaw};
use crate::{horner, Error, Result, WITNESS_RESOLUTION_FACTOR};

/// Reflection axis for symmetry tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Axis {
    RealAxis,
    LineThroughOriginAtAngle(f64),
}

impl Axis {
    fn reflect(self, z: Complex64) -> Complex64 {
        match self {
            Axis::RealAxis => z.conj(),
            Axis::LineThroughOriginAtAngle(psi) => {
                Complex64::from_polar(1.0, 2.0 * psi) * z.conj()
            }
        }
    }
}

/// Outcome of the midpoint convexity probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ConvexityVerdict {
    ConvexWithinTolerance,
    NonconvexWitness {
        #[serde(with = "crate::complex_serde")]
        u: Complex64,
        #[serde(with = "crate::complex_serde")]
        v: Complex64,
        #[serde(with = "crate::complex_serde")]
        midpoint: Complex64,
        distance: f64,
    },
}

impl ConvexityVerdict {
    pub fn is_convex(&self) -> bool {
        matches!(self, ConvexityVerdict::ConvexWithinTolerance)
    }
}

/// Samples `trials` point pairs with a seeded generator, measures each
/// midpoint's distance to the cloud, and reports the farthest midpoint as a
/// witness when it exceeds 10 × resolution. Reproducible for a fixed seed.
pub fn convexity_midpoint_test(
    cloud: &PointCloud,
    trials: usize,
    seed: u64,
) -> Result<ConvexityVerdict> {
    if cloud.len() < 3 {
        return Err(Error::DegenerateCloud);
    }
    let distinct = distinct_values(&cloud.values());
    if distinct.len() < 2 {
        // all samples coincide; every midpoint lies on the cloud
        return Ok(ConvexityVerdict::ConvexWithinTolerance);
    }
    let diameter = cloud_diameter(&distinct);
    let threshold = (WITNESS_RESOLUTION_FACTOR * cloud.resolution)
        .max(1e-12 * (1.0 + diameter));
    let grid = BucketGrid::build(distinct.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: Option<(Complex64, Complex64, Complex64, f64)> = None;
    for _ in 0..trials {
        let i = rng.random_range(0..distinct.len());
        let j = rng.random_range(0..distinct.len());
        if i == j {
            continue;
        }
        let (u, v) = (distinct[i], distinct[j]);
        let midpoint = 0.5 * (u + v);
        let distance = grid.nearest(midpoint, None);
        if distance > threshold && worst.map_or(true, |w| distance > w.3) {
            worst = Some((u, v, midpoint, distance));
        }
    }
    Ok(match worst {
        Some((u, v, midpoint, distance)) => ConvexityVerdict::NonconvexWitness {
            u,
            v,
            midpoint,
            distance,
        },
        None => ConvexityVerdict::ConvexWithinTolerance,
    })
}

fn cloud_diameter(values: &[Complex64]) -> f64 {
    let mut min = Complex64::new(f64::INFINITY, f64::INFINITY);
    let mut max = Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for v in values {
        min.re = min.re.min(v.re);
        min.im = min.im.min(v.im);
        max.re = max.re.max(v.re);
        max.im = max.im.max(v.im);
    }
    (max - min).norm()
}

/// One-sided Hausdorff distance from the reflected cloud to the cloud.
/// Values at or below 2 × resolution evidence symmetry about the axis.
pub fn symmetry_test(cloud: &PointCloud, axis: Axis) -> f64 {
    if cloud.is_empty() {
        return 0.0;
    }
    let values = cloud.values();
    let reflected: Vec<Complex64> = values.iter().map(|&z| axis.reflect(z)).collect();
    let grid = BucketGrid::build(values);
    one_sided_hausdorff(&reflected, &grid)
}

/// Max over sampled rotation angles of the one-sided Hausdorff distance
/// from the rotated cloud to the cloud. Small values evidence a disc or
/// annulus shape.
pub fn rotation_test(cloud: &PointCloud, samples: usize) -> f64 {
    if cloud.is_empty() || samples == 0 {
        return 0.0;
    }
    let values = cloud.values();
    let grid = BucketGrid::build(values.clone());
    let mut worst = 0.0f64;
    for k in 1..=samples {
        let zeta = std::f64::consts::TAU * k as f64 / (samples + 1) as f64;
        let rot = Complex64::from_polar(1.0, zeta);
        let rotated: Vec<Complex64> = values.iter().map(|&z| rot * z).collect();
        worst = worst.max(one_sided_hausdorff(&rotated, &grid));
    }
    worst
}

/// Deviation of a cloud from an analytic range description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormDeviation {
    /// Max distance from any cloud point to the analytic set.
    pub containment: f64,
    /// Gap between attained analytic extremes and the sampled extremes.
    pub extremes_gap: f64,
}

impl ClosedFormDeviation {
    pub fn max(&self) -> f64 {
        self.containment.max(self.extremes_gap)
    }
}

fn interval_distance(z: Complex64, lo: f64, hi: f64) -> f64 {
    let outside = (lo - z.re).max(z.re - hi).max(0.0);
    (z.im * z.im + outside * outside).sqrt()
}

/// Compares a cloud against a known closed form. Errors on
/// [`ClosedFormRange::Unknown`].
pub fn compare_to_closed_form(
    cloud: &PointCloud,
    form: &ClosedFormRange,
) -> Result<ClosedFormDeviation> {
    let values = cloud.values();
    if values.is_empty() {
        return Err(Error::DegenerateCloud);
    }
    match form {
        ClosedFormRange::Unknown => Err(Error::UnknownClosedForm),
        ClosedFormRange::PointSet { values: targets } => {
            let containment = values
                .iter()
                .map(|z| {
                    targets
                        .iter()
                        .map(|t| (z - t).norm())
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(0.0, f64::max);
            let grid = BucketGrid::build(values);
            let extremes_gap = targets
                .iter()
                .map(|t| grid.nearest(*t, None))
                .fold(0.0, f64::max);
            Ok(ClosedFormDeviation {
                containment,
                extremes_gap,
            })
        }
        ClosedFormRange::RealInterval {
            lo,
            hi,
            lo_closed,
            hi_closed,
        } => {
            let containment = values
                .iter()
                .map(|z| interval_distance(*z, *lo, *hi))
                .fold(0.0, f64::max);
            let min_re = values.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
            let max_re = values.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
            let mut extremes_gap = 0.0f64;
            if *lo_closed {
                extremes_gap = extremes_gap.max((min_re - lo).max(0.0));
            }
            if *hi_closed {
                extremes_gap = extremes_gap.max((hi - max_re).max(0.0));
            }
            Ok(ClosedFormDeviation {
                containment,
                extremes_gap,
            })
        }
        ClosedFormRange::Disc {
            center,
            radius,
            boundary_included,
        } => {
            let max_dist = values
                .iter()
                .map(|z| (z - center).norm())
                .fold(0.0, f64::max);
            let containment = (max_dist - radius).max(0.0);
            let extremes_gap = if *boundary_included {
                (radius - max_dist).max(0.0)
            } else {
                0.0
            };
            Ok(ClosedFormDeviation {
                containment,
                extremes_gap,
            })
        }
        ClosedFormRange::Circle { center, radius } => {
            let containment = values
                .iter()
                .map(|z| ((z - center).norm() - radius).abs())
                .fold(0.0, f64::max);
            Ok(ClosedFormDeviation {
                containment,
                extremes_gap: 0.0,
            })
        }
        ClosedFormRange::CurveFamily { id } => {
            if id != TOEPLITZ_ELLIPSES_ID {
                return Err(Error::UnknownClosedForm);
            }
            let q = QParam::new(cloud.q).map_err(|_| Error::InvalidQ(cloud.q))?;
            let mut containment = 0.0f64;
            for p in &cloud.points {
                let expected = match p.branch {
                    PairBranch::CirclePhase(phase) => {
                        toeplitz_ellipse_point(q, 0.0, phase, p.branch)?
                    }
                    _ => toeplitz_ellipse_point(q, p.w1.modulus(), p.theta, p.branch)?,
                };
                containment = containment.max((p.value - expected).norm());
            }
            Ok(ClosedFormDeviation {
                containment,
                extremes_gap: 0.0,
            })
        }
        ClosedFormRange::ScaledDiscImage { factor, symbol } => {
            // reference sampling of factor·p(𝔻), ring radii matched to the
            // sampled |w₂| ceiling so the outer rings align
            let distinct = distinct_values(&values);
            let rho_max = cloud
                .points
                .iter()
                .map(|p| p.w2.modulus())
                .fold(0.0, f64::max)
                .min(1.0 - 1e-12);
            let nr = ((distinct.len() as f64).sqrt().ceil() as usize).clamp(48, 512);
            let na = 4 * nr;
            let mut reference = Vec::with_capacity(nr * na + 1);
            reference.push(factor * horner(symbol, Complex64::new(0.0, 0.0)));
            for i in 0..nr {
                let rho = rho_max * (i + 1) as f64 / nr as f64;
                for j in 0..na {
                    let phi = std::f64::consts::TAU * j as f64 / na as f64;
                    let z = Complex64::from_polar(rho, phi);
                    reference.push(factor * horner(symbol, z));
                }
            }
            let ref_grid = BucketGrid::build(reference.clone());
            let cloud_grid = BucketGrid::build(distinct.clone());
            let containment = one_sided_hausdorff(&distinct, &ref_grid)
                .max(one_sided_hausdorff(&reference, &cloud_grid));
            Ok(ClosedFormDeviation {
                containment,
                extremes_gap: 0.0,
            })
        }
    }
}

/// The symmetry axis the theory predicts for this operator, when any.
pub fn expected_symmetry_axis(op: &OperatorSpec) -> Option<Axis> {
    let real_law = |law: &SequenceLaw| match law {
        SequenceLaw::MonomialAtK { .. } | SequenceLaw::Alternating { .. } => true,
        SequenceLaw::Geometric { beta } => beta.im == 0.0,
        SequenceLaw::PowersOfI => false,
        SequenceLaw::ExplicitList { values } => values.iter().all(|z| z.im == 0.0),
    };
    match op {
        OperatorSpec::RankOneMonomial { .. } => Some(Axis::RealAxis),
        OperatorSpec::FiniteRank { .. } => Some(Axis::RealAxis),
        OperatorSpec::DiagonalModSquared { .. } => Some(Axis::RealAxis),
        OperatorSpec::DiagonalGeneral { alpha } => {
            real_law(alpha).then_some(Axis::RealAxis)
        }
        OperatorSpec::MultPoly { coeffs } => coeffs
            .iter()
            .all(|z| z.im == 0.0)
            .then_some(Axis::RealAxis),
        OperatorSpec::ToeplitzTwoCos => Some(Axis::RealAxis),
        // every weighted-shift cloud is a union of circles centered at 0
        OperatorSpec::WeightedShift { .. } => Some(Axis::RealAxis),
        OperatorSpec::Banded { bands } => {
            bands.iter().all(real_law).then_some(Axis::RealAxis)
        }
        OperatorSpec::CompositionLinear { xi } => (xi.im == 0.0).then_some(Axis::RealAxis),
        // the conjugation identity reflects through the real line for any α
        OperatorSpec::CompositionMobius { .. } => Some(Axis::RealAxis),
    }
}

/// Whether the theory predicts a rotation-invariant (disc-shaped) range.
pub fn expects_rotation_invariance(op: &OperatorSpec) -> bool {
    match op {
        OperatorSpec::RankOneMonomial { n, m } => *n >= 1 && m != n,
        OperatorSpec::WeightedShift { .. } => true,
        OperatorSpec::MultPoly { coeffs } => {
            // pure monomial c·zⁿ, n ≥ 1
            match coeffs.iter().rposition(|z| z.norm() > 0.0) {
                Some(deg) if deg >= 1 => coeffs[..deg].iter().all(|z| z.norm() == 0.0),
                _ => false,
            }
        }
        _ => false,
    }
}

/// Whether the paper settles convexity for this operator: `Some(true)` for
/// proved-convex classes, `Some(false)` where nonconvexity is exhibited,
/// `None` where it is open or parameter-dependent.
pub fn expected_convexity(op: &OperatorSpec) -> Option<bool> {
    match op {
        OperatorSpec::RankOneMonomial { n, m } => (*n >= 1 && m > n).then_some(true),
        OperatorSpec::DiagonalModSquared { .. } => Some(true),
        OperatorSpec::DiagonalGeneral { alpha } => match alpha {
            SequenceLaw::PowersOfI => Some(false),
            _ => None,
        },
        OperatorSpec::MultPoly { coeffs } => {
            let deg = coeffs.iter().rposition(|z| z.norm() > 0.0).unwrap_or(0);
            (deg <= 1).then_some(true)
        }
        OperatorSpec::WeightedShift { weights } => match weights {
            SequenceLaw::Geometric { .. } | SequenceLaw::Alternating { .. } => Some(true),
            _ => None,
        },
        OperatorSpec::CompositionLinear { xi } => {
            if xi.im == 0.0 && (-1.0..=1.0).contains(&xi.re) {
                Some(true)
            } else if xi.im != 0.0 {
                Some(false)
            } else {
                None
            }
        }
        OperatorSpec::CompositionMobius { alpha } => (alpha.norm() == 0.0).then_some(true),
        _ => None,
    }
}

/// Options for [`geometry_report`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ReportOptions {
    pub trials: usize,
    pub seed: u64,
    pub budget: usize,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            trials: 2000,
            seed: 42,
            budget: 40_000,
        }
    }
}

/// Bundled geometric evidence for one sampled cloud.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeometryReport {
    pub convexity: ConvexityVerdict,
    pub symmetry_defect: f64,
    pub rotation_defect: f64,
    pub berq_estimate: f64,
    pub closed_form_deviation: Option<ClosedFormDeviation>,
}

/// Runs the geometric tests applicable to `op` on an already-sampled cloud.
pub fn geometry_report(
    op: &OperatorSpec,
    cloud: &PointCloud,
    opts: &ReportOptions,
) -> Result<GeometryReport> {
    let q = QParam::new(cloud.q)?;
    let convexity = convexity_midpoint_test(cloud, opts.trials, opts.seed)?;
    let axis = expected_symmetry_axis(op).unwrap_or(Axis::RealAxis);
    let symmetry_defect = symmetry_test(cloud, axis);
    let rotation_defect = rotation_test(cloud, 8);
    let berq_estimate = estimate_berq(op, q, opts.budget)?;
    let form = closed_form_range(op, q);
    let closed_form_deviation = if form.is_unknown() {
        None
    } else {
        Some(compare_to_closed_form(cloud, &form)?)
    };
    Ok(GeometryReport {
        convexity,
        symmetry_defect,
        rotation_defect,
        berq_estimate,
        closed_form_deviation,
    })
}
