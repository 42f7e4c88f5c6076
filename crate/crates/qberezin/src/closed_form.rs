//! Analytic descriptions of `Ber_q(T)` where one is known, used as ground
//! truth by the range-geometry checks.
//!
//! The diagonal families reduce to real intervals in `t`, multiplication
//! operators to scaled images `q·p(𝔻)`, the two-cosine Toeplitz symbol to a
//! family of ellipses plus a circle, rank-one monomials and weighted shifts
//! to discs centered at the origin, and the linear composition operators to
//! a point or an interval for real `ξ`. Disc radii without a printed formula
//! (rank-one, shifts) are computed numerically as the supremum of the radial
//! profile over both branches.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::kernel::{solve_pairs, DiskPoint, PairBranch, QParam};
use crate::operators::{berezin_value_closed, OperatorSpec, SequenceLaw};
use crate::Result;

/// Curve-family id for the Toeplitz two-cosine range (ellipses with
/// semi-axes `q(λ±r ± r)` plus the circle of radius `q√(1−q²)`).
pub const TOEPLITZ_ELLIPSES_ID: &str = "toeplitz_two_cos_ellipses";

/// Analytic description of a q-Berezin range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum ClosedFormRange {
    PointSet {
        #[serde(with = "crate::complex_vec_serde")]
        values: Vec<Complex64>,
    },
    RealInterval {
        lo: f64,
        hi: f64,
        lo_closed: bool,
        hi_closed: bool,
    },
    Disc {
        #[serde(with = "crate::complex_serde")]
        center: Complex64,
        radius: f64,
        boundary_included: bool,
    },
    Circle {
        #[serde(with = "crate::complex_serde")]
        center: Complex64,
        radius: f64,
    },
    CurveFamily {
        id: String,
    },
    /// The scaled polynomial image `factor · p(𝔻)`.
    ScaledDiscImage {
        factor: f64,
        #[serde(with = "crate::complex_vec_serde")]
        symbol: Vec<Complex64>,
    },
    Unknown,
}

impl ClosedFormRange {
    pub fn is_unknown(&self) -> bool {
        matches!(self, ClosedFormRange::Unknown)
    }
}

/// Supremum of `|⟨T k̂_{w₁}, k̂_{w₂}⟩|` over both ± branches at phase zero,
/// plus the circle branch; a dense radial grid refined by golden section.
///
/// Valid for operators whose value modulus is independent of the phase of
/// `w₁` (rank-one monomials, weighted shifts).
fn radial_profile_sup(op: &OperatorSpec, q: QParam) -> f64 {
    let modulus_at = |r: f64, branch: PairBranch| -> f64 {
        DiskPoint::from_polar(r, 0.0)
            .and_then(|w1| solve_pairs(q, w1, branch))
            .and_then(|pair| berezin_value_closed(op, &pair))
            .map(|v| v.value.norm())
            .unwrap_or(0.0)
    };
    let circle = solve_pairs(q, DiskPoint::origin(), PairBranch::CirclePhase(0.0))
        .and_then(|pair| berezin_value_closed(op, &pair))
        .map(|v| v.value.norm())
        .unwrap_or(0.0);

    let n = 4096;
    let r_lo = 1e-6;
    let r_hi = 1.0 - 1e-9;
    let mut best = circle;
    for branch in [PairBranch::Plus, PairBranch::Minus] {
        let mut grid_best = 0.0f64;
        let mut grid_arg = 0usize;
        for i in 0..=n {
            let r = r_lo + (r_hi - r_lo) * i as f64 / n as f64;
            let v = modulus_at(r, branch);
            if v > grid_best {
                grid_best = v;
                grid_arg = i;
            }
        }
        // golden refinement in the bracket around the grid argmax
        let step = (r_hi - r_lo) / n as f64;
        let mut a = r_lo + step * grid_arg.saturating_sub(1) as f64;
        let mut b = (r_lo + step * (grid_arg + 1) as f64).min(r_hi);
        const INV_PHI: f64 = 0.618_033_988_749_894_9;
        let mut x1 = b - INV_PHI * (b - a);
        let mut x2 = a + INV_PHI * (b - a);
        let mut f1 = modulus_at(x1, branch);
        let mut f2 = modulus_at(x2, branch);
        for _ in 0..80 {
            if f1 > f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - INV_PHI * (b - a);
                f1 = modulus_at(x1, branch);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + INV_PHI * (b - a);
                f2 = modulus_at(x2, branch);
            }
        }
        best = best.max(grid_best).max(f1).max(f2);
    }
    best
}

fn trimmed_degree(coeffs: &[Complex64]) -> usize {
    coeffs
        .iter()
        .rposition(|z| z.norm() > 0.0)
        .unwrap_or(0)
}

/// The analytic range description, or [`ClosedFormRange::Unknown`] when the
/// supported results do not cover the operator.
pub fn closed_form_range(op: &OperatorSpec, q: QParam) -> ClosedFormRange {
    let qv = q.value();
    match op {
        OperatorSpec::RankOneMonomial { n, m } => {
            if *n >= 1 && m > n {
                ClosedFormRange::Disc {
                    center: Complex64::new(0.0, 0.0),
                    radius: radial_profile_sup(op, q),
                    boundary_included: true,
                }
            } else {
                ClosedFormRange::Unknown
            }
        }
        OperatorSpec::DiagonalModSquared { weights } => match weights {
            SequenceLaw::MonomialAtK { k } => {
                if *k == 0 {
                    // q(1−t) decreases from 2q/(q+1) to 0
                    return ClosedFormRange::RealInterval {
                        lo: 0.0,
                        hi: 2.0 * qv / (qv + 1.0),
                        lo_closed: false,
                        hi_closed: true,
                    };
                }
                let k = *k;
                let hi = qv / (k as f64 + 1.0) * (k as f64 / (k as f64 + 1.0)).powi(k as i32);
                let lo = if k % 2 == 1 {
                    2.0 * qv / (qv + 1.0) * ((qv - 1.0) / (qv + 1.0)).powi(k as i32)
                } else {
                    0.0
                };
                ClosedFormRange::RealInterval {
                    lo,
                    hi,
                    lo_closed: true,
                    hi_closed: true,
                }
            }
            SequenceLaw::Alternating { a, b } => {
                // attained at t = (q−1)/(q+1); the t → 1 limit is open
                let attained = (qv * (a + b) + (a - b)) / 2.0;
                let limit = qv * (a + b) / 2.0;
                if (attained - limit).abs() < 1e-15 {
                    return ClosedFormRange::RealInterval {
                        lo: attained,
                        hi: attained,
                        lo_closed: true,
                        hi_closed: true,
                    };
                }
                let (lo, hi) = (attained.min(limit), attained.max(limit));
                ClosedFormRange::RealInterval {
                    lo,
                    hi,
                    lo_closed: lo == attained,
                    hi_closed: hi == attained,
                }
            }
            SequenceLaw::Geometric { beta } => ClosedFormRange::RealInterval {
                lo: 0.0,
                hi: 2.0 * qv / (qv + 1.0 - beta.re * (qv - 1.0)),
                lo_closed: false,
                hi_closed: true,
            },
            _ => ClosedFormRange::Unknown,
        },
        OperatorSpec::MultPoly { coeffs } => {
            if coeffs.is_empty() {
                return ClosedFormRange::PointSet {
                    values: vec![Complex64::new(0.0, 0.0)],
                };
            }
            let deg = trimmed_degree(coeffs);
            let only_top = coeffs[..deg].iter().all(|z| z.norm() == 0.0);
            if deg == 0 {
                ClosedFormRange::PointSet {
                    values: vec![qv * coeffs[0]],
                }
            } else if deg == 1 {
                // open disc centered at bq with radius |a|q
                ClosedFormRange::Disc {
                    center: qv * coeffs[0],
                    radius: qv * coeffs[1].norm(),
                    boundary_included: false,
                }
            } else if only_top {
                ClosedFormRange::Disc {
                    center: Complex64::new(0.0, 0.0),
                    radius: qv * coeffs[deg].norm(),
                    boundary_included: false,
                }
            } else {
                ClosedFormRange::ScaledDiscImage {
                    factor: qv,
                    symbol: coeffs.clone(),
                }
            }
        }
        OperatorSpec::ToeplitzTwoCos => ClosedFormRange::CurveFamily {
            id: TOEPLITZ_ELLIPSES_ID.to_string(),
        },
        OperatorSpec::WeightedShift { weights } => match weights {
            SequenceLaw::Geometric { .. } | SequenceLaw::Alternating { .. } => {
                ClosedFormRange::Disc {
                    center: Complex64::new(0.0, 0.0),
                    radius: radial_profile_sup(op, q),
                    boundary_included: true,
                }
            }
            _ => ClosedFormRange::Unknown,
        },
        OperatorSpec::CompositionLinear { xi } => {
            if xi.im != 0.0 {
                return ClosedFormRange::Unknown;
            }
            let xi = xi.re.clamp(-1.0, 1.0);
            if xi == 1.0 {
                ClosedFormRange::PointSet {
                    values: vec![Complex64::new(qv, 0.0)],
                }
            } else {
                ClosedFormRange::RealInterval {
                    lo: 0.0,
                    hi: 2.0 * qv / (qv + 1.0 - xi * qv + xi),
                    lo_closed: false,
                    hi_closed: true,
                }
            }
        }
        OperatorSpec::CompositionMobius { alpha } => {
            if alpha.norm() == 0.0 {
                ClosedFormRange::PointSet {
                    values: vec![Complex64::new(qv, 0.0)],
                }
            } else {
                ClosedFormRange::Unknown
            }
        }
        OperatorSpec::FiniteRank { .. }
        | OperatorSpec::DiagonalGeneral { .. }
        | OperatorSpec::Banded { .. } => ClosedFormRange::Unknown,
    }
}

/// Expected point on the Toeplitz ellipse family for one sample's
/// provenance; used by the curve-family comparison.
pub fn toeplitz_ellipse_point(
    q: QParam,
    r: f64,
    theta: f64,
    branch: PairBranch,
) -> Result<Complex64> {
    match branch {
        PairBranch::CirclePhase(phase) => Ok(Complex64::from_polar(
            q.value() * q.circle_radius(),
            phase,
        )),
        PairBranch::Plus | PairBranch::Minus => {
            let (lp, lm) = crate::kernel::pair_lambda(q, r)?;
            let lambda = if matches!(branch, PairBranch::Plus) { lp } else { lm };
            let chi = lambda * r + r;
            let tau = lambda * r - r;
            Ok(Complex64::new(
                q.value() * chi * theta.cos(),
                q.value() * tau * theta.sin(),
            ))
        }
    }
}
