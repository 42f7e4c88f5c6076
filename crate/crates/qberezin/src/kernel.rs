//! Kernel algebra of H²(𝔻) and the constrained-pair solver.
//!
//! The normalized reproducing kernel at `w ∈ 𝔻` is
//! `k̂_w(z) = √(1−|w|²) · Σ conj(w)ⁿ zⁿ`, and for any two disc points
//!
//! ```text
//! ⟨k̂_{w₁}, k̂_{w₂}⟩ = √((1−|w₁|²)(1−|w₂|²)) / (1 − conj(w₁)·w₂).
//! ```
//!
//! Fixing `q ∈ (0, 1]`, the solutions of `⟨k̂_{w₁}, k̂_{w₂}⟩ = q` are the
//! circle `|w₂| = √(1−q²)` when `w₁ = 0`, and otherwise the two points
//! `w₂ = λ± w₁` with
//!
//! ```text
//! λ± = (r q² ± (1−r²) √(1−q²)) / (r (1 − (1−q²) r²)),    r = |w₁|.
//! ```
//!
//! On every solution `t = conj(w₁)·w₂` is real and sweeps
//! `[(q−1)/(q+1), 1)` as `r` and the branch vary (`(0,1)` when `q = 1`).
//! All closed-form Berezin values downstream are functions of `t`, `w₁`,
//! `w₂`, so this module also inverts `λ_branch(r)·r² = t` for
//! uniform-in-t sampling.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, PAIR_RESIDUAL_TOL, T_IMAG_TOL, W1_ZERO_THRESHOLD};

const TAU: f64 = std::f64::consts::TAU;

/// A point strictly inside the open unit disc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DiskPoint(#[serde(with = "crate::complex_serde")] Complex64);

impl DiskPoint {
    pub fn new(value: Complex64) -> Result<Self> {
        let modulus = value.norm();
        if modulus < 1.0 {
            Ok(Self(value))
        } else {
            Err(Error::OutsideDisc { modulus })
        }
    }

    pub fn from_polar(r: f64, theta: f64) -> Result<Self> {
        Self::new(Complex64::from_polar(r, theta))
    }

    pub fn origin() -> Self {
        Self(Complex64::new(0.0, 0.0))
    }

    pub fn value(self) -> Complex64 {
        self.0
    }

    pub fn modulus(self) -> f64 {
        self.0.norm()
    }

    /// Whether the point falls below the circle-branch switchover threshold.
    pub fn is_origin(self) -> bool {
        self.modulus() < W1_ZERO_THRESHOLD
    }
}

/// The constraint parameter `q ∈ (0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QParam(f64);

impl QParam {
    pub fn new(q: f64) -> Result<Self> {
        if q > 0.0 && q <= 1.0 {
            Ok(Self(q))
        } else {
            Err(Error::InvalidQ(q))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `√(1−q²)`, the circle radius for `w₁ = 0`.
    pub fn circle_radius(self) -> f64 {
        (1.0 - self.0 * self.0).sqrt()
    }
}

/// Which solution of the constraint a pair sits on: one of the two λ±
/// branches for `w₁ ≠ 0`, or a phase on the circle `𝕋_{√(1−q²)}` for
/// `w₁ = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PairBranch {
    Plus,
    Minus,
    CirclePhase(f64),
}

impl PairBranch {
    pub fn label(self) -> &'static str {
        match self {
            PairBranch::Plus => "plus",
            PairBranch::Minus => "minus",
            PairBranch::CirclePhase(_) => "circle",
        }
    }
}

/// A pair `(w₁, w₂)` with `⟨k̂_{w₁}, k̂_{w₂}⟩ = q`, tagged with its branch.
///
/// Construction always verifies the constraint residual, the realness of
/// `conj(w₁)·w₂`, and the identity
/// `√((1−|w₁|²)(1−|w₂|²)) = q(1 − conj(w₁)w₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstrainedPair {
    w1: DiskPoint,
    w2: DiskPoint,
    q: QParam,
    branch: PairBranch,
}

impl ConstrainedPair {
    fn validated(q: QParam, w1: DiskPoint, w2: DiskPoint, branch: PairBranch) -> Result<Self> {
        let residual = (kernel_inner(w1, w2) - q.value()).norm();
        if residual > PAIR_RESIDUAL_TOL {
            return Err(Error::ConstraintResidual {
                residual,
                tolerance: PAIR_RESIDUAL_TOL,
            });
        }
        let prod = w1.value().conj() * w2.value();
        if !w1.is_origin() && prod.im.abs() > T_IMAG_TOL {
            return Err(Error::NonRealT {
                imag: prod.im,
                tolerance: T_IMAG_TOL,
            });
        }
        let lhs = ((1.0 - w1.value().norm_sqr()) * (1.0 - w2.value().norm_sqr())).sqrt();
        let rhs = q.value() * (Complex64::new(1.0, 0.0) - prod);
        let eq3 = (Complex64::new(lhs, 0.0) - rhs).norm();
        if eq3 > PAIR_RESIDUAL_TOL {
            return Err(Error::ConstraintResidual {
                residual: eq3,
                tolerance: PAIR_RESIDUAL_TOL,
            });
        }
        Ok(Self { w1, w2, q, branch })
    }

    /// Validates a raw pair and infers its branch tag.
    pub fn from_points(q: QParam, w1: DiskPoint, w2: DiskPoint) -> Result<Self> {
        let branch = if w1.is_origin() {
            PairBranch::CirclePhase(w2.value().arg().rem_euclid(TAU))
        } else {
            let lambda = (w1.value().conj() * w2.value()).re / w1.value().norm_sqr();
            let (lp, lm) = pair_lambda(q, w1.modulus())?;
            if (lambda - lp).abs() <= (lambda - lm).abs() {
                PairBranch::Plus
            } else {
                PairBranch::Minus
            }
        };
        Self::validated(q, w1, w2, branch)
    }

    /// The reversed pair `(w₂, w₁)`, valid because `q` is real.
    pub fn swapped(&self) -> Result<Self> {
        Self::from_points(self.q, self.w2, self.w1)
    }

    pub fn w1(&self) -> DiskPoint {
        self.w1
    }

    pub fn w2(&self) -> DiskPoint {
        self.w2
    }

    pub fn q(&self) -> QParam {
        self.q
    }

    pub fn branch(&self) -> PairBranch {
        self.branch
    }

    /// `t = conj(w₁)·w₂`; real by the construction invariant.
    pub fn t(&self) -> f64 {
        (self.w1.value().conj() * self.w2.value()).re
    }

    /// Residual `|⟨k̂_{w₁}, k̂_{w₂}⟩ − q|` of this pair.
    pub fn residual(&self) -> f64 {
        (kernel_inner(self.w1, self.w2) - self.q.value()).norm()
    }
}

/// The range of `t = conj(w₁)·w₂` over all constrained pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TInterval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

/// `⟨k̂_{w₁}, k̂_{w₂}⟩ = √((1−|w₁|²)(1−|w₂|²)) / (1 − conj(w₁)w₂)`.
///
/// Never zero on 𝔻 × 𝔻.
pub fn kernel_inner(w1: DiskPoint, w2: DiskPoint) -> Complex64 {
    let num = ((1.0 - w1.value().norm_sqr()) * (1.0 - w2.value().norm_sqr())).sqrt();
    num / (Complex64::new(1.0, 0.0) - w1.value().conj() * w2.value())
}

/// First `n + 1` Taylor coefficients of `k̂_w`: entry `j` is
/// `√(1−|w|²)·conj(w)ʲ`.
pub fn normalized_kernel_coeffs(w: DiskPoint, n: usize) -> Vec<Complex64> {
    let scale = (1.0 - w.value().norm_sqr()).sqrt();
    let cw = w.value().conj();
    let mut coeffs = Vec::with_capacity(n + 1);
    let mut term = Complex64::new(scale, 0.0);
    for _ in 0..=n {
        coeffs.push(term);
        term *= cw;
    }
    coeffs
}

/// The branch multipliers `λ± = (r q² ± (1−r²)√(1−q²)) / (r(1−(1−q²)r²))`
/// for `r = |w₁| ∈ (0, 1)`. Always `λ⁺ ≥ λ⁻`, with equality exactly at
/// `q = 1`, and both lie in `(−1/r, 1/r)`.
pub fn pair_lambda(q: QParam, r: f64) -> Result<(f64, f64)> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidRadius(r));
    }
    let qv = q.value();
    let s = (1.0 - qv * qv).sqrt();
    let denom = r * (1.0 - (1.0 - qv * qv) * r * r);
    let even = r * qv * qv;
    let odd = (1.0 - r * r) * s;
    Ok(((even + odd) / denom, (even - odd) / denom))
}

/// Solves the constraint for `w₂` on the requested branch: `w₂ = λ± w₁`
/// for `w₁ ≠ 0`, or `w₂ = √(1−q²)·e^{iθ}` on the circle branch for
/// `w₁ = 0`.
pub fn solve_pairs(q: QParam, w1: DiskPoint, branch: PairBranch) -> Result<ConstrainedPair> {
    match branch {
        PairBranch::CirclePhase(theta) => {
            if !w1.is_origin() {
                return Err(Error::BranchMismatch(format!(
                    "circle phase requires w1 = 0, got |w1| = {}",
                    w1.modulus()
                )));
            }
            let theta = theta.rem_euclid(TAU);
            let w2 = DiskPoint::new(Complex64::from_polar(q.circle_radius(), theta))?;
            ConstrainedPair::validated(q, DiskPoint::origin(), w2, PairBranch::CirclePhase(theta))
        }
        PairBranch::Plus | PairBranch::Minus => {
            if w1.is_origin() {
                return Err(Error::BranchMismatch(format!(
                    "|w1| = {} is below the circle switchover {W1_ZERO_THRESHOLD}; \
                     use CirclePhase",
                    w1.modulus()
                )));
            }
            let (lp, lm) = pair_lambda(q, w1.modulus())?;
            let lambda = if matches!(branch, PairBranch::Plus) { lp } else { lm };
            let w2 = DiskPoint::new(lambda * w1.value())?;
            ConstrainedPair::validated(q, w1, w2, branch)
        }
    }
}

/// `t = Re(conj(w₁)·w₂)` after asserting the imaginary part is negligible.
pub fn t_of_pair(pair: &ConstrainedPair) -> Result<f64> {
    let prod = pair.w1().value().conj() * pair.w2().value();
    if prod.im.abs() > T_IMAG_TOL {
        return Err(Error::NonRealT {
            imag: prod.im,
            tolerance: T_IMAG_TOL,
        });
    }
    Ok(prod.re)
}

/// `[(q−1)/(q+1), 1)` for `q < 1`; `(0, 1)` for `q = 1`.
pub fn t_range(q: QParam) -> TInterval {
    let qv = q.value();
    if qv < 1.0 {
        TInterval {
            lo: (qv - 1.0) / (qv + 1.0),
            hi: 1.0,
            lo_closed: true,
            hi_closed: false,
        }
    } else {
        TInterval {
            lo: 0.0,
            hi: 1.0,
            lo_closed: false,
            hi_closed: false,
        }
    }
}

/// The radius minimizing `λ⁻·r²`, namely `√((1−q)/(1+q))`; zero at `q = 1`.
pub fn minus_branch_argmin(q: QParam) -> f64 {
    let qv = q.value();
    ((1.0 - qv) / (1.0 + qv)).sqrt()
}

/// `t = λ_branch(q, r)·r²` at a given radius.
pub fn t_at_radius(q: QParam, r: f64, branch: PairBranch) -> Result<f64> {
    let (lp, lm) = pair_lambda(q, r)?;
    match branch {
        PairBranch::Plus => Ok(lp * r * r),
        PairBranch::Minus => Ok(lm * r * r),
        PairBranch::CirclePhase(_) => Err(Error::BranchMismatch(
            "t_at_radius expects a ± branch".into(),
        )),
    }
}

/// Inverts `λ_branch(q, r)·r² = t` by bisection on the monotone sub-branch.
///
/// The Plus profile increases from 0 to 1 on `(0, 1)`. The Minus profile
/// decreases to `(q−1)/(q+1)` at `r = √((1−q)/(1+q))`, then increases to 1;
/// for `t` above that minimum with two preimages the smaller root is
/// returned by convention.
pub fn radius_for_t(q: QParam, t: f64, branch: PairBranch) -> Result<f64> {
    const LO: f64 = 1e-300;
    const HI: f64 = 1.0 - 1e-16;
    let qv = q.value();
    match branch {
        PairBranch::CirclePhase(_) => Err(Error::BranchMismatch(
            "radius_for_t expects a ± branch".into(),
        )),
        PairBranch::Plus => {
            if t <= 0.0 || t >= 1.0 {
                return Err(Error::TNotAttained {
                    t,
                    q: qv,
                    branch: "plus",
                });
            }
            let psi = |r: f64| t_at_radius(q, r, PairBranch::Plus).unwrap();
            if psi(HI) < t {
                return Err(Error::TNotAttained {
                    t,
                    q: qv,
                    branch: "plus",
                });
            }
            Ok(bisect_monotone(psi, LO, HI, t))
        }
        PairBranch::Minus => {
            let t_min = t_range(q).lo;
            if t < t_min - 1e-12 || t >= 1.0 {
                return Err(Error::TNotAttained {
                    t,
                    q: qv,
                    branch: "minus",
                });
            }
            if qv >= 1.0 && t <= 0.0 {
                // at q = 1 the branches coincide and t > 0 strictly
                return Err(Error::TNotAttained {
                    t,
                    q: qv,
                    branch: "minus",
                });
            }
            let t = t.max(t_min);
            let r_star = minus_branch_argmin(q);
            if qv < 1.0 && (t - t_min).abs() <= 4.0 * f64::EPSILON {
                return Ok(r_star);
            }
            let phi = |r: f64| t_at_radius(q, r, PairBranch::Minus).unwrap();
            if t < 0.0 {
                // decreasing piece (0, r*]: the smaller of the two roots
                Ok(bisect_monotone(phi, LO, r_star, t))
            } else {
                // increasing piece [r*, 1)
                Ok(bisect_monotone(phi, r_star.max(LO), HI, t))
            }
        }
    }
}

/// Bisection for `g(r) = t` with `g` monotone on `[lo, hi]` and the root
/// bracketed. Runs to interval width below 1e−16.
fn bisect_monotone(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, t: f64) -> f64 {
    let increasing = g(hi) >= g(lo);
    for _ in 0..200 {
        if hi - lo <= 1e-16 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let v = g(mid);
        if (v < t) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
