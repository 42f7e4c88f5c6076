//! Numerics for the q-Berezin range and q-Berezin number of operators on the
//! Hardy space H²(𝔻).
//!
//! For `0 < q ≤ 1` the q-Berezin range of a bounded operator `T` is the set of
//! values `⟨T k̂_{w₁}, k̂_{w₂}⟩` over all pairs of normalized reproducing
//! kernels with `⟨k̂_{w₁}, k̂_{w₂}⟩ = q`, and the q-Berezin number is the
//! supremum of their moduli. This crate provides
//!
//! - [`kernel`]: the H²(𝔻) kernel algebra and the constrained-pair solver
//!   (the two λ± branches for `w₁ ≠ 0`, the circle `𝕋_{√(1−q²)}` for
//!   `w₁ = 0`, and the t-parameter machinery);
//! - [`operators`]: specifications of the supported operator classes
//!   (rank-one, finite-rank, diagonal, multiplication, Toeplitz, weighted
//!   shift, banded, composition), their closed-form Berezin values, and an
//!   independent truncated-series oracle;
//! - [`closed_form`]: analytic descriptions of the range (intervals, discs,
//!   circles, ellipse families) where one is known;
//! - [`geometry`]: grid sampling of the range as a planar point cloud,
//!   ber_q estimation, and convexity / symmetry / rotation / containment
//!   tests against the closed forms.
//!
//! Grid sampling and batch oracle verification run in parallel via rayon
//! when the default `parallel` feature is enabled; disabling it falls back
//! to identical sequential code paths (output ordering is deterministic
//! either way).

use num_complex::Complex64;

pub mod closed_form;
pub mod geometry;
pub mod kernel;
pub mod operators;

pub use closed_form::{closed_form_range, ClosedFormRange};
pub use geometry::{
    compare_to_closed_form, convexity_midpoint_test, estimate_berq, estimate_berq_detailed,
    hausdorff, rotation_test, sample_range, symmetry_test, Axis, ClosedFormDeviation,
    ConvexityVerdict, PointCloud, RadialSchedule, SampleGrid, SamplePoint,
};
pub use kernel::{
    kernel_inner, normalized_kernel_coeffs, pair_lambda, radius_for_t, solve_pairs, t_of_pair,
    t_range, ConstrainedPair, DiskPoint, PairBranch, QParam, TInterval,
};
pub use operators::{
    adjoint_value, apply_coeffs, berezin_value_closed, berezin_value_series, compose_series,
    operator_norm_bound, AffineOp, BerezinValue, FiniteRankTerm, OperatorSpec, SequenceLaw,
    ValueMethod,
};

/// Tolerance on `|⟨k̂_{w₁}, k̂_{w₂}⟩ − q|` for a pair to count as constrained.
pub const PAIR_RESIDUAL_TOL: f64 = 1e-10;

/// Tolerance on the imaginary part of `conj(w₁)·w₂`, which is real on every
/// constrained pair.
pub const T_IMAG_TOL: f64 = 1e-10;

/// Below this modulus `w₁` is treated as the origin and the circle branch
/// applies; λ± diverges like `±√(1−q²)/r` there, so `λ±·w₁` stays accurate
/// to about the threshold itself.
pub const W1_ZERO_THRESHOLD: f64 = 1e-8;

/// Default cap on sampled radii. Keeps series-oracle truncation lengths
/// bounded; configurable per grid.
pub const DEFAULT_R_MAX: f64 = 0.995;

/// Radius ceiling for ber_q estimation, where only closed forms are
/// evaluated and boundary proximity is harmless.
pub const BERQ_R_MAX: f64 = 0.9995;

/// Default cap on series truncation length; overridable through the
/// `QBEREZIN_MAX_TRUNCATION` environment variable.
pub const DEFAULT_TRUNCATION_CAP: usize = 200_000;

/// Environment variable overriding [`DEFAULT_TRUNCATION_CAP`].
pub const TRUNCATION_CAP_ENV: &str = "QBEREZIN_MAX_TRUNCATION";

/// A midpoint farther than this many cloud resolutions from the cloud is a
/// nonconvexity witness.
pub const WITNESS_RESOLUTION_FACTOR: f64 = 10.0;

/// Symmetry and rotation defects below this many cloud resolutions count as
/// evidence for the corresponding invariance.
pub const DEFECT_RESOLUTION_FACTOR: f64 = 2.0;

/// Errors produced by the kernel solver, operator evaluation, and range
/// geometry.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("point must lie strictly inside the unit disc, got modulus {modulus}")]
    OutsideDisc { modulus: f64 },
    #[error("q must lie in (0, 1], got {0}")]
    InvalidQ(f64),
    #[error("radius must lie in (0, 1), got {0}")]
    InvalidRadius(f64),
    #[error("branch mismatch: {0}")]
    BranchMismatch(String),
    #[error("t = {t} is not attained on the {branch} branch for q = {q}")]
    TNotAttained { t: f64, q: f64, branch: &'static str },
    #[error("constraint residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    ConstraintResidual { residual: f64, tolerance: f64 },
    #[error("conj(w1)*w2 has imaginary part {imag:.3e}, above tolerance {tolerance:.3e}")]
    NonRealT { imag: f64, tolerance: f64 },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error(
        "series truncation needs {required} terms, above the cap {cap}; \
         the pair is too close to the boundary for the requested tolerance"
    )]
    TruncationCap { required: usize, cap: usize },
    #[error("coefficient sequence of length {required} exceeds the cap {cap}")]
    CoefficientOverflow { required: usize, cap: usize },
    #[error("invalid operator: {0}")]
    InvalidOperator(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("cloud is degenerate; resolution cannot be estimated")]
    DegenerateCloud,
    #[error("no closed-form range is known for this operator")]
    UnknownClosedForm,
    #[error("evaluation failed at grid point (radial {radial}, angular {angular}, {branch}): {source}")]
    AtGridPoint {
        radial: usize,
        angular: usize,
        branch: &'static str,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

/// Serialize complex scalars as two-element `[re, im]` arrays.
pub(crate) mod complex_serde {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

/// Serialize complex sequences as arrays of `[re, im]` pairs.
pub(crate) mod complex_vec_serde {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

pub(crate) fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

pub(crate) fn horner_real(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}
