//! Operator classes on H²(𝔻), their closed-form Berezin values on
//! constrained pairs, and norm bounds.
//!
//! Every in-scope class admits a closed form in terms of `t = conj(w₁)·w₂`
//! via the identity `√((1−|w₁|²)(1−|w₂|²)) = q(1 − t)`:
//!
//! | class | `⟨T k̂_{w₁}, k̂_{w₂}⟩` |
//! |---|---|
//! | rank-one `⟨f, zⁿ⟩z^m` | `q(1−t)·conj(w₁)ⁿ·w₂^m` |
//! | finite rank `Σ⟨f, gᵢ⟩hᵢ` | `q(1−t)·Σ conj(gᵢ(w₁))·hᵢ(w₂)` |
//! | diagonal `Σ⟨f, aₙzⁿ⟩aₙzⁿ` | `q(1−t)·Σ|aₙ|²tⁿ` |
//! | diagonal `Σαₙ⟨f, zⁿ⟩zⁿ` | `q(1−t)·Σαₙtⁿ` |
//! | multiplication `M_p` | `q·p(w₂)` |
//! | Toeplitz `e^{it}+e^{−it}` | `q(w₂ + conj(w₁))` |
//! | weighted shift | `q(1−t)·w₂·Σαₙtⁿ` |
//! | banded | `q(1−t)·Σᵢ w₂^i Σₙ αₙ^{(i)}tⁿ` |
//! | composition `ξz` | `q(1−t)/(1−ξt)` |
//! | composition Möbius | `q(1−t)/(1−conj(w₁)φ_α(w₂))` |
//!
//! The independent series oracle in [`crate::operators`] (see
//! [`berezin_value_series`]) cross-checks each of these by truncated ℓ²
//! computation in coefficient space.

mod series;

pub use series::{
    adjoint_value, apply_coeffs, apply_coeffs_with_cap, berezin_value_series,
    berezin_value_series_with_cap, compose_series, default_truncation_cap, series_value_with,
};

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::kernel::ConstrainedPair;
use crate::{horner, horner_real, Error, Result};

/// A bounded scalar sequence, used for diagonal entries, shift weights, and
/// band coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SequenceLaw {
    /// 1 at index `k`, 0 elsewhere.
    MonomialAtK { k: usize },
    /// `a, b, a, b, …` with `a, b ≥ 0`.
    Alternating { a: f64, b: f64 },
    /// `βⁿ` with `|β| ≤ 1`.
    Geometric {
        #[serde(with = "crate::complex_serde")]
        beta: Complex64,
    },
    /// `iⁿ`.
    PowersOfI,
    /// A finite list padded with zeros.
    ExplicitList {
        #[serde(with = "crate::complex_vec_serde")]
        values: Vec<Complex64>,
    },
}

impl SequenceLaw {
    pub fn term(&self, n: usize) -> Complex64 {
        match self {
            SequenceLaw::MonomialAtK { k } => {
                Complex64::new(if n == *k { 1.0 } else { 0.0 }, 0.0)
            }
            SequenceLaw::Alternating { a, b } => {
                Complex64::new(if n % 2 == 0 { *a } else { *b }, 0.0)
            }
            SequenceLaw::Geometric { beta } => beta.powu(n as u32),
            SequenceLaw::PowersOfI => Complex64::i().powu(n as u32),
            SequenceLaw::ExplicitList { values } => {
                values.get(n).copied().unwrap_or(Complex64::new(0.0, 0.0))
            }
        }
    }

    /// Explicit bound `sup_n |term(n)|`.
    pub fn sup_modulus(&self) -> f64 {
        match self {
            SequenceLaw::MonomialAtK { .. } | SequenceLaw::PowersOfI => 1.0,
            SequenceLaw::Alternating { a, b } => a.max(*b),
            // β⁰ = 1, so the sup is 1 for every |β| ≤ 1
            SequenceLaw::Geometric { beta } => beta.norm().max(1.0),
            SequenceLaw::ExplicitList { values } => {
                values.iter().map(|z| z.norm()).fold(0.0, f64::max)
            }
        }
    }

    /// `Σ term(n)·tⁿ` for real `|t| < 1`, in closed form.
    pub fn series_sum(&self, t: f64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        match self {
            SequenceLaw::MonomialAtK { k } => Complex64::new(t.powi(*k as i32), 0.0),
            SequenceLaw::Alternating { a, b } => {
                Complex64::new((a + b * t) / (1.0 - t * t), 0.0)
            }
            SequenceLaw::Geometric { beta } => one / (one - beta * t),
            SequenceLaw::PowersOfI => one / (one - Complex64::i() * t),
            SequenceLaw::ExplicitList { values } => horner(values, Complex64::new(t, 0.0)),
        }
    }

    fn validate_bounded(&self, context: &str) -> Result<()> {
        match self {
            SequenceLaw::Alternating { a, b } => {
                if *a < 0.0 || *b < 0.0 {
                    return Err(Error::InvalidOperator(format!(
                        "{context}: alternating law requires a, b >= 0, got ({a}, {b})"
                    )));
                }
            }
            SequenceLaw::Geometric { beta } => {
                if beta.norm() > 1.0 + 1e-12 {
                    return Err(Error::InvalidOperator(format!(
                        "{context}: geometric law requires |beta| <= 1, got {}",
                        beta.norm()
                    )));
                }
            }
            SequenceLaw::ExplicitList { values } => {
                if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return Err(Error::InvalidOperator(format!(
                        "{context}: explicit list contains a non-finite value"
                    )));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Entries usable as `|aₙ|²`: real and nonnegative.
    fn validate_mod_squared(&self) -> Result<()> {
        self.validate_bounded("diagonal_mod_squared")?;
        let ok = match self {
            SequenceLaw::MonomialAtK { .. } => true,
            SequenceLaw::Alternating { .. } => true,
            SequenceLaw::Geometric { beta } => beta.im == 0.0 && (0.0..1.0).contains(&beta.re),
            SequenceLaw::PowersOfI => false,
            SequenceLaw::ExplicitList { values } => {
                values.iter().all(|z| z.im == 0.0 && z.re >= 0.0)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidOperator(
                "diagonal_mod_squared weights must be real and nonnegative \
                 (geometric beta in [0,1))"
                    .into(),
            ))
        }
    }
}

impl fmt::Display for SequenceLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SequenceLaw::MonomialAtK { k } => write!(f, "monomial_at_k({k})"),
            SequenceLaw::Alternating { a, b } => write!(f, "alternating({a}, {b})"),
            SequenceLaw::Geometric { beta } => write!(f, "geometric({beta})"),
            SequenceLaw::PowersOfI => write!(f, "powers_of_i"),
            SequenceLaw::ExplicitList { values } => write!(f, "explicit_list(len {})", values.len()),
        }
    }
}

/// One term of a finite-rank operator: `f ↦ ⟨f, g⟩·h` with real polynomial
/// coefficient lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteRankTerm {
    pub g: Vec<f64>,
    pub h: Vec<f64>,
}

/// Tagged description of one operator class.
///
/// Serializes as JSON with a `"type"` discriminator in lower snake case and
/// complex scalars as `[re, im]` arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum OperatorSpec {
    /// `T f = ⟨f, zⁿ⟩ z^m`.
    RankOneMonomial { n: usize, m: usize },
    /// `T f = Σᵢ ⟨f, gᵢ⟩ hᵢ` with finitely supported real coefficients.
    FiniteRank { terms: Vec<FiniteRankTerm> },
    /// `T f = Σ ⟨f, aₙzⁿ⟩ aₙzⁿ`; the law yields `|aₙ|²` directly.
    DiagonalModSquared { weights: SequenceLaw },
    /// `T f = Σ αₙ⟨f, zⁿ⟩ zⁿ`.
    DiagonalGeneral { alpha: SequenceLaw },
    /// `M_p` with polynomial symbol `p`.
    MultPoly {
        #[serde(with = "crate::complex_vec_serde")]
        coeffs: Vec<Complex64>,
    },
    /// `T_φ` with `φ(e^{it}) = e^{it} + e^{−it}`, i.e. `M_z + M_z*`.
    ToeplitzTwoCos,
    /// Unilateral weighted shift `⟨f, zⁿ⟩ ↦ αₙ z^{n+1}`.
    WeightedShift { weights: SequenceLaw },
    /// `T f = Σᵢ Σₙ αₙ^{(i)} ⟨f, zⁿ⟩ z^{n+i}` over bands `i = 0..k`.
    Banded { bands: Vec<SequenceLaw> },
    /// `C_φ` with `φ(z) = ξz`, `|ξ| ≤ 1`.
    CompositionLinear {
        #[serde(with = "crate::complex_serde")]
        xi: Complex64,
    },
    /// `C_{φ_α}` with `φ_α(z) = (z − α)/(1 − conj(α)z)`, `|α| < 1`.
    CompositionMobius {
        #[serde(with = "crate::complex_serde")]
        alpha: Complex64,
    },
}

impl OperatorSpec {
    /// Checks the per-variant parameter invariants.
    pub fn validate(&self) -> Result<()> {
        match self {
            OperatorSpec::RankOneMonomial { n, m } => {
                if *n > u32::MAX as usize || *m > u32::MAX as usize {
                    return Err(Error::InvalidOperator("monomial index too large".into()));
                }
                Ok(())
            }
            OperatorSpec::FiniteRank { terms } => {
                for term in terms {
                    if term.g.iter().chain(&term.h).any(|c| !c.is_finite()) {
                        return Err(Error::InvalidOperator(
                            "finite_rank coefficients must be finite".into(),
                        ));
                    }
                }
                Ok(())
            }
            OperatorSpec::DiagonalModSquared { weights } => weights.validate_mod_squared(),
            OperatorSpec::DiagonalGeneral { alpha } => alpha.validate_bounded("diagonal_general"),
            OperatorSpec::MultPoly { coeffs } => {
                if coeffs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return Err(Error::InvalidOperator(
                        "mult_poly coefficients must be finite".into(),
                    ));
                }
                Ok(())
            }
            OperatorSpec::ToeplitzTwoCos => Ok(()),
            OperatorSpec::WeightedShift { weights } => {
                weights.validate_bounded("weighted_shift")?;
                if let SequenceLaw::Geometric { beta } = weights {
                    if beta.norm() >= 1.0 {
                        return Err(Error::InvalidOperator(
                            "weighted_shift geometric weights require |beta| < 1".into(),
                        ));
                    }
                }
                Ok(())
            }
            OperatorSpec::Banded { bands } => {
                if bands.is_empty() {
                    return Err(Error::InvalidOperator("banded needs at least one band".into()));
                }
                for (i, band) in bands.iter().enumerate() {
                    band.validate_bounded(&format!("banded band {i}"))?;
                }
                Ok(())
            }
            OperatorSpec::CompositionLinear { xi } => {
                if xi.norm() > 1.0 + 1e-12 {
                    return Err(Error::InvalidOperator(format!(
                        "composition_linear requires |xi| <= 1, got {}",
                        xi.norm()
                    )));
                }
                Ok(())
            }
            OperatorSpec::CompositionMobius { alpha } => {
                if alpha.norm() >= 1.0 {
                    return Err(Error::InvalidOperator(format!(
                        "composition_mobius requires |alpha| < 1, got {}",
                        alpha.norm()
                    )));
                }
                Ok(())
            }
        }
    }

    /// The serde `"type"` discriminator for this variant.
    pub fn type_name(&self) -> &'static str {
        match self {
            OperatorSpec::RankOneMonomial { .. } => "rank_one_monomial",
            OperatorSpec::FiniteRank { .. } => "finite_rank",
            OperatorSpec::DiagonalModSquared { .. } => "diagonal_mod_squared",
            OperatorSpec::DiagonalGeneral { .. } => "diagonal_general",
            OperatorSpec::MultPoly { .. } => "mult_poly",
            OperatorSpec::ToeplitzTwoCos => "toeplitz_two_cos",
            OperatorSpec::WeightedShift { .. } => "weighted_shift",
            OperatorSpec::Banded { .. } => "banded",
            OperatorSpec::CompositionLinear { .. } => "composition_linear",
            OperatorSpec::CompositionMobius { .. } => "composition_mobius",
        }
    }
}

impl fmt::Display for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorSpec::RankOneMonomial { n, m } => write!(f, "rank_one_monomial(n={n}, m={m})"),
            OperatorSpec::FiniteRank { terms } => write!(f, "finite_rank({} terms)", terms.len()),
            OperatorSpec::DiagonalModSquared { weights } => {
                write!(f, "diagonal_mod_squared({weights})")
            }
            OperatorSpec::DiagonalGeneral { alpha } => write!(f, "diagonal_general({alpha})"),
            OperatorSpec::MultPoly { coeffs } => {
                write!(f, "mult_poly(deg {})", coeffs.len().saturating_sub(1))
            }
            OperatorSpec::ToeplitzTwoCos => write!(f, "toeplitz_two_cos"),
            OperatorSpec::WeightedShift { weights } => write!(f, "weighted_shift({weights})"),
            OperatorSpec::Banded { bands } => write!(f, "banded({} bands)", bands.len()),
            OperatorSpec::CompositionLinear { xi } => write!(f, "composition_linear(xi={xi})"),
            OperatorSpec::CompositionMobius { alpha } => {
                write!(f, "composition_mobius(alpha={alpha})")
            }
        }
    }
}

/// How a Berezin value was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ValueMethod {
    ClosedForm,
    SeriesOracle,
}

/// A single value `⟨T k̂_{w₁}, k̂_{w₂}⟩` with its provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerezinValue {
    pub value: Complex64,
    pub pair: ConstrainedPair,
    pub method: ValueMethod,
    pub truncation: Option<usize>,
}

/// `φ_α(z) = (z − α)/(1 − conj(α)z)`.
pub(crate) fn mobius(alpha: Complex64, z: Complex64) -> Complex64 {
    (z - alpha) / (Complex64::new(1.0, 0.0) - alpha.conj() * z)
}

/// Closed-form `⟨T k̂_{w₁}, k̂_{w₂}⟩` on a constrained pair.
pub fn berezin_value_closed(op: &OperatorSpec, pair: &ConstrainedPair) -> Result<BerezinValue> {
    let q = pair.q().value();
    let t = pair.t();
    let w1 = pair.w1().value();
    let w2 = pair.w2().value();
    let prefactor = q * (1.0 - t);
    let one = Complex64::new(1.0, 0.0);

    let value = match op {
        OperatorSpec::RankOneMonomial { n, m } => {
            prefactor * w1.conj().powu(*n as u32) * w2.powu(*m as u32)
        }
        OperatorSpec::FiniteRank { terms } => {
            let sum: Complex64 = terms
                .iter()
                .map(|term| horner_real(&term.g, w1).conj() * horner_real(&term.h, w2))
                .sum();
            prefactor * sum
        }
        OperatorSpec::DiagonalModSquared { weights } => prefactor * weights.series_sum(t),
        OperatorSpec::DiagonalGeneral { alpha } => prefactor * alpha.series_sum(t),
        OperatorSpec::MultPoly { coeffs } => q * horner(coeffs, w2),
        OperatorSpec::ToeplitzTwoCos => q * (w2 + w1.conj()),
        OperatorSpec::WeightedShift { weights } => prefactor * w2 * weights.series_sum(t),
        OperatorSpec::Banded { bands } => {
            let mut sum = Complex64::new(0.0, 0.0);
            let mut w2_pow = one;
            for band in bands {
                sum += w2_pow * band.series_sum(t);
                w2_pow *= w2;
            }
            prefactor * sum
        }
        OperatorSpec::CompositionLinear { xi } => prefactor / (one - xi * t),
        OperatorSpec::CompositionMobius { alpha } => {
            prefactor / (one - w1.conj() * mobius(*alpha, w2))
        }
    };

    Ok(BerezinValue {
        value,
        pair: *pair,
        method: ValueMethod::ClosedForm,
        truncation: None,
    })
}

/// Upper bound on the operator norm; loose by design, used to gate sanity
/// checks and size series truncations.
pub fn operator_norm_bound(op: &OperatorSpec) -> f64 {
    match op {
        OperatorSpec::RankOneMonomial { .. } => 1.0,
        OperatorSpec::FiniteRank { terms } => terms
            .iter()
            .map(|term| {
                let ng: f64 = term.g.iter().map(|c| c * c).sum::<f64>().sqrt();
                let nh: f64 = term.h.iter().map(|c| c * c).sum::<f64>().sqrt();
                ng * nh
            })
            .sum(),
        OperatorSpec::DiagonalModSquared { weights } => weights.sup_modulus(),
        OperatorSpec::DiagonalGeneral { alpha } => alpha.sup_modulus(),
        OperatorSpec::MultPoly { coeffs } => {
            // sup on 𝕋 sampled at 4096 roots of unity, with 1% slack
            let n = 4096;
            let mut sup: f64 = 0.0;
            for k in 0..n {
                let z = Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / n as f64);
                sup = sup.max(horner(coeffs, z).norm());
            }
            sup * 1.01
        }
        OperatorSpec::ToeplitzTwoCos => 2.0,
        OperatorSpec::WeightedShift { weights } => weights.sup_modulus(),
        OperatorSpec::Banded { bands } => bands.iter().map(|b| b.sup_modulus()).sum(),
        OperatorSpec::CompositionLinear { .. } => {
            // √((1+|φ(0)|)/(1−|φ(0)|)) with φ(0) = 0
            1.0
        }
        OperatorSpec::CompositionMobius { alpha } => {
            let a = alpha.norm();
            ((1.0 + a) / (1.0 - a)).sqrt()
        }
    }
}

/// The derived operator `a·T + b·I`, evaluated through the same closed-form
/// and coefficient-space paths as its inner spec.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineOp {
    pub a: Complex64,
    pub b: Complex64,
    pub inner: OperatorSpec,
}

impl AffineOp {
    pub fn new(a: Complex64, inner: OperatorSpec, b: Complex64) -> Self {
        Self { a, b, inner }
    }

    pub fn norm_bound(&self) -> f64 {
        self.a.norm() * operator_norm_bound(&self.inner) + self.b.norm()
    }

    /// `a·⟨T k̂_{w₁}, k̂_{w₂}⟩ + b·q`.
    pub fn value_closed(&self, pair: &ConstrainedPair) -> Result<Complex64> {
        let base = berezin_value_closed(&self.inner, pair)?.value;
        Ok(self.a * base + self.b * pair.q().value())
    }

    /// Coefficient-space action `c ↦ a·T(c) + b·c`.
    pub fn apply_coeffs(&self, coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut out = apply_coeffs(&self.inner, coeffs)?;
        for z in &mut out {
            *z *= self.a;
        }
        if out.len() < coeffs.len() {
            out.resize(coeffs.len(), Complex64::new(0.0, 0.0));
        }
        for (o, c) in out.iter_mut().zip(coeffs) {
            *o += self.b * c;
        }
        Ok(out)
    }

    /// Truncated-series value via [`Self::apply_coeffs`].
    pub fn value_series(&self, pair: &ConstrainedPair, tol: f64) -> Result<Complex64> {
        series::series_value_with(
            |c| self.apply_coeffs(c),
            self.norm_bound(),
            pair,
            tol,
            default_truncation_cap(),
        )
    }
}
