//! Truncated-series oracle: every closed form in [`super`] is cross-checked
//! by applying the operator in coefficient space to a truncated normalized
//! kernel and taking the ℓ² inner product against the other kernel.
//!
//! The truncation length comes from the geometric tail bound
//! `‖T‖·ρ^{N+1}/(1−ρ) < tol` with `ρ = max(|w₁|, |w₂|)`; coefficient-wise
//! this also controls the inner-product tail, since every output
//! coefficient is bounded by `‖T k̂_{w₁}‖ ≤ ‖T‖`.

use num_complex::Complex64;

use crate::kernel::{normalized_kernel_coeffs, ConstrainedPair};
use crate::operators::{operator_norm_bound, BerezinValue, OperatorSpec, ValueMethod};
use crate::{Error, Result, DEFAULT_TRUNCATION_CAP, TRUNCATION_CAP_ENV};

/// The active series cap: `QBEREZIN_MAX_TRUNCATION` if set and parseable,
/// otherwise [`DEFAULT_TRUNCATION_CAP`].
pub fn default_truncation_cap() -> usize {
    std::env::var(TRUNCATION_CAP_ENV)
        .ok()
        .and_then(|raw| raw.trim().parse().ok())
        .unwrap_or(DEFAULT_TRUNCATION_CAP)
}

/// First `n_out + 1` Taylor coefficients of `z ↦ f(φ_α(z))` for the Möbius
/// map `φ_α(z) = (z − α)/(1 − conj(α)z)`.
///
/// Horner accumulation over the input coefficients; each step multiplies the
/// accumulator by the series of `(z − α)` and by the geometric expansion of
/// `1/(1 − conj(α)z)` (as a linear recurrence), so the cost is
/// `O(deg(f) · n_out)`.
pub fn compose_series(
    coeffs: &[Complex64],
    alpha: Complex64,
    n_out: usize,
) -> Result<Vec<Complex64>> {
    if alpha.norm() >= 1.0 {
        return Err(Error::InvalidOperator(format!(
            "compose_series requires |alpha| < 1, got {}",
            alpha.norm()
        )));
    }
    let len = n_out + 1;
    let zero = Complex64::new(0.0, 0.0);
    let mut acc = vec![zero; len];
    let mut num = vec![zero; len];
    let ac = alpha.conj();
    for &c in coeffs.iter().rev() {
        // num = acc·(z − α), truncated
        num[0] = -alpha * acc[0];
        for i in 1..len {
            num[i] = acc[i - 1] - alpha * acc[i];
        }
        // acc = num / (1 − conj(α)·z), then absorb the Horner constant
        acc[0] = num[0];
        for i in 1..len {
            acc[i] = num[i] + ac * acc[i - 1];
        }
        acc[0] += c;
    }
    Ok(acc)
}

/// Coefficient-space action of `T` on `f = Σ cₙzⁿ`, with the default length
/// cap.
pub fn apply_coeffs(op: &OperatorSpec, coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    apply_coeffs_with_cap(op, coeffs, default_truncation_cap())
}

/// Coefficient-space action of `T` with an explicit length cap.
pub fn apply_coeffs_with_cap(
    op: &OperatorSpec,
    coeffs: &[Complex64],
    cap: usize,
) -> Result<Vec<Complex64>> {
    let zero = Complex64::new(0.0, 0.0);
    let len = coeffs.len();
    let check_len = |required: usize| {
        if required > cap + 1 {
            Err(Error::CoefficientOverflow { required, cap })
        } else {
            Ok(())
        }
    };

    match op {
        OperatorSpec::RankOneMonomial { n, m } => {
            check_len(m + 1)?;
            let mut out = vec![zero; m + 1];
            if *n < len {
                out[*m] = coeffs[*n];
            }
            Ok(out)
        }
        OperatorSpec::FiniteRank { terms } => {
            let out_len = terms.iter().map(|t| t.h.len()).max().unwrap_or(0);
            check_len(out_len)?;
            let mut out = vec![zero; out_len];
            for term in terms {
                // ⟨c, g⟩ with real g coefficients
                let inner: Complex64 = coeffs
                    .iter()
                    .zip(&term.g)
                    .map(|(c, g)| c * g)
                    .sum();
                for (o, h) in out.iter_mut().zip(&term.h) {
                    *o += inner * h;
                }
            }
            Ok(out)
        }
        OperatorSpec::DiagonalModSquared { weights } => Ok(coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| c * weights.term(n))
            .collect()),
        OperatorSpec::DiagonalGeneral { alpha } => Ok(coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| c * alpha.term(n))
            .collect()),
        OperatorSpec::MultPoly { coeffs: p } => {
            if p.is_empty() || len == 0 {
                return Ok(vec![]);
            }
            let out_len = len + p.len() - 1;
            check_len(out_len)?;
            let mut out = vec![zero; out_len];
            for (i, c) in coeffs.iter().enumerate() {
                for (j, pj) in p.iter().enumerate() {
                    out[i + j] += c * pj;
                }
            }
            Ok(out)
        }
        OperatorSpec::ToeplitzTwoCos => {
            // forward shift plus backward shift
            check_len(len + 1)?;
            let mut out = vec![zero; len + 1];
            for (n, o) in out.iter_mut().enumerate() {
                if n >= 1 {
                    *o += coeffs[n - 1];
                }
                if n + 1 < len {
                    *o += coeffs[n + 1];
                }
            }
            Ok(out)
        }
        OperatorSpec::WeightedShift { weights } => {
            check_len(len + 1)?;
            let mut out = vec![zero; len + 1];
            for (n, c) in coeffs.iter().enumerate() {
                out[n + 1] = c * weights.term(n);
            }
            Ok(out)
        }
        OperatorSpec::Banded { bands } => {
            let out_len = len + bands.len().saturating_sub(1);
            check_len(out_len)?;
            let mut out = vec![zero; out_len];
            for (i, band) in bands.iter().enumerate() {
                for (n, c) in coeffs.iter().enumerate() {
                    out[n + i] += c * band.term(n);
                }
            }
            Ok(out)
        }
        OperatorSpec::CompositionLinear { xi } => {
            let mut out = Vec::with_capacity(len);
            let mut pow = Complex64::new(1.0, 0.0);
            for c in coeffs {
                out.push(c * pow);
                pow *= xi;
            }
            Ok(out)
        }
        OperatorSpec::CompositionMobius { alpha } => {
            compose_series(coeffs, *alpha, len.saturating_sub(1))
        }
    }
}

/// Truncation length from the geometric tail bound, or an error when it
/// would exceed the cap.
fn required_terms(bound: f64, rho: f64, tol: f64, cap: usize) -> Result<usize> {
    const MIN_TERMS: usize = 8;
    if rho < 1e-12 {
        return Ok(MIN_TERMS);
    }
    let bound = bound.max(f64::MIN_POSITIVE);
    let needed = (tol * (1.0 - rho) / bound).ln() / rho.ln();
    if !needed.is_finite() || needed <= MIN_TERMS as f64 {
        return Ok(MIN_TERMS);
    }
    let n = needed.ceil() as usize;
    if n > cap {
        return Err(Error::TruncationCap { required: n, cap });
    }
    Ok(n)
}

/// Generic truncated-series value for any coefficient-space action with a
/// known norm bound; the building block behind [`berezin_value_series`]
/// and derived operators such as `a·T + b·I` or conjugations `U T U*`.
pub fn series_value_with<F>(
    apply: F,
    bound: f64,
    pair: &ConstrainedPair,
    tol: f64,
    cap: usize,
) -> Result<Complex64>
where
    F: FnOnce(&[Complex64]) -> Result<Vec<Complex64>>,
{
    if !(tol > 0.0) {
        return Err(Error::InvalidTolerance(tol));
    }
    let rho = pair.w1().modulus().max(pair.w2().modulus());
    let n = required_terms(bound, rho, tol, cap)?;
    let c1 = normalized_kernel_coeffs(pair.w1(), n);
    let out = apply(&c1)?;
    if out.is_empty() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let c2 = normalized_kernel_coeffs(pair.w2(), out.len() - 1);
    Ok(out.iter().zip(&c2).map(|(a, b)| a * b.conj()).sum())
}

/// `⟨T k̂_{w₁}, k̂_{w₂}⟩` by truncated series, independent of the closed
/// forms. Records the truncation length used.
pub fn berezin_value_series(
    op: &OperatorSpec,
    pair: &ConstrainedPair,
    tol: f64,
) -> Result<BerezinValue> {
    berezin_value_series_with_cap(op, pair, tol, default_truncation_cap())
}

/// As [`berezin_value_series`] with an explicit truncation cap.
pub fn berezin_value_series_with_cap(
    op: &OperatorSpec,
    pair: &ConstrainedPair,
    tol: f64,
    cap: usize,
) -> Result<BerezinValue> {
    if !(tol > 0.0) {
        return Err(Error::InvalidTolerance(tol));
    }
    let rho = pair.w1().modulus().max(pair.w2().modulus());
    let n = required_terms(operator_norm_bound(op), rho, tol, cap)?;
    let c1 = normalized_kernel_coeffs(pair.w1(), n);
    let out = apply_coeffs_with_cap(op, &c1, cap.max(n + 1))?;
    let value = if out.is_empty() {
        Complex64::new(0.0, 0.0)
    } else {
        let c2 = normalized_kernel_coeffs(pair.w2(), out.len() - 1);
        out.iter().zip(&c2).map(|(a, b)| a * b.conj()).sum()
    };
    Ok(BerezinValue {
        value,
        pair: *pair,
        method: ValueMethod::SeriesOracle,
        truncation: Some(n),
    })
}

/// `⟨T* k̂_{w₁}, k̂_{w₂}⟩ = conj(⟨T k̂_{w₂}, k̂_{w₁}⟩)`, computed by the
/// series oracle on the swapped pair (valid since `q` is real).
pub fn adjoint_value(op: &OperatorSpec, pair: &ConstrainedPair, tol: f64) -> Result<Complex64> {
    let swapped = pair.swapped()?;
    Ok(berezin_value_series(op, &swapped, tol)?.value.conj())
}
