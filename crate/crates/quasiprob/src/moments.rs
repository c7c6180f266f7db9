//! Operator moments recovered from smoothed phase-space fields.
//!
//! The bridge identity: for a field G with widths (σ₁, σ₂), the grid
//! quadrature ∫∫ G·(β̄)ⁿβᵐ equals the expectation of the ordered operator
//! {b†ⁿbᵐ} at s = −4σ₁σ₂ and r = ½ln(σ₂/σ₁). An `OrderingExpansion` of a
//! target operator in that basis therefore converts straight into a sum of
//! grid moments plus its scalar part.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ordering::{photon_number_expansion, OrderingExpansion, OrderingParams};
use crate::phasespace::{integrate_moment, PhaseSpaceField};

/// How a `MomentEstimate` was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimationMethod {
    GridQuadrature,
    MonteCarlo,
}

/// A recovered operator expectation with its uncertainty. Deterministic
/// quadrature carries `std_error = 0`; sampled estimates carry the standard
/// error of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub value: Complex64,
    pub std_error: f64,
    pub method: EstimationMethod,
    pub params: OrderingParams,
}

/// Additive constant (s+1)/2 relating the photon number read from a field at
/// ordering parameter s to the one read from the Q function:
/// ⟨a†a⟩_{via s} − ⟨a†a⟩_{via Q} quadratures differ by exactly this much.
/// Only s ≤ −1 corresponds to a realizable simultaneous measurement.
pub fn correction_factor(s: f64) -> Result<f64> {
    if !s.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "ordering parameter must be finite, got {s}"
        )));
    }
    if s > -1.0 + 1e-12 {
        return Err(Error::UnphysicalS(s));
    }
    Ok((s + 1.0) / 2.0)
}

/// The ordering parameters a field's widths imply.
fn params_of_field(field: &PhaseSpaceField) -> Result<OrderingParams> {
    OrderingParams::from_widths(field.sigma1(), field.sigma2())
}

/// Evaluate an ordered-basis expansion against a field: each {b†ⁿbᵐ} term
/// becomes the grid moment ∫∫ G·(β̄)ⁿβᵐ, the scalar part adds directly.
/// The expansion's (s, r) must match the field's widths — mixing a field
/// smoothed one way with coefficients derived for another silently produces
/// wrong numbers, so it is rejected.
pub fn expectation_from_g(
    field: &PhaseSpaceField,
    expansion: &OrderingExpansion,
) -> Result<MomentEstimate> {
    let implied = params_of_field(field)?;
    if (implied.s - expansion.params.s).abs() > 1e-9 {
        return Err(Error::ParamMismatch(format!(
            "field widths imply s = {}, expansion was built for s = {}",
            implied.s, expansion.params.s
        )));
    }
    if (implied.r - expansion.params.r).abs() > 1e-9 {
        return Err(Error::ParamMismatch(format!(
            "field widths imply r = {}, expansion was built for r = {}",
            implied.r, expansion.params.r
        )));
    }
    let r = expansion.params.r;
    let mut value = expansion.constant;
    for (&(n, m), &coeff) in &expansion.terms {
        value += coeff * integrate_moment(field, n, m, r)?;
    }
    Ok(MomentEstimate {
        value,
        std_error: 0.0,
        method: EstimationMethod::GridQuadrature,
        params: expansion.params,
    })
}

/// Photon number ⟨a†a⟩ straight from a smoothed field. For isotropic widths
/// (r = 0) this reduces to ∫∫ G·|α|² + (s−1)/2; anisotropic widths bring in
/// the ⟨β²⟩ + ⟨β̄²⟩ cross terms automatically.
pub fn photon_number_from_g(field: &PhaseSpaceField) -> Result<MomentEstimate> {
    let params = params_of_field(field)?;
    let expansion = photon_number_expansion(params);
    expectation_from_g(field, &expansion)
}
