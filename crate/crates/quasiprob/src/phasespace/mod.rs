//! Phase-space fields on uniform quadrature grids: Wigner evaluation,
//! Gaussian smoothing (the G construction), exact-Q and characteristic
//! cross-checks, and grid-quadrature moments.
//!
//! Conventions: α = α₁ + iα₂ with quadratures α̂₁ = (a+a†)/2 and
//! α̂₂ = (a−a†)/2i, so the vacuum has variance 1/4 per quadrature and every
//! field integrates to 1 with dα₁dα₂.

mod charfn;
mod io;
mod wigner;

pub use charfn::g_via_characteristic;
pub use io::{read_csv, read_json, write_csv, write_json};
pub use wigner::{q_exact_grid, wigner_grid};

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Midpoint-rule normalization tolerance for every constructed field.
pub const NORMALIZATION_TOL: f64 = 2e-3;

/// Nonnegativity floor for physically smoothed fields.
pub const NONNEGATIVITY_FLOOR: f64 = -1e-9;

/// Uniform square grid over both quadratures, symmetric about the origin.
/// Axis 1 is α₁ = Re α, axis 2 is α₂ = Im α.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureGrid {
    min: f64,
    max: f64,
    step: f64,
}

impl QuadratureGrid {
    pub fn new(min: f64, max: f64, step: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && step.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "grid parameters must be finite, got [{min}, {max}] step {step}"
            )));
        }
        if !(max > min) || !(step > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "need max > min and step > 0, got [{min}, {max}] step {step}"
            )));
        }
        if min != -max {
            return Err(Error::InvalidArgument(format!(
                "grid must be symmetric about 0, got [{min}, {max}]"
            )));
        }
        let span = (max - min) / step;
        if (span - span.round()).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "step {step} does not evenly divide [{min}, {max}]"
            )));
        }
        let points = span.round() as usize + 1;
        if points < 33 {
            return Err(Error::InvalidArgument(format!(
                "grid too small: {points} points per axis, need at least 33"
            )));
        }
        Ok(Self { min, max, step })
    }

    /// [−8, 8] with step 0.05 (321 points per axis): resolves kernels with
    /// σ ≥ 0.3 and holds states of |α₀| ≤ 2 with boundary decay < 1e-12.
    pub fn default_grid() -> Self {
        Self { min: -8.0, max: 8.0, step: 0.05 }
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Points per axis.
    pub fn points(&self) -> usize {
        ((self.max - self.min) / self.step).round() as usize + 1
    }

    /// Coordinate of the i-th grid line.
    pub fn coord(&self, i: usize) -> f64 {
        self.min + i as f64 * self.step
    }

    /// All axis coordinates.
    pub fn axis(&self) -> Vec<f64> {
        (0..self.points()).map(|i| self.coord(i)).collect()
    }
}

/// What kind of distribution a field holds. `husimi` marks the minimum
/// uncertainty product σ₁σ₂ = 1/4, `q` its isotropic σ₁ = σ₂ = 1/2 case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldLabel {
    Wigner,
    Husimi,
    Q,
    G,
}

impl std::fmt::Display for FieldLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            FieldLabel::Wigner => "wigner",
            FieldLabel::Husimi => "husimi",
            FieldLabel::Q => "q",
            FieldLabel::G => "g",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for FieldLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wigner" => Ok(FieldLabel::Wigner),
            "husimi" => Ok(FieldLabel::Husimi),
            "q" => Ok(FieldLabel::Q),
            "g" => Ok(FieldLabel::G),
            other => Err(Error::Parse(format!("unknown field label `{other}`"))),
        }
    }
}

/// Smoothing widths (σ₁, σ₂) of the Gaussian applied to the Wigner function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmoothingWidths {
    sigma1: f64,
    sigma2: f64,
}

impl SmoothingWidths {
    pub fn new(sigma1: f64, sigma2: f64) -> Result<Self> {
        if !(sigma1.is_finite() && sigma2.is_finite() && sigma1 > 0.0 && sigma2 > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "smoothing widths must be finite and positive, got ({sigma1}, {sigma2})"
            )));
        }
        Ok(Self { sigma1, sigma2 })
    }

    pub fn sigma1(&self) -> f64 {
        self.sigma1
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Measurable with a simultaneous-measurement device: σ₁σ₂ ≥ 1/4.
    pub fn physical(&self) -> bool {
        self.sigma1 * self.sigma2 >= 0.25 - 1e-12
    }

    /// Label a field carrying these widths ends up with.
    pub fn label(&self) -> FieldLabel {
        if (self.sigma1 - 0.5).abs() <= 1e-12 && (self.sigma2 - 0.5).abs() <= 1e-12 {
            FieldLabel::Q
        } else if (self.sigma1 * self.sigma2 - 0.25).abs() <= 1e-12 {
            FieldLabel::Husimi
        } else {
            FieldLabel::G
        }
    }

    /// Widths of the composition of two successive smoothings (Gaussian
    /// variances add).
    pub fn after(&self, base_sigma1: f64, base_sigma2: f64) -> Self {
        Self {
            sigma1: (self.sigma1 * self.sigma1 + base_sigma1 * base_sigma1).sqrt(),
            sigma2: (self.sigma2 * self.sigma2 + base_sigma2 * base_sigma2).sqrt(),
        }
    }
}

/// Real-valued distribution samples on a quadrature grid, axis1-major:
/// `values[[i, j]]` is the value at (α₁ = coord(i), α₂ = coord(j)).
#[derive(Debug, Clone)]
pub struct PhaseSpaceField {
    grid: QuadratureGrid,
    values: Array2<f64>,
    label: FieldLabel,
    sigma1: f64,
    sigma2: f64,
}

impl PhaseSpaceField {
    /// Validating constructor: every produced field passes through here.
    /// Checks shape, finiteness, midpoint normalization, and — for
    /// physically smoothed fields (σ₁σ₂ ≥ 1/4) — nonnegativity. Smoothings
    /// below the uncertainty floor may legitimately stay negative, so the
    /// nonnegativity invariant is keyed on the widths, not the label.
    pub fn checked(
        grid: QuadratureGrid,
        values: Array2<f64>,
        label: FieldLabel,
        sigma1: f64,
        sigma2: f64,
    ) -> Result<Self> {
        let n = grid.points();
        if values.shape() != [n, n] {
            return Err(Error::FieldInvariant(format!(
                "value shape {:?} does not match {n}x{n} grid",
                values.shape()
            )));
        }
        if label == FieldLabel::Wigner {
            if sigma1 != 0.0 || sigma2 != 0.0 {
                return Err(Error::FieldInvariant(
                    "wigner fields carry zero smoothing widths".into(),
                ));
            }
        } else if !(sigma1 > 0.0 && sigma2 > 0.0) {
            return Err(Error::FieldInvariant(format!(
                "smoothed field needs positive widths, got ({sigma1}, {sigma2})"
            )));
        }
        let mut sum = 0.0;
        let mut min = f64::INFINITY;
        for &v in &values {
            if !v.is_finite() {
                return Err(Error::FieldInvariant(format!("non-finite value {v}")));
            }
            sum += v;
            min = min.min(v);
        }
        let mass = sum * grid.step() * grid.step();
        if (mass - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::FieldInvariant(format!(
                "field integrates to {mass:.6}, outside 1 ± {NORMALIZATION_TOL}"
            )));
        }
        if sigma1 * sigma2 >= 0.25 - 1e-12 && min < NONNEGATIVITY_FLOOR {
            return Err(Error::FieldInvariant(format!(
                "physically smoothed field has negative value {min:.3e}"
            )));
        }
        Ok(Self { grid, values, label, sigma1, sigma2 })
    }

    pub fn grid(&self) -> QuadratureGrid {
        self.grid
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn label(&self) -> FieldLabel {
        self.label
    }

    pub fn sigma1(&self) -> f64 {
        self.sigma1
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Midpoint-rule integral over the grid.
    pub fn normalization(&self) -> f64 {
        self.values.sum() * self.grid.step() * self.grid.step()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// σ₁σ₂ ≥ 1/4: the field could come out of an actual simultaneous
    /// measurement. Always false for raw Wigner fields.
    pub fn physical(&self) -> bool {
        self.sigma1 * self.sigma2 >= 0.25 - 1e-12
    }

    /// Largest |value| on the outermost grid ring.
    pub fn boundary_max(&self) -> f64 {
        let n = self.grid.points();
        let mut m: f64 = 0.0;
        for i in 0..n {
            m = m.max(self.values[[i, 0]].abs());
            m = m.max(self.values[[i, n - 1]].abs());
            m = m.max(self.values[[0, i]].abs());
            m = m.max(self.values[[n - 1, i]].abs());
        }
        m
    }
}

/// Gaussian-smooth a field with per-axis widths (σ₁ on α₁, σ₂ on α₂):
/// separable convolution with 6σ-truncated, renormalized kernels and zero
/// padding. Input widths compose (output σᵢ = √(input σᵢ² + new σᵢ²)), so
/// smoothing a Wigner field with (1/2, 1/2) yields the Q function and
/// successive smoothings obey the Gaussian semigroup law.
pub fn smooth(field: &PhaseSpaceField, widths: SmoothingWidths) -> Result<PhaseSpaceField> {
    let grid = field.grid();
    let reach = 6.0 * widths.sigma1().max(widths.sigma2());
    let quarter = (grid.max() - grid.min()) / 4.0;
    if reach > quarter {
        return Err(Error::KernelExceedsGrid { reach, quarter });
    }

    let k1 = discrete_kernel(widths.sigma1(), grid.step());
    let k2 = discrete_kernel(widths.sigma2(), grid.step());
    let n = grid.points();

    // Pass 1: convolve along axis 1 (rows shift, columns intact).
    let mut mid = Array2::<f64>::zeros((n, n));
    let h1 = (k1.len() - 1) / 2;
    for i in 0..n {
        let mut row = mid.row_mut(i);
        for (t, &w) in k1.iter().enumerate() {
            let src = i as isize + t as isize - h1 as isize;
            if src < 0 || src >= n as isize {
                continue;
            }
            row.scaled_add(w, &field.values().row(src as usize));
        }
    }

    // Pass 2: convolve along axis 2 (within each row).
    let mut out = Array2::<f64>::zeros((n, n));
    let h2 = (k2.len() - 1) / 2;
    for i in 0..n {
        let src_row = mid.row(i);
        let mut dst_row = out.row_mut(i);
        for j in 0..n {
            let mut acc = 0.0;
            let lo = j.saturating_sub(h2);
            let hi = (j + h2).min(n - 1);
            for src in lo..=hi {
                // kernel index for offset (j - src)
                acc += k2[h2 + j - src] * src_row[src];
            }
            dst_row[j] = acc;
        }
    }

    let combined = widths.after(field.sigma1(), field.sigma2());
    PhaseSpaceField::checked(
        grid,
        out,
        combined.label(),
        combined.sigma1(),
        combined.sigma2(),
    )
}

/// Sampled Gaussian kernel truncated at 6σ, renormalized so the discrete
/// midpoint mass Σw·step is exactly 1; entries returned premultiplied by
/// step. Symmetric, odd length 2·ceil(6σ/step)+1.
fn discrete_kernel(sigma: f64, step: f64) -> Vec<f64> {
    let half = (6.0 * sigma / step).ceil() as usize;
    let mut w = Vec::with_capacity(2 * half + 1);
    for t in -(half as isize)..=half as isize {
        let x = t as f64 * step;
        w.push((-x * x / (2.0 * sigma * sigma)).exp());
    }
    let total: f64 = w.iter().sum();
    for v in &mut w {
        *v /= total;
    }
    w
}

/// Grid-quadrature moment ∫∫ field·(β̄)ⁿβᵐ dα₁dα₂ with β = e^r·α₁ + i·e^{−r}·α₂
/// (the width-anisotropy rotation; the (α₁,α₂) → (β₁,β₂) map has unit
/// Jacobian, so the α-grid sum realizes the β-plane integral directly).
pub fn integrate_moment(
    field: &PhaseSpaceField,
    n: usize,
    m: usize,
    r: f64,
) -> Result<Complex64> {
    if n + m > 6 {
        return Err(Error::InvalidArgument(format!(
            "moment order n+m must be at most 6, got {}",
            n + m
        )));
    }
    if !r.is_finite() {
        return Err(Error::InvalidArgument(format!("squeeze parameter must be finite, got {r}")));
    }
    let limit = 1e-12;
    let boundary = field.boundary_max();
    if boundary > limit {
        return Err(Error::BoundaryMass { max_boundary: boundary, limit });
    }
    let grid = field.grid();
    let pts = grid.points();
    let (er, emr) = (r.exp(), (-r).exp());
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..pts {
        let b1 = er * grid.coord(i);
        for j in 0..pts {
            let beta = Complex64::new(b1, emr * grid.coord(j));
            acc += field.values()[[i, j]] * beta.conj().powu(n as u32) * beta.powu(m as u32);
        }
    }
    Ok(acc * grid.step() * grid.step())
}
