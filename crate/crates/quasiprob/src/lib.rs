//! Quasiprobability toolkit for truncated Fock-space states.
//!
//! The crate computes Wigner functions on quadrature grids, smooths them with
//! anisotropic Gaussian kernels (the distribution actually measured by a
//! simultaneous, lossy measurement of both quadratures), and provides the
//! operator-ordering rule that makes those smoothed distributions useful:
//! every moment ⟨a†ⁿaᵐ⟩ of the state can be recovered exactly from moments of
//! the smoothed distribution, with no inverse (deconvolution) step.
//!
//! Modules:
//!
//! * [`fock`] — density matrices in a truncated Fock basis, ladder operators,
//!   and direct trace oracles used as ground truth everywhere else.
//! * [`phasespace`] — quadrature grids, Wigner/Husimi/Q field evaluation,
//!   Gaussian smoothing by convolution and by the characteristic-function
//!   route, and grid-quadrature moments.
//! * [`ordering`] — the s-parameterized ordering rule tied to a smoothing
//!   width pair, ordered-monomial matrices, and expansions of operators in
//!   the ordered basis.
//! * [`moments`] — moment recovery from smoothed fields, including photon
//!   number and the position-momentum-squared pathway.
//! * [`homodyne`] — imperfect eight-port homodyne detector model, seeded
//!   sampling from smoothed distributions, and end-to-end Monte Carlo
//!   moment reconstruction.
//!
//! Conventions: ħ = 1, m = 1. The complex phase-space coordinate is
//! α = α₁ + iα₂ with α̂₁ = (â + â†)/2, α̂₂ = (â − â†)/2i, so the vacuum Wigner
//! function has variance 1/4 per quadrature and every field integrates to 1
//! with measure dα₁ dα₂.

pub mod error;
pub mod fock;
pub mod homodyne;
pub mod moments;
pub mod ordering;
pub mod phasespace;

pub use error::{Error, Result};
