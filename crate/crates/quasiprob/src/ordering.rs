//! The operator-ordering rule attached to Gaussian-smoothed phase-space
//! distributions.
//!
//! A distribution obtained by smoothing the Wigner function with an
//! anisotropic Gaussian of widths (σ₁, σ₂) carries its own ordering
//! convention {b†ⁿbᵐ}: the operators whose expectation values are plain
//! moments ∫d²β G·β*ⁿβᵐ of the smoothed distribution. Here b is the
//! Bogoliubov-rotated annihilation operator b = cosh(r)a + sinh(r)a† and
//! β = cosh(r)α + sinh(r)α* the matching phase-space coordinate; r absorbs
//! the width anisotropy (e^{2r} = σ₂/σ₁) and s = −4σ₁σ₂ measures the
//! smoothing strength (s = −1 is the Q function).
//!
//! The rule expands each ordered monomial into antinormal products
//! (b-powers to the LEFT of b†-powers):
//!
//!   {b†ⁿbᵐ} = Σ_{k=0}^{min(n,m)} k!·C(n,k)·C(m,k)·(−(s+1)/2)ᵏ · b^{m−k} b†^{n−k}
//!
//! This module generates those coefficients, realizes monomials as matrices,
//! and expands arbitrary low-degree targets (a†a, q̂p̂², …) in the monomial
//! basis so that moment integrals of G recover their expectation values.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{squeezed_ladder, OperatorMatrix};

/// Largest monomial power the coefficient generator accepts per index.
pub const MAX_POWER: usize = 8;

/// Largest expansion degree `expand_in_ordered_basis` accepts.
pub const MAX_EXPANSION_DEGREE: usize = 4;

/// Smoothing/ordering parameter bundle: s = −4σ₁σ₂ (strength), r (Bogoliubov
/// angle from width anisotropy), and κ/ω = e^{2r} = σ₂/σ₁.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderingParams {
    pub s: f64,
    pub r: f64,
    pub kappa_over_omega: f64,
}

impl OrderingParams {
    /// Free mathematical parameters: any negative s, any finite r.
    pub fn new(s: f64, r: f64) -> Result<Self> {
        if !s.is_finite() || !r.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "ordering parameters must be finite, got s = {s}, r = {r}"
            )));
        }
        if s >= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "ordering parameter s must be negative (smoothing strength), got {s}"
            )));
        }
        Ok(Self { s, r, kappa_over_omega: (2.0 * r).exp() })
    }

    /// Parameters of the distribution smoothed with widths (σ₁, σ₂).
    pub fn from_widths(sigma1: f64, sigma2: f64) -> Result<Self> {
        if !(sigma1.is_finite() && sigma2.is_finite() && sigma1 > 0.0 && sigma2 > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "smoothing widths must be finite and positive, got ({sigma1}, {sigma2})"
            )));
        }
        let ratio = sigma2 / sigma1;
        Ok(Self { s: -4.0 * sigma1 * sigma2, r: 0.5 * ratio.ln(), kappa_over_omega: ratio })
    }
}

/// A finite combination Σ c_{nm}{b†ⁿbᵐ} + constant. Keys are (n, m) with n
/// the b†-power and m the b-power.
#[derive(Debug, Clone)]
pub struct OrderingExpansion {
    pub terms: BTreeMap<(usize, usize), Complex64>,
    pub constant: Complex64,
    pub params: OrderingParams,
}

impl OrderingExpansion {
    /// Highest n+m among the terms (0 for a pure constant).
    pub fn degree(&self) -> usize {
        self.terms.keys().map(|&(n, m)| n + m).max().unwrap_or(0)
    }

    /// Coefficient of {b†ⁿbᵐ}, zero when the term is absent.
    pub fn coefficient(&self, n: usize, m: usize) -> Complex64 {
        self.terms.get(&(n, m)).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Matrix realization Σ c_{nm}·M(n,m) + constant·I at the given
    /// truncation dimension.
    pub fn to_matrix(&self, dim: usize) -> Result<OperatorMatrix> {
        let mut out = OperatorMatrix::identity(dim, dim) * self.constant;
        for (&(n, m), &c) in &self.terms {
            out += ordered_monomial_matrix(n, m, self.params, dim)? * c;
        }
        Ok(out)
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k as u64).product::<u64>() as f64
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    // Integer-exact for n ≤ 8.
    let mut num = 1u64;
    let mut den = 1u64;
    for i in 0..k as u64 {
        num *= n as u64 - i;
        den *= i + 1;
    }
    (num / den) as f64
}

/// Contraction coefficients of the ordering rule: returns
/// [(k, k!·C(n,k)·C(m,k)·(−(s+1)/2)ᵏ)] for k = 0..=min(n,m), where k indexes
/// the antinormal product b^{m−k}b†^{n−k}.
///
/// The combinatorial factor is integer-exact and the power is accumulated by
/// repeated multiplication, so coefficients are bit-reproducible.
pub fn ordering_terms(n: usize, m: usize, s: f64) -> Result<Vec<(usize, f64)>> {
    if n > MAX_POWER || m > MAX_POWER {
        return Err(Error::InvalidArgument(format!(
            "monomial powers capped at {MAX_POWER}, got ({n}, {m})"
        )));
    }
    if !s.is_finite() || s >= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "ordering parameter s must be finite and negative, got {s}"
        )));
    }
    let contraction = -(s + 1.0) / 2.0;
    let kmax = n.min(m);
    let mut out = Vec::with_capacity(kmax + 1);
    let mut power = 1.0;
    for k in 0..=kmax {
        out.push((k, factorial(k) * binomial(n, k) * binomial(m, k) * power));
        power *= contraction;
    }
    Ok(out)
}

/// Matrix of the ordered monomial {b†ⁿbᵐ}: Σ_k coeff(k)·b^{m−k}·(b†)^{n−k}
/// (antinormal order, b-powers left).
pub fn ordered_monomial_matrix(
    n: usize,
    m: usize,
    params: OrderingParams,
    dim: usize,
) -> Result<OperatorMatrix> {
    let margin = dim / 2;
    if n + m > margin {
        return Err(Error::Truncation { order: n + m, margin });
    }
    let terms = ordering_terms(n, m, params.s)?;
    let b = squeezed_ladder(dim, params.r)?;
    let bdag = b.adjoint();
    let b_pow = cumulative_powers(&b, m);
    let bdag_pow = cumulative_powers(&bdag, n);
    let mut out = OperatorMatrix::zeros(dim, dim);
    for (k, coeff) in terms {
        out += (&b_pow[m - k] * &bdag_pow[n - k]) * Complex64::new(coeff, 0.0);
    }
    Ok(out)
}

/// [I, M, M², …, M^p]
fn cumulative_powers(m: &OperatorMatrix, p: usize) -> Vec<OperatorMatrix> {
    let dim = m.nrows();
    let mut out = Vec::with_capacity(p + 1);
    out.push(OperatorMatrix::identity(dim, dim));
    for k in 1..=p {
        let next = &out[k - 1] * m;
        out.push(next);
    }
    out
}

/// Expand a target operator in the ordered-monomial basis {(n,m): n+m ≤
/// max_degree} plus the identity, by least squares over the truncation-safe
/// sub-block (the top 2·max_degree rows/columns are excluded because matrix
/// products there feel the truncation boundary).
///
/// The (0,0) basis element is the identity; its coefficient is reported as
/// `constant`, never as a term.
pub fn expand_in_ordered_basis(
    target: &OperatorMatrix,
    params: OrderingParams,
    dim: usize,
    max_degree: usize,
) -> Result<OrderingExpansion> {
    if max_degree == 0 || max_degree > MAX_EXPANSION_DEGREE {
        return Err(Error::InvalidArgument(format!(
            "expansion degree must be in 1..={MAX_EXPANSION_DEGREE}, got {max_degree}"
        )));
    }
    if dim < 4 * max_degree {
        return Err(Error::InvalidArgument(format!(
            "dim = {dim} too small for degree {max_degree}: need dim >= {}",
            4 * max_degree
        )));
    }
    if target.nrows() != dim || target.ncols() != dim {
        return Err(Error::DimensionMismatch(target.nrows(), dim));
    }

    // Degree-graded key order keeps the solve deterministic.
    let mut keys = Vec::new();
    for deg in 0..=max_degree {
        for n in 0..=deg {
            keys.push((n, deg - n));
        }
    }

    let block = dim - 2 * max_degree;
    let rows = block * block;
    let ncols = keys.len();
    let mut a = DMatrix::<Complex64>::zeros(rows, ncols);
    for (c, &(n, m)) in keys.iter().enumerate() {
        let mat = ordered_monomial_matrix(n, m, params, dim)?;
        let mut idx = 0;
        for j in 0..block {
            for i in 0..block {
                a[(idx, c)] = mat[(i, j)];
                idx += 1;
            }
        }
    }
    let mut t = DVector::<Complex64>::zeros(rows);
    {
        let mut idx = 0;
        for j in 0..block {
            for i in 0..block {
                t[idx] = target[(i, j)];
                idx += 1;
            }
        }
    }

    // Column-normalize for conditioning; columns are never zero (every
    // monomial matrix has unit leading coefficient on its k=0 product).
    let scales: Vec<f64> = (0..ncols).map(|c| a.column(c).norm()).collect();
    for (c, &sc) in scales.iter().enumerate() {
        a.column_mut(c).scale_mut(1.0 / sc);
    }

    let svd = a.clone().svd(true, true);
    let mut y = svd
        .solve(&t, 1e-10)
        .map_err(|_| Error::NotInSpan { residual: f64::INFINITY })?;
    // One refinement pass squeezes the least-squares error to O(ε·‖t‖).
    let resid_vec = &t - &a * &y;
    if let Ok(dy) = svd.solve(&resid_vec, 1e-10) {
        y += dy;
    }
    let residual = (&a * &y - &t).norm();
    if residual > 1e-9 {
        return Err(Error::NotInSpan { residual });
    }

    let coeffs: Vec<Complex64> =
        y.iter().zip(&scales).map(|(c, &sc)| c / Complex64::new(sc, 0.0)).collect();
    let cmax = coeffs.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    let drop_below = 1e-11 * cmax.max(1.0);
    let mut terms = BTreeMap::new();
    let mut constant = Complex64::new(0.0, 0.0);
    for (&(n, m), &c) in keys.iter().zip(&coeffs) {
        if (n, m) == (0, 0) {
            constant = c;
        } else if c.norm() > drop_below {
            terms.insert((n, m), c);
        }
    }
    Ok(OrderingExpansion { terms, constant, params })
}

/// Closed-form expansion of the photon-number operator a†a:
///
///   a†a = −({b†²}+{b²})·sinh(2r)/2 + {b†b}·cosh(2r) + (s/2)·cosh(2r) − 1/2
///
/// At r = 0 the quadratic terms vanish and this collapses to
/// {b†b} + (s−1)/2.
pub fn photon_number_expansion(params: OrderingParams) -> OrderingExpansion {
    let sh = (2.0 * params.r).sinh();
    let ch = (2.0 * params.r).cosh();
    let mut terms = BTreeMap::new();
    terms.insert((1, 1), Complex64::new(ch, 0.0));
    if sh != 0.0 {
        terms.insert((2, 0), Complex64::new(-sh / 2.0, 0.0));
        terms.insert((0, 2), Complex64::new(-sh / 2.0, 0.0));
    }
    OrderingExpansion {
        terms,
        constant: Complex64::new(0.5 * params.s * ch - 0.5, 0.0),
        params,
    }
}

/// Expansion of the bare product q̂p̂² (ω = 1 units: q̂ = (a+a†)/√2,
/// p̂ = −i(a−a†)/√2):
///
///   q̂p̂² = −√(κ/8)·[{b³} + {b†³} − {b†b²} − {b†²b} − (s+2){b} − (s−2){b†}]
///
/// All six keys are always present (a coefficient may be zero, e.g. the {b}
/// term at s = −2).
pub fn qp2_expansion(params: OrderingParams) -> OrderingExpansion {
    let f = -(params.kappa_over_omega / 8.0).sqrt();
    let s = params.s;
    let re = |x: f64| Complex64::new(x, 0.0);
    let mut terms = BTreeMap::new();
    terms.insert((0, 3), re(f));
    terms.insert((3, 0), re(f));
    terms.insert((1, 2), re(-f));
    terms.insert((2, 1), re(-f));
    terms.insert((0, 1), re(-f * (s + 2.0)));
    terms.insert((1, 0), re(-f * (s - 2.0)));
    OrderingExpansion { terms, constant: Complex64::new(0.0, 0.0), params }
}
