//! Direct grid evaluation of the Wigner function and the exact Q function
//! from Fock-basis matrix elements.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::DensityMatrix;

use super::{FieldLabel, PhaseSpaceField, QuadratureGrid};

/// Undersampling guard for direct Wigner evaluation.
pub const MAX_WIGNER_STEP: f64 = 0.25;

/// Bands with no coefficient above this are skipped entirely.
const BAND_PRUNE: f64 = 1e-18;

/// Evaluate the Wigner function of `rho` on the grid.
///
/// Uses the Fock-basis closed form: with x = 4|α|²,
///
///   W(α) = (2/π)·e^{−2|α|²}·[ Σ_n ρ_{nn}(−1)ⁿ·L_n(x)
///          + Σ_{k≥1} 2·Re( (2ᾱ)ᵏ·Σ_n ρ_{n+k,n}(−1)ⁿ√(n!/(n+k)!)·L_n⁽ᵏ⁾(x) ) ]
///
/// where the associated Laguerre values follow the stable three-term upward
/// recurrence. Cost is O(dim²) per point for a dense matrix and O(dim) for
/// diagonal states, since empty diagonals k are pruned.
pub fn wigner_grid(rho: &DensityMatrix, grid: QuadratureGrid) -> Result<PhaseSpaceField> {
    if grid.step() > MAX_WIGNER_STEP {
        return Err(Error::GridTooCoarse { step: grid.step(), limit: MAX_WIGNER_STEP });
    }
    let bands = diagonal_bands(rho);
    let pts = grid.points();
    let mut values = Array2::<f64>::zeros((pts, pts));
    for i in 0..pts {
        let a1 = grid.coord(i);
        for j in 0..pts {
            let a2 = grid.coord(j);
            values[[i, j]] = wigner_point(&bands, a1, a2);
        }
    }
    PhaseSpaceField::checked(grid, values, FieldLabel::Wigner, 0.0, 0.0)
}

/// Band k holds d_k[n] = ρ_{n+k,n}·(−1)ⁿ·√(n!/(n+k)!) for the k-th lower
/// diagonal; band 0 is real (Hermitian diagonal). Bands whose largest
/// coefficient modulus is negligible are dropped.
struct Bands {
    /// (k, coefficients) pairs that survived pruning.
    active: Vec<(usize, Vec<Complex64>)>,
}

fn diagonal_bands(rho: &DensityMatrix) -> Bands {
    let dim = rho.dim();
    let m = rho.entries();
    let mut active = Vec::new();
    for k in 0..dim {
        let mut coeffs = Vec::with_capacity(dim - k);
        let mut max_mod: f64 = 0.0;
        for n in 0..dim - k {
            // √(n!/(n+k)!) = Π_{i=1..k} (n+i)^{-1/2}
            let mut ratio = 1.0;
            for i in 1..=k {
                ratio /= (n + i) as f64;
            }
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let c = m[(n + k, n)] * (sign * ratio.sqrt());
            max_mod = max_mod.max(c.norm());
            coeffs.push(c);
        }
        // Trim trailing zeros so the recurrence stops early.
        while let Some(last) = coeffs.last() {
            if last.norm() > BAND_PRUNE {
                break;
            }
            coeffs.pop();
        }
        if max_mod > BAND_PRUNE && !coeffs.is_empty() {
            active.push((k, coeffs));
        }
    }
    Bands { active }
}

fn wigner_point(bands: &Bands, a1: f64, a2: f64) -> f64 {
    let abs2 = a1 * a1 + a2 * a2;
    let envelope = (-2.0 * abs2).exp();
    if envelope == 0.0 {
        return 0.0;
    }
    let x = 4.0 * abs2;
    let two_conj = Complex64::new(2.0 * a1, -2.0 * a2);
    let mut bracket = 0.0;
    for (k, coeffs) in &bands.active {
        let s = band_sum(*k, coeffs, x);
        if *k == 0 {
            bracket += s.re;
        } else {
            bracket += 2.0 * (two_conj.powu(*k as u32) * s).re;
        }
    }
    std::f64::consts::FRAC_2_PI * envelope * bracket
}

/// Σ_n coeffs[n]·L_n^{(k)}(x) by the upward recurrence
/// (n+1)·L_{n+1} = (2n+k+1−x)·L_n − (n+k)·L_{n−1}.
fn band_sum(k: usize, coeffs: &[Complex64], x: f64) -> Complex64 {
    let kf = k as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut prev = 0.0;
    let mut cur = 1.0; // L_0
    for (n, c) in coeffs.iter().enumerate() {
        acc += c * cur;
        let nf = n as f64;
        let next = ((2.0 * nf + kf + 1.0 - x) * cur - (nf + kf) * prev) / (nf + 1.0);
        prev = cur;
        cur = next;
    }
    acc
}

/// Exact Q function Q(α) = ⟨α|ρ|α⟩/π = e^{−|α|²}/π · Σ_{n,m} ρ_{nm} v̄_n v_m
/// with v_m = αᵐ/√m!. Independent of the smoothing machinery; used as the
/// σ₁ = σ₂ = 1/2 cross-check.
pub fn q_exact_grid(rho: &DensityMatrix, grid: QuadratureGrid) -> Result<PhaseSpaceField> {
    let dim = rho.dim();
    let m = rho.entries();
    let pts = grid.points();
    let mut values = Array2::<f64>::zeros((pts, pts));
    let mut v = vec![Complex64::new(0.0, 0.0); dim];
    for i in 0..pts {
        let a1 = grid.coord(i);
        for j in 0..pts {
            let a2 = grid.coord(j);
            let alpha = Complex64::new(a1, a2);
            let envelope = (-(a1 * a1 + a2 * a2)).exp();
            if envelope == 0.0 {
                values[[i, j]] = 0.0;
                continue;
            }
            // v_m = αᵐ/√m!, built incrementally.
            let mut c = Complex64::new(1.0, 0.0);
            for (mi, slot) in v.iter_mut().enumerate() {
                *slot = c;
                c *= alpha / ((mi + 1) as f64).sqrt();
            }
            // ⟨v|ρ|v⟩, column-major inner loop.
            let mut acc = Complex64::new(0.0, 0.0);
            for col in 0..dim {
                let mut dot = Complex64::new(0.0, 0.0);
                for row in 0..dim {
                    dot += v[row].conj() * m[(row, col)];
                }
                acc += dot * v[col];
            }
            values[[i, j]] = acc.re * envelope * std::f64::consts::FRAC_1_PI;
        }
    }
    PhaseSpaceField::checked(grid, values, FieldLabel::Q, 0.5, 0.5)
}
