//! Independent construction of the smoothed distribution through its
//! characteristic function.
//!
//! The smoothed field satisfies ∫∫ G·e^{i(ξα₁+ηα₂)} dα₁dα₂ =
//! χ_W(ξ,η)·f(ξ,η) where χ_W(ξ,η) = Tr[ρ·e^{i(ξα̂₁+ηα̂₂)}] is the Weyl
//! characteristic function and f(ξ,η) = e^{−σ₁²ξ²/2−σ₂²η²/2} the smoothing
//! filter, so an inverse Fourier transform of the filtered characteristic
//! function must reproduce the convolution path. No code is shared with
//! smooth()/wigner_grid(), which makes this the cross-check of record.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::DensityMatrix;

use super::{PhaseSpaceField, QuadratureGrid, SmoothingWidths};

/// Decay required of the filtered characteristic function on the outermost
/// frequency ring; anything larger aliases back into the grid.
pub const ALIASING_LIMIT: f64 = 1e-10;

/// Frequency samples where the filter is below this are skipped: they cannot
/// move the inverse transform at double precision.
const FILTER_FLOOR_LOG: f64 = 42.0; // e^{−42} ≈ 5.7e-19

/// Build the smoothed field by filtering the characteristic function and
/// inverting the Fourier transform on a frequency grid reciprocal to the
/// quadrature grid (Δξ = 2π/(N·step)).
pub fn g_via_characteristic(
    rho: &DensityMatrix,
    widths: SmoothingWidths,
    grid: QuadratureGrid,
) -> Result<PhaseSpaceField> {
    let n = grid.points();
    let step = grid.step();
    let dfreq = 2.0 * std::f64::consts::PI / (n as f64 * step);
    let center = (n as f64 - 1.0) / 2.0;
    let freqs: Vec<f64> = (0..n).map(|j| (j as f64 - center) * dfreq).collect();

    let bands = char_bands(rho);
    let (s1, s2) = (widths.sigma1(), widths.sigma2());
    let half_exp1: Vec<f64> = freqs.iter().map(|&x| 0.5 * s1 * s1 * x * x).collect();
    let half_exp2: Vec<f64> = freqs.iter().map(|&x| 0.5 * s2 * s2 * x * x).collect();

    // Aliasing guard first: |χ_W| ≤ 1, so the filter value alone bounds
    // |χ_G| wherever it is already far below the limit.
    let mut ring_max: f64 = 0.0;
    let ring_check = |j: usize, k: usize, ring_max: &mut f64| {
        let log_f = half_exp1[j] + half_exp2[k];
        let f = (-log_f).exp();
        let value = if f < 1e-14 {
            f
        } else {
            (chi_w(&bands, freqs[j], freqs[k]) * f).norm()
        };
        *ring_max = ring_max.max(value);
    };
    for j in 0..n {
        ring_check(j, 0, &mut ring_max);
        ring_check(j, n - 1, &mut ring_max);
        ring_check(0, j, &mut ring_max);
        ring_check(n - 1, j, &mut ring_max);
    }
    if ring_max > ALIASING_LIMIT {
        return Err(Error::Aliasing { max_boundary: ring_max, limit: ALIASING_LIMIT });
    }

    let active1: Vec<usize> = (0..n).filter(|&j| half_exp1[j] <= FILTER_FLOOR_LOG).collect();
    let active2: Vec<usize> = (0..n).filter(|&k| half_exp2[k] <= FILTER_FLOOR_LOG).collect();

    // Filtered characteristic function on the active window.
    let mut chi = Array2::<Complex64>::zeros((active1.len(), active2.len()));
    for (jj, &j) in active1.iter().enumerate() {
        for (kk, &k) in active2.iter().enumerate() {
            let f = (-(half_exp1[j] + half_exp2[k])).exp();
            chi[[jj, kk]] = chi_w(&bands, freqs[j], freqs[k]) * f;
        }
    }

    // Inverse transform, separable two-pass with explicit phase tables.
    let phase_table = |active: &[usize]| {
        let mut t = Array2::<Complex64>::zeros((active.len(), n));
        for (aj, &j) in active.iter().enumerate() {
            for b in 0..n {
                let angle = -freqs[j] * grid.coord(b);
                t[[aj, b]] = Complex64::new(angle.cos(), angle.sin());
            }
        }
        t
    };
    let e1 = phase_table(&active1);
    let e2 = phase_table(&active2);

    // T[jj][b] = Σ_kk χ[jj][kk]·e^{−iη_k·α₂_b}
    let mut t = Array2::<Complex64>::zeros((active1.len(), n));
    for jj in 0..active1.len() {
        for kk in 0..active2.len() {
            let c = chi[[jj, kk]];
            let e2_row = e2.row(kk);
            let mut t_row = t.row_mut(jj);
            for b in 0..n {
                t_row[b] += c * e2_row[b];
            }
        }
    }

    // G[a][b] = (Δξ·Δη/4π²)·Re[Σ_jj e^{−iξ_j·α₁_a}·T[jj][b]]
    let coef = dfreq * dfreq / (4.0 * std::f64::consts::PI * std::f64::consts::PI);
    let mut values = Array2::<f64>::zeros((n, n));
    let mut acc = vec![Complex64::new(0.0, 0.0); n];
    for a in 0..n {
        acc.fill(Complex64::new(0.0, 0.0));
        for jj in 0..active1.len() {
            let phase = e1[[jj, a]];
            let t_row = t.row(jj);
            for b in 0..n {
                acc[b] += phase * t_row[b];
            }
        }
        for b in 0..n {
            values[[a, b]] = coef * acc[b].re;
        }
    }

    PhaseSpaceField::checked(grid, values, widths.label(), s1, s2)
}

/// Band k holds ρ_{n+k,n}·√(n!/(n+k)!) (no alternating sign here, unlike the
/// Wigner kernel bands).
fn char_bands(rho: &DensityMatrix) -> Vec<(usize, Vec<Complex64>)> {
    let dim = rho.dim();
    let m = rho.entries();
    let mut bands = Vec::new();
    for k in 0..dim {
        let mut coeffs = Vec::with_capacity(dim - k);
        let mut max_mod: f64 = 0.0;
        for n in 0..dim - k {
            let mut ratio = 1.0;
            for i in 1..=k {
                ratio /= (n + i) as f64;
            }
            let c = m[(n + k, n)] * ratio.sqrt();
            max_mod = max_mod.max(c.norm());
            coeffs.push(c);
        }
        while let Some(last) = coeffs.last() {
            if last.norm() > 1e-18 {
                break;
            }
            coeffs.pop();
        }
        if max_mod > 1e-18 && !coeffs.is_empty() {
            bands.push((k, coeffs));
        }
    }
    bands
}

/// χ_W(ξ,η) = Tr[ρ·D(λ)] with λ = (−η+iξ)/2: with x = |λ|²,
///
///   χ_W = e^{−x/2}·[ Σ_n ρ_nn·L_n(x) + Σ_{k≥1} (z_k + (−1)ᵏ·z̄_k) ],
///   z_k = λᵏ·conj(Σ_n ρ_{n+k,n}·√(n!/(n+k)!)·L_n⁽ᵏ⁾(x))
fn chi_w(bands: &[(usize, Vec<Complex64>)], xi: f64, eta: f64) -> Complex64 {
    let lambda = Complex64::new(-eta / 2.0, xi / 2.0);
    let x = lambda.norm_sqr();
    let envelope = (-x / 2.0).exp();
    if envelope == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let mut total = Complex64::new(0.0, 0.0);
    for (k, coeffs) in bands {
        let s = laguerre_band_sum(*k, coeffs, x);
        if *k == 0 {
            total += s;
        } else {
            let z = lambda.powu(*k as u32) * s.conj();
            let reflected = if k % 2 == 0 { z.conj() } else { -z.conj() };
            total += z + reflected;
        }
    }
    total * envelope
}

/// Σ_n coeffs[n]·L_n^{(k)}(x), upward three-term recurrence.
fn laguerre_band_sum(k: usize, coeffs: &[Complex64], x: f64) -> Complex64 {
    let kf = k as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut prev = 0.0;
    let mut cur = 1.0;
    for (n, c) in coeffs.iter().enumerate() {
        acc += c * cur;
        let nf = n as f64;
        let next = ((2.0 * nf + kf + 1.0 - x) * cur - (nf + kf) * prev) / (nf + 1.0);
        prev = cur;
        cur = next;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{build_state, StateSpec};
    use crate::phasespace::{q_exact_grid, smooth, wigner_grid, FieldLabel};

    fn sup_diff(a: &PhaseSpaceField, b: &PhaseSpaceField) -> f64 {
        a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn characteristic_function_is_one_at_origin() {
        let rho = build_state(&StateSpec::Thermal { mean_occupation: 0.5 }, 32).unwrap();
        let bands = char_bands(&rho);
        let chi0 = chi_w(&bands, 0.0, 0.0);
        approx::assert_abs_diff_eq!(chi0.re, 1.0, epsilon = 1e-12);
        approx::assert_abs_diff_eq!(chi0.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn vacuum_characteristic_path_matches_exact_q() {
        let grid = QuadratureGrid::default_grid();
        let rho = build_state(&StateSpec::Fock { n: 0 }, 16).unwrap();
        let via_chi =
            g_via_characteristic(&rho, SmoothingWidths::new(0.5, 0.5).unwrap(), grid).unwrap();
        assert_eq!(via_chi.label(), FieldLabel::Q);
        let exact = q_exact_grid(&rho, grid).unwrap();
        let sup = sup_diff(&via_chi, &exact);
        assert!(sup < 1e-6, "sup-norm difference {sup:.3e}");
    }

    #[test]
    fn fock_one_paths_agree() {
        let grid = QuadratureGrid::default_grid();
        let rho = build_state(&StateSpec::Fock { n: 1 }, 16).unwrap();
        let widths = SmoothingWidths::new(0.6, 0.6).unwrap();
        let via_chi = g_via_characteristic(&rho, widths, grid).unwrap();
        let via_conv = smooth(&wigner_grid(&rho, grid).unwrap(), widths).unwrap();
        let sup = sup_diff(&via_chi, &via_conv);
        assert!(sup < 1e-6, "sup-norm difference {sup:.3e}");
    }

    #[test]
    fn anisotropic_paths_agree_for_squeezed_state() {
        let grid = QuadratureGrid::new(-10.0, 10.0, 0.05).unwrap();
        let rho = build_state(&StateSpec::SqueezedVacuum { r: 0.3 }, 32).unwrap();
        let widths = SmoothingWidths::new(0.375f64.sqrt(), (7.0 / 12.0f64).sqrt()).unwrap();
        let via_chi = g_via_characteristic(&rho, widths, grid).unwrap();
        let via_conv = smooth(&wigner_grid(&rho, grid).unwrap(), widths).unwrap();
        let sup = sup_diff(&via_chi, &via_conv);
        assert!(sup < 1e-6, "sup-norm difference {sup:.3e}");
    }

    #[test]
    fn coarse_grid_aliases() {
        let grid = QuadratureGrid::new(-8.0, 8.0, 0.4).unwrap();
        let rho = build_state(&StateSpec::Fock { n: 0 }, 16).unwrap();
        let err = g_via_characteristic(&rho, SmoothingWidths::new(0.3, 0.3).unwrap(), grid)
            .unwrap_err();
        assert!(matches!(err, Error::Aliasing { .. }));
    }
}
