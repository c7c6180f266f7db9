//! Density matrices in a truncated Fock basis, ladder operators, and direct
//! trace oracles.
//!
//! Everything downstream (phase-space fields, ordered-monomial expansions,
//! homodyne reconstruction) is checked against `oracle_moment` /
//! `oracle_expectation`, which evaluate Tr(ρ·O) by plain matrix algebra with
//! no phase-space machinery involved.
//!
//! Truncation policy: a state is only usable if its population has died off
//! well before the truncation boundary. Builders renormalize the trace and
//! then reject states whose top-level population exceeds 1e-8.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type OperatorMatrix = DMatrix<Complex64>;

/// Default Fock-space dimension used by the CLI and the test suites.
pub const DEFAULT_DIM: usize = 64;

/// Population allowed in the highest retained Fock level.
pub const LEAKAGE_LIMIT: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Declarative description of a state the builder knows how to prepare.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    /// Coherent state |α₀⟩.
    Coherent { alpha: Complex64 },
    /// Number state |n⟩.
    Fock { n: usize },
    /// Thermal state with mean occupation n̄.
    Thermal { mean_occupation: f64 },
    /// Superposition N(|α₀⟩ + e^{iφ}|−α₀⟩); the normalization keeps the
    /// interference term, it is not the asymptotic 1/√2.
    Cat { alpha: Complex64, phase: f64 },
    /// Squeezed vacuum with real squeezing parameter r₀; positive r₀
    /// squeezes the α₁ quadrature (variance e^{−2r₀}/4).
    SqueezedVacuum { r: f64 },
}

impl StateSpec {
    fn check(&self, dim: usize) -> Result<()> {
        let finite = |x: f64, what: &str| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidSpec(format!("{what} must be finite, got {x}")))
            }
        };
        match self {
            StateSpec::Coherent { alpha } | StateSpec::Cat { alpha, .. } => {
                finite(alpha.re, "alpha")?;
                finite(alpha.im, "alpha")?;
                if let StateSpec::Cat { phase, .. } = self {
                    finite(*phase, "phase")?;
                }
                // Conservative headroom so the Poisson tail dies before the
                // truncation boundary; the post-build leakage check is the
                // authoritative guard.
                let a = alpha.norm();
                if a * a + 6.0 * a + 10.0 > dim as f64 {
                    return Err(Error::InvalidSpec(format!(
                        "|alpha| = {a:.3} too large for dim = {dim}: need |alpha|^2 + 6|alpha| + 10 <= dim"
                    )));
                }
                Ok(())
            }
            StateSpec::Fock { n } => {
                if *n >= dim {
                    Err(Error::InvalidSpec(format!("fock level {n} >= dim {dim}")))
                } else {
                    Ok(())
                }
            }
            StateSpec::Thermal { mean_occupation } => {
                finite(*mean_occupation, "mean occupation")?;
                if *mean_occupation < 0.0 {
                    Err(Error::InvalidSpec(format!(
                        "mean occupation must be >= 0, got {mean_occupation}"
                    )))
                } else {
                    Ok(())
                }
            }
            StateSpec::SqueezedVacuum { r } => finite(*r, "squeezing parameter"),
        }
    }
}

/// Grammar: `kind:args`, e.g. `coherent:1.5+0i`, `fock:2`, `thermal:0.5`,
/// `cat:1.5+0i,0`, `squeezed_vacuum:0.3`.
impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpec::Coherent { alpha } => write!(f, "coherent:{}", format_complex(*alpha)),
            StateSpec::Fock { n } => write!(f, "fock:{n}"),
            StateSpec::Thermal { mean_occupation } => write!(f, "thermal:{mean_occupation}"),
            StateSpec::Cat { alpha, phase } => {
                write!(f, "cat:{},{phase}", format_complex(*alpha))
            }
            StateSpec::SqueezedVacuum { r } => write!(f, "squeezed_vacuum:{r}"),
        }
    }
}

impl FromStr for StateSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidSpec(format!("expected kind:args, got `{s}`")))?;
        match kind {
            "coherent" => Ok(StateSpec::Coherent { alpha: parse_complex(args)? }),
            "fock" => {
                let n = args.parse::<usize>().map_err(|_| {
                    Error::InvalidSpec(format!("fock level must be a nonnegative integer, got `{args}`"))
                })?;
                Ok(StateSpec::Fock { n })
            }
            "thermal" => Ok(StateSpec::Thermal { mean_occupation: parse_real(args)? }),
            "cat" => {
                let (a, p) = args.rsplit_once(',').ok_or_else(|| {
                    Error::InvalidSpec(format!("cat needs `alpha,phase`, got `{args}`"))
                })?;
                Ok(StateSpec::Cat { alpha: parse_complex(a)?, phase: parse_real(p)? })
            }
            "squeezed_vacuum" => Ok(StateSpec::SqueezedVacuum { r: parse_real(args)? }),
            other => Err(Error::InvalidSpec(format!("unknown state kind `{other}`"))),
        }
    }
}

fn format_complex(z: Complex64) -> String {
    if z.im >= 0.0 || z.im.is_nan() {
        format!("{}+{}i", z.re, z.im)
    } else {
        format!("{}-{}i", z.re, -z.im)
    }
}

fn parse_real(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::InvalidSpec(format!("expected a real number, got `{s}`")))
}

/// Parse a complex literal: `1.5`, `1.5+0i`, `-2-0.3i`, `2i`, `-i`.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t = s.trim();
    if t.is_empty() {
        return Err(Error::InvalidSpec("empty complex literal".into()));
    }
    if let Some(body) = t.strip_suffix(['i', 'I']) {
        // Split the imaginary tail from an optional real head at the last
        // +/- that is not a leading sign and not part of an exponent.
        let bytes = body.as_bytes();
        let mut split = None;
        for idx in (1..bytes.len()).rev() {
            let c = bytes[idx] as char;
            if (c == '+' || c == '-') && !matches!(bytes[idx - 1] as char, 'e' | 'E') {
                split = Some(idx);
                break;
            }
        }
        let (re_str, im_str) = match split {
            Some(idx) => (&body[..idx], &body[idx..]),
            None => ("", body),
        };
        let im = match im_str {
            "" | "+" => 1.0,
            "-" => -1.0,
            other => parse_real(other)?,
        };
        let re = if re_str.is_empty() { 0.0 } else { parse_real(re_str)? };
        Ok(Complex64::new(re, im))
    } else {
        Ok(Complex64::new(parse_real(t)?, 0.0))
    }
}

/// Hermitian, unit-trace, positive-semidefinite operator on the truncated
/// Fock space, together with the spec text it was built from.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    dim: usize,
    entries: OperatorMatrix,
    descriptor: String,
}

impl DensityMatrix {
    /// Wrap an externally assembled matrix. Renormalizes the trace, then
    /// enforces Hermiticity (1e-12), unit trace (1e-12 after renormalization)
    /// and positivity (smallest eigenvalue >= -1e-10).
    pub fn from_entries(entries: OperatorMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::InvalidArgument(format!(
                "density matrix must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let dim = entries.nrows();
        if dim < 2 {
            return Err(Error::InvalidArgument(format!("dim must be >= 2, got {dim}")));
        }
        let herm_dev = (&entries - entries.adjoint()).camax();
        if herm_dev > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "matrix is not Hermitian: max |rho - rho^dagger| = {herm_dev:.3e}"
            )));
        }
        let tr = entries.trace();
        if !tr.re.is_finite() || tr.re <= 0.0 || tr.im.abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("trace {tr} is not usable")));
        }
        let entries = entries / Complex64::new(tr.re, 0.0);
        let state = Self { dim, entries, descriptor: "custom".into() };
        state.check_positive()?;
        Ok(state)
    }

    fn built(entries: OperatorMatrix, descriptor: String) -> Result<Self> {
        let dim = entries.nrows();
        let state = Self { dim, entries, descriptor };
        debug_assert!((state.trace() - 1.0).abs() < 1e-12);
        state.check_positive()?;
        state.check_leakage()?;
        Ok(state)
    }

    /// Positive semidefinite within tolerance: smallest eigenvalue ≥ −1e-10.
    /// (Cholesky cannot be used here: over the complex field it happily takes
    /// complex square roots and never rejects an indefinite matrix.)
    fn check_positive(&self) -> Result<()> {
        let eigs = self.entries.clone().symmetric_eigen().eigenvalues;
        let min = eigs.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -1e-10 {
            return Err(Error::InvalidArgument(format!(
                "density matrix has eigenvalue {min:.3e} below -1e-10"
            )));
        }
        Ok(())
    }

    fn check_leakage(&self) -> Result<()> {
        let top = self.entries[(self.dim - 1, self.dim - 1)].re;
        if top > LEAKAGE_LIMIT {
            return Err(Error::Leakage { population: top, limit: LEAKAGE_LIMIT });
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &OperatorMatrix {
        &self.entries
    }

    /// Spec string the state was built from (`custom` for `from_entries`).
    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    /// Diagonal populations ⟨n|ρ|n⟩.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim).map(|n| self.entries[(n, n)].re).collect()
    }
}

/// Build a state from its spec at the given truncation dimension.
pub fn build_state(spec: &StateSpec, dim: usize) -> Result<DensityMatrix> {
    if dim < 2 {
        return Err(Error::InvalidArgument(format!("dim must be >= 2, got {dim}")));
    }
    spec.check(dim)?;
    let descriptor = spec.to_string();
    let entries = match spec {
        StateSpec::Coherent { alpha } => pure_density(&coherent_vector(*alpha, dim)),
        StateSpec::Fock { n } => {
            let mut psi = vec![ZERO; dim];
            psi[*n] = Complex64::new(1.0, 0.0);
            pure_density(&psi)
        }
        StateSpec::Cat { alpha, phase } => {
            let plus = coherent_vector(*alpha, dim);
            let minus = coherent_vector(-*alpha, dim);
            let w = Complex64::new(0.0, *phase).exp();
            let psi: Vec<Complex64> =
                plus.iter().zip(&minus).map(|(p, m)| p + w * m).collect();
            pure_density(&psi)
        }
        StateSpec::Thermal { mean_occupation } => {
            let nbar = *mean_occupation;
            // Geometric distribution n̄ⁿ/(1+n̄)^{n+1}, renormalized over the
            // retained levels.
            let ratio = nbar / (1.0 + nbar);
            let mut w = 1.0 / (1.0 + nbar);
            let mut diag = Vec::with_capacity(dim);
            for _ in 0..dim {
                diag.push(w);
                w *= ratio;
            }
            let total: f64 = diag.iter().sum();
            let mut m = OperatorMatrix::zeros(dim, dim);
            for (n, p) in diag.iter().enumerate() {
                m[(n, n)] = Complex64::new(p / total, 0.0);
            }
            m
        }
        StateSpec::SqueezedVacuum { r } => {
            // |ζ⟩ = Σ_k c_{2k} |2k⟩ with c_{2k} ∝ (−tanh r)^k √((2k)!)/(2^k k!).
            let t = r.tanh();
            let mut psi = vec![ZERO; dim];
            let mut c = 1.0; // unnormalized c_{2k}, built by recursion
            let mut k = 0usize;
            loop {
                let idx = 2 * k;
                if idx >= dim {
                    break;
                }
                psi[idx] = Complex64::new(c, 0.0);
                // c_{2k+2}/c_{2k} = −tanh r · √((2k+1)(2k+2)) / (2(k+1))
                let kk = k as f64;
                c *= -t * ((2.0 * kk + 1.0) * (2.0 * kk + 2.0)).sqrt() / (2.0 * (kk + 1.0));
                k += 1;
            }
            pure_density(&psi)
        }
    };
    DensityMatrix::built(entries, descriptor)
}

fn coherent_vector(alpha: Complex64, dim: usize) -> Vec<Complex64> {
    // αⁿ/√n! up to the global e^{−|α|²/2}; normalization happens in
    // pure_density so the truncated vector has unit norm.
    let mut psi = Vec::with_capacity(dim);
    let mut c = Complex64::new(1.0, 0.0);
    for n in 0..dim {
        psi.push(c);
        c *= alpha / Complex64::new(((n + 1) as f64).sqrt(), 0.0);
    }
    psi
}

/// ψψ† / ‖ψ‖²; exactly Hermitian by construction.
fn pure_density(psi: &[Complex64]) -> OperatorMatrix {
    let dim = psi.len();
    let norm_sqr: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
    let mut m = OperatorMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            m[(i, j)] = psi[i] * psi[j].conj() / norm_sqr;
        }
    }
    m
}

/// Annihilation and creation matrices: a|n⟩ = √n |n−1⟩, a† = aᵀ*.
pub fn ladder_matrices(dim: usize) -> (OperatorMatrix, OperatorMatrix) {
    let mut a = OperatorMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    let adag = a.adjoint();
    (a, adag)
}

/// Bogoliubov-transformed annihilation operator b = cosh(r)·a + sinh(r)·a†.
///
/// [b, b†] = 1 survives the transformation; on the truncated space the
/// commutator matrix deviates from the identity only in the top corner.
pub fn squeezed_ladder(dim: usize, r: f64) -> Result<OperatorMatrix> {
    if !r.is_finite() {
        return Err(Error::InvalidArgument(format!("squeeze parameter must be finite, got {r}")));
    }
    let (a, adag) = ladder_matrices(dim);
    Ok(a * Complex64::new(r.cosh(), 0.0) + adag * Complex64::new(r.sinh(), 0.0))
}

/// p-th matrix power by repeated multiplication.
pub fn matrix_power(m: &OperatorMatrix, p: usize) -> OperatorMatrix {
    let dim = m.nrows();
    let mut out = OperatorMatrix::identity(dim, dim);
    for _ in 0..p {
        out = &out * m;
    }
    out
}

/// Ground-truth normally ordered moment ⟨a†ⁿ aᵐ⟩ = Tr(ρ a†ⁿ aᵐ).
///
/// a†ⁿaᵐ couples levels up to n+m apart, so the order is capped at dim/2 to
/// keep the trace insensitive to the truncation boundary.
pub fn oracle_moment(rho: &DensityMatrix, n: usize, m: usize) -> Result<Complex64> {
    let margin = rho.dim() / 2;
    if n + m > margin {
        return Err(Error::Truncation { order: n + m, margin });
    }
    let (a, adag) = ladder_matrices(rho.dim());
    let op = matrix_power(&adag, n) * matrix_power(&a, m);
    oracle_expectation(rho, &op)
}

/// Ground-truth expectation Tr(ρ·O) for an arbitrary operator matrix.
pub fn oracle_expectation(rho: &DensityMatrix, op: &OperatorMatrix) -> Result<Complex64> {
    if op.nrows() != rho.dim() || op.ncols() != rho.dim() {
        return Err(Error::DimensionMismatch(op.nrows(), rho.dim()));
    }
    let r = rho.entries();
    let dim = rho.dim();
    let mut t = ZERO;
    for i in 0..dim {
        for j in 0..dim {
            t += r[(i, j)] * op[(j, i)];
        }
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn vacuum_is_fock_zero() {
        let rho = build_state(&StateSpec::Fock { n: 0 }, 16).unwrap();
        assert_eq!(rho.entries()[(0, 0)], c(1.0, 0.0));
        assert_eq!(rho.entries()[(3, 3)], c(0.0, 0.0));
        assert_abs_diff_eq!(rho.trace(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn coherent_populations_are_poisson() {
        let rho = build_state(&StateSpec::Coherent { alpha: c(1.5, 0.0) }, DEFAULT_DIM).unwrap();
        // Poisson weights evaluated from the formula, not from the builder.
        let lambda: f64 = 2.25;
        let mut expected = (-lambda).exp(); // n = 0
        for n in 0..6 {
            if n > 0 {
                expected *= lambda / n as f64;
            }
            assert_abs_diff_eq!(rho.entries()[(n, n)].re, expected, epsilon = 1e-12);
        }
        // n = 2 explicitly: e^{-2.25} 2.25^2 / 2!
        let p2 = (-2.25f64).exp() * 2.25 * 2.25 / 2.0;
        assert_abs_diff_eq!(rho.entries()[(2, 2)].re, p2, epsilon = 1e-12);
        assert_abs_diff_eq!(rho.trace(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn coherent_moment_matches_closed_form() {
        let alpha = c(1.5, 0.0);
        let rho = build_state(&StateSpec::Coherent { alpha }, DEFAULT_DIM).unwrap();
        let m11 = oracle_moment(&rho, 1, 1).unwrap();
        assert_abs_diff_eq!(m11.re, 2.25, epsilon = 1e-8);
        assert_abs_diff_eq!(m11.im, 0.0, epsilon = 1e-12);
        // conjugation structure: ⟨a†ⁿaᵐ⟩ = conj(α)ⁿ αᵐ for coherent states
        let alpha_i = c(0.7, -0.4);
        let rho_i = build_state(&StateSpec::Coherent { alpha: alpha_i }, DEFAULT_DIM).unwrap();
        let m12 = oracle_moment(&rho_i, 1, 2).unwrap();
        let expected = alpha_i.conj() * alpha_i * alpha_i;
        assert_abs_diff_eq!(m12.re, expected.re, epsilon = 1e-9);
        assert_abs_diff_eq!(m12.im, expected.im, epsilon = 1e-9);
    }

    #[test]
    fn thermal_populations_are_geometric() {
        let rho = build_state(&StateSpec::Thermal { mean_occupation: 0.5 }, 32).unwrap();
        // n̄ = 0.5: p_n = (1/(1+n̄))(n̄/(1+n̄))ⁿ = (2/3)(1/3)ⁿ; renormalization
        // over 32 levels shifts this by ~3^-32, invisible at 1e-12.
        for n in 0..8 {
            let expected = (2.0 / 3.0) * (1.0f64 / 3.0).powi(n as i32);
            assert_abs_diff_eq!(rho.entries()[(n, n)].re, expected, epsilon = 1e-12);
        }
        let m11 = oracle_moment(&rho, 1, 1).unwrap();
        assert_abs_diff_eq!(m11.re, 0.5, epsilon = 1e-12);
        // Thermal second moment: ⟨a†²a²⟩ = 2n̄².
        let m22 = oracle_moment(&rho, 2, 2).unwrap();
        assert_abs_diff_eq!(m22.re, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn cat_normalization_keeps_interference() {
        let rho = build_state(
            &StateSpec::Cat { alpha: c(1.5, 0.0), phase: 0.0 },
            DEFAULT_DIM,
        )
        .unwrap();
        // Even cat: only even levels populated; odd levels empty.
        assert!(rho.entries()[(1, 1)].re < 1e-15);
        assert!(rho.entries()[(0, 0)].re > 0.0);
        // ⟨a†a⟩ for an even cat: |α|² tanh(|α|²)... checked against the
        // direct formula |α|² (1−e^{−2|α|²})/(1+e^{−2|α|²}).
        let a2 = 2.25f64;
        let expected = a2 * (1.0 - (-2.0 * a2).exp()) / (1.0 + (-2.0 * a2).exp());
        let m11 = oracle_moment(&rho, 1, 1).unwrap();
        assert_abs_diff_eq!(m11.re, expected, epsilon = 1e-9);
    }

    #[test]
    fn squeezed_vacuum_quadrature_variances() {
        let r0 = 0.3;
        let rho = build_state(&StateSpec::SqueezedVacuum { r: r0 }, DEFAULT_DIM).unwrap();
        // Var(α̂₁) = e^{−2r}/4, Var(α̂₂) = e^{+2r}/4 with α̂₁ = (a+a†)/2.
        let m11 = oracle_moment(&rho, 1, 1).unwrap().re;
        let m20 = oracle_moment(&rho, 2, 0).unwrap().re;
        let m02 = oracle_moment(&rho, 0, 2).unwrap().re;
        let var1 = (m20 + m02 + 2.0 * m11 + 1.0) / 4.0;
        let var2 = (-(m20 + m02) + 2.0 * m11 + 1.0) / 4.0;
        assert_abs_diff_eq!(var1, (-2.0 * r0).exp() / 4.0, epsilon = 1e-10);
        assert_abs_diff_eq!(var2, (2.0 * r0).exp() / 4.0, epsilon = 1e-10);
    }

    #[test]
    fn ladder_matrix_elements() {
        let (a, adag) = ladder_matrices(4);
        assert_eq!(a[(0, 1)], c(1.0, 0.0));
        assert_eq!(a[(2, 3)], c(3.0f64.sqrt(), 0.0));
        assert_eq!(adag[(3, 2)], c(3.0f64.sqrt(), 0.0));
        let n_op = &adag * &a;
        for k in 0..4 {
            assert_abs_diff_eq!(n_op[(k, k)].re, k as f64, epsilon = 1e-15);
        }
    }

    #[test]
    fn squeezed_ladder_reduces_to_annihilation_at_zero() {
        let (a, _) = ladder_matrices(8);
        let b = squeezed_ladder(8, 0.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn squeezed_ladder_commutator_is_identity_on_safe_block() {
        let dim = 16;
        let r = 0.5 * 2f64.ln(); // cosh r = (√2 + 1/√2)/2 ≈ 1.06066
        let b = squeezed_ladder(dim, r).unwrap();
        assert_abs_diff_eq!(b[(0, 1)].re, 1.0606601717798212, epsilon = 1e-12);
        let bdag = b.adjoint();
        let comm = &b * &bdag - &bdag * &b;
        for i in 0..dim - 2 {
            for j in 0..dim - 2 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(comm[(i, j)].re, expected, epsilon = 1e-12);
                assert_abs_diff_eq!(comm[(i, j)].im, 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn oracle_moment_fock_values() {
        let rho = build_state(&StateSpec::Fock { n: 3 }, 16).unwrap();
        // ⟨3|a†²a²|3⟩ = 3·2 = 6
        let m22 = oracle_moment(&rho, 2, 2).unwrap();
        assert_abs_diff_eq!(m22.re, 6.0, epsilon = 1e-12);
        let vac = build_state(&StateSpec::Fock { n: 0 }, 16).unwrap();
        assert_abs_diff_eq!(oracle_moment(&vac, 1, 1).unwrap().re, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn oracle_moment_enforces_truncation_margin() {
        let rho = build_state(&StateSpec::Fock { n: 1 }, 16).unwrap();
        let err = oracle_moment(&rho, 5, 4).unwrap_err();
        assert!(matches!(err, Error::Truncation { order: 9, margin: 8 }));
    }

    #[test]
    fn oracle_expectation_checks_dimensions() {
        let rho = build_state(&StateSpec::Fock { n: 0 }, 8).unwrap();
        let wrong = OperatorMatrix::identity(4, 4);
        assert!(matches!(
            oracle_expectation(&rho, &wrong).unwrap_err(),
            Error::DimensionMismatch(4, 8)
        ));
        let id = OperatorMatrix::identity(8, 8);
        assert_abs_diff_eq!(oracle_expectation(&rho, &id).unwrap().re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn qp_squared_expectation_for_coherent_state() {
        // ⟨q̂p̂²⟩ for a coherent state with real α₀ equals ⟨q⟩⟨p²⟩ = √2 α₀ · 1/2.
        let rho = build_state(&StateSpec::Coherent { alpha: c(1.5, 0.0) }, DEFAULT_DIM).unwrap();
        let (a, adag) = ladder_matrices(DEFAULT_DIM);
        let inv_sqrt2 = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let q = (&a + &adag) * inv_sqrt2;
        let p = (&a - &adag) * Complex64::new(0.0, -1.0) * inv_sqrt2;
        let op = &q * &p * &p;
        let val = oracle_expectation(&rho, &op).unwrap();
        assert_abs_diff_eq!(val.re, 1.5 * std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-9);
        assert_abs_diff_eq!(val.im, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn leakage_is_rejected() {
        // Thermal state with a fat tail: population at the top level of a
        // dim=32 space is (20/21)^31/21 ≈ 1e-2, far above the limit.
        let err = build_state(&StateSpec::Thermal { mean_occupation: 20.0 }, 32).unwrap_err();
        assert!(matches!(err, Error::Leakage { .. }));
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(matches!(
            build_state(&StateSpec::Fock { n: 20 }, 16).unwrap_err(),
            Error::InvalidSpec(_)
        ));
        assert!(matches!(
            build_state(&StateSpec::Coherent { alpha: c(5.0, 0.0) }, 16).unwrap_err(),
            Error::InvalidSpec(_)
        ));
        assert!(matches!(
            build_state(&StateSpec::Thermal { mean_occupation: f64::NAN }, 16).unwrap_err(),
            Error::InvalidSpec(_)
        ));
        assert!(matches!(
            build_state(&StateSpec::Fock { n: 0 }, 1).unwrap_err(),
            Error::InvalidArgument(_)
        ));
    }

    #[test]
    fn spec_grammar_round_trips() {
        let specs = [
            StateSpec::Coherent { alpha: c(1.5, 0.0) },
            StateSpec::Coherent { alpha: c(-0.25, 2.0) },
            StateSpec::Fock { n: 2 },
            StateSpec::Thermal { mean_occupation: 0.5 },
            StateSpec::Cat { alpha: c(1.5, 0.0), phase: 0.0 },
            StateSpec::Cat { alpha: c(1.0, -0.5), phase: 3.25 },
            StateSpec::SqueezedVacuum { r: 0.3 },
        ];
        for spec in specs {
            let text = spec.to_string();
            let back: StateSpec = text.parse().unwrap();
            assert_eq!(back, spec, "round trip failed for {text}");
        }
    }

    #[test]
    fn complex_literals_parse() {
        assert_eq!(parse_complex("1.5").unwrap(), c(1.5, 0.0));
        assert_eq!(parse_complex("1.5+0i").unwrap(), c(1.5, 0.0));
        assert_eq!(parse_complex("-1.5-2i").unwrap(), c(-1.5, -2.0));
        assert_eq!(parse_complex("2i").unwrap(), c(0.0, 2.0));
        assert_eq!(parse_complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_complex("1e-3+2.5e0i").unwrap(), c(1e-3, 2.5));
        assert!(parse_complex("bogus").is_err());
    }

    #[test]
    fn from_entries_validates() {
        let mut m = OperatorMatrix::zeros(4, 4);
        m[(0, 0)] = c(2.0, 0.0); // gets renormalized
        let rho = DensityMatrix::from_entries(m).unwrap();
        assert_abs_diff_eq!(rho.trace(), 1.0, epsilon = 1e-14);
        assert_eq!(rho.descriptor(), "custom");

        let mut bad = OperatorMatrix::zeros(4, 4);
        bad[(0, 1)] = c(1.0, 0.0); // not Hermitian
        bad[(0, 0)] = c(1.0, 0.0);
        assert!(DensityMatrix::from_entries(bad).is_err());

        let mut neg = OperatorMatrix::zeros(4, 4);
        neg[(0, 0)] = c(1.5, 0.0);
        neg[(1, 1)] = c(-0.5, 0.0); // negative eigenvalue
        assert!(DensityMatrix::from_entries(neg).is_err());
    }
}
