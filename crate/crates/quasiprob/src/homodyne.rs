//! Simulated eight-port homodyne measurement with imperfect detectors.
//!
//! Detector efficiencies (η₁, η₂) determine per-quadrature Gaussian noise
//! widths 4σᵢ² = (2−ηᵢ)/ηᵢ; the joint count probability of the scheme is the
//! smoothed distribution G built with exactly those widths. This module maps
//! efficiencies to smoothing/ordering parameters, draws seeded Monte Carlo
//! samples from G, and recovers operator moments ⟨a†ⁿaᵐ⟩ from the samples —
//! the complete measurement → correction → expectation pipeline.

use std::fmt::Write as _;
use std::io::Write;
use std::time::Instant;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{ladder_matrices, matrix_power, oracle_moment, DensityMatrix};
use crate::moments::{EstimationMethod, MomentEstimate};
use crate::ordering::{
    expand_in_ordered_basis, photon_number_expansion, OrderingExpansion, OrderingParams,
};
use crate::phasespace::{
    smooth, wigner_grid, PhaseSpaceField, QuadratureGrid, SmoothingWidths,
};

/// Minimum samples for a meaningful standard error.
pub const MIN_SAMPLES: u64 = 100;

/// Detector efficiencies with every derived smoothing/ordering parameter:
/// 4σᵢ² = (2−ηᵢ)/ηᵢ, κ = ω·σ₂/σ₁, s = −4σ₁σ₂, e^r = √(κ/ω).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    pub eta1: f64,
    pub eta2: f64,
    pub omega: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub kappa: f64,
    pub s: f64,
    pub r: f64,
}

impl DetectorModel {
    /// Ordering parameters this detector measures at.
    pub fn ordering_params(&self) -> Result<OrderingParams> {
        OrderingParams::new(self.s, self.r)
    }

    /// Smoothing widths of the joint count distribution.
    pub fn widths(&self) -> Result<SmoothingWidths> {
        SmoothingWidths::new(self.sigma1, self.sigma2)
    }
}

/// Map detector efficiencies to the parameters of the measured distribution.
/// Equal efficiencies give r = 0 and κ = ω exactly (no squeeze frame).
pub fn detector_params(eta1: f64, eta2: f64, omega: f64) -> Result<DetectorModel> {
    for eta in [eta1, eta2] {
        if !eta.is_finite() || !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::UnphysicalEfficiency { value: eta });
        }
    }
    if !omega.is_finite() || !(omega > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "mode frequency must be positive and finite, got {omega}"
        )));
    }
    let sigma1 = ((2.0 - eta1) / (4.0 * eta1)).sqrt();
    let sigma2 = ((2.0 - eta2) / (4.0 * eta2)).sqrt();
    let s = -4.0 * sigma1 * sigma2;
    let (kappa, r) = if eta1 == eta2 {
        (omega, 0.0)
    } else {
        (omega * sigma2 / sigma1, 0.5 * (sigma2 / sigma1).ln())
    };
    Ok(DetectorModel { eta1, eta2, omega, sigma1, sigma2, kappa, s, r })
}

/// Seeded joint-count outcomes (α₁, α₂) with full provenance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleSet {
    pub samples: Vec<(f64, f64)>,
    pub seed: u64,
    pub detector: DetectorModel,
    pub state_descriptor: String,
    pub count: u64,
}

/// One recovered target moment against its exact value.
#[derive(Debug, Clone, Serialize)]
pub struct ReconstructionEntry {
    pub target: (usize, usize),
    pub estimate: MomentEstimate,
    pub oracle: Complex64,
    pub abs_error: f64,
}

/// End-to-end result of a simulated measurement run. `wall_time` (seconds) is
/// excluded from serialization so that identical runs produce bit-identical
/// reports.
#[derive(Debug, Clone, Serialize)]
pub struct ReconstructionReport {
    pub entries: Vec<ReconstructionEntry>,
    pub detector: DetectorModel,
    pub sample_count: u64,
    #[serde(skip)]
    pub wall_time: f64,
}

/// Grid the sampler draws on: step 0.05 always; the half-extent covers the
/// state's Fock-diagonal reach plus eight smoothed standard deviations, the
/// 6σ kernel guard, and never shrinks below the default 8. Deterministic in
/// (ρ diagonal, detector), which the sampling reproducibility contract needs.
fn sampling_grid(rho: &DensityMatrix, detector: &DetectorModel) -> Result<QuadratureGrid> {
    let smax = detector.sigma1.max(detector.sigma2);
    let mut cum = 0.0;
    let mut occupied = rho.dim() - 1;
    for n in 0..rho.dim() {
        cum += rho.entries()[(n, n)].re;
        if cum >= 1.0 - 1e-12 {
            occupied = n;
            break;
        }
    }
    let state_reach = ((occupied + 1) as f64).sqrt();
    let half = 8.0f64
        .max(12.0 * smax)
        .max(state_reach + 8.0 * (0.25 + smax * smax).sqrt() + 0.5)
        .ceil();
    QuadratureGrid::new(-half, half, 0.05)
}

/// The joint count distribution the detector pair actually measures.
fn measured_field(rho: &DensityMatrix, detector: &DetectorModel) -> Result<PhaseSpaceField> {
    let grid = sampling_grid(rho, detector)?;
    let w = wigner_grid(rho, grid)?;
    smooth(&w, detector.widths()?)
}

/// Expand a 64-bit seed into a ChaCha8 key (splitmix64, four outputs,
/// little-endian). Documented and stable: identical seeds give identical
/// streams on every platform.
fn seeded_rng(seed: u64) -> ChaCha8Rng {
    let mut state = seed;
    let mut splitmix = move || {
        state = state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    };
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix().to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Uniform double in [0, 1): top 53 bits of the stream.
fn uniform01(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
}

/// Draw `count` joint quadrature outcomes distributed per the measured G
/// (categorical inverse-CDF over the flattened grid, cells weighted G·step²).
pub fn sample_joint_counts(
    rho: &DensityMatrix,
    detector: &DetectorModel,
    count: u64,
    seed: u64,
) -> Result<SampleSet> {
    if count == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let field = measured_field(rho, detector)?;
    let min = field.min_value();
    if min < -1e-9 {
        return Err(Error::NonPhysicalDistribution { min });
    }
    let boundary = field.boundary_max();
    if boundary > 1e-12 {
        return Err(Error::BoundaryMass { max_boundary: boundary, limit: 1e-12 });
    }

    let grid = field.grid();
    let n = grid.points();
    let mut cumulative = Vec::with_capacity(n * n);
    let mut total = 0.0f64;
    for &v in field.values() {
        total += v.max(0.0); // clamp the −1e-9..0 dust already vetted above
        cumulative.push(total);
    }

    let mut rng = seeded_rng(seed);
    let mut samples = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let x = uniform01(&mut rng) * total;
        let idx = cumulative.partition_point(|&c| c <= x).min(n * n - 1);
        samples.push((grid.coord(idx / n), grid.coord(idx % n)));
    }
    Ok(SampleSet {
        samples,
        seed,
        detector: *detector,
        state_descriptor: rho.descriptor().to_string(),
        count,
    })
}

/// β for a sample in the detector's squeeze frame: β = e^r·α₁ + i·e^{−r}·α₂.
fn beta_of(detector: &DetectorModel, a1: f64, a2: f64) -> Complex64 {
    Complex64::new(detector.r.exp() * a1, (-detector.r).exp() * a2)
}

/// Mean and the larger per-component standard error of the mean.
fn mean_and_se(values: &[Complex64]) -> (Complex64, f64) {
    let count = values.len() as f64;
    let mean = values.iter().sum::<Complex64>() / count;
    let mut var_re = 0.0;
    let mut var_im = 0.0;
    for v in values {
        var_re += (v.re - mean.re) * (v.re - mean.re);
        var_im += (v.im - mean.im) * (v.im - mean.im);
    }
    let se_re = (var_re / (count - 1.0)).sqrt() / count.sqrt();
    let se_im = (var_im / (count - 1.0)).sqrt() / count.sqrt();
    (mean, se_re.max(se_im))
}

/// Empirical moment ⟨(β̄)ⁿβᵐ⟩ over a sample set.
pub fn estimate_moment(set: &SampleSet, n: usize, m: usize) -> Result<MomentEstimate> {
    if set.count < MIN_SAMPLES {
        return Err(Error::InsufficientSamples { got: set.count, min: MIN_SAMPLES });
    }
    if n + m > 6 {
        return Err(Error::InvalidArgument(format!(
            "moment order n+m must be at most 6, got {}",
            n + m
        )));
    }
    let values: Vec<Complex64> = set
        .samples
        .iter()
        .map(|&(a1, a2)| {
            let beta = beta_of(&set.detector, a1, a2);
            beta.conj().powu(n as u32) * beta.powu(m as u32)
        })
        .collect();
    let (value, std_error) = mean_and_se(&values);
    Ok(MomentEstimate {
        value,
        std_error,
        method: EstimationMethod::MonteCarlo,
        params: set.detector.ordering_params()?,
    })
}

/// Evaluate an ordering expansion sample-by-sample: y = scalar + Σ c·(β̄)ᵘβᵛ.
/// Propagating the full per-sample statistic (not per-moment errors) keeps
/// the correlations between moments in the reported standard error.
fn sampled_expansion(
    betas: &[Complex64],
    expansion: &OrderingExpansion,
) -> (Complex64, f64) {
    let values: Vec<Complex64> = betas
        .iter()
        .map(|&beta| {
            let mut bpow = [Complex64::new(1.0, 0.0); 5];
            let mut cpow = [Complex64::new(1.0, 0.0); 5];
            for k in 1..5 {
                bpow[k] = bpow[k - 1] * beta;
                cpow[k] = cpow[k - 1] * beta.conj();
            }
            let mut y = expansion.constant;
            for (&(u, v), &c) in &expansion.terms {
                y += c * cpow[u] * bpow[v];
            }
            y
        })
        .collect();
    mean_and_se(&values)
}

/// Full simulated experiment: sample once, then recover every target moment
/// ⟨a†ⁿaᵐ⟩ from the same draw and compare with the exact Fock-space value.
pub fn reconstruct(
    rho: &DensityMatrix,
    detector: &DetectorModel,
    targets: &[(usize, usize)],
    count: u64,
    seed: u64,
) -> Result<ReconstructionReport> {
    let start = Instant::now();
    if targets.is_empty() {
        return Err(Error::InvalidArgument("need at least one target moment".into()));
    }
    for &(n, m) in targets {
        if n + m > 4 {
            return Err(Error::InvalidArgument(format!(
                "target ({n},{m}) has degree {} > 4",
                n + m
            )));
        }
    }
    if count < MIN_SAMPLES {
        return Err(Error::InsufficientSamples { got: count, min: MIN_SAMPLES });
    }
    let set = sample_joint_counts(rho, detector, count, seed)?;
    let params = detector.ordering_params()?;
    let betas: Vec<Complex64> = set
        .samples
        .iter()
        .map(|&(a1, a2)| beta_of(detector, a1, a2))
        .collect();

    let (annihilate, create) = ladder_matrices(rho.dim());
    let mut entries = Vec::with_capacity(targets.len());
    for &(n, m) in targets {
        let expansion = if (n, m) == (1, 1) {
            photon_number_expansion(params)
        } else {
            let op = matrix_power(&create, n) * matrix_power(&annihilate, m);
            expand_in_ordered_basis(&op, params, rho.dim(), 4)?
        };
        let (value, std_error) = sampled_expansion(&betas, &expansion);
        let estimate = MomentEstimate {
            value,
            std_error,
            method: EstimationMethod::MonteCarlo,
            params,
        };
        let oracle = oracle_moment(rho, n, m)?;
        entries.push(ReconstructionEntry {
            target: (n, m),
            estimate,
            oracle,
            abs_error: (value - oracle).norm(),
        });
    }
    Ok(ReconstructionReport {
        entries,
        detector: *detector,
        sample_count: count,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// CSV export: `# seed,eta1,eta2,count,state` metadata header (state text
/// last — it may itself contain commas), then one `alpha1,alpha2` line per
/// sample, 17 significant digits.
pub fn write_samples_csv<W: Write>(set: &SampleSet, mut writer: W) -> Result<()> {
    let mut text = String::with_capacity(set.samples.len() * 52 + 128);
    let _ = writeln!(
        text,
        "# {},{:.16e},{:.16e},{},{}",
        set.seed, set.detector.eta1, set.detector.eta2, set.count, set.state_descriptor
    );
    for &(a1, a2) in &set.samples {
        let _ = writeln!(text, "{a1:.16e},{a2:.16e}");
    }
    writer.write_all(text.as_bytes())?;
    Ok(())
}
