//! Shared fixtures for the integration suites: the reference state catalog
//! and cached phase-space fields (Wigner builds dominate suite runtime, so
//! each state's Wigner function is computed once per grid and shared).
#![allow(dead_code)]

use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use quasiprob::fock::{build_state, DensityMatrix, StateSpec};
use quasiprob::phasespace::{wigner_grid, PhaseSpaceField, QuadratureGrid};

/// Hilbert-space dimension used for every catalog state.
pub const DIM: usize = 64;

pub const STATE_COUNT: usize = 7;

/// Catalog indices for the states that anchor specific assertions.
pub const VACUUM: usize = 0;
pub const FOCK_ONE: usize = 1;
pub const FOCK_TWO: usize = 2;
pub const COHERENT: usize = 3;
pub const CAT: usize = 4;
pub const THERMAL: usize = 5;
pub const SQUEEZED: usize = 6;

pub fn state_specs() -> [StateSpec; STATE_COUNT] {
    [
        StateSpec::Fock { n: 0 },
        StateSpec::Fock { n: 1 },
        StateSpec::Fock { n: 2 },
        StateSpec::Coherent { alpha: Complex64::new(1.5, 0.0) },
        StateSpec::Cat { alpha: Complex64::new(1.5, 0.0), phase: 0.0 },
        StateSpec::Thermal { mean_occupation: 0.5 },
        StateSpec::SqueezedVacuum { r: 0.3 },
    ]
}

pub fn state_name(index: usize) -> &'static str {
    [
        "vacuum",
        "fock(1)",
        "fock(2)",
        "coherent(1.5)",
        "cat(1.5,0)",
        "thermal(0.5)",
        "squeezed_vacuum(0.3)",
    ][index]
}

/// Density matrix for catalog state `index`, built once and shared.
pub fn test_state(index: usize) -> Arc<DensityMatrix> {
    static CACHE: OnceLock<Vec<Arc<DensityMatrix>>> = OnceLock::new();
    CACHE
        .get_or_init(|| {
            state_specs()
                .iter()
                .map(|spec| Arc::new(build_state(spec, DIM).expect("catalog state builds")))
                .collect()
        })[index]
        .clone()
}

/// The default grid the library and CLI use when nothing wider is needed.
pub fn default_grid() -> QuadratureGrid {
    QuadratureGrid::default_grid()
}

/// A wider grid that keeps the 6σ smoothing kernel inside the quarter-span
/// guard for every width used in the suites (σ up to √(7/12) from η = 0.6
/// and the isotropic σ = 0.75 lattice point).
pub fn wide_grid() -> QuadratureGrid {
    QuadratureGrid::new(-10.0, 10.0, 0.05).expect("wide grid is valid")
}

fn wigner_cached(index: usize, grid: QuadratureGrid, slot: usize) -> Arc<PhaseSpaceField> {
    static CACHE: OnceLock<Mutex<Vec<Option<Arc<PhaseSpaceField>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(vec![None; 2 * STATE_COUNT]));
    let mut slots = cache.lock().expect("wigner cache lock");
    let entry = &mut slots[slot * STATE_COUNT + index];
    if entry.is_none() {
        let field = wigner_grid(&test_state(index), grid).expect("wigner build succeeds");
        *entry = Some(Arc::new(field));
    }
    entry.as_ref().expect("just inserted").clone()
}

/// Wigner function of catalog state `index` on the default grid (cached).
pub fn wigner_default(index: usize) -> Arc<PhaseSpaceField> {
    wigner_cached(index, default_grid(), 0)
}

/// Wigner function of catalog state `index` on the wide grid (cached).
pub fn wigner_wide(index: usize) -> Arc<PhaseSpaceField> {
    wigner_cached(index, wide_grid(), 1)
}

/// Largest |a - b| over two fields sampled on identical grids.
pub fn sup_diff(a: &PhaseSpaceField, b: &PhaseSpaceField) -> f64 {
    assert_eq!(a.values().shape(), b.values().shape(), "fields must share a grid");
    a.values()
        .iter()
        .zip(b.values().iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
