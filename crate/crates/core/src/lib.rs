//! Dephasing dynamics of the long-range XXZ chain.
//!
//! The Lindblad generator is split into magnetization sectors of the
//! operator space, each sector is eigendecomposed into biorthonormal right
//! and left modes, and states are evolved either spectrally or with a
//! matrix-free adaptive integrator. The analysis layer measures how an
//! initial state loads the relaxation spectrum and whether the trace
//! distances of two states to their steady states cross.
//!
//! Every numerical type is generic over [`Real`] (`f32` or `f64`); the
//! `*64` and `*32` aliases below fix the scalar.

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod liouvillian;
pub mod model;
pub mod scalar;
pub mod spectral;
pub mod spin;
pub mod states;

pub use analysis::{
    build_o2, commutator_norm, degeneracy_count, detect_crossing, fit_decay_rate, hs_cosine, mode_similarity,
    overlap_spectrum, verify_exact_mode, DecayFit, ModeSimilarity, MpembaReport, MpembaVerdict, OverlapEntry,
    OverlapSpectrum,
};
pub use dynamics::{distance_trajectory, evolve_integrate, evolve_spectral, trace_distance, TimeGrid, Trajectory};
pub use error::{Error, Result};
pub use liouvillian::{
    apply_liouvillian, build_superoperator, sector_decompose, sector_decompose_for, LiouvillianBlocks, SectorLabel,
};
pub use model::{all_to_all_check, build_hamiltonian, build_jumps, AllToAllCheck, LindbladModel, ModelParams};
pub use scalar::{Real, C};
pub use spectral::{
    decompose, decompose_with, relaxation_times, steady_state, DefectivePolicy, JordanGroup, ModeInfo,
    RelaxationTime, SectorModes, SpectralDecomposition,
};
pub use spin::{hilbert_dim, magnetization, pair_hopping, site_operator, total_spin_operators, Operator, SiteOp};
pub use states::{
    domain_wall, ground_state, maximally_mixed, random_density_matrix, thermal_state, z2_state, DensityMatrix,
    StateSpec,
};

pub type Operator64 = Operator<f64>;
pub type DensityMatrix64 = DensityMatrix<f64>;
pub type ModelParams64 = ModelParams<f64>;
pub type LindbladModel64 = LindbladModel<f64>;
pub type SpectralDecomposition64 = SpectralDecomposition<f64>;
pub type Trajectory64 = Trajectory<f64>;

pub type Operator32 = Operator<f32>;
pub type DensityMatrix32 = DensityMatrix<f32>;
pub type ModelParams32 = ModelParams<f32>;
pub type LindbladModel32 = LindbladModel<f32>;
pub type SpectralDecomposition32 = SpectralDecomposition<f32>;
pub type Trajectory32 = Trajectory<f32>;
