//! Numerical study of energy exchange in a driven, dissipative two-level
//! system, read out through the phase of an auxiliary detector qubit.
//!
//! A four-qubit register (system, detector, two environment ancillas) is
//! propagated exactly as a dense statevector. Three coupling schemes imprint
//! the system's internal-energy change ΔU, the work W, or the dissipated
//! heat Q onto the detector coherence; scanning the coupling strength χ
//! yields the generating function G(χ) whose Fourier transform is the
//! quasi-probability distribution of the exchanged energy, and whose slope
//! at the origin is the average. A three-qubit two-measurement reference
//! ([`tmp`]) provides the classical statistics the quasi-distributions are
//! compared against.
//!
//! Conventions, fixed once and used everywhere:
//! - qubit `q` is bit `q` of the basis index (qubit 0 varies fastest); in
//!   explicit matrices and keep-lists the first-listed qubit is the high bit;
//! - register layout: system 0, detector 1, env1 2, env2 3;
//! - energies are in units of the level splitting; the upper level (|1⟩, or
//!   |−⟩ in the σx basis) is the excited state that relaxation empties;
//! - global phases are not observable and equalities hold up to one.

pub mod error;
pub mod gates;
pub mod io;
pub mod protocol;
pub mod sim;
pub mod spectral;
pub mod tmp;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use protocol::{
    build_scheme_circuit, run_exact, run_sampled, sweep, ExperimentConfig, QcgfTable, RunMode,
    SchemeKind,
};
pub use sim::{DensityMatrix, QubitLayout, StateVector};
pub use spectral::{
    average_from_derivative, average_from_slope, conservation_check, default_f_grid,
    exact_first_moment, negativity, peak_weights, qpdf, renormalize_peaks, ConservationReport,
    MomentReport, NegativityReport, PeakTable, QpdfTable,
};
pub use tmp::{tmp_averages, tmp_distribution, TmpAverages, TmpDistribution};
