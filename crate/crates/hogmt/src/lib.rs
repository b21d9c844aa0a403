//! Decomposition-based characterization and precoding for non-stationary
//! multi-user wireless channels.
//!
//! A doubly-dispersive multi-user channel acts on a (user, time) symbol grid
//! through a 4-D kernel k(u,t;u',t'). This crate
//!
//! * synthesizes such channels from time-varying tap statistics and converts
//!   between the impulse-response, delay-Doppler, time-frequency, and
//!   windowed-projection representations ([`channel`]);
//! * decomposes kernels into jointly orthonormal pairs of 2-D eigenfunctions
//!   with shared singular values — flat-fading sub-channels of the operator
//!   ([`decompose`]), including the Karhunen-Loeve variant for random kernel
//!   ensembles ([`ensemble`]);
//! * precodes data onto the dual eigenfunctions so the receiver sees the
//!   data symbols directly, with no equalization ([`precode`]);
//! * extracts the full second-order statistics of an ensemble — channel
//!   correlation function, local scattering function, global scattering,
//!   path gain, total gain — both in eigen closed form and by direct
//!   Monte-Carlo estimation ([`stats`]);
//! * benchmarks the precoder against zero-forcing reception and a
//!   Tomlinson-Harashima dirty-paper surrogate over seeded, reproducible
//!   link simulations ([`modem`], [`baselines`], [`bench`]).
//!
//! The `examples/` directory has one runnable example per capability; the
//! `hogmt` binary exposes the same pipelines as subcommands.

pub mod baselines;
pub mod bench;
pub mod channel;
pub mod decompose;
pub mod ensemble;
pub mod error;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod modem;
pub mod precode;
pub mod stats;

pub use channel::{
    apply_kernel, atomic_kernel, impulse_to_kernel, impulse_to_spreading, spreading_to_impulse,
    spreading_to_transfer, synth_channel, transfer_to_spreading, AtomicKernel, ChannelConfig,
    ImpulseResponse, Kernel4D, SpreadingFunction, TransferFunction,
};
pub use decompose::{
    gmt_decompose, hogmt_decompose, reconstruction_error, select_eigen, select_eigen_with_mode,
    verify_duality, EigenSystem, EigenTriple, GmtDecomposition, ThresholdMode,
};
pub use ensemble::{
    deterministic_eigensystem, ensemble_klt, synthetic_separable_ensemble, ChannelEnsemble,
    EnsembleEigenSystem, EnsembleMode,
};
pub use error::{Error, Result};
pub use grid::{FlattenOrder, FlatteningMap, SymbolGrid};
pub use precode::{normalize_power, precode, precode_spatial, residual_interference, PrecodeReport};
