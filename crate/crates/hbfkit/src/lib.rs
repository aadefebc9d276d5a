//! Closed-form hybrid beamforming for wideband mmWave MIMO-OFDM links.
//!
//! A large antenna array driven by a handful of RF chains cannot apply an
//! arbitrary precoder: the analog stage is a phase-shifter network whose
//! entries all have the same magnitude, shared by every subcarrier, while
//! only the small digital stage may vary per subcarrier. This crate
//! implements a non-iterative design for that split — eigenvectors of the
//! subcarrier-averaged channel Gram matrix projected onto the unit-modulus
//! constraint for the analog stages, and per-subcarrier SVD/MMSE solutions
//! for the digital stages — together with everything needed to evaluate it:
//! a clustered multipath OFDM channel generator, spectral-efficiency
//! scoring against a fully digital water-filling baseline, a floating-point
//! operation cost model, and a deterministic Monte-Carlo sweep harness.
//!
//! # Modules
//!
//! - [`matkit`] — small dense complex linear algebra used everywhere else:
//!   Hermitian eigendecompositions with deterministic phase conventions,
//!   thin SVD/QR, pseudo-inverse, water-filling.
//! - [`channel`] — clustered-multipath OFDM channel synthesis and a text
//!   dump format for realizations.
//! - [`beamform`] — the hybrid precoder/combiner construction and the
//!   fully digital baseline.
//! - [`evaluate`] — spectral-efficiency metrics, capacity bounds, and the
//!   sweep harness with CSV output.
//! - [`complexity`] — closed-form FLOP counts for the proposed design and
//!   two iterative reference algorithms.
//! - [`config`] — strict `key = value` experiment-config parsing.
//! - [`output`] — number formatting, atomic file writes, run metadata.
//!
//! # Determinism
//!
//! Every randomized quantity flows from a caller-supplied master seed
//! through counter-based RNG substreams, one per channel realization, so
//! results are reproducible bit-for-bit regardless of thread count or
//! evaluation order. Repeated runs with the same config and seed produce
//! byte-identical CSV output.
//!
//! # Example
//!
//! ```
//! use hbfkit::beamform::{design_hybrid, SystemConfig};
//! use hbfkit::channel::{generate_channel, substream_rng, ChannelParams};
//! use hbfkit::evaluate::spectral_efficiency;
//!
//! let cfg = SystemConfig {
//!     n_tx: 8,
//!     n_rx: 8,
//!     n_rf: 2,
//!     n_streams: 2,
//!     n_subcarriers: 4,
//!     power_budget: 2.0,
//!     noise_var: 0.2,
//! };
//! let params = ChannelParams {
//!     n_clusters: 3,
//!     n_rays: 4,
//!     angular_spread_rx: 10.0f64.to_radians(),
//!     angular_spread_tx: 10.0f64.to_radians(),
//!     antenna_spacing_over_wavelength: 0.5,
//!     n_subcarriers: 4,
//! };
//! let mut rng = substream_rng(7, 0);
//! let channel = generate_channel(&params, 8, 8, &mut rng).unwrap();
//! let beamformer = design_hybrid(&channel, &cfg).unwrap();
//! let se = spectral_efficiency(&channel, &beamformer, &cfg).unwrap();
//! assert!(se > 0.0);
//! ```

pub mod beamform;
pub mod channel;
pub mod complexity;
pub mod config;
pub mod error;
pub mod evaluate;
pub mod matkit;
pub mod output;

pub use beamform::{DigitalBeamformer, HybridBeamformer, SystemConfig};
pub use channel::{ChannelParams, ChannelRealization};
pub use error::{Error, Result};
