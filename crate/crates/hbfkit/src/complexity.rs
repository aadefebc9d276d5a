//! FLOP-count model comparing the closed-form hybrid design against the
//! least-squares alternating-ascent family it replaces.
//!
//! The model evaluates each algorithm's dominant-cost polynomial with unit
//! leading constants (published complexities are Big-O only, so constants
//! are a modeling choice — reflected in the tolerance of the reproduction
//! tests and noted in experiment metadata). The scan helper applies the
//! scaling rule `N = 8L`, `N_RF = N_s = L` used by the reference
//! complexity figures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::output::fmt_sig;

/// Default power-method iteration count for the fast alternating variant.
pub const DEFAULT_N_ITER: usize = 10;

/// Beamformer-design algorithms with published complexity polynomials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Closed-form eigenvector design: `N_RF·N²`.
    Proposed,
    /// Least-squares alternating ascent: `N_RF·N³ + N_RF²·N² + N_RF⁴`.
    Lsaa,
    /// Accelerated variant using `N_iter` power-method rounds:
    /// `N_iter·N_RF·N²`.
    LsaaFast,
}

impl Algorithm {
    /// Stable label used in CSV output.
    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Proposed => "proposed",
            Algorithm::Lsaa => "lsaa",
            Algorithm::LsaaFast => "lsaa_fast",
        }
    }

    /// All algorithms in CSV output order.
    pub const ALL: [Algorithm; 3] = [Algorithm::Proposed, Algorithm::Lsaa, Algorithm::LsaaFast];
}

/// One point of the complexity model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlopModel {
    /// Which algorithm's polynomial to evaluate.
    pub algorithm: Algorithm,
    /// Antenna count `N` (both ends sized equally).
    pub n: usize,
    /// RF-chain count `N_RF`.
    pub n_rf: usize,
    /// Power-method iterations; only [`Algorithm::LsaaFast`] reads it.
    pub n_iter: usize,
}

/// Evaluates the model's FLOP polynomial. All counts must be ≥ 1.
pub fn flops(model: &FlopModel) -> Result<f64> {
    if model.n < 1 || model.n_rf < 1 || model.n_iter < 1 {
        return Err(Error::InvalidArgument(format!(
            "FLOP model counts must be at least 1, got n={} n_rf={} n_iter={}",
            model.n, model.n_rf, model.n_iter
        )));
    }
    let n = model.n as f64;
    let n_rf = model.n_rf as f64;
    Ok(match model.algorithm {
        Algorithm::Proposed => n_rf * n * n,
        Algorithm::Lsaa => n_rf * n.powi(3) + n_rf.powi(2) * n * n + n_rf.powi(4),
        Algorithm::LsaaFast => model.n_iter as f64 * n_rf * n * n,
    })
}

fn model_at_scale(algorithm: Algorithm, l: usize, n_iter: usize) -> FlopModel {
    FlopModel {
        algorithm,
        n: 8 * l,
        n_rf: l,
        n_iter,
    }
}

/// Fractional FLOP reduction relative to the alternating-ascent reference
/// under the scaling rule `N = 8L`, `N_RF = N_s = L`, with a configurable
/// iteration count for the fast variant.
pub fn reduction_vs_lsaa_with_iter(algorithm: Algorithm, l: usize, n_iter: usize) -> Result<f64> {
    let own = flops(&model_at_scale(algorithm, l, n_iter))?;
    let reference = flops(&model_at_scale(Algorithm::Lsaa, l, n_iter))?;
    Ok(1.0 - own / reference)
}

/// [`reduction_vs_lsaa_with_iter`] at the default `N_iter` =
/// [`DEFAULT_N_ITER`].
pub fn reduction_vs_lsaa(algorithm: Algorithm, l: usize) -> Result<f64> {
    reduction_vs_lsaa_with_iter(algorithm, l, DEFAULT_N_ITER)
}

/// Renders the scan CSV `L,algorithm,flops,reduction_vs_lsaa` for
/// `L = 1..=l_max`, three rows per scale point.
pub fn scan_csv(l_max: usize, n_iter: usize) -> Result<String> {
    if l_max < 1 {
        return Err(Error::InvalidArgument(format!(
            "complexity scan needs l_max >= 1, got {l_max}"
        )));
    }
    let mut out = String::from("L,algorithm,flops,reduction_vs_lsaa\n");
    for l in 1..=l_max {
        for algorithm in Algorithm::ALL {
            let f = flops(&model_at_scale(algorithm, l, n_iter))?;
            let r = reduction_vs_lsaa_with_iter(algorithm, l, n_iter)?;
            out.push_str(&format!(
                "{l},{},{},{}\n",
                algorithm.label(),
                fmt_sig(f),
                fmt_sig(r)
            ));
        }
    }
    Ok(out)
}

// ── Tests ──
