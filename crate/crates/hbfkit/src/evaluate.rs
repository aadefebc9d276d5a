//! Spectral-efficiency metrics, the Monte-Carlo sweep harness, and the
//! brute-force oracles the acceptance suite checks the closed-form designs
//! against.
//!
//! The headline metric is the per-subcarrier rate of a hybrid link with a
//! linear receive stage,
//!
//! `R_k = log₂|I + (1/σ_n²)·W_k^† H_k F_k F_k^H H_k^H W_k|`,
//!
//! averaged over the `K` subcarriers, where `W_k^†` is the Moore-Penrose
//! pseudo-inverse of the effective combiner. The digital baseline is scored
//! with the same determinant (its orthonormal combiner reduces it to the
//! water-filling closed form, which the tests cross-check).
//!
//! [`run_sweep`] drives whole experiments: for each grid point it draws
//! `n_realizations` channels from per-realization RNG substreams, designs
//! both beamformers, and records both SE values. Realizations run in
//! parallel but are collected in index order, so results are deterministic
//! for a fixed spec.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beamform::{self, DigitalBeamformer, HybridBeamformer, SystemConfig};
use crate::channel::{self, ChannelParams};
use crate::error::{Error, Result};
use crate::matkit::{self, C64, CMat};
use crate::output::fmt_sig;

/// Per-subcarrier rates in `[-RATE_CLAMP_TOL, 0)` are rounding noise around
/// a mathematically nonnegative quantity and are clamped to zero.
const RATE_CLAMP_TOL: f64 = 1e-9;

// ── Core metric ──

fn se_subcarrier(h: &CMat, f_k: &CMat, w_k: &CMat, noise_var: f64, k: usize) -> Result<f64> {
    let received = h * f_k;
    let w_pinv = matkit::pinv_default(w_k)?;
    let n_streams = f_k.ncols();
    let inv_noise = C64::new(1.0 / noise_var, 0.0);
    // W^† H F F^H H^H W, assembled from two N_s×N_s factors.
    let left = &w_pinv * &received;
    let right = received.adjoint() * w_k;
    let arg = CMat::identity(n_streams, n_streams) + &left * &right * inv_noise;
    let det = arg.lu().determinant();
    let rate = det.norm().log2();
    if !rate.is_finite() {
        return Err(Error::NonFiniteRate { subcarrier: k });
    }
    if rate < -RATE_CLAMP_TOL {
        return Err(Error::Numeric(format!(
            "negative rate {rate} at subcarrier index {k}"
        )));
    }
    Ok(rate.max(0.0))
}

/// Average spectral efficiency of a hybrid design in bits/s/Hz:
/// `(1/K)·Σ_k R_k` with the pseudo-inverse receive projection described in
/// the module docs. Checks shapes only — deliberately usable on beamformers
/// that violate the design invariants (e.g. zeroed digital stages).
pub fn spectral_efficiency(
    channels: &channel::ChannelRealization,
    bf: &HybridBeamformer,
    cfg: &SystemConfig,
) -> Result<f64> {
    cfg.validate()?;
    let k_total = cfg.n_subcarriers;
    if channels.n_subcarriers() != k_total
        || bf.f_bb.len() != k_total
        || bf.w_bb.len() != k_total
        || channels.n_rx() != cfg.n_rx
        || channels.n_tx() != cfg.n_tx
        || bf.f_rf.shape() != (cfg.n_tx, cfg.n_rf)
        || bf.w_rf.shape() != (cfg.n_rx, cfg.n_rf)
    {
        return Err(Error::DimensionMismatch(
            "channel/beamformer/config shapes disagree".into(),
        ));
    }
    let mut total = 0.0;
    for (k, h) in channels.per_subcarrier.iter().enumerate() {
        total += se_subcarrier(h, &bf.precoder(k), &bf.combiner(k), cfg.noise_var, k)?;
    }
    Ok(total / k_total as f64)
}

/// Average spectral efficiency of the fully-digital baseline, scored with
/// the same pseudo-inverse determinant as [`spectral_efficiency`].
pub fn spectral_efficiency_digital(
    channels: &channel::ChannelRealization,
    db: &DigitalBeamformer,
    cfg: &SystemConfig,
) -> Result<f64> {
    cfg.validate()?;
    let k_total = cfg.n_subcarriers;
    if channels.n_subcarriers() != k_total || db.f.len() != k_total || db.w.len() != k_total {
        return Err(Error::DimensionMismatch(
            "channel/beamformer/config shapes disagree".into(),
        ));
    }
    let mut total = 0.0;
    for (k, h) in channels.per_subcarrier.iter().enumerate() {
        total += se_subcarrier(h, &db.f[k], &db.w[k], cfg.noise_var, k)?;
    }
    Ok(total / k_total as f64)
}

/// Transmit-side achievable rate of one subcarrier with an optimal
/// receiver: `log₂|I + (1/σ_n²)·(H F)^H (H F)|`. Used by the precoder
/// bound-chain checks.
pub fn transmit_rate(h: &CMat, f_k: &CMat, noise_var: f64) -> Result<f64> {
    let received = h * f_k;
    let gram = received.adjoint() * &received;
    let n = gram.nrows();
    let arg = CMat::identity(n, n) + gram * C64::new(1.0 / noise_var, 0.0);
    matkit::logdet_hermitian(&arg)
}

/// Subspace capacity objective `log₂|I + c·V^H A V|` for an `n × m`
/// orthonormal candidate `V` against a Hermitian PSD matrix `A`, with
/// `c = γ/σ_n²`.
pub fn capacity_objective(a: &CMat, v: &CMat, gamma_over_sigma2: f64) -> Result<f64> {
    if v.nrows() != a.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "candidate subspace has {} rows, matrix is {}x{}",
            v.nrows(),
            a.nrows(),
            a.ncols()
        )));
    }
    let compressed = v.adjoint() * a * v;
    let m = compressed.nrows();
    let arg = CMat::identity(m, m) + compressed * C64::new(gamma_over_sigma2, 0.0);
    matkit::logdet_hermitian(&arg)
}

/// Random-search oracle for the analog-precoder subspace problem: the best
/// [`capacity_objective`] over `trials` orthonormal candidates drawn via QR
/// of Gaussian matrices. The eigenvector solution must dominate this value.
pub fn theorem1_random_search_oracle<R: Rng + ?Sized>(
    h_e: &CMat,
    n_rf: usize,
    gamma_over_sigma2: f64,
    trials: usize,
    rng: &mut R,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidArgument(
            "random-search oracle needs at least one trial".into(),
        ));
    }
    let n = h_e.nrows();
    let mut best = f64::NEG_INFINITY;
    for _ in 0..trials {
        let v = matkit::random_orthonormal(n, n_rf, rng);
        best = best.max(capacity_objective(h_e, &v, gamma_over_sigma2)?);
    }
    Ok(best)
}

// ── Sweep harness ──

/// Sweep axis: which scalar the experiment varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Operating SNR in dB; stream counts stay fixed.
    SnrDb,
    /// Stream count, with `N_s = N_RF` at every grid value.
    NStreams,
}

impl SweepAxis {
    /// Column label used in CSV output.
    pub fn label(self) -> &'static str {
        match self {
            SweepAxis::SnrDb => "snr_db",
            SweepAxis::NStreams => "n_streams",
        }
    }
}

/// A full experiment description: template config, axis, grid, realization
/// count, channel geometry, and master seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// Template system config. On the SNR axis its power/noise fields are
    /// replaced at each grid point (keeping `P_b = N_s`); on the streams
    /// axis its SNR ratio is preserved while `N_s = N_RF` take the grid
    /// value.
    pub cfg: SystemConfig,
    /// Swept quantity.
    pub axis: SweepAxis,
    /// Axis values; for [`SweepAxis::NStreams`] each must be a positive
    /// integer.
    pub grid: Vec<f64>,
    /// Monte-Carlo realizations per grid point.
    pub n_realizations: usize,
    /// Channel geometry shared by all grid points.
    pub channel_params: ChannelParams,
    /// Seed of the per-realization RNG substreams.
    pub master_seed: u64,
}

impl SweepSpec {
    /// Validates the spec, including every derived per-point config.
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::InvalidArgument("sweep grid is empty".into()));
        }
        if self.n_realizations < 1 {
            return Err(Error::InvalidArgument(
                "sweep needs at least one realization".into(),
            ));
        }
        self.channel_params.validate()?;
        if self.channel_params.n_subcarriers != self.cfg.n_subcarriers {
            return Err(Error::InvalidArgument(format!(
                "channel params have {} subcarriers, system config has {}",
                self.channel_params.n_subcarriers, self.cfg.n_subcarriers
            )));
        }
        for &value in &self.grid {
            self.config_at(value)?;
        }
        Ok(())
    }

    /// Resolves the system config at one grid value.
    ///
    /// Both axes keep the normalization `P_b = N_s`, `σ_n² = N_s/SNR`, so
    /// the per-stream power is 1 and the configured SNR is exactly
    /// `P_b/σ_n²`.
    pub fn config_at(&self, value: f64) -> Result<SystemConfig> {
        let mut cfg = self.cfg.clone();
        match self.axis {
            SweepAxis::SnrDb => {
                if !value.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "SNR grid value must be finite, got {value}"
                    )));
                }
                let snr_linear = 10.0f64.powf(value / 10.0);
                cfg.power_budget = cfg.n_streams as f64;
                cfg.noise_var = cfg.power_budget / snr_linear;
            }
            SweepAxis::NStreams => {
                if !value.is_finite() || value < 1.0 || value.fract() != 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "stream-count grid value must be a positive integer, got {value}"
                    )));
                }
                let snr_linear = self.cfg.snr();
                let n = value as usize;
                cfg.n_streams = n;
                cfg.n_rf = n;
                cfg.power_budget = n as f64;
                cfg.noise_var = cfg.power_budget / snr_linear;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Both algorithms' SE for one Monte-Carlo realization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealizationRecord {
    /// Realization index (also the RNG substream id).
    pub realization: usize,
    /// Hybrid design SE, bits/s/Hz.
    pub hybrid_se: f64,
    /// Digital water-filling baseline SE, bits/s/Hz.
    pub digital_se: f64,
}

/// Aggregated results at one grid value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    /// The axis value this point was run at.
    pub axis_value: f64,
    /// Mean hybrid SE over all realizations.
    pub mean_hybrid_se: f64,
    /// Mean digital-baseline SE over all realizations.
    pub mean_digital_se: f64,
    /// Per-realization records in realization order.
    pub records: Vec<RealizationRecord>,
}

/// Complete sweep output: the spec echo plus per-point aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// The spec that produced this result.
    pub spec: SweepSpec,
    /// One aggregate per grid value, in grid order.
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    /// Checks that every stored mean is the arithmetic mean of its records.
    pub fn validate(&self) -> Result<()> {
        for point in &self.points {
            let n = point.records.len() as f64;
            let hybrid: f64 = point.records.iter().map(|r| r.hybrid_se).sum::<f64>() / n;
            let digital: f64 = point.records.iter().map(|r| r.digital_se).sum::<f64>() / n;
            if (hybrid - point.mean_hybrid_se).abs() > 1e-12
                || (digital - point.mean_digital_se).abs() > 1e-12
            {
                return Err(Error::Numeric(format!(
                    "stored means at axis value {} do not match their records",
                    point.axis_value
                )));
            }
        }
        Ok(())
    }
}

fn run_realization(
    spec: &SweepSpec,
    cfg: &SystemConfig,
    realization: usize,
) -> Result<RealizationRecord> {
    let inner = || -> Result<RealizationRecord> {
        let mut rng = channel::substream_rng(spec.master_seed, realization as u64);
        let ch = channel::generate_channel(&spec.channel_params, cfg.n_rx, cfg.n_tx, &mut rng)?;
        let hybrid = beamform::design_hybrid(&ch, cfg)?;
        let digital = beamform::design_digital_baseline(&ch, cfg)?;
        Ok(RealizationRecord {
            realization,
            hybrid_se: spectral_efficiency(&ch, &hybrid, cfg)?,
            digital_se: spectral_efficiency_digital(&ch, &digital, cfg)?,
        })
    };
    inner().map_err(|e| Error::Realization {
        master_seed: spec.master_seed,
        realization,
        source: Box::new(e),
    })
}

/// Runs a full Monte-Carlo sweep.
///
/// Channel draws are keyed by `(master_seed, realization)` and reused
/// across grid points, so two grid points differ only in their operating
/// point, not their channels. Realizations run in parallel; records are
/// collected in realization order and means accumulated sequentially, so
/// the result is identical regardless of thread count.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let mut points = Vec::with_capacity(spec.grid.len());
    for &axis_value in &spec.grid {
        let cfg = spec.config_at(axis_value)?;
        let records: Vec<RealizationRecord> = (0..spec.n_realizations)
            .into_par_iter()
            .map(|r| run_realization(spec, &cfg, r))
            .collect::<Result<_>>()?;
        let n = records.len() as f64;
        let mean_hybrid_se = records.iter().map(|r| r.hybrid_se).sum::<f64>() / n;
        let mean_digital_se = records.iter().map(|r| r.digital_se).sum::<f64>() / n;
        points.push(SweepPoint {
            axis_value,
            mean_hybrid_se,
            mean_digital_se,
            records,
        });
    }
    Ok(SweepResult {
        spec: spec.clone(),
        points,
    })
}

// ── CSV rendering ──

/// Algorithm labels used in CSV rows, in output order.
pub const ALGORITHM_LABELS: [&str; 2] = ["hybrid", "dbf"];

/// Renders the per-realization records CSV:
/// `axis,axis_value,algorithm,realization,se_bits_per_hz`.
pub fn records_csv(result: &SweepResult) -> String {
    let axis = result.spec.axis.label();
    let mut out = String::from("axis,axis_value,algorithm,realization,se_bits_per_hz\n");
    for point in &result.points {
        let value = fmt_sig(point.axis_value);
        for record in &point.records {
            for (label, se) in ALGORITHM_LABELS
                .iter()
                .zip([record.hybrid_se, record.digital_se])
            {
                out.push_str(&format!(
                    "{axis},{value},{label},{},{}\n",
                    record.realization,
                    fmt_sig(se)
                ));
            }
        }
    }
    out
}

/// Renders the summary CSV: `axis,axis_value,algorithm,mean_se`.
pub fn summary_csv(result: &SweepResult) -> String {
    let axis = result.spec.axis.label();
    let mut out = String::from("axis,axis_value,algorithm,mean_se\n");
    for point in &result.points {
        let value = fmt_sig(point.axis_value);
        for (label, mean) in ALGORITHM_LABELS
            .iter()
            .zip([point.mean_hybrid_se, point.mean_digital_se])
        {
            out.push_str(&format!("{axis},{value},{label},{}\n", fmt_sig(mean)));
        }
    }
    out
}

// ── Brute-force oracles ──

/// Independent reference implementations used to cross-check the
/// closed-form designs. Deliberately naive: cofactor-expansion
/// determinants and exhaustive random search.
pub mod oracles {
    use super::*;

    /// Determinant by recursive cofactor expansion along the first row.
    /// Exponential cost — small matrices only.
    pub fn det_cofactor(a: &CMat) -> C64 {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "determinant needs a square matrix");
        assert!(n <= 9, "cofactor expansion is for small matrices");
        if n == 0 {
            return C64::new(1.0, 0.0);
        }
        if n == 1 {
            return a[(0, 0)];
        }
        let mut det = C64::new(0.0, 0.0);
        let mut sign = 1.0;
        for j in 0..n {
            let mut minor = CMat::zeros(n - 1, n - 1);
            for row in 1..n {
                let mut out_col = 0;
                for col in 0..n {
                    if col != j {
                        minor[(row - 1, out_col)] = a[(row, col)];
                        out_col += 1;
                    }
                }
            }
            det += a[(0, j)] * det_cofactor(&minor) * C64::new(sign, 0.0);
            sign = -sign;
        }
        det
    }

    /// Best transmit-side rate over random single-stream digital precoders:
    /// each trial draws a Gaussian `n_rf × 1` vector and scales it so the
    /// effective precoder `F_RF·b` spends exactly `power_budget`.
    pub fn best_random_digital_precoder_rate<R: Rng + ?Sized>(
        h: &CMat,
        f_rf: &CMat,
        power_budget: f64,
        noise_var: f64,
        trials: usize,
        rng: &mut R,
    ) -> Result<f64> {
        let mut best = f64::NEG_INFINITY;
        for _ in 0..trials {
            let b = matkit::random_gaussian_matrix(f_rf.ncols(), 1, rng);
            let unscaled = f_rf * &b;
            let norm = unscaled.norm();
            if norm == 0.0 {
                continue;
            }
            let f_k = unscaled * C64::new(power_budget.sqrt() / norm, 0.0);
            best = best.max(transmit_rate(h, &f_k, noise_var)?);
        }
        Ok(best)
    }

    /// Best spectral efficiency over random digital combiners: keeps the
    /// given design's analog stages and precoders, replacing every
    /// `W_BB[k]` with Gaussian draws.
    pub fn best_random_combiner_se<R: Rng + ?Sized>(
        channels: &channel::ChannelRealization,
        bf: &HybridBeamformer,
        cfg: &SystemConfig,
        trials: usize,
        rng: &mut R,
    ) -> Result<f64> {
        let mut candidate = bf.clone();
        let mut best = f64::NEG_INFINITY;
        for _ in 0..trials {
            for w_bb in &mut candidate.w_bb {
                *w_bb = matkit::random_gaussian_matrix(cfg.n_rf, cfg.n_streams, rng);
            }
            best = best.max(spectral_efficiency(channels, &candidate, cfg)?);
        }
        Ok(best)
    }
}

// ── Tests ──
