//! Closed-form hybrid beamformer construction and the fully-digital
//! water-filling baseline.
//!
//! The hybrid design splits each end of the link into an analog
//! phase-shifter matrix shared by all `K` subcarriers and a per-subcarrier
//! digital matrix:
//!
//! * **Analog precoder** `F_RF`: the leading eigenvectors of the averaged
//!   transmit-side Gram matrix `H_e = (1/K)·Σ_k H_k^H H_k`, projected
//!   entrywise onto the unit-modulus constraint `|F_RF(i,j)| = 1/√N_t`.
//! * **Digital precoder** `F_BB[k]`: whitens the analog Gram matrix via
//!   `M = (F_RF^H F_RF)^(−1/2)`, then steers along the leading right
//!   singular vectors of the whitened effective channel with equal power
//!   `γ = P_b/N_s` per stream.
//! * **Analog combiner** `W_RF`: same eigenvector-projection recipe applied
//!   to the averaged receive-side matrix `T_e = (1/K)·Σ_k H_k F_k F_k^H H_k^H`
//!   once the transmit side is fixed.
//! * **Digital combiner** `W_BB[k]`: the MMSE solution
//!   `(J_k J_k^H + σ_n²·W_RF^H W_RF)^(−1)·J_k`, computed via a Cholesky
//!   solve rather than an explicit inverse.
//!
//! The digital baseline water-fills over each subcarrier's singular values
//! and serves as the unconstrained upper bound in every experiment.
//!
//! All designs are deterministic: fixed summation order over subcarriers
//! and canonical-phase eigen/singular bases make repeated runs bit-stable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matkit::{self, C64, CMat};
use crate::channel::ChannelRealization;

/// Tolerance on `| |entry| − 1/√N |` when validating analog beamformers
/// (construction is exact up to the arithmetic's own rounding).
pub const UNIT_MODULUS_TOL: f64 = 1e-12;
/// Tolerance on `| ‖F_RF F_BB[k]‖_F² − P_b |` when validating precoders.
pub const POWER_TOL: f64 = 1e-9;

/// Link dimensions and per-subcarrier operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Transmit antennas (N_t).
    pub n_tx: usize,
    /// Receive antennas (N_r).
    pub n_rx: usize,
    /// RF chains at both ends (N_RF).
    pub n_rf: usize,
    /// Spatial streams (N_s).
    pub n_streams: usize,
    /// OFDM subcarriers (K).
    pub n_subcarriers: usize,
    /// Transmit power budget per subcarrier (P_b).
    pub power_budget: f64,
    /// Noise variance (σ_n²).
    pub noise_var: f64,
}

impl SystemConfig {
    /// Checks the structural invariants:
    /// `N_s ≤ N_RF ≤ min(N_t, N_r)`, positive counts, positive power and
    /// noise.
    pub fn validate(&self) -> Result<()> {
        if self.n_tx < 1 || self.n_rx < 1 || self.n_rf < 1 || self.n_streams < 1 {
            return Err(Error::InvalidArgument(format!(
                "antenna/chain/stream counts must be at least 1, got \
                 n_tx={} n_rx={} n_rf={} n_streams={}",
                self.n_tx, self.n_rx, self.n_rf, self.n_streams
            )));
        }
        if self.n_subcarriers < 1 {
            return Err(Error::InvalidArgument(
                "n_subcarriers must be at least 1".into(),
            ));
        }
        if self.n_streams > self.n_rf {
            return Err(Error::InvalidArgument(format!(
                "constraint N_s ≤ N_RF violated: n_streams={} > n_rf={}",
                self.n_streams, self.n_rf
            )));
        }
        let min_antennas = self.n_tx.min(self.n_rx);
        if self.n_rf > min_antennas {
            return Err(Error::InvalidArgument(format!(
                "constraint N_RF ≤ min(N_t, N_r) violated: n_rf={} > {}",
                self.n_rf, min_antennas
            )));
        }
        if !(self.power_budget.is_finite() && self.power_budget > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "power budget must be positive and finite, got {}",
                self.power_budget
            )));
        }
        if !(self.noise_var.is_finite() && self.noise_var > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "noise variance must be positive and finite, got {}",
                self.noise_var
            )));
        }
        Ok(())
    }

    /// Linear SNR, defined as `P_b / σ_n²`.
    pub fn snr(&self) -> f64 {
        self.power_budget / self.noise_var
    }

    /// Equal per-stream transmit power `γ = P_b / N_s`.
    pub fn per_stream_power(&self) -> f64 {
        self.power_budget / self.n_streams as f64
    }
}

/// A complete hybrid design: shared analog matrices plus per-subcarrier
/// digital matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridBeamformer {
    /// Analog precoder, `n_tx × n_rf`, entries of modulus `1/√N_t`.
    pub f_rf: CMat,
    /// Digital precoders, one `n_rf × n_streams` matrix per subcarrier.
    pub f_bb: Vec<CMat>,
    /// Analog combiner, `n_rx × n_rf`, entries of modulus `1/√N_r`.
    pub w_rf: CMat,
    /// Digital combiners, one `n_rf × n_streams` matrix per subcarrier.
    pub w_bb: Vec<CMat>,
}

impl HybridBeamformer {
    /// Effective precoder `F_k = F_RF·F_BB[k]` for subcarrier `k` (0-based).
    pub fn precoder(&self, k: usize) -> CMat {
        &self.f_rf * &self.f_bb[k]
    }

    /// Effective combiner `W_k = W_RF·W_BB[k]` for subcarrier `k` (0-based).
    pub fn combiner(&self, k: usize) -> CMat {
        &self.w_rf * &self.w_bb[k]
    }

    /// Asserts the constraint set: matrix shapes, unit-modulus analog
    /// entries, and per-subcarrier transmit power `‖F_RF F_BB[k]‖_F² = P_b`.
    pub fn validate(&self, cfg: &SystemConfig) -> Result<()> {
        cfg.validate()?;
        let shapes_ok = self.f_rf.shape() == (cfg.n_tx, cfg.n_rf)
            && self.w_rf.shape() == (cfg.n_rx, cfg.n_rf)
            && self.f_bb.len() == cfg.n_subcarriers
            && self.w_bb.len() == cfg.n_subcarriers
            && self
                .f_bb
                .iter()
                .chain(&self.w_bb)
                .all(|m| m.shape() == (cfg.n_rf, cfg.n_streams));
        if !shapes_ok {
            return Err(Error::DimensionMismatch(
                "hybrid beamformer shapes do not match the system config".into(),
            ));
        }
        check_unit_modulus(&self.f_rf, cfg.n_tx, "analog precoder")?;
        check_unit_modulus(&self.w_rf, cfg.n_rx, "analog combiner")?;
        for (k, f_bb) in self.f_bb.iter().enumerate() {
            let power = (&self.f_rf * f_bb).norm().powi(2);
            if (power - cfg.power_budget).abs() > POWER_TOL {
                return Err(Error::InvalidArgument(format!(
                    "precoder power off budget at subcarrier index {k}: \
                     ‖F_RF F_BB‖_F² = {power}, budget = {}",
                    cfg.power_budget
                )));
            }
        }
        Ok(())
    }
}

/// The fully-digital water-filling design used as an upper-bound baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct DigitalBeamformer {
    /// Per-subcarrier precoders, `n_tx × n_streams`, columns scaled by √pᵢ.
    pub f: Vec<CMat>,
    /// Per-subcarrier combiners, `n_rx × n_streams`, orthonormal columns.
    pub w: Vec<CMat>,
    /// Per-subcarrier water-filling powers, each of length `n_streams`.
    pub powers: Vec<Vec<f64>>,
}

fn check_unit_modulus(m: &CMat, n_antennas: usize, what: &str) -> Result<()> {
    let target = 1.0 / (n_antennas as f64).sqrt();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let dev = (m[(i, j)].norm() - target).abs();
            if dev > UNIT_MODULUS_TOL {
                return Err(Error::InvalidArgument(format!(
                    "{what} entry ({i}, {j}) breaks the unit-modulus constraint: \
                     |entry| deviates from 1/√{n_antennas} by {dev:.3e}"
                )));
            }
        }
    }
    Ok(())
}

fn check_channel_dims(channels: &ChannelRealization, cfg: &SystemConfig) -> Result<()> {
    cfg.validate()?;
    if channels.n_subcarriers() != cfg.n_subcarriers
        || channels.n_rx() != cfg.n_rx
        || channels.n_tx() != cfg.n_tx
    {
        return Err(Error::DimensionMismatch(format!(
            "channel realization is {}x{} over {} subcarriers, config wants {}x{} over {}",
            channels.n_rx(),
            channels.n_tx(),
            channels.n_subcarriers(),
            cfg.n_rx,
            cfg.n_tx,
            cfg.n_subcarriers
        )));
    }
    Ok(())
}

/// Projects a matrix entrywise onto the constant-modulus set: each entry
/// keeps its phase and takes amplitude `1/√n_antennas`. A zero entry is
/// assigned phase 0.
pub fn unit_modulus_projection(a: &CMat, n_antennas: usize) -> CMat {
    let amplitude = 1.0 / (n_antennas as f64).sqrt();
    a.map(|z| C64::from_polar(amplitude, z.arg()))
}

/// Transmit-side averaged Gram matrix `H_e = (1/K)·Σ_k H_k^H H_k`
/// (Hermitian PSD, `n_tx × n_tx`), accumulated in ascending subcarrier
/// order for bit-stable results.
pub fn effective_channel_gram(channels: &ChannelRealization) -> CMat {
    let n_tx = channels.n_tx();
    let mut gram = CMat::zeros(n_tx, n_tx);
    for h in &channels.per_subcarrier {
        gram += h.adjoint() * h;
    }
    gram * C64::new(1.0 / channels.n_subcarriers() as f64, 0.0)
}

/// Designs the analog precoder: unit-modulus projection of the `N_RF`
/// leading eigenvectors of `H_e`. Returns `(F_RF, H_e)`; `H_e` is exposed
/// so evaluation and bound checks can reuse it without recomputation.
pub fn design_analog_precoder(
    channels: &ChannelRealization,
    cfg: &SystemConfig,
) -> Result<(CMat, CMat)> {
    check_channel_dims(channels, cfg)?;
    let h_e = effective_channel_gram(channels);
    let v_star = matkit::partial_top_eigvectors(&h_e, cfg.n_rf)?;
    Ok((unit_modulus_projection(&v_star, cfg.n_tx), h_e))
}

/// Designs the per-subcarrier digital precoders given `F_RF`:
/// `F_BB[k] = M·V_k·√γ` with `M = (F_RF^H F_RF)^(−1/2)`, `V_k` the leading
/// `N_s` right singular vectors of the whitened channel `Q_k = H_k F_RF M`,
/// and equal per-stream power `γ = P_b/N_s`.
pub fn design_digital_precoder(
    channels: &ChannelRealization,
    f_rf: &CMat,
    cfg: &SystemConfig,
) -> Result<Vec<CMat>> {
    check_channel_dims(channels, cfg)?;
    if f_rf.shape() != (cfg.n_tx, cfg.n_rf) {
        return Err(Error::DimensionMismatch(format!(
            "analog precoder is {}x{}, config wants {}x{}",
            f_rf.nrows(),
            f_rf.ncols(),
            cfg.n_tx,
            cfg.n_rf
        )));
    }
    let whiten = matkit::inverse_sqrt_hermitian(&(f_rf.adjoint() * f_rf))?;
    let sqrt_gamma = C64::new(cfg.per_stream_power().sqrt(), 0.0);
    let mut f_bb = Vec::with_capacity(cfg.n_subcarriers);
    for h in &channels.per_subcarrier {
        let whitened = h * f_rf * &whiten;
        let svd = matkit::svd_thin(&whitened)?;
        let v_lead = svd.v.columns(0, cfg.n_streams).into_owned();
        f_bb.push(&whiten * v_lead * sqrt_gamma);
    }
    Ok(f_bb)
}

/// Designs the analog combiner once the transmit side is fixed: projects
/// the `N_RF` leading eigenvectors of the averaged receive-side matrix
/// `T_e = (1/K)·Σ_k H_k F_k F_k^H H_k^H`. Returns `(W_RF, T_e)`.
pub fn design_analog_combiner(
    channels: &ChannelRealization,
    f_rf: &CMat,
    f_bb: &[CMat],
    cfg: &SystemConfig,
) -> Result<(CMat, CMat)> {
    check_channel_dims(channels, cfg)?;
    if f_bb.len() != cfg.n_subcarriers {
        return Err(Error::DimensionMismatch(format!(
            "got {} digital precoders for {} subcarriers",
            f_bb.len(),
            cfg.n_subcarriers
        )));
    }
    let mut t_e = CMat::zeros(cfg.n_rx, cfg.n_rx);
    for (h, f_bb_k) in channels.per_subcarrier.iter().zip(f_bb) {
        let received = h * f_rf * f_bb_k;
        t_e += &received * received.adjoint();
    }
    t_e *= C64::new(1.0 / cfg.n_subcarriers as f64, 0.0);
    let u_star = matkit::partial_top_eigvectors(&t_e, cfg.n_rf)?;
    Ok((unit_modulus_projection(&u_star, cfg.n_rx), t_e))
}

/// Designs the per-subcarrier MMSE digital combiners:
/// `W_BB[k] = (J_k J_k^H + σ_n²·W_RF^H W_RF)^(−1)·J_k` with
/// `J_k = W_RF^H H_k F_k`, solved by Cholesky factorization.
pub fn design_digital_combiner(
    channels: &ChannelRealization,
    f_rf: &CMat,
    f_bb: &[CMat],
    w_rf: &CMat,
    cfg: &SystemConfig,
) -> Result<Vec<CMat>> {
    check_channel_dims(channels, cfg)?;
    if w_rf.shape() != (cfg.n_rx, cfg.n_rf) {
        return Err(Error::DimensionMismatch(format!(
            "analog combiner is {}x{}, config wants {}x{}",
            w_rf.nrows(),
            w_rf.ncols(),
            cfg.n_rx,
            cfg.n_rf
        )));
    }
    let noise_gram = (w_rf.adjoint() * w_rf) * C64::new(cfg.noise_var, 0.0);
    let mut w_bb = Vec::with_capacity(cfg.n_subcarriers);
    for (k, (h, f_bb_k)) in channels.per_subcarrier.iter().zip(f_bb).enumerate() {
        let j_k = w_rf.adjoint() * h * f_rf * f_bb_k;
        let system = &j_k * j_k.adjoint() + &noise_gram;
        let chol = nalgebra::Cholesky::new(system)
            .ok_or(Error::SingularSystem { subcarrier: k })?;
        w_bb.push(chol.solve(&j_k));
    }
    Ok(w_bb)
}

/// Runs the full closed-form hybrid design: analog precoder, digital
/// precoders, analog combiner, digital combiners, in that order.
pub fn design_hybrid(channels: &ChannelRealization, cfg: &SystemConfig) -> Result<HybridBeamformer> {
    let (f_rf, _h_e) = design_analog_precoder(channels, cfg)?;
    let f_bb = design_digital_precoder(channels, &f_rf, cfg)?;
    let (w_rf, _t_e) = design_analog_combiner(channels, &f_rf, &f_bb, cfg)?;
    let w_bb = design_digital_combiner(channels, &f_rf, &f_bb, &w_rf, cfg)?;
    let bf = HybridBeamformer {
        f_rf,
        f_bb,
        w_rf,
        w_bb,
    };
    bf.validate(cfg)?;
    Ok(bf)
}

/// Designs the fully-digital baseline: per subcarrier, beamform along the
/// channel's leading `N_s` singular vectors with water-filled power over
/// the squared singular values.
pub fn design_digital_baseline(
    channels: &ChannelRealization,
    cfg: &SystemConfig,
) -> Result<DigitalBeamformer> {
    check_channel_dims(channels, cfg)?;
    let mut f = Vec::with_capacity(cfg.n_subcarriers);
    let mut w = Vec::with_capacity(cfg.n_subcarriers);
    let mut powers = Vec::with_capacity(cfg.n_subcarriers);
    for h in &channels.per_subcarrier {
        let svd = matkit::svd_thin(h)?;
        let gains: Vec<f64> = svd.singular_values[..cfg.n_streams]
            .iter()
            .map(|s| s * s)
            .collect();
        let p = matkit::waterfill(&gains, cfg.power_budget, cfg.noise_var)?;
        let mut f_k = svd.v.columns(0, cfg.n_streams).into_owned();
        for (i, &p_i) in p.iter().enumerate() {
            let scale = C64::new(p_i.sqrt(), 0.0);
            for row in 0..f_k.nrows() {
                f_k[(row, i)] *= scale;
            }
        }
        f.push(f_k);
        w.push(svd.u.columns(0, cfg.n_streams).into_owned());
        powers.push(p);
    }
    Ok(DigitalBeamformer { f, w, powers })
}

// ── Tests ──

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{self, ChannelParams};
    use crate::evaluate;
    use crate::matkit::qr_thin;
    use rand::Rng;

    fn test_params(k: usize) -> ChannelParams {
        ChannelParams {
            n_clusters: 3,
            n_rays: 4,
            angular_spread_rx: 10.0f64.to_radians(),
            angular_spread_tx: 10.0f64.to_radians(),
            antenna_spacing_over_wavelength: 0.5,
            n_subcarriers: k,
        }
    }

    fn cfg(n_tx: usize, n_rx: usize, n_rf: usize, n_s: usize, k: usize) -> SystemConfig {
        SystemConfig {
            n_tx,
            n_rx,
            n_rf,
            n_streams: n_s,
            n_subcarriers: k,
            power_budget: n_s as f64,
            noise_var: n_s as f64 / 10.0f64.powf(0.5), // 5 dB SNR
        }
    }

    fn draw_channel(cfg: &SystemConfig, seed: u64, realization: u64) -> ChannelRealization {
        let params = test_params(cfg.n_subcarriers);
        channel::generate_channel(
            &params,
            cfg.n_rx,
            cfg.n_tx,
            &mut channel::substream_rng(seed, realization),
        )
        .unwrap()
    }

    #[test]
    fn config_invariants_are_enforced() {
        assert!(cfg(8, 8, 2, 2, 4).validate().is_ok());
        let too_many_streams = cfg(8, 8, 2, 3, 4);
        let msg = too_many_streams.validate().unwrap_err().to_string();
        assert!(msg.contains("N_s ≤ N_RF"), "message was: {msg}");
        assert!(cfg(4, 8, 5, 2, 4).validate().is_err());
        assert!(
            SystemConfig { power_budget: 0.0, ..cfg(4, 4, 2, 2, 1) }
                .validate()
                .is_err()
        );
        assert!(
            SystemConfig { noise_var: -1.0, ..cfg(4, 4, 2, 2, 1) }
                .validate()
                .is_err()
        );
    }

    #[test]
    fn scalar_link_analog_precoder_is_unity() {
        let c = SystemConfig {
            power_budget: 1.0,
            noise_var: 1.0,
            ..cfg(1, 2, 1, 1, 1)
        };
        let ch = draw_channel(&c, 3, 0);
        let (f_rf, _) = design_analog_precoder(&ch, &c).unwrap();
        assert_eq!(f_rf.shape(), (1, 1));
        assert!((f_rf[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn diagonal_gram_projects_to_constant_phase_columns() {
        // A diagonal H (K=1) gives a diagonal H_e, so the leading
        // eigenvectors are basis vectors and every projected entry lands on
        // phase zero: F_RF is the all-(1/√N_t) matrix.
        let mut h = CMat::zeros(3, 3);
        h[(0, 0)] = C64::new(3.0, 0.0);
        h[(1, 1)] = C64::new(2.0, 0.0);
        h[(2, 2)] = C64::new(1.0, 0.0);
        let ch = ChannelRealization {
            per_subcarrier: vec![h],
        };
        let c = SystemConfig {
            power_budget: 2.0,
            noise_var: 1.0,
            ..cfg(3, 3, 2, 2, 1)
        };
        let (f_rf, h_e) = design_analog_precoder(&ch, &c).unwrap();
        for i in 0..3 {
            assert!((h_e[(i, i)].re - [9.0, 4.0, 1.0][i]).abs() < 1e-12);
        }
        let amp = 1.0 / 3.0f64.sqrt();
        for entry in f_rf.iter() {
            assert!((entry - C64::new(amp, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn eigenvector_solution_beats_random_subspaces() {
        let c = cfg(4, 4, 2, 2, 2);
        let ch = draw_channel(&c, 5, 0);
        let h_e = effective_channel_gram(&ch);
        let gamma_over_sigma2 = c.per_stream_power() / c.noise_var;

        let eig = matkit::hermitian_eig(&h_e).unwrap();
        let optimum: f64 = eig.values[..c.n_rf]
            .iter()
            .map(|l| (1.0 + gamma_over_sigma2 * l).log2())
            .sum();
        let v_star = matkit::partial_top_eigvectors(&h_e, c.n_rf).unwrap();
        let at_eigvecs =
            evaluate::capacity_objective(&h_e, &v_star, gamma_over_sigma2).unwrap();
        assert!((at_eigvecs - optimum).abs() < 1e-9);

        let mut rng = channel::substream_rng(77, 0);
        let best = evaluate::theorem1_random_search_oracle(
            &h_e,
            c.n_rf,
            gamma_over_sigma2,
            2000,
            &mut rng,
        )
        .unwrap();
        assert!(best <= optimum + 1e-9);
    }

    #[test]
    fn precoder_power_meets_budget_on_random_instances() {
        for seed in 0..5u64 {
            let c = cfg(8, 6, 3, 2, 4);
            let ch = draw_channel(&c, 100 + seed, 0);
            let bf = design_hybrid(&ch, &c).unwrap();
            bf.validate(&c).unwrap();
            for k in 0..c.n_subcarriers {
                let power = bf.precoder(k).norm().powi(2);
                assert!((power - c.power_budget).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn full_stream_digital_precoder_has_unitary_steering() {
        // N_s = N_RF: the steering factor V_k is square unitary, so
        // F_BB^H (F_RF^H F_RF) F_BB = γ·I.
        let c = cfg(6, 6, 3, 3, 2);
        let ch = draw_channel(&c, 9, 0);
        let (f_rf, _) = design_analog_precoder(&ch, &c).unwrap();
        let f_bb = design_digital_precoder(&ch, &f_rf, &c).unwrap();
        let gram = f_rf.adjoint() * &f_rf;
        let gamma = c.per_stream_power();
        for f_bb_k in &f_bb {
            let m = f_bb_k.adjoint() * &gram * f_bb_k;
            let target = CMat::identity(3, 3) * C64::new(gamma, 0.0);
            assert!((m - target).norm() < 1e-9);
        }
    }

    #[test]
    fn single_stream_precoder_beats_random_search() {
        let c = SystemConfig {
            power_budget: 1.0,
            noise_var: 0.5,
            ..cfg(4, 4, 2, 1, 1)
        };
        let ch = draw_channel(&c, 11, 0);
        let (f_rf, _) = design_analog_precoder(&ch, &c).unwrap();
        let f_bb = design_digital_precoder(&ch, &f_rf, &c).unwrap();
        let ours = evaluate::transmit_rate(
            &ch.per_subcarrier[0],
            &(&f_rf * &f_bb[0]),
            c.noise_var,
        )
        .unwrap();
        let mut rng = channel::substream_rng(13, 0);
        let best = evaluate::oracles::best_random_digital_precoder_rate(
            &ch.per_subcarrier[0],
            &f_rf,
            c.power_budget,
            c.noise_var,
            10_000,
            &mut rng,
        )
        .unwrap();
        assert!(ours >= best - 1e-6, "ours = {ours}, random best = {best}");
    }

    #[test]
    fn combiner_norm_scales_inversely_with_noise() {
        let base = cfg(6, 6, 2, 2, 2);
        let ch = draw_channel(&base, 15, 0);
        let (f_rf, _) = design_analog_precoder(&ch, &base).unwrap();
        let f_bb = design_digital_precoder(&ch, &f_rf, &base).unwrap();
        let (w_rf, _) = design_analog_combiner(&ch, &f_rf, &f_bb, &base).unwrap();
        let norm_at = |noise: f64| {
            let c = SystemConfig { noise_var: noise, ..base.clone() };
            let w_bb = design_digital_combiner(&ch, &f_rf, &f_bb, &w_rf, &c).unwrap();
            w_bb[0].norm()
        };
        // In the noise-dominated regime W_BB ≈ (1/σ²)(W^H W)^(−1) J.
        let ratio = norm_at(1e6) / norm_at(1e8);
        assert!((ratio - 100.0).abs() / 100.0 < 0.01, "ratio = {ratio}");
    }

    #[test]
    fn combiner_is_matched_filter_in_noiseless_limit() {
        let c = SystemConfig {
            noise_var: 1e-9,
            power_budget: 1.0,
            ..cfg(4, 2, 2, 1, 1)
        };
        let ch = draw_channel(&c, 17, 0);
        let (f_rf, _) = design_analog_precoder(&ch, &c).unwrap();
        let f_bb = design_digital_precoder(&ch, &f_rf, &c).unwrap();
        // Hand the combiner a scaled-unitary analog stage (2-point DFT),
        // which satisfies the unit-modulus constraint exactly.
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let w_rf = CMat::from_row_slice(
            2,
            2,
            &[
                C64::new(r, 0.0),
                C64::new(r, 0.0),
                C64::new(r, 0.0),
                C64::new(-r, 0.0),
            ],
        );
        let w_bb = design_digital_combiner(&ch, &f_rf, &f_bb, &w_rf, &c).unwrap();
        let j_k = w_rf.adjoint() * &ch.per_subcarrier[0] * &f_rf * &f_bb[0];
        let cosine = (w_bb[0].adjoint() * &j_k)[(0, 0)].norm()
            / (w_bb[0].norm() * j_k.norm());
        assert!((cosine - 1.0).abs() < 1e-6, "cosine = {cosine}");
    }

    #[test]
    fn mmse_combiner_beats_random_combiners() {
        let c = cfg(4, 4, 2, 2, 1);
        let ch = draw_channel(&c, 19, 0);
        let bf = design_hybrid(&ch, &c).unwrap();
        let ours = evaluate::spectral_efficiency(&ch, &bf, &c).unwrap();
        let mut rng = channel::substream_rng(23, 0);
        let best = evaluate::oracles::best_random_combiner_se(&ch, &bf, &c, 1000, &mut rng)
            .unwrap();
        assert!(ours >= best - 1e-6, "ours = {ours}, random best = {best}");
    }

    #[test]
    fn hybrid_design_is_bit_stable() {
        let c = cfg(8, 8, 2, 2, 4);
        let ch = draw_channel(&c, 29, 1);
        let a = design_hybrid(&ch, &c).unwrap();
        let b = design_hybrid(&ch, &c).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn degenerate_analog_stage_fails_power_validation() {
        // A diagonal channel has basis-vector eigendirections, and phase
        // projection maps every one of them to the same constant-phase
        // column: F_RF collapses to rank 1, the transmit power identity no
        // longer holds, and the design must refuse loudly rather than
        // return an off-budget precoder.
        let mut h = CMat::zeros(3, 3);
        h[(0, 0)] = C64::new(3.0, 0.0);
        h[(1, 1)] = C64::new(2.0, 0.0);
        h[(2, 2)] = C64::new(1.0, 0.0);
        let ch = ChannelRealization { per_subcarrier: vec![h] };
        let c = SystemConfig {
            power_budget: 2.0,
            noise_var: 1e-18,
            ..cfg(3, 3, 2, 2, 1)
        };
        match design_hybrid(&ch, &c) {
            Err(Error::InvalidArgument(msg)) => {
                assert!(msg.contains("power off budget"), "message was: {msg}");
            }
            other => panic!("expected a power-validation error, got {other:?}"),
        }
    }

    #[test]
    fn singular_mmse_system_is_reported_per_subcarrier() {
        // A zero analog combiner makes the MMSE normal matrix exactly zero
        // on every subcarrier, which must surface as a structured
        // singular-system error naming the subcarrier.
        let c = cfg(4, 4, 2, 2, 1);
        let ch = draw_channel(&c, 31, 0);
        let (f_rf, _) = design_analog_precoder(&ch, &c).unwrap();
        let f_bb = design_digital_precoder(&ch, &f_rf, &c).unwrap();
        let w_rf = CMat::zeros(c.n_rx, c.n_rf);
        match design_digital_combiner(&ch, &f_rf, &f_bb, &w_rf, &c) {
            Err(Error::SingularSystem { subcarrier: 0 }) => {}
            other => panic!("expected SingularSystem, got {other:?}"),
        }
    }

    #[test]
    fn bound_chain_holds_per_subcarrier() {
        // With γ = P_b/N_s: rate(F_k) ≤ log₂|I + (γ/σ²)Q_k^H Q_k|, and the
        // subcarrier average of the orthonormal-subspace rates is bounded
        // by the rate at the averaged Gram matrix (concavity of log-det).
        for seed in 0..8u64 {
            let c = cfg(6, 5, 3, 2, 4);
            let ch = draw_channel(&c, 200 + seed, 0);
            let (f_rf, h_e) = design_analog_precoder(&ch, &c).unwrap();
            let f_bb = design_digital_precoder(&ch, &f_rf, &c).unwrap();
            let whiten =
                matkit::inverse_sqrt_hermitian(&(f_rf.adjoint() * &f_rf)).unwrap();
            let gamma_over_sigma2 = c.per_stream_power() / c.noise_var;
            let (v_rf, _) = qr_thin(&f_rf);

            let mut subspace_rate_sum = 0.0;
            for (k, h) in ch.per_subcarrier.iter().enumerate() {
                let rate = evaluate::transmit_rate(h, &(&f_rf * &f_bb[k]), c.noise_var)
                    .unwrap();
                let q_k = h * &f_rf * &whiten;
                let q_bound = evaluate::capacity_objective(
                    &(h.adjoint() * h),
                    &qr_thin(&(&f_rf * &whiten)).0,
                    gamma_over_sigma2,
                )
                .unwrap();
                // Identical quantity computed from Q_k's Gram directly.
                let q_gram_bound = {
                    let gram = q_k.adjoint() * &q_k;
                    let eig = matkit::hermitian_eig(&gram).unwrap();
                    eig.values
                        .iter()
                        .map(|l| (1.0 + gamma_over_sigma2 * l).log2())
                        .sum::<f64>()
                };
                assert!((q_bound - q_gram_bound).abs() < 1e-8);
                assert!(rate <= q_bound + 1e-8);
                subspace_rate_sum += evaluate::capacity_objective(
                    &(h.adjoint() * h),
                    &v_rf,
                    gamma_over_sigma2,
                )
                .unwrap();
            }
            let jensen = evaluate::capacity_objective(&h_e, &v_rf, gamma_over_sigma2)
                .unwrap();
            assert!(subspace_rate_sum / c.n_subcarriers as f64 <= jensen + 1e-8);
        }
    }

    #[test]
    fn relaxation_is_tight_with_full_streams() {
        // N_s = N_RF: the per-subcarrier bound is achieved exactly.
        let c = cfg(6, 6, 3, 3, 3);
        let ch = draw_channel(&c, 31, 0);
        let (f_rf, _) = design_analog_precoder(&ch, &c).unwrap();
        let f_bb = design_digital_precoder(&ch, &f_rf, &c).unwrap();
        let whiten = matkit::inverse_sqrt_hermitian(&(f_rf.adjoint() * &f_rf)).unwrap();
        let gamma_over_sigma2 = c.per_stream_power() / c.noise_var;
        for (k, h) in ch.per_subcarrier.iter().enumerate() {
            let rate =
                evaluate::transmit_rate(h, &(&f_rf * &f_bb[k]), c.noise_var).unwrap();
            let q_k = h * &f_rf * &whiten;
            let gram = q_k.adjoint() * &q_k;
            let bound: f64 = matkit::hermitian_eig(&gram)
                .unwrap()
                .values
                .iter()
                .map(|l| (1.0 + gamma_over_sigma2 * l).log2())
                .sum();
            assert!((rate - bound).abs() < 1e-8, "k = {k}: {rate} vs {bound}");
        }
    }

    #[test]
    fn compressed_eigenvalues_interlace() {
        let c = cfg(6, 6, 2, 2, 2);
        let ch = draw_channel(&c, 37, 0);
        let h_e = effective_channel_gram(&ch);
        let outer = matkit::hermitian_eig(&h_e).unwrap();
        let mut rng = channel::substream_rng(41, 0);
        for _ in 0..200 {
            let v = matkit::random_orthonormal(6, c.n_rf, &mut rng);
            let inner = matkit::hermitian_eig(&(v.adjoint() * &h_e * &v)).unwrap();
            for i in 0..c.n_rf {
                assert!(inner.values[i] <= outer.values[i] + 1e-9);
            }
        }
    }

    #[test]
    fn baseline_rank_one_channel_uses_single_mode() {
        let mut rng = channel::substream_rng(43, 0);
        let x = matkit::random_gaussian_matrix(4, 1, &mut rng);
        let y = matkit::random_gaussian_matrix(4, 1, &mut rng);
        let h = &x * y.adjoint();
        let sigma1_sq = x.norm_squared() * y.norm_squared();
        let ch = ChannelRealization { per_subcarrier: vec![h] };
        let c = SystemConfig {
            power_budget: 2.0,
            noise_var: 0.5,
            ..cfg(4, 4, 1, 1, 1)
        };
        let db = design_digital_baseline(&ch, &c).unwrap();
        assert!((db.powers[0][0] - 2.0).abs() < 1e-12);
        let se = evaluate::spectral_efficiency_digital(&ch, &db, &c).unwrap();
        let expect = (1.0 + 2.0 * sigma1_sq / 0.5).log2();
        assert!((se - expect).abs() < 1e-9);
    }

    #[test]
    fn baseline_splits_power_across_equal_modes() {
        let h = CMat::identity(4, 4) * C64::new(3.0, 0.0);
        let ch = ChannelRealization { per_subcarrier: vec![h] };
        let c = SystemConfig {
            power_budget: 1.0,
            noise_var: 1.0,
            ..cfg(4, 4, 2, 2, 1)
        };
        let db = design_digital_baseline(&ch, &c).unwrap();
        assert!((db.powers[0][0] - 0.5).abs() < 1e-12);
        assert!((db.powers[0][1] - 0.5).abs() < 1e-12);
        assert!((db.f[0].norm().powi(2) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn baseline_matches_power_split_grid_search() {
        let c = SystemConfig {
            power_budget: 1.0,
            noise_var: 0.25,
            ..cfg(4, 4, 2, 2, 1)
        };
        let ch = draw_channel(&c, 47, 0);
        let db = design_digital_baseline(&ch, &c).unwrap();
        let se = evaluate::spectral_efficiency_digital(&ch, &db, &c).unwrap();

        let svd = matkit::svd_thin(&ch.per_subcarrier[0]).unwrap();
        let g: Vec<f64> = svd.singular_values[..2].iter().map(|s| s * s).collect();
        let mut best = f64::NEG_INFINITY;
        let steps = 20_000;
        for i in 0..=steps {
            let p0 = i as f64 / steps as f64;
            let val = (1.0 + p0 * g[0] / 0.25).log2()
                + (1.0 + (1.0 - p0) * g[1] / 0.25).log2();
            best = best.max(val);
        }
        assert!((se - best).abs() < 1e-4, "se = {se}, grid best = {best}");
    }

    #[test]
    fn digital_baseline_dominates_hybrid_on_average() {
        let c = cfg(8, 8, 2, 2, 4);
        let mut hybrid_sum = 0.0;
        let mut digital_sum = 0.0;
        for r in 0..20 {
            let ch = draw_channel(&c, 53, r);
            let bf = design_hybrid(&ch, &c).unwrap();
            let db = design_digital_baseline(&ch, &c).unwrap();
            hybrid_sum += evaluate::spectral_efficiency(&ch, &bf, &c).unwrap();
            digital_sum += evaluate::spectral_efficiency_digital(&ch, &db, &c).unwrap();
        }
        assert!(
            digital_sum >= hybrid_sum,
            "digital mean {} < hybrid mean {}",
            digital_sum / 20.0,
            hybrid_sum / 20.0
        );
    }

    #[test]
    fn unit_modulus_projection_handles_zero_entries() {
        let mut m = CMat::zeros(2, 1);
        m[(1, 0)] = C64::new(0.0, -2.0);
        let p = unit_modulus_projection(&m, 4);
        assert!((p[(0, 0)] - C64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((p[(1, 0)] - C64::new(0.0, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn random_unit_norm_vectors_have_unit_power() {
        // Sanity on the test helper used by the random-search oracles.
        let mut rng = channel::substream_rng(59, 0);
        for _ in 0..10 {
            let v = matkit::random_gaussian_matrix(5, 1, &mut rng);
            let n = v.norm();
            assert!(n > 0.0);
            let unit = v / C64::new(n, 0.0);
            assert!((unit.norm() - 1.0).abs() < 1e-12);
        }
        let _ = rng.gen::<u64>();
    }
}
