//! Frequency-selective mmWave channel synthesis: clustered multipath
//! geometry (uniform linear arrays at both ends), per-subcarrier channel
//! matrices, and a plain-text dump format for golden-file tests.
//!
//! A channel draw happens in two stages so tests can pin either one:
//!
//! 1. [`sample_paths`] draws the random geometry — cluster mean angles,
//!    per-ray Laplacian angle offsets, complex ray gains — into a
//!    [`PathSet`].
//! 2. [`realize_channel`] deterministically expands a [`PathSet`] into the
//!    `K` per-subcarrier matrices of a [`ChannelRealization`], one delay
//!    tap per cluster.
//!
//! Reproducibility: every Monte-Carlo realization draws from its own
//! counter-based substream keyed by `(master_seed, realization)`; see
//! [`substream_rng`].

use std::io::{BufRead, Write};
use std::path::Path;

use nalgebra::Complex;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matkit::{C64, CMat, CVec};

/// Geometry and size parameters of the clustered channel model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Number of scattering clusters.
    pub n_clusters: usize,
    /// Rays per cluster.
    pub n_rays: usize,
    /// Standard deviation of the per-ray angle-of-arrival offset, radians.
    pub angular_spread_rx: f64,
    /// Standard deviation of the per-ray angle-of-departure offset, radians.
    pub angular_spread_tx: f64,
    /// Antenna element spacing in wavelengths (d/λ), same at both ends.
    pub antenna_spacing_over_wavelength: f64,
    /// Number of OFDM subcarriers.
    pub n_subcarriers: usize,
}

impl ChannelParams {
    /// Checks the structural invariants of the parameter set.
    pub fn validate(&self) -> Result<()> {
        if self.n_clusters < 1 {
            return Err(Error::InvalidArgument(
                "channel needs at least one cluster".into(),
            ));
        }
        if self.n_rays < 1 {
            return Err(Error::InvalidArgument(
                "channel needs at least one ray per cluster".into(),
            ));
        }
        if self.n_subcarriers < 1 {
            return Err(Error::InvalidArgument(
                "channel needs at least one subcarrier".into(),
            ));
        }
        if !(self.angular_spread_rx.is_finite() && self.angular_spread_rx >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "receive angular spread must be finite and nonnegative, got {}",
                self.angular_spread_rx
            )));
        }
        if !(self.angular_spread_tx.is_finite() && self.angular_spread_tx >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "transmit angular spread must be finite and nonnegative, got {}",
                self.angular_spread_tx
            )));
        }
        if !(self.antenna_spacing_over_wavelength.is_finite()
            && self.antenna_spacing_over_wavelength > 0.0)
        {
            return Err(Error::InvalidArgument(format!(
                "antenna spacing must be positive and finite, got {}",
                self.antenna_spacing_over_wavelength
            )));
        }
        Ok(())
    }

    /// Total number of propagation paths (`n_clusters × n_rays`).
    pub fn n_paths(&self) -> usize {
        self.n_clusters * self.n_rays
    }
}

/// One random draw of multipath geometry: per-ray gains and angles plus the
/// cluster mean angles they scatter around. Paths are stored row-major by
/// cluster: path index `p = c·n_rays + ℓ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    /// Complex ray gains, unit variance, length `n_clusters × n_rays`.
    pub gains: Vec<C64>,
    /// Per-ray angles of arrival, radians in `[0, 2π)`.
    pub aoa: Vec<f64>,
    /// Per-ray angles of departure, radians in `[0, 2π)`.
    pub aod: Vec<f64>,
    /// Cluster mean angles of arrival, length `n_clusters`.
    pub cluster_aoa: Vec<f64>,
    /// Cluster mean angles of departure, length `n_clusters`.
    pub cluster_aod: Vec<f64>,
}

/// The `K` per-subcarrier channel matrices of one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// `H_k` for `k = 1..K`, each `n_rx × n_tx`.
    pub per_subcarrier: Vec<CMat>,
}

impl ChannelRealization {
    /// Number of subcarriers.
    pub fn n_subcarriers(&self) -> usize {
        self.per_subcarrier.len()
    }

    /// Receive-antenna count (rows of each `H_k`).
    pub fn n_rx(&self) -> usize {
        self.per_subcarrier.first().map_or(0, |h| h.nrows())
    }

    /// Transmit-antenna count (columns of each `H_k`).
    pub fn n_tx(&self) -> usize {
        self.per_subcarrier.first().map_or(0, |h| h.ncols())
    }
}

/// Unit-norm steering vector of an `n`-element uniform linear array:
/// entry `m` (0-based) is `(1/√n)·exp(−j·2π·(d/λ)·m·sin θ)`.
pub fn steering_vector(theta: f64, n: usize, spacing_over_wavelength: f64) -> Result<CVec> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "steering vector needs at least one antenna element".into(),
        ));
    }
    let amplitude = 1.0 / (n as f64).sqrt();
    let step = -2.0 * std::f64::consts::PI * spacing_over_wavelength * theta.sin();
    Ok(CVec::from_fn(n, |m, _| {
        Complex::from_polar(amplitude, step * m as f64)
    }))
}

/// Inverse-CDF draw from a zero-mean Laplacian with the given scale.
/// `scale = 0` degenerates to a point mass at zero.
fn laplacian_deviate<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.gen();
    let centered = u - 0.5;
    // Clamp keeps ln() finite at the distribution tails (u → 0 or 1).
    let tail = (1.0 - 2.0 * centered.abs()).max(f64::MIN_POSITIVE);
    -scale * centered.signum() * tail.ln()
}

fn wrap_angle(theta: f64) -> f64 {
    theta.rem_euclid(2.0 * std::f64::consts::PI)
}

/// Draws the random multipath geometry for one channel realization.
///
/// Cluster mean angles are i.i.d. uniform on `[0, 2π)`; each ray offsets
/// its cluster mean by a Laplacian deviate with scale `spread/√2` (so the
/// offset's standard deviation equals the configured angular spread),
/// wrapped back into `[0, 2π)`; ray gains are i.i.d. circularly-symmetric
/// complex Gaussian with unit variance.
///
/// The RNG draw order is fixed (per cluster: mean AoA, mean AoD, then per
/// ray: AoA offset, AoD offset, gain real part, gain imaginary part) so a
/// seeded stream reproduces the identical `PathSet`.
pub fn sample_paths<R: Rng + ?Sized>(params: &ChannelParams, rng: &mut R) -> PathSet {
    let two_pi = 2.0 * std::f64::consts::PI;
    let n_paths = params.n_paths();
    let scale_rx = params.angular_spread_rx * std::f64::consts::FRAC_1_SQRT_2;
    let scale_tx = params.angular_spread_tx * std::f64::consts::FRAC_1_SQRT_2;
    let gain_scale = std::f64::consts::FRAC_1_SQRT_2;

    let mut gains = Vec::with_capacity(n_paths);
    let mut aoa = Vec::with_capacity(n_paths);
    let mut aod = Vec::with_capacity(n_paths);
    let mut cluster_aoa = Vec::with_capacity(params.n_clusters);
    let mut cluster_aod = Vec::with_capacity(params.n_clusters);

    for _ in 0..params.n_clusters {
        let mean_aoa = rng.gen::<f64>() * two_pi;
        let mean_aod = rng.gen::<f64>() * two_pi;
        cluster_aoa.push(mean_aoa);
        cluster_aod.push(mean_aod);
        for _ in 0..params.n_rays {
            aoa.push(wrap_angle(mean_aoa + laplacian_deviate(scale_rx, rng)));
            aod.push(wrap_angle(mean_aod + laplacian_deviate(scale_tx, rng)));
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            gains.push(C64::new(re * gain_scale, im * gain_scale));
        }
    }

    PathSet {
        gains,
        aoa,
        aod,
        cluster_aoa,
        cluster_aod,
    }
}

/// Expands a [`PathSet`] into per-subcarrier channel matrices:
///
/// `H_k = √(n_rx·n_tx/(N_cl·N_ray)) · Σ_c Σ_ℓ α_{c,ℓ} · a_r(θʳ_{c,ℓ}) ·
/// a_t^H(θᵗ_{c,ℓ}) · exp(−j·2π·c·(k−1)/K)`
///
/// with the cluster index `c` running from 0 — each cluster is one delay
/// tap, so a single cluster yields a frequency-flat channel.
pub fn realize_channel(
    params: &ChannelParams,
    paths: &PathSet,
    n_rx: usize,
    n_tx: usize,
) -> Result<ChannelRealization> {
    params.validate()?;
    if n_rx < 1 || n_tx < 1 {
        return Err(Error::InvalidArgument(format!(
            "antenna counts must be at least 1, got {n_rx}x{n_tx}"
        )));
    }
    let n_paths = params.n_paths();
    if paths.gains.len() != n_paths
        || paths.aoa.len() != n_paths
        || paths.aod.len() != n_paths
        || paths.cluster_aoa.len() != params.n_clusters
        || paths.cluster_aod.len() != params.n_clusters
    {
        return Err(Error::DimensionMismatch(format!(
            "path set does not match channel params: expected {} paths over {} clusters",
            n_paths, params.n_clusters
        )));
    }

    let spacing = params.antenna_spacing_over_wavelength;
    let k_total = params.n_subcarriers;
    let scale = C64::new((n_rx as f64 * n_tx as f64 / n_paths as f64).sqrt(), 0.0);

    // One partial sum of gain-weighted outer products per cluster; each H_k
    // is then a phase-weighted combination of these N_cl matrices.
    let mut cluster_sums: Vec<CMat> = Vec::with_capacity(params.n_clusters);
    for c in 0..params.n_clusters {
        let mut sum = CMat::zeros(n_rx, n_tx);
        for ray in 0..params.n_rays {
            let p = c * params.n_rays + ray;
            let a_r = steering_vector(paths.aoa[p], n_rx, spacing)?;
            let a_t = steering_vector(paths.aod[p], n_tx, spacing)?;
            let gain = paths.gains[p];
            for j in 0..n_tx {
                let coeff = gain * a_t[j].conj();
                for i in 0..n_rx {
                    sum[(i, j)] += a_r[i] * coeff;
                }
            }
        }
        cluster_sums.push(sum);
    }

    let mut per_subcarrier = Vec::with_capacity(k_total);
    for k in 1..=k_total {
        let mut h = CMat::zeros(n_rx, n_tx);
        for (c, sum) in cluster_sums.iter().enumerate() {
            let phase = Complex::from_polar(
                1.0,
                -2.0 * std::f64::consts::PI * c as f64 * (k - 1) as f64 / k_total as f64,
            );
            let weight = scale * phase;
            for i in 0..n_rx {
                for j in 0..n_tx {
                    h[(i, j)] += weight * sum[(i, j)];
                }
            }
        }
        per_subcarrier.push(h);
    }
    Ok(ChannelRealization { per_subcarrier })
}

/// Draws a complete channel realization: [`sample_paths`] followed by
/// [`realize_channel`].
pub fn generate_channel<R: Rng + ?Sized>(
    params: &ChannelParams,
    n_rx: usize,
    n_tx: usize,
    rng: &mut R,
) -> Result<ChannelRealization> {
    let paths = sample_paths(params, rng);
    realize_channel(params, &paths, n_rx, n_tx)
}

/// Counter-based RNG substream for one Monte-Carlo realization.
///
/// All realizations share the master seed but select disjoint cipher
/// streams, so they are mutually independent, individually reproducible,
/// and safe to generate concurrently.
pub fn substream_rng(master_seed: u64, realization: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(realization);
    rng
}

// ── Text dump (golden-file interchange) ──

/// Writes a realization as plain text: a `n_rx n_tx K` header line, then
/// `K` blank-line-separated blocks of `n_rx` rows, each row holding `n_tx`
/// space-separated `re,im` pairs. Floats use the shortest representation
/// that round-trips, so a dump/read cycle is bit-exact.
pub fn write_channel_dump<W: Write>(out: &mut W, ch: &ChannelRealization) -> Result<()> {
    let (n_rx, n_tx, k_total) = (ch.n_rx(), ch.n_tx(), ch.n_subcarriers());
    writeln!(out, "{n_rx} {n_tx} {k_total}")?;
    for (k, h) in ch.per_subcarrier.iter().enumerate() {
        if k > 0 {
            writeln!(out)?;
        }
        for i in 0..n_rx {
            let row: Vec<String> = (0..n_tx)
                .map(|j| format!("{},{}", h[(i, j)].re, h[(i, j)].im))
                .collect();
            writeln!(out, "{}", row.join(" "))?;
        }
    }
    Ok(())
}

/// Writes a channel dump to a file path.
pub fn write_channel_dump_file<P: AsRef<Path>>(path: P, ch: &ChannelRealization) -> Result<()> {
    let mut buf = Vec::new();
    write_channel_dump(&mut buf, ch)?;
    crate::output::atomic_write(path.as_ref(), &buf)
}

/// Parses the dump format produced by [`write_channel_dump`].
pub fn read_channel_dump<R: BufRead>(input: R) -> Result<ChannelRealization> {
    let bad = |line_no: usize, what: &str| {
        Error::InvalidArgument(format!("channel dump line {line_no}: {what}"))
    };
    let mut lines = input.lines().enumerate();

    let (header_no, header) = loop {
        match lines.next() {
            Some((no, line)) => {
                let line = line?;
                if !line.trim().is_empty() {
                    break (no + 1, line);
                }
            }
            None => return Err(Error::InvalidArgument("channel dump is empty".into())),
        }
    };
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|tok| tok.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad(header_no, "expected header `n_rx n_tx K`"))?;
    let [n_rx, n_tx, k_total] = dims[..] else {
        return Err(bad(header_no, "expected exactly three header fields"));
    };
    if n_rx < 1 || n_tx < 1 || k_total < 1 {
        return Err(bad(header_no, "header dimensions must be positive"));
    }

    let mut per_subcarrier = Vec::with_capacity(k_total);
    let mut current = CMat::zeros(n_rx, n_tx);
    let mut row = 0usize;
    for (no, line) in &mut lines {
        let line = line?;
        let line_no = no + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if per_subcarrier.len() == k_total {
            return Err(bad(line_no, "trailing data after the final subcarrier block"));
        }
        let entries: Vec<&str> = trimmed.split_whitespace().collect();
        if entries.len() != n_tx {
            return Err(bad(
                line_no,
                &format!("expected {n_tx} entries, found {}", entries.len()),
            ));
        }
        for (j, pair) in entries.iter().enumerate() {
            let (re, im) = pair
                .split_once(',')
                .ok_or_else(|| bad(line_no, "entries must be `re,im` pairs"))?;
            let re: f64 = re
                .parse()
                .map_err(|_| bad(line_no, "unparseable real part"))?;
            let im: f64 = im
                .parse()
                .map_err(|_| bad(line_no, "unparseable imaginary part"))?;
            current[(row, j)] = C64::new(re, im);
        }
        row += 1;
        if row == n_rx {
            per_subcarrier.push(std::mem::replace(&mut current, CMat::zeros(n_rx, n_tx)));
            row = 0;
        }
    }
    if row != 0 || per_subcarrier.len() != k_total {
        return Err(Error::InvalidArgument(format!(
            "channel dump truncated: read {} of {k_total} subcarrier blocks",
            per_subcarrier.len()
        )));
    }
    Ok(ChannelRealization { per_subcarrier })
}

/// Reads a channel dump from a file path.
pub fn read_channel_dump_file<P: AsRef<Path>>(path: P) -> Result<ChannelRealization> {
    let file = std::fs::File::open(path)?;
    read_channel_dump(std::io::BufReader::new(file))
}

// ── Tests ──
