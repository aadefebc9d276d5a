//! Experiment-config parsing: flat `key=value` text with `#` comments.
//!
//! The format is strict by design — unknown keys, keys a mode does not
//! use, duplicates, and type mismatches are all hard errors naming the
//! offending key — so a config file documents exactly the experiment that
//! ran. Angles are written in degrees and SNR in dB; both convert once
//! here at the boundary.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::beamform::SystemConfig;
use crate::channel::ChannelParams;
use crate::complexity;
use crate::error::{Error, Result};
use crate::evaluate::{SweepAxis, SweepSpec};

/// Experiment mode selected by the `mode` key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// One operating point; prints both algorithms' SE.
    SingleShot,
    /// SE vs SNR sweep at fixed stream count.
    SweepSnr,
    /// SE vs stream count (`N_s = N_RF`) at fixed SNR.
    SweepStreams,
    /// FLOP-model scan over the array scale `L`.
    ComplexityScan,
}

impl Mode {
    fn as_str(self) -> &'static str {
        match self {
            Mode::SingleShot => "single_shot",
            Mode::SweepSnr => "sweep_snr",
            Mode::SweepStreams => "sweep_streams",
            Mode::ComplexityScan => "complexity_scan",
        }
    }
}

/// Link-level experiment setup shared by the non-scan modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSetup {
    /// System template (power/noise already resolved from the config SNR).
    pub system: SystemConfig,
    /// Channel geometry.
    pub channel: ChannelParams,
    /// Monte-Carlo realizations per grid point.
    pub n_realizations: usize,
    /// Master seed for the per-realization substreams.
    pub seed: u64,
}

/// Mode-specific experiment payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Experiment {
    /// One operating point.
    SingleShot {
        /// Link setup.
        link: LinkSetup,
        /// Operating SNR in dB.
        snr_db: f64,
    },
    /// SE vs SNR.
    SweepSnr {
        /// Link setup (template).
        link: LinkSetup,
        /// SNR grid in dB.
        snr_db_grid: Vec<f64>,
    },
    /// SE vs stream count.
    SweepStreams {
        /// Link setup (template; `n_rf`/`n_streams` taken per grid point).
        link: LinkSetup,
        /// Stream-count grid.
        n_streams_grid: Vec<usize>,
        /// Operating SNR in dB, shared by all grid points.
        snr_db: f64,
    },
    /// FLOP-model scan.
    ComplexityScan {
        /// Largest array scale `L` (antennas `N = 8L`).
        l_max: usize,
        /// Power-method iteration count for the fast reference variant.
        n_iter: usize,
    },
}

/// A fully parsed and validated experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// What to run. Flattened so the echoed JSON reads `{"mode": ..., ...}`.
    #[serde(flatten)]
    pub experiment: Experiment,
    /// Output directory for CSV/JSON artifacts, if any.
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// The config's mode.
    pub fn mode(&self) -> Mode {
        match &self.experiment {
            Experiment::SingleShot { .. } => Mode::SingleShot,
            Experiment::SweepSnr { .. } => Mode::SweepSnr,
            Experiment::SweepStreams { .. } => Mode::SweepStreams,
            Experiment::ComplexityScan { .. } => Mode::ComplexityScan,
        }
    }

    /// The link setup, for modes that have one.
    pub fn link(&self) -> Option<&LinkSetup> {
        match &self.experiment {
            Experiment::SingleShot { link, .. }
            | Experiment::SweepSnr { link, .. }
            | Experiment::SweepStreams { link, .. } => Some(link),
            Experiment::ComplexityScan { .. } => None,
        }
    }

    fn link_mut(&mut self) -> Option<&mut LinkSetup> {
        match &mut self.experiment {
            Experiment::SingleShot { link, .. }
            | Experiment::SweepSnr { link, .. }
            | Experiment::SweepStreams { link, .. } => Some(link),
            Experiment::ComplexityScan { .. } => None,
        }
    }

    /// Applies command-line overrides onto the parsed config so the echoed
    /// metadata reflects what actually ran.
    pub fn apply_overrides(
        &mut self,
        seed: Option<u64>,
        n_realizations: Option<usize>,
        out_dir: Option<PathBuf>,
    ) -> Result<()> {
        if let Some(dir) = out_dir {
            self.out_dir = Some(dir);
        }
        if seed.is_some() || n_realizations.is_some() {
            let mode = self.mode();
            let link = self.link_mut().ok_or_else(|| {
                Error::Config(format!(
                    "seed/realizations overrides do not apply to mode {}",
                    mode.as_str()
                ))
            })?;
            if let Some(s) = seed {
                link.seed = s;
            }
            if let Some(n) = n_realizations {
                if n < 1 {
                    return Err(Error::Config(
                        "realizations override must be at least 1".into(),
                    ));
                }
                link.n_realizations = n;
            }
        }
        Ok(())
    }

    /// Builds the sweep the config describes; `None` for the complexity
    /// scan, which is not a Monte-Carlo experiment.
    pub fn to_sweep_spec(&self) -> Result<Option<SweepSpec>> {
        let spec = match &self.experiment {
            Experiment::SingleShot { link, snr_db } => Some(SweepSpec {
                cfg: link.system.clone(),
                axis: SweepAxis::SnrDb,
                grid: vec![*snr_db],
                n_realizations: link.n_realizations,
                channel_params: link.channel.clone(),
                master_seed: link.seed,
            }),
            Experiment::SweepSnr { link, snr_db_grid } => Some(SweepSpec {
                cfg: link.system.clone(),
                axis: SweepAxis::SnrDb,
                grid: snr_db_grid.clone(),
                n_realizations: link.n_realizations,
                channel_params: link.channel.clone(),
                master_seed: link.seed,
            }),
            Experiment::SweepStreams {
                link,
                n_streams_grid,
                ..
            } => Some(SweepSpec {
                cfg: link.system.clone(),
                axis: SweepAxis::NStreams,
                grid: n_streams_grid.iter().map(|&n| n as f64).collect(),
                n_realizations: link.n_realizations,
                channel_params: link.channel.clone(),
                master_seed: link.seed,
            }),
            Experiment::ComplexityScan { .. } => None,
        };
        if let Some(spec) = &spec {
            spec.validate()?;
        }
        Ok(spec)
    }
}

// ── Parser ──

/// Every key the format recognizes, across all modes.
const KNOWN_KEYS: &[&str] = &[
    "mode",
    "n_tx",
    "n_rx",
    "n_rf",
    "n_streams",
    "n_subcarriers",
    "snr_db",
    "snr_db_grid",
    "n_streams_grid",
    "n_clusters",
    "n_rays",
    "angular_spread_rx_deg",
    "angular_spread_tx_deg",
    "antenna_spacing_over_wavelength",
    "n_realizations",
    "seed",
    "out_dir",
    "l_max",
    "n_iter",
];

struct KeyValues(BTreeMap<String, String>);

impl KeyValues {
    fn from_text(source: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (idx, raw_line) in source.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw_line.split_once('#') {
                Some((before, _comment)) => before,
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "line {line_no}: expected `key = value`, got `{}`",
                    line
                )));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Error::Config(format!("unknown key `{key}` (line {line_no})")));
            }
            if map.insert(key.clone(), value).is_some() {
                return Err(Error::Config(format!(
                    "duplicate key `{key}` (line {line_no})"
                )));
            }
        }
        Ok(KeyValues(map))
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.0.remove(key)
    }

    fn require(&mut self, key: &str, mode: Mode) -> Result<String> {
        self.take(key).ok_or_else(|| {
            Error::Config(format!(
                "missing required key `{key}` for mode {}",
                mode.as_str()
            ))
        })
    }

    fn finish(self, mode: Mode) -> Result<()> {
        if let Some(key) = self.0.into_keys().next() {
            return Err(Error::Config(format!(
                "key `{key}` is not used in mode {}",
                mode.as_str()
            )));
        }
        Ok(())
    }
}

fn parse_count(key: &str, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| {
            Error::Config(format!(
                "invalid value for `{key}`: expected a positive integer, got `{value}`"
            ))
        })
}

fn parse_u64(key: &str, value: &str) -> Result<u64> {
    value.parse::<u64>().map_err(|_| {
        Error::Config(format!(
            "invalid value for `{key}`: expected a nonnegative integer, got `{value}`"
        ))
    })
}

fn parse_real(key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| {
            Error::Config(format!(
                "invalid value for `{key}`: expected a finite number, got `{value}`"
            ))
        })
}

fn parse_real_list(key: &str, value: &str) -> Result<Vec<f64>> {
    let items: Vec<f64> = value
        .split(',')
        .map(|tok| parse_real(key, tok.trim()))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::Config(format!("`{key}` must not be empty")));
    }
    Ok(items)
}

fn parse_count_list(key: &str, value: &str) -> Result<Vec<usize>> {
    let items: Vec<usize> = value
        .split(',')
        .map(|tok| parse_count(key, tok.trim()))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::Config(format!("`{key}` must not be empty")));
    }
    Ok(items)
}

struct ChannelKeys {
    n_clusters: usize,
    n_rays: usize,
    spread_rx_deg: f64,
    spread_tx_deg: f64,
    spacing: f64,
}

fn take_channel_keys(kv: &mut KeyValues) -> Result<ChannelKeys> {
    let mut keys = ChannelKeys {
        n_clusters: 5,
        n_rays: 10,
        spread_rx_deg: 10.0,
        spread_tx_deg: 10.0,
        spacing: 0.5,
    };
    if let Some(v) = kv.take("n_clusters") {
        keys.n_clusters = parse_count("n_clusters", &v)?;
    }
    if let Some(v) = kv.take("n_rays") {
        keys.n_rays = parse_count("n_rays", &v)?;
    }
    if let Some(v) = kv.take("angular_spread_rx_deg") {
        keys.spread_rx_deg = parse_real("angular_spread_rx_deg", &v)?;
    }
    if let Some(v) = kv.take("angular_spread_tx_deg") {
        keys.spread_tx_deg = parse_real("angular_spread_tx_deg", &v)?;
    }
    if let Some(v) = kv.take("antenna_spacing_over_wavelength") {
        keys.spacing = parse_real("antenna_spacing_over_wavelength", &v)?;
    }
    Ok(keys)
}

struct LinkKeys {
    n_tx: usize,
    n_rx: usize,
    n_rf: usize,
    n_streams: usize,
    n_subcarriers: usize,
    channel: ChannelKeys,
    n_realizations: usize,
    seed: u64,
}

fn take_link_keys(kv: &mut KeyValues, mode: Mode, chains_required: bool) -> Result<LinkKeys> {
    let n_tx = parse_count("n_tx", &kv.require("n_tx", mode)?)?;
    let n_rx = parse_count("n_rx", &kv.require("n_rx", mode)?)?;
    let n_subcarriers = parse_count("n_subcarriers", &kv.require("n_subcarriers", mode)?)?;
    let (n_rf, n_streams) = if chains_required {
        (
            parse_count("n_rf", &kv.require("n_rf", mode)?)?,
            parse_count("n_streams", &kv.require("n_streams", mode)?)?,
        )
    } else {
        // Stream sweeps set N_s = N_RF per grid point; the template values
        // only need to be valid placeholders.
        (
            kv.take("n_rf").map(|v| parse_count("n_rf", &v)).transpose()?.unwrap_or(1),
            kv.take("n_streams")
                .map(|v| parse_count("n_streams", &v))
                .transpose()?
                .unwrap_or(1),
        )
    };
    let channel = take_channel_keys(kv)?;
    let n_realizations = kv
        .take("n_realizations")
        .map(|v| parse_count("n_realizations", &v))
        .transpose()?
        .unwrap_or(100);
    let seed = kv
        .take("seed")
        .map(|v| parse_u64("seed", &v))
        .transpose()?
        .unwrap_or(0);
    Ok(LinkKeys {
        n_tx,
        n_rx,
        n_rf,
        n_streams,
        n_subcarriers,
        channel,
        n_realizations,
        seed,
    })
}

fn build_link(keys: LinkKeys, snr_db: f64) -> Result<LinkSetup> {
    // Power normalization: P_b = N_s and σ_n² = N_s/SNR keep per-stream
    // power at 1 while preserving the configured SNR = P_b/σ_n².
    let snr_linear = 10.0f64.powf(snr_db / 10.0);
    let power_budget = keys.n_streams as f64;
    let system = SystemConfig {
        n_tx: keys.n_tx,
        n_rx: keys.n_rx,
        n_rf: keys.n_rf,
        n_streams: keys.n_streams,
        n_subcarriers: keys.n_subcarriers,
        power_budget,
        noise_var: power_budget / snr_linear,
    };
    system.validate().map_err(|e| Error::Config(e.to_string()))?;
    let channel = ChannelParams {
        n_clusters: keys.channel.n_clusters,
        n_rays: keys.channel.n_rays,
        angular_spread_rx: keys.channel.spread_rx_deg.to_radians(),
        angular_spread_tx: keys.channel.spread_tx_deg.to_radians(),
        antenna_spacing_over_wavelength: keys.channel.spacing,
        n_subcarriers: keys.n_subcarriers,
    };
    channel.validate().map_err(|e| Error::Config(e.to_string()))?;
    Ok(LinkSetup {
        system,
        channel,
        n_realizations: keys.n_realizations,
        seed: keys.seed,
    })
}

/// Parses and fully validates a config from `key = value` text.
pub fn parse_config(source: &str) -> Result<ExperimentConfig> {
    let mut kv = KeyValues::from_text(source)?;
    let mode_value = kv
        .take("mode")
        .ok_or_else(|| Error::Config("missing required key `mode`".into()))?;
    let mode = match mode_value.as_str() {
        "single_shot" => Mode::SingleShot,
        "sweep_snr" => Mode::SweepSnr,
        "sweep_streams" => Mode::SweepStreams,
        "complexity_scan" => Mode::ComplexityScan,
        other => {
            return Err(Error::Config(format!(
                "invalid value for `mode`: `{other}` (expected single_shot, sweep_snr, \
                 sweep_streams, or complexity_scan)"
            )))
        }
    };

    let out_dir = kv.take("out_dir").map(PathBuf::from);

    let experiment = match mode {
        Mode::SingleShot => {
            let snr_db = parse_real("snr_db", &kv.require("snr_db", mode)?)?;
            let keys = take_link_keys(&mut kv, mode, true)?;
            Experiment::SingleShot {
                link: build_link(keys, snr_db)?,
                snr_db,
            }
        }
        Mode::SweepSnr => {
            let grid = parse_real_list("snr_db_grid", &kv.require("snr_db_grid", mode)?)?;
            let keys = take_link_keys(&mut kv, mode, true)?;
            // The template's own operating point is the first grid value;
            // each sweep point re-derives power and noise anyway.
            Experiment::SweepSnr {
                link: build_link(keys, grid[0])?,
                snr_db_grid: grid,
            }
        }
        Mode::SweepStreams => {
            let snr_db = parse_real("snr_db", &kv.require("snr_db", mode)?)?;
            let grid = parse_count_list("n_streams_grid", &kv.require("n_streams_grid", mode)?)?;
            let keys = take_link_keys(&mut kv, mode, false)?;
            Experiment::SweepStreams {
                link: build_link(keys, snr_db)?,
                n_streams_grid: grid,
                snr_db,
            }
        }
        Mode::ComplexityScan => {
            let l_max = kv
                .take("l_max")
                .map(|v| parse_count("l_max", &v))
                .transpose()?
                .unwrap_or(31);
            let n_iter = kv
                .take("n_iter")
                .map(|v| parse_count("n_iter", &v))
                .transpose()?
                .unwrap_or(complexity::DEFAULT_N_ITER);
            Experiment::ComplexityScan { l_max, n_iter }
        }
    };
    kv.finish(mode)?;

    let config = ExperimentConfig { experiment, out_dir };
    // Sweep-level validation (grid/config interplay) runs here so a bad
    // config never reaches the compute stage.
    config.to_sweep_spec().map_err(|e| match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    })?;
    Ok(config)
}

// ── Tests ──
