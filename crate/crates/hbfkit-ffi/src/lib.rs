//! C ABI for the hybrid-beamforming library.
//!
//! # Conventions
//!
//! - Every fallible call returns an [`HbfStatus`]; `HBF_STATUS_OK` is zero.
//!   On failure a human-readable message is stored per thread and can be
//!   fetched with [`hbf_last_error_message`].
//! - Objects cross the boundary as opaque handles created by `*_new` /
//!   `hbf_channel_generate` / `hbf_design_hybrid` and released by the
//!   matching `*_free`. Handles are immutable after creation, so sharing
//!   them across threads for concurrent reads is safe; freeing a handle
//!   twice or using it after free is undefined behavior, as in any C API.
//! - Complex matrices move through flat `double` buffers holding
//!   interleaved real/imaginary parts in row-major order:
//!   `buffer[2*(r*cols + c)]` is `Re(A[r][c])` and the following element
//!   its imaginary part. Buffer lengths are always checked.
//! - A Rust panic never unwinds across the boundary; it is caught and
//!   reported as `HBF_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;

use hbfkit::beamform::{design_digital_baseline, design_hybrid, SystemConfig};
use hbfkit::channel::{generate_channel, substream_rng, ChannelParams, ChannelRealization};
use hbfkit::complexity::{flops, reduction_vs_lsaa, Algorithm, FlopModel};
use hbfkit::error::Error;
use hbfkit::evaluate::{spectral_efficiency, spectral_efficiency_digital};
use hbfkit::matkit::{C64, CMat};
use hbfkit::HybridBeamformer;

// ── Status codes and error reporting ──

/// Result of a fallible API call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum HbfStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument or configuration was rejected.
    InvalidArgument = 2,
    /// A numerical routine failed on the given data.
    NumericFailure = 3,
    /// An internal invariant was violated; the library caught a panic.
    Panic = 4,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> HbfStatus {
    match err {
        Error::Realization { source, .. } => status_of(source),
        Error::NonFinite { .. }
        | Error::DimensionMismatch(_)
        | Error::InvalidArgument(_)
        | Error::Config(_)
        | Error::Io(_) => HbfStatus::InvalidArgument,
        Error::NotHermitian { .. }
        | Error::NotPositiveDefinite { .. }
        | Error::AllZeroGains
        | Error::SingularSystem { .. }
        | Error::NonFiniteRate { .. }
        | Error::Numeric(_) => HbfStatus::NumericFailure,
    }
}

/// Runs an entry-point body, translating errors and panics into statuses.
fn entry<F: FnOnce() -> Result<(), Error>>(body: F) -> HbfStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => HbfStatus::Ok,
        Ok(Err(err)) => {
            set_last_error(&err.to_string());
            status_of(&err)
        }
        Err(_) => {
            set_last_error("internal panic; this is a library bug");
            HbfStatus::Panic
        }
    }
}

fn null_pointer(what: &str) -> HbfStatus {
    set_last_error(&format!("{what} must not be null"));
    HbfStatus::NullPointer
}

/// Returns the message for the most recent failure on the calling thread,
/// or an empty string if none occurred. The pointer stays valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hbf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Returns the library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hbf_version() -> *const c_char {
    static VERSION: OnceLock<CString> = OnceLock::new();
    VERSION
        .get_or_init(|| CString::new(hbfkit::output::VERSION).unwrap_or_default())
        .as_ptr()
}

// ── Opaque handles ──

/// System dimensions plus power and noise levels (opaque).
pub struct HbfSystemConfig(SystemConfig);

/// One multipath channel realization across all subcarriers (opaque).
pub struct HbfChannel(ChannelRealization);

/// A designed hybrid beamformer: analog and digital stages for both link
/// ends (opaque).
pub struct HbfBeamformer(HybridBeamformer);

// ── Buffer helpers ──

unsafe fn write_matrix(m: &CMat, buffer: *mut f64, len: usize) -> Result<(), Error> {
    let needed = 2 * m.nrows() * m.ncols();
    if len != needed {
        return Err(Error::InvalidArgument(format!(
            "buffer holds {len} doubles but the {}x{} matrix needs {needed}",
            m.nrows(),
            m.ncols()
        )));
    }
    let out = std::slice::from_raw_parts_mut(buffer, len);
    let mut i = 0;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let z = m[(r, c)];
            out[i] = z.re;
            out[i + 1] = z.im;
            i += 2;
        }
    }
    Ok(())
}

fn read_matrix(rows: usize, cols: usize, data: &[f64]) -> Result<CMat, Error> {
    let mut m = CMat::zeros(rows, cols);
    let mut i = 0;
    for r in 0..rows {
        for c in 0..cols {
            let (re, im) = (data[i], data[i + 1]);
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::NonFinite { row: r, col: c });
            }
            m[(r, c)] = C64::new(re, im);
            i += 2;
        }
    }
    Ok(m)
}

// ── System config ──

/// Creates a validated system configuration.
///
/// `power_budget` is the total transmit power per subcarrier and
/// `noise_var` the per-antenna noise variance; both must be positive, and
/// `n_streams <= n_rf <= min(n_tx, n_rx)` must hold.
///
/// # Safety
///
/// `out` must point to writable storage for one pointer. On success it
/// receives a handle that must be released with `hbf_system_config_free`.
#[no_mangle]
pub unsafe extern "C" fn hbf_system_config_new(
    n_tx: usize,
    n_rx: usize,
    n_rf: usize,
    n_streams: usize,
    n_subcarriers: usize,
    power_budget: f64,
    noise_var: f64,
    out: *mut *mut HbfSystemConfig,
) -> HbfStatus {
    if out.is_null() {
        return null_pointer("out");
    }
    entry(|| {
        let cfg = SystemConfig {
            n_tx,
            n_rx,
            n_rf,
            n_streams,
            n_subcarriers,
            power_budget,
            noise_var,
        };
        cfg.validate()?;
        *out = Box::into_raw(Box::new(HbfSystemConfig(cfg)));
        Ok(())
    })
}

/// Releases a configuration handle. Passing null is a no-op.
///
/// # Safety
///
/// `cfg` must be a handle from `hbf_system_config_new` that has not been
/// freed before.
#[no_mangle]
pub unsafe extern "C" fn hbf_system_config_free(cfg: *mut HbfSystemConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

// ── Channel ──

/// Draws one clustered-multipath channel realization.
///
/// Angles are in radians. `master_seed` and `realization` select a
/// deterministic random substream: equal inputs give bit-identical
/// channels on every platform and thread.
///
/// # Safety
///
/// `out` must point to writable storage for one pointer. On success it
/// receives a handle that must be released with `hbf_channel_free`.
#[no_mangle]
pub unsafe extern "C" fn hbf_channel_generate(
    n_rx: usize,
    n_tx: usize,
    n_subcarriers: usize,
    n_clusters: usize,
    n_rays: usize,
    angular_spread_rx: f64,
    angular_spread_tx: f64,
    antenna_spacing_over_wavelength: f64,
    master_seed: u64,
    realization: u64,
    out: *mut *mut HbfChannel,
) -> HbfStatus {
    if out.is_null() {
        return null_pointer("out");
    }
    entry(|| {
        let params = ChannelParams {
            n_clusters,
            n_rays,
            angular_spread_rx,
            angular_spread_tx,
            antenna_spacing_over_wavelength,
            n_subcarriers,
        };
        let mut rng = substream_rng(master_seed, realization);
        let channel = generate_channel(&params, n_rx, n_tx, &mut rng)?;
        *out = Box::into_raw(Box::new(HbfChannel(channel)));
        Ok(())
    })
}

/// Builds a channel from caller-provided matrices.
///
/// `data` holds `n_subcarriers` consecutive `n_rx x n_tx` matrices in the
/// interleaved row-major layout, `len` doubles in total
/// (`2 * n_rx * n_tx * n_subcarriers`).
///
/// # Safety
///
/// `data` must point to `len` readable doubles and `out` to writable
/// storage for one pointer. On success `out` receives a handle that must
/// be released with `hbf_channel_free`.
#[no_mangle]
pub unsafe extern "C" fn hbf_channel_from_data(
    n_rx: usize,
    n_tx: usize,
    n_subcarriers: usize,
    data: *const f64,
    len: usize,
    out: *mut *mut HbfChannel,
) -> HbfStatus {
    if out.is_null() {
        return null_pointer("out");
    }
    if data.is_null() {
        return null_pointer("data");
    }
    entry(|| {
        if n_rx < 1 || n_tx < 1 || n_subcarriers < 1 {
            return Err(Error::InvalidArgument(
                "channel dimensions must be at least 1".into(),
            ));
        }
        let per_matrix = 2 * n_rx * n_tx;
        let needed = per_matrix * n_subcarriers;
        if len != needed {
            return Err(Error::InvalidArgument(format!(
                "buffer holds {len} doubles but {n_subcarriers} matrices of \
                 {n_rx}x{n_tx} need {needed}"
            )));
        }
        let data = std::slice::from_raw_parts(data, len);
        let per_subcarrier = data
            .chunks_exact(per_matrix)
            .map(|chunk| read_matrix(n_rx, n_tx, chunk))
            .collect::<Result<Vec<_>, _>>()?;
        *out = Box::into_raw(Box::new(HbfChannel(ChannelRealization { per_subcarrier })));
        Ok(())
    })
}

/// Number of receive antennas, or 0 if `channel` is null.
///
/// # Safety
///
/// `channel` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hbf_channel_n_rx(channel: *const HbfChannel) -> usize {
    channel.as_ref().map_or(0, |c| c.0.n_rx())
}

/// Number of transmit antennas, or 0 if `channel` is null.
///
/// # Safety
///
/// `channel` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hbf_channel_n_tx(channel: *const HbfChannel) -> usize {
    channel.as_ref().map_or(0, |c| c.0.n_tx())
}

/// Number of subcarriers, or 0 if `channel` is null.
///
/// # Safety
///
/// `channel` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hbf_channel_n_subcarriers(channel: *const HbfChannel) -> usize {
    channel.as_ref().map_or(0, |c| c.0.n_subcarriers())
}

/// Copies subcarrier `k` of the channel into `buffer`
/// (`2 * n_rx * n_tx` doubles, interleaved row-major).
///
/// # Safety
///
/// `channel` must be a live handle and `buffer` must point to `len`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hbf_channel_get(
    channel: *const HbfChannel,
    k: usize,
    buffer: *mut f64,
    len: usize,
) -> HbfStatus {
    let Some(channel) = channel.as_ref() else {
        return null_pointer("channel");
    };
    if buffer.is_null() {
        return null_pointer("buffer");
    }
    entry(|| {
        let total = channel.0.n_subcarriers();
        let h_k = channel.0.per_subcarrier.get(k).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "subcarrier index {k} out of range for {total} subcarriers"
            ))
        })?;
        write_matrix(h_k, buffer, len)
    })
}

/// Releases a channel handle. Passing null is a no-op.
///
/// # Safety
///
/// `channel` must be a handle from `hbf_channel_generate` or
/// `hbf_channel_from_data` that has not been freed before.
#[no_mangle]
pub unsafe extern "C" fn hbf_channel_free(channel: *mut HbfChannel) {
    if !channel.is_null() {
        drop(Box::from_raw(channel));
    }
}

// ── Beamformer design and evaluation ──

/// Designs the closed-form hybrid beamformer for a channel realization.
///
/// # Safety
///
/// `channel` and `cfg` must be live handles; `out` must point to writable
/// storage for one pointer. On success it receives a handle that must be
/// released with `hbf_beamformer_free`.
#[no_mangle]
pub unsafe extern "C" fn hbf_design_hybrid(
    channel: *const HbfChannel,
    cfg: *const HbfSystemConfig,
    out: *mut *mut HbfBeamformer,
) -> HbfStatus {
    let Some(channel) = channel.as_ref() else {
        return null_pointer("channel");
    };
    let Some(cfg) = cfg.as_ref() else {
        return null_pointer("cfg");
    };
    if out.is_null() {
        return null_pointer("out");
    }
    entry(|| {
        let bf = design_hybrid(&channel.0, &cfg.0)?;
        *out = Box::into_raw(Box::new(HbfBeamformer(bf)));
        Ok(())
    })
}

/// Number of subcarriers the beamformer was designed for, or 0 on null.
///
/// # Safety
///
/// `bf` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hbf_beamformer_n_subcarriers(bf: *const HbfBeamformer) -> usize {
    bf.as_ref().map_or(0, |b| b.0.f_bb.len())
}

/// Copies the analog precoder (`n_tx x n_rf`) into `buffer`.
///
/// # Safety
///
/// `bf` must be a live handle and `buffer` must point to `len` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn hbf_beamformer_analog_precoder(
    bf: *const HbfBeamformer,
    buffer: *mut f64,
    len: usize,
) -> HbfStatus {
    let Some(bf) = bf.as_ref() else {
        return null_pointer("bf");
    };
    if buffer.is_null() {
        return null_pointer("buffer");
    }
    entry(|| write_matrix(&bf.0.f_rf, buffer, len))
}

/// Copies the analog combiner (`n_rx x n_rf`) into `buffer`.
///
/// # Safety
///
/// `bf` must be a live handle and `buffer` must point to `len` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn hbf_beamformer_analog_combiner(
    bf: *const HbfBeamformer,
    buffer: *mut f64,
    len: usize,
) -> HbfStatus {
    let Some(bf) = bf.as_ref() else {
        return null_pointer("bf");
    };
    if buffer.is_null() {
        return null_pointer("buffer");
    }
    entry(|| write_matrix(&bf.0.w_rf, buffer, len))
}

unsafe fn per_subcarrier_matrix(
    stack: &[CMat],
    what: &str,
    k: usize,
    buffer: *mut f64,
    len: usize,
) -> Result<(), Error> {
    let m = stack.get(k).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "subcarrier index {k} out of range for {} {what} matrices",
            stack.len()
        ))
    })?;
    write_matrix(m, buffer, len)
}

/// Copies the digital precoder for subcarrier `k` (`n_rf x n_streams`)
/// into `buffer`.
///
/// # Safety
///
/// `bf` must be a live handle and `buffer` must point to `len` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn hbf_beamformer_digital_precoder(
    bf: *const HbfBeamformer,
    k: usize,
    buffer: *mut f64,
    len: usize,
) -> HbfStatus {
    let Some(bf) = bf.as_ref() else {
        return null_pointer("bf");
    };
    if buffer.is_null() {
        return null_pointer("buffer");
    }
    entry(|| per_subcarrier_matrix(&bf.0.f_bb, "digital precoder", k, buffer, len))
}

/// Copies the digital combiner for subcarrier `k` (`n_rf x n_streams`)
/// into `buffer`.
///
/// # Safety
///
/// `bf` must be a live handle and `buffer` must point to `len` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn hbf_beamformer_digital_combiner(
    bf: *const HbfBeamformer,
    k: usize,
    buffer: *mut f64,
    len: usize,
) -> HbfStatus {
    let Some(bf) = bf.as_ref() else {
        return null_pointer("bf");
    };
    if buffer.is_null() {
        return null_pointer("buffer");
    }
    entry(|| per_subcarrier_matrix(&bf.0.w_bb, "digital combiner", k, buffer, len))
}

/// Releases a beamformer handle. Passing null is a no-op.
///
/// # Safety
///
/// `bf` must be a handle from `hbf_design_hybrid` that has not been freed
/// before.
#[no_mangle]
pub unsafe extern "C" fn hbf_beamformer_free(bf: *mut HbfBeamformer) {
    if !bf.is_null() {
        drop(Box::from_raw(bf));
    }
}

/// Subcarrier-averaged spectral efficiency of a hybrid beamformer on a
/// channel, in bits/s/Hz.
///
/// # Safety
///
/// `channel`, `cfg`, and `bf` must be live handles; `out` must point to
/// one writable double.
#[no_mangle]
pub unsafe extern "C" fn hbf_spectral_efficiency(
    channel: *const HbfChannel,
    bf: *const HbfBeamformer,
    cfg: *const HbfSystemConfig,
    out: *mut f64,
) -> HbfStatus {
    let Some(channel) = channel.as_ref() else {
        return null_pointer("channel");
    };
    let Some(bf) = bf.as_ref() else {
        return null_pointer("bf");
    };
    let Some(cfg) = cfg.as_ref() else {
        return null_pointer("cfg");
    };
    if out.is_null() {
        return null_pointer("out");
    }
    entry(|| {
        *out = spectral_efficiency(&channel.0, &bf.0, &cfg.0)?;
        Ok(())
    })
}

/// Spectral efficiency of the fully digital water-filling baseline on the
/// same channel, in bits/s/Hz. Designs the baseline internally.
///
/// # Safety
///
/// `channel` and `cfg` must be live handles; `out` must point to one
/// writable double.
#[no_mangle]
pub unsafe extern "C" fn hbf_digital_baseline_se(
    channel: *const HbfChannel,
    cfg: *const HbfSystemConfig,
    out: *mut f64,
) -> HbfStatus {
    let Some(channel) = channel.as_ref() else {
        return null_pointer("channel");
    };
    let Some(cfg) = cfg.as_ref() else {
        return null_pointer("cfg");
    };
    if out.is_null() {
        return null_pointer("out");
    }
    entry(|| {
        let baseline = design_digital_baseline(&channel.0, &cfg.0)?;
        *out = spectral_efficiency_digital(&channel.0, &baseline, &cfg.0)?;
        Ok(())
    })
}

// ── Complexity model ──

/// Beamforming algorithm selector for the FLOP model.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum HbfAlgorithm {
    /// The closed-form design implemented by this library.
    Proposed = 0,
    /// Iterative least-squares reference with per-iteration factorizations.
    Lsaa = 1,
    /// Accelerated variant of the reference algorithm.
    LsaaFast = 2,
}

impl From<HbfAlgorithm> for Algorithm {
    fn from(a: HbfAlgorithm) -> Algorithm {
        match a {
            HbfAlgorithm::Proposed => Algorithm::Proposed,
            HbfAlgorithm::Lsaa => Algorithm::Lsaa,
            HbfAlgorithm::LsaaFast => Algorithm::LsaaFast,
        }
    }
}

/// FLOP count of one algorithm at explicit dimensions. `n_iter` only
/// affects the accelerated reference variant.
///
/// # Safety
///
/// `out` must point to one writable double.
#[no_mangle]
pub unsafe extern "C" fn hbf_flops(
    algorithm: HbfAlgorithm,
    n: usize,
    n_rf: usize,
    n_iter: usize,
    out: *mut f64,
) -> HbfStatus {
    if out.is_null() {
        return null_pointer("out");
    }
    entry(|| {
        *out = flops(&FlopModel {
            algorithm: algorithm.into(),
            n,
            n_rf,
            n_iter,
        })?;
        Ok(())
    })
}

/// Fractional FLOP reduction of an algorithm relative to the iterative
/// reference at array scale `l` (antennas `8*l`, RF chains `l`).
///
/// # Safety
///
/// `out` must point to one writable double.
#[no_mangle]
pub unsafe extern "C" fn hbf_reduction_vs_lsaa(
    algorithm: HbfAlgorithm,
    l: usize,
    out: *mut f64,
) -> HbfStatus {
    if out.is_null() {
        return null_pointer("out");
    }
    entry(|| {
        *out = reduction_vs_lsaa(algorithm.into(), l)?;
        Ok(())
    })
}
