//! Dense complex linear-algebra kernels shared by the channel, beamforming,
//! and evaluation layers.
//!
//! Everything operates on dynamically sized `Complex<f64>` matrices
//! ([`CMat`]). The heavy decompositions (Hermitian eigendecomposition, SVD,
//! QR, Cholesky) are delegated to `nalgebra`; this module pins down the
//! conventions the rest of the crate depends on:
//!
//! * eigenvalues and singular values are returned in **descending** order,
//! * eigenvector and singular-vector columns carry a **canonical phase**
//!   (the largest-modulus entry of each column is rotated to be real and
//!   nonnegative) so repeated runs produce identical bases,
//! * tiny negative eigenvalues of nominally positive-semidefinite inputs
//!   are clamped to zero,
//! * violated preconditions surface as [`Error`] values, never panics.
//!
//! Water-filling power allocation lives here too: it is scalar work layered
//! directly on top of the eigen/singular spectra these kernels produce.

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = Complex<f64>;
/// Dynamically sized complex matrix.
pub type CMat = DMatrix<C64>;
/// Dynamically sized complex column vector.
pub type CVec = DVector<C64>;

// ── Tolerances (module-level defaults, exposed for callers and tests) ──

/// Maximum entrywise |A − A^H| accepted by routines requiring Hermitian input.
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Eigenvalues of nominally PSD inputs in `[-PSD_CLAMP_TOL, 0)` are treated
/// as rounding noise and clamped to zero.
pub const PSD_CLAMP_TOL: f64 = 1e-9;
/// Relative floor applied to eigenvalues inside [`inverse_sqrt_hermitian`]:
/// values below `INV_SQRT_EIG_FLOOR_REL × λ_max` are raised to that
/// threshold before inversion, preventing blow-up on near-singular Gram
/// matrices.
pub const INV_SQRT_EIG_FLOOR_REL: f64 = 1e-10;
/// Base relative cutoff for pseudo-inverse rank decisions; scaled by the
/// larger matrix dimension in [`default_pinv_rel_tol`].
pub const PINV_REL_TOL_BASE: f64 = 1e-12;

/// Default relative singular-value cutoff for [`pinv`]: `1e-12 × max(rows, cols)`.
pub fn default_pinv_rel_tol(rows: usize, cols: usize) -> f64 {
    PINV_REL_TOL_BASE * rows.max(cols) as f64
}

// ── Decomposition results ──

/// Hermitian eigendecomposition `A = V · diag(values) · V^H`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigResult {
    /// Real eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvector columns matching `values`, with canonical
    /// column phases.
    pub vectors: CMat,
}

/// Thin singular value decomposition `A = U · diag(singular_values) · V^H`.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdResult {
    /// Left singular vectors, `rows × r` with `r = min(rows, cols)`.
    pub u: CMat,
    /// Singular values in descending order.
    pub singular_values: Vec<f64>,
    /// Right singular vectors, `cols × r` (not conjugated).
    pub v: CMat,
}

// ── Shared checks ──

fn check_finite(a: &CMat) -> Result<()> {
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let z = a[(i, j)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

fn check_square(a: &CMat, op: &str) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{op} requires a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(())
}

fn hermitian_asymmetry(a: &CMat) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let d = (a[(i, j)] - a[(j, i)].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// Rotate each column so its largest-modulus entry is real and nonnegative.
/// Ties pick the lowest row index; all-zero columns are left untouched.
fn canonicalize_column_phases(m: &mut CMat) {
    for j in 0..m.ncols() {
        let mut pivot = 0usize;
        let mut pivot_mag = 0.0f64;
        for i in 0..m.nrows() {
            let mag = m[(i, j)].norm();
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot = i;
            }
        }
        if pivot_mag > 0.0 {
            let rot = m[(pivot, j)].conj() / C64::new(pivot_mag, 0.0);
            for i in 0..m.nrows() {
                m[(i, j)] *= rot;
            }
        }
    }
}

// ── Operations ──

/// Eigendecomposition of a Hermitian matrix with descending eigenvalues and
/// deterministic (canonical-phase) eigenvectors.
///
/// The input is accepted when `max |A − A^H| ≤` [`HERMITIAN_TOL`] and is
/// symmetrized as `(A + A^H)/2` before factorization, so callers may pass
/// Gram matrices carrying rounding dust. Eigenvalues in
/// `[-`[`PSD_CLAMP_TOL`]`, 0)` are clamped to zero.
pub fn hermitian_eig(a: &CMat) -> Result<EigResult> {
    check_square(a, "hermitian_eig")?;
    check_finite(a)?;
    let asym = hermitian_asymmetry(a);
    if asym > HERMITIAN_TOL {
        return Err(Error::NotHermitian {
            max_asymmetry: asym,
            tolerance: HERMITIAN_TOL,
        });
    }
    let n = a.nrows();
    let sym = (a + a.adjoint()) * C64::new(0.5, 0.0);
    let eig = nalgebra::SymmetricEigen::new(sym);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());

    let mut values = Vec::with_capacity(n);
    let mut vectors = CMat::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let mut lambda = eig.eigenvalues[src];
        if (-PSD_CLAMP_TOL..0.0).contains(&lambda) {
            lambda = 0.0;
        }
        values.push(lambda);
        vectors.set_column(col, &eig.eigenvectors.column(src));
    }
    canonicalize_column_phases(&mut vectors);
    Ok(EigResult { values, vectors })
}

/// The `m` leading eigenvectors (descending eigenvalue order) of a Hermitian
/// matrix, as an `n × m` matrix with orthonormal columns.
///
/// Implemented as a full eigendecomposition followed by truncation; at the
/// dimensions this crate targets the partial and full factorizations cost
/// the same in practice.
pub fn partial_top_eigvectors(a: &CMat, m: usize) -> Result<CMat> {
    let n = a.nrows();
    if m < 1 || m > n {
        return Err(Error::InvalidArgument(format!(
            "requested {m} leading eigenvectors of a {n}x{n} matrix (need 1 <= m <= {n})"
        )));
    }
    let eig = hermitian_eig(a)?;
    Ok(eig.vectors.columns(0, m).into_owned())
}

/// Thin SVD with descending singular values and canonical column phases.
///
/// The phase convention is anchored on the right singular vectors: each
/// column of `V` is rotated so its largest-modulus entry is real and
/// nonnegative, and the matching column of `U` receives the same rotation,
/// preserving `A = U Σ V^H`.
pub fn svd_thin(a: &CMat) -> Result<SvdResult> {
    check_finite(a)?;
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(Error::InvalidArgument(
            "svd_thin requires a non-empty matrix".into(),
        ));
    }
    let svd = nalgebra::SVD::try_new(a.clone(), true, true, f64::EPSILON, 100_000)
        .ok_or_else(|| Error::Numeric("SVD failed to converge".into()))?;
    let mut u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let mut v = v_t.adjoint();
    let singular_values: Vec<f64> = svd.singular_values.iter().copied().collect();

    // Rotate (v, u) column pairs together so the factorization is preserved.
    let r = singular_values.len();
    for j in 0..r {
        let mut pivot_mag = 0.0f64;
        let mut pivot = 0usize;
        for i in 0..v.nrows() {
            let mag = v[(i, j)].norm();
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot = i;
            }
        }
        if pivot_mag > 0.0 {
            let rot = v[(pivot, j)].conj() / C64::new(pivot_mag, 0.0);
            for i in 0..v.nrows() {
                v[(i, j)] *= rot;
            }
            for i in 0..u.nrows() {
                u[(i, j)] *= rot;
            }
        }
    }
    Ok(SvdResult {
        u,
        singular_values,
        v,
    })
}

/// Moore-Penrose pseudo-inverse via SVD.
///
/// Singular values below `rel_tol × σ_max` are treated as zero. A zero
/// matrix maps to the zero matrix of transposed shape.
pub fn pinv(a: &CMat, rel_tol: f64) -> Result<CMat> {
    let tol_ok = rel_tol >= 0.0; // NaN fails this comparison too.
    if !tol_ok {
        return Err(Error::InvalidArgument(format!(
            "pinv rel_tol must be nonnegative, got {rel_tol}"
        )));
    }
    let svd = svd_thin(a)?;
    let sigma_max = svd.singular_values.first().copied().unwrap_or(0.0);
    let cutoff = rel_tol * sigma_max;
    let r = svd.singular_values.len();
    let mut result = CMat::zeros(a.ncols(), a.nrows());
    for (i, &s) in svd.singular_values.iter().enumerate().take(r) {
        if s > cutoff && s > 0.0 {
            let vi = svd.v.column(i);
            let ui = svd.u.column(i);
            let inv = C64::new(1.0 / s, 0.0);
            // result += (1/σ_i) v_i u_i^H
            for row in 0..result.nrows() {
                let coeff = vi[row] * inv;
                for col in 0..result.ncols() {
                    result[(row, col)] += coeff * ui[col].conj();
                }
            }
        }
    }
    Ok(result)
}

/// [`pinv`] with the default cutoff [`default_pinv_rel_tol`].
pub fn pinv_default(a: &CMat) -> Result<CMat> {
    pinv(a, default_pinv_rel_tol(a.nrows(), a.ncols()))
}

/// Base-2 log-determinant of a Hermitian positive-definite matrix, computed
/// as `Σ log₂ λ_i` from the eigendecomposition.
pub fn logdet_hermitian(a: &CMat) -> Result<f64> {
    let eig = hermitian_eig(a)?;
    let min = eig.values.last().copied().unwrap_or(0.0);
    if min <= 0.0 {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: min,
        });
    }
    Ok(eig.values.iter().map(|l| l.log2()).sum())
}

/// `A^(-1/2)` for Hermitian positive-definite `A`, via eigendecomposition.
///
/// Eigenvalues below [`INV_SQRT_EIG_FLOOR_REL`]` × λ_max` are floored at
/// that threshold before inversion, so a numerically rank-deficient Gram
/// matrix yields a large-but-finite result instead of overflow.
pub fn inverse_sqrt_hermitian(a: &CMat) -> Result<CMat> {
    let eig = hermitian_eig(a)?;
    let lambda_max = eig.values.first().copied().unwrap_or(0.0);
    if lambda_max <= 0.0 {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: eig.values.last().copied().unwrap_or(0.0),
        });
    }
    let floor = INV_SQRT_EIG_FLOOR_REL * lambda_max;
    let n = a.nrows();
    let mut scaled = eig.vectors.clone();
    for j in 0..n {
        let inv_sqrt = C64::new(1.0 / eig.values[j].max(floor).sqrt(), 0.0);
        for i in 0..n {
            scaled[(i, j)] *= inv_sqrt;
        }
    }
    Ok(&scaled * eig.vectors.adjoint())
}

/// Water-filling power allocation over parallel channels.
///
/// `gains` must be sorted descending and nonnegative with at least one
/// positive entry. Returns per-channel powers `p_i = max(0, μ − σ²/gains_i)`
/// with the water level `μ` chosen so `Σ p_i = budget`, which maximizes
/// `Σ log₂(1 + p_i gains_i / σ²)`.
pub fn waterfill(gains: &[f64], budget: f64, noise_var: f64) -> Result<Vec<f64>> {
    if gains.is_empty() {
        return Err(Error::InvalidArgument(
            "waterfill requires at least one gain".into(),
        ));
    }
    if !(budget.is_finite() && budget > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "waterfill budget must be positive and finite, got {budget}"
        )));
    }
    if !(noise_var.is_finite() && noise_var > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "waterfill noise variance must be positive and finite, got {noise_var}"
        )));
    }
    for pair in gains.windows(2) {
        if pair[1] > pair[0] {
            return Err(Error::InvalidArgument(
                "waterfill gains must be sorted descending".into(),
            ));
        }
    }
    if !gains.iter().all(|&g| g.is_finite() && g >= 0.0) {
        return Err(Error::InvalidArgument(
            "waterfill gains must be finite and nonnegative".into(),
        ));
    }
    let n_positive = gains.iter().take_while(|&&g| g > 0.0).count();
    if n_positive == 0 {
        return Err(Error::AllZeroGains);
    }

    // Deactivate channels weakest-first until the water level covers every
    // active channel's noise floor.
    for active in (1..=n_positive).rev() {
        let inv_gain_sum: f64 = gains[..active].iter().map(|&g| noise_var / g).sum();
        let mu = (budget + inv_gain_sum) / active as f64;
        if mu >= noise_var / gains[active - 1] {
            let mut powers = vec![0.0; gains.len()];
            for (i, &g) in gains.iter().enumerate().take(active) {
                powers[i] = (mu - noise_var / g).max(0.0);
            }
            return Ok(powers);
        }
    }
    unreachable!("a single active channel always satisfies the water level");
}

/// Thin QR factorization: `A = Q·R` with `Q` of shape `rows × min(rows, cols)`.
pub fn qr_thin(a: &CMat) -> (CMat, CMat) {
    let qr = nalgebra::QR::new(a.clone());
    (qr.q(), qr.r())
}

/// Matrix of i.i.d. circularly-symmetric complex Gaussian entries with unit
/// variance (`CN(0, 1)`), drawn column-major.
pub fn random_gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        data.push(C64::new(re * scale, im * scale));
    }
    CMat::from_vec(rows, cols, data)
}

/// Haar-ish random matrix with orthonormal columns, drawn as the thin-QR
/// orthogonal factor of a complex Gaussian matrix. Requires `rows ≥ cols`.
pub fn random_orthonormal<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    assert!(
        rows >= cols,
        "random_orthonormal requires rows >= cols, got {rows}x{cols}"
    );
    qr_thin(&random_gaussian_matrix(rows, cols, rng)).0
}

// ── Tests ──
