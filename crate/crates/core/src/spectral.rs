//! Symmetric-matrix machinery shared by every construction in the crate.
//!
//! Everything here works from one eigendecomposition per matrix. An eigenvalue
//! is classified as zero when `|λ| ≤ τ_zero · dim · ‖A‖₂`; that single rule
//! decides inertia, signatures, supports and Moore–Penrose inverses, so all
//! downstream modules agree on what "the kernel" is.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type DenseMatrix = DMatrix<f64>;

/// Inputs further than this (relative) from symmetric are rejected by
/// [`SymmetricMatrix::new`].
const SYMMETRY_TOL: f64 = 1e-8;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;

static DEFAULT_TOLERANCE: OnceLock<ToleranceProfile> = OnceLock::new();

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceProfile {
    /// Relative zero threshold, scaled by `dim · ‖A‖₂`.
    pub zero: f64,
    /// Loewner-order slack, scaled by `1 + ‖A‖ + ‖B‖`.
    pub psd: f64,
    /// Factorization and identity residual bound.
    pub residual: f64,
    /// Projector-distance bound for subspace comparisons.
    pub subspace: f64,
}

impl ToleranceProfile {
    pub const DEFAULT: ToleranceProfile = ToleranceProfile {
        zero: 1e-10,
        psd: 1e-9,
        residual: 1e-8,
        subspace: 1e-7,
    };

    pub fn new(zero: f64, psd: f64, residual: f64, subspace: f64) -> Result<Self> {
        let t = ToleranceProfile {
            zero,
            psd,
            residual,
            subspace,
        };
        if [zero, psd, residual, subspace]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0)
        {
            Ok(t)
        } else {
            Err(Error::InvalidInput(format!(
                "tolerances must be finite and strictly positive: {t:?}"
            )))
        }
    }

    pub fn with_zero(self, zero: f64) -> Result<Self> {
        Self::new(zero, self.psd, self.residual, self.subspace)
    }

    /// Installs the process-wide default. Only the first call wins; later
    /// calls return the rejected profile.
    pub fn set_default(profile: ToleranceProfile) -> std::result::Result<(), ToleranceProfile> {
        DEFAULT_TOLERANCE.set(profile)
    }

    /// The process-wide default, or [`ToleranceProfile::DEFAULT`] if none was set.
    pub fn current() -> ToleranceProfile {
        *DEFAULT_TOLERANCE.get().unwrap_or(&Self::DEFAULT)
    }
}

impl Default for ToleranceProfile {
    fn default() -> Self {
        Self::current()
    }
}

/// Counts of positive, negative, zero and infinite eigenvalues.
///
/// `n_inf` is the dimension of the multivalued part and is always zero for
/// matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Inertia {
    pub n_plus: usize,
    pub n_minus: usize,
    pub n_zero: usize,
    pub n_inf: usize,
}

impl Inertia {
    pub fn dim(&self) -> usize {
        self.n_plus + self.n_minus + self.n_zero + self.n_inf
    }
}

impl std::ops::Add for Inertia {
    type Output = Inertia;
    fn add(self, rhs: Inertia) -> Inertia {
        Inertia {
            n_plus: self.n_plus + rhs.n_plus,
            n_minus: self.n_minus + rhs.n_minus,
            n_zero: self.n_zero + rhs.n_zero,
            n_inf: self.n_inf + rhs.n_inf,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix(DMatrix<f64>);

impl SymmetricMatrix {
    /// Validates squareness, finiteness and near-symmetry, then stores `(A+Aᵀ)/2`.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "symmetric matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        check_finite(&m)?;
        let asym = max_norm(&(&m - m.transpose()));
        if asym > SYMMETRY_TOL * (1.0 + max_norm(&m)) {
            return Err(Error::NotSymmetricMatrix { asymmetry: asym });
        }
        Ok(Self::symmetrize(m))
    }

    /// Symmetrizes without checking. Use for products that are symmetric up
    /// to roundoff.
    pub fn symmetrize(m: DMatrix<f64>) -> Self {
        assert!(m.is_square(), "symmetrize requires a square matrix");
        let t = m.transpose();
        SymmetricMatrix((m + t) * 0.5)
    }

    pub fn zeros(n: usize) -> Self {
        SymmetricMatrix(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        SymmetricMatrix(DMatrix::identity(n, n))
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        SymmetricMatrix(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    /// Spectral norm.
    pub fn norm(&self) -> Result<f64> {
        Ok(spectral_decompose(self)?.norm())
    }

    /// `Xᵀ·self·X`, symmetrized.
    pub fn congruence(&self, x: &DMatrix<f64>) -> SymmetricMatrix {
        SymmetricMatrix::symmetrize(x.transpose() * &self.0 * x)
    }

    pub fn scale(&self, c: f64) -> SymmetricMatrix {
        SymmetricMatrix(&self.0 * c)
    }
}

impl std::ops::Add<&SymmetricMatrix> for &SymmetricMatrix {
    type Output = SymmetricMatrix;
    fn add(self, rhs: &SymmetricMatrix) -> SymmetricMatrix {
        SymmetricMatrix(&self.0 + &rhs.0)
    }
}

impl std::ops::Sub<&SymmetricMatrix> for &SymmetricMatrix {
    type Output = SymmetricMatrix;
    fn sub(self, rhs: &SymmetricMatrix) -> SymmetricMatrix {
        SymmetricMatrix(&self.0 - &rhs.0)
    }
}

macro_rules! owned_binop {
    ($tr:ident, $f:ident) => {
        impl std::ops::$tr<SymmetricMatrix> for SymmetricMatrix {
            type Output = SymmetricMatrix;
            fn $f(self, rhs: SymmetricMatrix) -> SymmetricMatrix {
                std::ops::$tr::$f(&self, &rhs)
            }
        }
        impl std::ops::$tr<&SymmetricMatrix> for SymmetricMatrix {
            type Output = SymmetricMatrix;
            fn $f(self, rhs: &SymmetricMatrix) -> SymmetricMatrix {
                std::ops::$tr::$f(&self, rhs)
            }
        }
        impl std::ops::$tr<SymmetricMatrix> for &SymmetricMatrix {
            type Output = SymmetricMatrix;
            fn $f(self, rhs: SymmetricMatrix) -> SymmetricMatrix {
                std::ops::$tr::$f(self, &rhs)
            }
        }
    };
}

owned_binop!(Add, add);
owned_binop!(Sub, sub);

impl std::ops::Index<(usize, usize)> for SymmetricMatrix {
    type Output = f64;

    fn index(&self, ij: (usize, usize)) -> &f64 {
        &self.0[ij]
    }
}

impl std::ops::Neg for &SymmetricMatrix {
    type Output = SymmetricMatrix;
    fn neg(self) -> SymmetricMatrix {
        SymmetricMatrix(-&self.0)
    }
}

pub(crate) fn check_finite(m: &DMatrix<f64>) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Eigenvalues in ascending order with an orthonormal eigenvector matrix.
///
/// `scale` is a lower bound for the magnitude used in the zero threshold.
/// It is 0 for plain decompositions; matrices formed as differences such as
/// `J1 − TᵀJ2T` carry the size of their terms so that cancellation noise is
/// not mistaken for a signed eigenvalue.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
    pub scale: f64,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn norm(&self) -> f64 {
        max_norm_vec(&self.eigenvalues)
    }

    pub fn zero_threshold(&self, tol: &ToleranceProfile) -> f64 {
        tol.zero * self.dim() as f64 * self.norm().max(self.scale)
    }

    pub fn inertia(&self, tol: &ToleranceProfile) -> Inertia {
        let thr = self.zero_threshold(tol);
        let mut out = Inertia::default();
        for &l in self.eigenvalues.iter() {
            if l > thr {
                out.n_plus += 1;
            } else if l < -thr {
                out.n_minus += 1;
            } else {
                out.n_zero += 1;
            }
        }
        out
    }

    /// Mask of eigenpairs classified as nonzero.
    pub fn support(&self, tol: &ToleranceProfile) -> Vec<bool> {
        let thr = self.zero_threshold(tol);
        self.eigenvalues.iter().map(|l| l.abs() > thr).collect()
    }

    /// `V·diag(f(λ))·Vᵀ`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> SymmetricMatrix {
        let d = self.eigenvalues.map(f);
        let v = &self.eigenvectors;
        let scaled = v * DMatrix::from_diagonal(&d);
        SymmetricMatrix::symmetrize(scaled * v.transpose())
    }

    /// Like [`map`](Self::map) but sends eigenvalues classified as zero to 0.
    pub fn map_on_support(
        &self,
        tol: &ToleranceProfile,
        f: impl Fn(f64) -> f64,
    ) -> SymmetricMatrix {
        let thr = self.zero_threshold(tol);
        self.map(|l| if l.abs() > thr { f(l) } else { 0.0 })
    }

    fn columns_where(&self, keep: impl Fn(f64) -> bool) -> DMatrix<f64> {
        let idx: Vec<usize> = (0..self.dim())
            .filter(|&i| keep(self.eigenvalues[i]))
            .collect();
        self.eigenvectors.select_columns(idx.iter())
    }

    /// Orthonormal basis of the range.
    pub fn range_basis(&self, tol: &ToleranceProfile) -> DMatrix<f64> {
        let thr = self.zero_threshold(tol);
        self.columns_where(|l| l.abs() > thr)
    }

    /// Orthonormal basis of the kernel.
    pub fn kernel_basis(&self, tol: &ToleranceProfile) -> DMatrix<f64> {
        let thr = self.zero_threshold(tol);
        self.columns_where(|l| l.abs() <= thr)
    }

    /// Eigenvectors of the negative eigenvalues.
    pub fn negative_basis(&self, tol: &ToleranceProfile) -> DMatrix<f64> {
        let thr = self.zero_threshold(tol);
        self.columns_where(|l| l < -thr)
    }

    /// Eigenvectors of the positive eigenvalues.
    pub fn positive_basis(&self, tol: &ToleranceProfile) -> DMatrix<f64> {
        let thr = self.zero_threshold(tol);
        self.columns_where(|l| l > thr)
    }

    pub fn range_projector(&self, tol: &ToleranceProfile) -> SymmetricMatrix {
        self.map_on_support(tol, |_| 1.0)
    }

    /// Signature with the kernel signed `+1`.
    pub fn signature(&self, tol: &ToleranceProfile) -> SymmetricMatrix {
        let thr = self.zero_threshold(tol);
        self.map(|l| if l >= -thr { 1.0 } else { -1.0 })
    }

    /// Signature compressed to the range: `±1` on the support, `0` on the kernel.
    pub fn range_signature(&self, tol: &ToleranceProfile) -> SymmetricMatrix {
        self.map_on_support(tol, f64::signum)
    }

    pub fn modulus_power(&self, p: f64) -> SymmetricMatrix {
        self.map(|l| l.abs().powf(p))
    }

    pub fn pseudo_inverse_power(&self, p: f64, tol: &ToleranceProfile) -> SymmetricMatrix {
        self.map_on_support(tol, |l| l.abs().powf(-p))
    }

    /// Solves `M·S = B` for `M = V·diag(|λ|^p)·Vᵀ` in the Moore–Penrose sense,
    /// provided the columns of `B` lie in the support. Returns the residual of
    /// the projection test on failure.
    pub(crate) fn solve_in_range(
        &self,
        p: f64,
        b: &DMatrix<f64>,
        tol: &ToleranceProfile,
    ) -> Result<std::result::Result<DMatrix<f64>, f64>> {
        if b.nrows() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side has {} rows, operator has dimension {}",
                b.nrows(),
                self.dim()
            )));
        }
        let proj = self.range_projector(tol);
        let residual = max_norm(&(b - proj.as_matrix() * b));
        if residual > tol.residual * (1.0 + max_norm(b)) {
            return Ok(Err(residual));
        }
        let pinv = self.pseudo_inverse_power(p, tol);
        Ok(Ok(pinv.as_matrix() * b))
    }
}

fn max_norm_vec(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |a, &x| a.max(x.abs()))
}

/// Largest absolute entry (0 for empty matrices).
pub fn max_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        0.0
    } else {
        m.amax()
    }
}

/// Thin SVD `M = U·diag(σ)·Vᵀ` with `σ` in descending order.
pub(crate) struct ThinSvd {
    pub u: DMatrix<f64>,
    pub singular_values: DVector<f64>,
    pub v: DMatrix<f64>,
}

impl ThinSvd {
    /// `V·diag(σ⁺)·Uᵀ`, dropping singular values at or below `cutoff`.
    pub fn pseudo_inverse(&self, cutoff: f64) -> DMatrix<f64> {
        let inv = self.singular_values.map(|s| if s > cutoff { 1.0 / s } else { 0.0 });
        &self.v * DMatrix::from_diagonal(&inv) * self.u.transpose()
    }
}

// nalgebra's dynamic SVD can return a wrong factorization for some small
// well-conditioned inputs, so the decomposition is delegated to faer.
pub(crate) fn thin_svd(m: &DMatrix<f64>) -> ThinSvd {
    let (r, c) = m.shape();
    let k = r.min(c);
    if k == 0 {
        return ThinSvd {
            u: DMatrix::zeros(r, 0),
            singular_values: DVector::zeros(0),
            v: DMatrix::zeros(c, 0),
        };
    }
    let svd = faer::Mat::<f64>::from_fn(r, c, |i, j| m[(i, j)])
        .thin_svd()
        .expect("SVD of a finite matrix converges");
    let (u, s, v) = (svd.U(), svd.S(), svd.V());
    ThinSvd {
        u: DMatrix::from_fn(r, k, |i, j| u[(i, j)]),
        singular_values: DVector::from_fn(k, |i, _| s[i]),
        v: DMatrix::from_fn(c, k, |i, j| v[(i, j)]),
    }
}

/// Spectral norm of a rectangular matrix.
pub fn operator_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    thin_svd(m)
        .singular_values
        .iter()
        .fold(0.0, |a, &s| f64::max(a, s))
}

pub fn spectral_decompose(a: &SymmetricMatrix) -> Result<SpectralDecomposition> {
    let n = a.dim();
    if n == 0 {
        return Ok(SpectralDecomposition {
            eigenvalues: DVector::zeros(0),
            eigenvectors: DMatrix::zeros(0, 0),
            scale: 0.0,
        });
    }
    check_finite(a.as_matrix())?;
    let eig = a
        .as_matrix()
        .clone()
        .try_symmetric_eigen(EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or(Error::EigenNonConvergence)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let eigenvectors = eig.eigenvectors.select_columns(order.iter());
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        scale: 0.0,
    })
}

/// Like [`spectral_decompose`], with the zero threshold measured against
/// `max(‖A‖, scale)`.
pub fn spectral_decompose_scaled(a: &SymmetricMatrix, scale: f64) -> Result<SpectralDecomposition> {
    let mut dec = spectral_decompose(a)?;
    dec.scale = scale.abs();
    Ok(dec)
}

/// Inertia with the zero threshold measured against `max(‖A‖, scale)`.
pub fn inertia_scaled(a: &SymmetricMatrix, scale: f64, tol: &ToleranceProfile) -> Result<Inertia> {
    Ok(spectral_decompose_scaled(a, scale)?.inertia(tol))
}

pub fn inertia_of(a: &SymmetricMatrix, tol: &ToleranceProfile) -> Result<Inertia> {
    Ok(spectral_decompose(a)?.inertia(tol))
}

/// Negative index `ν₋(A)`.
pub fn negative_index(a: &SymmetricMatrix, tol: &ToleranceProfile) -> Result<usize> {
    Ok(inertia_of(a, tol)?.n_minus)
}

/// `J = sign(A)` with `sign(0) = +1`, so `J² = I` and `J·|A| = A`.
pub fn signature_of(a: &SymmetricMatrix, tol: &ToleranceProfile) -> Result<SymmetricMatrix> {
    Ok(spectral_decompose(a)?.signature(tol))
}

/// `|A|^p` for `p ≥ 0`.
pub fn modulus_power(a: &SymmetricMatrix, p: f64) -> Result<SymmetricMatrix> {
    if !(p >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "modulus power requires p >= 0, got {p}"
        )));
    }
    Ok(spectral_decompose(a)?.modulus_power(p))
}

/// Moore–Penrose inverse of `|A|^p`: `|λ|^{-p}` on the support, 0 on the kernel.
pub fn moore_penrose_power(
    a: &SymmetricMatrix,
    p: f64,
    tol: &ToleranceProfile,
) -> Result<SymmetricMatrix> {
    if !(p > 0.0) {
        return Err(Error::InvalidInput(format!(
            "Moore-Penrose power requires p > 0, got {p}"
        )));
    }
    Ok(spectral_decompose(a)?.pseudo_inverse_power(p, tol))
}

/// Factors `B = M·S` with `ran S ⊂ ran M`, or returns `None` when the
/// columns of `B` are not in `ran M`.
pub fn range_factor(
    m: &SymmetricMatrix,
    b: &DenseMatrix,
    tol: &ToleranceProfile,
) -> Result<Option<DenseMatrix>> {
    let dec = spectral_decompose(m)?;
    if b.nrows() != dec.dim() {
        return Err(Error::DimensionMismatch(format!(
            "range_factor: B has {} rows, M has dimension {}",
            b.nrows(),
            dec.dim()
        )));
    }
    // Signed pseudo-inverse.
    let proj = dec.range_projector(tol);
    let residual = max_norm(&(b - proj.as_matrix() * b));
    if residual > tol.residual * (1.0 + max_norm(b)) {
        return Ok(None);
    }
    let pinv = dec.map_on_support(tol, |l| 1.0 / l);
    Ok(Some(pinv.as_matrix() * b))
}

/// `A ⪯ B` up to the Loewner slack.
pub fn loewner_leq(
    a: &SymmetricMatrix,
    b: &SymmetricMatrix,
    tol: &ToleranceProfile,
) -> Result<bool> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "loewner_leq: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    if a.dim() == 0 {
        return Ok(true);
    }
    Ok(loewner_margin(a, b)? >= -tol.psd * (1.0 + a.norm()? + b.norm()?))
}

/// Smallest eigenvalue of `B − A`.
pub fn loewner_margin(a: &SymmetricMatrix, b: &SymmetricMatrix) -> Result<f64> {
    let d = spectral_decompose(&(b - a))?;
    Ok(d.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Orthonormal basis for the column space, rank decided by the relative
/// zero threshold on singular values.
pub fn orth(m: &DMatrix<f64>, tol: &ToleranceProfile) -> DMatrix<f64> {
    orth_scaled(m, 0.0, tol)
}

/// [`orth`] with the threshold taken relative to `max(σ_max, scale)`, for
/// matrices whose natural size is known in advance.
pub fn orth_scaled(m: &DMatrix<f64>, scale: f64, tol: &ToleranceProfile) -> DMatrix<f64> {
    if m.is_empty() {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let svd = thin_svd(m);
    let u = svd.u;
    let smax = svd.singular_values.iter().fold(0.0, |a: f64, &s| a.max(s));
    let thr = tol.zero * m.nrows().max(m.ncols()) as f64 * smax.max(scale);
    let idx: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > thr)
        .collect();
    u.select_columns(idx.iter())
}

/// Orthonormal basis of the orthogonal complement of the span of the
/// orthonormal columns `q` in `ℝⁿ`.
pub fn complement(q: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    if q.ncols() == 0 {
        return DMatrix::identity(n, n);
    }
    let p = SymmetricMatrix::symmetrize(DMatrix::identity(n, n) - q * q.transpose());
    let dec = spectral_decompose(&p).expect("projector eigendecomposition");
    let idx: Vec<usize> = (0..n).filter(|&i| dec.eigenvalues[i] > 0.5).collect();
    dec.eigenvectors.select_columns(idx.iter())
}

/// Orthonormal basis of `ker M`.
pub fn null_space(m: &DMatrix<f64>, tol: &ToleranceProfile) -> DMatrix<f64> {
    null_space_scaled(m, 0.0, tol)
}

pub fn null_space_scaled(m: &DMatrix<f64>, scale: f64, tol: &ToleranceProfile) -> DMatrix<f64> {
    let row_space = orth_scaled(&m.transpose(), scale, tol);
    complement(&row_space, m.ncols())
}

/// Orthogonal projector onto the span of orthonormal columns.
pub fn projector(q: &DMatrix<f64>) -> DMatrix<f64> {
    q * q.transpose()
}

/// Spectral-norm distance between the orthogonal projectors onto two spans
/// (the sine of the largest principal angle when the dimensions agree, 1
/// when they differ).
pub fn subspace_distance(q1: &DMatrix<f64>, q2: &DMatrix<f64>) -> f64 {
    if q1.ncols() != q2.ncols() {
        return 1.0;
    }
    operator_norm(&(projector(q1) - projector(q2)))
}

/// Orthonormal basis of `span q1 ∩ span q2` for orthonormal inputs.
pub fn intersection(q1: &DMatrix<f64>, q2: &DMatrix<f64>, tol: &ToleranceProfile) -> DMatrix<f64> {
    let n = q1.nrows();
    if q1.ncols() == 0 || q2.ncols() == 0 {
        return DMatrix::zeros(n, 0);
    }
    // (a, b) with q1·a = q2·b: singular values of [q1, −q2] near zero.
    let k1 = q1.ncols();
    let mut stacked = DMatrix::zeros(n, k1 + q2.ncols());
    stacked.columns_mut(0, k1).copy_from(q1);
    stacked.columns_mut(k1, q2.ncols()).copy_from(&(-q2));
    let gram = SymmetricMatrix::symmetrize(stacked.transpose() * &stacked);
    let dec = spectral_decompose(&gram).expect("gram eigendecomposition");
    let thr = tol.subspace * tol.subspace;
    let idx: Vec<usize> = (0..dec.dim())
        .filter(|&i| dec.eigenvalues[i] <= thr)
        .collect();
    let coeffs = dec.eigenvectors.select_columns(idx.iter());
    orth(&(q1 * coeffs.rows(0, k1)), tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tol() -> ToleranceProfile {
        ToleranceProfile::DEFAULT
    }

    fn sym(rows: &[&[f64]]) -> SymmetricMatrix {
        let n = rows.len();
        SymmetricMatrix::new(DMatrix::from_fn(n, n, |i, j| rows[i][j])).unwrap()
    }

    #[test]
    fn decompose_diagonal_sorts_ascending() {
        let d = spectral_decompose(&SymmetricMatrix::from_diagonal(&[2.0, -3.0, 0.0])).unwrap();
        assert_eq!(d.eigenvalues.as_slice(), &[-3.0, 0.0, 2.0]);
        assert_abs_diff_eq!(d.eigenvectors[(1, 0)].abs(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.eigenvectors[(2, 1)].abs(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.eigenvectors[(0, 2)].abs(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn decompose_swap_matrix() {
        let d = spectral_decompose(&sym(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap();
        assert_abs_diff_eq!(d.eigenvalues[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d.eigenvalues[1], 1.0, epsilon = 1e-14);
        let v0 = d.eigenvectors.column(0);
        assert_abs_diff_eq!((v0[0] + v0[1]).abs(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(
            v0[0].abs(),
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-14
        );
    }

    #[test]
    fn empty_matrix_is_fine() {
        let d = spectral_decompose(&SymmetricMatrix::zeros(0)).unwrap();
        assert_eq!(d.dim(), 0);
        assert_eq!(d.inertia(&tol()), Inertia::default());
    }

    #[test]
    fn inertia_examples() {
        let i = inertia_of(&SymmetricMatrix::from_diagonal(&[2.0, -3.0, 0.0]), &tol()).unwrap();
        assert_eq!((i.n_plus, i.n_minus, i.n_zero, i.n_inf), (1, 1, 1, 0));
        let i = inertia_of(&SymmetricMatrix::identity(4), &tol()).unwrap();
        assert_eq!((i.n_plus, i.n_minus, i.n_zero), (4, 0, 0));
        let i = inertia_of(&SymmetricMatrix::from_diagonal(&[1e-20, 1.0]), &tol()).unwrap();
        assert_eq!((i.n_plus, i.n_minus, i.n_zero), (1, 0, 1));
    }

    #[test]
    fn signature_examples() {
        let j = signature_of(&SymmetricMatrix::from_diagonal(&[2.0, -3.0]), &tol()).unwrap();
        assert_abs_diff_eq!(
            j.as_matrix(),
            &DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0])),
            epsilon = 1e-15
        );
        // kernel gets +1
        let j = signature_of(&SymmetricMatrix::from_diagonal(&[0.0, 5.0]), &tol()).unwrap();
        assert_abs_diff_eq!(j.as_matrix(), &DMatrix::identity(2, 2), epsilon = 1e-15);
        let swap = sym(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let j = signature_of(&swap, &tol()).unwrap();
        assert_abs_diff_eq!(j.as_matrix(), swap.as_matrix(), epsilon = 1e-14);
    }

    #[test]
    fn modulus_and_pinv_powers() {
        let a = SymmetricMatrix::from_diagonal(&[4.0, -9.0]);
        let h = modulus_power(&a, 0.5).unwrap();
        assert_abs_diff_eq!(
            h.as_matrix(),
            &DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 3.0])),
            epsilon = 1e-14
        );
        let sq = h.as_matrix() * h.as_matrix();
        assert_abs_diff_eq!(
            &sq,
            modulus_power(&a, 1.0).unwrap().as_matrix(),
            epsilon = 1e-13
        );

        let b = SymmetricMatrix::from_diagonal(&[4.0, 0.0]);
        let p = moore_penrose_power(&b, 0.5, &tol()).unwrap();
        assert_abs_diff_eq!(
            p.as_matrix(),
            &DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 0.0])),
            epsilon = 1e-15
        );
        let half = modulus_power(&b, 0.5).unwrap();
        let penrose = p.as_matrix() * half.as_matrix() * p.as_matrix();
        assert_abs_diff_eq!(&penrose, p.as_matrix(), epsilon = 1e-15);

        assert!(modulus_power(&a, -1.0).is_err());
        assert!(moore_penrose_power(&a, 0.0, &tol()).is_err());
    }

    #[test]
    fn range_factor_examples() {
        let s = range_factor(
            &SymmetricMatrix::identity(2),
            &DMatrix::from_vec(2, 1, vec![1.0, 1.0]),
            &tol(),
        )
        .unwrap()
        .unwrap();
        assert_abs_diff_eq!(s, DMatrix::from_vec(2, 1, vec![1.0, 1.0]), epsilon = 1e-15);

        let none = range_factor(
            &SymmetricMatrix::from_diagonal(&[1.0, 0.0]),
            &DMatrix::from_vec(2, 1, vec![0.0, 1.0]),
            &tol(),
        )
        .unwrap();
        assert!(none.is_none());

        let s = range_factor(
            &SymmetricMatrix::from_diagonal(&[2.0, 3.0]),
            &DMatrix::from_vec(2, 1, vec![2.0, 0.0]),
            &tol(),
        )
        .unwrap()
        .unwrap();
        assert_abs_diff_eq!(s, DMatrix::from_vec(2, 1, vec![1.0, 0.0]), epsilon = 1e-15);

        assert!(matches!(
            range_factor(&SymmetricMatrix::identity(2), &DMatrix::zeros(3, 1), &tol()),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn loewner_examples() {
        let t = tol();
        assert!(loewner_leq(
            &SymmetricMatrix::zeros(2),
            &SymmetricMatrix::identity(2),
            &t
        )
        .unwrap());
        assert!(loewner_leq(
            &SymmetricMatrix::from_diagonal(&[1.0, -1.0]),
            &SymmetricMatrix::from_diagonal(&[2.0, -0.5]),
            &t
        )
        .unwrap());
        assert!(!loewner_leq(
            &SymmetricMatrix::identity(2),
            &SymmetricMatrix::zeros(2),
            &t
        )
        .unwrap());
        assert!(loewner_leq(
            &SymmetricMatrix::identity(2),
            &SymmetricMatrix::zeros(3),
            &t
        )
        .is_err());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            SymmetricMatrix::new(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0])),
            Err(Error::NotSymmetricMatrix { .. })
        ));
        assert!(matches!(
            SymmetricMatrix::new(DMatrix::from_row_slice(1, 1, &[f64::NAN])),
            Err(Error::NonFinite)
        ));
        assert!(SymmetricMatrix::new(DMatrix::zeros(2, 3)).is_err());
        assert!(ToleranceProfile::new(0.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn subspace_helpers() {
        let t = tol();
        let e1 = DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0]);
        let plane = DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let other = DMatrix::from_column_slice(3, 2, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let cap = intersection(&plane, &other, &t);
        assert_eq!(cap.ncols(), 1);
        assert!(
            subspace_distance(&cap, &DMatrix::from_column_slice(3, 1, &[0.0, 1.0, 0.0])) < 1e-12
        );
        assert_eq!(complement(&plane, 3).ncols(), 1);
        assert_eq!(null_space(&e1.transpose(), &t).ncols(), 2);
        assert_eq!(
            orth(
                &DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 2.0, 0.0, 0.0]),
                &t
            )
            .ncols(),
            1
        );
    }
}
