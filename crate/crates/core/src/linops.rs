//! Dense complex-matrix kernel.
//!
//! Everything downstream (block operators, metrics, exponentials on blocks)
//! bottoms out here. Hermitian spectral decompositions drive the functional
//! calculus; general matrices go through scaling-and-squaring for `exp`.
//!
//! Diagonal inputs take exact fast paths: their eigenbasis is a permutation
//! matrix and their exponentials are computed entrywise, so phases that are
//! exact multiples of 2π produce exactly 1.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::{Add, Deref, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen, SVD};
use num_complex::Complex64 as C64;
use thiserror::Error;

pub type CVector = DVector<C64>;

/// Relative Hermiticity tolerance for spectral routines.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Absolute unitarity tolerance (Frobenius norm of `U*U - I`).
pub const UNITARY_TOL: f64 = 1e-9;
/// Distance below which 1 is treated as an eigenvalue of a unitary.
pub const CAYLEY_TOL: f64 = 1e-8;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },
    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },
    #[error("1 lies in the spectrum of the unitary (distance {distance:.3e})")]
    SpectralObstruction { distance: f64 },
    #[error("matrix is singular")]
    Singular,
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
}

pub type LinalgResult<T> = Result<T, LinalgError>;

/// Square complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct CMatrix(DMatrix<C64>);

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CMatrix{}", self.0)
    }
}

impl Deref for CMatrix {
    type Target = DMatrix<C64>;
    fn deref(&self) -> &Self::Target {
        &self.0
    }
}

impl TryFrom<DMatrix<C64>> for CMatrix {
    type Error = LinalgError;
    fn try_from(m: DMatrix<C64>) -> LinalgResult<Self> {
        if m.nrows() != m.ncols() {
            return Err(LinalgError::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        Ok(CMatrix(m))
    }
}

impl CMatrix {
    /// Builds a `dim x dim` matrix from row-major entries.
    pub fn from_rows(dim: usize, entries: &[C64]) -> LinalgResult<Self> {
        if entries.len() != dim * dim {
            return Err(LinalgError::DimensionMismatch { left: entries.len(), right: dim * dim });
        }
        Ok(CMatrix(DMatrix::from_row_slice(dim, dim, entries)))
    }

    /// Row-major real entries, mostly for tests and literals.
    pub fn from_real_rows(dim: usize, entries: &[f64]) -> LinalgResult<Self> {
        let c: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_rows(dim, &c)
    }

    pub fn zeros(dim: usize) -> Self {
        CMatrix(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        CMatrix(DMatrix::identity(dim, dim))
    }

    pub fn scalar(dim: usize, c: C64) -> Self {
        CMatrix(DMatrix::from_diagonal_element(dim, dim, c))
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        CMatrix(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let c: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_diagonal(&c)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn adjoint(&self) -> CMatrix {
        CMatrix(self.0.adjoint())
    }

    pub fn scale(&self, c: C64) -> CMatrix {
        CMatrix(self.0.map(|z| z * c))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> C64 {
        self.0.diagonal().iter().sum()
    }

    pub fn determinant(&self) -> C64 {
        self.0.clone().determinant()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// True when every off-diagonal entry is exactly zero.
    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.0[(i, j)] == C64::new(0.0, 0.0)))
    }

    pub fn off_diagonal_norm(&self) -> f64 {
        let n = self.dim();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += self.0[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    }

    /// Operator (spectral) norm.
    pub fn op_norm(&self) -> f64 {
        if self.dim() == 0 {
            return 0.0;
        }
        if self.is_diagonal() {
            return self.0.diagonal().iter().map(|z| z.norm()).fold(0.0, f64::max);
        }
        singular_values(self).into_iter().fold(0.0, f64::max)
    }

    pub fn hermitian_residual(&self) -> f64 {
        (&self.0 - self.0.adjoint()).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn skew_residual(&self) -> f64 {
        (&self.0 + self.0.adjoint()).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_residual() <= HERMITIAN_TOL * (1.0 + self.frobenius_norm())
    }

    pub fn is_skew_hermitian(&self) -> bool {
        self.skew_residual() <= HERMITIAN_TOL * (1.0 + self.frobenius_norm())
    }

    /// Frobenius norm of `U*U - I`.
    pub fn unitary_residual(&self) -> f64 {
        let g = self.0.adjoint() * &self.0;
        (g - DMatrix::<C64>::identity(self.dim(), self.dim()))
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary_residual() <= UNITARY_TOL
    }

    pub fn try_inverse(&self) -> LinalgResult<CMatrix> {
        self.0.clone().try_inverse().map(CMatrix).ok_or(LinalgError::Singular)
    }

    pub fn commutator(&self, other: &CMatrix) -> CMatrix {
        CMatrix(&self.0 * &other.0 - &other.0 * &self.0)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        CMatrix(self.0.kronecker(&other.0))
    }

    pub fn mul_vec(&self, v: &CVector) -> CVector {
        &self.0 * v
    }

    /// Integer power by repeated squaring.
    pub fn pow(&self, mut n: u64) -> CMatrix {
        let mut base = self.clone();
        let mut acc = CMatrix::identity(self.dim());
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn diff_frobenius(&self, other: &CMatrix) -> f64 {
        (&self.0 - &other.0).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl<'a> Add<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        CMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        CMatrix(&self.0 - &rhs.0)
    }
}

impl<'a> Mul<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        CMatrix(&self.0 * &rhs.0)
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        CMatrix(-&self.0)
    }
}

/// `e^{iθ}`, returning exactly 1 when θ is an exact multiple of 2π.
pub fn unit_phase(theta: f64) -> C64 {
    if (theta / TAU).fract() == 0.0 {
        return C64::new(1.0, 0.0);
    }
    C64::new(theta.cos(), theta.sin())
}

/// Complex exponential routed through [`unit_phase`].
pub fn cexp(z: C64) -> C64 {
    unit_phase(z.im) * z.re.exp()
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct SpectralDecomp {
    pub eigenvalues: Vec<f64>,
    /// Columns are eigenvectors, in the order of `eigenvalues`.
    pub basis: CMatrix,
}

impl SpectralDecomp {
    /// `U diag(f(λ)) U*`.
    pub fn apply<F: Fn(f64) -> C64>(&self, f: F) -> CMatrix {
        let u = self.basis.inner();
        let n = self.eigenvalues.len();
        let mut scaled = u.clone();
        for (j, &lam) in self.eigenvalues.iter().enumerate() {
            let fj = f(lam);
            for i in 0..n {
                scaled[(i, j)] *= fj;
            }
        }
        CMatrix(scaled * u.adjoint())
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.apply(|x| C64::new(x, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }
}

pub fn hermitian_eig(a: &CMatrix) -> LinalgResult<SpectralDecomp> {
    let residual = a.hermitian_residual();
    if residual > HERMITIAN_TOL * (1.0 + a.frobenius_norm()) {
        return Err(LinalgError::NotHermitian { residual });
    }
    let n = a.dim();
    if a.is_diagonal() {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
        let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
        let mut basis = DMatrix::<C64>::zeros(n, n);
        for (col, &row) in order.iter().enumerate() {
            basis[(row, col)] = C64::new(1.0, 0.0);
        }
        return Ok(SpectralDecomp { eigenvalues, basis: CMatrix(basis) });
    }
    let h = (&a.0 + a.0.adjoint()).map(|z| z * 0.5);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut basis = DMatrix::<C64>::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        basis.set_column(col, &eig.eigenvectors.column(src));
    }
    Ok(SpectralDecomp { eigenvalues, basis: CMatrix(basis) })
}

/// Bounded Borel functional calculus `f(A)` for Hermitian `A`.
pub fn func_calc<F: Fn(f64) -> C64>(f: F, a: &CMatrix) -> LinalgResult<CMatrix> {
    Ok(hermitian_eig(a)?.apply(f))
}

/// Spectral projection `E_A((lo, hi))` onto the open interval.
pub fn spectral_projection(a: &CMatrix, lo: f64, hi: f64) -> LinalgResult<CMatrix> {
    func_calc(|x| if x > lo && x < hi { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }, a)
}

/// Resolvent `(H - z)^{-1}` of a Hermitian matrix at non-real `z`.
pub fn resolvent(h: &CMatrix, z: C64) -> LinalgResult<CMatrix> {
    let shifted = h - &CMatrix::scalar(h.dim(), z);
    shifted.try_inverse()
}

pub fn matrix_exp(a: &CMatrix) -> CMatrix {
    let n = a.dim();
    if a.is_diagonal() {
        let d: Vec<C64> = (0..n).map(|i| cexp(a[(i, i)])).collect();
        return CMatrix::from_diagonal(&d);
    }
    if a.is_skew_hermitian() {
        // A = iH with H Hermitian
        let h = a.scale(-I);
        if let Ok(dec) = hermitian_eig(&h) {
            return dec.apply(unit_phase);
        }
    }
    expm_scaling_squaring(a)
}

fn one_norm(a: &DMatrix<C64>) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Taylor series of degree 18 on `A / 2^s` with `||A / 2^s||_1 <= 1/2`, then `s` squarings.
fn expm_scaling_squaring(a: &CMatrix) -> CMatrix {
    const DEGREE: usize = 18;
    let n = a.dim();
    let norm = one_norm(&a.0);
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let b = a.0.map(|z| z / 2f64.powi(s));
    let id = DMatrix::<C64>::identity(n, n);
    let mut acc = id.clone();
    for k in (1..=DEGREE).rev() {
        acc = &id + (&b * acc).map(|z| z / k as f64);
    }
    for _ in 0..s {
        acc = &acc * &acc;
    }
    CMatrix(acc)
}

/// Principal logarithm of a unitary, eigenphases in (-π, π] with -1 ↦ iπ.
pub fn matrix_log_unitary(u: &CMatrix) -> LinalgResult<CMatrix> {
    let residual = u.unitary_residual();
    if residual > UNITARY_TOL {
        return Err(LinalgError::NotUnitary { residual });
    }
    let n = u.dim();
    if u.is_diagonal() {
        let d: Vec<C64> = (0..n).map(|i| I * principal_phase(u[(i, i)])).collect();
        return Ok(CMatrix::from_diagonal(&d));
    }
    let (q, t) = Schur::new(u.0.clone()).unpack();
    let mut scaled = q.clone();
    for j in 0..n {
        let phase = I * principal_phase(t[(j, j)]);
        for i in 0..n {
            scaled[(i, j)] *= phase;
        }
    }
    let l = scaled * q.adjoint();
    Ok(CMatrix((&l - l.adjoint()).map(|z| z * 0.5)))
}

fn principal_phase(z: C64) -> f64 {
    let theta = z.im.atan2(z.re);
    if theta <= -PI + 1e-12 {
        PI
    } else {
        theta
    }
}

pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.dim() == 1 {
        return vec![a[(0, 0)].norm()];
    }
    if a.is_diagonal() {
        return a.diagonal().iter().map(|z| z.norm()).collect();
    }
    SVD::new(a.0.clone(), false, false).singular_values.iter().copied().collect()
}

/// Polar decomposition `A = u p` with `p = (A*A)^{1/2}`.
pub fn polar_decompose(a: &CMatrix) -> (CMatrix, CMatrix) {
    let n = a.dim();
    if a.is_diagonal() {
        let mut u = Vec::with_capacity(n);
        let mut p = Vec::with_capacity(n);
        for i in 0..n {
            let z = a[(i, i)];
            let r = z.norm();
            u.push(if r > 0.0 { z / r } else { C64::new(1.0, 0.0) });
            p.push(C64::new(r, 0.0));
        }
        return (CMatrix::from_diagonal(&u), CMatrix::from_diagonal(&p));
    }
    let svd = SVD::new(a.0.clone(), true, true);
    let w = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sigma = DMatrix::from_diagonal(&svd.singular_values.map(|s| C64::new(s, 0.0)));
    let u = &w * &v_t;
    let p = v_t.adjoint() * sigma * &v_t;
    let p = (&p + p.adjoint()).map(|z| z * 0.5);
    (CMatrix(u), CMatrix(p))
}

/// Cayley transform `(T - i)(T + i)^{-1}` of a Hermitian matrix.
pub fn cayley(t: &CMatrix) -> LinalgResult<CMatrix> {
    let residual = t.hermitian_residual();
    if residual > HERMITIAN_TOL * (1.0 + t.frobenius_norm()) {
        return Err(LinalgError::NotHermitian { residual });
    }
    let n = t.dim();
    let minus = t - &CMatrix::scalar(n, I);
    let plus_inv = (t + &CMatrix::scalar(n, I)).try_inverse()?;
    Ok(&minus * &plus_inv)
}

/// Inverse Cayley transform `i(1 + u)(1 - u)^{-1}`.
pub fn inverse_cayley(u: &CMatrix) -> LinalgResult<CMatrix> {
    let residual = u.unitary_residual();
    if residual > UNITARY_TOL {
        return Err(LinalgError::NotUnitary { residual });
    }
    let n = u.dim();
    let id = CMatrix::identity(n);
    let gap = &id - u;
    let distance = singular_values(&gap).into_iter().fold(f64::INFINITY, f64::min);
    if distance <= CAYLEY_TOL {
        return Err(LinalgError::SpectralObstruction { distance });
    }
    let t = (&(&id + u) * &gap.try_inverse()?).scale(I);
    Ok(CMatrix((&t.0 + t.0.adjoint()).map(|z| z * 0.5)))
}

/// `(Re A, Im A)` with `Re A = (A + A*)/2`, `Im A = (A - A*)/(2i)`.
pub fn re_im_split(a: &CMatrix) -> (CMatrix, CMatrix) {
    let adj = a.0.adjoint();
    let re = (&a.0 + &adj).map(|z| z * 0.5);
    let im = (&a.0 - &adj).map(|z| z / C64::new(0.0, 2.0));
    (CMatrix(re), CMatrix(im))
}
