//! Dense complex operators and vectors on small Hilbert spaces.
//!
//! Everything above this module (states, POVMs, protocols) is expressed with
//! [`Operator`] and [`Vector`]. Both are thin newtypes over `nalgebra`
//! storage; index conventions for tensor products are fixed here:
//! the basis state `|i_a⟩ ⊗ |i_b⟩` sits at row `i_a * dim_b + i_b`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance for checks on freshly constructed objects.
pub const CONSTRUCTION_TOL: f64 = 1e-12;
/// Tolerance for spectral reconstructions (eigen-decompositions, SVDs).
pub const SPECTRAL_TOL: f64 = 1e-10;
/// Tolerance for assertions on derived objects (POVMs, twirled operators).
pub const DERIVED_TOL: f64 = 1e-9;

pub type C64 = Complex64;

#[inline]
pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Which tensor factor of a bipartite space to keep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

/// A dense complex square matrix.
#[derive(Clone, PartialEq)]
pub struct Operator(DMatrix<C64>);

/// A dense complex column vector.
#[derive(Clone, PartialEq)]
pub struct Vector(DVector<C64>);

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Operator({}x{}){}", self.dim(), self.dim(), self.0)
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Vector({}){}", self.dim(), self.0.transpose())
    }
}

impl Operator {
    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare(m.nrows(), m.ncols()));
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidArgument(
                "operator dimension must be positive".into(),
            ));
        }
        Ok(Self(m))
    }

    /// Builds a `dim × dim` operator from row-major entries.
    pub fn from_rows(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Self::from_matrix(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn from_real_rows(dim: usize, entries: &[f64]) -> Result<Self> {
        let entries: Vec<C64> = entries.iter().map(|&x| c(x)).collect();
        Self::from_rows(dim, &entries)
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let d = DVector::from_iterator(values.len(), values.iter().map(|&x| c(x)));
        Self(DMatrix::from_diagonal(&d))
    }

    /// `|v⟩⟨v|`, unnormalized.
    pub fn projector(v: &Vector) -> Self {
        Self::outer(v, v)
    }

    /// `|a⟩⟨b|`.
    pub fn outer(a: &Vector, b: &Vector) -> Self {
        Self(&a.0 * b.0.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// Real part of the trace; the imaginary part vanishes for Hermitian input.
    pub fn trace_re(&self) -> f64 {
        self.0.trace().re
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// Transpose in the computational basis.
    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(&self.0 * c(s))
    }

    pub fn scale_complex(&self, s: C64) -> Self {
        Self(&self.0 * s)
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |a_ij - b_ij|`.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        assert_eq!(self.dim(), other.dim(), "operator dimension mismatch");
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |t_ij - conj(t_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * c(0.5))
    }

    pub fn apply(&self, v: &Vector) -> Vector {
        Vector(&self.0 * &v.0)
    }

    /// `⟨v|T|v⟩`.
    pub fn expectation(&self, v: &Vector) -> C64 {
        v.0.dotc(&(&self.0 * &v.0))
    }

    /// `Tr(self · other)`.
    pub fn trace_product(&self, other: &Operator) -> C64 {
        let n = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                acc += self.0[(i, k)] * other.0[(k, i)];
            }
        }
        acc
    }

    /// `t^p` for a Hermitian PSD operator, computed spectrally. Eigenvalues
    /// that are numerically zero map to zero, also for negative `p`.
    pub fn psd_power(&self, p: f64) -> Result<Self> {
        let eig = eig_hermitian(self)?;
        let scale = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let cutoff = default_rank_tol(self.dim()) * scale;
        let floor = CONSTRUCTION_TOL.max(cutoff) * scale.max(1.0);
        if let Some(&min) = eig.values.last() {
            if min < -floor {
                return Err(Error::NotPsd(min));
            }
        }
        let mut out = DMatrix::zeros(self.dim(), self.dim());
        for (value, vec) in eig.values.iter().zip(&eig.vectors) {
            if *value > cutoff {
                out += &vec.0 * vec.0.adjoint() * c(value.powf(p));
            }
        }
        Ok(Self(out))
    }

    pub fn sqrt_psd(&self) -> Result<Self> {
        self.psd_power(0.5)
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator(&self.0 + &rhs.0)
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator(&self.0 - &rhs.0)
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator(&self.0 * &rhs.0)
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator(-&self.0)
    }
}

impl std::ops::AddAssign<&Operator> for Operator {
    fn add_assign(&mut self, rhs: &Operator) {
        self.0 += &rhs.0;
    }
}

impl Vector {
    pub fn from_complex(entries: Vec<C64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidArgument(
                "vector dimension must be positive".into(),
            ));
        }
        Ok(Self(DVector::from_vec(entries)))
    }

    pub fn from_real(entries: &[f64]) -> Result<Self> {
        Self::from_complex(entries.iter().map(|&x| c(x)).collect())
    }

    pub fn from_dvector(v: DVector<C64>) -> Self {
        Self(v)
    }

    /// Computational basis vector `|k⟩` in dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Self {
        assert!(k < dim, "basis index {k} out of range for dimension {dim}");
        let mut v = DVector::zeros(dim);
        v[k] = c(1.0);
        Self(v)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DVector::zeros(dim))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &DVector<C64> {
        &self.0
    }

    pub fn get(&self, i: usize) -> C64 {
        self.0[i]
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.norm_squared()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !n.is_finite() || n <= 0.0 {
            return Err(Error::InvalidArgument(
                "cannot normalize a zero or non-finite vector".into(),
            ));
        }
        Ok(Self(&self.0 / c(n)))
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Vector) -> C64 {
        self.0.dotc(&other.0)
    }

    pub fn conj(&self) -> Self {
        Self(self.0.map(|z| z.conj()))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(&self.0 * s)
    }

    pub fn tensor(&self, other: &Vector) -> Self {
        Self(self.0.kronecker(&other.0))
    }
}

impl Add for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        Vector(&self.0 + &rhs.0)
    }
}

impl Sub for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        Vector(&self.0 - &rhs.0)
    }
}

/// Kronecker product `a ⊗ b`.
pub fn tensor(a: &Operator, b: &Operator) -> Operator {
    Operator(a.0.kronecker(&b.0))
}

/// Traces out one factor of an operator on `dims.0 ⊗ dims.1`.
pub fn partial_trace(t: &Operator, dims: (usize, usize), keep: Side) -> Result<Operator> {
    let (da, db) = dims;
    if t.dim() != da * db {
        return Err(Error::DimensionMismatch {
            expected: da * db,
            found: t.dim(),
        });
    }
    let m = &t.0;
    let out = match keep {
        Side::A => DMatrix::from_fn(da, da, |i, j| {
            (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()
        }),
        Side::B => DMatrix::from_fn(db, db, |i, j| {
            (0..da).map(|k| m[(k * db + i, k * db + j)]).sum()
        }),
    };
    Ok(Operator(out))
}

/// Eigen-decomposition of a Hermitian operator, eigenvalues descending.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vector>,
}

impl Eigen {
    /// `Σ ν_k |η_k⟩⟨η_k|`.
    pub fn reconstruct(&self) -> Operator {
        let n = self.vectors.first().map_or(0, Vector::dim);
        let mut out = DMatrix::zeros(n, n);
        for (value, vec) in self.values.iter().zip(&self.vectors) {
            out += &vec.0 * vec.0.adjoint() * c(*value);
        }
        Operator(out)
    }
}

pub fn eig_hermitian(t: &Operator) -> Result<Eigen> {
    let tol = CONSTRUCTION_TOL * t.max_abs().max(1.0);
    let defect = t.hermitian_defect();
    if defect > tol {
        return Err(Error::NotHermitian(defect));
    }
    let sym = t.hermitian_part().0.symmetric_eigen();
    let mut order: Vec<usize> = (0..t.dim()).collect();
    order.sort_by(|&i, &j| sym.eigenvalues[j].total_cmp(&sym.eigenvalues[i]));
    let values = order.iter().map(|&i| sym.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| Vector(sym.eigenvectors.column(i).into_owned()))
        .collect();
    Ok(Eigen { values, vectors })
}

/// Default relative threshold for numerical rank: `dim · machine-epsilon`.
pub fn default_rank_tol(dim: usize) -> f64 {
    dim as f64 * f64::EPSILON
}

/// Number of eigenvalues strictly above `rel_tol · max-eigenvalue`.
pub fn numerical_rank(t: &Operator, rel_tol: Option<f64>) -> Result<usize> {
    let eig = eig_hermitian(t)?;
    let max = eig.values.first().copied().unwrap_or(0.0);
    if max <= 0.0 {
        return Ok(0);
    }
    let cutoff = rel_tol.unwrap_or_else(|| default_rank_tol(t.dim())) * max;
    Ok(eig.values.iter().filter(|&&v| v > cutoff).count())
}

/// Projector onto the span of eigenvectors whose eigenvalue exceeds
/// `rel_tol · max-eigenvalue` (default `dim · ε`).
pub fn support_projection(t: &Operator, rel_tol: Option<f64>) -> Result<Operator> {
    let eig = eig_hermitian(t)?;
    let rel_tol = rel_tol.unwrap_or_else(|| default_rank_tol(t.dim()));
    let max = eig.values.first().copied().unwrap_or(0.0);
    let min = eig.values.last().copied().unwrap_or(0.0);
    let norm = max.abs().max(min.abs());
    if min < -rel_tol.max(CONSTRUCTION_TOL) * norm {
        return Err(Error::NotPsd(min));
    }
    let mut out = DMatrix::zeros(t.dim(), t.dim());
    if max <= 0.0 {
        return Ok(Operator(out));
    }
    for (value, vec) in eig.values.iter().zip(&eig.vectors) {
        if *value > rel_tol * max {
            out += &vec.0 * vec.0.adjoint();
        }
    }
    Ok(Operator(out))
}

/// True iff the smallest eigenvalue is at least `-tol`. Non-Hermitian
/// input is reported as not PSD.
pub fn psd_check(t: &Operator, tol: f64) -> bool {
    match eig_hermitian(t) {
        Ok(eig) => eig.values.last().is_none_or(|&v| v >= -tol),
        Err(_) => false,
    }
}

/// True iff every eigenvalue lies in `[-tol, 1 + tol]`, i.e. `0 ≤ t ≤ I`.
pub fn povm_element_check(t: &Operator, tol: f64) -> bool {
    match eig_hermitian(t) {
        Ok(eig) => eig.values.iter().all(|&v| v >= -tol && v <= 1.0 + tol),
        Err(_) => false,
    }
}
