//! Dense complex-matrix kernel.
//!
//! Every operator in the crate (Hamiltonians, Dyson factors, metrics) is a
//! [`ComplexMatrix`] acting on one fixed working space. Comparisons are
//! relative Frobenius distances gated by a [`Tolerance`].

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::linalg::{Cholesky, Schur, SymmetricEigen, SVD};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

const SCHUR_MAX_ITER: usize = 10_000;

/// Numerical thresholds shared by every comparison in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    /// Relative Frobenius threshold for matrix equality.
    pub rel_eq: f64,
    /// Threshold below which an entry (relative to the largest one) counts as zero.
    pub zero_abs: f64,
    /// Largest condition number accepted before an inversion fails.
    pub cond_max: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rel_eq: 1e-10,
            zero_abs: 1e-12,
            cond_max: 1e12,
        }
    }
}

impl Tolerance {
    pub fn new(rel_eq: f64, zero_abs: f64, cond_max: f64) -> Result<Self> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(rel_eq) || !positive(zero_abs) || !positive(cond_max) || cond_max <= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "tolerance needs positive finite thresholds and cond_max > 1 \
                 (rel_eq={rel_eq}, zero_abs={zero_abs}, cond_max={cond_max})"
            )));
        }
        Ok(Self {
            rel_eq,
            zero_abs,
            cond_max,
        })
    }

    pub fn with_rel_eq(self, rel_eq: f64) -> Result<Self> {
        Self::new(rel_eq, self.zero_abs, self.cond_max)
    }
}

/// Square, finite, non-empty complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix{}", self.0)
    }
}

impl ComplexMatrix {
    pub fn new(inner: DMatrix<C64>) -> Result<Self> {
        if inner.nrows() == 0 {
            return Err(Error::InvalidMatrix("matrix has no rows".into()));
        }
        if inner.nrows() != inner.ncols() {
            return Err(Error::InvalidMatrix(format!(
                "matrix is {}x{}, expected square",
                inner.nrows(),
                inner.ncols()
            )));
        }
        if inner.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidMatrix("matrix has non-finite entries".into()));
        }
        Ok(Self(inner))
    }

    /// Builds a matrix from row vectors.
    pub fn from_rows<R: AsRef<[C64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.as_ref().len() != n {
                return Err(Error::InvalidMatrix(format!(
                    "row {i} has {} entries, expected {n}",
                    row.as_ref().len()
                )));
            }
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i].as_ref()[j]))
    }

    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.as_ref().iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn identity(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        Self(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn from_diagonal(diag: &[C64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        let d: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_diagonal(&d)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn as_inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.0[(i, j)]).collect())
            .collect()
    }

    pub fn column(&self, col: usize) -> Vec<C64> {
        self.0.column(col).iter().copied().collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self(self.0.map(|z| z * factor))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// `‖A − B‖_F / max(‖A‖_F, ‖B‖_F)`, zero when both vanish.
    pub fn rel_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        let scale = self.frobenius_norm().max(other.frobenius_norm());
        if scale == 0.0 {
            return 0.0;
        }
        (&self.0 - &other.0)
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
            / scale
    }

    pub fn approx_eq(&self, other: &Self, tol: &Tolerance) -> bool {
        self.dim() == other.dim() && self.rel_distance(other) < tol.rel_eq
    }

    /// `‖A − A†‖_F / ‖A‖_F`, zero for the zero matrix.
    pub fn hermiticity_residual(&self) -> f64 {
        let norm = self.frobenius_norm();
        if norm == 0.0 {
            return 0.0;
        }
        (&self.0 - self.0.adjoint())
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
            / norm
    }

    pub fn is_hermitian(&self, tol: &Tolerance) -> bool {
        self.hermiticity_residual() <= tol.rel_eq
    }

    /// `(A + A†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()).map(|z| z * 0.5))
    }

    /// Spectral condition number `σ_max / σ_min`; infinite for singular input.
    pub fn condition_number(&self) -> f64 {
        let sv = SVD::new(self.0.clone(), false, false).singular_values;
        let max = sv.iter().copied().fold(0.0, f64::max);
        let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
        if min == 0.0 || !min.is_finite() {
            f64::INFINITY
        } else {
            max / min
        }
    }

    pub fn inverse(&self, tol: &Tolerance) -> Result<Self> {
        let estimate = self.condition_number();
        if estimate.is_nan() || estimate > tol.cond_max {
            return Err(Error::IllConditioned {
                estimate,
                limit: tol.cond_max,
            });
        }
        self.0
            .clone()
            .try_inverse()
            .map(Self)
            .ok_or(Error::IllConditioned {
                estimate: f64::INFINITY,
                limit: tol.cond_max,
            })
    }

    /// Ascending eigenvalues of the Hermitian part.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.hermitian_part().0)
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    fn require_hermitian_positive(
        &self,
        tol: &Tolerance,
    ) -> Result<SymmetricEigen<C64, nalgebra::Dyn>> {
        let residual = self.hermiticity_residual();
        if residual > tol.rel_eq {
            return Err(Error::NotHermitian { residual });
        }
        let eig = SymmetricEigen::new(self.hermitian_part().0);
        let min_eigenvalue = eig
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eigenvalue.is_nan() || min_eigenvalue <= 0.0 {
            return Err(Error::NotPositiveDefinite { min_eigenvalue });
        }
        Ok(eig)
    }

    /// The unique Hermitian positive-definite `S` with `S·S = A`.
    pub fn hermitian_sqrt(&self, tol: &Tolerance) -> Result<Self> {
        let eig = self.require_hermitian_positive(tol)?;
        let roots = eig.eigenvalues.map(|l| C64::new(l.sqrt(), 0.0));
        let v = &eig.eigenvectors;
        let s = v * DMatrix::from_diagonal(&roots) * v.adjoint();
        Ok(Self(s).hermitian_part())
    }

    /// Upper-triangular `U` with `U†·U = A`.
    pub fn cholesky_upper(&self, tol: &Tolerance) -> Result<Self> {
        self.require_hermitian_positive(tol)?;
        let chol = Cholesky::new(self.hermitian_part().0).ok_or(Error::NotPositiveDefinite {
            min_eigenvalue: self.hermitian_eigenvalues()[0],
        })?;
        Ok(Self(chol.l().adjoint()))
    }

    fn schur(&self) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
        let schur = Schur::try_new(self.0.clone(), f64::EPSILON, SCHUR_MAX_ITER)
            .ok_or(Error::NoConvergence)?;
        Ok(schur.unpack())
    }

    /// Full spectrum with multiplicity, sorted by (Re, Im).
    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        let (_, t) = self.schur()?;
        let mut ev: Vec<C64> = t.diagonal().iter().copied().collect();
        sort_spectrum(&mut ev);
        Ok(ev)
    }

    /// Right eigenvectors from the Schur form, with their inverse.
    ///
    /// Fails with [`Error::NotDiagonalizable`] when the eigenvector basis is
    /// numerically degenerate (condition beyond `cond_max`).
    pub fn eigen_decomposition(&self, tol: &Tolerance) -> Result<EigenDecomposition> {
        let n = self.dim();
        let (q, t) = self.schur()?;
        let scale = t
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let mut y = DMatrix::<C64>::zeros(n, n);
        for k in 0..n {
            let lambda = t[(k, k)];
            y[(k, k)] = C64::new(1.0, 0.0);
            for i in (0..k).rev() {
                let mut acc = C64::new(0.0, 0.0);
                for j in (i + 1)..=k {
                    acc += t[(i, j)] * y[(j, k)];
                }
                let mut denom = t[(i, i)] - lambda;
                if denom.norm() < f64::EPSILON * scale {
                    denom = C64::new(f64::EPSILON * scale, 0.0);
                }
                y[(i, k)] = -acc / denom;
            }
        }
        let mut vectors = q * y;
        for mut col in vectors.column_iter_mut() {
            let norm = col.norm();
            col /= C64::new(norm, 0.0);
        }
        let vectors = Self(vectors);
        let condition = vectors.condition_number();
        if condition.is_nan() || condition > tol.cond_max {
            return Err(Error::NotDiagonalizable { condition });
        }
        let inverse = vectors.inverse(tol)?;
        Ok(EigenDecomposition {
            values: t.diagonal().iter().copied().collect(),
            vectors,
            inverse,
        })
    }

    /// `V·A·V⁻¹`.
    pub fn conjugate_by(&self, v: &Self, tol: &Tolerance) -> Result<Self> {
        check_dims(self.dim(), v.dim())?;
        let v_inv = v.inverse(tol)?;
        Ok(&(v * self) * &v_inv)
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.dim(), "dimension mismatch");
        (self.0.clone() * DVector::from_column_slice(x))
            .iter()
            .copied()
            .collect()
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        check_dims(self.dim(), rhs.dim())?;
        Ok(self * rhs)
    }

    /// Number of entries with `|a_ij| < zero_abs · max|a|`.
    pub fn count_zeros(&self, zero_abs: f64) -> usize {
        let threshold = zero_abs * self.max_abs();
        self.0.iter().filter(|z| z.norm() <= threshold).count()
    }

    /// Largest `|i − j|` over entries that do not count as zero.
    pub fn bandwidth(&self, zero_abs: f64) -> usize {
        let threshold = zero_abs * self.max_abs();
        let n = self.dim();
        let mut band = 0;
        for i in 0..n {
            for j in 0..n {
                if self.0[(i, j)].norm() > threshold {
                    band = band.max(i.abs_diff(j));
                }
            }
        }
        band
    }
}

/// `A = V·diag(values)·V⁻¹`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<C64>,
    pub vectors: ComplexMatrix,
    pub inverse: ComplexMatrix,
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Lexicographic (Re, Im) order.
pub fn sort_spectrum(ev: &mut [C64]) {
    ev.sort_by(|a, b| match a.re.total_cmp(&b.re) {
        Ordering::Equal => a.im.total_cmp(&b.im),
        other => other,
    });
}

/// Largest distance between two spectra under greedy nearest matching,
/// relative to `max(1, spectral radius)`. Infinite for unequal lengths.
pub fn spectral_distance(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let scale = a
        .iter()
        .chain(b.iter())
        .map(|z| z.norm())
        .fold(1.0, f64::max);
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for za in a {
        let (idx, dist) = b
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, zb)| (i, (za - zb).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("lengths match");
        used[idx] = true;
        worst = worst.max(dist);
    }
    worst / scale
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

/// Product of a list of matrices from left to right; identity for an empty list.
pub fn product<'a, I>(dim: usize, factors: I) -> ComplexMatrix
where
    I: IntoIterator<Item = &'a ComplexMatrix>,
{
    factors
        .into_iter()
        .fold(ComplexMatrix::identity(dim), |acc, f| &acc * f)
}
