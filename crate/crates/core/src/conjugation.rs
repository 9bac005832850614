//! Hermitian conjugation relative to a metric `Θ`: the ♯-conjugate
//! `A♯ = Θ⁻¹·A†·Θ` and the quasi-Hermiticity test `A†Θ = ΘA`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matkernel::{check_dims, ComplexMatrix, Tolerance};

/// A validated metric together with its inverse.
#[derive(Debug, Clone)]
pub struct MetricContext {
    theta: ComplexMatrix,
    theta_inv: ComplexMatrix,
}

impl MetricContext {
    pub fn new(theta: ComplexMatrix, tol: &Tolerance) -> Result<Self> {
        let residual = theta.hermiticity_residual();
        if residual > tol.rel_eq {
            return Err(Error::NotHermitian { residual });
        }
        let min_eigenvalue = theta.hermitian_eigenvalues()[0];
        if min_eigenvalue <= 0.0 {
            return Err(Error::NotPositiveDefinite { min_eigenvalue });
        }
        let theta_inv = theta.inverse(tol)?;
        Ok(Self { theta, theta_inv })
    }

    /// The trivial metric `I`.
    pub fn identity(dim: usize) -> Self {
        Self {
            theta: ComplexMatrix::identity(dim),
            theta_inv: ComplexMatrix::identity(dim),
        }
    }

    pub fn theta(&self) -> &ComplexMatrix {
        &self.theta
    }

    pub fn theta_inv(&self) -> &ComplexMatrix {
        &self.theta_inv
    }

    pub fn dim(&self) -> usize {
        self.theta.dim()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasiHermiticityReport {
    /// `‖A†Θ − ΘA‖_F / ‖ΘA‖_F`, zero for `A = 0`.
    pub residual: f64,
    pub passed: bool,
}

pub fn sharp(a: &ComplexMatrix, ctx: &MetricContext) -> Result<ComplexMatrix> {
    check_dims(ctx.dim(), a.dim())?;
    Ok(&(&ctx.theta_inv * &a.adjoint()) * &ctx.theta)
}

/// Checks `A†Θ = ΘA`. Dimension mismatch is reported as an infinite residual.
pub fn is_quasi_hermitian(
    a: &ComplexMatrix,
    ctx: &MetricContext,
    tol: &Tolerance,
) -> QuasiHermiticityReport {
    if a.dim() != ctx.dim() {
        return QuasiHermiticityReport {
            residual: f64::INFINITY,
            passed: false,
        };
    }
    let theta_a = &ctx.theta * a;
    let denom = theta_a.frobenius_norm();
    let residual = if denom == 0.0 {
        0.0
    } else {
        (&(&a.adjoint() * &ctx.theta) - &theta_a).frobenius_norm() / denom
    };
    QuasiHermiticityReport {
        residual,
        passed: residual <= tol.rel_eq,
    }
}

/// Whether a candidate observable is admissible in the picture defined by
/// `ctx`, i.e. self-adjoint in the metric inner product.
pub fn check_observable(
    l: &ComplexMatrix,
    ctx: &MetricContext,
    tol: &Tolerance,
) -> QuasiHermiticityReport {
    is_quasi_hermitian(l, ctx, tol)
}

/// Metric seen after the change of basis `A ↦ V·A·V⁻¹`: `V⁻†·Θ·V⁻¹`.
pub fn transport_metric(
    ctx: &MetricContext,
    v: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<MetricContext> {
    check_dims(ctx.dim(), v.dim())?;
    let v_inv = v.inverse(tol)?;
    let theta = (&(&v_inv.adjoint() * &ctx.theta) * &v_inv).hermitian_part();
    let theta_inv = &(v * &ctx.theta_inv) * &v.adjoint();
    Ok(MetricContext {
        theta,
        theta_inv: theta_inv.hermitian_part(),
    })
}
