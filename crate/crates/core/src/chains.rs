//! Factorized Dyson maps `Ω = Ω_N·…·Ω_1` and factorized metrics
//! `Θ = Z_N·…·Z_1`, with the conversions between them.
//!
//! Factor lists are stored in descending index order, exactly as the
//! products are written: `factors[0]` is `Ω_N` (or `Z_N`) and the last entry
//! is `Ω_1`. Accessors taking a 1-based `index` follow the same numbering as
//! the subscripts.
//!
//! The cumulative products `Y_j = Z_N·…·Z_j` are the canonical objects:
//! `Y_j = (Ω_N·…·Ω_j)†(Ω_N·…·Ω_j)`. Individual factors carry a unitary gauge
//! freedom, the `Y_j` do not.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matkernel::{check_dims, product, ComplexMatrix, Tolerance};

/// Storage order of a serialized factor list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FactorOrder {
    /// `[X_N, …, X_1]`, the order in which the product is written.
    #[default]
    Descending,
    /// `[X_1, …, X_N]`.
    Ascending,
}

/// How a Dyson factor is extracted from a Hermitian positive cumulative metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FactorizationMode {
    /// Unique Hermitian positive square root.
    #[default]
    Canonical,
    /// Upper-triangular Cholesky factor `U` with `Y = U†U`.
    Cholesky,
}

fn validate_factors(factors: &[ComplexMatrix]) -> Result<usize> {
    let first = factors.first().ok_or(Error::EmptyInput)?;
    let dim = first.dim();
    for f in factors {
        check_dims(dim, f.dim())?;
    }
    Ok(dim)
}

fn reorder(mut factors: Vec<ComplexMatrix>, order: FactorOrder) -> Vec<ComplexMatrix> {
    if order == FactorOrder::Ascending {
        factors.reverse();
    }
    factors
}

/// Dyson map factors `[Ω_N, …, Ω_1]`, each invertible within `cond_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct DysonChain {
    factors: Vec<ComplexMatrix>,
    inverses: Vec<ComplexMatrix>,
}

impl DysonChain {
    /// Factors given in descending order `[Ω_N, …, Ω_1]`.
    pub fn new(factors: Vec<ComplexMatrix>, tol: &Tolerance) -> Result<Self> {
        validate_factors(&factors)?;
        let inverses = factors
            .iter()
            .map(|f| f.inverse(tol))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { factors, inverses })
    }

    pub fn with_order(
        factors: Vec<ComplexMatrix>,
        order: FactorOrder,
        tol: &Tolerance,
    ) -> Result<Self> {
        Self::new(reorder(factors, order), tol)
    }

    pub fn identity(dim: usize, n_factors: usize) -> Self {
        assert!(n_factors >= 1);
        Self {
            factors: vec![ComplexMatrix::identity(dim); n_factors],
            inverses: vec![ComplexMatrix::identity(dim); n_factors],
        }
    }

    pub fn n_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn dim(&self) -> usize {
        self.factors[0].dim()
    }

    /// Descending list `[Ω_N, …, Ω_1]`.
    pub fn factors(&self) -> &[ComplexMatrix] {
        &self.factors
    }

    /// `Ω_index` for `1 ≤ index ≤ N`.
    pub fn factor(&self, index: usize) -> &ComplexMatrix {
        assert!(
            index >= 1 && index <= self.n_factors(),
            "factor index {index} out of range"
        );
        &self.factors[self.n_factors() - index]
    }

    pub fn factor_inverse(&self, index: usize) -> &ComplexMatrix {
        assert!(
            index >= 1 && index <= self.n_factors(),
            "factor index {index} out of range"
        );
        &self.inverses[self.n_factors() - index]
    }

    /// `Ω_hi·Ω_{hi−1}·…·Ω_lo`; the identity when `hi < lo`.
    pub fn partial_product(&self, hi: usize, lo: usize) -> ComplexMatrix {
        product(self.dim(), (lo..=hi).rev().map(|j| self.factor(j)))
    }

    /// Inverse of [`Self::partial_product`], assembled from the cached factor inverses.
    pub fn partial_product_inverse(&self, hi: usize, lo: usize) -> ComplexMatrix {
        product(self.dim(), (lo..=hi).map(|j| self.factor_inverse(j)))
    }

    /// `Ω = Ω_N·…·Ω_1`.
    pub fn total_dyson(&self) -> ComplexMatrix {
        self.partial_product(self.n_factors(), 1)
    }

    /// `Θ = Ω†Ω`.
    pub fn metric(&self) -> ComplexMatrix {
        let omega = self.total_dyson();
        &omega.adjoint() * &omega
    }

    /// `Y_j = (Ω_N·…·Ω_j)†(Ω_N·…·Ω_j)`.
    pub fn cumulative_metric(&self, index: usize) -> ComplexMatrix {
        let partial = self.partial_product(self.n_factors(), index);
        &partial.adjoint() * &partial
    }
}

/// Metric factors `[Z_N, …, Z_1]`. Validity of the cumulative products is
/// checked by [`validate`], not at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricChain {
    factors: Vec<ComplexMatrix>,
}

impl MetricChain {
    pub fn new(factors: Vec<ComplexMatrix>) -> Result<Self> {
        validate_factors(&factors)?;
        Ok(Self { factors })
    }

    pub fn with_order(factors: Vec<ComplexMatrix>, order: FactorOrder) -> Result<Self> {
        Self::new(reorder(factors, order))
    }

    pub fn n_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn dim(&self) -> usize {
        self.factors[0].dim()
    }

    pub fn factors(&self) -> &[ComplexMatrix] {
        &self.factors
    }

    /// `Z_index` for `1 ≤ index ≤ N`.
    pub fn factor(&self, index: usize) -> &ComplexMatrix {
        assert!(
            index >= 1 && index <= self.n_factors(),
            "factor index {index} out of range"
        );
        &self.factors[self.n_factors() - index]
    }

    /// `Y_index = Z_N·…·Z_index`; the identity for `index = N + 1`.
    pub fn cumulative(&self, index: usize) -> ComplexMatrix {
        let n = self.n_factors();
        product(self.dim(), (index..=n).rev().map(|j| self.factor(j)))
    }

    /// `Θ = Z_N·…·Z_1`.
    pub fn total_metric(&self) -> ComplexMatrix {
        self.cumulative(1)
    }
}

/// Builds `Z_N = Y_N` and `Z_j = Y_{j+1}⁻¹·Y_j` from a Dyson chain.
pub fn metrics_from_dyson(chain: &DysonChain, tol: &Tolerance) -> Result<MetricChain> {
    let n = chain.n_factors();
    let ys: Vec<ComplexMatrix> = (1..=n).map(|j| chain.cumulative_metric(j)).collect();
    let mut factors = Vec::with_capacity(n);
    for j in (1..=n).rev() {
        let y_j = &ys[j - 1];
        let z = if j == n {
            y_j.clone()
        } else {
            let y_next_inv = ys[j].inverse(tol)?;
            &y_next_inv * y_j
        };
        factors.push(z);
    }
    MetricChain::new(factors)
}

/// Recovers Dyson factors from the cumulative metrics: `Ω̃_j` factorizes
/// `Y_j = Ω̃_j†Ω̃_j`, then `Ω_N = Ω̃_N` and `Ω_j = Ω̃_{j+1}⁻¹·Ω̃_j`.
pub fn dyson_from_metrics(
    chain: &MetricChain,
    mode: FactorizationMode,
    tol: &Tolerance,
) -> Result<DysonChain> {
    let n = chain.n_factors();
    let tilde = (1..=n)
        .map(|j| {
            let y = chain.cumulative(j);
            match mode {
                FactorizationMode::Canonical => y.hermitian_sqrt(tol),
                FactorizationMode::Cholesky => y.cholesky_upper(tol),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut factors = Vec::with_capacity(n);
    for j in (1..=n).rev() {
        let omega = if j == n {
            tilde[j - 1].clone()
        } else {
            &tilde[j].inverse(tol)? * &tilde[j - 1]
        };
        factors.push(omega);
    }
    DysonChain::new(factors, tol)
}

/// Hermiticity and positivity of one cumulative product `Y_index`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelCertificate {
    pub index: usize,
    pub hermiticity_residual: f64,
    /// Smallest eigenvalue of the Hermitian part of `Y_index`.
    pub min_eigenvalue: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulativeCertificate {
    /// Levels in descending index order, `Y_N` first.
    pub levels: Vec<LevelCertificate>,
    pub passed: bool,
}

/// Checks that every `Y_j = Z_N·…·Z_j` is Hermitian positive definite.
///
/// For `N = 2` this is `Z_2 = Z_2† > 0` together with `Z_1†Z_2 = Z_2Z_1`; for
/// `N = 3` it adds `Z_1†(Z_3Z_2) = (Z_3Z_2)Z_1`. Failures are reported, never
/// raised.
pub fn validate(chain: &MetricChain, tol: &Tolerance) -> CumulativeCertificate {
    let levels: Vec<LevelCertificate> = (1..=chain.n_factors())
        .rev()
        .map(|j| {
            let y = chain.cumulative(j);
            let hermiticity_residual = y.hermiticity_residual();
            let min_eigenvalue = y.hermitian_eigenvalues()[0];
            LevelCertificate {
                index: j,
                hermiticity_residual,
                min_eigenvalue,
                passed: hermiticity_residual <= tol.rel_eq && min_eigenvalue > 0.0,
            }
        })
        .collect();
    let passed = levels.iter().all(|l| l.passed);
    CumulativeCertificate { levels, passed }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matkernel::C64;

    fn omega3(r: f64) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[[1.0, 0.0, 0.0], [r, 1.0, r], [0.0, 0.0, 1.0]]).unwrap()
    }
    fn omega2(s: f64) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[[1.0, 0.0, 0.0], [s, 1.0, 0.0], [0.0, s, 1.0]]).unwrap()
    }
    fn omega1(t: f64) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[[1.0, t, 0.0], [0.0, 1.0, t], [0.0, 0.0, 1.0]]).unwrap()
    }

    fn toy_chain(r: f64, s: f64, t: f64) -> DysonChain {
        DysonChain::new(vec![omega3(r), omega2(s), omega1(t)], &Tolerance::default()).unwrap()
    }

    #[test]
    fn total_dyson_examples() {
        assert_eq!(
            DysonChain::identity(3, 4).total_dyson(),
            ComplexMatrix::identity(3)
        );

        let single = DysonChain::new(vec![omega3(0.4)], &Tolerance::default()).unwrap();
        assert_eq!(single.total_dyson(), omega3(0.4));

        let (r, s, t) = (0.3, 0.2, 0.1);
        let omega = toy_chain(r, s, t).total_dyson();
        let row = [r + s, (r + s) * t + 1.0 + s * r, (1.0 + s * r) * t + r];
        for (j, &v) in row.iter().enumerate() {
            assert!((omega.get(1, j) - C64::new(v, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn factor_indexing_follows_subscripts() {
        let chain = toy_chain(0.3, 0.2, 0.1);
        assert_eq!(chain.factor(3), &omega3(0.3));
        assert_eq!(chain.factor(1), &omega1(0.1));
        let asc = DysonChain::with_order(
            vec![omega1(0.1), omega2(0.2), omega3(0.3)],
            FactorOrder::Ascending,
            &Tolerance::default(),
        )
        .unwrap();
        assert_eq!(asc, chain);
    }

    #[test]
    fn rejects_mismatched_or_singular_factors() {
        let tol = Tolerance::default();
        let two = ComplexMatrix::identity(2);
        assert!(matches!(
            DysonChain::new(vec![omega3(0.1), two], &tol),
            Err(Error::DimensionMismatch { .. })
        ));
        let singular = ComplexMatrix::from_real_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        assert!(matches!(
            DysonChain::new(vec![singular], &tol),
            Err(Error::IllConditioned { .. })
        ));
        assert!(matches!(
            DysonChain::new(vec![], &tol),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn single_factor_metric_is_z3() {
        let r = 0.7;
        let chain = DysonChain::new(vec![omega3(r)], &Tolerance::default()).unwrap();
        let metrics = metrics_from_dyson(&chain, &Tolerance::default()).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[
            [1.0 + r * r, r, r * r],
            [r, 1.0, r],
            [r * r, r, 1.0 + r * r],
        ])
        .unwrap();
        assert!(metrics.factor(1).rel_distance(&expected) < 1e-15);
    }

    #[test]
    fn z3z2_product_matches_closed_form() {
        let (r, s) = (0.3, 0.2);
        let tol = Tolerance::default();
        let metrics = metrics_from_dyson(&toy_chain(r, s, 0.1), &tol).unwrap();
        let a = r + s;
        let b = 1.0 + s * r;
        let expected = ComplexMatrix::from_real_rows(&[
            [1.0 + a * a, a * b, a * r],
            [a * b, b * b + s * s, r + s * r * r + s],
            [a * r, r + s * r * r + s, 1.0 + r * r],
        ])
        .unwrap();
        assert!(metrics.cumulative(2).rel_distance(&expected) < 1e-14);
    }

    #[test]
    fn identity_chain_round_trips() {
        let tol = Tolerance::default();
        let metrics = metrics_from_dyson(&DysonChain::identity(3, 3), &tol).unwrap();
        for z in metrics.factors() {
            assert_eq!(z, &ComplexMatrix::identity(3));
        }
        let back = dyson_from_metrics(&metrics, FactorizationMode::Canonical, &tol).unwrap();
        for f in back.factors() {
            assert!(f.approx_eq(&ComplexMatrix::identity(3), &tol));
        }
        let cert = validate(&metrics, &tol);
        assert!(cert.passed);
        assert!(cert.levels.iter().all(|l| l.hermiticity_residual == 0.0));
    }

    #[test]
    fn diagonal_metric_canonical_root() {
        let tol = Tolerance::default();
        let metrics =
            MetricChain::new(vec![ComplexMatrix::from_real_diagonal(&[4.0, 9.0]).unwrap()])
                .unwrap();
        let chain = dyson_from_metrics(&metrics, FactorizationMode::Canonical, &tol).unwrap();
        assert!(chain.factor(1).approx_eq(
            &ComplexMatrix::from_real_diagonal(&[2.0, 3.0]).unwrap(),
            &tol
        ));
    }

    #[test]
    fn round_trip_preserves_cumulative_products() {
        let tol = Tolerance::default();
        let metrics = metrics_from_dyson(&toy_chain(0.3, 0.2, 0.1), &tol).unwrap();
        for mode in [FactorizationMode::Canonical, FactorizationMode::Cholesky] {
            let chain = dyson_from_metrics(&metrics, mode, &tol).unwrap();
            let again = metrics_from_dyson(&chain, &tol).unwrap();
            for j in 1..=3 {
                let d = again.cumulative(j).rel_distance(&metrics.cumulative(j));
                assert!(d < 1e-10, "mode {mode:?} level {j}: {d}");
            }
        }
    }

    #[test]
    fn cholesky_mode_gives_triangular_tilde_factors() {
        let tol = Tolerance::default();
        let metrics = metrics_from_dyson(&toy_chain(0.5, -0.4, 0.9), &tol).unwrap();
        let chain = dyson_from_metrics(&metrics, FactorizationMode::Cholesky, &tol).unwrap();
        let omega = chain.total_dyson();
        for i in 0..3 {
            for j in 0..i {
                assert!(omega.get(i, j).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn two_factor_chain_satisfies_z2_quasi_hermiticity_of_z1() {
        let tol = Tolerance::default();
        let chain = DysonChain::new(vec![omega3(0.8), omega1(-0.6)], &tol).unwrap();
        let m = metrics_from_dyson(&chain, &tol).unwrap();
        let (z2, z1) = (m.factor(2), m.factor(1));
        let lhs = &z1.adjoint() * z2;
        let rhs = z2 * z1;
        assert!(lhs.rel_distance(&rhs) < tol.rel_eq);
    }

    #[test]
    fn three_factor_chain_satisfies_both_constraints() {
        let tol = Tolerance::default();
        let m = metrics_from_dyson(&toy_chain(0.9, -0.7, 1.3), &tol).unwrap();
        let (z3, z2, z1) = (m.factor(3), m.factor(2), m.factor(1));
        assert!((&z2.adjoint() * z3).rel_distance(&(z3 * z2)) < tol.rel_eq);
        let y = z3 * z2;
        assert!((&z1.adjoint() * &y).rel_distance(&(&y * z1)) < tol.rel_eq);
    }

    #[test]
    fn total_metric_equals_omega_dagger_omega() {
        let tol = Tolerance::default();
        let chain = toy_chain(-1.1, 0.4, 0.25);
        let m = metrics_from_dyson(&chain, &tol).unwrap();
        assert!(m.total_metric().rel_distance(&chain.metric()) < tol.rel_eq);
    }

    #[test]
    fn validate_examples() {
        let tol = Tolerance::default();
        let m = metrics_from_dyson(&toy_chain(0.3, 0.2, 0.1), &tol).unwrap();
        let cert = validate(&m, &tol);
        assert!(cert.passed);
        assert!(cert.levels.iter().all(|l| l.hermiticity_residual < 1e-12));

        let bad = MetricChain::new(vec![
            ComplexMatrix::identity(2),
            ComplexMatrix::from_real_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap(),
        ])
        .unwrap();
        let cert = validate(&bad, &tol);
        assert!(!cert.passed);
        assert!(cert.levels[0].passed, "Y_2 = I is fine");
        assert!(!cert.levels[1].passed);
        assert!(matches!(
            dyson_from_metrics(&bad, FactorizationMode::Canonical, &tol),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn indefinite_factor_is_rejected() {
        let tol = Tolerance::default();
        let m = MetricChain::new(vec![
            ComplexMatrix::from_real_diagonal(&[1.0, -2.0]).unwrap()
        ])
        .unwrap();
        assert!(!validate(&m, &tol).passed);
        assert!(matches!(
            dyson_from_metrics(&m, FactorizationMode::Canonical, &tol),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }
}
