//! Three-level model with one-parameter Dyson factors
//!
//! ```text
//! Ω_3 = [1 0 0; r 1 r; 0 0 1]   Ω_2 = [1 0 0; s 1 0; 0 s 1]   Ω_1 = [1 t 0; 0 1 t; 0 0 1]
//! ```
//!
//! and the Hermitian target `diag(1, 3, 5)`, so that `H = Ω⁻¹·diag(1,3,5)·Ω`.
//! Closed-form matrices for the products, metrics and intermediate
//! Hamiltonians are kept as fixtures and checked against the generic
//! chain/lattice machinery.

use serde::{Deserialize, Serialize};

use crate::chains::{metrics_from_dyson, DysonChain};
use crate::error::{Error, Result};
use crate::lattice::{all_representations, build_lattice, diagonal_map, NodeIndex, Representation};
use crate::matkernel::{ComplexMatrix, Tolerance, C64};

/// Target spectrum of the model.
pub const TARGET_SPECTRUM: [f64; 3] = [1.0, 3.0, 5.0];

/// Independent parameters of the physical Hamiltonian at metric depth `k`.
pub const DECLARED_N_PAR: [usize; 4] = [0, 1, 2, 3];

/// Smallest magnitude of `r`, `s`, `t` and of the critical combinations for
/// a point to count as generic in zero-count comparisons.
pub const GENERICITY_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToyParams {
    pub r: f64,
    pub s: f64,
    pub t: f64,
}

impl ToyParams {
    pub fn new(r: f64, s: f64, t: f64) -> Result<Self> {
        if !(r.is_finite() && s.is_finite() && t.is_finite()) {
            return Err(Error::InvalidParameter(
                "toy parameters must be finite".into(),
            ));
        }
        Ok(Self { r, s, t })
    }

    /// True when none of `r, s, t, 1+sr, 1−ts, 1+ts` is within `margin` of 0.
    pub fn is_generic(&self, margin: f64) -> bool {
        let ToyParams { r, s, t } = *self;
        [r, s, t, 1.0 + s * r, 1.0 - t * s, 1.0 + t * s]
            .iter()
            .all(|v| v.abs() > margin)
    }
}

fn real3(rows: [[f64; 3]; 3]) -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&rows).expect("finite 3x3")
}

fn real_vec(v: [f64; 3]) -> Vec<C64> {
    v.iter().map(|&x| C64::new(x, 0.0)).collect()
}

pub fn factors(p: &ToyParams) -> [ComplexMatrix; 3] {
    let ToyParams { r, s, t } = *p;
    [
        real3([[1.0, 0.0, 0.0], [r, 1.0, r], [0.0, 0.0, 1.0]]),
        real3([[1.0, 0.0, 0.0], [s, 1.0, 0.0], [0.0, s, 1.0]]),
        real3([[1.0, t, 0.0], [0.0, 1.0, t], [0.0, 0.0, 1.0]]),
    ]
}

/// Closed-form matrices evaluated at given parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyFixtures {
    /// Full Dyson map `Ω_3·Ω_2·Ω_1`.
    pub omega_321: ComplexMatrix,
    /// `Ω_3·Ω_2`, the ket transform of node `(1, 2)`.
    pub omega_32: ComplexMatrix,
    /// `Ω_2·Ω_1·Ω_2⁻¹`.
    pub omega_21: ComplexMatrix,
    pub z3: ComplexMatrix,
    pub z3z2: ComplexMatrix,
    /// First column of `Θ = Z_3·Z_2·Z_1`.
    pub theta_first_column: Vec<C64>,
    /// Physical Hamiltonian paired with `Z_3·Z_2`.
    pub h1: ComplexMatrix,
    /// Physical Hamiltonian paired with `Z_3`.
    pub h21: ComplexMatrix,
    /// First two columns of `H`.
    pub h_first_columns: [Vec<C64>; 2],
}

impl ToyFixtures {
    pub fn closed_form(p: &ToyParams) -> Self {
        let ToyParams { r, s, t } = *p;
        let rs = r + s;
        let a = 1.0 + s * r;
        Self {
            omega_321: real3([
                [1.0, t, 0.0],
                [rs, rs * t + 1.0 + s * r, a * t + r],
                [0.0, s, t * s + 1.0],
            ]),
            omega_32: real3([[1.0, 0.0, 0.0], [rs, a, r], [0.0, s, 1.0]]),
            omega_21: real3([
                [1.0 - t * s, t, 0.0],
                [0.0, 1.0, t],
                [t * s.powi(3), -t * s * s, t * s + 1.0],
            ]),
            z3: real3([
                [1.0 + r * r, r, r * r],
                [r, 1.0, r],
                [r * r, r, 1.0 + r * r],
            ]),
            z3z2: real3([
                [1.0 + rs * rs, rs * a, rs * r],
                [rs * a, a * a + s * s, r + s * r * r + s],
                [rs * r, r + s * r * r + s, 1.0 + r * r],
            ]),
            theta_first_column: real_vec([
                1.0 + rs * rs,
                t * (1.0 + rs * rs) + rs * a,
                rs * (t + r * t * s + r),
            ]),
            h1: real3([
                [1.0, 0.0, 0.0],
                [2.0 * r + 2.0 * s, 3.0 - 2.0 * s * r, -2.0 * r],
                [-2.0 * rs * s, 2.0 * s + 2.0 * s * s * r, 2.0 * s * r + 5.0],
            ]),
            h21: real3([[1.0, 0.0, 0.0], [2.0 * r, 3.0, -2.0 * r], [0.0, 0.0, 5.0]]),
            h_first_columns: [
                real_vec([
                    -2.0 * r * t * t * s - 2.0 * t * r - 2.0 * t * t * s * s - 2.0 * t * s + 1.0,
                    2.0 * r * t * s + 2.0 * r + 2.0 * t * s * s + 2.0 * s,
                    -2.0 * rs * s,
                ]),
                real_vec([
                    -2.0 * r * t.powi(3) * s - 2.0 * t * t * r - 2.0 * t.powi(3) * s * s - 2.0 * t
                        + 2.0 * t * t * s * s * r
                        + 2.0 * r * t * s,
                    2.0 * r * t * t * s + 2.0 * t * r + 2.0 * t * t * s * s - 2.0 * s * s * r * t
                        + 3.0
                        - 2.0 * s * r,
                    -2.0 * r * t * s - 2.0 * t * s * s + 2.0 * s + 2.0 * s * s * r,
                ]),
            ],
        }
    }
}

#[derive(Debug, Clone)]
pub struct ToyModelInstance {
    pub params: ToyParams,
    pub chain: DysonChain,
    /// `diag(1, 3, 5)`.
    pub target: ComplexMatrix,
    pub hamiltonian: ComplexMatrix,
    pub fixtures: ToyFixtures,
}

pub fn build(params: ToyParams, tol: &Tolerance) -> Result<ToyModelInstance> {
    let chain = DysonChain::new(factors(&params).to_vec(), tol)?;
    let target = ComplexMatrix::from_real_diagonal(&TARGET_SPECTRUM)?;
    let omega_inv = chain.partial_product_inverse(3, 1);
    let hamiltonian = &(&omega_inv * &target) * &chain.total_dyson();
    Ok(ToyModelInstance {
        params,
        chain,
        target,
        hamiltonian,
        fixtures: ToyFixtures::closed_form(&params),
    })
}

impl ToyModelInstance {
    /// Representations at metric depth `k = 0..=3`.
    pub fn representations(&self, tol: &Tolerance) -> Result<Vec<Representation>> {
        all_representations(&self.hamiltonian, &self.chain, tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureResidual {
    pub name: String,
    pub residual: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureReport {
    pub entries: Vec<FixtureResidual>,
    pub all_passed: bool,
}

fn vec_rel_distance(a: &[C64], b: &[C64]) -> f64 {
    let diff: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let scale = a
        .iter()
        .map(|x| x.norm_sqr())
        .sum::<f64>()
        .sqrt()
        .max(b.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt());
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

/// Compares each closed form with its value recomputed through the chain,
/// metric and lattice routines.
pub fn verify_fixtures(inst: &ToyModelInstance, tol: &Tolerance) -> FixtureReport {
    let mut entries = Vec::new();
    let mut push = |name: &str, residual: f64| {
        entries.push(FixtureResidual {
            name: name.to_string(),
            residual,
            passed: residual <= tol.rel_eq,
        })
    };
    let fx = &inst.fixtures;
    let chain = &inst.chain;

    push("omega_321", chain.total_dyson().rel_distance(&fx.omega_321));
    let lattice = build_lattice(&inst.hamiltonian, chain, tol);
    match &lattice {
        Ok(lat) => {
            let w = &lat
                .node(NodeIndex::new(1, 2))
                .expect("node (1,2)")
                .ket_transform;
            push("omega_32", w.rel_distance(&fx.omega_32));
            let m = diagonal_map(lat.node(NodeIndex::new(1, 1)).expect("node (1,1)"), chain);
            push(
                "omega_21",
                m.map(|m| m.rel_distance(&fx.omega_21))
                    .unwrap_or(f64::INFINITY),
            );
        }
        Err(_) => {
            push("omega_32", f64::INFINITY);
            push("omega_21", f64::INFINITY);
        }
    }
    match metrics_from_dyson(chain, tol) {
        Ok(z) => {
            push("z3", z.cumulative(3).rel_distance(&fx.z3));
            push("z3z2", z.cumulative(2).rel_distance(&fx.z3z2));
            push(
                "theta_first_column",
                vec_rel_distance(&z.total_metric().column(0), &fx.theta_first_column),
            );
        }
        Err(_) => {
            for name in ["z3", "z3z2", "theta_first_column"] {
                push(name, f64::INFINITY);
            }
        }
    }
    match inst.representations(tol) {
        Ok(reps) => {
            push("h1", reps[2].physical_hamiltonian.rel_distance(&fx.h1));
            push("h21", reps[1].physical_hamiltonian.rel_distance(&fx.h21));
        }
        Err(_) => {
            push("h1", f64::INFINITY);
            push("h21", f64::INFINITY);
        }
    }
    let h_cols: Vec<C64> = [0, 1]
        .iter()
        .flat_map(|&c| inst.hamiltonian.column(c))
        .collect();
    let fx_cols: Vec<C64> = fx.h_first_columns.iter().flatten().copied().collect();
    push("h_first_columns", vec_rel_distance(&h_cols, &fx_cols));

    let all_passed = entries.iter().all(|e| e.passed);
    FixtureReport {
        entries,
        all_passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conjugation::{is_quasi_hermitian, MetricContext};
    use crate::matkernel::spectral_distance;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn target_spectrum() -> Vec<C64> {
        real_vec(TARGET_SPECTRUM)
    }

    #[test]
    fn zero_params_give_identity_chain() {
        let tol = Tolerance::default();
        let inst = build(ToyParams::new(0.0, 0.0, 0.0).unwrap(), &tol).unwrap();
        assert_eq!(inst.hamiltonian, inst.target);
        assert_eq!(inst.chain.total_dyson(), ComplexMatrix::identity(3));
        assert!(verify_fixtures(&inst, &tol).all_passed);
        assert_eq!(inst.fixtures.h21, inst.target);
        assert!(!inst.params.is_generic(GENERICITY_MARGIN));
    }

    #[test]
    fn fixtures_at_reference_point() {
        let tol = Tolerance::default();
        let inst = build(ToyParams::new(0.3, 0.2, 0.1).unwrap(), &tol).unwrap();
        let rep = verify_fixtures(&inst, &tol);
        assert_eq!(rep.entries.len(), 9);
        for e in &rep.entries {
            assert!(e.residual < 1e-12, "{} {}", e.name, e.residual);
        }
    }

    #[test]
    fn omega_21_at_unit_params() {
        let fx = ToyFixtures::closed_form(&ToyParams::new(1.0, 1.0, 1.0).unwrap());
        let expected = real3([[0.0, 1.0, 0.0], [0.0, 1.0, 1.0], [1.0, -1.0, 2.0]]);
        assert_eq!(fx.omega_21, expected);
        let [_, o2, o1] = factors(&ToyParams::new(1.0, 1.0, 1.0).unwrap());
        let direct = &(&o2 * &o1) * &o2.inverse(&Tolerance::default()).unwrap();
        assert!(direct.rel_distance(&expected) < 1e-14);
    }

    #[test]
    fn random_points_are_isospectral() {
        let tol = Tolerance::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let p = ToyParams::new(
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            )
            .unwrap();
            let inst = build(p, &tol).unwrap();
            let ev = inst.hamiltonian.eigenvalues().unwrap();
            assert!(spectral_distance(&ev, &target_spectrum()) < 1e-9, "{p:?}");
        }
    }

    #[test]
    fn pairings_are_quasi_hermitian() {
        let tol = Tolerance::default();
        let inst = build(ToyParams::new(0.3, 0.2, 0.1).unwrap(), &tol).unwrap();
        let fx = &inst.fixtures;
        let theta = metrics_from_dyson(&inst.chain, &tol)
            .unwrap()
            .total_metric();
        let pairs = [
            (&inst.target, ComplexMatrix::identity(3)),
            (&fx.h21, fx.z3.clone()),
            (&fx.h1, fx.z3z2.clone()),
            (&inst.hamiltonian, theta),
        ];
        for (h, metric) in pairs {
            let ctx = MetricContext::new(metric, &tol).unwrap();
            assert!(is_quasi_hermitian(h, &ctx, &tol).residual < 1e-10);
        }
    }

    #[test]
    fn genericity_flags() {
        assert!(ToyParams::new(0.3, 0.2, 0.1)
            .unwrap()
            .is_generic(GENERICITY_MARGIN));
        assert!(!ToyParams::new(1.0, -1.0, 0.5)
            .unwrap()
            .is_generic(GENERICITY_MARGIN));
        assert!(!ToyParams::new(0.5, 1.0, 1.0)
            .unwrap()
            .is_generic(GENERICITY_MARGIN));
        assert!(ToyParams::new(f64::NAN, 0.0, 0.0).is_err());
    }
}
