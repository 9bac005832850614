//! Schrödinger evolution `i dψ/dt = Hψ` (ħ = 1) with the physical norm
//! `⟨ψ|P|ψ⟩` tracked along the trajectory.

use serde::{Deserialize, Serialize};

use crate::chains::DysonChain;
use crate::conjugation::MetricContext;
use crate::error::{Error, Result};
use crate::lattice::representation;
use crate::matkernel::{check_dims, ComplexMatrix, Tolerance, C64};

/// Largest `step·ρ(H)` accepted by the RK4 integrator; the stability region
/// of classical RK4 reaches `2√2` on the imaginary axis.
pub const RK4_STABILITY_LIMIT: f64 = 2.0 * std::f64::consts::SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Method {
    #[default]
    ExactDiagonalization,
    Rk4 {
        step: f64,
    },
}

#[derive(Debug, Clone)]
pub struct EvolutionSpec {
    pub hamiltonian: ComplexMatrix,
    pub metric: ComplexMatrix,
    pub initial_state: Vec<C64>,
    pub t_final: f64,
    /// Number of equal intervals; the trace has `n_samples + 1` instants.
    pub n_samples: usize,
    pub method: Method,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionTrace {
    pub times: Vec<f64>,
    pub states: Vec<Vec<C64>>,
    pub physical_norms: Vec<f64>,
    /// `max_t |n(t) − n(0)| / n(0)`.
    pub max_norm_drift: f64,
}

fn quadratic_form(p: &ComplexMatrix, x: &[C64], y: &[C64]) -> C64 {
    let py = p.mul_vec(y);
    x.iter().zip(&py).map(|(a, b)| a.conj() * b).sum()
}

/// `⟨ψ|P|ψ⟩`.
pub fn physical_norm(metric: &ComplexMatrix, state: &[C64]) -> f64 {
    quadratic_form(metric, state, state).re
}

fn validate(spec: &EvolutionSpec, tol: &Tolerance) -> Result<()> {
    let n = spec.hamiltonian.dim();
    check_dims(n, spec.metric.dim())?;
    check_dims(n, spec.initial_state.len())?;
    MetricContext::new(spec.metric.clone(), tol)?;
    if spec.initial_state.iter().all(|z| *z == C64::new(0.0, 0.0)) {
        return Err(Error::InvalidParameter("initial state is zero".into()));
    }
    if spec
        .initial_state
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(Error::InvalidParameter(
            "initial state is not finite".into(),
        ));
    }
    if !(spec.t_final.is_finite() && spec.t_final >= 0.0) {
        return Err(Error::InvalidParameter(
            "t_final must be finite and nonnegative".into(),
        ));
    }
    if spec.n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be positive".into()));
    }
    if let Method::Rk4 { step } = spec.method {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidParameter("rk4 step must be positive".into()));
        }
    }
    Ok(())
}

pub fn propagate(spec: &EvolutionSpec, tol: &Tolerance) -> Result<EvolutionTrace> {
    validate(spec, tol)?;
    let times: Vec<f64> = (0..=spec.n_samples)
        .map(|i| spec.t_final * i as f64 / spec.n_samples as f64)
        .collect();
    let states = match spec.method {
        Method::ExactDiagonalization => exact_states(spec, &times, tol)?,
        Method::Rk4 { step } => rk4_states(spec, &times, step)?,
    };
    let physical_norms: Vec<f64> = states
        .iter()
        .map(|s| physical_norm(&spec.metric, s))
        .collect();
    let n0 = physical_norms[0];
    let max_norm_drift = physical_norms
        .iter()
        .map(|n| (n - n0).abs() / n0)
        .fold(0.0, f64::max);
    Ok(EvolutionTrace {
        times,
        states,
        physical_norms,
        max_norm_drift,
    })
}

fn exact_states(spec: &EvolutionSpec, times: &[f64], tol: &Tolerance) -> Result<Vec<Vec<C64>>> {
    let eig = spec.hamiltonian.eigen_decomposition(tol)?;
    let coeffs = eig.inverse.mul_vec(&spec.initial_state);
    Ok(times
        .iter()
        .map(|&t| {
            let phased: Vec<C64> = coeffs
                .iter()
                .zip(&eig.values)
                .map(|(c, l)| c * (C64::new(0.0, -t) * l).exp())
                .collect();
            eig.vectors.mul_vec(&phased)
        })
        .collect())
}

fn rk4_states(spec: &EvolutionSpec, times: &[f64], step: f64) -> Result<Vec<Vec<C64>>> {
    let radius = spec
        .hamiltonian
        .eigenvalues()?
        .iter()
        .map(|l| l.norm())
        .fold(0.0, f64::max);
    if step * radius > RK4_STABILITY_LIMIT {
        return Err(Error::StepTooLarge {
            step,
            bound: RK4_STABILITY_LIMIT / radius,
        });
    }
    // f(ψ) = −iHψ
    let a = spec.hamiltonian.scale(C64::new(0.0, -1.0));
    let axpy = |x: &[C64], k: &[C64], c: f64| -> Vec<C64> {
        x.iter().zip(k).map(|(x, k)| x + k * c).collect()
    };
    let mut psi = spec.initial_state.clone();
    let mut out = vec![psi.clone()];
    for w in times.windows(2) {
        let span = w[1] - w[0];
        let n_steps = (span / step - 1e-9).ceil().max(1.0) as usize;
        let h = span / n_steps as f64;
        for _ in 0..n_steps {
            let k1 = a.mul_vec(&psi);
            let k2 = a.mul_vec(&axpy(&psi, &k1, h / 2.0));
            let k3 = a.mul_vec(&axpy(&psi, &k2, h / 2.0));
            let k4 = a.mul_vec(&axpy(&psi, &k3, h));
            for i in 0..psi.len() {
                psi[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
            }
        }
        out.push(psi.clone());
    }
    Ok(out)
}

/// Trajectories of one state followed in several representations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub metric_depths: Vec<usize>,
    pub times: Vec<f64>,
    /// Physical norms divided by the initial norm, per metric depth.
    pub norms: Vec<Vec<f64>>,
    /// `⟨ψ|Θ_k Λ_k|ψ⟩ / ⟨ψ|Θ_k|ψ⟩`, per metric depth.
    pub expectations: Vec<Vec<C64>>,
    pub max_norm_deviation: f64,
    pub max_expectation_deviation: f64,
}

/// Evolves `V_k·ψ` under `H_k` with metric `Θ_k` for each requested metric
/// depth. The observable is given in the working representation and mapped
/// to `V_k·Λ·V_k⁻¹`.
#[allow(clippy::too_many_arguments)]
pub fn compare_representations(
    h: &ComplexMatrix,
    chain: &DysonChain,
    metric_depths: &[usize],
    state: &[C64],
    observable: &ComplexMatrix,
    t_final: f64,
    n_samples: usize,
    tol: &Tolerance,
) -> Result<AgreementReport> {
    if metric_depths.is_empty() {
        return Err(Error::EmptyInput);
    }
    check_dims(h.dim(), observable.dim())?;
    let mut times = Vec::new();
    let mut norms = Vec::new();
    let mut expectations = Vec::new();
    for &k in metric_depths {
        let rep = representation(h, chain, k, tol)?;
        let v_inv = chain.partial_product_inverse(rep.dyson_depth, 1);
        let mapped = &(&rep.transform * observable) * &v_inv;
        let spec = EvolutionSpec {
            hamiltonian: rep.physical_hamiltonian.clone(),
            metric: rep.physical_metric.clone(),
            initial_state: rep.transform.mul_vec(state),
            t_final,
            n_samples,
            method: Method::ExactDiagonalization,
        };
        let trace = propagate(&spec, tol)?;
        let n0 = trace.physical_norms[0];
        norms.push(
            trace
                .physical_norms
                .iter()
                .map(|n| n / n0)
                .collect::<Vec<_>>(),
        );
        let theta_l = &rep.physical_metric * &mapped;
        expectations.push(
            trace
                .states
                .iter()
                .zip(&trace.physical_norms)
                .map(|(s, n)| quadratic_form(&theta_l, s, s) / *n)
                .collect::<Vec<_>>(),
        );
        times = trace.times;
    }
    let spread = |series: &[Vec<C64>]| -> f64 {
        (0..times.len())
            .map(|i| {
                let mut m: f64 = 0.0;
                for a in series {
                    for b in series {
                        m = m.max((a[i] - b[i]).norm());
                    }
                }
                m
            })
            .fold(0.0, f64::max)
    };
    let norm_series: Vec<Vec<C64>> = norms
        .iter()
        .map(|v| v.iter().map(|&x| C64::new(x, 0.0)).collect())
        .collect();
    Ok(AgreementReport {
        metric_depths: metric_depths.to_vec(),
        max_norm_deviation: spread(&norm_series),
        max_expectation_deviation: spread(&expectations),
        times,
        norms,
        expectations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::metrics_from_dyson;
    use crate::toymodel::{build, ToyParams};

    fn state() -> Vec<C64> {
        vec![C64::new(0.3, 0.1), C64::new(-0.7, 0.2), C64::new(0.5, -0.4)]
    }

    fn toy_spec(method: Method, right_metric: bool) -> EvolutionSpec {
        let tol = Tolerance::default();
        let inst = build(ToyParams::new(0.3, 0.2, 0.1).unwrap(), &tol).unwrap();
        let metric = if right_metric {
            metrics_from_dyson(&inst.chain, &tol)
                .unwrap()
                .total_metric()
        } else {
            ComplexMatrix::identity(3)
        };
        EvolutionSpec {
            hamiltonian: inst.hamiltonian,
            metric,
            initial_state: state(),
            t_final: 10.0,
            n_samples: 200,
            method,
        }
    }

    #[test]
    fn hermitian_keeps_euclidean_norm() {
        let tol = Tolerance::default();
        let h = ComplexMatrix::from_rows(&[
            [C64::new(1.0, 0.0), C64::new(0.5, -0.2)],
            [C64::new(0.5, 0.2), C64::new(-2.0, 0.0)],
        ])
        .unwrap();
        let spec = EvolutionSpec {
            hamiltonian: h,
            metric: ComplexMatrix::identity(2),
            initial_state: vec![C64::new(1.0, 0.0), C64::new(0.0, 2.0)],
            t_final: 10.0,
            n_samples: 50,
            method: Method::ExactDiagonalization,
        };
        assert!(propagate(&spec, &tol).unwrap().max_norm_drift < 1e-10);
    }

    #[test]
    fn toy_theta_norm_is_conserved_identity_norm_is_not() {
        let tol = Tolerance::default();
        let good = propagate(&toy_spec(Method::ExactDiagonalization, true), &tol).unwrap();
        assert!(good.max_norm_drift < 1e-8, "{}", good.max_norm_drift);
        assert!(good.physical_norms.iter().all(|n| *n > 0.0));
        let bad = propagate(&toy_spec(Method::ExactDiagonalization, false), &tol).unwrap();
        assert!(bad.max_norm_drift > 1e-3);
    }

    #[test]
    fn rk4_matches_exact_and_is_fourth_order_in_the_state() {
        let tol = Tolerance::default();
        let exact = propagate(&toy_spec(Method::ExactDiagonalization, true), &tol).unwrap();
        let err = |step: f64| {
            let tr = propagate(&toy_spec(Method::Rk4 { step }, true), &tol).unwrap();
            let a = tr.states.last().unwrap();
            let b = exact.states.last().unwrap();
            (
                a.iter()
                    .zip(b)
                    .map(|(x, y)| (x - y).norm_sqr())
                    .sum::<f64>()
                    .sqrt(),
                tr.max_norm_drift,
            )
        };
        let (e1, d1) = err(0.025);
        let (e2, d2) = err(0.0125);
        let state_ratio = e1 / e2;
        assert!((14.0..18.0).contains(&state_ratio), "{state_ratio}");
        // the metric norm drifts at one order higher than the state error
        let drift_ratio = d1 / d2;
        assert!((28.0..36.0).contains(&drift_ratio), "{drift_ratio}");
    }

    #[test]
    fn rk4_rejects_unstable_step() {
        let tol = Tolerance::default();
        assert!(matches!(
            propagate(&toy_spec(Method::Rk4 { step: 1.0 }, true), &tol),
            Err(Error::StepTooLarge { .. })
        ));
    }

    #[test]
    fn invalid_specs() {
        let tol = Tolerance::default();
        let mut spec = toy_spec(Method::ExactDiagonalization, true);
        spec.initial_state = vec![C64::new(0.0, 0.0); 3];
        assert!(propagate(&spec, &tol).is_err());
        let mut spec = toy_spec(Method::ExactDiagonalization, true);
        spec.metric = ComplexMatrix::from_real_diagonal(&[1.0, -1.0, 1.0]).unwrap();
        assert!(matches!(
            propagate(&spec, &tol),
            Err(Error::NotPositiveDefinite { .. })
        ));
        let mut spec = toy_spec(Method::ExactDiagonalization, true);
        spec.hamiltonian =
            ComplexMatrix::from_real_rows(&[[1.0, 1.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]])
                .unwrap();
        spec.metric = ComplexMatrix::identity(3);
        assert!(matches!(
            propagate(&spec, &tol),
            Err(Error::NotDiagonalizable { .. })
        ));
    }

    #[test]
    fn representations_agree_on_toy_model() {
        let tol = Tolerance::default();
        let inst = build(ToyParams::new(0.3, 0.2, 0.1).unwrap(), &tol).unwrap();
        for observable in [&inst.target, &inst.hamiltonian] {
            let rep = compare_representations(
                &inst.hamiltonian,
                &inst.chain,
                &[0, 1, 2, 3],
                &state(),
                observable,
                10.0,
                100,
                &tol,
            )
            .unwrap();
            assert!(rep.max_expectation_deviation < 1e-8);
            assert!(rep.max_norm_deviation < 1e-8);
        }
    }

    #[test]
    fn zero_time_and_identity_chain() {
        let tol = Tolerance::default();
        let inst = build(ToyParams::new(0.3, 0.2, 0.1).unwrap(), &tol).unwrap();
        let rep = compare_representations(
            &inst.hamiltonian,
            &inst.chain,
            &[0, 3],
            &state(),
            &inst.target,
            0.0,
            1,
            &tol,
        )
        .unwrap();
        assert!(rep.norms.iter().flatten().all(|n| *n == 1.0));

        let chain = DysonChain::identity(2, 1);
        let h = ComplexMatrix::from_real_rows(&[[1.0, 0.2], [0.2, 2.0]]).unwrap();
        let psi = [C64::new(1.0, 0.0), C64::new(0.5, 0.5)];
        let rep = compare_representations(&h, &chain, &[0, 1], &psi, &h, 5.0, 20, &tol).unwrap();
        assert_eq!(rep.expectations[0], rep.expectations[1]);
        assert_eq!(rep.norms[0], rep.norms[1]);
    }
}
