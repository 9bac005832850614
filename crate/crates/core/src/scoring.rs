//! Complexity scores of physical representations and a weighted ranking.
//!
//! Parameter counts are never inferred from numbers; they are carried along
//! as metadata from whatever generated the model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Representation;
use crate::matkernel::Tolerance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityScore {
    pub metric_depth: usize,
    pub n_zero: usize,
    pub n_par: Option<usize>,
    /// `‖A − A†‖_F / ‖A‖_F` of the physical Hamiltonian.
    pub nonhermiticity: f64,
    /// Condition number of the paired metric.
    pub metric_condition: f64,
    pub bandwidth: usize,
}

pub fn score(
    rep: &Representation,
    tol: &Tolerance,
    declared_n_par: Option<usize>,
) -> ComplexityScore {
    let h = &rep.physical_hamiltonian;
    ComplexityScore {
        metric_depth: rep.metric_depth,
        n_zero: h.count_zeros(tol.zero_abs),
        n_par: declared_n_par,
        nonhermiticity: h.hermiticity_residual(),
        metric_condition: rep.physical_metric.condition_number().max(1.0),
        bandwidth: h.bandwidth(tol.zero_abs),
    }
}

/// Weights of the three ranking terms. The defaults are a convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub n_zero: f64,
    pub nonhermiticity: f64,
    /// Applied to `log10(metric_condition)`.
    pub log_condition: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Self {
            n_zero: 1.0,
            nonhermiticity: 1.0,
            log_condition: 0.1,
        }
    }
}

impl Weights {
    pub fn new(n_zero: f64, nonhermiticity: f64, log_condition: f64) -> Result<Self> {
        let w = [n_zero, nonhermiticity, log_condition];
        if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter(
                "weights must be finite and nonnegative".into(),
            ));
        }
        if w.iter().all(|v| *v == 0.0) {
            return Err(Error::InvalidParameter(
                "weights must not all be zero".into(),
            ));
        }
        Ok(Self {
            n_zero,
            nonhermiticity,
            log_condition,
        })
    }

    /// Higher is preferred.
    pub fn value(&self, s: &ComplexityScore) -> f64 {
        let mut v = self.n_zero * s.n_zero as f64 - self.nonhermiticity * s.nonhermiticity;
        if self.log_condition != 0.0 {
            v -= self.log_condition * s.metric_condition.log10();
        }
        v
    }
}

/// Scores in descending preference; ties go to the lower metric depth.
pub fn rank(scores: &[ComplexityScore], weights: &Weights) -> Result<Vec<ComplexityScore>> {
    if scores.is_empty() {
        return Err(Error::EmptyInput);
    }
    let weights = Weights::new(
        weights.n_zero,
        weights.nonhermiticity,
        weights.log_condition,
    )?;
    let mut keyed: Vec<(f64, &ComplexityScore)> =
        scores.iter().map(|s| (weights.value(s), s)).collect();
    keyed.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then_with(|| a.1.metric_depth.cmp(&b.1.metric_depth))
    });
    Ok(keyed.into_iter().map(|(_, s)| s.clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matkernel::ComplexMatrix;
    use crate::toymodel::{build, ToyParams, DECLARED_N_PAR, GENERICITY_MARGIN};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn toy_scores(p: ToyParams) -> Vec<ComplexityScore> {
        let tol = Tolerance::default();
        let inst = build(p, &tol).unwrap();
        inst.representations(&tol)
            .unwrap()
            .iter()
            .map(|rep| score(rep, &tol, Some(DECLARED_N_PAR[rep.metric_depth])))
            .collect()
    }

    fn plain(k: usize, n_zero: usize) -> ComplexityScore {
        ComplexityScore {
            metric_depth: k,
            n_zero,
            n_par: None,
            nonhermiticity: 0.0,
            metric_condition: 1.0,
            bandwidth: 0,
        }
    }

    #[test]
    fn toy_zero_counts_at_reference_point() {
        let scores = toy_scores(ToyParams::new(0.3, 0.2, 0.1).unwrap());
        let zeros: Vec<usize> = scores.iter().map(|s| s.n_zero).collect();
        assert_eq!(zeros, vec![6, 4, 2, 0]);
        let pars: Vec<Option<usize>> = scores.iter().map(|s| s.n_par).collect();
        assert_eq!(pars, vec![Some(0), Some(1), Some(2), Some(3)]);
        assert!(scores[0].nonhermiticity < 1e-14);
        assert!(scores[3].nonhermiticity > 0.1);
    }

    #[test]
    fn toy_zero_counts_at_random_generic_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut seen = 0;
        while seen < 25 {
            let p = ToyParams::new(
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            )
            .unwrap();
            if !p.is_generic(GENERICITY_MARGIN) {
                continue;
            }
            seen += 1;
            let zeros: Vec<usize> = toy_scores(p).iter().map(|s| s.n_zero).collect();
            assert_eq!(zeros, vec![6, 4, 2, 0], "{p:?}");
        }
    }

    #[test]
    fn toy_ranking_prefers_textbook_picture() {
        let scores = toy_scores(ToyParams::new(0.3, 0.2, 0.1).unwrap());
        let order: Vec<usize> = rank(&scores, &Weights::default())
            .unwrap()
            .iter()
            .map(|s| s.metric_depth)
            .collect();
        assert_eq!(order, vec![0, 1, 2, 3]);
    }

    #[test]
    fn diagonal_matrix_zero_count() {
        let d = ComplexMatrix::from_real_diagonal(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(d.count_zeros(1e-12), 12);
    }

    #[test]
    fn rank_edge_cases() {
        let w = Weights::default();
        assert!(matches!(rank(&[], &w), Err(Error::EmptyInput)));
        let one = vec![plain(2, 3)];
        assert_eq!(rank(&one, &w).unwrap(), one);
        let tied = vec![plain(3, 1), plain(1, 1)];
        let order: Vec<usize> = rank(&tied, &w)
            .unwrap()
            .iter()
            .map(|s| s.metric_depth)
            .collect();
        assert_eq!(order, vec![1, 3]);
        assert!(Weights::new(0.0, 0.0, 0.0).is_err());
        assert!(Weights::new(-1.0, 0.0, 0.0).is_err());
        assert!(Weights::new(f64::NAN, 1.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn ranking_is_scale_invariant(
            raw in proptest::collection::vec((0usize..10, 0.0f64..2.0, 1.0f64..1e6), 1..8),
            w in (0.0f64..3.0, 0.0f64..3.0, 0.01f64..3.0),
            c in 0.01f64..100.0,
        ) {
            let scores: Vec<ComplexityScore> = raw
                .iter()
                .enumerate()
                .map(|(k, &(z, nh, cond))| ComplexityScore {
                    metric_depth: k,
                    n_zero: z,
                    n_par: None,
                    nonhermiticity: nh,
                    metric_condition: cond,
                    bandwidth: 0,
                })
                .collect();
            let a = Weights::new(w.0, w.1, w.2).unwrap();
            let b = Weights::new(w.0 * c, w.1 * c, w.2 * c).unwrap();
            let ka: Vec<usize> = rank(&scores, &a).unwrap().iter().map(|s| s.metric_depth).collect();
            let kb: Vec<usize> = rank(&scores, &b).unwrap().iter().map(|s| s.metric_depth).collect();
            prop_assert_eq!(ka, kb);
        }
    }
}
