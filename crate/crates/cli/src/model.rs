//! JSON model files.
//!
//! Complex numbers are `[re, im]` pairs and matrices are lists of rows.
//! Factor lists follow `factor_order` (descending by default, i.e. in the
//! order the product is written).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use hermitizer::chains::{dyson_from_metrics, validate, CumulativeCertificate, FactorizationMode};
use hermitizer::{ComplexMatrix, DysonChain, FactorOrder, MetricChain, Tolerance, C64};

use crate::error::{CliError, CliResult};

pub type MatrixRows = Vec<Vec<[f64; 2]>>;

/// Declared parameter counts: one number for the working Hamiltonian, or
/// one per metric depth `k = 0..=N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DeclaredNPar {
    Working(usize),
    PerDepth(Vec<usize>),
}

impl DeclaredNPar {
    pub fn at(&self, metric_depth: usize, n_factors: usize) -> Option<usize> {
        match self {
            DeclaredNPar::Working(v) => (metric_depth == n_factors).then_some(*v),
            DeclaredNPar::PerDepth(v) => v.get(metric_depth).copied(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<MatrixRows>,
    /// Hermitian target `𝔥`; the working Hamiltonian is then `Ω⁻¹𝔥Ω`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_hamiltonian: Option<MatrixRows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dyson_factors: Option<Vec<MatrixRows>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric_factors: Option<Vec<MatrixRows>>,
    #[serde(default)]
    pub factor_order: FactorOrder,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_n_par: Option<DeclaredNPar>,
}

pub fn encode_matrix(m: &ComplexMatrix) -> MatrixRows {
    m.rows()
        .into_iter()
        .map(|row| row.into_iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

pub fn decode_matrix(rows: &MatrixRows, dim: usize, what: &str) -> CliResult<ComplexMatrix> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(CliError::Schema(format!("{what} must be {dim}x{dim}")));
    }
    let rows: Vec<Vec<C64>> = rows
        .iter()
        .map(|r| r.iter().map(|&[re, im]| C64::new(re, im)).collect())
        .collect();
    ComplexMatrix::from_rows(&rows).map_err(|e| CliError::Schema(format!("{what}: {e}")))
}

fn decode_list(list: &[MatrixRows], dim: usize, what: &str) -> CliResult<Vec<ComplexMatrix>> {
    if list.is_empty() {
        return Err(CliError::Schema(format!("{what} is empty")));
    }
    list.iter()
        .enumerate()
        .map(|(i, m)| decode_matrix(m, dim, &format!("{what}[{i}]")))
        .collect()
}

/// How the chain was supplied.
#[derive(Debug, Clone)]
pub enum ChainSource {
    Dyson(DysonChain),
    /// Metric factors with their validation certificate; the Dyson chain is
    /// present only when validation passed.
    Metric {
        chain: MetricChain,
        certificate: CumulativeCertificate,
        dyson: Option<DysonChain>,
    },
}

/// A decoded model with its working Hamiltonian.
#[derive(Debug, Clone)]
pub struct Model {
    pub file: ModelFile,
    pub source: ChainSource,
    /// `None` only when a metric chain failed validation.
    pub hamiltonian: Option<ComplexMatrix>,
}

impl Model {
    /// The Dyson chain, or a validation error when the metric chain is invalid.
    pub fn chain(&self) -> CliResult<&DysonChain> {
        match &self.source {
            ChainSource::Dyson(c) => Ok(c),
            ChainSource::Metric { dyson: Some(c), .. } => Ok(c),
            ChainSource::Metric { certificate, .. } => Err(CliError::Validation(format!(
                "metric factors fail the cumulative consistency check at level(s) {:?}",
                certificate
                    .levels
                    .iter()
                    .filter(|l| !l.passed)
                    .map(|l| l.index)
                    .collect::<Vec<_>>()
            ))),
        }
    }

    pub fn hamiltonian(&self) -> CliResult<&ComplexMatrix> {
        self.chain()?;
        Ok(self
            .hamiltonian
            .as_ref()
            .expect("set whenever the chain is valid"))
    }

    pub fn n_par(&self, metric_depth: usize) -> Option<usize> {
        let n = match &self.source {
            ChainSource::Dyson(c) => c.n_factors(),
            ChainSource::Metric { chain, .. } => chain.n_factors(),
        };
        self.file
            .declared_n_par
            .as_ref()
            .and_then(|d| d.at(metric_depth, n))
    }
}

impl ModelFile {
    pub fn from_json(text: &str) -> CliResult<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> CliResult<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn decode(self, tol: &Tolerance) -> CliResult<Model> {
        let dim = self.dimension;
        if dim == 0 {
            return Err(CliError::Schema("dimension must be positive".into()));
        }
        let source = match (&self.dyson_factors, &self.metric_factors) {
            (Some(d), None) => {
                let factors = decode_list(d, dim, "dyson_factors")?;
                ChainSource::Dyson(DysonChain::with_order(factors, self.factor_order, tol)?)
            }
            (None, Some(m)) => {
                let factors = decode_list(m, dim, "metric_factors")?;
                let chain = MetricChain::with_order(factors, self.factor_order)?;
                let certificate = validate(&chain, tol);
                let dyson = if certificate.passed {
                    Some(dyson_from_metrics(
                        &chain,
                        FactorizationMode::Canonical,
                        tol,
                    )?)
                } else {
                    None
                };
                ChainSource::Metric {
                    chain,
                    certificate,
                    dyson,
                }
            }
            _ => {
                return Err(CliError::Schema(
                    "exactly one of dyson_factors and metric_factors is required".into(),
                ))
            }
        };
        let given = match (&self.hamiltonian, &self.target_hamiltonian) {
            (Some(h), None) => Ok(decode_matrix(h, dim, "hamiltonian")?),
            (None, Some(t)) => Err(decode_matrix(t, dim, "target_hamiltonian")?),
            _ => {
                return Err(CliError::Schema(
                    "exactly one of hamiltonian and target_hamiltonian is required".into(),
                ))
            }
        };
        if let Some(DeclaredNPar::PerDepth(v)) = &self.declared_n_par {
            let n = match &source {
                ChainSource::Dyson(c) => c.n_factors(),
                ChainSource::Metric { chain, .. } => chain.n_factors(),
            };
            if v.len() != n + 1 {
                return Err(CliError::Schema(format!(
                    "declared_n_par lists {} entries, expected {}",
                    v.len(),
                    n + 1
                )));
            }
        }
        let chain = match &source {
            ChainSource::Dyson(c) => Some(c),
            ChainSource::Metric { dyson, .. } => dyson.as_ref(),
        };
        let hamiltonian = match (given, chain) {
            (Ok(h), _) => Some(h),
            (Err(target), Some(chain)) => {
                let n = chain.n_factors();
                Some(&(&chain.partial_product_inverse(n, 1) * &target) * &chain.total_dyson())
            }
            (Err(_), None) => None,
        };
        Ok(Model {
            file: self,
            source,
            hamiltonian,
        })
    }
}
