use serde::{Deserialize, Serialize};

use hermitizer::chains::CumulativeCertificate;
use hermitizer::conjugation::{is_quasi_hermitian, MetricContext};
use hermitizer::lattice::{
    all_representations, build_lattice, census, enumerate_paths, Representation,
};
use hermitizer::scoring::{score, ComplexityScore};
use hermitizer::{ComplexMatrix, Tolerance};

use crate::error::CliResult;
use crate::model::{encode_matrix, MatrixRows, Model};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentationEntry {
    pub metric_depth: usize,
    pub dyson_depth: usize,
    pub physical_hamiltonian: MatrixRows,
    pub physical_metric: MatrixRows,
    pub quasi_hermiticity_residual: f64,
    pub spectrum: Vec<[f64; 2]>,
    pub score: ComplexityScore,
    /// The pair passes the quasi-Hermiticity check.
    pub physical: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSummary {
    pub steps_remaining: usize,
    pub dyson_depth: usize,
    pub terminal: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equivalence_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSummary {
    pub node_count: usize,
    pub path_count: u64,
    pub per_terminal: Vec<u64>,
    pub nodes: Vec<NodeSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentationReport {
    pub dimension: usize,
    pub n_factors: usize,
    pub representations: Vec<RepresentationEntry>,
    pub lattice: LatticeSummary,
}

pub fn entry(
    rep: &Representation,
    n_par: Option<usize>,
    tol: &Tolerance,
) -> CliResult<RepresentationEntry> {
    let ctx = MetricContext::new(rep.physical_metric.clone(), tol)?;
    let qh = is_quasi_hermitian(&rep.physical_hamiltonian, &ctx, tol);
    Ok(RepresentationEntry {
        metric_depth: rep.metric_depth,
        dyson_depth: rep.dyson_depth,
        physical_hamiltonian: encode_matrix(&rep.physical_hamiltonian),
        physical_metric: encode_matrix(&rep.physical_metric),
        quasi_hermiticity_residual: qh.residual,
        spectrum: rep
            .physical_hamiltonian
            .eigenvalues()?
            .iter()
            .map(|z| [z.re, z.im])
            .collect(),
        score: score(rep, tol, n_par),
        physical: qh.passed,
    })
}

pub fn lattice_summary(
    h: &ComplexMatrix,
    model: &Model,
    tol: &Tolerance,
) -> CliResult<LatticeSummary> {
    let chain = model.chain()?;
    let lattice = build_lattice(h, chain, tol)?;
    let paths = enumerate_paths(chain.n_factors())?;
    let c = census(&paths)?;
    Ok(LatticeSummary {
        node_count: lattice.nodes().len(),
        path_count: c.path_count,
        per_terminal: c.per_terminal,
        nodes: lattice
            .nodes()
            .iter()
            .map(|n| NodeSummary {
                steps_remaining: n.index.k,
                dyson_depth: n.index.d,
                terminal: n.is_physical(),
                equivalence_residual: n.equivalence_residual,
            })
            .collect(),
    })
}

pub fn representation_report(model: &Model, tol: &Tolerance) -> CliResult<RepresentationReport> {
    let chain = model.chain()?;
    let h = model.hamiltonian()?;
    let representations = all_representations(h, chain, tol)?
        .iter()
        .map(|rep| entry(rep, model.n_par(rep.metric_depth), tol))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(RepresentationReport {
        dimension: h.dim(),
        n_factors: chain.n_factors(),
        representations,
        lattice: lattice_summary(h, model, tol)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairingCheck {
    pub metric_depth: usize,
    pub residual: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    /// Cumulative metric checks, `Y_N` first.
    pub chain: CumulativeCertificate,
    pub pairings: Vec<PairingCheck>,
    pub passed: bool,
}

pub fn score_table_csv(scores: &[ComplexityScore]) -> String {
    let mut out =
        String::from("metric_depth,n_zero,n_par,nonhermiticity,metric_condition,bandwidth\n");
    for s in scores {
        out.push_str(&format!(
            "{},{},{},{:e},{:e},{}\n",
            s.metric_depth,
            s.n_zero,
            s.n_par.map(|v| v.to_string()).unwrap_or_default(),
            s.nonhermiticity,
            s.metric_condition,
            s.bandwidth
        ));
    }
    out
}

pub fn score_table_text(scores: &[ComplexityScore]) -> String {
    let mut out = format!(
        "{:>4} {:>6} {:>6} {:>14} {:>14} {:>9}\n",
        "k", "N_zero", "N_par", "nonherm", "cond(metric)", "bandwidth"
    );
    for s in scores {
        out.push_str(&format!(
            "{:>4} {:>6} {:>6} {:>14.6e} {:>14.6e} {:>9}\n",
            s.metric_depth,
            s.n_zero,
            s.n_par.map(|v| v.to_string()).unwrap_or_else(|| "-".into()),
            s.nonhermiticity,
            s.metric_condition,
            s.bandwidth
        ));
    }
    out
}
