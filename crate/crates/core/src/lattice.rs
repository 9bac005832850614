//! The triangular lattice of representation spaces and the Hermitization
//! paths through it.
//!
//! A node is labelled by `k` (steps remaining) and `d` (Dyson steps taken),
//! with `k + d ≤ N`. Starting from the working space `(N, 0)`, each step
//! either amends the inner product, `(k, d) → (k−1, d)`, or applies a Dyson
//! sub-map, `(k, d) → (k−1, d+1)`. Only the terminal nodes `(0, d)` carry a
//! physical picture; a terminal at Dyson depth `d` has metric depth `N − d`.
//!
//! Node contents, with empty products equal to the identity:
//!
//! * ket transform `W = Ω_{k+d}·…·Ω_{k+1}`
//! * node metric `P = Z_N·…·Z_{k+d+1}`
//! * node Hamiltonian `W·H·W⁻¹`

use serde::{Deserialize, Serialize};

use crate::chains::{metrics_from_dyson, DysonChain, MetricChain};
use crate::error::{Error, Result};
use crate::matkernel::{check_dims, ComplexMatrix, Tolerance};

/// Largest factor count accepted by [`enumerate_paths`].
pub const MAX_PATH_FACTORS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeIndex {
    /// Steps remaining (subscript).
    pub k: usize,
    /// Dyson steps taken (superscript).
    pub d: usize,
}

impl NodeIndex {
    pub fn new(k: usize, d: usize) -> Self {
        Self { k, d }
    }

    pub fn is_terminal(&self) -> bool {
        self.k == 0
    }

    pub fn step(&self, choice: Choice) -> Option<NodeIndex> {
        let k = self.k.checked_sub(1)?;
        Some(match choice {
            Choice::Amend => NodeIndex::new(k, self.d),
            Choice::Dyson => NodeIndex::new(k, self.d + 1),
        })
    }
}

#[derive(Debug, Clone)]
pub struct LatticeNode {
    pub index: NodeIndex,
    pub ket_transform: ComplexMatrix,
    pub ket_transform_inverse: ComplexMatrix,
    pub metric: ComplexMatrix,
    pub hamiltonian: ComplexMatrix,
    /// `‖W†PW − Θ‖_F / ‖Θ‖_F`, present on terminal nodes only.
    pub equivalence_residual: Option<f64>,
}

impl LatticeNode {
    pub fn is_physical(&self) -> bool {
        self.index.is_terminal()
    }
}

/// All `(N+1)(N+2)/2` nodes for one Hamiltonian and Dyson chain.
#[derive(Debug, Clone)]
pub struct Lattice {
    n_factors: usize,
    theta: ComplexMatrix,
    nodes: Vec<LatticeNode>,
}

fn row_offset(n: usize, d: usize) -> usize {
    d * (n + 1) - d * d.saturating_sub(1) / 2
}

impl Lattice {
    pub fn n_factors(&self) -> usize {
        self.n_factors
    }

    pub fn metric(&self) -> &ComplexMatrix {
        &self.theta
    }

    /// Nodes ordered by Dyson depth, then by decreasing `k`.
    pub fn nodes(&self) -> &[LatticeNode] {
        &self.nodes
    }

    pub fn node(&self, index: NodeIndex) -> Option<&LatticeNode> {
        if index.k + index.d > self.n_factors {
            return None;
        }
        self.nodes
            .get(row_offset(self.n_factors, index.d) + self.n_factors - index.d - index.k)
    }

    /// Terminal nodes `(0, d)` for `d = 0..=N`.
    pub fn terminals(&self) -> impl Iterator<Item = &LatticeNode> {
        self.nodes.iter().filter(|n| n.index.is_terminal())
    }
}

/// Constructs every lattice node from the closed formulas.
pub fn build_lattice(h: &ComplexMatrix, chain: &DysonChain, tol: &Tolerance) -> Result<Lattice> {
    check_dims(chain.dim(), h.dim())?;
    let n = chain.n_factors();
    let metrics = metrics_from_dyson(chain, tol)?;
    let theta = chain.metric();
    let mut nodes = Vec::with_capacity((n + 1) * (n + 2) / 2);
    for d in 0..=n {
        for k in (0..=n - d).rev() {
            nodes.push(make_node(h, chain, &metrics, &theta, NodeIndex::new(k, d)));
        }
    }
    Ok(Lattice {
        n_factors: n,
        theta,
        nodes,
    })
}

fn make_node(
    h: &ComplexMatrix,
    chain: &DysonChain,
    metrics: &MetricChain,
    theta: &ComplexMatrix,
    index: NodeIndex,
) -> LatticeNode {
    let NodeIndex { k, d } = index;
    let w = chain.partial_product(k + d, k + 1);
    let w_inv = chain.partial_product_inverse(k + d, k + 1);
    let p = metrics.cumulative(k + d + 1);
    let hamiltonian = &(&w * h) * &w_inv;
    let equivalence_residual = index
        .is_terminal()
        .then(|| (&(&w.adjoint() * &p) * &w).rel_distance(theta));
    LatticeNode {
        index,
        ket_transform: w,
        ket_transform_inverse: w_inv,
        metric: p,
        hamiltonian,
        equivalence_residual,
    }
}

/// The Dyson sub-map `M = W·Ω_k·W⁻¹` leading from `(k, d)` to `(k−1, d+1)`,
/// so that `M·W(k, d) = W(k−1, d+1)`.
pub fn diagonal_map(node: &LatticeNode, chain: &DysonChain) -> Result<ComplexMatrix> {
    if node.index.is_terminal() {
        return Err(Error::TerminalNode);
    }
    if node.index.k + node.index.d > chain.n_factors() {
        return Err(Error::IndexOutOfRange {
            index: node.index.k + node.index.d,
            max: chain.n_factors(),
        });
    }
    let omega_k = chain.factor(node.index.k);
    Ok(&(&node.ket_transform * omega_k) * &node.ket_transform_inverse)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Choice {
    /// Amend the inner product by the next metric factor.
    Amend,
    /// Apply the next Dyson sub-map to kets and operators.
    Dyson,
}

/// One path from `(N, 0)` to a terminal node, stored as a bit mask of
/// choices (bit `i` set means step `i + 1` is a Dyson step).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HermitizationPath {
    n_factors: u8,
    mask: u32,
}

impl HermitizationPath {
    pub fn from_choices(choices: &[Choice]) -> Result<Self> {
        if choices.is_empty() {
            return Err(Error::EmptyInput);
        }
        if choices.len() > MAX_PATH_FACTORS {
            return Err(Error::LimitExceeded {
                what: "path length",
                value: choices.len(),
                limit: MAX_PATH_FACTORS,
            });
        }
        let mask = choices
            .iter()
            .enumerate()
            .filter(|(_, c)| **c == Choice::Dyson)
            .fold(0u32, |m, (i, _)| m | (1 << i));
        Ok(Self {
            n_factors: choices.len() as u8,
            mask,
        })
    }

    pub fn n_factors(&self) -> usize {
        self.n_factors as usize
    }

    pub fn choices(&self) -> Vec<Choice> {
        (0..self.n_factors())
            .map(|i| {
                if self.mask & (1 << i) != 0 {
                    Choice::Dyson
                } else {
                    Choice::Amend
                }
            })
            .collect()
    }

    /// `0 = k_0 ≤ k_1 ≤ … ≤ k_N`: Dyson depth after each step.
    pub fn superscripts(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n_factors() + 1);
        out.push(0);
        let mut depth = 0;
        for c in self.choices() {
            if c == Choice::Dyson {
                depth += 1;
            }
            out.push(depth);
        }
        out
    }

    /// The `N + 1` visited nodes, starting at `(N, 0)`.
    pub fn nodes(&self) -> Vec<NodeIndex> {
        let n = self.n_factors();
        self.superscripts()
            .into_iter()
            .enumerate()
            .map(|(step, d)| NodeIndex::new(n - step, d))
            .collect()
    }

    pub fn terminal_depth(&self) -> usize {
        self.mask.count_ones() as usize
    }

    /// Metric depth of the terminal representation, `N − d`.
    pub fn metric_depth(&self) -> usize {
        self.n_factors() - self.terminal_depth()
    }
}

/// Every Hermitization path for `n_factors` steps, generated as monotone
/// superscript sequences with unit increments, in lexicographic order.
pub fn enumerate_paths(n_factors: usize) -> Result<Vec<HermitizationPath>> {
    if n_factors == 0 {
        return Err(Error::InvalidParameter(
            "at least one factor is required".into(),
        ));
    }
    if n_factors > MAX_PATH_FACTORS {
        return Err(Error::LimitExceeded {
            what: "factor count",
            value: n_factors,
            limit: MAX_PATH_FACTORS,
        });
    }
    let mut out = Vec::with_capacity(1 << n_factors);
    extend_paths(n_factors, 0, 0, &mut out);
    Ok(out)
}

fn extend_paths(n: usize, step: usize, mask: u32, out: &mut Vec<HermitizationPath>) {
    if step == n {
        out.push(HermitizationPath {
            n_factors: n as u8,
            mask,
        });
        return;
    }
    // k_{step+1} = k_step first, then k_step + 1
    extend_paths(n, step + 1, mask, out);
    extend_paths(n, step + 1, mask | (1 << step), out);
}

/// Node and path counts of a lattice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathCensus {
    pub n_factors: usize,
    pub node_count: usize,
    pub path_count: u64,
    /// Number of paths ending at `(0, d)`, indexed by `d`.
    pub per_terminal: Vec<u64>,
}

pub fn census(paths: &[HermitizationPath]) -> Result<PathCensus> {
    let n = paths.first().ok_or(Error::EmptyInput)?.n_factors();
    let mut per_terminal = vec![0u64; n + 1];
    for p in paths {
        per_terminal[p.terminal_depth()] += 1;
    }
    Ok(PathCensus {
        n_factors: n,
        node_count: (n + 1) * (n + 2) / 2,
        path_count: paths.len() as u64,
        per_terminal,
    })
}

fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// Number of paths that traverse the edge leaving `from` by `choice`:
/// `C(N−k, d)` ways to reach `(k, d)` times `2^{k−1}` continuations.
pub fn edge_path_count(n_factors: usize, from: NodeIndex, choice: Choice) -> Option<u64> {
    let _ = from.step(choice)?;
    if from.k + from.d > n_factors {
        return None;
    }
    Some(binomial(n_factors - from.k, from.d) << (from.k - 1))
}

/// A terminal representation: physical Hamiltonian with its physical metric.
#[derive(Debug, Clone)]
pub struct Representation {
    /// Number of metric factors retained, `0..=N`.
    pub metric_depth: usize,
    /// `N − metric_depth`.
    pub dyson_depth: usize,
    pub physical_hamiltonian: ComplexMatrix,
    /// `Θ_k = Z_N·…·Z_{N−k+1}`.
    pub physical_metric: ComplexMatrix,
    /// `V = Ω_{N−k}·…·Ω_1`.
    pub transform: ComplexMatrix,
}

/// Representation at metric depth `k`: `k = N` keeps `(H, Θ)`, `k = 0` gives
/// `(ΩHΩ⁻¹, I)`.
pub fn representation(
    h: &ComplexMatrix,
    chain: &DysonChain,
    metric_depth: usize,
    tol: &Tolerance,
) -> Result<Representation> {
    check_dims(chain.dim(), h.dim())?;
    let n = chain.n_factors();
    if metric_depth > n {
        return Err(Error::IndexOutOfRange {
            index: metric_depth,
            max: n,
        });
    }
    let metrics = metrics_from_dyson(chain, tol)?;
    Ok(representation_from(h, chain, &metrics, metric_depth))
}

/// All `N + 1` representations, ordered by metric depth.
pub fn all_representations(
    h: &ComplexMatrix,
    chain: &DysonChain,
    tol: &Tolerance,
) -> Result<Vec<Representation>> {
    check_dims(chain.dim(), h.dim())?;
    let metrics = metrics_from_dyson(chain, tol)?;
    Ok((0..=chain.n_factors())
        .map(|k| representation_from(h, chain, &metrics, k))
        .collect())
}

fn representation_from(
    h: &ComplexMatrix,
    chain: &DysonChain,
    metrics: &MetricChain,
    k: usize,
) -> Representation {
    let n = chain.n_factors();
    let dyson_depth = n - k;
    let v = chain.partial_product(dyson_depth, 1);
    let v_inv = chain.partial_product_inverse(dyson_depth, 1);
    Representation {
        metric_depth: k,
        dyson_depth,
        physical_hamiltonian: &(&v * h) * &v_inv,
        physical_metric: metrics.cumulative(dyson_depth + 1),
        transform: v,
    }
}
