//! Protocol trees: Bell-pair leaves combined by fusions and stabilizer
//! measurements.
//!
//! Subtrees are reference counted so that the search can share building
//! blocks between thousands of candidate protocols without copying them.

mod baselines;
mod format;
mod timing;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ops::{fuse, measure_stabilizer};
use crate::stabilizer::StabilizerIndex;
use crate::state::{isotropic_bell, GhzDiagState};

pub use baselines::{expedient, stringent};
pub use format::{deserialize, serialize, FORMAT_VERSION};
pub use timing::{deterministic_schedule_length, monte_carlo, McReport, DEFAULT_SHOTS};

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    /// One raw Bell pair.
    Leaf,
    /// Fuse qubit `i` of `left` with qubit `j` of `right`.
    Fuse {
        left: Arc<Node>,
        right: Arc<Node>,
        i: usize,
        j: usize,
    },
    /// Measure `stabilizer` on `main`, consuming `ancilla`.
    Measure {
        main: Arc<Node>,
        ancilla: Arc<Node>,
        stabilizer: StabilizerIndex,
    },
}

/// A protocol subtree together with its party count `n` and leaf count `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    kind: NodeKind,
    n: usize,
    k: usize,
}

impl Node {
    pub fn leaf() -> Arc<Node> {
        Arc::new(Node {
            kind: NodeKind::Leaf,
            n: 2,
            k: 1,
        })
    }

    pub fn fuse(left: Arc<Node>, i: usize, right: Arc<Node>, j: usize) -> Result<Arc<Node>> {
        if i >= left.n || j >= right.n {
            return Err(Error::Validation(format!(
                "fusion qubits ({i}, {j}) out of range for sizes ({}, {})",
                left.n, right.n
            )));
        }
        let n = left.n + right.n - 1;
        let k = left.k + right.k;
        Ok(Arc::new(Node {
            kind: NodeKind::Fuse { left, right, i, j },
            n,
            k,
        }))
    }

    pub fn measure(main: Arc<Node>, ancilla: Arc<Node>, mask: u32) -> Result<Arc<Node>> {
        let stabilizer = StabilizerIndex::new(main.n, mask)?;
        if ancilla.n != stabilizer.weight() {
            return Err(Error::Validation(format!(
                "ancilla spans {} parties but {stabilizer} has weight {}",
                ancilla.n,
                stabilizer.weight()
            )));
        }
        let n = main.n;
        let k = main.k + ancilla.k;
        Ok(Arc::new(Node {
            kind: NodeKind::Measure {
                main,
                ancilla,
                stabilizer,
            },
            n,
            k,
        }))
    }

    pub fn kind(&self) -> &NodeKind {
        &self.kind
    }

    /// Number of parties (qubits of the produced state).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of Bell pairs consumed.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of measurement nodes in the tree.
    pub fn measure_count(&self) -> usize {
        match &self.kind {
            NodeKind::Leaf => 0,
            NodeKind::Fuse { left, right, .. } => left.measure_count() + right.measure_count(),
            NodeKind::Measure { main, ancilla, .. } => {
                1 + main.measure_count() + ancilla.measure_count()
            }
        }
    }

    /// Re-derives `n` and `k` from the leaves and checks every local
    /// constraint. Returns `(n, k)`.
    pub fn audit(&self) -> Result<(usize, usize)> {
        let (n, k) = match &self.kind {
            NodeKind::Leaf => (2, 1),
            NodeKind::Fuse { left, right, i, j } => {
                let (ln, lk) = left.audit()?;
                let (rn, rk) = right.audit()?;
                if *i >= ln || *j >= rn {
                    return Err(Error::Validation("fusion index out of range".into()));
                }
                (ln + rn - 1, lk + rk)
            }
            NodeKind::Measure {
                main,
                ancilla,
                stabilizer,
            } => {
                let (mn, mk) = main.audit()?;
                let (an, ak) = ancilla.audit()?;
                if stabilizer.n() != mn || stabilizer.weight() != an {
                    return Err(Error::Validation(format!(
                        "measurement of {stabilizer} on {mn} parties with a {an}-party ancilla"
                    )));
                }
                (mn, mk + ak)
            }
        };
        if (n, k) != (self.n, self.k) {
            return Err(Error::Validation(format!(
                "cached size ({}, {}) disagrees with tree ({n}, {k})",
                self.n, self.k
            )));
        }
        Ok((n, k))
    }
}

/// Where a protocol came from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub algorithm: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub buffer: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fusion_sampling: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<String>,
}

/// Protocol tree plus the metadata written alongside it.
#[derive(Debug, Clone, PartialEq)]
pub struct Protocol {
    pub root: Arc<Node>,
    /// Bell fidelity the protocol was searched or evaluated at.
    pub search_fidelity: Option<f64>,
    pub predicted_fidelity: Option<f64>,
    /// Success probability per measurement node, in pre-order.
    pub success_probabilities: Vec<f64>,
    pub provenance: Provenance,
}

impl Protocol {
    pub fn new(root: Arc<Node>, provenance: Provenance) -> Self {
        Self {
            root,
            search_fidelity: None,
            predicted_fidelity: None,
            success_probabilities: Vec::new(),
            provenance,
        }
    }

    /// Fills the predicted-fidelity metadata by evaluating at `fidelity`.
    pub fn with_evaluation(mut self, fidelity: f64) -> Result<Self> {
        let eval = evaluate(&self.root, fidelity)?;
        self.search_fidelity = Some(fidelity);
        self.predicted_fidelity = Some(eval.state.fidelity());
        self.success_probabilities = eval.success.iter().map(|s| s.probability).collect();
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.root.n
    }

    pub fn k(&self) -> usize {
        self.root.k
    }
}

/// Success probability of one measurement node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSuccess {
    /// Dotted path from the root, e.g. `root.main.ancilla`.
    pub path: String,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub state: GhzDiagState,
    /// One entry per measurement node, in pre-order.
    pub success: Vec<NodeSuccess>,
}

impl Evaluation {
    pub fn min_success_probability(&self) -> f64 {
        self.success
            .iter()
            .map(|s| s.probability)
            .fold(1.0, f64::min)
    }
}

/// Replays the protocol bottom-up with isotropic Bell pairs of fidelity `fidelity`.
pub fn evaluate(root: &Node, fidelity: f64) -> Result<Evaluation> {
    let leaf = isotropic_bell(fidelity)?;
    let mut success = Vec::new();
    let mut path = String::from("root");
    let state = eval_node(root, &leaf, &mut path, &mut success)?;
    Ok(Evaluation { state, success })
}

fn eval_node(
    node: &Node,
    leaf: &GhzDiagState,
    path: &mut String,
    success: &mut Vec<NodeSuccess>,
) -> Result<GhzDiagState> {
    let child = |child: &Node, name: &str, path: &mut String, success: &mut Vec<NodeSuccess>| {
        let len = path.len();
        path.push('.');
        path.push_str(name);
        let r = eval_node(child, leaf, path, success);
        path.truncate(len);
        r
    };
    match &node.kind {
        NodeKind::Leaf => Ok(leaf.clone()),
        NodeKind::Fuse { left, right, i, j } => {
            let a = child(left, "left", path, success)?;
            let b = child(right, "right", path, success)?;
            fuse(&a, *i, &b, *j)
        }
        NodeKind::Measure {
            main,
            ancilla,
            stabilizer,
        } => {
            let slot = success.len();
            success.push(NodeSuccess {
                path: path.clone(),
                probability: f64::NAN,
            });
            let m = child(main, "main", path, success)?;
            let a = child(ancilla, "ancilla", path, success)?;
            let r = measure_stabilizer(&m, *stabilizer, &a)?;
            success[slot].probability = r.success_prob;
            r.into_post_state().map_err(|_| Error::ImpossibleBranch { path: path.clone() })
        }
    }
}

/// Parties `(u, v)` of every leaf in pre-order (left/main before right/ancilla).
///
/// The root spans parties `0..n` in output-qubit order. A fusion hands the
/// first `na` parties to its left input and maps qubit `j` of the right
/// input onto the party of qubit `i`; a measurement pairs ancilla qubit `t`
/// with the `t`-th support qubit of the stabilizer.
pub fn finalize_parties(root: &Node) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(root.k);
    let parties: Vec<usize> = (0..root.n).collect();
    assign(root, &parties, &mut out);
    out
}

fn assign(node: &Node, parties: &[usize], out: &mut Vec<(usize, usize)>) {
    match &node.kind {
        NodeKind::Leaf => out.push((parties[0], parties[1])),
        NodeKind::Fuse { left, right, i, j } => {
            let na = left.n;
            assign(left, &parties[..na], out);
            let mut rest = parties[na..].iter();
            let right_parties: Vec<usize> = (0..right.n)
                .map(|q| {
                    if q == *j {
                        parties[*i]
                    } else {
                        *rest.next().expect("fusion party count")
                    }
                })
                .collect();
            assign(right, &right_parties, out);
        }
        NodeKind::Measure {
            main,
            ancilla,
            stabilizer,
        } => {
            assign(main, parties, out);
            let anc: Vec<usize> = stabilizer.support().iter().map(|&q| parties[q]).collect();
            assign(ancilla, &anc, out);
        }
    }
}

/// Number of Bell-pair halves each party receives over the whole protocol.
pub fn pairs_per_party(root: &Node) -> Vec<usize> {
    let mut count = vec![0; root.n];
    for (u, v) in finalize_parties(root) {
        count[u] += 1;
        count[v] += 1;
    }
    count
}
