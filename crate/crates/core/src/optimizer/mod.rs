//! Dynamic-programming search over the `(n, k)` grid.
//!
//! Cell `(n, k)` holds protocols producing an `n`-party GHZ-diagonal state
//! from `k` isotropic Bell pairs. Cells are filled with `n` outer and `k`
//! inner, each one combining entries of cells computed before it by a
//! non-local stabilizer measurement or a fusion.

mod base;
mod random;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ops::{fuse_with, measure_with, FusionMap, MeasureMap};
use crate::protocol::{Node, Protocol, Provenance};
use crate::state::GhzDiagState;

pub use base::{base_dp, DUPLICATE_TOLERANCE};
pub use random::{
    accept_probability, multi_run, random_dp, MultiRunReport, RandomSearchConfig, RunSummary,
    DEFAULT_TEMPERATURES, FUSION_SAMPLING, GENERATOR,
};

/// Largest `n_max` the search accepts. Measurement tables grow as `4^n`.
pub const OPTIMIZER_MAX_QUBITS: usize = 8;

/// One stored protocol with its exact output state.
#[derive(Debug, Clone)]
pub struct DpEntry {
    node: Arc<Node>,
    state: GhzDiagState,
    fidelity: f64,
    success_probability: f64,
}

impl DpEntry {
    fn new(node: Arc<Node>, state: GhzDiagState, success_probability: f64) -> Self {
        Self {
            node,
            fidelity: state.fidelity(),
            state,
            success_probability,
        }
    }

    pub fn node(&self) -> &Arc<Node> {
        &self.node
    }

    pub fn state(&self) -> &GhzDiagState {
        &self.state
    }

    pub fn fidelity(&self) -> f64 {
        self.fidelity
    }

    /// Success probability of the outermost operation (1 for leaves and fusions).
    pub fn success_probability(&self) -> f64 {
        self.success_probability
    }
}

/// Search results for every cell `2 ≤ n ≤ n_max`, `n − 1 ≤ k ≤ k_max`.
#[derive(Debug, Clone)]
pub struct DpTable {
    n_max: usize,
    k_max: usize,
    buffer: usize,
    fidelity: f64,
    cells: Vec<Vec<Arc<DpEntry>>>,
    provenance: Provenance,
}

impl DpTable {
    fn empty(n_max: usize, k_max: usize, buffer: usize, fidelity: f64, provenance: Provenance) -> Self {
        Self {
            n_max,
            k_max,
            buffer,
            fidelity,
            cells: vec![Vec::new(); (n_max - 1) * (k_max + 1)],
            provenance,
        }
    }

    fn index(&self, n: usize, k: usize) -> Option<usize> {
        (2..=self.n_max)
            .contains(&n)
            .then_some(())
            .filter(|_| k + 1 >= n && k <= self.k_max)
            .map(|_| (n - 2) * (self.k_max + 1) + k)
    }

    fn set(&mut self, n: usize, k: usize, entries: Vec<Arc<DpEntry>>) {
        let idx = self.index(n, k).expect("cell in grid");
        self.cells[idx] = entries;
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn buffer(&self) -> usize {
        self.buffer
    }

    /// Bell fidelity the table was searched at.
    pub fn search_fidelity(&self) -> f64 {
        self.fidelity
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Stored entries of cell `(n, k)`; `None` outside the grid.
    pub fn cell(&self, n: usize, k: usize) -> Option<&[Arc<DpEntry>]> {
        self.index(n, k).map(|i| self.cells[i].as_slice())
    }

    /// Highest-fidelity entry of a cell; the first one wins ties.
    pub fn best(&self, n: usize, k: usize) -> Option<&Arc<DpEntry>> {
        self.cell(n, k)?
            .iter()
            .reduce(|a, b| if b.fidelity > a.fidelity { b } else { a })
    }

    /// Best entry of cell `(n_max, k_max)`.
    pub fn final_best(&self) -> &Arc<DpEntry> {
        self.best(self.n_max, self.k_max).expect("final cell is filled")
    }

    /// `(n, k, best fidelity)` for every cell in grid order.
    pub fn best_grid(&self) -> Vec<(usize, usize, f64)> {
        grid_cells(self.n_max, self.k_max)
            .map(|(n, k)| (n, k, self.best(n, k).map_or(f64::NAN, |e| e.fidelity)))
            .collect()
    }

    /// Every stored entry with its cell.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Arc<DpEntry>)> {
        grid_cells(self.n_max, self.k_max)
            .flat_map(move |(n, k)| self.cell(n, k).unwrap_or(&[]).iter().map(move |e| (n, k, e)))
    }

    /// The final best entry as a protocol carrying this table's provenance.
    pub fn final_protocol(&self) -> Result<Protocol> {
        Protocol::new(self.final_best().node.clone(), self.provenance.clone())
            .with_evaluation(self.fidelity)
    }
}

/// Grid cells in search order.
pub fn grid_cells(n_max: usize, k_max: usize) -> impl Iterator<Item = (usize, usize)> {
    (2..=n_max).flat_map(move |n| (n - 1..=k_max).map(move |k| (n, k)))
}

fn check_grid(n_max: usize, k_max: usize, fidelity: f64, buffer: usize) -> Result<()> {
    if n_max < 2 {
        return Err(Error::Domain(format!("n_max must be at least 2, got {n_max}")));
    }
    if n_max > OPTIMIZER_MAX_QUBITS {
        return Err(Error::SizeLimit {
            qubits: n_max,
            limit: OPTIMIZER_MAX_QUBITS,
        });
    }
    if k_max + 1 < n_max {
        return Err(Error::Domain(format!(
            "k_max = {k_max} cannot connect {n_max} parties"
        )));
    }
    if !(0.0..=1.0).contains(&fidelity) {
        return Err(Error::Domain(format!("Bell fidelity {fidelity} outside [0, 1]")));
    }
    if buffer == 0 {
        return Err(Error::Domain("buffer size must be at least 1".into()));
    }
    Ok(())
}

fn leaf_entry(fidelity: f64) -> Result<DpEntry> {
    Ok(DpEntry::new(Node::leaf(), crate::state::isotropic_bell(fidelity)?, 1.0))
}

/// Largest ancilla `k` for a measurement in cell `(n, k)`; the main input
/// keeps at least `n − 1` pairs.
fn max_sub_k(n: usize, k: usize) -> usize {
    k + 1 - n
}

fn measure_candidate(map: &MeasureMap, main: &DpEntry, ancilla: &DpEntry) -> Option<(GhzDiagState, f64)> {
    let r = measure_with(map, &main.state, &ancilla.state);
    let p = r.success_prob;
    r.into_post_state().ok().filter(|_| p > 0.0).map(|s| (s, p))
}

fn fuse_candidate(map: &FusionMap, left: &DpEntry, right: &DpEntry) -> GhzDiagState {
    fuse_with(map, &left.state, &right.state)
}
