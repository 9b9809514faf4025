//! Monte Carlo estimate of the number of Bell-pair generation steps.
//!
//! Model: in one step every party takes part in at most one Bell-pair
//! generation. Gates and classical communication take no time. A
//! measurement node resolves as soon as both inputs exist; on the `-1`
//! outcome its whole subtree is rebuilt from scratch while finished work
//! elsewhere is kept. Leaves are only generated when a live subtree needs
//! them, and pending leaves are scanned in pre-order, each firing if both
//! of its parties are still free in the current step.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{evaluate, finalize_parties, Node, NodeKind};
use crate::error::{Error, Result};

/// Shots used when none are requested.
pub const DEFAULT_SHOTS: usize = 100_000;

const CHUNK: usize = 1024;

#[derive(Debug, Clone, Copy)]
enum Flat {
    Leaf { u: usize, v: usize },
    Fuse { left: usize, right: usize },
    Measure { main: usize, ancilla: usize, slot: usize },
}

/// Pre-order flattening; the subtree of node `idx` is `idx..end[idx]`.
struct FlatTree {
    nodes: Vec<Flat>,
    end: Vec<usize>,
    leaves: Vec<usize>,
    measure_prob: Vec<f64>,
}

impl FlatTree {
    fn build(root: &Node, measure_prob: Vec<f64>) -> Self {
        let parties = finalize_parties(root);
        let mut tree = FlatTree {
            nodes: Vec::new(),
            end: Vec::new(),
            leaves: Vec::new(),
            measure_prob,
        };
        let mut leaf_iter = parties.into_iter();
        let mut slot = 0;
        tree.push(root, &mut leaf_iter, &mut slot);
        tree
    }

    fn push(
        &mut self,
        node: &Node,
        parties: &mut impl Iterator<Item = (usize, usize)>,
        slot: &mut usize,
    ) -> usize {
        let idx = self.nodes.len();
        self.nodes.push(Flat::Fuse { left: 0, right: 0 });
        self.end.push(0);
        let flat = match node.kind() {
            NodeKind::Leaf => {
                let (u, v) = parties.next().expect("party per leaf");
                self.leaves.push(idx);
                Flat::Leaf { u, v }
            }
            NodeKind::Fuse { left, right, .. } => {
                let left = self.push(left, parties, slot);
                let right = self.push(right, parties, slot);
                Flat::Fuse { left, right }
            }
            NodeKind::Measure { main, ancilla, .. } => {
                let s = *slot;
                *slot += 1;
                let main = self.push(main, parties, slot);
                let ancilla = self.push(ancilla, parties, slot);
                Flat::Measure {
                    main,
                    ancilla,
                    slot: s,
                }
            }
        };
        self.nodes[idx] = flat;
        self.end[idx] = self.nodes.len();
        idx
    }

    /// Runs one execution and returns the number of generation steps.
    fn run_shot<R: Rng>(&self, rng: &mut R, done: &mut [bool], failures: &mut [u64]) -> u64 {
        done.iter_mut().for_each(|d| *d = false);
        let mut steps = 0;
        loop {
            steps += 1;
            if self.step(rng, done, failures) {
                return steps;
            }
        }
    }

    /// One generation step followed by instantaneous resolution of every
    /// node whose inputs are ready. Returns whether the root is finished.
    fn step<R: Rng>(&self, rng: &mut R, done: &mut [bool], failures: &mut [u64]) -> bool {
        let mut busy = 0u64;
        for &leaf in &self.leaves {
            if done[leaf] {
                continue;
            }
            if let Flat::Leaf { u, v } = self.nodes[leaf] {
                let pair = (1u64 << u) | (1u64 << v);
                if busy & pair == 0 {
                    busy |= pair;
                    done[leaf] = true;
                }
            }
        }
        for idx in (0..self.nodes.len()).rev() {
            if done[idx] {
                continue;
            }
            match self.nodes[idx] {
                Flat::Leaf { .. } => {}
                Flat::Fuse { left, right } => {
                    if done[left] && done[right] {
                        done[idx] = true;
                    }
                }
                Flat::Measure { main, ancilla, slot } => {
                    if done[main] && done[ancilla] {
                        let p = self.measure_prob[slot];
                        if p >= 1.0 || rng.random::<f64>() < p {
                            done[idx] = true;
                        } else {
                            failures[slot] += 1;
                            done[idx + 1..self.end[idx]].iter_mut().for_each(|d| *d = false);
                        }
                    }
                }
            }
        }
        done[0]
    }
}

/// Retry statistics for one measurement node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeRetries {
    pub path: String,
    pub success_probability: f64,
    pub total_failures: u64,
    pub mean_failures_per_shot: f64,
}

/// Summary of a Monte Carlo timing run.
#[derive(Debug, Clone, PartialEq)]
pub struct McReport {
    pub fidelity: f64,
    pub shots: usize,
    pub seed: u64,
    pub mean_steps: f64,
    pub stderr: f64,
    pub p50: u64,
    pub p90: u64,
    pub p99: u64,
    pub min_steps: u64,
    pub max_steps: u64,
    pub deterministic_steps: u64,
    pub retries: Vec<NodeRetries>,
}

impl McReport {
    pub const CSV_HEADER: [&'static str; 8] = [
        "protocol_id",
        "F_bell",
        "shots",
        "mean_steps",
        "stderr",
        "p50",
        "p90",
        "p99",
    ];

    /// One CSV record matching [`Self::CSV_HEADER`].
    pub fn csv_record(&self, protocol_id: &str) -> Vec<String> {
        vec![
            protocol_id.to_string(),
            self.fidelity.to_string(),
            self.shots.to_string(),
            self.mean_steps.to_string(),
            self.stderr.to_string(),
            self.p50.to_string(),
            self.p90.to_string(),
            self.p99.to_string(),
        ]
    }
}

/// Step count when every measurement succeeds.
pub fn deterministic_schedule_length(root: &Node) -> u64 {
    let tree = FlatTree::build(root, vec![1.0; root.measure_count()]);
    let mut done = vec![false; tree.nodes.len()];
    let mut failures = vec![0; tree.measure_prob.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    tree.run_shot(&mut rng, &mut done, &mut failures)
}

fn quantile(sorted: &[u64], q: f64) -> u64 {
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Simulates `shots` executions at Bell fidelity `fidelity`. Shot `s` draws
/// from ChaCha8 stream `s` of `seed`, so results do not depend on threading.
pub fn monte_carlo(root: &Node, fidelity: f64, shots: usize, seed: u64) -> Result<McReport> {
    if shots == 0 {
        return Err(Error::Domain("at least one shot is required".into()));
    }
    if root.n() > 64 {
        return Err(Error::SizeLimit {
            qubits: root.n(),
            limit: 64,
        });
    }
    let eval = evaluate(root, fidelity)?;
    let probs: Vec<f64> = eval.success.iter().map(|s| s.probability).collect();
    let tree = FlatTree::build(root, probs);
    let n_measure = tree.measure_prob.len();

    let chunks: Vec<(Vec<u64>, Vec<u64>)> = (0..shots.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut done = vec![false; tree.nodes.len()];
            let mut failures = vec![0u64; n_measure];
            let range = c * CHUNK..((c + 1) * CHUNK).min(shots);
            let steps = range
                .map(|shot| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(shot as u64);
                    tree.run_shot(&mut rng, &mut done, &mut failures)
                })
                .collect();
            (steps, failures)
        })
        .collect();

    let mut steps = Vec::with_capacity(shots);
    let mut failures = vec![0u64; n_measure];
    for (s, f) in chunks {
        steps.extend(s);
        for (acc, x) in failures.iter_mut().zip(f) {
            *acc += x;
        }
    }
    let mean = steps.iter().map(|&s| s as f64).sum::<f64>() / shots as f64;
    let var = if shots > 1 {
        steps
            .iter()
            .map(|&s| (s as f64 - mean).powi(2))
            .sum::<f64>()
            / (shots - 1) as f64
    } else {
        0.0
    };
    steps.sort_unstable();
    let retries = eval
        .success
        .iter()
        .zip(&failures)
        .map(|(s, &f)| NodeRetries {
            path: s.path.clone(),
            success_probability: s.probability,
            total_failures: f,
            mean_failures_per_shot: f as f64 / shots as f64,
        })
        .collect();
    Ok(McReport {
        fidelity,
        shots,
        seed,
        mean_steps: mean,
        stderr: (var / shots as f64).sqrt(),
        p50: quantile(&steps, 0.5),
        p90: quantile(&steps, 0.9),
        p99: quantile(&steps, 0.99),
        min_steps: steps[0],
        max_steps: steps[shots - 1],
        deterministic_steps: deterministic_schedule_length(root),
        retries,
    })
}
