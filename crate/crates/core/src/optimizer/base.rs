//! Exhaustive base dynamic program.

use std::sync::Arc;

use rayon::prelude::*;

use super::{
    check_grid, fuse_candidate, leaf_entry, max_sub_k, measure_candidate, DpEntry, DpTable,
};
use crate::error::{Error, Result};
use crate::ops::{FusionMap, FusionSpec, LabelMapCache, MeasureMap};
use crate::protocol::{Node, Provenance};
use crate::stabilizer::enumerate_stabilizers;
use crate::state::GhzDiagState;

/// Candidates whose coefficients all lie this close to a stored entry's are
/// treated as duplicates.
pub const DUPLICATE_TOLERANCE: f64 = 1e-12;

const CHUNK: usize = 2048;

enum Block {
    Measure {
        map: Arc<MeasureMap>,
        main_k: usize,
        anc: (usize, usize),
    },
    Fuse {
        map: Arc<FusionMap>,
        left: (usize, usize),
        right: (usize, usize),
    },
}

impl Block {
    fn inputs<'t>(&self, table: &'t DpTable, n: usize) -> (&'t [Arc<DpEntry>], &'t [Arc<DpEntry>]) {
        let (a, b) = match self {
            Block::Measure { main_k, anc, .. } => ((n, *main_k), *anc),
            Block::Fuse { left, right, .. } => (*left, *right),
        };
        (
            table.cell(a.0, a.1).expect("input cell in grid"),
            table.cell(b.0, b.1).expect("input cell in grid"),
        )
    }

    fn evaluate(&self, x: &DpEntry, y: &DpEntry) -> Option<(GhzDiagState, f64)> {
        match self {
            Block::Measure { map, .. } => measure_candidate(map, x, y),
            Block::Fuse { map, .. } => Some((fuse_candidate(map, x, y), 1.0)),
        }
    }

    fn node(&self, x: &DpEntry, y: &DpEntry) -> Arc<Node> {
        match self {
            Block::Measure { map, .. } => {
                Node::measure(x.node.clone(), y.node.clone(), map.stabilizer().mask())
            }
            Block::Fuse { map, .. } => {
                let spec = map.spec();
                Node::fuse(x.node.clone(), spec.i, y.node.clone(), spec.j)
            }
        }
        .expect("block shapes match their cells")
    }
}

/// Operation blocks of cell `(n, k)` in enumeration order.
fn blocks(n: usize, k: usize) -> Result<Vec<Block>> {
    let cache = LabelMapCache::global();
    let top = max_sub_k(n, k);
    let mut out = Vec::new();
    for s in enumerate_stabilizers(n)? {
        let w = s.weight();
        if w - 1 > top {
            continue;
        }
        let map = cache.measure(s);
        for kp in w - 1..=top {
            out.push(Block::Measure {
                map: map.clone(),
                main_k: k - kp,
                anc: (w, kp),
            });
        }
    }
    for n2 in 2..n {
        let n1 = n - n2 + 1;
        for k2 in n2 - 1..=k + 1 - n1 {
            for i in 0..n1 {
                for j in 0..n2 {
                    out.push(Block::Fuse {
                        map: cache.fusion(FusionSpec::new(n1, i, n2, j)?),
                        left: (n1, k - k2),
                        right: (n2, k2),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Bounded buffer sorted by decreasing fidelity.
struct Buffer {
    cap: usize,
    entries: Vec<Arc<DpEntry>>,
}

impl Buffer {
    fn admits(&self, fidelity: f64, state: &GhzDiagState) -> bool {
        if self.entries.len() == self.cap
            && fidelity <= self.entries.last().expect("full buffer").fidelity
        {
            return false;
        }
        !self.entries.iter().any(|e| {
            e.state
                .max_abs_diff(state)
                .is_some_and(|d| d <= DUPLICATE_TOLERANCE)
        })
    }

    fn insert(&mut self, entry: DpEntry) {
        let pos = self.entries.partition_point(|e| e.fidelity >= entry.fidelity);
        self.entries.insert(pos, Arc::new(entry));
        self.entries.truncate(self.cap);
    }
}

fn base_cell(table: &DpTable, n: usize, k: usize) -> Result<Vec<Arc<DpEntry>>> {
    let blocks = blocks(n, k)?;
    let mut buffer = Buffer {
        cap: table.buffer,
        entries: Vec::new(),
    };
    let mut pending: Vec<(usize, usize, usize)> = Vec::with_capacity(CHUNK);
    let flush = |pending: &mut Vec<(usize, usize, usize)>, buffer: &mut Buffer| {
        let results: Vec<_> = pending
            .par_iter()
            .map(|&(b, x, y)| {
                let (xs, ys) = blocks[b].inputs(table, n);
                blocks[b].evaluate(&xs[x], &ys[y])
            })
            .collect();
        for (&(b, x, y), r) in pending.iter().zip(results) {
            let Some((state, p)) = r else { continue };
            if buffer.admits(state.fidelity(), &state) {
                let (xs, ys) = blocks[b].inputs(table, n);
                buffer.insert(DpEntry::new(blocks[b].node(&xs[x], &ys[y]), state, p));
            }
        }
        pending.clear();
    };
    for (b, block) in blocks.iter().enumerate() {
        let (xs, ys) = block.inputs(table, n);
        for x in 0..xs.len() {
            for y in 0..ys.len() {
                pending.push((b, x, y));
                if pending.len() == CHUNK {
                    flush(&mut pending, &mut buffer);
                }
            }
        }
    }
    flush(&mut pending, &mut buffer);
    if buffer.entries.is_empty() {
        return Err(Error::Internal(format!("no feasible protocol for cell ({n}, {k})")));
    }
    Ok(buffer.entries)
}

/// Runs the base dynamic program and returns the filled table; the answer
/// is [`DpTable::final_best`].
///
/// Every candidate of a cell combines all stored entries of the two input
/// cells. A candidate enters the buffer if there is room or it beats the
/// weakest stored fidelity; equal fidelities keep the incumbent.
pub fn base_dp(n_max: usize, k_max: usize, fidelity: f64, buffer: usize) -> Result<DpTable> {
    check_grid(n_max, k_max, fidelity, buffer)?;
    let provenance = Provenance {
        algorithm: "base-dp".into(),
        buffer: Some(buffer),
        ..Default::default()
    };
    let mut table = DpTable::empty(n_max, k_max, buffer, fidelity, provenance);
    table.set(2, 1, vec![Arc::new(leaf_entry(fidelity)?)]);
    // cells sharing k only read cells with smaller k
    for k in 2..=k_max {
        let ns: Vec<usize> = (2..=n_max.min(k + 1)).collect();
        let filled = ns
            .par_iter()
            .map(|&n| base_cell(&table, n, k))
            .collect::<Result<Vec<_>>>()?;
        for (n, entries) in ns.into_iter().zip(filled) {
            table.set(n, k, entries);
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::evaluate;

    #[test]
    fn raw_pair_cell() {
        let t = base_dp(2, 1, 0.83, 4).unwrap();
        let cell = t.cell(2, 1).unwrap();
        assert_eq!(cell.len(), 1);
        assert_eq!(cell[0].fidelity(), 0.83);
        assert_eq!(**cell[0].node(), *Node::leaf());
    }

    #[test]
    fn perfect_fusion() {
        let t = base_dp(3, 2, 1.0, 1).unwrap();
        assert_eq!(t.final_best().fidelity(), 1.0);
    }

    #[test]
    fn perfect_pairs_stay_perfect() {
        for k in 1..8 {
            assert_eq!(base_dp(2, k, 1.0, 2).unwrap().final_best().fidelity(), 1.0);
        }
    }

    #[test]
    fn best_single_selection() {
        // the three (2,2) candidates measure XX, ZZ or YY with a raw ancilla
        let t = base_dp(2, 2, 0.9, 1).unwrap();
        let leaf = crate::state::isotropic_bell(0.9).unwrap();
        let best = enumerate_stabilizers(2)
            .unwrap()
            .into_iter()
            .map(|s| {
                crate::ops::measure_stabilizer(&leaf, s, &leaf)
                    .unwrap()
                    .into_post_state()
                    .unwrap()
                    .fidelity()
            })
            .fold(0.0, f64::max);
        assert_eq!(t.final_best().fidelity(), best);
    }

    #[test]
    fn buffers_sorted_bounded_and_distinct() {
        let t = base_dp(4, 7, 0.9, 3).unwrap();
        for (n, k) in super::super::grid_cells(4, 7) {
            let cell = t.cell(n, k).unwrap();
            assert!(!cell.is_empty() && cell.len() <= 3);
            assert!(cell.windows(2).all(|w| w[0].fidelity() >= w[1].fidelity()));
            for (i, a) in cell.iter().enumerate() {
                for b in &cell[i + 1..] {
                    assert!(a.state().max_abs_diff(b.state()).unwrap() > DUPLICATE_TOLERANCE);
                }
            }
        }
    }

    #[test]
    fn entries_replay_exactly() {
        let t = base_dp(4, 8, 0.87, 2).unwrap();
        for (n, k, e) in t.entries() {
            assert_eq!(e.node().audit().unwrap(), (n, k));
            let replay = evaluate(e.node(), 0.87).unwrap();
            assert!(replay.state.max_abs_diff(e.state()).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| base_dp(4, 9, 0.9, 3).unwrap().best_grid())
        };
        let one = run(1);
        let many = run(4);
        assert_eq!(
            one.iter().map(|c| c.2.to_bits()).collect::<Vec<_>>(),
            many.iter().map(|c| c.2.to_bits()).collect::<Vec<_>>()
        );
    }
}
