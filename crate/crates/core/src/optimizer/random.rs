//! Randomized dynamic program with annealing-style acceptance.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{
    check_grid, fuse_candidate, grid_cells, leaf_entry, max_sub_k, measure_candidate, DpEntry,
    DpTable,
};
use crate::error::{Error, Result};
use crate::ops::{FusionMap, FusionSpec, LabelMapCache, MeasureMap};
use crate::protocol::{Node, Protocol, Provenance};

/// Name recorded in provenance for the pseudo-random generator.
pub const GENERATOR: &str = "ChaCha8Rng (rand_chacha 0.9), seed_from_u64(seed), stream = run * temperatures + index";

/// How fusion schemes are sampled.
pub const FUSION_SAMPLING: &str = "joint-uniform over (n2, k2, i, j)";

/// 1e-5..9e-5 and 1e-4..9e-4.
pub const DEFAULT_TEMPERATURES: [f64; 18] = [
    1e-5, 2e-5, 3e-5, 4e-5, 5e-5, 6e-5, 7e-5, 8e-5, 9e-5, 1e-4, 2e-4, 3e-4, 4e-4, 5e-4, 6e-4, 7e-4,
    8e-4, 9e-4,
];

/// Consecutive zero-probability proposals tolerated for one slot.
const MAX_REDRAWS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct RandomSearchConfig {
    /// Entries per cell.
    pub buffer: usize,
    /// Temperature for [`random_dp`].
    pub temperature: f64,
    pub seed: u64,
    /// Repetitions per temperature in [`multi_run`].
    pub runs: usize,
    /// Temperatures swept by [`multi_run`]; empty means `[temperature]`.
    pub temperatures: Vec<f64>,
}

impl Default for RandomSearchConfig {
    fn default() -> Self {
        Self {
            buffer: 200,
            temperature: 1e-4,
            seed: 0,
            runs: 1,
            temperatures: Vec::new(),
        }
    }
}

impl RandomSearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.buffer == 0 {
            return Err(Error::Domain("buffer size must be at least 1".into()));
        }
        if self.runs == 0 {
            return Err(Error::Domain("at least one run is required".into()));
        }
        for &t in std::iter::once(&self.temperature).chain(&self.temperatures) {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Domain(format!("temperature must be positive, got {t}")));
            }
        }
        Ok(())
    }

    fn temperature_list(&self) -> Vec<f64> {
        if self.temperatures.is_empty() {
            vec![self.temperature]
        } else {
            self.temperatures.clone()
        }
    }
}

/// Probability of accepting a candidate that changes the fidelity by `delta`.
pub fn accept_probability(delta: f64, temperature: f64) -> f64 {
    if delta > 0.0 {
        1.0
    } else {
        (delta / temperature).exp()
    }
}

fn accepts<R: Rng>(rng: &mut R, delta: f64, temperature: f64) -> bool {
    delta > 0.0 || rng.random::<f64>() < accept_probability(delta, temperature)
}

/// Label maps shared by every cell of a run.
struct Shapes {
    /// Per `n`: stabilizers in mask order with their weights.
    measures: Vec<Vec<(usize, Arc<MeasureMap>)>>,
    /// Per `n`: fusion shapes `(n2, map)` in `(n2, i, j)` order.
    fusions: Vec<Vec<(usize, Arc<FusionMap>)>>,
}

impl Shapes {
    fn new(n_max: usize) -> Result<Self> {
        let cache = LabelMapCache::global();
        let mut measures = vec![Vec::new(); n_max + 1];
        let mut fusions = vec![Vec::new(); n_max + 1];
        for n in 2..=n_max {
            measures[n] = crate::stabilizer::enumerate_stabilizers(n)?
                .into_iter()
                .map(|s| (s.weight(), cache.measure(s)))
                .collect();
            for n2 in 2..n {
                let n1 = n - n2 + 1;
                for i in 0..n1 {
                    for j in 0..n2 {
                        fusions[n].push((n2, cache.fusion(FusionSpec::new(n1, i, n2, j)?)));
                    }
                }
            }
        }
        Ok(Self { measures, fusions })
    }
}

enum Proposal {
    Measure { map: Arc<MeasureMap>, main: (usize, usize), anc: (usize, usize) },
    Fuse { map: Arc<FusionMap>, left: (usize, usize), right: (usize, usize) },
}

/// Feasible operations of one cell.
struct CellSampler<'s> {
    n: usize,
    k: usize,
    top: usize,
    measures: Vec<&'s (usize, Arc<MeasureMap>)>,
    fusions: Vec<&'s (usize, Arc<FusionMap>)>,
    fusion_total: usize,
}

impl<'s> CellSampler<'s> {
    fn new(shapes: &'s Shapes, n: usize, k: usize) -> Self {
        let top = max_sub_k(n, k);
        let measures: Vec<_> = shapes.measures[n].iter().filter(|(w, _)| w - 1 <= top).collect();
        // every shape admits k2 in [n2 - 1, k - n1 + 1], i.e. top + 1 values
        let fusions: Vec<_> = shapes.fusions[n].iter().collect();
        let fusion_total = fusions.len() * (top + 1);
        Self {
            n,
            k,
            top,
            measures,
            fusions,
            fusion_total,
        }
    }

    fn propose<R: Rng>(&self, rng: &mut R) -> Proposal {
        let measure = match (self.measures.is_empty(), self.fusions.is_empty()) {
            (false, true) => true,
            (true, false) => false,
            (false, false) => rng.random_bool(0.5),
            (true, true) => unreachable!("every grid cell has a feasible operation"),
        };
        if measure {
            let (w, map) = self.measures[rng.random_range(0..self.measures.len())];
            let kp = rng.random_range(w - 1..=self.top);
            Proposal::Measure {
                map: map.clone(),
                main: (self.n, self.k - kp),
                anc: (*w, kp),
            }
        } else {
            let u = rng.random_range(0..self.fusion_total);
            let (n2, map) = self.fusions[u / (self.top + 1)];
            let k2 = n2 - 1 + u % (self.top + 1);
            Proposal::Fuse {
                map: map.clone(),
                left: (self.n - n2 + 1, self.k - k2),
                right: (*n2, k2),
            }
        }
    }
}

fn pick<'t, R: Rng>(rng: &mut R, table: &'t DpTable, cell: (usize, usize)) -> &'t Arc<DpEntry> {
    let entries = table.cell(cell.0, cell.1).expect("input cell in grid");
    &entries[rng.random_range(0..entries.len())]
}

/// Draws until a candidate with nonzero success probability appears.
fn sample_candidate<R: Rng>(rng: &mut R, table: &DpTable, sampler: &CellSampler) -> Result<DpEntry> {
    for _ in 0..MAX_REDRAWS {
        match sampler.propose(rng) {
            Proposal::Measure { map, main, anc } => {
                let x = pick(rng, table, main);
                let y = pick(rng, table, anc);
                if let Some((state, p)) = measure_candidate(&map, x, y) {
                    let node = Node::measure(x.node.clone(), y.node.clone(), map.stabilizer().mask())?;
                    return Ok(DpEntry::new(node, state, p));
                }
            }
            Proposal::Fuse { map, left, right } => {
                let x = pick(rng, table, left);
                let y = pick(rng, table, right);
                let spec = map.spec();
                let node = Node::fuse(x.node.clone(), spec.i, y.node.clone(), spec.j)?;
                return Ok(DpEntry::new(node, fuse_candidate(&map, x, y), 1.0));
            }
        }
    }
    Err(Error::Internal(format!(
        "no candidate with nonzero success probability for cell ({}, {}) after {MAX_REDRAWS} draws",
        sampler.n, sampler.k
    )))
}

fn run_table(
    n_max: usize,
    k_max: usize,
    fidelity: f64,
    buffer: usize,
    temperature: f64,
    seed: u64,
    stream: u64,
    provenance: Provenance,
) -> Result<DpTable> {
    let shapes = Shapes::new(n_max)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut table = DpTable::empty(n_max, k_max, buffer, fidelity, provenance);
    let leaf = Arc::new(leaf_entry(fidelity)?);
    table.set(2, 1, vec![leaf; buffer]);
    for (n, k) in grid_cells(n_max, k_max).skip(1) {
        let sampler = CellSampler::new(&shapes, n, k);
        let mut slots: Vec<Arc<DpEntry>> = Vec::with_capacity(buffer);
        for _ in 0..buffer {
            let cand = sample_candidate(&mut rng, &table, &sampler)?;
            let keep = match slots.last() {
                None => true,
                Some(prev) => accepts(&mut rng, cand.fidelity - prev.fidelity, temperature),
            };
            let entry = if keep {
                Arc::new(cand)
            } else {
                slots.last().expect("previous slot").clone()
            };
            slots.push(entry);
        }
        table.set(n, k, slots);
    }
    Ok(table)
}

fn run_provenance(cfg: &RandomSearchConfig, temperature: f64, run: usize) -> Provenance {
    Provenance {
        algorithm: "random-dp".into(),
        generator: Some(GENERATOR.into()),
        seed: Some(cfg.seed),
        buffer: Some(cfg.buffer),
        temperature: Some(temperature),
        run: Some(run),
        fusion_sampling: Some(FUSION_SAMPLING.into()),
        manifest: None,
    }
}

/// One randomized run at `cfg.temperature` on stream 0 of `cfg.seed`.
///
/// Slots of a cell are filled in order. Each slot proposes a measurement
/// or a fusion with equal odds (or whichever is feasible), draws its inputs
/// uniformly from the stored entries of the implied cells, and keeps the
/// candidate if it is the first slot, improves on the previous slot, or
/// passes the `exp(ΔF / T)` test; otherwise the previous slot is copied.
pub fn random_dp(n_max: usize, k_max: usize, fidelity: f64, cfg: &RandomSearchConfig) -> Result<DpTable> {
    check_grid(n_max, k_max, fidelity, cfg.buffer)?;
    cfg.validate()?;
    run_table(
        n_max,
        k_max,
        fidelity,
        cfg.buffer,
        cfg.temperature,
        cfg.seed,
        0,
        run_provenance(cfg, cfg.temperature, 0),
    )
}

/// Outcome of one `(run, temperature)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub run: usize,
    pub temperature: f64,
    pub stream: u64,
    pub fidelity: f64,
}

#[derive(Debug, Clone)]
pub struct MultiRunReport {
    /// Best final protocol, evaluated at the search fidelity.
    pub best: Protocol,
    /// Index into `runs` of the winner.
    pub best_index: usize,
    /// One entry per `(run, temperature)`, run-major.
    pub runs: Vec<RunSummary>,
    /// `(n, k, fidelity)`: best fidelity of each cell over all runs.
    pub grid: Vec<(usize, usize, f64)>,
}

/// Runs [`random_dp`] `cfg.runs` times for every temperature and keeps the
/// best final entry. Pair `(run, t)` uses stream `run * temperatures + t`.
pub fn multi_run(n_max: usize, k_max: usize, fidelity: f64, cfg: &RandomSearchConfig) -> Result<MultiRunReport> {
    check_grid(n_max, k_max, fidelity, cfg.buffer)?;
    cfg.validate()?;
    let temps = cfg.temperature_list();
    let jobs: Vec<(usize, usize)> = (0..cfg.runs)
        .flat_map(|r| (0..temps.len()).map(move |t| (r, t)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(run, t)| {
            let stream = (run * temps.len() + t) as u64;
            let table = run_table(
                n_max,
                k_max,
                fidelity,
                cfg.buffer,
                temps[t],
                cfg.seed,
                stream,
                run_provenance(cfg, temps[t], run),
            )?;
            let summary = RunSummary {
                run,
                temperature: temps[t],
                stream,
                fidelity: table.final_best().fidelity,
            };
            let node = table.final_best().node.clone();
            Ok((summary, table.best_grid(), node, table.provenance))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut best_index = 0;
    for (i, r) in results.iter().enumerate() {
        if r.0.fidelity > results[best_index].0.fidelity {
            best_index = i;
        }
    }
    let mut grid = results[0].1.clone();
    for r in &results[1..] {
        for (cell, other) in grid.iter_mut().zip(&r.1) {
            cell.2 = cell.2.max(other.2);
        }
    }
    let (_, _, node, provenance) = results[best_index].clone();
    let best = Protocol::new(node, provenance).with_evaluation(fidelity)?;
    Ok(MultiRunReport {
        best,
        best_index,
        runs: results.into_iter().map(|r| r.0).collect(),
        grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::evaluate;

    fn cfg(buffer: usize, temperature: f64, seed: u64) -> RandomSearchConfig {
        RandomSearchConfig {
            buffer,
            temperature,
            seed,
            ..Default::default()
        }
    }

    fn fingerprint(t: &DpTable) -> Vec<(u64, String)> {
        t.entries()
            .map(|(_, _, e)| (e.fidelity().to_bits(), format!("{:?}", e.node())))
            .collect()
    }

    #[test]
    fn same_seed_same_table() {
        let c = cfg(12, 1e-4, 7);
        let a = random_dp(4, 10, 0.9, &c).unwrap();
        let b = random_dp(4, 10, 0.9, &c).unwrap();
        assert_eq!(fingerprint(&a), fingerprint(&b));
        let other = random_dp(4, 10, 0.9, &cfg(12, 1e-4, 8)).unwrap();
        assert_ne!(fingerprint(&a), fingerprint(&other));
    }

    #[test]
    fn cells_are_full_and_replay() {
        let t = random_dp(4, 9, 0.88, &cfg(6, 3e-4, 1)).unwrap();
        for (n, k) in grid_cells(4, 9) {
            assert_eq!(t.cell(n, k).unwrap().len(), 6);
        }
        for (n, k, e) in t.entries() {
            assert_eq!(e.node().audit().unwrap(), (n, k));
            let replay = evaluate(e.node(), 0.88).unwrap();
            assert!(replay.state.max_abs_diff(e.state()).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn pairs_only_measure() {
        let t = random_dp(2, 6, 0.9, &cfg(5, 1e-4, 3)).unwrap();
        for (_, k, e) in t.entries() {
            let is_measure = matches!(e.node().kind(), crate::protocol::NodeKind::Measure { .. });
            assert_eq!(is_measure, k > 1);
        }
    }

    #[test]
    fn cold_acceptance_is_rare() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let accepted = (0..10_000)
            .filter(|i| accepts(&mut rng, -1e-3 - 1e-6 * *i as f64, 1e-12))
            .count();
        assert!(accepted < 100, "{accepted}");
        assert_eq!(accept_probability(0.01, 1e-12), 1.0);
        assert!((accept_probability(-1e-4, 1e-4) - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn fusion_sampling_is_joint_uniform() {
        let shapes = Shapes::new(4).unwrap();
        // (4, 5): 3*2 shapes with n2 = 2 and 2*3 with n2 = 3, three k2 values each
        let s = CellSampler::new(&shapes, 4, 5);
        assert_eq!(s.fusion_total, 36);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut counts = std::collections::HashMap::new();
        let mut fusions = 0;
        for _ in 0..72_000 {
            if let Proposal::Fuse { map, right, .. } = s.propose(&mut rng) {
                let spec = map.spec();
                *counts.entry((spec.nb, right.1, spec.i, spec.j)).or_insert(0) += 1;
                fusions += 1;
            }
        }
        assert_eq!(counts.len(), 36);
        let expect = fusions as f64 / 36.0;
        for c in counts.values() {
            assert!((*c as f64 - expect).abs() < 5.0 * expect.sqrt(), "{c} vs {expect}");
        }
    }

    #[test]
    fn single_run_matches_random_dp() {
        let c = cfg(8, 2e-4, 21);
        let single = random_dp(3, 7, 0.9, &c).unwrap();
        let multi = multi_run(3, 7, 0.9, &c).unwrap();
        assert_eq!(multi.runs.len(), 1);
        assert_eq!(multi.best.predicted_fidelity, Some(single.final_best().fidelity()));
        assert_eq!(multi.best.root, *single.final_best().node());
    }

    #[test]
    fn more_runs_never_worse() {
        let mut c = cfg(6, 1e-4, 2);
        c.temperatures = vec![1e-5, 1e-4, 5e-4];
        c.runs = 2;
        let few = multi_run(4, 8, 0.9, &c).unwrap();
        c.runs = 4;
        let many = multi_run(4, 8, 0.9, &c).unwrap();
        assert_eq!(few.runs[..], many.runs[..6]);
        assert!(many.best.predicted_fidelity >= few.best.predicted_fidelity);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(random_dp(3, 4, 0.9, &cfg(0, 1e-4, 0)).is_err());
        assert!(random_dp(3, 4, 0.9, &cfg(3, 0.0, 0)).is_err());
        let mut c = cfg(3, 1e-4, 0);
        c.runs = 0;
        assert!(multi_run(3, 4, 0.9, &c).is_err());
    }
}
