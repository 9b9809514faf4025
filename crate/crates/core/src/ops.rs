//! Fusion and non-local stabilizer measurement on GHZ-diagonal states.
//!
//! Both operations send every pair of input basis labels to a single output
//! label (and, for measurements, a definite outcome), so they act on
//! coefficient vectors through precomputed label tables. The tables are
//! derived from the representative bitstrings of the labels and are checked
//! against [`crate::oracle`] in the tests.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use crate::error::{Error, Result};
use crate::pauli::Pauli;
use crate::stabilizer::StabilizerIndex;
use crate::state::{label_from_bits, mask_of, representative, GhzDiagState, MAX_QUBITS};

/// Fusing qubit `i` of an `na`-qubit state with qubit `j` of an `nb`-qubit state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FusionSpec {
    pub na: usize,
    pub i: usize,
    pub nb: usize,
    pub j: usize,
}

impl FusionSpec {
    pub fn new(na: usize, i: usize, nb: usize, j: usize) -> Result<Self> {
        if na < 2 || nb < 2 {
            return Err(Error::Domain(format!(
                "fusion inputs need at least 2 qubits, got ({na}, {nb})"
            )));
        }
        if i >= na || j >= nb {
            return Err(Error::Index(format!(
                "fusion qubits ({i}, {j}) out of range for sizes ({na}, {nb})"
            )));
        }
        let n_out = na + nb - 1;
        if n_out > MAX_QUBITS {
            return Err(Error::SizeLimit {
                qubits: n_out,
                limit: MAX_QUBITS,
            });
        }
        Ok(Self { na, i, nb, j })
    }

    pub fn output_qubits(&self) -> usize {
        self.na + self.nb - 1
    }
}

/// Outcome of a stabilizer measurement, post-selected on `+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementResult {
    pub success_prob: f64,
    post: Option<GhzDiagState>,
}

impl MeasurementResult {
    pub(crate) fn new(success_prob: f64, post: Option<GhzDiagState>) -> Self {
        Self { success_prob, post }
    }

    /// Normalized state after a `+1` outcome.
    pub fn post_state(&self) -> Result<&GhzDiagState> {
        self.post.as_ref().ok_or_else(|| Error::ImpossibleBranch {
            path: "measurement".into(),
        })
    }

    pub fn into_post_state(self) -> Result<GhzDiagState> {
        self.post.ok_or_else(|| Error::ImpossibleBranch {
            path: "measurement".into(),
        })
    }
}

/// Output label for every `(label_a, label_b)` pair, indexed by `la | lb << na`.
#[derive(Debug, Clone)]
pub struct FusionMap {
    spec: FusionSpec,
    table: Vec<u32>,
}

impl FusionMap {
    pub fn spec(&self) -> FusionSpec {
        self.spec
    }

    pub fn get(&self, la: u32, lb: u32) -> u32 {
        self.table[(la | lb << self.spec.na) as usize]
    }
}

const MINUS_OUTCOME: u32 = 1 << 31;

/// Outcome and post-measurement label for every `(main, ancilla)` pair,
/// indexed by `lm | la << n`.
#[derive(Debug, Clone)]
pub struct MeasureMap {
    stabilizer: StabilizerIndex,
    ancilla_n: usize,
    table: Vec<u32>,
}

impl MeasureMap {
    pub fn stabilizer(&self) -> StabilizerIndex {
        self.stabilizer
    }

    pub fn ancilla_n(&self) -> usize {
        self.ancilla_n
    }

    /// `(outcome, post label)` with outcome `+1` or `-1`.
    pub fn get(&self, lm: u32, la: u32) -> (i8, u32) {
        let v = self.table[(lm | la << self.stabilizer.n()) as usize];
        let outcome = if v & MINUS_OUTCOME == 0 { 1 } else { -1 };
        (outcome, v & !MINUS_OUTCOME)
    }
}

/// Builds the fusion table.
///
/// With representatives `x` (for `a`) and `y` (for `b`), the fused state is
/// `|x, y'> + s_a s_b |not x, not y'>` where `y'` is `y` with qubit `j`
/// dropped after complementing `y` if `y_j != x_i`.
pub fn basis_fusion_map(spec: FusionSpec) -> FusionMap {
    let FusionSpec { na, i, nb, j } = spec;
    let n_out = spec.output_qubits();
    let low_b = (1u32 << j) - 1;
    let mut table = Vec::with_capacity(1 << (na + nb));
    for lb in 0..1u32 << nb {
        let yb = representative(lb, nb);
        for la in 0..1u32 << na {
            let x = representative(la, na);
            let y = if (yb >> j & 1) != (x >> i & 1) {
                !yb & mask_of(nb)
            } else {
                yb
            };
            let y_rest = (y & low_b) | ((y >> 1) & !low_b);
            let bits = x | y_rest << na;
            table.push(label_from_bits(bits, n_out, (la ^ lb) & 1));
        }
    }
    FusionMap { spec, table }
}

/// Label flips caused by applying `p` to qubit `q` of an `n`-qubit basis state.
fn pauli_label_flip(n: usize, q: usize, p: Pauli) -> u32 {
    let x_part = || {
        let mut f = 0;
        if q >= 1 {
            f |= 1 << q;
        }
        if q + 1 < n {
            f |= 1 << (q + 1);
        }
        f
    };
    match p {
        Pauli::I => 0,
        Pauli::X => x_part(),
        Pauli::Z => 1,
        Pauli::Y => x_part() | 1,
    }
}

/// Builds the measurement table.
///
/// The ancilla controls kick back `P^y` onto the main state, where `y` is the
/// ancilla representative, while the X-basis readout parity reveals the
/// ancilla X-sign times the main state's eigenvalue of the stabilizer.
pub fn basis_measurement_map(s: StabilizerIndex, ancilla_n: usize) -> Result<MeasureMap> {
    let w = s.weight();
    if ancilla_n != w {
        return Err(Error::Index(format!(
            "ancilla has {ancilla_n} qubits but stabilizer {s} has weight {w}"
        )));
    }
    let n = s.n();
    let flips: Vec<u32> = s
        .support()
        .into_iter()
        .zip(s.to_pauli().support_letters())
        .map(|(q, p)| pauli_label_flip(n, q, p))
        .collect();
    let mut table = Vec::with_capacity(1 << (n + w));
    for la in 0..1u32 << w {
        let y = representative(la, w);
        let kick = flips
            .iter()
            .enumerate()
            .filter(|(t, _)| y >> t & 1 == 1)
            .fold(0, |acc, (_, f)| acc ^ f);
        for lm in 0..1u32 << n {
            let minus = (la ^ (lm & s.mask()).count_ones()) & 1;
            let post = lm ^ kick;
            table.push(post | if minus == 1 { MINUS_OUTCOME } else { 0 });
        }
    }
    Ok(MeasureMap {
        stabilizer: s,
        ancilla_n,
        table,
    })
}

/// Thread-safe memo of label tables keyed by their specification.
#[derive(Debug, Default)]
pub struct LabelMapCache {
    fusion: RwLock<HashMap<FusionSpec, Arc<FusionMap>>>,
    measure: RwLock<HashMap<(usize, u32), Arc<MeasureMap>>>,
}

impl LabelMapCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Process-wide cache used by [`fuse`] and [`measure_stabilizer`].
    pub fn global() -> &'static LabelMapCache {
        static CACHE: OnceLock<LabelMapCache> = OnceLock::new();
        CACHE.get_or_init(LabelMapCache::new)
    }

    pub fn fusion(&self, spec: FusionSpec) -> Arc<FusionMap> {
        if let Some(m) = self.fusion.read().unwrap().get(&spec) {
            return Arc::clone(m);
        }
        let built = Arc::new(basis_fusion_map(spec));
        let mut guard = self.fusion.write().unwrap();
        Arc::clone(guard.entry(spec).or_insert(built))
    }

    pub fn measure(&self, s: StabilizerIndex) -> Arc<MeasureMap> {
        let key = (s.n(), s.mask());
        if let Some(m) = self.measure.read().unwrap().get(&key) {
            return Arc::clone(m);
        }
        let built = Arc::new(basis_measurement_map(s, s.weight()).expect("weight-sized ancilla"));
        let mut guard = self.measure.write().unwrap();
        Arc::clone(guard.entry(key).or_insert(built))
    }

    pub fn len(&self) -> usize {
        self.fusion.read().unwrap().len() + self.measure.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Fuses qubit `i` of `a` with qubit `j` of `b`. Output qubits are `a`'s in
/// order followed by `b`'s without `j`.
pub fn fuse(a: &GhzDiagState, i: usize, b: &GhzDiagState, j: usize) -> Result<GhzDiagState> {
    let spec = FusionSpec::new(a.n(), i, b.n(), j)?;
    let map = LabelMapCache::global().fusion(spec);
    Ok(fuse_with(&map, a, b))
}

pub(crate) fn fuse_with(map: &FusionMap, a: &GhzDiagState, b: &GhzDiagState) -> GhzDiagState {
    let spec = map.spec;
    let mut out = vec![0.0; 1 << spec.output_qubits()];
    let stride = 1usize << spec.na;
    for (lb, &wb) in b.coeffs().iter().enumerate() {
        if wb == 0.0 {
            continue;
        }
        let row = &map.table[lb * stride..(lb + 1) * stride];
        for (&target, &wa) in row.iter().zip(a.coeffs()) {
            out[target as usize] += wa * wb;
        }
    }
    GhzDiagState::from_clamped(spec.output_qubits(), out).expect("fusion preserves normalization")
}

/// Unnormalized `+1`-branch mass per post-measurement label.
pub fn measure_plus_mass(
    main: &GhzDiagState,
    s: StabilizerIndex,
    ancilla: &GhzDiagState,
) -> Result<Vec<f64>> {
    check_measure_args(main, s, ancilla)?;
    let map = LabelMapCache::global().measure(s);
    Ok(plus_mass_with(&map, main, ancilla))
}

fn check_measure_args(main: &GhzDiagState, s: StabilizerIndex, ancilla: &GhzDiagState) -> Result<()> {
    if s.n() != main.n() {
        return Err(Error::Index(format!(
            "stabilizer on {} qubits applied to a {}-qubit state",
            s.n(),
            main.n()
        )));
    }
    if ancilla.n() != s.weight() {
        return Err(Error::Index(format!(
            "ancilla has {} qubits but stabilizer {s} has weight {}",
            ancilla.n(),
            s.weight()
        )));
    }
    Ok(())
}

fn plus_mass_with(map: &MeasureMap, main: &GhzDiagState, ancilla: &GhzDiagState) -> Vec<f64> {
    let n = map.stabilizer.n();
    let stride = 1usize << n;
    let mut plus = vec![0.0; stride];
    for (la, &wa) in ancilla.coeffs().iter().enumerate() {
        if wa == 0.0 {
            continue;
        }
        let row = &map.table[la * stride..(la + 1) * stride];
        for (&v, &wm) in row.iter().zip(main.coeffs()) {
            if v & MINUS_OUTCOME == 0 {
                plus[v as usize] += wm * wa;
            }
        }
    }
    plus
}

/// Measures stabilizer `s` on `main`, consuming `ancilla`; the `-1` branch is discarded.
pub fn measure_stabilizer(
    main: &GhzDiagState,
    s: StabilizerIndex,
    ancilla: &GhzDiagState,
) -> Result<MeasurementResult> {
    check_measure_args(main, s, ancilla)?;
    let map = LabelMapCache::global().measure(s);
    Ok(measure_with(&map, main, ancilla))
}

pub(crate) fn measure_with(
    map: &MeasureMap,
    main: &GhzDiagState,
    ancilla: &GhzDiagState,
) -> MeasurementResult {
    let plus = plus_mass_with(map, main, ancilla);
    let success: f64 = plus.iter().sum();
    if success <= 0.0 {
        return MeasurementResult::new(0.0, None);
    }
    let post = plus.into_iter().map(|m| m / success).collect();
    let post = GhzDiagState::from_clamped(main.n(), post).expect("post-selection normalizes");
    MeasurementResult::new(success.min(1.0), Some(post))
}
