//! Brute-force statevector reference for fusion and stabilizer measurement.
//!
//! Every basis-label pair of the inputs is prepared as a pure product ket,
//! pushed through the actual gate sequence, measured branch by branch and
//! decomposed back into the GHZ basis. Mixtures are recombined classically,
//! which is exact because the inputs are GHZ-diagonal. Nothing here touches
//! the label maps in [`crate::ops`].
//!
//! Qubit `q` of a register is bit `q` of the amplitude index.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ops::MeasurementResult;
use crate::pauli::{Pauli, PauliString};
use crate::stabilizer::StabilizerIndex;
use crate::state::{representative, BasisLabel, GhzDiagState};

/// Default cap on the total register size simulated by the oracle.
pub const ORACLE_MAX_QUBITS: usize = 16;

const BRANCH_EPS: f64 = 1e-15;

/// Pure state on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    n: usize,
    amps: Vec<Complex64>,
}

/// GHZ-basis populations of a pure state and its largest cross term.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub coeffs: Vec<f64>,
    /// `max_{L != L'} |<phi^L|psi>| |<phi^L'|psi>|`
    pub residual: f64,
}

fn check_limit(n: usize) -> Result<()> {
    if n > ORACLE_MAX_QUBITS {
        return Err(Error::SizeLimit {
            qubits: n,
            limit: ORACLE_MAX_QUBITS,
        });
    }
    Ok(())
}

impl DenseState {
    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_limit(n)?;
        if amps.len() != 1 << n {
            return Err(Error::Domain(format!(
                "expected {} amplitudes, got {}",
                1usize << n,
                amps.len()
            )));
        }
        Ok(Self { n, amps })
    }

    /// `|bits>` in the computational basis.
    pub fn computational(n: usize, bits: usize) -> Result<Self> {
        check_limit(n)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[bits] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn normalize(&mut self) {
        let norm = self.norm_sqr().sqrt();
        for a in &mut self.amps {
            *a /= norm;
        }
    }

    /// `self (x) other`, with `self` on the low qubits.
    pub fn tensor(&self, other: &DenseState) -> Result<DenseState> {
        let n = self.n + other.n;
        check_limit(n)?;
        let mut amps = Vec::with_capacity(1 << n);
        for hi in &other.amps {
            for lo in &self.amps {
                amps.push(lo * hi);
            }
        }
        Ok(DenseState { n, amps })
    }

    pub fn apply_pauli(&mut self, qubit: usize, p: Pauli) {
        let bit = 1usize << qubit;
        let i = Complex64::new(0.0, 1.0);
        match p {
            Pauli::I => {}
            Pauli::X => {
                for idx in 0..self.amps.len() {
                    if idx & bit == 0 {
                        self.amps.swap(idx, idx | bit);
                    }
                }
            }
            Pauli::Z => {
                for (idx, a) in self.amps.iter_mut().enumerate() {
                    if idx & bit != 0 {
                        *a = -*a;
                    }
                }
            }
            Pauli::Y => {
                // Y|0> = i|1>, Y|1> = -i|0>
                for idx in 0..self.amps.len() {
                    if idx & bit == 0 {
                        let a0 = self.amps[idx];
                        let a1 = self.amps[idx | bit];
                        self.amps[idx] = -i * a1;
                        self.amps[idx | bit] = i * a0;
                    }
                }
            }
        }
    }

    /// Applies a signed Pauli string acting on qubits `0..p.len()`.
    pub fn apply_pauli_string(&mut self, p: &PauliString) {
        for (q, &letter) in p.letters().iter().enumerate() {
            self.apply_pauli(q, letter);
        }
        let phase = match p.phase_exponent() {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        for a in &mut self.amps {
            *a *= phase;
        }
    }

    /// Controlled-`p` with `control` and `target` qubits.
    pub fn controlled_pauli(&mut self, control: usize, target: usize, p: Pauli) {
        let cbit = 1usize << control;
        let tbit = 1usize << target;
        let i = Complex64::new(0.0, 1.0);
        for idx in 0..self.amps.len() {
            if idx & cbit == 0 || idx & tbit != 0 {
                continue;
            }
            let (a0, a1) = (self.amps[idx], self.amps[idx | tbit]);
            let (b0, b1) = match p {
                Pauli::I => (a0, a1),
                Pauli::X => (a1, a0),
                Pauli::Y => (-i * a1, i * a0),
                Pauli::Z => (a0, -a1),
            };
            self.amps[idx] = b0;
            self.amps[idx | tbit] = b1;
        }
    }

    pub fn cnot(&mut self, control: usize, target: usize) {
        self.controlled_pauli(control, target, Pauli::X);
    }

    pub fn hadamard(&mut self, qubit: usize) {
        let bit = 1usize << qubit;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for idx in 0..self.amps.len() {
            if idx & bit == 0 {
                let (a0, a1) = (self.amps[idx], self.amps[idx | bit]);
                self.amps[idx] = (a0 + a1) * h;
                self.amps[idx | bit] = (a0 - a1) * h;
            }
        }
    }

    /// Projects `qubit` onto `|value>` and returns the unnormalized branch
    /// with `qubit` removed, plus its Born probability.
    pub fn project_out(&self, qubit: usize, value: usize) -> (DenseState, f64) {
        let low = (1usize << qubit) - 1;
        let mut amps = Vec::with_capacity(self.amps.len() / 2);
        for rest in 0..self.amps.len() / 2 {
            let idx = (rest & low) | (value << qubit) | ((rest & !low) << 1);
            amps.push(self.amps[idx]);
        }
        let branch = DenseState {
            n: self.n - 1,
            amps,
        };
        let p = branch.norm_sqr();
        (branch, p)
    }
}

/// Dense statevector of the GHZ-basis state `label`.
pub fn basis_ket(label: BasisLabel) -> Result<DenseState> {
    let n = label.n();
    check_limit(n)?;
    let x = label.representative() as usize;
    let xbar = !x & ((1 << n) - 1);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
    amps[x] = Complex64::new(h, 0.0);
    amps[xbar] = Complex64::new(h * label.sign(0) as f64, 0.0);
    Ok(DenseState { n, amps })
}

/// Projections of `state` onto every GHZ-basis state of its register.
pub fn ghz_basis_decompose(state: &DenseState) -> Decomposition {
    let n = state.n;
    let full = (1usize << n) - 1;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut coeffs = Vec::with_capacity(1 << n);
    let (mut top, mut second) = (0.0f64, 0.0f64);
    for code in 0..1u32 << n {
        let x = representative(code, n) as usize;
        let sign = if code & 1 == 0 { 1.0 } else { -1.0 };
        let amp = (state.amps[x] + state.amps[!x & full] * sign) * h;
        let mag = amp.norm();
        if mag > top {
            second = top;
            top = mag;
        } else if mag > second {
            second = mag;
        }
        coeffs.push(amp.norm_sqr());
    }
    Decomposition {
        coeffs,
        residual: top * second,
    }
}

/// Oracle output together with the largest off-diagonal term seen in any branch.
#[derive(Debug, Clone)]
pub struct OracleFusion {
    pub state: GhzDiagState,
    pub residual: f64,
}

/// Oracle output for a stabilizer measurement.
#[derive(Debug, Clone)]
pub struct OracleMeasurement {
    pub result: MeasurementResult,
    /// Unnormalized mass of each label in the `+1` branch.
    pub plus_mass: Vec<f64>,
    pub residual: f64,
}

/// Fusion by explicit circuit: CNOT from qubit `i` of `a` onto qubit `j` of
/// `b`, Z measurement of `b`'s qubit, X correction on `b`'s other qubits
/// when the outcome is 1.
pub fn oracle_fuse(a: &GhzDiagState, i: usize, b: &GhzDiagState, j: usize) -> Result<OracleFusion> {
    let (na, nb) = (a.n(), b.n());
    if i >= na || j >= nb {
        return Err(Error::Index(format!(
            "fusion qubits ({i}, {j}) out of range for sizes ({na}, {nb})"
        )));
    }
    check_limit(na + nb)?;
    let n_out = na + nb - 1;
    let target = na + j;
    let mut out = vec![0.0; 1 << n_out];
    let mut residual = 0.0f64;
    for (la, &wa) in a.coeffs().iter().enumerate() {
        if wa == 0.0 {
            continue;
        }
        let ket_a = basis_ket(BasisLabel::new(na, la as u32)?)?;
        for (lb, &wb) in b.coeffs().iter().enumerate() {
            if wb == 0.0 {
                continue;
            }
            let ket_b = basis_ket(BasisLabel::new(nb, lb as u32)?)?;
            let mut psi = ket_a.tensor(&ket_b)?;
            psi.cnot(i, target);
            for outcome in 0..2 {
                let (mut branch, p) = psi.project_out(target, outcome);
                if p < BRANCH_EPS {
                    continue;
                }
                if outcome == 1 {
                    // B's qubits above j shift down by one after removal.
                    for q in na..n_out {
                        branch.apply_pauli(q, Pauli::X);
                    }
                }
                branch.normalize();
                let d = ghz_basis_decompose(&branch);
                residual = residual.max(d.residual);
                let w = wa * wb * p;
                for (o, c) in out.iter_mut().zip(&d.coeffs) {
                    *o += w * c;
                }
            }
        }
    }
    Ok(OracleFusion {
        state: GhzDiagState::from_clamped(n_out, out)?,
        residual,
    })
}

/// Measurement of the stabilizer `s` on `main` consuming `ancilla`.
pub fn oracle_measure(
    main: &GhzDiagState,
    s: StabilizerIndex,
    ancilla: &GhzDiagState,
) -> Result<OracleMeasurement> {
    if s.n() != main.n() {
        return Err(Error::Index(format!(
            "stabilizer on {} qubits applied to a {}-qubit state",
            s.n(),
            main.n()
        )));
    }
    oracle_measure_pauli(main, &s.to_pauli(), ancilla)
}

/// Measurement of an arbitrary signed Pauli string with the standard
/// circuit: ancilla qubit `t` controls the `t`-th support letter, then every
/// ancilla qubit is read out in the X basis and the outcome is
/// `sign * prod m_t`. Only the `+1` branch is kept.
pub fn oracle_measure_pauli(
    main: &GhzDiagState,
    pauli: &PauliString,
    ancilla: &GhzDiagState,
) -> Result<OracleMeasurement> {
    let n = main.n();
    if pauli.len() != n {
        return Err(Error::Index(format!(
            "Pauli string of length {} applied to a {n}-qubit state",
            pauli.len()
        )));
    }
    let sign = pauli
        .sign()
        .ok_or_else(|| Error::Domain(format!("{pauli} is not Hermitian")))?;
    let support = pauli.support();
    let letters = pauli.support_letters();
    let w = support.len();
    if ancilla.n() != w {
        return Err(Error::Index(format!(
            "ancilla has {} qubits but {pauli} has weight {w}",
            ancilla.n()
        )));
    }
    check_limit(n + w)?;

    let mut plus = vec![0.0; 1 << n];
    let mut success = 0.0;
    let mut residual = 0.0f64;
    for (lm, &wm) in main.coeffs().iter().enumerate() {
        if wm == 0.0 {
            continue;
        }
        let ket_m = basis_ket(BasisLabel::new(n, lm as u32)?)?;
        for (la, &wa) in ancilla.coeffs().iter().enumerate() {
            if wa == 0.0 {
                continue;
            }
            let ket_a = basis_ket(BasisLabel::new(w, la as u32)?)?;
            let mut psi = ket_m.tensor(&ket_a)?;
            for (t, (&q, &p)) in support.iter().zip(&letters).enumerate() {
                psi.controlled_pauli(n + t, q, p);
            }
            for t in 0..w {
                psi.hadamard(n + t);
            }
            for readout in 0..1usize << w {
                let parity = readout.count_ones() % 2;
                let outcome = if parity == 0 { sign } else { -sign };
                if outcome < 0 {
                    continue;
                }
                let mut branch = DenseState {
                    n,
                    amps: psi.amps[readout << n..(readout + 1) << n].to_vec(),
                };
                let p = branch.norm_sqr();
                if p < BRANCH_EPS {
                    continue;
                }
                branch.normalize();
                let d = ghz_basis_decompose(&branch);
                residual = residual.max(d.residual);
                let weight = wm * wa * p;
                success += weight;
                for (o, c) in plus.iter_mut().zip(&d.coeffs) {
                    *o += weight * c;
                }
            }
        }
    }
    let post = if success > 0.0 {
        let normalized = plus.iter().map(|m| m / success).collect();
        Some(GhzDiagState::from_clamped(n, normalized)?)
    } else {
        None
    };
    Ok(OracleMeasurement {
        result: MeasurementResult::new(success, post),
        plus_mass: plus,
        residual,
    })
}
