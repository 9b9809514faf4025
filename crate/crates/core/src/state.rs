//! GHZ-basis labels and GHZ-diagonal mixed states.
//!
//! An `n`-qubit GHZ basis state is identified by the signs of the generators
//! `X_1..X_n, Z_1Z_2, .., Z_{n-1}Z_n`. The label packs those signs into an
//! integer: bit 0 holds the sign of the X-type generator and bit `q`
//! (`1 <= q < n`) holds the sign of `Z_{q-1}Z_q` (0-based qubits). A cleared
//! bit means `+`, so code 0 is the target GHZ state.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest register handled by the coefficient-vector representation.
pub const MAX_QUBITS: usize = 16;

/// Negative coefficients down to this value are rounding noise and get clamped to zero.
pub const CLAMP_TOLERANCE: f64 = 1e-14;

/// Allowed deviation of the coefficient sum from one.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Sign vector identifying one GHZ-basis state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisLabel {
    n: usize,
    code: u32,
}

impl BasisLabel {
    pub fn new(n: usize, code: u32) -> Result<Self> {
        check_qubits(n)?;
        if (code as u64) >= (1u64 << n) {
            return Err(Error::Index(format!(
                "label code {code} does not fit {n} qubits"
            )));
        }
        Ok(Self { n, code })
    }

    /// The target state `|phi_n^+>`.
    pub fn target(n: usize) -> Result<Self> {
        Self::new(n, 0)
    }

    /// Builds a label from a sign string such as `"+-+"`.
    pub fn from_signs(signs: &str) -> Result<Self> {
        let mut code = 0u32;
        let mut n = 0;
        for (q, c) in signs.chars().enumerate() {
            match c {
                '+' => {}
                '-' => code |= 1 << q,
                other => {
                    return Err(Error::Domain(format!("invalid sign character {other:?}")))
                }
            }
            n = q + 1;
        }
        Self::new(n, code)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn code(&self) -> u32 {
        self.code
    }

    /// Sign `s_{i+1}` as `+1` or `-1` (0-based generator index).
    pub fn sign(&self, generator: usize) -> i8 {
        if self.code >> generator & 1 == 0 {
            1
        } else {
            -1
        }
    }

    /// Computational-basis bitstring `x` with `x_0 = 0` such that the basis
    /// state is `(|x> + s_1 |not x>)/sqrt(2)`. Bit `q` of the result is qubit `q`.
    pub fn representative(&self) -> u32 {
        representative(self.code, self.n)
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n {
            f.write_str(if self.code >> q & 1 == 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

/// See [`BasisLabel::representative`].
pub(crate) fn representative(code: u32, n: usize) -> u32 {
    let mut bits = 0u32;
    let mut prev = 0u32;
    for q in 1..n {
        prev ^= code >> q & 1;
        bits |= prev << q;
    }
    bits
}

/// Inverse of [`representative`]: the label code for bitstring `bits` with X-sign bit `xsign`.
pub(crate) fn label_from_bits(bits: u32, n: usize, xsign: u32) -> u32 {
    let parities = (bits ^ (bits << 1)) & !1 & mask_of(n);
    parities | (xsign & 1)
}

pub(crate) fn mask_of(n: usize) -> u32 {
    ((1u64 << n) - 1) as u32
}

pub(crate) fn check_qubits(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Domain(format!("qubit count must be at least 2, got {n}")));
    }
    if n > MAX_QUBITS {
        return Err(Error::SizeLimit {
            qubits: n,
            limit: MAX_QUBITS,
        });
    }
    Ok(())
}

/// Mixture of GHZ-basis states, `sum_L A_L |phi^L><phi^L|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GhzDiagState {
    n: usize,
    coeffs: Vec<f64>,
}

impl GhzDiagState {
    /// Validates and wraps a coefficient vector indexed by label code.
    pub fn new(n: usize, coeffs: Vec<f64>) -> Result<Self> {
        check_qubits(n)?;
        if coeffs.len() != 1 << n {
            return Err(Error::Domain(format!(
                "expected {} coefficients for {n} qubits, got {}",
                1usize << n,
                coeffs.len()
            )));
        }
        Self::from_clamped(n, coeffs)
    }

    /// Clamps rounding noise and checks normalization. Callers guarantee the length.
    pub(crate) fn from_clamped(n: usize, mut coeffs: Vec<f64>) -> Result<Self> {
        let mut total = 0.0;
        for c in coeffs.iter_mut() {
            if !c.is_finite() {
                return Err(Error::Domain(format!("non-finite coefficient {c}")));
            }
            if *c < 0.0 {
                if *c < -CLAMP_TOLERANCE {
                    return Err(Error::Internal(format!("negative coefficient {c}")));
                }
                *c = 0.0;
            }
            total += *c;
        }
        if (total - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Domain(format!(
                "coefficients sum to {total}, expected 1"
            )));
        }
        Ok(Self { n, coeffs })
    }

    /// Pure basis state `|phi^L><phi^L|`.
    pub fn basis(label: BasisLabel) -> Self {
        let mut coeffs = vec![0.0; 1 << label.n];
        coeffs[label.code as usize] = 1.0;
        Self { n: label.n, coeffs }
    }

    /// Perfect `n`-qubit GHZ state.
    pub fn perfect(n: usize) -> Result<Self> {
        Ok(Self::basis(BasisLabel::target(n)?))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, label: BasisLabel) -> f64 {
        self.coeffs[label.code as usize]
    }

    /// Overlap with the target GHZ state.
    pub fn fidelity(&self) -> f64 {
        self.coeffs[0]
    }

    /// Largest absolute coefficient difference; `None` when sizes differ.
    pub fn max_abs_diff(&self, other: &Self) -> Option<f64> {
        (self.n == other.n).then(|| {
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
    }
}

/// Isotropic Bell pair: fidelity `F` on `|phi^++>`, `(1-F)/3` on each other Bell state.
pub fn isotropic_bell(fidelity: f64) -> Result<GhzDiagState> {
    if !(0.0..=1.0).contains(&fidelity) {
        return Err(Error::Domain(format!(
            "Bell fidelity must lie in [0, 1], got {fidelity}"
        )));
    }
    let e = (1.0 - fidelity) / 3.0;
    Ok(GhzDiagState {
        n: 2,
        coeffs: vec![fidelity, e, e, e],
    })
}
