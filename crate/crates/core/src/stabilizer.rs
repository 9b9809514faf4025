//! Non-trivial stabilizers of the `n`-qubit GHZ state.
//!
//! The stabilizer group is generated by `X_0..X_{n-1}` and the adjacent
//! `Z_{q-1}Z_q` terms. A group element is named by a bitmask over these
//! generators using the same bit layout as [`BasisLabel`](crate::BasisLabel).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};
use crate::state::{check_qubits, mask_of};

/// Nonzero generator bitmask selecting one non-trivial stabilizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StabilizerIndex {
    n: usize,
    mask: u32,
}

impl StabilizerIndex {
    pub fn new(n: usize, mask: u32) -> Result<Self> {
        check_qubits(n)?;
        if mask == 0 {
            return Err(Error::Validation(
                "stabilizer mask must be nonzero (identity excluded)".into(),
            ));
        }
        if mask > mask_of(n) {
            return Err(Error::Validation(format!(
                "stabilizer mask {mask} exceeds 2^{n} - 1"
            )));
        }
        Ok(Self { n, mask })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    /// Whether the X-type generator participates.
    pub fn has_x(&self) -> bool {
        self.mask & 1 == 1
    }

    /// Qubits on which the Z-part of the product acts.
    pub fn z_support(&self) -> u32 {
        let zz = self.mask & !1;
        (zz ^ (zz >> 1)) & mask_of(self.n)
    }

    /// Number of non-identity letters; equals the size of the ancilla needed to measure it.
    pub fn weight(&self) -> usize {
        if self.has_x() {
            self.n
        } else {
            self.z_support().count_ones() as usize
        }
    }

    /// Qubits touched by the stabilizer, ascending.
    pub fn support(&self) -> Vec<usize> {
        let bits = if self.has_x() {
            mask_of(self.n)
        } else {
            self.z_support()
        };
        (0..self.n).filter(|q| bits >> q & 1 == 1).collect()
    }

    /// Signed Pauli string obtained by multiplying the selected generators.
    pub fn to_pauli(&self) -> PauliString {
        let mut acc = PauliString::identity(self.n);
        for g in 0..self.n {
            if self.mask >> g & 1 == 1 {
                acc = &acc * &generator(self.n, g);
            }
        }
        assert!(
            acc.sign().is_some(),
            "stabilizer product {acc} has an imaginary phase"
        );
        acc
    }
}

impl fmt::Display for StabilizerIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_pauli())
    }
}

/// Generator `g` of the GHZ stabilizer group: `g = 0` is `X..X`, `g >= 1` is `Z_{g-1} Z_g`.
pub fn generator(n: usize, g: usize) -> PauliString {
    if g == 0 {
        PauliString::new(1, vec![Pauli::X; n])
    } else {
        let mut letters = vec![Pauli::I; n];
        letters[g - 1] = Pauli::Z;
        letters[g] = Pauli::Z;
        PauliString::new(1, letters)
    }
}

/// All `2^n - 1` non-trivial stabilizers in ascending mask order.
pub fn enumerate_stabilizers(n: usize) -> Result<Vec<StabilizerIndex>> {
    check_qubits(n)?;
    Ok((1..=mask_of(n)).map(|mask| StabilizerIndex { n, mask }).collect())
}
