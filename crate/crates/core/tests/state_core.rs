use ghz_core::oracle::{basis_ket, ghz_basis_decompose, DenseState};
use ghz_core::stabilizer::generator;
use ghz_core::{enumerate_stabilizers, BasisLabel};
use num_complex::Complex64;
use std::collections::HashSet;

#[test]
fn every_stabilizer_fixes_the_ghz_state() {
    for n in 2..=8 {
        let ghz = basis_ket(BasisLabel::target(n).unwrap()).unwrap();
        let all = enumerate_stabilizers(n).unwrap();
        assert_eq!(all.len(), (1 << n) - 1);
        let masks: HashSet<u32> = all.iter().map(|s| s.mask()).collect();
        assert_eq!(masks.len(), all.len());
        for s in all {
            let mut psi = ghz.clone();
            psi.apply_pauli_string(&s.to_pauli());
            let diff = psi
                .amplitudes()
                .iter()
                .zip(ghz.amplitudes())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(diff < 1e-12, "n={n} {s}: {diff}");
        }
    }
}

/// Projects a generic vector onto the joint eigenspace `s_g g = +1` of all
/// generators; independent of the representative-bitstring construction.
fn stabilized_state(n: usize, label: BasisLabel) -> DenseState {
    let amps: Vec<Complex64> = (0..1usize << n)
        .map(|k| Complex64::new(1.0 + 0.1 * k as f64, 0.3 - 0.05 * k as f64))
        .collect();
    let mut psi = DenseState::from_amplitudes(n, amps).unwrap();
    for g in 0..n {
        let mut gpsi = psi.clone();
        gpsi.apply_pauli_string(&generator(n, g));
        let s = label.sign(g) as f64;
        let projected: Vec<Complex64> = psi
            .amplitudes()
            .iter()
            .zip(gpsi.amplitudes())
            .map(|(a, b)| (a + b * s) * 0.5)
            .collect();
        psi = DenseState::from_amplitudes(n, projected).unwrap();
    }
    let norm = psi.norm_sqr().sqrt();
    let amps = psi.amplitudes().iter().map(|a| a / norm).collect();
    DenseState::from_amplitudes(n, amps).unwrap()
}

/// Removes the global phase so that amplitude `anchor` is real and positive.
fn fix_phase(psi: &DenseState, anchor: usize) -> Vec<Complex64> {
    let a = psi.amplitudes()[anchor];
    let phase = a / a.norm();
    psi.amplitudes().iter().map(|x| x / phase).collect()
}

#[test]
fn projector_construction_reproduces_table_one() {
    // (label, kets with positive and signed amplitude), qubit 1 leftmost.
    let rows = [
        ("+++", "000", "111", 1.0),
        ("++-", "001", "110", 1.0),
        ("+-+", "011", "100", 1.0),
        ("+--", "010", "101", 1.0),
        ("-++", "000", "111", -1.0),
        ("-+-", "001", "110", -1.0),
        ("--+", "011", "100", -1.0),
        ("---", "010", "101", -1.0),
    ];
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let index = |s: &str| {
        s.chars()
            .enumerate()
            .fold(0usize, |acc, (q, c)| acc | ((c == '1') as usize) << q)
    };
    for (signs, first, second, rel) in rows {
        let label = BasisLabel::from_signs(signs).unwrap();
        let psi = stabilized_state(3, label);
        let mut expect = vec![Complex64::new(0.0, 0.0); 8];
        expect[index(first)] = Complex64::new(h, 0.0);
        expect[index(second)] = Complex64::new(rel * h, 0.0);
        for (a, b) in fix_phase(&psi, index(first)).iter().zip(&expect) {
            assert!((a - b).norm() < 1e-12, "row {signs}");
        }
        let d = ghz_basis_decompose(&psi);
        assert!((d.coeffs[label.code() as usize] - 1.0).abs() < 1e-12);
    }
}

#[test]
fn basis_kets_agree_with_projectors() {
    for n in 2..=6 {
        for code in 0..1u32 << n {
            let label = BasisLabel::new(n, code).unwrap();
            let a = stabilized_state(n, label);
            let b = basis_ket(label).unwrap();
            let overlap: Complex64 = a
                .amplitudes()
                .iter()
                .zip(b.amplitudes())
                .map(|(x, y)| x.conj() * y)
                .sum();
            assert!((overlap.norm() - 1.0).abs() < 1e-12);
        }
    }
}
