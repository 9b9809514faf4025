mod common;

use common::{max_diff, random_state};
use ghz_core::ops::{basis_fusion_map, basis_measurement_map, measure_plus_mass, FusionSpec};
use ghz_core::oracle::{oracle_fuse, oracle_measure};
use ghz_core::{enumerate_stabilizers, fuse, measure_stabilizer, BasisLabel, GhzDiagState, StabilizerIndex};
use ghz_core::isotropic_bell;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn indicator(state: &GhzDiagState) -> Option<usize> {
    let c = state.coeffs();
    let hit = c.iter().position(|&v| (v - 1.0).abs() < 1e-10)?;
    c.iter()
        .enumerate()
        .all(|(k, &v)| k == hit || v.abs() < 1e-10)
        .then_some(hit)
}

#[test]
fn fusion_map_matches_oracle_on_every_basis_pair() {
    for na in 2..=6 {
        for nb in 2..=8 - na {
            for i in 0..na {
                for j in 0..nb {
                    let map = basis_fusion_map(FusionSpec::new(na, i, nb, j).unwrap());
                    for la in 0..1u32 << na {
                        for lb in 0..1u32 << nb {
                            let a = GhzDiagState::basis(BasisLabel::new(na, la).unwrap());
                            let b = GhzDiagState::basis(BasisLabel::new(nb, lb).unwrap());
                            let o = oracle_fuse(&a, i, &b, j).unwrap();
                            assert!(o.residual < 1e-10);
                            assert_eq!(
                                indicator(&o.state),
                                Some(map.get(la, lb) as usize),
                                "({na},{i})x({nb},{j}) labels {la},{lb}"
                            );
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn measurement_map_matches_oracle_on_every_basis_pair() {
    for n in 2..=6 {
        for s in enumerate_stabilizers(n).unwrap() {
            let w = s.weight();
            if n + w > 8 {
                continue;
            }
            let map = basis_measurement_map(s, w).unwrap();
            for lm in 0..1u32 << n {
                for la in 0..1u32 << w {
                    let main = GhzDiagState::basis(BasisLabel::new(n, lm).unwrap());
                    let anc = GhzDiagState::basis(BasisLabel::new(w, la).unwrap());
                    let o = oracle_measure(&main, s, &anc).unwrap();
                    assert!(o.residual < 1e-10);
                    let (outcome, post) = map.get(lm, la);
                    let p = o.result.success_prob;
                    if outcome > 0 {
                        assert!((p - 1.0).abs() < 1e-12, "{s} {lm} {la}");
                        assert_eq!(
                            indicator(o.result.post_state().unwrap()),
                            Some(post as usize)
                        );
                    } else {
                        assert!(p.abs() < 1e-12, "{s} {lm} {la}");
                    }
                }
            }
        }
    }
}

#[test]
fn two_qubit_zz_partition() {
    let s = StabilizerIndex::new(2, 0b10).unwrap();
    let map = basis_measurement_map(s, 2).unwrap();
    let mut plus = 0;
    for lm in 0..4 {
        for la in 0..4 {
            let (outcome, _) = map.get(lm, la);
            // ZZ eigenvalue of main times X-sign of the ancilla
            let expect = if ((lm >> 1) ^ la) & 1 == 0 { 1 } else { -1 };
            assert_eq!(outcome, expect);
            plus += (outcome > 0) as usize;
        }
    }
    assert_eq!(plus, 8);
}

#[test]
fn random_fusions_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let na = rng.random_range(2..=6);
        let nb = rng.random_range(2..=8 - na);
        let (i, j) = (rng.random_range(0..na), rng.random_range(0..nb));
        let a = random_state(&mut rng, na);
        let b = random_state(&mut rng, nb);
        let fast = fuse(&a, i, &b, j).unwrap();
        let slow = oracle_fuse(&a, i, &b, j).unwrap();
        assert!(slow.residual < 1e-10);
        assert!(max_diff(fast.coeffs(), slow.state.coeffs()) < 1e-10);
        assert!((fast.coeffs().iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn random_measurements_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut done = 0;
    while done < 1000 {
        let n = rng.random_range(2..=6);
        let stabs = enumerate_stabilizers(n).unwrap();
        let s = stabs[rng.random_range(0..stabs.len())];
        if n + s.weight() > 8 {
            continue;
        }
        let main = random_state(&mut rng, n);
        let anc = random_state(&mut rng, s.weight());
        let fast = measure_stabilizer(&main, s, &anc).unwrap();
        let slow = oracle_measure(&main, s, &anc).unwrap();
        assert!(slow.residual < 1e-10);
        assert!((fast.success_prob - slow.result.success_prob).abs() < 1e-10);
        let fp = fast.post_state().unwrap();
        let sp = slow.result.post_state().unwrap();
        assert!(max_diff(fp.coeffs(), sp.coeffs()) < 1e-10);
        let mass = measure_plus_mass(&main, s, &anc).unwrap();
        let rebuilt: Vec<f64> = fp.coeffs().iter().map(|c| c * fast.success_prob).collect();
        assert!(max_diff(&rebuilt, &slow.plus_mass) < 1e-10);
        assert!(max_diff(&mass, &slow.plus_mass) < 1e-10);
        done += 1;
    }
}

#[test]
fn oracle_is_linear_in_mixtures() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let a = random_state(&mut rng, 3);
    let b = random_state(&mut rng, 2);
    let whole = oracle_fuse(&a, 2, &b, 1).unwrap().state;
    let mut combined = vec![0.0; 16];
    for (la, &wa) in a.coeffs().iter().enumerate() {
        for (lb, &wb) in b.coeffs().iter().enumerate() {
            let pa = GhzDiagState::basis(BasisLabel::new(3, la as u32).unwrap());
            let pb = GhzDiagState::basis(BasisLabel::new(2, lb as u32).unwrap());
            let part = oracle_fuse(&pa, 2, &pb, 1).unwrap().state;
            for (c, v) in combined.iter_mut().zip(part.coeffs()) {
                *c += wa * wb * v;
            }
        }
    }
    assert!(max_diff(whole.coeffs(), &combined) < 1e-10);
}

#[test]
fn single_selection_distillation_improves_fidelity() {
    let f = isotropic_bell(0.9).unwrap();
    let zz = StabilizerIndex::new(2, 0b10).unwrap();
    let fast = measure_stabilizer(&f, zz, &f).unwrap();
    let slow = oracle_measure(&f, zz, &f).unwrap();
    // +1 when the main ZZ sign equals the ancilla X sign: (F + e)^2 + (2e)^2, e = 1/30.
    // The ancilla ZZ sign kicks a Z onto the main pair, so the target survives
    // from (++, ++) and (+-, -+) with weight F^2 + e^2.
    let e = 0.1 / 3.0;
    let p = (0.9 + e) * (0.9 + e) + 4.0 * e * e;
    assert!((fast.success_prob - p).abs() < 1e-12);
    assert!((slow.result.success_prob - p).abs() < 1e-12);
    let fid = fast.post_state().unwrap().fidelity();
    assert!((fid - (0.81 + e * e) / p).abs() < 1e-12);
    assert!(fid > 0.9);
}

#[test]
fn noisy_fusion_matches_oracle() {
    let f = isotropic_bell(0.9).unwrap();
    let bell = GhzDiagState::perfect(2).unwrap();
    let fast = fuse(&f, 1, &bell, 0).unwrap();
    let slow = oracle_fuse(&f, 1, &bell, 0).unwrap().state;
    assert!((slow.fidelity() - 0.9).abs() < 1e-12);
    assert!(max_diff(fast.coeffs(), slow.coeffs()) < 1e-12);
    let both = fuse(&f, 1, &f, 0).unwrap();
    let both_oracle = oracle_fuse(&f, 1, &f, 0).unwrap().state;
    assert!(max_diff(both.coeffs(), both_oracle.coeffs()) < 1e-12);
    assert!(both.fidelity() < 0.9);
}
