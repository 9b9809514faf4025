//! Reconstructed four-party baselines consuming 22 and 42 Bell pairs.
//!
//! Both follow the same staging on parties 0..3 (ring 0-1-2-3-0):
//! 1. purified pairs on the opposite edges (0,1) and (2,3);
//! 2. purified pairs on the other edges (1,2) and (0,3);
//! 3. fusion of (0,1), (1,2), (2,3) into a 4-qubit GHZ state, with the
//!    (0,3) pair spent on the closing `Z0 Z3` check;
//! 4. two more purified pairs on (1,2) and (0,3);
//! 5. `Z1 Z2` and `Z0 Z3` measurements on the GHZ state.
//!
//! Every purified pair is built from rounds of double selection: a round
//! measures one Bell stabilizer on the running pair with an ancilla pair that
//! was itself checked on the complementary stabilizer by a third raw pair.
//! Rounds alternate between `XX` and `ZZ`, ending on `XX`. Only the leaf counts and the
//! staging are fixed by the originals; the purification depths below are
//! chosen to match them.

use std::sync::Arc;

use super::{Node, Protocol, Provenance};

const XX: u32 = 0b01;
const ZZ: u32 = 0b10;
const Z1Z2: u32 = 0b0100;
const Z0Z3: u32 = 0b1110;

fn double_selection_pair(rounds: usize) -> Arc<Node> {
    (0..rounds).fold(Node::leaf(), |pair, r| {
        let (outer, inner) = if (rounds - 1 - r) % 2 == 0 { (XX, ZZ) } else { (ZZ, XX) };
        let ancilla = Node::measure(Node::leaf(), Node::leaf(), inner).expect("Bell stabilizer");
        Node::measure(pair, ancilla, outer).expect("Bell stabilizer")
    })
}

fn staged(fusion_rounds: usize, check_rounds: usize) -> Arc<Node> {
    let ab = double_selection_pair(fusion_rounds);
    let cd = double_selection_pair(fusion_rounds);
    let bc = double_selection_pair(check_rounds);
    let ad = double_selection_pair(check_rounds);
    let ghz3 = Node::fuse(ab, 1, bc, 0).expect("fusion indices");
    let ghz4 = Node::fuse(ghz3, 2, cd, 0).expect("fusion indices");
    let ghz4 = Node::measure(ghz4, ad, Z0Z3).expect("weight-2 stabilizer");
    let bc = double_selection_pair(check_rounds);
    let ad = double_selection_pair(check_rounds);
    let ghz4 = Node::measure(ghz4, bc, Z1Z2).expect("weight-2 stabilizer");
    Node::measure(ghz4, ad, Z0Z3).expect("weight-2 stabilizer")
}

fn baseline(name: &str, fusion_rounds: usize, check_rounds: usize) -> Protocol {
    Protocol::new(
        staged(fusion_rounds, check_rounds),
        Provenance {
            algorithm: format!("{name}-reconstruction"),
            ..Default::default()
        },
    )
}

/// Four-party protocol with 22 Bell pairs.
pub fn expedient() -> Protocol {
    baseline("expedient", 2, 1)
}

/// Four-party protocol with 42 Bell pairs.
pub fn stringent() -> Protocol {
    baseline("stringent", 3, 3)
}
