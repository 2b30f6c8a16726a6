//! The pebble-game sparsity checker against the exhaustive subset oracle.
//!
//! The two deciders share no code: the pebble game certifies `(k, l)`-
//! sparsity through pebble gathering in an auxiliary orientation, while the
//! oracle enumerates every edge subset and counts.  They must agree on
//! every input; this example sweeps all multigraphs on up to three vertices
//! with up to five edges, loops included.
//!
//! Run with `cargo run --example pebble_vs_brute`.

use gain_rigidity::sparsity::{brute_force_check, pebble_check};

fn main() {
    // Every unordered vertex pair on three vertices, loops included.
    let slots = [(0, 0), (1, 0), (1, 1), (2, 0), (2, 1), (2, 2)];
    let mut agreements = 0;
    for mask in 0u32..1 << slots.len() {
        let edges: Vec<(usize, usize)> = slots
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        if edges.len() > 5 {
            continue;
        }
        for (k, l) in [(2, 0), (2, 1), (2, 2), (2, 3)] {
            let fast = pebble_check(3, &edges, k, l).expect("counts are supported");
            let slow = brute_force_check(3, &edges, k, l).expect("small enough to enumerate");
            assert_eq!(fast.status, slow.status, "(k,l)=({k},{l}) on {edges:?}");
            agreements += 1;
        }
    }
    println!("pebble game and enumeration agree on {agreements} checks");

    // A doubled edge is (2,2)-sparse but breaks the (2,3) count; the pebble
    // game hands back the violating subgraph as a witness.
    let doubled = [(0, 1), (0, 1)];
    for (k, l) in [(2, 2), (2, 3)] {
        let verdict = pebble_check(2, &doubled, k, l).unwrap();
        println!(
            "doubled edge, (k,l)=({k},{l}): {:?}, witness {:?} [{}]",
            verdict.status, verdict.witness_edges, verdict.condition
        );
    }
}
