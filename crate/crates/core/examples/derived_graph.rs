//! Expand finite windows of the derived (covering) graph: the infinite
//! symmetric framework that a gain graph describes, materialized for
//! inspection.
//!
//! Run with `cargo run --example derived_graph`.

use gain_rigidity::gain_graph::GainGraph;
use gain_rigidity::group::{GroupElement, GroupTag};

fn main() {
    // A single vertex with a horizontal translation loop derives to
    // horizontal paths: each lattice copy links to its neighbour.
    let mut path = GainGraph::new(GroupTag::Z2, 1);
    path.push_edge(0, 0, GroupElement::translation(1, 0));
    let derived = path.derived_graph(1, false);
    println!(
        "translation loop, window 1: {} vertices, {} edges",
        derived.vertices.len(),
        derived.edges.len()
    );
    let placed = derived.place(&[[0.2, 0.4]]);
    for ((v, gain), p) in derived.vertices.iter().zip(&placed) {
        println!("  orbit {v} under {gain:?} at ({:.1}, {:.1})", p[0], p[1]);
    }

    // The reflective loop rungs each lattice copy to its mirror image; the
    // window must admit the reflection's vertical offset.
    let mut mirror = GainGraph::new(GroupTag::Z2xCs, 1);
    mirror.push_edge(0, 0, GroupElement::reflection(0, 1));
    let derived = mirror.derived_graph(1, true);
    println!(
        "\nreflective loop, window 1 with reflections: {} vertices, {} edges",
        derived.vertices.len(),
        derived.edges.len()
    );
    for (i, (a, b)) in derived.edges.iter().enumerate().take(4) {
        println!(
            "  edge {i}: {:?} -- {:?}",
            derived.vertices[*a], derived.vertices[*b]
        );
    }
}
