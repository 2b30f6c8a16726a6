//! Arithmetic in the plane crystallographic group generated by two
//! independent translations and a horizontal-axis reflection, and how
//! switching relabels a gain graph without changing its structure.
//!
//! Run with `cargo run --example group_arithmetic`.

use gain_rigidity::gain_graph::GainGraph;
use gain_rigidity::group::{GroupElement, GroupTag};

fn main() {
    let t = GroupElement::translation(2, -1);
    let s = GroupElement::reflection(0, 1);
    println!("t = {t:?}, s = {s:?}");
    println!("t . s = {:?}", t.compose(&s));
    println!("s . t = {:?}", s.compose(&t));
    println!("s . s = {:?} (an involution)", s.compose(&s));
    println!("t^-1 = {:?}", t.inverse());

    let p = [0.25, 1.5];
    println!("\n(t.s) applied to {p:?} = {:?}", t.compose(&s).apply(p));
    println!("t applied to (s applied to {p:?}) = {:?}", t.apply(s.apply(p)));

    // A two-vertex gain graph with a reflective loop.  Switching at a vertex
    // re-chooses its orbit representative: incident gains change, but every
    // closed walk keeps its net gain up to conjugation.
    let mut g = GainGraph::new(GroupTag::Z2xCs, 2);
    g.push_edge(1, 0, GroupElement::IDENTITY);
    g.push_edge(1, 0, GroupElement::translation(1, 0));
    g.push_edge(1, 1, GroupElement::reflection(0, 1));
    println!("\nbefore switching: {:?}", g.edges());
    println!("balanced: {}, purely periodic: {}", g.is_balanced(), g.is_purely_periodic());

    let switched = g.switch(1, &GroupElement::translation(0, 2));
    println!("after switching vertex 1 by (0,2):");
    println!("{:?}", switched.edges());
    println!(
        "balanced: {}, purely periodic: {}",
        switched.is_balanced(),
        switched.is_purely_periodic()
    );
}
