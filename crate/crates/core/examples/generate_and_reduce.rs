//! Grow a random tight gain graph by construction moves, reduce it back to
//! a base graph, and replay the recorded program to recover the original.
//!
//! Every tight graph of a setting is reachable from that setting's base
//! graphs by the admissible moves, so reduction must always terminate at a
//! base, with every intermediate graph passing the checker, and the replay
//! must reconstruct the input exactly up to edge order.
//!
//! Run with `cargo run --example generate_and_reduce`.

use gain_rigidity::group::GroupTag;
use gain_rigidity::moves::generate::random_tight_graph;
use gain_rigidity::moves::reduce::reduce_to_base;
use gain_rigidity::moves::{replay, Norm, ReplayStep, Setting};

fn main() {
    let setting = Setting::new(Norm::Lq(1.5), GroupTag::Cs).unwrap();
    let (g, _) = random_tight_graph(&setting, 7, 2024);
    println!(
        "generated a tight graph for {setting}: {} vertices, {} edges",
        g.num_vertices(),
        g.num_edges()
    );
    assert!(setting.check_tight(&g).unwrap().is_tight());

    let program = reduce_to_base(&g, &setting).expect("tight graphs reduce to bases");
    for step in &program {
        match step {
            ReplayStep::Base { base } => println!(
                "  base graph: {} vertices, {} edges",
                base.num_vertices(),
                base.num_edges()
            ),
            ReplayStep::Switch { switch: (v, gamma) } => {
                println!("  switch vertex {v} by {gamma:?}")
            }
            ReplayStep::Move(record) => println!("  {:?}", record.kind()),
        }
    }

    let rebuilt = replay(&program).expect("programs replay");
    println!(
        "replayed {} steps; matches the input: {}",
        program.len(),
        rebuilt.same_up_to_edge_order(&g)
    );
}
