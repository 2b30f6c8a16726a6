//! Parse graph files and run the tightness checker of each symmetry group,
//! including a violation with its witness subgraph.
//!
//! Run with `cargo run --example parse_and_check`.

use gain_rigidity::io::parse_graph;
use gain_rigidity::sparsity::check_tight_for_group;

const TIGHT: &str = "\
group Z2xCs
vertices 2
edge 1 0 0 0 0     # tree edge, identity gain
edge 1 0 1 0 0     # parallel edge, gain (1,0)
edge 1 1 0 1 1     # reflective loop
";

const VIOLATING: &str = "\
group Z2xCs
vertices 2
edge 1 0 0 0 0
edge 1 0 1 0 0
edge 1 1 1 0 0     # translation loop: a purely periodic overweight subgraph
";

fn main() {
    for (name, text) in [("tight", TIGHT), ("violating", VIOLATING)] {
        let parsed = parse_graph(text).expect("the sample parses");
        let verdict = check_tight_for_group(&parsed.graph).expect("the group is supported");
        println!("{name}: {:?}", verdict.status);
        println!("  condition: {}", verdict.condition);
        if !verdict.witness_edges.is_empty() {
            println!("  witness edges: {:?}", verdict.witness_edges);
            for &i in &verdict.witness_edges {
                println!("    edge {i} = {:?}", parsed.graph.edge(i));
            }
        }
    }
}
