//! Command-line front end for the gain-graph rigidity library.
//!
//! Exit codes are a stable contract across all verbs:
//!
//! * `0` success or positive verdict (tight, rigid, monochrome, no
//!   mismatches);
//! * `1` negative verdict (not tight, flexible, condition unsatisfied,
//!   mismatches found);
//! * `2` input error (unreadable files, parse errors, invalid settings);
//! * `3` a tight graph admitted no reduction, printed in full for study.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use gain_rigidity::crossval::{cross_validate, CrossValOptions};
use gain_rigidity::gain_graph::GainGraph;
use gain_rigidity::group::GroupTag;
use gain_rigidity::io::{parse_graph, read_replay, serialize_graph, write_replay, ParsedGraph};
use gain_rigidity::moves::generate::random_tight_graph;
use gain_rigidity::moves::reduce::{reduce_to_base, ReduceError};
use gain_rigidity::moves::{replay, Norm, Setting};
use gain_rigidity::numerics::{
    framework_colouring, monochrome_configuration, monochrome_verdict, random_configuration,
    rigidity_verdict, EdgeColour, DEFAULT_RANK_TOL,
};
use gain_rigidity::sparsity::Status;

#[derive(Parser)]
#[command(
    name = "gain-rigidity",
    version,
    about = "Rigidity of periodic and reflection-symmetric frameworks in lq and maximum-norm planes"
)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Check the tightness condition of the setting on a graph file.
    Check(CheckArgs),
    /// Decide generic rigidity numerically, with a constructed fallback
    /// under the maximum norm.
    Rigidity(RigidityArgs),
    /// Reduce a tight graph to a base graph, emitting a replay program.
    Reduce(ReduceArgs),
    /// Generate a random tight graph, or rebuild a graph from a replay
    /// program.
    Generate(GenerateArgs),
    /// Colour a maximum-norm framework and test the monochrome condition.
    Color(ColorArgs),
    /// Cross-validate the combinatorial checkers against numerical rank.
    Crossval(CrossvalArgs),
    /// Expand a finite window of the derived (covering) graph.
    Derive(DeriveArgs),
}

#[derive(Args)]
struct CheckArgs {
    /// Graph file to check.
    file: PathBuf,
    /// Norm of the setting: q=<real> or inf.
    #[arg(long, default_value = "q=3")]
    norm: Norm,
    /// Assert the file's symmetry group.
    #[arg(long)]
    group: Option<GroupTag>,
    /// Emit the verdict as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct RigidityArgs {
    /// Graph file to judge.
    file: PathBuf,
    /// Norm of the setting: q=<real> or inf.
    #[arg(long, default_value = "q=3")]
    norm: Norm,
    /// Assert the file's symmetry group.
    #[arg(long)]
    group: Option<GroupTag>,
    /// Random configurations sampled for the rank estimate.
    #[arg(long, default_value_t = 25)]
    trials: usize,
    /// Master seed for all randomness.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Relative tolerance of the numeric rank.
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    tol: f64,
    /// Emit the verdict as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ReduceArgs {
    /// Tight graph file to reduce.
    file: PathBuf,
    /// Norm of the setting: q=<real> or inf.
    #[arg(long, default_value = "q=3")]
    norm: Norm,
    /// Assert the file's symmetry group.
    #[arg(long)]
    group: Option<GroupTag>,
    /// Write the replay program here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit the program as one JSON array instead of JSON lines.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct GenerateArgs {
    /// Symmetry group of the generated graph (random mode).
    #[arg(long)]
    group: Option<GroupTag>,
    /// Norm of the setting: q=<real> or inf.
    #[arg(long, default_value = "q=3")]
    norm: Norm,
    /// Number of construction moves to apply.
    #[arg(long, default_value_t = 6)]
    moves: usize,
    /// Master seed for all randomness.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Rebuild the graph from this replay program instead of generating.
    #[arg(long)]
    replay: Option<PathBuf>,
    /// Also write the construction program here (random mode).
    #[arg(long)]
    steps: Option<PathBuf>,
    /// Write the graph file here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit a JSON object instead of the graph file format.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ColorArgs {
    /// Graph file; `point` lines supply the configuration.
    file: PathBuf,
    /// Assert the file's symmetry group.
    #[arg(long)]
    group: Option<GroupTag>,
    /// Build the configuration from a reduction of the graph instead of
    /// requiring or sampling one.
    #[arg(long)]
    construct: bool,
    /// Seed for sampling a configuration when the file carries none.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Emit colouring and verdict as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CrossvalArgs {
    /// Symmetry group of the batch.
    #[arg(long)]
    group: GroupTag,
    /// Norm of the setting: q=<real> or inf.
    #[arg(long, default_value = "q=3")]
    norm: Norm,
    /// Number of generated instances.
    #[arg(long, short = 'n', default_value_t = 20)]
    instances: usize,
    /// Largest number of moves per instance.
    #[arg(long, default_value_t = 6)]
    max_moves: usize,
    /// Random configurations per instance.
    #[arg(long, default_value_t = 25)]
    trials: usize,
    /// Master seed for all randomness.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Relative tolerance of the numeric rank.
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    tol: f64,
    /// Flip one matrix entry per instance to prove mismatches are caught.
    #[arg(long)]
    sabotage: bool,
    /// Regenerate any instance growing beyond this many vertices.
    #[arg(long)]
    max_vertices: Option<usize>,
    /// Write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the JSON report instead of the summary.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct DeriveArgs {
    /// Graph file whose covering graph to expand.
    file: PathBuf,
    /// Assert the file's symmetry group.
    #[arg(long)]
    group: Option<GroupTag>,
    /// Translation window radius.
    #[arg(long, default_value_t = 1)]
    window: i64,
    /// Include the reflected copies.
    #[arg(long)]
    include_reflection: bool,
    /// Write the output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit the derived graph as JSON.
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    let code = match Cli::parse().verb {
        Verb::Check(a) => cmd_check(a),
        Verb::Rigidity(a) => cmd_rigidity(a),
        Verb::Reduce(a) => cmd_reduce(a),
        Verb::Generate(a) => cmd_generate(a),
        Verb::Color(a) => cmd_color(a),
        Verb::Crossval(a) => cmd_crossval(a),
        Verb::Derive(a) => cmd_derive(a),
    };
    ExitCode::from(code)
}

fn die(msg: impl Display) -> ! {
    eprintln!("error: {msg}");
    std::process::exit(2);
}

fn load(path: &Path, asserted: Option<GroupTag>) -> ParsedGraph {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => die(format_args!("cannot read {}: {e}", path.display())),
    };
    let parsed = match parse_graph(&text) {
        Ok(p) => p,
        Err(e) => die(format_args!("{}: {e}", path.display())),
    };
    if let Some(want) = asserted {
        let got = parsed.graph.group();
        if got != want {
            die(format_args!("the file declares group {got}, but --group says {want}"));
        }
    }
    parsed
}

fn setting(norm: Norm, group: GroupTag) -> Setting {
    match Setting::new(norm, group) {
        Ok(s) => s,
        Err(e) => die(e),
    }
}

fn emit(out: Option<&PathBuf>, text: &str) {
    match out {
        Some(path) => {
            if let Err(e) = fs::write(path, text) {
                die(format_args!("cannot write {}: {e}", path.display()));
            }
        }
        None => print!("{text}"),
    }
}

fn print_json(value: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("reports serialize"));
}

fn status_str(status: Status) -> &'static str {
    match status {
        Status::Tight => "tight",
        Status::SparseNotTight => "sparse-not-tight",
        Status::Violation => "violation",
    }
}

fn cmd_check(args: CheckArgs) -> u8 {
    let parsed = load(&args.file, args.group);
    let setting = setting(args.norm, parsed.graph.group());
    let verdict = match setting.check_tight(&parsed.graph) {
        Ok(v) => v,
        Err(e) => die(e),
    };
    if args.json {
        print_json(&json!({ "setting": setting.to_string(), "verdict": verdict }));
    } else {
        println!("setting: {setting}");
        println!("status: {}", status_str(verdict.status));
        println!("condition: {}", verdict.condition);
        if !verdict.witness_edges.is_empty() {
            let list: Vec<String> =
                verdict.witness_edges.iter().map(|i| i.to_string()).collect();
            println!("witness edges: {}", list.join(" "));
        }
    }
    u8::from(verdict.status != Status::Tight)
}

fn cmd_rigidity(args: RigidityArgs) -> u8 {
    let parsed = load(&args.file, args.group);
    let setting = setting(args.norm, parsed.graph.group());
    let verdict =
        match rigidity_verdict(&parsed.graph, setting.norm, args.trials, args.seed, args.tol) {
            Ok(v) => v,
            Err(e) => die(e),
        };
    if args.json {
        print_json(&json!({ "setting": setting.to_string(), "verdict": verdict }));
    } else {
        println!("setting: {setting}");
        println!(
            "graph: {} vertices, {} edges",
            parsed.graph.num_vertices(),
            parsed.graph.num_edges()
        );
        println!("rank: {} of target {}", verdict.rank, verdict.target);
        let call = if verdict.minimally_rigid {
            "minimally rigid"
        } else if verdict.rigid {
            "rigid, overbraced"
        } else {
            "flexible"
        };
        println!("verdict: {call}");
        for w in &verdict.warnings {
            println!("note: {w}");
        }
    }
    u8::from(!verdict.rigid)
}

fn cmd_reduce(args: ReduceArgs) -> u8 {
    let parsed = load(&args.file, args.group);
    let setting = setting(args.norm, parsed.graph.group());
    let steps = match reduce_to_base(&parsed.graph, &setting) {
        Ok(steps) => steps,
        Err(ReduceError::InputNotTight(verdict)) => {
            eprintln!("input graph is not tight: {}", verdict.condition);
            if !verdict.witness_edges.is_empty() {
                let list: Vec<String> =
                    verdict.witness_edges.iter().map(|i| i.to_string()).collect();
                eprintln!("witness edges: {}", list.join(" "));
            }
            return 1;
        }
        Err(ReduceError::NoAdmissibleReduction { at }) => {
            eprintln!("no admissible reduction for a tight graph; this contradicts");
            eprintln!("the construction theorem for {setting}, so the graph follows in full:");
            eprint!("{}", serialize_graph(&at, None));
            return 3;
        }
        Err(e) => die(e),
    };
    let moves = steps
        .iter()
        .filter(|s| matches!(s, gain_rigidity::moves::ReplayStep::Move(_)))
        .count();
    let text = if args.json {
        format!("{}\n", serde_json::to_string_pretty(&steps).expect("steps serialize"))
    } else {
        write_replay(&steps)
    };
    emit(args.out.as_ref(), &text);
    eprintln!("reduced to base: {} steps ({moves} moves)", steps.len());
    0
}

fn cmd_generate(args: GenerateArgs) -> u8 {
    let (g, steps) = match &args.replay {
        Some(path) => {
            let text = match fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => die(format_args!("cannot read {}: {e}", path.display())),
            };
            let steps = match read_replay(&text) {
                Ok(s) => s,
                Err(e) => die(format_args!("{}: {e}", path.display())),
            };
            let g = match replay(&steps) {
                Ok(g) => g,
                Err(e) => die(format_args!("replay failed: {e}")),
            };
            (g, steps)
        }
        None => {
            let Some(group) = args.group else {
                die("random generation needs --group");
            };
            let setting = setting(args.norm, group);
            random_tight_graph(&setting, args.moves, args.seed)
        }
    };
    if let Some(path) = &args.steps {
        emit(Some(path), &write_replay(&steps));
    }
    let text = if args.json {
        format!(
            "{}\n",
            serde_json::to_string_pretty(&json!({
                "group": g.group().to_string(),
                "vertices": g.num_vertices(),
                "edges": g.num_edges(),
                "graph": serialize_graph(&g, None),
            }))
            .expect("graphs serialize")
        )
    } else {
        serialize_graph(&g, None)
    };
    emit(args.out.as_ref(), &text);
    eprintln!(
        "graph: {} vertices, {} edges ({})",
        g.num_vertices(),
        g.num_edges(),
        g.group()
    );
    0
}

fn colour_str(c: EdgeColour) -> &'static str {
    match c {
        EdgeColour::One => "1",
        EdgeColour::Two => "2",
        EdgeColour::ZeroRow => "zero-row",
        EdgeColour::Degenerate => "degenerate",
    }
}

fn cmd_color(args: ColorArgs) -> u8 {
    let parsed = load(&args.file, args.group);
    let g = parsed.graph;
    let setting = setting(Norm::Linf, g.group());
    let points = match parsed.points {
        Some(p) => p,
        None if args.construct => {
            let steps = match reduce_to_base(&g, &setting) {
                Ok(s) => s,
                Err(e) => die(format_args!("cannot construct a configuration: {e}")),
            };
            match monochrome_configuration(&steps) {
                Ok(p) => p,
                Err(e) => die(format_args!("cannot construct a configuration: {e}")),
            }
        }
        None => match random_configuration(&g, Norm::Linf, args.seed) {
            Ok(p) => p,
            Err(e) => die(format_args!("cannot sample a configuration: {e}")),
        },
    };
    let colouring = match framework_colouring(&g, &points) {
        Ok(c) => c,
        Err(e) => {
            println!("not well-positioned: {e}");
            return 1;
        }
    };
    let verdict = if colouring.well_positioned() {
        match monochrome_verdict(&g, &colouring) {
            Ok(v) => Some(v),
            Err(e) => die(e),
        }
    } else {
        None
    };
    if args.json {
        print_json(&json!({
            "setting": setting.to_string(),
            "well_positioned": colouring.well_positioned(),
            "colours": colouring.per_edge,
            "points": points,
            "monochrome": verdict,
        }));
    } else {
        println!("setting: {setting}");
        println!("well-positioned: {}", colouring.well_positioned());
        for (i, (e, c)) in g.edges().iter().zip(&colouring.per_edge).enumerate() {
            println!(
                "edge {i}: {} -> {} gain {:?} colour {}",
                e.tail,
                e.head,
                e.gain,
                colour_str(*c)
            );
        }
        match &verdict {
            Some(v) => println!(
                "monochrome: {} ({})",
                if v.satisfied { "satisfied" } else { "unsatisfied" },
                v.detail
            ),
            None => println!("monochrome: not applicable, a gap has tied coordinates"),
        }
    }
    u8::from(!verdict.map(|v| v.satisfied).unwrap_or(false))
}

fn cmd_crossval(args: CrossvalArgs) -> u8 {
    let setting = setting(args.norm, args.group);
    let opts = CrossValOptions {
        instances: args.instances,
        max_moves: args.max_moves,
        trials: args.trials,
        seed: args.seed,
        tol: args.tol,
        sabotage: args.sabotage,
        max_vertices: args.max_vertices,
    };
    let report = cross_validate(&setting, &opts);
    if let Some(path) = &args.out {
        let text = format!(
            "{}\n",
            serde_json::to_string_pretty(&report).expect("reports serialize")
        );
        emit(Some(path), &text);
    }
    if args.json {
        print_json(&report);
    } else {
        println!("setting: {}", report.setting);
        println!(
            "instances: {}, pairs checked: {}",
            report.instances, report.pairs_checked
        );
        println!("mismatches: {}", report.mismatches.len());
        for m in &report.mismatches {
            println!("  instance {} (seed {}): {}", m.instance, m.seed, m.description);
        }
        println!("elapsed: {} ms", report.elapsed_ms);
    }
    u8::from(!report.ok())
}

fn cmd_derive(args: DeriveArgs) -> u8 {
    if args.window < 0 {
        die("--window must be nonnegative");
    }
    let parsed = load(&args.file, args.group);
    let g: &GainGraph = &parsed.graph;
    let derived = g.derived_graph(args.window, args.include_reflection);
    let placed = parsed.points.as_ref().map(|p| derived.place(p));
    let text = if args.json {
        format!(
            "{}\n",
            serde_json::to_string_pretty(&json!({
                "group": g.group().to_string(),
                "window": args.window,
                "vertices": derived.vertices,
                "edges": derived.edges,
                "points": placed,
            }))
            .expect("derived graphs serialize")
        )
    } else {
        let mut text = format!(
            "derived graph: {} vertices, {} edges (window {}){}\n",
            derived.vertices.len(),
            derived.edges.len(),
            args.window,
            if args.include_reflection { ", with reflections" } else { "" },
        );
        for (i, (v, gain)) in derived.vertices.iter().enumerate() {
            match &placed {
                Some(points) => {
                    let [x, y] = points[i];
                    text.push_str(&format!("vertex {i}: orbit {v} gain {gain:?} at ({x}, {y})\n"));
                }
                None => text.push_str(&format!("vertex {i}: orbit {v} gain {gain:?}\n")),
            }
        }
        for (a, b) in &derived.edges {
            text.push_str(&format!("edge: {a} -- {b}\n"));
        }
        text
    };
    emit(args.out.as_ref(), &text);
    0
}
