//! Command-line surface. Exit codes: 0 success, 1 a check failed, 2 usage
//! or input error. Reports start with a `# glc seed=…` header.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::canon::isomorphic;
use crate::emergent::{check_move_soundness, check_soundness_of, miswired_r1a, SECTOR_MOVES};
use crate::engine::{apply_move, enumerate_redexes};
use crate::format::{emit_glc, parse_glc, to_dot};
use crate::graph::{Endpoint, PortGraph};
use crate::group::GroupElem;
use crate::lambda::{parse_term, to_graph};
use crate::macros::{combinator, fixpoint, pack_unpack, zipper};
use crate::rules::{find_move, Direction};
use crate::script::{emit_script, parse_script, reduce, run_script, search, tally, SearchOptions, Status, Step};
use crate::tangle::{
    classify_moves, emit_tangle, parse_tangle, reduced, reidemeister, translate, CrossingStyle, Verdict,
};

/// Environment variable naming a config file; `--config` takes precedence.
pub const CONFIG_ENV: &str = "GLC_CONFIG";

/// Run bounds. Set from defaults, then a `key = value` file, then flags.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Config {
    pub seed: u64,
    pub max_steps: usize,
    pub max_depth: usize,
    pub trials: usize,
    pub dim: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 17,
            max_steps: 200,
            max_depth: 6,
            trials: 100,
            dim: 2,
        }
    }
}

impl Config {
    /// Parses `key = value` lines over the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Config, String> {
        let mut c = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("config line {}: expected key = value", i + 1))?;
            let (k, v) = (k.trim(), v.trim());
            let num = |v: &str| -> Result<u64, String> {
                v.parse::<u64>().map_err(|_| format!("config line {}: `{v}` is not a number", i + 1))
            };
            let positive = |v: &str| -> Result<usize, String> {
                match num(v)? {
                    0 => Err(format!("config line {}: {k} must be positive", i + 1)),
                    n => Ok(n as usize),
                }
            };
            match k.replace('-', "_").as_str() {
                "seed" => c.seed = num(v)?,
                "max_steps" => c.max_steps = positive(v)?,
                "max_depth" => c.max_depth = positive(v)?,
                "trials" => c.trials = positive(v)?,
                "dim" => c.dim = positive(v)?,
                _ => return Err(format!("config line {}: unknown key `{k}`", i + 1)),
            }
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Config, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Config::parse(&text)
    }
}

#[derive(Parser, Debug)]
#[command(name = "glc", about = "Graph rewriting for graphic lambda calculus")]
struct Cli {
    /// key = value config file (overrides $GLC_CONFIG)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Translate a lambda term and print it as .glc
    Parse { term: String },
    /// Print a .glc graph as DOT
    Show { graph: PathBuf },
    /// Run a move script on a graph and print the result
    Apply {
        graph: PathBuf,
        script: PathBuf,
        /// also print the trace with a snapshot after every step
        #[arg(long)]
        trace: bool,
    },
    /// Beta-priority reduction with cleanup
    Reduce {
        graph: PathBuf,
        #[arg(long, default_value = "beta-priority")]
        strategy: String,
        #[arg(long)]
        max_steps: Option<usize>,
    },
    /// Breadth-first search for a move script between two graphs
    Search {
        from: PathBuf,
        to: PathBuf,
        /// comma-separated moves, `name` or `name:rev`
        #[arg(long, default_value = "beta,beta:rev,co_assoc,co_assoc:rev,co_comm")]
        moves: String,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Built-in demonstrations: omega, skk, zipper:N, fixpoint, packing
    Demo { name: String },
    /// Emergent algebra checks
    Emer {
        #[command(subcommand)]
        cmd: EmerCmd,
    },
    /// Tangle diagrams
    Tangle {
        #[command(subcommand)]
        cmd: TangleCmd,
    },
}

#[derive(Subcommand, Debug)]
enum EmerCmd {
    /// Check that moves preserve exact evaluation on random hosts
    Soundness(SoundnessArgs),
}

#[derive(Args, Debug)]
struct SoundnessArgs {
    /// a single move; default is every sector move plus the negative control
    #[arg(long = "move")]
    mv: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Style {
    Lambda,
    Emergent,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Side {
    Lhs,
    Rhs,
}

#[derive(Subcommand, Debug)]
enum TangleCmd {
    /// Translate a diagram into a graph
    Translate {
        diagram: PathBuf,
        #[arg(long, value_enum, default_value = "lambda")]
        style: Style,
        /// scale of positive crossings in the emergent style
        #[arg(long, default_value = "e")]
        eps: String,
    },
    /// Print one side of an oriented Reidemeister move as a diagram
    Move {
        name: String,
        #[arg(long, value_enum, default_value = "lhs")]
        side: Side,
    },
    /// Print the endpoint matching left after splicing every crossing
    Reduced { diagram: PathBuf },
    /// Classify the 16 oriented Reidemeister moves in the lambda style
    Classify {
        #[arg(long, default_value_t = 8)]
        depth: usize,
    },
}

enum Failure {
    Usage(String),
    Check(String),
}

type Outcome = Result<String, Failure>;

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn read_graph(path: &Path) -> Result<PortGraph, Failure> {
    parse_glc(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn header(cfg: &Config) -> String {
    format!("# glc seed={}\n", cfg.seed)
}

fn verdict(ok: bool, report: String) -> Outcome {
    if ok {
        Ok(report)
    } else {
        Err(Failure::Check(report))
    }
}

fn parse_moves(list: &str) -> Result<Vec<(String, Direction)>, Failure> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|tok| {
            let (name, dir) = match tok.split_once(':') {
                Some((name, d)) => (name, d.parse::<Direction>().map_err(usage)?),
                None => (tok, Direction::Fwd),
            };
            match find_move(name) {
                Some(_) => Ok((name.to_string(), dir)),
                None => Err(usage(format!("unknown move `{name}`"))),
            }
        })
        .collect()
}

/// Forward betas to exhaustion; returns the count and the final graph.
fn open_all(mut g: PortGraph) -> (usize, PortGraph) {
    let mut n = 0;
    while let Some(b) = enumerate_redexes(&g, "beta", Direction::Fwd).expect("catalogue move").into_iter().next() {
        g = apply_move(&g, &b).expect("enumerated binding applies");
        n += 1;
    }
    (n, g)
}

fn demo(name: &str, cfg: &Config) -> Outcome {
    let mut s = header(cfg);
    match name.split_once(':') {
        Some(("zipper", n)) => {
            let n: usize = n.parse().map_err(|_| usage(format!("bad zipper size `{n}`")))?;
            let z = zipper(n).map_err(usage)?;
            let (betas, end) = open_all(z.graph);
            let _ = writeln!(s, "zipper {n}: {betas} beta moves, {} wires, {} nodes", end.wire_count(), end.node_count());
            return verdict(betas == n && end.node_count() == 0, s);
        }
        Some(_) => return Err(usage(format!("unknown demo `{name}`"))),
        None => {}
    }
    match name {
        "omega" => {
            let om = to_graph(&parse_term("(\\x.x x)(\\x.x x)").expect("literal"));
            let r = reduce(&om, "beta-priority", cfg.max_steps).map_err(usage)?;
            let _ = writeln!(s, "status={} beta={}", r.status, r.steps);
            s.push_str(&emit_script(&r.trace.script()));
            verdict(r.status == Status::Cycle, s)
        }
        "skk" => {
            let skk = to_graph(&parse_term("(\\x.\\y.\\z.x z (y z)) (\\x.\\y.x) (\\x.\\y.x)").expect("literal"));
            let r = reduce(&skk, "beta-priority", cfg.max_steps).map_err(usage)?;
            for (rule, n) in tally(&r.trace) {
                let _ = writeln!(s, "{rule} {n}");
            }
            s.push_str(&emit_script(&r.trace.script()));
            let i = combinator("I").expect("named").graph;
            let ok = isomorphic(&r.graph, &i).map_err(usage)?;
            let _ = writeln!(s, "final isomorphic to I: {ok}");
            verdict(ok, s)
        }
        "fixpoint" => {
            let fp = fixpoint(&combinator("I").expect("named")).map_err(usage)?;
            let (end, _) = run_script(&fp.host.graph, &fp.witness).map_err(usage)?;
            s.push_str(&emit_script(&fp.witness));
            let ok = isomorphic(&end, &fp.point.graph).map_err(usage)?;
            let _ = writeln!(s, "a(b) reaches b: {ok}");
            verdict(ok, s)
        }
        "packing" => {
            let m = pack_unpack();
            let (betas, end) = open_all(m.graph.clone());
            let joined = |a: &str, b: &str| {
                let (a, b) = (m.role(a).expect("role"), m.role(b).expect("role"));
                end.head_of(Endpoint::Leaf(a)) == Some(Endpoint::Leaf(b))
            };
            let ok = betas == 3 && end.node_count() == 0 && joined("in1", "out1") && joined("in2", "out2");
            let _ = writeln!(s, "pack then unpack: {betas} beta moves, {} wires", end.wire_count());
            verdict(ok, s)
        }
        _ => Err(usage(format!("unknown demo `{name}`"))),
    }
}

fn soundness(a: &SoundnessArgs, cfg: &Config) -> Outcome {
    let trials = a.trials.unwrap_or(cfg.trials);
    let dim = a.dim.unwrap_or(cfg.dim);
    let mut s = header(cfg);
    let mut ok = true;
    let rules: Vec<&str> = match &a.mv {
        Some(m) => vec![m.as_str()],
        None => SECTOR_MOVES.to_vec(),
    };
    for rule in rules {
        if !SECTOR_MOVES.contains(&rule) {
            return Err(usage(format!("`{rule}` is not an emergent-sector move")));
        }
        let r = check_move_soundness(rule, trials, dim, cfg.seed)
            .ok_or_else(|| usage(format!("`{rule}` is not an emergent-sector move")))?;
        ok &= r.passed();
        let _ = writeln!(s, "{r}");
    }
    if a.mv.is_none() {
        let neg = check_soundness_of(&miswired_r1a(), trials, dim, cfg.seed);
        ok &= neg.failures > 0;
        let _ = writeln!(s, "negative control {neg}");
    }
    verdict(ok, s)
}

fn tangle(cmd: &TangleCmd, cfg: &Config) -> Outcome {
    let load = |p: &Path| parse_tangle(&read(p)?).map_err(|e| usage(format!("{}: {e}", p.display())));
    match cmd {
        TangleCmd::Translate { diagram, style, eps } => {
            let t = load(diagram)?;
            let style = match style {
                Style::Lambda => CrossingStyle::Lambda,
                Style::Emergent => CrossingStyle::Emergent(eps.parse::<GroupElem>().map_err(usage)?),
            };
            Ok(emit_glc(&translate(&t, &style).map_err(usage)?))
        }
        TangleCmd::Move { name, side } => {
            let (l, r) = reidemeister(name).map_err(usage)?;
            Ok(emit_tangle(match side {
                Side::Lhs => &l,
                Side::Rhs => &r,
            }))
        }
        TangleCmd::Reduced { diagram } => {
            let t = load(diagram)?;
            Ok(format!("{}\n", reduced(&t).map_err(usage)?))
        }
        TangleCmd::Classify { depth } => {
            let mut s = header(cfg);
            let table = classify_moves(*depth).map_err(usage)?;
            let (mut yes, mut no) = (0, 0);
            for row in &table {
                let _ = match &row.verdict {
                    Verdict::Realizable(script) => {
                        yes += 1;
                        writeln!(s, "{:<4} realizable  {} steps", row.name, script.len())
                    }
                    Verdict::Obstructed { lhs, rhs } => {
                        no += 1;
                        writeln!(s, "{:<4} obstructed  {lhs} vs {rhs}", row.name)
                    }
                    Verdict::Unknown => writeln!(s, "{:<4} unknown", row.name),
                };
            }
            let _ = writeln!(s, "{yes} realizable, {no} obstructed");
            verdict(yes + no == table.len(), s)
        }
    }
}

fn dispatch(cli: &Cli, cfg: &Config) -> Outcome {
    match &cli.cmd {
        Cmd::Parse { term } => {
            let t = parse_term(term).map_err(usage)?;
            Ok(emit_glc(&to_graph(&t)))
        }
        Cmd::Show { graph } => to_dot(&read_graph(graph)?).map_err(usage),
        Cmd::Apply { graph, script, trace } => {
            let g = read_graph(graph)?;
            let steps = parse_script(&read(script)?).map_err(usage)?;
            let (end, tr) = run_script(&g, &steps).map_err(|e| Failure::Check(e.to_string()))?;
            Ok(if *trace { tr.export() } else { emit_glc(&end) })
        }
        Cmd::Reduce { graph, strategy, max_steps } => {
            let g = read_graph(graph)?;
            let r = reduce(&g, strategy, max_steps.unwrap_or(cfg.max_steps)).map_err(usage)?;
            let mut s = header(cfg);
            let _ = writeln!(s, "# status={} beta={}", r.status, r.steps);
            s.push_str(&emit_glc(&r.graph));
            Ok(s)
        }
        Cmd::Search { from, to, moves, depth } => {
            let (a, b) = (read_graph(from)?, read_graph(to)?);
            let moves = parse_moves(moves)?;
            let refs: Vec<(&str, Direction)> = moves.iter().map(|(m, d)| (m.as_str(), *d)).collect();
            let depth = depth.unwrap_or(cfg.max_depth);
            let mut s = header(cfg);
            match search(&a, &b, &refs, depth, &SearchOptions::default()) {
                Some(bs) => {
                    let steps: Vec<Step> = bs.iter().map(Step::exact).collect();
                    s.push_str(&emit_script(&steps));
                    Ok(s)
                }
                None => {
                    let _ = writeln!(s, "no script within depth {depth}");
                    Err(Failure::Check(s))
                }
            }
        }
        Cmd::Demo { name } => demo(name, cfg),
        Cmd::Emer { cmd: EmerCmd::Soundness(a) } => soundness(a, cfg),
        Cmd::Tangle { cmd } => tangle(cmd, cfg),
    }
}

/// Runs one command; writes the report to `out`, diagnostics to `err`.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let path = cli.config.clone().or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
    let mut cfg = match path {
        Some(p) => match Config::load(&p) {
            Ok(c) => c,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return 2;
            }
        },
        None => Config::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    match dispatch(&cli, &cfg) {
        Ok(report) => {
            let _ = write!(out, "{report}");
            0
        }
        Err(Failure::Check(report)) => {
            let _ = write!(out, "{report}");
            1
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let mut argv = vec!["glc"];
        argv.extend_from_slice(args);
        let code = run_cli(argv, &mut o, &mut e);
        (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
    }

    #[test]
    fn config_parsing() {
        let c = Config::parse("# bounds\nseed = 5\nmax-steps=9\n").unwrap();
        assert_eq!((c.seed, c.max_steps, c.trials), (5, 9, 100));
        assert!(Config::parse("trials = 0").is_err());
        assert!(Config::parse("colour = red").is_err());
        assert!(Config::parse("seed").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(&["parse", "\\x.x"]).0, 0);
        assert_eq!(run(&["parse", "\\x."]).0, 2);
        assert_eq!(run(&["frobnicate"]).0, 2);
        assert_eq!(run(&["demo", "nothing"]).0, 2);
        assert_eq!(run(&["show", "/nonexistent.glc"]).0, 2);
        assert_eq!(run(&["--help"]).0, 0);
    }

    #[test]
    fn demos_verify() {
        for d in ["omega", "skk", "zipper:3", "fixpoint", "packing"] {
            let (code, out, _) = run(&["demo", d]);
            assert_eq!(code, 0, "{d}: {out}");
            assert!(out.starts_with("# glc seed=17\n"));
        }
        assert!(run(&["demo", "skk"]).1.contains("final isomorphic to I: true"));
    }

    #[test]
    fn seeded_reports_repeat() {
        let a = run(&["--seed", "3", "emer", "soundness", "--move", "r2", "--trials", "10"]);
        let b = run(&["--seed", "3", "emer", "soundness", "--move", "r2", "--trials", "10"]);
        assert_eq!(a, b);
        assert_eq!(a.0, 0);
        assert!(a.1.starts_with("# glc seed=3\n"));
        assert_eq!(run(&["emer", "soundness", "--move", "beta"]).0, 2);
    }

    #[test]
    fn classify_report() {
        let (code, out, _) = run(&["tangle", "classify"]);
        assert_eq!(code, 0);
        assert!(out.contains("12 realizable, 4 obstructed"), "{out}");
    }
}
