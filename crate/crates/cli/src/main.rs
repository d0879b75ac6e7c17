use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use genwag::chain::{
    analyze_absorption, expected_steps_to_nash, simulate_many, summarize, ChainKernel, UpdateRule,
};
use genwag::conditions::{check, Condition, ConditionVerdict, Scan, Witness};
use genwag::format::{parse_rational, read_game_file};
use genwag::game::DEFAULT_MAX_PROFILES;
use genwag::graph::ProfileRef;
use genwag::search::{
    run_search, GeneratorSpec, PayoffDistribution, Predicate, SearchOptions, SearchReport,
    SearchSpec, Slice, Sweep, DEFAULT_BUDGET,
};
use genwag::{
    classify, ActionProfile, Error, Game, GraphKind, Limits, NamedExample, Payoff, ResponseGraph,
};

/// Environment variable overriding the profile-count cap.
const MAX_PROFILES_ENV: &str = "GENWAG_MAX_PROFILES";

#[derive(Parser)]
#[command(
    name = "genwag",
    version,
    about = "Response graphs and satisficing dynamics of finite games"
)]
struct Cli {
    /// Largest profile count accepted (also settable through GENWAG_MAX_PROFILES).
    #[arg(long, global = true)]
    max_profiles: Option<usize>,

    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pure equilibria and (generalized) weak acyclicity.
    Classify { game: String },
    /// List pure Nash equilibria.
    Nash { game: String },
    /// Build a response graph.
    Graph {
        game: String,
        #[arg(long, default_value = "sat")]
        kind: GraphKind,
        /// Emit Graphviz DOT.
        #[arg(long)]
        dot: bool,
    },
    /// Simulate the satisficing chain or the inertial better-response dynamics.
    Simulate {
        game: String,
        /// Start profile as action labels or indices, e.g. `M,C` or `1,1`.
        #[arg(long)]
        start: String,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// More than one prints a summary of final profiles.
        #[arg(long, default_value_t = 1)]
        trajectories: u64,
        #[arg(long, default_value = "satisficing")]
        rule: UpdateRule,
    },
    /// Probability of reaching a pure equilibrium from every start.
    Absorb {
        game: String,
        /// Also report expected steps to absorption.
        #[arg(long)]
        expected_steps: bool,
    },
    /// Evaluate a sufficient condition.
    Check {
        game: String,
        #[command(flatten)]
        which: CheckWhich,
        /// List every failing subgame instead of stopping at the first.
        #[arg(long)]
        exhaustive: bool,
    },
    /// Tally the classification of every generated game.
    Census {
        #[command(flatten)]
        generator: GeneratorArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Look for conjecture counterexamples, or re-check a proved statement with `--sweep`.
    Hunt {
        #[command(flatten)]
        generator: GeneratorArgs,
        #[command(flatten)]
        run: RunArgs,
        /// theorem1, theorem2, theorem3, lemma2 or containment.
        #[arg(long)]
        sweep: Option<Sweep>,
    },
    /// List the built-in example games.
    Examples,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct CheckWhich {
    #[arg(long)]
    theorem2: bool,
    #[arg(long)]
    isp: bool,
    #[arg(long)]
    conjecture_hypothesis: bool,
}

#[derive(Args)]
struct GeneratorArgs {
    /// Action counts, e.g. `2x2x2`. Without it only the built-in examples are used.
    #[arg(long)]
    actions: Option<String>,
    /// Payoff alphabet, e.g. `0,1,2` or `0,1/2,1`.
    #[arg(long, default_value = "0,1")]
    alphabet: String,
    /// Draw games at random instead of enumerating them.
    #[arg(long)]
    random: bool,
    /// Integer payoff range `low..high` (inclusive) for random games.
    #[arg(long)]
    range: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    count: u64,
    /// Append the built-in examples to the generated games.
    #[arg(long)]
    include_examples: bool,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    slice_start: Option<u64>,
    #[arg(long)]
    slice_stride: Option<u64>,
    /// Games examined by this run.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Resume from and save progress to this file.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    checkpoint_every: u64,
    /// Record wall time in the report.
    #[arg(long)]
    timing: bool,
}

/// A failure with its exit status.
struct Failure {
    code: u8,
    message: String,
    detail: Option<String>,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Parse { .. } => 2,
            Error::Resource { .. } => 3,
            Error::InternalConsistency { .. } => 4,
            _ => 1,
        };
        let detail = match &e {
            Error::InternalConsistency { game, .. } => game.clone(),
            _ => None,
        };
        Failure {
            code,
            message: e.to_string(),
            detail,
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
        detail: None,
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn limits(flag: Option<usize>) -> CliResult<Limits> {
    let max = match flag {
        Some(n) => n,
        None => match std::env::var(MAX_PROFILES_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| {
                usage(format!(
                    "{MAX_PROFILES_ENV} must be a positive integer, got {v:?}"
                ))
            })?,
            Err(_) => DEFAULT_MAX_PROFILES,
        },
    };
    Ok(Limits::with_max_profiles(max))
}

/// A named example, else a game file.
fn load_game(source: &str, limits: &Limits) -> CliResult<Game> {
    if let Ok(example) = source.parse::<NamedExample>() {
        return Ok(example.game());
    }
    let path = Path::new(source);
    if !path.exists() {
        return Err(usage(format!(
            "{source:?} is neither a file nor a built-in example ({})",
            NamedExample::ALL.map(NamedExample::as_str).join(", ")
        )));
    }
    Ok(read_game_file(path, limits)?)
}

fn parse_profile(game: &Game, text: &str) -> CliResult<ActionProfile> {
    let inner = text.trim().trim_start_matches('(').trim_end_matches(')');
    let tokens: Vec<&str> = inner.split(',').map(str::trim).collect();
    if tokens.len() != game.num_players() {
        return Err(usage(format!(
            "profile {text:?} names {} actions, the game has {} players",
            tokens.len(),
            game.num_players()
        )));
    }
    let actions = tokens
        .iter()
        .enumerate()
        .map(|(i, tok)| {
            (0..game.action_counts()[i])
                .find(|&a| game.action_label(i, a) == *tok)
                .or_else(|| tok.parse().ok().filter(|&a| a < game.action_counts()[i]))
                .ok_or_else(|| usage(format!("player {i} has no action {tok:?}")))
        })
        .collect::<CliResult<Vec<usize>>>()?;
    Ok(ActionProfile::new(actions))
}

fn parse_shape(text: &str) -> CliResult<Vec<usize>> {
    text.split(['x', 'X', ','])
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .ok()
                .filter(|&k| k > 0)
                .ok_or_else(|| usage(format!("bad action count {t:?} in {text:?}")))
        })
        .collect()
}

fn parse_alphabet(text: &str) -> CliResult<Vec<Payoff>> {
    text.split(',')
        .map(|t| parse_rational(t).map_err(|e| usage(format!("bad alphabet entry: {e}"))))
        .collect()
}

fn parse_range(text: &str) -> CliResult<(i64, i64)> {
    let bad = || usage(format!("range must look like low..high, got {text:?}"));
    let (lo, hi) = text.split_once("..").ok_or_else(bad)?;
    let hi = hi.trim_start_matches('=');
    Ok((
        lo.trim().parse().map_err(|_| bad())?,
        hi.trim().parse().map_err(|_| bad())?,
    ))
}

fn search_spec(g: &GeneratorArgs, run: &RunArgs) -> CliResult<SearchSpec> {
    let generated = match &g.actions {
        None => None,
        Some(shape) => {
            let action_counts = parse_shape(shape)?;
            Some(if g.random {
                let payoffs = match &g.range {
                    Some(r) => {
                        let (low, high) = parse_range(r)?;
                        PayoffDistribution::IntRange { low, high }
                    }
                    None => PayoffDistribution::Alphabet {
                        values: parse_alphabet(&g.alphabet)?,
                    },
                };
                GeneratorSpec::Random {
                    action_counts,
                    payoffs,
                    seed: g.seed,
                    count: g.count,
                }
            } else {
                GeneratorSpec::Exhaustive {
                    action_counts,
                    alphabet: parse_alphabet(&g.alphabet)?,
                }
            })
        }
    };
    let generator = match (generated, g.include_examples) {
        (None, _) => GeneratorSpec::named(),
        (Some(gen), false) => gen,
        (Some(gen), true) => GeneratorSpec::Concat {
            parts: vec![gen, GeneratorSpec::named()],
        },
    };
    let mut spec = SearchSpec::new(generator).with_budget(run.budget);
    if run.slice_start.is_some() || run.slice_stride.is_some() {
        spec = spec.with_slice(Slice::new(
            run.slice_start.unwrap_or(0),
            run.slice_stride.unwrap_or(1),
        )?);
    }
    Ok(spec)
}

fn pretty<T: serde::Serialize + ?Sized>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("output serializes")
}

fn verdict_text(v: &ConditionVerdict, game: &Game) -> String {
    let name = match v.condition {
        Condition::Theorem2 => "two-player strict equilibrium",
        Condition::Isp => "induced subgame property",
        Condition::ConjectureHypothesis => "strict equilibrium in every induced subgame",
    };
    let mut out = format!("{name}: {}\n", if v.holds { "holds" } else { "fails" });
    let subgame = |w: &genwag::conditions::SubgameWitness| {
        let fixed: Vec<String> = w
            .fixed
            .iter()
            .enumerate()
            .map(|(i, a)| a.map_or("*".to_string(), |a| game.action_label(i, a)))
            .collect();
        format!(
            "subgame ({}) with {} pure Nash, {} strict",
            fixed.join(","),
            w.pure_nash,
            w.strict_pure_nash
        )
    };
    match &v.witness {
        Some(Witness::StrictNash { profile }) => {
            out += &format!("witness: strict equilibrium {profile}\n")
        }
        Some(Witness::Subgame(w)) => out += &format!("witness: {}\n", subgame(w)),
        None => {}
    }
    for w in &v.further_failures {
        out += &format!("also fails: {}\n", subgame(w));
    }
    out
}

fn report_text(r: &SearchReport) -> String {
    let t = &r.tallies;
    let mut out = format!(
        "{}: {} games examined ({} of {} positions{})\n",
        r.predicate,
        r.games_examined,
        r.cursor,
        r.positions,
        if r.complete { "" } else { ", resumable" }
    );
    out += &format!("no pure Nash: {}\n", t.no_pure_nash);
    out += &format!("weakly acyclic: {}\n", t.weakly_acyclic);
    out += &format!(
        "generalized weakly acyclic, not weakly acyclic: {}\n",
        t.genwag_not_wag
    );
    out += &format!(
        "pure Nash, not generalized weakly acyclic: {}\n",
        t.pure_nash_not_genwag
    );
    if r.predicate == "conjecture" {
        out += &format!("counterexamples: {}\n", r.counterexamples.len());
        for c in &r.counterexamples {
            out += &format!("  game {}: {}\n", c.index, c.game);
        }
    }
    if let Some(s) = r.wall_time_seconds {
        out += &format!("wall time: {s:.3}s\n");
    }
    out
}

fn run(cli: Cli) -> CliResult<String> {
    let limits = limits(cli.max_profiles)?;
    let json = cli.json;
    match cli.command {
        Command::Classify { game } => {
            let game = load_game(&game, &limits)?;
            let report = classify(&game)?;
            Ok(if json {
                pretty(&report)
            } else {
                report.to_string()
            })
        }
        Command::Nash { game } => {
            let game = load_game(&game, &limits)?;
            let nash: Vec<Value> = game
                .pure_nash_flat()
                .into_iter()
                .map(|f| json!({ "profile": ProfileRef::new(&game, f), "strict": game.is_strict_pure_nash_at(f) }))
                .collect();
            if json {
                return Ok(pretty(&json!({ "pure_nash": nash })));
            }
            if nash.is_empty() {
                return Ok("no pure Nash equilibrium\n".into());
            }
            Ok(game
                .pure_nash_flat()
                .into_iter()
                .map(|f| {
                    let strict = if game.is_strict_pure_nash_at(f) {
                        "strict"
                    } else {
                        "not strict"
                    };
                    format!("{} {strict}\n", ProfileRef::new(&game, f))
                })
                .collect())
        }
        Command::Graph { game, kind, dot } => {
            let game = load_game(&game, &limits)?;
            let graph = ResponseGraph::build_with_limits(&game, kind, &limits)?;
            if dot {
                return Ok(graph.to_dot());
            }
            if json {
                let edges: Vec<[usize; 2]> = graph.edges().map(|(a, b)| [a, b]).collect();
                let nodes: Vec<ProfileRef> = (0..graph.num_nodes())
                    .map(|f| ProfileRef::new(&game, f))
                    .collect();
                return Ok(pretty(&json!({
                    "kind": kind,
                    "nodes": nodes,
                    "edges": edges,
                    "pure_nash": graph.nash(),
                    "no_path_to_nash": graph.profiles_without_path(),
                })));
            }
            let mut out = format!(
                "{kind} graph: {} nodes, {} edges\n",
                graph.num_nodes(),
                graph.num_edges()
            );
            for (a, b) in graph.edges() {
                out += &format!("{} -> {}\n", game.profile_label(a), game.profile_label(b));
            }
            Ok(out)
        }
        Command::Simulate {
            game,
            start,
            steps,
            seed,
            trajectories,
            rule,
        } => {
            let game = load_game(&game, &limits)?;
            let start = parse_profile(&game, &start)?;
            if trajectories == 0 {
                return Err(usage("--trajectories must be positive"));
            }
            let runs = simulate_many(&game, rule, &start, steps, seed, trajectories)?;
            if trajectories == 1 {
                let report = runs[0].report(&game);
                if json {
                    return Ok(pretty(&report));
                }
                let path: Vec<String> = report
                    .profiles
                    .iter()
                    .map(|&f| game.profile_label(f))
                    .collect();
                return Ok(format!(
                    "rng {} seed {} rule {}\n{}\n",
                    report.rng,
                    seed,
                    rule,
                    path.join(" -> ")
                ));
            }
            let summary = summarize(&game, &runs).expect("at least one trajectory");
            if json {
                return Ok(pretty(&summary));
            }
            let mut out = format!(
                "{} trajectories of {} steps from {} (rng {}, seed {})\nended at a pure Nash equilibrium: {}\n",
                summary.trajectories, summary.steps, summary.start, summary.rng, summary.seed, summary.ended_at_nash
            );
            for (p, c) in &summary.final_profiles {
                out += &format!("final {p}: {c}\n");
            }
            Ok(out)
        }
        Command::Absorb {
            game,
            expected_steps,
        } => {
            let game = load_game(&game, &limits)?;
            let kernel = ChainKernel::build_with_limits(&game, &limits)?;
            let analysis = analyze_absorption(&kernel)?;
            let steps = if expected_steps {
                Some(expected_steps_to_nash(&kernel)?)
            } else {
                None
            };
            if json {
                let starts: Vec<Value> = analysis
                    .probabilities
                    .iter()
                    .enumerate()
                    .map(|(f, p)| {
                        let mut v =
                            json!({ "profile": ProfileRef::new(&game, f), "probability": p });
                        if let Some(s) = &steps {
                            v["expected_steps"] = json!(s[f]);
                        }
                        v
                    })
                    .collect();
                return Ok(pretty(&json!({
                    "method": analysis.method,
                    "intermediate_states": analysis.intermediate_states,
                    "residual": analysis.residual,
                    "starts": starts,
                })));
            }
            let mut out = String::new();
            for (f, p) in analysis.probabilities.iter().enumerate() {
                out += &format!("{}: {p}", game.profile_label(f));
                if let Some(s) = &steps {
                    match &s[f] {
                        Some(e) => out += &format!(" (expected steps {e})"),
                        None => out += " (expected steps infinite)",
                    }
                }
                out.push('\n');
            }
            Ok(out)
        }
        Command::Check {
            game,
            which,
            exhaustive,
        } => {
            let game = load_game(&game, &limits)?;
            let condition = if which.theorem2 {
                Condition::Theorem2
            } else if which.isp {
                Condition::Isp
            } else {
                Condition::ConjectureHypothesis
            };
            let mode = if exhaustive {
                Scan::Exhaustive
            } else {
                Scan::FirstFailure
            };
            let verdict = check(&game, condition, mode, &limits)?;
            Ok(if json {
                pretty(&verdict)
            } else {
                verdict_text(&verdict, &game)
            })
        }
        Command::Census { generator, run } => search(Predicate::Census, &generator, &run, json),
        Command::Hunt {
            generator,
            run,
            sweep,
        } => {
            let predicate = sweep.map_or(Predicate::Conjecture, Predicate::Sweep);
            search(predicate, &generator, &run, json)
        }
        Command::Examples => {
            if json {
                let list: Vec<Value> = NamedExample::ALL
                    .iter()
                    .map(|e| json!({ "name": e.as_str(), "description": e.description() }))
                    .collect();
                return Ok(pretty(&list));
            }
            Ok(NamedExample::ALL
                .iter()
                .map(|e| format!("{}  {}\n", e.as_str(), e.description()))
                .collect())
        }
    }
}

fn search(
    predicate: Predicate,
    generator: &GeneratorArgs,
    run: &RunArgs,
    json: bool,
) -> CliResult<String> {
    let spec = search_spec(generator, run)?;
    let options = SearchOptions {
        workers: run.workers,
        checkpoint: run.checkpoint.clone(),
        checkpoint_every: run.checkpoint_every,
        record_timing: run.timing,
    };
    let report = run_search(&spec, predicate, &options)?;
    Ok(if json {
        report.to_json_string()
    } else {
        report_text(&report)
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(mut out) => {
            if !out.ends_with('\n') {
                out.push('\n');
            }
            // A closed pipe (e.g. `| head`) is not an error worth reporting.
            let _ = std::io::stdout().lock().write_all(out.as_bytes());
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            if let Some(d) = f.detail {
                eprintln!("{d}");
            }
            ExitCode::from(f.code)
        }
    }
}
