//! Command-line front end.
//!
//! Every subcommand except `preset` prints one JSON envelope
//! `{"status": "ok" | "error", "payload": ..., "diagnostics": [...]}` on
//! stdout. `preset` prints a bare model file so its output can be fed back
//! to the other subcommands. Exit codes: 0 ok, 1 domain error, 2 usage error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact::{
    build_extended, chain_decomposition, commute_check, enumerate_states, mu_independence,
    per_site_matrix, stationary_for, transition_matrix, ClassSelector, TopplingRule,
    DEFAULT_STATE_CAP,
};
use crate::io::{model_to_json, parse_model_json, parse_mu};
use crate::linalg::RationalMatrix;
use crate::model::{dissipativity, AdditionDistribution, Configuration, SandpileModel, SiteIndex};
use crate::montecarlo::{default_burn_in, simulate_replicas, tv_distance};
use crate::presets::{
    bssm_model, paper_triangle_asm, paper_triangle_ssm, single_grain_model, single_grain_path,
    triangle_mu, MultigraphSpec, NullToppling, Route,
};
use crate::rational::{format_rational, to_f64, Probability};
use crate::stabilize::{
    default_fuel, deterministic_stabilize, CounterState, DeckSource, SiteSelectionPolicy,
};

const SUBCOMMANDS: &[&str] = &[
    "validate",
    "depth",
    "stabilize",
    "matrix",
    "stationary",
    "commute",
    "classes",
    "mu-independence",
    "simulate",
    "preset",
];

#[derive(Debug, Parser)]
#[command(
    name = "stochsand",
    version,
    about = "Stochastic sandpile models: exact chains and simulation"
)]
struct Cli {
    /// Print the payload schema of a subcommand and exit.
    #[arg(long, value_name = "SUBCOMMAND")]
    schema: Option<String>,
    /// Worker threads for matrix construction and replicas.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a model file and report thresholds.
    Validate { model: PathBuf },
    /// Dissipativity layers and depth.
    Depth { model: PathBuf },
    /// Stabilize a configuration with deck-coupled topplings.
    Stabilize(StabilizeArgs),
    /// Exact transition matrices.
    Matrix(MatrixArgs),
    /// Exact stationary distribution on a recurrent class.
    Stationary(StationaryArgs),
    /// Check that the per-site matrices commute.
    Commute { model: PathBuf },
    /// Communicating classes and periods of the stable-state chain.
    Classes(MuArgs),
    /// Compare stationary laws across addition distributions.
    MuIndependence(MuIndependenceArgs),
    /// Monte Carlo occupancy of the stable-state chain.
    Simulate(SimulateArgs),
    /// Emit a ready-made model file.
    #[command(subcommand)]
    Preset(PresetCommand),
}

#[derive(Debug, Args)]
struct MuArgs {
    model: PathBuf,
    /// Addition law: inline `p/q,...` or a JSON file holding a list of `"p/q"` strings.
    #[arg(long)]
    mu: Option<String>,
    #[arg(long)]
    float: bool,
}

#[derive(Debug, Args)]
struct StabilizeArgs {
    model: PathBuf,
    /// Grain counts, e.g. `3,1`.
    #[arg(long)]
    config: String,
    /// Initial card counters, e.g. `0,0`.
    #[arg(long)]
    counters: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// smallest | largest | most-grains | round-robin | random[:seed] | sequence:v1,v2,...
    #[arg(long, default_value = "smallest")]
    policy: String,
    #[arg(long)]
    fuel: Option<u64>,
    /// JSON file with explicit decks: per site, a list of delta vectors.
    #[arg(long)]
    deck: Option<PathBuf>,
    /// Include the toppling log.
    #[arg(long)]
    log: bool,
}

#[derive(Debug, Args)]
struct MatrixArgs {
    model: PathBuf,
    #[arg(long, conflicts_with_all = ["collapsed", "per_site"])]
    extended: bool,
    #[arg(long, conflicts_with = "per_site")]
    collapsed: bool,
    #[arg(long, value_name = "K")]
    per_site: Option<usize>,
    #[arg(long)]
    mu: Option<String>,
    #[arg(long)]
    float: bool,
}

#[derive(Debug, Args)]
struct StationaryArgs {
    model: PathBuf,
    #[arg(long)]
    mu: Option<String>,
    /// `max` or the index of a recurrent class.
    #[arg(long, default_value = "max")]
    class: String,
    #[arg(long)]
    float: bool,
}

#[derive(Debug, Args)]
struct MuIndependenceArgs {
    model: PathBuf,
    /// JSON file: a list of addition laws, each a list of `"p/q"` strings.
    #[arg(long)]
    mu_list: PathBuf,
    #[arg(long)]
    float: bool,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    model: PathBuf,
    #[arg(long, default_value_t = 100_000)]
    steps: u64,
    /// Defaults to steps / 100.
    #[arg(long)]
    burn_in: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Independent replicas with seeds seed, seed+1, ...
    #[arg(long, default_value_t = 1)]
    replicas: u64,
    #[arg(long)]
    mu: Option<String>,
    #[arg(long, default_value = "smallest")]
    policy: String,
    /// Also report the total-variation distance to the exact stationary law.
    #[arg(long)]
    compare_exact: bool,
}

#[derive(Debug, Subcommand)]
enum PresetCommand {
    /// One grain per toppling, routed by a JSON file or along a path.
    SingleGrain {
        /// Per site, a list of `{"to": <site> | "sink", "prob": "p/q"}`.
        #[arg(long, conflicts_with = "path", required_unless_present = "path")]
        routing: Option<PathBuf>,
        /// Path routing n -> n-1 -> ... -> 1 -> sink.
        #[arg(long)]
        path: Option<usize>,
    },
    /// Bernoulli edge firing on a multigraph.
    Bssm {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        p: String,
        #[arg(long, default_value = "renormalize")]
        null: String,
    },
    PaperTriangleSsm {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        beta: String,
        #[arg(long)]
        gamma: String,
        /// Weight of site 1 in the addition law.
        #[arg(long)]
        mu: Option<String>,
    },
    PaperTriangleAsm {
        #[arg(long)]
        alpha: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommandResult {
    pub status: Status,
    pub payload: Value,
    pub diagnostics: Vec<String>,
    /// Set for `preset`: the payload is printed bare.
    #[serde(skip)]
    pub raw: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Error,
}

impl CommandResult {
    fn ok(payload: Value) -> Self {
        Self {
            status: Status::Ok,
            payload,
            diagnostics: Vec::new(),
            raw: false,
        }
    }

    fn error(kind: &str, message: String) -> Self {
        Self {
            status: Status::Error,
            payload: json!({ "error": kind, "message": message }),
            diagnostics: vec![message],
            raw: false,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Ok => 0,
            Status::Error if self.payload["error"] == "usage" => 2,
            Status::Error => 1,
        }
    }

    pub fn render(&self) -> String {
        if self.raw {
            serde_json::to_string_pretty(&self.payload)
        } else {
            serde_json::to_string_pretty(self)
        }
        .expect("json values serialize")
    }
}

/// Parses and runs; never exits the process.
pub fn run<I, T>(args: I) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let mut r = CommandResult::ok(Value::String(e.to_string()));
                r.raw = true;
                return r;
            }
            return CommandResult::error("usage", e.to_string());
        }
    };
    if let Some(jobs) = cli.jobs {
        // Ignored if a global pool already exists.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    if let Some(sub) = cli.schema {
        return match schema(&sub) {
            Some(s) => CommandResult::ok(s),
            None => CommandResult::error("usage", format!("unknown subcommand {sub:?}")),
        };
    }
    let Some(command) = cli.command else {
        return CommandResult::error(
            "usage",
            format!("a subcommand is required: {}", SUBCOMMANDS.join(", ")),
        );
    };
    match dispatch(command) {
        Ok(r) => r,
        Err(CliError::Usage(msg)) => CommandResult::error("usage", msg),
        Err(CliError::Domain(e)) => CommandResult::error("domain", e.to_string()),
    }
}

/// Runs, prints, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let result = run(args);
    if result.raw && result.payload.is_string() {
        print!("{}", result.payload.as_str().unwrap_or_default());
    } else {
        println!("{}", result.render());
    }
    for d in &result.diagnostics {
        eprintln!("stochsand: {d}");
    }
    result.exit_code()
}

enum CliError {
    Usage(String),
    Domain(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Domain(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn load_model(path: &Path) -> CliResult<(SandpileModel, Option<AdditionDistribution>)> {
    Ok(parse_model_json(&read_file(path)?)?)
}

/// `--mu` wins, then the model file's `mu`, then uniform.
fn resolve_mu(
    model: &SandpileModel,
    file_mu: Option<AdditionDistribution>,
    flag: Option<&str>,
) -> CliResult<AdditionDistribution> {
    let mu = match flag {
        Some(text) if Path::new(text).is_file() => {
            let entries: Vec<String> = serde_json::from_str(&read_file(Path::new(text))?)
                .map_err(|e| usage(format!("bad mu file {text}: {e}")))?;
            parse_mu(&entries.join(","))?
        }
        Some(text) => parse_mu(text)?,
        None => file_mu.unwrap_or_else(|| model.uniform_addition()),
    };
    mu.check_for(model)?;
    Ok(mu)
}

fn parse_int_list<T: std::str::FromStr>(text: &str, what: &str) -> CliResult<Vec<T>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| usage(format!("bad {what} entry {s:?}")))
        })
        .collect()
}

fn parse_policy(text: &str, seed: u64, n_sites: usize) -> CliResult<SiteSelectionPolicy> {
    let (name, arg) = match text.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (text, None),
    };
    Ok(match name {
        "smallest" => SiteSelectionPolicy::SmallestIndex,
        "largest" => SiteSelectionPolicy::LargestIndex,
        "most-grains" => SiteSelectionPolicy::MostGrains,
        "round-robin" => SiteSelectionPolicy::RoundRobin,
        "random" => SiteSelectionPolicy::SeededRandom(match arg {
            Some(a) => a
                .parse()
                .map_err(|_| usage(format!("bad random policy seed {a:?}")))?,
            None => seed,
        }),
        "sequence" => {
            let sites: Vec<usize> = parse_int_list(arg.unwrap_or(""), "sequence")?;
            SiteSelectionPolicy::ExplicitSequence(
                sites
                    .into_iter()
                    .map(|v| SiteIndex::new(v, n_sites))
                    .collect::<Result<Vec<_>>>()?,
            )
        }
        other => return Err(usage(format!("unknown policy {other:?}"))),
    })
}

fn parse_probability(text: &str, what: &str) -> CliResult<Probability> {
    text.parse()
        .map_err(|e: Error| usage(format!("bad {what}: {e}")))
}

fn num(r: &BigRational, float: bool) -> Value {
    if float {
        json!(to_f64(r))
    } else {
        Value::String(format_rational(r))
    }
}

fn nums(v: &[BigRational], float: bool) -> Value {
    Value::Array(v.iter().map(|r| num(r, float)).collect())
}

fn matrix_json(m: &RationalMatrix, float: bool) -> Value {
    if float {
        json!(m.to_f64_rows())
    } else {
        json!(m.to_string_rows())
    }
}

fn states_json(states: &[Configuration]) -> Value {
    json!(states.iter().map(Configuration::grains).collect::<Vec<_>>())
}

fn dispatch(command: Command) -> CliResult<CommandResult> {
    let payload = match command {
        Command::Validate { model } => {
            let (model, mu) = load_model(&model)?;
            let report = dissipativity(&model);
            json!({
                "n_sites": model.n_sites(),
                "thresholds": model.thresholds(),
                "support_sizes": model.topplings().iter().map(|d| d.support().len()).collect::<Vec<_>>(),
                "dissipative": report.satisfied,
                "has_mu": mu.is_some(),
            })
        }
        Command::Depth { model } => {
            let (model, _) = load_model(&model)?;
            json!(dissipativity(&model))
        }
        Command::Stabilize(args) => stabilize_cmd(args)?,
        Command::Matrix(args) => matrix_cmd(args)?,
        Command::Stationary(args) => {
            let (model, file_mu) = load_model(&args.model)?;
            let mu = resolve_mu(&model, file_mu, args.mu.as_deref())?;
            let selector = match args.class.as_str() {
                "max" => ClassSelector::Max,
                other => ClassSelector::Index(
                    other
                        .parse()
                        .map_err(|_| usage(format!("bad --class {other:?}")))?,
                ),
            };
            let result = stationary_for(&model, &mu, selector)?;
            let class = result
                .decomposition
                .class_of(result.stationary.class[0])
                .expect("class exists");
            json!({
                "states": states_json(&result.class_states()),
                "pi": nums(&result.stationary.on_class(), args.float),
                "period": class.period,
                "stable_states": states_json(&result.states),
                "pi_full": nums(&result.stationary.values, args.float),
            })
        }
        Command::Commute { model } => {
            let (model, _) = load_model(&model)?;
            let report = commute_check(&model)?;
            json!(report)
        }
        Command::Classes(args) => {
            let (model, file_mu) = load_model(&args.model)?;
            let mu = resolve_mu(&model, file_mu, args.mu.as_deref())?;
            let (states, p) = transition_matrix(&model, &mu)?;
            let decomposition = chain_decomposition(&p);
            json!({
                "states": states_json(&states),
                "classes": decomposition.classes.iter().map(|c| json!({
                    "states": c.states.iter().map(|&i| states[i].grains().to_vec()).collect::<Vec<_>>(),
                    "indices": c.states,
                    "recurrent": c.recurrent,
                    "period": c.period,
                })).collect::<Vec<_>>(),
            })
        }
        Command::MuIndependence(args) => {
            let (model, _) = load_model(&args.model)?;
            let lists: Vec<Vec<String>> = serde_json::from_str(&read_file(&args.mu_list)?)
                .map_err(|e| usage(format!("bad mu list: {e}")))?;
            let mus = lists
                .iter()
                .map(|l| parse_mu(&l.join(",")))
                .collect::<Result<Vec<_>>>()?;
            let report = mu_independence(&model, &mus)?;
            json!({
                "holds": report.holds,
                "class": states_json(&report.class),
                "stationaries": report.stationaries.iter().map(|s| nums(s, args.float)).collect::<Vec<_>>(),
            })
        }
        Command::Simulate(args) => simulate_cmd(args)?,
        Command::Preset(p) => {
            let mut r = CommandResult::ok(preset_cmd(p)?);
            r.raw = true;
            return Ok(r);
        }
    };
    Ok(CommandResult::ok(payload))
}

fn stabilize_cmd(args: StabilizeArgs) -> CliResult<Value> {
    let (model, _) = load_model(&args.model)?;
    let config = Configuration::new(parse_int_list(&args.config, "config")?)?;
    model.check_configuration(&config)?;
    let state = match &args.counters {
        Some(c) => CounterState::with_counters(config.clone(), parse_int_list(c, "counters")?)?,
        None => CounterState::new(config.clone()),
    };
    let decks = match &args.deck {
        Some(path) => {
            let lists: Vec<Vec<Vec<i64>>> = serde_json::from_str(&read_file(path)?)
                .map_err(|e| usage(format!("bad deck file: {e}")))?;
            DeckSource::explicit(&model, lists)?
        }
        None => DeckSource::seeded(&model, args.seed),
    };
    let policy = parse_policy(&args.policy, args.seed, model.n_sites())?;
    let fuel = args.fuel.unwrap_or_else(|| default_fuel(&model, &config));
    let (out, log) = deterministic_stabilize(&model, &state, &decks, &policy, fuel)?;
    let mut payload = json!({
        "configuration": out.configuration.grains(),
        "counters": out.counters,
        "topplings": log.len(),
    });
    if args.log {
        payload["log"] = json!(log);
    }
    Ok(payload)
}

fn matrix_cmd(args: MatrixArgs) -> CliResult<Value> {
    let (model, file_mu) = load_model(&args.model)?;
    if let Some(k) = args.per_site {
        let site = model.site(k)?;
        let p = per_site_matrix(&model, site)?;
        let states = crate::exact::stable_states(&model);
        return Ok(json!({
            "kind": "per-site",
            "site": k,
            "states": states_json(&states),
            "matrix": matrix_json(&p, args.float),
        }));
    }
    let mu = resolve_mu(&model, file_mu, args.mu.as_deref())?;
    if args.extended {
        let states = enumerate_states(
            &model,
            &mu.support(),
            TopplingRule::SmallestUnstable,
            DEFAULT_STATE_CAP,
        )?;
        let chain = build_extended(&model, &mu, &states, TopplingRule::SmallestUnstable)?;
        let all: Vec<Configuration> = states
            .stable()
            .iter()
            .chain(states.transient())
            .cloned()
            .collect();
        return Ok(json!({
            "kind": "extended",
            "states": states_json(&all),
            "n_stable": states.n_stable(),
            "matrix": matrix_json(&chain.full(), args.float),
            "blocks": {
                "A": matrix_json(&chain.a, args.float),
                "B": matrix_json(&chain.b, args.float),
                "C": matrix_json(&chain.c, args.float),
                "D": matrix_json(&chain.d, args.float),
            },
        }));
    }
    let (states, p) = transition_matrix(&model, &mu)?;
    Ok(json!({
        "kind": "collapsed",
        "states": states_json(&states),
        "matrix": matrix_json(&p, args.float),
    }))
}

fn simulate_cmd(args: SimulateArgs) -> CliResult<Value> {
    let (model, file_mu) = load_model(&args.model)?;
    let mu = resolve_mu(&model, file_mu, args.mu.as_deref())?;
    if args.replicas == 0 {
        return Err(usage("--replicas must be at least 1"));
    }
    let burn_in = args.burn_in.unwrap_or_else(|| default_burn_in(args.steps));
    let policy = parse_policy(&args.policy, args.seed, model.n_sites())?;
    let seeds: Vec<u64> = (0..args.replicas)
        .map(|i| args.seed.wrapping_add(i))
        .collect();
    let report = simulate_replicas(&model, &mu, args.steps, burn_in, &seeds, &policy)?;
    let mut payload = json!({
        "steps": report.steps,
        "burn_in": report.burn_in,
        "seeds": report.seeds,
        "states": states_json(&report.states),
        "counts": report.counts,
        "frequencies": report.frequencies,
    });
    if args.compare_exact {
        let exact = stationary_for(&model, &mu, ClassSelector::Max)?;
        let pi: Vec<f64> = exact.stationary.values.iter().map(to_f64).collect();
        payload["exact_pi"] = nums(&exact.stationary.values, false);
        payload["tv_distance"] = json!(tv_distance(&report.frequencies, &pi)?);
    }
    Ok(payload)
}

fn preset_cmd(p: PresetCommand) -> CliResult<Value> {
    let (model, mu) = match p {
        PresetCommand::SingleGrain { routing, path } => {
            let model = match (routing, path) {
                (Some(file), _) => {
                    let routes: Vec<Vec<Route>> = serde_json::from_str(&read_file(&file)?)
                        .map_err(|e| usage(format!("bad routing file: {e}")))?;
                    single_grain_model(routes.len(), &routes)?
                }
                (None, Some(n)) => single_grain_path(n)?,
                (None, None) => return Err(usage("give --routing or --path")),
            };
            (model, None)
        }
        PresetCommand::Bssm { graph, p, null } => {
            let graph: MultigraphSpec = serde_json::from_str(&read_file(&graph)?)
                .map_err(|e| usage(format!("bad graph file: {e}")))?;
            let null = match null.as_str() {
                "renormalize" => NullToppling::Renormalize,
                "reject" => NullToppling::Reject,
                other => return Err(usage(format!("unknown --null {other:?}"))),
            };
            (
                bssm_model(&graph, &parse_probability(&p, "--p")?, null)?,
                None,
            )
        }
        PresetCommand::PaperTriangleSsm {
            alpha,
            beta,
            gamma,
            mu,
        } => {
            let model = paper_triangle_ssm(
                &parse_probability(&alpha, "--alpha")?,
                &parse_probability(&beta, "--beta")?,
                &parse_probability(&gamma, "--gamma")?,
            )?;
            let mu = mu
                .map(|a| -> CliResult<_> { Ok(triangle_mu(&parse_probability(&a, "--mu")?)?) })
                .transpose()?;
            (model, mu)
        }
        PresetCommand::PaperTriangleAsm { alpha } => {
            let (model, mu) = paper_triangle_asm(&parse_probability(&alpha, "--alpha")?)?;
            (model, Some(mu))
        }
    };
    Ok(serde_json::from_str(&model_to_json(&model, mu.as_ref())).expect("model json parses"))
}

fn schema(subcommand: &str) -> Option<Value> {
    let rat = "string \"p/q\" (number with --float)";
    let states = "array of grain-count arrays, lexicographic order";
    Some(match subcommand {
        "validate" => json!({
            "n_sites": "integer", "thresholds": "array of integers",
            "support_sizes": "array of integers", "dissipative": "boolean", "has_mu": "boolean"
        }),
        "depth" => json!({
            "satisfied": "boolean", "layers": "array of site-index arrays",
            "depth": "integer", "witness": "site-index array or null"
        }),
        "stabilize" => json!({
            "configuration": "array of integers", "counters": "array of integers",
            "topplings": "integer",
            "log": "optional array of {site, card, delta}"
        }),
        "matrix" => json!({
            "kind": "\"collapsed\" | \"extended\" | \"per-site\"", "states": states,
            "matrix": format!("array of rows of {rat}"),
            "n_stable": "integer (extended only)", "blocks": "{A, B, C, D} (extended only)",
            "site": "integer (per-site only)"
        }),
        "stationary" => json!({
            "states": states, "pi": format!("array of {rat}"), "period": "integer",
            "stable_states": states, "pi_full": format!("array of {rat}")
        }),
        "commute" => json!({
            "holds": "boolean", "pairs_checked": "integer",
            "max_offending": "null or {site_k, site_l, row, col, difference}"
        }),
        "classes" => json!({
            "states": states,
            "classes": "array of {states, indices, recurrent, period}"
        }),
        "mu-independence" => json!({
            "holds": "boolean", "class": states,
            "stationaries": format!("array of arrays of {rat}")
        }),
        "simulate" => json!({
            "steps": "integer", "burn_in": "integer", "seeds": "array of integers",
            "states": states, "counts": "array of integers", "frequencies": "array of numbers",
            "exact_pi": "array of \"p/q\" (with --compare-exact)",
            "tv_distance": "number (with --compare-exact)"
        }),
        "preset" => json!({
            "n_sites": "integer",
            "topplings": "per site, array of {delta: array of integers, prob: \"p/q\"}",
            "mu": "optional array of \"p/q\""
        }),
        _ => return None,
    })
}
