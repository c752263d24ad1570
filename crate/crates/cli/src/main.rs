//! forge: searches, engine runs, game solving, structure enumeration and
//! certificate verification from one entry point.
//!
//! Exit codes: 0 success/PASS/witness-found, 1 FAIL/refuted/no-witness,
//! 2 invalid input, 3 guard-rail refusal, 4 oracle exhausted.

mod manifest;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use forge_core::coloring::Coloring;
use forge_core::engine::{
    run_engine, run_multiplicative_engine, search_witness, verify_certificate, BobPolicy,
    Certificate, Constraint, EngineConfig, EngineError, EngineMode, FamilyGenerator,
    FamilySequence, OracleSpec, SearchKind, SearchOutcome, SearchRequest,
};
use forge_core::games::{
    enumerate_superfilters, sfin_check, solve_game, sone_check, superfilter_predicates, GameKind,
    GameSpec, GamesError, GuardRails, SystemFile,
};
use forge_core::oracle::Decision;
use forge_core::semigroup::{fs_set, Elem, NatOp, Semigroup, SemigroupSpec};
use forge_core::structures::{
    arithmetic_progression, mpc_set, partite_graph, partite_sumgraph, sumgraph, MpcParams,
};

use manifest::RunManifest;

const EXIT_OK: u8 = 0;
const EXIT_FAIL: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_GUARD: u8 = 3;
const EXIT_EXHAUSTED: u8 = 4;

#[derive(Parser)]
#[command(
    name = "forge",
    version,
    about = "combinatorial workbench: sum structures, selection games, certificates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Exhaustive witness searches and forced thresholds.
    Search(SearchArgs),
    /// Run the round construction and emit a certificate.
    Engine(EngineArgs),
    /// Verify a certificate offline.
    Verify { cert: PathBuf },
    /// Solve a selection game or run a selection check.
    Game(GameArgs),
    /// Enumerate a structure as sorted JSON.
    Enumerate(EnumerateArgs),
    /// Superfilter predicates and enumeration.
    Superfilter(SuperfilterArgs),
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, value_enum)]
    kind: SearchKindArg,
    /// Elements range over 1..=bound.
    #[arg(long)]
    bound: Elem,
    #[arg(long, default_value_t = 2)]
    colors: u32,
    /// Quantify over all colorings and report the forced threshold.
    #[arg(long)]
    all_colorings: bool,
    /// Arity of the colored sets.
    #[arg(long)]
    arity: Option<usize>,
    /// Sequence / progression length or block count.
    #[arg(long)]
    len: Option<usize>,
    #[arg(long, default_value_t = 1)]
    block_size: usize,
    /// m,p,c parameters for the mpc kind.
    #[arg(long)]
    mpc: Option<String>,
    /// Fixed coloring spec: const | parity | mod:q | random:SEED.
    #[arg(long)]
    coloring: Option<String>,
    #[arg(long, default_value_t = 1 << 32)]
    max_states: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SearchKindArg {
    Schur,
    Vdw,
    MillikenTaylor,
    PartiteSumgraph,
    Mpc,
}

impl From<SearchKindArg> for SearchKind {
    fn from(k: SearchKindArg) -> Self {
        match k {
            SearchKindArg::Schur => SearchKind::Schur,
            SearchKindArg::Vdw => SearchKind::Vdw,
            SearchKindArg::MillikenTaylor => SearchKind::MillikenTaylor,
            SearchKindArg::PartiteSumgraph => SearchKind::PartiteSumgraph,
            SearchKindArg::Mpc => SearchKind::Mpc,
        }
    }
}

#[derive(Args)]
struct EngineArgs {
    /// Semigroup: a JSON file, inline JSON, or nat:add:B / nat:mul:B.
    #[arg(long)]
    semigroup: String,
    /// Coloring spec: const | parity | mod:q | random:SEED | inline JSON.
    #[arg(long)]
    coloring: String,
    #[arg(long, default_value_t = 1)]
    arity: usize,
    #[arg(long, default_value_t = 2)]
    colors: u32,
    /// Families: singletons | aps:L | a JSON file with per-round families.
    #[arg(long, default_value = "singletons")]
    families: String,
    /// Oracle: principal:E | scripted:FILE | backtracking:SEED.
    #[arg(long)]
    oracle: String,
    #[arg(long, default_value_t = 2)]
    rounds: usize,
    #[arg(long, value_enum, default_value = "fin")]
    mode: ModeArg,
    /// Constraint hook: tail | a JSON file.
    #[arg(long)]
    constraint: Option<String>,
    /// Two-operation variant over bounded naturals.
    #[arg(long)]
    multiplicative: bool,
    /// Bob's reply cap.
    #[arg(long, default_value_t = 3)]
    bob_cap: usize,
    #[arg(long, default_value_t = 64)]
    retry_budget: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Fin,
    One,
}

#[derive(Args)]
struct GameArgs {
    /// System file: universe, families, target.
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, value_enum)]
    kind: GameKindArg,
    #[arg(long)]
    horizon: usize,
    /// Run the non-adaptive selection check instead of solving.
    #[arg(long, value_enum)]
    check: Option<CheckArg>,
    #[arg(long, default_value_t = 1 << 22)]
    max_nodes: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GameKindArg {
    G1,
    Gfin,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CheckArg {
    Sone,
    Sfin,
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long, value_enum)]
    kind: EnumKindArg,
    /// Semigroup, defaults to bounded naturals under addition.
    #[arg(long)]
    semigroup: Option<String>,
    /// Sequence entries, comma separated.
    #[arg(long)]
    seq: Option<String>,
    /// Blocks, semicolon separated lists: "1,2;8;32".
    #[arg(long)]
    blocks: Option<String>,
    #[arg(long, default_value_t = 2)]
    arity: usize,
    #[arg(long)]
    lo: Option<usize>,
    #[arg(long)]
    hi: Option<usize>,
    #[arg(long)]
    start: Option<Elem>,
    #[arg(long)]
    step: Option<Elem>,
    #[arg(long)]
    len: Option<usize>,
    /// m,p,c for mpc sets.
    #[arg(long)]
    mpc: Option<String>,
    /// x vector for mpc sets, comma separated.
    #[arg(long)]
    x: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EnumKindArg {
    Fs,
    Sumgraph,
    PartiteSumgraph,
    PartiteGraph,
    Ap,
    Mpc,
}

#[derive(Args)]
struct SuperfilterArgs {
    /// Semigroup: JSON file/inline, nat:add:B, max:N or min:N.
    #[arg(long)]
    semigroup: String,
    /// Family file: a JSON list of sets. Omit with --enumerate.
    #[arg(long)]
    family: Option<PathBuf>,
    /// Enumerate every superfilter on the carrier instead.
    #[arg(long)]
    enumerate: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(threads) = std::env::var("FORGE_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("forge: {:#}", e);
            ExitCode::from(EXIT_INVALID)
        }
    }
}

fn emit(out: &Option<PathBuf>, format: Format, value: &serde_json::Value) -> Result<()> {
    let text = match format {
        Format::Json => serde_json::to_string_pretty(value)? + "\n",
        Format::Table => tableize(value),
    };
    match out {
        Some(path) => std::fs::write(path, text).context("writing output")?,
        None => print!("{}", text),
    }
    Ok(())
}

fn tableize(value: &serde_json::Value) -> String {
    let mut lines = String::new();
    if let Some(map) = value.as_object() {
        for (k, v) in map {
            lines.push_str(&format!("{}\t{}\n", k, v));
        }
    } else {
        lines.push_str(&format!("{}\n", value));
    }
    lines
}

fn dispatch(cli: Cli) -> Result<u8> {
    match &cli.command {
        Command::Search(args) => cmd_search(&cli, args),
        Command::Engine(args) => cmd_engine(&cli, args),
        Command::Verify { cert } => cmd_verify(&cli, cert),
        Command::Game(args) => cmd_game(&cli, args),
        Command::Enumerate(args) => cmd_enumerate(&cli, args),
        Command::Superfilter(args) => cmd_superfilter(&cli, args),
    }
}

fn parse_csv(s: &str) -> Result<Vec<Elem>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<Elem>().map_err(|e| anyhow!("bad number {:?}: {}", t, e)))
        .collect()
}

fn parse_blocks(s: &str) -> Result<Vec<Vec<Elem>>> {
    s.split(';').map(parse_csv).collect()
}

fn parse_semigroup(spec: &str) -> Result<(Semigroup, Option<Vec<u8>>)> {
    if let Some(rest) = spec.strip_prefix("nat:") {
        let (op, bound) = rest
            .split_once(':')
            .ok_or_else(|| anyhow!("expected nat:add:B or nat:mul:B"))?;
        let op = match op {
            "add" => NatOp::Add,
            "mul" => NatOp::Mul,
            other => bail!("unknown naturals operation {:?}", other),
        };
        let bound: Elem = bound.parse().context("bad bound")?;
        return Ok((Semigroup::naturals(bound, op)?, None));
    }
    if let Some(rest) = spec.strip_prefix("max:") {
        let n: usize = rest.parse().context("bad size")?;
        return Ok((forge_core::semigroup::max_semigroup(n), None));
    }
    if let Some(rest) = spec.strip_prefix("min:") {
        let n: usize = rest.parse().context("bad size")?;
        return Ok((forge_core::semigroup::min_semigroup(n), None));
    }
    let (text, raw) = if spec.trim_start().starts_with('{') {
        (spec.to_string(), spec.as_bytes().to_vec())
    } else {
        let bytes = std::fs::read(spec).with_context(|| format!("reading {}", spec))?;
        (String::from_utf8_lossy(&bytes).into_owned(), bytes)
    };
    let parsed: SemigroupSpec = serde_json::from_str(&text).context("parsing semigroup JSON")?;
    Ok((parsed.build()?, Some(raw)))
}

fn engine_exit(err: &EngineError) -> u8 {
    match err {
        EngineError::Exhausted { .. }
        | EngineError::DivisionExhausted { .. }
        | EngineError::Oracle(_) => EXIT_EXHAUSTED,
        EngineError::Guard { .. } => EXIT_GUARD,
        _ => EXIT_INVALID,
    }
}

fn cmd_search(cli: &Cli, args: &SearchArgs) -> Result<u8> {
    let kind: SearchKind = args.kind.into();
    let mut req = SearchRequest::new(kind, args.bound, args.colors);
    if let Some(m) = args.arity {
        req.arity = m;
    }
    if let Some(l) = args.len {
        req.len = l;
    }
    req.block_size = args.block_size;
    req.max_states = args.max_states;
    if let Some(mpc) = &args.mpc {
        let parts = parse_csv(mpc)?;
        if parts.len() != 3 {
            bail!("--mpc wants m,p,c");
        }
        req.mpc = Some((parts[0] as usize, parts[1] as u32, parts[2] as i64));
    }
    let mut seed = 0u64;
    if let Some(spec) = &args.coloring {
        let coloring = Coloring::parse_spec(spec, req.arity, args.colors)
            .map_err(|e| anyhow!("coloring: {}", e))?;
        if let Some(rest) = spec.strip_prefix("random:") {
            seed = rest.parse().unwrap_or(0);
        }
        req.coloring = Some(coloring);
    }
    req.all_colorings = args.all_colorings;

    let mut manifest = RunManifest::new("search", seed);
    manifest
        .param("kind", format!("{:?}", args.kind))
        .param("bound", args.bound)
        .param("colors", args.colors)
        .param("arity", req.arity)
        .param("len", req.len)
        .param("all_colorings", args.all_colorings)
        .guard("max_states", args.max_states);

    match search_witness(&req) {
        Ok(outcome) => {
            let code = match &outcome {
                SearchOutcome::Witness { .. } | SearchOutcome::ForcedThreshold { .. } => EXIT_OK,
                SearchOutcome::NoWitness | SearchOutcome::Unforced => EXIT_FAIL,
            };
            let value = json!({ "result": outcome, "manifest": manifest });
            emit(&cli.out, cli.format, &value)?;
            Ok(code)
        }
        Err(e) => {
            eprintln!("forge: {}", e);
            Ok(engine_exit(&e))
        }
    }
}

fn parse_oracle(spec: &str, manifest: &mut RunManifest) -> Result<(OracleSpec, u64)> {
    if let Some(e) = spec.strip_prefix("principal:") {
        return Ok((OracleSpec::Principal { e: e.parse().context("bad element")? }, 0));
    }
    if let Some(path) = spec.strip_prefix("scripted:") {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path))?;
        manifest.hash_input("oracle_script", &bytes);
        let script: Vec<Decision> =
            serde_json::from_slice(&bytes).context("parsing decision log")?;
        return Ok((OracleSpec::Scripted { script }, 0));
    }
    if let Some(seed) = spec.strip_prefix("backtracking:") {
        let seed: u64 = seed.parse().context("bad seed")?;
        return Ok((OracleSpec::Backtracking { seed }, seed));
    }
    bail!("oracle must be principal:E, scripted:FILE or backtracking:SEED")
}

fn parse_families(spec: &str, manifest: &mut RunManifest) -> Result<FamilySequence> {
    if spec == "singletons" {
        return Ok(FamilySequence::singletons());
    }
    if let Some(len) = spec.strip_prefix("aps:") {
        return Ok(FamilySequence {
            generator: FamilyGenerator::Aps { len: len.parse().context("bad length")? },
        });
    }
    let bytes = std::fs::read(spec).with_context(|| format!("reading {}", spec))?;
    manifest.hash_input("families", &bytes);
    if let Ok(fs) = serde_json::from_slice::<FamilySequence>(&bytes) {
        return Ok(fs);
    }
    let rounds: Vec<Vec<Vec<Elem>>> =
        serde_json::from_slice(&bytes).context("parsing families file")?;
    Ok(FamilySequence::explicit(rounds))
}

fn parse_constraint(spec: &str, manifest: &mut RunManifest) -> Result<Constraint> {
    if spec == "tail" {
        return Ok(Constraint::Tail);
    }
    let bytes = std::fs::read(spec).with_context(|| format!("reading {}", spec))?;
    manifest.hash_input("constraint", &bytes);
    serde_json::from_slice(&bytes).context("parsing constraint file")
}

fn cmd_engine(cli: &Cli, args: &EngineArgs) -> Result<u8> {
    let mut manifest = RunManifest::new("engine", 0);
    let (oracle_spec, seed) = parse_oracle(&args.oracle, &mut manifest)?;
    manifest.seed = seed;
    let families = parse_families(&args.families, &mut manifest)?;
    let coloring = Coloring::parse_spec(&args.coloring, args.arity, args.colors)
        .map_err(|e| anyhow!("coloring: {}", e))?;
    let constraint = match &args.constraint {
        Some(c) => Some(parse_constraint(c, &mut manifest)?),
        None => None,
    };
    let config = EngineConfig {
        rounds: args.rounds,
        mode: match args.mode {
            ModeArg::Fin => EngineMode::Fin,
            ModeArg::One => EngineMode::One,
        },
        bob: BobPolicy::Adaptive { cap: args.bob_cap },
        constraint,
        retry_budget: args.retry_budget,
        ..Default::default()
    };
    manifest
        .param("semigroup", &args.semigroup)
        .param("coloring", &args.coloring)
        .param("arity", args.arity)
        .param("colors", args.colors)
        .param("families", &args.families)
        .param("oracle", &args.oracle)
        .param("rounds", args.rounds)
        .param("mode", format!("{:?}", args.mode))
        .param("multiplicative", args.multiplicative)
        .param("bob_cap", args.bob_cap)
        .guard("retry_budget", args.retry_budget);

    let result: Result<Certificate, EngineError> = if args.multiplicative {
        let (sg, _) = parse_semigroup(&args.semigroup)?;
        let bound = match sg {
            Semigroup::Naturals(n) => n.bound(),
            _ => bail!("the multiplicative engine runs over bounded naturals"),
        };
        run_multiplicative_engine(bound, &coloring, &families, &oracle_spec, &config)
    } else {
        let (sg, raw) = parse_semigroup(&args.semigroup)?;
        if let Some(bytes) = raw {
            manifest.hash_input("semigroup", &bytes);
        }
        run_engine(&sg, &coloring, &families, &oracle_spec, &config)
    };

    match result {
        Ok(mut cert) => {
            cert.manifest = Some(serde_json::to_value(&manifest)?);
            let value = serde_json::to_value(&cert)?;
            emit(&cli.out, cli.format, &value)?;
            Ok(EXIT_OK)
        }
        Err(e) => {
            eprintln!("forge: {}", e);
            Ok(engine_exit(&e))
        }
    }
}

fn cmd_verify(cli: &Cli, cert_path: &PathBuf) -> Result<u8> {
    let bytes =
        std::fs::read(cert_path).with_context(|| format!("reading {}", cert_path.display()))?;
    let cert: Certificate = serde_json::from_slice(&bytes).context("parsing certificate")?;
    let report = verify_certificate(&cert);
    let value = serde_json::to_value(&report)?;
    emit(&cli.out, cli.format, &value)?;
    Ok(if report.pass { EXIT_OK } else { EXIT_FAIL })
}

fn games_exit(e: &GamesError) -> u8 {
    match e {
        GamesError::Guard { .. } => EXIT_GUARD,
        GamesError::Oracle(_) => EXIT_EXHAUSTED,
        GamesError::BadSystem(_) => EXIT_INVALID,
    }
}

fn cmd_game(cli: &Cli, args: &GameArgs) -> Result<u8> {
    let bytes =
        std::fs::read(&args.spec).with_context(|| format!("reading {}", args.spec.display()))?;
    let file: SystemFile = serde_json::from_slice(&bytes).context("parsing system file")?;
    let system = match file.build() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("forge: {}", e);
            return Ok(EXIT_INVALID);
        }
    };
    let mut manifest = RunManifest::new("game", 0);
    manifest
        .param("spec", args.spec.display())
        .param("kind", format!("{:?}", args.kind))
        .param("horizon", args.horizon)
        .guard("max_nodes", args.max_nodes)
        .hash_input("spec", &bytes);
    let guard = GuardRails { max_nodes: args.max_nodes };

    if let Some(check) = args.check {
        let result = match check {
            CheckArg::Sone => sone_check(&system, args.horizon, &guard),
            CheckArg::Sfin => sfin_check(&system, args.horizon, &guard),
        };
        return match result {
            Ok(holds) => {
                let value = json!({
                    "check": format!("{:?}", check),
                    "holds": holds,
                    "manifest": manifest,
                });
                emit(&cli.out, cli.format, &value)?;
                Ok(if holds { EXIT_OK } else { EXIT_FAIL })
            }
            Err(e) => {
                eprintln!("forge: {}", e);
                Ok(games_exit(&e))
            }
        };
    }

    let kind = match args.kind {
        GameKindArg::G1 => GameKind::G1,
        GameKindArg::Gfin => GameKind::GFin,
    };
    let spec = GameSpec { kind, horizon: args.horizon, system };
    match solve_game(&spec, &guard) {
        Ok(outcome) => {
            let value = json!({
                "winner": format!("{:?}", outcome.winner),
                "states_explored": outcome.states_explored,
                "strategy": outcome.strategy,
                "manifest": manifest,
            });
            emit(&cli.out, cli.format, &value)?;
            Ok(EXIT_OK)
        }
        Err(e) => {
            eprintln!("forge: {}", e);
            Ok(games_exit(&e))
        }
    }
}

fn cmd_enumerate(cli: &Cli, args: &EnumerateArgs) -> Result<u8> {
    let sg = match &args.semigroup {
        Some(s) => parse_semigroup(s)?.0,
        None => Semigroup::naturals(1 << 20, NatOp::Add)?,
    };
    let value = match args.kind {
        EnumKindArg::Fs => {
            let seq = parse_csv(args.seq.as_deref().unwrap_or_default())?;
            let lo = args.lo.unwrap_or(1);
            let hi = args.hi.unwrap_or(seq.len());
            let fs = fs_set(&seq, lo, hi, &sg)?;
            json!({
                "sums": fs.sums.iter().collect::<Vec<_>>(),
                "undefined": fs.undefined.iter().map(|h| h.indices().to_vec()).collect::<Vec<_>>(),
            })
        }
        EnumKindArg::Sumgraph => {
            let seq = parse_csv(args.seq.as_deref().unwrap_or_default())?;
            let g = sumgraph(&seq, args.arity, &sg)?;
            json!({ "arity": g.arity, "edges": g.edges.iter().collect::<Vec<_>>() })
        }
        EnumKindArg::PartiteSumgraph => {
            let blocks = parse_blocks(args.blocks.as_deref().unwrap_or_default())?;
            let g = partite_sumgraph(&blocks, args.arity, &sg)?;
            json!({ "arity": g.arity, "edges": g.edges.iter().collect::<Vec<_>>() })
        }
        EnumKindArg::PartiteGraph => {
            let blocks = parse_blocks(args.blocks.as_deref().unwrap_or_default())?;
            let g = partite_graph(&blocks, args.arity)?;
            json!({ "arity": g.arity, "edges": g.edges.iter().collect::<Vec<_>>() })
        }
        EnumKindArg::Ap => {
            let ap = arithmetic_progression(
                args.start.ok_or_else(|| anyhow!("--start required"))?,
                args.step.ok_or_else(|| anyhow!("--step required"))?,
                args.len.ok_or_else(|| anyhow!("--len required"))?,
            );
            json!({ "set": ap.iter().collect::<Vec<_>>() })
        }
        EnumKindArg::Mpc => {
            let params = parse_csv(args.mpc.as_deref().unwrap_or_default())?;
            if params.len() != 3 {
                bail!("--mpc wants m,p,c");
            }
            let x = parse_csv(args.x.as_deref().unwrap_or_default())?;
            let set = mpc_set(&MpcParams {
                m: params[0] as usize,
                p: params[1] as u32,
                c: params[2] as i64,
                x: x.iter().map(|&v| v as i64).collect(),
            });
            json!({ "sums": set.sums.iter().collect::<Vec<_>>(), "valid": set.valid })
        }
    };
    emit(&cli.out, cli.format, &value)?;
    Ok(EXIT_OK)
}

fn cmd_superfilter(cli: &Cli, args: &SuperfilterArgs) -> Result<u8> {
    let (sg, _) = parse_semigroup(&args.semigroup)?;
    if args.enumerate {
        let superfilters = enumerate_superfilters(&sg);
        let listed: Vec<_> = superfilters
            .iter()
            .map(|f| {
                let flags = superfilter_predicates(&sg, f);
                json!({ "family": f, "flags": flags })
            })
            .collect();
        let value = json!({ "count": superfilters.len(), "superfilters": listed });
        emit(&cli.out, cli.format, &value)?;
        return Ok(EXIT_OK);
    }
    let family_path = args
        .family
        .as_ref()
        .ok_or_else(|| anyhow!("--family FILE or --enumerate required"))?;
    let bytes = std::fs::read(family_path)
        .with_context(|| format!("reading {}", family_path.display()))?;
    let family: Vec<Vec<Elem>> = serde_json::from_slice(&bytes).context("parsing family")?;
    let family: Vec<Vec<Elem>> = family
        .into_iter()
        .map(|mut s| {
            s.sort_unstable();
            s.dedup();
            s
        })
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let flags = superfilter_predicates(&sg, &family);
    let value = serde_json::to_value(flags)?;
    emit(&cli.out, cli.format, &value)?;
    Ok(if flags.is_superfilter { EXIT_OK } else { EXIT_FAIL })
}
