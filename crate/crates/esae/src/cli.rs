//! Command-line surface. One thin binary, `esae`, whose subcommands wrap the
//! library: key-space accounting, consistency sweeps, protocol simulation,
//! the distinguishing game, TCP endpoints, and synthetic scene generation.
//!
//! Every command is deterministic under `--seed`. Exit codes: 0 success,
//! 2 insecure key space (`keyspace` only), 64 usage, 65 bad data, 74 I/O.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::analysis::{
    self, keyspace_log2, run_distinguishing_game, AdversaryKind, GameConfig, KeychainKeySource,
    McrContext, McrMode, McrSkgConfig, RandomKeySource,
};
use crate::channel_sim::ChannelParams;
use crate::error::Error;
use crate::keychain::KdfParams;
use crate::protocol::{
    run_session, tcp, ResyncPolicy, SeededKeyProvider, SessionParams,
};
use crate::sakp::{read_detection_log, write_detection_log, GridSpec, SakpConfig};
use crate::scene::{SceneConfig, SceneGenerator};
use crate::seeds;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INSECURE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_IO: i32 = 74;

/// Whole-experiment configuration file (JSON). Field defaults match the
/// library defaults, so a partial file is fine.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub sakp: SakpConfig,
    pub kdf: KdfParams,
    pub channel: ChannelParams,
    pub mcr: McrSkgConfig,
    pub game: GameConfig,
    pub scene: SceneConfig,
    pub policy: ResyncPolicy,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> crate::Result<()> {
        self.sakp.validate()?;
        self.kdf.validate()?;
        self.channel.validate()?;
        self.mcr.validate()?;
        self.game.validate()?;
        self.scene.validate()?;
        Ok(())
    }
}

#[derive(Parser)]
#[command(name = "esae", version, about = "Semantic-aware session keys over lossy links")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Semantic key-search-space size and the 128-bit security verdict.
    Keyspace(KeyspaceArgs),
    /// Monte-Carlo consistency-rate sweep over SNR, K, T, Q; emits CSV.
    Sweep(SweepArgs),
    /// Full protocol session over an in-process link; emits a JSONL trace.
    Simulate(SimulateArgs),
    /// Empirical eavesdropper distinguishing game.
    Game(GameArgs),
    /// Receiving endpoint over TCP (accepts one session).
    Serve(ServeArgs),
    /// Sending endpoint over TCP.
    Connect(ConnectArgs),
    /// Synthetic detection-log generator (JSONL).
    Gen(GenArgs),
}

#[derive(Args)]
struct KeyspaceArgs {
    /// Class-vocabulary size N.
    #[arg(long, default_value_t = 80)]
    classes: u32,
    /// Grid cell count Q.
    #[arg(long, default_value_t = 900)]
    grids: u32,
    /// Top-K detections per frame.
    #[arg(long, default_value_t = 5)]
    topk: u32,
    /// Digest-window length T.
    #[arg(long, default_value_t = 1)]
    window: u32,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON experiment config; explicit flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    snr: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    topk: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',')]
    window: Option<Vec<u32>>,
    /// Grid cell counts Q (perfect squares).
    #[arg(long, value_delimiter = ',')]
    grids: Option<Vec<u32>>,
    /// Monte-Carlo runs per point.
    #[arg(long)]
    runs: Option<u32>,
    /// Frames per run.
    #[arg(long)]
    frames: Option<u32>,
    #[arg(long, value_parser = parse_mode)]
    mode: Option<McrMode>,
    #[arg(long)]
    seed: Option<u64>,
    /// PBKDF2 iterations (indicator values are iteration-independent).
    #[arg(long)]
    iterations: Option<u32>,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit the full JSON report (both granularities) instead of CSV.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SessionArgs {
    #[arg(long, default_value_t = 25.0)]
    snr: f64,
    #[arg(long, default_value_t = 5)]
    topk: u32,
    #[arg(long, default_value_t = 1)]
    window: u32,
    #[arg(long, default_value_t = 900)]
    grids: u32,
    #[arg(long, default_value_t = 80)]
    classes: u32,
    #[arg(long, default_value_t = 10_000)]
    iterations: u32,
    #[arg(long, value_parser = parse_policy, default_value = "none")]
    policy: ResyncPolicy,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SessionArgs {
    fn session_params(&self, n_frames: u64) -> crate::Result<SessionParams> {
        let params = SessionParams {
            n_frames,
            cfg: SakpConfig {
                top_k: self.topk,
                grid: GridSpec::square(self.grids)?,
                num_classes: self.classes,
                window: self.window,
            },
            kdf: KdfParams {
                iterations: self.iterations,
                ..KdfParams::default()
            },
            channel: ChannelParams {
                snr_db: self.snr,
                seed: seeds::mix(self.seed, seeds::domain::CHANNEL, 0),
                ..ChannelParams::default()
            },
            policy: self.policy,
            seed: self.seed,
        };
        params.cfg.validate()?;
        params.kdf.validate()?;
        params.channel.validate()?;
        Ok(params)
    }

    fn scene(&self) -> SceneGenerator {
        SceneGenerator::new(
            SceneConfig {
                num_classes: self.classes,
                ..SceneConfig::default()
            },
            seeds::mix(self.seed, seeds::domain::SCENE, 0),
        )
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    session: SessionArgs,
    /// Frame count (with --input, defaults to the whole log).
    #[arg(long)]
    frames: Option<u64>,
    /// Replay a recorded detection log instead of generating scenes.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Write the JSONL trace here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GameArgs {
    #[arg(long, value_parser = parse_adversary, default_value = "random")]
    adversary: AdversaryKind,
    #[arg(long, default_value_t = 10_000)]
    trials: u32,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    /// "random" or "keychain".
    #[arg(long, default_value = "random")]
    key_source: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ServeArgs {
    #[command(flatten)]
    session: SessionArgs,
    #[arg(long)]
    addr: SocketAddr,
    /// Write the receiver report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConnectArgs {
    #[command(flatten)]
    session: SessionArgs,
    #[arg(long)]
    addr: SocketAddr,
    #[arg(long, default_value_t = 100)]
    frames: u64,
    /// Replay a recorded detection log instead of generating scenes.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Write the sender report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 100)]
    frames: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 80)]
    classes: u32,
    #[arg(long, default_value_t = 6.0)]
    objects_mean: f64,
    /// Write the JSONL log here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_mode(s: &str) -> Result<McrMode, String> {
    match s {
        "independent" => Ok(McrMode::Independent),
        "chained" => Ok(McrMode::Chained),
        _ => Err(format!("unknown mode {s:?} (independent|chained)")),
    }
}

fn parse_policy(s: &str) -> Result<ResyncPolicy, String> {
    match s {
        "none" => Ok(ResyncPolicy::None),
        "reinit-on-failure" | "reinit" => Ok(ResyncPolicy::ReinitOnFailure),
        _ => Err(format!("unknown policy {s:?} (none|reinit-on-failure)")),
    }
}

fn parse_adversary(s: &str) -> Result<AdversaryKind, String> {
    match s {
        "random" => Ok(AdversaryKind::Random),
        "constant" => Ok(AdversaryKind::Constant),
        "decode-without-key" | "decode" => Ok(AdversaryKind::DecodeWithoutKey),
        "oracle-leak" => Ok(AdversaryKind::OracleLeak),
        _ => Err(format!(
            "unknown adversary {s:?} (random|constant|decode-without-key|oracle-leak)"
        )),
    }
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Data(_) | Error::Format(_) | Error::Protocol(_) => EXIT_DATA,
        Error::Io(_) => EXIT_IO,
        Error::InputDomain(_) | Error::Config(_) | Error::State(_) => EXIT_USAGE,
    }
}

/// Stdout or a file.
fn open_sink(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn echo_config_to_stderr(label: &str, value: &impl Serialize) {
    let json = serde_json::to_string(value).unwrap_or_default();
    eprintln!("# esae {} {label} config: {json}", env!("CARGO_PKG_VERSION"));
}

/// Parses argv and runs; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // clap handles --help/--version with success
            if err.use_stderr() {
                let _ = err.print();
                return EXIT_USAGE;
            }
            let _ = err.print();
            return EXIT_OK;
        }
    };
    match dispatch(cli.cmd) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("esae: {err}");
            exit_code_for(&err)
        }
    }
}

fn dispatch(cmd: Cmd) -> crate::Result<i32> {
    match cmd {
        Cmd::Keyspace(args) => cmd_keyspace(args),
        Cmd::Sweep(args) => cmd_sweep(args),
        Cmd::Simulate(args) => cmd_simulate(args),
        Cmd::Game(args) => cmd_game(args),
        Cmd::Serve(args) => cmd_serve(args),
        Cmd::Connect(args) => cmd_connect(args),
        Cmd::Gen(args) => cmd_gen(args),
    }
}

fn cmd_keyspace(args: KeyspaceArgs) -> crate::Result<i32> {
    let report = keyspace_log2(args.classes, args.grids, args.topk, args.window)?;
    echo_config_to_stderr("keyspace", &report);
    println!(
        "{:.2} bits, {}",
        report.log2_space,
        if report.secure { "SECURE" } else { "INSECURE" }
    );
    Ok(if report.secure { EXIT_OK } else { EXIT_INSECURE })
}

fn cmd_sweep(args: SweepArgs) -> crate::Result<i32> {
    let mut config = match &args.config {
        Some(path) => {
            let file = File::open(path)?;
            serde_json::from_reader::<_, ExperimentConfig>(BufReader::new(file))
                .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(v) = args.snr {
        config.mcr.snr_db = v;
    }
    if let Some(v) = args.topk {
        config.mcr.top_k = v;
    }
    if let Some(v) = args.window {
        config.mcr.window = v;
    }
    if let Some(v) = args.grids {
        config.mcr.grid_cells = v;
    }
    if let Some(v) = args.runs {
        config.mcr.runs = v;
    }
    if let Some(v) = args.frames {
        config.mcr.frames_per_run = v;
    }
    if let Some(v) = args.mode {
        config.mcr.mode = v;
    }
    if let Some(v) = args.seed {
        config.seed = v;
    }
    if let Some(v) = args.iterations {
        config.kdf.iterations = v;
    }
    config.validate()?;

    let ctx = McrContext {
        channel: config.channel.clone(),
        kdf: config.kdf.clone(),
        scene: config.scene.clone(),
        policy: config.policy,
        seed: config.seed,
    };
    let points = analysis::estimate_mcr_skg(&config.mcr, &ctx)?;
    let echo = serde_json::to_string(&config).map_err(|e| Error::Data(e.to_string()))?;
    let mut sink = open_sink(&args.out)?;
    if args.json {
        let doc = serde_json::json!({
            "version": env!("CARGO_PKG_VERSION"),
            "config": config,
            "points": points,
        });
        writeln!(sink, "{doc}")?;
    } else {
        analysis::write_csv(&points, &echo, &mut sink)?;
    }
    sink.flush()?;
    Ok(EXIT_OK)
}

fn cmd_simulate(args: SimulateArgs) -> crate::Result<i32> {
    let frames = match &args.input {
        Some(path) => {
            let file = File::open(path)?;
            read_detection_log(BufReader::new(file), args.session.classes)?
        }
        None => {
            let n = args.frames.unwrap_or(100);
            args.session.scene().take(n as usize).collect()
        }
    };
    let n_frames = args.frames.unwrap_or(frames.len() as u64).min(frames.len() as u64);
    if n_frames == 0 {
        return Err(Error::Data("no frames to simulate".into()));
    }
    let params = args.session.session_params(n_frames)?;
    let trace = run_session(&params, frames)?;
    let mut sink = open_sink(&args.out)?;
    trace.write_jsonl(&mut sink, &params)?;
    sink.flush()?;
    Ok(EXIT_OK)
}

fn cmd_game(args: GameArgs) -> crate::Result<i32> {
    let cfg = GameConfig {
        trials: args.trials,
        adversary: args.adversary,
        epsilon_threshold: args.epsilon,
    };
    let scene = SceneConfig::default();
    let key_seed = seeds::mix(args.seed, seeds::domain::PROVIDER, 1);
    let outcome = match args.key_source.as_str() {
        "random" => {
            let mut keys = RandomKeySource::new(key_seed);
            run_distinguishing_game(&cfg, &mut keys, &scene, args.seed)?
        }
        "keychain" => {
            let mut keys = KeychainKeySource::new(
                SakpConfig::default(),
                KdfParams::default(),
                scene.clone(),
                key_seed,
            );
            run_distinguishing_game(&cfg, &mut keys, &scene, args.seed)?
        }
        other => {
            return Err(Error::Config(format!(
                "unknown key source {other:?} (random|keychain)"
            )))
        }
    };
    let doc = serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "key_source": args.key_source,
        "seed": args.seed,
        "outcome": outcome,
    });
    println!("{doc}");
    Ok(EXIT_OK)
}

fn cmd_serve(args: ServeArgs) -> crate::Result<i32> {
    let params = args.session.session_params(u64::MAX)?;
    let listener = std::net::TcpListener::bind(args.addr)?;
    echo_config_to_stderr("serve", &params);
    let report = tcp::serve_one(
        &listener,
        params.cfg.clone(),
        params.kdf.clone(),
        Box::new(SeededKeyProvider::new(crate::protocol::provider_seed(params.seed))),
        params.policy,
        &params.channel,
    )?;
    let mut sink = open_sink(&args.out)?;
    let header = serde_json::json!({
        "type": "serve",
        "version": env!("CARGO_PKG_VERSION"),
        "params": params,
        "profile": crate::channel_sim::profile_from_snr(&params.channel),
    });
    writeln!(sink, "{header}")?;
    for row in &report.rows {
        let line = serde_json::json!({
            "type": "recv",
            "step": row.step,
            "session_index": row.session_index,
            "auth_ok": row.auth_ok,
            "digest": row.receiver_digest,
            "resync": row.resync,
        });
        writeln!(sink, "{line}")?;
    }
    let summary = serde_json::json!({
        "type": "summary",
        "frames_ok": report.frames_ok,
        "auth_failures": report.auth_failures,
        "resyncs": report.resyncs,
    });
    writeln!(sink, "{summary}")?;
    sink.flush()?;
    Ok(EXIT_OK)
}

fn cmd_connect(args: ConnectArgs) -> crate::Result<i32> {
    let frames: Vec<_> = match &args.input {
        Some(path) => {
            let file = File::open(path)?;
            read_detection_log(BufReader::new(file), args.session.classes)?
        }
        None => args.session.scene().take(args.frames as usize).collect(),
    };
    let params = args.session.session_params(args.frames)?;
    echo_config_to_stderr("connect", &params);
    let mut sender = tcp::TcpSender::connect(
        args.addr,
        params.cfg.clone(),
        params.kdf.clone(),
        Box::new(SeededKeyProvider::new(crate::protocol::provider_seed(params.seed))),
    )?;
    for frame in frames.into_iter().take(args.frames as usize) {
        sender.send_frame(&frame)?;
    }
    let rows = sender.finish()?;
    let mut sink = open_sink(&args.out)?;
    let header = serde_json::json!({
        "type": "connect",
        "version": env!("CARGO_PKG_VERSION"),
        "params": params,
    });
    writeln!(sink, "{header}")?;
    for row in &rows {
        let line = serde_json::json!({
            "type": "sent",
            "step": row.step,
            "session_index": row.session_index,
            "digest": row.digest.to_string(),
        });
        writeln!(sink, "{line}")?;
    }
    let summary = serde_json::json!({ "type": "summary", "frames_sent": rows.len() });
    writeln!(sink, "{summary}")?;
    sink.flush()?;
    Ok(EXIT_OK)
}

fn cmd_gen(args: GenArgs) -> crate::Result<i32> {
    let cfg = SceneConfig {
        objects_mean: args.objects_mean,
        num_classes: args.classes,
    };
    cfg.validate()?;
    echo_config_to_stderr("gen", &serde_json::json!({ "scene": cfg, "seed": args.seed, "frames": args.frames }));
    let frames: Vec<_> = SceneGenerator::new(cfg, args.seed)
        .take(args.frames as usize)
        .collect();
    let mut sink = open_sink(&args.out)?;
    write_detection_log(&mut sink, &frames)?;
    sink.flush()?;
    Ok(EXIT_OK)
}
