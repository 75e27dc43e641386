//! `cybersim`: batch access to the simulator, optimizer and analytics, and a
//! launcher for the game server.

use std::fmt::Write as _;
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use cybersim_core::analytics::{analyze, best_per_player, performance_histogram, player_learning_slopes};
use cybersim_core::optimizer::{calibrate_resource_rate, grid_search};
use cybersim_core::persistence::{
    fmt_money, grid_csv, load_cohorts_from_path, read_trajectory_header, trajectory_csv, TrajectoryHeader, LOG_PATH_ENV,
};
use cybersim_core::sim::mix_seed;
use cybersim_core::{
    level_one_scenario, level_two_scenario, run_simulation, AttackScenario, DecisionVector, Level, PolicySpec,
    SimConfig,
};
use cybersim_service::ServerConfig;

#[derive(Parser)]
#[command(name = "cybersim", version, about = "Cybersecurity capability-investment simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write its trajectory CSV.
    Simulate(SimulateArgs),
    /// Grid-search constant policies and write the full table.
    Optimize(OptimizeArgs),
    /// Print attack scenarios as JSON lines.
    Scenario(ScenarioArgs),
    /// Summarize a run log and write figure data.
    Analyze(AnalyzeArgs),
    /// Rescale the resource rate until the grid optimum hits a target.
    Calibrate(CalibrateArgs),
    /// Start the HTTP game server.
    Serve(ServeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioKind {
    One,
    Two,
    /// No attacks.
    None,
}

impl ScenarioKind {
    fn build(self, seed: u64, cfg: &SimConfig) -> AttackScenario {
        match self {
            ScenarioKind::One => level_one_scenario(cfg),
            ScenarioKind::Two => level_two_scenario(mix_seed(seed), cfg),
            ScenarioKind::None => AttackScenario::none(),
        }
    }
}

#[derive(Args)]
struct ConfigArg {
    /// TOML file with SimConfig fields; omitted fields keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl ConfigArg {
    fn load(&self) -> Result<SimConfig> {
        let cfg: SimConfig = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            None => SimConfig::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// `zero`, `max`, `P,D,R` fractions of revenue, or a JSON policy file.
    #[arg(long, default_value = "zero")]
    policy: String,
    #[arg(long, value_enum, default_value = "one")]
    level: ScenarioKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Switch the profit shock off.
    #[arg(long)]
    noiseless: bool,
    #[command(flatten)]
    config: ConfigArg,
    /// Regenerate a trajectory from the header of an earlier CSV instead.
    #[arg(long, conflicts_with_all = ["policy", "level", "seed", "noiseless", "config"])]
    replay: Option<PathBuf>,
    /// With `--replay`, fail unless the regenerated file is identical.
    #[arg(long, requires = "replay")]
    verify: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OptimizeArgs {
    #[arg(long, default_value_t = 0.005)]
    grid_step: f64,
    #[arg(long, value_enum, default_value = "one")]
    level: ScenarioKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Keep the profit shock on; by default the search is noise-free.
    #[arg(long)]
    with_noise: bool,
    #[command(flatten)]
    config: ConfigArg,
    /// Table destination. The best cell goes to stdout when this is set.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScenarioArgs {
    #[arg(long, value_enum, default_value = "one")]
    level: ScenarioKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Scenarios to draw, seeds `seed..seed+count`.
    #[arg(long, default_value_t = 1)]
    count: u64,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long, env = LOG_PATH_ENV)]
    log: PathBuf,
    /// Directory for figure-data CSVs.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    bins: usize,
}

#[derive(Args)]
struct CalibrateArgs {
    /// Target best accumulated profit, M$.
    #[arg(long, default_value_t = 2500.0)]
    target: f64,
    #[arg(long, default_value_t = 0.005)]
    grid_step: f64,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
    /// TOML server config; its `[sim]` table mirrors SimConfig.
    #[arg(long)]
    server_config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    cohort: Option<String>,
    #[arg(long, env = LOG_PATH_ENV)]
    log: Option<PathBuf>,
}

fn parse_policy(spec: &str, cfg: &SimConfig) -> Result<PolicySpec> {
    let policy = match spec {
        "zero" => PolicySpec::zero(),
        "max" => PolicySpec::constant(DecisionVector::max(cfg)),
        s if s.contains(',') => {
            let parts: Vec<f64> = s
                .split(',')
                .map(|p| p.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .with_context(|| format!("policy {s:?}: expected three numbers"))?;
            let [p, d, r] = parts[..] else {
                bail!("policy {s:?}: expected three numbers, got {}", parts.len());
            };
            PolicySpec::constant(DecisionVector::new(p, d, r))
        }
        path => {
            let text = fs::read_to_string(path).with_context(|| format!("reading policy file {path}"))?;
            serde_json::from_str(&text).with_context(|| format!("parsing policy file {path}"))?
        }
    };
    policy.validate(cfg)?;
    Ok(policy)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn simulate(args: SimulateArgs) -> Result<()> {
    if let Some(path) = &args.replay {
        let original = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let header = read_trajectory_header(&original)?;
        let traj = run_simulation(&header.schedule, &header.scenario, &header.config, header.seed)?;
        let csv = trajectory_csv(&header, &traj)?;
        if args.verify && csv != original {
            bail!("{} does not reproduce from its header", path.display());
        }
        return emit(args.out.as_deref(), &csv);
    }
    let mut cfg = args.config.load()?;
    if args.noiseless {
        cfg = cfg.noiseless();
    }
    let policy = parse_policy(&args.policy, &cfg)?;
    let scenario = args.level.build(args.seed, &cfg);
    let header = TrajectoryHeader {
        schedule: policy.schedule_for(&scenario, &cfg),
        scenario,
        seed: args.seed,
        config: cfg,
    };
    let traj = run_simulation(&header.schedule, &header.scenario, &header.config, header.seed)?;
    emit(args.out.as_deref(), &trajectory_csv(&header, &traj)?)
}

fn optimize(args: OptimizeArgs) -> Result<()> {
    let mut cfg = args.config.load()?;
    if !args.with_noise {
        cfg = cfg.noiseless();
    }
    let scenario = args.level.build(args.seed, &cfg);
    let result = grid_search(args.grid_step, &scenario, &cfg, args.seed)?;
    let best = result.best_vector();
    let summary = format!(
        "best p_alloc={:.6} d_alloc={:.6} r_alloc={:.6} accumulated_profit={}\n",
        best.p_alloc,
        best.d_alloc,
        best.r_alloc,
        fmt_money(result.best_profit)
    );
    let table = grid_csv(&result.table);
    match &args.out {
        Some(path) => {
            emit(Some(path), &table)?;
            print!("{summary}");
        }
        None => {
            print!("{table}");
            eprint!("{summary}");
        }
    }
    Ok(())
}

fn scenario(args: ScenarioArgs) -> Result<()> {
    let cfg = args.config.load()?;
    let mut out = String::new();
    for k in 0..args.count {
        let s = args.level.build(args.seed.wrapping_add(k), &cfg);
        out.push_str(&serde_json::to_string(&s)?);
        out.push('\n');
    }
    emit(None, &out)
}

fn analyze_log(args: AnalyzeArgs) -> Result<()> {
    let loaded = load_cohorts_from_path(&args.log).with_context(|| format!("loading {}", args.log.display()))?;
    if loaded.cohorts.is_empty() {
        println!("no scored runs in {}", args.log.display());
        return Ok(());
    }
    let report = analyze(&loaded.cohorts)?;
    let mut text = report.render_text();
    let practice: usize = loaded.exclusions.iter().map(|e| e.practice_skipped).sum();
    if practice > 0 {
        let _ = writeln!(text, "\n{practice} practice runs skipped");
    }
    print!("{text}");

    let Some(dir) = &args.out_dir else {
        return Ok(());
    };
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut best = String::from("cohort,level,player_id,best_profit,run_count\n");
    let mut hist = String::from("cohort,level,bin_lo,bin_hi,count,fraction,density\n");
    let mut slopes = String::from("cohort,level,player_id,slope\n");
    for cohort in &loaded.cohorts {
        for level in [Level::One, Level::Two] {
            let scores = best_per_player(cohort, level);
            for s in &scores {
                let _ = writeln!(
                    best,
                    "{},{level},{},{},{}",
                    cohort.label,
                    s.player_id,
                    fmt_money(s.value),
                    s.run_count
                );
            }
            let values: Vec<f64> = scores.iter().map(|s| s.value).collect();
            if let Ok(h) = performance_histogram(&values, args.bins) {
                for k in 0..h.counts.len() {
                    let _ = writeln!(
                        hist,
                        "{},{level},{},{},{},{:.6},{:.9}",
                        cohort.label,
                        fmt_money(h.edges[k]),
                        fmt_money(h.edges[k + 1]),
                        h.counts[k],
                        h.fraction[k],
                        h.density[k]
                    );
                }
            }
            for (id, slope) in player_learning_slopes(cohort, level) {
                let _ = writeln!(slopes, "{},{level},{id},{}", cohort.label, fmt_money(slope));
            }
        }
    }
    let mut ranks = String::from("cohort,player_id,rank_one,rank_two,change_pct\n");
    for (label, rt) in &report.rank_transitions {
        for c in rt.iter().flat_map(|rt| &rt.changes) {
            let _ = writeln!(
                ranks,
                "{label},{},{},{},{:.6}",
                c.player_id, c.rank_one, c.rank_two, c.change_pct
            );
        }
    }
    for (name, body) in [
        ("best_performance.csv", best),
        ("histogram.csv", hist),
        ("learning_slopes.csv", slopes),
        ("rank_changes.csv", ranks),
    ] {
        emit(Some(&dir.join(name)), &body)?;
    }
    Ok(())
}

fn calibrate(args: CalibrateArgs) -> Result<()> {
    let cfg = args.config.load()?;
    let c = calibrate_resource_rate(args.target, args.grid_step, &cfg)?;
    println!("resource_rate = {:.9}", c.resource_rate);
    println!("capability_gain = {:.9}", c.capability_gain);
    println!(
        "best p_alloc={:.6} d_alloc={:.6} r_alloc={:.6} accumulated_profit={}",
        c.best_vector.p_alloc,
        c.best_vector.d_alloc,
        c.best_vector.r_alloc,
        fmt_money(c.best_profit)
    );
    println!("iterations = {}", c.iterations);
    Ok(())
}

fn serve(args: ServeArgs) -> Result<()> {
    let mut config: ServerConfig = match &args.server_config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => ServerConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(cohort) = args.cohort {
        config.cohort = cohort;
    }
    if args.log.is_some() {
        config.log_path = args.log;
    }
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env().add_directive("info".parse()?))
        .with_writer(std::io::stderr)
        .init();
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(cybersim_service::serve(args.addr, config))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Optimize(a) => optimize(a),
        Command::Scenario(a) => scenario(a),
        Command::Analyze(a) => analyze_log(a),
        Command::Calibrate(a) => calibrate(a),
        Command::Serve(a) => serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
