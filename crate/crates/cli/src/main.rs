//! Command-line interface: solve an instance, generate random instances, or
//! benchmark a cross-product of configurations over an instance directory.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mobb::instance::{self, ClassSize, MoilpInstance, ProblemClass};
use mobb::report::RunReport;
use mobb::search::{NodeRule, SolveConfig, VarRule};
use mobb::{ObMode, ProbingMode};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mobb", about = "Exact multi-objective 0-1 branch-and-bound solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and write the nondominated front
    Solve(SolveArgs),
    /// Generate random instances in the generic text format
    Generate(GenerateArgs),
    /// Run a configuration cross-product over an instance directory
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ObArg {
    Nob,
    Cb,
    Fob,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProbingArg {
    None,
    Vf,
    Vfd,
}

#[derive(Clone, Copy, ValueEnum)]
enum NodeArg {
    Df,
    Bf,
    Bbws,
    Bbwsn,
    Bbgap,
}

#[derive(Clone, Copy, ValueEnum)]
enum VarArg {
    Mof,
    Ps,
}

impl From<ObArg> for ObMode {
    fn from(v: ObArg) -> Self {
        match v {
            ObArg::Nob => ObMode::Nob,
            ObArg::Cb => ObMode::Cb,
            ObArg::Fob => ObMode::Fob,
        }
    }
}

impl From<ProbingArg> for ProbingMode {
    fn from(v: ProbingArg) -> Self {
        match v {
            ProbingArg::None => ProbingMode::None,
            ProbingArg::Vf => ProbingMode::Vf,
            ProbingArg::Vfd => ProbingMode::Vfd,
        }
    }
}

impl From<NodeArg> for NodeRule {
    fn from(v: NodeArg) -> Self {
        match v {
            NodeArg::Df => NodeRule::Df,
            NodeArg::Bf => NodeRule::Bf,
            NodeArg::Bbws => NodeRule::Bbws,
            NodeArg::Bbwsn => NodeRule::Bbwsn,
            NodeArg::Bbgap => NodeRule::Bbgap,
        }
    }
}

impl From<VarArg> for VarRule {
    fn from(v: VarArg) -> Self {
        match v {
            VarArg::Mof => VarRule::Mof,
            VarArg::Ps => VarRule::Ps,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    /// instance file in the generic text format
    instance: PathBuf,
    /// objective branching strategy
    #[arg(long, value_enum, default_value = "fob")]
    ob: ObArg,
    /// probing strategy
    #[arg(long, value_enum, default_value = "vf")]
    probing: ProbingArg,
    /// node selection rule
    #[arg(long, value_enum, default_value = "bbwsn")]
    node: NodeArg,
    /// branching-variable rule
    #[arg(long, value_enum, default_value = "mof")]
    var: VarArg,
    /// enable cover cut generation
    #[arg(long)]
    cuts: bool,
    /// enumerate subproblems with at most this many free variables
    #[arg(long = "enum", default_value_t = 14)]
    enum_threshold: u32,
    /// wall-clock limit in seconds
    #[arg(long)]
    time_limit: Option<f64>,
    /// front CSV output path
    #[arg(long, default_value = "front.csv")]
    out: PathBuf,
    /// optional front JSON output path
    #[arg(long)]
    out_json: Option<PathBuf>,
    /// stats JSON output path
    #[arg(long)]
    stats: Option<PathBuf>,
    /// print a node-count heartbeat to stderr every N nodes
    #[arg(long)]
    log_every: Option<u64>,
}

#[derive(Args)]
struct GenerateArgs {
    /// problem class: kp, uflp, or cflp
    class: String,
    /// number of objectives
    p: usize,
    /// size: variable count for kp, LxR for the facility problems (e.g. 2x3)
    size: String,
    /// seed range, e.g. `1..10` (inclusive) or a single seed
    #[arg(long, default_value = "1..10")]
    seeds: String,
    /// output directory
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// directory of generic-format instance files
    #[arg(long)]
    instances: PathBuf,
    /// comma-separated objective branching list
    #[arg(long, default_value = "fob")]
    ob: String,
    /// comma-separated probing list
    #[arg(long, default_value = "vf")]
    probing: String,
    /// comma-separated node rule list
    #[arg(long, default_value = "bbwsn")]
    node: String,
    /// comma-separated variable rule list
    #[arg(long, default_value = "mof")]
    var: String,
    /// comma-separated cuts list (on/off)
    #[arg(long, default_value = "off")]
    cuts: String,
    /// comma-separated enumeration thresholds
    #[arg(long = "enum", default_value = "14")]
    enum_thresholds: String,
    /// wall-clock limit per solve in seconds
    #[arg(long)]
    time_limit: Option<f64>,
    /// output CSV path
    #[arg(long, default_value = "bench.csv")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Generate(args) => cmd_generate(args).map(|()| ExitCode::SUCCESS),
        Command::Bench(args) => cmd_bench(args).map(|()| ExitCode::SUCCESS),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn load_instance(path: &Path) -> Result<MoilpInstance> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read instance file {}", path.display()))?;
    let inst = instance::parse_generic(&text)
        .with_context(|| format!("cannot parse {}", path.display()))?;
    Ok(inst)
}

fn cmd_solve(args: SolveArgs) -> Result<ExitCode> {
    let inst = load_instance(&args.instance)?;
    let cfg = SolveConfig {
        ob_mode: args.ob.into(),
        probing: args.probing.into(),
        node_rule: args.node.into(),
        var_rule: args.var.into(),
        cuts_enabled: args.cuts,
        enum_threshold: args.enum_threshold,
        time_limit: args.time_limit,
        record_trace: false,
        log_every: args.log_every,
    };
    let outcome = mobb::solve(&inst, &cfg)?;

    std::fs::write(&args.out, outcome.front.to_csv(&inst))
        .with_context(|| format!("cannot write {}", args.out.display()))?;
    if let Some(path) = &args.out_json {
        std::fs::write(path, outcome.front.to_json(&inst))
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    if let Some(path) = &args.stats {
        let report = RunReport::new(&inst, &cfg, &outcome);
        std::fs::write(path, report.to_json())
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    eprintln!(
        "front: {} points, {} nodes, {:.3}s{}",
        outcome.front.len(),
        outcome.stats.nodes_explored,
        outcome.stats.time_total,
        if outcome.completed { "" } else { " (time limit)" }
    );
    Ok(if outcome.completed { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn parse_size(class: ProblemClass, size: &str) -> Result<ClassSize> {
    match class {
        ProblemClass::Kp => {
            Ok(ClassSize::Vars(size.parse().context("kp size must be an integer")?))
        }
        _ => {
            let (l, r) = size
                .split_once('x')
                .context("facility size must be LxR, e.g. 2x3")?;
            Ok(ClassSize::Facility {
                locations: l.parse().context("bad location count")?,
                customers: r.parse().context("bad customer count")?,
            })
        }
    }
}

fn parse_seeds(spec: &str) -> Result<Vec<u64>> {
    if let Some((a, b)) = spec.split_once("..") {
        let lo: u64 = a.parse().context("bad seed range start")?;
        let hi: u64 = b.parse().context("bad seed range end")?;
        if hi < lo {
            bail!("empty seed range {spec}");
        }
        Ok((lo..=hi).collect())
    } else {
        Ok(vec![spec.parse().context("bad seed")?])
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let class: ProblemClass = args.class.parse()?;
    let size = parse_size(class, &args.size)?;
    let seeds = parse_seeds(&args.seeds)?;
    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("cannot create {}", args.out_dir.display()))?;
    for seed in seeds {
        let inst = instance::generate_random(class, args.p, size, seed)?;
        let name = format!("{}_p{}_{}_s{}.txt", args.class, args.p, args.size, seed);
        let path = args.out_dir.join(name);
        std::fs::write(&path, instance::write_generic(&inst))
            .with_context(|| format!("cannot write {}", path.display()))?;
        println!("{}", path.display());
    }
    Ok(())
}

fn split_list(s: &str) -> Vec<&str> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty()).collect()
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(&args.instances)
        .with_context(|| format!("cannot read {}", args.instances.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().map(|e| e == "txt").unwrap_or(false))
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("no .txt instances in {}", args.instances.display());
    }

    let obs: Vec<ObMode> = split_list(&args.ob)
        .iter()
        .map(|t| match *t {
            "nob" => Ok(ObMode::Nob),
            "cb" => Ok(ObMode::Cb),
            "fob" => Ok(ObMode::Fob),
            other => bail!("unknown ob `{other}`"),
        })
        .collect::<Result<_>>()?;
    let probings: Vec<ProbingMode> = split_list(&args.probing)
        .iter()
        .map(|t| match *t {
            "none" | "nvf" => Ok(ProbingMode::None),
            "vf" => Ok(ProbingMode::Vf),
            "vfd" => Ok(ProbingMode::Vfd),
            other => bail!("unknown probing `{other}`"),
        })
        .collect::<Result<_>>()?;
    let nodes: Vec<NodeRule> = split_list(&args.node)
        .iter()
        .map(|t| match *t {
            "df" => Ok(NodeRule::Df),
            "bf" => Ok(NodeRule::Bf),
            "bbws" => Ok(NodeRule::Bbws),
            "bbwsn" => Ok(NodeRule::Bbwsn),
            "bbgap" => Ok(NodeRule::Bbgap),
            other => bail!("unknown node rule `{other}`"),
        })
        .collect::<Result<_>>()?;
    let vars: Vec<VarRule> = split_list(&args.var)
        .iter()
        .map(|t| match *t {
            "mof" => Ok(VarRule::Mof),
            "ps" => Ok(VarRule::Ps),
            other => bail!("unknown var rule `{other}`"),
        })
        .collect::<Result<_>>()?;
    let cuts: Vec<bool> = split_list(&args.cuts)
        .iter()
        .map(|t| match *t {
            "on" | "true" => Ok(true),
            "off" | "false" => Ok(false),
            other => bail!("unknown cuts value `{other}`"),
        })
        .collect::<Result<_>>()?;
    let enums: Vec<u32> = split_list(&args.enum_thresholds)
        .iter()
        .map(|t| t.parse::<u32>().with_context(|| format!("bad enum threshold `{t}`")))
        .collect::<Result<_>>()?;

    let mut csv = String::from(
        "instance,ob,probing,node,var,cuts,enum,completed,front,nodes,\
         lps_relaxation,lps_probing,time_total,pct_lb_set,pct_probing,pct_gap_update,\
         fathom_infeasibility,fathom_optimality,fathom_dominance,leaves_enumerated\n",
    );
    for file in &files {
        let inst = load_instance(file)?;
        for &ob in &obs {
            for &probing in &probings {
                for &node in &nodes {
                    for &var in &vars {
                        for &cut in &cuts {
                            for &enum_threshold in &enums {
                                let cfg = SolveConfig {
                                    ob_mode: ob,
                                    probing,
                                    node_rule: node,
                                    var_rule: var,
                                    cuts_enabled: cut,
                                    enum_threshold,
                                    time_limit: args.time_limit,
                                    record_trace: false,
                                    log_every: None,
                                };
                                let outcome = mobb::solve(&inst, &cfg)?;
                                let s = &outcome.stats;
                                let share = |part: f64| {
                                    if s.time_total > 0.0 {
                                        100.0 * part / s.time_total
                                    } else {
                                        0.0
                                    }
                                };
                                let echo = mobb::report::ConfigEcho::from_config(&cfg);
                                csv.push_str(&format!(
                                    "{},{},{},{},{},{},{},{},{},{},{},{},{:.6},{:.2},{:.2},{:.2},{},{},{},{}\n",
                                    file.file_name().unwrap().to_string_lossy(),
                                    echo.ob,
                                    echo.probing,
                                    echo.node,
                                    echo.var,
                                    if cut { "on" } else { "off" },
                                    enum_threshold,
                                    outcome.completed,
                                    s.front_size,
                                    s.nodes_explored,
                                    s.lps_relaxation,
                                    s.lps_probing,
                                    s.time_total,
                                    share(s.time_lbs),
                                    share(s.time_probing),
                                    share(s.time_gap_update),
                                    s.fathom_infeasibility,
                                    s.fathom_optimality,
                                    s.fathom_dominance,
                                    s.leaves_enumerated,
                                ));
                            }
                        }
                    }
                }
            }
        }
    }
    std::fs::write(&args.out, csv)
        .with_context(|| format!("cannot write {}", args.out.display()))?;
    eprintln!("bench results written to {}", args.out.display());
    Ok(())
}
