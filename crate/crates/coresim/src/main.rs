use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use coresim::experiments::{
    load_scenario, parse_outer_header, render_csv, run_sweep, Metric, Scenario, SweepParam,
};
use coresim::procedures::{run_procedure_traced, ProcedureKind, World};
use coresim::simnet::WirelessMode;
use coresim::topology::{build_topology, Architecture};
use coresim::wire::render_golden_frames;

#[derive(Parser)]
#[command(
    name = "coresim",
    about = "Delay analysis and simulation of GTP-based and IP-in-IP mobile packet cores",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate closed-form metrics over a parameter sweep.
    Analyze(AnalyzeArgs),
    /// Replay signaling procedures through the event engine.
    Simulate(SimulateArgs),
    /// Work with the wire-format codecs.
    Codec(CodecArgs),
    /// Dump the realized topology as an edge list.
    Topology(TopologyArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Scenario file (TOML). Overrides the inline sweep flags.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Swept parameter: T_q, L_wl, gamma, lambda, S_d or n_enbs.
    #[arg(long)]
    sweep: Option<String>,
    #[arg(long)]
    from: Option<f64>,
    #[arg(long)]
    to: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    /// Metric: ttd, handover_inter_x2, handover_intra_s1, dto, handover_chain.
    #[arg(long, default_value = "ttd")]
    metric: String,
    /// Outer-header layout for overhead metrics: compact or standard.
    #[arg(long)]
    outer_header: Option<String>,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario file (TOML); runs the sweep with simulated rows enabled.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Single procedure to replay: attach_4g, attach_icna, data_mh_ih,
    /// data_mh_mh, data_ih_mh, x2_ho_4g, s1_ho_4g, inter_gw_ho_icna,
    /// intra_gw_ho_icna. Prerequisite attaches run automatically.
    #[arg(long)]
    procedure: Option<String>,
    /// Wireless leg model: expected or stochastic.
    #[arg(long, default_value = "expected")]
    mode: String,
    /// RNG seed for stochastic mode.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the transcript (or scenario CSV) here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write per-hop trace records (`t_ms seq src dst kind size_bytes`).
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct CodecArgs {
    #[command(subcommand)]
    action: CodecAction,
}

#[derive(Subcommand)]
enum CodecAction {
    /// Print the golden reference frames, one `<scheme> <hex>` per line.
    Dump {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct TopologyArgs {
    /// Architecture: 4g or icna.
    #[arg(long)]
    arch: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_mode(mode: &str, seed: u64) -> Result<WirelessMode, String> {
    match mode {
        "expected" => Ok(WirelessMode::ExpectedValue),
        "stochastic" => Ok(WirelessMode::Stochastic { seed }),
        other => Err(format!(
            "unknown mode `{other}` (expected `expected` or `stochastic`)"
        )),
    }
}

fn parse_arch(arch: &str) -> Result<Architecture, String> {
    match arch {
        "4g" => Ok(Architecture::Epc4g),
        "icna" => Ok(Architecture::Icna),
        other => Err(format!(
            "unknown architecture `{other}` (expected `4g` or `icna`)"
        )),
    }
}

fn parse_procedure(name: &str) -> Result<ProcedureKind, String> {
    let all = [
        ProcedureKind::Attach4g,
        ProcedureKind::AttachIcna,
        ProcedureKind::DataMobileToInternet,
        ProcedureKind::DataMobileToMobile,
        ProcedureKind::DataInternetToMobile,
        ProcedureKind::X2Handover4g,
        ProcedureKind::S1Handover4g,
        ProcedureKind::InterGatewayHandoverIcna,
        ProcedureKind::IntraGatewayHandoverIcna,
    ];
    all.into_iter()
        .find(|k| k.as_str() == name)
        .ok_or_else(|| format!("unknown procedure `{name}`"))
}

fn write_out(out: Option<&PathBuf>, text: &str) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| e.to_string()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn analyze(args: &AnalyzeArgs) -> Result<(), String> {
    let mut scenario = match &args.scenario {
        Some(path) => load_scenario(path).map_err(|e| e.to_string())?,
        None => {
            let sweep = args
                .sweep
                .as_deref()
                .ok_or("either --scenario or --sweep is required")?;
            Scenario {
                name: "inline".into(),
                metric: Metric::parse(&args.metric).map_err(|e| e.to_string())?,
                sweep: SweepParam::parse(sweep).map_err(|e| e.to_string())?,
                from: args.from.ok_or("--from is required with --sweep")?,
                to: args.to.ok_or("--to is required with --sweep")?,
                step: args.step.ok_or("--step is required with --sweep")?,
                params: Default::default(),
                hops: Default::default(),
                delay_cfg: Default::default(),
                mode: WirelessMode::ExpectedValue,
                outer_mode: Default::default(),
                simulate: false,
            }
        }
    };
    if args.outer_header.is_some() {
        scenario.outer_mode =
            parse_outer_header(args.outer_header.as_deref()).map_err(|e| e.to_string())?;
    }
    let rows = run_sweep(&scenario).map_err(|e| e.to_string())?;
    let csv = render_csv(&rows).map_err(|e| e.to_string())?;
    write_out(args.out.as_ref(), &csv)
}

fn simulate(args: &SimulateArgs) -> Result<(), String> {
    let mode = parse_mode(&args.mode, args.seed)?;
    if let Some(path) = &args.scenario {
        let mut scenario = load_scenario(path).map_err(|e| e.to_string())?;
        scenario.simulate = true;
        scenario.mode = mode;
        let rows = run_sweep(&scenario).map_err(|e| e.to_string())?;
        let csv = render_csv(&rows).map_err(|e| e.to_string())?;
        return write_out(args.out.as_ref(), &csv);
    }
    let name = args
        .procedure
        .as_deref()
        .ok_or("either --scenario or --procedure is required")?;
    let kind = parse_procedure(name)?;
    let mut world = World::new(
        kind.architecture(),
        Default::default(),
        Default::default(),
        Default::default(),
        mode,
        1,
    )
    .map_err(|e| e.to_string())?;
    let attach = match kind.architecture() {
        Architecture::Epc4g => ProcedureKind::Attach4g,
        Architecture::Icna => ProcedureKind::AttachIcna,
    };
    let mut trace_lines = String::new();
    if kind != attach {
        let (_, trace) = run_procedure_traced(attach, &mut world).map_err(|e| e.to_string())?;
        for r in &trace {
            trace_lines.push_str(&r.line());
            trace_lines.push('\n');
        }
    }
    let (transcript, trace) = run_procedure_traced(kind, &mut world).map_err(|e| e.to_string())?;
    for r in &trace {
        trace_lines.push_str(&r.line());
        trace_lines.push('\n');
    }
    if let Some(path) = &args.trace {
        std::fs::write(path, &trace_lines).map_err(|e| e.to_string())?;
    }
    let mut text = transcript.export_lines();
    text.push_str(&format!(
        "final_latency_ms {:.6}\n",
        transcript.final_latency_ms()
    ));
    write_out(args.out.as_ref(), &text)
}

fn codec(args: &CodecArgs) -> Result<(), String> {
    match &args.action {
        CodecAction::Dump { out } => write_out(out.as_ref(), &render_golden_frames()),
    }
}

fn topology(args: &TopologyArgs) -> Result<(), String> {
    let arch = parse_arch(&args.arch)?;
    let topo = build_topology(&Default::default(), arch, 1).map_err(|e| e.to_string())?;
    write_out(args.out.as_ref(), &topo.edge_list())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Simulate(a) => simulate(a),
        Command::Codec(a) => codec(a),
        Command::Topology(a) => topology(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
