use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ffzne::campaign::{run_campaign, CampaignSpec};
use ffzne::circuit::{cliffordize, interaction_graph, load_circuit, Circuit, CircuitFamily};
use ffzne::device::{generate_device, load_device, DeviceGenSpec, DeviceModel, Topology};
use ffzne::layout::{enumerate_circuit_layouts, load_layouts, truncate_by_overlap, Layout};
use ffzne::mitigation::{
    best_layout, load_report, run_ffzne, run_folded_zne, FfzneConfig, FitModel, MitigationReport, ZneConfig,
};
use ffzne::report::{emit_plot_data, reports_csv};
use ffzne::scoring::{load_scores, score_layouts, ScoreMethod, ScoreTable};
use ffzne::selection::{select, SelectionStrategy, DEFAULT_A};
use ffzne::sim::{expval, NoiseModel, ObservableKind};
use ffzne::{Error, Result};

#[derive(Parser)]
#[command(name = "ffzne", version, about = "Layout-based zero-noise extrapolation")]
struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; `FFZNE_JOBS` takes precedence.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    #[command(subcommand)]
    Device(DeviceCmd),
    #[command(subcommand)]
    Circuit(CircuitCmd),
    #[command(subcommand)]
    Layouts(LayoutsCmd),
    /// Expectation value of a circuit on one layout.
    Expval(ExpvalArgs),
    #[command(subcommand)]
    Run(RunCmd),
    #[command(subcommand)]
    Campaign(CampaignCmd),
    #[command(subcommand)]
    Report(ReportCmd),
}

#[derive(Subcommand)]
enum DeviceCmd {
    /// Generate a synthetic device.
    Gen {
        /// `heavy-hex-RxC`, `grid-RxC`, `ring-N` or `line-N`.
        #[arg(long, default_value = "heavy-hex-4x4")]
        topology: String,
        #[arg(long, default_value_t = 0.01)]
        eps2: f64,
        #[arg(long, default_value_t = 0.5)]
        sigma2: f64,
        #[arg(long, default_value_t = 0.001)]
        eps1: f64,
        #[arg(long, default_value_t = 0.5)]
        sigma1: f64,
        #[arg(long, default_value_t = 0.0)]
        dead_fraction: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check a device file against its invariants.
    Validate {
        #[arg(short, long)]
        input: PathBuf,
    },
}

#[derive(Subcommand)]
enum CircuitCmd {
    Gen {
        #[arg(long)]
        family: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        reps: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Snap every rotation to the nearest Clifford angle.
    Cliffordize {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum LayoutsCmd {
    Enum {
        #[arg(long)]
        device: PathBuf,
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long)]
        eta: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    Score {
        #[arg(long)]
        device: PathBuf,
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        layouts: PathBuf,
        #[arg(long, default_value = "fp")]
        score: String,
        /// QIC shots; 0 is exact.
        #[arg(long, default_value_t = 0)]
        shots: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    Select {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long, default_value = "exhaustive")]
        strategy: String,
        #[arg(long, default_value_t = DEFAULT_A)]
        a: f64,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        /// Apply the outlier filter first.
        #[arg(long)]
        filter: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ExpvalArgs {
    #[arg(long)]
    circuit: PathBuf,
    #[arg(long)]
    device: PathBuf,
    /// Index into the layout list, or a comma-separated physical mapping.
    #[arg(long, default_value = "0")]
    layout: String,
    /// Layout list to index; enumerated from the circuit when absent.
    #[arg(long)]
    layouts: Option<PathBuf>,
    #[arg(long, default_value = "zw1")]
    observable: String,
    /// `per-gate`, `ideal` or `global:P`.
    #[arg(long, default_value = "per-gate")]
    noise: String,
    #[arg(long, default_value_t = 0)]
    shots: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum RunCmd {
    Ffzne {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        device: PathBuf,
        #[arg(long, default_value = "fp")]
        score: String,
        #[arg(long, default_value = "exhaustive")]
        strategy: String,
        #[arg(long, default_value_t = DEFAULT_A)]
        a: f64,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long)]
        eta: Option<usize>,
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long, default_value = "zw1")]
        observable: String,
        #[arg(long, default_value_t = 0)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        score_shots: u64,
        /// Weight the fit by inverse variance (sampled mode).
        #[arg(long)]
        weighted: bool,
        /// Record stage wall-times in the report.
        #[arg(long)]
        timings: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    Zne {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        device: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1,3,5")]
        lambdas: Vec<f64>,
        #[arg(long, default_value = "linear")]
        extrapolator: String,
        /// Comma-separated physical mapping; the best fidelity-product layout
        /// when absent.
        #[arg(long)]
        layout: Option<String>,
        #[arg(long, default_value = "zw1")]
        observable: String,
        #[arg(long, default_value_t = 0)]
        shots: u64,
        #[arg(long)]
        timings: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CampaignCmd {
    Run {
        #[arg(long)]
        spec: PathBuf,
        /// Overrides the spec's output directory.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ReportCmd {
    /// One CSV row per report.
    Csv {
        reports: Vec<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Extrapolation, budget and scatter CSVs.
    Plotdata {
        reports: Vec<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
}

fn emit(body: &str, output: Option<&Path>) -> Result<()> {
    let newline = if body.ends_with('\n') { "" } else { "\n" };
    match output {
        Some(path) => fs::write(path, format!("{body}{newline}"))?,
        None => print!("{body}{newline}"),
    }
    Ok(())
}

fn json_only(format: Format, what: &str) -> Result<()> {
    if format == Format::Csv {
        return Err(Error::InvalidInput(format!("{what} has no csv output")));
    }
    Ok(())
}

fn parse_mapping(text: &str) -> Result<Layout> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidInput(format!("bad layout entry `{t}`")))
        })
        .collect::<Result<Vec<_>>>()
        .map(Layout::new)
}

fn resolve_layout(
    spec: &str,
    list: Option<&Path>,
    circuit: &Circuit,
    device: &DeviceModel,
) -> Result<Layout> {
    if spec.contains(',') {
        let layout = parse_mapping(spec)?;
        layout.validate(&interaction_graph(circuit), device)?;
        return Ok(layout);
    }
    let k: usize = spec
        .parse()
        .map_err(|_| Error::InvalidInput(format!("bad layout index `{spec}`")))?;
    let set = match list {
        Some(p) => load_layouts(p)?,
        None => enumerate_circuit_layouts(circuit, device, Some(k + 1))?,
    };
    set.layouts
        .get(k)
        .cloned()
        .ok_or_else(|| Error::InvalidInput(format!("layout index {k} out of range ({} layouts)", set.len())))
}

fn parse_noise(text: &str) -> Result<NoiseModel> {
    let noise = match text {
        "ideal" => NoiseModel::Ideal,
        "per-gate" => NoiseModel::PerGateDepolarizing,
        other => match other.strip_prefix("global:").map(str::parse::<f64>) {
            Some(Ok(p)) => NoiseModel::GlobalDepolarizing { p },
            _ => return Err(Error::InvalidInput(format!("unknown noise model `{other}`"))),
        },
    };
    noise.validate()?;
    Ok(noise)
}

fn table_csv(table: &ScoreTable) -> String {
    let mut out = String::from("rank,layout,score\n");
    for (k, e) in table.entries.iter().enumerate() {
        let mapping: Vec<String> = e.layout.mapping().iter().map(|p| p.to_string()).collect();
        out.push_str(&format!("{},\"{}\",{}\n", k + 1, mapping.join(" "), e.score));
    }
    out
}

fn write_report(report: &MitigationReport, format: Format, output: Option<&Path>) -> Result<()> {
    match format {
        Format::Json => emit(&report.to_json(), output),
        Format::Csv => emit(&reports_csv(std::slice::from_ref(report))?, output),
    }
}

fn run(cli: Cli) -> Result<()> {
    let seed = cli.seed;
    let format = cli.format;
    match cli.command {
        Command::Device(DeviceCmd::Gen {
            topology,
            eps2,
            sigma2,
            eps1,
            sigma1,
            dead_fraction,
            output,
        }) => {
            json_only(format, "device gen")?;
            let spec = DeviceGenSpec {
                topology: topology.parse::<Topology>()?,
                eps2,
                sigma2,
                eps1,
                sigma1,
                dead_fraction,
                seed,
            };
            emit(&generate_device(&spec)?.to_json(), output.as_deref())
        }
        Command::Device(DeviceCmd::Validate { input }) => {
            let d = load_device(&input)?;
            let summary = serde_json::json!({
                "valid": true,
                "name": d.name(),
                "num_qubits": d.num_qubits(),
                "edges": d.edges().len(),
                "connected": d.is_connected(),
            });
            emit(&format!("{summary}\n"), None)
        }
        Command::Circuit(CircuitCmd::Gen {
            family,
            n,
            reps,
            output,
        }) => {
            json_only(format, "circuit gen")?;
            let c = family.parse::<CircuitFamily>()?.generate(n, reps, seed)?;
            emit(&c.to_json(), output.as_deref())
        }
        Command::Circuit(CircuitCmd::Cliffordize { input, output }) => {
            json_only(format, "circuit cliffordize")?;
            emit(&cliffordize(&load_circuit(&input)?).to_json(), output.as_deref())
        }
        Command::Layouts(LayoutsCmd::Enum {
            device,
            circuit,
            cap,
            eta,
            output,
        }) => {
            json_only(format, "layouts enum")?;
            let (d, c) = (load_device(&device)?, load_circuit(&circuit)?);
            let mut set = enumerate_circuit_layouts(&c, &d, cap)?;
            if let Some(eta) = eta {
                set = truncate_by_overlap(&set, eta)?;
            }
            emit(&set.to_json(), output.as_deref())
        }
        Command::Layouts(LayoutsCmd::Score {
            device,
            circuit,
            layouts,
            score,
            shots,
            output,
        }) => {
            let (d, c, set) = (
                load_device(&device)?,
                load_circuit(&circuit)?,
                load_layouts(&layouts)?,
            );
            if !set.circuit_hash.is_empty() && set.circuit_hash != c.content_hash() {
                return Err(Error::Validation(
                    "layout set was enumerated for a different circuit".into(),
                ));
            }
            let table = score_layouts(&c, &set, &d, score.parse::<ScoreMethod>()?, shots, seed)?;
            match format {
                Format::Json => emit(&table.to_json(), output.as_deref()),
                Format::Csv => emit(&table_csv(&table), output.as_deref()),
            }
        }
        Command::Layouts(LayoutsCmd::Select {
            scores,
            strategy,
            a,
            eps,
            filter,
            output,
        }) => {
            json_only(format, "layouts select")?;
            let mut table = load_scores(&scores)?;
            if filter {
                table = ffzne::scoring::filter_scores(&table)?;
            }
            let triple = select(&table, strategy.parse::<SelectionStrategy>()?, a, eps)?;
            emit(&triple.to_json(), output.as_deref())
        }
        Command::Expval(args) => {
            let (d, c) = (load_device(&args.device)?, load_circuit(&args.circuit)?);
            let layout = resolve_layout(&args.layout, args.layouts.as_deref(), &c, &d)?;
            let obs = args.observable.parse::<ObservableKind>()?.build(c.num_qubits())?;
            let est = expval(
                &c,
                &layout,
                &d,
                &parse_noise(&args.noise)?,
                &obs,
                args.shots,
                seed,
            )?;
            let body = match format {
                Format::Json => {
                    let v = serde_json::json!({
                        "layout": layout,
                        "observable": args.observable,
                        "mean": est.mean,
                        "stderr": est.stderr,
                        "shots": est.shots,
                        "mode": est.mode,
                    });
                    serde_json::to_string_pretty(&v)?
                }
                Format::Csv => format!("mean,stderr,shots\n{},{},{}\n", est.mean, est.stderr, est.shots),
            };
            emit(&body, args.output.as_deref())
        }
        Command::Run(RunCmd::Ffzne {
            circuit,
            device,
            score,
            strategy,
            a,
            eps,
            eta,
            cap,
            observable,
            shots,
            score_shots,
            weighted,
            timings,
            output,
        }) => {
            let (d, c) = (load_device(&device)?, load_circuit(&circuit)?);
            let mut cfg = FfzneConfig::new(score.parse()?, strategy.parse()?);
            cfg.a = a;
            cfg.eps = eps;
            cfg.eta = eta;
            cfg.cap = cap;
            cfg.observable = observable.parse()?;
            cfg.shots = shots;
            cfg.score_shots = score_shots;
            cfg.seed = seed;
            cfg.weighted = weighted;
            cfg.timings = timings;
            write_report(&run_ffzne(&c, &d, &cfg)?, format, output.as_deref())
        }
        Command::Run(RunCmd::Zne {
            circuit,
            device,
            lambdas,
            extrapolator,
            layout,
            observable,
            shots,
            timings,
            output,
        }) => {
            let (d, c) = (load_device(&device)?, load_circuit(&circuit)?);
            let layout = match layout {
                Some(text) => {
                    let l = parse_mapping(&text)?;
                    l.validate(&interaction_graph(&c), &d)?;
                    l
                }
                None => best_layout(&c, &d, ScoreMethod::FidelityProduct, 0, seed)?,
            };
            let mut cfg = ZneConfig::new(lambdas, extrapolator.parse::<FitModel>()?);
            cfg.observable = observable.parse()?;
            cfg.shots = shots;
            cfg.seed = seed;
            cfg.timings = timings;
            write_report(&run_folded_zne(&c, &d, &layout, &cfg)?, format, output.as_deref())
        }
        Command::Campaign(CampaignCmd::Run { spec, output }) => {
            let mut spec = CampaignSpec::from_json(&fs::read_to_string(&spec)?)?;
            if let Some(dir) = output {
                spec.output = dir;
            }
            let outcome = run_campaign(&spec)?;
            let failed = outcome.rows.iter().filter(|r| r.status != "ok").count();
            let summary = serde_json::json!({
                "cells": outcome.rows.len(),
                "failed": failed,
                "summary": outcome.summary_path,
            });
            emit(&format!("{summary}\n"), None)
        }
        Command::Report(ReportCmd::Csv { reports, output }) => {
            let loaded = reports.iter().map(load_report).collect::<Result<Vec<_>>>()?;
            emit(&reports_csv(&loaded)?, output.as_deref())
        }
        Command::Report(ReportCmd::Plotdata { reports, output }) => {
            let loaded = reports.iter().map(load_report).collect::<Result<Vec<_>>>()?;
            let paths = emit_plot_data(&loaded, &output)?;
            emit(&format!("{}\n", serde_json::json!({ "files": paths })), None)
        }
    }
}

fn jobs(flag: Option<usize>) -> std::result::Result<Option<usize>, Error> {
    match std::env::var("FFZNE_JOBS") {
        Ok(v) => v
            .parse::<usize>()
            .map(Some)
            .map_err(|_| Error::InvalidInput(format!("FFZNE_JOBS=`{v}` is not a thread count"))),
        Err(_) => Ok(flag),
    }
}

fn fail(code: &str, message: &str, exit: u8) -> ExitCode {
    let body = serde_json::json!({ "error": code, "message": message, "exit_code": exit });
    eprintln!("{body}");
    ExitCode::from(exit)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("usage", e.to_string().trim(), 2),
    };
    let threads = match jobs(cli.jobs) {
        Ok(t) => t,
        Err(e) => return fail(e.code(), &e.to_string(), 2),
    };
    if let Some(n) = threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let exit = if e.is_validation() || matches!(e, Error::Io(_)) {
                2
            } else {
                3
            };
            fail(e.code(), &e.to_string(), exit)
        }
    }
}
