use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use edray_core::graph::{
    canonical_generator, instance_from_spec, registered_instances, to_dot, DotOverlay, FiniteGraph, GraphExport,
    InstanceSpec, LazyGraph, VertexId,
};
use edray_core::pipeline::suite::{capture_check, connector_fuzz, run_suite, shaping_fuzz, strand_check, SuiteReport};
use edray_core::pipeline::{run_theorem1, ExtractionResult};
use edray_core::rays::FamilyGenerator;
use edray_core::Error;

#[derive(Parser)]
#[command(name = "edray", version, about = "Streaming extraction of edge-disjoint double rays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List built-in instances and their family generators.
    List,
    /// Extract edge-disjoint double rays and print the result bundle.
    Extract(ExtractArgs),
    /// Run seeded verification suites.
    Verify(VerifyArgs),
    /// Write a truncation as DOT or JSON, optionally with extracted rays.
    Export(ExportArgs),
}

#[derive(Args, Clone)]
struct InstanceArgs {
    /// Built-in instance name.
    #[arg(long, conflicts_with = "spec")]
    instance: Option<String>,
    /// Instance parameters as a JSON object.
    #[arg(long, default_value = "{}")]
    params: String,
    /// Instance spec JSON file.
    #[arg(long)]
    spec: Option<PathBuf>,
}

#[derive(Args)]
struct ExtractArgs {
    #[command(flatten)]
    source: InstanceArgs,
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[arg(long, default_value_t = 300)]
    horizon: usize,
    /// Include the stage-by-stage trace.
    #[arg(long)]
    trace: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    All,
    Connector,
    Capture,
    Strands,
    Shaping,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(value_enum, default_value = "all")]
    suite: Suite,
    #[command(flatten)]
    source: InstanceArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cases for randomized suites.
    #[arg(long, default_value_t = 200)]
    rounds: usize,
    #[arg(long, default_value_t = 10)]
    m: usize,
    #[arg(long, default_value_t = 200)]
    horizon: usize,
    /// Corrupt the separator with this index before verifying a capture.
    #[arg(long)]
    corrupt: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Json,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    source: InstanceArgs,
    /// Re-export a JSON truncation written earlier instead of building one.
    #[arg(long, conflicts_with_all = ["instance", "spec"])]
    import: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    horizon: usize,
    /// Overlay this many extracted double rays.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, value_enum, default_value = "dot")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A truncation with the paths drawn on it.
#[derive(serde::Serialize, serde::Deserialize)]
struct TruncationFile {
    name: String,
    graph: GraphExport,
    overlay: Vec<Vec<VertexId>>,
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error [{}]: {e}", e.kind());
    ExitCode::from(if e.is_horizon() { 2 } else { 1 })
}

fn write(out: Option<&PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Input(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn load(args: &InstanceArgs) -> Result<(LazyGraph, Option<FamilyGenerator>), Error> {
    let spec = match (&args.spec, &args.instance) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str::<InstanceSpec>(&text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?
        }
        (None, Some(name)) => InstanceSpec {
            name: name.clone(),
            params: serde_json::from_str(&args.params).map_err(|e| Error::Input(format!("--params: {e}")))?,
            ends: None,
        },
        (None, None) => return Err(Error::Input("one of --instance or --spec is required".into())),
    };
    let g = instance_from_spec(&spec)?;
    let gen = canonical_generator(&spec.name, &spec.params)?;
    Ok((g, gen))
}

fn extract(args: &InstanceArgs, m: usize, horizon: usize) -> Result<(LazyGraph, ExtractionResult), Error> {
    let (g, gen) = load(args)?;
    let result = run_theorem1(&g, gen.as_ref(), m, horizon)?;
    Ok((g, result))
}

fn cmd_list() -> ExitCode {
    for (name, about) in registered_instances() {
        let gen = canonical_generator(name, &Value::Null)
            .ok()
            .flatten()
            .map_or("-".to_string(), |g| g.name().to_string());
        println!("{name}\tgenerator={gen}\t{about}");
    }
    ExitCode::SUCCESS
}

fn cmd_extract(args: &ExtractArgs) -> ExitCode {
    if args.horizon == 0 {
        return fail(&Error::Input("--horizon must be at least 1".into()));
    }
    match extract(&args.source, args.m, args.horizon) {
        Ok((_, result)) => match write(args.out.as_ref(), &to_json(&result.export(args.trace))) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail(&e),
        },
        Err(Error::NeedsLargerHorizon { what, achieved, suggested }) => {
            let partial = json!({
                "status": "needs_larger_horizon",
                "horizon": args.horizon,
                "requested": args.m,
                "achieved": achieved,
                "what": what,
                "suggested_horizon": suggested,
                "double_rays": [],
            });
            if let Err(e) = write(args.out.as_ref(), &to_json(&partial)) {
                return fail(&e);
            }
            fail(&Error::NeedsLargerHorizon { what, achieved, suggested })
        }
        Err(e) => fail(&e),
    }
}

fn verify(args: &VerifyArgs) -> Result<SuiteReport, Error> {
    let source = || -> Result<(LazyGraph, Option<FamilyGenerator>), Error> {
        if args.source.instance.is_none() && args.source.spec.is_none() {
            let mut a = args.source.clone();
            a.instance = Some("thick_ladder".into());
            return load(&a);
        }
        load(&args.source)
    };
    let checks = match args.suite {
        Suite::All => return run_suite(args.seed),
        Suite::Connector => vec![connector_fuzz(args.seed, args.rounds)],
        Suite::Shaping => vec![shaping_fuzz(args.seed, args.rounds)],
        Suite::Capture => {
            let (g, _) = source()?;
            vec![capture_check(&g, 0, args.m, args.horizon, args.corrupt)?]
        }
        Suite::Strands => {
            let (g, gen) = source()?;
            let gen = gen.ok_or_else(|| Error::Input(format!("{} has no family generator", g.name())))?;
            vec![strand_check(&g, 0, &gen, args.m, args.horizon)?]
        }
    };
    Ok(SuiteReport { seed: args.seed, checks })
}

fn cmd_verify(args: &VerifyArgs) -> ExitCode {
    let report = match verify(args) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    if let Err(e) = write(args.out.as_ref(), &to_json(&report)) {
        return fail(&e);
    }
    for c in report.checks.iter().filter(|c| !c.pass) {
        for f in &c.failures {
            eprintln!("FAIL {}: {f}", c.name);
        }
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn truncation(args: &ExportArgs) -> Result<TruncationFile, Error> {
    if let Some(path) = &args.import {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
        let file: TruncationFile =
            serde_json::from_str(&text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        FiniteGraph::from_export(&file.graph)?;
        return Ok(file);
    }
    let (g, overlay) = match args.m {
        Some(m) => {
            let (g, result) = extract(&args.source, m, args.horizon)?;
            let paths = result.double_rays.iter().map(|d| d.at(args.horizon).vertices()).collect();
            (g, paths)
        }
        None => (load(&args.source)?.0, Vec::new()),
    };
    let ball = g.ball(args.horizon)?;
    let overlay: Vec<Vec<VertexId>> = overlay.into_iter().map(|p: Vec<VertexId>| ball.clip(&p).to_vec()).collect();
    Ok(TruncationFile {
        name: g.name().to_string(),
        graph: ball.graph.to_export(),
        overlay,
    })
}

fn cmd_export(args: &ExportArgs) -> ExitCode {
    let file = match truncation(args) {
        Ok(f) => f,
        Err(e) => return fail(&e),
    };
    let text = match args.format {
        Format::Json => to_json(&file),
        Format::Dot => {
            let fg = FiniteGraph::from_export(&file.graph).expect("validated export");
            let overlay = DotOverlay { paths: file.overlay.clone() };
            to_dot(&fg, &file.name, Some(&overlay))
        }
    };
    match write(args.out.as_ref(), &text) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::List => cmd_list(),
        Command::Extract(args) => cmd_extract(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Export(args) => cmd_export(args),
    }
}
