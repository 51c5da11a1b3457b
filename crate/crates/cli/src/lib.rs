//! `hisyn` subcommands. Every command writes human-readable output to `out`,
//! diagnostics and timings to `err`, and returns a process exit code.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use hisyn_core::abstraction::{extend_to_observer, is_natural_observer};
use hisyn_core::clustering::{extract_clusters, mcl_iterate_counted, MclParams, Partition, StochasticMatrix};
use hisyn_core::hierarchy::run_algorithm1;
use hisyn_core::io::{self, ParamOverrides};
use hisyn_core::verify::{monolithic_nonblocking, DEFAULT_BUDGET};
use hisyn_core::{Alphabet, Automaton, Error, EventRegistry};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PROPERTY_FAILS: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_SYNTHESIS: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "hisyn",
    version,
    about = "Hierarchical nonblocking supervisor synthesis with Markov clustering"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize decentralized supervisors and coordinators for a project.
    Synth(SynthArgs),
    /// Run Markov clustering on a matrix file.
    Cluster(ClusterArgs),
    /// Check that the synchronous product of automata is nonblocking.
    Verify(VerifyArgs),
    /// Check whether a projection is a natural observer.
    Observer(ObserverArgs),
}

#[derive(Debug, Args)]
pub struct MclFlags {
    /// Expansion power.
    #[arg(long)]
    pub alpha: Option<u32>,
    /// Inflation power; must exceed 1.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
}

impl MclFlags {
    fn overrides(&self) -> ParamOverrides {
        ParamOverrides {
            alpha: self.alpha,
            beta: self.beta,
            epsilon: self.epsilon,
            prune: None,
            max_iters: self.max_iters,
        }
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    pub project: PathBuf,
    #[command(flatten)]
    pub mcl: MclFlags,
    /// Output directory; defaults to the project's `output` or `./out`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Check the emitted supervisors and coordinators for joint nonblocking.
    #[arg(long)]
    pub verify: bool,
    /// State budget for `--verify`.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: usize,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    pub matrix: PathBuf,
    #[command(flatten)]
    pub mcl: MclFlags,
    /// Comma-separated beta values; prints one cluster count per value.
    #[arg(long, value_delimiter = ',', conflicts_with = "beta")]
    pub sweep: Vec<f64>,
    /// Comma-separated entity names in row order.
    #[arg(long, value_delimiter = ',')]
    pub names: Vec<String>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    /// Shared event declarations.
    #[arg(long)]
    pub events: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: usize,
}

#[derive(Debug, Args)]
pub struct ObserverArgs {
    pub file: PathBuf,
    /// Comma-separated observable events.
    #[arg(long, value_delimiter = ',')]
    pub observable: Vec<String>,
    #[arg(long)]
    pub events: Option<PathBuf>,
    /// Also print the smallest-found observer extension.
    #[arg(long)]
    pub extend: bool,
}

/// Maps an error to the exit-code taxonomy.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<Error>() {
        Some(Error::BudgetExceeded { .. }) => EXIT_BUDGET,
        Some(Error::UnresolvableConflict { .. } | Error::NotConverged { .. } | Error::Invariant(_)) => EXIT_SYNTHESIS,
        _ => EXIT_VALIDATION,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli, out, err),
        Err(e) => {
            let _ = write!(err, "{e}");
            if e.use_stderr() {
                EXIT_VALIDATION
            } else {
                let _ = write!(out, "{e}");
                EXIT_OK
            }
        }
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Synth(a) => cmd_synth(a, out, err),
        Command::Cluster(a) => cmd_cluster(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Observer(a) => cmd_observer(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let code = exit_code(&e);
            // Core errors already render their source; skip repeated causes.
            let mut msg = String::new();
            for cause in e.chain() {
                let s = cause.to_string();
                if !msg.contains(&s) {
                    if !msg.is_empty() {
                        msg.push_str(": ");
                    }
                    msg.push_str(&s);
                }
            }
            let _ = writeln!(err, "error: {msg}");
            if let Some(Error::BudgetExceeded { .. }) = e.downcast_ref::<Error>() {
                let _ = writeln!(err, "not desk-verifiable within the state budget");
            }
            code
        }
    }
}

pub fn cmd_synth(args: &SynthArgs, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<i32> {
    let pf = io::read_project_file(&args.project)?;
    let params = pf.params.overridden_by(&args.mcl.overrides()).resolve()?;
    let project = pf.load()?;
    let result = run_algorithm1(&project, &params)?;
    let dir = args
        .out
        .clone()
        .or_else(|| pf.output.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let written = io::write_outputs(&dir, &result, &project.registry)?;
    out.write_all(io::render_report(&result).as_bytes())?;
    for p in &written {
        writeln!(out, "wrote {}", p.display())?;
    }
    for (phase, d) in &result.report.timings {
        writeln!(err, "time {phase}: {:.3} ms", d.as_secs_f64() * 1e3)?;
    }
    if args.verify {
        let sups: Vec<&Automaton> = result.supervisors.iter().map(|s| &s.automaton).collect();
        let cos: Vec<&Automaton> = result.coordinators.iter().map(|s| &s.automaton).collect();
        let v = monolithic_nonblocking(&sups, &cos, args.budget)?;
        if v.holds {
            writeln!(out, "verify: nonblocking ({} states)", v.explored_states)?;
        } else {
            let trace = project.registry.format_trace(v.witness.as_deref().unwrap_or_default());
            writeln!(out, "verify: BLOCKING after {trace}")?;
            return Ok(EXIT_PROPERTY_FAILS);
        }
    }
    Ok(EXIT_OK)
}

fn format_block(block: &[usize], names: &[String]) -> String {
    let members: Vec<String> = block
        .iter()
        .map(|&i| names.get(i).cloned().unwrap_or_else(|| i.to_string()))
        .collect();
    format!("{{{}}}", members.join(", "))
}

/// Column-normalizes the matrix read from `path`, so both stochastic and raw
/// dependency matrices are accepted.
pub fn load_stochastic(path: &Path) -> anyhow::Result<StochasticMatrix> {
    let m = io::load_matrix(path)?;
    Ok(StochasticMatrix::from_weights(m)?)
}

pub fn cluster_once(m: &StochasticMatrix, params: &MclParams) -> anyhow::Result<(Partition, usize)> {
    let (conv, rounds) = mcl_iterate_counted(m, params)?;
    Ok((extract_clusters(&conv, params.prune), rounds))
}

pub fn cmd_cluster(args: &ClusterArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let m = load_stochastic(&args.matrix)?;
    if !args.names.is_empty() && args.names.len() != m.size() {
        return Err(anyhow!(Error::Validation(format!(
            "{} names given for a {}x{} matrix",
            args.names.len(),
            m.size(),
            m.size()
        ))));
    }
    let base = ParamOverrides {
        beta: Some(args.mcl.beta.unwrap_or(2.0)),
        ..Default::default()
    }
    .overridden_by(&args.mcl.overrides());
    if !args.sweep.is_empty() {
        writeln!(out, "beta clusters")?;
        for &beta in &args.sweep {
            let params = base
                .overridden_by(&ParamOverrides {
                    beta: Some(beta),
                    ..Default::default()
                })
                .resolve()?;
            let (p, _) = cluster_once(&m, &params)?;
            writeln!(out, "{beta} {}", p.len())?;
        }
        return Ok(EXIT_OK);
    }
    if args.mcl.beta.is_none() {
        return Err(anyhow!(Error::Validation("--beta or --sweep is required".into())));
    }
    let params = base.resolve()?;
    let (p, rounds) = cluster_once(&m, &params)?;
    writeln!(out, "beta {} alpha {} rounds {rounds}", params.beta, params.alpha)?;
    writeln!(out, "clusters {}", p.len())?;
    for block in p.blocks() {
        writeln!(out, "{}", format_block(block, &args.names))?;
    }
    Ok(EXIT_OK)
}

fn load_all(files: &[PathBuf], events: Option<&Path>) -> anyhow::Result<(EventRegistry, Vec<Automaton>)> {
    let mut reg = EventRegistry::new();
    if let Some(e) = events {
        io::load_registry(e, &mut reg)?;
    }
    let automata = files
        .iter()
        .map(|f| io::load_automaton(f, &mut reg).with_context(|| format!("loading {}", f.display())))
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok((reg, automata))
}

pub fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let (reg, automata) = load_all(&args.files, args.events.as_deref())?;
    let refs: Vec<&Automaton> = automata.iter().collect();
    let start = Instant::now();
    let v = monolithic_nonblocking(&refs, &[], args.budget)?;
    let names: Vec<&str> = automata.iter().map(Automaton::name).collect();
    if v.holds {
        writeln!(
            out,
            "nonblocking: {} ({} states, {:.1} ms)",
            names.join(" || "),
            v.explored_states,
            start.elapsed().as_secs_f64() * 1e3
        )?;
        Ok(EXIT_OK)
    } else {
        let trace = reg.format_trace(v.witness.as_deref().unwrap_or_default());
        writeln!(out, "BLOCKING: {}", names.join(" || "))?;
        writeln!(out, "trace: {trace}")?;
        Ok(EXIT_PROPERTY_FAILS)
    }
}

pub fn cmd_observer(args: &ObserverArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let (reg, automata) = load_all(std::slice::from_ref(&args.file), args.events.as_deref())?;
    let a = &automata[0];
    let observable = args
        .observable
        .iter()
        .filter(|n| !n.is_empty())
        .map(|n| {
            reg.lookup(n).filter(|e| a.alphabet().contains(*e)).ok_or_else(|| {
                anyhow!(Error::Validation(format!(
                    "event {n} is not in the alphabet of {}",
                    a.name()
                )))
            })
        })
        .collect::<anyhow::Result<Alphabet>>()?;
    let verdict = is_natural_observer(a, &observable)?;
    let shown = reg.format_alphabet(&observable);
    let code = match &verdict.witness {
        None => {
            writeln!(out, "observer: yes for {shown}")?;
            EXIT_OK
        }
        Some(w) => {
            writeln!(out, "observer: no for {shown}")?;
            writeln!(out, "prefix: {}", reg.format_trace(&w.prefix))?;
            writeln!(out, "same projection: {}", reg.format_trace(&w.other_prefix))?;
            writeln!(out, "unrealizable continuation: {}", reg.format_trace(&w.continuation))?;
            EXIT_PROPERTY_FAILS
        }
    };
    if args.extend {
        let ext = extend_to_observer(a, &observable)?;
        writeln!(out, "extension: {}", reg.format_alphabet(&ext))?;
    }
    Ok(code)
}
