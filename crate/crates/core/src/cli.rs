//! The `feta` command line.
//!
//! Exit status: 0 when the checked property holds, 1 when a violation was
//! found, 2 on unreadable or ill-formed input and exhausted resource
//! bounds.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::dsl::{self, Diagnostic, ElaborateOptions, Spec};
use crate::featured::{
    check_compliance_unfolding, check_family_receptiveness, check_requirement_correspondence, symbolic_reachability,
    Family,
};
use crate::logic::{Backend, Product};
use crate::receptiveness::{derive_reqs, receptiveness_verdict, Mode};
use crate::report::{self, CheckOutcome, Names, Report, VerificationReport};
use crate::system::Limits;
use crate::team::{build_eta, build_feta, check_projection_commutes, prune_presentation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Debug, Parser)]
#[command(name = "feta", version, about = "Analyse featured team automata specifications")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Satisfiability backend: auto, enumerative, sat or cross-check.
    /// Defaults to the `FETA_BACKEND` environment variable.
    #[arg(long, global = true)]
    pub backend: Option<Backend>,
    /// Largest composite state space to build.
    #[arg(long, global = true)]
    pub max_states: Option<usize>,
    /// Largest number of components enabled for one action in one state.
    #[arg(long, global = true)]
    pub max_participants: Option<usize>,
    /// Largest number of valid products to analyse.
    #[arg(long, global = true)]
    pub max_products: Option<usize>,
    /// Treat overlapping synchronisation rules as errors.
    #[arg(long, global = true)]
    pub strict_rules: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Input {
    /// Specification file (`.feta`).
    pub file: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the valid products of the feature model.
    Products(Input),
    /// Statistics of the composed system.
    Compose(Input),
    /// Build the featured team automaton; `--format dot` draws it.
    Feta {
        #[command(flatten)]
        input: Input,
        /// Draw every state and transition instead of the reachable,
        /// realisable core.
        #[arg(long)]
        full: bool,
        /// Show constraints as built instead of simplified.
        #[arg(long)]
        raw: bool,
        /// Attach the featured requirements to the drawing.
        #[arg(long)]
        annotate: bool,
    },
    /// Project the featured team onto one product and check it against the
    /// product team.
    Project {
        #[command(flatten)]
        input: Input,
        /// Product, e.g. `lock` or `{a,b}`.
        #[arg(short, long)]
        product: String,
    },
    /// List receptiveness requirements per state.
    Reqs {
        #[command(flatten)]
        input: Input,
        /// List the requirements of one product team instead.
        #[arg(short, long)]
        product: Option<String>,
        /// Show the three factors of each condition.
        #[arg(long)]
        factors: bool,
        /// Show conditions as built instead of simplified.
        #[arg(long)]
        raw: bool,
    },
    /// Decide (weak) receptiveness of the family or of one product.
    Check {
        #[command(flatten)]
        input: Input,
        /// Require every communication to be received immediately.
        #[arg(long, conflicts_with = "weak")]
        strict: bool,
        /// Allow other components to act before the reception (the default).
        #[arg(long)]
        weak: bool,
        /// Check one product team instead of the family.
        #[arg(short, long)]
        product: Option<String>,
    },
    /// Run the family/product cross-checks.
    Verify(Input),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Products(_) => "products",
            Command::Compose(_) => "compose",
            Command::Feta { .. } => "feta",
            Command::Project { .. } => "project",
            Command::Reqs { .. } => "reqs",
            Command::Check { .. } => "check",
            Command::Verify(_) => "verify",
        }
    }

    fn file(&self) -> &Path {
        match self {
            Command::Products(i) | Command::Compose(i) | Command::Verify(i) => &i.file,
            Command::Feta { input, .. }
            | Command::Project { input, .. }
            | Command::Reqs { input, .. }
            | Command::Check { input, .. } => &input.file,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{} error(s) in the specification", .0.iter().filter(|d| d.is_fatal()).count())]
    Spec(Vec<Diagnostic>),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Analysis(String),
}

fn analysis(e: impl std::fmt::Display) -> CliError {
    CliError::Analysis(e.to_string())
}

/// Output of one command: the report and, for `--format dot`, a drawing.
struct Outcome {
    report: Report,
    dot: Option<String>,
}

/// Parses `args` (including the program name) and runs the command,
/// returning the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                2
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    run_cli(&cli, out, err)
}

pub fn run_cli(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match execute(cli) {
        Ok(Outcome { report, dot }) => {
            for d in &report.diagnostics {
                let _ = writeln!(err, "{}: {d}", cli.command.file().display());
            }
            let text = match (cli.format, dot) {
                (Format::Json, _) => report.to_json() + "\n",
                (Format::Dot, Some(dot)) => dot,
                _ => report::render_text(&report),
            };
            let _ = out.write_all(text.as_bytes());
            if report.holds {
                0
            } else {
                1
            }
        }
        Err(e) => {
            if let CliError::Spec(diags) = &e {
                for d in diags {
                    let _ = writeln!(err, "{}: {d}", cli.command.file().display());
                }
                if cli.format == Format::Json {
                    let mut r = Report::new(cli.command.name(), None, diags.clone());
                    r.holds = false;
                    let _ = writeln!(out, "{}", r.to_json());
                }
            }
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn limits(cli: &Cli) -> Limits {
    let d = Limits::default();
    Limits {
        max_states: cli.max_states.unwrap_or(d.max_states),
        max_participants: cli.max_participants.unwrap_or(d.max_participants),
        max_products: cli.max_products.unwrap_or(d.max_products),
    }
}

fn load(cli: &Cli) -> Result<Spec, CliError> {
    let path = cli.command.file();
    let text =
        std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    let doc = dsl::parse(&text).map_err(CliError::Spec)?;
    let options = ElaborateOptions { backend: backend(cli)?, limits: limits(cli), strict: cli.strict_rules };
    dsl::elaborate(&doc, &options).map_err(CliError::Spec)
}

pub const BACKEND_VAR: &str = "FETA_BACKEND";

/// The `--backend` flag, else the environment, else cross-checking for
/// `verify` and [`Backend::Auto`] for everything else.
fn backend(cli: &Cli) -> Result<Backend, CliError> {
    if let Some(b) = cli.backend {
        return Ok(b);
    }
    match std::env::var(BACKEND_VAR) {
        Ok(v) if !v.is_empty() => v.parse().map_err(|e| CliError::Usage(format!("{BACKEND_VAR}: {e}"))),
        _ => Ok(match cli.command {
            Command::Verify(_) => Backend::CrossCheck,
            _ => Backend::Auto,
        }),
    }
}

/// Reads a product such as `lock`, `{lock,unlock}` or `{}` and checks that
/// it is valid.
pub fn parse_product(spec: &Spec, text: &str) -> Result<Product, CliError> {
    let inner = text.trim();
    let inner = inner.strip_prefix('{').and_then(|s| s.strip_suffix('}')).unwrap_or(inner);
    let names: Vec<&str> = inner.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    let p = spec.universe().product(names).map_err(|e| CliError::Usage(format!("product `{text}`: {e}")))?;
    if !spec.products.contains(&p) {
        return Err(CliError::Usage(format!(
            "product {} does not satisfy the feature model",
            spec.universe().display_product(p)
        )));
    }
    Ok(p)
}

fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let spec = load(cli)?;
    let limits = limits(cli);
    let names = Names {
        sys: &spec.system,
        universe: spec.universe(),
        products: &spec.products,
        fm: spec.feature_model().expr(),
    };
    let mut report = Report::new(cli.command.name(), Some(spec.name.clone()), spec.warnings.clone());
    let mut dot = None;
    match &cli.command {
        Command::Products(_) => {
            report.products = Some(spec.products.iter().map(|&p| names.product(p)).collect());
        }
        Command::Compose(_) => {
            let comp = spec.system.compose(&limits).map_err(analysis)?;
            report.stats = Some(report::stats(&spec, None, comp.lts.num_states(), comp.lts.edges().len()));
        }
        Command::Feta { full, raw, annotate, .. } => {
            let feta = build_feta(&spec.system, &spec.sync, &spec.products, &limits).map_err(analysis)?;
            let view = prune_presentation(&feta, &spec.logic);
            let lts = feta.lts();
            report.stats = Some(report::stats(&spec, Some((&feta, &view)), lts.num_states(), lts.edges().len()));
            if cli.format == Format::Dot {
                let notes = if *annotate {
                    Family::new(&spec.system, &spec.sync, &feta, &spec.logic, &spec.products, &limits)
                        .and_then(|f| f.derive_freqs())
                        .map_err(analysis)?
                } else {
                    Vec::new()
                };
                let (states, edges) = if *full {
                    ((0..lts.num_states()).collect(), (0..lts.edges().len()).collect())
                } else {
                    (view.states.clone(), view.edges.clone())
                };
                dot = Some(report::feta_dot(&names, &feta, &states, &edges, *raw, &notes));
            }
        }
        Command::Project { product, .. } => {
            let p = parse_product(&spec, product)?;
            let c =
                check_projection_commutes(&spec.system, &spec.sync, &spec.products, p, &limits).map_err(analysis)?;
            let feta = build_feta(&spec.system, &spec.sync, &spec.products, &limits).map_err(analysis)?;
            let projected = feta.project(p).map_err(analysis)?;
            report.holds = c.holds();
            report.projection = Some(names.projection(&c, &projected));
            dot = Some(report::eta_dot(&names, &projected));
        }
        Command::Reqs { product: Some(product), .. } => {
            let p = parse_product(&spec, product)?;
            let sys = spec.system.project(p).map_err(analysis)?;
            let st = spec.sync.project(p).map_err(analysis)?;
            let eta = build_eta(&sys, &st, &limits).map_err(analysis)?;
            let reqs = derive_reqs(&eta, &st, &sys, &limits).map_err(analysis)?;
            let mut entries: Vec<_> =
                reqs.into_iter().map(|r| names.req_key(&(eta.state(r.state).clone(), r.senders, r.action))).collect();
            entries.sort_by(|a, b| a.state.cmp(&b.state));
            report.requirements = Some(entries);
        }
        Command::Reqs { product: None, factors, raw, .. } => {
            let feta = build_feta(&spec.system, &spec.sync, &spec.products, &limits).map_err(analysis)?;
            let family =
                Family::new(&spec.system, &spec.sync, &feta, &spec.logic, &spec.products, &limits).map_err(analysis)?;
            let freqs = family.derive_freqs().map_err(analysis)?;
            let mut entries: Vec<_> = freqs.iter().map(|f| names.freq(feta.lts(), f, *raw, *factors)).collect();
            entries.sort_by(|a, b| a.state.cmp(&b.state));
            report.requirements = Some(entries);
        }
        Command::Check { strict, product, .. } => {
            let mode = if *strict { Mode::Strict } else { Mode::Weak };
            let verdict = match product {
                Some(product) => {
                    let p = parse_product(&spec, product)?;
                    let sys = spec.system.project(p).map_err(analysis)?;
                    let st = spec.sync.project(p).map_err(analysis)?;
                    let eta = build_eta(&sys, &st, &limits).map_err(analysis)?;
                    let v = receptiveness_verdict(&eta, &st, &sys, mode, &limits).map_err(analysis)?;
                    names.product_verdict(&eta, &v, Some(p))
                }
                None => {
                    let feta = build_feta(&spec.system, &spec.sync, &spec.products, &limits).map_err(analysis)?;
                    let family = Family::new(&spec.system, &spec.sync, &feta, &spec.logic, &spec.products, &limits)
                        .map_err(analysis)?;
                    let v = family.verdict(mode).map_err(analysis)?;
                    names.featured_verdict(&feta, &v, false)
                }
            };
            report.holds = verdict.holds;
            report.verdict = Some(verdict);
        }
        Command::Verify(_) => {
            let verification = verify(&spec, &names, &limits)?;
            report.holds = verification.checks.iter().all(|c| c.holds) && verification.backend_mismatches == 0;
            report.verification = Some(verification);
        }
    }
    if cli.format == Format::Dot && dot.is_none() {
        return Err(CliError::Usage(format!(
            "`{}` has no DOT output; use it with `feta` or `project`",
            cli.command.name()
        )));
    }
    Ok(Outcome { report, dot })
}

fn verify(spec: &Spec, names: &Names<'_, crate::model::Fca>, limits: &Limits) -> Result<VerificationReport, CliError> {
    let mut checks = Vec::new();
    for &p in &spec.products {
        let c = check_projection_commutes(&spec.system, &spec.sync, &spec.products, p, limits).map_err(analysis)?;
        checks.push(CheckOutcome {
            name: format!("projection-commutes {}", spec.universe().display_product(p)),
            holds: c.holds(),
            detail: format!(
                "{} transition(s) only in the projected family team, {} only in the product team",
                c.only_in_family.len(),
                c.only_in_product.len()
            ),
        });
    }

    let feta = build_feta(&spec.system, &spec.sync, &spec.products, limits).map_err(analysis)?;
    let family = Family::new(&spec.system, &spec.sync, &feta, &spec.logic, &spec.products, limits).map_err(analysis)?;

    let symbolic = symbolic_reachability(&feta, &spec.logic);
    let differing = (0..feta.lts().num_states())
        .filter(|&q| spec.logic.models(&symbolic[q], spec.products.len() + 1).ok() != Some(family.reach.at(q)))
        .count();
    checks.push(CheckOutcome {
        name: "reachable-products".into(),
        holds: differing == 0,
        detail: format!("{differing} state(s) where the symbolic and per-product reachability differ"),
    });

    let diffs = check_requirement_correspondence(&family).map_err(analysis)?;
    checks.push(CheckOutcome {
        name: "requirement-correspondence".into(),
        holds: diffs.is_empty(),
        detail: if diffs.is_empty() {
            format!("{} product(s) agree", spec.products.len())
        } else {
            diffs.iter().map(|d| names.req_diff(d)).collect::<Vec<_>>().join("; ")
        },
    });

    let freqs = family.derive_freqs().map_err(analysis)?;
    let bad = freqs.iter().filter(|f| !check_compliance_unfolding(&family, f)).count();
    checks.push(CheckOutcome {
        name: "compliance-unfolding".into(),
        holds: bad == 0,
        detail: format!("{} of {} featured requirement(s) disagree", bad, freqs.len()),
    });

    for mode in [Mode::Strict, Mode::Weak] {
        let agreement = check_family_receptiveness(&family, mode).map_err(analysis)?;
        checks.push(names.agreement(&agreement));
    }

    let stats = spec.logic.stats();
    Ok(VerificationReport { checks, queries: stats.queries, backend_mismatches: stats.mismatches })
}
