use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use agorad::classify::{self, AnalyzeOptions, Decision, McspClass};
use agorad::domain::{parse_domain, Domain, Limits};
use agorad::error::Error;
use agorad::mcsp::{self, SolveResult};
use agorad::search::{self, SearchBudget, SearchStatus, WitnessKind};
use agorad::{algebra, blockedness, fixtures};

const EXIT_UNKNOWN: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_CAPACITY: u8 = 3;

#[derive(Parser)]
#[command(name = "agorad", version, about = "Aggregation and possibility-domain analysis")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Node budget per search.
    #[arg(long, global = true, default_value_t = 10_000_000)]
    budget_nodes: u64,
    /// Time budget per search, in milliseconds.
    #[arg(long, global = true, env = "AGORAD_BUDGET_MS", default_value_t = 30_000)]
    budget_ms: u64,
    /// Worker threads (output does not depend on it).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Lift the desk-scale limits on issues, alphabet sizes and |X|.
    #[arg(long, global = true)]
    allow_large: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Full analysis report.
    Analyze {
        /// Domain file, or `-` for stdin.
        file: String,
        /// Attach the blockedness graph in DOT.
        #[arg(long)]
        dot: bool,
        /// Attach witness tables.
        #[arg(long)]
        witnesses: bool,
        /// Cross-check decisions by a second route.
        #[arg(long)]
        validate: bool,
    },
    /// Search for one aggregator of the given kind.
    Witness {
        file: String,
        #[arg(long, value_enum)]
        kind: Kind,
        /// Issue for `--kind component` (1-based).
        #[arg(long)]
        issue: Option<usize>,
        /// Two values of X_j for `--kind component`, as `u,u'`.
        #[arg(long)]
        pair: Option<String>,
        /// Binary kind: backtrack over tables instead of using the graph.
        #[arg(long)]
        direct: bool,
    },
    /// The blockedness graph.
    Graph {
        file: String,
        #[arg(long, value_enum, default_value_t = Format::Dot)]
        format: Format,
    },
    /// Uniform possibility and the MCSP complexity label.
    Classify { file: String },
    /// Solve an MCSP instance file.
    Solve { file: String },
    /// Print a built-in domain, or list them.
    Fixtures { name: Option<String> },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Binary,
    Majority,
    Minority,
    Uniform,
    Component,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Dot,
}

fn read_input(file: &str) -> Result<String, Error> {
    if file == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        Ok(std::fs::read_to_string(file)?)
    }
}

fn load_domain(file: &str, limits: Limits) -> Result<Domain, Error> {
    let domain = parse_domain(&read_input(file)?)?.with_limits(limits);
    let report = domain.validate();
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    domain.ensure_analyzable()?;
    Ok(domain)
}

fn parse_pair(domain: &Domain, issue: usize, text: &str) -> Result<(usize, usize), Error> {
    let (a, b) = text
        .split_once(',')
        .ok_or_else(|| Error::InvalidPair(format!("`{text}` is not of the form u,u'")))?;
    let local = |tok: &str| {
        domain.local_of(issue, tok.trim()).ok_or_else(|| {
            Error::InvalidPair(format!("`{}` is not a value of X_{}", tok.trim(), issue + 1))
        })
    };
    let (a, b) = (local(a)?, local(b)?);
    if a == b {
        return Err(Error::InvalidPair(format!("`{text}` names one value twice")));
    }
    Ok((a, b))
}

/// Output plus whether the result was left open.
struct Done {
    stdout: String,
    unknown: bool,
}

fn run(cli: Cli) -> Result<Done, Error> {
    let g = &cli.global;
    let budget = SearchBudget {
        max_nodes: g.budget_nodes,
        max_millis: g.budget_ms,
    };
    let limits = if g.allow_large {
        Limits::unbounded()
    } else {
        Limits::default()
    };
    match cli.command {
        Command::Analyze {
            file,
            dot,
            witnesses,
            validate,
        } => {
            let domain = load_domain(&file, limits)?;
            let started = std::time::Instant::now();
            let report = classify::analyze(
                &domain,
                AnalyzeOptions {
                    budget,
                    validate,
                    dot,
                    witnesses,
                },
            )?;
            eprintln!("analysis took {} ms", started.elapsed().as_millis());
            Ok(Done {
                unknown: report.has_unknown(),
                stdout: report.to_text(),
            })
        }
        Command::Witness {
            file,
            kind,
            issue,
            pair,
            direct,
        } => {
            let domain = load_domain(&file, limits)?;
            let outcome = match kind {
                Kind::Binary => search::find_binary_nondictatorial(&domain, direct, budget)?,
                Kind::Majority => search::find_majority(&domain, budget)?,
                Kind::Minority => search::find_minority(&domain, budget)?,
                Kind::Uniform => search::find_uniform(&domain, budget)?,
                Kind::Component => {
                    let (Some(issue), Some(pair)) = (issue, pair) else {
                        return Err(Error::InvalidPair(
                            "--kind component needs --issue and --pair".into(),
                        ));
                    };
                    if issue == 0 || issue > domain.issue_count() {
                        return Err(Error::IssueOutOfRange {
                            index: issue,
                            issues: domain.issue_count(),
                        });
                    }
                    let pair = parse_pair(&domain, issue - 1, &pair)?;
                    search::find_component_nonprojection(&domain, issue - 1, pair, budget)?
                }
            };
            if let Some(op) = outcome.pinned {
                eprintln!("pinned restriction: {}", op.class());
            }
            eprintln!(
                "{} {}: {} nodes, {} prunes",
                WitnessKind::from(kind),
                outcome.status,
                outcome.stats.nodes,
                outcome.stats.prunes
            );
            let stdout = match (&outcome.status, &outcome.witness) {
                (SearchStatus::Found, Some(w)) => algebra::serialize_witness(&domain, w),
                (SearchStatus::BudgetExceeded, _) => "UNKNOWN\n".into(),
                _ => "NONE\n".into(),
            };
            Ok(Done {
                unknown: outcome.status == SearchStatus::BudgetExceeded,
                stdout,
            })
        }
        Command::Graph { file, format } => {
            let domain = load_domain(&file, limits)?;
            let graph = blockedness::build_graph(&domain)?;
            Ok(Done {
                stdout: match format {
                    Format::Dot => graph.to_dot(&domain),
                    Format::Text => graph.to_text(&domain),
                },
                unknown: false,
            })
        }
        Command::Classify { file } => {
            let domain = load_domain(&file, limits)?;
            let upd = classify::is_upd(&domain, budget, false)?;
            let label = classify::mcsp_class(upd.decision);
            Ok(Done {
                stdout: format!("upd = {}\nmcsp = {}\n", upd.decision, label),
                unknown: upd.decision == Decision::Unknown || label == McspClass::Unknown,
            })
        }
        Command::Solve { file } => {
            let text = read_input(&file)?;
            let base: PathBuf = if file == "-" {
                PathBuf::from(".")
            } else {
                Path::new(&file).parent().map(Path::to_path_buf).unwrap_or_default()
            };
            let inst = mcsp::parse_instance(&text, |p| {
                let path = base.join(p);
                let domain = parse_domain(&std::fs::read_to_string(&path)?)?.with_limits(limits);
                domain.ensure_analyzable()?;
                Ok(domain)
            })?;
            let result = mcsp::solve(&inst, budget);
            Ok(Done {
                unknown: result == SolveResult::Unknown,
                stdout: inst.format_result(&result),
            })
        }
        Command::Fixtures { name } => {
            let stdout = match name {
                Some(n) => fixtures::by_name(&n)?.serialize(),
                None => {
                    let mut s: String = fixtures::NAMES.iter().map(|n| format!("{n}\n")).collect();
                    s.push_str("full-boolean-<m>\n");
                    s
                }
            };
            Ok(Done {
                stdout,
                unknown: false,
            })
        }
    }
}

impl From<Kind> for WitnessKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Binary => WitnessKind::Binary,
            Kind::Majority => WitnessKind::Majority,
            Kind::Minority => WitnessKind::Minority,
            Kind::Uniform => WitnessKind::Uniform,
            Kind::Component => WitnessKind::Component,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.global.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    }
    match run(cli) {
        Ok(done) => {
            print!("{}", done.stdout);
            if done.unknown {
                ExitCode::from(EXIT_UNKNOWN)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_capacity() {
                ExitCode::from(EXIT_CAPACITY)
            } else {
                ExitCode::from(EXIT_INPUT)
            }
        }
    }
}
