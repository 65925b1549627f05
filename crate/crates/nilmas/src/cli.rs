//! Command-line interface.
//!
//! Exit codes: 0 on success, 2 when the instance is infeasible (protected
//! edges form a cycle, or the given budgets cannot reach acyclicity), 1 on
//! any input or usage error. Diagnostics go to stderr; documents go to
//! `--output` or stdout.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nilmas_core::harness::{Family, GenSpec};
use nilmas_core::oracle::{exact_mas, exact_max_mas, exact_min_rho};
use nilmas_core::solver::{
    approx_mas, approx_mas_constrained, solve_max_mas, solve_protected, solve_weighted,
    solve_with_spec, ProtectedOutcome, SolveConfig,
};
use nilmas_core::{BudgetSpec, GenError, IndexSet, OracleError, SolverError};
use thiserror::Error;

use crate::bench::{run_table, Cell, THREADS_ENV};
use crate::document::{validate, ProblemKind, ResultDocument, ValidationError};
use crate::edgelist::{
    parse_budgets, parse_edge_list, parse_untouchable, write_edge_list, ParseError, ParsedGraph,
};

#[derive(Debug, Parser)]
#[command(name = "nilmas", version, about = "Acyclic subgraphs under per-vertex edge-cut budgets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Re-check relaxation invariants at every step (slow).
    #[arg(long, global = true)]
    pub debug_asserts: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Edge-list file.
    #[arg(long)]
    pub input: PathBuf,
    /// Vertex indices in input files start at 1.
    #[arg(long)]
    pub one_based: bool,
}

#[derive(Debug, Args)]
pub struct BudgetArgs {
    /// Uniform budget, or the default for vertices missing from --budgets.
    #[arg(long, required_unless_present = "budgets")]
    pub budget: Option<usize>,
    /// File of `vertex budget` lines.
    #[arg(long)]
    pub budgets: Option<PathBuf>,
    /// Edge list of edges that may not be cut.
    #[arg(long)]
    pub untouchable: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Smallest uniform per-vertex cut budget that makes the graph acyclic.
    Maxmas {
        #[command(flatten)]
        input: InputArgs,
        /// Treat the third column as edge weights and bound the cut weight.
        #[arg(long, conflicts_with = "untouchable")]
        weights: bool,
        /// Edge list of edges that may not be cut.
        #[arg(long)]
        untouchable: Option<PathBuf>,
    },
    /// Minimum spectral radius reachable under the given budgets.
    Minrho {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        budgets: BudgetArgs,
    },
    /// Max-MAS witness extended by every edge that is forward in its order.
    ApproxMas {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        untouchable: Option<PathBuf>,
    },
    /// Exhaustive solvers for small graphs.
    Oracle {
        #[command(subcommand)]
        which: OracleCommand,
    },
    /// Write a seeded random graph as an edge list.
    Gen {
        #[command(subcommand)]
        family: GenCommand,
    },
    /// Run experiment cells (cartesian product of the listed parameters).
    Bench(BenchArgs),
    /// Re-check a result document, optionally against its input graph.
    Validate {
        /// JSON result document.
        #[arg(long)]
        input: PathBuf,
        /// Input graph the document was computed from.
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        one_based: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum OracleCommand {
    /// Maximum acyclic subgraph.
    Mas {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Max-MAS by enumerating vertex orders.
    Maxmas {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Minimum spectral radius by enumerating cut choices.
    Minrho {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        budgets: BudgetArgs,
    },
}

#[derive(Debug, Subcommand)]
pub enum GenCommand {
    Uniform {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p_edge: f64,
        #[arg(long)]
        allow_loops: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    Smallworld {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BenchFamily {
    Uniform,
    Smallworld,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub family: BenchFamily,
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    /// Edge probabilities (uniform family).
    #[arg(long, value_delimiter = ',', default_value = "0.3")]
    pub p_edge: Vec<f64>,
    /// Ring degrees (small-world family).
    #[arg(long, value_delimiter = ',', default_value = "5")]
    pub k: Vec<usize>,
    /// Rewiring probabilities (small-world family).
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    pub p: Vec<f64>,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, env = THREADS_ENV)]
    pub threads: Option<usize>,
    /// Emit one CSV row per instance instead of per-cell means.
    #[arg(long)]
    pub rows: bool,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// What a successful run established.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Done,
    Infeasible,
}

pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Infeasible) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_graph(args: &InputArgs) -> Result<ParsedGraph, CliError> {
    parse_edge_list(&read(&args.input)?, args.one_based).map_err(|source| CliError::Parse {
        path: args.input.clone(),
        source,
    })
}

fn load_untouchable(
    path: &Option<PathBuf>,
    n: usize,
    one_based: bool,
) -> Result<Option<Vec<IndexSet>>, CliError> {
    let Some(path) = path else { return Ok(None) };
    parse_untouchable(&read(path)?, n, one_based)
        .map(Some)
        .map_err(|source| CliError::Parse {
            path: path.clone(),
            source,
        })
}

fn load_budgets(args: &BudgetArgs, n: usize, one_based: bool) -> Result<Vec<usize>, CliError> {
    let default = args.budget.unwrap_or(0);
    match &args.budgets {
        Some(path) => parse_budgets(&read(path)?, n, default, one_based).map_err(|source| {
            CliError::Parse {
                path: path.clone(),
                source,
            }
        }),
        None => Ok(vec![default; n]),
    }
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

impl Cli {
    fn solve_config(&self) -> SolveConfig {
        let mut cfg = SolveConfig::default();
        cfg.greedy.debug_asserts = self.debug_asserts;
        cfg
    }

    fn write_bytes(&self, bytes: &[u8]) -> Result<(), CliError> {
        match &self.output {
            Some(path) => fs::write(path, bytes).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            }),
            None => io::stdout().write_all(bytes).map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
        }
    }

    fn emit(&self, doc: &ResultDocument) -> Result<(), CliError> {
        match self.format {
            Format::Json => {
                let mut text = doc.to_json();
                text.push('\n');
                self.write_bytes(text.as_bytes())
            }
            Format::Csv => {
                let mut buf = Vec::new();
                doc.write_csv(&mut buf)?;
                self.write_bytes(&buf)
            }
        }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let cfg = cli.solve_config();
    match &cli.command {
        Command::Maxmas {
            input,
            weights,
            untouchable,
        } => {
            let graph = load_graph(input)?;
            let a = graph.pattern();
            if *weights {
                let start = Instant::now();
                let sol = solve_weighted(&graph.weights(), &cfg)?;
                cli.emit(&ResultDocument::weighted(&a, &sol, elapsed_ms(start)))?;
                return Ok(Outcome::Done);
            }
            if matches!(graph, ParsedGraph::Weighted(_)) {
                eprintln!("note: ignoring edge weights; pass --weights to use them");
            }
            let protected = load_untouchable(untouchable, a.n(), input.one_based)?;
            let start = Instant::now();
            match protected {
                Some(protected) => match solve_protected(&a, &protected, &cfg)? {
                    ProtectedOutcome::Solved(sol) => {
                        let doc = ResultDocument::max_mas(&a, &sol, elapsed_ms(start))
                            .with_protected(&protected);
                        cli.emit(&doc)?;
                        Ok(Outcome::Done)
                    }
                    ProtectedOutcome::ProtectedCycle => {
                        eprintln!("infeasible: the protected edges contain a cycle");
                        Ok(Outcome::Infeasible)
                    }
                },
                None => {
                    let sol = solve_max_mas(&a, &cfg)?;
                    cli.emit(&ResultDocument::max_mas(&a, &sol, elapsed_ms(start)))?;
                    Ok(Outcome::Done)
                }
            }
        }
        Command::Minrho { input, budgets } => {
            let a = load_graph(input)?.pattern();
            let per_vertex = load_budgets(budgets, a.n(), input.one_based)?;
            let protected = load_untouchable(&budgets.untouchable, a.n(), input.one_based)?;
            let start = Instant::now();
            let mut spec = BudgetSpec::per_vertex(per_vertex.clone());
            if let Some(protected) = protected {
                spec = spec.with_untouchable(protected);
            }
            let out = solve_with_spec(&a, &spec, &cfg)?;
            let doc = ResultDocument::min_rho(&a, &per_vertex, &out, elapsed_ms(start));
            cli.emit(&doc)?;
            Ok(if out.feasible { Outcome::Done } else { Outcome::Infeasible })
        }
        Command::ApproxMas { input, untouchable } => {
            let a = load_graph(input)?.pattern();
            let protected = load_untouchable(untouchable, a.n(), input.one_based)?;
            let start = Instant::now();
            let doc = match protected {
                None => {
                    let sol = solve_max_mas(&a, &cfg)?;
                    let approx = approx_mas(&a, &sol.witness)?;
                    ResultDocument::approx(&a, &sol, &approx, elapsed_ms(start))
                }
                Some(protected) => match solve_protected(&a, &protected, &cfg)? {
                    ProtectedOutcome::Solved(sol) => {
                        let spec = BudgetSpec::uniform(a.n(), sol.r_star)
                            .with_untouchable(protected.clone());
                        let approx = approx_mas_constrained(&a, &sol.witness, &spec)?;
                        ResultDocument::approx(&a, &sol, &approx, elapsed_ms(start))
                            .with_protected(&protected)
                    }
                    ProtectedOutcome::ProtectedCycle => {
                        eprintln!("infeasible: the protected edges contain a cycle");
                        return Ok(Outcome::Infeasible);
                    }
                },
            };
            cli.emit(&doc)?;
            Ok(Outcome::Done)
        }
        Command::Oracle { which } => run_oracle(cli, which),
        Command::Gen { family } => {
            let spec = match *family {
                GenCommand::Uniform {
                    n,
                    p_edge,
                    allow_loops,
                    seed,
                } => GenSpec {
                    family: Family::Uniform {
                        p_edge,
                        allow_loops,
                    },
                    n,
                    seed,
                },
                GenCommand::Smallworld { n, k, p, seed } => GenSpec::small_world(n, k, p, seed),
            };
            let a = spec.generate()?;
            cli.write_bytes(write_edge_list(&a).as_bytes())?;
            Ok(Outcome::Done)
        }
        Command::Bench(args) => {
            let cells = bench_cells(args);
            let report = run_table(&cells, &cfg, args.threads);
            for row in report.rows.iter().filter(|r| r.error.is_some()) {
                eprintln!(
                    "cell {} seed {} failed: {}",
                    row.cell,
                    row.seed,
                    row.error.as_deref().unwrap_or_default()
                );
            }
            let mut buf = Vec::new();
            match (cli.format, args.rows) {
                (Format::Json, _) => {
                    buf = report.to_json().into_bytes();
                    buf.push(b'\n');
                }
                (Format::Csv, true) => report.write_rows_csv(&mut buf)?,
                (Format::Csv, false) => report.write_cells_csv(&mut buf)?,
            }
            cli.write_bytes(&buf)?;
            Ok(Outcome::Done)
        }
        Command::Validate {
            input,
            graph,
            one_based,
        } => {
            let doc = ResultDocument::from_json(&read(input)?)?;
            let a = match graph {
                Some(path) => Some(
                    parse_edge_list(&read(path)?, *one_based)
                        .map_err(|source| CliError::Parse {
                            path: path.clone(),
                            source,
                        })?
                        .pattern(),
                ),
                None => None,
            };
            validate(&doc, a.as_ref())?;
            eprintln!("ok: {} document for n = {} is valid", doc.problem.as_str(), doc.n);
            Ok(Outcome::Done)
        }
    }
}

fn run_oracle(cli: &Cli, which: &OracleCommand) -> Result<Outcome, CliError> {
    match which {
        OracleCommand::Mas { input } | OracleCommand::Maxmas { input } => {
            let a = load_graph(input)?.pattern();
            let start = Instant::now();
            let (kind, order) = match which {
                OracleCommand::Mas { .. } => (ProblemKind::OracleMas, exact_mas(&a)?.witness),
                _ => (ProblemKind::OracleMaxMas, exact_max_mas(&a)?.witness),
            };
            if a.self_loop_count() > 0 {
                eprintln!("note: {} self-loops are never kept", a.self_loop_count());
            }
            cli.emit(&ResultDocument::oracle_ordering(kind, &a, &order, elapsed_ms(start)))?;
            Ok(Outcome::Done)
        }
        OracleCommand::Minrho { input, budgets } => {
            let a = load_graph(input)?.pattern();
            let per_vertex = load_budgets(budgets, a.n(), input.one_based)?;
            let mut spec = BudgetSpec::per_vertex(per_vertex.clone());
            if let Some(protected) = load_untouchable(&budgets.untouchable, a.n(), input.one_based)? {
                spec = spec.with_untouchable(protected);
            }
            let start = Instant::now();
            let res = exact_min_rho(&a, &spec, &SolveConfig::default().greedy.eigen)?;
            let doc =
                ResultDocument::oracle_min_rho(&a, &per_vertex, res.optimum, &res.witness, elapsed_ms(start));
            let feasible = doc.feasible == Some(true);
            cli.emit(&doc)?;
            Ok(if feasible { Outcome::Done } else { Outcome::Infeasible })
        }
    }
}

fn bench_cells(args: &BenchArgs) -> Vec<Cell> {
    let mut cells = Vec::new();
    for &n in &args.n {
        match args.family {
            BenchFamily::Uniform => {
                for &p_edge in &args.p_edge {
                    cells.push(Cell {
                        template: GenSpec::uniform(n, p_edge, args.seed),
                        trials: args.trials,
                    });
                }
            }
            BenchFamily::Smallworld => {
                for &k in &args.k {
                    for &p in &args.p {
                        cells.push(Cell {
                            template: GenSpec::small_world(n, k, p, args.seed),
                            trials: args.trials,
                        });
                    }
                }
            }
        }
    }
    cells
}
