//! `cr` subcommands. Everything writes through caller-supplied streams so the
//! commands can be driven in-process.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use cr_core::corpus::cases::{published_cases, run_test_cases};
use cr_core::corpus::sweep::{table_6a, table_6b, table_6cd, table_6e, K_VALUES};
use cr_core::corpus::{
    budget_table, builtin_nrc, builtin_scenario, grid, rank_all, rank_ontology, sweep, table2,
    Scenario,
};
use cr_core::engine::Status;
use cr_core::{load_ontology, run_dba, ContextInfo, DiagnosisResult, Error as CoreError, Ontology};

use crate::runlog::{RunLog, RunRecord, INTERACTIVE};
use crate::{ask, render, server};

#[derive(Debug, Parser)]
#[command(
    name = "cr",
    version,
    about = "Contextual reasoning over knowledge-unit ontologies"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct EngineArgs {
    /// Ontology document; the bundled NRC ontology when omitted.
    #[arg(long)]
    pub ontology: Option<PathBuf>,
    /// User context as `m,e,k` (default 0.49,1,1).
    #[arg(long, value_parser = parse_ci)]
    pub ci: Option<(f64, f64, f64)>,
    /// Premise probability gate.
    #[arg(long, env = "CR_DF_THRESHOLD")]
    pub df_threshold: Option<f64>,
}

impl EngineArgs {
    fn context(&self, fallback: Option<(f64, f64, f64)>) -> Result<ContextInfo> {
        let defaults = ContextInfo::default();
        let (m, e, k) = self
            .ci
            .or(fallback)
            .unwrap_or((defaults.m, defaults.e, defaults.k));
        let df = self.df_threshold.unwrap_or(defaults.df_threshold);
        Ok(ContextInfo::with_df_threshold(m, e, k, df)?)
    }

    fn ontology(&self) -> Result<Ontology> {
        load_ontology_arg(self.ontology.as_deref())
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scripted scenario and print the answer.
    Replay {
        #[command(flatten)]
        engine: EngineArgs,
        /// Scenario document with premise probabilities and verdicts.
        #[arg(long, required_unless_present = "case", conflicts_with = "case")]
        scenario: Option<PathBuf>,
        /// Replay a published test case (1-15) with its own context.
        #[arg(long)]
        case: Option<u8>,
        /// Print the reasoning trace before the answer.
        #[arg(long)]
        trace: bool,
    },
    /// Answer the engine's questions at the terminal.
    Ask {
        #[command(flatten)]
        engine: EngineArgs,
        #[arg(long)]
        trace: bool,
    },
    /// Run all fifteen published test cases.
    Cases,
    /// Write a confidence sweep as CSV.
    Sweep {
        /// A published table; otherwise give --m, --e and --k lists.
        #[arg(long, value_enum, required_unless_present_all = ["m", "e", "k"])]
        table: Option<Table>,
        #[arg(long, value_delimiter = ',', conflicts_with = "table")]
        m: Vec<f64>,
        #[arg(long, value_delimiter = ',', conflicts_with = "table")]
        e: Vec<f64>,
        #[arg(long, value_delimiter = ',', conflicts_with = "table")]
        k: Vec<f64>,
        #[arg(long)]
        ontology: Option<PathBuf>,
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank human-context ontologies by feature coverage.
    Rank {
        #[arg(long, conflicts_with = "name")]
        all: bool,
        #[arg(required_unless_present = "all")]
        name: Option<String>,
    },
    /// Check an ontology document.
    Validate {
        #[arg(long)]
        ontology: Option<PathBuf>,
    },
    /// Serve the HTTP/JSON session protocol.
    Serve {
        #[arg(long)]
        ontology: Option<PathBuf>,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Seconds before an untouched session is dropped.
        #[arg(long, default_value_t = server::DEFAULT_IDLE_TIMEOUT.as_secs())]
        idle_timeout: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Table {
    #[value(name = "6a")]
    ThresholdGrid,
    #[value(name = "6b")]
    PriorityVariation,
    #[value(name = "6c")]
    TradeoffLow,
    #[value(name = "6d")]
    TradeoffHigh,
    #[value(name = "6e")]
    Budgets,
}

fn parse_ci(text: &str) -> Result<(f64, f64, f64), String> {
    let parts: Vec<_> = text.split(',').map(str::trim).collect();
    let [m, e, k] = parts[..] else {
        return Err(format!("expected m,e,k, got {text:?}"));
    };
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| format!("{s:?} is not a number"))
    };
    Ok((num(m)?, num(e)?, num(k)?))
}

fn load_ontology_arg(path: Option<&Path>) -> Result<Ontology> {
    match path {
        None => Ok(builtin_nrc()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            load_ontology(&text).with_context(|| format!("loading {}", path.display()))
        }
    }
}

fn load_scenario(path: &Path) -> Result<Scenario> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Scenario::load(&text).with_context(|| format!("loading {}", path.display()))
}

fn exit_code(result: &DiagnosisResult) -> u8 {
    match result.status {
        Status::Identified | Status::NegatedRoot => 0,
        Status::Indeterminate => 2,
    }
}

fn print_result(out: &mut impl Write, result: &DiagnosisResult, trace: bool) -> Result<()> {
    if trace {
        for event in &result.trace {
            writeln!(out, "{}", render::trace_line(event))?;
        }
    }
    writeln!(out, "{}", render::answer_line(result))?;
    Ok(())
}

/// Runs one command and returns the process exit code.
pub fn execute<R: BufRead, W: Write, E: Write>(
    cli: Cli,
    stdin: &mut R,
    stdout: &mut W,
    stderr: &mut E,
) -> u8 {
    match dispatch(cli, stdin, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            1
        }
    }
}

fn dispatch<R: BufRead, W: Write, E: Write>(
    cli: Cli,
    stdin: &mut R,
    out: &mut W,
    err: &mut E,
) -> Result<u8> {
    match cli.command {
        Command::Replay {
            engine,
            scenario,
            case,
            trace,
        } => {
            let ontology = engine.ontology()?;
            let (scenario, fallback) = match (scenario, case) {
                (Some(path), _) => (load_scenario(&path)?, None),
                (None, Some(n)) => {
                    let case = published_cases()
                        .into_iter()
                        .find(|c| c.number == n)
                        .ok_or_else(|| anyhow!("no published test case {n}; expected 1-15"))?;
                    (case.scenario(), Some((case.m, case.e, case.k())))
                }
                (None, None) => bail!("replay needs --scenario or --case"),
            };
            let ci = engine.context(fallback)?;
            scenario.validate_against(&ontology)?;
            let result = run_dba(&ontology, &ci, &mut scenario.oracle())?;
            print_result(out, &result, trace)?;
            Ok(exit_code(&result))
        }
        Command::Ask { engine, trace } => {
            let ontology = engine.ontology()?;
            let ci = engine.context(None)?;
            writeln!(
                out,
                "{}: m={} e={} k={}",
                ci.priority().label(),
                ci.m,
                ci.e,
                ci.k
            )?;
            match ask::ask(&ontology, ci, stdin, out)? {
                None => {
                    writeln!(
                        err,
                        "aborted: input ended before the run finished; nothing logged"
                    )?;
                    Ok(1)
                }
                Some(result) => {
                    print_result(out, &result, trace)?;
                    let log = RunLog::from_env();
                    log.append(&RunRecord::new(&ontology, ci, INTERACTIVE, &result))
                        .with_context(|| format!("appending to {}", log.path().display()))?;
                    Ok(exit_code(&result))
                }
            }
        }
        Command::Cases => {
            let mut failed = 0;
            writeln!(
                out,
                "case  N  X             answer                  confidence    status"
            )?;
            for o in run_test_cases() {
                let answer = match (&o.answer, o.negated) {
                    (Some(a), true) => format!("NOT {a}"),
                    (Some(a), false) => a.clone(),
                    (None, _) => "INDETERMINATE".into(),
                };
                let ok = o.matches();
                failed += usize::from(!ok);
                writeln!(
                    out,
                    "{:>4}  {}  {:<12}  {:<22}  {:<12}  {}",
                    o.number,
                    o.depth,
                    format!("{:?}", o.budgets),
                    answer,
                    render::confidence(o.confidence),
                    if ok { "ok" } else { "MISMATCH" }
                )?;
            }
            Ok(u8::from(failed > 0))
        }
        Command::Sweep {
            table,
            m,
            e,
            k,
            ontology,
            scenario,
            out: path,
        } => {
            let ontology = load_ontology_arg(ontology.as_deref())?;
            let scenario = match scenario {
                Some(path) => load_scenario(&path)?,
                None => builtin_scenario(),
            };
            let csv = match table {
                Some(table) => table_csv(table, &ontology, &scenario, err)?,
                None => sweep(&ontology, &scenario, &grid(&m, &e, &k)?)?.to_csv(),
            };
            match path {
                Some(path) => std::fs::write(&path, csv)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => out.write_all(csv.as_bytes())?,
            }
            Ok(0)
        }
        Command::Rank { all, name } => {
            let matrix = table2();
            if all {
                for (name, rank) in rank_all(&matrix) {
                    writeln!(out, "{rank}\t{name}")?;
                }
            } else {
                let name = name.expect("clap requires a name without --all");
                writeln!(out, "{}\t{name}", rank_ontology(&matrix, &name)?)?;
            }
            Ok(0)
        }
        Command::Validate { ontology } => {
            let text = match &ontology {
                None => cr_core::corpus::NRC_DOCUMENT.to_string(),
                Some(path) => std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?,
            };
            match load_ontology(&text) {
                Ok(o) => {
                    writeln!(
                        out,
                        "{} {}: {} concepts, depth {}",
                        o.name(),
                        o.version(),
                        o.len(),
                        o.depth()
                    )?;
                    writeln!(out, "0 violations")?;
                    Ok(0)
                }
                Err(CoreError::Validation(violations)) => {
                    for v in &violations {
                        writeln!(out, "{v}")?;
                    }
                    writeln!(out, "{} violations", violations.len())?;
                    Ok(1)
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Serve {
            ontology,
            host,
            port,
            idle_timeout,
        } => {
            let ontology = load_ontology_arg(ontology.as_deref())?;
            let state = server::AppState::new(
                ontology,
                RunLog::from_env(),
                Duration::from_secs(idle_timeout),
            );
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(async {
                let listener = tokio::net::TcpListener::bind((host.as_str(), port))
                    .await
                    .with_context(|| format!("binding {host}:{port}"))?;
                writeln!(err, "serving on http://{}", listener.local_addr()?)?;
                server::serve(listener, state).await?;
                anyhow::Ok(())
            })?;
            Ok(0)
        }
    }
}

fn table_csv(
    table: Table,
    ontology: &Ontology,
    scenario: &Scenario,
    err: &mut impl Write,
) -> Result<String> {
    let csv = match table {
        Table::ThresholdGrid => {
            let result = sweep(ontology, scenario, &table_6a::grid())?;
            let checks = table_6a::check(&result);
            let matched = checks.iter().filter(|c| c.matches).count();
            writeln!(
                err,
                "{matched}/{} cells match the published values",
                checks.len()
            )?;
            for c in checks.iter().filter(|c| !c.matches) {
                let tag = if c.documented_divergence {
                    "documented divergence"
                } else {
                    "MISMATCH"
                };
                writeln!(
                    err,
                    "{tag}: m={} k={} computed {:.6} published {}",
                    c.m, c.k, c.computed, c.published
                )?;
            }
            result.to_csv()
        }
        Table::PriorityVariation => {
            let mut csv = String::new();
            for g in table_6b::grids() {
                let result = sweep(ontology, scenario, &g.grid())?;
                writeln!(
                    err,
                    "{} variation {:.10} published {}{}",
                    g.priority,
                    result.variation,
                    g.published_variation,
                    if g.asserted {
                        ""
                    } else {
                        " (not reproducible)"
                    }
                )?;
                let _ = write!(csv, "# {}\n{}", g.priority, result.to_csv());
            }
            csv
        }
        Table::TradeoffLow => sweep(
            ontology,
            scenario,
            &grid(&[table_6cd::C_M], &[table_6cd::C_E], &K_VALUES)?,
        )?
        .to_csv(),
        Table::TradeoffHigh => sweep(
            ontology,
            scenario,
            &grid(&[table_6cd::D_M], &[table_6cd::D_E], &K_VALUES)?,
        )?
        .to_csv(),
        Table::Budgets => {
            let contexts = table_6e::COLUMNS
                .iter()
                .map(|c| ContextInfo::new(c.ci.0, c.ci.1, c.ci.2))
                .collect::<Result<Vec<_>, _>>()?;
            let mut csv = String::from("m,e,k,N,budgets\n");
            for row in budget_table(ontology, &contexts) {
                let budgets: Vec<_> = row.budgets.iter().map(usize::to_string).collect();
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{}",
                    row.ci.m,
                    row.ci.e,
                    row.ci.k,
                    row.depth,
                    budgets.join(" ")
                );
            }
            csv
        }
    };
    Ok(csv)
}
