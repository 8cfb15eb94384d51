use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use pdag_core::eval::{check_rubric, describe, score};
use pdag_core::plan::{ground, solve, validate_plan, GroundOptions, SearchLimits, Strategy};
use pdag_core::pddl::{parse_domain, parse_domain_full, parse_problem, parse_problem_full, Diagnostic};
use pdag_core::prompt::ShotMode;
use pdag_pipeline::llm::{Gateway, LlmConfig, Transport, DEFAULT_API_KEY_ENV};
use pdag_pipeline::runner::{report, run_benchmark, verify, write_golden_fixture, ReportError, VerifyOutcome};
use pdag_pipeline::{load_manifest, Benchmark, Corpus, Store};

const OK: u8 = 0;
const RUN_FAILURES: u8 = 1;
const USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "pdag", version, about = "Generate, check and score abstractions of STRIPS planning domains")]
struct Cli {
    /// Run store directory.
    #[arg(long, global = true, env = "PDAG_STORE", default_value = "pdag-store")]
    store: PathBuf,
    /// Benchmark manifest.
    #[arg(long, global = true, env = "PDAG_MANIFEST", default_value = "corpus/manifest.json")]
    manifest: PathBuf,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum TransportArg {
    Live,
    Record,
    Replay,
}

#[derive(Clone, Copy, ValueEnum)]
enum ShotArg {
    Zero,
    One,
}

impl From<ShotArg> for ShotMode {
    fn from(s: ShotArg) -> Self {
        match s {
            ShotArg::Zero => ShotMode::Zero,
            ShotArg::One => ShotMode::One,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Bfs,
    Greedy,
}

#[derive(clap::Args)]
struct ModelArgs {
    #[arg(long, value_enum, default_value = "replay")]
    transport: TransportArg,
    /// Fixture directory for record and replay; defaults to `<store>/fixtures`.
    #[arg(long)]
    fixtures: Option<PathBuf>,
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    max_tokens: Option<u32>,
    /// Environment variable holding the API key.
    #[arg(long, default_value = DEFAULT_API_KEY_ENV)]
    api_key_env: String,
    #[arg(long)]
    max_in_flight: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run benchmarks through the model and score the results.
    Run {
        /// A benchmark id, or `all`.
        #[arg(long)]
        benchmark: String,
        /// Defaults to the category's usual prompting mode.
        #[arg(long, value_enum)]
        shot: Option<ShotArg>,
        #[arg(long, default_value_t = 5)]
        runs: u32,
        /// Overwrite records that already exist.
        #[arg(long)]
        force: bool,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Parse and check a domain and problem.
    Validate { domain: PathBuf, problem: PathBuf },
    /// Search for a plan.
    Plan {
        domain: PathBuf,
        problem: PathBuf,
        #[arg(long, value_enum, default_value = "bfs")]
        strategy: StrategyArg,
    },
    /// Check a benchmark's reference abstraction against its mapping.
    Verify {
        #[arg(long)]
        benchmark: String,
    },
    /// Score an abstraction (the reference one by default) against the rubric.
    Eval {
        #[arg(long)]
        benchmark: String,
        #[arg(long, requires = "problem")]
        domain: Option<PathBuf>,
        #[arg(long, requires = "domain")]
        problem: Option<PathBuf>,
    },
    /// Aggregate stored runs into a table.
    Report {
        #[arg(long)]
        benchmark: Option<String>,
    },
    /// Serve the review API on localhost.
    ReviewServe {
        #[arg(long, default_value_t = 8787)]
        port: u16,
    },
    /// Write replay fixtures whose answers are the reference listings.
    GoldenFixtures {
        #[arg(long)]
        benchmark: String,
        #[arg(long, value_enum)]
        shot: Option<ShotArg>,
        #[command(flatten)]
        model: ModelArgs,
    },
}

struct Fail(u8, String);

impl<E: std::fmt::Display> From<E> for Fail {
    fn from(e: E) -> Self {
        Fail(USAGE, e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Fail> {
    std::fs::read_to_string(path).map_err(|e| Fail(USAGE, format!("{}: {e}", path.display())))
}

fn corpus(cli: &Cli) -> Result<Corpus, Fail> {
    Ok(load_manifest(&cli.manifest)?)
}

fn pick<'a>(c: &'a Corpus, id: &str) -> Result<&'a Benchmark, Fail> {
    c.get(id).ok_or_else(|| Fail(USAGE, format!("no benchmark `{id}` in the manifest")))
}

fn llm_config(store: &Store, m: &ModelArgs) -> LlmConfig {
    let fixtures = m.fixtures.clone().unwrap_or_else(|| store.fixtures_dir());
    let d = LlmConfig::default();
    LlmConfig {
        endpoint: m.endpoint.clone().unwrap_or(d.endpoint),
        model: m.model.clone().unwrap_or(d.model),
        temperature: m.temperature.unwrap_or(d.temperature),
        max_tokens: m.max_tokens.unwrap_or(d.max_tokens),
        api_key_env: m.api_key_env.clone(),
        max_in_flight: m.max_in_flight.unwrap_or(d.max_in_flight),
        transport: match m.transport {
            TransportArg::Live => Transport::Live,
            TransportArg::Record => Transport::Record { fixtures },
            TransportArg::Replay => Transport::Replay { fixtures },
        },
        ..d
    }
}

fn print_diagnostics(file: &Path, diags: &[Diagnostic]) {
    for d in diags {
        eprintln!("{}", d.render(&file.display().to_string()));
    }
}

async fn run(cli: &Cli) -> Result<u8, Fail> {
    match &cli.cmd {
        Cmd::Run { benchmark, shot, runs, force, model } => {
            let corpus = corpus(cli)?;
            let store = Store::open(&cli.store)?;
            let gateway = Arc::new(Gateway::new(llm_config(&store, model))?);
            let targets: Vec<&Benchmark> = if benchmark == "all" {
                corpus.benchmarks.iter().collect()
            } else {
                vec![pick(&corpus, benchmark)?]
            };
            let mut failed = 0;
            for b in targets {
                let shot = shot.map(ShotMode::from).unwrap_or(b.entry.category.default_shot());
                if benchmark == "all" && !b.entry.supported_shots.contains(&shot) {
                    eprintln!("{}: skipped, no {shot}-shot prompt", b.id());
                    continue;
                }
                let records = run_benchmark(&store, gateway.clone(), b, shot, *runs, *force).await?;
                for r in &records {
                    let bad: Vec<String> = r
                        .stages
                        .iter()
                        .filter(|s| s.status == pdag_pipeline::record::Status::Failed)
                        .map(|s| format!("{:?}: {}", s.stage, s.detail))
                        .collect();
                    if !bad.is_empty() {
                        failed += 1;
                    }
                    println!(
                        "{} run {} [{}] cn={:.2} auc={:.2}{}",
                        r.benchmark,
                        r.run_index,
                        r.run_id,
                        r.score.cn,
                        r.score.auc,
                        if bad.is_empty() { String::new() } else { format!(" ({})", bad.join("; ")) }
                    );
                }
            }
            Ok(if failed > 0 { RUN_FAILURES } else { OK })
        }
        Cmd::Validate { domain, problem } => {
            let pd = parse_domain_full(&read(domain)?);
            print_diagnostics(domain, &pd.diagnostics);
            let Ok(d) = pd.into_result() else { return Ok(RUN_FAILURES) };
            let pp = parse_problem_full(&read(problem)?, &d);
            print_diagnostics(problem, &pp.diagnostics);
            if pp.into_result().is_err() {
                return Ok(RUN_FAILURES);
            }
            println!("ok");
            Ok(OK)
        }
        Cmd::Plan { domain, problem, strategy } => {
            let d = parse_domain(&read(domain)?).map_err(|e| Fail(RUN_FAILURES, e.render(&domain.display().to_string())))?;
            let p = parse_problem(&read(problem)?, &d)
                .map_err(|e| Fail(RUN_FAILURES, e.render(&problem.display().to_string())))?;
            let task = ground(&d, &p, &GroundOptions::default()).map_err(|e| Fail(RUN_FAILURES, e.to_string()))?;
            let strategy = match strategy {
                StrategyArg::Bfs => Strategy::Bfs,
                StrategyArg::Greedy => Strategy::GreedyHadd,
            };
            let plan = solve(&task, strategy, &SearchLimits::default()).map_err(|e| Fail(RUN_FAILURES, e.to_string()))?;
            print!("{}", plan.to_text(&task));
            println!("; {} step(s), {}", plan.len(), validate_plan(&task, &plan));
            Ok(OK)
        }
        Cmd::Verify { benchmark } => {
            let corpus = corpus(cli)?;
            match verify(pick(&corpus, benchmark)?).map_err(|e| Fail(RUN_FAILURES, e.to_string()))? {
                VerifyOutcome::Skipped => {
                    println!("{benchmark}: no mapping, skipped");
                    Ok(OK)
                }
                VerifyOutcome::Checked { report, summary } => {
                    print!("{summary}");
                    Ok(if report.is_bisimilar() { OK } else { RUN_FAILURES })
                }
            }
        }
        Cmd::Eval { benchmark, domain, problem } => {
            let corpus = corpus(cli)?;
            let b = pick(&corpus, benchmark)?;
            let (hd, hp) = match (domain, problem) {
                (Some(df), Some(pf)) => {
                    let d = parse_domain(&read(df)?).map_err(|e| Fail(RUN_FAILURES, e.render(&df.display().to_string())))?;
                    let p = parse_problem(&read(pf)?, &d).map_err(|e| Fail(RUN_FAILURES, e.render(&pf.display().to_string())))?;
                    (d, p)
                }
                _ => (b.hl.clone(), b.hl_problem.clone()),
            };
            let v = check_rubric(&hd, &hp, &b.ll, &b.ll_problem, &b.rubric);
            print!("{}", describe(&v));
            let plan_found = ground(&hd, &hp, &GroundOptions::default())
                .ok()
                .is_some_and(|t| solve(&t, Strategy::Bfs, &SearchLimits::default()).is_ok());
            let s = score(&v, true, plan_found, false);
            println!("cn={:.2} auc={:.2}", s.cn, s.auc);
            Ok(OK)
        }
        Cmd::Report { benchmark } => {
            let store = Store::open(&cli.store)?;
            match report(&store, benchmark.as_deref()) {
                Ok(r) => {
                    print!("{}", r.text);
                    Ok(OK)
                }
                Err(e @ ReportError::NoRuns(_)) => Err(Fail(USAGE, e.to_string())),
                Err(e) => Err(e.into()),
            }
        }
        Cmd::ReviewServe { port } => {
            let store = Store::open(&cli.store)?;
            let corpus = load_manifest(&cli.manifest).ok().map(Arc::new);
            pdag_pipeline::review::serve_review(*port, store, corpus).await?;
            Ok(OK)
        }
        Cmd::GoldenFixtures { benchmark, shot, model } => {
            let corpus = corpus(cli)?;
            let store = Store::open(&cli.store)?;
            let b = pick(&corpus, benchmark)?;
            let shot = shot.map(ShotMode::from).unwrap_or(b.entry.category.default_shot());
            let cfg = llm_config(&store, model);
            let dir = model.fixtures.clone().unwrap_or_else(|| store.fixtures_dir());
            println!("{}", write_golden_fixture(b, shot, &cfg, &dir)?.display());
            Ok(OK)
        }
    }
}

#[tokio::main]
async fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli).await {
        Ok(code) => ExitCode::from(code),
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
