use std::io::{BufRead, Write};
use std::net::SocketAddr;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use pbo::campaign::{render_table, run_campaign, summarize, write_csv, Arm, Summary};
use pbo::plot::{convergence_svg, profile_svg};
use pbo::service::{router, AppState, ServiceConfig};
use pbo_core::metrics::DEFAULT_THRESHOLD;
use pbo_core::{
    benchmark_by_name, benchmark_catalog, ConstraintSet, DeltaCycle, LoocvHoldout, Session,
    SolverConfig, Variant,
};

#[derive(Parser)]
#[command(name = "pbo", version, about = "Preference-based global optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run benchmark campaigns against synthetic decision-makers.
    Bench(BenchArgs),
    /// Optimize interactively, answering comparisons on the terminal.
    Solve(SolveArgs),
    /// Serve the HTTP session API.
    Serve(ServeArgs),
}

#[derive(Args)]
struct SolverArgs {
    /// Total number of samples.
    #[arg(long, default_value_t = 200)]
    budget: usize,
    /// Initial design size; defaults to 4 per variable.
    #[arg(long)]
    n_init: Option<usize>,
    /// Comma-separated exploration weights for the scaled variant.
    #[arg(long, value_delimiter = ',')]
    delta_cycle: Option<Vec<f64>>,
    /// Number of cluster centroids in the augmented sample set.
    #[arg(long)]
    k_aug: Option<usize>,
    /// Leave-one-out unit for shape recalibration: preference or sample.
    #[arg(long, default_value = "preference", value_parser = parse_holdout)]
    loocv_holdout: LoocvHoldout,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SolverArgs {
    fn config(&self, variant: Variant) -> Result<SolverConfig> {
        let d = SolverConfig::default();
        Ok(SolverConfig {
            n_max: self.budget,
            n_init: self.n_init,
            variant,
            delta_cycle: match &self.delta_cycle {
                Some(v) => DeltaCycle::new(v.clone())?,
                None => d.delta_cycle.clone(),
            },
            k_aug: self.k_aug.unwrap_or(d.k_aug),
            loocv_holdout: self.loocv_holdout,
            seed: self.seed,
            ..d
        })
    }
}

#[derive(Args)]
struct BenchArgs {
    /// Benchmark name, comma-separated names, or `all`.
    #[arg(long, default_value = "all")]
    problem: String,
    /// Comma-separated variants: glispr, glisp, cglisp.
    #[arg(long, value_delimiter = ',', default_value = "glispr")]
    variant: Vec<String>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    /// Output directory for runs.csv, summary.json and plots.
    #[arg(long, default_value = "bench-out")]
    out: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct SolveArgs {
    /// Lower bounds, comma-separated.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    lower: Vec<f64>,
    /// Upper bounds, comma-separated.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    upper: Vec<f64>,
    #[arg(long, default_value = "glispr")]
    variant: String,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, env = "PBO_LISTEN", default_value = "127.0.0.1:8080")]
    listen: SocketAddr,
    /// Directory holding one event log per session.
    #[arg(long, env = "PBO_DATA_DIR", default_value = "pbo-data")]
    data_dir: PathBuf,
    /// Budget for sessions that do not request one.
    #[arg(long, env = "PBO_DEFAULT_BUDGET", default_value_t = 30)]
    default_budget: usize,
}

fn parse_holdout(name: &str) -> Result<LoocvHoldout, String> {
    match name {
        "preference" => Ok(LoocvHoldout::Preference),
        "sample" => Ok(LoocvHoldout::Sample),
        other => Err(format!("expected preference or sample, got `{other}`")),
    }
}

fn parse_variant(name: &str) -> Result<Variant> {
    Variant::from_name(name)
        .with_context(|| format!("unknown variant `{name}` (expected glispr, glisp or cglisp)"))
}

fn bench(args: BenchArgs) -> Result<()> {
    let problems = if args.problem == "all" {
        benchmark_catalog().to_vec()
    } else {
        args.problem
            .split(',')
            .map(|n| {
                benchmark_by_name(n.trim()).with_context(|| format!("unknown benchmark `{n}`"))
            })
            .collect::<Result<Vec<_>>>()?
    };
    let arms = args
        .variant
        .iter()
        .map(|v| {
            let cfg = args.solver.config(parse_variant(v)?)?;
            Ok(Arm::new(Arm::label_for(&cfg), cfg))
        })
        .collect::<Result<Vec<_>>>()?;
    let labels: Vec<String> = arms.iter().map(|a| a.label.clone()).collect();
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;

    let records = run_campaign(&problems, &arms, args.trials, args.solver.seed)?;
    write_csv(
        std::fs::File::create(args.out.join("runs.csv"))?,
        &problems,
        &records,
    )?;

    let mut summaries: Vec<Summary> = Vec::new();
    for p in &problems {
        let mine: Vec<Summary> = labels
            .iter()
            .map(|a| summarize(p, a, &records, args.threshold))
            .collect();
        let refs: Vec<&Summary> = mine.iter().collect();
        let n_init = args.solver.n_init.unwrap_or(4 * p.dim());
        convergence_svg(
            &args.out.join(format!("{}_convergence.svg", p.name)),
            p.label,
            &refs,
            Some(n_init),
        )?;
        profile_svg(
            &args.out.join(format!("{}_profile.svg", p.name)),
            p.label,
            &refs,
        )?;
        summaries.extend(mine);
    }
    std::fs::write(
        args.out.join("summary.json"),
        serde_json::to_vec_pretty(&summaries)?,
    )?;
    print!("{}", render_table(&summaries, &labels));
    Ok(())
}

fn solve_interactive(args: SolveArgs) -> Result<()> {
    let problem = ConstraintSet::new(args.lower, args.upper)?;
    let cfg = args.solver.config(parse_variant(&args.variant)?)?;
    let mut session = Session::new(problem, cfg)?;
    let stdin = std::io::stdin();
    let mut lines = stdin.lock().lines();
    let mut out = std::io::stdout();
    while let Some(q) = session.pending().cloned() {
        writeln!(
            out,
            "\nquery {} (iteration {})",
            session.queries_answered() + 1,
            q.iteration
        )?;
        writeln!(out, "  A = {:?}", q.first)?;
        writeln!(out, "  B = {:?}", q.second)?;
        let b = loop {
            write!(out, "prefer [a/b/=]: ")?;
            out.flush()?;
            let Some(line) = lines.next() else {
                bail!("input closed before the budget was used")
            };
            match line?.trim() {
                "a" | "A" | "-1" => break -1,
                "b" | "B" | "1" => break 1,
                "=" | "0" => break 0,
                _ => writeln!(out, "answer a, b or =")?,
            }
        };
        session.answer(b)?;
    }
    writeln!(
        out,
        "\nbest after {} samples: {:?}",
        session.dataset().len(),
        session.best()
    )?;
    Ok(())
}

async fn serve(args: ServeArgs) -> Result<()> {
    let state = AppState::new(ServiceConfig {
        data_dir: args.data_dir.clone(),
        default_budget: args.default_budget,
    })?;
    let listener = tokio::net::TcpListener::bind(args.listen).await?;
    tracing::info!(
        "listening on {} with data in {}",
        args.listen,
        args.data_dir.display()
    );
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    match Cli::parse().command {
        Command::Bench(a) => bench(a),
        Command::Solve(a) => solve_interactive(a),
        Command::Serve(a) => tokio::runtime::Runtime::new()?.block_on(serve(a)),
    }
}
