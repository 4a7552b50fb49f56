use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use rzr::game::{BoardPosition, PointSet};
use rzr::reduce::{reduce, reduce_shared, ReductionConfig, ReductionReport, ReductionStatus, Strategy};
use rzr::search::{solve, Budget, Constraint, SolveStatus};
use rzr::table::{RZTable, SharedTable};
use rzr::workbench::{
    generate_problems, load_problems, parse_position, parse_sgf, render_zone, summarize, GeneratorConfig, GroupBy,
    RateMode,
};

const EXIT_PROVEN: u8 = 0;
const EXIT_DISPROVEN: u8 = 10;
const EXIT_UNKNOWN: u8 = 11;
const EXIT_ERROR: u8 = 2;

#[derive(Parser)]
#[command(name = "rzr", version, about = "Killall-Go solver with relevance-zone reduction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Prove a position and print its zone.
    Solve(SolveArgs),
    /// Shrink the zone of one position.
    Reduce(ReduceArgs),
    /// Reduce every problem of a set and aggregate.
    Bench(BenchArgs),
    /// Inspect or merge pattern table files.
    #[command(subcommand)]
    Table(TableCommand),
    /// Write a set of random solvable problems.
    Gen(GenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Sgf,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Random,
    Erosion,
    Heatmap,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Random => Strategy::Random,
            StrategyArg::Erosion => Strategy::Erosion,
            StrategyArg::Heatmap => Strategy::Heatmap,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum GroupArg {
    Set,
    Size,
}

#[derive(Clone, Copy, ValueEnum)]
enum RateArg {
    Mean,
    Pooled,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    pos: PathBuf,
    #[arg(long)]
    budget: u64,
    #[arg(long)]
    table: Option<PathBuf>,
    /// Forbidden region as a zone hex mask.
    #[arg(long)]
    forbid: Option<String>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Draw the zone on standard error.
    #[arg(long)]
    render: bool,
}

#[derive(Args)]
struct ReductionArgs {
    #[arg(long, value_enum)]
    strategy: StrategyArg,
    #[arg(long, default_value_t = 5)]
    k: u32,
    #[arg(long, default_value_t = 100_000)]
    init_budget: u64,
    #[arg(long, default_value_t = 20_000)]
    iter_budget: u64,
    #[arg(long, env = "RZR_SEED", default_value_t = 0)]
    seed: u64,
    /// Table file, created when missing and saved after the run.
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long)]
    no_rzt: bool,
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

impl ReductionArgs {
    fn config(&self) -> Result<ReductionConfig> {
        let cfg = ReductionConfig {
            strategy: self.strategy.into(),
            init_budget: self.init_budget,
            iter_budget: self.iter_budget,
            k: self.k,
            seed: self.seed,
            use_rzt: !self.no_rzt,
            ..ReductionConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(long)]
    pos: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long)]
    render: bool,
    #[command(flatten)]
    run: ReductionArgs,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of position files or one multi-position file.
    #[arg(long)]
    problems: PathBuf,
    #[arg(long, value_enum, default_value = "set")]
    group_by: GroupArg,
    #[arg(long, value_enum, default_value = "mean")]
    rate: RateArg,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[command(flatten)]
    run: ReductionArgs,
}

#[derive(Subcommand)]
enum TableCommand {
    Stats { file: PathBuf },
    Merge {
        a: PathBuf,
        b: PathBuf,
        #[arg(short = 'o', long)]
        output: PathBuf,
    },
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 50)]
    count: usize,
    #[arg(long, env = "RZR_SEED", default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 20_000)]
    budget: u64,
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Reduce(a) => cmd_reduce(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Table(t) => cmd_table(t),
        Command::Gen(a) => cmd_gen(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn read_position(path: &Path, format: Format) -> Result<BoardPosition> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let pos = match format {
        Format::Text => parse_position(&text),
        Format::Sgf => parse_sgf(&text),
    };
    pos.with_context(|| format!("in {}", path.display()))
}

fn open_table(path: Option<&Path>, size: u8, must_exist: bool) -> Result<RZTable> {
    match path {
        Some(p) if p.exists() => Ok(RZTable::load_file(p, Some(size))?),
        Some(p) if must_exist => bail!("table file {} not found", p.display()),
        _ => Ok(RZTable::new(size)),
    }
}

fn emit(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(p) => fs::write(p, format!("{text}\n")).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{text}")?;
            Ok(())
        }
    }
}

fn cmd_solve(a: SolveArgs) -> Result<u8> {
    let pos = read_position(&a.pos, a.format)?;
    let n = pos.size();
    let table = match &a.table {
        Some(p) => Some(open_table(Some(p), n, true)?),
        None => None,
    };
    let constraint = match &a.forbid {
        Some(hex) => Constraint::new(PointSet::from_hex(n, hex).ok_or_else(|| anyhow!("bad --forbid mask {hex:?}"))?),
        None => Constraint::none(),
    };
    let r = solve(
        &pos,
        &constraint,
        Budget::new(a.budget),
        table.as_ref().map(|t| t as &dyn rzr::table::PatternSource),
    );
    let report = json!({
        "status": r.status,
        "zone": r.zone.map(|z| z.to_hex(n)),
        "zone_size": r.zone.map(|z| z.len()),
        "expansions": r.expansions_used,
    });
    emit(&serde_json::to_string_pretty(&report)?, None)?;
    if a.render {
        if let Some(z) = r.zone {
            eprint!("{}", render_zone(&pos, z, Some(&constraint))?);
        }
    }
    Ok(match r.status {
        SolveStatus::Proven => EXIT_PROVEN,
        SolveStatus::Disproven => EXIT_DISPROVEN,
        SolveStatus::Unknown => EXIT_UNKNOWN,
    })
}

fn cmd_reduce(a: ReduceArgs) -> Result<u8> {
    let pos = read_position(&a.pos, a.format)?;
    let cfg = a.run.config()?;
    let mut table = open_table(a.run.table.as_deref(), pos.size(), false)?;
    let id = a.pos.file_stem().map_or_else(|| "problem".into(), |s| s.to_string_lossy().into_owned());
    let report = reduce(&pos, &id, &cfg, &mut table);
    if let Some(p) = &a.run.table {
        table.save_file(p)?;
    }
    emit(&report.to_json(), a.run.output.as_deref())?;
    if a.render {
        if let (Some(initial), Some(last)) = (report.initial, report.final_zone_set) {
            eprintln!("initial zone ({}):", initial.len());
            eprint!("{}", render_zone(&pos, initial, None)?);
            eprintln!("final zone ({}):", last.len());
            eprint!("{}", render_zone(&pos, last, Some(&Constraint::new(last.complement(pos.size()))))?);
        }
    }
    Ok(match report.status {
        ReductionStatus::Unsolved => EXIT_UNKNOWN,
        _ => EXIT_PROVEN,
    })
}

fn cmd_bench(a: BenchArgs) -> Result<u8> {
    let set = load_problems(&a.problems)?;
    let Some((_, first)) = set.first() else {
        bail!("no problems in {}", a.problems.display());
    };
    let size = first.size();
    let cfg = a.run.config()?;
    let shared = SharedTable::new(open_table(a.run.table.as_deref(), size, false)?);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(a.jobs.max(1)).build()?;
    let run_one = |(id, pos): &(String, BoardPosition)| -> ReductionReport {
        if cfg.use_rzt {
            reduce_shared(pos, id, &cfg, &shared)
        } else {
            reduce(pos, id, &cfg, &mut RZTable::new(size))
        }
    };
    let reports: Vec<ReductionReport> = pool.install(|| set.par_iter().map(run_one).collect());
    if let Some(p) = &a.run.table {
        shared.read().save_file(p)?;
    }
    let name = a.problems.file_stem().map_or_else(|| "problems".into(), |s| s.to_string_lossy().into_owned());
    let group_by = match a.group_by {
        GroupArg::Set => GroupBy::Set,
        GroupArg::Size => GroupBy::Size,
    };
    let rate = match a.rate {
        RateArg::Mean => RateMode::Mean,
        RateArg::Pooled => RateMode::Pooled,
    };
    let summary = summarize(&name, &reports, group_by, rate);
    let out = json!({ "summary": summary, "reports": reports });
    emit(&serde_json::to_string_pretty(&out)?, a.run.output.as_deref())?;
    eprint!("{}", summary.to_text());
    Ok(EXIT_PROVEN)
}

fn cmd_table(t: TableCommand) -> Result<u8> {
    match t {
        TableCommand::Stats { file } => {
            let table = RZTable::load_file(&file, None)?;
            let s = table.stats();
            let out = json!({
                "board_size": table.size(),
                "entries": s.entries,
                "distinct_zones": s.distinct_zones,
                "size_histogram": s.size_histogram,
            });
            emit(&serde_json::to_string_pretty(&out)?, None)?;
        }
        TableCommand::Merge { a, b, output } => {
            let ta = RZTable::load_file(&a, None)?;
            let tb = RZTable::load_file(&b, Some(ta.size()))?;
            let merged = RZTable::merge(&ta, &tb)?;
            merged.save_file(&output)?;
            emit(&serde_json::to_string_pretty(&json!({ "entries": merged.len() }))?, None)?;
        }
    }
    Ok(EXIT_PROVEN)
}

fn cmd_gen(a: GenArgs) -> Result<u8> {
    let cfg = GeneratorConfig {
        count: a.count,
        seed: a.seed,
        solve_budget: a.budget,
        ..GeneratorConfig::default()
    };
    let set = generate_problems(&cfg);
    let mut text = String::new();
    for (id, pos) in &set {
        text.push_str(&format!("# {id}\n{pos}\n"));
    }
    match &a.output {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    eprintln!("{} problems", set.len());
    Ok(EXIT_PROVEN)
}
