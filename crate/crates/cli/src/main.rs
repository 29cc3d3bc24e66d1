use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use setpack::hereditary::{hereditary_closure, solve_hereditary, HereditaryInstance};
use setpack::instance::{generate_3dm, generate_random};
use setpack::normalizer::{bookkeeping, check_normalized, normalize, ratio_transfer_holds, AnalysisTuple};
use setpack::oracle::{solve_exact, DEFAULT_ORACLE_BUDGET};
use setpack::{solve, Format, Instance, Packing, PairMode, RunStats, SearchParams};

mod audit;

use audit::{audit_instance, read_csv, run_suite, write_csv, AuditRow, Suite};

/// Local search for 2-3-Set Packing.
#[derive(Parser, Debug)]
#[command(name = "setpack", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve an instance in general mode (improvements plus binoculars).
    Solve {
        file: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        format: Option<InputFormat>,
    },
    /// Solve a hereditary instance with improvements of size at most 10.
    SolveHereditary {
        file: PathBuf,
        /// Add missing 2-subsets first instead of rejecting the instance.
        #[arg(long)]
        close: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        format: Option<InputFormat>,
    },
    /// Exact optimum by branch and bound.
    Oracle {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ORACLE_BUDGET)]
        budget: u64,
        #[arg(long)]
        format: Option<InputFormat>,
    },
    /// Solve and compare against the exact optimum.
    Audit {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[command(flatten)]
        search: SearchArgs,
        /// Solve in hereditary mode and enforce the 4/3 guarantee.
        #[arg(long)]
        hereditary: bool,
        #[arg(long, default_value_t = DEFAULT_ORACLE_BUDGET)]
        oracle_budget: u64,
        /// Largest instance accepted without --force.
        #[arg(long, default_value_t = 40)]
        max_sets: usize,
        #[arg(long)]
        force: bool,
        #[arg(long, value_enum, default_value_t = Output::Json)]
        output: Output,
        #[arg(long)]
        format: Option<InputFormat>,
    },
    /// Generate a random instance.
    Gen {
        #[arg(value_enum)]
        kind: GenKind,
        /// Universe size (random) or part size (3dm).
        #[arg(long, default_value_t = 9)]
        universe: usize,
        #[arg(long, default_value_t = 8)]
        sets: usize,
        /// Probability that a random set is a triple.
        #[arg(long, default_value_t = 0.5)]
        p3: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Apply the hereditary closure.
        #[arg(long)]
        close: bool,
        #[arg(long, value_enum, default_value_t = InputFormat::Text)]
        format: InputFormat,
    },
    /// Normalize an analysis tuple and report the certificate.
    Normalize {
        file: PathBuf,
    },
    /// Audit a generated suite in parallel.
    Bench {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, default_value_t = DEFAULT_ORACLE_BUDGET)]
        oracle_budget: u64,
        #[arg(long, value_enum, default_value_t = Output::Csv)]
        output: Output,
    },
    /// Check that a CSV audit file matches a JSON one row by row.
    CompareRows {
        csv: PathBuf,
        json: PathBuf,
    },
}

#[derive(Args, Debug, Clone)]
struct SearchArgs {
    /// Largest improvement size.
    #[arg(long, conflicts_with = "epsilon")]
    tau: Option<usize>,
    /// Target accuracy as a rational `p/q` or integer; sets tau = 4 * ceil(2 / epsilon).
    #[arg(long)]
    epsilon: Option<String>,
    /// Random colorings tried per binocular search.
    #[arg(long)]
    colorings: Option<usize>,
    #[arg(long)]
    t_override: Option<usize>,
    /// One injective coloring of the whole universe instead of random ones.
    #[arg(long)]
    injective_colorings: bool,
    /// Enumerate improvements by plain subset search.
    #[arg(long)]
    naive_improve: bool,
    #[arg(long, value_enum, default_value_t = PairModeArg::Canonical)]
    pair_mode: PairModeArg,
    /// Master seed; the SETPACK_SEED environment variable takes precedence.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PairModeArg {
    Canonical,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InputFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GenKind {
    Random,
    #[value(name = "3dm")]
    ThreeDm,
}

fn parse_epsilon(s: &str) -> Result<(u64, u64)> {
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim().parse()?, d.trim().parse()?),
        None => (s.trim().parse()?, 1),
    };
    Ok((num, den))
}

fn seed_from_env(flag: u64) -> Result<u64> {
    match std::env::var("SETPACK_SEED") {
        Ok(v) => v.trim().parse().with_context(|| format!("SETPACK_SEED={v:?} is not an integer")),
        Err(_) => Ok(flag),
    }
}

impl SearchArgs {
    fn params(&self) -> Result<SearchParams> {
        let tau = match (&self.tau, &self.epsilon) {
            (Some(t), _) => *t,
            (None, Some(e)) => {
                let (num, den) = parse_epsilon(e)?;
                SearchParams::tau_for_epsilon(num, den)?
            }
            (None, None) => SearchParams::default().tau,
        };
        let mut p = SearchParams::with_tau(tau);
        p.seed = seed_from_env(self.seed)?;
        if let Some(r) = self.colorings {
            p.coloring_reps = r;
        }
        p.t_override = self.t_override;
        p.injective_colorings = self.injective_colorings;
        p.naive_improve = self.naive_improve;
        p.pair_mode = match self.pair_mode {
            PairModeArg::Canonical => PairMode::Canonical,
            PairModeArg::Full => PairMode::Full,
        };
        p.validate()?;
        Ok(p)
    }
}

fn read_instance(path: &Path, format: Option<InputFormat>) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let format = match format {
        Some(InputFormat::Json) => Format::Json,
        Some(InputFormat::Text) => Format::Text,
        None if path.extension().is_some_and(|e| e == "json") => Format::Json,
        None => Format::Text,
    };
    Instance::parse(&text, format).with_context(|| format!("parsing {}", path.display()))
}

fn packing_json(instance: &Instance, a: &Packing, stats: &RunStats, tau: usize) -> serde_json::Value {
    let sets: Vec<Vec<&str>> = a.set_ids().iter().map(|&id| instance.set_labels(id)).collect();
    json!({
        "tau": tau,
        "weight": stats.final_weight,
        "set_ids": a.members(),
        "sets": sets,
        "stats": stats,
    })
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn emit_rows(rows: &[AuditRow], output: Output) -> Result<()> {
    match output {
        Output::Json => print_json(&rows),
        Output::Csv => write_csv(rows, io::stdout().lock()),
    }
}

/// Exit status 1 when some row breaks its guarantee.
fn report_violations(rows: &[AuditRow]) -> ExitCode {
    let bad: Vec<&AuditRow> = rows.iter().filter(|r| r.violates_guarantee()).collect();
    for r in &bad {
        eprintln!(
            "guarantee violated on {}: opt {} > 4/3 * alg {}",
            r.instance, r.opt_weight, r.alg_weight
        );
    }
    if bad.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Solve { file, search, format } => {
            let inst = read_instance(&file, format)?;
            let params = search.params()?;
            let (a, stats) = solve(&inst, &params)?;
            print_json(&packing_json(&inst, &a, &stats, params.tau))?;
        }
        Command::SolveHereditary {
            file,
            close,
            seed,
            format,
        } => {
            let inst = read_instance(&file, format)?;
            let h = if close {
                hereditary_closure(&inst)
            } else {
                HereditaryInstance::new(inst).context("use --close to add the missing 2-subsets")?
            };
            let (a, stats) = solve_hereditary(&h, seed_from_env(seed)?)?;
            print_json(&packing_json(h.instance(), &a, &stats, SearchParams::hereditary(0).tau))?;
        }
        Command::Oracle { file, budget, format } => {
            let inst = read_instance(&file, format)?;
            let r = solve_exact(&inst, budget)?;
            let sets: Vec<Vec<&str>> = r.witness.set_ids().iter().map(|&id| inst.set_labels(id)).collect();
            print_json(&json!({
                "optimum_weight": r.optimum_weight,
                "set_ids": r.witness.members(),
                "sets": sets,
                "nodes_explored": r.nodes_explored,
            }))?;
        }
        Command::Audit {
            files,
            search,
            hereditary,
            oracle_budget,
            max_sets,
            force,
            output,
            format,
        } => {
            let mut params = search.params()?;
            if hereditary {
                params = SearchParams::hereditary(params.seed);
            }
            let mut rows = Vec::new();
            for file in &files {
                let inst = read_instance(file, format)?;
                if inst.len() > max_sets && !force {
                    bail!(
                        "{} has {} sets, above the oracle limit of {max_sets}; pass --force to audit anyway",
                        file.display(),
                        inst.len()
                    );
                }
                rows.push(audit_instance(&file.display().to_string(), &inst, &params, oracle_budget)?);
            }
            rows.sort_by(|a, b| a.instance.cmp(&b.instance));
            emit_rows(&rows, output)?;
            return Ok(report_violations(&rows));
        }
        Command::Gen {
            kind,
            universe,
            sets,
            p3,
            seed,
            close,
            format,
        } => {
            let seed = seed_from_env(seed)?;
            let mut inst = match kind {
                GenKind::Random => generate_random(universe, sets, p3, seed)?,
                GenKind::ThreeDm => generate_3dm(universe, sets, seed)?,
            };
            if close {
                inst = hereditary_closure(&inst).into_instance();
            }
            let format = match format {
                InputFormat::Text => Format::Text,
                InputFormat::Json => Format::Json,
            };
            let mut out = io::stdout().lock();
            write!(out, "{}", inst.serialize(format))?;
            if format == Format::Json {
                writeln!(out)?;
            }
        }
        Command::Normalize { file } => {
            let text = fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
            let tuple: AnalysisTuple = serde_json::from_str(&text).context("parsing analysis tuple")?;
            let n = normalize(&tuple)?;
            let violations: Vec<String> = check_normalized(&n).iter().map(|v| format!("{v:?}")).collect();
            let bk = bookkeeping(&tuple, &n);
            print_json(&json!({
                "normalized": n.tuple,
                "original_ids": n.original,
                "certificate": n.certificate,
                "violations": violations,
                "ratio_transfer": ratio_transfer_holds(&tuple, &n.tuple),
                "bookkeeping": bk,
                "bookkeeping_holds": bk.holds(),
            }))?;
            if !violations.is_empty() || !bk.holds() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Bench {
            suite,
            count,
            search,
            oracle_budget,
            output,
        } => {
            let params = search.params()?;
            let rows = run_suite(suite, count, params.seed, &params, oracle_budget)?;
            emit_rows(&rows, output)?;
            return Ok(report_violations(&rows));
        }
        Command::CompareRows { csv, json } => {
            let from_csv = read_csv(fs::File::open(&csv).with_context(|| format!("opening {}", csv.display()))?)?;
            let text = fs::read_to_string(&json).with_context(|| format!("reading {}", json.display()))?;
            let from_json: Vec<AuditRow> = serde_json::from_str(&text)?;
            let stripped: Vec<AuditRow> = from_json
                .into_iter()
                .map(|r| AuditRow { guarantee: None, ..r })
                .collect();
            if stripped != from_csv {
                bail!("CSV and JSON rows differ");
            }
            println!("{} rows match", from_csv.len());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
