use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dpkit::density::{count_table, fit_exponent, Mode};
use dpkit::harness::{emit, render, run_experiment, ExperimentConfig};
use dpkit::indisc::{check, Delta, Sequence};
use dpkit::patterns::{ddlo_pool, depth_search, dlo_pool, eqtree_witness, library, verify, PatternSpec, SpecFile};
use dpkit::setfam::SetFamily;
use dpkit::theories::oracle::budget_from_env;
use dpkit::theories::{sample, validate, ConstraintSet, Formula, TheoryId, TheorySample};
use dpkit::transforms::{alternation_search_oracle, pattern_to_interleaved, switchpoints_to_alternation, trace};
use dpkit::{DpError, Result};

#[derive(Parser)]
#[command(name = "dpkit", version, about = "dp-rank, randomness-pattern and VC-density experiments")]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (reports also write a CSV next to it).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Enumeration budget; overrides DPKIT_BUDGET.
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Indiscernibility arity.
    #[arg(long, global = true)]
    arity: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a registered experiment and print its report.
    Run(RunArgs),
    /// VC dimension of a set family and of its dual.
    Vc { family: PathBuf },
    /// Shatter function of a set family.
    Shatter {
        family: PathBuf,
        /// Only this subset size.
        #[arg(long)]
        m: Option<usize>,
        /// Sample this many subsets instead of enumerating.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Count Δ-types over nested samples and fit the exponent.
    Density(DensityArgs),
    /// Check a sequence for indiscernibility.
    Indisc(IndiscArgs),
    #[command(subcommand)]
    Pattern(PatternCmd),
    #[command(subcommand)]
    Transform(TransformCmd),
    /// Generate a theory sample as JSON.
    Sample(SampleArgs),
}

#[derive(Args)]
struct RunArgs {
    experiment: String,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long)]
    theory: Option<TheoryId>,
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Args)]
struct DensityArgs {
    #[arg(long)]
    theory: TheoryId,
    /// Formula φ(x; y); repeat for several.
    #[arg(long = "delta", required = true)]
    delta: Vec<Formula>,
    #[arg(long, value_delimiter = ',', default_value = "8,16,32,64,128")]
    sizes: Vec<usize>,
    /// Pool mode with this many random realizations.
    #[arg(long)]
    pool: Option<usize>,
    /// Smallest size used by the fit.
    #[arg(long, default_value_t = 8)]
    drop_below: usize,
}

#[derive(Args)]
struct IndiscArgs {
    #[arg(long)]
    sample: PathBuf,
    /// Entries separated by ';', coordinates by ','.
    #[arg(long)]
    seq: String,
    #[arg(long, value_delimiter = ',')]
    base: Vec<usize>,
    /// Test against these formulas instead of all atoms.
    #[arg(long = "delta")]
    delta: Vec<Formula>,
}

#[derive(Subcommand)]
enum PatternCmd {
    /// Verify a pattern file (its sample path is relative to the file).
    Verify { spec: PathBuf },
    /// Search the shipped library over a generated row pool.
    Search(SearchArgs),
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    theory: TheoryId,
    #[arg(long, default_value_t = 1)]
    x_arity: usize,
    #[arg(long, default_value_t = 4)]
    blocks: usize,
    #[arg(long, default_value_t = 5)]
    row_len: usize,
    #[arg(long, default_value_t = 3)]
    max_depth: usize,
}

#[derive(Subcommand)]
enum TransformCmd {
    /// Largest alternation of φ along a sequence, in the model completion.
    Alternation(SeqArgs),
    /// Pairs and ψ2 from the candidate with the most switch points.
    Switch {
        #[command(flatten)]
        seq: SeqArgs,
        /// Candidate realizations: tuples separated by ';'.
        #[arg(long)]
        candidates: String,
    },
    /// ψ and k-subset definability from a pattern file.
    Interleave { spec: PathBuf },
}

#[derive(Args)]
struct SeqArgs {
    #[arg(long)]
    sample: PathBuf,
    #[arg(long)]
    formula: Formula,
    /// Entries separated by ';', coordinates by ','.
    #[arg(long)]
    seq: String,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    theory: TheoryId,
    #[arg(long)]
    size: usize,
    #[arg(long)]
    level: Option<u32>,
    #[arg(long)]
    branching: Option<u32>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(b) = cli.budget {
        std::env::set_var("DPKIT_BUDGET", b.to_string());
    }
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("dpkit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: &Cli) -> Result<u8> {
    let seed = cli.seed.unwrap_or(0);
    let arity = cli.arity.unwrap_or(3);
    match &cli.command {
        Command::Run(a) => {
            let mut cfg = ExperimentConfig::defaults(&a.experiment)?;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            if let Some(m) = cli.arity {
                cfg.arity = m;
            }
            cfg.trials = a.trials.unwrap_or(cfg.trials);
            cfg.n = a.n.unwrap_or(cfg.n);
            cfg.sizes = a.sizes.clone().unwrap_or(cfg.sizes);
            cfg.max_depth = a.max_depth.unwrap_or(cfg.max_depth);
            cfg.tolerance = a.tolerance.unwrap_or(cfg.tolerance);
            cfg.theory = a.theory.or(cfg.theory);
            cfg.out = cli.out.clone();
            let report = run_experiment(&cfg)?;
            print!("{}", render(&report));
            if let Some(path) = &cfg.out {
                emit(&report, path)?;
            }
            Ok(if report.passed() { 0 } else { 1 })
        }
        Command::Vc { family } => {
            let f = SetFamily::load(family)?;
            output(cli, &format!("vc {}\nvc_dual {}\n", f.vc_dimension(), f.dual().vc_dimension()))
        }
        Command::Shatter { family, m, samples } => {
            let f = SetFamily::load(family)?;
            let sizes: Vec<usize> = match m {
                Some(m) => vec![*m],
                None => (0..=f.ground_size()).collect(),
            };
            let mut text = String::from("m,pi_m,exact\n");
            for m in sizes {
                let e = f.shatter_function(m, samples.map(|s| (s, seed)))?;
                text.push_str(&format!("{},{},{}\n", e.m, e.pi_m, e.exact));
            }
            output(cli, &text)
        }
        Command::Density(a) => {
            let mode = a.pool.map_or(Mode::Oracle, |size| Mode::Pool { size });
            let table = count_table(a.theory, &a.delta, &a.sizes, seed, mode)?;
            if let Ok(fit) = fit_exponent(&table, a.drop_below) {
                eprintln!("slope {:.4} intercept {:.4} residual {:.2e}", fit.slope, fit.intercept, fit.residual);
            }
            output(cli, &table.to_csv())
        }
        Command::Indisc(a) => {
            let s = load_sample(&a.sample)?;
            let seq = parse_tuples(&a.seq)?;
            let delta = if a.delta.is_empty() {
                Delta::Atomic
            } else {
                Delta::Formulas(a.delta.clone())
            };
            let r = check(&s, &Sequence::new(seq)?, &a.base, &delta, arity)?;
            output(cli, &serde_json::to_string_pretty(&r)?)?;
            Ok(if r.ok { 0 } else { 1 })
        }
        Command::Pattern(PatternCmd::Verify { spec }) => {
            let (s, p) = load_spec(spec)?;
            let v = verify(&s, &p, arity)?;
            output(cli, &serde_json::to_string_pretty(&v)?)?;
            Ok(if v.verified { 0 } else { 1 })
        }
        Command::Pattern(PatternCmd::Search(a)) => {
            let pool = match a.theory {
                TheoryId::Dlo => dlo_pool(a.blocks, a.row_len)?,
                TheoryId::Ddlo => ddlo_pool(a.blocks, a.row_len)?,
                t => eqtree_witness(t, a.blocks as u32, a.row_len)?.pool,
            };
            let lib = library(&pool.sample, a.x_arity)?;
            let r = depth_search(&pool, &ConstraintSet::default(), &lib, a.max_depth, arity, budget_from_env())?;
            let mut text = format!(
                "depth {}\nexhaustive {}\nattempts {:?}\n",
                r.depth(),
                r.exhaustive,
                r.attempts
            );
            if let Some(best) = &r.best {
                for (row, f) in best.rows.iter().zip(&best.formulas) {
                    text.push_str(&format!("row {:?} formula {f}\n", row.tuples));
                }
            }
            if !r.note.is_empty() {
                text.push_str(&format!("note {}\n", r.note));
            }
            output(cli, &text)
        }
        Command::Transform(TransformCmd::Alternation(a)) => {
            let s = load_sample(&a.sample)?;
            let seq = Sequence::new(parse_tuples(&a.seq)?)?;
            let r = alternation_search_oracle(&s, &a.formula, &seq, &ConstraintSet::default())?;
            output(cli, &serde_json::to_string_pretty(&r)?)
        }
        Command::Transform(TransformCmd::Switch { seq: a, candidates }) => {
            let s = load_sample(&a.sample)?;
            let seq = Sequence::new(parse_tuples(&a.seq)?)?;
            let cands = parse_tuples(candidates)?;
            let text = match switchpoints_to_alternation(&s, &a.formula, &seq, &cands)? {
                None => "no candidate has a switch point\n".to_string(),
                Some(out) => {
                    let c = out.candidate.map(|i| cands[i].clone()).unwrap_or_default();
                    let bits = trace(&s, &a.formula, &seq, &c)?;
                    format!(
                        "candidate {c:?}\ntrace {}\nswitches {}\nswitches_used {}\npsi2 {}\npairs {:?}\nalternations {}\n",
                        bits.iter().map(|&b| if b { 'T' } else { 'F' }).collect::<String>(),
                        out.switches,
                        out.selection.switches_used,
                        out.psi2,
                        out.pairs.tuples,
                        out.alternations
                    )
                }
            };
            output(cli, &text)
        }
        Command::Transform(TransformCmd::Interleave { spec }) => {
            let (s, p) = load_spec(spec)?;
            let il = pattern_to_interleaved(&s, &p)?;
            let mut text = format!("psi {}\n", il.psi);
            for (subset, ok) in &il.subsets {
                text.push_str(&format!("{subset:?} {ok}\n"));
            }
            text.push_str(&format!("all_definable {}\n", il.all_definable()));
            output(cli, &text)?;
            Ok(if il.all_definable() { 0 } else { 1 })
        }
        Command::Sample(a) => {
            let s = sample(a.theory, a.size, seed, a.level, a.branching)?;
            let v = validate(&s);
            if !v.ok {
                return Err(DpError::Contract(format!("generated sample fails validation: {}", v.violation.unwrap_or_default())));
            }
            output(cli, &s.to_json()?)
        }
    }
}

fn output(cli: &Cli, text: &str) -> Result<u8> {
    let text = if text.ends_with('\n') { text.to_string() } else { format!("{text}\n") };
    match &cli.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn load_sample(path: &Path) -> Result<TheorySample> {
    TheorySample::from_json(&std::fs::read_to_string(path)?)
}

fn load_spec(path: &Path) -> Result<(TheorySample, PatternSpec)> {
    let file: SpecFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let s = load_sample(&dir.join(&file.sample))?;
    Ok((s, PatternSpec::from_file(&file)?))
}

fn parse_tuples(text: &str) -> Result<Vec<Vec<usize>>> {
    text.split(';')
        .map(|entry| {
            entry
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse()
                        .map_err(|_| DpError::InputDomain(format!("bad index '{}' in '{text}'", v.trim())))
                })
                .collect()
        })
        .collect()
}
