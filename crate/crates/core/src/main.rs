use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use shortword::lab::{self, BenchParams};
use shortword::problem::{parse_matrix, Problem};
use shortword::synth::{self, load_or_build, SynthConfig, Synthesizer};
use shortword::{Error, ModMatrix, Word};

#[derive(Parser)]
#[command(name = "shortword", version, about = "Short words in SL_m(Z/p^n Z) by commutator lifting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone, Copy)]
struct TableArgs {
    /// Levels up to N0 are served from the base table.
    #[arg(long, default_value_t = 1)]
    n0: u32,
    /// Largest group searched exhaustively for the base table.
    #[arg(long, default_value_t = 10_000_000)]
    memory_budget: usize,
    /// Ball size for the per-level coset search.
    #[arg(long, default_value_t = 200_000)]
    search_states: usize,
}

impl TableArgs {
    fn config(self) -> SynthConfig {
        SynthConfig {
            base_cutoff: self.n0,
            memory_budget: self.memory_budget,
            search_states: self.search_states,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Find a verified word for the target.
    Synthesize {
        problem: PathBuf,
        /// Target matrix such as "[[2, 1], [1, 1]]"; overrides the file.
        #[arg(long)]
        target: Option<String>,
        /// Draws a random target when none is given.
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for base-table cache files.
        #[arg(long)]
        cache: Option<PathBuf>,
        #[command(flatten)]
        table: TableArgs,
    },
    /// Check that a word evaluates to the target (exit 0 iff it does).
    Verify {
        problem: PathBuf,
        /// Comma-separated signed generator indices.
        #[arg(long, allow_hyphen_values = true)]
        word: String,
        #[arg(long)]
        target: Option<String>,
    },
    /// Exact Cayley-graph diameter by breadth-first search.
    Diameter {
        problem: PathBuf,
        #[arg(long, default_value_t = 10_000_000)]
        budget: usize,
    },
    /// Word-length benchmark over random generating sets, written as CSV.
    Bench {
        #[arg(long, default_value_t = 3)]
        p: u64,
        #[arg(long, default_value_t = 2)]
        m: usize,
        /// Inclusive range such as "2..12".
        #[arg(long, default_value = "2..8")]
        n_range: String,
        #[arg(long, default_value_t = 4)]
        trials: usize,
        #[arg(long, default_value_t = 20)]
        targets: usize,
        #[arg(long, default_value_t = 2)]
        set_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 100_000)]
        bfs_budget: usize,
        #[command(flatten)]
        table: TableArgs,
    },
    /// Run the built-in invariant suites.
    Selftest {
        #[arg(long, conflicts_with = "full")]
        quick: bool,
        #[arg(long)]
        full: bool,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NotGenerating(_) => 2,
        Error::Parse(_)
        | Error::InvalidGroupSpec(_)
        | Error::DimensionMismatch { .. }
        | Error::WrongDimension(_)
        | Error::BadIndex { .. }
        | Error::ModulusOverflow { .. } => 3,
        Error::VerificationFailed(_) => 4,
        _ => 1,
    }
}

fn load(problem: &Path, target: Option<&str>) -> Result<(Problem, Option<ModMatrix>), Error> {
    let pr = Problem::from_path(problem)?;
    let target = match target {
        Some(t) => Some(parse_matrix(pr.spec(), t)?),
        None => pr.target.clone(),
    };
    Ok((pr, target))
}

fn parse_range(s: &str) -> Result<(u32, u32), Error> {
    let bad = || Error::Parse(format!("bad range {s:?}; expected LO..HI"));
    let (lo, hi) = s.split_once("..").or_else(|| s.split_once('-')).ok_or_else(bad)?;
    let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
    let hi: u32 = hi.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
    if lo == 0 || lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn run(cli: Cli) -> Result<u8, Error> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Synthesize {
            problem,
            target,
            seed,
            cache,
            table,
        } => {
            let (pr, target) = load(&problem, target.as_deref())?;
            let target = match (target, seed) {
                (Some(t), _) => t,
                (None, Some(seed)) => lab::random_element(pr.spec(), &mut ChaCha8Rng::seed_from_u64(seed)),
                (None, None) => {
                    return Err(Error::Parse("no target: give one in the file, --target or --seed".into()))
                }
            };
            let cfg = table.config();
            let table = match cache {
                Some(dir) => load_or_build(&pr.gens, &cfg, &dir)?,
                None => synth::build_base_table(&pr.gens, &cfg)?,
            };
            let syn = Synthesizer::with_table(pr.gens.clone(), table)?;
            let result = syn.synthesize(&target)?;
            let check = synth::verify(&pr.gens, &target, &result.word)?;
            if !check.ok {
                return Err(Error::VerificationFailed(format!("word {} failed re-evaluation", result.word)));
            }
            writeln!(out, "{}", result.word)?;
            writeln!(out, "raw_length: {}", result.raw_len)?;
            writeln!(out, "reduced_length: {}", result.word.len())?;
            let passes: Vec<String> = result.passes.iter().map(|(l, len)| format!("{l}:{len}")).collect();
            writeln!(out, "passes: {}", passes.join(" "))?;
            writeln!(out, "verified: true")?;
            Ok(0)
        }
        Command::Verify { problem, word, target } => {
            let (pr, target) = load(&problem, target.as_deref())?;
            let target = target.ok_or_else(|| Error::Parse("no target in file or --target".into()))?;
            let word: Word = word.parse()?;
            let check = synth::verify(&pr.gens, &target, &word)?;
            writeln!(
                out,
                "{} raw_length: {} reduced_length: {}",
                if check.ok { "ok" } else { "mismatch" },
                check.raw_len,
                check.reduced_len
            )?;
            Ok(if check.ok { 0 } else { 1 })
        }
        Command::Diameter { problem, budget } => {
            let pr = Problem::from_path(&problem)?;
            let d = lab::exact_diameter(&pr.gens, budget)?;
            writeln!(out, "diameter: {d}")?;
            writeln!(out, "group_order: {}", pr.spec().group_order())?;
            Ok(0)
        }
        Command::Bench {
            p,
            m,
            n_range,
            trials,
            targets,
            set_size,
            seed,
            out: path,
            bfs_budget,
            table,
        } => {
            let (n_lo, n_hi) = parse_range(&n_range)?;
            let params = BenchParams {
                p,
                m,
                n_lo,
                n_hi,
                trials,
                targets,
                set_size,
                seed,
                cfg: table.config(),
                bfs_budget,
            };
            let report = lab::bench_lengths(&params)?;
            match &path {
                Some(path) => lab::emit_csv(&report.rows, BufWriter::new(File::create(path)?))?,
                None => lab::emit_csv(&report.rows, &mut out)?,
            }
            let summary = match report.slope {
                Some(s) => format!("fitted exponent over n in [{}, {n_hi}]: {s:.3}", n_lo.max(4)),
                None => "fitted exponent: not enough points".to_string(),
            };
            if path.is_some() {
                writeln!(out, "{} rows; {summary}", report.rows.len())?;
            } else {
                eprintln!("{} rows; {summary}", report.rows.len());
            }
            Ok(0)
        }
        Command::Selftest { quick: _, full } => {
            let results = shortword::selftest::run(full)?;
            let mut ok = true;
            for r in &results {
                writeln!(out, "{r}")?;
                ok &= r.passed();
            }
            writeln!(out, "{}", if ok { "selftest passed" } else { "selftest FAILED" })?;
            Ok(if ok { 0 } else { 4 })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
