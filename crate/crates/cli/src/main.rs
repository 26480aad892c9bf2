use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use unshuffle::coproduct::check_axioms_with;
use unshuffle::cumulants::{convert, from_cumulants, series, to_cumulants};
use unshuffle::products::{bp_distribution, convolve, subordinate_distributions};
use unshuffle::verify::run_suites;
use unshuffle::{
    Config, ConvolutionKind, CumulantKind, CumulantMap, Defects, Distribution, Error, HalfSide,
    Letter, Rational, SeriesKind, Suite,
};

const DEFAULT_CAP: usize = 8;
const CAP_VAR: &str = "SHUFFLE_MAX_DEGREE";

/// Exact moment/cumulant transforms and identity checks in the shuffle algebra.
#[derive(Parser)]
#[command(name = "unshuffle", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Moments to cumulants.
    Cumulants {
        /// free, boolean or monotone
        #[arg(long)]
        kind: CumulantKind,
        input: PathBuf,
        #[arg(short)]
        output: Option<PathBuf>,
    },
    /// Cumulants back to moments; the kind is read from the file.
    Moments {
        input: PathBuf,
        #[arg(short)]
        output: Option<PathBuf>,
    },
    /// Change the kind of a cumulant map.
    Convert {
        #[arg(long)]
        to: CumulantKind,
        input: PathBuf,
        #[arg(short)]
        output: Option<PathBuf>,
    },
    /// Additive convolution of two distributions.
    Convolve {
        /// free, boolean, monotone-left or monotone-right
        #[arg(long)]
        kind: ConvolutionKind,
        first: PathBuf,
        second: PathBuf,
        #[arg(short)]
        output: Option<PathBuf>,
    },
    /// Subordination product of two distributions.
    Subordinate {
        /// left or right
        #[arg(long, value_parser = parse_side)]
        side: HalfSide,
        first: PathBuf,
        second: PathBuf,
        #[arg(short)]
        output: Option<PathBuf>,
    },
    /// Bercovici-Pata semigroup at a rational time t >= 0.
    Bp {
        #[arg(long, allow_hyphen_values = true)]
        t: Rational,
        input: PathBuf,
        #[arg(short)]
        output: Option<PathBuf>,
    },
    /// Moment (M), free cumulant (R) or boolean cumulant (eta) series.
    Series {
        #[arg(long)]
        which: SeriesKind,
        input: PathBuf,
        #[arg(short)]
        output: Option<PathBuf>,
    },
    /// Run verification suites and write a JSON report.
    Verify {
        /// suite name or "all"; repeatable
        #[arg(long = "suite", default_value = "all", value_delimiter = ',')]
        suites: Vec<String>,
        #[arg(long, default_value_t = 5)]
        max_degree: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// drop-left-singleton, skip-bernoulli or flip-adjoint; repeatable
        #[arg(long, value_delimiter = ',')]
        mutate: Vec<String>,
        #[arg(short)]
        output: Option<PathBuf>,
    },
    /// Check the unshuffle coalgebra axioms over an alphabet.
    VerifyCoalgebra {
        #[arg(long, default_value = "a,b", value_delimiter = ',')]
        letters: Vec<String>,
        #[arg(long, default_value_t = 4)]
        max_degree: usize,
        #[arg(short)]
        output: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Verify,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn parse_side(s: &str) -> Result<HalfSide, String> {
    match s {
        "left" => Ok(HalfSide::Left),
        "right" => Ok(HalfSide::Right),
        _ => Err(format!("unknown side {s:?}, expected left or right")),
    }
}

fn parse_defect(s: &str) -> Result<Defects, Failure> {
    let mut d = Defects::NONE;
    match s {
        "drop-left-singleton" => d.drop_left_singleton = true,
        "skip-bernoulli" => d.skip_second_bernoulli = true,
        "flip-adjoint" => d.flip_adjoint_sign = true,
        _ => return Err(Failure::Usage(format!("unknown defect {s:?}"))),
    }
    Ok(d)
}

fn degree_cap() -> Result<usize, Failure> {
    match std::env::var(CAP_VAR) {
        Ok(v) => v
            .parse()
            .map_err(|_| Failure::Usage(format!("{CAP_VAR}={v:?} is not a degree"))),
        Err(_) => Ok(DEFAULT_CAP),
    }
}

fn check_cap(max_degree: usize) -> Result<(), Failure> {
    let cap = degree_cap()?;
    if max_degree > cap {
        return Err(Failure::Usage(format!(
            "max_degree {max_degree} exceeds the cap {cap} (set {CAP_VAR} to change it)"
        )));
    }
    Ok(())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn with_path<T>(path: &Path, r: unshuffle::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn distribution(path: &Path) -> Result<Distribution, Failure> {
    let d = with_path(path, Distribution::from_json(&read(path)?))?;
    check_cap(d.max_degree())?;
    Ok(d)
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), Failure> {
    match output {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn suites(names: &[String]) -> Result<Vec<Suite>, Failure> {
    if names.iter().any(|n| n == "all") {
        return Ok(Suite::ALL.to_vec());
    }
    let mut out = Vec::new();
    for n in names {
        let s: Suite = n.parse()?;
        if !out.contains(&s) {
            out.push(s);
        }
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Cumulants {
            kind,
            input,
            output,
        } => {
            let c = to_cumulants(&distribution(&input)?, kind)?;
            emit(output.as_deref(), &c.to_json())
        }
        Command::Moments { input, output } => {
            let c = with_path(&input, CumulantMap::from_json(&read(&input)?))?;
            check_cap(c.max_degree())?;
            emit(output.as_deref(), &from_cumulants(&c)?.to_json())
        }
        Command::Convert { to, input, output } => {
            let c = with_path(&input, CumulantMap::from_json(&read(&input)?))?;
            check_cap(c.max_degree())?;
            emit(output.as_deref(), &convert(&c, to)?.to_json())
        }
        Command::Convolve {
            kind,
            first,
            second,
            output,
        } => {
            let d = convolve(&distribution(&first)?, &distribution(&second)?, kind)?;
            emit(output.as_deref(), &d.to_json())
        }
        Command::Subordinate {
            side,
            first,
            second,
            output,
        } => {
            let d =
                subordinate_distributions(&distribution(&first)?, &distribution(&second)?, side)?;
            emit(output.as_deref(), &d.to_json())
        }
        Command::Bp { t, input, output } => {
            let d = bp_distribution(&distribution(&input)?, &t)?;
            emit(output.as_deref(), &d.to_json())
        }
        Command::Series {
            which,
            input,
            output,
        } => emit(
            output.as_deref(),
            &series(&distribution(&input)?, which)?.to_json(),
        ),
        Command::Verify {
            suites: names,
            max_degree,
            seed,
            mutate,
            output,
        } => {
            check_cap(max_degree)?;
            let defects = mutate
                .iter()
                .map(|m| parse_defect(m))
                .try_fold(Defects::NONE, |acc, d| d.map(|d| acc.union(d)))?;
            let config = Config::new(max_degree, seed).with_defects(defects);
            let report = run_suites(&suites(&names)?, &config)?;
            emit(output.as_deref(), &report.to_json())?;
            for (suite, check) in report.failures() {
                eprintln!(
                    "FAIL {suite}/{} [{}]: witness {}",
                    check.axiom,
                    check.formula,
                    check.witness.as_deref().unwrap_or("-")
                );
            }
            if report.passed {
                Ok(())
            } else {
                Err(Failure::Verify)
            }
        }
        Command::VerifyCoalgebra {
            letters,
            max_degree,
            output,
        } => {
            check_cap(max_degree)?;
            let alphabet = letters
                .iter()
                .map(|n| Letter::new(n, 0))
                .collect::<unshuffle::Result<Vec<_>>>()?;
            let report = check_axioms_with(&alphabet, max_degree, Defects::NONE)?;
            let text = serde_json::to_string_pretty(&report).expect("serializable") + "\n";
            emit(output.as_deref(), &text)?;
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Verify)
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verify) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
