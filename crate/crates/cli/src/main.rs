mod checks;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use laxpi::prodint::Method;
use laxpi::{Curve, CurveSpec};

#[derive(Parser, Debug)]
#[command(name = "laxpi", version, about = "Product integrals on matrix Lie groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the product integral of a curve with one method.
    Eval(EvalArgs),
    /// Run every applicable method and tabulate pairwise deviations.
    Compare(Common),
    /// Run an invariant suite and report deviations against thresholds.
    Check(CheckArgs),
    /// Exponential coordinates of one product integral, or of a product of two.
    Bcdh(Common),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Curve spec (JSON); repeat for commands taking two curves.
    #[arg(long)]
    pub spec: Vec<PathBuf>,
    /// Step count for the oracles, or grid size for the series methods.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long, value_parser = parse_method)]
    method: Option<Method>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(value_enum)]
    suite: Suite,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Lax,
    Group,
    Transform,
    Identities,
    Bcdh,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: laxpi::Error| e.to_string())
}

impl Common {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            bail!("--tol must be positive");
        }
        if self.n == Some(0) {
            bail!("--n must be positive");
        }
        Ok(())
    }

    pub fn load_specs(&self) -> Result<Vec<CurveSpec>> {
        self.spec
            .iter()
            .map(|p| {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))
            })
            .collect()
    }

    /// The single curve named by `--spec`, if any.
    pub fn curve(&self, grid: Option<usize>) -> Result<Option<Curve>> {
        match self.load_specs()?.as_slice() {
            [] => Ok(None),
            [s] => Ok(Some(build(s, grid)?)),
            _ => bail!("this command takes a single --spec"),
        }
    }
}

pub fn build(spec: &CurveSpec, grid: Option<usize>) -> Result<Curve> {
    if let Some(n) = grid {
        if n < 2 || n % 2 != 0 {
            bail!("grid size {n} must be even and at least 2");
        }
    }
    Ok(spec.build(grid)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Eval(a) => run::eval(a.method, &a.common),
        Command::Compare(c) => run::compare(&c),
        Command::Check(a) => checks::run(a.suite, &a.common),
        Command::Bcdh(c) => run::bcdh(&c),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
