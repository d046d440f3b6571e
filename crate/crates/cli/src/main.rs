use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use crocco_cli::commands::{self, Options, RunError};

#[derive(Parser)]
#[command(
    name = "crocco",
    version,
    about = "Term-by-term Crocco relations for Korteweg and complex fluids"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Cells per axis, overriding grid.n.
    #[arg(long, global = true, value_name = "N")]
    grid: Option<usize>,
    /// Number of grid levels, each halving the spacing.
    #[arg(long, global = true, value_name = "K")]
    refine: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Korteweg relation: term fields and norms.
    EvalKorteweg,
    /// Complex-fluid relation: term fields and norms.
    EvalComplex,
    /// Smectic relation: term fields and norms.
    EvalSmectic,
    /// Planar vorticity transport with Ericksen-stress forcing.
    Transport2d,
    /// Observed order of the defect identities on the manufactured suites.
    MmsVerify,
    /// Finite-difference check of every analytic constitutive partial.
    ValidateModels,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let opts = Options {
        config: cli.config,
        out: cli.out,
        grid: cli.grid,
        refine: cli.refine,
    };
    let result: Result<String, RunError> = match cli.command {
        Command::EvalKorteweg => commands::eval_korteweg(&opts),
        Command::EvalComplex => commands::eval_complex(&opts),
        Command::EvalSmectic => commands::eval_smectic(&opts),
        Command::Transport2d => commands::transport2d(&opts),
        Command::MmsVerify => commands::mms_verify(&opts),
        Command::ValidateModels => commands::validate_models(&opts),
    };
    match result {
        Ok(summary) => {
            print!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
