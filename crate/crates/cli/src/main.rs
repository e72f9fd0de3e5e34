use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rbk::output::output_root;
use rbk::{presets, Command, ExperimentConfig, Outcome, RunError};

#[derive(Parser)]
#[command(name = "rbk", version, about = "Reduced Bergman kernel experiments")]
struct Cli {
    /// Print the full summary record after each run.
    #[arg(short, long, global = true, conflicts_with = "quiet")]
    verbose: bool,
    /// Only report errors.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (TOML).
    config: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Clone)]
struct Common {
    /// Override one config value, e.g. `--set source.basis.degree=30`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output root; defaults to $RBK_OUTPUT_DIR, then ./rbk-out.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a kernel on a grid, optionally against an oracle and structural checks.
    Kernel(RunArgs),
    /// Check a transformation rule under a proper map or correspondence.
    Verify(RunArgs),
    /// Check adjointness of the branch-sum operators.
    Adjoint(RunArgs),
    /// Recover a proper map onto the disc from kernel data.
    Recover(RunArgs),
    /// List, export or run the shipped configs.
    #[command(subcommand)]
    Presets(PresetCmd),
}

#[derive(Subcommand)]
enum PresetCmd {
    List,
    /// Print a preset to stdout.
    Export { name: String },
    /// Run the named presets, or all of them.
    Run {
        names: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
}

struct Ui {
    verbose: bool,
    quiet: bool,
}

impl Ui {
    fn report(&self, label: &str, result: &Result<Outcome, RunError>) -> u8 {
        match result {
            Ok(o) => {
                if !self.quiet {
                    let value = o.gated_value.map(|v| format!(" gated={v:.3e}")).unwrap_or_default();
                    println!("{label}: {}{value} -> {}", o.status.as_str(), o.dir.display());
                }
                if self.verbose {
                    if let Ok(text) = std::fs::read_to_string(o.dir.join("summary.toml")) {
                        println!("{text}");
                    }
                }
                o.exit_code()
            }
            Err(e) => {
                eprintln!("{label}: {e}");
                e.exit_code()
            }
        }
    }
}

fn run_file(command: Command, args: &RunArgs) -> Result<Outcome, RunError> {
    let config = ExperimentConfig::load(&args.config, &args.common.overrides)?;
    rbk::run(command, &config, &output_root(args.common.out.as_deref()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ui = Ui { verbose: cli.verbose, quiet: cli.quiet };
    let code = match &cli.command {
        Cmd::Kernel(a) => ui.report("kernel", &run_file(Command::Kernel, a)),
        Cmd::Verify(a) => ui.report("verify", &run_file(Command::Verify, a)),
        Cmd::Adjoint(a) => ui.report("adjoint", &run_file(Command::Adjoint, a)),
        Cmd::Recover(a) => ui.report("recover", &run_file(Command::Recover, a)),
        Cmd::Presets(PresetCmd::List) => {
            for (name, text) in presets::PRESETS {
                let about = text.lines().next().unwrap_or("").trim_start_matches('#').trim();
                println!("{name:<28} {about}");
            }
            0
        }
        Cmd::Presets(PresetCmd::Export { name }) => match presets::source(name) {
            Some(text) => {
                print!("{text}");
                0
            }
            None => {
                eprintln!("unknown preset `{name}`");
                rbk::EXIT_CONFIG
            }
        },
        Cmd::Presets(PresetCmd::Run { names, common }) => {
            let selected: Vec<String> =
                if names.is_empty() { presets::names().map(String::from).collect() } else { names.clone() };
            let root = output_root(common.out.as_deref());
            selected
                .iter()
                .map(|name| {
                    let result = presets::load(name, &common.overrides).and_then(|(cmd, cfg)| rbk::run(cmd, &cfg, &root));
                    ui.report(name, &result)
                })
                .max()
                .unwrap_or(0)
        }
    };
    ExitCode::from(code)
}
