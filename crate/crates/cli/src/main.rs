use clap::Parser;
use tm_cli::{run, Cli, Command};

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Process(args) => run::process(args),
        Command::Audit(args) => run::audit(args),
    };
    std::process::exit(run::exit_code(result));
}
