use clap::Parser;
use ionsim_cli::args::Cli;

fn main() {
    let cli = Cli::parse();
    std::process::exit(ionsim_cli::run(cli));
}
