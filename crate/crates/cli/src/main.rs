use clap::Parser;

fn main() {
    std::process::exit(ruelle_cli::run(ruelle_cli::Cli::parse()));
}
