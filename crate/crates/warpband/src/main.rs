use clap::Parser;
use warpband::cli::{run, Cli};

fn main() {
    let argv: Vec<String> = std::env::args_os()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let cli = Cli::parse();
    if let Err(e) = run(&cli, &argv) {
        eprintln!("warpband: {e}");
        std::process::exit(e.exit_code());
    }
}
