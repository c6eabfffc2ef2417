use clap::Parser;
use thermalize_cli::{init_threads, run, Cli};

fn main() {
    let cli = Cli::parse();
    init_threads();
    if let Err(e) = run(&cli) {
        eprintln!("thermalize: {e}");
        std::process::exit(e.exit_code());
    }
}
