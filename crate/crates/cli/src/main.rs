use clap::Parser;
use floquet_atlas_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("floquet-atlas: {e}");
        std::process::exit(e.exit_code());
    }
}
