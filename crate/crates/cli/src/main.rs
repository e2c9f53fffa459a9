use clap::Parser;

fn main() {
    let cli = extremogram_cli::Cli::parse();
    if let Err(e) = extremogram_cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
