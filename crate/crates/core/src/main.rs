use clap::Parser;
use scaled_bregman::cli::{exit_code, run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = run(&cli, &mut std::io::stdout().lock());
    if let Err(e) = &outcome {
        eprintln!("error: {e}");
    }
    std::process::exit(exit_code(&outcome));
}
