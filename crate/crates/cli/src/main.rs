//! `chsh` — dataset generation, membership oracles, classifier training and
//! the evaluation pipelines for the CHSH quantum correlation set.

mod args;
mod commands;
mod error;

use args::{Cli, Command};
use clap::Parser;
use error::CliError;

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    #[cfg(feature = "parallel")]
    if let Some(threads) = cli.threads.filter(|&t| t > 0) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::domain(format!("thread pool: {e}")))?;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = cli.threads;

    let config_text = match &cli.config {
        None => None,
        Some(path) => Some(
            std::fs::read_to_string(path)
                .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?,
        ),
    };
    fn overlay<T: Default + serde::de::DeserializeOwned>(
        text: &Option<String>,
    ) -> Result<T, CliError> {
        match text {
            None => Ok(T::default()),
            Some(t) => serde_json::from_str(t)
                .map_err(|e| CliError::domain(format!("config file: {e}"))),
        }
    }

    match cli.command {
        Command::Generate(a) => commands::cmd_generate(a.merge(overlay(&config_text)?)),
        Command::Classify(a) => commands::cmd_classify(a.merge(overlay(&config_text)?)),
        Command::Train(a) => commands::cmd_train(a.merge(overlay(&config_text)?)),
        Command::Eval(a) => commands::cmd_eval(a.merge(overlay(&config_text)?)),
        Command::Slice(a) => commands::cmd_slice(a.merge(overlay(&config_text)?)),
        Command::Volume(a) => commands::cmd_volume(a.merge(overlay(&config_text)?)),
        Command::Appendixa(a) => commands::cmd_appendixa(a.merge(overlay(&config_text)?)),
    }
}
