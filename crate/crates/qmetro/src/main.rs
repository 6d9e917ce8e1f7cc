use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use qmetro::{commands, render, thread_cap, Cli, CliResult};

fn execute(cli: &Cli) -> CliResult<()> {
    let var = std::env::var("QMETRO_THREADS").ok();
    if let Some(n) = thread_cap(var.as_deref())? {
        // only fails if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let table = commands::run(cli)?;
    let text = render(&table, cli.format);
    match &cli.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qmetro: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
