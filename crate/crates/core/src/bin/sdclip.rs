use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use sdclip::cli::config::Args;

fn main() -> ExitCode {
    if let Err(e) = Args::try_parse() {
        if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
            e.exit();
        }
    }
    let env_seed = std::env::var("SIM_SEED").ok();
    match sdclip::cli::run(std::env::args_os().skip(1), env_seed.as_deref()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sdclip: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
