mod args;
mod commands;
mod config;
mod resolve;

use clap::{CommandFactory, FromArgMatches};

use args::{Cli, Command};
use commands::Context;
use config::Config;

fn main() {
    let version: &'static str = Box::leak(format!("{} (revision {})", env!("CARGO_PKG_VERSION"), cutquad::REVISION).into_boxed_str());
    let matches = Cli::command().version(version).get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let config = match cli.config.as_deref().map(Config::load).transpose() {
        Ok(c) => c.unwrap_or_default(),
        Err(msg) => std::process::exit(commands::finish(Err(msg))),
    };
    let ctx = Context {
        config,
        catalog_dir: cli.catalog_dir.clone(),
        command_line: std::env::args().collect::<Vec<_>>().join(" "),
    };
    let result = match &cli.command {
        Command::List(a) => commands::list(a, &ctx),
        Command::Run(a) => commands::run(a, &ctx, false),
        Command::Convergence(a) => commands::run(a, &ctx, true),
        Command::Shift(a) => commands::shift(a, &ctx),
        Command::Compare(a) => commands::compare(a, &ctx),
        Command::Baseline(a) => commands::baseline(a, &ctx),
        Command::Report(a) => commands::report(a, &ctx),
        Command::CiInit(a) => commands::ci_init(a, &ctx),
    };
    std::process::exit(commands::finish(result));
}
