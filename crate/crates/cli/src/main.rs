// Copyright 2026 The spinmem Authors
// SPDX-License-Identifier: Apache-2.0

//! `spinmem` command-line front end.
//!
//! Exit codes: 0 success, 2 invalid input, 3 fit did not converge,
//! 1 I/O failure.

mod args;
mod config;
mod output;
mod run;

use clap::{ArgMatches, CommandFactory, FromArgMatches};

use args::{Cli, Command};
use config::{echo, invalid, merge, RunResult};
use output::RunMeta;

fn main() {
    let matches = match Cli::command().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            std::process::exit(e.exit_code());
        }
    };
    let cli = Cli::from_arg_matches(&matches).unwrap_or_else(|e| e.exit());
    if let Err(f) = execute(cli, &matches) {
        eprintln!("error: {f}");
        std::process::exit(f.exit_code());
    }
}

fn init_threads(flag: Option<usize>) -> RunResult<()> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("SPINMEM_THREADS") {
            Ok(s) => Some(
                s.trim().parse().map_err(|_| invalid(format!("SPINMEM_THREADS must be a positive integer, got {s:?}")))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(invalid("thread count must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| invalid(format!("cannot start {n} threads: {e}")))?;
    }
    Ok(())
}

fn execute(cli: Cli, matches: &ArgMatches) -> RunResult<()> {
    init_threads(cli.threads)?;
    let config = cli.config.as_deref().map(config::load).transpose()?;
    let cfg = config.as_ref();
    let name = cli.command.name();
    let (_, sub) = matches.subcommand().expect("a subcommand is required");
    let (seed, echoed, art) = match &cli.command {
        Command::Simulate(a) => {
            let mut a = merge(a, sub, cfg, name)?;
            run::prepare_simulate(&mut a);
            (a.seed, echo(name, &a), run::simulate(&a)?)
        }
        Command::FitOdmr(a) => {
            let a = merge(a, sub, cfg, name)?;
            (a.seed, echo(name, &a), run::fit_odmr_cmd(&a)?)
        }
        Command::Decay(a) => {
            let a = merge(a, sub, cfg, name)?;
            (a.seed.filter(|_| a.simulate), echo(name, &a), run::decay(&a)?)
        }
        Command::FitTauC(a) => {
            let a = merge(a, sub, cfg, name)?;
            (None, echo(name, &a), run::fit_tau_c(&a)?)
        }
        Command::FidelityMap(a) => {
            let a = merge(a, sub, cfg, name)?;
            (None, echo(name, &a), run::fidelity(&a)?)
        }
        Command::DutyCycle(a) => {
            let a = merge(a, sub, cfg, name)?;
            (None, echo(name, &a), run::duty(&a)?)
        }
        Command::OptimizePulse(a) => {
            let a = merge(a, sub, cfg, name)?;
            (a.seed, echo(name, &a), run::optimize(&a)?)
        }
        Command::Spectrum(a) => {
            let a = merge(a, sub, cfg, name)?;
            (None, echo(name, &a), run::spectrum(&a)?)
        }
    };
    println!("{}", art.summary);
    if let Some(prefix) = &cli.out {
        output::write(prefix, &RunMeta { command: name, seed, config: echoed }, &art)?;
    }
    Ok(())
}
