use std::process::ExitCode;

use clap::Parser;

use etalab::{execute, manifest, oracle_lines, output, Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (outcome, cfg) = match execute(&cli) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let out = cli.global.out_dir();
    if let Err(e) = output::write_run(&out, &outcome.report, &manifest(&cfg, &cli.global, &out), &outcome.timings) {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    if matches!(cli.command, Command::EtaOracle { .. }) {
        for line in oracle_lines(&outcome.report) {
            println!("{line}");
        }
    }
    let r = &outcome.report;
    let failures: Vec<_> = r.failures().collect();
    println!("{}: {} of {} checks passed; report in {}", r.suite, r.checks.len() - failures.len(), r.checks.len(), out.display());
    for (suite, d) in &outcome.timings {
        println!("  {suite}: {:.1?}", d);
    }
    if failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        for c in failures {
            eprintln!("FAILED {}: residual {:.3e}, tolerance {:.1e}{}", c.name, c.residual, c.tolerance, if c.note.is_empty() { String::new() } else { format!(" ({})", c.note) });
        }
        ExitCode::FAILURE
    }
}
