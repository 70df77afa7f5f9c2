use std::process::ExitCode;

use clap::Parser;
use sgpdf::cache::CacheStatus;
use sgpdf::cli::{Cli, Command};
use sgpdf::commands;
use sgpdf::io::{format_order_report, sig6};
use sgpdf::Result;

fn warn(ws: &[String]) {
    for w in ws {
        eprintln!("warning: {w}");
    }
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = cli.command.args().resolve()?;
    match &cli.command {
        Command::Kl(_) => {
            let out = commands::kl(&cfg)?;
            warn(&out.warnings);
            let how = match out.cache {
                CacheStatus::Hit => "loaded from",
                CacheStatus::Stored => "stored in",
            };
            println!("eigenpairs {how} {}", out.cache_path.display());
            for (n, l) in out.eigenvalues.iter().enumerate() {
                println!("lambda_{} = {}", n + 1, sig6(*l));
            }
        }
        Command::Moments(_) => {
            let out = commands::moments(&cfg)?;
            warn(&out.warnings);
            print!("{}", out.table.render());
        }
        Command::Estimate(_) => {
            let out = commands::estimate(&cfg)?;
            warn(&out.warnings);
            for r in &out.reports {
                print!("{}", format_order_report(r));
            }
            for s in &out.chosen {
                println!("selected {}", s.label());
            }
        }
        Command::Compare(_) => {
            let out = commands::compare(&cfg)?;
            warn(&out.warnings);
            println!("{:>3} {:>13} {:>13} {:>13} {:>9}", "l", "SG", "MC", "MC se", "z");
            for l in 1..=out.z_scores.len() {
                println!(
                    "{:>3} {:>13} {:>13} {:>13} {:>9.2}",
                    l,
                    sig6(out.sg.raw.get(l)),
                    sig6(out.mc.raw.get(l)),
                    sig6(out.mc.std_errors.as_ref().expect("mc table")[l - 1]),
                    out.z_scores[l - 1]
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
