use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;

use ffkakeya_cli::{exit, exit_code, run, ExperimentConfig, Format};

fn main() -> ExitCode {
    let config = match ExperimentConfig::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE as u8 } else { exit::OK as u8 });
        }
    };
    let report = match run(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("ffkakeya: {e}");
            return ExitCode::from(exit_code(&e) as u8);
        }
    };
    let sink: Box<dyn Write> = match &config.out {
        Some(path) => match File::create(path) {
            Ok(f) => Box::new(BufWriter::new(f)),
            Err(e) => {
                eprintln!("ffkakeya: cannot write {}: {e}", path.display());
                return ExitCode::from(exit::USAGE as u8);
            }
        },
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let written = match config.format {
        Format::Json => report.write_json(sink).map_err(|e| e.to_string()),
        Format::Csv => report.write_csv(sink).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        eprintln!("ffkakeya: {e}");
        return ExitCode::from(exit::USAGE as u8);
    }
    for f in report.failures() {
        eprintln!("FAILED {} {} {}", f.experiment, f.op, f.inputs);
    }
    eprintln!("{}/{} assertions passed", report.summary.passed, report.summary.asserted);
    ExitCode::from(if report.all_passed() { exit::OK } else { exit::FAILED } as u8)
}
