use std::path::PathBuf;
use std::process::ExitCode;

use rectlimsup_cli::config::{parse_config_for_task, TaskKind};
use rectlimsup_cli::report::emit_reports;
use rectlimsup_cli::run::run_experiment;

const USAGE: &str = "usage: rectlimsup <measure|ubiquity|series|chung-erdos|hits|scaling-probe> \
--config <path> --out <dir> [--seed <u64>]";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn run(args: &[String]) -> Result<(), String> {
    let sub = args.first().ok_or(USAGE)?;
    let task = match sub.as_str() {
        "measure" => TaskKind::Measure,
        "ubiquity" => TaskKind::Ubiquity,
        "series" => TaskKind::Series,
        "chung-erdos" => TaskKind::ChungErdos,
        "hits" => TaskKind::Hits,
        "scaling-probe" => TaskKind::ScalingProbe,
        other => return Err(format!("unknown subcommand `{other}`\n{USAGE}")),
    };
    let mut config_path: Option<PathBuf> = None;
    let mut out_dir: Option<PathBuf> = None;
    let mut seed: Option<u64> = None;
    let mut it = args[1..].iter();
    while let Some(flag) = it.next() {
        match flag.as_str() {
            "--config" => config_path = Some(PathBuf::from(it.next().ok_or(USAGE)?)),
            "--out" => out_dir = Some(PathBuf::from(it.next().ok_or(USAGE)?)),
            "--seed" => {
                seed = Some(
                    it.next()
                        .ok_or(USAGE)?
                        .parse::<u64>()
                        .map_err(|e| format!("--seed: {e}"))?,
                )
            }
            other => return Err(format!("unknown flag `{other}`\n{USAGE}")),
        }
    }
    let config_path = config_path.ok_or(USAGE)?;
    let out_dir = out_dir.ok_or(USAGE)?;
    let text = std::fs::read_to_string(&config_path)
        .map_err(|e| format!("{}: {e}", config_path.display()))?;
    let cfg = parse_config_for_task(&text, seed, Some(task)).map_err(|e| e.to_string())?;
    let bundle = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let files =
        emit_reports(&bundle, &out_dir).map_err(|e| format!("{}: {e}", out_dir.display()))?;
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
