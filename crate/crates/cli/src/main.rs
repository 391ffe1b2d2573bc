use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use commlab::exercise::{load_manifest, validate_manifest, Course, TaskManifest};
use commlab::grader::{Grader, Seeds};
use commlab_service::ServiceConfig;

#[derive(Parser)]
#[command(name = "commlab", version, about = "Lab exercise authoring and grading tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check every task of a course against the authoring rules.
    Validate {
        course: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Execute a script under a task's environment and dump its results.
    Run {
        task: PathBuf,
        script: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        json: bool,
    },
    /// Grade a script against a task. Exits 0 iff it passes.
    Check {
        task: PathBuf,
        script: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        json: bool,
    },
    /// Serve the HTTP API described by a configuration file.
    Serve {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { course, json } => validate(&course, json),
        Command::Run {
            task,
            script,
            seed,
            json,
        } => run(&task, &script, seed, json),
        Command::Check {
            task,
            script,
            seed,
            json,
        } => check(&task, &script, seed, json),
        Command::Serve { config } => serve(&config),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn json_text<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn exit(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn load(task: &Path, script: &Path, grader: &Grader) -> Result<(TaskManifest, String), String> {
    let m = load_manifest(task, grader).map_err(|e| e.to_string())?;
    let source = std::fs::read_to_string(script).map_err(|e| format!("{}: {e}", script.display()))?;
    Ok((m, source))
}

fn validate(root: &Path, json: bool) -> Result<ExitCode, String> {
    let grader = Grader::default();
    let course = Course::load(root, &grader).map_err(|e| e.to_string())?;
    let reports: Vec<_> = course.tasks.values().map(|m| validate_manifest(m, &grader)).collect();
    let ok = reports.iter().all(|r| r.valid());
    if json {
        emit(&json_text(&reports));
    } else {
        let mut text = String::new();
        for r in &reports {
            if r.valid() {
                let _ = writeln!(text, "{} ok", r.task);
            }
            for f in r.failures() {
                let _ = writeln!(text, "{} FAIL {}: {}", r.task, f.rule, f.detail);
            }
        }
        let _ = writeln!(
            text,
            "{} of {} tasks valid",
            reports.iter().filter(|r| r.valid()).count(),
            reports.len()
        );
        emit(&text);
    }
    Ok(exit(ok))
}

fn run(task: &Path, script: &Path, seed: Option<u64>, json: bool) -> Result<ExitCode, String> {
    let grader = Grader::default();
    let (m, source) = load(task, script, &grader)?;
    let run = grader
        .run(&m, &source, seed.unwrap_or_else(rand_seed))
        .map_err(|e| e.to_string())?;
    let out = &run.outcome;
    if json {
        emit(&json_text(out));
    } else {
        let mut text = out.printed.clone();
        for f in &out.figures {
            text.push_str(&f.dump());
        }
        for (name, v) in out.workspace.visible() {
            let _ = writeln!(text, "{name} = {}", v.summary(16));
        }
        emit(&text);
        if let Some(e) = &out.error {
            eprintln!("{e}");
        }
    }
    Ok(exit(out.is_ok()))
}

fn check(task: &Path, script: &Path, seed: Option<u64>, json: bool) -> Result<ExitCode, String> {
    let grader = Grader::default();
    let (m, source) = load(task, script, &grader)?;
    let seeds = seed.map(Seeds::from_student).unwrap_or_else(Seeds::fresh);
    let report = grader.grade(&m, &source, seeds).map_err(|e| e.to_string())?;
    if json {
        emit(&json_text(&report));
    } else {
        emit(&report.render_text());
    }
    Ok(exit(report.passed()))
}

fn serve(config: &Path) -> Result<ExitCode, String> {
    let cfg = ServiceConfig::load(config).map_err(|e| e.to_string())?;
    commlab_service::serve(&cfg, |addr, state| {
        emit(&format!(
            "commlab: serving \"{}\" ({} tasks) on http://{addr}/api/v1\n",
            state.course().config.title,
            state.course().tasks.len()
        ));
    })
    .map_err(|e| e.to_string())?;
    Ok(ExitCode::SUCCESS)
}

fn rand_seed() -> u64 {
    Seeds::fresh().student
}
