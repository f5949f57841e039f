//! `ctf-author`: checks challenge packs without running the service.
//!
//! Exit codes: 0 success, 1 parse error or illegal dry-run step, 2 fixture
//! error, 3 I/O failure, 64 bad command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use ctf_core::engine::{parse_script_line, ScriptAction};
use ctf_core::model::{lint_pack, pack_report, PresentedBody};
use ctf_core::{parse_pack, Challenge, ChallengePack, FlagKey, HintOutcome, PackError, Session, StageState};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 1;
pub const EXIT_FIXTURE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "ctf-author", version, about = "Validate, lint, dry-run and report on challenge packs")]
struct Cli {
    /// Seed for option shuffling in dry runs.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and validate a pack, including the code-entry fixtures.
    Validate { pack: PathBuf },
    /// Print authoring findings.
    Lint { pack: PathBuf },
    /// Run a script of actions against one challenge and print the transcript.
    Dryrun {
        pack: PathBuf,
        challenge_id: String,
        /// JSON lines of actions, or an event log from a session file.
        script: PathBuf,
        /// Secret for the flag shown at the end.
        #[arg(long, default_value = "dryrun")]
        secret: String,
    },
    /// Per-type counts, score envelope and expert agreement.
    Report { pack: PathBuf },
}

/// Runs the tool with `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Validate { pack } => validate(pack, out),
        Command::Lint { pack } => lint(pack, out),
        Command::Dryrun {
            pack,
            challenge_id,
            script,
            secret,
        } => dryrun(pack, challenge_id, script, cli.seed, secret, out),
        Command::Report { pack } => report(pack, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure { code, message }) => {
            let _ = writeln!(err, "{message}");
            code
        }
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn io(path: &Path, e: std::io::Error) -> Failure {
        Failure {
            code: EXIT_IO,
            message: format!("error: cannot read {}: {e}", path.display()),
        }
    }

    fn parse(message: String) -> Failure {
        Failure {
            code: EXIT_PARSE,
            message,
        }
    }
}

impl From<PackError> for Failure {
    fn from(e: PackError) -> Failure {
        let code = match e {
            PackError::Parse { .. } => EXIT_PARSE,
            PackError::Fixture { .. } => EXIT_FIXTURE,
        };
        Failure {
            code,
            message: format!("ERROR {e}"),
        }
    }
}

fn load(path: &Path) -> Result<ChallengePack, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    Ok(parse_pack(&text)?)
}

fn validate(path: &Path, out: &mut dyn Write) -> Result<(), Failure> {
    let pack = load(path)?;
    let _ = writeln!(out, "OK: {} challenges", pack.challenges.len());
    for finding in lint_pack(&pack) {
        let _ = writeln!(out, "{finding}");
    }
    Ok(())
}

fn lint(path: &Path, out: &mut dyn Write) -> Result<(), Failure> {
    let findings = lint_pack(&load(path)?);
    if findings.is_empty() {
        let _ = writeln!(out, "no findings");
    }
    for finding in findings {
        let _ = writeln!(out, "{finding}");
    }
    Ok(())
}

fn report(path: &Path, out: &mut dyn Write) -> Result<(), Failure> {
    let pack = load(path)?;
    let _ = write!(out, "{}", pack_report(&pack));
    let findings = lint_pack(&pack);
    let _ = writeln!(out);
    let _ = writeln!(out, "lint findings {}", findings.len());
    for finding in findings {
        let _ = writeln!(out, "  {finding}");
    }
    Ok(())
}

fn describe_question(body: &PresentedBody) -> Vec<String> {
    let numbered = |items: &[String]| -> Vec<String> {
        items.iter().enumerate().map(|(i, s)| format!("    [{i}] {s}")).collect()
    };
    let mut lines = vec![format!("  question: {}", body.guiding_question())];
    match body {
        PresentedBody::Scq { options, .. } | PresentedBody::Mcq { options, .. } => lines.extend(numbered(options)),
        PresentedBody::Csc { selectable_units, .. } => {
            let units: Vec<String> = selectable_units.iter().map(|u| u.to_string()).collect();
            lines.push(format!("  selectable: {}", units.join(", ")));
        }
        PresentedBody::Alr { left, right, .. } => {
            lines.push("  left:".into());
            lines.extend(numbered(left));
            lines.push("  right:".into());
            lines.extend(numbered(right));
        }
        PresentedBody::Teq { .. } | PresentedBody::Cec { .. } => {}
    }
    lines
}

fn dryrun(
    pack_path: &Path,
    challenge_id: &str,
    script_path: &Path,
    seed: u64,
    secret: &str,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let pack = load(pack_path)?;
    let challenge: &Challenge = pack
        .challenge(challenge_id)
        .ok_or_else(|| Failure::parse(format!("ERROR unknown challenge `{challenge_id}`")))?;
    let script = std::fs::read_to_string(script_path).map_err(|e| Failure::io(script_path, e))?;
    let key = FlagKey::new(secret).ok_or_else(|| Failure::parse("ERROR the flag secret must not be empty".into()))?;

    let mut session = Session::start(challenge, "dryrun", "author", seed, 0);
    let _ = writeln!(out, "start {} seed={seed}: {}", challenge.id, session.stage);
    let show_question = |session: &Session, out: &mut dyn Write| {
        if let Some(p) = session.presentation(challenge) {
            for line in describe_question(&p.body) {
                let _ = writeln!(out, "{line}");
            }
        }
    };
    show_question(&session, out);

    let mut step_no = 0;
    for (line_no, line) in script.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let step = parse_script_line(line)
            .map_err(|e| Failure::parse(format!("ERROR script line {}: {e}", line_no + 1)))?;
        let Some(step) = step else { continue };
        step_no += 1;
        let now = step.logical_clock.unwrap_or(session.clock);
        let before_stage = session.stage.clone();
        let before_score = session.score;
        let fail = |e: ctf_core::SessionError| Failure::parse(format!("ERROR step {step_no} (line {}): {e}", line_no + 1));
        let mut details = Vec::new();
        let what = match &step.action {
            ScriptAction::Answer(sub) => {
                let v = session.submit(challenge, sub, now, &key).map_err(fail)?;
                if let Some(d) = v.detail {
                    details.push(format!("missing {}, extra {}", d.missing, d.extra));
                }
                details.extend(v.feedback.iter().map(|f| format!("coach: {f}")));
                if v.accepted { "answer accepted" } else { "answer rejected" }
            }
            ScriptAction::Hint => match session.request_hint(challenge, now).map_err(fail)? {
                HintOutcome::Granted(h) => {
                    details.push(format!("{} ({}, cost {}): {}", h.hint_id, h.kind.as_str(), h.charged, h.text));
                    details.extend(h.url.map(|u| format!("see {u}")));
                    "hint granted"
                }
                HintOutcome::Locked { unlock } => {
                    details.push(unlock);
                    "hint locked"
                }
                HintOutcome::Exhausted => "no hints left",
            },
            ScriptAction::Acknowledge => {
                session.acknowledge(challenge, now, &key).map_err(fail)?;
                "ack"
            }
        };
        let delta = i64::from(session.score) - i64::from(before_score);
        let _ = writeln!(
            out,
            "step {step_no} @{}: {what}, {before_stage} -> {}, score {} ({delta:+})",
            session.clock.max(now), session.stage, session.score
        );
        for d in details {
            let _ = writeln!(out, "  {d}");
        }
        if session.stage != before_stage {
            match &session.stage {
                StageState::Explaining { text, .. } => {
                    let _ = writeln!(out, "  explanation: {text}");
                }
                StageState::Conclusion => {
                    let _ = writeln!(out, "  conclusion: {}", challenge.conclusion.explanation);
                }
                _ => {}
            }
            show_question(&session, out);
        }
    }

    if let Some(flag) = &session.flag {
        let _ = writeln!(out, "flag {flag}");
    }
    match session.stage {
        StageState::Finished { .. } => {
            let _ = writeln!(out, "{}, score={}", session.stage, session.score);
        }
        _ => {
            let _ = writeln!(out, "{} (script ended before finish), score={}", session.stage, session.score);
        }
    }
    Ok(())
}
