//! Runs the real `ctf-server` binary.

use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};
use std::sync::mpsc;
use std::time::Duration;

pub const BIN: &str = env!("CARGO_BIN_EXE_ctf-server");

pub fn write_config(dir: &Path, secret: Option<&str>, pack: &Path) -> PathBuf {
    let mut text = format!(
        "port = 0\npacks = [{:?}]\nstorage_dir = {:?}\n",
        pack.display().to_string(),
        dir.join("data").display().to_string()
    );
    if let Some(s) = secret {
        text.push_str(&format!("secret = {s:?}\n"));
    }
    text.push_str("\n[tokens]\n\"token-alice\" = \"alice\"\n\"token-bob\" = \"bob\"\n");
    let path = dir.join("server.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn command(config: &Path) -> Command {
    let mut cmd = Command::new(BIN);
    cmd.arg("--config")
        .arg(config)
        .env_remove("CTF_SERVER_SECRET")
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    cmd
}

pub struct ServerProcess {
    child: Child,
    pub base: String,
}

impl ServerProcess {
    /// Starts the server and waits for its `listening on` line.
    pub fn spawn(config: &Path) -> Result<ServerProcess, String> {
        let mut child = command(config).spawn().map_err(|e| e.to_string())?;
        let stdout = child.stdout.take().unwrap();
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            for line in BufReader::new(stdout).lines().map_while(Result::ok) {
                if let Some(addr) = line.strip_prefix("listening on ") {
                    let _ = tx.send(addr.to_string());
                }
            }
        });
        match rx.recv_timeout(Duration::from_secs(30)) {
            Ok(addr) => Ok(ServerProcess {
                child,
                base: format!("http://{addr}/api/v1"),
            }),
            Err(_) => {
                let _ = child.kill();
                let mut err = String::new();
                if let Some(mut e) = child.stderr.take() {
                    let _ = e.read_to_string(&mut err);
                }
                Err(format!("server did not start: {err}"))
            }
        }
    }

    /// SIGKILL, no chance to clean up.
    pub fn kill(mut self) {
        self.child.kill().unwrap();
        self.child.wait().unwrap();
    }
}

impl Drop for ServerProcess {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Runs a server expected to refuse to start; returns its exit code and
/// standard error.
pub fn run_failing(config: &Path) -> (Option<i32>, String) {
    let mut child = command(config).spawn().unwrap();
    for _ in 0..300 {
        if let Some(status) = child.try_wait().unwrap() {
            let mut err = String::new();
            child.stderr.take().unwrap().read_to_string(&mut err).unwrap();
            return (status.code(), err);
        }
        std::thread::sleep(Duration::from_millis(100));
    }
    let _ = child.kill();
    (None, "still running".to_string())
}
