//! Append-only per-session event logs.

use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use ctf_core::LoggedEvent;

pub trait EventStore: Send + Sync + 'static {
    /// Appends `events` durably; returns only once they are on disk.
    fn append(&self, session_id: &str, events: &[LoggedEvent]) -> io::Result<()>;

    /// Every stored log, keyed by session id.
    fn load_all(&self) -> io::Result<Vec<(String, Vec<LoggedEvent>)>>;

    /// Drops every event from position `keep` on.
    fn truncate(&self, session_id: &str, keep: usize) -> io::Result<()>;
}

/// One `<session_id>.jsonl` file per session.
#[derive(Debug)]
pub struct FileStore {
    dir: PathBuf,
}

impl FileStore {
    pub fn open(dir: &Path) -> io::Result<FileStore> {
        let dir = dir.join("sessions");
        fs::create_dir_all(&dir)?;
        Ok(FileStore { dir })
    }

    fn path(&self, session_id: &str) -> PathBuf {
        self.dir.join(format!("{session_id}.jsonl"))
    }

    fn write_lines(&self, session_id: &str, lines: &str, create: bool) -> io::Result<()> {
        let mut file = OpenOptions::new()
            .create(create)
            .append(true)
            .open(self.path(session_id))?;
        file.write_all(lines.as_bytes())?;
        file.sync_data()?;
        if create {
            // make the new directory entry durable too
            File::open(&self.dir)?.sync_all()?;
        }
        Ok(())
    }
}

fn invalid(path: &Path, line: usize, msg: impl std::fmt::Display) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, format!("{}:{line}: {msg}", path.display()))
}

impl EventStore for FileStore {
    fn append(&self, session_id: &str, events: &[LoggedEvent]) -> io::Result<()> {
        let lines: String = events.iter().map(|e| e.to_json_line(session_id) + "\n").collect();
        let create = events.first().is_some_and(|e| e.seq == 0);
        self.write_lines(session_id, &lines, create)
    }

    fn load_all(&self) -> io::Result<Vec<(String, Vec<LoggedEvent>)>> {
        let mut logs = Vec::new();
        for entry in fs::read_dir(&self.dir)? {
            let path = entry?.path();
            let Some(session_id) = path
                .file_name()
                .and_then(|n| n.to_str())
                .and_then(|n| n.strip_suffix(".jsonl"))
                .map(str::to_string)
            else {
                continue;
            };
            let mut text = fs::read_to_string(&path)?;
            // a write cut short by a crash leaves a partial last line
            let complete = text.rfind('\n').map_or(0, |i| i + 1);
            if complete < text.len() {
                text.truncate(complete);
                OpenOptions::new().write(true).open(&path)?.set_len(complete as u64)?;
            }
            let mut events = Vec::new();
            for (i, line) in text.lines().enumerate() {
                let (sid, event) = LoggedEvent::from_json_line(line).map_err(|e| invalid(&path, i + 1, e))?;
                if sid != session_id {
                    return Err(invalid(&path, i + 1, format!("event for session {sid}")));
                }
                events.push(event);
            }
            logs.push((session_id, events));
        }
        logs.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(logs)
    }

    fn truncate(&self, session_id: &str, keep: usize) -> io::Result<()> {
        let path = self.path(session_id);
        let text = fs::read_to_string(&path)?;
        let len: usize = text.split_inclusive('\n').take(keep).map(str::len).sum();
        let file = OpenOptions::new().write(true).open(&path)?;
        file.set_len(len as u64)?;
        file.sync_data()
    }
}
