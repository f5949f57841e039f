//! In-process server harness and a scripted HTTP player.
#![allow(dead_code)]

pub mod process;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use ctf_core::model::to_json;
use ctf_core::sample::build_sample_pack;
use ctf_core::{Challenge, ChallengeBody, ChallengePack};
use ctf_service::clock::ManualClock;
use ctf_service::store::{EventStore, FileStore};
use ctf_service::{load_packs, router, App};
use reqwest::blocking::Client;
use reqwest::Method;
use serde_json::{json, Value};

pub const SECRET: &str = "test-secret";
pub const START: u64 = 1_700_000_000;

pub fn tokens() -> BTreeMap<String, String> {
    [("token-alice", "alice"), ("token-bob", "bob"), ("token-carol", "carol")]
        .into_iter()
        .map(|(t, p)| (t.to_string(), p.to_string()))
        .collect()
}

pub fn sample_pack_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../packs/sample.json")
}

pub struct Harness {
    pub base: String,
    pub clock: Arc<ManualClock>,
    pub dir: PathBuf,
    pub app: Arc<App>,
    client: Client,
    // dropped last: shutting the runtime down stops the server
    rt: tokio::runtime::Runtime,
}

#[derive(Debug, Clone)]
pub struct Reply {
    pub status: u16,
    pub body: Value,
    pub text: String,
}

impl Harness {
    pub fn start(dir: &Path) -> Harness {
        Harness::with_store(dir, Arc::new(FileStore::open(dir).unwrap()), Arc::new(ManualClock::new(START)))
    }

    pub fn with_store(dir: &Path, store: Arc<dyn EventStore>, clock: Arc<ManualClock>) -> Harness {
        let content = load_packs(&[sample_pack_path()]).unwrap();
        let app = Arc::new(App::new(content, Some(SECRET), tokens(), store, clock.clone()).unwrap());
        let rt = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(2)
            .enable_all()
            .build()
            .unwrap();
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        listener.set_nonblocking(true).unwrap();
        let addr = listener.local_addr().unwrap();
        let service = router(app.clone());
        rt.spawn(async move {
            let listener = tokio::net::TcpListener::from_std(listener).unwrap();
            axum::serve(listener, service).await.unwrap();
        });
        Harness {
            base: format!("http://{addr}/api/v1"),
            clock,
            dir: dir.to_path_buf(),
            app,
            client: Client::new(),
            rt,
        }
    }

    /// Stops this server and starts a new one over the same storage.
    pub fn restart(self) -> Harness {
        let dir = self.dir.clone();
        let clock = self.clock.clone();
        drop(self);
        Harness::with_store(&dir, Arc::new(FileStore::open(&dir).unwrap()), clock)
    }

    pub fn call(&self, method: Method, path: &str, token: Option<&str>, body: Option<Value>) -> Reply {
        let mut req = self.client.request(method, format!("{}{path}", self.base));
        if let Some(t) = token {
            req = req.bearer_auth(t);
        }
        if let Some(b) = body {
            req = req.json(&b);
        }
        let resp = req.send().unwrap();
        let status = resp.status().as_u16();
        let text = resp.text().unwrap();
        let body = serde_json::from_str(&text).unwrap_or(Value::Null);
        Reply { status, body, text }
    }

    pub fn get(&self, path: &str, token: &str) -> Reply {
        self.call(Method::GET, path, Some(token), None)
    }

    pub fn post(&self, path: &str, token: &str, body: Value) -> Reply {
        self.call(Method::POST, path, Some(token), Some(body))
    }

    pub fn open_session(&self, token: &str, challenge_id: &str) -> (String, Value) {
        let r = self.post("/sessions", token, json!({"challenge_id": challenge_id}));
        assert!(r.status == 201 || r.status == 200, "{}", r.text);
        (r.body["session_id"].as_str().unwrap().to_string(), r.body["view"].clone())
    }
}

pub fn sample() -> ChallengePack {
    build_sample_pack()
}

pub fn write_pack(dir: &Path, pack: &ChallengePack) -> PathBuf {
    let path = dir.join("pack.json");
    std::fs::write(&path, to_json(pack)).unwrap();
    path
}

/// The question the player currently faces, in the original (authored) form.
pub fn active_question<'c>(ch: &'c Challenge, stage: &str) -> Option<&'c ChallengeBody> {
    match stage {
        "intro_quiz" => ch.intro.as_ref().and_then(|i| i.quiz.as_ref()),
        "challenge" => Some(&ch.body),
        "conclusion_question" => match &ch.correct_branch {
            ctf_core::model::CorrectBranchPolicy::ConcludeThenFinish {
                additional_question: Some(q),
            } => Some(q),
            _ => None,
        },
        _ => None,
    }
}

fn position(shown: &Value, text: &str) -> usize {
    shown
        .as_array()
        .unwrap()
        .iter()
        .position(|v| v.as_str() == Some(text))
        .expect("presented list contains every authored item")
}

/// A submission for `body` expressed against the presented `view_body`,
/// mapping options back by their text the way a client would.
pub fn submission(body: &ChallengeBody, view_body: &Value, correct: bool) -> Value {
    match body {
        ChallengeBody::Scq {
            options, correct_index, ..
        } => {
            let pick = if correct { *correct_index } else { (correct_index + 1) % options.len() };
            json!({"type": "scq", "chosen_index": position(&view_body["options"], &options[pick])})
        }
        ChallengeBody::Mcq {
            options,
            correct_indices,
            ..
        } => {
            let mut chosen: Vec<usize> = correct_indices
                .iter()
                .map(|&i| position(&view_body["options"], &options[i]))
                .collect();
            if !correct {
                chosen.pop();
            }
            json!({"type": "mcq", "chosen_indices": chosen})
        }
        ChallengeBody::Teq { accepted_answers, .. } => {
            let text = if correct { accepted_answers[0].as_str() } else { "integer overflow" };
            json!({"type": "teq", "text": text})
        }
        ChallengeBody::Csc { correct_units, .. } => {
            let units: Vec<_> = if correct { correct_units.iter().collect() } else { vec![] };
            json!({"type": "csc", "chosen_units": units})
        }
        ChallengeBody::Cec {
            starter_code, fixtures, ..
        } => {
            let code = if correct { &fixtures.known_good[0] } else { starter_code };
            json!({"type": "cec", "code": code})
        }
        ChallengeBody::Alr {
            right, answer_map, ..
        } => {
            let mut map: BTreeMap<String, usize> = answer_map
                .iter()
                .map(|(l, r)| (l.to_string(), position(&view_body["right"], &right[*r])))
                .collect();
            if !correct {
                let first = map.get_mut("0").unwrap();
                *first = (*first + 1) % right.len();
            }
            json!({"type": "alr", "proposed_map": map})
        }
    }
}

/// Every response of one playthrough, with the stage of the view it carried.
pub struct Playthrough {
    pub replies: Vec<Reply>,
    pub final_view: Value,
}

/// Plays `ch` through the API: wrong answers first (`wrong_first` of them
/// in the main challenge), hints whenever offered, then correct answers.
pub fn play(h: &Harness, token: &str, ch: &Challenge, wrong_first: usize) -> Playthrough {
    let mut replies = Vec::new();
    let created = h.post("/sessions", token, json!({"challenge_id": ch.id}));
    let id = created.body["session_id"].as_str().unwrap().to_string();
    replies.push(created);
    let mut wrong_left = wrong_first;
    let mut hinted = false;
    for _ in 0..50 {
        let view = h.get(&format!("/sessions/{id}"), token);
        let stage = view.body["stage"].as_str().unwrap().to_string();
        let body = view.body["body"].clone();
        replies.push(view);
        h.clock.advance(45);
        let path = |action: &str| format!("/sessions/{id}/{action}");
        let reply = match stage.as_str() {
            "finished" => break,
            "intro" | "explaining" | "conclusion" => h.post(&path("ack"), token, json!({})),
            "challenge" if !hinted => {
                hinted = true;
                h.post(&path("hint"), token, json!({}))
            }
            _ => {
                let q = active_question(ch, &stage).expect("question stage");
                let correct = stage != "challenge" || wrong_left == 0;
                if stage == "challenge" && wrong_left > 0 {
                    wrong_left -= 1;
                    hinted = false;
                }
                h.post(&path("answer"), token, json!({"submission": submission(q, &body, correct)}))
            }
        };
        assert!(reply.status == 200, "{}: {}", ch.id, reply.text);
        replies.push(reply);
    }
    let final_view = h.get(&format!("/sessions/{id}"), token).body;
    Playthrough { replies, final_view }
}

/// Byte sequences that must never reach a player before the session ends.
pub fn secret_needles(ch: &Challenge) -> Vec<String> {
    let mut needles: Vec<String> = [
        "correct_index",
        "correct_indices",
        "correct_units",
        "answer_map",
        "accepted_answers",
        "rule_set",
        "rule_id",
        "known_good",
        "known_bad",
        "fixtures",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let mut bodies = vec![&ch.body];
    bodies.extend(active_question(ch, "intro_quiz"));
    bodies.extend(active_question(ch, "conclusion_question"));
    for body in bodies {
        match body {
            ChallengeBody::Teq { accepted_answers, .. } => {
                needles.extend(accepted_answers.iter().map(|a| a.to_lowercase()));
            }
            ChallengeBody::Cec { fixtures, rule_set, .. } => {
                for good in &fixtures.known_good {
                    needles.push(good.clone());
                    let escaped = serde_json::to_string(good).unwrap();
                    needles.push(escaped.trim_matches('"').to_string());
                }
                needles.push(serde_json::to_string(rule_set).unwrap());
            }
            _ => {}
        }
    }
    needles
}

/// Needles found in `text` (compared case-insensitively).
pub fn leaks(text: &str, needles: &[String]) -> Vec<String> {
    let lower = text.to_lowercase();
    needles
        .iter()
        .filter(|n| lower.contains(&n.to_lowercase()))
        .cloned()
        .collect()
}
