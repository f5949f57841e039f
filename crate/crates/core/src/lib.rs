//! Defensive secure-coding CTF challenges: the authored content model, the
//! six graders, and the session engine that walks a player through the
//! introduction, challenge, logic and conclusion stages.
//!
//! ```
//! use ctf_core::{sample::build_sample_pack, FlagKey, Session};
//!
//! let pack = build_sample_pack();
//! let challenge = &pack.challenges[0];
//! let session = Session::start(challenge, "session-1", "alice", 42, 0);
//! let view = ctf_core::view::player_view(&session, challenge);
//! assert_eq!(view.challenge_id, challenge.id);
//! # let _ = FlagKey::new("secret");
//! ```

pub mod engine;
pub mod grader;
pub mod model;
pub mod sample;
pub mod view;

pub use engine::{
    compute_score, issue_flag, CorruptLog, FlagKey, HintOutcome, LoggedEvent, Outcome, Session, SessionError,
    SessionEvent, StageState,
};
pub use grader::{grade, GradeError, Submission, Verdict};
pub use model::{parse_pack, Challenge, ChallengeBody, ChallengePack, ChallengeType, PackError};
