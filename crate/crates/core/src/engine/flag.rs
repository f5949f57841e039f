use std::fmt;

use hmac::{Hmac, KeyInit, Mac};
use sha2::Sha256;

/// Server-side secret used to derive flags. Never printed.
#[derive(Clone)]
pub struct FlagKey(Vec<u8>);

impl FlagKey {
    pub fn new(secret: impl AsRef<[u8]>) -> Option<FlagKey> {
        let bytes = secret.as_ref();
        (!bytes.is_empty()).then(|| FlagKey(bytes.to_vec()))
    }
}

impl fmt::Debug for FlagKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("FlagKey(..)")
    }
}

/// `FLAG{` + first 16 hex digits of HMAC-SHA256(key, session, challenge) + `}`.
/// Both ids are length-prefixed so distinct pairs never share an input.
pub fn derive_flag(key: &FlagKey, session_id: &str, challenge_id: &str) -> String {
    let mut mac = Hmac::<Sha256>::new_from_slice(&key.0).expect("HMAC accepts any key length");
    mac.update(&(session_id.len() as u64).to_be_bytes());
    mac.update(session_id.as_bytes());
    mac.update(&(challenge_id.len() as u64).to_be_bytes());
    mac.update(challenge_id.as_bytes());
    let digest = mac.finalize().into_bytes();
    format!("FLAG{{{}}}", &hex::encode(digest)[..16])
}
