//! Session-key chain: a sliding window of semantic digests feeding a
//! password-based KDF.
//!
//! Each endpoint runs its own chain. The key for session index `j` is
//! derived from the digests of the last `T` communicated frames, so two
//! endpoints that agree on digests agree on keys without ever transmitting
//! key material. The salt binds the session index, so replaying an old
//! digest window at a later index yields a different key.

use std::collections::VecDeque;
use std::fmt;

use pbkdf2::pbkdf2_hmac;
use serde::{Deserialize, Serialize};
use sha2::{Sha256, Sha512};

use crate::error::{Error, Result};
use crate::sakp::{SakpConfig, SemanticDigest};

/// Session keys are 128-bit, matching AES-128.
pub const KEY_LEN: usize = 16;

/// Byte joining windowed digests into the KDF password. Keeps
/// `["a","bc"]` and `["ab","c"]` distinct.
pub const DIGEST_SEPARATOR: u8 = 0x1f;

/// A 128-bit session key bound to its session index.
#[derive(Clone, PartialEq, Eq)]
pub struct SessionKey {
    key_bytes: [u8; KEY_LEN],
    session_index: u64,
}

impl SessionKey {
    pub fn new(key_bytes: [u8; KEY_LEN], session_index: u64) -> Self {
        SessionKey {
            key_bytes,
            session_index,
        }
    }

    pub fn bytes(&self) -> &[u8; KEY_LEN] {
        &self.key_bytes
    }

    pub fn session_index(&self) -> u64 {
        self.session_index
    }
}

// Key bytes stay out of Debug output and logs.
impl fmt::Debug for SessionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SessionKey(index={}, 16 bytes)", self.session_index)
    }
}

/// HMAC hash backing PBKDF2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Prf {
    Sha256,
    Sha512,
}

/// PBKDF2 parameters. Both endpoints must configure these identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdfParams {
    /// PBKDF2 iteration count; floor 1,000.
    pub iterations: u32,
    /// Fixed context prefix of the salt.
    pub salt_context: String,
    pub prf: Prf,
    /// Derived-key length; must stay 16 to match AES-128.
    pub output_len: usize,
}

impl Default for KdfParams {
    fn default() -> Self {
        KdfParams {
            iterations: 10_000,
            salt_context: "ESAE-v1".to_string(),
            prf: Prf::Sha256,
            output_len: KEY_LEN,
        }
    }
}

impl KdfParams {
    pub fn validate(&self) -> Result<()> {
        if self.iterations < 1_000 {
            return Err(Error::Config(format!(
                "kdf iterations {} below the 1,000 floor",
                self.iterations
            )));
        }
        if self.output_len != KEY_LEN {
            return Err(Error::Config(format!(
                "kdf output_len {} unsupported; session keys are {KEY_LEN} bytes",
                self.output_len
            )));
        }
        Ok(())
    }
}

/// Derives the session key for `next_index` from a digest window
/// (oldest first, at most the configured T entries).
///
/// Password: digest byte strings joined by [`DIGEST_SEPARATOR`].
/// Salt: `salt_context || next_index` (8-byte big-endian).
pub fn derive_session_key(
    history: &[SemanticDigest],
    next_index: u64,
    kdf: &KdfParams,
) -> Result<SessionKey> {
    kdf.validate()?;
    if history.is_empty() {
        return Err(Error::State("cannot derive a key from an empty history".into()));
    }
    let mut password = Vec::new();
    for (i, digest) in history.iter().enumerate() {
        if i > 0 {
            password.push(DIGEST_SEPARATOR);
        }
        password.extend_from_slice(digest.bytes());
    }
    let mut salt = kdf.salt_context.as_bytes().to_vec();
    salt.extend_from_slice(&next_index.to_be_bytes());

    let mut key_bytes = [0u8; KEY_LEN];
    match kdf.prf {
        Prf::Sha256 => pbkdf2_hmac::<Sha256>(&password, &salt, kdf.iterations, &mut key_bytes),
        Prf::Sha512 => pbkdf2_hmac::<Sha512>(&password, &salt, kdf.iterations, &mut key_bytes),
    }
    Ok(SessionKey::new(key_bytes, next_index))
}

/// Per-endpoint key-chain state: the digest window plus the current key.
#[derive(Debug, Clone)]
pub struct KeychainState {
    history: VecDeque<SemanticDigest>,
    current: SessionKey,
    cfg: SakpConfig,
    kdf: KdfParams,
}

/// Builds a chain at session index 1 from an out-of-band initial key.
pub fn init_keychain(initial_key: &[u8], cfg: SakpConfig, kdf: KdfParams) -> Result<KeychainState> {
    cfg.validate()?;
    kdf.validate()?;
    let key_bytes: [u8; KEY_LEN] = initial_key
        .try_into()
        .map_err(|_| Error::Config(format!("initial key must be {KEY_LEN} bytes, got {}", initial_key.len())))?;
    Ok(KeychainState {
        history: VecDeque::with_capacity(cfg.window as usize),
        current: SessionKey::new(key_bytes, 1),
        cfg,
        kdf,
    })
}

impl KeychainState {
    /// Key for the current session index.
    pub fn current_key(&self) -> &SessionKey {
        &self.current
    }

    pub fn session_index(&self) -> u64 {
        self.current.session_index
    }

    /// Digest window, oldest first.
    pub fn history(&self) -> impl Iterator<Item = &SemanticDigest> {
        self.history.iter()
    }

    pub fn cfg(&self) -> &SakpConfig {
        &self.cfg
    }

    pub fn kdf(&self) -> &KdfParams {
        &self.kdf
    }

    /// Pushes one digest (evicting beyond the window T), bumps the session
    /// index, and re-derives the current key from the new window.
    pub fn advance(&mut self, digest: SemanticDigest) {
        self.history.push_back(digest);
        while self.history.len() > self.cfg.window as usize {
            self.history.pop_front();
        }
        let next_index = self.current.session_index + 1;
        let window: Vec<SemanticDigest> = self.history.iter().cloned().collect();
        // History is non-empty and params were validated at init.
        self.current = derive_session_key(&window, next_index, &self.kdf)
            .expect("advance: derivation over a non-empty validated window");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sakp::GridSpec;

    fn cfg(window: u32) -> SakpConfig {
        SakpConfig {
            top_k: 5,
            grid: GridSpec { rows: 30, cols: 30 },
            num_classes: 80,
            window,
        }
    }

    fn fast_kdf() -> KdfParams {
        KdfParams {
            iterations: 1_000,
            ..KdfParams::default()
        }
    }

    fn d(text: &str) -> SemanticDigest {
        SemanticDigest::from_text(text)
    }

    #[test]
    fn init_contract() {
        let state = init_keychain(&[0u8; 16], cfg(3), fast_kdf()).unwrap();
        assert_eq!(state.session_index(), 1);
        assert_eq!(state.history().count(), 0);
        assert_eq!(state.current_key().bytes(), &[0u8; 16]);
    }

    #[test]
    fn init_is_deterministic_across_endpoints() {
        let a = init_keychain(&[7u8; 16], cfg(1), fast_kdf()).unwrap();
        let b = init_keychain(&[7u8; 16], cfg(1), fast_kdf()).unwrap();
        assert_eq!(a.current_key(), b.current_key());
    }

    #[test]
    fn init_rejects_wrong_key_length() {
        assert!(matches!(
            init_keychain(&[0u8; 15], cfg(1), fast_kdf()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn kdf_params_floor() {
        let kdf = KdfParams {
            iterations: 999,
            ..KdfParams::default()
        };
        assert!(kdf.validate().is_err());
    }

    #[test]
    fn derivation_is_deterministic() {
        let history = [d("0:12|2:465"), d("EMPTY")];
        let k1 = derive_session_key(&history, 3, &fast_kdf()).unwrap();
        let k2 = derive_session_key(&history, 3, &fast_kdf()).unwrap();
        assert_eq!(k1, k2);
    }

    #[test]
    fn index_binding_changes_key() {
        let history = [d("0:12|2:465")];
        let k2 = derive_session_key(&history, 2, &KdfParams::default()).unwrap();
        let k3 = derive_session_key(&history, 3, &KdfParams::default()).unwrap();
        assert_ne!(k2.bytes(), k3.bytes());
        // frozen cross-implementation vectors for the same inputs
        assert_eq!(hex::encode(k2.bytes()), "4d9dae03f690af298e855bc5cd1a0d02");
        assert_eq!(hex::encode(k3.bytes()), "2a44f334667b8d973c017d3d7e968ab0");
    }

    #[test]
    fn golden_vector_default_params() {
        let key = derive_session_key(&[d("0:12|2:465")], 2, &KdfParams::default()).unwrap();
        assert_eq!(hex::encode(key.bytes()), "4d9dae03f690af298e855bc5cd1a0d02");
    }

    #[test]
    fn empty_history_is_a_state_error() {
        assert!(matches!(
            derive_session_key(&[], 2, &fast_kdf()),
            Err(Error::State(_))
        ));
    }

    #[test]
    fn separator_prevents_concatenation_ambiguity() {
        let k_a = derive_session_key(&[d("a"), d("bc")], 2, &fast_kdf()).unwrap();
        let k_b = derive_session_key(&[d("ab"), d("c")], 2, &fast_kdf()).unwrap();
        assert_ne!(k_a.bytes(), k_b.bytes());
    }

    #[test]
    fn window_semantics_t1_depends_only_on_last_digest() {
        let mut a = init_keychain(&[1u8; 16], cfg(1), fast_kdf()).unwrap();
        let mut b = init_keychain(&[2u8; 16], cfg(1), fast_kdf()).unwrap();
        a.advance(d("1:1"));
        a.advance(d("9:9"));
        b.advance(d("5:5"));
        b.advance(d("9:9"));
        // different paths, same trailing digest and index -> same key
        assert_eq!(a.current_key().bytes(), b.current_key().bytes());
        assert_eq!(a.session_index(), 3);
    }

    #[test]
    fn window_eviction_t2() {
        let mut state = init_keychain(&[0u8; 16], cfg(2), fast_kdf()).unwrap();
        state.advance(d("1:1"));
        state.advance(d("2:2"));
        state.advance(d("3:3"));
        let window: Vec<String> = state.history().map(|x| x.to_string()).collect();
        assert_eq!(window, vec!["2:2", "3:3"]);
        assert_eq!(state.session_index(), 4);
        let expect = derive_session_key(&[d("2:2"), d("3:3")], 4, &fast_kdf()).unwrap();
        assert_eq!(state.current_key(), &expect);
    }

    #[test]
    fn reciprocity_over_equal_digest_sequences() {
        let mut sender = init_keychain(&[9u8; 16], cfg(3), fast_kdf()).unwrap();
        let mut receiver = init_keychain(&[9u8; 16], cfg(3), fast_kdf()).unwrap();
        for text in ["0:12|2:465", "EMPTY", "5:0|5:1|7:88", "3:100"] {
            sender.advance(d(text));
            receiver.advance(d(text));
            assert_eq!(sender.current_key(), receiver.current_key());
        }
    }

    #[test]
    fn evicted_digests_have_no_effect() {
        let mut a = init_keychain(&[0u8; 16], cfg(2), fast_kdf()).unwrap();
        let mut b = init_keychain(&[0u8; 16], cfg(2), fast_kdf()).unwrap();
        a.advance(d("old-a"));
        b.advance(d("old-b"));
        for text in ["1:1", "2:2"] {
            a.advance(d(text));
            b.advance(d(text));
        }
        assert_eq!(a.current_key().bytes(), b.current_key().bytes());
    }

    #[test]
    fn single_byte_sensitivity_randomized() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(0x5eed);
        let kdf = fast_kdf();
        for _ in 0..40 {
            let len = rng.gen_range(1..24);
            let text: String = (0..len)
                .map(|_| char::from(rng.gen_range(b'0'..=b'9')))
                .collect();
            let base = derive_session_key(&[d(&text)], 2, &kdf).unwrap();
            let pos = rng.gen_range(0..text.len());
            let mut bytes = text.clone().into_bytes();
            bytes[pos] ^= 0x01;
            let mutated = String::from_utf8(bytes).unwrap();
            if mutated == text {
                continue;
            }
            let changed = derive_session_key(&[d(&mutated)], 2, &kdf).unwrap();
            assert_ne!(base.bytes(), changed.bytes(), "collision for {text} vs {mutated}");
        }
    }
}
