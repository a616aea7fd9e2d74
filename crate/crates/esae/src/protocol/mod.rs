//! Sender and receiver state machines running the full loop: encrypt,
//! transmit, decrypt, digest, advance the keychain.
//!
//! The sender digests the *source* frame; the receiver digests its *lossy
//! reconstruction*. That asymmetry is the whole point: keys stay equal
//! exactly as long as the digest pipeline absorbs the channel's bit-level
//! damage. A key mismatch surfaces as an authentication failure, after
//! which the receiver either keeps going with a reserved placeholder digest
//! (and the mismatch cascades) or requests re-initialization.

pub mod tcp;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::channel_sim::{self, ChannelParams};
use crate::error::{Error, Result};
use crate::keychain::{init_keychain, KeychainState, SessionKey, KEY_LEN};
use crate::sakp::{canonical_digest, FrameDetections, SakpConfig, SemanticDigest};
use crate::secure_channel::{
    decode_wire, decrypt_payload, encode_wire, encrypt_payload, DecryptOutcome, SemanticPayload,
};
use crate::keychain::KdfParams;
use crate::seeds;

/// Digest pushed for a frame the receiver could not authenticate; stands in
/// for a garbage reconstruction and is outside the canonical digest grammar.
pub const AUTH_FAIL_DIGEST: &str = "AUTHFAIL";

/// Out-of-band source of the initial session key. Both endpoints must
/// observe identical bytes per invocation; the secure exchange itself
/// (e.g. via asymmetric cryptography) is abstracted away.
pub trait InitialKeyProvider: Send {
    fn next_shared_key(&mut self) -> [u8; KEY_LEN];
}

/// Same fixed key on every invocation. Test use only: resyncing onto a
/// fixed key reuses (key, nonce) pairs.
pub struct FixedKeyProvider(pub [u8; KEY_LEN]);

impl InitialKeyProvider for FixedKeyProvider {
    fn next_shared_key(&mut self) -> [u8; KEY_LEN] {
        self.0
    }
}

/// Deterministic stream of fresh keys; endpoints built from the same seed
/// observe the same stream.
pub struct SeededKeyProvider(ChaCha12Rng);

impl SeededKeyProvider {
    pub fn new(seed: u64) -> Self {
        SeededKeyProvider(ChaCha12Rng::seed_from_u64(seed))
    }
}

impl InitialKeyProvider for SeededKeyProvider {
    fn next_shared_key(&mut self) -> [u8; KEY_LEN] {
        let mut key = [0u8; KEY_LEN];
        self.0.fill_bytes(&mut key);
        key
    }
}

/// What a receiver does after an authentication failure.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResyncPolicy {
    /// Keep going with [`AUTH_FAIL_DIGEST`]; the mismatch cascades.
    #[default]
    None,
    /// Request re-initialization of both keychains from the providers.
    ReinitOnFailure,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndpointStats {
    pub frames_ok: u64,
    pub auth_failures: u64,
    pub resyncs: u64,
}

/// Sending side: seal the frame under the current key, then digest the
/// source frame and rotate the key.
pub struct SenderEndpoint {
    keychain: KeychainState,
    provider: Box<dyn InitialKeyProvider>,
    stats: EndpointStats,
}

/// One sealed frame plus what the sender recorded about it.
#[derive(Debug, Clone)]
pub struct SentFrame {
    pub wire: Vec<u8>,
    pub session_index: u64,
    pub digest: SemanticDigest,
}

impl SenderEndpoint {
    pub fn new(
        cfg: SakpConfig,
        kdf: KdfParams,
        mut provider: Box<dyn InitialKeyProvider>,
    ) -> Result<Self> {
        let key = provider.next_shared_key();
        Ok(SenderEndpoint {
            keychain: init_keychain(&key, cfg, kdf)?,
            provider,
            stats: EndpointStats::default(),
        })
    }

    pub fn current_key(&self) -> &SessionKey {
        self.keychain.current_key()
    }

    pub fn session_index(&self) -> u64 {
        self.keychain.session_index()
    }

    pub fn stats(&self) -> EndpointStats {
        self.stats
    }

    /// Seals `frame` for the wire and advances the keychain with the digest
    /// of the source frame.
    pub fn step(&mut self, frame: &FrameDetections) -> Result<SentFrame> {
        let session_index = self.keychain.session_index();
        let payload = SemanticPayload::new(serde_json::to_vec(frame).map_err(|e| {
            Error::InputDomain(format!("frame {} does not serialize: {e}", frame.frame_index))
        })?)?;
        let sealed = encrypt_payload(&payload, self.keychain.current_key())?;
        let wire = encode_wire(&sealed);
        let digest = canonical_digest(frame, self.keychain.cfg())?;
        self.keychain.advance(digest.clone());
        self.stats.frames_ok += 1;
        Ok(SentFrame {
            wire,
            session_index,
            digest,
        })
    }

    /// Re-initializes from the provider's next shared key.
    pub fn resync(&mut self) -> Result<()> {
        let key = self.provider.next_shared_key();
        self.keychain = init_keychain(
            &key,
            self.keychain.cfg().clone(),
            self.keychain.kdf().clone(),
        )?;
        self.stats.resyncs += 1;
        Ok(())
    }
}

/// Receiving side: decode, decrypt, reconstruct through the lossy channel,
/// digest the reconstruction, rotate the key.
pub struct ReceiverEndpoint {
    keychain: KeychainState,
    provider: Box<dyn InitialKeyProvider>,
    policy: ResyncPolicy,
    stats: EndpointStats,
}

/// Result of one receiver step.
#[derive(Debug, Clone, PartialEq)]
pub enum ReceiverOutcome {
    /// Authenticated and reconstructed; keychain advanced with the digest
    /// of the (distorted) reconstruction.
    Reconstructed {
        frame: FrameDetections,
        digest: SemanticDigest,
        session_index: u64,
    },
    /// Authentication failed under [`ResyncPolicy::None`]; keychain advanced
    /// with [`AUTH_FAIL_DIGEST`].
    AuthFailed { session_index: u64 },
    /// Authentication failed under [`ResyncPolicy::ReinitOnFailure`]; the
    /// caller must resync both endpoints (over TCP, a RESYNC control frame
    /// does this).
    ResyncRequested { failed_index: u64 },
}

impl ReceiverEndpoint {
    pub fn new(
        cfg: SakpConfig,
        kdf: KdfParams,
        mut provider: Box<dyn InitialKeyProvider>,
        policy: ResyncPolicy,
    ) -> Result<Self> {
        let key = provider.next_shared_key();
        Ok(ReceiverEndpoint {
            keychain: init_keychain(&key, cfg, kdf)?,
            provider,
            policy,
            stats: EndpointStats::default(),
        })
    }

    pub fn current_key(&self) -> &SessionKey {
        self.keychain.current_key()
    }

    pub fn session_index(&self) -> u64 {
        self.keychain.session_index()
    }

    pub fn stats(&self) -> EndpointStats {
        self.stats
    }

    pub fn policy(&self) -> ResyncPolicy {
        self.policy
    }

    /// Processes one wire frame. Wire-format damage is an error; failed
    /// authentication is a normal outcome resolved per policy.
    pub fn step(&mut self, wire: &[u8], channel: &ChannelParams) -> Result<ReceiverOutcome> {
        let sealed = decode_wire(wire)?;
        let session_index = sealed.session_index();
        let payload = match decrypt_payload(&sealed, self.keychain.current_key())? {
            DecryptOutcome::Plaintext(p) => p,
            DecryptOutcome::AuthFailure => {
                self.stats.auth_failures += 1;
                return match self.policy {
                    ResyncPolicy::None => {
                        self.keychain.advance(SemanticDigest::from_text(AUTH_FAIL_DIGEST));
                        Ok(ReceiverOutcome::AuthFailed { session_index })
                    }
                    ResyncPolicy::ReinitOnFailure => Ok(ReceiverOutcome::ResyncRequested {
                        failed_index: session_index,
                    }),
                };
            }
        };
        let source: FrameDetections = serde_json::from_slice(payload.bytes())
            .map_err(|e| Error::Protocol(format!("payload does not deserialize: {e}")))?;
        // the lossy semantic reconstruction: distortion keyed by frame index
        // so in-process and TCP harnesses realize identical noise
        let profile = channel_sim::profile_from_snr(channel);
        let reconstructed = channel_sim::distort_detections(
            &source,
            &profile,
            self.keychain.cfg().num_classes,
            channel_sim::frame_seed(channel.seed, source.frame_index),
        );
        let digest = canonical_digest(&reconstructed, self.keychain.cfg())?;
        self.keychain.advance(digest.clone());
        self.stats.frames_ok += 1;
        Ok(ReceiverOutcome::Reconstructed {
            frame: reconstructed,
            digest,
            session_index,
        })
    }

    /// Re-initializes from the provider's next shared key.
    pub fn resync(&mut self) -> Result<()> {
        let key = self.provider.next_shared_key();
        self.keychain = init_keychain(
            &key,
            self.keychain.cfg().clone(),
            self.keychain.kdf().clone(),
        )?;
        self.stats.resyncs += 1;
        Ok(())
    }
}

/// Everything a reproducible session needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionParams {
    pub n_frames: u64,
    pub cfg: SakpConfig,
    pub kdf: KdfParams,
    pub channel: ChannelParams,
    pub policy: ResyncPolicy,
    pub seed: u64,
}

/// One step of a session trace. `key_match` compares endpoint keys
/// out-of-band; it exists for measurement and never crosses the wire.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u64,
    pub session_index: u64,
    pub key_match: bool,
    pub auth_ok: bool,
    pub sender_digest: String,
    /// `None` when the step triggered a resync (no digest was pushed).
    pub receiver_digest: Option<String>,
    pub resync: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionTrace {
    pub steps: Vec<StepRecord>,
    pub frames_ok: u64,
    pub auth_failures: u64,
    pub resyncs: u64,
}

impl SessionTrace {
    pub fn key_match_rate_after_first(&self) -> f64 {
        // step 1 always matches by construction (same provider bytes)
        let rest: Vec<_> = self.steps.iter().skip(1).collect();
        if rest.is_empty() {
            return 1.0;
        }
        rest.iter().filter(|s| s.key_match).count() as f64 / rest.len() as f64
    }

    /// JSONL: a header object embedding the resolved params, the realized
    /// distortion profile, and the version; one step object per line; then
    /// a summary object.
    pub fn write_jsonl(&self, mut w: impl std::io::Write, params: &SessionParams) -> Result<()> {
        let header = serde_json::json!({
            "type": "session",
            "version": env!("CARGO_PKG_VERSION"),
            "params": params,
            "profile": channel_sim::profile_from_snr(&params.channel),
        });
        writeln!(w, "{header}")?;
        for step in &self.steps {
            let mut line = serde_json::to_value(step).expect("step serializes");
            line["type"] = "step".into();
            writeln!(w, "{line}")?;
        }
        let summary = serde_json::json!({
            "type": "summary",
            "frames_ok": self.frames_ok,
            "auth_failures": self.auth_failures,
            "resyncs": self.resyncs,
        });
        writeln!(w, "{summary}")?;
        Ok(())
    }

    pub fn read_jsonl(reader: impl std::io::BufRead) -> Result<SessionTrace> {
        let mut steps = Vec::new();
        let mut summary = (0, 0, 0);
        for line in reader.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let v: serde_json::Value =
                serde_json::from_str(&line).map_err(|e| Error::Data(e.to_string()))?;
            match v.get("type").and_then(|t| t.as_str()) {
                Some("step") => steps.push(
                    serde_json::from_value(v).map_err(|e| Error::Data(e.to_string()))?,
                ),
                Some("summary") => {
                    summary = (
                        v["frames_ok"].as_u64().unwrap_or(0),
                        v["auth_failures"].as_u64().unwrap_or(0),
                        v["resyncs"].as_u64().unwrap_or(0),
                    );
                }
                _ => {}
            }
        }
        Ok(SessionTrace {
            steps,
            frames_ok: summary.0,
            auth_failures: summary.1,
            resyncs: summary.2,
        })
    }
}

/// Provider seed for a session; both endpoints derive the same stream.
pub fn provider_seed(session_seed: u64) -> u64 {
    seeds::mix(session_seed, seeds::domain::PROVIDER, 0)
}

/// Builds the two endpoints of a session from shared parameters.
pub fn build_endpoints(params: &SessionParams) -> Result<(SenderEndpoint, ReceiverEndpoint)> {
    let seed = provider_seed(params.seed);
    let sender = SenderEndpoint::new(
        params.cfg.clone(),
        params.kdf.clone(),
        Box::new(SeededKeyProvider::new(seed)),
    )?;
    let receiver = ReceiverEndpoint::new(
        params.cfg.clone(),
        params.kdf.clone(),
        Box::new(SeededKeyProvider::new(seed)),
        params.policy,
    )?;
    Ok((sender, receiver))
}

/// Drives both endpoints over an in-process link. Deterministic given the
/// params and frame source.
pub fn run_session(
    params: &SessionParams,
    frames: impl IntoIterator<Item = FrameDetections>,
) -> Result<SessionTrace> {
    params.channel.validate()?;
    if params.n_frames < 1 {
        return Err(Error::Config("n_frames must be >= 1".into()));
    }
    let (mut sender, mut receiver) = build_endpoints(params)?;
    let mut steps = Vec::new();
    for (i, frame) in frames.into_iter().take(params.n_frames as usize).enumerate() {
        let step = i as u64 + 1;
        let key_match = sender.current_key().bytes() == receiver.current_key().bytes();
        let sent = sender.step(&frame)?;
        let outcome = receiver.step(&sent.wire, &params.channel)?;
        let record = match outcome {
            ReceiverOutcome::Reconstructed { digest, .. } => StepRecord {
                step,
                session_index: sent.session_index,
                key_match,
                auth_ok: true,
                sender_digest: sent.digest.to_string(),
                receiver_digest: Some(digest.to_string()),
                resync: false,
            },
            ReceiverOutcome::AuthFailed { .. } => StepRecord {
                step,
                session_index: sent.session_index,
                key_match,
                auth_ok: false,
                sender_digest: sent.digest.to_string(),
                receiver_digest: Some(AUTH_FAIL_DIGEST.to_string()),
                resync: false,
            },
            ReceiverOutcome::ResyncRequested { .. } => {
                sender.resync()?;
                receiver.resync()?;
                StepRecord {
                    step,
                    session_index: sent.session_index,
                    key_match,
                    auth_ok: false,
                    sender_digest: sent.digest.to_string(),
                    receiver_digest: None,
                    resync: true,
                }
            }
        };
        steps.push(record);
    }
    Ok(SessionTrace {
        steps,
        frames_ok: receiver.stats().frames_ok,
        auth_failures: receiver.stats().auth_failures,
        resyncs: receiver.stats().resyncs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{SceneConfig, SceneGenerator};

    fn lossless_params(n_frames: u64, window: u32) -> SessionParams {
        SessionParams {
            n_frames,
            cfg: SakpConfig {
                window,
                ..SakpConfig::default()
            },
            kdf: KdfParams {
                iterations: 1_000,
                ..KdfParams::default()
            },
            channel: ChannelParams {
                snr_db: 1e9,
                seed: 5,
                ..ChannelParams::default()
            },
            policy: ResyncPolicy::None,
            seed: 42,
        }
    }

    fn scene(params: &SessionParams) -> SceneGenerator {
        SceneGenerator::new(
            SceneConfig {
                num_classes: params.cfg.num_classes,
                ..SceneConfig::default()
            },
            seeds::mix(params.seed, seeds::domain::SCENE, 0),
        )
    }

    #[test]
    fn lossless_session_stays_synchronized() {
        let params = lossless_params(40, 2);
        let trace = run_session(&params, scene(&params)).unwrap();
        assert_eq!(trace.steps.len(), 40);
        assert!(trace.steps.iter().all(|s| s.key_match && s.auth_ok));
        assert_eq!(trace.auth_failures, 0);
        assert_eq!(trace.resyncs, 0);
        // lossless channel reconstructs the source digest exactly
        for s in &trace.steps {
            assert_eq!(Some(&s.sender_digest), s.receiver_digest.as_ref());
        }
    }

    #[test]
    fn session_indices_advance_in_lockstep() {
        let params = lossless_params(5, 1);
        let (mut sender, mut receiver) = build_endpoints(&params).unwrap();
        for (i, frame) in scene(&params).take(5).enumerate() {
            let sent = sender.step(&frame).unwrap();
            assert_eq!(sent.session_index, i as u64 + 1);
            receiver.step(&sent.wire, &params.channel).unwrap();
            assert_eq!(sender.session_index(), receiver.session_index());
        }
    }

    #[test]
    fn sender_digest_matches_canonical_digest() {
        let params = lossless_params(1, 1);
        let (mut sender, _) = build_endpoints(&params).unwrap();
        let frame = scene(&params).next().unwrap();
        let sent = sender.step(&frame).unwrap();
        assert_eq!(sent.digest, canonical_digest(&frame, &params.cfg).unwrap());
    }

    #[test]
    fn mismatched_init_fails_on_first_frame() {
        let params = lossless_params(1, 1);
        let mut sender = SenderEndpoint::new(
            params.cfg.clone(),
            params.kdf.clone(),
            Box::new(FixedKeyProvider([1u8; 16])),
        )
        .unwrap();
        let mut receiver = ReceiverEndpoint::new(
            params.cfg.clone(),
            params.kdf.clone(),
            Box::new(FixedKeyProvider([2u8; 16])),
            ResyncPolicy::None,
        )
        .unwrap();
        let frame = scene(&params).next().unwrap();
        let sent = sender.step(&frame).unwrap();
        let outcome = receiver.step(&sent.wire, &params.channel).unwrap();
        assert_eq!(outcome, ReceiverOutcome::AuthFailed { session_index: 1 });
    }

    #[test]
    fn chain_reaction_with_policy_none() {
        // T=1: corrupt the reconstruction of exactly one step, then every
        // later step fails to authenticate
        let params = lossless_params(12, 1);
        let (mut sender, mut receiver) = build_endpoints(&params).unwrap();
        let full_drop = ChannelParams {
            snr_db: -1e9, // saturates p_drop at 0.5... use explicit drop below
            ..params.channel.clone()
        };
        // a channel that certainly empties the frame: p_drop_max 1 at -inf SNR
        let certain_drop = ChannelParams {
            snr_db: -1e9,
            p_drop_max: 1.0,
            lambda_spurious_max: 0.0,
            sigma_center_max: 0.0,
            sigma_conf_max: 0.0,
            ..full_drop
        };
        let flip_at = 4usize;
        for (i, frame) in scene(&params).take(12).enumerate() {
            // guarantee the source digest is non-empty at the flip step
            let frame = if frame.detections.is_empty() {
                let mut f = frame;
                f.detections.push(crate::sakp::Detection {
                    class_id: 0,
                    confidence: 0.9,
                    cx: 0.5,
                    cy: 0.5,
                    w: 0.1,
                    h: 0.1,
                });
                f
            } else {
                frame
            };
            let sent = sender.step(&frame).unwrap();
            let channel = if i == flip_at { &certain_drop } else { &params.channel };
            let outcome = receiver.step(&sent.wire, channel).unwrap();
            match i.cmp(&flip_at) {
                std::cmp::Ordering::Less | std::cmp::Ordering::Equal => {
                    // at the flip step authentication still succeeds; only
                    // the digest diverges
                    assert!(matches!(outcome, ReceiverOutcome::Reconstructed { .. }));
                }
                std::cmp::Ordering::Greater => {
                    assert!(
                        matches!(outcome, ReceiverOutcome::AuthFailed { .. }),
                        "step {i} should cascade"
                    );
                }
            }
        }
    }

    #[test]
    fn reinit_policy_restores_sync_within_one_frame() {
        let params = SessionParams {
            policy: ResyncPolicy::ReinitOnFailure,
            ..lossless_params(12, 1)
        };
        let (mut sender, mut receiver) = build_endpoints(&params).unwrap();
        let certain_drop = ChannelParams {
            snr_db: -1e9,
            p_drop_max: 1.0,
            lambda_spurious_max: 0.0,
            sigma_center_max: 0.0,
            sigma_conf_max: 0.0,
            ..params.channel.clone()
        };
        let flip_at = 3usize;
        let mut resynced_at = None;
        for (i, frame) in scene(&params).take(12).enumerate() {
            let frame = if frame.detections.is_empty() {
                let mut f = frame;
                f.detections.push(crate::sakp::Detection {
                    class_id: 0,
                    confidence: 0.9,
                    cx: 0.5,
                    cy: 0.5,
                    w: 0.1,
                    h: 0.1,
                });
                f
            } else {
                frame
            };
            let sent = sender.step(&frame).unwrap();
            let channel = if i == flip_at { &certain_drop } else { &params.channel };
            match receiver.step(&sent.wire, channel).unwrap() {
                ReceiverOutcome::ResyncRequested { .. } => {
                    sender.resync().unwrap();
                    receiver.resync().unwrap();
                    resynced_at = Some(i);
                }
                ReceiverOutcome::Reconstructed { .. } => {
                    if let Some(r) = resynced_at {
                        assert!(i > r, "post-resync frames authenticate immediately");
                    }
                }
                ReceiverOutcome::AuthFailed { .. } => {
                    panic!("policy reinit never leaves a failure unresolved (step {i})")
                }
            }
            if i != flip_at {
                // at the flip step the digests diverge by construction, so
                // keys mismatch until the resync one frame later
                assert_eq!(
                    sender.current_key().bytes(),
                    receiver.current_key().bytes(),
                    "keys must match at the end of step {i}"
                );
            }
        }
        assert_eq!(resynced_at, Some(flip_at + 1));
    }

    #[test]
    fn nonce_key_pairs_never_repeat_within_a_session() {
        use std::collections::HashSet;
        let params = lossless_params(30, 2);
        let (mut sender, _) = build_endpoints(&params).unwrap();
        let mut seen: HashSet<(Vec<u8>, [u8; 12])> = HashSet::new();
        for frame in scene(&params).take(30) {
            let key = sender.current_key().clone();
            let nonce = crate::secure_channel::nonce_for_index(key.session_index());
            assert!(
                seen.insert((key.bytes().to_vec(), nonce)),
                "(key, nonce) pair repeated at index {}",
                key.session_index()
            );
            sender.step(&frame).unwrap();
        }
    }

    #[test]
    fn key_mismatch_always_surfaces_as_auth_failure() {
        // no silent misdecryption: on a lossy channel, every step whose keys
        // diverged must fail authentication, and every authenticated step
        // must have had matching keys
        let mut params = lossless_params(60, 1);
        params.channel = ChannelParams {
            snr_db: 9.0,
            seed: 31,
            ..ChannelParams::default()
        };
        let trace = run_session(&params, scene(&params)).unwrap();
        assert!(trace.auth_failures > 0, "channel should bite at 9 dB");
        for s in &trace.steps {
            assert_eq!(
                s.auth_ok, s.key_match,
                "step {}: auth_ok={} but key_match={}",
                s.step, s.auth_ok, s.key_match
            );
        }
    }

    #[test]
    fn run_session_is_deterministic() {
        let mut params = lossless_params(30, 1);
        params.channel = ChannelParams {
            snr_db: 10.0,
            seed: 77,
            ..ChannelParams::default()
        };
        let a = run_session(&params, scene(&params)).unwrap();
        let b = run_session(&params, scene(&params)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn trace_jsonl_round_trip() {
        let params = lossless_params(6, 1);
        let trace = run_session(&params, scene(&params)).unwrap();
        let mut buf = Vec::new();
        trace.write_jsonl(&mut buf, &params).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.lines().next().unwrap().contains("\"type\":\"session\""));
        let back = SessionTrace::read_jsonl(buf.as_slice()).unwrap();
        assert_eq!(back, trace);
    }

    #[test]
    fn wire_garbage_is_a_protocol_error_not_auth_failure() {
        let params = lossless_params(1, 1);
        let (_, mut receiver) = build_endpoints(&params).unwrap();
        let err = receiver.step(b"GARBAGE-BYTES-NOT-A-FRAME", &params.channel);
        assert!(matches!(err, Err(Error::Format(_))));
    }
}
