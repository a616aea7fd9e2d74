//! Semantic-aware session keys and authenticated encryption for lossy
//! semantic links.
//!
//! Two endpoints exchanging detection-level semantics derive identical
//! AES-128 session keys from the semantics they already communicated, so no
//! key material ever crosses the wire after the initial out-of-band key.
//! Each frame's detections are reduced to a canonical digest ([`sakp`]); a
//! sliding window of digests feeds PBKDF2 ([`keychain`]); payloads are
//! sealed with AES-128-GCM in a bit-exact wire format ([`secure_channel`]).
//! A parametric lossy channel ([`channel_sim`]), full sender/receiver state
//! machines with an in-process and a TCP harness ([`protocol`]), and
//! estimators for key-consistency rate, key-space size, and eavesdropper
//! advantage ([`analysis`]) make the mechanism measurable end to end.
//!
//! Start with the `examples/` directory: each major capability has one
//! runnable example. The `esae` binary exposes the same surfaces as
//! subcommands for scripting.

pub mod analysis;
pub mod channel_sim;
pub mod cli;
pub mod error;
pub mod keychain;
pub mod protocol;
pub mod sakp;
pub mod scene;
pub mod secure_channel;
pub mod seeds;

pub use error::{Error, Result};
