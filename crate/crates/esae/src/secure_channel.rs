//! Authenticated encryption of semantic payloads and the bit-exact wire
//! framing of ciphertexts.
//!
//! AES-128-GCM with a deterministic nonce derived from the session index.
//! This is safe because every session index is encrypted under a fresh key,
//! and it is load-bearing: an endpoint whose derived key diverged learns it
//! through a clean authentication failure instead of decoding garbage.
//!
//! Wire layout (big-endian, 17-byte header):
//!
//! ```text
//! offset  size  field
//! 0       4     magic "ESAE"
//! 4       1     version 0x01
//! 5       8     session index
//! 13      4     ct_len
//! 17      ..    ciphertext || 16-byte GCM tag
//! ```

use aes_gcm::aead::{Aead, KeyInit, Payload};
use aes_gcm::{Aes128Gcm, Nonce};

use crate::error::{Error, FormatError, Result};
use crate::keychain::SessionKey;

pub const WIRE_MAGIC: [u8; 4] = *b"ESAE";
pub const WIRE_VERSION: u8 = 0x01;
pub const WIRE_HEADER_LEN: usize = 17;
pub const NONCE_LEN: usize = 12;
pub const TAG_LEN: usize = 16;

/// Largest payload whose ciphertext length still fits the 4-byte ct_len.
pub const MAX_PAYLOAD_LEN: usize = u32::MAX as usize - TAG_LEN;

/// Opaque semantic payload bytes; in simulation, one serialized frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemanticPayload(Vec<u8>);

impl SemanticPayload {
    pub fn new(bytes: Vec<u8>) -> Result<Self> {
        if bytes.is_empty() {
            return Err(Error::InputDomain("payload must be non-empty".into()));
        }
        if bytes.len() > MAX_PAYLOAD_LEN {
            return Err(Error::InputDomain(format!(
                "payload of {} bytes exceeds the wire maximum {MAX_PAYLOAD_LEN}",
                bytes.len()
            )));
        }
        Ok(SemanticPayload(bytes))
    }

    pub fn bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// One sealed payload, bound to its session index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncryptedFrame {
    session_index: u64,
    nonce: [u8; NONCE_LEN],
    ciphertext_and_tag: Vec<u8>,
}

impl EncryptedFrame {
    pub fn session_index(&self) -> u64 {
        self.session_index
    }

    pub fn nonce(&self) -> &[u8; NONCE_LEN] {
        &self.nonce
    }

    pub fn ciphertext_and_tag(&self) -> &[u8] {
        &self.ciphertext_and_tag
    }
}

/// Outcome of decryption. Authentication failure is an expected protocol
/// event (it is how key divergence is detected), not an error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecryptOutcome {
    Plaintext(SemanticPayload),
    AuthFailure,
}

/// Deterministic nonce: four zero bytes then the big-endian session index.
pub fn nonce_for_index(session_index: u64) -> [u8; NONCE_LEN] {
    let mut nonce = [0u8; NONCE_LEN];
    nonce[4..].copy_from_slice(&session_index.to_be_bytes());
    nonce
}

/// Associated data: wire magic, version, and session index.
pub fn associated_data(session_index: u64) -> [u8; 13] {
    let mut ad = [0u8; 13];
    ad[..4].copy_from_slice(&WIRE_MAGIC);
    ad[4] = WIRE_VERSION;
    ad[5..].copy_from_slice(&session_index.to_be_bytes());
    ad
}

/// Seals a payload under the given session key.
pub fn encrypt_payload(payload: &SemanticPayload, key: &SessionKey) -> Result<EncryptedFrame> {
    let session_index = key.session_index();
    let nonce = nonce_for_index(session_index);
    let cipher = Aes128Gcm::new_from_slice(key.bytes())
        .map_err(|_| Error::Config("AES-128 requires a 16-byte key".into()))?;
    let ciphertext_and_tag = cipher
        .encrypt(
            Nonce::from_slice(&nonce),
            Payload {
                msg: payload.bytes(),
                aad: &associated_data(session_index),
            },
        )
        .map_err(|_| Error::InputDomain("payload exceeds AES-GCM limits".into()))?;
    Ok(EncryptedFrame {
        session_index,
        nonce,
        ciphertext_and_tag,
    })
}

/// Opens a sealed frame. Returns [`DecryptOutcome::AuthFailure`] when the
/// key or associated data do not match; malformed frames are format errors.
pub fn decrypt_payload(frame: &EncryptedFrame, key: &SessionKey) -> Result<DecryptOutcome> {
    if frame.nonce != nonce_for_index(frame.session_index) {
        return Err(FormatError::NonceMismatch.into());
    }
    if frame.ciphertext_and_tag.len() <= TAG_LEN {
        return Err(FormatError::ShortCiphertext(frame.ciphertext_and_tag.len()).into());
    }
    let cipher = Aes128Gcm::new_from_slice(key.bytes())
        .map_err(|_| Error::Config("AES-128 requires a 16-byte key".into()))?;
    match cipher.decrypt(
        Nonce::from_slice(&frame.nonce),
        Payload {
            msg: &frame.ciphertext_and_tag,
            aad: &associated_data(frame.session_index),
        },
    ) {
        Ok(plaintext) => Ok(DecryptOutcome::Plaintext(SemanticPayload::new(plaintext)?)),
        Err(_) => Ok(DecryptOutcome::AuthFailure),
    }
}

/// Serializes a frame to its normative wire bytes.
pub fn encode_wire(frame: &EncryptedFrame) -> Vec<u8> {
    let ct_len = frame.ciphertext_and_tag.len() as u32;
    let mut out = Vec::with_capacity(WIRE_HEADER_LEN + frame.ciphertext_and_tag.len());
    out.extend_from_slice(&WIRE_MAGIC);
    out.push(WIRE_VERSION);
    out.extend_from_slice(&frame.session_index.to_be_bytes());
    out.extend_from_slice(&ct_len.to_be_bytes());
    out.extend_from_slice(&frame.ciphertext_and_tag);
    out
}

/// Parses wire bytes into a frame, validating magic, version, and that the
/// declared length matches the bytes present. Any strict prefix of a valid
/// frame fails.
pub fn decode_wire(bytes: &[u8]) -> Result<EncryptedFrame> {
    if bytes.len() < WIRE_HEADER_LEN {
        return Err(FormatError::Truncated {
            need: WIRE_HEADER_LEN,
            have: bytes.len(),
        }
        .into());
    }
    let magic: [u8; 4] = bytes[..4].try_into().unwrap();
    if magic != WIRE_MAGIC {
        return Err(FormatError::BadMagic(magic).into());
    }
    if bytes[4] != WIRE_VERSION {
        return Err(FormatError::BadVersion(bytes[4]).into());
    }
    let session_index = u64::from_be_bytes(bytes[5..13].try_into().unwrap());
    let ct_len = u32::from_be_bytes(bytes[13..17].try_into().unwrap()) as usize;
    let body = &bytes[WIRE_HEADER_LEN..];
    if body.len() < ct_len {
        return Err(FormatError::Truncated {
            need: WIRE_HEADER_LEN + ct_len,
            have: bytes.len(),
        }
        .into());
    }
    if body.len() > ct_len {
        return Err(FormatError::TrailingBytes(body.len() - ct_len).into());
    }
    Ok(EncryptedFrame {
        session_index,
        nonce: nonce_for_index(session_index),
        ciphertext_and_tag: body.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn key(bytes: [u8; 16], index: u64) -> SessionKey {
        SessionKey::new(bytes, index)
    }

    fn payload(bytes: &[u8]) -> SemanticPayload {
        SemanticPayload::new(bytes.to_vec()).unwrap()
    }

    // Frozen cross-implementation vector: AES-128-GCM with key 000102..0f,
    // session index 7, plaintext {"frame":7,"dets":[]}.
    const GOLDEN_KEY: [u8; 16] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15];
    const GOLDEN_PT: &[u8] = br#"{"frame":7,"dets":[]}"#;
    const GOLDEN_CT_HEX: &str =
        "32b14f800599d8ef5f3d359929e736a14c35486bb3975fb6fd5d389250c1780e45694c8502";
    const GOLDEN_WIRE_HEX: &str = "45534145010000000000000007000000253\
2b14f800599d8ef5f3d359929e736a14c35486bb3975fb6fd5d389250c1780e45694c8502";

    #[test]
    fn golden_vector_encrypt_and_wire() {
        let frame = encrypt_payload(&payload(GOLDEN_PT), &key(GOLDEN_KEY, 7)).unwrap();
        assert_eq!(hex::encode(frame.ciphertext_and_tag()), GOLDEN_CT_HEX);
        assert_eq!(hex::encode(encode_wire(&frame)), GOLDEN_WIRE_HEX);
    }

    #[test]
    fn golden_vector_decrypt() {
        let wire = hex::decode(GOLDEN_WIRE_HEX).unwrap();
        let frame = decode_wire(&wire).unwrap();
        assert_eq!(frame.session_index(), 7);
        match decrypt_payload(&frame, &key(GOLDEN_KEY, 7)).unwrap() {
            DecryptOutcome::Plaintext(p) => assert_eq!(p.bytes(), GOLDEN_PT),
            DecryptOutcome::AuthFailure => panic!("golden vector failed to authenticate"),
        }
    }

    #[test]
    fn wrong_key_is_auth_failure() {
        let frame = encrypt_payload(&payload(b"hello"), &key([1u8; 16], 3)).unwrap();
        let outcome = decrypt_payload(&frame, &key([2u8; 16], 3)).unwrap();
        assert_eq!(outcome, DecryptOutcome::AuthFailure);
    }

    #[test]
    fn mismatched_session_index_is_auth_failure() {
        let frame = encrypt_payload(&payload(b"hello"), &key([1u8; 16], 3)).unwrap();
        // present the same ciphertext under a different claimed index
        let forged = EncryptedFrame {
            session_index: 4,
            nonce: nonce_for_index(4),
            ciphertext_and_tag: frame.ciphertext_and_tag.clone(),
        };
        let outcome = decrypt_payload(&forged, &key([1u8; 16], 4)).unwrap();
        assert_eq!(outcome, DecryptOutcome::AuthFailure);
    }

    #[test]
    fn truncated_tag_is_format_error() {
        let frame = encrypt_payload(&payload(b"x"), &key([1u8; 16], 1)).unwrap();
        let short = EncryptedFrame {
            session_index: 1,
            nonce: nonce_for_index(1),
            ciphertext_and_tag: frame.ciphertext_and_tag[..TAG_LEN].to_vec(),
        };
        assert!(matches!(
            decrypt_payload(&short, &key([1u8; 16], 1)),
            Err(Error::Format(FormatError::ShortCiphertext(_)))
        ));
    }

    #[test]
    fn decode_rejects_bad_magic() {
        let frame = encrypt_payload(&payload(b"x"), &key([1u8; 16], 1)).unwrap();
        let mut wire = encode_wire(&frame);
        wire[0] ^= 0xff;
        assert!(matches!(
            decode_wire(&wire),
            Err(Error::Format(FormatError::BadMagic(_)))
        ));
    }

    #[test]
    fn decode_rejects_unknown_version() {
        let frame = encrypt_payload(&payload(b"x"), &key([1u8; 16], 1)).unwrap();
        let mut wire = encode_wire(&frame);
        wire[4] = 0x02;
        assert!(matches!(
            decode_wire(&wire),
            Err(Error::Format(FormatError::BadVersion(0x02)))
        ));
    }

    #[test]
    fn decode_rejects_declared_length_past_end() {
        let frame = encrypt_payload(&payload(b"x"), &key([1u8; 16], 1)).unwrap();
        let mut wire = encode_wire(&frame);
        let huge = (frame.ciphertext_and_tag.len() as u32 + 9).to_be_bytes();
        wire[13..17].copy_from_slice(&huge);
        assert!(matches!(
            decode_wire(&wire),
            Err(Error::Format(FormatError::Truncated { .. }))
        ));
    }

    #[test]
    fn decode_rejects_trailing_bytes() {
        let frame = encrypt_payload(&payload(b"x"), &key([1u8; 16], 1)).unwrap();
        let mut wire = encode_wire(&frame);
        wire.push(0);
        assert!(matches!(
            decode_wire(&wire),
            Err(Error::Format(FormatError::TrailingBytes(1)))
        ));
    }

    #[test]
    fn payload_bounds() {
        assert!(SemanticPayload::new(vec![]).is_err());
        assert!(SemanticPayload::new(vec![0u8]).is_ok());
    }

    proptest! {
        #[test]
        fn round_trip(pt in prop::collection::vec(any::<u8>(), 1..512),
                      kb in any::<[u8; 16]>(), idx in 1u64..1_000_000) {
            let k = key(kb, idx);
            let frame = encrypt_payload(&payload(&pt), &k).unwrap();
            prop_assert_eq!(frame.ciphertext_and_tag().len(), pt.len() + TAG_LEN);
            let decoded = decode_wire(&encode_wire(&frame)).unwrap();
            prop_assert_eq!(&decoded, &frame);
            match decrypt_payload(&decoded, &k).unwrap() {
                DecryptOutcome::Plaintext(out) => prop_assert_eq!(out.bytes(), &pt[..]),
                DecryptOutcome::AuthFailure => prop_assert!(false, "round trip must authenticate"),
            }
        }

        #[test]
        fn bit_flip_anywhere_fails_auth(pt in prop::collection::vec(any::<u8>(), 1..128),
                                        kb in any::<[u8; 16]>(),
                                        flip in any::<(u16, u8)>()) {
            let k = key(kb, 1);
            let frame = encrypt_payload(&payload(&pt), &k).unwrap();
            let mut ct = frame.ciphertext_and_tag().to_vec();
            let pos = (flip.0 as usize) % ct.len();
            ct[pos] ^= 1u8 << (flip.1 % 8);
            let tampered = EncryptedFrame {
                session_index: 1,
                nonce: nonce_for_index(1),
                ciphertext_and_tag: ct,
            };
            prop_assert_eq!(decrypt_payload(&tampered, &k).unwrap(), DecryptOutcome::AuthFailure);
        }

        #[test]
        fn strict_prefixes_never_decode(pt in prop::collection::vec(any::<u8>(), 1..64),
                                        kb in any::<[u8; 16]>(), cut in any::<u16>()) {
            let frame = encrypt_payload(&payload(&pt), &key(kb, 9)).unwrap();
            let wire = encode_wire(&frame);
            let cut = (cut as usize) % wire.len();
            prop_assert!(decode_wire(&wire[..cut]).is_err());
        }
    }
}
