//! Annotated hex dump of one encrypted wire frame, including the exact
//! nonce and associated-data construction.
//!
//! Run with: cargo run --example wire_format

use esae::keychain::SessionKey;
use esae::secure_channel::{
    associated_data, decode_wire, decrypt_payload, encode_wire, encrypt_payload, nonce_for_index,
    DecryptOutcome, SemanticPayload,
};

fn main() -> anyhow::Result<()> {
    let key = SessionKey::new(core::array::from_fn(|i| i as u8), 7);
    let payload = SemanticPayload::new(br#"{"frame":7,"dets":[]}"#.to_vec())?;

    let frame = encrypt_payload(&payload, &key)?;
    let wire = encode_wire(&frame);

    println!("key        : {}", hex::encode(key.bytes()));
    println!("payload    : {}", String::from_utf8_lossy(payload.bytes()));
    println!("nonce      : {}  (4 zero bytes || be64 session index)", hex::encode(nonce_for_index(7)));
    println!("assoc data : {}  (magic || version || be64 index)", hex::encode(associated_data(7)));
    println!();
    println!("wire frame ({} bytes):", wire.len());
    println!("  magic    : {}  \"ESAE\"", hex::encode(&wire[0..4]));
    println!("  version  : {}", hex::encode(&wire[4..5]));
    println!("  index    : {}  = 7", hex::encode(&wire[5..13]));
    println!("  ct_len   : {}  = {}", hex::encode(&wire[13..17]), wire.len() - 17);
    println!("  ct||tag  : {}", hex::encode(&wire[17..]));
    println!();
    println!("full hex   : {}", hex::encode(&wire));

    let decoded = decode_wire(&wire)?;
    match decrypt_payload(&decoded, &key)? {
        DecryptOutcome::Plaintext(pt) => {
            assert_eq!(pt, payload);
            println!("\ndecodes and decrypts back to the exact payload.");
        }
        DecryptOutcome::AuthFailure => anyhow::bail!("round trip failed authentication"),
    }

    // tamper with one bit anywhere and authentication fails
    let mut bent = wire.clone();
    *bent.last_mut().unwrap() ^= 0x01;
    let outcome = decrypt_payload(&decode_wire(&bent)?, &key)?;
    println!("flip one tag bit -> {outcome:?}");
    Ok(())
}
