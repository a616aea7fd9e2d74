//! Run a lossless session and show both endpoints deriving bitwise-equal
//! session keys from the semantics they exchanged, frame after frame,
//! without any key ever crossing the link.
//!
//! Run with: cargo run --example reciprocity

use esae::channel_sim::ChannelParams;
use esae::keychain::KdfParams;
use esae::protocol::{build_endpoints, ReceiverOutcome, ResyncPolicy, SessionParams};
use esae::sakp::SakpConfig;
use esae::scene::{SceneConfig, SceneGenerator};
use esae::seeds;

fn main() -> anyhow::Result<()> {
    let params = SessionParams {
        n_frames: 20,
        cfg: SakpConfig {
            top_k: 5,
            window: 3,
            ..SakpConfig::default()
        },
        kdf: KdfParams::default(),
        // a channel clean enough to never disturb the digests
        channel: ChannelParams {
            snr_db: 60.0,
            seed: 7,
            ..ChannelParams::default()
        },
        policy: ResyncPolicy::None,
        seed: 42,
    };

    let (mut sender, mut receiver) = build_endpoints(&params)?;
    let scene = SceneGenerator::new(
        SceneConfig::default(),
        seeds::mix(params.seed, seeds::domain::SCENE, 0),
    );

    println!("step  index  sender-key        receiver-key      match");
    for (i, frame) in scene.take(params.n_frames as usize).enumerate() {
        let k_s = hex::encode(&sender.current_key().bytes()[..8]);
        let k_r = hex::encode(&receiver.current_key().bytes()[..8]);
        let matches = k_s == k_r;
        println!(
            "{:>4}  {:>5}  {k_s}…  {k_r}…  {}",
            i + 1,
            sender.session_index(),
            if matches { "yes" } else { "NO" }
        );
        assert!(matches, "keys diverged on a lossless channel");

        let sent = sender.step(&frame)?;
        match receiver.step(&sent.wire, &params.channel)? {
            ReceiverOutcome::Reconstructed { digest, .. } => {
                assert_eq!(digest, sent.digest, "lossless digests must agree");
            }
            other => anyhow::bail!("unexpected outcome on a clean channel: {other:?}"),
        }
    }

    println!("\n20 frames, keys equal at every index, zero auth failures.");
    println!("The receiver never saw a key on the wire: it derived each one");
    println!("from the digests of the frames it already reconstructed.");
    Ok(())
}
