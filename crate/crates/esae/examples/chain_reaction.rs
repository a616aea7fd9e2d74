//! One corrupted reconstruction poisons every later key: with window T the
//! attacker (or the channel) must get T consecutive frames right or the
//! whole chain diverges. Then the same failure with reinit-on-failure shows
//! the one-frame recovery path.
//!
//! Run with: cargo run --example chain_reaction

use esae::channel_sim::ChannelParams;
use esae::keychain::KdfParams;
use esae::protocol::{build_endpoints, ReceiverOutcome, ResyncPolicy, SessionParams};
use esae::sakp::SakpConfig;
use esae::scene::{SceneConfig, SceneGenerator};
use esae::seeds;

fn params(policy: ResyncPolicy) -> SessionParams {
    SessionParams {
        n_frames: 12,
        cfg: SakpConfig::default(),
        kdf: KdfParams {
            iterations: 1_000,
            ..KdfParams::default()
        },
        channel: ChannelParams {
            snr_db: 60.0,
            seed: 3,
            ..ChannelParams::default()
        },
        policy,
        seed: 1,
    }
}

/// A channel so bad it certainly drops every detection: guarantees the
/// receiver digests "EMPTY" while the sender digests the real frame.
fn digest_flipper(base: &ChannelParams) -> ChannelParams {
    ChannelParams {
        snr_db: -1e9,
        p_drop_max: 1.0,
        lambda_spurious_max: 0.0,
        sigma_center_max: 0.0,
        sigma_conf_max: 0.0,
        ..base.clone()
    }
}

fn run(policy: ResyncPolicy, flip_at: usize) -> anyhow::Result<()> {
    let p = params(policy);
    let (mut sender, mut receiver) = build_endpoints(&p)?;
    let scene = SceneGenerator::new(
        SceneConfig::default(),
        seeds::mix(p.seed, seeds::domain::SCENE, 0),
    );
    println!("policy {policy:?}, digest flip injected at step {flip_at}:");
    for (i, frame) in scene.take(p.n_frames as usize).enumerate() {
        let sent = sender.step(&frame)?;
        let channel = if i == flip_at {
            digest_flipper(&p.channel)
        } else {
            p.channel.clone()
        };
        let line = match receiver.step(&sent.wire, &channel)? {
            ReceiverOutcome::Reconstructed { .. } => "ok",
            ReceiverOutcome::AuthFailed { .. } => "AUTH FAILURE",
            ReceiverOutcome::ResyncRequested { .. } => {
                sender.resync()?;
                receiver.resync()?;
                "AUTH FAILURE -> resync (both ends re-keyed out of band)"
            }
        };
        println!("  step {:>2}: {line}", i + 1);
    }
    println!();
    Ok(())
}

fn main() -> anyhow::Result<()> {
    // with no recovery policy the single flip cascades forever
    run(ResyncPolicy::None, 4)?;
    // with reinit-on-failure, one RESYNC round trip restores the chain
    run(ResyncPolicy::ReinitOnFailure, 4)?;
    Ok(())
}
