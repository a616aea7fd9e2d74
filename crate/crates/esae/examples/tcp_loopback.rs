//! The same seeded session run twice: once through the in-process harness,
//! once over a real loopback TCP socket. The traces are step-for-step
//! identical, auth failures included.
//!
//! Run with: cargo run --example tcp_loopback

use esae::channel_sim::ChannelParams;
use esae::keychain::KdfParams;
use esae::protocol::{run_session, tcp::run_session_tcp, ResyncPolicy, SessionParams};
use esae::sakp::SakpConfig;
use esae::scene::{SceneConfig, SceneGenerator};
use esae::seeds;

fn main() -> anyhow::Result<()> {
    let params = SessionParams {
        n_frames: 50,
        cfg: SakpConfig::default(),
        kdf: KdfParams {
            iterations: 1_000,
            ..KdfParams::default()
        },
        // noisy enough that some frames fail to authenticate
        channel: ChannelParams {
            snr_db: 8.0,
            seed: seeds::mix(5, seeds::domain::CHANNEL, 0),
            ..ChannelParams::default()
        },
        policy: ResyncPolicy::None,
        seed: 5,
    };
    let scene = || {
        SceneGenerator::new(
            SceneConfig::default(),
            seeds::mix(params.seed, seeds::domain::SCENE, 0),
        )
    };

    let in_process = run_session(&params, scene())?;
    let over_tcp = run_session_tcp(&params, scene())?;

    println!(
        "in-process: {} steps, {} auth failures",
        in_process.steps.len(),
        in_process.auth_failures
    );
    println!(
        "tcp        : {} steps, {} auth failures",
        over_tcp.steps.len(),
        over_tcp.auth_failures
    );
    assert_eq!(in_process, over_tcp, "traces must match step for step");
    println!("\ntraces are identical; the transport changes nothing observable.");
    Ok(())
}
