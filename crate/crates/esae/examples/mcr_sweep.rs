//! Small Monte-Carlo sweep of the key-consistency rate over SNR and K,
//! in both estimation modes, emitted as the normative CSV.
//!
//! Run with: cargo run --release --example mcr_sweep

use esae::analysis::{estimate_mcr_skg, write_csv, McrContext, McrMode, McrSkgConfig};
use esae::keychain::KdfParams;

fn main() -> anyhow::Result<()> {
    let ctx = McrContext {
        kdf: KdfParams {
            iterations: 1_000, // key equality is iteration-independent
            ..KdfParams::default()
        },
        seed: 2024,
        ..McrContext::default()
    };

    for mode in [McrMode::Independent, McrMode::Chained] {
        let cfg = McrSkgConfig {
            mode,
            runs: 60,
            frames_per_run: 30,
            snr_db: vec![5.0, 10.0, 25.0],
            top_k: vec![1, 5, 10],
            window: vec![1],
            grid_cells: vec![900],
        };
        let points = estimate_mcr_skg(&cfg, &ctx)?;
        let echo = serde_json::to_string(&cfg)?;
        write_csv(&points, &echo, std::io::stdout().lock())?;
        println!();
    }
    println!("# independent isolates per-frame digest robustness;");
    println!("# chained includes the cascade, so it can only be lower.");
    Ok(())
}
