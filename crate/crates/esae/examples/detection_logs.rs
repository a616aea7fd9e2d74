//! The JSONL detection-log format: generate a synthetic log, write it,
//! read it back with validation, and digest each frame.
//!
//! Run with: cargo run --example detection_logs

use esae::sakp::{canonical_digest, read_detection_log, write_detection_log, SakpConfig};
use esae::scene::{SceneConfig, SceneGenerator};

fn main() -> anyhow::Result<()> {
    let frames: Vec<_> = SceneGenerator::new(SceneConfig::default(), 7).take(5).collect();

    let mut buf = Vec::new();
    write_detection_log(&mut buf, &frames)?;
    println!("log format, one frame per line:");
    for line in String::from_utf8_lossy(&buf).lines().take(2) {
        let shown = if line.len() > 100 { &line[..100] } else { line };
        println!("  {shown}...");
    }

    let parsed = read_detection_log(buf.as_slice(), 80)?;
    assert_eq!(parsed, frames);

    let cfg = SakpConfig::default();
    println!("\nframe  objects  digest (top-{} as class:grid, sorted by grid)", cfg.top_k);
    for frame in &parsed {
        let digest = canonical_digest(frame, &cfg)?;
        println!("{:>5}  {:>7}  {}", frame.frame_index, frame.detections.len(), digest);
    }

    // out-of-range records are rejected at parse time
    let bad = br#"{"frame":0,"dets":[{"c":3,"p":1.5,"cx":0.5,"cy":0.5,"w":0.1,"h":0.1}]}"#;
    let err = read_detection_log(&bad[..], 80).unwrap_err();
    println!("\nconfidence 1.5 rejected: {err}");
    Ok(())
}
