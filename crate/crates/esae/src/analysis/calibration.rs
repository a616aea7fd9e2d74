//! Calibration of the default channel constants.
//!
//! The channel defaults are frozen so that, at 25 dB and window 1, the best
//! key-consistency rate among configurations whose semantic key space clears
//! the 128-bit bound lands in the 0.80..0.90 band. This module provides the
//! search that definition refers to: sweep a fixed (K, Q) grid, keep the
//! secure configurations, return the one with the highest consistency rate.

use crate::error::Result;

use super::keyspace::keyspace_log2;
use super::mcr::{estimate_point, McrContext, McrMode, McrPoint};

/// Top-K values searched during calibration.
pub const CALIBRATION_TOP_K: [u32; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

/// Grid-cell counts searched during calibration.
pub const CALIBRATION_GRID_CELLS: [u32; 5] = [100, 400, 900, 1600, 2500];

/// Consistency band the best secure configuration must land in.
pub const CALIBRATION_BAND: (f64, f64) = (0.80, 0.90);

/// Estimates every secure `(K, Q)` configuration of the calibration grid at
/// the given SNR and window, returning them sorted by descending
/// consistency rate. Insecure configurations are skipped without sampling.
pub fn secure_configurations(
    snr_db: f64,
    window: u32,
    runs: u32,
    frames: u32,
    ctx: &McrContext,
) -> Result<Vec<McrPoint>> {
    let mut points = Vec::new();
    for &k in &CALIBRATION_TOP_K {
        for &q in &CALIBRATION_GRID_CELLS {
            let space = keyspace_log2(ctx.scene.num_classes, q, k, window)?;
            if !space.secure {
                continue;
            }
            points.push(estimate_point(
                (snr_db, k, window, q),
                McrMode::Independent,
                runs,
                frames,
                ctx,
            )?);
        }
    }
    points.sort_by(|a, b| b.mcr_skg.total_cmp(&a.mcr_skg));
    Ok(points)
}

/// The best secure configuration, if the grid contains any.
pub fn best_secure_config(
    snr_db: f64,
    window: u32,
    runs: u32,
    frames: u32,
    ctx: &McrContext,
) -> Result<Option<McrPoint>> {
    Ok(secure_configurations(snr_db, window, runs, frames, ctx)?
        .into_iter()
        .next())
}
