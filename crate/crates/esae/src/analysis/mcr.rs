//! Monte-Carlo estimation of the mean consistency rate of semantic key
//! generation (MCR-SKG): the expected indicator that sender and receiver
//! derive bitwise-equal session keys.
//!
//! Two modes. `independent` advances both chains from a ground-truth
//! synchronized prior history each step, so the indicator isolates how often
//! the digest pipeline itself absorbs channel damage on the current frame:
//! one bad frame never contaminates the next comparison (and the window
//! length T provably cannot change the estimate). `chained` runs the full
//! protocol, where a single divergence cascades until a resync, which is the
//! attack-relevant dynamic. Chained can only lose to independent.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel_sim::{self, ChannelParams};
use crate::error::{Error, Result};
use crate::keychain::{derive_session_key, KdfParams};
use crate::protocol::{run_session, ResyncPolicy, SessionParams};
use crate::sakp::{canonical_digest, GridSpec, SakpConfig, SemanticDigest};
use crate::scene::{SceneConfig, SceneGenerator};
use crate::seeds;

use super::keyspace::keyspace_log2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum McrMode {
    Independent,
    Chained,
}

impl std::fmt::Display for McrMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            McrMode::Independent => f.write_str("independent"),
            McrMode::Chained => f.write_str("chained"),
        }
    }
}

/// Sweep axes and sampling effort.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McrSkgConfig {
    pub mode: McrMode,
    /// Monte-Carlo runs R per axis point.
    pub runs: u32,
    /// Frames L per run; L-1 key comparisons each.
    pub frames_per_run: u32,
    pub snr_db: Vec<f64>,
    pub top_k: Vec<u32>,
    pub window: Vec<u32>,
    /// Grid cell counts Q (perfect squares).
    pub grid_cells: Vec<u32>,
}

impl Default for McrSkgConfig {
    fn default() -> Self {
        McrSkgConfig {
            mode: McrMode::Independent,
            runs: 100,
            frames_per_run: 50,
            snr_db: vec![5.0, 10.0, 25.0],
            top_k: vec![1, 3, 5, 10],
            window: vec![1, 3, 5],
            grid_cells: vec![900],
        }
    }
}

impl McrSkgConfig {
    pub fn validate(&self) -> Result<()> {
        if self.runs < 1 {
            return Err(Error::Config("runs must be >= 1".into()));
        }
        if self.frames_per_run < 2 {
            return Err(Error::Config("frames_per_run must be >= 2".into()));
        }
        if self.snr_db.is_empty()
            || self.top_k.is_empty()
            || self.window.is_empty()
            || self.grid_cells.is_empty()
        {
            return Err(Error::Config("every sweep axis needs at least one value".into()));
        }
        for &q in &self.grid_cells {
            GridSpec::square(q)?;
        }
        Ok(())
    }
}

/// Shared context a sweep runs in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McrContext {
    /// Channel template; `snr_db` and `seed` are overridden per point/run.
    pub channel: ChannelParams,
    pub kdf: KdfParams,
    pub scene: SceneConfig,
    /// Resync policy for chained mode (independent mode has no failures to
    /// resolve).
    pub policy: ResyncPolicy,
    pub seed: u64,
}

impl Default for McrContext {
    fn default() -> Self {
        McrContext {
            channel: ChannelParams::default(),
            kdf: KdfParams::default(),
            scene: SceneConfig::default(),
            policy: ResyncPolicy::None,
            seed: 0,
        }
    }
}

/// One estimated point of the sweep, both granularities. Carries the
/// realized distortion profile for reproducibility; the normative CSV keeps
/// its fixed columns, the JSON form emits everything.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McrPoint {
    pub snr_db: f64,
    pub top_k: u32,
    pub window: u32,
    pub grid_cells: u32,
    pub mode: McrMode,
    pub runs: u32,
    pub profile: crate::channel_sim::DistortionProfile,
    /// Frame-granularity mean over all R*(L-1) indicator samples.
    pub mcr_skg: f64,
    /// Binomial standard error of `mcr_skg`.
    pub stderr: f64,
    /// Session-granularity mean (average of per-run means).
    pub session_mean: f64,
    /// Standard error of `session_mean` across runs.
    pub session_stderr: f64,
    pub log2_space: f64,
    pub secure: bool,
}

/// All axis points of a sweep share one seed base, so run `r` uses the same
/// scene and channel streams at every point: axis comparisons are paired on
/// identical random draws (common random numbers), and window-length points
/// in independent mode coincide exactly.
fn sweep_seed(ctx_seed: u64) -> u64 {
    seeds::mix(ctx_seed, seeds::domain::AXES, 0)
}

/// Per-run indicator counts in independent mode.
///
/// The prior window is the sender's own digests on both sides (the
/// synchronized state a healthy session would be in); only the current
/// frame's digest differs between the two derivations.
fn independent_run(
    cfg: &SakpConfig,
    kdf: &KdfParams,
    channel: &ChannelParams,
    scene: &SceneConfig,
    frames: u32,
    scene_seed: u64,
) -> (u32, u32) {
    let profile = channel_sim::profile_from_snr(channel);
    let mut gen = SceneGenerator::new(scene.clone(), scene_seed);
    let mut shared_history: Vec<SemanticDigest> = Vec::new();
    let mut matches = 0u32;
    let mut total = 0u32;
    for j in 0..u64::from(frames) - 1 {
        let frame = gen.next().expect("scene generator is endless");
        let d_src = canonical_digest(&frame, cfg).expect("generated frames are valid");
        let reconstructed = channel_sim::distort_detections(
            &frame,
            &profile,
            cfg.num_classes,
            channel_sim::frame_seed(channel.seed, frame.frame_index),
        );
        let d_rec = canonical_digest(&reconstructed, cfg).expect("distortion preserves validity");

        let tail = shared_history
            .len()
            .saturating_sub(cfg.window as usize - 1);
        let mut window_s: Vec<SemanticDigest> = shared_history[tail..].to_vec();
        let mut window_r = window_s.clone();
        window_s.push(d_src.clone());
        window_r.push(d_rec);
        let next_index = j + 2;
        let k_s = derive_session_key(&window_s, next_index, kdf).expect("validated params");
        let k_r = derive_session_key(&window_r, next_index, kdf).expect("validated params");
        matches += u32::from(k_s.bytes() == k_r.bytes());
        total += 1;

        shared_history.push(d_src);
        if shared_history.len() > cfg.window as usize {
            shared_history.remove(0);
        }
    }
    (matches, total)
}

fn chained_run(
    cfg: &SakpConfig,
    ctx: &McrContext,
    channel: &ChannelParams,
    frames: u32,
    scene_seed: u64,
    session_seed: u64,
) -> Result<(u32, u32)> {
    let params = SessionParams {
        n_frames: u64::from(frames),
        cfg: cfg.clone(),
        kdf: ctx.kdf.clone(),
        channel: channel.clone(),
        policy: ctx.policy,
        seed: session_seed,
    };
    let scene = SceneGenerator::new(ctx.scene.clone(), scene_seed);
    let trace = run_session(&params, scene)?;
    // the first step compares the shared initial keys; skip it
    let matches = trace.steps.iter().skip(1).filter(|s| s.key_match).count() as u32;
    let total = trace.steps.len().saturating_sub(1) as u32;
    Ok((matches, total))
}

/// Estimates one axis point. Runs are parallel and independently seeded.
pub fn estimate_point(
    cfg_axes: (f64, u32, u32, u32),
    mode: McrMode,
    runs: u32,
    frames: u32,
    ctx: &McrContext,
) -> Result<McrPoint> {
    let (snr_db, top_k, window, grid_cells) = cfg_axes;
    let cfg = SakpConfig {
        top_k,
        grid: GridSpec::square(grid_cells)?,
        num_classes: ctx.scene.num_classes,
        window,
    };
    cfg.validate()?;
    ctx.kdf.validate()?;
    let channel_base = ctx.channel.with_snr(snr_db);
    channel_base.validate()?;
    let base = sweep_seed(ctx.seed);

    let per_run: Vec<(u32, u32)> = (0..runs)
        .into_par_iter()
        .map(|r| {
            let scene_seed = seeds::mix(base, seeds::domain::SCENE, u64::from(r));
            let channel = ChannelParams {
                seed: seeds::mix(base, seeds::domain::CHANNEL, u64::from(r)),
                ..channel_base.clone()
            };
            match mode {
                McrMode::Independent => Ok(independent_run(
                    &cfg, &ctx.kdf, &channel, &ctx.scene, frames, scene_seed,
                )),
                McrMode::Chained => chained_run(
                    &cfg,
                    ctx,
                    &channel,
                    frames,
                    scene_seed,
                    seeds::mix(base, seeds::domain::RUN, u64::from(r)),
                ),
            }
        })
        .collect::<Result<_>>()?;

    let matches: u64 = per_run.iter().map(|(m, _)| u64::from(*m)).sum();
    let total: u64 = per_run.iter().map(|(_, t)| u64::from(*t)).sum();
    let mcr = matches as f64 / total as f64;
    let stderr = (mcr * (1.0 - mcr) / total as f64).sqrt();

    let run_means: Vec<f64> = per_run
        .iter()
        .map(|(m, t)| f64::from(*m) / f64::from(*t))
        .collect();
    let session_mean = run_means.iter().sum::<f64>() / run_means.len() as f64;
    let session_stderr = if run_means.len() > 1 {
        let var = run_means
            .iter()
            .map(|m| (m - session_mean).powi(2))
            .sum::<f64>()
            / (run_means.len() - 1) as f64;
        (var / run_means.len() as f64).sqrt()
    } else {
        0.0
    };

    let space = keyspace_log2(ctx.scene.num_classes, grid_cells, top_k, window)?;
    Ok(McrPoint {
        snr_db,
        top_k,
        window,
        grid_cells,
        mode,
        runs,
        profile: channel_sim::profile_from_snr(&channel_base),
        mcr_skg: mcr,
        stderr,
        session_mean,
        session_stderr,
        log2_space: space.log2_space,
        secure: space.secure,
    })
}

/// Runs the full cross-product sweep in a stable order
/// (snr, then K, then T, then Q).
pub fn estimate_mcr_skg(cfg: &McrSkgConfig, ctx: &McrContext) -> Result<Vec<McrPoint>> {
    cfg.validate()?;
    let mut points = Vec::new();
    for &snr in &cfg.snr_db {
        for &k in &cfg.top_k {
            for &t in &cfg.window {
                for &q in &cfg.grid_cells {
                    points.push(estimate_point(
                        (snr, k, t, q),
                        cfg.mode,
                        cfg.runs,
                        cfg.frames_per_run,
                        ctx,
                    )?);
                }
            }
        }
    }
    Ok(points)
}

/// Normative CSV column order.
pub const CSV_COLUMNS: &str = "snr_db,K,T,Q,mode,runs,mcr_skg,stderr,log2_space,secure";

/// Writes sweep results as CSV. `config_echo` lines (the resolved run
/// configuration) go first as `#` comments.
pub fn write_csv(points: &[McrPoint], config_echo: &str, mut w: impl std::io::Write) -> Result<()> {
    writeln!(w, "# esae {} sweep", env!("CARGO_PKG_VERSION"))?;
    for line in config_echo.lines() {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "{CSV_COLUMNS}")?;
    for p in points {
        writeln!(
            w,
            "{},{},{},{},{},{},{:.6},{:.6},{:.4},{}",
            p.snr_db, p.top_k, p.window, p.grid_cells, p.mode, p.runs, p.mcr_skg, p.stderr,
            p.log2_space, p.secure
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn fast_ctx(seed: u64) -> McrContext {
        McrContext {
            kdf: KdfParams {
                iterations: 1_000,
                ..KdfParams::default()
            },
            seed,
            ..McrContext::default()
        }
    }

    #[test]
    fn zero_distortion_gives_exactly_one() {
        let ctx = fast_ctx(3);
        for mode in [McrMode::Independent, McrMode::Chained] {
            let p = estimate_point((1e9, 5, 2, 900), mode, 4, 12, &ctx).unwrap();
            assert_eq!(p.mcr_skg, 1.0, "{mode} mode");
            assert_eq!(p.stderr, 0.0);
            assert_eq!(p.session_mean, 1.0);
        }
    }

    #[test]
    fn forced_mismatch_gives_exactly_zero() {
        // channel that certainly empties every non-empty frame
        let ctx = McrContext {
            channel: ChannelParams {
                p_drop_max: 1.0,
                lambda_spurious_max: 0.0,
                sigma_center_max: 0.0,
                sigma_conf_max: 0.0,
                s_mid: 1e9, // logistic saturated at every finite SNR
                ..ChannelParams::default()
            },
            scene: SceneConfig {
                objects_mean: 12.0, // empty source frames are ~e^-12 rare
                ..SceneConfig::default()
            },
            ..fast_ctx(4)
        };
        let p = estimate_point((5.0, 5, 1, 900), McrMode::Independent, 4, 12, &ctx).unwrap();
        assert!(p.mcr_skg < 0.01, "got {}", p.mcr_skg);
    }

    #[test]
    fn independent_mode_is_window_invariant() {
        let ctx = fast_ctx(11);
        let p1 = estimate_point((10.0, 5, 1, 900), McrMode::Independent, 6, 15, &ctx).unwrap();
        let p3 = estimate_point((10.0, 5, 3, 900), McrMode::Independent, 6, 15, &ctx).unwrap();
        let p5 = estimate_point((10.0, 5, 5, 900), McrMode::Independent, 6, 15, &ctx).unwrap();
        assert_eq!(p1.mcr_skg, p3.mcr_skg);
        assert_eq!(p3.mcr_skg, p5.mcr_skg);
    }

    #[test]
    fn chained_never_beats_independent() {
        let ctx = fast_ctx(7);
        let ind = estimate_point((12.0, 3, 3, 900), McrMode::Independent, 12, 20, &ctx).unwrap();
        let cha = estimate_point((12.0, 3, 3, 900), McrMode::Chained, 12, 20, &ctx).unwrap();
        assert!(
            cha.mcr_skg <= ind.mcr_skg + 3.0 * (cha.stderr + ind.stderr),
            "chained {} vs independent {}",
            cha.mcr_skg,
            ind.mcr_skg
        );
    }

    #[test]
    fn stderr_shrinks_with_more_runs() {
        // operating point chosen so the match rate is mid-range; near 0 or 1
        // the p*(1-p) wobble between the two estimates swamps the R scaling
        let ctx = fast_ctx(13);
        let small = estimate_point((22.0, 5, 1, 900), McrMode::Independent, 100, 21, &ctx).unwrap();
        let large = estimate_point((22.0, 5, 1, 900), McrMode::Independent, 400, 21, &ctx).unwrap();
        assert!(
            small.mcr_skg > 0.2 && small.mcr_skg < 0.98,
            "need a non-degenerate point, got {}",
            small.mcr_skg
        );
        let ratio = small.stderr / large.stderr;
        // R quadrupled -> stderr halves
        assert!((ratio - 2.0).abs() < 0.35, "ratio {ratio}");
    }

    #[test]
    fn sweep_is_deterministic_and_ordered() {
        let cfg = McrSkgConfig {
            runs: 3,
            frames_per_run: 6,
            snr_db: vec![5.0, 25.0],
            top_k: vec![1, 5],
            window: vec![1],
            grid_cells: vec![100, 900],
            ..McrSkgConfig::default()
        };
        let ctx = fast_ctx(99);
        let a = estimate_mcr_skg(&cfg, &ctx).unwrap();
        let b = estimate_mcr_skg(&cfg, &ctx).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 8);
        assert_eq!((a[0].snr_db, a[0].top_k, a[0].grid_cells), (5.0, 1, 100));
        assert_eq!((a[7].snr_db, a[7].top_k, a[7].grid_cells), (25.0, 5, 900));

        let mut csv = Vec::new();
        write_csv(&a, "seed: 99", &mut csv).unwrap();
        let mut csv2 = Vec::new();
        write_csv(&b, "seed: 99", &mut csv2).unwrap();
        assert_eq!(csv, csv2);
        let text = String::from_utf8(csv).unwrap();
        let mut lines = text.lines().skip_while(|l| l.starts_with('#'));
        assert_eq!(lines.next().unwrap(), CSV_COLUMNS);
        assert_eq!(lines.count(), 8);
    }

    #[test]
    fn mcr_always_within_unit_interval() {
        let ctx = fast_ctx(17);
        let mut rng = <rand_chacha::ChaCha12Rng as rand::SeedableRng>::seed_from_u64(1);
        for _ in 0..4 {
            let snr = rng.gen_range(-5.0..30.0);
            let p = estimate_point((snr, 3, 2, 900), McrMode::Independent, 3, 8, &ctx).unwrap();
            assert!((0.0..=1.0).contains(&p.mcr_skg));
            assert!((0.0..=1.0).contains(&p.session_mean));
        }
    }
}
