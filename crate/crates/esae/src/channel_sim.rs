//! SNR-parameterized stochastic distortion of detection sets.
//!
//! Stands in for the whole encode -> channel -> decode -> re-detect loop:
//! instead of modeling RF and a detector, each rate (drop, spurious,
//! center jitter, confidence jitter) follows a logistic curve in SNR,
//! `r = r_max * sigmoid((s_mid - snr_db) / width)`, so all rates vanish as
//! SNR grows and saturate at their maxima in deep noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sakp::{Detection, FrameDetections};
use crate::seeds;

/// Channel model parameters.
///
/// The maxima for spurious insertions and center jitter were calibrated once
/// against the key-consistency target of the analysis suite (best secure
/// configuration at 25 dB lands in the 0.80..0.90 consistency band) and are
/// frozen; see `analysis::calibration`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelParams {
    pub snr_db: f64,
    /// Per-detection drop probability at saturation.
    pub p_drop_max: f64,
    /// Poisson mean of spurious detections per frame at saturation.
    pub lambda_spurious_max: f64,
    /// Center-jitter standard deviation at saturation, normalized units.
    pub sigma_center_max: f64,
    /// Confidence-jitter standard deviation at saturation.
    pub sigma_conf_max: f64,
    /// Logistic midpoint, dB.
    pub s_mid: f64,
    /// Logistic width, dB.
    pub width: f64,
    pub seed: u64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams {
            snr_db: 25.0,
            p_drop_max: 0.5,
            lambda_spurious_max: 8.0,
            sigma_center_max: 0.40,
            sigma_conf_max: 0.15,
            s_mid: 8.0,
            width: 2.5,
            seed: 0,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_drop_max) {
            return Err(Error::Config(format!(
                "p_drop_max {} outside [0,1]",
                self.p_drop_max
            )));
        }
        for (name, v) in [
            ("lambda_spurious_max", self.lambda_spurious_max),
            ("sigma_center_max", self.sigma_center_max),
            ("sigma_conf_max", self.sigma_conf_max),
        ] {
            if v.is_nan() || v < 0.0 {
                return Err(Error::Config(format!("{name} {v} must be >= 0")));
            }
        }
        if self.width.is_nan() || self.width <= 0.0 {
            return Err(Error::Config(format!("width {} must be > 0", self.width)));
        }
        if !self.snr_db.is_finite() || !self.s_mid.is_finite() {
            return Err(Error::Config("snr_db and s_mid must be finite".into()));
        }
        Ok(())
    }

    pub fn with_snr(&self, snr_db: f64) -> ChannelParams {
        ChannelParams { snr_db, ..self.clone() }
    }
}

/// Realized per-SNR distortion rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistortionProfile {
    pub p_drop: f64,
    pub lambda_spurious: f64,
    pub sigma_center: f64,
    pub sigma_conf: f64,
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Evaluates the logistic SNR map for every rate. Deterministic.
pub fn profile_from_snr(params: &ChannelParams) -> DistortionProfile {
    let level = logistic((params.s_mid - params.snr_db) / params.width);
    DistortionProfile {
        p_drop: params.p_drop_max * level,
        lambda_spurious: params.lambda_spurious_max * level,
        sigma_center: params.sigma_center_max * level,
        sigma_conf: params.sigma_conf_max * level,
    }
}

/// Per-frame distortion seed within one channel stream.
pub fn frame_seed(channel_seed: u64, frame_index: u64) -> u64 {
    seeds::mix(channel_seed, seeds::domain::FRAME, frame_index)
}

/// Applies one realization of the channel to a frame: independent drops,
/// Gaussian jitter of surviving centers and confidences (clamped back into
/// domain), then Poisson-many spurious low-confidence detections.
/// Deterministic given `seed`.
pub fn distort_detections(
    frame: &FrameDetections,
    profile: &DistortionProfile,
    num_classes: u32,
    seed: u64,
) -> FrameDetections {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    // sigma 0 is a point mass at 0, keeping the identity channel bit-exact
    let center_jitter = Normal::new(0.0, profile.sigma_center).expect("sigma_center >= 0");
    let conf_jitter = Normal::new(0.0, profile.sigma_conf).expect("sigma_conf >= 0");

    let mut out = Vec::with_capacity(frame.detections.len());
    for det in &frame.detections {
        if profile.p_drop > 0.0 && rng.gen_bool(profile.p_drop.min(1.0)) {
            continue;
        }
        let mut d = det.clone();
        d.cx = (d.cx + center_jitter.sample(&mut rng)).clamp(0.0, 1.0);
        d.cy = (d.cy + center_jitter.sample(&mut rng)).clamp(0.0, 1.0);
        d.confidence = (d.confidence + conf_jitter.sample(&mut rng)).clamp(0.0, 1.0);
        out.push(d);
    }

    let n_spurious = if profile.lambda_spurious > 0.0 {
        Poisson::new(profile.lambda_spurious)
            .expect("lambda > 0")
            .sample(&mut rng) as u64
    } else {
        0
    };
    for _ in 0..n_spurious {
        // low confidence by construction: spurious objects mostly perturb
        // top-K selection at larger K
        out.push(Detection {
            class_id: rng.gen_range(0..num_classes),
            confidence: rng.gen_range(0.0..0.5),
            cx: rng.gen::<f64>(),
            cy: rng.gen::<f64>(),
            w: rng.gen_range(0.01..=0.30),
            h: rng.gen_range(0.01..=0.30),
        });
    }

    FrameDetections::new(frame.frame_index, out)
}
