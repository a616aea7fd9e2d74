//! Synthetic detection scenes: Poisson-many objects per frame, uniform
//! classes, uniform normalized geometry. The source-side stand-in for a
//! detector running on real imagery.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sakp::{Detection, FrameDetections};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneConfig {
    /// Mean object count per frame.
    pub objects_mean: f64,
    pub num_classes: u32,
}

impl Default for SceneConfig {
    fn default() -> Self {
        SceneConfig {
            objects_mean: 6.0,
            num_classes: 80,
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        if self.objects_mean.is_nan() || self.objects_mean <= 0.0 {
            return Err(Error::Config("objects_mean must be > 0".into()));
        }
        if self.num_classes < 2 {
            return Err(Error::Config("num_classes must be >= 2".into()));
        }
        Ok(())
    }
}

/// Endless deterministic frame stream; frame indices count up from 0.
pub struct SceneGenerator {
    cfg: SceneConfig,
    rng: ChaCha12Rng,
    next_index: u64,
}

impl SceneGenerator {
    pub fn new(cfg: SceneConfig, seed: u64) -> Self {
        SceneGenerator {
            cfg,
            rng: ChaCha12Rng::seed_from_u64(seed),
            next_index: 0,
        }
    }
}

impl Iterator for SceneGenerator {
    type Item = FrameDetections;

    fn next(&mut self) -> Option<FrameDetections> {
        let count = Poisson::new(self.cfg.objects_mean)
            .expect("objects_mean > 0")
            .sample(&mut self.rng) as u64;
        let detections = (0..count)
            .map(|_| Detection {
                class_id: self.rng.gen_range(0..self.cfg.num_classes),
                // genuinely low-confidence objects exist so top-K selection
                // has something to get wrong under channel noise
                confidence: self.rng.gen_range(0.30..0.99),
                cx: self.rng.gen::<f64>(),
                cy: self.rng.gen::<f64>(),
                w: self.rng.gen_range(0.02..=0.30),
                h: self.rng.gen_range(0.02..=0.30),
            })
            .collect();
        let frame = FrameDetections::new(self.next_index, detections);
        self.next_index += 1;
        Some(frame)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let a: Vec<_> = SceneGenerator::new(SceneConfig::default(), 7).take(20).collect();
        let b: Vec<_> = SceneGenerator::new(SceneConfig::default(), 7).take(20).collect();
        let c: Vec<_> = SceneGenerator::new(SceneConfig::default(), 8).take(20).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn frames_are_valid_and_indexed() {
        let frames: Vec<_> = SceneGenerator::new(SceneConfig::default(), 3).take(50).collect();
        for (i, frame) in frames.iter().enumerate() {
            assert_eq!(frame.frame_index, i as u64);
            frame.validate(80).unwrap();
        }
        let mean = frames.iter().map(|f| f.detections.len()).sum::<usize>() as f64 / 50.0;
        assert!((mean - 6.0).abs() < 2.0, "empirical mean {mean}");
    }
}
