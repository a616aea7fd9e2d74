//! Quantitative evaluation: key-consistency estimation, key-search-space
//! accounting, and the empirical eavesdropper distinguishing game.

pub mod calibration;
pub mod game;
pub mod keyspace;
pub mod mcr;

pub use calibration::{best_secure_config, secure_configurations, CALIBRATION_BAND};
pub use game::{
    run_distinguishing_game, AdversaryKind, GameConfig, GameOutcome, KeySource,
    KeychainKeySource, RandomKeySource,
};
pub use keyspace::{keyspace_log2, keyspace_log2_exact, KeyspaceReport, SECURITY_THRESHOLD_BITS};
pub use mcr::{
    estimate_mcr_skg, estimate_point, write_csv, McrContext, McrMode, McrPoint, McrSkgConfig,
    CSV_COLUMNS,
};
