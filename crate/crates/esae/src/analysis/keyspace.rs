//! Semantic key-search-space size, computed in the log domain.
//!
//! An attacker guessing the digest window instead of the 128-bit key faces
//! `(N*Q)^(K*T) / K!` candidates. The mechanism is semantically secure once
//! that count exceeds `2^128`, i.e. `K*T*log2(N*Q) - log2(K!) > 128`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bit-level search space of AES-128 the semantic space must beat.
pub const SECURITY_THRESHOLD_BITS: f64 = 128.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyspaceReport {
    pub num_classes: u32,
    pub grid_cells: u32,
    pub top_k: u32,
    pub window: u32,
    /// log2 of the semantic key-search-space size.
    pub log2_space: f64,
    /// True iff `log2_space > 128`.
    pub secure: bool,
}

/// `log2(k!)` as a sum of logs; never materializes the factorial.
fn log2_factorial(k: u32) -> f64 {
    (2..=u64::from(k)).map(|i| (i as f64).log2()).sum()
}

/// Log-domain evaluation of the semantic search space.
pub fn keyspace_log2(num_classes: u32, grid_cells: u32, top_k: u32, window: u32) -> Result<KeyspaceReport> {
    if num_classes < 2 {
        return Err(Error::InputDomain("num_classes must be >= 2".into()));
    }
    if grid_cells < 1 || top_k < 1 || window < 1 {
        return Err(Error::InputDomain(
            "grid_cells, top_k, and window must be >= 1".into(),
        ));
    }
    let per_pair_bits = (f64::from(num_classes) * f64::from(grid_cells)).log2();
    let log2_space =
        f64::from(top_k) * f64::from(window) * per_pair_bits - log2_factorial(top_k);
    Ok(KeyspaceReport {
        num_classes,
        grid_cells,
        top_k,
        window,
        log2_space,
        secure: log2_space > SECURITY_THRESHOLD_BITS,
    })
}

/// Exact-integer cross-check. Computes `(N*Q)^(K*T)` and `K!` as integers
/// and takes logs of the exact values; available whenever the power fits in
/// a `u128` (in particular for `K*T*log2(N*Q) <= 64`).
pub fn keyspace_log2_exact(
    num_classes: u32,
    grid_cells: u32,
    top_k: u32,
    window: u32,
) -> Option<f64> {
    let base = u128::from(num_classes).checked_mul(u128::from(grid_cells))?;
    let exponent = u64::from(top_k).checked_mul(u64::from(window))?;
    let mut power: u128 = 1;
    for _ in 0..exponent {
        power = power.checked_mul(base)?;
    }
    let mut factorial: u128 = 1;
    for i in 2..=u128::from(top_k) {
        factorial = factorial.checked_mul(i)?;
    }
    Some((power as f64).log2() - (factorial as f64).log2())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frozen_reference_values() {
        // N=80 classes, Q=900 cells: the canonical configuration
        let r = keyspace_log2(80, 900, 5, 1).unwrap();
        assert!((r.log2_space - 73.77165583491349).abs() < 1e-9);
        assert!(!r.secure);

        let r = keyspace_log2(80, 900, 3, 3).unwrap();
        assert!((r.log2_space - 142.63642107421845).abs() < 1e-9);
        assert!(r.secure);
    }

    #[test]
    fn single_binary_pair_is_one_bit() {
        let r = keyspace_log2(2, 1, 1, 1).unwrap();
        assert_eq!(r.log2_space, 1.0);
        assert!(!r.secure);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(keyspace_log2(1, 900, 5, 1).is_err());
        assert!(keyspace_log2(80, 0, 5, 1).is_err());
        assert!(keyspace_log2(80, 900, 0, 1).is_err());
        assert!(keyspace_log2(80, 900, 5, 0).is_err());
    }

    #[test]
    fn log_domain_agrees_with_exact_integers() {
        for n in [2u32, 10, 80] {
            for q in [1u32, 16, 100, 900] {
                for k in 1u32..=6 {
                    for t in 1u32..=4 {
                        let bits = f64::from(k) * f64::from(t)
                            * (f64::from(n) * f64::from(q)).log2();
                        if bits > 64.0 {
                            continue;
                        }
                        let exact = keyspace_log2_exact(n, q, k, t)
                            .expect("within u128 range by construction");
                        let log = keyspace_log2(n, q, k, t).unwrap().log2_space;
                        assert!(
                            (exact - log).abs() < 1e-6,
                            "N={n} Q={q} K={k} T={t}: {exact} vs {log}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn monotone_in_each_axis() {
        for n in [2u32, 40, 80] {
            for q in [100u32, 900] {
                for k in 1u32..=10 {
                    for t in 1u32..=5 {
                        let base = keyspace_log2(n, q, k, t).unwrap().log2_space;
                        assert!(keyspace_log2(n + 1, q, k, t).unwrap().log2_space > base);
                        assert!(keyspace_log2(n, q + 1, k, t).unwrap().log2_space > base);
                        assert!(keyspace_log2(n, q, k, t + 1).unwrap().log2_space > base);
                        // in K only when another pair is worth more than the
                        // extra ordering freedom it buys the attacker
                        if (f64::from(n) * f64::from(q)).log2() > f64::from(k + 1).log2() {
                            assert!(keyspace_log2(n, q, k + 1, t).unwrap().log2_space > base);
                        }
                    }
                }
            }
        }
    }
}
