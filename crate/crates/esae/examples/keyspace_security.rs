//! Semantic key-search-space accounting: which (K, T, Q) configurations
//! push an attacker guessing digest windows past the 2^128 work of brute
//! forcing AES-128 directly.
//!
//! Run with: cargo run --example keyspace_security

use esae::analysis::{keyspace_log2, keyspace_log2_exact};

fn main() -> anyhow::Result<()> {
    let n = 80; // class vocabulary

    println!("N={n} classes; semantic space = (N*Q)^(K*T) / K!\n");
    println!("{:>4} {:>3} {:>5}  {:>9}  verdict", "Q", "K", "T", "bits");
    for &q in &[100u32, 900, 2500] {
        for &(k, t) in &[(5u32, 1u32), (10, 1), (3, 3), (5, 3), (10, 5)] {
            let report = keyspace_log2(n, q, k, t)?;
            println!(
                "{q:>4} {k:>3} {t:>5}  {:>9.2}  {}",
                report.log2_space,
                if report.secure { "SECURE" } else { "insecure" }
            );
        }
    }

    // the log-domain path agrees with exact integer arithmetic wherever the
    // power still fits in machine integers
    let log = keyspace_log2(n, 900, 2, 2)?.log2_space;
    let exact = keyspace_log2_exact(n, 900, 2, 2).expect("fits in u128");
    println!("\ncross-check at K=2 T=2 Q=900: log-domain {log:.9} vs exact {exact:.9}");
    assert!((log - exact).abs() < 1e-6);

    println!("\nA window helps multiplicatively: K=3 T=3 clears 128 bits where");
    println!("K=5 T=1 (more objects, no history) does not.");
    Ok(())
}
