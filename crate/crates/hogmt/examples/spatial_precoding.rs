//! Purely spatial precoding over a 30-user broadcast kernel, compared with
//! the Tomlinson-Harashima dirty-paper surrogate.
//!
//! ```bash
//! cargo run --release --example spatial_precoding
//! ```

use std::path::PathBuf;

use hogmt::bench::{run_spatial_demo, ExperimentConfig};
use hogmt::modem::Scheme;

fn main() -> hogmt::Result<()> {
    let mut cfg = ExperimentConfig::paper_spatial(1, PathBuf::from("/tmp/hogmt_spatial_demo"));
    cfg.trials = 800; // quick demo; the acceptance suite runs the full count
    let sweep = run_spatial_demo(&cfg)?;

    println!("30 users, 16-QAM, relative thresholds; BER by arm:");
    println!("{:>8} {:>12} {:>12} {:>12}", "snr_db", "ideal", "thp_zf", "hogmt");
    for &snr in &cfg.snr_db_grid {
        let pick = |method: &str, eps: Option<f64>| -> f64 {
            sweep
                .curve(method, Scheme::Qam16, eps)
                .iter()
                .find(|a| a.snr_db == snr)
                .map(|a| a.ber())
                .unwrap_or(f64::NAN)
        };
        println!(
            "{snr:>8} {:>12.3e} {:>12.3e} {:>12.3e}  (eps 1e-1: {:.3e})",
            pick("ideal", None),
            pick("thp_zf", None),
            pick("hogmt", Some(1e-2)),
            pick("hogmt", Some(1e-1)),
        );
    }
    println!(
        "coarse selection floors high; eps = 1e-2 tracks the ideal curve and \
         overtakes the surrogate in the mid-SNR range"
    );
    Ok(())
}
