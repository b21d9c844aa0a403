//! A reduced-scale BER sweep: eigen-precoding at several selection
//! thresholds against the ideal link, zero forcing, and the THP surrogate.
//!
//! The full 10-user, 100-instant configuration is what the acceptance suite
//! runs; this example uses a 4-user, 40-instant channel so it finishes in a
//! few seconds.
//!
//! ```bash
//! cargo run --release --example ber_sweep
//! ```

use std::path::PathBuf;

use hogmt::bench::{run_ber_sweep, write_sweep_outputs, ExperimentConfig};
use hogmt::modem::Scheme;

fn main() -> hogmt::Result<()> {
    let mut cfg =
        ExperimentConfig::paper_spatiotemporal(9, PathBuf::from("/tmp/hogmt_ber_sweep_demo"));
    cfg.channel.num_users = 4;
    cfg.channel.num_time = 40;
    cfg.channel.tap_count_min = 4;
    cfg.channel.tap_count_max = 8;
    cfg.channel.gain_mean_profile = hogmt::bench::config::profile_sin(40, 0.5, 0.2, 1.0, 0.0);
    cfg.channel.gain_std_profile = hogmt::bench::config::profile_sin(40, 0.5, 0.25, 2.0, 1.0);
    cfg.trials = 60;
    cfg.snr_db_grid = vec![8.0, 12.0, 16.0, 20.0];

    let sweep = run_ber_sweep(&cfg)?;
    let manifest = write_sweep_outputs(&cfg, &sweep)?;

    println!("BER by arm (16-QAM, warmup of {} instants excluded):", cfg.effective_warmup());
    print!("{:>8}", "snr_db");
    let arms: Vec<(String, Option<f64>)> = vec![
        ("ideal".into(), None),
        ("hogmt".into(), Some(1e-4)),
        ("hogmt".into(), Some(1e-2)),
        ("hogmt".into(), Some(1e-1)),
        ("zf".into(), None),
        ("thp_zf".into(), None),
    ];
    for (m, e) in &arms {
        match e {
            Some(e) => print!("{:>14}", format!("{m}@{e:.0e}")),
            None => print!("{:>14}", m),
        }
    }
    println!();
    for &snr in &cfg.snr_db_grid {
        print!("{snr:>8}");
        for (m, e) in &arms {
            let ber = sweep
                .curve(m, Scheme::Qam16, *e)
                .iter()
                .find(|a| a.snr_db == snr)
                .map(|a| a.ber())
                .unwrap_or(f64::NAN);
            print!("{ber:>14.3e}");
        }
        println!();
    }
    println!("artifacts: {}", manifest.display());
    Ok(())
}
