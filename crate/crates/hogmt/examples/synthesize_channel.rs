//! Synthesize a non-stationary multi-user channel and inspect its kernel.
//!
//! ```bash
//! cargo run --release --example synthesize_channel
//! ```

use hogmt::bench::config::profile_sin;
use hogmt::{impulse_to_kernel, synth_channel, ChannelConfig};

fn main() -> hogmt::Result<()> {
    let num_time = 100;
    let cfg = ChannelConfig {
        num_users: 10,
        num_time,
        tap_count_min: 10,
        tap_count_max: 20,
        gain_mean_profile: profile_sin(num_time, 0.5, 0.2, 1.0, 0.0),
        gain_std_profile: profile_sin(num_time, 0.5, 0.25, 2.0, 1.0),
        cross_user_coupling: 0.5,
        seed: 7,
    };
    let h = synth_channel(&cfg)?;

    // tap counts drawn uniformly in [10, 20] per (user pair, instant)
    let (min_taps, max_taps) = h
        .tap_counts
        .iter()
        .fold((usize::MAX, 0), |(lo, hi), &l| (lo.min(l), hi.max(l)));
    println!("tap counts span [{min_taps}, {max_taps}]");

    // the per-instant tap variance follows the configured profile
    for t in [0, 25, 50, 75] {
        let mut acc = 0.0;
        let mut n = 0;
        for u in 0..cfg.num_users {
            for tau in 0..h.tap_counts[[u, u, t]] {
                let g = h.values[[u, u, t, tau]];
                acc += (g.re - cfg.gain_mean_profile[t]).powi(2) + g.im.powi(2);
                n += 1;
            }
        }
        println!(
            "t = {t:3}: empirical tap std {:.3} (profile {:.3})",
            (acc / n as f64).sqrt(),
            cfg.gain_std_profile[t]
        );
    }

    let k = impulse_to_kernel(&h);
    println!(
        "kernel: {} x {} grid, |k|_F = {:.3}, memory = {:?} taps",
        k.num_users,
        k.num_time,
        k.frobenius_norm(),
        k.memory
    );

    let out = std::env::temp_dir().join("hogmt_example_kernel.hgmt");
    hogmt::io::write_kernel(&out, &k)?;
    println!("kernel container written to {}", out.display());
    Ok(())
}
