//! Interference-free precoding on a random multi-user channel, plus what a
//! truncated eigen selection costs.
//!
//! ```bash
//! cargo run --release --example precode_roundtrip
//! ```

use hogmt::modem::{modulate, random_bits, Constellation, Scheme};
use hogmt::{
    hogmt_decompose, impulse_to_kernel, precode, residual_interference, select_eigen,
    synth_channel, ChannelConfig, FlatteningMap,
};

fn main() -> hogmt::Result<()> {
    let (num_users, num_time) = (4, 12);
    let cfg = ChannelConfig {
        num_users,
        num_time,
        tap_count_min: 2,
        tap_count_max: 5,
        gain_mean_profile: vec![0.5; num_time],
        gain_std_profile: vec![0.6; num_time],
        cross_user_coupling: 0.5,
        seed: 3,
    };
    let k = impulse_to_kernel(&synth_channel(&cfg)?);
    let map = FlatteningMap::user_major(num_users, num_time);
    let es = hogmt_decompose(&k, &map)?;

    let c = Constellation::new(Scheme::Qam16);
    let bits = random_bits(num_users * num_time * c.bits_per_symbol, 42);
    let s = modulate(&bits, &c, num_users, num_time)?;

    // full selection: the receiver sees the data symbols directly
    let (x, report) = precode(&es, &s)?;
    let (_, rel) = residual_interference(&k, &x, &s)?;
    println!(
        "full selection: {} modes, relative residual {:.2e}, tx power {:.2}",
        report.kept_n,
        rel.sqrt(),
        report.tx_power
    );

    // truncation leaves exactly the discarded-mode energy as interference
    for eps in [1e-1, 1e-2, 1e-3] {
        let kept = select_eigen(&es, eps)?;
        let (x, report) = precode(&kept, &s)?;
        let (err2, rel) = residual_interference(&k, &x, &s)?;
        println!(
            "eps = {eps:.0e}: kept {} of {}, residual^2 = {err2:.4}, relative {:.3}, tx power {:.2}",
            report.kept_n,
            es.len(),
            rel.sqrt(),
            report.tx_power
        );
    }
    Ok(())
}
