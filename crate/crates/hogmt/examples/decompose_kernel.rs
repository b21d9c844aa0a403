//! Decompose a channel kernel into dual eigenfunction pairs and verify the
//! decomposition properties: joint orthonormality, reconstruction, duality,
//! and the sigma spectrum.
//!
//! ```bash
//! cargo run --release --example decompose_kernel
//! ```

use hogmt::decompose::orthonormality_defect;
use hogmt::{
    hogmt_decompose, impulse_to_kernel, reconstruction_error, synth_channel, verify_duality,
    ChannelConfig, FlatteningMap,
};

fn main() -> hogmt::Result<()> {
    let cfg = ChannelConfig {
        num_users: 4,
        num_time: 16,
        tap_count_min: 3,
        tap_count_max: 6,
        gain_mean_profile: vec![0.5; 16],
        gain_std_profile: vec![0.6; 16],
        cross_user_coupling: 0.5,
        seed: 11,
    };
    let k = impulse_to_kernel(&synth_channel(&cfg)?);
    let map = FlatteningMap::user_major(cfg.num_users, cfg.num_time);
    let es = hogmt_decompose(&k, &map)?;

    println!("modes: {}", es.len());
    let sigmas = es.sigmas();
    println!("sigma_1 = {:.4}, sigma_min = {:.2e}", sigmas[0], sigmas[sigmas.len() - 1]);
    for d in 0..=4 {
        let cut = sigmas[0] * 10f64.powi(-d);
        println!(
            "  sigma > 1e-{d} * sigma_1 : {} modes",
            sigmas.iter().filter(|&&s| s > cut).count()
        );
    }

    let (off, diag) = orthonormality_defect(&es);
    println!("orthonormality: max off-diagonal {off:.2e}, max diagonal deviation {diag:.2e}");

    println!("reconstruction residual: {:.2e}", reconstruction_error(&k, &es));

    let fro2 = k.frobenius_norm().powi(2);
    println!(
        "energy identity: sum sigma^2 = {:.6}, |k|_F^2 = {:.6}",
        es.energy(),
        fro2
    );

    // transmitting conj(phi_n) through the channel yields sigma_n psi_n
    let residuals = verify_duality(&k, &es)?;
    let worst = residuals
        .iter()
        .zip(&sigmas)
        .filter(|(_, &s)| s > 1e-8 * sigmas[0])
        .map(|(r, _)| *r)
        .fold(0.0f64, f64::max);
    println!("worst duality residual over significant modes: {worst:.2e}");
    Ok(())
}
