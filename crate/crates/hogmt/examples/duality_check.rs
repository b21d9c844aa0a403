//! The flat-fading sub-channel property: transmitting one conjugated
//! transmit-side eigenfunction through the channel yields the matching
//! receive-side eigenfunction scaled by its singular value.
//!
//! ```bash
//! cargo run --release --example duality_check
//! ```

use hogmt::{
    apply_kernel, hogmt_decompose, impulse_to_kernel, synth_channel, verify_duality,
    ChannelConfig, FlatteningMap, SymbolGrid,
};

fn main() -> hogmt::Result<()> {
    let cfg = ChannelConfig {
        num_users: 3,
        num_time: 10,
        tap_count_min: 2,
        tap_count_max: 4,
        gain_mean_profile: vec![0.4; 10],
        gain_std_profile: vec![0.5; 10],
        cross_user_coupling: 0.6,
        seed: 17,
    };
    let k = impulse_to_kernel(&synth_channel(&cfg)?);
    let map = FlatteningMap::user_major(3, 10);
    let es = hogmt_decompose(&k, &map)?;

    // send conj(phi_1) through the channel and compare with sigma_1 psi_1
    let first = &es.triples[0];
    let tx = SymbolGrid::new(first.phi.mapv(|z| z.conj()));
    let rx = apply_kernel(&k, &tx)?;
    let mut err = 0.0;
    let mut scale = 0.0;
    for (r, p) in rx.values.iter().zip(first.psi.iter()) {
        err += (r - first.sigma * p).norm_sqr();
        scale += (first.sigma * p).norm_sqr();
    }
    println!(
        "mode 1: sigma = {:.4}, relative propagation error {:.2e}",
        first.sigma,
        (err / scale).sqrt()
    );

    let residuals = verify_duality(&k, &es)?;
    let sigma_1 = es.triples[0].sigma;
    let worst = residuals
        .iter()
        .zip(es.sigmas())
        .filter(|(_, s)| *s > 1e-8 * sigma_1)
        .map(|(r, _)| *r)
        .fold(0.0f64, f64::max);
    println!(
        "all {} modes: worst duality residual {:.2e} over significant modes",
        es.len(),
        worst
    );
    Ok(())
}
