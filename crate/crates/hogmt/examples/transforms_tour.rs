//! Tour of the channel representations: impulse response, delay-Doppler
//! spreading function, time-frequency transfer function, and the windowed
//! projection kernel, with their exact round trips.
//!
//! ```bash
//! cargo run --release --example transforms_tour
//! ```

use hogmt::{
    atomic_kernel, impulse_to_spreading, spreading_to_impulse, spreading_to_transfer,
    synth_channel, transfer_to_spreading, ChannelConfig,
};

fn main() -> hogmt::Result<()> {
    let num_time = 24;
    let cfg = ChannelConfig {
        num_users: 1,
        num_time,
        tap_count_min: 2,
        tap_count_max: 5,
        gain_mean_profile: vec![0.3; num_time],
        gain_std_profile: vec![0.7; num_time],
        cross_user_coupling: 0.0,
        seed: 5,
    };
    let h = synth_channel(&cfg)?;
    let slice = h.pair_slice(0, 0);

    let s = impulse_to_spreading(slice.view());
    println!(
        "spreading function: {} delay bins x {} Doppler bins",
        s.n_delay(),
        s.n_doppler()
    );

    let back = spreading_to_impulse(&s);
    let err: f64 = (&slice - &back).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
        / slice.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    println!("impulse <-> spreading round trip: relative error {err:.2e}");

    let l = spreading_to_transfer(&s, None)?;
    println!(
        "transfer function: {} x {} time-frequency grid",
        l.n_time(),
        l.n_freq()
    );
    let s2 = transfer_to_spreading(&l, s.n_delay())?;
    let err: f64 = (&s.values - &s2.values)
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt()
        / s.values.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    println!("spreading <-> transfer round trip: relative error {err:.2e}");

    let es: f64 = s.values.iter().map(|z| z.norm_sqr()).sum();
    let el: f64 = l.values.iter().map(|z| z.norm_sqr()).sum();
    println!(
        "energy scaling |L|^2 = T*F*|S|^2: {:.6} vs {:.6}",
        el,
        (l.n_time() * l.n_freq()) as f64 * es
    );

    // the windowed projection of a time-invariant flat channel concentrates
    // at the delay-Doppler origin
    let flat = hogmt::TransferFunction {
        values: ndarray::Array2::from_elem((12, 12), num_complex::Complex64::new(1.0, 0.0)),
    };
    let hk = atomic_kernel(&flat, 2.0)?;
    let energy = |tau: usize, nu: usize| -> f64 {
        let mut e = 0.0;
        for t in 0..12 {
            for f in 0..12 {
                e += hk.values[[t, f, tau, nu]].norm_sqr();
            }
        }
        e
    };
    let origin = energy(0, 0);
    let mut runner_up: f64 = 0.0;
    for tau in 0..12 {
        for nu in 0..12 {
            if (tau, nu) != (0, 0) {
                runner_up = runner_up.max(energy(tau, nu));
            }
        }
    }
    println!(
        "flat-channel projection: origin bin energy {origin:.3}, strongest other bin {runner_up:.3e}"
    );
    Ok(())
}
