//! Dual-route check of the precoder: the eigen-domain coefficients must
//! reproduce the least-squares solution restricted to the kept transmit
//! subspace, computed independently by a dense QR solve.

use faer::linalg::solvers::SolveLstsq;
use faer::Mat;
use num_complex::Complex64;

use hogmt::bench::config::profile_sin;
use hogmt::modem::{modulate, random_bits, Constellation, Scheme};
use hogmt::{
    hogmt_decompose, impulse_to_kernel, precode, select_eigen, synth_channel, ChannelConfig,
    FlatteningMap,
};

#[test]
fn precoder_matches_restricted_least_squares_at_paper_scale() {
    let num_time = 100;
    let cfg = ChannelConfig {
        num_users: 10,
        num_time,
        tap_count_min: 10,
        tap_count_max: 20,
        gain_mean_profile: profile_sin(num_time, 0.5, 0.2, 1.0, 0.0),
        gain_std_profile: profile_sin(num_time, 0.5, 0.25, 2.0, 1.0),
        cross_user_coupling: 0.5,
        seed: 90_210,
    };
    let k = impulse_to_kernel(&synth_channel(&cfg).unwrap());
    let map = FlatteningMap::user_major(10, 100);
    let es = hogmt_decompose(&k, &map).unwrap();
    let kept = select_eigen(&es, 1e-4).unwrap();

    let c = Constellation::new(Scheme::Qam16);
    let bits = random_bits(10 * 100 * c.bits_per_symbol, 4);
    let s = modulate(&bits, &c, 10, 100).unwrap();
    let (x, report) = precode(&kept, &s).unwrap();
    assert_eq!(report.kept_n, kept.len());

    // independent route: min over c of || s - (K Phi_c) c ||, where Phi_c
    // holds the conjugated kept transmit eigenfunctions as columns, then
    // x_oracle = Phi_c c
    let n = map.len();
    let kk = kept.len();
    let km = hogmt::decompose::kernel_as_matrix(&k, &map);
    let kmat = Mat::from_fn(n, n, |i, j| km[[i, j]]);
    let mut phic = Mat::<Complex64>::zeros(n, kk);
    for (j, triple) in kept.triples.iter().enumerate() {
        for (i, v) in map.grid_to_vec(&triple.phi).into_iter().enumerate() {
            phic[(i, j)] = v.conj();
        }
    }
    let a = &kmat * &phic;
    let s_vec = map.grid_to_vec(&s.values);
    let rhs = Mat::from_fn(n, 1, |i, _| s_vec[i]);
    let coeff = a.qr().solve_lstsq(&rhs);
    let x_oracle = &phic * &coeff;

    let x_vec = map.grid_to_vec(&x.values);
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for i in 0..n {
        num += (x_vec[i] - x_oracle[(i, 0)]).norm_sqr();
        den += x_vec[i].norm_sqr();
    }
    let rel = (num / den).sqrt();
    assert!(
        rel < 1e-6,
        "precoder vs restricted least-squares oracle: relative gap {rel}"
    );
}

#[test]
fn precoder_matches_dense_solve_on_small_full_rank_kernels() {
    // with every mode kept on an invertible kernel both routes solve Kx = s
    let cfg = ChannelConfig {
        num_users: 3,
        num_time: 8,
        tap_count_min: 1,
        tap_count_max: 3,
        gain_mean_profile: vec![0.9; 8],
        gain_std_profile: vec![0.2; 8],
        cross_user_coupling: 0.3,
        seed: 12,
    };
    let k = impulse_to_kernel(&synth_channel(&cfg).unwrap());
    let map = FlatteningMap::user_major(3, 8);
    let es = hogmt_decompose(&k, &map).unwrap();
    let s = {
        let c = Constellation::new(Scheme::Qpsk);
        let bits = random_bits(3 * 8 * 2, 7);
        modulate(&bits, &c, 3, 8).unwrap()
    };
    let (x, _) = precode(&es, &s).unwrap();

    let km = hogmt::decompose::kernel_as_matrix(&k, &map);
    let direct = hogmt::linalg::LinearSolver::new(&km)
        .unwrap()
        .solve(&map.grid_to_vec(&s.values))
        .unwrap();
    let x_vec = map.grid_to_vec(&x.values);
    let mut worst = 0.0f64;
    for (a, b) in x_vec.iter().zip(&direct) {
        worst = worst.max((a - b).norm());
    }
    assert!(worst < 1e-9, "precoder vs dense solve: {worst}");
}
