//! Non-stationary multi-user channel synthesis and the four channel
//! representations.
//!
//! A doubly-dispersive channel is carried around in one of four equivalent
//! forms:
//!
//! * time-varying impulse response `h(u, u', t, tau)` — gain from transmit
//!   antenna u' to user u at time t through a path delayed by tau symbols;
//! * delay-Doppler spreading function `S(tau, nu)`;
//! * time-frequency transfer function `L(t, f)`;
//! * the windowed time-frequency delay-Doppler kernel `H(t, f; tau, nu)`
//!   obtained by projecting onto shifted copies of a prototype system.
//!
//! Discrete conventions, fixed once and used everywhere: grids are uniform
//! and unit-spaced, synthesis sums are unnormalized, analysis sums carry
//! `1/N`, and all window shifts are cyclic.
//!
//! Synthesis draws an independent tap count per (user pair, time instance),
//! uniform on `[tap_count_min, tap_count_max]`, and fills the active taps
//! with complex Gaussian gains whose mean and standard deviation follow
//! per-time profiles. Cross-user paths are scaled by a coupling factor.
//! Everything is a pure function of the seed.

use ndarray::{Array2, Array4, ArrayView2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rustfft::FftPlanner;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::SymbolGrid;

/// Generative description of one non-stationary channel family.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig {
    pub num_users: usize,
    pub num_time: usize,
    /// Minimum delay-tap count per (u, u', t).
    pub tap_count_min: usize,
    /// Maximum delay-tap count per (u, u', t).
    pub tap_count_max: usize,
    /// Per-time-instance tap gain mean (on the real axis), length `num_time`.
    pub gain_mean_profile: Vec<f64>,
    /// Per-time-instance tap gain standard deviation, length `num_time`.
    pub gain_std_profile: Vec<f64>,
    /// Relative amplitude of u != u' paths, in [0, 1].
    pub cross_user_coupling: f64,
    pub seed: u64,
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_users == 0 || self.num_time == 0 {
            return Err(Error::InvalidConfig(
                "num_users and num_time must be positive".into(),
            ));
        }
        if !(1 <= self.tap_count_min && self.tap_count_min <= self.tap_count_max) {
            return Err(Error::InvalidConfig(format!(
                "need 1 <= tap_count_min <= tap_count_max, got [{}, {}]",
                self.tap_count_min, self.tap_count_max
            )));
        }
        if self.tap_count_max > self.num_time {
            return Err(Error::InvalidConfig(format!(
                "tap_count_max {} exceeds num_time {}",
                self.tap_count_max, self.num_time
            )));
        }
        if self.gain_mean_profile.len() != self.num_time
            || self.gain_std_profile.len() != self.num_time
        {
            return Err(Error::InvalidConfig(format!(
                "gain profiles must have length num_time = {}",
                self.num_time
            )));
        }
        if self.gain_std_profile.iter().any(|&s| !(s >= 0.0)) {
            return Err(Error::InvalidConfig(
                "gain_std_profile entries must be >= 0".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.cross_user_coupling) {
            return Err(Error::InvalidConfig(
                "cross_user_coupling must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// Time-varying impulse response h[u][u'][t][tau], dims (U, U, T, L_max).
///
/// Entries with `tau >= tap_counts[u][u'][t]` are zero.
#[derive(Debug, Clone)]
pub struct ImpulseResponse {
    pub values: Array4<Complex64>,
    /// Active tap count per (u, u', t).
    pub tap_counts: ndarray::Array3<usize>,
    pub max_delay: usize,
}

impl ImpulseResponse {
    pub fn num_users(&self) -> usize {
        self.values.shape()[0]
    }

    pub fn num_time(&self) -> usize {
        self.values.shape()[2]
    }

    /// The (t, tau) slice for one (u, u') pair, shape (T, L_max).
    pub fn pair_slice(&self, u: usize, u_prime: usize) -> Array2<Complex64> {
        let t_len = self.num_time();
        Array2::from_shape_fn((t_len, self.max_delay), |(t, tau)| {
            self.values[[u, u_prime, t, tau]]
        })
    }
}

/// Draw one channel realization.
///
/// Tap gains at time t are `mu_t + N(0, sigma_t^2/2) + j N(0, sigma_t^2/2)`,
/// scaled by the coupling factor for cross-user paths. Deterministic in the
/// config seed; the draw order is (u, u', t) outermost to innermost.
pub fn synth_channel(config: &ChannelConfig) -> Result<ImpulseResponse> {
    config.validate()?;
    let (num_u, num_t, l_max) = (config.num_users, config.num_time, config.tap_count_max);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut values = Array4::zeros((num_u, num_u, num_t, l_max));
    let mut tap_counts = ndarray::Array3::zeros((num_u, num_u, num_t));

    for u in 0..num_u {
        for up in 0..num_u {
            let coupling = if u == up {
                1.0
            } else {
                config.cross_user_coupling
            };
            for t in 0..num_t {
                let taps = rng.random_range(config.tap_count_min..=config.tap_count_max);
                tap_counts[[u, up, t]] = taps;
                let mu = config.gain_mean_profile[t];
                let comp_std = config.gain_std_profile[t] / 2f64.sqrt();
                let normal = Normal::new(0.0, comp_std)
                    .map_err(|e| Error::InvalidConfig(format!("bad gain std: {e}")))?;
                for tau in 0..taps {
                    let re = mu + normal.sample(&mut rng);
                    let im = normal.sample(&mut rng);
                    values[[u, up, t, tau]] = coupling * Complex64::new(re, im);
                }
            }
        }
    }

    Ok(ImpulseResponse {
        values,
        tap_counts,
        max_delay: l_max,
    })
}

/// Channel operator on the (u, t) grid: k[u][t][u'][t'], dims (U, T, U, T).
///
/// Kernels built from an impulse response are causal (zero for t' > t) with
/// finite memory (zero for t - t' >= max_delay).
#[derive(Debug, Clone)]
pub struct Kernel4D {
    pub values: Array4<Complex64>,
    pub num_users: usize,
    pub num_time: usize,
    /// Delay-memory bound when known (taps per time instance).
    pub memory: Option<usize>,
}

impl Kernel4D {
    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Instantaneous spatial coupling submatrix at time t: A[u][u'] = k[u][t][u'][t].
    pub fn spatial_submatrix(&self, t: usize) -> Array2<Complex64> {
        Array2::from_shape_fn((self.num_users, self.num_users), |(u, up)| {
            self.values[[u, t, up, t]]
        })
    }

    /// A purely spatial one-instant kernel from a U x U matrix.
    pub fn from_spatial(a: &Array2<Complex64>) -> Self {
        let num_users = a.nrows();
        assert_eq!(num_users, a.ncols(), "spatial kernel must be square");
        let mut values = Array4::zeros((num_users, 1, num_users, 1));
        for u in 0..num_users {
            for up in 0..num_users {
                values[[u, 0, up, 0]] = a[[u, up]];
            }
        }
        Self {
            values,
            num_users,
            num_time: 1,
            memory: Some(1),
        }
    }
}

/// k[u][t][u'][t'] = h[u][u'][t][t - t'] for 0 <= t - t' < max_delay, else 0.
pub fn impulse_to_kernel(h: &ImpulseResponse) -> Kernel4D {
    let num_u = h.num_users();
    let num_t = h.num_time();
    let l_max = h.max_delay;
    let mut values = Array4::zeros((num_u, num_t, num_u, num_t));
    for u in 0..num_u {
        for up in 0..num_u {
            for t in 0..num_t {
                let lo = t.saturating_sub(l_max - 1);
                for tp in lo..=t {
                    values[[u, t, up, tp]] = h.values[[u, up, t, t - tp]];
                }
            }
        }
    }
    Kernel4D {
        values,
        num_users: num_u,
        num_time: num_t,
        memory: Some(l_max),
    }
}

/// r(u,t) = sum over (u',t') of k(u,t;u',t') s(u',t').
pub fn apply_kernel(k: &Kernel4D, s: &SymbolGrid) -> Result<SymbolGrid> {
    if s.num_users() != k.num_users || s.num_time() != k.num_time {
        return Err(Error::DimMismatch(format!(
            "signal grid {}x{} does not match kernel {}x{}",
            s.num_users(),
            s.num_time(),
            k.num_users,
            k.num_time
        )));
    }
    let mut r = SymbolGrid::zeros(k.num_users, k.num_time);
    for u in 0..k.num_users {
        for t in 0..k.num_time {
            let mut acc = Complex64::ZERO;
            for up in 0..k.num_users {
                for tp in 0..k.num_time {
                    let kv = k.values[[u, t, up, tp]];
                    if kv != Complex64::ZERO {
                        acc += kv * s.values[[up, tp]];
                    }
                }
            }
            r.values[[u, t]] = acc;
        }
    }
    Ok(r)
}

/// Delay-Doppler spreading function S[tau][nu], dims (n_delay, n_doppler).
#[derive(Debug, Clone, PartialEq)]
pub struct SpreadingFunction {
    pub values: Array2<Complex64>,
}

impl SpreadingFunction {
    pub fn n_delay(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_doppler(&self) -> usize {
        self.values.ncols()
    }
}

/// Time-frequency transfer function L[t][f], dims (T, F).
#[derive(Debug, Clone, PartialEq)]
pub struct TransferFunction {
    pub values: Array2<Complex64>,
}

impl TransferFunction {
    pub fn n_time(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_freq(&self) -> usize {
        self.values.ncols()
    }
}

/// Doppler analysis of a (t, tau) impulse-response slice:
/// S[tau][nu] = (1/T) * sum_t h[t][tau] exp(-j 2 pi t nu / T).
pub fn impulse_to_spreading(h_slice: ArrayView2<'_, Complex64>) -> SpreadingFunction {
    let (n_time, n_delay) = h_slice.dim();
    let mut values = Array2::zeros((n_delay, n_time));
    for tau in 0..n_delay {
        for nu in 0..n_time {
            let mut acc = Complex64::ZERO;
            for t in 0..n_time {
                let phase = -2.0 * PI * (t as f64) * (nu as f64) / n_time as f64;
                acc += h_slice[[t, tau]] * Complex64::from_polar(1.0, phase);
            }
            values[[tau, nu]] = acc / n_time as f64;
        }
    }
    SpreadingFunction { values }
}

/// Doppler synthesis, inverse of [`impulse_to_spreading`]:
/// h[t][tau] = sum_nu S[tau][nu] exp(+j 2 pi t nu / T).
pub fn spreading_to_impulse(s: &SpreadingFunction) -> Array2<Complex64> {
    let (n_delay, n_time) = s.values.dim();
    Array2::from_shape_fn((n_time, n_delay), |(t, tau)| {
        let mut acc = Complex64::ZERO;
        for nu in 0..n_time {
            let phase = 2.0 * PI * (t as f64) * (nu as f64) / n_time as f64;
            acc += s.values[[tau, nu]] * Complex64::from_polar(1.0, phase);
        }
        acc
    })
}

/// 2-D synthesis to the time-frequency plane:
/// L[t][f] = sum over (tau, nu) of S[tau][nu] exp(+j 2 pi t nu / T) exp(-j 2 pi f tau / F).
///
/// `n_freq` defaults to the Doppler grid size (square TF grid); it must be at
/// least `n_delay` for the transform to be invertible.
pub fn spreading_to_transfer(s: &SpreadingFunction, n_freq: Option<usize>) -> Result<TransferFunction> {
    let (n_delay, n_time) = s.values.dim();
    let f_bins = n_freq.unwrap_or(n_time);
    if f_bins < n_delay {
        return Err(Error::DimMismatch(format!(
            "n_freq {f_bins} must be >= n_delay {n_delay}"
        )));
    }
    let values = Array2::from_shape_fn((n_time, f_bins), |(t, f)| {
        let mut acc = Complex64::ZERO;
        for tau in 0..n_delay {
            for nu in 0..n_time {
                let phase = 2.0 * PI * (t as f64) * (nu as f64) / n_time as f64
                    - 2.0 * PI * (f as f64) * (tau as f64) / f_bins as f64;
                acc += s.values[[tau, nu]] * Complex64::from_polar(1.0, phase);
            }
        }
        acc
    });
    Ok(TransferFunction { values })
}

/// Inverse of [`spreading_to_transfer`]:
/// S[tau][nu] = (1/(T F)) * sum over (t, f) of L[t][f] exp(-j 2 pi t nu / T) exp(+j 2 pi f tau / F).
pub fn transfer_to_spreading(l: &TransferFunction, n_delay: usize) -> Result<SpreadingFunction> {
    let (n_time, f_bins) = l.values.dim();
    if n_delay > f_bins {
        return Err(Error::DimMismatch(format!(
            "n_delay {n_delay} exceeds frequency grid {f_bins}"
        )));
    }
    let norm = (n_time * f_bins) as f64;
    let values = Array2::from_shape_fn((n_delay, n_time), |(tau, nu)| {
        let mut acc = Complex64::ZERO;
        for t in 0..n_time {
            for f in 0..f_bins {
                let phase = -2.0 * PI * (t as f64) * (nu as f64) / n_time as f64
                    + 2.0 * PI * (f as f64) * (tau as f64) / f_bins as f64;
                acc += l.values[[t, f]] * Complex64::from_polar(1.0, phase);
            }
        }
        acc / norm
    });
    Ok(SpreadingFunction { values })
}

/// Windowed time-frequency delay-Doppler kernel H[t][f][tau][nu],
/// dims (T, F, F, T), with the prototype window width it was computed with.
#[derive(Debug, Clone)]
pub struct AtomicKernel {
    pub values: Array4<Complex64>,
    pub prototype_width: f64,
}

impl AtomicKernel {
    pub fn n_time(&self) -> usize {
        self.values.shape()[0]
    }

    pub fn n_freq(&self) -> usize {
        self.values.shape()[1]
    }
}

/// Unit-energy cyclic Gaussian prototype window on a (T, F) grid, centered
/// at the origin of the time-frequency plane.
pub fn prototype_window(n_time: usize, n_freq: usize, width: f64) -> Result<Array2<Complex64>> {
    if !(width > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "prototype width must be positive, got {width}"
        )));
    }
    let wrap = |i: usize, n: usize| -> f64 {
        let i = i as isize;
        let n = n as isize;
        let d = if i <= n / 2 { i } else { i - n };
        d as f64
    };
    let mut w = Array2::zeros((n_time, n_freq));
    let mut energy = 0.0;
    for a in 0..n_time {
        for b in 0..n_freq {
            let (da, db) = (wrap(a, n_time), wrap(b, n_freq));
            let v = (-(da * da + db * db) / (2.0 * width * width)).exp();
            w[[a, b]] = Complex64::new(v, 0.0);
            energy += v * v;
        }
    }
    let scale = 1.0 / energy.sqrt();
    w.mapv_inplace(|z| z * scale);
    Ok(w)
}

/// Project the channel onto time-frequency shifted copies of the prototype:
///
/// H[t][f][tau][nu] = exp(+j 2 pi f tau / F) * sum over (t', f') of
///   L[t'][f'] conj(W[t'-t][f'-f]) exp(-j 2 pi (nu t' / T - tau f' / F))
///
/// with cyclic window indices. `tau` runs over the frequency grid and `nu`
/// over the time grid.
pub fn atomic_kernel(l: &TransferFunction, prototype_width: f64) -> Result<AtomicKernel> {
    let (n_time, n_freq) = l.values.dim();
    let window = prototype_window(n_time, n_freq, prototype_width)?;

    let mut planner = FftPlanner::<f64>::new();
    let fft_t = planner.plan_fft_forward(n_time);
    let fft_f_inv = planner.plan_fft_inverse(n_freq);

    let mut values = Array4::zeros((n_time, n_freq, n_freq, n_time));
    let mut work = vec![Complex64::ZERO; n_time.max(n_freq)];

    for t in 0..n_time {
        for f in 0..n_freq {
            // windowed transfer function, cyclic shift of the prototype
            let mut win = Array2::zeros((n_time, n_freq));
            for tp in 0..n_time {
                for fp in 0..n_freq {
                    let wa = (tp + n_time - t) % n_time;
                    let wb = (fp + n_freq - f) % n_freq;
                    win[[tp, fp]] = l.values[[tp, fp]] * window[[wa, wb]].conj();
                }
            }
            // t' -> nu : forward transform down each column
            for fp in 0..n_freq {
                for tp in 0..n_time {
                    work[tp] = win[[tp, fp]];
                }
                fft_t.process(&mut work[..n_time]);
                for nu in 0..n_time {
                    win[[nu, fp]] = work[nu];
                }
            }
            // f' -> tau : inverse-kernel transform along each row
            for nu in 0..n_time {
                for fp in 0..n_freq {
                    work[fp] = win[[nu, fp]];
                }
                fft_f_inv.process(&mut work[..n_freq]);
                for tau in 0..n_freq {
                    let phase = 2.0 * PI * (f as f64) * (tau as f64) / n_freq as f64;
                    values[[t, f, tau, nu]] = work[tau] * Complex64::from_polar(1.0, phase);
                }
            }
        }
    }

    Ok(AtomicKernel {
        values,
        prototype_width,
    })
}
