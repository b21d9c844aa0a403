//! Second-order statistics of non-stationary channel ensembles.
//!
//! Every statistic is computed two ways: a closed form in the ensemble
//! eigenvalues and eigenfunctions, and a direct Monte-Carlo estimator on the
//! raw realizations. The pair gives an internal cross-check; the direct
//! estimators carry empirical standard errors so agreement can be judged at
//! a stated confidence.
//!
//! Statistics (lags and shifts are cyclic on the finite grid):
//!
//! * channel correlation function (CCF): 4-D correlation over lag variables,
//!   eigen form `sum_n lambda_n |R_psi_n| |R_phi_n|` with `R_f` the cyclic
//!   autocorrelation `R_f(d) = sum_x conj(f(x-d)) f(x)`, so the zero-lag bin
//!   equals `sum_n lambda_n`;
//! * local scattering function (LSF): nonnegative local power spectrum,
//!   eigen form `sum_n lambda_n |psi_n|^2 |phi_n|^2`;
//! * global scattering function and TF path gain: the two 2-D marginals of
//!   the LSF;
//! * total transmission gain: `sum_n lambda_n`.
//!
//! The closed forms pair one eigenfunction family with the delay-Doppler
//! axes and the other with the time-frequency axes. The printed convention
//! puts the row-group family psi on (tau, nu); the decomposition convention
//! keeps psi on the row group's own axes. Both are provided behind
//! [`AxisPairing`]; the identities (nonnegativity, marginalization, total
//! gain) hold under either.
//!
//! The eigen CCF takes magnitudes factor-wise, so it upper-bounds the
//! magnitude of the raw correlation when modes interfere; the two versions
//! coincide for processes whose mode autocorrelation products are
//! nonnegative (for example modes built from disjoint nonnegative bumps).

use ndarray::{Array2, Array4};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::ensemble::EnsembleEigenSystem;
use crate::error::{Error, Result};

/// Which eigenfunction family carries the delay-Doppler axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AxisPairing {
    /// Row-group family (psi) on (tau, nu), column-group family (phi) on
    /// (t, f).
    #[default]
    Printed,
    /// Families keep their own decomposition axes: psi on the row group,
    /// phi on the column group.
    Decomposition,
}

/// All Table-style statistics of one ensemble, eigen-based.
#[derive(Debug, Clone)]
pub struct StatsReport {
    /// CCF magnitudes over (dt, df, dtau, dnu).
    pub ccf: Array4<f64>,
    /// LSF over (t, f, tau, nu).
    pub lsf: Array4<f64>,
    /// Delay-Doppler marginal of the LSF.
    pub global_scattering: Array2<f64>,
    /// Time-frequency marginal of the LSF.
    pub tf_path_gain: Array2<f64>,
    /// Sum of ensemble eigenvalues.
    pub total_gain: f64,
    pub pairing: AxisPairing,
}

/// Cyclic autocorrelation `R(d) = sum_x conj(f(x-d)) f(x)` of a 2-D array.
pub fn cyclic_autocorr_2d(f: &Array2<Complex64>) -> Array2<Complex64> {
    let (n0, n1) = f.dim();
    let mut r = Array2::zeros((n0, n1));
    for d0 in 0..n0 {
        for d1 in 0..n1 {
            let mut acc = Complex64::ZERO;
            for a in 0..n0 {
                for b in 0..n1 {
                    let sa = (a + n0 - d0) % n0;
                    let sb = (b + n1 - d1) % n1;
                    acc += f[[sa, sb]].conj() * f[[a, b]];
                }
            }
            r[[d0, d1]] = acc;
        }
    }
    r
}

fn mode_correlations(ees: &EnsembleEigenSystem) -> Vec<(f64, Array2<Complex64>, Array2<Complex64>)> {
    ees.modes
        .iter()
        .map(|m| (m.lambda, cyclic_autocorr_2d(&m.psi), cyclic_autocorr_2d(&m.phi)))
        .collect()
}

/// Eigen-based CCF: `sum_n lambda_n |R_psi_n| |R_phi_n|`, axes arranged per
/// the pairing.
pub fn ccf_from_eigen(ees: &EnsembleEigenSystem, pairing: AxisPairing) -> Array4<f64> {
    let (r0, r1) = ees.row_dims;
    let (c0, c1) = ees.col_dims;
    let mods = mode_correlations(ees);
    let fill = |row_first: bool| -> Array4<f64> {
        let dims = if row_first {
            (r0, r1, c0, c1)
        } else {
            (c0, c1, r0, r1)
        };
        Array4::from_shape_fn(dims, |(a, b, c, d)| {
            let (dr, dc) = if row_first { ((a, b), (c, d)) } else { ((c, d), (a, b)) };
            mods.iter()
                .map(|(l, rpsi, rphi)| l * rpsi[[dr.0, dr.1]].norm() * rphi[[dc.0, dc.1]].norm())
                .sum()
        })
    };
    match pairing {
        // (dt, df) first: printed pairing puts phi (columns) on (t, f)
        AxisPairing::Printed => fill(false),
        AxisPairing::Decomposition => fill(true),
    }
}

/// Eigen-based LSF: `sum_n lambda_n |psi_n|^2 |phi_n|^2`, axes per pairing,
/// output over (t, f, tau, nu).
pub fn lsf_from_eigen(ees: &EnsembleEigenSystem, pairing: AxisPairing) -> Array4<f64> {
    let (r0, r1) = ees.row_dims;
    let (c0, c1) = ees.col_dims;
    let fill = |row_first: bool| -> Array4<f64> {
        let dims = if row_first {
            (r0, r1, c0, c1)
        } else {
            (c0, c1, r0, r1)
        };
        Array4::from_shape_fn(dims, |(a, b, c, d)| {
            let (ri, ci) = if row_first { ((a, b), (c, d)) } else { ((c, d), (a, b)) };
            ees.modes
                .iter()
                .map(|m| {
                    m.lambda * m.psi[[ri.0, ri.1]].norm_sqr() * m.phi[[ci.0, ci.1]].norm_sqr()
                })
                .sum()
        })
    };
    match pairing {
        AxisPairing::Printed => fill(false),
        AxisPairing::Decomposition => fill(true),
    }
}

/// Delay-Doppler marginal `sum over (t,f)` of the LSF:
/// `sum_n lambda_n |psi_n|^2` under the printed pairing.
pub fn global_scattering(ees: &EnsembleEigenSystem, pairing: AxisPairing) -> Array2<f64> {
    let pick_rows = matches!(pairing, AxisPairing::Printed);
    marginal_power(ees, pick_rows)
}

/// Time-frequency marginal `sum over (tau,nu)` of the LSF:
/// `sum_n lambda_n |phi_n|^2` under the printed pairing.
pub fn tf_path_gain(ees: &EnsembleEigenSystem, pairing: AxisPairing) -> Array2<f64> {
    let pick_rows = matches!(pairing, AxisPairing::Decomposition);
    marginal_power(ees, pick_rows)
}

fn marginal_power(ees: &EnsembleEigenSystem, rows: bool) -> Array2<f64> {
    let dims = if rows { ees.row_dims } else { ees.col_dims };
    Array2::from_shape_fn(dims, |(a, b)| {
        ees.modes
            .iter()
            .map(|m| {
                let f = if rows { &m.psi } else { &m.phi };
                m.lambda * f[[a, b]].norm_sqr()
            })
            .sum()
    })
}

/// Total transmission gain `sum_n lambda_n`.
pub fn total_gain(ees: &EnsembleEigenSystem) -> f64 {
    ees.total_power()
}

/// Full eigen-based report.
pub fn stats_report(ees: &EnsembleEigenSystem, pairing: AxisPairing) -> StatsReport {
    StatsReport {
        ccf: ccf_from_eigen(ees, pairing),
        lsf: lsf_from_eigen(ees, pairing),
        global_scattering: global_scattering(ees, pairing),
        tf_path_gain: tf_path_gain(ees, pairing),
        total_gain: total_gain(ees),
        pairing,
    }
}

fn fft4_in_place(a: &mut Array4<Complex64>, forward: bool) {
    let dims = a.raw_dim();
    let shape = [dims[0], dims[1], dims[2], dims[3]];
    let mut planner = FftPlanner::<f64>::new();
    for axis in 0..4 {
        let n = shape[axis];
        if n <= 1 {
            continue;
        }
        let fft = if forward {
            planner.plan_fft_forward(n)
        } else {
            planner.plan_fft_inverse(n)
        };
        let mut line = vec![Complex64::ZERO; n];
        // iterate over all lines along `axis`
        let outer: Vec<usize> = (0..4).filter(|&d| d != axis).collect();
        for i in 0..shape[outer[0]] {
            for j in 0..shape[outer[1]] {
                for k in 0..shape[outer[2]] {
                    let mut idx = [0usize; 4];
                    idx[outer[0]] = i;
                    idx[outer[1]] = j;
                    idx[outer[2]] = k;
                    for (p, v) in line.iter_mut().enumerate() {
                        idx[axis] = p;
                        *v = a[idx];
                    }
                    fft.process(&mut line);
                    for (p, v) in line.iter().enumerate() {
                        idx[axis] = p;
                        a[idx] = *v;
                    }
                }
            }
        }
    }
}

/// Direct CCF estimate with per-bin standard errors.
///
/// Per realization the cyclic autocorrelation
/// `sum_x conj(A(x - d)) A(x)` is computed via the 4-D FFT; the CCF is the
/// magnitude of the across-realization mean, and `sem` bounds the standard
/// error of that mean bin-wise.
pub fn ccf_direct_with_sem(realizations: &[Array4<Complex64>]) -> Result<(Array4<f64>, Array4<f64>)> {
    if realizations.len() < 2 {
        return Err(Error::InvalidConfig(
            "direct CCF needs at least 2 realizations".into(),
        ));
    }
    let dims = realizations[0].raw_dim();
    let total: usize = (0..4).map(|i| dims[i]).product();
    let n = realizations.len() as f64;

    let mut mean = Array4::<Complex64>::zeros(dims);
    let mut sq = Array4::<f64>::zeros(dims);
    for a in realizations {
        if a.raw_dim() != dims {
            return Err(Error::DimMismatch("ensemble shapes differ".into()));
        }
        let mut spec = a.clone();
        fft4_in_place(&mut spec, true);
        spec.mapv_inplace(|z| Complex64::new(z.norm_sqr(), 0.0));
        fft4_in_place(&mut spec, false);
        // rustfft leaves the inverse unnormalized
        spec.mapv_inplace(|z| z / total as f64);
        mean += &spec;
        for (s, v) in sq.iter_mut().zip(spec.iter()) {
            *s += v.norm_sqr();
        }
    }
    mean.mapv_inplace(|z| z / n);
    let mags = mean.mapv(|z| z.norm());
    let mut sem = Array4::<f64>::zeros(dims);
    for ((s, m), q) in sem.iter_mut().zip(mean.iter()).zip(sq.iter()) {
        let var = (q / n - m.norm_sqr()).max(0.0);
        *s = (var / n).sqrt();
    }
    Ok((mags, sem))
}

/// Direct CCF estimate (magnitude of the mean autocorrelation).
pub fn ccf_direct(realizations: &[Array4<Complex64>]) -> Result<Array4<f64>> {
    Ok(ccf_direct_with_sem(realizations)?.0)
}

/// Direct LSF estimate `mean_i |A_i|^2` with per-bin standard errors.
pub fn lsf_direct_with_sem(realizations: &[Array4<Complex64>]) -> Result<(Array4<f64>, Array4<f64>)> {
    if realizations.is_empty() {
        return Err(Error::InvalidConfig("empty ensemble".into()));
    }
    let dims = realizations[0].raw_dim();
    let n = realizations.len() as f64;
    let mut mean = Array4::<f64>::zeros(dims);
    let mut sq = Array4::<f64>::zeros(dims);
    for a in realizations {
        for ((m, s), v) in mean.iter_mut().zip(sq.iter_mut()).zip(a.iter()) {
            let p = v.norm_sqr();
            *m += p;
            *s += p * p;
        }
    }
    mean.mapv_inplace(|x| x / n);
    let mut sem = Array4::<f64>::zeros(dims);
    for ((s, m), q) in sem.iter_mut().zip(mean.iter()).zip(sq.iter()) {
        let var = (q / n - m * m).max(0.0);
        *s = (var / n).sqrt();
    }
    Ok((mean, sem))
}

/// Stationarity diagnostic from the direct CCF.
#[derive(Debug, Clone)]
pub struct StationarityReport {
    /// Fraction of CCF mass away from the zero delay-Doppler lag plane.
    pub off_support_mass: f64,
    /// CCF mass on the zero-lag plane (dtau, dnu) = (0, 0).
    pub support_mass: f64,
    pub total_mass: f64,
}

/// Measure how concentrated the CCF is on the zero delay-Doppler lag plane.
///
/// For an uncorrelated-scattering ensemble the correlation collapses onto
/// (dtau, dnu) = (0, 0) up to prototype-window smearing; time-varying
/// statistics push mass off that plane. Realizations are (t, f, tau, nu)
/// arrays so the last two axes are the delay-Doppler lags.
pub fn stationary_degenerate_check(realizations: &[Array4<Complex64>]) -> Result<StationarityReport> {
    let (ccf, _) = ccf_direct_with_sem(realizations)?;
    let dims = ccf.raw_dim();
    let mut total = 0.0;
    let mut support = 0.0;
    for a in 0..dims[0] {
        for b in 0..dims[1] {
            for c in 0..dims[2] {
                for d in 0..dims[3] {
                    let v = ccf[[a, b, c, d]];
                    total += v;
                    if c == 0 && d == 0 {
                        support += v;
                    }
                }
            }
        }
    }
    if total <= 0.0 {
        return Err(Error::Numerical("CCF has no mass".into()));
    }
    Ok(StationarityReport {
        off_support_mass: 1.0 - support / total,
        support_mass: support,
        total_mass: total,
    })
}
