//! Interference-cancelling precoding from the kernel eigensystem.
//!
//! Given the decomposition k = sum_n sigma_n psi_n phi_n, the precoded
//! signal for data s(u,t) is
//!
//! ```text
//! x(u,t) = sum_n x_n conj(phi_n(u,t)),   x_n = <s, psi_n> / sigma_n
//! ```
//!
//! Propagation maps each transmitted conj(phi_n) to sigma_n psi_n, so the
//! noiseless received signal is the projection of s onto the kept psi
//! subspace: with every triple kept on a full-rank kernel, the receiver sees
//! s itself and needs no equalization or decoding matrix. Truncation leaves
//! exactly the energy of s in the discarded psi directions as residual
//! interference.
//!
//! Power policy: transmission is unnormalized by default (the coefficients
//! 1/sigma_n can pump up transmit power substantially on near-singular
//! kernels; `PrecodeReport::tx_power` surfaces this). An optional
//! genie-normalized mode rescales to a power budget and lets the receiver
//! undo the known scalar.

use num_complex::Complex64;

use crate::channel::{apply_kernel, Kernel4D};
use crate::decompose::{gmt_decompose, EigenSystem};
use crate::error::{Error, Result};
use crate::grid::SymbolGrid;
use crate::linalg;

/// Diagnostics from one precode call.
#[derive(Debug, Clone)]
pub struct PrecodeReport {
    /// Per-mode coefficients x_n, in eigensystem order.
    pub coefficients: Vec<Complex64>,
    /// Number of modes used.
    pub kept_n: usize,
    /// Mean per-symbol transmit power of x.
    pub tx_power: f64,
}

/// Precode a symbol grid against a (selected) eigensystem.
pub fn precode(es: &EigenSystem, s: &SymbolGrid) -> Result<(SymbolGrid, PrecodeReport)> {
    if es.is_empty() {
        return Err(Error::EmptySelection("no eigen triples to precode with".into()));
    }
    if s.num_users() != es.num_users || s.num_time() != es.num_time {
        return Err(Error::DimMismatch(format!(
            "symbol grid {}x{} does not match eigensystem {}x{}",
            s.num_users(),
            s.num_time(),
            es.num_users,
            es.num_time
        )));
    }
    let s_flat: Vec<Complex64> = s.values.iter().cloned().collect();
    let mut x = SymbolGrid::zeros(es.num_users, es.num_time);
    let mut coefficients = Vec::with_capacity(es.len());
    for triple in &es.triples {
        if !(triple.sigma > 0.0) {
            return Err(Error::Numerical(format!(
                "selected triple has nonpositive sigma {}",
                triple.sigma
            )));
        }
        let psi_flat: Vec<Complex64> = triple.psi.iter().cloned().collect();
        let xn = linalg::inner(&s_flat, &psi_flat) / triple.sigma;
        coefficients.push(xn);
        for (xv, pv) in x.values.iter_mut().zip(triple.phi.iter()) {
            *xv += xn * pv.conj();
        }
    }
    let report = PrecodeReport {
        kept_n: coefficients.len(),
        tx_power: x.power(),
        coefficients,
    };
    Ok((x, report))
}

/// Spatial-only specialization: precode a U-vector against a 2-D kernel.
///
/// Decomposes k2 on the fly and keeps every mode above the numerical floor,
/// so for an invertible kernel the received vector equals s.
pub fn precode_spatial(
    k2: &ndarray::Array2<Complex64>,
    s: &[Complex64],
) -> Result<Vec<Complex64>> {
    if k2.nrows() != k2.ncols() || k2.nrows() != s.len() {
        return Err(Error::DimMismatch(format!(
            "kernel {}x{} vs signal length {}",
            k2.nrows(),
            k2.ncols(),
            s.len()
        )));
    }
    let d = gmt_decompose(k2)?;
    let sigma_1 = d.sigmas.first().copied().unwrap_or(0.0);
    let floor = sigma_1 * 1e-14;
    let mut x = vec![Complex64::ZERO; s.len()];
    for n in 0..d.sigmas.len() {
        let sigma = d.sigmas[n];
        if sigma <= floor {
            break;
        }
        let psi: Vec<Complex64> = d.psi.column(n).to_vec();
        let xn = linalg::inner(s, &psi) / sigma;
        for (xv, pv) in x.iter_mut().zip(d.phi.column(n).iter()) {
            *xv += xn * pv.conj();
        }
    }
    Ok(x)
}

/// Squared interference `||s - K x||^2`, both unnormalized and relative to
/// `||s||^2`.
pub fn residual_interference(k: &Kernel4D, x: &SymbolGrid, s: &SymbolGrid) -> Result<(f64, f64)> {
    let received = apply_kernel(k, x)?;
    let mut err = 0.0;
    for (rv, sv) in received.values.iter().zip(s.values.iter()) {
        err += (sv - rv).norm_sqr();
    }
    let s_energy: f64 = s.values.iter().map(|z| z.norm_sqr()).sum();
    let relative = if s_energy > 0.0 { err / s_energy } else { 0.0 };
    Ok((err, relative))
}

/// Scale x so its mean per-symbol power equals `budget`; returns the scaled
/// grid and the gain applied, so a genie receiver can divide it back out.
pub fn normalize_power(x: &SymbolGrid, budget: f64) -> Result<(SymbolGrid, f64)> {
    if !(budget > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "power budget must be positive, got {budget}"
        )));
    }
    let p = x.power();
    if p <= 0.0 {
        return Err(Error::Numerical("cannot normalize a zero-power grid".into()));
    }
    let gain = (budget / p).sqrt();
    let scaled = SymbolGrid::new(x.values.mapv(|z| z * gain));
    Ok((scaled, gain))
}
