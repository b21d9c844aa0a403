//! Joint eigenfunction decomposition of asymmetric channel kernels.
//!
//! A 4-D kernel k(u,t;u',t') is decomposed into triples (sigma_n, psi_n,
//! phi_n) with
//!
//! ```text
//! k(u,t;u',t') = sum_n sigma_n psi_n(u,t) phi_n(u',t')
//! ```
//!
//! where the psi and the phi families are each orthonormal on their grids.
//! The decomposition flattens both index pairs with an invertible map, takes
//! the singular value decomposition of the resulting matrix, and reshapes
//! the singular vectors back into 2-D eigenfunctions.
//!
//! Storage convention: `phi_n` holds the entry-wise conjugate of the right
//! singular vector, so that both the unconjugated expansion above and the
//! duality relation
//!
//! ```text
//! sum over (u',t') of k(u,t;u',t') conj(phi_n(u',t')) = sigma_n psi_n(u,t)
//! ```
//!
//! hold literally for the stored arrays. Transmitting conj(phi_n) through
//! the channel yields sigma_n psi_n: each triple is a flat-fading
//! sub-channel. Singular-vector phases are canonicalized so the
//! largest-magnitude entry of each psi_n is real and positive.

use ndarray::Array2;
use num_complex::Complex64;

use crate::channel::Kernel4D;
use crate::error::{Error, Result};
use crate::grid::FlatteningMap;
use crate::linalg;

/// One flat-fading sub-channel: gain and the dual eigenfunction pair.
#[derive(Debug, Clone)]
pub struct EigenTriple {
    pub sigma: f64,
    /// Received-side eigenfunction over (u, t), unit norm.
    pub psi: Array2<Complex64>,
    /// Transmit-side eigenfunction over (u', t'), unit norm, stored
    /// conjugated as described in the module docs.
    pub phi: Array2<Complex64>,
}

/// Ordered eigen decomposition of a 4-D kernel. Sigmas are nonincreasing.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub triples: Vec<EigenTriple>,
    pub num_users: usize,
    pub num_time: usize,
}

impl EigenSystem {
    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn sigmas(&self) -> Vec<f64> {
        self.triples.iter().map(|t| t.sigma).collect()
    }

    /// sum of sigma^2; equals the squared Frobenius norm of the kernel when
    /// no triples have been discarded.
    pub fn energy(&self) -> f64 {
        self.triples.iter().map(|t| t.sigma * t.sigma).sum()
    }
}

/// Decomposition of a 2-D kernel K(t,t') into sigma_n psi_n(t) phi_n(t'),
/// with the same storage convention as [`EigenSystem`].
#[derive(Debug, Clone)]
pub struct GmtDecomposition {
    pub sigmas: Vec<f64>,
    /// Left eigenfunctions as matrix columns.
    pub psi: Array2<Complex64>,
    /// Right eigenfunctions as matrix columns (stored conjugated).
    pub phi: Array2<Complex64>,
}

impl GmtDecomposition {
    /// Reconstruct sum_n sigma_n psi_n phi_n^T.
    pub fn reconstruct(&self) -> Array2<Complex64> {
        let (rows, n) = self.psi.dim();
        let cols = self.phi.nrows();
        let mut out = Array2::zeros((rows, cols));
        for k in 0..n {
            let s = self.sigmas[k];
            for i in 0..rows {
                let left = s * self.psi[[i, k]];
                for j in 0..cols {
                    out[[i, j]] += left * self.phi[[j, k]];
                }
            }
        }
        out
    }
}

/// Polish the small-sigma tail of a decomposition.
///
/// A backward-stable SVD leaves each mode with an absolute defect of order
/// machine-epsilon times the kernel norm, which dominates the duality
/// relation for modes many decades below sigma_1. Recomputing the tail's
/// image `K conj(phi_n)` in double-double precision and re-diagonalizing the
/// tail block restores defects proportional to sigma_n itself. The rotation
/// is unitary within the tail, so orthonormality and reconstruction are
/// untouched.
fn refine_tail(
    kernel: &Array2<Complex64>,
    sigmas: &mut [f64],
    psi: &mut Array2<Complex64>,
    phi: &mut Array2<Complex64>,
) -> Result<()> {
    let rank = sigmas.len();
    let sigma_1 = sigmas.first().copied().unwrap_or(0.0);
    if !(sigma_1 > 0.0) {
        return Ok(());
    }
    let cut = 1e-5 * sigma_1;
    let start = sigmas.partition_point(|&s| s > cut);
    if start == 0 || start >= rank {
        return Ok(());
    }
    let tail = rank - start;
    let n_rows = psi.nrows();
    let n_cols = phi.nrows();

    let image = |phi: &Array2<Complex64>, j: usize| -> Vec<Complex64> {
        let tx: Vec<Complex64> = phi.column(start + j).iter().map(|z| z.conj()).collect();
        linalg::matvec_dd(kernel, &tx)
    };

    // pass 1: cancel each tail image's leakage into the retained modes via
    // their own duality relation K conj(phi_m) = sigma_m psi_m; with the
    // conjugated-phi storage the correction enters conjugated
    for j in 0..tail {
        let w = image(phi, j);
        let mut col: Vec<Complex64> = phi.column(start + j).to_vec();
        for m in 0..start {
            let psi_m: Vec<Complex64> = psi.column(m).to_vec();
            let leak = linalg::inner(&w, &psi_m) / sigmas[m];
            let coeff = leak.conj();
            for (cv, pm) in col.iter_mut().zip(phi.column(m).iter()) {
                *cv -= coeff * pm;
            }
        }
        let norm = linalg::norm2(&col);
        if norm > 0.0 {
            for (dst, src) in phi.column_mut(start + j).iter_mut().zip(col.iter()) {
                *dst = src / norm;
            }
        }
    }

    // pass 2: accurate images of the corrected tail, then re-diagonalize
    // the tail block with a unitary rotation on each side
    let mut w = Array2::<Complex64>::zeros((n_rows, tail));
    for j in 0..tail {
        for (i, v) in image(phi, j).into_iter().enumerate() {
            w[[i, j]] = v;
        }
    }
    let mut b = Array2::<Complex64>::zeros((tail, tail));
    for i in 0..tail {
        let pcol: Vec<Complex64> = psi.column(start + i).to_vec();
        for j in 0..tail {
            let wcol: Vec<Complex64> = w.column(j).to_vec();
            b[[i, j]] = linalg::inner(&wcol, &pcol);
        }
    }
    let small = linalg::svd(&b)?;

    // rotate the tail in place: Psi <- Psi P, Phi <- Phi conj(Q), sigma <- S'
    let mut new_psi = Array2::<Complex64>::zeros((n_rows, tail));
    let mut new_phi = Array2::<Complex64>::zeros((n_cols, tail));
    for j in 0..tail {
        for k in 0..tail {
            let p = small.u[[k, j]];
            let q = small.v[[k, j]].conj();
            for i in 0..n_rows {
                new_psi[[i, j]] += psi[[i, start + k]] * p;
            }
            for i in 0..n_cols {
                new_phi[[i, j]] += phi[[i, start + k]] * q;
            }
        }
    }
    for j in 0..tail {
        sigmas[start + j] = small.sigma[j];
        for i in 0..n_rows {
            psi[[i, start + j]] = new_psi[[i, j]];
        }
        for i in 0..n_cols {
            phi[[i, start + j]] = new_phi[[i, j]];
        }
    }
    Ok(())
}

/// Singular value decomposition of an arbitrary complex 2-D kernel with the
/// crate's storage and phase conventions.
pub fn gmt_decompose(kernel: &Array2<Complex64>) -> Result<GmtDecomposition> {
    let svd = linalg::svd(kernel)?;
    let mut sigmas = svd.sigma;
    let mut psi = svd.u;
    // stored phi = conj(V), so K = sum sigma psi phi^T without conjugation
    let mut phi = svd.v.mapv(|z| z.conj());

    refine_tail(kernel, &mut sigmas, &mut psi, &mut phi)?;
    let rank = sigmas.len();

    // phase canonicalization: rotate each pair so the largest-|.| entry of
    // psi_n is real-positive (first index wins ties)
    for n in 0..rank {
        let col = psi.column(n);
        let mut best = 0usize;
        let mut best_mag = -1.0f64;
        for (i, z) in col.iter().enumerate() {
            let m = z.norm();
            if m > best_mag + 1e-300 && m > best_mag {
                best_mag = m;
                best = i;
            }
        }
        let pivot = psi[[best, n]];
        if pivot.norm() > 0.0 {
            let rot = pivot.conj() / pivot.norm();
            for z in psi.column_mut(n).iter_mut() {
                *z *= rot;
            }
            // counter-rotate phi to keep sigma psi phi^T invariant
            let inv = rot.conj();
            for z in phi.column_mut(n).iter_mut() {
                *z *= inv;
            }
        }
    }

    Ok(GmtDecomposition { sigmas, psi, phi })
}

/// Flatten a 4-D kernel into its (U*T) x (U*T) matrix form under `map`.
pub fn kernel_as_matrix(k: &Kernel4D, map: &FlatteningMap) -> Array2<Complex64> {
    let n = map.len();
    let mut out = Array2::zeros((n, n));
    for u in 0..k.num_users {
        for t in 0..k.num_time {
            let row = map.flatten(u, t).expect("in range");
            for up in 0..k.num_users {
                for tp in 0..k.num_time {
                    let col = map.flatten(up, tp).expect("in range");
                    out[[row, col]] = k.values[[u, t, up, tp]];
                }
            }
        }
    }
    out
}

/// Decompose a 4-D kernel into jointly orthonormal 2-D eigenfunction pairs.
pub fn hogmt_decompose(k: &Kernel4D, map: &FlatteningMap) -> Result<EigenSystem> {
    if map.num_users != k.num_users || map.num_time != k.num_time {
        return Err(Error::DimMismatch(format!(
            "map {}x{} does not match kernel {}x{}",
            map.num_users, map.num_time, k.num_users, k.num_time
        )));
    }
    let matrix = kernel_as_matrix(k, map);
    let gmt = gmt_decompose(&matrix)?;
    let triples = (0..gmt.sigmas.len())
        .map(|n| EigenTriple {
            sigma: gmt.sigmas[n],
            psi: map.vec_to_grid(&gmt.psi.column(n).to_vec()),
            phi: map.vec_to_grid(&gmt.phi.column(n).to_vec()),
        })
        .collect();
    Ok(EigenSystem {
        triples,
        num_users: k.num_users,
        num_time: k.num_time,
    })
}

/// Threshold semantics for eigen selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdMode {
    /// Keep sigma_n > epsilon * sigma_1.
    Relative,
    /// Keep sigma_n > epsilon on the raw kernel scale.
    Absolute,
}

/// Keep the triples whose gain exceeds the threshold (relative semantics).
///
/// Preserves ordering. An empty result is an error, not a silent truncation.
pub fn select_eigen(es: &EigenSystem, epsilon: f64) -> Result<EigenSystem> {
    select_eigen_with_mode(es, epsilon, ThresholdMode::Relative)
}

pub fn select_eigen_with_mode(
    es: &EigenSystem,
    epsilon: f64,
    mode: ThresholdMode,
) -> Result<EigenSystem> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "selection threshold must be positive, got {epsilon}"
        )));
    }
    let sigma_1 = es.triples.first().map(|t| t.sigma).unwrap_or(0.0);
    let cut = match mode {
        ThresholdMode::Relative => epsilon * sigma_1,
        ThresholdMode::Absolute => epsilon,
    };
    let triples: Vec<EigenTriple> = es
        .triples
        .iter()
        .filter(|t| t.sigma > cut)
        .cloned()
        .collect();
    if triples.is_empty() {
        return Err(Error::EmptySelection(format!(
            "no sigma exceeds {cut:.3e} (epsilon {epsilon:.3e}, {mode:?})"
        )));
    }
    Ok(EigenSystem {
        triples,
        num_users: es.num_users,
        num_time: es.num_time,
    })
}

/// Per-triple duality residual
/// `|| K conj(phi_n) - sigma_n psi_n || / max(sigma_n, floor)`.
///
/// The floor (`1e-15 * max(sigma_1, 1)`) only guards the division for
/// numerically zero modes.
pub fn verify_duality(k: &Kernel4D, es: &EigenSystem) -> Result<Vec<f64>> {
    use crate::channel::apply_kernel;
    use crate::grid::SymbolGrid;
    let sigma_1 = es.triples.first().map(|t| t.sigma).unwrap_or(0.0);
    let floor = 1e-15 * sigma_1.max(1.0);
    let mut residuals = Vec::with_capacity(es.len());
    for triple in &es.triples {
        let tx = SymbolGrid::new(triple.phi.mapv(|z| z.conj()));
        let received = apply_kernel(k, &tx)?;
        let mut err = 0.0;
        for (rv, pv) in received.values.iter().zip(triple.psi.iter()) {
            err += (rv - triple.sigma * pv).norm_sqr();
        }
        residuals.push(err.sqrt() / triple.sigma.max(floor));
    }
    Ok(residuals)
}

/// Reconstruction residual `||k - sum_n sigma_n psi_n phi_n||_F / ||k||_F`.
pub fn reconstruction_error(k: &Kernel4D, es: &EigenSystem) -> f64 {
    let norm = k.frobenius_norm();
    if norm == 0.0 {
        return 0.0;
    }
    let mut err = 0.0;
    for u in 0..k.num_users {
        for t in 0..k.num_time {
            for up in 0..k.num_users {
                for tp in 0..k.num_time {
                    let mut acc = Complex64::ZERO;
                    for triple in &es.triples {
                        acc += triple.sigma * triple.psi[[u, t]] * triple.phi[[up, tp]];
                    }
                    err += (k.values[[u, t, up, tp]] - acc).norm_sqr();
                }
            }
        }
    }
    err.sqrt() / norm
}

/// Largest off-diagonal Gram entry and worst diagonal deviation from 1, over
/// both eigenfunction families.
pub fn orthonormality_defect(es: &EigenSystem) -> (f64, f64) {
    let n = es.len();
    let mut max_off = 0.0f64;
    let mut max_diag = 0.0f64;
    let flat = |a: &Array2<Complex64>| -> Vec<Complex64> { a.iter().cloned().collect() };
    let psis: Vec<Vec<Complex64>> = es.triples.iter().map(|t| flat(&t.psi)).collect();
    let phis: Vec<Vec<Complex64>> = es.triples.iter().map(|t| flat(&t.phi)).collect();
    for family in [&psis, &phis] {
        for i in 0..n {
            for j in i..n {
                let g = linalg::inner(&family[i], &family[j]).norm();
                if i == j {
                    max_diag = max_diag.max((g - 1.0).abs());
                } else {
                    max_off = max_off.max(g);
                }
            }
        }
    }
    (max_off, max_diag)
}
