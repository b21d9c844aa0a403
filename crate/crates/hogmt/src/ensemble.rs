//! Karhunen-Loeve analysis of random kernel ensembles.
//!
//! A random channel gives a random kernel; its second-order description is
//! the covariance of the vectorized kernel across realizations. The
//! eigenkernels rho_n of that covariance, with eigenvalues lambda_n, expand
//! every realization as `K_i = mean + sum_n c_{i,n} rho_n` where the
//! projection coefficients satisfy `(1/N) sum_i c_{i,n} conj(c_{i,n'}) =
//! lambda_n delta_{nn'}` by construction.
//!
//! The covariance is never formed explicitly: with N realizations its
//! eigenvectors lie in the span of the centered data, so the N x N Gram
//! matrix (1/N normalization) is eigendecomposed instead and mapped back.
//!
//! Each eigenkernel is additionally factored by rank-1 SVD into a pair of
//! unit-norm 2-D functions (psi_n, phi_n). Real estimates are not exactly
//! separable; the distance to the best rank-1 approximation is surfaced as
//! `separability[n] = ||rho_n - s1 psi_n phi_n||_F / ||rho_n||_F`, which is
//! `sqrt(1 - s1^2)` for a unit-norm eigenkernel.

use ndarray::Array2;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::channel::Kernel4D;
use crate::error::{Error, Result};
use crate::grid::FlatteningMap;
use crate::linalg;

/// A set of kernel realizations in matricized form: rows index one 2-D
/// group, columns the other. Group shapes are carried so eigenfunctions can
/// be reshaped back to 2-D.
#[derive(Debug, Clone)]
pub struct ChannelEnsemble {
    pub realizations: Vec<Array2<Complex64>>,
    /// Shape of the row group, e.g. (U, T) or (T, F).
    pub row_dims: (usize, usize),
    /// Shape of the column group.
    pub col_dims: (usize, usize),
}

impl ChannelEnsemble {
    pub fn new(
        realizations: Vec<Array2<Complex64>>,
        row_dims: (usize, usize),
        col_dims: (usize, usize),
    ) -> Result<Self> {
        let rows = row_dims.0 * row_dims.1;
        let cols = col_dims.0 * col_dims.1;
        for (i, r) in realizations.iter().enumerate() {
            if r.dim() != (rows, cols) {
                return Err(Error::DimMismatch(format!(
                    "realization {i} has shape {:?}, expected ({rows}, {cols})",
                    r.dim()
                )));
            }
        }
        Ok(Self {
            realizations,
            row_dims,
            col_dims,
        })
    }

    pub fn from_kernels(kernels: &[Kernel4D], map: &FlatteningMap) -> Result<Self> {
        let mats = kernels
            .iter()
            .map(|k| crate::decompose::kernel_as_matrix(k, map))
            .collect();
        Self::new(
            mats,
            (map.num_users, map.num_time),
            (map.num_users, map.num_time),
        )
    }

    pub fn len(&self) -> usize {
        self.realizations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.realizations.is_empty()
    }
}

/// One covariance mode of a kernel ensemble.
#[derive(Debug, Clone)]
pub struct EnsembleMode {
    pub lambda: f64,
    /// Unit-Frobenius eigenkernel over (row group, column group).
    pub rho: Array2<Complex64>,
    /// Unit-norm left rank-1 factor, reshaped to the row group.
    pub psi: Array2<Complex64>,
    /// Unit-norm right rank-1 factor, reshaped to the column group.
    pub phi: Array2<Complex64>,
    /// Relative distance of rho from its best rank-1 approximation, in [0, 1].
    pub separability: f64,
}

/// Ensemble eigen decomposition: modes sorted by nonincreasing lambda, plus
/// the empirical mean and the per-realization projection coefficients.
#[derive(Debug, Clone)]
pub struct EnsembleEigenSystem {
    pub modes: Vec<EnsembleMode>,
    pub mean: Array2<Complex64>,
    /// projections[i][n] = <centered realization i, rho_n>.
    pub projections: Vec<Vec<Complex64>>,
    pub row_dims: (usize, usize),
    pub col_dims: (usize, usize),
}

impl EnsembleEigenSystem {
    pub fn lambdas(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.lambda).collect()
    }

    /// sum of lambda_n: the total mode power of the centered ensemble.
    pub fn total_power(&self) -> f64 {
        self.modes.iter().map(|m| m.lambda).sum()
    }
}

/// Karhunen-Loeve decomposition of a kernel ensemble via the Gram-matrix
/// (snapshot) method. Requires at least two realizations; the empirical mean
/// is removed first and covariance normalization is 1/N.
pub fn ensemble_klt(ensemble: &ChannelEnsemble) -> Result<EnsembleEigenSystem> {
    let n = ensemble.len();
    if n < 2 {
        return Err(Error::InvalidConfig(format!(
            "ensemble needs at least 2 realizations, got {n}"
        )));
    }
    let shape = ensemble.realizations[0].dim();

    let mut mean = Array2::<Complex64>::zeros(shape);
    for r in &ensemble.realizations {
        mean += r;
    }
    mean.mapv_inplace(|z| z / n as f64);

    let centered: Vec<Vec<Complex64>> = ensemble
        .realizations
        .iter()
        .map(|r| (r - &mean).iter().cloned().collect())
        .collect();

    // Gram matrix G = X^H X / N (columns of X are centered realizations):
    // G[i][j] = <c_j, c_i> / N; Hermitian PSD
    let mut gram = Array2::<Complex64>::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let g = linalg::inner(&centered[j], &centered[i]) / n as f64;
            gram[[i, j]] = g;
            gram[[j, i]] = g.conj();
        }
    }
    let (lambdas, w) = linalg::eigh(&gram)?;

    let lambda_floor = lambdas.first().copied().unwrap_or(0.0).max(0.0) * 1e-12;
    let dim = shape.0 * shape.1;
    let mut modes = Vec::new();
    for k in 0..n {
        let lambda = lambdas[k];
        if lambda <= lambda_floor || lambda <= 0.0 {
            break;
        }
        // eigenkernel rho = X w / sqrt(N lambda), unit Frobenius norm
        let scale = 1.0 / (n as f64 * lambda).sqrt();
        let mut rho_vec = vec![Complex64::ZERO; dim];
        for (i, ci) in centered.iter().enumerate() {
            let wi = w[[i, k]] * scale;
            for (rv, cv) in rho_vec.iter_mut().zip(ci.iter()) {
                *rv += cv * wi;
            }
        }
        let rho = Array2::from_shape_vec(shape, rho_vec).expect("shape");

        // rank-1 factorization and separability residual
        let svd = linalg::svd(&rho)?;
        let s1 = svd.sigma[0];
        let tail: f64 = svd.sigma[1..].iter().map(|s| s * s).sum();
        let norm2: f64 = svd.sigma.iter().map(|s| s * s).sum();
        let separability = if norm2 > 0.0 {
            (tail / norm2).sqrt().min(1.0)
        } else {
            0.0
        };
        let _ = s1;
        let psi_vec: Vec<Complex64> = svd.u.column(0).to_vec();
        let phi_vec: Vec<Complex64> = svd.v.column(0).iter().map(|z| z.conj()).collect();
        let psi = Array2::from_shape_vec(ensemble.row_dims, psi_vec).expect("row dims");
        let phi = Array2::from_shape_vec(ensemble.col_dims, phi_vec).expect("col dims");

        modes.push(EnsembleMode {
            lambda,
            rho,
            psi,
            phi,
            separability,
        });
    }

    let projections = centered
        .iter()
        .map(|ci| {
            modes
                .iter()
                .map(|m| {
                    let rho_flat: Vec<Complex64> = m.rho.iter().cloned().collect();
                    linalg::inner(ci, &rho_flat)
                })
                .collect()
        })
        .collect();

    Ok(EnsembleEigenSystem {
        modes,
        mean,
        projections,
        row_dims: ensemble.row_dims,
        col_dims: ensemble.col_dims,
    })
}

/// Treat one deterministic kernel as a degenerate ensemble: the modes are
/// its SVD triples with `lambda_n = sigma_n^2`, no mean removal, and exactly
/// separable eigenkernels. The total mode power is then the squared
/// Frobenius norm of the kernel.
pub fn deterministic_eigensystem(
    matrix: &Array2<Complex64>,
    row_dims: (usize, usize),
    col_dims: (usize, usize),
) -> Result<EnsembleEigenSystem> {
    let (rows, cols) = matrix.dim();
    if rows != row_dims.0 * row_dims.1 || cols != col_dims.0 * col_dims.1 {
        return Err(Error::DimMismatch(format!(
            "matrix {rows}x{cols} does not match group dims {row_dims:?} x {col_dims:?}"
        )));
    }
    let svd = linalg::svd(matrix)?;
    let sigma_floor = svd.sigma.first().copied().unwrap_or(0.0) * 1e-15;
    let mut modes = Vec::new();
    let mut projection = Vec::new();
    for n in 0..svd.sigma.len() {
        let sigma = svd.sigma[n];
        if sigma <= sigma_floor {
            break;
        }
        let psi_vec: Vec<Complex64> = svd.u.column(n).to_vec();
        let phi_vec: Vec<Complex64> = svd.v.column(n).iter().map(|z| z.conj()).collect();
        // with the conjugated-phi storage the kernel is literally
        // sum_n sigma_n rho_n for rho_n = psi_n phi_n
        let mut rho = Array2::zeros((rows, cols));
        for r in 0..rows {
            for q in 0..cols {
                rho[[r, q]] = psi_vec[r] * phi_vec[q];
            }
        }
        modes.push(EnsembleMode {
            lambda: sigma * sigma,
            rho,
            psi: Array2::from_shape_vec(row_dims, psi_vec).expect("row dims"),
            phi: Array2::from_shape_vec(col_dims, phi_vec).expect("col dims"),
            separability: 0.0,
        });
        projection.push(Complex64::new(sigma, 0.0));
    }
    Ok(EnsembleEigenSystem {
        modes,
        mean: Array2::zeros((rows, cols)),
        projections: vec![projection],
        row_dims,
        col_dims,
    })
}

/// Generate a separable random ensemble `A_i = sum_n c_{i,n} psi_n phi_n^T`
/// with independent circular complex Gaussian coefficients,
/// `E |c_n|^2 = lambda_n`. The factor functions should be unit norm.
pub fn synthetic_separable_ensemble(
    modes: &[(f64, Array2<Complex64>, Array2<Complex64>)],
    count: usize,
    seed: u64,
) -> Result<ChannelEnsemble> {
    if modes.is_empty() {
        return Err(Error::InvalidConfig("need at least one mode".into()));
    }
    let row_dims = modes[0].1.dim();
    let col_dims = modes[0].2.dim();
    let rows = row_dims.0 * row_dims.1;
    let cols = col_dims.0 * col_dims.1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");

    let mut realizations = Vec::with_capacity(count);
    for _ in 0..count {
        let mut a = Array2::<Complex64>::zeros((rows, cols));
        for (lambda, psi, phi) in modes {
            let amp = (lambda / 2.0).sqrt();
            let c = Complex64::new(amp * unit.sample(&mut rng), amp * unit.sample(&mut rng));
            let psi_flat: Vec<Complex64> = psi.iter().cloned().collect();
            let phi_flat: Vec<Complex64> = phi.iter().cloned().collect();
            for r in 0..rows {
                let left = c * psi_flat[r];
                for q in 0..cols {
                    a[[r, q]] += left * phi_flat[q];
                }
            }
        }
        realizations.push(a);
    }
    ChannelEnsemble::new(realizations, row_dims, col_dims)
}
