//! Comparison arms: zero-forcing reception and a Tomlinson-Harashima
//! dirty-paper surrogate.
//!
//! The ZF arm transmits the data grid unprecoded and inverts the flattened
//! kernel at the receiver (pseudo-inverse when near-singular), paying the
//! usual noise enhancement on ill-conditioned channels.
//!
//! The THP arm pre-subtracts spatial interference at the transmitter,
//! per time instance: the instantaneous spatial matrix is factored
//! `A_t = L_t Q_t` with `L_t` lower triangular (real positive diagonal) and
//! `Q_t` unitary, the users are encoded successively with lattice modulo
//! reduction, and `Q_t^H x~` is transmitted. Temporal interference is left
//! to a ZF equalization stage at the receiver, so the arm models a
//! transmit-DPC-plus-receive-ZF chain. With a single time instance the
//! receiver stage degenerates to per-user scalar division and modulo, i.e.
//! pure spatial THP.
//!
//! The modulo lattice is `2 sqrt(M) d` per axis for square M-QAM with level
//! spacing `2d` (4 on the real axis for BPSK).

use ndarray::Array2;
use num_complex::Complex64;

use crate::channel::{apply_kernel, Kernel4D};
use crate::decompose::EigenSystem;
use crate::error::{Error, Result};
use crate::grid::{FlatteningMap, SymbolGrid};
use crate::linalg::{self, LinearSolver};
use crate::modem::{awgn, ber_count, demodulate, Constellation, LinkResult};

/// Options shared by the baseline links.
#[derive(Debug, Clone, Copy)]
pub struct LinkOptions {
    /// Noise power reference (data constellation power unless overridden).
    pub signal_power_ref: f64,
    /// Leading time instances excluded from bit counting on every arm, to
    /// keep the comparison away from the start-up transient of causal
    /// kernels.
    pub warmup_skip: usize,
}

impl Default for LinkOptions {
    fn default() -> Self {
        Self {
            signal_power_ref: 1.0,
            warmup_skip: 0,
        }
    }
}

/// Mask of counted symbol positions after warmup exclusion, row-major.
pub fn counting_mask(num_users: usize, num_time: usize, skip: usize) -> Vec<bool> {
    let mut mask = vec![true; num_users * num_time];
    for u in 0..num_users {
        for t in 0..skip.min(num_time) {
            mask[u * num_time + t] = false;
        }
    }
    mask
}

/// Count bit errors over the masked symbol positions.
pub fn masked_ber(
    tx_bits: &[u8],
    rx_bits: &[u8],
    mask: &[bool],
    bits_per_symbol: usize,
) -> Result<(u64, u64)> {
    if tx_bits.len() != rx_bits.len() || tx_bits.len() != mask.len() * bits_per_symbol {
        return Err(Error::DimMismatch("bit/mask lengths disagree".into()));
    }
    let mut total = 0u64;
    let mut errors = 0u64;
    for (sym, keep) in mask.iter().enumerate() {
        if !keep {
            continue;
        }
        let lo = sym * bits_per_symbol;
        let (t, e) = ber_count(
            &tx_bits[lo..lo + bits_per_symbol],
            &rx_bits[lo..lo + bits_per_symbol],
        )?;
        total += t;
        errors += e;
    }
    Ok((total, errors))
}

/// Zero-forcing receiver over a precomputed eigensystem of the kernel.
///
/// Returns the link result and the kernel condition number (sigma_1 /
/// sigma_min); conditioning above 1e12 means the inversion is effectively a
/// truncated pseudo-inverse.
pub fn zf_receiver_baseline(
    k: &Kernel4D,
    es: &EigenSystem,
    s: &SymbolGrid,
    c: &Constellation,
    tx_bits: &[u8],
    snr_db: f64,
    noise_seed: u64,
    opts: &LinkOptions,
) -> Result<(LinkResult, f64)> {
    let received = apply_kernel(k, s)?;
    let noisy = awgn(&received, snr_db, opts.signal_power_ref, noise_seed)?;

    // pseudo-inverse through the eigensystem: x = sum 1/sigma <r, psi> conj(phi)
    let sigma_1 = es.triples.first().map(|t| t.sigma).unwrap_or(0.0);
    let sigma_min = es
        .triples
        .iter()
        .map(|t| t.sigma)
        .fold(f64::INFINITY, f64::min);
    let cutoff = sigma_1 * 1e-14;
    let r_flat: Vec<Complex64> = noisy.values.iter().cloned().collect();
    let mut est = SymbolGrid::zeros(k.num_users, k.num_time);
    for triple in &es.triples {
        if triple.sigma <= cutoff {
            break;
        }
        let psi_flat: Vec<Complex64> = triple.psi.iter().cloned().collect();
        let coeff = linalg::inner(&r_flat, &psi_flat) / triple.sigma;
        for (ev, pv) in est.values.iter_mut().zip(triple.phi.iter()) {
            *ev += coeff * pv.conj();
        }
    }

    let rx_bits = demodulate(&est, c);
    let mask = counting_mask(k.num_users, k.num_time, opts.warmup_skip);
    let (total, errors) = masked_ber(tx_bits, &rx_bits, &mask, c.bits_per_symbol)?;
    let condition = if sigma_min > 0.0 {
        sigma_1 / sigma_min
    } else {
        f64::INFINITY
    };
    Ok((
        LinkResult {
            method: "zf".into(),
            modulation: c.scheme,
            epsilon: None,
            snr_db,
            bits_total: total,
            bits_error: errors,
            seed: noise_seed,
        },
        condition,
    ))
}

/// LQ factorization `A = L Q` via modified Gram-Schmidt on `A^H`, with the
/// diagonal of `L` real positive. Returns `(l, q_tilde)` where
/// `q_tilde = Q^H` holds the orthonormal columns.
pub fn lq_factor(a: &Array2<Complex64>) -> Result<(Array2<Complex64>, Array2<Complex64>)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimMismatch("LQ factorization needs a square matrix".into()));
    }
    // columns of a^H are conjugated rows of a
    let mut q = Array2::<Complex64>::zeros((n, n));
    let mut r = Array2::<Complex64>::zeros((n, n)); // upper triangular, A^H = q r
    for j in 0..n {
        let mut v: Vec<Complex64> = (0..n).map(|i| a[[j, i]].conj()).collect();
        for i in 0..j {
            let qi: Vec<Complex64> = q.column(i).to_vec();
            let proj = linalg::inner(&v, &qi);
            r[[i, j]] = proj;
            for (vk, qk) in v.iter_mut().zip(qi.iter()) {
                *vk -= proj * qk;
            }
        }
        let norm = linalg::norm2(&v);
        if norm < 1e-300 {
            return Err(Error::Numerical(format!(
                "spatial matrix is rank deficient at column {j}"
            )));
        }
        r[[j, j]] = Complex64::new(norm, 0.0);
        for i in 0..n {
            q[[i, j]] = v[i] / norm;
        }
    }
    // A = (q r)^H = r^H q^H; l = r^H is lower triangular with positive diagonal
    let l = Array2::from_shape_fn((n, n), |(i, j)| r[[j, i]].conj());
    let q_tilde = q;
    Ok((l, q_tilde))
}

/// Per-axis lattice modulo reduction to `[-base/2, base/2)`.
fn modulo_reduce(z: Complex64, base: f64) -> Complex64 {
    let wrap = |v: f64| v - base * (v / base).round();
    Complex64::new(wrap(z.re), wrap(z.im))
}

/// A prepared THP link: factorizations, the encoded transmit grid, and the
/// receiver-side equalizer, ready to run at any SNR.
pub struct ThpLink {
    scheme_lattice: f64,
    constellation: Constellation,
    l_blocks: Vec<Array2<Complex64>>,
    solver: LinearSolver,
    map: FlatteningMap,
    /// Noiseless received grid K x.
    received: SymbolGrid,
    num_users: usize,
    num_time: usize,
}

impl ThpLink {
    /// Factor the spatial submatrices, encode the payload successively with
    /// modulo reduction, and prefactor the receiver equalizer.
    pub fn prepare(k: &Kernel4D, s: &SymbolGrid, c: &Constellation) -> Result<Self> {
        let (num_u, num_t) = (k.num_users, k.num_time);
        if s.num_users() != num_u || s.num_time() != num_t {
            return Err(Error::DimMismatch("payload grid does not match kernel".into()));
        }
        let m_axis = 1usize << (c.bits_per_symbol / 2).max(1);
        let lattice = (m_axis as f64) * c.axis_step();

        // per-instant factors and transmit-side successive encoding
        let mut q_blocks = Vec::with_capacity(num_t);
        let mut l_blocks = Vec::with_capacity(num_t);
        let mut x = SymbolGrid::zeros(num_u, num_t);
        for t in 0..num_t {
            let a = k.spatial_submatrix(t);
            let (l, q_tilde) = lq_factor(&a)?;
            let mut encoded = vec![Complex64::ZERO; num_u];
            for u in 0..num_u {
                let mut f = s.values[[u, t]];
                for j in 0..u {
                    f -= l[[u, j]] / l[[u, u]] * encoded[j];
                }
                encoded[u] = modulo_reduce(f, lattice);
            }
            // transmit Q^H x~ = q_tilde * x~
            for u in 0..num_u {
                let mut acc = Complex64::ZERO;
                for j in 0..num_u {
                    acc += q_tilde[[u, j]] * encoded[j];
                }
                x.values[[u, t]] = acc;
            }
            q_blocks.push(q_tilde);
            l_blocks.push(l);
        }

        // receiver equalizer: solve (K blockdiag(Q^H)) z = r
        let map = FlatteningMap::user_major(num_u, num_t);
        let km = crate::decompose::kernel_as_matrix(k, &map);
        let mut effective = Array2::<Complex64>::zeros((map.len(), map.len()));
        for row in 0..map.len() {
            for up in 0..num_u {
                for tp in 0..num_t {
                    let col = map.flatten(up, tp).expect("in range");
                    let mut acc = Complex64::ZERO;
                    for j in 0..num_u {
                        let mid = map.flatten(j, tp).expect("in range");
                        acc += km[[row, mid]] * q_blocks[tp][[j, up]];
                    }
                    effective[[row, col]] = acc;
                }
            }
        }
        let solver = LinearSolver::new(&effective)?;
        let received = apply_kernel(k, &x)?;

        Ok(Self {
            scheme_lattice: lattice,
            constellation: c.clone(),
            l_blocks,
            solver,
            map,
            received,
            num_users: num_u,
            num_time: num_t,
        })
    }

    /// Run the prepared link at one SNR point.
    pub fn run(
        &self,
        tx_bits: &[u8],
        snr_db: f64,
        noise_seed: u64,
        opts: &LinkOptions,
    ) -> Result<LinkResult> {
        let noisy = awgn(&self.received, snr_db, opts.signal_power_ref, noise_seed)?;
        let r_flat = self.map.grid_to_vec(&noisy.values);
        let z = self.solver.solve(&r_flat)?;

        let mut est = SymbolGrid::zeros(self.num_users, self.num_time);
        for t in 0..self.num_time {
            let l = &self.l_blocks[t];
            for u in 0..self.num_users {
                let mut acc = Complex64::ZERO;
                for j in 0..=u {
                    acc += l[[u, j]] * z[self.map.flatten(j, t).expect("in range")];
                }
                let scaled = acc / l[[u, u]].re;
                est.values[[u, t]] = modulo_reduce(scaled, self.scheme_lattice);
            }
        }

        let rx_bits = demodulate(&est, &self.constellation);
        let mask = counting_mask(self.num_users, self.num_time, opts.warmup_skip);
        let (total, errors) = masked_ber(
            tx_bits,
            &rx_bits,
            &mask,
            self.constellation.bits_per_symbol,
        )?;
        Ok(LinkResult {
            method: "thp_zf".into(),
            modulation: self.constellation.scheme,
            epsilon: None,
            snr_db,
            bits_total: total,
            bits_error: errors,
            seed: noise_seed,
        })
    }
}

/// Tomlinson-Harashima spatial precoding with a temporal ZF stage.
pub fn thp_dpc_baseline(
    k: &Kernel4D,
    s: &SymbolGrid,
    c: &Constellation,
    tx_bits: &[u8],
    snr_db: f64,
    noise_seed: u64,
    opts: &LinkOptions,
) -> Result<LinkResult> {
    ThpLink::prepare(k, s, c)?.run(tx_bits, snr_db, noise_seed, opts)
}
