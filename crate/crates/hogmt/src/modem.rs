//! Gray-mapped modulation, AWGN, minimum-distance demodulation, bit error
//! counting, and exact closed-form reference curves.
//!
//! Square constellations are normalized to unit mean symbol energy. Bit
//! labels are Gray per axis: for a symbol carrying 2k bits, the first k
//! select the in-phase level and the last k the quadrature level. BPSK maps
//! bit 0 to +1 and bit 1 to -1 on the real axis.
//!
//! The noise reference is explicit: `awgn` adds circularly symmetric
//! complex Gaussian noise with per-symbol variance
//! `signal_power_ref / 10^(snr_db/10)`, so SNR means Es/N0 relative to
//! whatever power reference the caller fixes (the data constellation power
//! by default in the link simulations).

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::grid::SymbolGrid;

/// Supported modulation schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Bpsk,
    Qpsk,
    Qam16,
    Qam64,
}

impl Scheme {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            Scheme::Bpsk => 1,
            Scheme::Qpsk => 2,
            Scheme::Qam16 => 4,
            Scheme::Qam64 => 6,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Bpsk => "bpsk",
            Scheme::Qpsk => "qpsk",
            Scheme::Qam16 => "qam16",
            Scheme::Qam64 => "qam64",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bpsk" => Ok(Scheme::Bpsk),
            "qpsk" | "qam4" | "4qam" => Ok(Scheme::Qpsk),
            "qam16" | "16qam" => Ok(Scheme::Qam16),
            "qam64" | "64qam" => Ok(Scheme::Qam64),
            other => Err(Error::InvalidConfig(format!("unknown modulation '{other}'"))),
        }
    }

    pub fn all() -> [Scheme; 4] {
        [Scheme::Bpsk, Scheme::Qpsk, Scheme::Qam16, Scheme::Qam64]
    }
}

/// A Gray-labeled constellation with unit mean energy.
///
/// `points[label]` is the symbol whose bit pattern is the binary expansion
/// of `label` (MSB first).
#[derive(Debug, Clone)]
pub struct Constellation {
    pub scheme: Scheme,
    pub points: Vec<Complex64>,
    pub bits_per_symbol: usize,
}

/// Gray code of an index: adjacent indices differ in one bit.
fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

impl Constellation {
    pub fn new(scheme: Scheme) -> Self {
        let bits = scheme.bits_per_symbol();
        let points = match scheme {
            Scheme::Bpsk => vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)],
            _ => {
                let axis_bits = bits / 2;
                let m_axis = 1usize << axis_bits;
                let m = m_axis * m_axis;
                // unit-energy spacing for a square constellation
                let d = (3.0 / (2.0 * (m as f64 - 1.0))).sqrt();
                // code -> level index along one axis
                let mut level_of_code = vec![0usize; m_axis];
                for level in 0..m_axis {
                    level_of_code[gray(level)] = level;
                }
                let level_value =
                    |idx: usize| -> f64 { (2.0 * idx as f64 - (m_axis as f64 - 1.0)) * d };
                (0..m)
                    .map(|label| {
                        let i_code = label >> axis_bits;
                        let q_code = label & (m_axis - 1);
                        Complex64::new(
                            level_value(level_of_code[i_code]),
                            level_value(level_of_code[q_code]),
                        )
                    })
                    .collect()
            }
        };
        Self {
            scheme,
            points,
            bits_per_symbol: bits,
        }
    }

    pub fn mean_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.points.len() as f64
    }

    /// Per-axis level spacing times two (distance between adjacent levels).
    pub fn axis_step(&self) -> f64 {
        match self.scheme {
            Scheme::Bpsk => 2.0,
            _ => {
                let m = self.points.len() as f64;
                2.0 * (3.0 / (2.0 * (m - 1.0))).sqrt()
            }
        }
    }
}

/// Map a bit sequence onto a (U, T) grid, row-major (user 0 first).
pub fn modulate(bits: &[u8], c: &Constellation, num_users: usize, num_time: usize) -> Result<SymbolGrid> {
    let need = num_users * num_time * c.bits_per_symbol;
    if bits.len() != need {
        return Err(Error::DimMismatch(format!(
            "got {} bits, need {need} for a {num_users}x{num_time} grid at {} bits/symbol",
            bits.len(),
            c.bits_per_symbol
        )));
    }
    let mut grid = SymbolGrid::zeros(num_users, num_time);
    for (sym_idx, chunk) in bits.chunks(c.bits_per_symbol).enumerate() {
        let mut label = 0usize;
        for &b in chunk {
            label = (label << 1) | (b as usize & 1);
        }
        let u = sym_idx / num_time;
        let t = sym_idx % num_time;
        grid.values[[u, t]] = c.points[label];
    }
    Ok(grid)
}

/// Minimum-distance detection, emitting Gray bits. Ties break to the
/// smaller label.
pub fn demodulate(r: &SymbolGrid, c: &Constellation) -> Vec<u8> {
    let mut bits = Vec::with_capacity(r.values.len() * c.bits_per_symbol);
    for z in r.values.iter() {
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (label, p) in c.points.iter().enumerate() {
            let d = (z - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = label;
            }
        }
        for k in (0..c.bits_per_symbol).rev() {
            bits.push(((best >> k) & 1) as u8);
        }
    }
    bits
}

/// Add circularly symmetric complex Gaussian noise at the given Es/N0.
pub fn awgn(r: &SymbolGrid, snr_db: f64, signal_power_ref: f64, seed: u64) -> Result<SymbolGrid> {
    if !(signal_power_ref > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "signal power reference must be positive, got {signal_power_ref}"
        )));
    }
    let n0 = signal_power_ref / 10f64.powf(snr_db / 10.0);
    let comp = Normal::new(0.0, (n0 / 2.0).sqrt())
        .map_err(|e| Error::Numerical(format!("noise sigma: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = r.clone();
    for z in out.values.iter_mut() {
        *z += Complex64::new(comp.sample(&mut rng), comp.sample(&mut rng));
    }
    Ok(out)
}

/// Hamming distance over equal-length bit sequences.
pub fn ber_count(tx: &[u8], rx: &[u8]) -> Result<(u64, u64)> {
    if tx.len() != rx.len() {
        return Err(Error::DimMismatch(format!(
            "bit sequence lengths differ: {} vs {}",
            tx.len(),
            rx.len()
        )));
    }
    let errors = tx.iter().zip(rx.iter()).filter(|(a, b)| a != b).count() as u64;
    Ok((tx.len() as u64, errors))
}

/// One simulated link point.
#[derive(Debug, Clone)]
pub struct LinkResult {
    pub method: String,
    pub modulation: Scheme,
    pub epsilon: Option<f64>,
    pub snr_db: f64,
    pub bits_total: u64,
    pub bits_error: u64,
    pub seed: u64,
}

impl LinkResult {
    pub fn ber(&self) -> f64 {
        if self.bits_total == 0 {
            0.0
        } else {
            self.bits_error as f64 / self.bits_total as f64
        }
    }

    pub fn csv_header() -> &'static str {
        "method,modulation,epsilon,snr_db,bits,errors,ber,seed"
    }

    pub fn csv_row(&self) -> String {
        let eps = self
            .epsilon
            .map(|e| format!("{e}"))
            .unwrap_or_else(|| "".into());
        format!(
            "{},{},{},{},{},{},{},{}",
            self.method,
            self.modulation.name(),
            eps,
            self.snr_db,
            self.bits_total,
            self.bits_error,
            self.ber(),
            self.seed
        )
    }
}

fn q_func(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Exact bit error probability of the k-th Gray bit of one sqrt(M)-PAM axis
/// of a square M-QAM constellation at Es/N0 = gamma.
fn pam_bit_error(m: usize, k: u32, gamma: f64) -> f64 {
    let rm = (m as f64).sqrt().round() as i64;
    let mut total = 0.0;
    let upper = ((1.0 - 2f64.powi(-(k as i32))) * rm as f64) as i64;
    for i in 0..upper {
        let step = (i as f64) * 2f64.powi(k as i32 - 1) / rm as f64;
        let sign = if (step.floor() as i64) % 2 == 0 { 1.0 } else { -1.0 };
        let weight = 2f64.powi(k as i32 - 1) - (step + 0.5).floor();
        let arg = ((2 * i + 1) as f64) * (3.0 * gamma / (2.0 * (m as f64 - 1.0))).sqrt();
        total += sign * weight * libm::erfc(arg);
    }
    total / rm as f64
}

/// Exact Gray-coded bit error rate over AWGN at Es/N0 = `snr_db`.
pub fn theoretical_ber(scheme: Scheme, snr_db: f64) -> f64 {
    let gamma = 10f64.powf(snr_db / 10.0);
    match scheme {
        Scheme::Bpsk => q_func((2.0 * gamma).sqrt()),
        _ => {
            let m = 1usize << scheme.bits_per_symbol();
            let axis_bits = scheme.bits_per_symbol() as u32 / 2;
            let sum: f64 = (1..=axis_bits).map(|k| pam_bit_error(m, k, gamma)).sum();
            2.0 * sum / scheme.bits_per_symbol() as f64
        }
    }
}

/// Deterministic random bits.
pub fn random_bits(count: usize, seed: u64) -> Vec<u8> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.random_range(0..=1u8)).collect()
}
