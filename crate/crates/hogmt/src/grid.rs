//! User-time grids and the invertible flattening between (u, t) pairs and
//! one-dimensional indices.
//!
//! Joint processing over users and time treats a U x T grid as a vector of
//! length U*T. Everything downstream (decomposition, precoding, the link
//! simulations) agrees on one `FlatteningMap` so eigenfunctions can be
//! reshaped back into 2-D functions of (u, t).

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex signal on a (user, time) grid: data symbols s(u,t), precoded
/// signals x(u,t), or received signals r(u,t).
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolGrid {
    pub values: Array2<Complex64>,
}

impl SymbolGrid {
    pub fn new(values: Array2<Complex64>) -> Self {
        Self { values }
    }

    pub fn zeros(num_users: usize, num_time: usize) -> Self {
        Self {
            values: Array2::zeros((num_users, num_time)),
        }
    }

    pub fn num_users(&self) -> usize {
        self.values.nrows()
    }

    pub fn num_time(&self) -> usize {
        self.values.ncols()
    }

    /// Mean per-symbol power, `mean |s(u,t)|^2`.
    pub fn power(&self) -> f64 {
        let n = self.values.len();
        if n == 0 {
            return 0.0;
        }
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Flattening order for the (u, t) -> m bijection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlattenOrder {
    /// m = u * T + t
    UserMajor,
    /// m = t * U + u
    TimeMajor,
}

/// Invertible map between grid coordinates (u, t) and flat indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlatteningMap {
    pub num_users: usize,
    pub num_time: usize,
    pub order: FlattenOrder,
}

impl FlatteningMap {
    pub fn user_major(num_users: usize, num_time: usize) -> Self {
        Self {
            num_users,
            num_time,
            order: FlattenOrder::UserMajor,
        }
    }

    pub fn time_major(num_users: usize, num_time: usize) -> Self {
        Self {
            num_users,
            num_time,
            order: FlattenOrder::TimeMajor,
        }
    }

    pub fn len(&self) -> usize {
        self.num_users * self.num_time
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn flatten(&self, u: usize, t: usize) -> Result<usize> {
        if u >= self.num_users || t >= self.num_time {
            return Err(Error::DimMismatch(format!(
                "index (u={u}, t={t}) out of range for {}x{} grid",
                self.num_users, self.num_time
            )));
        }
        Ok(match self.order {
            FlattenOrder::UserMajor => u * self.num_time + t,
            FlattenOrder::TimeMajor => t * self.num_users + u,
        })
    }

    pub fn unflatten(&self, m: usize) -> Result<(usize, usize)> {
        if m >= self.len() {
            return Err(Error::DimMismatch(format!(
                "flat index {m} out of range for {} elements",
                self.len()
            )));
        }
        Ok(match self.order {
            FlattenOrder::UserMajor => (m / self.num_time, m % self.num_time),
            FlattenOrder::TimeMajor => (m % self.num_users, m / self.num_users),
        })
    }

    /// Grid -> flat vector in this map's index order.
    pub fn grid_to_vec(&self, grid: &Array2<Complex64>) -> Vec<Complex64> {
        let mut v = vec![Complex64::ZERO; self.len()];
        for u in 0..self.num_users {
            for t in 0..self.num_time {
                v[self.flatten(u, t).expect("in range")] = grid[[u, t]];
            }
        }
        v
    }

    /// Flat vector -> grid.
    pub fn vec_to_grid(&self, v: &[Complex64]) -> Array2<Complex64> {
        assert_eq!(v.len(), self.len(), "vector length mismatch");
        let mut g = Array2::zeros((self.num_users, self.num_time));
        for (m, z) in v.iter().enumerate() {
            let (u, t) = self.unflatten(m).expect("in range");
            g[[u, t]] = *z;
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn user_major_strides() {
        let map = FlatteningMap::user_major(10, 100);
        assert_eq!(map.flatten(0, 0).unwrap(), 0);
        assert_eq!(map.flatten(1, 0).unwrap(), 100);
        assert_eq!(map.flatten(3, 17).unwrap(), 317);
    }

    #[test]
    fn out_of_range_rejected() {
        let map = FlatteningMap::user_major(2, 3);
        assert!(map.flatten(2, 0).is_err());
        assert!(map.flatten(0, 3).is_err());
        assert!(map.unflatten(6).is_err());
    }

    #[test]
    fn roundtrip_exhaustive_both_orders() {
        for map in [
            FlatteningMap::user_major(7, 13),
            FlatteningMap::time_major(7, 13),
        ] {
            let mut seen = vec![false; map.len()];
            for u in 0..7 {
                for t in 0..13 {
                    let m = map.flatten(u, t).unwrap();
                    assert!(!seen[m], "flatten not injective at ({u},{t})");
                    seen[m] = true;
                    assert_eq!(map.unflatten(m).unwrap(), (u, t));
                }
            }
            assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn grid_power() {
        let mut g = SymbolGrid::zeros(2, 2);
        g.values[[0, 0]] = Complex64::new(2.0, 0.0);
        assert!((g.power() - 1.0).abs() < 1e-15);
    }
}
