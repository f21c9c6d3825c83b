//! Periodic spectral grid: dimensions, wavevectors, Nyquist bounds.
//!
//! Fields live on a torus `[0, L)^d` sampled at `n` points per axis with `n`
//! a power of two. Spectral coefficients are stored in FFT index order; the
//! integer wavenumber for index `i` along an axis is `i` for `i < n/2` and
//! `i - n` otherwise, and the physical wavenumber is `2*pi*k/L`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    points_per_dim: usize,
    domain_length: f64,
}

impl GridSpec {
    pub fn new(dim: usize, points_per_dim: usize, domain_length: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dim must be 1, 2 or 3, got {dim}")));
        }
        if !points_per_dim.is_power_of_two() || points_per_dim < 16 {
            return Err(Error::InvalidGrid(format!(
                "points_per_dim must be a power of two >= 16, got {points_per_dim}"
            )));
        }
        if !(domain_length.is_finite() && domain_length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "domain_length must be positive, got {domain_length}"
            )));
        }
        Ok(Self { dim, points_per_dim, domain_length })
    }

    /// Grid on `[0, 2*pi)^d`, the default box.
    pub fn standard(dim: usize, points_per_dim: usize) -> Result<Self> {
        Self::new(dim, points_per_dim, std::f64::consts::TAU)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_dim(&self) -> usize {
        self.points_per_dim
    }

    pub fn domain_length(&self) -> f64 {
        self.domain_length
    }

    /// Total number of grid points (and spectral coefficients).
    pub fn total_points(&self) -> usize {
        self.points_per_dim.pow(self.dim as u32)
    }

    /// Volume of the periodic box.
    pub fn volume(&self) -> f64 {
        self.domain_length.powi(self.dim as i32)
    }

    /// Physical wavenumber of the first nonzero mode, `2*pi/L`.
    pub fn k_fundamental(&self) -> f64 {
        std::f64::consts::TAU / self.domain_length
    }

    /// Nyquist wavenumber `pi * n / L`.
    pub fn k_max(&self) -> f64 {
        std::f64::consts::PI * self.points_per_dim as f64 / self.domain_length
    }

    /// Integer wavenumber along one axis for FFT index `i`.
    #[inline]
    pub fn k_int(&self, i: usize) -> i64 {
        let n = self.points_per_dim;
        if i < n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    /// FFT index along one axis for an integer wavenumber.
    #[inline]
    pub fn index_of_k(&self, k: i64) -> usize {
        let n = self.points_per_dim as i64;
        (k.rem_euclid(n)) as usize
    }

    /// Integer wavevector of a flat coefficient index.
    #[inline]
    pub fn wavevector(&self, flat: usize) -> [i64; 3] {
        let n = self.points_per_dim;
        let mut k = [0i64; 3];
        let mut rem = flat;
        for a in (0..self.dim).rev() {
            k[a] = self.k_int(rem % n);
            rem /= n;
        }
        k
    }

    /// Flat coefficient index of an integer wavevector (components wrapped mod n).
    #[inline]
    pub fn flat_of_wavevector(&self, k: [i64; 3]) -> usize {
        let n = self.points_per_dim;
        let mut flat = 0;
        for a in 0..self.dim {
            flat = flat * n + self.index_of_k(k[a]);
        }
        flat
    }

    /// Physical wavevector magnitude of a flat coefficient index.
    #[inline]
    pub fn xi_norm(&self, flat: usize) -> f64 {
        let k = self.wavevector(flat);
        let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
        self.k_fundamental() * k2.sqrt()
    }

    /// Squared integer wavevector of a flat index.
    #[inline]
    pub fn k2_int(&self, flat: usize) -> i64 {
        let k = self.wavevector(flat);
        k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
    }

    /// Iterate flat indices together with integer wavevectors.
    pub fn iter_wavevectors(&self) -> impl Iterator<Item = (usize, [i64; 3])> + '_ {
        (0..self.total_points()).map(move |flat| (flat, self.wavevector(flat)))
    }

    /// Real-space sample coordinates for a flat index.
    pub fn coords(&self, flat: usize) -> [f64; 3] {
        let n = self.points_per_dim;
        let h = self.domain_length / n as f64;
        let mut x = [0.0; 3];
        let mut rem = flat;
        for a in (0..self.dim).rev() {
            x[a] = (rem % n) as f64 * h;
            rem /= n;
        }
        x
    }
}
