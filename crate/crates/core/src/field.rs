//! Spectral representation of real periodic fields and the Fourier-multiplier
//! operators built on it.
//!
//! A `SpectralField` stores the full complex coefficient array of a real
//! field, so conjugate symmetry `coeff(-k) = conj(coeff(k))` is an invariant
//! rather than a storage optimization. Coefficients are amplitudes: the field
//! is `u(x) = sum_k c_k exp(i k.x * 2*pi/L)`, which makes them independent of
//! the grid resolution and lets band-limited data move between grids exactly.
//!
//! Nonlinear products go through a 3/2-padded real grid (`padded_real` /
//! `from_padded_real`), which is alias-free for quadratic products of
//! band-limited inputs and equivalent to the 2/3 truncation rule.

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::sync::Mutex;

/// Process-wide FFT plan cache.
static PLANNER: Mutex<Option<FftPlanner<f64>>> = Mutex::new(None);

fn with_planner<R>(f: impl FnOnce(&mut FftPlanner<f64>) -> R) -> R {
    let mut guard = PLANNER.lock().unwrap();
    let planner = guard.get_or_insert_with(FftPlanner::new);
    f(planner)
}

/// In-place complex FFT along every axis of a row-major d-dimensional array.
fn fft_all_axes(data: &mut [Complex64], n: usize, dim: usize, forward: bool) {
    let fft = with_planner(|p| {
        if forward {
            p.plan_fft_forward(n)
        } else {
            p.plan_fft_inverse(n)
        }
    });
    let total = data.len();
    let mut line = vec![Complex64::ZERO; n];
    for axis in 0..dim {
        // Row-major: axis `a` has stride n^(dim-1-a).
        let stride = n.pow((dim - 1 - axis) as u32);
        let block = stride * n;
        for base_block in (0..total).step_by(block) {
            for offset in 0..stride {
                let base = base_block + offset;
                for j in 0..n {
                    line[j] = data[base + j * stride];
                }
                fft.process(&mut line);
                for j in 0..n {
                    data[base + j * stride] = line[j];
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zero(grid: GridSpec) -> Self {
        Self { grid, coeffs: vec![Complex64::ZERO; grid.total_points()] }
    }

    /// Build from real-space samples (row-major, one per grid point).
    pub fn from_real(grid: GridSpec, samples: &[f64]) -> Result<Self> {
        if samples.len() != grid.total_points() {
            return Err(Error::InvalidArgument(format!(
                "expected {} samples, got {}",
                grid.total_points(),
                samples.len()
            )));
        }
        let mut data: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_all_axes(&mut data, grid.points_per_dim(), grid.dim(), true);
        let scale = 1.0 / grid.total_points() as f64;
        for c in &mut data {
            *c *= scale;
        }
        Ok(Self { grid, coeffs: data })
    }

    /// Sample a function of the grid coordinates.
    pub fn from_fn(grid: GridSpec, f: impl Fn([f64; 3]) -> f64) -> Self {
        let samples: Vec<f64> = (0..grid.total_points()).map(|i| f(grid.coords(i))).collect();
        Self::from_real(grid, &samples).expect("sample count matches grid")
    }

    /// Real-space samples (row-major).
    pub fn to_real(&self) -> Vec<f64> {
        let mut data = self.coeffs.clone();
        fft_all_axes(&mut data, self.grid.points_per_dim(), self.grid.dim(), false);
        data.into_iter().map(|c| c.re).collect()
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn coeff(&self, k: [i64; 3]) -> Complex64 {
        self.coeffs[self.grid.flat_of_wavevector(k)]
    }

    pub fn set_coeff(&mut self, k: [i64; 3], value: Complex64) {
        let flat = self.grid.flat_of_wavevector(k);
        self.coeffs[flat] = value;
        // Keep the conjugate partner in sync so the field stays real.
        let neg = [-k[0], -k[1], -k[2]];
        let pflat = self.grid.flat_of_wavevector(neg);
        if pflat != flat {
            self.coeffs[pflat] = value.conj();
        }
    }

    /// Mean value of the field (the k = 0 coefficient).
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn set_mean(&mut self, mean: f64) {
        self.coeffs[0] = Complex64::new(mean, 0.0);
    }

    /// Remove the mean mode, returning the removed value.
    pub fn take_mean(&mut self) -> f64 {
        let m = self.mean();
        self.coeffs[0] = Complex64::ZERO;
        m
    }

    /// Continuum L^2 norm over the box: `sqrt(L^d * sum |c_k|^2)` (Parseval).
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        (self.grid.volume() * s).sqrt()
    }

    /// L^2 inner product of two real fields.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.check_same_grid(other)?;
        let s: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a * b.conj()).re)
            .sum();
        Ok(self.grid.volume() * s)
    }

    /// Grid-quadrature L^2 norm computed from real samples.
    pub fn l2_norm_quadrature(&self) -> f64 {
        let samples = self.to_real();
        let w = self.grid.volume() / self.grid.total_points() as f64;
        (w * samples.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    /// Worst violation of `coeff(-k) = conj(coeff(k))` relative to the
    /// largest coefficient magnitude.
    pub fn conjugate_asymmetry(&self) -> f64 {
        let scale = self
            .coeffs
            .iter()
            .map(|c| c.norm())
            .fold(0.0f64, f64::max)
            .max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for (flat, k) in self.grid.iter_wavevectors() {
            let neg = self.grid.flat_of_wavevector([-k[0], -k[1], -k[2]]);
            let diff = (self.coeffs[flat] - self.coeffs[neg].conj()).norm();
            worst = worst.max(diff);
        }
        worst / scale
    }

    fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("fields live on different grids".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(Self { grid: self.grid, coeffs })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(Self { grid: self.grid, coeffs })
    }

    pub fn scale(&self, factor: f64) -> Self {
        let coeffs = self.coeffs.iter().map(|c| c * factor).collect();
        Self { grid: self.grid, coeffs }
    }

    pub fn add_assign(&mut self, other: &Self) {
        debug_assert_eq!(self.grid, *other.grid());
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
    }

    /// Apply a real multiplier depending on the integer wavevector.
    pub fn multiplier(&self, m: impl Fn([i64; 3]) -> f64) -> Self {
        let mut out = self.clone();
        for (flat, k) in self.grid.iter_wavevectors() {
            out.coeffs[flat] *= m(k);
        }
        out
    }

    /// Partial derivative along one axis (multiplier `i*xi_a`).
    pub fn derivative(&self, axis: usize) -> Self {
        assert!(axis < self.grid.dim(), "axis out of range");
        let k0 = self.grid.k_fundamental();
        let n2 = (self.grid.points_per_dim() / 2) as i64;
        let mut out = self.clone();
        for (flat, k) in self.grid.iter_wavevectors() {
            // The Nyquist mode has no well-defined odd derivative on a real
            // grid; map it to zero.
            let ka = if k[axis] == -n2 { 0.0 } else { k[axis] as f64 };
            out.coeffs[flat] *= Complex64::new(0.0, ka * k0);
        }
        out
    }

    pub fn gradient(&self) -> Vec<Self> {
        (0..self.grid.dim()).map(|a| self.derivative(a)).collect()
    }

    pub fn laplacian(&self) -> Self {
        let k0sq = self.grid.k_fundamental().powi(2);
        self.multiplier(|k| -(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64 * k0sq)
    }

    /// Fractional derivative `Lambda^s`: multiplier `|xi|^s` on nonzero
    /// modes. For `s != 0` the mean mode is mapped to zero (`Lambda^{-1}` is
    /// singular there); `Lambda^0` is the identity.
    pub fn lambda_power(&self, s: f64) -> Self {
        if s == 0.0 {
            return self.clone();
        }
        let k0 = self.grid.k_fundamental();
        self.multiplier(|k| {
            let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
            if k2 == 0.0 {
                0.0
            } else {
                (k0 * k2.sqrt()).powf(s)
            }
        })
    }

    /// Divergence of a vector of fields.
    pub fn divergence(components: &[Self]) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidArgument("divergence of empty vector".into()))?;
        if components.len() != first.grid.dim() {
            return Err(Error::InvalidArgument(format!(
                "divergence needs {} components, got {}",
                first.grid.dim(),
                components.len()
            )));
        }
        let mut out = components[0].derivative(0);
        for (a, c) in components.iter().enumerate().skip(1) {
            first.check_same_grid(c)?;
            out.add_assign(&c.derivative(a));
        }
        Ok(out)
    }

    /// Zero every mode with an axis wavenumber above `n/3` (2/3 rule).
    pub fn dealias_two_thirds(&mut self) {
        let cut = (self.grid.points_per_dim() / 3) as i64;
        for (flat, k) in self.grid.iter_wavevectors() {
            if (0..self.grid.dim()).any(|a| k[a].abs() > cut) {
                self.coeffs[flat] = Complex64::ZERO;
            }
        }
    }

    /// Real samples on the 3/2-padded grid (for alias-free products).
    pub fn padded_real(&self) -> Vec<f64> {
        let n = self.grid.points_per_dim();
        let m = 3 * n / 2;
        let dim = self.grid.dim();
        let mut padded = vec![Complex64::ZERO; m.pow(dim as u32)];
        for (flat, k) in self.grid.iter_wavevectors() {
            let mut pflat = 0;
            for a in 0..dim {
                pflat = pflat * m + (k[a].rem_euclid(m as i64)) as usize;
            }
            padded[pflat] = self.coeffs[flat];
        }
        fft_all_axes(&mut padded, m, dim, false);
        padded.into_iter().map(|c| c.re).collect()
    }

    /// Inverse of [`padded_real`]: transform fine-grid samples and keep the
    /// modes representable on the coarse grid.
    pub fn from_padded_real(grid: GridSpec, samples: &[f64]) -> Self {
        let n = grid.points_per_dim();
        let m = 3 * n / 2;
        let dim = grid.dim();
        debug_assert_eq!(samples.len(), m.pow(dim as u32));
        let mut data: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_all_axes(&mut data, m, dim, true);
        let scale = 1.0 / m.pow(dim as u32) as f64;
        let mut out = Self::zero(grid);
        for (flat, k) in grid.iter_wavevectors() {
            let mut pflat = 0;
            for a in 0..dim {
                pflat = pflat * m + (k[a].rem_euclid(m as i64)) as usize;
            }
            out.coeffs[flat] = data[pflat] * scale;
        }
        out
    }

    /// Alias-free product of two fields.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        let a = self.padded_real();
        let b = other.padded_real();
        let prod: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        Ok(Self::from_padded_real(self.grid, &prod))
    }
}
