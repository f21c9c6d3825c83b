//! Dyadic (Littlewood-Paley) decomposition on the finite Fourier grid.
//!
//! The block family is built from a smooth radial profile supported in the
//! annulus `[3/4, 8/3]` via the telescoping construction `phi(r) =
//! chi(r/2) - chi(r)`, with `chi` a C-infinity cutoff equal to 1 below 3/4
//! and 0 above 4/3. On the truncated block range the partition of unity is
//! enforced exactly by dividing each raw weight by the computed sum over the
//! range, so every nonzero grid wavevector is covered.

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::GridSpec;

/// Lower edge of the block annulus at scale 1.
pub const ANNULUS_LOW: f64 = 0.75;
/// Upper edge of the block annulus at scale 1.
pub const ANNULUS_HIGH: f64 = 8.0 / 3.0;

/// C-infinity step: 0 for x <= 0, 1 for x >= 1.
fn smoothstep(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / x).exp();
        let b = (-1.0 / (1.0 - x)).exp();
        a / (a + b)
    }
}

/// Low-pass cutoff: 1 on [0, 3/4], 0 on [4/3, inf).
fn chi(r: f64) -> f64 {
    1.0 - smoothstep((r - 0.75) / (4.0 / 3.0 - 0.75))
}

/// Raw radial block profile, supported in [3/4, 8/3].
pub fn phi_profile(r: f64) -> f64 {
    chi(r / 2.0) - chi(r)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DyadicDecomposition {
    grid: GridSpec,
    l_min: i32,
    l_max: i32,
    /// Blocks with index `l <= split_index` count as low frequency. The
    /// default 0 anchors the split at |xi| ~ 1.
    split_index: i32,
}

impl DyadicDecomposition {
    pub fn new(grid: GridSpec) -> Self {
        // Lowest annulus must cover the fundamental mode, highest must cover
        // sqrt(d) * k_max (the corner of the wavevector cube).
        let l_min = grid.k_fundamental().log2().floor() as i32 - 1;
        let l_max = grid.k_max().log2().ceil() as i32 + 1;
        Self { grid, l_min, l_max, split_index: 0 }
    }

    pub fn with_split(mut self, split_index: i32) -> Self {
        self.split_index = split_index;
        self
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn l_min(&self) -> i32 {
        self.l_min
    }

    pub fn l_max(&self) -> i32 {
        self.l_max
    }

    pub fn split_index(&self) -> i32 {
        self.split_index
    }

    pub fn blocks(&self) -> std::ops::RangeInclusive<i32> {
        self.l_min..=self.l_max
    }

    fn check_block(&self, l: i32) -> Result<()> {
        if l < self.l_min || l > self.l_max {
            return Err(Error::BlockOutOfRange { l, l_min: self.l_min, l_max: self.l_max });
        }
        Ok(())
    }

    /// Sum of raw profiles over the truncated range at radius `r`.
    fn range_sum(&self, r: f64) -> f64 {
        (self.l_min..=self.l_max).map(|l| phi_profile(r * (-l as f64).exp2())).sum()
    }

    /// Normalized multiplier of block `l` at radius `r` (zero at r = 0).
    pub fn block_weight(&self, l: i32, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let raw = phi_profile(r * (-l as f64).exp2());
        if raw == 0.0 {
            return 0.0;
        }
        raw / self.range_sum(r)
    }

    /// The dyadic block operator: multiplier `phi(2^-l |xi|)` applied to the
    /// spectrum. Linear in the field.
    pub fn dyadic_block(&self, u: &SpectralField, l: i32) -> Result<SpectralField> {
        self.check_block(l)?;
        self.check_grid(u)?;
        Ok(u.multiplier(|k| {
            let r = self.radius(k);
            self.block_weight(l, r)
        }))
    }

    /// Low-frequency cutoff `S_l = mean + sum_{k <= l-1} Delta_k`. The mean
    /// mode always passes. Accepts `l` up to `l_max + 1`, for which the
    /// cutoff reproduces the whole field.
    pub fn low_cutoff(&self, u: &SpectralField, l: i32) -> Result<SpectralField> {
        if l < self.l_min || l > self.l_max + 1 {
            return Err(Error::BlockOutOfRange { l, l_min: self.l_min, l_max: self.l_max + 1 });
        }
        self.check_grid(u)?;
        Ok(u.multiplier(|k| {
            let r = self.radius(k);
            if r == 0.0 {
                return 1.0;
            }
            (self.l_min..l).map(|b| self.block_weight(b, r)).sum()
        }))
    }

    /// L^2 norms of every block of `u`, indexed `l_min..=l_max`. Computed
    /// directly from the spectrum; the mean mode is excluded.
    pub fn block_norms(&self, u: &SpectralField) -> Result<Vec<f64>> {
        self.check_grid(u)?;
        let vol = self.grid.volume();
        let nblocks = (self.l_max - self.l_min + 1) as usize;
        let mut sums = vec![0.0f64; nblocks];
        for (flat, c) in u.coeffs().iter().enumerate() {
            let r = self.grid.xi_norm(flat);
            if r == 0.0 {
                continue;
            }
            let p = c.norm_sqr();
            if p == 0.0 {
                continue;
            }
            for (bi, l) in (self.l_min..=self.l_max).enumerate() {
                let w = self.block_weight(l, r);
                if w != 0.0 {
                    sums[bi] += w * w * p;
                }
            }
        }
        Ok(sums.into_iter().map(|s| (vol * s).sqrt()).collect())
    }

    /// Worst deviation of the truncated partition of unity from 1 over the
    /// nonzero grid wavevectors.
    pub fn partition_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for flat in 0..self.grid.total_points() {
            let r = self.grid.xi_norm(flat);
            if r == 0.0 {
                continue;
            }
            let total: f64 = (self.l_min..=self.l_max).map(|l| self.block_weight(l, r)).sum();
            worst = worst.max((total - 1.0).abs());
        }
        worst
    }

    fn radius(&self, k: [i64; 3]) -> f64 {
        let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
        self.grid.k_fundamental() * k2.sqrt()
    }

    fn check_grid(&self, u: &SpectralField) -> Result<()> {
        if *u.grid() != self.grid {
            return Err(Error::GridMismatch("field grid differs from decomposition grid".into()));
        }
        Ok(())
    }
}
