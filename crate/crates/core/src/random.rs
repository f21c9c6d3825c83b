//! Seeded band-limited random fields.
//!
//! Coefficients are drawn per wavevector from a hash of (seed, k), not from a
//! sequential stream. The same seed therefore produces the same function on
//! every grid that can represent the band, which is what the refinement
//! studies rely on.

use crate::field::SpectralField;
use crate::grid::GridSpec;
use num_complex::Complex64;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn unit_f64(bits: u64) -> f64 {
    // Uniform in [-1, 1).
    (bits >> 11) as f64 / (1u64 << 52) as f64 * 2.0 - 1.0
}

/// Deterministic complex draw for one wavevector.
fn draw(seed: u64, k: [i64; 3]) -> Complex64 {
    let mut h = splitmix64(seed ^ 0x6b7a_1f3c_9d2e_5a11);
    for comp in k {
        h = splitmix64(h ^ comp as u64);
    }
    let re = unit_f64(h);
    let im = unit_f64(splitmix64(h));
    Complex64::new(re, im)
}

/// Mean-zero random real field whose spectrum is supported on
/// `0 < |k| <= band` (integer wavenumbers), with a smooth `1/(1+|k|^2)`
/// amplitude falloff. Deterministic in `seed` and independent of grid
/// resolution for any grid that resolves the band.
pub fn band_limited(grid: GridSpec, band: u32, seed: u64) -> SpectralField {
    let mut out = SpectralField::zero(grid);
    let band = band as i64;
    let bound = band.min(grid.points_per_dim() as i64 / 2 - 1);
    let dim = grid.dim();
    let fill = |k: [i64; 3], out: &mut SpectralField| {
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 == 0 || k2 > band * band {
            return;
        }
        // Fill only the canonical half so the conjugate pair is consistent.
        let canonical = match k.iter().find(|&&c| c != 0) {
            Some(&c) => c > 0,
            None => return,
        };
        if !canonical {
            return;
        }
        let z = draw(seed, k) / (1.0 + k2 as f64);
        out.set_coeff(k, z);
    };
    match dim {
        1 => {
            for k0 in -bound..=bound {
                fill([k0, 0, 0], &mut out);
            }
        }
        2 => {
            for k0 in -bound..=bound {
                for k1 in -bound..=bound {
                    fill([k0, k1, 0], &mut out);
                }
            }
        }
        _ => {
            for k0 in -bound..=bound {
                for k1 in -bound..=bound {
                    for k2 in -bound..=bound {
                        fill([k0, k1, k2], &mut out);
                    }
                }
            }
        }
    }
    out
}
