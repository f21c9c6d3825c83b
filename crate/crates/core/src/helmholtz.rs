//! Compressible/incompressible splitting of velocity fields.
//!
//! The potential part is the scalar `d = Lambda^-1 div u` and the
//! incompressible part the antisymmetric matrix `Omega = Lambda^-1 curl u`
//! with `(curl u)_{ij} = d_i u_j - d_j u_i`. On nonzero modes the velocity is
//! recovered as `u = -Lambda^-1 grad d - Lambda^-1 div Omega`; the mean mode
//! is carried separately by callers (the split is singular at xi = 0).

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::GridSpec;
use num_complex::Complex64;

/// Antisymmetric matrix of fields; only the strict upper triangle is stored.
#[derive(Debug, Clone)]
pub struct AntisymmetricMatrix {
    grid: GridSpec,
    upper: Vec<SpectralField>,
}

impl AntisymmetricMatrix {
    pub fn zero(grid: GridSpec) -> Self {
        let d = grid.dim();
        let upper = (0..d * (d - 1) / 2).map(|_| SpectralField::zero(grid)).collect();
        Self { grid, upper }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        // Upper-triangle index for i < j in dim d.
        let d = self.grid.dim();
        i * d - i * (i + 1) / 2 + (j - i - 1)
    }

    /// Entry (i, j); antisymmetry gives the lower triangle and zero diagonal.
    pub fn entry(&self, i: usize, j: usize) -> SpectralField {
        let d = self.grid.dim();
        assert!(i < d && j < d, "entry index out of range");
        if i == j {
            SpectralField::zero(self.grid)
        } else if i < j {
            self.upper[self.slot(i, j)].clone()
        } else {
            self.upper[self.slot(j, i)].scale(-1.0)
        }
    }

    pub fn entries_upper(&self) -> &[SpectralField] {
        &self.upper
    }

    pub fn entries_upper_mut(&mut self) -> &mut [SpectralField] {
        &mut self.upper
    }

    /// Row divergence `(div Omega)_j = d_i Omega_{ij}`.
    pub fn divergence(&self) -> Vec<SpectralField> {
        let d = self.grid.dim();
        (0..d)
            .map(|j| {
                let mut out = SpectralField::zero(self.grid);
                for i in 0..d {
                    if i != j {
                        out.add_assign(&self.entry(i, j).derivative(i));
                    }
                }
                out
            })
            .collect()
    }

    /// Sum of squared L^2 norms of all entries (both triangles).
    pub fn norm_sqr(&self) -> f64 {
        2.0 * self.upper.iter().map(|f| f.l2_norm().powi(2)).sum::<f64>()
    }
}

fn check_components(u: &[SpectralField]) -> Result<GridSpec> {
    let first = u
        .first()
        .ok_or_else(|| Error::InvalidArgument("helmholtz split of empty vector".into()))?;
    let grid = *first.grid();
    if u.len() != grid.dim() {
        return Err(Error::InvalidArgument(format!(
            "expected {} velocity components, got {}",
            grid.dim(),
            u.len()
        )));
    }
    if u.iter().any(|c| c.grid() != &grid) {
        return Err(Error::GridMismatch("velocity components on different grids".into()));
    }
    Ok(grid)
}

/// Split a velocity field into `(d, Omega)`. Mean modes are dropped.
pub fn helmholtz_split(u: &[SpectralField]) -> Result<(SpectralField, AntisymmetricMatrix)> {
    let grid = check_components(u)?;
    let d = SpectralField::divergence(u)?.lambda_power(-1.0);
    let dim = grid.dim();
    let mut omega = AntisymmetricMatrix::zero(grid);
    let mut slot = 0;
    for i in 0..dim {
        for j in (i + 1)..dim {
            let curl_ij = u[j].derivative(i).sub(&u[i].derivative(j))?;
            omega.entries_upper_mut()[slot] = curl_ij.lambda_power(-1.0);
            slot += 1;
        }
    }
    Ok((d, omega))
}

/// Invert the split on nonzero modes: `u = -Lambda^-1 grad d - Lambda^-1 div Omega`.
pub fn helmholtz_reassemble(d: &SpectralField, omega: &AntisymmetricMatrix) -> Vec<SpectralField> {
    let grad = d.gradient();
    let div_omega = omega.divergence();
    grad.into_iter()
        .zip(div_omega)
        .map(|(g, o)| {
            let mut s = g;
            s.add_assign(&o);
            s.lambda_power(-1.0).scale(-1.0)
        })
        .collect()
}

/// `Lambda^-1 div` of a vector field (the potential-part forcing projection).
pub fn lambda_inv_div(v: &[SpectralField]) -> Result<SpectralField> {
    check_components(v)?;
    Ok(SpectralField::divergence(v)?.lambda_power(-1.0))
}

/// `Lambda^-1 curl` of a vector field.
pub fn lambda_inv_curl(v: &[SpectralField]) -> Result<AntisymmetricMatrix> {
    let grid = check_components(v)?;
    let dim = grid.dim();
    let mut omega = AntisymmetricMatrix::zero(grid);
    let mut slot = 0;
    for i in 0..dim {
        for j in (i + 1)..dim {
            let curl_ij = v[j].derivative(i).sub(&v[i].derivative(j))?;
            omega.entries_upper_mut()[slot] = curl_ij.lambda_power(-1.0);
            slot += 1;
        }
    }
    Ok(omega)
}

/// Per-mode potential projection used by the solver: for one wavevector `k`
/// returns `Lambda^-1 div` as a complex linear functional of the component
/// coefficients.
pub fn mode_lambda_inv_div(k: [i64; 3], k0: f64, comps: &[Complex64]) -> Complex64 {
    let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
    if k2 == 0.0 {
        return Complex64::ZERO;
    }
    let norm = k0 * k2.sqrt();
    let mut s = Complex64::ZERO;
    for (a, c) in comps.iter().enumerate() {
        s += Complex64::new(0.0, k0 * k[a] as f64) * c;
    }
    s / norm
}
