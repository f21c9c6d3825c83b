//! Linearization of the coupled density/velocity/temperature system around a
//! constant equilibrium: coefficient extraction, the per-mode symbol matrix
//! and its characteristic cubic, the sharp stability conditions, eigenvalue
//! asymptotics at both frequency extremes, the exact semigroup with its
//! Duhamel (ETD) quadratures, and the per-block Lyapunov/decay diagnostics.
//!
//! The potential part of the velocity couples to density and temperature
//! through the 3x3 symbol
//!
//! ```text
//!            |      0            |xi|        0     |
//!   A(xi) =  | -eps|xi|^3-beta|xi|   nu|xi|^2  -gamma|xi| |
//!            |      0          delta|xi|   alpha|xi|^2 |
//! ```
//!
//! acting on `(q, d, T)` per mode, while the incompressible part obeys a
//! plain heat equation with viscosity `mu_tilde`.

use crate::error::{Error, Result};
use crate::expm::{exp_phi_matrices, expm, phi1_scalar, phi2_scalar};
use crate::field::SpectralField;
use crate::physics::EquilibriumModel;
use crate::stats::ls_slope;
use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Scalar coefficients of the linearized system. `nu = lambda_tilde + 2
/// mu_tilde` is the viscosity seen by the potential part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearCoeffs {
    pub nu: f64,
    pub mu_tilde: f64,
    pub lambda_tilde: f64,
    pub eps: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl LinearCoeffs {
    pub fn new(
        mu_tilde: f64,
        lambda_tilde: f64,
        eps: f64,
        alpha: f64,
        beta: f64,
        gamma: f64,
        delta: f64,
    ) -> Self {
        Self {
            nu: lambda_tilde + 2.0 * mu_tilde,
            mu_tilde,
            lambda_tilde,
            eps,
            alpha,
            beta,
            gamma,
            delta,
        }
    }

    /// Build from the potential-part viscosity directly; the shear/bulk split
    /// is chosen as `mu_tilde = lambda_tilde = nu/3`, which the `(q, d, T)`
    /// block cannot distinguish.
    pub fn from_nu(nu: f64, eps: f64, alpha: f64, beta: f64, gamma: f64, delta: f64) -> Self {
        Self { nu, mu_tilde: nu / 3.0, lambda_tilde: nu / 3.0, eps, alpha, beta, gamma, delta }
    }

    /// Coefficient extraction from an equilibrium model:
    /// `mu_tilde = mu/rho`, `lambda_tilde = lambda/rho`, `eps = rho*kappa`,
    /// `alpha = chi/rho`, `beta = P0' + T P1'`, `gamma = P1/(rho Psi')`,
    /// `delta = T P1 / rho`, all at the reference state.
    pub fn from_equilibrium(model: &EquilibriumModel) -> Result<Self> {
        model.validate()?;
        let r = model.rho_bar;
        let t = model.t_bar();
        let mu_tilde = model.mu.eval(r) / r;
        let lambda_tilde = model.lambda.eval(r) / r;
        let eps = r * model.kappa.eval(r);
        let alpha = model.chi.eval(r) / r;
        let beta = model.p0.deriv(r) + t * model.p1.deriv(r);
        let gamma = model.p1.eval(r) / (r * model.a_psi);
        let delta = t * model.p1.eval(r) / r;
        Ok(Self::new(mu_tilde, lambda_tilde, eps, alpha, beta, gamma, delta))
    }
}

/// The six global-stability conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityCondition {
    NonnegNu,
    NonnegEps,
    NonnegAlpha,
    #[serde(rename = "alphabeta")]
    AlphaBeta,
    Mixed,
    GammadeltaBeta,
}

impl StabilityCondition {
    pub const ALL: [Self; 6] = [
        Self::NonnegNu,
        Self::NonnegEps,
        Self::NonnegAlpha,
        Self::AlphaBeta,
        Self::Mixed,
        Self::GammadeltaBeta,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::NonnegNu => "nonneg_nu",
            Self::NonnegEps => "nonneg_eps",
            Self::NonnegAlpha => "nonneg_alpha",
            Self::AlphaBeta => "alphabeta",
            Self::Mixed => "mixed",
            Self::GammadeltaBeta => "gammadelta_beta",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityReport {
    pub stable: bool,
    pub violated: Vec<StabilityCondition>,
    pub strict: bool,
}

/// The quantity each condition requires to be nonnegative.
pub fn condition_values(c: &LinearCoeffs) -> [(StabilityCondition, f64); 6] {
    let gd = c.gamma * c.delta;
    [
        (StabilityCondition::NonnegNu, c.nu),
        (StabilityCondition::NonnegEps, c.eps),
        (StabilityCondition::NonnegAlpha, c.alpha),
        (StabilityCondition::AlphaBeta, c.alpha * c.beta),
        (StabilityCondition::Mixed, gd * (c.nu + c.alpha) + c.nu * c.beta),
        (StabilityCondition::GammadeltaBeta, gd + c.beta),
    ]
}

/// Evaluate the global-stability conditions with exact signs (tolerance 0).
pub fn classify_stability(c: &LinearCoeffs) -> StabilityReport {
    let values = condition_values(c);
    let violated: Vec<StabilityCondition> =
        values.iter().filter(|(_, v)| *v < 0.0).map(|(cond, _)| *cond).collect();
    let strict = values.iter().all(|(_, v)| *v > 0.0);
    StabilityReport { stable: violated.is_empty(), violated, strict }
}

/// The per-mode symbol matrix `A(xi)`.
pub fn system_matrix(c: &LinearCoeffs, xi: f64) -> Result<Matrix3<f64>> {
    if !(xi > 0.0) {
        return Err(Error::InvalidArgument(format!("system matrix needs xi > 0, got {xi}")));
    }
    let x2 = xi * xi;
    Ok(Matrix3::new(
        0.0,
        xi,
        0.0,
        -c.eps * xi * x2 - c.beta * xi,
        c.nu * x2,
        -c.gamma * xi,
        0.0,
        c.delta * xi,
        c.alpha * x2,
    ))
}

/// Coefficients `(1, a2, a1, a0)` of the characteristic cubic: the
/// eigenvalues of `-A(xi)` are `|xi|^2` times its roots.
pub fn char_poly(c: &LinearCoeffs, xi: f64) -> Result<[f64; 4]> {
    if !(xi > 0.0) {
        return Err(Error::InvalidArgument(format!("char poly needs xi > 0, got {xi}")));
    }
    let inv2 = 1.0 / (xi * xi);
    Ok([
        1.0,
        c.nu + c.alpha,
        c.eps + c.nu * c.alpha + (c.gamma * c.delta + c.beta) * inv2,
        c.alpha * c.eps + c.alpha * c.beta * inv2,
    ])
}

/// Roots of the monic cubic `x^3 + a2 x^2 + a1 x + a0` by Cardano with
/// complex arithmetic; near-multiple roots (normalized discriminant below
/// 1e-12) fall back to companion-matrix eigenvalues. Two Newton polishing
/// steps tighten either route.
pub fn cubic_roots(a2: f64, a1: f64, a0: f64) -> [Complex64; 3] {
    let p = a1 - a2 * a2 / 3.0;
    let q = 2.0 * a2 * a2 * a2 / 27.0 - a2 * a1 / 3.0 + a0;
    let radicand = 0.25 * q * q + p * p * p / 27.0;
    let scale = a2.abs().max(a1.abs().sqrt()).max(a0.abs().cbrt()).max(1e-30);
    let mut roots = if radicand.abs() < 1e-12 * scale.powi(6) {
        companion_roots(a2, a1, a0)
    } else {
        let s = Complex64::new(radicand, 0.0).sqrt();
        let cand_a = Complex64::new(-q / 2.0, 0.0) + s;
        let cand_b = Complex64::new(-q / 2.0, 0.0) - s;
        let u3 = if cand_a.norm() >= cand_b.norm() { cand_a } else { cand_b };
        let u = u3.powf(1.0 / 3.0);
        if u.norm() < 1e-300 {
            // p = q = 0: triple root.
            let r = Complex64::new(-a2 / 3.0, 0.0);
            return [r, r, r];
        }
        let omega = Complex64::new(-0.5, 0.75f64.sqrt());
        let mut out = [Complex64::ZERO; 3];
        let mut uk = u;
        for root in &mut out {
            *root = uk - p / (3.0 * uk) - a2 / 3.0;
            uk *= omega;
        }
        out
    };
    for r in &mut roots {
        for _ in 0..2 {
            let val = ((*r + a2) * *r + a1) * *r + a0;
            let deriv = (3.0 * *r + 2.0 * a2) * *r + a1;
            if deriv.norm() > 1e-30 {
                *r -= val / deriv;
            }
        }
    }
    roots
}

fn companion_roots(a2: f64, a1: f64, a0: f64) -> [Complex64; 3] {
    let m = Matrix3::new(0.0, 0.0, -a0, 1.0, 0.0, -a1, 0.0, 1.0, -a2);
    let ev = m.complex_eigenvalues();
    [ev[0], ev[1], ev[2]]
}

/// Eigenvalues of `-A(xi)`: `|xi|^2` times the characteristic-cubic roots.
pub fn eigenvalues_minus_a(c: &LinearCoeffs, xi: f64) -> Result<[Complex64; 3]> {
    let [_, a2, a1, a0] = char_poly(c, xi)?;
    let roots = cubic_roots(a2, a1, a0);
    Ok(roots.map(|r| r * xi * xi))
}

/// Low-frequency eigenvalue asymptotics under strict stability:
/// `lambda_1 ~ -rate1 |xi|^2` and
/// `lambda_pm ~ -rate_pm |xi|^2 +- i osc |xi|`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LowFreqAsymptotics {
    pub rate1: f64,
    pub rate_pm: f64,
    pub osc: f64,
}

pub fn low_freq_asymptotics(c: &LinearCoeffs) -> Result<LowFreqAsymptotics> {
    let report = classify_stability(c);
    let gd = c.gamma * c.delta;
    if !report.strict || !(gd + c.beta > 0.0) {
        return Err(Error::Domain(
            "low-frequency asymptotics need strict stability and gamma*delta + beta > 0".into(),
        ));
    }
    Ok(LowFreqAsymptotics {
        rate1: c.alpha * c.beta / (c.beta + gd),
        rate_pm: (gd * (c.nu + c.alpha) + c.nu * c.beta) / (2.0 * (gd + c.beta)),
        osc: (gd + c.beta).sqrt(),
    })
}

/// Limits of the characteristic-cubic roots as `xi -> infinity`:
/// `{-alpha, -(nu/2)(1 +- sqrt(1 - 4 eps/nu^2))}` with a complex square root
/// when `4 eps > nu^2`.
pub fn high_freq_limits(c: &LinearCoeffs) -> Result<[Complex64; 3]> {
    if c.nu == 0.0 {
        return Err(Error::Domain("high-frequency limits need nu > 0".into()));
    }
    let disc = Complex64::new(1.0 - 4.0 * c.eps / (c.nu * c.nu), 0.0).sqrt();
    Ok([
        Complex64::new(-c.alpha, 0.0),
        -(c.nu / 2.0) * (1.0 + disc),
        -(c.nu / 2.0) * (1.0 - disc),
    ])
}

fn to_complex3(m: &Matrix3<f64>) -> Matrix3<Complex64> {
    m.map(|v| Complex64::new(v, 0.0))
}

fn frobenius(m: &Matrix3<f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Spectral projectors of `B = -A(xi)`; valid when the eigenvalues are
/// separated.
fn spectral_projectors(
    b: &Matrix3<Complex64>,
    lambda: &[Complex64; 3],
) -> [Matrix3<Complex64>; 3] {
    let id = Matrix3::<Complex64>::identity();
    let mut out = [Matrix3::<Complex64>::zeros(); 3];
    for i in 0..3 {
        let j = (i + 1) % 3;
        let k = (i + 2) % 3;
        let num = (b - id * lambda[j]) * (b - id * lambda[k]);
        let den = (lambda[i] - lambda[j]) * (lambda[i] - lambda[k]);
        out[i] = num / den;
    }
    out
}

fn min_eigen_gap(lambda: &[Complex64; 3]) -> f64 {
    let mut gap = f64::INFINITY;
    for i in 0..3 {
        for j in (i + 1)..3 {
            gap = gap.min((lambda[i] - lambda[j]).norm());
        }
    }
    gap
}

/// Semigroup `W(t) = exp(-t A(xi))`; `W(0)` is the identity exactly.
/// Eigendecomposition when the spectrum of `A(xi)` is separated, degree-6
/// Pade with scaling and squaring otherwise.
pub fn semigroup(c: &LinearCoeffs, xi: f64, t: f64) -> Result<Matrix3<f64>> {
    if t < 0.0 {
        return Err(Error::InvalidArgument(format!("semigroup needs t >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(Matrix3::identity());
    }
    let a = system_matrix(c, xi)?;
    let lambda = eigenvalues_minus_a(c, xi)?;
    if min_eigen_gap(&lambda) > 1e-8 * frobenius(&a) {
        let b = to_complex3(&(-a));
        let projectors = spectral_projectors(&b, &lambda);
        let mut w = Matrix3::<Complex64>::zeros();
        for i in 0..3 {
            w += projectors[i] * (lambda[i] * t).exp();
        }
        Ok(w.map(|z| z.re))
    } else {
        Ok(expm(&(-a * t)))
    }
}

/// Time integration order of the Duhamel quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EtdOrder {
    One,
    Two,
}

/// One step of the exact-semigroup integrator for a single mode:
/// `w` is `W(dt)`, `phi1` is `int_0^dt W(dt - s) ds` and `phi2` is
/// `int_0^dt W(dt - s) (s/dt) ds`, so that for forcing linear in time
/// `state_next = w state + phi1 f0 + phi2 (f1 - f0)` is exact.
#[derive(Debug, Clone)]
pub struct ModePropagator {
    pub w: Matrix3<f64>,
    pub phi1: Matrix3<f64>,
    pub phi2: Matrix3<f64>,
}

impl ModePropagator {
    pub fn apply(
        &self,
        state: Vector3<Complex64>,
        f0: Vector3<Complex64>,
        f1: Option<Vector3<Complex64>>,
    ) -> Vector3<Complex64> {
        let mut out = apply_real3(&self.w, state) + apply_real3(&self.phi1, f0);
        if let Some(f1) = f1 {
            out += apply_real3(&self.phi2, f1 - f0);
        }
        out
    }
}

pub fn apply_real3(m: &Matrix3<f64>, v: Vector3<Complex64>) -> Vector3<Complex64> {
    let mut out = Vector3::from_element(Complex64::ZERO);
    for i in 0..3 {
        let mut acc = Complex64::ZERO;
        for j in 0..3 {
            acc += v[j] * m[(i, j)];
        }
        out[i] = acc;
    }
    out
}

/// Build the per-mode propagator for time step `dt`. `xi = 0` is the
/// degenerate mode with `A = 0` (identity semigroup, plain quadrature
/// weights).
pub fn mode_propagator(c: &LinearCoeffs, xi: f64, dt: f64) -> Result<ModePropagator> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("mode propagator needs dt > 0, got {dt}")));
    }
    if xi == 0.0 {
        return Ok(ModePropagator {
            w: Matrix3::identity(),
            phi1: Matrix3::identity() * dt,
            phi2: Matrix3::identity() * (dt / 2.0),
        });
    }
    let a = system_matrix(c, xi)?;
    let lambda = eigenvalues_minus_a(c, xi)?;
    if min_eigen_gap(&lambda) > 1e-8 * frobenius(&a) {
        let b = to_complex3(&(-a));
        let projectors = spectral_projectors(&b, &lambda);
        let mut w = Matrix3::<Complex64>::zeros();
        let mut p1 = Matrix3::<Complex64>::zeros();
        let mut p2 = Matrix3::<Complex64>::zeros();
        for i in 0..3 {
            let z = lambda[i] * dt;
            w += projectors[i] * z.exp();
            p1 += projectors[i] * phi1_scalar(z);
            p2 += projectors[i] * phi2_scalar(z);
        }
        Ok(ModePropagator {
            w: w.map(|z| z.re),
            phi1: p1.map(|z| z.re * dt),
            phi2: p2.map(|z| z.re * dt),
        })
    } else {
        let (w, p1, p2) = exp_phi_matrices(&(-a * dt));
        Ok(ModePropagator { w, phi1: p1 * dt, phi2: p2 * dt })
    }
}

/// Scalar analogue for decoupled heat modes: `(e^{-a dt}, dt phi1, dt phi2)`
/// for the rate `a = coeff * xi^2`.
pub fn heat_propagator(coeff: f64, xi: f64, dt: f64) -> (f64, f64, f64) {
    let z = Complex64::new(-coeff * xi * xi * dt, 0.0);
    (z.exp().re, dt * phi1_scalar(z).re, dt * phi2_scalar(z).re)
}

/// Advance per-mode 3-vector states through one Duhamel step. `forcing_end`
/// must be supplied for the order-2 (linear-in-time) quadrature.
pub fn duhamel_step(
    c: &LinearCoeffs,
    xis: &[f64],
    state: &[Vector3<Complex64>],
    forcing_start: &[Vector3<Complex64>],
    forcing_end: Option<&[Vector3<Complex64>]>,
    dt: f64,
    order: EtdOrder,
) -> Result<Vec<Vector3<Complex64>>> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("duhamel step needs dt > 0, got {dt}")));
    }
    if state.len() != xis.len() || forcing_start.len() != xis.len() {
        return Err(Error::InvalidArgument("per-mode arrays must share a length".into()));
    }
    if order == EtdOrder::Two && forcing_end.is_none() {
        return Err(Error::InvalidArgument(
            "order-2 duhamel step needs the forcing at the step end".into(),
        ));
    }
    let mut out = Vec::with_capacity(state.len());
    for (i, (&xi, s)) in xis.iter().zip(state).enumerate() {
        let prop = mode_propagator(c, xi, dt)?;
        let f1 = match order {
            EtdOrder::One => None,
            EtdOrder::Two => Some(forcing_end.unwrap()[i]),
        };
        out.push(prop.apply(*s, forcing_start[i], f1));
    }
    Ok(out)
}

/// One dyadic block of the `(q, d, T)` state.
#[derive(Debug, Clone)]
pub struct BlockState {
    pub q: SpectralField,
    pub d: SpectralField,
    pub temp: SpectralField,
}

/// Low-frequency block Lyapunov functional
/// `f^2 = beta ||q||^2 + ||d||^2 + (gamma/delta) ||T||^2 - 2K <Lambda q, d>`.
pub fn block_lyapunov_low(c: &LinearCoeffs, block: &BlockState, k_weight: f64) -> Result<f64> {
    if c.delta == 0.0 {
        return Err(Error::DecoupledTemperature);
    }
    let f2 = c.beta * block.q.l2_norm().powi(2)
        + block.d.l2_norm().powi(2)
        + (c.gamma / c.delta) * block.temp.l2_norm().powi(2)
        - 2.0 * k_weight * block.q.lambda_power(1.0).inner(&block.d)?;
    if f2 < 0.0 {
        return Err(Error::LyapunovNotPositive { k: k_weight });
    }
    Ok(f2.sqrt())
}

/// Weighting of the temperature term in the high-frequency functional.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HighFreqVariant {
    /// `||Lambda^{-1} T||^2`
    Theorem1,
    /// `||T||^2`
    Theorem3,
}

/// High-frequency block Lyapunov functional
/// `f^2 = eps B ||Lambda q||^2 + B ||d||^2 + ||T||_*^2 - 2K <Lambda q, d>`
/// with the temperature weight chosen by the variant.
pub fn block_lyapunov_high(
    c: &LinearCoeffs,
    block: &BlockState,
    k_weight: f64,
    b_weight: f64,
    variant: HighFreqVariant,
) -> Result<f64> {
    if c.delta == 0.0 {
        return Err(Error::DecoupledTemperature);
    }
    if !(b_weight > 0.0) {
        return Err(Error::InvalidArgument(format!("B must be positive, got {b_weight}")));
    }
    let temp_term = match variant {
        HighFreqVariant::Theorem1 => block.temp.lambda_power(-1.0).l2_norm().powi(2),
        HighFreqVariant::Theorem3 => block.temp.l2_norm().powi(2),
    };
    let f2 = c.eps * b_weight * block.q.lambda_power(1.0).l2_norm().powi(2)
        + b_weight * block.d.l2_norm().powi(2)
        + temp_term
        - 2.0 * k_weight * block.q.lambda_power(1.0).inner(&block.d)?;
    if f2 < 0.0 {
        return Err(Error::LyapunovNotPositive { k: k_weight });
    }
    Ok(f2.sqrt())
}

/// Fitted decay of one dyadic block.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BlockDecayFit {
    pub l: i32,
    /// Representative wavenumber `sqrt(2) * 2^l` (geometric center of the
    /// block annulus).
    pub xi: f64,
    /// Fitted exponent of the coupled `(q, d, T)` block.
    pub rate: f64,
    /// Fitted exponent of the decoupled incompressible (heat) block.
    pub omega_rate: f64,
}

/// Evolve a unit datum in each block of `l_range` through the exact linear
/// flow and fit `log` of the weighted quantity
/// `max(1, 2^l) |q| + |d| + min(1, 2^-l) |T|` against time. The supplied
/// `t_grid` is expressed at block scale 0 and is rescaled by `4^{-l}` per
/// block, matching the parabolic `2^{2l}` decay scaling.
pub fn decay_exponent_fit(
    c: &LinearCoeffs,
    l_range: std::ops::RangeInclusive<i32>,
    t_grid: &[f64],
) -> Result<Vec<BlockDecayFit>> {
    if !classify_stability(c).strict {
        return Err(Error::Domain("decay fit is defined for strictly stable coefficients".into()));
    }
    if t_grid.len() < 2 || t_grid.windows(2).any(|w| w[1] <= w[0]) || t_grid[0] < 0.0 {
        return Err(Error::InvalidArgument(
            "t_grid must be increasing with at least two nonnegative entries".into(),
        ));
    }
    let v0 = Vector3::new(1.0, 1.0, 1.0) / 3.0f64.sqrt();
    let mut out = Vec::new();
    for l in l_range {
        let xi = (l as f64).exp2() * 2.0f64.sqrt();
        let wq = 1.0f64.max((l as f64).exp2());
        let wt = 1.0f64.min((-l as f64).exp2());
        let time_scale = (-2.0 * l as f64).exp2();
        let mut ts = Vec::with_capacity(t_grid.len());
        let mut logs = Vec::with_capacity(t_grid.len());
        let mut omega_logs = Vec::with_capacity(t_grid.len());
        for &t0 in t_grid {
            let t = t0 * time_scale;
            let w = semigroup(c, xi, t)?;
            let v = w * v0;
            let g = wq * v[0].abs() + v[1].abs() + wt * v[2].abs();
            if g <= 1e-290 {
                continue;
            }
            ts.push(t);
            logs.push(g.ln());
            omega_logs.push(-c.mu_tilde * xi * xi * t);
        }
        if ts.len() < 2 {
            return Err(Error::Domain(format!(
                "block {l}: decay too fast for the supplied t_grid"
            )));
        }
        out.push(BlockDecayFit {
            l,
            xi,
            rate: -ls_slope(&ts, &logs),
            omega_rate: -ls_slope(&ts, &omega_logs),
        });
    }
    Ok(out)
}
