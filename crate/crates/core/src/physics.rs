//! Physical model: coefficient families, equilibrium reference states, the
//! pressure potential, the capillary (Korteweg) force, the quadratic
//! perturbation terms of the coupled system, and the energy/dissipation
//! functionals.
//!
//! Coefficient families are closed-form analytic so their density
//! derivatives are exact; every identity test below depends on that.
//! Products of fields are evaluated on the 3/2-padded real grid and
//! compositions are evaluated pointwise there.

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::GridSpec;
use crate::quadrature;
use serde::{Deserialize, Serialize};

/// Closed-form scalar coefficient family of the density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum CoeffFamily {
    Constant { value: f64 },
    /// `offset + slope * rho`
    Affine { offset: f64, slope: f64 },
    /// `coeff * rho^exponent`
    PowerLaw { coeff: f64, exponent: f64 },
    /// `rt * rho / (1 - b*rho) - a * rho^2`, the Van der Waals pressure form.
    VanDerWaals { a: f64, b: f64, rt: f64 },
}

impl CoeffFamily {
    pub fn constant(value: f64) -> Self {
        Self::Constant { value }
    }

    pub fn eval(&self, rho: f64) -> f64 {
        match *self {
            Self::Constant { value } => value,
            Self::Affine { offset, slope } => offset + slope * rho,
            Self::PowerLaw { coeff, exponent } => coeff * rho.powf(exponent),
            Self::VanDerWaals { a, b, rt } => rt * rho / (1.0 - b * rho) - a * rho * rho,
        }
    }

    /// Exact derivative with respect to the density.
    pub fn deriv(&self, rho: f64) -> f64 {
        match *self {
            Self::Constant { .. } => 0.0,
            Self::Affine { slope, .. } => slope,
            Self::PowerLaw { coeff, exponent } => coeff * exponent * rho.powf(exponent - 1.0),
            Self::VanDerWaals { a, b, rt } => {
                let d = 1.0 - b * rho;
                rt / (d * d) - 2.0 * a * rho
            }
        }
    }

    /// Closed-form antiderivative of `P(z)/z^2`, used by the pressure
    /// potential.
    fn antiderivative_over_z2(&self, z: f64) -> f64 {
        match *self {
            Self::Constant { value } => -value / z,
            Self::Affine { offset, slope } => -offset / z + slope * z.ln(),
            Self::PowerLaw { coeff, exponent } => {
                if (exponent - 1.0).abs() < 1e-14 {
                    coeff * z.ln()
                } else {
                    coeff * z.powf(exponent - 1.0) / (exponent - 1.0)
                }
            }
            Self::VanDerWaals { a, b, rt } => rt * (z / (1.0 - b * z)).ln() - a * z,
        }
    }
}

/// Reference state and coefficient functions of the fluid.
///
/// The internal-energy function is linear, `Psi(T) = a_psi * T`, so the
/// reference true temperature is `T_bar = theta_bar / a_psi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumModel {
    pub rho_bar: f64,
    pub theta_bar: f64,
    pub a_psi: f64,
    pub mu: CoeffFamily,
    pub lambda: CoeffFamily,
    pub kappa: CoeffFamily,
    pub chi: CoeffFamily,
    pub p0: CoeffFamily,
    pub p1: CoeffFamily,
}

impl EquilibriumModel {
    /// Unit reference state with every coefficient equal to one and linear
    /// pressure laws.
    pub fn constant_unit() -> Self {
        Self {
            rho_bar: 1.0,
            theta_bar: 1.0,
            a_psi: 1.0,
            mu: CoeffFamily::constant(1.0),
            lambda: CoeffFamily::constant(1.0),
            kappa: CoeffFamily::constant(1.0),
            chi: CoeffFamily::constant(1.0),
            p0: CoeffFamily::Affine { offset: 0.0, slope: 1.0 },
            p1: CoeffFamily::Affine { offset: 0.0, slope: 1.0 },
        }
    }

    /// Reference true temperature `Psi^{-1}(theta_bar)`.
    pub fn t_bar(&self) -> f64 {
        self.theta_bar / self.a_psi
    }

    /// Positivity hypotheses at the reference state; the error names the
    /// first failing inequality.
    pub fn validate(&self) -> Result<()> {
        let r = self.rho_bar;
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Hypothesis(format!("rho_bar > 0 fails (rho_bar = {r})")));
        }
        if !(self.theta_bar > 0.0) {
            return Err(Error::Hypothesis(format!(
                "theta_bar > 0 fails (theta_bar = {})",
                self.theta_bar
            )));
        }
        if !(self.a_psi > 0.0) {
            return Err(Error::Hypothesis(format!("a_psi > 0 fails (a_psi = {})", self.a_psi)));
        }
        if !(self.kappa.eval(r) > 0.0) {
            return Err(Error::Hypothesis(format!(
                "kappa(rho_bar) > 0 fails (kappa = {})",
                self.kappa.eval(r)
            )));
        }
        if !(self.mu.eval(r) > 0.0) {
            return Err(Error::Hypothesis(format!(
                "mu(rho_bar) > 0 fails (mu = {})",
                self.mu.eval(r)
            )));
        }
        if !(self.lambda.eval(r) + 2.0 * self.mu.eval(r) > 0.0) {
            return Err(Error::Hypothesis(format!(
                "lambda(rho_bar) + 2 mu(rho_bar) > 0 fails ({})",
                self.lambda.eval(r) + 2.0 * self.mu.eval(r)
            )));
        }
        if !(self.chi.eval(r) > 0.0) {
            return Err(Error::Hypothesis(format!(
                "chi(rho_bar) > 0 fails (chi = {})",
                self.chi.eval(r)
            )));
        }
        if !(self.p0.deriv(r) > 0.0) {
            return Err(Error::Hypothesis(format!(
                "P0'(rho_bar) > 0 fails (P0' = {})",
                self.p0.deriv(r)
            )));
        }
        Ok(())
    }
}

/// Pressure potential `Pi(s) = s (int_rho_bar^s P0(z)/z^2 dz - P0(rho_bar)/rho_bar)`,
/// evaluated in closed form. Satisfies `P0(s) = s Pi'(s) - Pi(s)` and
/// `Pi'(rho_bar) = 0`.
pub fn pressure_potential(s: f64, model: &EquilibriumModel) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::Domain(format!("pressure potential needs s > 0, got {s}")));
    }
    let integral =
        model.p0.antiderivative_over_z2(s) - model.p0.antiderivative_over_z2(model.rho_bar);
    Ok(s * (integral - model.p0.eval(model.rho_bar) / model.rho_bar))
}

/// The same potential with the integral done by adaptive quadrature; kept as
/// an independent route for the closed form.
pub fn pressure_potential_quadrature(s: f64, model: &EquilibriumModel) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::Domain(format!("pressure potential needs s > 0, got {s}")));
    }
    let p0 = model.p0;
    let integral = quadrature::integrate(|z| p0.eval(z) / (z * z), model.rho_bar, s, 1e-12);
    Ok(s * (integral - model.p0.eval(model.rho_bar) / model.rho_bar))
}

/// Spectral state of the perturbation `(q, u, T)` around an equilibrium:
/// `q = (rho - rho_bar)/rho_bar` carries its mean in the spectrum, while the
/// velocity and temperature means are explicit scalars (their mean modes are
/// not covered by the Helmholtz/semigroup machinery).
#[derive(Debug, Clone)]
pub struct FlowState {
    q: SpectralField,
    velocity: Vec<SpectralField>,
    u_mean: [f64; 3],
    temp: SpectralField,
    temp_mean: f64,
}

impl FlowState {
    pub fn equilibrium(grid: GridSpec) -> Self {
        Self {
            q: SpectralField::zero(grid),
            velocity: (0..grid.dim()).map(|_| SpectralField::zero(grid)).collect(),
            u_mean: [0.0; 3],
            temp: SpectralField::zero(grid),
            temp_mean: 0.0,
        }
    }

    /// Assemble from full fields; velocity and temperature means are pulled
    /// out of the spectra.
    pub fn new(q: SpectralField, mut velocity: Vec<SpectralField>, mut temp: SpectralField) -> Result<Self> {
        let grid = *q.grid();
        if velocity.len() != grid.dim() {
            return Err(Error::InvalidArgument(format!(
                "expected {} velocity components, got {}",
                grid.dim(),
                velocity.len()
            )));
        }
        if velocity.iter().any(|c| c.grid() != &grid) || temp.grid() != &grid {
            return Err(Error::GridMismatch("state components on different grids".into()));
        }
        let mut u_mean = [0.0; 3];
        for (a, c) in velocity.iter_mut().enumerate() {
            u_mean[a] = c.take_mean();
        }
        let temp_mean = temp.take_mean();
        Ok(Self { q, velocity, u_mean, temp, temp_mean })
    }

    /// Seeded band-limited perturbation of the given amplitude in all
    /// components (mean-zero, so total mass equals the equilibrium mass).
    pub fn random_perturbation(grid: GridSpec, amplitude: f64, band: u32, seed: u64) -> Self {
        let normalize = |mut f: SpectralField, target: f64| {
            f.take_mean();
            let n = f.l2_norm();
            if n > 0.0 {
                f = f.scale(target * grid.volume().sqrt() / n);
            }
            f
        };
        let q = normalize(crate::random::band_limited(grid, band, seed ^ 0x71), amplitude);
        let velocity = (0..grid.dim())
            .map(|a| {
                normalize(
                    crate::random::band_limited(grid, band, seed ^ (0x100 + a as u64)),
                    amplitude,
                )
            })
            .collect();
        let temp = normalize(crate::random::band_limited(grid, band, seed ^ 0x9e3), amplitude);
        Self { q, velocity, u_mean: [0.0; 3], temp, temp_mean: 0.0 }
    }

    pub fn grid(&self) -> &GridSpec {
        self.q.grid()
    }

    pub fn q(&self) -> &SpectralField {
        &self.q
    }

    pub fn velocity(&self) -> &[SpectralField] {
        &self.velocity
    }

    pub fn u_mean(&self) -> [f64; 3] {
        self.u_mean
    }

    pub fn temp(&self) -> &SpectralField {
        &self.temp
    }

    pub fn temp_mean(&self) -> f64 {
        self.temp_mean
    }

    /// The same state with a constant added to each velocity component.
    pub fn with_velocity_shift(&self, shift: &[f64]) -> Self {
        let mut out = self.clone();
        for (a, s) in shift.iter().enumerate().take(out.grid().dim()) {
            out.u_mean[a] += s;
        }
        out
    }

    /// Velocity component with its mean restored.
    pub fn velocity_full(&self, a: usize) -> SpectralField {
        let mut f = self.velocity[a].clone();
        f.set_mean(self.u_mean[a]);
        f
    }

    /// Temperature perturbation with its mean restored.
    pub fn temp_full(&self) -> SpectralField {
        let mut f = self.temp.clone();
        f.set_mean(self.temp_mean);
        f
    }

    /// Minimum of `1 + q` over the grid (density positivity indicator).
    pub fn min_density_ratio(&self) -> f64 {
        self.q.to_real().iter().fold(f64::INFINITY, |m, &v| m.min(1.0 + v))
    }

    /// Real-space components `[q, u_1.., u_d, T]`, means included.
    pub fn to_components(&self) -> Vec<Vec<f64>> {
        let mut out = vec![self.q.to_real()];
        for a in 0..self.grid().dim() {
            out.push(self.velocity_full(a).to_real());
        }
        out.push(self.temp_full().to_real());
        out
    }

    pub fn from_components(grid: GridSpec, comps: &[Vec<f64>]) -> Result<Self> {
        if comps.len() != grid.dim() + 2 {
            return Err(Error::InvalidArgument(format!(
                "expected {} components, got {}",
                grid.dim() + 2,
                comps.len()
            )));
        }
        let q = SpectralField::from_real(grid, &comps[0])?;
        let velocity = (0..grid.dim())
            .map(|a| SpectralField::from_real(grid, &comps[1 + a]))
            .collect::<Result<Vec<_>>>()?;
        let temp = SpectralField::from_real(grid, &comps[grid.dim() + 1])?;
        Self::new(q, velocity, temp)
    }

    /// L^2 size of the whole perturbation (means included).
    pub fn perturbation_norm(&self) -> f64 {
        let vol = self.grid().volume();
        let mut s = self.q.l2_norm().powi(2) + self.temp.l2_norm().powi(2);
        s += vol * self.temp_mean * self.temp_mean;
        for (a, c) in self.velocity.iter().enumerate() {
            s += c.l2_norm().powi(2) + vol * self.u_mean[a] * self.u_mean[a];
        }
        s.sqrt()
    }
}

/// Pointwise data shared by the nonlinear kernels: padded real samples of the
/// state and its derivatives.
struct PaddedState {
    rho: Vec<f64>,
    /// grad rho, one array per axis
    w: Vec<Vec<f64>>,
    lap_rho: Vec<f64>,
    u: Vec<Vec<f64>>,
    /// grad_u[a][j] = d_a u_j
    grad_u: Vec<Vec<Vec<f64>>>,
    lap_u: Vec<Vec<f64>>,
    div_u: Vec<f64>,
    grad_div_u: Vec<Vec<f64>>,
    temp: Vec<f64>,
    grad_temp: Vec<Vec<f64>>,
    lap_temp: Vec<f64>,
}

impl PaddedState {
    fn build(state: &FlowState, model: &EquilibriumModel) -> Self {
        let d = state.grid().dim();
        let q_pad = state.q.padded_real();
        let rho: Vec<f64> = q_pad.iter().map(|&q| model.rho_bar * (1.0 + q)).collect();
        let w: Vec<Vec<f64>> =
            (0..d).map(|a| state.q.derivative(a).scale(model.rho_bar).padded_real()).collect();
        let lap_rho = state.q.laplacian().scale(model.rho_bar).padded_real();
        let u_fields: Vec<SpectralField> = (0..d).map(|a| state.velocity_full(a)).collect();
        let u: Vec<Vec<f64>> = u_fields.iter().map(|f| f.padded_real()).collect();
        let grad_u: Vec<Vec<Vec<f64>>> = (0..d)
            .map(|a| u_fields.iter().map(|f| f.derivative(a).padded_real()).collect())
            .collect();
        let lap_u: Vec<Vec<f64>> = u_fields.iter().map(|f| f.laplacian().padded_real()).collect();
        let div_field = SpectralField::divergence(&u_fields).expect("components checked");
        let div_u = div_field.padded_real();
        let grad_div_u: Vec<Vec<f64>> =
            (0..d).map(|a| div_field.derivative(a).padded_real()).collect();
        let temp_field = state.temp_full();
        let temp = temp_field.padded_real();
        let grad_temp: Vec<Vec<f64>> =
            (0..d).map(|a| temp_field.derivative(a).padded_real()).collect();
        let lap_temp = temp_field.laplacian().padded_real();
        Self { rho, w, lap_rho, u, grad_u, lap_u, div_u, grad_div_u, temp, grad_temp, lap_temp }
    }

    fn len(&self) -> usize {
        self.rho.len()
    }
}

fn finish(grid: GridSpec, buf: &[f64], dealias: bool) -> SpectralField {
    let mut f = SpectralField::from_padded_real(grid, buf);
    if dealias {
        f.dealias_two_thirds();
    }
    f
}

/// The quadratic perturbation terms `(F, G, H)` of the coupled system around
/// the equilibrium, for density-only coefficients and linear internal
/// energy. At the equilibrium state all three vanish.
pub fn nonlinear_terms(
    state: &FlowState,
    model: &EquilibriumModel,
    dealias: bool,
) -> Result<(SpectralField, Vec<SpectralField>, SpectralField)> {
    model.validate()?;
    let grid = *state.grid();
    let d = grid.dim();
    let min_rho = state.min_density_ratio();
    if min_rho <= 0.0 {
        return Err(Error::Domain(format!("density positivity violated (min 1+q = {min_rho})")));
    }
    let ps = PaddedState::build(state, model);
    let n = ps.len();
    let rb = model.rho_bar;
    let tb = model.t_bar();
    let a_psi = model.a_psi;

    // F = -div(q u)
    let q_pad = state.q.padded_real();
    let f_field = {
        let mut div = SpectralField::zero(grid);
        for a in 0..d {
            let prod: Vec<f64> = q_pad.iter().zip(&ps.u[a]).map(|(q, u)| q * u).collect();
            div.add_assign(&finish(grid, &prod, dealias).derivative(a));
        }
        div.scale(-1.0)
    };

    // Reference ratios entering the coefficient differences.
    let mu_ref = model.mu.eval(rb) / rb;
    let zeta_ref = (model.lambda.eval(rb) + model.mu.eval(rb)) / rb;
    let pp_ref = (model.p0.deriv(rb) + tb * model.p1.deriv(rb)) / rb;
    let p1_ref = model.p1.eval(rb) / (rb * a_psi);
    let kappa_ref = model.kappa.eval(rb);
    let chi_ref = model.chi.eval(rb) / rb;

    // Pointwise part of G, one padded buffer per component.
    let mut g_point: Vec<Vec<f64>> = vec![vec![0.0; n]; d];
    for j in 0..d {
        let gp = &mut g_point[j];
        for i in 0..n {
            let rho = ps.rho[i];
            let t_true = (model.theta_bar + ps.temp[i]) / a_psi;
            let mut acc = 0.0;
            // advection
            for a in 0..d {
                acc -= ps.u[a][i] * ps.grad_u[a][j][i];
            }
            // viscosity coefficient differences
            acc += (model.mu.eval(rho) / rho - mu_ref) * ps.lap_u[j][i];
            acc += ((model.lambda.eval(rho) + model.mu.eval(rho)) / rho - zeta_ref)
                * ps.grad_div_u[j][i];
            // pressure gradient remainders
            let pp = (model.p0.deriv(rho) + t_true * model.p1.deriv(rho)) / rho;
            acc -= (pp - pp_ref) * ps.w[j][i];
            acc -= (model.p1.eval(rho) / (rho * a_psi) - p1_ref) * ps.grad_temp[j][i];
            // viscosity gradients
            acc += model.lambda.deriv(rho) * ps.div_u[i] * ps.w[j][i] / rho;
            for a in 0..d {
                acc += (ps.grad_u[a][j][i] + ps.grad_u[j][a][i])
                    * model.mu.deriv(rho)
                    * ps.w[a][i]
                    / rho;
            }
            gp[i] = acc;
        }
    }
    let mut g_fields: Vec<SpectralField> =
        g_point.iter().map(|buf| finish(grid, buf, dealias)).collect();

    // Gradient-form capillary terms.
    let mut s_cap = vec![0.0; n];
    let mut s_kp = vec![0.0; n];
    for i in 0..n {
        let rho = ps.rho[i];
        let w2: f64 = (0..d).map(|a| ps.w[a][i] * ps.w[a][i]).sum();
        s_cap[i] = (model.kappa.eval(rho) - kappa_ref) * ps.lap_rho[i];
        s_kp[i] = 0.5 * model.kappa.deriv(rho) * w2;
    }
    let s_cap_field = finish(grid, &s_cap, dealias);
    let s_kp_field = finish(grid, &s_kp, dealias);
    for (j, g) in g_fields.iter_mut().enumerate() {
        g.add_assign(&s_cap_field.derivative(j));
        g.add_assign(&s_kp_field.derivative(j));
    }

    // H, entirely pointwise.
    let mut h_point = vec![0.0; n];
    for i in 0..n {
        let rho = ps.rho[i];
        let t_true = (model.theta_bar + ps.temp[i]) / a_psi;
        let mut acc = 0.0;
        // heat conduction remainder: div(chi(rho) grad theta)/rho - (chi_bar/rho_bar) lap theta
        let mut wdott = 0.0;
        for a in 0..d {
            wdott += ps.w[a][i] * ps.grad_temp[a][i];
        }
        acc += (model.chi.eval(rho) * ps.lap_temp[i] + model.chi.deriv(rho) * wdott) / rho
            - chi_ref * ps.lap_temp[i];
        // pressure-work remainder
        acc += (tb * model.p1.eval(rb) / rb - t_true * model.p1.eval(rho) / rho) * ps.div_u[i];
        // advection
        for a in 0..d {
            acc -= ps.u[a][i] * ps.grad_temp[a][i];
        }
        // viscous heating D : grad u
        let mut heat = model.lambda.eval(rho) * ps.div_u[i] * ps.div_u[i];
        for a in 0..d {
            for j in 0..d {
                heat += model.mu.eval(rho)
                    * (ps.grad_u[a][j][i] + ps.grad_u[j][a][i])
                    * ps.grad_u[a][j][i];
            }
        }
        acc += heat / rho;
        h_point[i] = acc;
    }
    let h_field = finish(grid, &h_point, dealias);

    Ok((f_field, g_fields, h_field))
}

/// Capillary force in reduced form,
/// `rho grad(kappa lap rho) + (rho/2) grad(kappa' |grad rho|^2)`,
/// evaluated pseudospectrally with dealiasing.
pub fn korteweg_force(rho: &SpectralField, model: &EquilibriumModel, dealias: bool) -> Result<Vec<SpectralField>> {
    let grid = *rho.grid();
    let d = grid.dim();
    let rho_pad = rho.padded_real();
    if rho_pad.iter().any(|&v| v <= 0.0) {
        return Err(Error::Domain("density must be positive pointwise".into()));
    }
    let w: Vec<Vec<f64>> = (0..d).map(|a| rho.derivative(a).padded_real()).collect();
    let lap = rho.laplacian().padded_real();
    let n = rho_pad.len();

    let mut s1 = vec![0.0; n];
    let mut s2 = vec![0.0; n];
    for i in 0..n {
        let r = rho_pad[i];
        let w2: f64 = (0..d).map(|a| w[a][i] * w[a][i]).sum();
        s1[i] = model.kappa.eval(r) * lap[i];
        s2[i] = model.kappa.deriv(r) * w2;
    }
    let s1_field = finish(grid, &s1, dealias);
    let s2_field = finish(grid, &s2, dealias);

    (0..d)
        .map(|j| {
            let g1 = s1_field.derivative(j).padded_real();
            let g2 = s2_field.derivative(j).padded_real();
            let combined: Vec<f64> = (0..n)
                .map(|i| rho_pad[i] * g1[i] + 0.5 * rho_pad[i] * g2[i])
                .collect();
            Ok(finish(grid, &combined, dealias))
        })
        .collect()
}

/// The same force from the stress-tensor form
/// `div K + (1/2) grad(K_p |w|^2)` with `K = (rho div phi) I - phi w^T`,
/// `phi = kappa w` and `K_p = kappa - rho kappa'`. Independent route used to
/// check the reduced form.
pub fn korteweg_force_tensor(
    rho: &SpectralField,
    model: &EquilibriumModel,
    dealias: bool,
) -> Result<Vec<SpectralField>> {
    let grid = *rho.grid();
    let d = grid.dim();
    let rho_pad = rho.padded_real();
    if rho_pad.iter().any(|&v| v <= 0.0) {
        return Err(Error::Domain("density must be positive pointwise".into()));
    }
    let w: Vec<Vec<f64>> = (0..d).map(|a| rho.derivative(a).padded_real()).collect();
    let n = rho_pad.len();

    // phi = kappa(rho) w
    let phi: Vec<Vec<f64>> = (0..d)
        .map(|a| (0..n).map(|i| model.kappa.eval(rho_pad[i]) * w[a][i]).collect())
        .collect();
    let phi_fields: Vec<SpectralField> = phi.iter().map(|buf| finish(grid, buf, dealias)).collect();
    let div_phi = SpectralField::divergence(&phi_fields)?.padded_real();

    // rho div phi and K_p |w|^2
    let mut trace_part = vec![0.0; n];
    let mut kp_part = vec![0.0; n];
    for i in 0..n {
        let r = rho_pad[i];
        let w2: f64 = (0..d).map(|a| w[a][i] * w[a][i]).sum();
        trace_part[i] = r * div_phi[i];
        kp_part[i] = (model.kappa.eval(r) - r * model.kappa.deriv(r)) * w2;
    }
    let trace_field = finish(grid, &trace_part, dealias);
    let kp_field = finish(grid, &kp_part, dealias);

    (0..d)
        .map(|j| {
            // (div K)_j = d_j (rho div phi) - d_i (phi_i w_j)
            let mut out = trace_field.derivative(j);
            for i_ax in 0..d {
                let prod: Vec<f64> =
                    (0..n).map(|i| phi[i_ax][i] * w[j][i]).collect();
                let prod_field = finish(grid, &prod, dealias);
                out = out.sub(&prod_field.derivative(i_ax))?;
            }
            out.add_assign(&kp_field.derivative(j).scale(0.5));
            Ok(out)
        })
        .collect()
}

/// Total energy `int (1/2) rho |u|^2 + rho theta + (Pi(rho) - Pi(rho_bar)) +
/// (kappa/2) |grad rho|^2`, by grid quadrature (kappa evaluated pointwise;
/// it reduces to the constant in the balance setting).
pub fn energy_total(state: &FlowState, model: &EquilibriumModel) -> Result<f64> {
    let (mech, thermal) = energy_parts(state, model)?;
    Ok(mech + thermal)
}

/// The mechanical part `int (1/2) rho |u|^2 + (Pi - Pi_bar) + (kappa/2)|grad
/// rho|^2`: the quantity that decays at exactly the dissipation rate along
/// smooth flows (the thermal part `int rho theta` absorbs what dissipates).
pub fn energy_mechanical(state: &FlowState, model: &EquilibriumModel) -> Result<f64> {
    Ok(energy_parts(state, model)?.0)
}

fn energy_parts(state: &FlowState, model: &EquilibriumModel) -> Result<(f64, f64)> {
    let grid = *state.grid();
    let d = grid.dim();
    let q = state.q.to_real();
    let u: Vec<Vec<f64>> = (0..d).map(|a| state.velocity_full(a).to_real()).collect();
    let temp = state.temp_full().to_real();
    let w: Vec<Vec<f64>> =
        (0..d).map(|a| state.q.derivative(a).scale(model.rho_bar).to_real()).collect();
    let pi_bar = pressure_potential(model.rho_bar, model)?;
    let cell = grid.volume() / grid.total_points() as f64;
    let mut mech = 0.0;
    let mut thermal = 0.0;
    for i in 0..q.len() {
        let rho = model.rho_bar * (1.0 + q[i]);
        if rho <= 0.0 {
            return Err(Error::Domain(format!("density nonpositive in energy quadrature ({rho})")));
        }
        let u2: f64 = (0..d).map(|a| u[a][i] * u[a][i]).sum();
        let w2: f64 = (0..d).map(|a| w[a][i] * w[a][i]).sum();
        mech += 0.5 * rho * u2;
        mech += pressure_potential(rho, model)? - pi_bar;
        mech += 0.5 * model.kappa.eval(rho) * w2;
        thermal += rho * (model.theta_bar + temp[i]);
    }
    Ok((mech * cell, thermal * cell))
}

/// Viscous dissipation functional `int 2 mu D(u):D(u) + (lambda + mu)
/// |div u|^2` with `D(u) = (du + grad u)/2`, coefficients at the local
/// density.
pub fn dissipation(state: &FlowState, model: &EquilibriumModel) -> Result<f64> {
    let grid = *state.grid();
    let d = grid.dim();
    let q = state.q.to_real();
    let u_fields: Vec<SpectralField> = (0..d).map(|a| state.velocity_full(a)).collect();
    let grad_u: Vec<Vec<Vec<f64>>> = (0..d)
        .map(|a| u_fields.iter().map(|f| f.derivative(a).to_real()).collect())
        .collect();
    let cell = grid.volume() / grid.total_points() as f64;
    let mut total = 0.0;
    for i in 0..q.len() {
        let rho = model.rho_bar * (1.0 + q[i]);
        let mu = model.mu.eval(rho);
        let lambda = model.lambda.eval(rho);
        if lambda + 2.0 * mu <= 0.0 {
            return Err(Error::Domain(format!(
                "lambda + 2 mu must stay positive (got {} at rho = {rho})",
                lambda + 2.0 * mu
            )));
        }
        let mut div = 0.0;
        for a in 0..d {
            div += grad_u[a][a][i];
        }
        let mut dd = 0.0;
        for a in 0..d {
            for j in 0..d {
                let sym = 0.5 * (grad_u[a][j][i] + grad_u[j][a][i]);
                dd += sym * sym;
            }
        }
        total += 2.0 * mu * dd + (lambda + mu) * div * div;
    }
    Ok(total * cell)
}
