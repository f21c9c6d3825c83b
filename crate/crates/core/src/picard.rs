//! Frozen-coefficient Picard iteration for the nonlinear system, built
//! around a heat-flow lift of the initial data, plus the heat-smoothing
//! inequality harness.
//!
//! Each iterate solves a linear system whose variable coefficients
//! `a = mu(rho)/rho`, `b = (lambda+mu)(rho)/rho`, `c = rho_bar kappa(rho)`,
//! `d = chi(rho)/rho` are frozen along the previous iterate's trajectory.
//! The constant-coefficient part at the equilibrium values is integrated
//! exactly per mode; coefficient deviations and all lower-order terms are
//! explicit (first-order IMEX). The fixed point of the map is the exact
//! perturbation system.

use crate::besov::{
    besov_norm, chemin_lerner_norm, HybridIndex, TimeExponent, TimeSeries,
};
use crate::dyadic::DyadicDecomposition;
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::GridSpec;
use crate::helmholtz::{helmholtz_reassemble, lambda_inv_curl, lambda_inv_div, AntisymmetricMatrix};
use crate::linear::{heat_propagator, mode_propagator, LinearCoeffs, ModePropagator};
use crate::physics::{EquilibriumModel, FlowState};
use crate::solver::{DiagnosticsConfig, SnapshotDiagnostics, Trajectory};
use nalgebra::Vector3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Exact heat flow `exp(t Delta)` (unit diffusivity) applied to every
/// component; means are untouched.
pub fn heat_lift(initial: &FlowState, t: f64) -> FlowState {
    let grid = *initial.grid();
    let k0sq = grid.k_fundamental().powi(2);
    let decay = |f: &SpectralField| -> SpectralField {
        f.multiplier(|k| {
            let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
            (-k2 * k0sq * t).exp()
        })
    };
    let q = decay(initial.q());
    let mut velocity: Vec<SpectralField> =
        initial.velocity().iter().map(|c| decay(c)).collect();
    for (a, c) in velocity.iter_mut().enumerate() {
        c.set_mean(initial.u_mean()[a]);
    }
    let mut temp = decay(initial.temp());
    temp.set_mean(initial.temp_mean());
    FlowState::new(q, velocity, temp).expect("components share the grid")
}

/// Padded pointwise samples of one full state, with the derivative fields
/// the Picard forcings need.
struct PointwiseState {
    rho: Vec<f64>,
    q: Vec<f64>,
    u: Vec<Vec<f64>>,
    grad_u: Vec<Vec<Vec<f64>>>,
    div_u: Vec<f64>,
    w: Vec<Vec<f64>>,
    temp: Vec<f64>,
    grad_temp: Vec<Vec<f64>>,
    lap_temp: Vec<f64>,
}

impl PointwiseState {
    fn build(state: &FlowState, model: &EquilibriumModel) -> Self {
        let d = state.grid().dim();
        let q = state.q().padded_real();
        let rho: Vec<f64> = q.iter().map(|&v| model.rho_bar * (1.0 + v)).collect();
        let u_fields: Vec<SpectralField> = (0..d).map(|a| state.velocity_full(a)).collect();
        let u: Vec<Vec<f64>> = u_fields.iter().map(|f| f.padded_real()).collect();
        let grad_u: Vec<Vec<Vec<f64>>> = (0..d)
            .map(|a| u_fields.iter().map(|f| f.derivative(a).padded_real()).collect())
            .collect();
        let div_u = SpectralField::divergence(&u_fields).expect("checked").padded_real();
        let w: Vec<Vec<f64>> =
            (0..d).map(|a| state.q().derivative(a).scale(model.rho_bar).padded_real()).collect();
        let temp_field = state.temp_full();
        let temp = temp_field.padded_real();
        let grad_temp: Vec<Vec<f64>> =
            (0..d).map(|a| temp_field.derivative(a).padded_real()).collect();
        let lap_temp = temp_field.laplacian().padded_real();
        Self { rho, q, u, grad_u, div_u, w, temp, grad_temp, lap_temp }
    }

    fn len(&self) -> usize {
        self.rho.len()
    }
}

fn to_field(grid: GridSpec, buf: &[f64], dealias: bool) -> SpectralField {
    let mut f = SpectralField::from_padded_real(grid, buf);
    if dealias {
        f.dealias_two_thirds();
    }
    f
}

/// `sum_i d_i(coeff * d_i f)` with a padded pointwise coefficient.
fn div_coeff_grad(grid: GridSpec, coeff: &[f64], f: &SpectralField, dealias: bool) -> SpectralField {
    let mut out = SpectralField::zero(grid);
    for axis in 0..grid.dim() {
        let g = f.derivative(axis).padded_real();
        let prod: Vec<f64> = coeff.iter().zip(&g).map(|(c, v)| c * v).collect();
        out.add_assign(&to_field(grid, &prod, dealias).derivative(axis));
    }
    out
}

/// `grad(coeff * scalar)` with padded pointwise inputs.
fn grad_of_product(
    grid: GridSpec,
    coeff: &[f64],
    scalar: &[f64],
    dealias: bool,
) -> Vec<SpectralField> {
    let prod: Vec<f64> = coeff.iter().zip(scalar).map(|(c, v)| c * v).collect();
    let f = to_field(grid, &prod, dealias);
    (0..grid.dim()).map(|a| f.derivative(a)).collect()
}

/// The frozen coefficient fields of one iterate state.
struct FrozenCoeffs {
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    d: Vec<f64>,
}

impl FrozenCoeffs {
    fn build(ps: &PointwiseState, model: &EquilibriumModel) -> Self {
        let n = ps.len();
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        for i in 0..n {
            let rho = ps.rho[i];
            a[i] = model.mu.eval(rho) / rho;
            b[i] = (model.lambda.eval(rho) + model.mu.eval(rho)) / rho;
            c[i] = model.rho_bar * model.kappa.eval(rho);
            d[i] = model.chi.eval(rho) / rho;
        }
        Self { a, b, c, d }
    }
}

/// `F = -div(q u)` of a full state.
fn mass_forcing(grid: GridSpec, ps: &PointwiseState, dealias: bool) -> SpectralField {
    let mut out = SpectralField::zero(grid);
    for axis in 0..grid.dim() {
        let prod: Vec<f64> = ps.q.iter().zip(&ps.u[axis]).map(|(q, u)| q * u).collect();
        out.add_assign(&to_field(grid, &prod, dealias).derivative(axis));
    }
    out.scale(-1.0)
}

/// Momentum remainder `G_rem` relative to the variable-coefficient operator:
/// everything in the momentum equation except
/// `div(a grad u) + grad(b div u) + grad(c lap q)`.
fn momentum_remainder(
    grid: GridSpec,
    ps: &PointwiseState,
    fr: &FrozenCoeffs,
    model: &EquilibriumModel,
    dealias: bool,
) -> Vec<SpectralField> {
    let d = grid.dim();
    let n = ps.len();

    // pressure: grad(P0(rho) + T P1(rho)) / rho
    let mut pressure = vec![0.0; n];
    for i in 0..n {
        let t_true = (model.theta_bar + ps.temp[i]) / model.a_psi;
        pressure[i] = model.p0.eval(ps.rho[i]) + t_true * model.p1.eval(ps.rho[i]);
    }
    let pressure_field = to_field(grid, &pressure, dealias);

    // lambda(rho) div u and the viscous tensor mu(rho)(d_i u_j + d_j u_i)
    let mut s_lambda = vec![0.0; n];
    for i in 0..n {
        s_lambda[i] = model.lambda.eval(ps.rho[i]) * ps.div_u[i];
    }
    let s_lambda_field = to_field(grid, &s_lambda, dealias);
    let mut visc_rows: Vec<SpectralField> = Vec::with_capacity(d);
    for j in 0..d {
        let mut row = SpectralField::zero(grid);
        for i_ax in 0..d {
            let mut m = vec![0.0; n];
            for i in 0..n {
                m[i] = model.mu.eval(ps.rho[i]) * (ps.grad_u[i_ax][j][i] + ps.grad_u[j][i_ax][i]);
            }
            row.add_assign(&to_field(grid, &m, dealias).derivative(i_ax));
        }
        visc_rows.push(row);
    }

    // capillary gradient-square term
    let mut kp = vec![0.0; n];
    for i in 0..n {
        let w2: f64 = (0..d).map(|a| ps.w[a][i] * ps.w[a][i]).sum();
        kp[i] = 0.5 * model.kappa.deriv(ps.rho[i]) * w2;
    }
    let kp_field = to_field(grid, &kp, dealias);

    let u_fields: Vec<SpectralField> = (0..d)
        .map(|j| {
            // reconstruct u_j spectrally for the operator difference
            to_field(grid, &ps.u[j], false)
        })
        .collect();

    (0..d)
        .map(|j| {
            // div D / rho
            let div_d_j = visc_rows[j].add(&s_lambda_field.derivative(j)).expect("same grid");
            let div_d_pad = div_d_j.padded_real();
            let mut point = vec![0.0; n];
            for i in 0..n {
                let mut acc = div_d_pad[i] / ps.rho[i];
                // advection
                for a in 0..d {
                    acc -= ps.u[a][i] * ps.grad_u[a][j][i];
                }
                point[i] = acc;
            }
            let mut out = to_field(grid, &point, dealias);
            // - grad(P)/rho
            let gp = pressure_field.derivative(j).padded_real();
            let over_rho: Vec<f64> = (0..n).map(|i| -gp[i] / ps.rho[i]).collect();
            out.add_assign(&to_field(grid, &over_rho, dealias));
            // + grad(kappa' |w|^2 / 2)
            out.add_assign(&kp_field.derivative(j));
            // - div(a grad u_j) - grad(b div u)_j (subtract the
            // variable-coefficient operator; its constant part is applied
            // implicitly and its deviation is re-added by the caller)
            out = out
                .sub(&div_coeff_grad(grid, &fr.a, &u_fields[j], dealias))
                .expect("same grid");
            let div_u_field = to_field(grid, &ps.div_u, false);
            let gb = grad_of_product(grid, &fr.b, &div_u_field.padded_real(), dealias);
            out = out.sub(&gb[j]).expect("same grid");
            out
        })
        .collect()
}

/// Temperature remainder `H_rem` relative to `div(d grad T)`.
fn temperature_remainder(
    grid: GridSpec,
    ps: &PointwiseState,
    fr: &FrozenCoeffs,
    model: &EquilibriumModel,
    dealias: bool,
) -> SpectralField {
    let d = grid.dim();
    let n = ps.len();
    let mut point = vec![0.0; n];
    for i in 0..n {
        let rho = ps.rho[i];
        let t_true = (model.theta_bar + ps.temp[i]) / model.a_psi;
        let mut acc = 0.0;
        // div(chi grad theta)/rho by the chain rule
        let mut wdott = 0.0;
        for a in 0..d {
            wdott += ps.w[a][i] * ps.grad_temp[a][i];
        }
        acc += (model.chi.eval(rho) * ps.lap_temp[i] + model.chi.deriv(rho) * wdott) / rho;
        // pressure work
        acc -= t_true * model.p1.eval(rho) / rho * ps.div_u[i];
        // advection
        for a in 0..d {
            acc -= ps.u[a][i] * ps.grad_temp[a][i];
        }
        // viscous heating
        let mut heat = model.lambda.eval(rho) * ps.div_u[i] * ps.div_u[i];
        for a in 0..d {
            for j in 0..d {
                heat += model.mu.eval(rho)
                    * (ps.grad_u[a][j][i] + ps.grad_u[j][a][i])
                    * ps.grad_u[a][j][i];
            }
        }
        acc += heat / rho;
        point[i] = acc;
    }
    let mut out = to_field(grid, &point, dealias);
    // subtract div(d grad T)
    let temp_field = to_field(grid, &ps.temp, false);
    out = out.sub(&div_coeff_grad(grid, &fr.d, &temp_field, dealias)).expect("same grid");
    out
}

/// Internal bar-state (the correction on top of the heat lift).
struct BarVars {
    q: Vec<Complex64>,
    d: Vec<Complex64>,
    temp: Vec<Complex64>,
    omega: Vec<Vec<Complex64>>,
    u_mean: [f64; 3],
    temp_mean: f64,
    q_mean: f64,
}

impl BarVars {
    fn zero(grid: GridSpec) -> Self {
        let n = grid.total_points();
        let slots = grid.dim() * (grid.dim() - 1) / 2;
        Self {
            q: vec![Complex64::ZERO; n],
            d: vec![Complex64::ZERO; n],
            temp: vec![Complex64::ZERO; n],
            omega: vec![vec![Complex64::ZERO; n]; slots],
            u_mean: [0.0; 3],
            temp_mean: 0.0,
            q_mean: 0.0,
        }
    }

    fn assemble(&self, grid: GridSpec) -> FlowState {
        let mut q = SpectralField::zero(grid);
        q.coeffs_mut().copy_from_slice(&self.q);
        q.set_mean(self.q_mean);
        let mut d = SpectralField::zero(grid);
        d.coeffs_mut().copy_from_slice(&self.d);
        let mut temp = SpectralField::zero(grid);
        temp.coeffs_mut().copy_from_slice(&self.temp);
        temp.set_mean(self.temp_mean);
        let mut omega = AntisymmetricMatrix::zero(grid);
        for (slot, data) in self.omega.iter().enumerate() {
            omega.entries_upper_mut()[slot].coeffs_mut().copy_from_slice(data);
        }
        let mut velocity = helmholtz_reassemble(&d, &omega);
        for (a, c) in velocity.iter_mut().enumerate() {
            c.set_mean(self.u_mean[a]);
        }
        FlowState::new(q, velocity, temp).expect("components share the grid")
    }
}

fn add_states(a: &FlowState, b: &FlowState) -> Result<FlowState> {
    let grid = *a.grid();
    let q = a.q().add(b.q())?;
    let mut velocity = Vec::with_capacity(grid.dim());
    for i in 0..grid.dim() {
        let mut c = a.velocity()[i].add(&b.velocity()[i])?;
        c.set_mean(a.u_mean()[i] + b.u_mean()[i]);
        velocity.push(c);
    }
    let mut temp = a.temp().add(b.temp())?;
    temp.set_mean(a.temp_mean() + b.temp_mean());
    FlowState::new(q, velocity, temp)
}

/// Run the frozen-coefficient iteration on `[0, t_end]` with inner step
/// `dt`. Returns the iterate trajectories, index 0 being the heat lift.
pub fn picard_iterate(
    initial: &FlowState,
    model: &EquilibriumModel,
    t_end: f64,
    n_iters: usize,
    dt: f64,
) -> Result<Vec<Trajectory>> {
    model.validate()?;
    if !(t_end > 0.0 && dt > 0.0) {
        return Err(Error::InvalidArgument("t_end and dt must be positive".into()));
    }
    let steps = (t_end / dt).round() as usize;
    if steps == 0 || ((steps as f64) * dt - t_end).abs() > 1e-9 * t_end {
        return Err(Error::InvalidArgument(format!(
            "t_end = {t_end} is not an integer multiple of dt = {dt}"
        )));
    }
    let grid = *initial.grid();
    let dealias = true;
    let positivity_floor = 1e-8;
    let lc = LinearCoeffs::from_equilibrium(model)?;
    // Constant-coefficient implicit part: pressure and coupling terms are
    // explicit here, so beta = gamma = delta = 0 and the temperature row
    // decouples into a heat equation with rate alpha.
    let lc_pic = LinearCoeffs::new(lc.mu_tilde, lc.lambda_tilde, lc.eps, lc.alpha, 0.0, 0.0, 0.0);

    let k0 = grid.k_fundamental();
    let mut coupled: HashMap<i64, ModePropagator> = HashMap::new();
    let mut heat: HashMap<i64, (f64, f64, f64)> = HashMap::new();
    for flat in 1..grid.total_points() {
        let k2 = grid.k2_int(flat);
        coupled.entry(k2).or_insert_with(|| {
            mode_propagator(&lc_pic, k0 * (k2 as f64).sqrt(), dt).expect("xi, dt > 0")
        });
        heat.entry(k2)
            .or_insert_with(|| heat_propagator(lc.mu_tilde, k0 * (k2 as f64).sqrt(), dt));
    }

    let times: Vec<f64> = (0..=steps).map(|m| m as f64 * dt).collect();
    let lift: Vec<FlowState> = times.iter().map(|&t| heat_lift(initial, t)).collect();
    for (m, state) in lift.iter().enumerate() {
        let min_rho = state.min_density_ratio();
        if min_rho <= positivity_floor {
            return Err(Error::PicardDensityFloor { iterate: 0, step: m });
        }
    }

    let mut iterates: Vec<Vec<FlowState>> = vec![lift.clone()];
    for n in 0..n_iters {
        let prev = &iterates[n];
        let mut bar = BarVars::zero(grid);
        let mut states = vec![prev[0].clone()];
        // iterate n+1 always starts from the shared initial data
        states[0] = add_states(&lift[0], &bar.assemble(grid))?;
        for m in 0..steps {
            let frozen_state = &prev[m];
            let ps = PointwiseState::build(frozen_state, model);
            let fr = FrozenCoeffs::build(&ps, model);
            let bar_state = bar.assemble(grid);

            // forcing: full-system terms at the frozen state ...
            let mut e_f = mass_forcing(grid, &ps, dealias);
            let mut e_g = momentum_remainder(grid, &ps, &fr, model, dealias);
            let mut e_h = temperature_remainder(grid, &ps, &fr, model, dealias);

            // ... minus the heat-lift residuals ...
            let l = &lift[m];
            e_f = e_f.sub(&l.q().laplacian())?;
            let lift_u: Vec<SpectralField> = (0..grid.dim()).map(|a| l.velocity_full(a)).collect();
            e_f = e_f.sub(&SpectralField::divergence(&lift_u)?)?;
            let lift_div_u = SpectralField::divergence(&lift_u)?.padded_real();
            let lift_temp = l.temp_full();
            let lift_lap_q = l.q().laplacian();
            for (j, g) in e_g.iter_mut().enumerate() {
                *g = g.sub(&lift_u[j].laplacian())?;
                g.add_assign(&div_coeff_grad(grid, &fr.a, &lift_u[j], dealias));
                let gb = grad_of_product(grid, &fr.b, &lift_div_u, dealias);
                g.add_assign(&gb[j]);
                let gc = grad_of_product(grid, &fr.c, &lift_lap_q.padded_real(), dealias);
                g.add_assign(&gc[j]);
            }
            e_h = e_h.sub(&lift_temp.laplacian())?;
            e_h.add_assign(&div_coeff_grad(grid, &fr.d, &lift_temp, dealias));

            // ... plus the coefficient deviations acting on the current
            // unknown (explicit IMEX part).
            let bar_u: Vec<SpectralField> =
                (0..grid.dim()).map(|a| bar_state.velocity_full(a)).collect();
            let bar_div_u = SpectralField::divergence(&bar_u)?;
            let a_dev: Vec<f64> = fr.a.iter().map(|v| v - lc.mu_tilde).collect();
            let b_dev: Vec<f64> =
                fr.b.iter().map(|v| v - (lc.mu_tilde + lc.lambda_tilde)).collect();
            let c_dev: Vec<f64> = fr.c.iter().map(|v| v - lc.eps).collect();
            let d_dev: Vec<f64> = fr.d.iter().map(|v| v - lc.alpha).collect();
            for (j, g) in e_g.iter_mut().enumerate() {
                g.add_assign(&div_coeff_grad(grid, &a_dev, &bar_u[j], dealias));
                let gb = grad_of_product(grid, &b_dev, &bar_div_u.padded_real(), dealias);
                g.add_assign(&gb[j]);
                let gc =
                    grad_of_product(grid, &c_dev, &bar_state.q().laplacian().padded_real(), dealias);
                g.add_assign(&gc[j]);
            }
            e_h.add_assign(&div_coeff_grad(grid, &d_dev, &bar_state.temp_full(), dealias));

            // transform the forcing into the internal variables
            let g_d = lambda_inv_div(&e_g)?;
            let g_omega = lambda_inv_curl(&e_g)?;
            let g_mean: Vec<f64> = e_g.iter().map(|f| f.mean()).collect();

            // advance the bar state (first order)
            let mut next = BarVars::zero(grid);
            next.q_mean = bar.q_mean + dt * e_f.mean();
            next.temp_mean = bar.temp_mean + dt * e_h.mean();
            next.u_mean = bar.u_mean;
            for a in 0..grid.dim() {
                next.u_mean[a] += dt * g_mean[a];
            }
            for flat in 1..grid.total_points() {
                let k2 = grid.k2_int(flat);
                let prop = &coupled[&k2];
                let state = Vector3::new(bar.q[flat], bar.d[flat], bar.temp[flat]);
                let f = Vector3::new(
                    e_f.coeffs()[flat],
                    g_d.coeffs()[flat],
                    e_h.coeffs()[flat],
                );
                let v = prop.apply(state, f, None);
                next.q[flat] = v[0];
                next.d[flat] = v[1];
                next.temp[flat] = v[2];
                let (w, p1, _) = heat[&k2];
                for (slot, data) in bar.omega.iter().enumerate() {
                    next.omega[slot][flat] =
                        w * data[flat] + p1 * g_omega.entries_upper()[slot].coeffs()[flat];
                }
            }
            bar = next;
            let full = add_states(&lift[m + 1], &bar.assemble(grid))?;
            let min_rho = full.min_density_ratio();
            if min_rho <= positivity_floor {
                return Err(Error::PicardDensityFloor { iterate: n + 1, step: m + 1 });
            }
            states.push(full);
        }
        iterates.push(states);
    }

    // package with diagnostics
    let dec = DyadicDecomposition::new(grid);
    let diag_cfg = DiagnosticsConfig::default();
    iterates
        .into_iter()
        .map(|states| {
            let diagnostics = times
                .iter()
                .zip(&states)
                .map(|(&t, s)| trajectory_snapshot(t, s, model, &dec, &diag_cfg))
                .collect::<Result<Vec<_>>>()?;
            Ok(Trajectory { times: times.clone(), states, diagnostics })
        })
        .collect()
}

fn trajectory_snapshot(
    t: f64,
    state: &FlowState,
    model: &EquilibriumModel,
    dec: &DyadicDecomposition,
    diag: &DiagnosticsConfig,
) -> Result<SnapshotDiagnostics> {
    let norms = diag
        .norms
        .iter()
        .map(|idx| crate::besov::hybrid_norm(state.q(), *idx, dec))
        .collect::<Result<Vec<f64>>>()?;
    Ok(SnapshotDiagnostics {
        t,
        energy: crate::physics::energy_total(state, model)?,
        energy_mechanical: crate::physics::energy_mechanical(state, model)?,
        dissipation: crate::physics::dissipation(state, model)?,
        norms,
        q_block_amplitudes: dec.block_norms(state.q())?,
    })
}

/// Norm of the local-existence working space: for a run in dimension `N`,
/// `q` is measured in `L~^inf(B^{N/2}) + L^1(B^{N/2+2})`, the velocity in
/// `L~^inf(B^{N/2-1}) + L^1(B^{N/2+1})` and the temperature in
/// `L~^inf(B^{N/2-2}) + L^1(B^{N/2})` (component means excluded).
pub fn f_t_norm_of_difference(
    a: &Trajectory,
    b: &Trajectory,
    dec: &DyadicDecomposition,
) -> Result<f64> {
    if a.times != b.times {
        return Err(Error::InvalidArgument("trajectories sample different times".into()));
    }
    let grid = *a.states[0].grid();
    let half_n = grid.dim() as f64 / 2.0;
    let diff_series = |extract: &dyn Fn(&FlowState) -> SpectralField| -> Result<TimeSeries> {
        let states: Vec<SpectralField> = a
            .states
            .iter()
            .zip(&b.states)
            .map(|(x, y)| extract(x).sub(&extract(y)))
            .collect::<Result<_>>()?;
        TimeSeries::new(a.times.clone(), states)
    };
    let pair_norm = |series: &TimeSeries, s_inf: f64, s_one: f64| -> Result<f64> {
        let ninf = chemin_lerner_norm(
            series,
            TimeExponent::Infinity,
            HybridIndex::uniform(s_inf),
            dec,
        )?;
        let none =
            chemin_lerner_norm(series, TimeExponent::Finite(1.0), HybridIndex::uniform(s_one), dec)?;
        Ok(ninf + none)
    };
    let mut total = 0.0;
    let q_series = diff_series(&|s| s.q().clone())?;
    total += pair_norm(&q_series, half_n, half_n + 2.0)?;
    for comp in 0..grid.dim() {
        let u_series = diff_series(&move |s: &FlowState| s.velocity()[comp].clone())?;
        total += pair_norm(&u_series, half_n - 1.0, half_n + 1.0)?;
    }
    let t_series = diff_series(&|s| s.temp().clone())?;
    total += pair_norm(&t_series, half_n - 2.0, half_n)?;
    Ok(total)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeatSmoothingReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// Smoothing estimate of the heat flow with zero forcing: evolve
/// `u' = mu lap u` exactly, measure
/// `||u||_{L~^rho1_T(B^{s + 2/rho1})} / ||u0||_{B^s}` and report the ratio.
pub fn heat_smoothing_check(
    u0: &SpectralField,
    mu: f64,
    t_end: f64,
    rho1: f64,
    rho2: f64,
    s: f64,
) -> Result<HeatSmoothingReport> {
    if !(mu > 0.0 && t_end > 0.0) {
        return Err(Error::InvalidArgument("mu and T must be positive".into()));
    }
    if !(1.0 <= rho2 && rho2 <= rho1) {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= rho2 <= rho1, got rho1 = {rho1}, rho2 = {rho2}"
        )));
    }
    let grid = *u0.grid();
    let dec = DyadicDecomposition::new(grid);
    let k0sq = grid.k_fundamental().powi(2);
    let samples = 129;
    let times: Vec<f64> = (0..samples).map(|i| t_end * i as f64 / (samples - 1) as f64).collect();
    let states: Vec<SpectralField> = times
        .iter()
        .map(|&t| {
            u0.multiplier(|k| {
                let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
                (-mu * k2 * k0sq * t).exp()
            })
        })
        .collect();
    let traj = TimeSeries::new(times, states)?;
    let exponent =
        if rho1.is_infinite() { TimeExponent::Infinity } else { TimeExponent::new(rho1)? };
    let index = s + if rho1.is_infinite() { 0.0 } else { 2.0 / rho1 };
    let lhs = chemin_lerner_norm(&traj, exponent, HybridIndex::uniform(index), &dec)?;
    let rhs = besov_norm(u0, s, &dec)?;
    let ratio = if rhs == 0.0 { 0.0 } else { lhs / rhs };
    Ok(HeatSmoothingReport { lhs, rhs, ratio })
}
