//! Time integration of the nonlinear perturbation system.
//!
//! The linear part is applied exactly per Fourier mode: the `(q, d, T)`
//! triple through the coupled semigroup and the incompressible part through
//! the heat factor `exp(-mu_tilde |xi|^2 dt)`. The quadratic terms enter
//! through the Duhamel integral, quadrature ETD1 (constant forcing) or ETD2
//! (predictor/corrector, linear-in-time forcing). Component means are the
//! `xi = 0` modes and advance by plain quadrature of the mean forcing.

use crate::besov::{hybrid_norm, HybridIndex, TimeSeries};
use crate::dyadic::DyadicDecomposition;
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::GridSpec;
use crate::helmholtz::{helmholtz_split, lambda_inv_curl, AntisymmetricMatrix};
use crate::linear::{
    classify_stability, heat_propagator, mode_propagator, EtdOrder, LinearCoeffs, ModePropagator,
};
use crate::physics::{
    dissipation, energy_mechanical, energy_total, nonlinear_terms, EquilibriumModel, FlowState,
};
use nalgebra::Vector3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    pub order: EtdOrder,
    pub snapshot_every: usize,
    pub dealias: bool,
    pub positivity_floor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 1.0,
            order: EtdOrder::Two,
            snapshot_every: 10,
            dealias: true,
            positivity_floor: 1e-8,
        }
    }
}

impl SolverConfig {
    /// Number of steps; `t_end` must be an integer multiple of `dt` and the
    /// snapshot cadence must divide the step count.
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {}", self.dt)));
        }
        if self.t_end < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "t_end must be nonnegative, got {}",
                self.t_end
            )));
        }
        if self.t_end == 0.0 {
            return Ok(0);
        }
        if self.dt >= self.t_end + 1e-12 {
            return Err(Error::InvalidArgument("dt must be smaller than t_end".into()));
        }
        let steps = (self.t_end / self.dt).round();
        if (steps * self.dt - self.t_end).abs() > 1e-9 * self.t_end {
            return Err(Error::InvalidArgument(format!(
                "t_end = {} is not an integer multiple of dt = {}",
                self.t_end, self.dt
            )));
        }
        let steps = steps as usize;
        if self.snapshot_every == 0 || steps % self.snapshot_every != 0 {
            return Err(Error::InvalidArgument(format!(
                "snapshot_every = {} does not divide the step count {steps}",
                self.snapshot_every
            )));
        }
        Ok(steps)
    }
}

/// Which norms the trajectory diagnostics record (all evaluated on the
/// density perturbation).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct DiagnosticsConfig {
    pub norms: Vec<HybridIndex>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SnapshotDiagnostics {
    pub t: f64,
    pub energy: f64,
    pub energy_mechanical: f64,
    pub dissipation: f64,
    /// Hybrid norms of `q`, aligned with `DiagnosticsConfig::norms`.
    pub norms: Vec<f64>,
    /// Per-block L^2 amplitudes of `q`, indexed `l_min..=l_max`.
    pub q_block_amplitudes: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<FlowState>,
    pub diagnostics: Vec<SnapshotDiagnostics>,
}

impl Trajectory {
    pub fn q_series(&self) -> Result<TimeSeries> {
        TimeSeries::new(self.times.clone(), self.states.iter().map(|s| s.q().clone()).collect())
    }

    pub fn velocity_series(&self, a: usize) -> Result<TimeSeries> {
        TimeSeries::new(
            self.times.clone(),
            self.states.iter().map(|s| s.velocity()[a].clone()).collect(),
        )
    }

    pub fn temp_series(&self) -> Result<TimeSeries> {
        TimeSeries::new(self.times.clone(), self.states.iter().map(|s| s.temp().clone()).collect())
    }
}

/// Warn-but-run check used before long runs.
pub fn stability_warning(lc: &LinearCoeffs) -> Option<String> {
    let report = classify_stability(lc);
    if report.stable {
        None
    } else {
        let names: Vec<&str> = report.violated.iter().map(|c| c.name()).collect();
        Some(format!(
            "equilibrium is linearly unstable (violated: {}); integrating anyway",
            names.join(", ")
        ))
    }
}

/// Spectral state in the solver's internal variables.
struct ModeVars {
    q: Vec<Complex64>,
    d: Vec<Complex64>,
    temp: Vec<Complex64>,
    omega: Vec<Vec<Complex64>>,
    u_mean: [f64; 3],
    temp_mean: f64,
}

/// Forcing transformed to the internal variables.
struct ModeForcing {
    f: Vec<Complex64>,
    g_d: Vec<Complex64>,
    h: Vec<Complex64>,
    g_omega: Vec<Vec<Complex64>>,
    g_mean: [f64; 3],
    h_mean: f64,
}

pub struct Stepper {
    grid: GridSpec,
    model: EquilibriumModel,
    dt: f64,
    order: EtdOrder,
    dealias: bool,
    positivity_floor: f64,
    nonlinear: bool,
    coupled_props: HashMap<i64, ModePropagator>,
    heat_props: HashMap<i64, (f64, f64, f64)>,
}

impl Stepper {
    pub fn new(
        grid: GridSpec,
        model: EquilibriumModel,
        lc: LinearCoeffs,
        dt: f64,
        order: EtdOrder,
    ) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        model.validate()?;
        let mut coupled_props = HashMap::new();
        let mut heat_props = HashMap::new();
        let k0 = grid.k_fundamental();
        for flat in 0..grid.total_points() {
            let k2 = grid.k2_int(flat);
            if k2 == 0 {
                continue;
            }
            coupled_props.entry(k2).or_insert_with(|| {
                let xi = k0 * (k2 as f64).sqrt();
                mode_propagator(&lc, xi, dt).expect("xi > 0 and dt > 0")
            });
            heat_props.entry(k2).or_insert_with(|| {
                let xi = k0 * (k2 as f64).sqrt();
                heat_propagator(lc.mu_tilde, xi, dt)
            });
        }
        Ok(Self {
            grid,
            model,
            dt,
            order,
            dealias: true,
            positivity_floor: 1e-8,
            nonlinear: true,
            coupled_props,
            heat_props,
        })
    }

    pub fn with_dealias(mut self, dealias: bool) -> Self {
        self.dealias = dealias;
        self
    }

    pub fn with_positivity_floor(mut self, floor: f64) -> Self {
        self.positivity_floor = floor;
        self
    }

    /// Disable the quadratic terms; the step then applies the exact linear
    /// flow.
    pub fn with_nonlinearity(mut self, enabled: bool) -> Self {
        self.nonlinear = enabled;
        self
    }

    fn split_state(&self, state: &FlowState) -> Result<ModeVars> {
        let (d, omega) = helmholtz_split(state.velocity())?;
        Ok(ModeVars {
            q: state.q().coeffs().to_vec(),
            d: d.coeffs().to_vec(),
            temp: state.temp().coeffs().to_vec(),
            omega: omega.entries_upper().iter().map(|f| f.coeffs().to_vec()).collect(),
            u_mean: state.u_mean(),
            temp_mean: state.temp_mean(),
        })
    }

    fn assemble_state(&self, vars: &ModeVars) -> Result<FlowState> {
        let mut q = SpectralField::zero(self.grid);
        q.coeffs_mut().copy_from_slice(&vars.q);
        let mut d = SpectralField::zero(self.grid);
        d.coeffs_mut().copy_from_slice(&vars.d);
        let mut temp = SpectralField::zero(self.grid);
        temp.coeffs_mut().copy_from_slice(&vars.temp);
        temp.set_mean(vars.temp_mean);
        let mut omega = AntisymmetricMatrix::zero(self.grid);
        for (slot, data) in vars.omega.iter().enumerate() {
            omega.entries_upper_mut()[slot].coeffs_mut().copy_from_slice(data);
        }
        let mut velocity = crate::helmholtz::helmholtz_reassemble(&d, &omega);
        for (a, c) in velocity.iter_mut().enumerate() {
            c.set_mean(vars.u_mean[a]);
        }
        FlowState::new(q, velocity, temp)
    }

    fn forcing(&self, state: &FlowState) -> Result<ModeForcing> {
        let nmodes = self.grid.total_points();
        let nslots = self.grid.dim() * (self.grid.dim() - 1) / 2;
        if !self.nonlinear {
            return Ok(ModeForcing {
                f: vec![Complex64::ZERO; nmodes],
                g_d: vec![Complex64::ZERO; nmodes],
                h: vec![Complex64::ZERO; nmodes],
                g_omega: vec![vec![Complex64::ZERO; nmodes]; nslots],
                g_mean: [0.0; 3],
                h_mean: 0.0,
            });
        }
        let (f, g, h) = nonlinear_terms(state, &self.model, self.dealias)?;
        let mut g_mean = [0.0; 3];
        for (a, c) in g.iter().enumerate() {
            g_mean[a] = c.mean();
        }
        let g_d = crate::helmholtz::lambda_inv_div(&g)?;
        let g_omega = lambda_inv_curl(&g)?;
        Ok(ModeForcing {
            f: f.coeffs().to_vec(),
            g_d: g_d.coeffs().to_vec(),
            h: h.coeffs().to_vec(),
            g_omega: g_omega.entries_upper().iter().map(|f| f.coeffs().to_vec()).collect(),
            g_mean,
            h_mean: h.mean(),
        })
    }

    /// Advance `vars` by one step given forcings at the start (and end, for
    /// the order-2 corrector).
    fn advance(&self, vars: &ModeVars, f0: &ModeForcing, f1: Option<&ModeForcing>) -> ModeVars {
        let nmodes = self.grid.total_points();
        let mut out = ModeVars {
            q: vec![Complex64::ZERO; nmodes],
            d: vec![Complex64::ZERO; nmodes],
            temp: vec![Complex64::ZERO; nmodes],
            omega: vec![vec![Complex64::ZERO; nmodes]; vars.omega.len()],
            u_mean: vars.u_mean,
            temp_mean: vars.temp_mean,
        };
        // mean (xi = 0) modes: plain quadrature of the mean forcing; the
        // density mean is untouched because div-form forcing has zero mean.
        out.q[0] = vars.q[0];
        match f1 {
            None => {
                for a in 0..self.grid.dim() {
                    out.u_mean[a] += self.dt * f0.g_mean[a];
                }
                out.temp_mean += self.dt * f0.h_mean;
            }
            Some(f1) => {
                for a in 0..self.grid.dim() {
                    out.u_mean[a] += 0.5 * self.dt * (f0.g_mean[a] + f1.g_mean[a]);
                }
                out.temp_mean += 0.5 * self.dt * (f0.h_mean + f1.h_mean);
            }
        }
        for flat in 1..nmodes {
            let k2 = self.grid.k2_int(flat);
            if k2 == 0 {
                // off-origin aliases cannot occur; flat = 0 is the only mean
                continue;
            }
            let prop = &self.coupled_props[&k2];
            let state = Vector3::new(vars.q[flat], vars.d[flat], vars.temp[flat]);
            let fs = Vector3::new(f0.f[flat], f0.g_d[flat], f0.h[flat]);
            let fe = f1.map(|f| Vector3::new(f.f[flat], f.g_d[flat], f.h[flat]));
            let next = match fe {
                None => prop.apply(state, fs, None),
                Some(fe) => prop.apply(state, fs, Some(fe)),
            };
            out.q[flat] = next[0];
            out.d[flat] = next[1];
            out.temp[flat] = next[2];

            let (w, p1, p2) = self.heat_props[&k2];
            for (slot, data) in vars.omega.iter().enumerate() {
                let g0 = f0.g_omega[slot][flat];
                let mut v = w * data[flat] + p1 * g0;
                if let Some(f1) = f1 {
                    v += p2 * (f1.g_omega[slot][flat] - g0);
                }
                out.omega[slot][flat] = v;
            }
        }
        out
    }

    /// One ETD step. `step_index` only labels errors.
    pub fn step(&self, state: &FlowState, step_index: usize) -> Result<FlowState> {
        let min_rho = state.min_density_ratio();
        if min_rho <= self.positivity_floor {
            return Err(Error::DensityFloor { step: step_index, min_density: min_rho });
        }
        let vars = self.split_state(state)?;
        let f0 = self.forcing(state)?;
        let next = match self.order {
            EtdOrder::One => self.advance(&vars, &f0, None),
            EtdOrder::Two => {
                // predictor (ETD1), then corrector with the forcing at the
                // predicted endpoint
                let predictor = self.advance(&vars, &f0, None);
                let predictor_state = self.assemble_state(&predictor)?;
                let f1 = self.forcing(&predictor_state)?;
                self.advance(&vars, &f0, Some(&f1))
            }
        };
        let out = self.assemble_state(&next)?;
        if !out.perturbation_norm().is_finite() {
            return Err(Error::NormOverflow { step: step_index });
        }
        let min_rho = out.min_density_ratio();
        if min_rho <= self.positivity_floor {
            return Err(Error::DensityFloor { step: step_index, min_density: min_rho });
        }
        Ok(out)
    }
}

/// Single-step convenience wrapper around [`Stepper`].
pub fn step(
    state: &FlowState,
    model: &EquilibriumModel,
    lc: &LinearCoeffs,
    dt: f64,
    order: EtdOrder,
) -> Result<FlowState> {
    Stepper::new(*state.grid(), *model, *lc, dt, order)?.step(state, 0)
}

fn snapshot(
    t: f64,
    state: &FlowState,
    model: &EquilibriumModel,
    dec: &DyadicDecomposition,
    diag: &DiagnosticsConfig,
) -> Result<SnapshotDiagnostics> {
    let norms = diag
        .norms
        .iter()
        .map(|idx| hybrid_norm(state.q(), *idx, dec))
        .collect::<Result<Vec<f64>>>()?;
    Ok(SnapshotDiagnostics {
        t,
        energy: energy_total(state, model)?,
        energy_mechanical: energy_mechanical(state, model)?,
        dissipation: dissipation(state, model)?,
        norms,
        q_block_amplitudes: dec.block_norms(state.q())?,
    })
}

/// Integrate from `initial` and record snapshots with diagnostics at the
/// configured cadence.
pub fn simulate(
    initial: &FlowState,
    model: &EquilibriumModel,
    config: &SolverConfig,
    diag: &DiagnosticsConfig,
) -> Result<Trajectory> {
    let steps = config.steps()?;
    let lc = LinearCoeffs::from_equilibrium(model)?;
    let grid = *initial.grid();
    let min_rho = initial.min_density_ratio();
    if min_rho <= config.positivity_floor {
        return Err(Error::DensityFloor { step: 0, min_density: min_rho });
    }
    let dec = DyadicDecomposition::new(grid);
    let mut times = vec![0.0];
    let mut states = vec![initial.clone()];
    let mut diagnostics = vec![snapshot(0.0, initial, model, &dec, diag)?];
    if steps == 0 {
        return Ok(Trajectory { times, states, diagnostics });
    }
    let stepper = Stepper::new(grid, *model, lc, config.dt, config.order)?
        .with_dealias(config.dealias)
        .with_positivity_floor(config.positivity_floor);
    let mut current = initial.clone();
    for i in 0..steps {
        current = stepper.step(&current, i)?;
        if (i + 1) % config.snapshot_every == 0 {
            let t = (i + 1) as f64 * config.dt;
            times.push(t);
            diagnostics.push(snapshot(t, &current, model, &dec, diag)?);
            states.push(current.clone());
        }
    }
    Ok(Trajectory { times, states, diagnostics })
}
