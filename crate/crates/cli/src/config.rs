//! Run configuration: a flat key-value document with bracketed sections
//! `[grid]`, `[model]`, `[solver]`, `[diagnostics]`, `[seed]` (TOML
//! grammar). Unknown keys are rejected and the physical gates are
//! re-validated at parse time.

use anyhow::{bail, Context};
use korteweg::besov::HybridIndex;
use korteweg::grid::GridSpec;
use korteweg::linear::EtdOrder;
use korteweg::physics::{CoeffFamily, EquilibriumModel};
use korteweg::solver::{DiagnosticsConfig, SolverConfig};
use serde::{Deserialize, Serialize};
use std::path::Path;

fn default_domain_length() -> f64 {
    std::f64::consts::TAU
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub dim: usize,
    pub points_per_dim: usize,
    #[serde(default = "default_domain_length")]
    pub domain_length: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
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

impl ModelSection {
    pub fn to_model(&self) -> EquilibriumModel {
        EquilibriumModel {
            rho_bar: self.rho_bar,
            theta_bar: self.theta_bar,
            a_psi: self.a_psi,
            mu: self.mu,
            lambda: self.lambda,
            kappa: self.kappa,
            chi: self.chi,
            p0: self.p0,
            p1: self.p1,
        }
    }

}

fn default_snapshot_every() -> usize {
    10
}

fn default_dealias() -> bool {
    true
}

fn default_positivity_floor() -> f64 {
    1e-8
}

fn default_amplitude() -> f64 {
    1e-2
}

fn default_init_band() -> u32 {
    8
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub dt: f64,
    pub t_end: f64,
    /// Duhamel quadrature order, 1 or 2.
    pub order: u8,
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: usize,
    #[serde(default = "default_dealias")]
    pub dealias: bool,
    #[serde(default = "default_positivity_floor")]
    pub positivity_floor: f64,
    /// Amplitude of the seeded initial perturbation.
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    /// Spectral band of the seeded initial perturbation.
    #[serde(default = "default_init_band")]
    pub init_band: u32,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsSection {
    /// Hybrid norm indices (s, t) recorded per snapshot.
    #[serde(default)]
    pub norms: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedSection {
    pub value: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSection,
    pub model: ModelSection,
    pub solver: SolverSection,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
    pub seed: SeedSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: RunConfig =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        GridSpec::new(self.grid.dim, self.grid.points_per_dim, self.grid.domain_length)
            .context("invalid [grid] section")?;
        self.model.to_model().validate().context("invalid [model] section")?;
        if !(self.solver.order == 1 || self.solver.order == 2) {
            bail!("[solver] order must be 1 or 2, got {}", self.solver.order);
        }
        self.solver_config()?.steps().context("invalid [solver] section")?;
        if !(self.solver.amplitude >= 0.0) {
            bail!("[solver] amplitude must be nonnegative");
        }
        Ok(())
    }

    pub fn grid_spec(&self) -> anyhow::Result<GridSpec> {
        Ok(GridSpec::new(self.grid.dim, self.grid.points_per_dim, self.grid.domain_length)?)
    }

    pub fn solver_config(&self) -> anyhow::Result<SolverConfig> {
        Ok(SolverConfig {
            dt: self.solver.dt,
            t_end: self.solver.t_end,
            order: if self.solver.order == 1 { EtdOrder::One } else { EtdOrder::Two },
            snapshot_every: self.solver.snapshot_every,
            dealias: self.solver.dealias,
            positivity_floor: self.solver.positivity_floor,
        })
    }

    pub fn diagnostics_config(&self) -> DiagnosticsConfig {
        DiagnosticsConfig {
            norms: self.diagnostics.norms.iter().map(|&(s, t)| HybridIndex::new(s, t)).collect(),
        }
    }
}

/// Column label of a configured norm, e.g. `hybrid_s-1_t0`.
pub fn norm_label(idx: &HybridIndex) -> String {
    format!("hybrid_s{}_t{}", idx.s, idx.t)
}
