//! `stability`: classify an equilibrium or an explicit coefficient tuple.

use crate::config::RunConfig;
use korteweg::linear::{
    classify_stability, condition_values, high_freq_limits, low_freq_asymptotics, LinearCoeffs,
    LowFreqAsymptotics, StabilityReport,
};
use serde::Serialize;
use std::path::PathBuf;

#[derive(Debug, clap::Args)]
pub struct StabilityArgs {
    /// Potential-part viscosity nu = lambda_tilde + 2 mu_tilde.
    #[arg(long, requires_all = ["eps", "alpha", "beta", "gamma", "delta"], allow_negative_numbers = true)]
    pub nu: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub eps: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    /// Shear viscosity ratio; defaults to nu/3 when only nu is given.
    #[arg(long, allow_negative_numbers = true)]
    pub mu_tilde: Option<f64>,
    /// Model file; coefficients are extracted from its [model] section.
    #[arg(long, conflicts_with = "nu")]
    pub config: Option<PathBuf>,
}

#[derive(Serialize)]
struct ConditionEntry {
    name: &'static str,
    value: f64,
    satisfied: bool,
}

#[derive(Serialize)]
struct StabilityOutput {
    coefficients: LinearCoeffs,
    report: StabilityReport,
    conditions: Vec<ConditionEntry>,
    low_frequency: Option<LowFreqAsymptotics>,
    high_frequency: Option<Vec<[f64; 2]>>,
}

pub fn resolve_coeffs(args: &StabilityArgs) -> anyhow::Result<LinearCoeffs> {
    if let Some(path) = &args.config {
        let cfg = RunConfig::load(path)?;
        return Ok(LinearCoeffs::from_equilibrium(&cfg.model.to_model())?);
    }
    match (args.nu, args.eps, args.alpha, args.beta, args.gamma, args.delta) {
        (Some(nu), Some(eps), Some(alpha), Some(beta), Some(gamma), Some(delta)) => {
            let mut c = LinearCoeffs::from_nu(nu, eps, alpha, beta, gamma, delta);
            if let Some(mu) = args.mu_tilde {
                c.mu_tilde = mu;
                c.lambda_tilde = nu - 2.0 * mu;
            }
            Ok(c)
        }
        _ => anyhow::bail!(
            "provide either --config FILE or all of --nu --eps --alpha --beta --gamma --delta"
        ),
    }
}

pub fn run(args: &StabilityArgs) -> anyhow::Result<u8> {
    let coeffs = resolve_coeffs(args)?;
    let report = classify_stability(&coeffs);
    let conditions = condition_values(&coeffs)
        .iter()
        .map(|(cond, value)| ConditionEntry { name: cond.name(), value: *value, satisfied: *value >= 0.0 })
        .collect();
    let low_frequency = low_freq_asymptotics(&coeffs).ok();
    let high_frequency = high_freq_limits(&coeffs)
        .ok()
        .map(|roots| roots.iter().map(|z| [z.re, z.im]).collect());
    let out = StabilityOutput { coefficients: coeffs, report, conditions, low_frequency, high_frequency };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(if out.report.stable { 0 } else { 1 })
}
