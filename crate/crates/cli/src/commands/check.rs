//! `check`: self-contained inequality harnesses with pass/fail verdicts.

use korteweg::besov::{derivative_equivalence_ratio, product_law_ratio};
use korteweg::dyadic::DyadicDecomposition;
use korteweg::field::SpectralField;
use korteweg::grid::GridSpec;
use korteweg::physics::{korteweg_force, korteweg_force_tensor, CoeffFamily, EquilibriumModel, FlowState};
use korteweg::picard::{f_t_norm_of_difference, heat_smoothing_check, picard_iterate};
use korteweg::random::band_limited;
use serde::Serialize;
use serde_json::json;

pub const SUITES: [&str; 6] = [
    "product-law",
    "derivative-equivalence",
    "heat-smoothing",
    "korteweg-identity",
    "picard-contraction",
    "all",
];

#[derive(Debug, clap::Args)]
pub struct CheckArgs {
    /// Suite name; `all` aggregates every suite.
    pub suite: String,
}

#[derive(Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub pass: bool,
    pub details: serde_json::Value,
}

fn product_law(seed: u64) -> anyhow::Result<SuiteReport> {
    let coarse = GridSpec::standard(2, 64)?;
    let fine = GridSpec::standard(2, 128)?;
    let a = product_law_ratio(40, 1.0, 1.0, 1.0, 1.0, coarse, seed)?;
    let b = product_law_ratio(40, 1.0, 1.0, 1.0, 1.0, fine, seed)?;
    let drift = (a.max - b.max).abs() / a.max;
    let pass = a.max.is_finite() && a.max > 0.0 && drift < 0.10;
    Ok(SuiteReport {
        suite: "product-law".into(),
        pass,
        details: json!({
            "coarse": a,
            "fine": b,
            "drift": drift,
        }),
    })
}

fn derivative_equivalence(seed: u64) -> anyhow::Result<SuiteReport> {
    let grid = GridSpec::standard(1, 64)?;
    let stats = derivative_equivalence_ratio(100, 1.0, grid, seed)?;
    let spread = (stats.max / stats.min).ln();
    let pass = stats.min > 0.0 && spread < 2.0;
    Ok(SuiteReport {
        suite: "derivative-equivalence".into(),
        pass,
        details: json!({ "stats": stats, "log_spread": spread }),
    })
}

fn heat_smoothing(seed: u64) -> anyhow::Result<SuiteReport> {
    let coarse = GridSpec::standard(1, 64)?;
    let fine = GridSpec::standard(1, 128)?;
    let mut max_drift: f64 = 0.0;
    let mut ratios = Vec::new();
    for i in 0..20u64 {
        let u_coarse = band_limited(coarse, 10, seed ^ (0x100 + i));
        let u_fine = band_limited(fine, 10, seed ^ (0x100 + i));
        let r1 = heat_smoothing_check(&u_coarse, 1.0, 1.0, 1.0, 1.0, 0.5)?;
        let r2 = heat_smoothing_check(&u_fine, 1.0, 1.0, 1.0, 1.0, 0.5)?;
        max_drift = max_drift.max((r1.ratio - r2.ratio).abs() / r1.ratio);
        ratios.push(r1.ratio);
    }
    let pass = max_drift < 0.10;
    Ok(SuiteReport {
        suite: "heat-smoothing".into(),
        pass,
        details: json!({ "ratios": ratios, "max_drift": max_drift }),
    })
}

fn korteweg_identity(seed: u64) -> anyhow::Result<SuiteReport> {
    let grid = GridSpec::standard(2, 128)?;
    let kappas = [
        CoeffFamily::constant(1.3),
        CoeffFamily::Affine { offset: 0.4, slope: 0.5 },
        CoeffFamily::PowerLaw { coeff: 0.8, exponent: 1.5 },
    ];
    let mut worst: f64 = 0.0;
    for i in 0..3u64 {
        let mut bump = band_limited(grid, 5, seed ^ (0x200 + i));
        let peak = bump.to_real().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        bump = bump.scale(0.1 / peak);
        let samples: Vec<f64> = bump.to_real().iter().map(|v| v + 2.0).collect();
        let rho = SpectralField::from_real(grid, &samples)?;
        for kappa in kappas {
            let mut model = EquilibriumModel::constant_unit();
            model.rho_bar = 2.0;
            model.kappa = kappa;
            let reduced = korteweg_force(&rho, &model, true)?;
            let tensor = korteweg_force_tensor(&rho, &model, true)?;
            let scale: f64 = reduced.iter().map(|f| f.l2_norm().powi(2)).sum::<f64>().sqrt();
            let err: f64 = reduced
                .iter()
                .zip(&tensor)
                .map(|(a, b)| Ok::<f64, korteweg::Error>(a.sub(b)?.l2_norm().powi(2)))
                .sum::<Result<f64, _>>()?
                .sqrt();
            worst = worst.max(err / scale);
        }
    }
    let pass = worst < 1e-8;
    Ok(SuiteReport {
        suite: "korteweg-identity".into(),
        pass,
        details: json!({ "max_relative_error": worst, "tolerance": 1e-8 }),
    })
}

fn picard_contraction(seed: u64) -> anyhow::Result<SuiteReport> {
    let grid = GridSpec::standard(1, 64)?;
    let model = EquilibriumModel::constant_unit();
    let initial = FlowState::random_perturbation(grid, 1e-2, 5, seed);
    let trajs = picard_iterate(&initial, &model, 0.05, 4, 1e-3)?;
    let dec = DyadicDecomposition::new(grid);
    let mut diffs = Vec::new();
    for n in 1..trajs.len() {
        diffs.push(f_t_norm_of_difference(&trajs[n], &trajs[n - 1], &dec)?);
    }
    let ratios: Vec<f64> = diffs.windows(2).map(|w| w[1] / w[0]).collect();
    let pass = ratios.iter().all(|&r| r < 0.9);
    Ok(SuiteReport {
        suite: "picard-contraction".into(),
        pass,
        details: json!({ "differences": diffs, "ratios": ratios }),
    })
}

pub fn run(args: &CheckArgs, seed: u64) -> anyhow::Result<u8> {
    let run_one = |name: &str| -> anyhow::Result<SuiteReport> {
        match name {
            "product-law" => product_law(seed),
            "derivative-equivalence" => derivative_equivalence(seed),
            "heat-smoothing" => heat_smoothing(seed),
            "korteweg-identity" => korteweg_identity(seed),
            "picard-contraction" => picard_contraction(seed),
            other => anyhow::bail!("unknown suite `{other}`; available: {}", SUITES.join(", ")),
        }
    };
    let reports: Vec<SuiteReport> = if args.suite == "all" {
        SUITES[..SUITES.len() - 1]
            .iter()
            .map(|name| run_one(name))
            .collect::<anyhow::Result<_>>()?
    } else {
        vec![run_one(&args.suite)?]
    };
    let all_pass = reports.iter().all(|r| r.pass);
    println!("{}", serde_json::to_string_pretty(&reports)?);
    Ok(if all_pass { 0 } else { 1 })
}
