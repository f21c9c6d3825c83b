//! `dispersion`: eigenvalues of `-A(xi)` over a log-spaced wavenumber range.

use crate::commands::stability::{resolve_coeffs, StabilityArgs};
use crate::output::fmt_f64;
use korteweg::linear::eigenvalues_minus_a;
use num_complex::Complex64;
use serde::Serialize;

pub const HEADER: &str = "xi,re_lambda1,im_lambda1,re_lambda2,im_lambda2,re_lambda3,im_lambda3";

#[derive(Debug, clap::Args)]
pub struct DispersionArgs {
    #[command(flatten)]
    pub coeffs: StabilityArgs,
    #[arg(long)]
    pub xi_min: f64,
    #[arg(long)]
    pub xi_max: f64,
    #[arg(long, default_value_t = 61)]
    pub points: usize,
}

#[derive(Serialize)]
struct DispersionRow {
    xi: f64,
    lambda: Vec<[f64; 2]>,
}

/// Eigenvalues sorted by real part descending, ties by imaginary part
/// descending.
fn sorted_eigenvalues(evs: [Complex64; 3]) -> Vec<Complex64> {
    let mut v = evs.to_vec();
    v.sort_by(|a, b| {
        b.re.partial_cmp(&a.re).unwrap().then(b.im.partial_cmp(&a.im).unwrap())
    });
    v
}

pub fn rows(args: &DispersionArgs) -> anyhow::Result<Vec<(f64, Vec<Complex64>)>> {
    if !(args.xi_min > 0.0) || !(args.xi_max >= args.xi_min) || args.points == 0 {
        anyhow::bail!("need 0 < xi_min <= xi_max and points >= 1");
    }
    let coeffs = resolve_coeffs(&args.coeffs)?;
    let mut out = Vec::with_capacity(args.points);
    for i in 0..args.points {
        let xi = if args.points == 1 {
            args.xi_min
        } else {
            let f = i as f64 / (args.points - 1) as f64;
            args.xi_min * (args.xi_max / args.xi_min).powf(f)
        };
        out.push((xi, sorted_eigenvalues(eigenvalues_minus_a(&coeffs, xi)?)));
    }
    Ok(out)
}

pub fn run(args: &DispersionArgs, json: bool) -> anyhow::Result<u8> {
    let rows = rows(args)?;
    if json {
        let body: Vec<DispersionRow> = rows
            .into_iter()
            .map(|(xi, evs)| DispersionRow {
                xi,
                lambda: evs.iter().map(|z| [z.re, z.im]).collect(),
            })
            .collect();
        println!("{}", serde_json::to_string_pretty(&body)?);
    } else {
        println!("{HEADER}");
        for (xi, evs) in rows {
            let mut cells = vec![fmt_f64(xi)];
            for z in evs {
                cells.push(fmt_f64(z.re));
                cells.push(fmt_f64(z.im));
            }
            println!("{}", cells.join(","));
        }
    }
    Ok(0)
}
