//! `besov`: norms and per-block breakdown of a stored field.

use korteweg::besov::{besov_norm, hybrid_norm, per_block_contributions, HybridIndex};
use korteweg::dyadic::DyadicDecomposition;
use korteweg::field::SpectralField;
use korteweg::io::read_kwf1;
use serde::Serialize;
use std::path::PathBuf;

#[derive(Debug, clap::Args)]
pub struct BesovArgs {
    /// KWF1 field file.
    #[arg(long)]
    pub field: PathBuf,
    /// Low-frequency exponent.
    #[arg(long)]
    pub s: f64,
    /// High-frequency exponent.
    #[arg(long)]
    pub t: f64,
    /// Component index for multi-component files.
    #[arg(long)]
    pub component: Option<usize>,
}

#[derive(Serialize)]
struct BlockEntry {
    l: i32,
    norm: f64,
    besov_term: f64,
    hybrid_term: f64,
}

#[derive(Serialize)]
struct BesovOutput {
    besov: f64,
    hybrid: f64,
    per_block: Vec<BlockEntry>,
}

pub fn run(args: &BesovArgs) -> anyhow::Result<u8> {
    let (grid, components) = read_kwf1(&args.field)?;
    let idx = match (args.component, components.len()) {
        (Some(i), n) if i < n => i,
        (Some(i), n) => anyhow::bail!("component {i} out of range (file has {n})"),
        (None, 1) => 0,
        (None, n) => anyhow::bail!("file has {n} components; pass --component"),
    };
    let field = SpectralField::from_real(grid, &components[idx])?;
    let dec = DyadicDecomposition::new(grid);
    let besov = besov_norm(&field, args.s, &dec)?;
    let hybrid = hybrid_norm(&field, HybridIndex::new(args.s, args.t), &dec)?;
    let norms = dec.block_norms(&field)?;
    let besov_terms = per_block_contributions(&field, HybridIndex::uniform(args.s), &dec)?;
    let hybrid_terms =
        per_block_contributions(&field, HybridIndex::new(args.s, args.t), &dec)?;
    let per_block = besov_terms
        .iter()
        .zip(&hybrid_terms)
        .zip(&norms)
        .map(|(((l, b), (_, h)), &norm)| BlockEntry {
            l: *l,
            norm,
            besov_term: *b,
            hybrid_term: *h,
        })
        .collect();
    let out = BesovOutput { besov, hybrid, per_block };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(0)
}
