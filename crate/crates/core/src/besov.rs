//! Homogeneous, hybrid and time-space (Chemin-Lerner) Besov norms, plus the
//! empirical harnesses for the product-law and derivative-equivalence
//! inequalities.
//!
//! All norms are l^1 over dyadic blocks of L^2 block norms; the mean mode is
//! excluded throughout. A hybrid norm weights blocks `l <= split` by `2^{ls}`
//! and blocks above by `2^{lt}`, so the plain norm is the hybrid norm with
//! `s = t` (bit for bit: same block norms, same weights, same summation
//! order).

use crate::dyadic::DyadicDecomposition;
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::GridSpec;
use crate::random::band_limited;
use crate::stats::StatsRecord;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Exponent pair of a hybrid norm: `s` on low blocks, `t` on high blocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HybridIndex {
    pub s: f64,
    pub t: f64,
}

impl HybridIndex {
    pub fn new(s: f64, t: f64) -> Self {
        Self { s, t }
    }

    pub fn uniform(s: f64) -> Self {
        Self { s, t: s }
    }
}

/// Time-indexed sequence of spectral fields on a common grid.
#[derive(Debug, Clone)]
pub struct TimeSeries {
    times: Vec<f64>,
    states: Vec<SpectralField>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, states: Vec<SpectralField>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidArgument("empty time series".into()));
        }
        if times.len() != states.len() {
            return Err(Error::InvalidArgument("times and states have different lengths".into()));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidArgument("time series must start at t = 0".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("times must be strictly increasing".into()));
        }
        let grid = *states[0].grid();
        if states.iter().any(|s| *s.grid() != grid) {
            return Err(Error::GridMismatch("time series states on different grids".into()));
        }
        Ok(Self { times, states })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[SpectralField] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

fn hybrid_weight(l: i32, idx: HybridIndex, split: i32) -> f64 {
    let e = if l <= split { idx.s } else { idx.t };
    (l as f64 * e).exp2()
}

/// Homogeneous Besov norm `sum_l 2^{ls} ||Delta_l u||_{L^2}`.
pub fn besov_norm(u: &SpectralField, s: f64, dec: &DyadicDecomposition) -> Result<f64> {
    hybrid_norm(u, HybridIndex::uniform(s), dec)
}

/// Hybrid Besov norm with exponent `idx.s` on blocks `l <= split` and
/// `idx.t` above.
pub fn hybrid_norm(u: &SpectralField, idx: HybridIndex, dec: &DyadicDecomposition) -> Result<f64> {
    let norms = dec.block_norms(u)?;
    let mut total = 0.0;
    for (bi, l) in dec.blocks().enumerate() {
        total += hybrid_weight(l, idx, dec.split_index()) * norms[bi];
    }
    Ok(total)
}

/// Per-block weighted contributions `(l, 2^{l e} ||Delta_l u||)`; the norms
/// above are exactly the sums of these.
pub fn per_block_contributions(
    u: &SpectralField,
    idx: HybridIndex,
    dec: &DyadicDecomposition,
) -> Result<Vec<(i32, f64)>> {
    let norms = dec.block_norms(u)?;
    Ok(dec
        .blocks()
        .enumerate()
        .map(|(bi, l)| (l, hybrid_weight(l, idx, dec.split_index()) * norms[bi]))
        .collect())
}

/// Exponent of the time integral in a Chemin-Lerner norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeExponent {
    Finite(f64),
    Infinity,
}

impl TimeExponent {
    pub fn new(rho: f64) -> Result<Self> {
        if rho.is_infinite() && rho > 0.0 {
            return Ok(Self::Infinity);
        }
        if !(rho >= 1.0 && rho.is_finite()) {
            return Err(Error::InvalidArgument(format!("time exponent must be >= 1, got {rho}")));
        }
        Ok(Self::Finite(rho))
    }
}

fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 1..times.len() {
        acc += 0.5 * (values[i] + values[i - 1]) * (times[i] - times[i - 1]);
    }
    acc
}

/// Chemin-Lerner norm: per-block time-L^rho norm first (trapezoidal rule on
/// the sample times, max over samples for rho = infinity), then the weighted
/// block sum.
pub fn chemin_lerner_norm(
    traj: &TimeSeries,
    rho: TimeExponent,
    idx: HybridIndex,
    dec: &DyadicDecomposition,
) -> Result<f64> {
    if traj.len() < 2 {
        return Err(Error::InvalidArgument(
            "Chemin-Lerner norm needs at least two time samples".into(),
        ));
    }
    // block_norms per snapshot, transposed to per-block time series.
    let per_state: Vec<Vec<f64>> =
        traj.states().iter().map(|s| dec.block_norms(s)).collect::<Result<_>>()?;
    let nblocks = per_state[0].len();
    let mut total = 0.0;
    for (bi, l) in dec.blocks().enumerate() {
        debug_assert!(bi < nblocks);
        let series: Vec<f64> = per_state.iter().map(|v| v[bi]).collect();
        let block_value = match rho {
            TimeExponent::Infinity => series.iter().cloned().fold(0.0f64, f64::max),
            TimeExponent::Finite(r) => {
                let powered: Vec<f64> = series.iter().map(|v| v.powf(r)).collect();
                trapezoid(traj.times(), &powered).powf(1.0 / r)
            }
        };
        total += hybrid_weight(l, idx, dec.split_index()) * block_value;
    }
    Ok(total)
}

/// The other order of computation at rho = 1: trapezoidal time integral of
/// the instantaneous hybrid norm. Equal to the Chemin-Lerner norm at rho = 1.
pub fn time_integral_of_hybrid_norm(
    traj: &TimeSeries,
    idx: HybridIndex,
    dec: &DyadicDecomposition,
) -> Result<f64> {
    let values: Vec<f64> =
        traj.states().iter().map(|s| hybrid_norm(s, idx, dec)).collect::<Result<_>>()?;
    Ok(trapezoid(traj.times(), &values))
}

/// `(int ||u(t)||^rho dt)^{1/rho}` with the norm taken before the time
/// integral; by Minkowski this is below the Chemin-Lerner norm.
pub fn time_lp_of_hybrid_norm(
    traj: &TimeSeries,
    rho: TimeExponent,
    idx: HybridIndex,
    dec: &DyadicDecomposition,
) -> Result<f64> {
    let values: Vec<f64> =
        traj.states().iter().map(|s| hybrid_norm(s, idx, dec)).collect::<Result<_>>()?;
    Ok(match rho {
        TimeExponent::Infinity => values.iter().cloned().fold(0.0f64, f64::max),
        TimeExponent::Finite(r) => {
            let powered: Vec<f64> = values.iter().map(|v| v.powf(r)).collect();
            trapezoid(traj.times(), &powered).powf(1.0 / r)
        }
    })
}

/// Band of the random fields used by the statistics harnesses. Low enough
/// that products stay fully resolved on a 64-point grid, which keeps the
/// empirical constants resolution-independent.
const HARNESS_BAND: u32 = 10;

/// Empirical constant of the hybrid product law: distribution of
/// `||uv|| / (||u|| ||v||)` in the norms
/// `B~^{s1+t1-N/2, s2+t2-N/2} <= C B~^{s1,t1} B~^{s2,t2}` over seeded random
/// band-limited pairs. The max is the empirical `C`.
pub fn product_law_ratio(
    sample_count: usize,
    s1: f64,
    s2: f64,
    t1: f64,
    t2: f64,
    grid: GridSpec,
    seed: u64,
) -> Result<StatsRecord> {
    let half_n = grid.dim() as f64 / 2.0;
    if s1 > half_n || s2 > half_n || t1 > half_n || t2 > half_n {
        return Err(Error::InvalidArgument(
            "product law requires all exponents <= N/2".into(),
        ));
    }
    if (s1 + s2).min(t1 + t2) <= 0.0 {
        return Err(Error::InvalidArgument(
            "product law requires min(s1+s2, t1+t2) > 0".into(),
        ));
    }
    let dec = DyadicDecomposition::new(grid);
    let product_idx = HybridIndex::new(s1 + t1 - half_n, s2 + t2 - half_n);
    let u_idx = HybridIndex::new(s1, t1);
    let v_idx = HybridIndex::new(s2, t2);
    let ratios: Vec<f64> = (0..sample_count)
        .into_par_iter()
        .map(|i| {
            let u = band_limited(grid, HARNESS_BAND, seed.wrapping_add(2 * i as u64 + 1));
            let v = band_limited(grid, HARNESS_BAND, seed.wrapping_add(2 * i as u64 + 2));
            let nu = hybrid_norm(&u, u_idx, &dec)?;
            let nv = hybrid_norm(&v, v_idx, &dec)?;
            if nu == 0.0 || nv == 0.0 {
                return Ok(0.0);
            }
            let uv = u.product(&v)?;
            let nuv = hybrid_norm(&uv, product_idx, &dec)?;
            Ok(nuv / (nu * nv))
        })
        .collect::<Result<_>>()?;
    Ok(StatsRecord::from_samples(ratios))
}

/// Empirical two-sided derivative equivalence: distribution of
/// `||grad u||_{B^{s-1}} / ||u||_{B^s}` over seeded random fields. The block
/// norm of the gradient combines components in l^2.
pub fn derivative_equivalence_ratio(
    sample_count: usize,
    s: f64,
    grid: GridSpec,
    seed: u64,
) -> Result<StatsRecord> {
    if sample_count == 0 {
        return Err(Error::InvalidArgument("sample_count must be >= 1".into()));
    }
    let dec = DyadicDecomposition::new(grid);
    let ratios: Vec<f64> = (0..sample_count)
        .into_par_iter()
        .map(|i| {
            let u = band_limited(grid, HARNESS_BAND, seed.wrapping_add(i as u64 + 1));
            Ok(gradient_ratio(&u, s, &dec)?)
        })
        .collect::<Result<_>>()?;
    Ok(StatsRecord::from_samples(ratios))
}

/// Ratio `||grad u||_{B^{s-1}} / ||u||_{B^s}` for one field.
pub fn gradient_ratio(u: &SpectralField, s: f64, dec: &DyadicDecomposition) -> Result<f64> {
    let grad = u.gradient();
    let grad_block_norms: Vec<Vec<f64>> =
        grad.iter().map(|g| dec.block_norms(g)).collect::<Result<_>>()?;
    let u_norms = dec.block_norms(u)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for (bi, l) in dec.blocks().enumerate() {
        let g2: f64 = grad_block_norms.iter().map(|v| v[bi] * v[bi]).sum();
        num += (l as f64 * (s - 1.0)).exp2() * g2.sqrt();
        den += (l as f64 * s).exp2() * u_norms[bi];
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::phi_profile;
    use approx::assert_relative_eq;

    fn setup() -> (GridSpec, DyadicDecomposition) {
        let g = GridSpec::standard(1, 64).unwrap();
        (g, DyadicDecomposition::new(g))
    }

    #[test]
    fn zero_field_has_zero_norms() {
        let (g, dec) = setup();
        let z = SpectralField::zero(g);
        assert_eq!(besov_norm(&z, 1.5, &dec).unwrap(), 0.0);
        assert_eq!(hybrid_norm(&z, HybridIndex::new(-1.0, 2.0), &dec).unwrap(), 0.0);
    }

    #[test]
    fn absolute_homogeneity() {
        let (g, dec) = setup();
        let u = band_limited(g, 12, 5);
        let c = -2.5;
        let a = besov_norm(&u.scale(c), 1.0, &dec).unwrap();
        let b = c.abs() * besov_norm(&u, 1.0, &dec).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }

    #[test]
    fn pure_mode_norm_matches_block_sum_oracle() {
        // Direct summation oracle for u = sin(8x), s = 1: only blocks whose
        // annulus contains |xi| = 8 contribute, with raw profile weights
        // (the partition normalization is a no-op in the interior).
        let (g, dec) = setup();
        let u = SpectralField::from_fn(g, |x| (8.0 * x[0]).sin());
        let l2 = u.l2_norm();
        let mut expected = 0.0;
        for l in dec.blocks() {
            let w = phi_profile(8.0 / (l as f64).exp2());
            expected += (l as f64).exp2() * w * l2;
        }
        let got = besov_norm(&u, 1.0, &dec).unwrap();
        assert_relative_eq!(got, expected, max_relative = 1e-10);
    }

    #[test]
    fn hybrid_equals_besov_when_exponents_match() {
        let (g, dec) = setup();
        let u = band_limited(g, 14, 9);
        for s in [-1.0, 0.0, 0.7, 2.0] {
            let a = hybrid_norm(&u, HybridIndex::uniform(s), &dec).unwrap();
            let b = besov_norm(&u, s, &dec).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn high_spectrum_hybrid_uses_only_t() {
        // Spectrum above |xi| = 8/3 touches no block l <= 0.
        let (g, dec) = setup();
        let mut u = SpectralField::zero(g);
        u.set_coeff([5, 0, 0], num_complex::Complex64::new(0.0, -0.5));
        u.set_coeff([13, 0, 0], num_complex::Complex64::new(0.25, 0.0));
        let h = hybrid_norm(&u, HybridIndex::new(-3.0, 1.25), &dec).unwrap();
        let b = besov_norm(&u, 1.25, &dec).unwrap();
        assert_eq!(h, b);
    }

    #[test]
    fn monotone_in_the_hybrid_ordering() {
        // s1 <= s2 and t1 >= t2 implies ||.||_{s2,t2} <= ||.||_{s1,t1}
        // whenever low blocks sit at l <= 0 and high at l > 0.
        let (g, dec) = setup();
        for seed in 0..8 {
            let u = band_limited(g, 14, 100 + seed);
            let a = hybrid_norm(&u, HybridIndex::new(-1.0, 2.0), &dec).unwrap();
            let b = hybrid_norm(&u, HybridIndex::new(-0.5, 1.0), &dec).unwrap();
            assert!(b <= a + 1e-12, "seed {seed}: {b} > {a}");
        }
    }

    #[test]
    fn triangle_inequality() {
        let (g, dec) = setup();
        for seed in 0..6 {
            let u = band_limited(g, 12, 200 + seed);
            let v = band_limited(g, 12, 300 + seed);
            let sum = u.add(&v).unwrap();
            let idx = HybridIndex::new(0.5, 1.5);
            let ns = hybrid_norm(&sum, idx, &dec).unwrap();
            let nu = hybrid_norm(&u, idx, &dec).unwrap();
            let nv = hybrid_norm(&v, idx, &dec).unwrap();
            assert!(ns <= nu + nv + 1e-10);
        }
    }

    #[test]
    fn constant_series_chemin_lerner_at_rho_one() {
        let (g, dec) = setup();
        let u = band_limited(g, 10, 17);
        let times = vec![0.0, 0.25, 0.5, 0.75, 1.0];
        let states = vec![u.clone(); times.len()];
        let traj = TimeSeries::new(times, states).unwrap();
        let idx = HybridIndex::new(0.5, 1.0);
        let cl =
            chemin_lerner_norm(&traj, TimeExponent::Finite(1.0), idx, &dec).unwrap();
        let expect = 1.0 * hybrid_norm(&u, idx, &dec).unwrap();
        assert_relative_eq!(cl, expect, max_relative = 1e-12);
    }

    #[test]
    fn rho_one_order_of_computation_agrees() {
        let (g, dec) = setup();
        let states: Vec<SpectralField> =
            (0..5).map(|i| band_limited(g, 12, 400 + i)).collect();
        let times = vec![0.0, 0.1, 0.3, 0.35, 0.8];
        let traj = TimeSeries::new(times, states).unwrap();
        let idx = HybridIndex::new(-0.5, 1.0);
        let a = chemin_lerner_norm(&traj, TimeExponent::Finite(1.0), idx, &dec).unwrap();
        let b = time_integral_of_hybrid_norm(&traj, idx, &dec).unwrap();
        assert!((a - b).abs() < 1e-10 * (1.0 + a));
    }

    #[test]
    fn minkowski_ordering_at_rho_two() {
        let (g, dec) = setup();
        let states = vec![band_limited(g, 12, 31), band_limited(g, 12, 32)];
        let traj = TimeSeries::new(vec![0.0, 0.4], states).unwrap();
        let idx = HybridIndex::new(0.5, 0.5);
        let lhs = time_lp_of_hybrid_norm(&traj, TimeExponent::Finite(2.0), idx, &dec).unwrap();
        let rhs = chemin_lerner_norm(&traj, TimeExponent::Finite(2.0), idx, &dec).unwrap();
        assert!(lhs <= rhs + 1e-12);
    }

    #[test]
    fn rho_infinity_dominates_every_snapshot_block() {
        let (g, dec) = setup();
        let states: Vec<SpectralField> =
            (0..4).map(|i| band_limited(g, 12, 500 + i)).collect();
        let traj = TimeSeries::new(vec![0.0, 0.1, 0.2, 0.3], states).unwrap();
        let idx = HybridIndex::new(0.0, 1.0);
        let cl = chemin_lerner_norm(&traj, TimeExponent::Infinity, idx, &dec).unwrap();
        for s in traj.states() {
            assert!(hybrid_norm(s, idx, &dec).unwrap() <= cl + 1e-12);
        }
    }

    #[test]
    fn degenerate_series_are_rejected() {
        assert!(TimeSeries::new(vec![], vec![]).is_err());
        // a single sample is not enough for the time integral
        let (g, dec) = setup();
        let traj = TimeSeries::new(vec![0.0], vec![band_limited(g, 8, 1)]).unwrap();
        assert!(chemin_lerner_norm(&traj, TimeExponent::Finite(1.0), HybridIndex::uniform(0.0), &dec)
            .is_err());
    }

    #[test]
    fn split_index_moves_the_low_high_boundary() {
        // shifting the split reweights blocks between the exponents
        let (g, _) = setup();
        let mut u = SpectralField::zero(g);
        u.set_coeff([3, 0, 0], num_complex::Complex64::new(0.0, -0.5));
        let idx = HybridIndex::new(-2.0, 3.0);
        let dec0 = DyadicDecomposition::new(g);
        let dec_hi = DyadicDecomposition::new(g).with_split(4);
        let n0 = hybrid_norm(&u, idx, &dec0).unwrap();
        let n_hi = hybrid_norm(&u, idx, &dec_hi).unwrap();
        // with the split above every populated block the low exponent applies
        let n_low_only = besov_norm(&u, -2.0, &dec0).unwrap();
        assert!((n_hi - n_low_only).abs() < 1e-12 * (1.0 + n_low_only));
        assert!(n0 > n_hi); // |xi| = 3 blocks counted as high under split 0
    }

    #[test]
    fn derivative_ratio_rejects_zero_samples() {
        let g = GridSpec::standard(1, 64).unwrap();
        assert!(derivative_equivalence_ratio(0, 1.0, g, 1).is_err());
    }

    #[test]
    fn product_law_hypothesis_gate() {
        let g = GridSpec::standard(2, 32).unwrap();
        // exponent above N/2
        assert!(product_law_ratio(1, 2.0, 1.0, 1.0, 1.0, g, 1).is_err());
        // min sum not positive
        assert!(product_law_ratio(1, 0.5, -0.5, 1.0, 1.0, g, 1).is_err());
    }

    #[test]
    fn product_law_deterministic() {
        let g = GridSpec::standard(1, 64).unwrap();
        let a = product_law_ratio(3, 0.5, 0.5, 0.5, 0.5, g, 77).unwrap();
        let b = product_law_ratio(3, 0.5, 0.5, 0.5, 0.5, g, 77).unwrap();
        assert_eq!(a.max, b.max);
        assert_eq!(a.mean, b.mean);
    }

    #[test]
    fn derivative_ratio_scale_invariant_and_pure_mode_bounds() {
        let (g, dec) = setup();
        let u = band_limited(g, 12, 3);
        let r1 = gradient_ratio(&u, 1.0, &dec).unwrap();
        let r2 = gradient_ratio(&u.scale(-7.5), 1.0, &dec).unwrap();
        assert_relative_eq!(r1, r2, max_relative = 1e-12);

        // On a pure mode sin(2^j x) the ratio is |xi| * 2^{-l}-weighted and
        // must sit inside the annulus bounds [3/4, 8/3] after the dyadic
        // weighting.
        let m = SpectralField::from_fn(g, |x| (8.0 * x[0]).sin());
        let r = gradient_ratio(&m, 1.0, &dec).unwrap();
        assert!(r > 0.74 && r < 8.0 / 3.0 + 1e-9, "ratio {r}");
    }
}
