//! Monte-Carlo draws from an outcome distribution and a goodness-of-fit test.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::phase_space::PhaseSpaceDist;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementOutcomeSample {
    pub mu_x: f64,
    pub mu_p: f64,
    /// Seed of the run and position of this draw within it.
    pub seed: u64,
    pub index: u64,
}

/// Cumulative cell masses over the row-major `(μX, μP)` lattice; negative
/// values are treated as zero.
fn cumulative(rho: &PhaseSpaceDist) -> Result<Vec<f64>> {
    let mut acc = 0.0;
    let cdf: Vec<f64> = rho
        .values
        .iter()
        .map(|v| {
            acc += v.max(0.0);
            acc
        })
        .collect();
    if !(acc > 0.0 && acc.is_finite()) {
        return Err(Error::invalid("outcome distribution has no positive mass"));
    }
    Ok(cdf)
}

/// `count` draws; draw `i` uses ChaCha8 seeded with `seed` on stream `i`, so the
/// result is independent of thread count.
pub fn sample_outcomes(rho: &PhaseSpaceDist, count: usize, seed: u64) -> Result<Vec<MeasurementOutcomeSample>> {
    let cdf = cumulative(rho)?;
    let total = *cdf.last().unwrap_or(&0.0);
    let np = rho.p_axis.n();
    let (dx, dp) = (rho.x_axis.dx(), rho.p_axis.dx());
    Ok((0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let u: f64 = rng.random::<f64>() * total;
            let cell = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
            let (a, l) = (cell / np, cell % np);
            let jx: f64 = rng.random::<f64>() - 0.5;
            let jp: f64 = rng.random::<f64>() - 0.5;
            MeasurementOutcomeSample {
                mu_x: rho.x_axis.coord(a) + jx * dx,
                mu_p: rho.p_axis.coord(l) + jp * dp,
                seed,
                index: i,
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub critical: f64,
    pub significance: f64,
    pub passed: bool,
}

const BINS: usize = 16;
const MIN_EXPECTED: f64 = 5.0;

/// Lattice index ranges `[start, start + BINS·width)` covering `mean ± 4σ` along one axis.
fn window(axis: &crate::grid::GridSpec1D, mean: f64, sd: f64) -> (usize, usize) {
    let n = axis.n();
    let width = ((8.0 * sd / axis.dx()) / BINS as f64).ceil().max(1.0) as usize;
    let width = width.min(n / BINS).max(1);
    let center = ((mean - axis.x_min()) / axis.dx()).round() as isize;
    let start = (center - (BINS * width / 2) as isize).clamp(0, (n - BINS * width) as isize) as usize;
    (start, width)
}

/// Pearson test of `samples` against `rho` on a 16×16 grid of cell-aligned bins
/// spanning `±4σ`, with everything outside pooled into one extra bin. Bins
/// expecting fewer than five counts are merged with their neighbours.
pub fn chi_square_test(
    rho: &PhaseSpaceDist,
    samples: &[MeasurementOutcomeSample],
    significance: f64,
) -> Result<ChiSquareResult> {
    if samples.is_empty() {
        return Err(Error::invalid("no samples to test"));
    }
    let (mx, mp) = rho.means();
    let (sx, sp) = rho.std_devs();
    let (x0, wx) = window(&rho.x_axis, mx, sx);
    let (p0, wp) = window(&rho.p_axis, mp, sp);
    let nbins = BINS * BINS + 1;
    let bin_of = |a: usize, l: usize| -> usize {
        if a < x0 || l < p0 {
            return nbins - 1;
        }
        let (bx, bp) = ((a - x0) / wx, (l - p0) / wp);
        if bx >= BINS || bp >= BINS {
            nbins - 1
        } else {
            bx * BINS + bp
        }
    };

    let total: f64 = rho.values.iter().map(|v| v.max(0.0)).sum();
    let mut expected = vec![0.0; nbins];
    for ((a, l), v) in rho.values.indexed_iter() {
        expected[bin_of(a, l)] += v.max(0.0) / total;
    }
    let count = samples.len() as f64;
    for e in expected.iter_mut() {
        *e *= count;
    }

    let mut observed = vec![0.0; nbins];
    let (nx, np) = (rho.x_axis.n() as isize, rho.p_axis.n() as isize);
    for s in samples {
        let a = ((s.mu_x - rho.x_axis.x_min()) / rho.x_axis.dx() + 0.5).floor() as isize;
        let l = ((s.mu_p - rho.p_axis.x_min()) / rho.p_axis.dx() + 0.5).floor() as isize;
        let b = if (0..nx).contains(&a) && (0..np).contains(&l) {
            bin_of(a as usize, l as usize)
        } else {
            nbins - 1
        };
        observed[b] += 1.0;
    }

    let mut merged: Vec<(f64, f64)> = Vec::new();
    let (mut pe, mut po) = (0.0, 0.0);
    for (e, o) in expected.iter().zip(&observed) {
        pe += e;
        po += o;
        if pe >= MIN_EXPECTED {
            merged.push((pe, po));
            pe = 0.0;
            po = 0.0;
        }
    }
    if pe > 0.0 || po > 0.0 {
        match merged.last_mut() {
            Some(last) => {
                last.0 += pe;
                last.1 += po;
            }
            None => merged.push((pe, po)),
        }
    }
    if merged.len() < 2 {
        return Err(Error::invalid("too few populated bins for a chi-square test"));
    }
    let statistic: f64 = merged.iter().map(|(e, o)| (o - e) * (o - e) / e).sum();
    let dof = merged.len() - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::invalid(e.to_string()))?;
    let critical = dist.inverse_cdf(1.0 - significance);
    Ok(ChiSquareResult {
        statistic,
        dof,
        critical,
        significance,
        passed: statistic <= critical,
    })
}
