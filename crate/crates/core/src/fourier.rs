//! Thin wrappers around `rustfft` for the centered-lattice transforms used
//! everywhere else.
//!
//! A position lattice `x_k = x_min + k·dx` (k = 0..n) is paired with the
//! monotonic momentum lattice `p_j = (j - n/2)·dp`, `dp = 2πħ/(n·dx)`. With
//! that pairing the continuum transform `h^{-1/2} ∫dx e^{-ipx/ħ} ψ(x)` becomes
//! a plain DFT up to a `(-1)^k` chirp and a per-row phase, and is exactly
//! unitary between `ℓ²(dx)` and `ℓ²(dp)`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::grid::GridSpec1D;

pub(crate) type C64 = Complex64;

#[derive(Clone)]
pub(crate) struct LineFft {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl LineFft {
    pub(crate) fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.n
    }

    /// Unnormalized `Σ_k a_k e^{-2πi jk/n}`.
    pub(crate) fn forward(&self, buf: &mut [C64]) {
        debug_assert_eq!(buf.len(), self.n);
        self.fwd.process(buf);
    }

    /// Unnormalized `Σ_k a_k e^{+2πi jk/n}`.
    pub(crate) fn inverse(&self, buf: &mut [C64]) {
        debug_assert_eq!(buf.len(), self.n);
        self.inv.process(buf);
    }
}

#[inline]
pub(crate) fn alt_sign(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Position amplitudes on `grid` to momentum amplitudes on `grid.momentum_grid()`.
pub(crate) fn line_to_momentum(grid: &GridSpec1D, fft: &LineFft, line: &mut [C64]) {
    let n = grid.n();
    let hbar = grid.hbar();
    let scale = grid.dx() / (2.0 * PI * hbar).sqrt();
    for (k, a) in line.iter_mut().enumerate() {
        *a *= alt_sign(k);
    }
    fft.forward(line);
    let dp = grid.dp();
    let x_min = grid.x_min();
    for (j, a) in line.iter_mut().enumerate() {
        let p = (j as f64 - (n / 2) as f64) * dp;
        *a *= C64::from_polar(scale, -p * x_min / hbar);
    }
}

/// Inverse of [`line_to_momentum`].
pub(crate) fn line_to_position(grid: &GridSpec1D, fft: &LineFft, line: &mut [C64]) {
    let n = grid.n();
    let hbar = grid.hbar();
    let dp = grid.dp();
    let x_min = grid.x_min();
    for (j, a) in line.iter_mut().enumerate() {
        let p = (j as f64 - (n / 2) as f64) * dp;
        *a *= C64::from_polar(1.0, p * x_min / hbar);
    }
    fft.inverse(line);
    let scale = dp / (2.0 * PI * hbar).sqrt();
    for (k, a) in line.iter_mut().enumerate() {
        *a *= scale * alt_sign(k);
    }
}

/// Band-limited (trigonometric) interpolation onto the half-step lattice.
///
/// Output index `m` corresponds to `x_min + m·dx/2`, so even indices
/// reproduce the input samples. The Nyquist bin is split symmetrically.
pub(crate) fn upsample2(fft_n: &LineFft, fft_2n: &LineFft, line: &[C64]) -> Vec<C64> {
    let n = fft_n.len();
    debug_assert_eq!(fft_2n.len(), 2 * n);
    let mut spec = line.to_vec();
    fft_n.forward(&mut spec);
    let mut padded = vec![C64::new(0.0, 0.0); 2 * n];
    let half = n / 2;
    padded[..half].copy_from_slice(&spec[..half]);
    padded[half] = spec[half] * 0.5;
    padded[2 * n - half] = spec[half] * 0.5;
    padded[2 * n - half + 1..].copy_from_slice(&spec[half + 1..]);
    fft_2n.inverse(&mut padded);
    let inv_n = 1.0 / n as f64;
    for v in padded.iter_mut() {
        *v *= inv_n;
    }
    padded
}

/// In-place 2-D transform of a row-major `rows × cols` buffer, unnormalized.
pub(crate) fn fft2(buf: &mut [C64], rows: usize, cols: usize, inverse: bool) {
    debug_assert_eq!(buf.len(), rows * cols);
    let fr = LineFft::new(cols);
    let fc = LineFft::new(rows);
    let run = |f: &LineFft, line: &mut [C64]| {
        if inverse {
            f.inverse(line)
        } else {
            f.forward(line)
        }
    };
    buf.par_chunks_mut(cols).for_each(|line| run(&fr, line));
    let mut t = transpose(buf, rows, cols);
    t.par_chunks_mut(rows).for_each(|line| run(&fc, line));
    buf.copy_from_slice(&transpose(&t, cols, rows));
}

pub(crate) fn transpose(buf: &[C64], rows: usize, cols: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = buf[r * cols + c];
        }
    }
    out
}
