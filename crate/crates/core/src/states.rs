//! Standard system states: coherent and squeezed packets, cat states and
//! cubic-phase perturbed Gaussians.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec1D, WaveFunction1D};

type C64 = Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherentStateParams {
    pub mu_x: f64,
    pub mu_p: f64,
    pub lambda: f64,
}

impl CoherentStateParams {
    pub fn new(mu_x: f64, mu_p: f64, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::invalid(format!("coherent width {lambda} must be positive")));
        }
        Ok(Self { mu_x, mu_p, lambda })
    }

    /// Amplitude `(πλ²)^{-1/4} exp[-(x-μX)²/2λ² + iμP x/ħ - iμPμX/2ħ]`.
    pub fn amplitude(&self, x: f64, hbar: f64) -> C64 {
        let c = (PI * self.lambda * self.lambda).powf(-0.25);
        let d = x - self.mu_x;
        C64::from_polar(
            c * (-d * d / (2.0 * self.lambda * self.lambda)).exp(),
            self.mu_p * x / hbar - self.mu_p * self.mu_x / (2.0 * hbar),
        )
    }
}

/// Sampled coherent state, normalized on the lattice.
pub fn coherent_wavefunction(params: CoherentStateParams, grid: GridSpec1D) -> Result<WaveFunction1D> {
    CoherentStateParams::new(params.mu_x, params.mu_p, params.lambda)?;
    let hbar = grid.hbar();
    let w = WaveFunction1D::from_fn(grid, |x| params.amplitude(x, hbar));
    w.check_boundary("coherent state")?;
    w.normalize()
}

/// Minimum-uncertainty packet whose width differs from the reference scale;
/// identical in form to a coherent state of width `width`.
pub fn squeezed_wavefunction(mu_x: f64, mu_p: f64, width: f64, grid: GridSpec1D) -> Result<WaveFunction1D> {
    coherent_wavefunction(CoherentStateParams::new(mu_x, mu_p, width)?, grid)
}

/// Normalized superposition of coherent states at `±separation/2` with relative phase `phase`.
pub fn cat_wavefunction(separation: f64, lambda: f64, phase: f64, grid: GridSpec1D) -> Result<WaveFunction1D> {
    let a = CoherentStateParams::new(0.5 * separation, 0.0, lambda)?;
    let b = CoherentStateParams::new(-0.5 * separation, 0.0, lambda)?;
    let hbar = grid.hbar();
    let rel = C64::from_polar(1.0, phase);
    let w = WaveFunction1D::from_fn(grid, |x| a.amplitude(x, hbar) + rel * b.amplitude(x, hbar));
    w.check_boundary("cat state")?;
    w.normalize()
}

/// Gaussian of width `lambda` multiplied by `exp(iκx³/ħ)`.
pub fn cubic_phase_wavefunction(lambda: f64, kappa: f64, grid: GridSpec1D) -> Result<WaveFunction1D> {
    let g = CoherentStateParams::new(0.0, 0.0, lambda)?;
    let hbar = grid.hbar();
    let w = WaveFunction1D::from_fn(grid, |x| g.amplitude(x, hbar) * C64::from_polar(1.0, kappa * x * x * x / hbar));
    w.check_boundary("cubic-phase state")?;
    w.normalize()
}
