//! Phase-space distributions: Wigner, Husimi and smeared Wigner functions,
//! plus the zero-padded 2-D convolution they are built from.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{alt_sign, fft2, line_to_momentum, LineFft};
use crate::grid::{DensityMatrix1D, GridSpec1D, WaveFunction1D, BOUNDARY_DECAY, HERMITIAN_TOL};

pub use crate::states::{coherent_wavefunction, CoherentStateParams};

type C64 = Complex64;

/// Kernel mass tolerance accepted by [`convolve2d`].
pub const KERNEL_MASS_TOL: f64 = 1e-6;
/// Fraction of convolution mass allowed outside the output window.
pub const ALIASING_TOL: f64 = 1e-8;

/// A real function on an `(x, p)` lattice, `values[[i, j]] = f(x_i, p_j)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceDist {
    pub x_axis: GridSpec1D,
    pub p_axis: GridSpec1D,
    pub values: Array2<f64>,
}

impl PhaseSpaceDist {
    pub fn new(x_axis: GridSpec1D, p_axis: GridSpec1D, values: Array2<f64>) -> Result<Self> {
        if values.dim() != (x_axis.n(), p_axis.n()) {
            return Err(Error::mismatch(format!(
                "values {:?} for axes of length {} and {}",
                values.dim(),
                x_axis.n(),
                p_axis.n()
            )));
        }
        Ok(Self { x_axis, p_axis, values })
    }

    pub fn from_fn(x_axis: GridSpec1D, p_axis: GridSpec1D, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = Array2::from_shape_fn((x_axis.n(), p_axis.n()), |(i, j)| f(x_axis.coord(i), p_axis.coord(j)));
        Self { x_axis, p_axis, values }
    }

    /// Phase-space lattice of a position grid: `x` as given, `p` its conjugate.
    pub fn axes_for(grid: &GridSpec1D) -> (GridSpec1D, GridSpec1D) {
        (*grid, grid.momentum_grid())
    }

    pub fn cell_area(&self) -> f64 {
        self.x_axis.dx() * self.p_axis.dx()
    }

    pub fn mass(&self) -> f64 {
        self.values.sum() * self.cell_area()
    }

    /// `∫ f dp` at each `x_i`.
    pub fn marginal_x(&self) -> Vec<f64> {
        let dp = self.p_axis.dx();
        self.values.rows().into_iter().map(|r| r.sum() * dp).collect()
    }

    /// `∫ f dx` at each `p_j`.
    pub fn marginal_p(&self) -> Vec<f64> {
        let dx = self.x_axis.dx();
        self.values.columns().into_iter().map(|c| c.sum() * dx).collect()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `(mean_x, mean_p)` of the distribution, normalized by its mass.
    pub fn means(&self) -> (f64, f64) {
        let m = self.mass();
        let mx = moment(&self.marginal_x(), &self.x_axis, 1) / m;
        let mp = moment(&self.marginal_p(), &self.p_axis, 1) / m;
        (mx, mp)
    }

    /// Standard deviations of the two marginals.
    pub fn std_devs(&self) -> (f64, f64) {
        let m = self.mass();
        let (mx, mp) = self.means();
        let vx = moment(&self.marginal_x(), &self.x_axis, 2) / m - mx * mx;
        let vp = moment(&self.marginal_p(), &self.p_axis, 2) / m - mp * mp;
        (vx.max(0.0).sqrt(), vp.max(0.0).sqrt())
    }

    /// `∫∫ |f - g| dx dp` on a shared lattice.
    pub fn l1_distance(&self, other: &PhaseSpaceDist) -> Result<f64> {
        self.same_axes(other, "L¹ distance")?;
        Ok(self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * self.cell_area())
    }

    /// `h ∫∫ W² dx dp`, the purity of the state a Wigner function describes.
    pub fn wigner_purity(&self) -> f64 {
        self.x_axis.h() * self.values.iter().map(|v| v * v).sum::<f64>() * self.cell_area()
    }

    /// Checks `|W| ≤ 1/(πħ)` up to `1e-6`.
    pub fn satisfies_wigner_bound(&self) -> bool {
        self.max_abs() <= 1.0 / (PI * self.x_axis.hbar()) + 1e-6
    }

    pub(crate) fn same_axes(&self, other: &PhaseSpaceDist, what: &str) -> Result<()> {
        self.x_axis.require_same_lattice(&other.x_axis, what)?;
        self.p_axis.require_same_lattice(&other.p_axis, what)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            x_axis: self.x_axis,
            p_axis: self.p_axis,
            values: &self.values * s,
        }
    }
}

fn moment(marginal: &[f64], axis: &GridSpec1D, order: i32) -> f64 {
    marginal
        .iter()
        .zip(axis.coords())
        .map(|(m, c)| m * c.powi(order))
        .sum::<f64>()
        * axis.dx()
}

/// Shared Wigner evaluator. `sample(a, b)` returns the half-step density
/// matrix `⟨x_min + a·dx/2|ρ̂|x_min + b·dx/2⟩`.
fn wigner_from_half_step<F>(grid: &GridSpec1D, sample: F) -> PhaseSpaceDist
where
    F: Fn(usize, usize) -> C64 + Sync,
{
    let n = grid.n();
    let two_n = 2 * n as isize;
    let scale = grid.dx() / grid.h();
    let fft = LineFft::new(n);
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let c = 2 * k as isize;
            let lo = (-c).max(c - two_n + 1);
            let hi = c.min(two_n - 1 - c);
            let mut g = vec![C64::new(0.0, 0.0); n];
            for m in lo..=hi {
                let idx = m.rem_euclid(n as isize) as usize;
                g[idx] += sample((c - m) as usize, (c + m) as usize);
            }
            for (m, v) in g.iter_mut().enumerate() {
                *v *= alt_sign(m);
            }
            fft.inverse(&mut g);
            g.iter().map(|v| v.re * scale).collect()
        })
        .collect();
    let values = Array2::from_shape_fn((n, n), |(i, j)| rows[i][j]);
    PhaseSpaceDist {
        x_axis: *grid,
        p_axis: grid.momentum_grid(),
        values,
    }
}

/// `W(x,p) = (1/h)∫dy e^{ipy/ħ} ψ(x-y/2) ψ*(x+y/2)`.
pub fn wigner_of_pure(psi: &WaveFunction1D) -> Result<PhaseSpaceDist> {
    psi.check_boundary("Wigner input")?;
    let f = psi.half_step_samples();
    Ok(wigner_from_half_step(psi.grid(), |a, b| f[a] * f[b].conj()))
}

/// `W(x,p) = (1/h)∫dy e^{ipy/ħ} ⟨x-y/2|ρ̂|x+y/2⟩`.
pub fn wigner_of_density(rho: &DensityMatrix1D) -> Result<PhaseSpaceDist> {
    let dev = rho.hermitian_deviation();
    let scale = rho.elems().iter().map(|v| v.norm()).fold(1.0, f64::max);
    if dev > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian(dev));
    }
    let ratio = density_edge_ratio(rho);
    if ratio >= BOUNDARY_DECAY {
        return Err(Error::BoundaryLeak {
            what: "Wigner input density".into(),
            ratio,
            threshold: BOUNDARY_DECAY,
        });
    }
    let r = rho.half_step_samples();
    Ok(wigner_from_half_step(rho.grid(), |a, b| r[[a, b]]))
}

fn density_edge_ratio(rho: &DensityMatrix1D) -> f64 {
    let e = rho.elems();
    let n = e.nrows();
    let peak = e.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return 0.0;
    }
    let mut edge = 0.0f64;
    for ((i, j), v) in e.indexed_iter() {
        if i < 2 || i + 2 >= n || j < 2 || j + 2 >= n {
            edge = edge.max(v.norm());
        }
    }
    edge / peak
}

/// Gaussian phase-space kernel `(2/(h c)) exp(-(x²/λ² + λ²p²/ħ²)/c)` on the
/// centered lattice matching `grid`; `c = 1` is the Husimi kernel.
pub fn gaussian_kernel(grid: &GridSpec1D, lambda: f64, c: f64) -> Result<PhaseSpaceDist> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!("kernel width {lambda} must be positive")));
    }
    if !(c >= 1.0 && c.is_finite()) {
        return Err(Error::invalid(format!("kernel broadening {c} must be ≥ 1")));
    }
    let x_axis = grid.centered_with(grid.n())?;
    let p_axis = x_axis.momentum_grid();
    let hbar = grid.hbar();
    let pre = 2.0 / (grid.h() * c);
    Ok(PhaseSpaceDist::from_fn(x_axis, p_axis, |x, p| {
        pre * (-(x * x / (lambda * lambda) + lambda * lambda * p * p / (hbar * hbar)) / c).exp()
    }))
}

/// `Q(μX,μP) = (2/h)∫dxdp exp(-(μX-x)²/λ² - λ²(μP-p)²/ħ²) W(x,p)`.
pub fn husimi(psi: &WaveFunction1D, lambda_i: f64) -> Result<PhaseSpaceDist> {
    let w = wigner_of_pure(psi)?;
    convolve2d(&w, &gaussian_kernel(psi.grid(), lambda_i, 1.0)?)
}

/// Husimi function through coherent-state overlaps, `|⟨μX,μP,λ|ψ⟩|²/h`.
pub fn husimi_overlap(psi: &WaveFunction1D, lambda_i: f64) -> Result<PhaseSpaceDist> {
    if !(lambda_i > 0.0 && lambda_i.is_finite()) {
        return Err(Error::invalid(format!("Husimi width {lambda_i} must be positive")));
    }
    psi.check_boundary("Husimi input")?;
    let grid = *psi.grid();
    let n = grid.n();
    let fft = LineFft::new(n);
    let pre = (PI * lambda_i * lambda_i).powf(-0.5);
    let rows: Vec<Vec<f64>> = grid
        .coords()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|mu_x| {
            let mut line: Vec<C64> = grid
                .coords()
                .zip(psi.amps())
                .map(|(x, a)| a * (-(x - mu_x).powi(2) / (2.0 * lambda_i * lambda_i)).exp())
                .collect();
            line_to_momentum(&grid, &fft, &mut line);
            line.iter().map(|v| pre * v.norm_sqr()).collect()
        })
        .collect();
    let values = Array2::from_shape_fn((n, n), |(i, j)| rows[i][j]);
    PhaseSpaceDist::new(grid, grid.momentum_grid(), values)
}

/// Wigner function convolved with the `cosh η`-broadened Gaussian kernel.
pub fn smeared_wigner(psi: &WaveFunction1D, lambda: f64, eta: f64) -> Result<PhaseSpaceDist> {
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::invalid(format!("η = {eta} must be ≥ 0")));
    }
    let w = wigner_of_pure(psi)?;
    convolve2d(&w, &gaussian_kernel(psi.grid(), lambda, eta.cosh())?)
}

/// `out(x,p) = ∫∫ a(x',p') k(x-x', p-p') dx'dp'` on `a`'s lattice.
///
/// `k` must be centered and share `a`'s spacings; its mass must be one.
pub fn convolve2d(a: &PhaseSpaceDist, k: &PhaseSpaceDist) -> Result<PhaseSpaceDist> {
    if !k.x_axis.is_centered() || !k.p_axis.is_centered() {
        return Err(Error::mismatch("convolution kernel must be centered on both axes"));
    }
    if !a.x_axis.same_spacing(&k.x_axis) || !a.p_axis.same_spacing(&k.p_axis) {
        return Err(Error::mismatch(format!(
            "kernel spacing ({}, {}) differs from ({}, {})",
            k.x_axis.dx(),
            k.p_axis.dx(),
            a.x_axis.dx(),
            a.p_axis.dx()
        )));
    }
    let km = k.mass();
    if (km - 1.0).abs() > KERNEL_MASS_TOL {
        return Err(Error::invalid(format!("kernel mass {km} differs from 1")));
    }
    let (na0, na1) = a.values.dim();
    let (nk0, nk1) = k.values.dim();
    let r = (na0 + nk0 - 1).next_power_of_two();
    let c = (na1 + nk1 - 1).next_power_of_two();
    let embed = |v: &Array2<f64>| {
        let mut buf = vec![C64::new(0.0, 0.0); r * c];
        for ((i, j), x) in v.indexed_iter() {
            buf[i * c + j] = C64::new(*x, 0.0);
        }
        buf
    };
    let mut fa = embed(&a.values);
    let mut fk = embed(&k.values);
    fft2(&mut fa, r, c, false);
    fft2(&mut fk, r, c, false);
    for (x, y) in fa.iter_mut().zip(&fk) {
        *x *= y;
    }
    fft2(&mut fa, r, c, true);
    let scale = a.cell_area() / (r * c) as f64;
    let (o0, o1) = (nk0 / 2, nk1 / 2);
    let mut total = 0.0;
    let mut inside = 0.0;
    for (idx, v) in fa.iter().enumerate() {
        let (i, j) = (idx / c, idx % c);
        let m = (v.re * scale).abs();
        total += m;
        if i >= o0 && i < o0 + na0 && j >= o1 && j < o1 + na1 {
            inside += m;
        }
    }
    if total > 0.0 {
        let fraction = (total - inside) / total;
        if fraction > ALIASING_TOL {
            return Err(Error::AliasingDetected { fraction });
        }
    }
    let values = Array2::from_shape_fn((na0, na1), |(i, j)| fa[(i + o0) * c + j + o1].re * scale);
    Ok(PhaseSpaceDist {
        x_axis: a.x_axis,
        p_axis: a.p_axis,
        values,
    })
}
