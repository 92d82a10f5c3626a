//! Uniform lattices, sampled wavefunctions and density matrices.
//!
//! Everything downstream is built on three conventions fixed here:
//!
//! * position samples `x_k = x_min + k·dx`, `k = 0..n`, with `n` a power of two;
//! * momentum samples `p_j = (j - n/2)·dp`, `dp = 2πħ/(n·dx)`, always returned
//!   in increasing order;
//! * integrals are Riemann sums (`Σ f_k dx`), which are spectrally accurate
//!   for smooth states that have decayed before the lattice edge.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use ndarray::{Array2, Axis};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{line_to_momentum, line_to_position, upsample2, LineFft};

type C64 = Complex64;

/// Edge amplitude relative to the peak above which a state counts as leaking.
pub const BOUNDARY_DECAY: f64 = 1e-8;

const LATTICE_REL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec1D {
    x_min: f64,
    n: usize,
    dx: f64,
    hbar: f64,
}

impl GridSpec1D {
    pub fn new(x_min: f64, n: usize, dx: f64, hbar: f64) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::invalid(format!("grid size {n} is not a power of two ≥ 2")));
        }
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(Error::invalid(format!("grid spacing {dx} must be positive")));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::invalid(format!("hbar {hbar} must be positive")));
        }
        if !x_min.is_finite() {
            return Err(Error::invalid("grid origin is not finite"));
        }
        Ok(Self { x_min, n, dx, hbar })
    }

    /// Lattice with the origin at index `n/2`.
    pub fn centered(n: usize, dx: f64, hbar: f64) -> Result<Self> {
        Self::new(-((n / 2) as f64) * dx, n, dx, hbar)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Planck's constant `h = 2πħ`.
    pub fn h(&self) -> f64 {
        2.0 * PI * self.hbar
    }

    pub fn x_max(&self) -> f64 {
        self.coord(self.n - 1)
    }

    pub fn coord(&self, k: usize) -> f64 {
        self.x_min + k as f64 * self.dx
    }

    pub fn coords(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n).map(move |k| self.coord(k))
    }

    pub fn dp(&self) -> f64 {
        self.h() / (self.n as f64 * self.dx)
    }

    /// The conjugate lattice: `n` points, spacing `dp`, origin at index `n/2`.
    pub fn momentum_grid(&self) -> GridSpec1D {
        let dp = self.dp();
        GridSpec1D {
            x_min: -((self.n / 2) as f64) * dp,
            n: self.n,
            dx: dp,
            hbar: self.hbar,
        }
    }

    pub fn is_centered(&self) -> bool {
        (self.x_min + (self.n / 2) as f64 * self.dx).abs() <= LATTICE_REL_TOL * self.dx
    }

    /// Same spacing and ħ, `n` points, origin at index `n/2`.
    pub fn centered_with(&self, n: usize) -> Result<GridSpec1D> {
        Self::centered(n, self.dx, self.hbar)
    }

    pub fn same_spacing(&self, other: &GridSpec1D) -> bool {
        rel_close(self.dx, other.dx) && rel_close(self.hbar, other.hbar)
    }

    pub fn same_lattice(&self, other: &GridSpec1D) -> bool {
        self.n == other.n
            && self.same_spacing(other)
            && (self.x_min - other.x_min).abs() <= LATTICE_REL_TOL * self.dx
    }

    /// `(other.x_min - self.x_min) / dx` when it is an integer.
    pub fn offset_in_steps(&self, other: &GridSpec1D) -> Option<isize> {
        if !self.same_spacing(other) {
            return None;
        }
        let s = (other.x_min - self.x_min) / self.dx;
        let r = s.round();
        if (s - r).abs() <= 1e-6 {
            Some(r as isize)
        } else {
            None
        }
    }

    /// Index of the sample nearest `x`, if `x` lies within half a step of the lattice.
    pub fn nearest_index(&self, x: f64) -> Option<usize> {
        let s = ((x - self.x_min) / self.dx).round();
        if s < 0.0 || s >= self.n as f64 {
            None
        } else {
            Some(s as usize)
        }
    }

    pub(crate) fn require_same_lattice(&self, other: &GridSpec1D, what: &str) -> Result<()> {
        if self.same_lattice(other) {
            Ok(())
        } else {
            Err(Error::mismatch(format!("{what}: {self:?} vs {other:?}")))
        }
    }
}

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= LATTICE_REL_TOL * a.abs().max(b.abs())
}

fn edge_ratio<'a>(values: impl Iterator<Item = &'a C64>, n: usize) -> f64 {
    let mut peak = 0.0f64;
    let mut edge = 0.0f64;
    for (k, v) in values.enumerate() {
        let a = v.norm();
        peak = peak.max(a);
        if k < 2 || k + 2 >= n {
            edge = edge.max(a);
        }
    }
    if peak == 0.0 {
        0.0
    } else {
        edge / peak
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec2D {
    pub axes: [GridSpec1D; 2],
    pub names: [String; 2],
}

impl GridSpec2D {
    pub fn new(a: GridSpec1D, b: GridSpec1D, names: [&str; 2]) -> Self {
        Self {
            axes: [a, b],
            names: [names[0].to_owned(), names[1].to_owned()],
        }
    }

    pub fn cell_area(&self) -> f64 {
        self.axes[0].dx() * self.axes[1].dx()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.axes[0].n(), self.axes[1].n())
    }
}

/// Complex amplitudes of a one-dimensional state sampled on a lattice.
#[derive(Clone, Debug)]
pub struct WaveFunction1D {
    grid: GridSpec1D,
    amps: Vec<C64>,
}

impl WaveFunction1D {
    pub fn new(grid: GridSpec1D, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != grid.n() {
            return Err(Error::mismatch(format!(
                "{} amplitudes for a {}-point grid",
                amps.len(),
                grid.n()
            )));
        }
        Ok(Self { grid, amps })
    }

    pub fn from_fn(grid: GridSpec1D, f: impl Fn(f64) -> C64) -> Self {
        let amps = grid.coords().map(f).collect();
        Self { grid, amps }
    }

    pub fn grid(&self) -> &GridSpec1D {
        &self.grid
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<C64> {
        self.amps
    }

    /// `Σ |ψ_k|² dx`.
    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn normalize(&self) -> Result<Self> {
        let ns = self.norm_sq();
        if !(ns >= 1e-300) {
            return Err(Error::ZeroNorm);
        }
        let s = 1.0 / ns.sqrt();
        Ok(Self {
            grid: self.grid,
            amps: self.amps.iter().map(|a| a * s).collect(),
        })
    }

    pub fn boundary_ratio(&self) -> f64 {
        edge_ratio(self.amps.iter(), self.amps.len())
    }

    pub fn check_boundary(&self, what: &str) -> Result<()> {
        let ratio = self.boundary_ratio();
        if ratio < BOUNDARY_DECAY {
            Ok(())
        } else {
            Err(Error::BoundaryLeak {
                what: what.to_owned(),
                ratio,
                threshold: BOUNDARY_DECAY,
            })
        }
    }

    /// `⟨p|ψ⟩ = h^{-1/2} ∫dx e^{-ipx/ħ} ψ(x)` on the conjugate lattice.
    pub fn to_momentum_rep(&self) -> Result<Self> {
        self.check_boundary("position representation")?;
        let fft = LineFft::new(self.grid.n());
        let mut line = self.amps.clone();
        line_to_momentum(&self.grid, &fft, &mut line);
        Ok(Self {
            grid: self.grid.momentum_grid(),
            amps: line,
        })
    }

    /// Inverse of [`to_momentum_rep`](Self::to_momentum_rep); `x_grid` is the
    /// position lattice whose conjugate `self` lives on.
    pub fn to_position_rep(&self, x_grid: &GridSpec1D) -> Result<Self> {
        x_grid
            .momentum_grid()
            .require_same_lattice(&self.grid, "momentum lattice")?;
        let fft = LineFft::new(x_grid.n());
        let mut line = self.amps.clone();
        line_to_position(x_grid, &fft, &mut line);
        Ok(Self {
            grid: *x_grid,
            amps: line,
        })
    }

    /// `Σ f_k |ψ_k|² dx` for `f` sampled on the same lattice.
    pub fn expect_multiplicative(&self, f: &[f64]) -> Result<f64> {
        if f.len() != self.amps.len() {
            return Err(Error::mismatch(format!(
                "observable has {} samples, state has {}",
                f.len(),
                self.amps.len()
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(f)
            .map(|(a, f)| f * a.norm_sqr())
            .sum::<f64>()
            * self.grid.dx())
    }

    pub fn expect_fn(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.grid
            .coords()
            .zip(&self.amps)
            .map(|(x, a)| f(x) * a.norm_sqr())
            .sum::<f64>()
            * self.grid.dx()
    }

    /// `⟨self|other⟩ = Σ conj(a_k) b_k dx`.
    pub fn inner(&self, other: &WaveFunction1D) -> Result<C64> {
        self.grid
            .require_same_lattice(&other.grid, "inner product")?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            * self.grid.dx())
    }

    pub fn mean_momentum(&self) -> Result<f64> {
        Ok(self.to_momentum_rep()?.expect_fn(|p| p))
    }

    /// Samples on the half-step lattice `x_min + m·dx/2`, `m = 0..2n`.
    pub(crate) fn half_step_samples(&self) -> Vec<C64> {
        let n = self.grid.n();
        upsample2(&LineFft::new(n), &LineFft::new(2 * n), &self.amps)
    }

    /// Copy onto a centered lattice with the same spacing and `n` points,
    /// padding with zeros or cropping symmetrically. Requires a centered source.
    pub fn recentered(&self, n: usize) -> Result<Self> {
        if !self.grid.is_centered() {
            return Err(Error::mismatch("recentering needs a centered source lattice"));
        }
        let grid = self.grid.centered_with(n)?;
        let src_mid = (self.grid.n() / 2) as isize;
        let dst_mid = (n / 2) as isize;
        let mut amps = vec![C64::new(0.0, 0.0); n];
        for (i, a) in amps.iter_mut().enumerate() {
            let s = i as isize - dst_mid + src_mid;
            if s >= 0 && (s as usize) < self.grid.n() {
                *a = self.amps[s as usize];
            }
        }
        Ok(Self { grid, amps })
    }

    /// `ψ(-x)` on a centered lattice; the sample with no mirror image is dropped.
    pub fn reflected(&self) -> Result<Self> {
        if !self.grid.is_centered() {
            return Err(Error::mismatch("reflection needs a centered lattice"));
        }
        let n = self.grid.n();
        let amps = (0..n)
            .map(|i| if i == 0 { C64::new(0.0, 0.0) } else { self.amps[n - i] })
            .collect();
        Ok(Self {
            grid: self.grid,
            amps,
        })
    }
}

/// Complex amplitudes on a two-dimensional lattice, indexed `[axis0, axis1]`.
#[derive(Clone, Debug)]
pub struct WaveFunction2D {
    grid: GridSpec2D,
    amps: Array2<C64>,
}

impl WaveFunction2D {
    pub fn new(grid: GridSpec2D, amps: Array2<C64>) -> Result<Self> {
        if amps.dim() != grid.shape() {
            return Err(Error::mismatch(format!(
                "amplitude array {:?} for grid {:?}",
                amps.dim(),
                grid.shape()
            )));
        }
        Ok(Self { grid, amps })
    }

    pub fn from_fn(grid: GridSpec2D, f: impl Fn(f64, f64) -> C64) -> Self {
        let (a, b) = (grid.axes[0], grid.axes[1]);
        let amps = Array2::from_shape_fn(grid.shape(), |(i, j)| f(a.coord(i), b.coord(j)));
        Self { grid, amps }
    }

    pub fn grid(&self) -> &GridSpec2D {
        &self.grid
    }

    pub fn amps(&self) -> &Array2<C64> {
        &self.amps
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.cell_area()
    }

    pub fn normalize(&self) -> Result<Self> {
        let ns = self.norm_sq();
        if !(ns >= 1e-300) {
            return Err(Error::ZeroNorm);
        }
        let s = 1.0 / ns.sqrt();
        Ok(Self {
            grid: self.grid.clone(),
            amps: self.amps.mapv(|a| a * s),
        })
    }

    /// Largest edge/peak amplitude ratio over both axes.
    pub fn boundary_ratio(&self) -> f64 {
        let peak = self.amps.iter().map(|a| a.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let (n0, n1) = self.amps.dim();
        let mut edge = 0.0f64;
        for ((i, j), a) in self.amps.indexed_iter() {
            if i < 2 || i + 2 >= n0 || j < 2 || j + 2 >= n1 {
                edge = edge.max(a.norm());
            }
        }
        edge / peak
    }

    pub fn check_boundary(&self, what: &str) -> Result<()> {
        let ratio = self.boundary_ratio();
        if ratio < BOUNDARY_DECAY {
            Ok(())
        } else {
            Err(Error::BoundaryLeak {
                what: what.to_owned(),
                ratio,
                threshold: BOUNDARY_DECAY,
            })
        }
    }

    /// Momentum transform along one axis only; the other axis is untouched.
    pub fn axis_to_momentum(&self, axis: usize) -> Result<Self> {
        self.check_boundary(&self.grid.names[axis.min(1)])?;
        let g = *self
            .grid
            .axes
            .get(axis)
            .ok_or_else(|| Error::invalid(format!("axis {axis} out of range")))?;
        let fft = LineFft::new(g.n());
        let mut amps = self.amps.clone();
        let mut buf = vec![C64::new(0.0, 0.0); g.n()];
        for mut lane in amps.lanes_mut(Axis(axis)) {
            for (b, a) in buf.iter_mut().zip(lane.iter()) {
                *b = *a;
            }
            line_to_momentum(&g, &fft, &mut buf);
            for (a, b) in lane.iter_mut().zip(&buf) {
                *a = *b;
            }
        }
        let mut grid = self.grid.clone();
        grid.axes[axis] = g.momentum_grid();
        Ok(Self { grid, amps })
    }

    /// Inverse transform along `axis`; `x_axis` is the position lattice it came from.
    pub fn axis_to_position(&self, axis: usize, x_axis: &GridSpec1D) -> Result<Self> {
        let g = *self
            .grid
            .axes
            .get(axis)
            .ok_or_else(|| Error::invalid(format!("axis {axis} out of range")))?;
        x_axis
            .momentum_grid()
            .require_same_lattice(&g, "momentum lattice")?;
        let fft = LineFft::new(g.n());
        let mut amps = self.amps.clone();
        let mut buf = vec![C64::new(0.0, 0.0); g.n()];
        for mut lane in amps.lanes_mut(Axis(axis)) {
            for (b, a) in buf.iter_mut().zip(lane.iter()) {
                *b = *a;
            }
            line_to_position(x_axis, &fft, &mut buf);
            for (a, b) in lane.iter_mut().zip(&buf) {
                *a = *b;
            }
        }
        let mut grid = self.grid.clone();
        grid.axes[axis] = *x_axis;
        Ok(Self { grid, amps })
    }

    /// Both axes to the momentum representation.
    pub fn to_momentum_rep(&self) -> Result<Self> {
        self.axis_to_momentum(0)?.axis_to_momentum(1)
    }

    /// `⟨w|(-iħ ∂_axis)^order|w⟩`, evaluated diagonally after an FFT along `axis`.
    pub fn partial_derivative_expectation(&self, axis: usize, order: u32) -> Result<f64> {
        if !(1..=2).contains(&order) {
            return Err(Error::invalid(format!("derivative order {order} not in {{1, 2}}")));
        }
        let m = self.axis_to_momentum(axis)?;
        let pg = m.grid.axes[axis];
        let area = m.grid.cell_area();
        let total: f64 = m
            .amps
            .indexed_iter()
            .map(|((i, j), a)| {
                let k = if axis == 0 { i } else { j };
                pg.coord(k).powi(order as i32) * a.norm_sqr()
            })
            .sum();
        Ok(total * area)
    }

    pub fn expect_fn(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        let (a, b) = (self.grid.axes[0], self.grid.axes[1]);
        self.amps
            .indexed_iter()
            .map(|((i, j), v)| f(a.coord(i), b.coord(j)) * v.norm_sqr())
            .sum::<f64>()
            * self.grid.cell_area()
    }

    pub fn expect_multiplicative(&self, f: &Array2<f64>) -> Result<f64> {
        if f.dim() != self.amps.dim() {
            return Err(Error::mismatch("observable and state shapes differ"));
        }
        Ok(self
            .amps
            .iter()
            .zip(f.iter())
            .map(|(a, f)| f * a.norm_sqr())
            .sum::<f64>()
            * self.grid.cell_area())
    }

    /// `‖a - b‖₂` over the lattice.
    pub fn l2_distance(&self, other: &WaveFunction2D) -> Result<f64> {
        for k in 0..2 {
            self.grid.axes[k].require_same_lattice(&other.grid.axes[k], "L² distance")?;
        }
        Ok((self
            .amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            * self.grid.cell_area())
        .sqrt())
    }

    /// Samples on the lattice refined by two along both axes.
    pub(crate) fn half_step_samples(&self) -> Array2<C64> {
        upsample2_2d(&self.amps)
    }
}

pub(crate) fn upsample2_2d(a: &Array2<C64>) -> Array2<C64> {
    let (n0, n1) = a.dim();
    let (f0, f0x2) = (LineFft::new(n0), LineFft::new(2 * n0));
    let (f1, f1x2) = (LineFft::new(n1), LineFft::new(2 * n1));
    let mut rows = Array2::zeros((n0, 2 * n1));
    for (i, row) in a.outer_iter().enumerate() {
        let line: Vec<C64> = row.iter().copied().collect();
        let up = upsample2(&f1, &f1x2, &line);
        for (j, v) in up.into_iter().enumerate() {
            rows[[i, j]] = v;
        }
    }
    let mut out = Array2::zeros((2 * n0, 2 * n1));
    for j in 0..2 * n1 {
        let line: Vec<C64> = rows.column(j).iter().copied().collect();
        let up = upsample2(&f0, &f0x2, &line);
        for (i, v) in up.into_iter().enumerate() {
            out[[i, j]] = v;
        }
    }
    out
}

/// `⟨x_j|ρ̂|x_k⟩` on a position lattice.
#[derive(Clone, Debug)]
pub struct DensityMatrix1D {
    grid: GridSpec1D,
    elems: Array2<C64>,
}

/// Absolute Hermiticity tolerance, scaled by the largest element when that exceeds one.
pub const HERMITIAN_TOL: f64 = 1e-9;
pub const TRACE_TOL: f64 = 1e-6;
pub const PSD_TOL: f64 = 1e-8;

impl DensityMatrix1D {
    pub fn new(grid: GridSpec1D, elems: Array2<C64>) -> Result<Self> {
        if elems.dim() != (grid.n(), grid.n()) {
            return Err(Error::mismatch(format!(
                "density matrix {:?} for a {}-point grid",
                elems.dim(),
                grid.n()
            )));
        }
        let dev = hermitian_deviation(&elems);
        let scale = elems.iter().map(|v| v.norm()).fold(1.0, f64::max);
        if dev > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self { grid, elems })
    }

    /// Skips the Hermiticity check; for matrices Hermitian by construction.
    pub(crate) fn from_parts_unchecked(grid: GridSpec1D, elems: Array2<C64>) -> Self {
        Self { grid, elems }
    }

    pub fn from_pure(psi: &WaveFunction1D) -> Self {
        let a = psi.amps();
        let n = a.len();
        let elems = Array2::from_shape_fn((n, n), |(j, k)| a[j] * a[k].conj());
        Self {
            grid: *psi.grid(),
            elems,
        }
    }

    pub fn grid(&self) -> &GridSpec1D {
        &self.grid
    }

    pub fn elems(&self) -> &Array2<C64> {
        &self.elems
    }

    pub fn trace(&self) -> f64 {
        self.elems.diag().iter().map(|v| v.re).sum::<f64>() * self.grid.dx()
    }

    /// `Tr ρ̂²`.
    pub fn purity(&self) -> f64 {
        let dx = self.grid.dx();
        self.elems.iter().map(|v| v.norm_sqr()).sum::<f64>() * dx * dx
    }

    pub fn hermitian_deviation(&self) -> f64 {
        hermitian_deviation(&self.elems)
    }

    /// Eigenvalues of the operator `ρ̂`, i.e. of the matrix `ρ_jk·dx`, ascending.
    pub fn operator_eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = hermitian_operator(&self.elems, self.grid.dx())
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Checks Hermiticity, unit trace and positivity.
    pub fn validate(&self) -> Result<()> {
        let dev = self.hermitian_deviation();
        let scale = self.elems.iter().map(|v| v.norm()).fold(1.0, f64::max);
        if dev > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian(dev));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidDensity(format!("trace {tr}")));
        }
        let min = self.operator_eigenvalues()[0];
        if min < -PSD_TOL {
            return Err(Error::InvalidDensity(format!("eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    /// `½ Tr|ρ̂ - σ̂|`.
    pub fn trace_distance(&self, other: &DensityMatrix1D) -> Result<f64> {
        self.grid
            .require_same_lattice(&other.grid, "trace distance")?;
        let diff = &self.elems - &other.elems;
        let ev = hermitian_operator(&diff, self.grid.dx()).symmetric_eigenvalues();
        Ok(0.5 * ev.iter().map(|v| v.abs()).sum::<f64>())
    }

    /// `⟨ψ|ρ̂|ψ⟩`.
    pub fn fidelity_with_pure(&self, psi: &WaveFunction1D) -> Result<f64> {
        self.grid.require_same_lattice(psi.grid(), "fidelity")?;
        let a = psi.amps();
        let dx = self.grid.dx();
        let mut acc = C64::new(0.0, 0.0);
        for ((j, k), v) in self.elems.indexed_iter() {
            acc += a[j].conj() * v * a[k];
        }
        Ok(acc.re * dx * dx)
    }

    /// Complex conjugate, i.e. the transpose of a Hermitian matrix.
    pub fn conj(&self) -> Self {
        Self {
            grid: self.grid,
            elems: self.elems.mapv(|v| v.conj()),
        }
    }

    /// Zero-padded or cropped copy on a centered lattice of `n` points.
    pub fn recentered(&self, n: usize) -> Result<Self> {
        if !self.grid.is_centered() {
            return Err(Error::mismatch("recentering needs a centered source lattice"));
        }
        let grid = self.grid.centered_with(n)?;
        let src_n = self.grid.n() as isize;
        let shift = (self.grid.n() / 2) as isize - (n / 2) as isize;
        let elems = Array2::from_shape_fn((n, n), |(i, j)| {
            let (si, sj) = (i as isize + shift, j as isize + shift);
            if si >= 0 && sj >= 0 && si < src_n && sj < src_n {
                self.elems[[si as usize, sj as usize]]
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Ok(Self { grid, elems })
    }

    pub(crate) fn half_step_samples(&self) -> Array2<C64> {
        upsample2_2d(&self.elems)
    }
}

fn hermitian_deviation(m: &Array2<C64>) -> f64 {
    let mut dev = 0.0f64;
    for ((j, k), v) in m.indexed_iter() {
        if k >= j {
            dev = dev.max((v - m[[k, j]].conj()).norm());
        }
    }
    dev
}

fn hermitian_operator(m: &Array2<C64>, dx: f64) -> DMatrix<C64> {
    let n = m.nrows();
    DMatrix::from_fn(n, n, |j, k| {
        // symmetrize so the eigen-solver sees an exactly Hermitian input
        (m[[j, k]] + m[[k, j]].conj()) * (0.5 * dx)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn gaussian(grid: GridSpec1D, lambda: f64) -> WaveFunction1D {
        let c = (PI * lambda * lambda).powf(-0.25);
        WaveFunction1D::from_fn(grid, |x| C64::new(c * (-x * x / (2.0 * lambda * lambda)).exp(), 0.0))
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec1D::new(0.0, 100, 0.1, 1.0).is_err());
        assert!(GridSpec1D::new(0.0, 128, 0.0, 1.0).is_err());
        assert!(GridSpec1D::new(0.0, 128, 0.1, -1.0).is_err());
        let g = GridSpec1D::centered(256, 0.125, 1.0).unwrap();
        assert!(g.is_centered());
        assert_abs_diff_eq!(g.coord(128), 0.0);
        assert_abs_diff_eq!(g.dp(), 2.0 * PI / 32.0, epsilon = 1e-15);
        let pg = g.momentum_grid();
        assert!(pg.is_centered());
        assert_abs_diff_eq!(pg.coord(128), 0.0);
    }

    #[test]
    fn uniform_normalization() {
        let g = GridSpec1D::new(0.0, 8, 1.0, 1.0).unwrap();
        let w = WaveFunction1D::new(g, vec![C64::new(3.0, 0.0); 8]).unwrap();
        let w = w.normalize().unwrap();
        for a in w.amps() {
            assert_abs_diff_eq!(a.re, 1.0 / 8f64.sqrt(), epsilon = 1e-15);
        }
    }

    #[test]
    fn normalize_is_idempotent_and_rejects_zero() {
        let g = GridSpec1D::centered(256, 0.125, 1.0).unwrap();
        let w = gaussian(g, 1.0).normalize().unwrap();
        let w2 = w.normalize().unwrap();
        for (a, b) in w.amps().iter().zip(w2.amps()) {
            assert!((a - b).norm() <= 1e-12 * a.norm().max(1e-300));
        }
        let z = WaveFunction1D::new(g, vec![C64::new(0.0, 0.0); 256]).unwrap();
        assert!(matches!(z.normalize(), Err(Error::ZeroNorm)));
    }

    #[test]
    fn gaussian_momentum_width() {
        // analytic transform of the λ=1 Gaussian has Δp = ħ/(√2 λ)
        let g = GridSpec1D::centered(256, 0.125, 1.0).unwrap();
        let m = gaussian(g, 1.0).to_momentum_rep().unwrap();
        let var = m.expect_fn(|p| p * p);
        assert_abs_diff_eq!(var.sqrt(), 1.0 / 2f64.sqrt(), epsilon = 1e-10);
        // quadrature oracle at a few momenta
        for &p in &[0.0, 0.7, -1.3] {
            let j = m.grid().nearest_index(p).unwrap();
            let pj = m.grid().coord(j);
            let direct: C64 = g
                .coords()
                .map(|x| C64::from_polar(1.0, -pj * x) * (PI.powf(-0.25) * (-x * x / 2.0).exp()))
                .sum::<C64>()
                * g.dx()
                / (2.0 * PI).sqrt();
            assert!((direct - m.amps()[j]).norm() < 1e-12);
        }
    }

    #[test]
    fn momentum_shift_theorem() {
        let g = GridSpec1D::centered(256, 0.125, 1.0).unwrap();
        let p0 = 3.0 * g.dp();
        let base = gaussian(g, 1.0);
        let shifted = WaveFunction1D::from_fn(g, |x| base.amps()[g.nearest_index(x).unwrap()] * C64::from_polar(1.0, p0 * x));
        let mb = base.to_momentum_rep().unwrap();
        let ms = shifted.to_momentum_rep().unwrap();
        for j in 3..256 {
            assert!((ms.amps()[j].norm() - mb.amps()[j - 3].norm()).abs() < 1e-12);
        }
        assert_abs_diff_eq!(shifted.mean_momentum().unwrap(), p0, epsilon = 1e-10);
    }

    #[test]
    fn momentum_rep_refuses_leaky_state() {
        let g = GridSpec1D::centered(64, 0.125, 1.0).unwrap();
        let w = gaussian(g, 2.0);
        assert!(matches!(w.to_momentum_rep(), Err(Error::BoundaryLeak { .. })));
    }

    #[test]
    fn second_moment_of_gaussian() {
        let g = GridSpec1D::centered(256, 0.125, 1.0).unwrap();
        let w = gaussian(g, 1.0);
        let ones = vec![1.0; 256];
        let xs: Vec<f64> = g.coords().collect();
        let x2: Vec<f64> = g.coords().map(|x| x * x).collect();
        assert_abs_diff_eq!(w.expect_multiplicative(&ones).unwrap(), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(w.expect_multiplicative(&xs).unwrap(), 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(w.expect_multiplicative(&x2).unwrap(), 0.5, epsilon = 1e-6);
        assert!(w.expect_multiplicative(&ones[..10]).is_err());
    }

    fn product_gaussian(sig0: f64, sig1: f64) -> WaveFunction2D {
        let a = GridSpec1D::centered(128, 0.2, 1.0).unwrap();
        let grid = GridSpec2D::new(a, a, ["eps_xi", "eps_xf"]);
        WaveFunction2D::from_fn(grid, |u, v| {
            C64::new((-u * u / (2.0 * sig0 * sig0) - v * v / (2.0 * sig1 * sig1)).exp(), 0.0)
        })
        .normalize()
        .unwrap()
    }

    #[test]
    fn derivative_expectations_of_gaussian() {
        let w = product_gaussian(1.3, 0.8);
        assert_abs_diff_eq!(w.partial_derivative_expectation(0, 1).unwrap(), 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(w.partial_derivative_expectation(1, 1).unwrap(), 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(
            w.partial_derivative_expectation(0, 2).unwrap(),
            1.0 / (2.0 * 1.3 * 1.3),
            epsilon = 1e-6
        );
        assert_abs_diff_eq!(
            w.partial_derivative_expectation(1, 2).unwrap(),
            1.0 / (2.0 * 0.8 * 0.8),
            epsilon = 1e-6
        );
        assert!(w.partial_derivative_expectation(0, 3).is_err());
    }

    #[test]
    fn density_matrix_checks() {
        let g = GridSpec1D::centered(64, 0.25, 1.0).unwrap();
        let psi = gaussian(g, 1.0).normalize().unwrap();
        let rho = DensityMatrix1D::from_pure(&psi);
        rho.validate().unwrap();
        assert_abs_diff_eq!(rho.purity(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rho.fidelity_with_pure(&psi).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rho.trace_distance(&rho).unwrap(), 0.0, epsilon = 1e-12);
        let mut bad = rho.elems().clone();
        bad[[3, 5]] += C64::new(0.0, 1e-3);
        assert!(matches!(DensityMatrix1D::new(g, bad), Err(Error::NotHermitian(_))));
    }
}
