//! Measurement kernels `K(x, μX, μP; x')`, their marginal kernels and the
//! convolution form of the pointer marginals.
//!
//! Kernels live on a coarse lattice treated as a ring: coordinate
//! differences are taken as minimal images, which makes the discretized
//! delta functions exact. The `μP` axis is the lattice conjugate to `x`.

use ndarray::{s, Array2, Array3, Array4};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::apparatus::ApparatusState;
use crate::error::{Error, Result};
use crate::fourier::{line_to_momentum, LineFft};
use crate::grid::{GridSpec1D, WaveFunction1D};
use crate::report::Verdict;

type C64 = Complex64;

/// Largest convolution-form residual accepted by [`prugovecki_sigmas`].
pub const FORM_TOL: f64 = 1e-3;

/// Default number of points per kernel axis.
pub const COARSE_N: usize = 64;

/// Centered ring of `n` points whose position and momentum extents are equal,
/// `dx = (2πħ/n)^{1/2}`.
pub fn kernel_axis(n: usize, hbar: f64) -> Result<GridSpec1D> {
    GridSpec1D::centered(n, (2.0 * std::f64::consts::PI * hbar / n as f64).sqrt(), hbar)
}

/// Largest unitarity residue accepted.
pub const UNITARITY_TOL: f64 = 1e-4;

/// Convolution-form residual expected of Arthurs-Kelly kernels.
pub const AK_FORM_TOL: f64 = 1e-6;

/// Signed minimal-image difference `i - k` on a ring of `n` sites.
#[inline]
fn ring_diff(i: usize, k: usize, n: usize) -> isize {
    let n = n as isize;
    let d = (i as isize - k as isize).rem_euclid(n);
    if d >= n / 2 {
        d - n
    } else {
        d
    }
}

/// Ring index of the difference `i - k` on a centered lattice.
#[inline]
fn ring_index(i: usize, k: usize, n: usize) -> usize {
    (ring_diff(i, k, n) + (n / 2) as isize) as usize
}

/// `K[x, μX, μP, x']` on a ring lattice.
#[derive(Clone, Debug)]
pub struct MeasurementKernel {
    pub axis: GridSpec1D,
    pub mu_p_axis: GridSpec1D,
    pub values: Array4<C64>,
}

/// `K = h^{-1/2} e^{iμP(x-x')/ħ} φ(μX - x', μX - x)` for an Arthurs-Kelly apparatus.
pub fn extract_kernel_ak(ap: &ApparatusState) -> Result<MeasurementKernel> {
    let axis = ap.axis();
    ap.wf().check_boundary("kernel apparatus state")?;
    let n = axis.n();
    let pg = axis.momentum_grid();
    let hbar = axis.hbar();
    let pre = 1.0 / axis.h().sqrt();
    let phi = ap.amps();
    let values = Array4::from_shape_fn((n, n, n, n), |(x, a, l, xp)| {
        let v = phi[[ring_index(a, xp, n), ring_index(a, x, n)]];
        v * C64::from_polar(pre, pg.coord(l) * (axis.coord(x) - axis.coord(xp)) / hbar)
    });
    Ok(MeasurementKernel {
        axis,
        mu_p_axis: pg,
        values,
    })
}

/// `K = h^{-1/2} e^{iμP x/ħ} u(μX - x) v(x')`: marginal kernels of rank one
/// in `(x₁, x₂)`, hence far from convolution form.
pub fn synthetic_kernel(u: &WaveFunction1D, v: &WaveFunction1D) -> Result<MeasurementKernel> {
    let axis = *u.grid();
    axis.require_same_lattice(v.grid(), "synthetic kernel factors")?;
    if !axis.is_centered() {
        return Err(Error::mismatch("kernel lattice must be centered"));
    }
    let n = axis.n();
    let pg = axis.momentum_grid();
    let hbar = axis.hbar();
    let pre = 1.0 / axis.h().sqrt();
    let (ua, va) = (u.amps(), v.amps());
    let values = Array4::from_shape_fn((n, n, n, n), |(x, a, l, xp)| {
        ua[ring_index(a, x, n)] * va[xp] * C64::from_polar(pre, pg.coord(l) * axis.coord(x) / hbar)
    });
    Ok(MeasurementKernel {
        axis,
        mu_p_axis: pg,
        values,
    })
}

/// Deviation of `∫dx dμX dμP K(·;x₁)K*(·;x₂)` from `δ(x₁-x₂)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitarityResidue {
    /// Largest off-diagonal element times `dx`.
    pub off_diagonal: f64,
    /// Largest `|dx·U(x,x) - 1|`.
    pub diagonal: f64,
}

impl UnitarityResidue {
    /// Residue of `∫dμ f(μ; y₁, y₂)` against `δ(y₁ - y₂)`.
    pub fn from_marginal(f: &MarginalKernel) -> Self {
        let dx = f.axis.dx();
        let mut off: f64 = 0.0;
        let mut diag: f64 = 0.0;
        for ((i, j), v) in f.delta_check().indexed_iter() {
            if i == j {
                diag = diag.max((v * dx - 1.0).norm());
            } else {
                off = off.max(v.norm() * dx);
            }
        }
        UnitarityResidue {
            off_diagonal: off,
            diagonal: diag,
        }
    }
}

impl MeasurementKernel {
    fn n(&self) -> usize {
        self.axis.n()
    }

    /// Computed as `∫dμX f_X`, which is the same sum.
    pub fn unitarity_residue(&self) -> UnitarityResidue {
        let fx = marginal(&self.values, self.axis.dx() * self.mu_p_axis.dx(), self.axis, Quadrature::Position, false);
        UnitarityResidue::from_marginal(&fx)
    }

    /// `∫dx' K(x, μX, μP; x') ψ(x')`, indexed `[x, μX, μP]`.
    pub fn apply(&self, psi: &WaveFunction1D) -> Result<Array3<C64>> {
        self.axis.require_same_lattice(psi.grid(), "kernel application")?;
        let n = self.n();
        let dx = self.axis.dx();
        let a = psi.amps();
        Ok(Array3::from_shape_fn((n, n, n), |(x, m, l)| {
            (0..n).map(|xp| self.values[[x, m, l, xp]] * a[xp]).sum::<C64>() * dx
        }))
    }

    /// `K̃(p, μX, μP; p') = (1/h)∫dx dx' e^{i(p'x' - px)/ħ} K(x, μX, μP; x')`.
    pub fn momentum_kernel(&self) -> Array4<C64> {
        let n = self.n();
        let axis = self.axis;
        let fft = LineFft::new(n);
        let mut out = self.values.clone();
        let mut line = vec![C64::new(0.0, 0.0); n];
        for a in 0..n {
            for l in 0..n {
                for xp in 0..n {
                    for x in 0..n {
                        line[x] = out[[x, a, l, xp]];
                    }
                    line_to_momentum(&axis, &fft, &mut line);
                    for x in 0..n {
                        out[[x, a, l, xp]] = line[x];
                    }
                }
                for p in 0..n {
                    for xp in 0..n {
                        line[xp] = out[[p, a, l, xp]].conj();
                    }
                    line_to_momentum(&axis, &fft, &mut line);
                    for xp in 0..n {
                        out[[p, a, l, xp]] = line[xp].conj();
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quadrature {
    Position,
    Momentum,
}

/// `f(μ; y₁, y₂)` indexed `[μ, y₁, y₂]`; `axis` carries both `μ` and `y`.
#[derive(Clone, Debug)]
pub struct MarginalKernel {
    pub quadrature: Quadrature,
    pub axis: GridSpec1D,
    pub values: Array3<C64>,
}

impl MarginalKernel {
    /// `∫dμ f(μ; y₁, y₂)`, which should equal `δ(y₁ - y₂)`.
    pub fn delta_check(&self) -> Array2<C64> {
        let n = self.axis.n();
        let d = self.axis.dx();
        Array2::from_shape_fn((n, n), |(i, j)| (0..n).map(|m| self.values[[m, i, j]]).sum::<C64>() * d)
    }
}

/// `f[m](y₁, y₂) = weight · Σ k(·, ·; y₁) k*(·, ·; y₂)` with the marginal index
/// `m` on axis 1 (`f_X`) or axis 2 (`f_P`) and the other two axes summed.
fn marginal(k: &Array4<C64>, weight: f64, axis: GridSpec1D, quadrature: Quadrature, sum_over_mu_x: bool) -> MarginalKernel {
    let n = axis.n();
    let rows: Vec<Array2<C64>> = (0..n)
        .into_par_iter()
        .map(|m| {
            let slab = if sum_over_mu_x {
                k.slice(s![.., .., m, ..])
            } else {
                k.slice(s![.., m, .., ..])
            };
            let a = slab
                .to_owned()
                .into_shape_with_order((n * n, n))
                .expect("contiguous slab");
            let mut f = a.t().dot(&a.mapv(|v| v.conj()));
            f *= C64::new(weight, 0.0);
            f
        })
        .collect();
    let mut values = Array3::zeros((n, n, n));
    for (m, f) in rows.into_iter().enumerate() {
        values.slice_mut(s![m, .., ..]).assign(&f);
    }
    MarginalKernel {
        quadrature,
        axis,
        values,
    }
}

/// `(f_X, f_P)`: `f_X` integrates `K K*` over `x` and `μP`; `f_P` integrates
/// `K̃ K̃*` over `p` and `μX`.
pub fn marginal_kernels(k: &MeasurementKernel) -> (MarginalKernel, MarginalKernel) {
    let fx = marginal(
        &k.values,
        k.axis.dx() * k.mu_p_axis.dx(),
        k.axis,
        Quadrature::Position,
        false,
    );
    let kt = k.momentum_kernel();
    let fp = marginal(
        &kt,
        k.mu_p_axis.dx() * k.axis.dx(),
        k.mu_p_axis,
        Quadrature::Momentum,
        true,
    );
    (fx, fp)
}

/// Diagonal profile `χ₀(d)` (index `d + n/2`) and the deviation from the
/// form `f(μ; y₁, y₂) = χ₀(μ - y₁) δ(y₂ - y₁)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionForm {
    pub quadrature: Quadrature,
    pub axis: GridSpec1D,
    pub chi0: Vec<f64>,
    /// Off-diagonal mass fraction plus relative departure from shift invariance.
    pub residual: f64,
}

impl ConvolutionForm {
    /// Displacement coordinates matching `chi0`.
    pub fn displacements(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.axis.n();
        let d = self.axis.dx();
        (0..n).map(move |k| (k as f64 - (n / 2) as f64) * d)
    }

    pub fn mass(&self) -> f64 {
        self.chi0.iter().sum::<f64>() * self.axis.dx()
    }

    /// `(∫d χ₀, ∫d² χ₀)`.
    pub fn moments(&self) -> (f64, f64) {
        let d = self.axis.dx();
        let (mut m1, mut m2) = (0.0, 0.0);
        for (c, x) in self.chi0.iter().zip(self.displacements()) {
            m1 += c * x * d;
            m2 += c * x * x * d;
        }
        (m1, m2)
    }

    /// Standard deviation of `χ₀`.
    pub fn sigma(&self) -> f64 {
        let (m1, m2) = self.moments();
        (m2 - m1 * m1).max(0.0).sqrt()
    }
}

pub fn detect_convolution_form(f: &MarginalKernel) -> ConvolutionForm {
    let n = f.axis.n();
    let d = f.axis.dx();
    let mut total = 0.0;
    let mut off = 0.0;
    for ((_, i, j), v) in f.values.indexed_iter() {
        total += v.norm();
        if i != j {
            off += v.norm();
        }
    }
    let diag = Array2::from_shape_fn((n, n), |(m, y)| f.values[[m, y, y]].re * d);
    let mut chi0 = vec![0.0; n];
    for m in 0..n {
        for y in 0..n {
            chi0[ring_index(m, y, n)] += diag[[m, y]] / n as f64;
        }
    }
    let mut dev = 0.0;
    let mut dsum = 0.0;
    for m in 0..n {
        for y in 0..n {
            dev += (diag[[m, y]] - chi0[ring_index(m, y, n)]).abs();
            dsum += diag[[m, y]].abs();
        }
    }
    let residual = if total > 0.0 { off / total } else { 0.0 } + if dsum > 0.0 { dev / dsum } else { 0.0 };
    ConvolutionForm {
        quadrature: f.quadrature,
        axis: f.axis,
        chi0,
        residual,
    }
}

/// `(σ_X, σ_P)`, the standard deviations of `χ_X0` and `χ_P0`.
pub fn prugovecki_sigmas(cx: &ConvolutionForm, cp: &ConvolutionForm) -> Result<(f64, f64)> {
    for c in [cx, cp] {
        if !(c.residual <= FORM_TOL) {
            return Err(Error::FormViolation { residual: c.residual });
        }
    }
    Ok((cx.sigma(), cp.sigma()))
}

/// `(∫dμ dy₁ dy₂ (μ - y₁)(μ - y₂) f(μ; y₁, y₂) ⟨y₁|ψ⟩⟨ψ|y₂⟩)^{1/2}`, in the
/// representation matching the kernel's quadrature.
pub fn rms_from_marginal(f: &MarginalKernel, psi: &WaveFunction1D) -> Result<f64> {
    let amps = match f.quadrature {
        Quadrature::Position => {
            f.axis.require_same_lattice(psi.grid(), "marginal kernel")?;
            psi.amps().to_vec()
        }
        Quadrature::Momentum => {
            f.axis.require_same_lattice(&psi.grid().momentum_grid(), "marginal kernel")?;
            psi.to_momentum_rep()?.into_amps()
        }
    };
    let n = f.axis.n();
    let d = f.axis.dx();
    let mut acc = C64::new(0.0, 0.0);
    for m in 0..n {
        for y1 in 0..n {
            let d1 = ring_diff(m, y1, n) as f64 * d;
            for y2 in 0..n {
                let d2 = ring_diff(m, y2, n) as f64 * d;
                acc += d1 * d2 * f.values[[m, y1, y2]] * amps[y1] * amps[y2].conj();
            }
        }
    }
    Ok((acc.re * d * d * d).max(0.0).sqrt())
}

/// `∫dμX ρ(μX, μP)` with `ρ = ∫dx |∫dx' K ψ|²`, the reference for the
/// momentum marginal kernel.
pub fn momentum_outcome_marginal(k: &MeasurementKernel, psi: &WaveFunction1D) -> Result<Vec<f64>> {
    let joint = k.apply(psi)?;
    let n = k.n();
    let d = k.axis.dx();
    Ok((0..n)
        .map(|l| {
            let mut s = 0.0;
            for x in 0..n {
                for a in 0..n {
                    s += joint[[x, a, l]].norm_sqr();
                }
            }
            s * d * d
        })
        .collect())
}

/// `∫dp₁dp₂ f_P(μP; p₁, p₂) ψ̃(p₁) ψ̃*(p₂)`.
pub fn contract_marginal(f: &MarginalKernel, psi: &WaveFunction1D) -> Result<Vec<f64>> {
    let amps = match f.quadrature {
        Quadrature::Position => {
            f.axis.require_same_lattice(psi.grid(), "marginal kernel")?;
            psi.amps().to_vec()
        }
        Quadrature::Momentum => psi.to_momentum_rep()?.into_amps(),
    };
    let n = f.axis.n();
    let d = f.axis.dx();
    Ok((0..n)
        .map(|m| {
            let mut s = C64::new(0.0, 0.0);
            for y1 in 0..n {
                for y2 in 0..n {
                    s += f.values[[m, y1, y2]] * amps[y1] * amps[y2].conj();
                }
            }
            s.re * d * d
        })
        .collect())
}

/// Every kernel-route check for one apparatus family. `fine` is the same
/// family on a finer lattice, used for the operator-route errors; `probes`
/// are two system states on the kernel lattice.
pub fn appendix_verdicts(
    label: &str,
    coarse: &ApparatusState,
    fine: &ApparatusState,
    probes: [&WaveFunction1D; 2],
) -> Result<Vec<Verdict>> {
    let k = extract_kernel_ak(coarse)?;
    let name = |s: &str| format!("{label}/{s}");
    let mut v = Vec::new();
    let (fx, fp) = marginal_kernels(&k);
    let u = UnitarityResidue::from_marginal(&fx);
    v.push(Verdict::upper_bound(name("unitarity_off_diagonal"), u.off_diagonal, UNITARITY_TOL));
    v.push(Verdict::upper_bound(name("unitarity_diagonal"), u.diagonal, UNITARITY_TOL));

    let cx = detect_convolution_form(&fx);
    let cp = detect_convolution_form(&fp);
    v.push(Verdict::upper_bound(name("form_residual_x"), cx.residual, AK_FORM_TOL));
    v.push(Verdict::upper_bound(name("form_residual_p"), cp.residual, AK_FORM_TOL));
    v.push(Verdict::equality(name("chi_x0_mass"), cx.mass(), 1.0, 1e-4));
    v.push(Verdict::equality(name("chi_p0_mass"), cp.mass(), 1.0, 1e-4));

    let ops = fine.error_report()?;
    let (sx, sp) = prugovecki_sigmas(&cx, &cp)?;
    let (mx, mp) = (ops.means.eps_xi, ops.means.eps_pi);
    v.push(Verdict::equality(name("sigma_x"), sx, (ops.dei_x.powi(2) - mx * mx).sqrt(), 1e-6));
    v.push(Verdict::equality(name("sigma_p"), sp, (ops.dei_p.powi(2) - mp * mp).sqrt(), 1e-6));

    let mut rms = Vec::new();
    for (i, psi) in probes.iter().enumerate() {
        let rx = rms_from_marginal(&fx, psi)?;
        let rp = rms_from_marginal(&fp, psi)?;
        v.push(Verdict::equality(name(&format!("rms_x_psi{i}")), rx, ops.dei_x, 1e-4));
        v.push(Verdict::equality(name(&format!("rms_p_psi{i}")), rp, ops.dei_p, 1e-4));
        rms.push((rx, rp));
    }
    v.push(Verdict::equality(name("rms_x_psi_independence"), rms[0].0, rms[1].0, 1e-6));
    v.push(Verdict::equality(name("rms_p_psi_independence"), rms[0].1, rms[1].1, 1e-6));

    let direct = momentum_outcome_marginal(&k, probes[0])?;
    let via_fp = contract_marginal(&fp, probes[0])?;
    let gap = direct.iter().zip(&via_fp).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    v.push(Verdict::upper_bound(name("f_p_route_gap"), gap, 1e-5));
    Ok(v)
}

/// Appendix checks over the four Arthurs-Kelly families (retrodictively,
/// predictively and completely optimal, minimally disturbing) on a ring of
/// `n` points. Widths scale with `√ħ`.
pub fn appendix_suite(n: usize, hbar: f64) -> Result<Vec<Verdict>> {
    use crate::apparatus::{
        make_completely_optimal, make_minimally_disturbing, make_predictively_optimal, make_retrodictively_optimal,
    };
    use crate::states::{cat_wavefunction, coherent_wavefunction, CoherentStateParams};

    let s = hbar.sqrt();
    let coarse = kernel_axis(n, hbar)?;
    let fine = GridSpec1D::centered(256, 0.125 * s, hbar)?;
    let bimodal = |ax: GridSpec1D| cat_wavefunction(3.0 * s, 0.7 * s, 0.0, ax);
    let probes = [
        coherent_wavefunction(CoherentStateParams::new(0.5 * s, 0.3 * s, s)?, coarse)?,
        cat_wavefunction(2.0 * s, 0.8 * s, 0.4, coarse)?,
    ];
    type Make<'a> = Box<dyn Fn(GridSpec1D) -> Result<ApparatusState> + 'a>;
    let families: Vec<(&str, Make)> = vec![
        ("retro_opt", Box::new(|ax| make_retrodictively_optimal(s, &bimodal(ax)?))),
        ("pred_opt", Box::new(|ax| make_predictively_optimal(s, &bimodal(ax)?))),
        ("complete_opt", Box::new(|ax| make_completely_optimal(0.8 * s, 1.25 * s, ax))),
        ("min_disturb", Box::new(|ax| make_minimally_disturbing(s, 0.5, ax))),
    ];
    let mut out = Vec::new();
    for (label, make) in families {
        out.extend(appendix_verdicts(label, &make(coarse)?, &make(fine)?, [&probes[0], &probes[1]])?);
    }
    let u = coherent_wavefunction(CoherentStateParams::new(0.0, 0.0, s)?, coarse)?;
    let w = coherent_wavefunction(CoherentStateParams::new(0.5 * s, 0.0, 0.7 * s)?, coarse)?;
    let (fx, _) = marginal_kernels(&synthetic_kernel(&u, &w)?);
    out.push(Verdict::lower_bound("synthetic/form_residual_x", detect_convolution_form(&fx).residual, 0.1));
    Ok(out)
}
