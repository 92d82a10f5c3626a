//! Apparatus states on the `(εXi, εXf)` lattice, the standard families of
//! optimal states, and the rms error and disturbance figures they imply.
//!
//! Operator realizations on `φ(εXi, εXf)`:
//!
//! * `ε̂Xi`, `ε̂Xf` multiply by the coordinate;
//! * `ε̂Pi = +iħ ∂/∂εXi`, `ε̂Pf = -iħ ∂/∂εXf`;
//! * `δ̂X = ε̂Xi - ε̂Xf`, `δ̂P = ε̂Pi - ε̂Pf`, `ε̂X = (ε̂Xi + ε̂Xf)/2`, `ε̂P = (ε̂Pi + ε̂Pf)/2`.
//!
//! In the momentum representation `(qi, qf)` conjugate to `(εXi, εXf)` under
//! `-iħ∂`, this gives `ε̂Pi = -qi` and `ε̂Pf = qf`.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{line_to_momentum, LineFft};
use crate::grid::{DensityMatrix1D, GridSpec1D, GridSpec2D, WaveFunction1D, WaveFunction2D};

type C64 = Complex64;

pub const AXIS_NAMES: [&str; 2] = ["eps_xi", "eps_xf"];
/// Reduced-state purity below which an apparatus state is treated as entangled.
pub const FACTORIZATION_TOL: f64 = 1e-8;
/// Allowed norm change when resampling onto `(μX, πP)`.
pub const RESAMPLING_TOL: f64 = 1e-8;

/// Pure apparatus state `φ(εXi, εXf)`; both axes share one centered lattice.
#[derive(Clone, Debug)]
pub struct ApparatusState {
    wf: WaveFunction2D,
}

impl ApparatusState {
    /// Normalizes `wf` and checks that it decays before the lattice edge.
    pub fn new(wf: WaveFunction2D) -> Result<Self> {
        let [a, b] = wf.grid().axes;
        a.require_same_lattice(&b, "apparatus axes")?;
        if !a.is_centered() {
            return Err(Error::mismatch("apparatus lattice must be centered on zero"));
        }
        wf.check_boundary("apparatus state")?;
        Ok(Self { wf: wf.normalize()? })
    }

    pub fn from_fn(axis: GridSpec1D, f: impl Fn(f64, f64) -> C64) -> Result<Self> {
        Self::new(WaveFunction2D::from_fn(epsilon_grid(axis), f))
    }

    pub fn wf(&self) -> &WaveFunction2D {
        &self.wf
    }

    /// The shared `ε` lattice.
    pub fn axis(&self) -> GridSpec1D {
        self.wf.grid().axes[0]
    }

    pub fn hbar(&self) -> f64 {
        self.axis().hbar()
    }

    pub fn amps(&self) -> &Array2<C64> {
        self.wf.amps()
    }

    /// `ρ_εi(ε, ε') = ∫dεXf φ(ε, εXf) φ*(ε', εXf)`.
    pub fn reduced_epsilon_density(&self) -> DensityMatrix1D {
        let a = self.wf.amps();
        let n = a.nrows();
        let d = self.axis().dx();
        let mut m = Array2::<C64>::zeros((n, n));
        for i in 0..n {
            for j in i..n {
                let v: C64 = a.row(i).iter().zip(a.row(j).iter()).map(|(x, y)| x * y.conj()).sum::<C64>() * d;
                m[[i, j]] = v;
                m[[j, i]] = v.conj();
            }
        }
        DensityMatrix1D::from_parts_unchecked(self.axis(), m)
    }

    /// `ρ_εf(ε, ε') = ∫dεXi φ(εXi, ε) φ*(εXi, ε')`.
    pub fn reduced_final_density(&self) -> DensityMatrix1D {
        let a = self.wf.amps();
        let n = a.ncols();
        let d = self.axis().dx();
        let mut m = Array2::<C64>::zeros((n, n));
        for i in 0..n {
            for j in i..n {
                let v: C64 = a
                    .column(i)
                    .iter()
                    .zip(a.column(j).iter())
                    .map(|(x, y)| x * y.conj())
                    .sum::<C64>()
                    * d;
                m[[i, j]] = v;
                m[[j, i]] = v.conj();
            }
        }
        DensityMatrix1D::from_parts_unchecked(self.axis(), m)
    }

    /// Splits a product state into `(φ_i, φ_f)` with `φ = φ_i ⊗ φ_f`.
    pub fn factorize(&self) -> Result<(WaveFunction1D, WaveFunction1D)> {
        let purity = self.reduced_epsilon_density().purity();
        if purity < 1.0 - FACTORIZATION_TOL {
            return Err(Error::NotFactorized { purity });
        }
        let a = self.wf.amps();
        let axis = self.axis();
        let d = axis.dx();
        let col = (0..a.ncols())
            .max_by(|&x, &y| {
                let nx: f64 = a.column(x).iter().map(|v| v.norm_sqr()).sum();
                let ny: f64 = a.column(y).iter().map(|v| v.norm_sqr()).sum();
                nx.total_cmp(&ny)
            })
            .unwrap_or(0);
        let phi_i = WaveFunction1D::new(axis, a.column(col).to_vec())?.normalize()?;
        let pi = phi_i.amps();
        let phi_f: Vec<C64> = (0..a.ncols())
            .map(|j| a.column(j).iter().zip(pi).map(|(x, p)| p.conj() * x).sum::<C64>() * d)
            .collect();
        Ok((phi_i, WaveFunction1D::new(axis, phi_f)?))
    }

    /// Rms errors and disturbances together with the moments they are built from.
    pub fn error_report(&self) -> Result<ErrorReport> {
        let hbar = self.hbar();
        let w = &self.wf;
        let ex_i2 = w.expect_fn(|a, _| a * a);
        let ex_f2 = w.expect_fn(|_, b| b * b);
        let dx2 = w.expect_fn(|a, b| (a - b) * (a - b));
        let ex2 = w.expect_fn(|a, b| 0.25 * (a + b) * (a + b));
        let exdx = w.expect_fn(|a, b| 0.5 * (a + b) * (a - b));
        let m_xi = w.expect_fn(|a, _| a);
        let m_xf = w.expect_fn(|_, b| b);

        let q = w.to_momentum_rep()?;
        let qi2 = q.expect_fn(|a, _| a * a);
        let qf2 = q.expect_fn(|_, b| b * b);
        let dp2 = q.expect_fn(|a, b| (a + b) * (a + b));
        let ep2 = q.expect_fn(|a, b| 0.25 * (b - a) * (b - a));
        let epdp = q.expect_fn(|a, b| -0.5 * (b - a) * (a + b));
        let m_qi = q.expect_fn(|a, _| a);
        let m_qf = q.expect_fn(|_, b| b);

        Ok(ErrorReport {
            hbar,
            dei_x: ex_i2.sqrt(),
            dei_p: qi2.sqrt(),
            def_x: ex_f2.sqrt(),
            def_p: qf2.sqrt(),
            dd_x: dx2.sqrt(),
            dd_p: dp2.sqrt(),
            cross_term_x: exdx,
            cross_term_p: epdp,
            eps_x_sq: ex2,
            delta_x_sq: dx2,
            eps_p_sq: ep2,
            delta_p_sq: dp2,
            means: ErrorMeans {
                eps_xi: m_xi,
                eps_xf: m_xf,
                delta_x: m_xi - m_xf,
                eps_pi: -m_qi,
                eps_pf: m_qf,
                delta_p: -m_qi - m_qf,
            },
        })
    }

    /// Resamples onto `(μX, πP)` with `εXi = μX + πP/2`, `εXf = μX - πP/2`.
    ///
    /// Both output axes reuse the `ε` lattice; samples at half-step positions
    /// come from band-limited interpolation.
    pub fn to_mux_pip_rep(&self) -> Result<WaveFunction2D> {
        let axis = self.axis();
        let n = axis.n() as isize;
        let fine = self.wf.half_step_samples();
        let amps = Array2::from_shape_fn((n as usize, n as usize), |(a, b)| {
            let (a, b) = (a as isize - n / 2, b as isize - n / 2);
            let mi = 2 * a + b + n;
            let mf = 2 * a - b + n;
            if (0..2 * n).contains(&mi) && (0..2 * n).contains(&mf) {
                fine[[mi as usize, mf as usize]]
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let out = WaveFunction2D::new(GridSpec2D::new(axis, axis, ["mu_x", "pi_p"]), amps)?;
        let dev = (out.norm_sq() - 1.0).abs();
        if dev > RESAMPLING_TOL {
            return Err(Error::InterpolationError(dev));
        }
        Ok(out)
    }

    /// `(μX, μP)` representation: the `πP` axis of [`to_mux_pip_rep`](Self::to_mux_pip_rep)
    /// transformed with `h^{-1/2}∫dπP e^{+iμPπP/ħ}`.
    pub fn to_mux_mup_rep(&self) -> Result<WaveFunction2D> {
        let r = self.to_mux_pip_rep()?;
        let axis = self.axis();
        let n = axis.n();
        let fft = LineFft::new(n);
        let mut amps = r.amps().clone();
        let mut line = vec![C64::new(0.0, 0.0); n];
        for mut row in amps.rows_mut() {
            for (l, v) in line.iter_mut().zip(row.iter()) {
                *l = v.conj();
            }
            line_to_momentum(&axis, &fft, &mut line);
            for (v, l) in row.iter_mut().zip(&line) {
                *v = l.conj();
            }
        }
        WaveFunction2D::new(GridSpec2D::new(axis, axis.momentum_grid(), ["mu_x", "mu_p"]), amps)
    }
}

fn epsilon_grid(axis: GridSpec1D) -> GridSpec2D {
    GridSpec2D::new(axis, axis, AXIS_NAMES)
}

/// Centered lattice of `n` points covering `±half_width`.
pub fn epsilon_axis(n: usize, half_width: f64, hbar: f64) -> Result<GridSpec1D> {
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(Error::invalid(format!("half-width {half_width} must be positive")));
    }
    GridSpec1D::centered(n, 2.0 * half_width / n as f64, hbar)
}

/// Default half-width `max(8λi, 8λf, 8λe^{η/2})` over the supplied widths.
pub fn default_half_width(lambda_i: Option<f64>, lambda_f: Option<f64>, lambda_eta: Option<(f64, f64)>) -> f64 {
    let mut w: f64 = 0.0;
    if let Some(l) = lambda_i {
        w = w.max(8.0 * l);
    }
    if let Some(l) = lambda_f {
        w = w.max(8.0 * l);
    }
    if let Some((l, eta)) = lambda_eta {
        w = w.max(8.0 * l * (0.5 * eta).exp());
    }
    w
}

fn gaussian_factor(lambda: f64, e: f64) -> f64 {
    (PI * lambda * lambda).powf(-0.25) * (-e * e / (2.0 * lambda * lambda)).exp()
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} = {v} must be positive")))
    }
}

/// `(πλi²)^{-1/4} exp(-εXi²/2λi²) φ_f(εXf)` on `φ_f`'s lattice.
pub fn make_retrodictively_optimal(lambda_i: f64, phi_f: &WaveFunction1D) -> Result<ApparatusState> {
    positive("λi", lambda_i)?;
    let axis = *phi_f.grid();
    let f = phi_f.amps();
    let wf = WaveFunction2D::new(
        epsilon_grid(axis),
        Array2::from_shape_fn((axis.n(), axis.n()), |(i, j)| f[j] * gaussian_factor(lambda_i, axis.coord(i))),
    )?;
    ApparatusState::new(wf)
}

/// `φ_i(εXi) (πλf²)^{-1/4} exp(-εXf²/2λf²)` on `φ_i`'s lattice.
pub fn make_predictively_optimal(lambda_f: f64, phi_i: &WaveFunction1D) -> Result<ApparatusState> {
    positive("λf", lambda_f)?;
    let axis = *phi_i.grid();
    let f = phi_i.amps();
    let wf = WaveFunction2D::new(
        epsilon_grid(axis),
        Array2::from_shape_fn((axis.n(), axis.n()), |(i, j)| f[i] * gaussian_factor(lambda_f, axis.coord(j))),
    )?;
    ApparatusState::new(wf)
}

/// Product of Gaussians of widths `λi` and `λf`.
pub fn make_completely_optimal(lambda_i: f64, lambda_f: f64, axis: GridSpec1D) -> Result<ApparatusState> {
    positive("λi", lambda_i)?;
    positive("λf", lambda_f)?;
    ApparatusState::from_fn(axis, |a, b| C64::new(gaussian_factor(lambda_i, a) * gaussian_factor(lambda_f, b), 0.0))
}

/// `(√π λ)^{-1} exp[-(cosh η εXi² - 2 sinh η εXi εXf + cosh η εXf²)/2λ²]`.
pub fn make_minimally_disturbing(lambda: f64, eta: f64, axis: GridSpec1D) -> Result<ApparatusState> {
    positive("λ", lambda)?;
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::invalid(format!("η = {eta} must be ≥ 0")));
    }
    let (c, s) = (eta.cosh(), eta.sinh());
    let pre = 1.0 / (PI.sqrt() * lambda);
    ApparatusState::from_fn(axis, |a, b| {
        C64::new(pre * (-(c * a * a - 2.0 * s * a * b + c * b * b) / (2.0 * lambda * lambda)).exp(), 0.0)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorMeans {
    pub eps_xi: f64,
    pub eps_xf: f64,
    pub delta_x: f64,
    pub eps_pi: f64,
    pub eps_pf: f64,
    pub delta_p: f64,
}

/// Rms figures `√⟨Ô²⟩` (second moments about zero) plus the averaged-error moments.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub hbar: f64,
    pub dei_x: f64,
    pub dei_p: f64,
    pub def_x: f64,
    pub def_p: f64,
    pub dd_x: f64,
    pub dd_p: f64,
    /// `⟨ε̂X δ̂X⟩`.
    pub cross_term_x: f64,
    /// `⟨ε̂P δ̂P⟩`.
    pub cross_term_p: f64,
    pub eps_x_sq: f64,
    pub delta_x_sq: f64,
    pub eps_p_sq: f64,
    pub delta_p_sq: f64,
    pub means: ErrorMeans,
}

impl ErrorReport {
    /// The six product bounds as `(name, product, bound)`.
    pub fn products(&self) -> Vec<(&'static str, f64, f64)> {
        let half = 0.5 * self.hbar;
        vec![
            ("retrodictive_error_product", self.dei_x * self.dei_p, half),
            ("predictive_error_product", self.def_x * self.def_p, half),
            ("retro_x_disturbance_p", self.dei_x * self.dd_p, half),
            ("retro_p_disturbance_x", self.dei_p * self.dd_x, half),
            ("pred_x_disturbance_p", self.def_x * self.dd_p, half),
            ("pred_p_disturbance_x", self.def_p * self.dd_x, half),
        ]
    }

    /// Smallest `product - bound` over [`products`](Self::products).
    pub fn min_margin(&self) -> f64 {
        self.products().iter().map(|(_, v, b)| v - b).fold(f64::INFINITY, f64::min)
    }

    pub fn disturbance_product(&self) -> f64 {
        self.dd_x * self.dd_p
    }
}

/// Error and disturbance operators in their coordinate realization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorOperator {
    EpsXi,
    EpsXf,
    EpsPi,
    EpsPf,
    DeltaX,
    DeltaP,
    EpsX,
    EpsP,
}

impl ErrorOperator {
    pub const ALL: [ErrorOperator; 8] = [
        ErrorOperator::EpsXi,
        ErrorOperator::EpsXf,
        ErrorOperator::EpsPi,
        ErrorOperator::EpsPf,
        ErrorOperator::DeltaX,
        ErrorOperator::DeltaP,
        ErrorOperator::EpsX,
        ErrorOperator::EpsP,
    ];

    /// Position part `(ci, cf)` and momentum part `(di, df)` in
    /// `ci·εXi + cf·εXf + di·qi + df·qf`.
    fn coefficients(self) -> ([f64; 2], [f64; 2]) {
        use ErrorOperator::*;
        match self {
            EpsXi => ([1.0, 0.0], [0.0, 0.0]),
            EpsXf => ([0.0, 1.0], [0.0, 0.0]),
            EpsPi => ([0.0, 0.0], [-1.0, 0.0]),
            EpsPf => ([0.0, 0.0], [0.0, 1.0]),
            DeltaX => ([1.0, -1.0], [0.0, 0.0]),
            DeltaP => ([0.0, 0.0], [-1.0, -1.0]),
            EpsX => ([0.5, 0.5], [0.0, 0.0]),
            EpsP => ([0.0, 0.0], [-0.5, 0.5]),
        }
    }

    /// `Ô φ` on the lattice, with derivatives taken spectrally.
    pub fn apply(self, w: &WaveFunction2D) -> Result<WaveFunction2D> {
        let ([ci, cf], [di, df]) = self.coefficients();
        let mut out = Array2::<C64>::zeros(w.amps().dim());
        let [a, b] = w.grid().axes;
        if ci != 0.0 || cf != 0.0 {
            for ((i, j), v) in w.amps().indexed_iter() {
                out[[i, j]] += v * (ci * a.coord(i) + cf * b.coord(j));
            }
        }
        for (axis, d) in [(0usize, di), (1usize, df)] {
            if d == 0.0 {
                continue;
            }
            let m = w.axis_to_momentum(axis)?;
            let pg = m.grid().axes[axis];
            let scaled = Array2::from_shape_fn(m.amps().dim(), |(i, j)| {
                let k = if axis == 0 { i } else { j };
                m.amps()[[i, j]] * (d * pg.coord(k))
            });
            let back = WaveFunction2D::new(m.grid().clone(), scaled)?.axis_to_position(axis, &w.grid().axes[axis])?;
            out += back.amps();
        }
        WaveFunction2D::new(w.grid().clone(), out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{cat_wavefunction, coherent_wavefunction, CoherentStateParams};
    use approx::assert_abs_diff_eq;

    fn axis() -> GridSpec1D {
        GridSpec1D::centered(128, 0.25, 1.0).unwrap()
    }

    fn gauss(l: f64) -> WaveFunction1D {
        coherent_wavefunction(CoherentStateParams::new(0.0, 0.0, l).unwrap(), axis()).unwrap()
    }

    #[test]
    fn completely_optimal_unit_widths() {
        let r = make_completely_optimal(1.0, 1.0, axis()).unwrap().error_report().unwrap();
        let s = 0.5f64.sqrt();
        for v in [r.dei_x, r.dei_p, r.def_x, r.def_p] {
            assert_abs_diff_eq!(v, s, epsilon = 1e-8);
        }
        assert_abs_diff_eq!(r.dd_x, 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(r.dd_p, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn retrodictive_widths() {
        let r = make_retrodictively_optimal(2.0, &gauss(1.0)).unwrap().error_report().unwrap();
        assert_abs_diff_eq!(r.dei_x, 2f64.sqrt(), epsilon = 1e-6);
        assert_abs_diff_eq!(r.dei_p, 1.0 / (2.0 * 2f64.sqrt()), epsilon = 1e-6);
        let bimodal = cat_wavefunction(5.0, 0.7, 0.0, axis()).unwrap();
        let r = make_retrodictively_optimal(1.0, &bimodal).unwrap().error_report().unwrap();
        assert_abs_diff_eq!(r.dei_x * r.dei_p, 0.5, epsilon = 1e-6);
        assert!(r.def_x * r.def_p > 0.5 + 1e-3);
        assert_abs_diff_eq!(r.dd_x * r.dd_x, 0.5 + r.def_x * r.def_x, epsilon = 1e-6);
        assert_abs_diff_eq!(r.dd_p * r.dd_p, 0.5 + r.def_p * r.def_p, epsilon = 1e-6);
    }

    #[test]
    fn predictive_widths() {
        let r = make_predictively_optimal(0.5, &gauss(1.0)).unwrap().error_report().unwrap();
        assert_abs_diff_eq!(r.def_x, 0.5 / 2f64.sqrt(), epsilon = 1e-6);
        assert_abs_diff_eq!(r.def_x * r.def_p, 0.5, epsilon = 1e-6);
    }

    #[test]
    fn minimally_disturbing_figures() {
        let eta = 2f64.ln();
        let r = make_minimally_disturbing(1.0, eta, axis()).unwrap().error_report().unwrap();
        assert_abs_diff_eq!(r.dei_x * r.dei_p, 0.625, epsilon = 1e-6);
        assert_abs_diff_eq!(r.def_x * r.def_p, 0.625, epsilon = 1e-6);
        assert_abs_diff_eq!(r.dd_x * r.dd_p, 0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(r.cross_term_x, 0.0, epsilon = 1e-8);
        let z = make_minimally_disturbing(1.0, 0.0, axis()).unwrap();
        let c = make_completely_optimal(1.0, 1.0, axis()).unwrap();
        assert!(z.wf().l2_distance(c.wf()).unwrap() < 1e-8);
    }

    #[test]
    fn arthurs_kelly_gaussian() {
        let ap = make_completely_optimal(1.0, 1.0, axis()).unwrap();
        let pip = ap.to_mux_pip_rep().unwrap();
        assert_abs_diff_eq!(pip.norm_sq(), 1.0, epsilon = 1e-8);
        let m = ap.to_mux_mup_rep().unwrap();
        let h = 2.0 * PI;
        let [gx, gp] = m.grid().axes;
        let mut err = 0.0f64;
        for ((i, j), v) in m.amps().indexed_iter() {
            let (x, p) = (gx.coord(i), gp.coord(j));
            let want = 2.0 / h.sqrt() * (-x * x - p * p).exp();
            err = err.max((v - want).norm());
        }
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn commutator_table() {
        let grid = epsilon_grid(axis());
        let w = WaveFunction2D::from_fn(grid, |a, b| {
            C64::from_polar((-(a - 0.3).powi(2) / 1.5 - (b + 0.2).powi(2) / 2.0 + 0.2 * a * b).exp(), 0.4 * a - 0.7 * b)
        });
        use ErrorOperator::*;
        let expect = |x: ErrorOperator, y: ErrorOperator| -> C64 {
            match (x, y) {
                (EpsXi, EpsPi) => C64::new(0.0, -1.0),
                (EpsPi, EpsXi) => C64::new(0.0, 1.0),
                (EpsXf, EpsPf) => C64::new(0.0, 1.0),
                (EpsPf, EpsXf) => C64::new(0.0, -1.0),
                (EpsX, DeltaP) | (DeltaX, EpsP) => C64::new(0.0, -1.0),
                (DeltaP, EpsX) | (EpsP, DeltaX) => C64::new(0.0, 1.0),
                _ => C64::new(0.0, 0.0),
            }
        };
        let subset = [EpsX, DeltaX, EpsP, DeltaP];
        let pairs: Vec<(ErrorOperator, ErrorOperator)> = [(EpsXi, EpsPi), (EpsXf, EpsPf), (EpsXi, EpsPf), (EpsXf, EpsPi)]
            .into_iter()
            .chain(subset.iter().flat_map(|&a| subset.iter().map(move |&b| (a, b))))
            .collect();
        for (x, y) in pairs {
            let xy = x.apply(&y.apply(&w).unwrap()).unwrap();
            let yx = y.apply(&x.apply(&w).unwrap()).unwrap();
            let c = expect(x, y);
            let mut err = 0.0f64;
            for ((i, j), v) in xy.amps().indexed_iter() {
                let r = v - yx.amps()[[i, j]] - c * w.amps()[[i, j]];
                err = err.max(r.norm());
            }
            assert!(err < 1e-8, "{x:?},{y:?}: {err}");
        }
    }

    #[test]
    fn factorization_and_reduced_density() {
        let ap = make_retrodictively_optimal(1.0, &cat_wavefunction(4.0, 1.0, 0.0, axis()).unwrap()).unwrap();
        let (pi, pf) = ap.factorize().unwrap();
        let mut diff = 0.0f64;
        for ((i, j), v) in ap.amps().indexed_iter() {
            diff = diff.max((v - pi.amps()[i] * pf.amps()[j]).norm());
        }
        assert!(diff < 1e-12);
        let rho = ap.reduced_epsilon_density();
        rho.validate().unwrap();
        assert_abs_diff_eq!(rho.purity(), 1.0, epsilon = 1e-6);

        let md = make_minimally_disturbing(1.0, 1.0, axis()).unwrap();
        let r = md.reduced_epsilon_density();
        r.validate().unwrap();
        // two-mode Gaussian purity 1/cosh η
        assert_abs_diff_eq!(r.purity(), 1.0 / 1f64.cosh(), epsilon = 1e-8);
        assert!(matches!(md.factorize(), Err(Error::NotFactorized { .. })));
    }
}
