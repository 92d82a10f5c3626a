//! The measurement itself: joint final state, outcome distribution by two
//! routes, conditional post-measurement states and their phase-space forms.
//!
//! Outcome lattices reuse the system lattice for `μX` and its conjugate for
//! `μP`. The apparatus lattice must share the system spacing and sit an
//! integer number of steps from it.

use ndarray::{Array2, Array3};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::apparatus::ApparatusState;
use crate::error::{Error, Result};
use crate::fourier::{alt_sign, line_to_momentum, LineFft};
use crate::grid::{DensityMatrix1D, GridSpec1D, WaveFunction1D};
use crate::phase_space::{convolve2d, wigner_of_density, wigner_of_pure, PhaseSpaceDist};

pub use crate::sampling::{chi_square_test, sample_outcomes, ChiSquareResult, MeasurementOutcomeSample};

type C64 = Complex64;

/// Conditioning probability below which a region counts as empty.
pub const EMPTY_REGION_TOL: f64 = 1e-12;
/// Fidelity below which a final-state Gaussian is not accepted as predictively optimal.
pub const PREDICTIVE_OPTIMALITY_TOL: f64 = 1e-8;

/// Maps `(μX - x)` lattice differences onto apparatus indices.
#[derive(Clone, Copy, Debug)]
struct Embedding {
    offset: isize,
    n_eps: isize,
}

impl Embedding {
    fn new(system: &GridSpec1D, eps: &GridSpec1D) -> Result<Self> {
        if !system.same_spacing(eps) {
            return Err(Error::mismatch(format!(
                "apparatus spacing {} (ħ = {}) differs from system spacing {} (ħ = {})",
                eps.dx(),
                eps.hbar(),
                system.dx(),
                system.hbar()
            )));
        }
        let s = -eps.x_min() / eps.dx();
        let r = s.round();
        if (s - r).abs() > 1e-6 {
            return Err(Error::mismatch("apparatus lattice does not contain zero"));
        }
        Ok(Self {
            offset: r as isize,
            n_eps: eps.n() as isize,
        })
    }

    /// Apparatus index of the lattice difference `steps·dx`.
    #[inline]
    fn index(&self, steps: isize) -> Option<usize> {
        let i = steps + self.offset;
        if i >= 0 && i < self.n_eps {
            Some(i as usize)
        } else {
            None
        }
    }
}

/// Rectangular outcome region; a lattice cell belongs to it when its center does.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRegion {
    pub x_lo: f64,
    pub x_hi: f64,
    pub p_lo: f64,
    pub p_hi: f64,
}

impl OutcomeRegion {
    pub fn new(x_lo: f64, x_hi: f64, p_lo: f64, p_hi: f64) -> Result<Self> {
        if !(x_lo < x_hi && p_lo < p_hi) {
            return Err(Error::invalid(format!(
                "region [{x_lo}, {x_hi}) × [{p_lo}, {p_hi}) is empty"
            )));
        }
        Ok(Self { x_lo, x_hi, p_lo, p_hi })
    }

    /// Box of size `wx × wp` centered on `(mu_x, mu_p)`.
    pub fn around(mu_x: f64, mu_p: f64, wx: f64, wp: f64) -> Result<Self> {
        Self::new(mu_x - 0.5 * wx, mu_x + 0.5 * wx, mu_p - 0.5 * wp, mu_p + 0.5 * wp)
    }

    /// Every cell of a lattice.
    pub fn everything() -> Self {
        Self {
            x_lo: f64::NEG_INFINITY,
            x_hi: f64::INFINITY,
            p_lo: f64::NEG_INFINITY,
            p_hi: f64::INFINITY,
        }
    }

    pub fn contains(&self, x: f64, p: f64) -> bool {
        x >= self.x_lo && x < self.x_hi && p >= self.p_lo && p < self.p_hi
    }

    /// Per-row lists of member column indices.
    fn members(&self, x_axis: &GridSpec1D, p_axis: &GridSpec1D) -> Vec<(usize, Vec<usize>)> {
        (0..x_axis.n())
            .filter_map(|a| {
                let x = x_axis.coord(a);
                let cols: Vec<usize> = (0..p_axis.n()).filter(|&l| self.contains(x, p_axis.coord(l))).collect();
                (!cols.is_empty()).then_some((a, cols))
            })
            .collect()
    }

    /// `p_R = ∫_R ρ`.
    pub fn probability(&self, rho: &PhaseSpaceDist) -> f64 {
        self.members(&rho.x_axis, &rho.p_axis)
            .iter()
            .map(|(a, cols)| cols.iter().map(|&l| rho.values[[*a, l]]).sum::<f64>())
            .sum::<f64>()
            * rho.cell_area()
    }

    /// `ρ/p_R` on the region and zero elsewhere.
    pub fn restrict(&self, rho: &PhaseSpaceDist) -> Result<PhaseSpaceDist> {
        let p_r = self.probability(rho);
        if !(p_r >= EMPTY_REGION_TOL) {
            return Err(Error::EmptyRegion(p_r));
        }
        let mut values = Array2::zeros(rho.values.dim());
        for (a, cols) in self.members(&rho.x_axis, &rho.p_axis) {
            for l in cols {
                values[[a, l]] = rho.values[[a, l]] / p_r;
            }
        }
        PhaseSpaceDist::new(rho.x_axis, rho.p_axis, values)
    }
}

/// `Ψ(x, μX, μP)` on the lattice `system × system × momentum`.
#[derive(Clone, Debug)]
pub struct JointFinalState {
    pub x_axis: GridSpec1D,
    pub mu_x_axis: GridSpec1D,
    pub mu_p_axis: GridSpec1D,
    pub amps: Array3<C64>,
}

impl JointFinalState {
    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.x_axis.dx() * self.mu_x_axis.dx() * self.mu_p_axis.dx()
    }

    /// `∫dx |Ψ(x, μX, μP)|²`.
    pub fn outcome_distribution(&self) -> PhaseSpaceDist {
        let (_, na, nl) = self.amps.dim();
        let dx = self.x_axis.dx();
        let values = Array2::from_shape_fn((na, nl), |(a, l)| {
            self.amps
                .slice(ndarray::s![.., a, l])
                .iter()
                .map(|v| v.norm_sqr())
                .sum::<f64>()
                * dx
        });
        PhaseSpaceDist {
            x_axis: self.mu_x_axis,
            p_axis: self.mu_p_axis,
            values,
        }
    }
}

/// `Ψ(x,μX,μP) = h^{-1/2}∫dx' e^{iμP(x-x')/ħ} φ(μX-x', μX-x) ψ(x')`.
pub fn joint_final_state(psi: &WaveFunction1D, ap: &ApparatusState) -> Result<JointFinalState> {
    psi.check_boundary("system state")?;
    let grid = *psi.grid();
    let emb = Embedding::new(&grid, &ap.axis())?;
    let n = grid.n();
    let phi = ap.amps();
    let fft = LineFft::new(n);
    let pg = grid.momentum_grid();
    let hbar = grid.hbar();
    let slabs: Vec<Vec<C64>> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (j, a) = (idx / n, idx % n);
            let mut line = vec![C64::new(0.0, 0.0); n];
            if let Some(f_idx) = emb.index(a as isize - j as isize) {
                for (k, v) in line.iter_mut().enumerate() {
                    if let Some(i_idx) = emb.index(a as isize - k as isize) {
                        *v = phi[[i_idx, f_idx]] * psi.amps()[k];
                    }
                }
            }
            line_to_momentum(&grid, &fft, &mut line);
            let xj = grid.coord(j);
            for (l, v) in line.iter_mut().enumerate() {
                *v *= C64::from_polar(1.0, pg.coord(l) * xj / hbar);
            }
            line
        })
        .collect();
    let amps = Array3::from_shape_fn((n, n, n), |(j, a, l)| slabs[j * n + a][l]);
    Ok(JointFinalState {
        x_axis: grid,
        mu_x_axis: grid,
        mu_p_axis: pg,
        amps,
    })
}

/// `ρ(μX,μP) = (1/h)∫dx'dx'' e^{-iμP(x'-x'')/ħ} ρ_εi(μX-x', μX-x'') ψ(x')ψ*(x'')`.
pub fn outcome_distribution_direct(psi: &WaveFunction1D, ap: &ApparatusState) -> Result<PhaseSpaceDist> {
    psi.check_boundary("system state")?;
    let grid = *psi.grid();
    let emb = Embedding::new(&grid, &ap.axis())?;
    let rho_eps = ap.reduced_epsilon_density();
    let r = rho_eps.elems();
    let n = grid.n();
    let ni = n as isize;
    let amps = psi.amps();
    let fft = LineFft::new(n);
    let scale = grid.dx() * grid.dx() / grid.h();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|a| {
            let ai = a as isize;
            let mut b = vec![C64::new(0.0, 0.0); n];
            for k in 0..ni {
                let Some(i1) = emb.index(ai - k) else { continue };
                let pk = amps[k as usize];
                for kd in 0..ni {
                    let d = kd - k;
                    let Some(i2) = emb.index(ai - kd) else { continue };
                    b[d.rem_euclid(ni) as usize] += r[[i1, i2]] * pk * amps[kd as usize].conj();
                }
            }
            for (d, v) in b.iter_mut().enumerate() {
                *v *= alt_sign(d);
            }
            fft.inverse(&mut b);
            b.iter().map(|v| v.re * scale).collect()
        })
        .collect();
    let values = Array2::from_shape_fn((n, n), |(i, j)| rows[i][j]);
    PhaseSpaceDist::new(grid, grid.momentum_grid(), values)
}

/// `W_εi`, the Wigner function of the reduced apparatus state in the
/// `e^{-iεPi y/ħ}` convention, on the centered phase-space lattice matching `grid`.
pub fn epsilon_initial_wigner(ap: &ApparatusState, grid: &GridSpec1D) -> Result<PhaseSpaceDist> {
    Embedding::new(grid, &ap.axis())?;
    let rho = ap.reduced_epsilon_density().recentered(grid.n())?;
    wigner_of_density(&rho.conj())
}

/// `ρ = W_εi ⊛ W_sy,i`.
pub fn outcome_distribution_convolution(psi: &WaveFunction1D, ap: &ApparatusState) -> Result<PhaseSpaceDist> {
    let w_sys = wigner_of_pure(psi)?;
    let w_eps = epsilon_initial_wigner(ap, psi.grid())?;
    convolve2d(&w_sys, &w_eps)
}

/// `ρ_εi`, the reduced initial apparatus density matrix on the `εXi` axis.
pub fn reduced_epsilon_density(ap: &ApparatusState) -> DensityMatrix1D {
    ap.reduced_epsilon_density()
}

/// Standard deviations `(ΔμXf, ΔμPf)` of the outcome marginals.
pub fn pointer_variances(rho: &PhaseSpaceDist) -> (f64, f64) {
    rho.std_devs()
}

/// `(1/p_R) ∫_R dμX dμP w(μX,μP) f(μX - x) f*(μX - x') e^{iμP(x-x')/ħ}` where
/// `f` is sampled on an apparatus lattice.
fn lag_mixture(w: &PhaseSpaceDist, f: &WaveFunction1D, region: &OutcomeRegion) -> Result<DensityMatrix1D> {
    let grid = w.x_axis;
    let emb = Embedding::new(&grid, f.grid())?;
    let members = region.members(&w.x_axis, &w.p_axis);
    let area = w.cell_area();
    let p_r: f64 = members
        .iter()
        .map(|(a, cols)| cols.iter().map(|&l| w.values[[*a, l]]).sum::<f64>())
        .sum::<f64>()
        * area;
    if !(p_r >= EMPTY_REGION_TOL) {
        return Err(Error::EmptyRegion(p_r));
    }
    let n = grid.n();
    let ni = n as isize;
    let hbar = grid.hbar();
    let dx = grid.dx();
    let fa = f.amps();
    let partials: Vec<Array2<C64>> = members
        .par_iter()
        .map(|(a, cols)| {
            let ai = *a as isize;
            let s: Vec<C64> = (-(ni - 1)..ni)
                .map(|d| {
                    cols.iter()
                        .map(|&l| C64::from_polar(w.values[[*a, l]], w.p_axis.coord(l) * d as f64 * dx / hbar))
                        .sum::<C64>()
                })
                .collect();
            let g: Vec<C64> = (0..ni)
                .map(|j| emb.index(ai - j).map_or(C64::new(0.0, 0.0), |i| fa[i]))
                .collect();
            Array2::from_shape_fn((n, n), |(j, jp)| {
                s[(j as isize - jp as isize + ni - 1) as usize] * g[j] * g[jp].conj()
            })
        })
        .collect();
    let mut elems = Array2::<C64>::zeros((n, n));
    for p in &partials {
        elems += p;
    }
    elems *= C64::new(area / p_r, 0.0);
    let sym = Array2::from_shape_fn((n, n), |(j, k)| 0.5 * (elems[[j, k]] + elems[[k, j]].conj()));
    Ok(DensityMatrix1D::from_parts_unchecked(grid, sym))
}

/// Post-measurement system state given that the outcome fell in `region`,
/// for an apparatus state `φ_i ⊗ φ_f`.
pub fn conditional_state_factorized(
    psi: &WaveFunction1D,
    ap: &ApparatusState,
    region: &OutcomeRegion,
) -> Result<DensityMatrix1D> {
    let (_, phi_f) = ap.factorize()?;
    let rho = outcome_distribution_direct(psi, ap)?;
    lag_mixture(&rho, &phi_f, region)
}

/// Post-measurement system state by summing `|Ψ⟩⟨Ψ|` over the region cells.
pub fn conditional_state_general(joint: &JointFinalState, region: &OutcomeRegion) -> Result<DensityMatrix1D> {
    let members = region.members(&joint.mu_x_axis, &joint.mu_p_axis);
    let area = joint.mu_x_axis.dx() * joint.mu_p_axis.dx();
    let dx = joint.x_axis.dx();
    let n = joint.x_axis.n();
    let mut elems = Array2::<C64>::zeros((n, n));
    let mut p_r = 0.0;
    for (a, cols) in &members {
        for &l in cols {
            let col = joint.amps.slice(ndarray::s![.., *a, l]);
            p_r += col.iter().map(|v| v.norm_sqr()).sum::<f64>() * dx * area;
            for j in 0..n {
                let cj = col[j];
                if cj == C64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..n {
                    elems[[j, k]] += cj * col[k].conj();
                }
            }
        }
    }
    if !(p_r >= EMPTY_REGION_TOL) {
        return Err(Error::EmptyRegion(p_r));
    }
    elems *= C64::new(area / p_r, 0.0);
    Ok(DensityMatrix1D::from_parts_unchecked(joint.x_axis, elems))
}

/// `W_sy,f(x,p) = (1/p_R)∫_R W_εf(μX-x, μP-p) ρ(μX,μP)`.
pub fn final_wigner_from_outcomes(
    rho: &PhaseSpaceDist,
    phi_f: &WaveFunction1D,
    region: &OutcomeRegion,
) -> Result<PhaseSpaceDist> {
    let restricted = region.restrict(rho)?;
    let grid = rho.x_axis;
    Embedding::new(&grid, phi_f.grid())?;
    let kernel = wigner_of_pure(&phi_f.recentered(grid.n())?.reflected()?)?;
    convolve2d(&restricted, &kernel)
}

/// Anti-Husimi (P) function of the conditional state of a predictively
/// optimal measurement, together with the coherent-state width it refers to.
#[derive(Clone, Debug)]
pub struct AntiHusimi {
    pub p: PhaseSpaceDist,
    pub lambda_f: f64,
}

impl AntiHusimi {
    /// `∫dμX dμP P(μX,μP) |μX,μP,λf⟩⟨μX,μP,λf|` on the outcome lattice.
    pub fn density_matrix(&self) -> Result<DensityMatrix1D> {
        let grid = self.p.x_axis;
        let axis = grid.centered_with(grid.n())?;
        let g = crate::states::coherent_wavefunction(crate::states::CoherentStateParams::new(0.0, 0.0, self.lambda_f)?, axis)?;
        lag_mixture(&self.p, &g, &OutcomeRegion::everything())
    }
}

/// Width `λf` of the Gaussian final factor of a predictively optimal apparatus.
pub fn predictive_resolution(ap: &ApparatusState) -> Result<f64> {
    let (_, phi_f) = ap.factorize().map_err(|e| match e {
        Error::NotFactorized { purity } => {
            Error::NotPredictivelyOptimal(format!("apparatus state is entangled (purity {purity})"))
        }
        other => other,
    })?;
    let phi_f = phi_f.normalize()?;
    let lambda_f = (2.0 * phi_f.expect_fn(|x| x * x)).sqrt();
    let g = crate::states::coherent_wavefunction(
        crate::states::CoherentStateParams::new(0.0, 0.0, lambda_f)?,
        *phi_f.grid(),
    )?;
    let fid = g.inner(&phi_f)?.norm_sqr();
    if fid < 1.0 - PREDICTIVE_OPTIMALITY_TOL {
        return Err(Error::NotPredictivelyOptimal(format!(
            "final factor overlaps its best Gaussian with fidelity {fid:.10}"
        )));
    }
    Ok(lambda_f)
}

/// `P = ρ/p_R` on the region, zero elsewhere.
pub fn anti_husimi_on_region(
    rho: &PhaseSpaceDist,
    ap: &ApparatusState,
    region: &OutcomeRegion,
) -> Result<AntiHusimi> {
    let lambda_f = predictive_resolution(ap)?;
    Ok(AntiHusimi {
        p: region.restrict(rho)?,
        lambda_f,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apparatus::{
        make_completely_optimal, make_minimally_disturbing, make_predictively_optimal, make_retrodictively_optimal,
    };
    use crate::states::{cat_wavefunction, coherent_wavefunction, CoherentStateParams};
    use approx::assert_abs_diff_eq;

    fn small() -> GridSpec1D {
        GridSpec1D::centered(64, 0.25, 1.0).unwrap()
    }

    fn coh(g: GridSpec1D, x: f64, p: f64, l: f64) -> WaveFunction1D {
        coherent_wavefunction(CoherentStateParams::new(x, p, l).unwrap(), g).unwrap()
    }

    #[test]
    fn routes_agree_and_variances_add() {
        let g = GridSpec1D::centered(128, 0.125, 1.0).unwrap();
        let psi = coh(g, 0.0, 0.0, 1.0);
        let ap = make_completely_optimal(1.0, 1.0, g).unwrap();
        let d = outcome_distribution_direct(&psi, &ap).unwrap();
        let c = outcome_distribution_convolution(&psi, &ap).unwrap();
        assert!(d.l1_distance(&c).unwrap() < 1e-6);
        assert_abs_diff_eq!(d.mass(), 1.0, epsilon = 1e-6);
        assert!(d.min() > -1e-9);
        let (sx, sp) = pointer_variances(&d);
        assert_abs_diff_eq!(sx, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(sx * sp, 1.0, epsilon = 1e-4);
    }

    #[test]
    fn joint_state_is_unitary_and_consistent() {
        let g = small();
        let psi = cat_wavefunction(2.0, 0.9, 0.3, g).unwrap();
        let ap = make_minimally_disturbing(1.0, 0.5, g).unwrap();
        let joint = joint_final_state(&psi, &ap).unwrap();
        assert_abs_diff_eq!(joint.norm_sq(), 1.0, epsilon = 1e-6);
        let direct = outcome_distribution_direct(&psi, &ap).unwrap();
        assert!(joint.outcome_distribution().l1_distance(&direct).unwrap() < 1e-10);
        let full = conditional_state_general(&joint, &OutcomeRegion::everything()).unwrap();
        full.validate().unwrap();
    }

    #[test]
    fn momentum_packet_shifts_pointer() {
        let g = small();
        let psi = coh(g, 0.0, 2.0, 1.0);
        let ap = make_completely_optimal(1.0, 1.0, g).unwrap();
        let rho = joint_final_state(&psi, &ap).unwrap().outcome_distribution();
        let (mx, mp) = rho.means();
        assert_abs_diff_eq!(mx, 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(mp, 2.0, epsilon = 1e-8);
    }

    #[test]
    fn conditional_routes_agree() {
        let g = small();
        let psi = coh(g, 0.3, -0.3, 1.0);
        let phi = cat_wavefunction(2.0, 0.8, 0.0, g).unwrap();
        let ap = make_retrodictively_optimal(0.9, &phi).unwrap();
        let joint = joint_final_state(&psi, &ap).unwrap();
        for region in [
            OutcomeRegion::new(-0.6, 1.1, -1.0, 0.5).unwrap(),
            OutcomeRegion::everything(),
        ] {
            let a = conditional_state_factorized(&psi, &ap, &region).unwrap();
            let b = conditional_state_general(&joint, &region).unwrap();
            a.validate().unwrap();
            assert!(a.trace_distance(&b).unwrap() < 1e-6);
        }
        let far = OutcomeRegion::new(7.0, 7.5, 7.0, 7.5).unwrap();
        assert!(matches!(
            conditional_state_factorized(&psi, &ap, &far),
            Err(Error::EmptyRegion(_))
        ));
        let md = make_minimally_disturbing(1.0, 0.5, g).unwrap();
        assert!(matches!(
            conditional_state_factorized(&psi, &md, &far),
            Err(Error::NotFactorized { .. })
        ));
    }

    #[test]
    fn final_wigner_matches_density_route() {
        let g = small();
        let psi = coh(g, 0.0, 0.0, 1.0);
        let phi_i = cat_wavefunction(2.0, 1.0, 0.0, g).unwrap();
        let ap = make_predictively_optimal(1.0, &phi_i).unwrap();
        let region = OutcomeRegion::new(-1.0, 1.5, -0.8, 1.2).unwrap();
        let rho = outcome_distribution_direct(&psi, &ap).unwrap();
        let (_, phi_f) = ap.factorize().unwrap();
        let a = final_wigner_from_outcomes(&rho, &phi_f, &region).unwrap();
        let cond = conditional_state_factorized(&psi, &ap, &region).unwrap();
        let b = wigner_of_density(&cond).unwrap();
        let gap = a.l1_distance(&b).unwrap();
        assert!(gap < 1e-5, "{gap}");
    }

    #[test]
    fn anti_husimi_reconstruction_and_checks() {
        let g = GridSpec1D::centered(256, 0.125, 1.0).unwrap();
        let psi = coh(g, 0.0, 0.0, 1.0);
        let ap = make_predictively_optimal(1.0, &coh(g, 0.0, 0.0, 1.0)).unwrap();
        let rho = outcome_distribution_direct(&psi, &ap).unwrap();
        let region = OutcomeRegion::around(1.0, -1.0, 0.05, 0.05).unwrap();
        let ah = anti_husimi_on_region(&rho, &ap, &region).unwrap();
        assert!(ah.p.min() >= 0.0);
        assert_abs_diff_eq!(ah.lambda_f, 1.0, epsilon = 1e-8);
        let cond = conditional_state_factorized(&psi, &ap, &region).unwrap();
        let rec = ah.density_matrix().unwrap();
        assert!(rec.trace_distance(&cond).unwrap() < 1e-5);
        let target = coh(g, 1.0, -1.0, 1.0);
        assert!(cond.fidelity_with_pure(&target).unwrap() >= 0.99);

        let md = make_minimally_disturbing(1.0, 0.5, g).unwrap();
        assert!(matches!(
            anti_husimi_on_region(&rho, &md, &region),
            Err(Error::NotPredictivelyOptimal(_))
        ));
        let retro = make_retrodictively_optimal(1.0, &cat_wavefunction(3.0, 1.0, 0.0, g).unwrap()).unwrap();
        assert!(matches!(
            anti_husimi_on_region(&rho, &retro, &region),
            Err(Error::NotPredictivelyOptimal(_))
        ));
    }
}
