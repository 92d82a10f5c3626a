//! Scenario files and the runner that evaluates every applicable check.
//!
//! A scenario is a TOML document:
//!
//! ```toml
//! name = "complete_opt_coherent"
//! hbar = 1.0                 # optional, defaults to 1
//!
//! [grid]
//! n = 256
//! dx = 0.125
//!
//! [system]
//! kind = "coherent"          # coherent | squeezed | cat | cubic_phase | file
//! mu_x = 0.0
//! mu_p = 0.0
//! lambda = 1.0
//!
//! [apparatus]
//! kind = "complete_opt"      # retro_opt | pred_opt | complete_opt | min_disturb | file
//! lambda_i = 1.0
//! lambda_f = 1.0
//!
//! [region]                   # optional
//! x_lo = 0.975
//! x_hi = 1.025
//! p_lo = -1.025
//! p_hi = -0.975
//!
//! [sampling]                 # optional
//! count = 100000
//! seed = 42
//! ```
//!
//! `retro_opt` takes `lambda_i` and a `[apparatus.final]` factor, `pred_opt`
//! takes `lambda_f` and a `[apparatus.initial]` factor. Factors are
//! `gaussian` (`lambda`), `bimodal` (`separation`, `lambda`) or `file`.
//! Files are CSV: `x,re,im` for one-dimensional states and
//! `eps_xi,eps_xf,re,im` (row-major, `eps_xf` fastest) for apparatus states,
//! with relative paths resolved against the scenario file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::apparatus::{
    make_completely_optimal, make_minimally_disturbing, make_predictively_optimal, make_retrodictively_optimal,
    ApparatusState,
};
use crate::error::{Error, Result};
use crate::grid::{GridSpec1D, WaveFunction1D, WaveFunction2D, GridSpec2D};
use crate::measurement::{
    anti_husimi_on_region, chi_square_test, conditional_state_factorized, final_wigner_from_outcomes,
    outcome_distribution_convolution, outcome_distribution_direct, pointer_variances, sample_outcomes,
    MeasurementOutcomeSample, OutcomeRegion,
};
use crate::phase_space::{husimi, smeared_wigner, wigner_of_pure, PhaseSpaceDist};
use crate::report::{MeasurementReport, Verdict};
use crate::states::{
    cat_wavefunction, coherent_wavefunction, cubic_phase_wavefunction, squeezed_wavefunction, CoherentStateParams,
};
use num_complex::Complex64;

/// Tolerance on closed-form equalities and L¹ identities.
pub const IDENTITY_TOL: f64 = 1e-6;
/// Smallest coherent-state fidelity accepted for a small outcome region.
pub const PREPARATION_FIDELITY: f64 = 0.99;
/// Largest trace distance between the conditional state and its anti-Husimi mixture.
pub const ANTI_HUSIMI_TOL: f64 = 1e-5;
/// Regions no larger than this fraction of `λf × ħ/λf` count as small.
pub const SMALL_REGION: f64 = 0.05;

fn default_hbar() -> f64 {
    1.0
}

fn default_significance() -> f64 {
    1e-3
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    pub dx: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    Coherent { mu_x: f64, mu_p: f64, lambda: f64 },
    Squeezed { mu_x: f64, mu_p: f64, width: f64 },
    Cat { separation: f64, lambda: f64, phase: f64 },
    CubicPhase { lambda: f64, kappa: f64 },
    File { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FactorSpec {
    Gaussian { lambda: f64 },
    Bimodal { separation: f64, lambda: f64 },
    File { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ApparatusSpec {
    RetroOpt { lambda_i: f64, r#final: FactorSpec },
    PredOpt { lambda_f: f64, initial: FactorSpec },
    CompleteOpt { lambda_i: f64, lambda_f: f64 },
    MinDisturb { lambda: f64, eta: f64 },
    File { path: PathBuf },
}

impl ApparatusSpec {
    fn label(&self) -> String {
        match self {
            ApparatusSpec::RetroOpt { lambda_i, .. } => format!("retro_opt(lambda_i={lambda_i})"),
            ApparatusSpec::PredOpt { lambda_f, .. } => format!("pred_opt(lambda_f={lambda_f})"),
            ApparatusSpec::CompleteOpt { lambda_i, lambda_f } => {
                format!("complete_opt(lambda_i={lambda_i}, lambda_f={lambda_f})")
            }
            ApparatusSpec::MinDisturb { lambda, eta } => format!("min_disturb(lambda={lambda}, eta={eta})"),
            ApparatusSpec::File { path } => format!("file({})", path.display()),
        }
    }

    /// `λi` of a retrodictively optimal apparatus.
    fn lambda_i(&self) -> Option<f64> {
        match self {
            ApparatusSpec::RetroOpt { lambda_i, .. } | ApparatusSpec::CompleteOpt { lambda_i, .. } => Some(*lambda_i),
            _ => None,
        }
    }

    /// `λf` of a predictively optimal apparatus.
    fn lambda_f(&self) -> Option<f64> {
        match self {
            ApparatusSpec::PredOpt { lambda_f, .. } | ApparatusSpec::CompleteOpt { lambda_f, .. } => Some(*lambda_f),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSpec {
    pub count: usize,
    pub seed: u64,
    #[serde(default = "default_significance")]
    pub significance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default = "default_hbar")]
    pub hbar: f64,
    pub grid: GridSection,
    pub system: SystemSpec,
    pub apparatus: ApparatusSpec,
    #[serde(default)]
    pub region: Option<OutcomeRegion>,
    #[serde(default)]
    pub sampling: Option<SamplingSpec>,
    /// Directory against which relative file paths are resolved.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl Scenario {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let sc: Scenario = toml::from_str(s).map_err(|e| Error::Scenario(e.to_string()))?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut sc = Self::from_toml_str(&text).map_err(|e| Error::InScenario {
            scenario: path.display().to_string(),
            source: Box::new(e),
        })?;
        sc.base_dir = path.parent().map(Path::to_path_buf);
        Ok(sc)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Scenario(e.to_string()))
    }

    /// Applies command-line overrides. A new `grid_n` keeps `dx`, so the box
    /// grows or shrinks with it.
    pub fn with_overrides(mut self, seed: Option<u64>, hbar: Option<f64>, grid_n: Option<usize>) -> Result<Self> {
        if let Some(h) = hbar {
            self.hbar = h;
        }
        if let Some(n) = grid_n {
            self.grid.n = n;
        }
        if let Some(seed) = seed {
            match self.sampling.as_mut() {
                Some(s) => s.seed = seed,
                None => return Err(Error::Scenario("--seed given but the scenario has no [sampling] section".into())),
            }
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Scenario(m));
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return bad(format!("hbar = {} must be positive", self.hbar));
        }
        GridSpec1D::centered(self.grid.n, self.grid.dx, self.hbar)?;
        let positive = |name: &str, v: f64| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Scenario(format!("{name} = {v} must be positive")))
            }
        };
        let factor = |f: &FactorSpec| -> Result<()> {
            match f {
                FactorSpec::Gaussian { lambda } => positive("lambda", *lambda),
                FactorSpec::Bimodal { separation, lambda } => {
                    positive("separation", *separation)?;
                    positive("lambda", *lambda)
                }
                FactorSpec::File { .. } => Ok(()),
            }
        };
        match &self.system {
            SystemSpec::Coherent { lambda, .. } => positive("lambda", *lambda)?,
            SystemSpec::Squeezed { width, .. } => positive("width", *width)?,
            SystemSpec::Cat { separation, lambda, .. } => {
                positive("separation", *separation)?;
                positive("lambda", *lambda)?
            }
            SystemSpec::CubicPhase { lambda, .. } => positive("lambda", *lambda)?,
            SystemSpec::File { .. } => {}
        }
        match &self.apparatus {
            ApparatusSpec::RetroOpt { lambda_i, r#final } => {
                positive("lambda_i", *lambda_i)?;
                factor(r#final)?
            }
            ApparatusSpec::PredOpt { lambda_f, initial } => {
                positive("lambda_f", *lambda_f)?;
                factor(initial)?
            }
            ApparatusSpec::CompleteOpt { lambda_i, lambda_f } => {
                positive("lambda_i", *lambda_i)?;
                positive("lambda_f", *lambda_f)?
            }
            ApparatusSpec::MinDisturb { lambda, eta } => {
                positive("lambda", *lambda)?;
                if !(*eta >= 0.0 && eta.is_finite()) {
                    return bad(format!("eta = {eta} must be ≥ 0"));
                }
            }
            ApparatusSpec::File { .. } => {}
        }
        if let Some(r) = &self.region {
            OutcomeRegion::new(r.x_lo, r.x_hi, r.p_lo, r.p_hi)?;
        }
        if let Some(s) = &self.sampling {
            if s.count == 0 {
                return bad("sampling count must be positive".into());
            }
            if !(s.significance > 0.0 && s.significance < 1.0) {
                return bad(format!("significance {} must lie in (0, 1)", s.significance));
            }
        }
        Ok(())
    }

    pub fn system_grid(&self) -> Result<GridSpec1D> {
        GridSpec1D::centered(self.grid.n, self.grid.dx, self.hbar)
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.to_path_buf(),
        }
    }

    pub fn system_state(&self) -> Result<WaveFunction1D> {
        let g = self.system_grid()?;
        match &self.system {
            SystemSpec::Coherent { mu_x, mu_p, lambda } => {
                coherent_wavefunction(CoherentStateParams::new(*mu_x, *mu_p, *lambda)?, g)
            }
            SystemSpec::Squeezed { mu_x, mu_p, width } => squeezed_wavefunction(*mu_x, *mu_p, *width, g),
            SystemSpec::Cat { separation, lambda, phase } => cat_wavefunction(*separation, *lambda, *phase, g),
            SystemSpec::CubicPhase { lambda, kappa } => cubic_phase_wavefunction(*lambda, *kappa, g),
            SystemSpec::File { path } => load_wavefunction(&self.resolve(path), g),
        }
    }

    fn factor(&self, f: &FactorSpec, axis: GridSpec1D) -> Result<WaveFunction1D> {
        match f {
            FactorSpec::Gaussian { lambda } => coherent_wavefunction(CoherentStateParams::new(0.0, 0.0, *lambda)?, axis),
            FactorSpec::Bimodal { separation, lambda } => cat_wavefunction(*separation, *lambda, 0.0, axis),
            FactorSpec::File { path } => load_wavefunction(&self.resolve(path), axis),
        }
    }

    /// Apparatus state on the centered lattice with the system's `n` and `dx`.
    pub fn apparatus_state(&self) -> Result<ApparatusState> {
        let axis = self.system_grid()?;
        match &self.apparatus {
            ApparatusSpec::RetroOpt { lambda_i, r#final } => {
                make_retrodictively_optimal(*lambda_i, &self.factor(r#final, axis)?)
            }
            ApparatusSpec::PredOpt { lambda_f, initial } => {
                make_predictively_optimal(*lambda_f, &self.factor(initial, axis)?)
            }
            ApparatusSpec::CompleteOpt { lambda_i, lambda_f } => make_completely_optimal(*lambda_i, *lambda_f, axis),
            ApparatusSpec::MinDisturb { lambda, eta } => make_minimally_disturbing(*lambda, *eta, axis),
            ApparatusSpec::File { path } => load_apparatus(&self.resolve(path), axis),
        }
    }
}

fn check_coord(found: f64, want: f64, dx: f64, what: &str) -> Result<()> {
    if (found - want).abs() > 1e-6 * dx {
        return Err(Error::mismatch(format!("{what}: coordinate {found} does not match lattice point {want}")));
    }
    Ok(())
}

/// Reads `x,re,im` rows lying on `grid`, then normalizes.
pub fn load_wavefunction(path: &Path, grid: GridSpec1D) -> Result<WaveFunction1D> {
    let mut r = csv::Reader::from_path(path)?;
    let mut amps = Vec::with_capacity(grid.n());
    for (k, rec) in r.deserialize::<(f64, f64, f64)>().enumerate() {
        let (x, re, im) = rec?;
        if k >= grid.n() {
            return Err(Error::mismatch(format!("{}: more than {} rows", path.display(), grid.n())));
        }
        check_coord(x, grid.coord(k), grid.dx(), &path.display().to_string())?;
        amps.push(Complex64::new(re, im));
    }
    if amps.len() != grid.n() {
        return Err(Error::mismatch(format!("{}: expected {} rows, found {}", path.display(), grid.n(), amps.len())));
    }
    let w = WaveFunction1D::new(grid, amps)?;
    w.check_boundary(&path.display().to_string())?;
    w.normalize()
}

/// Reads `eps_xi,eps_xf,re,im` rows on the square lattice over `axis`.
pub fn load_apparatus(path: &Path, axis: GridSpec1D) -> Result<ApparatusState> {
    let n = axis.n();
    let mut r = csv::Reader::from_path(path)?;
    let mut amps = Vec::with_capacity(n * n);
    for (k, rec) in r.deserialize::<(f64, f64, f64, f64)>().enumerate() {
        let (a, b, re, im) = rec?;
        if k >= n * n {
            return Err(Error::mismatch(format!("{}: more than {} rows", path.display(), n * n)));
        }
        let what = path.display().to_string();
        check_coord(a, axis.coord(k / n), axis.dx(), &what)?;
        check_coord(b, axis.coord(k % n), axis.dx(), &what)?;
        amps.push(Complex64::new(re, im));
    }
    if amps.len() != n * n {
        return Err(Error::mismatch(format!("{}: expected {} rows, found {}", path.display(), n * n, amps.len())));
    }
    let amps = ndarray::Array2::from_shape_vec((n, n), amps).map_err(|e| Error::mismatch(e.to_string()))?;
    let grid = GridSpec2D::new(axis, axis, crate::apparatus::AXIS_NAMES);
    ApparatusState::new(WaveFunction2D::new(grid, amps)?)
}

/// Report plus the distributions it was computed from.
#[derive(Clone, Debug)]
pub struct ScenarioRun {
    pub report: MeasurementReport,
    pub rho: PhaseSpaceDist,
    pub wigner_initial: PhaseSpaceDist,
    pub wigner_final: Option<PhaseSpaceDist>,
    pub samples: Option<Vec<MeasurementOutcomeSample>>,
}

pub fn run_scenario(s: &Scenario) -> Result<MeasurementReport> {
    Ok(run_scenario_full(s)?.report)
}

pub fn run_scenario_full(s: &Scenario) -> Result<ScenarioRun> {
    run_inner(s).map_err(|e| Error::InScenario {
        scenario: s.name.clone(),
        source: Box::new(e),
    })
}

fn system_label(s: &SystemSpec) -> String {
    match s {
        SystemSpec::Coherent { mu_x, mu_p, lambda } => format!("coherent(mu_x={mu_x}, mu_p={mu_p}, lambda={lambda})"),
        SystemSpec::Squeezed { mu_x, mu_p, width } => format!("squeezed(mu_x={mu_x}, mu_p={mu_p}, width={width})"),
        SystemSpec::Cat { separation, lambda, phase } => {
            format!("cat(separation={separation}, lambda={lambda}, phase={phase})")
        }
        SystemSpec::CubicPhase { lambda, kappa } => format!("cubic_phase(lambda={lambda}, kappa={kappa})"),
        SystemSpec::File { path } => format!("file({})", path.display()),
    }
}

fn run_inner(s: &Scenario) -> Result<ScenarioRun> {
    s.validate()?;
    let hbar = s.hbar;
    let psi = s.system_state()?;
    let ap = s.apparatus_state()?;
    let errors = ap.error_report()?;

    let rho = outcome_distribution_convolution(&psi, &ap)?;
    let rho_direct = outcome_distribution_direct(&psi, &ap)?;
    let route_gap = rho.l1_distance(&rho_direct)?;
    let (pdx, pdp) = pointer_variances(&rho);
    let mass = rho.mass();

    let mut v = vec![
        Verdict::lower_bound("pointer_product", pdx * pdp, hbar),
        Verdict::equality("outcome_mass", mass, 1.0, IDENTITY_TOL),
        Verdict::upper_bound("dual_route_l1", route_gap, IDENTITY_TOL),
    ];
    for (name, value, bound) in errors.products() {
        v.push(Verdict::lower_bound(name, value, bound));
    }

    let dd = errors.disturbance_product();
    if dd <= hbar {
        // averaged squares bound the error products from below by (ħ/2)cosh η
        let eta = -(dd / hbar).ln();
        let ax = (0.5 * (errors.dei_x.powi(2) + errors.def_x.powi(2))).sqrt();
        let ap_ = (0.5 * (errors.dei_p.powi(2) + errors.def_p.powi(2))).sqrt();
        v.push(Verdict::lower_bound("cosh_floor", ax * ap_, 0.5 * hbar * eta.cosh()));
    }

    let lambda_i = s.apparatus.lambda_i();
    let lambda_f = s.apparatus.lambda_f();
    if lambda_i.is_some() || lambda_f.is_some() {
        v.push(Verdict::lower_bound("disturbance_product_floor", dd, hbar));
    }
    if let Some(li) = lambda_i {
        v.push(Verdict::equality(
            "retrodictive_saturation",
            errors.dei_x * errors.dei_p,
            0.5 * hbar,
            IDENTITY_TOL,
        ));
        let q = husimi(&psi, li)?;
        v.push(Verdict::upper_bound("husimi_identity_l1", rho.l1_distance(&q)?, IDENTITY_TOL));
    }
    if let Some(lf) = lambda_f {
        v.push(Verdict::equality(
            "predictive_saturation",
            errors.def_x * errors.def_p,
            0.5 * hbar,
            IDENTITY_TOL,
        ));
        if let Some(li) = lambda_i {
            let formula = 0.5 * hbar * (2.0 + (lf / li).powi(2) + (li / lf).powi(2)).sqrt();
            v.push(Verdict::equality("disturbance_product_formula", dd, formula, IDENTITY_TOL));
        }
    }
    if let ApparatusSpec::MinDisturb { lambda, eta } = s.apparatus {
        v.push(Verdict::equality(
            "min_disturbance_product",
            dd,
            hbar * (-eta).exp(),
            IDENTITY_TOL,
        ));
        let floor = 0.5 * hbar * eta.cosh();
        v.push(Verdict::equality("cosh_floor_retrodictive", errors.dei_x * errors.dei_p, floor, IDENTITY_TOL));
        v.push(Verdict::equality("cosh_floor_predictive", errors.def_x * errors.def_p, floor, IDENTITY_TOL));
        v.push(Verdict::equality("error_disturbance_cross_term", errors.cross_term_x, 0.0, 1e-8));
        let sw = smeared_wigner(&psi, lambda, eta)?;
        v.push(Verdict::upper_bound("cartwright_identity_l1", rho.l1_distance(&sw)?, IDENTITY_TOL));
    }

    let mut wigner_final = None;
    if let Some(region) = s.region {
        if let Ok((_, phi_f)) = ap.factorize() {
            wigner_final = Some(final_wigner_from_outcomes(&rho_direct, &phi_f, &region)?);
            let cond = conditional_state_factorized(&psi, &ap, &region)?;
            v.push(Verdict::upper_bound(
                "conditional_state_hermiticity",
                cond.hermitian_deviation(),
                crate::grid::HERMITIAN_TOL,
            ));
            v.push(Verdict::equality("conditional_state_trace", cond.trace(), 1.0, crate::grid::TRACE_TOL));
            let min_eig = cond.operator_eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
            v.push(Verdict::lower_bound("conditional_state_min_eigenvalue", min_eig, -crate::grid::PSD_TOL));
            if let Some(lf) = lambda_f {
                let small = region.x_hi - region.x_lo <= SMALL_REGION * lf * (1.0 + 1e-12)
                    && region.p_hi - region.p_lo <= SMALL_REGION * hbar / lf * (1.0 + 1e-12);
                if small {
                    let (cx, cp) = (0.5 * (region.x_lo + region.x_hi), 0.5 * (region.p_lo + region.p_hi));
                    let target = coherent_wavefunction(CoherentStateParams::new(cx, cp, lf)?, *psi.grid())?;
                    v.push(Verdict::lower_bound(
                        "coherent_preparation_fidelity",
                        cond.fidelity_with_pure(&target)?,
                        PREPARATION_FIDELITY,
                    ));
                }
                let ah = anti_husimi_on_region(&rho_direct, &ap, &region)?;
                v.push(Verdict::upper_bound(
                    "anti_husimi_trace_distance",
                    ah.density_matrix()?.trace_distance(&cond)?,
                    ANTI_HUSIMI_TOL,
                ));
            }
        }
    }

    let (samples, chi_square) = match s.sampling {
        Some(sp) => {
            let samples = sample_outcomes(&rho, sp.count, sp.seed)?;
            let t = chi_square_test(&rho, &samples, sp.significance)?;
            (Some(samples), Some(t))
        }
        None => (None, None),
    };

    let report = MeasurementReport {
        scenario: s.name.clone(),
        hbar,
        system: system_label(&s.system),
        apparatus: s.apparatus.label(),
        errors,
        pointer_dx: pdx,
        pointer_dp: pdp,
        rho_mass: mass,
        route_gap_l1: route_gap,
        verdicts: v,
        chi_square,
    };
    Ok(ScenarioRun {
        report,
        rho,
        wigner_initial: wigner_of_pure(&psi)?,
        wigner_final,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const COMPLETE: &str = r#"
name = "complete"
[grid]
n = 128
dx = 0.125
[system]
kind = "coherent"
mu_x = 0.0
mu_p = 0.0
lambda = 1.0
[apparatus]
kind = "complete_opt"
lambda_i = 1.0
lambda_f = 1.0
"#;

    #[test]
    fn parses_and_rejects() {
        let s = Scenario::from_toml_str(COMPLETE).unwrap();
        assert_eq!(s.hbar, 1.0);
        assert!(matches!(s.apparatus, ApparatusSpec::CompleteOpt { .. }));
        let back = Scenario::from_toml_str(&s.to_toml_string().unwrap()).unwrap();
        assert_eq!(back, s);
        let missing = COMPLETE.replace("lambda_f = 1.0\n", "");
        assert!(Scenario::from_toml_str(&missing).is_err());
        let negative = COMPLETE.replace("lambda_i = 1.0", "lambda_i = -1.0");
        assert!(Scenario::from_toml_str(&negative).is_err());
        let typo = COMPLETE.replace("lambda_i", "lamda_i");
        assert!(Scenario::from_toml_str(&typo).is_err());
    }

    #[test]
    fn complete_optimal_saturates_pointer_bound() {
        let s = Scenario::from_toml_str(COMPLETE).unwrap();
        let r = run_scenario(&s).unwrap();
        assert!(r.all_passed(), "{:?}", r.failures());
        let eq1 = r.verdict("pointer_product").unwrap();
        assert!(eq1.margin.abs() < 1e-4, "{eq1:?}");
        assert_abs_diff_eq!(r.errors.disturbance_product(), 1.0, epsilon = 1e-6);
        let again = run_scenario(&s).unwrap();
        assert_eq!(r.to_json().unwrap(), again.to_json().unwrap());
        assert_eq!(MeasurementReport::from_json(&r.to_json().unwrap()).unwrap(), r);
    }

    #[test]
    fn min_disturbance_floor_saturated() {
        let text = COMPLETE.replace(
            "kind = \"complete_opt\"\nlambda_i = 1.0\nlambda_f = 1.0",
            "kind = \"min_disturb\"\nlambda = 1.0\neta = 1.0",
        );
        let r = run_scenario(&Scenario::from_toml_str(&text).unwrap()).unwrap();
        assert!(r.all_passed(), "{:?}", r.failures());
        assert!(r.verdict("cosh_floor").unwrap().margin.abs() < 1e-6);
        assert_abs_diff_eq!(r.errors.disturbance_product(), (-1.0f64).exp(), epsilon = 1e-6);
    }

    #[test]
    fn retro_optimal_with_bimodal_final_factor() {
        let text = COMPLETE.replace(
            "kind = \"complete_opt\"\nlambda_i = 1.0\nlambda_f = 1.0",
            "kind = \"retro_opt\"\nlambda_i = 1.0\n[apparatus.final]\nkind = \"bimodal\"\nseparation = 3.0\nlambda = 0.7",
        );
        let r = run_scenario(&Scenario::from_toml_str(&text).unwrap()).unwrap();
        assert!(r.all_passed(), "{:?}", r.failures());
        assert!(r.verdict("husimi_identity_l1").unwrap().passed);
        assert!(r.errors.def_x * r.errors.def_p > 0.5 + 1e-3);
    }
}
