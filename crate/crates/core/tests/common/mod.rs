#![allow(dead_code)]

use akmeter::apparatus::{
    make_completely_optimal, make_minimally_disturbing, make_predictively_optimal, make_retrodictively_optimal,
    ApparatusState,
};
use akmeter::states::{
    cat_wavefunction, coherent_wavefunction, cubic_phase_wavefunction, squeezed_wavefunction, CoherentStateParams,
};
use akmeter::{GridSpec1D, WaveFunction1D};
use num_complex::Complex64;
use rand::Rng;

pub fn grid() -> GridSpec1D {
    GridSpec1D::centered(256, 0.125, 1.0).unwrap()
}

pub fn apparatus_axis() -> GridSpec1D {
    GridSpec1D::centered(256, 0.125, 1.0).unwrap()
}

pub fn coherent(g: GridSpec1D, x: f64, p: f64, lambda: f64) -> WaveFunction1D {
    coherent_wavefunction(CoherentStateParams::new(x, p, lambda).unwrap(), g).unwrap()
}

pub fn bimodal(g: GridSpec1D) -> WaveFunction1D {
    cat_wavefunction(3.0, 0.7, 0.0, g).unwrap()
}

/// Coherent, two squeezed, cat and cubic-phase states.
pub fn system_states(g: GridSpec1D) -> Vec<(&'static str, WaveFunction1D)> {
    vec![
        ("coherent", coherent(g, 0.5, -0.3, 1.0)),
        ("squeezed_narrow", squeezed_wavefunction(0.0, 0.4, 0.6, g).unwrap()),
        ("squeezed_wide", squeezed_wavefunction(-0.3, 0.2, 1.5, g).unwrap()),
        ("cat", cat_wavefunction(4.0, 1.0, 0.0, g).unwrap()),
        ("cubic_phase", cubic_phase_wavefunction(1.0, 0.1, g).unwrap()),
    ]
}

/// One apparatus state per family.
pub fn apparatus_families(axis: GridSpec1D) -> Vec<(&'static str, ApparatusState)> {
    vec![
        ("retro_opt", make_retrodictively_optimal(1.0, &bimodal(axis)).unwrap()),
        ("pred_opt", make_predictively_optimal(1.0, &bimodal(axis)).unwrap()),
        ("complete_opt", make_completely_optimal(0.8, 1.25, axis).unwrap()),
        ("min_disturb", make_minimally_disturbing(1.0, 0.5, axis).unwrap()),
    ]
}

/// Superposition of one to three correlated, boosted Gaussians in
/// `(εXi, εXf)` with random complex weights.
pub fn random_apparatus<R: Rng>(rng: &mut R, axis: GridSpec1D) -> ApparatusState {
    let k = rng.random_range(1..=3);
    let comps: Vec<[f64; 9]> = (0..k)
        .map(|_| {
            [
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(0.5..1.1),
                rng.random_range(0.5..1.1),
                rng.random_range(-0.6..0.6),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(0.2..1.0),
                rng.random_range(0.0..std::f64::consts::TAU),
            ]
        })
        .collect();
    let hbar = axis.hbar();
    ApparatusState::from_fn(axis, |a, b| {
        comps
            .iter()
            .map(|&[a0, b0, sa, sb, rho, ka, kb, w, ph]| {
                let (u, v) = ((a - a0) / sa, (b - b0) / sb);
                let env = (-(u * u + v * v - 2.0 * rho * u * v) / 2.0).exp();
                Complex64::from_polar(w * env, ph + (ka * a + kb * b) / hbar)
            })
            .sum()
    })
    .unwrap()
}

/// `⟨p²⟩ = ħ² ∫|ψ'|²` with an eighth-order central difference.
pub fn finite_difference_p2(psi: &WaveFunction1D) -> f64 {
    const C: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
    let g = psi.grid();
    let a = psi.amps();
    let n = a.len();
    let mut s = 0.0;
    for k in 4..n - 4 {
        let mut d = Complex64::new(0.0, 0.0);
        for (j, c) in C.iter().enumerate() {
            d += (a[k + j + 1] - a[k - j - 1]) * *c;
        }
        s += (d / g.dx()).norm_sqr();
    }
    s * g.dx() * g.hbar() * g.hbar()
}

/// `⟨p²⟩` from the momentum representation.
pub fn spectral_p2(psi: &WaveFunction1D) -> f64 {
    psi.to_momentum_rep().unwrap().expect_fn(|p| p * p)
}
