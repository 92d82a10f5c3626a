//! A retrodictively optimal measurement samples the Husimi function of the
//! input, whatever the final apparatus factor.

use akmeter::apparatus::make_retrodictively_optimal;
use akmeter::measurement::outcome_distribution_convolution;
use akmeter::phase_space::husimi;
use akmeter::states::{cat_wavefunction, coherent_wavefunction, CoherentStateParams};
use akmeter::GridSpec1D;

fn main() -> akmeter::Result<()> {
    let g = GridSpec1D::centered(256, 0.125, 1.0)?;
    let psi = cat_wavefunction(4.0, 1.0, 0.0, g)?;
    let q = husimi(&psi, 1.0)?;
    let finals = [
        ("gaussian", coherent_wavefunction(CoherentStateParams::new(0.0, 0.0, 1.3)?, g)?),
        ("bimodal", cat_wavefunction(3.0, 0.7, 0.0, g)?),
    ];
    for (name, phi_f) in finals {
        let rho = outcome_distribution_convolution(&psi, &make_retrodictively_optimal(1.0, &phi_f)?)?;
        println!("final factor {name:>8}: L1(ρ, Q) = {:.3e}", rho.l1_distance(&q)?);
    }
    Ok(())
}
