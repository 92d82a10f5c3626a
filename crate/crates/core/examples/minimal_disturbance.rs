//! Trading disturbance for accuracy along the minimally disturbing family.

use akmeter::apparatus::make_minimally_disturbing;
use akmeter::measurement::outcome_distribution_convolution;
use akmeter::phase_space::smeared_wigner;
use akmeter::states::cat_wavefunction;
use akmeter::GridSpec1D;

fn main() -> akmeter::Result<()> {
    let g = GridSpec1D::centered(256, 0.125, 1.0)?;
    let psi = cat_wavefunction(4.0, 1.0, 0.0, g)?;
    println!("   η   ΔdxΔdp   ħe^-η    ΔeixΔeip (ħ/2)coshη  L1(ρ, smeared W)");
    for eta in [0.0, 0.5, std::f64::consts::LN_2, 1.0, 1.5] {
        let ap = make_minimally_disturbing(1.0, eta, g)?;
        let r = ap.error_report()?;
        let rho = outcome_distribution_convolution(&psi, &ap)?;
        let l1 = rho.l1_distance(&smeared_wigner(&psi, 1.0, eta)?)?;
        println!(
            "{eta:5.3} {:8.5} {:8.5} {:9.5} {:9.5}  {l1:.2e}",
            r.disturbance_product(),
            (-eta).exp(),
            r.dei_x * r.dei_p,
            0.5 * eta.cosh()
        );
    }
    Ok(())
}
