//! Outcome distribution by the direct integral and by Wigner convolution,
//! with pointer spreads.

use akmeter::apparatus::make_completely_optimal;
use akmeter::measurement::{outcome_distribution_convolution, outcome_distribution_direct, pointer_variances};
use akmeter::states::squeezed_wavefunction;
use akmeter::GridSpec1D;

fn main() -> akmeter::Result<()> {
    let g = GridSpec1D::centered(256, 0.125, 1.0)?;
    let psi = squeezed_wavefunction(0.5, -0.5, 0.6, g)?;
    let ap = make_completely_optimal(1.0, 1.0, g)?;
    let direct = outcome_distribution_direct(&psi, &ap)?;
    let conv = outcome_distribution_convolution(&psi, &ap)?;
    let (sx, sp) = pointer_variances(&conv);
    println!("mass {:.12}, route gap L1 {:.3e}", conv.mass(), conv.l1_distance(&direct)?);
    println!("ΔμX = {sx:.6}, ΔμP = {sp:.6}, product {:.6} ≥ ħ", sx * sp);
    let (mx, mp) = conv.means();
    println!("means ({mx:.6}, {mp:.6})");
    Ok(())
}
