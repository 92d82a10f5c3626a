//! Monte-Carlo outcomes and a chi-square check against the distribution.

use akmeter::apparatus::make_completely_optimal;
use akmeter::measurement::{chi_square_test, outcome_distribution_convolution, sample_outcomes};
use akmeter::states::{coherent_wavefunction, CoherentStateParams};
use akmeter::GridSpec1D;

fn main() -> akmeter::Result<()> {
    let g = GridSpec1D::centered(256, 0.125, 1.0)?;
    let psi = coherent_wavefunction(CoherentStateParams::new(0.0, 0.0, 1.0)?, g)?;
    let rho = outcome_distribution_convolution(&psi, &make_completely_optimal(1.0, 1.0, g)?)?;
    let samples = sample_outcomes(&rho, 100_000, 42)?;
    for s in samples.iter().take(3) {
        println!("#{} ({:+.6}, {:+.6})", s.index, s.mu_x, s.mu_p);
    }
    let t = chi_square_test(&rho, &samples, 1e-3)?;
    println!("χ² = {:.2} with {} dof, critical {:.2}: passed {}", t.statistic, t.dof, t.critical, t.passed);
    Ok(())
}
