//! A predictively optimal measurement leaves the system close to a coherent
//! state centered on the recorded outcome.

use akmeter::apparatus::make_predictively_optimal;
use akmeter::measurement::{anti_husimi_on_region, conditional_state_factorized, outcome_distribution_direct, OutcomeRegion};
use akmeter::states::{coherent_wavefunction, CoherentStateParams};
use akmeter::GridSpec1D;

fn main() -> akmeter::Result<()> {
    let g = GridSpec1D::centered(256, 0.125, 1.0)?;
    let coh = |x, p| coherent_wavefunction(CoherentStateParams::new(x, p, 1.0)?, g);
    let psi = coh(0.0, 0.0)?;
    let ap = make_predictively_optimal(1.0, &coh(0.0, 0.0)?)?;
    let rho = outcome_distribution_direct(&psi, &ap)?;
    for (x, p) in [(0.0, 0.0), (1.0, -1.0), (-1.5, 1.0)] {
        let region = OutcomeRegion::around(x, p, 0.05, 0.05)?;
        let cond = conditional_state_factorized(&psi, &ap, &region)?;
        let rec = anti_husimi_on_region(&rho, &ap, &region)?.density_matrix()?;
        println!(
            "outcome ({x:+.1}, {p:+.1}): fidelity {:.6}, purity {:.6}, anti-Husimi distance {:.2e}",
            cond.fidelity_with_pure(&coh(x, p)?)?,
            cond.purity(),
            rec.trace_distance(&cond)?
        );
    }
    Ok(())
}
