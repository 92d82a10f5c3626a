//! Error and disturbance figures for each apparatus family, with the six
//! product bounds.

use akmeter::apparatus::{
    make_completely_optimal, make_minimally_disturbing, make_predictively_optimal, make_retrodictively_optimal,
};
use akmeter::states::cat_wavefunction;
use akmeter::GridSpec1D;

fn main() -> akmeter::Result<()> {
    let axis = GridSpec1D::centered(256, 0.125, 1.0)?;
    let bimodal = cat_wavefunction(3.0, 0.7, 0.0, axis)?;
    let families = [
        ("retro_opt", make_retrodictively_optimal(1.0, &bimodal)?),
        ("pred_opt", make_predictively_optimal(1.0, &bimodal)?),
        ("complete_opt", make_completely_optimal(1.0, 2.0, axis)?),
        ("min_disturb", make_minimally_disturbing(1.0, 0.5, axis)?),
    ];
    for (name, ap) in families {
        let r = ap.error_report()?;
        println!(
            "{name:>13}: Δei=({:.4}, {:.4}) Δef=({:.4}, {:.4}) Δd=({:.4}, {:.4})",
            r.dei_x, r.dei_p, r.def_x, r.def_p, r.dd_x, r.dd_p
        );
        for (bound, value, floor) in r.products() {
            println!("{:>15}{bound:<28} {value:.6} ≥ {floor}", "");
        }
    }
    Ok(())
}
