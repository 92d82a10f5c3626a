//! Measurement kernels, their marginal kernels and the convolution form.

use akmeter::apparatus::make_completely_optimal;
use akmeter::kernel::{
    detect_convolution_form, extract_kernel_ak, kernel_axis, marginal_kernels, prugovecki_sigmas, rms_from_marginal,
    synthetic_kernel, COARSE_N,
};
use akmeter::states::{cat_wavefunction, coherent_wavefunction, CoherentStateParams};

fn main() -> akmeter::Result<()> {
    let axis = kernel_axis(COARSE_N, 1.0)?;
    let ap = make_completely_optimal(0.8, 1.25, axis)?;
    let k = extract_kernel_ak(&ap)?;
    let u = k.unitarity_residue();
    println!("unitarity residue: off-diagonal {:.2e}, diagonal {:.2e}", u.off_diagonal, u.diagonal);
    let (fx, fp) = marginal_kernels(&k);
    let (cx, cp) = (detect_convolution_form(&fx), detect_convolution_form(&fp));
    println!("form residuals: X {:.2e}, P {:.2e}", cx.residual, cp.residual);
    let (sx, sp) = prugovecki_sigmas(&cx, &cp)?;
    let r = ap.error_report()?;
    println!("σ_X {sx:.8} vs Δei x {:.8}; σ_P {sp:.8} vs Δei p {:.8}", r.dei_x, r.dei_p);
    let psi = cat_wavefunction(2.0, 0.8, 0.4, axis)?;
    println!("kernel-route rms: x {:.8}, p {:.8}", rms_from_marginal(&fx, &psi)?, rms_from_marginal(&fp, &psi)?);

    let g1 = coherent_wavefunction(CoherentStateParams::new(0.0, 0.0, 1.0)?, axis)?;
    let g2 = coherent_wavefunction(CoherentStateParams::new(0.5, 0.0, 0.7)?, axis)?;
    let (sfx, _) = marginal_kernels(&synthetic_kernel(&g1, &g2)?);
    let c = detect_convolution_form(&sfx);
    println!("synthetic kernel residual {:.3}: {}", c.residual, prugovecki_sigmas(&c, &c).unwrap_err());
    Ok(())
}
