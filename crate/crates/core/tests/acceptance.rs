mod common;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use akmeter::apparatus::{
    make_completely_optimal, make_minimally_disturbing, make_predictively_optimal, make_retrodictively_optimal,
};
use akmeter::kernel::{appendix_suite, COARSE_N};
use akmeter::measurement::{
    anti_husimi_on_region, conditional_state_factorized, outcome_distribution_convolution,
    outcome_distribution_direct, pointer_variances, OutcomeRegion,
};
use akmeter::phase_space::{husimi, smeared_wigner, wigner_of_pure};
use akmeter::report::write_samples_csv;
use akmeter::scenario::{run_scenario_full, Scenario};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn error_relations() -> Outcome {
    let axis = common::apparatus_axis();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = f64::INFINITY;
    for _ in 0..50 {
        let r = common::random_apparatus(&mut rng, axis).error_report().map_err(|e| e.to_string())?;
        worst = worst.min(r.min_margin());
    }
    let retro = make_retrodictively_optimal(1.0, &common::bimodal(axis))
        .and_then(|a| a.error_report())
        .map_err(|e| e.to_string())?;
    let sat = (retro.dei_x * retro.dei_p - 0.5).abs();
    check(
        worst >= -1e-9 && sat <= 1e-6,
        format!("min margin over 50 states {worst:.3e}, retrodictive optimum |product - ħ/2| {sat:.3e}"),
    )
}

fn husimi_theorem() -> Outcome {
    let g = common::grid();
    let (mut gap, mut swap) = (0.0f64, 0.0f64);
    for (_, psi) in common::system_states(g) {
        for lambda_i in [0.7, 1.0, 1.4] {
            let run = || -> akmeter::Result<(f64, f64)> {
                let q = husimi(&psi, lambda_i)?;
                let ga = make_retrodictively_optimal(lambda_i, &common::coherent(g, 0.0, 0.0, 1.0))?;
                let bi = make_retrodictively_optimal(lambda_i, &common::bimodal(g))?;
                let rg = outcome_distribution_convolution(&psi, &ga)?;
                let rb = outcome_distribution_convolution(&psi, &bi)?;
                Ok((rg.l1_distance(&q)?, rg.l1_distance(&rb)?))
            };
            let (a, b) = run().map_err(|e| e.to_string())?;
            gap = gap.max(a);
            swap = swap.max(b);
        }
    }
    check(
        gap < 1e-6 && swap < 1e-8,
        format!("max L1(ρ, Q) {gap:.3e}, max L1 under φ_f swap {swap:.3e}"),
    )
}

fn dual_route() -> Outcome {
    let g = common::grid();
    let mut worst = 0.0f64;
    for (_, psi) in common::system_states(g) {
        for (_, ap) in common::apparatus_families(g) {
            let c = outcome_distribution_convolution(&psi, &ap).map_err(|e| e.to_string())?;
            let d = outcome_distribution_direct(&psi, &ap).map_err(|e| e.to_string())?;
            worst = worst.max(c.l1_distance(&d).map_err(|e| e.to_string())?);
        }
    }
    check(worst < 1e-6, format!("max L1 over 5×4 corpus {worst:.3e}"))
}

fn arthurs_kelly_bound() -> Outcome {
    let g = common::grid();
    let mut worst = f64::INFINITY;
    for (_, psi) in common::system_states(g) {
        for (_, ap) in common::apparatus_families(g) {
            let rho = outcome_distribution_convolution(&psi, &ap).map_err(|e| e.to_string())?;
            let (sx, sp) = pointer_variances(&rho);
            worst = worst.min(sx * sp - g.hbar());
        }
    }
    let ap = make_completely_optimal(1.0, 1.0, g).map_err(|e| e.to_string())?;
    let rho = outcome_distribution_convolution(&common::coherent(g, 0.0, 0.0, 1.0), &ap).map_err(|e| e.to_string())?;
    let (sx, sp) = pointer_variances(&rho);
    let sat = (sx * sp - 1.0).abs();
    check(
        worst >= -1e-9 && sat < 1e-4,
        format!("min ΔμXΔμP - ħ over corpus {worst:.3e}, saturation gap {sat:.3e}"),
    )
}

fn disturbance_formula() -> Outcome {
    let g = common::grid();
    let dd = |li: f64, lf: f64| -> akmeter::Result<f64> {
        Ok(make_completely_optimal(li, lf, g)?.error_report()?.disturbance_product())
    };
    let mut worst = 0.0f64;
    for (li, lf) in [(1.0f64, 1.0f64), (1.0, 2.0), (0.5, 1.0)] {
        let formula = 0.5 * (2.0 + (lf / li).powi(2) + (li / lf).powi(2)).sqrt();
        worst = worst.max((dd(li, lf).map_err(|e| e.to_string())? - formula).abs());
    }
    let mut floor = f64::INFINITY;
    let mut arg = 0.0;
    for k in 0..=16 {
        let lf = 0.5 * 2f64.powf(k as f64 / 8.0);
        let v = dd(1.0, lf).map_err(|e| e.to_string())?;
        if v < floor {
            floor = v;
            arg = lf;
        }
    }
    check(
        worst < 1e-6 && (floor - 1.0).abs() < 1e-6 && arg == 1.0,
        format!("max |ΔdxΔdp - formula| {worst:.3e}, scan minimum {floor:.9} at λf/λi = {arg}"),
    )
}

fn minimal_disturbance() -> Outcome {
    let g = common::grid();
    let states = [common::coherent(g, 0.5, -0.3, 1.0), common::system_states(g).remove(3).1];
    let (mut d_gap, mut e_gap, mut cross, mut l1) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for eta in [0.0, 0.5, std::f64::consts::LN_2, 1.0] {
        let mut run = || -> akmeter::Result<()> {
            let ap = make_minimally_disturbing(1.0, eta, g)?;
            let r = ap.error_report()?;
            d_gap = d_gap.max((r.disturbance_product() - (-eta).exp()).abs());
            let floor = 0.5 * eta.cosh();
            e_gap = e_gap.max((r.dei_x * r.dei_p - floor).abs()).max((r.def_x * r.def_p - floor).abs());
            cross = cross.max(r.cross_term_x.abs()).max(r.cross_term_p.abs());
            for psi in &states {
                let rho = outcome_distribution_convolution(psi, &ap)?;
                l1 = l1.max(rho.l1_distance(&smeared_wigner(psi, 1.0, eta)?)?);
            }
            Ok(())
        };
        run().map_err(|e| e.to_string())?;
    }
    check(
        d_gap < 1e-6 && e_gap < 1e-6 && cross < 1e-8 && l1 < 1e-6,
        format!(
            "|ΔdxΔdp - ħe^-η| {d_gap:.3e}, |error product - (ħ/2)cosh η| {e_gap:.3e}, |⟨εδ⟩| {cross:.3e}, L1(ρ, smeared W) {l1:.3e}"
        ),
    )
}

fn preparation() -> Outcome {
    let g = common::grid();
    let psi = common::coherent(g, 0.0, 0.0, 1.0);
    let run = || -> akmeter::Result<(f64, f64)> {
        let ap = make_predictively_optimal(1.0, &common::coherent(g, 0.0, 0.0, 1.0))?;
        let rho = outcome_distribution_direct(&psi, &ap)?;
        let (mut fid, mut td) = (f64::INFINITY, 0.0f64);
        for (x, p) in [(0.0, 0.0), (1.0, -1.0), (-1.5, 1.0)] {
            let region = OutcomeRegion::around(x, p, 0.05, 0.05)?;
            let cond = conditional_state_factorized(&psi, &ap, &region)?;
            fid = fid.min(cond.fidelity_with_pure(&common::coherent(g, x, p, 1.0))?);
            let rec = anti_husimi_on_region(&rho, &ap, &region)?.density_matrix()?;
            td = td.max(rec.trace_distance(&cond)?);
        }
        Ok((fid, td))
    };
    let (fid, td) = run().map_err(|e| e.to_string())?;
    check(
        fid >= 0.99 && td < 1e-5,
        format!("min coherent fidelity {fid:.6}, max anti-Husimi trace distance {td:.3e}"),
    )
}

fn appendix() -> Outcome {
    let v = appendix_suite(COARSE_N, 1.0).map_err(|e| e.to_string())?;
    let failed: Vec<String> = v.iter().filter(|x| !x.passed).map(|x| x.name.clone()).collect();
    let worst = v.iter().map(|x| x.margin).fold(f64::INFINITY, f64::min);
    check(
        failed.is_empty(),
        format!("{} kernel checks, smallest margin {worst:.3e}{}", v.len(), if failed.is_empty() {
            String::new()
        } else {
            format!(", failed: {}", failed.join(" "))
        }),
    )
}

fn hygiene() -> Outcome {
    let g = common::grid();
    let (mut parseval, mut marg, mut fd) = (0.0f64, 0.0f64, 0.0f64);
    let mut bound = true;
    for (_, psi) in common::system_states(g) {
        let run = || -> akmeter::Result<(f64, f64, f64, bool)> {
            let q = psi.to_momentum_rep()?;
            let w = wigner_of_pure(&psi)?;
            let mx = w.marginal_x().iter().zip(psi.amps()).map(|(m, a)| (m - a.norm_sqr()).abs()).fold(0.0, f64::max);
            let mp = w.marginal_p().iter().zip(q.amps()).map(|(m, a)| (m - a.norm_sqr()).abs()).fold(0.0, f64::max);
            let s = common::spectral_p2(&psi);
            Ok((
                (q.norm_sq() - psi.norm_sq()).abs(),
                mx.max(mp),
                (s - common::finite_difference_p2(&psi)).abs() / s.max(1.0),
                w.satisfies_wigner_bound(),
            ))
        };
        let (a, b, c, d) = run().map_err(|e| e.to_string())?;
        parseval = parseval.max(a);
        marg = marg.max(b);
        fd = fd.max(c);
        bound &= d;
    }
    check(
        parseval < 1e-12 && marg < 1e-9 && fd < 1e-6 && bound,
        format!("Parseval {parseval:.3e}, Wigner marginals {marg:.3e}, FD vs FFT ⟨p²⟩ {fd:.3e}, |W| ≤ 1/πħ {bound}"),
    )
}

fn sampling() -> Outcome {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/scenarios/complete_opt_coherent.toml");
    let run = || -> akmeter::Result<(akmeter::measurement::ChiSquareResult, Vec<u8>, usize, u64)> {
        let sc = Scenario::load(&path)?;
        let spec = sc.sampling.ok_or_else(|| akmeter::Error::Scenario("no sampling section".into()))?;
        let r = run_scenario_full(&sc)?;
        let mut buf = Vec::new();
        write_samples_csv(r.samples.as_deref().unwrap_or_default(), &mut buf)?;
        Ok((r.report.chi_square.unwrap(), buf, spec.count, spec.seed))
    };
    let (t, a, count, seed) = run().map_err(|e| e.to_string())?;
    let (_, b, _, _) = run().map_err(|e| e.to_string())?;
    check(
        t.passed && a == b && count == 100_000 && seed == 42,
        format!(
            "{count} samples at seed {seed}: χ² {:.2} ≤ {:.2} (dof {}, α {}), rerun identical {}",
            t.statistic,
            t.critical,
            t.dof,
            t.significance,
            a == b
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("error-relation suite", error_relations),
        ("Husimi theorem", husimi_theorem),
        ("dual-route outcome distribution", dual_route),
        ("Arthurs-Kelly pointer bound", arthurs_kelly_bound),
        ("completely optimal disturbance formula", disturbance_formula),
        ("minimal-disturbance trade-off", minimal_disturbance),
        ("coherent-state preparation", preparation),
        ("measurement-kernel closure", appendix),
        ("numerics hygiene", hygiene),
        ("outcome sampling", sampling),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = f();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS [{:>2}] {name}: {d} ({secs:.1}s)", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL [{:>2}] {name}: {d} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
