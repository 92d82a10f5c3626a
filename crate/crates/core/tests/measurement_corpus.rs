mod common;

use akmeter::apparatus::{make_completely_optimal, make_predictively_optimal};
use akmeter::measurement::{
    conditional_state_factorized, conditional_state_general, joint_final_state, outcome_distribution_convolution,
    outcome_distribution_direct, pointer_variances, OutcomeRegion,
};
use akmeter::{Error, GridSpec1D};

#[test]
fn dual_routes_and_pointer_bound_over_corpus() {
    let g = common::grid();
    for (sname, psi) in common::system_states(g) {
        for (aname, ap) in common::apparatus_families(g) {
            let c = outcome_distribution_convolution(&psi, &ap).unwrap();
            let d = outcome_distribution_direct(&psi, &ap).unwrap();
            let gap = c.l1_distance(&d).unwrap();
            assert!(gap < 1e-6, "{sname} × {aname}: {gap}");
            assert!((c.mass() - 1.0).abs() < 1e-6);
            let (sx, sp) = pointer_variances(&c);
            assert!(sx * sp >= g.hbar() - 1e-9, "{sname} × {aname}: {}", sx * sp);
        }
    }
}

#[test]
fn pointer_variances_add_input_and_error_variances() {
    let g = common::grid();
    let psi = common::coherent(g, 0.3, 0.2, 0.9);
    let ap = make_completely_optimal(0.8, 1.25, g).unwrap();
    let (sx, sp) = pointer_variances(&outcome_distribution_convolution(&psi, &ap).unwrap());
    let r = ap.error_report().unwrap();
    assert!((sx * sx - (0.9f64.powi(2) / 2.0 + r.dei_x.powi(2))).abs() < 1e-9);
    assert!((sp * sp - (1.0 / (2.0 * 0.9f64.powi(2)) + r.dei_p.powi(2))).abs() < 1e-9);
}

#[test]
fn conditional_states_are_valid_and_routes_agree() {
    let g = GridSpec1D::centered(64, 0.25, 1.0).unwrap();
    let psi = common::coherent(g, 0.3, -0.3, 1.0);
    let ap = make_predictively_optimal(1.0, &common::coherent(g, 0.0, 0.0, 0.9)).unwrap();
    let joint = joint_final_state(&psi, &ap).unwrap();
    assert!((joint.norm_sq() - 1.0).abs() < 1e-9);
    for region in [
        OutcomeRegion::new(-1.0, 1.0, -1.0, 1.0).unwrap(),
        OutcomeRegion::new(0.0, 3.0, -2.0, 0.5).unwrap(),
        OutcomeRegion::everything(),
    ] {
        let a = conditional_state_factorized(&psi, &ap, &region).unwrap();
        let b = conditional_state_general(&joint, &region).unwrap();
        a.validate().unwrap();
        b.validate().unwrap();
        assert!(a.trace_distance(&b).unwrap() < 1e-6);
    }
    let far = OutcomeRegion::new(7.0, 7.5, 7.0, 7.5).unwrap();
    assert!(matches!(conditional_state_factorized(&psi, &ap, &far), Err(Error::EmptyRegion(_))));
}
