mod common;

use isomono::flows::{
    b_from_c, certify, check_residuals, divisor_block, divisor_flow, divisor_flow_with, divisor_trajectory, elementary_down,
    elementary_pair_exponents, elementary_pair_roots, elementary_up, factor_flow, factor_trajectory, factor_trajectory_residual,
    group_kappa, schlesinger_action, schlesinger_action_ordered, MoveOrder, Schedule,
};
use isomono::linalg::{c, identity, CMatrix};
use isomono::random::RandomSystem;
use isomono::refactor::{exchange_residual, spectral_curve, telescope_residual};
use isomono::{Complex64, Congruence, DivisorState, FactorState, LatticePoint, MatrixPolynomial, Tolerances, Variant};

const SEEDS: std::ops::Range<u64> = 100..105;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn sample_points(count: usize) -> Vec<Complex64> {
    (0..count).map(|k| Complex64::from_polar(2.5 + 0.1 * k as f64, 0.7 * k as f64 + 0.3)).collect()
}

fn divisor_state(sys: &RandomSystem, variant: Variant) -> DivisorState {
    DivisorState::from_polynomial(&sys.polynomial, sys.groups.clone(), variant, &tol()).unwrap()
}

fn factor_state(sys: &RandomSystem, variant: Variant) -> FactorState {
    FactorState::from_polynomial(&sys.polynomial, sys.groups.clone(), variant, &tol()).unwrap()
}

#[test]
fn down_then_up_restores_the_system() {
    let t = tol();
    for seed in SEEDS {
        let sys = RandomSystem::generate(seed, 2, 2, Congruence::Additive);
        let a = &sys.polynomial;
        let root = sys.groups.groups[0][0];
        let (r, down) = elementary_down(a, root, 0, &t).unwrap();
        assert!(r.inverse_residual(&sample_points(5)) < 1e-9);
        assert!(r.det_residual(&sample_points(5)) < 1e-9);
        let roots = a.eigenvalues(&t).unwrap();
        let kappa: Vec<i64> = roots.iter().map(|x| if (x - root).norm() < 1e-9 { -1 } else { 0 }).collect();
        let cert = certify(a, &down, &kappa, &[1, 0], &t).unwrap();
        assert!(cert.root_shift_error < 1e-6, "{cert:?}");
        assert!(cert.exponent_shift_error < 1e-8, "{cert:?}");
        assert!(cert.leading_change < 1e-12, "{cert:?}");

        let (r_up, back) = elementary_up(&down, root - 1.0, 0, &t).unwrap();
        assert!(r_up.inverse_residual(&sample_points(5)) < 1e-9);
        assert!(r_up.det_residual(&sample_points(5)) < 1e-9);
        assert!(back.rel_distance(a) < 1e-8, "seed {seed}: {}", back.rel_distance(a));
    }
}

#[test]
fn gauge_relation_holds_pointwise() {
    let t = tol();
    let sys = RandomSystem::generate(11, 3, 2, Congruence::Additive);
    let a = &sys.polynomial;
    let root = sys.groups.groups[1][2];
    for (r, out) in [elementary_down(a, root, 2, &t).unwrap(), elementary_up(a, root, 1, &t).unwrap()] {
        for z in sample_points(4) {
            let lhs = out.evaluate(z) * r.evaluate(z);
            let rhs = r.evaluate(z + 1.0) * a.evaluate(z);
            assert!((&lhs - &rhs).norm() / rhs.norm() < 1e-10);
        }
    }
}

#[test]
fn paired_moves_shift_as_documented() {
    let t = tol();
    for seed in SEEDS {
        let sys = RandomSystem::generate(seed, 2, 2, Congruence::Additive);
        let a = &sys.polynomial;
        let roots = a.eigenvalues(&t).unwrap();
        let (r, out) = elementary_pair_roots(a, roots[0], roots[3], &t).unwrap();
        assert!(r.inverse_residual(&sample_points(5)) < 1e-9);
        assert!(r.det_residual(&sample_points(5)) < 1e-9);
        let cert = certify(a, &out, &[-1, 0, 0, 1], &[0, 0], &t).unwrap();
        assert!(cert.root_shift_error < 1e-6 && cert.exponent_shift_error < 1e-8, "{cert:?}");

        let (r, out) = elementary_pair_exponents(a, 0, 1, &t).unwrap();
        assert!(r.inverse_residual(&sample_points(5)) < 1e-9);
        for z in sample_points(3) {
            assert!((r.evaluate(z).determinant() - 1.0).norm() < 1e-9);
        }
        let cert = certify(a, &out, &[0, 0, 0, 0], &[1, -1], &t).unwrap();
        assert!(cert.root_shift_error < 1e-6 && cert.exponent_shift_error < 1e-8, "{cert:?}");
    }
}

#[test]
fn action_certificates_on_random_data() {
    let t = tol();
    let cases: [(&[i64], &[i64]); 4] = [(&[-1, 0, 1, 0], &[0, 0]), (&[-1, -1, 0, 0], &[1, 1]), (&[1, 0, 0, -2], &[0, 1]), (&[0, 0, 0, 0], &[2, -2])];
    for seed in SEEDS {
        let sys = RandomSystem::generate(seed, 2, 2, Congruence::Additive);
        for (kappa, delta) in cases {
            let out = schlesinger_action(&sys.polynomial, kappa, delta, &t).unwrap();
            let cert = certify(&sys.polynomial, &out.polynomial, kappa, delta, &t).unwrap();
            assert!(cert.root_shift_error < 1e-6, "seed {seed} {kappa:?}: {cert:?}");
            assert!(cert.exponent_shift_error < 1e-8, "seed {seed} {kappa:?}: {cert:?}");
            assert!(cert.leading_change < 1e-12);
            let rev = schlesinger_action_ordered(&sys.polynomial, kappa, delta, MoveOrder::Reverse, &t).unwrap();
            let gap = rev.polynomial.rel_distance(&out.polynomial);
            assert!(gap < 1e-7, "seed {seed} {kappa:?}: order dependence {gap:.3e}");
        }
    }
}

#[test]
fn action_round_trip() {
    let t = tol();
    let sys = RandomSystem::generate(5, 2, 2, Congruence::Additive);
    let (kappa, delta) = ([1, -1, 0, 1], [0, -1]);
    let there = schlesinger_action(&sys.polynomial, &kappa, &delta, &t).unwrap();
    // Re-index the inverse shift over the moved roots, which are re-sorted.
    let moved = there.polynomial.eigenvalues(&t).unwrap();
    let back_kappa: Vec<i64> = moved
        .iter()
        .map(|x| {
            let r = there.roots_after.iter().position(|y| (x - y).norm() < 1e-6).unwrap();
            -kappa[r]
        })
        .collect();
    let back = schlesinger_action(&there.polynomial, &back_kappa, &[0, 1], &t).unwrap();
    assert!(back.polynomial.rel_distance(&sys.polynomial) < 1e-8);
}

#[test]
fn unit_group_shift_multiplier_is_the_divisor() {
    let t = tol();
    for seed in SEEDS {
        for (m, n) in [(2, 2), (2, 3), (3, 2)] {
            let sys = RandomSystem::generate(seed, m, n, Congruence::Additive);
            let a = &sys.polynomial;
            let roots = a.eigenvalues(&t).unwrap();
            for i in 0..n {
                let k: Vec<i64> = (0..n).map(|j| i64::from(j == i)).collect();
                let kappa = group_kappa(&roots, &sys.groups, &k, &t).unwrap();
                let out = schlesinger_action(a, &kappa, &vec![1; m], &t).unwrap();
                let r = out.chain.polynomial(m, &t).unwrap();
                let b = a.right_divisor(&sys.groups.groups[i], &t).unwrap();
                assert_eq!(r.degree(), 1);
                assert!((r.coeff(0) - identity(m)).norm() < 1e-8);
                assert!((r.coeff(1) + &b).norm() < 1e-8, "seed {seed} m={m} n={n} i={i}");
                // The new system is (z + 1 − B_i) Â(z) where A = Â (z − B_i).
                let (hat, rem) = a.divide_right(&b);
                assert!(rem.norm() < 1e-8 * a.norm());
                let expect = MatrixPolynomial::linear(&identity(m), &(&b - identity(m))).mul(&hat);
                assert!(out.polynomial.rel_distance(&expect) < 1e-8);
            }
        }
    }
}

#[test]
fn divisor_flow_satisfies_the_lattice_equations() {
    let t = tol();
    for seed in SEEDS {
        for (m, n) in [(2, 2), (2, 3)] {
            let sys = RandomSystem::generate(seed, m, n, Congruence::Additive);
            let s = divisor_state(&sys, Variant::Difference);
            let block = divisor_block(&s, 1, &t).unwrap();
            let rep = check_residuals(&block, &sys.a0, Variant::Difference, &t).unwrap();
            assert!(rep.max() < 1e-8, "seed {seed}: {rep:?}");
            assert!(rep.exchange_rule.count > 0 && rep.twist_rule.count > 0);
        }
    }
}

#[test]
fn spectra_follow_the_shift_law() {
    let t = tol();
    for seed in SEEDS {
        let sys = RandomSystem::generate(seed, 2, 2, Congruence::Additive);
        let s = divisor_state(&sys, Variant::Difference);
        let path = divisor_trajectory(&s, &LatticePoint(vec![3, -2]), Schedule::DiagonalFirst, &t).unwrap();
        for st in &path {
            assert!(st.spectrum_error(&t).unwrap() < 1e-6, "seed {seed} at {}", st.k);
            // Each B_i(k) is a right divisor of the transformed polynomial.
            let p = st.polynomial(&t).unwrap();
            for b in &st.b {
                assert!(p.verify_divisor(b) < 1e-8);
            }
        }
    }
}

#[test]
fn schedules_agree() {
    let t = tol();
    for seed in SEEDS {
        let sys = RandomSystem::generate(seed, 2, 2, Congruence::Additive);
        let s = divisor_state(&sys, Variant::Difference);
        for target in [LatticePoint(vec![2, -1]), LatticePoint(vec![-2, 1]), LatticePoint(vec![1, 3])] {
            let a = divisor_flow_with(&s, &target, Schedule::DiagonalFirst, &t).unwrap();
            let b = divisor_flow_with(&s, &target, Schedule::UnitSteps, &t).unwrap();
            for (x, y) in a.b.iter().zip(&b.b) {
                assert!(isomono::linalg::rel_diff(x, y) < 1e-7, "seed {seed} at {target}");
            }
        }
    }
}

#[test]
fn divisor_and_factor_routes_agree() {
    let t = tol();
    for seed in SEEDS {
        let sys = RandomSystem::generate(seed, 2, 2, Congruence::Additive);
        let s = divisor_state(&sys, Variant::Difference);
        let f = factor_state(&sys, Variant::Difference);
        for k in LatticePoint::cube(2, 2) {
            let via_b = divisor_flow(&s, &k, &t).unwrap();
            let via_c = b_from_c(&f, &k, &t).unwrap();
            for (x, y) in via_b.b.iter().zip(&via_c.b) {
                let gap = isomono::linalg::rel_diff(x, y);
                assert!(gap < 1e-7, "seed {seed} at {k}: {gap:.3e}");
            }
        }
    }
}

#[test]
fn factor_flows_commute_and_telescope() {
    let t = tol();
    for seed in SEEDS {
        for (m, n) in [(2, 2), (2, 3), (3, 3)] {
            let sys = RandomSystem::generate(seed, m, n, Congruence::Additive);
            let seq = factor_state(&sys, Variant::Difference).sequence(&t).unwrap();
            for i in 1..=n as i64 {
                let back = seq.flow(i, &t).unwrap().inverse_flow(i, &t).unwrap();
                assert!(back.distance(&seq) < 1e-10);
                for j in (i + 1)..=n as i64 {
                    let ij = seq.flow(j, &t).unwrap().flow(i, &t).unwrap();
                    let ji = seq.flow(i, &t).unwrap().flow(j, &t).unwrap();
                    assert!(ij.distance(&ji) < 1e-8, "seed {seed}: F_{i}, F_{j}");
                    assert!(exchange_residual(&seq, i, j, &t).unwrap() < 1e-9);
                }
            }
            assert!(telescope_residual(&seq, 1, &t).unwrap() < 1e-10);
        }
    }
}

#[test]
fn factor_trajectory_keeps_window_identities() {
    let t = tol();
    let sys = RandomSystem::generate(21, 2, 3, Congruence::Additive);
    let f = factor_state(&sys, Variant::Difference);
    let path = factor_trajectory(&f, &LatticePoint(vec![2, -1, 1]), &t).unwrap();
    assert_eq!(path.len(), 5);
    assert!(factor_trajectory_residual(&path, &t).unwrap().within(1e-9));
    for st in &path {
        assert!(st.spectrum_error(&t).unwrap() < 1e-7);
    }
}

#[test]
fn q_variant_conjugation_and_scaling() {
    let t = tol();
    let q = c(0.7, 0.0);
    let variant = Variant::q(q).unwrap();
    for seed in SEEDS {
        let sys = RandomSystem::generate(seed, 2, 2, Congruence::Multiplicative { q });
        let s = divisor_state(&sys, variant);
        // One diagonal step through the cube versus the closed-form twist.
        let through = divisor_flow_with(&s, &LatticePoint(vec![1, 1]), Schedule::UnitSteps, &t).unwrap();
        let a0_inv = sys.a0.clone().try_inverse().unwrap();
        for (b0, b1) in s.b.iter().zip(&through.b) {
            let expect: CMatrix = &a0_inv * b0 * &sys.a0 / q;
            assert!((b1 - &expect).norm() / expect.norm() < 1e-10, "seed {seed}");
        }
        let out = divisor_flow(&s, &LatticePoint(vec![2, -1]), &t).unwrap();
        for i in 0..2 {
            let scaled: Vec<Complex64> = sys.groups.groups[i].iter().map(|a| a * q.powi(-(out.k[i] as i32))).collect();
            let actual = isomono::linalg::eigenvalues(&out.b[i]).unwrap();
            assert!(isomono::linalg::match_spectra(&scaled, &actual, 1e-6).unwrap() < 1e-6);
        }
        let block = divisor_block(&s, 1, &t).unwrap();
        assert!(check_residuals(&block, &sys.a0, variant, &t).unwrap().max() < 1e-8);
    }
}

#[test]
fn autonomous_flow_conserves_spectra_and_curve() {
    let t = tol();
    let sys = RandomSystem::generate(3, 2, 2, Congruence::Distinct);
    let f = factor_state(&sys, Variant::Autonomous);
    let curve0 = spectral_curve(&f.polynomial());
    let scale = curve0.iter().flatten().map(|z| z.norm()).fold(1.0, f64::max);
    let mut seq = f.sequence(&t).unwrap();
    for step in 0..100 {
        seq = seq.flow(1 + step % 2, &t).unwrap();
        assert!(seq.type_drift(&t).unwrap() < 1e-8, "step {step}");
        let curve = spectral_curve(&seq.polynomial());
        let drift = curve.iter().flatten().zip(curve0.iter().flatten()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(drift < 1e-8 * scale, "step {step}: {drift:.3e}");
    }
}

#[test]
fn factor_flow_reaches_its_target() {
    let t = tol();
    let sys = RandomSystem::generate(8, 2, 2, Congruence::Additive);
    let f = factor_state(&sys, Variant::Difference);
    let target = LatticePoint(vec![-1, 2]);
    let out = factor_flow(&f, &target, &t).unwrap();
    assert_eq!(out.l, target);
    assert!(out.spectrum_error(&t).unwrap() < 1e-7);
}
