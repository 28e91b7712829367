mod common;

use common::*;
use dualcert::barrier::BarrierContext;
use dualcert::certificates::{
    certifies, corollary_guard, gram_certificate, sufficient_cone_check, DualCertificate,
};
use dualcert::field::{dot, lift_f64, rat, rat_int, Field, Rational};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn instance(seed: u64) -> (ChaCha8Rng, dualcert::cone::ConeOperator, dualcert::cone::Basis) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rng.gen_range(1..=3);
    let basis = basis_of(rng.gen_range(0..2));
    let odd = rng.gen_bool(0.3);
    (rng, cone(d, basis, odd), basis)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    // s = H(x)w with Λ(w) ≻ 0 is certified by x, and the Gram matrix reproduces s.
    #[test]
    fn gram_reconstructs_target(seed in any::<u64>()) {
        let (mut rng, op, basis) = instance(seed);
        let x = interior_point(&mut rng, &op, basis);
        let w = interior_point(&mut rng, &op, basis);
        let cert = DualCertificate::new(&op, x).unwrap();
        let s = cert.context().hessian_mul(&w);
        let g = gram_certificate(&cert, &s).unwrap();
        prop_assert_eq!(op.adjoint(&g.s).unwrap(), s);
        prop_assert!(g.s.is_psd().unwrap());
    }

    #[test]
    fn sufficient_cone_implies_certified(seed in any::<u64>()) {
        let (mut rng, op, basis) = instance(seed);
        let x = interior_point(&mut rng, &op, basis);
        let cert = DualCertificate::new(&op, x).unwrap();
        // perturbations of −g(x) of varying size, so both outcomes occur
        let center = neg(cert.context().gradient());
        let size = rat(rng.gen_range(1..=20), 4);
        let noise = random_rational_vec(&mut rng, op.dim(), 3);
        let t: Vec<Rational> = center.iter().zip(&noise).map(|(c, n)| c + n * &size).collect();
        if sufficient_cone_check(cert.context(), &t).unwrap() {
            prop_assert!(certifies(&cert, &t).unwrap());
        }
    }

    // ‖t − s‖ₓ* ≤ 0.999 around s = −g(x) is always certified.
    #[test]
    fn dikin_neighborhood_certified(seed in any::<u64>()) {
        let (mut rng, op, basis) = instance(seed);
        let x = interior_point(&mut rng, &op, basis);
        let cert = DualCertificate::new(&op, x).unwrap();
        let ctx = cert.context();
        let s = neg(ctx.gradient());
        let delta = random_rational_vec(&mut rng, op.dim(), 5);
        prop_assume!(delta.iter().any(|v| !v.is_zero()));
        let n2 = ctx.dual_local_norm_sq(&delta);
        let target = rat(999, 1000);
        let mut alpha = lift_f64(0.999 / n2.to_f64().sqrt()).unwrap();
        while &alpha * &alpha * &n2 > &target * &target {
            alpha *= rat(999_999, 1_000_000);
        }
        let t: Vec<Rational> = s.iter().zip(&delta).map(|(a, b)| a + b * &alpha).collect();
        prop_assert!(certifies(&cert, &t).unwrap());
    }

    // y is the exact gradient certificate of t = −g(y); any x with ‖x − y‖ₓ < ½ certifies t.
    #[test]
    fn corollary_guard_consistent(seed in any::<u64>()) {
        let (mut rng, op, basis) = instance(seed);
        let y = interior_point(&mut rng, &op, basis);
        let t = neg(BarrierContext::new(&op, y.clone()).unwrap().gradient());
        let scale = rat(rng.gen_range(1..=8), 64);
        let noise = random_rational_vec(&mut rng, op.dim(), 2);
        let x: Vec<Rational> = y.iter().zip(&noise).map(|(a, b)| a + a.clone() * b * &scale).collect();
        let Ok(cert) = DualCertificate::new(&op, x) else { return Ok(()) };
        if corollary_guard(cert.context(), &y).unwrap() {
            prop_assert!(certifies(&cert, &t).unwrap());
        }
    }
}

#[test]
fn negative_polynomials_never_certified() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let op = cone(2, basis_of(rng.gen_range(0..2)), false);
        let basis = if op.basis_tag() == dualcert::cone::BasisTag::Monomial {
            dualcert::cone::Basis::Monomial
        } else {
            dualcert::cone::Basis::Chebyshev
        };
        let x = interior_point(&mut rng, &op, basis);
        let cert = DualCertificate::new(&op, x).unwrap();
        let t: Vec<Rational> = op.one().iter().map(|v| -v.clone()).collect();
        assert!(!certifies(&cert, &t).unwrap());
        // ⟨t, x⟩ < 0 rules out certification for any t
        assert!(dot(&t, cert.x()) < rat_int(0));
    }
}

#[test]
fn sampled_premises_are_not_vacuous() {
    let (mut suff, mut guard) = (0, 0);
    for seed in 0..60u64 {
        let (mut rng, op, basis) = instance(seed);
        let x = interior_point(&mut rng, &op, basis);
        let cert = DualCertificate::new(&op, x.clone()).unwrap();
        let center = neg(cert.context().gradient());
        let noise = random_rational_vec(&mut rng, op.dim(), 3);
        let t: Vec<Rational> = center.iter().zip(&noise).map(|(c, n)| c + n * rat(1, 4)).collect();
        if sufficient_cone_check(cert.context(), &t).unwrap() {
            suff += 1;
            assert!(certifies(&cert, &t).unwrap());
        }
        let y = interior_point(&mut rng, &op, basis);
        let xn: Vec<Rational> = y.iter().zip(&noise).map(|(a, b)| a + a.clone() * b * rat(1, 64)).collect();
        if let Ok(c2) = DualCertificate::new(&op, xn) {
            if corollary_guard(c2.context(), &y).unwrap() {
                guard += 1;
                let t = neg(BarrierContext::new(&op, y).unwrap().gradient());
                assert!(certifies(&c2, &t).unwrap());
            }
        }
    }
    assert!(suff >= 10, "sufficient-cone premise held {suff} times");
    assert!(guard >= 10, "guard premise held {guard} times");
}
