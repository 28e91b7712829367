#![allow(dead_code)]

use dualcert::cone::{build_interval_cone, build_interval_cone_odd, Basis, ConeOperator};
use dualcert::field::{rat, rat_int, Field, Rational};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn cone(d: usize, basis: Basis, odd: bool) -> ConeOperator {
    if odd {
        build_interval_cone_odd(d, basis).unwrap()
    } else {
        build_interval_cone(d, basis).unwrap()
    }
}

pub fn basis_of(i: usize) -> Basis {
    if i % 2 == 0 {
        Basis::Monomial
    } else {
        Basis::Chebyshev
    }
}

/// Moment vector of a positive atomic measure on (−1, 1) with well over as many atoms
/// as any block side, so Λ(x) ≻ 0 with room to spare.
pub fn interior_point(rng: &mut impl Rng, op: &ConeOperator, basis: Basis) -> Vec<Rational> {
    let atoms = (2 * op.block_dims().iter().max().copied().unwrap_or(1) + 3).min(31);
    let mut grid: Vec<i64> = (-15..=15).collect();
    grid.shuffle(rng);
    let mut x = vec![Rational::zero(); op.dim()];
    for &a in grid.iter().take(atoms) {
        let z = rat(a, 16);
        let w = rat(rng.gen_range(1..=4), 1);
        for (xi, p) in x.iter_mut().zip(basis.eval_all(&z, op.dim())) {
            *xi += &w * p;
        }
    }
    x
}

pub fn random_rational_vec(rng: &mut impl Rng, n: usize, range: i64) -> Vec<Rational> {
    (0..n).map(|_| rat(rng.gen_range(-range..=range), rng.gen_range(1..=4))).collect()
}

/// A strictly positive polynomial: the constant 1 times `shift` plus a small random part.
pub fn positive_poly(rng: &mut impl Rng, op: &ConeOperator, shift: i64) -> Vec<Rational> {
    let mut t = random_rational_vec(rng, op.dim(), 1);
    for (ti, oi) in t.iter_mut().zip(op.one()) {
        *ti += oi * rat_int(shift);
    }
    t
}

pub fn to_f64(v: &[Rational]) -> Vec<f64> {
    v.iter().map(Field::to_f64).collect()
}

pub fn neg(v: &[Rational]) -> Vec<Rational> {
    v.iter().map(|x| -x.clone()).collect()
}

pub fn example_cone() -> ConeOperator {
    build_interval_cone(2, Basis::Monomial).unwrap()
}

pub fn example_t() -> Vec<Rational> {
    [1, -1, 1, 1, -1].iter().map(|&v| rat_int(v)).collect()
}

pub fn example_x() -> Vec<Rational> {
    vec![rat_int(5), rat_int(0), rat(5, 2), rat_int(0), rat(15, 8)]
}

pub fn example_cstar() -> f64 {
    (619.0 - 51.0 * 17f64.sqrt()) / 512.0
}
