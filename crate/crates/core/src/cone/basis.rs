//! Coefficient arithmetic for univariate polynomials in the monomial and
//! Chebyshev (first kind) bases.

use serde::{Deserialize, Serialize};

use crate::field::{Field, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Monomial,
    Chebyshev,
}

impl Basis {
    /// Coefficients of the product `a·b`, in the same basis.
    pub fn mul(self, a: &[Rational], b: &[Rational]) -> Vec<Rational> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
        let half = crate::field::rat(1, 2);
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                if bj.is_zero() {
                    continue;
                }
                let prod = ai * bj;
                match self {
                    Basis::Monomial => out[i + j] += prod,
                    Basis::Chebyshev => {
                        // 2·T_i·T_j = T_{i+j} + T_{|i-j|}
                        let h = &prod * &half;
                        out[i + j] += &h;
                        out[i.abs_diff(j)] += h;
                    }
                }
            }
        }
        out
    }

    /// pⱼ·pₖ as a sparse coefficient list.
    pub(crate) fn unit_product(self, j: usize, k: usize) -> Vec<(usize, Rational)> {
        match self {
            Basis::Monomial => vec![(j + k, crate::field::rat_int(1))],
            Basis::Chebyshev if j == 0 || k == 0 => vec![(j + k, crate::field::rat_int(1))],
            Basis::Chebyshev if j == k => vec![(0, crate::field::rat(1, 2)), (2 * j, crate::field::rat(1, 2))],
            Basis::Chebyshev => vec![
                (j.abs_diff(k), crate::field::rat(1, 2)),
                (j + k, crate::field::rat(1, 2)),
            ],
        }
    }

    /// Product of two sparse coefficient lists, sorted by index with zeros dropped.
    pub(crate) fn mul_sparse(self, a: &[(usize, Rational)], b: &[(usize, Rational)]) -> Vec<(usize, Rational)> {
        let mut acc: std::collections::BTreeMap<usize, Rational> = std::collections::BTreeMap::new();
        let half = crate::field::rat(1, 2);
        for (i, ai) in a {
            for (j, bj) in b {
                let prod = ai * bj;
                match self {
                    Basis::Monomial => *acc.entry(i + j).or_insert_with(Rational::zero) += prod,
                    Basis::Chebyshev => {
                        let h = &prod * &half;
                        *acc.entry(i + j).or_insert_with(Rational::zero) += &h;
                        *acc.entry(i.abs_diff(*j)).or_insert_with(Rational::zero) += h;
                    }
                }
            }
        }
        acc.into_iter().filter(|(_, v)| !v.is_zero()).collect()
    }

    /// Value of the k-th basis polynomial at every order up to `n`, at point `z`.
    pub fn eval_all<F: Field>(self, z: &F, n: usize) -> Vec<F> {
        let mut vals = Vec::with_capacity(n);
        if n == 0 {
            return vals;
        }
        vals.push(F::one());
        if n == 1 {
            return vals;
        }
        vals.push(z.clone());
        let two_z = F::from_i64(2).mul_ref(z);
        for k in 2..n {
            let next = match self {
                Basis::Monomial => vals[k - 1].mul_ref(z),
                Basis::Chebyshev => two_z.mul_ref(&vals[k - 1]) - vals[k - 2].clone(),
            };
            vals.push(next);
        }
        vals
    }

    /// Evaluates the polynomial with coefficient vector `coeffs` at `z`.
    pub fn eval<F: Field>(self, coeffs: &[F], z: &F) -> F {
        let vals = self.eval_all(z, coeffs.len());
        crate::field::dot(coeffs, &vals)
    }

    /// Coefficients of `1 - z²`.
    pub(crate) fn one_minus_z_squared(self) -> Vec<Rational> {
        use crate::field::{rat, rat_int};
        match self {
            Basis::Monomial => vec![rat_int(1), rat_int(0), rat_int(-1)],
            // 1 - z² = (T0 - T2)/2
            Basis::Chebyshev => vec![rat(1, 2), rat_int(0), rat(-1, 2)],
        }
    }

    /// Coefficients of `1 + sign·z` (both bases agree here).
    pub(crate) fn one_plus_signed_z(self, sign: i64) -> Vec<Rational> {
        vec![crate::field::rat_int(1), crate::field::rat_int(sign)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{rat, rat_int};

    #[test]
    fn chebyshev_product_rule() {
        // T2·T3 = (T5 + T1)/2
        let t2 = vec![rat_int(0), rat_int(0), rat_int(1)];
        let t3 = vec![rat_int(0), rat_int(0), rat_int(0), rat_int(1)];
        let p = Basis::Chebyshev.mul(&t2, &t3);
        assert_eq!(p[5], rat(1, 2));
        assert_eq!(p[1], rat(1, 2));
        assert_eq!(p.iter().filter(|c| !c.is_zero()).count(), 2);
        // T0·T0 = T0
        let t0 = vec![rat_int(1)];
        assert_eq!(Basis::Chebyshev.mul(&t0, &t0), vec![rat_int(1)]);
    }

    #[test]
    fn chebyshev_eval_matches_cosine() {
        let theta: f64 = 0.7;
        let vals = Basis::Chebyshev.eval_all(&theta.cos(), 8);
        for (k, v) in vals.iter().enumerate() {
            assert!((v - (k as f64 * theta).cos()).abs() < 1e-13);
        }
    }

    #[test]
    fn one_minus_z2_agrees_across_bases() {
        for z in [-0.9, 0.0, 0.3, 1.0] {
            let m = Basis::Monomial.eval(
                &Basis::Monomial
                    .one_minus_z_squared()
                    .iter()
                    .map(Field::to_f64)
                    .collect::<Vec<f64>>(),
                &z,
            );
            let c = Basis::Chebyshev.eval(
                &Basis::Chebyshev
                    .one_minus_z_squared()
                    .iter()
                    .map(Field::to_f64)
                    .collect::<Vec<f64>>(),
                &z,
            );
            assert!((m - (1.0 - z * z)).abs() < 1e-15);
            assert!((c - (1.0 - z * z)).abs() < 1e-15);
        }
    }
}
