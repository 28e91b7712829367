//! ρ_r and the convergence constant C = k₁k₂/(k₃·ν·‖𝟏‖).

use nalgebra::{DMatrix, SymmetricEigen};
use num_traits::Signed;
use serde::Serialize;

use crate::cone::{BasisTag, ConeKind, ConeOperator};
use crate::error::{Error, Result};
use crate::field::{format_rational, lift_f64, rat, rat_int, Field, Rational};
use crate::linalg::Matrix;

/// ρ_r = r(1 − 3r − 2r²)/(1 − r − 2r²), for 0 < r ≤ 1/4.
pub fn rho(r: &Rational) -> Result<Rational> {
    if *r <= Rational::zero() || *r > rat(1, 4) {
        return Err(Error::InvalidParameter(format!(
            "r must lie in (0, 1/4], got {}",
            format_rational(r)
        )));
    }
    let r2 = r * r;
    let num = r * (rat_int(1) - rat_int(3) * r - rat_int(2) * &r2);
    let den = rat_int(1) - r - rat_int(2) * &r2;
    Ok(num / den)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ClosedForm,
    Gershgorin,
    Eigenvalue,
    User,
}

/// One-sided bounds: k₁, k₂ and C from below, k₃ and ‖𝟏‖ from above.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceConstants {
    pub rho_r: Rational,
    pub k1: Rational,
    pub k2: Rational,
    pub k3: Rational,
    pub nu: usize,
    pub norm_one: Rational,
    pub c_lower: Rational,
    pub k1_provenance: Provenance,
    pub k2_provenance: Provenance,
    pub k3_provenance: Provenance,
}

impl ConvergenceConstants {
    #[allow(clippy::too_many_arguments)]
    pub fn assemble(
        r: &Rational,
        k1: (Rational, Provenance),
        k2: (Rational, Provenance),
        k3: (Rational, Provenance),
        nu: usize,
        norm_one: Rational,
    ) -> Result<Self> {
        if k1.0 <= Rational::zero() || k2.0 <= Rational::zero() || k3.0 <= Rational::zero() {
            return Err(Error::InvalidParameter("k1, k2, k3 must be positive".into()));
        }
        let c_lower = &k1.0 * &k2.0 / (&k3.0 * rat_int(nu as i64) * &norm_one);
        Ok(ConvergenceConstants {
            rho_r: rho(r)?,
            k1: k1.0,
            k2: k2.0,
            k3: k3.0,
            nu,
            norm_one,
            c_lower,
            k1_provenance: k1.1,
            k2_provenance: k2.1,
            k3_provenance: k3.1,
        })
    }

    /// ρ_r·C, the factor in the stopping rule Δc ≤ ρ_r·C·ε.
    pub fn stopping_factor(&self) -> Rational {
        &self.rho_r * &self.c_lower
    }

    pub fn to_json(&self) -> serde_json::Value {
        let both = |q: &Rational| serde_json::json!({ "exact": format_rational(q), "approx": q.to_f64() });
        serde_json::json!({
            "rho_r": both(&self.rho_r),
            "k1": { "value": both(&self.k1), "provenance": self.k1_provenance },
            "k2": { "value": both(&self.k2), "provenance": self.k2_provenance },
            "k3": { "value": both(&self.k3), "provenance": self.k3_provenance },
            "nu": self.nu,
            "norm_one": both(&self.norm_one),
            "C_lower": both(&self.c_lower),
        })
    }
}

/// A rational k₂ ≤ ½√(3 − √5), checked exactly: 4k² ≤ 3 − √5 ⟺ 3 − 4k² ≥ 0 and (3 − 4k²)² ≥ 5.
pub fn univariate_k2() -> Rational {
    let approx = 0.5 * (3.0 - 5f64.sqrt()).sqrt();
    let ulp = Rational::new(1.into(), num_bigint::BigInt::from(1u8) << 64usize);
    let mut k = lift_f64(approx).expect("finite");
    loop {
        let s = rat_int(3) - rat_int(4) * &k * &k;
        if s >= Rational::zero() && &s * &s >= rat_int(5) {
            return k;
        }
        k -= &ulp;
    }
}

/// Closed-form constants for the even Chebyshev interval cone of degree 2d.
#[allow(non_snake_case)]
pub fn univariate_C(d: usize) -> Result<ConvergenceConstants> {
    univariate_C_with_r(d, &rat(1, 4))
}

#[allow(non_snake_case)]
pub fn univariate_C_with_r(d: usize, r: &Rational) -> Result<ConvergenceConstants> {
    if d < 1 {
        return Err(Error::InvalidDegree(d));
    }
    ConvergenceConstants::assemble(
        r,
        (rat_int(1), Provenance::ClosedForm),
        (univariate_k2(), Provenance::ClosedForm),
        (rat_int(d as i64 + 1), Provenance::ClosedForm),
        2 * d + 1,
        rat_int(1),
    )
}

/// The (2d+1)×(2d+1) matrix M with wᵀMw ≤ tr(Λ₁(w)²) for the Chebyshev cone.
pub fn univariate_k2_matrix(d: usize) -> Matrix<Rational> {
    let n = 2 * d + 1;
    let mut m = Matrix::<Rational>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = match i.cmp(&d) {
            std::cmp::Ordering::Less => rat(5, 4),
            std::cmp::Ordering::Equal => rat_int(2),
            std::cmp::Ordering::Greater => rat(1, 4),
        };
        let j = 2 * d - i;
        if j != i {
            m[(i, j)] = rat(1, 4);
        }
    }
    m
}

/// Smallest eigenvalue of a symmetric matrix, in floating point.
pub fn lambda_min(m: &Matrix<f64>) -> f64 {
    eigenvalues(m).into_iter().fold(f64::INFINITY, f64::min)
}

pub fn lambda_max(m: &Matrix<f64>) -> f64 {
    eigenvalues(m).into_iter().fold(f64::NEG_INFINITY, f64::max)
}

fn eigenvalues(m: &Matrix<f64>) -> Vec<f64> {
    let n = m.rows();
    let dm = DMatrix::from_row_slice(n, n, m.as_slice());
    SymmetricEigen::new(dm).eigenvalues.iter().copied().collect()
}

/// σ_min(Λ) under the trace inner product, shrunk by the factor 1 − 1e−8.
pub fn k2_general(op: &ConeOperator) -> f64 {
    let gram: Matrix<f64> = op.trace_gram();
    lambda_min(&gram).max(0.0).sqrt() * (1.0 - 1e-8)
}

/// Largest absolute row sum over all blocks of Σ_k Σ_u |T⁽ⁱ⁾[j][k][u]|, an upper
/// bound on λ_max(Λ(y)) for ‖y‖_∞ ≤ 1.
pub fn k3_gershgorin(op: &ConeOperator) -> Rational {
    let mut best = Rational::zero();
    for (b, &l) in op.block_dims().iter().enumerate() {
        let mut rows = vec![Rational::zero(); l];
        for e in op.entries(b) {
            let a = Signed::abs(&e.value);
            rows[e.row] += &a;
            if e.row != e.col {
                rows[e.col] += a;
            }
        }
        for r in rows {
            if r > best {
                best = r;
            }
        }
    }
    best
}

/// A rational upper bound on √q.
pub fn sqrt_upper(q: &Rational) -> Rational {
    if q.is_zero() {
        return Rational::zero();
    }
    let mut s = lift_f64(q.to_f64().sqrt()).expect("finite");
    let step = &s * rat(1, 1 << 50) + Rational::new(1.into(), num_bigint::BigInt::from(1u8) << 200usize);
    while &s * &s < *q {
        s += &step;
    }
    s
}

/// Constants for any cone, given a lower bound on k₁. k₂ comes from the trace Gram
/// eigenvalue (numeric) and k₃ from Gershgorin row sums.
pub fn constants_for_cone(op: &ConeOperator, k1: Rational, k1_provenance: Provenance, r: &Rational) -> Result<ConvergenceConstants> {
    let k2 = k2_general(op);
    if !(k2 > 0.0) {
        return Err(Error::NotInjective { rank: 0, dim: op.dim() });
    }
    let norm_sq = op.one().iter().fold(Rational::zero(), |acc, v| acc + v * v);
    ConvergenceConstants::assemble(
        r,
        (k1, k1_provenance),
        (lift_f64(k2)?, Provenance::Eigenvalue),
        (k3_gershgorin(op), Provenance::Gershgorin),
        op.nu(),
        sqrt_upper(&norm_sq),
    )
}

/// Constants used when the solver is asked to pick C itself: the closed form for the
/// even Chebyshev cone, and for the other built-in interval cones k₁ = 1 (every basis
/// polynomial is bounded by 1 on [−1, 1] and p₀ = 1) with numeric k₂ and Gershgorin k₃.
pub fn auto_constants(op: &ConeOperator, r: &Rational) -> Option<ConvergenceConstants> {
    match (op.kind(), op.basis_tag()) {
        (ConeKind::IntervalEven { d }, BasisTag::Chebyshev) => univariate_C_with_r(d, r).ok(),
        (ConeKind::IntervalEven { .. } | ConeKind::IntervalOdd { .. }, _) => {
            constants_for_cone(op, rat_int(1), Provenance::ClosedForm, r).ok()
        }
        (ConeKind::Custom, _) => None,
    }
}
