//! Best and near-best lower bounds certified by a fixed dual vector.

use num_traits::Signed;

use crate::certificates::{sufficient_cone_quadratic, DualCertificate};
use crate::cone::BlockSymMatrix;
use crate::error::{Error, Result};
use crate::field::{dot, lift_f64, rat, rat_int, Field, Rational};
use crate::linalg::ldlt_psd;

/// Bisection state: `lo` is certified, `hi` (when known) is not.
#[derive(Clone, Debug)]
pub struct Bracket {
    pub lo: Rational,
    pub hi: Option<Rational>,
    pub history: Vec<(Rational, Option<Rational>)>,
}

/// Certifies t − γ𝟏 through the affine pencil Λ(H⁻¹t) − γΛ(H⁻¹𝟏).
struct Pencil {
    a: BlockSymMatrix<Rational>,
    b: BlockSymMatrix<Rational>,
}

impl Pencil {
    fn new(cert: &DualCertificate<'_>, t: &[Rational]) -> Self {
        let ctx = cert.context();
        let op = ctx.cone();
        Pencil {
            a: op.apply_raw(&ctx.solve_hessian(t)),
            b: op.apply_raw(&ctx.solve_hessian(op.one())),
        }
    }

    fn certified(&self, gamma: &Rational) -> Result<bool> {
        for (a, b) in self.a.blocks.iter().zip(&self.b.blocks) {
            let m = a.sub(&b.scale(gamma));
            if !ldlt_psd(&m)?.is_psd() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Bisection for c_max = max{γ : x certifies t − γ𝟏}, stopping once the bracket
/// is no wider than `tol`.
pub fn best_bound_bracket(cert: &DualCertificate<'_>, t: &[Rational], c_lo: &Rational, tol: f64) -> Result<Bracket> {
    let op = cert.cone();
    if t.len() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            got: t.len(),
        });
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let tol = lift_f64(tol)?;
    let pencil = Pencil::new(cert, t);
    if !pencil.certified(c_lo)? {
        return Err(Error::InvalidStart);
    }
    let mut lo = c_lo.clone();
    let mut history = vec![(lo.clone(), None)];

    // upper end: t at a domain point, else doubling
    let mut hi = match op.domain_point() {
        Some(p) => dot(t, &p),
        None => {
            let mut step = Signed::abs(c_lo).max(rat_int(1));
            let mut found = None;
            for _ in 0..256 {
                let cand = c_lo + &step;
                if pencil.certified(&cand)? {
                    lo = cand;
                    history.push((lo.clone(), None));
                    step *= rat_int(2);
                } else {
                    found = Some(cand);
                    break;
                }
            }
            found.ok_or(Error::NoCertifiableBound)?
        }
    };
    if hi <= lo || pencil.certified(&hi)? {
        return Ok(Bracket {
            lo: hi.clone().max(lo),
            hi: None,
            history,
        });
    }
    history.push((lo.clone(), Some(hi.clone())));
    let half = rat(1, 2);
    while &hi - &lo > tol {
        let mid = (&lo + &hi) * &half;
        if pencil.certified(&mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
        history.push((lo.clone(), Some(hi.clone())));
    }
    Ok(Bracket {
        lo,
        hi: Some(hi),
        history,
    })
}

/// The certified lower end of a bisection bracket of width ≤ `tol` around c_max.
pub fn best_bound_exact(cert: &DualCertificate<'_>, t: &[Rational], c_lo: &Rational, tol: f64) -> Result<Rational> {
    Ok(best_bound_bracket(cert, t, c_lo, tol)?.lo)
}

/// The supremum of {γ : q(γ) ≥ 0, ⟨t − γ𝟏, x⟩ > 0}, rounded down to a rational
/// at which both conditions hold exactly.
pub fn best_bound_quadratic(cert: &DualCertificate<'_>, t: &[Rational]) -> Result<Rational> {
    let ctx = cert.context();
    let op = ctx.cone();
    if t.len() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            got: t.len(),
        });
    }
    let (a, b, c) = sufficient_cone_quadratic(ctx, t, op.one());
    let ox = dot(op.one(), ctx.x());
    if ox <= Rational::zero() {
        return Err(Error::NoCertifiableBound);
    }
    let pairing = dot(t, ctx.x()) / &ox;

    let candidate = quadratic_sup(&a, &b, &c, &pairing).ok_or(Error::NoCertifiableBound)?;
    let q = |g: &Rational| (&a * g + &b) * g + &c;
    let ok = |g: &Rational| q(g) >= Rational::zero() && g < &pairing;

    let mut gamma = lift_f64(candidate)?;
    if ok(&gamma) {
        return Ok(gamma);
    }
    let mut delta = lift_f64(candidate.abs().max(1.0) * f64::EPSILON)?;
    for _ in 0..200 {
        gamma = lift_f64(candidate)? - &delta;
        if ok(&gamma) {
            return Ok(gamma);
        }
        delta *= rat_int(2);
    }
    Err(Error::NoCertifiableBound)
}

/// Floating-point location of the supremum of the admissible branch.
fn quadratic_sup(a: &Rational, b: &Rational, c: &Rational, pairing: &Rational) -> Option<f64> {
    let pf = pairing.to_f64();
    let (af, bf, cf) = (a.to_f64(), b.to_f64(), c.to_f64());
    if a.is_zero() {
        if b.is_zero() {
            return (*c >= Rational::zero()).then_some(pf);
        }
        let root = -cf / bf;
        // bγ + c ≥ 0
        return if *b < Rational::zero() {
            Some(root.min(pf))
        } else if root <= pf {
            Some(pf)
        } else {
            None
        };
    }
    let disc = b * b - rat_int(4) * a * c;
    if disc < Rational::zero() {
        return (*a > Rational::zero()).then_some(pf);
    }
    let sq = disc.to_f64().sqrt();
    // numerically stable pair of roots
    let sgn = if bf >= 0.0 { 1.0 } else { -1.0 };
    let qq = -0.5 * (bf + sgn * sq);
    let (mut r1, mut r2) = if qq == 0.0 { (0.0, 0.0) } else { (qq / af, cf / qq) };
    if r1 > r2 {
        std::mem::swap(&mut r1, &mut r2);
    }
    if *a > Rational::zero() {
        // feasible on (−∞, r1] ∪ [r2, ∞); q(pairing) ≤ 0 puts pairing between the roots
        Some(r1.min(pf))
    } else if r2 <= pf {
        Some(r2)
    } else if r1 <= pf {
        Some(pf)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::{build_interval_cone, Basis, ConeOperator};

    fn example() -> (ConeOperator, Vec<Rational>, Vec<Rational>) {
        let op = build_interval_cone(2, Basis::Monomial).unwrap();
        let x = vec![rat_int(5), rat_int(0), rat(5, 2), rat_int(0), rat(15, 8)];
        let t = [1, -1, 1, 1, -1].iter().map(|&v| rat_int(v)).collect();
        (op, x, t)
    }

    #[test]
    fn example_bounds() {
        let (op, x, t) = example();
        let cert = DualCertificate::new(&op, x).unwrap();
        let c = best_bound_exact(&cert, &t, &rat_int(0), 1e-10).unwrap();
        let expect = (67.0 - 5.0 * 17f64.sqrt()) / 64.0;
        assert!((c.to_f64() - expect).abs() <= 1e-10);
        let cq = best_bound_quadratic(&cert, &t).unwrap();
        let expect_q = (9.0 - 2.0 * 10f64.sqrt()) / 8.0;
        assert!((cq.to_f64() - expect_q).abs() <= 1e-12);
        assert!(cq <= c);
    }

    #[test]
    fn constant_one_has_bound_one() {
        let op = build_interval_cone(2, Basis::Monomial).unwrap();
        let x = vec![rat_int(5), rat_int(0), rat(5, 2), rat_int(0), rat(15, 8)];
        let cert = DualCertificate::new(&op, x).unwrap();
        let c = best_bound_exact(&cert, op.one(), &rat_int(0), 1e-10).unwrap();
        assert_eq!(c, rat_int(1));
    }

    #[test]
    fn invalid_start_detected() {
        let (op, x, t) = example();
        let cert = DualCertificate::new(&op, x).unwrap();
        assert!(matches!(best_bound_exact(&cert, &t, &rat_int(1), 1e-6), Err(Error::InvalidStart)));
    }

    #[test]
    fn bracket_is_monotone() {
        let (op, x, t) = example();
        let cert = DualCertificate::new(&op, x).unwrap();
        let br = best_bound_bracket(&cert, &t, &rat_int(0), 1e-6).unwrap();
        for w in br.history.windows(2) {
            assert!(w[1].0 >= w[0].0);
            if let (Some(h0), Some(h1)) = (&w[0].1, &w[1].1) {
                assert!(h1 <= h0);
            }
        }
    }
}
