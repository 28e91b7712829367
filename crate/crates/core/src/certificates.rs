//! Dual certificates, Gram extraction and the sufficient-cone test.

use crate::barrier::BarrierContext;
use crate::cone::{BlockSymMatrix, ConeOperator};
use crate::error::{Error, Result};
use crate::field::{dot, Field, Rational};
use crate::linalg::ldlt_psd;

/// An exact interior dual vector with its barrier data cached.
#[derive(Clone, Debug)]
pub struct DualCertificate<'a> {
    ctx: BarrierContext<'a, Rational>,
}

impl<'a> DualCertificate<'a> {
    /// Fails with `NotInterior` unless Λ(x) ≻ 0 exactly.
    pub fn new(op: &'a ConeOperator, x: Vec<Rational>) -> Result<Self> {
        Ok(DualCertificate {
            ctx: BarrierContext::new(op, x)?,
        })
    }

    pub fn x(&self) -> &[Rational] {
        self.ctx.x()
    }

    pub fn cone(&self) -> &'a ConeOperator {
        self.ctx.cone()
    }

    pub fn context(&self) -> &BarrierContext<'a, Rational> {
        &self.ctx
    }

    pub fn certifies(&self, s: &[Rational]) -> Result<bool> {
        certifies_with(&self.ctx, s)
    }
}

/// Λ*(S) = target with every block of S positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct GramCertificate {
    pub s: BlockSymMatrix<Rational>,
    pub target: Vec<Rational>,
}

/// True iff Λ(H(x)⁻¹s) ≽ 0, decided exactly.
pub fn certifies(x: &DualCertificate<'_>, s: &[Rational]) -> Result<bool> {
    x.certifies(s)
}

pub fn certifies_with(ctx: &BarrierContext<'_, Rational>, s: &[Rational]) -> Result<bool> {
    check_len(ctx.cone().dim(), s.len())?;
    let w = ctx.solve_hessian(s);
    ctx.cone().apply_raw(&w).is_psd()
}

/// S = Λ(x)⁻¹ Λ(H(x)⁻¹s) Λ(x)⁻¹, which always satisfies Λ*(S) = s.
pub fn gram_matrix<F: Field>(ctx: &BarrierContext<'_, F>, s: &[F]) -> Result<BlockSymMatrix<F>> {
    check_len(ctx.cone().dim(), s.len())?;
    let w = ctx.solve_hessian(s);
    let lw = ctx.cone().apply_raw(&w);
    Ok(BlockSymMatrix {
        blocks: lw
            .blocks
            .iter()
            .zip(&ctx.lambda_inv().blocks)
            .map(|(m, p)| p.mul(m).mul(p))
            .collect(),
    })
}

/// The Gram certificate of s, or `NotCertified` if S is not PSD.
pub fn gram_certificate(x: &DualCertificate<'_>, s: &[Rational]) -> Result<GramCertificate> {
    let gram = gram_matrix(x.context(), s)?;
    for b in &gram.blocks {
        if !ldlt_psd(b)?.is_psd() {
            return Err(Error::NotCertified);
        }
    }
    Ok(GramCertificate {
        s: gram,
        target: s.to_vec(),
    })
}

/// Coefficients (a, b, c) of q(γ) = (t − γ𝟏)ᵀ(xxᵀ − (ν−1)H(x)⁻¹)(t − γ𝟏) = aγ² + bγ + c.
pub fn sufficient_cone_quadratic<F: Field>(ctx: &BarrierContext<'_, F>, t: &[F], one: &[F]) -> (F, F, F) {
    let x = ctx.x();
    let nu1 = F::from_i64(ctx.cone().nu() as i64 - 1);
    let hinv_t = ctx.solve_hessian(t);
    let hinv_one = ctx.solve_hessian(one);
    let tx = dot(t, x);
    let ox = dot(one, x);
    let a = ox.mul_ref(&ox) - nu1.mul_ref(&dot(one, &hinv_one));
    let cross = tx.mul_ref(&ox) - nu1.mul_ref(&dot(t, &hinv_one));
    let b = -(F::from_i64(2) * cross);
    let c = tx.mul_ref(&tx) - nu1.mul_ref(&dot(t, &hinv_t));
    (a, b, c)
}

/// tᵀ(xxᵀ − (ν−1)H(x)⁻¹)t ≥ 0 and ⟨t, x⟩ > 0. A true result implies x certifies t.
pub fn sufficient_cone_check<F: Field>(ctx: &BarrierContext<'_, F>, t: &[F]) -> Result<bool> {
    check_len(ctx.cone().dim(), t.len())?;
    let tx = dot(t, ctx.x());
    if tx <= F::zero() {
        return Ok(false);
    }
    let nu1 = F::from_i64(ctx.cone().nu() as i64 - 1);
    let q = tx.mul_ref(&tx) - nu1.mul_ref(&ctx.dual_local_norm_sq(t));
    Ok(q >= F::zero())
}

#[derive(Clone, Debug)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iters: usize,
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-12,
            max_iters: 200,
            max_halvings: 60,
        }
    }
}

/// The x with −g(x) = s, up to ‖s + g(x)‖ₓ* ≤ tol, by damped Newton steps
/// towards 2x − H(x)⁻¹s.
pub fn gradient_certificate_of(
    op: &ConeOperator,
    s: &[f64],
    x_start: &[f64],
    opts: &NewtonOptions,
) -> Result<Vec<f64>> {
    check_len(op.dim(), s.len())?;
    check_len(op.dim(), x_start.len())?;
    let mut ctx = BarrierContext::new(op, x_start.to_vec())?;
    for _ in 0..opts.max_iters {
        let hinv_s = ctx.solve_hessian(s);
        let dir: Vec<f64> = ctx.x().iter().zip(&hinv_s).map(|(x, h)| x - h).collect();
        let lambda = ctx.local_norm(&dir);
        if !lambda.is_finite() {
            return Err(Error::NumericFailure("Newton decrement is not finite".into()));
        }
        if lambda <= opts.tol {
            return Ok(ctx.x().to_vec());
        }
        let mut step = if lambda > 0.25 { 1.0 / (1.0 + lambda) } else { 1.0 };
        let mut next = None;
        for _ in 0..=opts.max_halvings {
            let cand: Vec<f64> = ctx.x().iter().zip(&dir).map(|(x, d)| x + step * d).collect();
            if let Ok(c) = BarrierContext::new(op, cand) {
                next = Some(c);
                break;
            }
            step *= 0.5;
        }
        ctx = next.ok_or_else(|| Error::NumericFailure("step halving could not keep Λ(x) ≻ 0".into()))?;
    }
    Err(Error::MaxIterations(opts.max_iters))
}

/// ‖x − y‖ₓ < ½.
pub fn corollary_guard<F: Field>(ctx: &BarrierContext<'_, F>, y: &[F]) -> Result<bool> {
    check_len(ctx.cone().dim(), y.len())?;
    let diff: Vec<F> = ctx.x().iter().zip(y).map(|(a, b)| a.clone() - b.clone()).collect();
    let quarter = F::one() / F::from_i64(4);
    Ok(ctx.local_norm_sq(&diff) < quarter)
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
