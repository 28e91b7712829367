//! The log-det barrier f(x) = −ln det Λ(x) with its gradient and Hessian.

use std::any::Any;
use std::cell::OnceCell;

use crate::cone::{BlockSymMatrix, ConeOperator, Interpolation};
use crate::error::{Error, Result};
use crate::field::{dot, Field};
use crate::linalg::{ldlt_pd, Ldlt, Matrix};

/// How the Hessian is assembled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum HessianRoute {
    /// Interpolation when the cone supports it and the field is `f64`, integer
    /// assembly for exact fields, else columns.
    #[default]
    Auto,
    /// Column u is Λ*(Λ(x)⁻¹ Λ(e_u) Λ(x)⁻¹).
    Columns,
    /// H = V⁻¹ H_nodes V⁻ᵀ with H_nodes[k,l] = Σᵢ gᵢ(z_k)gᵢ(z_l)(p_kᵀΛᵢ(x)⁻¹p_l)².
    Interpolation,
}

/// Barrier data at an interior point, immutable once built.
#[derive(Clone, Debug)]
pub struct BarrierContext<'a, F: Field> {
    op: &'a ConeOperator,
    x: Vec<F>,
    lambda: BlockSymMatrix<F>,
    lambda_factors: Vec<Ldlt<F>>,
    lambda_inv: BlockSymMatrix<F>,
    gradient: Vec<F>,
    hessian: Matrix<F>,
    // exact factors are built on first use
    hessian_factor: OnceCell<Ldlt<F>>,
}

impl<'a, F: Field> BarrierContext<'a, F> {
    pub fn new(op: &'a ConeOperator, x: Vec<F>) -> Result<Self> {
        Self::with_route(op, x, HessianRoute::Auto)
    }

    pub fn with_route(op: &'a ConeOperator, x: Vec<F>, route: HessianRoute) -> Result<Self> {
        let lambda = op.apply(&x)?;
        let mut lambda_factors = Vec::with_capacity(lambda.blocks.len());
        let mut inv_blocks = Vec::with_capacity(lambda.blocks.len());
        for (block, m) in lambda.blocks.iter().enumerate() {
            let f = ldlt_pd(m).ok_or(Error::NotInterior { block })?;
            inv_blocks.push(symmetrize(f.inverse()));
            lambda_factors.push(f);
        }
        let lambda_inv = BlockSymMatrix { blocks: inv_blocks };
        let gradient: Vec<F> = op.adjoint_raw(&lambda_inv).into_iter().map(|v| -v).collect();
        let hessian = match (route, op.interpolation()) {
            (HessianRoute::Columns, _) => hessian_columns(op, &lambda_inv),
            (HessianRoute::Interpolation, None) => {
                return Err(Error::InvalidParameter("cone has no interpolation data".into()))
            }
            (_, Some(ip)) if !F::EXACT => {
                let inv = (&lambda_inv as &dyn Any)
                    .downcast_ref::<BlockSymMatrix<f64>>()
                    .ok_or_else(|| Error::InvalidParameter("interpolation route needs f64".into()))?;
                let h: Box<dyn Any> = Box::new(hessian_interpolation(ip, inv));
                *h.downcast::<Matrix<F>>().expect("field is f64")
            }
            (HessianRoute::Interpolation, Some(_)) => {
                return Err(Error::InvalidParameter("interpolation route needs f64".into()))
            }
            (HessianRoute::Auto, _) if F::EXACT => {
                let xq = (&x as &dyn Any)
                    .downcast_ref::<Vec<crate::field::Rational>>()
                    .ok_or_else(|| Error::InvalidParameter("exact field must be Rational".into()))?;
                let h = crate::fraction_free::hessian(op, xq).map_err(|block| Error::NotInterior { block })?;
                let h: Box<dyn Any> = Box::new(h);
                *h.downcast::<Matrix<F>>().expect("field is Rational")
            }
            (HessianRoute::Auto, _) => hessian_columns(op, &lambda_inv),
        };
        let hessian_factor = OnceCell::new();
        if !F::EXACT {
            let f = ldlt_pd(&hessian).ok_or(Error::SingularHessian)?;
            let _ = hessian_factor.set(f);
        }
        Ok(BarrierContext {
            op,
            x,
            lambda,
            lambda_factors,
            lambda_inv,
            gradient,
            hessian,
            hessian_factor,
        })
    }

    pub fn cone(&self) -> &'a ConeOperator {
        self.op
    }

    pub fn x(&self) -> &[F] {
        &self.x
    }

    pub fn lambda(&self) -> &BlockSymMatrix<F> {
        &self.lambda
    }

    pub fn lambda_factors(&self) -> &[Ldlt<F>] {
        &self.lambda_factors
    }

    pub fn lambda_inv(&self) -> &BlockSymMatrix<F> {
        &self.lambda_inv
    }

    /// f(x) = −Σᵢ ln det Λᵢ(x).
    pub fn value(&self) -> f64 {
        -self.lambda_factors.iter().map(Ldlt::log_det).sum::<f64>()
    }

    /// det Λ(x) as the product of all pivots.
    pub fn lambda_det(&self) -> F {
        let mut acc = F::one();
        for f in &self.lambda_factors {
            for d in f.d() {
                acc = acc.mul_ref(d);
            }
        }
        acc
    }

    /// g(x) = −Λ*(Λ(x)⁻¹).
    pub fn gradient(&self) -> &[F] {
        &self.gradient
    }

    pub fn hessian(&self) -> &Matrix<F> {
        &self.hessian
    }

    pub fn hessian_factor(&self) -> &Ldlt<F> {
        self.hessian_factor.get_or_init(|| {
            ldlt_pd(&self.hessian).expect("exact Hessian of an injective operator is positive definite")
        })
    }

    pub fn hessian_mul(&self, v: &[F]) -> Vec<F> {
        self.hessian.mul_vec(v)
    }

    /// H(x)⁻¹ s.
    pub fn solve_hessian(&self, s: &[F]) -> Vec<F> {
        self.hessian_factor().solve(s)
    }

    pub fn hessian_inverse(&self) -> Matrix<F> {
        symmetrize(self.hessian_factor().inverse())
    }

    /// vᵀH(x)v
    pub fn local_norm_sq(&self, v: &[F]) -> F {
        dot(v, &self.hessian_mul(v))
    }

    /// sᵀH(x)⁻¹s
    pub fn dual_local_norm_sq(&self, s: &[F]) -> F {
        dot(s, &self.solve_hessian(s))
    }

    pub fn local_norm(&self, v: &[F]) -> f64 {
        self.local_norm_sq(v).to_f64().max(0.0).sqrt()
    }

    pub fn dual_local_norm(&self, s: &[F]) -> f64 {
        self.dual_local_norm_sq(s).to_f64().max(0.0).sqrt()
    }
}

fn symmetrize<F: Field>(mut m: Matrix<F>) -> Matrix<F> {
    let n = m.rows();
    for i in 0..n {
        for j in i + 1..n {
            if m[(i, j)] != m[(j, i)] {
                let two = F::from_i64(2);
                let avg = (m[(i, j)].clone() + m[(j, i)].clone()) / two;
                m[(i, j)] = avg.clone();
                m[(j, i)] = avg;
            }
        }
    }
    m
}

fn hessian_columns<F: Field>(op: &ConeOperator, inv: &BlockSymMatrix<F>) -> Matrix<F> {
    let u_dim = op.dim();
    // entries of Λ(e_u), grouped by u
    let mut by_index: Vec<Vec<(usize, usize, usize, F)>> = vec![Vec::new(); u_dim];
    for (b, _) in op.block_dims().iter().enumerate() {
        for e in op.entries(b) {
            by_index[e.index].push((b, e.row, e.col, e.coef()));
        }
    }
    let mut h = Matrix::<F>::zeros(u_dim, u_dim);
    let mut q: Vec<Matrix<F>> = op.block_dims().iter().map(|&l| Matrix::zeros(l, l)).collect();
    let mut touched = vec![false; q.len()];
    for (u, list) in by_index.iter().enumerate() {
        for (b, m) in q.iter_mut().enumerate() {
            if touched[b] {
                *m = Matrix::zeros(m.rows(), m.cols());
                touched[b] = false;
            }
        }
        // Q = P A_u P accumulated as Σ a·(p_r p_cᵀ + p_c p_rᵀ)
        for (b, r, c, a) in list {
            let p = &inv.blocks[*b];
            let m = &mut q[*b];
            touched[*b] = true;
            outer_acc(m, p.row(*r), p.row(*c), a);
            if r != c {
                outer_acc(m, p.row(*c), p.row(*r), a);
            }
        }
        for (b, m) in q.iter().enumerate() {
            if !touched[b] {
                continue;
            }
            for e in op.entries(b) {
                let sv = if e.row == e.col {
                    m[(e.row, e.col)].clone()
                } else {
                    m[(e.row, e.col)].clone() + m[(e.col, e.row)].clone()
                };
                if sv.is_zero() {
                    continue;
                }
                let c: F = e.coef();
                h[(e.index, u)].add_mul(&c, &sv);
            }
        }
    }
    symmetrize(h)
}

fn outer_acc<F: Field>(m: &mut Matrix<F>, a: &[F], b: &[F], s: &F) {
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        let sa = ai.mul_ref(s);
        let row = m.row_mut(i);
        for (o, bj) in row.iter_mut().zip(b) {
            if !bj.is_zero() {
                o.add_mul(&sa, bj);
            }
        }
    }
}

fn hessian_interpolation(ip: &Interpolation, inv: &BlockSymMatrix<f64>) -> Matrix<f64> {
    let n = ip.nodes.len();
    let mut hw = Matrix::zeros(n, n);
    for (blk, p) in ip.blocks.iter().zip(&inv.blocks) {
        let pb = p.mul(&blk.basis);
        let g = blk.basis.transpose().mul(&pb);
        for k in 0..n {
            let wk = blk.weight[k];
            for l in 0..n {
                let v = g[(k, l)];
                hw[(k, l)] += wk * blk.weight[l] * v * v;
            }
        }
    }
    let h = ip.vinv.mul(&hw).mul(&ip.vinv.transpose());
    symmetrize(h)
}
