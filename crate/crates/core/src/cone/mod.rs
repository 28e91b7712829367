//! The Λ operator of a WSOS cone and its adjoint.
//!
//! Λ maps a coefficient vector x ∈ ℝ^U to a block-diagonal symmetric matrix
//! Λ₁(x) ⊕ … ⊕ Λ_m(x). Block i is built from the structure coefficients of
//! gᵢ·pⱼ·pₖ, so Λ*(S) is the coefficient vector of Σᵢ gᵢ·𝐩ᵢᵀSᵢ𝐩ᵢ.

mod basis;
mod file;

use std::collections::BTreeMap;


pub use basis::Basis;
pub use file::{ConeFile, FileEntry};

use crate::error::{Error, Result};
use crate::field::{rat_int, Field, Rational};
use crate::linalg::{ldlt_psd, Matrix, Psd};

/// Coefficient vector of a polynomial in the cone's basis.
pub type PolyVec<F> = Vec<F>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BasisTag {
    Monomial,
    Chebyshev,
    Custom,
}

impl From<Basis> for BasisTag {
    fn from(b: Basis) -> Self {
        match b {
            Basis::Monomial => BasisTag::Monomial,
            Basis::Chebyshev => BasisTag::Chebyshev,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConeKind {
    /// Weights (1, 1 − z²), block sides (d+1, d).
    IntervalEven { d: usize },
    /// Weights (1 − z, 1 + z), block sides (d+1, d+1).
    IntervalOdd { d: usize },
    Custom,
}

/// One nonzero T⁽ⁱ⁾[row][col][index] with row ≤ col.
#[derive(Clone, Debug)]
pub struct Entry {
    pub row: usize,
    pub col: usize,
    pub index: usize,
    pub value: Rational,
    approx: f64,
}

impl Entry {
    fn new(row: usize, col: usize, index: usize, value: Rational) -> Self {
        let approx = value.to_f64();
        let (row, col) = if row <= col { (row, col) } else { (col, row) };
        Entry {
            row,
            col,
            index,
            value,
            approx,
        }
    }

    #[inline]
    pub(crate) fn coef<F: Field>(&self) -> F {
        F::from_coef(&self.value, self.approx)
    }
}

/// Block-diagonal symmetric matrix S₁ ⊕ … ⊕ S_m.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockSymMatrix<F> {
    pub blocks: Vec<Matrix<F>>,
}

impl<F: Field> BlockSymMatrix<F> {
    pub fn zeros(dims: &[usize]) -> Self {
        BlockSymMatrix {
            blocks: dims.iter().map(|&l| Matrix::zeros(l, l)).collect(),
        }
    }

    pub fn identity(dims: &[usize]) -> Self {
        BlockSymMatrix {
            blocks: dims.iter().map(|&l| Matrix::identity(l)).collect(),
        }
    }

    pub fn dims(&self) -> Vec<usize> {
        self.blocks.iter().map(Matrix::rows).collect()
    }

    /// Trace inner product Σᵢ tr(AᵢBᵢ).
    pub fn inner(&self, other: &Self) -> F {
        let mut acc = F::zero();
        for (a, b) in self.blocks.iter().zip(&other.blocks) {
            acc.add_assign_ref(&a.frobenius_dot(b));
        }
        acc
    }

    pub fn scale(&self, s: &F) -> Self {
        BlockSymMatrix {
            blocks: self.blocks.iter().map(|b| b.scale(s)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        BlockSymMatrix {
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn to_f64(&self) -> BlockSymMatrix<f64> {
        BlockSymMatrix {
            blocks: self.blocks.iter().map(Matrix::to_f64).collect(),
        }
    }

    pub fn is_psd(&self) -> Result<bool> {
        for b in &self.blocks {
            if !ldlt_psd(b)?.is_psd() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Values of the basis and weights at the U Chebyshev nodes, used by the fast
/// Hessian route. Only built-in Chebyshev cones carry one.
#[derive(Clone, Debug)]
pub struct Interpolation {
    pub nodes: Vec<f64>,
    /// Maps node values of a polynomial of degree < U to its coefficients.
    pub vinv: Matrix<f64>,
    pub blocks: Vec<InterpBlock>,
}

#[derive(Clone, Debug)]
pub struct InterpBlock {
    /// gᵢ(z_k)
    pub weight: Vec<f64>,
    /// pⱼ(z_k), L × U
    pub basis: Matrix<f64>,
}

#[derive(Clone, Debug)]
pub struct ConeOperator {
    dim: usize,
    block_dims: Vec<usize>,
    nu: usize,
    blocks: Vec<Vec<Entry>>,
    one: Vec<Rational>,
    basis_tag: BasisTag,
    kind: ConeKind,
    interp: Option<Interpolation>,
    interior_hint: Option<Vec<Rational>>,
}

impl ConeOperator {
    /// Builds a cone from its weights: block i has side `weights[i].1` and
    /// T⁽ⁱ⁾[j][k] = coefficients of gᵢ·pⱼ·pₖ.
    pub fn from_weights(basis: Basis, weights: &[(Vec<Rational>, usize)], dim: usize) -> Result<Self> {
        let mut blocks = Vec::with_capacity(weights.len());
        for (g, l) in weights {
            let g_sparse: Vec<(usize, Rational)> = g
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(u, c)| (u, c.clone()))
                .collect();
            let mut entries = Vec::new();
            for j in 0..*l {
                for k in j..*l {
                    let prod = basis.mul_sparse(&g_sparse, &basis.unit_product(j, k));
                    for (u, v) in prod {
                        if u >= dim {
                            return Err(Error::DimensionMismatch {
                                expected: dim,
                                got: u + 1,
                            });
                        }
                        entries.push(Entry::new(j, k, u, v));
                    }
                }
            }
            blocks.push(entries);
        }
        let block_dims: Vec<usize> = weights.iter().map(|w| w.1).collect();
        let mut one = vec![Rational::zero(); dim];
        if dim > 0 {
            one[0] = rat_int(1);
        }
        Ok(ConeOperator {
            dim,
            nu: block_dims.iter().sum(),
            block_dims,
            blocks,
            one,
            basis_tag: basis.into(),
            kind: ConeKind::Custom,
            interp: None,
            interior_hint: None,
        })
    }

    /// Builds a cone from explicit tensor entries. Entries with row > col are
    /// folded onto the upper triangle; repeated positions must agree with their mirror.
    pub fn from_entries(
        dim: usize,
        block_dims: Vec<usize>,
        entries: impl IntoIterator<Item = (usize, usize, usize, usize, Rational)>,
    ) -> Result<Self> {
        let mut maps: Vec<BTreeMap<(usize, usize, usize), Rational>> = vec![BTreeMap::new(); block_dims.len()];
        for (b, r, c, u, v) in entries {
            if b >= block_dims.len() {
                return Err(Error::InvalidParameter(format!("block index {b} out of range")));
            }
            if r >= block_dims[b] || c >= block_dims[b] {
                return Err(Error::InvalidParameter(format!(
                    "entry ({r}, {c}) outside block {b} of side {}",
                    block_dims[b]
                )));
            }
            if u >= dim {
                return Err(Error::DimensionMismatch { expected: dim, got: u + 1 });
            }
            *maps[b].entry((r, c, u)).or_insert_with(Rational::zero) += v;
        }
        let mut blocks = Vec::with_capacity(maps.len());
        for map in &maps {
            let mut entries = Vec::new();
            for (&(r, c, u), v) in map {
                if r > c {
                    if !map.contains_key(&(c, r, u)) && !v.is_zero() {
                        entries.push(Entry::new(r, c, u, v.clone()));
                    }
                    continue;
                }
                if r < c {
                    if let Some(m) = map.get(&(c, r, u)) {
                        if m != v {
                            return Err(Error::NotSymmetric { row: r, col: c });
                        }
                    }
                }
                if !v.is_zero() {
                    entries.push(Entry::new(r, c, u, v.clone()));
                }
            }
            blocks.push(entries);
        }
        let mut one = vec![Rational::zero(); dim];
        if dim > 0 {
            one[0] = rat_int(1);
        }
        Ok(ConeOperator {
            dim,
            nu: block_dims.iter().sum(),
            block_dims,
            blocks,
            one,
            basis_tag: BasisTag::Custom,
            kind: ConeKind::Custom,
            interp: None,
            interior_hint: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn basis_tag(&self) -> BasisTag {
        self.basis_tag
    }

    pub fn kind(&self) -> ConeKind {
        self.kind
    }

    pub fn entries(&self, block: usize) -> &[Entry] {
        &self.blocks[block]
    }

    pub fn interpolation(&self) -> Option<&Interpolation> {
        self.interp.as_ref()
    }

    /// Coefficient vector of the constant polynomial 1.
    pub fn one(&self) -> &[Rational] {
        &self.one
    }

    pub fn set_one(&mut self, one: Vec<Rational>) -> Result<()> {
        check_len(self.dim, one.len())?;
        self.one = one;
        Ok(())
    }

    pub fn set_interior_hint(&mut self, x: Vec<Rational>) -> Result<()> {
        check_len(self.dim, x.len())?;
        self.interior_hint = Some(x);
        Ok(())
    }

    /// The dense coefficient vector T⁽ⁱ⁾[j][k].
    pub fn coefficient(&self, block: usize, j: usize, k: usize) -> Vec<Rational> {
        let (r, c) = if j <= k { (j, k) } else { (k, j) };
        let mut v = vec![Rational::zero(); self.dim];
        for e in &self.blocks[block] {
            if e.row == r && e.col == c {
                v[e.index] += &e.value;
            }
        }
        v
    }

    /// Λ(x).
    pub fn apply<F: Field>(&self, x: &[F]) -> Result<BlockSymMatrix<F>> {
        check_len(self.dim, x.len())?;
        Ok(self.apply_raw(x))
    }

    pub(crate) fn apply_raw<F: Field>(&self, x: &[F]) -> BlockSymMatrix<F> {
        let mut out = BlockSymMatrix::<F>::zeros(&self.block_dims);
        for (m, entries) in out.blocks.iter_mut().zip(&self.blocks) {
            for e in entries {
                let xu = &x[e.index];
                if xu.is_zero() {
                    continue;
                }
                let c: F = e.coef();
                m[(e.row, e.col)].add_mul(&c, xu);
            }
            let n = m.rows();
            for i in 0..n {
                for j in i + 1..n {
                    m[(j, i)] = m[(i, j)].clone();
                }
            }
        }
        out
    }

    /// Λ*(S).
    pub fn adjoint<F: Field>(&self, s: &BlockSymMatrix<F>) -> Result<Vec<F>> {
        let dims = s.dims();
        if dims != self.block_dims {
            return Err(Error::DimensionMismatch {
                expected: self.block_dims.len(),
                got: dims.len(),
            });
        }
        for b in &s.blocks {
            if !b.is_square() {
                return Err(Error::DimensionMismatch {
                    expected: b.rows(),
                    got: b.cols(),
                });
            }
        }
        Ok(self.adjoint_raw(s))
    }

    pub(crate) fn adjoint_raw<F: Field>(&self, s: &BlockSymMatrix<F>) -> Vec<F> {
        let mut out = vec![F::zero(); self.dim];
        for (m, entries) in s.blocks.iter().zip(&self.blocks) {
            for e in entries {
                let sv = if e.row == e.col {
                    m[(e.row, e.col)].clone()
                } else {
                    m[(e.row, e.col)].clone() + m[(e.col, e.row)].clone()
                };
                if sv.is_zero() {
                    continue;
                }
                let c: F = e.coef();
                out[e.index].add_mul(&c, &sv);
            }
        }
        out
    }

    /// Gram matrix of the operator under the trace inner product: M_uv = ⟨Λ(e_u), Λ(e_v)⟩.
    pub fn trace_gram<F: Field>(&self) -> Matrix<F> {
        let mut m = Matrix::<F>::zeros(self.dim, self.dim);
        for entries in &self.blocks {
            let mut by_pos: BTreeMap<(usize, usize), Vec<&Entry>> = BTreeMap::new();
            for e in entries {
                by_pos.entry((e.row, e.col)).or_default().push(e);
            }
            for ((r, c), list) in by_pos {
                let mult = F::from_i64(if r == c { 1 } else { 2 });
                for a in &list {
                    let ca: F = a.coef::<F>().mul_ref(&mult);
                    for b in &list {
                        let cb: F = b.coef();
                        m[(a.index, b.index)].add_mul(&ca, &cb);
                    }
                }
            }
        }
        m
    }

    /// Exact full-column-rank check of the flattened tensor.
    pub fn check_injective(&self) -> Result<()> {
        let gram: Matrix<Rational> = self.trace_gram();
        match ldlt_psd(&gram)? {
            Psd::Yes(f) => {
                let rank = f.d().iter().filter(|d| !d.is_zero()).count();
                if rank == self.dim {
                    Ok(())
                } else {
                    Err(Error::NotInjective { rank, dim: self.dim })
                }
            }
            Psd::No { .. } => Err(Error::NumericFailure("trace Gram matrix is not PSD".into())),
        }
    }

    /// A point in the interior of the dual cone, used to start Newton iterations.
    /// Built-in cones return the moments of the Chebyshev (arcsine) measure.
    pub fn interior_point(&self) -> Vec<Rational> {
        if let Some(x) = &self.interior_hint {
            return x.clone();
        }
        match self.basis_tag {
            BasisTag::Monomial => (0..self.dim)
                .map(|k| {
                    if k % 2 == 1 {
                        Rational::zero()
                    } else {
                        let half = k / 2;
                        let num = binomial(k, half);
                        Rational::new(num, num_bigint::BigInt::from(1u8) << k)
                    }
                })
                .collect(),
            BasisTag::Chebyshev => self.one.clone(),
            BasisTag::Custom => {
                if self.is_interior_f64(&self.one) {
                    return self.one.clone();
                }
                self.nearest_to_identity()
                    .filter(|x| self.is_interior_f64(x))
                    .unwrap_or_else(|| self.one.clone())
            }
        }
    }

    fn is_interior_f64(&self, x: &[Rational]) -> bool {
        let xf: Vec<f64> = x.iter().map(Field::to_f64).collect();
        self.apply(&xf)
            .map(|m| m.blocks.iter().all(|b| crate::linalg::ldlt_pd(b).is_some()))
            .unwrap_or(false)
    }

    /// Least-squares solution of Λ(x) = I.
    fn nearest_to_identity(&self) -> Option<Vec<Rational>> {
        let gram: Matrix<f64> = self.trace_gram();
        let rhs = self.adjoint(&BlockSymMatrix::<f64>::identity(&self.block_dims)).ok()?;
        let x = crate::linalg::ldlt_pd(&gram)?.solve(&rhs);
        x.into_iter().map(|v| crate::field::lift_f64(v).ok()).collect()
    }

    /// The closed-form gradient certificate of 𝟏, when one is known: (2d+1)·e₀
    /// for the even Chebyshev cone.
    pub fn known_unit_certificate(&self) -> Option<Vec<Rational>> {
        match (self.kind, self.basis_tag) {
            (ConeKind::IntervalEven { d }, BasisTag::Chebyshev) => {
                let mut x = vec![Rational::zero(); self.dim];
                x[0] = rat_int(2 * d as i64 + 1);
                Some(x)
            }
            _ => None,
        }
    }

    /// A point of the semialgebraic set at which to evaluate polynomials, when known.
    pub fn domain_point(&self) -> Option<Vec<Rational>> {
        let basis = match self.basis_tag {
            BasisTag::Monomial => Basis::Monomial,
            BasisTag::Chebyshev => Basis::Chebyshev,
            BasisTag::Custom => return None,
        };
        Some(basis.eval_all(&Rational::zero(), self.dim))
    }

    pub fn with_scaled_entries(&self, alpha: &Rational) -> ConeOperator {
        let mut out = self.clone();
        for entries in &mut out.blocks {
            for e in entries.iter_mut() {
                *e = Entry::new(e.row, e.col, e.index, &e.value * alpha);
            }
        }
        out.interp = None;
        out
    }

    fn attach_interpolation(&mut self, basis: Basis, weights: &[Vec<Rational>]) {
        let u = self.dim;
        let nodes: Vec<f64> = (0..u)
            .map(|k| (std::f64::consts::PI * (k as f64 + 0.5) / u as f64).cos())
            .collect();
        // V[k][j] = T_j(z_k); VᵀV = diag(U, U/2, …) by discrete orthogonality
        let mut vinv = Matrix::zeros(u, u);
        for (k, z) in nodes.iter().enumerate() {
            let vals = basis.eval_all(z, u);
            for (j, v) in vals.into_iter().enumerate() {
                let w = if j == 0 { 1.0 } else { 2.0 } / u as f64;
                vinv[(j, k)] = w * v;
            }
        }
        let mut blocks = Vec::with_capacity(weights.len());
        for (g, &l) in weights.iter().zip(&self.block_dims) {
            let gf: Vec<f64> = g.iter().map(Field::to_f64).collect();
            let weight = nodes.iter().map(|z| basis.eval(&gf, z)).collect();
            let mut bm = Matrix::zeros(l, u);
            for (k, z) in nodes.iter().enumerate() {
                for (j, v) in basis.eval_all(z, l).into_iter().enumerate() {
                    bm[(j, k)] = v;
                }
            }
            blocks.push(InterpBlock { weight, basis: bm });
        }
        self.interp = Some(Interpolation { nodes, vinv, blocks });
    }
}

fn binomial(n: usize, k: usize) -> num_bigint::BigInt {
    let mut acc = num_bigint::BigInt::from(1u8);
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// The cone of polynomials of degree 2d that are nonnegative on [−1, 1]:
/// weights (1, 1 − z²) with degrees (d, d − 1).
pub fn build_interval_cone(d: usize, basis: Basis) -> Result<ConeOperator> {
    if d < 1 {
        return Err(Error::InvalidDegree(d));
    }
    let weights = vec![
        (vec![rat_int(1)], d + 1),
        (basis.one_minus_z_squared(), d),
    ];
    let mut op = ConeOperator::from_weights(basis, &weights, 2 * d + 1)?;
    op.kind = ConeKind::IntervalEven { d };
    if basis == Basis::Chebyshev {
        let w: Vec<Vec<Rational>> = weights.into_iter().map(|w| w.0).collect();
        op.attach_interpolation(basis, &w);
    }
    Ok(op)
}

/// The cone of polynomials of degree 2d + 1 that are nonnegative on [−1, 1]:
/// weights (1 − z, 1 + z), both with degree d.
pub fn build_interval_cone_odd(d: usize, basis: Basis) -> Result<ConeOperator> {
    let weights = vec![
        (basis.one_plus_signed_z(-1), d + 1),
        (basis.one_plus_signed_z(1), d + 1),
    ];
    let mut op = ConeOperator::from_weights(basis, &weights, 2 * d + 2)?;
    op.kind = ConeKind::IntervalOdd { d };
    if basis == Basis::Chebyshev {
        let w: Vec<Vec<Rational>> = weights.into_iter().map(|w| w.0).collect();
        op.attach_interpolation(basis, &w);
    }
    Ok(op)
}

pub fn lambda_apply<F: Field>(op: &ConeOperator, x: &[F]) -> Result<BlockSymMatrix<F>> {
    op.apply(x)
}

pub fn lambda_adjoint<F: Field>(op: &ConeOperator, s: &BlockSymMatrix<F>) -> Result<Vec<F>> {
    op.adjoint(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::rat;
    use crate::linalg::Matrix;

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&a| rat_int(a)).collect()
    }

    #[test]
    fn monomial_d2_matches_hankel_layout() {
        let op = build_interval_cone(2, Basis::Monomial).unwrap();
        assert_eq!((op.dim(), op.block_dims(), op.nu()), (5, &[3usize, 2][..], 5));
        let x = ints(&[10, 11, 12, 13, 14]);
        let l = op.apply(&x).unwrap();
        assert_eq!(
            l.blocks[0],
            Matrix::from_i64_rows(&[&[10, 11, 12], &[11, 12, 13], &[12, 13, 14]])
        );
        assert_eq!(l.blocks[1], Matrix::from_i64_rows(&[&[-2, -2], &[-2, -2]]));
    }

    #[test]
    fn example_point_second_block() {
        let op = build_interval_cone(2, Basis::Monomial).unwrap();
        let x = vec![rat_int(5), rat_int(0), rat(5, 2), rat_int(0), rat(15, 8)];
        let l = op.apply(&x).unwrap();
        assert_eq!(l.blocks[1][(0, 0)], rat(5, 2));
        assert_eq!(l.blocks[1][(1, 1)], rat(5, 8));
        assert!(l.blocks[1][(0, 1)].is_zero());
    }

    #[test]
    fn d1_monomial() {
        let op = build_interval_cone(1, Basis::Monomial).unwrap();
        let l = op.apply(&ints(&[3, 5, 7])).unwrap();
        assert_eq!(l.blocks[0], Matrix::from_i64_rows(&[&[3, 5], &[5, 7]]));
        assert_eq!(l.blocks[1], Matrix::from_i64_rows(&[&[-4]]));
        assert!(matches!(build_interval_cone(0, Basis::Monomial), Err(Error::InvalidDegree(0))));
    }

    #[test]
    fn monomial_adjoint_formula() {
        let op = build_interval_cone(2, Basis::Monomial).unwrap();
        let s1 = Matrix::from_i64_rows(&[&[1, 2, 3], &[2, 4, 5], &[3, 5, 6]]);
        let s2 = Matrix::from_i64_rows(&[&[7, 8], &[8, 9]]);
        let s = BlockSymMatrix { blocks: vec![s1, s2] };
        let got = op.adjoint(&s).unwrap();
        assert_eq!(got, ints(&[1 + 7, 4 + 16, 6 + 4 - 7 + 9, 10 - 16, 6 - 9]));
    }

    #[test]
    fn chebyshev_zeroth_row() {
        let op = build_interval_cone(2, Basis::Chebyshev).unwrap();
        let w = ints(&[3, 5, 7, 11, 13]);
        let l = op.apply(&w).unwrap();
        for j in 0..3 {
            assert_eq!(l.blocks[0][(0, j)], w[j]);
        }
        // ½w_{i+j} + ½w_{|i−j|}
        assert_eq!(l.blocks[0][(1, 2)], (rat_int(11) + rat_int(5)) / rat_int(2));
        assert_eq!(l.blocks[0][(1, 1)], (rat_int(7) + rat_int(3)) / rat_int(2));
    }

    #[test]
    fn chebyshev_second_block_matches_eighth_formula() {
        let d = 4;
        let op = build_interval_cone(d, Basis::Chebyshev).unwrap();
        let w: Vec<Rational> = (0..2 * d + 1).map(|k| rat((k * k) as i64 + 3, k as i64 + 2)).collect();
        let l = op.apply(&w).unwrap();
        let y = |k: usize| w.get(k).cloned().unwrap_or_else(Rational::zero);
        for i in 0..d {
            for j in 0..d {
                let a = i + j;
                let b = i.abs_diff(j);
                let expect = (rat_int(2) * y(a) + rat_int(2) * y(b)
                    - y(a + 2)
                    - y((a as i64 - 2).unsigned_abs() as usize)
                    - y(b + 2)
                    - y((b as i64 - 2).unsigned_abs() as usize))
                    / rat_int(8);
                assert_eq!(l.blocks[1][(i, j)], expect, "({i},{j})");
            }
        }
    }

    #[test]
    fn odd_cone_small_cases() {
        let op = build_interval_cone_odd(0, Basis::Monomial).unwrap();
        let l = op.apply(&ints(&[5, 2])).unwrap();
        assert_eq!(l.blocks[0][(0, 0)], rat_int(3));
        assert_eq!(l.blocks[1][(0, 0)], rat_int(7));
        let op = build_interval_cone_odd(1, Basis::Monomial).unwrap();
        assert_eq!((op.dim(), op.nu()), (4, 4));
        let l = op.apply(&ints(&[1, 2, 4, 8])).unwrap();
        assert_eq!(l.blocks[0][(0, 0)], rat_int(1 - 2));
        assert_eq!(l.blocks[0][(0, 1)], rat_int(2 - 4));
    }

    #[test]
    fn injectivity_of_builtins() {
        for d in 1..=10 {
            for basis in [Basis::Monomial, Basis::Chebyshev] {
                build_interval_cone(d, basis).unwrap().check_injective().unwrap();
                build_interval_cone_odd(d, basis).unwrap().check_injective().unwrap();
            }
        }
    }

    #[test]
    fn rank_deficient_custom_cone_detected() {
        // Λ(x) = [x0 + x1]
        let op = ConeOperator::from_entries(
            2,
            vec![1],
            vec![(0, 0, 0, 0, rat_int(1)), (0, 0, 0, 1, rat_int(1))],
        )
        .unwrap();
        assert!(matches!(op.check_injective(), Err(Error::NotInjective { rank: 1, dim: 2 })));
    }

    #[test]
    fn interpolation_reproduces_adjoint() {
        let d = 3;
        let op = build_interval_cone(d, Basis::Chebyshev).unwrap();
        let ip = op.interpolation().unwrap();
        // Λ*(S) = V⁻¹ [Σᵢ gᵢ(z_k) p_kᵀ Sᵢ p_k]
        let s = BlockSymMatrix {
            blocks: vec![
                Matrix::from_rows(vec![vec![2.0, 0.5, -1.0, 0.0], vec![0.5, 1.0, 0.3, 0.2], vec![-1.0, 0.3, 3.0, 0.1], vec![0.0, 0.2, 0.1, 1.5]]),
                Matrix::from_rows(vec![vec![1.0, -0.2, 0.0], vec![-0.2, 2.0, 0.4], vec![0.0, 0.4, 0.7]]),
            ],
        };
        let direct = op.adjoint(&s).unwrap();
        let mut vals = vec![0.0; op.dim()];
        for (b, blk) in ip.blocks.iter().enumerate() {
            for (k, val) in vals.iter_mut().enumerate() {
                let p: Vec<f64> = (0..blk.basis.rows()).map(|j| blk.basis[(j, k)]).collect();
                *val += blk.weight[k] * s.blocks[b].quad_form(&p);
            }
        }
        let via = ip.vinv.mul_vec(&vals);
        for (a, b) in direct.iter().zip(&via) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn monomial_interior_point_is_interior() {
        let op = build_interval_cone(3, Basis::Monomial).unwrap();
        let x = op.interior_point();
        assert_eq!(x[2], rat(1, 2));
        assert_eq!(x[4], rat(3, 8));
        let l = op.apply(&x).unwrap();
        for b in &l.blocks {
            assert!(crate::linalg::ldlt_pd(b).is_some());
        }
    }
}
