//! Dense matrices and symmetric LDLᵀ factorization over any [`Field`].

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::field::{Field, Rational};

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Field> Matrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![F::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = F::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<F>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_diag(diag: &[F]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, v) in diag.iter().enumerate() {
            m[(i, i)] = v.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [F] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<F>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// First asymmetric position, if any.
    pub fn asymmetry(&self) -> Option<(usize, usize)> {
        for i in 0..self.rows {
            for j in 0..i {
                if self[(i, j)] != self[(j, i)] {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[F]) -> Vec<F> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| crate::field::dot(self.row(i), v))
            .collect()
    }

    /// Matrix product; zero entries of `self` are skipped, which pays off for the
    /// sparse structured blocks and for exact arithmetic.
    pub fn mul(&self, other: &Matrix<F>) -> Matrix<F> {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::<F>::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                let brow = other.row(k);
                let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, b) in orow.iter_mut().zip(brow) {
                    if !b.is_zero() {
                        o.add_mul(a, b);
                    }
                }
            }
        }
        out
    }

    pub fn scale(&self, s: &F) -> Matrix<F> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v.mul_ref(s)).collect(),
        }
    }

    pub fn add(&self, other: &Matrix<F>) -> Matrix<F> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (o, b) in out.data.iter_mut().zip(&other.data) {
            o.add_assign_ref(b);
        }
        out
    }

    pub fn sub(&self, other: &Matrix<F>) -> Matrix<F> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (o, b) in out.data.iter_mut().zip(&other.data) {
            o.sub_assign_ref(b);
        }
        out
    }

    /// ⟨A, B⟩ = tr(AᵀB).
    pub fn frobenius_dot(&self, other: &Matrix<F>) -> F {
        crate::field::dot(&self.data, &other.data)
    }

    /// vᵀ A v
    pub fn quad_form(&self, v: &[F]) -> F {
        crate::field::dot(v, &self.mul_vec(v))
    }

    pub fn max_abs_diag(&self) -> F {
        let mut best = F::zero();
        for i in 0..self.rows.min(self.cols) {
            let a = self[(i, i)].abs();
            if a > best {
                best = a;
            }
        }
        best
    }

    pub fn map<G: Field>(&self, f: impl Fn(&F) -> G) -> Matrix<G> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        self.map(F::to_f64)
    }

    pub fn as_slice(&self) -> &[F] {
        &self.data
    }
}

impl Matrix<Rational> {
    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| crate::field::rat_int(v)).collect())
                .collect(),
        )
    }
}

impl<F> Index<(usize, usize)> for Matrix<F> {
    type Output = F;
    fn index(&self, (i, j): (usize, usize)) -> &F {
        &self.data[i * self.cols + j]
    }
}

impl<F> IndexMut<(usize, usize)> for Matrix<F> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut F {
        &mut self.data[i * self.cols + j]
    }
}

/// M = L·D·Lᵀ with L unit lower triangular.
#[derive(Clone, Debug)]
pub struct Ldlt<F> {
    l: Matrix<F>,
    d: Vec<F>,
}

/// Outcome of a semidefiniteness test.
#[derive(Clone, Debug)]
pub enum Psd<F> {
    Yes(Ldlt<F>),
    /// vᵀ M v < 0
    No { witness: Vec<F> },
}

impl<F: Field> Psd<F> {
    pub fn is_psd(&self) -> bool {
        matches!(self, Psd::Yes(_))
    }
}

enum Stop {
    Negative(usize),
    ZeroWithCoupling(usize, usize),
}

/// Right-looking elimination on the lower triangle. Returns the (possibly partial)
/// factor, the working Schur complement and the reason elimination stopped, if any.
fn eliminate<F: Field>(m: &Matrix<F>, strict: bool) -> (Matrix<F>, Vec<F>, Matrix<F>, Option<Stop>) {
    let n = m.rows();
    let tol = F::pivot_tolerance(&m.max_abs_diag());
    let mut a = m.clone();
    let mut l = Matrix::identity(n);
    let mut d = Vec::with_capacity(n);
    for j in 0..n {
        let p = a[(j, j)].clone();
        if p <= tol {
            let neg_tol = -tol.clone();
            if strict || p < neg_tol {
                return (l, d, a, Some(Stop::Negative(j)));
            }
            // zero pivot: remaining column must vanish
            for i in j + 1..n {
                if a[(i, j)].abs() > tol {
                    return (l, d, a, Some(Stop::ZeroWithCoupling(j, i)));
                }
            }
            d.push(F::zero());
            continue;
        }
        for i in j + 1..n {
            let aij = a[(i, j)].clone();
            if aij.is_zero() {
                continue;
            }
            let lij = aij / p.clone();
            for k in j + 1..=i {
                let ajk = a[(k, j)].clone();
                if ajk.is_zero() {
                    continue;
                }
                let upd = lij.mul_ref(&ajk);
                a[(i, k)].sub_assign_ref(&upd);
            }
            l[(i, j)] = lij;
        }
        d.push(p);
    }
    (l, d, a, None)
}

/// Solves L̃ᵀ v = rhs where L̃ is unit lower triangular.
fn unit_upper_solve<F: Field>(l: &Matrix<F>, rhs: Vec<F>) -> Vec<F> {
    let n = l.rows();
    let mut v = rhs;
    for i in (0..n).rev() {
        let mut acc = v[i].clone();
        for k in i + 1..n {
            let lki = &l[(k, i)];
            if !lki.is_zero() {
                acc.sub_assign_ref(&lki.mul_ref(&v[k]));
            }
        }
        v[i] = acc;
    }
    v
}

fn witness_for<F: Field>(l: &Matrix<F>, schur: &Matrix<F>, stop: Stop) -> Vec<F> {
    let n = l.rows();
    let mut w = vec![F::zero(); n];
    match stop {
        Stop::Negative(j) => w[j] = F::one(),
        Stop::ZeroWithCoupling(j, i) => {
            // w = a·e_j + e_i on the Schur complement: wᵀSw = 2·a·s + S_ii with S_jj = 0
            let s = schur[(i, j)].clone();
            let sii = schur[(i, i)].abs();
            let two = F::from_i64(2);
            w[j] = -(sii + F::one()) / (two * s);
            w[i] = F::one();
        }
    }
    unit_upper_solve(l, w)
}

/// LDLᵀ of a symmetric positive semidefinite matrix, or a witness of indefiniteness.
/// Zero pivots are accepted when the rest of their column is zero.
pub fn ldlt_psd<F: Field>(m: &Matrix<F>) -> Result<Psd<F>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            got: m.cols(),
        });
    }
    if let Some((row, col)) = m.asymmetry() {
        if F::EXACT || (m[(row, col)].to_f64() - m[(col, row)].to_f64()).abs() > 1e-9 * (1.0 + m.max_abs_diag().to_f64()) {
            return Err(Error::NotSymmetric { row, col });
        }
    }
    let (l, d, schur, stop) = eliminate(m, false);
    Ok(match stop {
        None => Psd::Yes(Ldlt { l, d }),
        Some(stop) => Psd::No {
            witness: witness_for(&l, &schur, stop),
        },
    })
}

/// LDLᵀ of a positive definite matrix; `None` if some pivot is not strictly positive
/// (beyond [`Field::pivot_tolerance`]).
pub fn ldlt_pd<F: Field>(m: &Matrix<F>) -> Option<Ldlt<F>> {
    let (l, d, _, stop) = eliminate(m, true);
    match stop {
        None => Some(Ldlt { l, d }),
        Some(_) => None,
    }
}

impl<F: Field> Ldlt<F> {
    pub fn l(&self) -> &Matrix<F> {
        &self.l
    }

    pub fn d(&self) -> &[F] {
        &self.d
    }

    pub fn dim(&self) -> usize {
        self.d.len()
    }

    /// Solves M x = b. Only meaningful when all pivots are nonzero.
    pub fn solve(&self, b: &[F]) -> Vec<F> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut y = b.to_vec();
        for i in 0..n {
            let mut acc = y[i].clone();
            for k in 0..i {
                let lik = &self.l[(i, k)];
                if !lik.is_zero() {
                    acc.sub_assign_ref(&lik.mul_ref(&y[k]));
                }
            }
            y[i] = acc;
        }
        for (yi, di) in y.iter_mut().zip(&self.d) {
            *yi = yi.clone() / di.clone();
        }
        unit_upper_solve(&self.l, y)
    }

    pub fn inverse(&self) -> Matrix<F> {
        let n = self.dim();
        let mut inv = Matrix::zeros(n, n);
        for j in 0..n {
            let mut e = vec![F::zero(); n];
            e[j] = F::one();
            let col = self.solve(&e);
            for (i, v) in col.into_iter().enumerate() {
                inv[(i, j)] = v;
            }
        }
        inv
    }

    /// Σ ln dᵢ, i.e. ln det M.
    pub fn log_det(&self) -> f64 {
        self.d.iter().map(Field::ln).sum()
    }

    pub fn reconstruct(&self) -> Matrix<F> {
        let n = self.dim();
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut acc = F::zero();
                for k in 0..=j {
                    if self.d[k].is_zero() {
                        continue;
                    }
                    acc.add_assign_ref(&self.l[(i, k)].mul_ref(&self.l[(j, k)]).mul_ref(&self.d[k]));
                }
                m[(i, j)] = acc.clone();
                m[(j, i)] = acc;
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{rat, rat_int};

    #[test]
    fn identity_factors_trivially() {
        let m: Matrix<Rational> = Matrix::identity(3);
        let Psd::Yes(f) = ldlt_psd(&m).unwrap() else {
            panic!("identity must be psd")
        };
        assert_eq!(f.l(), &Matrix::identity(3));
        assert!(f.d().iter().all(|d| *d == rat_int(1)));
    }

    #[test]
    fn indefinite_diag_gives_second_unit_witness() {
        let m = Matrix::from_i64_rows(&[&[1, 0], &[0, -1]]);
        match ldlt_psd(&m).unwrap() {
            Psd::No { witness } => {
                assert_eq!(witness, vec![rat_int(0), rat_int(1)]);
                assert!(m.quad_form(&witness) < rat_int(0));
            }
            Psd::Yes(_) => panic!("diag(1,-1) is indefinite"),
        }
    }

    #[test]
    fn zero_pivot_with_coupling_is_rejected() {
        let m = Matrix::from_i64_rows(&[&[1, 1, 0], &[1, 1, 1], &[0, 1, 5]]);
        match ldlt_psd(&m).unwrap() {
            Psd::No { witness } => assert!(m.quad_form(&witness) < rat_int(0)),
            Psd::Yes(_) => panic!("matrix has a negative eigenvalue"),
        }
    }

    #[test]
    fn zero_pivot_without_coupling_is_psd() {
        let m = Matrix::from_i64_rows(&[&[1, 1, 0], &[1, 1, 0], &[0, 0, 3]]);
        let Psd::Yes(f) = ldlt_psd(&m).unwrap() else {
            panic!("rank-deficient psd matrix")
        };
        assert_eq!(f.d()[1], rat_int(0));
        assert_eq!(f.reconstruct(), m);
    }

    #[test]
    fn asymmetric_rejected() {
        let m = Matrix::from_i64_rows(&[&[1, 2], &[3, 1]]);
        assert!(matches!(ldlt_psd(&m), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn solve_and_inverse_exact() {
        let m = Matrix::from_i64_rows(&[&[4, 2, 0], &[2, 3, 1], &[0, 1, 2]]);
        let f = ldlt_pd(&m).unwrap();
        let inv = f.inverse();
        assert_eq!(m.mul(&inv), Matrix::identity(3));
        let x = f.solve(&[rat_int(1), rat(1, 2), rat_int(-3)]);
        assert_eq!(m.mul_vec(&x), vec![rat_int(1), rat(1, 2), rat_int(-3)]);
    }

    #[test]
    fn pd_rejects_semidefinite() {
        let m = Matrix::from_i64_rows(&[&[1, 1], &[1, 1]]);
        assert!(ldlt_pd(&m).is_none());
        let mf = m.to_f64();
        assert!(ldlt_pd(&mf).is_none());
    }
}
