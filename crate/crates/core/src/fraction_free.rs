//! Exact certificate checks over the integers.
//!
//! Everything is scaled to integer data first (the verdict is invariant under positive
//! scaling of x, of t − c𝟏 and of Λ), then inverses and solves go through fraction-free
//! Gauss–Jordan elimination, whose pivots are the leading principal minors.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::cone::ConeOperator;
use crate::error::{Error, Result};
use crate::field::{common_denominator, Rational};
use crate::linalg::Matrix;

type Rows = Vec<Vec<BigInt>>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    NotInterior(usize),
    Certified,
    NotCertified,
}

/// Fraction-free Gauss–Jordan on [A | B] for square A. Returns det A and adj(A)·B, or
/// the index of the first non-positive leading principal minor.
pub fn gauss_jordan(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> std::result::Result<(BigInt, Rows), usize> {
    let n = a.len();
    let mut m: Rows = a
        .iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().chain(rb).cloned().collect())
        .collect();
    let width = m.first().map_or(0, Vec::len);
    let mut prev = BigInt::one();
    for k in 0..n {
        let p = m[k][k].clone();
        if !p.is_positive() {
            return Err(k);
        }
        let pivot_row = m[k].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == k {
                continue;
            }
            let f = row[k].clone();
            for j in 0..width {
                let mut v = &p * &row[j];
                if !f.is_zero() && !pivot_row[j].is_zero() {
                    v -= &f * &pivot_row[j];
                }
                row[j] = if prev.is_one() { v } else { v / &prev };
            }
        }
        prev = p;
    }
    let det = prev;
    let rhs = m.into_iter().map(|row| row[n..].to_vec()).collect();
    Ok((det, rhs))
}

fn integer_scaled(v: &[Rational]) -> Vec<BigInt> {
    let d = common_denominator(v);
    v.iter().map(|q| q.numer() * (&d / q.denom())).collect()
}

/// Λ applied to an integer vector with entries scaled by `m`, as dense integer blocks.
fn apply_scaled(op: &ConeOperator, entries: &ScaledEntries, y: &[BigInt]) -> Vec<Rows> {
    op.block_dims()
        .iter()
        .zip(entries)
        .map(|(&l, list)| {
            let mut a = vec![vec![BigInt::zero(); l]; l];
            for (r, c, u, e) in list {
                if y[*u].is_zero() {
                    continue;
                }
                let v = e * &y[*u];
                if r != c {
                    a[*c][*r] += &v;
                }
                a[*r][*c] += v;
            }
            a
        })
        .collect()
}

type ScaledEntries = Vec<Vec<(usize, usize, usize, BigInt)>>;

/// Integer data at x: Λ's entries scaled by their common denominator m, x scaled by
/// its common denominator D, and the Hessian scaled by (Πdet)²/D².
struct Scaled {
    entries: ScaledEntries,
    x_den: BigInt,
    dets: Vec<BigInt>,
    hessian: Rows,
}

enum Assembly {
    NotInterior(usize),
    Ready(Scaled),
}

fn scaled_entries(op: &ConeOperator) -> ScaledEntries {
    let nb = op.block_dims().len();
    let m = common_denominator((0..nb).flat_map(|b| op.entries(b).iter().map(|e| &e.value)));
    (0..nb)
        .map(|b| {
            op.entries(b)
                .iter()
                .map(|e| (e.row, e.col, e.index, e.value.numer() * (&m / e.value.denom())))
                .collect()
        })
        .collect()
}

fn assemble(op: &ConeOperator, x: &[Rational]) -> Assembly {
    let u_dim = op.dim();
    let nb = op.block_dims().len();
    let entries = scaled_entries(op);
    let x_den = common_denominator(x);
    let xs: Vec<BigInt> = x.iter().map(|q| q.numer() * (&x_den / q.denom())).collect();
    let lambda = apply_scaled(op, &entries, &xs);
    let mut adjs = Vec::with_capacity(nb);
    let mut dets = Vec::with_capacity(nb);
    let mut contents = Vec::with_capacity(nb);
    for (b, a) in lambda.iter().enumerate() {
        let l = a.len();
        let id: Rows = (0..l)
            .map(|i| (0..l).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
            .collect();
        match gauss_jordan(a, &id) {
            Ok((det, adj)) => {
                // adj = g·P with P primitive, so the products below stay small
                let g = adj.iter().flatten().fold(BigInt::zero(), |acc, v| acc.gcd(v));
                let p: Rows = adj.into_iter().map(|row| row.into_iter().map(|v| v / &g).collect()).collect();
                dets.push(det);
                contents.push(g);
                adjs.push(p);
            }
            Err(_) => return Assembly::NotInterior(b),
        }
    }
    let total: BigInt = dets.iter().product();
    let weights: Vec<BigInt> = dets
        .iter()
        .zip(&contents)
        .map(|(d, g)| {
            let f = &total / d * g;
            &f * &f
        })
        .collect();

    let mut by_index: Vec<Vec<(usize, usize, usize, &BigInt)>> = vec![Vec::new(); u_dim];
    for (b, list) in entries.iter().enumerate() {
        for (r, c, u, e) in list {
            by_index[*u].push((b, *r, *c, e));
        }
    }
    let small: Vec<Option<Vec<Vec<i128>>>> = adjs.iter().map(|p| to_small(p)).collect();
    let pbits: Vec<u64> = adjs.iter().map(|p| p.iter().flatten().map(BigInt::bits).max().unwrap_or(0)).collect();
    let mut h = vec![vec![BigInt::zero(); u_dim]; u_dim];
    for (u, list) in by_index.iter().enumerate() {
        let mut q: Vec<Option<Acc>> = (0..nb).map(|_| None).collect();
        for b in 0..nb {
            let part: Vec<(usize, usize, &BigInt)> =
                list.iter().filter(|e| e.0 == b).map(|&(_, r, c, e)| (r, c, e)).collect();
            if part.is_empty() {
                continue;
            }
            let ebits = part.iter().map(|e| e.2.bits()).max().unwrap_or(0);
            let terms = 2 * part.len() as u64;
            let fits = ebits + 2 * pbits[b] + (64 - terms.leading_zeros() as u64) < 126;
            q[b] = Some(match (&small[b], fits) {
                (Some(p), true) => Acc::Small(accumulate_small(p, &part)),
                _ => Acc::Big(accumulate_big(&adjs[b], &part)),
            });
        }
        for (b, qb) in q.iter().enumerate() {
            let Some(qb) = qb else { continue };
            for (r, c, v, e) in &entries[b] {
                let Some(sv) = qb.sym(*r, *c) else { continue };
                h[*v][u] += &weights[b] * e * sv;
            }
        }
    }
    Assembly::Ready(Scaled {
        entries,
        x_den,
        dets,
        hessian: h,
    })
}

/// The exact Hessian H(x), or the first block where Λ(x) is not positive definite.
pub fn hessian(op: &ConeOperator, x: &[Rational]) -> std::result::Result<Matrix<Rational>, usize> {
    let sc = match assemble(op, x) {
        Assembly::NotInterior(b) => return Err(b),
        Assembly::Ready(sc) => sc,
    };
    let total: BigInt = sc.dets.iter().product();
    let scale = Rational::new(&sc.x_den * &sc.x_den, &total * &total);
    let n = sc.hessian.len();
    let mut m = Matrix::<Rational>::zeros(n, n);
    for (i, row) in sc.hessian.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            if !v.is_zero() {
                m[(i, j)] = Rational::from_integer(v) * &scale;
            }
        }
    }
    Ok(m)
}

/// Decides whether x certifies s, i.e. Λ(x) ≻ 0 and Λ(H(x)⁻¹s) ⪰ 0.
pub fn certify(op: &ConeOperator, s: &[Rational], x: &[Rational]) -> Result<Outcome> {
    let u_dim = op.dim();
    for len in [s.len(), x.len()] {
        if len != u_dim {
            return Err(Error::DimensionMismatch { expected: u_dim, got: len });
        }
    }
    let sc = match assemble(op, x) {
        Assembly::NotInterior(b) => return Ok(Outcome::NotInterior(b)),
        Assembly::Ready(sc) => sc,
    };
    let rhs: Rows = integer_scaled(s).into_iter().map(|v| vec![v]).collect();
    let (_, y) = gauss_jordan(&sc.hessian, &rhs).map_err(|_| Error::SingularHessian)?;
    let y: Vec<BigInt> = y.into_iter().map(|mut r| r.remove(0)).collect();
    let y = primitive(y);
    for block in apply_scaled(op, &sc.entries, &y) {
        if !is_psd(block) {
            return Ok(Outcome::NotCertified);
        }
    }
    Ok(Outcome::Certified)
}

/// Divides out the positive content of a vector.
fn primitive(v: Vec<BigInt>) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() || g.is_one() {
        return v;
    }
    v.into_iter().map(|x| x / &g).collect()
}

/// Exact PSD test for a symmetric integer matrix: fraction-free elimination with
/// diagonal pivoting. Once no positive diagonal remains, the (scaled) Schur complement
/// must vanish.
pub fn is_psd(mut m: Rows) -> bool {
    let n = m.len();
    let mut active: Vec<usize> = (0..n).collect();
    let mut prev = BigInt::one();
    while !active.is_empty() {
        if active.iter().any(|&i| m[i][i].is_negative()) {
            return false;
        }
        let Some(pos) = active.iter().position(|&i| m[i][i].is_positive()) else {
            return active.iter().all(|&i| active.iter().all(|&j| m[i][j].is_zero()));
        };
        let k = active.swap_remove(pos);
        let p = m[k][k].clone();
        let pivot_row = m[k].clone();
        for &i in &active {
            let f = m[i][k].clone();
            for &j in &active {
                let mut v = &p * &m[i][j];
                if !f.is_zero() && !pivot_row[j].is_zero() {
                    v -= &f * &pivot_row[j];
                }
                m[i][j] = if prev.is_one() { v } else { v / &prev };
            }
        }
        prev = p;
    }
    true
}

/// Σ e·(P[r]ᵀP[c] + P[c]ᵀP[r]) over the entries (r, c, e) of one coefficient, in
/// machine integers or big integers.
enum Acc {
    Small(Vec<Vec<i128>>),
    Big(Rows),
}

impl Acc {
    /// q[r][c] + q[c][r] for off-diagonal positions, q[r][r] otherwise; None when zero.
    fn sym(&self, r: usize, c: usize) -> Option<BigInt> {
        match self {
            Acc::Small(q) => {
                let v = if r != c { q[r][c] + q[c][r] } else { q[r][c] };
                (v != 0).then(|| BigInt::from(v))
            }
            Acc::Big(q) => {
                let v = if r != c { &q[r][c] + &q[c][r] } else { q[r][c].clone() };
                (!v.is_zero()).then_some(v)
            }
        }
    }
}

fn to_small(p: &Rows) -> Option<Vec<Vec<i128>>> {
    p.iter()
        .map(|row| row.iter().map(|v| i64::try_from(v).ok().map(i128::from)).collect())
        .collect()
}

fn accumulate_small(p: &[Vec<i128>], part: &[(usize, usize, &BigInt)]) -> Vec<Vec<i128>> {
    let l = p.len();
    let mut q = vec![vec![0i128; l]; l];
    let mut outer = |a: &[i128], b: &[i128], s: i128| {
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            let sa = ai * s;
            for (o, &bj) in q[i].iter_mut().zip(b) {
                *o += sa * bj;
            }
        }
    };
    for &(r, c, e) in part {
        let e = i128::try_from(e).expect("entry bound checked");
        outer(&p[r], &p[c], e);
        if r != c {
            outer(&p[c], &p[r], e);
        }
    }
    q
}

fn accumulate_big(p: &Rows, part: &[(usize, usize, &BigInt)]) -> Rows {
    let l = p.len();
    let mut q = vec![vec![BigInt::zero(); l]; l];
    for &(r, c, e) in part {
        outer_acc(&mut q, &p[r], &p[c], e);
        if r != c {
            outer_acc(&mut q, &p[c], &p[r], e);
        }
    }
    q
}

fn outer_acc(m: &mut Rows, a: &[BigInt], b: &[BigInt], s: &BigInt) {
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        let sa = ai * s;
        for (o, bj) in m[i].iter_mut().zip(b) {
            if !bj.is_zero() {
                *o += &sa * bj;
            }
        }
    }
}
