//! Exact post-processing: float lifting, exact verification, rounding and
//! explicit weighted sum-of-squares decompositions.

use num_bigint::BigInt;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::barrier::BarrierContext;
use crate::certificates::{gram_certificate, DualCertificate, GramCertificate};
use crate::cone::{BlockSymMatrix, ConeOperator};
use crate::constants::lambda_max;
use crate::fraction_free::{self, Outcome};
use crate::error::{Error, Result};
use crate::field::{lift_f64, rat, Field, Rational};
use crate::linalg::{ldlt_psd, Matrix, Psd};

/// LDLᵀ of a symmetric rational matrix, or a vector v with vᵀMv < 0.
pub fn ldlt_rational(m: &Matrix<Rational>) -> Result<Psd<Rational>> {
    ldlt_psd(m)
}

/// Exact binary-expansion lift of every component.
pub fn float_to_rational(v: &[f64]) -> Result<Vec<Rational>> {
    v.iter().map(|&x| lift_f64(x)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RejectReason {
    /// Λ(x) is not positive definite; the block index is given.
    NotInterior(usize),
    /// Λ(H(x)⁻¹(t − c𝟏)) has a negative direction.
    NotCertified,
}

impl std::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RejectReason::NotInterior(b) => write!(f, "not-interior (block {b})"),
            RejectReason::NotCertified => write!(f, "not-certified"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Certified,
    Rejected(RejectReason),
}

impl Verdict {
    pub fn is_certified(&self) -> bool {
        matches!(self, Verdict::Certified)
    }
}

/// t − c𝟏
pub fn shifted(op: &ConeOperator, t: &[Rational], c: &Rational) -> Vec<Rational> {
    t.iter().zip(op.one()).map(|(ti, oi)| ti - oi * c).collect()
}

/// Decides in rational arithmetic whether x certifies t − c𝟏. A certified verdict
/// proves t − c ≥ 0 on the set described by the cone.
pub fn verify_exact(op: &ConeOperator, t: &[Rational], c: &Rational, x: &[Rational]) -> Result<Verdict> {
    for len in [t.len(), x.len()] {
        if len != op.dim() {
            return Err(Error::DimensionMismatch {
                expected: op.dim(),
                got: len,
            });
        }
    }
    let s = shifted(op, t, c);
    Ok(match fraction_free::certify(op, &s, x)? {
        Outcome::Certified => Verdict::Certified,
        Outcome::NotCertified => Verdict::Rejected(RejectReason::NotCertified),
        Outcome::NotInterior(b) => Verdict::Rejected(RejectReason::NotInterior(b)),
    })
}

/// Smallest N allowed by ‖H(x)^{1/2}‖ ≤ (2N/√U)·(r₂ − r₁)/(1 + r₂), with a small
/// upward safety margin on the numeric eigenvalue.
pub fn required_denominator(op: &ConeOperator, x: &[Rational], r1: f64, r2: f64) -> Result<u64> {
    if !(0.0..0.5).contains(&r1) || !(r2 > r1 && r2 <= 0.5) {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= r1 < r2 <= 1/2, got r1 = {r1}, r2 = {r2}"
        )));
    }
    let xf: Vec<f64> = x.iter().map(Field::to_f64).collect();
    let ctx = BarrierContext::new(op, xf)?;
    let lmax = lambda_max(ctx.hessian()) * (1.0 + 1e-6);
    let n = (op.dim() as f64).sqrt() * lmax.sqrt() * (1.0 + r2) / (2.0 * (r2 - r1));
    if !n.is_finite() || n > u64::MAX as f64 {
        return Err(Error::NumericFailure("denominator bound overflows".into()));
    }
    Ok(n.ceil().max(1.0) as u64)
}

/// Rounds x component-wise to the nearest multiple of 1/N and re-verifies it exactly
/// for t − c𝟏.
pub fn round_certificate(
    op: &ConeOperator,
    x: &[Rational],
    t: &[Rational],
    c: &Rational,
    r1: f64,
    r2: f64,
    n: u64,
) -> Result<Vec<Rational>> {
    let required = required_denominator(op, x, r1, r2)?;
    if n < required {
        return Err(Error::InvalidDenominator { n, required });
    }
    let rounded = round_to_denominator(x, n);
    match verify_exact(op, t, c, &rounded)? {
        Verdict::Certified => Ok(rounded),
        Verdict::Rejected(_) => Err(Error::RoundingRejected),
    }
}

/// Nearest k/N to each component (ties rounded up).
pub fn round_to_denominator(x: &[Rational], n: u64) -> Vec<Rational> {
    let nb = BigInt::from(n);
    x.iter()
        .map(|v| {
            let scaled = v * Rational::from_integer(nb.clone()) + rat(1, 2);
            let k = scaled.numer().div_floor(scaled.denom());
            Rational::new(k, nb.clone())
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SosTerm {
    pub weight_index: usize,
    pub lambda: Rational,
    /// Coefficients in the block's basis p₀, …, p_{L−1}.
    pub square: Vec<Rational>,
}

/// Σ gᵢ·λ·q² = target − bound·𝟏.
#[derive(Clone, Debug, PartialEq)]
pub struct SosDecomposition {
    pub terms: Vec<SosTerm>,
    pub target: Vec<Rational>,
    pub bound: Rational,
}

impl SosDecomposition {
    /// Λ*(⊕ᵢ Σ λ q qᵀ), the coefficient vector of the decomposition.
    pub fn expand(&self, op: &ConeOperator) -> Result<Vec<Rational>> {
        let mut s = BlockSymMatrix::<Rational>::zeros(op.block_dims());
        for term in &self.terms {
            let b = s
                .blocks
                .get_mut(term.weight_index)
                .ok_or_else(|| Error::InvalidParameter("weight index out of range".into()))?;
            if term.square.len() != b.rows() {
                return Err(Error::DimensionMismatch {
                    expected: b.rows(),
                    got: term.square.len(),
                });
            }
            for (i, qi) in term.square.iter().enumerate() {
                if qi.is_zero() {
                    continue;
                }
                let lq = &term.lambda * qi;
                for (j, qj) in term.square.iter().enumerate() {
                    b[(i, j)].add_mul(&lq, qj);
                }
            }
        }
        op.adjoint(&s)
    }

    /// True iff the expansion equals target − bound·𝟏 exactly.
    pub fn check(&self, op: &ConeOperator) -> Result<bool> {
        Ok(self.expand(op)? == shifted(op, &self.target, &self.bound))
    }

    pub fn to_json(&self) -> SosJson {
        SosJson {
            bound: RatJson::from(&self.bound),
            terms: self
                .terms
                .iter()
                .map(|t| SosTermJson {
                    weight_index: t.weight_index,
                    lambda: RatJson::from(&t.lambda),
                    square: t.square.iter().map(RatJson::from).collect(),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatJson {
    pub num: String,
    pub den: String,
}

impl From<&Rational> for RatJson {
    fn from(q: &Rational) -> Self {
        RatJson {
            num: q.numer().to_string(),
            den: q.denom().to_string(),
        }
    }
}

impl RatJson {
    pub fn to_rational(&self) -> Result<Rational> {
        let n: BigInt = self.num.parse().map_err(|_| Error::Parse(format!("bad numerator '{}'", self.num)))?;
        let d: BigInt = self.den.parse().map_err(|_| Error::Parse(format!("bad denominator '{}'", self.den)))?;
        if num_traits::Zero::is_zero(&d) {
            return Err(Error::Parse("zero denominator".into()));
        }
        Ok(Rational::new(n, d))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SosTermJson {
    pub weight_index: usize,
    pub lambda: RatJson,
    pub square: Vec<RatJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SosJson {
    pub bound: RatJson,
    pub terms: Vec<SosTermJson>,
}

/// Splits each PSD Gram block as LDLᵀ: term (i, Dⱼⱼ, column j of L) for each
/// nonzero pivot. `g.target` is read as t − bound·𝟏.
pub fn sos_decomposition(op: &ConeOperator, g: &GramCertificate, bound: &Rational) -> Result<SosDecomposition> {
    let mut terms = Vec::new();
    for (i, block) in g.s.blocks.iter().enumerate() {
        let Psd::Yes(f) = ldlt_psd(block)? else {
            return Err(Error::NotCertified);
        };
        for (j, dj) in f.d().iter().enumerate() {
            if dj.is_zero() {
                continue;
            }
            let square = (0..f.dim()).map(|k| f.l()[(k, j)].clone()).collect();
            terms.push(SosTerm {
                weight_index: i,
                lambda: dj.clone(),
                square,
            });
        }
    }
    let target: Vec<Rational> = g.target.iter().zip(op.one()).map(|(s, o)| s + o * bound).collect();
    let dec = SosDecomposition {
        terms,
        target,
        bound: bound.clone(),
    };
    if !dec.check(op)? {
        return Err(Error::NumericFailure("decomposition does not re-expand to the target".into()));
    }
    Ok(dec)
}

/// Verifies x for t − c𝟏 and returns the resulting decomposition.
pub fn decompose(op: &ConeOperator, t: &[Rational], c: &Rational, x: &[Rational]) -> Result<SosDecomposition> {
    let cert = DualCertificate::new(op, x.to_vec())?;
    let g = gram_certificate(&cert, &shifted(op, t, c))?;
    sos_decomposition(op, &g, c)
}
