//! Algorithm 1: alternate a Newton step on the certificate with the largest bound
//! update the new certificate still supports, keeping a dual certificate of
//! t − c𝟏 at every iterate.

use std::time::Instant;

use serde::Serialize;

use crate::barrier::BarrierContext;
use crate::certificates::{gradient_certificate_of, NewtonOptions};
use crate::cone::ConeOperator;
use crate::constants::{auto_constants, rho, ConvergenceConstants};
use crate::error::{Error, Result};
use crate::field::{dot, lift_f64, rat, Field, Rational};
use crate::rational::{verify_exact, Verdict};

#[derive(Clone, Debug, PartialEq)]
pub enum CSetting {
    /// Closed-form or structural constants for built-in interval cones, none otherwise.
    Auto,
    Value(Rational),
    None,
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub r: Rational,
    pub epsilon: f64,
    pub c: CSetting,
    pub max_iters: usize,
    /// Threshold on Δc when no C is available; defaults to ε·1e−2.
    pub eps_abs: Option<f64>,
    /// Verify every iterate exactly (expensive for large cones).
    pub verify_iterates: bool,
    /// Verify the returned pair exactly, walking back through earlier iterates on failure.
    pub verify_final: bool,
    pub max_halvings: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            r: rat(1, 4),
            epsilon: 1e-7,
            c: CSetting::Auto,
            max_iters: 10_000,
            eps_abs: None,
            verify_iterates: false,
            verify_final: true,
            max_halvings: 30,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        rho(&self.r)?;
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if let CSetting::Value(c) = &self.c {
            if *c <= Rational::zero() {
                return Err(Error::InvalidParameter("C must be positive".into()));
            }
        }
        if let Some(e) = self.eps_abs {
            if !(e > 0.0) {
                return Err(Error::InvalidParameter("eps_abs must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterRecord {
    pub iter: usize,
    pub c: f64,
    pub delta_c: f64,
    /// ‖x − H(x)⁻¹(t − c𝟏)‖ₓ after the Newton step, at the incoming c.
    pub residual_norm: f64,
    /// Seconds since the solve started.
    pub wall_time: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certified: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    /// Stopped by Δc ≤ ρ_r·C·ε.
    Converged,
    /// Stopped by the absolute Δc threshold; the bound is certified but the gap is not guaranteed.
    ConvergedNoGapGuarantee,
    /// t = 0.
    Trivial,
    MaxIterations,
    NumericFailure,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolverTrace {
    pub records: Vec<IterRecord>,
    pub status: Option<SolveStatus>,
}

impl SolverTrace {
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("records serialize"));
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub c: Rational,
    pub x: Vec<Rational>,
    pub trace: SolverTrace,
    pub status: SolveStatus,
    pub gap_guarantee: bool,
    pub iterations: usize,
    pub threshold: f64,
    pub constants: Option<ConvergenceConstants>,
    /// Whether the returned pair was checked with `verify_exact`.
    pub verified: bool,
}

/// A failed solve, with the last certified pair when one exists.
#[derive(Debug)]
pub struct PartialResult {
    pub error: Error,
    pub partial: Option<SolveResult>,
}

impl std::fmt::Display for PartialResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.error)
    }
}

impl std::error::Error for PartialResult {}

impl From<Error> for PartialResult {
    fn from(error: Error) -> Self {
        PartialResult { error, partial: None }
    }
}

/// Gradient certificate of 𝟏: closed form when known, Newton iteration otherwise.
pub fn unit_certificate(op: &ConeOperator) -> Result<Vec<f64>> {
    if let Some(x) = op.known_unit_certificate() {
        return Ok(x.iter().map(Field::to_f64).collect());
    }
    let one: Vec<f64> = op.one().iter().map(Field::to_f64).collect();
    let start: Vec<f64> = op.interior_point().iter().map(Field::to_f64).collect();
    gradient_certificate_of(op, &one, &start, &NewtonOptions::default())
}

/// c₀ = −((1+r)/r)·‖t‖*_{x₁} and x = −x₁/c₀; (0, x₁) when t = 0.
pub fn initialize(op: &ConeOperator, x1: &[f64], t: &[f64], r: f64) -> Result<(f64, Vec<f64>)> {
    if t.len() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            got: t.len(),
        });
    }
    if t.iter().all(|v| *v == 0.0) {
        return Ok((0.0, x1.to_vec()));
    }
    let ctx = BarrierContext::new(op, x1.to_vec())?;
    let c0 = -((1.0 + r) / r) * ctx.dual_local_norm(t);
    Ok((c0, x1.iter().map(|v| -v / c0).collect()))
}

/// x⁺ = 2x − H(x)⁻¹(t − c𝟏).
pub fn newton_step(ctx: &BarrierContext<'_, f64>, t: &[f64], c: f64) -> Vec<f64> {
    let one = one_f64(ctx.cone());
    let s: Vec<f64> = t.iter().zip(&one).map(|(ti, oi)| ti - c * oi).collect();
    let h = ctx.solve_hessian(&s);
    ctx.x().iter().zip(&h).map(|(x, hi)| 2.0 * x - hi).collect()
}

/// The larger root γ of ‖u + γv‖ₓ² = (r/(r+1))² with u = x − H⁻¹t and v = H⁻¹𝟏,
/// solved for γ − c around the incoming bound c.
pub fn bound_update(ctx: &BarrierContext<'_, f64>, t: &[f64], c: f64, r: f64) -> Result<f64> {
    let (a, b, w_sq) = shifted_quadratic(ctx, t, c);
    let radius = r / (r + 1.0);
    let cc = w_sq - radius * radius;
    let disc = b * b - 4.0 * a * cc;
    if !(disc >= 0.0) || !(a > 0.0) {
        return Err(Error::NumericFailure(format!("bound update has no real root (disc = {disc})")));
    }
    let sq = disc.sqrt();
    // larger root, computed without cancellation
    let delta = if b <= 0.0 { (-b + sq) / (2.0 * a) } else { (2.0 * cc) / (-b - sq) };
    Ok(c + delta)
}

/// With w = x − H⁻¹(t − c𝟏) and v = H⁻¹𝟏: ‖w + δv‖ₓ² = aδ² + bδ + ‖w‖ₓ².
fn shifted_quadratic(ctx: &BarrierContext<'_, f64>, t: &[f64], c: f64) -> (f64, f64, f64) {
    let one = one_f64(ctx.cone());
    let s: Vec<f64> = t.iter().zip(&one).map(|(ti, oi)| ti - c * oi).collect();
    let hs = ctx.solve_hessian(&s);
    let w: Vec<f64> = ctx.x().iter().zip(&hs).map(|(x, h)| x - h).collect();
    let v = ctx.solve_hessian(&one);
    let a = dot(&one, &v);
    let b = 2.0 * dot(&w, &one);
    (a, b, ctx.local_norm_sq(&w).max(0.0))
}

/// ‖x − H(x)⁻¹(t − c𝟏)‖ₓ.
pub fn residual_norm(ctx: &BarrierContext<'_, f64>, t: &[f64], c: f64) -> f64 {
    shifted_quadratic(ctx, t, c).2.sqrt()
}

fn one_f64(op: &ConeOperator) -> Vec<f64> {
    op.one().iter().map(Field::to_f64).collect()
}

/// Runs Algorithm 1 on t.
pub fn solve(op: &ConeOperator, t: &[Rational], config: &SolverConfig) -> std::result::Result<SolveResult, PartialResult> {
    solve_with_observer(op, t, config, |_, _| {})
}

/// Like [`solve`], calling `observer` with each record and iterate.
pub fn solve_with_observer(
    op: &ConeOperator,
    t: &[Rational],
    config: &SolverConfig,
    mut observer: impl FnMut(&IterRecord, &[f64]),
) -> std::result::Result<SolveResult, PartialResult> {
    config.validate()?;
    if t.len() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            got: t.len(),
        }
        .into());
    }
    let start = Instant::now();
    let r = config.r.to_f64();
    let tf: Vec<f64> = t.iter().map(Field::to_f64).collect();

    let constants = match &config.c {
        CSetting::Auto => auto_constants(op, &config.r),
        _ => None,
    };
    let (threshold, guaranteed) = match (&config.c, &constants) {
        (CSetting::Value(cv), _) => (rho(&config.r)?.to_f64() * cv.to_f64() * config.epsilon, true),
        (CSetting::Auto, Some(k)) => (k.stopping_factor().to_f64() * config.epsilon, true),
        _ => (config.eps_abs.unwrap_or(config.epsilon * 1e-2), false),
    };

    let x1 = unit_certificate(op)?;
    let (c0, x0) = initialize(op, &x1, &tf, r)?;
    let mut trace = SolverTrace::default();

    let finish = |c: f64, x: Vec<f64>, status: SolveStatus, trace: SolverTrace, history: &[(f64, Vec<f64>)]| {
        finalize(op, t, config, c, x, status, trace, history, guaranteed, threshold, constants.clone())
    };

    if c0 == 0.0 {
        return finish(0.0, x0, SolveStatus::Trivial, trace, &[]);
    }

    let mut c = c0;
    let mut ctx = BarrierContext::new(op, x0).map_err(PartialResult::from)?;
    let mut history: Vec<(f64, Vec<f64>)> = vec![(c, ctx.x().to_vec())];

    for iter in 1..=config.max_iters {
        let target = newton_step(&ctx, &tf, c);
        let mut next = None;
        let mut step = 1.0;
        for _ in 0..=config.max_halvings {
            let cand: Vec<f64> = if step == 1.0 {
                target.clone()
            } else {
                ctx.x().iter().zip(&target).map(|(x, p)| x + step * (p - x)).collect()
            };
            if let Ok(nctx) = BarrierContext::new(op, cand) {
                next = Some(nctx);
                break;
            }
            step *= 0.5;
        }
        let Some(nctx) = next else {
            return finish(c, ctx.x().to_vec(), SolveStatus::NumericFailure, trace, &history);
        };
        let residual = residual_norm(&nctx, &tf, c);
        let c_plus = match bound_update(&nctx, &tf, c, r) {
            Ok(v) if v.is_finite() => v,
            _ => return finish(c, ctx.x().to_vec(), SolveStatus::NumericFailure, trace, &history),
        };
        let delta = c_plus - c;
        if delta <= 0.0 {
            // no progress left in double precision
            let status = if guaranteed { SolveStatus::Converged } else { SolveStatus::ConvergedNoGapGuarantee };
            return finish(c, ctx.x().to_vec(), status, trace, &history);
        }
        ctx = nctx;
        c = c_plus;
        let certified = if config.verify_iterates {
            Some(pair_certified(op, t, c, ctx.x()))
        } else {
            None
        };
        let rec = IterRecord {
            iter,
            c,
            delta_c: delta,
            residual_norm: residual,
            wall_time: start.elapsed().as_secs_f64(),
            certified,
        };
        observer(&rec, ctx.x());
        trace.records.push(rec);
        history.push((c, ctx.x().to_vec()));
        if certified == Some(false) {
            history.pop();
            let (c_prev, x_prev) = history.last().cloned().expect("initial pair");
            return finish(c_prev, x_prev, SolveStatus::NumericFailure, trace, &history);
        }
        if delta <= threshold {
            let status = if guaranteed { SolveStatus::Converged } else { SolveStatus::ConvergedNoGapGuarantee };
            return finish(c, ctx.x().to_vec(), status, trace, &history);
        }
    }
    finish(c, ctx.x().to_vec(), SolveStatus::MaxIterations, trace, &history)
}

fn pair_certified(op: &ConeOperator, t: &[Rational], c: f64, x: &[f64]) -> bool {
    let (Ok(cq), Ok(xq)) = (lift_f64(c), crate::rational::float_to_rational(x)) else {
        return false;
    };
    matches!(verify_exact(op, t, &cq, &xq), Ok(Verdict::Certified))
}

#[allow(clippy::too_many_arguments)]
fn finalize(
    op: &ConeOperator,
    t: &[Rational],
    config: &SolverConfig,
    c: f64,
    x: Vec<f64>,
    mut status: SolveStatus,
    mut trace: SolverTrace,
    history: &[(f64, Vec<f64>)],
    guaranteed: bool,
    threshold: f64,
    constants: Option<ConvergenceConstants>,
) -> std::result::Result<SolveResult, PartialResult> {
    let iterations = trace.records.len();
    let mut pair = (c, x);
    let mut verified = false;
    if config.verify_final {
        let mut candidates = std::iter::once(pair.clone()).chain(history.iter().rev().cloned());
        let found = candidates.find(|(cc, xx)| pair_certified(op, t, *cc, xx));
        match found {
            Some(p) => {
                if p.0 != pair.0 && status != SolveStatus::NumericFailure {
                    status = SolveStatus::NumericFailure;
                }
                pair = p;
                verified = true;
            }
            None => {
                trace.status = Some(SolveStatus::NumericFailure);
                return Err(PartialResult {
                    error: Error::NumericFailure("no iterate passed exact verification".into()),
                    partial: None,
                });
            }
        }
    }
    trace.status = Some(status.clone());
    let c_exact = lift_f64(pair.0).map_err(PartialResult::from)?;
    let x_exact = crate::rational::float_to_rational(&pair.1).map_err(PartialResult::from)?;
    let result = SolveResult {
        c: c_exact,
        x: x_exact,
        trace,
        gap_guarantee: guaranteed && status == SolveStatus::Converged,
        status: status.clone(),
        iterations,
        threshold,
        constants,
        verified,
    };
    match status {
        SolveStatus::MaxIterations => Err(PartialResult {
            error: Error::MaxIterations(config.max_iters),
            partial: Some(result),
        }),
        SolveStatus::NumericFailure => Err(PartialResult {
            error: Error::NumericFailure("iteration stopped early; returning the last certified pair".into()),
            partial: Some(result),
        }),
        _ => Ok(result),
    }
}
