//! Direct summation of the Bessel series: P(x) = Σ n J_n Ĵ_n, Σ J_ν², Σ J_ν Ĵ_ν,
//! and the Lommel-type tail ∫_x^∞ J_ν²/t dt = (1 − Σ ε_n J²_{ν+n}) / (2ν).
//!
//! ε₀ = 1 and ε_n = 2 for n ≥ 1 throughout.

use crate::bessel::{bessel_j_sequence, bessel_y_sequence, EvalPoint, Order};
use crate::error::{Error, Estimate, Result};
use crate::order_derivative::{closed_term, jhat, CORRECTION_LIMIT};
use crate::quadrature::{integral_jsq_over_t, QuadraturePlan};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesTruncation {
    pub base_margin: u32,
    pub growth_coefficient: f64,
    pub tail_tolerance: f64,
}

impl Default for SeriesTruncation {
    fn default() -> Self {
        Self {
            base_margin: 20,
            growth_coefficient: 9.0,
            tail_tolerance: 1e-12,
        }
    }
}

impl SeriesTruncation {
    pub fn validate(&self) -> Result<()> {
        if self.base_margin < 10 {
            return Err(Error::InvalidConfig(format!(
                "base_margin {} < 10",
                self.base_margin
            )));
        }
        if !(self.growth_coefficient >= 0.0 && self.growth_coefficient.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "growth_coefficient {} must be non-negative",
                self.growth_coefficient
            )));
        }
        if !(self.tail_tolerance > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tail_tolerance {} must be positive",
                self.tail_tolerance
            )));
        }
        Ok(())
    }

    /// N(x) = ⌈x + c·x^{1/3} + margin⌉
    pub fn order(&self, x: f64) -> usize {
        (x + self.growth_coefficient * x.cbrt() + self.base_margin as f64).ceil() as usize
    }
}

/// Terms are accepted once |last|/|peak| is below 1e-3·tail_tolerance.
fn decay_check(terms: &[f64], trunc: &SeriesTruncation) -> Result<()> {
    let peak = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let last = terms.last().map_or(0.0, |t| t.abs());
    let ratio = if peak > 0.0 { last / peak } else { 0.0 };
    if ratio > 1e-3 * trunc.tail_tolerance || !ratio.is_finite() {
        return Err(Error::NonConvergence {
            order: terms.len().saturating_sub(1),
            ratio,
        });
    }
    Ok(())
}

/// |last/peak| term ratio of the P(x) series at its truncation order.
pub fn p_term_ratio(point: EvalPoint, trunc: &SeriesTruncation) -> Result<f64> {
    let terms = p_terms(point.positive()?, trunc)?;
    let peak = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let last = terms.last().map_or(0.0, |t| t.abs());
    Ok(if peak > 0.0 { last / peak } else { 0.0 })
}

/// Spot checks of the closed Ĵ_n against finite differences happen every this many terms.
const SPOT_CHECK_STRIDE: usize = 8;

/// Largest cancellation error accepted from the closed Ĵ_n before falling back
/// to finite differences.
const CLOSED_FORM_ERROR: f64 = 1e-13;

/// Ĵ_0..Ĵ_N at x: closed form where its correction sum is well conditioned,
/// finite differences in ν elsewhere.
fn jhat_terms(x: f64, js: &[f64]) -> Result<Vec<f64>> {
    let count = js.len();
    let ys = bessel_y_sequence(x, count).ok();
    let point = EvalPoint::new(x)?;
    let mut out = Vec::with_capacity(count);
    for n in 0..count {
        let closed = ys
            .as_ref()
            .map(|ys| closed_term(n, x, js, ys[n]))
            .filter(|t| {
                t.value.is_finite()
                    && t.largest_correction <= CORRECTION_LIMIT
                    && t.cancellation <= CLOSED_FORM_ERROR
            });
        let value = match closed {
            Some(t) => {
                if n > 0 && n % SPOT_CHECK_STRIDE == 0 {
                    let fd = jhat(n as u32, point)?;
                    // compare the contributions n·J_n·Ĵ_n rather than Ĵ_n itself
                    let gap = (n as f64 * js[n] * (t.value - fd)).abs();
                    let scale = (n as f64 * js[n] * fd).abs();
                    if gap > 1e-9 + 1e-7 * scale {
                        return Err(Error::BudgetExceeded {
                            value: t.value,
                            estimate: gap,
                            budget: 1e-9,
                        });
                    }
                }
                t.value
            }
            None => jhat(n as u32, point)?,
        };
        out.push(value);
    }
    Ok(out)
}

fn p_terms(x: f64, trunc: &SeriesTruncation) -> Result<Vec<f64>> {
    trunc.validate()?;
    let count = trunc.order(x) + 1;
    let js = bessel_j_sequence(0.0, x, count)?;
    let jh = jhat_terms(x, &js)?;
    Ok((0..count).map(|n| n as f64 * js[n] * jh[n]).collect())
}

fn summed(terms: &[f64], trunc: &SeriesTruncation) -> Result<Estimate> {
    decay_check(terms, trunc)?;
    let value: f64 = terms.iter().sum();
    let abs: f64 = terms.iter().map(|t| t.abs()).sum();
    let tail = terms.last().map_or(0.0, |t| 2.0 * t.abs());
    Ok(Estimate::new(
        value,
        tail + 4.0 * f64::EPSILON * abs * (terms.len() as f64).sqrt(),
    ))
}

/// P(x) = Σ_{n=0}^{N(x)} n·J_n(x)·Ĵ_n(x).
pub fn p_direct(point: EvalPoint, trunc: &SeriesTruncation) -> Result<Estimate> {
    let x = point.positive()?;
    let terms = p_terms(x, trunc)?;
    summed(&terms, trunc)
}

/// Σ_{ν=0}^{N} J_ν(x)²; the closure relation gives (J₀² + 1)/2.
pub fn sum_squares_all(point: EvalPoint, trunc: &SeriesTruncation) -> Result<Estimate> {
    trunc.validate()?;
    let x = point.value();
    if x == 0.0 {
        return Ok(Estimate::new(1.0, 0.0));
    }
    let js = bessel_j_sequence(0.0, x, trunc.order(x) + 1)?;
    let terms: Vec<f64> = js.iter().map(|j| j * j).collect();
    summed(&terms, trunc)
}

/// Σ_{ν=0}^{N} J_ν(x)·Ĵ_ν(x).
pub fn sum_jjhat(point: EvalPoint, trunc: &SeriesTruncation) -> Result<Estimate> {
    let x = point.positive()?;
    trunc.validate()?;
    let js = bessel_j_sequence(0.0, x, trunc.order(x) + 1)?;
    let jh = jhat_terms(x, &js)?;
    let terms: Vec<f64> = js.iter().zip(&jh).map(|(a, b)| a * b).collect();
    summed(&terms, trunc)
}

/// Right-hand side of the Σ J_ν Ĵ_ν identity: −½∫_x^∞ J₀²/t dt + ½ J₀ Ĵ₀.
pub fn sum_jjhat_identity(point: EvalPoint, trunc: &SeriesTruncation) -> Result<Estimate> {
    let x = point.positive()?;
    let tail = lommel_tail(Order::integer(0), point, trunc)?;
    let j0 = bessel_j_sequence(0.0, x, 1)?[0];
    let jh0 = jhat(0, point)?;
    Ok(Estimate::new(
        -0.5 * tail.value + 0.5 * j0 * jh0,
        0.5 * tail.error + 1e-9 * (j0 * jh0).abs(),
    ))
}

/// ∫_x^∞ J_ν(t)²/t dt: the series identity for ν > 0, quadrature for ν = 0.
pub fn lommel_tail(order: Order, point: EvalPoint, trunc: &SeriesTruncation) -> Result<Estimate> {
    trunc.validate()?;
    let nu = order.value();
    let x = point.value();
    if nu == 0.0 {
        return integral_jsq_over_t(order, point, &QuadraturePlan::default());
    }
    if x == 0.0 {
        return Ok(Estimate::new(0.5 / nu, 0.0));
    }
    let js = bessel_j_sequence(nu, x, trunc.order(x) + 1)?;
    let terms: Vec<f64> = js
        .iter()
        .enumerate()
        .map(|(n, j)| if n == 0 { j * j } else { 2.0 * j * j })
        .collect();
    let sum = summed(&terms, trunc)?;
    // 1 − Σ cancels as x grows; the rounding of the 1 dominates then
    Ok(Estimate::new(
        (1.0 - sum.value) / (2.0 * nu),
        (sum.error + f64::EPSILON) / (2.0 * nu),
    ))
}
