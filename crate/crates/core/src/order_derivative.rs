//! Ĵ_n(x) = ∂J_ν(x)/∂ν at integer ν = n, by two independent routes:
//! Richardson-extrapolated finite differences in ν, and the closed integer-order form
//!
//!   Ĵ_n(x) = (π/2) Y_n(x) + (n!/2) Σ_{k<n} (x/2)^{k−n} J_k(x) / ((n−k) k!).

use crate::bessel::{bessel_j_in, bessel_j_sequence, bessel_y_sequence, EvalPoint, RegimeConfig};
use crate::error::{Error, Result};
use crate::gamma::ln_gamma;
use std::f64::consts::FRAC_PI_2;

/// Largest correction term tolerated by [`jhat_closed_integer`].
pub const CORRECTION_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NuDerivativeConfig {
    pub fd_step: f64,
    pub richardson_levels: u8,
}

impl Default for NuDerivativeConfig {
    fn default() -> Self {
        Self {
            fd_step: 1e-3,
            richardson_levels: 2,
        }
    }
}

impl NuDerivativeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.fd_step > 0.0 && self.fd_step <= 1e-3) {
            return Err(Error::InvalidConfig(format!(
                "fd_step {} not in (0, 1e-3]",
                self.fd_step
            )));
        }
        if !(1..=3).contains(&self.richardson_levels) {
            return Err(Error::InvalidConfig(format!(
                "richardson_levels {} not in 1..=3",
                self.richardson_levels
            )));
        }
        Ok(())
    }
}

/// ∂J_ν/∂ν at ν = n by finite differences in the order.
pub fn jhat(n: u32, point: EvalPoint) -> Result<f64> {
    jhat_with(n, point, &NuDerivativeConfig::default())
}

pub fn jhat_with(n: u32, point: EvalPoint, config: &NuDerivativeConfig) -> Result<f64> {
    config.validate()?;
    let x = point.positive()?;
    let levels = config.richardson_levels as usize;
    // the one-sided rule keeps an h³ term, so it gets a shorter step
    let step = if n == 0 { 0.1 * config.fd_step } else { config.fd_step };
    let widest = step * (1u32 << levels) as f64;
    // one regime for the whole stencil so that the difference sees a smooth function
    let regime = RegimeConfig::default().select(n as f64 + widest, x);
    let nf = n as f64;
    let j = |nu: f64| bessel_j_in(regime, nu, x);

    let base = if n == 0 { Some(j(0.0)?) } else { None };
    let mut table = Vec::with_capacity(levels);
    for level in 0..levels {
        let h = step * (1u32 << level) as f64;
        let d = match base {
            // one-sided three-point rule: the order cannot go negative
            Some(j0) => (-3.0 * j0 + 4.0 * j(h)? - j(2.0 * h)?) / (2.0 * h),
            None => (j(nf + h)? - j(nf - h)?) / (2.0 * h),
        };
        table.push(d);
    }
    // central errors run in h², h⁴, …; the one-sided rule's in h², h³, …
    let orders: &[i32] = if n == 0 { &[2, 3, 4] } else { &[2, 4, 6] };
    Ok(richardson(table, orders))
}

/// Repeated elimination of the leading error terms; `table[k]` uses step 2^k·h.
fn richardson(mut table: Vec<f64>, orders: &[i32]) -> f64 {
    for &p in orders {
        if table.len() == 1 {
            break;
        }
        let factor = 2f64.powi(p);
        table = table
            .windows(2)
            .map(|w| (factor * w[0] - w[1]) / (factor - 1.0))
            .collect();
    }
    table[0]
}

/// Closed integer-order form of ∂J_ν/∂ν at ν = n.
///
/// Fails with [`Error::LossOfPrecision`] once any correction term exceeds
/// [`CORRECTION_LIMIT`]; the cancellation against (π/2)Y_n is then too severe.
pub fn jhat_closed_integer(n: u32, point: EvalPoint) -> Result<f64> {
    let x = point.positive()?;
    let count = n as usize + 1;
    let js = bessel_j_sequence(0.0, x, count)?;
    let ys = bessel_y_sequence(x, count)?;
    let term = closed_term(n as usize, x, &js, ys[n as usize]);
    if !term.value.is_finite() {
        return Err(Error::Overflow("closed-form order derivative"));
    }
    if term.largest_correction > CORRECTION_LIMIT {
        return Err(Error::LossOfPrecision {
            magnitude: term.largest_correction,
            limit: CORRECTION_LIMIT,
        });
    }
    Ok(term.value)
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct ClosedTerm {
    pub value: f64,
    pub largest_correction: f64,
    /// Rounding error left by the cancellation between the two parts.
    pub cancellation: f64,
}

/// Closed form from precomputed J_0..J_n and Y_n.
pub(crate) fn closed_term(n: usize, x: f64, js: &[f64], y_n: f64) -> ClosedTerm {
    let ln_half = (0.5 * x).ln();
    let ln_nfact = ln_gamma(n as f64 + 1.0);
    let mut sum = 0.0;
    let mut largest: f64 = 0.0;
    for (k, &jk) in js.iter().enumerate().take(n) {
        let ln_coeff =
            ln_nfact - ln_gamma(k as f64 + 1.0) + (k as f64 - n as f64) * ln_half;
        let t = 0.5 * ln_coeff.exp() * jk / (n - k) as f64;
        largest = largest.max(t.abs());
        sum += t;
    }
    let largest = if largest.is_finite() { largest } else { f64::INFINITY };
    ClosedTerm {
        value: FRAC_PI_2 * y_n + sum,
        largest_correction: largest,
        cancellation: 4.0 * f64::EPSILON * (n as f64 + 1.0) * (largest + (FRAC_PI_2 * y_n).abs()),
    }
}
