//! Double-precision Bessel functions J_ν (real ν ≥ 0), Y_n (integer n), K₀ and K₁.
//!
//! Three regimes tile the positive axis:
//!
//! * power series for x below [`RegimeConfig::series_cutoff`];
//! * Miller backward recurrence, normalised with
//!   (x/2)^μ = Σ_k (μ+2k) Γ(μ+k)/k! · J_{μ+2k}(x), in the middle;
//! * the Hankel asymptotic expansion (with its full P/Q correction series) once
//!   x exceeds both [`RegimeConfig::asymptotic_cutoff`] and 2ν².
//!
//! Y₀ and Y₁ come from the Neumann series in even/odd J's (or from the Hankel
//! expansion), and higher integer orders from forward recurrence, which is
//! stable for the dominant solution.

use crate::error::{Error, Result};
use crate::gamma::{gamma, ln_gamma};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Positive real argument at which the kernels are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EvalPoint(f64);

impl EvalPoint {
    /// Accepts any finite x ≥ 0; functions that need x > 0 check for themselves.
    pub fn new(x: f64) -> Result<Self> {
        if x.is_finite() && x >= 0.0 {
            Ok(Self(x))
        } else {
            Err(Error::domain("x", x, "finite and x >= 0"))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub(crate) fn positive(self) -> Result<f64> {
        if self.0 > 0.0 {
            Ok(self.0)
        } else {
            Err(Error::domain("x", self.0, "x > 0"))
        }
    }
}

/// Bessel order ν ≥ 0.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Order(f64);

impl Order {
    pub fn new(nu: f64) -> Result<Self> {
        if nu.is_finite() && nu >= 0.0 {
            Ok(Self(nu))
        } else {
            Err(Error::domain("order", nu, "finite and nu >= 0"))
        }
    }

    pub fn integer(n: u32) -> Self {
        Self(n as f64)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_integer(self) -> bool {
        self.0.fract() == 0.0
    }

    pub fn as_integer(self) -> Option<u32> {
        (self.is_integer() && self.0 <= u32::MAX as f64).then_some(self.0 as u32)
    }
}

/// Which representation evaluates a Bessel function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Series,
    Recurrence,
    Asymptotic,
}

/// Argument thresholds that select the evaluation regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeConfig {
    /// Power series below this argument.
    pub series_cutoff: f64,
    /// Hankel expansion above max(asymptotic_cutoff, 2ν²).
    pub asymptotic_cutoff: f64,
}

impl Default for RegimeConfig {
    fn default() -> Self {
        Self {
            series_cutoff: 2.0,
            asymptotic_cutoff: 30.0,
        }
    }
}

impl RegimeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.series_cutoff > 0.0 && self.series_cutoff < self.asymptotic_cutoff) {
            return Err(Error::InvalidConfig(format!(
                "series_cutoff {} must be positive and below asymptotic_cutoff {}",
                self.series_cutoff, self.asymptotic_cutoff
            )));
        }
        Ok(())
    }

    /// Regime used for J_ν(x).
    pub fn select(&self, nu: f64, x: f64) -> Regime {
        if x < self.series_cutoff {
            Regime::Series
        } else if x > self.asymptotic_cutoff.max(2.0 * nu * nu) {
            Regime::Asymptotic
        } else {
            Regime::Recurrence
        }
    }
}

/// J_ν(x) with the default regime boundaries.
pub fn bessel_j(order: Order, point: EvalPoint) -> Result<f64> {
    bessel_j_with(order, point, &RegimeConfig::default())
}

pub fn bessel_j_with(order: Order, point: EvalPoint, config: &RegimeConfig) -> Result<f64> {
    let (nu, x) = (order.value(), point.value());
    bessel_j_in(config.select(nu, x), nu, x)
}

/// J_ν(x) evaluated in an explicitly chosen regime.
///
/// Used for cross-checking regimes in their overlap and by the ν-derivative
/// stencils, which must not straddle a regime boundary.
pub fn bessel_j_in(regime: Regime, nu: f64, x: f64) -> Result<f64> {
    Order::new(nu)?;
    EvalPoint::new(x)?;
    if x == 0.0 {
        return Ok(if nu == 0.0 { 1.0 } else { 0.0 });
    }
    let value = match regime {
        Regime::Series => j_series(nu, x),
        Regime::Recurrence => j_miller(nu, x, 1)?[0],
        Regime::Asymptotic => hankel(nu, x).0,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Overflow("J_nu"))
    }
}

/// J_{ν₀+k}(x) for k = 0..count, from a single recurrence pass when possible.
pub fn bessel_j_sequence(nu0: f64, x: f64, count: usize) -> Result<Vec<f64>> {
    Order::new(nu0)?;
    EvalPoint::new(x)?;
    if count == 0 {
        return Ok(Vec::new());
    }
    if x == 0.0 {
        return Ok((0..count)
            .map(|k| if nu0 == 0.0 && k == 0 { 1.0 } else { 0.0 })
            .collect());
    }
    let config = RegimeConfig::default();
    let top = nu0 + (count - 1) as f64;
    match config.select(top, x) {
        Regime::Series => Ok((0..count).map(|k| j_series(nu0 + k as f64, x)).collect()),
        Regime::Asymptotic => Ok((0..count).map(|k| hankel(nu0 + k as f64, x).0).collect()),
        Regime::Recurrence => j_miller(nu0, x, count),
    }
}

/// Y_n(x) for integer n and x > 0.
pub fn bessel_y(n: u32, point: EvalPoint) -> Result<f64> {
    let x = point.positive()?;
    let config = RegimeConfig::default();
    if config.select(n as f64, x) == Regime::Asymptotic {
        return Ok(hankel(n as f64, x).1);
    }
    let (y0, y1) = y01(x)?;
    let value = forward_y(n, x, y0, y1);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Overflow("Y_n"))
    }
}

/// (J₀, J₁, Y₀, Y₁) at x > 0 from one shared evaluation.
pub fn bessel_01(point: EvalPoint) -> Result<[f64; 4]> {
    let x = point.positive()?;
    if x > RegimeConfig::default().asymptotic_cutoff {
        let (j0, y0) = hankel(0.0, x);
        let (j1, y1) = hankel(1.0, x);
        return Ok([j0, j1, y0, y1]);
    }
    let seq = neumann_sequence(x)?;
    let (y0, y1) = neumann_y01(x, &seq);
    Ok([seq[0], seq[1], y0, y1])
}

/// K₀(x) for x > 0.
pub fn bessel_k0(point: EvalPoint) -> Result<f64> {
    let x = point.positive()?;
    Ok(if x <= 2.0 { k_series(x).0 } else { k_integral(0.0, x) })
}

/// K₁(x) for x > 0.
pub fn bessel_k1(point: EvalPoint) -> Result<f64> {
    let x = point.positive()?;
    Ok(if x <= 2.0 { k_series(x).1 } else { k_integral(1.0, x) })
}

/// K₀ and K₁ from a chosen representation; `series = false` uses the
/// trapezoidal rule on ∫₀^∞ e^{−x cosh t} cosh(νt) dt.
pub fn bessel_k_in(series: bool, x: f64) -> (f64, f64) {
    if series {
        k_series(x)
    } else {
        (k_integral(0.0, x), k_integral(1.0, x))
    }
}

fn j_series(nu: f64, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = -half * half;
    let lead = if nu == 0.0 {
        1.0
    } else if nu < 150.0 {
        half.powf(nu) / gamma(nu + 1.0)
    } else {
        (nu * half.ln() - ln_gamma(nu + 1.0)).exp()
    };
    if lead == 0.0 {
        return 0.0;
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..500 {
        let kf = k as f64;
        let denom = kf * (nu + kf);
        term *= q / denom;
        sum += term;
        if denom > q.abs() && term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    lead * sum
}

/// Miller recurrence start index for orders up to `top` at argument x.
fn miller_start(top: f64, x: f64) -> usize {
    let spread = x.max(1.0).cbrt();
    (top.max(x) + 12.0 * spread + 20.0).ceil() as usize
}

/// J_{ν₀+k}(x), k = 0..count, by backward recurrence from well above the turning point.
fn j_miller(nu0: f64, x: f64, count: usize) -> Result<Vec<f64>> {
    let mu = nu0.fract();
    let first = nu0.trunc() as usize;
    let last = first + count - 1;
    let start = miller_start(last as f64 + mu, x).max(last + 2);

    // Normalisation weights: w_0 = Γ(μ+1), w_k = (μ+2k) Γ(μ+k)/k!.
    let half_count = start / 2 + 1;
    let mut weights = Vec::with_capacity(half_count);
    let g = gamma(mu + 1.0);
    weights.push(g);
    let mut ratio = g; // Γ(μ+k)/k! at k = 1
    for k in 1..half_count {
        let kf = k as f64;
        weights.push((mu + 2.0 * kf) * ratio);
        ratio *= (mu + kf) / (kf + 1.0);
    }

    const BIG: f64 = 1e200;
    let mut out = vec![0.0; count];
    let mut next = 0.0; // f_{k+1}
    let mut cur = 1e-30; // f_k
    let mut norm = 0.0;
    let mut k = start;
    loop {
        if (first..=last).contains(&k) {
            out[k - first] = cur;
        }
        if k % 2 == 0 {
            norm += weights[k / 2] * cur;
        }
        if k == 0 {
            break;
        }
        let prev = 2.0 * (mu + k as f64) / x * cur - next;
        next = cur;
        cur = prev;
        k -= 1;
        if cur.abs() > BIG {
            let s = 1.0 / BIG;
            cur *= s;
            next *= s;
            norm *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }
    let scale = (0.5 * x).powf(mu) / norm;
    if !scale.is_finite() {
        return Err(Error::Overflow("Miller normalisation"));
    }
    Ok(out.into_iter().map(|v| v * scale).collect())
}

/// Hankel asymptotic expansion: returns (J_ν(x), Y_ν(x)).
pub(crate) fn hankel(nu: f64, x: f64) -> (f64, f64) {
    let (p, q) = hankel_pq(nu, x);
    let phase = (0.5 * nu + 0.25) * PI;
    // cos/sin(x − φ) via the addition formulas keeps libm's reduction of x
    let (sx, cx) = x.sin_cos();
    let (sp, cp) = phase.sin_cos();
    let cos_chi = cx * cp + sx * sp;
    let sin_chi = sx * cp - cx * sp;
    let amp = (2.0 / (PI * x)).sqrt();
    (
        amp * (p * cos_chi - q * sin_chi),
        amp * (p * sin_chi + q * cos_chi),
    )
}

/// The P and Q correction series of the Hankel expansion.
pub(crate) fn hankel_pq(nu: f64, x: f64) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        let next = term * (mu - odd * odd) / (k as f64 * 8.0 * x);
        if next.abs() >= last && next.abs() > 0.0 {
            break; // smallest term passed
        }
        last = next.abs();
        term = next;
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    (p, q)
}

/// J₀..J_K at x, long enough for the Neumann series of Y₀, Y₁.
fn neumann_sequence(x: f64) -> Result<Vec<f64>> {
    let count = miller_start(0.0, x);
    if x < RegimeConfig::default().series_cutoff {
        Ok((0..count).map(|k| j_series(k as f64, x)).collect())
    } else {
        j_miller(0.0, x, count)
    }
}

/// Y₀, Y₁ from the Neumann series
///   (π/2) Y₀ = (ln(x/2) + γ) J₀ − 2 Σ (−1)^k J_{2k}/k,
///   (π/2) Y₁ = −J₀/x + (ln(x/2) + γ − 1) J₁ − Σ (−1)^k (2k+1) J_{2k+1}/(k(k+1)).
fn neumann_y01(x: f64, j: &[f64]) -> (f64, f64) {
    let log_term = (0.5 * x).ln() + EULER_GAMMA;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut k = 1;
    while 2 * k + 1 < j.len() {
        let kf = k as f64;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s0 += sign * j[2 * k] / kf;
        s1 += sign * (2.0 * kf + 1.0) * j[2 * k + 1] / (kf * (kf + 1.0));
        k += 1;
    }
    let y0 = (log_term * j[0] - 2.0 * s0) / FRAC_PI_2;
    let y1 = (-j[0] / x + (log_term - 1.0) * j[1] - s1) / FRAC_PI_2;
    (y0, y1)
}

fn y01(x: f64) -> Result<(f64, f64)> {
    let [_, _, y0, y1] = bessel_01(EvalPoint(x))?;
    Ok((y0, y1))
}

fn forward_y(n: u32, x: f64, y0: f64, y1: f64) -> f64 {
    match n {
        0 => y0,
        1 => y1,
        _ => {
            let (mut a, mut b) = (y0, y1);
            for k in 1..n {
                let c = 2.0 * k as f64 / x * b - a;
                a = b;
                b = c;
            }
            b
        }
    }
}

/// Y_k(x) for k = 0..count by forward recurrence.
pub(crate) fn bessel_y_sequence(x: f64, count: usize) -> Result<Vec<f64>> {
    let (y0, y1) = if RegimeConfig::default().select(1.0, x) == Regime::Asymptotic {
        (hankel(0.0, x).1, hankel(1.0, x).1)
    } else {
        y01(x)?
    };
    let mut out = Vec::with_capacity(count);
    let (mut a, mut b) = (y0, y1);
    for k in 0..count {
        out.push(a);
        let c = 2.0 * (k + 1) as f64 / x * b - a;
        a = b;
        b = c;
    }
    Ok(out)
}

/// Small-argument series for (K₀, K₁).
fn k_series(x: f64) -> (f64, f64) {
    let q = 0.25 * x * x;
    let log_term = (0.5 * x).ln();
    // k-th terms: t_k = q^k/(k!)², u_k = q^k/(k!(k+1)!)
    let mut t = 1.0;
    let mut u = 1.0;
    let mut i0 = 1.0;
    let mut k0_sum = 0.0;
    let mut i1 = 1.0;
    let mut psi_sum = 2.0 * (-EULER_GAMMA) + 1.0; // ψ(1) + ψ(2)
    let mut harmonic = 0.0;
    for k in 1..60 {
        let kf = k as f64;
        t *= q / (kf * kf);
        u *= q / (kf * (kf + 1.0));
        harmonic += 1.0 / kf;
        i0 += t;
        k0_sum += harmonic * t;
        i1 += u;
        // ψ(k+1) + ψ(k+2) = 2(H_k − γ) + 1/(k+1)
        psi_sum += u * (2.0 * (harmonic - EULER_GAMMA) + 1.0 / (kf + 1.0));
        if t < 1e-18 * i0 {
            break;
        }
    }
    let k0 = -(log_term + EULER_GAMMA) * i0 + k0_sum;
    let i1 = 0.5 * x * i1;
    let k1 = 1.0 / x + log_term * i1 - 0.25 * x * psi_sum;
    (k0, k1)
}

/// K_ν(x) = ∫₀^∞ e^{−x cosh t} cosh(νt) dt by the trapezoidal rule, which
/// converges geometrically for this entire, double-exponentially decaying integrand.
fn k_integral(nu: f64, x: f64) -> f64 {
    const H: f64 = 0.125;
    let mut sum = 0.5;
    let mut k = 1;
    loop {
        let t = k as f64 * H;
        let v = (-x * (t.cosh() - 1.0)).exp() * (nu * t).cosh();
        sum += v;
        if v < 1e-18 * sum {
            break;
        }
        k += 1;
    }
    H * sum * (-x).exp()
}

/// Leading large-x forms √(2/(πx)) cos / sin (x − nπ/2 − π/4).
pub fn leading_asymptotic(n: f64, x: f64) -> (f64, f64) {
    let amp = (2.0 / (PI * x)).sqrt();
    let chi = x - n * FRAC_PI_2 - FRAC_PI_4;
    (amp * chi.cos(), amp * chi.sin())
}
