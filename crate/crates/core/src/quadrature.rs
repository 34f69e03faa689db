//! Semi-infinite integrals with decaying oscillatory integrands.
//!
//! Finite part: Gauss–Legendre panels on [x, T], split at the zeros of J₀ and Y₀.
//! Tail: the Hankel expansion turns the integrand into
//! mean(t) + c(t)·cos(2t+φ) + s(t)·sin(2t+φ) with c, s, mean power series in 1/t,
//! which are integrated in closed form and by parts respectively.

use crate::bessel::{bessel_01, bessel_j_in, EvalPoint, Order, RegimeConfig};
use crate::error::{Error, Estimate, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::sync::{Mutex, OnceLock};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraturePlan {
    /// Finite/tail boundary T; chosen automatically when `None`.
    pub split_point: Option<f64>,
    /// Gauss–Legendre nodes per panel.
    pub panel_nodes: usize,
    pub zero_splitting: bool,
    /// Each panel is cut into this many equal pieces.
    pub subdivision: u32,
    /// Integration-by-parts terms kept in the tail.
    pub tail_order: u32,
    pub error_budget: f64,
}

impl Default for QuadraturePlan {
    fn default() -> Self {
        Self {
            split_point: None,
            panel_nodes: 32,
            zero_splitting: true,
            subdivision: 1,
            tail_order: 3,
            error_budget: 1e-11,
        }
    }
}

/// Smallest admissible split point.
pub const MIN_SPLIT: f64 = 40.0;
const MAX_SPLIT: f64 = 1e4;

impl QuadraturePlan {
    pub fn validate(&self) -> Result<()> {
        if !(4..=256).contains(&self.panel_nodes) {
            return Err(Error::InvalidConfig(format!(
                "panel_nodes {} not in 4..=256",
                self.panel_nodes
            )));
        }
        if !(1..=4).contains(&self.tail_order) {
            return Err(Error::InvalidConfig(format!(
                "tail_order {} not in 1..=4",
                self.tail_order
            )));
        }
        if !(1..=64).contains(&self.subdivision) {
            return Err(Error::InvalidConfig(format!(
                "subdivision {} not in 1..=64",
                self.subdivision
            )));
        }
        if !(self.error_budget > 0.0 && self.error_budget.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "error_budget {} must be positive",
                self.error_budget
            )));
        }
        if let Some(t) = self.split_point {
            if !(t >= MIN_SPLIT && t <= MAX_SPLIT) {
                return Err(Error::InvalidConfig(format!(
                    "split_point {t} not in [{MIN_SPLIT}, {MAX_SPLIT}]"
                )));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------- Gauss–Legendre

#[derive(Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre(n, z);
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let dp = legendre(n, z).1;
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut sum = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(mid + half * x);
        }
        sum * half
    }
}

/// (P_n(z), P_n'(z))
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    (p1, n as f64 * (z * p1 - p0) / (z * z - 1.0))
}

/// Shared rule with `n` nodes.
pub fn gauss_legendre(n: usize) -> &'static GaussLegendre {
    static CACHE: OnceLock<Mutex<Vec<&'static GaussLegendre>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
    let mut rules = cache.lock().unwrap_or_else(|e| e.into_inner());
    if let Some(rule) = rules.iter().find(|r| r.len() == n) {
        return rule;
    }
    let rule: &'static GaussLegendre = Box::leak(Box::new(GaussLegendre::new(n)));
    rules.push(rule);
    rule
}

/// Panel integral with interval halving; the error is |whole − halves| summed over leaves.
fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rule: &GaussLegendre, tol: f64, depth: u32) -> Estimate {
    let whole = rule.integrate(a, b, f);
    let mid = 0.5 * (a + b);
    let halves = rule.integrate(a, mid, f) + rule.integrate(mid, b, f);
    let err = (whole - halves).abs();
    if err <= tol.max(1e-15 * halves.abs()) || depth == 0 {
        return Estimate::new(halves, err);
    }
    let l = adaptive(f, a, mid, rule, 0.5 * tol, depth - 1);
    let r = adaptive(f, mid, b, rule, 0.5 * tol, depth - 1);
    Estimate::new(l.value + r.value, l.error + r.error)
}

// ---------------------------------------------------------------- zeros

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroFamily {
    J0,
    Y0,
}

/// Zeros of J₀ or Y₀ in the open interval (lo, hi), ascending.
pub fn bessel_zeros(family: ZeroFamily, lo: f64, hi: f64) -> Vec<f64> {
    let shift = match family {
        ZeroFamily::J0 => 0.25,
        ZeroFamily::Y0 => 0.75,
    };
    let mut out = Vec::new();
    // McMahon: z_k ≈ β + 1/(8β) − 31/(384β³), β = (k − shift)π
    let first = (((lo / PI) + shift).floor() as i64 - 1).max(1);
    for k in first.. {
        let beta = (k as f64 - shift) * PI;
        let mut z = beta + 1.0 / (8.0 * beta) - 31.0 / (384.0 * beta.powi(3));
        for _ in 0..50 {
            let Ok([j0, j1, y0, y1]) = bessel_01(EvalPoint::new(z).expect("positive")) else {
                break;
            };
            // (J₀)' = −J₁, (Y₀)' = −Y₁
            let dz = match family {
                ZeroFamily::J0 => j0 / j1,
                ZeroFamily::Y0 => y0 / y1,
            };
            z += dz;
            if dz.abs() < 4.0 * f64::EPSILON * z {
                break;
            }
        }
        if z >= hi {
            break;
        }
        if z > lo {
            out.push(z);
        }
    }
    out
}

/// Sign changes of J₀Y₀ in (lo, hi), ascending.
pub fn product_zeros(lo: f64, hi: f64) -> Vec<f64> {
    let mut z = bessel_zeros(ZeroFamily::J0, lo, hi);
    z.extend(bessel_zeros(ZeroFamily::Y0, lo, hi));
    z.sort_by(f64::total_cmp);
    z
}

/// Panel edges on [x, t_end].
pub fn panel_edges(x: f64, t_end: f64, plan: &QuadraturePlan) -> Vec<f64> {
    let mut edges = vec![x];
    // geometric grading towards a small lower limit
    let mut g = 2.0 * x;
    while g < 1.0_f64.min(t_end) {
        edges.push(g);
        g *= 2.0;
    }
    let from = *edges.last().unwrap_or(&x);
    if plan.zero_splitting {
        edges.extend(product_zeros(from, t_end));
    } else {
        let mut u = from + FRAC_PI_2;
        while u < t_end {
            edges.push(u);
            u += FRAC_PI_2;
        }
    }
    edges.push(t_end);
    edges.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * b.abs().max(1.0));
    if plan.subdivision > 1 {
        let k = plan.subdivision as usize;
        let mut fine = Vec::with_capacity(edges.len() * k);
        for w in edges.windows(2) {
            for i in 0..k {
                fine.push(w[0] + (w[1] - w[0]) * i as f64 / k as f64);
            }
        }
        fine.push(t_end);
        edges = fine;
    }
    edges
}

// ---------------------------------------------------------------- tails

/// Σ c_p t^{−p}
#[derive(Debug, Clone, PartialEq)]
struct InvSeries(Vec<f64>);

impl InvSeries {
    fn eval(&self, t: f64) -> f64 {
        let w = 1.0 / t;
        self.0.iter().rev().fold(0.0, |acc, c| acc * w + c)
    }

    fn mul(&self, other: &Self) -> Self {
        let mut out = vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        InvSeries(out)
    }

    fn add(&self, other: &Self, sign: f64) -> Self {
        let n = self.0.len().max(other.0.len());
        InvSeries(
            (0..n)
                .map(|i| self.0.get(i).unwrap_or(&0.0) + sign * other.0.get(i).unwrap_or(&0.0))
                .collect(),
        )
    }

    fn scale(&self, factor: f64, shift: usize) -> Self {
        let mut out = vec![0.0; shift];
        out.extend(self.0.iter().map(|c| c * factor));
        InvSeries(out)
    }

    fn derivative(&self) -> Self {
        let mut out = vec![0.0; self.0.len() + 1];
        for (p, c) in self.0.iter().enumerate() {
            out[p + 1] = -(p as f64) * c;
        }
        InvSeries(out)
    }

    /// ∫_t^∞ of the series; needs c₀ = c₁ = 0.
    fn integral_from(&self, t: f64) -> f64 {
        debug_assert!(self.0.iter().take(2).all(|c| *c == 0.0));
        self.0
            .iter()
            .enumerate()
            .skip(2)
            .map(|(p, c)| c * t.powi(1 - p as i32) / (p as f64 - 1.0))
            .sum()
    }
}

const HANKEL_TERMS: usize = 14;

/// Hankel P_ν and Q_ν as series in 1/t.
fn hankel_series(nu: f64) -> (InvSeries, InvSeries) {
    let mu = 4.0 * nu * nu;
    let mut p = vec![0.0; HANKEL_TERMS];
    let mut q = vec![0.0; HANKEL_TERMS];
    let mut a = 1.0;
    p[0] = 1.0;
    for k in 1..HANKEL_TERMS {
        let odd = (2 * k - 1) as f64;
        a *= (mu - odd * odd) / (8.0 * k as f64);
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p[k] = sign * a;
        } else {
            q[k] = sign * a;
        }
    }
    (InvSeries(p), InvSeries(q))
}

/// mean(t) + c(t)·cos(2t + φ) + s(t)·sin(2t + φ)
#[derive(Debug, Clone)]
struct Tail {
    mean: InvSeries,
    cos_amp: InvSeries,
    sin_amp: InvSeries,
    phase: f64,
}

impl Tail {
    /// J₀Y₀/t²
    fn j0y0_over_t2() -> Self {
        let (p, q) = hankel_series(0.0);
        let diff = p.mul(&p).add(&q.mul(&q), -1.0);
        let prod = p.mul(&q);
        Tail {
            mean: InvSeries(vec![0.0]),
            cos_amp: prod.scale(2.0 / PI, 3),
            sin_amp: diff.scale(1.0 / PI, 3),
            phase: -FRAC_PI_2,
        }
    }

    /// J_ν²/t
    fn jsq_over_t(nu: f64) -> Self {
        let (p, q) = hankel_series(nu);
        let pp = p.mul(&p);
        let qq = q.mul(&q);
        Tail {
            mean: pp.add(&qq, 1.0).scale(1.0 / PI, 2),
            cos_amp: pp.add(&qq, -1.0).scale(1.0 / PI, 2),
            sin_amp: p.mul(&q).scale(-2.0 / PI, 2),
            phase: -nu * PI - FRAC_PI_2,
        }
    }

    #[cfg(test)]
    fn eval(&self, t: f64) -> f64 {
        let (s, c) = (2.0 * t + self.phase).sin_cos();
        self.mean.eval(t) + self.cos_amp.eval(t) * c + self.sin_amp.eval(t) * s
    }

    /// ∫_t^∞ with `order` integration-by-parts terms; the error is twice the first omitted term.
    fn integrate(&self, t: f64, order: u32) -> Estimate {
        let mean = self.mean.integral_from(t);
        // c cos θ + s sin θ = Re[(c − i s) e^{iθ}]
        let mut re = self.cos_amp.clone();
        let mut im = self.sin_amp.scale(-1.0, 0);
        let e = Complex64::from_polar(1.0, 2.0 * t + self.phase);
        let i2 = Complex64::new(0.0, 2.0);
        let mut sum = Complex64::new(0.0, 0.0);
        let mut denom = i2;
        for k in 0..order {
            let g = Complex64::new(re.eval(t), im.eval(t));
            let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
            sum += sign * e * g / denom;
            re = re.derivative();
            im = im.derivative();
            denom *= i2;
        }
        let next = Complex64::new(re.eval(t), im.eval(t)).norm() / denom.norm();
        Estimate::new(mean + sum.re, 2.0 * next + 1e-16 * mean.abs())
    }

    fn remainder(&self, t: f64, order: u32) -> f64 {
        self.integrate(t, order).error
    }
}

/// Next zero of cos 2t at or above `t`.
fn round_to_cos_zero(t: f64) -> f64 {
    let k = ((t - FRAC_PI_4) / FRAC_PI_2).ceil().max(0.0);
    FRAC_PI_4 + k * FRAC_PI_2
}

/// Split point for an integral starting at x: the plan's T, or the first cos 2t zero
/// past max(x, 40) at which the tail estimate is below a quarter of the budget.
fn choose_split(x: f64, tail: &Tail, plan: &QuadraturePlan) -> Result<f64> {
    if let Some(t) = plan.split_point {
        if t < x {
            return Err(Error::InvalidConfig(format!("split_point {t} below x = {x}")));
        }
        return Ok(t);
    }
    let mut t = round_to_cos_zero(x.max(MIN_SPLIT));
    while tail.remainder(t, plan.tail_order) > 0.25 * plan.error_budget {
        t = round_to_cos_zero(t * 1.1);
        if t > MAX_SPLIT.max(2.0 * x) {
            let est = tail.integrate(t, plan.tail_order);
            return Err(Error::BudgetExceeded {
                value: est.value,
                estimate: est.error,
                budget: plan.error_budget,
            });
        }
    }
    Ok(t)
}

fn semi_infinite<F: Fn(f64) -> f64 + Sync>(
    x: f64,
    f: F,
    tail: &Tail,
    plan: &QuadraturePlan,
) -> Result<Estimate> {
    plan.validate()?;
    let t_split = choose_split(x, tail, plan)?;
    let tail_part = if t_split > x {
        tail.integrate(t_split, plan.tail_order)
    } else {
        tail.integrate(x, plan.tail_order)
    };
    let finite = if t_split > x {
        finite_part(&f, &panel_edges(x, t_split, plan), plan)
    } else {
        Estimate::new(0.0, 0.0)
    };
    let total = Estimate::new(
        finite.value + tail_part.value,
        finite.error + tail_part.error + 4.0 * f64::EPSILON * finite.value.abs(),
    );
    if !total.value.is_finite() {
        return Err(Error::Overflow("oscillatory integral"));
    }
    total.check(plan.error_budget)
}

fn finite_part<F: Fn(f64) -> f64 + Sync>(f: &F, edges: &[f64], plan: &QuadraturePlan) -> Estimate {
    let rule = gauss_legendre(plan.panel_nodes);
    let tol = 0.25 * plan.error_budget / edges.len().max(1) as f64;
    let parts: Vec<Estimate> = edges
        .par_windows(2)
        .map(|w| adaptive(f, w[0], w[1], rule, tol, 12))
        .collect();
    parts.iter().fold(Estimate::new(0.0, 0.0), |acc, p| {
        Estimate::new(acc.value + p.value, acc.error + p.error)
    })
}

fn j0y0_over_t2(t: f64) -> f64 {
    match bessel_01(EvalPoint::new(t).expect("positive")) {
        Ok([j0, _, y0, _]) => j0 * y0 / (t * t),
        Err(_) => f64::NAN,
    }
}

/// ∫_x^∞ J₀(t)Y₀(t)/t² dt.
pub fn integral_j0y0_tail(point: EvalPoint, plan: &QuadraturePlan) -> Result<Estimate> {
    let x = point.positive()?;
    semi_infinite(x, j0y0_over_t2, &Tail::j0y0_over_t2(), plan)
}

/// ∫_x^∞ J₀(t)²/t dt.
pub fn integral_j0sq_over_t(point: EvalPoint, plan: &QuadraturePlan) -> Result<Estimate> {
    integral_jsq_over_t(Order::integer(0), point, plan)
}

/// ∫_x^∞ J_ν(t)²/t dt.
pub fn integral_jsq_over_t(order: Order, point: EvalPoint, plan: &QuadraturePlan) -> Result<Estimate> {
    let x = point.positive()?;
    let nu = order.value();
    if nu > 10.0 {
        return Err(Error::domain("order", nu, "ν ≤ 10 for the tail expansion"));
    }
    let f = move |t: f64| {
        let j = if nu == 0.0 {
            bessel_01(EvalPoint::new(t).expect("positive")).map(|v| v[0])
        } else {
            bessel_j_in(RegimeConfig::default().select(nu, t), nu, t)
        };
        j.map_or(f64::NAN, |j| j * j / t)
    };
    let plan = if nu == 0.0 { *plan } else { QuadraturePlan { zero_splitting: false, ..*plan } };
    semi_infinite(x, f, &Tail::jsq_over_t(nu), &plan)
}

// ---------------------------------------------------------------- cumulative table

/// ∫_u^∞ J₀Y₀/t² dt for arbitrary u > 0 from one precomputed panel table.
#[derive(Debug, Clone)]
pub struct J0Y0TailTable {
    edges: Vec<f64>,
    /// cumulative[i] = ∫_{edges[i]}^∞
    cumulative: Vec<f64>,
    error: f64,
    tail: Tail,
}

const TABLE_TAIL_ORDER: u32 = 6;
const PARTIAL_NODES: usize = 24;

impl J0Y0TailTable {
    /// Table over [x0, T] with T chosen as in [`integral_j0y0_tail`].
    pub fn new(x0: f64, plan: &QuadraturePlan) -> Result<Self> {
        plan.validate()?;
        if !(x0 > 0.0) {
            return Err(Error::domain("x0", x0, "x0 > 0"));
        }
        let tail = Tail::j0y0_over_t2();
        let t_split = choose_split(x0, &tail, plan)?;
        let edges = panel_edges(x0, t_split, plan);
        let rule = gauss_legendre(plan.panel_nodes);
        let tol = 0.25 * plan.error_budget / edges.len() as f64;
        let pieces: Vec<Estimate> = edges
            .par_windows(2)
            .map(|w| adaptive(&j0y0_over_t2, w[0], w[1], rule, tol, 12))
            .collect();
        let end = tail.integrate(t_split, TABLE_TAIL_ORDER.max(plan.tail_order));
        let mut cumulative = vec![0.0; edges.len()];
        cumulative[edges.len() - 1] = end.value;
        let mut error = end.error;
        for i in (0..pieces.len()).rev() {
            cumulative[i] = cumulative[i + 1] + pieces[i].value;
            error += pieces[i].error;
        }
        Ok(Self { edges, cumulative, error, tail })
    }

    pub fn start(&self) -> f64 {
        self.edges[0]
    }

    pub fn end(&self) -> f64 {
        *self.edges.last().expect("non-empty")
    }

    /// Error bound of the tabulated values.
    pub fn error(&self) -> f64 {
        self.error
    }

    /// ∫_u^∞ J₀Y₀/t² dt for u ≥ start.
    pub fn eval(&self, u: f64) -> f64 {
        if u >= self.end() {
            return self.tail.integrate(u, TABLE_TAIL_ORDER).value;
        }
        let i = self.edges.partition_point(|&e| e <= u).saturating_sub(1);
        let right = self.edges[i + 1];
        let rule = gauss_legendre(PARTIAL_NODES);
        self.cumulative[i + 1] + rule.integrate(u, right, j0y0_over_t2)
    }
}

// ---------------------------------------------------------------- λ-integrals

/// Scalar kernel K(u) for [`lambda_kernel_integral`]. Kernels are assumed to
/// oscillate with period π in u (as cos 2u does) or to decay fast.
pub trait Kernel: Sync {
    fn eval(&self, u: f64) -> f64;

    /// δ with K(u) = O(u^−δ) as u → ∞.
    fn decay(&self) -> f64 {
        1.0
    }

    /// Bound on the absolute error of `eval(u)`.
    fn error(&self, _u: f64) -> f64 {
        0.0
    }
}

impl<F: Fn(f64) -> f64 + Sync> Kernel for F {
    fn eval(&self, u: f64) -> f64 {
        self(u)
    }
}

/// λ^numerator / (λ² + m²)^denominator
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaPowers {
    pub numerator: u32,
    pub denominator: f64,
}

impl Default for LambdaPowers {
    fn default() -> Self {
        Self {
            numerator: 1,
            denominator: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convergence {
    Absolute,
    /// Converges only through the oscillation of the kernel.
    Conditional,
}

/// Convergence class of ∫^∞ K(u)·u^n/(u²+a²)^d du.
pub fn lambda_convergence<K: Kernel + ?Sized>(kernel: &K, powers: LambdaPowers) -> Result<Convergence> {
    let exponent = powers.numerator as f64 - 2.0 * powers.denominator - kernel.decay();
    if exponent >= 0.0 {
        Err(Error::Divergent { exponent })
    } else if exponent >= -1.0 {
        Ok(Convergence::Conditional)
    } else {
        Ok(Convergence::Absolute)
    }
}

const HALF_PERIODS: usize = 160;
const AVERAGING_LEVELS: usize = 12;

/// ∫₀^∞ K(λr)·λ^n/(λ²+m²)^d dλ.
///
/// Computed in u = λr on geometric panels near 0 and half-period panels
/// [π/4 + kπ/2, π/4 + (k+1)π/2] beyond; the partial sums at the half-period
/// edges are averaged repeatedly, which pairs neighbouring half-periods.
pub fn lambda_kernel_integral<K: Kernel + ?Sized>(
    r: f64,
    m: f64,
    kernel: &K,
    powers: LambdaPowers,
    plan: &QuadraturePlan,
) -> Result<Estimate> {
    plan.validate()?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::domain("r", r, "r > 0"));
    }
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::domain("m", m, "m > 0"));
    }
    if !(powers.denominator > 0.0) {
        return Err(Error::domain("power", powers.denominator, "power > 0"));
    }
    lambda_convergence(kernel, powers)?;
    let a = m * r;
    let n = powers.numerator as i32;
    let d = powers.denominator;
    let a2 = a * a;
    let weight = |u: f64| u.powi(n) / (u * u + a2).powf(d);
    let f = |u: f64| kernel.eval(u) * weight(u);
    let propagated = |u: f64| kernel.error(u) * weight(u);

    let mut edges = vec![0.0];
    let mut g = a.min(1.0) * 2f64.powi(-14);
    while g < FRAC_PI_4 {
        edges.push(g);
        g *= 2.0;
    }
    let first_half = edges.len();
    let u_end = 80.0f64.max(10.0 * a);
    let periods = (((u_end - FRAC_PI_4) / FRAC_PI_2).ceil() as usize).max(HALF_PERIODS);
    for k in 0..=periods {
        edges.push(FRAC_PI_4 + k as f64 * FRAC_PI_2);
    }

    let rule = gauss_legendre(plan.panel_nodes);
    let coarse = gauss_legendre(plan.panel_nodes / 2);
    let pieces: Vec<(f64, f64)> = edges
        .par_windows(2)
        .map(|w| {
            let fine = rule.integrate(w[0], w[1], f);
            let kernel_error = coarse.integrate(w[0], w[1], propagated);
            (fine, (fine - coarse.integrate(w[0], w[1], f)).abs() + kernel_error)
        })
        .collect();
    if pieces.iter().any(|p| !p.0.is_finite()) {
        return Err(Error::Overflow("λ-integrand"));
    }
    let panel_error: f64 = pieces.iter().map(|p| p.1).sum();
    let mut partial = Vec::with_capacity(periods + 1);
    let mut acc = 0.0;
    for (i, p) in pieces.iter().enumerate() {
        acc += p.0;
        if i + 1 >= first_half {
            partial.push(acc);
        }
    }
    let last = partial.len() - 1;
    let v = averaged(&partial[last - AVERAGING_LEVELS..=last]);
    let w = averaged(&partial[last - 1 - AVERAGING_LEVELS..last]);
    let scale = r.powf(2.0 * d - n as f64 - 1.0);
    let error = scale * ((v - w).abs() + panel_error + 1e-15 * v.abs());
    Estimate::new(scale * v, error).check(plan.error_budget)
}

/// Repeated pairwise averaging of a sequence of partial sums.
fn averaged(s: &[f64]) -> f64 {
    let mut level = s.to_vec();
    while level.len() > 1 {
        level = level.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    }
    level[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p(x: f64) -> EvalPoint {
        EvalPoint::new(x).unwrap()
    }

    #[test]
    fn gauss_legendre_exactness() {
        for n in [4usize, 16, 32, 64] {
            let rule = gauss_legendre(n);
            let w: f64 = rule.weights.iter().sum();
            assert_abs_diff_eq!(w, 2.0, epsilon = 1e-14);
            let deg = 2 * n - 1;
            let v = rule.integrate(0.0, 1.0, |t| t.powi(deg as i32));
            assert_abs_diff_eq!(v, 1.0 / (deg as f64 + 1.0), epsilon = 1e-14);
        }
    }

    #[test]
    fn zeros_are_zeros() {
        let js = bessel_zeros(ZeroFamily::J0, 0.0, 20.0);
        assert_eq!(js.len(), 6);
        assert_abs_diff_eq!(js[0], 2.404_825_557_695_773, epsilon = 1e-13);
        let ys = bessel_zeros(ZeroFamily::Y0, 0.0, 20.0);
        assert_abs_diff_eq!(ys[0], 0.893_576_966_279_167_5, epsilon = 1e-13);
        for z in product_zeros(0.5, 60.0) {
            let [j0, _, y0, _] = bessel_01(p(z)).unwrap();
            assert!((j0 * y0).abs() < 1e-14, "{z}");
        }
    }

    #[test]
    fn panels_have_at_most_one_sign_change() {
        let plan = QuadraturePlan::default();
        let edges = panel_edges(0.3, 60.0, &plan);
        for w in edges.windows(2) {
            let mut changes = 0;
            let mut prev = j0y0_over_t2(w[0] + 1e-9 * (w[1] - w[0]));
            for k in 1..200 {
                let v = j0y0_over_t2(w[0] + (w[1] - w[0]) * k as f64 / 200.0);
                if v * prev < 0.0 {
                    changes += 1;
                }
                prev = v;
            }
            assert!(changes <= 1, "panel {w:?}");
        }
    }

    #[test]
    fn tail_series_matches_functions() {
        let t = Tail::j0y0_over_t2();
        let s = Tail::jsq_over_t(0.0);
        let s2 = Tail::jsq_over_t(2.0);
        for &x in &[40.0, 55.5, 90.0] {
            let [j0, _, y0, _] = bessel_01(p(x)).unwrap();
            assert_abs_diff_eq!(t.eval(x), j0 * y0 / (x * x), epsilon = 1e-17);
            assert_abs_diff_eq!(s.eval(x), j0 * j0 / x, epsilon = 1e-16);
            let j2 = crate::bessel::bessel_j(Order::integer(2), p(x)).unwrap();
            assert_abs_diff_eq!(s2.eval(x), j2 * j2 / x, epsilon = 1e-16);
        }
    }

    #[test]
    fn tail_dominance_at_split() {
        let t = round_to_cos_zero(40.0);
        let [j0, _, y0, _] = bessel_01(p(t)).unwrap();
        assert!((PI * j0 * y0 * t + (2.0 * t).cos()).abs() <= 0.02);
    }

    #[test]
    fn j0y0_tail_small_beyond_forty() {
        let v = integral_j0y0_tail(p(40.0), &QuadraturePlan::default()).unwrap();
        assert!(v.value.abs() <= 1e-4);
        assert!(v.error <= 1e-11);
    }

    #[test]
    fn refinement_is_stable() {
        let base = QuadraturePlan::default();
        let a = integral_j0y0_tail(p(2.0), &base).unwrap().value;
        let b = integral_j0y0_tail(p(2.0), &QuadraturePlan { subdivision: 2, ..base }).unwrap().value;
        assert!((a - b).abs() < 1e-12);
        let c = integral_j0y0_tail(p(2.0), &QuadraturePlan { panel_nodes: 64, tail_order: 4, ..base })
            .unwrap()
            .value;
        assert!((a - c).abs() < 10.0 * base.error_budget);
        let d = integral_j0y0_tail(p(2.0), &QuadraturePlan { zero_splitting: false, ..base })
            .unwrap()
            .value;
        assert!((a - d).abs() < 10.0 * base.error_budget);
    }

    #[test]
    fn j0sq_derivative_and_size() {
        let plan = QuadraturePlan::default();
        for &x in &[1.0, 5.0] {
            let h = 1e-4;
            let up = integral_j0sq_over_t(p(x + h), &plan).unwrap().value;
            let dn = integral_j0sq_over_t(p(x - h), &plan).unwrap().value;
            let j0 = bessel_01(p(x)).unwrap()[0];
            assert_abs_diff_eq!((up - dn) / (2.0 * h), -j0 * j0 / x, epsilon = 1e-7);
        }
        let v = integral_j0sq_over_t(p(200.0), &plan).unwrap().value;
        // mean of J₀² is 1/(πt), so the integral is ≈ 1/(πx)
        let scaled = v * PI * 200.0;
        assert!((0.8..=1.2).contains(&scaled), "{scaled}");
    }

    #[test]
    fn explicit_split_point_and_budget() {
        let plan = QuadraturePlan {
            split_point: Some(40.0),
            tail_order: 1,
            ..Default::default()
        };
        assert!(matches!(
            integral_j0y0_tail(p(1.0), &plan),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(QuadraturePlan { tail_order: 5, ..Default::default() }.validate().is_err());
        assert!(QuadraturePlan { split_point: Some(10.0), ..Default::default() }.validate().is_err());
    }

    #[test]
    fn table_matches_direct() {
        let plan = QuadraturePlan::default();
        let table = J0Y0TailTable::new(0.5, &plan).unwrap();
        for &u in &[0.5, 0.77, 3.0, 17.2, table.end() - 0.1, table.end() + 3.0, 150.0] {
            let direct = integral_j0y0_tail(p(u), &plan).unwrap().value;
            assert_abs_diff_eq!(table.eval(u), direct, epsilon = 2e-13);
        }
    }

    #[test]
    fn lambda_zero_kernel_and_divergence() {
        let plan = QuadraturePlan::default();
        let zero = |_u: f64| 0.0;
        let v = lambda_kernel_integral(1.0, 1.0, &zero, LambdaPowers::default(), &plan).unwrap();
        assert_eq!(v.value, 0.0);
        let powers = LambdaPowers { numerator: 3, denominator: 1.0 };
        assert!(matches!(
            lambda_kernel_integral(1.0, 1.0, &zero, powers, &plan),
            Err(Error::Divergent { .. })
        ));
        assert!(lambda_kernel_integral(0.0, 1.0, &zero, LambdaPowers::default(), &plan).is_err());
    }

    #[test]
    fn lambda_known_integral() {
        // ∫₀^∞ sin(bλ)·λ/(λ²+m²) dλ = (π/2)e^{−bm}
        struct Sine;
        impl Kernel for Sine {
            fn eval(&self, u: f64) -> f64 {
                (2.0 * u).sin() / u
            }
        }
        let plan = QuadraturePlan::default();
        for &(r, m) in &[(1.0, 1.0), (2.0, 0.5), (0.5, 3.0)] {
            // K(λr)·λ²/(λ²+m²) with K(u) = sin 2u / u  →  (1/r)·(π/2)e^{−2rm}
            let v = lambda_kernel_integral(r, m, &Sine, LambdaPowers { numerator: 2, denominator: 1.0 }, &plan)
                .unwrap();
            let expected = 0.5 * PI * (-2.0 * r * m).exp() / r;
            assert_abs_diff_eq!(v.value, expected, epsilon = 1e-9);
            assert!(v.error < 1e-9);
        }
    }
}
