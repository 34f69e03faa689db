//! Closed forms built on the J₀Y₀ tail integral T(x) = ∫_x^∞ J₀Y₀/t² dt:
//!
//!   P(x) = −(2 + πJ₀Y₀ − πx·T(x)) / 8,      Q(x) = −4P(x) − 1 = (π/2)(J₀Y₀ − x·T(x)),
//!
//! and the Green's-function combination
//!
//!   C(mr) = (√π·mr·G³⁰₁₃(m²r²) − 4K₀(mr)²) / (16π) = (1/2π) ∫₀^∞ Q(λr)·λ/(λ²+m²) dλ.

use crate::bessel::{bessel_01, bessel_k0, EvalPoint};
use crate::error::{Error, Estimate, Result};
use crate::meijer::{g20, g30, Normalization};
use crate::quadrature::{
    gauss_legendre, integral_j0y0_tail, lambda_kernel_integral, J0Y0TailTable, Kernel, LambdaPowers,
    QuadraturePlan,
};
use crate::series::{p_direct, SeriesTruncation};
use rayon::prelude::*;
use std::f64::consts::PI;
use std::sync::OnceLock;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSwitch {
    /// Below this argument P is summed directly.
    pub x_switch: f64,
}

impl Default for KernelSwitch {
    fn default() -> Self {
        Self { x_switch: 0.5 }
    }
}

impl KernelSwitch {
    pub fn validate(&self) -> Result<()> {
        if !(0.05..=2.0).contains(&self.x_switch) {
            return Err(Error::InvalidConfig(format!(
                "x_switch {} not in [0.05, 2]",
                self.x_switch
            )));
        }
        Ok(())
    }
}

/// Q is returned as its limit −1 below this argument.
pub const Q_ORIGIN: f64 = 1e-6;

/// Smallest m·r accepted by [`greens_combination`].
pub const MIN_MR: f64 = 1e-6;

fn j0y0(x: f64) -> Result<f64> {
    let [j0, _, y0, _] = bessel_01(EvalPoint::new(x)?)?;
    Ok(j0 * y0)
}

/// Closed form of P regardless of the switch.
pub fn p_closed_branch(point: EvalPoint, plan: &QuadraturePlan) -> Result<Estimate> {
    let x = point.positive()?;
    let tail = integral_j0y0_tail(point, plan)?;
    let v = -(2.0 + PI * j0y0(x)? - PI * x * tail.value) / 8.0;
    Ok(Estimate::new(v, PI * x * tail.error / 8.0 + 2.0 * f64::EPSILON))
}

/// P(x) with the default switch, plan and truncation.
pub fn p_closed(point: EvalPoint) -> Result<Estimate> {
    p_closed_with(
        point,
        &KernelSwitch::default(),
        &QuadraturePlan::default(),
        &SeriesTruncation::default(),
    )
}

pub fn p_closed_with(
    point: EvalPoint,
    switch: &KernelSwitch,
    plan: &QuadraturePlan,
    trunc: &SeriesTruncation,
) -> Result<Estimate> {
    switch.validate()?;
    let x = point.positive()?;
    if x < switch.x_switch {
        p_direct(point, trunc)
    } else {
        p_closed_branch(point, plan)
    }
}

/// P(x) with the tail integral written as a multiple of G²⁰₁₃(x²).
pub fn p_via_meijer(x: f64, normalization: Normalization) -> Result<f64> {
    let point = EvalPoint::new(x)?;
    point.positive()?;
    let tail = normalization.factor() * g20(x * x)?;
    Ok(-(2.0 + PI * j0y0(x)? - PI * x * tail) / 8.0)
}

/// Q(x) = −4P(x) − 1.
pub fn q(point: EvalPoint) -> Result<Estimate> {
    q_with(
        point,
        &KernelSwitch::default(),
        &QuadraturePlan::default(),
        &SeriesTruncation::default(),
    )
}

pub fn q_with(
    point: EvalPoint,
    switch: &KernelSwitch,
    plan: &QuadraturePlan,
    trunc: &SeriesTruncation,
) -> Result<Estimate> {
    if point.value() < Q_ORIGIN {
        point.positive()?;
        return Ok(Estimate::new(-1.0, Q_ORIGIN));
    }
    let p = p_closed_with(point, switch, plan, trunc)?;
    Ok(Estimate::new(-4.0 * p.value - 1.0, 4.0 * p.error))
}

/// Q(x) = (π/2)(J₀Y₀ − x·T(x)), without the switch.
pub fn q_closed_route(point: EvalPoint, plan: &QuadraturePlan) -> Result<Estimate> {
    let x = point.positive()?;
    let tail = integral_j0y0_tail(point, plan)?;
    Ok(Estimate::new(
        0.5 * PI * (j0y0(x)? - x * tail.value),
        0.5 * PI * x * tail.error + 2.0 * f64::EPSILON,
    ))
}

/// −cos(2x)/x, the asymptote as usually quoted. It is twice the actual leading
/// term, see [`q_leading`].
pub fn q_asymptotic(point: EvalPoint) -> f64 {
    let x = point.value();
    -(2.0 * x).cos() / x
}

/// −cos(2x)/(2x): πJ₀Y₀ ~ −cos(2x)/x enters Q with a factor ½, and x·T(x) is O(x⁻²).
pub fn q_leading(point: EvalPoint) -> f64 {
    0.5 * q_asymptotic(point)
}

/// Q as a λ-integral kernel: direct sum below the switch, a tabulated T(u) above.
#[derive(Debug, Clone)]
pub struct QKernel {
    switch: KernelSwitch,
    trunc: SeriesTruncation,
    table: J0Y0TailTable,
}

impl QKernel {
    pub fn new(switch: &KernelSwitch, plan: &QuadraturePlan) -> Result<Self> {
        switch.validate()?;
        Ok(Self {
            switch: *switch,
            trunc: SeriesTruncation::default(),
            table: J0Y0TailTable::new(switch.x_switch, plan)?,
        })
    }

    /// Kernel with the default switch and plan, built once.
    pub fn shared() -> Result<&'static QKernel> {
        static KERNEL: OnceLock<std::result::Result<QKernel, Error>> = OnceLock::new();
        KERNEL
            .get_or_init(|| QKernel::new(&KernelSwitch::default(), &QuadraturePlan::default()))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn value(&self, u: f64) -> Result<f64> {
        if u < Q_ORIGIN {
            return Ok(-1.0);
        }
        if u < self.switch.x_switch {
            let p = p_direct(EvalPoint::new(u)?, &self.trunc)?;
            return Ok(-4.0 * p.value - 1.0);
        }
        Ok(0.5 * PI * (j0y0(u)? - u * self.table.eval(u)))
    }
}

impl Kernel for QKernel {
    fn eval(&self, u: f64) -> f64 {
        self.value(u).unwrap_or(f64::NAN)
    }

    fn error(&self, u: f64) -> f64 {
        if u < Q_ORIGIN {
            return Q_ORIGIN;
        }
        if u < self.switch.x_switch {
            return EvalPoint::new(u)
                .and_then(|p| p_direct(p, &self.trunc))
                .map_or(f64::INFINITY, |p| 4.0 * p.error);
        }
        0.5 * PI * (u * self.table.error() + 4.0 * f64::EPSILON)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GreenParams {
    pub r: f64,
    pub m: f64,
}

impl GreenParams {
    pub fn new(r: f64, m: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::domain("r", r, "r > 0"));
        }
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::domain("m", m, "m > 0"));
        }
        Ok(Self { r, m })
    }

    pub fn mr(&self) -> f64 {
        self.m * self.r
    }
}

fn combination_parts(a: f64) -> Result<(f64, f64)> {
    let k0 = bessel_k0(EvalPoint::new(a)?)?;
    Ok((PI.sqrt() * a * g30(a * a)? / (16.0 * PI), 4.0 * k0 * k0 / (16.0 * PI)))
}

fn combination(a: f64) -> Result<f64> {
    let (g, k) = combination_parts(a)?;
    Ok(g - k)
}

/// (√π·mr·G³⁰₁₃(m²r²) − 4K₀(mr)²) / (16π)
pub fn greens_combination(params: GreenParams) -> Result<f64> {
    let a = params.mr();
    if a < MIN_MR {
        return Err(Error::domain("m·r", a, "m·r ≥ 1e-6"));
    }
    combination(a)
}

/// [`greens_combination`] with an error estimate: 1e-13 relative on each of the two
/// terms, the accuracy measured for G³⁰₁₃ and K₀ separately.
pub fn greens_combination_estimate(params: GreenParams) -> Result<Estimate> {
    let a = params.mr();
    if a < MIN_MR {
        return Err(Error::domain("m·r", a, "m·r ≥ 1e-6"));
    }
    let (g, k) = combination_parts(a)?;
    Ok(Estimate::new(g - k, 1e-13 * (g.abs() + k.abs())))
}

fn kernel_for(plan: &QuadraturePlan) -> Result<std::borrow::Cow<'static, QKernel>> {
    let standard = QuadraturePlan::default();
    if plan.panel_nodes == standard.panel_nodes
        && plan.zero_splitting == standard.zero_splitting
        && plan.subdivision == standard.subdivision
        && plan.tail_order == standard.tail_order
        && plan.split_point == standard.split_point
        && plan.error_budget >= standard.error_budget
    {
        Ok(std::borrow::Cow::Borrowed(QKernel::shared()?))
    } else {
        Ok(std::borrow::Cow::Owned(QKernel::new(&KernelSwitch::default(), plan)?))
    }
}

/// (1/2π) ∫₀^∞ Q(λr)·λ/(λ²+m²) dλ
pub fn greens_combination_quadrature(params: GreenParams, plan: &QuadraturePlan) -> Result<Estimate> {
    perturbative_diagonal_term(0, 0, params, plan)
}

/// (1/2π) ∫₀^∞ λ^{2i+1}/(λ²+m²)^{1+i+l/2} · Q(λr) dλ for even l.
pub fn perturbative_diagonal_term(i: u32, l: u32, params: GreenParams, plan: &QuadraturePlan) -> Result<Estimate> {
    if l % 2 != 0 {
        return Err(Error::domain("l", l as f64, "l even"));
    }
    let kernel = kernel_for(plan)?;
    let powers = LambdaPowers {
        numerator: 2 * i + 1,
        denominator: 1.0 + i as f64 + 0.5 * l as f64,
    };
    let v = lambda_kernel_integral(params.r, params.m, kernel.as_ref(), powers, plan)?;
    Ok(Estimate::new(v.value / (2.0 * PI), v.error / (2.0 * PI)))
}

/// Tolerance of [`radial_integral`].
pub const RADIAL_TOLERANCE: f64 = 1e-6;

/// 2π ∫₀^{r_max} r·C(mr) dr; `r_max` defaults to 40/m.
pub fn radial_integral(m: f64, r_max: Option<f64>) -> Result<Estimate> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::domain("m", m, "m > 0"));
    }
    let r_max = r_max.unwrap_or(40.0 / m);
    let a_max = m * r_max;
    if !(a_max >= 20.0 && a_max.is_finite()) {
        return Err(Error::domain("m·r_max", a_max, "m·r_max ≥ 20"));
    }
    // in a = mr the integral is (2π/m²) ∫₀^{a_max} a·C(a) da
    let mut edges = vec![0.0];
    let mut g = 2f64.powi(-20);
    while g < 1.0 {
        edges.push(g);
        g *= 2.0;
    }
    let mut u = 1.0;
    while u < a_max {
        edges.push(u);
        u += 1.0;
    }
    edges.push(a_max);
    let fine = gauss_legendre(20);
    let coarse = gauss_legendre(10);
    let pieces: Vec<Result<(f64, f64)>> = edges
        .par_windows(2)
        .map(|w| {
            let mut failure = None;
            let mut f = |a: f64| match combination(a) {
                Ok(c) => a * c,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            };
            let hi = fine.integrate(w[0], w[1], &mut f);
            let lo = coarse.integrate(w[0], w[1], &mut f);
            match failure {
                Some(e) => Err(e),
                None => Ok((hi, (hi - lo).abs())),
            }
        })
        .collect();
    let mut value = 0.0;
    let mut error = 0.0;
    for p in pieces {
        let (v, e) = p?;
        value += v;
        error += e;
    }
    // a·C(a) decays like e^{−2a}
    let remainder = 0.5 * (a_max * combination(a_max)?).abs();
    let scale = 2.0 * PI / (m * m);
    let estimate = Estimate::new(scale * value, scale * (error + remainder));
    if scale * remainder > RADIAL_TOLERANCE {
        return Err(Error::BudgetExceeded {
            value: estimate.value,
            estimate: scale * remainder,
            budget: RADIAL_TOLERANCE,
        });
    }
    Ok(estimate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p(x: f64) -> EvalPoint {
        EvalPoint::new(x).unwrap()
    }

    #[test]
    fn p_limits() {
        let v = p_closed(p(100.0)).unwrap().value;
        assert!((v + 0.25).abs() <= 0.002);
        for &x in &[20.0, 50.0, 200.0] {
            assert!((p_closed(p(x)).unwrap().value + 0.25).abs() <= 2.0 / x);
        }
    }

    #[test]
    fn q_limits_and_routes() {
        assert!((q(p(1e-3)).unwrap().value + 1.0).abs() <= 5e-3);
        assert_eq!(q(p(1e-8)).unwrap().value, -1.0);
        let plan = QuadraturePlan::default();
        assert_abs_diff_eq!(q(p(2.0)).unwrap().value, q_closed_route(p(2.0), &plan).unwrap().value, epsilon = 1e-9);
    }

    #[test]
    fn q_asymptotic_values() {
        assert_abs_diff_eq!(q_asymptotic(p(PI / 4.0)), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q_asymptotic(p(PI / 2.0)), 2.0 / PI, epsilon = 1e-15);
    }

    #[test]
    fn q_large_argument() {
        // independent 30-digit values of (π/2)(J₀Y₀ − x·T(x)); T carries a 1e-11
        // budget, which Q multiplies by πx/2
        assert_abs_diff_eq!(q(p(40.0)).unwrap().value, 0.001_611_511_506_804_257_8, epsilon = 5e-11);
        assert_abs_diff_eq!(q(p(60.0)).unwrap().value, -0.006_843_336_201_326_117_5, epsilon = 5e-11);
        assert_abs_diff_eq!(q(p(80.0)).unwrap().value, 0.006_083_849_777_709_813, epsilon = 5e-11);
        let mut leading: f64 = 0.0;
        let mut quoted: f64 = 0.0;
        for k in 0..=400 {
            let x = 40.0 + 0.1 * k as f64;
            let v = q(p(x)).unwrap().value;
            leading = leading.max((v - q_leading(p(x))).abs() * x * x);
            quoted = quoted.max((v - q_asymptotic(p(x))).abs() * x);
        }
        assert!(leading <= 5.0, "{leading}");
        // the quoted −cos(2x)/x misses by |cos 2x|/(2x)
        assert!((quoted - 0.5).abs() < 0.01, "{quoted}");
    }

    #[test]
    fn branches_agree_near_switch() {
        let plan = QuadraturePlan::default();
        let trunc = SeriesTruncation::default();
        let s = KernelSwitch::default().x_switch;
        for k in 0..=10 {
            let x = s * 0.8 * (1.25f64 / 0.8).powf(k as f64 / 10.0);
            let a = p_closed_branch(p(x), &plan).unwrap().value;
            let b = p_direct(p(x), &trunc).unwrap().value;
            assert!((a - b).abs() <= 1e-7, "x={x}");
        }
    }

    #[test]
    fn p_meijer_route() {
        let a = p_via_meijer(1.0, Normalization::Scaled).unwrap();
        assert_abs_diff_eq!(a, p_closed(p(1.0)).unwrap().value, epsilon = 1e-8);
    }

    #[test]
    fn kernel_matches_q() {
        let k = QKernel::shared().unwrap();
        for &u in &[1e-7, 0.01, 0.3, 0.5, 0.9, 7.7, 45.0, 300.0] {
            assert_abs_diff_eq!(k.eval(u), q(p(u)).unwrap().value, epsilon = 1e-11);
        }
    }

    #[test]
    fn combination_depends_on_product() {
        let a = greens_combination(GreenParams::new(2.0, 0.5).unwrap()).unwrap();
        let b = greens_combination(GreenParams::new(0.5, 2.0).unwrap()).unwrap();
        let c = greens_combination(GreenParams::new(1.0, 1.0).unwrap()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert!(greens_combination(GreenParams::new(10.0, 1.0).unwrap()).unwrap().abs() <= 1e-6);
        assert!(greens_combination(GreenParams::new(1e-9, 1.0).unwrap()).is_err());
        assert!(GreenParams::new(-1.0, 1.0).is_err());
    }

    #[test]
    fn combination_against_quadrature() {
        let plan = QuadraturePlan::default();
        for &(r, m) in &[(1.0, 1.0), (2.0, 0.5), (0.5, 1.0)] {
            let params = GreenParams::new(r, m).unwrap();
            let closed = greens_combination(params).unwrap();
            let quad = greens_combination_quadrature(params, &plan).unwrap();
            assert!((closed - quad.value).abs() <= 1e-6 * closed.abs(), "{r} {m}: {closed} {}", quad.value);
        }
    }

    #[test]
    fn perturbative_terms() {
        let plan = QuadraturePlan::default();
        let params = GreenParams::new(1.0, 1.0).unwrap();
        let t00 = perturbative_diagonal_term(0, 0, params, &plan).unwrap().value;
        assert_abs_diff_eq!(t00, greens_combination(params).unwrap(), epsilon = 1e-6);
        let t10 = perturbative_diagonal_term(1, 0, params, &plan).unwrap();
        assert!(t10.value.is_finite() && t10.error < 1e-8);
        assert!(perturbative_diagonal_term(0, 1, params, &plan).is_err());
    }

    #[test]
    fn radial_integral_unit_mass() {
        let v = radial_integral(1.0, None).unwrap();
        assert!((v.value * 6.0 + 1.0).abs() <= 1e-4, "{}", v.value);
        assert!(radial_integral(1.0, Some(5.0)).is_err());
    }
}
