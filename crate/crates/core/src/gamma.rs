//! Real and complex log-gamma via the Lanczos approximation (g = 7, nine terms).
//!
//! The complex routine is the only transcendental needed by the Mellin–Barnes
//! integrands. It returns *a* logarithm of Γ(z): the imaginary part is not
//! normalised to the principal branch, which is harmless because callers only
//! ever exponentiate sums of these logarithms.

use num_complex::Complex64;
use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln(√(2π))
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Natural log of Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < 0.5 {
        // Γ(x)Γ(1−x) = π / sin(πx), with sin(πx) > 0 on (0, 1/2)
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut a = LANCZOS_COEFFS[0];
    for (k, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        a += c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (z + 0.5) * t.ln() - t + a.ln()
}

/// Γ(x) for x > 0; exact products for small integers.
pub fn gamma(x: f64) -> f64 {
    if x.fract() == 0.0 && (1.0..=171.0).contains(&x) {
        return factorial(x as u32 - 1);
    }
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    if x > 171.6 {
        return f64::INFINITY;
    }
    let z = x - 1.0;
    let mut a = LANCZOS_COEFFS[0];
    for (k, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        a += c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    // split the power so that t^(z+1/2) does not overflow before e^(−t) is applied
    let half = t.powf(0.5 * (z + 0.5));
    (2.0 * PI).sqrt() * half * ((-t).exp() * half) * a
}

/// n! in binary64 (infinite beyond 170!).
pub fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// A logarithm of Γ(z) for complex z away from the non-positive integers.
pub fn ln_gamma_complex(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        let ln_pi = Complex64::new(PI.ln(), 0.0);
        return ln_pi - ln_sin_pi(z) - ln_gamma_complex(Complex64::new(1.0, 0.0) - z);
    }
    let w = z - 1.0;
    let mut a = Complex64::new(LANCZOS_COEFFS[0], 0.0);
    for (k, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        a += *c / (w + k as f64);
    }
    let t = w + (LANCZOS_G + 0.5);
    (w + 0.5) * t.ln() - t + a.ln() + LN_SQRT_2PI
}

/// A logarithm of sin(πz) that stays finite for large |Im z|.
fn ln_sin_pi(z: Complex64) -> Complex64 {
    let w = z * PI;
    if w.im.abs() < 1.0 {
        return w.sin().ln();
    }
    if w.im < 0.0 {
        return ln_sin_pi(z.conj()).conj();
    }
    // sin w = e^{−iw} (e^{2iw} − 1) / (2i), with |e^{2iw}| < 1
    let i = Complex64::new(0.0, 1.0);
    -i * w + ((2.0 * i * w).exp() - 1.0).ln() - (2.0 * i).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn integer_gamma_is_factorial() {
        assert_eq!(gamma(1.0), 1.0);
        assert_eq!(gamma(5.0), 24.0);
        assert_relative_eq!(ln_gamma(11.0), 3_628_800f64.ln(), max_relative = 1e-14);
    }

    #[test]
    fn half_integer_values() {
        let sqrt_pi = PI.sqrt();
        assert_relative_eq!(gamma(0.5), sqrt_pi, max_relative = 1e-14);
        assert_relative_eq!(gamma(1.5), 0.5 * sqrt_pi, max_relative = 1e-14);
        assert_relative_eq!(gamma(60.5), ln_gamma(60.5).exp(), max_relative = 1e-12);
    }

    #[test]
    fn complex_matches_real_on_axis() {
        for &x in &[0.1, 0.7, 1.3, 4.5, 17.25] {
            let c = ln_gamma_complex(Complex64::new(x, 0.0));
            assert_relative_eq!(c.re, ln_gamma(x), epsilon = 1e-14, max_relative = 1e-14);
        }
    }

    #[test]
    fn complex_recurrence_and_reflection() {
        // Γ(z+1) = zΓ(z), checked through exponentials to ignore the branch
        for &(re, im) in &[(0.3, 2.0), (-2.7, 15.0), (1.25, -40.0), (-0.75, 0.4)] {
            let z = Complex64::new(re, im);
            let lhs = ln_gamma_complex(z + 1.0);
            let rhs = ln_gamma_complex(z) + z.ln();
            let diff = lhs - rhs;
            assert!(diff.re.abs() < 1e-12, "re {z}: {diff}");
            let turns = diff.im / (2.0 * PI);
            assert!((turns - turns.round()).abs() < 1e-12, "im {z}: {diff}");
        }
    }

    #[test]
    fn known_complex_value() {
        // |Γ(1/2 + iy)|² = π / cosh(πy)
        for &y in &[0.5, 3.0, 30.0] {
            let v = ln_gamma_complex(Complex64::new(0.5, y));
            let expected = 0.5 * (PI / (PI * y).cosh()).ln();
            assert_relative_eq!(v.re, expected, max_relative = 1e-13);
        }
    }
}
