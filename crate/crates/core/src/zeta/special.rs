//! Riemann and Hurwitz zeta functions on the real line.
//!
//! Both are evaluated by Euler-Maclaurin summation, which continues
//! analytically to every real `s != 1`.

use crate::error::{Result, TorsionError};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `B_2, B_4, ..., B_34`.
pub(crate) const BERNOULLI_EVEN: [f64; 17] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
    -7709321041217.0 / 510.0,
    2577687858367.0 / 6.0,
];

const DIRECT_TERMS: usize = 24;
const CORRECTION_TERMS: usize = 14;

/// Rising product `s (s+1) ... (s+m-1)` and its derivative in `s`.
fn rising(s: f64, m: usize) -> (f64, f64) {
    let mut value = 1.0;
    let mut deriv = 0.0;
    for i in 0..m {
        let f = s + i as f64;
        deriv = deriv * f + value;
        value *= f;
    }
    (value, deriv)
}

/// `(zeta(s, a), d/ds zeta(s, a))` for real `s != 1`, `a > 0`.
pub fn hurwitz_zeta_with_derivative(s: f64, a: f64) -> Result<(f64, f64)> {
    if s == 1.0 {
        return Err(TorsionError::PoleAtOne(s));
    }
    if !(a > 0.0) {
        return Err(TorsionError::BadParameter(format!(
            "Hurwitz parameter must be positive, got {a}"
        )));
    }
    let mut value = 0.0;
    let mut deriv = 0.0;
    for k in 0..DIRECT_TERMS {
        let x = k as f64 + a;
        let term = x.powf(-s);
        value += term;
        deriv -= x.ln() * term;
    }
    let x = DIRECT_TERMS as f64 + a;
    let lx = x.ln();
    let xs = x.powf(-s);
    // integral term x^(1-s) / (s-1)
    value += x * xs / (s - 1.0);
    deriv += -lx * x * xs / (s - 1.0) - x * xs / ((s - 1.0) * (s - 1.0));
    // half endpoint term
    value += 0.5 * xs;
    deriv -= 0.5 * lx * xs;
    let mut factorial = 1.0;
    for j in 1..=CORRECTION_TERMS {
        factorial *= (2 * j - 1) as f64 * (2 * j) as f64;
        let (p, dp) = rising(s, 2 * j - 1);
        let power = xs * x.powi(-(2 * j as i32 - 1));
        let c = BERNOULLI_EVEN[j - 1] / factorial;
        value += c * p * power;
        deriv += c * (dp - lx * p) * power;
    }
    Ok((value, deriv))
}

pub fn hurwitz_zeta(s: f64, a: f64) -> Result<f64> {
    hurwitz_zeta_with_derivative(s, a).map(|v| v.0)
}

/// `d/ds zeta(s, a)` at `s = 0`, equal to `ln Gamma(a) - ln(2 pi) / 2`.
pub fn hurwitz_zeta_prime0(a: f64) -> Result<f64> {
    hurwitz_zeta_with_derivative(0.0, a).map(|v| v.1)
}

pub fn riemann_zeta(s: f64) -> Result<f64> {
    hurwitz_zeta(s, 1.0)
}

pub fn riemann_zeta_with_derivative(s: f64) -> Result<(f64, f64)> {
    hurwitz_zeta_with_derivative(s, 1.0)
}

/// `zeta'(0) = -ln(2 pi) / 2`.
pub fn riemann_zeta_prime0() -> f64 {
    -0.5 * (2.0 * std::f64::consts::PI).ln()
}

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

pub fn digamma(x: f64) -> f64 {
    statrs::function::gamma::digamma(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zeta_special_values() {
        assert!((riemann_zeta(2.0).unwrap() - PI * PI / 6.0).abs() < 1e-14);
        assert!((riemann_zeta(4.0).unwrap() - PI.powi(4) / 90.0).abs() < 1e-14);
        assert!((riemann_zeta(0.0).unwrap() + 0.5).abs() < 1e-15);
        assert!((riemann_zeta(-1.0).unwrap() + 1.0 / 12.0).abs() < 1e-15);
        assert!(riemann_zeta(-2.0).unwrap().abs() < 1e-12);
        assert!((riemann_zeta_with_derivative(0.0).unwrap().1 - riemann_zeta_prime0()).abs() < 1e-14);
    }

    #[test]
    fn pole_is_rejected() {
        assert_eq!(riemann_zeta(1.0).unwrap_err(), TorsionError::PoleAtOne(1.0));
        assert!(hurwitz_zeta(2.0, 0.0).is_err());
    }

    #[test]
    fn hurwitz_at_zero() {
        for a in [0.1, 0.25, 0.5, 1.0, 2.7] {
            let (v, d) = hurwitz_zeta_with_derivative(0.0, a).unwrap();
            assert!((v - (0.5 - a)).abs() < 1e-14);
            let expected = ln_gamma(a) - 0.5 * (2.0 * PI).ln();
            assert!((d - expected).abs() < 1e-13, "a = {a}: {d} vs {expected}");
        }
        assert!((hurwitz_zeta(2.0, 1.0).unwrap() - PI * PI / 6.0).abs() < 1e-14);
    }

    #[test]
    fn hurwitz_half_derivative() {
        // ln Gamma(1/2) = ln(pi)/2 by reflection, so the derivative is -ln(2)/2
        let d = hurwitz_zeta_prime0(0.5).unwrap();
        assert!((d + 0.5 * 2f64.ln()).abs() < 1e-14);
    }
}
