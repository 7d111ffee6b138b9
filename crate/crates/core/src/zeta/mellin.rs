//! Spectral zeta functions by the Mellin transform of a heat trace.
//!
//! With the split at `t = 1`,
//!
//! ```text
//! Gamma(s) zeta(s) = sum_p c_p / (s - p) - b / s
//!                  + int_0^1 t^(s-1) r(t) dt + int_1^inf t^(s-1) tail(t) dt
//! ```
//!
//! where `r` is the remainder beyond the small-time expansion and `tail` the
//! trace over the nonzero spectrum. The first line is exact coefficient
//! arithmetic; the integrals are entire in `s`.

use serde::{Deserialize, Serialize};

use super::heat::HeatTrace;
use super::quadrature::integrate;
use super::special::{digamma, gamma};
use crate::error::{Result, TorsionError};

/// Default absolute quadrature target.
pub const DEFAULT_QUAD_EPS: f64 = 1e-12;
/// Environment override for the quadrature target.
pub const QUAD_EPS_ENV: &str = "TORSIONLAB_QUAD_EPS";

const TAIL_CUTOFF: f64 = 1e-16;
const TAIL_MAX_DOUBLINGS: usize = 64;
const POWER_MATCH: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZetaEval {
    pub s: f64,
    pub value: f64,
    pub derivative: Option<f64>,
    pub abs_error: f64,
    pub derivative_abs_error: Option<f64>,
    pub kernel_dim: usize,
}

/// Quadrature target from `TORSIONLAB_QUAD_EPS`, falling back to
/// [`DEFAULT_QUAD_EPS`] when unset or unparsable.
pub fn quadrature_eps() -> f64 {
    std::env::var(QUAD_EPS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<f64>().ok())
        .filter(|v| v.is_finite() && *v > 0.0)
        .unwrap_or(DEFAULT_QUAD_EPS)
}

/// `(value, error)` of `int_0^1 t^(s-1) (ln t)^j r(t) dt + int_1^inf t^(s-1) (ln t)^j tail(t) dt`.
fn entire_part(h: &HeatTrace, s: f64, log_power: i32, tol: f64) -> Result<(f64, f64)> {
    let weight = move |t: f64| {
        let w = t.powf(s - 1.0);
        if log_power == 0 {
            w
        } else {
            w * t.ln().powi(log_power)
        }
    };
    let lower = integrate(
        |t| {
            let r = h.remainder(t);
            if r == 0.0 {
                0.0
            } else {
                weight(t) * r
            }
        },
        0.0,
        1.0,
        tol,
    )?;
    let mut value = lower.value;
    let mut error = lower.error;
    let mut a = 1.0;
    for _ in 0..TAIL_MAX_DOUBLINGS {
        let b = 2.0 * a;
        let piece = integrate(|t| weight(t) * h.tail(t), a, b, tol)?;
        value += piece.value;
        error += piece.error;
        let edge = h.tail(b).abs() * b.powf(s.max(0.0)) * (1.0 + b.ln().abs().powi(log_power));
        a = b;
        if edge < TAIL_CUTOFF {
            return Ok((value, error));
        }
    }
    Err(TorsionError::QuadratureFailure {
        tol,
        estimate: f64::INFINITY,
    })
}

/// `zeta(s) = sum_(lambda > 0) lambda^(-s)` with the default quadrature target.
pub fn mellin_zeta(h: &HeatTrace, s: f64) -> Result<ZetaEval> {
    mellin_zeta_with_tol(h, s, quadrature_eps())
}

pub fn mellin_zeta_with_tol(h: &HeatTrace, s: f64, tol: f64) -> Result<ZetaEval> {
    if !s.is_finite() {
        return Err(TorsionError::BadParameter(format!("s must be finite, got {s}")));
    }
    let terms = h.small_t_terms();
    let b = h.kernel_dim() as f64;
    let coefficient_scale: f64 = terms.iter().map(|t| t.coeff.abs()).sum::<f64>() + b;
    let rounding = 8.0 * f64::EPSILON * coefficient_scale.max(1.0);

    let nearest = s.round();
    let at_nonpositive_integer = nearest <= 0.0 && (s - nearest).abs() < POWER_MATCH;
    if at_nonpositive_integer {
        let m = (-nearest) as u64;
        let s0 = nearest;
        let mut pole = 0.0;
        let mut regular = 0.0;
        for t in &terms {
            if (t.power - s0).abs() < POWER_MATCH {
                pole += t.coeff;
            } else {
                regular += t.coeff / (s0 - t.power);
            }
        }
        if m == 0 {
            pole -= b;
        } else {
            regular -= b / s0;
        }
        let (integral, integral_error) = entire_part(h, s0, 0, tol)?;
        regular += integral;
        let factorial: f64 = (1..=m).map(|j| j as f64).product();
        let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
        let scale = sign * factorial;
        let value = scale * pole;
        let derivative = scale * (regular - digamma(m as f64 + 1.0) * pole);
        return Ok(ZetaEval {
            s,
            value,
            derivative: Some(derivative),
            abs_error: factorial * rounding,
            derivative_abs_error: Some(factorial * (integral_error + rounding * (1.0 + regular.abs()))),
            kernel_dim: h.kernel_dim(),
        });
    }

    for t in &terms {
        if (t.power - s).abs() < POWER_MATCH {
            return Err(TorsionError::PoleHit {
                s,
                coefficient: t.coeff,
            });
        }
    }

    let mut mellin = -b / s;
    let mut mellin_prime = b / (s * s);
    for t in &terms {
        let d = s - t.power;
        mellin += t.coeff / d;
        mellin_prime -= t.coeff / (d * d);
    }
    let (integral, integral_error) = entire_part(h, s, 0, tol)?;
    let (log_integral, log_integral_error) = entire_part(h, s, 1, tol)?;
    mellin += integral;
    mellin_prime += log_integral;

    let g = gamma(s);
    let psi = digamma(s);
    let value = mellin / g;
    let derivative = (mellin_prime - psi * mellin) / g;
    let abs_error = (integral_error + rounding * (1.0 + mellin.abs())) / g.abs();
    let derivative_abs_error = (log_integral_error
        + psi.abs() * integral_error
        + rounding * (1.0 + mellin_prime.abs() + (psi * mellin).abs()))
        / g.abs();
    Ok(ZetaEval {
        s,
        value,
        derivative: Some(derivative),
        abs_error,
        derivative_abs_error: Some(derivative_abs_error),
        kernel_dim: h.kernel_dim(),
    })
}
