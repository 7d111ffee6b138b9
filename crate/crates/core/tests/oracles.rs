//! Spectral values checked against closed forms and series that share no
//! code with the Mellin engine.

use std::f64::consts::PI;

use torsionlab::boundary_models::{boundary_residue_torsion, BoundaryModel, Condition};
use torsionlab::spectral_models::{analytic_torsion, ClosedModel, TorsionReport};
use torsionlab::torsion_engine::BetaWeight;
use torsionlab::zeta::{mellin_zeta, riemann_zeta, theta_expansion, ModelFactor};

const CATALAN: f64 = 0.915_965_594_177_219;
const GLAISHER: f64 = 1.282_427_129_100_622_6;

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Hasse's series; at `s = -m` the inner sums vanish for `n > m`.
fn hasse_zeta(s: f64, terms: u64) -> f64 {
    let outer: f64 = (0..terms)
        .map(|n| {
            let inner: f64 = (0..=n)
                .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } * binomial(n, k) * ((k + 1) as f64).powf(-s))
                .sum();
            inner / 2f64.powi(n as i32 + 1)
        })
        .sum();
    outer / (1.0 - 2f64.powf(1.0 - s))
}

/// Borwein's accelerated eta series, converted to zeta.
fn borwein_zeta(s: f64) -> f64 {
    // d_k = n sum_(i <= k) (n+i-1)! 4^i / ((n-i)! (2i)!)
    let n = 40usize;
    let nf = n as f64;
    let mut d = Vec::with_capacity(n + 1);
    let mut term = 1.0;
    let mut acc = 0.0;
    for i in 0..=n {
        if i > 0 {
            let i = i as f64;
            term *= 4.0 * (nf + i - 1.0) * (nf - i + 1.0) / ((2.0 * i - 1.0) * (2.0 * i));
        }
        acc += term;
        d.push(acc);
    }
    let dn = d[n];
    let eta: f64 = -(0..n)
        .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } * (d[k] - dn) / ((k + 1) as f64).powf(s))
        .sum::<f64>()
        / dn;
    eta / (1.0 - 2f64.powf(1.0 - s))
}

#[test]
fn series_oracles_agree_with_each_other() {
    assert!((hasse_zeta(0.0, 4) + 0.5).abs() < 1e-15);
    assert!((hasse_zeta(-1.0, 4) + 1.0 / 12.0).abs() < 1e-15);
    assert!((borwein_zeta(2.0) - PI * PI / 6.0).abs() < 1e-13);
    assert!((borwein_zeta(4.0) - PI.powi(4) / 90.0).abs() < 1e-13);
}

#[test]
fn unit_circle_matches_riemann_series() {
    // spectrum m^2, m != 0, so zeta(s) = 2 zeta_R(2s)
    let h = theta_expansion(ModelFactor::Circle(2.0 * PI));
    for (s, expected) in [
        (0.0, 2.0 * hasse_zeta(0.0, 4)),
        (-0.5, 2.0 * hasse_zeta(-1.0, 4)),
        (0.75, 2.0 * borwein_zeta(1.5)),
        (2.0, 2.0 * borwein_zeta(4.0)),
    ] {
        let z = mellin_zeta(&h, s).unwrap();
        assert!((z.value - expected).abs() < 1e-10, "s={s}: {} vs {expected}", z.value);
        assert!((riemann_zeta(2.0 * s).unwrap() * 2.0 - expected).abs() < 1e-10);
    }
}

#[test]
fn circle_determinants() {
    // untwisted: zeta'(0) = -2 log L; twisted by theta: -log(4 sin^2(theta/2)),
    // from the reflection formula for log Gamma(a) + log Gamma(1 - a)
    for l in [0.5, 1.0, 3.0] {
        let m = ClosedModel::circle(l, 0.0, 1).unwrap();
        let d = m.zeta(0, 0.0).unwrap().derivative.unwrap();
        assert!((d + 2.0 * l.ln()).abs() < 1e-9, "L={l}: {d}");
    }
    for theta in [0.3, 1.0, 2.0, 3.0] {
        let m = ClosedModel::circle(1.7, theta, 2).unwrap();
        let d = m.zeta(0, 0.0).unwrap().derivative.unwrap();
        let expected = -2.0 * (4.0 * (theta / 2.0).sin().powi(2)).ln();
        assert!((d - expected).abs() < 1e-9, "theta={theta}: {d} vs {expected}");
    }
}

#[test]
fn sphere_values() {
    // zeta_0(0) = 2 (zeta_H(-1, 3/2) + 1/8) with zeta_H(-1, a) = -B_2(a) / 2
    let a: f64 = 1.5;
    let b2 = a * a - a + 1.0 / 6.0;
    let expected = 2.0 * (-b2 / 2.0 + 0.125);
    let s2 = ClosedModel::sphere2();
    assert!((s2.zeta_at_zero(0).unwrap() - expected).abs() < 1e-12);

    // direct sum of (2l+1) / (l(l+1))^2 with the tail
    // sum_(l > L) (2l+1)/(l(l+1))^2 = 1/(L+1)^2 telescoped exactly
    let cutoff = 2000u64;
    let partial: f64 = (1..=cutoff)
        .map(|l| {
            let l = l as f64;
            (2.0 * l + 1.0) / (l * (l + 1.0)).powi(2)
        })
        .sum();
    let direct = partial + 1.0 / ((cutoff + 1) as f64).powi(2);
    let z = s2.zeta(0, 2.0).unwrap().value;
    assert!((z - direct).abs() < 1e-10, "{z} vs {direct}");
    // (2l+1)/(l(l+1))^2 = 1/l^2 - 1/(l+1)^2, so the full sum is 1
    assert!((z - 1.0).abs() < 1e-10);

    // log det = 1/2 - 4 zeta_R'(-1), with zeta_R'(-1) = 1/12 - log A
    let zeta_prime_minus_one = 1.0 / 12.0 - GLAISHER.ln();
    let expected = -(0.5 - 4.0 * zeta_prime_minus_one);
    let d = s2.zeta(0, 0.0).unwrap().derivative.unwrap();
    assert!((d - expected).abs() < 1e-9, "{d} vs {expected}");
}

#[test]
fn flat_torus_at_two() {
    // sum over nonzero (m, n) of (m^2 + n^2)^-2 = 4 zeta(2) beta(2)
    let l = 2.0 * PI;
    let t2 = ClosedModel::torus(2, l).unwrap();
    let expected = 4.0 * (PI * PI / 6.0) * CATALAN;
    let z = t2.zeta(0, 2.0).unwrap().value;
    assert!((z - expected).abs() < 1e-9, "{z} vs {expected}");
}

#[test]
fn dirichlet_interval_determinant() {
    // spectrum (pi k / R)^2, so zeta'(0) = -log(2R)
    for r in [0.5, 1.0, 2.5] {
        let m = BoundaryModel::interval(r, Condition::Relative).unwrap();
        let d = m.zeta(0, 0.0).unwrap().derivative.unwrap();
        assert!((d + (2.0 * r).ln()).abs() < 1e-9, "R={r}: {d}");
    }
}

#[test]
fn reports_round_trip_through_json() {
    let report = analytic_torsion(&ClosedModel::circle(1.0, 0.7, 2).unwrap(), &BetaWeight::degrees(1)).unwrap();
    let text = serde_json::to_string(&report).unwrap();
    let back: TorsionReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, report);

    let boundary = boundary_residue_torsion(
        &BoundaryModel::cylinder(1.0, 2.0 * PI, Condition::Absolute).unwrap(),
        &BetaWeight::degrees(2),
    )
    .unwrap();
    let text = serde_json::to_string(&boundary).unwrap();
    assert_eq!(serde_json::from_str::<serde_json::Value>(&text).unwrap(), serde_json::to_value(&boundary).unwrap());
}
