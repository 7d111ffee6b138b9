//! Form-degree spectra of closed model manifolds and their torsions.
//!
//! Every model stores one [`HeatTrace`] per form degree. Residue torsion only
//! needs `zeta_k(0) = c_0 - b_k`, which is exact coefficient arithmetic;
//! analytic torsion additionally needs `zeta_k'(0)` from the Mellin engine.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TorsionError};
use crate::torsion_engine::{classify_beta, euler_characteristics, BetaWeight};
use crate::twisted_complex::sign;
use crate::zeta::{mellin_zeta, HeatTrace, ZetaEval};

/// Sample points for the zeta identities.
pub const IDENTITY_POINTS: [f64; 3] = [0.0, 0.75, 2.0];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    /// Circle of length `length` with coefficients twisted by a rotation of
    /// angle `theta`. Rank 1 admits only `theta in {0, pi}`.
    Circle { length: f64, theta: f64, rank: usize },
    /// Flat square torus `(R / L Z)^n`.
    Torus { n: usize, length: f64 },
    /// Round unit 2-sphere.
    Sphere2,
    /// A single point with a rank-`rank` trivial bundle.
    Point { rank: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedModel {
    name: String,
    dim: usize,
    rank: usize,
    traces: Vec<HeatTrace>,
    betti: Vec<usize>,
}

fn binomial(n: usize, k: usize) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(TorsionError::BadParameter(format!("{name} must be positive, got {x}")))
    }
}

impl ClosedModel {
    pub fn build(spec: ModelSpec) -> Result<Self> {
        match spec {
            ModelSpec::Circle {
                length,
                theta,
                rank,
            } => Self::circle(length, theta, rank),
            ModelSpec::Torus { n, length } => Self::torus(n, length),
            ModelSpec::Sphere2 => Ok(Self::sphere2()),
            ModelSpec::Point { rank } => Ok(Self::point(rank)),
        }
    }

    pub fn circle(length: f64, theta: f64, rank: usize) -> Result<Self> {
        check_positive("circle length", length)?;
        if !(0.0..2.0 * PI).contains(&theta) {
            return Err(TorsionError::BadParameter(format!(
                "character angle must lie in [0, 2 pi), got {theta}"
            )));
        }
        let trace = match rank {
            1 if theta == 0.0 || theta == PI => HeatTrace::circle(length, theta),
            1 => {
                return Err(TorsionError::BadParameter(format!(
                    "a rank-1 orthogonal character has angle 0 or pi, got {theta}"
                )))
            }
            // a rotation splits into the characters e^(i theta), e^(-i theta),
            // whose spectra coincide
            2 => HeatTrace::circle(length, theta).scaled(2),
            _ => {
                return Err(TorsionError::BadParameter(format!(
                    "circle models support rank 1 or 2, got {rank}"
                )))
            }
        };
        Ok(Self::from_traces(
            format!("circle(L={length}, theta={theta}, rank={rank})"),
            1,
            rank,
            vec![trace.clone(), trace],
        ))
    }

    pub fn torus(n: usize, length: f64) -> Result<Self> {
        check_positive("torus length", length)?;
        if n == 0 {
            return Err(TorsionError::BadParameter("torus dimension must be at least 1".into()));
        }
        let scalar = HeatTrace::lattice(n, length);
        let traces = (0..=n).map(|k| scalar.scaled(binomial(n, k))).collect();
        Ok(Self::from_traces(format!("torus(n={n}, L={length})"), n, 1, traces))
    }

    /// Degree-1 spectrum is the exact plus coexact copy of the nonzero scalar
    /// spectrum; degree 2 is the Hodge dual of degree 0.
    pub fn sphere2() -> Self {
        let scalar = HeatTrace::sphere_scalar();
        let one_forms = scalar.difference(&HeatTrace::zero_mode()).scaled(2);
        Self::from_traces("sphere2".into(), 2, 1, vec![scalar.clone(), one_forms, scalar])
    }

    pub fn point(rank: usize) -> Self {
        Self::from_traces(
            format!("point(rank={rank})"),
            0,
            rank,
            vec![HeatTrace::zero_mode().scaled(rank as i64)],
        )
    }

    fn from_traces(name: String, dim: usize, rank: usize, traces: Vec<HeatTrace>) -> Self {
        let betti = traces.iter().map(HeatTrace::kernel_dim).collect();
        Self {
            name,
            dim,
            rank,
            traces,
            betti,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn trace(&self, k: usize) -> &HeatTrace {
        &self.traces[k]
    }

    pub fn betti(&self) -> &[usize] {
        &self.betti
    }

    /// `sum (-1)^k b_k`, which already carries the bundle rank.
    pub fn euler_characteristic(&self) -> i64 {
        euler_characteristics(&self.betti).chi
    }

    pub fn is_acyclic(&self) -> bool {
        self.betti.iter().all(|&b| b == 0)
    }

    pub fn zeta(&self, k: usize, s: f64) -> Result<ZetaEval> {
        self.check_degree(k)?;
        mellin_zeta(&self.traces[k], s)
    }

    /// `zeta_k(0) = c_0 - b_k`.
    pub fn zeta_at_zero(&self, k: usize) -> Result<f64> {
        self.check_degree(k)?;
        let h = &self.traces[k];
        Ok(h.coefficient(0.0) - h.kernel_dim() as f64)
    }

    /// `max_k |Tr_k(t) - Tr_(n-k)(t)|` over the given times.
    pub fn duality_residual(&self, times: &[f64]) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for k in 0..=n {
            for &t in times {
                worst = worst.max((self.traces[k].trace(t) - self.traces[n - k].trace(t)).abs());
            }
        }
        worst
    }

    fn check_degree(&self, k: usize) -> Result<()> {
        if k > self.dim {
            Err(TorsionError::ShapeMismatch(format!(
                "degree {k} exceeds model dimension {}",
                self.dim
            )))
        } else {
            Ok(())
        }
    }
}

/// `res(log Delta_k) = -2 (zeta_k(0) + b_k)`.
pub fn residue_log_trace(model: &ClosedModel, k: usize) -> Result<f64> {
    Ok(-2.0 * (model.zeta_at_zero(k)? + model.betti()[k] as f64))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeData {
    pub degree: usize,
    pub zeta0: f64,
    pub zeta_prime0: Option<f64>,
    pub zeta_prime0_error: Option<f64>,
    pub betti: usize,
    pub residue: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorsionReport {
    pub model: String,
    pub dim: usize,
    pub rank: usize,
    pub beta: Vec<f64>,
    pub beta_in_span: bool,
    pub degrees: Vec<DegreeData>,
    pub euler_characteristic: i64,
    pub derived_euler_characteristic: i64,
    pub log_residue_torsion: f64,
    /// Closed value predicted from the Euler characteristics when `beta` lies
    /// in `span{1, k}`.
    pub predicted_residue_torsion: Option<f64>,
    pub log_zeta_torsion: Option<f64>,
}

impl TorsionReport {
    pub fn residue_matches_prediction(&self, tol: f64) -> Option<bool> {
        self.predicted_residue_torsion
            .map(|p| (p - self.log_residue_torsion).abs() <= tol)
    }
}

/// `lambda * chi + mu * (n/2) * chi` for even `n`, zero for odd `n`.
pub(crate) fn predicted_residue(beta: &BetaWeight, dim: usize, chi: i64) -> Option<f64> {
    let class = classify_beta(beta);
    if !class.satisfies_recurrence {
        return None;
    }
    let chi = chi as f64;
    Some(class.lambda * chi + class.mu * 0.5 * dim as f64 * chi)
}

fn report(model: &ClosedModel, beta: &BetaWeight, with_derivative: bool) -> Result<TorsionReport> {
    beta.check_len(model.dim())?;
    let mut degrees = Vec::with_capacity(model.dim() + 1);
    for k in 0..=model.dim() {
        let zeta0 = model.zeta_at_zero(k)?;
        let (zeta_prime0, zeta_prime0_error) = if with_derivative {
            let z = model.zeta(k, 0.0)?;
            (z.derivative, z.derivative_abs_error)
        } else {
            (None, None)
        };
        degrees.push(DegreeData {
            degree: k,
            zeta0,
            zeta_prime0,
            zeta_prime0_error,
            betti: model.betti()[k],
            residue: residue_log_trace(model, k)?,
        });
    }
    let log_residue_torsion = 0.5
        * degrees
            .iter()
            .map(|d| sign(d.degree + 1) as f64 * beta.0[d.degree] * d.residue)
            .sum::<f64>();
    let log_zeta_torsion = if with_derivative {
        Some(
            0.5 * degrees
                .iter()
                .map(|d| sign(d.degree) as f64 * beta.0[d.degree] * d.zeta_prime0.unwrap_or(f64::NAN))
                .sum::<f64>(),
        )
    } else {
        None
    };
    let euler = euler_characteristics(model.betti());
    Ok(TorsionReport {
        model: model.name().to_string(),
        dim: model.dim(),
        rank: model.rank(),
        beta: beta.0.clone(),
        beta_in_span: classify_beta(beta).satisfies_recurrence,
        degrees,
        euler_characteristic: euler.chi,
        derived_euler_characteristic: euler.derived,
        log_residue_torsion,
        predicted_residue_torsion: predicted_residue(beta, model.dim(), euler.chi),
        log_zeta_torsion,
    })
}

/// `log T^(res, beta) = sum (-1)^k beta_k (zeta_k(0) + b_k)`.
pub fn residue_torsion(model: &ClosedModel, beta: &BetaWeight) -> Result<TorsionReport> {
    report(model, beta, false)
}

/// Residue torsion together with `log T^(zeta, beta) = 1/2 sum (-1)^k beta_k zeta_k'(0)`.
pub fn analytic_torsion(model: &ClosedModel, beta: &BetaWeight) -> Result<TorsionReport> {
    report(model, beta, true)
}

/// Analytic torsion with `beta = k` on an acyclic model, to be compared with
/// the Reidemeister torsion of a matching combinatorial complex.
pub fn analytic_reidemeister(model: &ClosedModel) -> Result<f64> {
    if let Some((degree, &dim)) = model.betti().iter().enumerate().find(|(_, &b)| b > 0) {
        return Err(TorsionError::NotAcyclic { degree, dim });
    }
    let r = analytic_torsion(model, &BetaWeight::degrees(model.dim()))?;
    Ok(r.log_zeta_torsion.expect("derivatives were requested"))
}

/// `1/2 res_0 - res_1 + 3/2 res_2` on a surface.
pub fn surface_combination(model: &ClosedModel) -> Result<f64> {
    if model.dim() != 2 {
        return Err(TorsionError::BadParameter(format!(
            "surface combination needs a 2-dimensional model, got dimension {}",
            model.dim()
        )));
    }
    Ok(0.5 * residue_log_trace(model, 0)? - residue_log_trace(model, 1)?
        + 1.5 * residue_log_trace(model, 2)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCase {
    pub name: String,
    pub s: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub discrepancy: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub model: String,
    pub cases: Vec<IdentityCase>,
}

impl IdentityReport {
    pub fn all_pass(&self) -> bool {
        self.cases.iter().all(|c| c.pass)
    }

    pub fn max_discrepancy(&self) -> f64 {
        self.cases.iter().map(|c| c.discrepancy).fold(0.0, f64::max)
    }
}

pub(crate) fn push_case(cases: &mut Vec<IdentityCase>, name: String, s: f64, lhs: f64, rhs: f64, tol: f64) {
    let discrepancy = (lhs - rhs).abs();
    cases.push(IdentityCase {
        name,
        s,
        lhs,
        rhs,
        discrepancy,
        pass: discrepancy <= tol,
    });
}

/// Duality, the alternating sums and, in even dimensions, the weighted sums,
/// at every point of [`IDENTITY_POINTS`].
pub fn identity_suite(model: &ClosedModel, tol: f64) -> Result<IdentityReport> {
    let n = model.dim();
    let mut cases = Vec::new();
    for &s in &IDENTITY_POINTS {
        let zetas: Vec<f64> = (0..=n)
            .map(|k| model.zeta(k, s).map(|z| z.value))
            .collect::<Result<_>>()?;
        for k in 0..=n {
            push_case(&mut cases, format!("duality k={k}"), s, zetas[k], zetas[n - k], tol);
        }
        let alternating: f64 = zetas.iter().enumerate().map(|(k, z)| sign(k) as f64 * z).sum();
        push_case(&mut cases, "alternating sum".into(), s, alternating, 0.0, tol);
        if n.is_multiple_of(2) {
            let weighted: f64 = zetas
                .iter()
                .enumerate()
                .map(|(k, z)| sign(k) as f64 * k as f64 * z)
                .sum();
            push_case(&mut cases, "weighted sum".into(), s, weighted, 0.0, tol);
            push_case(
                &mut cases,
                "half-dimension relation".into(),
                s,
                0.5 * n as f64 * alternating,
                weighted,
                tol,
            );
        }
    }
    Ok(IdentityReport {
        model: model.name().to_string(),
        cases,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_zeta_zero() {
        let m = ClosedModel::circle(2.0 * PI, 0.0, 1).unwrap();
        assert_eq!(m.betti(), &[1, 1]);
        assert_eq!(m.zeta_at_zero(0).unwrap(), -1.0);
        assert_eq!(residue_log_trace(&m, 0).unwrap(), 0.0);
        for beta in [BetaWeight(vec![1.0, 1.0]), BetaWeight(vec![0.3, -2.0])] {
            assert_eq!(residue_torsion(&m, &beta).unwrap().log_residue_torsion, 0.0);
        }
    }

    #[test]
    fn torus_values() {
        let m = ClosedModel::torus(2, 1.0).unwrap();
        assert_eq!(m.betti(), &[1, 2, 1]);
        assert_eq!(m.euler_characteristic(), 0);
        assert_eq!(m.zeta_at_zero(1).unwrap(), -2.0);
        assert_eq!(residue_log_trace(&m, 1).unwrap(), 0.0);
        let r = residue_torsion(&m, &BetaWeight::ones(2)).unwrap();
        assert_eq!(r.log_residue_torsion, 0.0);
    }

    #[test]
    fn sphere_values() {
        let m = ClosedModel::sphere2();
        assert_eq!(m.betti(), &[1, 0, 1]);
        assert!((m.zeta_at_zero(0).unwrap() + 2.0 / 3.0).abs() < 1e-15);
        assert!((residue_log_trace(&m, 0).unwrap() + 2.0 / 3.0).abs() < 1e-15);
        let one = residue_torsion(&m, &BetaWeight::ones(2)).unwrap();
        assert!((one.log_residue_torsion - 2.0).abs() < 1e-14);
        let k = residue_torsion(&m, &BetaWeight::degrees(2)).unwrap();
        assert!((k.log_residue_torsion - 2.0).abs() < 1e-14);
        assert!(k.residue_matches_prediction(1e-12).unwrap());
        assert!((surface_combination(&m).unwrap() + 4.0).abs() < 1e-14);
    }

    #[test]
    fn surface_combination_torus() {
        let m = ClosedModel::torus(2, 1.0).unwrap();
        assert_eq!(surface_combination(&m).unwrap(), 0.0);
        assert!(surface_combination(&ClosedModel::torus(3, 1.0).unwrap()).is_err());
    }

    #[test]
    fn rotation_character_analytic_torsion() {
        let theta = PI / 2.0;
        let m = ClosedModel::circle(1.0, theta, 2).unwrap();
        assert!(m.is_acyclic());
        let t = analytic_reidemeister(&m).unwrap();
        assert!((t - 2f64.ln()).abs() < 1e-8, "{t}");
        let one = analytic_torsion(&m, &BetaWeight::ones(1)).unwrap();
        assert!(one.log_zeta_torsion.unwrap().abs() < 1e-8);
    }

    #[test]
    fn analytic_torsion_needs_acyclic_model() {
        let m = ClosedModel::circle(1.0, 0.0, 1).unwrap();
        assert_eq!(
            analytic_reidemeister(&m).unwrap_err(),
            TorsionError::NotAcyclic { degree: 0, dim: 1 }
        );
    }

    #[test]
    fn bad_parameters() {
        assert!(ClosedModel::circle(-1.0, 0.0, 1).is_err());
        assert!(ClosedModel::circle(1.0, 0.5, 1).is_err());
        assert!(ClosedModel::circle(1.0, 7.0, 2).is_err());
        assert!(ClosedModel::torus(0, 1.0).is_err());
    }

    #[test]
    fn identities_hold() {
        for m in [
            ClosedModel::torus(2, 1.0).unwrap(),
            ClosedModel::circle(2.0 * PI, 0.0, 1).unwrap(),
            ClosedModel::sphere2(),
        ] {
            let r = identity_suite(&m, 1e-8).unwrap();
            assert!(r.all_pass(), "{}: {:?}", m.name(), r.cases.iter().find(|c| !c.pass));
        }
    }

    #[test]
    fn trace_duality() {
        let m = ClosedModel::sphere2();
        assert!(m.duality_residual(&[0.1, 1.0, 3.0]) < 1e-12);
    }
}
