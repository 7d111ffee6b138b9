//! Relative and absolute boundary conditions on the interval and the cylinder.
//!
//! On a product `[0, R] x N` every form splits as `a + dx ^ b` with `a, b`
//! free of `dx`. At a relative end the tangential part of `omega` and of
//! `delta omega` vanishes, which makes `a` Dirichlet and `b` Neumann. At an
//! absolute end the normal parts vanish and the roles swap. Each end is
//! chosen independently, so pieces cut out of a larger model can carry a
//! relative condition on the cut and the outer condition elsewhere.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TorsionError};
use crate::spectral_models::{predicted_residue, push_case, residue_torsion, ClosedModel, IdentityCase, IDENTITY_POINTS};
use crate::torsion_engine::{euler_characteristics, BetaWeight};
use crate::twisted_complex::sign;
use crate::zeta::{mellin_zeta, Endpoint, HeatTrace, SpectralFactor, ZetaEval};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Relative,
    Absolute,
}

impl Condition {
    /// Endpoint type for a component without (`has_dx = false`) or with a `dx`.
    pub fn endpoint(self, has_dx: bool) -> Endpoint {
        match (self, has_dx) {
            (Condition::Relative, false) | (Condition::Absolute, true) => Endpoint::Dirichlet,
            (Condition::Relative, true) | (Condition::Absolute, false) => Endpoint::Neumann,
        }
    }
}

/// Conditions at `x = 0` and `x = R`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ends {
    pub left: Condition,
    pub right: Condition,
}

impl Ends {
    pub fn uniform(c: Condition) -> Self {
        Self { left: c, right: c }
    }

    pub fn uniform_condition(&self) -> Option<Condition> {
        (self.left == self.right).then_some(self.left)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryModel {
    name: String,
    dim: usize,
    ends: Ends,
    multiplicity: usize,
    traces: Vec<HeatTrace>,
    betti: Vec<usize>,
}

fn interval_factor(length: f64, ends: Ends, has_dx: bool) -> SpectralFactor {
    SpectralFactor::Interval {
        length,
        left: ends.left.endpoint(has_dx),
        right: ends.right.endpoint(has_dx),
    }
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(TorsionError::BadParameter(format!("{name} must be positive, got {x}")))
    }
}

fn ends_label(ends: Ends) -> String {
    match ends.uniform_condition() {
        Some(Condition::Relative) => "relative".into(),
        Some(Condition::Absolute) => "absolute".into(),
        None => format!("{:?}/{:?}", ends.left, ends.right).to_lowercase(),
    }
}

impl BoundaryModel {
    pub fn interval(length: f64, condition: Condition) -> Result<Self> {
        Self::interval_with_ends(length, Ends::uniform(condition))
    }

    pub fn interval_with_ends(length: f64, ends: Ends) -> Result<Self> {
        check_positive("interval length", length)?;
        let traces = vec![
            HeatTrace::factor(interval_factor(length, ends, false)),
            HeatTrace::factor(interval_factor(length, ends, true)),
        ];
        Ok(Self::from_traces(
            format!("interval(R={length}, {})", ends_label(ends)),
            1,
            ends,
            traces,
        ))
    }

    pub fn cylinder(length: f64, circumference: f64, condition: Condition) -> Result<Self> {
        Self::cylinder_with_ends(length, circumference, Ends::uniform(condition))
    }

    /// `[0, length] x S^1` with a circle of length `circumference`.
    pub fn cylinder_with_ends(length: f64, circumference: f64, ends: Ends) -> Result<Self> {
        check_positive("cylinder length", length)?;
        check_positive("circle length", circumference)?;
        let circle = HeatTrace::circle(circumference, 0.0);
        let plain = HeatTrace::factor(interval_factor(length, ends, false)).product(&circle);
        let with_dx = HeatTrace::factor(interval_factor(length, ends, true)).product(&circle);
        let traces = vec![plain.clone(), with_dx.sum(&plain), with_dx];
        Ok(Self::from_traces(
            format!("cylinder(R={length}, L={circumference}, {})", ends_label(ends)),
            2,
            ends,
            traces,
        ))
    }

    fn from_traces(name: String, dim: usize, ends: Ends, traces: Vec<HeatTrace>) -> Self {
        let betti = traces.iter().map(HeatTrace::kernel_dim).collect();
        Self {
            name,
            dim,
            ends,
            multiplicity: 1,
            traces,
            betti,
        }
    }

    /// Every eigenvalue repeated `m` times, as for a trivial rank-`m` bundle.
    pub fn with_multiplicity(mut self, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(TorsionError::BadParameter("multiplicity must be positive".into()));
        }
        self.traces = self.traces.iter().map(|h| h.scaled(m as i64)).collect();
        self.betti = self.traces.iter().map(HeatTrace::kernel_dim).collect();
        self.multiplicity = m;
        if m > 1 {
            self.name = format!("{} x{m}", self.name);
        }
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ends(&self) -> Ends {
        self.ends
    }

    pub fn multiplicity(&self) -> usize {
        self.multiplicity
    }

    pub fn trace(&self, k: usize) -> &HeatTrace {
        &self.traces[k]
    }

    pub fn betti(&self) -> &[usize] {
        &self.betti
    }

    /// `chi_B = sum (-1)^k b_(k,B)`.
    pub fn euler_characteristic(&self) -> i64 {
        euler_characteristics(&self.betti).chi
    }

    /// `chi'_B = sum (-1)^k k b_(k,B)`.
    pub fn derived_euler_characteristic(&self) -> i64 {
        euler_characteristics(&self.betti).derived
    }

    pub fn zeta(&self, k: usize, s: f64) -> Result<ZetaEval> {
        self.check_degree(k)?;
        mellin_zeta(&self.traces[k], s)
    }

    pub fn zeta_at_zero(&self, k: usize) -> Result<f64> {
        self.check_degree(k)?;
        let h = &self.traces[k];
        Ok(h.coefficient(0.0) - h.kernel_dim() as f64)
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

    fn zetas(&self, s: f64) -> Result<Vec<f64>> {
        (0..=self.dim).map(|k| self.zeta(k, s).map(|z| z.value)).collect()
    }
}

/// `sum (-1)^k zeta_(k,B)(s)`.
pub fn alternating_zeta_sum(model: &BoundaryModel, s: f64) -> Result<f64> {
    Ok(model
        .zetas(s)?
        .iter()
        .enumerate()
        .map(|(k, z)| sign(k) as f64 * z)
        .sum())
}

/// `sum (-1)^k k zeta_(k,B)(s)`.
pub fn weighted_zeta_sum(model: &BoundaryModel, s: f64) -> Result<f64> {
    Ok(model
        .zetas(s)?
        .iter()
        .enumerate()
        .map(|(k, z)| sign(k) as f64 * k as f64 * z)
        .sum())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropositionReport {
    pub relative: String,
    pub absolute: String,
    pub cases: Vec<IdentityCase>,
}

impl PropositionReport {
    pub fn all_pass(&self) -> bool {
        self.cases.iter().all(|c| c.pass)
    }

    pub fn max_discrepancy(&self) -> f64 {
        self.cases.iter().map(|c| c.discrepancy).fold(0.0, f64::max)
    }
}

/// On a pair of models differing only in the boundary condition, checks at
/// every point of [`IDENTITY_POINTS`]:
/// `zeta_(k,R) = zeta_(n-k,A)`,
/// `sum (-1)^k k zeta_(k,R) = (-1)^(n-1) sum (-1)^k k zeta_(k,A)` and
/// `sum (-1)^k zeta_(k,R) = sum (-1)^k zeta_(k,A) = 0`.
pub fn proposition_check(
    relative: &BoundaryModel,
    absolute: &BoundaryModel,
    tol: f64,
) -> Result<PropositionReport> {
    if relative.ends() != Ends::uniform(Condition::Relative)
        || absolute.ends() != Ends::uniform(Condition::Absolute)
        || relative.dim() != absolute.dim()
    {
        return Err(TorsionError::BadParameter(
            "proposition check needs a relative and an absolute model of the same geometry".into(),
        ));
    }
    let n = relative.dim();
    let mut cases = Vec::new();
    for &s in &IDENTITY_POINTS {
        let zr = relative.zetas(s)?;
        let za = absolute.zetas(s)?;
        for k in 0..=n {
            push_case(&mut cases, format!("duality R k={k}"), s, zr[k], za[n - k], tol);
        }
        let weighted = |z: &[f64]| -> f64 {
            z.iter()
                .enumerate()
                .map(|(k, v)| sign(k) as f64 * k as f64 * v)
                .sum()
        };
        let alternating = |z: &[f64]| -> f64 { z.iter().enumerate().map(|(k, v)| sign(k) as f64 * v).sum() };
        push_case(
            &mut cases,
            "weighted sign law".into(),
            s,
            weighted(&zr),
            sign(n + 1) as f64 * weighted(&za),
            tol,
        );
        push_case(&mut cases, "alternating sum R".into(), s, alternating(&zr), 0.0, tol);
        push_case(&mut cases, "alternating sum A".into(), s, alternating(&za), 0.0, tol);
    }
    Ok(PropositionReport {
        relative: relative.name().to_string(),
        absolute: absolute.name().to_string(),
        cases,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTorsionReport {
    pub model: String,
    pub dim: usize,
    pub beta: Vec<f64>,
    pub zeta0: Vec<f64>,
    pub betti: Vec<usize>,
    pub residues: Vec<f64>,
    pub euler_characteristic: i64,
    pub derived_euler_characteristic: i64,
    /// `sum (-1)^k k zeta_(k,B)(0)`.
    pub weighted_zeta0: f64,
    pub log_residue_torsion: f64,
    /// `lambda chi_B + mu n chi_B / 2` when `beta = lambda + mu k`.
    pub closed_form: Option<f64>,
}

/// `1/2 sum (-1)^(k+1) beta_k res(log Delta_(k,B))` with
/// `res = -2 (zeta_(k,B)(0) + b_(k,B))`.
pub fn boundary_residue_torsion(model: &BoundaryModel, beta: &BetaWeight) -> Result<BoundaryTorsionReport> {
    beta.check_len(model.dim())?;
    let n = model.dim();
    let zeta0: Vec<f64> = (0..=n).map(|k| model.zeta_at_zero(k)).collect::<Result<_>>()?;
    let residues: Vec<f64> = (0..=n)
        .map(|k| -2.0 * (zeta0[k] + model.betti()[k] as f64))
        .collect();
    let log_residue_torsion = 0.5
        * (0..=n)
            .map(|k| sign(k + 1) as f64 * beta.0[k] * residues[k])
            .sum::<f64>();
    let weighted_zeta0 = (0..=n).map(|k| sign(k) as f64 * k as f64 * zeta0[k]).sum();
    let chi = model.euler_characteristic();
    Ok(BoundaryTorsionReport {
        model: model.name().to_string(),
        dim: n,
        beta: beta.0.clone(),
        zeta0,
        betti: model.betti().to_vec(),
        residues,
        euler_characteristic: chi,
        derived_euler_characteristic: model.derived_euler_characteristic(),
        weighted_zeta0,
        log_residue_torsion,
        closed_form: predicted_residue(beta, n, chi),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "geometry", rename_all = "snake_case")]
pub enum Partition {
    /// `[0, length] = [0, cut] u [cut, length]`, glued along a point.
    Interval {
        length: f64,
        cut: f64,
        condition: Condition,
    },
    /// `[0, length] x S^1` cut along `{cut} x S^1`.
    Cylinder {
        length: f64,
        circumference: f64,
        cut: f64,
        condition: Condition,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GluingReport {
    pub whole: String,
    pub pieces: [String; 2],
    pub interface: String,
    pub lhs: f64,
    pub piece_torsions: [f64; 2],
    pub interface_torsion: f64,
    pub interface_euler_characteristic: i64,
    pub rhs: f64,
    pub discrepancy: f64,
    pub pass: bool,
}

/// `log T^(res,k)_(X,B) = log T_(X1) + log T_(X2) + log T_Y + chi(Y) / 2`,
/// with relative conditions on `Y` in both pieces.
pub fn gluing_check(partition: &Partition, tol: f64) -> Result<GluingReport> {
    let (length, cut) = match *partition {
        Partition::Interval { length, cut, .. } | Partition::Cylinder { length, cut, .. } => (length, cut),
    };
    if !(length.is_finite() && length > 0.0) {
        return Err(TorsionError::UnsupportedPartition(format!("length must be positive, got {length}")));
    }
    if !(cut > 0.0 && cut < length) {
        return Err(TorsionError::UnsupportedPartition(format!(
            "cut {cut} does not split [0, {length}] into two nonempty pieces"
        )));
    }
    let (whole, first, second, interface) = match *partition {
        Partition::Interval { condition, .. } => (
            BoundaryModel::interval(length, condition)?,
            BoundaryModel::interval_with_ends(
                cut,
                Ends {
                    left: condition,
                    right: Condition::Relative,
                },
            )?,
            BoundaryModel::interval_with_ends(
                length - cut,
                Ends {
                    left: Condition::Relative,
                    right: condition,
                },
            )?,
            ClosedModel::point(1),
        ),
        Partition::Cylinder {
            circumference,
            condition,
            ..
        } => (
            BoundaryModel::cylinder(length, circumference, condition)?,
            BoundaryModel::cylinder_with_ends(
                cut,
                circumference,
                Ends {
                    left: condition,
                    right: Condition::Relative,
                },
            )?,
            BoundaryModel::cylinder_with_ends(
                length - cut,
                circumference,
                Ends {
                    left: Condition::Relative,
                    right: condition,
                },
            )?,
            ClosedModel::circle(circumference, 0.0, 1)?,
        ),
    };
    let n = whole.dim();
    let k = BetaWeight::degrees(n);
    let lhs = boundary_residue_torsion(&whole, &k)?.log_residue_torsion;
    let t1 = boundary_residue_torsion(&first, &k)?.log_residue_torsion;
    let t2 = boundary_residue_torsion(&second, &k)?.log_residue_torsion;
    let ty = residue_torsion(&interface, &BetaWeight::degrees(n - 1))?.log_residue_torsion;
    let chi_y = interface.euler_characteristic();
    let rhs = t1 + t2 + ty + 0.5 * chi_y as f64;
    let discrepancy = (lhs - rhs).abs();
    Ok(GluingReport {
        whole: whole.name().to_string(),
        pieces: [first.name().to_string(), second.name().to_string()],
        interface: interface.name().to_string(),
        lhs,
        piece_torsions: [t1, t2],
        interface_torsion: ty,
        interface_euler_characteristic: chi_y,
        rhs,
        discrepancy,
        pass: discrepancy <= tol,
    })
}
