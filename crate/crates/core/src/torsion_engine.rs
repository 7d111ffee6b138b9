//! Torsion of finite twisted complexes.
//!
//! The Laplacian formula `log T = 1/2 sum_k (-1)^(k+1) k tr log Delta_k` is
//! checked against an independent pivot-minor determinant computation. The
//! module also hosts the weight classification, Euler characteristics, and the
//! finite-dimensional metric-variation identity.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TorsionError};
use crate::hodge_core::{
    betti, codifferential, coboundary, laplacian, laplacian_spectrum, symmetric_eigen, tr_log,
    ChainMetric,
};
use crate::twisted_complex::{max_abs, sign, TwistedComplex};

const RECURRENCE_TOL: f64 = 1e-12;

/// Per-degree weights `beta_0..beta_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaWeight(pub Vec<f64>);

impl BetaWeight {
    /// `(1, ..., 1)` of length `n + 1`.
    pub fn ones(n: usize) -> Self {
        Self(vec![1.0; n + 1])
    }

    /// `(0, 1, ..., n)`.
    pub fn degrees(n: usize) -> Self {
        Self((0..=n).map(|k| k as f64).collect())
    }

    /// `lambda * 1 + mu * k`.
    pub fn linear(n: usize, lambda: f64, mu: f64) -> Self {
        Self((0..=n).map(|k| lambda + mu * k as f64).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn check_len(&self, n: usize) -> Result<()> {
        if self.0.len() != n + 1 {
            return Err(TorsionError::ShapeMismatch(format!(
                "weight has length {}, expected {}",
                self.0.len(),
                n + 1
            )));
        }
        Ok(())
    }
}

/// `1/2 sum_k (-1)^(k+1) beta_k t_k`.
pub fn generalized_log_torsion(traces: &[f64], beta: &BetaWeight) -> Result<f64> {
    if traces.len() != beta.len() {
        return Err(TorsionError::ShapeMismatch(format!(
            "{} traces for {} weights",
            traces.len(),
            beta.len()
        )));
    }
    Ok(0.5
        * traces
            .iter()
            .zip(&beta.0)
            .enumerate()
            .map(|(k, (t, b))| -(sign(k) as f64) * b * t)
            .sum::<f64>())
}

fn ensure_acyclic(complex: &TwistedComplex, metric: &ChainMetric) -> Result<()> {
    for (degree, &dim) in betti(complex, metric)?.iter().enumerate() {
        if dim > 0 {
            return Err(TorsionError::NotAcyclic { degree, dim });
        }
    }
    Ok(())
}

/// `tr log Delta_k` for every degree.
pub fn log_traces(complex: &TwistedComplex, metric: &ChainMetric, strict: bool) -> Result<Vec<f64>> {
    (0..=complex.dimension())
        .map(|k| tr_log(&laplacian_spectrum(complex, metric, k)?, strict))
        .collect()
}

/// Log Reidemeister torsion via the Laplacian formula.
pub fn log_reidemeister(complex: &TwistedComplex, metric: &ChainMetric) -> Result<f64> {
    ensure_acyclic(complex, metric)?;
    let traces = log_traces(complex, metric, true)?;
    generalized_log_torsion(&traces, &BetaWeight::degrees(complex.dimension()))
}

/// Log torsion of an acyclic complex in its cell basis, from alternating
/// pivot minors: `sum_k (-1)^(k+1) log |det A_k|`.
///
/// Degrees are processed from the top down. In degree k the columns of `d_k`
/// are those not used as pivot rows of `d_(k+1)`; full-pivot elimination picks
/// the rows of `d_k` that make the square minor `A_k` invertible.
pub fn determinant_oracle(complex: &TwistedComplex) -> Result<f64> {
    let n = complex.dimension();
    if n == 0 {
        if complex.chain_dim(0) > 0 {
            return Err(TorsionError::NotAcyclic {
                degree: 0,
                dim: complex.chain_dim(0),
            });
        }
        return Ok(0.0);
    }
    // columns of d_n: all of C_n
    let mut columns: Vec<usize> = (0..complex.chain_dim(n)).collect();
    let mut total = 0.0;
    for k in (1..=n).rev() {
        let d = complex.boundary(k);
        let sub = d.select_columns(columns.iter());
        let rows = pivot_rows(&sub, k)?;
        if k == 1 && rows.len() != complex.chain_dim(0) {
            return Err(TorsionError::NotAcyclic {
                degree: 0,
                dim: complex.chain_dim(0) - rows.len(),
            });
        }
        let minor = sub.select_rows(rows.iter());
        let log_det = log_abs_det(&minor).ok_or(TorsionError::PivotFailure { degree: k })?;
        total += -(sign(k) as f64) * log_det;
        let mut used = vec![false; complex.chain_dim(k - 1)];
        for &r in &rows {
            used[r] = true;
        }
        columns = (0..complex.chain_dim(k - 1)).filter(|&i| !used[i]).collect();
    }
    Ok(total)
}

/// Rows selected by full-pivot Gaussian elimination; fails unless the
/// matrix has full column rank.
fn pivot_rows(m: &DMatrix<f64>, degree: usize) -> Result<Vec<usize>> {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return Ok(Vec::new());
    }
    if cols > rows {
        return Err(TorsionError::NotAcyclic {
            degree,
            dim: cols - rows,
        });
    }
    let mut a = m.clone();
    let mut row_perm: Vec<usize> = (0..rows).collect();
    let scale = max_abs(m).max(f64::MIN_POSITIVE);
    for step in 0..cols {
        let mut best = (step, step, 0.0);
        for i in step..rows {
            for j in step..cols {
                let v = a[(i, j)].abs();
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        if best.2 <= 1e-10 * scale {
            // rank deficient: some chain in degree `degree` is a cycle
            return Err(TorsionError::NotAcyclic {
                degree,
                dim: cols - step,
            });
        }
        a.swap_rows(step, best.0);
        row_perm.swap(step, best.0);
        a.swap_columns(step, best.1);
        let pivot = a[(step, step)];
        for i in (step + 1)..rows {
            let factor = a[(i, step)] / pivot;
            if factor != 0.0 {
                for j in step..cols {
                    let v = a[(step, j)];
                    a[(i, j)] -= factor * v;
                }
            }
        }
    }
    let mut selected: Vec<usize> = row_perm[..cols].to_vec();
    selected.sort_unstable();
    Ok(selected)
}

/// `log |det m|` by partial-pivot LU; `None` if singular.
fn log_abs_det(m: &DMatrix<f64>) -> Option<f64> {
    let n = m.nrows();
    let mut a = m.clone();
    let mut acc = 0.0;
    for col in 0..n {
        let (p, v) = (col..n)
            .map(|i| (i, a[(i, col)].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))?;
        if v == 0.0 {
            return None;
        }
        a.swap_rows(col, p);
        let pivot = a[(col, col)];
        acc += pivot.abs().ln();
        for i in (col + 1)..n {
            let factor = a[(i, col)] / pivot;
            for j in col..n {
                let x = a[(col, j)];
                a[(i, j)] -= factor * x;
            }
        }
    }
    Some(acc)
}

/// Euler characteristic and derived Euler characteristic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EulerCharacteristics {
    pub chi: i64,
    pub derived: i64,
}

/// `chi = sum (-1)^k b_k`, `chi' = sum (-1)^k k b_k`.
pub fn euler_characteristics(b: &[usize]) -> EulerCharacteristics {
    let chi = b.iter().enumerate().map(|(k, &x)| sign(k) * x as i64).sum();
    let derived = b
        .iter()
        .enumerate()
        .map(|(k, &x)| sign(k) * k as i64 * x as i64)
        .sum();
    EulerCharacteristics { chi, derived }
}

impl EulerCharacteristics {
    /// `chi' (1 + (-1)^n) == n chi`, valid when `b_k = b_(n-k)`.
    pub fn duality_relation_holds(&self, n: usize) -> bool {
        self.derived * (1 + sign(n)) == n as i64 * self.chi
    }
}

/// Whether a weight satisfies `beta_(k+1) - 2 beta_k + beta_(k-1) = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaClassification {
    pub satisfies_recurrence: bool,
    /// `beta = lambda * 1 + mu * k` when the recurrence holds.
    pub lambda: f64,
    pub mu: f64,
    /// Second differences `beta_(k+1) - 2 beta_k + beta_(k-1)`, `k = 1..n-1`.
    pub residual: Vec<f64>,
}

pub fn classify_beta(beta: &BetaWeight) -> BetaClassification {
    let b = &beta.0;
    let residual: Vec<f64> = b.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0]).collect();
    let satisfies_recurrence = residual.iter().all(|r| r.abs() <= RECURRENCE_TOL);
    let lambda = b.first().copied().unwrap_or(0.0);
    let mu = if b.len() >= 2 { b[1] - b[0] } else { 0.0 };
    BetaClassification {
        satisfies_recurrence,
        lambda,
        mu,
        residual,
    }
}

/// Coefficient of `beta_j gamma_i` in
/// `sum_k (-1)^(k+1) beta_k (-gamma_(k+1) - 2 gamma_k - gamma_(k-1))`,
/// obtained by expanding the per-degree sums term by term. Indexed
/// `[i][j]` for `i, j in 0..=n`.
pub fn telescoped_gamma_coefficients(n: usize) -> Vec<Vec<i64>> {
    let mut coeff = vec![vec![0i64; n + 1]; n + 1];
    for k in 0..=n {
        let outer = -sign(k);
        for (offset, weight) in [(1i64, -1i64), (0, -2), (-1, -1)] {
            let i = k as i64 + offset;
            if (0..=n as i64).contains(&i) {
                coeff[i as usize][k] += outer * weight;
            }
        }
    }
    coeff
}

/// `(-1)^(i+1) (e_(i+1) - 2 e_i + e_(i-1))` with out-of-range weights zero:
/// the second-difference pattern the telescoped sum must reduce to.
pub fn second_difference_coefficients(n: usize) -> Vec<Vec<i64>> {
    let mut coeff = vec![vec![0i64; n + 1]; n + 1];
    for (i, row) in coeff.iter_mut().enumerate() {
        let s = -sign(i);
        row[i] += -2 * s;
        if i >= 1 {
            row[i - 1] += s;
        }
        if i < n {
            row[i + 1] += s;
        }
    }
    coeff
}

/// A smooth path of chain metrics `u -> h(u)`.
pub trait MetricPath {
    fn metric(&self, u: f64) -> Result<ChainMetric>;
}

impl<F> MetricPath for F
where
    F: Fn(f64) -> Result<ChainMetric>,
{
    fn metric(&self, u: f64) -> Result<ChainMetric> {
        self(u)
    }
}

/// `h_k(u) = h_k^(1/2) exp(u S_k) h_k^(1/2)` for symmetric generators `S_k`.
#[derive(Clone, Debug)]
pub struct ExponentialPath {
    base_sqrt: Vec<DMatrix<f64>>,
    generators: Vec<(Vec<f64>, DMatrix<f64>)>,
}

impl ExponentialPath {
    pub fn new(base: &ChainMetric, generators: Vec<DMatrix<f64>>) -> Result<Self> {
        if generators.len() != base.degrees() {
            return Err(TorsionError::ShapeMismatch(format!(
                "{} generators for {} metric degrees",
                generators.len(),
                base.degrees()
            )));
        }
        let mut base_sqrt = Vec::new();
        let mut eig = Vec::new();
        for (h, s) in base.blocks().iter().zip(generators) {
            if s.shape() != h.shape() {
                return Err(TorsionError::ShapeMismatch("generator shape".into()));
            }
            let (hv, hw) = symmetric_eigen(h)?;
            let mut sq = hw.clone();
            for j in 0..hv.len() {
                sq.column_mut(j).scale_mut(hv[j].sqrt());
            }
            base_sqrt.push(sq * hw.transpose());
            let sym = (&s + s.transpose()) * 0.5;
            eig.push(symmetric_eigen(&sym)?);
        }
        Ok(Self {
            base_sqrt,
            generators: eig,
        })
    }
}

impl MetricPath for ExponentialPath {
    fn metric(&self, u: f64) -> Result<ChainMetric> {
        let blocks = self
            .base_sqrt
            .iter()
            .zip(&self.generators)
            .map(|(b, (values, vectors))| {
                let mut scaled = vectors.clone();
                for j in 0..values.len() {
                    scaled.column_mut(j).scale_mut((u * values[j]).exp());
                }
                let e = scaled * vectors.transpose();
                let m = b * e * b;
                (&m + m.transpose()) * 0.5
            })
            .collect();
        ChainMetric::new(blocks)
    }
}

/// Outcome of the finite-dimensional variation identity at one step size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationReport {
    /// `gamma_k = tr(P_k delta_k d_k alpha_k)`.
    pub gammas: Vec<f64>,
    /// `tr alpha_k`.
    pub trace_alphas: Vec<f64>,
    /// Central difference of `2 log T^(tr, beta)`.
    pub lhs: f64,
    /// Telescoped trace formula.
    pub rhs: f64,
    pub discrepancy: f64,
    /// Largest `max |Delta_dot - four-term formula|` over degrees.
    pub laplacian_derivative_residual: f64,
    pub step: f64,
    /// Same quantities at half the step.
    pub half_step_discrepancy: f64,
    pub half_step_laplacian_residual: f64,
    /// `discrepancy / half_step_discrepancy`; `None` below the noise floor.
    pub convergence_ratio: Option<f64>,
}

struct VariationSample {
    gammas: Vec<f64>,
    trace_alphas: Vec<f64>,
    lhs: f64,
    rhs: f64,
    laplacian_residual: f64,
}

fn weighted_log_trace(complex: &TwistedComplex, metric: &ChainMetric, beta: &BetaWeight) -> Result<f64> {
    let traces = log_traces(complex, metric, true)?;
    Ok(2.0 * generalized_log_torsion(&traces, beta)?)
}

fn variation_sample(
    complex: &TwistedComplex,
    path: &dyn MetricPath,
    beta: &BetaWeight,
    u0: f64,
    step: f64,
) -> Result<VariationSample> {
    let n = complex.dimension();
    let plus = path.metric(u0 + step)?;
    let minus = path.metric(u0 - step)?;
    let here = path.metric(u0)?;
    ensure_acyclic(complex, &here)?;

    let lhs = (weighted_log_trace(complex, &plus, beta)? - weighted_log_trace(complex, &minus, beta)?)
        / (2.0 * step);

    let alphas: Vec<DMatrix<f64>> = (0..=n)
        .map(|k| {
            let hdot = (plus.block(k) - minus.block(k)) / (2.0 * step);
            here.block(k)
                .clone()
                .cholesky()
                .expect("validated metric")
                .solve(&hdot)
        })
        .collect();
    let trace_alphas: Vec<f64> = alphas.iter().map(|a| a.trace()).collect();

    let mut gammas = Vec::with_capacity(n + 1);
    let mut laplacian_residual = 0.0_f64;
    for k in 0..=n {
        let delta = laplacian(complex, &here, k)?;
        let inverse = delta
            .clone()
            .try_inverse()
            .ok_or(TorsionError::NotInvertible { kernel_dim: 1 })?;
        let dk = coboundary(complex, k);
        let deltak = codifferential(complex, &here, k);
        gammas.push((&inverse * &deltak * &dk * &alphas[k]).trace());

        // four-term formula for the derivative of the Laplacian
        let mut formula = -(&alphas[k] * &deltak * &dk);
        if k < n {
            formula += &deltak * &alphas[k + 1] * &dk;
        }
        if k > 0 {
            let dprev = coboundary(complex, k - 1);
            let deltaprev = codifferential(complex, &here, k - 1);
            formula -= &dprev * &alphas[k - 1] * &deltaprev;
            formula += &dprev * &deltaprev * &alphas[k];
        }
        let fd = (laplacian(complex, &plus, k)? - laplacian(complex, &minus, k)?) / (2.0 * step);
        laplacian_residual = laplacian_residual.max(max_abs(&(fd - formula)));
    }

    let gamma = |i: i64| -> f64 {
        if (0..=n as i64).contains(&i) {
            gammas[i as usize]
        } else {
            0.0
        }
    };
    let trace_alpha = |i: usize| -> f64 { trace_alphas.get(i).copied().unwrap_or(0.0) };
    let rhs = (0..=n)
        .map(|k| {
            let ki = k as i64;
            let bracket = trace_alpha(k) + trace_alpha(k + 1)
                - gamma(ki + 1)
                - 2.0 * gamma(ki)
                - gamma(ki - 1);
            -(sign(k) as f64) * beta.0[k] * bracket
        })
        .sum();

    Ok(VariationSample {
        gammas,
        trace_alphas,
        lhs,
        rhs,
        laplacian_residual,
    })
}

/// Checks the telescoped variation formula for `2 d/du log T^(tr, beta)`
/// against a central difference, at `step` and `step / 2`.
pub fn variation_check(
    complex: &TwistedComplex,
    path: &dyn MetricPath,
    beta: &BetaWeight,
    u0: f64,
    step: f64,
) -> Result<VariationReport> {
    beta.check_len(complex.dimension())?;
    if !(step > 0.0) {
        return Err(TorsionError::BadParameter("step must be positive".into()));
    }
    let full = variation_sample(complex, path, beta, u0, step)?;
    let half = variation_sample(complex, path, beta, u0, step / 2.0)?;
    let discrepancy = (full.lhs - full.rhs).abs();
    let half_disc = (half.lhs - half.rhs).abs();

    // roundoff of a central difference is ~ eps * |f| / step
    let noise = 50.0 * f64::EPSILON * (1.0 + full.lhs.abs()) / step;
    let convergence_ratio = if discrepancy > noise {
        Some(discrepancy / half_disc.max(f64::MIN_POSITIVE))
    } else {
        None
    };
    if let Some(ratio) = convergence_ratio {
        if !(2.5..=6.0).contains(&ratio) {
            return Err(TorsionError::StepTooLarge { ratio });
        }
    }
    Ok(VariationReport {
        gammas: full.gammas,
        trace_alphas: full.trace_alphas,
        lhs: full.lhs,
        rhs: full.rhs,
        discrepancy,
        laplacian_derivative_residual: full.laplacian_residual,
        step,
        half_step_discrepancy: half_disc,
        half_step_laplacian_residual: half.laplacian_residual,
        convergence_ratio,
    })
}

/// Numerical rank of the gamma vectors collected over several metric paths
/// (degrees where gamma is forced, `k = 0` and `k = n`, are dropped).
pub fn gamma_rank(
    complex: &TwistedComplex,
    paths: &[&dyn MetricPath],
    u0: f64,
    step: f64,
) -> Result<usize> {
    let n = complex.dimension();
    if n < 2 {
        return Ok(0);
    }
    let beta = BetaWeight::degrees(n);
    let rows: Vec<Vec<f64>> = paths
        .iter()
        .map(|p| variation_sample(complex, *p, &beta, u0, step).map(|s| s.gammas[1..n].to_vec()))
        .collect::<Result<_>>()?;
    let width = n - 1;
    let m = DMatrix::from_fn(rows.len(), width, |i, j| rows[i][j]);
    let gram = m.transpose() * &m;
    let (values, _) = symmetric_eigen(&gram)?;
    let top = values.iter().fold(0.0_f64, |a, &b| a.max(b));
    Ok(values.iter().filter(|&&v| v > 1e-10 * top.max(1e-300)).count())
}
