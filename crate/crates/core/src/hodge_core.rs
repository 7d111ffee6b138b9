//! Combinatorial Hodge Laplacians and their spectral calculus.
//!
//! Conventions: chains carry the boundary `d_k : C_k -> C_(k-1)`; the
//! coboundary is `d_k := d_(k+1)^T : C_k -> C_(k+1)` in the cell basis, and
//! its adjoint for the inner products `h_k` is `delta_k = h_k^-1 d_k^T h_(k+1)`.
//! The Laplacian is `Delta_k = delta_k d_k + d_(k-1) delta_(k-1)`; it is
//! self-adjoint for `h_k`, so spectra are computed from the symmetric matrix
//! `h^(1/2) Delta h^(-1/2)`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Result, TorsionError};
use crate::twisted_complex::{max_abs, TwistedComplex};

const JACOBI_MAX_SWEEPS: usize = 100;
const KERNEL_REL_TOL: f64 = 1e-9;
const EIGEN_MATCH_REL_TOL: f64 = 1e-7;

/// Per-degree inner products on the chain spaces.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainMetric {
    blocks: Vec<DMatrix<f64>>,
}

impl ChainMetric {
    /// Validates symmetry (to 1e-12) and positive definiteness of every block.
    pub fn new(blocks: Vec<DMatrix<f64>>) -> Result<Self> {
        for (k, h) in blocks.iter().enumerate() {
            if h.nrows() != h.ncols() {
                return Err(TorsionError::ShapeMismatch(format!(
                    "metric block {k} is not square"
                )));
            }
            let asym = max_abs(&(h - h.transpose()));
            if asym > 1e-12 * (1.0 + max_abs(h)) {
                return Err(TorsionError::BadParameter(format!(
                    "metric block {k} is not symmetric (asymmetry {asym:e})"
                )));
            }
            if h.nrows() > 0 {
                let (values, _) = symmetric_eigen(h)?;
                if values[0] <= 0.0 {
                    return Err(TorsionError::BadParameter(format!(
                        "metric block {k} is not positive definite (min eigenvalue {:e})",
                        values[0]
                    )));
                }
            }
        }
        Ok(Self { blocks })
    }

    pub fn identity(complex: &TwistedComplex) -> Self {
        Self {
            blocks: (0..=complex.dimension())
                .map(|k| {
                    let d = complex.chain_dim(k);
                    DMatrix::identity(d, d)
                })
                .collect(),
        }
    }

    pub fn block(&self, k: usize) -> &DMatrix<f64> {
        &self.blocks[k]
    }

    pub fn blocks(&self) -> &[DMatrix<f64>] {
        &self.blocks
    }

    pub fn degrees(&self) -> usize {
        self.blocks.len()
    }

    fn check_against(&self, complex: &TwistedComplex) -> Result<()> {
        if self.blocks.len() != complex.dimension() + 1 {
            return Err(TorsionError::ShapeMismatch(format!(
                "metric has {} degrees, complex has {}",
                self.blocks.len(),
                complex.dimension() + 1
            )));
        }
        for (k, h) in self.blocks.iter().enumerate() {
            if h.nrows() != complex.chain_dim(k) {
                return Err(TorsionError::ShapeMismatch(format!(
                    "metric block {k} has size {}, chain space has dimension {}",
                    h.nrows(),
                    complex.chain_dim(k)
                )));
            }
        }
        Ok(())
    }
}

/// Coboundary `d_k = (d_(k+1))^T : C_k -> C_(k+1)`. Zero-row matrix for `k = n`.
pub fn coboundary(complex: &TwistedComplex, k: usize) -> DMatrix<f64> {
    complex.boundary(k + 1).transpose()
}

/// Metric adjoint `delta_k = h_k^-1 d_k^T h_(k+1) : C_(k+1) -> C_k`.
pub fn codifferential(complex: &TwistedComplex, metric: &ChainMetric, k: usize) -> DMatrix<f64> {
    let n = complex.dimension();
    let d = coboundary(complex, k);
    if k >= n {
        return d.transpose();
    }
    let h_k = metric.block(k);
    let h_next = metric.block(k + 1);
    let rhs = d.transpose() * h_next;
    solve_spd(h_k, &rhs)
}

/// `Delta_k = delta_k d_k + d_(k-1) delta_(k-1)`.
pub fn laplacian(complex: &TwistedComplex, metric: &ChainMetric, k: usize) -> Result<DMatrix<f64>> {
    metric.check_against(complex)?;
    if k > complex.dimension() {
        return Err(TorsionError::ShapeMismatch(format!(
            "degree {k} exceeds complex dimension {}",
            complex.dimension()
        )));
    }
    let up = codifferential(complex, metric, k) * coboundary(complex, k);
    if k == 0 {
        return Ok(up);
    }
    let down = coboundary(complex, k - 1) * codifferential(complex, metric, k - 1);
    Ok(up + down)
}

/// Eigen-decomposition of an `h`-self-adjoint operator.
#[derive(Clone, Debug)]
pub struct SpectralData {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Columns are `h`-orthonormal eigenvectors.
    pub eigenvectors: DMatrix<f64>,
    pub kernel_dim: usize,
    metric: DMatrix<f64>,
    kernel_threshold: f64,
}

impl SpectralData {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn kernel_threshold(&self) -> f64 {
        self.kernel_threshold
    }

    pub fn is_kernel(&self, lambda: f64) -> bool {
        lambda < self.kernel_threshold
    }

    /// `f(Delta) = V f(Lambda) V^T h`, with `f` applied eigenvalue-wise.
    pub fn apply<F>(&self, f: F) -> DMatrix<f64>
    where
        F: Fn(f64) -> f64,
    {
        let n = self.dim();
        let mut scaled = self.eigenvectors.clone();
        for j in 0..n {
            let fj = f(self.eigenvalues[j]);
            scaled.column_mut(j).scale_mut(fj);
        }
        scaled * self.eigenvectors.transpose() * &self.metric
    }

    /// Orthogonal (for `h`) projector onto the kernel.
    pub fn kernel_projector(&self) -> DMatrix<f64> {
        let thr = self.kernel_threshold;
        self.apply(|l| if l < thr { 1.0 } else { 0.0 })
    }
}

/// Symmetric eigen-decomposition by cyclic Jacobi rotations.
///
/// Returns ascending eigenvalues and the orthogonal matrix of eigenvectors.
pub fn symmetric_eigen(a: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    let mut m = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    if n <= 1 {
        return Ok((m.diagonal().iter().copied().collect(), v));
    }
    let scale = max_abs(a).max(f64::MIN_POSITIVE);
    let mut converged = false;
    let mut off = 0.0;
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)] * m[(p, q)];
            }
        }
        off = off.sqrt();
        if off <= 1e-15 * scale * n as f64 {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(TorsionError::ConvergenceFailure {
            sweeps: JACOBI_MAX_SWEEPS,
            off,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok((values, vectors))
}

/// Symmetric square root and inverse square root of an SPD matrix.
fn spd_sqrt_pair(h: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let (values, vectors) = symmetric_eigen(h)?;
    let n = h.nrows();
    let mut sq = vectors.clone();
    let mut isq = vectors.clone();
    for j in 0..n {
        let r = values[j].sqrt();
        sq.column_mut(j).scale_mut(r);
        isq.column_mut(j).scale_mut(1.0 / r);
    }
    Ok((&sq * vectors.transpose(), &isq * vectors.transpose()))
}

fn solve_spd(h: &DMatrix<f64>, rhs: &DMatrix<f64>) -> DMatrix<f64> {
    if h.is_identity(0.0) {
        return rhs.clone();
    }
    h.clone()
        .cholesky()
        .expect("metric blocks are validated positive definite")
        .solve(rhs)
}

/// Spectral decomposition of `delta`, self-adjoint for the inner product `h`.
pub fn eigendecompose(delta: &DMatrix<f64>, h: &DMatrix<f64>) -> Result<SpectralData> {
    if delta.shape() != h.shape() || delta.nrows() != delta.ncols() {
        return Err(TorsionError::ShapeMismatch(format!(
            "operator {:?} vs metric {:?}",
            delta.shape(),
            h.shape()
        )));
    }
    let (eigenvalues, eigenvectors) = if h.is_identity(0.0) {
        let sym = (delta + delta.transpose()) * 0.5;
        symmetric_eigen(&sym)?
    } else {
        let (sq, isq) = spd_sqrt_pair(h)?;
        let s = &sq * delta * &isq;
        let sym = (&s + s.transpose()) * 0.5;
        let (values, w) = symmetric_eigen(&sym)?;
        (values, isq * w)
    };
    let lambda_max = eigenvalues.iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
    let kernel_threshold = KERNEL_REL_TOL * lambda_max.max(1.0);
    let kernel_dim = eigenvalues.iter().filter(|&&l| l < kernel_threshold).count();
    Ok(SpectralData {
        eigenvalues,
        eigenvectors,
        kernel_dim,
        metric: h.clone(),
        kernel_threshold,
    })
}

/// Laplacian of degree k together with its spectral data.
pub fn laplacian_spectrum(
    complex: &TwistedComplex,
    metric: &ChainMetric,
    k: usize,
) -> Result<SpectralData> {
    let delta = laplacian(complex, metric, k)?;
    eigendecompose(&delta, metric.block(k))
}

/// `Delta^z` by functional calculus, with the kernel sent to zero.
pub fn complex_power(spec: &SpectralData, z: Complex64) -> DMatrix<Complex64> {
    let n = spec.dim();
    let mut scaled = spec.eigenvectors.map(|x| Complex64::new(x, 0.0));
    for j in 0..n {
        let l = spec.eigenvalues[j];
        let f = if spec.is_kernel(l) {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(l, 0.0).powc(z)
        };
        for v in scaled.column_mut(j).iter_mut() {
            *v *= f;
        }
    }
    let right = (spec.eigenvectors.transpose() * &spec.metric).map(|x| Complex64::new(x, 0.0));
    scaled * right
}

/// Real powers `Delta^x`, kernel sent to zero.
pub fn real_power(spec: &SpectralData, x: f64) -> DMatrix<f64> {
    let thr = spec.kernel_threshold;
    spec.apply(|l| if l < thr { 0.0 } else { l.powf(x) })
}

/// `log Delta` on the nonzero spectrum, zero on the kernel.
pub fn log_op(spec: &SpectralData) -> DMatrix<f64> {
    let thr = spec.kernel_threshold;
    spec.apply(|l| if l < thr { 0.0 } else { l.ln() })
}

/// `sum_(lambda > 0) log lambda`. In strict mode a kernel is an error.
pub fn tr_log(spec: &SpectralData, strict: bool) -> Result<f64> {
    if strict && spec.kernel_dim > 0 {
        return Err(TorsionError::NotInvertible {
            kernel_dim: spec.kernel_dim,
        });
    }
    Ok(spec
        .eigenvalues
        .iter()
        .filter(|&&l| !spec.is_kernel(l))
        .map(|l| l.ln())
        .sum())
}

/// Kernel dimensions of all Laplacians, `b_k = dim ker Delta_k`.
pub fn betti(complex: &TwistedComplex, metric: &ChainMetric) -> Result<Vec<usize>> {
    (0..=complex.dimension())
        .map(|k| laplacian_spectrum(complex, metric, k).map(|s| s.kernel_dim))
        .collect()
}

/// Closed/coclosed splitting of a positive eigenspace of `Delta_k`.
#[derive(Clone, Debug)]
pub struct EigenspaceSplit {
    pub degree: usize,
    pub eigenvalue: f64,
    pub multiplicity: usize,
    /// Dimension of the closed part `{w : d w = 0}` (image of `d_(k-1)`).
    pub f_mult: usize,
    /// Dimension of the coclosed part `{w : delta w = 0}`.
    pub g_mult: usize,
    /// `d_(k-1) delta_(k-1) / lambda` in eigenbasis coordinates.
    pub closed_projector: DMatrix<f64>,
    /// `delta_k d_k / lambda` in eigenbasis coordinates.
    pub coclosed_projector: DMatrix<f64>,
}

impl EigenspaceSplit {
    /// `max |P' + P'' - I|`.
    pub fn completeness_residual(&self) -> f64 {
        let m = self.multiplicity;
        max_abs(&(&self.closed_projector + &self.coclosed_projector - DMatrix::identity(m, m)))
    }

    /// Largest of `max |P'^2 - P'|` and `max |P''^2 - P''|`.
    pub fn idempotency_residual(&self) -> f64 {
        let a = &self.closed_projector;
        let b = &self.coclosed_projector;
        max_abs(&(a * a - a)).max(max_abs(&(b * b - b)))
    }
}

/// Splits the `lambda`-eigenspace of `Delta_k` into closed and coclosed parts.
pub fn hodge_split(
    complex: &TwistedComplex,
    metric: &ChainMetric,
    k: usize,
    lambda: f64,
) -> Result<EigenspaceSplit> {
    let spec = laplacian_spectrum(complex, metric, k)?;
    let tol = EIGEN_MATCH_REL_TOL * lambda.abs().max(1.0);
    let cols: Vec<usize> = (0..spec.dim())
        .filter(|&j| (spec.eigenvalues[j] - lambda).abs() <= tol)
        .collect();
    if cols.is_empty() || spec.is_kernel(lambda) {
        return Err(TorsionError::NotAnEigenvalue {
            degree: k,
            value: lambda,
        });
    }
    let basis = spec.eigenvectors.select_columns(cols.iter());
    let h = metric.block(k);
    let coclosed_op = codifferential(complex, metric, k) * coboundary(complex, k) / lambda;
    let closed_op = if k == 0 {
        DMatrix::zeros(h.nrows(), h.ncols())
    } else {
        coboundary(complex, k - 1) * codifferential(complex, metric, k - 1) / lambda
    };
    let gram = basis.transpose() * h;
    let closed_projector = &gram * closed_op * &basis;
    let coclosed_projector = &gram * coclosed_op * &basis;
    let f_mult = closed_projector.trace().round().max(0.0) as usize;
    let g_mult = coclosed_projector.trace().round().max(0.0) as usize;
    Ok(EigenspaceSplit {
        degree: k,
        eigenvalue: lambda,
        multiplicity: cols.len(),
        f_mult,
        g_mult,
        closed_projector,
        coclosed_projector,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::twisted_complex::{build_twisted_boundary, circle_cells, Preset, Representation};
    use std::f64::consts::{E, PI};

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(v))
    }

    #[test]
    fn circle_laplacians_are_scalar() {
        let theta = 1.3;
        let c = Preset::Circle { theta }.complex().unwrap();
        let m = ChainMetric::identity(&c);
        let expected = DMatrix::identity(2, 2) * (2.0 - 2.0 * theta.cos());
        for k in 0..2 {
            let l = laplacian(&c, &m, k).unwrap();
            assert!(max_abs(&(l - &expected)) < 1e-14);
        }
    }

    #[test]
    fn point_laplacian_is_zero() {
        let c = Preset::Point { rank: 2 }.complex().unwrap();
        let l = laplacian(&c, &ChainMetric::identity(&c), 0).unwrap();
        assert_eq!(l, DMatrix::zeros(2, 2));
    }

    #[test]
    fn identity_metric_matches_boundary_formula() {
        let c = Preset::Torus2 {
            alpha: 1.0,
            beta: 0.3,
        }
        .complex()
        .unwrap();
        let m = ChainMetric::identity(&c);
        for k in 0..=2 {
            let direct = c.boundary(k).transpose() * c.boundary(k)
                + c.boundary(k + 1) * c.boundary(k + 1).transpose();
            assert!(max_abs(&(laplacian(&c, &m, k).unwrap() - direct)) < 1e-14);
        }
    }

    #[test]
    fn diagonal_spectrum() {
        let d = diag(&[4.0, 0.0, 1.0]);
        let s = eigendecompose(&d, &DMatrix::identity(3, 3)).unwrap();
        assert_eq!(s.eigenvalues, vec![0.0, 1.0, 4.0]);
        assert_eq!(s.kernel_dim, 1);
    }

    #[test]
    fn circle_quarter_turn_spectrum() {
        let c = Preset::Circle { theta: PI / 2.0 }.complex().unwrap();
        let s = laplacian_spectrum(&c, &ChainMetric::identity(&c), 1).unwrap();
        assert!((s.eigenvalues[0] - 2.0).abs() < 1e-14 && (s.eigenvalues[1] - 2.0).abs() < 1e-14);
        assert_eq!(s.kernel_dim, 0);
        assert!((tr_log(&s, true).unwrap() - 2.0 * 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn powers_on_diagonals() {
        let id1 = DMatrix::identity(1, 1);
        let s = eigendecompose(&diag(&[4.0]), &id1).unwrap();
        let p = complex_power(&s, Complex64::new(0.5, 0.0));
        assert!((p[(0, 0)] - Complex64::new(2.0, 0.0)).norm() < 1e-14);
        let s = eigendecompose(&diag(&[0.0, 9.0]), &DMatrix::identity(2, 2)).unwrap();
        let p = real_power(&s, 0.5);
        assert!(max_abs(&(p - diag(&[0.0, 3.0]))) < 1e-14);
        let p0 = real_power(&s, 0.0);
        assert!(max_abs(&(p0 - (DMatrix::identity(2, 2) - s.kernel_projector()))) < 1e-14);
    }

    #[test]
    fn log_trace_of_exponentials() {
        let s = eigendecompose(&diag(&[E, E * E]), &DMatrix::identity(2, 2)).unwrap();
        assert!((tr_log(&s, true).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn strict_log_trace_rejects_kernel() {
        let c = Preset::Point { rank: 1 }.complex().unwrap();
        let s = laplacian_spectrum(&c, &ChainMetric::identity(&c), 0).unwrap();
        assert_eq!(tr_log(&s, true).unwrap_err(), TorsionError::NotInvertible { kernel_dim: 1 });
        assert_eq!(tr_log(&s, false).unwrap(), 0.0);
    }

    #[test]
    fn betti_numbers_of_fixtures() {
        let trivial = build_twisted_boundary(&circle_cells(), &Representation::trivial(1, 1)).unwrap();
        assert_eq!(betti(&trivial, &ChainMetric::identity(&trivial)).unwrap(), vec![1, 1]);
        let c = Preset::Circle { theta: 1.0 }.complex().unwrap();
        assert_eq!(betti(&c, &ChainMetric::identity(&c)).unwrap(), vec![0, 0]);
        let p = Preset::Point { rank: 3 }.complex().unwrap();
        assert_eq!(betti(&p, &ChainMetric::identity(&p)).unwrap(), vec![3]);
        let t = Preset::Torus2 {
            alpha: 1.0,
            beta: 0.3,
        }
        .complex()
        .unwrap();
        assert_eq!(betti(&t, &ChainMetric::identity(&t)).unwrap(), vec![0, 0, 0]);
        let i = Preset::Interval { rank: 1 }.complex().unwrap();
        assert_eq!(betti(&i, &ChainMetric::identity(&i)).unwrap(), vec![1, 0]);
    }

    #[test]
    fn circle_eigenspace_split() {
        let c = Preset::Circle { theta: PI / 2.0 }.complex().unwrap();
        let m = ChainMetric::identity(&c);
        let s0 = hodge_split(&c, &m, 0, 2.0).unwrap();
        assert_eq!((s0.f_mult, s0.g_mult), (0, 2));
        let s1 = hodge_split(&c, &m, 1, 2.0).unwrap();
        assert_eq!((s1.f_mult, s1.g_mult), (2, 0));
        assert!(s0.completeness_residual() < 1e-12 && s1.completeness_residual() < 1e-12);
    }

    #[test]
    fn torus_eigenspace_partners() {
        let c = Preset::Torus2 {
            alpha: 1.0,
            beta: 0.3,
        }
        .complex()
        .unwrap();
        let m = ChainMetric::identity(&c);
        let s = laplacian_spectrum(&c, &m, 0).unwrap();
        let lambda = s.eigenvalues[0];
        let split0 = hodge_split(&c, &m, 0, lambda).unwrap();
        let split1 = hodge_split(&c, &m, 1, lambda).unwrap();
        assert_eq!(split0.g_mult, split1.f_mult);
        assert!(split0.g_mult > 0);
        assert!(split1.idempotency_residual() < 1e-9);
    }

    #[test]
    fn non_eigenvalue_rejected() {
        let c = Preset::Circle { theta: PI / 2.0 }.complex().unwrap();
        let m = ChainMetric::identity(&c);
        assert!(matches!(
            hodge_split(&c, &m, 0, 3.0),
            Err(TorsionError::NotAnEigenvalue { degree: 0, .. })
        ));
    }

    #[test]
    fn metric_validation() {
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(ChainMetric::new(vec![bad]).is_err());
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(ChainMetric::new(vec![asym]).is_err());
        let c = Preset::Circle { theta: 1.0 }.complex().unwrap();
        let short = ChainMetric::new(vec![DMatrix::identity(2, 2)]).unwrap();
        assert!(matches!(laplacian(&c, &short, 0), Err(TorsionError::ShapeMismatch(_))));
    }
}
