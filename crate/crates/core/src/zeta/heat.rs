//! Heat traces of model spectra.
//!
//! A [`HeatTrace`] is an integer combination of products of one-dimensional
//! (or scalar spherical) factors. Each factor knows its exact small-time
//! expansion, the remainder beyond it, and a direct eigenvalue sum for large
//! times; products and sums are assembled from those pieces without ever
//! subtracting two large numbers.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::special::BERNOULLI_EVEN;

/// Exponent beyond which `exp(-x)` no longer matters in double precision.
const EXP_CUTOFF: f64 = 745.0;
/// Relative cutoff for direct sums.
const SUM_CUTOFF: f64 = 40.0;
/// Number of spherical expansion terms kept explicitly: `t^-1 .. t^SPHERE_KEPT`.
const SPHERE_KEPT: i32 = 4;
/// Highest spherical term used to represent the remainder below `SPHERE_SWITCH`.
const SPHERE_SERIES_MAX: i32 = 15;
const SPHERE_SWITCH: f64 = 0.1;

/// Boundary condition at one end of an interval factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Endpoint {
    Dirichlet,
    Neumann,
}

/// One-dimensional and spherical building blocks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SpectralFactor {
    /// `-d^2/dx^2` on a circle of length `length`, twisted by the character
    /// `e^(i twist)`: eigenvalues `((2 pi m + twist) / length)^2`, `m in Z`.
    Circle { length: f64, twist: f64 },
    /// `-d^2/dx^2` on `[0, length]` with the given end conditions.
    Interval {
        length: f64,
        left: Endpoint,
        right: Endpoint,
    },
    /// Scalar Laplacian on the unit round 2-sphere: `l (l + 1)` with
    /// multiplicity `2 l + 1`.
    SphereScalar,
}

/// A term `coeff * t^(-power)` of the small-time expansion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatTerm {
    pub power: f64,
    pub coeff: f64,
}

fn twist_is_trivial(twist: f64) -> bool {
    let r = twist.rem_euclid(2.0 * PI);
    r.abs() < 1e-15 || (2.0 * PI - r).abs() < 1e-15
}

/// Coefficients `c_j` of `t^j`, `j = -1..=SPHERE_SERIES_MAX`, of the full
/// scalar heat trace on the unit sphere (zero mode included):
/// `e^(t/4) sum_(l >= 0) (2l+1) e^(-t (l + 1/2)^2)`.
fn sphere_series() -> Vec<f64> {
    let len = (SPHERE_SERIES_MAX + 2) as usize;
    // half-integer sum: 1/t - sum_(k>=1) B_2k(1/2) (-t)^(k-1) / k!
    let mut half = vec![0.0; len];
    half[0] = 1.0;
    let mut k_fact = 1.0;
    for k in 1..len {
        k_fact *= k as f64;
        let b2k = BERNOULLI_EVEN[k - 1];
        let b_half = -(1.0 - 2f64.powi(1 - 2 * k as i32)) * b2k;
        let sign = if (k - 1) % 2 == 0 { 1.0 } else { -1.0 };
        // index j + 1 holds t^j, here j = k - 1
        half[k] = -b_half * sign / k_fact;
    }
    // multiply by e^(t/4) = sum t^i / (4^i i!)
    let mut out = vec![0.0; len];
    let mut exp_coeff = vec![1.0; len];
    for i in 1..len {
        exp_coeff[i] = exp_coeff[i - 1] / (4.0 * i as f64);
    }
    for (a, &ha) in half.iter().enumerate() {
        for (i, &e) in exp_coeff.iter().enumerate() {
            if a + i < len {
                out[a + i] += ha * e;
            }
        }
    }
    out
}

impl SpectralFactor {
    pub fn circle(length: f64) -> Self {
        SpectralFactor::Circle { length, twist: 0.0 }
    }

    pub fn dirichlet(length: f64) -> Self {
        SpectralFactor::Interval {
            length,
            left: Endpoint::Dirichlet,
            right: Endpoint::Dirichlet,
        }
    }

    pub fn neumann(length: f64) -> Self {
        SpectralFactor::Interval {
            length,
            left: Endpoint::Neumann,
            right: Endpoint::Neumann,
        }
    }

    /// Neumann at `x = 0`, Dirichlet at `x = length`.
    pub fn mixed(length: f64) -> Self {
        SpectralFactor::Interval {
            length,
            left: Endpoint::Neumann,
            right: Endpoint::Dirichlet,
        }
    }

    pub fn zero_modes(&self) -> usize {
        match *self {
            SpectralFactor::Circle { twist, .. } => usize::from(twist_is_trivial(twist)),
            SpectralFactor::Interval { left, right, .. } => {
                usize::from(left == Endpoint::Neumann && right == Endpoint::Neumann)
            }
            SpectralFactor::SphereScalar => 1,
        }
    }

    /// Small-time expansion, ordered by decreasing power of `1/t`.
    pub fn expansion(&self) -> Vec<HeatTerm> {
        let sqrt_4pi = (4.0 * PI).sqrt();
        match *self {
            SpectralFactor::Circle { length, .. } => vec![HeatTerm {
                power: 0.5,
                coeff: length / sqrt_4pi,
            }],
            SpectralFactor::Interval {
                length,
                left,
                right,
            } => {
                let mut terms = vec![HeatTerm {
                    power: 0.5,
                    coeff: length / sqrt_4pi,
                }];
                let constant = match (left, right) {
                    (Endpoint::Dirichlet, Endpoint::Dirichlet) => -0.5,
                    (Endpoint::Neumann, Endpoint::Neumann) => 0.5,
                    _ => 0.0,
                };
                if constant != 0.0 {
                    terms.push(HeatTerm {
                        power: 0.0,
                        coeff: constant,
                    });
                }
                terms
            }
            SpectralFactor::SphereScalar => sphere_series()
                .into_iter()
                .take((SPHERE_KEPT + 2) as usize)
                .enumerate()
                .map(|(idx, coeff)| HeatTerm {
                    power: 1.0 - idx as f64,
                    coeff,
                })
                .collect(),
        }
    }

    pub fn expansion_value(&self, t: f64) -> f64 {
        self.expansion()
            .iter()
            .map(|term| term.coeff * t.powf(-term.power))
            .sum()
    }

    /// `trace(t) - expansion(t)`, computed without cancellation for small `t`.
    pub fn remainder(&self, t: f64) -> f64 {
        match *self {
            SpectralFactor::Circle { length, twist } => {
                // Poisson summation: (L / sqrt(4 pi t)) sum_k e^(-k^2 L^2 / 4t) cos(k twist)
                let prefactor = length / (4.0 * PI * t).sqrt();
                let mut sum = 0.0;
                for k in 1.. {
                    let exponent = (k * k) as f64 * length * length / (4.0 * t);
                    if exponent > EXP_CUTOFF {
                        break;
                    }
                    sum += 2.0 * (-exponent).exp() * (k as f64 * twist).cos();
                }
                prefactor * sum
            }
            SpectralFactor::Interval {
                length,
                left,
                right,
            } => {
                let alternate = left != right;
                let prefactor = length / (PI * t).sqrt();
                let mut sum = 0.0;
                for m in 1.. {
                    let exponent = (m * m) as f64 * length * length / t;
                    if exponent > EXP_CUTOFF {
                        break;
                    }
                    let sign = if alternate && m % 2 == 1 { -1.0 } else { 1.0 };
                    sum += sign * (-exponent).exp();
                }
                prefactor * sum
            }
            SpectralFactor::SphereScalar => {
                if t < SPHERE_SWITCH {
                    let series = sphere_series();
                    (SPHERE_KEPT + 1..=SPHERE_SERIES_MAX)
                        .map(|j| series[(j + 1) as usize] * t.powi(j))
                        .sum()
                } else {
                    self.zero_modes() as f64 + self.nonzero_trace(t) - self.expansion_value(t)
                }
            }
        }
    }

    /// Direct sum of `e^(-t lambda)` over the nonzero eigenvalues.
    pub fn nonzero_trace(&self, t: f64) -> f64 {
        match *self {
            SpectralFactor::Circle { length, twist } => {
                let w = 2.0 * PI / length;
                let shift = twist / length;
                // |w m + shift| <= sqrt(cutoff / t)
                let reach = (SUM_CUTOFF / t).sqrt();
                let lo = ((-reach - shift) / w).floor() as i64 - 1;
                let hi = ((reach - shift) / w).ceil() as i64 + 1;
                let mut sum = 0.0;
                for m in lo..=hi {
                    let root = w * m as f64 + shift;
                    if root.abs() < 1e-300 || (twist_is_trivial(twist) && m as f64 * w + shift == 0.0) {
                        continue;
                    }
                    let lambda = root * root;
                    if twist_is_trivial(twist) && lambda < 1e-24 * w * w {
                        continue;
                    }
                    sum += (-t * lambda).exp();
                }
                sum
            }
            SpectralFactor::Interval {
                length,
                left,
                right,
            } => {
                let base = PI / length;
                let offset = if left == right { 0.0 } else { 0.5 };
                let start = if left == right { 1 } else { 0 };
                let mut sum = 0.0;
                for n in start.. {
                    let root = (n as f64 + offset) * base;
                    let x = t * root * root;
                    if x > SUM_CUTOFF + 5.0 && n > start + 1 {
                        break;
                    }
                    sum += (-x).exp();
                }
                sum
            }
            SpectralFactor::SphereScalar => {
                let mut sum = 0.0;
                for l in 1.. {
                    let lf = l as f64;
                    let x = t * lf * (lf + 1.0);
                    if x > SUM_CUTOFF + 5.0 && l > 2 {
                        break;
                    }
                    sum += (2.0 * lf + 1.0) * (-x).exp();
                }
                sum
            }
        }
    }

    /// Full trace, zero modes included.
    pub fn trace(&self, t: f64) -> f64 {
        self.zero_modes() as f64 + self.nonzero_trace(t)
    }

    fn validate(&self) -> bool {
        match *self {
            SpectralFactor::Circle { length, twist } => length > 0.0 && twist.is_finite(),
            SpectralFactor::Interval { length, .. } => length > 0.0,
            SpectralFactor::SphereScalar => true,
        }
    }
}

/// Product of factors with an integer multiplicity. The empty product is a
/// single zero mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatComponent {
    pub multiplicity: i64,
    pub factors: Vec<SpectralFactor>,
}

impl HeatComponent {
    fn expansion(&self) -> Vec<HeatTerm> {
        let mut acc = vec![HeatTerm {
            power: 0.0,
            coeff: 1.0,
        }];
        for f in &self.factors {
            let terms = f.expansion();
            let mut next = Vec::new();
            for a in &acc {
                for b in &terms {
                    push_term(
                        &mut next,
                        HeatTerm {
                            power: a.power + b.power,
                            coeff: a.coeff * b.coeff,
                        },
                    );
                }
            }
            acc = next;
        }
        acc.into_iter()
            .map(|t| HeatTerm {
                power: t.power,
                coeff: t.coeff * self.multiplicity as f64,
            })
            .collect()
    }

    fn zero_modes(&self) -> i64 {
        self.multiplicity * self.factors.iter().map(|f| f.zero_modes() as i64).product::<i64>()
    }

    /// `prod (E_i + r_i) - prod E_i`, expanded so that every summand carries
    /// at least one remainder factor.
    fn remainder(&self, t: f64) -> f64 {
        let mut expansion = 1.0;
        let mut remainder = 0.0;
        for f in &self.factors {
            let e = f.expansion_value(t);
            let r = f.remainder(t);
            remainder = expansion * r + remainder * e + remainder * r;
            expansion *= e;
        }
        self.multiplicity as f64 * remainder
    }

    /// `prod (z_i + T_i) - prod z_i` with `T_i` the nonzero-spectrum traces.
    fn nonzero_trace(&self, t: f64) -> f64 {
        let mut zeros = 1.0;
        let mut rest = 0.0;
        for f in &self.factors {
            let z = f.zero_modes() as f64;
            let tr = f.nonzero_trace(t);
            rest = zeros * tr + rest * z + rest * tr;
            zeros *= z;
        }
        self.multiplicity as f64 * rest
    }
}

fn push_term(terms: &mut Vec<HeatTerm>, term: HeatTerm) {
    if let Some(existing) = terms.iter_mut().find(|t| (t.power - term.power).abs() < 1e-12) {
        existing.coeff += term.coeff;
    } else {
        terms.push(term);
    }
}

/// Heat trace `Tr e^(-t Delta)` of a model operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatTrace {
    components: Vec<HeatComponent>,
}

/// Factor families with closed-form small-time expansions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ModelFactor {
    Circle(f64),
    Dirichlet(f64),
    Neumann(f64),
    /// Flat square torus `(R / L Z)^n`.
    Lattice(usize, f64),
}

/// Heat trace of a standard factor, by the image method.
pub fn theta_expansion(factor: ModelFactor) -> HeatTrace {
    match factor {
        ModelFactor::Circle(l) => HeatTrace::circle(l, 0.0),
        ModelFactor::Dirichlet(r) => HeatTrace::factor(SpectralFactor::dirichlet(r)),
        ModelFactor::Neumann(r) => HeatTrace::factor(SpectralFactor::neumann(r)),
        ModelFactor::Lattice(n, l) => HeatTrace::lattice(n, l),
    }
}

/// Product spectrum: `Tr e^(-t (A x 1 + 1 x B)) = Tr e^(-tA) Tr e^(-tB)`.
pub fn product_heat_trace(a: &HeatTrace, b: &HeatTrace) -> HeatTrace {
    a.product(b)
}

impl HeatTrace {
    pub fn factor(f: SpectralFactor) -> Self {
        assert!(f.validate(), "invalid spectral factor {f:?}");
        Self {
            components: vec![HeatComponent {
                multiplicity: 1,
                factors: vec![f],
            }],
        }
    }

    pub fn circle(length: f64, twist: f64) -> Self {
        Self::factor(SpectralFactor::Circle { length, twist })
    }

    pub fn lattice(n: usize, length: f64) -> Self {
        Self {
            components: vec![HeatComponent {
                multiplicity: 1,
                factors: vec![SpectralFactor::circle(length); n],
            }],
        }
    }

    pub fn sphere_scalar() -> Self {
        Self::factor(SpectralFactor::SphereScalar)
    }

    /// A one-dimensional kernel and nothing else.
    pub fn zero_mode() -> Self {
        Self {
            components: vec![HeatComponent {
                multiplicity: 1,
                factors: Vec::new(),
            }],
        }
    }

    pub fn empty() -> Self {
        Self {
            components: Vec::new(),
        }
    }

    pub fn components(&self) -> &[HeatComponent] {
        &self.components
    }

    pub fn scaled(&self, m: i64) -> Self {
        Self {
            components: self
                .components
                .iter()
                .map(|c| HeatComponent {
                    multiplicity: c.multiplicity * m,
                    factors: c.factors.clone(),
                })
                .collect(),
        }
    }

    pub fn sum(&self, other: &HeatTrace) -> Self {
        let mut components = self.components.clone();
        components.extend(other.components.iter().cloned());
        Self { components }
    }

    pub fn difference(&self, other: &HeatTrace) -> Self {
        self.sum(&other.scaled(-1))
    }

    pub fn product(&self, other: &HeatTrace) -> Self {
        let mut components = Vec::new();
        for a in &self.components {
            for b in &other.components {
                let mut factors = a.factors.clone();
                factors.extend(b.factors.iter().copied());
                components.push(HeatComponent {
                    multiplicity: a.multiplicity * b.multiplicity,
                    factors,
                });
            }
        }
        Self { components }
    }

    /// Merged small-time terms, largest power of `1/t` first. Coefficients
    /// that cancel to rounding level are dropped.
    pub fn small_t_terms(&self) -> Vec<HeatTerm> {
        let mut terms: Vec<HeatTerm> = Vec::new();
        let mut scale: Vec<(f64, f64)> = Vec::new();
        for c in &self.components {
            for t in c.expansion() {
                push_term(&mut terms, t);
                if let Some(s) = scale.iter_mut().find(|s| (s.0 - t.power).abs() < 1e-12) {
                    s.1 += t.coeff.abs();
                } else {
                    scale.push((t.power, t.coeff.abs()));
                }
            }
        }
        terms.retain(|t| {
            let s = scale
                .iter()
                .find(|s| (s.0 - t.power).abs() < 1e-12)
                .map_or(0.0, |s| s.1);
            t.coeff.abs() > 1e-14 * s
        });
        terms.sort_by(|a, b| b.power.total_cmp(&a.power));
        terms
    }

    /// Coefficient of `t^(-power)`.
    pub fn coefficient(&self, power: f64) -> f64 {
        self.small_t_terms()
            .iter()
            .find(|t| (t.power - power).abs() < 1e-12)
            .map_or(0.0, |t| t.coeff)
    }

    pub fn kernel_dim(&self) -> usize {
        let k: i64 = self.components.iter().map(HeatComponent::zero_modes).sum();
        assert!(k >= 0, "negative kernel dimension in heat trace");
        k as usize
    }

    pub fn expansion_value(&self, t: f64) -> f64 {
        self.small_t_terms()
            .iter()
            .map(|term| term.coeff * t.powf(-term.power))
            .sum()
    }

    /// Full trace minus the small-time expansion.
    pub fn remainder(&self, t: f64) -> f64 {
        self.components.iter().map(|c| c.remainder(t)).sum()
    }

    /// Trace over the nonzero spectrum, by direct eigenvalue summation.
    pub fn tail(&self, t: f64) -> f64 {
        self.components.iter().map(|c| c.nonzero_trace(t)).sum()
    }

    /// Full trace, zero modes included.
    pub fn trace(&self, t: f64) -> f64 {
        self.tail(t) + self.kernel_dim() as f64
    }

    /// `|tail(t) + b - expansion(t) - remainder(t)|` at the split point `t`.
    pub fn split_residual(&self, t: f64) -> f64 {
        (self.tail(t) + self.kernel_dim() as f64 - self.expansion_value(t) - self.remainder(t)).abs()
    }
}
