//! Finite CW chain complexes twisted by an orthogonal representation of the
//! fundamental group.
//!
//! A [`CellStructure`] records, for every k-cell, its boundary as a list of
//! `(target (k-1)-cell, integer coefficient, group word)` incidences. Pairing it
//! with a [`Representation`] `rho: pi_1 -> O(n)` replaces every incidence by the
//! `n x n` block `coeff * rho(word)`, giving the boundary matrices of
//! `C_k(universal cover) (x)_{Z pi_1} R^n`.
//!
//! Blocks use `rho(word)` itself, so the composite `d_(k-1) d_k` multiplies
//! words in the order (lower incidence) * (upper incidence). Incidence words
//! for 2-cells therefore follow the right Fox calculus:
//! `r - 1 = sum_x (x - 1) D_x(r)` with the 1-cell boundary `(x - 1) e_0`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TorsionError};

const ORTHOGONALITY_TOL: f64 = 1e-12;
const CHAIN_TOL: f64 = 1e-12;

/// One letter of a word in the generators: `generator^exponent`, exponent `+-1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Letter {
    pub generator: usize,
    pub exponent: i8,
}

/// An element of the free group on the generators, stored as a reduced or
/// unreduced sequence of letters. The empty word is the identity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupWord {
    pub letters: Vec<Letter>,
}

impl GroupWord {
    pub fn identity() -> Self {
        Self::default()
    }

    /// Builds a word from `(generator, exponent)` pairs.
    ///
    /// Exponents other than `+-1` are rejected.
    pub fn from_pairs(pairs: &[(usize, i8)]) -> Result<Self> {
        let mut letters = Vec::with_capacity(pairs.len());
        for &(generator, exponent) in pairs {
            if exponent != 1 && exponent != -1 {
                return Err(TorsionError::BadCells(format!(
                    "word exponent must be +1 or -1, got {exponent}"
                )));
            }
            letters.push(Letter {
                generator,
                exponent,
            });
        }
        Ok(Self { letters })
    }

    pub fn generator(g: usize) -> Self {
        Self {
            letters: vec![Letter {
                generator: g,
                exponent: 1,
            }],
        }
    }

    pub fn inverse(&self) -> Self {
        Self {
            letters: self
                .letters
                .iter()
                .rev()
                .map(|l| Letter {
                    generator: l.generator,
                    exponent: -l.exponent,
                })
                .collect(),
        }
    }

    pub fn concat(&self, other: &GroupWord) -> Self {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Self { letters }
    }

    pub fn max_generator(&self) -> Option<usize> {
        self.letters.iter().map(|l| l.generator).max()
    }
}

/// An orthogonal representation given by the images of the generators.
#[derive(Clone, Debug, PartialEq)]
pub struct Representation {
    rank: usize,
    images: Vec<DMatrix<f64>>,
}

impl Representation {
    /// Validates shape and orthogonality of every generator image.
    pub fn new(rank: usize, images: Vec<DMatrix<f64>>) -> Result<Self> {
        if rank == 0 {
            return Err(TorsionError::BadParameter(
                "representation rank must be positive".into(),
            ));
        }
        for (g, image) in images.iter().enumerate() {
            if image.nrows() != rank || image.ncols() != rank {
                return Err(TorsionError::ShapeMismatch(format!(
                    "generator {g} image is {}x{}, expected {rank}x{rank}",
                    image.nrows(),
                    image.ncols()
                )));
            }
            let residual = max_abs(&(image.transpose() * image - DMatrix::identity(rank, rank)));
            if !(residual < ORTHOGONALITY_TOL) {
                return Err(TorsionError::BadRepresentation {
                    generator: g,
                    residual,
                });
            }
        }
        Ok(Self { rank, images })
    }

    /// The trivial representation of the given rank on `generators` generators.
    pub fn trivial(rank: usize, generators: usize) -> Self {
        Self {
            rank: rank.max(1),
            images: vec![DMatrix::identity(rank.max(1), rank.max(1)); generators],
        }
    }

    /// Rank-2 representation of a free group sending generator `i` to the
    /// rotation by `angles[i]`.
    pub fn rotations(angles: &[f64]) -> Self {
        Self {
            rank: 2,
            images: angles.iter().map(|&a| rotation(a)).collect(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn generator_count(&self) -> usize {
        self.images.len()
    }

    pub fn image(&self, g: usize) -> &DMatrix<f64> {
        &self.images[g]
    }

    /// `rho(word)`: the ordered product of generator images, with inverses
    /// given by transposes.
    pub fn evaluate(&self, word: &GroupWord) -> Result<DMatrix<f64>> {
        let mut acc = DMatrix::identity(self.rank, self.rank);
        for letter in &word.letters {
            let image = self
                .images
                .get(letter.generator)
                .ok_or(TorsionError::BadGenerator {
                    index: letter.generator,
                    count: self.images.len(),
                })?;
            acc = if letter.exponent > 0 {
                acc * image
            } else {
                acc * image.transpose()
            };
        }
        Ok(acc)
    }
}

/// 2x2 rotation by `angle`.
pub fn rotation(angle: f64) -> DMatrix<f64> {
    let (s, c) = angle.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
}

/// A single term of a cell boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct Incidence {
    pub target: usize,
    pub coeff: i64,
    pub word: GroupWord,
}

impl Incidence {
    pub fn new(target: usize, coeff: i64, word: GroupWord) -> Self {
        Self {
            target,
            coeff,
            word,
        }
    }
}

/// Cells of a finite CW complex with twisted incidence data.
#[derive(Clone, Debug, PartialEq)]
pub struct CellStructure {
    dimension: usize,
    cells_per_degree: Vec<usize>,
    /// `incidences[k][i]` is the boundary of the i-th k-cell (empty for k = 0).
    incidences: Vec<Vec<Vec<Incidence>>>,
}

impl CellStructure {
    /// `boundaries[k - 1][i]` describes the boundary of the i-th k-cell, for
    /// `k = 1..=dimension`.
    pub fn new(
        dimension: usize,
        cells_per_degree: Vec<usize>,
        boundaries: Vec<Vec<Vec<Incidence>>>,
    ) -> Result<Self> {
        if cells_per_degree.len() != dimension + 1 {
            return Err(TorsionError::BadCells(format!(
                "expected {} cell counts, got {}",
                dimension + 1,
                cells_per_degree.len()
            )));
        }
        if boundaries.len() != dimension {
            return Err(TorsionError::BadCells(format!(
                "expected boundary data for degrees 1..={dimension}, got {} degrees",
                boundaries.len()
            )));
        }
        let mut incidences = Vec::with_capacity(dimension + 1);
        incidences.push(vec![Vec::new(); cells_per_degree[0]]);
        for (idx, cells) in boundaries.into_iter().enumerate() {
            let k = idx + 1;
            if cells.len() != cells_per_degree[k] {
                return Err(TorsionError::BadCells(format!(
                    "degree {k}: {} boundary lists for {} cells",
                    cells.len(),
                    cells_per_degree[k]
                )));
            }
            for (i, cell) in cells.iter().enumerate() {
                for inc in cell {
                    if inc.target >= cells_per_degree[k - 1] {
                        return Err(TorsionError::BadCells(format!(
                            "{k}-cell {i} refers to missing ({})-cell {}",
                            k - 1,
                            inc.target
                        )));
                    }
                }
            }
            incidences.push(cells);
        }
        Ok(Self {
            dimension,
            cells_per_degree,
            incidences,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn cells_per_degree(&self) -> &[usize] {
        &self.cells_per_degree
    }

    pub fn boundary_of(&self, k: usize, cell: usize) -> &[Incidence] {
        &self.incidences[k][cell]
    }

    fn max_generator(&self) -> Option<usize> {
        self.incidences
            .iter()
            .flatten()
            .flatten()
            .filter_map(|inc| inc.word.max_generator())
            .max()
    }
}

/// Boundary matrices of a twisted chain complex, degrees `0..=dimension`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwistedComplex {
    rank: usize,
    cells_per_degree: Vec<usize>,
    /// `boundaries[k]` is `d_k : C_k -> C_(k-1)` for `k = 0..=dimension + 1`;
    /// the two ends are empty matrices so every degree has a uniform shape.
    boundaries: Vec<DMatrix<f64>>,
}

impl TwistedComplex {
    /// Builds a complex directly from boundary matrices `d_1..d_n`, checking
    /// shapes and `d d = 0`.
    pub fn from_boundaries(
        rank: usize,
        cells_per_degree: Vec<usize>,
        boundaries: Vec<DMatrix<f64>>,
    ) -> Result<Self> {
        let complex = Self::from_boundaries_unchecked(rank, cells_per_degree, boundaries)?;
        complex.check_chain()?;
        Ok(complex)
    }

    /// Same as [`TwistedComplex::from_boundaries`] without the `d d = 0` check.
    /// Used to build negative controls for [`validate`].
    pub fn from_boundaries_unchecked(
        rank: usize,
        cells_per_degree: Vec<usize>,
        boundaries: Vec<DMatrix<f64>>,
    ) -> Result<Self> {
        if cells_per_degree.is_empty() {
            return Err(TorsionError::BadCells("complex has no degrees".into()));
        }
        let n = cells_per_degree.len() - 1;
        if boundaries.len() != n {
            return Err(TorsionError::ShapeMismatch(format!(
                "expected {n} boundary matrices, got {}",
                boundaries.len()
            )));
        }
        let dims: Vec<usize> = cells_per_degree.iter().map(|c| c * rank).collect();
        let mut all = Vec::with_capacity(n + 2);
        all.push(DMatrix::zeros(0, dims[0]));
        for (idx, b) in boundaries.into_iter().enumerate() {
            let k = idx + 1;
            if b.nrows() != dims[k - 1] || b.ncols() != dims[k] {
                return Err(TorsionError::ShapeMismatch(format!(
                    "d_{k} is {}x{}, expected {}x{}",
                    b.nrows(),
                    b.ncols(),
                    dims[k - 1],
                    dims[k]
                )));
            }
            all.push(b);
        }
        all.push(DMatrix::zeros(dims[n], 0));
        Ok(Self {
            rank,
            cells_per_degree,
            boundaries: all,
        })
    }

    pub fn dimension(&self) -> usize {
        self.cells_per_degree.len() - 1
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn cells_per_degree(&self) -> &[usize] {
        &self.cells_per_degree
    }

    /// Dimension of the chain space in degree k, `rank * c_k`.
    pub fn chain_dim(&self, k: usize) -> usize {
        self.rank * self.cells_per_degree[k]
    }

    /// `d_k` for `k = 0..=dimension + 1` (empty at both ends).
    pub fn boundary(&self, k: usize) -> &DMatrix<f64> {
        &self.boundaries[k]
    }

    /// Euler characteristic of the chain groups, `sum (-1)^k rank c_k`.
    pub fn chain_euler_characteristic(&self) -> i64 {
        (0..=self.dimension())
            .map(|k| sign(k) * self.chain_dim(k) as i64)
            .sum()
    }

    fn check_chain(&self) -> Result<()> {
        for k in 2..=self.dimension() {
            let (residual, allowed) = self.chain_residual(k);
            if residual > allowed {
                return Err(TorsionError::NonChainComplex {
                    degree: k,
                    residual,
                });
            }
        }
        Ok(())
    }

    /// `(max |d_(k-1) d_k|, allowed)` for `k >= 2`.
    fn chain_residual(&self, k: usize) -> (f64, f64) {
        let lower = &self.boundaries[k - 1];
        let upper = &self.boundaries[k];
        let residual = max_abs(&(lower * upper));
        let allowed = CHAIN_TOL * (1.0 + max_abs(lower) * max_abs(upper));
        (residual, allowed)
    }
}

/// `(-1)^k`
pub(crate) fn sign(k: usize) -> i64 {
    if k.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

pub(crate) fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Replaces every incidence `(coeff, word)` by the block `coeff * rho(word)`.
pub fn build_twisted_boundary(cells: &CellStructure, rho: &Representation) -> Result<TwistedComplex> {
    if let Some(g) = cells.max_generator() {
        if g >= rho.generator_count() {
            return Err(TorsionError::BadGenerator {
                index: g,
                count: rho.generator_count(),
            });
        }
    }
    let r = rho.rank();
    let counts = cells.cells_per_degree().to_vec();
    let mut boundaries = Vec::with_capacity(cells.dimension());
    for k in 1..=cells.dimension() {
        let mut d = DMatrix::zeros(r * counts[k - 1], r * counts[k]);
        for i in 0..counts[k] {
            for inc in cells.boundary_of(k, i) {
                let block = rho.evaluate(&inc.word)? * inc.coeff as f64;
                let mut view = d.view_mut((inc.target * r, i * r), (r, r));
                view += block;
            }
        }
        boundaries.push(d);
    }
    TwistedComplex::from_boundaries(r, counts, boundaries)
}

/// Built-in fixtures.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Preset {
    /// One 0-cell, one 1-cell with boundary `(t - 1) e_0`; `t` acts by rotation.
    Circle { theta: f64 },
    /// Standard torus with relator `a b a^-1 b^-1`; `a`, `b` act by rotations.
    Torus2 { alpha: f64, beta: f64 },
    /// Two 0-cells joined by a 1-cell, trivial coefficients of the given rank.
    Interval { rank: usize },
    /// A single 0-cell, trivial coefficients of the given rank.
    Point { rank: usize },
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::Circle { .. } => "circle",
            Preset::Torus2 { .. } => "torus2",
            Preset::Interval { .. } => "interval",
            Preset::Point { .. } => "point",
        }
    }

    /// Cell data plus representation for the fixture.
    pub fn build(&self) -> Result<(CellStructure, Representation)> {
        let two_pi = 2.0 * std::f64::consts::PI;
        let check_angle = |a: f64| {
            if !(0.0..two_pi).contains(&a) {
                Err(TorsionError::BadParameter(format!(
                    "angle {a} outside [0, 2pi)"
                )))
            } else {
                Ok(())
            }
        };
        match *self {
            Preset::Circle { theta } => {
                check_angle(theta)?;
                if theta == 0.0 {
                    return Err(TorsionError::NotAcyclicPreset("circle"));
                }
                Ok((circle_cells(), Representation::rotations(&[theta])))
            }
            Preset::Torus2 { alpha, beta } => {
                check_angle(alpha)?;
                check_angle(beta)?;
                if alpha == 0.0 && beta == 0.0 {
                    return Err(TorsionError::NotAcyclicPreset("torus2"));
                }
                Ok((torus_cells(), Representation::rotations(&[alpha, beta])))
            }
            Preset::Interval { rank } => {
                if rank == 0 {
                    return Err(TorsionError::BadParameter("rank must be positive".into()));
                }
                Ok((interval_cells(), Representation::trivial(rank, 0)))
            }
            Preset::Point { rank } => {
                if rank == 0 {
                    return Err(TorsionError::BadParameter("rank must be positive".into()));
                }
                Ok((point_cells(), Representation::trivial(rank, 0)))
            }
        }
    }

    pub fn complex(&self) -> Result<TwistedComplex> {
        let (cells, rho) = self.build()?;
        build_twisted_boundary(&cells, &rho)
    }
}

/// Circle: `d e_1 = (t - 1) e_0` with generator 0 = `t`.
pub fn circle_cells() -> CellStructure {
    let boundary = vec![vec![vec![
        Incidence::new(0, 1, GroupWord::generator(0)),
        Incidence::new(0, -1, GroupWord::identity()),
    ]]];
    CellStructure::new(1, vec![1, 1], boundary).expect("circle cells are well formed")
}

/// Circle subdivided into `m` vertices and `m` edges; the twist sits on the
/// last edge. Same pair (S^1, rho) as [`circle_cells`], different CW model.
pub fn subdivided_circle_cells(m: usize) -> Result<CellStructure> {
    if m == 0 {
        return Err(TorsionError::BadParameter("need at least one edge".into()));
    }
    let edges = (0..m)
        .map(|i| {
            if i + 1 < m {
                vec![
                    Incidence::new(i + 1, 1, GroupWord::identity()),
                    Incidence::new(i, -1, GroupWord::identity()),
                ]
            } else {
                vec![
                    Incidence::new(0, 1, GroupWord::generator(0)),
                    Incidence::new(i, -1, GroupWord::identity()),
                ]
            }
        })
        .collect();
    CellStructure::new(1, vec![m, m], vec![edges])
}

/// Torus with generators `a = 0`, `b = 1` and relator `r = a b a^-1 b^-1`.
///
/// Right Fox derivatives: `D_a r = b a^-1 b^-1 - a^-1 b^-1` and
/// `D_b r = a^-1 b^-1 - b^-1`.
pub fn torus_cells() -> CellStructure {
    let w = |pairs: &[(usize, i8)]| GroupWord::from_pairs(pairs).expect("fixed words");
    let edges = vec![
        vec![
            Incidence::new(0, 1, w(&[(0, 1)])),
            Incidence::new(0, -1, GroupWord::identity()),
        ],
        vec![
            Incidence::new(0, 1, w(&[(1, 1)])),
            Incidence::new(0, -1, GroupWord::identity()),
        ],
    ];
    let face = vec![vec![
        Incidence::new(0, 1, w(&[(1, 1), (0, -1), (1, -1)])),
        Incidence::new(0, -1, w(&[(0, -1), (1, -1)])),
        Incidence::new(1, 1, w(&[(0, -1), (1, -1)])),
        Incidence::new(1, -1, w(&[(1, -1)])),
    ]];
    CellStructure::new(2, vec![1, 2, 1], vec![edges, face]).expect("torus cells are well formed")
}

pub fn interval_cells() -> CellStructure {
    let edge = vec![vec![
        Incidence::new(1, 1, GroupWord::identity()),
        Incidence::new(0, -1, GroupWord::identity()),
    ]];
    CellStructure::new(1, vec![2, 1], vec![edge]).expect("interval cells are well formed")
}

pub fn point_cells() -> CellStructure {
    CellStructure::new(0, vec![1], vec![]).expect("point cells are well formed")
}

/// Per-degree diagnostics for a built complex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub rank: usize,
    /// `(rows, cols)` of `d_k` for `k = 1..=dimension`.
    pub shapes: Vec<(usize, usize)>,
    pub shapes_chain: bool,
    /// `max |d_(k-1) d_k|` for `k = 2..=dimension`, indexed by `k`.
    pub residuals: Vec<(usize, f64)>,
    /// Degrees whose residual exceeds the tolerance.
    pub flagged: Vec<usize>,
}

impl ValidationReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.1).fold(0.0, f64::max)
    }
}

pub fn validate(complex: &TwistedComplex) -> ValidationReport {
    let n = complex.dimension();
    let shapes: Vec<(usize, usize)> = (1..=n)
        .map(|k| (complex.boundary(k).nrows(), complex.boundary(k).ncols()))
        .collect();
    let shapes_chain = shapes.windows(2).all(|w| w[0].1 == w[1].0)
        && (1..=n).all(|k| {
            shapes[k - 1] == (complex.chain_dim(k - 1), complex.chain_dim(k))
        });
    let mut residuals = Vec::new();
    let mut flagged = Vec::new();
    for k in 2..=n {
        let (residual, allowed) = complex.chain_residual(k);
        residuals.push((k, residual));
        if residual > allowed {
            flagged.push(k);
        }
    }
    ValidationReport {
        rank: complex.rank(),
        shapes,
        shapes_chain,
        residuals,
        flagged,
    }
}

/// JSON input format for a twisted complex.
///
/// `rep` holds one row-major `rank x rank` matrix per generator. Cells are
/// listed with their dimension; the index of a cell is its position among
/// the cells of the same dimension, in order of appearance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexSpec {
    pub dimension: usize,
    pub rank: usize,
    pub generators: usize,
    pub rep: Vec<Vec<f64>>,
    pub cells: Vec<CellSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSpec {
    pub dim: usize,
    #[serde(default)]
    pub boundary: Vec<IncidenceSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncidenceSpec {
    pub cell: usize,
    pub coeff: i64,
    #[serde(default)]
    pub word: Vec<(usize, i8)>,
}

impl ComplexSpec {
    /// Converts the parsed JSON into validated cell data and representation.
    pub fn into_parts(&self) -> Result<(CellStructure, Representation)> {
        if self.rep.len() != self.generators {
            return Err(TorsionError::BadCells(format!(
                "{} generators declared but {} images given",
                self.generators,
                self.rep.len()
            )));
        }
        let images = self
            .rep
            .iter()
            .enumerate()
            .map(|(g, flat)| {
                if flat.len() != self.rank * self.rank {
                    Err(TorsionError::ShapeMismatch(format!(
                        "generator {g}: {} entries, expected {}",
                        flat.len(),
                        self.rank * self.rank
                    )))
                } else {
                    Ok(DMatrix::from_row_slice(self.rank, self.rank, flat))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let rho = Representation::new(self.rank, images)?;

        let mut counts = vec![0usize; self.dimension + 1];
        let mut boundaries: Vec<Vec<Vec<Incidence>>> = vec![Vec::new(); self.dimension];
        for cell in &self.cells {
            if cell.dim > self.dimension {
                return Err(TorsionError::BadCells(format!(
                    "cell of dimension {} in a {}-dimensional complex",
                    cell.dim, self.dimension
                )));
            }
            counts[cell.dim] += 1;
            if cell.dim == 0 {
                if !cell.boundary.is_empty() {
                    return Err(TorsionError::BadCells("0-cells have no boundary".into()));
                }
                continue;
            }
            let incidences = cell
                .boundary
                .iter()
                .map(|b| Ok(Incidence::new(b.cell, b.coeff, GroupWord::from_pairs(&b.word)?)))
                .collect::<Result<Vec<_>>>()?;
            boundaries[cell.dim - 1].push(incidences);
        }
        let cells = CellStructure::new(self.dimension, counts, boundaries)?;
        Ok((cells, rho))
    }

    pub fn build(&self) -> Result<TwistedComplex> {
        let (cells, rho) = self.into_parts()?;
        build_twisted_boundary(&cells, &rho)
    }
}
