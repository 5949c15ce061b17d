//! Independent numerical checker for density certificates of packings of
//! balls with possibly different radii.
//!
//! A certificate is a symmetric matrix of radial functions `f_ij` with
//! `f̂_ij(u) = p_ij(‖u‖)·e^{−π‖u‖²}`. For balls `K_1, …, K_N` of radii `r_i` the
//! density of any packing of translates is at most `max_i f_ii(0)` provided
//!
//! 1. `f_ij(x) ≤ 0` whenever `‖x‖ ≥ r_i + r_j`,
//! 2. `f̂(0) − W′ ⪰ 0` with `W′_ij = (vol K_i)^{1/2}·(vol K_j)^{1/2}`,
//! 3. the matrix `(p_ij(t))` is positive semidefinite for every `t ≥ 0`.
//!
//! The conditions are checked on finite grids in floating point, which is a
//! numerical check and not a proof. Values of `f` come from
//! [`transform_value`] alone; nothing is shared with the solver.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{min_eigenvalue, LinalgError, SymMatrix};
use crate::sphere::{ball_volume, transform_value, RadialFunction};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid sphere system: {0}")]
    InvalidSystem(String),
    #[error("invalid certificate: {0}")]
    InvalidFunction(String),
    #[error("not certified: {}", .0.summary())]
    NotCertified(Box<VerificationReport>),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Balls `K_1, …, K_N` in ℝⁿ given by their radii.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereSystem {
    dimension: usize,
    radii: Vec<f64>,
    volumes: Vec<f64>,
}

impl SphereSystem {
    pub fn new(dimension: usize, radii: Vec<f64>) -> Result<Self, VerifyError> {
        if dimension == 0 {
            return Err(VerifyError::InvalidSystem("dimension must be at least 1".into()));
        }
        if radii.is_empty() {
            return Err(VerifyError::InvalidSystem("at least one radius is required".into()));
        }
        if let Some(r) = radii.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(VerifyError::InvalidSystem(format!("radius {r} is not a positive finite number")));
        }
        let unit = ball_volume(dimension);
        let volumes = radii.iter().map(|r| unit * r.powi(dimension as i32)).collect();
        Ok(SphereSystem { dimension, radii, volumes })
    }

    /// `N` balls of radius 1.
    pub fn unit_balls(dimension: usize, count: usize) -> Result<Self, VerifyError> {
        Self::new(dimension, vec![1.0; count])
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }
}

/// Symmetric `N × N` family of radial functions; entry `(i, j)` holds the
/// coefficients of `p_ij(t) = Σ_k a_k t^{2k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixRadialFunction {
    dimension: usize,
    size: usize,
    /// Row-major upper triangle, `i ≤ j`.
    upper: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct PairJson {
    i: usize,
    j: usize,
    a: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    n: usize,
    #[serde(rename = "N")]
    size: usize,
    pairs: Vec<PairJson>,
}

/// Accepted inputs: the matrix format, or a single function as written by
/// the sphere-bound solver.
#[derive(Deserialize)]
#[serde(untagged)]
enum CertificateJson {
    Matrix(MatrixJson),
    Single(RadialFunction),
}

impl MatrixRadialFunction {
    /// Builds the family from its upper triangle, listed row by row.
    pub fn new(dimension: usize, size: usize, upper: Vec<Vec<f64>>) -> Result<Self, VerifyError> {
        if dimension == 0 || size == 0 {
            return Err(VerifyError::InvalidFunction("dimension and size must be positive".into()));
        }
        if upper.len() != size * (size + 1) / 2 {
            return Err(VerifyError::ShapeMismatch(format!(
                "{size} × {size} family needs {} pair functions, got {}",
                size * (size + 1) / 2,
                upper.len()
            )));
        }
        if upper.iter().any(|a| a.is_empty()) {
            return Err(VerifyError::InvalidFunction("every pair needs at least one coefficient".into()));
        }
        if upper.iter().flatten().any(|v| !v.is_finite()) {
            return Err(VerifyError::InvalidFunction("coefficients must be finite".into()));
        }
        Ok(MatrixRadialFunction { dimension, size, upper })
    }

    pub fn from_single(f: &RadialFunction) -> Self {
        MatrixRadialFunction { dimension: f.dimension(), size: 1, upper: vec![f.coefficients().to_vec()] }
    }

    /// `f_ij = w_i·w_j·g`, positive semidefinite on the Fourier side by construction.
    pub fn rank_one(g: &RadialFunction, weights: &[f64]) -> Result<Self, VerifyError> {
        let size = weights.len();
        let mut upper = Vec::new();
        for i in 0..size {
            for j in i..size {
                upper.push(g.coefficients().iter().map(|a| weights[i] * weights[j] * a).collect());
            }
        }
        Self::new(g.dimension(), size, upper)
    }

    fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        // Rows 0..i of the upper triangle hold size + (size − 1) + … entries.
        i * (2 * self.size - i + 1) / 2 + (j - i)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Coefficients of `p_ij` (symmetric in `i`, `j`).
    pub fn pair(&self, i: usize, j: usize) -> &[f64] {
        &self.upper[self.index(i, j)]
    }

    /// Largest degree in `t²` over all pairs.
    pub fn degree(&self) -> usize {
        self.upper.iter().map(|a| a.len() - 1).max().unwrap_or(0)
    }

    /// Multiplies every entry by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        MatrixRadialFunction {
            upper: self.upper.iter().map(|a| a.iter().map(|v| c * v).collect()).collect(),
            ..self.clone()
        }
    }

    /// `p_ij(t)`.
    pub fn p(&self, i: usize, j: usize, t: f64) -> f64 {
        let s = t * t;
        self.pair(i, j).iter().rev().fold(0.0, |acc, c| acc * s + c)
    }

    /// `f_ij(r)`, summed monomial by monomial through [`transform_value`].
    pub fn f(&self, i: usize, j: usize, r: f64) -> f64 {
        self.pair(i, j).iter().enumerate().map(|(k, a)| a * transform_value(self.dimension, k, r)).sum()
    }

    pub fn fourier_matrix(&self, t: f64) -> SymMatrix {
        SymMatrix::from_fn(self.size, |i, j| self.p(i, j, t))
    }

    pub fn to_json(&self) -> String {
        let mut pairs = Vec::new();
        for i in 0..self.size {
            for j in i..self.size {
                pairs.push(PairJson { i, j, a: self.pair(i, j).to_vec() });
            }
        }
        let doc = MatrixJson { n: self.dimension, size: self.size, pairs };
        serde_json::to_string(&doc).expect("certificate serializes")
    }

    /// Parses either `{n, N, pairs: [{i, j, a}, …]}` (0-based indices; each
    /// unordered pair exactly once, or twice with identical coefficients) or
    /// a single function `{n, d, a}`.
    pub fn from_json(text: &str) -> Result<Self, VerifyError> {
        let doc: CertificateJson = serde_json::from_str(text).map_err(|e| VerifyError::InvalidFunction(e.to_string()))?;
        let doc = match doc {
            CertificateJson::Single(f) => return Ok(Self::from_single(&f)),
            CertificateJson::Matrix(m) => m,
        };
        let size = doc.size;
        let mut upper: Vec<Option<Vec<f64>>> = vec![None; size * (size + 1) / 2];
        let probe = MatrixRadialFunction { dimension: doc.n.max(1), size, upper: Vec::new() };
        for pair in doc.pairs {
            if pair.i >= size || pair.j >= size {
                return Err(VerifyError::ShapeMismatch(format!("pair ({}, {}) outside a {size} × {size} family", pair.i, pair.j)));
            }
            let slot = &mut upper[probe.index(pair.i, pair.j)];
            match slot {
                Some(existing) if *existing != pair.a => {
                    return Err(VerifyError::InvalidFunction(format!(
                        "pair ({}, {}) is not symmetric",
                        pair.i.min(pair.j),
                        pair.i.max(pair.j)
                    )))
                }
                Some(_) => {}
                None => *slot = Some(pair.a),
            }
        }
        let upper = upper
            .into_iter()
            .enumerate()
            .map(|(k, a)| a.ok_or_else(|| VerifyError::InvalidFunction(format!("pair #{k} of the upper triangle is missing"))))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(doc.n, size, upper)
    }
}

/// Grid density and tolerance for [`verify_conditions`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSettings {
    pub points: usize,
    /// Grids end at `range_factor·√d·max(1, r_i + r_j)`.
    pub range_factor: f64,
    pub tol: f64,
}

impl Default for GridSettings {
    fn default() -> Self {
        GridSettings { points: 4096, range_factor: 10.0, tol: 1e-6 }
    }
}

/// Margins of the three conditions; see the module documentation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    /// Largest `f_ij(r)` seen with `r ≥ r_i + r_j` (must be `≤ tol`).
    pub separation_margin: f64,
    /// Pair and radius where `separation_margin` was attained.
    pub separation_worst: (usize, usize, f64),
    /// Smallest eigenvalue of `f̂(0) − W′` (must be `≥ −tol`).
    pub volume_margin: f64,
    /// Smallest eigenvalue of `(p_ij(t))` over the grid (must be `≥ −tol`).
    pub positivity_margin: f64,
    /// Radius `t` where `positivity_margin` was attained.
    pub positivity_worst: f64,
    pub grid_points: usize,
    pub tol: f64,
    /// `max_i f_ii(0)`: the density bound if the checks pass.
    pub bound: f64,
}

impl VerificationReport {
    pub fn separation_ok(&self) -> bool {
        self.separation_margin <= self.tol
    }

    pub fn volume_ok(&self) -> bool {
        self.volume_margin >= -self.tol
    }

    pub fn positivity_ok(&self) -> bool {
        self.positivity_margin >= -self.tol
    }

    pub fn passed(&self) -> bool {
        self.separation_ok() && self.volume_ok() && self.positivity_ok()
    }

    pub fn summary(&self) -> String {
        let mark = |ok: bool| if ok { "ok" } else { "FAIL" };
        format!(
            "separation {:.3e} ({}), volume {:.3e} ({}), positivity {:.3e} ({})",
            self.separation_margin,
            mark(self.separation_ok()),
            self.volume_margin,
            mark(self.volume_ok()),
            self.positivity_margin,
            mark(self.positivity_ok()),
        )
    }
}

fn grid(lo: f64, hi: f64, points: usize) -> impl Iterator<Item = f64> {
    let points = points.max(2);
    (0..points).map(move |i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
}

/// Smallest eigenvalue of `(p_ij(t))`, with values inside the rounding error
/// of evaluating the matrix reported as 0.
///
/// Every entry carries an evaluation error of order `ε·Σ_k |a_k| t^{2k}`,
/// which near a double root of `p` or far out where `p` grows like `t^{2d}`
/// dwarfs the true eigenvalue of a singular positive semidefinite family
/// (say a rank-one one). An absolute tolerance cannot tell those apart from
/// real violations without this floor.
fn positivity_eigenvalue(f: &MatrixRadialFunction, t: f64) -> Result<f64, VerifyError> {
    let lambda = min_eigenvalue(&f.fourier_matrix(t))?;
    let s = t * t;
    let magnitude = SymMatrix::from_fn(f.size(), |i, j| f.pair(i, j).iter().rev().fold(0.0, |acc, c| acc * s + c.abs()));
    let degree = f.degree() as f64 + 1.0;
    let floor = 16.0 * (f.size() as f64 + degree) * f64::EPSILON * magnitude.frobenius_norm();
    Ok(if lambda < 0.0 && -lambda <= floor { 0.0 } else { lambda })
}

/// Checks the three certificate conditions on grids.
pub fn verify_conditions(
    f: &MatrixRadialFunction,
    sys: &SphereSystem,
    settings: &GridSettings,
) -> Result<VerificationReport, VerifyError> {
    if f.size() != sys.len() {
        return Err(VerifyError::ShapeMismatch(format!("{} × {} family for {} sphere types", f.size(), f.size(), sys.len())));
    }
    if f.dimension() != sys.dimension() {
        return Err(VerifyError::ShapeMismatch(format!(
            "function lives in dimension {}, spheres in dimension {}",
            f.dimension(),
            sys.dimension()
        )));
    }
    let size = f.size();
    let reach = (f.degree().max(1) as f64).sqrt() * settings.range_factor;

    let mut separation = (f64::NEG_INFINITY, (0, 0, 0.0));
    for i in 0..size {
        for j in i..size {
            let start = sys.radii()[i] + sys.radii()[j];
            let end = start.max(reach * start.max(1.0));
            for r in grid(start, end, settings.points) {
                let v = f.f(i, j, r);
                if v > separation.0 {
                    separation = (v, (i, j, r));
                }
            }
        }
    }

    let roots: Vec<f64> = sys.volumes().iter().map(|v| v.sqrt()).collect();
    let at_zero = SymMatrix::from_fn(size, |i, j| f.p(i, j, 0.0) - roots[i] * roots[j]);
    let volume_margin = min_eigenvalue(&at_zero)?;

    let widest = (0..size).flat_map(|i| (0..size).map(move |j| (i, j))).map(|(i, j)| sys.radii()[i] + sys.radii()[j]).fold(1.0, f64::max);
    let mut positivity = (f64::INFINITY, 0.0);
    for t in grid(0.0, reach * widest, settings.points) {
        let v = if size == 1 { f.p(0, 0, t) } else { positivity_eigenvalue(f, t)? };
        if v < positivity.0 {
            positivity = (v, t);
        }
    }

    let bound = (0..size).map(|i| f.f(i, i, 0.0)).fold(f64::NEG_INFINITY, f64::max);
    Ok(VerificationReport {
        separation_margin: separation.0,
        separation_worst: separation.1,
        volume_margin,
        positivity_margin: positivity.0,
        positivity_worst: positivity.1,
        grid_points: settings.points,
        tol: settings.tol,
        bound,
    })
}

/// `max_i f_ii(0)` for a certificate that passes [`verify_conditions`];
/// `NotCertified` otherwise.
pub fn density_bound_from_f(
    f: &MatrixRadialFunction,
    sys: &SphereSystem,
    settings: &GridSettings,
) -> Result<f64, VerifyError> {
    let report = verify_conditions(f, sys, settings)?;
    if report.passed() {
        Ok(report.bound)
    } else {
        Err(VerifyError::NotCertified(Box::new(report)))
    }
}
