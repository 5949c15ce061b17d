//! Harmonic analysis on the cyclic groups ℤₙ and the Boolean cubes ℤ₂ᵐ, and
//! the Fourier-domain linear program for ϑ′ of Cayley graphs.
//!
//! Conventions: the character indexed by `u` is `χ_u(x) = e^{2πi·ux/n}` on
//! ℤₙ and `(−1)^{popcount(u & x)}` on ℤ₂ᵐ. Coefficients are
//! `f̂(u) = |G|⁻¹ Σₓ f(x)·conj(χ_u(x))` and inversion is
//! `f(x) = Σ_u f̂(u)·χ_u(x)`.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sdp::{lp_as_sdp, solve, SdpError, SdpProblem, SdpStatus, SolverSettings};
use crate::theta::{ThetaError, WeightedGraph};

/// Largest group expanded into an explicit graph.
pub const EXPAND_CAP: usize = 4096;
/// Largest word length for which Hamming-weight class sums are enumerated.
pub const DELSARTE_MAX_LENGTH: u32 = 24;

#[derive(Debug, Error)]
pub enum CayleyError {
    #[error("invalid connection set: {0}")]
    InvalidSpec(String),
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("group of order {order} exceeds the limit {cap}")]
    TooLarge { order: usize, cap: usize },
    #[error("length {length} and distance {distance} must satisfy 1 ≤ distance ≤ length ≤ 24")]
    DelsarteParameters { length: u32, distance: u32 },
    #[error("input has {got} values but the group has order {order}")]
    WrongLength { got: usize, order: usize },
    #[error("solver stopped with status {0:?}")]
    Solver(SdpStatus),
    #[error(transparent)]
    Sdp(#[from] SdpError),
    #[error(transparent)]
    Theta(#[from] ThetaError),
}

/// A finite abelian group: ℤₙ or ℤ₂ᵐ, elements encoded as `0..order`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Group {
    Cyclic(usize),
    /// Words of the given length; group operation is XOR.
    Boolean(u32),
}

impl Group {
    pub fn cyclic(n: usize) -> Result<Self, CayleyError> {
        if n == 0 {
            return Err(CayleyError::InvalidGroup("cyclic group needs order at least 1".into()));
        }
        Ok(Group::Cyclic(n))
    }

    pub fn boolean(m: u32) -> Result<Self, CayleyError> {
        if m > 30 {
            return Err(CayleyError::InvalidGroup(format!("word length {m} exceeds 30")));
        }
        Ok(Group::Boolean(m))
    }

    pub fn order(&self) -> usize {
        match *self {
            Group::Cyclic(n) => n,
            Group::Boolean(m) => 1 << m,
        }
    }

    pub fn add(&self, x: usize, y: usize) -> usize {
        match *self {
            Group::Cyclic(n) => (x + y) % n,
            Group::Boolean(_) => x ^ y,
        }
    }

    pub fn neg(&self, x: usize) -> usize {
        match *self {
            Group::Cyclic(n) => (n - x % n) % n,
            Group::Boolean(_) => x,
        }
    }

    pub fn sub(&self, x: usize, y: usize) -> usize {
        self.add(x, self.neg(y))
    }

    /// `χ_u(x)`.
    pub fn character(&self, u: usize, x: usize) -> Complex64 {
        match *self {
            Group::Cyclic(n) => {
                let k = (u % n) * (x % n) % n;
                // sin(θ) = cos(θ − π/2), expressed in units of 2π/(4n).
                Complex64::new(cos_frac(k, n), cos_frac(4 * k + 3 * n, 4 * n))
            }
            Group::Boolean(_) => Complex64::new(boolean_sign(u, x), 0.0),
        }
    }

    /// `Σ_{v ∈ {u, −u}} χ_v(x)`, which is real.
    pub fn paired_character(&self, u: usize, x: usize) -> f64 {
        match *self {
            Group::Cyclic(n) => {
                let c = cos_frac((u % n) * (x % n) % n, n);
                if self.neg(u) == u {
                    c
                } else {
                    2.0 * c
                }
            }
            Group::Boolean(_) => boolean_sign(u, x),
        }
    }

    /// Rows indexed by `x`, columns by `u`: `T[x][u] = χ_u(x)`.
    pub fn character_table(&self) -> Vec<Vec<Complex64>> {
        let n = self.order();
        (0..n).map(|x| (0..n).map(|u| self.character(u, x)).collect()).collect()
    }

    /// Orbit representatives of `x ↦ −x`, with the orbit sizes.
    pub fn conjugate_classes(&self) -> Vec<(usize, usize)> {
        (0..self.order())
            .filter(|&u| u <= self.neg(u))
            .map(|u| (u, if self.neg(u) == u { 1 } else { 2 }))
            .collect()
    }
}

fn boolean_sign(u: usize, x: usize) -> f64 {
    if (u & x).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `cos(2πk/n)` with the argument folded into `[0, π/2]` so that the
/// symmetric values (0, ±1) come out exact.
fn cos_frac(k: usize, n: usize) -> f64 {
    let k = k % n;
    // Work with 4k/n in quarter turns.
    let (num, den) = (4 * k, n);
    let quadrant = num / den;
    let rem = num % den;
    let t = rem as f64 / den as f64 * (PI / 2.0);
    match (quadrant, rem == 0) {
        (0, true) => 1.0,
        (1, true) | (3, true) => 0.0,
        (2, true) => -1.0,
        (0, _) => t.cos(),
        (1, _) => -t.sin(),
        (2, _) => -t.cos(),
        _ => t.sin(),
    }
}

/// Fourier coefficients `f̂(u)` indexed by dual-group element `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierVector {
    pub group: Group,
    pub coefficients: Vec<Complex64>,
}

impl FourierVector {
    /// Whether the coefficients describe a real function:
    /// `f̂(−u) = conj(f̂(u))` within `tol`.
    pub fn is_real_mirror(&self, tol: f64) -> bool {
        (0..self.coefficients.len())
            .all(|u| (self.coefficients[self.group.neg(u)] - self.coefficients[u].conj()).norm() <= tol)
    }

    /// The inversion formula.
    pub fn inverse(&self) -> Vec<Complex64> {
        inverse_dft(self)
    }
}

/// Fourier transform on the group (FFT for ℤₙ, fast Walsh–Hadamard for ℤ₂ᵐ).
pub fn dft(group: Group, f: &[Complex64]) -> Result<FourierVector, CayleyError> {
    let n = group.order();
    if f.len() != n {
        return Err(CayleyError::WrongLength { got: f.len(), order: n });
    }
    let mut buf = f.to_vec();
    match group {
        Group::Cyclic(_) => FftPlanner::new().plan_fft_forward(n).process(&mut buf),
        Group::Boolean(_) => walsh_hadamard(&mut buf),
    }
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    Ok(FourierVector { group, coefficients: buf })
}

pub fn inverse_dft(fhat: &FourierVector) -> Vec<Complex64> {
    let mut buf = fhat.coefficients.clone();
    match fhat.group {
        Group::Cyclic(n) => FftPlanner::new().plan_fft_inverse(n).process(&mut buf),
        Group::Boolean(_) => walsh_hadamard(&mut buf),
    }
    buf
}

fn walsh_hadamard(a: &mut [Complex64]) {
    let mut h = 1;
    while h < a.len() {
        for block in a.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (p, q) in lo.iter_mut().zip(hi.iter_mut()) {
                let (s, d) = (*p + *q, *p - *q);
                *p = s;
                *q = d;
            }
        }
        h *= 2;
    }
}

/// Whether `K(x, y) = f(x − y)` is positive semidefinite, decided through the
/// Fourier coefficients (its eigenvalues are `|G|·f̂(u)`). Returns `false`
/// straight away when `f(−x) ≠ conj(f(x))`.
pub fn is_positive_type(group: Group, f: &[Complex64], tol: f64) -> Result<bool, CayleyError> {
    let n = group.order();
    if f.len() != n {
        return Err(CayleyError::WrongLength { got: f.len(), order: n });
    }
    if (0..n).any(|x| (f[group.neg(x)] - f[x].conj()).norm() > tol) {
        return Ok(false);
    }
    let fhat = dft(group, f)?;
    Ok(fhat.coefficients.iter().all(|c| c.re >= -tol))
}

/// Cayley graph data: a group and a symmetric connection set not containing 0.
#[derive(Debug, Clone, PartialEq)]
pub struct CayleySpec {
    group: Group,
    sigma: BTreeSet<usize>,
}

impl CayleySpec {
    pub fn new(group: Group, sigma: impl IntoIterator<Item = usize>) -> Result<Self, CayleyError> {
        let sigma: BTreeSet<usize> = sigma.into_iter().collect();
        let n = group.order();
        if let Some(&x) = sigma.iter().find(|&&x| x >= n) {
            return Err(CayleyError::InvalidSpec(format!("element {x} is outside the group of order {n}")));
        }
        if sigma.contains(&0) {
            return Err(CayleyError::InvalidSpec("the identity cannot be in the connection set".into()));
        }
        if let Some(&x) = sigma.iter().find(|&&x| !sigma.contains(&group.neg(x))) {
            return Err(CayleyError::InvalidSpec(format!("set is not symmetric: {x} present but {} missing", group.neg(x))));
        }
        Ok(CayleySpec { group, sigma })
    }

    pub fn group(&self) -> Group {
        self.group
    }

    pub fn sigma(&self) -> &BTreeSet<usize> {
        &self.sigma
    }

    /// Representatives `x` of `{x, −x}` with `x ∉ Σ ∪ {0}`.
    pub fn nonedge_representatives(&self) -> Vec<usize> {
        (1..self.group.order())
            .filter(|&x| x <= self.group.neg(x) && !self.sigma.contains(&x))
            .collect()
    }
}

/// The explicit Cayley graph: `x ~ y` iff `x − y ∈ Σ`, unit weights.
pub fn expand_to_graph(spec: &CayleySpec) -> Result<WeightedGraph, CayleyError> {
    let n = spec.group.order();
    if n > EXPAND_CAP {
        return Err(CayleyError::TooLarge { order: n, cap: EXPAND_CAP });
    }
    let mut edges = Vec::new();
    for x in 0..n {
        for &s in &spec.sigma {
            let y = spec.group.add(x, s);
            if x < y {
                edges.push((x, y));
            }
        }
    }
    Ok(WeightedGraph::unweighted(n, &edges)?)
}

/// Fourier-domain LP for ϑ′ of a Cayley graph, in the solver's max form.
///
/// There is one nonnegative variable per class `{u, −u}` holding the common
/// value of `f̂`; the LP is
///
/// ```text
///   min Σ_u f̂(u)  subject to  f̂(0) ≥ 1,
///                              Σ_u f̂(u)·χ_u(x) ≤ 0   for x ∉ Σ ∪ {0},
///                              f̂ ≥ 0
/// ```
///
/// with one row per representative of `{x, −x}`, and it is emitted as
/// `max −Σ_u f̂(u)`. Variables follow [`Group::conjugate_classes`]; row 0 is
/// the `f̂(0) ≥ 1` row and the remaining rows follow
/// [`CayleySpec::nonedge_representatives`].
pub fn cayley_theta_lp(spec: &CayleySpec) -> Result<SdpProblem, CayleyError> {
    let g = spec.group;
    let classes = g.conjugate_classes();
    let costs: Vec<f64> = classes.iter().map(|&(_, size)| -(size as f64)).collect();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let mut first = vec![0.0; classes.len()];
    first[0] = -1.0;
    rows.push(first);
    rhs.push(-1.0);
    for x in spec.nonedge_representatives() {
        rows.push(classes.iter().map(|&(u, _)| g.paired_character(u, x)).collect());
        rhs.push(0.0);
    }
    Ok(lp_as_sdp(&costs, &rows, &rhs)?)
}

/// Solved Fourier-domain LP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierLpSolution {
    /// The optimal value `Σ f̂`.
    pub value: f64,
    /// Optimal `f̂`, one entry per LP variable (conjugate class or weight class).
    pub fhat: Vec<f64>,
    /// Dual multipliers, one per LP row.
    pub dual_certificate: Vec<f64>,
    pub duality_gap: f64,
}

fn solve_fourier_lp(problem: &SdpProblem, n_vars: usize, settings: &SolverSettings) -> Result<FourierLpSolution, CayleyError> {
    let sol = solve(problem, settings)?;
    if sol.status != SdpStatus::Optimal {
        return Err(CayleyError::Solver(sol.status));
    }
    Ok(FourierLpSolution {
        value: -sol.primal_value,
        fhat: sol.x[..n_vars].iter().map(|b| b.get(0, 0)).collect(),
        dual_certificate: sol.y.clone(),
        duality_gap: sol.gap,
    })
}

/// Solves [`cayley_theta_lp`]; `fhat` is indexed like
/// [`Group::conjugate_classes`].
pub fn cayley_theta(spec: &CayleySpec, settings: &SolverSettings) -> Result<FourierLpSolution, CayleyError> {
    let lp = cayley_theta_lp(spec)?;
    solve_fourier_lp(&lp, spec.group.conjugate_classes().len(), settings)
}

/// Connection set of the code graph on ℤ₂ᵐ: words of weight `1..distance`.
pub fn delsarte_spec(length: u32, distance: u32) -> Result<CayleySpec, CayleyError> {
    check_delsarte(length, distance)?;
    let group = Group::boolean(length)?;
    let sigma = (1..group.order()).filter(|x| (x.count_ones()) < distance);
    CayleySpec::new(group, sigma)
}

fn check_delsarte(length: u32, distance: u32) -> Result<(), CayleyError> {
    if !(1 <= distance && distance <= length && length <= DELSARTE_MAX_LENGTH) {
        return Err(CayleyError::DelsarteParameters { length, distance });
    }
    Ok(())
}

/// `S[k][j] = Σ_{wt(u) = k} (−1)^{u·x}` for any `x` of weight `j`, by direct
/// enumeration of all words with `x` the lowest `j` bits.
pub fn weight_class_sums(length: u32) -> Vec<Vec<i64>> {
    let m = length as usize;
    let mut s = vec![vec![0i64; m + 1]; m + 1];
    for u in 0u64..1 << m {
        let k = u.count_ones() as usize;
        let mut parity = 0;
        s[k][0] += 1;
        for j in 1..=m {
            parity ^= (u >> (j - 1)) & 1;
            s[k][j] += if parity == 0 { 1 } else { -1 };
        }
    }
    s
}

/// The Fourier LP on ℤ₂ᵐ for codes of minimum distance `distance`, collapsed
/// to one variable per Hamming weight class (`f̂` is constant on each class).
/// Variable `k` carries weight `C(m, k)` in the objective; rows are `f̂(0) ≥ 1`
/// and one row per weight `j ≥ distance`.
pub fn delsarte_lp(length: u32, distance: u32) -> Result<SdpProblem, CayleyError> {
    check_delsarte(length, distance)?;
    let m = length as usize;
    let sums = weight_class_sums(length);
    let costs: Vec<f64> = (0..=m).map(|k| -(sums[k][0] as f64)).collect();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let mut first = vec![0.0; m + 1];
    first[0] = -1.0;
    rows.push(first);
    rhs.push(-1.0);
    for j in distance as usize..=m {
        rows.push((0..=m).map(|k| sums[k][j] as f64).collect());
        rhs.push(0.0);
    }
    Ok(lp_as_sdp(&costs, &rows, &rhs)?)
}

/// Delsarte's bound on the size of a binary code; `fhat[k]` is the value on
/// weight class `k`.
pub fn delsarte(length: u32, distance: u32, settings: &SolverSettings) -> Result<FourierLpSolution, CayleyError> {
    let lp = delsarte_lp(length, distance)?;
    solve_fourier_lp(&lp, length as usize + 1, settings)
}

pub fn delsarte_bound(length: u32, distance: u32) -> Result<f64, CayleyError> {
    Ok(delsarte(length, distance, &SolverSettings::default())?.value)
}
