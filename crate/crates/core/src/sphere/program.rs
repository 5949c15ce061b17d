//! The sum-of-squares program for Cohn–Elkies functions.
//!
//! With `s = ‖u‖²` (Fourier side) or `s = ‖x‖²` (space side), write
//! `p(s) = Σ_{k≤d} a_k s^k` and `f(x) = e^{−π‖x‖²}·g(‖x‖²)`, where
//! `g(s) = Σ a_k k! π^{−k} L_k^{n/2−1}(πs)`. The program is
//!
//! ```text
//!   minimize   g(0)
//!   subject to p(s)  = σ_Q(s)                       (f̂ ≥ 0)
//!              −g(s) = σ_R(s) + (s − 4)·σ_S(s)       (f(x) ≤ 0 for ‖x‖ ≥ 2)
//!              p(0) ≥ vol Bₙ
//! ```
//!
//! where each `σ(s) = v_e(s)ᵀ·E·v_e(s) + s·v_o(s)ᵀ·O·v_o(s)` with `E, O ⪰ 0` is
//! nonnegative on `s ≥ 0` (the even/odd split of an even sum of squares in
//! `t = √s`). `σ_Q`, `σ_R` have degree ≤ d and `σ_S` degree ≤ d − 2. The
//! coefficients `a_k` are not separate variables: they are read off `σ_Q`.
//! The second identity is matched coefficient-wise in a test basis of
//! polynomials of degree ≤ d.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::laguerre::{laguerre_coeffs, LaguerreBasis, Projector};
use super::radial::{ball_volume, factorial_over_pi_power, RadialFunction};
use super::SphereError;
use crate::sdp::{solve, SdpProblem, SdpSolution, SdpStatus, SolverSettings, Triplet};

/// Smallest supported degree: from here on both parts of the even/odd split
/// of the `S` block are nonempty.
pub const MIN_DEGREE: usize = 3;

/// Polynomial basis used both for the sum-of-squares vectors and for
/// matching the polynomial identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    /// `1, s, s², …` — numerically fragile beyond small degrees.
    Monomial,
    /// `P_k(s) = μ_k⁻¹ L_k^{n/2−1}(2πs)`.
    #[default]
    #[serde(rename = "laguerre")]
    ScaledLaguerre,
}

impl std::str::FromStr for Basis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "monomial" => Ok(Basis::Monomial),
            "laguerre" => Ok(Basis::ScaledLaguerre),
            other => Err(format!("unknown basis `{other}` (expected laguerre or monomial)")),
        }
    }
}

// Block layout of the program.
const QE: usize = 0;
const QO: usize = 1;
const RE: usize = 2;
const RO: usize = 3;
const SE: usize = 4;
const SO: usize = 5;
const SLACK: usize = 6;

fn block_orders(d: usize) -> [usize; 7] {
    [d / 2 + 1, (d - 1) / 2 + 1, d / 2 + 1, (d - 1) / 2 + 1, (d - 2) / 2 + 1, (d - 3) / 2 + 1, 1]
}

/// The multiplier in front of `v(s)ᵀ·X·v(s)` for each block.
fn multiplier(block: usize, s: f64) -> f64 {
    match block {
        QE | RE => 1.0,
        QO | RO => s,
        SE => s - 4.0,
        SO => s * (s - 4.0),
        _ => unreachable!("slack block has no polynomial"),
    }
}

/// Monomial coefficients of the multiplier.
fn multiplier_coeffs(block: usize) -> &'static [f64] {
    match block {
        QE | RE => &[1.0],
        QO | RO => &[0.0, 1.0],
        SE => &[-4.0, 1.0],
        SO => &[0.0, -4.0, 1.0],
        _ => unreachable!("slack block has no polynomial"),
    }
}

/// The pieces of the program that depend on the basis.
struct BasisData {
    /// `coef[block][(i, j)]` = test-basis coefficients of `m_block(s)·v_i(s)·v_j(s)`.
    coef: Vec<Vec<Vec<Vec<f64>>>>,
    /// Maps test-basis coefficients of `p` to those of `g`: `[g]_k = Σ_m T[k][m]·[p]_m`.
    transform: Vec<Vec<f64>>,
    /// Test-basis functions at 0.
    at_zero: Vec<f64>,
}

fn monomial_data(n: usize, d: usize, orders: &[usize; 7]) -> BasisData {
    let alpha = n as f64 / 2.0 - 1.0;
    let coef = (0..SLACK)
        .map(|b| {
            (0..orders[b])
                .map(|i| {
                    (0..orders[b])
                        .map(|j| {
                            let mut c = vec![0.0; d + 1];
                            for (e, m) in multiplier_coeffs(b).iter().enumerate() {
                                c[i + j + e] += m;
                            }
                            c
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    // s^m ↦ m!π^{−m} L_m(πs) = Σ_k m!π^{−m} ℓ_{m,k} π^k s^k.
    let mut transform = vec![vec![0.0; d + 1]; d + 1];
    for m in 0..=d {
        let lead = factorial_over_pi_power(m);
        for (k, l) in laguerre_coeffs(m, alpha).iter().enumerate() {
            transform[k][m] = lead * l * PI.powi(k as i32);
        }
    }
    let mut at_zero = vec![0.0; d + 1];
    at_zero[0] = 1.0;
    BasisData { coef, transform, at_zero }
}

fn laguerre_data(n: usize, d: usize, orders: &[usize; 7]) -> BasisData {
    let basis = LaguerreBasis::new(n, d);
    let proj = Projector::new(&basis, d);
    let vmax = orders.iter().take(SLACK).copied().max().unwrap_or(1);
    let node_values: Vec<Vec<f64>> = proj.nodes.iter().map(|&s| basis.eval_all(vmax - 1, s)).collect();
    let coef = (0..SLACK)
        .map(|b| {
            (0..orders[b])
                .map(|i| {
                    (0..orders[b])
                        .map(|j| {
                            let values: Vec<f64> = proj
                                .nodes
                                .iter()
                                .zip(&node_values)
                                .map(|(&s, v)| multiplier(b, s) * v[i] * v[j])
                                .collect();
                            let mut c = proj.project(&values);
                            let scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                            // Coefficients beyond the product's degree are pure rounding.
                            c.iter_mut().for_each(|v| {
                                if v.abs() < 1e-14 * scale {
                                    *v = 0.0
                                }
                            });
                            c
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let transform = (0..=d)
        .map(|k| (0..=d).map(|m| if m != k { 0.0 } else if k % 2 == 0 { 1.0 } else { -1.0 }).collect())
        .collect();
    let at_zero = basis.eval_all(d, 0.0);
    BasisData { coef, transform, at_zero }
}

fn check_args(n: usize, d: usize) -> Result<(), SphereError> {
    if n == 0 {
        return Err(SphereError::InvalidDimension(n));
    }
    if d < MIN_DEGREE {
        return Err(SphereError::DegreeTooSmall { degree: d, minimum: MIN_DEGREE });
    }
    Ok(())
}

/// Program data plus what is needed to turn a solution back into `f`.
struct Program {
    problem: SdpProblem,
    data: BasisData,
    basis: Basis,
    n: usize,
    d: usize,
}

fn build(n: usize, d: usize, basis: Basis) -> Result<Program, SphereError> {
    check_args(n, d)?;
    let orders = block_orders(d);
    let data = match basis {
        Basis::Monomial => monomial_data(n, d, &orders),
        Basis::ScaledLaguerre => laguerre_data(n, d, &orders),
    };
    let mut b = SdpProblem::builder(orders.to_vec());

    // Objective: maximize −g(0) = −Σ_k [g]_k·B_k(0).
    let g_at_zero: Vec<f64> =
        (0..=d).map(|m| -(0..=d).map(|k| data.at_zero[k] * data.transform[k][m]).sum::<f64>()).collect();
    for blk in [QE, QO] {
        for i in 0..orders[blk] {
            for j in 0..=i {
                let v: f64 = data.coef[blk][i][j].iter().zip(&g_at_zero).map(|(c, w)| c * w).sum();
                if v != 0.0 {
                    b.objective_entry(blk, i, j, v);
                }
            }
        }
    }

    // g + σ_R + (s − 4)·σ_S = 0, one row per test-basis function.
    for k in 0..=d {
        let mut entries: Vec<Triplet> = Vec::new();
        for blk in [QE, QO] {
            for i in 0..orders[blk] {
                for j in 0..=i {
                    let v: f64 = data.coef[blk][i][j].iter().zip(&data.transform[k]).map(|(c, t)| c * t).sum();
                    if v != 0.0 {
                        entries.push((blk, i, j, v));
                    }
                }
            }
        }
        for blk in [RE, RO, SE, SO] {
            for i in 0..orders[blk] {
                for j in 0..=i {
                    let v = data.coef[blk][i][j][k];
                    if v != 0.0 {
                        entries.push((blk, i, j, v));
                    }
                }
            }
        }
        b.constraint(entries, 0.0);
    }

    // p(0) − slack = vol Bₙ.
    let mut entries: Vec<Triplet> = vec![(SLACK, 0, 0, -1.0)];
    for blk in [QE, QO] {
        for i in 0..orders[blk] {
            for j in 0..=i {
                let v: f64 = data.coef[blk][i][j].iter().zip(&data.at_zero).map(|(c, z)| c * z).sum();
                if v != 0.0 {
                    entries.push((blk, i, j, v));
                }
            }
        }
    }
    b.constraint(entries, ball_volume(n));

    let problem = b.build()?;
    Ok(Program { problem, data, basis, n, d })
}

/// Builds the program for dimension `n` and degree `d` (so `p` has degree
/// `2d` in the radius). The constraints are `d + 1` identity rows followed by
/// the `p(0) ≥ vol Bₙ` row; the optimal value is `−g(0)`.
pub fn build_sphere_sdp(n: usize, d: usize, basis: Basis) -> Result<SdpProblem, SphereError> {
    Ok(build(n, d, basis)?.problem)
}

impl Program {
    /// Monomial coefficients of `p` from the solved `Q` blocks.
    fn extract(&self, sol: &SdpSolution) -> Result<RadialFunction, SphereError> {
        let orders = block_orders(self.d);
        let mut p_test = vec![0.0; self.d + 1];
        for blk in [QE, QO] {
            let x = &sol.x[blk];
            for i in 0..orders[blk] {
                for j in 0..orders[blk] {
                    for (k, c) in self.data.coef[blk][i][j].iter().enumerate() {
                        p_test[k] += c * x.get(i, j);
                    }
                }
            }
        }
        let a = match self.basis {
            Basis::Monomial => p_test,
            Basis::ScaledLaguerre => LaguerreBasis::new(self.n, self.d).to_monomials(&p_test),
        };
        RadialFunction::new(self.n, a)
    }
}

/// Settings for [`sphere_bound`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereSettings {
    pub solver: SolverSettings,
    pub basis: Basis,
    /// Points per grid in the post-solve checks.
    pub grid_points: usize,
    /// End of the `p(t) ≥ 0` grid; `None` means `10·√d`.
    pub t_max: Option<f64>,
    /// End of the `f(r) ≤ 0` grid (which starts at 2); `None` means `10·√d`.
    pub r_max: Option<f64>,
    /// Tolerance of the post-solve checks.
    pub check_tol: f64,
}

impl Default for SphereSettings {
    fn default() -> Self {
        SphereSettings {
            solver: SolverSettings::default(),
            basis: Basis::ScaledLaguerre,
            grid_points: 2048,
            t_max: None,
            r_max: None,
            check_tol: 1e-6,
        }
    }
}

/// Floating-point grid checks of the three conditions (not a rigorous proof).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    /// `min p(t)` over the grid on `[0, t_max]`.
    pub min_p: f64,
    /// `max f(r)` over the grid on `[2, r_max]`.
    pub max_f_outside: f64,
    /// `p(0) − vol Bₙ`.
    pub volume_margin: f64,
    pub grid_points: usize,
    pub t_max: f64,
    pub r_max: f64,
    pub tol: f64,
}

impl GridReport {
    pub fn passed(&self) -> bool {
        self.min_p >= -self.tol && self.max_f_outside <= self.tol && self.volume_margin >= -self.tol
    }
}

/// Grid checks for a single radial function with unit balls.
pub fn grid_check(f: &RadialFunction, points: usize, t_max: f64, r_max: f64, tol: f64) -> GridReport {
    let points = points.max(2);
    let step = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / (points - 1) as f64;
    let min_p = (0..points).map(|i| f.p(step(0.0, t_max, i))).fold(f64::INFINITY, f64::min);
    let max_f_outside = (0..points).map(|i| f.eval_f(step(2.0, r_max, i))).fold(f64::NEG_INFINITY, f64::max);
    GridReport {
        min_p,
        max_f_outside,
        volume_margin: f.p(0.0) - ball_volume(f.dimension()),
        grid_points: points,
        t_max,
        r_max,
        tol,
    }
}

/// Solver diagnostics included in a sphere-bound result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub status: SdpStatus,
    pub iterations: usize,
    /// `−(primal value)`, i.e. the program's `g(0)` before rescaling.
    pub objective: f64,
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereReport {
    pub dimension: usize,
    pub degree: usize,
    pub basis: Basis,
    pub solver: SolverSummary,
    /// Factor applied to the solved `f` so that `p(0) ≥ vol Bₙ` holds exactly.
    pub rescale: f64,
    pub grid: GridReport,
}

/// Solves the program and returns the density bound `f(0)` for packings of
/// unit balls in ℝⁿ, the function `f`, and a report with post-solve checks.
pub fn sphere_bound(n: usize, d: usize, settings: &SphereSettings) -> Result<(f64, RadialFunction, SphereReport), SphereError> {
    let program = build(n, d, settings.basis)?;
    let sol = solve(&program.problem, &settings.solver)?;
    let summary = SolverSummary {
        status: sol.status,
        iterations: sol.iterations,
        objective: -sol.primal_value,
        gap: sol.gap,
        primal_residual: sol.primal_residual,
        dual_residual: sol.dual_residual,
    };
    if sol.status != SdpStatus::Optimal {
        return Err(SphereError::Solver { status: sol.status, summary: Box::new(summary) });
    }
    let raw = program.extract(&sol)?;
    let vol = ball_volume(n);
    let rescale = (vol / raw.p(0.0)).max(1.0);
    let f = raw.scaled(rescale);
    let default_end = 10.0 * (d as f64).sqrt();
    let grid = grid_check(
        &f,
        settings.grid_points,
        settings.t_max.unwrap_or(default_end),
        settings.r_max.unwrap_or(default_end),
        settings.check_tol,
    );
    let report = SphereReport { dimension: n, degree: d, basis: settings.basis, solver: summary, rescale, grid };
    if !report.grid.passed() {
        return Err(SphereError::VerificationFailed(Box::new(report)));
    }
    Ok((f.value_at_origin(), f, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_is_checked() {
        assert!(matches!(build_sphere_sdp(2, 2, Basis::ScaledLaguerre), Err(SphereError::DegreeTooSmall { degree: 2, .. })));
        assert!(matches!(build_sphere_sdp(0, 5, Basis::Monomial), Err(SphereError::InvalidDimension(0))));
    }

    #[test]
    fn constraint_count() {
        for d in 3..12 {
            for basis in [Basis::Monomial, Basis::ScaledLaguerre] {
                let p = build_sphere_sdp(3, d, basis).unwrap();
                assert_eq!(p.num_constraints(), d + 2);
            }
        }
    }

    #[test]
    fn basis_parses() {
        assert_eq!("laguerre".parse::<Basis>().unwrap(), Basis::ScaledLaguerre);
        assert_eq!("monomial".parse::<Basis>().unwrap(), Basis::Monomial);
        assert!("chebyshev".parse::<Basis>().is_err());
    }
}
