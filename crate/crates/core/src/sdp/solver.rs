//! Infeasible-start primal–dual interior-point method.
//!
//! Search directions use the HKM scaling (`ΔX` symmetrized from
//! `ΔX·Z + X·ΔZ = σμI − XZ`) with a Mehrotra predictor–corrector step. Step
//! lengths follow a fraction-to-boundary rule computed from the smallest
//! eigenvalue of `L⁻¹·ΔX·L⁻ᵀ`. Before iterating, each block is rescaled by a
//! diagonal congruence and each constraint row is normalized; results are
//! mapped back to the original problem. Every loop runs in a fixed order, so
//! identical inputs give bit-identical iterates.

use serde::{Deserialize, Serialize};

use super::problem::SdpProblem;
use super::SdpError;
use crate::linalg::{cholesky_inverse, cholesky_solve, cholesky_strict, jacobi_eigen, Matrix, SymMatrix};

const FRACTION_TO_BOUNDARY: f64 = 0.98;
const BISECTION_STEPS: usize = 40;
const STALL_STEP: f64 = 1e-7;
const STALL_LIMIT: usize = 4;
const BACKTRACK_STEPS: usize = 30;

/// Stopping rule: both relative residuals `≤ feas_tol` and the absolute gap
/// `|dual_value − primal_value| ≤ gap_tol`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iter: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings { gap_tol: 1e-8, feas_tol: 1e-8, max_iter: 100 }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<(), SdpError> {
        if !(self.gap_tol > 0.0 && self.gap_tol.is_finite()) || !(self.feas_tol > 0.0 && self.feas_tol.is_finite()) {
            return Err(SdpError::Settings("tolerances must be positive and finite".into()));
        }
        if self.max_iter == 0 {
            return Err(SdpError::Settings("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SdpStatus {
    Optimal,
    MaxIterations,
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationLog {
    pub iteration: usize,
    pub primal_value: f64,
    pub dual_value: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub mu: f64,
    pub primal_step: f64,
    pub dual_step: f64,
}

/// Primal/dual pair returned by [`solve`].
///
/// `primal_value = tr(C·X)` and `dual_value = bᵀy`; for a feasible pair the
/// optimum lies in `[primal_value, dual_value]`. Residuals are relative:
/// `‖b − A(X)‖₂ / (1 + ‖b‖₂)` and `‖A*(y) − Z − C‖_F / (1 + ‖C‖_F)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub x: Vec<SymMatrix>,
    pub y: Vec<f64>,
    pub z: Vec<SymMatrix>,
    pub primal_value: f64,
    pub dual_value: f64,
    /// `|dual_value − primal_value|`.
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    /// Estimated condition number of the last Schur complement factored.
    pub condition_estimate: Option<f64>,
    #[serde(default)]
    pub history: Vec<IterationLog>,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SdpStatus::Optimal
    }

    /// Midpoint of the primal/dual bracket.
    pub fn value(&self) -> f64 {
        0.5 * (self.primal_value + self.dual_value)
    }
}

/// Constraint matrix restricted to one dense block.
struct BlockPart {
    entries: Vec<(usize, usize, f64)>,
    dense: Option<Matrix>,
}

impl BlockPart {
    fn new(order: usize, entries: Vec<(usize, usize, f64)>) -> Self {
        let dense = (2 * entries.len() > order).then(|| {
            let mut a = Matrix::zeros(order, order);
            for &(i, j, v) in &entries {
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
            a
        });
        BlockPart { entries, dense }
    }

    /// `tr(A·W)` for any square `W`.
    fn dot(&self, w: &Matrix) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j, v)| if i == j { v * w[(i, i)] } else { v * (w[(i, j)] + w[(j, i)]) })
            .sum()
    }

    /// `X·A·Y`.
    fn sandwich(&self, x: &Matrix, y: &Matrix) -> Matrix {
        if let Some(a) = &self.dense {
            return x.matmul(a).matmul(y);
        }
        let n = x.rows();
        let mut out = Matrix::zeros(n, n);
        let mut outer = |p: usize, q: usize, v: f64| {
            for r in 0..n {
                let xr = v * x[(r, p)];
                if xr == 0.0 {
                    continue;
                }
                for c in 0..n {
                    out[(r, c)] += xr * y[(q, c)];
                }
            }
        };
        for &(i, j, v) in &self.entries {
            outer(i, j, v);
            if i != j {
                outer(j, i, v);
            }
        }
        out
    }
}

/// Block iterate with dense blocks (order ≥ 2) and scalar blocks split apart.
#[derive(Clone)]
struct Point {
    dense: Vec<Matrix>,
    scalar: Vec<f64>,
}

impl Point {
    fn dot(&self, other: &Point) -> f64 {
        let d: f64 = self.dense.iter().zip(&other.dense).map(|(a, b)| a.dot(b)).sum();
        d + self.scalar.iter().zip(&other.scalar).map(|(a, b)| a * b).sum::<f64>()
    }

    fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    fn add_scaled(&mut self, c: f64, other: &Point) {
        for (a, b) in self.dense.iter_mut().zip(&other.dense) {
            a.add_scaled(c, b);
        }
        for (a, b) in self.scalar.iter_mut().zip(&other.scalar) {
            *a += c * b;
        }
    }
}

enum Slot {
    Dense(usize),
    Scalar(usize),
}

struct Structure {
    m: usize,
    slots: Vec<Slot>,
    dense_orders: Vec<usize>,
    dense_parts: Vec<Vec<(usize, BlockPart)>>,
    scalar_parts: Vec<Vec<(usize, f64)>>,
    c: Point,
    /// Right-hand side of the equilibrated rows.
    b: Vec<f64>,
    /// Norm of each original constraint row; row `k` is stored divided by it.
    row_scale: Vec<f64>,
    /// Diagonal congruence scaling per original block.
    var_scale: Vec<Vec<f64>>,
}

impl Structure {
    fn new(p: &SdpProblem) -> Self {
        let mut slots = Vec::new();
        let mut dense_orders = Vec::new();
        let mut n_scalar = 0;
        for &n in p.block_orders() {
            if n == 1 {
                slots.push(Slot::Scalar(n_scalar));
                n_scalar += 1;
            } else {
                slots.push(Slot::Dense(dense_orders.len()));
                dense_orders.push(n);
            }
        }
        // Congruence scaling X = D·X'·D per block, with D chosen so every
        // row/column index of the constraint data has unit norm.
        let mut var_scale: Vec<Vec<f64>> = p.block_orders().iter().map(|&n| vec![0.0; n]).collect();
        for con in p.constraints() {
            for &(b, i, j, v) in con.entries() {
                var_scale[b][i] += v * v;
                if i != j {
                    var_scale[b][j] += v * v;
                }
            }
        }
        for blk in var_scale.iter_mut() {
            for v in blk.iter_mut() {
                *v = if *v > 0.0 { v.sqrt().sqrt().recip() } else { 1.0 };
            }
        }
        // Then equilibrate rows to unit Frobenius norm; the iterates see a
        // better conditioned Schur complement and residuals are mapped back.
        let row_scale: Vec<f64> = p
            .constraints()
            .iter()
            .map(|c| {
                let norm = c
                    .entries()
                    .iter()
                    .map(|&(b, i, j, v)| {
                        let w = v * var_scale[b][i] * var_scale[b][j];
                        if i == j { w * w } else { 2.0 * w * w }
                    })
                    .sum::<f64>()
                    .sqrt();
                if norm > 0.0 { norm } else { 1.0 }
            })
            .collect();
        let mut dense_entries: Vec<Vec<(usize, Vec<(usize, usize, f64)>)>> = vec![Vec::new(); dense_orders.len()];
        let mut scalar_parts: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_scalar];
        for (k, con) in p.constraints().iter().enumerate() {
            for &(b, i, j, v) in con.entries() {
                let v = v * var_scale[b][i] * var_scale[b][j] / row_scale[k];
                match slots[b] {
                    Slot::Scalar(s) => scalar_parts[s].push((k, v)),
                    Slot::Dense(d) => {
                        let list = &mut dense_entries[d];
                        match list.last_mut() {
                            Some((last, e)) if *last == k => e.push((i, j, v)),
                            _ => list.push((k, vec![(i, j, v)])),
                        }
                    }
                }
            }
        }
        let dense_parts = dense_entries
            .into_iter()
            .zip(&dense_orders)
            .map(|(list, &n)| list.into_iter().map(|(k, e)| (k, BlockPart::new(n, e))).collect())
            .collect();
        let mut c = Point {
            dense: dense_orders.iter().map(|&n| Matrix::zeros(n, n)).collect(),
            scalar: vec![0.0; n_scalar],
        };
        for (blk, cm) in p.objective().iter().enumerate() {
            let ds = &var_scale[blk];
            match slots[blk] {
                Slot::Scalar(s) => c.scalar[s] = cm.get(0, 0) * ds[0] * ds[0],
                Slot::Dense(d) => c.dense[d] = Matrix::from_fn(ds.len(), ds.len(), |i, j| cm.get(i, j) * ds[i] * ds[j]),
            }
        }
        let b = p.rhs().iter().zip(&row_scale).map(|(bi, r)| bi / r).collect();
        Structure { m: p.num_constraints(), slots, dense_orders, dense_parts, scalar_parts, c, b, row_scale, var_scale }
    }

    /// Applies `W ↦ D^e·W·D^e` blockwise (`e = 1` maps a scaled primal
    /// matrix back to the original problem, `e = −1` a dual one).
    fn congruence(&self, w: &Point, exponent: i32) -> Point {
        let mut out = w.clone();
        for (slot, ds) in self.slots.iter().zip(&self.var_scale) {
            match *slot {
                Slot::Scalar(k) => out.scalar[k] *= ds[0].powi(2 * exponent),
                Slot::Dense(d) => {
                    let m = &mut out.dense[d];
                    for i in 0..ds.len() {
                        for j in 0..ds.len() {
                            m[(i, j)] *= (ds[i] * ds[j]).powi(exponent);
                        }
                    }
                }
            }
        }
        out
    }

    fn scaled_identity(&self, t: f64) -> Point {
        Point {
            dense: self.dense_orders.iter().map(|&n| {
                let mut m = Matrix::identity(n);
                m.scale(t);
                m
            }).collect(),
            scalar: vec![t; self.scalar_parts.len()],
        }
    }

    fn zeros(&self) -> Point {
        self.scaled_identity(0.0)
    }

    fn apply(&self, w: &Point) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        for (parts, wd) in self.dense_parts.iter().zip(&w.dense) {
            for (k, part) in parts {
                out[*k] += part.dot(wd);
            }
        }
        for (parts, &ws) in self.scalar_parts.iter().zip(&w.scalar) {
            for &(k, v) in parts {
                out[k] += v * ws;
            }
        }
        out
    }

    fn adjoint(&self, y: &[f64]) -> Point {
        let mut out = self.zeros();
        for (parts, od) in self.dense_parts.iter().zip(out.dense.iter_mut()) {
            for (k, part) in parts {
                let yk = y[*k];
                for &(i, j, v) in &part.entries {
                    od[(i, j)] += yk * v;
                    if i != j {
                        od[(j, i)] += yk * v;
                    }
                }
            }
        }
        for (parts, os) in self.scalar_parts.iter().zip(out.scalar.iter_mut()) {
            for &(k, v) in parts {
                *os += y[k] * v;
            }
        }
        out
    }

    /// Schur complement `M_kl = tr(A_k · X · A_l · Z⁻¹)`.
    fn schur(&self, x: &Point, zinv: &Point) -> Matrix {
        let mut m = Matrix::zeros(self.m, self.m);
        for ((parts, xd), zd) in self.dense_parts.iter().zip(&x.dense).zip(&zinv.dense) {
            for (k, part) in parts {
                let g = part.sandwich(xd, zd);
                for (l, other) in parts {
                    m[(*l, *k)] += other.dot(&g);
                }
            }
        }
        for ((parts, &xs), &zs) in self.scalar_parts.iter().zip(&x.scalar).zip(&zinv.scalar) {
            let ratio = xs * zs;
            for &(k, vk) in parts {
                for &(l, vl) in parts {
                    m[(l, k)] += vk * vl * ratio;
                }
            }
        }
        m.symmetrize();
        m
    }

    fn to_blocks(&self, p: &Point) -> Vec<SymMatrix> {
        self.slots
            .iter()
            .map(|s| match *s {
                Slot::Dense(d) => SymMatrix::from_dense_sym(&p.dense[d]),
                Slot::Scalar(k) => SymMatrix::diagonal(&[p.scalar[k]]).expect("finite scalar"),
            })
            .collect()
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Largest `t` (capped at `cap`) with `X + t·ΔX` positive definite, found by
/// bisection on Cholesky success. `X` itself must be positive definite.
fn boundary_step_bisection(x: &Matrix, dx: &Matrix, cap: f64) -> f64 {
    let trial = |t: f64| {
        let mut y = x.clone();
        y.add_scaled(t, dx);
        cholesky_strict(&y).is_some()
    };
    if trial(cap) {
        return cap;
    }
    let (mut lo, mut hi) = (0.0, cap);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if trial(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Largest `t` (capped at `cap`) with `X + t·ΔX ⪰ 0`: with `X = L·Lᵀ` this is
/// `−1/λ_min(L⁻¹·ΔX·L⁻ᵀ)`. Unlike bisection on Cholesky success it stays
/// accurate when `X` is nearly singular. Falls back to bisection if the
/// eigenvalue computation does not converge.
fn boundary_step_dense(x: &Matrix, dx: &Matrix, cap: f64) -> f64 {
    let Some(l) = cholesky_strict(x) else {
        return 0.0;
    };
    let n = x.rows();
    // Columns of L⁻¹·ΔX, then rows of (L⁻¹·ΔX)·L⁻ᵀ = L⁻¹·(L⁻¹·ΔX)ᵀ.
    let forward = |b: &[f64]| {
        let mut y = b.to_vec();
        for i in 0..n {
            let mut acc = y[i];
            for k in 0..i {
                acc -= l[(i, k)] * y[k];
            }
            y[i] = acc / l[(i, i)];
        }
        y
    };
    let half: Vec<Vec<f64>> = (0..n).map(|j| forward(&dx.column(j))).collect();
    let full: Vec<Vec<f64>> = (0..n).map(|i| forward(&half.iter().map(|col| col[i]).collect::<Vec<_>>())).collect();
    let m = SymMatrix::from_fn(n, |i, j| 0.5 * (full[i][j] + full[j][i]));
    match jacobi_eigen(&m, 1e-15) {
        Ok(e) if e.min_value() < 0.0 => cap.min(-1.0 / e.min_value()),
        Ok(_) => cap,
        Err(_) => boundary_step_bisection(x, dx, cap),
    }
}

fn step_length(x: &Point, dx: &Point) -> f64 {
    let cap = 1.0 / FRACTION_TO_BOUNDARY;
    let mut t = cap;
    for (a, b) in x.scalar.iter().zip(&dx.scalar) {
        if *b < 0.0 {
            t = t.min(-a / b);
        }
    }
    for (a, b) in x.dense.iter().zip(&dx.dense) {
        t = t.min(boundary_step_dense(a, b, t));
    }
    (FRACTION_TO_BOUNDARY * t).min(1.0)
}

/// Moves `x` by `t·dx`, halving `t` while rounding leaves some block without
/// a Cholesky factor. Returns the step actually taken.
fn take_step(x: &mut Point, dx: &Point, mut t: f64) -> f64 {
    for _ in 0..BACKTRACK_STEPS {
        let mut trial = x.clone();
        trial.add_scaled(t, dx);
        let positive = trial.scalar.iter().all(|v| *v > 0.0) && trial.dense.iter().all(|m| cholesky_strict(m).is_some());
        if positive {
            *x = trial;
            return t;
        }
        t *= 0.5;
    }
    0.0
}

struct Metrics {
    pobj: f64,
    dobj: f64,
    pres: f64,
    dres: f64,
    gap: f64,
    mu: f64,
}

impl Metrics {
    fn score(&self) -> f64 {
        let rel_gap = self.gap / (1.0 + self.pobj.abs());
        self.pres.max(self.dres).max(rel_gap)
    }
}

struct Snapshot {
    x: Point,
    y: Vec<f64>,
    z: Point,
    metrics: Metrics,
}

const REFINEMENT_STEPS: usize = 3;

/// Cholesky factor of the Schur complement. Close to the optimum the matrix can
/// lose definiteness to rounding; small diagonal shifts are tried before
/// giving up, and iterative refinement recovers the lost accuracy.
fn factor_schur(schur: &Matrix) -> Option<Matrix> {
    if let Some(l) = cholesky_strict(schur) {
        return Some(l);
    }
    let n = schur.rows();
    let dmax = (0..n).map(|i| schur[(i, i)].abs()).fold(0.0, f64::max);
    for shift in [1e-14, 1e-12, 1e-10, 1e-8] {
        let mut shifted = schur.clone();
        for i in 0..n {
            shifted[(i, i)] += shift * dmax;
        }
        if let Some(l) = cholesky_strict(&shifted) {
            return Some(l);
        }
    }
    None
}

/// Solves the SDP. Solver failures (stalls, breakdowns) are reported through
/// [`SdpSolution::status`] together with the best iterate seen; `Err` is
/// reserved for invalid settings.
pub fn solve(p: &SdpProblem, settings: &SolverSettings) -> Result<SdpSolution, SdpError> {
    settings.validate()?;
    let s = Structure::new(p);
    let n_total = p.total_order() as f64;
    let b = &s.b;
    let norm_b = norm2(&p.rhs());
    let norm_c = p.objective().iter().map(|c| c.frobenius_norm().powi(2)).sum::<f64>().sqrt();

    // Rows have unit norm after equilibration.
    let xi = b.iter().map(|bi| n_total * (1.0 + bi.abs()) / 2.0).fold(10f64.max(n_total.sqrt()), f64::max);
    let eta = norm_c.max(10.0).max(n_total.sqrt());

    let mut x = s.scaled_identity(xi);
    let mut z = s.scaled_identity(eta);
    let mut y = vec![0.0; s.m];

    let mut history = Vec::new();
    let mut best: Option<Snapshot> = None;
    let mut status = SdpStatus::MaxIterations;
    let mut condition_estimate = None;
    let mut stalls = 0;
    let mut iteration = 0;

    loop {
        let ax = s.apply(&x);
        let rp: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let mut rd = s.c.clone();
        rd.add_scaled(1.0, &z);
        rd.add_scaled(-1.0, &s.adjoint(&y));
        let metrics = Metrics {
            pobj: s.c.dot(&x),
            dobj: b.iter().zip(&y).map(|(a, c)| a * c).sum(),
            pres: rp.iter().zip(&s.row_scale).map(|(r, sc)| (r * sc).powi(2)).sum::<f64>().sqrt() / (1.0 + norm_b),
            dres: s.congruence(&rd, -1).norm() / (1.0 + norm_c),
            gap: 0.0,
            mu: x.dot(&z) / n_total,
        };
        let metrics = Metrics { gap: (metrics.dobj - metrics.pobj).abs(), ..metrics };
        if !metrics.mu.is_finite() || !metrics.pobj.is_finite() || !metrics.dobj.is_finite() {
            status = SdpStatus::NumericalFailure;
            break;
        }

        let converged = metrics.pres <= settings.feas_tol
            && metrics.dres <= settings.feas_tol
            && metrics.gap <= settings.gap_tol;
        let improves = best.as_ref().is_none_or(|bst| metrics.score() <= bst.metrics.score());
        history.push(IterationLog {
            iteration,
            primal_value: metrics.pobj,
            dual_value: metrics.dobj,
            primal_residual: metrics.pres,
            dual_residual: metrics.dres,
            mu: metrics.mu,
            primal_step: 0.0,
            dual_step: 0.0,
        });
        let mu = metrics.mu;
        if improves || converged {
            best = Some(Snapshot { x: x.clone(), y: y.clone(), z: z.clone(), metrics });
        }
        if converged {
            status = SdpStatus::Optimal;
            break;
        }
        if iteration >= settings.max_iter {
            break;
        }
        iteration += 1;

        // Z⁻¹ per block.
        let mut zinv = s.zeros();
        let mut failed = false;
        for (zi, zd) in zinv.dense.iter_mut().zip(&z.dense) {
            match cholesky_strict(zd) {
                Some(l) => *zi = cholesky_inverse(&l),
                None => failed = true,
            }
        }
        for (zi, &zs) in zinv.scalar.iter_mut().zip(&z.scalar) {
            *zi = 1.0 / zs;
        }
        if failed {
            status = SdpStatus::NumericalFailure;
            break;
        }

        let schur = s.schur(&x, &zinv);
        let Some(chol) = factor_schur(&schur) else {
            status = SdpStatus::NumericalFailure;
            break;
        };
        let pivots: Vec<f64> = (0..s.m).map(|i| chol[(i, i)]).collect();
        let pmax = pivots.iter().copied().fold(0.0, f64::max);
        let pmin = pivots.iter().copied().fold(f64::INFINITY, f64::min);
        condition_estimate = (s.m > 0).then(|| (pmax / pmin).powi(2));

        // X·Rd·Z⁻¹ is shared by predictor and corrector.
        let x_rd_zinv = Point {
            dense: x.dense.iter().zip(&rd.dense).zip(&zinv.dense).map(|((a, r), zi)| a.matmul(r).matmul(zi)).collect(),
            scalar: x.scalar.iter().zip(&rd.scalar).zip(&zinv.scalar).map(|((a, r), zi)| a * r * zi).collect(),
        };

        let direction = |target: f64, corr: Option<&Point>| -> (Point, Vec<f64>, Point) {
            let mut w = zinv.clone();
            w.dense.iter_mut().for_each(|m| m.scale(target));
            w.scalar.iter_mut().for_each(|v| *v *= target);
            w.add_scaled(1.0, &x_rd_zinv);
            if let Some(c) = corr {
                w.add_scaled(-1.0, c);
            }
            let h: Vec<f64> = s.apply(&w).iter().zip(b).map(|(a, bi)| a - bi).collect();
            let mut dy = cholesky_solve(&chol, &h);
            // Iterative refinement against the unregularized Schur matrix.
            for _ in 0..REFINEMENT_STEPS {
                let r: Vec<f64> = schur.mul_vec(&dy).iter().zip(&h).map(|(a, hi)| hi - a).collect();
                let corr_dy = cholesky_solve(&chol, &r);
                dy.iter_mut().zip(&corr_dy).for_each(|(a, c)| *a += c);
            }

            let mut dz = s.adjoint(&dy);
            dz.add_scaled(-1.0, &rd);

            let mut dx = w.clone();
            dx.add_scaled(-1.0, &x_rd_zinv);
            dx.add_scaled(-1.0, &x);
            for ((dxd, xd), (dzd, zi)) in dx.dense.iter_mut().zip(&x.dense).zip(dz.dense.iter().zip(&zinv.dense)) {
                let t = xd.matmul(dzd).matmul(zi);
                dxd.add_scaled(-1.0, &t);
                dxd.symmetrize();
            }
            for ((dxs, &xs), (&dzs, &zi)) in dx.scalar.iter_mut().zip(&x.scalar).zip(dz.scalar.iter().zip(&zinv.scalar)) {
                *dxs -= xs * dzs * zi;
            }
            (dx, dy, dz)
        };

        // Predictor.
        let (dx_a, _, dz_a) = direction(0.0, None);
        let ap = step_length(&x, &dx_a);
        let ad = step_length(&z, &dz_a);
        let mut x_a = x.clone();
        x_a.add_scaled(ap, &dx_a);
        let mut z_a = z.clone();
        z_a.add_scaled(ad, &dz_a);
        let mu_aff = x_a.dot(&z_a) / n_total;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // Corrector.
        let corr = Point {
            dense: dx_a.dense.iter().zip(&dz_a.dense).zip(&zinv.dense).map(|((a, c), zi)| a.matmul(c).matmul(zi)).collect(),
            scalar: dx_a.scalar.iter().zip(&dz_a.scalar).zip(&zinv.scalar).map(|((a, c), zi)| a * c * zi).collect(),
        };
        let (dx, dy, dz) = direction(sigma * mu, Some(&corr));
        let ap = step_length(&x, &dx);
        let ap = take_step(&mut x, &dx, ap);
        let ad = step_length(&z, &dz);
        let ad = take_step(&mut z, &dz, ad);
        y.iter_mut().zip(&dy).for_each(|(a, d)| *a += ad * d);
        if let Some(last) = history.last_mut() {
            // Steps taken from this iterate.
            last.primal_step = ap;
            last.dual_step = ad;
        }

        if ap == 0.0 && ad == 0.0 {
            // The iterate did not move; repeating would give the same direction.
            break;
        }
        if ap.max(ad) < STALL_STEP {
            stalls += 1;
            if stalls >= STALL_LIMIT {
                break;
            }
        } else {
            stalls = 0;
        }
    }

    let snap = best.expect("at least one iterate is recorded");
    Ok(SdpSolution {
        status,
        x: s.to_blocks(&s.congruence(&snap.x, 1)),
        y: snap.y.iter().zip(&s.row_scale).map(|(v, r)| v / r).collect(),
        z: s.to_blocks(&s.congruence(&snap.z, -1)),
        primal_value: snap.metrics.pobj,
        dual_value: snap.metrics.dobj,
        gap: snap.metrics.gap,
        primal_residual: snap.metrics.pres,
        dual_residual: snap.metrics.dres,
        iterations: iteration,
        condition_estimate,
        history,
    })
}
