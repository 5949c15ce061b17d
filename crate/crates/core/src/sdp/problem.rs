use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::SdpError;
use crate::linalg::{Matrix, SymMatrix};

/// One nonzero of a symmetric block matrix: `(block, i, j, value)` with the
/// value placed at both `(i, j)` and `(j, i)`.
pub type Triplet = (usize, usize, usize, f64);

/// A sparse symmetric constraint matrix `A` together with its right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    /// Sorted by `(block, i, j)` with `i >= j`, no duplicates, no zeros.
    entries: Vec<Triplet>,
    rhs: f64,
}

impl Constraint {
    pub fn entries(&self) -> &[Triplet] {
        &self.entries
    }

    pub fn rhs(&self) -> f64 {
        self.rhs
    }

    /// `tr(A · X)` for block matrices `x`.
    pub fn dot(&self, x: &[SymMatrix]) -> f64 {
        self.entries
            .iter()
            .map(|&(b, i, j, v)| if i == j { v * x[b].get(i, i) } else { 2.0 * v * x[b].get(i, j) })
            .sum()
    }

    /// Squared Frobenius norm of the full symmetric matrix.
    pub fn norm_sq(&self) -> f64 {
        self.entries.iter().map(|&(_, i, j, v)| if i == j { v * v } else { 2.0 * v * v }).sum()
    }
}

/// Block-diagonal semidefinite program
///
/// ```text
///   maximize   tr(C·X)
///   subject to tr(Aᵢ·X) = bᵢ,  i = 1..m
///              X ⪰ 0
/// ```
///
/// Blocks of order 1 are nonnegative scalar variables, so linear programs are
/// the special case where every block has order 1. Construction goes through
/// [`SdpBuilder`], which rejects linearly dependent constraints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProblemJson", into = "ProblemJson")]
pub struct SdpProblem {
    block_orders: Vec<usize>,
    objective: Vec<SymMatrix>,
    constraints: Vec<Constraint>,
}

impl SdpProblem {
    pub fn builder(block_orders: Vec<usize>) -> SdpBuilder {
        SdpBuilder::new(block_orders)
    }

    pub fn block_orders(&self) -> &[usize] {
        &self.block_orders
    }

    pub fn objective(&self) -> &[SymMatrix] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn rhs(&self) -> Vec<f64> {
        self.constraints.iter().map(Constraint::rhs).collect()
    }

    /// Total matrix dimension `Σ block orders`.
    pub fn total_order(&self) -> usize {
        self.block_orders.iter().sum()
    }

    /// `tr(C · X)`.
    pub fn objective_value(&self, x: &[SymMatrix]) -> f64 {
        self.objective.iter().zip(x).map(|(c, xb)| c.frobenius_dot(xb)).sum()
    }

    /// `A(X)`: the vector of constraint traces.
    pub fn apply(&self, x: &[SymMatrix]) -> Vec<f64> {
        self.constraints.iter().map(|c| c.dot(x)).collect()
    }

    /// `A*(y) = Σ yᵢ Aᵢ`.
    pub fn apply_adjoint(&self, y: &[f64]) -> Vec<SymMatrix> {
        let mut out: Vec<SymMatrix> = self.block_orders.iter().map(|&n| SymMatrix::zeros(n)).collect();
        for (c, &yi) in self.constraints.iter().zip(y) {
            for &(b, i, j, v) in &c.entries {
                out[b].add_to(i, j, yi * v);
            }
        }
        out
    }

    /// Same problem with the objective multiplied by `s`.
    pub fn with_scaled_objective(&self, s: f64) -> SdpProblem {
        SdpProblem {
            block_orders: self.block_orders.clone(),
            objective: self.objective.iter().map(|c| c.scaled(s)).collect(),
            constraints: self.constraints.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem serializes")
    }

    pub fn from_json(text: &str) -> Result<SdpProblem, SdpError> {
        serde_json::from_str(text).map_err(|e| SdpError::Parse(e.to_string()))
    }
}

#[derive(Debug, Clone)]
pub struct SdpBuilder {
    block_orders: Vec<usize>,
    objective: Vec<SymMatrix>,
    constraints: Vec<(Vec<Triplet>, f64)>,
}

impl SdpBuilder {
    pub fn new(block_orders: Vec<usize>) -> Self {
        let objective = block_orders.iter().map(|&n| SymMatrix::zeros(n.max(1))).collect();
        SdpBuilder { block_orders, objective, constraints: Vec::new() }
    }

    /// Adds `value` to `C[block](i, j)` (and its mirror).
    pub fn objective_entry(&mut self, block: usize, i: usize, j: usize, value: f64) -> &mut Self {
        if block < self.objective.len() && i.max(j) < self.objective[block].order() {
            self.objective[block].add_to(i, j, value);
        } else {
            // Recorded out of range; reported by `build`.
            self.objective.push(SymMatrix::zeros(1));
            self.block_orders.push(0);
        }
        self
    }

    /// Adds a constraint `tr(A·X) = rhs`; returns its index.
    pub fn constraint(&mut self, entries: Vec<Triplet>, rhs: f64) -> usize {
        self.constraints.push((entries, rhs));
        self.constraints.len() - 1
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn build(self) -> Result<SdpProblem, SdpError> {
        if self.block_orders.is_empty() {
            return Err(SdpError::Shape("problem has no blocks".into()));
        }
        if let Some(b) = self.block_orders.iter().position(|&n| n == 0) {
            return Err(SdpError::Shape(format!("block {b} has order 0 (or an objective entry is out of range)")));
        }
        for (b, c) in self.objective.iter().enumerate() {
            if c.lower().iter().any(|v| !v.is_finite()) {
                return Err(SdpError::NonFinite(format!("objective block {b}")));
            }
        }
        let mut constraints = Vec::with_capacity(self.constraints.len());
        for (k, (entries, rhs)) in self.constraints.into_iter().enumerate() {
            if !rhs.is_finite() {
                return Err(SdpError::NonFinite(format!("rhs of constraint {k}")));
            }
            let mut merged: BTreeMap<(usize, usize, usize), f64> = BTreeMap::new();
            for (b, i, j, v) in entries {
                if b >= self.block_orders.len() || i.max(j) >= self.block_orders[b] {
                    return Err(SdpError::Shape(format!(
                        "constraint {k} entry ({b}, {i}, {j}) outside block structure"
                    )));
                }
                if !v.is_finite() {
                    return Err(SdpError::NonFinite(format!("constraint {k} entry ({b}, {i}, {j})")));
                }
                *merged.entry((b, i.max(j), i.min(j))).or_insert(0.0) += v;
            }
            let entries: Vec<Triplet> =
                merged.into_iter().filter(|(_, v)| *v != 0.0).map(|((b, i, j), v)| (b, i, j, v)).collect();
            if entries.is_empty() {
                return Err(SdpError::InfeasibleData(format!("constraint {k} has an all-zero matrix")));
            }
            constraints.push(Constraint { entries, rhs });
        }
        check_independent(&constraints)?;
        Ok(SdpProblem { block_orders: self.block_orders, objective: self.objective, constraints })
    }
}

/// Relative pivot below which a constraint counts as a combination of the
/// previous ones (on the correlation matrix of constraint matrices).
const RANK_PIVOT_TOL: f64 = 1e-12;

/// Rank test on the Gram matrix `G_ij = ⟨Aᵢ, Aⱼ⟩`, normalized to unit
/// diagonal so badly scaled rows are not mistaken for dependent ones.
fn check_independent(constraints: &[Constraint]) -> Result<(), SdpError> {
    let m = constraints.len();
    if m == 0 {
        return Ok(());
    }
    let mut by_position: BTreeMap<(usize, usize, usize), Vec<(usize, f64)>> = BTreeMap::new();
    for (k, c) in constraints.iter().enumerate() {
        for &(b, i, j, v) in &c.entries {
            let w = if i == j { v } else { v * std::f64::consts::SQRT_2 };
            by_position.entry((b, i, j)).or_default().push((k, w));
        }
    }
    let mut gram = Matrix::zeros(m, m);
    for list in by_position.values() {
        for &(a, va) in list {
            for &(b, vb) in list {
                if b <= a {
                    gram[(a, b)] += va * vb;
                }
            }
        }
    }
    let scale: Vec<f64> = (0..m).map(|k| gram[(k, k)].sqrt()).collect();
    for a in 0..m {
        for b in 0..=a {
            gram[(a, b)] /= scale[a] * scale[b];
        }
    }
    // Cholesky with a pivot floor; dependence shows up as a tiny pivot.
    let mut l = Matrix::zeros(m, m);
    for j in 0..m {
        let mut d = gram[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= RANK_PIVOT_TOL {
            return Err(SdpError::InfeasibleData(format!(
                "constraint {j} is linearly dependent on earlier constraints (pivot {d:e})"
            )));
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in j + 1..m {
            let mut c = gram[(i, j)];
            for k in 0..j {
                c -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = c / ljj;
        }
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct ConstraintJson {
    rhs: f64,
    entries: Vec<Triplet>,
}

/// Wire format: block orders, objective triplets, and one triplet list plus
/// right-hand side per constraint. Triplets index the lower triangle.
#[derive(Serialize, Deserialize)]
struct ProblemJson {
    block_orders: Vec<usize>,
    objective: Vec<Triplet>,
    constraints: Vec<ConstraintJson>,
}

impl TryFrom<ProblemJson> for SdpProblem {
    type Error = SdpError;

    fn try_from(p: ProblemJson) -> Result<Self, Self::Error> {
        let mut b = SdpBuilder::new(p.block_orders);
        for (blk, i, j, v) in p.objective {
            b.objective_entry(blk, i, j, v);
        }
        for c in p.constraints {
            b.constraint(c.entries, c.rhs);
        }
        b.build()
    }
}

impl From<SdpProblem> for ProblemJson {
    fn from(p: SdpProblem) -> Self {
        let mut objective = Vec::new();
        for (b, c) in p.objective.iter().enumerate() {
            for i in 0..c.order() {
                for j in 0..=i {
                    let v = c.get(i, j);
                    if v != 0.0 {
                        objective.push((b, i, j, v));
                    }
                }
            }
        }
        ProblemJson {
            block_orders: p.block_orders,
            objective,
            constraints: p
                .constraints
                .into_iter()
                .map(|c| ConstraintJson { rhs: c.rhs, entries: c.entries })
                .collect(),
        }
    }
}

/// Embeds the linear program
///
/// ```text
///   maximize cᵀx  subject to  A·x ≤ b,  x ≥ 0
/// ```
///
/// as an SDP whose blocks all have order 1: one block per variable followed
/// by one slack block per row. The slacks make the constraint matrices
/// independent by construction.
pub fn lp_as_sdp(costs: &[f64], rows: &[Vec<f64>], rhs: &[f64]) -> Result<SdpProblem, SdpError> {
    if rows.len() != rhs.len() {
        return Err(SdpError::Shape(format!("{} rows but {} right-hand sides", rows.len(), rhs.len())));
    }
    let nvar = costs.len();
    if let Some(r) = rows.iter().position(|r| r.len() != nvar) {
        return Err(SdpError::Shape(format!("row {r} has {} entries, expected {nvar}", rows[r].len())));
    }
    let mut b = SdpBuilder::new(vec![1; nvar + rows.len()]);
    for (k, &c) in costs.iter().enumerate() {
        b.objective_entry(k, 0, 0, c);
    }
    for (r, (row, &rhs)) in rows.iter().zip(rhs).enumerate() {
        let mut entries: Vec<Triplet> =
            row.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(k, &v)| (k, 0, 0, v)).collect();
        entries.push((nvar + r, 0, 0, 1.0));
        b.constraint(entries, rhs);
    }
    b.build()
}
