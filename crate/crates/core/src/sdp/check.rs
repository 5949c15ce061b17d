//! A-posteriori certification of SDP iterates, independent of the solver.

use serde::{Deserialize, Serialize};

use super::problem::SdpProblem;
use super::solver::SdpSolution;
use super::SdpError;
use crate::linalg::{min_eigenvalue, SymMatrix};

/// The pieces of a primal/dual pair that can be checked. A dual-only
/// certificate leaves `x` empty; a missing `z` is recomputed as `A*(y) − C`.
#[derive(Debug, Clone, Copy)]
pub struct Certificate<'a> {
    pub x: Option<&'a [SymMatrix]>,
    pub y: &'a [f64],
    pub z: Option<&'a [SymMatrix]>,
}

impl<'a> From<&'a SdpSolution> for Certificate<'a> {
    fn from(s: &'a SdpSolution) -> Self {
        Certificate { x: Some(&s.x), y: &s.y, z: Some(&s.z) }
    }
}

/// Recomputed residuals and margins. Residuals are absolute max-norms;
/// eigenvalue margins are the minimum over blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub primal_residual: Option<f64>,
    pub dual_residual: f64,
    pub primal_min_eigenvalue: Option<f64>,
    pub dual_min_eigenvalue: f64,
    pub primal_value: Option<f64>,
    pub dual_value: f64,
    pub gap: Option<f64>,
    pub issues: Vec<String>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.issues.is_empty()
    }
}

pub fn check_solution(p: &SdpProblem, s: &SdpSolution, tol: f64) -> Result<CheckReport, SdpError> {
    check_certificate(p, &Certificate::from(s), tol)
}

fn check_blocks(p: &SdpProblem, blocks: &[SymMatrix], what: &str) -> Result<(), SdpError> {
    if blocks.len() != p.block_orders().len()
        || blocks.iter().zip(p.block_orders()).any(|(b, &n)| b.order() != n)
    {
        return Err(SdpError::Shape(format!("{what} does not match the block structure")));
    }
    Ok(())
}

fn min_eig(blocks: &[SymMatrix]) -> f64 {
    blocks
        .iter()
        .map(|b| min_eigenvalue(b).unwrap_or(f64::NEG_INFINITY))
        .fold(f64::INFINITY, f64::min)
}

pub fn check_certificate(p: &SdpProblem, cert: &Certificate<'_>, tol: f64) -> Result<CheckReport, SdpError> {
    if cert.y.len() != p.num_constraints() {
        return Err(SdpError::Shape(format!("y has {} entries, expected {}", cert.y.len(), p.num_constraints())));
    }
    let b = p.rhs();
    let mut issues = Vec::new();
    let c_scale = p.objective().iter().map(SymMatrix::max_abs).fold(0.0, f64::max);
    let b_scale = b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));

    let slack: Vec<SymMatrix> =
        p.apply_adjoint(cert.y).iter().zip(p.objective()).map(|(a, c)| a.sub(c)).collect();
    let (dual_residual, z_margin) = match cert.z {
        Some(z) => {
            check_blocks(p, z, "Z")?;
            let r = slack.iter().zip(z).map(|(s, zb)| s.sub(zb).max_abs()).fold(0.0, f64::max);
            (r, min_eig(z))
        }
        None => (0.0, min_eig(&slack)),
    };
    if dual_residual > tol * (1.0 + c_scale) {
        issues.push(format!("dual residual {dual_residual:e} exceeds tolerance"));
    }
    if z_margin < -tol * (1.0 + c_scale) {
        issues.push(format!("dual slack has eigenvalue {z_margin:e}"));
    }
    let dual_value: f64 = b.iter().zip(cert.y).map(|(a, c)| a * c).sum();

    let mut report = CheckReport {
        primal_residual: None,
        dual_residual,
        primal_min_eigenvalue: None,
        dual_min_eigenvalue: z_margin,
        primal_value: None,
        dual_value,
        gap: None,
        issues,
    };
    if let Some(x) = cert.x {
        check_blocks(p, x, "X")?;
        let ax = p.apply(x);
        let r = ax.iter().zip(&b).map(|(a, bi)| (a - bi).abs()).fold(0.0, f64::max);
        let margin = min_eig(x);
        let x_scale = x.iter().map(SymMatrix::max_abs).fold(0.0, f64::max);
        let pv = p.objective_value(x);
        let gap = (dual_value - pv).abs();
        if r > tol * (1.0 + b_scale) {
            report.issues.push(format!("primal residual {r:e} exceeds tolerance"));
        }
        if margin < -tol * (1.0 + x_scale) {
            report.issues.push(format!("primal matrix has eigenvalue {margin:e}"));
        }
        if gap > tol * (1.0 + pv.abs()) {
            report.issues.push(format!("duality gap {gap:e} exceeds tolerance"));
        }
        report.primal_residual = Some(r);
        report.primal_min_eigenvalue = Some(margin);
        report.primal_value = Some(pv);
        report.gap = Some(gap);
    }
    Ok(report)
}
