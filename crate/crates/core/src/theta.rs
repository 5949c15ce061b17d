//! Weighted Lovász ϑ′ for explicit finite graphs.
//!
//! For a graph with vertex weights `w ≥ 0`, ϑ′ is
//!
//! ```text
//!   min M  subject to  K(x, x) ≤ M           for every vertex x
//!                      K(x, y) ≤ 0           for every non-adjacent pair x ≠ y
//!                      K − √w·√wᵀ ⪰ 0
//! ```
//!
//! and bounds the maximum weight of an independent set from above.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{min_eigenvalue, LinalgError, SymMatrix};
use crate::sdp::{solve, SdpError, SdpProblem, SdpStatus, SolverSettings};

/// Largest vertex count accepted by [`alpha_bruteforce`].
pub const BRUTEFORCE_CAP: usize = 30;

#[derive(Debug, Error)]
pub enum ThetaError {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("graph has {n} vertices; exhaustive search is capped at {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("solver stopped with status {0:?}")]
    Solver(SdpStatus),
    #[error(transparent)]
    Sdp(#[from] SdpError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Simple undirected graph with nonnegative vertex weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    /// Stored as `(u, v)` with `u < v`.
    edges: BTreeSet<(usize, usize)>,
    weights: Vec<f64>,
}

impl WeightedGraph {
    /// Builds a graph from an edge list. Duplicate edges (in either
    /// orientation) are merged; loops and out-of-range endpoints are errors.
    pub fn new(n: usize, edges: &[(usize, usize)], weights: Vec<f64>) -> Result<Self, ThetaError> {
        if n == 0 {
            return Err(ThetaError::InvalidGraph("graph needs at least one vertex".into()));
        }
        if weights.len() != n {
            return Err(ThetaError::InvalidGraph(format!("{} weights for {n} vertices", weights.len())));
        }
        if let Some((x, w)) = weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w >= 0.0)) {
            return Err(ThetaError::InvalidGraph(format!("weight of vertex {x} is {w}; weights must be finite and nonnegative")));
        }
        let mut g = WeightedGraph { n, edges: BTreeSet::new(), weights };
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    /// Graph with unit weights.
    pub fn unweighted(n: usize, edges: &[(usize, usize)]) -> Result<Self, ThetaError> {
        Self::new(n, edges, vec![1.0; n])
    }

    pub fn cycle(n: usize) -> Result<Self, ThetaError> {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::unweighted(n, &edges)
    }

    pub fn complete(n: usize) -> Result<Self, ThetaError> {
        let edges: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        Self::unweighted(n, &edges)
    }

    pub fn petersen() -> Self {
        let mut edges = Vec::new();
        for i in 0..5 {
            edges.push((i, (i + 1) % 5));
            edges.push((i, i + 5));
            edges.push((5 + i, 5 + (i + 2) % 5));
        }
        Self::unweighted(10, &edges).expect("valid graph")
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<bool, ThetaError> {
        if u >= self.n || v >= self.n {
            return Err(ThetaError::InvalidGraph(format!("edge ({u}, {v}) has an endpoint outside 0..{}", self.n)));
        }
        if u == v {
            return Err(ThetaError::InvalidGraph(format!("loop at vertex {u}")));
        }
        Ok(self.edges.insert((u.min(v), u.max(v))))
    }

    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self, ThetaError> {
        let edges: Vec<_> = self.edges.iter().copied().collect();
        Self::new(self.n, &edges, weights)
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    /// Pairs `x < y` that are not adjacent.
    pub fn nonedges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |x| (x + 1..self.n).filter(move |&y| !self.has_edge(x, y)).map(move |y| (x, y)))
    }

    pub fn is_independent(&self, set: &[usize]) -> bool {
        set.iter().enumerate().all(|(k, &u)| set[k + 1..].iter().all(|&v| u != v && !self.has_edge(u, v)))
    }

    pub fn set_weight(&self, set: &[usize]) -> f64 {
        set.iter().map(|&x| self.weights[x]).sum()
    }
}

/// Text format: a header `n m`, then `m` lines `u v` (0-based), then any
/// number of `w u value` lines overriding the default unit weight. Blank
/// lines and `#` comments are ignored.
impl FromStr for WeightedGraph {
    type Err = ThetaError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let parse_err = |line: usize, message: String| ThetaError::Parse { line, message };

        let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "empty graph file".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(parse_err(hline, format!("expected header `n m`, found `{header}`")));
        }
        let n: usize = fields[0].parse().map_err(|e| parse_err(hline, format!("vertex count: {e}")))?;
        let m: usize = fields[1].parse().map_err(|e| parse_err(hline, format!("edge count: {e}")))?;
        if n == 0 {
            return Err(parse_err(hline, "graph needs at least one vertex".into()));
        }

        let mut g = WeightedGraph { n, edges: BTreeSet::new(), weights: vec![1.0; n] };
        let mut seen_edges = 0;
        for (line, content) in lines {
            let fields: Vec<&str> = content.split_whitespace().collect();
            let vertex = |s: &str| -> Result<usize, ThetaError> {
                let v: usize = s.parse().map_err(|e| parse_err(line, format!("vertex `{s}`: {e}")))?;
                if v >= n {
                    return Err(parse_err(line, format!("vertex {v} out of range 0..{n}")));
                }
                Ok(v)
            };
            match fields.as_slice() {
                ["w", x, value] => {
                    let x = vertex(x)?;
                    let w: f64 = value.parse().map_err(|e| parse_err(line, format!("weight `{value}`: {e}")))?;
                    if !(w.is_finite() && w >= 0.0) {
                        return Err(parse_err(line, format!("weight {w} must be finite and nonnegative")));
                    }
                    g.weights[x] = w;
                }
                [u, v] => {
                    if seen_edges == m {
                        return Err(parse_err(line, format!("more than the declared {m} edges")));
                    }
                    let (u, v) = (vertex(u)?, vertex(v)?);
                    if u == v {
                        return Err(parse_err(line, format!("loop at vertex {u}")));
                    }
                    g.edges.insert((u.min(v), u.max(v)));
                    seen_edges += 1;
                }
                _ => return Err(parse_err(line, format!("expected `u v` or `w u value`, found `{content}`"))),
            }
        }
        if seen_edges != m {
            return Err(parse_err(hline, format!("header declares {m} edges but {seen_edges} were listed")));
        }
        Ok(g)
    }
}

impl fmt::Display for WeightedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.n, self.edges.len())?;
        for (u, v) in &self.edges {
            writeln!(f, "{u} {v}")?;
        }
        for (x, w) in self.weights.iter().enumerate() {
            if *w != 1.0 {
                writeln!(f, "w {x} {w:e}")?;
            }
        }
        Ok(())
    }
}

/// Block layout of the ϑ′ program.
///
/// Block 0 holds `Y = K − √w·√wᵀ`, block 1 the scalar `M`, then one slack per
/// vertex for `K(x, x) ≤ M` and one slack per non-adjacent pair for
/// `K(x, y) ≤ 0`. The objective is `max −M`.
pub fn theta_prime_sdp(g: &WeightedGraph) -> SdpProblem {
    let n = g.n;
    let nonedges: Vec<_> = g.nonedges().collect();
    let sqrt_w: Vec<f64> = g.weights.iter().map(|w| w.sqrt()).collect();
    let mut orders = vec![n, 1];
    orders.extend(std::iter::repeat(1).take(n + nonedges.len()));
    let mut b = SdpProblem::builder(orders);
    b.objective_entry(1, 0, 0, -1.0);
    // Y(x,x) + w(x) − M + s(x) = 0
    for x in 0..n {
        b.constraint(vec![(0, x, x, 1.0), (1, 0, 0, -1.0), (2 + x, 0, 0, 1.0)], -g.weights[x]);
    }
    // Y(x,y) + √(w(x)w(y)) + t(x,y) = 0; the triplet is mirrored, hence ½.
    for (k, &(x, y)) in nonedges.iter().enumerate() {
        b.constraint(vec![(0, y, x, 0.5), (2 + n + k, 0, 0, 1.0)], -sqrt_w[x] * sqrt_w[y]);
    }
    b.build().expect("each constraint owns a distinct slack")
}

/// Feasible point of the ϑ′ program; `bound` is a valid upper bound on the
/// weighted independence number whenever the margins are within tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaCertificate {
    /// The value `M`.
    pub bound: f64,
    /// The matrix `K`.
    pub matrix: SymMatrix,
    /// Smallest eigenvalue of `K − √w·√wᵀ`.
    pub psd_margin: f64,
    /// Largest `K(x, y)` over non-adjacent pairs (≤ 0 when feasible).
    pub max_nonedge_violation: f64,
}

/// Margins recomputed from a certificate without any solver state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateReplay {
    /// `max_x K(x, x) − M`.
    pub diagonal_excess: f64,
    pub max_nonedge_violation: f64,
    pub psd_margin: f64,
}

impl CertificateReplay {
    pub fn is_valid(&self, tol: f64) -> bool {
        self.diagonal_excess <= tol && self.max_nonedge_violation <= tol && self.psd_margin >= -tol
    }
}

impl ThetaCertificate {
    /// Recomputes every inequality of the program for `g`.
    pub fn replay(&self, g: &WeightedGraph) -> Result<CertificateReplay, ThetaError> {
        if self.matrix.order() != g.n {
            return Err(ThetaError::InvalidGraph(format!(
                "certificate has order {} but graph has {} vertices",
                self.matrix.order(),
                g.n
            )));
        }
        let diagonal_excess = (0..g.n).map(|x| self.matrix.get(x, x) - self.bound).fold(f64::NEG_INFINITY, f64::max);
        Ok(CertificateReplay {
            diagonal_excess,
            max_nonedge_violation: max_nonedge(&self.matrix, g),
            psd_margin: psd_margin(&self.matrix, g)?,
        })
    }
}

fn sqrt_weights(g: &WeightedGraph) -> Vec<f64> {
    g.weights.iter().map(|w| w.sqrt()).collect()
}

fn psd_margin(k: &SymMatrix, g: &WeightedGraph) -> Result<f64, ThetaError> {
    Ok(min_eigenvalue(&k.rank_one_update(-1.0, &sqrt_weights(g)))?)
}

fn max_nonedge(k: &SymMatrix, g: &WeightedGraph) -> f64 {
    g.nonedges().map(|(x, y)| k.get(x, y)).fold(f64::NEG_INFINITY, f64::max)
}

/// Solves the ϑ′ program and returns the bound with a repaired certificate.
///
/// The solver's `K` is made exactly feasible before reporting: non-adjacent
/// entries are clamped to ≤ 0, the diagonal is raised by any negative PSD
/// margin, and `M` is taken as the largest diagonal entry. The reported value
/// is that `M`.
pub fn theta_prime(g: &WeightedGraph, settings: &SolverSettings) -> Result<(f64, ThetaCertificate), ThetaError> {
    let n = g.n;
    if g.weights.iter().all(|&w| w == 0.0) {
        let cert = ThetaCertificate {
            bound: 0.0,
            matrix: SymMatrix::zeros(n),
            psd_margin: 0.0,
            max_nonedge_violation: if g.nonedges().next().is_some() { 0.0 } else { f64::NEG_INFINITY },
        };
        return Ok((0.0, cert));
    }
    let problem = theta_prime_sdp(g);
    let sol = solve(&problem, settings)?;
    if sol.status != SdpStatus::Optimal {
        return Err(ThetaError::Solver(sol.status));
    }
    let mut k = sol.x[0].rank_one_update(1.0, &sqrt_weights(g));
    for (x, y) in g.nonedges() {
        if k.get(x, y) > 0.0 {
            k.set(x, y, 0.0);
        }
    }
    let margin = psd_margin(&k, g)?;
    if margin < 0.0 {
        for x in 0..n {
            k.add_to(x, x, -margin);
        }
    }
    let bound = (0..n).map(|x| k.get(x, x)).fold(f64::NEG_INFINITY, f64::max);
    let cert = ThetaCertificate {
        bound,
        psd_margin: psd_margin(&k, g)?,
        max_nonedge_violation: max_nonedge(&k, g),
        matrix: k,
    };
    Ok((bound, cert))
}

/// Maximum weight independent set by branch and bound.
pub fn alpha_bruteforce(g: &WeightedGraph) -> Result<(f64, Vec<usize>), ThetaError> {
    if g.n > BRUTEFORCE_CAP {
        return Err(ThetaError::TooLarge { n: g.n, cap: BRUTEFORCE_CAP });
    }
    let adj: Vec<u32> = (0..g.n)
        .map(|x| (0..g.n).filter(|&y| g.has_edge(x, y)).fold(0u32, |m, y| m | (1 << y)))
        .collect();
    let mut search = Search { adj: &adj, w: &g.weights, best: 0.0, best_set: 0 };
    let all = if g.n == 32 { u32::MAX } else { (1u32 << g.n) - 1 };
    search.run(all, 0, 0.0);
    let witness: Vec<usize> = (0..g.n).filter(|&x| search.best_set >> x & 1 == 1).collect();
    Ok((search.best, witness))
}

struct Search<'a> {
    adj: &'a [u32],
    w: &'a [f64],
    best: f64,
    best_set: u32,
}

impl Search<'_> {
    fn run(&mut self, candidates: u32, chosen: u32, value: f64) {
        if value > self.best {
            self.best = value;
            self.best_set = chosen;
        }
        if candidates == 0 {
            return;
        }
        let remaining: f64 = bits(candidates).map(|x| self.w[x]).sum();
        if value + remaining <= self.best {
            return;
        }
        let x = candidates.trailing_zeros() as usize;
        let rest = candidates & !(1 << x);
        self.run(rest & !self.adj[x], chosen | (1 << x), value + self.w[x]);
        self.run(rest, chosen, value);
    }
}

fn bits(mask: u32) -> impl Iterator<Item = usize> {
    (0..32).filter(move |&i| mask >> i & 1 == 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_dedupes_and_reads_weights() {
        let g: WeightedGraph = "3 3\n0 1\n1 0\n1 2\nw 2 0.5\n".parse().unwrap();
        assert_eq!(g.n_edges(), 2);
        assert_eq!(g.weights(), &[1.0, 1.0, 0.5]);
        let back: WeightedGraph = g.to_string().parse().unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn parse_rejects_loops_and_bad_counts() {
        assert!(matches!("2 1\n1 1\n".parse::<WeightedGraph>(), Err(ThetaError::Parse { line: 2, .. })));
        assert!("2 2\n0 1\n".parse::<WeightedGraph>().is_err());
        assert!("2 1\n0 5\n".parse::<WeightedGraph>().is_err());
        assert!("2 0\nw 0 -1\n".parse::<WeightedGraph>().is_err());
        assert!("".parse::<WeightedGraph>().is_err());
    }

    #[test]
    fn alpha_small_cases() {
        let k3 = WeightedGraph::complete(3).unwrap();
        let (a, wit) = alpha_bruteforce(&k3).unwrap();
        assert_eq!(a, 1.0);
        assert_eq!(wit.len(), 1);
        let c5 = WeightedGraph::cycle(5).unwrap();
        let (a, wit) = alpha_bruteforce(&c5).unwrap();
        assert_eq!(a, 2.0);
        assert!(c5.is_independent(&wit));
        assert_eq!(alpha_bruteforce(&WeightedGraph::petersen()).unwrap().0, 4.0);
        let big = WeightedGraph::unweighted(31, &[]).unwrap();
        assert!(matches!(alpha_bruteforce(&big), Err(ThetaError::TooLarge { n: 31, cap: 30 })));
    }

    #[test]
    fn program_shape() {
        let c5 = WeightedGraph::cycle(5).unwrap();
        let p = theta_prime_sdp(&c5);
        // 5 diagonal constraints and 5 non-adjacent pairs.
        assert_eq!(p.num_constraints(), 10);
        assert_eq!(p.block_orders()[0], 5);
        assert_eq!(p.block_orders().len(), 2 + 10);
    }
}
