//! Generalized Laguerre polynomials `L_k^α`, the scaled basis
//! `P_k(s) = μ_k⁻¹ L_k^α(2πs)`, and Gauss–Laguerre quadrature.

use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

use crate::linalg::{jacobi_eigen, SymMatrix};

/// `L_k^α(x)` by the three-term recurrence
/// `(j+1)·L_{j+1} = (2j+1+α−x)·L_j − (j+α)·L_{j−1}`.
pub fn laguerre_eval(k: usize, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if k == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for j in 1..k {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + alpha - x) * cur - (jf + alpha) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// All of `L_0^α(x), …, L_k^α(x)`.
pub fn laguerre_all(k: usize, alpha: f64, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(k + 1);
    out.push(1.0);
    if k >= 1 {
        out.push(1.0 + alpha - x);
    }
    for j in 1..k {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + alpha - x) * out[j] - (jf + alpha) * out[j - 1]) / (jf + 1.0);
        out.push(next);
    }
    out
}

/// Monomial coefficients `c_j` of `L_k^α(x) = Σ c_j x^j`, generated by the same
/// recurrence acting on coefficient vectors.
pub fn laguerre_coeffs(k: usize, alpha: f64) -> Vec<f64> {
    let mut prev = vec![1.0];
    if k == 0 {
        return prev;
    }
    let mut cur = vec![1.0 + alpha, -1.0];
    for j in 1..k {
        let jf = j as f64;
        let mut next = vec![0.0; j + 2];
        for (i, c) in cur.iter().enumerate() {
            next[i] += (2.0 * jf + 1.0 + alpha) * c;
            next[i + 1] -= c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= (jf + alpha) * c;
        }
        next.iter_mut().for_each(|c| *c /= jf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `L_k^α(0) = C(k+α, k)`.
pub fn laguerre_at_zero(k: usize, alpha: f64) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (alpha + 1.0 + j as f64) / (j as f64 + 1.0))
}

/// Nodes and weights of the `npts`-point Gauss rule for the weight
/// `x^α e^{−x}` on `[0, ∞)`.
///
/// Nodes are eigenvalues of the Jacobi matrix, polished by Newton steps on
/// `L_N^α`; weights use `w = Γ(N+α+1)·x / (N!·(N+1)²·L_{N+1}^α(x)²)`, which
/// stays accurate for the tiny weights at large nodes.
pub fn gauss_laguerre(npts: usize, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(npts >= 1, "quadrature needs at least one node");
    assert!(alpha > -1.0, "Laguerre parameter must exceed -1");
    let jacobi = SymMatrix::from_fn(npts, |i, j| {
        if i == j {
            2.0 * i as f64 + alpha + 1.0
        } else if i == j + 1 {
            (i as f64 * (i as f64 + alpha)).sqrt()
        } else {
            0.0
        }
    });
    let eig = jacobi_eigen(&jacobi, 1e-15).expect("tridiagonal Jacobi matrix is well conditioned");
    let mut nodes: Vec<f64> = eig.values.clone();
    nodes.sort_by(f64::total_cmp);
    let nf = npts as f64;
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let l = laguerre_all(npts, alpha, *x);
            // x·L_N' = N·L_N − (N+α)·L_{N−1}
            let deriv = (nf * l[npts] - (nf + alpha) * l[npts - 1]) / *x;
            let step = l[npts] / deriv;
            if step.is_finite() && step.abs() < 0.5 * x.abs() {
                *x -= step;
            }
        }
    }
    let log_const = ln_gamma(nf + alpha + 1.0) - ln_gamma(nf + 1.0) - 2.0 * (nf + 1.0).ln();
    let weights = nodes
        .iter()
        .map(|&x| {
            let l_next = laguerre_eval(npts + 1, alpha, x);
            (log_const + x.ln() - 2.0 * l_next.abs().ln()).exp()
        })
        .collect();
    (nodes, weights)
}

/// The scaled Laguerre polynomials `P_k(s) = μ_k⁻¹ L_k^α(2πs)` with
/// `α = n/2 − 1` and `μ_k` the largest absolute monomial coefficient of
/// `L_k^α(2πs)` in `s`.
///
/// Because `L_k^α(2π‖u‖²)·e^{−π‖u‖²}` is an eigenfunction of the Fourier
/// transform on ℝⁿ with eigenvalue `(−1)^k`, a Fourier-side polynomial
/// `Σ β_k P_k(‖u‖²)` corresponds to the space-side polynomial
/// `Σ (−1)^k β_k P_k(‖x‖²)` in front of the same Gaussian.
#[derive(Debug, Clone)]
pub struct LaguerreBasis {
    dimension: usize,
    alpha: f64,
    degree: usize,
    /// `μ_0..μ_{2d}`.
    scales: Vec<f64>,
    /// Monomial coefficients (in `s`) of `L_k^α(2πs)` for `k ≤ 2d`.
    coefficients: Vec<Vec<f64>>,
}

impl LaguerreBasis {
    pub fn new(dimension: usize, degree: usize) -> Self {
        assert!(dimension >= 1, "dimension must be positive");
        let alpha = dimension as f64 / 2.0 - 1.0;
        let coefficients: Vec<Vec<f64>> = (0..=2 * degree)
            .map(|k| {
                laguerre_coeffs(k, alpha)
                    .iter()
                    .enumerate()
                    .map(|(j, c)| c * (2.0 * PI).powi(j as i32))
                    .collect()
            })
            .collect();
        let scales = coefficients.iter().map(|c| c.iter().fold(0.0f64, |m, v| m.max(v.abs()))).collect();
        LaguerreBasis { dimension, alpha, degree, scales, coefficients }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `μ_k` for `k ≤ 2d`.
    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    /// Monomial coefficients of `L_k^α(2πs)` (unscaled), `k ≤ 2d`.
    pub fn raw_coefficients(&self, k: usize) -> &[f64] {
        &self.coefficients[k]
    }

    /// Monomial coefficients of `P_k` in `s`.
    pub fn monomial_coefficients(&self, k: usize) -> Vec<f64> {
        self.coefficients[k].iter().map(|c| c / self.scales[k]).collect()
    }

    /// `P_0(s), …, P_kmax(s)`.
    pub fn eval_all(&self, kmax: usize, s: f64) -> Vec<f64> {
        let mut v = laguerre_all(kmax, self.alpha, 2.0 * PI * s);
        v.iter_mut().zip(&self.scales).for_each(|(p, m)| *p /= m);
        v
    }

    pub fn eval(&self, k: usize, s: f64) -> f64 {
        laguerre_eval(k, self.alpha, 2.0 * PI * s) / self.scales[k]
    }

    /// Converts `Σ β_k P_k` to monomial coefficients in `s`.
    pub fn to_monomials(&self, beta: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; beta.len()];
        for (k, b) in beta.iter().enumerate() {
            for (j, c) in self.coefficients[k].iter().enumerate() {
                out[j] += b * c / self.scales[k];
            }
        }
        out
    }
}

/// Projects polynomials of degree ≤ `degree` in `s` onto `P_0..P_degree`
/// using a Gauss–Laguerre rule that is exact for the required products.
#[derive(Debug, Clone)]
pub struct Projector {
    /// Quadrature nodes in the `s` variable.
    pub nodes: Vec<f64>,
    /// `w_i · P_k(s_i) / ⟨P_k, P_k⟩`, indexed `[k][i]`.
    rows: Vec<Vec<f64>>,
}

impl Projector {
    pub fn new(basis: &LaguerreBasis, degree: usize) -> Self {
        let npts = degree + 2;
        let (x, w) = gauss_laguerre(npts, basis.alpha);
        let nodes: Vec<f64> = x.iter().map(|xi| xi / (2.0 * PI)).collect();
        let values: Vec<Vec<f64>> = nodes.iter().map(|&s| basis.eval_all(degree, s)).collect();
        let rows = (0..=degree)
            .map(|k| {
                let norm: f64 = w.iter().zip(&values).map(|(wi, v)| wi * v[k] * v[k]).sum();
                w.iter().zip(&values).map(|(wi, v)| wi * v[k] / norm).collect()
            })
            .collect();
        Projector { nodes, rows }
    }

    /// Coefficients in the scaled basis of the polynomial with the given
    /// values at [`Projector::nodes`].
    pub fn project(&self, values: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| r.iter().zip(values).map(|(a, b)| a * b).sum()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_degree_closed_forms() {
        for &(alpha, x) in &[(0.0, 0.3), (0.5, 1.0), (-0.5, 2.5), (3.0, 7.0)] {
            assert_eq!(laguerre_eval(0, alpha, x), 1.0);
            assert!((laguerre_eval(1, alpha, x) - (1.0 + alpha - x)).abs() < 1e-15);
            let closed = x * x / 2.0 - (alpha + 2.0) * x + (alpha + 1.0) * (alpha + 2.0) / 2.0;
            assert!((laguerre_eval(2, alpha, x) - closed).abs() < 1e-14);
        }
        assert!((laguerre_eval(2, 0.5, 1.0) + 0.125).abs() < 1e-15);
    }

    #[test]
    fn coefficients_match_evaluation_and_explicit_sum() {
        for k in 0..12 {
            for &alpha in &[-0.5, 0.0, 0.5, 3.0] {
                let c = laguerre_coeffs(k, alpha);
                // Explicit sum: c_j = (−1)^j C(k+α, k−j) / j!
                for (j, cj) in c.iter().enumerate() {
                    let binom: f64 = (0..k - j).fold(1.0, |acc, i| acc * (alpha + j as f64 + 1.0 + i as f64) / (i as f64 + 1.0));
                    let fact: f64 = (1..=j).map(|i| i as f64).product();
                    let explicit = if j % 2 == 0 { 1.0 } else { -1.0 } * binom / fact;
                    assert!((cj - explicit).abs() <= 1e-12 * explicit.abs().max(1.0), "k={k} j={j}");
                }
                let x = 1.7;
                let horner = c.iter().rev().fold(0.0, |acc, cj| acc * x + cj);
                assert!((horner - laguerre_eval(k, alpha, x)).abs() < 1e-10 * horner.abs().max(1.0));
                assert!((c[0] - laguerre_at_zero(k, alpha)).abs() < 1e-12 * c[0].abs().max(1.0));
            }
        }
    }

    #[test]
    fn quadrature_integrates_moments() {
        for &alpha in &[-0.5, 0.0, 1.5, 3.0] {
            for npts in [1, 5, 20, 40] {
                let (x, w) = gauss_laguerre(npts, alpha);
                // ∫ x^m x^α e^{−x} dx = Γ(m+α+1), exact for m ≤ 2N−1.
                for m in [0, 1, 3, 2 * npts - 1].into_iter().filter(|&m| m < 2 * npts) {
                    let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(m as i32)).sum();
                    let exact = ln_gamma(m as f64 + alpha + 1.0).exp();
                    assert!((q - exact).abs() <= 1e-11 * exact, "alpha={alpha} N={npts} m={m}: {q} vs {exact}");
                }
            }
        }
    }

    #[test]
    fn scales_are_largest_coefficients() {
        let b = LaguerreBasis::new(8, 10);
        assert_eq!(b.scales().len(), 21);
        for k in 0..=20 {
            let c = b.monomial_coefficients(k);
            let m = c.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            assert!((m - 1.0).abs() < 1e-15);
            assert!(b.raw_coefficients(k).iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn projection_recovers_basis_coefficients() {
        let b = LaguerreBasis::new(3, 8);
        let proj = Projector::new(&b, 8);
        let beta: Vec<f64> = (0..=8).map(|k| (k as f64 * 0.7).sin()).collect();
        let values: Vec<f64> =
            proj.nodes.iter().map(|&s| b.eval_all(8, s).iter().zip(&beta).map(|(p, c)| p * c).sum()).collect();
        let back = proj.project(&values);
        for (a, c) in back.iter().zip(&beta) {
            assert!((a - c).abs() < 1e-12);
        }
    }
}
