#![allow(dead_code)]

use packbound_core::linalg::{Matrix, SymMatrix};
use packbound_core::sdp::{SdpBuilder, SdpProblem};
use rand::Rng;

pub fn random_orthogonal(rng: &mut impl Rng, n: usize) -> Matrix {
    let mut cols: Vec<Vec<f64>> = Vec::new();
    while cols.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for _ in 0..2 {
            for u in &cols {
                let d: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= d * y);
            }
        }
        let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm > 1e-6 {
            cols.push(v.iter().map(|x| x / nrm).collect());
        }
    }
    Matrix::from_fn(n, n, |i, j| cols[j][i])
}

fn spectral(q: &Matrix, d: &[f64]) -> SymMatrix {
    let n = d.len();
    SymMatrix::from_fn(n, |i, j| (0..n).map(|k| q[(i, k)] * d[k] * q[(j, k)]).sum())
}

/// A random SDP built backwards from a strictly complementary optimal pair
/// `(X*, y*, Z*)`; returns the problem and its optimal value `bᵀy*`.
///
/// The number of constraints is drawn between the bounds that make the pair
/// generically primal and dual nondegenerate, and the first constraint is a
/// trace constraint so the dual has a strictly feasible point. Under those
/// conditions the optimum is unique and well posed.
pub fn complementary_sdp(rng: &mut impl Rng) -> (SdpProblem, f64) {
    let n_dense = rng.gen_range(1..=3);
    let mut orders: Vec<usize> = (0..n_dense).map(|_| rng.gen_range(2..=5)).collect();
    orders.extend(std::iter::repeat(1).take(rng.gen_range(0..=4)));
    let mut x_star = Vec::new();
    let mut z_star = Vec::new();
    let (mut m_lo, mut m_hi) = (0, 0);
    for &n in &orders {
        let q = random_orthogonal(rng, n);
        let rank = if n == 1 { rng.gen_range(0..=1) } else { rng.gen_range(1..n) };
        m_lo += rank * (rank + 1) / 2;
        m_hi += rank * (rank + 1) / 2 + rank * (n - rank);
        let dx: Vec<f64> = (0..n).map(|k| if k < rank { rng.gen_range(0.5..2.0) } else { 0.0 }).collect();
        let dz: Vec<f64> = (0..n).map(|k| if k < rank { 0.0 } else { rng.gen_range(0.5..2.0) }).collect();
        x_star.push(spectral(&q, &dx));
        z_star.push(spectral(&q, &dz));
    }
    let m = rng.gen_range(m_lo.max(1)..=m_hi.max(1));
    let y_star: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut b = SdpBuilder::new(orders.clone());
    let mut a_mats: Vec<Vec<SymMatrix>> = Vec::new();
    for k in 0..m {
        let blocks: Vec<SymMatrix> = if k == 0 {
            orders.iter().map(|&n| SymMatrix::identity(n)).collect()
        } else {
            orders.iter().map(|&n| SymMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))).collect()
        };
        a_mats.push(blocks);
    }
    for a in &a_mats {
        let rhs: f64 = a.iter().zip(&x_star).map(|(ab, xb)| ab.frobenius_dot(xb)).sum();
        let mut entries = Vec::new();
        for (blk, ab) in a.iter().enumerate() {
            for i in 0..ab.order() {
                for j in 0..=i {
                    if ab.get(i, j) != 0.0 {
                        entries.push((blk, i, j, ab.get(i, j)));
                    }
                }
            }
        }
        b.constraint(entries, rhs);
    }
    for (blk, &n) in orders.iter().enumerate() {
        for i in 0..n {
            for j in 0..=i {
                let aty: f64 = a_mats.iter().zip(&y_star).map(|(a, y)| y * a[blk].get(i, j)).sum();
                b.objective_entry(blk, i, j, aty - z_star[blk].get(i, j));
            }
        }
    }
    let problem = b.build().expect("random constraints are independent");
    let rhs = problem.rhs();
    let value = rhs.iter().zip(&y_star).map(|(a, c)| a * c).sum();
    (problem, value)
}

/// Brute-force optimum of `max cᵀx, Ax ≤ b, x ≥ 0` by enumerating vertices.
pub fn lp_vertex_enumeration(c: &[f64], rows: &[Vec<f64>], rhs: &[f64]) -> f64 {
    let n = c.len();
    // Every constraint as (a, beta) meaning a·x ≤ beta.
    let mut all: Vec<(Vec<f64>, f64)> = rows.iter().cloned().zip(rhs.iter().copied()).collect();
    for k in 0..n {
        let mut e = vec![0.0; n];
        e[k] = -1.0;
        all.push((e, 0.0));
    }
    let total = all.len();
    let mut best = f64::NEG_INFINITY;
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let a: Vec<Vec<f64>> = idx.iter().map(|&k| all[k].0.clone()).collect();
        let beta: Vec<f64> = idx.iter().map(|&k| all[k].1).collect();
        if let Some(x) = gauss_solve(a, beta) {
            let feasible = all.iter().all(|(row, bb)| row.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() <= bb + 1e-9);
            if feasible {
                best = best.max(c.iter().zip(&x).map(|(p, q)| p * q).sum());
            }
        }
        // next combination
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] != i + total - n {
                break;
            }
            if i == 0 && idx[0] == total - n {
                return best;
            }
        }
        idx[i] += 1;
        for j in i + 1..n {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for k in col..n {
                a[r][k] -= f * a[col][k];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}
