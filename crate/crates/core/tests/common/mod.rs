//! Helpers shared by the integration tests. Everything numeric here is
//! written independently of the library so it can serve as a reference.
#![allow(dead_code)]

use l1homotopy::linalg::DenseMatrix;
use l1homotopy::signal::Rng;
use nalgebra::DMatrix;

pub fn gaussian_matrix(rng: &mut Rng, m: usize, n: usize) -> DenseMatrix {
    let s = 1.0 / (m as f64).sqrt();
    let data: Vec<f64> = (0..m * n).map(|_| s * rng.gaussian()).collect();
    DenseMatrix::new(m, n, data).unwrap()
}

pub fn gaussian_vec(rng: &mut Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gaussian()).collect()
}

pub fn to_na(a: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(a.rows(), a.cols(), |i, j| a.get(i, j))
}

pub fn from_na(m: &DMatrix<f64>) -> DenseMatrix {
    let rows: Vec<Vec<f64>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect();
    DenseMatrix::from_rows(&rows).unwrap()
}

/// Square orthonormal matrix from the QR factorization of a Gaussian one.
pub fn orthonormal(rng: &mut Rng, n: usize) -> DenseMatrix {
    let g = DMatrix::from_fn(n, n, |_, _| rng.gaussian());
    from_na(&g.qr().q())
}

pub fn naive_matvec(a: &DenseMatrix, v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.rows()];
    for (i, o) in out.iter_mut().enumerate() {
        for (j, vj) in v.iter().enumerate() {
            *o += a.get(i, j) * vj;
        }
    }
    out
}

pub fn naive_matvec_t(a: &DenseMatrix, v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.cols()];
    for (j, o) in out.iter_mut().enumerate() {
        for (i, vi) in v.iter().enumerate() {
            *o += a.get(i, j) * vi;
        }
    }
    out
}

/// Gaussian elimination with partial pivoting on a dense copy.
pub fn gauss_solve(mut g: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| g[i][k].abs().total_cmp(&g[j][k].abs()))
            .unwrap();
        g.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = g[i][k] / g[k][k];
            for j in k..n {
                g[i][j] -= f * g[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| g[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / g[i][i];
    }
    x
}

/// `A_ΓᵀA_Γ` for the listed columns, by explicit dot products.
pub fn sub_gram(a: &DenseMatrix, cols: &[usize]) -> Vec<Vec<f64>> {
    cols.iter()
        .map(|&p| {
            cols.iter()
                .map(|&q| (0..a.rows()).map(|r| a.get(r, p) * a.get(r, q)).sum())
                .collect()
        })
        .collect()
}

pub fn soft(u: f64, t: f64) -> f64 {
    u.signum() * (u.abs() - t).max(0.0)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Optimality violation relative to `‖Aᵀy‖∞`, recomputed from scratch.
pub fn scaled_kkt(a: &DenseMatrix, y: &[f64], w: &[f64], x: &[f64]) -> f64 {
    let ax = naive_matvec(a, x);
    let r: Vec<f64> = ax.iter().zip(y).map(|(p, q)| p - q).collect();
    let p = naive_matvec_t(a, &r);
    let scale = naive_matvec_t(a, y).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut worst = 0.0f64;
    for i in 0..x.len() {
        let v = if x[i] != 0.0 {
            (p[i] + w[i] * x[i].signum()).abs()
        } else {
            (p[i].abs() - w[i]).max(0.0)
        };
        worst = worst.max(v);
    }
    worst / scale.max(f64::MIN_POSITIVE)
}

/// Two-pass sample variance.
pub fn two_pass_variance(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

/// Orthonormal Haar analysis matrix, rows ordered scaling function first,
/// then detail levels from coarsest to finest.
pub fn haar_matrix(n: usize) -> Vec<Vec<f64>> {
    let mut rows = vec![vec![1.0 / (n as f64).sqrt(); n]];
    let mut width = n;
    while width >= 2 {
        let h = 1.0 / (width as f64).sqrt();
        for start in (0..n).step_by(width) {
            let mut row = vec![0.0; n];
            for (k, v) in row.iter_mut().enumerate().skip(start).take(width) {
                *v = if k < start + width / 2 { h } else { -h };
            }
            rows.push(row);
        }
        width /= 2;
    }
    rows
}
