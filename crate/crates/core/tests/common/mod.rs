//! Reference computations on plain nested `Vec`s. Nothing here calls into the
//! crate's numerics, so results can be checked against them.

#![allow(dead_code)]

use hinf_pi::linalg::Matrix;
use num_complex::Complex64 as C;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type M = Vec<Vec<f64>>;
pub type CM = Vec<Vec<C>>;

pub fn to_lib(m: &M) -> Matrix<f64> {
    Matrix::from_rows(m).unwrap()
}

pub fn from_lib(m: &Matrix<f64>) -> M {
    m.to_rows()
}

pub fn zeros(r: usize, c: usize) -> M {
    vec![vec![0.0; c]; r]
}

pub fn eye(n: usize) -> M {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

pub fn diag(d: &[f64]) -> M {
    let mut m = zeros(d.len(), d.len());
    for (i, &x) in d.iter().enumerate() {
        m[i][i] = x;
    }
    m
}

pub fn t(a: &M) -> M {
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

pub fn mm(a: &M, b: &M) -> M {
    a.iter()
        .map(|r| (0..b[0].len()).map(|j| r.iter().zip(b).map(|(x, br)| x * br[j]).sum()).collect())
        .collect()
}

pub fn sub(a: &M, b: &M) -> M {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p - q).collect()).collect()
}

pub fn add(a: &M, b: &M) -> M {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + q).collect()).collect()
}

pub fn scale(a: &M, s: f64) -> M {
    a.iter().map(|r| r.iter().map(|x| x * s).collect()).collect()
}

pub fn max_abs(a: &M) -> f64 {
    a.iter().flatten().fold(0.0, |m, x| m.max(x.abs()))
}

/// Gauss–Jordan with partial pivoting.
pub fn inv(a: &M) -> M {
    let n = a.len();
    let mut w: M = a.iter().zip(eye(n)).map(|(r, e)| r.iter().copied().chain(e).collect()).collect();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| w[i][k].abs().partial_cmp(&w[j][k].abs()).unwrap()).unwrap();
        w.swap(k, p);
        let piv = w[k][k];
        assert!(piv.abs() > 1e-300, "oracle inverse: singular");
        for x in w[k].iter_mut() {
            *x /= piv;
        }
        for i in 0..n {
            if i != k {
                let f = w[i][k];
                let row_k = w[k].clone();
                for (x, y) in w[i].iter_mut().zip(row_k) {
                    *x -= f * y;
                }
            }
        }
    }
    w.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Largest eigenvalue of a symmetric positive semidefinite matrix by power
/// iteration with a Rayleigh quotient.
pub fn lambda_max_psd(s: &M) -> f64 {
    let n = s.len();
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * i as f64).collect();
    let mut lam = 0.0;
    for _ in 0..20_000 {
        let w: Vec<f64> = s.iter().map(|r| r.iter().zip(&v).map(|(a, b)| a * b).sum()).collect();
        let nrm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm == 0.0 {
            return 0.0;
        }
        let next: Vec<f64> = w.iter().map(|x| x / nrm).collect();
        let sv: Vec<f64> = s.iter().map(|r| r.iter().zip(&next).map(|(a, b)| a * b).sum()).collect();
        let new_lam: f64 = next.iter().zip(&sv).map(|(a, b)| a * b).sum();
        v = next;
        if (new_lam - lam).abs() <= 1e-16 * new_lam.abs() {
            lam = new_lam;
            break;
        }
        lam = new_lam;
    }
    lam
}

pub fn norm2(a: &M) -> f64 {
    lambda_max_psd(&mm(&t(a), a)).sqrt()
}

/// Orthonormal `n×k` columns from Gram–Schmidt (twice) on Gaussian data.
pub fn orthonormal(rng: &mut ChaCha8Rng, n: usize, k: usize) -> M {
    let mut cols: Vec<Vec<f64>> = Vec::new();
    while cols.len() < k {
        let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        for _ in 0..2 {
            for c in &cols {
                let d: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
                for (x, y) in v.iter_mut().zip(c) {
                    *x -= d * y;
                }
            }
        }
        let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm > 1e-3 {
            cols.push(v.into_iter().map(|x| x / nrm).collect());
        }
    }
    t(&cols)
}

pub fn gaussian(rng: &mut ChaCha8Rng, r: usize, c: usize) -> M {
    (0..r).map(|_| (0..c).map(|_| rng.sample(StandardNormal)).collect()).collect()
}

/// `Q·diag(λ)·Qᵀ` with `λ` uniform in `[lo, hi]`.
pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> (M, Vec<f64>, M) {
    let q = orthonormal(rng, n, n);
    let lam: Vec<f64> = (0..n).map(|_| rng.random_range(lo..hi)).collect();
    let a = mm(&mm(&q, &diag(&lam)), &t(&q));
    let a = (0..n).map(|i| (0..n).map(|j| 0.5 * (a[i][j] + a[j][i])).collect()).collect();
    (a, lam, q)
}

/// `‖(A⁻¹B)†‖² = λ_max(((A⁻¹B)ᵀ(A⁻¹B))⁻¹)` for full column rank `B`.
pub fn gamma_oracle(a: &M, b: &M) -> f64 {
    let w = mm(&inv(a), b);
    lambda_max_psd(&inv(&mm(&t(&w), &w))).sqrt()
}

/// `√‖BᵀA⁻⁴B‖`.
pub fn tau_min_oracle(a: &M, b: &M) -> f64 {
    let ai = inv(a);
    let a2b = mm(&mm(&ai, &ai), b);
    norm2(&a2b)
}

pub fn c_of(m: &M) -> CM {
    m.iter().map(|r| r.iter().map(|&x| C::new(x, 0.0)).collect()).collect()
}

pub fn cmm(a: &CM, b: &CM) -> CM {
    a.iter()
        .map(|r| (0..b[0].len()).map(|j| r.iter().zip(b).map(|(x, br)| x * br[j]).sum()).collect())
        .collect()
}

pub fn cinv(a: &CM) -> CM {
    let n = a.len();
    let mut w: CM = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            r.iter()
                .copied()
                .chain((0..n).map(|j| if i == j { C::new(1.0, 0.0) } else { C::new(0.0, 0.0) }))
                .collect()
        })
        .collect();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| w[i][k].norm().partial_cmp(&w[j][k].norm()).unwrap()).unwrap();
        w.swap(k, p);
        let piv = w[k][k];
        for x in w[k].iter_mut() {
            *x /= piv;
        }
        for i in 0..n {
            if i != k {
                let f = w[i][k];
                let row_k = w[k].clone();
                for (x, y) in w[i].iter_mut().zip(row_k) {
                    *x -= f * y;
                }
            }
        }
    }
    w.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// `s·I + a`.
pub fn cshift(s: C, a: &M) -> CM {
    a.iter()
        .enumerate()
        .map(|(i, r)| r.iter().enumerate().map(|(j, &x)| C::new(x, 0.0) + if i == j { s } else { C::new(0.0, 0.0) }).collect())
        .collect()
}

/// Spectral norm via the real embedding `[[Re, −Im], [Im, Re]]`.
pub fn cnorm2(a: &CM) -> f64 {
    let (r, c) = (a.len(), a[0].len());
    let mut e = zeros(2 * r, 2 * c);
    for i in 0..r {
        for j in 0..c {
            e[i][j] = a[i][j].re;
            e[i][c + j] = -a[i][j].im;
            e[r + i][j] = a[i][j].im;
            e[r + i][c + j] = a[i][j].re;
        }
    }
    norm2(&e)
}

/// Closed-form effort map of the optimal controller,
/// `k(sI + kBᵀA⁻²B)⁻¹BᵀA⁻²(sI − A)`.
pub fn effort_oracle(a: &M, b: &M, k: f64, omega: f64) -> CM {
    let s = C::new(0.0, omega);
    let ai = inv(a);
    let bta2 = mm(&t(b), &mm(&ai, &ai));
    let gram = scale(&mm(&bta2, b), k);
    let left = cinv(&cshift(s, &gram));
    let right = cshift(s, &scale(a, -1.0));
    cmm(&cmm(&left, &c_of(&scale(&bta2, k))), &right)
}

/// `(iωI − A)⁻¹B(iωI + kBᵀA⁻²B)⁻¹`.
pub fn rejection_oracle(a: &M, b: &M, k: f64, omega: f64) -> CM {
    let s = C::new(0.0, omega);
    let ai = inv(a);
    let gram = scale(&mm(&mm(&t(b), &mm(&ai, &ai)), b), k);
    cmm(&cmm(&cinv(&cshift(s, &scale(a, -1.0))), &c_of(b)), &cinv(&cshift(s, &gram)))
}

pub fn buffers() -> (M, M) {
    (vec![vec![-1.0, 0.0], vec![0.0, -2.0]], vec![vec![1.0, -1.0], vec![0.0, 1.0]])
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp()).collect()
}

use hinf_pi::network::{NetworkSpec, NodeSpec};

/// Random tree on `n` nodes (each node attaches to an earlier one), plus
/// `extra` chords when possible. Ids are `n0, n1, …`.
pub fn random_connected(rng: &mut ChaCha8Rng, n: usize, extra: usize, actuated: &[usize]) -> NetworkSpec {
    let nodes = (0..n)
        .map(|i| NodeSpec {
            id: format!("n{i}"),
            a: -rng.random_range(0.2..4.0),
            b: if actuated.contains(&i) { rng.random_range(0.5..2.0) } else { 0.0 },
        })
        .collect();
    let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (rng.random_range(0..i), i)).collect();
    let mut tries = 0;
    while edges.len() < n - 1 + extra && tries < 100 {
        tries += 1;
        let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
        if i != j && !edges.iter().any(|&(p, q)| (p, q) == (i, j) || (p, q) == (j, i)) {
            edges.push((i, j));
        }
    }
    NetworkSpec {
        nodes,
        edges: edges.into_iter().map(|(i, j)| (format!("n{i}"), format!("n{j}"))).collect(),
    }
}

/// Forest of random trees with exactly one actuated node per tree, so `B`
/// is square and invertible.
pub fn random_forest(rng: &mut ChaCha8Rng, n: usize) -> NetworkSpec {
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let mut start = 0;
    while start < n {
        let size = rng.random_range(1..=(n - start));
        let hub = start + rng.random_range(0..size);
        for i in start..start + size {
            nodes.push(NodeSpec {
                id: format!("n{i}"),
                a: -rng.random_range(0.2..4.0),
                b: if i == hub { rng.random_range(0.5..2.0) * if rng.random::<bool>() { 1.0 } else { -1.0 } } else { 0.0 },
            });
            if i > start {
                edges.push((format!("n{}", rng.random_range(start..i)), format!("n{i}")));
            }
        }
        start += size;
    }
    NetworkSpec { nodes, edges }
}
