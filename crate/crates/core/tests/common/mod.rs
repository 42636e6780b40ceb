//! Reference computations for the integration tests. None of them call into
//! the solvers under test.
#![allow(dead_code)]

use metapred_core::dataset::{RegressionSet, SplitSet};
use metapred_core::rng::{complex_gaussian, seeded};
use metapred_core::{Complex64 as C, ComplexMatrix};

pub type Pairs = Vec<(Vec<C>, C)>;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn norm(a: &[C]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn sub(a: &[C], b: &[C]) -> Vec<C> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn rel_err(a: &[C], b: &[C]) -> f64 {
    norm(&sub(a, b)) / norm(b).max(1e-300)
}

pub fn pairs_of(set: &RegressionSet) -> Pairs {
    set.pairs().map(|(x, y)| (x.to_vec(), y)).collect()
}

pub fn set_of(pairs: &Pairs, window: usize) -> RegressionSet {
    let mut s = RegressionSet::empty(window, 1);
    for (x, y) in pairs {
        s.push(x, *y).unwrap();
    }
    s
}

pub fn random_vector(seed: u64, len: usize) -> Vec<C> {
    let mut rng = seeded(seed);
    (0..len).map(|_| complex_gaussian(&mut rng, 1.0)).collect()
}

pub fn random_pairs(seed: u64, window: usize, len: usize) -> Pairs {
    let mut rng = seeded(seed);
    (0..len)
        .map(|_| {
            let x: Vec<C> = (0..window).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
            (x, complex_gaussian(&mut rng, 1.0))
        })
        .collect()
}

pub fn random_split(seed: u64, window: usize, train_len: usize, test_len: usize) -> SplitSet {
    let all = random_pairs(seed, window, train_len + test_len);
    SplitSet { train: set_of(&all[..train_len].to_vec(), window), test: set_of(&all[train_len..].to_vec(), window) }
}

/// Dense random `B†B + I`.
pub fn random_hpd(seed: u64, n: usize) -> ComplexMatrix {
    let b = random_vector(seed, n * n);
    ComplexMatrix::from_fn(n, n, |i, j| {
        let s: C = (0..n).map(|k| b[k * n + i].conj() * b[k * n + j]).sum();
        if i == j {
            s + 1.0
        } else {
            s
        }
    })
}

pub fn matvec(a: &ComplexMatrix, x: &[C]) -> Vec<C> {
    (0..a.rows()).map(|i| (0..a.cols()).map(|j| a[(i, j)] * x[j]).sum()).collect()
}

/// Gauss–Jordan elimination with partial pivoting.
pub fn gauss_solve(a: &[Vec<C>], b: &[C]) -> Vec<C> {
    let n = b.len();
    let mut m: Vec<Vec<C>> = a.iter().zip(b).map(|(r, &bi)| r.iter().copied().chain([bi]).collect()).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].norm().total_cmp(&m[j][col].norm())).unwrap();
        m.swap(col, piv);
        let p = m[col][col];
        assert!(p.norm() > 0.0, "singular system");
        for v in m[col].iter_mut() {
            *v /= p;
        }
        for r in 0..n {
            if r != col {
                let f = m[r][col];
                let pivot = m[col].clone();
                for (x, t) in m[r][col..].iter_mut().zip(&pivot[col..]) {
                    *x -= f * t;
                }
            }
        }
    }
    m.into_iter().map(|r| r[n]).collect()
}

pub fn residual(v: &[C], x: &[C], y: C) -> C {
    v.iter().zip(x).map(|(a, b)| a.conj() * b).sum::<C>() - y
}

pub fn sse(v: &[C], pairs: &Pairs) -> f64 {
    pairs.iter().map(|(x, y)| residual(v, x, *y).norm_sqr()).sum()
}

/// `∂/∂Re + j∂/∂Im` of `w Σ|v†x − y|²`, accumulated into `g`.
pub fn add_sse_grad(g: &mut [C], v: &[C], pairs: &Pairs, w: f64) {
    for (x, y) in pairs {
        let e = residual(v, x, *y).conj() * (2.0 * w);
        for (gj, xj) in g.iter_mut().zip(x) {
            *gj += xj * e;
        }
    }
}

/// Gradient of `Σ_tr|e|² + α Σ_te|e|² + λ||v − v̄||²`.
pub fn objective_grad(v: &[C], train: &Pairs, test: &Pairs, alpha: f64, lambda: f64, bias: &[C]) -> Vec<C> {
    let mut g: Vec<C> = v.iter().zip(bias).map(|(a, b)| (a - b) * (2.0 * lambda)).collect();
    add_sse_grad(&mut g, v, train, 1.0);
    add_sse_grad(&mut g, v, test, alpha);
    g
}

/// Ridge minimizer by elimination.
pub fn ridge_direct(train: &Pairs, lambda: f64, bias: &[C]) -> Vec<C> {
    let n = bias.len();
    let mut a = vec![vec![c(0.0, 0.0); n]; n];
    let mut b: Vec<C> = bias.iter().map(|z| z * lambda).collect();
    for (x, y) in train {
        for i in 0..n {
            for j in 0..n {
                a[i][j] += x[i] * x[j].conj();
            }
            b[i] += x[i] * y.conj();
        }
    }
    for (i, row) in a.iter_mut().enumerate() {
        row[i] += lambda;
    }
    gauss_solve(&a, &b)
}

pub fn outer_loss_direct(s: &SplitSet, lambda: f64, bias: &[C]) -> f64 {
    sse(&ridge_direct(&pairs_of(&s.train), lambda, bias), &pairs_of(&s.test))
}

/// Central differences giving `∂f/∂Re v_j + j ∂f/∂Im v_j`.
pub fn fd_grad(f: impl Fn(&[C]) -> f64, v: &[C], h: f64) -> Vec<C> {
    let mut p = v.to_vec();
    (0..v.len())
        .map(|j| {
            let mut part = |d: C| {
                p[j] = v[j] + d;
                let up = f(&p);
                p[j] = v[j] - d;
                let down = f(&p);
                p[j] = v[j];
                (up - down) / (2.0 * h)
            };
            c(part(c(h, 0.0)), part(c(0.0, h)))
        })
        .collect()
}

/// Gradient descent with step `1/L`, `L` from power iteration on gradient
/// differences (exact for quadratics).
pub fn descend(grad: impl Fn(&[C]) -> Vec<C>, x0: &[C], tol: f64, max_iter: usize) -> Vec<C> {
    let g0 = grad(x0);
    let mut d: Vec<C> = (0..x0.len()).map(|i| c(1.0 + 0.3 * i as f64, 0.2 - 0.1 * i as f64)).collect();
    let mut l = 0.0;
    for _ in 0..300 {
        let nd = norm(&d);
        d.iter_mut().for_each(|z| *z /= nd);
        let p: Vec<C> = x0.iter().zip(&d).map(|(a, b)| a + b).collect();
        d = sub(&grad(&p), &g0);
        l = norm(&d);
    }
    let step = 1.0 / (1.01 * l);
    let base = norm(&g0).max(1e-300);
    let mut x = x0.to_vec();
    let mut g = g0;
    for _ in 0..max_iter {
        if norm(&g) <= tol * base {
            break;
        }
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi -= gi * step;
        }
        g = grad(&x);
    }
    x
}

/// `J0` by its power series.
pub fn bessel_j0(x: f64, terms: usize) -> f64 {
    let q = -(x * x) / 4.0;
    let (mut term, mut sum) = (1.0, 1.0);
    for k in 1..terms {
        term *= q / (k * k) as f64;
        sum += term;
    }
    sum
}
