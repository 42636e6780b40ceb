//! Reference computations that share no code with the solvers they check:
//! plain gradient descent, dense Gaussian elimination, finite differences
//! and the power series of `J0`.

use metapred_core::dataset::{RegressionSet, SplitSet};
use metapred_core::rng::{complex_gaussian, seeded};
use metapred_core::Complex64;

type C = Complex64;

/// Plain `(x, y)` pairs.
pub type Pairs = Vec<(Vec<C>, C)>;

fn zero() -> C {
    C::new(0.0, 0.0)
}

/// Plain pairs `(x_i, y_i)` copied out of a set.
pub fn pairs_of(set: &RegressionSet) -> Pairs {
    set.pairs().map(|(x, y)| (x.to_vec(), y)).collect()
}

/// `J0(x) = Σ_k (−1)^k (x/2)^{2k} / (k!)²`, first `terms` terms.
pub fn bessel_j0(x: f64, terms: usize) -> f64 {
    let q = -(x * x) / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..terms {
        term *= q / (k * k) as f64;
        sum += term;
    }
    sum
}

/// Jakes autocorrelation `r[k] = J0(w_m k)`.
pub fn jakes_r(max_doppler: f64, lag: i64) -> f64 {
    bessel_j0(max_doppler * lag as f64, 20)
}

/// Gauss–Jordan elimination with partial pivoting; `None` when singular.
pub fn gauss_solve(a: &[Vec<C>], b: &[C]) -> Option<Vec<C>> {
    let n = b.len();
    let mut m: Vec<Vec<C>> = a.iter().zip(b).map(|(row, &bi)| row.iter().copied().chain([bi]).collect()).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].norm().total_cmp(&m[j][col].norm()))?;
        if m[piv][col].norm() == 0.0 {
            return None;
        }
        m.swap(col, piv);
        let p = m[col][col];
        for v in m[col].iter_mut() {
            *v /= p;
        }
        for r in 0..n {
            if r != col {
                let f = m[r][col];
                if f != zero() {
                    let pivot = m[col].clone();
                    for (x, t) in m[r][col..].iter_mut().zip(&pivot[col..]) {
                        *x -= f * t;
                    }
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[n]).collect())
}

fn dot_conj(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Prediction error `v†x − y`.
pub fn residual(v: &[C], x: &[C], y: C) -> C {
    dot_conj(v, x) - y
}

pub fn sum_sq_error(v: &[C], pairs: &[(Vec<C>, C)]) -> f64 {
    pairs.iter().map(|(x, y)| residual(v, x, *y).norm_sqr()).sum()
}

/// Gradient `∂/∂Re + j ∂/∂Im` of `Σ w |v†x_i − y_i|²`: `2w Σ x_i conj(e_i)`.
fn add_sq_error_grad(g: &mut [C], v: &[C], pairs: &[(Vec<C>, C)], weight: f64) {
    for (x, y) in pairs {
        let e = residual(v, x, *y).conj() * (2.0 * weight);
        for (gj, xj) in g.iter_mut().zip(x) {
            *gj += xj * e;
        }
    }
}

/// Gradient of `Σ|v†x−y|² + α Σ_te|v†x−y|² + λ||v − v̄||²`.
pub fn total_objective_grad(
    v: &[C],
    train: &[(Vec<C>, C)],
    test: &[(Vec<C>, C)],
    alpha: f64,
    lambda: f64,
    bias: &[C],
) -> Vec<C> {
    let mut g: Vec<C> = v.iter().zip(bias).map(|(a, b)| (a - b) * (2.0 * lambda)).collect();
    add_sq_error_grad(&mut g, v, train, 1.0);
    if alpha != 0.0 {
        add_sq_error_grad(&mut g, v, test, alpha);
    }
    g
}

/// Ridge minimizer by elimination on `(Σ x x† + λI) v = Σ x conj(y) + λ v̄`.
pub fn ridge_direct(train: &[(Vec<C>, C)], lambda: f64, bias: &[C]) -> Vec<C> {
    let n = bias.len();
    let mut a = vec![vec![zero(); n]; n];
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
    gauss_solve(&a, &b).expect("ridge system is positive definite")
}

/// Per-frame meta loss: test error of the ridge-adapted predictor.
pub fn outer_loss_direct(train: &[(Vec<C>, C)], test: &[(Vec<C>, C)], lambda: f64, bias: &[C]) -> f64 {
    sum_sq_error(&ridge_direct(train, lambda, bias), test)
}

/// Central differences of a real function of a complex vector, giving
/// `∂f/∂Re v_j + j ∂f/∂Im v_j`.
pub fn finite_difference_grad(f: impl Fn(&[C]) -> f64, v: &[C], h: f64) -> Vec<C> {
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
            C::new(part(C::new(h, 0.0)), part(C::new(0.0, h)))
        })
        .collect()
}

/// Outcome of a descent run.
#[derive(Debug, Clone)]
pub struct Descent {
    pub x: Vec<C>,
    pub iterations: usize,
    pub grad_norm: f64,
}

/// Gradient descent on a convex quadratic given only its gradient. The step
/// is `1 / L` with `L` the largest Hessian eigenvalue, found by power
/// iteration on gradient differences. Stops once `||∇|| ≤ tol · ||∇(x0)||`.
pub fn gradient_descent(grad: impl Fn(&[C]) -> Vec<C>, x0: &[C], tol: f64, max_iter: usize) -> Descent {
    let n = x0.len();
    let g0 = grad(x0);
    let hess = |d: &[C]| -> Vec<C> {
        let p: Vec<C> = x0.iter().zip(d).map(|(a, b)| a + b).collect();
        grad(&p).iter().zip(&g0).map(|(a, b)| a - b).collect()
    };
    let mut d: Vec<C> = (0..n).map(|i| C::new(1.0 + i as f64 * 0.37, 0.5 - i as f64 * 0.11)).collect();
    let mut l = 0.0;
    for _ in 0..200 {
        let nd = norm(&d);
        d.iter_mut().for_each(|z| *z /= nd);
        let hd = hess(&d);
        l = norm(&hd);
        d = hd;
    }
    let step = 1.0 / (l * 1.01).max(f64::MIN_POSITIVE);
    let base = norm(&g0).max(f64::MIN_POSITIVE);
    let mut x = x0.to_vec();
    let mut g = g0;
    let mut it = 0;
    while it < max_iter && norm(&g) > tol * base {
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi -= gi * step;
        }
        g = grad(&x);
        it += 1;
    }
    Descent { grad_norm: norm(&g), x, iterations: it }
}

/// Gradient of the summed outer loss for gradient-descent meta-fitting:
/// `λ A⁻¹ · 2 Σ_te x conj(e)` per frame, with `A` solved by elimination.
pub fn outer_grad_direct(frames: &[(Pairs, Pairs)], lambda: f64, bias: &[C]) -> Vec<C> {
    let n = bias.len();
    let mut total = vec![zero(); n];
    for (train, test) in frames {
        let v = ridge_direct(train, lambda, bias);
        let mut g = vec![zero(); n];
        add_sq_error_grad(&mut g, &v, test, 1.0);
        let mut a = vec![vec![zero(); n]; n];
        for (x, _) in train {
            for i in 0..n {
                for j in 0..n {
                    a[i][j] += x[i] * x[j].conj();
                }
            }
        }
        for (i, row) in a.iter_mut().enumerate() {
            row[i] += lambda;
        }
        let s = gauss_solve(&a, &g).expect("positive definite");
        for (t, si) in total.iter_mut().zip(s) {
            *t += si * lambda;
        }
    }
    total
}

/// Relative distance `||a − b|| / max(||b||, floor)`.
pub fn rel_err(a: &[C], b: &[C]) -> f64 {
    let d: Vec<C> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm(&d) / norm(b).max(1e-300)
}

/// Split with i.i.d. unit complex Gaussian covariates and labels.
pub fn random_split(seed: u64, window: usize, train_len: usize, test_len: usize) -> SplitSet {
    let mut rng = seeded(seed);
    let mut draw = |len: usize| {
        let mut set = RegressionSet::empty(window, 1);
        for _ in 0..len {
            let x: Vec<C> = (0..window).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
            set.push(&x, complex_gaussian(&mut rng, 1.0)).expect("window matches");
        }
        set
    };
    let train = draw(train_len);
    let test = draw(test_len);
    SplitSet { train, test }
}

/// Complex vector with i.i.d. unit Gaussian entries.
pub fn random_vector(seed: u64, len: usize) -> Vec<C> {
    let mut rng = seeded(seed);
    (0..len).map(|_| complex_gaussian(&mut rng, 1.0)).collect()
}
