//! Helpers shared by the integration tests. Kept free of the crate's own
//! linear algebra so they can serve as independent oracles.
#![allow(dead_code)]

use cqlab_core::{ButcherTableau, C64};

/// Gaussian elimination with partial pivoting on a dense complex system.
pub fn solve_dense(mut a: Vec<Vec<C64>>, mut rhs: Vec<C64>) -> Vec<C64> {
    let n = rhs.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].norm().total_cmp(&a[j][k].norm())).unwrap();
        a.swap(k, p);
        rhs.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            let pivot_row = a[k].clone();
            for (aij, akj) in a[i].iter_mut().zip(&pivot_row).skip(k) {
                *aij -= f * akj;
            }
            let rk = rhs[k];
            rhs[i] -= f * rk;
        }
    }
    let mut x = vec![C64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        for j in i + 1..n {
            s -= a[i][j] * x[j];
        }
        x[i] = s / a[i][i];
    }
    x
}

/// Internal stages of the Runge–Kutta solution of `y′ = λy + f(t)`, `y(0) = 0`,
/// computed step by step: `(I − τλ𝒜)Y = y_n𝟙 + τ𝒜F`,
/// `y_{n+1} = y_n + τ bᵀ(λY + F)`. Returned flat, step-major.
pub fn direct_rk_stages(
    t: &ButcherTableau,
    lambda: C64,
    f: impl Fn(usize, usize) -> C64,
    tau: f64,
    n: usize,
) -> Vec<C64> {
    let m = t.stages();
    let mut y = C64::new(0.0, 0.0);
    let mut out = Vec::with_capacity(n * m);
    for step in 0..n {
        let fs: Vec<C64> = (0..m).map(|i| f(step, i)).collect();
        let mat: Vec<Vec<C64>> = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        let d = if i == j { 1.0 } else { 0.0 };
                        C64::new(d, 0.0) - lambda * (tau * t.a(i, j))
                    })
                    .collect()
            })
            .collect();
        let rhs: Vec<C64> = (0..m).map(|i| y + (0..m).map(|j| fs[j] * (tau * t.a(i, j))).sum::<C64>()).collect();
        let stages = solve_dense(mat, rhs);
        y += (0..m).map(|j| (lambda * stages[j] + fs[j]) * (tau * t.b()[j])).sum::<C64>();
        out.extend(stages);
    }
    out
}

pub const ALL_METHODS: [&str; 5] = ["radau1", "radau2", "radau3", "gauss1", "gauss2"];
