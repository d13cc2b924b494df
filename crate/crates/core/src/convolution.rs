//! Causal stage sequences and the block discrete convolution
//! `(L(∂_t^τ) f)_n = Σ_{j≤n} W_{n−j} f_j`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::tableau::ButcherTableau;
use crate::transfer::TransferFunction;
use crate::weights::{compute_weights, WeightOptions, WeightTable};

/// Causal sequence `(f_n)_{n≥0}` of `m`-vectors, stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct StageSequence {
    m: usize,
    tau: f64,
    offset: usize,
    data: Vec<C64>,
}

impl StageSequence {
    pub fn zeros(len: usize, m: usize, tau: f64) -> Self {
        Self { m, tau, offset: len, data: vec![C64::zero(); len * m] }
    }

    /// `f_{n,i} = value(n, i)`.
    pub fn from_fn(len: usize, m: usize, tau: f64, mut value: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(len * m);
        for n in 0..len {
            for i in 0..m {
                data.push(value(n, i));
            }
        }
        let mut s = Self { m, tau, offset: 0, data };
        s.offset = s.first_nonzero();
        s
    }

    /// Samples `f(t_n + c_i τ)`.
    pub fn sample(tableau: &ButcherTableau, len: usize, tau: f64, mut f: impl FnMut(f64) -> f64) -> Self {
        let c = tableau.c();
        Self::from_fn(len, tableau.stages(), tau, |n, i| C64::new(f((n as f64 + c[i]) * tau), 0.0))
    }

    pub fn from_flat(m: usize, tau: f64, data: Vec<C64>) -> Result<Self> {
        if m == 0 || !data.len().is_multiple_of(m) {
            return Err(Error::DimensionMismatch { expected: m, found: data.len() });
        }
        let mut s = Self { m, tau, offset: 0, data };
        s.offset = s.first_nonzero();
        Ok(s)
    }

    fn first_nonzero(&self) -> usize {
        (0..self.len()).find(|&n| self.get(n).iter().any(|z| !z.is_zero())).unwrap_or(self.len())
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.m
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn stages(&self) -> usize {
        self.m
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// First index with a non-zero entry (`len()` for the zero sequence).
    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn get(&self, n: usize) -> &[C64] {
        &self.data[n * self.m..(n + 1) * self.m]
    }

    pub fn get_mut(&mut self, n: usize) -> &mut [C64] {
        self.offset = self.offset.min(n);
        &mut self.data[n * self.m..(n + 1) * self.m]
    }

    pub fn as_flat(&self) -> &[C64] {
        &self.data
    }

    /// Euclidean norm over all entries.
    pub fn l2_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn sub(&self, other: &StageSequence) -> Result<StageSequence> {
        if self.m != other.m || self.len() != other.len() {
            return Err(Error::Mismatch(format!(
                "sequences of shape {}x{} and {}x{}",
                self.len(),
                self.m,
                other.len(),
                other.m
            )));
        }
        StageSequence::from_flat(self.m, self.tau, self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect())
    }

    pub fn scaled(&self, s: f64) -> StageSequence {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|z| *z *= s);
        out
    }

    /// Copy truncated to the first `len` steps.
    pub fn truncated(&self, len: usize) -> StageSequence {
        let len = len.min(self.len());
        let mut out = Self { m: self.m, tau: self.tau, offset: 0, data: self.data[..len * self.m].to_vec() };
        out.offset = out.first_nonzero();
        out
    }

    /// Real parts, for sequences known to be real.
    pub fn real_parts(&self) -> Vec<f64> {
        self.data.iter().map(|z| z.re).collect()
    }
}

fn same_step(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

/// Direct `O(N² m²)` causal block convolution.
pub fn block_convolve(w: &WeightTable, f: &StageSequence) -> Result<StageSequence> {
    if !same_step(w.tau(), f.tau()) {
        return Err(Error::Mismatch(format!("weights built for tau = {}, sequence has tau = {}", w.tau(), f.tau())));
    }
    if f.len() > w.len() {
        return Err(Error::Mismatch(format!("sequence length {} exceeds weight horizon {}", f.len(), w.len())));
    }
    if w.stages() != f.stages() {
        return Err(Error::DimensionMismatch { expected: w.stages(), found: f.stages() });
    }
    let m = f.stages();
    let mut out = StageSequence::zeros(f.len(), m, f.tau());
    for n in f.offset()..f.len() {
        let mut acc = vec![C64::zero(); m];
        for j in f.offset()..=n {
            w.get(n - j).mul_vec_acc(f.get(j), &mut acc);
        }
        out.get_mut(n).copy_from_slice(&acc);
    }
    out.offset = out.first_nonzero();
    Ok(out)
}

/// `(∂_t^τ − λ)^{−1} f`: the convolution quadrature for `(s − λ)^{−1}`, whose
/// entries are the internal stages of the Runge–Kutta solution of
/// `y′ = λy + f`, `y(0) = 0`.
pub fn resolvent_stages(
    lambda: C64,
    tableau: &ButcherTableau,
    f: &StageSequence,
    opts: &WeightOptions,
) -> Result<StageSequence> {
    let tau = f.tau();
    // Δ(0)/τ − λ = 𝒜⁻¹/τ − λ must be invertible.
    let shifted = tableau.a_inverse() - &crate::linalg::CMatrix::identity(tableau.stages()).scale(lambda * tau);
    shifted.lu()?;
    if f.is_empty() {
        return Ok(f.clone());
    }
    let w = compute_weights(&TransferFunction::resolvent(lambda), tableau, tau, f.len(), opts)?;
    block_convolve(&w, f)
}

/// Residual of the composition rule `L₂(∂)L₁(∂)f = (L₂L₁)(∂)f`.
#[derive(Debug, Clone, Copy)]
pub struct CompositionCheck {
    pub residual: f64,
    pub input_norm: f64,
}

pub fn compose_check(
    l1: &TransferFunction,
    l2: &TransferFunction,
    tableau: &ButcherTableau,
    f: &StageSequence,
    opts: &WeightOptions,
) -> Result<CompositionCheck> {
    let n = f.len().max(1);
    let tau = f.tau();
    let w1 = compute_weights(l1, tableau, tau, n, opts)?;
    let w2 = compute_weights(l2, tableau, tau, n, opts)?;
    let w12 = compute_weights(&l2.product(l1), tableau, tau, n, opts)?;
    let two_step = block_convolve(&w2, &block_convolve(&w1, f)?)?;
    let direct = block_convolve(&w12, f)?;
    Ok(CompositionCheck { residual: two_step.sub(&direct)?.l2_norm(), input_norm: f.l2_norm() })
}
