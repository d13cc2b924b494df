//! Runge–Kutta tableaus, the b-weighted inner product and algebraic
//! stability certificates.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, CMatrix, C64};

/// Methods shipped with the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Implicit Euler.
    Radau1,
    Radau2,
    Radau3,
    /// Implicit midpoint rule.
    Gauss1,
    Gauss2,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Radau1, Method::Radau2, Method::Radau3, Method::Gauss1, Method::Gauss2];

    pub fn name(self) -> &'static str {
        match self {
            Method::Radau1 => "radau1",
            Method::Radau2 => "radau2",
            Method::Radau3 => "radau3",
            Method::Gauss1 => "gauss1",
            Method::Gauss2 => "gauss2",
        }
    }

    /// Constant `c` of `Re (w, Δ(ζ) w) ≥ cδ|w|²` for `|ζ| ≤ e^{-δ}` when one
    /// exists. Radau IIA with three or more stages and Gauss with two or more
    /// stages have none.
    pub fn coercivity_constant(self) -> Option<f64> {
        match self {
            Method::Radau1 | Method::Radau2 | Method::Gauss1 => Some(0.9),
            Method::Radau3 | Method::Gauss2 => None,
        }
    }

    pub fn tableau(self) -> ButcherTableau {
        ButcherTableau::new(self)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "radau1" | "implicit-euler" => Ok(Method::Radau1),
            "radau2" => Ok(Method::Radau2),
            "radau3" => Ok(Method::Radau3),
            "gauss1" | "implicit-midpoint" => Ok(Method::Gauss1),
            "gauss2" => Ok(Method::Gauss2),
            _ => Err(Error::UnknownMethod(s.to_string())),
        }
    }
}

/// Butcher tableau `(𝒜, b, c)` with the derived quantities the quadrature
/// needs (`𝒜⁻¹`, `R(∞)`).
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTableau {
    method: Method,
    m: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    a_inv: CMatrix,
    r_inf: f64,
}

/// Parses a method name into its tableau.
pub fn make_tableau(name: &str) -> Result<ButcherTableau> {
    Ok(name.parse::<Method>()?.tableau())
}

impl ButcherTableau {
    #[allow(clippy::excessive_precision)] // 32-digit literals, rounded once by the compiler
    pub fn new(method: Method) -> Self {
        #[rustfmt::skip]
        let (a, b, c): (Vec<f64>, Vec<f64>, Vec<f64>) = match method {
            Method::Radau1 => (vec![1.0], vec![1.0], vec![1.0]),
            Method::Radau2 => (
                vec![5.0 / 12.0, -1.0 / 12.0,
                     3.0 / 4.0, 1.0 / 4.0],
                vec![3.0 / 4.0, 1.0 / 4.0],
                vec![1.0 / 3.0, 1.0],
            ),
            Method::Radau3 => (
                vec![0.19681547722366042586838614299183, -0.065535425850198388108522782569609, 0.02377097434822015242040823210719,
                     0.3944243147390872769974116714585, 0.29207341166522846302050274589706, -0.041548752125997930198186009884967,
                     0.37640306270046727505007544236928, 0.51248582618842161383881344651961, 0.11111111111111111111111111111111],
                vec![0.37640306270046727505007544236928, 0.51248582618842161383881344651961, 0.11111111111111111111111111111111],
                vec![0.15505102572168219018027159252941, 0.64494897427831780981972840747059, 1.0],
            ),
            Method::Gauss1 => (vec![0.5], vec![1.0], vec![0.5]),
            Method::Gauss2 => (
                vec![0.25, -0.038675134594812882254574390250979,
                     0.53867513459481288225457439025098, 0.25],
                vec![0.5, 0.5],
                vec![0.21132486540518711774542560974902, 0.78867513459481288225457439025098],
            ),
        };
        let m = b.len();
        let a_mat = CMatrix::from_real(m, &a);
        let a_inv = a_mat.inverse().expect("shipped tableaus have invertible A");
        let ones = alloc::vec![C64::new(1.0, 0.0); m];
        let a_inv_one = a_inv.mul_vec(&ones);
        let r_inf = 1.0 - b.iter().zip(&a_inv_one).map(|(bi, x)| bi * x.re).sum::<f64>();
        // Exact zero for stiffly accurate methods; the float residue is ~1e-16.
        let r_inf = if r_inf.abs() < 1e-13 { 0.0 } else { r_inf };
        Self { method, m, a, b, c, a_inv, r_inf }
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn name(&self) -> &'static str {
        self.method.name()
    }

    pub fn stages(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.m + j]
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn a_matrix(&self) -> CMatrix {
        CMatrix::from_real(self.m, &self.a)
    }

    pub fn a_inverse(&self) -> &CMatrix {
        &self.a_inv
    }

    /// Stability function at infinity, `R(∞) = 1 − bᵀ𝒜⁻¹𝟙`.
    pub fn r_infinity(&self) -> f64 {
        self.r_inf
    }

    /// `bᵀ` equals the last row of `𝒜` (so `c_m = 1` and `R(∞) = 0`).
    pub fn is_stiffly_accurate(&self) -> bool {
        self.stiff_accuracy_defect() <= 1e-15
    }

    /// `‖bᵀ − e_mᵀ𝒜‖_∞`.
    pub fn stiff_accuracy_defect(&self) -> f64 {
        let last = self.m - 1;
        (0..self.m).map(|j| (self.b[j] - self.a(last, j)).abs()).fold(0.0, f64::max)
    }

    /// Largest defect of the simplifying conditions
    /// `Σ_j a_ij c_j^{k-1} = c_i^k / k` for `k = 1..=order`.
    pub fn simplifying_c_defect(&self, order: usize) -> f64 {
        let mut worst = 0.0f64;
        for k in 1..=order {
            for i in 0..self.m {
                let lhs: f64 = (0..self.m).map(|j| self.a(i, j) * self.c[j].powi(k as i32 - 1)).sum();
                let rhs = self.c[i].powi(k as i32) / k as f64;
                worst = worst.max((lhs - rhs).abs());
            }
        }
        worst
    }

    pub fn inner_product(&self) -> WeightedInnerProduct {
        WeightedInnerProduct::new(self.b.clone()).expect("shipped tableaus have positive weights")
    }

    /// Algebraic stability: positive weights and
    /// `M_ij = b_i a_ij + b_j a_ji − b_i b_j` positive semi-definite.
    pub fn check_algebraic_stability(&self) -> AlgebraicStability {
        let m = self.m;
        let b = &self.b;
        let mmat = CMatrix::from_fn(m, |i, j| C64::new(b[i] * self.a(i, j) + b[j] * self.a(j, i) - b[i] * b[j], 0.0));
        let min_eig = hermitian_eigenvalues(&mmat)[0];
        AlgebraicStability {
            b_positive: b.iter().all(|&x| x > 0.0),
            m_psd: min_eig >= -PSD_TOLERANCE,
            min_eig_m: min_eig,
            m_matrix: mmat,
        }
    }
}

pub const PSD_TOLERANCE: f64 = 1e-12;

/// Result of [`ButcherTableau::check_algebraic_stability`].
#[derive(Debug, Clone)]
pub struct AlgebraicStability {
    pub b_positive: bool,
    pub m_psd: bool,
    pub min_eig_m: f64,
    pub m_matrix: CMatrix,
}

impl AlgebraicStability {
    pub fn is_algebraically_stable(&self) -> bool {
        self.b_positive && self.m_psd
    }
}

/// `(u, v) = Σ b_i conj(u_i) v_i` on `ℂ^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedInnerProduct {
    b: Vec<f64>,
}

impl WeightedInnerProduct {
    pub fn new(b: Vec<f64>) -> Result<Self> {
        if b.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::NonPositiveWeights);
        }
        Ok(Self { b })
    }

    pub fn weights(&self) -> &[f64] {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn dot(&self, u: &[C64], v: &[C64]) -> Result<C64> {
        self.check(u.len())?;
        self.check(v.len())?;
        Ok(self.dot_unchecked(u, v))
    }

    pub(crate) fn dot_unchecked(&self, u: &[C64], v: &[C64]) -> C64 {
        self.b.iter().zip(u.iter().zip(v)).map(|(&w, (x, y))| x.conj() * y * w).sum()
    }

    pub fn norm_sqr(&self, u: &[C64]) -> f64 {
        self.b.iter().zip(u).map(|(&w, x)| w * x.norm_sqr()).sum()
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.b.len() {
            return Err(Error::DimensionMismatch { expected: self.b.len(), found: len });
        }
        Ok(())
    }
}

/// Free-function form of [`WeightedInnerProduct::dot`].
pub fn weighted_dot(ip: &WeightedInnerProduct, u: &[C64], v: &[C64]) -> Result<C64> {
    ip.dot(u, v)
}
