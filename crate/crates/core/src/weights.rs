//! Convolution quadrature weights from the generating expansion
//! `L(Δ(ζ)/τ) = Σ W_n ζⁿ`, realised by the trapezoidal rule on the circle
//! `|ζ| = ρ` and one FFT per matrix entry.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::fft::fft;
use crate::linalg::{CMatrix, MatFnError, C64};
use crate::par::map_indices;
use crate::symbol::DifferentiationSymbol;
use crate::tableau::{ButcherTableau, Method};
use crate::transfer::TransferFunction;

/// Contour parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightOptions {
    /// `N_q = oversampling · N` contour points.
    pub oversampling: usize,
    /// Contour radius; `None` picks `ε^{1/((oversampling+1)N)}`, which
    /// balances the aliasing term `ρ^{N_q}` against round-off `ε ρ^{−N}`.
    pub radius: Option<f64>,
    /// Eigenvector condition threshold of the diagonalisation path.
    pub max_cond: f64,
}

impl Default for WeightOptions {
    fn default() -> Self {
        Self { oversampling: 4, radius: None, max_cond: 1e6 }
    }
}

impl WeightOptions {
    pub fn contour_points(&self, n: usize) -> usize {
        self.oversampling * n
    }

    pub fn radius_for(&self, n: usize) -> f64 {
        self.radius.unwrap_or_else(|| f64::EPSILON.powf(1.0 / ((self.oversampling + 1) * n) as f64))
    }
}

/// Weights `W_0 … W_{N−1}` of `L(∂_t^τ)` for one tableau and step size.
#[derive(Debug, Clone)]
pub struct WeightTable {
    weights: Vec<CMatrix>,
    tau: f64,
    method: Method,
    transfer_id: String,
    rho: f64,
    oversampling: usize,
    /// `ρ^{N_q} max‖L(Δ/τ)‖ / (1 − ρ^{N_q})`, a heuristic aliasing bound.
    pub aliasing_bound: f64,
    /// Largest eigenvector condition number met on the contour.
    pub max_cond: f64,
    /// Contour points that needed the Schur–Parlett fallback.
    pub schur_parlett_points: usize,
}

impl WeightTable {
    /// Builds a table from explicit weights (tests and closed-form cases).
    pub fn from_weights(weights: Vec<CMatrix>, tau: f64, method: Method, transfer_id: impl Into<String>) -> Self {
        Self {
            weights,
            tau,
            method,
            transfer_id: transfer_id.into(),
            rho: 0.0,
            oversampling: 0,
            aliasing_bound: 0.0,
            max_cond: 1.0,
            schur_parlett_points: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn stages(&self) -> usize {
        self.weights.first().map_or(0, CMatrix::dim)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn transfer_id(&self) -> &str {
        &self.transfer_id
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn oversampling(&self) -> usize {
        self.oversampling
    }

    pub fn weights(&self) -> &[CMatrix] {
        &self.weights
    }

    pub fn get(&self, n: usize) -> &CMatrix {
        &self.weights[n]
    }

    /// `Σ ‖W_n‖_F`.
    pub fn total_norm(&self) -> f64 {
        self.weights.iter().map(CMatrix::norm_fro).sum()
    }

    /// Largest imaginary part over all entries; ~round-off for real-symmetric `L`.
    pub fn max_imag(&self) -> f64 {
        self.weights.iter().map(CMatrix::max_imag).fold(0.0, f64::max)
    }

    /// Real parts as row-major `m×m` blocks, for real-symmetric transfers.
    pub fn real_blocks(&self) -> Vec<Vec<f64>> {
        self.weights.iter().map(|w| w.as_slice().iter().map(|z| z.re).collect()).collect()
    }
}

/// `L(S)` for an `m×m` argument, mapping evaluation failures into the crate
/// error type.
pub fn transfer_of_matrix(l: &TransferFunction, s: &CMatrix, max_cond: f64) -> Result<(CMatrix, f64, bool)> {
    let f = |z: C64| l.eval(z);
    match s.apply_fn(&f, max_cond, l.abscissa()) {
        Ok(r) => Ok((r.value, r.cond, r.used_schur_parlett)),
        Err(MatFnError::Linalg(e)) => Err(e.into()),
        Err(MatFnError::Eval(e)) => Err(e.into()),
    }
}

/// Computes `W_n(L)` for `n < horizon`:
/// `W_n ≈ ρ^{−n}/N_q Σ_l L(Δ(ρω^l)/τ) ω^{−ln}`, `ω = e^{2πi/N_q}`.
pub fn compute_weights(
    l: &TransferFunction,
    tableau: &ButcherTableau,
    tau: f64,
    horizon: usize,
    opts: &WeightOptions,
) -> Result<WeightTable> {
    if horizon == 0 {
        return Err(Error::InvalidParameter(String::from("horizon N must be at least 1")));
    }
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter(format!("step size must be positive, got {tau}")));
    }
    if opts.oversampling == 0 {
        return Err(Error::InvalidParameter(String::from("oversampling must be at least 1")));
    }
    let rho = opts.radius_for(horizon);
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidParameter(format!("contour radius must lie in (0, 1), got {rho}")));
    }
    let nq = opts.contour_points(horizon);
    let m = tableau.stages();
    let sym = DifferentiationSymbol::new(tableau);

    let point = |k: usize| -> Result<(CMatrix, f64, bool)> {
        let theta = TAU * k as f64 / nq as f64;
        let zeta = C64::from_polar(rho, theta);
        let s = sym.delta(zeta)?.scale(C64::new(1.0 / tau, 0.0));
        transfer_of_matrix(l, &s, opts.max_cond).map_err(|e| match e {
            Error::Domain(source) => Error::ContourEvaluation { theta, source },
            other => other,
        })
    };

    let samples = map_indices(nq, point);

    let mut values = Vec::with_capacity(nq);
    let mut max_cond = 1.0f64;
    let mut parlett = 0usize;
    let mut max_norm = 0.0f64;
    for s in samples {
        let (v, cond, used) = s?;
        if !v.is_finite() {
            return Err(Error::InvalidParameter(String::from("transfer function returned a non-finite value")));
        }
        max_cond = max_cond.max(cond);
        parlett += used as usize;
        max_norm = max_norm.max(v.norm_fro());
        values.push(v);
    }

    let mut weights = vec![CMatrix::zeros(m); horizon];
    let mut column = vec![C64::zero(); nq];
    // ρ^{-n} computed in log space to avoid drift from repeated products.
    let log_rho = rho.ln();
    for i in 0..m {
        for j in 0..m {
            for (slot, v) in column.iter_mut().zip(&values) {
                *slot = v[(i, j)];
            }
            fft(&mut column);
            for (n, w) in weights.iter_mut().enumerate() {
                let scale = (-(n as f64) * log_rho).exp() / nq as f64;
                w[(i, j)] = column[n] * scale;
            }
        }
    }

    let rho_nq = (nq as f64 * log_rho).exp();
    Ok(WeightTable {
        weights,
        tau,
        method: tableau.method(),
        transfer_id: String::from(l.name()),
        rho,
        oversampling: opts.oversampling,
        aliasing_bound: rho_nq * max_norm / (1.0 - rho_nq),
        max_cond,
        schur_parlett_points: parlett,
    })
}

/// Closed-form weights of `s^{−k}`, `k ∈ {1, 2}`, from
/// `τΔ(ζ)⁻¹ = τ𝒜 + τγ𝟙bᵀ`, `γ = ζ/(1−ζ) = Σ_{n≥1} ζⁿ`:
/// `W₀ = τ𝒜`, `W_n = τ𝟙bᵀ` for `k = 1`, and
/// `W₀ = τ²𝒜²`, `W_n = τ²(𝒜𝟙bᵀ + 𝟙bᵀ𝒜 + (n−1)𝟙bᵀ)` for `k = 2`
/// (using `bᵀ𝟙 = 1`).
pub fn integrator_weights(tableau: &ButcherTableau, tau: f64, k: u32, horizon: usize) -> Result<WeightTable> {
    if !(tau > 0.0) || horizon == 0 {
        return Err(Error::InvalidParameter(format!("need tau > 0 and horizon >= 1, got {tau}, {horizon}")));
    }
    let m = tableau.stages();
    let a = tableau.a_matrix();
    let b = tableau.b();
    let one_b = CMatrix::from_fn(m, |_, j| C64::new(b[j], 0.0));
    let weights = match k {
        1 => (0..horizon)
            .map(|n| if n == 0 { a.scale(C64::new(tau, 0.0)) } else { one_b.scale(C64::new(tau, 0.0)) })
            .collect(),
        2 => {
            let t2 = C64::new(tau * tau, 0.0);
            let cross = &(&a * &one_b) + &(&one_b * &a);
            (0..horizon)
                .map(|n| {
                    if n == 0 {
                        (&a * &a).scale(t2)
                    } else {
                        (&cross + &one_b.scale(C64::new((n - 1) as f64, 0.0))).scale(t2)
                    }
                })
                .collect()
        }
        _ => return Err(Error::Unsupported(format!("closed-form integrator weights only for k = 1, 2, not {k}"))),
    };
    Ok(WeightTable::from_weights(weights, tau, tableau.method(), format!("s^-{k}")))
}
