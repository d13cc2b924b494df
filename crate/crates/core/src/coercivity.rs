//! Numerical coercivity diagnostics: the numerical range of `Δ(ζ)` in the
//! `b`-weighted inner product, the order-barrier probe, the matrix-function
//! inequality `Re⟨v, L(S)v⟩ ≥ α‖R(S)v‖²` and the discrete Herglotz
//! inequality for convolution quadrature.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::TAU;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use num_traits::Zero;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::convolution::{block_convolve, StageSequence};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, CMatrix, C64};
use crate::par::map_indices;
use crate::symbol::DifferentiationSymbol;
use crate::tableau::{ButcherTableau, Method, WeightedInnerProduct};
use crate::transfer::TransferFunction;
use crate::weights::{compute_weights, transfer_of_matrix, WeightOptions};

/// Largest accepted `‖H − H*‖` before symmetrisation.
pub const HERMITIAN_TOLERANCE: f64 = 1e-13;

/// Round-off floor for `λ_min(H)`: `64 m ε ‖H‖_F`. Eigenvalues inside the
/// floor cannot be told apart from zero.
pub fn eigenvalue_noise_floor(h: &CMatrix) -> f64 {
    64.0 * h.dim() as f64 * f64::EPSILON * h.norm_fro().max(1.0)
}

/// `B^{1/2}` and `B^{−1/2}` for `B = diag(b)`; rejects non-positive weights.
fn weight_roots(t: &ButcherTableau) -> Result<(Vec<f64>, Vec<f64>)> {
    if t.b().iter().any(|&b| !(b > 0.0)) {
        return Err(Error::NonPositiveWeights);
    }
    Ok((t.b().iter().map(|b| b.sqrt()).collect(), t.b().iter().map(|b| 1.0 / b.sqrt()).collect()))
}

/// Unsymmetrised `H(ζ) = B^{−1/2} ½(BΔ(ζ) + Δ(ζ̄)ᵀB) B^{−1/2}`.
pub fn hermitian_part_matrix(sym: &DifferentiationSymbol, zeta: C64) -> Result<CMatrix> {
    let t = sym.tableau();
    let (_, inv_root) = weight_roots(t)?;
    let b = t.b();
    let d = sym.delta(zeta)?;
    let dt = sym.delta(zeta.conj())?.transpose();
    Ok(CMatrix::from_fn(t.stages(), |i, j| (d[(i, j)] * b[i] + dt[(i, j)] * b[j]) * (0.5 * inv_root[i] * inv_root[j])))
}

/// `λ_min(H(ζ))` and `‖H − H*‖_F` at one point.
pub fn min_eigenvalue_at(sym: &DifferentiationSymbol, zeta: C64) -> Result<(f64, f64, f64)> {
    let h = hermitian_part_matrix(sym, zeta)?;
    let defect = (&h - &h.adjoint()).norm_fro();
    let sym_h = (&h + &h.adjoint()).scale(C64::new(0.5, 0.0));
    let lam = hermitian_eigenvalues(&sym_h)[0];
    Ok((lam, defect, eigenvalue_noise_floor(&sym_h)))
}

/// `λ_min(H(ζ))` on the circle `ζ = e^{−δ+iθ_k}`, `θ_k = 2πk/ntheta`.
#[derive(Debug, Clone)]
pub struct CoercivityScan {
    pub method: Method,
    pub delta: f64,
    pub ntheta: usize,
    pub theta: Vec<f64>,
    /// Raw smallest eigenvalues, one per grid angle.
    pub lambda_min: Vec<f64>,
    /// Smallest raw eigenvalue and its angle.
    pub min_lambda: f64,
    pub argmin_theta: f64,
    /// Round-off floor at the minimising angle.
    pub noise_floor: f64,
    /// `min λ / δ`, with a minimum inside the round-off floor counted as 0.
    pub worst_ratio: f64,
    /// Largest `‖H − H*‖_F` before symmetrisation.
    pub hermitian_defect: f64,
    /// Grid points with `λ_min < −noise_floor` (impossible for algebraically
    /// stable tableaus).
    pub violations: usize,
}

impl CoercivityScan {
    /// `min λ` with values inside the round-off floor resolved to 0.
    pub fn resolved_min(&self) -> f64 {
        if self.min_lambda.abs() <= self.noise_floor {
            0.0
        } else {
            self.min_lambda
        }
    }
}

pub fn scan_numerical_range(t: &ButcherTableau, delta: f64, ntheta: usize) -> Result<CoercivityScan> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0, 1], got {delta}")));
    }
    if ntheta < 64 {
        return Err(Error::InvalidParameter(format!("ntheta must be at least 64, got {ntheta}")));
    }
    weight_roots(t)?;
    let sym = DifferentiationSymbol::new(t);
    let r = (-delta).exp();
    let theta: Vec<f64> = (0..ntheta).map(|k| TAU * k as f64 / ntheta as f64).collect();
    let rows = map_indices(ntheta, |k| min_eigenvalue_at(&sym, C64::from_polar(r, theta[k])));
    let mut lambda_min = Vec::with_capacity(ntheta);
    let (mut min_lambda, mut argmin_theta) = (f64::INFINITY, 0.0);
    let (mut noise_floor, mut hermitian_defect) = (0.0f64, 0.0f64);
    let mut violations = 0;
    for (k, row) in rows.into_iter().enumerate() {
        let (lam, defect, floor) = row?;
        if lam < min_lambda {
            min_lambda = lam;
            argmin_theta = theta[k];
            noise_floor = floor;
        }
        if lam < -floor {
            violations += 1;
        }
        hermitian_defect = hermitian_defect.max(defect);
        lambda_min.push(lam);
    }
    let mut scan = CoercivityScan {
        method: t.method(),
        delta,
        ntheta,
        theta,
        lambda_min,
        min_lambda,
        argmin_theta,
        noise_floor,
        worst_ratio: 0.0,
        hermitian_defect,
        violations,
    };
    scan.worst_ratio = scan.resolved_min() / delta;
    Ok(scan)
}

/// `worst_ratio(δ)` for each `δ`.
#[derive(Debug, Clone)]
pub struct BarrierProbe {
    pub method: Method,
    pub rows: Vec<BarrierRow>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierRow {
    pub delta: f64,
    pub min_lambda: f64,
    pub worst_ratio: f64,
    pub noise_floor: f64,
}

impl BarrierProbe {
    /// `worst_ratio` never increases as `δ` decreases.
    pub fn is_monotone(&self) -> bool {
        let mut rows = self.rows.clone();
        rows.sort_by(|a, b| b.delta.total_cmp(&a.delta));
        rows.windows(2).all(|w| w[1].worst_ratio <= w[0].worst_ratio)
    }

    pub fn ratio_at(&self, delta: f64) -> Option<f64> {
        self.rows.iter().find(|r| r.delta == delta).map(|r| r.worst_ratio)
    }
}

pub fn order_barrier_probe(t: &ButcherTableau, deltas: &[f64], ntheta: usize) -> Result<BarrierProbe> {
    let rows = deltas
        .iter()
        .map(|&d| {
            let s = scan_numerical_range(t, d, ntheta)?;
            Ok(BarrierRow {
                delta: d,
                min_lambda: s.min_lambda,
                worst_ratio: s.worst_ratio,
                noise_floor: s.noise_floor,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BarrierProbe { method: t.method(), rows })
}

/// Outcome of the matrix-function inequality check.
#[derive(Debug, Clone, Copy)]
pub struct MatrixInequalityReport {
    /// `min_v Re(v, L(S)v) − α‖R(S)v‖²` over unit vectors.
    pub worst_margin: f64,
    /// Largest `|Re(v, L(S)v)| + α‖R(S)v‖²` seen, for relative tolerances.
    pub scale: f64,
    /// `λ_min` of the weighted Hermitian part of `S`.
    pub numerical_range_min: f64,
    pub trials: usize,
}

/// Smallest eigenvalue of `½(B^{1/2} S B^{−1/2} + (…)*)`, the lower end of the
/// numerical range of `S` in the weighted inner product.
pub fn weighted_numerical_range_min(s: &CMatrix, ip: &WeightedInnerProduct) -> Result<f64> {
    if ip.dim() != s.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), found: ip.dim() });
    }
    let w = ip.weights();
    let scaled = CMatrix::from_fn(s.dim(), |i, j| s[(i, j)] * (w[i].sqrt() / w[j].sqrt()));
    Ok(scaled.hermitian_part_eigenvalues()[0])
}

/// Checks `Re(v, L(S)v) ≥ α‖R(S)v‖²` for random `v`, using the certificate
/// `(α, R, σ)` attached to `l`. `S` must satisfy `Re(w, Sw) ≥ σ|w|²`.
pub fn matrix_function_inequality_check<R: Rng + ?Sized>(
    l: &TransferFunction,
    s: &CMatrix,
    ip: &WeightedInnerProduct,
    trials: usize,
    rng: &mut R,
) -> Result<MatrixInequalityReport> {
    let cert = l.certificate().ok_or_else(|| {
        Error::InvalidParameter(format!("transfer function {} carries no coercivity certificate", l.name()))
    })?;
    let nr = weighted_numerical_range_min(s, ip)?;
    let tol = 1e-12 * s.norm_fro().max(1.0);
    if nr < cert.sigma - tol {
        return Err(Error::Precondition(format!(
            "S: weighted numerical range reaches Re = {nr:e} < sigma = {}",
            cert.sigma
        )));
    }
    let max_cond = WeightOptions::default().max_cond;
    let (ls, _, _) = transfer_of_matrix(l, s, max_cond)?;
    let (rs, _, _) = transfer_of_matrix(&cert.r, s, max_cond)?;
    let m = s.dim();
    let mut worst = f64::INFINITY;
    let mut scale = 0.0f64;
    for _ in 0..trials {
        let mut v: Vec<C64> =
            (0..m).map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
        let norm = ip.norm_sqr(&v).sqrt();
        v.iter_mut().for_each(|z| *z /= norm);
        let lhs = ip.dot(&v, &ls.mul_vec(&v))?.re;
        let rhs = cert.alpha * ip.norm_sqr(&rs.mul_vec(&v));
        worst = worst.min(lhs - rhs);
        scale = scale.max(lhs.abs() + rhs.abs());
    }
    Ok(MatrixInequalityReport { worst_margin: worst, scale, numerical_range_min: nr, trials })
}

/// Both sides of the weighted discrete coercivity inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HerglotzReport {
    /// `τ Σ e^{−2σ̃nτ} Re⟨f_n, (L(∂)f)_n⟩`
    pub lhs: f64,
    /// `α τ Σ e^{−2σ̃nτ} ‖(R(∂)f)_n‖²`
    pub rhs: f64,
    pub alpha: f64,
    pub sigma: f64,
    pub sigma_tilde: f64,
    pub margin: f64,
    /// `τ ≤ 0.05 min(1, 1/σ)`, the range where the inequality is expected.
    pub small_step: bool,
}

impl HerglotzReport {
    pub fn scale(&self) -> f64 {
        self.lhs.abs() + self.rhs.abs()
    }

    pub fn holds(&self, rel_tol: f64) -> bool {
        self.margin >= -rel_tol * self.scale()
    }
}

/// Step sizes treated as "sufficiently small" for an abscissa `σ`.
pub fn is_small_step(tau: f64, sigma: f64) -> bool {
    let cap = if sigma > 1.0 { 1.0 / sigma } else { 1.0 };
    tau <= 0.05 * cap
}

/// `σ̃` for the weighted inequality: `σ/c`, or 0 when `σ = 0`.
pub fn sigma_tilde(method: Method, sigma: f64) -> Result<f64> {
    if sigma == 0.0 {
        return Ok(0.0);
    }
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("sigma must be non-negative, got {sigma}")));
    }
    match method.coercivity_constant() {
        Some(c) => Ok(sigma / c),
        None => Err(Error::OrderBarrier { method: String::from(method.name()) }),
    }
}

/// Evaluates both sides of
/// `τ Σ e^{−2σ̃nτ} Re⟨f_n, (L(∂)f)_n⟩ ≥ α τ Σ e^{−2σ̃nτ} ‖(R(∂)f)_n‖²`
/// with `⟨·,·⟩` the `b`-weighted inner product and `(α, R, σ)` the
/// certificate of `l`. Sums run over the length of `f`: exact on the left
/// (`f_n = 0` beyond), and on the right exact for `R = I` and a lower bound
/// otherwise.
pub fn discrete_herglotz_test(
    l: &TransferFunction,
    t: &ButcherTableau,
    f: &StageSequence,
    opts: &WeightOptions,
) -> Result<HerglotzReport> {
    let cert = l.certificate().ok_or_else(|| {
        Error::InvalidParameter(format!("transfer function {} carries no coercivity certificate", l.name()))
    })?;
    let st = sigma_tilde(t.method(), cert.sigma)?;
    let ip = t.inner_product();
    let tau = f.tau();
    let n = f.len();
    if n == 0 {
        return Ok(HerglotzReport {
            lhs: 0.0,
            rhs: 0.0,
            alpha: cert.alpha,
            sigma: cert.sigma,
            sigma_tilde: st,
            margin: 0.0,
            small_step: is_small_step(tau, cert.sigma),
        });
    }
    let lf = block_convolve(&compute_weights(l, t, tau, n, opts)?, f)?;
    let rf = block_convolve(&compute_weights(&cert.r, t, tau, n, opts)?, f)?;
    let (mut lhs, mut rhs) = (0.0, 0.0);
    for k in 0..n {
        let w = (-2.0 * st * k as f64 * tau).exp();
        lhs += w * ip.dot_unchecked(f.get(k), lf.get(k)).re;
        rhs += w * ip.norm_sqr(rf.get(k));
    }
    lhs *= tau;
    rhs *= tau * cert.alpha;
    Ok(HerglotzReport {
        lhs,
        rhs,
        alpha: cert.alpha,
        sigma: cert.sigma,
        sigma_tilde: st,
        margin: lhs - rhs,
        small_step: is_small_step(tau, cert.sigma),
    })
}

/// Time-domain and frequency-domain values of `τ Σ ρ^{2n} Re(f_n, (L(∂)f)_n)`.
#[derive(Debug, Clone, Copy)]
pub struct ParsevalCheck {
    pub time_domain: f64,
    pub frequency_domain: f64,
}

impl ParsevalCheck {
    pub fn relative_difference(&self) -> f64 {
        (self.time_domain - self.frequency_domain).abs() / self.time_domain.abs().max(self.frequency_domain.abs())
    }
}

/// Compares the weighted time-domain sum with
/// `(τ/2π) ∫ Re(f̂(θ), L(Δ(ρe^{iθ})/τ) f̂(θ)) dθ`, `ρ = e^{−σ̃τ}`,
/// `f̂(θ) = Σ ρⁿ e^{inθ} f_n`, by the trapezoidal rule on `ntheta` points.
pub fn parseval_check(
    l: &TransferFunction,
    t: &ButcherTableau,
    sigma_tilde: f64,
    f: &StageSequence,
    ntheta: usize,
    opts: &WeightOptions,
) -> Result<ParsevalCheck> {
    let tau = f.tau();
    let n = f.len();
    let ip = t.inner_product();
    let rho = (-sigma_tilde * tau).exp();
    let lf = block_convolve(&compute_weights(l, t, tau, n, opts)?, f)?;
    let mut time_domain = 0.0;
    for k in 0..n {
        time_domain += rho.powi(2 * k as i32) * ip.dot_unchecked(f.get(k), lf.get(k)).re;
    }
    time_domain *= tau;

    let sym = DifferentiationSymbol::new(t);
    let m = t.stages();
    let vals = map_indices(ntheta, |k| -> Result<f64> {
        let theta = TAU * k as f64 / ntheta as f64;
        let mut fhat = alloc::vec![C64::zero(); m];
        for j in 0..n {
            let phase = C64::from_polar(rho.powi(j as i32), theta * j as f64);
            for (acc, x) in fhat.iter_mut().zip(f.get(j)) {
                *acc += phase * x;
            }
        }
        let s = sym.delta(C64::from_polar(rho, theta))?.scale(C64::new(1.0 / tau, 0.0));
        let (lh, _, _) = transfer_of_matrix(l, &s, opts.max_cond)?;
        Ok(ip.dot_unchecked(&fhat, &lh.mul_vec(&fhat)).re)
    });
    let mut sum = 0.0;
    for v in vals {
        sum += v?;
    }
    Ok(ParsevalCheck { time_domain, frequency_domain: tau * sum / ntheta as f64 })
}

/// Causal sequence of complex Gaussian stage vectors whose first
/// `leading_zeros` entries vanish.
pub fn random_causal_sequence<R: Rng + ?Sized>(
    rng: &mut R,
    len: usize,
    m: usize,
    tau: f64,
    leading_zeros: usize,
) -> StageSequence {
    StageSequence::from_fn(len, m, tau, |n, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        if n < leading_zeros {
            C64::zero()
        } else {
            C64::new(re, im)
        }
    })
}
