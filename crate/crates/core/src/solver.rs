//! Marching-on-in-time for the scalar nonlinear boundary equation
//! `L(∂_t)ψ + g(ψ + u̇) = 0` and its once and twice time-differentiated forms.
//!
//! Step `n` solves the `m` stage equations
//! `W₀x + Σ_{j<n} W_{n−j}x_j + N(x) = 0` by Newton's method, where `x` is the
//! stage vector of the unknown (`ψ`, `ψ̇` or `ψ̈`) and `N` collects the
//! nonlinear terms. Lower derivatives are rebuilt by convolution quadrature
//! of `s⁻¹`, `s⁻²` from already computed values.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::convolution::StageSequence;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::par::map_indices;
use crate::tableau::{ButcherTableau, Method};
use crate::transfer::{Impedance, IncidentWave, TransferFunction};
use crate::weights::{compute_weights, integrator_weights, WeightOptions, WeightTable};

/// Which equation is discretised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Variant {
    /// Unknown `ψ`.
    #[default]
    Plain,
    /// Unknown `ψ̇`, with `ψ = ∂⁻¹ψ̇`.
    Differentiated1,
    /// Unknown `ψ̈`, with `ψ̇ = ∂⁻¹ψ̈`, `ψ = ∂⁻²ψ̈`.
    Differentiated2,
}

impl Variant {
    pub fn order(self) -> u32 {
        match self {
            Variant::Plain => 0,
            Variant::Differentiated1 => 1,
            Variant::Differentiated2 => 2,
        }
    }

    pub fn from_order(order: u32) -> Result<Self> {
        match order {
            0 => Ok(Variant::Plain),
            1 => Ok(Variant::Differentiated1),
            2 => Ok(Variant::Differentiated2),
            _ => Err(Error::InvalidParameter(format!("differentiation order must be 0, 1 or 2, got {order}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Plain => "plain",
            Variant::Differentiated1 => "differentiated-1",
            Variant::Differentiated2 => "differentiated-2",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(Variant::Plain),
            "differentiated-1" | "diff1" => Ok(Variant::Differentiated1),
            "differentiated-2" | "diff2" => Ok(Variant::Differentiated2),
            _ => Err(Error::InvalidParameter(format!(
                "unknown variant `{s}` (expected plain, differentiated-1 or differentiated-2)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProblemSetup {
    pub transfer: TransferFunction,
    pub impedance: Impedance,
    pub wave: IncidentWave,
    pub final_time: f64,
    pub variant: Variant,
    /// Solve for `e^{−σt}ψ` with `L(s+σ)` and unscale on output.
    pub shift: Option<f64>,
    /// Differentiated variants: feed `∂_t^τ u̇` (and `(∂_t^τ)² u̇`) instead of
    /// samples of `ü`, `u⃛`. The differentiated system is then the discrete
    /// derivative of the plain one, which makes the variants comparable to
    /// round-off for linear `g`.
    pub discrete_derivatives: bool,
}

impl ProblemSetup {
    /// Plain variant on `[0, 6]` with the default incident wave.
    pub fn new(transfer: TransferFunction, impedance: Impedance) -> Self {
        Self {
            transfer,
            impedance,
            wave: IncidentWave::default(),
            final_time: 6.0,
            variant: Variant::Plain,
            shift: None,
            discrete_derivatives: false,
        }
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_shift(mut self, sigma: f64) -> Self {
        self.shift = Some(sigma);
        self
    }

    pub fn with_discrete_derivatives(mut self, on: bool) -> Self {
        self.discrete_derivatives = on;
        self
    }

    pub fn with_wave(mut self, wave: IncidentWave) -> Self {
        self.wave = wave;
        self
    }

    pub fn with_final_time(mut self, t: f64) -> Self {
        self.final_time = t;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.final_time > 0.0) {
            return Err(Error::InvalidParameter(format!("final time must be positive, got {}", self.final_time)));
        }
        if self.variant == Variant::Differentiated2 {
            self.impedance.require_continuous_second_derivative()?;
        }
        if let Some(s) = self.shift {
            if !(s > 0.0) {
                return Err(Error::InvalidParameter(format!("shift must be positive, got {s}")));
            }
            if self.variant != Variant::Plain {
                return Err(Error::Unsupported(String::from("the shift is implemented for the plain variant only")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Absolute tolerance on the max-norm residual, scaled by
    /// `max(1, size of the largest term)`.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Backtracking halvings for impedances that need damping.
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tolerance: 1e-12, max_iterations: 50, max_halvings: 8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolverOptions {
    pub newton: NewtonOptions,
    pub weights: WeightOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepStats {
    pub iterations: usize,
    pub residual: f64,
    /// Max-norm of each Newton increment.
    pub increments: Vec<f64>,
    pub halvings: usize,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub method: Method,
    pub tau: f64,
    pub steps: usize,
    pub variant: Variant,
    pub shift: Option<f64>,
    c: Vec<f64>,
    /// Stage values of the marched unknown (`ψ`, `ψ̇` or `ψ̈`, unscaled).
    pub unknown: StageSequence,
    /// Stage values of `ψ`.
    pub psi: StageSequence,
    pub newton: Vec<StepStats>,
}

impl Solution {
    pub fn stages(&self) -> usize {
        self.c.len()
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    /// `(t_n + c_i τ, ψ_{n,i})` in time order.
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        let m = self.stages();
        let mut out = Vec::with_capacity(self.steps * m);
        for n in 0..self.steps {
            for i in 0..m {
                out.push(((n as f64 + self.c[i]) * self.tau, self.psi.get(n)[i].re));
            }
        }
        out
    }

    pub fn max_newton_iterations(&self) -> usize {
        self.newton.iter().map(|s| s.iterations).max().unwrap_or(0)
    }

    pub fn max_newton_residual(&self) -> f64 {
        self.newton.iter().map(|s| s.residual).fold(0.0, f64::max)
    }

    fn ends_on_grid(&self) -> bool {
        self.c.last().is_some_and(|&c| (c - 1.0).abs() < 1e-15)
    }

    /// `ψ((n+1)τ)` read from the last stage; needs `c_m = 1`.
    pub fn step_end_values(&self) -> Result<Vec<f64>> {
        if !self.ends_on_grid() {
            return Err(Error::Unsupported(format!("{} has c_m != 1: no stage on the step grid", self.method)));
        }
        let m = self.stages();
        Ok((0..self.steps).map(|n| self.psi.get(n)[m - 1].re).collect())
    }
}

/// Number of steps with `Nτ = T`; rejects non-integer ratios.
pub fn steps_for(final_time: f64, tau: f64) -> Result<usize> {
    if !(tau > 0.0) || tau > final_time {
        return Err(Error::InvalidParameter(format!("need 0 < tau <= T, got tau = {tau}, T = {final_time}")));
    }
    let n = (final_time / tau).round();
    if (n * tau - final_time).abs() > 1e-9 * final_time {
        return Err(Error::InvalidParameter(format!("T = {final_time} is not an integer multiple of tau = {tau}")));
    }
    Ok(n as usize)
}

/// Real parts of a weight table, rejecting imaginary parts above round-off.
fn real_blocks(w: &WeightTable) -> Result<Vec<Vec<f64>>> {
    let scale = w.weights().iter().map(CMatrix::max_abs).fold(1.0, f64::max);
    if w.max_imag() > 1e-8 * scale {
        return Err(Error::Unsupported(format!(
            "weights of {} are not real (imaginary part {:e}); the transfer is not real-symmetric",
            w.transfer_id(),
            w.max_imag()
        )));
    }
    Ok(w.real_blocks())
}

/// `Σ_{j<n} W_{n−j} x_j` into `out`.
fn history(w: &[Vec<f64>], x: &[f64], n: usize, m: usize, out: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    for j in 0..n {
        let wk = &w[n - j];
        let xj = &x[j * m..(j + 1) * m];
        for i in 0..m {
            let row = &wk[i * m..(i + 1) * m];
            out[i] += row.iter().zip(xj).map(|(a, b)| a * b).sum::<f64>();
        }
    }
}

fn mat_vec(a: &[f64], x: &[f64], m: usize, out: &mut [f64]) {
    for i in 0..m {
        out[i] = (0..m).map(|j| a[i * m + j] * x[j]).sum();
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Per-step data: stage times and wave derivatives `u^{(k)}` for `k = 1..=3`.
struct StepData {
    t: Vec<f64>,
    du: [Vec<f64>; 3],
}

/// Assembled nonlinear stage system of one step.
struct StageSystem<'a> {
    m: usize,
    order: u32,
    g: &'a Impedance,
    sigma: f64,
    w0: &'a [f64],
    p1: &'a [f64],
    p2: &'a [f64],
    hist_l: &'a [f64],
    hist_1: &'a [f64],
    hist_2: &'a [f64],
    data: &'a StepData,
}

impl StageSystem<'_> {
    /// Residual and the size of its largest term.
    fn residual(&self, x: &[f64], f: &mut [f64]) -> f64 {
        let m = self.m;
        let mut wx = vec![0.0; m];
        mat_vec(self.w0, x, m, &mut wx);
        let mut q1 = vec![0.0; m];
        let mut q2 = vec![0.0; m];
        if self.order >= 1 {
            mat_vec(self.p1, x, m, &mut q1);
        }
        if self.order >= 2 {
            mat_vec(self.p2, x, m, &mut q2);
        }
        let mut scale = 1.0f64;
        for i in 0..m {
            let d = &self.data;
            let nl = match self.order {
                0 => {
                    let e = (self.sigma * d.t[i]).exp();
                    self.g.g(e * x[i] + d.du[0][i]) / e
                }
                1 => {
                    let psi = q1[i] + self.hist_1[i];
                    self.g.dg(psi + d.du[0][i]) * (x[i] + d.du[1][i])
                }
                _ => {
                    let dpsi = q1[i] + self.hist_1[i];
                    let psi = q2[i] + self.hist_2[i];
                    let xx = psi + d.du[0][i];
                    let y = dpsi + d.du[1][i];
                    self.g.d2g(xx) * y * y + self.g.dg(xx) * (x[i] + d.du[2][i])
                }
            };
            f[i] = wx[i] + self.hist_l[i] + nl;
            scale = scale.max(wx[i].abs()).max(self.hist_l[i].abs()).max(nl.abs());
        }
        scale
    }

    fn jacobian(&self, x: &[f64]) -> CMatrix {
        let m = self.m;
        let d = &self.data;
        let mut q1 = vec![0.0; m];
        let mut q2 = vec![0.0; m];
        if self.order >= 1 {
            mat_vec(self.p1, x, m, &mut q1);
        }
        if self.order >= 2 {
            mat_vec(self.p2, x, m, &mut q2);
        }
        CMatrix::from_fn(m, |i, j| {
            let mut v = self.w0[i * m + j];
            match self.order {
                0 => {
                    let e = (self.sigma * d.t[i]).exp();
                    if i == j {
                        v += self.g.dg(e * x[i] + d.du[0][i]);
                    }
                }
                1 => {
                    let xx = q1[i] + self.hist_1[i] + d.du[0][i];
                    if i == j {
                        v += self.g.dg(xx);
                    }
                    v += self.g.d2g(xx) * (x[i] + d.du[1][i]) * self.p1[i * m + j];
                }
                _ => {
                    let xx = q2[i] + self.hist_2[i] + d.du[0][i];
                    let y = q1[i] + self.hist_1[i] + d.du[1][i];
                    if i == j {
                        v += self.g.dg(xx);
                    }
                    v += (self.g.d3g(xx) * y * y + self.g.d2g(xx) * (x[i] + d.du[2][i])) * self.p2[i * m + j];
                    v += 2.0 * self.g.d2g(xx) * y * self.p1[i * m + j];
                }
            }
            C64::new(v, 0.0)
        })
    }
}

fn newton(sys: &StageSystem<'_>, x: &mut [f64], step: usize, opts: &NewtonOptions, damped: bool) -> Result<StepStats> {
    let m = sys.m;
    let mut f = vec![0.0; m];
    let mut trial = vec![0.0; m];
    let mut f_trial = vec![0.0; m];
    let mut stats = StepStats { iterations: 0, residual: 0.0, increments: Vec::new(), halvings: 0 };
    let mut scale = sys.residual(x, &mut f);
    let mut res = max_abs(&f);
    while res > opts.tolerance * scale {
        if stats.iterations == opts.max_iterations {
            return Err(Error::NewtonFailed { step, iterations: stats.iterations, residual: res });
        }
        let j = sys.jacobian(x);
        let rhs: Vec<C64> = f.iter().map(|&v| C64::new(v, 0.0)).collect();
        let dx = j.solve(&rhs).map_err(|_| Error::SingularJacobian { step })?;
        let mut lambda = 1.0;
        let mut halvings = 0;
        loop {
            for i in 0..m {
                trial[i] = x[i] - lambda * dx[i].re;
            }
            let s = sys.residual(&trial, &mut f_trial);
            let r = max_abs(&f_trial);
            if !damped || r < res || halvings == opts.max_halvings {
                scale = s;
                res = r;
                break;
            }
            lambda *= 0.5;
            halvings += 1;
        }
        stats.halvings += halvings;
        stats.increments.push(lambda * max_abs(&dx.iter().map(|z| z.re).collect::<Vec<_>>()));
        x.copy_from_slice(&trial);
        f.copy_from_slice(&f_trial);
        stats.iterations += 1;
        if !res.is_finite() {
            return Err(Error::NewtonFailed { step, iterations: stats.iterations, residual: res });
        }
    }
    stats.residual = res;
    Ok(stats)
}

/// Stage samples of `u̇`, `ü`, `u⃛` (flat, step-major). With
/// `discrete_derivatives` the higher ones are `∂_t^τ` applied to the sampled
/// `u̇` instead of samples of the exact derivatives.
fn wave_stage_data(
    setup: &ProblemSetup,
    t: &ButcherTableau,
    tau: f64,
    n_steps: usize,
    opts: &SolverOptions,
) -> Result<[Vec<f64>; 3]> {
    let m = t.stages();
    let order = setup.variant.order() as usize;
    let mut out = [vec![0.0; n_steps * m], vec![0.0; n_steps * m], vec![0.0; n_steps * m]];
    let sampled = |k: u32| -> Result<Vec<f64>> {
        let mut v = Vec::with_capacity(n_steps * m);
        for n in 0..n_steps {
            for &ci in t.c() {
                v.push(setup.wave.derivative(k, (n as f64 + ci) * tau)?);
            }
        }
        Ok(v)
    };
    out[0] = sampled(1)?;
    if order == 0 {
        return Ok(out);
    }
    if setup.discrete_derivatives {
        let d = real_blocks(&compute_weights(&TransferFunction::derivative(), t, tau, n_steps, &opts.weights)?)?;
        for k in 1..=order {
            let (lo, hi) = out.split_at_mut(k);
            let src = &lo[k - 1];
            let mut acc = vec![0.0; m];
            let mut cur = vec![0.0; m];
            for n in 0..n_steps {
                history(&d, src, n, m, &mut acc);
                mat_vec(&d[0], &src[n * m..(n + 1) * m], m, &mut cur);
                for i in 0..m {
                    hi[0][n * m + i] = acc[i] + cur[i];
                }
            }
        }
    } else {
        for (k, slot) in out.iter_mut().enumerate().take(order + 1).skip(1) {
            *slot = sampled(k as u32 + 1)?;
        }
    }
    Ok(out)
}

/// Marches the variant selected in `setup`.
pub fn march(setup: &ProblemSetup, t: &ButcherTableau, tau: f64, opts: &SolverOptions) -> Result<Solution> {
    setup.validate()?;
    let n_steps = steps_for(setup.final_time, tau)?;
    let m = t.stages();
    let order = setup.variant.order();
    let sigma = setup.shift.unwrap_or(0.0);
    let l = if sigma > 0.0 { setup.transfer.shifted(sigma) } else { setup.transfer.clone() };
    let wl = real_blocks(&compute_weights(&l, t, tau, n_steps, &opts.weights)?)?;
    let p1 = if order >= 1 { real_blocks(&integrator_weights(t, tau, 1, n_steps)?)? } else { Vec::new() };
    let p2 = if order >= 2 { real_blocks(&integrator_weights(t, tau, 2, n_steps)?)? } else { Vec::new() };
    let empty = vec![0.0; m * m];

    let c = t.c().to_vec();
    let mut x_all = vec![0.0; n_steps * m];
    let mut stats = Vec::with_capacity(n_steps);
    let (mut hl, mut h1, mut h2) = (vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    let mut x = vec![0.0; m];
    let damped = setup.impedance.needs_damping();
    let wave_data = wave_stage_data(setup, t, tau, n_steps, opts)?;
    for n in 0..n_steps {
        let times: Vec<f64> = c.iter().map(|ci| (n as f64 + ci) * tau).collect();
        let du = [0, 1, 2].map(|k| wave_data[k][n * m..(n + 1) * m].to_vec());
        let data = StepData { t: times, du };
        history(&wl, &x_all, n, m, &mut hl);
        if order >= 1 {
            history(&p1, &x_all, n, m, &mut h1);
        }
        if order >= 2 {
            history(&p2, &x_all, n, m, &mut h2);
        }
        let sys = StageSystem {
            m,
            order,
            g: &setup.impedance,
            sigma,
            w0: &wl[0],
            p1: p1.first().unwrap_or(&empty),
            p2: p2.first().unwrap_or(&empty),
            hist_l: &hl,
            hist_1: &h1,
            hist_2: &h2,
            data: &data,
        };
        stats.push(newton(&sys, &mut x, n, &opts.newton, damped)?);
        x_all[n * m..(n + 1) * m].copy_from_slice(&x);
    }

    // Rebuild ψ from the marched unknown.
    let psi_flat = match order {
        0 => x_all.clone(),
        k => {
            let p = if k == 1 { &p1 } else { &p2 };
            let mut out = vec![0.0; n_steps * m];
            let mut acc = vec![0.0; m];
            for n in 0..n_steps {
                history(p, &x_all, n, m, &mut acc);
                let mut cur = vec![0.0; m];
                mat_vec(&p[0], &x_all[n * m..(n + 1) * m], m, &mut cur);
                for i in 0..m {
                    out[n * m + i] = acc[i] + cur[i];
                }
            }
            out
        }
    };
    let unscale = |flat: &[f64]| -> StageSequence {
        StageSequence::from_fn(n_steps, m, tau, |n, i| {
            let e = (sigma * (n as f64 + c[i]) * tau).exp();
            C64::new(e * flat[n * m + i], 0.0)
        })
    };
    Ok(Solution {
        method: t.method(),
        tau,
        steps: n_steps,
        variant: setup.variant,
        shift: setup.shift,
        unknown: unscale(&x_all),
        psi: unscale(&psi_flat),
        c,
        newton: stats,
    })
}

/// `march` with the variant given by `order`.
pub fn march_differentiated(
    setup: &ProblemSetup,
    t: &ButcherTableau,
    tau: f64,
    order: u32,
    opts: &SolverOptions,
) -> Result<Solution> {
    let s = setup.clone().with_variant(Variant::from_order(order)?);
    march(&s, t, tau, opts)
}

/// Plain-variant solution on a fine grid with a stiffly accurate tableau,
/// compared against other runs at the common step-end nodes.
pub fn reference_solution(
    setup: &ProblemSetup,
    t_ref: &ButcherTableau,
    tau_ref: f64,
    opts: &SolverOptions,
) -> Result<Solution> {
    if !t_ref.is_stiffly_accurate() {
        return Err(Error::Unsupported(format!("reference tableau {} has no stage at the step end", t_ref.name())));
    }
    let plain = ProblemSetup { variant: Variant::Plain, shift: None, ..setup.clone() };
    march(&plain, t_ref, tau_ref, opts)
}

/// `sqrt(τ Σ_n Σ_i |e_{n,i}|²)`.
pub fn l2tau_norm(e: &StageSequence) -> f64 {
    (e.tau() * e.as_flat().iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
}

fn integer_ratio(coarse: f64, fine: f64) -> Option<usize> {
    let r = coarse / fine;
    let k = r.round();
    (k >= 1.0 && (r - k).abs() <= 1e-9 * k).then_some(k as usize)
}

/// `ℓ₂^τ` distance of two runs. Equal step sizes and stage counts compare all
/// stages; otherwise the coarser step must be an integer multiple of the finer
/// one and the step-end values `ψ((n+1)τ)` are compared with the coarse `τ`.
pub fn l2tau_error(a: &Solution, b: &Solution) -> Result<f64> {
    if integer_ratio(a.tau, b.tau) == Some(1) && a.stages() == b.stages() && a.steps == b.steps {
        return Ok(l2tau_norm(&a.psi.sub(&b.psi)?));
    }
    let (coarse, fine) = if a.tau >= b.tau { (a, b) } else { (b, a) };
    let r = integer_ratio(coarse.tau, fine.tau).ok_or_else(|| {
        Error::Mismatch(format!("step sizes {} and {} are not in an integer ratio", coarse.tau, fine.tau))
    })?;
    if fine.steps != coarse.steps * r {
        return Err(Error::Mismatch(format!(
            "runs cover different intervals ({} vs {} steps)",
            coarse.steps, fine.steps
        )));
    }
    let ce = coarse.step_end_values()?;
    let fe = fine.step_end_values()?;
    let sum: f64 = ce.iter().enumerate().map(|(n, v)| (v - fe[(n + 1) * r - 1]).powi(2)).sum();
    Ok((coarse.tau * sum).sqrt())
}

/// Least-squares slope of `log e` against `log τ` and the RMS residual.
pub fn fit_slope(taus: &[f64], errors: &[f64]) -> Result<(f64, f64)> {
    if taus.len() != errors.len() || taus.len() < 2 {
        return Err(Error::InvalidParameter(String::from("slope fit needs at least two (tau, error) pairs")));
    }
    if errors.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidParameter(String::from("slope fit needs positive errors")));
    }
    let xs: Vec<f64> = taus.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let rms = (xs.iter().zip(&ys).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum::<f64>() / n).sqrt();
    Ok((slope, rms))
}

/// `τ_k = T / 2^k` for `k = kmin..=kmax`, coarsest first.
pub fn tau_ladder(final_time: f64, kmin: u32, kmax: u32) -> Vec<f64> {
    (kmin..=kmax).map(|k| final_time / (1u64 << k) as f64).collect()
}

#[derive(Debug, Clone)]
pub struct ErrorReport {
    pub method: Method,
    pub variant: Variant,
    pub taus: Vec<f64>,
    pub steps: Vec<usize>,
    pub errors: Vec<f64>,
    pub newton_max_iters: Vec<usize>,
    /// Coarsest points left out of the fit.
    pub dropped: usize,
    pub slope: f64,
    pub fit_residual: f64,
}

/// Runs the ladder (in parallel with the `parallel` feature) and fits the
/// convergence slope against `reference`, dropping the `drop_coarsest`
/// largest step sizes from the fit.
pub fn convergence_study(
    setup: &ProblemSetup,
    t: &ButcherTableau,
    taus: &[f64],
    reference: &Solution,
    drop_coarsest: usize,
    opts: &SolverOptions,
) -> Result<ErrorReport> {
    if taus.len() < drop_coarsest + 2 {
        return Err(Error::InvalidParameter(format!(
            "ladder of {} step sizes is too short to drop {drop_coarsest} and fit",
            taus.len()
        )));
    }
    let finest = taus.iter().copied().fold(f64::INFINITY, f64::min);
    if reference.tau > finest / 8.0 * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "reference step {} must be at most 1/8 of the finest ladder step {finest}",
            reference.tau
        )));
    }
    let runs = map_indices(taus.len(), |k| -> Result<(usize, f64, usize)> {
        let sol = march(setup, t, taus[k], opts)?;
        Ok((sol.steps, l2tau_error(&sol, reference)?, sol.max_newton_iterations()))
    });
    let mut steps = Vec::new();
    let mut errors = Vec::new();
    let mut iters = Vec::new();
    for r in runs {
        let (n, e, it) = r?;
        steps.push(n);
        errors.push(e);
        iters.push(it);
    }
    let mut order: Vec<usize> = (0..taus.len()).collect();
    order.sort_by(|&a, &b| taus[b].total_cmp(&taus[a]));
    let kept: Vec<usize> = order[drop_coarsest..].to_vec();
    let (slope, fit_residual) = fit_slope(
        &kept.iter().map(|&k| taus[k]).collect::<Vec<_>>(),
        &kept.iter().map(|&k| errors[k]).collect::<Vec<_>>(),
    )?;
    Ok(ErrorReport {
        method: t.method(),
        variant: setup.variant,
        taus: taus.to_vec(),
        steps,
        errors,
        newton_max_iters: iters,
        dropped: drop_coarsest,
        slope,
        fit_residual,
    })
}
