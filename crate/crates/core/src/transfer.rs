//! Laplace-domain transfer functions, impedance nonlinearities and the
//! incident wave of the sphere scattering experiments.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use core::fmt;
use core::str::FromStr;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use num_traits::Zero;

use crate::error::{DomainError, Error, Result};
use crate::linalg::C64;

type EvalFn = dyn Fn(C64) -> core::result::Result<C64, DomainError> + Send + Sync;

/// Coercivity certificate `Re L(s) ≥ α |R(s)|²` for `Re s ≥ σ`.
#[derive(Clone, Debug)]
pub struct Coercivity {
    pub alpha: f64,
    pub r: Arc<TransferFunction>,
    pub sigma: f64,
}

/// Growth metadata `|L(s)| ≤ M(σ)|s|^μ / (Re s)^ν`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Growth {
    pub mu: f64,
    pub nu: f64,
}

/// Scalar analytic family `s ↦ L(s)` on `Re s > abscissa`.
///
/// Every shipped function satisfies `L(conj s) = conj L(s)`, so its
/// quadrature weights are real.
#[derive(Clone)]
pub struct TransferFunction {
    name: String,
    eval: Arc<EvalFn>,
    abscissa: f64,
    growth: Growth,
    certificate: Option<Coercivity>,
}

impl fmt::Debug for TransferFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransferFunction")
            .field("name", &self.name)
            .field("abscissa", &self.abscissa)
            .field("growth", &self.growth)
            .field("certificate", &self.certificate.as_ref().map(|c| (c.alpha, c.r.name(), c.sigma)))
            .finish()
    }
}

impl TransferFunction {
    /// Wraps an evaluator. `abscissa` is where the domain check starts;
    /// pass `f64::NEG_INFINITY` for entire functions.
    pub fn new(
        name: impl Into<String>,
        abscissa: f64,
        growth: Growth,
        eval: impl Fn(C64) -> core::result::Result<C64, DomainError> + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), eval: Arc::new(eval), abscissa, growth, certificate: None }
    }

    pub fn with_certificate(mut self, alpha: f64, r: TransferFunction, sigma: f64) -> Self {
        self.certificate = Some(Coercivity { alpha, r: Arc::new(r), sigma });
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn abscissa(&self) -> f64 {
        self.abscissa
    }

    pub fn growth(&self) -> Growth {
        self.growth
    }

    pub fn certificate(&self) -> Option<&Coercivity> {
        self.certificate.as_ref()
    }

    pub fn eval(&self, s: C64) -> core::result::Result<C64, DomainError> {
        (self.eval)(s)
    }

    fn domain_error(name: &str, s: C64, abscissa: f64) -> DomainError {
        DomainError { name: name.to_string(), s, abscissa }
    }

    /// `L(s) = value`.
    pub fn constant(value: f64) -> Self {
        Self::new(format!("{value}"), f64::NEG_INFINITY, Growth { mu: 0.0, nu: 0.0 }, move |_| Ok(C64::new(value, 0.0)))
    }

    /// `L(s) = 1`.
    pub fn identity() -> Self {
        Self::constant(1.0).renamed("identity")
    }

    /// `L(s) = s`.
    pub fn derivative() -> Self {
        Self::new("s", f64::NEG_INFINITY, Growth { mu: 1.0, nu: 0.0 }, Ok).with_certificate(0.0, Self::identity(), 0.0)
    }

    /// `L(s) = s^{-k}`, analytic on `Re s > 0`.
    pub fn integrator(k: u32) -> Self {
        let name = if k == 1 { "s^-1".to_string() } else { format!("s^-{k}") };
        let n2 = name.clone();
        Self::new(name, 0.0, Growth { mu: -(k as f64), nu: 0.0 }, move |s: C64| {
            if s.re <= 0.0 {
                return Err(Self::domain_error(&n2, s, 0.0));
            }
            Ok(s.powi(-(k as i32)))
        })
    }

    /// `L(s) = (s − λ)^{-1}`.
    pub fn resolvent(lambda: C64) -> Self {
        let name = format!("(s-({lambda}))^-1");
        let n2 = name.clone();
        Self::new(name, lambda.re, Growth { mu: -1.0, nu: 0.0 }, move |s: C64| {
            let d = s - lambda;
            if d.is_zero() {
                return Err(Self::domain_error(&n2, s, lambda.re));
            }
            Ok(d.inv())
        })
    }

    /// Exterior unit-sphere operator `L(s) = 1 + 1/s` (constant mode), with
    /// certificate `Re L(s) ≥ 1`, i.e. `α = 1`, `R = I`, `σ = 0`.
    pub fn exterior_sphere() -> Self {
        Self::new("exterior-sphere", 0.0, Growth { mu: 0.0, nu: 0.0 }, |s: C64| {
            if s.re <= 0.0 {
                return Err(Self::domain_error("exterior-sphere", s, 0.0));
            }
            Ok(C64::new(1.0, 0.0) + s.inv())
        })
        .with_certificate(1.0, Self::identity(), 0.0)
    }

    /// Interior unit-sphere operator `L⁻(s) = −1/s + coth(s)` (constant mode).
    ///
    /// Poles sit on the imaginary axis; the removable singularity at 0 is
    /// handled by the Laurent series below `|s| = 0.2`.
    pub fn interior_sphere() -> Self {
        Self::new("interior-sphere", 0.0, Growth { mu: 0.0, nu: 0.0 }, |s: C64| {
            if s.re <= 0.0 {
                return Err(Self::domain_error("interior-sphere", s, 0.0));
            }
            Ok(interior_sphere_value(s))
        })
    }

    /// `L̃(s) = L(s + σ)`. The certificate abscissa moves to `σ_L − σ`.
    pub fn shifted(&self, sigma: f64) -> Self {
        let inner = self.eval.clone();
        let name = format!("{}[s+{sigma}]", self.name);
        let mut out = Self::new(name, self.abscissa - sigma, self.growth, move |s: C64| inner(s + sigma));
        if let Some(c) = &self.certificate {
            out.certificate =
                Some(Coercivity { alpha: c.alpha, r: Arc::new(c.r.shifted(sigma)), sigma: c.sigma - sigma });
        }
        out
    }

    /// Pointwise product `(L₂L₁)(s)`.
    pub fn product(&self, other: &TransferFunction) -> Self {
        let (f, g) = (self.eval.clone(), other.eval.clone());
        Self::new(
            format!("({})*({})", self.name, other.name),
            self.abscissa.max(other.abscissa),
            Growth { mu: self.growth.mu + other.growth.mu, nu: self.growth.nu + other.growth.nu },
            move |s| Ok(f(s)? * g(s)?),
        )
    }

    /// `L(s) + value`.
    pub fn plus_constant(&self, value: f64) -> Self {
        let f = self.eval.clone();
        Self::new(format!("{}+{value}", self.name), self.abscissa, self.growth, move |s| {
            Ok(f(s)? + C64::new(value, 0.0))
        })
    }

    /// `1 / L(s)`; the caller is responsible for `L` having no zeros on the
    /// half-plane.
    pub fn reciprocal(&self) -> Self {
        let f = self.eval.clone();
        let name = format!("1/({})", self.name);
        let n2 = name.clone();
        let abscissa = self.abscissa;
        Self::new(name, abscissa, Growth { mu: -self.growth.mu, nu: 0.0 }, move |s| {
            let v = f(s)?;
            if v.is_zero() {
                return Err(Self::domain_error(&n2, s, abscissa));
            }
            Ok(v.inv())
        })
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// `max |L(s)| (Re s)^ν / |s|^μ` over a grid on `Re s ∈ [σ, σ + 50]`,
    /// `|Im s| ≤ 200`: a spot estimate of `M(σ)`.
    pub fn growth_constant_estimate(&self, sigma: f64) -> Result<f64> {
        let mut worst = 0.0f64;
        for i in 0..40 {
            let re = sigma + 50.0 * (i as f64 / 39.0).powi(2);
            for j in 0..=200 {
                let im = -200.0 + 2.0 * j as f64;
                let s = C64::new(re, im);
                let v = self.eval(s)?;
                worst = worst.max(v.norm() * re.powf(self.growth.nu) / s.norm().powf(self.growth.mu));
            }
        }
        Ok(worst)
    }
}

/// `−1/s + coth(s)` for `Re s > 0`.
pub fn interior_sphere_value(s: C64) -> C64 {
    if s.norm() < INTERIOR_SERIES_RADIUS {
        interior_sphere_series(s)
    } else {
        interior_sphere_exponential(s)
    }
}

pub const INTERIOR_SERIES_RADIUS: f64 = 0.2;

/// Laurent tail of `coth(s) − 1/s = Σ 2^{2k} B_{2k} s^{2k−1} / (2k)!`, seven terms.
pub fn interior_sphere_series(s: C64) -> C64 {
    const COEFFS: [f64; 7] =
        [1.0 / 3.0, -1.0 / 45.0, 2.0 / 945.0, -1.0 / 4725.0, 2.0 / 93555.0, -1382.0 / 638512875.0, 4.0 / 18243225.0];
    let s2 = s * s;
    let mut acc = C64::zero();
    for &c in COEFFS.iter().rev() {
        acc = acc * s2 + c;
    }
    acc * s
}

/// `−1/s + (1 + e^{−2s}) / (1 − e^{−2s})`.
pub fn interior_sphere_exponential(s: C64) -> C64 {
    let e = (-2.0 * s).exp();
    -s.inv() + (C64::new(1.0, 0.0) + e) / (C64::new(1.0, 0.0) - e)
}

/// Estimates `α(σ) = inf_{Re s ≥ σ} Re L(s)` for a scalar, bounded transfer
/// function by sampling the boundary line `Re s = σ` (the infimum of a
/// bounded harmonic function on a half-plane is approached there) and
/// refining around the grid minimum.
///
/// The value is a numerical estimate, not a bound; callers record it.
pub fn estimate_real_part_infimum(l: &TransferFunction, sigma: f64) -> Result<f64> {
    let re_at = |y: f64| -> Result<f64> { Ok(l.eval(C64::new(sigma, y))?.re) };
    let mut best = (f64::INFINITY, 0.0);
    let coarse = 200_000;
    let ymax = 400.0;
    for k in 0..=coarse {
        let y = ymax * k as f64 / coarse as f64;
        let v = re_at(y)?;
        if v < best.0 {
            best = (v, y);
        }
    }
    // golden-section refinement on the bracketing cell
    let h = ymax / coarse as f64;
    let (mut a, mut b) = ((best.1 - h).max(0.0), best.1 + h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let x1 = b - g * (b - a);
        let x2 = a + g * (b - a);
        if re_at(x1)? < re_at(x2)? {
            b = x2;
        } else {
            a = x1;
        }
    }
    let refined = re_at(0.5 * (a + b))?;
    Ok(best.0.min(refined))
}

/// Interior sphere operator with an estimated certificate
/// `Re L⁻(s) ≥ α(σ)`, `R = I`. A relative safety factor of `1e-3` is taken
/// off the sampled infimum.
pub fn interior_sphere_certified(sigma: f64) -> Result<(TransferFunction, f64)> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("interior-sphere certificate needs sigma > 0, got {sigma}")));
    }
    let l = TransferFunction::interior_sphere();
    let alpha = estimate_real_part_infimum(&l, sigma)? * (1.0 - 1e-3);
    Ok((l.with_certificate(alpha, TransferFunction::identity(), sigma), alpha))
}

/// Named scalar problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    ExteriorSphere,
    InteriorSphere,
}

impl Problem {
    pub fn transfer(self) -> TransferFunction {
        match self {
            Problem::ExteriorSphere => TransferFunction::exterior_sphere(),
            Problem::InteriorSphere => TransferFunction::interior_sphere(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Problem::ExteriorSphere => "exterior-sphere",
            Problem::InteriorSphere => "interior-sphere",
        }
    }
}

impl FromStr for Problem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exterior-sphere" | "exterior" => Ok(Problem::ExteriorSphere),
            "interior-sphere" | "interior" => Ok(Problem::InteriorSphere),
            _ => Err(Error::UnknownProblem(s.to_string())),
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Monotone impedance nonlinearities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Impedance {
    /// `g₁(ξ) = ξ/4 + ξ|ξ|`, once continuously differentiable.
    G1,
    /// `g₂(ξ) = ξ/4 + ξ³`, smooth.
    G2,
    /// `g(ξ) = κξ`; used for the linear oracles.
    Linear(f64),
}

impl Impedance {
    pub fn name(&self) -> String {
        match self {
            Impedance::G1 => "g1".to_string(),
            Impedance::G2 => "g2".to_string(),
            Impedance::Linear(k) => format!("linear({k})"),
        }
    }

    /// Strong monotonicity constant `β`.
    pub fn beta(&self) -> f64 {
        match self {
            Impedance::G1 | Impedance::G2 => 0.25,
            Impedance::Linear(k) => *k,
        }
    }

    #[inline]
    pub fn g(&self, x: f64) -> f64 {
        match self {
            Impedance::G1 => 0.25 * x + x * x.abs(),
            Impedance::G2 => 0.25 * x + x * x * x,
            Impedance::Linear(k) => k * x,
        }
    }

    #[inline]
    pub fn dg(&self, x: f64) -> f64 {
        match self {
            Impedance::G1 => 0.25 + 2.0 * x.abs(),
            Impedance::G2 => 0.25 + 3.0 * x * x,
            Impedance::Linear(k) => *k,
        }
    }

    /// Second derivative; for `g₁` this is `2 sign(ξ)` (undefined at 0,
    /// reported as 0 there).
    #[inline]
    pub fn d2g(&self, x: f64) -> f64 {
        match self {
            Impedance::G1 => {
                if x > 0.0 {
                    2.0
                } else if x < 0.0 {
                    -2.0
                } else {
                    0.0
                }
            }
            Impedance::G2 => 6.0 * x,
            Impedance::Linear(_) => 0.0,
        }
    }

    #[inline]
    pub fn d3g(&self, _x: f64) -> f64 {
        match self {
            Impedance::G1 => 0.0,
            Impedance::G2 => 6.0,
            Impedance::Linear(_) => 0.0,
        }
    }

    /// Continuous second derivative available.
    pub fn has_continuous_second_derivative(&self) -> bool {
        !matches!(self, Impedance::G1)
    }

    /// Refuses when `g″` is discontinuous (only `g₁`).
    pub fn require_continuous_second_derivative(&self) -> Result<()> {
        if self.has_continuous_second_derivative() {
            Ok(())
        } else {
            Err(Error::Unsupported(format!("{} is only C^1: its second derivative jumps at 0", self.name())))
        }
    }

    /// Whether Newton should use backtracking; `g₁″` jumps at 0 so plain
    /// Newton may overshoot.
    pub fn needs_damping(&self) -> bool {
        matches!(self, Impedance::G1)
    }
}

impl FromStr for Impedance {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "g1" => Ok(Impedance::G1),
            "g2" => Ok(Impedance::G2),
            _ => Err(Error::UnknownImpedance(s.to_string())),
        }
    }
}

/// Free-function constructor matching the CLI names.
pub fn impedance(name: &str) -> Result<Impedance> {
    name.parse()
}

/// Incident wave trace `u(t) = A e^{−a(t−t₀)²}`, optionally multiplied by a
/// C³ cutoff that vanishes for `t ≤ 0` and equals one for `t ≥ width`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncidentWave {
    pub amplitude: f64,
    pub rate: f64,
    pub center: f64,
    pub cutoff_width: Option<f64>,
    /// Zero for `t > truncate_after` (used for causality checks).
    pub truncate_after: Option<f64>,
}

impl Default for IncidentWave {
    fn default() -> Self {
        incident_wave()
    }
}

/// `u^inc(t) = 2 e^{−10(t − 5/2)²}`.
pub fn incident_wave() -> IncidentWave {
    IncidentWave { amplitude: 2.0, rate: 10.0, center: 2.5, cutoff_width: None, truncate_after: None }
}

/// `k`-th derivative of the default incident wave at `t`.
pub fn wave_derivative(k: u32, t: f64) -> Result<f64> {
    incident_wave().derivative(k, t)
}

impl IncidentWave {
    pub fn zero() -> Self {
        IncidentWave { amplitude: 0.0, ..incident_wave() }
    }

    pub fn causalized(mut self, width: f64) -> Self {
        self.cutoff_width = Some(width);
        self
    }

    pub fn truncated(mut self, after: f64) -> Self {
        self.truncate_after = Some(after);
        self
    }

    pub fn value(&self, t: f64) -> f64 {
        self.derivative(0, t).expect("order 0 is always available")
    }

    /// Derivatives of order `k ≤ 3`.
    pub fn derivative(&self, k: u32, t: f64) -> Result<f64> {
        if k > 3 {
            return Err(Error::InvalidParameter(format!("wave derivative of order {k} > 3 requested")));
        }
        if let Some(t1) = self.truncate_after {
            if t > t1 {
                return Ok(0.0);
            }
        }
        let gauss = |j: u32| self.gaussian_derivative(j, t);
        match self.cutoff_width {
            None => Ok(gauss(k)),
            Some(w) => {
                // Leibniz rule with binomial coefficients for k ≤ 3.
                const BINOM: [[f64; 4]; 4] =
                    [[1.0, 0.0, 0.0, 0.0], [1.0, 1.0, 0.0, 0.0], [1.0, 2.0, 1.0, 0.0], [1.0, 3.0, 3.0, 1.0]];
                let mut acc = 0.0;
                for j in 0..=k {
                    acc += BINOM[k as usize][j as usize] * smooth_cutoff(k - j, t, w) * gauss(j);
                }
                Ok(acc)
            }
        }
    }

    fn gaussian_derivative(&self, k: u32, t: f64) -> f64 {
        let a = self.rate;
        let x = t - self.center;
        let e = self.amplitude * (-a * x * x).exp();
        match k {
            0 => e,
            1 => -2.0 * a * x * e,
            2 => (4.0 * a * a * x * x - 2.0 * a) * e,
            _ => (12.0 * a * a * x - 8.0 * a * a * a * x * x * x) * e,
        }
    }
}

/// `k`-th derivative of `χ(t) = p(t/w)`, `p(x) = x⁴(35 − 84x + 70x² − 20x³)`.
fn smooth_cutoff(k: u32, t: f64, w: f64) -> f64 {
    let x = t / w;
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let y = 1.0 - x;
    let p = match k {
        0 => x.powi(4) * (35.0 - 84.0 * x + 70.0 * x * x - 20.0 * x.powi(3)),
        1 => 140.0 * x.powi(3) * y.powi(3),
        2 => 420.0 * x * x * y * y * (1.0 - 2.0 * x),
        _ => 840.0 * x * y * (1.0 - 5.0 * x + 5.0 * x * x),
    };
    p / w.powi(k as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn exterior_sphere_values() {
        let l = TransferFunction::exterior_sphere();
        assert_eq!(l.eval(c(1.0, 0.0)).unwrap(), c(2.0, 0.0));
        let v = l.eval(c(1.0, 1.0)).unwrap();
        assert!((v - c(1.5, -0.5)).norm() < 1e-15);
        assert!(l.eval(c(0.0, 1.0)).is_err());
        assert!(l.eval(c(-1.0, 0.0)).is_err());
    }

    #[test]
    fn interior_sphere_at_one() {
        let v = TransferFunction::interior_sphere().eval(c(1.0, 0.0)).unwrap();
        assert!((v.re - 0.3130352854993313).abs() < 1e-15 && v.im.abs() < 1e-16);
    }

    #[test]
    fn interior_sphere_small_and_large_real_arguments() {
        let l = TransferFunction::interior_sphere();
        for &s in &[1e-3, 1e-5, 1e-8] {
            let v = l.eval(c(s, 0.0)).unwrap().re;
            assert!((v / s - 1.0 / 3.0).abs() < 1e-5, "slope at {s}: {}", v / s);
        }
        let far = l.eval(c(40.0, 0.0)).unwrap().re;
        assert!((far - (1.0 - 1.0 / 40.0)).abs() < 1e-14);
    }

    #[test]
    fn interior_sphere_branches_agree() {
        for k in 0..400 {
            let r = 0.05 + 0.45 * (k as f64 / 399.0);
            let phi = -1.5 + 3.0 * ((k * 37) % 400) as f64 / 400.0;
            let s = C64::from_polar(r, phi);
            let d = (interior_sphere_series(s) - interior_sphere_exponential(s)).norm();
            assert!(d < 1e-12, "s={s}: {d}");
        }
    }

    #[test]
    fn shifted_evaluates_at_translated_argument() {
        let l = TransferFunction::exterior_sphere().shifted(1.0);
        assert_eq!(l.eval(c(0.0, 0.0)).unwrap(), c(2.0, 0.0));
        let li = TransferFunction::interior_sphere().shifted(0.3);
        assert!(li.eval(c(0.0, 0.0)).unwrap().re.is_finite());
        let base = TransferFunction::interior_sphere();
        for k in 0..20 {
            let s = c(0.1 * k as f64, 0.7 * k as f64 - 5.0);
            assert_eq!(li.eval(s).unwrap(), base.eval(s + 0.3).unwrap());
        }
        assert_eq!(TransferFunction::exterior_sphere().shifted(0.5).certificate().unwrap().sigma, -0.5);
    }

    #[test]
    fn impedance_values_and_refusal() {
        assert_eq!(Impedance::G2.g(2.0), 8.5);
        assert_eq!(Impedance::G1.g(-2.0), -4.5);
        assert!(Impedance::G1.require_continuous_second_derivative().is_err());
        assert!(Impedance::G2.require_continuous_second_derivative().is_ok());
        assert!(impedance("g3").is_err());
    }

    #[test]
    fn incident_wave_values() {
        let w = incident_wave();
        assert_eq!(w.value(2.5), 2.0);
        let v0 = w.value(0.0);
        assert!(v0 < 1e-26 && (v0 - 2.0 * (-62.5f64).exp()).abs() < 1e-40);
        assert!(wave_derivative(4, 1.0).is_err());
    }

    #[test]
    fn wave_derivatives_match_finite_differences() {
        let h = 1e-5;
        for w in [incident_wave(), incident_wave().causalized(1.0)] {
            for k in 0..3 {
                for &t in &[0.3, 0.8, 2.2, 2.5, 3.1] {
                    let fd = (w.derivative(k, t + h).unwrap() - w.derivative(k, t - h).unwrap()) / (2.0 * h);
                    let ex = w.derivative(k + 1, t).unwrap();
                    assert!((fd - ex).abs() < 1e-6 * (1.0 + ex.abs()), "k={k} t={t}: {fd} vs {ex}");
                }
            }
        }
    }

    #[test]
    fn causal_cutoff_vanishes_before_zero() {
        let w = incident_wave().causalized(0.5);
        assert_eq!(w.value(-0.1), 0.0);
        assert_eq!(w.value(1.0), incident_wave().value(1.0));
    }

    #[test]
    fn alpha_estimate_positive_and_below_tanh() {
        let (_, alpha) = interior_sphere_certified(0.5).unwrap();
        assert!(alpha > 0.0 && alpha <= 0.5f64.tanh());
    }
}
