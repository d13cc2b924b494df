//! The Runge–Kutta differentiation symbol `Δ(ζ) = (𝒜 + ζ/(1−ζ) 𝟙bᵀ)⁻¹`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::tableau::{ButcherTableau, Method};

/// How `Δ(ζ)` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SymbolPath {
    /// Invert `𝒜 + ζ/(1−ζ) 𝟙bᵀ` by LU.
    Direct,
    /// `𝒜⁻¹ − ζ/(1 − R(∞)ζ) 𝒜⁻¹𝟙bᵀ𝒜⁻¹`; stable up to the unit circle.
    #[default]
    ShermanMorrison,
    /// `½[[3, 1−4ζ], [−9, 5+4ζ]]`, two-stage Radau IIA only.
    ClosedFormRadau2,
}

/// Minimum `|1 − ζ|` accepted by the direct path.
pub const DIRECT_PATH_MIN_GAP: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct DifferentiationSymbol {
    tableau: ButcherTableau,
    path: SymbolPath,
    /// `𝒜⁻¹𝟙`
    u: Vec<C64>,
    /// `bᵀ𝒜⁻¹`
    v: Vec<C64>,
}

impl DifferentiationSymbol {
    pub fn new(tableau: &ButcherTableau) -> Self {
        Self::with_path(tableau, SymbolPath::default()).expect("Sherman-Morrison path is always available")
    }

    pub fn with_path(tableau: &ButcherTableau, path: SymbolPath) -> Result<Self> {
        if path == SymbolPath::ClosedFormRadau2 && tableau.method() != Method::Radau2 {
            return Err(Error::Unsupported(format!(
                "closed-form symbol is only known for radau2, not {}",
                tableau.name()
            )));
        }
        let m = tableau.stages();
        let a_inv = tableau.a_inverse();
        let u = a_inv.mul_vec(&vec![C64::new(1.0, 0.0); m]);
        let v = (0..m).map(|j| (0..m).map(|i| a_inv[(i, j)] * tableau.b()[i]).sum::<C64>()).collect();
        Ok(Self { tableau: tableau.clone(), path, u, v })
    }

    pub fn tableau(&self) -> &ButcherTableau {
        &self.tableau
    }

    pub fn path(&self) -> SymbolPath {
        self.path
    }

    pub fn stages(&self) -> usize {
        self.tableau.stages()
    }

    /// `Δ(ζ)` for `|ζ| < 1`.
    pub fn delta(&self, zeta: C64) -> Result<CMatrix> {
        if !(zeta.norm() < 1.0) {
            return Err(Error::ZetaOutOfDomain(zeta));
        }
        self.delta_unchecked(zeta)
    }

    /// `Δ(ζ)` without the `|ζ| < 1` check (used on the closed unit disc
    /// where the Sherman–Morrison form extends continuously).
    pub(crate) fn delta_unchecked(&self, zeta: C64) -> Result<CMatrix> {
        match self.path {
            SymbolPath::Direct => {
                let gap = (C64::new(1.0, 0.0) - zeta).norm();
                if gap <= DIRECT_PATH_MIN_GAP {
                    return Err(Error::ZetaNearOne(gap));
                }
                Ok(self.delta_inverse_unchecked(zeta).inverse()?)
            }
            SymbolPath::ShermanMorrison => {
                let gamma = zeta / (C64::new(1.0, 0.0) - zeta * self.tableau.r_infinity());
                let rank_one = CMatrix::outer(&self.u, &self.v).scale(gamma);
                Ok(self.tableau.a_inverse() - &rank_one)
            }
            SymbolPath::ClosedFormRadau2 => {
                let h = C64::new(0.5, 0.0);
                Ok(CMatrix::from_fn(2, |i, j| {
                    h * match (i, j) {
                        (0, 0) => C64::new(3.0, 0.0),
                        (0, 1) => C64::new(1.0, 0.0) - zeta * 4.0,
                        (1, 0) => C64::new(-9.0, 0.0),
                        _ => C64::new(5.0, 0.0) + zeta * 4.0,
                    }
                }))
            }
        }
    }

    /// `Δ(ζ)⁻¹ = 𝒜 + ζ/(1−ζ) 𝟙bᵀ`, formed explicitly.
    pub fn delta_inverse(&self, zeta: C64) -> Result<CMatrix> {
        if !(zeta.norm() < 1.0) {
            return Err(Error::ZetaOutOfDomain(zeta));
        }
        Ok(self.delta_inverse_unchecked(zeta))
    }

    fn delta_inverse_unchecked(&self, zeta: C64) -> CMatrix {
        let m = self.stages();
        let gamma = zeta / (C64::new(1.0, 0.0) - zeta);
        let b = self.tableau.b();
        CMatrix::from_fn(m, |i, j| C64::new(self.tableau.a(i, j), 0.0) + gamma * b[j])
    }
}

/// `Δ(ζ)` on the default (Sherman–Morrison) path.
pub fn delta(sym: &DifferentiationSymbol, zeta: C64) -> Result<CMatrix> {
    sym.delta(zeta)
}
