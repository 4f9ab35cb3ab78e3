//! Waveguide dispersion, emitter form factor and the scalar quantities
//! derived from them.
//!
//! Everything is expressed in natural units with the photon mass `m` as the
//! energy scale. The analytic continuations are defined on the strip
//! `|Im κ| ≤ m`, where `κ² + m²` keeps a non-negative real part, so the
//! principal square root is analytic in the open strip.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Distance from `±im` below which a continuation argument is treated as
/// sitting on the branch point.
pub const BRANCH_POINT_TOL: f64 = 1e-14;

/// Dispersion families supported by the self-energy machinery.
///
/// Any new variant must be even, strictly increasing for `k > 0`, and
/// continue analytically into the strip `|Im κ| < ω(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dispersion {
    /// `ω(k) = √(k² + m²)` with form factor `F(k) = √(γ / 2π ω(k))`.
    #[default]
    KleinGordon,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveguideModel {
    mass: f64,
    gamma: f64,
    kind: Dispersion,
}

impl WaveguideModel {
    pub fn new(mass: f64, gamma: f64) -> Result<Self> {
        Self::with_kind(mass, gamma, Dispersion::KleinGordon)
    }

    pub fn with_kind(mass: f64, gamma: f64, kind: Dispersion) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::Domain(format!("mass must be positive, got {mass}")));
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::Domain(format!(
                "coupling gamma must be positive, got {gamma}"
            )));
        }
        Ok(Self { mass, gamma, kind })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn kind(&self) -> Dispersion {
        self.kind
    }

    /// Same model with a different coupling constant.
    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Self::with_kind(self.mass, gamma, self.kind)
    }

    pub fn omega(&self, k: f64) -> f64 {
        match self.kind {
            Dispersion::KleinGordon => (k * k + self.mass * self.mass).sqrt(),
        }
    }

    /// Group velocity `ω'(k)`.
    pub fn omega_prime(&self, k: f64) -> f64 {
        match self.kind {
            Dispersion::KleinGordon => k / self.omega(k),
        }
    }

    /// `f(k) = |F(k)|²`, the spectral density entering the self-energy.
    pub fn coupling_density(&self, k: f64) -> f64 {
        match self.kind {
            Dispersion::KleinGordon => self.gamma / (2.0 * PI * self.omega(k)),
        }
    }

    pub fn form_factor(&self, k: f64) -> f64 {
        self.coupling_density(k).sqrt()
    }

    /// Analytic continuation of `ω` into the strip `|Im κ| ≤ m`.
    pub fn omega_cont(&self, kappa: Complex64) -> Result<Complex64> {
        self.check_strip(kappa)?;
        Ok(self.omega_cont_unchecked(kappa))
    }

    /// Continuation of the form factor, principal branch.
    pub fn form_factor_cont(&self, kappa: Complex64) -> Result<Complex64> {
        self.check_strip(kappa)?;
        Ok(self.form_factor_cont_unchecked(kappa))
    }

    /// Continuation of `f = F²`.
    pub fn coupling_density_cont(&self, kappa: Complex64) -> Result<Complex64> {
        self.check_strip(kappa)?;
        Ok(self.coupling_density_cont_unchecked(kappa))
    }

    // `κ² + m²` is formed as `x² + (m − y)(m + y) + 2ixy` so that the
    // shifted line `y = m` yields `k(k + 2im)` without cancellation.
    pub(crate) fn omega_cont_unchecked(&self, kappa: Complex64) -> Complex64 {
        match self.kind {
            Dispersion::KleinGordon => {
                let (x, y) = (kappa.re, kappa.im);
                let m = self.mass;
                Complex64::new(x * x + (m - y) * (m + y), 2.0 * x * y).sqrt()
            }
        }
    }

    pub(crate) fn coupling_density_cont_unchecked(&self, kappa: Complex64) -> Complex64 {
        match self.kind {
            Dispersion::KleinGordon => {
                self.gamma / (2.0 * PI * self.omega_cont_unchecked(kappa))
            }
        }
    }

    pub(crate) fn form_factor_cont_unchecked(&self, kappa: Complex64) -> Complex64 {
        self.coupling_density_cont_unchecked(kappa).sqrt()
    }

    fn check_strip(&self, kappa: Complex64) -> Result<()> {
        let m = self.mass;
        if !(kappa.re.is_finite() && kappa.im.is_finite()) {
            return Err(Error::Domain(format!("non-finite argument {kappa}")));
        }
        if kappa.im.abs() > m * (1.0 + 1e-15) {
            return Err(Error::Domain(format!(
                "Im kappa = {} outside the analyticity strip |Im kappa| <= {m}",
                kappa.im
            )));
        }
        let tol = BRANCH_POINT_TOL * m.max(1.0);
        if (kappa - Complex64::new(0.0, m)).norm() < tol
            || (kappa + Complex64::new(0.0, m)).norm() < tol
        {
            return Err(Error::BranchPoint {
                re: kappa.re,
                im: kappa.im,
            });
        }
        Ok(())
    }

    /// Positive momentum of a propagating photon with energy `energy`.
    pub fn k_of_energy(&self, energy: f64) -> Result<f64> {
        self.require_continuum(energy)?;
        match self.kind {
            Dispersion::KleinGordon => {
                Ok(((energy - self.mass) * (energy + self.mass)).sqrt())
            }
        }
    }

    /// `E_ν = ω(νπ/d)`: energies at which the spacing is a whole number of
    /// half-wavelengths.
    pub fn resonant_energy(&self, spacing: f64, nu: u32) -> f64 {
        self.omega(f64::from(nu) * PI / spacing)
    }

    /// Residue weight `Z(E) = 2π f(k_E) / ω'(k_E)`.
    pub fn residue_weight(&self, energy: f64) -> Result<f64> {
        let k = self.k_of_energy(energy)?;
        Ok(2.0 * PI * self.coupling_density(k) / self.omega_prime(k))
    }

    /// Field weight `W(E) = √(2π) F(k_E) / ω'(k_E)`, amplitude of the
    /// propagating part of the single-emitter photon wavefunction.
    pub fn field_weight(&self, energy: f64) -> Result<f64> {
        let k = self.k_of_energy(energy)?;
        Ok((2.0 * PI).sqrt() * self.form_factor(k) / self.omega_prime(k))
    }

    pub(crate) fn require_continuum(&self, energy: f64) -> Result<()> {
        if !(energy.is_finite() && energy > self.omega(0.0)) {
            return Err(Error::Domain(format!(
                "energy {energy} is not above the continuum threshold {}",
                self.omega(0.0)
            )));
        }
        Ok(())
    }
}

/// `n` identical emitters at `x_ℓ = ℓ·d`, `ℓ = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmitterArray {
    n: usize,
    spacing: f64,
    epsilon: f64,
}

impl EmitterArray {
    pub fn new(n: usize, spacing: f64, epsilon: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("an array needs at least one emitter".into()));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::Domain(format!(
                "spacing must be positive, got {spacing}"
            )));
        }
        if !epsilon.is_finite() {
            return Err(Error::Domain("excitation energy must be finite".into()));
        }
        Ok(Self { n, spacing, epsilon })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self { epsilon, ..*self }
    }

    /// Position of emitter `index` (zero based).
    pub fn position(&self, index: usize) -> f64 {
        index as f64 * self.spacing
    }

    /// Length of the chain, `(n − 1)·d`.
    pub fn length(&self) -> f64 {
        self.position(self.n - 1)
    }
}
