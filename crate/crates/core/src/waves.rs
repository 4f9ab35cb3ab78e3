//! Excitation waves of the emitter chain.
//!
//! At a resonant energy the propagator reduces to `−Z(A − χ I)` with
//! `A = i u_ν u_νᵀ − b₁ Δ_n`. Eigenvectors of `Δ_n` orthogonal to `u_ν` stay
//! exact eigenvectors of `A` ("exact waves"); the remaining ones are deformed
//! by the rank-one term, except for one superradiant mode close to `u_ν`.

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::model::WaveguideModel;
use crate::selfenergy::{beta_vector, QuadratureConfig};

/// Largest chain handled by the dense eigensolver.
pub const MAX_EMITTERS: usize = 500;
/// Tolerance of [`parity_of`].
pub const PARITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WaveKind {
    Exact,
    Deformed,
    Superradiant,
}

impl WaveKind {
    pub fn label(self) -> &'static str {
        match self {
            WaveKind::Exact => "exact",
            WaveKind::Deformed => "deformed",
            WaveKind::Superradiant => "superradiant",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Symmetric,
    Antisymmetric,
}

impl Parity {
    pub fn label(self) -> &'static str {
        match self {
            Parity::Symmetric => "symmetric",
            Parity::Antisymmetric => "antisymmetric",
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Parity::Symmetric => 1.0,
            Parity::Antisymmetric => -1.0,
        }
    }

    /// Mirror parity of the closed-form wave `a^{(j)}`.
    pub fn of_index(j: usize) -> Self {
        if j % 2 == 1 {
            Parity::Symmetric
        } else {
            Parity::Antisymmetric
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExcitationWave {
    /// Frequency index, `1..=n`.
    pub j: usize,
    /// Unit vector; first component above `1e-10` is real positive.
    pub amplitudes: Vec<Complex64>,
    /// Eigenvalue of `A`.
    pub chi: Complex64,
    /// `2cos(jπ/(n+1))`, eigenvalue of `Δ_n` for the matched closed-form wave.
    pub chi_laplacian: f64,
    pub kind: WaveKind,
    pub parity: Parity,
    /// `u_ν · a`.
    pub resonance_overlap: Complex64,
    /// `|⟨a^{(j)}, ã⟩|`.
    pub closed_form_overlap: f64,
    /// `ã − a^{(j)}` with the phase of `ã` chosen to minimise its norm;
    /// recorded for deformed waves.
    pub deformation: Option<Vec<Complex64>>,
}

impl ExcitationWave {
    pub fn deformation_norm(&self) -> Option<f64> {
        self.deformation.as_ref().map(|d| linalg::norm(d))
    }

    /// Real part of the amplitudes, the emitter profile used for field
    /// reconstruction.
    pub fn real_amplitudes(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.re).collect()
    }

    /// Norm of the imaginary part of the amplitudes.
    pub fn imaginary_norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.im * z.im).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveCatalog {
    pub n: usize,
    pub nu: u32,
    pub b1: f64,
    /// Ordered by `j`.
    pub waves: Vec<ExcitationWave>,
    /// Required excitation energy per wave; `None` without a physical model
    /// and for the superradiant wave.
    pub epsilon_values: Vec<Option<f64>>,
}

impl WaveCatalog {
    pub fn wave(&self, j: usize) -> Option<&ExcitationWave> {
        self.waves.get(j.checked_sub(1)?)
    }

    pub fn count(&self, kind: WaveKind) -> usize {
        self.waves.iter().filter(|w| w.kind == kind).count()
    }

    pub fn superradiant(&self) -> &ExcitationWave {
        self.waves
            .iter()
            .find(|w| w.kind == WaveKind::Superradiant)
            .expect("catalog invariant: one superradiant wave")
    }
}

/// Adjacency matrix of the open chain (discrete Laplacian without diagonal).
pub fn delta_matrix(n: usize) -> Mat<f64> {
    Mat::from_fn(n, n, |i, j| if i.abs_diff(j) == 1 { 1.0 } else { 0.0 })
}

/// Closed-form eigenvalue `2cos(jπ/(n+1))`.
pub fn delta_eigenvalue(n: usize, j: usize) -> f64 {
    2.0 * (j as f64 * PI / (n + 1) as f64).cos()
}

/// Closed-form unit eigenvector `a^{(j)}_ℓ = √(2/(n+1)) sin(jℓπ/(n+1))`.
pub fn delta_eigenvector(n: usize, j: usize) -> Vec<f64> {
    let norm = (2.0 / (n + 1) as f64).sqrt();
    let mut v: Vec<f64> = (1..=n)
        .map(|l| {
            // reduce jℓ mod 2(n+1) so the sine argument stays in [0, 2π)
            let r = (j * l) % (2 * (n + 1));
            norm * (r as f64 * PI / (n + 1) as f64).sin()
        })
        .collect();
    // exact zeros where jℓ ≡ 0 mod (n+1)
    for (l, x) in v.iter_mut().enumerate() {
        if (j * (l + 1)).is_multiple_of(n + 1) {
            *x = 0.0;
        }
    }
    v
}

/// All `(χ^{(j)}, a^{(j)})`, `j = 1..=n`, in decreasing `χ`.
pub fn delta_spectrum(n: usize) -> Vec<(f64, Vec<f64>)> {
    (1..=n)
        .map(|j| (delta_eigenvalue(n, j), delta_eigenvector(n, j)))
        .collect()
}

/// `u_ν = (1, (−1)^ν, 1, …)`.
pub fn u_vector(nu: u32, n: usize) -> Vec<f64> {
    (0..n)
        .map(|l| if nu % 2 == 1 && l % 2 == 1 { -1.0 } else { 1.0 })
        .collect()
}

/// Closed-form `u_ν · a^{(j)}` for `j = 1..=n`.
pub fn resonance_overlaps(n: usize, nu: u32) -> Vec<f64> {
    let u = u_vector(nu, n);
    (1..=n)
        .map(|j| {
            if closed_form_orthogonal(n, nu, j) {
                0.0
            } else {
                u.iter().zip(delta_eigenvector(n, j)).map(|(a, b)| a * b).sum()
            }
        })
        .collect()
}

/// Indices `j` of the exact waves at resonance `ν`, increasing.
pub fn exact_indices(n: usize, nu: u32) -> Vec<usize> {
    (1..=n)
        .filter(|&j| closed_form_orthogonal(n, nu, j) && !(n >= 2 && j == superradiant_index(n, nu)))
        .collect()
}

// u_ν·a^{(j)} vanishes by mirror symmetry: for ν even u is symmetric, so
// antisymmetric (even j) waves drop out; for ν odd u has parity (−1)^{n−1}.
fn closed_form_orthogonal(n: usize, nu: u32, j: usize) -> bool {
    let u_parity = if nu.is_multiple_of(2) || n % 2 == 1 {
        Parity::Symmetric
    } else {
        Parity::Antisymmetric
    };
    u_parity != Parity::of_index(j)
}

fn exact_phase(p: usize, theta: f64) -> Complex64 {
    let turns = theta / PI;
    if turns.fract() == 0.0 && turns.abs() < 1e15 {
        let odd = (turns.abs() as u64 % 2 == 1) && p % 2 == 1;
        return Complex64::new(if odd { -1.0 } else { 1.0 }, 0.0);
    }
    Complex64::from_polar(1.0, p as f64 * theta)
}

/// `A_{jl} = i e^{i|j−l|θ} − b_{|j−l|}` with `b_0 = 0`; `b` holds
/// `b_1, b_2, …` and may be shorter than `n − 1` (missing entries are zero).
pub fn a_matrix(theta: f64, b: &[f64], n: usize) -> CMat {
    let i = Complex64::new(0.0, 1.0);
    let entries: Vec<Complex64> = (0..n)
        .map(|p| {
            let bp = if p == 0 { 0.0 } else { b.get(p - 1).copied().unwrap_or(0.0) };
            i * exact_phase(p, theta) - bp
        })
        .collect();
    Mat::from_fn(n, n, |r, c| entries[r.abs_diff(c)])
}

/// Orthonormal real basis of one mirror-parity sector, as columns.
fn sector_basis(n: usize, parity: Parity) -> Vec<Vec<f64>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut basis = Vec::new();
    for k in 0..n / 2 {
        let mut v = vec![0.0; n];
        v[k] = s;
        v[n - 1 - k] = s * parity.sign();
        basis.push(v);
    }
    if n % 2 == 1 && parity == Parity::Symmetric {
        let mut v = vec![0.0; n];
        v[n / 2] = 1.0;
        basis.push(v);
    }
    basis
}

/// Global phase making the first component above `1e-10` real positive.
pub fn apply_sign_convention(v: &mut [Complex64]) {
    if let Some(first) = v.iter().find(|z| z.norm() > 1e-10).copied() {
        let phase = first.conj() / first.norm();
        for z in v.iter_mut() {
            *z *= phase;
        }
        // remove roundoff left in the reference component
        if let Some(z) = v.iter_mut().find(|z| z.norm() > 1e-10) {
            *z = Complex64::new(z.norm(), 0.0);
        }
    }
}

/// Mirror parity of an amplitude vector.
pub fn parity_of(amplitudes: &[Complex64]) -> Result<Parity> {
    let scale = linalg::norm(amplitudes).max(f64::MIN_POSITIVE);
    let rev = linalg::reversed(amplitudes);
    let sym: f64 = amplitudes
        .iter()
        .zip(&rev)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt()
        / scale;
    let anti: f64 = amplitudes
        .iter()
        .zip(&rev)
        .map(|(a, b)| (a + b).norm_sqr())
        .sum::<f64>()
        .sqrt()
        / scale;
    if sym <= PARITY_TOL {
        Ok(Parity::Symmetric)
    } else if anti <= PARITY_TOL {
        Ok(Parity::Antisymmetric)
    } else {
        Err(Error::Parity {
            symmetric: sym,
            antisymmetric: anti,
        })
    }
}

struct SectorMode {
    value: Complex64,
    vector: Vec<Complex64>,
}

fn sector_modes(a: &CMat, parity: Parity) -> Result<Vec<SectorMode>> {
    let n = a.nrows();
    let basis = sector_basis(n, parity);
    let dim = basis.len();
    if dim == 0 {
        return Ok(Vec::new());
    }
    // Bᵀ A B, with A applied column by column
    let ab: Vec<Vec<Complex64>> = basis
        .iter()
        .map(|col| linalg::matvec(a, &linalg::real_to_complex(col)))
        .collect();
    let block = Mat::from_fn(dim, dim, |r, c| {
        basis[r]
            .iter()
            .zip(&ab[c])
            .map(|(x, y)| y * *x)
            .sum::<Complex64>()
    });
    let (values, vectors) = linalg::eigen(&block)?;
    Ok(values
        .into_iter()
        .zip(vectors)
        .map(|(value, coeffs)| {
            let mut full = vec![Complex64::new(0.0, 0.0); n];
            for (c, col) in coeffs.iter().zip(&basis) {
                for (f, x) in full.iter_mut().zip(col) {
                    *f += c * *x;
                }
            }
            let nrm = linalg::norm(&full);
            for f in full.iter_mut() {
                *f /= nrm;
            }
            SectorMode { value, vector: full }
        })
        .collect())
}

/// Eigen-analysis of `A(νπ, (b₁, 0, …))` and classification of every
/// eigenvector against the closed-form waves.
pub fn classify_waves(n: usize, nu: u32, b1: f64) -> Result<WaveCatalog> {
    if n == 0 {
        return Err(Error::Domain("need at least one emitter".into()));
    }
    if n > MAX_EMITTERS {
        return Err(Error::Size(format!(
            "n = {n} exceeds the dense eigensolver limit {MAX_EMITTERS}"
        )));
    }
    if !(b1.is_finite() && b1 != 0.0 && b1.abs() <= 0.1) {
        return Err(Error::Domain(format!(
            "b1 must satisfy 0 < |b1| <= 0.1, got {b1}"
        )));
    }
    let a = a_matrix(f64::from(nu) * PI, &[b1], n);
    let u = linalg::real_to_complex(&u_vector(nu, n));
    let spectrum = delta_spectrum(n);
    let mut slots: Vec<Option<ExcitationWave>> = vec![None; n];

    for parity in [Parity::Symmetric, Parity::Antisymmetric] {
        let modes = sector_modes(&a, parity)?;
        let js: Vec<usize> = (1..=n).filter(|&j| Parity::of_index(j) == parity).collect();
        if js.len() != modes.len() {
            return Err(Error::Classification(format!(
                "sector size mismatch: {} modes for {} closed-form waves",
                modes.len(),
                js.len()
            )));
        }
        // greedy bijective assignment by descending |overlap|, ties to lower j
        let mut pairs = Vec::with_capacity(js.len() * modes.len());
        for &j in &js {
            let closed = &spectrum[j - 1].1;
            for (mi, mode) in modes.iter().enumerate() {
                let ov: Complex64 = closed.iter().zip(&mode.vector).map(|(x, y)| y * *x).sum();
                pairs.push((ov.norm(), j, mi));
            }
        }
        pairs.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
        let mut used_mode = vec![false; modes.len()];
        let mut matched: Vec<(usize, usize)> = Vec::new();
        for (_, j, mi) in pairs {
            if slots[j - 1].is_none() && !used_mode[mi] && !matched.iter().any(|m| m.0 == j) {
                used_mode[mi] = true;
                matched.push((j, mi));
            }
        }
        for (j, mi) in matched {
            let mode = &modes[mi];
            let (chi_l, closed) = (&spectrum[j - 1].0, &spectrum[j - 1].1);
            let mut amps = mode.vector.clone();
            apply_sign_convention(&mut amps);
            let ov: Complex64 = closed.iter().zip(&amps).map(|(x, y)| y * *x).sum();
            let closed_overlap = ov.norm();

            let kind = if mode.value.im > n as f64 / 2.0 {
                WaveKind::Superradiant
            } else if closed_form_orthogonal(n, nu, j) {
                WaveKind::Exact
            } else {
                WaveKind::Deformed
            };

            let (amplitudes, chi, deformation) = match kind {
                WaveKind::Exact => {
                    let err = amps
                        .iter()
                        .zip(closed)
                        .map(|(x, y)| (x - *y).norm_sqr())
                        .sum::<f64>()
                        .sqrt();
                    if err > 1e-8 {
                        return Err(Error::Classification(format!(
                            "exact wave j={j} differs from the closed form by {err:.3e}"
                        )));
                    }
                    let want = -b1 * chi_l;
                    if (mode.value - want).norm() > 1e-9 * b1.abs().max(1e-300) * (n as f64) {
                        return Err(Error::Classification(format!(
                            "exact wave j={j}: eigenvalue {} differs from {want}",
                            mode.value
                        )));
                    }
                    (
                        linalg::real_to_complex(closed),
                        Complex64::new(want, 0.0),
                        None,
                    )
                }
                WaveKind::Deformed => {
                    let phase = if closed_overlap > 0.0 {
                        ov.conj() / closed_overlap
                    } else {
                        Complex64::new(1.0, 0.0)
                    };
                    let delta = amps
                        .iter()
                        .zip(closed)
                        .map(|(x, y)| x * phase - *y)
                        .collect();
                    (amps, mode.value, Some(delta))
                }
                WaveKind::Superradiant => (amps, mode.value, None),
            };
            let resonance_overlap = if kind == WaveKind::Exact {
                Complex64::new(0.0, 0.0)
            } else {
                linalg::dot(&u, &amplitudes)
            };
            let wave_parity = parity_of(&amplitudes)?;
            debug_assert_eq!(wave_parity, parity);
            slots[j - 1] = Some(ExcitationWave {
                j,
                amplitudes,
                chi,
                chi_laplacian: *chi_l,
                kind,
                parity: wave_parity,
                resonance_overlap,
                closed_form_overlap: closed_overlap,
                deformation,
            });
        }
    }

    let waves: Vec<ExcitationWave> = slots
        .into_iter()
        .enumerate()
        .map(|(i, w)| {
            w.ok_or_else(|| Error::Classification(format!("wave j={} unassigned", i + 1)))
        })
        .collect::<Result<_>>()?;
    let catalog = WaveCatalog {
        n,
        nu,
        b1,
        epsilon_values: vec![None; n],
        waves,
    };
    check_catalog(&catalog)?;
    Ok(catalog)
}

/// Index of the superradiant wave: `1` for even `ν`, `n` for odd `ν`.
pub fn superradiant_index(n: usize, nu: u32) -> usize {
    if nu.is_multiple_of(2) {
        1
    } else {
        n
    }
}

fn check_catalog(c: &WaveCatalog) -> Result<()> {
    let n = c.n;
    let exact = c.count(WaveKind::Exact);
    let deformed = c.count(WaveKind::Deformed);
    let sr: Vec<usize> = c
        .waves
        .iter()
        .filter(|w| w.kind == WaveKind::Superradiant)
        .map(|w| w.j)
        .collect();
    if sr.len() != 1 {
        return Err(Error::Classification(format!(
            "expected one superradiant wave, found {}",
            sr.len()
        )));
    }
    if sr[0] != superradiant_index(n, c.nu) {
        return Err(Error::Classification(format!(
            "superradiant wave at j={}, expected j={}",
            sr[0],
            superradiant_index(n, c.nu)
        )));
    }
    if exact != n / 2 || deformed != n.div_ceil(2) - 1 {
        return Err(Error::Classification(format!(
            "{exact} exact and {deformed} deformed waves for n={n}"
        )));
    }
    Ok(())
}

/// Required excitation energy with the flag telling whether the selection
/// rule is exact for this wave.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonValue {
    pub value: f64,
    pub approximate: bool,
}

/// `ε = E_ν − β₀(E_ν) − β₁(E_ν)·2cos(jπ/(n+1))`.
pub fn epsilon_for_bic(
    model: &WaveguideModel,
    d: f64,
    nu: u32,
    n: usize,
    j: usize,
    quad: &QuadratureConfig,
) -> Result<EpsilonValue> {
    if j == 0 || j > n {
        return Err(Error::Domain(format!("wave index {j} outside 1..={n}")));
    }
    if nu == 0 {
        return Err(Error::Domain("nu = 0 sits at the continuum threshold".into()));
    }
    if n >= 2 && j == superradiant_index(n, nu) {
        return Err(Error::Domain(format!(
            "wave j={j} is superradiant for nu={nu} and carries no bound state"
        )));
    }
    let e = model.resonant_energy(d, nu);
    let betas = beta_vector(model, d, e, 2, quad)?;
    Ok(EpsilonValue {
        value: e - betas[0].value - betas[1].value * delta_eigenvalue(n, j),
        approximate: !closed_form_orthogonal(n, nu, j),
    })
}

/// `b₁ = β₁(E_ν)/Z(E_ν)` for a physical model.
pub fn physical_b1(
    model: &WaveguideModel,
    d: f64,
    nu: u32,
    quad: &QuadratureConfig,
) -> Result<f64> {
    let e = model.resonant_energy(d, nu);
    let betas = beta_vector(model, d, e, 2, quad)?;
    Ok(betas[1].value / model.residue_weight(e)?)
}

/// Catalog for a physical model: `b₁` from the self-energy and the required
/// `ε` attached to every non-superradiant wave.
pub fn physical_catalog(
    model: &WaveguideModel,
    d: f64,
    nu: u32,
    n: usize,
    quad: &QuadratureConfig,
) -> Result<WaveCatalog> {
    let b1 = physical_b1(model, d, nu, quad)?;
    let mut catalog = classify_waves(n, nu, b1)?;
    for w in &catalog.waves {
        if w.kind != WaveKind::Superradiant {
            catalog.epsilon_values[w.j - 1] =
                Some(epsilon_for_bic(model, d, nu, n, w.j, quad)?.value);
        }
    }
    Ok(catalog)
}
