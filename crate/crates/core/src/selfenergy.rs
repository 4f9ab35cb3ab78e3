//! Self-energy of the emitter array.
//!
//! `Σ_jl(E + i0) = −i Z(E) e^{i|j−l| k_E d} + β_{|j−l|}(E)`, where the real
//! evanescent couplings `β_j` come from an integral along the shifted line
//! `R + im`. A second, independent route evaluates `Σ` directly on the real
//! axis as a principal value plus the Sokhotski–Plemelj delta term.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::model::{EmitterArray, WaveguideModel};
use crate::quad::{integrate, integrate_to_infinity, wynn_epsilon, Integral, Tolerance};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Split point between the finite real segment and the tail. `None`
    /// picks a value from `k(E)` and `m`.
    pub k_max: Option<f64>,
    /// Maximum number of subintervals per adaptive segment.
    pub max_refinements: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            k_max: None,
            max_refinements: 2000,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::Domain(format!("rel_tol must lie in (0, 1), got {}", self.rel_tol)));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::Domain(format!("abs_tol must be positive, got {}", self.abs_tol)));
        }
        if let Some(k) = self.k_max {
            if !(k > 0.0 && k.is_finite()) {
                return Err(Error::Domain(format!("k_max must be positive, got {k}")));
            }
        }
        if self.max_refinements < 4 {
            return Err(Error::Domain("max_refinements must be at least 4".into()));
        }
        Ok(())
    }

    fn segment_tol(&self) -> Tolerance {
        Tolerance::new(self.abs_tol / 8.0, self.rel_tol, self.max_refinements)
    }
}

/// Which spectral weight multiplies the resolvent on the shifted line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Weight {
    /// `f = F²`, integrable `k^{-1/2}` branch singularity.
    Density,
    /// `F`, `k^{-1/4}` branch singularity.
    FormFactor,
}

impl Weight {
    fn power(self) -> i32 {
        match self {
            Weight::Density => 2,
            Weight::FormFactor => 4,
        }
    }
}

/// `∫_R P(k+im) e^{ick} / (E − ω(k+im)) dk` for `c ≥ 0`, where `P` is `f` or
/// `F`. Right and left half-lines are integrated independently so that the
/// imaginary part of the result is a genuine accuracy check. Each half-line
/// is split into a substituted segment `[0, k_c]` (`k = t^p`), a plain
/// segment `[k_c, K]` and a tail rotated onto the vertical ray `±K + im + is`.
pub(crate) fn shifted_line_integral(
    model: &WaveguideModel,
    energy: f64,
    c: f64,
    weight: Weight,
    k_c: f64,
    quad: &QuadratureConfig,
) -> Result<Integral> {
    model.require_continuum(energy)?;
    let m = model.mass();
    let k_e = model.k_of_energy(energy)?;
    let k_split = quad
        .k_max
        .unwrap_or_else(|| (2.0 * k_e).max(4.0 * m))
        .max(1.5 * k_c);
    let s_split = k_split.max(1.0);
    let tol = quad.segment_tol();
    let p = weight.power();
    let pf = f64::from(p);

    let g = |kappa: Complex64| -> Complex64 {
        let w = model.omega_cont_unchecked(kappa);
        let pw = match weight {
            Weight::Density => model.coupling_density_cont_unchecked(kappa),
            Weight::FormFactor => model.form_factor_cont_unchecked(kappa),
        };
        let phase = (I * c * (kappa - Complex64::new(0.0, m))).exp();
        pw * phase / (energy - w)
    };

    let mut total = Integral::zero();
    for sign in [1.0, -1.0] {
        let on_line = |k: f64| g(Complex64::new(sign * k, m));
        let t_c = k_c.powf(1.0 / pf);
        total.add(integrate(
            |t| {
                if t == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                on_line(t.powi(p)) * (pf * t.powi(p - 1))
            },
            0.0,
            t_c,
            tol,
        )?);
        total.add(integrate(on_line, k_c, k_split, tol)?);
        // ∫_K^∞ = i∫_0^∞ g(K+im+is) ds, mirrored with −i on the left
        let ray = |s: f64| g(Complex64::new(sign * k_split, m + s)) * (I * sign);
        total.add(integrate(ray, 0.0, s_split, tol)?);
        total.add(integrate_to_infinity(ray, 0.0, s_split, 2.0, tol)?);
    }
    Ok(total)
}

/// One evanescent coupling together with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaValue {
    pub j: usize,
    pub value: f64,
    /// Imaginary part of the raw (complex) contour integral, zero in exact
    /// arithmetic.
    pub raw_imag: f64,
    pub error: f64,
}

/// Evanescent coupling `β_j(E)` between emitters `j` spacings apart.
pub fn beta_j(
    model: &WaveguideModel,
    d: f64,
    energy: f64,
    j: usize,
    quad: &QuadratureConfig,
) -> Result<f64> {
    Ok(beta_j_detailed(model, d, energy, j, quad)?.value)
}

pub fn beta_j_detailed(
    model: &WaveguideModel,
    d: f64,
    energy: f64,
    j: usize,
    quad: &QuadratureConfig,
) -> Result<BetaValue> {
    quad.validate()?;
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::Domain(format!("spacing must be positive, got {d}")));
    }
    model.require_continuum(energy)?;
    let m = model.mass();
    let c = j as f64 * d;
    let k_c = (1.0 / d).max(m);
    let raw = shifted_line_integral(model, energy, c, Weight::Density, k_c, quad)?;
    let damp = (-c * m).exp();
    Ok(BetaValue {
        j,
        value: damp * raw.value.re,
        raw_imag: damp * raw.value.im,
        error: damp * raw.error,
    })
}

type CacheKey = [u64; 9];
type BetaCache = RwLock<HashMap<CacheKey, Arc<Vec<BetaValue>>>>;

fn beta_cache() -> &'static BetaCache {
    static CACHE: OnceLock<BetaCache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// `β_0 … β_{count−1}` at one energy, memoised per
/// `(m, γ, d, E, count, quadrature settings)`.
pub fn beta_vector(
    model: &WaveguideModel,
    d: f64,
    energy: f64,
    count: usize,
    quad: &QuadratureConfig,
) -> Result<Arc<Vec<BetaValue>>> {
    let key: CacheKey = [
        model.mass().to_bits(),
        model.gamma().to_bits(),
        d.to_bits(),
        energy.to_bits(),
        count as u64,
        quad.rel_tol.to_bits(),
        quad.abs_tol.to_bits(),
        quad.k_max.map_or(u64::MAX, f64::to_bits),
        quad.max_refinements as u64,
    ];
    if let Some(hit) = beta_cache().read().ok().and_then(|c| c.get(&key).cloned()) {
        return Ok(hit);
    }
    let values = (0..count)
        .map(|j| beta_j_detailed(model, d, energy, j, quad))
        .collect::<Result<Vec<_>>>()?;
    let values = Arc::new(values);
    if let Ok(mut cache) = beta_cache().write() {
        cache.entry(key).or_insert_with(|| values.clone());
    }
    Ok(values)
}

fn toeplitz(n: usize, entry: impl Fn(usize) -> Complex64) -> CMat {
    let diag: Vec<Complex64> = (0..n).map(entry).collect();
    Mat::from_fn(n, n, |i, j| diag[i.abs_diff(j)])
}

/// Self-energy matrix from the contour representation.
pub fn sigma_contour(
    model: &WaveguideModel,
    array: &EmitterArray,
    energy: f64,
    quad: &QuadratureConfig,
) -> Result<CMat> {
    let betas = beta_vector(model, array.spacing(), energy, array.len(), quad)?;
    let z = model.residue_weight(energy)?;
    let k = model.k_of_energy(energy)?;
    Ok(assemble_sigma(z, k, array.spacing(), &betas))
}

fn assemble_sigma(z: f64, k: f64, d: f64, betas: &[BetaValue]) -> CMat {
    toeplitz(betas.len(), |j| {
        -I * z * (I * (j as f64) * k * d).exp() + betas[j].value
    })
}

/// Principal value of `∫_R f(k) e^{ijkd} / (E − ω(k)) dk` on the real axis.
pub fn principal_value_j(
    model: &WaveguideModel,
    d: f64,
    energy: f64,
    j: usize,
    quad: &QuadratureConfig,
) -> Result<Integral> {
    quad.validate()?;
    let k_e = model.k_of_energy(energy)?;
    let c = j as f64 * d;
    let tol = quad.segment_tol();
    let h = |k: f64| model.coupling_density(k) * (c * k).cos() / (energy - model.omega(k));

    // E − ω = (k_E − k)(k_E + k)/(E + ω) keeps the pole factor exact
    let numer = |k: f64| {
        -model.coupling_density(k) * (c * k).cos() * (energy + model.omega(k)) / (k + k_e)
    };
    let c0 = numer(k_e);
    let remainder = |k: f64| {
        if k == k_e {
            // derivative of the numerator, only hit if a node lands exactly on the pole
            let hstep = 1e-6 * k_e;
            return Complex64::new((numer(k_e + hstep) - numer(k_e - hstep)) / (2.0 * hstep), 0.0);
        }
        Complex64::new((numer(k) - c0) / (k - k_e), 0.0)
    };
    // the subtracted c0/(k − k_E) has zero principal value on the symmetric window
    let mut total = Integral::zero();
    total.add(integrate(remainder, 0.0, k_e, tol)?);
    total.add(integrate(remainder, k_e, 2.0 * k_e, tol)?);

    let k2 = quad.k_max.unwrap_or(4.0 * k_e + 4.0 * model.mass()).max(2.0 * k_e);
    let real_h = |k: f64| Complex64::new(h(k), 0.0);
    total.add(integrate(real_h, 2.0 * k_e, k2, tol)?);

    if j == 0 {
        total.add(integrate_to_infinity(real_h, 0.0, k2, 1.0, tol)?);
    } else {
        let panel = PI / c;
        let target = (quad.abs_tol).max(quad.rel_tol * total.value.norm() * 1e-2);
        let mut sums = Vec::new();
        let mut acc = 0.0;
        let mut evals = 0;
        let mut err_q = 0.0;
        let mut best = (0.0, f64::INFINITY);
        for p in 0..400 {
            let a = k2 + p as f64 * panel;
            let r = integrate(real_h, a, a + panel, tol)?;
            acc += r.value.re;
            err_q += r.error;
            evals += r.evaluations;
            sums.push(acc);
            if sums.len() >= 8 {
                let window = &sums[sums.len().saturating_sub(24)..];
                best = wynn_epsilon(window);
                if best.1 <= target {
                    break;
                }
            }
        }
        if best.1 > target.max(1e3 * f64::EPSILON * acc.abs()) {
            return Err(Error::Quadrature {
                estimate: best.1,
                target,
                intervals: sums.len(),
            });
        }
        total.add(Integral {
            value: Complex64::new(best.0, 0.0),
            error: best.1 + err_q,
            evaluations: evals,
            intervals: sums.len(),
        });
    }
    // both half-lines contribute equally for the even integrand
    Ok(total.scaled(Complex64::new(2.0, 0.0)))
}

/// Self-energy from the real-axis principal value and the pole term
/// `−iπ f(k_E)/ω'(k_E)·2cos(j k_E d)`.
pub fn sigma_pv(
    model: &WaveguideModel,
    array: &EmitterArray,
    energy: f64,
    quad: &QuadratureConfig,
) -> Result<CMat> {
    let k_e = model.k_of_energy(energy)?;
    let d = array.spacing();
    let pole = PI * model.coupling_density(k_e) / model.omega_prime(k_e);
    let entries = (0..array.len())
        .map(|j| {
            let pv = principal_value_j(model, d, energy, j, quad)?;
            Ok(Complex64::new(
                pv.value.re,
                -2.0 * pole * (j as f64 * k_e * d).cos(),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(toeplitz(array.len(), |j| entries[j]))
}

/// Inverse propagator at one real energy together with its ingredients.
#[derive(Debug, Clone)]
pub struct PropagatorBundle {
    pub energy: f64,
    pub epsilon: f64,
    pub k: f64,
    pub z: f64,
    pub beta: Vec<f64>,
    /// Largest `|Im|` of the raw β contour integrals.
    pub beta_imag: f64,
    pub sigma: CMat,
    pub g_inv: CMat,
    pub quad_error: f64,
}

impl PropagatorBundle {
    pub fn n(&self) -> usize {
        self.beta.len()
    }

    /// `b_j = β_j / Z`.
    pub fn b(&self, j: usize) -> f64 {
        self.beta[j] / self.z
    }
}

/// `G⁻¹(E) = (ε − E)·I + Σ(E + i0)`.
pub fn propagator_inv(
    model: &WaveguideModel,
    array: &EmitterArray,
    energy: f64,
    quad: &QuadratureConfig,
) -> Result<PropagatorBundle> {
    let betas = beta_vector(model, array.spacing(), energy, array.len(), quad)?;
    let z = model.residue_weight(energy)?;
    let k = model.k_of_energy(energy)?;
    let sigma = assemble_sigma(z, k, array.spacing(), &betas);
    let shift = array.epsilon() - energy;
    let g_inv = Mat::from_fn(array.len(), array.len(), |i, j| {
        if i == j {
            sigma[(i, j)] + shift
        } else {
            sigma[(i, j)]
        }
    });
    Ok(PropagatorBundle {
        energy,
        epsilon: array.epsilon(),
        k,
        z,
        beta: betas.iter().map(|b| b.value).collect(),
        beta_imag: betas.iter().map(|b| b.raw_imag.abs()).fold(0.0, f64::max),
        sigma,
        g_inv,
        quad_error: betas.iter().map(|b| b.error).sum(),
    })
}

/// `det G⁻¹(E)`, vanishing at bound-state energies.
pub fn det_residual(bundle: &PropagatorBundle) -> Complex64 {
    bundle.g_inv.determinant()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> WaveguideModel {
        WaveguideModel::new(1.0, 0.1).unwrap()
    }

    fn q() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn config_validation() {
        assert!(q().validate().is_ok());
        let bad = QuadratureConfig { rel_tol: 0.0, ..q() };
        assert!(bad.validate().is_err());
        let bad = QuadratureConfig { k_max: Some(-1.0), ..q() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn beta_reference_values() {
        // high-precision values of the same contour integral
        let m = model();
        let e1 = m.resonant_energy(5.0, 1);
        let refs = [3.0039486e-2, 8.8597598e-5, 4.4958799e-7];
        for (j, r) in refs.iter().enumerate() {
            let b = beta_j_detailed(&m, 5.0, e1, j, &q()).unwrap();
            assert!((b.value - r).abs() < 1e-7 * r.abs(), "j={j}: {}", b.value);
            assert!(b.raw_imag.abs() < 1e-12);
        }
        let e1 = m.resonant_energy(3.0, 1);
        let b0 = beta_j(&m, 3.0, e1, 0, &q()).unwrap();
        let b1 = beta_j(&m, 3.0, e1, 1, &q()).unwrap();
        assert!((b0 - 2.779311e-2).abs() < 1e-7);
        assert!((b1 - 6.7169e-4).abs() < 1e-8);
    }

    #[test]
    fn beta_rejects_bound_energies() {
        assert!(matches!(beta_j(&model(), 5.0, 0.9, 0, &q()), Err(Error::Domain(_))));
        assert!(beta_j(&model(), -1.0, 2.0, 0, &q()).is_err());
    }

    #[test]
    fn beta_ratio_regression_at_d4() {
        let m = model();
        let e1 = m.resonant_energy(4.0, 1);
        let b1 = beta_j(&m, 4.0, e1, 1, &q()).unwrap();
        let b2 = beta_j(&m, 4.0, e1, 2, &q()).unwrap();
        let ratio = (b2 / b1).abs() / (-4.0f64).exp();
        assert!(ratio > 0.1 && ratio < 10.0, "{ratio}");
    }

    #[test]
    fn pv_real_parts_match_independent_values() {
        let m = model();
        let e = 1.3 * m.resonant_energy(5.0, 1);
        let want = [0.027_141_746_5, -0.037_903_663_1, -0.068_112_355_1];
        for (j, w) in want.iter().enumerate() {
            let pv = principal_value_j(&m, 5.0, e, j, &q()).unwrap();
            assert!((pv.value.re - w).abs() < 1e-8, "j={j}: {}", pv.value.re);
        }
    }

    #[test]
    fn sigma_structure_and_paths_agree() {
        let m = model();
        let e1 = m.resonant_energy(5.0, 1);
        let arr = EmitterArray::new(4, 5.0, e1).unwrap();
        let s = sigma_contour(&m, &arr, e1, &q()).unwrap();
        let z = m.residue_weight(e1).unwrap();
        for i in 0..4 {
            assert!((s[(i, i)].im + z).abs() < 1e-10);
            for j in 0..4 {
                assert_eq!(s[(i, j)], s[(j, i)]);
            }
        }
        let p = sigma_pv(&m, &arr, e1, &q()).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((s[(i, j)] - p[(i, j)]).norm() <= 1e-6 * s[(i, j)].norm());
            }
        }
    }

    #[test]
    fn propagator_and_single_emitter_determinant() {
        let m = model();
        let e1 = m.resonant_energy(5.0, 1);
        let b0 = beta_j(&m, 5.0, e1, 0, &q()).unwrap();
        let arr = EmitterArray::new(1, 5.0, e1 - b0).unwrap();
        let bundle = propagator_inv(&m, &arr, e1, &q()).unwrap();
        let det = det_residual(&bundle);
        assert!((det - Complex64::new(0.0, -bundle.z)).norm() < 1e-12);

        let arr = EmitterArray::new(3, 5.0, 1.2).unwrap();
        let bundle = propagator_inv(&m, &arr, e1, &q()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(bundle.g_inv[(i, j)], bundle.g_inv[(j, i)]);
                if i != j {
                    assert_eq!(bundle.g_inv[(i, j)], bundle.sigma[(i, j)]);
                }
            }
        }
        let reversed = Mat::from_fn(3, 3, |i, j| bundle.g_inv[(2 - i, 2 - j)]);
        let d1 = bundle.g_inv.determinant();
        let d2 = reversed.determinant();
        assert!((d1 - d2).norm() < 1e-14 * d1.norm().max(1.0));
    }

    #[test]
    fn two_emitter_residual_is_small_at_tuned_energy() {
        let m = model();
        let d = 5.0;
        let e1 = m.resonant_energy(d, 1);
        let b0 = beta_j(&m, d, e1, 0, &q()).unwrap();
        let b1 = beta_j(&m, d, e1, 1, &q()).unwrap();
        // j = 1 wave of two emitters, χ = 1
        let arr = EmitterArray::new(2, d, e1 - b0 - b1).unwrap();
        let bundle = propagator_inv(&m, &arr, e1, &q()).unwrap();
        let det = det_residual(&bundle).norm();
        let z = bundle.z;
        assert!(det <= 10.0 * (-2.0 * d).exp() * z * z, "{det}");
    }

    #[test]
    fn beta_cache_returns_same_values() {
        let m = model();
        let e = m.resonant_energy(6.0, 2);
        let a = beta_vector(&m, 6.0, e, 3, &q()).unwrap();
        let b = beta_vector(&m, 6.0, e, 3, &q()).unwrap();
        assert!(Arc::ptr_eq(&a, &b) || a == b);
        assert_eq!(a[2].value, beta_j(&m, 6.0, e, 2, &q()).unwrap());
    }

    #[test]
    fn strip_integrand_symmetry() {
        use rand::{Rng, SeedableRng};
        let m = model();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let k: f64 = rng.gen_range(0.01..20.0);
            let e: f64 = rng.gen_range(1.01..5.0);
            let c: f64 = rng.gen_range(0.0..10.0);
            let g = |kk: f64| {
                let kappa = Complex64::new(kk, 1.0);
                m.coupling_density_cont(kappa).unwrap() * (I * c * kk).exp()
                    / (e - m.omega_cont(kappa).unwrap())
            };
            let (a, b) = (g(-k).conj(), g(k));
            assert!((a - b).norm() <= 1e-13 * b.norm());
        }
    }
}
