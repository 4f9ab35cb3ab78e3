//! Photon wavefunction of a bound state and its diagnostics.
//!
//! A single emitter at the origin dresses itself with
//! `ξ₁(x) = W(E) sin(k_E|x|) + η(x)`, where the evanescent part
//! `η(x) = e^{−m|x|}/√(2π) ∫ F(k+im) e^{ik|x|} / (E − ω(k+im)) dk`
//! is computed with the same shifted-line quadrature as `β_j`.
//! The chain field is the superposition `ξ(x) = Σ_ℓ a_ℓ ξ₁(x − x_ℓ)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::WaveguideModel;
use crate::selfenergy::{shifted_line_integral, QuadratureConfig, Weight};
use crate::waves::{epsilon_for_bic, ExcitationWave, WaveKind};

/// Beyond this many decay lengths `η` is set to zero (`e^{−40} ≈ 4e−18`).
pub const ETA_CUTOFF: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaValue {
    pub value: f64,
    pub raw_imag: f64,
    pub error: f64,
}

/// Evanescent correction `η(x)` with diagnostics.
pub fn eta_detailed(
    model: &WaveguideModel,
    energy: f64,
    x: f64,
    quad: &QuadratureConfig,
) -> Result<EtaValue> {
    quad.validate()?;
    model.require_continuum(energy)?;
    let m = model.mass();
    let ax = x.abs();
    if m * ax > ETA_CUTOFF {
        return Ok(EtaValue {
            value: 0.0,
            raw_imag: 0.0,
            error: (-m * ax).exp(),
        });
    }
    let raw = shifted_line_integral(model, energy, ax, Weight::FormFactor, m, quad)?;
    let scale = (-m * ax).exp() / (2.0 * PI).sqrt();
    Ok(EtaValue {
        value: scale * raw.value.re,
        raw_imag: scale * raw.value.im,
        error: scale * raw.error,
    })
}

pub fn eta(model: &WaveguideModel, energy: f64, x: f64, quad: &QuadratureConfig) -> Result<f64> {
    Ok(eta_detailed(model, energy, x, quad)?.value)
}

/// Single-emitter wavefunction `ξ₁(x)`.
pub fn xi_single(
    model: &WaveguideModel,
    energy: f64,
    x: f64,
    quad: &QuadratureConfig,
) -> Result<f64> {
    let k = model.k_of_energy(energy)?;
    let w = model.field_weight(energy)?;
    Ok(w * (k * x.abs()).sin() + eta(model, energy, x, quad)?)
}

/// `F(k_E) Σ_ℓ a_ℓ e^{±iℓ k_E d}` for the `+` and `−` signs.
pub fn constraint_residual(
    model: &WaveguideModel,
    d: f64,
    energy: f64,
    amplitudes: &[Complex64],
) -> Result<(Complex64, Complex64)> {
    let k = model.k_of_energy(energy)?;
    let f = model.form_factor(k);
    let theta = k * d;
    let mut plus = Complex64::new(0.0, 0.0);
    let mut minus = Complex64::new(0.0, 0.0);
    for (l, a) in amplitudes.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, l as f64 * theta);
        plus += a * phase;
        minus += a * phase.conj();
    }
    Ok((plus * f, minus * f))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Samples per emitter spacing.
    pub per_cell: usize,
    /// Padding on both sides; `None` means `6/m`.
    pub pad: Option<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            per_cell: 64,
            pad: None,
        }
    }
}

/// Uniform grid with emitters on grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub x: Vec<f64>,
    pub h: f64,
    /// Sample index of every emitter.
    pub emitter_index: Vec<usize>,
    /// Points per spacing.
    pub per_cell: usize,
}

impl FieldGrid {
    pub fn new(n: usize, d: f64, mass: f64, spec: &GridSpec) -> Result<Self> {
        if spec.per_cell < 8 {
            return Err(Error::Grid(format!(
                "per_cell = {} too coarse for the one-sided stencils (need >= 8)",
                spec.per_cell
            )));
        }
        let pad = spec.pad.unwrap_or(6.0 / mass);
        if !(pad >= 0.0 && pad.is_finite()) {
            return Err(Error::Grid(format!("padding must be non-negative, got {pad}")));
        }
        let h = d / spec.per_cell as f64;
        let pad_pts = (pad / h - 1e-9).ceil().max(4.0) as usize;
        let total = 2 * pad_pts + (n - 1) * spec.per_cell + 1;
        if total > 5_000_000 {
            return Err(Error::Size(format!("{total} grid points")));
        }
        let x = (0..total)
            .map(|i| (i as f64 - pad_pts as f64) * h)
            .collect();
        let emitter_index = (0..n).map(|l| pad_pts + l * spec.per_cell).collect();
        Ok(Self {
            x,
            h,
            emitter_index,
            per_cell: spec.per_cell,
        })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Pole-only and full fields on a grid, before normalisation.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSamples {
    pub pole: Vec<f64>,
    pub full: Vec<f64>,
}

/// `η(i·h)` for `i = 0..count`, one quadrature per distinct distance.
pub fn eta_table(
    model: &WaveguideModel,
    energy: f64,
    h: f64,
    count: usize,
    quad: &QuadratureConfig,
) -> Result<Vec<f64>> {
    (0..count)
        .map(|i| eta(model, energy, i as f64 * h, quad))
        .collect()
}

/// Superposition of single-emitter fields for the given amplitudes.
pub fn reconstruct_field(
    model: &WaveguideModel,
    energy: f64,
    amplitudes: &[f64],
    grid: &FieldGrid,
    quad: &QuadratureConfig,
) -> Result<FieldSamples> {
    let table = eta_table(model, energy, grid.h, grid.len(), quad)?;
    reconstruct_with_table(model, energy, amplitudes, grid, &table)
}

fn reconstruct_with_table(
    model: &WaveguideModel,
    energy: f64,
    amplitudes: &[f64],
    grid: &FieldGrid,
    table: &[f64],
) -> Result<FieldSamples> {
    if amplitudes.len() != grid.emitter_index.len() {
        return Err(Error::Domain(format!(
            "{} amplitudes for {} emitters",
            amplitudes.len(),
            grid.emitter_index.len()
        )));
    }
    let k = model.k_of_energy(energy)?;
    let w = model.field_weight(energy)?;
    let mut pole = vec![0.0; grid.len()];
    let mut full = vec![0.0; grid.len()];
    for (&a, &idx) in amplitudes.iter().zip(&grid.emitter_index) {
        if a == 0.0 {
            continue;
        }
        for i in 0..grid.len() {
            let off = i.abs_diff(idx);
            let p = w * (k * off as f64 * grid.h).sin() * a;
            pole[i] += p;
            full[i] += p + a * table[off];
        }
    }
    Ok(FieldSamples { pole, full })
}

/// `ξ'(x_ℓ⁺) − ξ'(x_ℓ⁻)` at each emitter from fourth-order one-sided
/// differences.
pub fn derivative_jumps(samples: &[f64], h: f64, emitter_index: &[usize]) -> Result<Vec<f64>> {
    emitter_index
        .iter()
        .map(|&i| {
            if i < 4 || i + 4 >= samples.len() {
                return Err(Error::Grid(format!(
                    "emitter at sample {i} lacks four neighbours on each side"
                )));
            }
            let f = |o: isize| samples[(i as isize + o) as usize];
            let right = (-25.0 * f(0) + 48.0 * f(1) - 36.0 * f(2) + 16.0 * f(3) - 3.0 * f(4))
                / (12.0 * h);
            let left = (25.0 * f(0) - 48.0 * f(-1) + 36.0 * f(-2) - 16.0 * f(-3) + 3.0 * f(-4))
                / (12.0 * h);
            Ok(right - left)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormReport {
    pub emitters: f64,
    pub field: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BicState {
    pub nu: u32,
    pub j: usize,
    pub kind: WaveKind,
    /// True for deformed waves, whose energy and `ε` follow only from the
    /// resonant approximation.
    pub approximate: bool,
    pub energy: f64,
    pub epsilon_required: f64,
    pub spacing: f64,
    /// Normalised emitter amplitudes.
    pub amplitudes: Vec<f64>,
    pub grid: FieldGrid,
    /// Normalised full field (with `η`).
    pub xi: Vec<f64>,
    /// Normalised propagating part only.
    pub xi_pole: Vec<f64>,
    pub norm_report: NormReport,
    pub constraint_residual: (Complex64, Complex64),
    pub jumps: Vec<f64>,
    pub jumps_pole: Vec<f64>,
    /// `W(E)`, the unit of the plotted field.
    pub field_unit: f64,
    /// Max `|ξ|` over `[(n−1)d + 3/m, (n−1)d + 6/m]` relative to max `|ξ|`.
    pub leakage: f64,
}

impl BicState {
    pub fn n(&self) -> usize {
        self.amplitudes.len()
    }

    fn bright(&self) -> impl Iterator<Item = usize> + '_ {
        let amax = self.amplitudes.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        (0..self.n()).filter(move |&l| self.amplitudes[l].abs() > 1e-8 * amax)
    }

    /// Relative spread `(max − min)/|mean|` of `jumps_ℓ / a_ℓ` over emitters
    /// with non-zero amplitude.
    pub fn jump_ratio_spread(&self) -> f64 {
        spread(self.bright().map(|l| self.jumps[l] / self.amplitudes[l]))
    }

    /// Largest `|jump|` at emitters with zero amplitude, relative to the
    /// largest jump overall; `0` when every emitter is excited.
    pub fn dark_jump_fraction(&self) -> f64 {
        let jmax = self.jumps.iter().fold(0.0f64, |m, j| m.max(j.abs()));
        let bright: Vec<usize> = self.bright().collect();
        (0..self.n())
            .filter(|l| !bright.contains(l))
            .map(|l| self.jumps[l].abs() / jmax)
            .fold(0.0, f64::max)
    }

    /// Max `|ξ_pole|` outside `[0, (n−1)d]`, in units of `W·‖a‖`.
    pub fn pole_exterior(&self) -> f64 {
        let first = self.grid.emitter_index[0];
        let last = *self.grid.emitter_index.last().unwrap();
        let a_norm = self.amplitudes.iter().map(|a| a * a).sum::<f64>().sqrt();
        self.xi_pole
            .iter()
            .enumerate()
            .filter(|(i, _)| *i < first || *i > last)
            .map(|(_, v)| v.abs())
            .fold(0.0, f64::max)
            / (self.field_unit * a_norm)
    }
}

fn spread(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    if v.is_empty() {
        return 0.0;
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let (lo, hi) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    (hi - lo) / mean.abs()
}

/// Assemble the bound state of wave `wave` at `E = E_ν`.
pub fn assemble(
    model: &WaveguideModel,
    d: f64,
    nu: u32,
    wave: &ExcitationWave,
    grid_spec: &GridSpec,
    quad: &QuadratureConfig,
) -> Result<BicState> {
    if wave.kind == WaveKind::Superradiant {
        return Err(Error::Domain(format!(
            "wave j={} is superradiant: it radiates and has no bound state",
            wave.j
        )));
    }
    let n = wave.amplitudes.len();
    let energy = model.resonant_energy(d, nu);
    let eps = epsilon_for_bic(model, d, nu, n, wave.j, quad)?;
    let grid = FieldGrid::new(n, d, model.mass(), grid_spec)?;
    let a = wave.real_amplitudes();
    let fields = reconstruct_field(model, energy, &a, &grid, quad)?;

    let emit: f64 = a.iter().map(|x| x * x).sum();
    let field: f64 = grid.h * fields.full.iter().map(|x| x * x).sum::<f64>();
    let s = 1.0 / (emit + field).sqrt();
    let amplitudes: Vec<f64> = a.iter().map(|x| x * s).collect();
    let xi: Vec<f64> = fields.full.iter().map(|x| x * s).collect();
    let xi_pole: Vec<f64> = fields.pole.iter().map(|x| x * s).collect();
    let norm_report = NormReport {
        emitters: emit * s * s,
        field: field * s * s,
        total: (emit + field) * s * s,
    };

    let cplx: Vec<Complex64> = amplitudes.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let constraint = constraint_residual(model, d, energy, &cplx)?;
    let jumps = derivative_jumps(&xi, grid.h, &grid.emitter_index)?;
    let jumps_pole = derivative_jumps(&xi_pole, grid.h, &grid.emitter_index)?;

    let chain_end = (n - 1) as f64 * d;
    let m = model.mass();
    let peak = xi.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let tail = grid
        .x
        .iter()
        .zip(&xi)
        .filter(|(x, _)| **x >= chain_end + 3.0 / m && **x <= chain_end + 6.0 / m + 1e-12)
        .fold(0.0f64, |acc, (_, v)| acc.max(v.abs()));

    Ok(BicState {
        nu,
        j: wave.j,
        kind: wave.kind,
        approximate: eps.approximate,
        energy,
        epsilon_required: eps.value,
        spacing: d,
        amplitudes,
        grid,
        xi,
        xi_pole,
        norm_report,
        constraint_residual: constraint,
        jumps,
        jumps_pole,
        field_unit: model.field_weight(energy)?,
        leakage: if peak > 0.0 { tail / peak } else { 0.0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waves::{classify_waves, delta_eigenvector};

    fn setup() -> (WaveguideModel, f64, f64, QuadratureConfig) {
        let m = WaveguideModel::new(1.0, 0.1).unwrap();
        let d = 5.0;
        (m, d, m.resonant_energy(d, 1), QuadratureConfig::default())
    }

    #[test]
    fn eta_reference_and_bound() {
        let (m, _, e1, q) = setup();
        let e0 = eta_detailed(&m, e1, 0.0, &q).unwrap();
        assert!((e0.value + 0.064_522_394_5).abs() < 1e-8, "{}", e0.value);
        assert!(e0.raw_imag.abs() < 1e-12);
        assert_eq!(xi_single(&m, e1, 0.0, &q).unwrap(), e0.value);
        let e3 = eta(&m, e1, 3.0, &q).unwrap();
        assert!(e3.abs() <= (-3.0f64).exp() * e0.value.abs() * (1.0 + 1e-6));
        assert_eq!(eta(&m, e1, 50.0, &q).unwrap(), 0.0);
    }

    #[test]
    fn xi_single_is_even() {
        let (m, _, e1, q) = setup();
        for x in [0.3, 1.7, 4.2] {
            assert_eq!(xi_single(&m, e1, x, &q).unwrap(), xi_single(&m, e1, -x, &q).unwrap());
        }
    }

    #[test]
    fn constraint_examples() {
        let (m, d, e1, _) = setup();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let a: Vec<Complex64> = [r, 0.0, -r].iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let (p, mi) = constraint_residual(&m, d, e1, &a).unwrap();
        assert!(p.norm() < 1e-14 && mi.norm() < 1e-14);
        let n = 4;
        let u: Vec<Complex64> = crate::waves::u_vector(1, n)
            .iter()
            .map(|&x| Complex64::new(x / (n as f64).sqrt(), 0.0))
            .collect();
        let (p, _) = constraint_residual(&m, d, e1, &u).unwrap();
        let f = m.form_factor(m.k_of_energy(e1).unwrap());
        assert!((p.norm() - f * 2.0).abs() < 1e-12);
        assert!(constraint_residual(&m, d, 0.5, &u).is_err());
    }

    #[test]
    fn grid_alignment() {
        let g = FieldGrid::new(3, 5.0, 1.0, &GridSpec::default()).unwrap();
        for (l, &i) in g.emitter_index.iter().enumerate() {
            assert!((g.x[i] - 5.0 * l as f64).abs() < 1e-12);
        }
        assert!(g.x[0] <= -6.0 && *g.x.last().unwrap() >= 16.0);
        assert!(matches!(
            FieldGrid::new(3, 5.0, 1.0, &GridSpec { per_cell: 4, pad: None }),
            Err(Error::Grid(_))
        ));
        assert!(matches!(derivative_jumps(&[0.0; 6], 0.1, &[2]), Err(Error::Grid(_))));
    }

    #[test]
    fn three_emitter_state() {
        let (m, d, _, q) = setup();
        let cat = classify_waves(3, 1, 1e-3).unwrap();
        let st = assemble(&m, d, 1, cat.wave(2).unwrap(), &GridSpec::default(), &q).unwrap();
        assert!((st.norm_report.total - 1.0).abs() < 1e-12);
        assert!(st.pole_exterior() < 1e-12);
        // node at the middle emitter
        let mid = st.grid.emitter_index[1];
        assert!(st.xi_pole[mid].abs() < 1e-12 * st.field_unit);
        let k = m.k_of_energy(st.energy).unwrap();
        for l in 0..3 {
            let want = 2.0 * st.field_unit * k * st.amplitudes[l];
            assert!((st.jumps_pole[l] - want).abs() < 1e-4 * st.field_unit * k, "{} {}", st.jumps_pole[l], want);
        }
        assert!(st.jump_ratio_spread() < 0.01);
        assert!(st.dark_jump_fraction() < 1e-3);
        assert!(st.leakage < (-3.0f64).exp());
        let c = st.constraint_residual;
        assert!(c.0.norm() < 1e-14 && c.1.norm() < 1e-14);
    }

    #[test]
    fn superradiant_is_refused() {
        let (m, d, _, q) = setup();
        let cat = classify_waves(3, 1, 1e-3).unwrap();
        let err = assemble(&m, d, 1, cat.wave(3).unwrap(), &GridSpec::default(), &q);
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn reconstruction_is_linear() {
        let (m, d, e1, q) = setup();
        let grid = FieldGrid::new(4, d, 1.0, &GridSpec { per_cell: 16, pad: Some(2.0) }).unwrap();
        let table = eta_table(&m, e1, grid.h, grid.len(), &q).unwrap();
        let a1 = delta_eigenvector(4, 1);
        let a2 = vec![0.3, -1.0, 0.2, 0.7];
        let sum: Vec<f64> = a1.iter().zip(&a2).map(|(x, y)| x + y).collect();
        let f1 = reconstruct_with_table(&m, e1, &a1, &grid, &table).unwrap();
        let f2 = reconstruct_with_table(&m, e1, &a2, &grid, &table).unwrap();
        let fs = reconstruct_with_table(&m, e1, &sum, &grid, &table).unwrap();
        for i in 0..grid.len() {
            assert!((fs.full[i] - f1.full[i] - f2.full[i]).abs() < 1e-12);
        }
    }
}
