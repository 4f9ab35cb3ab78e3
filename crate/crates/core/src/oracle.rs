//! Brute-force check: the single-excitation Hamiltonian with a discretized
//! photon continuum, diagonalized densely.
//!
//! Momenta sit on the midpoint grid `k_i = −K + (i + ½)Δk` and couple to
//! emitter `j` (zero based) through `F(k) e^{−ijkd} √Δk`. The grid is
//! symmetric, so the reflection `e_j ↦ e_{n−1−j}`,
//! `|k⟩ ↦ e^{ikL}|−k⟩` (`L = (n−1)d`) is an exact symmetry and the matrix
//! splits into two parity blocks that are diagonalized separately.

use std::f64::consts::PI;

use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::model::{EmitterArray, WaveguideModel};
use crate::selfenergy::QuadratureConfig;
use crate::waves::{delta_eigenvector, epsilon_for_bic, Parity};

/// Largest `n + N_k` accepted.
pub const MAX_DIMENSION: usize = 20_000;
/// Smallest momentum grid accepted.
pub const MIN_MOMENTA: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedHamiltonian {
    pub n: usize,
    pub spacing: f64,
    pub epsilon: f64,
    pub k_grid: Vec<f64>,
    pub dk: f64,
    pub omega: Vec<f64>,
    /// `coupling[i][j] = ⟨k_i|H|e_j⟩`.
    pub coupling: Vec<Vec<Complex64>>,
}

/// Hamiltonian with the physical coupling.
pub fn build_hamiltonian(
    model: &WaveguideModel,
    array: &EmitterArray,
    k_max: f64,
    n_k: usize,
) -> Result<DiscretizedHamiltonian> {
    build_hamiltonian_scaled(model, array, k_max, n_k, 1.0)
}

/// Hamiltonian with the form factor multiplied by `coupling_scale`
/// (`0` decouples emitters and field).
pub fn build_hamiltonian_scaled(
    model: &WaveguideModel,
    array: &EmitterArray,
    k_max: f64,
    n_k: usize,
    coupling_scale: f64,
) -> Result<DiscretizedHamiltonian> {
    let n = array.len();
    if n_k < MIN_MOMENTA {
        return Err(Error::Domain(format!("need at least {MIN_MOMENTA} momenta, got {n_k}")));
    }
    if n_k % 2 == 1 {
        return Err(Error::Domain("the momentum grid needs an even number of points".into()));
    }
    if n + n_k > MAX_DIMENSION {
        return Err(Error::Size(format!(
            "dimension {} exceeds {MAX_DIMENSION}",
            n + n_k
        )));
    }
    if !(k_max > 0.0 && k_max.is_finite()) {
        return Err(Error::Domain(format!("cutoff must be positive, got {k_max}")));
    }
    let dk = 2.0 * k_max / n_k as f64;
    let d = array.spacing();
    let k_grid: Vec<f64> = (0..n_k).map(|i| -k_max + (i as f64 + 0.5) * dk).collect();
    let omega = k_grid.iter().map(|&k| model.omega(k)).collect();
    let coupling = k_grid
        .iter()
        .map(|&k| {
            let g = coupling_scale * model.form_factor(k) * dk.sqrt();
            (0..n)
                .map(|j| Complex64::from_polar(g, -(j as f64) * k * d))
                .collect()
        })
        .collect();
    Ok(DiscretizedHamiltonian {
        n,
        spacing: d,
        epsilon: array.epsilon(),
        k_grid,
        dk,
        omega,
        coupling,
    })
}

impl DiscretizedHamiltonian {
    pub fn dimension(&self) -> usize {
        self.n + self.k_grid.len()
    }

    /// Full matrix; emitters first, then momenta.
    pub fn dense(&self) -> CMat {
        let n = self.n;
        Mat::from_fn(self.dimension(), self.dimension(), |r, c| {
            match (r < n, c < n) {
                (true, true) => {
                    if r == c {
                        Complex64::new(self.epsilon, 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                }
                (false, false) => {
                    if r == c {
                        Complex64::new(self.omega[r - n], 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                }
                (false, true) => self.coupling[r - n][c],
                (true, false) => self.coupling[c - n][r].conj(),
            }
        })
    }

    fn emitter_basis(&self, parity: Parity) -> Vec<Vec<f64>> {
        let n = self.n;
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

    fn length(&self) -> f64 {
        (self.n - 1) as f64 * self.spacing
    }

    /// Block of one parity: emitter combinations, then
    /// `(|k⟩ ± e^{ikL}|−k⟩)/√2` for the positive half of the grid.
    fn sector_matrix(&self, parity: Parity) -> (CMat, Vec<Vec<f64>>) {
        let basis = self.emitter_basis(parity);
        let ne = basis.len();
        let half = self.k_grid.len() / 2;
        let sign = parity.sign();
        let l = self.length();
        // ⟨f_k|H|s_b⟩ for the positive momenta k_{half+p}
        let mut cpl = vec![vec![Complex64::new(0.0, 0.0); ne]; half];
        for (p, row) in cpl.iter_mut().enumerate() {
            let ip = half + p;
            let im = half - 1 - p;
            let k = self.k_grid[ip];
            let back = Complex64::from_polar(1.0, -k * l) * sign;
            for (b, sb) in basis.iter().enumerate() {
                let mut plus = Complex64::new(0.0, 0.0);
                let mut minus = Complex64::new(0.0, 0.0);
                for (j, &w) in sb.iter().enumerate() {
                    if w != 0.0 {
                        plus += self.coupling[ip][j] * w;
                        minus += self.coupling[im][j] * w;
                    }
                }
                row[b] = (plus + back * minus) * std::f64::consts::FRAC_1_SQRT_2;
            }
        }
        let dim = ne + half;
        let m = Mat::from_fn(dim, dim, |r, c| match (r < ne, c < ne) {
            (true, true) => {
                if r == c {
                    Complex64::new(self.epsilon, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            (false, false) => {
                if r == c {
                    Complex64::new(self.omega[half + r - ne], 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            (false, true) => cpl[r - ne][c],
            (true, false) => cpl[c - ne][r].conj(),
        });
        (m, basis)
    }

    /// Eigenpairs of one parity block, lifted to emitter amplitudes and
    /// momentum amplitudes.
    pub fn sector_eigenstates(&self, parity: Parity) -> Result<Vec<Eigenstate>> {
        let (m, basis) = self.sector_matrix(parity);
        let ne = basis.len();
        let half = self.k_grid.len() / 2;
        let evd = m
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
        let s = evd.S();
        let u = evd.U();
        let l = self.length();
        let r2 = std::f64::consts::FRAC_1_SQRT_2;
        let mut out = Vec::with_capacity(m.nrows());
        for col in 0..m.nrows() {
            let mut emitters = vec![Complex64::new(0.0, 0.0); self.n];
            for (b, sb) in basis.iter().enumerate() {
                let c = u[(b, col)];
                for (j, &w) in sb.iter().enumerate() {
                    emitters[j] += c * w;
                }
            }
            let mut field = vec![Complex64::new(0.0, 0.0); self.k_grid.len()];
            for p in 0..half {
                let c = u[(ne + p, col)] * r2;
                let k = self.k_grid[half + p];
                field[half + p] = c;
                field[half - 1 - p] = c * Complex64::from_polar(parity.sign(), k * l);
            }
            out.push(Eigenstate {
                energy: s[col].re,
                emitters,
                field,
                parity,
            });
        }
        Ok(out)
    }

    /// All eigenpairs, both parities, by increasing energy.
    pub fn eigenstates(&self) -> Result<Vec<Eigenstate>> {
        let mut all = self.sector_eigenstates(Parity::Symmetric)?;
        all.extend(self.sector_eigenstates(Parity::Antisymmetric)?);
        all.sort_by(|a, b| a.energy.total_cmp(&b.energy));
        Ok(all)
    }

    /// Field `ψ(x) = Σ_k φ_k √Δk e^{ikx} / √(2π)` of a state.
    pub fn field_profile(&self, state: &Eigenstate, xs: &[f64]) -> Vec<Complex64> {
        let w = (self.dk / (2.0 * PI)).sqrt();
        xs.iter()
            .map(|&x| {
                self.k_grid
                    .iter()
                    .zip(&state.field)
                    .map(|(&k, &phi)| phi * Complex64::from_polar(w, k * x))
                    .sum()
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenstate {
    pub energy: f64,
    pub emitters: Vec<Complex64>,
    /// Momentum amplitudes in grid order.
    pub field: Vec<Complex64>,
    pub parity: Parity,
}

impl Eigenstate {
    pub fn emitter_weight(&self) -> f64 {
        self.emitters.iter().map(|z| z.norm_sqr()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sector {
    Any,
    Symmetric,
    Antisymmetric,
}

impl From<Parity> for Sector {
    fn from(p: Parity) -> Self {
        match p {
            Parity::Symmetric => Sector::Symmetric,
            Parity::Antisymmetric => Sector::Antisymmetric,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub state: Eigenstate,
    pub energy: f64,
    pub emitter_amplitudes: Vec<Complex64>,
    pub emitter_weight: f64,
    pub field_weight: f64,
    /// Eigenvalues found in the window.
    pub in_window: usize,
}

/// Eigenstate with the largest emitter weight among those with energy in
/// `[E_target − window, E_target + window]` and the requested parity.
pub fn find_bic_candidate(
    ham: &DiscretizedHamiltonian,
    e_target: f64,
    window: f64,
    sector: Sector,
) -> Result<Candidate> {
    let parities: &[Parity] = match sector {
        Sector::Any => &[Parity::Symmetric, Parity::Antisymmetric],
        Sector::Symmetric => &[Parity::Symmetric],
        Sector::Antisymmetric => &[Parity::Antisymmetric],
    };
    let mut best: Option<Eigenstate> = None;
    let mut count = 0;
    for &p in parities {
        for st in ham.sector_eigenstates(p)? {
            if (st.energy - e_target).abs() > window {
                continue;
            }
            count += 1;
            if best
                .as_ref()
                .is_none_or(|b| st.emitter_weight() > b.emitter_weight())
            {
                best = Some(st);
            }
        }
    }
    let state = best.ok_or_else(|| {
        Error::NotFound(format!(
            "no eigenvalue within {window:.3e} of {e_target:.6}"
        ))
    })?;
    let weight = state.emitter_weight();
    Ok(Candidate {
        energy: state.energy,
        emitter_amplitudes: state.emitters.clone(),
        emitter_weight: weight,
        field_weight: 1.0 - weight,
        in_window: count,
        state,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub n: usize,
    pub nu: u32,
    pub j: usize,
    pub n_k: usize,
    pub k_max: f64,
    pub epsilon: f64,
    pub detuning: f64,
    pub candidate_energy: f64,
    pub emitter_weight: f64,
    /// `|⟨a^{(j)}, a⟩| / ‖a‖`.
    pub overlap_with_analytic: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSetup {
    pub n: usize,
    pub nu: u32,
    pub j: usize,
    pub n_k: usize,
    /// Momentum cutoff; `None` means `10·max(k(E_ν), m)`.
    pub k_max: Option<f64>,
    /// Added to the selection-rule `ε`, in units of `Z(E_ν)`.
    pub detuning_in_z: f64,
    /// Half-width of the energy window in units of `Z(E_ν)`.
    pub window_in_z: f64,
}

impl OracleSetup {
    pub fn new(n: usize, nu: u32, j: usize, n_k: usize) -> Self {
        Self {
            n,
            nu,
            j,
            n_k,
            k_max: None,
            detuning_in_z: 0.0,
            window_in_z: 2.0,
        }
    }
}

/// Tune `ε` to wave `(ν, j)`, diagonalize, and compare the candidate in the
/// wave's parity sector with the analytic amplitudes.
pub fn run(
    model: &WaveguideModel,
    d: f64,
    setup: &OracleSetup,
    quad: &QuadratureConfig,
) -> Result<(OracleReport, Candidate, DiscretizedHamiltonian)> {
    let e = model.resonant_energy(d, setup.nu);
    let z = model.residue_weight(e)?;
    let k_e = model.k_of_energy(e)?;
    let eps = epsilon_for_bic(model, d, setup.nu, setup.n, setup.j, quad)?.value
        + setup.detuning_in_z * z;
    let array = EmitterArray::new(setup.n, d, eps)?;
    let k_max = setup.k_max.unwrap_or(10.0 * k_e.max(model.mass()));
    let ham = build_hamiltonian(model, &array, k_max, setup.n_k)?;
    let target = delta_eigenvector(setup.n, setup.j);
    let cand = find_bic_candidate(
        &ham,
        e,
        setup.window_in_z * z,
        Parity::of_index(setup.j).into(),
    )?;
    let ov = linalg::hdot(&linalg::real_to_complex(&target), &cand.emitter_amplitudes).norm()
        / cand.emitter_weight.sqrt().max(f64::MIN_POSITIVE);
    Ok((
        OracleReport {
            n: setup.n,
            nu: setup.nu,
            j: setup.j,
            n_k: setup.n_k,
            k_max,
            epsilon: eps,
            detuning: setup.detuning_in_z * z,
            candidate_energy: cand.energy,
            emitter_weight: cand.emitter_weight,
            overlap_with_analytic: ov,
        },
        cand,
        ham,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(g: f64) -> WaveguideModel {
        WaveguideModel::new(1.0, g).unwrap()
    }

    #[test]
    fn decoupled_spectrum() {
        let m = model(0.1);
        let arr = EmitterArray::new(1, 5.0, 1.3).unwrap();
        let h = build_hamiltonian_scaled(&m, &arr, 5.0, 500, 0.0).unwrap();
        let mut got: Vec<f64> = h.eigenstates().unwrap().iter().map(|s| s.energy).collect();
        let mut want: Vec<f64> = h.omega.clone();
        want.push(1.3);
        want.sort_by(f64::total_cmp);
        got.sort_by(f64::total_cmp);
        assert_eq!(got.len(), 501);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn dense_matrix_is_hermitian_and_blocks_match() {
        let m = model(0.1);
        let arr = EmitterArray::new(3, 5.0, 1.2).unwrap();
        let h = build_hamiltonian(&m, &arr, 6.0, 500).unwrap();
        let d = h.dense();
        assert_eq!(d.nrows(), 503);
        for r in 0..d.nrows() {
            for c in 0..d.ncols() {
                assert!((d[(r, c)] - d[(c, r)].conj()).norm() < 1e-14);
            }
        }
        assert_eq!(d[(0, 0)], Complex64::new(1.2, 0.0));
        // block eigenvalues coincide with the full dense spectrum
        let full = d.self_adjoint_eigenvalues(Side::Lower).unwrap();
        let blocks: Vec<f64> = h.eigenstates().unwrap().iter().map(|s| s.energy).collect();
        assert_eq!(full.len(), blocks.len());
        for (a, b) in full.iter().zip(&blocks) {
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn lifted_states_are_eigenvectors() {
        let m = model(0.1);
        let arr = EmitterArray::new(4, 5.0, 1.2).unwrap();
        let h = build_hamiltonian(&m, &arr, 6.0, 500).unwrap();
        let d = h.dense();
        for st in h.sector_eigenstates(Parity::Antisymmetric).unwrap().iter().step_by(37) {
            let mut v = st.emitters.clone();
            v.extend(st.field.iter().copied());
            let hv = linalg::matvec(&d, &v);
            let res: f64 = hv
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - b * st.energy).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(res < 1e-10, "{res}");
            assert!((linalg::norm(&v) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn size_and_grid_validation() {
        let m = model(0.1);
        let arr = EmitterArray::new(3, 5.0, 1.2).unwrap();
        assert!(matches!(build_hamiltonian(&m, &arr, 5.0, 20_000), Err(Error::Size(_))));
        assert!(matches!(build_hamiltonian(&m, &arr, 5.0, 100), Err(Error::Domain(_))));
        let h = build_hamiltonian(&m, &arr, 5.0, 500).unwrap();
        assert!(matches!(
            find_bic_candidate(&h, 100.0, 0.1, Sector::Any),
            Err(Error::NotFound(_))
        ));
    }

    #[test]
    fn weak_coupling_limit() {
        let m = model(1e-8);
        let arr = EmitterArray::new(1, 5.0, 1.3).unwrap();
        let h = build_hamiltonian(&m, &arr, 5.0, 500).unwrap();
        let c = find_bic_candidate(&h, 1.3, 0.05, Sector::Any).unwrap();
        assert!((c.energy - 1.3).abs() < 1e-6);
        assert!(c.emitter_weight > 0.99);
    }
}
