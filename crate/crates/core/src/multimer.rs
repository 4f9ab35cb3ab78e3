//! Multimerized states: `r` copies of an `h`-emitter wave separated by
//! single dark emitters, `n = r·h + r − 1`.
//!
//! With the junction rule `a^{(s)}_h = −a^{(s+1)}_1` the dark emitter between
//! two blocks sees cancelling neighbours, so the assembled vector is an
//! eigenvector of `Δ_n` with the eigenvalue of the block.

use crate::error::{Error, Result};
use crate::linalg;
use crate::waves::{delta_eigenvalue, delta_eigenvector, parity_of, u_vector, Parity};

/// All `(h, r)` with `h ≥ 1`, `r ≥ 2` and `n = r·h + r − 1`, by increasing `r`.
pub fn admissible_decompositions(n: usize) -> Vec<(usize, usize)> {
    (2..=n + 1)
        .filter(|r| (n + 1).is_multiple_of(*r) && (n + 1) / r >= 2)
        .map(|r| ((n + 1) / r - 1, r))
        .collect()
}

/// Concatenate `signs.len()` copies of `base` scaled by the given signs,
/// with one zero between consecutive copies. Not normalised.
pub fn concatenate(base: &[f64], signs: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(signs.len() * (base.len() + 1));
    for (s, sign) in signs.iter().enumerate() {
        if s > 0 {
            out.push(0.0);
        }
        out.extend(base.iter().map(|a| a * sign));
    }
    out
}

/// Block signs satisfying the junction rule for a base of given parity.
pub fn junction_signs(parity: Parity, r: usize) -> Vec<f64> {
    (0..r)
        .map(|s| match parity {
            Parity::Antisymmetric => 1.0,
            Parity::Symmetric => {
                if s % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
        })
        .collect()
}

/// Unit-norm multimer of `r` blocks of `base`.
pub fn build(base: &[f64], r: usize) -> Result<Vec<f64>> {
    if r == 0 || base.is_empty() {
        return Err(Error::Domain("need a non-empty base and r >= 1".into()));
    }
    let parity = parity_of(&linalg::real_to_complex(base))?;
    let mut v = concatenate(base, &junction_signs(parity, r));
    let nrm = linalg::norm_real(&v);
    for x in v.iter_mut() {
        *x /= nrm;
    }
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-10).copied() {
        if first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
    Ok(v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultimerPlan {
    pub n: usize,
    pub h: usize,
    pub r: usize,
    pub base: Vec<f64>,
    /// Index of the base among the closed-form waves of `Δ_h`, when known.
    pub base_j: Option<usize>,
    pub base_parity: Parity,
    /// Rayleigh quotient of the base under `Δ_h`.
    pub chi: f64,
    pub assembled: Vec<f64>,
    /// Expected index among the waves of `Δ_n`, `r·j_h`.
    pub target_j: Option<usize>,
}

impl MultimerPlan {
    pub fn degenerate_block(&self) -> bool {
        self.h == 1
    }
}

fn rayleigh(v: &[f64]) -> f64 {
    let n = v.len();
    let mut num = 0.0;
    for i in 0..n {
        let left = if i > 0 { v[i - 1] } else { 0.0 };
        let right = if i + 1 < n { v[i + 1] } else { 0.0 };
        num += v[i] * (left + right);
    }
    num / v.iter().map(|x| x * x).sum::<f64>()
}

/// Plan from an arbitrary definite-parity base vector.
pub fn plan_from_base(base: &[f64], r: usize) -> Result<MultimerPlan> {
    let h = base.len();
    let base_parity = parity_of(&linalg::real_to_complex(base))?;
    let nrm = linalg::norm_real(base);
    let base: Vec<f64> = base.iter().map(|x| x / nrm).collect();
    let base_j = (1..=h).find(|&j| {
        let ov: f64 = delta_eigenvector(h, j).iter().zip(&base).map(|(a, b)| a * b).sum();
        ov.abs() >= 1.0 - 1e-12
    });
    Ok(MultimerPlan {
        n: r * h + r - 1,
        h,
        r,
        chi: rayleigh(&base),
        assembled: build(&base, r)?,
        base_parity,
        target_j: base_j.map(|j| r * j),
        base_j,
        base,
    })
}

/// Plan with the closed-form wave `a^{(j_h)}` of `Δ_h` as block.
pub fn plan(h: usize, r: usize, j_h: usize) -> Result<MultimerPlan> {
    if h == 0 || r < 2 {
        return Err(Error::Domain(format!("need h >= 1 and r >= 2, got h={h}, r={r}")));
    }
    if j_h == 0 || j_h > h {
        return Err(Error::Domain(format!("block index {j_h} outside 1..={h}")));
    }
    let mut p = plan_from_base(&delta_eigenvector(h, j_h), r)?;
    p.chi = delta_eigenvalue(h, j_h);
    p.base_j = Some(j_h);
    p.target_j = Some(r * j_h);
    Ok(p)
}

/// Every plan for a chain of `n` emitters: all decompositions and all
/// block waves.
pub fn enumerate(n: usize) -> Result<Vec<MultimerPlan>> {
    let mut out = Vec::new();
    for (h, r) in admissible_decompositions(n) {
        for j_h in 1..=h {
            out.push(plan(h, r, j_h)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultimerReport {
    /// `‖Δ_n A − χ A‖`.
    pub eigen_residual: f64,
    /// `U_ν · A`.
    pub overlap_with_u: f64,
    /// `u_ν · a` of the block on its own.
    pub base_overlap_with_u: f64,
    /// `j` with `|a^{(j)} · A| ≥ 1 − 1e−12`.
    pub matched_j: Option<usize>,
    pub matched_overlap: f64,
    /// Largest `|a^{(s)}_h + a^{(s+1)}_1|` over junctions.
    pub junction_residual: f64,
    pub degenerate_block: bool,
}

impl MultimerReport {
    /// Eigenvector of `Δ_n`, dark to `U_ν`, and at the expected index.
    pub fn is_valid(&self, plan: &MultimerPlan) -> bool {
        self.eigen_residual <= 1e-12
            && self.overlap_with_u.abs() <= 1e-12
            && plan.target_j.is_none_or(|t| self.matched_j == Some(t))
    }
}

/// Check the identities of a plan against `Δ_n` and `U_ν`.
pub fn verify(plan: &MultimerPlan, nu: u32) -> MultimerReport {
    verify_vector(&plan.assembled, plan.h, plan.chi, nu, &plan.base)
}

/// Same checks for an arbitrary assembled vector (used for controls).
pub fn verify_vector(
    assembled: &[f64],
    h: usize,
    chi: f64,
    nu: u32,
    base: &[f64],
) -> MultimerReport {
    let n = assembled.len();
    let mut res = 0.0;
    for i in 0..n {
        let left = if i > 0 { assembled[i - 1] } else { 0.0 };
        let right = if i + 1 < n { assembled[i + 1] } else { 0.0 };
        let r = left + right - chi * assembled[i];
        res += r * r;
    }
    let overlap_with_u = u_vector(nu, n).iter().zip(assembled).map(|(a, b)| a * b).sum();
    let base_overlap_with_u = u_vector(nu, base.len()).iter().zip(base).map(|(a, b)| a * b).sum();
    let mut matched_j = None;
    let mut matched_overlap: f64 = 0.0;
    for j in 1..=n {
        let ov: f64 = delta_eigenvector(n, j).iter().zip(assembled).map(|(a, b)| a * b).sum();
        if ov.abs() > matched_overlap {
            matched_overlap = ov.abs();
            if ov.abs() >= 1.0 - 1e-12 {
                matched_j = Some(j);
            }
        }
    }
    let mut junction_residual: f64 = 0.0;
    let mut s = h;
    while s + 1 < n {
        junction_residual = junction_residual.max((assembled[s - 1] + assembled[s + 1]).abs());
        s += h + 1;
    }
    MultimerReport {
        eigen_residual: res.sqrt(),
        overlap_with_u,
        base_overlap_with_u,
        matched_j,
        matched_overlap,
        junction_residual,
        degenerate_block: h == 1,
    }
}
