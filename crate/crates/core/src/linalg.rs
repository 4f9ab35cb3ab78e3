//! Small dense helpers on top of `faer`.

use faer::Mat;
use num_complex::Complex64;

pub type CMat = Mat<Complex64>;

pub fn real_to_complex(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

pub fn matvec(m: &CMat, v: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(m.ncols(), v.len());
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum())
        .collect()
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn norm_real(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Bilinear (unconjugated) product `Σ a_i b_i`.
pub fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Hermitian product `Σ conj(a_i) b_i`.
pub fn hdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn max_abs_entry(m: &CMat) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            best = best.max(m[(i, j)].norm());
        }
    }
    best
}

/// Exchange matrix action `(J v)_ℓ = v_{n−1−ℓ}`.
pub fn reversed<T: Copy>(v: &[T]) -> Vec<T> {
    v.iter().rev().copied().collect()
}

/// Dense eigendecomposition of a general complex matrix.
pub fn eigen(m: &CMat) -> crate::Result<(Vec<Complex64>, Vec<Vec<Complex64>>)> {
    let n = m.nrows();
    let evd = m
        .eigen()
        .map_err(|e| crate::Error::Eigensolver(format!("{e:?}")))?;
    let s = evd.S();
    let u = evd.U();
    let values: Vec<Complex64> = (0..n).map(|i| s[i]).collect();
    let vectors: Vec<Vec<Complex64>> = (0..n)
        .map(|j| (0..n).map(|i| u[(i, j)]).collect())
        .collect();
    for (i, v) in values.iter().enumerate() {
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(crate::Error::Eigensolver(format!(
                "non-finite eigenvalue at position {i}"
            )));
        }
    }
    Ok((values, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matvec_and_products() {
        let m = CMat::from_fn(2, 2, |i, j| Complex64::new((i * 2 + j) as f64, 0.0));
        let v = real_to_complex(&[1.0, 2.0]);
        let r = matvec(&m, &v);
        assert_eq!(r, real_to_complex(&[2.0, 8.0]));
        let a = vec![Complex64::new(0.0, 1.0)];
        assert_eq!(dot(&a, &a), Complex64::new(-1.0, 0.0));
        assert_eq!(hdot(&a, &a), Complex64::new(1.0, 0.0));
        assert_eq!(reversed(&[1, 2, 3]), vec![3, 2, 1]);
    }

    #[test]
    fn eigen_of_diagonal() {
        let m = CMat::from_fn(3, 3, |i, j| {
            if i == j {
                Complex64::new(i as f64, 1.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let (mut vals, _) = eigen(&m).unwrap();
        vals.sort_by(|a, b| a.re.total_cmp(&b.re));
        for (i, v) in vals.iter().enumerate() {
            assert!((v - Complex64::new(i as f64, 1.0)).norm() < 1e-14);
        }
    }
}
