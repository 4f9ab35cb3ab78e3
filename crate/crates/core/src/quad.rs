//! Adaptive Gauss–Kronrod quadrature for complex integrands and Wynn's
//! epsilon algorithm for oscillatory tails.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

// 21-point Kronrod abscissae (positive half, descending) with the embedded
// 10-point Gauss rule on the odd indices.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Result of a quadrature: value, estimated absolute error and bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
    pub intervals: usize,
}

impl Integral {
    pub fn zero() -> Self {
        Self {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            evaluations: 0,
            intervals: 0,
        }
    }

    /// Accumulate another piece of a composite integral.
    pub fn add(&mut self, other: Integral) {
        self.value += other.value;
        self.error += other.error;
        self.evaluations += other.evaluations;
        self.intervals += other.intervals;
    }

    pub fn scaled(self, factor: Complex64) -> Self {
        Self {
            value: self.value * factor,
            error: self.error * factor.norm(),
            ..self
        }
    }
}

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64, max_intervals: usize) -> Self {
        Self {
            abs,
            rel,
            max_intervals,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
    resabs: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod21<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> Piece {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = fc * WGK[10];
    let mut resg = Complex64::new(0.0, 0.0);
    let mut resabs = fc.norm() * WGK[10];
    let mut fv1 = [Complex64::new(0.0, 0.0); 10];
    let mut fv2 = [Complex64::new(0.0, 0.0); 10];
    for i in 0..10 {
        let dx = half * XGK[i];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[i] = f1;
        fv2[i] = f2;
        resk += (f1 + f2) * WGK[i];
        resabs += (f1.norm() + f2.norm()) * WGK[i];
        if i % 2 == 1 {
            resg += (f1 + f2) * WG[i / 2];
        }
    }
    let mean = resk * 0.5;
    let mut resasc = (fc - mean).norm() * WGK[10];
    for i in 0..10 {
        resasc += ((fv1[i] - mean).norm() + (fv2[i] - mean).norm()) * WGK[i];
    }
    let scale = half.abs();
    let resasc = resasc * scale;
    let resabs = resabs * scale;
    let mut err = ((resk - resg) * half).norm();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * resabs;
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) && err < floor {
        err = floor;
    }
    Piece {
        a,
        b,
        value: resk * half,
        error: err,
        resabs,
    }
}

/// Globally adaptive 21-point Gauss–Kronrod integration of a complex valued
/// function over a finite interval.
///
/// Converges when the summed error estimate is below
/// `max(abs, rel·|I|)` or below the roundoff floor `100·ε·∫|f|`.
pub fn integrate<F: FnMut(f64) -> Complex64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: Tolerance,
) -> Result<Integral> {
    if a == b {
        return Ok(Integral::zero());
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("non-finite interval [{a}, {b}]")));
    }
    let first = kronrod21(&mut f, a, b);
    let mut evaluations = 21;
    let mut value = first.value;
    let mut error = first.error;
    let mut resabs = first.resabs;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    // pieces too narrow to bisect further
    let mut frozen_value = Complex64::new(0.0, 0.0);
    let mut frozen_error = 0.0;
    let mut frozen_count = 0usize;

    loop {
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::Quadrature {
                estimate: f64::INFINITY,
                target: tol.abs,
                intervals: heap.len() + frozen_count,
            });
        }
        let target = tol.abs.max(tol.rel * value.norm());
        if error <= target || error <= 100.0 * f64::EPSILON * resabs {
            break;
        }
        let intervals = heap.len() + frozen_count;
        let Some(worst) = heap.pop() else {
            return Err(Error::Quadrature {
                estimate: error,
                target,
                intervals,
            });
        };
        if intervals >= tol.max_intervals {
            return Err(Error::Quadrature {
                estimate: error,
                target,
                intervals,
            });
        }
        let mid = 0.5 * (worst.a + worst.b);
        let width = (worst.b - worst.a).abs();
        if width <= 1e-13 * worst.a.abs().max(worst.b.abs()).max(1e-300) || mid == worst.a {
            frozen_value += worst.value;
            frozen_error += worst.error;
            frozen_count += 1;
            if heap.is_empty() || frozen_error > target {
                return Err(Error::Quadrature {
                    estimate: error,
                    target,
                    intervals,
                });
            }
            continue;
        }
        let left = kronrod21(&mut f, worst.a, mid);
        let right = kronrod21(&mut f, mid, worst.b);
        evaluations += 42;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        resabs += left.resabs + right.resabs - worst.resabs;
        heap.push(left);
        heap.push(right);
    }
    // resum to shed accumulated cancellation from the running updates
    let mut total = frozen_value;
    let mut total_err = frozen_error;
    for p in heap.iter() {
        total += p.value;
        total_err += p.error;
    }
    Ok(Integral {
        value: total,
        error: total_err.max(0.0),
        evaluations,
        intervals: heap.len() + frozen_count,
    })
}

/// Integral over `[a + s, ∞)` through the map `x = a + s·u^{-q}` (u ∈ (0, 1]),
/// which turns an algebraic decay `x^{-p}` with `p·q > q + 1` into a
/// bounded integrand.
pub fn integrate_to_infinity<F: FnMut(f64) -> Complex64>(
    mut f: F,
    a: f64,
    scale: f64,
    q: f64,
    tol: Tolerance,
) -> Result<Integral> {
    let g = move |u: f64| {
        let x = a + scale * u.powf(-q);
        let jac = q * scale * u.powf(-q - 1.0);
        let v = f(x) * jac;
        if v.re.is_finite() && v.im.is_finite() {
            v
        } else {
            Complex64::new(0.0, 0.0)
        }
    };
    integrate(g, 0.0, 1.0, tol)
}

/// Wynn's epsilon algorithm applied to a sequence of partial sums.
///
/// Returns the accelerated limit and an error estimate taken from the
/// difference of the last two diagonal estimates.
pub fn wynn_epsilon(partial_sums: &[f64]) -> (f64, f64) {
    let n = partial_sums.len();
    if n == 0 {
        return (0.0, f64::INFINITY);
    }
    if n < 3 {
        let last = partial_sums[n - 1];
        let err = if n == 2 {
            (partial_sums[1] - partial_sums[0]).abs()
        } else {
            f64::INFINITY
        };
        return (last, err);
    }
    // eps[k] holds column k of the table, computed diagonal-by-diagonal
    let mut prev2: Vec<f64> = vec![0.0; n + 1];
    let mut prev: Vec<f64> = partial_sums.to_vec();
    let mut estimates: Vec<f64> = vec![partial_sums[n - 1]];
    let mut col = 0usize;
    loop {
        let len = prev.len();
        if len < 2 {
            break;
        }
        let mut next = Vec::with_capacity(len - 1);
        let mut broke = false;
        for i in 0..len - 1 {
            let diff = prev[i + 1] - prev[i];
            if diff == 0.0 || !diff.is_finite() {
                broke = true;
                break;
            }
            let base = if col == 0 { 0.0 } else { prev2[i + 1] };
            next.push(base + 1.0 / diff);
        }
        if broke {
            break;
        }
        col += 1;
        if col.is_multiple_of(2) {
            estimates.push(*next.last().unwrap());
        }
        prev2 = prev;
        prev = next;
    }
    let k = estimates.len();
    let best = estimates[k - 1];
    let err = if k >= 2 {
        (estimates[k - 1] - estimates[k - 2]).abs()
    } else {
        (partial_sums[n - 1] - partial_sums[n - 2]).abs()
    };
    (best, err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tol() -> Tolerance {
        Tolerance::new(1e-14, 1e-12, 2000)
    }

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| Complex64::new(x.powi(5), 1.0), -1.0, 2.0, tol()).unwrap();
        assert!((r.value.re - (64.0 - 1.0) / 6.0).abs() < 1e-13);
        assert!((r.value.im - 3.0).abs() < 1e-14);
        assert_eq!(r.evaluations, 21);
    }

    #[test]
    fn oscillatory_complex_exponential() {
        let r = integrate(|x| Complex64::new(0.0, 40.0 * x).exp(), 0.0, 3.0, tol()).unwrap();
        let exact = (Complex64::new(0.0, 120.0).exp() - 1.0) / Complex64::new(0.0, 40.0);
        assert!((r.value - exact).norm() < 1e-12);
    }

    #[test]
    fn endpoint_singularity() {
        let r = integrate(|x| Complex64::new(1.0 / x.sqrt(), 0.0), 0.0, 1.0, tol()).unwrap();
        assert!((r.value.re - 2.0).abs() < 1e-10);
    }

    #[test]
    fn refinement_budget_is_enforced() {
        let r = integrate(
            |x| Complex64::new((1.0 / x).sin() / x, 0.0),
            1e-9,
            1.0,
            Tolerance::new(1e-15, 1e-15, 10),
        );
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }

    #[test]
    fn infinite_interval() {
        let r = integrate_to_infinity(
            |x| Complex64::new(1.0 / (1.0 + x * x), 0.0),
            -1.0,
            1.0,
            2.0,
            tol(),
        )
        .unwrap();
        assert!((r.value.re - PI / 2.0).abs() < 1e-11);
        let r = integrate_to_infinity(|x| Complex64::new(x.powf(-1.5), 0.0), 0.0, 1.0, 2.0, tol())
            .unwrap();
        assert!((r.value.re - 2.0).abs() < 1e-11);
    }

    #[test]
    fn wynn_accelerates_alternating_series() {
        // log 2 = 1 − 1/2 + 1/3 − …
        let mut s = 0.0;
        let sums: Vec<f64> = (1..=20)
            .map(|k| {
                s += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
                s
            })
            .collect();
        let (v, err) = wynn_epsilon(&sums);
        assert!((v - 2f64.ln()).abs() < 1e-12, "{v}");
        assert!(err < 1e-9);
        assert!((sums[19] - 2f64.ln()).abs() > 1e-2);
    }

    #[test]
    fn wynn_handles_converged_sequences() {
        let (v, _) = wynn_epsilon(&[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(v, 1.0);
        let (v, e) = wynn_epsilon(&[3.0]);
        assert_eq!(v, 3.0);
        assert!(e.is_infinite());
    }
}
