use bicwave::bic::{assemble, GridSpec};
use bicwave::linalg;
use bicwave::multimer;
use bicwave::oracle::{self, OracleSetup};
use bicwave::selfenergy::{beta_j, propagator_inv};
use bicwave::waves::{
    classify_waves, epsilon_for_bic, exact_indices, resonance_overlaps, u_vector, Parity, WaveKind,
};
use bicwave::{EmitterArray, QuadratureConfig, WaveguideModel};
use proptest::prelude::*;

fn quad() -> QuadratureConfig {
    QuadratureConfig::default()
}

#[test]
fn oracle_overlap_converges_with_momentum_grid() {
    let m = WaveguideModel::new(1.0, 0.01).unwrap();
    let overlaps: Vec<f64> = [500, 1000, 2000, 4000]
        .iter()
        .map(|&nk| {
            oracle::run(&m, 5.0, &OracleSetup::new(3, 1, 2, nk), &quad())
                .unwrap()
                .0
                .overlap_with_analytic
        })
        .collect();
    for w in overlaps.windows(2) {
        assert!(w[1] >= w[0] - 1e-3, "{overlaps:?}");
    }
    assert!(overlaps[3] >= 0.99);
}

#[test]
fn oracle_field_has_node_at_dark_emitter() {
    let m = WaveguideModel::new(1.0, 0.01).unwrap();
    let d = 5.0;
    let (_, cand, ham) = oracle::run(&m, d, &OracleSetup::new(3, 1, 2, 2000), &quad()).unwrap();
    let xs: Vec<f64> = (0..=400).map(|i| -5.0 + 20.0 * i as f64 / 400.0).collect();
    let field = ham.field_profile(&cand.state, &xs);
    let max = field.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let at_dark = ham.field_profile(&cand.state, &[d])[0].norm();
    assert!(at_dark <= 0.05 * max, "node depth {}", at_dark / max);
}

#[test]
fn pole_field_vanishes_at_dark_emitter() {
    let m = WaveguideModel::new(1.0, 0.1).unwrap();
    let cat = classify_waves(3, 1, 1e-3).unwrap();
    let st = assemble(&m, 5.0, 1, cat.wave(2).unwrap(), &GridSpec::default(), &quad()).unwrap();
    let mid = st.xi_pole[st.grid.emitter_index[1]];
    let max = st.xi_pole.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    assert!(mid.abs() <= 1e-12 * max);
}

#[test]
fn multimerized_states_are_bound_states() {
    let m = WaveguideModel::new(1.0, 0.1).unwrap();
    let d = 5.0;
    let e = m.resonant_energy(d, 1);
    let b2 = beta_j(&m, d, e, 2, &quad()).unwrap().abs();
    for (h, r, j_h) in [(3, 2, 2), (4, 2, 1), (3, 3, 2), (5, 4, 4)] {
        let p = multimer::plan(h, r, j_h).unwrap();
        let j = p.target_j.unwrap();
        assert!(exact_indices(p.n, 1).contains(&j));
        let eps = epsilon_for_bic(&m, d, 1, p.n, j, &quad()).unwrap();
        assert!(!eps.approximate);
        let arr = EmitterArray::new(p.n, d, eps.value).unwrap();
        let bundle = propagator_inv(&m, &arr, e, &quad()).unwrap();
        let a = linalg::real_to_complex(&p.assembled);
        let res = linalg::norm(&linalg::matvec(&bundle.g_inv, &a));
        assert!(res <= 10.0 * b2, "n={} residual {res:e}", p.n);
    }
}

#[test]
fn rank_one_limit() {
    let n = 30;
    for nu in [1u32, 2] {
        let cats: Vec<_> = [1e-2, 1e-3, 1e-4].iter().map(|&b| classify_waves(n, nu, b).unwrap()).collect();
        for j in 1..=n {
            let ov: Vec<f64> = cats.iter().map(|c| c.wave(j).unwrap().closed_form_overlap).collect();
            if cats[0].wave(j).unwrap().kind == WaveKind::Superradiant {
                continue;
            }
            assert!(ov[1] >= ov[0] - 1e-9 && ov[2] >= ov[1] - 1e-9, "nu={nu} j={j} {ov:?}");
        }
        let u = u_vector(nu, n);
        let sr = cats[2].superradiant();
        let ov = linalg::hdot(&sr.amplitudes, &linalg::real_to_complex(&u)).norm() / (n as f64).sqrt();
        assert!(ov > 0.999, "superradiant overlap with u/sqrt(n): {ov}");
    }
}

#[test]
fn imaginary_parts() {
    let n = 30;
    for nu in [1u32, 2] {
        let mut prev = f64::INFINITY;
        for b1 in [1e-2, 1e-3, 1e-4] {
            let cat = classify_waves(n, nu, b1).unwrap();
            let sr = cat.superradiant();
            assert!((sr.chi.im - n as f64).abs() < 0.05 * n as f64, "Im chi = {}", sr.chi.im);
            let worst = cat
                .waves
                .iter()
                .filter(|w| w.kind == WaveKind::Deformed)
                .map(|w| w.chi.im.abs())
                .fold(0.0, f64::max);
            assert!(worst < prev, "nu={nu} b1={b1}: {worst} !< {prev}");
            prev = worst;
            for w in cat.waves.iter().filter(|w| w.kind == WaveKind::Exact) {
                assert!(w.chi.im.abs() <= 1e-12);
                assert!((w.chi.re + b1 * w.chi_laplacian).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn deformed_projection_on_u_scales_with_b1() {
    for nu in [1u32, 2] {
        let proj = |b1: f64| -> f64 {
            classify_waves(100, nu, b1)
                .unwrap()
                .waves
                .iter()
                .filter(|w| w.kind == WaveKind::Deformed)
                .map(|w| w.resonance_overlap.norm())
                .fold(0.0, f64::max)
        };
        let p: Vec<f64> = [1e-2, 1e-3, 1e-4].iter().map(|&b| proj(b)).collect();
        assert!(p[0] > 0.0);
        for (i, w) in p.windows(2).enumerate() {
            let ratio = w[0] / w[1];
            assert!((ratio - 10.0).abs() < 0.5, "nu={nu} step {i}: ratio {ratio} {p:?}");
        }
    }
}

#[test]
fn deformed_waves_have_definite_parity_at_n100() {
    for nu in [1u32, 2] {
        let cat = classify_waves(100, nu, 1e-3).unwrap();
        for w in cat.waves.iter().filter(|w| w.kind == WaveKind::Deformed) {
            assert_eq!(w.parity, Parity::of_index(w.j));
        }
    }
}

#[test]
fn resonance_overlap_pattern() {
    let n = 50;
    let even: Vec<f64> = resonance_overlaps(n, 2).into_iter().step_by(2).map(f64::abs).collect();
    assert!(even.windows(2).all(|w| w[1] < w[0]));
    let odd: Vec<f64> = resonance_overlaps(n, 1).into_iter().skip(1).step_by(2).map(f64::abs).collect();
    assert!(odd.windows(2).all(|w| w[1] > w[0]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn catalog_invariants(n in 2usize..40, nu in 1u32..5, log_b1 in -4.0f64..-1.0, sign in prop::bool::ANY) {
        let b1 = if sign { 1.0 } else { -1.0 } * 10f64.powf(log_b1);
        let cat = classify_waves(n, nu, b1).unwrap();
        prop_assert_eq!(cat.count(WaveKind::Exact), n / 2);
        prop_assert_eq!(cat.count(WaveKind::Deformed), n.div_ceil(2) - 1);
        for w in &cat.waves {
            let norm = linalg::norm(&w.amplitudes);
            prop_assert!((norm - 1.0).abs() < 1e-10);
            if w.kind == WaveKind::Exact {
                prop_assert!(w.resonance_overlap.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn plans_are_eigenvectors(n in 3usize..120, nu in 1u32..5) {
        for p in multimer::enumerate(n).unwrap() {
            let rep = multimer::verify(&p, nu);
            prop_assert!(rep.eigen_residual <= 1e-12);
            prop_assert_eq!(rep.matched_j, p.target_j);
        }
    }
}
