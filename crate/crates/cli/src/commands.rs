use std::path::PathBuf;

use bicwave::bic::{assemble, BicState};
use bicwave::multimer::{self, verify};
use bicwave::oracle::{self, OracleSetup};
use bicwave::selfenergy::{beta_vector, sigma_contour};
use bicwave::waves::{classify_waves, exact_indices, physical_catalog, WaveCatalog, WaveKind};
use bicwave::EmitterArray;
use rayon::prelude::*;

use crate::config::{EnergySpec, RunConfig};
use crate::output::{num, opt, write_file, Table};
use crate::svg::Plot;
use crate::CliError;

type Written = Vec<PathBuf>;

fn catalog(cfg: &RunConfig) -> Result<WaveCatalog, CliError> {
    Ok(match cfg.b1_override {
        Some(b1) => classify_waves(cfg.n, cfg.nu, b1)?,
        None => physical_catalog(&cfg.model()?, cfg.d, cfg.nu, cfg.n, &cfg.quad())?,
    })
}

pub fn spectrum(cfg: &RunConfig) -> Result<Written, CliError> {
    let cat = catalog(cfg)?;
    let hash = cfg.hash();
    let stem = format!("waves_n{}_nu{}", cfg.n, cfg.nu);
    let mut waves = Table::new(&[
        "j",
        "kind",
        "parity",
        "chi_laplacian",
        "chi_re",
        "chi_im",
        "resonance_overlap",
        "closed_form_overlap",
        "deformation_norm",
        "epsilon",
    ]);
    let mut amps = Table::new(&["j", "l", "re", "im"]);
    for w in &cat.waves {
        waves.push(vec![
            w.j.to_string(),
            w.kind.label().into(),
            w.parity.label().into(),
            num(w.chi_laplacian),
            num(w.chi.re),
            num(w.chi.im),
            num(w.resonance_overlap.norm()),
            num(w.closed_form_overlap),
            opt(w.deformation_norm()),
            opt(cat.epsilon_values[w.j - 1]),
        ]);
        for (l, a) in w.amplitudes.iter().enumerate() {
            amps.push(vec![w.j.to_string(), (l + 1).to_string(), num(a.re), num(a.im)]);
        }
    }
    println!(
        "n={} nu={} b1={:.6e}: {} exact, {} deformed, superradiant j={}",
        cat.n,
        cat.nu,
        cat.b1,
        cat.count(WaveKind::Exact),
        cat.count(WaveKind::Deformed),
        cat.superradiant().j
    );
    let mut out = vec![
        waves.write(&cfg.output_dir, &format!("{stem}.csv"), &hash)?,
        amps.write(&cfg.output_dir, &format!("{stem}_amplitudes.csv"), &hash)?,
    ];
    if cfg.svg {
        let mut plot = Plot::new(&format!("chi, n={} nu={}", cat.n, cat.nu), "j", "Re chi");
        for kind in [WaveKind::Exact, WaveKind::Deformed, WaveKind::Superradiant] {
            let pts = cat.waves.iter().filter(|w| w.kind == kind).map(|w| (w.j as f64, w.chi.re)).collect();
            plot = plot.markers(kind.label(), pts);
        }
        out.push(write_file(&cfg.output_dir, &format!("{stem}.svg"), &plot.render())?);
    }
    Ok(out)
}

fn bic_state(cfg: &RunConfig, j: usize) -> Result<BicState, CliError> {
    if cfg.model_free {
        return Err(CliError::Config("bic needs the physical model; drop --model-free".into()));
    }
    let model = cfg.model()?;
    let quad = cfg.quad();
    let cat = physical_catalog(&model, cfg.d, cfg.nu, cfg.n, &quad)?;
    let wave = cat
        .wave(j)
        .ok_or_else(|| bicwave::Error::Domain(format!("wave index {j} outside 1..={}", cfg.n)))?;
    if wave.kind == WaveKind::Superradiant {
        return Err(bicwave::Error::Domain(format!(
            "wave j={j} is the superradiant wave at nu={}; it radiates and has no bound state",
            cfg.nu
        ))
        .into());
    }
    Ok(assemble(&model, cfg.d, cfg.nu, wave, &cfg.grid(), &quad)?)
}

fn write_bic(cfg: &RunConfig, st: &BicState) -> Result<Written, CliError> {
    let hash = cfg.hash();
    let stem = format!("bic_n{}_nu{}_j{}", st.n(), st.nu, st.j);
    let mut field = Table::new(&["x", "xi", "xi_pole", "xi_over_w"]);
    for i in 0..st.grid.len() {
        field.push(vec![
            num(st.grid.x[i]),
            num(st.xi[i]),
            num(st.xi_pole[i]),
            num(st.xi[i] / st.field_unit),
        ]);
    }
    let mut emitters = Table::new(&["l", "x", "amplitude", "jump", "jump_pole"]);
    for l in 0..st.n() {
        emitters.push(vec![
            (l + 1).to_string(),
            num(st.grid.x[st.grid.emitter_index[l]]),
            num(st.amplitudes[l]),
            num(st.jumps[l]),
            num(st.jumps_pole[l]),
        ]);
    }
    let mut summary = Table::new(&[
        "n",
        "nu",
        "j",
        "kind",
        "approximate",
        "energy",
        "epsilon",
        "norm_emitters",
        "norm_field",
        "pole_exterior",
        "jump_ratio_spread",
        "dark_jump_fraction",
        "leakage",
    ]);
    summary.push(vec![
        st.n().to_string(),
        st.nu.to_string(),
        st.j.to_string(),
        st.kind.label().into(),
        st.approximate.to_string(),
        num(st.energy),
        num(st.epsilon_required),
        num(st.norm_report.emitters),
        num(st.norm_report.field),
        num(st.pole_exterior()),
        num(st.jump_ratio_spread()),
        num(st.dark_jump_fraction()),
        num(st.leakage),
    ]);
    println!(
        "n={} nu={} j={} ({}): E={:.10} eps={:.10} emitter weight {:.4}",
        st.n(),
        st.nu,
        st.j,
        st.kind.label(),
        st.energy,
        st.epsilon_required,
        st.norm_report.emitters
    );
    let mut out = vec![
        field.write(&cfg.output_dir, &format!("{stem}_field.csv"), &hash)?,
        emitters.write(&cfg.output_dir, &format!("{stem}_emitters.csv"), &hash)?,
        summary.write(&cfg.output_dir, &format!("{stem}_summary.csv"), &hash)?,
    ];
    if cfg.svg {
        let unit = st.field_unit;
        let plot = Plot::new(&format!("n={} nu={} j={}", st.n(), st.nu, st.j), "x", "xi / W")
            .line("xi", st.grid.x.iter().zip(&st.xi).map(|(&x, &v)| (x, v / unit)).collect())
            .line("pole part", st.grid.x.iter().zip(&st.xi_pole).map(|(&x, &v)| (x, v / unit)).collect())
            .markers(
                "emitters",
                (0..st.n())
                    .map(|l| (st.grid.x[st.grid.emitter_index[l]], st.amplitudes[l] / unit))
                    .collect(),
            );
        out.push(write_file(&cfg.output_dir, &format!("{stem}.svg"), &plot.render())?);
    }
    Ok(out)
}

pub fn bic(cfg: &RunConfig) -> Result<Written, CliError> {
    let j = cfg.j.ok_or_else(|| CliError::Config("bic needs --j".into()))?;
    write_bic(cfg, &bic_state(cfg, j)?)
}

pub fn multimer(cfg: &RunConfig) -> Result<Written, CliError> {
    let exact = exact_indices(cfg.n, cfg.nu);
    let mut t = Table::new(&[
        "n",
        "h",
        "r",
        "j_h",
        "j_delta",
        "j_fig",
        "chi",
        "eigen_residual",
        "overlap_u",
        "base_overlap_u",
        "matched_overlap",
        "junction_residual",
        "degenerate_block",
        "valid",
    ]);
    let plans = multimer::enumerate(cfg.n)?;
    for p in &plans {
        let rep = verify(p, cfg.nu);
        let j_delta = p.target_j.expect("closed-form base");
        let j_fig = exact.iter().position(|&j| j == j_delta).map(|i| (i + 1).to_string());
        t.push(vec![
            p.n.to_string(),
            p.h.to_string(),
            p.r.to_string(),
            p.base_j.map(|j| j.to_string()).unwrap_or_default(),
            j_delta.to_string(),
            j_fig.unwrap_or_default(),
            num(p.chi),
            num(rep.eigen_residual),
            num(rep.overlap_with_u),
            num(rep.base_overlap_with_u),
            num(rep.matched_overlap),
            num(rep.junction_residual),
            rep.degenerate_block.to_string(),
            rep.is_valid(p).to_string(),
        ]);
    }
    println!("n={}: {} multimer plans", cfg.n, t.len());
    Ok(vec![t.write(&cfg.output_dir, &format!("multimer_n{}_nu{}.csv", cfg.n, cfg.nu), &cfg.hash())?])
}

pub fn selfenergy(cfg: &RunConfig) -> Result<Written, CliError> {
    let model = cfg.model()?;
    let quad = cfg.quad();
    let spec = cfg.energy.unwrap_or(EnergySpec::Resonant(cfg.nu));
    let e = spec.resolve(&model, cfg.d);
    let z = model.residue_weight(e)?;
    let w = model.field_weight(e)?;
    let k = model.k_of_energy(e)?;
    let betas = beta_vector(&model, cfg.d, e, cfg.n, &quad)?;
    let b0 = betas[0].value.abs();
    let mut t = Table::new(&["j", "beta", "bound", "b_over_z", "raw_imag", "error"]);
    for b in betas.iter() {
        t.push(vec![
            b.j.to_string(),
            num(b.value),
            num((-(b.j as f64) * model.mass() * cfg.d).exp() * b0),
            num(b.value / z),
            num(b.raw_imag),
            num(b.error),
        ]);
    }
    let sigma = sigma_contour(&model, &EmitterArray::new(cfg.n, cfg.d, e)?, e, &quad)?;
    let mut s = Table::new(&["i", "l", "re", "im"]);
    for i in 0..cfg.n {
        for l in 0..cfg.n {
            s.push(vec![(i + 1).to_string(), (l + 1).to_string(), num(sigma[(i, l)].re), num(sigma[(i, l)].im)]);
        }
    }
    println!("E={e:.10} k={k:.10} Z={z:.10e} W={w:.10e} beta_0={:.10e}", betas[0].value);
    let hash = cfg.hash();
    let stem = format!("selfenergy_n{}_d{}", cfg.n, cfg.d);
    Ok(vec![
        t.write(&cfg.output_dir, &format!("{stem}_beta.csv"), &hash)?,
        s.write(&cfg.output_dir, &format!("{stem}_sigma.csv"), &hash)?,
    ])
}

pub fn oracle(cfg: &RunConfig) -> Result<Written, CliError> {
    let j = cfg.j.ok_or_else(|| CliError::Config("oracle needs --j".into()))?;
    let model = cfg.model()?;
    let setup = OracleSetup {
        k_max: cfg.k_max,
        detuning_in_z: cfg.detuning,
        ..OracleSetup::new(cfg.n, cfg.nu, j, cfg.n_k)
    };
    let (rep, cand, _) = oracle::run(&model, cfg.d, &setup, &cfg.quad())?;
    let mut t = Table::new(&[
        "n",
        "nu",
        "j",
        "n_k",
        "k_max",
        "epsilon",
        "detuning",
        "energy",
        "emitter_weight",
        "overlap",
    ]);
    t.push(vec![
        rep.n.to_string(),
        rep.nu.to_string(),
        rep.j.to_string(),
        rep.n_k.to_string(),
        num(rep.k_max),
        num(rep.epsilon),
        num(rep.detuning),
        num(rep.candidate_energy),
        num(rep.emitter_weight),
        num(rep.overlap_with_analytic),
    ]);
    let mut a = Table::new(&["l", "re", "im"]);
    for (l, z) in cand.emitter_amplitudes.iter().enumerate() {
        a.push(vec![(l + 1).to_string(), num(z.re), num(z.im)]);
    }
    println!(
        "oracle n={} nu={} j={}: E={:.10} emitter weight {:.6} overlap {:.6}",
        rep.n, rep.nu, rep.j, rep.candidate_energy, rep.emitter_weight, rep.overlap_with_analytic
    );
    let hash = cfg.hash();
    let stem = format!("oracle_n{}_nu{}_j{}", rep.n, rep.nu, rep.j);
    Ok(vec![
        t.write(&cfg.output_dir, &format!("{stem}.csv"), &hash)?,
        a.write(&cfg.output_dir, &format!("{stem}_emitters.csv"), &hash)?,
    ])
}

enum Job {
    Catalog { n: usize, nu: u32 },
    Bic { n: usize, nu: u32, j: usize },
    Multimer { n: usize },
    Oracle,
}

/// Figure data: catalogs and bound states for n=30 at E_1 and E_2, the four
/// multimerized states and the oracle check.
pub fn figures(cfg: &RunConfig) -> Result<Written, CliError> {
    let mut jobs = vec![Job::Catalog { n: 30, nu: 1 }, Job::Catalog { n: 30, nu: 2 }];
    jobs.extend([1, 2, 28, 29].map(|j| Job::Bic { n: 30, nu: 1, j }));
    jobs.extend([2, 3, 29, 30].map(|j| Job::Bic { n: 30, nu: 2, j }));
    for (n, j_fig) in [(7usize, 2usize), (9, 1), (11, 3), (23, 8)] {
        jobs.push(Job::Multimer { n });
        jobs.push(Job::Bic { n, nu: 1, j: exact_indices(n, 1)[j_fig - 1] });
    }
    jobs.push(Job::Oracle);

    let base = RunConfig {
        j: None,
        b1_override: None,
        model_free: false,
        energy: None,
        ..cfg.clone()
    };
    let run = |job: &Job| -> Result<Written, CliError> {
        let dir = cfg.output_dir.join("figures");
        match *job {
            Job::Catalog { n, nu } => spectrum(&RunConfig { n, nu, output_dir: dir, ..base.clone() }),
            Job::Bic { n, nu, j } => {
                let c = RunConfig { n, nu, j: Some(j), output_dir: dir, ..base.clone() };
                write_bic(&c, &bic_state(&c, j)?)
            }
            Job::Multimer { n } => multimer(&RunConfig { n, nu: 1, output_dir: dir, ..base.clone() }),
            Job::Oracle => oracle(&RunConfig {
                n: 3,
                nu: 1,
                j: Some(2),
                gamma: 0.01,
                detuning: 0.0,
                output_dir: dir,
                ..base.clone()
            }),
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {} workers: {e}", cfg.jobs)))?;
    let results: Vec<Result<Written, CliError>> = pool.install(|| jobs.par_iter().map(run).collect());
    let mut out = Vec::new();
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}
