use std::path::PathBuf;

use serde_json::{json, Value};
use soliton_lab::dynamics::{extract_asymptotics, AsymptoticOptions, EvolutionConfig, Experiment};
use soliton_lab::estimates::{
    verify_christ_kiselev, verify_local_smoothing, verify_retarded, verify_strichartz,
    EstimateReport, GaussianEnsemble, HarnessConfig, SourceEnsemble,
};
use soliton_lab::field::{norm, ComplexField, NormKind};
use soliton_lab::numerics::linear_fit;
use soliton_lab::scattering::{
    check_nonresonance, log_k_grid, scattering_coefficients, JostSolution,
};
use soliton_lab::soliton::{continue_branch, BranchOptions};
use soliton_lab::spectrum::{
    dispersive_decay_probe, find_bound_states, ground_state, SpectralDecomposition, SplitScheme,
};
use soliton_lab::Complex64;

use crate::artifacts::{num, ArtifactWriter};
use crate::config::{Command, ExperimentConfig, Lemma};
use crate::error::{CliError, CliResult};
use crate::plot::{Axes, Series};

/// What a successful run produced.
#[derive(Debug)]
pub struct RunSummary {
    pub config_sha256: String,
    pub artifacts: Vec<PathBuf>,
}

/// Validate, execute the subcommand and write its artifacts.
pub fn run(cfg: &ExperimentConfig) -> CliResult<RunSummary> {
    cfg.validate()?;
    let hash = cfg.hash();
    let mut out = ArtifactWriter::new(&cfg.output_dir(), hash.clone(), cfg.seed())?;
    match cfg.command {
        Command::Scatter => scatter(cfg, &mut out)?,
        Command::Spectrum => spectrum(cfg, &mut out)?,
        Command::Branch => branch(cfg, &mut out)?,
        Command::Evolve => evolve(cfg, &mut out)?,
        Command::Verify => verify(cfg, &mut out)?,
    }
    Ok(RunSummary {
        config_sha256: hash,
        artifacts: out.written().to_vec(),
    })
}

fn c(z: Complex64) -> [String; 2] {
    [num(z.re), num(z.im)]
}

fn scatter(cfg: &ExperimentConfig, out: &mut ArtifactWriter) -> CliResult<()> {
    let v = cfg.potential()?;
    let s = cfg.file.scatter;
    let ks = log_k_grid(s.k_min, s.k_max, s.k_count);
    let sd = scattering_coefficients(&JostSolution::solve_symmetric(&v, &ks)?)?;
    let rows: Vec<Vec<String>> = (0..sd.k.len())
        .map(|i| {
            let mut r = vec![num(sd.k[i])];
            for z in [sd.w[i], sd.t[i], sd.r1[i], sd.r2[i]] {
                r.extend(c(z));
            }
            r.push(num(sd.t[i].norm_sqr() + sd.r1[i].norm_sqr()));
            r
        })
        .collect();
    out.csv(
        "scattering.csv",
        &[
            "k", "W_re", "W_im", "T_re", "T_im", "R1_re", "R1_im", "R2_re", "R2_im", "flux",
        ],
        &rows,
    )?;
    let nr = check_nonresonance(&v)?;
    out.json(
        "scattering.json",
        json!({
            "potential": cfg.file.potential.spec,
            "k_count": sd.k.len(),
            "unitarity_defect": sd.unitarity_defect(),
            "W0": [nr.w0.re, nr.w0.im],
            "resonant": nr.resonant,
        }),
    )?;
    let t2: Vec<(f64, f64)> =
        sd.k.iter()
            .zip(&sd.t)
            .map(|(k, t)| (*k, t.norm_sqr()))
            .collect();
    let r2: Vec<(f64, f64)> =
        sd.k.iter()
            .zip(&sd.r1)
            .map(|(k, r)| (*k, r.norm_sqr()))
            .collect();
    out.svg(
        "scattering.svg",
        &[Series::new("|T|^2", t2), Series::new("|R1|^2", r2)],
        &Axes {
            title: format!(
                "transmission and reflection, V = {}",
                cfg.file.potential.spec
            ),
            x_label: "k".into(),
            y_label: "probability".into(),
            x_log: true,
            ..Axes::default()
        },
    )
}

fn spectrum(cfg: &ExperimentConfig, out: &mut ArtifactWriter) -> CliResult<()> {
    let v = cfg.potential()?;
    let grid = cfg.grid()?;
    let states = find_bound_states(&v, &grid)?;
    let nr = check_nonresonance(&v)?;
    let eig: Vec<Value> = states
        .iter()
        .map(|b| json!({"E": b.e_star, "kappa": b.kappa_star, "residual": b.residual}))
        .collect();
    let mut body = json!({
        "potential": cfg.file.potential.spec,
        "eigenvalues": states.iter().map(|b| b.e_star).collect::<Vec<_>>(),
        "bound_states": eig,
        "W0": [nr.w0.re, nr.w0.im],
        "resonant": nr.resonant,
    });
    if let Some(b) = states.first() {
        let rows: Vec<Vec<String>> = (0..grid.n())
            .map(|j| vec![num(grid.x(j)), num(b.phi_star.values()[j].re)])
            .collect();
        out.csv("ground_state.csv", &["x", "phi"], &rows)?;
    }
    let s = &cfg.file.spectrum;
    if !s.decay_times.is_empty() {
        let d = SpectralDecomposition::new(&v, &grid)?;
        let f = ComplexField::from_fn(grid, |x| {
            let z = (x - s.decay_center) / s.decay_width;
            Complex64::from_polar((-0.5 * z * z).exp(), s.decay_xi * x)
        })?;
        let fit =
            dispersive_decay_probe(&d, &f, &s.decay_times, s.decay_dt, SplitScheme::Yoshida4)?;
        let rows: Vec<Vec<String>> = fit
            .times
            .iter()
            .zip(&fit.sup_norms)
            .map(|(t, m)| vec![num(*t), num(*m)])
            .collect();
        out.csv("decay.csv", &["t", "sup_norm"], &rows)?;
        out.svg(
            "decay.svg",
            &[Series::new(
                "||exp(-itL)Qf||_inf",
                fit.times
                    .iter()
                    .copied()
                    .zip(fit.sup_norms.iter().copied())
                    .collect(),
            )],
            &Axes {
                title: "dispersive decay".into(),
                x_label: "t".into(),
                y_label: "sup norm".into(),
                x_log: true,
                y_log: true,
                annotation: Some(format!("fitted slope {:.4}", fit.slope)),
            },
        )?;
        body["decay_slope"] = json!(fit.slope);
    }
    out.json("spectrum.json", body)
}

fn branch(cfg: &ExperimentConfig, out: &mut ArtifactWriter) -> CliResult<()> {
    let v = cfg.potential()?;
    let grid = cfg.grid()?;
    let p = cfg.params()?;
    let b = ground_state(&v, &grid)?;
    let s = cfg.file.branch;
    let side = p.side();
    let br = continue_branch(
        &v,
        &b,
        p,
        (
            b.e_star + side * s.offset_min,
            b.e_star + side * s.offset_max,
        ),
        s.samples,
        &BranchOptions::default(),
    )?;
    let mut rows = Vec::new();
    let (mut pts, mut lx, mut ly) = (Vec::new(), Vec::new(), Vec::new());
    let mut h1_ratio = Vec::new();
    for i in 0..br.len() {
        let off = (br.e_samples[i] - b.e_star).abs();
        let l2 = norm(&br.phi[i], NormKind::L2);
        let dist = norm(&(&br.phi1[i] - &b.phi_star), NormKind::H1);
        rows.push(vec![
            num(br.e_samples[i]),
            num(off),
            num(l2),
            num(norm(&br.phi[i], NormKind::H1)),
            num(dist / off),
            num(br.residuals[i]),
        ]);
        pts.push((off, l2));
        lx.push(off.ln());
        ly.push(l2.ln());
        h1_ratio.push(dist / off);
    }
    out.csv(
        "branch.csv",
        &[
            "E",
            "offset",
            "L2",
            "H1",
            "phi1_dist_over_offset",
            "residual",
        ],
        &rows,
    )?;
    let fit = linear_fit(&lx, &ly)
        .ok_or_else(|| CliError::Usage("branch needs two distinct energies".into()))?;
    let expected = 1.0 / (p.p - 1.0);
    out.json(
        "branch.json",
        json!({
            "E_star": b.e_star,
            "slope": fit.slope,
            "expected_slope": expected,
            "phi1_dist_over_offset": {
                "min": h1_ratio.iter().copied().fold(f64::INFINITY, f64::min),
                "max": h1_ratio.iter().copied().fold(0.0, f64::max),
            },
        }),
    )?;
    out.svg(
        "scaling.svg",
        &[Series::new("||phi_E||_L2", pts)],
        &Axes {
            title: "branch scaling".into(),
            x_label: "|E - E*|".into(),
            y_label: "||phi_E||_L2".into(),
            x_log: true,
            y_log: true,
            annotation: Some(format!(
                "fitted slope {:.4} (1/(p-1) = {expected:.4})",
                fit.slope
            )),
        },
    )
}

fn evolve(cfg: &ExperimentConfig, out: &mut ArtifactWriter) -> CliResult<()> {
    let v = cfg.potential()?;
    let grid = cfg.grid()?;
    let p = cfg.params()?;
    let s = &cfg.file.evolve;
    let e_star = ground_state(&v, &grid)?.e_star;
    let e0 = e_star + p.side() * s.e_offset;
    let mut ec = EvolutionConfig::new(e0, s.t_end);
    ec.theta0 = s.theta0;
    ec.perturbation = s.perturbation.clone();
    ec.dt = s.dt;
    ec.dt_store = s.dt_store;
    ec.sponge = s.sponge;
    ec.table_window = s.table_window;
    ec.table_samples = s.table_samples;
    ec.snapshot_every = s.snapshot_every;
    ec.source_window = s.asymptotics.then_some(s.source_window);
    let exp = Experiment::prepare(&v, &grid, p, ec)?;
    let traj = exp.run(None)?;

    let rows: Vec<Vec<String>> = traj
        .records
        .iter()
        .map(|r| {
            let mut row = vec![
                num(r.t),
                num(r.e),
                num(r.e_offset),
                num(r.theta),
                num(r.e_dot),
            ];
            row.extend(r.m.iter().map(|m| num(*m)));
            row.extend([
                num(r.mass_drift),
                num(r.energy_drift),
                num(r.v_h1),
                (r.boundary_warning as u8).to_string(),
            ]);
            row
        })
        .collect();
    out.csv(
        "ledger.csv",
        &[
            "t",
            "E",
            "E_offset",
            "theta",
            "E_dot",
            "M1",
            "M2",
            "M3",
            "M4",
            "M5",
            "M6",
            "mass_drift",
            "energy_drift",
            "v_H1",
            "boundary_warning",
        ],
        &rows,
    )?;
    let curves: Vec<Series> = (0..6)
        .map(|i| {
            Series::new(
                format!("M{}", i + 1),
                traj.records.iter().map(|r| (r.t, r.m[i])).collect(),
            )
        })
        .collect();
    out.svg(
        "ledger.svg",
        &curves,
        &Axes {
            title: "norm ledger".into(),
            x_label: "t".into(),
            y_label: "M_i(t)".into(),
            y_log: true,
            ..Axes::default()
        },
    )?;
    let frames: Vec<(f64, &ComplexField)> = traj.snapshots.iter().map(|s| (s.t, &s.w)).collect();
    out.frames("frames.bin", &frames)?;

    let last = traj.records.last().expect("at least one record");
    let mut summary = json!({
        "E_star": exp.e_star(),
        "E0": e0,
        "T": traj.t_end(),
        "E_final": last.e,
        "ledger": traj.ledger.m,
        "ledger_sum": traj.ledger.sum(),
        "sup_v_H1": traj.sup_v_h1(),
        "sup_E_deviation": traj.sup_e_deviation(e0),
        "max_mass_drift": traj.records.iter().map(|r| r.mass_drift.abs()).fold(0.0, f64::max),
        "max_energy_drift": traj.records.iter().map(|r| r.energy_drift.abs()).fold(0.0, f64::max),
        "sponge": traj.sponge,
    });
    if s.asymptotics {
        let a = extract_asymptotics(&exp, &traj, &AsymptoticOptions::default())?;
        let residual: Vec<Value> = a
            .scattering_residual
            .iter()
            .map(|r| json!([r.t, r.residual]))
            .collect();
        out.json(
            "asymptotics.json",
            json!({
                "E_plus": a.e_plus,
                "E_plus_minus_E_star": a.e_plus - exp.e_star(),
                "E_cauchy": a.e_cauchy,
                "w1_H1": norm(&a.w1, NormKind::H1),
                "psi_plus_H1": norm(&a.psi_plus, NormKind::H1),
                "v_plus_H1": norm(&a.v_plus, NormKind::H1),
                "trusted_until": a.trusted_until,
                "monotone": a.monotone,
                "sponge": a.sponge,
                "scattering_residual": residual,
            }),
        )?;
        summary["E_plus"] = json!(a.e_plus);
    }
    out.json("evolve.json", summary)
}

fn verify(cfg: &ExperimentConfig, out: &mut ArtifactWriter) -> CliResult<()> {
    let v = cfg.potential()?;
    let grid = cfg.grid()?;
    let s = cfg.file.verify;
    let hc = HarnessConfig {
        horizon: s.horizon,
        dt: s.dt,
        dt_store: s.dt_store,
        sponge: s.sponge,
        window: None,
    };
    let d = SpectralDecomposition::with_ground_state(&v, &grid)?;
    let seed = cfg.seed();
    let data = || -> CliResult<Vec<ComplexField>> {
        GaussianEnsemble::new(s.ensemble, seed)
            .packets()?
            .iter()
            .map(|p| p.sample(grid).map_err(CliError::from))
            .collect()
    };
    let reports: Vec<EstimateReport> = match s.lemma {
        Lemma::Strichartz => vec![verify_strichartz(&d, &data()?, &hc)?],
        Lemma::LocalSmoothing => {
            let r = verify_local_smoothing(&d, &data()?, &hc)?;
            vec![r.weighted, r.derivative]
        }
        Lemma::Retarded => {
            let r = verify_retarded(
                &d,
                &SourceEnsemble::new(s.ensemble, seed).packets()?,
                &hc,
                v.alpha_decay().is_some(),
            )?;
            std::iter::once(r.weighted).chain(r.unweighted).collect()
        }
        Lemma::ChristKiselev => vec![verify_christ_kiselev(
            &d,
            &SourceEnsemble::new(s.ensemble, seed).packets()?,
            &hc,
        )?],
    };
    let mut rows = Vec::new();
    for r in &reports {
        for (i, (a, b)) in r.ratios.iter().zip(&r.ratios_doubled).enumerate() {
            rows.push(vec![r.lemma_id.clone(), i.to_string(), num(*a), num(*b)]);
        }
    }
    out.csv(
        "verify.csv",
        &["family", "member", "ratio_T", "ratio_2T"],
        &rows,
    )?;
    let empirical = reports.iter().map(|r| r.empirical_c).fold(0.0, f64::max);
    let stability = reports.iter().map(|r| r.stability).fold(0.0, f64::max);
    out.json(
        "verify.json",
        json!({
            "lemma": s.lemma.id(),
            "ensemble_size": s.ensemble,
            "horizon": s.horizon,
            "empirical_C": empirical,
            "stability": stability,
            "families": reports,
        }),
    )
}
