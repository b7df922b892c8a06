//! Acceptance suite: one numbered criterion per function, one PASS/FAIL line each.
//!
//! Run everything with `cargo test --release -p soliton-lab-core --test acceptance`; pass
//! criterion numbers (`-- 3 7`) to run a subset. The process exits non-zero if any criterion
//! fails or overruns its time budget.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use soliton_lab::dynamics::*;
use soliton_lab::estimates::*;
use soliton_lab::field::{norm, ComplexField, NormKind, SpatialGrid};
use soliton_lab::numerics::{bisect, linear_fit};
use soliton_lab::potentials::Potential;
use soliton_lab::scattering::*;
use soliton_lab::soliton::{continue_branch, initial_guess, BranchOptions, NonlinearityParams};
use soliton_lab::spectrum::*;

type Outcome = Result<(bool, String), Box<dyn std::error::Error>>;

fn quintic() -> NonlinearityParams {
    NonlinearityParams::new(5.0, 1.0).expect("valid nonlinearity")
}

fn gaussian(grid: SpatialGrid, c: f64, w: f64, xi: f64) -> ComplexField {
    ComplexField::from_fn(grid, |x| {
        C::from_polar((-(x - c).powi(2) / (2.0 * w * w)).exp(), xi * x)
    })
    .unwrap()
}

fn c1_zero_potential() -> Outcome {
    let zero = Potential::zero();
    let ks = [0.3, 1.0, 2.5, 7.0];
    let xs = [-12.0, -3.0, 0.0, 0.7, 5.0, 20.0];
    let mut worst = 0.0f64;
    for &k in &ks {
        for kk in [C::new(k, 0.0), C::new(0.0, k)] {
            let p = JostProfile::solve(&zero, kk)?;
            for &x in &xs {
                let ((m1, d1), (m2, d2)) = (p.m1(x), p.m2(x));
                worst = worst
                    .max((m1 - 1.0).norm())
                    .max((m2 - 1.0).norm())
                    .max(d1.norm())
                    .max(d2.norm());
            }
        }
    }
    let sd = scattering_coefficients(&JostSolution::solve_symmetric(&zero, &ks)?)?;
    for i in 0..sd.k.len() {
        worst = worst
            .max((sd.t[i] - 1.0).norm())
            .max(sd.r1[i].norm())
            .max(sd.r2[i].norm());
    }
    let mut kernel = 0.0f64;
    for &k in &ks {
        for side in [Side::PlusI0, Side::MinusI0] {
            let kern = ResolventKernel::new(&zero, k * k, side, &[])?;
            let kk = if side == Side::PlusI0 { k } else { -k };
            for &x in &xs {
                for &y in &[-1.0, 0.0, 2.5] {
                    let exact = C::from_polar(1.0, kk * f64::abs(x - y)) / C::new(0.0, 2.0 * kk);
                    kernel = kernel.max((kern.sample(x, y).value - exact).norm());
                }
            }
        }
        let kern = ResolventKernel::new(&zero, -k * k, Side::Negative, &[])?;
        for &x in &xs {
            for &y in &[-1.0, 0.0, 2.5] {
                let exact = (-k * f64::abs(x - y)).exp() / (-2.0 * k);
                kernel = kernel.max((kern.sample(x, y).value - exact).norm());
            }
        }
    }
    Ok((
        worst < 1e-10 && kernel < 1e-10,
        format!("max |m-1|, |T-1|, |R| = {worst:.2e}; kernel error {kernel:.2e}"),
    ))
}

fn c2_flux() -> Outcome {
    let ks: Vec<f64> = (0..64).map(|i| 0.2 + i as f64 * 9.8 / 63.0).collect();
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, v) in [
        ("-1.5 sech^2", Potential::default_well()),
        ("gaussian(-1,1)", Potential::gaussian(-1.0, 1.0)),
    ] {
        let sd = scattering_coefficients(&JostSolution::solve_symmetric(&v, &ks)?)?;
        let d = sd.unitarity_defect();
        ok &= d < 1e-6 && sd.excluded.is_empty();
        parts.push(format!("{name}: {d:.2e}"));
    }
    Ok((
        ok,
        format!("max ||T|^2 + |R1|^2 - 1| over 64 k: {}", parts.join(", ")),
    ))
}

fn c3_eigenvalues() -> Outcome {
    let grid = SpatialGrid::symmetric(25.0, 512)?;
    let mut parts = Vec::new();
    let mut ok = true;
    // Smooth wells only: the Fourier matrix converges at O(dx^2) across the exp_decay cusp.
    for (name, v) in [
        ("sech2", Potential::default_well()),
        ("gaussian(-1,1)", Potential::gaussian(-1.0, 1.0)),
        ("gaussian(-2,0.5)", Potential::gaussian(-2.0, 0.5)),
    ] {
        let states = find_bound_states(&v, &grid)?;
        let dense = DenseSpectrum::new(&grid, &v)?;
        let d = (states[0].e_star - dense.values[0]).abs();
        ok &= d < 1e-6;
        parts.push(format!("{name} {d:.1e}"));
    }
    // -exp(-2|x|): even ground state solves J'_kappa(1) = 0.
    let ex = find_bound_states(
        &Potential::exp_decay(-1.0, 2.0),
        &SpatialGrid::symmetric(50.0, 1024)?,
    )?;
    let d_exp = (ex[0].e_star + 0.3900100533985775f64.powi(2)).abs();
    ok &= d_exp < 1e-8;
    parts.push(format!("exp_decay vs Bessel root {d_exp:.1e}"));
    let (v0, a) = (2.0f64, 1.0f64);
    let kappa = bisect(
        |k: f64| {
            let q = (v0 - k * k).sqrt();
            q * (q * a).tan() - k
        },
        1e-9,
        v0.sqrt() - 1e-12,
        1e-15,
    )?;
    let sq = find_bound_states(
        &Potential::square_well(-v0, a),
        &SpatialGrid::symmetric(40.0, 1024)?,
    )?;
    let d = (sq[0].e_star + kappa * kappa).abs();
    ok &= d < 1e-8;
    Ok((
        ok,
        format!(
            "Wronskian vs dense: {}; square well vs transcendental root {d:.1e}",
            parts.join(", ")
        ),
    ))
}

fn c4_born_jost() -> Outcome {
    let v = Potential::default_well();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let pts: Vec<(f64, f64)> = (0..20)
        .map(|_| (rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)))
        .collect();
    let (mut err, mut ratio) = (0.0f64, 0.0f64);
    for side in [Side::PlusI0, Side::MinusI0] {
        let kern = ResolventKernel::new(&v, 25.0, side, &[])?;
        for &(x, y) in &pts {
            let b = born_kernel(&v, x, y, 25.0, side, 12)?;
            let j = kern.sample(x, y).value;
            err = err.max((b.value - j).norm() / j.norm());
            ratio = ratio.max(b.decay_ratio());
        }
    }
    Ok((
        err < 1e-6 && ratio <= 0.5,
        format!("max relative kernel error {err:.2e}, term decay ratio {ratio:.3}"),
    ))
}

fn c5_decay() -> Outcome {
    let grid = SpatialGrid::symmetric(800.0, 16384)?;
    let d = SpectralDecomposition::with_ground_state(&Potential::default_well(), &grid)?;
    let ts: Vec<f64> = (0..12).map(|i| 5.0 * 10f64.powf(i as f64 / 11.0)).collect();
    let mut slopes = Vec::new();
    for (c, w, xi) in [(0.0, 1.0, 0.0), (-4.0, 1.5, 0.5), (2.0, 2.0, 1.0)] {
        slopes.push(
            dispersive_decay_probe(
                &d,
                &gaussian(grid, c, w, xi),
                &ts,
                0.02,
                SplitScheme::Yoshida4,
            )?
            .slope,
        );
    }
    let ok = slopes.iter().all(|s| (s + 0.5).abs() <= 0.05);
    Ok((
        ok,
        format!("slopes of log ||exp(-itL)Qf||_inf on [5, 50]: {slopes:.3?}"),
    ))
}

fn c6_smoothing() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    // frequency ensemble: fast packets need a wide box, a strong layer, and a time step
    // that resolves the ~1/(2N) crossing time at a fixed point
    let wide = SpatialGrid::symmetric(200.0, 8192)?;
    let dw = SpectralDecomposition::with_ground_state(&Potential::default_well(), &wide)?;
    let cw = HarnessConfig {
        horizon: 10.0,
        dt: 0.01,
        dt_store: 0.01,
        sponge: Some(Sponge {
            strength: 40.0,
            fraction: 0.15,
        }),
        window: None,
    };
    let base = GaussianPacket {
        center: 0.0,
        width: 1.0,
        xi: 0.0,
    };
    let rows = local_smoothing_frequency_probe(&dw, &base, &[8.0, 16.0, 32.0], &cw)?;
    for w in rows.windows(2) {
        let l2 = w[1].l2_ratio / w[0].l2_ratio;
        let hh = w[1].h_half_ratio / w[0].h_half_ratio;
        ok &= l2 >= 2f64.powf(0.4) && (hh - 1.0).abs() < 0.1;
        notes.push(format!(
            "N {}->{}: L2 x{l2:.3}, H1/2 x{hh:.3}",
            w[0].frequency, w[1].frequency
        ));
    }
    // horizon doubling, ensemble 50, T = 40 -> 80
    let grid = SpatialGrid::default_box();
    let d = SpectralDecomposition::with_ground_state(&Potential::default_well(), &grid)?;
    let cfg = HarnessConfig::default();
    let data = GaussianEnsemble::new(50, 2026).fields(grid)?;
    let sources = SourceEnsemble::new(50, 2026).packets()?;
    let mut reports = vec![verify_strichartz(&d, &data, &cfg)?];
    let ls = verify_local_smoothing(&d, &data, &cfg)?;
    reports.extend([ls.weighted, ls.derivative]);
    let rt = verify_retarded(&d, &sources, &cfg, true)?;
    reports.push(rt.weighted);
    reports.extend(rt.unweighted);
    reports.push(verify_christ_kiselev(&d, &sources, &cfg)?);
    for r in &reports {
        ok &= r.stability < 1.05 && r.empirical_c.is_finite();
        notes.push(format!(
            "{} C {:.3} stab {:.4}",
            r.lemma_id, r.empirical_c, r.stability
        ));
    }
    Ok((ok, notes.join("; ")))
}

fn c7_branch() -> Outcome {
    let grid = SpatialGrid::symmetric(40.0, 1024)?;
    let v = Potential::default_well();
    let b = ground_state(&v, &grid)?;
    let br = continue_branch(
        &v,
        &b,
        quintic(),
        (b.e_star + 1e-4, b.e_star + 1e-2),
        13,
        &BranchOptions::default(),
    )?;
    let xs: Vec<f64> = br.e_samples.iter().map(|e| (e - b.e_star).ln()).collect();
    let ys: Vec<f64> = br.phi.iter().map(|f| norm(f, NormKind::L2).ln()).collect();
    let slope = linear_fit(&xs, &ys).ok_or("degenerate fit")?.slope;
    let cs: Vec<f64> = (0..br.len())
        .map(|i| norm(&(&br.phi1[i] - &b.phi_star), NormKind::H1) / (br.e_samples[i] - b.e_star))
        .collect();
    let (lo, hi) = cs
        .iter()
        .fold((f64::MAX, 0.0f64), |(l, h), &c| (l.min(c), h.max(c)));
    let ok = (slope - 0.25).abs() <= 0.02 && hi / lo < 1.2;
    Ok((
        ok,
        format!("slope {slope:.4}; ||phi_1 - phi*||_H1 / |E - E*| in [{lo:.4}, {hi:.4}]"),
    ))
}

fn c8_conservation() -> Outcome {
    let grid = SpatialGrid::symmetric(60.0, 2048)?;
    let v = Potential::default_well();
    let p = quintic();
    let b = ground_state(&v, &grid)?;
    let e0 = b.e_star + 1e-2;
    let br = continue_branch(
        &v,
        &b,
        p,
        (b.e_star + 5e-3, b.e_star + 2e-2),
        6,
        &BranchOptions::default(),
    )?;
    let phi = ComplexField::from_real(grid, &br.interpolant()?.eval(e0)?.phi)?;
    let d = SpectralDecomposition::with_bound(&v, &grid, Some(b));
    let bump = Perturbation::Gaussian {
        amplitude: 0.05,
        center: 1.0,
        width: 1.0,
        xi: 0.7,
        project_q: true,
    }
    .profile(&d)?;
    let mut state = NLSState::new(&phi + &bump, &v, p)?;
    let mut stepper = NlsStepper::new(&grid, &v, p, 1e-3, None)?;
    let (mut dn, mut dh) = (0.0f64, 0.0f64);
    for k in 1..=50_000 {
        stepper.step(&mut state)?;
        if k % 500 == 0 {
            let dr = stepper.drift(&state, state.u.values());
            dn = dn.max(dr.mass);
            dh = dh.max(dr.energy);
        }
    }
    Ok((
        dn < 1e-8 && dh < 1e-6,
        format!("max relative drift on [0, 50]: N {dn:.2e}, H {dh:.2e}"),
    ))
}

fn c9_persistence() -> Outcome {
    let grid = SpatialGrid::symmetric(40.0, 1024)?;
    let v = Potential::default_well();
    let e_star = ground_state(&v, &grid)?.e_star;
    let e0 = e_star + 1e-2;
    let mut cfg = EvolutionConfig::new(e0, 50.0);
    cfg.table_window = (0.5, 2.0);
    cfg.table_samples = 12;
    cfg.snapshot_every = 50.0;
    let exp = Experiment::prepare(&v, &grid, quintic(), cfg)?;
    let traj = exp.run(None)?;
    let (sv, se) = (traj.sup_v_h1(), traj.sup_e_deviation(e0));
    Ok((
        sv < 1e-6 && se < 1e-8,
        format!("sup ||v||_H1 {sv:.2e}, sup |E - E0| {se:.2e}"),
    ))
}

struct StabilityRun {
    eps: f64,
    sum_m: f64,
    e_cauchy: f64,
    e_plus_gap: f64,
    r100: f64,
    r200: f64,
}

fn stability_run(eps: f64) -> Result<StabilityRun, Box<dyn std::error::Error>> {
    let grid = SpatialGrid::symmetric(200.0, 4096)?;
    let v = Potential::default_well();
    let p = quintic();
    let bound = ground_state(&v, &grid)?;
    // the soliton carries 80% of the H^1 budget; the amplitude law fixes its energy
    let s_ref = 1e-6;
    let n_ref = norm(
        &initial_guess(bound.e_star + s_ref, &bound, p)?,
        NormKind::H1,
    );
    let e0 = bound.e_star + s_ref * (0.8 * eps / n_ref).powi(4);
    let shape = |amplitude| Perturbation::Gaussian {
        amplitude,
        center: 0.0,
        width: 2.0,
        xi: 1.0,
        project_q: true,
    };
    let mut cfg = EvolutionConfig::new(e0, 400.0);
    cfg.perturbation = shape(1.0);
    cfg.sponge = Some(Sponge::default());
    cfg.source_window = Some(60.0);
    let mut exp = Experiment::prepare(&v, &grid, p, cfg)?;
    // total initial H^1 norm eps: ||phi + a g||_H1 = eps with ||g||_H1 = 1
    let phi = ComplexField::from_real(grid, &exp.table.eval(e0)?.phi)?;
    let g = exp.config.perturbation.profile(&exp.decomp)?;
    let h1 = |f: &ComplexField| norm(f, NormKind::H1).powi(2);
    let b = 0.25 * (h1(&(&phi + &g)) - h1(&(&phi - &g)));
    let a = -b + (b * b - (h1(&phi) - eps * eps)).sqrt();
    exp.config.perturbation = shape(a);
    let traj = exp.run(None)?;
    let asym = extract_asymptotics(&exp, &traj, &AsymptoticOptions::default())?;
    let at = |t: f64| {
        asym.scattering_residual
            .iter()
            .min_by(|x, y| (x.t - t).abs().total_cmp(&(y.t - t).abs()))
            .map(|s| s.residual)
            .unwrap_or(f64::NAN)
    };
    Ok(StabilityRun {
        eps,
        sum_m: traj.ledger.sum(),
        e_cauchy: asym.e_cauchy,
        e_plus_gap: (asym.e_plus - exp.e_star()).abs(),
        r100: at(100.0),
        r200: at(200.0),
    })
}

fn c10_stability() -> Outcome {
    let runs = [0.02, 0.04, 0.08].map(stability_run);
    let mut rs = Vec::new();
    for r in runs {
        rs.push(r?);
    }
    let cs: Vec<f64> = rs.iter().map(|r| r.sum_m / r.eps).collect();
    let (lo, hi) = cs
        .iter()
        .fold((f64::MAX, 0.0f64), |(l, h), &c| (l.min(c), h.max(c)));
    let mut ok = hi / lo <= 2.0;
    let mut notes = vec![format!("sum M / eps in [{lo:.3}, {hi:.3}]")];
    for r in &rs {
        // C' = 1
        ok &= r.e_cauchy < 1e-3 && r.e_plus_gap <= r.eps && r.r200 < r.r100;
        notes.push(format!(
            "eps {}: |E(T)-E(T/2)| {:.1e}, |E+ - E*| {:.2e}, residual(100) {:.2e} > residual(200) {:.2e}",
            r.eps, r.e_cauchy, r.e_plus_gap, r.r100, r.r200
        ));
    }
    Ok((ok, notes.join("; ")))
}

fn c11_modulation() -> Outcome {
    let grid = SpatialGrid::symmetric(40.0, 1024)?;
    let v = Potential::default_well();
    let p = quintic();
    let bound = ground_state(&v, &grid)?;
    let e0 = bound.e_star + 1e-2;
    let br = continue_branch(
        &v,
        &bound,
        p,
        (bound.e_star + 2e-3, bound.e_star + 4e-2),
        16,
        &BranchOptions::default(),
    )?;
    let table = br.interpolant()?;
    let phi = table.eval(e0)?.phi;
    let d = SpectralDecomposition::with_bound(&v, &grid, Some(bound));
    let bump = Perturbation::Gaussian {
        amplitude: 1.0,
        center: 1.0,
        width: 1.0,
        xi: 0.7,
        project_q: true,
    }
    .profile(&d)?;

    let g3 = |eps: f64| {
        let ve: Vec<C> = bump.values().iter().map(|z| z * eps).collect();
        let g = nonlinear_remainder(&phi, &ve, p);
        (g.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.dx()).sqrt()
    };
    let quad = g3(1e-2) / g3(1e-3) / 100.0;

    let u0 = &ComplexField::from_real(grid, &phi)? + &bump.scale_real(0.05);
    let frames =
        |dt: f64, t_mid: f64| -> Result<Vec<ModulationState>, Box<dyn std::error::Error>> {
            let mut state = NLSState::new(u0.clone(), &v, p)?;
            let mut stepper = NlsStepper::new(&grid, &v, p, dt, None)?;
            let n_mid = (t_mid / dt).round() as usize;
            let mut ms = decompose(&state.u, e0, 0.0, &table)?;
            let mut out = Vec::new();
            for k in 1..=n_mid + 1 {
                stepper.step(&mut state)?;
                ms = decompose(&state.u, ms.e, ms.theta, &table)?;
                if k + 1 >= n_mid {
                    out.push(ms.clone());
                }
            }
            Ok(out)
        };
    let residual = |dt: f64| -> Result<f64, Box<dyn std::error::Error>> {
        let f = frames(dt, 0.5)?;
        let st = modulation_rates(&f[1], &table, p)?;
        Ok(residual_eq_v(&f[0], &f[1], &f[2], &st, &v, dt)?)
    };
    let (r1, r2) = (residual(4e-3)?, residual(2e-3)?);
    let order = (r1 / r2).log2();
    let f = frames(1e-3, 1.0)?;
    let st = modulation_rates(&f[1], &table, p)?;
    let fd = (f[2].e - f[0].e) / 2e-3;
    let rate = (fd - st.e_dot).abs() / st.e_dot.abs();
    let ok = (quad - 1.0).abs() < 0.05 && (order - 2.0).abs() < 0.2 && rate < 0.05;
    Ok((ok, format!(
        "g3 scaling / eps^2 {quad:.4}; remainder residual order {order:.3}; finite-difference dE/dt off by {:.2}%",
        100.0 * rate
    )))
}

fn main() -> ExitCode {
    let criteria: [(&str, u64, fn() -> Outcome); 11] = [
        ("zero-potential identities", 5, c1_zero_potential),
        ("flux conservation", 30, c2_flux),
        ("eigenvalue oracles", 60, c3_eigenvalues),
        ("Born/Jost cross-validation", 60, c4_born_jost),
        ("dispersive decay exponent", 300, c5_decay),
        (
            "local smoothing gain and horizon stability",
            1800,
            c6_smoothing,
        ),
        ("branch scaling", 300, c7_branch),
        ("conservation", 600, c8_conservation),
        ("soliton persistence", 600, c9_persistence),
        ("asymptotic stability sweep", 3600, c10_stability),
        ("modulation consistency", 600, c11_modulation),
    ];
    let wanted: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !wanted.is_empty() && !wanted.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let in_budget = elapsed <= Duration::from_secs(*budget);
        let (ok, detail) = match outcome {
            Ok((ok, detail)) => (ok && in_budget, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {n:>2} {} {name}: {detail} [{:.1} s, budget {budget} s]",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
