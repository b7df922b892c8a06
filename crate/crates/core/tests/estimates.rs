use num_complex::Complex64 as C;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use soliton_lab::estimates::{
    christ_kiselev_ratio, local_smoothing_frequency_probe, mixed_norm, retarded_ratios,
    strichartz_ratio, verify_christ_kiselev, verify_local_smoothing, verify_local_smoothing_dual,
    verify_retarded, verify_strichartz, FieldHistory, GaussianEnsemble, GaussianPacket,
    HarnessConfig, MixedNormAccumulator, MixedNormSpec, Outer, SourceEnsemble,
};
use soliton_lab::field::{bracket, ComplexField, SpatialGrid};
use soliton_lab::potentials::Potential;
use soliton_lab::spectrum::{SpectralDecomposition, Sponge};
use soliton_lab::LabError;

const SPECS: [MixedNormSpec; 5] = [
    MixedNormSpec::LINF_X_L2_T,
    MixedNormSpec::L1_X_L2_T,
    MixedNormSpec::L4_T_LINF_X,
    MixedNormSpec::LINF_T_L2_X,
    MixedNormSpec::L2_T_L2_X,
];

fn random_history(n: usize, frames: usize, seed: u64) -> FieldHistory {
    let grid = SpatialGrid::symmetric(5.0, n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let frames = (0..frames)
        .map(|_| {
            let v = (0..n)
                .map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            ComplexField::new(grid, v).unwrap()
        })
        .collect();
    FieldHistory::uniform(grid, 0.0, 0.1, frames).unwrap()
}

/// Straightforward double loop over nodes and frames.
fn brute_force(h: &FieldHistory, s: MixedNormSpec) -> f64 {
    let g = h.grid();
    let (dx, dt) = (g.dx(), h.dt());
    let nt = h.len();
    let f = |k: usize, j: usize| {
        h.frames()[k].values()[j].norm() * bracket(g.x(j)).powf(s.weight_power)
    };
    let tw = |k: usize| if k == 0 || k == nt - 1 { 0.5 * dt } else { dt };
    let lp = |vals: &mut dyn Iterator<Item = (f64, f64)>, p: f64| {
        if p.is_infinite() {
            vals.map(|(_, v)| v).fold(0.0, f64::max)
        } else {
            vals.map(|(w, v)| w * v.powf(p)).sum::<f64>().powf(1.0 / p)
        }
    };
    match s.outer {
        Outer::X => {
            let mut inner =
                (0..g.n()).map(|j| (dx, lp(&mut (0..nt).map(|k| (tw(k), f(k, j))), s.inner_exp)));
            lp(&mut inner, s.outer_exp)
        }
        Outer::T => {
            let mut inner = (0..nt).map(|k| {
                (
                    tw(k),
                    lp(&mut (0..g.n()).map(|j| (dx, f(k, j))), s.inner_exp),
                )
            });
            lp(&mut inner, s.outer_exp)
        }
    }
}

#[test]
fn mixed_norm_matches_double_loop() {
    let h = random_history(64, 20, 7);
    for s in SPECS
        .into_iter()
        .chain(SPECS.map(|s| s.weighted(-1.5)))
        .chain([MixedNormSpec::LINF_X_L2_T.weighted(2.5)])
    {
        let (a, b) = (mixed_norm(&h, s).unwrap(), brute_force(&h, s));
        assert!((a - b).abs() <= 1e-12 * b, "{s:?}: {a:e} vs {b:e}");
    }
}

#[test]
fn separable_history_factorizes() {
    let grid = SpatialGrid::symmetric(10.0, 256).unwrap();
    let (dt, nt) = (0.05, 121);
    let a: Vec<f64> = (0..nt)
        .map(|k| (-(k as f64 * dt - 3.0).powi(2)).exp() + 0.1)
        .collect();
    let b = ComplexField::from_fn(grid, |x| C::from_polar((-x * x / 3.0).exp(), 2.0 * x)).unwrap();
    let frames = a.iter().map(|&ak| b.scale_real(ak)).collect();
    let h = FieldHistory::uniform(grid, 0.0, dt, frames).unwrap();
    let lp_t = |p: f64| -> f64 {
        if p.is_infinite() {
            return a.iter().copied().fold(0.0, f64::max);
        }
        let last = nt - 1;
        a.iter()
            .enumerate()
            .map(|(k, v)| if k == 0 || k == last { 0.5 } else { 1.0 } * dt * v.powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    };
    let lp_x = |p: f64| -> f64 {
        let m = b.values().iter().map(|z| z.norm());
        if p.is_infinite() {
            m.fold(0.0, f64::max)
        } else {
            (m.map(|v| v.powf(p)).sum::<f64>() * grid.dx()).powf(1.0 / p)
        }
    };
    for s in SPECS {
        let (tx, tt) = match s.outer {
            Outer::X => (s.outer_exp, s.inner_exp),
            Outer::T => (s.inner_exp, s.outer_exp),
        };
        let expect = lp_t(tt) * lp_x(tx);
        let got = mixed_norm(&h, s).unwrap();
        assert!(
            (got - expect).abs() < 1e-8 * expect,
            "{s:?}: {got:e} vs {expect:e}"
        );
    }
}

#[test]
fn zero_and_empty_histories() {
    let grid = SpatialGrid::symmetric(5.0, 32).unwrap();
    let zero = FieldHistory::uniform(grid, 0.0, 0.1, vec![ComplexField::zeros(grid); 5]).unwrap();
    for s in SPECS {
        assert_eq!(mixed_norm(&zero, s).unwrap(), 0.0);
    }
    let empty = FieldHistory::uniform(grid, 0.0, 0.1, vec![]).unwrap();
    assert!(matches!(
        mixed_norm(&empty, MixedNormSpec::L2_T_L2_X),
        Err(LabError::Contract(_))
    ));
}

#[test]
fn history_rejects_bad_input() {
    let grid = SpatialGrid::symmetric(5.0, 32).unwrap();
    let other = SpatialGrid::symmetric(6.0, 32).unwrap();
    let f = ComplexField::zeros(grid);
    assert!(FieldHistory::new(grid, &[0.0, 0.1, 0.25], vec![f.clone(); 3]).is_err());
    assert!(FieldHistory::new(grid, &[0.0, 0.1], vec![f.clone(); 3]).is_err());
    assert!(FieldHistory::new(
        grid,
        &[0.0, 0.1],
        vec![f.clone(), ComplexField::zeros(other)]
    )
    .is_err());
    assert!(FieldHistory::new(grid, &[0.2, 0.1], vec![f.clone(); 2]).is_err());
    let bad = MixedNormSpec {
        outer: Outer::T,
        outer_exp: 0.5,
        inner_exp: 2.0,
        weight_power: 0.0,
    };
    assert!(bad.validate().is_err());
    assert!(MixedNormAccumulator::new(&grid, 0.1, bad).is_err());
    assert!(
        MixedNormAccumulator::windowed(&grid, 0.1, MixedNormSpec::L2_T_L2_X, (9.0, 10.0)).is_err()
    );
}

#[test]
fn windowed_accumulator_ignores_outside_nodes() {
    let grid = SpatialGrid::symmetric(10.0, 128).unwrap();
    let inside =
        ComplexField::from_real_fn(grid, |x| if x.abs() < 3.0 { 1.0 } else { 0.0 }).unwrap();
    let outside =
        ComplexField::from_real_fn(grid, |x| if x.abs() < 4.5 { 1.0 } else { 50.0 }).unwrap();
    let mut a = MixedNormAccumulator::windowed(&grid, 0.1, MixedNormSpec::L4_T_LINF_X, (-4.0, 4.0))
        .unwrap();
    let mut b = a.clone();
    for _ in 0..10 {
        a.push(inside.values());
        b.push(outside.values());
    }
    assert_eq!(a.frames(), 10);
    assert_eq!(a.value(), b.value());
    assert!((a.value() - 0.9f64.powf(0.25)).abs() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn mixed_norm_is_homogeneous(seed in 0u64..1000, lambda in 0.01f64..100.0, pick in 0usize..5) {
        let h = random_history(16, 6, seed);
        let scaled = FieldHistory::uniform(*h.grid(), 0.0, h.dt(), h.frames().iter().map(|f| f.scale_real(-lambda)).collect()).unwrap();
        let s = SPECS[pick];
        let (a, b) = (mixed_norm(&h, s).unwrap(), mixed_norm(&scaled, s).unwrap());
        prop_assert!((b - lambda * a).abs() <= 1e-12 * b);
    }

    #[test]
    fn mixed_norm_triangle_inequality(s1 in 0u64..1000, s2 in 0u64..1000, pick in 0usize..5) {
        let (f, g) = (random_history(16, 6, s1), random_history(16, 6, s2 + 5000));
        let sum = FieldHistory::uniform(*f.grid(), 0.0, f.dt(), f.frames().iter().zip(g.frames()).map(|(a, b)| a + b).collect()).unwrap();
        let s = SPECS[pick];
        let lhs = mixed_norm(&sum, s).unwrap();
        prop_assert!(lhs <= (mixed_norm(&f, s).unwrap() + mixed_norm(&g, s).unwrap()) * (1.0 + 1e-12));
    }
}

#[test]
fn ensembles_are_seeded_and_in_range() {
    let e = GaussianEnsemble::new(50, 42);
    let (a, b) = (e.packets().unwrap(), e.packets().unwrap());
    assert_eq!(a, b);
    assert_ne!(a, GaussianEnsemble::new(50, 43).packets().unwrap());
    for p in &a {
        assert!(
            (-10.0..10.0).contains(&p.center)
                && (0.5..2.0).contains(&p.width)
                && (0.0..4.0).contains(&p.xi)
        );
    }
    let s = SourceEnsemble::new(20, 42).packets().unwrap();
    assert_eq!(s.len(), 20);
    assert_eq!(s, SourceEnsemble::new(20, 42).packets().unwrap());
    for p in &s {
        assert!(p.t_width > 0.0 && p.envelope(p.t_center).norm() > 0.99);
    }
}

fn setup() -> (SpectralDecomposition, HarnessConfig) {
    let grid = SpatialGrid::symmetric(100.0, 2048).unwrap();
    let d = SpectralDecomposition::with_ground_state(&Potential::default_well(), &grid).unwrap();
    (
        d,
        HarnessConfig {
            horizon: 8.0,
            ..HarnessConfig::default()
        },
    )
}

#[test]
fn bound_state_is_invisible_to_the_dispersive_part() {
    let (d, cfg) = setup();
    let phi = d.bound().unwrap().phi_star.clone();
    let (r, r2) = strichartz_ratio(&d, &phi, &cfg).unwrap();
    assert!(r < 1e-8 && r2 < 1e-8, "{r:e} {r2:e}");
    let env = |t: f64| C::new((-(t - 3.0).powi(2)).exp(), 0.0);
    for (a, b) in retarded_ratios(&d, &phi, &env, &cfg, true).unwrap() {
        assert!(a < 1e-10 && b < 1e-10, "{a:e} {b:e}");
    }
    let (a, b) = christ_kiselev_ratio(&d, &phi, &env, &cfg).unwrap();
    assert!(a < 1e-10 && b < 1e-10);
}

#[test]
fn strichartz_constant_is_finite_stable_and_close_to_free() {
    let (d, cfg) = setup();
    let ens = GaussianEnsemble::new(6, 3).fields(*d.grid()).unwrap();
    let rep = verify_strichartz(&d, &ens, &cfg).unwrap();
    assert_eq!(rep.lemma_id, "2.1a");
    assert_eq!(rep.ratios.len(), 6);
    assert!(rep.empirical_c.is_finite() && rep.empirical_c > 0.1);
    assert!(
        rep.stability >= 1.0 && rep.stability < 1.05,
        "stability {}",
        rep.stability
    );
    let free = SpectralDecomposition::new(&Potential::zero(), d.grid()).unwrap();
    assert!(free.bound().is_none());
    let c0 = verify_strichartz(&free, &ens, &cfg).unwrap().empirical_c;
    assert!(
        (rep.empirical_c / c0 - 1.0).abs() < 0.2,
        "{} vs free {}",
        rep.empirical_c,
        c0
    );
}

#[test]
fn local_smoothing_gains_half_a_derivative() {
    let (d, cfg) = setup();
    // fast packets need a wide box and a strong layer
    let wide = SpatialGrid::symmetric(200.0, 8192).unwrap();
    let dw = SpectralDecomposition::with_ground_state(&Potential::default_well(), &wide).unwrap();
    let cw = HarnessConfig {
        sponge: Some(Sponge {
            strength: 40.0,
            fraction: 0.15,
        }),
        ..cfg
    };
    let base = GaussianPacket {
        center: 0.0,
        width: 1.0,
        xi: 0.0,
    };
    let rows = local_smoothing_frequency_probe(&dw, &base, &[2.0, 8.0], &cw).unwrap();
    let growth = rows[1].l2_ratio / rows[0].l2_ratio;
    // ~ sqrt(N) against L^2, bounded against H^{1/2}
    assert!(growth > 1.5, "growth {growth}");
    assert!(rows[1].h_half_ratio < 1.5 * rows[0].h_half_ratio);
    let ens = GaussianEnsemble::new(4, 11).fields(*d.grid()).unwrap();
    let rep = verify_local_smoothing(&d, &ens, &cfg).unwrap();
    assert_eq!(rep.weighted.lemma_id, "2.2.1");
    assert_eq!(rep.derivative.lemma_id, "2.2.2");
    for r in [&rep.weighted, &rep.derivative] {
        assert!(r.empirical_c.is_finite() && r.empirical_c > 0.0);
        assert!(
            r.stability >= 1.0 && r.stability < 1.05,
            "{} stability {}",
            r.lemma_id,
            r.stability
        );
    }
}

#[test]
fn dual_form_agrees_with_direct_form() {
    let (d, cfg) = setup();
    let ens = GaussianEnsemble::new(4, 5).fields(*d.grid()).unwrap();
    let raw = verify_local_smoothing_dual(&d, &ens, &cfg, 0).unwrap();
    for i in 0..ens.len() {
        // weak duality
        assert!(raw.mollified[i] <= raw.adjoint[i] * (1.0 + 1e-3), "{raw:?}");
        assert!(raw.mollified[i] <= raw.direct[i] * (1.0 + 1e-3));
    }
    let rep = verify_local_smoothing_dual(&d, &ens, &cfg, 3).unwrap();
    assert!(rep.mollified_c >= raw.mollified_c);
    assert!(
        (rep.mollified_c / rep.adjoint_c - 1.0).abs() < 0.1,
        "{rep:?}"
    );
    assert!(rep.direct_c >= rep.mollified_c);
}

#[test]
fn inhomogeneous_families_are_scale_invariant_and_stable() {
    let (d, cfg) = setup();
    // sources are switched off well before T
    let cfg = HarnessConfig {
        horizon: 16.0,
        ..cfg
    };
    let sources = SourceEnsemble::new(4, 9).packets().unwrap();
    let rep = verify_retarded(&d, &sources, &cfg, true).unwrap();
    assert_eq!(rep.weighted.lemma_id, "2.3.1");
    let unweighted = rep.unweighted.unwrap();
    for r in [&rep.weighted, &unweighted] {
        assert!(r.empirical_c.is_finite() && r.empirical_c > 0.0);
        assert!(
            r.stability < 1.05,
            "{} stability {}",
            r.lemma_id,
            r.stability
        );
    }
    assert!(verify_retarded(&d, &sources, &cfg, false)
        .unwrap()
        .unweighted
        .is_none());
    let ck = verify_christ_kiselev(&d, &sources, &cfg).unwrap();
    assert!(ck.empirical_c > 0.0 && ck.stability < 1.05);

    let b = sources[0].space.sample(*d.grid()).unwrap();
    let env = |t: f64| sources[0].envelope(t);
    let env3 = |t: f64| 3.0 * sources[0].envelope(t);
    let (x, _) = christ_kiselev_ratio(&d, &b, &env, &cfg).unwrap();
    let (y, _) = christ_kiselev_ratio(&d, &b, &env3, &cfg).unwrap();
    assert!((x - y).abs() < 1e-10 * x);
}

#[test]
fn packets_reaching_the_edge_are_flagged() {
    let grid = SpatialGrid::symmetric(30.0, 512).unwrap();
    let d = SpectralDecomposition::with_ground_state(&Potential::default_well(), &grid).unwrap();
    let cfg = HarnessConfig {
        horizon: 10.0,
        sponge: None,
        ..HarnessConfig::default()
    };
    let f = GaussianPacket {
        center: 0.0,
        width: 1.0,
        xi: 4.0,
    }
    .sample(grid)
    .unwrap();
    assert!(matches!(
        strichartz_ratio(&d, &f, &cfg),
        Err(LabError::BoundaryContamination(_))
    ));
}
