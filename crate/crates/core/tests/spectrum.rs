use num_complex::Complex64 as C;
use soliton_lab::field::{inner_product, norm, ComplexField, NormKind, SpatialGrid};
use soliton_lab::numerics::bisect;
use soliton_lab::potentials::Potential;
use soliton_lab::spectrum::{
    dense_operator, dispersive_decay_probe, find_bound_states, ground_state, wave_operator_adjoint,
    wave_operator_apply, Backend, DenseSpectrum, SpectralDecomposition, SplitScheme,
};

fn gaussian(grid: &SpatialGrid, c: f64, w: f64, xi: f64) -> ComplexField {
    ComplexField::from_fn(*grid, |x| {
        C::from_polar((-(x - c).powi(2) / (2.0 * w * w)).exp(), xi * x)
    })
    .unwrap()
}

fn nu_well(depth: f64) -> f64 {
    // nu(nu + 1) = -depth
    (-1.0 + (1.0 - 4.0 * depth).sqrt()) / 2.0
}

#[test]
fn reflectionless_ground_state() {
    let grid = SpatialGrid::symmetric(40.0, 1024).unwrap();
    let states = find_bound_states(&Potential::sech2(-2.0), &grid).unwrap();
    assert_eq!(states.len(), 1);
    let b = &states[0];
    assert!((b.e_star + 1.0).abs() < 1e-8, "{}", b.e_star);
    // phi ~ sech(x)/sqrt(2)
    let exact = ComplexField::from_real_fn(grid, |x| 1.0 / (2f64.sqrt() * x.cosh())).unwrap();
    assert!(norm(&(&b.phi_star - &exact), NormKind::L2) < 1e-8);
    assert!((norm(&b.phi_star, NormKind::L2) - 1.0).abs() < 1e-10);
    assert!(b.residual < 1e-7, "residual {}", b.residual);
}

#[test]
fn generic_well_matches_closed_form_and_dense_oracle() {
    let grid = SpatialGrid::symmetric(25.0, 512).unwrap();
    let v = Potential::default_well();
    let b = ground_state(&v, &grid).unwrap();
    let nu = nu_well(-1.5);
    assert!((b.e_star + nu * nu).abs() < 1e-9);
    let dense = DenseSpectrum::new(&grid, &v).unwrap();
    assert!((dense.values[0] - b.e_star).abs() < 1e-6);
    assert!(dense.values[1] > 0.0, "exactly one negative eigenvalue");
    assert!(norm(&(&dense.mode(0) - &b.phi_star), NormKind::L2) < 1e-6);
}

#[test]
fn square_well_transcendental_root() {
    let (v0, a) = (2.0f64, 1.0f64);
    let f = |kappa: f64| {
        let q = (v0 - kappa * kappa).sqrt();
        q * (q * a).tan() - kappa
    };
    let kappa = bisect(f, 1e-9, v0.sqrt() - 1e-12, 1e-15).unwrap();
    let grid = SpatialGrid::symmetric(40.0, 1024).unwrap();
    let states = find_bound_states(&Potential::square_well(-v0, a), &grid).unwrap();
    assert_eq!(states.len(), 1);
    assert!(
        (states[0].e_star + kappa * kappa).abs() < 1e-8,
        "{} vs {}",
        states[0].e_star,
        -kappa * kappa
    );
}

#[test]
fn dense_operator_is_symmetric() {
    let grid = SpatialGrid::symmetric(10.0, 64).unwrap();
    let m = dense_operator(&grid, &Potential::default_well());
    assert!((&m - m.transpose()).amax() < 1e-13);
}

#[test]
fn projections() {
    let grid = SpatialGrid::symmetric(30.0, 1024).unwrap();
    let d = SpectralDecomposition::with_ground_state(&Potential::default_well(), &grid).unwrap();
    let phi = d.bound().unwrap().phi_star.clone();
    assert!(norm(&(&d.project_p(&phi).unwrap() - &phi), NormKind::L2) < 1e-12);
    assert!(norm(&d.project_q(&phi).unwrap(), NormKind::L2) < 1e-12);
    let f = gaussian(&grid, 1.3, 0.8, 0.7);
    let pf = d.project_p(&f).unwrap();
    assert!(norm(&(&d.project_p(&pf).unwrap() - &pf), NormKind::L2) < 1e-12);
    let q = d.project_q(&f).unwrap();
    assert!(inner_product(&q, &phi).unwrap().norm() < 1e-13);
    assert!(norm(&(&(&pf + &q) - &f), NormKind::L2) < 1e-14);
}

#[test]
fn eigen_backend_evolves_ground_state_by_a_phase() {
    let grid = SpatialGrid::symmetric(25.0, 512).unwrap();
    let d = SpectralDecomposition::with_ground_state(&Potential::default_well(), &grid).unwrap();
    let b = d.bound().unwrap();
    let out = d
        .propagate_linear(&b.phi_star, 1.0, Backend::Eigen)
        .unwrap()
        .field;
    let exact = b.phi_star.scale(C::from_polar(1.0, -b.e_star));
    assert!(norm(&(&out - &exact), NormKind::L2) < 1e-8);
}

#[test]
fn free_gaussian_closed_form() {
    let grid = SpatialGrid::symmetric(60.0, 1024).unwrap();
    let d = SpectralDecomposition::new(&Potential::zero(), &grid).unwrap();
    let s2 = 1.5f64;
    let f = ComplexField::from_real_fn(grid, |x| (-x * x / (2.0 * s2)).exp()).unwrap();
    let t = 3.0;
    let exact = ComplexField::from_fn(grid, |x| {
        let st = C::new(s2, 2.0 * t);
        (C::new(s2, 0.0) / st).sqrt() * (-x * x / (2.0 * st)).exp()
    })
    .unwrap();
    for backend in [
        Backend::Eigen,
        Backend::SplitStep {
            dt: 0.5,
            scheme: SplitScheme::Strang,
        },
    ] {
        let out = d.propagate_linear(&f, t, backend).unwrap();
        assert!(!out.boundary_warning);
        assert!(
            norm(&(&out.field - &exact), NormKind::L2) < 1e-8,
            "{backend:?}"
        );
    }
}

#[test]
fn backends_agree_and_are_unitary() {
    let grid = SpatialGrid::symmetric(50.0, 1024).unwrap();
    let v = Potential::default_well();
    let d = SpectralDecomposition::with_ground_state(&v, &grid).unwrap();
    let f = gaussian(&grid, -2.0, 1.0, 1.0);
    let a = d.propagate_linear(&f, 10.0, Backend::Eigen).unwrap().field;
    let b = d
        .propagate_linear(
            &f,
            10.0,
            Backend::SplitStep {
                dt: 0.005,
                scheme: SplitScheme::Yoshida4,
            },
        )
        .unwrap()
        .field;
    assert!(
        norm(&(&a - &b), NormKind::L2) < 1e-6,
        "{}",
        norm(&(&a - &b), NormKind::L2)
    );
    let n0 = norm(&f, NormKind::L2);
    assert!((norm(&a, NormKind::L2) - n0).abs() < 1e-8);
    assert!((norm(&b, NormKind::L2) - n0).abs() < 1e-8);
    // energy form <Lf, f>
    let dense = d.dense().unwrap();
    let energy = |g: &ComplexField| {
        let m = dense_operator(&grid, &v);
        let re = nalgebra::DVector::from_vec(g.re());
        let im = nalgebra::DVector::from_vec(g.im());
        (re.dot(&(&m * &re)) + im.dot(&(&m * &im))) * grid.dx()
    };
    let _ = dense;
    assert!((energy(&a) - energy(&f)).abs() < 1e-6 * energy(&f).abs().max(1.0));
    // Q commutes with the flow
    let qa = d.project_q(&a).unwrap();
    let aq = d
        .propagate_linear(&d.project_q(&f).unwrap(), 10.0, Backend::Eigen)
        .unwrap()
        .field;
    assert!(norm(&(&qa - &aq), NormKind::L2) < 1e-8);
}

#[test]
fn free_decay_exponent() {
    let grid = SpatialGrid::symmetric(400.0, 8192).unwrap();
    let d = SpectralDecomposition::new(&Potential::zero(), &grid).unwrap();
    let ts: Vec<f64> = (0..10).map(|i| 5.0 * 10f64.powf(i as f64 / 9.0)).collect();
    let f = gaussian(&grid, 0.0, 1.0, 0.0);
    let fit = dispersive_decay_probe(&d, &f, &ts, 0.05, SplitScheme::Strang).unwrap();
    assert!((fit.slope + 0.5).abs() < 0.01, "{}", fit.slope);
    let fit2 =
        dispersive_decay_probe(&d, &f.scale_real(2.0), &ts, 0.05, SplitScheme::Strang).unwrap();
    assert!((fit.slope - fit2.slope).abs() < 1e-6);
}

#[test]
fn contaminated_decay_window_is_refused() {
    let grid = SpatialGrid::symmetric(30.0, 512).unwrap();
    let d = SpectralDecomposition::new(&Potential::zero(), &grid).unwrap();
    let f = gaussian(&grid, 0.0, 1.0, 0.0);
    assert!(dispersive_decay_probe(&d, &f, &[5.0, 50.0], 0.05, SplitScheme::Strang).is_err());
}

#[test]
fn wave_operator_properties() {
    let grid = SpatialGrid::symmetric(300.0, 8192).unwrap();
    let free = SpectralDecomposition::new(&Potential::zero(), &grid).unwrap();
    let g = gaussian(&grid, 0.0, 1.0, 3.0);
    let w = wave_operator_apply(&free, &g, 4.0, 0.01, 1e-6).unwrap();
    assert!(norm(&(&w.field - &g), NormKind::L2) < 1e-10);

    let d = SpectralDecomposition::with_ground_state(&Potential::default_well(), &grid).unwrap();
    // transform vanishes to fourth order at k = 0, so the Cook integrand decays like t^-5/2
    let g = ComplexField::from_real_fn(grid, |x| {
        (x.powi(4) - 6.0 * x * x + 3.0) * (-x * x / 2.0).exp()
    })
    .unwrap();
    let mut incs = Vec::new();
    for &t in &[2.0, 4.0, 8.0, 16.0] {
        let w = wave_operator_apply(&d, &g, t, 0.01, 1.0).unwrap();
        assert!((norm(&w.field, NormKind::L2) - norm(&g, NormKind::L2)).abs() < 1e-6);
        incs.push(w.increment);
    }
    for pair in incs.windows(2) {
        assert!(pair[1] <= 0.5 * pair[0], "increments {incs:?}");
    }
    // the adjoint undoes the operator
    let w = wave_operator_apply(&d, &g, 8.0, 0.01, 1.0).unwrap();
    let back = wave_operator_adjoint(&d, &w.field, 8.0, 0.01).unwrap();
    assert!(norm(&(&back - &g), NormKind::L2) < 1e-8);
    // its range becomes orthogonal to the bound state
    let phi = &d.bound().unwrap().phi_star;
    let w16 = wave_operator_apply(&d, &g, 16.0, 0.01, 1.0).unwrap();
    let p8 = inner_product(&w.field, phi).unwrap().norm();
    let p16 = inner_product(&w16.field, phi).unwrap().norm();
    assert!(p16 < 0.25 * p8, "{p8} {p16}");
}
