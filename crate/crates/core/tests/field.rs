use std::f64::consts::PI;
use std::io::Cursor;

use num_complex::Complex64 as C;
use proptest::prelude::*;
use soliton_lab::field::io::{
    read_binary, read_container, read_csv, write_binary, write_container, write_csv,
    ContainerWriter,
};
use soliton_lab::field::{
    inner_product, norm, spectral_derivative, ComplexField, Fourier, NormKind, SpatialGrid,
};
use soliton_lab::LabError;

fn gauss(grid: SpatialGrid) -> ComplexField {
    ComplexField::from_real_fn(grid, |x| (-x * x).exp()).unwrap()
}

fn random_field(grid: SpatialGrid, re: &[f64], im: &[f64]) -> ComplexField {
    // smooth, decaying random combination of modulated Gaussians
    ComplexField::from_fn(grid, |x| {
        re.iter()
            .zip(im)
            .enumerate()
            .map(|(j, (a, b))| {
                C::new(*a, *b)
                    * C::from_polar((-(x - j as f64).powi(2) / 2.0).exp(), 0.7 * j as f64 * x)
            })
            .sum()
    })
    .unwrap()
}

#[test]
fn grid_contract() {
    assert!(SpatialGrid::new(1.0, 1.0, 64).is_err());
    assert!(SpatialGrid::new(0.0, 1.0, 8).is_err());
    assert!(SpatialGrid::new(0.0, 1.0, 100).is_err());
    assert!(SpatialGrid::new(0.0, f64::INFINITY, 64).is_err());
    let g = SpatialGrid::symmetric(10.0, 64).unwrap();
    assert_eq!(g.dx(), 20.0 / 64.0);
    assert_eq!(g.x(0), -10.0);
    let d = SpatialGrid::default_box();
    assert_eq!((d.x_min(), d.x_max(), d.n()), (-100.0, 100.0, 4096));
    let k = g.wavenumbers();
    assert_eq!(k.values().len(), 64);
    assert!((k.dk() - 2.0 * PI / 20.0).abs() < 1e-15);
    // FFT order: 0, dk, ..., then negatives
    assert_eq!(k.values()[0], 0.0);
    assert!((k.values()[1] - k.dk()).abs() < 1e-15);
    assert!(k.values()[63] < 0.0);
    let mut sorted: Vec<i64> = k
        .values()
        .iter()
        .map(|v| (v / k.dk()).round() as i64)
        .collect();
    sorted.sort();
    sorted.dedup();
    assert_eq!(sorted.len(), 64, "bijective with the nodes");
}

#[test]
fn field_contract() {
    let g = SpatialGrid::symmetric(1.0, 16).unwrap();
    assert!(ComplexField::new(g, vec![C::new(0.0, 0.0); 15]).is_err());
    let mut v = vec![C::new(0.0, 0.0); 16];
    v[3] = C::new(f64::NAN, 0.0);
    assert!(ComplexField::new(g, v).is_err());
    let other = SpatialGrid::symmetric(2.0, 16).unwrap();
    let r = inner_product(&ComplexField::zeros(g), &ComplexField::zeros(other));
    assert!(matches!(r, Err(LabError::Contract(_))));
}

#[test]
fn inner_product_oracles() {
    let unit = SpatialGrid::new(0.0, 1.0, 64).unwrap();
    let one = ComplexField::from_real_fn(unit, |_| 1.0).unwrap();
    assert!((inner_product(&one, &one).unwrap() - 1.0).norm() < 1e-14);

    let period = SpatialGrid::new(0.0, 2.0 * PI, 64).unwrap();
    let s = ComplexField::from_real_fn(period, f64::sin).unwrap();
    let c = ComplexField::from_real_fn(period, f64::cos).unwrap();
    assert!(inner_product(&s, &c).unwrap().norm() < 1e-12);

    let g = gauss(SpatialGrid::symmetric(20.0, 2048).unwrap());
    let v = inner_product(&g, &g).unwrap();
    assert!((v.re - (PI / 2.0).sqrt()).abs() < 1e-12 && v.im == 0.0);
    assert!((v.re - 1.2533141).abs() < 1e-7);
}

#[test]
fn derivative_oracles() {
    let period = SpatialGrid::new(0.0, 2.0 * PI, 32).unwrap();
    let e = ComplexField::from_fn(period, |x| C::from_polar(1.0, x)).unwrap();
    let d1 = spectral_derivative(&e, 1).unwrap();
    let d2 = spectral_derivative(&e, 2).unwrap();
    for (j, z) in e.values().iter().enumerate() {
        assert!((d1.field.values()[j] - C::i() * z).norm() < 1e-12);
        assert!((d2.field.values()[j] + z).norm() < 1e-12);
    }
    assert!(!d1.boundary_warning);

    let grid = SpatialGrid::symmetric(20.0, 1024).unwrap();
    let d = spectral_derivative(&gauss(grid), 1).unwrap();
    let max_err = (0..grid.n())
        .map(|j| {
            let x = grid.x(j);
            (d.field.values()[j] - C::new(-2.0 * x * (-x * x).exp(), 0.0)).norm()
        })
        .fold(0.0, f64::max);
    assert!(max_err < 1e-8, "{max_err:e}");
    assert!(!d.boundary_warning);

    // a ramp is not periodic-compatible
    let ramp = ComplexField::from_real_fn(grid, |x| x).unwrap();
    assert!(spectral_derivative(&ramp, 1).unwrap().boundary_warning);
    assert!(spectral_derivative(&ramp, 3).is_err());
}

#[test]
fn norm_oracles() {
    let grid = SpatialGrid::symmetric(20.0, 2048).unwrap();
    let z = ComplexField::zeros(grid);
    for k in [
        NormKind::L2,
        NormKind::Linf,
        NormKind::L1,
        NormKind::H1,
        NormKind::HHalf,
        NormKind::H1k(1.0),
    ] {
        assert_eq!(norm(&z, k), 0.0);
    }
    let g = gauss(grid);
    assert!((norm(&g, NormKind::L2) - (PI / 2.0).powf(0.25)).abs() < 1e-12);
    assert!((norm(&g, NormKind::L1) - PI.sqrt()).abs() < 1e-12);
    assert!((norm(&g, NormKind::Linf) - 1.0).abs() < 1e-12);
    // ||f'||^2 = int 4x^2 e^{-2x^2} = sqrt(pi/2)
    let h1 = ((PI / 2.0).sqrt() * 2.0).sqrt();
    assert!((norm(&g, NormKind::H1) - h1).abs() < 1e-10);
    let l2 = norm(&g, NormKind::L2);
    let hh = norm(&g, NormKind::HHalf);
    assert!(l2 < hh && hh < norm(&g, NormKind::H1));
}

#[test]
fn fields_round_trip_through_csv_and_binary() {
    let grid = SpatialGrid::new(-3.5, 4.5, 32).unwrap();
    let f = random_field(grid, &[0.3, -1.2, 0.5], &[1.0, 0.1, -0.7]);
    let mut csv = Vec::new();
    write_csv(&f, &mut csv).unwrap();
    let text = String::from_utf8(csv.clone()).unwrap();
    assert!(text.starts_with("x,re,im\n"));
    let back = read_csv(Cursor::new(csv)).unwrap();
    assert_eq!(back.values(), f.values());
    assert!((back.grid().x_min() - grid.x_min()).abs() < 1e-14);
    assert!((back.grid().x_max() - grid.x_max()).abs() < 1e-13);

    let mut bin = Vec::new();
    write_binary(&f, &mut bin).unwrap();
    assert_eq!(bin.len(), 4 + 24 + 16 * 32);
    assert_eq!(read_binary(Cursor::new(bin.clone())).unwrap(), f);
    bin[0] = b'X';
    assert!(matches!(
        read_binary(Cursor::new(bin)),
        Err(LabError::Format(_))
    ));

    let g = f.scale_real(2.0);
    let mut cont = Vec::new();
    write_container(&[(0.0, f.clone()), (0.5, g.clone())], &mut cont).unwrap();
    let back = read_container(Cursor::new(cont)).unwrap();
    assert_eq!(back, vec![(0.0, f.clone()), (0.5, g.clone())]);
    assert!(read_csv(Cursor::new("x,re\n0,1\n")).is_err());

    // incremental writer after a caller-owned header
    let mut cur = Cursor::new(b"HEADER".to_vec());
    cur.set_position(6);
    let mut w = ContainerWriter::new(cur).unwrap();
    w.push(1.0, &g).unwrap();
    w.push(2.0, &f).unwrap();
    let bytes = w.finish().unwrap().into_inner();
    assert_eq!(&bytes[..6], b"HEADER");
    assert_eq!(
        read_container(&bytes[6..]).unwrap(),
        vec![(1.0, g), (2.0, f)]
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn parseval(re in prop::collection::vec(-1.0f64..1.0, 4), im in prop::collection::vec(-1.0f64..1.0, 4)) {
        let grid = SpatialGrid::symmetric(16.0, 256).unwrap();
        let f = random_field(grid, &re, &im);
        let hat = Fourier::new(&grid).transform(f.values());
        let dk = grid.wavenumbers().dk();
        let spec: f64 = hat.iter().map(|z| z.norm_sqr()).sum::<f64>() * dk;
        let l2 = norm(&f, NormKind::L2).powi(2);
        prop_assert!((spec - l2).abs() <= 1e-10 * l2.max(1e-300));
    }

    #[test]
    fn derivative_is_linear(re in prop::collection::vec(-1.0f64..1.0, 4), im in prop::collection::vec(-1.0f64..1.0, 4),
                            a in -3.0f64..3.0, b in -3.0f64..3.0, order in 1u32..3) {
        let grid = SpatialGrid::symmetric(16.0, 256).unwrap();
        let f = random_field(grid, &re, &im);
        let g = random_field(grid, &im, &re);
        let lhs = spectral_derivative(&(&f.scale_real(a) + &g.scale_real(b)), order).unwrap().field;
        let rhs = &spectral_derivative(&f, order).unwrap().field.scale_real(a) + &spectral_derivative(&g, order).unwrap().field.scale_real(b);
        let scale = lhs.max_abs().max(1.0);
        prop_assert!((&lhs - &rhs).max_abs() <= 1e-12 * scale);
    }

    #[test]
    fn inner_product_is_hermitian(re in prop::collection::vec(-1.0f64..1.0, 4), im in prop::collection::vec(-1.0f64..1.0, 4)) {
        let grid = SpatialGrid::symmetric(16.0, 128).unwrap();
        let f = random_field(grid, &re, &im);
        let g = random_field(grid, &im, &re);
        let (a, b) = (inner_product(&f, &g).unwrap(), inner_product(&g, &f).unwrap());
        prop_assert!((a - b.conj()).norm() <= 1e-14 * a.norm().max(1.0));
        let ff = inner_product(&f, &f).unwrap();
        prop_assert!(ff.im == 0.0 || ff.im.abs() <= 1e-15 * ff.re);
        prop_assert!(ff.re >= 0.0);
    }

    #[test]
    fn h1k_at_zero_is_h1(re in prop::collection::vec(-1.0f64..1.0, 4), im in prop::collection::vec(-1.0f64..1.0, 4)) {
        let grid = SpatialGrid::symmetric(16.0, 128).unwrap();
        let f = random_field(grid, &re, &im);
        let (a, b) = (norm(&f, NormKind::H1k(0.0)), norm(&f, NormKind::H1));
        prop_assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
        prop_assert!(norm(&f, NormKind::H1k(1.0)) >= b);
    }
}
