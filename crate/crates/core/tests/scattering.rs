use num_complex::Complex64 as C;
use soliton_lab::potentials::Potential;
use soliton_lab::scattering::{
    born_kernel, check_nonresonance, free_kernel, scattering_coefficients, JostProfile,
    JostSolution, ResolventKernel, Side,
};

/// Picard iteration of `m1(x) = 1 + int_x^X (e^{2ik(y-x)} - 1)/(2ik) V(y) m1(y) dy` with a
/// composite Simpson rule on a uniform grid; returns `(nodes, m1)`.
fn picard_m1(v: &Potential, k: f64, x_lo: f64, x_hi: f64, h: f64) -> (Vec<f64>, Vec<C>) {
    let n = ((x_hi - x_lo) / h).round() as usize;
    let h = (x_hi - x_lo) / n as f64;
    let xs: Vec<f64> = (0..=n).map(|i| x_lo + i as f64 * h).collect();
    let vs: Vec<f64> = xs.iter().map(|&x| v.eval(x)).collect();
    let kern = |t: f64| -> C {
        if k == 0.0 {
            C::new(t, 0.0)
        } else {
            ((C::new(0.0, 2.0 * k * t)).exp() - 1.0) / C::new(0.0, 2.0 * k)
        }
    };
    let mut m = vec![C::new(1.0, 0.0); n + 1];
    for _ in 0..200 {
        let mut next = vec![C::new(1.0, 0.0); n + 1];
        for i in 0..n {
            let f = |j: usize| kern(xs[j] - xs[i]) * vs[j] * m[j];
            let len = n - i;
            let mut s = C::new(0.0, 0.0);
            let (simpson_end, tail) = if len % 2 == 0 {
                (n, false)
            } else {
                (n - 3, true)
            };
            if simpson_end > i {
                s += f(i) + f(simpson_end);
                for j in (i + 1)..simpson_end {
                    s += f(j) * if (j - i) % 2 == 1 { 4.0 } else { 2.0 };
                }
                s *= h / 3.0;
            }
            if tail {
                let a = simpson_end;
                s += (f(a) + 3.0 * f(a + 1) + 3.0 * f(a + 2) + f(a + 3)) * (3.0 * h / 8.0);
            }
            next[i] = 1.0 + s;
        }
        let diff = next
            .iter()
            .zip(&m)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        m = next;
        if diff < 1e-14 {
            break;
        }
    }
    (xs, m)
}

#[test]
fn jost_matches_picard_oracle() {
    let v = Potential::default_well();
    let p = JostProfile::solve(&v, C::new(1.0, 0.0)).unwrap();
    let (l, r) = p.window();
    let (xs, m) = picard_m1(&v, 1.0, l, r, 0.01);
    for i in (0..xs.len()).step_by(97) {
        let got = p.m1(xs[i]).0;
        assert!(
            (got - m[i]).norm() < 1e-8,
            "x = {}: {} vs {}",
            xs[i],
            got,
            m[i]
        );
    }
}

#[test]
fn free_jost_and_scattering_data() {
    let js = JostSolution::solve_symmetric(&Potential::zero(), &[0.5, 1.0, 3.0]).unwrap();
    let sd = scattering_coefficients(&js).unwrap();
    for i in 0..sd.k.len() {
        assert!((sd.w[i] - C::new(0.0, 2.0 * sd.k[i])).norm() < 1e-15);
        assert!((sd.t[i] - 1.0).norm() < 1e-15);
        assert!(sd.r1[i].norm() < 1e-15 && sd.r2[i].norm() < 1e-15);
    }
}

#[test]
fn wronskian_conjugation_symmetry() {
    let v = Potential::default_well();
    for &k in &[0.3, 1.0, 4.0] {
        let a = JostProfile::solve(&v, C::new(k, 0.0))
            .unwrap()
            .wronskian()
            .unwrap()
            .value;
        let b = JostProfile::solve(&v, C::new(-k, 0.0))
            .unwrap()
            .wronskian()
            .unwrap()
            .value;
        assert!((a.conj() - b).norm() < 1e-10 * a.norm(), "k = {k}");
    }
}

#[test]
fn unitarity_and_equal_reflection_moduli() {
    let ks: Vec<f64> = (0..24).map(|i| 0.2 + i as f64 * (9.8 / 23.0)).collect();
    for v in [
        Potential::default_well(),
        Potential::gaussian(-1.0, 1.0),
        Potential::exp_decay(-1.0, 1.0),
    ] {
        let sd = scattering_coefficients(&JostSolution::solve_symmetric(&v, &ks).unwrap()).unwrap();
        assert!(
            sd.unitarity_defect() < 1e-8,
            "{v:?}: {}",
            sd.unitarity_defect()
        );
        for i in 0..sd.k.len() {
            assert!((sd.r1[i].norm() - sd.r2[i].norm()).abs() < 1e-8);
        }
    }
}

#[test]
fn reflectionless_well() {
    let ks: Vec<f64> = (0..20).map(|i| 0.2 + i as f64 * 0.24).collect();
    let sd = scattering_coefficients(
        &JostSolution::solve_symmetric(&Potential::sech2(-2.0), &ks).unwrap(),
    )
    .unwrap();
    let worst = sd.r1.iter().map(|r| r.norm()).fold(0.0, f64::max);
    assert!(worst < 1e-6, "max |R1| = {worst}");
}

#[test]
fn resonance_classification() {
    assert!(check_nonresonance(&Potential::zero()).unwrap().resonant);
    assert!(
        check_nonresonance(&Potential::sech2(-2.0))
            .unwrap()
            .resonant
    );
    let r = check_nonresonance(&Potential::default_well()).unwrap();
    assert!(!r.resonant && r.w0.norm() > 0.1, "{r:?}");
    // W(0) = 2 sin(pi nu)/pi with nu(nu+1) = 1.5
    let nu = (7f64.sqrt() - 1.0) / 2.0;
    assert!(
        (r.w0.norm() - 2.0 * (std::f64::consts::PI * nu).sin() / std::f64::consts::PI).abs() < 1e-8
    );
    // generic well: transmission vanishes at low energy; reflectionless: |T| -> 1
    let sd = scattering_coefficients(
        &JostSolution::solve_symmetric(&Potential::default_well(), &[1e-3]).unwrap(),
    )
    .unwrap();
    assert!(sd.t[0].norm() < 1e-2);
    let sd = scattering_coefficients(
        &JostSolution::solve_symmetric(&Potential::sech2(-2.0), &[1e-3]).unwrap(),
    )
    .unwrap();
    assert!((sd.t[0].norm() - 1.0).abs() < 1e-6);
}

#[test]
fn jost_bound_constant_is_stable_in_k() {
    // |m1(x,k) - 1| <= C <k>^{-1} (1 + max(-x,0)) int_x^inf <y>|V| and the same shape for m1'
    let v = Potential::default_well();
    let mut cs = Vec::new();
    let mut ds = Vec::new();
    for &k in &[0.5, 1.0, 2.0, 4.0, 8.0] {
        let p = JostProfile::solve(&v, C::new(k, 0.0)).unwrap();
        let bk = (1.0 + k * k).sqrt();
        let (mut c, mut d) = (0.0f64, 0.0f64);
        for i in 0..80 {
            let x = -10.0 + 0.25 * i as f64;
            let tail = v.tail_moment(x);
            let (m, dm) = p.m1(x);
            c = c.max((m - 1.0).norm() * bk / ((1.0 + (-x).max(0.0)) * tail));
            d = d.max(dm.norm() * bk / tail);
        }
        cs.push(c);
        ds.push(d);
    }
    let spread = |v: &[f64]| {
        v.iter().cloned().fold(0.0, f64::max) / v.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    assert!(spread(&cs) < 10.0, "{cs:?}");
    assert!(ds.iter().all(|d| d.is_finite() && *d < 10.0), "{ds:?}");
}

#[test]
fn free_resolvent_closed_forms() {
    let v = Potential::zero();
    let k = 1.7;
    let kp = ResolventKernel::new(&v, k * k, Side::PlusI0, &[]).unwrap();
    let s = kp.sample(0.4, 0.4);
    assert!((s.value - 1.0 / C::new(0.0, 2.0 * k)).norm() < 1e-14);
    let kn = ResolventKernel::new(&v, -k * k, Side::Negative, &[]).unwrap();
    for &(x, y) in &[(0.0, 1.0), (-3.0, 2.5)] {
        let s = kn.sample(x, y);
        let exact = (-k * f64::abs(x - y)).exp() / (-2.0 * k);
        assert!((s.value - exact).norm() < 1e-14);
    }
}

#[test]
fn kernel_symmetry_and_pole_guard() {
    let v = Potential::default_well();
    let kern = ResolventKernel::new(&v, 2.0, Side::PlusI0, &[]).unwrap();
    for &(x, y) in &[(0.3, -1.2), (5.0, 2.0), (-7.0, 11.0)] {
        assert!((kern.sample(x, y).value - kern.sample(y, x).value).norm() < 1e-10);
    }
    let e = -((7f64.sqrt() - 1.0) / 2.0).powi(2);
    assert!(ResolventKernel::new(&v, e + 5e-4, Side::Negative, &[e]).is_err());
}

/// `(lambda - L)` applied with a 6th-order difference stencil to `K(., y)` is a grid delta at `y`.
#[test]
fn resolvent_inverts_lambda_minus_l() {
    let v = Potential::default_well();
    let lambda = 2.0;
    let kern = ResolventKernel::new(&v, lambda, Side::PlusI0, &[]).unwrap();
    let h = 0.01;
    let y = 0.37;
    let xs: Vec<f64> = (-1000..=1000).map(|i| y + i as f64 * h).collect();
    let kv: Vec<C> = xs.iter().map(|&x| kern.sample(x, y).value).collect();
    let c = [
        1.0 / 90.0,
        -3.0 / 20.0,
        3.0 / 2.0,
        -49.0 / 18.0,
        3.0 / 2.0,
        -3.0 / 20.0,
        1.0 / 90.0,
    ];
    let mut off = 0.0;
    let mut at_y = C::new(0.0, 0.0);
    for i in 3..xs.len() - 3 {
        let d2: C = (0..7).map(|q| kv[i + q - 3] * c[q]).sum::<C>() / (h * h);
        let r = lambda * kv[i] + d2 - v.eval(xs[i]) * kv[i];
        if (i as i64 - 1000).abs() <= 3 {
            at_y += r * h;
        } else {
            off += r.norm_sqr() * h;
        }
    }
    assert!(off.sqrt() < 1e-4, "off-column residual {}", off.sqrt());
    assert!((at_y - 1.0).norm() < 0.1, "delta weight {at_y}");
}

#[test]
fn born_first_term_is_free_kernel() {
    let v = Potential::default_well();
    let r = born_kernel(&v, 0.3, -0.8, 25.0, Side::PlusI0, 1).unwrap();
    assert_eq!(r.value, free_kernel(1.1, C::new(5.0, 0.0)));
}

#[test]
fn born_term_ratio_matches_forward_scattering() {
    // on opposite sides of the well the terms are (int V / 2ik)^j G: ratio ||V||_1/(2*5) = 0.3
    let v = Potential::default_well();
    // later terms decay faster (ordered iterated integrals), never slower
    let r = born_kernel(&v, 15.0, -15.0, 25.0, Side::PlusI0, 8).unwrap();
    let first = r.term_magnitudes[1] / r.term_magnitudes[0];
    assert!(first > 0.15 && first < 0.6, "ratio {first}");
    assert!((first - 0.3).abs() < 1e-6);
    for w in r.term_magnitudes.windows(2) {
        assert!(w[1] / w[0] < 0.6);
    }
}

#[test]
fn born_agrees_with_jost_kernel() {
    let v = Potential::default_well();
    for side in [Side::PlusI0, Side::MinusI0] {
        let kern = ResolventKernel::new(&v, 25.0, side, &[]).unwrap();
        for &(x, y) in &[(0.0, 0.0), (1.3, -0.4), (-6.0, 9.0), (20.0, 3.0)] {
            let b = born_kernel(&v, x, y, 25.0, side, 12).unwrap();
            let j = kern.sample(x, y).value;
            assert!(
                (b.value - j).norm() < 1e-6 * j.norm(),
                "{side:?} ({x},{y}): {} vs {}",
                b.value,
                j
            );
            assert!(b.decay_ratio() <= 0.5);
        }
    }
}

#[test]
fn born_rejects_low_energy() {
    assert!(born_kernel(&Potential::default_well(), 0.0, 0.0, 4.0, Side::PlusI0, 3).is_err());
}
