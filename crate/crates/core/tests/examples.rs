use convex_energy::inequality::{extremizer_simplex, extremizer_steep, verify, VerifyOptions};
use convex_energy::legendre::{fast_separable_fenchel, fenchel, involution_defect};
use convex_energy::rays::{radial_j, speed, sup_linearity_check, ToricRay};
use convex_energy::toric::{d1, d1_via_rooftop, energy_i, j_proxy, normalize_i, symplectic_potential};
use convex_energy::{AffinePiece, FixtureKind, FunctionSpec, GridFunction, InequalityReport, MaxAffine, ToricFixture};

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn entropy(s: f64) -> f64 {
    s * s.ln() + (1.0 - s) * (1.0 - s).ln()
}

#[test]
fn logistic_potential_conjugate() {
    let f = GridFunction::from_fn(vec![(-20.0, 20.0)], vec![1025], |x| softplus(x[0])).unwrap();
    let g = fenchel(&f, &[(0.05, 0.95)], &[181]).unwrap();
    for i in 0..g.len() {
        let s = g.node(i)[0];
        assert!((g.values()[i] - entropy(s)).abs() <= 1e-2);
    }
    let fast = fast_separable_fenchel(&f, &[(0.05, 0.95)], &[181]).unwrap();
    assert!(fast.sup_distance(&g).unwrap() <= 1e-10);
}

#[test]
fn piecewise_linear_involution() {
    let f = GridFunction::from_fn(vec![(-4.0, 4.0)], vec![257], |x| (x[0].abs() - 1.0).max(0.0)).unwrap();
    assert!(involution_defect(&f).unwrap() <= f.step(0));
}

#[test]
fn half_square_in_two_dimensions() {
    let f = GridFunction::from_fn(vec![(-4.0, 4.0); 2], vec![129, 129], |x| (x[0] * x[0] + x[1] * x[1]) / 2.0).unwrap();
    let dual = [(-2.0, 2.0), (-2.0, 2.0)];
    let brute = fenchel(&f, &dual, &[33, 33]).unwrap();
    let fast = fast_separable_fenchel(&f, &dual, &[33, 33]).unwrap();
    assert!(brute.sup_distance(&fast).unwrap() <= 1e-10);
    for i in 0..fast.len() {
        let s = fast.node(i);
        assert!((fast.values()[i] - (s[0] * s[0] + s[1] * s[1]) / 2.0).abs() <= 2e-3);
    }
}

#[test]
fn kinked_potential_matches_scalar_maximization() {
    let fix = ToricFixture::new(FixtureKind::P1).unwrap();
    let u = MaxAffine::new(vec![AffinePiece::new(vec![0.0], 0.0), AffinePiece::new(vec![1.0], -2.0)]).unwrap();
    let pot = symplectic_potential(&fix, &fix.perturbed(&u).unwrap()).unwrap();
    let psi = |x: f64| softplus(x) - std::f64::consts::LN_2 + (x - 2.0).max(0.0);
    let samples = 1_000_000;
    for (i, &v) in pot.phi().values().iter().enumerate().step_by(8) {
        let s = pot.phi().node(i)[0];
        let oracle = (0..=samples)
            .map(|k| {
                let x = -20.0 + 40.0 * k as f64 / samples as f64;
                s * x - psi(x)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((v - oracle).abs() <= 1e-2, "s = {s}: {v} vs {oracle}");
    }
}

#[test]
fn background_and_constant_potentials() {
    for kind in FixtureKind::ALL {
        let fix = ToricFixture::new(kind).unwrap();
        let bg = fix.background();
        let again = symplectic_potential(&fix, fix.psi0()).unwrap();
        assert!(again.phi().sup_distance(fix.phi0()).unwrap() <= 1e-12);
        assert_eq!(energy_i(&fix, &bg).unwrap(), 0.0);
        assert_eq!(d1(&fix, &bg, &bg).unwrap(), 0.0);
        assert_eq!(d1_via_rooftop(&fix, &bg, &bg).unwrap(), 0.0);
        let c = 0.8;
        let up = symplectic_potential(&fix, &fix.psi0().map(|v| v + c).unwrap()).unwrap();
        assert!(up.phi().zip_with(fix.phi0(), |a, b| a - b + c).unwrap().values().iter().all(|d| d.abs() < 1e-12));
        assert!((d1_via_rooftop(&fix, &bg, &up).unwrap() - c).abs() <= 1e-10);
        let normalized = normalize_i(&fix, &up).unwrap();
        assert!(energy_i(&fix, &normalized).unwrap().abs() <= 1e-10);
        let twice = normalize_i(&fix, &normalized).unwrap();
        assert!(twice.phi().sup_distance(normalized.phi()).unwrap() <= 1e-12);
    }
}

#[test]
fn j_proxy_matches_potential_at_origin() {
    // −min φ_u = ψ_u(0) = ψ₀(0) + u(0)
    let fix = ToricFixture::new(FixtureKind::P1).unwrap();
    let u = MaxAffine::new(vec![AffinePiece::new(vec![0.0], 0.3), AffinePiece::new(vec![0.5], 0.0)]).unwrap();
    let pot = symplectic_potential(&fix, &fix.perturbed(&u).unwrap()).unwrap();
    let psi_at_origin = fix.psi0_exact(&[0.0]) + u.eval(&[0.0]);
    assert!((j_proxy(&fix, &pot).unwrap() - psi_at_origin).abs() <= 1e-3);
}

#[test]
fn j_proxy_grows_like_depth_along_extremizer() {
    let fix = ToricFixture::with_scale(FixtureKind::P1, 2.0).unwrap();
    let (_, phi) = extremizer_simplex(1).unwrap();
    let j: Vec<f64> = [10.0, 20.0, 40.0]
        .iter()
        .map(|&t| j_proxy(&fix, &fix.along_direction(&phi, t).unwrap()).unwrap())
        .collect();
    let slope = (j[2] - j[1]) / 20.0;
    assert!((slope - 1.0).abs() <= 1e-2, "{j:?}");
    assert!(energy_i(&fix, &fix.along_direction(&phi, 40.0).unwrap()).unwrap().abs() <= 1e-2);
}

#[test]
fn ray_homogeneity_and_symmetry() {
    let fix = ToricFixture::new(FixtureKind::P1).unwrap();
    let (_, steep) = extremizer_steep(1, 8).unwrap();
    let ray = ToricRay::new(&fix, steep.clone()).unwrap();
    let s = speed(&ray).unwrap();
    assert!((s.value - (2.0 - 2.0 / 8.0 + 1.0 / 128.0)).abs() <= 1e-9);
    let doubled = ToricRay::new(&fix, steep.scale(3.0).unwrap()).unwrap();
    assert!((radial_j(&doubled).unwrap().value - 3.0 * radial_j(&ray).unwrap().value).abs() <= 1e-12);

    let affine = MaxAffine::affine(vec![2.0], -1.0).unwrap();
    let flipped = MaxAffine::affine(vec![-2.0], 1.0).unwrap();
    let a = speed(&ToricRay::new(&fix, affine).unwrap()).unwrap();
    let b = speed(&ToricRay::new(&fix, flipped).unwrap()).unwrap();
    assert!((a.value - b.value).abs() <= 1e-12);
    assert!((a.value - 0.5).abs() <= 1e-12);
}

#[test]
fn sup_linearity_slopes() {
    let fix = ToricFixture::with_scale(FixtureKind::SimplexFs, 1.5).unwrap();
    let (_, phi) = extremizer_simplex(2).unwrap();
    let ray = ToricRay::new(&fix, phi).unwrap();
    let late = sup_linearity_check(&ray, &[32.0, 64.0]).unwrap();
    assert!((late.slope - 1.0).abs() <= 1e-6);
    let later = sup_linearity_check(&ray, &[64.0, 128.0]).unwrap();
    assert!((later.slope - late.slope).abs() <= 1e-6);
    let all = sup_linearity_check(&ray, &[8.0, 16.0, 32.0, 64.0]).unwrap();
    assert!(all.max_deviation <= all.drift_bound);
}

#[test]
fn report_json_round_trip() {
    let (p, phi) = extremizer_simplex(2).unwrap();
    let report = verify(&p, &phi, VerifyOptions::default()).unwrap();
    let text = serde_json::to_string(&report).unwrap();
    let back: InequalityReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, report);

    let spec: FunctionSpec = serde_json::from_str(r#"{"kind": "extremizer_steep", "n": 2, "m": 4}"#).unwrap();
    let (f, domain) = spec.resolve().unwrap();
    let r = verify(&domain.unwrap(), &f, VerifyOptions::default()).unwrap();
    assert!((r.ratio.value().unwrap() - 1.53125).abs() <= 1e-9);
}
