use num_complex::Complex64;
use pinned_gl::gl2d::{
    coulomb_projection, gauge_transform, gl_energy, gl_gradient, meissner_configuration, minimize, random_smooth_init,
    split_energy, vorticity, Field2D, Gauge2D, MinimizeOptions,
};
use pinned_gl::london::{j0_energy, solve_london, LondonSolution};
use pinned_gl::model::{DiscMesh, PinningModel};
use pinned_gl::profile1d::{energy_c0, solve_radial_minimizer, RadialProfile};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::Arc;

struct Setup {
    mesh: Arc<DiscMesh>,
    u: RadialProfile,
    sol: LondonSolution,
}

fn setup(a: f64, eps: f64, n_r: usize, n_theta: usize) -> Setup {
    let model = PinningModel::new(a, 0.5, eps).unwrap();
    let mesh = Arc::new(DiscMesh::for_model(&model, n_r, n_theta).unwrap());
    let u = solve_radial_minimizer(&model, mesh.grid()).unwrap();
    let sol = solve_london(&u).unwrap();
    Setup { mesh, u, sol }
}

/// u·(1 + small complex noise) and small random links.
fn random_pair(s: &Setup, rng: &mut ChaCha8Rng) -> (Field2D, Gauge2D) {
    let lifted = s.mesh.lift_radial(&s.u.values);
    let psi = lifted
        .iter()
        .map(|&u| u * Complex64::new(1.0 + rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2)))
        .collect();
    let a_rad = (0..s.mesh.n_rad_links()).map(|_| rng.gen_range(-0.05..0.05)).collect();
    let a_ang = (0..s.mesh.n_ang_links()).map(|_| rng.gen_range(-0.05..0.05)).collect();
    (
        Field2D::new(s.mesh.clone(), psi).unwrap(),
        Gauge2D::new(s.mesh.clone(), a_rad, a_ang).unwrap(),
    )
}

/// Degree-one core of size `core` at `c`, multiplied into ψ.
fn with_vortex(psi: &Field2D, c: (f64, f64), core: f64) -> Field2D {
    let vals = psi
        .psi
        .iter()
        .enumerate()
        .map(|(n, z)| {
            let (x, y) = psi.mesh.position(n);
            let w = Complex64::new(x - c.0, y - c.1);
            z * w / (w.norm_sqr() + core * core).sqrt()
        })
        .collect();
    Field2D::new(psi.mesh.clone(), vals).unwrap()
}

#[test]
fn zero_order_parameter_has_potential_energy_only() {
    let s = setup(0.25, 0.05, 64, 64);
    let psi = Field2D::constant(s.mesh.clone(), Complex64::new(0.0, 0.0));
    let e = gl_energy(&psi, &Gauge2D::zero(s.mesh.clone()), &s.u.model, 0.0).unwrap();
    let exact = PI * (0.25 + 0.0625 * 0.75) / (2.0 * 0.05 * 0.05);
    assert!((e.total - exact).abs() < 1e-10 * exact, "{} vs {exact}", e.total);
    assert_eq!(e.kinetic, 0.0);
    assert_eq!(e.field, 0.0);
}

#[test]
fn radial_minimizer_has_energy_c0() {
    let s = setup(0.25, 0.05, 96, 64);
    let psi = Field2D::radial(s.mesh.clone(), &s.u.values).unwrap();
    let e = gl_energy(&psi, &Gauge2D::zero(s.mesh.clone()), &s.u.model, 0.0).unwrap();
    let c0 = energy_c0(&s.u);
    assert!((e.total - c0).abs() < 1e-6 * c0, "{} vs {c0}", e.total);
}

#[test]
fn applied_field_changes_only_the_field_term() {
    let s = setup(4.0, 0.05, 64, 64);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (psi, a) = random_pair(&s, &mut rng);
    let e0 = gl_energy(&psi, &a, &s.u.model, 0.0).unwrap();
    let e3 = gl_energy(&psi, &a, &s.u.model, 3.0).unwrap();
    assert_eq!(e0.kinetic, e3.kinetic);
    assert_eq!(e0.potential, e3.potential);
    assert!(e0.field != e3.field);
    // With A = 0 the field term is H²|Ω|.
    let zero = gl_energy(&psi, &Gauge2D::zero(s.mesh.clone()), &s.u.model, 3.0).unwrap();
    assert!((zero.field - 9.0 * PI).abs() < 1e-10);
    assert!(gl_energy(&psi, &a, &s.u.model, -1.0).is_err());
}

#[test]
fn splitting_vanishes_on_the_radial_state_and_detects_a_vortex() {
    let s = setup(0.25, 0.05, 96, 96);
    let psi = Field2D::radial(s.mesh.clone(), &s.u.values).unwrap();
    let zero = Gauge2D::zero(s.mesh.clone());
    let e = split_energy(&psi, &zero, &s.u, 0.0).unwrap();
    assert!(e.split_f.unwrap().abs() < 1e-8 * e.total);
    let vortex = with_vortex(&psi, (0.3, 0.1), 0.05);
    let ev = split_energy(&vortex, &zero, &s.u, 0.0).unwrap();
    assert!(ev.split_f.unwrap() > 1.0);
    assert!((ev.total - ev.split_c0.unwrap() - ev.split_f.unwrap()).abs() < 1e-10 * ev.total);
}

#[test]
fn meissner_state_matches_london_energy() {
    let s = setup(0.25, 0.05, 128, 64);
    let (psi0, a0) = meissner_configuration(&s.u, &s.sol, 0.0, s.mesh.clone()).unwrap();
    assert!(a0.a_rad.iter().chain(&a0.a_ang).all(|&v| v == 0.0));
    let c0 = energy_c0(&s.u);
    let e0 = gl_energy(&psi0, &a0, &s.u.model, 0.0).unwrap();
    assert!((e0.total - c0).abs() < 1e-6 * c0);

    let h = 1.0;
    let (psi, a) = meissner_configuration(&s.u, &s.sol, h, s.mesh.clone()).unwrap();
    let e = gl_energy(&psi, &a, &s.u.model, h).unwrap();
    let expected = c0 + h * h * j0_energy(&s.sol);
    assert!(
        (e.total - expected).abs() < 1e-4 * expected,
        "{} vs {expected}",
        e.total
    );
    assert!(
        (a.boundary_curl() - h).abs() < 1e-3,
        "curl A(1) = {}",
        a.boundary_curl()
    );
    assert!(a.divergence_residual() < 1e-10);
}

#[test]
fn meissner_state_has_no_reduced_vorticity() {
    let s = setup(0.25, 0.05, 96, 64);
    let h = 5.0;
    let (psi, a) = meissner_configuration(&s.u, &s.sol, h, s.mesh.clone()).unwrap();
    let phi = psi.divided_by(&s.u).unwrap();
    let mu = vorticity(&phi, &a).unwrap();
    let worst = mu.density.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    assert!(worst < 1e-10 * h, "max|μ| = {worst}");
}

#[test]
fn unit_field_has_no_vorticity() {
    let s = setup(0.25, 0.05, 64, 48);
    let psi = Field2D::constant(s.mesh.clone(), Complex64::new(1.0, 0.0));
    let mu = vorticity(&psi, &Gauge2D::zero(s.mesh.clone())).unwrap();
    assert!(mu.density.iter().all(|&v| v.abs() < 1e-14));
    assert!(mu.total.abs() < 1e-12);
}

#[test]
fn single_vortex_carries_two_pi() {
    let s = setup(0.25, 0.05, 128, 128);
    let one = Field2D::constant(s.mesh.clone(), Complex64::new(1.0, 0.0));
    let psi = with_vortex(&one, (0.2, -0.1), 0.02);
    let mu = vorticity(&psi, &Gauge2D::zero(s.mesh.clone())).unwrap();
    assert!((mu.total / (2.0 * PI) - 1.0).abs() < 0.05, "∫μ = {}", mu.total);
}

#[test]
fn coulomb_projection_is_a_gauge_change() {
    let s = setup(0.25, 0.05, 64, 48);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (psi, a) = random_pair(&s, &mut rng);
    let (p2, a2, f) = coulomb_projection(&psi, &a).unwrap();
    assert_eq!(f.len(), s.mesh.n_plaquettes());
    assert!(a2.divergence_residual() < 1e-9);
    assert!(a2.normal_trace_residual() < 1e-9);
    for (c1, c2) in a.circulation().iter().zip(a2.circulation()) {
        assert!((c1 - c2).abs() < 1e-12);
    }
    let e1 = gl_energy(&psi, &a, &s.u.model, 2.0).unwrap().total;
    let e2 = gl_energy(&p2, &a2, &s.u.model, 2.0).unwrap().total;
    assert!((e1 - e2).abs() < 1e-10 * e1);
}

#[test]
fn zero_field_minimization_recovers_the_radial_profile() {
    let s = setup(0.25, 0.1, 64, 48);
    let (psi0, a0) = random_smooth_init(s.mesh.clone(), 5);
    let (psi, a, report) = minimize(&s.u.model, 0.0, (&psi0, &a0), &MinimizeOptions::default()).unwrap();
    let lifted = s.mesh.lift_radial(&s.u.values);
    let worst = lifted
        .iter()
        .zip(&psi.psi)
        .map(|(&u, z)| (z.norm() - u).abs())
        .fold(0.0, f64::max);
    assert!(worst < 0.02, "max||ψ|−u| = {worst}, {report:?}");
    let c0 = energy_c0(&s.u);
    assert!((report.energy.total - c0).abs() < 1e-4 * c0);
    assert!(a.h_field().iter().all(|h| h.abs() < 1e-3));
}

#[test]
fn weak_field_minimizer_stays_vortex_free() {
    let s = setup(0.25, 0.1, 64, 64);
    let h = 0.5 * s.sol.k_eps * s.u.model.log_eps().abs();
    let (psi0, a0) = meissner_configuration(&s.u, &s.sol, h, s.mesh.clone()).unwrap();
    let e_init = gl_energy(&psi0, &a0, &s.u.model, h).unwrap().total;
    let (psi, _, report) = minimize(&s.u.model, h, (&psi0, &a0), &MinimizeOptions::default()).unwrap();
    assert!(report.energy.total <= e_init);
    let phi = psi.divided_by(&s.u).unwrap();
    let min = phi.modulus().iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(min > 0.5, "min|φ| = {min}");
    let lifted = s.mesh.lift_radial(&s.u.values);
    assert!(psi.psi.iter().zip(&lifted).all(|(z, &u)| z.norm() <= u + 1e-6));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn energy_is_gauge_invariant(seed in any::<u64>(), c in -3.0f64..3.0, k in 0.5f64..5.0) {
        let s = setup(0.25, 0.05, 64, 32);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (psi, a) = random_pair(&s, &mut rng);
        let chi: Vec<f64> = (0..s.mesh.n_nodes())
            .map(|n| {
                let (x, y) = s.mesh.position(n);
                c * (k * x).sin() * (0.7 * k * y + 0.3).cos() + 0.5 * x * y
            })
            .collect();
        let (p2, a2) = gauge_transform(&psi, &a, &chi).unwrap();
        let e1 = gl_energy(&psi, &a, &s.u.model, 1.5).unwrap().total;
        let e2 = gl_energy(&p2, &a2, &s.u.model, 1.5).unwrap().total;
        prop_assert!((e1 - e2).abs() < 1e-10 * e1);
    }

    #[test]
    fn splitting_identity_holds(seed in any::<u64>(), a_level in prop_oneof![0.1f64..0.9, 1.5f64..6.0], h in 0.0f64..10.0) {
        let s = setup(a_level, 0.05, 64, 32);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (psi, a) = random_pair(&s, &mut rng);
        let e = split_energy(&psi, &a, &s.u, h).unwrap();
        let gap = (e.total - e.split_c0.unwrap() - e.split_f.unwrap()).abs();
        prop_assert!(gap <= 1e-10 * (1.0 + e.total.abs()));
    }

    #[test]
    fn gradient_matches_directional_differences(seed in any::<u64>(), h in 0.0f64..5.0) {
        let s = setup(0.25, 0.1, 64, 24);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (psi, a) = random_pair(&s, &mut rng);
        let (g_psi, g_rad, g_ang) = gl_gradient(&psi, &a, &s.u.model, h).unwrap();
        let dpsi: Vec<Complex64> =
            (0..psi.psi.len()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let drad: Vec<f64> = (0..g_rad.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dang: Vec<f64> = (0..g_ang.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let analytic: f64 = g_psi.iter().zip(&dpsi).map(|(g, d)| g.re * d.re + g.im * d.im).sum::<f64>()
            + g_rad.iter().zip(&drad).map(|(g, d)| g * d).sum::<f64>()
            + g_ang.iter().zip(&dang).map(|(g, d)| g * d).sum::<f64>();
        let shifted = |t: f64| {
            let p: Vec<Complex64> = psi.psi.iter().zip(&dpsi).map(|(z, d)| z + t * d).collect();
            let r: Vec<f64> = a.a_rad.iter().zip(&drad).map(|(x, d)| x + t * d).collect();
            let q: Vec<f64> = a.a_ang.iter().zip(&dang).map(|(x, d)| x + t * d).collect();
            let p = Field2D::new(s.mesh.clone(), p).unwrap();
            let g = Gauge2D::new(s.mesh.clone(), r, q).unwrap();
            gl_energy(&p, &g, &s.u.model, h).unwrap().total
        };
        let t = 1e-5;
        let fd = (shifted(t) - shifted(-t)) / (2.0 * t);
        prop_assert!((fd - analytic).abs() <= 1e-6 * analytic.abs().max(1.0), "fd {} vs {}", fd, analytic);
    }

    #[test]
    fn minimization_never_increases_energy(seed in 0u64..1000, h in 0.0f64..8.0) {
        let s = setup(4.0, 0.1, 64, 32);
        let (psi0, a0) = random_smooth_init(s.mesh.clone(), seed);
        let e_init = gl_energy(&psi0, &a0, &s.u.model, h).unwrap().total;
        let opts = MinimizeOptions { max_iter: 200, ..MinimizeOptions::default() };
        let (psi, a, report) = minimize(&s.u.model, h, (&psi0, &a0), &opts).unwrap();
        let e = gl_energy(&psi, &a, &s.u.model, h).unwrap().total;
        prop_assert!(e <= e_init);
        prop_assert!((e - report.energy.total).abs() <= 1e-9 * e);
    }
}
