use pinned_gl::green::{
    build_test_configuration, equally_spaced, green_double_integral, green_representation, green_with, log_slope,
    minimize_renormalized, nearest_node, renormalized_energy, select_sites, test_circle_radius, test_config_energy,
    total_source, GreenSolver, TestConfiguration,
};
use pinned_gl::london::{j0_energy, solve_london, LondonSolution};
use pinned_gl::model::{DiscMesh, PinningModel, RadialGrid};
use pinned_gl::profile1d::{solve_radial_minimizer, RadialProfile};
use pinned_gl::Error;
use proptest::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;

struct Setup {
    mesh: Arc<DiscMesh>,
    u: RadialProfile,
    sol: LondonSolution,
    solver: GreenSolver,
}

fn setup(a: f64, eps: f64, n_r: usize, n_theta: usize) -> Setup {
    let model = PinningModel::new(a, 0.5, eps).unwrap();
    let mesh = Arc::new(DiscMesh::for_model(&model, n_r, n_theta).unwrap());
    let u = solve_radial_minimizer(&model, mesh.grid()).unwrap();
    let sol = solve_london(&u).unwrap();
    let solver = GreenSolver::new(&u, mesh.clone()).unwrap();
    Setup { mesh, u, sol, solver }
}

/// Iₖ(x) by its power series.
fn bessel_i0(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let (mut term, mut sum) = (1.0, 1.0);
    for j in 1..60 {
        term *= q / (j * j) as f64;
        sum += term;
    }
    sum
}

/// K₀(x) = −(ln(x/2) + γ_E)I₀(x) + Σ (x²/4)^k/(k!)² H_k.
fn bessel_k0(x: f64) -> f64 {
    const EULER: f64 = 0.577_215_664_901_532_9;
    let q = 0.25 * x * x;
    let (mut term, mut harmonic, mut sum) = (1.0, 0.0, 0.0);
    for k in 1..60 {
        term *= q / (k * k) as f64;
        harmonic += 1.0 / k as f64;
        sum += term * harmonic;
    }
    -((0.5 * x).ln() + EULER) * bessel_i0(x) + sum
}

/// u ≡ 1 on a uniform radial grid; the model only supplies ε.
fn unit_profile(n: usize) -> RadialProfile {
    let model = PinningModel::new(0.25, 0.5, 0.05).unwrap();
    let grid = RadialGrid::uniform(n, 0.5).unwrap();
    RadialProfile {
        model,
        values: vec![1.0; n],
        deviation: vec![0.0; n],
        grid,
        newton_iterations: 0,
        residual: 0.0,
    }
}

fn config(s: &Setup, n: usize) -> TestConfiguration {
    build_test_configuration(n, &s.u, &s.solver).unwrap()
}

#[test]
fn kernel_matches_bessel_oracle_for_unit_coefficient() {
    let u = unit_profile(257);
    let mesh = Arc::new(DiscMesh::new(u.grid.clone(), 128).unwrap());
    let solver = GreenSolver::new(&u, mesh.clone()).unwrap();
    let k = green_with(&solver, (0.0, 0.0)).unwrap();
    assert_eq!(k.source_node, 0);
    let (k1, i1) = (bessel_k0(1.0), bessel_i0(1.0));
    for (i, &r) in mesh
        .radii()
        .iter()
        .enumerate()
        .filter(|(_, &r)| (0.2..=0.9).contains(&r))
    {
        let oracle = (bessel_k0(r) - k1 * bessel_i0(r) / i1) / (2.0 * PI);
        let g = k.values[mesh.node(i, 0)];
        assert!((g - oracle).abs() < 1e-3 * oracle, "r = {r}: {g} vs {oracle}");
    }
}

#[test]
fn kernel_is_nonnegative_symmetric_and_zero_on_the_boundary() {
    let s = setup(0.25, 0.05, 128, 96);
    let sources = [(0.3, 0.1), (-0.2, 0.55), (0.0, -0.7), (0.6, 0.0)];
    let kernels: Vec<_> = sources.iter().map(|&y| green_with(&s.solver, y).unwrap()).collect();
    let nr = s.mesh.n_r();
    for k in &kernels {
        assert!(k.values.iter().all(|&v| v >= 0.0));
        assert!((0..s.mesh.n_theta()).all(|j| k.values[s.mesh.node(nr - 1, j)] == 0.0));
        let max = k.values.iter().cloned().fold(0.0, f64::max);
        assert_eq!(max, k.values[k.source_node]);
    }
    for a in &kernels {
        for b in &kernels {
            let (x, y) = (a.values[b.source_node], b.values[a.source_node]);
            assert!((x - y).abs() <= 1e-10 * x.abs().max(1e-12));
        }
    }
    assert!(matches!(green_with(&s.solver, (0.995, 0.0)), Err(Error::Domain(_))));
}

#[test]
fn regular_part_stays_bounded() {
    let s = setup(0.25, 0.05, 128, 128);
    for y in [(0.2, 0.0), (0.0, 0.5), (-0.4, -0.4)] {
        let k = green_with(&s.solver, y).unwrap();
        let worst = k.regular_part.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        assert!(worst < 1.0, "sup|v| = {worst} for y = {y:?}");
    }
}

#[test]
fn log_slope_approaches_u_squared_over_two_pi() {
    let s = setup(0.25, 0.02, 384, 512);
    let k = green_with(&s.solver, (0.2, 0.0)).unwrap();
    let slope = log_slope(&k, &s.mesh, 3.0 * 0.02, 10.0 * 0.02).unwrap();
    let expected = 1.0 / (2.0 * PI);
    assert!((slope / expected - 1.0).abs() < 0.05, "{slope} vs {expected}");
    assert!(log_slope(&k, &s.mesh, 1e-6, 2e-6).is_err());
}

#[test]
fn nearest_node_examples() {
    let s = setup(0.25, 0.05, 64, 32);
    assert_eq!(nearest_node(&s.mesh, 0.0, 0.0), 0);
    assert_eq!(nearest_node(&s.mesh, 1e-4, -1e-4), 0);
    let n = nearest_node(&s.mesh, 0.5, 0.0);
    assert_eq!(s.mesh.position(n), (0.5, 0.0));
}

#[test]
fn site_selection() {
    let s = setup(0.25, 0.05, 128, 128);
    let r_eps = test_circle_radius(0.5, 0.05);
    assert!((r_eps - (0.5 + 20f64.ln().ln() / 20f64.ln())).abs() < 1e-15);
    let sel = select_sites(4, r_eps, &s.solver, 0.05).unwrap();
    assert_eq!(sel.points.len(), 4);
    for w in sel.points.windows(2) {
        let d = (w[0].0 - w[1].0).hypot(w[0].1 - w[1].1);
        assert!((d - r_eps * 2f64.sqrt()).abs() < 1e-12);
    }
    assert!(sel.max_regular.is_finite());
    assert!((0.0..PI / 2.0).contains(&sel.offset));
    assert_eq!(select_sites(1, r_eps, &s.solver, 0.05).unwrap().points.len(), 1);
    assert!(matches!(select_sites(0, r_eps, &s.solver, 0.05), Err(Error::Domain(_))));
    assert!(matches!(
        select_sites(40, r_eps, &s.solver, 0.05),
        Err(Error::TooManySites(_))
    ));
    let pts = equally_spaced(3, 0.5, 0.0);
    assert_eq!(pts[0], (0.5, 0.0));
}

#[test]
fn test_configuration_sources_and_amplitude() {
    let s = setup(0.25, 0.05, 192, 256);
    for n in 1..=3 {
        let cfg = config(&s, n);
        let total = total_source(&cfg, &s.mesh);
        assert!(
            (total / (2.0 * PI * n as f64) - 1.0).abs() < 1e-3,
            "n = {n}: ∫μ = {total}"
        );
        for &c in &cfg.sites {
            let local: Vec<f64> = (0..s.mesh.n_nodes())
                .map(|k| {
                    let (x, y) = s.mesh.position(k);
                    if (x - c.0).hypot(y - c.1) < 0.2 {
                        cfg.mu_density[k]
                    } else {
                        0.0
                    }
                })
                .collect();
            assert!((s.mesh.integrate(&local) / (2.0 * PI) - 1.0).abs() < 1e-3);
        }
        assert!(cfg.rho.iter().all(|&r| (0.0..=1.0).contains(&r)));
        for k in 0..s.mesh.n_nodes() {
            let (x, y) = s.mesh.position(k);
            let d = cfg
                .sites
                .iter()
                .map(|c| (x - c.0).hypot(y - c.1))
                .fold(f64::INFINITY, f64::min);
            if d <= 0.05 {
                assert_eq!(cfg.rho[k], 0.0);
            }
            if d >= 0.1 {
                assert_eq!(cfg.rho[k], 1.0);
            }
        }
        let nr = s.mesh.n_r();
        assert!((0..s.mesh.n_theta()).all(|j| cfg.h_prime[s.mesh.node(nr - 1, j)] == 0.0));
        assert!(cfg.h_prime.iter().all(|&v| v >= 0.0));
    }
}

#[test]
fn green_representation_reproduces_h_prime() {
    let s = setup(0.25, 0.05, 128, 128);
    let cfg = config(&s, 2);
    for (x, y) in [(0.0, 0.0), (0.3, 0.2), (-0.5, 0.1), (0.1, -0.8), (0.7, 0.0)] {
        let node = nearest_node(&s.mesh, x, y);
        let rep = green_representation(&cfg, &s.solver, node);
        let direct = cfg.h_prime[node];
        assert!(
            (rep - direct).abs() <= 1e-4 * direct.abs().max(1e-3),
            "{rep} vs {direct}"
        );
    }
}

#[test]
fn double_integral_is_the_h_prime_energy() {
    let s = setup(4.0, 0.05, 128, 128);
    let h = 2.0 * s.sol.k_eps * s.u.model.log_eps().abs();
    for n in 1..=2 {
        let cfg = config(&s, n);
        let (_, terms) = test_config_energy(&cfg, &s.u, &s.sol, &s.solver, h).unwrap();
        let dbl = green_double_integral(&cfg, &s.solver);
        assert!(
            (dbl / terms.h_prime_energy - 1.0).abs() < 1e-3,
            "{dbl} vs {}",
            terms.h_prime_energy
        );
    }
}

#[test]
fn vortex_free_test_configuration_is_the_meissner_energy() {
    let s = setup(0.25, 0.05, 128, 96);
    let cfg = config(&s, 0);
    assert!(cfg.sites.is_empty());
    assert!(cfg.h_prime.iter().all(|&v| v == 0.0));
    let h = 7.0;
    let (e, terms) = test_config_energy(&cfg, &s.u, &s.sol, &s.solver, h).unwrap();
    let expected = h * h * j0_energy(&s.sol);
    assert!((e.total - expected).abs() <= 1e-12 * expected);
    assert_eq!(terms.potential, 0.0);
    assert_eq!(terms.cross, 0.0);
}

#[test]
fn test_energy_increases_with_n_at_low_field() {
    let s = setup(0.25, 0.05, 128, 128);
    let h = 0.2 * s.sol.k_eps * s.u.model.log_eps().abs();
    let energies: Vec<f64> = (0..=3)
        .map(|n| {
            test_config_energy(&config(&s, n), &s.u, &s.sol, &s.solver, h)
                .unwrap()
                .0
                .total
        })
        .collect();
    assert!(energies.windows(2).all(|w| w[1] > w[0]), "{energies:?}");
}

#[test]
fn renormalized_energy_minimizers() {
    let one = minimize_renormalized(1, 3.0, 4, 1).unwrap();
    assert!(one[0].0.hypot(one[0].1) < 1e-6);
    assert!(minimize_renormalized(0, 1.0, 4, 1).unwrap().is_empty());
    assert!(matches!(minimize_renormalized(2, 0.0, 4, 1), Err(Error::Domain(_))));
    assert!(matches!(
        renormalized_energy(&[(0.1, 0.2), (0.1, 0.2)], 1.0),
        Err(Error::Singular(_))
    ));

    // Two points ±d/2: w = −4π ln d + π·xi2·d², minimized at d = √(2/xi2).
    let xi2 = 1.0;
    let two = minimize_renormalized(2, xi2, 8, 7).unwrap();
    let d = (two[0].0 - two[1].0).hypot(two[0].1 - two[1].1);
    assert!((d - (2.0 / xi2).sqrt()).abs() < 1e-6, "d = {d}");
    assert!(two[0].1.abs() < 1e-12 && two[0].0 > 0.0);
    let (_, g) = renormalized_energy(&two, xi2).unwrap();
    // Stationary relative to the pair force 4π/d; energy-based line search
    // cannot resolve the gradient much below √(ulp·curvature).
    let force = 4.0 * PI / d;
    assert!(g.iter().all(|v| v.abs() < 1e-8 * force), "{g:?}");

    // Three points settle on an equilateral triangle centred at the origin.
    let three = minimize_renormalized(3, 2.0, 8, 3).unwrap();
    let radii: Vec<f64> = three.iter().map(|p| p.0.hypot(p.1)).collect();
    assert!(radii.iter().all(|r| (r - radii[0]).abs() < 1e-6), "{radii:?}");
}

#[test]
fn minimizers_are_reproducible_from_the_seed() {
    let a = minimize_renormalized(4, 1.5, 6, 42).unwrap();
    let b = minimize_renormalized(4, 1.5, 6, 42).unwrap();
    assert_eq!(a, b);
}

fn points_strategy(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n).prop_filter("distinct points", |p| {
        p.iter()
            .enumerate()
            .all(|(i, a)| p[i + 1..].iter().all(|b| (a.0 - b.0).hypot(a.1 - b.1) > 1e-2))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn renormalized_gradient_matches_differences(pts in (1usize..6).prop_flat_map(points_strategy), xi2 in 0.1f64..5.0) {
        let (_, g) = renormalized_energy(&pts, xi2).unwrap();
        let t = 1e-6;
        for k in 0..2 * pts.len() {
            let shift = |s: f64| {
                let mut p = pts.clone();
                if k % 2 == 0 { p[k / 2].0 += s } else { p[k / 2].1 += s }
                renormalized_energy(&p, xi2).unwrap().0
            };
            let fd = (shift(t) - shift(-t)) / (2.0 * t);
            prop_assert!((fd - g[k]).abs() <= 1e-5 * g[k].abs().max(1.0), "{} vs {}", fd, g[k]);
        }
    }

    #[test]
    fn renormalized_energy_is_rotation_invariant(pts in (1usize..6).prop_flat_map(points_strategy), xi2 in 0.1f64..5.0, t in 0.0f64..6.3) {
        let (s, c) = t.sin_cos();
        let rotated: Vec<(f64, f64)> = pts.iter().map(|p| (c * p.0 - s * p.1, s * p.0 + c * p.1)).collect();
        let w0 = renormalized_energy(&pts, xi2).unwrap().0;
        let w1 = renormalized_energy(&rotated, xi2).unwrap().0;
        prop_assert!((w0 - w1).abs() <= 1e-10 * w0.abs().max(1.0));
    }

    #[test]
    fn renormalized_energy_scales_with_confinement(pts in (2usize..6).prop_flat_map(points_strategy), xi2 in 0.1f64..5.0, s in 0.2f64..5.0) {
        // w(s·x; xi2/s²) = w(x; xi2) − 2π·n(n−1)·ln s.
        let n = pts.len() as f64;
        let scaled: Vec<(f64, f64)> = pts.iter().map(|p| (s * p.0, s * p.1)).collect();
        let w0 = renormalized_energy(&pts, xi2).unwrap().0;
        let w1 = renormalized_energy(&scaled, xi2 / (s * s)).unwrap().0;
        let expected = w0 - 2.0 * PI * n * (n - 1.0) * s.ln();
        prop_assert!((w1 - expected).abs() <= 1e-9 * expected.abs().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn minimizer_scales_as_inverse_root_of_confinement(n in 2usize..5, xi2 in 0.5f64..3.0, seed in 0u64..100) {
        let a = minimize_renormalized(n, xi2, 6, seed).unwrap();
        let b = minimize_renormalized(n, 4.0 * xi2, 6, seed).unwrap();
        let wa = renormalized_energy(&a, xi2).unwrap().0;
        let halved: Vec<(f64, f64)> = b.iter().map(|p| (2.0 * p.0, 2.0 * p.1)).collect();
        let wb = renormalized_energy(&halved, xi2).unwrap().0;
        prop_assert!((wa - wb).abs() <= 1e-6 * wa.abs().max(1.0), "{} vs {}", wa, wb);
    }
}
