//! Invariant suite of every module on the preset models a = 0.25 and a = 4
//! at ε = 0.05.

use crate::commands::Prepared;
use crate::config::RunConfig;
use crate::output::{write_summary, CliError, CliResult};
use num_complex::Complex64;
use pinned_gl::gl2d::{
    gauge_transform, gl_energy, gl_gradient, meissner_configuration, minimize_with_policy, random_smooth_init,
    split_energy, vorticity, Field2D, Gauge2D, MinimizeOptions, MinimizeReport, SPLIT_TOLERANCE,
};
use pinned_gl::green::{
    build_test_configuration, green_double_integral, renormalized_energy, test_config_energy, GreenSolver,
};
use pinned_gl::london::{edge_flux, flux_jump_at_interface, solve_london, Attractor};
use pinned_gl::model::{graded_radial_grid, step_potential};
use pinned_gl::profile1d::{
    audit_closed_form, degennes_gamma, profile_deviation, robin_ratio, solve_canonical_profile, solve_radial_minimizer,
};
use pinned_gl::vortices::{field_statistics, signed_degree};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;

const PRESETS: [f64; 2] = [0.25, 4.0];
const PRESET_EPS: f64 = 0.05;

#[derive(Debug, Clone, Serialize)]
struct Check {
    module: &'static str,
    name: &'static str,
    pass: bool,
    detail: String,
}

#[derive(Serialize)]
struct PresetReport {
    a: f64,
    epsilon: f64,
    checks: Vec<Check>,
}

#[derive(Serialize)]
struct VerifySummary {
    passed: usize,
    failed: usize,
    presets: Vec<PresetReport>,
}

struct Checks(Vec<Check>);

impl Checks {
    fn push(&mut self, module: &'static str, name: &'static str, pass: bool, detail: String) {
        eprintln!("[{}] {module}/{name}: {detail}", if pass { "ok" } else { "FAIL" });
        self.0.push(Check {
            module,
            name,
            pass,
            detail,
        });
    }
}

pub fn run(cfg: &RunConfig) -> CliResult<()> {
    let mut presets = Vec::new();
    for a in PRESETS {
        let preset = RunConfig {
            a,
            epsilon: PRESET_EPS,
            ..cfg.clone()
        };
        let mut checks = Checks(Vec::new());
        eprintln!("preset a = {a}, ε = {PRESET_EPS}");
        check_model(&preset, &mut checks)?;
        check_profile(&preset, &mut checks)?;
        check_london(&preset, &mut checks)?;
        check_two_dimensional(&preset, &mut checks)?;
        check_renormalized(cfg.seed, &mut checks)?;
        presets.push(PresetReport {
            a,
            epsilon: PRESET_EPS,
            checks: checks.0,
        });
    }
    let failed = presets.iter().flat_map(|p| &p.checks).filter(|c| !c.pass).count();
    let passed = presets.iter().map(|p| p.checks.len()).sum::<usize>() - failed;
    let names: Vec<String> = presets
        .iter()
        .flat_map(|p| {
            p.checks
                .iter()
                .filter(|c| !c.pass)
                .map(move |c| format!("a={} {}/{}", p.a, c.module, c.name))
        })
        .collect();
    write_summary(
        &cfg.out,
        "verify",
        VerifySummary {
            passed,
            failed,
            presets,
        },
    )?;
    if failed > 0 {
        return Err(CliError::Violation(format!(
            "{failed} checks failed: {}",
            names.join(", ")
        )));
    }
    Ok(())
}

fn check_model(cfg: &RunConfig, out: &mut Checks) -> CliResult<()> {
    let model = cfg.model()?;
    let values_ok = (0..=1000).all(|k| {
        let r = k as f64 / 1000.0;
        let p = step_potential(&model, r).expect("radius in [0,1]");
        p == if r <= model.r_int() { 1.0 } else { model.a() }
    });
    let jump =
        step_potential(&model, model.r_int())? == 1.0 && step_potential(&model, model.r_int() + 1e-12)? == model.a();
    out.push(
        "model",
        "step_potential",
        values_ok && jump,
        format!("values in {{1, a}}: {values_ok}, jump at R: {jump}"),
    );
    let (_, mesh) = cfg.disc_mesh()?;
    let area = mesh.integrate(&vec![1.0; mesh.n_nodes()]);
    let rel = (area / PI - 1.0).abs();
    out.push(
        "model",
        "quadrature",
        rel < 1e-10,
        format!("∫1 = {area:.15}, relative error {rel:.1e}"),
    );
    Ok(())
}

fn check_profile(cfg: &RunConfig, out: &mut Checks) -> CliResult<()> {
    let (model, grid) = cfg.radial_grid()?;
    let u = solve_radial_minimizer(&model, &grid)?;
    out.push(
        "profile1d",
        "newton_residual",
        u.residual < 1e-10,
        format!("{:.1e}", u.residual),
    );
    let gap = u
        .bound_gaps()
        .iter()
        .fold(f64::INFINITY, |m, &(lo, hi)| m.min(lo).min(hi));
    let monotone = u
        .values
        .windows(2)
        .all(|w| if model.a() < 1.0 { w[1] <= w[0] } else { w[1] >= w[0] });
    out.push(
        "profile1d",
        "bounds_and_monotonicity",
        gap > 0.0 && monotone,
        format!("min gap {gap:.2e}, monotone {monotone}"),
    );

    let canonical = solve_canonical_profile(model.a())?;
    let fine = model.with_epsilon(0.02)?;
    let uf = solve_radial_minimizer(&fine, &graded_radial_grid(&fine, 4096)?)?;
    let dev = profile_deviation(&uf, &canonical, Some(5.0 * 0.02));
    out.push(
        "profile1d",
        "shooting_vs_bvp",
        dev <= 0.05,
        format!("ε=0.02, |r−R| ≤ 5ε: {dev:.4}"),
    );

    let gamma = degennes_gamma(&canonical);
    let mut ratios = Vec::new();
    for eps in [0.04, 0.02, 0.01] {
        let m = model.with_epsilon(eps)?;
        let ue = solve_radial_minimizer(&m, &graded_radial_grid(&m, 4096)?)?;
        ratios.push(robin_ratio(&ue, gamma).abs());
    }
    let decreasing = ratios.windows(2).all(|w| w[1] < w[0]);
    out.push(
        "profile1d",
        "robin_ratio",
        decreasing,
        format!("|εu′/u + γ| = {:?}", ratios),
    );

    let audit = audit_closed_form(&canonical);
    let reported = audit.matches || !audit.report.is_empty();
    out.push("profile1d", "closed_form_audit", reported, audit.report);
    Ok(())
}

fn check_london(cfg: &RunConfig, out: &mut Checks) -> CliResult<()> {
    let (model, grid) = cfg.radial_grid()?;
    let u = solve_radial_minimizer(&model, &grid)?;
    let sol = solve_london(&u)?;
    let n = sol.h.len();
    let max_at_boundary = sol.h[..n - 1].iter().all(|&v| v < sol.h[n - 1]);
    out.push(
        "london",
        "maximum_principle",
        max_at_boundary,
        format!("h(1) = {}", sol.h[n - 1]),
    );
    let flux = edge_flux(&sol).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    out.push(
        "london",
        "gradient_bound",
        flux <= 1.0 + 1e-8,
        format!("max|h′/u²| = {flux:.6}"),
    );
    let jump = flux_jump_at_interface(&sol);
    out.push("london", "flux_continuity", jump < 1e-8, format!("jump {jump:.1e}"));
    if model.a() > 1.0 {
        let q: Vec<f64> = sol.h.iter().zip(&sol.u).map(|(h, u)| (1.0 - h) / (u * u)).collect();
        let ok = q.windows(2).all(|w| w[1] < w[0]);
        out.push(
            "london",
            "center_monotonicity",
            ok,
            format!("(1−h)/u² strictly decreasing: {ok}"),
        );
    }
    Ok(())
}

fn perturbed_pair(p: &Prepared, rng: &mut ChaCha8Rng) -> CliResult<(Field2D, Gauge2D)> {
    let (psi, a) = random_smooth_init(p.mesh.clone(), rng.gen());
    let scale: f64 = rng.gen_range(0.2..1.5);
    let psi = Field2D::new(p.mesh.clone(), psi.psi.iter().map(|z| z * scale).collect())?;
    let a_rad = a.a_rad.iter().map(|v| v + rng.gen_range(-0.3..0.3)).collect();
    let a_ang = a.a_ang.iter().map(|v| v + rng.gen_range(-0.3..0.3)).collect();
    Ok((psi, Gauge2D::new(p.mesh.clone(), a_rad, a_ang)?))
}

struct Minimized {
    h: f64,
    psi: Field2D,
    a: Gauge2D,
    report: MinimizeReport,
}

fn check_two_dimensional(cfg: &RunConfig, out: &mut Checks) -> CliResult<()> {
    let p = Prepared::new(cfg)?;
    let model = &p.u.model;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut worst_gauge = 0.0_f64;
    let mut worst_split = 0.0_f64;
    let mut worst_grad = 0.0_f64;
    for _ in 0..5 {
        let (psi, a) = perturbed_pair(&p, &mut rng)?;
        let (cx, cy, ph): (f64, f64, f64) = (
            rng.gen_range(0.5..3.0),
            rng.gen_range(0.5..3.0),
            rng.gen_range(0.0..6.0),
        );
        let chi: Vec<f64> = (0..p.mesh.n_nodes())
            .map(|n| {
                let (x, y) = p.mesh.position(n);
                (cx * x + ph).sin() * (cy * y).cos() + x * y
            })
            .collect();
        let (psi2, a2) = gauge_transform(&psi, &a, &chi)?;
        let e1 = gl_energy(&psi, &a, model, 1.0)?.total;
        let e2 = gl_energy(&psi2, &a2, model, 1.0)?.total;
        worst_gauge = worst_gauge.max((e1 - e2).abs() / e1.abs().max(1.0));

        let e = split_energy(&psi, &a, &p.u, 1.0)?;
        let gap = (e.total - e.split_c0.unwrap_or(0.0) - e.split_f.unwrap_or(0.0)).abs();
        worst_split = worst_split.max(gap / (1.0 + e.total.abs()));

        // Directional derivative along a random perturbation.
        let (g_psi, g_rad, g_ang) = gl_gradient(&psi, &a, model, 1.0)?;
        let d_psi: Vec<_> = (0..psi.psi.len())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let d_rad: Vec<f64> = (0..a.a_rad.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let d_ang: Vec<f64> = (0..a.a_ang.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let analytic: f64 = g_psi.iter().zip(&d_psi).map(|(g, d)| (g.conj() * d).re).sum::<f64>()
            + g_rad.iter().zip(&d_rad).map(|(g, d)| g * d).sum::<f64>()
            + g_ang.iter().zip(&d_ang).map(|(g, d)| g * d).sum::<f64>();
        let shifted = |t: f64| -> CliResult<f64> {
            let psi_t = Field2D::new(
                p.mesh.clone(),
                psi.psi.iter().zip(&d_psi).map(|(z, d)| z + d * t).collect(),
            )?;
            let a_t = Gauge2D::new(
                p.mesh.clone(),
                a.a_rad.iter().zip(&d_rad).map(|(v, d)| v + d * t).collect(),
                a.a_ang.iter().zip(&d_ang).map(|(v, d)| v + d * t).collect(),
            )?;
            Ok(gl_energy(&psi_t, &a_t, model, 1.0)?.total)
        };
        let t = 1e-5;
        let fd = (shifted(t)? - shifted(-t)?) / (2.0 * t);
        worst_grad = worst_grad.max((analytic - fd).abs() / fd.abs().max(1e-12));
    }
    out.push(
        "gl2d",
        "gauge_invariance",
        worst_gauge < 1e-8,
        format!("worst relative change {worst_gauge:.1e}"),
    );
    out.push(
        "gl2d",
        "splitting_identity",
        worst_split <= SPLIT_TOLERANCE,
        format!("worst {worst_split:.1e}"),
    );
    out.push(
        "gl2d",
        "gradient_check",
        worst_grad < 1e-5,
        format!("worst relative error {worst_grad:.1e}"),
    );

    let scale = p.field_scale();
    let mut runs = Vec::new();
    for factor in [0.5, 2.0] {
        let h = factor * scale;
        let (psi, a, report) = minimize_with_policy(&p.u, &p.sol, h, p.mesh.clone(), &MinimizeOptions::default())?;
        runs.push(Minimized { h, psi, a, report });
    }
    for run in &runs {
        let (m_psi, m_a) = meissner_configuration(&p.u, &p.sol, run.h, p.mesh.clone())?;
        let start = gl_energy(&m_psi, &m_a, model, run.h)?.total;
        let descent = run.report.energy.total <= start;
        out.push(
            "gl2d",
            "descent",
            descent,
            format!(
                "H = {:.3}: {:.6} from Meissner {start:.6}",
                run.h, run.report.energy.total
            ),
        );
        let ulift = p.mesh.lift_radial(&p.u.values);
        let excess = run
            .psi
            .psi
            .iter()
            .zip(&ulift)
            .map(|(z, u)| z.norm() - u)
            .fold(f64::MIN, f64::max);
        out.push(
            "gl2d",
            "diamagnetic",
            run.report.converged && excess <= 0.02,
            format!(
                "H = {:.3}: max(|ψ|−u) {excess:.2e}, converged {}",
                run.h, run.report.converged
            ),
        );
    }

    let (_, low_stats) = field_statistics(&runs[0].psi, &p.u)?;
    out.push(
        "vortices",
        "meissner_regime",
        low_stats.d_total == 0,
        format!("D at 0.5k|lnε| = {}", low_stats.d_total),
    );
    let high = &runs[1];
    let (balls, stats) = field_statistics(&high.psi, &p.u)?;
    out.push(
        "vortices",
        "nucleation",
        stats.d_total >= 1,
        format!("D at 2k|lnε| = {}", stats.d_total),
    );
    let phi = high.psi.divided_by(&p.u)?;
    let mu = vorticity(&phi, &high.a)?;
    let signed = signed_degree(&balls);
    let err = (mu.total - 2.0 * PI * signed as f64).abs();
    let bound = 0.1 * 2.0 * PI * stats.d_total.max(1) as f64;
    out.push(
        "vortices",
        "sum_rule",
        high.report.converged && err < bound,
        format!("∫μ/2π = {:.4}, signed degree {signed}", mu.total / (2.0 * PI)),
    );
    let (locus_ok, locus) = match p.sol.attractor {
        Attractor::Circle { radius } => {
            let off = balls
                .iter()
                .filter(|b| b.degree != 0)
                .map(|b| (b.center.0.hypot(b.center.1) - radius).abs())
                .fold(0.0, f64::max);
            (off < 0.1, format!("max||a_i|−R_ε| = {off:.4}"))
        }
        Attractor::CenterPoint => {
            let off = balls
                .iter()
                .filter(|b| b.degree != 0)
                .map(|b| b.center.0.hypot(b.center.1))
                .fold(0.0, f64::max);
            (off < 0.2, format!("max|a_i| = {off:.4}"))
        }
    };
    out.push("vortices", "pinning_locus", locus_ok, locus);
    if model.a() < 1.0 {
        out.push(
            "vortices",
            "positive_degrees",
            stats.d_minus == 0,
            format!("D− = {}", stats.d_minus),
        );
    }

    let solver = GreenSolver::new(&p.u, p.mesh.clone())?;
    let mut worst_sym = 0.0_f64;
    let inner: Vec<usize> = (0..p.mesh.n_nodes())
        .filter(|&n| {
            let (x, y) = p.mesh.position(n);
            x.hypot(y) < 0.9
        })
        .collect();
    for _ in 0..3 {
        let i = inner[rng.gen_range(0..inner.len())];
        let j = inner[rng.gen_range(0..inner.len())];
        let (gi, gj) = (solver.kernel_at_node(i), solver.kernel_at_node(j));
        worst_sym = worst_sym.max((gi[j] - gj[i]).abs() / gi[j].abs().max(gj[i].abs()).max(1e-300));
    }
    out.push("green", "symmetry", worst_sym < 1e-6, format!("worst {worst_sym:.1e}"));
    let minimized = split_energy(&high.psi, &high.a, &p.u, high.h)?
        .split_f
        .unwrap_or(f64::NAN);
    for n in 1..=3 {
        let tc = build_test_configuration(n, &p.u, &solver)?;
        let (e, terms) = test_config_energy(&tc, &p.u, &p.sol, &solver, high.h)?;
        let dbl = green_double_integral(&tc, &solver);
        let rel = (dbl / terms.h_prime_energy - 1.0).abs();
        out.push(
            "green",
            "double_integral",
            rel < 1e-3,
            format!("n = {n}: relative {rel:.1e}"),
        );
        out.push(
            "green",
            "upper_bound",
            e.total >= minimized,
            format!("n = {n}: test ℱ {:.4} vs minimized {minimized:.4}", e.total),
        );
    }
    Ok(())
}

fn check_renormalized(seed: u64, out: &mut Checks) -> CliResult<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let pts: Vec<(f64, f64)> = (0..4)
        .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let xi2 = rng.gen_range(0.5..2.0);
    let (w, _) = renormalized_energy(&pts, xi2)?;
    let t: f64 = rng.gen_range(0.0..2.0 * PI);
    let rotated: Vec<(f64, f64)> = pts
        .iter()
        .map(|&(x, y)| (x * t.cos() - y * t.sin(), x * t.sin() + y * t.cos()))
        .collect();
    let (wr, _) = renormalized_energy(&rotated, xi2)?;
    let rel = (w - wr).abs() / w.abs().max(1.0);
    out.push(
        "green",
        "rotation_invariance",
        rel < 1e-12,
        format!("relative change {rel:.1e}"),
    );
    let (w2, _) = renormalized_energy(&pts, 2.0 * xi2)?;
    let confinement = 2.0 * PI * xi2 * pts.iter().map(|p| p.0 * p.0 + p.1 * p.1).sum::<f64>();
    let err = ((w2 - w) - confinement).abs() / confinement;
    out.push(
        "green",
        "xi2_scaling",
        err < 1e-12,
        format!("confinement doubling error {err:.1e}"),
    );
    Ok(())
}
