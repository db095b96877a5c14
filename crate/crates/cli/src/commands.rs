//! One function per subcommand.

use crate::config::RunConfig;
use crate::output::{write_csv, write_summary, CliError, CliResult};
use pinned_gl::gl2d::{
    minimize_with_policy, split_energy, vortex_seed_count, vorticity, EnergyBreakdown, Field2D, Gauge2D,
    MinimizeOptions,
};
use pinned_gl::green::{
    build_test_configuration, green_double_integral, green_with, log_slope, minimize_renormalized, nearest_node,
    renormalized_energy, test_config_energy, GreenSolver, TestEnergyTerms,
};
use pinned_gl::london::{j0_energy, solve_london, xi_second_derivative_at_origin, LondonSolution};
use pinned_gl::model::DiscMesh;
use pinned_gl::profile1d::{
    audit_closed_form, degennes_gamma, energy_c0, interface_decay_rate, residual_vector, robin_ratio,
    solve_canonical_profile, solve_radial_minimizer, RadialProfile,
};
use pinned_gl::vortices::{
    critical_field_sweep, degree_statistics, detect_vortices, interface_tolerance, signed_degree, DegreeStats,
};
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Serialize)]
struct ProfileRow {
    r: f64,
    u: f64,
    #[serde(rename = "U_ref")]
    u_ref: f64,
    residual: f64,
}

#[derive(Serialize)]
struct ProfileSummary {
    a: f64,
    #[serde(rename = "R")]
    r_int: f64,
    epsilon: f64,
    gamma: f64,
    c0: f64,
    decay_rate: Option<f64>,
    robin_ratio: f64,
    grid_nodes: usize,
    newton_iterations: usize,
    residual: f64,
    shooting_residual: f64,
    closed_form_matches: bool,
    closed_form_report: String,
}

pub fn profile(cfg: &RunConfig) -> CliResult<()> {
    let (model, grid) = cfg.radial_grid()?;
    let canonical = solve_canonical_profile(model.a())?;
    let u = solve_radial_minimizer(&model, &grid)?;
    let gamma = degennes_gamma(&canonical);
    let res = residual_vector(&model, &grid, &u.values);
    let rows: Vec<ProfileRow> = grid
        .nodes()
        .iter()
        .zip(&u.values)
        .zip(&res)
        .map(|((&r, &v), &q)| ProfileRow {
            r,
            u: v,
            u_ref: canonical.eval((r - model.r_int()) / model.epsilon()),
            residual: q,
        })
        .collect();
    write_csv(&cfg.out, "profile.csv", &rows)?;
    let audit = audit_closed_form(&canonical);
    write_summary(
        &cfg.out,
        "profile",
        ProfileSummary {
            a: model.a(),
            r_int: model.r_int(),
            epsilon: model.epsilon(),
            gamma,
            c0: energy_c0(&u),
            decay_rate: interface_decay_rate(&u).ok(),
            robin_ratio: robin_ratio(&u, gamma),
            grid_nodes: grid.len(),
            newton_iterations: u.newton_iterations,
            residual: u.residual,
            shooting_residual: canonical.shooting_residual,
            closed_form_matches: audit.matches,
            closed_form_report: audit.report,
        },
    )
}

#[derive(Serialize)]
struct LondonRow {
    r: f64,
    h: f64,
    xi: f64,
}

#[derive(Serialize)]
struct LondonSummary {
    lambda_eps: f64,
    k_eps: f64,
    attractor_kind: &'static str,
    #[serde(rename = "R_eps")]
    r_eps: f64,
    j0: f64,
    xi_second_derivative: f64,
    residual: f64,
}

pub fn london(cfg: &RunConfig) -> CliResult<()> {
    let (model, grid) = cfg.radial_grid()?;
    let u = solve_radial_minimizer(&model, &grid)?;
    let sol = solve_london(&u)?;
    let rows: Vec<LondonRow> = (0..grid.len())
        .map(|i| LondonRow {
            r: grid.nodes()[i],
            h: sol.h[i],
            xi: sol.xi[i],
        })
        .collect();
    write_csv(&cfg.out, "london.csv", &rows)?;
    write_summary(
        &cfg.out,
        "london",
        LondonSummary {
            lambda_eps: sol.lambda_eps,
            k_eps: sol.k_eps,
            attractor_kind: sol.attractor.kind(),
            r_eps: sol.attractor.radius(),
            j0: j0_energy(&sol),
            xi_second_derivative: xi_second_derivative_at_origin(&sol),
            residual: sol.residual,
        },
    )
}

/// Radial minimizer and London field on the radial nodes of the polar mesh.
pub(crate) struct Prepared {
    pub mesh: Arc<DiscMesh>,
    pub u: RadialProfile,
    pub sol: LondonSolution,
}

impl Prepared {
    pub fn new(cfg: &RunConfig) -> CliResult<Self> {
        let (model, mesh) = cfg.disc_mesh()?;
        let u = solve_radial_minimizer(&model, mesh.grid())?;
        let sol = solve_london(&u)?;
        Ok(Prepared { mesh, u, sol })
    }

    /// k_ε|ln ε|.
    pub fn field_scale(&self) -> f64 {
        self.sol.k_eps * self.u.model.log_eps().abs()
    }

    pub fn applied_field(&self, cfg: &RunConfig) -> CliResult<f64> {
        match cfg.h {
            Some(h) if h >= 0.0 && h.is_finite() => Ok(h),
            Some(h) => Err(CliError::Config(format!("applied field H = {h} must be nonnegative"))),
            None => Ok(0.0),
        }
    }
}

#[derive(Serialize)]
struct FieldRow {
    r: f64,
    theta: f64,
    re_psi: f64,
    im_psi: f64,
    a_r: f64,
    a_theta: f64,
}

#[derive(Serialize)]
struct MinimizeSummary {
    #[serde(rename = "H")]
    h: f64,
    energy: EnergyBreakdown,
    iterations: usize,
    converged: bool,
    grad_norm: f64,
    init: String,
    candidates: Vec<(String, f64)>,
}

fn run_minimization(p: &Prepared, h: f64) -> CliResult<(Field2D, Gauge2D, MinimizeSummary)> {
    let (psi, a, rep) = minimize_with_policy(&p.u, &p.sol, h, p.mesh.clone(), &MinimizeOptions::default())?;
    let energy = split_energy(&psi, &a, &p.u, h)?;
    let summary = MinimizeSummary {
        h,
        energy,
        iterations: rep.iterations,
        converged: rep.converged,
        grad_norm: rep.grad_norm,
        init: rep.init,
        candidates: rep.candidates,
    };
    Ok((psi, a, summary))
}

pub fn minimize(cfg: &RunConfig) -> CliResult<()> {
    let p = Prepared::new(cfg)?;
    let h = p.applied_field(cfg)?;
    let (psi, a, summary) = run_minimization(&p, h)?;
    let mesh = &p.mesh;
    let comps = a.nodal_components();
    let rows: Vec<FieldRow> = (0..mesh.n_nodes())
        .map(|n| {
            let (i, j) = mesh.ring_of(n);
            FieldRow {
                r: mesh.radii()[i],
                theta: if i == 0 { 0.0 } else { mesh.theta(j) },
                re_psi: psi.psi[n].re,
                im_psi: psi.psi[n].im,
                a_r: comps[n].0,
                a_theta: comps[n].1,
            }
        })
        .collect();
    write_csv(&cfg.out, "field.csv", &rows)?;
    write_summary(&cfg.out, "minimize", summary)
}

#[derive(Serialize)]
struct Ball {
    x: f64,
    y: f64,
    radius: f64,
    degree: i32,
    touches_boundary: bool,
}

#[derive(Serialize)]
struct DetectSummary {
    #[serde(rename = "H")]
    h: f64,
    threshold: f64,
    interface_tolerance: f64,
    stats: DegreeStats,
    signed_degree: i32,
    vorticity_total: f64,
    converged: bool,
    balls: Vec<Ball>,
}

pub fn detect(cfg: &RunConfig) -> CliResult<()> {
    let p = Prepared::new(cfg)?;
    let h = p.applied_field(cfg)?;
    let (psi, a, summary) = run_minimization(&p, h)?;
    let phi = psi.divided_by(&p.u)?;
    let threshold = 0.5;
    let balls = detect_vortices(&phi, threshold)?;
    let tol = interface_tolerance(p.u.model.epsilon());
    let stats = degree_statistics(&balls, p.u.model.r_int(), tol);
    let mu = vorticity(&phi, &a)?;
    write_summary(
        &cfg.out,
        "detect",
        DetectSummary {
            h,
            threshold,
            interface_tolerance: tol,
            stats,
            signed_degree: signed_degree(&balls),
            vorticity_total: mu.total,
            converged: summary.converged,
            balls: balls
                .iter()
                .map(|b| Ball {
                    x: b.center.0,
                    y: b.center.1,
                    radius: b.radius,
                    degree: b.degree,
                    touches_boundary: b.touches_boundary,
                })
                .collect(),
        },
    )
}

#[derive(Serialize)]
struct SweepRow {
    #[serde(rename = "H")]
    h: f64,
    energy: f64,
    #[serde(rename = "D_total")]
    d_total: u32,
    #[serde(rename = "D_plus")]
    d_plus: u32,
    #[serde(rename = "D0")]
    d0: u32,
}

#[derive(Serialize)]
struct SweepSummary {
    k_eps: f64,
    field_scale: f64,
    h_lo: f64,
    h_hi: f64,
    ratio: f64,
    points: Vec<pinned_gl::vortices::SweepPoint>,
}

pub fn sweep(cfg: &RunConfig, factors: &[f64]) -> CliResult<()> {
    let p = Prepared::new(cfg)?;
    let scale = p.field_scale();
    let grid: Vec<f64> = factors.iter().map(|f| f * scale).collect();
    let est = critical_field_sweep(&p.u, &p.sol, p.mesh.clone(), &grid, &MinimizeOptions::default())?;
    let rows: Vec<SweepRow> = est
        .points
        .iter()
        .map(|q| SweepRow {
            h: q.h,
            energy: q.energy,
            d_total: q.stats.d_total,
            d_plus: q.stats.d_plus,
            d0: q.stats.d_near_interface,
        })
        .collect();
    write_csv(&cfg.out, "sweep.csv", &rows)?;
    write_summary(
        &cfg.out,
        "sweep",
        SweepSummary {
            k_eps: est.k_eps_ref,
            field_scale: scale,
            h_lo: est.h_lo,
            h_hi: est.h_hi,
            ratio: est.ratio,
            points: est.points,
        },
    )
}

#[derive(Serialize)]
struct Probe {
    x: f64,
    y: f64,
    node: usize,
    g: f64,
    regular_part: f64,
}

#[derive(Serialize)]
struct GreensSummary {
    source: (f64, f64),
    source_node: usize,
    u2_over_2pi: f64,
    log_slope: f64,
    probes: Vec<Probe>,
}

#[derive(Serialize)]
struct KernelRow {
    x: f64,
    y: f64,
    g: f64,
}

pub fn greens(cfg: &RunConfig, y: (f64, f64)) -> CliResult<()> {
    let p = Prepared::new(cfg)?;
    let solver = GreenSolver::new(&p.u, p.mesh.clone())?;
    let kernel = green_with(&solver, y)?;
    let eps = p.u.model.epsilon();
    let slope = log_slope(&kernel, &p.mesh, 3.0 * eps, 10.0 * eps)?;
    let (sx, sy) = kernel.source;
    let mut probes = Vec::new();
    for d in [2.0, 4.0, 8.0, 16.0] {
        for (dx, dy) in [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)] {
            let (x, y) = (sx + d * eps * dx, sy + d * eps * dy);
            if x.hypot(y) >= 1.0 {
                continue;
            }
            let node = nearest_node(&p.mesh, x, y);
            probes.push(Probe {
                x,
                y,
                node,
                g: kernel.values[node],
                regular_part: kernel.regular_part[node],
            });
        }
    }
    let rows: Vec<KernelRow> = (0..p.mesh.n_nodes())
        .map(|n| {
            let (x, y) = p.mesh.position(n);
            KernelRow {
                x,
                y,
                g: kernel.values[n],
            }
        })
        .collect();
    write_csv(&cfg.out, "kernel.csv", &rows)?;
    write_summary(
        &cfg.out,
        "greens",
        GreensSummary {
            source: kernel.source,
            source_node: kernel.source_node,
            u2_over_2pi: solver.u2_at(kernel.source_node) / (2.0 * PI),
            log_slope: slope,
            probes,
        },
    )
}

#[derive(Serialize)]
struct TestConfigSummary {
    n: usize,
    #[serde(rename = "H")]
    h: f64,
    r_eps: f64,
    sites: Vec<(f64, f64)>,
    max_regular: f64,
    energy: EnergyBreakdown,
    terms: TestEnergyTerms,
    green_double_integral: f64,
}

pub fn testconfig(cfg: &RunConfig) -> CliResult<()> {
    let p = Prepared::new(cfg)?;
    let n = cfg.n.unwrap_or_else(|| vortex_seed_count(p.u.model.epsilon()));
    let h = match cfg.h {
        Some(_) => p.applied_field(cfg)?,
        None => 2.0 * p.field_scale(),
    };
    let solver = GreenSolver::new(&p.u, p.mesh.clone())?;
    let tc = build_test_configuration(n, &p.u, &solver)?;
    let (energy, terms) = test_config_energy(&tc, &p.u, &p.sol, &solver, h)?;
    let dbl = if n > 0 {
        green_double_integral(&tc, &solver)
    } else {
        0.0
    };
    write_summary(
        &cfg.out,
        "testconfig",
        TestConfigSummary {
            n,
            h,
            r_eps: tc.r_eps,
            sites: tc.sites,
            max_regular: tc.max_regular,
            energy,
            terms,
            green_double_integral: dbl,
        },
    )
}

#[derive(Serialize)]
struct WminSummary {
    n: usize,
    xi2: f64,
    restarts: usize,
    points: Vec<(f64, f64)>,
    value: f64,
}

pub fn wmin(cfg: &RunConfig, xi2: Option<f64>, restarts: usize) -> CliResult<()> {
    let n = cfg.n.unwrap_or_else(|| vortex_seed_count(cfg.epsilon));
    if n == 0 || n > 8 {
        return Err(CliError::Config(format!("n = {n} must lie in 1..=8")));
    }
    let xi2 = match xi2 {
        Some(v) => v,
        None => {
            let (model, grid) = cfg.radial_grid()?;
            let u = solve_radial_minimizer(&model, &grid)?;
            xi_second_derivative_at_origin(&solve_london(&u)?)
        }
    };
    if !(xi2 > 0.0 && xi2.is_finite()) {
        return Err(CliError::Config(format!("ξ″(0) = {xi2} must be positive")));
    }
    let points = minimize_renormalized(n, xi2, restarts.max(1), cfg.seed)?;
    let (value, _) = renormalized_energy(&points, xi2)?;
    write_summary(
        &cfg.out,
        "wmin",
        WminSummary {
            n,
            xi2,
            restarts,
            points,
            value,
        },
    )
}
