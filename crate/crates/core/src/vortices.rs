//! Vortex detection and bookkeeping: balls around the set {|φ| < threshold},
//! winding degrees, degree statistics, the first-nucleation sweep, and the
//! Robin residual at the interface.

use crate::gl2d::{minimize, minimize_with_policy, Field2D, Gauge2D, MinimizeOptions, MinimizeReport};
use crate::london::LondonSolution;
use crate::model::DiscMesh;
use crate::profile1d::{one_sided_derivative, RadialProfile};
use crate::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VortexBall {
    pub center: (f64, f64),
    pub radius: f64,
    pub degree: i32,
    /// The ball reaches ∂Ω; its degree is set to 0 by convention.
    pub touches_boundary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct DegreeStats {
    pub d_plus: u32,
    pub d_minus: u32,
    pub d_total: u32,
    pub d_near_interface: u32,
}

/// Samples on the winding contour.
pub const CIRCLE_SAMPLES: usize = 64;

/// Winding number of φ/|φ| along the circle of the given centre and radius.
pub fn winding_degree(phi: &Field2D, center: (f64, f64), radius: f64) -> Result<i32> {
    let floor = 1e-8 * phi.psi.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    let mut samples = CIRCLE_SAMPLES;
    loop {
        let vals: Vec<Complex64> = (0..samples)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / samples as f64;
                phi.sample(center.0 + radius * t.cos(), center.1 + radius * t.sin())
            })
            .collect();
        if let Some(z) = vals.iter().find(|z| z.norm() <= floor) {
            return Err(Error::UndefinedDegree(format!(
                "|φ| = {:e} on the circle of radius {radius} at {center:?}",
                z.norm()
            )));
        }
        let incs: Vec<f64> = (0..samples)
            .map(|k| (vals[(k + 1) % samples] / vals[k]).arg())
            .collect();
        let biggest = incs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if biggest > 0.5 * PI && samples < 4096 {
            samples *= 2;
            continue;
        }
        let turns = incs.iter().sum::<f64>() / (2.0 * PI);
        let d = turns.round();
        if (turns - d).abs() > 0.2 {
            return Err(Error::UndefinedDegree(format!(
                "rounding residual {}",
                (turns - d).abs()
            )));
        }
        return Ok(d as i32);
    }
}

fn neighbours(mesh: &DiscMesh, n: usize, out: &mut Vec<usize>) {
    out.clear();
    let m = mesh.n_theta();
    let nr = mesh.n_r();
    if n == 0 {
        out.extend((0..m).map(|j| mesh.node(1, j)));
        return;
    }
    let (i, j) = mesh.ring_of(n);
    out.push(mesh.node(i - 1, j));
    if i + 1 < nr {
        out.push(mesh.node(i + 1, j));
    }
    out.push(mesh.node(i, j + 1));
    out.push(mesh.node(i, j + m - 1));
}

/// Smallest circle containing two circles.
fn enclose(a: &VortexBall, b: &VortexBall) -> ((f64, f64), f64) {
    let (dx, dy) = (b.center.0 - a.center.0, b.center.1 - a.center.1);
    let d = dx.hypot(dy);
    if d + b.radius <= a.radius {
        return (a.center, a.radius);
    }
    if d + a.radius <= b.radius {
        return (b.center, b.radius);
    }
    let r = 0.5 * (d + a.radius + b.radius);
    let s = (r - a.radius) / d;
    ((a.center.0 + s * dx, a.center.1 + s * dy), r)
}

/// Encloses the connected components of {|φ| < threshold} in disjoint balls
/// and attaches winding degrees.
pub fn detect_vortices(phi: &Field2D, threshold: f64) -> Result<Vec<VortexBall>> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Domain(format!("threshold {threshold} not in (0, 1)")));
    }
    let mesh = &phi.mesh;
    let low: Vec<bool> = phi.psi.iter().map(|z| z.norm() < threshold).collect();
    let mut seen = vec![false; low.len()];
    let mut balls: Vec<VortexBall> = Vec::new();
    let mut stack = Vec::new();
    let mut nb = Vec::new();
    for start in 0..low.len() {
        if !low[start] || seen[start] {
            continue;
        }
        let mut comp = Vec::new();
        seen[start] = true;
        stack.push(start);
        while let Some(n) = stack.pop() {
            comp.push(n);
            neighbours(mesh, n, &mut nb);
            for &k in &nb {
                if low[k] && !seen[k] {
                    seen[k] = true;
                    stack.push(k);
                }
            }
        }
        let pts: Vec<(f64, f64)> = comp.iter().map(|&n| mesh.position(n)).collect();
        let (mut lo_x, mut hi_x, mut lo_y, mut hi_y) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for p in &pts {
            lo_x = lo_x.min(p.0);
            hi_x = hi_x.max(p.0);
            lo_y = lo_y.min(p.1);
            hi_y = hi_y.max(p.1);
        }
        let c = (0.5 * (lo_x + hi_x), 0.5 * (lo_y + hi_y));
        let rad = pts.iter().map(|p| (p.0 - c.0).hypot(p.1 - c.1)).fold(0.0, f64::max);
        let cell = comp
            .iter()
            .map(|&n| mesh.cell_size(mesh.ring_of(n).0))
            .fold(0.0, f64::max);
        balls.push(VortexBall {
            center: c,
            radius: rad + 2.0 * cell,
            degree: 0,
            touches_boundary: false,
        });
    }
    // Merge until pairwise disjoint.
    loop {
        let mut merged = false;
        'outer: for i in 0..balls.len() {
            for j in i + 1..balls.len() {
                let (a, b) = (&balls[i], &balls[j]);
                let d = (a.center.0 - b.center.0).hypot(a.center.1 - b.center.1);
                if d < a.radius + b.radius {
                    let (c, rr) = enclose(a, b);
                    balls[i] = VortexBall {
                        center: c,
                        radius: rr,
                        degree: 0,
                        touches_boundary: false,
                    };
                    balls.remove(j);
                    merged = true;
                    break 'outer;
                }
            }
        }
        if !merged {
            break;
        }
    }
    for b in balls.iter_mut() {
        if b.center.0.hypot(b.center.1) + b.radius >= 1.0 {
            b.touches_boundary = true;
            b.degree = 0;
        } else {
            b.degree = winding_degree(phi, b.center, b.radius)?;
        }
    }
    balls.sort_by(|a, b| {
        a.center
            .0
            .total_cmp(&b.center.0)
            .then(a.center.1.total_cmp(&b.center.1))
    });
    Ok(balls)
}

/// Default interface tolerance |ln ε|^{−1/4}.
pub fn interface_tolerance(eps: f64) -> f64 {
    eps.ln().abs().powf(-0.25)
}

pub fn degree_statistics(balls: &[VortexBall], r_int: f64, tol: f64) -> DegreeStats {
    let mut s = DegreeStats::default();
    for b in balls {
        let d = b.degree;
        if d > 0 {
            s.d_plus += d as u32;
        } else {
            s.d_minus += (-d) as u32;
        }
        if (b.center.0.hypot(b.center.1) - r_int).abs() <= tol {
            s.d_near_interface += d.unsigned_abs();
        }
    }
    s.d_total = s.d_plus + s.d_minus;
    s
}

/// Signed sum of ball degrees.
pub fn signed_degree(balls: &[VortexBall]) -> i32 {
    balls.iter().map(|b| b.degree).sum()
}

/// One row of a field sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub h: f64,
    pub energy: f64,
    pub stats: DegreeStats,
    pub init: String,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalFieldEstimate {
    pub h_lo: f64,
    pub h_hi: f64,
    pub k_eps_ref: f64,
    /// Midpoint of the bracket over k_ε|ln ε|.
    pub ratio: f64,
    pub points: Vec<SweepPoint>,
}

/// Minimized state of one sweep point: the lower of the warm start (when
/// given) and the two cold initializations.
pub fn minimize_at_field(
    u: &RadialProfile,
    sol: &LondonSolution,
    mesh: Arc<DiscMesh>,
    h: f64,
    warm: Option<(&Field2D, &Gauge2D)>,
    opts: &MinimizeOptions,
) -> Result<(Field2D, Gauge2D, MinimizeReport)> {
    let (mut p, mut a, mut rep) = minimize_with_policy(u, sol, h, mesh, opts)?;
    if let Some(w) = warm {
        let (pw, aw, mut rw) = minimize(&u.model, h, w, opts)?;
        rw.init = "warm".into();
        let mut cands = rep.candidates.clone();
        cands.push(("warm".into(), rw.energy.total));
        if rw.energy.total < rep.energy.total {
            p = pw;
            a = aw;
            rep = rw;
        }
        rep.candidates = cands;
    }
    Ok((p, a, rep))
}

/// Degree statistics of a minimizer, detected on φ = ψ/u at threshold 1/2.
pub fn field_statistics(psi: &Field2D, u: &RadialProfile) -> Result<(Vec<VortexBall>, DegreeStats)> {
    let phi = psi.divided_by(u)?;
    let balls = detect_vortices(&phi, 0.5)?;
    let eps = u.model.epsilon();
    let stats = degree_statistics(&balls, u.model.r_int(), interface_tolerance(eps));
    Ok((balls, stats))
}

/// Sweeps H over `h_grid` (increasing) and brackets the first field where
/// the total degree becomes positive.
pub fn critical_field_sweep(
    u: &RadialProfile,
    sol: &LondonSolution,
    mesh: Arc<DiscMesh>,
    h_grid: &[f64],
    opts: &MinimizeOptions,
) -> Result<CriticalFieldEstimate> {
    if h_grid.len() < 2 || h_grid.windows(2).any(|w| w[1] <= w[0]) || h_grid[0] < 0.0 {
        return Err(Error::Config(
            "H grid must be increasing, nonnegative, with ≥ 2 points".into(),
        ));
    }
    let scale = sol.k_eps * u.model.log_eps().abs();
    let mut points = Vec::new();
    let mut warm: Option<(Field2D, Gauge2D)> = None;
    for &h in h_grid {
        let (p, a, rep) = minimize_at_field(u, sol, mesh.clone(), h, warm.as_ref().map(|(p, a)| (p, a)), opts)?;
        let (_, stats) = field_statistics(&p, u)?;
        points.push(SweepPoint {
            h,
            energy: rep.energy.total,
            stats,
            init: rep.init.clone(),
            converged: rep.converged,
        });
        warm = Some((p, a));
    }
    let observed: Vec<u32> = points.iter().map(|p| p.stats.d_total).collect();
    let first = observed.iter().position(|&d| d >= 1);
    match first {
        Some(k) if k > 0 => {
            let (h_lo, h_hi) = (h_grid[k - 1], h_grid[k]);
            Ok(CriticalFieldEstimate {
                h_lo,
                h_hi,
                k_eps_ref: sol.k_eps,
                ratio: 0.5 * (h_lo + h_hi) / scale,
                points,
            })
        }
        _ => Err(Error::OutOfRange {
            message: "no transition from D = 0 to D ≥ 1 on the H grid".into(),
            observed,
        }),
    }
}

/// ε·‖∂_rψ − iA_rψ + (γ/ε)ψ‖ on the circle r = R, with the covariant radial
/// derivative taken one-sided from the inner region.
pub fn robin_residual(psi: &Field2D, a: &Gauge2D, u: &RadialProfile, gamma: f64) -> Result<f64> {
    let (balls, stats) = field_statistics(psi, u)?;
    if stats.d_total > 0 {
        return Err(Error::NotApplicable(format!("{} vortices present", balls.len())));
    }
    let mesh = &psi.mesh;
    let k = mesh.grid().interface_index();
    if k < 2 {
        return Err(Error::Config("interface too close to the centre".into()));
    }
    let eps = u.model.epsilon();
    let r = mesh.radii();
    let nodes = [r[k - 2], r[k - 1], r[k]];
    let mut sum = 0.0;
    for j in 0..mesh.n_theta() {
        let a1 = a.a_rad[mesh.rad_link(k - 1, j)];
        let a2 = a.a_rad[mesh.rad_link(k - 2, j)];
        let v0 = psi.psi[mesh.node(k - 2, j)] * Complex64::from_polar(1.0, a1 + a2);
        let v1 = psi.psi[mesh.node(k - 1, j)] * Complex64::from_polar(1.0, a1);
        let v2 = psi.psi[mesh.node(k, j)];
        let dre = one_sided_derivative(&nodes, &[v0.re, v1.re, v2.re], 2);
        let dim = one_sided_derivative(&nodes, &[v0.im, v1.im, v2.im], 2);
        let t = Complex64::new(dre, dim) + v2 * (gamma / eps);
        sum += t.norm_sqr();
    }
    Ok(eps * (sum * r[k] * mesh.d_theta()).sqrt())
}
