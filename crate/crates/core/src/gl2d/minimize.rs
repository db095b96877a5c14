//! Descent on 𝒢_{ε,H} in Coulomb gauge.
//!
//! Unknowns are ψ and the plaquette stream function f of A, so every iterate
//! is exactly divergence free. Steps come from limited-memory quasi-Newton
//! updates on top of a preconditioned gradient, with Armijo backtracking;
//! accepted steps never increase the energy.

use super::gauge::{dual_operator, links_from_stream, primal_operator, stream_adjoint};
use super::{coulomb_projection, evaluate, meissner_configuration, EnergyBreakdown, Field2D, Gauge2D};
use crate::london::{Attractor, LondonSolution};
use crate::model::{DiscMesh, PinningModel};
use crate::profile1d::RadialProfile;
use crate::ringsolve::RingOperator;
use crate::{Error, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::VecDeque;
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinimizeOptions {
    pub max_iter: usize,
    /// Iterations per convergence check.
    pub block: usize,
    /// Relative energy decrease per block below which the run stops.
    pub tol: f64,
    /// Number of stored correction pairs.
    pub memory: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            block: 20,
            tol: 1e-10,
            memory: 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimizeReport {
    pub energy: EnergyBreakdown,
    pub iterations: usize,
    pub converged: bool,
    /// Euclidean norm of the gradient at the returned state.
    pub grad_norm: f64,
    pub init: String,
    /// Final energies of every initialization tried, in order.
    pub candidates: Vec<(String, f64)>,
}

struct Problem<'a> {
    mesh: &'a DiscMesh,
    a_level: f64,
    eps: f64,
    h: f64,
    n_psi: usize,
    p_psi: RingOperator,
    c_dual: RingOperator,
    c_shift: RingOperator,
    plaq_area: Vec<f64>,
}

impl Problem<'_> {
    fn split<'b>(&self, x: &'b [f64]) -> (Vec<Complex64>, &'b [f64]) {
        let psi = x[..2 * self.n_psi]
            .chunks_exact(2)
            .map(|c| Complex64::new(c[0], c[1]))
            .collect();
        (psi, &x[2 * self.n_psi..])
    }

    fn energy_grad(&self, x: &[f64]) -> (EnergyBreakdown, Vec<f64>) {
        let (psi, f) = self.split(x);
        let (a_rad, a_ang) = links_from_stream(self.mesh, f);
        let ev = evaluate(self.mesh, self.a_level, self.eps, self.h, &psi, &a_rad, &a_ang, true);
        let gf = stream_adjoint(self.mesh, &ev.g_rad, &ev.g_ang);
        let mut g = Vec::with_capacity(x.len());
        for z in &ev.g_psi {
            g.push(z.re);
            g.push(z.im);
        }
        g.extend(gf);
        (ev.energy, g)
    }

    fn energy(&self, x: &[f64]) -> f64 {
        let (psi, f) = self.split(x);
        let (a_rad, a_ang) = links_from_stream(self.mesh, f);
        evaluate(self.mesh, self.a_level, self.eps, self.h, &psi, &a_rad, &a_ang, false)
            .energy
            .total
    }

    /// Approximate inverse Hessian applied to a gradient.
    fn precondition(&self, g: &[f64]) -> Vec<f64> {
        let (gp, gf) = self.split(g);
        let zp = self.p_psi.solve_complex(&gp);
        let mut out = Vec::with_capacity(g.len());
        for z in zp {
            out.push(0.5 * z.re);
            out.push(0.5 * z.im);
        }
        let t = self.c_dual.solve(gf);
        let t: Vec<f64> = t.iter().zip(&self.plaq_area).map(|(v, a)| v * a).collect();
        out.extend(self.c_shift.solve(&t).into_iter().map(|v| 0.5 * v));
        out
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes 𝒢_{ε,H} from the given initial pair.
///
/// The initial potential is first projected to Coulomb gauge. Iteration
/// exhaustion is not an error: the best state is returned with
/// `converged = false`.
pub fn minimize(
    model: &PinningModel,
    h: f64,
    init: (&Field2D, &Gauge2D),
    opts: &MinimizeOptions,
) -> Result<(Field2D, Gauge2D, MinimizeReport)> {
    let (psi0, a0) = init;
    if h < 0.0 || !h.is_finite() {
        return Err(Error::Domain(format!("H = {h} must be nonnegative")));
    }
    if opts.block == 0 || opts.memory == 0 {
        return Err(Error::Config("block and memory must be positive".into()));
    }
    super::gl_energy(psi0, a0, model, h)?;
    let mesh_arc = psi0.mesh.clone();
    let mesh: &DiscMesh = &mesh_arc;
    let (psi, _, f) = coulomb_projection(psi0, a0)?;

    let eps = model.epsilon();
    let n_psi = mesh.n_nodes();
    let mean_rho = {
        let w: Vec<f64> = psi.psi.iter().map(|z| z.norm_sqr()).collect();
        (mesh.integrate(&w) / mesh.total_mass()).max(0.05)
    };
    let m = mesh.n_theta();
    let prob = Problem {
        mesh,
        a_level: model.a(),
        eps,
        h,
        n_psi,
        p_psi: primal_operator(mesh, 1.0 / (eps * eps)),
        c_dual: dual_operator(mesh, 0.0),
        c_shift: dual_operator(mesh, mean_rho),
        plaq_area: (0..mesh.n_plaquettes()).map(|p| mesh.plaquette_area(p / m)).collect(),
    };

    let mut x: Vec<f64> = Vec::with_capacity(2 * n_psi + f.len());
    for z in &psi.psi {
        x.push(z.re);
        x.push(z.im);
    }
    x.extend_from_slice(&f);

    let (mut energy, mut g) = prob.energy_grad(&x);
    let mut hist: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut block_start = energy.total;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let mut d = two_loop(&prob, &hist, &g);
        let mut slope = dot(&d, &g);
        if !(slope < 0.0) {
            hist.clear();
            d = prob.precondition(&g).into_iter().map(|v| -v).collect();
            slope = dot(&d, &g);
        }
        let mut accepted = None;
        let mut t = 1.0;
        for _ in 0..40 {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            let e = prob.energy(&trial);
            if e <= energy.total + 1e-4 * t * slope {
                accepted = Some(trial);
                break;
            }
            t *= 0.5;
        }
        let Some(x_new) = accepted else {
            if hist.is_empty() {
                // No decrease along the preconditioned gradient: stationary to rounding.
                converged = true;
                break;
            }
            hist.clear();
            continue;
        };
        let (e_new, g_new) = prob.energy_grad(&x_new);
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-14 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy > 0.0 {
            if hist.len() == opts.memory {
                hist.pop_front();
            }
            hist.push_back((s, y, 1.0 / sy));
        }
        x = x_new;
        g = g_new;
        energy = e_new;
        if iterations % opts.block == 0 {
            let dec = (block_start - energy.total) / energy.total.abs().max(1e-300);
            if dec < opts.tol {
                converged = true;
                break;
            }
            block_start = energy.total;
        }
    }

    let (psi_v, f_v) = prob.split(&x);
    let out_psi = Field2D {
        mesh: mesh_arc.clone(),
        psi: psi_v,
    };
    let out_a = Gauge2D::from_stream(mesh_arc.clone(), f_v)?;
    let report = MinimizeReport {
        energy,
        iterations,
        converged,
        grad_norm: dot(&g, &g).sqrt(),
        init: "given".into(),
        candidates: vec![("given".into(), energy.total)],
    };
    Ok((out_psi, out_a, report))
}

fn two_loop(prob: &Problem, hist: &VecDeque<(Vec<f64>, Vec<f64>, f64)>, g: &[f64]) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alpha = vec![0.0; hist.len()];
    for (k, (s, y, rho)) in hist.iter().enumerate().rev() {
        let a = rho * dot(s, &q);
        alpha[k] = a;
        q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
    }
    let mut r = prob.precondition(&q);
    if let Some((s, y, _)) = hist.back() {
        let py = prob.precondition(y);
        let scale = dot(s, y) / dot(y, &py);
        if scale.is_finite() && scale > 0.0 {
            r.iter_mut().for_each(|v| *v *= scale);
        }
    }
    for (k, (s, y, rho)) in hist.iter().enumerate() {
        let b = rho * dot(y, &r);
        r.iter_mut().zip(s).for_each(|(ri, si)| *ri += (alpha[k] - b) * si);
    }
    r.into_iter().map(|v| -v).collect()
}

/// Number of vortices seeded in the vortex initialization: ⌊ln|ln ε|⌋, at least 1.
pub fn vortex_seed_count(eps: f64) -> usize {
    let v = eps.ln().abs().ln().floor();
    if v.is_finite() && v >= 1.0 {
        v as usize
    } else {
        1
    }
}

/// Multiplies ψ by `n` degree-one vortex factors placed on the attractor
/// (equally spaced on the circle r = R_ε, or around the centre).
pub fn seeded_vortex_init(psi: &Field2D, attractor: &Attractor, n: usize, eps: f64) -> Field2D {
    let centers: Vec<(f64, f64)> = match attractor {
        Attractor::Circle { radius } => (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                (radius * t.cos(), radius * t.sin())
            })
            .collect(),
        Attractor::CenterPoint if n == 1 => vec![(0.0, 0.0)],
        Attractor::CenterPoint => (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                (0.15 * t.cos(), 0.15 * t.sin())
            })
            .collect(),
    };
    let mesh = &psi.mesh;
    let vals = psi
        .psi
        .iter()
        .enumerate()
        .map(|(node, z)| {
            let (x, y) = mesh.position(node);
            centers.iter().fold(*z, |acc, &(cx, cy)| {
                let w = Complex64::new(x - cx, y - cy);
                let d = w.norm();
                acc * w / (d * d + eps * eps).sqrt()
            })
        })
        .collect();
    Field2D {
        mesh: mesh.clone(),
        psi: vals,
    }
}

/// Vortex-free random initial pair: ψ = (smooth positive modulus)·e^{i·smooth
/// phase}, A with a smooth random stream function.
pub fn random_smooth_init(mesh: Arc<DiscMesh>, seed: u64) -> (Field2D, Gauge2D) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut modes = |count: usize| -> Vec<(f64, f64, f64, f64)> {
        (0..count)
            .map(|_| {
                (
                    rng.gen_range(-3.0..3.0),
                    rng.gen_range(-3.0..3.0),
                    rng.gen_range(0.0..2.0 * PI),
                    rng.gen_range(-1.0..1.0),
                )
            })
            .collect()
    };
    let amp_modes = modes(6);
    let phase_modes = modes(6);
    let stream_modes = modes(6);
    let eval = |ms: &[(f64, f64, f64, f64)], x: f64, y: f64| {
        ms.iter()
            .map(|(kx, ky, p, c)| c * (kx * x + ky * y + p).cos())
            .sum::<f64>()
            / ms.len() as f64
    };
    let psi = (0..mesh.n_nodes())
        .map(|n| {
            let (x, y) = mesh.position(n);
            let amp = 0.6 + 0.3 * eval(&amp_modes, x, y);
            Complex64::from_polar(amp, 2.0 * eval(&phase_modes, x, y))
        })
        .collect();
    let m = mesh.n_theta();
    let r = mesh.radii();
    let f: Vec<f64> = (0..mesh.n_plaquettes())
        .map(|p| {
            let (i, j) = (p / m, p % m);
            let rc = 0.5 * (r[i] + r[i + 1]);
            let t = (j as f64 + 0.5) * mesh.d_theta();
            0.05 * (1.0 - rc * rc) * eval(&stream_modes, rc * t.cos(), rc * t.sin())
        })
        .collect();
    let a = Gauge2D::from_stream(mesh.clone(), &f).expect("stream function sized to mesh");
    (Field2D { mesh, psi }, a)
}

/// Runs the Meissner initialization and the seeded-vortex initialization
/// (two runs, executed concurrently) and keeps the lower final energy.
pub fn minimize_with_policy(
    u: &RadialProfile,
    sol: &LondonSolution,
    h: f64,
    mesh: Arc<DiscMesh>,
    opts: &MinimizeOptions,
) -> Result<(Field2D, Gauge2D, MinimizeReport)> {
    let model = &u.model;
    let (psi_m, a_m) = meissner_configuration(u, sol, h, mesh)?;
    let n = vortex_seed_count(model.epsilon());
    let psi_v = seeded_vortex_init(&psi_m, &sol.attractor, n, model.epsilon());
    let (rm, rv) = rayon::join(
        || minimize(model, h, (&psi_m, &a_m), opts),
        || minimize(model, h, (&psi_v, &a_m), opts),
    );
    let (pm, am, mut repm) = rm?;
    let (pv, av, mut repv) = rv?;
    repm.init = "meissner".into();
    repv.init = format!("vortices({n})");
    let candidates = vec![
        (repm.init.clone(), repm.energy.total),
        (repv.init.clone(), repv.energy.total),
    ];
    let (p, a, mut rep) = if repv.energy.total < repm.energy.total {
        (pv, av, repv)
    } else {
        (pm, am, repm)
    };
    rep.candidates = candidates;
    Ok((p, a, rep))
}
