//! The 2-D functional on the polar mesh: evaluation, the splitting
//! 𝒢 = C₀ + ℱ, the Meissner configuration, vorticity, and minimization.
//!
//! The magnetic potential is stored as link variables: `a_rad[e]` and
//! `a_ang[e]` are line integrals of A along radial and angular links. The
//! covariant difference along a link `a → b` is `ψ_b e^{−i a_e} − ψ_a`, which
//! makes the discrete energy exactly gauge invariant.

pub(crate) mod gauge;
mod minimize;

pub use minimize::{
    minimize, minimize_with_policy, random_smooth_init, seeded_vortex_init, vortex_seed_count, MinimizeOptions,
    MinimizeReport,
};

use crate::london::LondonSolution;
use crate::model::{DiscMesh, PinningModel};
use crate::profile1d::{energy_c0, RadialProfile};
use crate::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::Arc;

/// Order parameter: one complex value per mesh node.
#[derive(Debug, Clone)]
pub struct Field2D {
    pub mesh: Arc<DiscMesh>,
    pub psi: Vec<Complex64>,
}

/// Magnetic potential as link variables on the mesh.
#[derive(Debug, Clone)]
pub struct Gauge2D {
    pub mesh: Arc<DiscMesh>,
    pub a_rad: Vec<f64>,
    pub a_ang: Vec<f64>,
}

/// Energy terms of one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyBreakdown {
    pub kinetic: f64,
    pub potential: f64,
    pub field: f64,
    pub total: f64,
    /// C₀(ε), when the splitting was evaluated.
    pub split_c0: Option<f64>,
    /// ℱ_{ε,H}(φ, A), when the splitting was evaluated.
    pub split_f: Option<f64>,
    pub h_applied: f64,
}

impl EnergyBreakdown {
    fn new(kinetic: f64, potential: f64, field: f64, h: f64) -> Self {
        Self {
            kinetic,
            potential,
            field,
            total: kinetic + potential + field,
            split_c0: None,
            split_f: None,
            h_applied: h,
        }
    }
}

fn same_mesh(a: &Arc<DiscMesh>, b: &Arc<DiscMesh>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl Field2D {
    pub fn new(mesh: Arc<DiscMesh>, psi: Vec<Complex64>) -> Result<Self> {
        if psi.len() != mesh.n_nodes() {
            return Err(Error::MeshMismatch);
        }
        Ok(Self { mesh, psi })
    }

    pub fn constant(mesh: Arc<DiscMesh>, value: Complex64) -> Self {
        let psi = vec![value; mesh.n_nodes()];
        Self { mesh, psi }
    }

    /// Lift of a radial profile given on the mesh's radial nodes.
    pub fn radial(mesh: Arc<DiscMesh>, values: &[f64]) -> Result<Self> {
        if values.len() != mesh.n_r() {
            return Err(Error::MeshMismatch);
        }
        let psi = mesh
            .lift_radial(values)
            .into_iter()
            .map(|v| Complex64::new(v, 0.0))
            .collect();
        Ok(Self { mesh, psi })
    }

    pub fn modulus(&self) -> Vec<f64> {
        self.psi.iter().map(|z| z.norm()).collect()
    }

    /// φ = ψ/u nodewise.
    pub fn divided_by(&self, u: &RadialProfile) -> Result<Field2D> {
        check_profile(&self.mesh, u)?;
        if u.values.iter().any(|&v| v <= 0.0) {
            return Err(Error::Postcondition("profile has a nonpositive node".into()));
        }
        let psi = self
            .psi
            .iter()
            .enumerate()
            .map(|(n, z)| z / u.values[self.mesh.ring_of(n).0])
            .collect();
        Ok(Field2D {
            mesh: self.mesh.clone(),
            psi,
        })
    }

    /// Value at an arbitrary point by bilinear interpolation in (r, θ).
    pub fn sample(&self, x: f64, y: f64) -> Complex64 {
        sample_nodal(&self.mesh, &self.psi, x, y)
    }
}

/// Bilinear interpolation of nodal values in polar coordinates.
pub(crate) fn sample_nodal(mesh: &DiscMesh, v: &[Complex64], x: f64, y: f64) -> Complex64 {
    let r = (x * x + y * y).sqrt().min(1.0);
    let nodes = mesh.radii();
    let m = mesh.n_theta();
    let i = match nodes.partition_point(|&t| t <= r) {
        0 => 0,
        k => (k - 1).min(nodes.len() - 2),
    };
    let s = (r - nodes[i]) / (nodes[i + 1] - nodes[i]);
    let th = y.atan2(x).rem_euclid(2.0 * PI) / mesh.d_theta();
    let j = (th.floor() as usize) % m;
    let t = th - th.floor();
    let ring = |k: usize| {
        let a = v[mesh.node(k, j)];
        let b = v[mesh.node(k, j + 1)];
        a * (1.0 - t) + b * t
    };
    ring(i) * (1.0 - s) + ring(i + 1) * s
}

fn check_profile(mesh: &DiscMesh, u: &RadialProfile) -> Result<()> {
    if u.grid != *mesh.grid() {
        return Err(Error::MeshMismatch);
    }
    Ok(())
}

impl Gauge2D {
    pub fn zero(mesh: Arc<DiscMesh>) -> Self {
        let (nr, na) = (mesh.n_rad_links(), mesh.n_ang_links());
        Self {
            mesh,
            a_rad: vec![0.0; nr],
            a_ang: vec![0.0; na],
        }
    }

    pub fn new(mesh: Arc<DiscMesh>, a_rad: Vec<f64>, a_ang: Vec<f64>) -> Result<Self> {
        if a_rad.len() != mesh.n_rad_links() || a_ang.len() != mesh.n_ang_links() {
            return Err(Error::MeshMismatch);
        }
        Ok(Self { mesh, a_rad, a_ang })
    }

    /// Coulomb-gauge potential with plaquette stream function `f`.
    pub fn from_stream(mesh: Arc<DiscMesh>, f: &[f64]) -> Result<Self> {
        if f.len() != mesh.n_plaquettes() {
            return Err(Error::MeshMismatch);
        }
        let (a_rad, a_ang) = gauge::links_from_stream(&mesh, f);
        Ok(Self { mesh, a_rad, a_ang })
    }

    /// Flux of curl A through every plaquette.
    pub fn circulation(&self) -> Vec<f64> {
        gauge::circulation(&self.mesh, &self.a_rad, &self.a_ang)
    }

    /// h = curl A as a plaquette average.
    pub fn h_field(&self) -> Vec<f64> {
        let m = self.mesh.n_theta();
        self.circulation()
            .iter()
            .enumerate()
            .map(|(p, c)| c / self.mesh.plaquette_area(p / m))
            .collect()
    }

    /// curl A at r = 1, extrapolated linearly from the two outer plaquette rings.
    pub fn boundary_curl(&self) -> f64 {
        let mesh = &self.mesh;
        let m = mesh.n_theta();
        let nr = mesh.n_r();
        let r = mesh.radii();
        let h = self.h_field();
        let ring_mean = |i: usize| h[i * m..(i + 1) * m].iter().sum::<f64>() / m as f64;
        let centroid = |i: usize| {
            let (a, b) = (r[i], r[i + 1]);
            2.0 * (b * b * b - a * a * a) / (3.0 * (b * b - a * a))
        };
        let (i1, i0) = (nr - 2, nr - 3);
        let (c1, c0) = (centroid(i1), centroid(i0));
        let (h1, h0) = (ring_mean(i1), ring_mean(i0));
        h1 + (h1 - h0) * (1.0 - c1) / (c1 - c0)
    }

    /// max |div A| over nodes, using the finite-volume divergence (outflow
    /// over control-volume area). Includes the boundary normal trace.
    pub fn divergence_residual(&self) -> f64 {
        let out = gauge::outflow(&self.mesh, &self.a_rad, &self.a_ang);
        out.iter()
            .enumerate()
            .map(|(n, v)| (v / self.mesh.mass(n)).abs())
            .fold(0.0, f64::max)
    }

    /// max |n·A| on the boundary ring, from the outer half-cell balance.
    pub fn normal_trace_residual(&self) -> f64 {
        let mesh = &self.mesh;
        let out = gauge::outflow(mesh, &self.a_rad, &self.a_ang);
        let nr = mesh.n_r();
        let len = mesh.d_theta();
        (0..mesh.n_theta())
            .map(|j| (out[mesh.node(nr - 1, j)] / len).abs())
            .fold(0.0, f64::max)
    }

    /// Nodal components (A_r, A_θ) averaged from adjacent links. The centre
    /// node reports its Cartesian average rotated to θ = 0.
    pub fn nodal_components(&self) -> Vec<(f64, f64)> {
        let mesh = &self.mesh;
        let m = mesh.n_theta();
        let nr = mesh.n_r();
        let r = mesh.radii();
        let dth = mesh.d_theta();
        let mut out = vec![(0.0, 0.0); mesh.n_nodes()];
        let (mut ax, mut ay) = (0.0, 0.0);
        for j in 0..m {
            let v = self.a_rad[mesh.rad_link(0, j)] / r[1];
            let t = mesh.theta(j);
            ax += v * t.cos();
            ay += v * t.sin();
        }
        out[0] = (2.0 * ax / m as f64, 2.0 * ay / m as f64);
        for i in 1..nr {
            for j in 0..m {
                let inner = self.a_rad[mesh.rad_link(i - 1, j)] / (r[i] - r[i - 1]);
                let ar = if i + 1 < nr {
                    0.5 * (inner + self.a_rad[mesh.rad_link(i, j)] / (r[i + 1] - r[i]))
                } else {
                    inner
                };
                let at =
                    0.5 * (self.a_ang[mesh.ang_link(i, j)] + self.a_ang[mesh.ang_link(i, j + m - 1)]) / (r[i] * dth);
                out[mesh.node(i, j)] = (ar, at);
            }
        }
        out
    }
}

/// Applies ψ → ψe^{iχ}, A → A + ∇χ with χ given per node.
pub fn gauge_transform(psi: &Field2D, a: &Gauge2D, chi: &[f64]) -> Result<(Field2D, Gauge2D)> {
    if !same_mesh(&psi.mesh, &a.mesh) || chi.len() != psi.psi.len() {
        return Err(Error::MeshMismatch);
    }
    let new_psi = psi
        .psi
        .iter()
        .zip(chi)
        .map(|(z, &c)| z * Complex64::from_polar(1.0, c))
        .collect();
    let mut a_rad = a.a_rad.clone();
    let mut a_ang = a.a_ang.clone();
    gauge::add_gradient(&a.mesh, chi, &mut a_rad, &mut a_ang);
    Ok((
        Field2D {
            mesh: psi.mesh.clone(),
            psi: new_psi,
        },
        Gauge2D {
            mesh: a.mesh.clone(),
            a_rad,
            a_ang,
        },
    ))
}

/// Gauge-equivalent pair with A in Coulomb gauge. Also returns the stream
/// function of the projected potential.
pub fn coulomb_projection(psi: &Field2D, a: &Gauge2D) -> Result<(Field2D, Gauge2D, Vec<f64>)> {
    if !same_mesh(&psi.mesh, &a.mesh) {
        return Err(Error::MeshMismatch);
    }
    let (chi, f) = gauge::hodge_split(&a.mesh, &a.a_rad, &a.a_ang);
    let neg: Vec<f64> = chi.iter().map(|c| -c).collect();
    let (p, _) = gauge_transform(psi, a, &neg)?;
    let g = Gauge2D::from_stream(a.mesh.clone(), &f)?;
    Ok((p, g, f))
}

/// Kinetic contribution w|ψ_b e^{−ia} − ψ_a|² of one link, and the
/// contributions to the gradients (∂/∂ψ̄_a, ∂/∂ψ̄_b, ∂/∂a).
#[inline]
fn link_term(w: f64, pa: Complex64, pb: Complex64, a: f64) -> (f64, Complex64, Complex64, f64) {
    let ph = Complex64::from_polar(1.0, -a);
    let rot = pb * ph;
    let d = rot - pa;
    let e = w * d.norm_sqr();
    let ga = -2.0 * w * d;
    let gb = 2.0 * w * d * ph.conj();
    let g_link = 2.0 * w * (d.conj() * rot).im;
    (e, ga, gb, g_link)
}

/// Energy terms and, when requested, the gradient. Gradients are with
/// respect to (Re ψ, Im ψ) packed as complex numbers and to link values.
pub(crate) struct Evaluation {
    pub energy: EnergyBreakdown,
    pub g_psi: Vec<Complex64>,
    pub g_rad: Vec<f64>,
    pub g_ang: Vec<f64>,
}

pub(crate) fn evaluate(
    mesh: &DiscMesh,
    a_level: f64,
    eps: f64,
    h: f64,
    psi: &[Complex64],
    a_rad: &[f64],
    a_ang: &[f64],
    with_gradient: bool,
) -> Evaluation {
    let m = mesh.n_theta();
    let nr = mesh.n_r();
    let mut g_psi = vec![Complex64::new(0.0, 0.0); if with_gradient { psi.len() } else { 0 }];
    let mut g_rad = vec![0.0; if with_gradient { a_rad.len() } else { 0 }];
    let mut g_ang = vec![0.0; if with_gradient { a_ang.len() } else { 0 }];

    let mut kinetic = 0.0;
    for i in 0..nr - 1 {
        let w = mesh.w_rad(i);
        for j in 0..m {
            let (na, nb, e) = (mesh.node(i, j), mesh.node(i + 1, j), mesh.rad_link(i, j));
            let (k, ga, gb, gl) = link_term(w, psi[na], psi[nb], a_rad[e]);
            kinetic += k;
            if with_gradient {
                g_psi[na] += ga;
                g_psi[nb] += gb;
                g_rad[e] = gl;
            }
        }
    }
    for i in 1..nr {
        let w = mesh.w_ang(i);
        for j in 0..m {
            let (na, nb, e) = (mesh.node(i, j), mesh.node(i, j + 1), mesh.ang_link(i, j));
            let (k, ga, gb, gl) = link_term(w, psi[na], psi[nb], a_ang[e]);
            kinetic += k;
            if with_gradient {
                g_psi[na] += ga;
                g_psi[nb] += gb;
                g_ang[e] = gl;
            }
        }
    }

    let inv = 1.0 / (2.0 * eps * eps);
    let mut potential = 0.0;
    for (n, z) in psi.iter().enumerate() {
        let (mi, mo) = mesh.mass_split(n);
        let rho = z.norm_sqr();
        potential += (mi * (1.0 - rho).powi(2) + mo * (a_level - rho).powi(2)) * inv;
        if with_gradient {
            let s = mi * (1.0 - rho) + mo * (a_level - rho);
            g_psi[n] -= 4.0 * inv * s * z;
        }
    }

    let circ = gauge::circulation(mesh, a_rad, a_ang);
    let mut field = 0.0;
    let mut g_circ = vec![0.0; if with_gradient { circ.len() } else { 0 }];
    for (p, c) in circ.iter().enumerate() {
        let area = mesh.plaquette_area(p / m);
        let d = c - h * area;
        field += d * d / area;
        if with_gradient {
            g_circ[p] = 2.0 * d / area;
        }
    }
    if with_gradient {
        gauge::circulation_adjoint(mesh, &g_circ, &mut g_rad, &mut g_ang);
    }
    Evaluation {
        energy: EnergyBreakdown::new(kinetic, potential, field, h),
        g_psi,
        g_rad,
        g_ang,
    }
}

/// Discrete 𝒢_{ε,H}(ψ, A).
pub fn gl_energy(psi: &Field2D, a: &Gauge2D, model: &PinningModel, h: f64) -> Result<EnergyBreakdown> {
    if !same_mesh(&psi.mesh, &a.mesh)
        || psi.psi.len() != psi.mesh.n_nodes()
        || a.a_rad.len() != a.mesh.n_rad_links()
        || a.a_ang.len() != a.mesh.n_ang_links()
    {
        return Err(Error::MeshMismatch);
    }
    if h < 0.0 || !h.is_finite() {
        return Err(Error::Domain(format!("H = {h} must be nonnegative")));
    }
    if model.r_int() != psi.mesh.grid().r_int() {
        return Err(Error::MeshMismatch);
    }
    Ok(evaluate(
        &psi.mesh,
        model.a(),
        model.epsilon(),
        h,
        &psi.psi,
        &a.a_rad,
        &a.a_ang,
        false,
    )
    .energy)
}

/// Gradient of 𝒢 with respect to (Re ψ, Im ψ) and the link values.
pub fn gl_gradient(
    psi: &Field2D,
    a: &Gauge2D,
    model: &PinningModel,
    h: f64,
) -> Result<(Vec<Complex64>, Vec<f64>, Vec<f64>)> {
    gl_energy(psi, a, model, h)?;
    let ev = evaluate(
        &psi.mesh,
        model.a(),
        model.epsilon(),
        h,
        &psi.psi,
        &a.a_rad,
        &a.a_ang,
        true,
    );
    Ok((ev.g_psi, ev.g_rad, ev.g_ang))
}

/// ℱ_{ε,H}(φ, A) with weight u².
fn reduced_energy(mesh: &DiscMesh, u: &RadialProfile, h: f64, phi: &[Complex64], a: &Gauge2D) -> f64 {
    let m = mesh.n_theta();
    let nr = mesh.n_r();
    let uv = &u.values;
    let mut kin = 0.0;
    for i in 0..nr - 1 {
        let w = mesh.w_rad(i) * uv[i] * uv[i + 1];
        for j in 0..m {
            let d = phi[mesh.node(i + 1, j)] * Complex64::from_polar(1.0, -a.a_rad[mesh.rad_link(i, j)])
                - phi[mesh.node(i, j)];
            kin += w * d.norm_sqr();
        }
    }
    for i in 1..nr {
        let w = mesh.w_ang(i) * uv[i] * uv[i];
        for j in 0..m {
            let d = phi[mesh.node(i, j + 1)] * Complex64::from_polar(1.0, -a.a_ang[mesh.ang_link(i, j)])
                - phi[mesh.node(i, j)];
            kin += w * d.norm_sqr();
        }
    }
    let eps = u.model.epsilon();
    let mut pot = 0.0;
    for (n, z) in phi.iter().enumerate() {
        let v = uv[mesh.ring_of(n).0];
        pot += mesh.mass(n) * v.powi(4) * (1.0 - z.norm_sqr()).powi(2);
    }
    pot /= 2.0 * eps * eps;
    let circ = a.circulation();
    let field: f64 = circ
        .iter()
        .enumerate()
        .map(|(p, c)| {
            let area = mesh.plaquette_area(p / m);
            (c - h * area).powi(2) / area
        })
        .sum();
    kin + pot + field
}

/// Relative tolerance of the splitting identity.
pub const SPLIT_TOLERANCE: f64 = 1e-10;

/// Evaluates 𝒢, C₀ and ℱ(ψ/u, A) and checks 𝒢 = C₀ + ℱ.
pub fn split_energy(psi: &Field2D, a: &Gauge2D, u: &RadialProfile, h: f64) -> Result<EnergyBreakdown> {
    check_profile(&psi.mesh, u)?;
    let mut e = gl_energy(psi, a, &u.model, h)?;
    let phi = psi.divided_by(u)?;
    let c0 = energy_c0(u);
    let f = reduced_energy(&psi.mesh, u, h, &phi.psi, a);
    e.split_c0 = Some(c0);
    e.split_f = Some(f);
    let gap = (e.total - c0 - f).abs();
    if gap > SPLIT_TOLERANCE * (1.0 + e.total.abs()) {
        return Err(Error::Postcondition(format!(
            "splitting identity off by {gap:e} (G = {}, C0 = {c0}, F = {f})",
            e.total
        )));
    }
    Ok(e)
}

/// ψ = u, A = (H/u²)∇^⊥h_ε on the mesh. The angular link values are
/// H·Δθ·(r h′/u²)(r_i), with r h′/u² taken from the conservative London
/// fluxes so that plaquette fluxes reproduce H·h_ε.
pub fn meissner_configuration(
    u: &RadialProfile,
    sol: &LondonSolution,
    h: f64,
    mesh: Arc<DiscMesh>,
) -> Result<(Field2D, Gauge2D)> {
    check_profile(&mesh, u)?;
    if sol.grid != *mesh.grid() {
        return Err(Error::MeshMismatch);
    }
    let psi = Field2D::radial(mesh.clone(), &u.values)?;
    let grid = mesh.grid();
    let r = grid.nodes();
    let flux = crate::london::edge_flux(sol);
    let m = mesh.n_theta();
    let mut a_ang = vec![0.0; mesh.n_ang_links()];
    for i in 1..mesh.n_r() {
        let lo = grid.half(i - 1);
        let rq = lo * flux[i - 1] + 0.5 * (r[i] * r[i] - lo * lo) * sol.h[i];
        let v = h * mesh.d_theta() * rq;
        for j in 0..m {
            a_ang[mesh.ang_link(i, j)] = v;
        }
    }
    let a = Gauge2D {
        mesh: mesh.clone(),
        a_rad: vec![0.0; mesh.n_rad_links()],
        a_ang,
    };
    Ok((psi, a))
}

/// Vorticity density per plaquette and its integral.
#[derive(Debug, Clone)]
pub struct Vorticity {
    pub density: Vec<f64>,
    pub total: f64,
}

/// μ = curl j + curl A with the link current j_e = |ψ_a||ψ_b|·arg(ψ̄_a ψ_b e^{−ia_e}).
pub fn vorticity(psi: &Field2D, a: &Gauge2D) -> Result<Vorticity> {
    if !same_mesh(&psi.mesh, &a.mesh) {
        return Err(Error::MeshMismatch);
    }
    let mesh = &psi.mesh;
    let m = mesh.n_theta();
    let nr = mesh.n_r();
    let p = &psi.psi;
    let current = |na: usize, nb: usize, link: f64| {
        let z = p[na].conj() * p[nb] * Complex64::from_polar(1.0, -link);
        if z.norm() == 0.0 {
            0.0
        } else {
            p[na].norm() * p[nb].norm() * z.arg()
        }
    };
    let j_rad: Vec<f64> = (0..mesh.n_rad_links())
        .map(|e| {
            let (i, j) = (e / m, e % m);
            current(mesh.node(i, j), mesh.node(i + 1, j), a.a_rad[e])
        })
        .collect();
    let j_ang: Vec<f64> = (0..mesh.n_ang_links())
        .map(|e| {
            let (i, j) = (e / m + 1, e % m);
            current(mesh.node(i, j), mesh.node(i, j + 1), a.a_ang[e])
        })
        .collect();
    let cj = gauge::circulation(mesh, &j_rad, &j_ang);
    let ca = a.circulation();
    let mut total = 0.0;
    let density = (0..mesh.n_plaquettes())
        .map(|q| {
            let s = cj[q] + ca[q];
            total += s;
            s / mesh.plaquette_area(q / m)
        })
        .collect();
    let _ = nr;
    Ok(Vorticity { density, total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::london::solve_london;
    use crate::model::RadialGrid;
    use crate::profile1d::solve_radial_minimizer;

    fn small_mesh() -> Arc<DiscMesh> {
        Arc::new(DiscMesh::new(RadialGrid::uniform(25, 0.5).unwrap(), 24).unwrap())
    }

    #[test]
    fn zero_field_potential_only() {
        let mesh = small_mesh();
        let model = PinningModel::new(0.25, 0.5, 0.1).unwrap();
        let psi = Field2D::constant(mesh.clone(), Complex64::new(0.0, 0.0));
        let e = gl_energy(&psi, &Gauge2D::zero(mesh), &model, 0.0).unwrap();
        let exact = PI * (0.25 + 0.0625 * 0.75) / (2.0 * 0.01);
        assert!((e.total - exact).abs() < 1e-10 * exact);
        assert_eq!(e.kinetic, 0.0);
    }

    #[test]
    fn stream_links_are_divergence_free() {
        let mesh = small_mesh();
        let f: Vec<f64> = (0..mesh.n_plaquettes())
            .map(|p| ((p * 37) % 11) as f64 * 0.01)
            .collect();
        let a = Gauge2D::from_stream(mesh.clone(), &f).unwrap();
        assert!(a.divergence_residual() < 1e-12);
        assert!(a.normal_trace_residual() < 1e-12);
    }

    #[test]
    fn projection_preserves_energy_and_flux() {
        let mesh = small_mesh();
        let model = PinningModel::new(0.25, 0.5, 0.1).unwrap();
        let psi = Field2D::new(
            mesh.clone(),
            (0..mesh.n_nodes())
                .map(|n| Complex64::from_polar(0.8, 0.1 * n as f64))
                .collect(),
        )
        .unwrap();
        let a_rad = (0..mesh.n_rad_links()).map(|e| 0.01 * ((e % 7) as f64 - 3.0)).collect();
        let a_ang = (0..mesh.n_ang_links()).map(|e| 0.02 * ((e % 5) as f64 - 2.0)).collect();
        let a = Gauge2D::new(mesh.clone(), a_rad, a_ang).unwrap();
        let e0 = gl_energy(&psi, &a, &model, 0.7).unwrap().total;
        let (p1, a1, _) = coulomb_projection(&psi, &a).unwrap();
        let e1 = gl_energy(&p1, &a1, &model, 0.7).unwrap().total;
        assert!((e0 - e1).abs() < 1e-10 * e0);
        assert!(a1.divergence_residual() < 1e-9);
        let (c0, c1) = (a.circulation(), a1.circulation());
        let err = c0.iter().zip(&c1).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mesh = small_mesh();
        let model = PinningModel::new(0.25, 0.5, 0.1).unwrap();
        let (psi, a) = random_smooth_init(mesh.clone(), 11);
        let h = 0.8;
        let (gp, gr, ga) = gl_gradient(&psi, &a, &model, h).unwrap();
        let e = |p: &Field2D, g: &Gauge2D| gl_energy(p, g, &model, h).unwrap().total;
        let step = 1e-6;
        for n in [0, 5, 100, 400] {
            let mut p1 = psi.clone();
            let mut p2 = psi.clone();
            p1.psi[n] += Complex64::new(0.0, step);
            p2.psi[n] -= Complex64::new(0.0, step);
            let fd = (e(&p1, &a) - e(&p2, &a)) / (2.0 * step);
            assert!(
                (fd - gp[n].im).abs() <= 1e-5 * gp[n].im.abs().max(1.0),
                "{fd} {}",
                gp[n].im
            );
        }
        for k in [3, 50, 300] {
            let mut a1 = a.clone();
            let mut a2 = a.clone();
            a1.a_rad[k] += step;
            a2.a_rad[k] -= step;
            let fd = (e(&psi, &a1) - e(&psi, &a2)) / (2.0 * step);
            assert!((fd - gr[k]).abs() <= 1e-5 * gr[k].abs().max(1.0));
            let mut a1 = a.clone();
            let mut a2 = a.clone();
            a1.a_ang[k] += step;
            a2.a_ang[k] -= step;
            let fd = (e(&psi, &a1) - e(&psi, &a2)) / (2.0 * step);
            assert!((fd - ga[k]).abs() <= 1e-5 * ga[k].abs().max(1.0));
        }
    }

    #[test]
    fn unit_field_has_no_vorticity() {
        let mesh = small_mesh();
        let psi = Field2D::constant(mesh.clone(), Complex64::new(1.0, 0.0));
        let a_ang = (0..mesh.n_ang_links()).map(|e| 0.05 * (e as f64).sin()).collect();
        let a_rad = (0..mesh.n_rad_links()).map(|e| 0.03 * (e as f64).cos()).collect();
        let a = Gauge2D::new(mesh, a_rad, a_ang).unwrap();
        let mu = vorticity(&psi, &a).unwrap();
        assert!(mu.density.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn meissner_fluxes_match_london_field() {
        let model = PinningModel::new(0.25, 0.5, 0.1).unwrap();
        let mesh = Arc::new(DiscMesh::for_model(&model, 96, 32).unwrap());
        let u = solve_radial_minimizer(&model, mesh.grid()).unwrap();
        let sol = solve_london(&u).unwrap();
        let (_, a) = meissner_configuration(&u, &sol, 1.0, mesh.clone()).unwrap();
        assert!((a.boundary_curl() - 1.0).abs() < 1e-3);
        let (_, a0) = meissner_configuration(&u, &sol, 0.0, mesh).unwrap();
        assert!(a0.a_ang.iter().all(|&v| v == 0.0));
    }
}
