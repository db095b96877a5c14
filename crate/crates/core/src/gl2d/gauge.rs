//! Link variables, discrete exterior calculus on the polar mesh, and the
//! fast solvers used for gauge fixing and preconditioning.
//!
//! A link field `a` holds line integrals of A along mesh links. In Coulomb
//! gauge it is the co-gradient of a stream function `f` on plaquettes
//! (vanishing outside the disc): `a_e = (f_left − f_right)/w_e`. This makes
//! the discrete divergence vanish identically, including the normal trace on
//! the boundary.

use crate::model::DiscMesh;
use crate::ringsolve::RingOperator;

/// Circulation of the link field around every plaquette.
pub(crate) fn circulation(mesh: &DiscMesh, a_rad: &[f64], a_ang: &[f64]) -> Vec<f64> {
    let m = mesh.n_theta();
    let nr = mesh.n_r();
    let mut out = vec![0.0; mesh.n_plaquettes()];
    for i in 0..nr - 1 {
        for j in 0..m {
            let mut c = a_rad[mesh.rad_link(i, j)] + a_ang[mesh.ang_link(i + 1, j)] - a_rad[mesh.rad_link(i, j + 1)];
            if i > 0 {
                c -= a_ang[mesh.ang_link(i, j)];
            }
            out[mesh.plaquette(i, j)] = c;
        }
    }
    out
}

/// Adjoint of [`circulation`]: accumulates `g_p` back onto links.
pub(crate) fn circulation_adjoint(mesh: &DiscMesh, g: &[f64], g_rad: &mut [f64], g_ang: &mut [f64]) {
    let m = mesh.n_theta();
    for i in 0..mesh.n_r() - 1 {
        for j in 0..m {
            let v = g[mesh.plaquette(i, j)];
            g_rad[mesh.rad_link(i, j)] += v;
            g_ang[mesh.ang_link(i + 1, j)] += v;
            g_rad[mesh.rad_link(i, j + 1)] -= v;
            if i > 0 {
                g_ang[mesh.ang_link(i, j)] -= v;
            }
        }
    }
}

/// Links of the Coulomb-gauge field with stream function `f`.
pub(crate) fn links_from_stream(mesh: &DiscMesh, f: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let m = mesh.n_theta();
    let nr = mesh.n_r();
    let fv = |i: usize, j: usize| if i + 1 >= nr { 0.0 } else { f[mesh.plaquette(i, j)] };
    let mut a_rad = vec![0.0; mesh.n_rad_links()];
    let mut a_ang = vec![0.0; mesh.n_ang_links()];
    for i in 0..nr - 1 {
        let w = mesh.w_rad(i);
        for j in 0..m {
            a_rad[mesh.rad_link(i, j)] = (fv(i, (j + m - 1) % m) - fv(i, j)) / w;
        }
    }
    for i in 1..nr {
        let w = mesh.w_ang(i);
        for j in 0..m {
            a_ang[mesh.ang_link(i, j)] = (fv(i, j) - fv(i - 1, j)) / w;
        }
    }
    (a_rad, a_ang)
}

/// Adjoint of [`links_from_stream`]: gradient with respect to `f`.
pub(crate) fn stream_adjoint(mesh: &DiscMesh, g_rad: &[f64], g_ang: &[f64]) -> Vec<f64> {
    let m = mesh.n_theta();
    let nr = mesh.n_r();
    let mut g = vec![0.0; mesh.n_plaquettes()];
    for i in 0..nr - 1 {
        let w = mesh.w_rad(i);
        for j in 0..m {
            let v = g_rad[mesh.rad_link(i, j)] / w;
            g[mesh.plaquette(i, (j + m - 1) % m)] += v;
            g[mesh.plaquette(i, j)] -= v;
        }
    }
    for i in 1..nr {
        let w = mesh.w_ang(i);
        for j in 0..m {
            let v = g_ang[mesh.ang_link(i, j)] / w;
            if i + 1 < nr {
                g[mesh.plaquette(i, j)] += v;
            }
            g[mesh.plaquette(i - 1, j)] -= v;
        }
    }
    g
}

/// Weighted outflow Σ w_e a_e at every node; zero in Coulomb gauge.
pub(crate) fn outflow(mesh: &DiscMesh, a_rad: &[f64], a_ang: &[f64]) -> Vec<f64> {
    let m = mesh.n_theta();
    let nr = mesh.n_r();
    let mut out = vec![0.0; mesh.n_nodes()];
    for i in 0..nr - 1 {
        let w = mesh.w_rad(i);
        for j in 0..m {
            let v = w * a_rad[mesh.rad_link(i, j)];
            out[mesh.node(i, j)] += v;
            out[mesh.node(i + 1, j)] -= v;
        }
    }
    for i in 1..nr {
        let w = mesh.w_ang(i);
        for j in 0..m {
            let v = w * a_ang[mesh.ang_link(i, j)];
            out[mesh.node(i, j)] += v;
            out[mesh.node(i, j + 1)] -= v;
        }
    }
    out
}

/// Adds the discrete gradient of a nodal function to the links.
pub(crate) fn add_gradient(mesh: &DiscMesh, chi: &[f64], a_rad: &mut [f64], a_ang: &mut [f64]) {
    let m = mesh.n_theta();
    let nr = mesh.n_r();
    for i in 0..nr - 1 {
        for j in 0..m {
            a_rad[mesh.rad_link(i, j)] += chi[mesh.node(i + 1, j)] - chi[mesh.node(i, j)];
        }
    }
    for i in 1..nr {
        for j in 0..m {
            a_ang[mesh.ang_link(i, j)] += chi[mesh.node(i, j + 1)] - chi[mesh.node(i, j)];
        }
    }
}

/// Neumann operator `L + c·M` on nodes (L the graph Laplacian with weights w_e).
pub(crate) fn primal_operator(mesh: &DiscMesh, c: f64) -> RingOperator {
    let nr = mesh.n_r();
    let k = nr - 1;
    let diag = (1..nr).map(|i| c * mesh.ring_mass(i)).collect();
    let ang = (1..nr).map(|i| mesh.w_ang(i)).collect();
    let rad = (1..nr - 1).map(|i| mesh.w_rad(i)).collect::<Vec<_>>();
    debug_assert_eq!(rad.len() + 1, k);
    RingOperator::new(
        mesh.n_theta(),
        diag,
        ang,
        rad,
        0.0,
        Some((mesh.w_rad(0), c * mesh.ring_mass(0))),
    )
}

/// Dirichlet operator `−div(κ∇·) + M` on interior nodes, κ given per ring
/// on radial edges (`kappa_rad[i]` for ring i → i+1) and per ring on angular
/// edges (`kappa_ang[i]`). Unknowns are the centre and rings 1..n_r−2.
pub(crate) fn weighted_dirichlet_operator(mesh: &DiscMesh, kappa_rad: &[f64], kappa_ang: &[f64]) -> RingOperator {
    let nr = mesh.n_r();
    let diag = (1..nr - 1).map(|i| mesh.ring_mass(i)).collect();
    let ang = (1..nr - 1).map(|i| kappa_ang[i] * mesh.w_ang(i)).collect();
    let rad = (1..nr - 2).map(|i| kappa_rad[i] * mesh.w_rad(i)).collect();
    RingOperator::new(
        mesh.n_theta(),
        diag,
        ang,
        rad,
        kappa_rad[nr - 2] * mesh.w_rad(nr - 2),
        Some((kappa_rad[0] * mesh.w_rad(0), mesh.ring_mass(0))),
    )
}

/// Dual Laplacian `C + s·M_p` on plaquettes with zero exterior values.
pub(crate) fn dual_operator(mesh: &DiscMesh, s: f64) -> RingOperator {
    let nr = mesh.n_r();
    let diag = (0..nr - 1).map(|i| s * mesh.plaquette_area(i)).collect();
    let ang = (0..nr - 1).map(|i| 1.0 / mesh.w_rad(i)).collect();
    let rad = (0..nr - 2).map(|i| 1.0 / mesh.w_ang(i + 1)).collect();
    RingOperator::new(mesh.n_theta(), diag, ang, rad, 1.0 / mesh.w_ang(nr - 1), None)
}

/// Splits a link field into `dχ + δf`: returns (χ, f) with χ(centre) = 0.
pub(crate) fn hodge_split(mesh: &DiscMesh, a_rad: &[f64], a_ang: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let lap = primal_operator(mesh, 0.0).pinned();
    let div = outflow(mesh, a_rad, a_ang);
    // For a = dχ the outflow equals −Lχ.
    let rhs: Vec<f64> = div.iter().map(|v| -v).collect();
    let chi = lap.solve(&rhs);
    let gamma = circulation(mesh, a_rad, a_ang);
    let dual = dual_operator(mesh, 0.0);
    let f: Vec<f64> = dual.solve(&gamma).into_iter().map(|v| -v).collect();
    (chi, f)
}
