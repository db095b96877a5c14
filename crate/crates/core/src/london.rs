//! Weighted London equation, pinning landscape and vortex attractor.
//!
//! h solves −div(u⁻²∇h) + h = 0 on the disc with h = 1 on the boundary. The
//! landscape ξ = (h−1)/u² measures the cost of placing a vortex at a given
//! radius; its deepest point is the attractor.

use crate::error::{Error, Result};
use crate::model::RadialGrid;
use crate::profile1d::RadialProfile;
use crate::ringsolve::thomas_real;
use serde::Serialize;
use std::f64::consts::PI;

/// Argmax set of |ξ|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Attractor {
    CenterPoint,
    Circle { radius: f64 },
}

impl Attractor {
    pub fn kind(&self) -> &'static str {
        match self {
            Attractor::CenterPoint => "center_point",
            Attractor::Circle { .. } => "circle",
        }
    }

    /// Radius of the attractor (0 for the centre).
    pub fn radius(&self) -> f64 {
        match self {
            Attractor::CenterPoint => 0.0,
            Attractor::Circle { radius } => *radius,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LondonSolution {
    pub grid: RadialGrid,
    pub epsilon: f64,
    /// Coefficient profile u (u⁻² multiplies the gradient).
    pub u: Vec<f64>,
    pub h: Vec<f64>,
    pub xi: Vec<f64>,
    pub lambda_eps: f64,
    pub k_eps: f64,
    pub attractor: Attractor,
    /// Max-norm residual of the discrete equation scaled by its diagonal.
    pub residual: f64,
}

/// Edge value of u⁻² used by every weighted operator in the crate.
pub(crate) fn edge_inv_u2(ua: f64, ub: f64) -> f64 {
    0.5 * (1.0 / (ua * ua) + 1.0 / (ub * ub))
}

/// Solves the London equation with u_ε as coefficient.
pub fn solve_london(u: &RadialProfile) -> Result<LondonSolution> {
    solve_london_with_coefficient(&u.grid, &u.values, u.model.epsilon())
}

/// Solves the London equation for an arbitrary positive coefficient profile.
pub fn solve_london_with_coefficient(grid: &RadialGrid, u: &[f64], epsilon: f64) -> Result<LondonSolution> {
    let n = grid.len();
    if u.len() != n || u.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Domain("coefficient must be positive on every node".into()));
    }
    let kap: Vec<f64> = (0..n - 1)
        .map(|i| grid.edge_coeff(i) * edge_inv_u2(u[i], u[i + 1]))
        .collect();
    let m = n - 1;
    let mut sub = vec![0.0; m];
    let mut dia = vec![0.0; m];
    let mut sup = vec![0.0; m];
    let mut rhs = vec![0.0; m];
    for i in 0..m {
        dia[i] = grid.volume(i) + kap[i];
        if i > 0 {
            dia[i] += kap[i - 1];
            sub[i] = -kap[i - 1];
        }
        if i + 1 < m {
            sup[i] = -kap[i];
        } else {
            rhs[i] = kap[i];
        }
    }
    let apply = |h: &[f64], i: usize| {
        let mut f = grid.volume(i) * h[i] + kap[i] * (h[i] - h[i + 1]);
        if i > 0 {
            f += kap[i - 1] * (h[i] - h[i - 1]);
        }
        f
    };
    let mut h = thomas_real(&sub, &dia, &sup, &rhs);
    h.push(1.0);
    // One step of iterative refinement.
    let r: Vec<f64> = (0..m).map(|i| -apply(&h, i)).collect();
    let dh = thomas_real(&sub, &dia, &sup, &r);
    for i in 0..m {
        h[i] += dh[i];
    }
    // Residual scaled by the diagonal of the discrete operator.
    let residual = (0..m).map(|i| (apply(&h, i) / dia[i]).abs()).fold(0.0, f64::max);
    if !(residual <= 1e-10) {
        return Err(Error::Solver {
            message: "London linear solve inaccurate".into(),
            residual,
        });
    }
    let xi: Vec<f64> = h.iter().zip(u).map(|(h, u)| (h - 1.0) / (u * u)).collect();
    let (lambda_eps, _) = argmax_abs(&xi);
    let mut sol = LondonSolution {
        grid: grid.clone(),
        epsilon,
        u: u.to_vec(),
        h,
        xi,
        lambda_eps,
        k_eps: 1.0 / (2.0 * lambda_eps),
        attractor: Attractor::CenterPoint,
        residual,
    };
    sol.attractor = locate_attractor(&sol);
    check_invariants(&sol)?;
    Ok(sol)
}

fn argmax_abs(xi: &[f64]) -> (f64, usize) {
    let max = xi.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let idx = xi.iter().position(|v| v.abs() >= max - 1e-12).unwrap_or(0);
    (max, idx)
}

/// Discrete h′/u² on each edge.
pub fn edge_flux(sol: &LondonSolution) -> Vec<f64> {
    let r = sol.grid.nodes();
    (0..r.len() - 1)
        .map(|i| edge_inv_u2(sol.u[i], sol.u[i + 1]) * (sol.h[i + 1] - sol.h[i]) / (r[i + 1] - r[i]))
        .collect()
}

/// Jump of the reconstructed flux h′/u² across r = R.
pub fn flux_jump_at_interface(sol: &LondonSolution) -> f64 {
    let k = sol.grid.interface_index();
    let q = edge_flux(sol);
    let g = &sol.grid;
    let (vin, vout) = g.volume_split(k);
    let left = g.half(k - 1) * q[k - 1] + vin * sol.h[k];
    let right = g.half(k) * q[k] - vout * sol.h[k];
    (right - left).abs() / g.r_int()
}

fn check_invariants(sol: &LondonSolution) -> Result<()> {
    let n = sol.h.len();
    if let Some(i) = (0..n - 1).find(|&i| !(sol.h[i] > 0.0 && sol.h[i] < 1.0)) {
        return Err(Error::Postcondition(format!(
            "h = {} at node {i} outside (0,1)",
            sol.h[i]
        )));
    }
    if let Some(i) = (0..n - 1).find(|&i| sol.h[i + 1] < sol.h[i]) {
        return Err(Error::Postcondition(format!("h decreases at node {i}")));
    }
    let worst = edge_flux(sol).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if worst > 1.0 + 1e-8 {
        return Err(Error::Postcondition(format!("|h'/u^2| reaches {worst}")));
    }
    if sol.xi.iter().any(|&v| v > 0.0) {
        return Err(Error::Postcondition("xi must be nonpositive".into()));
    }
    Ok(())
}

/// (ξ, λ_ε, k_ε).
pub fn pinning_landscape(sol: &LondonSolution) -> (Vec<f64>, f64, f64) {
    (sol.xi.clone(), sol.lambda_eps, sol.k_eps)
}

/// CenterPoint when the argmax of |ξ| is within one cell of the origin,
/// otherwise the circle through the parabolic refinement of the argmax.
pub fn locate_attractor(sol: &LondonSolution) -> Attractor {
    let (_, i) = argmax_abs(&sol.xi);
    if i <= 1 {
        return Attractor::CenterPoint;
    }
    let r = sol.grid.nodes();
    if i + 1 >= r.len() {
        return Attractor::Circle { radius: r[i] };
    }
    let (x0, x1, x2) = (r[i - 1], r[i], r[i + 1]);
    let (y0, y1, y2) = (sol.xi[i - 1].abs(), sol.xi[i].abs(), sol.xi[i + 1].abs());
    let num = (x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0);
    let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    let radius = if den != 0.0 { x1 - 0.5 * num / den } else { x1 };
    Attractor::Circle {
        radius: radius.clamp(x0, x2),
    }
}

/// 2π∫(h′²/u² + (h−1)²) r dr.
pub fn j0_energy(sol: &LondonSolution) -> f64 {
    let g = &sol.grid;
    let n = g.len();
    let mut grad = 0.0;
    for i in 0..n - 1 {
        grad += g.edge_coeff(i) * edge_inv_u2(sol.u[i], sol.u[i + 1]) * (sol.h[i + 1] - sol.h[i]).powi(2);
    }
    let mass: f64 = (0..n).map(|i| g.volume(i) * (sol.h[i] - 1.0).powi(2)).sum();
    2.0 * PI * (grad + mass)
}

/// g = ξ + λ_ε together with its margin away from the interface.
#[derive(Debug, Clone, Serialize)]
pub struct LandscapeGap {
    pub g: Vec<f64>,
    /// Exclusion distance |ln ε|^{−1/4}.
    pub exclusion: f64,
    /// min g over nodes with |r−R| ≥ exclusion; `None` when no node qualifies.
    pub margin: Option<f64>,
}

pub fn landscape_gap(sol: &LondonSolution) -> Result<LandscapeGap> {
    if matches!(sol.attractor, Attractor::CenterPoint) {
        return Err(Error::NotApplicable(
            "landscape gap requires a circular attractor".into(),
        ));
    }
    let g: Vec<f64> = sol.xi.iter().map(|v| v + sol.lambda_eps).collect();
    if let Some(v) = g.iter().find(|&&v| v < 0.0) {
        return Err(Error::Postcondition(format!("gap {v} is negative")));
    }
    let exclusion = sol.epsilon.ln().abs().powf(-0.25);
    let r_int = sol.grid.r_int();
    let margin = sol
        .grid
        .nodes()
        .iter()
        .zip(&g)
        .filter(|(&r, _)| (r - r_int).abs() >= exclusion)
        .map(|(_, &v)| v)
        .reduce(f64::min);
    if let Some(m) = margin {
        if m <= 0.0 {
            return Err(Error::Postcondition(format!("gap margin {m} is not positive")));
        }
    }
    Ok(LandscapeGap { g, exclusion, margin })
}

/// ξ″(0) from the even quartic through the values at the first three nodes,
/// i.e. the symmetric five-point stencil.
pub fn xi_second_derivative_at_origin(sol: &LondonSolution) -> f64 {
    let r = sol.grid.nodes();
    let (r1, r2) = (r[1], r[2]);
    let (f0, f1, f2) = (sol.xi[0], sol.xi[1], sol.xi[2]);
    // f(r) = f0 + c2 r² + c4 r⁴ through (r1, f1), (r2, f2).
    let (a1, b1) = (r1 * r1, r1.powi(4));
    let (a2, b2) = (r2 * r2, r2.powi(4));
    let det = a1 * b2 - a2 * b1;
    let c2 = ((f1 - f0) * b2 - (f2 - f0) * b1) / det;
    2.0 * c2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{graded_radial_grid, PinningModel};
    use crate::profile1d::solve_radial_minimizer;

    #[test]
    fn flux_is_continuous_across_interface() {
        let m = PinningModel::new(0.25, 0.5, 0.02).unwrap();
        let g = graded_radial_grid(&m, 1024).unwrap();
        let u = solve_radial_minimizer(&m, &g).unwrap();
        let sol = solve_london(&u).unwrap();
        assert!(flux_jump_at_interface(&sol) < 1e-8);
        assert!(sol.residual <= 1e-10);
        assert_eq!(sol.xi[g.len() - 1], 0.0);
    }

    #[test]
    fn quartic_second_derivative() {
        let m = PinningModel::new(4.0, 0.5, 0.05).unwrap();
        let g = graded_radial_grid(&m, 128).unwrap();
        let u = solve_radial_minimizer(&m, &g).unwrap();
        let mut sol = solve_london(&u).unwrap();
        sol.xi = g.nodes().iter().map(|r| -1.0 + 0.7 * r * r + 0.2 * r.powi(4)).collect();
        assert!((xi_second_derivative_at_origin(&sol) - 1.4).abs() < 1e-9);
    }
}
