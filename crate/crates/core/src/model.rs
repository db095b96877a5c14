//! Problem parameters, the step potential, and the radial and polar grids
//! shared by every solver.
//!
//! All discretizations in the crate are finite-volume schemes on the same
//! geometry: node `i` of a [`RadialGrid`] owns the annulus between the
//! neighbouring midpoints, and a [`DiscMesh`] splits each annulus into
//! `n_theta` equal sectors. Control volumes of the node sitting on `r = R`
//! are split into their inner and outer parts so that integrals of the step
//! potential are exact.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// The triple (a, R, ε) defining the pinned functional on the unit disc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PinningModel {
    a: f64,
    #[serde(rename = "R")]
    r_int: f64,
    epsilon: f64,
}

impl PinningModel {
    /// Validates 0 < a ≠ 1, 0 < R < 1 and 0 < ε < 1.
    pub fn new(a: f64, r_int: f64, epsilon: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::Config(format!("pinning level a = {a} must be positive")));
        }
        if a == 1.0 {
            return Err(Error::Degenerate("a = 1 gives the trivial profile U = 1".into()));
        }
        if !(r_int > 0.0 && r_int < 1.0) {
            return Err(Error::Config(format!("interface radius R = {r_int} must lie in (0,1)")));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Config(format!("epsilon = {epsilon} must lie in (0,1)")));
        }
        Ok(Self { a, r_int, epsilon })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// Interface radius R.
    pub fn r_int(&self) -> f64 {
        self.r_int
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// |ln ε|.
    pub fn log_eps(&self) -> f64 {
        self.epsilon.ln().abs()
    }

    /// Lower and upper bounds min(1,√a), max(1,√a) of the pinned profile.
    pub fn bounds(&self) -> (f64, f64) {
        let s = self.a.sqrt();
        (s.min(1.0), s.max(1.0))
    }

    /// Same model at a different ε.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.a, self.r_int, epsilon)
    }
}

/// Step potential: 1 on the closed disc of radius R, a outside.
pub fn step_potential(model: &PinningModel, r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::Domain(format!("radius {r} outside [0,1]")));
    }
    Ok(if r <= model.r_int { 1.0 } else { model.a })
}

/// Strictly increasing radii from 0 to 1 with the interface radius as a node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    iface: usize,
}

impl RadialGrid {
    /// Builds a grid from explicit nodes; `r_int` must appear exactly once.
    pub fn new(nodes: Vec<f64>, r_int: f64) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::Config("radial grid needs at least 3 nodes".into()));
        }
        if nodes[0] != 0.0 || *nodes.last().unwrap() != 1.0 {
            return Err(Error::Config("radial grid must start at 0 and end at 1".into()));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("radial grid must be strictly increasing".into()));
        }
        let hits: Vec<usize> = (0..nodes.len()).filter(|&i| nodes[i] == r_int).collect();
        if hits.len() != 1 || hits[0] == 0 || hits[0] == nodes.len() - 1 {
            return Err(Error::Config(format!(
                "interface radius {r_int} must be an interior node"
            )));
        }
        Ok(Self { nodes, iface: hits[0] })
    }

    /// Uniform grid with `n` nodes that contains `r_int`; used for oracles.
    pub fn uniform(n: usize, r_int: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::Config("radial grid needs at least 3 nodes".into()));
        }
        let k = ((r_int * (n - 1) as f64).round() as usize).clamp(1, n - 2);
        let mut nodes = Vec::with_capacity(n);
        for i in 0..=k {
            nodes.push(r_int * i as f64 / k as f64);
        }
        let m = n - 1 - k;
        for i in 1..=m {
            nodes.push(r_int + (1.0 - r_int) * i as f64 / m as f64);
        }
        *nodes.last_mut().unwrap() = 1.0;
        Self::new(nodes, r_int)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Index of the node at r = R.
    pub fn interface_index(&self) -> usize {
        self.iface
    }

    pub fn r_int(&self) -> f64 {
        self.nodes[self.iface]
    }

    /// Midpoint radius between nodes i and i+1; by convention 1 for the last node.
    pub fn half(&self, i: usize) -> f64 {
        if i + 1 >= self.nodes.len() {
            1.0
        } else {
            0.5 * (self.nodes[i] + self.nodes[i + 1])
        }
    }

    /// ∫ r dr over the control interval of node i, split at R as (inner, outer).
    pub fn volume_split(&self, i: usize) -> (f64, f64) {
        let lo = if i == 0 { 0.0 } else { self.half(i - 1) };
        let hi = self.half(i);
        let r = self.r_int();
        let cut = r.clamp(lo, hi);
        (0.5 * (cut * cut - lo * lo), 0.5 * (hi * hi - cut * cut))
    }

    /// ∫ r dr over the control interval of node i.
    pub fn volume(&self, i: usize) -> f64 {
        let (a, b) = self.volume_split(i);
        a + b
    }

    /// Flux coefficient r_{i+1/2}/(r_{i+1} − r_i) of the edge (i, i+1).
    pub fn edge_coeff(&self, i: usize) -> f64 {
        self.half(i) / (self.nodes[i + 1] - self.nodes[i])
    }

    /// Volume-weighted potential value on the control interval of node i.
    pub fn mean_potential(&self, i: usize, a: f64) -> f64 {
        let (vi, vo) = self.volume_split(i);
        (vi + a * vo) / (vi + vo)
    }
}

/// Grid with nodes concentrated in the ε-layer around R.
///
/// Node density is proportional to `1 + sech²((r−R)/3ε)/(6ε)`, which puts
/// roughly half the nodes in the layer; the two sides of R are mapped
/// separately so that R is a node.
pub fn graded_radial_grid(model: &PinningModel, n: usize) -> Result<RadialGrid> {
    if n < 64 {
        return Err(Error::Config(format!("radial grid needs at least 64 nodes, got {n}")));
    }
    let r_int = model.r_int();
    let w = 3.0 * model.epsilon();
    let k = 1.0 / (6.0 * model.epsilon());
    let cum = |r: f64| r + k * w * ((r - r_int) / w).tanh();
    let inverse = |target: f64, mut lo: f64, mut hi: f64| {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if cum(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-16 {
                break;
            }
        }
        0.5 * (lo + hi)
    };
    let (c0, cr, c1) = (cum(0.0), cum(r_int), cum(1.0));
    let intervals = n - 1;
    let n_in = ((intervals as f64) * (cr - c0) / (c1 - c0)).round() as usize;
    let n_in = n_in.clamp(2, intervals - 2);
    let n_out = intervals - n_in;
    let mut nodes = Vec::with_capacity(n);
    nodes.push(0.0);
    for i in 1..n_in {
        nodes.push(inverse(c0 + (cr - c0) * i as f64 / n_in as f64, 0.0, r_int));
    }
    nodes.push(r_int);
    for i in 1..n_out {
        nodes.push(inverse(cr + (c1 - cr) * i as f64 / n_out as f64, r_int, 1.0));
    }
    nodes.push(1.0);
    let grid = RadialGrid::new(nodes, r_int)?;
    let eps = model.epsilon();
    let layer = grid.nodes().iter().filter(|&&r| (r - r_int).abs() <= 5.0 * eps).count();
    if layer < 20 {
        return Err(Error::Config(format!(
            "only {layer} nodes within 5ε of R; increase the grid size"
        )));
    }
    Ok(grid)
}

/// Polar finite-volume mesh of the closed unit disc.
///
/// Node 0 is the centre; node `(i, j)` with ring `i ≥ 1` and angle index `j`
/// has index `1 + (i−1)·n_θ + j`. Radial links `(i, j)` join ring `i` to ring
/// `i+1` along the ray θ_j (ring 0 being the centre); angular links `(i, j)`
/// join `(i, j)` to `(i, j+1)`. Plaquette `(i, j)` is the cell between rings
/// `i, i+1` and rays `j, j+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscMesh {
    grid: RadialGrid,
    n_theta: usize,
    d_theta: f64,
    node_mass: Vec<f64>,
    mass_split: Vec<(f64, f64)>,
    w_rad: Vec<f64>,
    w_ang: Vec<f64>,
    plaq_area: Vec<f64>,
}

impl DiscMesh {
    pub fn new(grid: RadialGrid, n_theta: usize) -> Result<Self> {
        if n_theta < 8 {
            return Err(Error::Config(format!("n_theta = {n_theta} is too small")));
        }
        let nr = grid.len();
        let dth = 2.0 * PI / n_theta as f64;
        let r = grid.nodes();
        let mut node_mass = Vec::with_capacity(nr);
        let mut mass_split = Vec::with_capacity(nr);
        for i in 0..nr {
            let (vi, vo) = grid.volume_split(i);
            let scale = if i == 0 { 2.0 * PI } else { dth };
            mass_split.push((scale * vi, scale * vo));
            node_mass.push(scale * (vi + vo));
        }
        let w_rad = (0..nr - 1).map(|i| grid.half(i) * dth / (r[i + 1] - r[i])).collect();
        let mut w_ang = vec![0.0; nr];
        for i in 1..nr {
            let lo = grid.half(i - 1);
            let hi = grid.half(i);
            w_ang[i] = (hi - lo) / (r[i] * dth);
        }
        let plaq_area = (0..nr - 1)
            .map(|i| 0.5 * dth * (r[i + 1] * r[i + 1] - r[i] * r[i]))
            .collect();
        Ok(Self {
            grid,
            n_theta,
            d_theta: dth,
            node_mass,
            mass_split,
            w_rad,
            w_ang,
            plaq_area,
        })
    }

    /// Mesh with a graded radial grid of `n_r` nodes.
    pub fn for_model(model: &PinningModel, n_r: usize, n_theta: usize) -> Result<Self> {
        Self::new(graded_radial_grid(model, n_r)?, n_theta)
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn radii(&self) -> &[f64] {
        self.grid.nodes()
    }

    /// Number of radial nodes including the centre.
    pub fn n_r(&self) -> usize {
        self.grid.len()
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn d_theta(&self) -> f64 {
        self.d_theta
    }

    pub fn n_nodes(&self) -> usize {
        1 + (self.n_r() - 1) * self.n_theta
    }

    pub fn n_rad_links(&self) -> usize {
        (self.n_r() - 1) * self.n_theta
    }

    pub fn n_ang_links(&self) -> usize {
        (self.n_r() - 1) * self.n_theta
    }

    pub fn n_plaquettes(&self) -> usize {
        (self.n_r() - 1) * self.n_theta
    }

    /// Node index of ring `i`, angle `j` (ring 0 is the centre for every j).
    #[inline]
    pub fn node(&self, i: usize, j: usize) -> usize {
        if i == 0 {
            0
        } else {
            1 + (i - 1) * self.n_theta + (j % self.n_theta)
        }
    }

    /// Ring and angle index of a node (the centre reports (0, 0)).
    #[inline]
    pub fn ring_of(&self, n: usize) -> (usize, usize) {
        if n == 0 {
            (0, 0)
        } else {
            (1 + (n - 1) / self.n_theta, (n - 1) % self.n_theta)
        }
    }

    pub fn theta(&self, j: usize) -> f64 {
        j as f64 * self.d_theta
    }

    /// Cartesian position of a node.
    pub fn position(&self, n: usize) -> (f64, f64) {
        let (i, j) = self.ring_of(n);
        let r = self.radii()[i];
        let t = self.theta(j);
        (r * t.cos(), r * t.sin())
    }

    /// Quadrature weight (control-volume area) of every node of ring i.
    pub fn ring_mass(&self, i: usize) -> f64 {
        self.node_mass[i]
    }

    /// Control-volume area of node n split at R as (inner, outer).
    pub fn mass_split(&self, n: usize) -> (f64, f64) {
        self.mass_split[self.ring_of(n).0]
    }

    pub fn mass(&self, n: usize) -> f64 {
        self.node_mass[self.ring_of(n).0]
    }

    /// Finite-volume weight of radial links from ring i.
    pub fn w_rad(&self, i: usize) -> f64 {
        self.w_rad[i]
    }

    /// Finite-volume weight of angular links on ring i ≥ 1.
    pub fn w_ang(&self, i: usize) -> f64 {
        self.w_ang[i]
    }

    /// Area of plaquettes between rings i and i+1.
    pub fn plaquette_area(&self, i: usize) -> f64 {
        self.plaq_area[i]
    }

    #[inline]
    pub fn rad_link(&self, i: usize, j: usize) -> usize {
        i * self.n_theta + (j % self.n_theta)
    }

    #[inline]
    pub fn ang_link(&self, i: usize, j: usize) -> usize {
        (i - 1) * self.n_theta + (j % self.n_theta)
    }

    #[inline]
    pub fn plaquette(&self, i: usize, j: usize) -> usize {
        i * self.n_theta + (j % self.n_theta)
    }

    /// Quadrature of a nodal function.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        assert_eq!(f.len(), self.n_nodes());
        f.iter().enumerate().map(|(n, v)| v * self.mass(n)).sum()
    }

    /// Sum of all node weights; equals π up to rounding.
    pub fn total_mass(&self) -> f64 {
        let m = self.n_theta as f64;
        self.node_mass[0] + self.node_mass[1..].iter().map(|w| w * m).sum::<f64>()
    }

    /// Representative cell size max(Δr, r·Δθ) at ring i.
    pub fn cell_size(&self, i: usize) -> f64 {
        let r = self.radii();
        let dr_lo = if i > 0 { r[i] - r[i - 1] } else { 0.0 };
        let dr_hi = if i + 1 < r.len() { r[i + 1] - r[i] } else { 0.0 };
        dr_lo.max(dr_hi).max(r[i] * self.d_theta)
    }

    /// Samples a radial function given on the mesh's radial nodes onto all nodes.
    pub fn lift_radial(&self, values: &[f64]) -> Vec<f64> {
        assert_eq!(values.len(), self.n_r());
        (0..self.n_nodes()).map(|n| values[self.ring_of(n).0]).collect()
    }
}
