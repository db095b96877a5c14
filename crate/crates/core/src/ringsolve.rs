//! Direct solver for rotation-invariant operators on ring-structured meshes.
//!
//! An operator that couples concentric rings of `m` equally spaced unknowns
//! with ring-dependent weights is diagonalized by a DFT in the angular index,
//! leaving one tridiagonal system per Fourier mode.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Symmetric operator
/// `(Px)_{i,j} = d_i x_{ij} + a_i(2x_{ij} − x_{i,j±1}) + Σ r(x_{ij} − x_{i±1,j}) + o·x_{ij}`
/// on rings `0..k`, optionally with a centre unknown joined to every node of
/// ring 0 with weight `wc`, and an outer Dirichlet coupling `o` on the last ring.
#[derive(Clone)]
pub(crate) struct RingOperator {
    m: usize,
    diag: Vec<f64>,
    ang: Vec<f64>,
    rad: Vec<f64>,
    outer: f64,
    center: Option<(f64, f64)>,
    pin_center: bool,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl RingOperator {
    /// `diag`, `ang` have one entry per ring, `rad` one per adjacent ring pair.
    /// `center = Some((wc, dc))` adds a centre node with mass term `dc`.
    pub(crate) fn new(
        m: usize,
        diag: Vec<f64>,
        ang: Vec<f64>,
        rad: Vec<f64>,
        outer: f64,
        center: Option<(f64, f64)>,
    ) -> Self {
        assert_eq!(diag.len(), ang.len());
        assert_eq!(rad.len() + 1, diag.len());
        let mut planner = FftPlanner::new();
        Self {
            m,
            fwd: planner.plan_fft_forward(m),
            inv: planner.plan_fft_inverse(m),
            diag,
            ang,
            rad,
            outer,
            center,
            pin_center: false,
        }
    }

    /// For singular (pure Neumann) operators: fix the centre value to zero.
    pub(crate) fn pinned(mut self) -> Self {
        assert!(self.center.is_some());
        self.pin_center = true;
        self
    }

    fn rings(&self) -> usize {
        self.diag.len()
    }

    /// Length of the unknown vector (centre first when present).
    pub(crate) fn len(&self) -> usize {
        self.rings() * self.m + usize::from(self.center.is_some())
    }

    /// Applies the operator to a real vector.
    #[cfg(test)]
    pub(crate) fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.len());
        let off = usize::from(self.center.is_some());
        let m = self.m;
        let k = self.rings();
        let mut y = vec![0.0; x.len()];
        for i in 0..k {
            for j in 0..m {
                let id = off + i * m + j;
                let v = x[id];
                let jp = off + i * m + (j + 1) % m;
                let jm = off + i * m + (j + m - 1) % m;
                let mut acc = self.diag[i] * v + self.ang[i] * (2.0 * v - x[jp] - x[jm]);
                if i + 1 < k {
                    acc += self.rad[i] * (v - x[id + m]);
                } else {
                    acc += self.outer * v;
                }
                if i > 0 {
                    acc += self.rad[i - 1] * (v - x[id - m]);
                }
                if let (0, Some((wc, _))) = (i, self.center) {
                    acc += wc * (v - x[0]);
                }
                y[id] = acc;
            }
        }
        if let Some((wc, dc)) = self.center {
            let ring0: f64 = x[1..=m].iter().sum();
            y[0] = dc * x[0] + wc * (m as f64 * x[0] - ring0);
        }
        y
    }

    /// Solves `P x = b` for complex right-hand sides.
    pub(crate) fn solve_complex(&self, b: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(b.len(), self.len());
        let off = usize::from(self.center.is_some());
        let m = self.m;
        let k = self.rings();
        let mut hat = b[off..].to_vec();
        for ring in hat.chunks_mut(m) {
            self.fwd.process(ring);
        }
        let mut center_val = Complex64::new(0.0, 0.0);
        let mut sub = vec![0.0; k + 1];
        let mut dia = vec![0.0; k + 1];
        let mut sup = vec![0.0; k + 1];
        let mut rhs = vec![Complex64::new(0.0, 0.0); k + 1];
        for mode in 0..m {
            let lam = 2.0 - 2.0 * (2.0 * std::f64::consts::PI * mode as f64 / m as f64).cos();
            for i in 0..k {
                let mut d = self.diag[i] + self.ang[i] * lam;
                if i + 1 < k {
                    d += self.rad[i];
                } else {
                    d += self.outer;
                }
                if i > 0 {
                    d += self.rad[i - 1];
                }
                if let (0, Some((wc, _))) = (i, self.center) {
                    d += wc;
                }
                dia[i + 1] = d;
                sub[i + 1] = if i > 0 { -self.rad[i - 1] } else { 0.0 };
                sup[i + 1] = if i + 1 < k { -self.rad[i] } else { 0.0 };
                rhs[i + 1] = hat[i * m + mode];
            }
            let with_center = mode == 0 && self.center.is_some() && !self.pin_center;
            let start = if with_center {
                let (wc, dc) = self.center.unwrap();
                dia[0] = dc + m as f64 * wc;
                sup[0] = -wc;
                sub[1] = -(m as f64) * wc;
                rhs[0] = b[0];
                0
            } else {
                1
            };
            thomas(&sub[start..], &dia[start..], &sup[start..], &mut rhs[start..]);
            if with_center {
                center_val = rhs[0];
            }
            for i in 0..k {
                hat[i * m + mode] = rhs[i + 1];
            }
        }
        let scale = 1.0 / m as f64;
        for ring in hat.chunks_mut(m) {
            self.inv.process(ring);
            for v in ring.iter_mut() {
                *v *= scale;
            }
        }
        let mut out = Vec::with_capacity(self.len());
        if self.center.is_some() {
            out.push(center_val);
        }
        out.extend(hat);
        out
    }

    /// Solves `P x = b` for a real right-hand side.
    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        let bc: Vec<Complex64> = b.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.solve_complex(&bc).into_iter().map(|z| z.re).collect()
    }
}

/// Thomas algorithm; `sub[0]` and the last `sup` are ignored.
pub(crate) fn thomas(sub: &[f64], dia: &[f64], sup: &[f64], rhs: &mut [Complex64]) {
    let n = dia.len();
    let mut c = vec![0.0; n];
    let mut beta = dia[0];
    c[0] = if n > 1 { sup[0] / beta } else { 0.0 };
    rhs[0] /= beta;
    for i in 1..n {
        beta = dia[i] - sub[i] * c[i - 1];
        if i + 1 < n {
            c[i] = sup[i] / beta;
        }
        let prev = rhs[i - 1];
        rhs[i] = (rhs[i] - prev * sub[i]) / beta;
    }
    for i in (0..n - 1).rev() {
        let next = rhs[i + 1];
        rhs[i] -= next * c[i];
    }
}

/// Real tridiagonal solve.
pub(crate) fn thomas_real(sub: &[f64], dia: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let mut r: Vec<Complex64> = rhs.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    thomas(sub, dia, sup, &mut r);
    r.into_iter().map(|z| z.re).collect()
}
