//! Run configuration assembled from flags and an optional TOML file.

use pinned_gl::model::{graded_radial_grid, DiscMesh, PinningModel, RadialGrid};
use serde::Deserialize;
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// Problem parameters and mesh sizes after the config file has been applied.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub a: f64,
    pub r_int: f64,
    pub epsilon: f64,
    /// Node count of 1-D radial grids.
    pub grid: usize,
    /// (n_r, n_θ) of the polar mesh.
    pub mesh: (usize, usize),
    pub h: Option<f64>,
    pub n: Option<usize>,
    pub seed: u64,
    pub out: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileGrid {
    n_r: Option<usize>,
    n_theta: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    a: Option<f64>,
    #[serde(rename = "R")]
    r_int: Option<f64>,
    epsilon: Option<f64>,
    grid: Option<FileGrid>,
}

impl RunConfig {
    /// Applies the keys present in the TOML file at `path` on top of `self`.
    /// `grid.n_r` sets both the polar mesh and the 1-D grid radial count.
    pub fn merge_file(mut self, path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let file: FileConfig = toml::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))?;
        if let Some(a) = file.a {
            self.a = a;
        }
        if let Some(r) = file.r_int {
            self.r_int = r;
        }
        if let Some(e) = file.epsilon {
            self.epsilon = e;
        }
        if let Some(g) = file.grid {
            if let Some(n_r) = g.n_r {
                self.mesh.0 = n_r;
                self.grid = n_r;
            }
            if let Some(n_theta) = g.n_theta {
                self.mesh.1 = n_theta;
            }
        }
        Ok(self)
    }

    pub fn model(&self) -> pinned_gl::Result<PinningModel> {
        PinningModel::new(self.a, self.r_int, self.epsilon)
    }

    pub fn radial_grid(&self) -> pinned_gl::Result<(PinningModel, RadialGrid)> {
        let model = self.model()?;
        let grid = graded_radial_grid(&model, self.grid)?;
        Ok((model, grid))
    }

    pub fn disc_mesh(&self) -> pinned_gl::Result<(PinningModel, Arc<DiscMesh>)> {
        let model = self.model()?;
        let mesh = DiscMesh::for_model(&model, self.mesh.0, self.mesh.1)?;
        Ok((model, Arc::new(mesh)))
    }
}

/// Parses `NRxNT`.
pub fn parse_mesh(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("mesh `{s}` must look like 192x256"))?;
    let n_r = a.trim().parse().map_err(|_| format!("bad radial count in `{s}`"))?;
    let n_t = b.trim().parse().map_err(|_| format!("bad angular count in `{s}`"))?;
    Ok((n_r, n_t))
}

/// Parses `x,y`.
pub fn parse_point(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("point `{s}` must look like 0.2,0"))?;
    let x = a.trim().parse().map_err(|_| format!("bad x in `{s}`"))?;
    let y = b.trim().parse().map_err(|_| format!("bad y in `{s}`"))?;
    Ok((x, y))
}
