//! Random lattice supports.
//!
//! Two models: a discretized Gaussian cloud (`s` standard-normal vectors
//! scaled by `n / sqrt(2 ln s)` and rounded) and `s` distinct cells drawn
//! uniformly from the cube `{0, ..., n-1}^d`.

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticePoint, PointSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SceneModel {
    Gaussian,
    UniformCube,
}

impl std::str::FromStr for SceneModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(SceneModel::Gaussian),
            "uniform" | "uniform-cube" => Ok(SceneModel::UniformCube),
            other => Err(Error::invalid(format!("unknown scene model `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SceneParams {
    /// Intended number of points.
    pub s: u64,
    /// Resolution; must be an integer for the uniform model.
    pub n: f64,
    pub d: usize,
    pub model: SceneModel,
    /// Gaussian model only: draw the point count from `Poisson(s)`.
    pub poisson_count: bool,
}

impl SceneParams {
    pub fn new(model: SceneModel, s: u64, n: f64, d: usize) -> Self {
        SceneParams { s, n, d, model, poisson_count: false }
    }

    /// `ln s / (d ln n)`, so that `s = n^(d θ)`.
    pub fn theta(&self) -> f64 {
        theta(self.s, self.n, self.d)
    }

    fn validate(&self) -> Result<()> {
        if self.s < 1 {
            return Err(Error::invalid("s must be at least 1"));
        }
        if !(self.n > 0.0) || !self.n.is_finite() {
            return Err(Error::invalid(format!("n must be positive, got {}", self.n)));
        }
        if self.d < 2 {
            return Err(Error::invalid(format!("d must be at least 2, got {}", self.d)));
        }
        Ok(())
    }
}

pub fn theta(s: u64, n: f64, d: usize) -> f64 {
    (s as f64).ln() / (d as f64 * n.ln())
}

/// The `s` for which `ln s / (d ln n)` is closest to `theta`.
pub fn sparsity_for(theta: f64, n: f64, d: usize) -> u64 {
    n.powf(d as f64 * theta).round().max(1.0) as u64
}

pub fn generate<R: Rng + ?Sized>(params: &SceneParams, rng: &mut R) -> Result<PointSet> {
    match params.model {
        SceneModel::Gaussian => gaussian_scene(params, rng),
        SceneModel::UniformCube => uniform_cube_scene(params, rng),
    }
}

pub fn gaussian_scene<R: Rng + ?Sized>(params: &SceneParams, rng: &mut R) -> Result<PointSet> {
    params.validate()?;
    if params.s < 2 {
        return Err(Error::invalid("the gaussian model needs s >= 2"));
    }
    let s = params.s as f64;
    let scale = params.n / (2.0 * s.ln()).sqrt();
    let count = if params.poisson_count {
        let draw: f64 = Poisson::new(s).map_err(|e| Error::invalid(e.to_string()))?.sample(rng);
        // an empty support has no difference set
        (draw as u64).max(1)
    } else {
        params.s
    };
    let points = (0..count).map(|_| {
        let coords: Vec<i64> = (0..params.d)
            .map(|_| {
                let g: f64 = StandardNormal.sample(rng);
                // f64::round breaks ties away from zero
                (g * scale).round() as i64
            })
            .collect();
        LatticePoint::from_slice(&coords)
    });
    PointSet::new(points.collect::<Vec<_>>())
}

pub fn uniform_cube_scene<R: Rng + ?Sized>(params: &SceneParams, rng: &mut R) -> Result<PointSet> {
    params.validate()?;
    let n = params.n;
    if n.fract() != 0.0 || n < 2.0 {
        return Err(Error::invalid(format!("the uniform model needs an integer n >= 2, got {n}")));
    }
    let n = n as u64;
    let cells = (n as u128).checked_pow(params.d as u32).filter(|&c| c <= usize::MAX as u128);
    let Some(cells) = cells else {
        return Err(Error::invalid("grid too large"));
    };
    if params.s as u128 > cells {
        return Err(Error::invalid(format!("s = {} exceeds the {cells} grid cells", params.s)));
    }
    let chosen = rand::seq::index::sample(rng, cells as usize, params.s as usize);
    let points = chosen.into_iter().map(|mut idx| {
        let mut coords = vec![0i64; params.d];
        for c in coords.iter_mut() {
            *c = (idx as u64 % n) as i64;
            idx /= n as usize;
        }
        LatticePoint::from_slice(&coords)
    });
    PointSet::new(points.collect::<Vec<_>>())
}
