//! Noisy phase-retrieval front end.
//!
//! A support is turned into a complex signal on a box window, its
//! autocorrelation is computed through zero-padded FFTs, Gaussian noise of
//! fixed Euclidean norm is added, and the lags whose normalized magnitude
//! clears a threshold are handed to the solver as a difference set.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rustc_hash::FxHashMap;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{difference_set, equivalent, DifferenceSet, LatticePoint, PointSet};
use crate::rng::{stream, DIRECTION_STREAM, NOISE_STREAM, SCENE_STREAM, SIGNAL_STREAM};
use crate::scene::{generate, SceneParams};
use crate::search::{mistr, MistrParams};

/// Dense complex array indexed by lattice points.
///
/// Cell `i` along an axis holds lattice coordinate `i - origin[axis]`;
/// the last axis is contiguous.
#[derive(Clone, Debug, PartialEq)]
pub struct SignalGrid {
    values: Vec<Complex64>,
    shape: Vec<usize>,
    origin: Vec<usize>,
}

impl SignalGrid {
    pub fn zeros(shape: Vec<usize>, origin: Vec<usize>) -> Result<Self> {
        if shape.is_empty() || shape.len() != origin.len() {
            return Err(Error::invalid("shape and origin must have the same nonzero length"));
        }
        if shape.iter().zip(&origin).any(|(&s, &o)| s == 0 || o >= s) {
            return Err(Error::invalid("origin must lie inside a nonempty grid"));
        }
        let cells = shape.iter().product();
        Ok(SignalGrid { values: vec![Complex64::new(0.0, 0.0); cells], shape, origin })
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn origin(&self) -> &[usize] {
        &self.origin
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// Total number of cells.
    pub fn cell_count(&self) -> usize {
        self.values.len()
    }

    pub fn index_of(&self, p: &LatticePoint) -> Option<usize> {
        if p.dim() != self.dim() {
            return None;
        }
        let mut idx = 0usize;
        for ((&c, &side), &o) in p.coords().iter().zip(&self.shape).zip(&self.origin) {
            let i = c + o as i64;
            if i < 0 || i >= side as i64 {
                return None;
            }
            idx = idx * side + i as usize;
        }
        Some(idx)
    }

    pub fn point_of(&self, mut idx: usize) -> LatticePoint {
        let mut coords = vec![0i64; self.dim()];
        for axis in (0..self.dim()).rev() {
            let side = self.shape[axis];
            coords[axis] = (idx % side) as i64 - self.origin[axis] as i64;
            idx /= side;
        }
        LatticePoint::from_slice(&coords)
    }

    /// Zero outside the grid.
    pub fn get(&self, p: &LatticePoint) -> Complex64 {
        self.index_of(p).map_or(Complex64::new(0.0, 0.0), |i| self.values[i])
    }

    pub fn set(&mut self, p: &LatticePoint, value: Complex64) -> Result<()> {
        let i = self.index_of(p).ok_or_else(|| Error::invalid(format!("{p:?} lies outside the grid")))?;
        self.values[i] = value;
        Ok(())
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Lattice points of the nonzero cells.
    pub fn support(&self) -> Vec<LatticePoint> {
        (0..self.values.len()).filter(|&i| self.values[i] != Complex64::new(0.0, 0.0)).map(|i| self.point_of(i)).collect()
    }
}

/// The box `[-half_width, half_width]^dim`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub dim: usize,
    pub half_width: i64,
}

impl Window {
    /// The continuous box `[-extent, extent]^dim` sampled at spacing `1/n`.
    pub fn for_resolution(dim: usize, n: f64, extent: f64) -> Result<Self> {
        if !(n > 0.0) || !(extent > 0.0) {
            return Err(Error::invalid("resolution and extent must be positive"));
        }
        Ok(Window { dim, half_width: (extent * n).round() as i64 })
    }

    pub fn side(&self) -> usize {
        (2 * self.half_width + 1) as usize
    }

    fn clamp(&self, p: &LatticePoint) -> LatticePoint {
        let coords: Vec<i64> = p.coords().iter().map(|&c| c.clamp(-self.half_width, self.half_width)).collect();
        LatticePoint::from_slice(&coords)
    }
}

/// Clamps every point into the window; points that land on the same cell merge.
pub fn clip_to_window(support: &PointSet, window: &Window) -> Result<PointSet> {
    if support.dim() != window.dim {
        return Err(Error::DimensionMismatch { expected: window.dim, found: support.dim() });
    }
    PointSet::new(support.iter().map(|p| window.clamp(p)).collect::<Vec<_>>())
}

/// Autocorrelation norm of a sparse signal, by summing over point pairs.
fn sparse_autocorrelation_norm(entries: &[(LatticePoint, Complex64)]) -> f64 {
    let mut lags: FxHashMap<LatticePoint, Complex64> = FxHashMap::default();
    for (u, xu) in entries {
        for (v, xv) in entries {
            *lags.entry(u - v).or_default() += xu * xv.conj();
        }
    }
    lags.values().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Random complex values on the (clipped) support, scaled so that the
/// autocorrelation has unit Euclidean norm.
pub fn synthesize_signal<R: Rng + ?Sized>(support: &PointSet, window: &Window, rng: &mut R) -> Result<SignalGrid> {
    let clipped = clip_to_window(support, window)?;
    let h = window.half_width as usize;
    let mut grid = SignalGrid::zeros(vec![window.side(); window.dim], vec![h; window.dim])?;
    let mut entries = Vec::with_capacity(clipped.len());
    for p in clipped.iter() {
        let magnitude = rng.random_range(1.0..=1.2);
        let phase = rng.random_range(0.0..2.0 * PI);
        entries.push((p.clone(), Complex64::from_polar(magnitude, phase)));
    }
    let scale = 1.0 / sparse_autocorrelation_norm(&entries).sqrt();
    for (p, v) in entries {
        grid.set(&p, v * scale)?;
    }
    Ok(grid)
}

/// In-place N-d DFT (unnormalized) over a row-major array.
fn fft_nd(data: &mut [Complex64], shape: &[usize], inverse: bool) {
    let mut planner = FftPlanner::new();
    let total = data.len();
    let mut stride = 1;
    for axis in (0..shape.len()).rev() {
        let len = shape[axis];
        let fft = if inverse { planner.plan_fft_inverse(len) } else { planner.plan_fft_forward(len) };
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        if stride == 1 {
            fft.process_with_scratch(data, &mut scratch);
        } else {
            let mut line = vec![Complex64::default(); len];
            let block = len * stride;
            for start in (0..total).step_by(block) {
                for offset in 0..stride {
                    let base = start + offset;
                    for (i, slot) in line.iter_mut().enumerate() {
                        *slot = data[base + i * stride];
                    }
                    fft.process_with_scratch(&mut line, &mut scratch);
                    for (i, value) in line.iter().enumerate() {
                        data[base + i * stride] = *value;
                    }
                }
            }
        }
        stride *= len;
    }
}

/// `a(t) = Σ_u x(u + t) conj(x(u))` on the full lag grid.
///
/// Each axis of side `m` is zero-padded to `2m - 1`, which holds every lag
/// without wrap-around; lag 0 sits at offset `m - 1`.
pub fn autocorrelation(x: &SignalGrid) -> SignalGrid {
    let padded: Vec<usize> = x.shape.iter().map(|&m| 2 * m - 1).collect();
    let mut data = vec![Complex64::default(); padded.iter().product()];
    // embed x at the low corner of the padded grid
    for (i, v) in x.values.iter().enumerate() {
        if *v == Complex64::default() {
            continue;
        }
        let mut rem = i;
        let mut idx = 0;
        let mut mult = 1;
        for axis in (0..x.dim()).rev() {
            idx += (rem % x.shape[axis]) * mult;
            rem /= x.shape[axis];
            mult *= padded[axis];
        }
        data[idx] = *v;
    }

    fft_nd(&mut data, &padded, false);
    for v in data.iter_mut() {
        *v = Complex64::new(v.norm_sqr(), 0.0);
    }
    fft_nd(&mut data, &padded, true);
    let cells = data.len() as f64;

    // circular lag k maps to centered cell (k + m - 1) mod (2m - 1)
    let origin: Vec<usize> = x.shape.iter().map(|&m| m - 1).collect();
    let mut out = SignalGrid::zeros(padded.clone(), origin.clone()).expect("valid padded grid");
    for (k, v) in data.iter().enumerate() {
        let mut rem = k;
        let mut idx = 0;
        let mut mult = 1;
        for axis in (0..x.dim()).rev() {
            let side = padded[axis];
            let shifted = (rem % side + origin[axis]) % side;
            idx += shifted * mult;
            rem /= side;
            mult *= side;
        }
        out.values[idx] = v / cells;
    }
    out
}

/// `a + e` with `e` i.i.d. real Gaussian rescaled to Euclidean norm `sigma`.
pub fn add_noise<R: Rng + ?Sized>(a: &SignalGrid, sigma: f64, rng: &mut R) -> Result<SignalGrid> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::invalid(format!("sigma must be nonnegative, got {sigma}")));
    }
    let mut y = a.clone();
    if sigma == 0.0 {
        return Ok(y);
    }
    let e: Vec<f64> = (0..a.cell_count()).map(|_| StandardNormal.sample(rng)).collect();
    let norm = e.iter().map(|v| v * v).sum::<f64>().sqrt();
    for (yv, ev) in y.values.iter_mut().zip(e) {
        yv.re += ev * sigma / norm;
    }
    Ok(y)
}

/// Lags whose magnitude divided by `‖y‖₂` strictly exceeds `tau`.
pub fn threshold_support(y: &SignalGrid, tau: f64) -> Result<Vec<LatticePoint>> {
    let norm = y.norm();
    if norm == 0.0 {
        return Err(Error::invalid("cannot threshold an all-zero grid"));
    }
    Ok((0..y.cell_count()).filter(|&i| y.values[i].norm() / norm > tau).map(|i| y.point_of(i)).collect())
}

/// True iff the set (ignoring the origin) is closed under negation.
pub fn is_symmetric(lags: &[LatticePoint]) -> bool {
    let set: rustc_hash::FxHashSet<&LatticePoint> = lags.iter().collect();
    lags.iter().all(|t| t.is_zero() || set.contains(&-t))
}

/// Keeps `t` only when `-t` is present, and adds the origin.
pub fn symmetrize(lags: &[LatticePoint], dim: usize) -> Result<DifferenceSet> {
    let set: rustc_hash::FxHashSet<&LatticePoint> = lags.iter().collect();
    let kept = lags.iter().filter(|t| set.contains(&-*t)).cloned().chain([LatticePoint::zero(dim)]);
    DifferenceSet::new(kept.collect::<Vec<_>>())
}

/// Detection threshold for `M` cells at failure probability `eps`:
/// `(sqrt(2 ln M) + sqrt(2 ln(1/eps))) / sqrt(M)`.
pub fn compute_tau(cells: f64, eps: f64) -> Result<f64> {
    if !(cells >= 2.0) || !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("need M >= 2 and 0 < eps < 1, got M = {cells}, eps = {eps}")));
    }
    Ok(((2.0 * cells.ln()).sqrt() + (2.0 * (1.0 / eps).ln()).sqrt()) / cells.sqrt())
}

/// Noise level below which thresholding recovers the support with
/// probability at least `1 - eps`, given nonzero magnitudes in `[c1, c2]`:
/// `c1 sqrt(M) / (2 c2 sqrt(κ) (sqrt(2 ln M) + sqrt(2 ln(2/eps))))`.
pub fn sigma_bound(c1: f64, c2: f64, cells: f64, kappa: f64, eps: f64) -> Result<f64> {
    if !(c1 > 0.0 && c1 <= c2) || !(cells >= 2.0) || !(kappa >= 1.0) || !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid("need 0 < c1 <= c2, M >= 2, kappa >= 1 and 0 < eps < 1"));
    }
    let denom = 2.0 * c2 * kappa.sqrt() * ((2.0 * cells.ln()).sqrt() + (2.0 * (2.0 / eps).ln()).sqrt());
    Ok(c1 * cells.sqrt() / denom)
}

#[derive(Clone, Debug)]
pub struct NoisyParams {
    pub scene: SceneParams,
    /// Half-width of the continuous window, in units of `1/n`.
    pub extent: f64,
    pub sigma: f64,
    pub tau_thresh: f64,
    pub mistr: MistrParams,
}

impl NoisyParams {
    pub fn new(scene: SceneParams, sigma: f64, tau_thresh: f64) -> Self {
        NoisyParams { scene, extent: 2.0, sigma, tau_thresh, mistr: MistrParams::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoisyRecord {
    /// Support size after clipping to the window.
    pub realized_k: usize,
    /// Size of the true difference set.
    pub kappa: usize,
    /// Thresholded lags equal the true difference set.
    pub support_ok: bool,
    pub mistr_exact: bool,
    pub equivalent: bool,
    /// 0 when the solver did not run or failed.
    pub depth: usize,
    pub wall_ms: f64,
    pub cells: usize,
}

impl NoisyRecord {
    pub fn success(&self) -> bool {
        self.support_ok && self.mistr_exact && self.equivalent
    }
}

/// One seeded trial: scene, signal, autocorrelation, noise, threshold, solve.
///
/// The solver only runs when the thresholded lag set is symmetric; a
/// solver error is recorded as a failed recovery.
pub fn noisy_pipeline(params: &NoisyParams, seed: u64) -> Result<NoisyRecord> {
    let support = generate(&params.scene, &mut stream(seed, SCENE_STREAM))?;
    let window = Window::for_resolution(params.scene.d, params.scene.n, params.extent)?;
    let truth = clip_to_window(&support, &window)?;
    let true_w = difference_set(&truth)?;

    let x = synthesize_signal(&truth, &window, &mut stream(seed, SIGNAL_STREAM))?;
    let a = autocorrelation(&x);
    let y = add_noise(&a, params.sigma, &mut stream(seed, NOISE_STREAM))?;
    let lags = threshold_support(&y, params.tau_thresh)?;

    let mut record = NoisyRecord {
        realized_k: truth.len(),
        kappa: true_w.kappa(),
        support_ok: false,
        mistr_exact: false,
        equivalent: false,
        depth: 0,
        wall_ms: 0.0,
        cells: y.cell_count(),
    };
    let nonzero: Vec<LatticePoint> = lags.into_iter().filter(|t| !t.is_zero()).collect();
    if !is_symmetric(&nonzero) {
        return Ok(record);
    }
    let w = symmetrize(&nonzero, params.scene.d)?;
    record.support_ok = w == true_w;
    if let Ok(result) = mistr(&w, &params.mistr, &mut stream(seed, DIRECTION_STREAM)) {
        record.mistr_exact = result.exact;
        record.equivalent = equivalent(&result.recovered, &truth)?;
        record.depth = result.depth_used;
        record.wall_ms = result.stats.wall_ms();
    }
    Ok(record)
}
