//! The parsing energy: data term, Gaussian-MRF deformation term and priors,
//! plus the chain-membership index over the discrete displacement grid.


use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{LandmarkShape, Point2};
use crate::preprocess::Chain;
use crate::shape_model::{prior_beta, prior_transform, PcaInstance, PcaShapeModel, TransformPriorParams};

/// Per-landmark deformation penalties and the displacement grid.
///
/// `gamma[i]` couples landmarks i-1 and i; it is forced to zero at index 0
/// and at every segment start, so the quadratic form never crosses a
/// segment boundary.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeformationParams {
    pub alpha: Vec<f64>,
    pub gamma: Vec<f64>,
    pub d_max: f64,
    pub d_step: f64,
}

impl DeformationParams {
    pub fn new(
        alpha: Vec<f64>,
        mut gamma: Vec<f64>,
        d_max: f64,
        d_step: f64,
        segment_starts: &[usize],
    ) -> Result<Self> {
        if alpha.len() != gamma.len() {
            return Err(Error::DimensionMismatch("alpha/gamma length mismatch".into()));
        }
        if alpha.iter().chain(gamma.iter()).any(|&v| v < 0.0 || !v.is_finite()) {
            return Err(Error::InvalidInput("alpha/gamma must be finite and >= 0".into()));
        }
        if d_max <= 0.0 || d_step <= 0.0 {
            return Err(Error::InvalidInput("d_max and d_step must be positive".into()));
        }
        for &s in segment_starts {
            if s < gamma.len() {
                gamma[s] = 0.0;
            }
        }
        Ok(DeformationParams { alpha, gamma, d_max, d_step })
    }

    pub fn uniform(
        n: usize,
        alpha: f64,
        gamma: f64,
        d_max: f64,
        d_step: f64,
        segment_starts: &[usize],
    ) -> Result<Self> {
        DeformationParams::new(vec![alpha; n], vec![gamma; n], d_max, d_step, segment_starts)
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    /// Number of discrete displacement labels.
    pub fn num_labels(&self) -> usize {
        2 * (self.d_max / self.d_step).floor() as usize + 1
    }

    /// Displacement value of label `l`.
    pub fn displacement(&self, l: usize) -> f64 {
        let half = (self.d_max / self.d_step).floor();
        (l as f64 - half) * self.d_step
    }

    /// Label of the zero displacement.
    pub fn zero_label(&self) -> usize {
        (self.d_max / self.d_step).floor() as usize
    }
}

/// Full energy configuration.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnergyParams {
    pub deform: DeformationParams,
    /// Chain bonus applied per consecutive same-chain pair.
    pub delta: f64,
    /// PCA-coefficient prior weight.
    pub rho: f64,
    pub transform_prior: TransformPriorParams,
    /// Membership tolerance: a continuous point belongs to a chain when a
    /// traced pixel lies within this distance.
    pub snap_tol: f64,
}

impl EnergyParams {
    pub fn validate(&self) -> Result<()> {
        if self.delta < 0.0 || self.rho < 0.0 || self.snap_tol < 0.0 {
            return Err(Error::InvalidInput("delta, rho, snap_tol must be >= 0".into()));
        }
        Ok(())
    }
}

/// Pixel-to-chain lookup built once per cloud: a dense array over the
/// traced pixels' bounding box (membership probes run in the parser's
/// innermost loop, so hashing is too slow).
#[derive(Clone, Debug, Default)]
pub struct PixelGrid {
    x0: i32,
    y0: i32,
    w: i32,
    h: i32,
    /// Row-major chain ids, `EMPTY_CELL` where no pixel was traced.
    cells: Vec<u32>,
}

const EMPTY_CELL: u32 = u32::MAX;

impl PixelGrid {
    pub fn from_chains(chains: &[Chain]) -> Self {
        let mut bounds: Option<(i32, i32, i32, i32)> = None;
        for c in chains {
            for &(x, y) in &c.pixels {
                bounds = Some(match bounds {
                    None => (x, y, x, y),
                    Some((a, b, c, d)) => (a.min(x), b.min(y), c.max(x), d.max(y)),
                });
            }
        }
        let Some((x0, y0, x1, y1)) = bounds else {
            return PixelGrid::default();
        };
        let (w, h) = (x1 - x0 + 1, y1 - y0 + 1);
        let mut cells = vec![EMPTY_CELL; (w as usize) * (h as usize)];
        for c in chains {
            for &(x, y) in &c.pixels {
                let cell = &mut cells[((y - y0) * w + (x - x0)) as usize];
                if *cell == EMPTY_CELL {
                    *cell = c.id;
                }
            }
        }
        PixelGrid { x0, y0, w, h, cells }
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    #[inline]
    fn at(&self, x: i32, y: i32) -> Option<u32> {
        if x < self.x0 || y < self.y0 || x >= self.x0 + self.w || y >= self.y0 + self.h {
            return None;
        }
        let id = self.cells[((y - self.y0) * self.w + (x - self.x0)) as usize];
        (id != EMPTY_CELL).then_some(id)
    }

    /// Chain id of the nearest traced pixel within `tol` of `pos`; ties by
    /// smaller chain id. Also returns the pixel's coordinates.
    pub fn nearest_within(&self, pos: Point2, tol: f64) -> Option<(u32, Point2)> {
        let x0 = ((pos.x - tol).floor() as i32).max(self.x0);
        let x1 = ((pos.x + tol).ceil() as i32).min(self.x0 + self.w - 1);
        let y0 = ((pos.y - tol).floor() as i32).max(self.y0);
        let y1 = ((pos.y + tol).ceil() as i32).min(self.y0 + self.h - 1);
        let mut best: Option<(f64, u32, Point2)> = None;
        for y in y0..=y1 {
            for x in x0..=x1 {
                if let Some(id) = self.at(x, y) {
                    let p = Point2::new(x as f64, y as f64);
                    let d = p.dist(&pos);
                    if d <= tol {
                        let better = match best {
                            None => true,
                            Some((bd, bid, _)) => d < bd - 1e-12 || ((d - bd).abs() <= 1e-12 && id < bid),
                        };
                        if better {
                            best = Some((d, id, p));
                        }
                    }
                }
            }
        }
        best.map(|(_, id, p)| (id, p))
    }
}

/// For each landmark and displacement label, the chain id the displaced
/// point snaps to (or none).
#[derive(Clone, Debug)]
pub struct ChainMembershipIndex {
    n: usize,
    l: usize,
    cells: Vec<Option<u32>>,
}

impl ChainMembershipIndex {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_labels(&self) -> usize {
        self.l
    }

    pub fn cell(&self, i: usize, l: usize) -> Option<u32> {
        self.cells[i * self.l + l]
    }
}

/// Evaluate chain membership of `S_i + n_i d(l)` for the whole label grid.
pub fn build_membership_index(
    grid: &PixelGrid,
    pca_shape: &LandmarkShape,
    normals: &[Point2],
    params: &EnergyParams,
) -> ChainMembershipIndex {
    let n = pca_shape.len();
    let l = params.deform.num_labels();
    debug_assert_eq!(normals.len(), n);
    let mut cells = vec![None; n * l];
    for i in 0..n {
        let s = pca_shape.point(i);
        let nv = normals[i];
        for label in 0..l {
            let d = params.deform.displacement(label);
            let pos = Point2::new(s.x + nv.x * d, s.y + nv.y * d);
            cells[i * l + label] = grid.nearest_within(pos, params.snap_tol).map(|(id, _)| id);
        }
    }
    ChainMembershipIndex { n, l, cells }
}

/// Data term: -delta per consecutive same-segment pair on the same chain.
pub fn energy_data(
    labels: &[usize],
    idx: &ChainMembershipIndex,
    delta: f64,
    segment_starts: &[usize],
) -> f64 {
    let mut e = 0.0;
    for i in 1..labels.len() {
        if segment_starts.contains(&i) {
            continue;
        }
        if let (Some(a), Some(b)) = (idx.cell(i - 1, labels[i - 1]), idx.cell(i, labels[i])) {
            if a == b {
                e -= delta;
            }
        }
    }
    e
}

/// Deformation term: sum alpha_i d_i^2 + sum gamma_i (d_i - d_{i-1})^2.
pub fn energy_deformation(labels: &[usize], params: &DeformationParams) -> f64 {
    let mut e = 0.0;
    let mut prev_d = 0.0;
    for (i, &l) in labels.iter().enumerate() {
        let d = params.displacement(l);
        e += params.alpha[i] * d * d;
        if i > 0 && params.gamma[i] > 0.0 {
            let dd = d - prev_d;
            e += params.gamma[i] * dd * dd;
        }
        prev_d = d;
    }
    e
}

/// Total parsing energy: data + deformation + PCA prior + transform prior.
pub fn energy_total(
    labels: &[usize],
    inst: &PcaInstance,
    model: &PcaShapeModel,
    idx: &ChainMembershipIndex,
    params: &EnergyParams,
) -> f64 {
    energy_data(labels, idx, params.delta, model.segment_starts())
        + energy_deformation(labels, &params.deform)
        + prior_beta(model, &inst.beta, params.rho)
        + prior_transform(&inst.a, &params.transform_prior)
}
