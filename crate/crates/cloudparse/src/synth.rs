//! Synthetic benchmark: sample shapes from a trained model, rasterize them
//! into point clouds, degrade with dropout and clutter.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::energy::DeformationParams;
use crate::error::{Error, Result};
use crate::geometry::{LandmarkShape, Point2, SimilarityTransform};
use crate::preprocess::{Pixel, PointCloud};
use crate::shape_model::{sample_shape, train_pca, PcaInstance, PcaShapeModel};

/// Synthetic suite configuration.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_images: usize,
    pub width: i32,
    pub height: i32,
    /// Fraction of shape pixels removed in contiguous runs.
    pub dropout: f64,
    pub clutter_chains: usize,
    /// Pixel-length range of clutter chains.
    pub clutter_len: (f64, f64),
    pub seed: u64,
    /// Target RMS point radius of the drawn shape, pixels (the model's own
    /// mean is unit-centroid-size, so the pose scale is derived from this).
    pub scale: f64,
    /// Uniform pose jitter: +-fraction of scale, +-pixels, +-radians.
    pub scale_jitter: f64,
    pub center_jitter: f64,
    pub theta_jitter: f64,
    /// Generative parameters.
    pub rho: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub d_max: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_images: 50,
            width: 256,
            height: 256,
            dropout: 0.2,
            clutter_chains: 10,
            clutter_len: (30.0, 80.0),
            seed: 7,
            scale: 70.0,
            scale_jitter: 0.15,
            center_jitter: 25.0,
            theta_jitter: 0.3,
            rho: 2.0,
            alpha: 0.04,
            gamma: 0.1,
            d_max: 15.0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::InvalidInput("dropout must be in [0,1)".into()));
        }
        if self.width <= 0 || self.height <= 0 || self.scale <= 0.0 {
            return Err(Error::InvalidInput("invalid synthetic geometry".into()));
        }
        if self.clutter_len.0 <= 0.0 || self.clutter_len.0 > self.clutter_len.1 {
            return Err(Error::InvalidInput("invalid clutter length range".into()));
        }
        Ok(())
    }
}

/// One generated benchmark image.
#[derive(Clone, Debug)]
pub struct SyntheticImage {
    pub cloud: PointCloud,
    /// Deformed ground-truth contour (what the parser should recover).
    pub truth: LandmarkShape,
    /// Backbone instance the contour was sampled around.
    pub inst: PcaInstance,
    pub seed: u64,
}

/// RMS distance of the model's mean-shape points from their centroid.
pub fn mean_rms_radius(model: &PcaShapeModel) -> f64 {
    let m = model.mean_shape();
    let n = m.len() as f64;
    let (cx, cy) = m
        .points()
        .iter()
        .fold((0.0, 0.0), |(x, y), p| (x + p.x / n, y + p.y / n));
    (m.points()
        .iter()
        .map(|p| (p.x - cx).powi(2) + (p.y - cy).powi(2))
        .sum::<f64>()
        / n)
        .sqrt()
}

/// 8-connected Bresenham line, endpoints included.
pub fn raster_line(a: Pixel, b: Pixel) -> Vec<Pixel> {
    let (mut x0, mut y0) = a;
    let (x1, y1) = b;
    let dx = (x1 - x0).abs();
    let dy = -(y1 - y0).abs();
    let sx = if x0 < x1 { 1 } else { -1 };
    let sy = if y0 < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    let mut out = Vec::with_capacity((dx - dy) as usize + 1);
    loop {
        out.push((x0, y0));
        if x0 == x1 && y0 == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x0 += sx;
        }
        if e2 <= dx {
            err += dx;
            y0 += sy;
        }
    }
    out
}

/// Rasterize each segment's polyline into an ordered pixel run.
pub fn rasterize_shape(shape: &LandmarkShape) -> Vec<Vec<Pixel>> {
    let pts = shape.points();
    let round = |p: &Point2| (p.x.round() as i32, p.y.round() as i32);
    shape
        .segments()
        .into_iter()
        .map(|range| {
            let mut run: Vec<Pixel> = Vec::new();
            for i in range.start..range.end - 1 {
                for px in raster_line(round(&pts[i]), round(&pts[i + 1])) {
                    if run.last() != Some(&px) {
                        run.push(px);
                    }
                }
            }
            let mut seen = std::collections::HashSet::new();
            run.retain(|p| seen.insert(*p));
            run
        })
        .collect()
}

/// Remove about `fraction` of the pixels in contiguous runs of 6-12 px.
pub fn apply_dropout(run: &[Pixel], fraction: f64, rng: &mut ChaCha8Rng) -> Vec<Pixel> {
    if fraction <= 0.0 || run.len() < 2 {
        return run.to_vec();
    }
    let target = (run.len() as f64 * fraction).round() as usize;
    let mut drop = vec![false; run.len()];
    let mut dropped = 0usize;
    let mut guard = 0;
    while dropped < target && guard < 10_000 {
        guard += 1;
        let len = rng.gen_range(6..=12).min(target - dropped + 3);
        let start = rng.gen_range(0..run.len());
        for i in start..(start + len).min(run.len()) {
            if !drop[i] {
                drop[i] = true;
                dropped += 1;
            }
        }
    }
    run.iter().zip(&drop).filter(|(_, &d)| !d).map(|(p, _)| *p).collect()
}

/// A smooth random-walk clutter chain: unit steps with slowly drifting
/// heading, rounded and deduplicated.
pub fn clutter_chain(
    width: i32,
    height: i32,
    len_range: (f64, f64),
    rng: &mut ChaCha8Rng,
) -> Vec<Pixel> {
    let len = rng.gen_range(len_range.0..=len_range.1);
    let mut x = rng.gen_range(0.1 * width as f64..0.9 * width as f64);
    let mut y = rng.gen_range(0.1 * height as f64..0.9 * height as f64);
    let mut heading = rng.gen_range(0.0..std::f64::consts::TAU);
    let mut curvature = rng.gen_range(-0.05..0.05);
    let mut out: Vec<Pixel> = Vec::new();
    let mut acc = 0.0;
    while acc < len {
        let px = (x.round() as i32, y.round() as i32);
        if px.0 >= 0 && px.1 >= 0 && px.0 < width && px.1 < height && out.last() != Some(&px) {
            out.push(px);
        }
        heading += curvature;
        curvature += rng.gen_range(-0.01..0.01);
        curvature = curvature.clamp(-0.08, 0.08);
        x += heading.cos();
        y += heading.sin();
        acc += 1.0;
    }
    let mut seen = std::collections::HashSet::new();
    out.retain(|p| seen.insert(*p));
    out
}

/// Generate the full synthetic suite deterministically from the spec seed.
pub fn generate_suite(model: &PcaShapeModel, spec: &SyntheticSpec) -> Result<Vec<SyntheticImage>> {
    spec.validate()?;
    let deform = DeformationParams::uniform(
        model.n(),
        spec.alpha,
        spec.gamma,
        spec.d_max,
        1.0,
        model.segment_starts(),
    )?;
    let base_scale = spec.scale / mean_rms_radius(model);
    let mut out = Vec::with_capacity(spec.n_images);
    for img in 0..spec.n_images {
        let img_seed = spec.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(img as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(img_seed);
        let a = SimilarityTransform::new(
            spec.width as f64 / 2.0 + rng.gen_range(-spec.center_jitter..=spec.center_jitter),
            spec.height as f64 / 2.0 + rng.gen_range(-spec.center_jitter..=spec.center_jitter),
            base_scale * (1.0 + rng.gen_range(-spec.scale_jitter..=spec.scale_jitter)),
            rng.gen_range(-spec.theta_jitter..=spec.theta_jitter),
        )?;
        let (inst, truth) = sample_shape(model, &a, &deform, spec.rho, img_seed ^ 0x5bd1)?;
        let mut pixels: Vec<Pixel> = Vec::new();
        for run in rasterize_shape(&truth) {
            pixels.extend(apply_dropout(&run, spec.dropout, &mut rng));
        }
        for _ in 0..spec.clutter_chains {
            pixels.extend(clutter_chain(spec.width, spec.height, spec.clutter_len, &mut rng));
        }
        pixels.retain(|&(x, y)| x >= 0 && y >= 0 && x < spec.width && y < spec.height);
        let cloud = PointCloud::new(spec.width, spec.height, pixels)?;
        out.push(SyntheticImage { cloud, truth, inst, seed: img_seed });
    }
    Ok(out)
}

/// Blob-like training shapes: a unit circle modulated by low-order
/// harmonics with per-shape random amplitudes, under random poses.
pub fn demo_training_shapes(n: usize, count: usize, seed: u64) -> Vec<LandmarkShape> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut shapes = Vec::with_capacity(count);
    for _ in 0..count {
        // fixed asymmetric base profile so orientation is identifiable,
        // plus low-amplitude random harmonics as the learnable variation
        let a4 = rng.gen_range(-0.06..0.06);
        let a5 = rng.gen_range(-0.05..0.05);
        let a6 = rng.gen_range(-0.05..0.05);
        let a7 = rng.gen_range(-0.04..0.04);
        let s = rng.gen_range(0.8..1.3);
        let th: f64 = rng.gen_range(-0.3..0.3);
        let (u, v) = (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        let pts: Vec<Point2> = (0..n)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / n as f64;
                let r = 1.0 + 0.25 * (2.0 * t).cos() + 0.12 * (3.0 * t).sin()
                    + a4 * (4.0 * t + 0.5).cos()
                    + a5 * (5.0 * t).sin()
                    + a6 * (6.0 * t).cos()
                    + a7 * (7.0 * t + 1.1).sin();
                let (x, y) = (r * t.cos(), r * t.sin());
                Point2::new(
                    s * (x * th.cos() + y * th.sin()) + u,
                    s * (-x * th.sin() + y * th.cos()) + v,
                )
            })
            .collect();
        shapes.push(LandmarkShape::new(pts, vec![0]).unwrap());
    }
    shapes
}

/// Train the bundled demo model used by the synthetic benchmark.
pub fn demo_model(n: usize, p: usize, seed: u64) -> Result<(PcaShapeModel, f64)> {
    let shapes = demo_training_shapes(n, (2 * p + 16).max(20), seed);
    train_pca(&shapes, p)
}
