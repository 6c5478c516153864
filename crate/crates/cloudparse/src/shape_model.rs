//! PCA point-distribution model: Procrustes training, shape synthesis,
//! priors, generative sampling and the weighted least-squares fit.

use nalgebra::{DMatrix, DVector, Matrix4, Vector4};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::energy::DeformationParams;
use crate::error::{Error, Result};
use crate::geometry::{apply_transform, shape_normals, LandmarkShape, Point2, SimilarityTransform};

/// Trained point-distribution model.
///
/// The stacked 2N x p eigenvector matrix `[Px; Py]` has orthonormal columns;
/// eigenvalues are descending.
#[derive(Clone, Debug)]
pub struct PcaShapeModel {
    mu_x: DVector<f64>,
    mu_y: DVector<f64>,
    px: DMatrix<f64>,
    py: DMatrix<f64>,
    lambda: Vec<f64>,
    segment_starts: Vec<usize>,
}

/// A point in model space: pose plus PCA coefficients.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PcaInstance {
    pub a: SimilarityTransform,
    pub beta: Vec<f64>,
}

/// Bounds and center penalty for the transform prior.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TransformPriorParams {
    pub s_min: f64,
    pub s_max: f64,
    pub theta_max: f64,
    pub x_c: f64,
    pub y_c: f64,
    pub r: f64,
}

impl TransformPriorParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.s_min > 0.0 && self.s_min < self.s_max && self.theta_max > 0.0 && self.r >= 0.0) {
            return Err(Error::InvalidInput("invalid transform prior parameters".into()));
        }
        Ok(())
    }
}

impl PcaShapeModel {
    pub fn from_parts(
        mu_x: DVector<f64>,
        mu_y: DVector<f64>,
        px: DMatrix<f64>,
        py: DMatrix<f64>,
        lambda: Vec<f64>,
        segment_starts: Vec<usize>,
    ) -> Result<Self> {
        let n = mu_x.len();
        if mu_y.len() != n || px.nrows() != n || py.nrows() != n {
            return Err(Error::DimensionMismatch("model part sizes disagree".into()));
        }
        if px.ncols() != py.ncols() || px.ncols() != lambda.len() {
            return Err(Error::DimensionMismatch("component counts disagree".into()));
        }
        // validate segment structure via LandmarkShape
        let pts: Vec<Point2> = (0..n).map(|i| Point2::new(mu_x[i], mu_y[i])).collect();
        LandmarkShape::new(pts, segment_starts.clone())?;
        Ok(PcaShapeModel { mu_x, mu_y, px, py, lambda, segment_starts })
    }

    pub fn n(&self) -> usize {
        self.mu_x.len()
    }

    pub fn p(&self) -> usize {
        self.lambda.len()
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn mu_x(&self) -> &DVector<f64> {
        &self.mu_x
    }

    pub fn mu_y(&self) -> &DVector<f64> {
        &self.mu_y
    }

    pub fn px(&self) -> &DMatrix<f64> {
        &self.px
    }

    pub fn py(&self) -> &DMatrix<f64> {
        &self.py
    }

    pub fn segment_starts(&self) -> &[usize] {
        &self.segment_starts
    }

    pub fn mean_shape(&self) -> LandmarkShape {
        let pts: Vec<Point2> = (0..self.n())
            .map(|i| Point2::new(self.mu_x[i], self.mu_y[i]))
            .collect();
        LandmarkShape::new(pts, self.segment_starts.clone()).expect("mean shape valid")
    }

    /// Model restricted to its leading `p` components.
    pub fn truncated(&self, p: usize) -> Self {
        let p = p.min(self.p());
        PcaShapeModel {
            mu_x: self.mu_x.clone(),
            mu_y: self.mu_y.clone(),
            px: self.px.columns(0, p).into(),
            py: self.py.columns(0, p).into(),
            lambda: self.lambda[..p].to_vec(),
            segment_starts: self.segment_starts.clone(),
        }
    }
}

fn shape_to_vecs(s: &LandmarkShape) -> (DVector<f64>, DVector<f64>) {
    let n = s.len();
    let mut x = DVector::zeros(n);
    let mut y = DVector::zeros(n);
    for i in 0..n {
        x[i] = s.point(i).x;
        y[i] = s.point(i).y;
    }
    (x, y)
}

/// Solve the 4x4 weighted-alignment system for the similarity parameters
/// `(a, b, dx, dy)` mapping `(xs, ys)` onto `(xt, yt)` in the sense of
/// minimizing `sum_i w_i |A(xs_i, ys_i) - (xt_i, yt_i)|^2` with
/// `A(x, y) = (a x + b y + dx, -b x + a y + dy)`.
pub(crate) fn solve_weighted_alignment(
    xs: &DVector<f64>,
    ys: &DVector<f64>,
    xt: &DVector<f64>,
    yt: &DVector<f64>,
    w: &DVector<f64>,
) -> Result<(f64, f64, f64, f64)> {
    let n = xs.len();
    let mut z = 0.0;
    let (mut sx, mut sy, mut sw) = (0.0, 0.0, 0.0);
    let (mut c1, mut c2) = (0.0, 0.0);
    let (mut tx, mut ty) = (0.0, 0.0);
    for i in 0..n {
        let wi = w[i];
        z += wi * (xs[i] * xs[i] + ys[i] * ys[i]);
        sx += wi * xs[i];
        sy += wi * ys[i];
        sw += wi;
        c1 += wi * (xs[i] * xt[i] + ys[i] * yt[i]);
        c2 += wi * (ys[i] * xt[i] - xs[i] * yt[i]);
        tx += wi * xt[i];
        ty += wi * yt[i];
    }
    let m = Matrix4::new(
        z, 0.0, sx, sy, //
        0.0, z, sy, -sx, //
        sx, sy, sw, 0.0, //
        sy, -sx, 0.0, sw,
    );
    let rhs = Vector4::new(c1, c2, tx, ty);
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Degenerate("singular weighted-alignment system".into()))?;
    Ok((sol[0], sol[1], sol[2], sol[3]))
}

fn apply_params(a: f64, b: f64, dx: f64, dy: f64, x: f64, y: f64) -> (f64, f64) {
    (a * x + b * y + dx, -b * x + a * y + dy)
}

fn invert_params(a: f64, b: f64, dx: f64, dy: f64, x: f64, y: f64) -> (f64, f64) {
    let det = a * a + b * b;
    let xs = x - dx;
    let ys = y - dy;
    ((a * xs - b * ys) / det, (b * xs + a * ys) / det)
}

/// Train by generalized Procrustes alignment followed by PCA.
///
/// Returns the model plus the mean centroid size of the training shapes
/// (useful as the average scale for initialization).
pub fn train_pca(shapes: &[LandmarkShape], p: usize) -> Result<(PcaShapeModel, f64)> {
    if shapes.len() < 2 {
        return Err(Error::InvalidInput("need at least 2 training shapes".into()));
    }
    let n = shapes[0].len();
    let m = shapes.len();
    for s in shapes {
        if !s.same_structure(&shapes[0]) {
            return Err(Error::DimensionMismatch("inconsistent landmark structure".into()));
        }
    }
    if p + 1 > m {
        return Err(Error::InvalidInput(format!(
            "need >= p+1 = {} shapes for p = {p}, got {m}",
            p + 1
        )));
    }
    if p > 2 * n.min(m) {
        return Err(Error::InvalidInput("p too large for the data".into()));
    }

    let data: Vec<(DVector<f64>, DVector<f64>)> = shapes.iter().map(shape_to_vecs).collect();
    let avg_scale = data
        .iter()
        .map(|(x, y)| centroid_size(x, y))
        .sum::<f64>()
        / m as f64;

    // initial mean: first shape, centered and unit-size
    let (mut mean_x, mut mean_y) = data[0].clone();
    center_and_normalize(&mut mean_x, &mut mean_y);

    let uniform = DVector::from_element(n, 1.0 / n as f64);
    let mut aligned: Vec<(DVector<f64>, DVector<f64>)> = data.clone();
    for _ in 0..100 {
        for (k, (x, y)) in data.iter().enumerate() {
            let (a, b, dx, dy) = solve_weighted_alignment(x, y, &mean_x, &mean_y, &uniform)?;
            let mut ax = DVector::zeros(n);
            let mut ay = DVector::zeros(n);
            for i in 0..n {
                let (px, py) = apply_params(a, b, dx, dy, x[i], y[i]);
                ax[i] = px;
                ay[i] = py;
            }
            // tangent-space scaling: fix the component along the mean
            let dot = ax.dot(&mean_x) + ay.dot(&mean_y);
            let norm2 = mean_x.dot(&mean_x) + mean_y.dot(&mean_y);
            if dot.abs() > 1e-12 {
                let c = norm2 / dot;
                ax *= c;
                ay *= c;
            }
            aligned[k] = (ax, ay);
        }
        let mut new_x = DVector::zeros(n);
        let mut new_y = DVector::zeros(n);
        for (ax, ay) in &aligned {
            new_x += ax;
            new_y += ay;
        }
        new_x /= m as f64;
        new_y /= m as f64;
        center_and_normalize(&mut new_x, &mut new_y);
        let diff = (&new_x - &mean_x).amax().max((&new_y - &mean_y).amax());
        mean_x = new_x;
        mean_y = new_y;
        if diff < 1e-8 {
            break;
        }
    }

    // PCA around the arithmetic mean of the aligned shapes
    let mut mu = DVector::<f64>::zeros(2 * n);
    for (ax, ay) in &aligned {
        for i in 0..n {
            mu[i] += ax[i];
            mu[n + i] += ay[i];
        }
    }
    mu /= m as f64;
    let mut cov = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for (ax, ay) in &aligned {
        let mut d = DVector::<f64>::zeros(2 * n);
        for i in 0..n {
            d[i] = ax[i] - mu[i];
            d[n + i] = ay[i] - mu[n + i];
        }
        cov.syger(1.0 / (m as f64 - 1.0), &d, &d, 1.0);
    }
    // syger fills only the lower triangle; mirror it
    for r in 0..2 * n {
        for c in r + 1..2 * n {
            cov[(r, c)] = cov[(c, r)];
        }
    }
    let eig = cov.symmetric_eigen();
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());

    let mut px = DMatrix::<f64>::zeros(n, p);
    let mut py = DMatrix::<f64>::zeros(n, p);
    let mut lambda = Vec::with_capacity(p);
    for (c, &k) in order.iter().take(p).enumerate() {
        let v = eig.eigenvectors.column(k);
        // deterministic sign: largest-magnitude entry positive
        let mut mi = 0;
        for i in 0..2 * n {
            if v[i].abs() > v[mi].abs() {
                mi = i;
            }
        }
        let sign = if v[mi] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            px[(i, c)] = sign * v[i];
            py[(i, c)] = sign * v[n + i];
        }
        lambda.push(eig.eigenvalues[k].max(1e-300));
    }

    let mu_x = DVector::from_fn(n, |i, _| mu[i]);
    let mu_y = DVector::from_fn(n, |i, _| mu[n + i]);
    let model = PcaShapeModel::from_parts(
        mu_x,
        mu_y,
        px,
        py,
        lambda,
        shapes[0].segment_starts().to_vec(),
    )?;
    Ok((model, avg_scale))
}

fn centroid_size(x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let n = x.len() as f64;
    let cx = x.sum() / n;
    let cy = y.sum() / n;
    let mut s = 0.0;
    for i in 0..x.len() {
        s += (x[i] - cx).powi(2) + (y[i] - cy).powi(2);
    }
    s.sqrt()
}

fn center_and_normalize(x: &mut DVector<f64>, y: &mut DVector<f64>) {
    let n = x.len() as f64;
    let cx = x.sum() / n;
    let cy = y.sum() / n;
    x.add_scalar_mut(-cx);
    y.add_scalar_mut(-cy);
    let s = centroid_size(x, y);
    if s > 1e-12 {
        *x /= s;
        *y /= s;
    }
}

/// Evaluate `S(A, beta) = A(mu_x + Px beta, mu_y + Py beta)`.
pub fn synthesize(model: &PcaShapeModel, inst: &PcaInstance) -> Result<LandmarkShape> {
    if inst.beta.len() != model.p() {
        return Err(Error::DimensionMismatch(format!(
            "beta has {} entries, model has p = {}",
            inst.beta.len(),
            model.p()
        )));
    }
    let beta = DVector::from_column_slice(&inst.beta);
    let x = &model.mu_x + &model.px * &beta;
    let y = &model.mu_y + &model.py * &beta;
    let pts: Vec<Point2> = (0..model.n()).map(|i| Point2::new(x[i], y[i])).collect();
    let shape = LandmarkShape::new(pts, model.segment_starts.clone())?;
    Ok(apply_transform(&inst.a, &shape))
}

/// Gaussian prior on the PCA coefficients: `rho * sum beta_i^2 / lambda_i`.
pub fn prior_beta(model: &PcaShapeModel, beta: &[f64], rho: f64) -> f64 {
    beta.iter()
        .zip(model.lambda())
        .map(|(&b, &l)| b * b / l)
        .sum::<f64>()
        * rho
}

/// Transform prior: infinite outside the scale/rotation box, otherwise a
/// per-pixel penalty on the distance from the image center.
pub fn prior_transform(a: &SimilarityTransform, prm: &TransformPriorParams) -> f64 {
    if a.s < prm.s_min || a.s > prm.s_max || a.theta.abs() > prm.theta_max {
        f64::INFINITY
    } else {
        prm.r * (a.u - prm.x_c).abs() + prm.r * (a.v - prm.y_c).abs()
    }
}

/// Draw one standard normal via Box-Muller.
fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Assemble the tridiagonal quadratic-form matrix Q with
/// `d' Q d = sum alpha_i d_i^2 + sum gamma_i (d_i - d_{i-1})^2`.
pub fn deformation_precision(deform: &DeformationParams) -> DMatrix<f64> {
    let n = deform.n();
    let mut q = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        q[(i, i)] += deform.alpha[i];
        if i > 0 && deform.gamma[i] > 0.0 {
            q[(i, i)] += deform.gamma[i];
            q[(i - 1, i - 1)] += deform.gamma[i];
            q[(i, i - 1)] -= deform.gamma[i];
            q[(i - 1, i)] -= deform.gamma[i];
        }
    }
    q
}

/// Sample a deformation field from the Gaussian MRF with density
/// proportional to `exp(-d' Q d)`, i.e. covariance `(2Q)^{-1}`.
pub fn sample_deformation(deform: &DeformationParams, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let n = deform.n();
    let precision = deformation_precision(deform) * 2.0;
    let chol = precision
        .cholesky()
        .ok_or_else(|| Error::Degenerate("deformation precision not positive definite".into()))?;
    let z = DVector::from_fn(n, |_, _| standard_normal(rng));
    // precision = L L'; d = L^{-T} z has covariance (L L')^{-1}
    let l = chol.l();
    let d = l
        .tr_solve_lower_triangular(&z)
        .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
    Ok(d.as_slice().to_vec())
}

/// Draw `(beta, d)` from the generative shape model and return the PCA
/// instance together with the deformed contour `C_i = S_i + n_i d_i`.
pub fn sample_shape(
    model: &PcaShapeModel,
    a: &SimilarityTransform,
    deform: &DeformationParams,
    rho: f64,
    rng_seed: u64,
) -> Result<(PcaInstance, LandmarkShape)> {
    if rho <= 0.0 {
        return Err(Error::InvalidInput("rho must be positive for sampling".into()));
    }
    if deform.n() != model.n() {
        return Err(Error::DimensionMismatch("deformation size != model size".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let beta: Vec<f64> = model
        .lambda()
        .iter()
        .map(|&l| (l / (2.0 * rho)).sqrt() * standard_normal(&mut rng))
        .collect();
    let d = sample_deformation(deform, &mut rng)?;
    let inst = PcaInstance { a: *a, beta };
    let s = synthesize(model, &inst)?;
    let normals = shape_normals(&s)?;
    let pts: Vec<Point2> = (0..model.n())
        .map(|i| {
            let p = s.point(i);
            Point2::new(p.x + normals[i].x * d[i], p.y + normals[i].y * d[i])
        })
        .collect();
    let c = LandmarkShape::new(pts, model.segment_starts.clone())?;
    Ok((inst, c))
}

/// Weighted least-squares fit of `(A, beta)` to a target shape.
///
/// Alternates a weighted similarity alignment of the current synthesized
/// shape onto the target with a weighted re-projection of the PCA
/// coefficients; `p_use` limits how many leading components participate.
/// Zero-weight landmarks never influence the result.
pub fn fit_weighted_pca_with_p(
    model: &PcaShapeModel,
    target: &LandmarkShape,
    w: &[f64],
    n_it: usize,
    p_use: usize,
) -> Result<PcaInstance> {
    let n = model.n();
    if target.len() != n {
        return Err(Error::DimensionMismatch("target size != model size".into()));
    }
    if w.len() != n {
        return Err(Error::DimensionMismatch("weight size != model size".into()));
    }
    if w.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::InvalidInput("weights must be finite and >= 0".into()));
    }
    let wsum: f64 = w.iter().sum();
    if wsum <= 0.0 {
        return Err(Error::Degenerate("all-zero weight vector".into()));
    }
    let p_use = p_use.min(model.p());
    let w = DVector::from_fn(n, |i, _| w[i] / wsum);
    let w2 = DVector::from_fn(n, |i, _| w[i] * w[i]);

    let (x1, y1) = shape_to_vecs(target);

    // weighted Gram matrix over the active components (shared beta for x, y)
    let gram = if p_use > 0 {
        let mut g = DMatrix::<f64>::zeros(p_use, p_use);
        for r in 0..p_use {
            for c in 0..p_use {
                let mut acc = 0.0;
                for i in 0..n {
                    acc += w2[i]
                        * (model.px[(i, r)] * model.px[(i, c)] + model.py[(i, r)] * model.py[(i, c)]);
                }
                g[(r, c)] = acc;
            }
        }
        Some(g.lu())
    } else {
        None
    };
    if let Some(lu) = &gram {
        if lu.determinant().abs() < 1e-300 {
            return Err(Error::Degenerate("weights do not constrain the PCA components".into()));
        }
    }

    let mut beta = DVector::<f64>::zeros(p_use);
    let (mut a, mut b, mut dx, mut dy) = (1.0, 0.0, 0.0, 0.0);
    for _ in 0..n_it {
        let x2 = &model.mu_x + model.px.columns(0, p_use) * &beta;
        let y2 = &model.mu_y + model.py.columns(0, p_use) * &beta;
        let sol = solve_weighted_alignment(&x2, &y2, &x1, &y1, &w)?;
        a = sol.0;
        b = sol.1;
        dx = sol.2;
        dy = sol.3;
        if a * a + b * b < 1e-30 {
            return Err(Error::Degenerate("collapsed similarity fit".into()));
        }
        if let Some(lu) = &gram {
            let mut rhs = DVector::<f64>::zeros(p_use);
            for i in 0..n {
                let (xo, yo) = invert_params(a, b, dx, dy, x1[i], y1[i]);
                let rx = w2[i] * (xo - model.mu_x[i]);
                let ry = w2[i] * (yo - model.mu_y[i]);
                for c in 0..p_use {
                    rhs[c] += model.px[(i, c)] * rx + model.py[(i, c)] * ry;
                }
            }
            beta = lu
                .solve(&rhs)
                .ok_or_else(|| Error::Degenerate("singular coefficient projection".into()))?;
        }
    }
    let s = (a * a + b * b).sqrt();
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::Degenerate("non-positive fitted scale".into()));
    }
    let theta = b.atan2(a);
    let mut full_beta = vec![0.0; model.p()];
    for i in 0..p_use {
        full_beta[i] = beta[i];
    }
    Ok(PcaInstance { a: SimilarityTransform::new(dx, dy, s, theta)?, beta: full_beta })
}

/// Weighted fit with all model components.
pub fn fit_weighted_pca(
    model: &PcaShapeModel,
    target: &LandmarkShape,
    w: &[f64],
    n_it: usize,
) -> Result<PcaInstance> {
    fit_weighted_pca_with_p(model, target, w, n_it, model.p())
}

#[cfg(test)]
pub(crate) mod test_fixtures {
    use super::*;

    /// Small hand-built 2-component model on 8 landmarks (single segment).
    /// Modes are orthogonal to the similarity tangent space at the mean.
    pub fn tiny_model() -> (PcaShapeModel, Vec<LandmarkShape>) {
        planted_model(8, 2, 42)
    }

    /// Construct a synthetic linear model with orthonormal stacked modes
    /// orthogonal to {mean, rot(mean), 1_x, 1_y}, then return it plus
    /// training shapes generated from it under random similarity poses.
    pub fn planted_model(n: usize, p: usize, seed: u64) -> (PcaShapeModel, Vec<LandmarkShape>) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // centered, unit-size mean on a circle-ish base
        let mut mu_x = DVector::from_fn(n, |i, _| {
            (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos()
        });
        let mut mu_y = DVector::from_fn(n, |i, _| {
            (2.0 * std::f64::consts::PI * i as f64 / n as f64).sin()
        });
        center_and_normalize(&mut mu_x, &mut mu_y);

        // basis to orthogonalize against (stacked 2n vectors)
        let stack = |x: &DVector<f64>, y: &DVector<f64>| {
            let mut v = DVector::<f64>::zeros(2 * n);
            for i in 0..n {
                v[i] = x[i];
                v[n + i] = y[i];
            }
            v
        };
        let mut protected = vec![
            stack(&mu_x, &mu_y),
            stack(&mu_y, &(-mu_x.clone())),
            stack(&DVector::from_element(n, 1.0), &DVector::zeros(n)),
            stack(&DVector::zeros(n), &DVector::from_element(n, 1.0)),
        ];
        for v in &mut protected {
            let norm = v.norm();
            *v /= norm;
        }
        let mut modes: Vec<DVector<f64>> = Vec::new();
        while modes.len() < p {
            let mut v = DVector::from_fn(2 * n, |_, _| rng.gen::<f64>() - 0.5);
            for b in protected.iter().chain(modes.iter()) {
                let d = v.dot(b);
                v -= b * d;
            }
            let norm = v.norm();
            if norm > 1e-6 {
                v /= norm;
                modes.push(v);
            }
        }
        let mut px = DMatrix::<f64>::zeros(n, p);
        let mut py = DMatrix::<f64>::zeros(n, p);
        for (c, v) in modes.iter().enumerate() {
            for i in 0..n {
                px[(i, c)] = v[i];
                py[(i, c)] = v[n + i];
            }
        }
        // modest amplitudes: Procrustes alignment is only linear in the
        // modes to first order, so reconstruction error grows cubically
        let lambda: Vec<f64> = (0..p).map(|i| 0.002 / (i as f64 + 1.0)).collect();
        let model = PcaShapeModel::from_parts(
            mu_x.clone(),
            mu_y.clone(),
            px.clone(),
            py.clone(),
            lambda.clone(),
            vec![0],
        )
        .unwrap();

        let mut shapes = Vec::new();
        for _ in 0..20 {
            let beta: Vec<f64> = lambda
                .iter()
                .map(|&l| (rng.gen::<f64>() - 0.5) * 2.0 * l.sqrt())
                .collect();
            let a = SimilarityTransform::new(
                rng.gen_range(-20.0..20.0),
                rng.gen_range(-20.0..20.0),
                rng.gen_range(0.5..2.0),
                rng.gen_range(-0.5..0.5),
            )
            .unwrap();
            shapes.push(synthesize(&model, &PcaInstance { a, beta }).unwrap());
        }
        (model, shapes)
    }
}
