//! Point-cloud preprocessing: 8-connected chain tracing, subsampling and
//! cubic contour-fragment fitting.

use std::collections::HashSet;

use nalgebra::{Matrix4, Vector4};

use crate::error::{Error, Result};
use crate::geometry::Point2;

pub type Pixel = (i32, i32);

/// Binary point cloud on an integer pixel grid.
#[derive(Clone, Debug)]
pub struct PointCloud {
    width: i32,
    height: i32,
    /// Row-major sorted, deduplicated.
    points: Vec<Pixel>,
    set: HashSet<Pixel>,
}

impl PointCloud {
    pub fn new(width: i32, height: i32, points: Vec<Pixel>) -> Result<Self> {
        if width <= 0 || height <= 0 {
            return Err(Error::InvalidInput("cloud dimensions must be positive".into()));
        }
        let mut pts: Vec<Pixel> = points;
        for &(x, y) in &pts {
            if x < 0 || y < 0 || x >= width || y >= height {
                return Err(Error::InvalidInput(format!(
                    "point ({x},{y}) outside {width}x{height}"
                )));
            }
        }
        pts.sort_by_key(|&(x, y)| (y, x));
        pts.dedup();
        let set = pts.iter().copied().collect();
        Ok(PointCloud { width, height, points: pts, set })
    }

    pub fn width(&self) -> i32 {
        self.width
    }

    pub fn height(&self) -> i32 {
        self.height
    }

    /// Points in row-major order.
    pub fn points(&self) -> &[Pixel] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: Pixel) -> bool {
        self.set.contains(&p)
    }

    fn neighbors(&self, (x, y): Pixel) -> Vec<Pixel> {
        // row-major order over the 8-neighborhood
        let mut out = Vec::with_capacity(8);
        for dy in -1..=1 {
            for dx in -1..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let q = (x + dx, y + dy);
                if self.set.contains(&q) {
                    out.push(q);
                }
            }
        }
        out
    }

    /// Neighbors reachable without cutting corners: a diagonal step is
    /// dropped when one of its two common 4-neighbors is a set pixel (the
    /// direct path through that pixel is preferred). This keeps staircase
    /// rasterizations from looking like junction clusters.
    fn trace_neighbors(&self, (x, y): Pixel) -> Vec<Pixel> {
        self.neighbors((x, y))
            .into_iter()
            .filter(|&(qx, qy)| {
                let dx = qx - x;
                let dy = qy - y;
                if dx == 0 || dy == 0 {
                    return true;
                }
                !self.set.contains(&(x + dx, y)) && !self.set.contains(&(x, y + dy))
            })
            .collect()
    }
}

/// Maximal traced pixel run; consecutive pixels are 8-neighbors.
#[derive(Clone, Debug)]
pub struct Chain {
    pub id: u32,
    pub pixels: Vec<Pixel>,
    /// Indices into `pixels` of the subsampled anchor points.
    pub subsample_indices: Vec<usize>,
}

impl Chain {
    /// Cumulative arc length at every pixel (Euclidean between neighbors).
    pub fn arc_lengths(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.pixels.len());
        out.push(0.0);
        for w in self.pixels.windows(2) {
            let (x0, y0) = w[0];
            let (x1, y1) = w[1];
            acc += ((x1 - x0) as f64).hypot((y1 - y0) as f64);
            out.push(acc);
        }
        out
    }
}

/// Trace the cloud into chains.
///
/// Tracing starts at endpoint pixels in row-major order; remaining pixels
/// (closed loops) are traced from their row-major-first pixel. A pixel with
/// >= 3 corner-cut-reduced neighbors (junction) ends the chain that reaches
/// it first and belongs to that chain only.
pub fn trace_chains(cloud: &PointCloud) -> Vec<Chain> {
    let is_junction = |p: Pixel| cloud.trace_neighbors(p).len() >= 3;
    let mut visited: HashSet<Pixel> = HashSet::with_capacity(cloud.len());
    let mut chains: Vec<Chain> = Vec::new();
    let mut next_id = 0u32;

    // walk over non-junction pixels only; junctions are attached afterwards
    let walk = |start: Pixel, visited: &mut HashSet<Pixel>| -> Vec<Pixel> {
        let mut pixels = vec![start];
        visited.insert(start);
        let mut cur = start;
        loop {
            let next = cloud
                .trace_neighbors(cur)
                .into_iter()
                .filter(|&q| !visited.contains(&q) && !is_junction(q))
                .min_by_key(|&(x, y)| (y, x));
            match next {
                Some(q) => {
                    visited.insert(q);
                    pixels.push(q);
                    cur = q;
                }
                None => break,
            }
        }
        pixels
    };

    // open runs first, started from their endpoint pixels
    for &p in cloud.points() {
        if visited.contains(&p) || is_junction(p) {
            continue;
        }
        let walk_degree = cloud
            .trace_neighbors(p)
            .into_iter()
            .filter(|&q| !is_junction(q))
            .count();
        if walk_degree <= 1 {
            let pixels = walk(p, &mut visited);
            chains.push(Chain { id: next_id, pixels, subsample_indices: Vec::new() });
            next_id += 1;
        }
    }
    // remaining closed loops, cut at their row-major-first pixel
    for &p in cloud.points() {
        if !visited.contains(&p) && !is_junction(p) {
            let pixels = walk(p, &mut visited);
            chains.push(Chain { id: next_id, pixels, subsample_indices: Vec::new() });
            next_id += 1;
        }
    }
    // a junction ends the chain that reaches it and belongs to it alone;
    // unreachable junctions (clusters) become their own chains
    for &p in cloud.points() {
        if visited.contains(&p) {
            continue;
        }
        debug_assert!(is_junction(p));
        let mut attached = false;
        for chain in chains.iter_mut() {
            let last = *chain.pixels.last().unwrap();
            if cloud.trace_neighbors(p).contains(&last) {
                chain.pixels.push(p);
                visited.insert(p);
                attached = true;
                break;
            }
            let first = chain.pixels[0];
            if cloud.trace_neighbors(p).contains(&first) {
                chain.pixels.insert(0, p);
                visited.insert(p);
                attached = true;
                break;
            }
        }
        if !attached {
            // walk the junction cluster itself
            let mut pixels = vec![p];
            visited.insert(p);
            let mut cur = p;
            while let Some(q) = cloud
                .trace_neighbors(cur)
                .into_iter()
                .filter(|q| !visited.contains(q))
                .min_by_key(|&(x, y)| (y, x))
            {
                visited.insert(q);
                pixels.push(q);
                cur = q;
            }
            chains.push(Chain { id: next_id, pixels, subsample_indices: Vec::new() });
            next_id += 1;
        }
    }
    chains
}

/// Fill `subsample_indices` with anchors spaced `step` apart in arc length.
/// First and last pixel are always anchors.
pub fn subsample_chain(chain: &Chain, step: f64) -> Result<Chain> {
    if step < 2.0 {
        return Err(Error::InvalidInput(format!("subsample step must be >= 2, got {step}")));
    }
    let arcs = chain.arc_lengths();
    let mut idx = vec![0usize];
    let mut last_arc = 0.0;
    for (i, &a) in arcs.iter().enumerate().skip(1) {
        if a - last_arc >= step {
            idx.push(i);
            last_arc = a;
        }
    }
    let last = chain.pixels.len() - 1;
    if *idx.last().unwrap() != last {
        idx.push(last);
    }
    Ok(Chain { id: chain.id, pixels: chain.pixels.clone(), subsample_indices: idx })
}

/// Cubic polynomial fit over a chain subrange, expressed in a coordinate
/// frame whose x-axis joins the two anchor endpoints.
#[derive(Clone, Debug)]
pub struct ContourFragment {
    pub chain_id: u32,
    /// Pixel indices into the chain of the two anchors, start < end.
    pub start_idx: usize,
    pub end_idx: usize,
    /// y = c0 + c1 x + c2 x^2 + c3 x^3 in the endpoint frame.
    pub coeffs: [f64; 4],
    /// Arc length of the underlying chain run.
    pub length: f64,
    pub endpoints: [Point2; 2],
}

impl ContourFragment {
    fn frame(&self) -> (Point2, Point2, Point2, f64) {
        let p0 = self.endpoints[0];
        let p1 = self.endpoints[1];
        let dist = p0.dist(&p1);
        let ex = p1.sub(&p0).scaled(1.0 / dist);
        let ey = ex.perp_ccw();
        (p0, ex, ey, dist)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let [c0, c1, c2, c3] = self.coeffs;
        c0 + x * (c1 + x * (c2 + x * c3))
    }

    /// World-space point at frame coordinate x.
    pub fn point_at(&self, x: f64) -> Point2 {
        let (p0, ex, ey, _) = self.frame();
        let y = self.eval(x);
        Point2::new(p0.x + ex.x * x + ey.x * y, p0.y + ex.y * x + ey.y * y)
    }

    /// `k` points at equal arc-length spacing along the fitted cubic,
    /// endpoints included.
    pub fn sample_points(&self, k: usize) -> Vec<Point2> {
        assert!(k >= 2);
        let (_, _, _, dist) = self.frame();
        let m = 256usize;
        let mut xs = Vec::with_capacity(m + 1);
        let mut arcs = Vec::with_capacity(m + 1);
        let mut acc = 0.0;
        let mut prev = Point2::new(0.0, self.eval(0.0));
        xs.push(0.0);
        arcs.push(0.0);
        for i in 1..=m {
            let x = dist * i as f64 / m as f64;
            let p = Point2::new(x, self.eval(x));
            acc += p.dist(&prev);
            prev = p;
            xs.push(x);
            arcs.push(acc);
        }
        let total = acc;
        let mut out = Vec::with_capacity(k);
        let mut j = 0usize;
        for i in 0..k {
            let target = total * i as f64 / (k - 1) as f64;
            while j + 1 < arcs.len() && arcs[j + 1] < target {
                j += 1;
            }
            let x = if j + 1 >= arcs.len() || arcs[j + 1] <= arcs[j] {
                xs[j]
            } else {
                let t = (target - arcs[j]) / (arcs[j + 1] - arcs[j]);
                xs[j] + t * (xs[j + 1] - xs[j])
            };
            out.push(self.point_at(x));
        }
        out
    }
}

/// Fragment extraction parameters.
#[derive(Clone, Copy, Debug)]
pub struct FragmentParams {
    pub l_min: f64,
    pub l_max: f64,
    pub e_max: f64,
}

impl Default for FragmentParams {
    fn default() -> Self {
        FragmentParams { l_min: 20.0, l_max: 60.0, e_max: 1.5 }
    }
}

struct Candidate {
    frag: ContourFragment,
}

/// Fit cubic fragments between anchor pairs whose arc length lies in
/// `[l_min, l_max]`, keep those with max orthogonal residual <= `e_max`,
/// then drop fragments whose pixel range is a strict subset of another
/// kept fragment's range on the same chain.
pub fn extract_fragments(chains: &[Chain], params: &FragmentParams) -> Result<Vec<ContourFragment>> {
    if params.l_min >= params.l_max {
        return Err(Error::InvalidInput("l_min must be < l_max".into()));
    }
    if params.e_max <= 0.0 {
        return Err(Error::InvalidInput("e_max must be positive".into()));
    }
    let mut out: Vec<ContourFragment> = Vec::new();
    for chain in chains {
        let arcs = chain.arc_lengths();
        let anchors = &chain.subsample_indices;
        let mut kept: Vec<Candidate> = Vec::new();
        for (ai, &ia) in anchors.iter().enumerate() {
            for &ib in anchors.iter().skip(ai + 1) {
                let len = arcs[ib] - arcs[ia];
                if len < params.l_min {
                    continue;
                }
                if len > params.l_max {
                    break;
                }
                if let Some(frag) = fit_fragment(chain, ia, ib, len, params.e_max) {
                    kept.push(Candidate { frag });
                }
            }
        }
        // partial-order pruning: remove strict-subset pixel ranges
        for i in 0..kept.len() {
            let a = &kept[i].frag;
            let subsumed = kept.iter().enumerate().any(|(j, c)| {
                if i == j {
                    return false;
                }
                let b = &c.frag;
                b.start_idx <= a.start_idx
                    && a.end_idx <= b.end_idx
                    && (b.start_idx, b.end_idx) != (a.start_idx, a.end_idx)
            });
            if !subsumed {
                out.push(kept[i].frag.clone());
            }
        }
    }
    out.sort_by(|a, b| {
        (a.chain_id, a.start_idx, a.end_idx).cmp(&(b.chain_id, b.start_idx, b.end_idx))
    });
    Ok(out)
}

fn fit_fragment(
    chain: &Chain,
    ia: usize,
    ib: usize,
    length: f64,
    e_max: f64,
) -> Option<ContourFragment> {
    let to_pt = |p: Pixel| Point2::new(p.0 as f64, p.1 as f64);
    let p0 = to_pt(chain.pixels[ia]);
    let p1 = to_pt(chain.pixels[ib]);
    let dist = p0.dist(&p1);
    if dist < 1e-9 {
        return None;
    }
    let ex = p1.sub(&p0).scaled(1.0 / dist);
    let ey = ex.perp_ccw();

    let mut xs = Vec::with_capacity(ib - ia + 1);
    let mut ys = Vec::with_capacity(ib - ia + 1);
    for idx in ia..=ib {
        let d = to_pt(chain.pixels[idx]).sub(&p0);
        let x = d.dot(&ex);
        let y = d.dot(&ey);
        // near-functional runs only: frame-x must stay within the endpoint span
        if x < -2.0 || x > dist + 2.0 {
            return None;
        }
        xs.push(x);
        ys.push(y);
    }

    // least-squares cubic via 4x4 normal equations
    let mut m = Matrix4::<f64>::zeros();
    let mut rhs = Vector4::<f64>::zeros();
    for (&x, &y) in xs.iter().zip(&ys) {
        let b = [1.0, x, x * x, x * x * x];
        for r in 0..4 {
            for c in 0..4 {
                m[(r, c)] += b[r] * b[c];
            }
            rhs[r] += b[r] * y;
        }
    }
    let sol = m.lu().solve(&rhs)?;
    let frag = ContourFragment {
        chain_id: chain.id,
        start_idx: ia,
        end_idx: ib,
        coeffs: [sol[0], sol[1], sol[2], sol[3]],
        length,
        endpoints: [p0, p1],
    };
    let max_resid = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| (frag.eval(x) - y).abs())
        .fold(0.0f64, f64::max);
    if max_resid <= e_max {
        Some(frag)
    } else {
        None
    }
}

/// Max residual of a fragment re-measured over its covered chain pixels.
/// Test oracle; independent of the fit path.
pub fn measure_fragment_residual(frag: &ContourFragment, chain: &Chain) -> f64 {
    let to_pt = |p: Pixel| Point2::new(p.0 as f64, p.1 as f64);
    let p0 = frag.endpoints[0];
    let p1 = frag.endpoints[1];
    let dist = p0.dist(&p1);
    let ex = p1.sub(&p0).scaled(1.0 / dist);
    let ey = ex.perp_ccw();
    let mut worst = 0.0f64;
    for idx in frag.start_idx..=frag.end_idx {
        let d = to_pt(chain.pixels[idx]).sub(&p0);
        let x = d.dot(&ex);
        let y = d.dot(&ey);
        worst = worst.max((frag.eval(x) - y).abs());
    }
    worst
}
