//! Data-driven candidate hypotheses: single-fragment matches, two-fragment
//! refinements, and the fragment-length -> landmark-count interval table.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{avg_point_error, LandmarkShape, Point2};
use crate::preprocess::ContourFragment;
use crate::shape_model::{
    fit_weighted_pca_with_p, prior_transform, synthesize, PcaInstance, PcaShapeModel,
    TransformPriorParams,
};

/// One fragment-to-landmark-range match with its fitted backbone.
#[derive(Clone, Debug, Serialize)]
pub struct MatchRecord {
    pub inst: PcaInstance,
    pub fragment_id: usize,
    /// First matched landmark index (0-based).
    pub b: usize,
    /// Matched landmark count.
    pub k: usize,
    /// Mean residual over the matched landmarks, pixels.
    pub fit_error: f64,
    /// Fragment traversed end-to-start when matching.
    pub reversed: bool,
}

/// Landmark-count intervals per 5-px fragment-length bin.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LengthIntervalTable {
    pub l_min: f64,
    pub l_max: f64,
    pub bin_width: f64,
    /// Inclusive [lo, hi] per bin.
    pub bins: Vec<(usize, usize)>,
}

impl LengthIntervalTable {
    /// Interval for a fragment of length `l` (clamped into range).
    pub fn lookup(&self, l: f64) -> (usize, usize) {
        let rel = ((l - self.l_min) / self.bin_width).floor();
        let i = (rel.max(0.0) as usize).min(self.bins.len() - 1);
        self.bins[i]
    }
}

/// Candidate-generation configuration.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CgParams {
    pub n_cand1: usize,
    pub n_cand2: usize,
    pub d_nms1: f64,
    pub d_nms2: f64,
    pub d_gate: f64,
    pub fit_discard: f64,
    pub p_cg1: usize,
    pub p_cg2: usize,
    pub n_it: usize,
    /// Optional pose gate: fits whose transform the prior rejects outright
    /// (out-of-range scale or rotation) are dropped before suppression so
    /// they cannot crowd hypotheses that can actually win.
    #[serde(default)]
    pub transform_gate: Option<TransformPriorParams>,
}

impl Default for CgParams {
    fn default() -> Self {
        CgParams {
            n_cand1: 200,
            n_cand2: 400,
            d_nms1: 5.0,
            d_nms2: 8.0,
            d_gate: 20.0,
            fit_discard: 3.0,
            p_cg1: 4,
            p_cg2: 8,
            n_it: 10,
            transform_gate: None,
        }
    }
}

impl CgParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_cand1 == 0
            || self.n_cand2 == 0
            || self.d_nms1 <= 0.0
            || self.d_nms2 <= 0.0
            || self.d_gate <= 0.0
            || self.fit_discard <= 0.0
            || self.n_it == 0
        {
            return Err(Error::InvalidInput("invalid candidate-generation parameters".into()));
        }
        Ok(())
    }
}

/// Build the interval table from annotated boundaries: every contiguous
/// landmark sub-arc whose polyline length falls in a bin contributes its
/// landmark count; intervals get +-1 slack, empty bins are interpolated,
/// and the upper bound is forced non-decreasing.
pub fn learn_length_intervals(
    annotations: &[LandmarkShape],
    l_min: f64,
    l_max: f64,
    bin_width: f64,
) -> Result<LengthIntervalTable> {
    if annotations.is_empty() {
        return Err(Error::InvalidInput("need at least one annotation".into()));
    }
    if !(l_min > 0.0 && l_min < l_max && bin_width > 0.0) {
        return Err(Error::InvalidInput("invalid interval-table bounds".into()));
    }
    let num_bins = ((l_max - l_min) / bin_width).ceil() as usize;
    let mut lo = vec![usize::MAX; num_bins];
    let mut hi = vec![0usize; num_bins];
    let n = annotations[0].len();
    for shape in annotations {
        for range in shape.segments() {
            let pts = shape.points();
            for i in range.clone() {
                let mut arc = 0.0;
                for j in i + 1..range.end {
                    arc += pts[j].dist(&pts[j - 1]);
                    if arc < l_min {
                        continue;
                    }
                    if arc >= l_max {
                        break;
                    }
                    let bin = ((arc - l_min) / bin_width) as usize;
                    let count = j - i + 1;
                    lo[bin] = lo[bin].min(count);
                    hi[bin] = hi[bin].max(count);
                }
            }
        }
    }
    // +-1 slack, clamped
    let mut bins: Vec<Option<(usize, usize)>> = lo
        .iter()
        .zip(&hi)
        .map(|(&l, &h)| {
            if l == usize::MAX {
                None
            } else {
                Some((l.saturating_sub(1).max(2), (h + 1).min(n)))
            }
        })
        .collect();
    if bins.iter().all(Option::is_none) {
        return Err(Error::Degenerate("no annotated sub-arc falls in the length range".into()));
    }
    // linear interpolation over empty bins (nearest populated on each side)
    let filled: Vec<(usize, (usize, usize))> =
        bins.iter().enumerate().filter_map(|(i, b)| b.map(|v| (i, v))).collect();
    for i in 0..num_bins {
        if bins[i].is_some() {
            continue;
        }
        let left = filled.iter().rev().find(|(j, _)| *j < i);
        let right = filled.iter().find(|(j, _)| *j > i);
        bins[i] = Some(match (left, right) {
            (Some(&(jl, vl)), Some(&(jr, vr))) => {
                let t = (i - jl) as f64 / (jr - jl) as f64;
                let lerp = |a: usize, b: usize| (a as f64 + t * (b as f64 - a as f64)).round() as usize;
                (lerp(vl.0, vr.0), lerp(vl.1, vr.1))
            }
            (Some(&(_, vl)), None) => vl,
            (None, Some(&(_, vr))) => vr,
            (None, None) => unreachable!(),
        });
    }
    let mut bins: Vec<(usize, usize)> = bins.into_iter().map(Option::unwrap).collect();
    // U non-decreasing in l
    for i in 1..bins.len() {
        bins[i].1 = bins[i].1.max(bins[i - 1].1);
        bins[i].0 = bins[i].0.min(bins[i].1);
    }
    Ok(LengthIntervalTable { l_min, l_max, bin_width, bins })
}

/// Target points for matching a fragment against `k` landmarks.
pub fn fragment_targets(frag: &ContourFragment, k: usize, reversed: bool) -> Vec<Point2> {
    let mut pts = frag.sample_points(k);
    if reversed {
        pts.reverse();
    }
    pts
}

fn fit_match(
    model: &PcaShapeModel,
    targets: &[Point2],
    b: usize,
    p_use: usize,
    n_it: usize,
) -> Option<(PcaInstance, f64)> {
    let n = model.n();
    let k = targets.len();
    let mut w = vec![0.0; n];
    let mut pts: Vec<Point2> = model.mean_shape().points().to_vec();
    for (off, t) in targets.iter().enumerate() {
        w[b + off] = 1.0 / k as f64;
        pts[b + off] = *t;
    }
    let target = LandmarkShape::new(pts, model.segment_starts().to_vec()).ok()?;
    let inst = fit_weighted_pca_with_p(model, &target, &w, n_it, p_use).ok()?;
    let synth = synthesize(model, &inst).ok()?;
    let err = targets
        .iter()
        .enumerate()
        .map(|(off, t)| synth.point(b + off).dist(t))
        .sum::<f64>()
        / k as f64;
    Some((inst, err))
}

fn joint_fit_match(
    model: &PcaShapeModel,
    ranges: &[(usize, &[Point2])],
    p_use: usize,
    n_it: usize,
) -> Option<(PcaInstance, f64)> {
    let n = model.n();
    let total: usize = ranges.iter().map(|(_, t)| t.len()).sum();
    let mut w = vec![0.0; n];
    let mut pts: Vec<Point2> = model.mean_shape().points().to_vec();
    for (b, targets) in ranges {
        for (off, t) in targets.iter().enumerate() {
            w[b + off] = 1.0 / total as f64;
            pts[b + off] = *t;
        }
    }
    let target = LandmarkShape::new(pts, model.segment_starts().to_vec()).ok()?;
    let inst = fit_weighted_pca_with_p(model, &target, &w, n_it, p_use).ok()?;
    let synth = synthesize(model, &inst).ok()?;
    let mut err = 0.0;
    for (b, targets) in ranges {
        for (off, t) in targets.iter().enumerate() {
            err += synth.point(b + off).dist(t);
        }
    }
    Some((inst, err / total as f64))
}

/// Greedy non-max suppression over (error-sorted) candidates: keep the best,
/// drop everything whose synthesized shape is within `radius` of it, repeat.
fn nms(
    mut pool: Vec<(MatchRecord, LandmarkShape)>,
    radius: f64,
    budget: usize,
) -> Vec<MatchRecord> {
    pool.sort_by(|a, b| {
        a.0.fit_error
            .partial_cmp(&b.0.fit_error)
            .unwrap()
            .then_with(|| (a.0.fragment_id, a.0.b, a.0.k, a.0.reversed).cmp(&(
                b.0.fragment_id,
                b.0.b,
                b.0.k,
                b.0.reversed,
            )))
    });
    let mut out: Vec<MatchRecord> = Vec::new();
    let mut kept_shapes: Vec<LandmarkShape> = Vec::new();
    'outer: for (rec, shape) in pool {
        if out.len() >= budget {
            break;
        }
        for k in &kept_shapes {
            if avg_point_error(&shape, k).map_or(false, |d| d <= radius) {
                continue 'outer;
            }
        }
        out.push(rec);
        kept_shapes.push(shape);
    }
    out
}

/// Single-fragment candidate generation: every admissible (fragment,
/// orientation, landmark count, start index) combination is fitted with a
/// reduced component count, filtered by residual, then suppressed.
pub fn cg1(
    fragments: &[ContourFragment],
    model: &PcaShapeModel,
    table: &LengthIntervalTable,
    prm: &CgParams,
) -> Result<Vec<MatchRecord>> {
    prm.validate()?;
    let n = model.n();
    let mut jobs: Vec<(usize, usize, usize, bool)> = Vec::new();
    for (fi, frag) in fragments.iter().enumerate() {
        let (klo, khi) = table.lookup(frag.length);
        for k in klo..=khi.min(n) {
            if k < 2 {
                continue;
            }
            for b in 0..=n - k {
                jobs.push((fi, k, b, false));
                jobs.push((fi, k, b, true));
            }
        }
    }
    let pool: Vec<(MatchRecord, LandmarkShape)> = jobs
        .par_iter()
        .filter_map(|&(fi, k, b, reversed)| {
            let targets = fragment_targets(&fragments[fi], k, reversed);
            let (inst, err) = fit_match(model, &targets, b, prm.p_cg1, prm.n_it)?;
            if err > prm.fit_discard {
                return None;
            }
            if let Some(g) = &prm.transform_gate {
                if prior_transform(&inst.a, g).is_infinite() {
                    return None;
                }
            }
            let shape = synthesize(model, &inst).ok()?;
            Some((
                MatchRecord { inst, fragment_id: fi, b, k, fit_error: err, reversed },
                shape,
            ))
        })
        .collect();
    Ok(nms(pool, prm.d_nms1, prm.n_cand1))
}

/// Two-fragment refinement: for each surviving candidate, gate the remaining
/// fragments by endpoint distance to the synthesized shape, refit jointly
/// over both matched ranges, and suppress over the merged pool (parents
/// included).
pub fn cg2(
    cands: &[MatchRecord],
    fragments: &[ContourFragment],
    model: &PcaShapeModel,
    prm: &CgParams,
) -> Result<Vec<MatchRecord>> {
    prm.validate()?;
    let mut pool: Vec<(MatchRecord, LandmarkShape)> = Vec::new();
    for rec in cands {
        pool.push((rec.clone(), synthesize(model, &rec.inst)?));
    }
    let parents: Vec<(MatchRecord, LandmarkShape)> = pool.clone();
    let refined: Vec<(MatchRecord, LandmarkShape)> = parents
        .par_iter()
        .flat_map_iter(|(rec, shape)| {
            let mut out = Vec::new();
            for (fi, frag) in fragments.iter().enumerate() {
                if fi == rec.fragment_id {
                    continue;
                }
                let nearest = |p: &Point2| -> (usize, f64) {
                    let mut bi = 0usize;
                    let mut bd = f64::INFINITY;
                    for (i, q) in shape.points().iter().enumerate() {
                        let d = p.dist(q);
                        if d < bd {
                            bd = d;
                            bi = i;
                        }
                    }
                    (bi, bd)
                };
                let (j0, d0) = nearest(&frag.endpoints[0]);
                let (j1, d1) = nearest(&frag.endpoints[1]);
                if d0 + d1 >= 2.0 * prm.d_gate || j0 == j1 {
                    continue;
                }
                let (j, kk, rev2) = if j0 < j1 { (j0, j1, false) } else { (j1, j0, true) };
                // the second match may not overlap the parent's range
                let (pb, pe) = (rec.b, rec.b + rec.k - 1);
                if j <= pe && pb <= kk {
                    continue;
                }
                let m = kk - j + 1;
                let second = fragment_targets(frag, m, rev2);
                let first = fragment_targets(&fragments[rec.fragment_id], rec.k, rec.reversed);
                let fit = joint_fit_match(
                    model,
                    &[(rec.b, first.as_slice()), (j, second.as_slice())],
                    prm.p_cg2,
                    prm.n_it,
                );
                if let Some((inst, err)) = fit {
                    let gated = prm
                        .transform_gate
                        .as_ref()
                        .map_or(false, |g| prior_transform(&inst.a, g).is_infinite());
                    if err <= prm.fit_discard && !gated {
                        if let Ok(s) = synthesize(model, &inst) {
                            out.push((
                                MatchRecord {
                                    inst,
                                    fragment_id: rec.fragment_id,
                                    b: rec.b,
                                    k: rec.k,
                                    fit_error: err,
                                    reversed: rec.reversed,
                                },
                                s,
                            ));
                        }
                    }
                }
            }
            out
        })
        .collect();
    pool.extend(refined);
    Ok(nms(pool, prm.d_nms2, prm.n_cand2))
}
