//! Supervised parameter learning: coordinate descent on the mean parse error
//! for the energy parameters and on the closest-candidate error for the
//! candidate generators.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::candidates::{cg1, cg2, CgParams, LengthIntervalTable, MatchRecord};
use crate::energy::DeformationParams;
use crate::error::{Error, Result};
use crate::geometry::{avg_point_error, LandmarkShape};
use crate::pipeline::{parse, preprocess, ParseConfig};
use crate::preprocess::PointCloud;
use crate::shape_model::{synthesize, PcaShapeModel};

/// Default per-example penalty when a parse or generator produces nothing.
pub const FAIL_PENALTY: f64 = 100.0;

/// One annotated cloud.
#[derive(Clone, Debug)]
pub struct TrainingExample {
    pub cloud: PointCloud,
    pub annotation: LandmarkShape,
}

/// One tunable parameter of a descent stage.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub initial: f64,
    pub increment: f64,
    pub lo: f64,
    pub hi: f64,
}

impl ParamSpec {
    pub fn new(name: &str, initial: f64, increment: f64, lo: f64, hi: f64) -> Self {
        ParamSpec { name: name.into(), initial, increment, lo, hi }
    }
}

/// A loss evaluation along the descent trace.
#[derive(Clone, Debug, Serialize)]
pub struct TraceEntry {
    pub sweep: usize,
    pub param: String,
    pub value: f64,
    pub loss: f64,
}

/// Energy parameters exposed to learning; gamma stays fixed to pin the
/// energy scale.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ThetaParams {
    pub delta: f64,
    pub alpha: f64,
    pub rho: f64,
    pub r: f64,
    pub p: usize,
}

/// Greedy per-coordinate descent: each step tries +increment then
/// -increment and keeps the first strict improvement; stops after a full
/// sweep without improvement or after `max_sweeps`.
pub fn coordinate_descent(
    specs: &[ParamSpec],
    max_sweeps: usize,
    mut loss: impl FnMut(&[f64]) -> f64,
) -> Result<(Vec<f64>, Vec<TraceEntry>)> {
    if specs.is_empty() || max_sweeps == 0 {
        return Err(Error::InvalidInput("empty descent configuration".into()));
    }
    for s in specs {
        if s.increment <= 0.0 || s.lo > s.hi || !(s.lo..=s.hi).contains(&s.initial) {
            return Err(Error::InvalidInput(format!("bad parameter spec `{}`", s.name)));
        }
    }
    let mut values: Vec<f64> = specs.iter().map(|s| s.initial).collect();
    let mut cur = loss(&values);
    let mut trace = vec![TraceEntry { sweep: 0, param: "init".into(), value: 0.0, loss: cur }];
    for sweep in 1..=max_sweeps {
        let mut improved = false;
        for (i, spec) in specs.iter().enumerate() {
            for dir in [1.0, -1.0] {
                let cand = (values[i] + dir * spec.increment).clamp(spec.lo, spec.hi);
                if cand == values[i] {
                    continue;
                }
                let old = values[i];
                values[i] = cand;
                let l = loss(&values);
                if l < cur {
                    cur = l;
                    improved = true;
                    trace.push(TraceEntry {
                        sweep,
                        param: spec.name.clone(),
                        value: cand,
                        loss: l,
                    });
                    break;
                }
                values[i] = old;
            }
        }
        if !improved {
            break;
        }
    }
    Ok((values, trace))
}

fn mean_or_penalty(errs: &[Option<f64>], penalty: f64) -> f64 {
    let sum: f64 = errs.iter().map(|e| e.unwrap_or(penalty)).sum();
    sum / errs.len() as f64
}

/// Error of the candidate pool's best member against the annotation.
pub fn closest_candidate_error(
    cands: &[MatchRecord],
    model: &PcaShapeModel,
    annotation: &LandmarkShape,
) -> Option<f64> {
    cands
        .iter()
        .filter_map(|c| {
            let s = synthesize(model, &c.inst).ok()?;
            avg_point_error(&s, annotation).ok()
        })
        .min_by(|a, b| a.partial_cmp(b).unwrap())
}

/// Build a parse configuration from the base one with the learned energy
/// parameters substituted.
pub fn apply_theta(base: &ParseConfig, theta: &ThetaParams, n: usize, starts: &[usize]) -> Result<ParseConfig> {
    let mut config = base.clone();
    config.energy.deform = DeformationParams::uniform(
        n,
        theta.alpha,
        base.energy.deform.gamma.first().copied().unwrap_or(0.1),
        base.energy.deform.d_max,
        base.energy.deform.d_step,
        starts,
    )?;
    config.energy.delta = theta.delta;
    config.energy.rho = theta.rho;
    config.energy.transform_prior.r = theta.r;
    Ok(config)
}

/// Mean parse error over the training set for one energy-parameter setting;
/// failed parses contribute `penalty`. Candidates come from CG1 only.
pub fn loss_parse(
    theta: &ThetaParams,
    training: &[TrainingExample],
    model: &PcaShapeModel,
    table: &LengthIntervalTable,
    base: &ParseConfig,
    penalty: f64,
) -> Result<f64> {
    if training.is_empty() {
        return Err(Error::InvalidInput("empty training set".into()));
    }
    let truncated = model.truncated(theta.p);
    let mut config = apply_theta(base, theta, model.n(), model.segment_starts())?;
    config.use_cg2 = false;
    let errs: Vec<Option<f64>> = training
        .par_iter()
        .map(|ex| {
            let res = parse(&ex.cloud, &truncated, table, &config).ok()?;
            avg_point_error(&res.contour, &ex.annotation).ok()
        })
        .collect();
    Ok(mean_or_penalty(&errs, penalty))
}

/// Mean closest-candidate error over the training set; examples with no
/// candidates contribute `penalty`.
pub fn loss_candidates(
    cg: &CgParams,
    training: &[TrainingExample],
    model: &PcaShapeModel,
    table: &LengthIntervalTable,
    base: &ParseConfig,
    use_cg2: bool,
    penalty: f64,
) -> Result<f64> {
    if training.is_empty() {
        return Err(Error::InvalidInput("empty training set".into()));
    }
    let errs: Vec<Option<f64>> = training
        .par_iter()
        .map(|ex| {
            let pre = preprocess(&ex.cloud, &base.fragment, base.subsample_step).ok()?;
            let mut cands = cg1(&pre.fragments, model, table, cg).ok()?;
            if use_cg2 {
                cands = cg2(&cands, &pre.fragments, model, cg).ok()?;
            }
            closest_candidate_error(&cands, model, &ex.annotation)
        })
        .collect();
    Ok(mean_or_penalty(&errs, penalty))
}

/// Everything learn_all produces: generator parameters, energy parameters,
/// and the per-stage descent traces.
#[derive(Clone, Debug, Serialize)]
pub struct LearnedParams {
    pub cg: CgParams,
    pub theta: ThetaParams,
    pub stage_traces: Vec<Vec<TraceEntry>>,
}

/// Stage 1: CG1 matching parameters on the closest-candidate loss.
pub fn learn_cg1(
    training: &[TrainingExample],
    model: &PcaShapeModel,
    table: &LengthIntervalTable,
    base: &ParseConfig,
    max_sweeps: usize,
) -> Result<(CgParams, Vec<TraceEntry>)> {
    let cg = base.cg.clone();
    let specs = [
        ParamSpec::new("d_nms1", cg.d_nms1, 0.5, 0.5, 20.0),
        ParamSpec::new("fit_discard", cg.fit_discard, 0.5, 0.5, 10.0),
    ];
    let (v, trace) = coordinate_descent(&specs, max_sweeps, |v| {
        let mut c = cg.clone();
        c.d_nms1 = v[0];
        c.fit_discard = v[1];
        loss_candidates(&c, training, model, table, base, false, FAIL_PENALTY)
            .unwrap_or(f64::INFINITY)
    })?;
    let mut out = cg;
    out.d_nms1 = v[0];
    out.fit_discard = v[1];
    Ok((out, trace))
}

/// Stage 2: CG2 gating and suppression, stage-1 values frozen.
pub fn learn_cg2(
    training: &[TrainingExample],
    model: &PcaShapeModel,
    table: &LengthIntervalTable,
    base: &ParseConfig,
    max_sweeps: usize,
) -> Result<(CgParams, Vec<TraceEntry>)> {
    let cg = base.cg.clone();
    let specs = [
        ParamSpec::new("d_nms2", cg.d_nms2, 0.5, 0.5, 20.0),
        ParamSpec::new("d_gate", cg.d_gate, 2.0, 2.0, 60.0),
    ];
    let (v, trace) = coordinate_descent(&specs, max_sweeps, |v| {
        let mut c = cg.clone();
        c.d_nms2 = v[0];
        c.d_gate = v[1];
        loss_candidates(&c, training, model, table, base, true, FAIL_PENALTY)
            .unwrap_or(f64::INFINITY)
    })?;
    let mut out = cg;
    out.d_nms2 = v[0];
    out.d_gate = v[1];
    Ok((out, trace))
}

/// Stage 3: energy parameters on the final-parse loss with CG1 candidates;
/// gamma stays fixed.
pub fn learn_theta(
    training: &[TrainingExample],
    model: &PcaShapeModel,
    table: &LengthIntervalTable,
    base: &ParseConfig,
    max_sweeps: usize,
) -> Result<(ThetaParams, Vec<TraceEntry>)> {
    let p0 = model.p();
    let specs = [
        ParamSpec::new("delta", base.energy.delta, 0.5, 0.0, 20.0),
        ParamSpec::new(
            "alpha",
            base.energy.deform.alpha.first().copied().unwrap_or(0.04),
            0.01,
            0.0,
            1.0,
        ),
        ParamSpec::new("rho", base.energy.rho, 0.5, 0.0, 20.0),
        ParamSpec::new("r", base.energy.transform_prior.r, 0.25, 0.0, 10.0),
        ParamSpec::new("p", p0 as f64, 1.0, 1.0, p0 as f64),
    ];
    let (v, trace) = coordinate_descent(&specs, max_sweeps, |v| {
        let theta = ThetaParams {
            delta: v[0],
            alpha: v[1],
            rho: v[2],
            r: v[3],
            p: v[4].round() as usize,
        };
        loss_parse(&theta, training, model, table, base, FAIL_PENALTY).unwrap_or(f64::INFINITY)
    })?;
    Ok((
        ThetaParams { delta: v[0], alpha: v[1], rho: v[2], r: v[3], p: v[4].round() as usize },
        trace,
    ))
}

/// Three-stage learning: CG1 generator parameters, then CG2 (CG1 frozen),
/// then the energy parameters on the final-parse loss with CG1 candidates.
pub fn learn_all(
    training: &[TrainingExample],
    model: &PcaShapeModel,
    table: &LengthIntervalTable,
    base: &ParseConfig,
    max_sweeps: usize,
) -> Result<LearnedParams> {
    if training.len() < 2 {
        return Err(Error::InvalidInput("learn_all needs at least 2 examples".into()));
    }
    let (cg1_params, t1) = learn_cg1(training, model, table, base, max_sweeps)?;
    let mut stage = base.clone();
    stage.cg = cg1_params;
    let (cg_params, t2) = learn_cg2(training, model, table, &stage, max_sweeps)?;
    stage.cg = cg_params.clone();
    let (theta, t3) = learn_theta(training, model, table, &stage, max_sweeps)?;
    Ok(LearnedParams { cg: cg_params, theta, stage_traces: vec![t1, t2, t3] })
}

/// Final-parse loss at each delta in `deltas`, other parameters fixed.
pub fn delta_sweep(
    training: &[TrainingExample],
    model: &PcaShapeModel,
    table: &LengthIntervalTable,
    base: &ParseConfig,
    deltas: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::with_capacity(deltas.len());
    for &d in deltas {
        let theta = ThetaParams {
            delta: d,
            alpha: base.energy.deform.alpha.first().copied().unwrap_or(0.04),
            rho: base.energy.rho,
            r: base.energy.transform_prior.r,
            p: model.p(),
        };
        out.push((d, loss_parse(&theta, training, model, table, base, FAIL_PENALTY)?));
    }
    Ok(out)
}
