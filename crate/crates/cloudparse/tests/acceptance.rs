//! End-to-end acceptance suite: exact inference, model fitting, sampling,
//! energy semantics, synthetic recovery, baselines, learning, and CLI
//! determinism. Each test prints one PASS line with its key numbers.

use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use cloudparse::candidates::{cg1, cg2, learn_length_intervals};
use cloudparse::dp::{solve_dp, DpProblem};
use cloudparse::energy::{
    build_membership_index, energy_data, energy_deformation, energy_total, DeformationParams,
};
use cloudparse::geometry::{avg_point_error, shape_normals, LandmarkShape, SimilarityTransform};
use cloudparse::learning::{
    coordinate_descent, closest_candidate_error, delta_sweep, learn_all, ParamSpec,
    TrainingExample,
};
use cloudparse::pipeline::{asm_baseline, demo_config, parse_candidates, preprocess, ParseConfig};
use cloudparse::shape_model::{
    deformation_precision, fit_weighted_pca, prior_beta, prior_transform, sample_deformation,
    synthesize, train_pca, PcaInstance, PcaShapeModel,
};
use cloudparse::synth::{demo_model, generate_suite, mean_rms_radius, SyntheticSpec};

// ---------------------------------------------------------------------------
// 1. Exact inference: DP equals exhaustive enumeration on random instances.

fn random_problem(rng: &mut ChaCha8Rng) -> DpProblem {
    let n = rng.gen_range(2..=6usize);
    let l = rng.gen_range(2..=7usize);
    let mut segment_starts = vec![0usize];
    if n >= 4 && rng.gen_bool(0.5) {
        segment_starts.push(rng.gen_range(2..n - 1));
    }
    let unary: Vec<Vec<f64>> =
        (0..n).map(|_| (0..l).map(|_| rng.gen_range(-5.0..5.0)).collect()).collect();
    let pairwise: Vec<Option<Vec<f64>>> = (0..n)
        .map(|i| {
            if i == 0 || segment_starts.contains(&i) {
                None
            } else {
                Some((0..l * l).map(|_| rng.gen_range(-5.0..5.0)).collect())
            }
        })
        .collect();
    // close each segment only when every segment has room for a cycle
    let seg_lens: Vec<usize> = segment_starts
        .iter()
        .enumerate()
        .map(|(k, &s)| segment_starts.get(k + 1).copied().unwrap_or(n) - s)
        .collect();
    let closing = if seg_lens.iter().all(|&m| m >= 3) && rng.gen_bool(0.5) {
        segment_starts
            .iter()
            .map(|_| Some((0..l * l).map(|_| rng.gen_range(-5.0..5.0)).collect()))
            .collect()
    } else {
        Vec::new()
    };
    DpProblem { unary, pairwise, segment_starts, closing }
}

fn brute_force_min(problem: &DpProblem) -> f64 {
    let n = problem.n();
    let l = problem.l();
    let mut labels = vec![0usize; n];
    let mut best = f64::INFINITY;
    loop {
        let e = problem.labeling_energy(&labels);
        if e < best {
            best = e;
        }
        // odometer increment
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            labels[i] += 1;
            if labels[i] < l {
                break;
            }
            labels[i] = 0;
            i += 1;
        }
    }
}

#[test]
fn dp_matches_exhaustive_enumeration() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..1000 {
        let problem = random_problem(&mut rng);
        let (labels, total) = solve_dp(&problem).unwrap();
        let brute = brute_force_min(&problem);
        let replayed = problem.labeling_energy(&labels);
        assert_eq!(
            replayed, brute,
            "case {case}: dp labeling energy {replayed} != enumeration minimum {brute}"
        );
        assert!(
            (total - brute).abs() <= 1e-9,
            "case {case}: dp total {total} vs enumeration minimum {brute}"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    println!("PASS dp exactness: 1000 random instances in {elapsed:?}");
}

// ---------------------------------------------------------------------------
// 2. Weighted-PCA fitting recovers planted instances; zero weights make the
//    corresponding targets irrelevant.

fn planted_instance(model: &PcaShapeModel, rng: &mut ChaCha8Rng) -> PcaInstance {
    let a = SimilarityTransform::new(
        rng.gen_range(-50.0..50.0),
        rng.gen_range(-50.0..50.0),
        rng.gen_range(30.0..100.0),
        rng.gen_range(-0.5..0.5),
    )
    .unwrap();
    let beta: Vec<f64> = model
        .lambda()
        .iter()
        .map(|&l| rng.gen_range(-3.0 * l.sqrt()..3.0 * l.sqrt()))
        .collect();
    PcaInstance { a, beta }
}

fn shape_rms(a: &LandmarkShape, b: &LandmarkShape) -> f64 {
    let n = a.len() as f64;
    (a.points()
        .iter()
        .zip(b.points())
        .map(|(p, q)| (p.x - q.x).powi(2) + (p.y - q.y).powi(2))
        .sum::<f64>()
        / n)
        .sqrt()
}

#[test]
fn weighted_pca_recovers_planted_instances() {
    let start = Instant::now();
    let (model, _) = demo_model(48, 4, 3).unwrap();
    let uniform = vec![1.0 / model.n() as f64; model.n()];
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut hits = 0usize;
    for _ in 0..200 {
        let inst = planted_instance(&model, &mut rng);
        let target = synthesize(&model, &inst).unwrap();
        let fit = fit_weighted_pca(&model, &target, &uniform, 10).unwrap();
        let rms = shape_rms(&synthesize(&model, &fit).unwrap(), &target);
        if rms < 1e-6 {
            hits += 1;
        }
    }
    assert!(hits >= 198, "only {hits}/200 recoveries under 1e-6 RMS");

    // invariance: zero-weight targets can be moved arbitrarily
    let inst = planted_instance(&model, &mut rng);
    let target = synthesize(&model, &inst).unwrap();
    let mut weights = uniform.clone();
    let mut moved = target.points().to_vec();
    for i in [3usize, 11, 20, 35, 44] {
        weights[i] = 0.0;
        moved[i].x += rng.gen_range(-100.0..100.0);
        moved[i].y += rng.gen_range(-100.0..100.0);
    }
    let corrupted = LandmarkShape::new(moved, target.segment_starts().to_vec()).unwrap();
    let f1 = fit_weighted_pca(&model, &target, &weights, 10).unwrap();
    let f2 = fit_weighted_pca(&model, &corrupted, &weights, 10).unwrap();
    let drift =
        shape_rms(&synthesize(&model, &f1).unwrap(), &synthesize(&model, &f2).unwrap());
    assert!(drift < 1e-9, "zero-weight targets moved the fit by {drift}");
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    println!("PASS weighted-PCA recovery: {hits}/200 under 1e-6 RMS, invariance drift {drift:.2e}, {elapsed:?}");
}

// ---------------------------------------------------------------------------
// 3. Deformation sampling: empirical moments match the analytic covariance.

#[test]
fn deformation_samples_match_analytic_covariance() {
    let start = Instant::now();
    let n = 96;
    let deform = DeformationParams::uniform(n, 0.04, 0.1, 15.0, 1.0, &[0]).unwrap();
    let cov = (deformation_precision(&deform) * 2.0)
        .try_inverse()
        .expect("precision is positive definite");
    let draws = 100_000usize;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut sum = vec![0.0f64; n];
    let mut sq = vec![0.0f64; n];
    let mut adj = vec![0.0f64; n - 1];
    for _ in 0..draws {
        let d = sample_deformation(&deform, &mut rng).unwrap();
        for i in 0..n {
            sum[i] += d[i];
            sq[i] += d[i] * d[i];
            if i + 1 < n {
                adj[i] += d[i] * d[i + 1];
            }
        }
    }
    let m = draws as f64;
    let mut worst = 0.0f64;
    for i in 0..n {
        let mean = sum[i] / m;
        let var = sq[i] / m - mean * mean;
        let rel = (var - cov[(i, i)]).abs() / cov[(i, i)];
        worst = worst.max(rel);
        assert!(rel <= 0.10, "Var(d_{i}) off by {rel:.3}");
        if i + 1 < n {
            let mean_next = sum[i + 1] / m;
            let c = adj[i] / m - mean * mean_next;
            let rel = (c - cov[(i, i + 1)]).abs() / cov[(i, i + 1)].abs();
            worst = worst.max(rel);
            assert!(rel <= 0.10, "Cov(d_{i}, d_{}) off by {rel:.3}", i + 1);
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    println!("PASS deformation sampling: worst relative moment error {worst:.4} over {draws} draws, {elapsed:?}");
}

// ---------------------------------------------------------------------------
// 4. Energy decomposition and hard prior semantics.

#[test]
fn energy_decomposes_and_prior_bounds_are_hard() {
    let (model, _) = demo_model(48, 3, 3).unwrap();
    let config = demo_config(&model, 256.0, 256.0).unwrap();
    let spec = SyntheticSpec { n_images: 1, ..Default::default() };
    let suite = generate_suite(&model, &spec).unwrap();
    let pre = preprocess(&suite[0].cloud, &config.fragment, config.subsample_step).unwrap();
    let params = &config.energy;
    let l = 2 * (params.deform.d_max / params.deform.d_step).floor() as usize + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for _ in 0..10_000 {
        let mut inst = planted_instance(&model, &mut rng);
        // keep the pose inside the prior box so the total stays finite
        inst.a.s = rng.gen_range(params.transform_prior.s_min..params.transform_prior.s_max);
        inst.a.theta = rng.gen_range(-0.4..0.4);
        inst.a.u = rng.gen_range(100.0..156.0);
        inst.a.v = rng.gen_range(100.0..156.0);
        let shape = synthesize(&model, &inst).unwrap();
        let normals = shape_normals(&shape).unwrap();
        let idx = build_membership_index(&pre.grid, &shape, &normals, params);
        let labels: Vec<usize> = (0..model.n()).map(|_| rng.gen_range(0..l)).collect();
        let total = energy_total(&labels, &inst, &model, &idx, params);
        let parts = energy_data(&labels, &idx, params.delta, model.segment_starts())
            + energy_deformation(&labels, &params.deform)
            + prior_beta(&model, &inst.beta, params.rho)
            + prior_transform(&inst.a, &params.transform_prior);
        assert!(
            (total - parts).abs() <= 1e-12,
            "decomposition off by {}",
            (total - parts).abs()
        );

        // any out-of-range pose component forces the total to +inf
        let labels0 = vec![l / 2; model.n()];
        for bad in [
            SimilarityTransform { s: params.transform_prior.s_min * 0.5, ..inst.a },
            SimilarityTransform { s: params.transform_prior.s_max * 2.0, ..inst.a },
            SimilarityTransform { theta: params.transform_prior.theta_max + 0.1, ..inst.a },
            SimilarityTransform { theta: -(params.transform_prior.theta_max + 0.1), ..inst.a },
        ] {
            let b = PcaInstance { a: bad, beta: inst.beta.clone() };
            let e = energy_total(&labels0, &b, &model, &idx, params);
            assert!(e.is_infinite() && e > 0.0, "out-of-range pose gave finite {e}");
        }
    }
    println!("PASS energy decomposition: 10000 configurations within 1e-12, hard bounds enforced");
}

// ---------------------------------------------------------------------------
// 5 + 6. Synthetic recovery suite, shared between the generator-ordering and
//        baseline-ordering checks.

struct SuiteEval {
    cc1: Vec<f64>,
    cc2: Vec<f64>,
    parse1: Vec<f64>,
    parse2: Vec<f64>,
    asm: Vec<f64>,
    elapsed: Duration,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn suite_eval() -> &'static SuiteEval {
    static EVAL: OnceLock<SuiteEval> = OnceLock::new();
    EVAL.get_or_init(|| {
        let start = Instant::now();
        let (model, _) = demo_model(48, 3, 3).unwrap();
        let spec = SyntheticSpec {
            n_images: 50,
            dropout: 0.2,
            clutter_chains: 10,
            ..Default::default()
        };
        let suite = generate_suite(&model, &spec).unwrap();
        let truths: Vec<LandmarkShape> = suite.iter().map(|im| im.truth.clone()).collect();
        let table = learn_length_intervals(&truths, 20.0, 60.0, 5.0).unwrap();
        let config = demo_config(&model, spec.width as f64, spec.height as f64).unwrap();
        let scale = 70.0 / mean_rms_radius(&model);
        const MISS: f64 = 100.0;
        let rows: Vec<[f64; 5]> = suite
            .par_iter()
            .map(|img| {
                let err = |shape: &LandmarkShape| avg_point_error(shape, &img.truth).unwrap();
                let pre = preprocess(&img.cloud, &config.fragment, config.subsample_step).unwrap();
                let c1 = cg1(&pre.fragments, &model, &table, &config.cg).unwrap();
                let cc1 = closest_candidate_error(&c1, &model, &img.truth).unwrap_or(MISS);
                let p1 = parse_candidates(&pre, &c1, &model, &config.energy, config.n_iter)
                    .map(|r| err(&r.contour))
                    .unwrap_or(MISS);
                let c2 = cg2(&c1, &pre.fragments, &model, &config.cg).unwrap();
                let cc2 = closest_candidate_error(&c2, &model, &img.truth).unwrap_or(MISS);
                let p2 = parse_candidates(&pre, &c2, &model, &config.energy, config.n_iter)
                    .map(|r| err(&r.contour))
                    .unwrap_or(MISS);
                let asm = asm_baseline(&img.cloud, &model, scale, &config.energy, 20)
                    .map(|r| err(&r.contour))
                    .unwrap_or(MISS);
                [cc1, cc2, p1, p2, asm]
            })
            .collect();
        SuiteEval {
            cc1: rows.iter().map(|r| r[0]).collect(),
            cc2: rows.iter().map(|r| r[1]).collect(),
            parse1: rows.iter().map(|r| r[2]).collect(),
            parse2: rows.iter().map(|r| r[3]).collect(),
            asm: rows.iter().map(|r| r[4]).collect(),
            elapsed: start.elapsed(),
        }
    })
}

#[test]
fn synthetic_suite_recovery_and_generator_ordering() {
    let ev = suite_eval();
    let (cc1, cc2) = (mean(&ev.cc1), mean(&ev.cc2));
    let (p1, p2) = (mean(&ev.parse1), mean(&ev.parse2));
    assert!(cc2 <= cc1, "closest-candidate error: two-fragment {cc2:.3} > single {cc1:.3}");
    assert!(p2 <= p1, "parse error: two-fragment {p2:.3} > single {p1:.3}");
    // 3x the chain-membership snap tolerance of 1.5 px
    assert!(p2 <= 4.5, "mean parse error {p2:.3} px exceeds 4.5 px");
    assert!(ev.elapsed < Duration::from_secs(300), "suite took {:?}", ev.elapsed);
    println!(
        "PASS synthetic recovery: closest-candidate {cc1:.3}->{cc2:.3} px, parse {p1:.3}->{p2:.3} px, {:?}",
        ev.elapsed
    );
}

#[test]
fn asm_baseline_is_not_better_than_parse() {
    let ev = suite_eval();
    let (asm, p2) = (mean(&ev.asm), mean(&ev.parse2));
    assert!(asm >= p2, "baseline {asm:.3} px beat the parser {p2:.3} px");
    println!("PASS baseline ordering: baseline {asm:.3} px >= parse {p2:.3} px");
}

// ---------------------------------------------------------------------------
// 7. Learning: exact descent on a quadratic, improving staged learning, and
//    a U-shaped chain-bonus sweep.

#[test]
fn coordinate_descent_solves_planted_quadratic() {
    let specs = [ParamSpec::new("x", 0.0, 0.5, -10.0, 10.0)];
    let (v, trace) = coordinate_descent(&specs, 50, |v| (v[0] - 3.0).powi(2)).unwrap();
    assert_eq!(v[0], 3.0);
    for w in trace.windows(2) {
        assert!(w[1].loss <= w[0].loss);
    }
    println!("PASS quadratic descent: reached {} in {} steps", v[0], trace.len());
}

fn learning_setup(n_images: usize) -> (PcaShapeModel, Vec<TrainingExample>, ParseConfig) {
    let (model, _) = demo_model(48, 3, 3).unwrap();
    let spec = SyntheticSpec {
        n_images,
        dropout: 0.2,
        clutter_chains: 10,
        seed: 23,
        ..Default::default()
    };
    let suite = generate_suite(&model, &spec).unwrap();
    let training: Vec<TrainingExample> = suite
        .iter()
        .map(|im| TrainingExample { cloud: im.cloud.clone(), annotation: im.truth.clone() })
        .collect();
    let config = demo_config(&model, spec.width as f64, spec.height as f64).unwrap();
    (model, training, config)
}

#[test]
fn staged_learning_improves_the_parse_loss() {
    let (model, training, config) = learning_setup(3);
    let anns: Vec<LandmarkShape> = training.iter().map(|t| t.annotation.clone()).collect();
    let table = learn_length_intervals(&anns, 20.0, 60.0, 5.0).unwrap();
    let learned = learn_all(&training, &model, &table, &config, 2).unwrap();
    assert_eq!(learned.stage_traces.len(), 3);
    for trace in &learned.stage_traces {
        assert!(!trace.is_empty());
        for w in trace.windows(2) {
            assert!(w[1].loss <= w[0].loss, "trace regressed: {} -> {}", w[0].loss, w[1].loss);
        }
    }
    let stage3 = &learned.stage_traces[2];
    let (init, fin) = (stage3.first().unwrap().loss, stage3.last().unwrap().loss);
    assert!(fin <= init, "final parse loss {fin} above initial {init}");
    println!("PASS staged learning: parse loss {init:.3} -> {fin:.3} px");
}

#[test]
fn chain_bonus_sweep_has_interior_minimum() {
    let (model, training, config) = learning_setup(3);
    let anns: Vec<LandmarkShape> = training.iter().map(|t| t.annotation.clone()).collect();
    let table = learn_length_intervals(&anns, 20.0, 60.0, 5.0).unwrap();
    let deltas = [0.0, 1.0, 2.0, 4.0, 8.0, 16.0];
    let curve = delta_sweep(&training, &model, &table, &config, &deltas).unwrap();
    let losses: Vec<f64> = curve.iter().map(|&(_, l)| l).collect();
    let best = losses.iter().cloned().fold(f64::INFINITY, f64::min);
    let first = *losses.first().unwrap();
    let last = *losses.last().unwrap();
    assert!(first > best, "loss did not rise toward delta=0: {losses:?}");
    assert!(last > best, "loss did not rise toward large delta: {losses:?}");
    println!("PASS chain-bonus sweep: losses {losses:?}");
}

// ---------------------------------------------------------------------------
// 8. Optional real-data check, skipped unless a dataset is supplied.

fn load_pairs(dir: &Path) -> Vec<TrainingExample> {
    let mut out = Vec::new();
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().map_or(false, |e| e == "ann"))
        .collect();
    entries.sort();
    for ann in entries {
        let annotation =
            cloudparse::io::parse_annotation(&std::fs::read_to_string(&ann).unwrap()).unwrap();
        let cloud = ["txt", "pbm"]
            .iter()
            .map(|e| ann.with_extension(e))
            .find(|p| p.exists())
            .map(|p| cloudparse::io::load_cloud(&p).unwrap())
            .unwrap_or_else(|| panic!("no cloud next to {}", ann.display()));
        out.push(TrainingExample { cloud, annotation });
    }
    out
}

/// Runs only when CLOUDPARSE_DATASET_DIR points at a directory holding
/// train/ and test/ subdirectories of annotation (.ann) + cloud (.txt/.pbm)
/// pairs; absent data means skip, not failure.
#[test]
fn annotated_dataset_error_matches_reference() {
    let dir = match std::env::var_os("CLOUDPARSE_DATASET_DIR") {
        Some(d) => PathBuf::from(d),
        None => {
            println!("SKIP annotated dataset: CLOUDPARSE_DATASET_DIR not set");
            return;
        }
    };
    if !dir.join("train").is_dir() || !dir.join("test").is_dir() {
        println!("SKIP annotated dataset: {} lacks train/ and test/", dir.display());
        return;
    }
    let train = load_pairs(&dir.join("train"));
    let test = load_pairs(&dir.join("test"));
    let anns: Vec<LandmarkShape> = train.iter().map(|t| t.annotation.clone()).collect();
    let p = 10.min(anns.len() - 1);
    let (model, _) = train_pca(&anns, p).unwrap();
    let table = learn_length_intervals(&anns, 20.0, 60.0, 5.0).unwrap();
    let radius = mean_rms_radius(&model);
    let errors: Vec<f64> = test
        .par_iter()
        .map(|ex| {
            let mut config = demo_config(
                &model,
                ex.cloud.width() as f64,
                ex.cloud.height() as f64,
            )
            .unwrap();
            // rescale the pose prior from the demo 70-px radius to this set
            let s: f64 = anns
                .iter()
                .map(|a| {
                    let n = a.len() as f64;
                    let (cx, cy) = a
                        .points()
                        .iter()
                        .fold((0.0, 0.0), |(x, y), p| (x + p.x / n, y + p.y / n));
                    (a.points()
                        .iter()
                        .map(|p| (p.x - cx).powi(2) + (p.y - cy).powi(2))
                        .sum::<f64>()
                        / n)
                        .sqrt()
                })
                .sum::<f64>()
                / anns.len() as f64
                / radius;
            config.energy.transform_prior.s_min = s * 0.5;
            config.energy.transform_prior.s_max = s * 2.0;
            config.cg.transform_gate = Some(config.energy.transform_prior.clone());
            config.use_cg2 = true;
            cloudparse::pipeline::parse(&ex.cloud, &model, &table, &config)
                .map(|r| avg_point_error(&r.contour, &ex.annotation).unwrap())
                .unwrap_or(100.0)
        })
        .collect();
    let m = mean(&errors);
    assert!(
        (m - 15.36).abs() <= 3.0,
        "mean test error {m:.2} px outside 15.36 +- 3"
    );
    println!("PASS annotated dataset: mean test error {m:.2} px");
}

// ---------------------------------------------------------------------------
// 9. CLI determinism across worker counts.

#[test]
fn parse_output_is_identical_across_job_counts() {
    let bin = env!("CARGO_BIN_EXE_cloudparse");
    let tmp = tempfile::tempdir().unwrap();
    let suite = tmp.path().join("suite");
    let model = tmp.path().join("model.json");
    let run = |args: &[&str]| {
        let out = std::process::Command::new(bin).args(args).output().unwrap();
        assert!(
            out.status.success(),
            "cloudparse {args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    };
    run(&[
        "synth",
        "--out",
        suite.to_str().unwrap(),
        "--n-images",
        "10",
        "--seed",
        "7",
    ]);
    run(&[
        "train",
        "--annotations",
        suite.to_str().unwrap(),
        "--p",
        "3",
        "--out",
        model.to_str().unwrap(),
    ]);
    for i in 0..10 {
        let cloud = suite.join(format!("img_{i:03}.txt"));
        let a = tmp.path().join(format!("a_{i}.json"));
        let b = tmp.path().join(format!("b_{i}.json"));
        run(&[
            "parse",
            "--cloud",
            cloud.to_str().unwrap(),
            "--model",
            model.to_str().unwrap(),
            "--jobs",
            "1",
            "--out",
            a.to_str().unwrap(),
        ]);
        run(&[
            "parse",
            "--cloud",
            cloud.to_str().unwrap(),
            "--model",
            model.to_str().unwrap(),
            "--jobs",
            "8",
            "--out",
            b.to_str().unwrap(),
        ]);
        let ba = std::fs::read(&a).unwrap();
        let bb = std::fs::read(&b).unwrap();
        assert_eq!(ba, bb, "image {i}: outputs differ between 1 and 8 workers");
    }
    println!("PASS determinism: 10 images byte-identical across --jobs 1 and 8");
}
