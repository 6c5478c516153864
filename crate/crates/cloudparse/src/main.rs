//! Command-line interface: train, parse, synth, eval, learn.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cloudparse::candidates::{learn_length_intervals, LengthIntervalTable};
use cloudparse::energy::{DeformationParams, EnergyParams};
use cloudparse::geometry::{avg_point_error, LandmarkShape};
use cloudparse::io::{
    load_cloud, load_model, parse_annotation, report_to_csv, result_from_json, result_to_json,
    save_model, trace_to_csv, write_annotation, write_point_list, EvalReport, ModelFile,
    ParamsBlock,
};
use cloudparse::learning::{
    learn_all, learn_cg1, learn_cg2, learn_theta, ThetaParams, TrainingExample,
};
use cloudparse::pipeline::{parse, ParseConfig};
use cloudparse::preprocess::FragmentParams;
use cloudparse::shape_model::{synthesize, train_pca, PcaShapeModel, TransformPriorParams};
use cloudparse::svg::{render_overlay, render_sorted_errors};
use cloudparse::synth::{demo_model, generate_suite, SyntheticSpec};
use cloudparse::Error;

#[derive(Parser)]
#[command(name = "cloudparse", about = "Object boundary parsing from noisy point clouds")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train a PCA shape model from annotation files.
    Train {
        /// Directory of annotation files.
        #[arg(long)]
        annotations: PathBuf,
        /// Number of PCA components.
        #[arg(long)]
        p: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse one point cloud with a trained model.
    Parse {
        /// Cloud file (.pbm bitmap or POINTS text).
        #[arg(long)]
        cloud: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Refine candidates with a second fragment.
        #[arg(long)]
        cg2: bool,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Optional overlay rendering.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Generate a synthetic benchmark suite.
    Synth {
        /// Model file; the built-in demo model when omitted.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 50)]
        n_images: usize,
        #[arg(long, default_value_t = 0.2)]
        dropout: f64,
        #[arg(long, default_value_t = 10)]
        clutter: usize,
        /// RNG seed (CLOUDPARSE_SEED overrides the default).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Score parse results against annotations.
    Eval {
        /// Directory of result JSON files.
        #[arg(long)]
        results: PathBuf,
        /// Directory of matching annotation files.
        #[arg(long)]
        annotations: PathBuf,
        /// Report CSV path; the sorted-error plot lands next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Learn generator and energy parameters on annotated clouds.
    Learn {
        /// Directory of cloud (.txt/.pbm) + annotation (.ann) pairs.
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// cg1 | cg2 | theta | all
        #[arg(long)]
        stage: String,
        #[arg(long, default_value_t = 10)]
        sweeps: usize,
        /// Loss-trace CSV path.
        #[arg(long, default_value = "trace.csv")]
        trace: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::NoHypothesis(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.cmd {
        Cmd::Train { annotations, p, out } => cmd_train(&annotations, p, &out),
        Cmd::Parse { cloud, model, cg2, jobs, out, svg } => {
            cmd_parse(&cloud, &model, cg2, jobs, &out, svg.as_deref())
        }
        Cmd::Synth { model, out, n_images, dropout, clutter, seed } => {
            cmd_synth(model.as_deref(), &out, n_images, dropout, clutter, seed)
        }
        Cmd::Eval { results, annotations, out } => cmd_eval(&results, &annotations, &out),
        Cmd::Learn { train, model, stage, sweeps, trace } => {
            cmd_learn(&train, &model, &stage, sweeps, &trace)
        }
    }
}

/// Sorted file listing, optionally filtered by extension.
fn list_dir(dir: &Path, ext: Option<&str>) -> Result<Vec<PathBuf>, Error> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_file())
        .filter(|p| {
            ext.is_none_or(|ext| p.extension().is_some_and(|e| e.eq_ignore_ascii_case(ext)))
        })
        .collect();
    files.sort();
    Ok(files)
}

fn cmd_train(annotations: &Path, p: usize, out: &Path) -> Result<(), Error> {
    let files = list_dir(annotations, Some("ann"))?;
    if files.len() < p + 1 {
        return Err(Error::InvalidInput(format!(
            "need at least {} annotations for p={p}, found {}",
            p + 1,
            files.len()
        )));
    }
    let mut shapes: Vec<LandmarkShape> = Vec::with_capacity(files.len());
    for f in &files {
        let shape = parse_annotation(&fs::read_to_string(f)?)
            .map_err(|e| Error::Format(format!("{}: {e}", f.display())))?;
        if let Some(first) = shapes.first() {
            if shape.len() != first.len() || shape.segment_starts() != first.segment_starts() {
                return Err(Error::InvalidInput(format!(
                    "{}: landmark layout differs from {}",
                    f.display(),
                    files[0].display()
                )));
            }
        }
        shapes.push(shape);
    }
    let (model, avg_scale) = train_pca(&shapes, p)?;
    let table = learn_length_intervals(&shapes, 20.0, 60.0, 5.0)?;
    let mut file = ModelFile::from_model(&model);
    file.avg_scale = Some(avg_scale);
    file.intervals = Some(table);
    save_model(out, &file)?;
    println!("trained on {} shapes, avg scale {avg_scale:.3}", shapes.len());
    for (i, l) in model.lambda().iter().enumerate() {
        println!("lambda_{}: {l:.6e}", i + 1);
    }
    Ok(())
}

/// Parse configuration derived from a model file's learned blocks, centered
/// on a width x height frame.
fn config_from_model(
    file: &ModelFile,
    model: &PcaShapeModel,
    width: f64,
    height: f64,
) -> Result<ParseConfig, Error> {
    let theta = file.params.as_ref().map(|p| p.theta.clone()).unwrap_or(ThetaParams {
        delta: 3.0,
        alpha: 0.04,
        rho: 4.0,
        r: 0.02,
        p: model.p(),
    });
    let mut cg = file.params.as_ref().map(|p| p.cg.clone()).unwrap_or_default();
    let deform = DeformationParams::uniform(
        model.n(),
        theta.alpha,
        0.1,
        15.0,
        1.0,
        model.segment_starts(),
    )?;
    // pose bounds around the training scale when known, otherwise permissive
    let prior = match file.avg_scale {
        Some(s) => TransformPriorParams {
            s_min: s * 0.5,
            s_max: s * 2.0,
            theta_max: 0.5,
            x_c: width / 2.0,
            y_c: height / 2.0,
            r: theta.r,
        },
        None => TransformPriorParams {
            s_min: 1e-9,
            s_max: 1e12,
            theta_max: std::f64::consts::PI,
            x_c: width / 2.0,
            y_c: height / 2.0,
            r: theta.r,
        },
    };
    if file.avg_scale.is_some() {
        cg.transform_gate = Some(prior);
    }
    Ok(ParseConfig {
        energy: EnergyParams {
            deform,
            delta: theta.delta,
            rho: theta.rho,
            transform_prior: prior,
            snap_tol: 1.5,
        },
        cg,
        fragment: FragmentParams::default(),
        subsample_step: 5.0,
        n_iter: 10,
        use_cg2: false,
    })
}

fn model_table(file: &ModelFile) -> Result<LengthIntervalTable, Error> {
    file.intervals
        .clone()
        .ok_or_else(|| Error::InvalidInput("model file lacks the length-interval table".into()))
}

fn cmd_parse(
    cloud_path: &Path,
    model_path: &Path,
    cg2: bool,
    jobs: Option<usize>,
    out: &Path,
    svg: Option<&Path>,
) -> Result<(), Error> {
    if let Some(n) = jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    }
    let file = load_model(model_path)?;
    let full = file.to_model()?;
    let table = model_table(&file)?;
    let cloud = load_cloud(cloud_path)?;
    let mut config =
        config_from_model(&file, &full, cloud.width() as f64, cloud.height() as f64)?;
    config.use_cg2 = cg2;
    let p_used = file.params.as_ref().map_or(full.p(), |p| p.theta.p);
    let model = full.truncated(p_used);
    let result = parse(&cloud, &model, &table, &config)?;
    fs::write(out, result_to_json(&result)?)?;
    if let Some(svg_path) = svg {
        let backbone = synthesize(&model, &result.inst)?;
        fs::write(svg_path, render_overlay(&cloud, &backbone, &result.contour)?)?;
    }
    println!("energy {:.6}, candidate {}", result.energy, result.candidate_index);
    Ok(())
}

fn cmd_synth(
    model_path: Option<&Path>,
    out: &Path,
    n_images: usize,
    dropout: f64,
    clutter: usize,
    seed: Option<u64>,
) -> Result<(), Error> {
    let model = match model_path {
        Some(p) => load_model(p)?.to_model()?,
        None => demo_model(48, 3, 3)?.0,
    };
    let env_seed = std::env::var("CLOUDPARSE_SEED").ok().and_then(|s| s.parse().ok());
    let spec = SyntheticSpec {
        n_images,
        dropout,
        clutter_chains: clutter,
        seed: seed.or(env_seed).unwrap_or(7),
        ..Default::default()
    };
    let suite = generate_suite(&model, &spec)?;
    fs::create_dir_all(out)?;
    for (i, img) in suite.iter().enumerate() {
        fs::write(out.join(format!("img_{i:03}.txt")), write_point_list(&img.cloud))?;
        fs::write(out.join(format!("img_{i:03}.ann")), write_annotation(&img.truth))?;
    }
    let manifest = serde_json::to_string_pretty(&spec)
        .map_err(|e| Error::Format(format!("manifest: {e}")))?;
    fs::write(out.join("manifest.json"), manifest + "\n")?;
    println!("wrote {} images to {}", suite.len(), out.display());
    Ok(())
}

fn cmd_eval(results: &Path, annotations: &Path, out: &Path) -> Result<(), Error> {
    let result_files = list_dir(results, Some("json"))?;
    let mut errors = Vec::new();
    let mut unmatched = Vec::new();
    for rf in &result_files {
        let stem = rf.file_stem().unwrap().to_string_lossy().to_string();
        let ann_path = annotations.join(format!("{stem}.ann"));
        if !ann_path.is_file() {
            unmatched.push(stem);
            continue;
        }
        let result = result_from_json(&fs::read_to_string(rf)?)?;
        let ann = parse_annotation(&fs::read_to_string(&ann_path)?)?;
        errors.push(avg_point_error(&result.contour, &ann)?);
    }
    if !unmatched.is_empty() {
        return Err(Error::InvalidInput(format!(
            "results without annotations: {}",
            unmatched.join(", ")
        )));
    }
    let report = EvalReport::from_errors(errors)?;
    fs::write(out, report_to_csv(&report))?;
    let plot = out.with_extension("svg");
    fs::write(&plot, render_sorted_errors(&report.sorted_curve)?)?;
    println!("mean {:.4} px, median {:.4} px over {} images", report.mean, report.median, report.per_image_errors.len());
    Ok(())
}

fn load_training_dir(dir: &Path) -> Result<Vec<TrainingExample>, Error> {
    let mut out = Vec::new();
    for ann_path in list_dir(dir, Some("ann"))? {
        let stem = ann_path.file_stem().unwrap().to_string_lossy().to_string();
        let cloud_path = ["txt", "pbm"]
            .iter()
            .map(|e| dir.join(format!("{stem}.{e}")))
            .find(|p| p.is_file())
            .ok_or_else(|| Error::InvalidInput(format!("no cloud file for {stem}")))?;
        out.push(TrainingExample {
            cloud: load_cloud(&cloud_path)?,
            annotation: parse_annotation(&fs::read_to_string(&ann_path)?)?,
        });
    }
    if out.is_empty() {
        return Err(Error::InvalidInput(format!("no training pairs in {}", dir.display())));
    }
    Ok(out)
}

fn cmd_learn(
    train: &Path,
    model_path: &Path,
    stage: &str,
    sweeps: usize,
    trace_path: &Path,
) -> Result<(), Error> {
    let mut file = load_model(model_path)?;
    let model = file.to_model()?;
    let table = model_table(&file)?;
    let training = load_training_dir(train)?;
    let (w, h) = (
        training[0].cloud.width() as f64,
        training[0].cloud.height() as f64,
    );
    let base = config_from_model(&file, &model, w, h)?;
    let mut params = file.params.clone().unwrap_or(ParamsBlock {
        cg: base.cg.clone(),
        theta: ThetaParams {
            delta: base.energy.delta,
            alpha: 0.04,
            rho: base.energy.rho,
            r: base.energy.transform_prior.r,
            p: model.p(),
        },
    });
    let traces = match stage {
        "cg1" => {
            let (cg, t) = learn_cg1(&training, &model, &table, &base, sweeps)?;
            params.cg = cg;
            vec![t]
        }
        "cg2" => {
            let (cg, t) = learn_cg2(&training, &model, &table, &base, sweeps)?;
            params.cg = cg;
            vec![t]
        }
        "theta" => {
            let (theta, t) = learn_theta(&training, &model, &table, &base, sweeps)?;
            params.theta = theta;
            vec![t]
        }
        "all" => {
            let learned = learn_all(&training, &model, &table, &base, sweeps)?;
            params.cg = learned.cg;
            params.theta = learned.theta;
            learned.stage_traces
        }
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown stage `{other}` (expected cg1|cg2|theta|all)"
            )))
        }
    };
    file.params = Some(params);
    save_model(model_path, &file)?;
    let mut csv = String::new();
    for t in &traces {
        csv.push_str(&trace_to_csv(t));
    }
    fs::write(trace_path, csv)?;
    println!("stage {stage} done; trace at {}", trace_path.display());
    Ok(())
}
