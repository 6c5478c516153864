//! File formats: PBM and point-list clouds, chain dumps, landmark
//! annotations, model and result JSON, and the CSV reports.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::candidates::{CgParams, LengthIntervalTable};
use crate::error::{Error, Result};
use crate::geometry::{LandmarkShape, Point2};
use crate::learning::{ThetaParams, TraceEntry};
use crate::pipeline::ParseResult;
use crate::preprocess::{Chain, PointCloud};
use crate::shape_model::PcaShapeModel;

/// Parse a plain (P1) PBM bitmap; set bits are cloud points.
pub fn parse_pbm(text: &str) -> Result<PointCloud> {
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split_whitespace())
        .map(str::to_owned)
        .collect::<Vec<_>>()
        .into_iter();
    if tokens.next().as_deref() != Some("P1") {
        return Err(Error::Format("expected PBM magic `P1`".into()));
    }
    let dim = |t: Option<String>| -> Result<i32> {
        t.ok_or_else(|| Error::Format("truncated PBM header".into()))?
            .parse()
            .map_err(|_| Error::Format("bad PBM dimension".into()))
    };
    let width = dim(tokens.next())?;
    let height = dim(tokens.next())?;
    let mut points = Vec::new();
    let mut i = 0usize;
    for tok in tokens {
        // P1 bodies may pack bits without separators
        for ch in tok.chars() {
            let (x, y) = ((i % width.max(1) as usize) as i32, (i / width.max(1) as usize) as i32);
            match ch {
                '1' => points.push((x, y)),
                '0' => {}
                _ => return Err(Error::Format(format!("bad PBM bit `{ch}`"))),
            }
            i += 1;
        }
    }
    if i != (width as usize) * (height as usize) {
        return Err(Error::Format(format!(
            "PBM bit count {i} does not match {width}x{height}"
        )));
    }
    PointCloud::new(width, height, points)
}

/// Render a cloud as plain PBM.
pub fn write_pbm(cloud: &PointCloud) -> String {
    let (w, h) = (cloud.width(), cloud.height());
    let mut grid = vec![b'0'; (w * h) as usize];
    for &(x, y) in cloud.points() {
        grid[(y * w + x) as usize] = b'1';
    }
    let mut out = format!("P1\n{w} {h}\n");
    for y in 0..h {
        let row = &grid[(y * w) as usize..((y + 1) * w) as usize];
        out.push_str(std::str::from_utf8(row).unwrap());
        out.push('\n');
    }
    out
}

/// Parse a `POINTS <n> <width> <height>` list of integer `x y` pairs.
pub fn parse_point_list(text: &str) -> Result<PointCloud> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Format("empty point list".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 || fields[0] != "POINTS" {
        return Err(Error::Format("expected header `POINTS <n> <width> <height>`".into()));
    }
    let parse_int = |s: &str| -> Result<i64> {
        s.parse().map_err(|_| Error::Format(format!("bad integer `{s}`")))
    };
    let n = parse_int(fields[1])? as usize;
    let width = parse_int(fields[2])? as i32;
    let height = parse_int(fields[3])? as i32;
    let mut points = Vec::with_capacity(n);
    for line in lines {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 2 {
            return Err(Error::Format(format!("bad point line `{line}`")));
        }
        points.push((parse_int(f[0])? as i32, parse_int(f[1])? as i32));
    }
    if points.len() != n {
        return Err(Error::Format(format!("expected {n} points, found {}", points.len())));
    }
    PointCloud::new(width, height, points)
}

/// Render a cloud as a point list.
pub fn write_point_list(cloud: &PointCloud) -> String {
    let mut out =
        format!("POINTS {} {} {}\n", cloud.len(), cloud.width(), cloud.height());
    for &(x, y) in cloud.points() {
        out.push_str(&format!("{x} {y}\n"));
    }
    out
}

/// Load a cloud from disk, dispatching on the `.pbm` extension.
pub fn load_cloud(path: &Path) -> Result<PointCloud> {
    let text = fs::read_to_string(path)?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pbm")) {
        parse_pbm(&text)
    } else {
        parse_point_list(&text)
    }
}

/// Render traced chains as `CHAIN <id>` blocks of `x y` lines.
pub fn write_chains(chains: &[Chain]) -> String {
    let mut out = String::new();
    for c in chains {
        out.push_str(&format!("CHAIN {}\n", c.id));
        for &(x, y) in &c.pixels {
            out.push_str(&format!("{x} {y}\n"));
        }
    }
    out
}

/// Parse a `LANDMARKS <N> <num_segments>` annotation.
pub fn parse_annotation(text: &str) -> Result<LandmarkShape> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Format("empty annotation".into()))?;
    let f: Vec<&str> = header.split_whitespace().collect();
    if f.len() != 3 || f[0] != "LANDMARKS" {
        return Err(Error::Format("expected header `LANDMARKS <N> <num_segments>`".into()));
    }
    let n: usize = f[1].parse().map_err(|_| Error::Format("bad landmark count".into()))?;
    let num_segments: usize =
        f[2].parse().map_err(|_| Error::Format("bad segment count".into()))?;
    let mut starts = Vec::with_capacity(num_segments);
    for _ in 0..num_segments {
        let line = lines.next().ok_or_else(|| Error::Format("missing SEGMENT line".into()))?;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 2 || f[0] != "SEGMENT" {
            return Err(Error::Format(format!("bad segment line `{line}`")));
        }
        starts.push(f[1].parse().map_err(|_| Error::Format("bad segment start".into()))?);
    }
    let mut points = Vec::with_capacity(n);
    for line in lines {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 2 {
            return Err(Error::Format(format!("bad landmark line `{line}`")));
        }
        let parse_real = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| Error::Format(format!("bad coordinate `{s}`")))
        };
        points.push(Point2::new(parse_real(f[0])?, parse_real(f[1])?));
    }
    if points.len() != n {
        return Err(Error::Format(format!("expected {n} landmarks, found {}", points.len())));
    }
    LandmarkShape::new(points, starts)
}

/// Render an annotation; coordinates keep full f64 round-trip precision.
pub fn write_annotation(shape: &LandmarkShape) -> String {
    let mut out = format!("LANDMARKS {} {}\n", shape.len(), shape.segment_starts().len());
    for s in shape.segment_starts() {
        out.push_str(&format!("SEGMENT {s}\n"));
    }
    for p in shape.points() {
        out.push_str(&format!("{:?} {:?}\n", p.x, p.y));
    }
    out
}

/// Learned parameters carried inside the model file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParamsBlock {
    pub cg: CgParams,
    pub theta: ThetaParams,
}

/// JSON-serializable model with optional learned extras.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelFile {
    pub n: usize,
    pub p: usize,
    pub segment_starts: Vec<usize>,
    pub mu_x: Vec<f64>,
    pub mu_y: Vec<f64>,
    /// Row-major n x p.
    pub px: Vec<f64>,
    pub py: Vec<f64>,
    pub lambda: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub avg_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intervals: Option<LengthIntervalTable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsBlock>,
}

impl ModelFile {
    pub fn from_model(model: &PcaShapeModel) -> Self {
        let (n, p) = (model.n(), model.p());
        let flat = |m: &DMatrix<f64>| {
            let mut v = Vec::with_capacity(n * p);
            for i in 0..n {
                for j in 0..p {
                    v.push(m[(i, j)]);
                }
            }
            v
        };
        ModelFile {
            n,
            p,
            segment_starts: model.segment_starts().to_vec(),
            mu_x: model.mu_x().iter().copied().collect(),
            mu_y: model.mu_y().iter().copied().collect(),
            px: flat(model.px()),
            py: flat(model.py()),
            lambda: model.lambda().to_vec(),
            avg_scale: None,
            intervals: None,
            params: None,
        }
    }

    pub fn to_model(&self) -> Result<PcaShapeModel> {
        if self.mu_x.len() != self.n
            || self.mu_y.len() != self.n
            || self.px.len() != self.n * self.p
            || self.py.len() != self.n * self.p
            || self.lambda.len() != self.p
        {
            return Err(Error::Format("model file part sizes disagree".into()));
        }
        let unflat = |v: &[f64]| DMatrix::from_fn(self.n, self.p, |i, j| v[i * self.p + j]);
        PcaShapeModel::from_parts(
            DVector::from_vec(self.mu_x.clone()),
            DVector::from_vec(self.mu_y.clone()),
            unflat(&self.px),
            unflat(&self.py),
            self.lambda.clone(),
            self.segment_starts.clone(),
        )
    }
}

pub fn save_model(path: &Path, file: &ModelFile) -> Result<()> {
    let json = serde_json::to_string_pretty(file)
        .map_err(|e| Error::Format(format!("model serialization: {e}")))?;
    fs::write(path, json + "\n")?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<ModelFile> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("model file: {e}")))
}

pub fn result_to_json(result: &ParseResult) -> Result<String> {
    serde_json::to_string_pretty(result)
        .map(|s| s + "\n")
        .map_err(|e| Error::Format(format!("result serialization: {e}")))
}

pub fn result_from_json(text: &str) -> Result<ParseResult> {
    serde_json::from_str(text).map_err(|e| Error::Format(format!("result file: {e}")))
}

/// Per-image errors with the summary statistics the report carries.
#[derive(Clone, Debug, Serialize)]
pub struct EvalReport {
    pub per_image_errors: Vec<f64>,
    pub mean: f64,
    pub median: f64,
    /// Errors in non-decreasing order.
    pub sorted_curve: Vec<f64>,
}

impl EvalReport {
    pub fn from_errors(per_image_errors: Vec<f64>) -> Result<Self> {
        if per_image_errors.is_empty() {
            return Err(Error::InvalidInput("no errors to report".into()));
        }
        let mut sorted = per_image_errors.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = sorted.len();
        let mean = sorted.iter().sum::<f64>() / n as f64;
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        };
        Ok(EvalReport { per_image_errors, mean, median, sorted_curve: sorted })
    }
}

/// Report CSV: per-image rows, then summary rows.
pub fn report_to_csv(report: &EvalReport) -> String {
    let mut out = String::from("index,error\n");
    for (i, e) in report.per_image_errors.iter().enumerate() {
        out.push_str(&format!("{i},{e:?}\n"));
    }
    out.push_str(&format!("mean,{:?}\n", report.mean));
    out.push_str(&format!("median,{:?}\n", report.median));
    out
}

/// Loss-trace CSV with the `sweep,param,value,loss` layout.
pub fn trace_to_csv(trace: &[TraceEntry]) -> String {
    let mut out = String::from("sweep,param,value,loss\n");
    for t in trace {
        out.push_str(&format!("{},{},{:?},{:?}\n", t.sweep, t.param, t.value, t.loss));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn pbm_round_trip() {
        let cloud =
            PointCloud::new(5, 3, vec![(0, 0), (4, 2), (2, 1)]).unwrap();
        let text = write_pbm(&cloud);
        let back = parse_pbm(&text).unwrap();
        assert_eq!(back.points(), cloud.points());
        assert_eq!((back.width(), back.height()), (5, 3));
    }

    #[test]
    fn pbm_rejects_malformed() {
        assert!(parse_pbm("P4\n2 2\n0000").is_err());
        assert!(parse_pbm("P1\n2 2\n001").is_err()); // short body
        assert!(parse_pbm("P1\n2 2\n00x0").is_err());
    }

    #[test]
    fn pbm_accepts_comments_and_packed_bits() {
        let cloud = parse_pbm("P1\n# comment\n3 2\n010\n101\n").unwrap();
        assert_eq!(cloud.points(), &[(1, 0), (0, 1), (2, 1)]);
    }

    #[test]
    fn point_list_round_trip() {
        let cloud = PointCloud::new(10, 10, vec![(3, 4), (0, 0), (9, 9)]).unwrap();
        let text = write_point_list(&cloud);
        assert!(text.starts_with("POINTS 3 10 10\n"));
        let back = parse_point_list(&text).unwrap();
        assert_eq!(back.points(), cloud.points());
    }

    #[test]
    fn point_list_rejects_bad_counts() {
        assert!(parse_point_list("POINTS 2 5 5\n1 1\n").is_err());
        assert!(parse_point_list("POINTS 1 5 5\n1 1\n2 2\n").is_err());
        assert!(parse_point_list("NOPE 1 5 5\n1 1\n").is_err());
    }

    #[test]
    fn chains_text_layout() {
        let chains = vec![
            Chain { id: 0, pixels: vec![(1, 2), (2, 2)], subsample_indices: vec![] },
            Chain { id: 3, pixels: vec![(5, 5)], subsample_indices: vec![] },
        ];
        assert_eq!(write_chains(&chains), "CHAIN 0\n1 2\n2 2\nCHAIN 3\n5 5\n");
    }

    #[test]
    fn annotation_round_trip_is_lossless() {
        let pts = vec![
            Point2::new(1.0 / 3.0, -2.5e-13),
            Point2::new(std::f64::consts::PI, 7.0),
            Point2::new(-0.1, 0.2),
            Point2::new(3.0, 4.0),
        ];
        let shape = LandmarkShape::new(pts, vec![0, 2]).unwrap();
        let text = write_annotation(&shape);
        let back = parse_annotation(&text).unwrap();
        assert_eq!(back.segment_starts(), shape.segment_starts());
        for (a, b) in back.points().iter().zip(shape.points()) {
            assert_eq!(a.x.to_bits(), b.x.to_bits());
            assert_eq!(a.y.to_bits(), b.y.to_bits());
        }
    }

    #[test]
    fn model_json_round_trip_is_lossless() {
        let (model, _) = crate::shape_model::test_fixtures::tiny_model();
        let file = ModelFile::from_model(&model);
        let json = serde_json::to_string(&file).unwrap();
        let back: ModelFile = serde_json::from_str(&json).unwrap();
        let restored = back.to_model().unwrap();
        assert_eq!(restored.n(), model.n());
        assert_eq!(restored.p(), model.p());
        for j in 0..model.p() {
            assert_eq!(restored.lambda()[j].to_bits(), model.lambda()[j].to_bits());
            for i in 0..model.n() {
                assert_eq!(restored.px()[(i, j)].to_bits(), model.px()[(i, j)].to_bits());
                assert_eq!(restored.py()[(i, j)].to_bits(), model.py()[(i, j)].to_bits());
            }
        }
    }

    #[test]
    fn model_file_size_validation() {
        let (model, _) = crate::shape_model::test_fixtures::tiny_model();
        let mut file = ModelFile::from_model(&model);
        file.px.pop();
        assert!(file.to_model().is_err());
    }

    #[test]
    fn report_statistics() {
        let r = EvalReport::from_errors(vec![3.0, 1.0, 2.0]).unwrap();
        assert_abs_diff_eq!(r.mean, 2.0);
        assert_abs_diff_eq!(r.median, 2.0);
        assert_eq!(r.sorted_curve, vec![1.0, 2.0, 3.0]);
        for w in r.sorted_curve.windows(2) {
            assert!(w[1] >= w[0]);
        }
        let even = EvalReport::from_errors(vec![4.0, 1.0]).unwrap();
        assert_abs_diff_eq!(even.median, 2.5);
    }

    #[test]
    fn trace_csv_layout() {
        let trace = vec![
            TraceEntry { sweep: 0, param: "init".into(), value: 0.0, loss: 5.0 },
            TraceEntry { sweep: 1, param: "delta".into(), value: 2.5, loss: 4.0 },
        ];
        let csv = trace_to_csv(&trace);
        assert_eq!(csv, "sweep,param,value,loss\n0,init,0.0,5.0\n1,delta,2.5,4.0\n");
    }
}
