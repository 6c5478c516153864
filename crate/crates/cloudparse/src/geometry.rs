//! 2D value types: points, landmark shapes and similarity transforms.

use serde::{Deserialize, Serialize};
use std::ops::Range;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn dist(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn sub(&self, other: &Point2) -> Point2 {
        Point2::new(self.x - other.x, self.y - other.y)
    }

    pub fn add(&self, other: &Point2) -> Point2 {
        Point2::new(self.x + other.x, self.y + other.y)
    }

    pub fn scaled(&self, c: f64) -> Point2 {
        Point2::new(self.x * c, self.y * c)
    }

    pub fn dot(&self, other: &Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// 90 degree counter-clockwise rotation.
    pub fn perp_ccw(&self) -> Point2 {
        Point2::new(-self.y, self.x)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Wrap an angle into (-pi, pi].
pub fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * std::f64::consts::PI);
    if t > std::f64::consts::PI {
        t - 2.0 * std::f64::consts::PI
    } else {
        t
    }
}

/// Global pose: translation (u, v), uniform scale s > 0 and rotation theta.
///
/// The point mapping is
/// `A(x, y) = (s x cos t + s y sin t + u, -s x sin t + s y cos t + v)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityTransform {
    pub u: f64,
    pub v: f64,
    pub s: f64,
    pub theta: f64,
}

impl SimilarityTransform {
    pub fn new(u: f64, v: f64, s: f64, theta: f64) -> Result<Self> {
        if !(u.is_finite() && v.is_finite() && s.is_finite() && theta.is_finite()) {
            return Err(Error::InvalidInput("non-finite transform parameters".into()));
        }
        if s <= 0.0 {
            return Err(Error::InvalidInput(format!("scale must be positive, got {s}")));
        }
        Ok(SimilarityTransform { u, v, s, theta: normalize_angle(theta) })
    }

    pub fn identity() -> Self {
        SimilarityTransform { u: 0.0, v: 0.0, s: 1.0, theta: 0.0 }
    }

    pub fn apply(&self, p: Point2) -> Point2 {
        let (sin, cos) = self.theta.sin_cos();
        Point2::new(
            self.s * p.x * cos + self.s * p.y * sin + self.u,
            -self.s * p.x * sin + self.s * p.y * cos + self.v,
        )
    }

    pub fn inverse(&self) -> Result<Self> {
        if self.s <= 0.0 {
            return Err(Error::InvalidInput("cannot invert transform with s <= 0".into()));
        }
        let (sin, cos) = self.theta.sin_cos();
        // Forward map is p' = s R p + t with R = [[c, s],[-s, c]]; the inverse
        // is (1/s) R^T (p' - t).
        let u = -(cos * self.u - sin * self.v) / self.s;
        let v = -(sin * self.u + cos * self.v) / self.s;
        SimilarityTransform::new(u, v, 1.0 / self.s, -self.theta)
    }
}

/// Ordered landmark list with explicit contour-segment boundaries.
///
/// Both the parse result and the PCA shape use this representation; multiple
/// contour segments are concatenated into a single point list, with
/// `segment_starts` marking the first landmark of each segment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandmarkShape {
    points: Vec<Point2>,
    segment_starts: Vec<usize>,
}

impl LandmarkShape {
    pub fn new(points: Vec<Point2>, segment_starts: Vec<usize>) -> Result<Self> {
        let n = points.len();
        if n < 2 {
            return Err(Error::InvalidInput(format!("shape needs >= 2 points, got {n}")));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidInput("non-finite landmark coordinates".into()));
        }
        if segment_starts.first() != Some(&0) {
            return Err(Error::InvalidInput("segment_starts must begin with 0".into()));
        }
        for w in segment_starts.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidInput("segment_starts must be strictly increasing".into()));
            }
            if w[1] - w[0] < 2 {
                return Err(Error::InvalidInput("every segment needs >= 2 points".into()));
            }
        }
        let last = *segment_starts.last().unwrap();
        if last >= n || n - last < 2 {
            return Err(Error::InvalidInput("trailing segment needs >= 2 points".into()));
        }
        Ok(LandmarkShape { points, segment_starts })
    }

    /// Single-segment shape.
    pub fn single(points: Vec<Point2>) -> Result<Self> {
        LandmarkShape::new(points, vec![0])
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn segment_starts(&self) -> &[usize] {
        &self.segment_starts
    }

    pub fn num_segments(&self) -> usize {
        self.segment_starts.len()
    }

    /// Landmark index ranges, one per contour segment.
    pub fn segments(&self) -> Vec<Range<usize>> {
        let mut out = Vec::with_capacity(self.segment_starts.len());
        for (k, &s) in self.segment_starts.iter().enumerate() {
            let end = if k + 1 < self.segment_starts.len() {
                self.segment_starts[k + 1]
            } else {
                self.points.len()
            };
            out.push(s..end);
        }
        out
    }

    pub fn same_structure(&self, other: &LandmarkShape) -> bool {
        self.points.len() == other.points.len() && self.segment_starts == other.segment_starts
    }

    pub fn point(&self, i: usize) -> Point2 {
        self.points[i]
    }
}

/// Map every landmark through `a`; segment structure is preserved.
pub fn apply_transform(a: &SimilarityTransform, pts: &LandmarkShape) -> LandmarkShape {
    LandmarkShape {
        points: pts.points.iter().map(|&p| a.apply(p)).collect(),
        segment_starts: pts.segment_starts.clone(),
    }
}

/// Unit normals along the shape, one per landmark.
///
/// Interior landmarks use the central difference of their segment neighbors,
/// segment endpoints use one-sided differences; the normal is the tangent
/// rotated 90 degrees counter-clockwise. A degenerate tangent reuses the
/// previous landmark's normal; a degenerate first landmark is an error.
pub fn shape_normals(shape: &LandmarkShape) -> Result<Vec<Point2>> {
    let pts = shape.points();
    let mut normals: Vec<Point2> = Vec::with_capacity(pts.len());
    for range in shape.segments() {
        for i in range.clone() {
            let tangent = if i == range.start {
                pts[i + 1].sub(&pts[i])
            } else if i + 1 == range.end {
                pts[i].sub(&pts[i - 1])
            } else {
                pts[i + 1].sub(&pts[i - 1])
            };
            let len = tangent.norm();
            if len < 1e-12 {
                match normals.last() {
                    Some(&prev) => normals.push(prev),
                    None => {
                        return Err(Error::Degenerate(
                            "coincident points at the first landmark".into(),
                        ))
                    }
                }
            } else {
                normals.push(tangent.perp_ccw().scaled(1.0 / len));
            }
        }
    }
    Ok(normals)
}

/// Mean point-to-point Euclidean distance between corresponding landmarks.
pub fn avg_point_error(a: &LandmarkShape, b: &LandmarkShape) -> Result<f64> {
    if !a.same_structure(b) {
        return Err(Error::DimensionMismatch(format!(
            "shapes differ in structure: {} vs {} points",
            a.len(),
            b.len()
        )));
    }
    let sum: f64 = a.points.iter().zip(&b.points).map(|(p, q)| p.dist(q)).sum();
    Ok(sum / a.len() as f64)
}
