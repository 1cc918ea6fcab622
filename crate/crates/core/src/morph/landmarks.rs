//! Landmark sets: 68 facial correspondence points consumed from files, plus
//! 20 generated boundary points so the triangulation covers the full frame.

use std::fs;
use std::path::Path;

use crate::error::{MiiError, Result};

pub type Point = (f64, f64);

/// Facial landmarks per face as produced by standard 68-point detectors.
pub const FACIAL_LANDMARKS: usize = 68;
/// Evenly spaced border points appended by [`add_boundary_landmarks`].
pub const BOUNDARY_LANDMARKS: usize = 20;

/// Ordered 2-D correspondence points, pixel coordinates, origin top-left.
/// Ordering is positional correspondence across images.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkSet {
    points: Vec<Point>,
}

impl LandmarkSet {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(MiiError::EmptyInput("landmark set"));
        }
        if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(MiiError::InvalidParameter(
                "landmarks must be finite".into(),
            ));
        }
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// All points inside [0, w-1] x [0, h-1]?
    pub fn within_bounds(&self, width: usize, height: usize) -> bool {
        self.points.iter().all(|&(x, y)| {
            x >= 0.0 && y >= 0.0 && x <= (width - 1) as f64 && y <= (height - 1) as f64
        })
    }

    /// Loads a JSON array of [x, y] pairs; files carry the 68 facial points.
    pub fn load_json<P: AsRef<Path>>(path: P) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let raw: Vec<[f64; 2]> = serde_json::from_str(&text)
            .map_err(|e| MiiError::Format(format!("bad landmark JSON: {e}")))?;
        if raw.len() != FACIAL_LANDMARKS {
            return Err(MiiError::Format(format!(
                "expected {} landmarks, got {}",
                FACIAL_LANDMARKS,
                raw.len()
            )));
        }
        Self::new(raw.into_iter().map(|[x, y]| (x, y)).collect())
    }

    pub fn save_json<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let raw: Vec<[f64; 2]> = self.points.iter().map(|&(x, y)| [x, y]).collect();
        let json =
            serde_json::to_string(&raw).map_err(|e| MiiError::Format(e.to_string()))?;
        fs::write(path, json + "\n")?;
        Ok(())
    }
}

/// Appends 20 evenly spaced border points to a 68-point facial set,
/// traversed clockwise from the top-left corner: 6 along the top, 4 down
/// the right, 6 along the bottom, 4 up the left, corners counted once.
pub fn add_boundary_landmarks(l: &LandmarkSet, width: usize, height: usize) -> Result<LandmarkSet> {
    if l.len() != FACIAL_LANDMARKS {
        return Err(MiiError::InvalidParameter(format!(
            "boundary augmentation expects {} facial landmarks, got {}",
            FACIAL_LANDMARKS,
            l.len()
        )));
    }
    if width < 2 || height < 2 {
        return Err(MiiError::InvalidParameter(
            "image must be at least 2x2 for boundary landmarks".into(),
        ));
    }
    let w = (width - 1) as f64;
    let h = (height - 1) as f64;
    let step_x = w / 5.0;
    let step_y = h / 5.0;
    let mut points = l.points.clone();
    // Top edge, both corners.
    for i in 0..=5 {
        points.push((i as f64 * step_x, 0.0));
    }
    // Right edge, corners excluded.
    for j in 1..=4 {
        points.push((w, j as f64 * step_y));
    }
    // Bottom edge right-to-left, both corners.
    for i in 0..=5 {
        points.push((w - i as f64 * step_x, h));
    }
    // Left edge bottom-to-top, corners excluded.
    for j in (1..=4).rev() {
        points.push((0.0, j as f64 * step_y));
    }
    LandmarkSet::new(points)
}

/// The (1−alpha)·a + alpha·b positional blend, pointwise.
pub fn blend(a: &LandmarkSet, b: &LandmarkSet, alpha: f64) -> Result<LandmarkSet> {
    if a.len() != b.len() {
        return Err(MiiError::ShapeMismatch(format!(
            "landmark counts differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(MiiError::InvalidParameter(format!(
            "alpha must be in [0, 1], got {alpha}"
        )));
    }
    let points = a
        .points
        .iter()
        .zip(&b.points)
        .map(|(&(ax, ay), &(bx, by))| {
            (
                (1.0 - alpha) * ax + alpha * bx,
                (1.0 - alpha) * ay + alpha * by,
            )
        })
        .collect();
    LandmarkSet::new(points)
}
