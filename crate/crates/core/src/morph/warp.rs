//! Per-triangle affine warping and the morph pipeline: warp both images to
//! the blended landmark positions over a shared mesh, then cross-dissolve.
//!
//! Warping is inverse-mapped: each destination pixel inside a mesh triangle
//! samples the source through the destination-to-source affine with
//! bilinear interpolation and edge clamping. Pixels outside every triangle
//! copy the source pixel.

use crate::error::{MiiError, Result};
use crate::morph::delaunay::{delaunay, TriangleMesh};
use crate::morph::landmarks::{blend, LandmarkSet, Point};
use crate::morph::raster::{RasterImage, CHANNELS};

/// Row-major 2x3 affine map: (x, y) -> (m[0]·(x,y,1), m[1]·(x,y,1)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineTransform {
    pub m: [[f64; 3]; 2],
}

impl AffineTransform {
    #[inline]
    pub fn apply(&self, p: Point) -> Point {
        (
            self.m[0][0] * p.0 + self.m[0][1] * p.1 + self.m[0][2],
            self.m[1][0] * p.0 + self.m[1][1] * p.1 + self.m[1][2],
        )
    }
}

/// The unique affine map sending the `src` triangle vertices onto `dst`,
/// solved by Cramer's rule on the 3x3 vertex system.
pub fn affine_from_triangles(src: &[Point; 3], dst: &[Point; 3]) -> Result<AffineTransform> {
    let det = (src[1].0 - src[0].0) * (src[2].1 - src[0].1)
        - (src[2].0 - src[0].0) * (src[1].1 - src[0].1);
    if det.abs() / 2.0 <= 1e-9 {
        return Err(MiiError::DegenerateTriangle);
    }
    let mut m = [[0.0; 3]; 2];
    for (row, out) in m.iter_mut().enumerate() {
        let f = |i: usize| if row == 0 { dst[i].0 } else { dst[i].1 };
        let a = ((f(1) - f(0)) * (src[2].1 - src[0].1) - (f(2) - f(0)) * (src[1].1 - src[0].1))
            / det;
        let b = ((f(2) - f(0)) * (src[1].0 - src[0].0) - (f(1) - f(0)) * (src[2].0 - src[0].0))
            / det;
        let c = f(0) - a * src[0].0 - b * src[0].1;
        *out = [a, b, c];
    }
    Ok(AffineTransform { m })
}

#[inline]
fn barycentric(a: Point, b: Point, c: Point, p: Point) -> Option<(f64, f64, f64)> {
    let det = (b.0 - a.0) * (c.1 - a.1) - (c.0 - a.0) * (b.1 - a.1);
    if det == 0.0 {
        return None;
    }
    let l1 = ((b.0 - p.0) * (c.1 - p.1) - (c.0 - p.0) * (b.1 - p.1)) / det;
    let l2 = ((c.0 - p.0) * (a.1 - p.1) - (a.0 - p.0) * (c.1 - p.1)) / det;
    Some((l1, l2, 1.0 - l1 - l2))
}

/// Warps `img` so features move from the `from` landmark positions to the
/// `to` positions over `mesh` (which must be built on `to`).
pub fn warp_to_mean(
    img: &RasterImage,
    from: &LandmarkSet,
    to: &LandmarkSet,
    mesh: &TriangleMesh,
) -> Result<RasterImage> {
    if from.len() != to.len() {
        return Err(MiiError::ShapeMismatch(format!(
            "landmark counts differ: {} vs {}",
            from.len(),
            to.len()
        )));
    }
    if mesh.vertices.as_slice() != to.points() {
        return Err(MiiError::InvalidParameter(
            "mesh vertices must be the destination landmarks".into(),
        ));
    }
    let mut out = img.clone();
    let width = img.width();
    let height = img.height();
    let inclusion_tol = -1e-9;
    for tri in &mesh.triangles {
        let dst = [
            to.points()[tri[0]],
            to.points()[tri[1]],
            to.points()[tri[2]],
        ];
        let src = [
            from.points()[tri[0]],
            from.points()[tri[1]],
            from.points()[tri[2]],
        ];
        let inverse = affine_from_triangles(&dst, &src)?;
        let min_x = dst.iter().map(|p| p.0).fold(f64::INFINITY, f64::min).floor().max(0.0) as usize;
        let max_x = dst.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max).ceil() as usize;
        let min_y = dst.iter().map(|p| p.1).fold(f64::INFINITY, f64::min).floor().max(0.0) as usize;
        let max_y = dst.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max).ceil() as usize;
        for y in min_y..=max_y.min(height - 1) {
            for x in min_x..=max_x.min(width - 1) {
                let p = (x as f64, y as f64);
                let Some((l1, l2, l3)) = barycentric(dst[0], dst[1], dst[2], p) else {
                    continue;
                };
                if l1 < inclusion_tol || l2 < inclusion_tol || l3 < inclusion_tol {
                    continue;
                }
                let (sx, sy) = inverse.apply(p);
                for c in 0..CHANNELS {
                    out.set(x, y, c, img.sample_bilinear(sx, sy, c));
                }
            }
        }
    }
    Ok(out)
}

/// Landmark-driven morph: blend the landmark sets, triangulate the blended
/// positions, warp both images onto them, and cross-dissolve with the same
/// alpha. `alpha = 0.5` is the averaged composite.
pub fn morph(
    p_img: &RasterImage,
    p_lms: &LandmarkSet,
    q_img: &RasterImage,
    q_lms: &LandmarkSet,
    alpha: f64,
) -> Result<RasterImage> {
    if p_img.width() != q_img.width() || p_img.height() != q_img.height() {
        return Err(MiiError::ShapeMismatch(format!(
            "image dimensions differ: {}x{} vs {}x{}",
            p_img.width(),
            p_img.height(),
            q_img.width(),
            q_img.height()
        )));
    }
    let mean = blend(p_lms, q_lms, alpha)?;
    let mesh = delaunay(mean.points())?;
    let warped_p = warp_to_mean(p_img, p_lms, &mean, &mesh)?;
    let warped_q = warp_to_mean(q_img, q_lms, &mean, &mesh)?;
    let data: Vec<f64> = warped_p
        .data()
        .iter()
        .zip(warped_q.data())
        .map(|(a, b)| (1.0 - alpha) * a + alpha * b)
        .collect();
    RasterImage::from_data(p_img.width(), p_img.height(), data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morph::landmarks::add_boundary_landmarks;

    fn checker(width: usize, height: usize, period: usize) -> RasterImage {
        let mut img = RasterImage::new(width, height).unwrap();
        for y in 0..height {
            for x in 0..width {
                let v = if (x / period + y / period) % 2 == 0 { 0.9 } else { 0.15 };
                for c in 0..CHANNELS {
                    img.set(x, y, c, v + 0.03 * c as f64);
                }
            }
        }
        img
    }

    fn spread_landmarks(width: usize, height: usize) -> LandmarkSet {
        let mut pts = Vec::new();
        for i in 0..68 {
            let gx = (i % 9) as f64 / 8.0;
            let gy = (i / 9) as f64 / 7.0;
            pts.push((
                4.0 + gx * (width as f64 - 9.0),
                4.0 + gy * (height as f64 - 9.0),
            ));
        }
        add_boundary_landmarks(&LandmarkSet::new(pts).unwrap(), width, height).unwrap()
    }

    #[test]
    fn affine_identity_translation_scale() {
        let t = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)];
        let id = affine_from_triangles(&t, &t).unwrap();
        assert_eq!(id.m, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);

        let shifted = [(5.0, -3.0), (6.0, -3.0), (5.0, -2.0)];
        let tr = affine_from_triangles(&t, &shifted).unwrap();
        assert_eq!(tr.m, [[1.0, 0.0, 5.0], [0.0, 1.0, -3.0]]);

        let doubled = [(0.0, 0.0), (2.0, 0.0), (0.0, 2.0)];
        let sc = affine_from_triangles(&t, &doubled).unwrap();
        assert_eq!(sc.m, [[2.0, 0.0, 0.0], [0.0, 2.0, 0.0]]);
    }

    #[test]
    fn affine_maps_vertices_exactly() {
        let src = [(3.0, 7.0), (91.5, 12.25), (40.0, 80.0)];
        let dst = [(10.0, 9.0), (70.0, 30.0), (35.5, 77.0)];
        let t = affine_from_triangles(&src, &dst).unwrap();
        for i in 0..3 {
            let (x, y) = t.apply(src[i]);
            assert!((x - dst[i].0).abs() < 1e-9);
            assert!((y - dst[i].1).abs() < 1e-9);
        }
    }

    #[test]
    fn affine_rejects_degenerate_triangles() {
        let line = [(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)];
        let t = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)];
        assert!(matches!(
            affine_from_triangles(&line, &t),
            Err(MiiError::DegenerateTriangle)
        ));
    }

    #[test]
    fn identity_warp_reproduces_image() {
        let img = checker(64, 64, 5);
        let lms = spread_landmarks(64, 64);
        let mesh = delaunay(lms.points()).unwrap();
        let out = warp_to_mean(&img, &lms, &lms, &mesh).unwrap();
        assert!(out.max_abs_diff(&img).unwrap() < 1e-6);
    }

    #[test]
    fn constant_image_is_warp_invariant() {
        let mut img = RasterImage::new(48, 48).unwrap();
        for y in 0..48 {
            for x in 0..48 {
                for c in 0..CHANNELS {
                    img.set(x, y, c, 0.42);
                }
            }
        }
        let a = spread_landmarks(48, 48);
        // Perturb the interior points to force a real warp.
        let mut moved: Vec<(f64, f64)> = a.points().to_vec();
        for p in moved.iter_mut().take(68) {
            p.0 = (p.0 + 3.5).min(46.0);
            p.1 = (p.1 - 2.5).max(1.0);
        }
        let b = LandmarkSet::new(moved).unwrap();
        let mesh = delaunay(b.points()).unwrap();
        let out = warp_to_mean(&img, &a, &b, &mesh).unwrap();
        assert!(out.max_abs_diff(&img).unwrap() < 1e-12);
    }

    #[test]
    fn self_morph_is_identity_for_any_alpha() {
        let img = checker(48, 48, 4);
        let lms = spread_landmarks(48, 48);
        for alpha in [0.0, 0.3, 0.5, 1.0] {
            let out = morph(&img, &lms, &img, &lms, alpha).unwrap();
            assert!(
                out.max_abs_diff(&img).unwrap() < 1e-6,
                "alpha {alpha} broke self-morph"
            );
        }
    }

    #[test]
    fn half_morph_is_symmetric_in_arguments() {
        let p = checker(48, 48, 4);
        let q = checker(48, 48, 7);
        let a = spread_landmarks(48, 48);
        let mut moved: Vec<(f64, f64)> = a.points().to_vec();
        for pt in moved.iter_mut().take(68) {
            pt.0 = (pt.0 * 0.93 + 2.0).min(46.0);
            pt.1 = (pt.1 * 1.04).min(46.0);
        }
        let b = LandmarkSet::new(moved).unwrap();
        let pq = morph(&p, &a, &q, &b, 0.5).unwrap();
        let qp = morph(&q, &b, &p, &a, 0.5).unwrap();
        assert!(pq.max_abs_diff(&qp).unwrap() < 1e-6);
    }

    #[test]
    fn mesh_vertices_are_exactly_the_blended_landmarks() {
        let a = spread_landmarks(32, 32);
        let mut moved: Vec<(f64, f64)> = a.points().to_vec();
        for pt in moved.iter_mut().take(68) {
            pt.1 = (pt.1 + 1.25).min(30.0);
        }
        let b = LandmarkSet::new(moved).unwrap();
        for alpha in [0.25, 0.5, 0.75] {
            let mean = blend(&a, &b, alpha).unwrap();
            let mesh = delaunay(mean.points()).unwrap();
            assert_eq!(mesh.vertices.as_slice(), mean.points());
        }
    }

    #[test]
    fn morph_output_stays_in_range() {
        let p = checker(40, 40, 3);
        let q = checker(40, 40, 6);
        let a = spread_landmarks(40, 40);
        let mut moved: Vec<(f64, f64)> = a.points().to_vec();
        for pt in moved.iter_mut().take(68) {
            pt.0 = (pt.0 + 4.0).min(38.0);
        }
        let b = LandmarkSet::new(moved).unwrap();
        let out = morph(&p, &a, &q, &b, 0.5).unwrap();
        assert!(out.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn translation_warp_matches_brute_force_oracle() {
        // Two-triangle mesh covering a square, destination shifted by a
        // known offset; oracle recomputes every pixel independently.
        let img = checker(8, 8, 2);
        let src_pts = vec![(0.0, 0.0), (7.0, 0.0), (7.0, 7.0), (0.0, 7.0)];
        let dst_pts = vec![(1.0, 0.5), (7.0, 0.5), (7.0, 6.5), (1.0, 6.5)];
        let from = LandmarkSet::new(src_pts.clone()).unwrap();
        let to = LandmarkSet::new(dst_pts.clone()).unwrap();
        let mesh = delaunay(to.points()).unwrap();
        let out = warp_to_mean(&img, &from, &to, &mesh).unwrap();

        // Oracle: for each pixel and triangle, inclusion by sign tests and
        // an independently solved inverse mapping via barycentric weights.
        let mut oracle = img.clone();
        for y in 0..8 {
            for x in 0..8 {
                let p = (x as f64, y as f64);
                for tri in &mesh.triangles {
                    let d = [dst_pts[tri[0]], dst_pts[tri[1]], dst_pts[tri[2]]];
                    let s = [src_pts[tri[0]], src_pts[tri[1]], src_pts[tri[2]]];
                    let Some((l1, l2, l3)) = barycentric(d[0], d[1], d[2], p) else {
                        continue;
                    };
                    if l1 < -1e-9 || l2 < -1e-9 || l3 < -1e-9 {
                        continue;
                    }
                    let sx = l1 * s[0].0 + l2 * s[1].0 + l3 * s[2].0;
                    let sy = l1 * s[0].1 + l2 * s[1].1 + l3 * s[2].1;
                    for c in 0..CHANNELS {
                        oracle.set(x, y, c, img.sample_bilinear(sx, sy, c));
                    }
                }
            }
        }
        assert!(out.max_abs_diff(&oracle).unwrap() < 1e-6);
    }
}
