//! Delaunay triangulation via Bowyer-Watson incremental insertion.
//!
//! Strict in-circle classification keeps cocircular configurations stable; a
//! post-pass applies the documented degeneracy rule: among the two
//! triangulations of a cocircular quad, prefer the one whose diagonal
//! connects the lexicographically smallest vertex pair (points compared by
//! (x, y)).

use std::collections::BTreeMap;

use crate::error::{MiiError, Result};
use crate::morph::landmarks::Point;

/// Triangles are index triples into `vertices`; non-degenerate, interiors
/// disjoint, jointly covering the convex hull of the vertices.
#[derive(Debug, Clone)]
pub struct TriangleMesh {
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
}

const MIN_TRIANGLE_AREA: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
struct Tri {
    v: [usize; 3],
    center: Point,
    radius_sq: f64,
}

fn circumcircle(a: Point, b: Point, c: Point) -> Option<(Point, f64)> {
    let d = 2.0 * (a.0 * (b.1 - c.1) + b.0 * (c.1 - a.1) + c.0 * (a.1 - b.1));
    let scale = (a.0.abs() + a.1.abs() + b.0.abs() + b.1.abs() + c.0.abs() + c.1.abs()).max(1.0);
    if d.abs() < 1e-12 * scale * scale {
        return None;
    }
    let a2 = a.0 * a.0 + a.1 * a.1;
    let b2 = b.0 * b.0 + b.1 * b.1;
    let c2 = c.0 * c.0 + c.1 * c.1;
    let ux = (a2 * (b.1 - c.1) + b2 * (c.1 - a.1) + c2 * (a.1 - b.1)) / d;
    let uy = (a2 * (c.0 - b.0) + b2 * (a.0 - c.0) + c2 * (b.0 - a.0)) / d;
    let dx = a.0 - ux;
    let dy = a.1 - uy;
    Some(((ux, uy), dx * dx + dy * dy))
}

fn dist_sq(a: Point, b: Point) -> f64 {
    let dx = a.0 - b.0;
    let dy = a.1 - b.1;
    dx * dx + dy * dy
}

fn signed_area2(a: Point, b: Point, c: Point) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

/// Strictly inside the circumcircle: margins proportional to the squared
/// radius absorb floating-point drift, so on-circle points stay outside.
#[inline]
fn strictly_in_circle(t: &Tri, p: Point) -> bool {
    dist_sq(p, t.center) < t.radius_sq * (1.0 - 1e-12)
}

fn point_in_triangle(a: Point, b: Point, c: Point, p: Point) -> bool {
    let s1 = signed_area2(a, b, p);
    let s2 = signed_area2(b, c, p);
    let s3 = signed_area2(c, a, p);
    let tol = 1e-9;
    (s1 >= -tol && s2 >= -tol && s3 >= -tol) || (s1 <= tol && s2 <= tol && s3 <= tol)
}

/// Delaunay triangulation of at least three non-collinear, pairwise
/// distinct points. Deterministic: fixed insertion order plus the
/// documented cocircular tie rule.
pub fn delaunay(points: &[Point]) -> Result<TriangleMesh> {
    if points.len() < 3 {
        return Err(MiiError::BadPointSet("need at least 3 points"));
    }
    for &(x, y) in points {
        if !x.is_finite() || !y.is_finite() {
            return Err(MiiError::BadPointSet("points must be finite"));
        }
    }
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            if dist_sq(points[i], points[j]) < 1e-18 {
                return Err(MiiError::BadPointSet("duplicate points"));
            }
        }
    }
    let collinear = {
        let (p0, p1) = (points[0], points[1]);
        !points[2..]
            .iter()
            .any(|&p| signed_area2(p0, p1, p).abs() > 1e-9)
    };
    if collinear {
        return Err(MiiError::BadPointSet("all points collinear"));
    }

    // Vertices: the inputs plus three far-away super-triangle corners.
    let (mut min_x, mut min_y, mut max_x, mut max_y) =
        (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points {
        min_x = min_x.min(x);
        min_y = min_y.min(y);
        max_x = max_x.max(x);
        max_y = max_y.max(y);
    }
    let cx = 0.5 * (min_x + max_x);
    let cy = 0.5 * (min_y + max_y);
    let span = ((max_x - min_x).max(max_y - min_y)).max(1.0);
    let big = 1e4 * span;
    let mut verts: Vec<Point> = points.to_vec();
    let s0 = verts.len();
    verts.push((cx, cy + 2.0 * big));
    verts.push((cx - 3f64.sqrt() * big, cy - big));
    verts.push((cx + 3f64.sqrt() * big, cy - big));

    let make_tri = |v: [usize; 3], verts: &[Point]| -> Result<Tri> {
        let (c, rr) = circumcircle(verts[v[0]], verts[v[1]], verts[v[2]]).ok_or(
            MiiError::BadPointSet("degenerate triangle during insertion"),
        )?;
        Ok(Tri {
            v,
            center: c,
            radius_sq: rr,
        })
    };

    let mut tris = vec![make_tri([s0, s0 + 1, s0 + 2], &verts)?];
    for (pi, &p) in points.iter().enumerate() {
        let mut bad: Vec<usize> = (0..tris.len())
            .filter(|&t| strictly_in_circle(&tris[t], p))
            .collect();
        if bad.is_empty() {
            // On-circle ties can leave the strict test empty; the containing
            // triangle is always a valid cavity.
            let containing = (0..tris.len()).find(|&t| {
                let tv = tris[t].v;
                point_in_triangle(verts[tv[0]], verts[tv[1]], verts[tv[2]], p)
            });
            match containing {
                Some(t) => bad.push(t),
                None => return Err(MiiError::BadPointSet("insertion point outside hull")),
            }
        }
        // Cavity boundary: edges of bad triangles seen exactly once.
        let mut edges: Vec<(usize, usize)> = Vec::with_capacity(bad.len() * 3);
        for &t in &bad {
            let v = tris[t].v;
            for (a, b) in [(v[0], v[1]), (v[1], v[2]), (v[2], v[0])] {
                edges.push(if a < b { (a, b) } else { (b, a) });
            }
        }
        edges.sort_unstable();
        let mut boundary = Vec::new();
        let mut i = 0;
        while i < edges.len() {
            if i + 1 < edges.len() && edges[i] == edges[i + 1] {
                i += 2;
            } else {
                boundary.push(edges[i]);
                i += 1;
            }
        }
        bad.sort_unstable_by(|a, b| b.cmp(a));
        for t in bad {
            tris.swap_remove(t);
        }
        for (a, b) in boundary {
            tris.push(make_tri([pi, a, b], &verts)?);
        }
    }

    // Drop super-triangle incidents and normalize ordering.
    let mut triangles: Vec<[usize; 3]> = tris
        .iter()
        .filter(|t| t.v.iter().all(|&v| v < s0))
        .map(|t| {
            let mut v = t.v;
            v.sort_unstable();
            v
        })
        .collect();
    triangles.retain(|v| {
        signed_area2(points[v[0]], points[v[1]], points[v[2]]).abs() / 2.0 > MIN_TRIANGLE_AREA
    });
    triangles.sort_unstable();
    apply_cocircular_tie_rule(points, &mut triangles);
    validate_mesh(points, &triangles)?;
    Ok(TriangleMesh {
        vertices: points.to_vec(),
        triangles,
    })
}

/// For each cocircular interior quad, flip the shared diagonal if the
/// alternative connects a lexicographically smaller vertex pair.
fn apply_cocircular_tie_rule(points: &[Point], triangles: &mut Vec<[usize; 3]>) {
    let pair_key = |a: usize, b: usize| -> (Point, Point) {
        let (pa, pb) = (points[a], points[b]);
        if (pa.0, pa.1) <= (pb.0, pb.1) {
            (pa, pb)
        } else {
            (pb, pa)
        }
    };
    for _round in 0..8 {
        let mut adjacency: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (ti, t) in triangles.iter().enumerate() {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[0], t[2])] {
                adjacency.entry((a, b)).or_default().push(ti);
            }
        }
        let mut flips: Vec<(usize, usize, [usize; 3], [usize; 3])> = Vec::new();
        let mut touched = vec![false; triangles.len()];
        for (&(a, b), ts) in &adjacency {
            if ts.len() != 2 || touched[ts[0]] || touched[ts[1]] {
                continue;
            }
            let (t1, t2) = (ts[0], ts[1]);
            let c = *triangles[t1].iter().find(|v| **v != a && **v != b).expect("third vertex");
            let d = *triangles[t2].iter().find(|v| **v != a && **v != b).expect("third vertex");
            let Some((center, rr)) = circumcircle(points[a], points[b], points[c]) else {
                continue;
            };
            let r = rr.sqrt();
            let dd = dist_sq(points[d], center).sqrt();
            if (dd - r).abs() > 1e-9 * (1.0 + r) {
                continue;
            }
            // Flip only when it improves the tie rule and stays valid.
            if pair_key(c, d) < pair_key(a, b)
                && signed_area2(points[c], points[d], points[a]).abs() / 2.0 > MIN_TRIANGLE_AREA
                && signed_area2(points[c], points[d], points[b]).abs() / 2.0 > MIN_TRIANGLE_AREA
                && opposite_sides(points[a], points[b], points[c], points[d])
            {
                let mut n1 = [c, d, a];
                let mut n2 = [c, d, b];
                n1.sort_unstable();
                n2.sort_unstable();
                flips.push((t1, t2, n1, n2));
                touched[t1] = true;
                touched[t2] = true;
            }
        }
        if flips.is_empty() {
            break;
        }
        for (t1, t2, n1, n2) in flips {
            triangles[t1] = n1;
            triangles[t2] = n2;
        }
        triangles.sort_unstable();
    }
}

/// c and d strictly on opposite sides of line ab (the quad is convex at the
/// shared edge, so the flip produces a valid pair of triangles).
fn opposite_sides(a: Point, b: Point, c: Point, d: Point) -> bool {
    let sc = signed_area2(a, b, c);
    let sd = signed_area2(a, b, d);
    sc * sd < 0.0
}

/// Postcondition check: non-degenerate triangles and the empty-circumcircle
/// property for every triangle against every other vertex.
fn validate_mesh(points: &[Point], triangles: &[[usize; 3]]) -> Result<()> {
    if triangles.is_empty() {
        return Err(MiiError::BadPointSet("triangulation produced no triangles"));
    }
    for t in triangles {
        let (a, b, c) = (points[t[0]], points[t[1]], points[t[2]]);
        if signed_area2(a, b, c).abs() / 2.0 <= MIN_TRIANGLE_AREA {
            return Err(MiiError::BadPointSet("degenerate output triangle"));
        }
        let (center, rr) =
            circumcircle(a, b, c).ok_or(MiiError::BadPointSet("degenerate output triangle"))?;
        let r = rr.sqrt();
        for (pi, &p) in points.iter().enumerate() {
            if t.contains(&pi) {
                continue;
            }
            if dist_sq(p, center).sqrt() < r - 1e-7 {
                return Err(MiiError::BadPointSet(
                    "empty-circumcircle property violated",
                ));
            }
        }
    }
    Ok(())
}
