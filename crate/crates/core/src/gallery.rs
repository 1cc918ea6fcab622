//! Gallery-search MII generation: find the gallery embedding minimizing the
//! MII distance to both references.
//!
//! The exact search scans every member. For desk-scale galleries (10⁶–10⁷)
//! an angular k-means coarse index prunes the scan: centroids are probed in
//! ascending order of their max angle to the two references, which aligns
//! the probe order with the objective, and cached member-to-centroid angles
//! give a triangle-inequality bound that skips hopeless members.

use std::path::Path;

use crate::error::{MiiError, Result};
use crate::eval::ThresholdTable;
use crate::ideal::AttackQuad;
use crate::io;
use crate::rng::{self, TAG_GALLERY, TAG_INDEX};
use crate::sphere::{self, Embedding};

/// An indexed collection of candidate MII embeddings with parallel labels.
#[derive(Debug, Clone)]
pub struct Gallery {
    d: usize,
    data: Vec<f64>, // row-major n x d
    ids: Vec<u64>,
}

impl Gallery {
    pub fn from_embeddings(embeddings: &[Embedding]) -> Result<Self> {
        if embeddings.is_empty() {
            return Err(MiiError::EmptyInput("gallery"));
        }
        let d = embeddings[0].dim();
        let mut data = Vec::with_capacity(embeddings.len() * d);
        for e in embeddings {
            if e.dim() != d {
                return Err(MiiError::DimensionMismatch {
                    expected: d,
                    got: e.dim(),
                });
            }
            data.extend_from_slice(e.coords());
        }
        Ok(Self {
            d,
            data,
            ids: (0..embeddings.len() as u64).collect(),
        })
    }

    /// Uniform-identity members drawn directly on the sphere; the flat
    /// buffer never materializes intermediate embedding structs, so
    /// million-row galleries generate in one pass.
    pub fn generate_uniform(d: usize, n: usize, seed: u64) -> Result<Self> {
        if d < 2 {
            return Err(MiiError::DimensionTooSmall(d));
        }
        if n == 0 {
            return Err(MiiError::EmptyInput("gallery"));
        }
        use rand::Rng;
        use rand_distr::StandardNormal;
        let mut r = rng::stream(&[seed, TAG_GALLERY]);
        let mut data = vec![0.0f64; n * d];
        for row in data.chunks_exact_mut(d) {
            loop {
                for v in row.iter_mut() {
                    *v = r.sample(StandardNormal);
                }
                let norm = sphere::norm(row);
                if norm > 1e-12 {
                    for v in row.iter_mut() {
                        *v /= norm;
                    }
                    break;
                }
            }
        }
        Ok(Self {
            d,
            data,
            ids: (0..n as u64).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn row(&self, index: usize) -> &[f64] {
        &self.data[index * self.d..(index + 1) * self.d]
    }

    pub fn id(&self, index: usize) -> u64 {
        self.ids[index]
    }

    pub fn member(&self, index: usize) -> Result<Embedding> {
        if index >= self.len() {
            return Err(MiiError::IndexOutOfRange {
                index,
                len: self.len(),
            });
        }
        // Rows enter through unit embeddings, so this preserves their bits.
        Embedding::new(self.row(index).to_vec())
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let embeddings: Vec<Embedding> = (0..self.len())
            .map(|i| self.member(i))
            .collect::<Result<_>>()?;
        io::write_embeddings_file(path, &embeddings)
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::from_embeddings(&io::read_embeddings_file(path)?)
    }
}

/// Result of one gallery search: the chosen member and the achieved MII
/// distance to the references.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchResult {
    pub index: usize,
    pub id: u64,
    pub distance: f64,
}

fn check_query(g: &Gallery, p_ref: &Embedding, q_ref: &Embedding) -> Result<()> {
    if g.is_empty() {
        return Err(MiiError::EmptyInput("gallery"));
    }
    if p_ref.dim() != g.dim() || q_ref.dim() != g.dim() {
        return Err(MiiError::DimensionMismatch {
            expected: g.dim(),
            got: p_ref.dim().max(q_ref.dim()),
        });
    }
    Ok(())
}

/// Full scan for the member minimizing max(θ(m, p_ref), θ(m, q_ref)).
/// Ties break to the lowest gallery index.
pub fn gs_search_exact(g: &Gallery, p_ref: &Embedding, q_ref: &Embedding) -> Result<SearchResult> {
    check_query(g, p_ref, q_ref)?;
    let p = p_ref.coords();
    let q = q_ref.coords();
    // Minimizing the max angle is maximizing the min dot product.
    let mut best_dot = f64::NEG_INFINITY;
    let mut best_idx = 0usize;
    for i in 0..g.len() {
        let row = g.row(i);
        let m = sphere::dot(row, p).min(sphere::dot(row, q));
        if m > best_dot {
            best_dot = m;
            best_idx = i;
        }
    }
    Ok(SearchResult {
        index: best_idx,
        id: g.id(best_idx),
        distance: best_dot.clamp(-1.0, 1.0).acos(),
    })
}

/// Coarse quantization of a gallery: k centroid directions, the members
/// assigned to each (nearest by angle), and each member's cached angle to
/// its centroid.
#[derive(Debug, Clone)]
pub struct GalleryIndex {
    d: usize,
    k: usize,
    centroids: Vec<f64>, // row-major k x d
    members: Vec<Vec<u32>>,
    member_centroid_angle: Vec<Vec<f64>>,
}

/// Training sample cap for the k-means phase; assignment always covers the
/// full gallery.
const KMEANS_TRAIN_CAP: usize = 50_000;
const KMEANS_ITERS: usize = 6;

impl GalleryIndex {
    /// Default centroid count: ⌈√n⌉.
    pub fn default_k(n: usize) -> usize {
        (n as f64).sqrt().ceil() as usize
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Builds the index with angular (spherical) k-means: seeded distinct
    /// members as initial centroids, Lloyd iterations on a training
    /// subsample, then a full assignment pass.
    pub fn build(g: &Gallery, k: usize, seed: u64) -> Result<Self> {
        if g.is_empty() {
            return Err(MiiError::EmptyInput("gallery"));
        }
        if k == 0 || k > g.len() {
            return Err(MiiError::InvalidParameter(format!(
                "centroid count {k} must be in 1..={}",
                g.len()
            )));
        }
        let d = g.dim();
        use rand::Rng;
        let mut r = rng::stream(&[seed, TAG_INDEX]);

        // Initial centroids: k distinct member rows.
        let mut centroids = Vec::with_capacity(k * d);
        let mut chosen = std::collections::HashSet::new();
        while chosen.len() < k {
            let i = r.random_range(0..g.len());
            if chosen.insert(i) {
                centroids.extend_from_slice(g.row(i));
            }
        }

        // Lloyd iterations on a subsample: assign to max-dot centroid,
        // recenter, renormalize. Empty clusters keep their centroid.
        let train_n = g.len().min(KMEANS_TRAIN_CAP);
        let train: Vec<usize> = if train_n == g.len() {
            (0..g.len()).collect()
        } else {
            (0..train_n).map(|_| r.random_range(0..g.len())).collect()
        };
        for _ in 0..KMEANS_ITERS {
            let mut sums = vec![0.0f64; k * d];
            let mut counts = vec![0usize; k];
            for &m in &train {
                let row = g.row(m);
                let c = nearest_centroid(&centroids, k, d, row).0;
                counts[c] += 1;
                for (s, &v) in sums[c * d..(c + 1) * d].iter_mut().zip(row) {
                    *s += v;
                }
            }
            for c in 0..k {
                if counts[c] == 0 {
                    continue;
                }
                let sum = &mut sums[c * d..(c + 1) * d];
                let norm = sphere::norm(sum);
                if norm > 1e-12 {
                    for (dst, &s) in centroids[c * d..(c + 1) * d].iter_mut().zip(sum.iter()) {
                        *dst = s / norm;
                    }
                }
            }
        }

        // Full assignment with cached member-to-centroid angles.
        let mut members = vec![Vec::new(); k];
        let mut member_centroid_angle = vec![Vec::new(); k];
        for i in 0..g.len() {
            let row = g.row(i);
            let (c, dot) = nearest_centroid(&centroids, k, d, row);
            members[c].push(i as u32);
            member_centroid_angle[c].push(dot.clamp(-1.0, 1.0).acos());
        }
        Ok(Self {
            d,
            k,
            centroids,
            members,
            member_centroid_angle,
        })
    }

    fn centroid(&self, c: usize) -> &[f64] {
        &self.centroids[c * self.d..(c + 1) * self.d]
    }
}

#[inline]
fn nearest_centroid(centroids: &[f64], k: usize, d: usize, row: &[f64]) -> (usize, f64) {
    let mut best = 0usize;
    let mut best_dot = f64::NEG_INFINITY;
    for c in 0..k {
        let dot = sphere::dot(&centroids[c * d..(c + 1) * d], row);
        if dot > best_dot {
            best_dot = dot;
            best = c;
        }
    }
    (best, best_dot)
}

/// Pruned search: probes the `n_probe` centroids with the smallest max
/// angle to the references, scanning their member lists exactly. Probing
/// all centroids reproduces [`gs_search_exact`] result for result.
///
/// Within a probed list, a member is skipped when the triangle-inequality
/// lower bound |θ(c, ref) − θ(c, m)| already exceeds the incumbent by more
/// than 1e-9, which cannot change the argmin.
pub fn gs_search_indexed(
    idx: &GalleryIndex,
    g: &Gallery,
    p_ref: &Embedding,
    q_ref: &Embedding,
    n_probe: usize,
) -> Result<SearchResult> {
    check_query(g, p_ref, q_ref)?;
    if g.dim() != idx.d {
        return Err(MiiError::DimensionMismatch {
            expected: idx.d,
            got: g.dim(),
        });
    }
    if n_probe == 0 {
        return Err(MiiError::InvalidParameter("n_probe must be >= 1".into()));
    }
    let p = p_ref.coords();
    let q = q_ref.coords();

    // Rank centroids by the query objective evaluated at the centroid.
    let mut order: Vec<(f64, usize, f64, f64)> = (0..idx.k)
        .map(|c| {
            let cen = idx.centroid(c);
            let ap = sphere::angle_between(cen, p);
            let aq = sphere::angle_between(cen, q);
            (ap.max(aq), c, ap, aq)
        })
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut best_angle = f64::INFINITY;
    let mut best_idx = usize::MAX;
    for &(_, c, cen_p, cen_q) in order.iter().take(n_probe.min(idx.k)) {
        let list = &idx.members[c];
        let angles = &idx.member_centroid_angle[c];
        for (slot, &mi) in list.iter().enumerate() {
            let mc = angles[slot];
            let bound = (cen_p - mc).abs().max((cen_q - mc).abs());
            if bound > best_angle + 1e-9 {
                continue;
            }
            let row = g.row(mi as usize);
            let angle = sphere::mii_angle(p, q, row);
            if angle < best_angle || (angle == best_angle && (mi as usize) < best_idx) {
                best_angle = angle;
                best_idx = mi as usize;
            }
        }
    }
    if best_idx == usize::MAX {
        // n_probe centroids exist but were all empty; fall back to exact.
        return gs_search_exact(g, p_ref, q_ref);
    }
    Ok(SearchResult {
        index: best_idx,
        id: g.id(best_idx),
        distance: best_angle,
    })
}

/// One point of the gallery-size/success curve.
#[derive(Debug, Clone, Copy)]
pub struct CurvePoint {
    pub size: usize,
    pub success_rate: f64,
    pub mean_mii_dist: f64,
}

/// Success-versus-gallery-size curve over nested uniform galleries.
///
/// One master gallery of the largest size is drawn, and each smaller size is
/// its prefix, so galleries are nested. Per quad the best member against the
/// references is tracked incrementally; the reported success at each size is
/// whether any nested prefix up to that size has produced an MII whose live
/// distance is within ε (so the curve is nondecreasing by construction), and
/// `mean_mii_dist` is the mean of the per-quad best live distances so far.
pub fn gallery_size_curve(
    quads: &[AttackQuad],
    sizes: &[usize],
    gallery_seed: u64,
    eps: f64,
) -> Result<Vec<CurvePoint>> {
    if quads.is_empty() {
        return Err(MiiError::EmptyInput("quad list"));
    }
    if sizes.is_empty() {
        return Err(MiiError::EmptyInput("size list"));
    }
    for w in sizes.windows(2) {
        if w[1] <= w[0] {
            return Err(MiiError::InvalidParameter(
                "gallery sizes must be strictly ascending".into(),
            ));
        }
    }
    if sizes[0] == 0 {
        return Err(MiiError::InvalidParameter("gallery sizes must be positive".into()));
    }
    let d = quads[0].p_ref.dim();
    let master = Gallery::generate_uniform(d, *sizes.last().expect("nonempty"), gallery_seed)?;

    struct QuadState {
        best_ref_dot: f64,
        best_live: f64,
    }
    let mut states: Vec<QuadState> = quads
        .iter()
        .map(|_| QuadState {
            best_ref_dot: f64::NEG_INFINITY,
            best_live: f64::INFINITY,
        })
        .collect();
    let refs: Vec<(&[f64], &[f64])> = quads
        .iter()
        .map(|q| (q.p_ref.coords(), q.q_ref.coords()))
        .collect();

    let mut out = Vec::with_capacity(sizes.len());
    let mut scanned = 0usize;
    for &size in sizes {
        for i in scanned..size {
            let row = master.row(i);
            for (qi, &(p, q)) in refs.iter().enumerate() {
                let m = sphere::dot(row, p).min(sphere::dot(row, q));
                if m > states[qi].best_ref_dot {
                    states[qi].best_ref_dot = m;
                    let live = sphere::mii_angle(
                        quads[qi].p_live.coords(),
                        quads[qi].q_live.coords(),
                        row,
                    );
                    if live < states[qi].best_live {
                        states[qi].best_live = live;
                    }
                }
            }
        }
        scanned = size;
        let successes = states.iter().filter(|s| s.best_live <= eps).count();
        let mean = states.iter().map(|s| s.best_live).sum::<f64>() / states.len() as f64;
        out.push(CurvePoint {
            size,
            success_rate: successes as f64 / states.len() as f64,
            mean_mii_dist: mean,
        });
    }
    Ok(out)
}

/// Least-squares fit of success against log10(size), extrapolated to the
/// gallery size reaching `target_rate`. `None` when the fitted slope is not
/// positive (the target is never reached by extrapolation).
pub fn extrapolate_size_for_rate(points: &[CurvePoint], target_rate: f64) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.size as f64).log10()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.success_rate).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    if slope <= 1e-12 {
        return None;
    }
    let intercept = my - slope * mx;
    Some(10f64.powf((target_rate - intercept) / slope))
}

/// Scores a searched gallery member against the thresholds, per quad.
pub fn gs_attack_outcomes(
    g: &Gallery,
    quads: &[AttackQuad],
    table: &ThresholdTable,
    index: Option<(&GalleryIndex, usize)>,
) -> Result<Vec<crate::eval::AttackOutcome>> {
    quads
        .iter()
        .map(|quad| {
            let found = match index {
                Some((idx, n_probe)) => gs_search_indexed(idx, g, &quad.p_ref, &quad.q_ref, n_probe)?,
                None => gs_search_exact(g, &quad.p_ref, &quad.q_ref)?,
            };
            let mii = g.member(found.index)?;
            crate::eval::score_attack(&quad.p_live, &quad.q_live, &mii, table)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{angular_distance, sample_uniform_sphere, spherical_midpoint};

    fn random_gallery(d: usize, n: usize, seed: u64) -> Gallery {
        Gallery::generate_uniform(d, n, seed).unwrap()
    }

    /// Independent full-scan oracle using the typed API.
    fn oracle_search(g: &Gallery, p: &Embedding, q: &Embedding) -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        for i in 0..g.len() {
            let m = g.member(i).unwrap();
            let a = crate::sphere::mii_distance(p, q, &m).unwrap().radians();
            if a < best.1 {
                best = (i, a);
            }
        }
        best
    }

    #[test]
    fn exact_search_finds_planted_midpoint() {
        let refs = sample_uniform_sphere(16, 2, 1).unwrap();
        let mid = spherical_midpoint(&refs[0], &refs[1]).unwrap();
        let mut members = sample_uniform_sphere(16, 50, 2).unwrap();
        members.insert(17, mid.clone());
        let g = Gallery::from_embeddings(&members).unwrap();
        let r = gs_search_exact(&g, &refs[0], &refs[1]).unwrap();
        assert_eq!(r.index, 17);
        let half = angular_distance(&refs[0], &refs[1]).unwrap().radians() / 2.0;
        assert!((r.distance - half).abs() < 1e-9);
    }

    #[test]
    fn exact_search_single_ref_gallery() {
        let refs = sample_uniform_sphere(16, 2, 3).unwrap();
        let g = Gallery::from_embeddings(&[refs[0].clone()]).unwrap();
        let r = gs_search_exact(&g, &refs[0], &refs[1]).unwrap();
        assert_eq!(r.index, 0);
        let full = angular_distance(&refs[0], &refs[1]).unwrap().radians();
        assert!((r.distance - full).abs() < 1e-12);
    }

    #[test]
    fn exact_search_matches_oracle() {
        let g = random_gallery(16, 100, 5);
        let queries = sample_uniform_sphere(16, 20, 6).unwrap();
        for pair in queries.chunks_exact(2) {
            let r = gs_search_exact(&g, &pair[0], &pair[1]).unwrap();
            let (oi, od) = oracle_search(&g, &pair[0], &pair[1]);
            assert_eq!(r.index, oi);
            assert!((r.distance - od).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_search_never_beats_half_angle_bound() {
        let g = random_gallery(8, 300, 7);
        let queries = sample_uniform_sphere(8, 20, 8).unwrap();
        for pair in queries.chunks_exact(2) {
            let r = gs_search_exact(&g, &pair[0], &pair[1]).unwrap();
            let half = angular_distance(&pair[0], &pair[1]).unwrap().radians() / 2.0;
            assert!(r.distance >= half - 1e-12);
        }
    }

    #[test]
    fn full_probe_equals_exact() {
        let g = random_gallery(24, 3000, 9);
        let idx = GalleryIndex::build(&g, GalleryIndex::default_k(g.len()), 10).unwrap();
        let queries = sample_uniform_sphere(24, 30, 11).unwrap();
        for pair in queries.chunks_exact(2) {
            let e = gs_search_exact(&g, &pair[0], &pair[1]).unwrap();
            let i = gs_search_indexed(&idx, &g, &pair[0], &pair[1], idx.k()).unwrap();
            assert_eq!(e, i);
        }
    }

    #[test]
    fn single_probe_hits_planted_best_in_top_centroid() {
        // Gallery built as tight clusters around orthogonal axes, queried
        // near one axis: the top-ranked centroid is that axis's cluster and
        // holds the global best, so n_probe=1 matches the exact search.
        let d = 8;
        let k = 5;
        let mut members = Vec::new();
        let mut r = crate::rng::stream(&[77]);
        use rand::Rng;
        for axis in 0..k {
            for _ in 0..50 {
                let mut coords = vec![0.0; d];
                coords[axis] = 1.0;
                for (j, c) in coords.iter_mut().enumerate() {
                    if j != axis {
                        *c = 0.05 * (r.random::<f64>() - 0.5);
                    }
                }
                members.push(Embedding::from_unnormalized(coords).unwrap());
            }
        }
        let g = Gallery::from_embeddings(&members).unwrap();
        let idx = GalleryIndex::build(&g, k, 15).unwrap();
        // Both refs lean toward axis 0 from opposite sides.
        let mut a = vec![0.0; d];
        a[0] = 1.0;
        a[1] = 0.25;
        let mut b = vec![0.0; d];
        b[0] = 1.0;
        b[1] = -0.25;
        let p = Embedding::from_unnormalized(a).unwrap();
        let q = Embedding::from_unnormalized(b).unwrap();
        let exact = gs_search_exact(&g, &p, &q).unwrap();
        let probed = gs_search_indexed(&idx, &g, &p, &q, 1).unwrap();
        assert_eq!(exact, probed);
    }

    #[test]
    fn index_build_rejects_bad_k() {
        let g = random_gallery(8, 10, 16);
        assert!(GalleryIndex::build(&g, 0, 1).is_err());
        assert!(GalleryIndex::build(&g, 11, 1).is_err());
    }

    #[test]
    fn curve_is_monotone_and_mean_decreases() {
        let pts = sample_uniform_sphere(16, 80, 17).unwrap();
        let quads: Vec<AttackQuad> = pts
            .chunks_exact(4)
            .enumerate()
            .map(|(k, c)| {
                AttackQuad::new(
                    c[0].clone(),
                    c[1].clone(),
                    c[2].clone(),
                    c[3].clone(),
                    2 * k,
                    2 * k + 1,
                )
                .unwrap()
            })
            .collect();
        let curve = gallery_size_curve(&quads, &[100, 1000, 10_000], 18, 1.2).unwrap();
        for w in curve.windows(2) {
            assert!(w[1].success_rate >= w[0].success_rate);
            assert!(w[1].mean_mii_dist <= w[0].mean_mii_dist + 1e-12);
        }
    }

    #[test]
    fn curve_with_planted_midpoints_matches_ideal_rate() {
        // Gallery containing every quad's reference midpoint: the search
        // attains the lower bound, so success equals the ideal attack's.
        use crate::eval::{success_rate, ThresholdEntry, ThresholdTable};
        use crate::ideal::{ideal_attack_distances, ideal_mii};
        use crate::sphere::AngularDistance;

        let pts = sample_uniform_sphere(16, 40, 19).unwrap();
        let quads: Vec<AttackQuad> = pts
            .chunks_exact(4)
            .enumerate()
            .map(|(k, c)| {
                AttackQuad::new(
                    c[0].clone(),
                    c[1].clone(),
                    c[2].clone(),
                    c[3].clone(),
                    2 * k,
                    2 * k + 1,
                )
                .unwrap()
            })
            .collect();
        let mids: Vec<Embedding> = quads.iter().map(|q| ideal_mii(q).unwrap()).collect();
        let g = Gallery::from_embeddings(&mids).unwrap();
        let eps = 1.1;
        let table = ThresholdTable::new(vec![ThresholdEntry {
            far_target: 1e-3,
            epsilon: AngularDistance::from_radians(eps).unwrap(),
        }])
        .unwrap();
        let outcomes = gs_attack_outcomes(&g, &quads, &table, None).unwrap();
        let gs_rate = success_rate(&outcomes, 0).unwrap();
        let ideal_dists = ideal_attack_distances(&quads).unwrap();
        let ideal_rate =
            ideal_dists.iter().filter(|&&d| d <= eps).count() as f64 / quads.len() as f64;
        assert_eq!(gs_rate, ideal_rate);
    }

    #[test]
    fn extrapolation_handles_flat_and_rising_curves() {
        let flat = vec![
            CurvePoint { size: 1000, success_rate: 0.0, mean_mii_dist: 1.5 },
            CurvePoint { size: 10_000, success_rate: 0.0, mean_mii_dist: 1.45 },
        ];
        assert!(extrapolate_size_for_rate(&flat, 0.5).is_none());
        let rising = vec![
            CurvePoint { size: 1000, success_rate: 0.1, mean_mii_dist: 1.5 },
            CurvePoint { size: 10_000, success_rate: 0.2, mean_mii_dist: 1.4 },
            CurvePoint { size: 100_000, success_rate: 0.3, mean_mii_dist: 1.3 },
        ];
        let size = extrapolate_size_for_rate(&rising, 0.5).unwrap();
        // 0.1 per decade starting at (3, 0.1): 50% at 10^7.
        assert!((size.log10() - 7.0).abs() < 1e-9);
    }

    #[test]
    fn gallery_file_round_trip() {
        let g = random_gallery(8, 20, 21);
        let path = std::env::temp_dir().join(format!("mii_gallery_{}.miie", std::process::id()));
        g.save(&path).unwrap();
        let back = Gallery::load(&path).unwrap();
        assert_eq!(back.len(), g.len());
        assert_eq!(back.dim(), g.dim());
        std::fs::remove_file(&path).unwrap();
    }
}
