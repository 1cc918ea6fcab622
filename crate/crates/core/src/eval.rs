//! The verification evaluation protocol: pair construction, FAR/TAR,
//! threshold tables, exact AUROC, Pearson transfer correlations, and
//! MII attack-success scoring.
//!
//! Counting conventions, fixed here because verification papers rarely state
//! them: FAR/TAR count with strict `<`, attack success with non-strict `≤`.

use crate::error::{MiiError, Result};
use crate::rng::{self, TAG_NEG_PAIRS};
use crate::sphere::{self, AngularDistance, Embedding};
use crate::world::EmbeddedWorld;

use rand::Rng;

/// FAR operating points for the five standard thresholds ε_0..ε_4
/// (0.001% through 10%).
pub const FAR_TARGETS: [f64; 5] = [1e-5, 1e-4, 1e-3, 1e-2, 1e-1];

/// Index of the 0.1% FAR threshold ε_2, the border-control operating point
/// used for headline success rates.
pub const EPS2_INDEX: usize = 2;

/// Default cap on the number of non-matching pairs evaluated; below it the
/// full cross product is used.
pub const DEFAULT_NEG_PAIR_CAP: usize = 10_000_000;

/// A labelled set of embedding pairs (P⁺ or P⁻).
#[derive(Debug, Clone)]
pub struct PairSet {
    pub pairs: Vec<(Embedding, Embedding)>,
    pub label: PairLabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairLabel {
    Matching,
    NonMatching,
}

impl PairSet {
    pub fn new(pairs: Vec<(Embedding, Embedding)>, label: PairLabel) -> Result<Self> {
        if pairs.is_empty() {
            return Err(MiiError::EmptyInput("pair set"));
        }
        let d = pairs[0].0.dim();
        for (a, b) in &pairs {
            if a.dim() != d || b.dim() != d {
                return Err(MiiError::DimensionMismatch {
                    expected: d,
                    got: a.dim().max(b.dim()),
                });
            }
        }
        Ok(Self { pairs, label })
    }

    pub fn distances(&self) -> Vec<f64> {
        self.pairs
            .iter()
            .map(|(a, b)| sphere::angle_between(a.coords(), b.coords()))
            .collect()
    }
}

/// False acceptance rate: the fraction of non-matching distances strictly
/// below `eps`.
pub fn far(dists: &[f64], eps: f64) -> Result<f64> {
    if dists.is_empty() {
        return Err(MiiError::EmptyInput("distance list"));
    }
    Ok(dists.iter().filter(|&&d| d < eps).count() as f64 / dists.len() as f64)
}

/// True acceptance rate: the fraction of matching distances strictly below
/// `eps`.
pub fn tar(dists: &[f64], eps: f64) -> Result<f64> {
    far(dists, eps)
}

/// The largest ε with far(neg, ε) ≤ `far_target`: the order statistic at
/// index ⌊far_target·n⌋ of the sorted negatives, so strict-< counting admits
/// exactly that many negatives below it (fewer under ties).
pub fn threshold_at_far(neg_dists: &[f64], far_target: f64) -> Result<f64> {
    if neg_dists.is_empty() {
        return Err(MiiError::EmptyInput("negative distance list"));
    }
    if !(far_target > 0.0 && far_target < 1.0) {
        return Err(MiiError::InvalidParameter(format!(
            "far_target must lie in (0, 1), got {far_target}"
        )));
    }
    let mut sorted = neg_dists.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let idx = ((far_target * n as f64).floor() as usize).min(n - 1);
    Ok(sorted[idx])
}

/// An entry of the ε table: a FAR operating point and its threshold.
#[derive(Debug, Clone, Copy)]
pub struct ThresholdEntry {
    pub far_target: f64,
    pub epsilon: AngularDistance,
}

/// The thresholds ε_0 ≤ ε_1 ≤ … at increasing FAR targets.
#[derive(Debug, Clone)]
pub struct ThresholdTable {
    entries: Vec<ThresholdEntry>,
}

impl ThresholdTable {
    pub fn new(entries: Vec<ThresholdEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(MiiError::EmptyInput("threshold table"));
        }
        for w in entries.windows(2) {
            if w[1].far_target <= w[0].far_target {
                return Err(MiiError::InvalidParameter(
                    "far targets must be strictly increasing".into(),
                ));
            }
            if w[1].epsilon.radians() < w[0].epsilon.radians() {
                return Err(MiiError::InvalidParameter(
                    "epsilon must be nondecreasing in far target".into(),
                ));
            }
        }
        Ok(Self { entries })
    }

    /// Thresholds from non-matching distances at the given FAR targets.
    pub fn from_negatives(neg_dists: &[f64], far_targets: &[f64]) -> Result<Self> {
        if far_targets.is_empty() {
            return Err(MiiError::EmptyInput("far target list"));
        }
        let entries = far_targets
            .iter()
            .map(|&t| {
                Ok(ThresholdEntry {
                    far_target: t,
                    epsilon: AngularDistance::from_radians(threshold_at_far(neg_dists, t)?)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }

    /// Thresholds at the standard five operating points.
    pub fn standard_from_negatives(neg_dists: &[f64]) -> Result<Self> {
        Self::from_negatives(neg_dists, &FAR_TARGETS)
    }

    pub fn entries(&self) -> &[ThresholdEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn epsilon(&self, index: usize) -> Result<f64> {
        self.entries
            .get(index)
            .map(|e| e.epsilon.radians())
            .ok_or(MiiError::IndexOutOfRange {
                index,
                len: self.entries.len(),
            })
    }
}

/// Exact AUROC: the probability that a random matching pair scores a lower
/// distance than a random non-matching pair, ties at half weight. Computed
/// from pair counts, not a trapezoid approximation.
pub fn auroc(pos_dists: &[f64], neg_dists: &[f64]) -> Result<f64> {
    if pos_dists.is_empty() {
        return Err(MiiError::EmptyInput("positive distance list"));
    }
    if neg_dists.is_empty() {
        return Err(MiiError::EmptyInput("negative distance list"));
    }
    let mut sorted_neg = neg_dists.to_vec();
    sorted_neg.sort_by(f64::total_cmp);
    let n = sorted_neg.len();
    // 2 per win, 1 per tie, over all (pos, neg) pairs.
    let mut acc: u64 = 0;
    for &p in pos_dists {
        let below = sorted_neg.partition_point(|&x| x < p);
        let below_or_eq = sorted_neg.partition_point(|&x| x <= p);
        let wins = (n - below_or_eq) as u64;
        let ties = (below_or_eq - below) as u64;
        acc += 2 * wins + ties;
    }
    Ok(acc as f64 / (2 * pos_dists.len() as u64 * n as u64) as f64)
}

/// Product-moment correlation. Exact ±1.0 on exactly (anti)proportional
/// inputs; errors on zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(MiiError::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(MiiError::InvalidParameter(
            "correlation needs at least 2 samples".into(),
        ));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(MiiError::UndefinedCorrelation(
            "an input has zero variance",
        ));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// The scored outcome of one MII attack against one threshold table.
#[derive(Debug, Clone)]
pub struct AttackOutcome {
    pub p_live_dist: AngularDistance,
    pub q_live_dist: AngularDistance,
    pub mii_dist: AngularDistance,
    pub success_at: Vec<bool>,
}

/// Scores an MII embedding against the live captures: success at ε_i is
/// mii_distance ≤ ε_i, non-strict.
pub fn score_attack(
    p_live: &Embedding,
    q_live: &Embedding,
    mii: &Embedding,
    table: &ThresholdTable,
) -> Result<AttackOutcome> {
    let p_live_dist = sphere::angular_distance(p_live, mii)?;
    let q_live_dist = sphere::angular_distance(q_live, mii)?;
    let mii_dist = p_live_dist.max(q_live_dist);
    let success_at = table
        .entries()
        .iter()
        .map(|e| mii_dist.radians() <= e.epsilon.radians())
        .collect();
    Ok(AttackOutcome {
        p_live_dist,
        q_live_dist,
        mii_dist,
        success_at,
    })
}

/// Fraction of outcomes successful at threshold index `eps_index`.
pub fn success_rate(outcomes: &[AttackOutcome], eps_index: usize) -> Result<f64> {
    if outcomes.is_empty() {
        return Err(MiiError::EmptyInput("outcome list"));
    }
    let mut hits = 0usize;
    for o in outcomes {
        let s = o
            .success_at
            .get(eps_index)
            .ok_or(MiiError::IndexOutOfRange {
                index: eps_index,
                len: o.success_at.len(),
            })?;
        hits += usize::from(*s);
    }
    Ok(hits as f64 / outcomes.len() as f64)
}

/// One end of a capture pair: (identity index, capture index).
pub type CaptureRef = (usize, usize);
pub type CapturePair = (CaptureRef, CaptureRef);

/// All same-identity capture pairs, identity-major, capture-lexicographic.
pub fn positive_pairs(n_identities: usize, images_per_identity: usize) -> Vec<CapturePair> {
    let mut pairs = Vec::new();
    for i in 0..n_identities {
        for a in 0..images_per_identity {
            for b in (a + 1)..images_per_identity {
                pairs.push(((i, a), (i, b)));
            }
        }
    }
    pairs
}

/// Cross-identity capture pairs: the full cross product when it fits under
/// `cap`, otherwise a seeded subsample of `cap` draws. The same pair list is
/// reused across comparators so transfer correlations compare like with
/// like.
pub fn negative_pairs(
    n_identities: usize,
    images_per_identity: usize,
    cap: usize,
    seed: u64,
) -> Result<Vec<CapturePair>> {
    if n_identities < 2 {
        return Err(MiiError::InvalidParameter(
            "need at least 2 identities for non-matching pairs".into(),
        ));
    }
    if cap == 0 {
        return Err(MiiError::InvalidParameter("pair cap must be positive".into()));
    }
    let k = images_per_identity as u64;
    let total = n_identities as u64 * (n_identities as u64 - 1) / 2 * k * k;
    if total <= cap as u64 {
        let mut pairs = Vec::with_capacity(total as usize);
        for i in 0..n_identities {
            for j in (i + 1)..n_identities {
                for a in 0..images_per_identity {
                    for b in 0..images_per_identity {
                        pairs.push(((i, a), (j, b)));
                    }
                }
            }
        }
        return Ok(pairs);
    }
    let mut r = rng::stream(&[seed, TAG_NEG_PAIRS]);
    let mut pairs = Vec::with_capacity(cap);
    while pairs.len() < cap {
        let i = r.random_range(0..n_identities);
        let j = r.random_range(0..n_identities);
        if i == j {
            continue;
        }
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        let a = r.random_range(0..images_per_identity);
        let b = r.random_range(0..images_per_identity);
        pairs.push(((i, a), (j, b)));
    }
    Ok(pairs)
}

/// Angular distances of the listed pairs under one comparator view.
pub fn pair_distances(view: &EmbeddedWorld, pairs: &[CapturePair]) -> Result<Vec<f64>> {
    pairs
        .iter()
        .map(|&((i, a), (j, b))| {
            let x = view.get(i, a)?;
            let y = view.get(j, b)?;
            Ok(sphere::angle_between(x.coords(), y.coords()))
        })
        .collect()
}

/// Pairwise Pearson matrices over per-comparator distance vectors (one
/// vector per comparator, computed on one shared pair list). Returns a
/// symmetric matrix with unit diagonal.
pub fn correlation_matrix(dist_vectors: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    if dist_vectors.is_empty() {
        return Err(MiiError::EmptyInput("distance vector list"));
    }
    let k = dist_vectors.len();
    let mut m = vec![vec![1.0; k]; k];
    for i in 0..k {
        for j in (i + 1)..k {
            let r = pearson(&dist_vectors[i], &dist_vectors[j])?;
            m[i][j] = r;
            m[j][i] = r;
        }
    }
    Ok(m)
}

/// Histogram bin: [left, right) with normalized density.
#[derive(Debug, Clone, Copy)]
pub struct HistBin {
    pub left: f64,
    pub right: f64,
    pub density: f64,
}

/// Fixed-width histogram over [lo, hi); out-of-range values clamp into the
/// end bins so densities integrate to one.
pub fn histogram(values: &[f64], bins: usize, lo: f64, hi: f64) -> Result<Vec<HistBin>> {
    if values.is_empty() {
        return Err(MiiError::EmptyInput("histogram values"));
    }
    if bins == 0 || !(hi > lo) {
        return Err(MiiError::InvalidParameter(
            "histogram needs bins >= 1 and hi > lo".into(),
        ));
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let idx = (((v - lo) / width).floor() as isize).clamp(0, bins as isize - 1) as usize;
        counts[idx] += 1;
    }
    let n = values.len() as f64;
    Ok((0..bins)
        .map(|i| HistBin {
            left: lo + i as f64 * width,
            right: lo + (i + 1) as f64 * width,
            density: counts[i] as f64 / (n * width),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tenths() -> Vec<f64> {
        (1..=10).map(|i| i as f64 / 10.0).collect()
    }

    #[test]
    fn far_counts_strictly_below() {
        let d = tenths();
        assert_eq!(far(&d, 0.15).unwrap(), 0.1);
        assert_eq!(far(&d, 0.0).unwrap(), 0.0);
        assert_eq!(far(&d, PI).unwrap(), 1.0);
        // Boundary value is not counted.
        assert_eq!(far(&d, 0.1).unwrap(), 0.0);
        assert!(far(&[], 0.5).is_err());
    }

    #[test]
    fn tar_matches_far_convention() {
        let d = vec![0.2, 0.4];
        assert_eq!(tar(&d, 0.3).unwrap(), 0.5);
        assert_eq!(tar(&d, 0.0).unwrap(), 0.0);
        assert_eq!(tar(&d, PI).unwrap(), 1.0);
    }

    #[test]
    fn threshold_examples() {
        let d = tenths();
        // far_target 0.10 admits exactly one value strictly below.
        assert_eq!(threshold_at_far(&d, 0.10).unwrap(), 0.2);
        // Targets below 1/n land on the smallest negative.
        assert_eq!(threshold_at_far(&d, 0.05).unwrap(), 0.1);
        assert!(threshold_at_far(&d, 0.0).is_err());
        assert!(threshold_at_far(&d, 1.0).is_err());
    }

    #[test]
    fn threshold_matches_exhaustive_scan() {
        // Oracle: the largest candidate ε among the order statistics with
        // far(ε) <= target; the next larger distinct negative must violate.
        let mut r = crate::rng::stream(&[8181]);
        use rand::Rng;
        for trial in 0..50 {
            let n = 1 + (r.random::<u64>() % 400) as usize;
            let dists: Vec<f64> = (0..n)
                .map(|_| (r.random::<f64>() * PI * 1000.0).round() / 1000.0)
                .collect();
            let target = 0.001 + 0.998 * r.random::<f64>();
            let got = threshold_at_far(&dists, target).unwrap();
            let mut sorted = dists.clone();
            sorted.sort_by(f64::total_cmp);
            sorted.dedup();
            let mut best = None;
            for &eps in &sorted {
                if far(&dists, eps).unwrap() <= target {
                    best = Some(eps);
                }
            }
            assert_eq!(Some(got), best, "trial {trial}");
            if let Some(next) = sorted.iter().copied().find(|&e| e > got) {
                assert!(far(&dists, next).unwrap() > target);
            }
        }
    }

    #[test]
    fn threshold_table_is_monotone_and_indexed() {
        let neg: Vec<f64> = (0..100_000).map(|i| 0.5 + 1.0 * (i as f64 / 100_000.0)).collect();
        let t = ThresholdTable::standard_from_negatives(&neg).unwrap();
        assert_eq!(t.len(), 5);
        for w in t.entries().windows(2) {
            assert!(w[0].epsilon.radians() <= w[1].epsilon.radians());
        }
        assert!(t.epsilon(5).is_err());
    }

    #[test]
    fn auroc_examples() {
        assert_eq!(auroc(&[0.1, 0.2], &[0.5, 0.9]).unwrap(), 1.0);
        let same = vec![0.3, 0.4, 0.5];
        assert_eq!(auroc(&same, &same).unwrap(), 0.5);
        assert_eq!(auroc(&[0.1, 0.5], &[0.3, 0.7]).unwrap(), 0.75);
        assert!(auroc(&[], &[0.1]).is_err());
    }

    #[test]
    fn auroc_invariant_under_monotone_transform() {
        let pos = vec![0.12, 0.4, 0.33, 0.8];
        let neg = vec![0.5, 0.61, 0.95, 0.3, 0.77];
        let base = auroc(&pos, &neg).unwrap();
        let f = |v: &f64| (v * 3.0).exp() + 1.0;
        let tp: Vec<f64> = pos.iter().map(f).collect();
        let tn: Vec<f64> = neg.iter().map(f).collect();
        assert_eq!(auroc(&tp, &tn).unwrap(), base);
    }

    #[test]
    fn pearson_examples() {
        let x = vec![1.0, 2.0, 3.0];
        assert_eq!(pearson(&x, &x).unwrap(), 1.0);
        let nx: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_eq!(pearson(&x, &nx).unwrap(), -1.0);
        let y = vec![1.0, 2.0, 4.0];
        let r = pearson(&x, &y).unwrap();
        assert!((r - 0.981_980_506_061_965_7).abs() < 1e-12);
        assert!(matches!(
            pearson(&x, &[2.0, 2.0, 2.0]),
            Err(MiiError::UndefinedCorrelation(_))
        ));
        assert!(pearson(&x, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn score_attack_success_convention() {
        use crate::sphere::spherical_midpoint;
        let table = ThresholdTable::new(vec![
            ThresholdEntry {
                far_target: 1e-3,
                epsilon: AngularDistance::from_radians(0.5).unwrap(),
            },
            ThresholdEntry {
                far_target: 1e-1,
                epsilon: AngularDistance::from_radians(1.4).unwrap(),
            },
        ])
        .unwrap();

        // mii == both lives: success everywhere.
        let e1 = Embedding::new(vec![1.0, 0.0, 0.0]).unwrap();
        let o = score_attack(&e1, &e1, &e1, &table).unwrap();
        assert!(o.success_at.iter().all(|&s| s));
        assert_eq!(o.mii_dist.radians(), 0.0);

        // Orthogonal mii fails below pi/2, succeeds above.
        let e2 = Embedding::new(vec![0.0, 1.0, 0.0]).unwrap();
        let e3 = Embedding::new(vec![0.0, 0.0, 1.0]).unwrap();
        let o = score_attack(&e1, &e2, &e3, &table).unwrap();
        assert_eq!(o.success_at, vec![false, false]);

        // Midpoint of a 0.8 rad pair sits 0.4 from each: success at 0.5,
        // non-strict comparison at the boundary included by construction.
        let p = Embedding::new(vec![1.0, 0.0]).unwrap();
        let q = Embedding::new(vec![0.8f64.cos(), 0.8f64.sin()]).unwrap();
        let m = spherical_midpoint(&p, &q).unwrap();
        let small = ThresholdTable::new(vec![ThresholdEntry {
            far_target: 1e-3,
            epsilon: AngularDistance::from_radians(0.5).unwrap(),
        }])
        .unwrap();
        let o = score_attack(&p, &q, &m, &small).unwrap();
        assert!((o.mii_dist.radians() - 0.4).abs() < 1e-12);
        assert_eq!(o.success_at, vec![true]);

        // Monotone in epsilon: success at eps_i implies success at j > i.
        let o = score_attack(&p, &q, &m, &table).unwrap();
        for w in o.success_at.windows(2) {
            assert!(!w[0] || w[1]);
        }
    }

    #[test]
    fn success_rate_counts() {
        let table = ThresholdTable::new(vec![ThresholdEntry {
            far_target: 1e-3,
            epsilon: AngularDistance::from_radians(1.0).unwrap(),
        }])
        .unwrap();
        let e1 = Embedding::new(vec![1.0, 0.0]).unwrap();
        let e2 = Embedding::new(vec![0.0, 1.0]).unwrap();
        let hit = score_attack(&e1, &e1, &e1, &table).unwrap();
        let miss = score_attack(&e1, &e2, &e2, &table).unwrap();
        let outcomes = vec![hit.clone(), hit.clone(), hit, miss];
        assert_eq!(success_rate(&outcomes, 0).unwrap(), 0.75);
        assert!(success_rate(&outcomes, 1).is_err());
        assert!(success_rate(&[], 0).is_err());
    }

    #[test]
    fn negative_pair_enumeration_and_subsampling() {
        let all = negative_pairs(4, 2, 1_000, 1).unwrap();
        // C(4,2) identity pairs x 2x2 capture combos.
        assert_eq!(all.len(), 24);
        for &((i, _), (j, _)) in &all {
            assert!(i < j);
        }
        let sub = negative_pairs(50, 3, 100, 1).unwrap();
        assert_eq!(sub.len(), 100);
        assert_eq!(sub, negative_pairs(50, 3, 100, 1).unwrap());
        for &((i, _), (j, _)) in &sub {
            assert!(i < j);
        }
    }

    #[test]
    fn histogram_densities_integrate_to_one() {
        let vals: Vec<f64> = (0..1000).map(|i| i as f64 / 1000.0 * PI).collect();
        let h = histogram(&vals, 37, 0.0, PI).unwrap();
        let mass: f64 = h.iter().map(|b| b.density * (b.right - b.left)).sum();
        assert!((mass - 1.0).abs() < 1e-12);
    }
}
