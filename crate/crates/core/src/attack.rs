//! Attack orchestration on synthetic worlds: building MIIs under an
//! attacker's comparator and scoring them under an attacked comparator.
//!
//! Transfer is modeled through the latent space: the attacker realizes
//! their optimized embedding as a latent direction (undoing their own
//! rotation), and the attacked comparator then views that latent with its
//! own rotation and capture noise. When attacker and attacked coincide the
//! ideal generator realizes the midpoint exactly, by definition.

use crate::error::{MiiError, Result};
use crate::eval::{score_attack, AttackOutcome, ThresholdTable};
use crate::gallery::{gs_search_exact, gs_search_indexed, Gallery, GalleryIndex};
use crate::ideal::{ideal_mii, quads_from_view, AttackQuad, LIVE_CAPTURE, REF_CAPTURE};
use crate::losses::{DecoderOracle, IdentityOracle};
use crate::rng::{self, TAG_MII_VIEW};
use crate::sphere::{spherical_midpoint, Embedding};
use crate::world::{embed_world, EmbeddedWorld, SyntheticComparator, World};

/// MII construction methods scoreable against a synthetic world.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackMethod {
    /// Midpoint realized exactly in the attacked comparator's space.
    Ideal,
    /// Best gallery member under the attacker's comparator.
    GallerySearch,
    /// Midpoint through a decoder-oracle round trip.
    RsStub,
}

/// Ideal attacks are matched by definition: per quad, the MII embedding is
/// the midpoint of the attacked comparator's reference embeddings.
pub fn ideal_outcomes(
    attacked_view: &EmbeddedWorld,
    identity_pairs: &[(usize, usize)],
    table: &ThresholdTable,
) -> Result<Vec<AttackOutcome>> {
    let quads = quads_from_view(attacked_view, identity_pairs, REF_CAPTURE, LIVE_CAPTURE)?;
    quads
        .iter()
        .map(|q| {
            let mii = ideal_mii(q)?;
            score_attack(&q.p_live, &q.q_live, &mii, table)
        })
        .collect()
}

/// The ideal MII distances of quads drawn from a comparator view.
pub fn ideal_distances(
    attacked_view: &EmbeddedWorld,
    identity_pairs: &[(usize, usize)],
) -> Result<Vec<f64>> {
    let quads = quads_from_view(attacked_view, identity_pairs, REF_CAPTURE, LIVE_CAPTURE)?;
    crate::ideal::ideal_attack_distances(&quads)
}

/// How a latent MII direction appears to the attacked comparator: rotated
/// and captured with noise keyed by the attack index.
fn attacked_realization(
    attacked: &SyntheticComparator,
    latent: &Embedding,
    attack_index: usize,
) -> Result<Embedding> {
    attacked.view(latent, rng::mix(&[TAG_MII_VIEW, attack_index as u64]))
}

/// Gallery-search attacks with transfer.
///
/// The gallery holds latent directions. The attacker searches it through
/// their own comparator's view of each member (noise keyed per member, so a
/// member looks the same across queries); the chosen member's latent is
/// then realized under the attacked comparator and scored against its live
/// captures.
#[allow(clippy::too_many_arguments)]
pub fn gs_outcomes(
    world: &World,
    attacker: &SyntheticComparator,
    attacked: &SyntheticComparator,
    gallery: &Gallery,
    identity_pairs: &[(usize, usize)],
    table: &ThresholdTable,
    use_index: bool,
    n_probe: Option<usize>,
) -> Result<Vec<AttackOutcome>> {
    if gallery.dim() != world.d() {
        return Err(MiiError::DimensionMismatch {
            expected: world.d(),
            got: gallery.dim(),
        });
    }
    let attacker_view = embed_world(world, attacker)?;
    let attacked_view = embed_world(world, attacked)?;
    let attack_quads = quads_from_view(&attacker_view, identity_pairs, REF_CAPTURE, LIVE_CAPTURE)?;
    let score_quads = quads_from_view(&attacked_view, identity_pairs, REF_CAPTURE, LIVE_CAPTURE)?;

    // The attacker's comparator view of the gallery.
    let searched: Gallery = if attacker.is_pass_through() {
        gallery.clone()
    } else {
        let members = (0..gallery.len())
            .map(|i| {
                let latent = gallery.member(i)?;
                attacker.view(&latent, rng::mix(&[TAG_MII_VIEW, u64::MAX, i as u64]))
            })
            .collect::<Result<Vec<_>>>()?;
        Gallery::from_embeddings(&members)?
    };
    let index = if use_index {
        let k = GalleryIndex::default_k(searched.len());
        Some((
            GalleryIndex::build(&searched, k, world.seed())?,
            n_probe.unwrap_or(k),
        ))
    } else {
        None
    };

    attack_quads
        .iter()
        .zip(&score_quads)
        .enumerate()
        .map(|(ai, (aq, sq))| {
            let found = match &index {
                Some((idx, probes)) => {
                    gs_search_indexed(idx, &searched, &aq.p_ref, &aq.q_ref, *probes)?
                }
                None => gs_search_exact(&searched, &aq.p_ref, &aq.q_ref)?,
            };
            let latent = gallery.member(found.index)?;
            let realized = if attacker.id() == attacked.id() {
                // Matched mode scores the very embedding the attacker chose.
                searched.member(found.index)?
            } else {
                attacked_realization(attacked, &latent, ai)?
            };
            score_attack(&sq.p_live, &sq.q_live, &realized, table)
        })
        .collect()
}

/// Representation-space attacks through a decoder oracle, with transfer.
///
/// Per quad: midpoint of the attacker's reference embeddings, undone to a
/// latent direction, run through the oracle's decode/unpack round trip, and
/// realized under the attacked comparator.
pub fn rs_stub_outcomes(
    world: &World,
    attacker: &SyntheticComparator,
    attacked: &SyntheticComparator,
    oracle: &RsOracle,
    identity_pairs: &[(usize, usize)],
    table: &ThresholdTable,
) -> Result<Vec<AttackOutcome>> {
    let attacker_view = embed_world(world, attacker)?;
    let attacked_view = embed_world(world, attacked)?;
    let attack_quads = quads_from_view(&attacker_view, identity_pairs, REF_CAPTURE, LIVE_CAPTURE)?;
    let score_quads = quads_from_view(&attacked_view, identity_pairs, REF_CAPTURE, LIVE_CAPTURE)?;

    attack_quads
        .iter()
        .zip(&score_quads)
        .enumerate()
        .map(|(ai, (aq, sq))| {
            let target = spherical_midpoint(&aq.p_ref, &aq.q_ref)?;
            let latent = attacker.back_rotate(&target)?;
            let synthesized = oracle.round_trip(&latent)?;
            let realized = if attacker.id() == attacked.id() && attacker.is_pass_through() {
                synthesized
            } else if attacker.id() == attacked.id() {
                // Matched mode: the attacked comparator sees the attacker's
                // own realization of the synthesized latent.
                attacker.view(&synthesized, rng::mix(&[TAG_MII_VIEW, ai as u64]))?
            } else {
                attacked_realization(attacked, &synthesized, ai)?
            };
            score_attack(&sq.p_live, &sq.q_live, &realized, table)
        })
        .collect()
}

/// The decoder-oracle stubs available to the representation-space attack.
pub enum RsOracle {
    /// Lossless pack/unpack; the synthesized latent equals the target.
    Identity(IdentityOracle),
    /// Any decoder plus the embedding recovered from its output by a
    /// caller-supplied re-embedding.
    Custom(Box<dyn Fn(&Embedding) -> Result<Embedding>>),
}

impl RsOracle {
    pub fn identity(d: usize) -> Result<Self> {
        Ok(Self::Identity(IdentityOracle::new(d)?))
    }

    /// Decode and re-embed: the embedding the stored MII image produces.
    pub fn round_trip(&self, latent: &Embedding) -> Result<Embedding> {
        match self {
            Self::Identity(oracle) => {
                let image = oracle.decode(latent)?;
                oracle.unpack(&image)
            }
            Self::Custom(f) => f(latent),
        }
    }
}

/// The accomplice-selection scatter: per attack, the reference-pair
/// distance under the attacker's comparator against the achieved MII
/// distance under the attacked comparator.
#[derive(Debug, Clone)]
pub struct AccompliceReport {
    pub points: Vec<AccomplicePoint>,
    pub eps: f64,
    pub median_ref_dist: f64,
    pub overall_rate: f64,
    pub below_median_rate: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct AccomplicePoint {
    pub ref_dist_attacker: f64,
    pub mii_dist_attacked: f64,
    pub success: bool,
}

/// Ideal-method accomplice analysis at threshold `eps`: overall success
/// rate and the rate conditioned on the attacker-side reference distance
/// at or below its median.
pub fn accomplice_analysis(
    world: &World,
    attacker: &SyntheticComparator,
    attacked: &SyntheticComparator,
    identity_pairs: &[(usize, usize)],
    eps: f64,
) -> Result<AccompliceReport> {
    if identity_pairs.is_empty() {
        return Err(MiiError::EmptyInput("identity pair list"));
    }
    let attacker_view = embed_world(world, attacker)?;
    let attacked_view = embed_world(world, attacked)?;
    let attack_quads = quads_from_view(&attacker_view, identity_pairs, REF_CAPTURE, LIVE_CAPTURE)?;
    let score_quads = quads_from_view(&attacked_view, identity_pairs, REF_CAPTURE, LIVE_CAPTURE)?;

    let mut points = Vec::with_capacity(attack_quads.len());
    for (ai, (aq, sq)) in attack_quads.iter().zip(&score_quads).enumerate() {
        let ref_dist = crate::sphere::angular_distance(&aq.p_ref, &aq.q_ref)?.radians();
        let target = spherical_midpoint(&aq.p_ref, &aq.q_ref)?;
        let realized = if attacker.id() == attacked.id() {
            target
        } else {
            let latent = attacker.back_rotate(&target)?;
            attacked_realization(attacked, &latent, ai)?
        };
        let mii_dist = crate::sphere::mii_distance(&sq.p_live, &sq.q_live, &realized)?.radians();
        points.push(AccomplicePoint {
            ref_dist_attacker: ref_dist,
            mii_dist_attacked: mii_dist,
            success: mii_dist <= eps,
        });
    }

    let mut sorted: Vec<f64> = points.iter().map(|p| p.ref_dist_attacker).collect();
    sorted.sort_by(f64::total_cmp);
    // Lower-middle order statistic: the at-or-below bucket is never empty.
    let median = sorted[(sorted.len() - 1) / 2];
    let overall =
        points.iter().filter(|p| p.success).count() as f64 / points.len() as f64;
    let below: Vec<&AccomplicePoint> = points
        .iter()
        .filter(|p| p.ref_dist_attacker <= median)
        .collect();
    let below_rate = below.iter().filter(|p| p.success).count() as f64 / below.len() as f64;
    Ok(AccompliceReport {
        points,
        eps,
        median_ref_dist: median,
        overall_rate: overall,
        below_median_rate: below_rate,
    })
}

/// Convenience: quads for scoring under one comparator view.
pub fn quads_for(
    world: &World,
    comparator: &SyntheticComparator,
    identity_pairs: &[(usize, usize)],
) -> Result<Vec<AttackQuad>> {
    let view = embed_world(world, comparator)?;
    quads_from_view(&view, identity_pairs, REF_CAPTURE, LIVE_CAPTURE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{success_rate, ThresholdTable};
    use crate::ideal::sample_identity_pairs;
    use crate::world::{generate_world, ConcentrationRegime, WorldConfig};

    fn test_world(kappa: f64, seed: u64) -> World {
        generate_world(&WorldConfig {
            d: 24,
            n_identities: 60,
            images_per_identity: 2,
            regime: ConcentrationRegime::Explicit(kappa),
            seed,
        })
        .unwrap()
    }

    fn table_for(world: &World, cmp: &SyntheticComparator) -> ThresholdTable {
        let view = embed_world(world, cmp).unwrap();
        let pairs = crate::eval::negative_pairs(world.n_identities(), 2, 100_000, 1).unwrap();
        let neg = crate::eval::pair_distances(&view, &pairs).unwrap();
        ThresholdTable::standard_from_negatives(&neg).unwrap()
    }

    #[test]
    fn zero_variance_ideal_attacks_always_succeed_above_half_support() {
        // kappa -> infinity: lives equal refs, so the ideal distance is half
        // the reference distance, fully below any epsilon above half the
        // negative support.
        let world = test_world(1e9, 11);
        let latent = SyntheticComparator::pass_through("latent", 24).unwrap();
        let view = embed_world(&world, &latent).unwrap();
        let pairs = sample_identity_pairs(world.n_identities(), 300, 3).unwrap();
        let table = table_for(&world, &latent);
        let outcomes = ideal_outcomes(&view, &pairs, &table).unwrap();
        // eps_4 (FAR 10%) sits near pi/2, far above the ~pi/4 ideal dists.
        let rate = success_rate(&outcomes, 4).unwrap();
        assert_eq!(rate, 1.0);
    }

    #[test]
    fn gs_with_midpoint_gallery_matches_ideal_exactly() {
        let world = test_world(200.0, 12);
        let latent = SyntheticComparator::pass_through("latent", 24).unwrap();
        let view = embed_world(&world, &latent).unwrap();
        let pairs = sample_identity_pairs(world.n_identities(), 200, 4).unwrap();
        let table = table_for(&world, &latent);

        let quads = quads_from_view(&view, &pairs, REF_CAPTURE, LIVE_CAPTURE).unwrap();
        let mids: Vec<Embedding> = quads.iter().map(|q| ideal_mii(q).unwrap()).collect();
        let gallery = Gallery::from_embeddings(&mids).unwrap();

        let ideal = ideal_outcomes(&view, &pairs, &table).unwrap();
        let gs = gs_outcomes(
            &world, &latent, &latent, &gallery, &pairs, &table, false, None,
        )
        .unwrap();
        for (a, b) in ideal.iter().zip(&gs) {
            assert_eq!(a.mii_dist.radians(), b.mii_dist.radians());
            assert_eq!(a.success_at, b.success_at);
        }
    }

    #[test]
    fn rs_stub_with_pass_through_matches_ideal_exactly_modulo_packing() {
        let world = test_world(200.0, 13);
        let latent = SyntheticComparator::pass_through("latent", 24).unwrap();
        let view = embed_world(&world, &latent).unwrap();
        let pairs = sample_identity_pairs(world.n_identities(), 100, 5).unwrap();
        let table = table_for(&world, &latent);
        let oracle = RsOracle::identity(24).unwrap();
        let rs = rs_stub_outcomes(&world, &latent, &latent, &oracle, &pairs, &table).unwrap();
        let ideal = ideal_outcomes(&view, &pairs, &table).unwrap();
        for (a, b) in ideal.iter().zip(&rs) {
            assert!((a.mii_dist.radians() - b.mii_dist.radians()).abs() < 1e-9);
        }
    }

    #[test]
    fn transfer_degrades_with_noise_but_tracks_matched_mode() {
        let world = test_world(300.0, 14);
        let matched = SyntheticComparator::from_seed("atk", 24, 0.05, 21).unwrap();
        let other = SyntheticComparator::from_seed("victim", 24, 0.05, 22).unwrap();
        let pairs = sample_identity_pairs(world.n_identities(), 250, 6).unwrap();
        let table_matched = table_for(&world, &matched);
        let table_other = table_for(&world, &other);
        let oracle = RsOracle::identity(24).unwrap();
        let rs_matched =
            rs_stub_outcomes(&world, &matched, &matched, &oracle, &pairs, &table_matched).unwrap();
        let rs_transfer =
            rs_stub_outcomes(&world, &matched, &other, &oracle, &pairs, &table_other).unwrap();
        let m = success_rate(&rs_matched, 4).unwrap();
        let t = success_rate(&rs_transfer, 4).unwrap();
        assert!(m > 0.0);
        assert!(t > 0.0, "transfer should remain effective");
        assert!(m >= t - 0.05, "matched should not trail transfer: {m} vs {t}");
    }

    #[test]
    fn accomplice_conditioning_never_hurts_when_matched() {
        let world = test_world(120.0, 15);
        let latent = SyntheticComparator::pass_through("latent", 24).unwrap();
        let pairs = sample_identity_pairs(world.n_identities(), 400, 7).unwrap();
        let table = table_for(&world, &latent);
        let eps = table.epsilon(crate::eval::EPS2_INDEX).unwrap();
        let report = accomplice_analysis(&world, &latent, &latent, &pairs, eps).unwrap();
        assert!(report.below_median_rate >= report.overall_rate - 1e-12);
        let below = report
            .points
            .iter()
            .filter(|p| p.ref_dist_attacker <= report.median_ref_dist)
            .count();
        assert!(below > 0);
    }
}
