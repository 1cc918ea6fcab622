//! The hypothetical ideal MII generator: an attack whose embedding is the
//! spherical midpoint of the two reference embeddings, evaluated against the
//! live captures, with the halved non-matching distribution as its
//! lives-equal-refs reference.

use std::collections::HashSet;

use rand::Rng;

use crate::error::{MiiError, Result};
use crate::rng::{self, TAG_QUADS};
use crate::sphere::{self, spherical_midpoint, Embedding};
use crate::world::EmbeddedWorld;

/// Capture index used for reference images when building quads.
pub const REF_CAPTURE: usize = 0;
/// Capture index used for live images when building quads.
pub const LIVE_CAPTURE: usize = 1;

/// One adversary/accomplice pairing: reference captures used to build the
/// MII and live captures it is scored against.
#[derive(Debug, Clone)]
pub struct AttackQuad {
    pub p_ref: Embedding,
    pub p_live: Embedding,
    pub q_ref: Embedding,
    pub q_live: Embedding,
    pub p_identity: usize,
    pub q_identity: usize,
}

impl AttackQuad {
    pub fn new(
        p_ref: Embedding,
        p_live: Embedding,
        q_ref: Embedding,
        q_live: Embedding,
        p_identity: usize,
        q_identity: usize,
    ) -> Result<Self> {
        if p_identity == q_identity {
            return Err(MiiError::InvalidParameter(
                "adversary and accomplice must be distinct identities".into(),
            ));
        }
        let d = p_ref.dim();
        for e in [&p_live, &q_ref, &q_live] {
            if e.dim() != d {
                return Err(MiiError::DimensionMismatch {
                    expected: d,
                    got: e.dim(),
                });
            }
        }
        Ok(Self {
            p_ref,
            p_live,
            q_ref,
            q_live,
            p_identity,
            q_identity,
        })
    }
}

/// The ideal MII embedding for a quad: the spherical midpoint of the
/// reference embeddings.
pub fn ideal_mii(quad: &AttackQuad) -> Result<Embedding> {
    spherical_midpoint(&quad.p_ref, &quad.q_ref)
}

/// Per quad, the MII distance of the midpoint-of-references against the
/// live pair.
pub fn ideal_attack_distances(quads: &[AttackQuad]) -> Result<Vec<f64>> {
    if quads.is_empty() {
        return Err(MiiError::EmptyInput("quad list"));
    }
    quads
        .iter()
        .map(|q| {
            let m = ideal_mii(q)?;
            Ok(sphere::mii_angle(
                q.p_live.coords(),
                q.q_live.coords(),
                m.coords(),
            ))
        })
        .collect()
}

/// Elementwise halving: the distribution ideal attacks achieve when live
/// captures coincide with the references.
pub fn halved_negative_distribution(neg_dists: &[f64]) -> Vec<f64> {
    neg_dists.iter().map(|d| d / 2.0).collect()
}

/// Draws `n_pairs` distinct unordered identity pairs, seeded. Enumerates all
/// pairs when `n_pairs` covers them.
pub fn sample_identity_pairs(
    n_identities: usize,
    n_pairs: usize,
    seed: u64,
) -> Result<Vec<(usize, usize)>> {
    if n_identities < 2 {
        return Err(MiiError::InvalidParameter(
            "need at least 2 identities to pair".into(),
        ));
    }
    if n_pairs == 0 {
        return Err(MiiError::InvalidParameter("n_pairs must be positive".into()));
    }
    let total = n_identities * (n_identities - 1) / 2;
    if n_pairs >= total {
        let mut all = Vec::with_capacity(total);
        for i in 0..n_identities {
            for j in (i + 1)..n_identities {
                all.push((i, j));
            }
        }
        return Ok(all);
    }
    let mut r = rng::stream(&[seed, TAG_QUADS]);
    let mut seen = HashSet::with_capacity(n_pairs);
    let mut pairs = Vec::with_capacity(n_pairs);
    while pairs.len() < n_pairs {
        let i = r.random_range(0..n_identities);
        let j = r.random_range(0..n_identities);
        if i == j {
            continue;
        }
        let key = if i < j { (i, j) } else { (j, i) };
        if seen.insert(key) {
            pairs.push(key);
        }
    }
    Ok(pairs)
}

/// Materializes quads from a comparator view of a world, using the
/// designated reference and live captures.
pub fn quads_from_view(
    view: &EmbeddedWorld,
    pairs: &[(usize, usize)],
    ref_capture: usize,
    live_capture: usize,
) -> Result<Vec<AttackQuad>> {
    if ref_capture == live_capture {
        return Err(MiiError::InvalidParameter(
            "reference and live captures must differ".into(),
        ));
    }
    pairs
        .iter()
        .map(|&(p, q)| {
            AttackQuad::new(
                view.get(p, ref_capture)?.clone(),
                view.get(p, live_capture)?.clone(),
                view.get(q, ref_capture)?.clone(),
                view.get(q, live_capture)?.clone(),
                p,
                q,
            )
        })
        .collect()
}
