//! Representation-space MII construction and decoder-training loss algebra.
//!
//! The attack target is the spherical midpoint of the reference
//! representations; synthesizing an image for it is delegated to a
//! [`DecoderOracle`] supplied by the caller, so the numerical pipeline can
//! be exercised with stub oracles while a neural decoder stays out of
//! scope. The loss functions consume precomputed tensors/scalars and reduce
//! with arithmetic means.

use crate::error::{MiiError, Result};
use crate::morph::raster::{RasterImage, CHANNELS};
use crate::sphere::{self, spherical_midpoint, Embedding};

/// Weights of the combined decoder-training objective
/// λ_pix·L1_pixel + λ_adv·L_adv + λ_feat·L2_feature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub lambda_pix: f64,
    pub lambda_adv: f64,
    pub lambda_feat: f64,
}

impl LossWeights {
    pub fn new(lambda_pix: f64, lambda_adv: f64, lambda_feat: f64) -> Result<Self> {
        for (name, v) in [
            ("lambda_pix", lambda_pix),
            ("lambda_adv", lambda_adv),
            ("lambda_feat", lambda_feat),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(MiiError::InvalidParameter(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        Ok(Self {
            lambda_pix,
            lambda_adv,
            lambda_feat,
        })
    }
}

impl Default for LossWeights {
    /// The empirically settled training weights: pixel 10, adversarial 1,
    /// feature 300.
    fn default() -> Self {
        Self {
            lambda_pix: 10.0,
            lambda_adv: 1.0,
            lambda_feat: 300.0,
        }
    }
}

/// An abstract decoder g: embedding -> image with fixed output dimensions.
/// Implementations range from test stubs to external processes.
pub trait DecoderOracle {
    fn decode(&self, embedding: &Embedding) -> Result<RasterImage>;
    /// (width, height) of every decoded image.
    fn output_dims(&self) -> (usize, usize);
}

/// A lossless stub: packs the embedding's coordinates into image samples
/// via (x+1)/2, one value per channel slot, zero-padded. [`IdentityOracle::unpack`]
/// inverts it, so decode-then-reembed is exact.
#[derive(Debug, Clone)]
pub struct IdentityOracle {
    d: usize,
    width: usize,
}

impl IdentityOracle {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(MiiError::DimensionTooSmall(d));
        }
        Ok(Self {
            d,
            width: d.div_ceil(CHANNELS),
        })
    }

    /// Recovers the packed embedding from a decoded image.
    pub fn unpack(&self, image: &RasterImage) -> Result<Embedding> {
        if image.width() != self.width || image.height() != 1 {
            return Err(MiiError::ShapeMismatch(format!(
                "expected {}x1 packed image, got {}x{}",
                self.width,
                image.width(),
                image.height()
            )));
        }
        let coords: Vec<f64> = image.data()[..self.d]
            .iter()
            .map(|&v| 2.0 * v - 1.0)
            .collect();
        Embedding::from_unnormalized(coords)
    }
}

impl DecoderOracle for IdentityOracle {
    fn decode(&self, embedding: &Embedding) -> Result<RasterImage> {
        if embedding.dim() != self.d {
            return Err(MiiError::DimensionMismatch {
                expected: self.d,
                got: embedding.dim(),
            });
        }
        let mut data = vec![0.5; self.width * CHANNELS];
        for (slot, &x) in data.iter_mut().zip(embedding.coords()) {
            *slot = (x + 1.0) / 2.0;
        }
        RasterImage::from_data(self.width, 1, data)
    }

    fn output_dims(&self) -> (usize, usize) {
        (self.width, 1)
    }
}

/// A nearest-neighbor lookup oracle over stored (embedding, image) pairs;
/// ties break to the lowest entry index.
pub struct TableOracle {
    entries: Vec<(Embedding, RasterImage)>,
}

impl TableOracle {
    pub fn new(entries: Vec<(Embedding, RasterImage)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(MiiError::EmptyInput("oracle table"));
        }
        let d = entries[0].0.dim();
        let dims = (entries[0].1.width(), entries[0].1.height());
        for (e, img) in &entries {
            if e.dim() != d {
                return Err(MiiError::DimensionMismatch {
                    expected: d,
                    got: e.dim(),
                });
            }
            if (img.width(), img.height()) != dims {
                return Err(MiiError::ShapeMismatch(
                    "oracle table images must share dimensions".into(),
                ));
            }
        }
        Ok(Self { entries })
    }
}

impl DecoderOracle for TableOracle {
    fn decode(&self, embedding: &Embedding) -> Result<RasterImage> {
        let mut best = (f64::INFINITY, 0usize);
        for (i, (e, _)) in self.entries.iter().enumerate() {
            let d = sphere::angle_between(e.coords(), embedding.coords());
            if d < best.0 {
                best = (d, i);
            }
        }
        Ok(self.entries[best.1].1.clone())
    }

    fn output_dims(&self) -> (usize, usize) {
        (self.entries[0].1.width(), self.entries[0].1.height())
    }
}

/// The representation-space attack target: the spherical midpoint of the
/// reference representations, handed to a decoder for synthesis.
pub fn rs_target(p_ref: &Embedding, q_ref: &Embedding) -> Result<Embedding> {
    spherical_midpoint(p_ref, q_ref)
}

fn check_batches(a: &[RasterImage], b: &[RasterImage]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(MiiError::EmptyInput("image batch"));
    }
    if a.len() != b.len() {
        return Err(MiiError::ShapeMismatch(format!(
            "batch sizes differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    for (x, y) in a.iter().zip(b) {
        if x.width() != y.width() || x.height() != y.height() {
            return Err(MiiError::ShapeMismatch(format!(
                "image shapes differ: {}x{} vs {}x{}",
                x.width(),
                x.height(),
                y.width(),
                y.height()
            )));
        }
    }
    Ok(())
}

/// Mean absolute deviation reconstruction loss: (1/n) Σ ‖recon−target‖₁,
/// the L1 norm summing over all samples of one image.
pub fn loss_pixel_l1(recon: &[RasterImage], target: &[RasterImage]) -> Result<f64> {
    check_batches(recon, target)?;
    let total: f64 = recon
        .iter()
        .zip(target)
        .map(|(r, t)| {
            r.data()
                .iter()
                .zip(t.data())
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>()
        })
        .sum();
    Ok(total / recon.len() as f64)
}

/// Least-squares discriminator loss: (1/n) Σ (d_real−1)² + d_fake².
pub fn loss_discriminator(d_real: &[f64], d_fake: &[f64]) -> Result<f64> {
    if d_real.is_empty() {
        return Err(MiiError::EmptyInput("discriminator outputs"));
    }
    if d_real.len() != d_fake.len() {
        return Err(MiiError::ShapeMismatch(format!(
            "output counts differ: {} vs {}",
            d_real.len(),
            d_fake.len()
        )));
    }
    let total: f64 = d_real
        .iter()
        .zip(d_fake)
        .map(|(r, f)| (r - 1.0) * (r - 1.0) + f * f)
        .sum();
    Ok(total / d_real.len() as f64)
}

/// Least-squares generator loss: (1/n) Σ (d_fake−1)².
pub fn loss_adversarial(d_fake: &[f64]) -> Result<f64> {
    if d_fake.is_empty() {
        return Err(MiiError::EmptyInput("discriminator outputs"));
    }
    let total: f64 = d_fake.iter().map(|f| (f - 1.0) * (f - 1.0)).sum();
    Ok(total / d_fake.len() as f64)
}

/// Feature-matching loss: (1/n) Σ ‖f(g(p)) − p‖₂² over embedding pairs.
pub fn loss_feature(recon_emb: &[Embedding], target_emb: &[Embedding]) -> Result<f64> {
    if recon_emb.is_empty() {
        return Err(MiiError::EmptyInput("embedding batch"));
    }
    if recon_emb.len() != target_emb.len() {
        return Err(MiiError::ShapeMismatch(format!(
            "batch sizes differ: {} vs {}",
            recon_emb.len(),
            target_emb.len()
        )));
    }
    let mut total = 0.0;
    for (r, t) in recon_emb.iter().zip(target_emb) {
        if r.dim() != t.dim() {
            return Err(MiiError::DimensionMismatch {
                expected: t.dim(),
                got: r.dim(),
            });
        }
        total += r
            .coords()
            .iter()
            .zip(t.coords())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
    }
    Ok(total / recon_emb.len() as f64)
}

/// The weighted total objective.
pub fn loss_total(w: &LossWeights, l_pix: f64, l_adv: f64, l_feat: f64) -> Result<f64> {
    for (name, v) in [("l_pix", l_pix), ("l_adv", l_adv), ("l_feat", l_feat)] {
        if !v.is_finite() || v < 0.0 {
            return Err(MiiError::InvalidParameter(format!(
                "{name} must be finite and >= 0, got {v}"
            )));
        }
    }
    Ok(w.lambda_pix * l_pix + w.lambda_adv * l_adv + w.lambda_feat * l_feat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{angular_distance, mii_distance, sample_uniform_sphere};

    #[test]
    fn rs_target_is_equidistant_midpoint() {
        let pts = sample_uniform_sphere(32, 2, 1).unwrap();
        let t = rs_target(&pts[0], &pts[1]).unwrap();
        let dp = angular_distance(&pts[0], &t).unwrap().radians();
        let dq = angular_distance(&pts[1], &t).unwrap().radians();
        assert!((dp - dq).abs() < 1e-12);
        let same = rs_target(&pts[0], &pts[0]).unwrap();
        for (a, b) in same.coords().iter().zip(pts[0].coords()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_oracle_round_trip_realizes_the_target_exactly() {
        // Identity-like oracle + pass-through re-embedding: the achieved MII
        // distance to the references is exactly half their distance.
        let pts = sample_uniform_sphere(37, 2, 2).unwrap();
        let oracle = IdentityOracle::new(37).unwrap();
        let target = rs_target(&pts[0], &pts[1]).unwrap();
        let image = oracle.decode(&target).unwrap();
        let reembedded = oracle.unpack(&image).unwrap();
        let achieved = mii_distance(&pts[0], &pts[1], &reembedded).unwrap().radians();
        let half = angular_distance(&pts[0], &pts[1]).unwrap().radians() / 2.0;
        assert!((achieved - half).abs() < 1e-9);
    }

    #[test]
    fn table_oracle_returns_nearest_entry() {
        let embs = sample_uniform_sphere(8, 3, 3).unwrap();
        let mut img0 = RasterImage::new(2, 2).unwrap();
        img0.set(0, 0, 0, 1.0);
        let img1 = RasterImage::new(2, 2).unwrap();
        let mut img2 = RasterImage::new(2, 2).unwrap();
        img2.set(1, 1, 2, 1.0);
        let table = TableOracle::new(vec![
            (embs[0].clone(), img0),
            (embs[1].clone(), img1.clone()),
            (embs[2].clone(), img2),
        ])
        .unwrap();
        let out = table.decode(&embs[1]).unwrap();
        assert_eq!(out, img1);
    }

    #[test]
    fn pixel_l1_closed_forms() {
        let zero = RasterImage::new(1, 1).unwrap();
        let recon = RasterImage::from_data(1, 1, vec![0.1, 0.0, 0.3]).unwrap();
        let target = RasterImage::from_data(1, 1, vec![0.0, 0.2, 0.0]).unwrap();
        assert_eq!(loss_pixel_l1(&[zero.clone()], &[zero.clone()]).unwrap(), 0.0);
        // Deviations (0.1, -0.2, 0.3) sum to 0.6 in absolute value.
        let l = loss_pixel_l1(&[recon.clone()], &[target.clone()]).unwrap();
        assert!((l - 0.6).abs() < 1e-12);
        // Mean over the batch: duplicating the pair leaves the value.
        let l2 = loss_pixel_l1(
            &[recon.clone(), recon.clone()],
            &[target.clone(), target.clone()],
        )
        .unwrap();
        assert!((l2 - 0.6).abs() < 1e-12);
        assert!(loss_pixel_l1(&[recon], &[]).is_err());
    }

    #[test]
    fn discriminator_loss_closed_forms() {
        assert_eq!(loss_discriminator(&[1.0, 1.0], &[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(loss_discriminator(&[0.0], &[1.0]).unwrap(), 2.0);
        assert_eq!(loss_discriminator(&[0.5], &[0.5]).unwrap(), 0.5);
        assert!(loss_discriminator(&[0.5], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn adversarial_loss_closed_forms() {
        assert_eq!(loss_adversarial(&[1.0, 1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(loss_adversarial(&[0.0]).unwrap(), 1.0);
        assert_eq!(loss_adversarial(&[0.0, 1.0]).unwrap(), 0.5);
        assert!(loss_adversarial(&[]).is_err());
    }

    #[test]
    fn feature_loss_closed_forms() {
        let e1 = Embedding::new(vec![1.0, 0.0]).unwrap();
        let e2 = Embedding::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(loss_feature(&[e1.clone()], &[e1.clone()]).unwrap(), 0.0);
        let orth = loss_feature(&[e1.clone()], &[e2.clone()]).unwrap();
        assert!((orth - 2.0).abs() < 1e-12);
        let anti = loss_feature(&[e1.clone()], &[e1.negated()]).unwrap();
        assert!((anti - 4.0).abs() < 1e-12);
    }

    #[test]
    fn feature_loss_matches_dot_identity() {
        // On unit vectors ‖a−b‖² = 2 − 2a·b, so the batch loss equals
        // 2 − 2·(mean dot product).
        let pts = sample_uniform_sphere(16, 40, 4).unwrap();
        let (a, b): (Vec<_>, Vec<_>) = pts
            .chunks_exact(2)
            .map(|c| (c[0].clone(), c[1].clone()))
            .unzip();
        let direct = loss_feature(&a, &b).unwrap();
        let mean_dot: f64 = a
            .iter()
            .zip(&b)
            .map(|(x, y)| x.dot(y).unwrap())
            .sum::<f64>()
            / a.len() as f64;
        assert!((direct - (2.0 - 2.0 * mean_dot)).abs() < 1e-9);
    }

    #[test]
    fn total_loss_weighted_sum_and_linearity() {
        let w = LossWeights::default();
        assert_eq!(loss_total(&w, 0.0, 0.0, 0.0).unwrap(), 0.0);
        let v = loss_total(&w, 0.1, 0.2, 0.01).unwrap();
        assert!((v - 4.2).abs() < 1e-12);
        let doubled = LossWeights::new(20.0, 2.0, 600.0).unwrap();
        let v2 = loss_total(&doubled, 0.1, 0.2, 0.01).unwrap();
        assert!((v2 - 2.0 * v).abs() < 1e-12);
        assert!(loss_total(&w, -0.1, 0.0, 0.0).is_err());
        assert!(LossWeights::new(-1.0, 0.0, 0.0).is_err());
    }
}
