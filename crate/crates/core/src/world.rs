//! Calibratable synthetic representation spaces.
//!
//! A world places identities as von Mises-Fisher clusters around uniformly
//! drawn mean directions; a family of comparators views the same latent
//! captures through per-comparator orthogonal rotations plus tangent capture
//! noise, which reproduces the positively correlated distance structure of
//! real comparator families with a single knob.
//!
//! Two named calibration regimes fix the concentration by bisecting κ until
//! the median same-identity pair distance hits a target window:
//!
//! - `low-intra-class-var`: constrained-capture data, median P⁺ near 0.75 rad;
//! - `high-intra-class-var`: unconstrained data, median P⁺ near 1.15 rad.
//!
//! The windows are chosen for d = 128, where non-matching pairs concentrate
//! at π/2; other dimensions calibrate to the same windows but shift the
//! attack-success regimes.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{MiiError, Result};
use crate::io;
use crate::rng::{
    self, TAG_ARRANGEMENT, TAG_CAPTURE, TAG_CALIBRATION, TAG_COMPARATOR_NOISE,
    TAG_COMPARATOR_ROTATION, TAG_IDENTITY_MEAN, TAG_IDENTITY_NOISE_KEY,
};
use crate::sphere::{self, Embedding};
use crate::vmf::VonMisesFisher;

/// Median same-identity distance window (radians) defining the
/// low-intra-class-variation regime.
pub const LOW_VAR_MEDIAN_WINDOW: (f64, f64) = (0.55, 0.95);

/// Median same-identity distance window (radians) defining the
/// high-intra-class-variation regime.
pub const HIGH_VAR_MEDIAN_WINDOW: (f64, f64) = (1.12, 1.18);

const CALIBRATION_IDENTITIES: usize = 600;
const MANIFEST_NAME: &str = "world.json";
const MEANS_NAME: &str = "means.miie";
const CAPTURES_NAME: &str = "captures.miie";

/// How the per-identity concentration κ is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConcentrationRegime {
    LowIntraClassVar,
    HighIntraClassVar,
    Explicit(f64),
}

impl fmt::Display for ConcentrationRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::LowIntraClassVar => write!(f, "low-intra-class-var"),
            Self::HighIntraClassVar => write!(f, "high-intra-class-var"),
            Self::Explicit(k) => write!(f, "kappa={k}"),
        }
    }
}

impl FromStr for ConcentrationRegime {
    type Err = MiiError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "low-intra-class-var" | "low" => Ok(Self::LowIntraClassVar),
            "high-intra-class-var" | "high" => Ok(Self::HighIntraClassVar),
            other => {
                if let Some(v) = other.strip_prefix("kappa=") {
                    let k: f64 = v.parse().map_err(|_| {
                        MiiError::InvalidParameter(format!("bad kappa value {v:?}"))
                    })?;
                    if !k.is_finite() || k < 0.0 {
                        return Err(MiiError::InvalidParameter(format!(
                            "kappa must be finite and >= 0, got {k}"
                        )));
                    }
                    Ok(Self::Explicit(k))
                } else {
                    Err(MiiError::InvalidParameter(format!(
                        "unknown regime {other:?}; expected low-intra-class-var, \
                         high-intra-class-var, or kappa=<value>"
                    )))
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct WorldConfig {
    pub d: usize,
    pub n_identities: usize,
    pub images_per_identity: usize,
    pub regime: ConcentrationRegime,
    pub seed: u64,
}

impl WorldConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(MiiError::DimensionTooSmall(self.d));
        }
        if self.n_identities < 2 {
            return Err(MiiError::InvalidParameter(format!(
                "n_identities must be at least 2, got {}",
                self.n_identities
            )));
        }
        if self.images_per_identity < 2 {
            return Err(MiiError::InvalidParameter(format!(
                "images_per_identity must be at least 2, got {}",
                self.images_per_identity
            )));
        }
        if let ConcentrationRegime::Explicit(k) = self.regime {
            if !k.is_finite() || k < 0.0 {
                return Err(MiiError::InvalidParameter(format!(
                    "explicit kappa must be finite and >= 0, got {k}"
                )));
            }
        }
        Ok(())
    }
}

/// One person's embedding cloud: a mean direction, a concentration, and the
/// latent captures drawn from it.
#[derive(Debug, Clone)]
pub struct IdentityModel {
    mean_direction: Embedding,
    concentration: f64,
    captures: Vec<Embedding>,
    noise_key: u64,
}

impl IdentityModel {
    pub fn mean_direction(&self) -> &Embedding {
        &self.mean_direction
    }

    pub fn concentration(&self) -> f64 {
        self.concentration
    }

    pub fn captures(&self) -> &[Embedding] {
        &self.captures
    }

    pub fn capture(&self, index: usize) -> Result<&Embedding> {
        self.captures.get(index).ok_or(MiiError::IndexOutOfRange {
            index,
            len: self.captures.len(),
        })
    }

    /// Stable key feeding comparator-noise streams for this identity.
    pub fn noise_key(&self) -> u64 {
        self.noise_key
    }
}

/// A generated world: identity models plus the resolved concentration.
#[derive(Debug, Clone)]
pub struct World {
    d: usize,
    regime: ConcentrationRegime,
    kappa: f64,
    seed: u64,
    images_per_identity: usize,
    identities: Vec<IdentityModel>,
}

impl World {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn regime(&self) -> ConcentrationRegime {
        self.regime
    }

    pub fn n_identities(&self) -> usize {
        self.identities.len()
    }

    pub fn images_per_identity(&self) -> usize {
        self.images_per_identity
    }

    pub fn identities(&self) -> &[IdentityModel] {
        &self.identities
    }

    pub fn identity(&self, index: usize) -> Result<&IdentityModel> {
        self.identities.get(index).ok_or(MiiError::IndexOutOfRange {
            index,
            len: self.identities.len(),
        })
    }

    /// Writes `world.json`, `means.miie`, and `captures.miie` into `dir`.
    pub fn save<P: AsRef<Path>>(&self, dir: P) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let manifest = WorldManifest {
            format_version: 1,
            d: self.d,
            n_identities: self.identities.len(),
            images_per_identity: self.images_per_identity,
            regime: self.regime.to_string(),
            kappa: self.kappa,
            seed: self.seed,
        };
        let json = serde_json::to_string_pretty(&manifest)
            .map_err(|e| MiiError::Format(e.to_string()))?;
        fs::write(dir.join(MANIFEST_NAME), json + "\n")?;
        let means: Vec<Embedding> = self
            .identities
            .iter()
            .map(|i| i.mean_direction.clone())
            .collect();
        io::write_embeddings_file(dir.join(MEANS_NAME), &means)?;
        let captures: Vec<Embedding> = self
            .identities
            .iter()
            .flat_map(|i| i.captures.iter().cloned())
            .collect();
        io::write_embeddings_file(dir.join(CAPTURES_NAME), &captures)?;
        Ok(())
    }

    /// Reconstructs a world from `save` output. Stored records are 32-bit,
    /// so a loaded world is the canonical f32-rounded view of the generated
    /// one; downstream runs from files are bit-reproducible.
    pub fn load<P: AsRef<Path>>(dir: P) -> Result<World> {
        let dir = dir.as_ref();
        let manifest: WorldManifest =
            serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST_NAME))?)
                .map_err(|e| MiiError::Format(format!("bad world manifest: {e}")))?;
        if manifest.format_version != 1 {
            return Err(MiiError::Format(format!(
                "unsupported world format version {}",
                manifest.format_version
            )));
        }
        let regime: ConcentrationRegime = manifest.regime.parse()?;
        let means = io::read_embeddings_file(dir.join(MEANS_NAME))?;
        let captures = io::read_embeddings_file(dir.join(CAPTURES_NAME))?;
        if means.len() != manifest.n_identities {
            return Err(MiiError::Format(format!(
                "means count {} does not match manifest ({})",
                means.len(),
                manifest.n_identities
            )));
        }
        if captures.len() != manifest.n_identities * manifest.images_per_identity {
            return Err(MiiError::Format(format!(
                "captures count {} does not match manifest ({}x{})",
                captures.len(),
                manifest.n_identities,
                manifest.images_per_identity
            )));
        }
        let k = manifest.images_per_identity;
        let identities = means
            .into_iter()
            .enumerate()
            .map(|(i, mean)| IdentityModel {
                mean_direction: mean,
                concentration: manifest.kappa,
                captures: captures[i * k..(i + 1) * k].to_vec(),
                noise_key: rng::mix(&[manifest.seed, TAG_IDENTITY_NOISE_KEY, i as u64]),
            })
            .collect();
        Ok(World {
            d: manifest.d,
            regime,
            kappa: manifest.kappa,
            seed: manifest.seed,
            images_per_identity: manifest.images_per_identity,
            identities,
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct WorldManifest {
    format_version: u32,
    d: usize,
    n_identities: usize,
    images_per_identity: usize,
    regime: String,
    kappa: f64,
    seed: u64,
}

/// Generates a world: identity means uniform on the sphere, captures vMF
/// around each mean, concentration from the regime. Deterministic in the
/// seed; each capture has its own derived stream so captures can be
/// regenerated independently.
pub fn generate_world(cfg: &WorldConfig) -> Result<World> {
    cfg.validate()?;
    let kappa = match cfg.regime {
        ConcentrationRegime::Explicit(k) => k,
        ConcentrationRegime::LowIntraClassVar => {
            calibrate_kappa(cfg.d, LOW_VAR_MEDIAN_WINDOW, cfg.seed)?
        }
        ConcentrationRegime::HighIntraClassVar => {
            calibrate_kappa(cfg.d, HIGH_VAR_MEDIAN_WINDOW, cfg.seed)?
        }
    };
    let mut mean_rng = rng::stream(&[cfg.seed, TAG_IDENTITY_MEAN]);
    let mut identities = Vec::with_capacity(cfg.n_identities);
    for i in 0..cfg.n_identities {
        let mean = Embedding::new(sphere::random_unit_vector(&mut mean_rng, cfg.d))
            .expect("normalized vector");
        let vmf = VonMisesFisher::new(&mean, kappa)?;
        let captures = (0..cfg.images_per_identity)
            .map(|c| {
                let mut r = rng::stream(&[cfg.seed, TAG_CAPTURE, i as u64, c as u64]);
                vmf.sample(&mut r)
            })
            .collect();
        identities.push(IdentityModel {
            mean_direction: mean,
            concentration: kappa,
            captures,
            noise_key: rng::mix(&[cfg.seed, TAG_IDENTITY_NOISE_KEY, i as u64]),
        });
    }
    Ok(World {
        d: cfg.d,
        regime: cfg.regime,
        kappa,
        seed: cfg.seed,
        images_per_identity: cfg.images_per_identity,
        identities,
    })
}

/// Bisects κ (on a log grid) until the probe median same-identity distance
/// hits the center of `window`. The probe redraws the same seeded population
/// at every κ, so the objective is deterministic and decreasing.
fn calibrate_kappa(d: usize, window: (f64, f64), seed: u64) -> Result<f64> {
    let target = 0.5 * (window.0 + window.1);
    let probe = |kappa: f64| -> Result<f64> {
        let mut r = rng::stream(&[seed, TAG_CALIBRATION]);
        let mut dists = Vec::with_capacity(CALIBRATION_IDENTITIES);
        for _ in 0..CALIBRATION_IDENTITIES {
            let mean = Embedding::new(sphere::random_unit_vector(&mut r, d))
                .expect("normalized vector");
            let vmf = VonMisesFisher::new(&mean, kappa)?;
            let a = vmf.sample(&mut r);
            let b = vmf.sample(&mut r);
            dists.push(sphere::angle_between(a.coords(), b.coords()));
        }
        dists.sort_by(f64::total_cmp);
        Ok(dists[dists.len() / 2])
    };
    let (mut lo, mut hi) = (1e-3f64.ln(), 1e9f64.ln());
    if probe(lo.exp())? < target {
        return Err(MiiError::InvalidParameter(format!(
            "median window {window:?} unreachable: even kappa={} is too concentrated",
            lo.exp()
        )));
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if probe(mid.exp())? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let kappa = (0.5 * (lo + hi)).exp();
    let achieved = probe(kappa)?;
    if achieved < window.0 || achieved > window.1 {
        return Err(MiiError::InvalidParameter(format!(
            "calibration landed at median {achieved:.4} outside window {window:?}"
        )));
    }
    Ok(kappa)
}

/// A deterministic seeded map from latent captures to comparator-space
/// embeddings: an orthogonal rotation, tangent capture noise, and an
/// identity-anchored arrangement bias.
///
/// Capture noise is independent per (comparator, identity, capture) and
/// models processing variation. The arrangement bias is one tangent
/// direction per (comparator, identity): both captures of an identity share
/// it, so same-identity distances barely move while cross-identity
/// distances pick up comparator-specific jitter. That asymmetry is what
/// makes matching-pair distances correlate more strongly across comparators
/// than non-matching ones, as real comparator families do.
#[derive(Debug, Clone)]
pub struct SyntheticComparator {
    id: String,
    d: usize,
    /// Row-major d x d orthogonal matrix; `None` is the identity.
    rotation: Option<Vec<f64>>,
    noise_scale: f64,
    arrangement_scale: f64,
    seed: u64,
}

impl SyntheticComparator {
    /// The pass-through comparator: identity rotation, zero noise. Embeds
    /// latent captures unchanged.
    pub fn pass_through(id: &str, d: usize) -> Result<Self> {
        if d < 2 {
            return Err(MiiError::DimensionTooSmall(d));
        }
        Ok(Self {
            id: id.to_string(),
            d,
            rotation: None,
            noise_scale: 0.0,
            arrangement_scale: 0.0,
            seed: 0,
        })
    }

    /// A comparator with a seeded random rotation and the given tangent
    /// capture-noise magnitude (no arrangement bias).
    pub fn from_seed(id: &str, d: usize, noise_scale: f64, seed: u64) -> Result<Self> {
        Self::with_arrangement(id, d, noise_scale, 0.0, seed)
    }

    /// A comparator with both capture noise and an identity-anchored
    /// arrangement bias of the given magnitude.
    pub fn with_arrangement(
        id: &str,
        d: usize,
        noise_scale: f64,
        arrangement_scale: f64,
        seed: u64,
    ) -> Result<Self> {
        if d < 2 {
            return Err(MiiError::DimensionTooSmall(d));
        }
        for (name, v) in [
            ("noise_scale", noise_scale),
            ("arrangement_scale", arrangement_scale),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(MiiError::InvalidParameter(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        let rotation = random_rotation(d, seed);
        Ok(Self {
            id: id.to_string(),
            d,
            rotation: Some(rotation),
            noise_scale,
            arrangement_scale,
            seed,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn noise_scale(&self) -> f64 {
        self.noise_scale
    }

    pub fn arrangement_scale(&self) -> f64 {
        self.arrangement_scale
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// True when this comparator maps latents to themselves exactly.
    pub fn is_pass_through(&self) -> bool {
        self.rotation.is_none() && self.noise_scale == 0.0 && self.arrangement_scale == 0.0
    }

    /// Max deviation of R·Rᵀ from the identity; the orthogonality invariant.
    pub fn orthogonality_error(&self) -> f64 {
        let Some(rot) = &self.rotation else {
            return 0.0;
        };
        let d = self.d;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                let dot = sphere::dot(&rot[i * d..(i + 1) * d], &rot[j * d..(j + 1) * d]);
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    /// Embeds one capture of an identity into this comparator's space.
    ///
    /// Deterministic: the latent capture is fixed by the world, capture
    /// noise is keyed by (comparator seed, identity, capture), and the
    /// arrangement bias by (comparator seed, identity) so all captures of
    /// one identity share it. With the identity rotation and zero noise the
    /// latent is returned unchanged.
    pub fn embed(&self, identity: &IdentityModel, capture_index: usize) -> Result<Embedding> {
        let latent = identity.capture(capture_index)?;
        self.view_keyed(
            latent,
            rng::mix(&[identity.noise_key(), capture_index as u64]),
            identity.noise_key(),
        )
    }

    /// Embeds an arbitrary latent direction (an MII, a gallery member) into
    /// this comparator's space; `key` pins both noise draws, standing in
    /// for the image's identity.
    pub fn view(&self, latent: &Embedding, key: u64) -> Result<Embedding> {
        self.view_keyed(latent, key, key)
    }

    fn view_keyed(&self, latent: &Embedding, capture_key: u64, bias_key: u64) -> Result<Embedding> {
        if latent.dim() != self.d {
            return Err(MiiError::DimensionMismatch {
                expected: self.d,
                got: latent.dim(),
            });
        }
        let noiseless = self.noise_scale == 0.0 && self.arrangement_scale == 0.0;
        let rotated: Vec<f64> = match &self.rotation {
            None => {
                if noiseless {
                    return Ok(latent.clone());
                }
                latent.coords().to_vec()
            }
            Some(rot) => {
                let x = latent.coords();
                (0..self.d)
                    .map(|i| sphere::dot(&rot[i * self.d..(i + 1) * self.d], x))
                    .collect()
            }
        };
        if noiseless {
            // Rotation preserves the norm to ~1e-14, well inside tolerance.
            return Embedding::new(rotated).map_err(|_| {
                MiiError::InvalidParameter("rotation produced a non-unit vector".into())
            });
        }
        let mut noisy = rotated.clone();
        if self.noise_scale > 0.0 {
            let mut r = rng::stream(&[TAG_COMPARATOR_NOISE, self.seed, capture_key]);
            let t = tangent_direction(&mut r, &rotated);
            for (xi, ti) in noisy.iter_mut().zip(&t) {
                *xi += self.noise_scale * ti;
            }
        }
        if self.arrangement_scale > 0.0 {
            let mut r = rng::stream(&[TAG_ARRANGEMENT, self.seed, bias_key]);
            let t = tangent_direction(&mut r, &rotated);
            for (xi, ti) in noisy.iter_mut().zip(&t) {
                *xi += self.arrangement_scale * ti;
            }
        }
        Embedding::from_unnormalized(noisy)
    }

    /// Inverts the rotation (Rᵀ·x), recovering the latent direction a
    /// comparator-space embedding came from, noise aside.
    pub fn back_rotate(&self, emb: &Embedding) -> Result<Embedding> {
        if emb.dim() != self.d {
            return Err(MiiError::DimensionMismatch {
                expected: self.d,
                got: emb.dim(),
            });
        }
        let Some(rot) = &self.rotation else {
            return Ok(emb.clone());
        };
        let y = emb.coords();
        let mut x = vec![0.0; self.d];
        for (i, &yi) in y.iter().enumerate() {
            let row = &rot[i * self.d..(i + 1) * self.d];
            for (xj, &rij) in x.iter_mut().zip(row) {
                *xj += rij * yi;
            }
        }
        Embedding::from_unnormalized(x)
    }
}

/// Unit tangent direction at `at`, drawn from `rng`; redraws the
/// measure-zero degenerate projection.
fn tangent_direction<R: Rng>(rng: &mut R, at: &[f64]) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..at.len()).map(|_| rng.sample(StandardNormal)).collect();
        let along = sphere::dot(&g, at);
        let mut t: Vec<f64> = g.iter().zip(at).map(|(gi, xi)| gi - along * xi).collect();
        let n = sphere::norm(&t);
        if n > 1e-12 {
            for ti in &mut t {
                *ti /= n;
            }
            return t;
        }
    }
}

/// Seeded random orthogonal matrix: Gram-Schmidt with a second
/// re-orthogonalization pass over a Gaussian matrix.
fn random_rotation(d: usize, seed: u64) -> Vec<f64> {
    let mut r = rng::stream(&[TAG_COMPARATOR_ROTATION, seed]);
    let mut m: Vec<f64> = (0..d * d).map(|_| r.sample(StandardNormal)).collect();
    for i in 0..d {
        for _pass in 0..2 {
            for j in 0..i {
                let (head, tail) = m.split_at_mut(i * d);
                let row_j = &head[j * d..(j + 1) * d];
                let row_i = &mut tail[..d];
                let proj = sphere::dot(row_i, row_j);
                for (a, b) in row_i.iter_mut().zip(row_j) {
                    *a -= proj * b;
                }
            }
        }
        let row_i = &mut m[i * d..(i + 1) * d];
        let n = sphere::norm(row_i);
        // A Gaussian matrix is almost surely full rank; guard anyway.
        if n < 1e-9 {
            row_i[i % d] += 1.0;
        }
        let n = sphere::norm(row_i);
        for a in row_i.iter_mut() {
            *a /= n;
        }
    }
    m
}

/// All captures of a world embedded under one comparator, identity-major.
#[derive(Debug, Clone)]
pub struct EmbeddedWorld {
    d: usize,
    captures: Vec<Vec<Embedding>>,
}

impl EmbeddedWorld {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_identities(&self) -> usize {
        self.captures.len()
    }

    pub fn images_per_identity(&self) -> usize {
        self.captures.first().map_or(0, Vec::len)
    }

    pub fn identity_captures(&self, identity: usize) -> Result<&[Embedding]> {
        self.captures
            .get(identity)
            .map(Vec::as_slice)
            .ok_or(MiiError::IndexOutOfRange {
                index: identity,
                len: self.captures.len(),
            })
    }

    pub fn get(&self, identity: usize, capture: usize) -> Result<&Embedding> {
        let caps = self.identity_captures(identity)?;
        caps.get(capture).ok_or(MiiError::IndexOutOfRange {
            index: capture,
            len: caps.len(),
        })
    }
}

/// Embeds every capture of the world under `comparator`.
pub fn embed_world(world: &World, comparator: &SyntheticComparator) -> Result<EmbeddedWorld> {
    if comparator.d() != world.d() {
        return Err(MiiError::DimensionMismatch {
            expected: world.d(),
            got: comparator.d(),
        });
    }
    let captures = world
        .identities()
        .iter()
        .map(|ident| {
            (0..ident.captures().len())
                .map(|c| comparator.embed(ident, c))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EmbeddedWorld {
        d: world.d(),
        captures,
    })
}
