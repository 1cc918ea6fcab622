//! Core geometry on the unit hypersphere S^{d-1}: embeddings, angular and
//! MII distances, spherical midpoints, and uniform sampling.
//!
//! All angles are handled in radians internally; conversion to degrees only
//! happens at reporting boundaries.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{MiiError, Result};
use crate::rng::{self, TAG_UNIFORM_SPHERE};

/// Tolerance on `|‖x‖₂ − 1|` for a vector to count as unit-norm.
pub const UNIT_NORM_TOL: f64 = 1e-9;

/// Pairs closer than this to π apart are rejected as antipodal: below it the
/// midpoint direction is numerically meaningless.
pub const ANTIPODAL_TOL: f64 = 1e-6;

/// A point on the unit sphere S^{d-1}; the representation of one face image.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    coords: Vec<f64>,
}

impl Embedding {
    /// Wraps coordinates that are already unit-norm (within [`UNIT_NORM_TOL`]).
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(MiiError::DimensionTooSmall(coords.len()));
        }
        let norm = norm(&coords);
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(MiiError::NotUnitNorm { norm });
        }
        Ok(Self { coords })
    }

    /// Normalizes arbitrary coordinates onto the sphere. Errors on vectors
    /// too close to the origin to have a direction.
    pub fn from_unnormalized(mut coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(MiiError::DimensionTooSmall(coords.len()));
        }
        let norm = norm(&coords);
        if !norm.is_finite() || norm < 1e-12 {
            return Err(MiiError::NotUnitNorm { norm });
        }
        for c in &mut coords {
            *c /= norm;
        }
        Ok(Self { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    /// Dot product, checking that dimensions agree.
    pub fn dot(&self, other: &Embedding) -> Result<f64> {
        check_dims(self, other)?;
        Ok(dot(&self.coords, other.coords()))
    }

    /// The antipode −x.
    pub fn negated(&self) -> Embedding {
        Embedding {
            coords: self.coords.iter().map(|c| -c).collect(),
        }
    }
}

/// An angle in [0, π]; the verification metric between two embeddings.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AngularDistance {
    radians: f64,
}

impl AngularDistance {
    pub fn from_radians(radians: f64) -> Result<Self> {
        if !(0.0..=std::f64::consts::PI).contains(&radians) {
            return Err(MiiError::InvalidParameter(format!(
                "angular distance {radians} outside [0, pi]"
            )));
        }
        Ok(Self { radians })
    }

    pub fn radians(self) -> f64 {
        self.radians
    }

    pub fn degrees(self) -> f64 {
        self.radians.to_degrees()
    }

    pub fn max(self, other: Self) -> Self {
        if other.radians > self.radians {
            other
        } else {
            self
        }
    }
}

/// Angular distance θ(p, q) = arccos(p · q).
///
/// The dot product is clamped to [-1, 1] before arccos so floating-point
/// drift near θ ≈ 0 or π cannot produce NaN. Symmetric in its arguments.
pub fn angular_distance(p: &Embedding, q: &Embedding) -> Result<AngularDistance> {
    check_dims(p, q)?;
    Ok(AngularDistance {
        radians: angle_between(p.coords(), q.coords()),
    })
}

/// MII distance θ̄((a, b), c) = max(θ(a, c), θ(b, c)).
///
/// An attack embedding c defeats both targets exactly when this is within
/// the verification threshold.
pub fn mii_distance(a: &Embedding, b: &Embedding, c: &Embedding) -> Result<AngularDistance> {
    check_dims(a, b)?;
    check_dims(a, c)?;
    Ok(AngularDistance {
        radians: mii_angle(a.coords(), b.coords(), c.coords()),
    })
}

/// Spherical midpoint (p + q) / ‖p + q‖₂.
///
/// Equidistant from p and q, at exactly half their angular distance from
/// each. Errors when the pair is antipodal within [`ANTIPODAL_TOL`], where
/// the midpoint direction is undefined.
pub fn spherical_midpoint(p: &Embedding, q: &Embedding) -> Result<Embedding> {
    check_dims(p, q)?;
    let theta = angle_between(p.coords(), q.coords());
    if theta > std::f64::consts::PI - ANTIPODAL_TOL {
        return Err(MiiError::AntipodalInputs);
    }
    let sum: Vec<f64> = p
        .coords()
        .iter()
        .zip(q.coords())
        .map(|(a, b)| a + b)
        .collect();
    Embedding::from_unnormalized(sum)
}

/// Draws `n` points uniformly on S^{d-1}: standard multivariate normal
/// followed by normalization, which is rotation invariant.
///
/// Deterministic for a fixed seed; parallel callers partition seeds.
pub fn sample_uniform_sphere(d: usize, n: usize, seed: u64) -> Result<Vec<Embedding>> {
    if d < 2 {
        return Err(MiiError::DimensionTooSmall(d));
    }
    if n == 0 {
        return Err(MiiError::InvalidParameter("n must be at least 1".into()));
    }
    let mut rng = rng::stream(&[seed, TAG_UNIFORM_SPHERE]);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(Embedding {
            coords: random_unit_vector(&mut rng, d),
        });
    }
    Ok(out)
}

/// Gaussian direction, redrawn in the (measure-zero) degenerate case.
pub(crate) fn random_unit_vector<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = norm(&v);
        if norm > 1e-12 {
            for c in &mut v {
                *c /= norm;
            }
            return v;
        }
    }
}

// Unchecked slice kernels shared by the bulk pipelines (gallery scans,
// evaluation loops) where dimensions are validated once up front.

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for i in 0..a.len() {
        acc += a[i] * b[i];
    }
    acc
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub(crate) fn angle_between(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b).clamp(-1.0, 1.0).acos()
}

#[inline]
pub(crate) fn mii_angle(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    angle_between(a, c).max(angle_between(b, c))
}

fn check_dims(a: &Embedding, b: &Embedding) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(MiiError::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(())
}
