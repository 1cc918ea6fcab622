//! von Mises-Fisher sampling on S^{d-1}.
//!
//! The vMF distribution is the maximum-entropy distribution on the sphere
//! with a fixed mean direction; it models one person's embedding cloud.
//! Sampling uses the standard rejection scheme on the tangent-normal
//! decomposition, which is exact at any dimension: draw the component w
//! along the mean from the marginal via a Beta envelope, draw a uniform
//! tangent direction, and combine as w·μ + √(1−w²)·v.

use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};

use crate::error::{MiiError, Result};
use crate::sphere::{self, Embedding};

#[derive(Debug, Clone)]
pub struct VonMisesFisher {
    mean: Vec<f64>,
    kappa: f64,
    // Envelope constants, precomputed; unused when kappa == 0.
    b: f64,
    x0: f64,
    c: f64,
    beta: Option<Beta<f64>>,
}

impl VonMisesFisher {
    /// `kappa == 0` degenerates to the uniform distribution on the sphere.
    pub fn new(mean_direction: &Embedding, kappa: f64) -> Result<Self> {
        if !kappa.is_finite() || kappa < 0.0 {
            return Err(MiiError::InvalidParameter(format!(
                "concentration must be finite and >= 0, got {kappa}"
            )));
        }
        let d = mean_direction.dim() as f64;
        // Stable form of (-2k + sqrt(4k^2 + (d-1)^2)) / (d-1).
        let b = (d - 1.0) / ((4.0 * kappa * kappa + (d - 1.0) * (d - 1.0)).sqrt() + 2.0 * kappa);
        let x0 = (1.0 - b) / (1.0 + b);
        let c = kappa * x0 + (d - 1.0) * (1.0 - x0 * x0).ln();
        let beta = if kappa > 0.0 {
            let a = (d - 1.0) / 2.0;
            Some(Beta::new(a, a).map_err(|e| {
                MiiError::InvalidParameter(format!("beta envelope construction failed: {e}"))
            })?)
        } else {
            None
        };
        Ok(Self {
            mean: mean_direction.coords().to_vec(),
            kappa,
            b,
            x0,
            c,
            beta,
        })
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Embedding {
        let d = self.mean.len();
        if self.kappa == 0.0 {
            return Embedding::new(sphere::random_unit_vector(rng, d))
                .expect("normalized vector is unit norm");
        }
        let dd = d as f64;
        let beta = self.beta.as_ref().expect("kappa > 0 has an envelope");
        let w = loop {
            let z: f64 = beta.sample(rng);
            // Map [0,1) to (0,1] so the log below is finite.
            let u: f64 = 1.0 - rng.random::<f64>();
            let w = (1.0 - (1.0 + self.b) * z) / (1.0 - (1.0 - self.b) * z);
            if self.kappa * w + (dd - 1.0) * (1.0 - self.x0 * w).ln() - self.c >= u.ln() {
                break w;
            }
        };
        // Uniform tangent direction orthogonal to the mean.
        let tangent = loop {
            let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            let along = sphere::dot(&g, &self.mean);
            let mut t: Vec<f64> = g
                .iter()
                .zip(&self.mean)
                .map(|(gi, mi)| gi - along * mi)
                .collect();
            let n = sphere::norm(&t);
            if n > 1e-12 {
                for ti in &mut t {
                    *ti /= n;
                }
                break t;
            }
        };
        let sin_part = (1.0 - w * w).max(0.0).sqrt();
        let coords: Vec<f64> = self
            .mean
            .iter()
            .zip(&tangent)
            .map(|(mi, ti)| w * mi + sin_part * ti)
            .collect();
        Embedding::from_unnormalized(coords).expect("vMF sample has positive norm")
    }
}
