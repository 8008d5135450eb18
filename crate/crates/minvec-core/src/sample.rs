//! Seeded sampling helpers. All randomness in the crate flows through
//! ChaCha8 streams keyed by a user seed, so runs are reproducible.

use nalgebra::DVector;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic RNG for a (seed, stream) pair. Distinct stages of a
/// pipeline use distinct streams so adding samples to one stage does not
/// shift another.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Standard normal via Box-Muller (keeps us independent of distribution
/// crate versions for byte-stable output).
pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Gaussian vector in R^n.
pub fn gaussian_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| normal(rng))
}

/// Uniform point on the unit sphere of R^n (n >= 1).
pub fn unit_sphere(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    loop {
        let v = gaussian_vector(rng, n);
        let norm = v.norm();
        if norm > 1e-6 {
            return v / norm;
        }
    }
}

/// Uniform vector in the cube [-a, a]^n.
pub fn uniform_cube(rng: &mut ChaCha8Rng, n: usize, a: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.gen_range(-a..=a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_streams() {
        let mut a = rng(42, 1);
        let mut b = rng(42, 1);
        let va = gaussian_vector(&mut a, 8);
        let vb = gaussian_vector(&mut b, 8);
        assert_eq!(va, vb);
        let mut c = rng(42, 2);
        let vc = gaussian_vector(&mut c, 8);
        assert_ne!(va, vc);
    }

    #[test]
    fn sphere_points_have_unit_norm() {
        let mut r = rng(7, 0);
        for _ in 0..16 {
            let v = unit_sphere(&mut r, 5);
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
    }
}
