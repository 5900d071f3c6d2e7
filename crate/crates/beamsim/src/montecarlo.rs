//! Semiclassical Monte-Carlo shot-noise oracle.
//!
//! Photons arrive as a Poisson process with i.i.d. transverse positions
//! drawn from the mean-field intensity profile; a split detector assigns
//! each a +/-1 sign. The across-trial statistics of the signed sum give an
//! independent check on the linearized noise propagation: at the quantum
//! noise limit var(D)/N = 1, and the mean reproduces the erf deflection
//! curve. Trials are parallel yet bit-reproducible: every trial derives its
//! own ChaCha stream from the base seed, so thread count never matters.

use crate::error::{Error, Result};
use crate::modes::{mode_intensity, BeamParams, ModeSpec, TransversePoint};
use crate::overlap::Axis;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;

/// Draws transverse photon positions from |u_mode|^2.
///
/// The fundamental gets the exact inverse-CDF path (each axis is
/// Normal(0, w0/2)); every other mode falls back to rejection sampling
/// under a grid-scanned uniform envelope.
#[derive(Debug, Clone)]
pub struct PhotonSampler {
    mode: ModeSpec,
    beam: BeamParams,
    half_x: f64,
    half_y: f64,
    /// Envelope height for rejection sampling; unused on the fast path.
    bound: f64,
}

fn index_extent(w0: f64, m: u32) -> f64 {
    // classical turning point sqrt(2m+1) in psi units, plus tail margin
    w0 * ((2.0 * m as f64 + 1.0).sqrt() / std::f64::consts::SQRT_2 + 4.0)
}

impl PhotonSampler {
    pub fn new(mode: ModeSpec, beam: BeamParams) -> Self {
        let half_x = index_extent(beam.waist_w0, mode.m);
        let half_y = index_extent(beam.waist_w0, mode.n);
        let mut bound = 0.0_f64;
        if mode.base() != ModeSpec::hg(0, 0) {
            // flips only change signs, so scanning one quadrant would do;
            // scan the full box anyway, it is cheap and obviously right
            let n = 400;
            for i in 0..=n {
                let x = -half_x + 2.0 * half_x * i as f64 / n as f64;
                for j in 0..=n {
                    let y = -half_y + 2.0 * half_y * j as f64 / n as f64;
                    bound = bound.max(mode_intensity(mode, &beam, TransversePoint::new(x, y)));
                }
            }
            bound *= 1.05;
        }
        PhotonSampler {
            mode,
            beam,
            half_x,
            half_y,
            bound,
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Result<TransversePoint> {
        if self.mode.base() == ModeSpec::hg(0, 0) {
            let sigma = self.beam.waist_w0 / 2.0;
            let normal = Normal::new(0.0, sigma).expect("valid normal");
            return Ok(TransversePoint::new(normal.sample(rng), normal.sample(rng)));
        }
        let max_attempts = 200_000u32;
        for attempt in 1..=max_attempts {
            let x = rng.gen_range(-self.half_x..self.half_x);
            let y = rng.gen_range(-self.half_y..self.half_y);
            let p = TransversePoint::new(x, y);
            if rng.gen_range(0.0..self.bound) < mode_intensity(self.mode, &self.beam, p) {
                return Ok(p);
            }
            let _ = attempt;
        }
        Err(Error::RejectionStall {
            rate: 1.0 / max_attempts as f64,
        })
    }
}

/// Across-trial statistics of the normalized split-detector difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    /// mean of D/N over trials (deflection estimate).
    pub mean: f64,
    /// var(D)/N over trials; 1.0 at the quantum noise limit.
    pub normalized_variance: f64,
    pub trials: usize,
}

/// Simulate `trials` split-detector measurements of a beam in `mode`
/// displaced by `displacement` along `axis`, each with Poisson(n_photons)
/// arrivals, and return the difference-signal statistics.
pub fn mc_split_detection(
    mode: ModeSpec,
    beam: BeamParams,
    n_photons: f64,
    axis: Axis,
    displacement: f64,
    trials: usize,
    base_seed: u64,
) -> Result<McEstimate> {
    assert!(n_photons > 0.0 && trials >= 2);
    let sampler = PhotonSampler::new(mode, beam);
    let poisson = Poisson::new(n_photons).expect("valid poisson");
    let diffs: Result<Vec<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            // per-trial stream: deterministic regardless of scheduling
            let mut rng = ChaCha12Rng::seed_from_u64(base_seed ^ trial.wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let k = poisson.sample(&mut rng) as u64;
            let mut diff = 0.0_f64;
            for _ in 0..k {
                let p = sampler.sample(&mut rng)?;
                let coord = match axis {
                    Axis::X => p.x + displacement,
                    Axis::Y => p.y + displacement,
                };
                diff += if coord >= 0.0 { 1.0 } else { -1.0 };
            }
            Ok(diff)
        })
        .collect();
    let diffs = diffs?;
    let mean_d = diffs.iter().sum::<f64>() / trials as f64;
    let var_d =
        diffs.iter().map(|d| (d - mean_d).powi(2)).sum::<f64>() / (trials as f64 - 1.0);
    Ok(McEstimate {
        mean: mean_d / n_photons,
        normalized_variance: var_d / n_photons,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use statrs::function::erf::erf;

    fn beam() -> BeamParams {
        BeamParams::new(1064e-9, 150e-6)
    }

    #[test]
    fn fundamental_positions_have_gaussian_moments() {
        let b = beam();
        let sampler = PhotonSampler::new(ModeSpec::hg(0, 0), b);
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let n = 200_000;
        let (mut sx, mut sxx) = (0.0, 0.0);
        for _ in 0..n {
            let p = sampler.sample(&mut rng).unwrap();
            sx += p.x;
            sxx += p.x * p.x;
        }
        let mean = sx / n as f64;
        let var = sxx / n as f64 - mean * mean;
        // <x^2> = w0^2/4 for |u00|^2
        assert!(mean.abs() < 3.0 * (b.waist_w0 / 2.0) / (n as f64).sqrt());
        assert_relative_eq!(var, b.waist_w0 * b.waist_w0 / 4.0, max_relative = 0.02);
    }

    #[test]
    fn rejection_sampler_matches_hg10_moments() {
        // <x^2> for phi_m is (2m+1) w0^2 / 4
        let b = beam();
        let sampler = PhotonSampler::new(ModeSpec::hg(1, 0), b);
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let n = 60_000;
        let (mut sxx, mut syy) = (0.0, 0.0);
        for _ in 0..n {
            let p = sampler.sample(&mut rng).unwrap();
            sxx += p.x * p.x;
            syy += p.y * p.y;
        }
        let w2 = b.waist_w0 * b.waist_w0;
        assert_relative_eq!(sxx / n as f64, 3.0 * w2 / 4.0, max_relative = 0.03);
        assert_relative_eq!(syy / n as f64, w2 / 4.0, max_relative = 0.03);
    }

    #[test]
    fn centered_beam_sits_at_shot_noise() {
        let est = mc_split_detection(
            ModeSpec::hg(0, 0),
            beam(),
            1_000.0,
            Axis::X,
            0.0,
            3_000,
            77,
        )
        .unwrap();
        // D is a sum of N fair signs with Poisson N: var(D) = N exactly
        assert!(est.mean.abs() < 3.0 / (1_000.0_f64 * 3_000.0).sqrt());
        assert_relative_eq!(est.normalized_variance, 1.0, max_relative = 0.08);
    }

    #[test]
    fn deflection_follows_erf_curve() {
        let b = beam();
        let d = 0.2 * b.waist_w0;
        let est =
            mc_split_detection(ModeSpec::hg(0, 0), b, 2_000.0, Axis::X, d, 2_000, 5).unwrap();
        let expect = erf(std::f64::consts::SQRT_2 * d / b.waist_w0);
        assert_relative_eq!(est.mean, expect, max_relative = 0.05);
    }

    #[test]
    fn vertical_axis_uses_y() {
        let b = beam();
        let d = 0.15 * b.waist_w0;
        let est =
            mc_split_detection(ModeSpec::hg(0, 0), b, 2_000.0, Axis::Y, d, 1_500, 6).unwrap();
        let expect = erf(std::f64::consts::SQRT_2 * d / b.waist_w0);
        assert_relative_eq!(est.mean, expect, max_relative = 0.08);
    }

    #[test]
    fn deterministic_across_runs() {
        let args = (ModeSpec::hg(0, 0), beam(), 500.0, Axis::X, 10e-6, 400usize, 99u64);
        let a = mc_split_detection(args.0, args.1, args.2, args.3, args.4, args.5, args.6)
            .unwrap();
        let b = mc_split_detection(args.0, args.1, args.2, args.3, args.4, args.5, args.6)
            .unwrap();
        assert_eq!(a, b);
    }
}
