//! Electronic spectrum analyser emulation: photon-number calibration,
//! signal-plus-noise response, seeded trace generation with RBW/VBW
//! averaging, and confidence-threshold minimum detectable displacement.
//!
//! Noise-floor samples follow the envelope-detector model: exponential
//! power before averaging, Gamma(averages) after k-fold trace averaging.

use crate::error::{Error, Result};
use crate::trace::{EsaSettings, SpectrumTrace};
use crate::PLANCK_H;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Gamma};

/// Photons collected per measurement interval: N = P / (h nu RBW).
pub fn photons_per_measurement(power_w: f64, freq_hz: f64, rbw_hz: f64) -> f64 {
    assert!(power_w > 0.0 && freq_hz > 0.0 && rbw_hz > 0.0);
    power_w / (PLANCK_H * freq_hz * rbw_hz)
}

/// ESA response in displacement-squared units for a modulation of amplitude
/// d_mod riding on noise d_noise: d_mod^2 + d_noise^2.
pub fn esa_response(d_mod: f64, d_noise: f64) -> f64 {
    assert!(d_mod >= 0.0 && d_noise >= 0.0);
    d_mod * d_mod + d_noise * d_noise
}

/// QNL-relative noise power to displacement-squared, against the SQL
/// displacement of the calibration beam.
pub fn power_to_displacement_sq(p_qnl_relative: f64, d_sql: f64) -> f64 {
    p_qnl_relative * d_sql * d_sql
}

/// Inverse of [`power_to_displacement_sq`].
pub fn displacement_sq_to_power(d_sq: f64, d_sql: f64) -> f64 {
    d_sq / (d_sql * d_sql)
}

/// Linearly ramped displacement modulation amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RampProfile {
    /// d_mod(t) = rate * t, meters per second. Zero for a flat floor.
    pub rate: f64,
}

impl RampProfile {
    pub fn displacement(&self, t: f64) -> f64 {
        self.rate * t
    }
}

fn floor_sampler(mean: f64, averages: u32) -> Gamma<f64> {
    // k-fold averaged exponential power: Gamma(k, mean/k)
    Gamma::new(averages as f64, mean / averages as f64).expect("valid gamma parameters")
}

/// Zero-span noise-floor trace in QNL-relative units: time axis with sample
/// spacing 1/VBW, mean level `noise_var`. Deterministic per seed.
pub fn generate_floor_trace(
    noise_var: f64,
    settings: &EsaSettings,
    seed: u64,
) -> Result<SpectrumTrace> {
    settings.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let gamma = floor_sampler(noise_var, settings.averages);
    let dt = 1.0 / settings.vbw;
    let axis: Vec<f64> = (0..settings.samples).map(|i| i as f64 * dt).collect();
    let values: Vec<f64> = (0..settings.samples).map(|_| gamma.sample(&mut rng)).collect();
    Ok(SpectrumTrace::new(axis, values, "s", "qnl", settings, seed))
}

/// Zero-span ramp trace in displacement-squared units: each sample is
/// d_mod(t)^2 plus an averaged noise-floor draw of mean
/// (d_noise sqrt(noise_var))^2. Deterministic per seed.
pub fn generate_ramp_trace(
    noise_var: f64,
    d_noise: f64,
    ramp: RampProfile,
    settings: &EsaSettings,
    seed: u64,
) -> Result<SpectrumTrace> {
    settings.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let floor_mean = d_noise * d_noise * noise_var;
    let gamma = floor_sampler(floor_mean, settings.averages);
    let dt = 1.0 / settings.vbw;
    let mut axis = Vec::with_capacity(settings.samples);
    let mut values = Vec::with_capacity(settings.samples);
    for i in 0..settings.samples {
        let t = i as f64 * dt;
        let d_mod = ramp.displacement(t);
        axis.push(t);
        values.push(d_mod * d_mod + gamma.sample(&mut rng));
    }
    Ok(SpectrumTrace::new(axis, values, "s", "m^2", settings, seed))
}

/// A ramp measurement bundled with everything detection needs: the trace,
/// its ramp calibration, and a noise-only reference run.
#[derive(Debug, Clone)]
pub struct RampRun {
    pub trace: SpectrumTrace,
    pub ramp: RampProfile,
    pub noise_only: Vec<f64>,
    /// Moving-average window length for the detection statistic.
    pub window: usize,
}

/// Generate a ramp run plus a same-length noise-only reference (seed + 1).
pub fn make_ramp_run(
    noise_var: f64,
    d_noise: f64,
    ramp: RampProfile,
    settings: &EsaSettings,
    seed: u64,
    window: usize,
) -> Result<RampRun> {
    let trace = generate_ramp_trace(noise_var, d_noise, ramp, settings, seed)?;
    let flat = RampProfile { rate: 0.0 };
    let noise = generate_ramp_trace(noise_var, d_noise, flat, settings, seed.wrapping_add(1))?;
    Ok(RampRun {
        trace,
        ramp,
        noise_only: noise.values,
        window,
    })
}

fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    assert!(window >= 1 && window <= values.len());
    let mut out = Vec::with_capacity(values.len() - window + 1);
    let mut acc: f64 = values[..window].iter().sum();
    out.push(acc / window as f64);
    for i in window..values.len() {
        acc += values[i] - values[i - window];
        out.push(acc / window as f64);
    }
    out
}

/// Empirical one-sided quantile (nearest-rank).
fn quantile(samples: &[f64], q: f64) -> f64 {
    assert!((0.0..1.0).contains(&q) || q == 1.0);
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

/// Outcome of a paired minimum-detectable-displacement analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinDetectable {
    pub d_min_sqz: f64,
    pub d_min_coh: f64,
    pub improvement: f64,
}

/// Smallest ramp displacement whose windowed signal persistently exceeds
/// the noise-only distribution's one-sided confidence quantile.
pub fn min_detectable_single(run: &RampRun, confidence: f64) -> Result<f64> {
    assert!((0.5..1.0).contains(&confidence));
    let noise_avg = moving_average(&run.noise_only, run.window);
    let threshold = quantile(&noise_avg, confidence);
    let signal_avg = moving_average(&run.trace.values, run.window);
    // persistent crossing: first window after the last one at/below threshold
    let last_below = signal_avg.iter().rposition(|&v| v <= threshold);
    let idx = match last_below {
        None => 0,
        Some(i) if i + 1 >= signal_avg.len() => return Err(Error::NeverDetected),
        Some(i) => i + 1,
    };
    // center of the detection window on the time axis
    let t = run.trace.axis[idx + run.window / 2];
    Ok(run.ramp.displacement(t))
}

/// Paired analysis of a squeezed and a coherent ramp run.
pub fn min_detectable(sqz: &RampRun, coh: &RampRun, confidence: f64) -> Result<MinDetectable> {
    let d_min_sqz = min_detectable_single(sqz, confidence)?;
    let d_min_coh = min_detectable_single(coh, confidence)?;
    Ok(MinDetectable {
        d_min_sqz,
        d_min_coh,
        improvement: d_min_coh / d_min_sqz,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use crate::SPEED_OF_LIGHT;

    fn settings(samples: usize, averages: u32) -> EsaSettings {
        EsaSettings {
            center_freq: 4.976e6,
            span: 0.0,
            rbw: 1e3,
            vbw: 1e3,
            averages,
            samples,
        }
    }

    #[test]
    fn photon_calibration() {
        let nu = 1e14;
        assert_relative_eq!(
            photons_per_measurement(PLANCK_H * nu * 1e5, nu, 1e5),
            1.0,
            epsilon = 1e-12
        );
        // 1 mW at 1064 nm, RBW 100 kHz
        let nu = SPEED_OF_LIGHT / 1064e-9;
        let n = photons_per_measurement(1e-3, nu, 1e5);
        assert_relative_eq!(n, 5.356e10, max_relative = 1e-3);
        // halving RBW doubles N
        assert_relative_eq!(
            photons_per_measurement(1e-3, nu, 5e4),
            2.0 * n,
            max_relative = 1e-12
        );
    }

    #[test]
    fn response_quadrature_sum() {
        assert_eq!(esa_response(0.0, 2.0), 4.0);
        assert_eq!(esa_response(1.5, 1.5), 4.5);
        assert_eq!(esa_response(3.0, 4.0), 25.0);
    }

    #[test]
    fn calibration_round_trip() {
        let d_sql = 2.3e-10;
        let p = 0.7342;
        let back = displacement_sq_to_power(power_to_displacement_sq(p, d_sql), d_sql);
        assert_relative_eq!(back, p, epsilon = 1e-12);
    }

    #[test]
    fn traces_deterministic_per_seed() {
        let s = settings(256, 10);
        let a = generate_floor_trace(0.5, &s, 7).unwrap();
        let b = generate_floor_trace(0.5, &s, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_csv(), b.to_csv());
        let c = generate_floor_trace(0.5, &s, 8).unwrap();
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn floor_mean_tracks_noise_variance() {
        let s = settings(20_000, 10);
        let sqz = generate_floor_trace(0.5, &s, 11).unwrap();
        let coh = generate_floor_trace(1.0, &s, 12).unwrap();
        let ratio = sqz.mean_value() / coh.mean_value();
        // sample-mean oracle: rel sd of each mean is 1/sqrt(k n) ~ 0.22%
        assert_relative_eq!(ratio, 0.5, max_relative = 0.02);
    }

    #[test]
    fn floor_variance_matches_averaging_model() {
        // Gamma(k, mu/k): variance mu^2/k; 3-sigma band over 1e4 samples
        let k = 10u32;
        let n = 10_000;
        let s = settings(n, k);
        let t = generate_floor_trace(1.0, &s, 5).unwrap();
        let mean = t.mean_value();
        let var: f64 =
            t.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        let expect = 1.0 / k as f64;
        // sd of the sample variance of a Gamma(k) is sqrt((2/k^2 + 6/k^3)/n) approx
        let tol = 3.0 * (2.0 / (k as f64).powi(2) / n as f64).sqrt() * 3.0;
        assert!(
            (var - expect).abs() < tol,
            "sample var {var} vs model {expect} (tol {tol})"
        );
    }

    #[test]
    fn flat_ramp_gives_flat_floor() {
        let s = settings(5_000, 10);
        let d_noise = 2.3e-10;
        let t = generate_ramp_trace(1.0, d_noise, RampProfile { rate: 0.0 }, &s, 3).unwrap();
        assert_relative_eq!(t.mean_value(), d_noise * d_noise, max_relative = 0.02);
    }

    fn paired_runs(seed: u64, samples: usize) -> (RampRun, RampRun) {
        let s = settings(samples, 20);
        let d_noise = 2.3e-10;
        let ramp = RampProfile {
            rate: 3.0 * d_noise / (samples as f64 / s.vbw),
        };
        let sqz = make_ramp_run(crate::noise::var_from_db(-2.84), d_noise, ramp, &s, seed, 64)
            .unwrap();
        let coh = make_ramp_run(1.0, d_noise, ramp, &s, seed.wrapping_add(1000), 64).unwrap();
        (sqz, coh)
    }

    #[test]
    fn equal_noise_gives_unit_improvement() {
        let s = settings(4_000, 20);
        let d_noise = 2.3e-10;
        let ramp = RampProfile {
            rate: 3.0 * d_noise / (4_000.0 / s.vbw),
        };
        let a = make_ramp_run(1.0, d_noise, ramp, &s, 21, 64).unwrap();
        let b = make_ramp_run(1.0, d_noise, ramp, &s, 22, 64).unwrap();
        let out = min_detectable(&a, &b, 0.99).unwrap();
        assert!(
            (out.improvement - 1.0).abs() < 0.25,
            "improvement {}",
            out.improvement
        );
    }

    #[test]
    fn squeezed_run_detects_smaller_displacement() {
        let (sqz, coh) = paired_runs(42, 4_000);
        let out = min_detectable(&sqz, &coh, 0.99).unwrap();
        assert!(out.improvement > 1.0, "improvement {}", out.improvement);
        assert!(out.d_min_sqz < out.d_min_coh);
    }

    #[test]
    fn never_detected_without_ramp() {
        let s = settings(2_000, 20);
        let run = make_ramp_run(1.0, 2.3e-10, RampProfile { rate: 0.0 }, &s, 9, 64).unwrap();
        assert!(matches!(
            min_detectable_single(&run, 0.99),
            Err(Error::NeverDetected)
        ));
    }

    #[test]
    fn dmin_monotone_in_noise_variance() {
        let s = settings(4_000, 20);
        let d_noise = 2.3e-10;
        let ramp = RampProfile {
            rate: 3.0 * d_noise / (4_000.0 / s.vbw),
        };
        let quiet = make_ramp_run(0.3, d_noise, ramp, &s, 31, 64).unwrap();
        let loud = make_ramp_run(1.0, d_noise, ramp, &s, 31, 64).unwrap();
        let dq = min_detectable_single(&quiet, 0.99).unwrap();
        let dl = min_detectable_single(&loud, 0.99).unwrap();
        assert!(dq < dl, "quiet {dq} vs loud {dl}");
    }
}
