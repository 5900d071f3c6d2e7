//! Scenario execution: the end-to-end pipeline from squeezed sources
//! through the efficiency chain to detector readouts and ESA traces.
//!
//! `execute` is pure (no I/O): it returns named traces plus scalar results.
//! The caller decides where CSVs and the manifest land.

use std::collections::BTreeMap;

use crate::cavity::{combination_efficiency, round_trip_gouy, scan_reflection};
use crate::detector::{detector_loss, optimize_waist};
use crate::error::{Error, Result};
use crate::esa::{
    generate_floor_trace, make_ramp_run, min_detectable_single, photons_per_measurement,
    RampProfile,
};
use crate::modes::BeamParams;
use crate::noise::{db_from_var, sql_displacement, sql_focused, var_from_db};
use crate::overlap::{expand_flipped, ExpansionCoefficients};
use crate::trace::{EsaSettings, SpectrumTrace};
use crate::SPEED_OF_LIGHT;

use super::config::{Modulation, Readout, ScenarioConfig, ScenarioKind, SqueezerPath};

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Gamma, Normal};

/// A named trace produced by a scenario.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub name: String,
    pub trace: SpectrumTrace,
}

/// Everything a scenario computes: traces plus scalar results.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub outputs: Vec<RunOutput>,
    pub results: BTreeMap<String, f64>,
}

/// Overall efficiency seen by a squeezer on its way to the detector.
pub fn squeezer_efficiency(config: &ScenarioConfig, readout: Readout) -> Result<f64> {
    let Some(s) = config.squeezer_for(readout) else {
        return Ok(1.0);
    };
    let eta_wp = config.waveplate_visibility * config.waveplate_visibility;
    let eta_cav = match s.path {
        SqueezerPath::Transmitted => config.cavity.sideband_transmission(config.esa.center_freq),
        SqueezerPath::Reflected => {
            let expansion = if s.mode.is_flipped() {
                expand_flipped(s.mode, &config.beam, config.expansion_order)?
            } else {
                ExpansionCoefficients::pure(s.mode.m, s.mode.n)
            };
            combination_efficiency(&config.cavity, &expansion, config.esa.center_freq)?.1
        }
    };
    Ok(eta_wp * eta_cav * config.beamsplitter)
}

/// Measured amplitude-quadrature variance (QNL = 1) on a readout.
pub fn measured_noise_variance(config: &ScenarioConfig, readout: Readout) -> Result<f64> {
    let Some(s) = config.squeezer_for(readout) else {
        return Ok(1.0);
    };
    let eta = squeezer_efficiency(config, readout)?;
    Ok(eta * var_from_db(s.source_db) + (1.0 - eta))
}

fn spectrum_axis(esa: &EsaSettings) -> Vec<f64> {
    if esa.span > 0.0 {
        let lo = esa.center_freq - esa.span / 2.0;
        (0..esa.samples)
            .map(|i| lo + esa.span * i as f64 / (esa.samples - 1) as f64)
            .collect()
    } else {
        let dt = 1.0 / esa.vbw;
        (0..esa.samples).map(|i| i as f64 * dt).collect()
    }
}

fn axis_unit(esa: &EsaSettings) -> &'static str {
    if esa.span > 0.0 {
        "Hz"
    } else {
        "s"
    }
}

/// Flat noise trace at a given mean level (QNL-relative).
fn floor_trace(level: f64, esa: &EsaSettings, seed: u64) -> Result<SpectrumTrace> {
    if esa.span > 0.0 {
        esa.validate()?;
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let gamma = Gamma::new(esa.averages as f64, level / esa.averages as f64)
            .expect("valid gamma parameters");
        let axis = spectrum_axis(esa);
        let values = (0..esa.samples).map(|_| gamma.sample(&mut rng)).collect();
        Ok(SpectrumTrace::new(axis, values, "Hz", "qnl", esa, seed))
    } else {
        generate_floor_trace(level, esa, seed)
    }
}

/// Spectrum with a tone at the center frequency: floor level plus a peak of
/// the ESA's resolution-bandwidth shape whose height is `snr` floors.
fn tone_trace(floor: f64, snr: f64, esa: &EsaSettings, seed: u64) -> Result<SpectrumTrace> {
    esa.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let gamma = Gamma::new(esa.averages as f64, 1.0 / esa.averages as f64)
        .expect("valid gamma parameters");
    let axis = spectrum_axis(esa);
    let sigma = esa.rbw / (8.0 * 2f64.ln()).sqrt();
    let values = axis
        .iter()
        .map(|&f| {
            let d = f - esa.center_freq;
            let peak = snr * (-0.5 * d * d / (sigma * sigma)).exp();
            floor * gamma.sample(&mut rng) + floor * peak
        })
        .collect();
    Ok(SpectrumTrace::new(axis, values, axis_unit(esa), "qnl", esa, seed))
}

fn optical_frequency(beam: &BeamParams) -> f64 {
    SPEED_OF_LIGHT / beam.wavelength
}

/// Run a scenario and return its traces and scalar results.
pub fn execute(config: &ScenarioConfig) -> Result<RunResult> {
    config.validate()?;
    let mut outputs = Vec::new();
    let mut results = BTreeMap::new();
    let seed = config.seed;

    match config.kind {
        ScenarioKind::NoiseFloors => {
            outputs.push(RunOutput {
                name: "qnl".into(),
                trace: floor_trace(1.0, &config.esa, seed)?,
            });
            for (k, &r) in config.readouts.iter().enumerate() {
                let var = measured_noise_variance(config, r)?;
                results.insert(format!("variance_{}", r.name()), var);
                results.insert(format!("floor_db_{}", r.name()), db_from_var(var));
                results.insert(
                    format!("efficiency_{}", r.name()),
                    squeezer_efficiency(config, r)?,
                );
                outputs.push(RunOutput {
                    name: format!("floor_{}", r.name()),
                    trace: floor_trace(var, &config.esa, seed + 1 + k as u64)?,
                });
            }
        }

        ScenarioKind::CavityScan => {
            let s = config
                .squeezers
                .iter()
                .find(|s| s.path == SqueezerPath::Reflected)
                .ok_or_else(|| Error::config("squeezers", "cavity scan needs a reflected squeezer"))?;
            let expansion = expand_flipped(s.mode, &config.beam, config.expansion_order)?;
            let scan = scan_reflection(
                &config.cavity,
                &expansion,
                (0.0, 2.0 * std::f64::consts::PI),
                config.esa.samples,
            )?;
            results.insert("round_trip_gouy".into(), round_trip_gouy(&config.cavity)?);
            results.insert("finesse".into(), config.cavity.finesse());
            results.insert("expansion_sum_sq".into(), expansion.sum_sq());
            outputs.push(RunOutput {
                name: "reflection_scan".into(),
                trace: SpectrumTrace::new(
                    scan.phase,
                    scan.reflected,
                    "rad",
                    "fraction",
                    &config.esa,
                    seed,
                ),
            });
        }

        ScenarioKind::Modulation => {
            let Modulation::Tone { ref coherent_snr } = config.modulation else {
                return Err(Error::config("modulation", "modulation kind must be tone"));
            };
            for (k, &r) in config.readouts.iter().enumerate() {
                let var = measured_noise_variance(config, r)?;
                let snr_coh = coherent_snr
                    .iter()
                    .find(|(rr, _)| *rr == r)
                    .map(|(_, v)| *v)
                    .ok_or_else(|| {
                        Error::config(
                            "modulation.coherent_snr",
                            format!("missing entry for {}", r.name()),
                        )
                    })?;
                let improvement = 1.0 / var;
                let snr_sqz = snr_coh * improvement;
                results.insert(format!("variance_{}", r.name()), var);
                results.insert(format!("snr_coherent_{}", r.name()), snr_coh);
                results.insert(format!("snr_squeezed_{}", r.name()), snr_sqz);
                results.insert(format!("improvement_{}", r.name()), improvement);
                let base = seed + 10 * k as u64;
                outputs.push(RunOutput {
                    name: format!("coherent_{}", r.name()),
                    trace: tone_trace(1.0, snr_coh, &config.esa, base)?,
                });
                outputs.push(RunOutput {
                    name: format!("squeezed_{}", r.name()),
                    trace: tone_trace(var, snr_sqz, &config.esa, base + 1)?,
                });
            }
        }

        ScenarioKind::Ramp => {
            let Modulation::Ramp {
                anchor,
                confidence,
                window,
            } = config.modulation
            else {
                return Err(Error::config("modulation", "modulation kind must be ramp"));
            };
            let r = config.readouts[0];
            let var = measured_noise_variance(config, r)?;
            // run in normalized units (noise displacement = 1), then anchor
            // the length scale to the coherent detection point
            let total_time = config.esa.samples as f64 / config.esa.vbw;
            let ramp = RampProfile {
                rate: 3.0 / total_time,
            };
            let sqz = make_ramp_run(var, 1.0, ramp, &config.esa, seed, window)?;
            let coh = make_ramp_run(1.0, 1.0, ramp, &config.esa, seed + 1000, window)?;
            let d_coh = min_detectable_single(&coh, confidence)?;
            let d_sqz = min_detectable_single(&sqz, confidence)?;
            let scale = anchor / d_coh;
            results.insert("confidence".into(), confidence);
            results.insert("variance_squeezed".into(), var);
            results.insert("d_min_coherent".into(), anchor);
            results.insert("d_min_squeezed".into(), d_sqz * scale);
            results.insert("improvement".into(), d_coh / d_sqz);
            // invariance cross-check at a second confidence level
            let alt = if confidence >= 0.99 { 0.95 } else { 0.99 };
            let d_coh_alt = min_detectable_single(&coh, alt)?;
            let d_sqz_alt = min_detectable_single(&sqz, alt)?;
            results.insert("confidence_alt".into(), alt);
            results.insert("improvement_alt".into(), d_coh_alt / d_sqz_alt);
            for (name, run) in [("squeezed_ramp", &sqz), ("coherent_ramp", &coh)] {
                let mut t = run.trace.clone();
                for v in &mut t.values {
                    *v *= scale * scale;
                }
                t.value_unit = "m^2".into();
                outputs.push(RunOutput {
                    name: name.into(),
                    trace: t,
                });
            }
        }

        ScenarioKind::Correlation => {
            let Modulation::Scatter { ref factors } = config.modulation else {
                return Err(Error::config("modulation", "modulation kind must be scatter"));
            };
            let n = config.esa.samples;
            let axis: Vec<f64> = (0..n).map(|i| i as f64 / config.esa.vbw).collect();
            let mut emit = |label: &str, sd: f64, s: u64| -> Result<Vec<f64>> {
                let mut rng = ChaCha12Rng::seed_from_u64(s);
                let normal = Normal::new(0.0, sd).expect("valid normal");
                let values: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
                outputs.push(RunOutput {
                    name: label.into(),
                    trace: SpectrumTrace::new(
                        axis.clone(),
                        values.clone(),
                        "s",
                        "qnl_sd",
                        &config.esa,
                        s,
                    ),
                });
                Ok(values)
            };
            let mut sqz = Vec::new();
            for (k, &r) in config.readouts.iter().enumerate() {
                let f = factors
                    .iter()
                    .find(|(rr, _)| *rr == r)
                    .map(|(_, v)| *v)
                    .ok_or_else(|| {
                        Error::config(
                            "modulation.factors",
                            format!("missing entry for {}", r.name()),
                        )
                    })?;
                let base = seed + 10 * k as u64;
                let coh = emit(&format!("coherent_{}", r.name()), 1.0, base)?;
                let s = emit(&format!("squeezed_{}", r.name()), f, base + 1)?;
                let sd = |v: &[f64]| {
                    let m = v.iter().sum::<f64>() / v.len() as f64;
                    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() as f64 - 1.0))
                        .sqrt()
                };
                let ratio = sd(&s) / sd(&coh);
                results.insert(format!("factor_{}", r.name()), f);
                results.insert(format!("sd_ratio_{}", r.name()), ratio);
                results.insert(
                    format!("variance_db_{}", r.name()),
                    db_from_var(ratio * ratio),
                );
                sqz.push(s);
            }
            if sqz.len() == 2 {
                let (a, b) = (&sqz[0], &sqz[1]);
                let ma = a.iter().sum::<f64>() / n as f64;
                let mb = b.iter().sum::<f64>() / n as f64;
                let cov = a
                    .iter()
                    .zip(b)
                    .map(|(x, y)| (x - ma) * (y - mb))
                    .sum::<f64>();
                let va = a.iter().map(|x| (x - ma).powi(2)).sum::<f64>();
                let vb = b.iter().map(|y| (y - mb).powi(2)).sum::<f64>();
                results.insert("cross_correlation".into(), cov / (va * vb).sqrt());
            }
        }

        ScenarioKind::SqlTable => {
            let w0 = config.beam.waist_w0;
            let nu = optical_frequency(&config.beam);
            let axis: Vec<f64> = (0..config.esa.samples)
                .map(|i| 10f64.powf(6.0 + 8.0 * i as f64 / (config.esa.samples - 1) as f64))
                .collect();
            let values: Vec<f64> = axis.iter().map(|&n| sql_displacement(n, w0)).collect();
            let n_meas = photons_per_measurement(config.mean_power, nu, config.esa.rbw);
            results.insert("photons_per_measurement".into(), n_meas);
            results.insert("sql_at_config".into(), sql_displacement(n_meas, w0));
            results.insert(
                "sql_focused_na05_n1e12".into(),
                sql_focused(1e12, config.beam.wavelength, 0.5),
            );
            outputs.push(RunOutput {
                name: "sql_vs_photons".into(),
                trace: SpectrumTrace::new(axis, values, "photons", "m", &config.esa, seed),
            });
        }

        ScenarioKind::WaistScan => {
            let lo = (config.detector.gap / 2.0).max(config.detector.element_size * 1e-3);
            let hi = 5.0 * config.detector.element_size;
            let n = config.esa.samples;
            let axis: Vec<f64> = (0..n)
                .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
                .collect();
            let values = axis
                .iter()
                .map(|&w| {
                    detector_loss(
                        &BeamParams::new(config.beam.wavelength, w),
                        &config.detector,
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            let opt = optimize_waist(config.beam.wavelength, &config.detector)?;
            results.insert("optimal_waist".into(), opt.waist_w0);
            results.insert("min_loss".into(), opt.min_loss);
            results.insert(
                "loss_at_config_waist".into(),
                detector_loss(&config.beam, &config.detector)?,
            );
            outputs.push(RunOutput {
                name: "loss_vs_waist".into(),
                trace: SpectrumTrace::new(axis, values, "m", "fraction", &config.esa, seed),
            });
        }
    }

    Ok(RunResult { outputs, results })
}
