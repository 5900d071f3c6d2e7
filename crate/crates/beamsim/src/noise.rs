//! Linearized quadrature statistics of a multimode field: loss propagation,
//! differential-measurement noise, SQL displacements and SNR.
//!
//! Variances are normalized to the quantum noise limit (vacuum/coherent
//! variance = 1). dB convention: dB = 10 log10(variance), so "3 dB of
//! squeezing" is a variance of 10^-0.3.

use crate::error::{Error, Result};
use crate::modes::{BeamParams, ModeSpec};
use crate::overlap::full_plane_overlap;

/// Variance (QNL-relative) from a signed dB value. Squeezing is negative dB.
pub fn var_from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Signed dB from a QNL-relative variance.
pub fn db_from_var(var: f64) -> f64 {
    10.0 * var.log10()
}

/// Per-mode linearized quantum state: coherent amplitude plus the two
/// quadrature variances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeState {
    pub mode: ModeSpec,
    /// sqrt(photons) per measurement interval (real convention).
    pub mean_amplitude: f64,
    /// Amplitude-quadrature (X+) variance.
    pub var_amp: f64,
    /// Phase-quadrature (X-) variance.
    pub var_phase: f64,
}

impl ModeState {
    pub fn vacuum(mode: ModeSpec) -> Self {
        ModeState {
            mode,
            mean_amplitude: 0.0,
            var_amp: 1.0,
            var_phase: 1.0,
        }
    }

    pub fn coherent(mode: ModeSpec, mean_amplitude: f64) -> Self {
        ModeState {
            mean_amplitude,
            ..ModeState::vacuum(mode)
        }
    }

    /// Squeezed vacuum with the amplitude quadrature at `db` (negative for
    /// squeezing); the phase quadrature takes the reciprocal variance
    /// (minimum-uncertainty state).
    pub fn squeezed_vacuum(mode: ModeSpec, db: f64) -> Self {
        let v = var_from_db(db);
        ModeState {
            mode,
            mean_amplitude: 0.0,
            var_amp: v,
            var_phase: 1.0 / v,
        }
    }

    pub fn uncertainty_product(&self) -> f64 {
        self.var_amp * self.var_phase
    }
}

/// Beamsplitter-model loss: var' = eta var + (1 - eta), mean' = sqrt(eta) mean.
pub fn apply_loss(state: ModeState, efficiency: f64) -> ModeState {
    assert!((0.0..=1.0).contains(&efficiency), "efficiency in [0, 1]");
    ModeState {
        mode: state.mode,
        mean_amplitude: efficiency.sqrt() * state.mean_amplitude,
        var_amp: efficiency * state.var_amp + (1.0 - efficiency),
        var_phase: efficiency * state.var_phase + (1.0 - efficiency),
    }
}

/// Fold a chain of efficiencies over a state. Order-independent.
pub fn apply_loss_chain(state: ModeState, efficiencies: &[f64]) -> ModeState {
    efficiencies.iter().fold(state, |s, &eta| apply_loss(s, eta))
}

/// Mode-matching power efficiency from interference fringe visibility: V^2.
pub fn visibility_to_efficiency(v: f64) -> f64 {
    assert!((0.0..=1.0).contains(&v), "visibility in [0, 1]");
    v * v
}

/// A multimode field: one bright mode plus squeezed/vacuum side modes with
/// mutually orthogonal mode shapes.
#[derive(Debug, Clone)]
pub struct MultimodeField {
    pub beam: BeamParams,
    pub states: Vec<ModeState>,
}

impl MultimodeField {
    /// Build and validate: exactly one state carries the coherent amplitude,
    /// and all mode shapes are orthogonal within 1e-6.
    pub fn new(beam: BeamParams, states: Vec<ModeState>) -> Result<Self> {
        let bright = states.iter().filter(|s| s.mean_amplitude != 0.0).count();
        assert!(
            bright <= 1,
            "at most one mode may carry a coherent amplitude, got {bright}"
        );
        for (i, a) in states.iter().enumerate() {
            for b in states.iter().skip(i + 1) {
                let ov = full_plane_overlap(a.mode, b.mode, &beam)?;
                if ov.abs() > 1e-6 {
                    return Err(Error::NonOrthogonalBasis {
                        a: a.mode.to_string(),
                        b: b.mode.to_string(),
                        overlap: ov.abs(),
                    });
                }
            }
        }
        Ok(MultimodeField { beam, states })
    }

    /// Total photon number of the bright mode.
    pub fn n_tot(&self) -> f64 {
        self.states
            .iter()
            .find(|s| s.mean_amplitude != 0.0)
            .map(|s| s.mean_amplitude * s.mean_amplitude)
            .unwrap_or(0.0)
    }

    pub fn mean_mode(&self) -> Option<ModeSpec> {
        self.states
            .iter()
            .find(|s| s.mean_amplitude != 0.0)
            .map(|s| s.mode)
    }
}

/// Noise variance (QNL = 1) of a differential measurement whose associated
/// flipped mode is `measurement_flip`: the X+ variance of the field's
/// component in that mode. Orthogonal modes contribute nothing; an absent
/// mode is vacuum.
pub fn differential_noise_variance(field: &MultimodeField, measurement_flip: ModeSpec) -> f64 {
    field
        .states
        .iter()
        .find(|s| s.mode == measurement_flip)
        .map(|s| s.var_amp)
        .unwrap_or(1.0)
}

/// SQL displacement for an infinitely wide split detector (Eq.-10 form):
/// sqrt(pi/8) w0 / sqrt(N).
pub fn sql_displacement(n_photons: f64, waist_w0: f64) -> f64 {
    assert!(n_photons >= 1.0);
    (std::f64::consts::PI / 8.0).sqrt() * waist_w0 / n_photons.sqrt()
}

/// SQL displacement at maximum focusing: sqrt(pi/8) lambda / (2 NA sqrt(N)).
pub fn sql_focused(n_photons: f64, wavelength: f64, numerical_aperture: f64) -> f64 {
    assert!(n_photons >= 1.0);
    assert!(numerical_aperture > 0.0 && numerical_aperture <= 1.0);
    (std::f64::consts::PI / 8.0).sqrt() * wavelength
        / (2.0 * numerical_aperture * n_photons.sqrt())
}

/// Power signal-to-noise ratio of a displacement modulation d_mod measured
/// against noise variance `noise_var` (QNL-relative).
pub fn snr(d_mod: f64, noise_var: f64, n_photons: f64, waist_w0: f64) -> f64 {
    assert!(noise_var > 0.0);
    let d_sql = sql_displacement(n_photons, waist_w0);
    (d_mod / d_sql).powi(2) / noise_var
}

/// SNR improvement of a squeezed measurement over a coherent one.
pub fn snr_improvement(noise_var_sqz: f64, noise_var_coh: f64) -> f64 {
    assert!(noise_var_sqz > 0.0);
    noise_var_coh / noise_var_sqz
}
