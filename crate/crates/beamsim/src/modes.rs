//! Hermite-Gaussian transverse modes and their phase-flipped variants.
//!
//! All modes are evaluated at the waist plane with a real-valued convention;
//! propagation enters downstream only through the accumulated Gouy phase.
//! Amplitudes are normalized so |u|^2 integrates to 1 over the transverse
//! plane (photon-number units; field prefactors are absorbed).

use serde::{Deserialize, Serialize};

/// Gaussian envelope shared by every mode of a beam.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamParams {
    /// Wavelength in meters.
    pub wavelength: f64,
    /// Waist radius w0 in meters.
    pub waist_w0: f64,
    /// Waist location along the propagation axis, meters.
    pub waist_z: f64,
}

impl BeamParams {
    pub fn new(wavelength: f64, waist_w0: f64) -> Self {
        assert!(wavelength > 0.0, "wavelength must be positive");
        assert!(waist_w0 > 0.0, "waist must be positive");
        BeamParams {
            wavelength,
            waist_w0,
            waist_z: 0.0,
        }
    }

    /// Rayleigh range z_R = pi w0^2 / lambda.
    pub fn rayleigh_range(&self) -> f64 {
        std::f64::consts::PI * self.waist_w0 * self.waist_w0 / self.wavelength
    }
}

/// A point in the transverse plane, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TransversePoint {
    pub x: f64,
    pub y: f64,
}

impl TransversePoint {
    pub fn new(x: f64, y: f64) -> Self {
        assert!(x.is_finite() && y.is_finite(), "coordinates must be finite");
        TransversePoint { x, y }
    }
}

/// Set of transverse axes across which a mode's phase is flipped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct FlipAxes {
    pub horizontal: bool,
    pub vertical: bool,
}

impl FlipAxes {
    pub const NONE: FlipAxes = FlipAxes {
        horizontal: false,
        vertical: false,
    };
    pub const H: FlipAxes = FlipAxes {
        horizontal: true,
        vertical: false,
    };
    pub const V: FlipAxes = FlipAxes {
        horizontal: false,
        vertical: true,
    };
    pub const BOTH: FlipAxes = FlipAxes {
        horizontal: true,
        vertical: true,
    };

    pub fn is_empty(&self) -> bool {
        !self.horizontal && !self.vertical
    }

    /// Symmetric difference: flipping the same axis twice is the identity.
    pub fn symmetric_difference(self, other: FlipAxes) -> FlipAxes {
        FlipAxes {
            horizontal: self.horizontal != other.horizontal,
            vertical: self.vertical != other.vertical,
        }
    }
}

/// A transverse mode identity: an HG index pair, optionally phase-flipped
/// across the horizontal and/or vertical axis through the beam center.
///
/// The representation is canonical: nested flips collapse to the symmetric
/// difference of their axis sets, and an empty flip set is a plain HG mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ModeSpec {
    pub m: u32,
    pub n: u32,
    pub flips: FlipAxes,
}

impl ModeSpec {
    /// Plain HG(m, n).
    pub fn hg(m: u32, n: u32) -> Self {
        ModeSpec {
            m,
            n,
            flips: FlipAxes::NONE,
        }
    }

    /// TEM_f00: fundamental flipped across the horizontal split (x < 0 negated).
    pub fn f00() -> Self {
        ModeSpec::hg(0, 0).flipped(FlipAxes::H)
    }

    /// TEM_0f0: fundamental flipped across the vertical split (y < 0 negated).
    pub fn v0f0() -> Self {
        ModeSpec::hg(0, 0).flipped(FlipAxes::V)
    }

    /// TEM_f0f0: fundamental flipped across both axes.
    pub fn f0f0() -> Self {
        ModeSpec::hg(0, 0).flipped(FlipAxes::BOTH)
    }

    /// Apply a phase flip across the given axes. Double flips cancel.
    pub fn flipped(self, axes: FlipAxes) -> Self {
        ModeSpec {
            m: self.m,
            n: self.n,
            flips: self.flips.symmetric_difference(axes),
        }
    }

    pub fn is_flipped(&self) -> bool {
        !self.flips.is_empty()
    }

    /// Underlying HG mode with flips stripped.
    pub fn base(&self) -> ModeSpec {
        ModeSpec::hg(self.m, self.n)
    }

    /// Sign factor of the flip mask at a transverse point (Eq.-style rule:
    /// the negative half of each flipped axis gets the minus sign).
    pub fn flip_sign(&self, p: TransversePoint) -> f64 {
        let mut s = 1.0;
        if self.flips.horizontal && p.x < 0.0 {
            s = -s;
        }
        if self.flips.vertical && p.y < 0.0 {
            s = -s;
        }
        s
    }
}

impl std::fmt::Display for ModeSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match (self.flips.horizontal, self.flips.vertical) {
            (false, false) => write!(f, "HG({},{})", self.m, self.n),
            (true, false) => write!(f, "HG(f{},{})", self.m, self.n),
            (false, true) => write!(f, "HG({},f{})", self.m, self.n),
            (true, true) => write!(f, "HG(f{},f{})", self.m, self.n),
        }
    }
}

/// Normalized 1D Hermite-Gauss function psi_m(t) = H_m(t) e^{-t^2/2} /
/// sqrt(2^m m! sqrt(pi)), evaluated by the stable normalized upward
/// recurrence. Good through m ~ 60 without overflow.
pub fn hermite_gauss_1d(m: u32, t: f64) -> f64 {
    let gauss = (-0.5 * t * t).exp();
    let mut prev = 0.0_f64;
    let mut cur = std::f64::consts::PI.powf(-0.25) * gauss;
    for k in 0..m {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * t * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// 1D transverse HG amplitude phi_m(x) for waist w0, normalized so
/// integral phi_m^2 dx = 1. Units 1/sqrt(m).
pub fn hg_amplitude_1d(m: u32, w0: f64, x: f64) -> f64 {
    let t = std::f64::consts::SQRT_2 * x / w0;
    (std::f64::consts::SQRT_2 / w0).sqrt() * hermite_gauss_1d(m, t)
}

/// Transverse amplitude u_mode(p) at the waist plane, units 1/m so that
/// |u|^2 integrates to 1. For flipped modes the base amplitude is negated
/// on the negative side of each flipped axis.
pub fn mode_amplitude(mode: ModeSpec, beam: &BeamParams, p: TransversePoint) -> f64 {
    let w0 = beam.waist_w0;
    mode.flip_sign(p) * hg_amplitude_1d(mode.m, w0, p.x) * hg_amplitude_1d(mode.n, w0, p.y)
}

/// Intensity density |u_mode(p)|^2, units 1/m^2. Flips never change it.
pub fn mode_intensity(mode: ModeSpec, beam: &BeamParams, p: TransversePoint) -> f64 {
    let a = mode_amplitude(mode, beam, p);
    a * a
}

/// Gouy phase accumulated by HG(m, n) over a path whose fundamental-mode
/// accumulated Gouy phase is `psi`: (m + n + 1) psi.
pub fn gouy_phase(m: u32, n: u32, psi: f64) -> f64 {
    (m + n + 1) as f64 * psi
}
