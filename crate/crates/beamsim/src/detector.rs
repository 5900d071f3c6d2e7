//! Split and quadrant detectors with finite element size and dead gap:
//! photocurrent combinations, displacement response, capture losses and
//! waist optimization.
//!
//! The gap absorbs light (pure loss); displacement is applied to the beam
//! with the detector fixed.

use crate::error::{Error, Result};
use crate::modes::{mode_intensity, BeamParams, ModeSpec, TransversePoint};
use crate::overlap::Axis;
use crate::quad::{integrate_2d, Rect};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DetectorLayout {
    /// Two elements separated along the given axis.
    Split(Axis),
    /// 2x2 array of square elements.
    Quadrant,
}

/// Geometry of a split/quadrant detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorGeometry {
    /// Side of each square element, meters. `f64::INFINITY` for an
    /// idealized unbounded detector.
    pub element_size: f64,
    /// Dead zone between adjacent elements, meters.
    pub gap: f64,
    /// Detector center in the transverse plane.
    pub center_offset: TransversePoint,
    pub layout: DetectorLayout,
}

impl DetectorGeometry {
    /// The experiment's quadrant detector: 0.5 mm elements, 25 um gap.
    pub fn paper_quadrant() -> Self {
        DetectorGeometry {
            element_size: 0.5e-3,
            gap: 25e-6,
            center_offset: TransversePoint::default(),
            layout: DetectorLayout::Quadrant,
        }
    }

    /// Idealized infinitely wide gapless split detector.
    pub fn infinite_split(axis: Axis) -> Self {
        DetectorGeometry {
            element_size: f64::INFINITY,
            gap: 0.0,
            center_offset: TransversePoint::default(),
            layout: DetectorLayout::Split(axis),
        }
    }

    pub fn infinite_quadrant() -> Self {
        DetectorGeometry {
            element_size: f64::INFINITY,
            gap: 0.0,
            center_offset: TransversePoint::default(),
            layout: DetectorLayout::Quadrant,
        }
    }
}

/// The four element photocurrents (mean photon-number rates, normalized to
/// the beam total) and their sum/difference combinations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadrantCurrents {
    /// Quadrant numbering: 1 = (+x,+y), 2 = (-x,+y), 3 = (-x,-y), 4 = (+x,-y).
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub i4: f64,
}

impl QuadrantCurrents {
    /// Total intensity.
    pub fn ia(&self) -> f64 {
        self.i1 + self.i2 + self.i3 + self.i4
    }
    /// Horizontal positioning: right minus left.
    pub fn ib(&self) -> f64 {
        (self.i1 + self.i4) - (self.i2 + self.i3)
    }
    /// Vertical positioning: top minus bottom.
    pub fn ic(&self) -> f64 {
        (self.i1 + self.i2) - (self.i3 + self.i4)
    }
    /// Diagonal difference (orientation to first order).
    pub fn id(&self) -> f64 {
        (self.i1 + self.i3) - (self.i2 + self.i4)
    }
}

/// Active area of each numbered quadrant, clipped to `extent` from the
/// detector center.
fn active_rects(geom: &DetectorGeometry, extent: f64) -> [Rect; 4] {
    let c = geom.center_offset;
    let h = geom.gap / 2.0;
    let d = geom.element_size.min(extent);
    match geom.layout {
        DetectorLayout::Quadrant => [
            Rect::new(c.x + h, c.x + h + d, c.y + h, c.y + h + d),
            Rect::new(c.x - h - d, c.x - h, c.y + h, c.y + h + d),
            Rect::new(c.x - h - d, c.x - h, c.y - h - d, c.y - h),
            Rect::new(c.x + h, c.x + h + d, c.y - h - d, c.y - h),
        ],
        DetectorLayout::Split(Axis::X) => [
            Rect::new(c.x + h, c.x + h + d, c.y, c.y + extent),
            Rect::new(c.x - h - d, c.x - h, c.y, c.y + extent),
            Rect::new(c.x - h - d, c.x - h, c.y - extent, c.y),
            Rect::new(c.x + h, c.x + h + d, c.y - extent, c.y),
        ],
        DetectorLayout::Split(Axis::Y) => [
            Rect::new(c.x, c.x + extent, c.y + h, c.y + h + d),
            Rect::new(c.x - extent, c.x, c.y + h, c.y + h + d),
            Rect::new(c.x - extent, c.x, c.y - h - d, c.y - h),
            Rect::new(c.x, c.x + extent, c.y - h - d, c.y - h),
        ],
    }
}

/// Integrate a displaced intensity density over the four active areas.
/// `intensity` is a normalized density (integral 1 over the plane), so the
/// currents are fractions of the beam total.
pub fn quadrant_currents_of(
    intensity: impl Fn(TransversePoint) -> f64,
    beam: &BeamParams,
    geom: &DetectorGeometry,
    displacement: TransversePoint,
) -> Result<QuadrantCurrents> {
    let extent = 9.0 * beam.waist_w0 + displacement.x.abs().max(displacement.y.abs());
    let rects = active_rects(geom, extent);
    let mut out = [0.0; 4];
    for (k, r) in rects.iter().enumerate() {
        if r.area() <= 0.0 {
            continue;
        }
        let (v, _) = integrate_2d(
            |x, y| intensity(TransversePoint {
                x: x - displacement.x,
                y: y - displacement.y,
            }),
            *r,
            2.5e-11,
        )?;
        out[k] = v;
    }
    Ok(QuadrantCurrents {
        i1: out[0],
        i2: out[1],
        i3: out[2],
        i4: out[3],
    })
}

/// Quadrant currents for a beam in a single transverse mode.
pub fn quadrant_currents(
    mode: ModeSpec,
    beam: &BeamParams,
    geom: &DetectorGeometry,
    displacement: TransversePoint,
) -> Result<QuadrantCurrents> {
    quadrant_currents_of(|p| mode_intensity(mode, beam, p), beam, geom, displacement)
}

/// Fraction of a centred fundamental beam lost to the gap and the detector
/// edges: 1 - captured / total.
pub fn detector_loss(beam: &BeamParams, geom: &DetectorGeometry) -> Result<f64> {
    let c = quadrant_currents(ModeSpec::hg(0, 0), beam, geom, TransversePoint::default())?;
    Ok((1.0 - c.ia()).clamp(0.0, 1.0))
}

/// Result of the waist optimization against a finite gapped detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaistOptimum {
    pub waist_w0: f64,
    pub min_loss: f64,
    /// True when the minimum sits on the search-interval edge (e.g. zero
    /// gap, where smaller is always better).
    pub at_boundary: bool,
}

/// Minimize `detector_loss` over the waist by coarse scan plus golden-section
/// refinement. The search interval is [gap/2, 5 D] (with floors for
/// degenerate geometry).
pub fn optimize_waist(wavelength: f64, geom: &DetectorGeometry) -> Result<WaistOptimum> {
    assert!(geom.element_size.is_finite(), "finite detector required");
    assert!(geom.gap < geom.element_size, "gap must be smaller than elements");
    let lo = (geom.gap / 2.0).max(geom.element_size * 1e-3);
    let hi = 5.0 * geom.element_size;
    let loss_at = |w: f64| -> Result<f64> {
        detector_loss(&BeamParams::new(wavelength, w), geom)
    };

    let n = 48;
    let mut samples = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let w = lo * (hi / lo).powf(k as f64 / n as f64);
        samples.push((w, loss_at(w)?));
    }
    // count interior local minima to detect non-unimodal geometry; dips
    // below the quadrature noise floor do not count
    let sig = 1e-8;
    let mut minima = Vec::new();
    for k in 1..n {
        if samples[k].1 + sig < samples[k - 1].1 && samples[k].1 + sig < samples[k + 1].1 {
            minima.push(k);
        }
    }
    if minima.len() > 1 {
        return Err(Error::NoBracket { lo, hi });
    }
    let best = samples
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(k, _)| k)
        .unwrap();
    // an edge sample within noise of the best is a boundary minimum
    if best == 0 || best == n || samples[0].1 <= samples[best].1 + sig {
        let k = if samples[0].1 <= samples[best].1 + sig { 0 } else { best };
        let (w, l) = samples[k];
        return Ok(WaistOptimum {
            waist_w0: w,
            min_loss: l,
            at_boundary: true,
        });
    }

    // golden-section refinement inside the bracketing neighbours
    let (mut a, mut b) = (samples[best - 1].0, samples[best + 1].0);
    let inv_phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = loss_at(x1)?;
    let mut f2 = loss_at(x2)?;
    while (b - a) > 1e-9 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = loss_at(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = loss_at(x2)?;
        }
    }
    let w = 0.5 * (a + b);
    Ok(WaistOptimum {
        waist_w0: w,
        min_loss: loss_at(w)?,
        at_boundary: false,
    })
}

/// Which photocurrent combination a displacement axis reads out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DisplacementAxis {
    Horizontal,
    Vertical,
}

/// Numerical derivative of the difference current with respect to beam
/// displacement at zero, per unit total photon number (units 1/m).
/// Central differences with one Richardson extrapolation step.
pub fn displacement_signal_slope(
    axis: DisplacementAxis,
    mode: ModeSpec,
    beam: &BeamParams,
    geom: &DetectorGeometry,
) -> Result<f64> {
    let combo = |c: &QuadrantCurrents| match axis {
        DisplacementAxis::Horizontal => c.ib(),
        DisplacementAxis::Vertical => c.ic(),
    };
    let shift = |d: f64| match axis {
        DisplacementAxis::Horizontal => TransversePoint { x: d, y: 0.0 },
        DisplacementAxis::Vertical => TransversePoint { x: 0.0, y: d },
    };
    let h = beam.waist_w0 * 1e-5;
    let diff = |h: f64| -> Result<f64> {
        let p = quadrant_currents(mode, beam, geom, shift(h))?;
        let m = quadrant_currents(mode, beam, geom, shift(-h))?;
        Ok((combo(&p) - combo(&m)) / (2.0 * h))
    };
    let d1 = diff(h)?;
    let d2 = diff(h / 2.0)?;
    Ok((4.0 * d2 - d1) / 3.0)
}

/// Slope of the diagonal combination Id, used to check it carries no
/// first-order displacement signal for a symmetric beam.
pub fn diagonal_slope(
    mode: ModeSpec,
    beam: &BeamParams,
    geom: &DetectorGeometry,
) -> Result<f64> {
    let h = beam.waist_w0 * 1e-5;
    let at = |d: f64| -> Result<f64> {
        Ok(quadrant_currents(mode, beam, geom, TransversePoint { x: d, y: 0.0 })?.id())
    };
    Ok((at(h)? - at(-h)?) / (2.0 * h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use statrs::function::erf::erf;
    use std::f64::consts::PI;

    fn beam(w0: f64) -> BeamParams {
        BeamParams::new(1064e-9, w0)
    }

    #[test]
    fn centred_beam_symmetry() {
        let b = beam(150e-6);
        let c = quadrant_currents(
            ModeSpec::hg(0, 0),
            &b,
            &DetectorGeometry::infinite_quadrant(),
            TransversePoint::default(),
        )
        .unwrap();
        assert!((c.ia() - 1.0).abs() < 1e-8);
        assert!(c.ib().abs() < 1e-9);
        assert!(c.ic().abs() < 1e-9);
        assert!(c.id().abs() < 1e-9);
    }

    #[test]
    fn small_waist_captures_nearly_everything() {
        let d = 0.5e-3;
        let geom = DetectorGeometry {
            element_size: d,
            gap: 0.0,
            center_offset: TransversePoint::default(),
            layout: DetectorLayout::Quadrant,
        };
        let b = beam(0.2 * d);
        let c = quadrant_currents(ModeSpec::hg(0, 0), &b, &geom, TransversePoint::default())
            .unwrap();
        assert!(c.ia() >= 0.999, "captured {}", c.ia());
    }

    #[test]
    fn displaced_beam_follows_erf_law() {
        // closed-form 1D Gaussian oracle: Ib/N = erf(sqrt(2) d / w0)
        let b = beam(150e-6);
        let geom = DetectorGeometry::infinite_split(Axis::X);
        for frac in [0.05, 0.2, 0.5] {
            let d = frac * b.waist_w0;
            let c = quadrant_currents(
                ModeSpec::hg(0, 0),
                &b,
                &geom,
                TransversePoint { x: d, y: 0.0 },
            )
            .unwrap();
            let expect = erf(std::f64::consts::SQRT_2 * d / b.waist_w0);
            assert_relative_eq!(c.ib(), expect, epsilon = 1e-8);
        }
    }

    #[test]
    fn antisymmetry_of_difference_current() {
        let b = beam(150e-6);
        let geom = DetectorGeometry::paper_quadrant();
        let d = 20e-6;
        let plus = quadrant_currents(ModeSpec::hg(0, 0), &b, &geom, TransversePoint { x: d, y: 0.0 })
            .unwrap();
        let minus =
            quadrant_currents(ModeSpec::hg(0, 0), &b, &geom, TransversePoint { x: -d, y: 0.0 })
                .unwrap();
        assert_relative_eq!(plus.ib(), -minus.ib(), epsilon = 1e-9);
    }

    #[test]
    fn flip_blindness_of_intensity() {
        let b = beam(150e-6);
        let geom = DetectorGeometry::paper_quadrant();
        let a = quadrant_currents(ModeSpec::hg(0, 0), &b, &geom, TransversePoint::default())
            .unwrap();
        let f = quadrant_currents(ModeSpec::f0f0(), &b, &geom, TransversePoint::default())
            .unwrap();
        assert_relative_eq!(a.ia(), f.ia(), epsilon = 1e-10);
        assert_relative_eq!(a.i1, f.i1, epsilon = 1e-10);
    }

    #[test]
    fn loss_limits() {
        let geom = DetectorGeometry {
            element_size: f64::INFINITY,
            gap: 0.0,
            center_offset: TransversePoint::default(),
            layout: DetectorLayout::Quadrant,
        };
        assert!(detector_loss(&beam(150e-6), &geom).unwrap() < 1e-8);

        // w0 much smaller than the gap: nearly all power absorbed
        let gappy = DetectorGeometry {
            element_size: 0.5e-3,
            gap: 25e-6,
            center_offset: TransversePoint::default(),
            layout: DetectorLayout::Quadrant,
        };
        let l = detector_loss(&beam(2.5e-6), &gappy).unwrap();
        assert!(l > 0.999, "loss {l}");
    }

    #[test]
    fn paper_geometry_loss_golden() {
        // golden regression anchor, from the closed-form erf oracle:
        // loss = 1 - (erf(sqrt2(d/2+D)/w0) - erf(sqrt2 d/2 /w0))^2
        let l = detector_loss(&beam(150e-6), &DetectorGeometry::paper_quadrant()).unwrap();
        assert_relative_eq!(l, 0.247_214_131_66, epsilon = 1e-8);
    }

    #[test]
    fn energy_conservation_with_gap() {
        // captured + gap-absorbed + outside = 1, each term by the erf oracle
        let w0 = 150e-6_f64;
        let (dd, gap) = (0.5e-3, 25e-6);
        let seg = |a: f64, b: f64| {
            0.5 * (erf(std::f64::consts::SQRT_2 * b / w0) - erf(std::f64::consts::SQRT_2 * a / w0))
        };
        let edge = gap / 2.0 + dd;
        let cx = 2.0 * seg(gap / 2.0, edge);
        let square = 2.0 * seg(-0.0, edge) * 2.0 * seg(0.0, edge);
        let captured = detector_loss(&beam(w0), &DetectorGeometry::paper_quadrant())
            .map(|l| 1.0 - l)
            .unwrap();
        let gap_power = square - cx * cx;
        let outside = 1.0 - square;
        assert_relative_eq!(captured + gap_power + outside, 1.0, epsilon = 1e-8);
        assert_relative_eq!(captured, cx * cx, epsilon = 1e-8);
    }

    #[test]
    fn waist_optimum_paper_geometry() {
        let geom = DetectorGeometry::paper_quadrant();
        let opt = optimize_waist(1064e-9, &geom).unwrap();
        assert!(!opt.at_boundary);
        assert!(opt.waist_w0 > geom.gap && opt.waist_w0 < geom.element_size);
        // frozen from the 1 um-resolution erf-oracle scan
        assert_relative_eq!(opt.waist_w0, 375.9e-6, epsilon = 2e-6);
        assert_relative_eq!(opt.min_loss, 0.115_311_6, epsilon = 1e-5);
    }

    #[test]
    fn waist_optimum_scale_invariance() {
        let geom = DetectorGeometry::paper_quadrant();
        let doubled = DetectorGeometry {
            element_size: 2.0 * geom.element_size,
            gap: 2.0 * geom.gap,
            ..geom
        };
        let a = optimize_waist(1064e-9, &geom).unwrap();
        let b = optimize_waist(1064e-9, &doubled).unwrap();
        assert_relative_eq!(b.waist_w0, 2.0 * a.waist_w0, max_relative = 1e-4);
    }

    #[test]
    fn zero_gap_pushes_waist_to_boundary() {
        let geom = DetectorGeometry {
            element_size: 0.5e-3,
            gap: 0.0,
            center_offset: TransversePoint::default(),
            layout: DetectorLayout::Quadrant,
        };
        let opt = optimize_waist(1064e-9, &geom).unwrap();
        assert!(opt.at_boundary);
    }

    #[test]
    fn slope_matches_infinite_detector_closed_form() {
        let b = beam(150e-6);
        let s = displacement_signal_slope(
            DisplacementAxis::Horizontal,
            ModeSpec::hg(0, 0),
            &b,
            &DetectorGeometry::infinite_split(Axis::X),
        )
        .unwrap();
        // slope * sqrt(pi/8) * w0 = 1 at unit SNR (Eq.-10 consistency)
        assert_relative_eq!(s * (PI / 8.0).sqrt() * b.waist_w0, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn finite_detector_slope_is_smaller() {
        let b = beam(150e-6);
        let inf = displacement_signal_slope(
            DisplacementAxis::Horizontal,
            ModeSpec::hg(0, 0),
            &b,
            &DetectorGeometry::infinite_quadrant(),
        )
        .unwrap();
        let fin = displacement_signal_slope(
            DisplacementAxis::Horizontal,
            ModeSpec::hg(0, 0),
            &b,
            &DetectorGeometry::paper_quadrant(),
        )
        .unwrap();
        assert!(fin < inf, "finite {fin} vs infinite {inf}");
        assert!(fin > 0.0);
    }

    #[test]
    fn diagonal_combo_blind_to_displacement() {
        let b = beam(150e-6);
        let s = diagonal_slope(ModeSpec::hg(0, 0), &b, &DetectorGeometry::paper_quadrant())
            .unwrap();
        assert!(s.abs() < 1e-3 / b.waist_w0, "Id slope {s}");
    }

    #[test]
    fn loss_unimodal_over_scan() {
        let geom = DetectorGeometry::paper_quadrant();
        let lo = geom.gap / 2.0;
        let hi = 5.0 * geom.element_size;
        let n = 120;
        let mut prev = f64::NAN;
        let mut minima = 0;
        let mut falling = true;
        for k in 0..=n {
            let w = lo * (hi / lo).powf(k as f64 / n as f64);
            let l = detector_loss(&beam(w), &geom).unwrap();
            if !prev.is_nan() {
                if falling && l > prev + 1e-12 {
                    minima += 1;
                    falling = false;
                } else if !falling && l < prev - 1e-12 {
                    falling = true;
                }
            }
            prev = l;
        }
        assert_eq!(minima, 1);
    }
}
