//! Overlap integrals of mode pairs over detector regions, and expansion of
//! flipped modes in the HG basis: numerically (adaptive quadrature with
//! discontinuities on panel edges) and by the closed-form coefficients.

use crate::error::Result;
use crate::modes::{mode_amplitude, BeamParams, ModeSpec, TransversePoint};
use crate::quad::{integrate_1d, integrate_2d, Rect};
use std::collections::BTreeMap;

/// Transverse axis selector for half-plane regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Integration region over the transverse plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    FullPlane,
    /// The half where the named coordinate has the given sign.
    HalfPlane(Axis, i8),
    /// Quadrant selected by the signs of x and y.
    Quadrant(i8, i8),
    /// Finite rectangle, meters.
    Rect { x0: f64, x1: f64, y0: f64, y1: f64 },
}

/// A region with a signed weight (+1 or -1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedRegion {
    pub region: Region,
    pub weight: i8,
}

impl WeightedRegion {
    pub fn new(region: Region, weight: i8) -> Self {
        assert!(weight == 1 || weight == -1, "weights are +1 or -1");
        WeightedRegion { region, weight }
    }
}

/// The signed split-detector region pair: +1 on the positive half of `axis`,
/// -1 on the negative half (the photocurrent-difference domain).
pub fn split_regions(axis: Axis) -> Vec<WeightedRegion> {
    vec![
        WeightedRegion::new(Region::HalfPlane(axis, 1), 1),
        WeightedRegion::new(Region::HalfPlane(axis, -1), -1),
    ]
}

/// Four quadrants signed by sx*sy (the diagonal-difference domain for
/// doubly-flipped overlaps).
pub fn signed_quadrants() -> Vec<WeightedRegion> {
    vec![
        WeightedRegion::new(Region::Quadrant(1, 1), 1),
        WeightedRegion::new(Region::Quadrant(-1, 1), -1),
        WeightedRegion::new(Region::Quadrant(-1, -1), 1),
        WeightedRegion::new(Region::Quadrant(1, -1), -1),
    ]
}

/// Result of a region overlap: value and reported absolute-error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Overlap {
    pub value: f64,
    pub abs_err: f64,
}

/// Half-width of the quadrature window: covers the classical turning point
/// of the highest-order mode plus margin, never less than 5 waists.
pub fn mode_extent(w0: f64, max_index: u32) -> f64 {
    let turning = (2.0 * max_index as f64 + 1.0).sqrt() / std::f64::consts::SQRT_2;
    w0 * (turning + 4.0).max(5.0)
}

fn region_rects(region: Region, half: f64) -> Vec<Rect> {
    match region {
        Region::FullPlane => vec![Rect::new(-half, half, -half, half)],
        Region::HalfPlane(Axis::X, s) => {
            if s >= 0 {
                vec![Rect::new(0.0, half, -half, half)]
            } else {
                vec![Rect::new(-half, 0.0, -half, half)]
            }
        }
        Region::HalfPlane(Axis::Y, s) => {
            if s >= 0 {
                vec![Rect::new(-half, half, 0.0, half)]
            } else {
                vec![Rect::new(-half, half, -half, 0.0)]
            }
        }
        Region::Quadrant(sx, sy) => {
            let (x0, x1) = if sx >= 0 { (0.0, half) } else { (-half, 0.0) };
            let (y0, y1) = if sy >= 0 { (0.0, half) } else { (-half, 0.0) };
            vec![Rect::new(x0, x1, y0, y1)]
        }
        Region::Rect { x0, x1, y0, y1 } => vec![Rect::new(
            x0.max(-half),
            x1.min(half),
            y0.max(-half),
            y1.min(half),
        )],
    }
}

/// Sum over weighted regions of the integral of u_a u_b (real convention).
/// Flipped-mode discontinuities are aligned with panel edges by pre-splitting
/// every rectangle at x = 0 and y = 0.
pub fn region_overlap(
    a: ModeSpec,
    b: ModeSpec,
    beam: &BeamParams,
    regions: &[WeightedRegion],
) -> Result<Overlap> {
    let half = mode_extent(beam.waist_w0, a.m.max(a.n).max(b.m).max(b.n));
    let f = |x: f64, y: f64| {
        let p = TransversePoint { x, y };
        mode_amplitude(a, beam, p) * mode_amplitude(b, beam, p)
    };
    let mut value = 0.0;
    let mut abs_err = 0.0;
    for wr in regions {
        for rect in region_rects(wr.region, half) {
            if rect.area() == 0.0 {
                continue;
            }
            for piece in rect.split_at_axes() {
                let (v, e) = integrate_2d(f, piece, 1e-10)?;
                value += wr.weight as f64 * v;
                abs_err += e;
            }
        }
    }
    Ok(Overlap { value, abs_err })
}

/// Full-plane inner product <a|b>; zero analytically for distinct canonical
/// modes, computed numerically here so callers can verify supplied bases.
pub fn full_plane_overlap(a: ModeSpec, b: ModeSpec, beam: &BeamParams) -> Result<f64> {
    // Separable: flips act per axis, so the 2D integral factors.
    let w0 = beam.waist_w0;
    let x = overlap_1d(a.m, a.flips.horizontal, b.m, b.flips.horizontal, w0)?;
    if x.abs() < 1e-14 {
        return Ok(0.0);
    }
    let y = overlap_1d(a.n, a.flips.vertical, b.n, b.flips.vertical, w0)?;
    Ok(x * y)
}

/// 1D overlap of (optionally sign-flipped) HG amplitudes.
fn overlap_1d(m1: u32, flip1: bool, m2: u32, flip2: bool, w0: f64) -> Result<f64> {
    let flipped = flip1 != flip2; // two flips cancel
    if !flipped {
        return Ok(if m1 == m2 { 1.0 } else { 0.0 });
    }
    // parity: integrand f_m1 f_m2 has parity (-1)^(m1+m2); sign(x) is odd
    if (m1 + m2) % 2 == 0 {
        return Ok(0.0);
    }
    signed_overlap_1d(m1, m2, w0)
}

/// Signed 1D overlap integral of sign(x) phi_m1 phi_m2, by quadrature.
pub fn signed_overlap_1d(m1: u32, m2: u32, w0: f64) -> Result<f64> {
    let half = mode_extent(w0, m1.max(m2));
    let f = |x: f64| {
        crate::modes::hg_amplitude_1d(m1, w0, x) * crate::modes::hg_amplitude_1d(m2, w0, x)
    };
    let (pos, _) = integrate_1d(f, 0.0, half, 1e-11)?;
    let (neg, _) = integrate_1d(f, -half, 0.0, 1e-11)?;
    Ok(pos - neg)
}

/// Closed-form expansion coefficient of the doubly-flipped fundamental over
/// HG(m, n) with m = 2i+1, n = 2j+1:
///
///   c_mn = (-1)^(i+j) (2i)! (2j)! / (pi i! j! 2^(i+j-1) sqrt((2i+1)!(2j+1)!))
///
/// Factorials are taken in log space so the whole range stays finite.
pub fn cmn_closed_form(i: u32, j: u32) -> f64 {
    let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
    let ln = ln_factorial(2 * i) + ln_factorial(2 * j)
        - std::f64::consts::PI.ln()
        - ln_factorial(i)
        - ln_factorial(j)
        - (i as f64 + j as f64 - 1.0) * std::f64::consts::LN_2
        - 0.5 * (ln_factorial(2 * i + 1) + ln_factorial(2 * j + 1));
    sign * ln.exp()
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n as u64).map(|k| (k as f64).ln()).sum()
}

/// Expansion of a flipped mode over the HG basis, truncated at m + n <=
/// max_order. Parity-forbidden entries are omitted (identically zero).
#[derive(Debug, Clone)]
pub struct ExpansionCoefficients {
    coeffs: BTreeMap<(u32, u32), f64>,
    pub max_order: u32,
}

impl ExpansionCoefficients {
    pub fn get(&self, m: u32, n: u32) -> f64 {
        self.coeffs.get(&(m, n)).copied().unwrap_or(0.0)
    }

    pub fn sum_sq(&self) -> f64 {
        self.coeffs.values().map(|c| c * c).sum()
    }

    /// Entries in deterministic (m, n) order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        self.coeffs.iter().map(|(&(m, n), &c)| (m, n, c))
    }

    pub fn from_entries(entries: impl IntoIterator<Item = ((u32, u32), f64)>, max_order: u32) -> Self {
        ExpansionCoefficients {
            coeffs: entries.into_iter().filter(|&(_, c)| c != 0.0).collect(),
            max_order,
        }
    }

    /// Pure single mode (delta expansion).
    pub fn pure(m: u32, n: u32) -> Self {
        ExpansionCoefficients {
            coeffs: [((m, n), 1.0)].into_iter().collect(),
            max_order: m + n,
        }
    }
}

/// Expand a flipped mode over the HG basis by separable 1D quadrature.
/// This is the numerical route, independent of `cmn_closed_form`.
pub fn expand_flipped(
    mode: ModeSpec,
    beam: &BeamParams,
    max_order: u32,
) -> Result<ExpansionCoefficients> {
    assert!(mode.is_flipped(), "expand_flipped requires a flipped mode");
    assert!(max_order <= 60, "truncation order capped at 60");
    let w0 = beam.waist_w0;

    // per-axis coefficient vectors
    let ax = axis_coeffs(mode.m, mode.flips.horizontal, w0, max_order)?;
    let ay = axis_coeffs(mode.n, mode.flips.vertical, w0, max_order)?;

    let mut entries = BTreeMap::new();
    for (m, &cx) in ax.iter().enumerate() {
        if cx == 0.0 {
            continue;
        }
        for (n, &cy) in ay.iter().enumerate() {
            if cy == 0.0 || (m + n) as u32 > max_order {
                continue;
            }
            entries.insert((m as u32, n as u32), cx * cy);
        }
    }
    Ok(ExpansionCoefficients {
        coeffs: entries,
        max_order,
    })
}

fn axis_coeffs(base: u32, flipped: bool, w0: f64, max_order: u32) -> Result<Vec<f64>> {
    let mut out = vec![0.0; max_order as usize + 1];
    if !flipped {
        if base <= max_order {
            out[base as usize] = 1.0;
        }
        return Ok(out);
    }
    for m in 0..=max_order {
        if (m + base) % 2 == 1 {
            out[m as usize] = signed_overlap_1d(m, base, w0)?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::FlipAxes;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn beam() -> BeamParams {
        BeamParams::new(1064e-9, 150e-6)
    }

    #[test]
    fn flipped_fundamental_signed_overlap_is_one() {
        let o = region_overlap(
            ModeSpec::hg(0, 0),
            ModeSpec::f00(),
            &beam(),
            &split_regions(Axis::X),
        )
        .unwrap();
        assert!((o.value - 1.0).abs() < 1e-8, "got {}", o.value);
    }

    #[test]
    fn even_mode_signed_overlap_vanishes() {
        let o = region_overlap(
            ModeSpec::hg(2, 0),
            ModeSpec::f00(),
            &beam(),
            &split_regions(Axis::X),
        )
        .unwrap();
        assert!(o.value.abs() < 1e-8, "got {}", o.value);
    }

    #[test]
    fn full_plane_normalization() {
        let o = region_overlap(
            ModeSpec::hg(0, 0),
            ModeSpec::hg(0, 0),
            &beam(),
            &[WeightedRegion::new(Region::FullPlane, 1)],
        )
        .unwrap();
        assert!((o.value - 1.0).abs() < 1e-8);
    }

    #[test]
    fn closed_form_fundamental_coefficient() {
        assert_relative_eq!(cmn_closed_form(0, 0), 2.0 / PI, epsilon = 1e-14);
    }

    #[test]
    fn closed_form_matches_quadrature_oracle_spot() {
        // c_{31} corresponds to (i, j) = (1, 0): <HG(3,1) | TEM_f0f0> over
        // the four signed quadrants of HG(3,1) * HG(0,0).
        let o = region_overlap(
            ModeSpec::hg(3, 1),
            ModeSpec::hg(0, 0),
            &beam(),
            &signed_quadrants(),
        )
        .unwrap();
        assert!(
            (o.value - cmn_closed_form(1, 0)).abs() < 1e-8,
            "quadrature {} vs closed form {}",
            o.value,
            cmn_closed_form(1, 0)
        );
    }

    #[test]
    fn one_dimensional_fundamental_coefficient() {
        let a1 = signed_overlap_1d(1, 0, 150e-6).unwrap();
        assert!((a1 - (2.0 / PI).sqrt()).abs() < 1e-8, "got {a1}");
        // separability: a1^2 equals the 2D i=j=0 coefficient
        assert_relative_eq!(a1 * a1, cmn_closed_form(0, 0), epsilon = 1e-8);
    }

    #[test]
    fn high_order_coefficients_are_insignificant() {
        for i in 0..=28u32 {
            for j in 0..=28u32 {
                let (m, n) = (2 * i + 1, 2 * j + 1);
                if m + n > 18 && m + n <= 58 {
                    let c = cmn_closed_form(i, j);
                    // slow m^{-3/2} tail of a discontinuous mode: individual
                    // high-order terms stay below one percent of |c_11|^2
                    assert!(
                        c * c < 0.01 * cmn_closed_form(0, 0).powi(2),
                        "|c_{{{m},{n}}}|^2 = {}",
                        c * c
                    );
                }
            }
        }
    }

    #[test]
    fn expand_f00_is_odd_in_m_only() {
        let e = expand_flipped(ModeSpec::f00(), &beam(), 12).unwrap();
        for (m, n, c) in e.iter() {
            assert!(m % 2 == 1 && n == 0, "unexpected entry ({m},{n}) = {c}");
        }
        assert_eq!(e.get(2, 0), 0.0);
        assert_eq!(e.get(1, 2), 0.0);
    }

    #[test]
    fn expand_f0f0_parity() {
        let e = expand_flipped(ModeSpec::f0f0(), &beam(), 10).unwrap();
        for (m, n, _) in e.iter() {
            assert!(m % 2 == 1 && n % 2 == 1);
        }
        assert_eq!(e.get(0, 0), 0.0, "no fundamental content in TEM_f0f0");
    }

    #[test]
    fn parseval_monotone_for_f00() {
        let b = beam();
        let mut prev = 0.0;
        for order in [1, 5, 11, 21, 41] {
            let e = expand_flipped(ModeSpec::f00(), &b, order).unwrap();
            let s = e.sum_sq();
            assert!(s >= prev - 1e-12 && s <= 1.0 + 1e-9, "order {order}: {s}");
            prev = s;
        }
        // The flipped mode is discontinuous, so convergence is slow
        // (|a_m|^2 ~ m^-3/2); frozen from the independent scipy oracle.
        assert_relative_eq!(prev, 0.921_472, epsilon = 1e-4);
    }

    #[test]
    fn f0f0_truncation_at_order_58_captures_energy() {
        let e = expand_flipped(ModeSpec::f0f0(), &beam(), 58).unwrap();
        // Frozen from the independent scipy quadrature oracle.
        assert_relative_eq!(e.sum_sq(), 0.867_559, epsilon = 1e-4);
    }

    #[test]
    fn overlap_symmetry() {
        let b = beam();
        let regions = split_regions(Axis::X);
        let ab = region_overlap(ModeSpec::hg(1, 0), ModeSpec::f00(), &b, &regions).unwrap();
        let ba = region_overlap(ModeSpec::f00(), ModeSpec::hg(1, 0), &b, &regions).unwrap();
        assert_relative_eq!(ab.value, ba.value, epsilon = 1e-10);
    }

    #[test]
    fn flipped_orthogonal_to_base_when_centred() {
        let v = full_plane_overlap(ModeSpec::f00(), ModeSpec::hg(0, 0), &beam()).unwrap();
        assert!(v.abs() < 1e-9);
    }

    #[test]
    fn flipped_mode_normalized() {
        let v = full_plane_overlap(ModeSpec::f0f0(), ModeSpec::f0f0(), &beam()).unwrap();
        assert_relative_eq!(v, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn expansion_collapses_for_unflipped_axis_pattern() {
        let e = expand_flipped(ModeSpec::hg(2, 0).flipped(FlipAxes::V), &beam(), 9).unwrap();
        for (m, n, _) in e.iter() {
            assert_eq!(m, 2);
            assert!(n % 2 == 1);
        }
    }
}
