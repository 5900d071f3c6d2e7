//! Declarative scenario configs: strict-unit TOML parsing and validation.
//!
//! Every dimensioned quantity in a scenario file is a string with an
//! explicit unit suffix; fractions and counts are plain numbers. Parsing
//! produces fully typed SI values; `validate` then enforces the physical
//! invariants (orthogonal squeezer modes, sane ranges) with field-level
//! diagnostics.

use crate::cavity::CavityConfig;
use crate::detector::{DetectorGeometry, DetectorLayout};
use crate::error::{Error, Result};
use crate::modes::{BeamParams, FlipAxes, ModeSpec, TransversePoint};
use crate::overlap::{full_plane_overlap, Axis};
use crate::trace::EsaSettings;
use crate::units;
use serde::Deserialize;

/// Which photocurrent combination a readout traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Readout {
    /// Ib: left/right halves.
    Horizontal,
    /// Ic: top/bottom halves.
    Vertical,
    /// Id: diagonal quadrant pairs.
    Diagonal,
}

impl Readout {
    /// Axes across which the mean mode is flipped to obtain the mode whose
    /// amplitude quadrature sets this readout's noise.
    pub fn flip_axes(self) -> FlipAxes {
        match self {
            Readout::Horizontal => FlipAxes::H,
            Readout::Vertical => FlipAxes::V,
            Readout::Diagonal => FlipAxes::BOTH,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Readout::Horizontal => "horizontal",
            Readout::Vertical => "vertical",
            Readout::Diagonal => "diagonal",
        }
    }
}

/// What pipeline a scenario runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    /// Flat squeezed/coherent noise floors on the configured readouts.
    NoiseFloors,
    /// Cavity reflected power versus detuning over one free spectral range.
    CavityScan,
    /// Fixed displacement tone: squeezed and coherent spectra plus SNRs.
    Modulation,
    /// Linearly ramped displacement with minimum-detectable analysis.
    Ramp,
    /// Paired-axis quadrature scatter for correlation diagrams.
    Correlation,
    /// Standard-quantum-limit displacement table.
    SqlTable,
    /// Detector loss versus waist with the optimum.
    WaistScan,
}

impl ScenarioKind {
    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "noise_floors" => ScenarioKind::NoiseFloors,
            "cavity_scan" => ScenarioKind::CavityScan,
            "modulation" => ScenarioKind::Modulation,
            "ramp" => ScenarioKind::Ramp,
            "correlation" => ScenarioKind::Correlation,
            "sql_table" => ScenarioKind::SqlTable,
            "waist_scan" => ScenarioKind::WaistScan,
            other => return Err(Error::config("kind", format!("unknown kind {other:?}"))),
        })
    }
}

/// Parse a mode token: one or two digits, each optionally prefixed by `f`
/// marking a phase flip across that axis ("00", "10", "f00", "0f0", "f0f0").
pub fn parse_mode(token: &str) -> Result<ModeSpec> {
    let bad = || Error::config("mode", format!("cannot parse mode token {token:?}"));
    let bytes = token.as_bytes();
    let mut idx = 0;
    let mut read_axis = || -> Result<(u32, bool)> {
        let flip = bytes.get(idx) == Some(&b'f');
        if flip {
            idx += 1;
        }
        let d = bytes.get(idx).filter(|b| b.is_ascii_digit()).ok_or_else(bad)?;
        idx += 1;
        Ok(((d - b'0') as u32, flip))
    };
    let (m, fh) = read_axis()?;
    let (n, fv) = read_axis()?;
    if idx != bytes.len() {
        return Err(bad());
    }
    Ok(ModeSpec {
        m,
        n,
        flips: FlipAxes {
            horizontal: fh,
            vertical: fv,
        },
    })
}

/// How a squeezed beam reaches the detector: through the combiner cavity
/// or reflected off it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqueezerPath {
    Transmitted,
    Reflected,
}

/// A squeezed-vacuum source in one transverse mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Squeezer {
    pub mode: ModeSpec,
    /// Source amplitude-quadrature variance in dB relative to QNL.
    pub source_db: f64,
    pub path: SqueezerPath,
}

/// Modulation applied to the bright beam.
#[derive(Debug, Clone, PartialEq)]
pub enum Modulation {
    None,
    /// Fixed tone; the coherent-beam SNR per readout is the calibration.
    Tone { coherent_snr: Vec<(Readout, f64)> },
    /// Linear ramp with the coherent detection point as length anchor.
    Ramp {
        anchor: f64,
        confidence: f64,
        window: usize,
    },
    /// Quadrature scatter amplitude factors per readout.
    Scatter { factors: Vec<(Readout, f64)> },
}

/// A fully parsed, typed scenario.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub id: String,
    pub description: String,
    pub kind: ScenarioKind,
    pub seed: u64,
    pub expansion_order: u32,
    pub beam: BeamParams,
    pub mean_mode: ModeSpec,
    pub mean_power: f64,
    pub squeezers: Vec<Squeezer>,
    pub waveplate_visibility: f64,
    pub beamsplitter: f64,
    pub cavity: CavityConfig,
    pub detector: DetectorGeometry,
    pub esa: EsaSettings,
    pub readouts: Vec<Readout>,
    pub modulation: Modulation,
}

// ---------------------------------------------------------------------------
// raw TOML shapes

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    id: String,
    #[serde(default)]
    description: String,
    kind: String,
    seed: u64,
    #[serde(default = "default_order")]
    expansion_order: u32,
    beam: RawBeam,
    mean_field: RawMeanField,
    #[serde(default)]
    squeezers: Vec<RawSqueezer>,
    efficiency: RawEfficiency,
    detector: RawDetector,
    esa: RawEsa,
    #[serde(default)]
    readouts: Vec<String>,
    modulation: Option<RawModulation>,
}

fn default_order() -> u32 {
    29
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBeam {
    wavelength: String,
    waist: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeanField {
    mode: String,
    power: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSqueezer {
    mode: String,
    source_db: String,
    path: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEfficiency {
    waveplate_visibility: f64,
    beamsplitter: f64,
    cavity: RawCavity,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCavity {
    round_trip_length: String,
    mirror_r: [f64; 3],
    roc_curved: String,
    intracavity_loss: f64,
    measured_pole: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDetector {
    element_size: String,
    gap: String,
    layout: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEsa {
    center_freq: String,
    span: String,
    rbw: String,
    vbw: String,
    averages: u32,
    samples: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModulation {
    kind: String,
    #[serde(default)]
    coherent_snr: Vec<RawReadoutValue>,
    #[serde(default)]
    factors: Vec<RawReadoutValue>,
    anchor: Option<String>,
    confidence: Option<f64>,
    window: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReadoutValue {
    readout: String,
    value: f64,
}

// ---------------------------------------------------------------------------

fn parse_readout(s: &str) -> Result<Readout> {
    Ok(match s {
        "horizontal" => Readout::Horizontal,
        "vertical" => Readout::Vertical,
        "diagonal" => Readout::Diagonal,
        other => {
            return Err(Error::config(
                "readouts",
                format!("unknown readout {other:?}"),
            ))
        }
    })
}

fn fraction_in_range(field: &str, v: f64, lo: f64, hi: f64) -> Result<f64> {
    if !(lo..=hi).contains(&v) || !v.is_finite() {
        return Err(Error::config(
            field,
            format!("{v} outside [{lo}, {hi}]"),
        ));
    }
    Ok(v)
}

impl ScenarioConfig {
    /// Parse a scenario from TOML text.
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawScenario = toml::from_str(text)
            .map_err(|e| Error::config("<toml>", e.to_string()))?;
        let kind = ScenarioKind::parse(&raw.kind)?;
        let beam = BeamParams::new(
            units::parse_length(&raw.beam.wavelength)?,
            units::parse_length(&raw.beam.waist)?,
        );
        let mean_mode = parse_mode(&raw.mean_field.mode)?;
        let mean_power = units::parse_power(&raw.mean_field.power)?;
        let mut squeezers = Vec::new();
        for s in &raw.squeezers {
            squeezers.push(Squeezer {
                mode: parse_mode(&s.mode)?,
                source_db: units::parse_db(&s.source_db)?,
                path: match s.path.as_str() {
                    "transmitted" => SqueezerPath::Transmitted,
                    "reflected" => SqueezerPath::Reflected,
                    other => {
                        return Err(Error::config(
                            "squeezers.path",
                            format!("unknown path {other:?}"),
                        ))
                    }
                },
            });
        }
        let eff = &raw.efficiency;
        let cavity = CavityConfig {
            round_trip_length: units::parse_length(&eff.cavity.round_trip_length)?,
            mirror_r: eff.cavity.mirror_r,
            roc_curved: units::parse_length(&eff.cavity.roc_curved)?,
            intracavity_loss: fraction_in_range(
                "efficiency.cavity.intracavity_loss",
                eff.cavity.intracavity_loss,
                0.0,
                1.0,
            )?,
            measured_pole_hz: match &eff.cavity.measured_pole {
                Some(s) => Some(units::parse_frequency(s)?),
                None => None,
            },
        };
        let detector = DetectorGeometry {
            element_size: units::parse_length(&raw.detector.element_size)?,
            gap: units::parse_length(&raw.detector.gap)?,
            center_offset: TransversePoint::default(),
            layout: match raw.detector.layout.as_str() {
                "quadrant" => DetectorLayout::Quadrant,
                "split_horizontal" => DetectorLayout::Split(Axis::X),
                "split_vertical" => DetectorLayout::Split(Axis::Y),
                other => {
                    return Err(Error::config(
                        "detector.layout",
                        format!("unknown layout {other:?}"),
                    ))
                }
            },
        };
        let esa = EsaSettings {
            center_freq: units::parse_frequency(&raw.esa.center_freq)?,
            span: units::parse_frequency(&raw.esa.span)?,
            rbw: units::parse_frequency(&raw.esa.rbw)?,
            vbw: units::parse_frequency(&raw.esa.vbw)?,
            averages: raw.esa.averages,
            samples: raw.esa.samples,
        };
        let readouts = raw
            .readouts
            .iter()
            .map(|s| parse_readout(s))
            .collect::<Result<Vec<_>>>()?;
        let pairs = |list: &[RawReadoutValue]| -> Result<Vec<(Readout, f64)>> {
            list.iter()
                .map(|rv| Ok((parse_readout(&rv.readout)?, rv.value)))
                .collect()
        };
        let modulation = match &raw.modulation {
            None => Modulation::None,
            Some(m) => match m.kind.as_str() {
                "none" => Modulation::None,
                "tone" => Modulation::Tone {
                    coherent_snr: pairs(&m.coherent_snr)?,
                },
                "ramp" => Modulation::Ramp {
                    anchor: units::parse_length(m.anchor.as_deref().ok_or_else(|| {
                        Error::config("modulation.anchor", "required for ramps")
                    })?)?,
                    confidence: m.confidence.unwrap_or(0.99),
                    window: m.window.unwrap_or(64),
                },
                "scatter" => Modulation::Scatter {
                    factors: pairs(&m.factors)?,
                },
                other => {
                    return Err(Error::config(
                        "modulation.kind",
                        format!("unknown kind {other:?}"),
                    ))
                }
            },
        };
        let config = ScenarioConfig {
            id: raw.id,
            description: raw.description,
            kind,
            seed: raw.seed,
            expansion_order: raw.expansion_order,
            beam,
            mean_mode,
            mean_power,
            squeezers,
            waveplate_visibility: fraction_in_range(
                "efficiency.waveplate_visibility",
                eff.waveplate_visibility,
                0.0,
                1.0,
            )?,
            beamsplitter: eff.beamsplitter,
            cavity,
            detector,
            esa,
            readouts,
            modulation,
        };
        config.validate()?;
        Ok(config)
    }

    /// Physical invariants beyond what parsing can enforce.
    pub fn validate(&self) -> Result<()> {
        if !(self.beamsplitter > 0.0 && self.beamsplitter < 1.0) {
            return Err(Error::config(
                "efficiency.beamsplitter",
                format!("{} outside (0, 1)", self.beamsplitter),
            ));
        }
        for r in &self.cavity.mirror_r {
            if !(*r > 0.0 && *r <= 1.0) {
                return Err(Error::config(
                    "efficiency.cavity.mirror_r",
                    format!("reflectivity {r} outside (0, 1]"),
                ));
            }
        }
        self.esa.validate()?;
        if self.mean_power <= 0.0 {
            return Err(Error::config("mean_field.power", "must be positive"));
        }
        // squeezer modes pairwise orthogonal and orthogonal to the mean mode
        let mut modes: Vec<(String, ModeSpec)> = vec![(
            "mean_field.mode".to_string(),
            self.mean_mode,
        )];
        for (k, s) in self.squeezers.iter().enumerate() {
            modes.push((format!("squeezers[{k}].mode"), s.mode));
        }
        for a in 0..modes.len() {
            for b in (a + 1)..modes.len() {
                if modes[a].1 == modes[b].1 {
                    return Err(Error::config(
                        modes[b].0.clone(),
                        format!("duplicate mode {}", modes[b].1),
                    ));
                }
                let ov = full_plane_overlap(modes[a].1, modes[b].1, &self.beam)?;
                if ov.abs() > 1e-6 {
                    return Err(Error::config(
                        modes[b].0.clone(),
                        format!(
                            "mode {} not orthogonal to {} (overlap {:e})",
                            modes[b].1, modes[a].1, ov
                        ),
                    ));
                }
            }
        }
        if self.readouts.is_empty()
            && matches!(
                self.kind,
                ScenarioKind::NoiseFloors
                    | ScenarioKind::Modulation
                    | ScenarioKind::Ramp
                    | ScenarioKind::Correlation
            )
        {
            return Err(Error::config("readouts", "at least one readout required"));
        }
        Ok(())
    }

    /// Squeezer driving a given readout: the one whose mode is the mean
    /// mode flipped across the readout's axes. `None` means vacuum (QNL).
    pub fn squeezer_for(&self, readout: Readout) -> Option<&Squeezer> {
        let want = self.mean_mode.flipped(readout.flip_axes());
        self.squeezers.iter().find(|s| s.mode == want)
    }
}
