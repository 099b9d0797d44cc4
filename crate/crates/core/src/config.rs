//! Physical scenario: pump, crystal/gap stack, gain, and numerical settings.
//!
//! Internal units: lengths in µm, transverse wavenumbers in rad/µm, angles in rad.
//! The TOML document uses nm for the pump wavelength, µm for the waist, mm for
//! segment lengths and mrad for walk-off.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gaussian pump beam.
#[derive(Debug, Clone, PartialEq)]
pub struct PumpBeam {
    pub wavelength_nm: f64,
    /// FWHM of the intensity distribution, µm.
    pub fwhm_um: f64,
    pub refractive_index: f64,
    /// Amplitude width entering exp(-σ²Q²/2), µm.
    pub sigma_um: f64,
    /// Pump wavenumber, rad/µm.
    pub k_p: f64,
}

impl PumpBeam {
    pub fn new(wavelength_nm: f64, fwhm_um: f64, refractive_index: f64) -> Result<Self> {
        if !(wavelength_nm > 0.0 && wavelength_nm.is_finite()) {
            return Err(Error::config("pump.wavelength_nm", "must be positive"));
        }
        if !(fwhm_um > 0.0 && fwhm_um.is_finite()) {
            return Err(Error::config("pump.fwhm_um", "must be positive"));
        }
        if !(refractive_index > 0.0 && refractive_index.is_finite()) {
            return Err(Error::config("pump.refractive_index", "must be positive"));
        }
        Ok(Self {
            wavelength_nm,
            fwhm_um,
            refractive_index,
            sigma_um: fwhm_to_sigma(fwhm_um),
            k_p: 2.0 * PI * refractive_index / (wavelength_nm * 1e-3),
        })
    }
}

/// σ from the intensity FWHM, FWHM = 2·sqrt(ln 2)·σ.
pub fn fwhm_to_sigma(fwhm: f64) -> f64 {
    fwhm / (2.0 * std::f64::consts::LN_2.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentKind {
    Crystal,
    Gap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub kind: SegmentKind,
    pub length_mm: f64,
    /// Signed walk-off angle in the x-z plane, mrad.
    pub walkoff_mrad: f64,
    /// Overrides the pump refractive index inside this segment.
    pub refractive_index: Option<f64>,
}

impl Segment {
    pub fn crystal(length_mm: f64, walkoff_mrad: f64) -> Self {
        Self { kind: SegmentKind::Crystal, length_mm, walkoff_mrad, refractive_index: None }
    }

    pub fn gap(length_mm: f64) -> Self {
        Self { kind: SegmentKind::Gap, length_mm, walkoff_mrad: 0.0, refractive_index: None }
    }

    pub fn is_nonlinear(&self) -> bool {
        self.kind == SegmentKind::Crystal
    }

    pub fn length_um(&self) -> f64 {
        self.length_mm * 1e3
    }

    pub fn walkoff_rad(&self) -> f64 {
        self.walkoff_mrad * 1e-3
    }

    fn validate(&self, index: usize) -> Result<()> {
        let path = |f: &str| format!("segment[{index}].{f}");
        if !(self.length_mm > 0.0 && self.length_mm.is_finite()) {
            return Err(Error::config(path("length_mm"), "must be positive"));
        }
        if !self.walkoff_mrad.is_finite() {
            return Err(Error::config(path("walkoff_mrad"), "must be finite"));
        }
        if self.kind == SegmentKind::Gap && self.walkoff_mrad != 0.0 {
            return Err(Error::config(path("walkoff_mrad"), "a gap cannot have walk-off"));
        }
        if let Some(n) = self.refractive_index {
            if !(n > 0.0 && n.is_finite()) {
                return Err(Error::config(path("refractive_index"), "must be positive"));
            }
        }
        Ok(())
    }
}

/// Full physical scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Setup {
    pub pump: PumpBeam,
    pub segments: Vec<Segment>,
    /// Dimensionless parametric gain G.
    pub gain: f64,
    /// Degenerate signal wavenumber k_p/2, rad/µm.
    pub signal_wavenumber: f64,
}

impl Setup {
    pub fn new(pump: PumpBeam, segments: Vec<Segment>, gain: f64) -> Result<Self> {
        for (i, s) in segments.iter().enumerate() {
            s.validate(i)?;
        }
        if !segments.iter().any(Segment::is_nonlinear) {
            return Err(Error::NoNonlinearSegment);
        }
        if !(gain >= 0.0 && gain.is_finite()) {
            return Err(Error::config("gain", "must be a finite number >= 0"));
        }
        let signal_wavenumber = pump.k_p / 2.0;
        Ok(Self { pump, segments, gain, signal_wavenumber })
    }

    pub fn with_gain(&self, gain: f64) -> Result<Self> {
        Self::new(self.pump.clone(), self.segments.clone(), gain)
    }

    pub fn crystals(&self) -> impl Iterator<Item = &Segment> {
        self.segments.iter().filter(|s| s.is_nonlinear())
    }

    pub fn has_walkoff(&self) -> bool {
        self.segments.iter().any(|s| s.walkoff_mrad != 0.0)
    }

    pub fn is_single_crystal(&self) -> bool {
        self.segments.len() == 1 && self.segments[0].is_nonlinear()
    }

    /// Shortest nonlinear segment, µm.
    pub fn shortest_crystal_um(&self) -> f64 {
        self.crystals().map(Segment::length_um).fold(f64::INFINITY, f64::min)
    }

    /// Wavenumber used for the longitudinal mismatch inside a segment.
    pub fn segment_wavenumber(&self, segment: &Segment) -> f64 {
        match segment.refractive_index {
            Some(n) => 2.0 * PI * n / (self.pump.wavelength_nm * 1e-3),
            None => self.pump.k_p,
        }
    }

    pub fn q_to_mrad(&self, q: f64) -> f64 {
        q / self.signal_wavenumber * 1e3
    }

    pub fn mrad_to_q(&self, theta_mrad: f64) -> f64 {
        theta_mrad * 1e-3 * self.signal_wavenumber
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub n_points: usize,
    pub n_max: usize,
    pub q_max_override: Option<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { n_points: 256, n_max: 32, q_max_override: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSpec {
    /// Maximum fraction of |F|² allowed outside the retained harmonics.
    pub harmonic_loss_tolerance: f64,
    /// Maximum discarded Schmidt weight.
    pub max_truncation_loss: f64,
    /// Modes below this weight are always discarded.
    pub min_lambda: f64,
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self { harmonic_loss_tolerance: 1e-2, max_truncation_loss: 1e-13, min_lambda: 1e-16 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSpec {
    pub pixel_mrad: f64,
    /// Gauss-Legendre nodes per pixel axis; 1 is the midpoint rule.
    pub pixel_nodes: usize,
    /// Half-extent of the 1D cut; defaults to 90% of the grid support.
    pub theta_max_mrad: Option<f64>,
    /// Azimuth of the 1D cut, degrees from the principal (x) axis.
    pub cut_azimuth_deg: f64,
    pub theta0_mrad: Vec<f64>,
    pub covariance_ref_mrad: f64,
    pub map_step_mrad: f64,
    pub map_extent_mrad: Option<f64>,
}

impl Default for ObservableSpec {
    fn default() -> Self {
        Self {
            pixel_mrad: 0.04,
            pixel_nodes: 1,
            theta_max_mrad: None,
            cut_azimuth_deg: 90.0,
            theta0_mrad: Vec::new(),
            covariance_ref_mrad: 0.0,
            map_step_mrad: 0.5,
            map_extent_mrad: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSpec {
    pub g_min: f64,
    pub g_max: f64,
    pub n_steps: usize,
}

impl Default for ScanSpec {
    fn default() -> Self {
        Self { g_min: 0.01, g_max: 10.0, n_steps: 30 }
    }
}

/// Validated configuration document.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub setup: Setup,
    pub grid: GridSpec,
    pub solver: SolverSpec,
    pub observables: ObservableSpec,
    pub scan: ScanSpec,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPump {
    wavelength_nm: Option<f64>,
    fwhm_um: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    refractive_index: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSegment {
    kind: Option<SegmentKind>,
    length_mm: Option<f64>,
    walkoff_mrad: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    refractive_index: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    n_points: Option<usize>,
    n_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    q_max_override: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    harmonic_loss_tolerance: Option<f64>,
    max_truncation_loss: Option<f64>,
    min_lambda: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObservables {
    pixel_mrad: Option<f64>,
    pixel_nodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta_max_mrad: Option<f64>,
    cut_azimuth_deg: Option<f64>,
    theta0_mrad: Option<Vec<f64>>,
    covariance_ref_mrad: Option<f64>,
    map_step_mrad: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    map_extent_mrad: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScan {
    g_min: Option<f64>,
    g_max: Option<f64>,
    n_steps: Option<usize>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    gain: Option<f64>,
    pump: Option<RawPump>,
    #[serde(default, rename = "segment")]
    segments: Vec<RawSegment>,
    grid: Option<RawGrid>,
    solver: Option<RawSolver>,
    observables: Option<RawObservables>,
    scan: Option<RawScan>,
}

fn require<T>(value: Option<T>, path: &str) -> Result<T> {
    value.ok_or_else(|| Error::config(path, "missing field"))
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_raw(raw)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    fn from_raw(raw: RawConfig) -> Result<Self> {
        let gain = require(raw.gain, "gain")?;
        let pump = require(raw.pump, "pump")?;
        let pump = PumpBeam::new(
            require(pump.wavelength_nm, "pump.wavelength_nm")?,
            require(pump.fwhm_um, "pump.fwhm_um")?,
            pump.refractive_index.unwrap_or(1.0),
        )?;
        let mut segments = Vec::with_capacity(raw.segments.len());
        for (i, s) in raw.segments.into_iter().enumerate() {
            let kind = require(s.kind, &format!("segment[{i}].kind"))?;
            segments.push(Segment {
                kind,
                length_mm: require(s.length_mm, &format!("segment[{i}].length_mm"))?,
                walkoff_mrad: s.walkoff_mrad.unwrap_or(0.0),
                refractive_index: s.refractive_index,
            });
        }
        let setup = Setup::new(pump, segments, gain)?;

        let g = raw.grid.unwrap_or_default();
        let d = GridSpec::default();
        let grid = GridSpec {
            n_points: g.n_points.unwrap_or(d.n_points),
            n_max: g.n_max.unwrap_or(d.n_max),
            q_max_override: g.q_max_override,
        };
        grid.validate()?;

        let s = raw.solver.unwrap_or_default();
        let d = SolverSpec::default();
        let solver = SolverSpec {
            harmonic_loss_tolerance: s.harmonic_loss_tolerance.unwrap_or(d.harmonic_loss_tolerance),
            max_truncation_loss: s.max_truncation_loss.unwrap_or(d.max_truncation_loss),
            min_lambda: s.min_lambda.unwrap_or(d.min_lambda),
        };
        for (v, p) in [
            (solver.harmonic_loss_tolerance, "solver.harmonic_loss_tolerance"),
            (solver.max_truncation_loss, "solver.max_truncation_loss"),
            (solver.min_lambda, "solver.min_lambda"),
        ] {
            if !(v >= 0.0 && v < 1.0) {
                return Err(Error::config(p, "must lie in [0, 1)"));
            }
        }

        let o = raw.observables.unwrap_or_default();
        let d = ObservableSpec::default();
        let observables = ObservableSpec {
            pixel_mrad: o.pixel_mrad.unwrap_or(d.pixel_mrad),
            pixel_nodes: o.pixel_nodes.unwrap_or(d.pixel_nodes),
            theta_max_mrad: o.theta_max_mrad,
            cut_azimuth_deg: o.cut_azimuth_deg.unwrap_or(d.cut_azimuth_deg),
            theta0_mrad: o.theta0_mrad.unwrap_or_default(),
            covariance_ref_mrad: o.covariance_ref_mrad.unwrap_or(d.covariance_ref_mrad),
            map_step_mrad: o.map_step_mrad.unwrap_or(d.map_step_mrad),
            map_extent_mrad: o.map_extent_mrad,
        };
        if !(observables.pixel_mrad > 0.0) {
            return Err(Error::config("observables.pixel_mrad", "must be positive"));
        }
        if observables.pixel_nodes == 0 {
            return Err(Error::config("observables.pixel_nodes", "must be at least 1"));
        }
        if !(observables.map_step_mrad > 0.0) {
            return Err(Error::config("observables.map_step_mrad", "must be positive"));
        }
        if let Some(t) = observables.theta_max_mrad {
            if !(t > 0.0) {
                return Err(Error::config("observables.theta_max_mrad", "must be positive"));
            }
        }

        let sc = raw.scan.unwrap_or_default();
        let d = ScanSpec::default();
        let scan = ScanSpec {
            g_min: sc.g_min.unwrap_or(d.g_min),
            g_max: sc.g_max.unwrap_or(d.g_max),
            n_steps: sc.n_steps.unwrap_or(d.n_steps),
        };

        Ok(Self { setup, grid, solver, observables, scan })
    }

    /// Canonical TOML rendering with every default filled in.
    pub fn to_toml_string(&self) -> String {
        let s = &self.setup;
        let raw = RawConfig {
            gain: Some(s.gain),
            pump: Some(RawPump {
                wavelength_nm: Some(s.pump.wavelength_nm),
                fwhm_um: Some(s.pump.fwhm_um),
                refractive_index: Some(s.pump.refractive_index),
            }),
            segments: s
                .segments
                .iter()
                .map(|seg| RawSegment {
                    kind: Some(seg.kind),
                    length_mm: Some(seg.length_mm),
                    walkoff_mrad: Some(seg.walkoff_mrad),
                    refractive_index: seg.refractive_index,
                })
                .collect(),
            grid: Some(RawGrid {
                n_points: Some(self.grid.n_points),
                n_max: Some(self.grid.n_max),
                q_max_override: self.grid.q_max_override,
            }),
            solver: Some(RawSolver {
                harmonic_loss_tolerance: Some(self.solver.harmonic_loss_tolerance),
                max_truncation_loss: Some(self.solver.max_truncation_loss),
                min_lambda: Some(self.solver.min_lambda),
            }),
            observables: Some(RawObservables {
                pixel_mrad: Some(self.observables.pixel_mrad),
                pixel_nodes: Some(self.observables.pixel_nodes),
                theta_max_mrad: self.observables.theta_max_mrad,
                cut_azimuth_deg: Some(self.observables.cut_azimuth_deg),
                theta0_mrad: Some(self.observables.theta0_mrad.clone()),
                covariance_ref_mrad: Some(self.observables.covariance_ref_mrad),
                map_step_mrad: Some(self.observables.map_step_mrad),
                map_extent_mrad: self.observables.map_extent_mrad,
            }),
            scan: Some(RawScan {
                g_min: Some(self.scan.g_min),
                g_max: Some(self.scan.g_max),
                n_steps: Some(self.scan.n_steps),
            }),
        };
        toml::to_string(&raw).expect("config serialization")
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_points < 2 {
            return Err(Error::config("grid.n_points", "must be at least 2"));
        }
        if let Some(q) = self.q_max_override {
            if !(q > 0.0 && q.is_finite()) {
                return Err(Error::config("grid.q_max_override", "must be positive"));
            }
        }
        Ok(())
    }
}
