//! End-to-end facade: configuration → grid → kernel → Schmidt modes → observables.

use nalgebra::DMatrix;

use crate::analysis::{argmax, fwhm_at, local_maxima};
use crate::config::{Config, Setup};
use crate::error::{Error, Result};
use crate::gain::{bogolyubov, renormalized_eigenvalues, schmidt_number, GainState};
use crate::grid::{grid_for, RadialGrid};
use crate::kernel::{sample_kernel, TpaKernel};
use crate::observables::{self, AngularSpectrum, Correlators, PixelGrid, PixelModes};
use crate::schmidt::{decompose, SchmidtModes};

/// Fraction of the grid support used for default cut extents.
pub const DEFAULT_SUPPORT_FRACTION: f64 = 0.9;

#[derive(Debug, Clone)]
pub struct Simulation {
    pub config: Config,
    pub grid: RadialGrid,
    pub kernel: TpaKernel,
    pub modes: SchmidtModes,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint {
    pub gain: f64,
    pub schmidt_number: f64,
    pub fwhm_mrad: f64,
    pub total_photons: f64,
}

/// Intensity per mrad² on a (θx, θy) grid; rows follow `theta_y_mrad`.
#[derive(Debug, Clone)]
pub struct Map2d {
    pub theta_x_mrad: Vec<f64>,
    pub theta_y_mrad: Vec<f64>,
    pub intensity: DMatrix<f64>,
}

/// Shape of a spectrum with a central peak: its FWHM and the largest
/// side maximum relative to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakShape {
    pub central_fwhm_mrad: f64,
    pub side_to_central: f64,
}

impl Simulation {
    pub fn new(config: Config) -> Result<Self> {
        let grid = grid_for(&config.setup, &config.grid);
        let kernel = sample_kernel(&config.setup, &grid, config.solver.harmonic_loss_tolerance)?;
        let modes = decompose(&kernel, &config.solver)?;
        Ok(Self { config, grid, kernel, modes })
    }

    pub fn setup(&self) -> &Setup {
        &self.config.setup
    }

    pub fn signal_wavenumber(&self) -> f64 {
        self.config.setup.signal_wavenumber
    }

    /// Emission angle covered by the radial grid.
    pub fn support_mrad(&self) -> f64 {
        self.config.setup.q_to_mrad(self.grid.q_max)
    }

    pub fn theta_max_mrad(&self) -> f64 {
        self.config.observables.theta_max_mrad.unwrap_or(DEFAULT_SUPPORT_FRACTION * self.support_mrad())
    }

    pub fn cut_pixels(&self) -> PixelGrid {
        let o = &self.config.observables;
        PixelGrid::cut(self.theta_max_mrad(), o.pixel_mrad, o.cut_azimuth_deg.to_radians(), o.pixel_nodes)
    }

    pub fn gain_state(&self, gain: f64) -> GainState {
        bogolyubov(&self.modes, gain)
    }

    /// Schmidt number of the renormalized weights at `gain`.
    pub fn schmidt_number(&self, gain: f64) -> Result<f64> {
        schmidt_number(&renormalized_eigenvalues(&self.modes.lambdas(), gain))
    }

    /// Mean photon density along the configured cut, at the pixel centres.
    pub fn spectrum_cut(&self, gain: f64) -> Result<AngularSpectrum> {
        let pixels = self.cut_pixels();
        observables::mean_photon_spectrum(
            &self.modes,
            gain,
            self.signal_wavenumber(),
            &pixels.coordinate_mrad,
            pixels.azimuth_rad,
        )
    }

    pub fn pixel_modes(&self, pixels: &PixelGrid) -> Result<PixelModes> {
        PixelModes::project(&self.modes, pixels, self.signal_wavenumber())
    }

    /// Projects the Schmidt modes onto the cut pixels once, for all cut observables.
    pub fn cut_analysis(&self) -> Result<CutAnalysis> {
        let pixels = self.cut_pixels();
        let modes = self.pixel_modes(&pixels)?;
        Ok(CutAnalysis { pixels, modes, reference_mrad: self.config.observables.covariance_ref_mrad })
    }

    /// Covariance width when only the lowest mode (0,0) is kept; it does not
    /// depend on G. Falls back to the strongest mode and its partner.
    pub fn single_mode_fwhm(&self) -> Result<f64> {
        let keep = match self.modes.find(0, 0) {
            Some(i) => vec![i],
            None if self.modes.modes[0].partner == 0 => vec![0],
            None => vec![0, self.modes.modes[0].partner],
        };
        let top = self.modes.subset(&keep)?;
        let pixels = self.cut_pixels();
        let pm = PixelModes::project(&top, &pixels, self.signal_wavenumber())?;
        observables::covariance_fwhm(&pm.moments(1.0), &pixels, self.config.observables.covariance_ref_mrad)
    }

    /// K, covariance FWHM and total photon number at each gain. A zero gain
    /// has no covariance and reports a NaN width.
    pub fn gain_scan(&self, gains: &[f64]) -> Result<Vec<ScanPoint>> {
        let rows = crate::gain::gain_scan(&self.modes.lambdas(), gains)?;
        let cut = self.cut_analysis()?;
        rows.into_iter()
            .map(|row| {
                let fwhm_mrad = if row.gain > 0.0 { cut.covariance_fwhm(row.gain)? } else { f64::NAN };
                Ok(ScanPoint {
                    gain: row.gain,
                    schmidt_number: row.schmidt_number,
                    fwhm_mrad,
                    total_photons: row.total_photons,
                })
            })
            .collect()
    }

    /// Square map over ±extent with the configured step.
    pub fn map_2d(&self, gain: f64) -> Result<Map2d> {
        let o = &self.config.observables;
        let extent = o.map_extent_mrad.unwrap_or_else(|| self.theta_max_mrad() / std::f64::consts::SQRT_2);
        let half = (extent / o.map_step_mrad + 1e-9).floor() as i64;
        let axis: Vec<f64> = (-half..=half).map(|i| i as f64 * o.map_step_mrad).collect();
        let intensity = observables::spectrum_2d(&self.modes, gain, self.signal_wavenumber(), &axis, &axis)?;
        Ok(Map2d { theta_x_mrad: axis.clone(), theta_y_mrad: axis, intensity })
    }
}

/// Pixel overlaps along a cut, reusable across gains.
#[derive(Debug, Clone)]
pub struct CutAnalysis {
    pub pixels: PixelGrid,
    pub modes: PixelModes,
    pub reference_mrad: f64,
}

impl CutAnalysis {
    /// Normalized Var(N(θ) - N(θ0)) for each θ0.
    pub fn variance_difference(&self, gain: f64, theta0_mrad: &[f64]) -> Result<Vec<AngularSpectrum>> {
        let moments = self.modes.moments(gain);
        let p0: Vec<usize> = theta0_mrad.iter().map(|&t| self.pixels.index_of(t)).collect::<Result<_>>()?;
        let var: Vec<f64> = (0..self.pixels.len()).map(|p| moments.variance(p)).collect();
        Ok(p0
            .iter()
            .map(|&i0| {
                let y = (0..self.pixels.len())
                    .map(|p| if p == i0 { 0.0 } else { var[p] + var[i0] - 2.0 * moments.covariance(p, i0) })
                    .collect();
                self.curve(y).normalized()
            })
            .collect())
    }

    /// Cov(N(θ), N(θ0)) including the shot-noise term at θ = θ0.
    pub fn covariance(&self, gain: f64, theta0_mrad: f64) -> Result<AngularSpectrum> {
        let moments = self.modes.moments(gain);
        let p0 = self.pixels.index_of(theta0_mrad)?;
        Ok(self.curve((0..self.pixels.len()).map(|p| moments.covariance(p, p0)).collect()))
    }

    /// Mean photon number per pixel.
    pub fn mean(&self, gain: f64) -> AngularSpectrum {
        let moments = self.modes.moments(gain);
        self.curve((0..self.pixels.len()).map(|p| moments.mean(p)).collect())
    }

    pub fn covariance_fwhm(&self, gain: f64) -> Result<f64> {
        if !(gain > 0.0) {
            return Err(Error::InvalidArgument("covariance width needs a positive gain".into()));
        }
        observables::covariance_fwhm(&self.modes.moments(gain), &self.pixels, self.reference_mrad)
    }

    fn curve(&self, intensity: Vec<f64>) -> AngularSpectrum {
        AngularSpectrum {
            theta_mrad: self.pixels.coordinate_mrad.clone(),
            intensity,
            normalization: observables::Normalization::Raw,
        }
    }
}

/// Central-peak FWHM of a curve (peak = global maximum) and the largest other
/// local maximum outside the central half width, relative to the peak.
pub fn peak_shape(spectrum: &AngularSpectrum) -> Result<PeakShape> {
    let (x, y) = (&spectrum.theta_mrad, &spectrum.intensity);
    let peak = argmax(y);
    if !(y[peak] > 0.0) {
        return Err(Error::InvalidArgument("spectrum vanishes".into()));
    }
    let width = fwhm_at(x, y, peak)
        .ok_or_else(|| Error::InvalidArgument("central peak does not fall to half maximum inside the cut".into()))?;
    let side = local_maxima(y)
        .into_iter()
        .filter(|&i| (x[i] - x[peak]).abs() > 0.5 * width)
        .map(|i| y[i])
        .fold(0.0, f64::max);
    Ok(PeakShape { central_fwhm_mrad: width, side_to_central: side / y[peak] })
}
