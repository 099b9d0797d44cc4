//! Angular spectra and Gaussian photon-number statistics.
//!
//! A pixel is the flat-top mode b_p = A^{-1/2} ∫_p a(q) d²q over a square
//! angular bin of area A. Its overlap with Schmidt mode k is
//! Φ[p,k] = A^{-1/2} ∫_p ψ_k, evaluated with a Gauss-Legendre rule per bin
//! (one node per axis is the midpoint rule). With A_k → c_k A_k + s_k A†_partner(k)
//! the pixel correlators are
//!   C[p,p'] = ⟨b†_p b_p'⟩ = Σ_k conj(Φ[p,k]) Φ[p',k] s_k²
//!   S[p,p'] = ⟨b_p b_p'⟩  = Σ_k Φ[p,k] Φ[p',partner(k)] s_k c_k
//! and Wick's theorem gives Cov(N_p, N_p') = |C|² + |S|² + Re(κ[p,p'] C[p,p'])
//! with κ[p,p'] = [b_p, b†_p'], the identity for disjoint bins.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::analysis::{argmax, fwhm_at, normalize_max};
use crate::error::{Error, Result};
use crate::eval::ModeEvaluator;
use crate::grid::gauss_legendre;
use crate::schmidt::SchmidtModes;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    Raw,
    Max1,
}

impl Normalization {
    pub fn as_str(&self) -> &'static str {
        match self {
            Normalization::Raw => "raw",
            Normalization::Max1 => "max1",
        }
    }
}

/// Curve over a signed angle along a cut.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularSpectrum {
    pub theta_mrad: Vec<f64>,
    pub intensity: Vec<f64>,
    pub normalization: Normalization,
}

impl AngularSpectrum {
    pub fn normalized(mut self) -> Self {
        self.intensity = normalize_max(&self.intensity);
        self.normalization = Normalization::Max1;
        self
    }
}

/// Photon density Σ_k sinh²(G√λ_k)|ψ_k|² per mrad² of emission angle,
/// along the cut θ·(cos α, sin α).
pub fn mean_photon_spectrum(
    modes: &SchmidtModes,
    gain: f64,
    signal_wavenumber: f64,
    theta_mrad: &[f64],
    azimuth_rad: f64,
) -> Result<AngularSpectrum> {
    let scale = 1e-3 * signal_wavenumber;
    let (c, s) = (azimuth_rad.cos(), azimuth_rad.sin());
    let points: Vec<[f64; 2]> = theta_mrad.iter().map(|t| [t * scale * c, t * scale * s]).collect();
    let intensity = photon_density(modes, gain, &points)?.into_iter().map(|v| v * scale * scale).collect();
    Ok(AngularSpectrum { theta_mrad: theta_mrad.to_vec(), intensity, normalization: Normalization::Raw })
}

/// Photon density per (rad/µm)² at transverse wavevectors.
pub fn photon_density(modes: &SchmidtModes, gain: f64, points: &[[f64; 2]]) -> Result<Vec<f64>> {
    let s2: Vec<f64> = modes.modes.iter().map(|m| (gain * m.lambda.sqrt()).sinh().powi(2)).collect();
    ModeEvaluator::new(modes).density(points, &s2)
}

/// Photon density per mrad² on the (θ_x, θ_y) grid; rows follow `theta_y`,
/// columns `theta_x`.
pub fn spectrum_2d(
    modes: &SchmidtModes,
    gain: f64,
    signal_wavenumber: f64,
    theta_x_mrad: &[f64],
    theta_y_mrad: &[f64],
) -> Result<DMatrix<f64>> {
    let scale = 1e-3 * signal_wavenumber;
    let mut points = Vec::with_capacity(theta_x_mrad.len() * theta_y_mrad.len());
    for ty in theta_y_mrad {
        for tx in theta_x_mrad {
            points.push([tx * scale, ty * scale]);
        }
    }
    let d = photon_density(modes, gain, &points)?;
    Ok(DMatrix::from_fn(theta_y_mrad.len(), theta_x_mrad.len(), |r, c| {
        d[r * theta_x_mrad.len() + c] * scale * scale
    }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pixel {
    pub center_mrad: [f64; 2],
}

/// Square angular bins of a common width.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelGrid {
    pub pixels: Vec<Pixel>,
    pub width_mrad: f64,
    pub nodes_per_axis: usize,
    /// Orientation of the bin edges (and of the cut), rad from the x axis.
    pub azimuth_rad: f64,
    /// Signed position along the cut, for cut grids.
    pub coordinate_mrad: Vec<f64>,
}

impl PixelGrid {
    /// Bins centred at θ = pΔ, |θ| ≤ theta_max, along the direction at `azimuth_rad`.
    pub fn cut(theta_max_mrad: f64, width_mrad: f64, azimuth_rad: f64, nodes_per_axis: usize) -> Self {
        let half = (theta_max_mrad / width_mrad + 1e-9).floor() as i64;
        let (c, s) = (azimuth_rad.cos(), azimuth_rad.sin());
        let coordinate_mrad: Vec<f64> = (-half..=half).map(|p| p as f64 * width_mrad).collect();
        let pixels = coordinate_mrad.iter().map(|t| Pixel { center_mrad: [t * c, t * s] }).collect();
        Self { pixels, width_mrad, nodes_per_axis, azimuth_rad, coordinate_mrad }
    }

    /// Axis-aligned tiling of the square |θ_x|, |θ_y| ≤ extent.
    pub fn square(extent_mrad: f64, width_mrad: f64, nodes_per_axis: usize) -> Self {
        let half = (extent_mrad / width_mrad + 1e-9).floor() as i64;
        let mut pixels = Vec::new();
        for iy in -half..=half {
            for ix in -half..=half {
                pixels.push(Pixel { center_mrad: [ix as f64 * width_mrad, iy as f64 * width_mrad] });
            }
        }
        Self { pixels, width_mrad, nodes_per_axis, azimuth_rad: 0.0, coordinate_mrad: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    /// Cut index whose centre is θ (to within 1e-9 of a pixel).
    pub fn index_of(&self, theta_mrad: f64) -> Result<usize> {
        let tol = 1e-9 * self.width_mrad;
        self.coordinate_mrad
            .iter()
            .position(|t| (t - theta_mrad).abs() <= tol)
            .ok_or(Error::OffGrid { theta0_mrad: theta_mrad })
    }

    /// Quadrature nodes in q-space with weights; the weights of one bin sum to its area.
    fn quadrature(&self, signal_wavenumber: f64) -> (Vec<[f64; 2]>, Vec<f64>, Vec<usize>) {
        let scale = 1e-3 * signal_wavenumber;
        let (x, w) = gauss_legendre(self.nodes_per_axis);
        let h = 0.5 * self.width_mrad;
        let (c, s) = (self.azimuth_rad.cos(), self.azimuth_rad.sin());
        let mut pts = Vec::new();
        let mut wts = Vec::new();
        let mut owner = Vec::new();
        for (p, px) in self.pixels.iter().enumerate() {
            for (xa, wa) in x.iter().zip(&w) {
                for (xb, wb) in x.iter().zip(&w) {
                    let (u, v) = (xa * h, xb * h);
                    let tx = px.center_mrad[0] + u * c - v * s;
                    let ty = px.center_mrad[1] + u * s + v * c;
                    pts.push([tx * scale, ty * scale]);
                    wts.push(wa * wb * h * h * scale * scale);
                    owner.push(p);
                }
            }
        }
        (pts, wts, owner)
    }

    /// Bin area in q-space, (rad/µm)².
    pub fn area_q(&self, signal_wavenumber: f64) -> f64 {
        (self.width_mrad * 1e-3 * signal_wavenumber).powi(2)
    }
}

/// Overlaps of detection modes with Schmidt modes, independent of gain.
#[derive(Debug, Clone)]
pub struct PixelModes {
    /// Φ[p, k].
    pub amp: DMatrix<Complex64>,
    pub lambda: Vec<f64>,
    pub partner: Vec<usize>,
    /// [b_p, b†_p']; None means the identity (disjoint pixels).
    pub overlap: Option<DMatrix<Complex64>>,
}

impl PixelModes {
    pub fn project(modes: &SchmidtModes, pixels: &PixelGrid, signal_wavenumber: f64) -> Result<Self> {
        let (pts, wts, owner) = pixels.quadrature(signal_wavenumber);
        let inv_sqrt_area = 1.0 / pixels.area_q(signal_wavenumber).sqrt();
        let mut amp = DMatrix::<Complex64>::zeros(pixels.len(), modes.len());
        ModeEvaluator::new(modes).visit(&pts, |i, psi| {
            let w = wts[i] * inv_sqrt_area;
            let p = owner[i];
            for (k, v) in psi.iter().enumerate() {
                amp[(p, k)] += v * w;
            }
        })?;
        Ok(Self {
            amp,
            lambda: modes.lambdas(),
            partner: modes.modes.iter().map(|m| m.partner).collect(),
            overlap: None,
        })
    }

    /// Detection modes given directly as b_p = Σ_k amp[p,k] A_k.
    pub fn from_amplitudes(amp: DMatrix<Complex64>, lambda: Vec<f64>, partner: Vec<usize>) -> Result<Self> {
        if amp.ncols() != lambda.len() || partner.len() != lambda.len() {
            return Err(Error::InvalidArgument("amplitude columns, weights and partners differ in length".into()));
        }
        if partner.iter().enumerate().any(|(k, &p)| p >= partner.len() || partner[p] != k) {
            return Err(Error::InvalidArgument("partner map is not an involution".into()));
        }
        let overlap = Some(&amp * amp.adjoint());
        Ok(Self { amp, lambda, partner, overlap })
    }

    pub fn n_pixels(&self) -> usize {
        self.amp.nrows()
    }

    pub fn moments(&self, gain: f64) -> GaussianMoments<'_> {
        GaussianMoments::new(self, gain)
    }
}

/// Access to first and second moments of pixel photon numbers.
pub trait Correlators {
    fn n_pixels(&self) -> usize;
    fn mean(&self, p: usize) -> f64;
    /// C[p,p'] = ⟨b†_p b_p'⟩.
    fn normal(&self, p: usize, q: usize) -> Complex64;
    /// S[p,p'] = ⟨b_p b_p'⟩.
    fn anomalous(&self, p: usize, q: usize) -> Complex64;
    /// [b_p, b†_p'].
    fn overlap(&self, p: usize, q: usize) -> Complex64;

    /// |C|² + |S|², the covariance without the commutator term.
    fn excess_covariance(&self, p: usize, q: usize) -> f64 {
        self.normal(p, q).norm_sqr() + self.anomalous(p, q).norm_sqr()
    }

    /// Cov(N_p, N_p'); equals Var N_p for p = p'.
    fn covariance(&self, p: usize, q: usize) -> f64 {
        let c = self.normal(p, q);
        c.norm_sqr() + self.anomalous(p, q).norm_sqr() + (self.overlap(p, q) * c).re
    }

    fn variance(&self, p: usize) -> f64 {
        self.covariance(p, p)
    }

    /// ⟨N_p N_p'⟩.
    fn second_moment(&self, p: usize, q: usize) -> f64 {
        self.mean(p) * self.mean(q) + self.covariance(p, q)
    }

    /// ⟨N_p N_p'⟩ / (⟨N_p⟩⟨N_p'⟩); the auto case includes the shot-noise term.
    fn g2(&self, p: usize, q: usize) -> Result<f64> {
        let (a, b) = (self.mean(p), self.mean(q));
        if a <= 0.0 {
            return Err(Error::ZeroPhotonNumber { pixel: p });
        }
        if b <= 0.0 {
            return Err(Error::ZeroPhotonNumber { pixel: q });
        }
        Ok(1.0 + self.covariance(p, q) / (a * b))
    }

    /// Var(N_p - N_p').
    fn variance_difference(&self, p: usize, q: usize) -> f64 {
        if p == q {
            return 0.0;
        }
        self.variance(p) + self.variance(q) - 2.0 * self.covariance(p, q)
    }
}

/// Moments evaluated on demand from the pixel overlaps at a fixed gain.
pub struct GaussianMoments<'a> {
    modes: &'a PixelModes,
    s2: Vec<f64>,
    sc: Vec<f64>,
}

impl<'a> GaussianMoments<'a> {
    pub fn new(modes: &'a PixelModes, gain: f64) -> Self {
        let (s2, sc) = modes
            .lambda
            .iter()
            .map(|l| {
                let r = gain * l.sqrt();
                let s = r.sinh();
                (s * s, s * r.cosh())
            })
            .unzip();
        Self { modes, s2, sc }
    }

    /// Stores all correlators; cost grows as pixels² × modes.
    pub fn tables(&self) -> MomentTables {
        let p = self.n_pixels();
        let n = (0..p).map(|i| self.mean(i)).collect();
        let c = DMatrix::from_fn(p, p, |i, j| self.normal(i, j));
        let s = DMatrix::from_fn(p, p, |i, j| self.anomalous(i, j));
        MomentTables { n, c, s, overlap: self.modes.overlap.clone() }
    }

    /// |C[p,p0]|² + |S[p,p0]|² for every p.
    pub fn excess_covariance_row(&self, p0: usize) -> Vec<f64> {
        (0..self.n_pixels()).map(|p| self.excess_covariance(p, p0)).collect()
    }
}

impl Correlators for GaussianMoments<'_> {
    fn n_pixels(&self) -> usize {
        self.modes.amp.nrows()
    }

    fn mean(&self, p: usize) -> f64 {
        let a = &self.modes.amp;
        (0..a.ncols()).map(|k| a[(p, k)].norm_sqr() * self.s2[k]).sum()
    }

    fn normal(&self, p: usize, q: usize) -> Complex64 {
        let a = &self.modes.amp;
        (0..a.ncols()).map(|k| a[(p, k)].conj() * a[(q, k)] * self.s2[k]).sum()
    }

    fn anomalous(&self, p: usize, q: usize) -> Complex64 {
        let a = &self.modes.amp;
        let partner = &self.modes.partner;
        (0..a.ncols()).map(|k| a[(p, k)] * a[(q, partner[k])] * self.sc[k]).sum()
    }

    fn overlap(&self, p: usize, q: usize) -> Complex64 {
        match &self.modes.overlap {
            Some(o) => o[(p, q)],
            None => Complex64::new(if p == q { 1.0 } else { 0.0 }, 0.0),
        }
    }
}

/// Stored pixel moments.
#[derive(Debug, Clone)]
pub struct MomentTables {
    pub n: Vec<f64>,
    pub c: DMatrix<Complex64>,
    pub s: DMatrix<Complex64>,
    pub overlap: Option<DMatrix<Complex64>>,
}

impl Correlators for MomentTables {
    fn n_pixels(&self) -> usize {
        self.n.len()
    }
    fn mean(&self, p: usize) -> f64 {
        self.n[p]
    }
    fn normal(&self, p: usize, q: usize) -> Complex64 {
        self.c[(p, q)]
    }
    fn anomalous(&self, p: usize, q: usize) -> Complex64 {
        self.s[(p, q)]
    }
    fn overlap(&self, p: usize, q: usize) -> Complex64 {
        match &self.overlap {
            Some(o) => o[(p, q)],
            None => Complex64::new(if p == q { 1.0 } else { 0.0 }, 0.0),
        }
    }
}

/// All pixel correlators of a pixel grid at gain G.
pub fn correlators(modes: &SchmidtModes, gain: f64, pixels: &PixelGrid, signal_wavenumber: f64) -> Result<MomentTables> {
    Ok(PixelModes::project(modes, pixels, signal_wavenumber)?.moments(gain).tables())
}

/// Var(N(θ) - N(θ0)) along a cut, normalized to its maximum.
pub fn variance_difference<C: Correlators>(corr: &C, pixels: &PixelGrid, theta0_mrad: f64) -> Result<AngularSpectrum> {
    let p0 = pixels.index_of(theta0_mrad)?;
    let y: Vec<f64> = (0..corr.n_pixels()).map(|p| corr.variance_difference(p, p0)).collect();
    Ok(AngularSpectrum { theta_mrad: pixels.coordinate_mrad.clone(), intensity: y, normalization: Normalization::Raw }
        .normalized())
}

/// Excess covariance |C|² + |S|² between every pixel of a cut and the pixel at θ_ref.
pub fn covariance_row(moments: &GaussianMoments<'_>, pixels: &PixelGrid, theta_ref_mrad: f64) -> Result<AngularSpectrum> {
    let p0 = pixels.index_of(theta_ref_mrad)?;
    Ok(AngularSpectrum {
        theta_mrad: pixels.coordinate_mrad.clone(),
        intensity: moments.excess_covariance_row(p0),
        normalization: Normalization::Raw,
    })
}

/// FWHM (mrad) of the covariance row around its peak.
pub fn covariance_fwhm(moments: &GaussianMoments<'_>, pixels: &PixelGrid, theta_ref_mrad: f64) -> Result<f64> {
    let row = covariance_row(moments, pixels, theta_ref_mrad)?;
    let peak = argmax(&row.intensity);
    if row.intensity[peak] <= 0.0 {
        return Err(Error::InvalidArgument("covariance vanishes; gain must be positive".into()));
    }
    let width = fwhm_at(&row.theta_mrad, &row.intensity, peak).ok_or_else(|| {
        Error::InvalidArgument("covariance does not fall to half maximum inside the cut".into())
    })?;
    if width < 2.0 * pixels.width_mrad {
        return Err(Error::Resolution { width_mrad: width, pixel_mrad: pixels.width_mrad });
    }
    Ok(width)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(r: f64) -> PixelModes {
        // One two-mode squeezer (modes 0 and 1) read out by mode-aligned pixels.
        let amp = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0].map(Complex64::from));
        PixelModes::from_amplitudes(amp, vec![r * r, r * r], vec![1, 0]).unwrap()
    }

    #[test]
    fn vacuum_has_no_moments() {
        let pm = pair(1.0);
        let t = pm.moments(0.0).tables();
        assert!(t.n.iter().all(|&v| v == 0.0));
        assert!(t.c.iter().all(|v| v.norm() == 0.0) && t.s.iter().all(|v| v.norm() == 0.0));
        assert_eq!(t.covariance(0, 1), 0.0);
    }

    #[test]
    fn twin_beam_difference_is_noiseless() {
        let pm = pair(1.0);
        let m = pm.moments(1.0);
        assert!(m.variance_difference(0, 1).abs() < 1e-12);
        let n = 1f64.sinh().powi(2);
        assert!((m.mean(0) - n).abs() < 1e-14);
        assert!((m.g2(0, 1).unwrap() - (2.0 + 1.0 / n)).abs() < 1e-12);
        assert!((m.g2(0, 0).unwrap() - (2.0 + 1.0 / n)).abs() < 1e-12);
        assert!((m.second_moment(0, 1) - (2.0 * n * n + n)).abs() < 1e-12);
    }

    #[test]
    fn zero_mean_g2_is_an_error() {
        let pm = pair(1.0);
        assert!(matches!(pm.moments(0.0).g2(0, 1), Err(Error::ZeroPhotonNumber { pixel: 0 })));
    }

    #[test]
    fn cut_grid_indexing() {
        let g = PixelGrid::cut(1.0, 0.04, std::f64::consts::FRAC_PI_2, 1);
        assert_eq!(g.len(), 51);
        assert_eq!(g.index_of(0.0).unwrap(), 25);
        assert_eq!(g.index_of(-1.0).unwrap(), 0);
        assert!(matches!(g.index_of(0.03), Err(Error::OffGrid { .. })));
        assert!(g.pixels[50].center_mrad[0].abs() < 1e-15);
        assert!((g.pixels[50].center_mrad[1] - 1.0).abs() < 1e-15);
    }
}
