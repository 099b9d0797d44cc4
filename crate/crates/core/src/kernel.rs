//! Two-photon amplitude and its azimuthal harmonics on the radial grid.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::config::Setup;
use crate::error::{Error, Result};
use crate::grid::RadialGrid;

/// sin(x)/x with the removable singularity handled by its series.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Gaussian pump envelope exp(-σ²Q²/2).
pub fn pump_envelope(q: f64, sigma: f64) -> f64 {
    (-0.5 * sigma * sigma * q * q).exp()
}

/// Unnormalized single-crystal amplitude. The prefactor is the crystal length
/// so that it coincides with the multi-segment amplitude for one crystal.
pub fn tpa_single_crystal(q_s: [f64; 2], q_i: [f64; 2], setup: &Setup) -> Result<Complex64> {
    if !setup.is_single_crystal() || setup.has_walkoff() {
        return Err(Error::NotSingleCrystal);
    }
    let l = setup.segments[0].length_um();
    let k = setup.segment_wavenumber(&setup.segments[0]);
    let (sx, sy) = (q_s[0] + q_i[0], q_s[1] + q_i[1]);
    let (dx, dy) = (q_s[0] - q_i[0], q_s[1] - q_i[1]);
    let x = l * (dx * dx + dy * dy) / (4.0 * k);
    let env = pump_envelope((sx * sx + sy * sy).sqrt(), setup.pump.sigma_um);
    Ok(Complex64::from_polar(l * env * sinc(x), x))
}

/// Unnormalized amplitude of an arbitrary crystal/gap stack.
pub fn tpa_multi_segment(q_s: [f64; 2], q_i: [f64; 2], setup: &Setup) -> Complex64 {
    SegmentStack::new(setup).amplitude(q_s, q_i)
}

#[derive(Debug, Clone, Copy)]
struct Layer {
    length: f64,
    walkoff: f64,
    inv_2k: f64,
    crystal: bool,
}

/// Precomputed segment parameters for repeated amplitude evaluation.
#[derive(Debug, Clone)]
pub struct SegmentStack {
    sigma: f64,
    layers: Vec<Layer>,
}

impl SegmentStack {
    pub fn new(setup: &Setup) -> Self {
        let layers = setup
            .segments
            .iter()
            .map(|s| Layer {
                length: s.length_um(),
                walkoff: s.walkoff_rad(),
                inv_2k: 0.5 / setup.segment_wavenumber(s),
                crystal: s.is_nonlinear(),
            })
            .collect();
        Self { sigma: setup.pump.sigma_um, layers }
    }

    pub fn amplitude(&self, q_s: [f64; 2], q_i: [f64; 2]) -> Complex64 {
        let (sx, sy) = (q_s[0] + q_i[0], q_s[1] + q_i[1]);
        let (dx, dy) = (q_s[0] - q_i[0], q_s[1] - q_i[1]);
        let d2 = dx * dx + dy * dy;
        let env = pump_envelope((sx * sx + sy * sy).sqrt(), self.sigma);
        let mut phase = 0.0;
        let mut acc = Complex64::new(0.0, 0.0);
        for l in &self.layers {
            let x = (d2 * l.inv_2k + l.walkoff * sx) * l.length;
            if l.crystal {
                acc += Complex64::from_polar(l.length * sinc(0.5 * x), phase + 0.5 * x);
            }
            phase += x;
        }
        acc * env
    }
}

/// How the kernel's angular dependence is represented.
#[derive(Debug, Clone)]
pub enum KernelData {
    /// Pure (φ_s - φ_i) dependence: one weighted matrix per harmonic,
    /// `M_n[j,k] = 2π·sqrt(w_j q_j)·χ_n(q_j,q_k)·sqrt(w_k q_k)`, n = -n_max..=n_max.
    Harmonic(Vec<DMatrix<Complex64>>),
    /// Separate dependence on both angles: one weighted matrix over (node, harmonic)
    /// pairs, `M[(j,n),(k,n')] = sqrt(w_j q_j)·X_{nn'}(q_j,q_k)·sqrt(w_k q_k)`.
    Joint(DMatrix<Complex64>),
}

/// Sampled, normalized two-photon amplitude.
#[derive(Debug, Clone)]
pub struct TpaKernel {
    pub grid: RadialGrid,
    pub data: KernelData,
    /// Factor applied to the unnormalized amplitude.
    pub norm_constant: f64,
    /// Fraction of ∬|F|² carried by harmonics outside the retained range.
    pub harmonic_loss: f64,
}

impl TpaKernel {
    pub fn n_max(&self) -> usize {
        self.grid.n_max
    }

    pub fn is_joint(&self) -> bool {
        matches!(self.data, KernelData::Joint(_))
    }

    /// Weighted matrix of harmonic n (harmonic kernels only).
    pub fn harmonic(&self, n: i32) -> Option<&DMatrix<Complex64>> {
        match &self.data {
            KernelData::Harmonic(m) if n.unsigned_abs() as usize <= self.grid.n_max => {
                Some(&m[(n + self.grid.n_max as i32) as usize])
            }
            _ => None,
        }
    }

    /// χ_n(q_j, q_k) of the normalized kernel.
    pub fn chi(&self, n: i32, j: usize, k: usize) -> Option<Complex64> {
        let m = self.harmonic(n)?;
        let g = &self.grid;
        let sw = (g.weights[j] * g.nodes[j] * g.weights[k] * g.nodes[k]).sqrt();
        Some(m[(j, k)] / (2.0 * PI * sw))
    }

    /// Row/column index of (node j, harmonic n) in the joint matrix.
    pub fn joint_index(&self, j: usize, n: i32) -> usize {
        joint_index(&self.grid, j, n)
    }

    /// Σ‖M‖²_F, equal to ∬|F|² over the retained harmonics.
    pub fn norm_sq(&self) -> f64 {
        match &self.data {
            KernelData::Harmonic(ms) => ms.iter().map(|m| m.norm_squared()).sum(),
            KernelData::Joint(m) => m.norm_squared(),
        }
    }

    /// Relative L² distance ‖self - other‖/‖other‖ over the weighted matrices.
    pub fn relative_error(&self, other: &TpaKernel) -> f64 {
        let diff: f64 = match (&self.data, &other.data) {
            (KernelData::Harmonic(a), KernelData::Harmonic(b)) => {
                a.iter().zip(b).map(|(x, y)| (x - y).norm_squared()).sum()
            }
            (KernelData::Joint(a), KernelData::Joint(b)) => (a - b).norm_squared(),
            _ => return f64::INFINITY,
        };
        (diff / other.norm_sq()).sqrt()
    }
}

pub(crate) fn joint_index(grid: &RadialGrid, j: usize, n: i32) -> usize {
    (n + grid.n_max as i32) as usize * grid.n_points + j
}

/// Raw harmonic decomposition of an amplitude depending on φ_s - φ_i only.
#[derive(Debug, Clone)]
pub struct RawHarmonics {
    /// χ_n(q_j, q_k) for n = -n_max..=n_max.
    pub chi: Vec<DMatrix<Complex64>>,
    /// ∬|F|² over all sampled harmonics.
    pub total_power: f64,
    /// ∬|F|² over the retained harmonics.
    pub retained_power: f64,
}

/// Angular samples used for the discrete Fourier transform.
pub fn angular_samples(n_max: usize) -> usize {
    (4 * n_max).max(4)
}

/// Harmonics χ_n of `f(q_s, q_i)` assuming it depends on the azimuths only
/// through φ_s - φ_i. Samples with φ_s = 0, φ_i = 2πa/N_a.
pub fn sample_harmonics<F>(grid: &RadialGrid, f: F) -> RawHarmonics
where
    F: Fn([f64; 2], [f64; 2]) -> Complex64,
{
    let n = grid.n_points;
    let n_max = grid.n_max as i32;
    let na = angular_samples(grid.n_max);
    let fft = FftPlanner::new().plan_fft_inverse(na);
    let (cos, sin) = trig_table(na);
    let mut chi = vec![DMatrix::<Complex64>::zeros(n, n); grid.n_harmonics()];
    let mut buf = vec![Complex64::new(0.0, 0.0); na];
    let mut total = 0.0;
    let mut retained = 0.0;
    for j in 0..n {
        let qs = [grid.nodes[j], 0.0];
        for k in 0..n {
            let qk = grid.nodes[k];
            for a in 0..na {
                buf[a] = f(qs, [qk * cos[a], qk * sin[a]]);
            }
            fft.process(&mut buf);
            let scale = 1.0 / na as f64;
            let weight = (2.0 * PI).powi(2) * grid.weights[j] * qs[0] * grid.weights[k] * qk;
            let mut all = 0.0;
            let mut kept = 0.0;
            for (bin, v) in buf.iter().enumerate() {
                let p = (v * scale).norm_sqr();
                all += p;
                let h = if bin <= na / 2 { bin as i32 } else { bin as i32 - na as i32 };
                if h.abs() <= n_max {
                    kept += p;
                }
            }
            for h in -n_max..=n_max {
                let bin = h.rem_euclid(na as i32) as usize;
                chi[(h + n_max) as usize][(j, k)] = buf[bin] * scale;
            }
            total += weight * all;
            retained += weight * kept;
        }
    }
    RawHarmonics { chi, total_power: total, retained_power: retained }
}

/// Raw joint harmonics X_{nn'}(q_j,q_k) of an arbitrary amplitude, already
/// weighted into the Nyström matrix layout of [`KernelData::Joint`].
pub struct RawJoint {
    pub matrix: DMatrix<Complex64>,
    pub total_power: f64,
    pub retained_power: f64,
}

/// Samples `f` on the full (φ_s, φ_i) torus. When `exchange_symmetric` is set,
/// f(q_s,q_i) = f(q_i,q_s) is assumed and only half of the radial pairs are sampled.
pub fn sample_joint<F>(grid: &RadialGrid, exchange_symmetric: bool, f: F) -> RawJoint
where
    F: Fn([f64; 2], [f64; 2]) -> Complex64,
{
    let n = grid.n_points;
    let n_max = grid.n_max as i32;
    let na = angular_samples(grid.n_max);
    let fft = FftPlanner::new().plan_fft_forward(na);
    let (cos, sin) = trig_table(na);
    let dim = n * grid.n_harmonics();
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    let mut buf = vec![Complex64::new(0.0, 0.0); na * na];
    let mut tr = vec![Complex64::new(0.0, 0.0); na * na];
    let scale = 2.0 * PI / (na * na) as f64;
    let sw: Vec<f64> = grid.nodes.iter().zip(&grid.weights).map(|(q, w)| (q * w).sqrt()).collect();
    let mut total = 0.0;
    let mut retained = 0.0;
    for j in 0..n {
        let k_start = if exchange_symmetric { j } else { 0 };
        for k in k_start..n {
            let (qj, qk) = (grid.nodes[j], grid.nodes[k]);
            for a in 0..na {
                let qs = [qj * cos[a], qj * sin[a]];
                for b in 0..na {
                    buf[a * na + b] = f(qs, [qk * cos[b], qk * sin[b]]);
                }
            }
            fft.process(&mut buf);
            for a in 0..na {
                for b in 0..na {
                    tr[b * na + a] = buf[a * na + b];
                }
            }
            fft.process(&mut tr);
            // tr[n' * na + n] now holds the transform at (n, n').
            let w = sw[j] * sw[j] * sw[k] * sw[k];
            let mult = if exchange_symmetric && j != k { 2.0 } else { 1.0 };
            let mut all = 0.0;
            let mut kept = 0.0;
            for b in 0..na {
                let hb = wrap(b, na);
                for a in 0..na {
                    let ha = wrap(a, na);
                    let p = (tr[b * na + a] * scale).norm_sqr();
                    all += p;
                    if ha.abs() <= n_max && hb.abs() <= n_max {
                        kept += p;
                    }
                }
            }
            total += mult * w * all;
            retained += mult * w * kept;
            let s = sw[j] * sw[k] * scale;
            for h in -n_max..=n_max {
                let a = h.rem_euclid(na as i32) as usize;
                for h2 in -n_max..=n_max {
                    let b = h2.rem_euclid(na as i32) as usize;
                    let v = tr[b * na + a] * s;
                    m[(joint_index(grid, j, h), joint_index(grid, k, h2))] = v;
                    if exchange_symmetric {
                        m[(joint_index(grid, k, h2), joint_index(grid, j, h))] = v;
                    }
                }
            }
        }
    }
    RawJoint { matrix: m, total_power: total, retained_power: retained }
}

fn wrap(bin: usize, na: usize) -> i32 {
    if bin <= na / 2 {
        bin as i32
    } else {
        bin as i32 - na as i32
    }
}

fn trig_table(na: usize) -> (Vec<f64>, Vec<f64>) {
    (0..na)
        .map(|a| {
            let phi = 2.0 * PI * a as f64 / na as f64;
            (phi.cos(), phi.sin())
        })
        .unzip()
}

fn check_loss(total: f64, retained: f64, tolerance: f64) -> Result<f64> {
    let loss = if total > 0.0 { (1.0 - retained / total).max(0.0) } else { 0.0 };
    if loss > tolerance {
        return Err(Error::HarmonicTruncation { loss, tolerance });
    }
    if retained <= 0.0 {
        return Err(Error::InvalidArgument("kernel vanishes on the grid".into()));
    }
    Ok(loss)
}

impl RawHarmonics {
    /// Weights, normalizes to unit retained power and checks the truncation loss.
    pub fn into_kernel(self, grid: &RadialGrid, tolerance: f64) -> Result<TpaKernel> {
        let loss = check_loss(self.total_power, self.retained_power, tolerance)?;
        let c = 1.0 / self.retained_power.sqrt();
        let sw: Vec<f64> = grid.nodes.iter().zip(&grid.weights).map(|(q, w)| (q * w).sqrt()).collect();
        let mats = self
            .chi
            .into_iter()
            .map(|chi| {
                DMatrix::from_fn(chi.nrows(), chi.ncols(), |j, k| chi[(j, k)] * (2.0 * PI * sw[j] * sw[k] * c))
            })
            .collect();
        Ok(TpaKernel { grid: grid.clone(), data: KernelData::Harmonic(mats), norm_constant: c, harmonic_loss: loss })
    }
}

impl RawJoint {
    pub fn into_kernel(self, grid: &RadialGrid, tolerance: f64) -> Result<TpaKernel> {
        let loss = check_loss(self.total_power, self.retained_power, tolerance)?;
        let c = 1.0 / self.retained_power.sqrt();
        Ok(TpaKernel { grid: grid.clone(), data: KernelData::Joint(self.matrix * Complex64::from(c)), norm_constant: c, harmonic_loss: loss })
    }
}

/// Samples and normalizes the setup's amplitude. Walk-off setups use the joint
/// two-angle expansion; otherwise the per-harmonic form.
pub fn sample_kernel(setup: &Setup, grid: &RadialGrid, loss_tolerance: f64) -> Result<TpaKernel> {
    let stack = SegmentStack::new(setup);
    if setup.has_walkoff() {
        sample_joint(grid, true, |qs, qi| stack.amplitude(qs, qi)).into_kernel(grid, loss_tolerance)
    } else {
        sample_harmonics(grid, |qs, qi| stack.amplitude(qs, qi)).into_kernel(grid, loss_tolerance)
    }
}
