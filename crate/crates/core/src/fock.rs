//! Brute-force reference in a truncated Fock basis.
//!
//! The state is a product of squeezed vacua written down from their closed-form
//! number-basis amplitudes: two-mode squeezers c_k = tanh^k r / cosh r on |k,k⟩,
//! single-mode (self-paired) squeezers on even photon numbers. Pixel operators
//! b_p = Σ_i α[p,i] a_i are applied to the sparse state directly.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::observables::{Correlators, PixelModes};

pub const MAX_MODES: usize = 4;
/// Largest accepted norm deficit of a truncated state.
pub const DEFICIT_LIMIT: f64 = 1e-8;
/// Largest accepted relative moment change when the cutoff is raised by 10.
pub const SENSITIVITY_LIMIT: f64 = 1e-7;

type Occupation = [u16; MAX_MODES];
type Ket = BTreeMap<Occupation, Complex64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Squeezer {
    /// Two modes with A → A cosh r + B† sinh r.
    TwoMode { r: f64 },
    /// One self-paired mode with A → A cosh r + A† sinh r.
    SingleMode { r: f64 },
}

impl Squeezer {
    pub fn r(&self) -> f64 {
        match *self {
            Squeezer::TwoMode { r } | Squeezer::SingleMode { r } => r,
        }
    }

    pub fn n_modes(&self) -> usize {
        match self {
            Squeezer::TwoMode { .. } => 2,
            Squeezer::SingleMode { .. } => 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TruncatedState {
    pub squeezers: Vec<Squeezer>,
    pub n_modes: usize,
    /// Maximum photon number per mode.
    pub cutoff: usize,
    pub squeeze_params: Vec<f64>,
    pub norm_deficit: f64,
    ket: Ket,
}

/// Number-basis amplitudes of a single squeezer: entries (n_a, n_b, c).
fn factor(s: Squeezer, cutoff: usize) -> Vec<(u16, u16, f64)> {
    match s {
        Squeezer::TwoMode { r } => {
            let t = r.tanh();
            let mut c = 1.0 / r.cosh();
            let mut out = Vec::with_capacity(cutoff + 1);
            for k in 0..=cutoff {
                out.push((k as u16, k as u16, c));
                c *= t;
            }
            out
        }
        Squeezer::SingleMode { r } => {
            let t = r.tanh();
            let mut c = 1.0 / r.cosh().sqrt();
            let mut out = Vec::new();
            let mut k = 0usize;
            while 2 * k <= cutoff {
                out.push((2 * k as u16, 0, c));
                c *= t * ((2 * k + 1) as f64 / (2 * k + 2) as f64).sqrt();
                k += 1;
            }
            out
        }
    }
}

impl TruncatedState {
    /// Product state of the given squeezers, truncated at `cutoff` photons per
    /// mode. The norm deficit is recorded, not checked.
    pub fn new(squeezers: &[Squeezer], cutoff: usize) -> Result<Self> {
        let n_modes: usize = squeezers.iter().map(Squeezer::n_modes).sum();
        if n_modes == 0 || n_modes > MAX_MODES {
            return Err(Error::InvalidArgument(format!("oracle supports 1..={MAX_MODES} modes, got {n_modes}")));
        }
        if squeezers.iter().any(|s| !(s.r() >= 0.0 && s.r().is_finite())) {
            return Err(Error::InvalidArgument("squeezing parameters must be finite and >= 0".into()));
        }
        if cutoff > u16::MAX as usize / 2 {
            return Err(Error::InvalidArgument("cutoff too large".into()));
        }
        let mut ket: Ket = BTreeMap::new();
        ket.insert([0; MAX_MODES], Complex64::new(1.0, 0.0));
        let mut offset = 0;
        let mut kept_norm = 1.0;
        for &s in squeezers {
            let f = factor(s, cutoff);
            kept_norm *= f.iter().map(|e| e.2 * e.2).sum::<f64>();
            let mut next = BTreeMap::new();
            for (occ, amp) in &ket {
                for &(a, b, c) in &f {
                    let mut o = *occ;
                    o[offset] = a;
                    if s.n_modes() == 2 {
                        o[offset + 1] = b;
                    }
                    next.insert(o, amp * c);
                }
            }
            ket = next;
            offset += s.n_modes();
        }
        Ok(Self {
            squeezers: squeezers.to_vec(),
            n_modes,
            cutoff,
            squeeze_params: squeezers.iter().map(Squeezer::r).collect(),
            norm_deficit: (1.0 - kept_norm).max(0.0),
            ket,
        })
    }

    /// Same as [`TruncatedState::new`] but rejects a deficit above [`DEFICIT_LIMIT`].
    pub fn checked(squeezers: &[Squeezer], cutoff: usize) -> Result<Self> {
        let s = Self::new(squeezers, cutoff)?;
        if s.norm_deficit > DEFICIT_LIMIT {
            return Err(Error::CutoffTooSmall { cutoff, deficit: s.norm_deficit, limit: DEFICIT_LIMIT });
        }
        Ok(s)
    }

    pub fn norm_sq(&self) -> f64 {
        self.ket.values().map(|a| a.norm_sqr()).sum()
    }

    /// Amplitude of an occupation pattern (missing modes are zero).
    pub fn amplitude(&self, occupation: &[u16]) -> Complex64 {
        let mut o = [0u16; MAX_MODES];
        o[..occupation.len()].copy_from_slice(occupation);
        self.ket.get(&o).copied().unwrap_or_default()
    }

    /// Probability that photon numbers of the two modes of pair `pair` differ.
    pub fn unequal_pair_probability(&self, first_mode: usize) -> f64 {
        self.ket
            .iter()
            .filter(|(o, _)| o[first_mode] != o[first_mode + 1])
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }
}

/// Two-mode squeezed vacuum of one pair.
pub fn evolve_tms(r: f64, cutoff: usize) -> Result<TruncatedState> {
    TruncatedState::checked(&[Squeezer::TwoMode { r }], cutoff)
}

fn lower(ket: &Ket, alpha: &[Complex64]) -> Ket {
    let mut out = Ket::new();
    for (occ, amp) in ket {
        for (i, &a) in alpha.iter().enumerate() {
            if a == Complex64::new(0.0, 0.0) || occ[i] == 0 {
                continue;
            }
            let mut o = *occ;
            o[i] -= 1;
            *out.entry(o).or_default() += amp * a * (occ[i] as f64).sqrt();
        }
    }
    out
}

fn raise(ket: &Ket, alpha: &[Complex64]) -> Ket {
    let mut out = Ket::new();
    for (occ, amp) in ket {
        for (i, &a) in alpha.iter().enumerate() {
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            let mut o = *occ;
            o[i] += 1;
            *out.entry(o).or_default() += amp * a.conj() * (o[i] as f64).sqrt();
        }
    }
    out
}

fn inner(a: &Ket, b: &Ket) -> Complex64 {
    a.iter().filter_map(|(o, x)| b.get(o).map(|y| x.conj() * y)).sum()
}

fn combine(a: &Ket, b: &Ket, cb: f64) -> Ket {
    let mut out = a.clone();
    for (o, y) in b {
        *out.entry(*o).or_default() += y * cb;
    }
    out
}

/// Moments of pixel operators b_p = Σ_i α[p,i] a_i.
#[derive(Debug, Clone)]
pub struct OracleMoments {
    pub mean: Vec<f64>,
    /// ⟨b†_p b_p'⟩.
    pub normal: DMatrix<Complex64>,
    /// ⟨b_p b_p'⟩.
    pub anomalous: DMatrix<Complex64>,
    /// ⟨N_p N_p'⟩.
    pub second: DMatrix<Complex64>,
    /// Var(N_p - N_p').
    pub variance_difference: DMatrix<f64>,
    pub norm_deficit: f64,
}

impl OracleMoments {
    pub fn variance(&self, p: usize) -> f64 {
        self.second[(p, p)].re - self.mean[p] * self.mean[p]
    }

    pub fn covariance(&self, p: usize, q: usize) -> f64 {
        self.second[(p, q)].re - self.mean[p] * self.mean[q]
    }

    pub fn g2(&self, p: usize, q: usize) -> Result<f64> {
        for i in [p, q] {
            if self.mean[i] <= 0.0 {
                return Err(Error::ZeroPhotonNumber { pixel: i });
            }
        }
        Ok(self.second[(p, q)].re / (self.mean[p] * self.mean[q]))
    }

    /// Every scalar moment with a name, for comparisons and reports.
    pub fn named(&self) -> Vec<(String, f64)> {
        let p = self.mean.len();
        let mut out = Vec::new();
        for i in 0..p {
            out.push((format!("N[{i}]"), self.mean[i]));
            out.push((format!("VarN[{i}]"), self.variance(i)));
            if let Ok(g) = self.g2(i, i) {
                out.push((format!("g2[{i},{i}]"), g));
            }
        }
        for i in 0..p {
            for j in 0..p {
                out.push((format!("ReC[{i},{j}]"), self.normal[(i, j)].re));
                out.push((format!("ImC[{i},{j}]"), self.normal[(i, j)].im));
                out.push((format!("ReS[{i},{j}]"), self.anomalous[(i, j)].re));
                out.push((format!("ImS[{i},{j}]"), self.anomalous[(i, j)].im));
                if i < j {
                    out.push((format!("NN[{i},{j}]"), self.second[(i, j)].re));
                    if let Ok(g) = self.g2(i, j) {
                        out.push((format!("g2[{i},{j}]"), g));
                    }
                    out.push((format!("Cov[{i},{j}]"), self.covariance(i, j)));
                    out.push((format!("VarDiff[{i},{j}]"), self.variance_difference[(i, j)]));
                }
            }
        }
        out
    }
}

impl OracleMoments {
    /// The same moment set assembled from Gaussian correlators.
    pub fn from_correlators<C: Correlators>(c: &C) -> Self {
        let p = c.n_pixels();
        let mean: Vec<f64> = (0..p).map(|i| c.mean(i)).collect();
        Self {
            normal: DMatrix::from_fn(p, p, |i, j| c.normal(i, j)),
            anomalous: DMatrix::from_fn(p, p, |i, j| c.anomalous(i, j)),
            second: DMatrix::from_fn(p, p, |i, j| Complex64::from(c.second_moment(i, j))),
            variance_difference: DMatrix::from_fn(p, p, |i, j| c.variance_difference(i, j)),
            mean,
            norm_deficit: 0.0,
        }
    }
}

pub fn oracle_moments(state: &TruncatedState, alpha: &DMatrix<Complex64>) -> Result<OracleMoments> {
    if alpha.ncols() != state.n_modes {
        return Err(Error::InvalidArgument(format!(
            "pixel specs address {} modes, state has {}",
            alpha.ncols(),
            state.n_modes
        )));
    }
    let p = alpha.nrows();
    let rows: Vec<Vec<Complex64>> = (0..p).map(|i| alpha.row(i).iter().copied().collect()).collect();
    let lowered: Vec<Ket> = rows.iter().map(|a| lower(&state.ket, a)).collect();
    let numbers: Vec<Ket> = rows.iter().zip(&lowered).map(|(a, l)| raise(l, a)).collect();
    let mean: Vec<f64> = lowered.iter().map(|l| inner(l, l).re).collect();
    let normal = DMatrix::from_fn(p, p, |i, j| inner(&lowered[i], &lowered[j]));
    let anomalous = DMatrix::from_fn(p, p, |i, j| inner(&state.ket, &lower(&lowered[j], &rows[i])));
    let second = DMatrix::from_fn(p, p, |i, j| inner(&numbers[i], &numbers[j]));
    let variance_difference = DMatrix::from_fn(p, p, |i, j| {
        if i == j {
            return 0.0;
        }
        let d = combine(&numbers[i], &numbers[j], -1.0);
        let m = mean[i] - mean[j];
        inner(&d, &d).re - m * m
    });
    Ok(OracleMoments { mean, normal, anomalous, second, variance_difference, norm_deficit: state.norm_deficit })
}

/// Moments at `cutoff`, rejected if the state is under-resolved or if any
/// moment moves by more than [`SENSITIVITY_LIMIT`] when the cutoff grows by 10.
pub fn oracle_moments_checked(squeezers: &[Squeezer], alpha: &DMatrix<Complex64>, cutoff: usize) -> Result<OracleMoments> {
    let base = oracle_moments(&TruncatedState::checked(squeezers, cutoff)?, alpha)?;
    let finer = oracle_moments(&TruncatedState::new(squeezers, cutoff + 10)?, alpha)?;
    let scale = base.named().iter().map(|(_, v)| v.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    for ((name, a), (_, b)) in base.named().into_iter().zip(finer.named()) {
        let shift = (a - b).abs() / a.abs().max(1e-12 * scale);
        if shift > SENSITIVITY_LIMIT {
            return Err(Error::TruncationSensitive { name, shift });
        }
    }
    Ok(base)
}

/// A small set of squeezers read out by fixed pixel operators.
#[derive(Debug, Clone)]
pub struct DeskCase {
    pub name: &'static str,
    pub squeezers: Vec<Squeezer>,
    /// b_p = Σ_i alpha[p,i] a_i.
    pub alpha: DMatrix<Complex64>,
}

impl DeskCase {
    /// Mode weights and partners for the Gaussian engine at unit gain (λ = r²).
    pub fn pixel_modes(&self) -> Result<PixelModes> {
        let mut lambda = Vec::new();
        let mut partner = Vec::new();
        for s in &self.squeezers {
            let k = lambda.len();
            match s {
                Squeezer::TwoMode { r } => {
                    lambda.extend([r * r, r * r]);
                    partner.extend([k + 1, k]);
                }
                Squeezer::SingleMode { r } => {
                    lambda.push(r * r);
                    partner.push(k);
                }
            }
        }
        PixelModes::from_amplitudes(self.alpha.clone(), lambda, partner)
    }
}

/// Desk cases with one or two Schmidt pairs at squeezing r.
pub fn desk_cases(r: f64) -> Vec<DeskCase> {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    vec![
        DeskCase {
            name: "one pair, aligned pixels",
            squeezers: vec![Squeezer::TwoMode { r }],
            alpha: DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]),
        },
        DeskCase {
            name: "one pair, mixed pixels",
            squeezers: vec![Squeezer::TwoMode { r }],
            alpha: DMatrix::from_row_slice(2, 2, &[c(0.8, 0.0), c(0.0, 0.6), c(0.3, -0.1), c(-0.5, 0.4)]),
        },
        DeskCase {
            name: "two pairs, aligned pixels",
            squeezers: vec![Squeezer::TwoMode { r }, Squeezer::TwoMode { r: 0.6 * r }],
            alpha: DMatrix::from_row_slice(
                2,
                4,
                &[c(0.8, 0.0), c(0.0, 0.0), c(0.6, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.8, 0.0), c(0.0, 0.0), c(0.6, 0.0)],
            ),
        },
        DeskCase {
            name: "two pairs, mixed pixels",
            squeezers: vec![Squeezer::TwoMode { r }, Squeezer::TwoMode { r: 0.6 * r }],
            alpha: DMatrix::from_row_slice(
                2,
                4,
                &[c(0.6, 0.1), c(0.2, 0.0), c(0.0, -0.5), c(0.3, 0.3), c(0.1, 0.0), c(0.5, -0.2), c(0.4, 0.0), c(-0.2, 0.5)],
            ),
        },
        DeskCase {
            name: "self-paired mode and a pair",
            squeezers: vec![Squeezer::SingleMode { r: 0.8 * r }, Squeezer::TwoMode { r }],
            alpha: DMatrix::from_row_slice(2, 3, &[c(0.5, 0.0), c(0.7, 0.2), c(0.0, 0.0), c(0.4, -0.3), c(0.0, 0.0), c(0.8, 0.0)]),
        },
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentComparison {
    pub name: String,
    pub wick: f64,
    pub oracle: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone)]
pub struct CaseReport {
    pub case: String,
    pub r: f64,
    pub norm_deficit: f64,
    pub rows: Vec<MomentComparison>,
}

impl CaseReport {
    pub fn max_rel_error(&self) -> f64 {
        self.rows.iter().map(|m| m.rel_error).fold(0.0, f64::max)
    }
}

/// Gaussian-engine moments against the truncated Fock state. Errors are
/// relative to |oracle|, except for moments below 1e-10 of the largest one,
/// which vanish and are measured against the largest moment instead.
/// With `checked`, under-resolved or cutoff-sensitive states are errors.
pub fn compare_desk_case(case: &DeskCase, cutoff: usize, checked: bool) -> Result<CaseReport> {
    let oracle = if checked {
        oracle_moments_checked(&case.squeezers, &case.alpha, cutoff)?
    } else {
        oracle_moments(&TruncatedState::new(&case.squeezers, cutoff)?, &case.alpha)?
    };
    let pm = case.pixel_modes()?;
    let wick = OracleMoments::from_correlators(&pm.moments(1.0));
    let (o, w) = (oracle.named(), wick.named());
    let scale = o.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max);
    let floor = 1e-10 * scale;
    let rows = o
        .into_iter()
        .zip(w)
        .map(|((name, ov), (_, wv))| MomentComparison {
            rel_error: match (wv - ov).abs() {
                0.0 => 0.0,
                d if ov.abs() > floor => d / ov.abs(),
                d => d / scale,
            },
            name,
            wick: wv,
            oracle: ov,
        })
        .collect();
    Ok(CaseReport {
        case: case.name.to_string(),
        r: case.squeezers[0].r(),
        norm_deficit: oracle.norm_deficit,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn aligned() -> DMatrix<Complex64> {
        DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0].map(Complex64::from))
    }

    #[test]
    fn vacuum_at_zero_squeezing() {
        let s = evolve_tms(0.0, 5).unwrap();
        assert_eq!(s.amplitude(&[0, 0]), Complex64::new(1.0, 0.0));
        assert_eq!(s.norm_deficit, 0.0);
        let m = oracle_moments(&s, &aligned()).unwrap();
        assert!(m.mean.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn tms_mean_photon_number() {
        let s = evolve_tms(1.0, 60).unwrap();
        let m = oracle_moments(&s, &aligned()).unwrap();
        let n = 1f64.sinh().powi(2);
        assert!((m.mean[0] - n).abs() < 1e-9 && (m.mean[1] - n).abs() < 1e-9);
        assert!((m.mean[0] - 1.381098).abs() < 1e-6);
        assert_eq!(s.unequal_pair_probability(0), 0.0);
        assert!(m.variance_difference[(0, 1)].abs() < 1e-10);
        assert!((m.second[(0, 1)].re - (2.0 * n * n + n)).abs() < 1e-7);
        assert!((m.g2(0, 0).unwrap() - (2.0 + 1.0 / n)).abs() < 1e-9);
    }

    #[test]
    fn single_mode_squeezer_moments() {
        let r: f64 = 0.7;
        let s = TruncatedState::checked(&[Squeezer::SingleMode { r }], 80).unwrap();
        let alpha = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        let m = oracle_moments(&s, &alpha).unwrap();
        let (sh, ch) = (r.sinh(), r.cosh());
        assert!((m.mean[0] - sh * sh).abs() < 1e-12);
        assert!((m.anomalous[(0, 0)].re - sh * ch).abs() < 1e-12);
        // Squeezed vacuum: Var N = 2 sinh² cosh².
        assert!((m.variance(0) - 2.0 * sh * sh * ch * ch).abs() < 1e-11);
    }

    #[test]
    fn under_truncation_is_rejected() {
        assert!(matches!(evolve_tms(1.5, 5), Err(Error::CutoffTooSmall { .. })));
        let e = oracle_moments_checked(&[Squeezer::TwoMode { r: 1.0 }], &aligned(), 60);
        assert!(e.is_ok());
    }

    #[test]
    fn wick_agrees_with_oracle_at_moderate_squeezing() {
        for case in desk_cases(0.7) {
            let rep = compare_desk_case(&case, 60, true).unwrap();
            let worst = rep.rows.iter().max_by(|a, b| a.rel_error.total_cmp(&b.rel_error)).unwrap();
            assert!(rep.max_rel_error() < 1e-9, "{}: {:?}", case.name, worst);
        }
    }
}
