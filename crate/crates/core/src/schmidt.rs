//! Schmidt decomposition of the sampled amplitude.
//!
//! A mode is stored through its radial components u_c(q_j) on the grid nodes,
//! one per azimuthal harmonic it contains, so that the mode function is
//! ψ(q, φ) = Σ_c u_c(q)/√q · e^{i n_c φ}/√(2π) and Σ_c Σ_j w_j |u_c(q_j)|² = 1.
//! Without walk-off each mode has a single harmonic n and is paired with its
//! (m, -n) twin; the joint decomposition yields self-paired modes of definite
//! mirror parity under φ → -φ.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::config::SolverSpec;
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::kernel::{joint_index, KernelData, TpaKernel};
use crate::takagi::{asymmetry, takagi};

/// Relative asymmetry above which a harmonic matrix is rejected.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone)]
pub struct SchmidtMode {
    /// Radial index, counted within modes sharing `n` (and `parity`).
    pub m: usize,
    /// Azimuthal index; for joint modes the dominant |harmonic|.
    pub n: i32,
    pub lambda: f64,
    /// Index of the mode this one is squeezed together with.
    pub partner: usize,
    pub parity: Option<Parity>,
    pub components: Vec<(i32, Vec<Complex64>)>,
}

impl SchmidtMode {
    pub fn component(&self, n: i32) -> Option<&[Complex64]> {
        self.components.iter().find(|(h, _)| *h == n).map(|(_, u)| u.as_slice())
    }
}

#[derive(Debug, Clone)]
pub struct SchmidtModes {
    pub grid: RadialGrid,
    pub modes: Vec<SchmidtMode>,
    pub truncation_loss: f64,
    pub harmonic_loss: f64,
    pub joint: bool,
}

/// Radial profile with its display phase removed.
#[derive(Debug, Clone)]
pub struct ModeProfile {
    pub m: usize,
    pub n: i32,
    pub lambda: f64,
    /// Samples on the grid nodes; the largest-magnitude sample is real positive.
    pub u: Vec<Complex64>,
    /// Unit phase such that the stored Takagi vector equals `phase * u`.
    pub phase: Complex64,
}

struct Candidate {
    lambda: f64,
    n: i32,
    m: usize,
    parity: Option<Parity>,
    components: Vec<(i32, Vec<Complex64>)>,
}

/// Per-harmonic decomposition for kernels without walk-off.
pub fn radial_schmidt(kernel: &TpaKernel, spec: &SolverSpec) -> Result<SchmidtModes> {
    let KernelData::Harmonic(_) = &kernel.data else {
        return joint_schmidt(kernel, spec);
    };
    let grid = &kernel.grid;
    let inv_sw: Vec<f64> = grid.weights.iter().map(|w| 1.0 / w.sqrt()).collect();
    let mut total = 0.0;
    let mut units: Vec<Candidate> = Vec::new();
    // Symmetry is judged against the largest entry of the whole kernel so
    // that harmonics which vanish up to roundoff are not rejected.
    let max_entry = |m: &DMatrix<Complex64>| m.iter().fold(0.0f64, |a, v| a.max(v.norm()));
    let scale = (-(grid.n_max as i32)..=grid.n_max as i32)
        .map(|n| max_entry(kernel.harmonic(n).expect("harmonic in range")))
        .fold(0.0f64, f64::max);
    for n in 0..=grid.n_max as i32 {
        let m = kernel.harmonic(n).expect("harmonic in range");
        if scale > 0.0 {
            let a = asymmetry(m) * max_entry(m) / scale;
            if a > SYMMETRY_TOLERANCE {
                return Err(Error::Asymmetric { n, asymmetry: a });
            }
        }
        if n > 0 && scale > 0.0 {
            let mirror = kernel.harmonic(-n).expect("harmonic in range");
            let d = max_entry(&(m - mirror)) / scale;
            if d > SYMMETRY_TOLERANCE {
                return Err(Error::Asymmetric { n: -n, asymmetry: d });
            }
        }
        let t = takagi(m)?;
        for (col, &s) in t.values.iter().enumerate() {
            let lambda = s * s;
            total += if n == 0 { lambda } else { 2.0 * lambda };
            let u: Vec<Complex64> = (0..grid.n_points).map(|j| t.vectors[(j, col)] * inv_sw[j]).collect();
            units.push(Candidate { lambda, n, m: col, parity: None, components: vec![(n, u)] });
        }
    }
    let kept = truncate(units, total, spec, |c| if c.n == 0 { 1.0 } else { 2.0 });
    let mut modes = Vec::new();
    let mut kept_sum = 0.0;
    for c in kept {
        let u = c.components.into_iter().next().unwrap().1;
        if c.n == 0 {
            kept_sum += c.lambda;
            modes.push(SchmidtMode { m: c.m, n: 0, lambda: c.lambda, partner: 0, parity: None, components: vec![(0, u)] });
        } else {
            kept_sum += 2.0 * c.lambda;
            modes.push(SchmidtMode { m: c.m, n: c.n, lambda: c.lambda, partner: 0, parity: None, components: vec![(c.n, u.clone())] });
            modes.push(SchmidtMode { m: c.m, n: -c.n, lambda: c.lambda, partner: 0, parity: None, components: vec![(-c.n, u)] });
        }
    }
    sort_modes(&mut modes);
    let index: std::collections::HashMap<(usize, i32), usize> =
        modes.iter().enumerate().map(|(i, md)| ((md.m, md.n), i)).collect();
    for md in modes.iter_mut() {
        md.partner = index[&(md.m, -md.n)];
    }
    Ok(SchmidtModes {
        grid: grid.clone(),
        modes,
        truncation_loss: (total - kept_sum).max(0.0),
        harmonic_loss: kernel.harmonic_loss,
        joint: false,
    })
}

/// Joint decomposition over (node, harmonic) pairs, split by mirror parity.
pub fn joint_schmidt(kernel: &TpaKernel, spec: &SolverSpec) -> Result<SchmidtModes> {
    let grid = &kernel.grid;
    let full = match &kernel.data {
        KernelData::Joint(m) => m,
        KernelData::Harmonic(_) => {
            return Err(Error::InvalidArgument("joint decomposition needs a joint kernel".into()))
        }
    };
    let a = asymmetry(full);
    if a > SYMMETRY_TOLERANCE {
        return Err(Error::Asymmetric { n: 0, asymmetry: a });
    }
    let np = grid.n_points;
    let n_max = grid.n_max as i32;
    let inv_sw: Vec<f64> = grid.weights.iter().map(|w| 1.0 / w.sqrt()).collect();
    let mut total = 0.0;
    let mut units = Vec::new();
    for parity in [Parity::Even, Parity::Odd] {
        let first = if parity == Parity::Even { 0 } else { 1 };
        let harmonics: Vec<i32> = (first..=n_max).collect();
        let basis = |a: i32| -> Vec<(i32, f64)> {
            match (a, parity) {
                (0, _) => vec![(0, 1.0)],
                (_, Parity::Even) => vec![(a, FRAC_1_SQRT_2), (-a, FRAC_1_SQRT_2)],
                (_, Parity::Odd) => vec![(a, FRAC_1_SQRT_2), (-a, -FRAC_1_SQRT_2)],
            }
        };
        let dim = np * harmonics.len();
        let mut sector = DMatrix::<Complex64>::zeros(dim, dim);
        for (ia, &ha) in harmonics.iter().enumerate() {
            let ba = basis(ha);
            for (ib, &hb) in harmonics.iter().enumerate() {
                let bb = basis(hb);
                for j in 0..np {
                    for k in 0..np {
                        let mut v = Complex64::new(0.0, 0.0);
                        for &(na, ca) in &ba {
                            for &(nb, cb) in &bb {
                                v += full[(joint_index(grid, j, na), joint_index(grid, k, nb))] * (ca * cb);
                            }
                        }
                        sector[(ia * np + j, ib * np + k)] = v;
                    }
                }
            }
        }
        let t = takagi(&sector)?;
        for (col, &s) in t.values.iter().enumerate() {
            let lambda = s * s;
            total += lambda;
            let mut components = Vec::new();
            let mut dominant = (0, -1.0);
            for (ia, &ha) in harmonics.iter().enumerate() {
                let y: Vec<Complex64> = (0..np).map(|j| t.vectors[(ia * np + j, col)]).collect();
                let weight: f64 = y.iter().map(|v| v.norm_sqr()).sum();
                if weight > dominant.1 * (1.0 + 1e-12) {
                    dominant = (ha, weight);
                }
                for (h, c) in basis(ha) {
                    components.push((h, y.iter().zip(&inv_sw).map(|(v, s)| v * (c * s)).collect()));
                }
            }
            components.sort_by_key(|(h, _)| *h);
            units.push(Candidate { lambda, n: dominant.0, m: 0, parity: Some(parity), components });
        }
    }
    let kept = truncate(units, total, spec, |_| 1.0);
    let kept_sum: f64 = kept.iter().map(|c| c.lambda).sum();
    let mut modes: Vec<SchmidtMode> = kept
        .into_iter()
        .map(|c| SchmidtMode { m: 0, n: c.n, lambda: c.lambda, partner: 0, parity: c.parity, components: c.components })
        .collect();
    sort_modes(&mut modes);
    let mut counters = std::collections::BTreeMap::new();
    for (i, md) in modes.iter_mut().enumerate() {
        let c = counters.entry((md.parity, md.n)).or_insert(0usize);
        md.m = *c;
        *c += 1;
        md.partner = i;
    }
    Ok(SchmidtModes {
        grid: grid.clone(),
        modes,
        truncation_loss: (total - kept_sum).max(0.0),
        harmonic_loss: kernel.harmonic_loss,
        joint: true,
    })
}

/// Keeps the largest units until the discarded weight is at most
/// `max_truncation_loss`, never keeping a unit below `min_lambda`.
fn truncate(mut units: Vec<Candidate>, total: f64, spec: &SolverSpec, mult: impl Fn(&Candidate) -> f64) -> Vec<Candidate> {
    units.sort_by(|a, b| {
        b.lambda
            .total_cmp(&a.lambda)
            .then(a.n.abs().cmp(&b.n.abs()))
            .then(a.parity.cmp(&b.parity))
            .then(a.m.cmp(&b.m))
    });
    let mut remaining = total;
    let mut kept = Vec::new();
    for u in units {
        if remaining <= spec.max_truncation_loss || u.lambda < spec.min_lambda {
            break;
        }
        remaining -= mult(&u) * u.lambda;
        kept.push(u);
    }
    kept
}

fn sort_modes(modes: &mut [SchmidtMode]) {
    modes.sort_by(|a, b| {
        b.lambda
            .total_cmp(&a.lambda)
            .then(a.n.abs().cmp(&b.n.abs()))
            .then(b.n.cmp(&a.n))
            .then(a.parity.cmp(&b.parity))
            .then(a.m.cmp(&b.m))
    });
}

/// Decomposes any kernel, choosing the path from its representation.
pub fn decompose(kernel: &TpaKernel, spec: &SolverSpec) -> Result<SchmidtModes> {
    if kernel.is_joint() {
        joint_schmidt(kernel, spec)
    } else {
        radial_schmidt(kernel, spec)
    }
}

impl SchmidtModes {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.lambda).collect()
    }

    pub fn lambda_sum(&self) -> f64 {
        self.modes.iter().map(|m| m.lambda).sum()
    }

    pub fn find(&self, m: usize, n: i32) -> Option<usize> {
        self.modes.iter().position(|md| md.m == m && md.n == n)
    }

    pub fn mode_profile(&self, m: usize, n: i32) -> Result<ModeProfile> {
        let idx = self.find(m, n).ok_or(Error::UnknownMode { m, n })?;
        Ok(self.profile(idx))
    }

    /// Profile of the mode at position `idx`, on its labelled harmonic.
    pub fn profile(&self, idx: usize) -> ModeProfile {
        let mode = &self.modes[idx];
        let (m, n) = (mode.m, mode.n);
        let u = mode.component(n).or_else(|| mode.component(-n)).unwrap_or(&mode.components[0].1);
        let mut best = 0;
        for (j, v) in u.iter().enumerate() {
            if v.norm() > u[best].norm() * (1.0 + 1e-12) {
                best = j;
            }
        }
        let phase = if u[best].norm() > 0.0 { u[best] / u[best].norm() } else { Complex64::new(1.0, 0.0) };
        let inv = phase.conj();
        let mut profile: Vec<Complex64> = u.iter().map(|v| v * inv).collect();
        profile[best] = Complex64::new(profile[best].re, 0.0);
        ModeProfile { m, n, lambda: mode.lambda, u: profile, phase }
    }

    /// Copy keeping only the listed modes (partners must be included).
    pub fn subset(&self, indices: &[usize]) -> Result<SchmidtModes> {
        let mut modes: Vec<SchmidtMode> = indices.iter().map(|&i| self.modes[i].clone()).collect();
        for (pos, &i) in indices.iter().enumerate() {
            let p = self.modes[i].partner;
            modes[pos].partner = indices
                .iter()
                .position(|&k| k == p)
                .ok_or_else(|| Error::InvalidArgument(format!("partner of mode {i} not in subset")))?;
        }
        let kept: f64 = modes.iter().map(|m| m.lambda).sum();
        Ok(SchmidtModes {
            grid: self.grid.clone(),
            modes,
            truncation_loss: (1.0 - kept).max(0.0),
            harmonic_loss: self.harmonic_loss,
            joint: self.joint,
        })
    }

    /// Largest deviation of the discrete Gram matrix from the identity,
    /// taken within each harmonic (or each parity sector for joint modes).
    pub fn orthonormality_error(&self) -> f64 {
        let w = &self.grid.weights;
        let mut groups: std::collections::BTreeMap<(Option<Parity>, i32), Vec<usize>> = Default::default();
        for (i, md) in self.modes.iter().enumerate() {
            let key = if self.joint { (md.parity, 0) } else { (None, md.n) };
            groups.entry(key).or_default().push(i);
        }
        let mut worst = 0.0f64;
        for idx in groups.values() {
            for (a, &i) in idx.iter().enumerate() {
                for &k in &idx[a..] {
                    let mut g = Complex64::new(0.0, 0.0);
                    for (h, ui) in &self.modes[i].components {
                        if let Some(uk) = self.modes[k].component(*h) {
                            for j in 0..w.len() {
                                g += ui[j] * uk[j].conj() * w[j];
                            }
                        }
                    }
                    let target = if i == k { 1.0 } else { 0.0 };
                    worst = worst.max((g - target).norm());
                }
            }
        }
        worst
    }

    /// Largest deviation from the exchange degeneracy: λ_mn = λ_m,-n and
    /// u_mn = u_m,-n for harmonic modes; u_{-n} = ±u_n for joint modes.
    pub fn degeneracy_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for md in &self.modes {
            if self.joint {
                let sign = if md.parity == Some(Parity::Odd) { -1.0 } else { 1.0 };
                for (h, u) in &md.components {
                    if *h > 0 {
                        let mirror = md.component(-h).expect("mirror component");
                        for (a, b) in u.iter().zip(mirror) {
                            worst = worst.max((a - b * sign).norm());
                        }
                    }
                }
            } else {
                let p = &self.modes[md.partner];
                worst = worst.max((md.lambda - p.lambda).abs());
                for (a, b) in md.components[0].1.iter().zip(&p.components[0].1) {
                    worst = worst.max((a - b).norm());
                }
            }
        }
        worst
    }

    /// Kernel rebuilt from the retained modes, F = Σ √λ ψ_k ⊗ ψ_partner(k).
    pub fn reconstruct(&self) -> TpaKernel {
        let g = &self.grid;
        let np = g.n_points;
        let sw: Vec<f64> = g.weights.iter().map(|w| w.sqrt()).collect();
        let data = if self.joint {
            let dim = np * g.n_harmonics();
            let k = self.modes.len();
            let mut x = DMatrix::<Complex64>::zeros(dim, k);
            let mut xs = DMatrix::<Complex64>::zeros(dim, k);
            for (c, md) in self.modes.iter().enumerate() {
                let s = md.lambda.sqrt();
                for (h, u) in &md.components {
                    for j in 0..np {
                        let v = u[j] * sw[j];
                        x[(joint_index(g, j, *h), c)] = v;
                        xs[(joint_index(g, j, *h), c)] = v * s;
                    }
                }
            }
            KernelData::Joint(&x * xs.transpose())
        } else {
            let mut mats = Vec::with_capacity(g.n_harmonics());
            for n in -(g.n_max as i32)..=g.n_max as i32 {
                let cols: Vec<&SchmidtMode> = self.modes.iter().filter(|md| md.n == n).collect();
                let mut x = DMatrix::<Complex64>::zeros(np, cols.len());
                let mut xs = DMatrix::<Complex64>::zeros(np, cols.len());
                for (c, md) in cols.iter().enumerate() {
                    let s = md.lambda.sqrt();
                    for j in 0..np {
                        let v = md.components[0].1[j] * sw[j];
                        x[(j, c)] = v;
                        xs[(j, c)] = v * s;
                    }
                }
                mats.push(&x * xs.transpose());
            }
            KernelData::Harmonic(mats)
        };
        TpaKernel { grid: g.clone(), data, norm_constant: f64::NAN, harmonic_loss: self.harmonic_loss }
    }
}
