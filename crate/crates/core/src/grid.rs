//! Gauss-Legendre radial quadrature and barycentric interpolation on its nodes.

use std::f64::consts::PI;

use crate::config::{GridSpec, Setup};

/// Gauss-Legendre nodes and weights on [-1, 1], nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                dp = legendre_with_derivative(n, z).1;
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Radial quadrature on (0, q_max] plus the retained harmonic range.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    pub n_points: usize,
    pub q_max: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Harmonics n ∈ [-n_max, n_max] are retained.
    pub n_max: usize,
    bary: Vec<f64>,
}

impl RadialGrid {
    pub fn new(n_points: usize, q_max: f64, n_max: usize) -> Self {
        let (x, w) = gauss_legendre(n_points);
        let half = q_max / 2.0;
        let nodes = x.iter().map(|&xi| (xi + 1.0) * half).collect();
        let weights = w.iter().map(|&wi| wi * half).collect();
        let bary = x
            .iter()
            .zip(&w)
            .enumerate()
            .map(|(j, (&xj, &wj))| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                s * ((1.0 - xj * xj) * wj).sqrt()
            })
            .collect();
        Self { n_points, q_max, nodes, weights, n_max, bary }
    }

    pub fn n_harmonics(&self) -> usize {
        2 * self.n_max + 1
    }

    /// Weights of the barycentric interpolant through the nodes evaluated at `q`.
    pub fn interpolation_row(&self, q: f64, row: &mut [f64]) {
        debug_assert_eq!(row.len(), self.n_points);
        for (j, &qj) in self.nodes.iter().enumerate() {
            if q == qj {
                row.fill(0.0);
                row[j] = 1.0;
                return;
            }
        }
        let mut total = 0.0;
        for (j, (&qj, &bj)) in self.nodes.iter().zip(&self.bary).enumerate() {
            let t = bj / (q - qj);
            row[j] = t;
            total += t;
        }
        for r in row.iter_mut() {
            *r /= total;
        }
    }

    pub fn interpolate(&self, values: &[f64], q: f64) -> f64 {
        let mut row = vec![0.0; self.n_points];
        self.interpolation_row(q, &mut row);
        row.iter().zip(values).map(|(a, b)| a * b).sum()
    }
}

/// q_max at which the sinc argument L·q²/(4k_p) reaches 4π for the shortest crystal.
pub fn default_q_max(setup: &Setup) -> f64 {
    (16.0 * PI * setup.pump.k_p / setup.shortest_crystal_um()).sqrt()
}

pub fn default_grid(setup: &Setup) -> RadialGrid {
    grid_for(setup, &GridSpec::default())
}

pub fn grid_for(setup: &Setup, spec: &GridSpec) -> RadialGrid {
    let q_max = spec.q_max_override.unwrap_or_else(|| default_q_max(setup));
    RadialGrid::new(spec.n_points, q_max, spec.n_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{PumpBeam, Segment};

    fn setup(lengths: &[f64]) -> Setup {
        let pump = PumpBeam::new(354.7, 120.0, 1.0).unwrap();
        let mut segs = Vec::new();
        for (i, &l) in lengths.iter().enumerate() {
            if i > 0 {
                segs.push(Segment::gap(3.0));
            }
            segs.push(Segment::crystal(l, 0.0));
        }
        Setup::new(pump, segs, 0.0).unwrap()
    }

    #[test]
    fn q_max_rule() {
        let s = setup(&[3.0]);
        let kp = 2.0 * PI / 0.3547;
        assert!((default_q_max(&s) - (16.0 * PI * kp / 3000.0).sqrt()).abs() < 1e-14);
        let two = setup(&[1.0, 3.0]);
        assert!((default_q_max(&two) - (16.0 * PI * kp / 1000.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn default_nodes_increasing_positive() {
        let g = default_grid(&setup(&[3.0]));
        assert_eq!(g.nodes.len(), 256);
        assert!(g.nodes[0] > 0.0);
        assert!(g.nodes.windows(2).all(|p| p[1] > p[0]));
        assert!(*g.nodes.last().unwrap() < g.q_max);
        assert!(g.weights.iter().all(|&w| w > 0.0));
        let sum: f64 = g.weights.iter().sum();
        assert!((sum - g.q_max).abs() < 1e-13 * g.q_max);
        assert_eq!(g.n_harmonics(), 65);
    }

    #[test]
    fn small_rules_match_tables() {
        let (x, w) = gauss_legendre(3);
        let r = (3.0f64 / 5.0).sqrt();
        assert!((x[0] + r).abs() < 1e-15 && x[1].abs() < 1e-15 && (x[2] - r).abs() < 1e-15);
        assert!((w[0] - 5.0 / 9.0).abs() < 1e-15 && (w[1] - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn interpolation_is_exact_for_polynomials() {
        let g = RadialGrid::new(24, 0.7, 0);
        let f = |q: f64| 1.0 - 3.0 * q + 5.0 * q.powi(7) - q.powi(20);
        let vals: Vec<f64> = g.nodes.iter().map(|&q| f(q)).collect();
        for &q in &[0.0, 0.013, 0.35, 0.6999, g.nodes[5]] {
            assert!((g.interpolate(&vals, q) - f(q)).abs() < 1e-12, "q={q}");
        }
    }
}
