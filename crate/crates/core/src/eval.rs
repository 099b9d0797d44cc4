//! Evaluation of Schmidt mode functions ψ_k(q, φ) at arbitrary transverse points.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::schmidt::SchmidtModes;

/// Radial samples f = u/√q of every mode component, grouped by harmonic.
struct Block {
    harmonic: i32,
    modes: Vec<usize>,
    re: DMatrix<f64>,
    im: DMatrix<f64>,
}

pub struct ModeEvaluator<'a> {
    modes: &'a SchmidtModes,
    blocks: Vec<Block>,
}

impl<'a> ModeEvaluator<'a> {
    pub fn new(modes: &'a SchmidtModes) -> Self {
        let g = &modes.grid;
        let inv_sqrt_q: Vec<f64> = g.nodes.iter().map(|q| 1.0 / q.sqrt()).collect();
        let mut by_h: std::collections::BTreeMap<i32, Vec<(usize, &[Complex64])>> = Default::default();
        for (k, md) in modes.modes.iter().enumerate() {
            for (h, u) in &md.components {
                by_h.entry(*h).or_default().push((k, u.as_slice()));
            }
        }
        let blocks = by_h
            .into_iter()
            .map(|(harmonic, cols)| {
                let np = g.n_points;
                let mut re = DMatrix::zeros(np, cols.len());
                let mut im = DMatrix::zeros(np, cols.len());
                for (c, (_, u)) in cols.iter().enumerate() {
                    for j in 0..np {
                        re[(j, c)] = u[j].re * inv_sqrt_q[j];
                        im[(j, c)] = u[j].im * inv_sqrt_q[j];
                    }
                }
                Block { harmonic, modes: cols.iter().map(|c| c.0).collect(), re, im }
            })
            .collect();
        Self { modes, blocks }
    }

    pub fn n_modes(&self) -> usize {
        self.modes.modes.len()
    }

    /// Calls `f(point_index, ψ)` with all mode values at each transverse point
    /// (q_x, q_y). Points are visited grouped by radius, not in input order.
    pub fn visit<F>(&self, points: &[[f64; 2]], mut f: F) -> Result<()>
    where
        F: FnMut(usize, &[Complex64]),
    {
        let g = &self.modes.grid;
        let mut radii: Vec<f64> = Vec::new();
        let mut members: Vec<Vec<usize>> = Vec::new();
        let mut seen: HashMap<u64, usize> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            let q = p[0].hypot(p[1]);
            if q > g.q_max {
                return Err(Error::PixelOutsideGrid { q, q_max: g.q_max });
            }
            let idx = *seen.entry(q.to_bits()).or_insert_with(|| {
                radii.push(q);
                members.push(Vec::new());
                radii.len() - 1
            });
            members[idx].push(i);
        }
        let norm = 1.0 / (2.0 * PI).sqrt();
        let mut psi = vec![Complex64::new(0.0, 0.0); self.n_modes()];
        let mut row = vec![0.0; g.n_points];
        for start in (0..radii.len()).step_by(RADIUS_CHUNK) {
            let end = (start + RADIUS_CHUNK).min(radii.len());
            let mut t = DMatrix::<f64>::zeros(end - start, g.n_points);
            for r in start..end {
                g.interpolation_row(radii[r], &mut row);
                for j in 0..g.n_points {
                    t[(r - start, j)] = row[j];
                }
            }
            let products: Vec<(DMatrix<f64>, DMatrix<f64>)> =
                self.blocks.iter().map(|b| (&t * &b.re, &t * &b.im)).collect();
            for r in start..end {
                for &i in &members[r] {
                    let phi = points[i][1].atan2(points[i][0]);
                    psi.fill(Complex64::new(0.0, 0.0));
                    for (b, (gre, gim)) in self.blocks.iter().zip(&products) {
                        // Regularity: only the n = 0 harmonic survives at the origin.
                        if radii[r] == 0.0 && b.harmonic != 0 {
                            continue;
                        }
                        let e = Complex64::from_polar(norm, b.harmonic as f64 * phi);
                        for (c, &k) in b.modes.iter().enumerate() {
                            psi[k] += Complex64::new(gre[(r - start, c)], gim[(r - start, c)]) * e;
                        }
                    }
                    f(i, &psi);
                }
            }
        }
        Ok(())
    }

    /// ψ_k at transverse points; rows are points, columns modes.
    pub fn evaluate(&self, points: &[[f64; 2]]) -> Result<DMatrix<Complex64>> {
        let mut out = DMatrix::<Complex64>::zeros(points.len(), self.n_modes());
        self.visit(points, |i, psi| {
            for (k, v) in psi.iter().enumerate() {
                out[(i, k)] = *v;
            }
        })?;
        Ok(out)
    }

    /// Σ_k weight_k |ψ_k|² at each point.
    pub fn density(&self, points: &[[f64; 2]], weight: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; points.len()];
        self.visit(points, |i, psi| {
            out[i] = psi.iter().zip(weight).map(|(v, w)| w * v.norm_sqr()).sum();
        })?;
        Ok(out)
    }
}

const RADIUS_CHUNK: usize = 128;
