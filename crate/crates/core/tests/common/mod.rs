#![allow(dead_code)]

use bsvsim_core::{PumpBeam, Segment, Setup};

pub const WAVELENGTH_NM: f64 = 354.7;

pub fn setup(segments: Vec<Segment>, fwhm_um: f64) -> Setup {
    Setup::new(PumpBeam::new(WAVELENGTH_NM, fwhm_um, 1.0).unwrap(), segments, 0.0).unwrap()
}

pub fn single_crystal() -> Setup {
    setup(vec![Segment::crystal(3.0, 0.0)], 120.0)
}

pub fn two_crystals(length_mm: f64, gap_mm: f64, fwhm_um: f64, rho: [f64; 2]) -> Setup {
    setup(
        vec![Segment::crystal(length_mm, rho[0]), Segment::gap(gap_mm), Segment::crystal(length_mm, rho[1])],
        fwhm_um,
    )
}

/// Simple deterministic generator for test inputs (xorshift64*).
pub struct Rng(pub u64);

impl Rng {
    pub fn next_f64(&mut self) -> f64 {
        self.0 ^= self.0 >> 12;
        self.0 ^= self.0 << 25;
        self.0 ^= self.0 >> 27;
        (self.0.wrapping_mul(0x2545_f491_4f6c_dd1d) >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}
