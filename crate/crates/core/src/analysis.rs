//! Small helpers for 1D curves: extrema, widths, visibility.

/// Indices i with y[i-1] < y[i] >= y[i+1].
pub fn local_maxima(y: &[f64]) -> Vec<usize> {
    (1..y.len().saturating_sub(1)).filter(|&i| y[i] > y[i - 1] && y[i] >= y[i + 1]).collect()
}

/// Indices i with y[i-1] > y[i] <= y[i+1].
pub fn local_minima(y: &[f64]) -> Vec<usize> {
    (1..y.len().saturating_sub(1)).filter(|&i| y[i] < y[i - 1] && y[i] <= y[i + 1]).collect()
}

pub fn argmax(y: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in y.iter().enumerate() {
        if *v > y[best] {
            best = i;
        }
    }
    best
}

/// Divides by the maximum; an all-zero curve is returned unchanged.
pub fn normalize_max(y: &[f64]) -> Vec<f64> {
    let m = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m > 0.0 {
        y.iter().map(|v| v / m).collect()
    } else {
        y.to_vec()
    }
}

/// Full width at half of y[peak], crossing points found by linear interpolation.
/// Returns None if the curve does not drop below half maximum on both sides.
pub fn fwhm_at(x: &[f64], y: &[f64], peak: usize) -> Option<f64> {
    let half = 0.5 * y[peak];
    let mut left = None;
    for i in (0..peak).rev() {
        if y[i] <= half {
            let t = (half - y[i]) / (y[i + 1] - y[i]);
            left = Some(x[i] + t * (x[i + 1] - x[i]));
            break;
        }
    }
    let mut right = None;
    for i in peak + 1..y.len() {
        if y[i] <= half {
            let t = (half - y[i - 1]) / (y[i] - y[i - 1]);
            right = Some(x[i - 1] + t * (x[i] - x[i - 1]));
            break;
        }
    }
    Some(right? - left?)
}

/// Largest (I_max - I_min)/(I_max + I_min) over local minima flanked by maxima,
/// with I_max the lower of the two flanking maxima. Maxima below `floor`
/// (relative to the global maximum) are ignored.
pub fn fringe_visibility(y: &[f64], floor: f64) -> f64 {
    let top = y.iter().copied().fold(0.0, f64::max);
    let maxima: Vec<usize> = local_maxima(y).into_iter().filter(|&i| y[i] >= floor * top).collect();
    let mut best = 0.0f64;
    for i in local_minima(y) {
        let left = maxima.iter().rev().find(|&&m| m < i);
        let right = maxima.iter().find(|&&m| m > i);
        if let (Some(&l), Some(&r)) = (left, right) {
            let a = y[l].min(y[r]);
            best = best.max((a - y[i]) / (a + y[i]));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extrema_and_width() {
        let x: Vec<f64> = (0..101).map(|i| i as f64 * 0.1 - 5.0).collect();
        let y: Vec<f64> = x.iter().map(|v| (-v * v / 2.0).exp()).collect();
        assert_eq!(local_maxima(&y), vec![50]);
        assert!(local_minima(&y).is_empty());
        let w = fwhm_at(&x, &y, 50).unwrap();
        assert!((w - 2.0 * (2.0 * 2f64.ln()).sqrt()).abs() < 5e-3);
        assert_eq!(fwhm_at(&x[..52], &y[..52], 50), None);
    }

    #[test]
    fn visibility_of_fringes() {
        let y: Vec<f64> = (0..400).map(|i| 1.0 + 0.5 * (i as f64 * 0.1).cos()).collect();
        assert!((fringe_visibility(&y, 0.01) - 0.5).abs() < 1e-3);
        let flat: Vec<f64> = (0..50).map(|i| -(i as f64 - 25.0).powi(2)).map(f64::exp).collect();
        assert_eq!(fringe_visibility(&flat, 0.01), 0.0);
    }
}
