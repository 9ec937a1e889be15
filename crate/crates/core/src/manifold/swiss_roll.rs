use std::f64::consts::PI;

use crate::rng::SeededRng;
use crate::Mat;

/// Range of the spiral angle `t`.
pub const SWISS_ROLL_T_RANGE: (f64, f64) = (1.5 * PI, 4.5 * PI);
/// Height of the roll along the `y` axis.
pub const SWISS_ROLL_HEIGHT: f64 = 21.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SwissRoll {
    /// `N × 3` points `(t cos t, h, t sin t)` plus noise.
    pub data: Mat,
    pub t: Vec<f64>,
    pub h: Vec<f64>,
}

impl SwissRoll {
    /// Intrinsic coordinates `(arc length along the spiral, h)`.
    pub fn latent(&self) -> Mat {
        Mat::from_fn(self.t.len(), 2, |i, j| if j == 0 { spiral_arc_length(self.t[i]) } else { self.h[i] })
    }
}

/// Arc length of the planar spiral `r = t` from angle 0 to `t`.
pub fn spiral_arc_length(t: f64) -> f64 {
    0.5 * (t * (1.0 + t * t).sqrt() + t.asinh())
}

/// Samples `n` points with `t` and `h` uniform on their ranges and isotropic
/// Gaussian noise of standard deviation `noise`.
pub fn swiss_roll(n: usize, noise: f64, seed: u64) -> SwissRoll {
    let mut rng = SeededRng::new(seed);
    let (lo, hi) = SWISS_ROLL_T_RANGE;
    let mut data = Mat::zeros(n, 3);
    let mut ts = Vec::with_capacity(n);
    let mut hs = Vec::with_capacity(n);
    for i in 0..n {
        let t = rng.uniform(lo, hi);
        let h = rng.uniform(0.0, SWISS_ROLL_HEIGHT);
        // Noise draws are always consumed so that the clean and noisy rolls
        // share their latent coordinates.
        let eps = [rng.standard_normal(), rng.standard_normal(), rng.standard_normal()];
        data[(i, 0)] = t * t.cos() + noise * eps[0];
        data[(i, 1)] = h + noise * eps[1];
        data[(i, 2)] = t * t.sin() + noise * eps[2];
        ts.push(t);
        hs.push(h);
    }
    SwissRoll { data, t: ts, h: hs }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_roll_lies_on_the_spiral() {
        let r = swiss_roll(200, 0.0, 1);
        for i in 0..200 {
            let (x, z) = (r.data[(i, 0)], r.data[(i, 2)]);
            assert!(((x * x + z * z).sqrt() - r.t[i]).abs() <= 1e-12 * r.t[i]);
        }
    }

    #[test]
    fn seeded_and_reproducible() {
        assert_eq!(swiss_roll(50, 0.1, 4), swiss_roll(50, 0.1, 4));
        assert_ne!(swiss_roll(50, 0.1, 4), swiss_roll(50, 0.1, 5));
        assert_eq!(swiss_roll(50, 0.0, 4).t, swiss_roll(50, 0.3, 4).t);
    }

    #[test]
    fn latent_range() {
        let r = swiss_roll(1000, 0.0, 2);
        let (lo, hi) = SWISS_ROLL_T_RANGE;
        assert!(r.t.iter().all(|&t| (lo..hi).contains(&t)));
        let lat = r.latent();
        let (a, b) = (spiral_arc_length(lo), spiral_arc_length(hi));
        assert!(lat.column(0).iter().all(|&s| s >= a && s < b));
        let span = lat.column(0).max() - lat.column(0).min();
        assert!(span > 0.95 * (b - a));
    }

    #[test]
    fn arc_length_derivative() {
        // ds/dt = sqrt(1 + t²) for r = t.
        let t = 7.0;
        let h = 1e-5;
        let fd = (spiral_arc_length(t + h) - spiral_arc_length(t - h)) / (2.0 * h);
        assert!((fd - (1.0 + t * t).sqrt()).abs() < 1e-6);
    }
}
