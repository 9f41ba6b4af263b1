//! Sums of isotropic Gaussian bumps.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::unit;

/// Half-width of the square the bump centers are drawn from.
pub const DEFAULT_SPREAD: f64 = 2.0;

/// `e^(-1/2)`: peak gradient of a unit-amplitude, unit-width Gaussian.
const PEAK_GRADIENT: f64 = 0.606_530_659_712_633_4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bump {
    pub center: [f64; 2],
    /// Signed amplitude; its magnitude is the family amplitude.
    pub amplitude: f64,
}

/// `g(P) = sum_i a_i * exp(-|P - c_i|^2 / (2 sigma^2))`.
///
/// Centers are uniform in `[-spread, spread]^2` and signs are fair coin flips,
/// both drawn from a ChaCha8 stream seeded with `seed` (two words per
/// coordinate-pair, one word per sign, in bump order). Each bump has gradient
/// norm at most `|a| e^(-1/2) / sigma`, so the family is Lipschitz with bound
/// `count * amplitude * e^(-1/2) / sigma`.
#[derive(Clone, Debug, PartialEq)]
pub struct Bumps {
    pub seed: u64,
    pub count: usize,
    pub sigma: f64,
    pub spread: f64,
    pub amplitude: f64,
    /// Requested Lipschitz bound when the amplitude was derived from it.
    pub target: Option<f64>,
    bumps: Vec<Bump>,
}

impl Bumps {
    pub fn new(seed: u64, count: usize, sigma: f64, spread: f64, amplitude: f64) -> Self {
        Self::build(seed, count, sigma, spread, amplitude, None)
    }

    /// Amplitude chosen so that the derived Lipschitz bound equals `target`.
    pub fn with_target(seed: u64, count: usize, sigma: f64, target: f64) -> Self {
        Self::with_target_spread(seed, count, sigma, DEFAULT_SPREAD, target)
    }

    pub fn with_target_spread(
        seed: u64,
        count: usize,
        sigma: f64,
        spread: f64,
        target: f64,
    ) -> Self {
        let amplitude = target * sigma / (count as f64 * PEAK_GRADIENT);
        Self::build(seed, count, sigma, spread, amplitude, Some(target))
    }

    fn build(
        seed: u64,
        count: usize,
        sigma: f64,
        spread: f64,
        amplitude: f64,
        target: Option<f64>,
    ) -> Self {
        assert!(count >= 1 && sigma > 0.0 && spread > 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bumps = (0..count)
            .map(|_| {
                let cx = spread * (2.0 * unit(&mut rng) - 1.0);
                let cy = spread * (2.0 * unit(&mut rng) - 1.0);
                let sign = if unit(&mut rng) < 0.5 { -1.0 } else { 1.0 };
                Bump {
                    center: [cx, cy],
                    amplitude: sign * amplitude,
                }
            })
            .collect();
        Bumps {
            seed,
            count,
            sigma,
            spread,
            amplitude,
            target,
            bumps,
        }
    }

    pub fn bumps(&self) -> &[Bump] {
        &self.bumps
    }

    pub fn height(&self, x: f64, y: f64) -> f64 {
        let inv = -0.5 / (self.sigma * self.sigma);
        self.bumps
            .iter()
            .map(|b| {
                let dx = x - b.center[0];
                let dy = y - b.center[1];
                b.amplitude * ((dx * dx + dy * dy) * inv).exp()
            })
            .sum()
    }

    pub fn lipschitz_bound(&self) -> f64 {
        match self.target {
            Some(t) => t,
            None => self.count as f64 * self.amplitude.abs() * PEAK_GRADIENT / self.sigma,
        }
    }
}

impl fmt::Display for Bumps {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "bumps:seed={},n={},sigma={},spread={}",
            self.seed, self.count, self.sigma, self.spread
        )?;
        match self.target {
            Some(t) => write!(f, ",target={t}"),
            None => write!(f, ",amp={}", self.amplitude),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peak_gradient_constant() {
        assert!((PEAK_GRADIENT - (-0.5f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn single_bump_gradient_peaks_at_sigma() {
        let b = Bumps::new(0, 1, 0.5, 1.0, 1.0);
        let c = b.bumps()[0].center;
        let a = b.bumps()[0].amplitude;
        let h = 1e-6;
        let slope = |rho: f64| {
            ((b.height(c[0] + rho + h, c[1]) - b.height(c[0] + rho - h, c[1])) / (2.0 * h)).abs()
        };
        let expect = a.abs() * PEAK_GRADIENT / 0.5;
        assert!((slope(0.5) - expect).abs() < 1e-8);
        assert!(slope(0.4) < expect && slope(0.6) < expect);
        // With `target` unset the derived bound is exactly the single-bump peak.
        assert!((b.lipschitz_bound() - expect).abs() < 1e-15);
    }

    #[test]
    fn target_rescales_amplitude() {
        let b = Bumps::with_target(1, 8, 0.5, 0.7);
        assert_eq!(b.lipschitz_bound(), 0.7);
        let derived = 8.0 * b.amplitude * PEAK_GRADIENT / 0.5;
        assert!((derived - 0.7).abs() < 1e-12);
        assert!(b.bumps().iter().all(|x| x.amplitude.abs() == b.amplitude));
    }

    #[test]
    fn same_seed_same_centers() {
        assert_eq!(
            Bumps::with_target(9, 5, 0.3, 0.5),
            Bumps::with_target(9, 5, 0.3, 0.5)
        );
        assert_ne!(
            Bumps::with_target(9, 5, 0.3, 0.5).bumps(),
            Bumps::with_target(10, 5, 0.3, 0.5).bumps()
        );
    }

    #[test]
    fn centers_stay_in_spread() {
        let b = Bumps::with_target(4, 200, 0.5, 0.7);
        assert!(b
            .bumps()
            .iter()
            .all(|x| x.center.iter().all(|c| c.abs() <= DEFAULT_SPREAD)));
    }
}
