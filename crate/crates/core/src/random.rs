//! Seeded fixture generators.
//!
//! Every randomized fixture goes through [`FixtureRng`], a ChaCha8 stream
//! seeded from a `u64`, so that a seed reproduces the same catalog and
//! queries on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geom::{SkyPoint, UnitVec3};

pub struct FixtureRng {
    rng: ChaCha8Rng,
}

impl FixtureRng {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.rng.gen::<f64>()
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    /// Uniformly distributed on the sphere: `z` uniform in `[-1, 1]`.
    pub fn sky_point(&mut self) -> SkyPoint {
        let ra = self.uniform(0.0, 360.0);
        let z: f64 = self.uniform(-1.0, 1.0);
        let dec = z.asin().to_degrees().clamp(-90.0, 90.0);
        SkyPoint::new(ra, dec).expect("generated coordinates are in range")
    }

    pub fn unit_vec(&mut self) -> UnitVec3 {
        self.sky_point().to_vec()
    }

    /// Uniform on the sphere restricted to `dec` in `[dec_lo, dec_hi]`.
    pub fn sky_point_in_band(&mut self, dec_lo: f64, dec_hi: f64) -> SkyPoint {
        let zl = dec_lo.to_radians().sin();
        let zh = dec_hi.to_radians().sin();
        let ra = self.uniform(0.0, 360.0);
        let z: f64 = self.uniform(zl, zh);
        SkyPoint::new(ra, z.asin().to_degrees().clamp(-90.0, 90.0)).unwrap()
    }

    /// Uniform on the sphere restricted to a right-ascension window, which
    /// may wrap through 0.
    pub fn sky_point_in_ra_window(&mut self, ra_lo: f64, width: f64) -> SkyPoint {
        let ra = ra_lo + self.uniform(0.0, width);
        let z: f64 = self.uniform(-1.0, 1.0);
        SkyPoint::new(ra, z.asin().to_degrees().clamp(-90.0, 90.0)).unwrap()
    }
}

/// `n` uniform random points with ids `1..=n`.
pub fn uniform_catalog(seed: u64, n: usize) -> Vec<(i64, SkyPoint)> {
    let mut rng = FixtureRng::new(seed);
    (0..n).map(|i| (i as i64 + 1, rng.sky_point())).collect()
}

/// Cone queries with radii in `(0, r_max]`: one in ten centred within 1° of
/// a pole, one in ten straddling `ra = 0`, the rest uniform.
pub fn cone_queries(seed: u64, k: usize, r_max: f64) -> Vec<(SkyPoint, f64)> {
    let mut rng = FixtureRng::new(seed);
    (0..k)
        .map(|i| {
            let r = rng.uniform(0.01 * r_max, r_max);
            let c = match i % 10 {
                0 => {
                    let band = if i % 20 == 0 { (89.0, 90.0) } else { (-90.0, -89.0) };
                    rng.sky_point_in_band(band.0, band.1)
                }
                1 => {
                    let ra = rng.uniform(-0.4 * r, 0.4 * r);
                    SkyPoint::new(ra, rng.uniform(-60.0, 60.0)).expect("dec in range")
                }
                _ => rng.sky_point(),
            };
            (c, r)
        })
        .collect()
}

/// Circles with uniform centres and log-uniform radii in `[r_min, r_max]`,
/// ids `1..=n`.
pub fn circle_entries(seed: u64, n: usize, r_min: f64, r_max: f64) -> Vec<(i64, SkyPoint, f64)> {
    let mut rng = FixtureRng::new(seed);
    let (a, b) = (r_min.ln(), r_max.ln());
    (1..=n as i64)
        .map(|id| {
            let c = rng.sky_point();
            (id, c, rng.uniform(a, b).exp())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_points() {
        let a = uniform_catalog(7, 5);
        let b = uniform_catalog(7, 5);
        assert_eq!(a, b);
        assert_ne!(a, uniform_catalog(8, 5));
    }

    #[test]
    fn band_and_window_bounds() {
        let mut rng = FixtureRng::new(1);
        for _ in 0..1000 {
            let p = rng.sky_point_in_band(89.0, 90.0);
            assert!(p.dec() >= 89.0 - 1e-9);
            let q = rng.sky_point_in_ra_window(359.0, 2.0);
            assert!(q.ra() >= 359.0 || q.ra() < 1.0);
        }
    }
}
