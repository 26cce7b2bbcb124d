//! Zone bucketing.
//!
//! The sphere is cut into declination stripes of height `h`; row `zone` of
//! a point is `floor((dec + 90) / h)`. Rows are kept sorted by
//! `(zone, ra, objID)` so that a cone search becomes a handful of range
//! scans, one per zone, followed by an exact chord test.
//!
//! Objects close to `ra = 0` are also stored with `ra + 360` (right margin)
//! and objects close to `ra = 360` with `ra - 360` (left margin), so a scan
//! window that runs past either end still finds them.

mod neighbors;

use thiserror::Error;

pub use neighbors::{build_neighbors, NeighborRow, NeighborStats, NeighborTable};

use crate::geom::{arc_distance_deg, SkyPoint, UnitVec3};

/// Added to every coarse window so that rounding can only widen a filter.
pub(crate) const WINDOW_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ZoneError {
    #[error("radius {r} exceeds margin width {max_radius}")]
    RadiusExceedsMargin { r: f64, max_radius: f64 },
    #[error("radius {0} must be finite and non-negative")]
    BadRadius(f64),
    #[error("duplicate objID {0}")]
    DuplicateObjId(i64),
    #[error("invalid zone configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZoneConfig {
    /// Stripe height in degrees.
    pub zone_height: f64,
    /// Margin width in degrees; the largest radius a query may use.
    pub max_radius: f64,
    pub epsilon: f64,
}

impl Default for ZoneConfig {
    fn default() -> Self {
        Self {
            zone_height: 4.0 / 60.0,
            max_radius: 1.0,
            epsilon: 1.0e-6,
        }
    }
}

impl ZoneConfig {
    pub fn validate(&self) -> Result<(), ZoneError> {
        if !(self.zone_height.is_finite() && self.zone_height > 0.0 && self.zone_height <= 180.0) {
            return Err(ZoneError::InvalidConfig(format!(
                "zone height {} must be in (0, 180]",
                self.zone_height
            )));
        }
        if !(self.max_radius.is_finite() && self.max_radius >= 0.0 && self.max_radius <= 180.0) {
            return Err(ZoneError::InvalidConfig(format!(
                "max radius {} must be in [0, 180]",
                self.max_radius
            )));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(ZoneError::InvalidConfig(format!("epsilon {} must be >= 0", self.epsilon)));
        }
        Ok(())
    }
}

/// Number of stripes: `ceil(180 / h)`, treating a quotient within 1e-9 of
/// an integer as that integer.
pub fn zone_count(zone_height: f64) -> u32 {
    let q = 180.0 / zone_height;
    let n = if (q - q.round()).abs() < 1e-9 { q.round() } else { q.ceil() };
    n.max(1.0) as u32
}

/// `floor((dec + 90) / h)`, clamped so that `dec = 90` lands in the top
/// zone.
pub fn zone_of(dec: f64, zone_height: f64) -> u32 {
    let z = ((dec + 90.0) / zone_height).floor();
    let top = zone_count(zone_height) - 1;
    if z < 0.0 {
        0
    } else {
        (z as u32).min(top)
    }
}

/// Half-width in degrees of the right-ascension window that holds every
/// point within `r` of a point at declination `dec`; infinite when the
/// circle reaches a pole.
///
/// Uses the larger of the cos-compressed estimate `r / (|cos dec| + eps)`
/// and the exact extent `asin(sin r / cos dec)`; the estimate alone is too
/// narrow at high declination.
pub fn ra_half_width(dec: f64, r: f64, epsilon: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    if dec.abs() + r >= 90.0 - 1e-9 {
        return f64::INFINITY;
    }
    let cos_dec = dec.to_radians().cos().abs();
    let estimate = r / (cos_dec + epsilon);
    let ratio = r.to_radians().sin() / cos_dec;
    let exact = if ratio >= 1.0 { 180.0 } else { ratio.asin().to_degrees() };
    estimate.max(exact) * (1.0 + 1e-12) + WINDOW_SLACK
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZoneRow {
    pub zone: u32,
    pub obj_id: i64,
    /// May be outside `[0, 360)` for margin rows.
    pub ra: f64,
    pub dec: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl ZoneRow {
    pub fn is_margin(&self) -> bool {
        self.ra < 0.0 || self.ra >= 360.0
    }

    pub fn vec(&self) -> UnitVec3 {
        UnitVec3::from_unit_components(self.x, self.y, self.z).expect("rows hold unit vectors")
    }

    fn chord_sq_to(&self, v: &UnitVec3) -> f64 {
        let dx = self.x - v.x();
        let dy = self.y - v.y();
        let dz = self.z - v.z();
        dx * dx + dy * dy + dz * dz
    }
}

/// Per-query counters for the scan stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NearbyStats {
    pub zones_scanned: usize,
    /// Rows inside the ra windows.
    pub ra_candidates: usize,
    /// Rows surviving the declination band.
    pub dec_candidates: usize,
    pub matches: usize,
}

/// Catalog rows ordered by `(zone, ra, objID)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZoneTable {
    config: ZoneConfig,
    rows: Vec<ZoneRow>,
    /// `zone_start[z]..zone_start[z + 1]` are the rows of zone `z`.
    zone_start: Vec<usize>,
    objects: usize,
}

fn row_order(a: &ZoneRow, b: &ZoneRow) -> std::cmp::Ordering {
    a.zone
        .cmp(&b.zone)
        .then(a.ra.total_cmp(&b.ra))
        .then(a.obj_id.cmp(&b.obj_id))
}

impl ZoneTable {
    pub fn build(catalog: &[(i64, SkyPoint)], config: ZoneConfig) -> Result<Self, ZoneError> {
        config.validate()?;
        let mut seen = std::collections::HashSet::with_capacity(catalog.len());
        let mut rows = Vec::with_capacity(catalog.len() + catalog.len() / 16);
        for &(id, p) in catalog {
            if !seen.insert(id) {
                return Err(ZoneError::DuplicateObjId(id));
            }
            let v = p.to_vec();
            let row = ZoneRow {
                zone: zone_of(p.dec(), config.zone_height),
                obj_id: id,
                ra: p.ra(),
                dec: p.dec(),
                x: v.x(),
                y: v.y(),
                z: v.z(),
            };
            rows.push(row);
            let w = ra_half_width(p.dec(), config.max_radius, config.epsilon);
            if p.ra() < w {
                rows.push(ZoneRow { ra: p.ra() + 360.0, ..row });
            }
            if p.ra() >= 360.0 - w {
                rows.push(ZoneRow { ra: p.ra() - 360.0, ..row });
            }
        }
        Ok(Self::from_rows(config, rows, catalog.len()))
    }

    /// Reassembles a table from stored rows (snapshot load).
    pub fn from_rows(config: ZoneConfig, mut rows: Vec<ZoneRow>, objects: usize) -> Self {
        rows.sort_by(row_order);
        let n = zone_count(config.zone_height) as usize;
        let mut zone_start = vec![0; n + 1];
        for r in &rows {
            zone_start[r.zone as usize + 1] += 1;
        }
        for z in 0..n {
            zone_start[z + 1] += zone_start[z];
        }
        Self {
            config,
            rows,
            zone_start,
            objects,
        }
    }

    pub fn config(&self) -> &ZoneConfig {
        &self.config
    }

    pub fn rows(&self) -> &[ZoneRow] {
        &self.rows
    }

    pub fn zone_count(&self) -> u32 {
        (self.zone_start.len() - 1) as u32
    }

    /// Number of catalog objects (main rows).
    pub fn object_count(&self) -> usize {
        self.objects
    }

    pub fn zone_rows(&self, zone: u32) -> &[ZoneRow] {
        let z = zone as usize;
        &self.rows[self.zone_start[z]..self.zone_start[z + 1]]
    }

    /// Rows of `zone` with `lo <= ra <= hi`.
    pub fn scan(&self, zone: u32, lo: f64, hi: f64) -> &[ZoneRow] {
        let rows = self.zone_rows(zone);
        let a = rows.partition_point(|r| r.ra < lo);
        let b = rows.partition_point(|r| r.ra <= hi);
        &rows[a..b.max(a)]
    }

    /// Rows of `zone` with `0 <= ra < 360`.
    pub fn main_rows(&self, zone: u32) -> &[ZoneRow] {
        let rows = self.zone_rows(zone);
        let a = rows.partition_point(|r| r.ra < 0.0);
        let b = rows.partition_point(|r| r.ra < 360.0);
        &rows[a..b]
    }

    /// Zones `[min, max]` that can hold points within `r` of `dec`.
    pub fn zone_band(&self, dec: f64, r: f64) -> (u32, u32) {
        let h = self.config.zone_height;
        (
            zone_of((dec - r - WINDOW_SLACK).max(-90.0), h),
            zone_of((dec + r + WINDOW_SLACK).min(90.0), h),
        )
    }

    /// Objects strictly closer than `r` degrees to `center`, sorted by
    /// objID, with their distances in degrees.
    pub fn nearby(&self, center: SkyPoint, r: f64) -> Result<Vec<(i64, f64)>, ZoneError> {
        self.nearby_with_stats(center, r).map(|(v, _)| v)
    }

    pub fn nearby_with_stats(
        &self,
        center: SkyPoint,
        r: f64,
    ) -> Result<(Vec<(i64, f64)>, NearbyStats), ZoneError> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(ZoneError::BadRadius(r));
        }
        if r > self.config.max_radius {
            return Err(ZoneError::RadiusExceedsMargin {
                r,
                max_radius: self.config.max_radius,
            });
        }
        let mut stats = NearbyStats::default();
        if r == 0.0 {
            return Ok((Vec::new(), stats));
        }
        let c = center.to_vec();
        let limit = 4.0 * (r.to_radians() / 2.0).sin().powi(2);
        let w = ra_half_width(center.dec(), r, self.config.epsilon);
        let (zmin, zmax) = self.zone_band(center.dec(), r);
        let mut out = Vec::new();
        for zone in zmin..=zmax {
            stats.zones_scanned += 1;
            let rows = if w >= 180.0 {
                self.main_rows(zone)
            } else {
                self.scan(zone, center.ra() - w, center.ra() + w)
            };
            stats.ra_candidates += rows.len();
            for row in rows {
                if (row.dec - center.dec()).abs() > r + WINDOW_SLACK {
                    continue;
                }
                stats.dec_candidates += 1;
                if row.chord_sq_to(&c) < limit {
                    out.push((row.obj_id, arc_distance_deg(&row.vec(), &c)));
                }
            }
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out.dedup_by_key(|m| m.0);
        stats.matches = out.len();
        Ok((out, stats))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{uniform_catalog, FixtureRng};

    fn sp(ra: f64, dec: f64) -> SkyPoint {
        SkyPoint::new(ra, dec).unwrap()
    }

    fn brute(cat: &[(i64, SkyPoint)], c: SkyPoint, r: f64) -> Vec<i64> {
        let cv = c.to_vec();
        let mut v: Vec<i64> = cat
            .iter()
            .filter(|(_, p)| arc_distance_deg(&p.to_vec(), &cv) < r)
            .map(|(id, _)| *id)
            .collect();
        v.sort();
        v
    }

    #[test]
    fn zone_numbers() {
        assert_eq!(zone_of(-90.0, 0.3), 0);
        assert_eq!(zone_of(0.0, 1.0), 90);
        assert_eq!(zone_of(90.0, 1.0), 179);
        assert_eq!(zone_count(1.0), 180);
        assert_eq!(zone_count(4.0 / 60.0), 2700);
        assert_eq!(zone_count(0.7), 258);
    }

    #[test]
    fn margin_rows() {
        let cfg = ZoneConfig {
            max_radius: 1.0,
            ..ZoneConfig::default()
        };
        let t = ZoneTable::build(&[(1, sp(0.1, 0.0)), (2, sp(180.0, 0.0))], cfg).unwrap();
        let ras: Vec<f64> = t.rows().iter().filter(|r| r.obj_id == 1).map(|r| r.ra).collect();
        assert_eq!(ras.len(), 2);
        assert!(ras.contains(&0.1) && ras.iter().any(|&r| (r - 360.1).abs() < 1e-9));
        assert_eq!(t.rows().iter().filter(|r| r.obj_id == 2).count(), 1);

        let t = ZoneTable::build(&[(3, sp(359.9999, 89.99))], cfg).unwrap();
        assert_eq!(t.rows().len(), 3);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let e = ZoneTable::build(&[(1, sp(0.0, 0.0)), (1, sp(1.0, 0.0))], ZoneConfig::default());
        assert_eq!(e.unwrap_err(), ZoneError::DuplicateObjId(1));
    }

    #[test]
    fn wraparound_query() {
        let cat = [(1, sp(359.9, 0.0)), (2, sp(0.1, 0.0)), (3, sp(1.0, 0.0))];
        let t = ZoneTable::build(&cat, ZoneConfig::default()).unwrap();
        let got: Vec<i64> = t.nearby(sp(0.05, 0.0), 0.2).unwrap().iter().map(|m| m.0).collect();
        assert_eq!(got, vec![1, 2]);
        assert!(t.nearby(sp(0.05, 0.0), 0.0).unwrap().is_empty());
        assert!(matches!(
            t.nearby(sp(0.0, 0.0), 1.5),
            Err(ZoneError::RadiusExceedsMargin { .. })
        ));
    }

    #[test]
    fn high_declination_window_is_wide_enough() {
        // at dec 60 the cos-compressed window misses the edge of a 1 degree circle
        let c = sp(10.0, 60.0);
        let w_true = ((1.0f64).to_radians().sin() / 60f64.to_radians().cos()).asin().to_degrees();
        let estimate = 1.0 / (60f64.to_radians().cos() + 1e-6);
        assert!(w_true > estimate);
        let dec_edge = (60f64.to_radians().sin() / 1f64.to_radians().cos()).asin().to_degrees();
        let p = sp(10.0 + w_true - 1e-5, dec_edge);
        assert!(arc_distance_deg(&p.to_vec(), &c.to_vec()) < 1.0);
        let t = ZoneTable::build(&[(1, p)], ZoneConfig::default()).unwrap();
        assert_eq!(t.nearby(c, 1.0).unwrap().len(), 1);
    }

    #[test]
    fn random_queries_match_brute_force() {
        let cat = uniform_catalog(21, 3000);
        let t = ZoneTable::build(&cat, ZoneConfig { zone_height: 0.5, ..ZoneConfig::default() }).unwrap();
        let mut rng = FixtureRng::new(22);
        for i in 0..150 {
            let c = match i % 3 {
                0 => rng.sky_point(),
                1 => rng.sky_point_in_band(88.5, 90.0),
                _ => rng.sky_point_in_ra_window(359.5, 1.0),
            };
            let r = rng.uniform(0.0, 1.0);
            let got: Vec<i64> = t.nearby(c, r).unwrap().iter().map(|m| m.0).collect();
            assert_eq!(got, brute(&cat, c, r));
        }
    }
}
