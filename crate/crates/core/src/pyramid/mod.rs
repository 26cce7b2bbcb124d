//! Multi-scale zone pyramid over bounding circles.
//!
//! Scale `s` uses zones of height `h_s = base · 2^s`. An entry with
//! bounding radius `R` is stored at the smallest scale whose height is at
//! least `R`, in the zone of its center at that scale. A query circle of
//! radius `r` then only needs, at each scale, the zones within
//! `r + h_s` of its declination.
//!
//! Overlap search is a cascade; each stage's survivors are counted:
//!
//! 1. zone: entries in the candidate `(scale, zone)` buckets;
//! 2. ra: inside the scale-wide window `|Δra| <= W(dec, r + h_s)`;
//! 3. box: `|Δdec| < r + R` and `|Δra| <= W(dec, r + R)`;
//! 4. geometry: `sin²(Δdec/2) + cos δq cos δe sin²(Δra/2) < sin²((r+R)/2)`,
//!    the ra/dec form of the spherical distance test, with a relative
//!    slack so that it can only accept more;
//! 5. exact: arc distance between centers `< r + R`.

mod bounding;

use std::collections::{BTreeMap, HashSet};

use thiserror::Error;

pub use bounding::{bounding_circle, circle_intersections, max_dot, segment_elongated_region, Segment};

use crate::geom::{arc_distance_deg, SkyPoint, UnitVec3};
use crate::zone::{ra_half_width, zone_of};

const SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PyramidError {
    #[error("radius {0} must be in (0, 180] degrees")]
    BadRadius(f64),
    #[error("duplicate objId {0}")]
    DuplicateId(i64),
    #[error("base zone height {0} must be in (0, 180]")]
    BadBase(f64),
    #[error("region is empty")]
    EmptyRegion,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PyramidConfig {
    pub base_zone_height: f64,
    pub max_scale: u32,
    pub epsilon: f64,
}

impl PyramidConfig {
    pub fn new(base_zone_height: f64) -> Result<Self, PyramidError> {
        if !(base_zone_height.is_finite() && base_zone_height > 0.0 && base_zone_height <= 180.0) {
            return Err(PyramidError::BadBase(base_zone_height));
        }
        let mut max_scale = 0;
        while base_zone_height * 2f64.powi(max_scale as i32) < 180.0 {
            max_scale += 1;
        }
        Ok(Self {
            base_zone_height,
            max_scale,
            epsilon: 1e-6,
        })
    }

    pub fn scale_count(&self) -> u32 {
        self.max_scale + 1
    }

    pub fn zone_height(&self, scale: u32) -> f64 {
        self.base_zone_height * 2f64.powi(scale as i32)
    }

    /// Smallest scale whose zone height is at least `radius`.
    pub fn scale_of(&self, radius: f64) -> Result<u32, PyramidError> {
        if !(radius.is_finite() && radius > 0.0 && radius <= 180.0) {
            return Err(PyramidError::BadRadius(radius));
        }
        let mut s = 0;
        while s < self.max_scale && self.zone_height(s) < radius {
            s += 1;
        }
        Ok(s)
    }

    pub fn zone_of(&self, dec: f64, scale: u32) -> u32 {
        zone_of(dec, self.zone_height(scale))
    }

    /// `(scale, zone, scale height)` for every bucket that can hold an
    /// entry overlapping a circle of `radius` at `dec`. Overlap is strict,
    /// so the band `(dec - r - h, dec + r + h)` is open at both ends.
    pub fn candidate_zones(&self, dec: f64, radius: f64) -> Vec<(u32, u32, f64)> {
        let mut out = Vec::new();
        for s in 0..=self.max_scale {
            let h = self.zone_height(s);
            let lo = (dec - radius - h).max(-90.0);
            let hi = (dec + radius + h).min(90.0);
            let first = self.zone_of(lo, s);
            let last = ((((hi + 90.0) / h).ceil() as i64 - 1).max(first as i64) as u32).min(self.zone_of(90.0, s));
            for z in first..=last {
                out.push((s, z, h));
            }
        }
        out
    }
}

impl Default for PyramidConfig {
    fn default() -> Self {
        Self::new(0.5 / 60.0).expect("default base height is valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PyramidEntry {
    pub scale: u32,
    pub zone: u32,
    /// May be outside `[0, 360)` for margin copies.
    pub ra: f64,
    pub dec: f64,
    pub radius: f64,
    pub obj_id: i64,
    pub center: UnitVec3,
}

impl PyramidEntry {
    pub fn is_margin(&self) -> bool {
        self.ra < 0.0 || self.ra >= 360.0
    }
}

/// Survivors of each cascade stage for one query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OverlapStats {
    pub candidate_zones: usize,
    pub zone: usize,
    pub ra: usize,
    pub dec: usize,
    pub geometry: usize,
    pub exact: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZonePyramid {
    config: PyramidConfig,
    buckets: BTreeMap<(u32, u32), Vec<PyramidEntry>>,
    ids: HashSet<i64>,
}

fn wrapped_delta_ra(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    if d > 180.0 {
        360.0 - d
    } else {
        d
    }
}

impl ZonePyramid {
    pub fn new(config: PyramidConfig) -> Self {
        Self {
            config,
            buckets: BTreeMap::new(),
            ids: HashSet::new(),
        }
    }

    pub fn config(&self) -> &PyramidConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Stores the circle at its scale and zone. Entries near `ra = 0` or
    /// `360` also get a wrapped copy, using the scale height as margin.
    pub fn insert(&mut self, obj_id: i64, center: SkyPoint, radius: f64) -> Result<(), PyramidError> {
        self.extend(std::iter::once((obj_id, center, radius)))
    }

    /// Inserts many entries, sorting each touched bucket once. Stops at the
    /// first invalid entry; earlier ones stay inserted.
    pub fn extend(&mut self, items: impl IntoIterator<Item = (i64, SkyPoint, f64)>) -> Result<(), PyramidError> {
        let mut touched = HashSet::new();
        let mut result = Ok(());
        for (obj_id, center, radius) in items {
            let scale = match self.config.scale_of(radius) {
                Ok(s) => s,
                Err(e) => {
                    result = Err(e);
                    break;
                }
            };
            if !self.ids.insert(obj_id) {
                result = Err(PyramidError::DuplicateId(obj_id));
                break;
            }
            let entry = PyramidEntry {
                scale,
                zone: self.config.zone_of(center.dec(), scale),
                ra: center.ra(),
                dec: center.dec(),
                radius,
                obj_id,
                center: center.to_vec(),
            };
            let w = ra_half_width(entry.dec, self.config.zone_height(scale), self.config.epsilon);
            let key = (scale, entry.zone);
            let bucket = self.buckets.entry(key).or_default();
            bucket.push(entry);
            if entry.ra < w {
                bucket.push(PyramidEntry { ra: entry.ra + 360.0, ..entry });
            }
            if entry.ra >= 360.0 - w {
                bucket.push(PyramidEntry { ra: entry.ra - 360.0, ..entry });
            }
            touched.insert(key);
        }
        for key in touched {
            if let Some(b) = self.buckets.get_mut(&key) {
                b.sort_by(|a, b| a.ra.total_cmp(&b.ra).then(a.obj_id.cmp(&b.obj_id)));
            }
        }
        result
    }

    /// All stored rows, margin copies included, in key order.
    pub fn rows(&self) -> impl Iterator<Item = &PyramidEntry> {
        self.buckets.values().flatten()
    }

    /// One row per inserted entry.
    pub fn entries(&self) -> impl Iterator<Item = &PyramidEntry> {
        self.rows().filter(|e| !e.is_margin())
    }

    fn main_rows(&self, scale: u32, zone: u32) -> &[PyramidEntry] {
        match self.buckets.get(&(scale, zone)) {
            Some(b) => {
                let a = b.partition_point(|e| e.ra < 0.0);
                let z = b.partition_point(|e| e.ra < 360.0);
                &b[a..z]
            }
            None => &[],
        }
    }

    /// Entries whose bounding circle overlaps the query circle, sorted by
    /// objId.
    pub fn overlap_search(&self, center: SkyPoint, radius: f64) -> Vec<i64> {
        self.overlap_search_with_stats(center, radius).0
    }

    pub fn overlap_search_with_stats(&self, center: SkyPoint, radius: f64) -> (Vec<i64>, OverlapStats) {
        let mut stats = OverlapStats::default();
        let mut out = Vec::new();
        let (ra_q, dec_q) = (center.ra(), center.dec());
        let q = center.to_vec();
        let cos_q = dec_q.to_radians().cos();
        let eps = self.config.epsilon;
        let zones = self.config.candidate_zones(dec_q, radius.max(0.0));
        stats.candidate_zones = zones.len();
        for (s, z, h) in zones {
            let rows = self.main_rows(s, z);
            stats.zone += rows.len();
            if rows.is_empty() {
                continue;
            }
            let w = ra_half_width(dec_q, radius + h, eps);
            let mut consider = |e: &PyramidEntry| {
                stats.ra += 1;
                let reach = radius + e.radius;
                let dra = wrapped_delta_ra(e.ra, ra_q);
                if (e.dec - dec_q).abs() >= reach + SLACK || dra > ra_half_width(dec_q, reach, eps) {
                    return;
                }
                stats.dec += 1;
                if reach < 180.0 {
                    let sd = ((e.dec - dec_q).to_radians() / 2.0).sin();
                    let sr = (dra.to_radians() / 2.0).sin();
                    let hav = sd * sd + cos_q * e.dec.to_radians().cos() * sr * sr;
                    let lim = (reach.to_radians() / 2.0).sin().powi(2);
                    if hav >= lim * (1.0 + 1e-9) + 1e-18 {
                        return;
                    }
                }
                stats.geometry += 1;
                if arc_distance_deg(&e.center, &q) < reach {
                    stats.exact += 1;
                    out.push(e.obj_id);
                }
            };
            if w >= 180.0 {
                rows.iter().for_each(&mut consider);
            } else {
                let (lo, hi) = (ra_q - w, ra_q + w);
                let mut scan = |a: f64, b: f64| {
                    let i = rows.partition_point(|e| e.ra < a);
                    let j = rows.partition_point(|e| e.ra <= b);
                    rows[i..j.max(i)].iter().for_each(&mut consider);
                };
                scan(lo.max(0.0), hi.min(360.0));
                if lo < 0.0 {
                    scan(lo + 360.0, 360.0);
                }
                if hi >= 360.0 {
                    scan(0.0, hi - 360.0);
                }
            }
        }
        out.sort_unstable();
        (out, stats)
    }
}
