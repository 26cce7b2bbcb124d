//! Spherical spatial search.
//!
//! Three complementary ways to find things on the celestial sphere:
//!
//! * [`htm`]: a Hierarchical Triangular Mesh. Points get 64-bit trixel ids
//!   whose prefixes encode containment; regions are approximated by sorted
//!   id ranges usable as ordered-index scans.
//! * [`zone`]: declination stripes keyed `(zone, ra)`. Cone searches and
//!   bulk neighbor joins become range scans followed by an exact chord test.
//! * [`algebra`]: regions as unions of convexes of half-space constraints,
//!   with OR/AND/NOT, simplification, and point/region queries. [`pyramid`]
//!   indexes region bounding circles in a multi-scale zone pyramid.
//!
//! [`region_lang`] parses and prints the textual region notation, and
//! [`catalog`] handles CSV ingest and binary snapshots.

pub mod algebra;
pub mod brute;
pub mod catalog;
pub mod geom;
pub mod htm;
pub mod pyramid;
pub mod random;
pub mod region_lang;
pub mod zone;

pub use geom::{ArcAngle, Convex, HalfSpace, Region, SkyPoint, UnitVec3};
