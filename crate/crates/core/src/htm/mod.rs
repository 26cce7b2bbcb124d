//! Hierarchical Triangular Mesh.
//!
//! The sphere starts as the 8 faces of an octahedron; every trixel splits
//! into 4 by joining its edge midpoints. A trixel id is a leading `1` bit,
//! three face bits and one 2-bit digit per level, so a depth-`d` id has
//! exactly `4 + 2d` significant bits and face ids are `8..=15`. Shifting an
//! id right by two gives its parent, which makes prefix containment and
//! geometric containment the same thing.
//!
//! Face corners, with `v0 = +z`, `v1 = +x`, `v2 = +y`, `v3 = -x`,
//! `v4 = -y`, `v5 = -z` (counter-clockwise seen from outside):
//!
//! | face | id | corners |
//! |------|----|---------|
//! | N0 | 8  | v1 v0 v4 |
//! | N1 | 9  | v4 v0 v3 |
//! | N2 | 10 | v3 v0 v2 |
//! | N3 | 11 | v2 v0 v1 |
//! | S0 | 12 | v1 v5 v2 |
//! | S1 | 13 | v2 v5 v3 |
//! | S2 | 14 | v3 v5 v4 |
//! | S3 | 15 | v4 v5 v1 |
//!
//! Children of `(c0, c1, c2)` with `w0 = mid(c1, c2)`, `w1 = mid(c0, c2)`,
//! `w2 = mid(c0, c1)`: child 0 `(c0, w2, w1)`, child 1 `(c1, w0, w2)`,
//! child 2 `(c2, w1, w0)`, child 3 `(w0, w1, w2)`.

mod cover;
mod index;

use std::fmt;

use thiserror::Error;

pub use cover::{classify_trixel, classify_trixel_region, htm_cover, Classification, CoverBudget};
pub use index::{HtmPointIndex, HtmQueryStats};

use crate::geom::{UnitVec3, Vec3};

pub const MAX_DEPTH: u32 = 30;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HtmError {
    #[error("depth {0} is outside 0..=30")]
    DepthOutOfRange(u32),
    #[error("{0} is not a trixel id (missing leading marker bit)")]
    Malformed(u64),
    #[error("range endpoints {0} and {1} differ in depth or are out of order")]
    BadRange(u64, u64),
}

/// A trixel identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HtmId(u64);

impl HtmId {
    pub fn new(raw: u64) -> Result<Self, HtmError> {
        let bits = 64 - raw.leading_zeros();
        if bits < 4 || bits % 2 != 0 {
            return Err(HtmError::Malformed(raw));
        }
        Ok(Self(raw))
    }

    /// Depth-0 id of face `0..8`.
    pub fn face(face: u8) -> Self {
        assert!(face < 8, "face index {face} out of range");
        Self(8 + face as u64)
    }

    pub fn raw(self) -> u64 {
        self.0
    }

    pub fn depth(self) -> u32 {
        (64 - self.0.leading_zeros() - 4) / 2
    }

    pub fn face_index(self) -> u8 {
        ((self.0 >> (2 * self.depth())) - 8) as u8
    }

    pub fn parent(self) -> Option<HtmId> {
        (self.depth() > 0).then_some(Self(self.0 >> 2))
    }

    pub fn child(self, digit: u8) -> HtmId {
        debug_assert!(digit < 4 && self.depth() < MAX_DEPTH);
        Self(self.0 << 2 | digit as u64)
    }

    pub fn children(self) -> [HtmId; 4] {
        [0, 1, 2, 3].map(|d| self.child(d))
    }

    /// Digits from the face downward.
    pub fn digits(self) -> Vec<u8> {
        let d = self.depth();
        (0..d).rev().map(|k| ((self.0 >> (2 * k)) & 3) as u8).collect()
    }

    /// True iff `self` is `other` or one of its ancestors.
    pub fn contains(self, other: HtmId) -> bool {
        prefix_contains(self, other)
    }

    /// The descendants of `self` at `depth` (>= own depth) as one range.
    pub fn range_at(self, depth: u32) -> HtmRange {
        let shift = 2 * (depth - self.depth());
        HtmRange {
            begin: HtmId(self.0 << shift),
            end: HtmId((self.0 << shift) | ((1u64 << shift) - 1)),
        }
    }
}

impl fmt::Display for HtmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn prefix_contains(a: HtmId, b: HtmId) -> bool {
    let (da, db) = (a.depth(), b.depth());
    da <= db && b.0 >> (2 * (db - da)) == a.0
}

/// Inclusive id range at a single depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HtmRange {
    pub begin: HtmId,
    pub end: HtmId,
}

impl HtmRange {
    pub fn new(begin: HtmId, end: HtmId) -> Result<Self, HtmError> {
        if begin.depth() != end.depth() || begin > end {
            return Err(HtmError::BadRange(begin.0, end.0));
        }
        Ok(Self { begin, end })
    }

    pub fn depth(&self) -> u32 {
        self.begin.depth()
    }

    /// Number of ids in the range.
    pub fn len(&self) -> u64 {
        self.end.0 - self.begin.0 + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The same set of points expressed at a deeper level.
    pub fn at_depth(&self, depth: u32) -> HtmRange {
        assert!(depth >= self.depth());
        HtmRange {
            begin: self.begin.range_at(depth).begin,
            end: self.end.range_at(depth).end,
        }
    }

    /// Whether the trixel `id` (at any depth >= the range depth) falls in
    /// the range.
    pub fn contains(&self, id: HtmId) -> bool {
        let d = self.depth();
        if id.depth() < d {
            return false;
        }
        let a = id.0 >> (2 * (id.depth() - d));
        self.begin.0 <= a && a <= self.end.0
    }

    /// Largest aligned blocks (whole trixels of varying depth) that tile
    /// the range exactly.
    pub fn blocks(&self) -> Vec<HtmId> {
        let mut out = Vec::new();
        let mut lo = self.begin.0;
        let hi = self.end.0;
        let depth = self.depth();
        while lo <= hi {
            let mut k = 0;
            // grow the block while it stays aligned, within the range, and
            // does not climb above the face level
            while k < depth
                && lo & ((1u64 << (2 * (k + 1))) - 1) == 0
                && lo + (1u64 << (2 * (k + 1))) - 1 <= hi
            {
                k += 1;
            }
            out.push(HtmId(lo >> (2 * k)));
            lo += 1u64 << (2 * k);
        }
        out
    }

    /// Total solid angle of the range in steradians.
    pub fn area(&self) -> f64 {
        self.blocks().into_iter().map(|id| trixel(id).area()).sum()
    }
}

impl fmt::Display for HtmRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.begin, self.end)
    }
}

/// A spherical triangle with corners ordered counter-clockwise seen from
/// outside the sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trixel {
    pub v: [UnitVec3; 3],
}

const V: [UnitVec3; 6] = [
    UnitVec3::Z,
    UnitVec3::X,
    UnitVec3::Y,
    UnitVec3::new_unchecked(-1.0, 0.0, 0.0),
    UnitVec3::new_unchecked(0.0, -1.0, 0.0),
    UnitVec3::new_unchecked(0.0, 0.0, -1.0),
];

const FACE_CORNERS: [[usize; 3]; 8] = [
    [1, 0, 4],
    [4, 0, 3],
    [3, 0, 2],
    [2, 0, 1],
    [1, 5, 2],
    [2, 5, 3],
    [3, 5, 4],
    [4, 5, 1],
];

pub fn base_trixels() -> [Trixel; 8] {
    FACE_CORNERS.map(|[a, b, c]| Trixel { v: [V[a], V[b], V[c]] })
}

fn midpoint(a: &UnitVec3, b: &UnitVec3) -> UnitVec3 {
    (a.as_vec3() + b.as_vec3())
        .normalize()
        .expect("trixel corners are never antipodal")
}

impl Trixel {
    pub fn midpoints(&self) -> [UnitVec3; 3] {
        let [c0, c1, c2] = &self.v;
        [midpoint(c1, c2), midpoint(c0, c2), midpoint(c0, c1)]
    }

    pub fn subdivide(&self) -> [Trixel; 4] {
        let [c0, c1, c2] = self.v;
        let [w0, w1, w2] = self.midpoints();
        [
            Trixel { v: [c0, w2, w1] },
            Trixel { v: [c1, w0, w2] },
            Trixel { v: [c2, w1, w0] },
            Trixel { v: [w0, w1, w2] },
        ]
    }

    /// Inward edge normals (not normalized): `ci × c(i+1)`.
    pub fn edge_normals(&self) -> [Vec3; 3] {
        let [a, b, c] = &self.v;
        [a.cross(b), b.cross(c), c.cross(a)]
    }

    /// Closed containment: on an edge counts as inside.
    pub fn contains(&self, p: &UnitVec3) -> bool {
        self.edge_normals().iter().all(|n| p.dot_vec(*n) >= 0.0)
    }

    /// Smallest `(ci × cj)·p` over the three edges; negative outside.
    pub fn edge_margin(&self, p: &UnitVec3) -> f64 {
        self.edge_normals()
            .iter()
            .map(|n| p.dot_vec(*n))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn centroid(&self) -> UnitVec3 {
        let [a, b, c] = &self.v;
        (a.as_vec3() + b.as_vec3() + c.as_vec3())
            .normalize()
            .expect("trixel corners span a non-degenerate triangle")
    }

    /// Solid angle (spherical excess) in steradians.
    pub fn area(&self) -> f64 {
        let [a, b, c] = &self.v;
        let triple = a.dot_vec(b.cross(c)).abs();
        let denom = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
        2.0 * triple.atan2(denom)
    }

    /// Longest edge in arcseconds.
    pub fn max_edge_arcsec(&self) -> f64 {
        let [a, b, c] = &self.v;
        [(a, b), (b, c), (c, a)]
            .iter()
            .map(|(p, q)| crate::geom::arc_distance_deg(p, q) * 3600.0)
            .fold(0.0, f64::max)
    }
}

/// Geometry of a trixel, found by descending its digit path.
pub fn trixel(id: HtmId) -> Trixel {
    let mut t = base_trixels()[id.face_index() as usize];
    for d in id.digits() {
        t = t.subdivide()[d as usize];
    }
    t
}

pub fn htm_id_to_trixel(raw: u64) -> Result<Trixel, HtmError> {
    Ok(trixel(HtmId::new(raw)?))
}

/// Id of the depth-`depth` trixel containing `p`.
///
/// On shared edges the lowest face, then the lowest child digit, whose
/// closed triangle contains the point wins.
pub fn point_to_htm_id(p: &UnitVec3, depth: u32) -> Result<HtmId, HtmError> {
    if depth > MAX_DEPTH {
        return Err(HtmError::DepthOutOfRange(depth));
    }
    let faces = base_trixels();
    let face = (0..8)
        .find(|&f| faces[f].contains(p))
        .unwrap_or_else(|| nearest_face(&faces, p));
    let mut id = HtmId::face(face as u8);
    let mut t = faces[face];
    for _ in 0..depth {
        let [c0, c1, c2] = t.v;
        let [w0, w1, w2] = t.midpoints();
        let digit = if p.dot_vec(w2.cross(&w1)) >= 0.0 {
            0
        } else if p.dot_vec(w0.cross(&w2)) >= 0.0 {
            1
        } else if p.dot_vec(w1.cross(&w0)) >= 0.0 {
            2
        } else {
            3
        };
        t = match digit {
            0 => Trixel { v: [c0, w2, w1] },
            1 => Trixel { v: [c1, w0, w2] },
            2 => Trixel { v: [c2, w1, w0] },
            _ => Trixel { v: [w0, w1, w2] },
        };
        id = id.child(digit);
    }
    Ok(id)
}

// Faces are bounded by coordinate planes, so the closed test is exact and
// this fallback only matters for non-finite input.
fn nearest_face(faces: &[Trixel; 8], p: &UnitVec3) -> usize {
    (0..8)
        .max_by(|&a, &b| faces[a].edge_margin(p).total_cmp(&faces[b].edge_margin(p)))
        .unwrap()
}
