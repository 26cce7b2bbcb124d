//! Spherical geometry on the unit sphere.
//!
//! Positions are carried as Cartesian unit vectors so that containment tests
//! reduce to a dot product and a compare. Spherical areas are expressed in
//! disjunctive normal form: a [`Region`] is a union of [`Convex`]es, each of
//! which is an intersection of [`HalfSpace`]s. A point `p` is inside a
//! half-space `(n, l)` iff `p·n > l` (strictly); points exactly on an edge
//! belong to neither side.
//!
//! All angles are degrees unless a name says otherwise.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

/// Tolerance used when accepting caller-supplied vectors as unit length.
pub const UNIT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("declination {0} is outside [-90, 90]")]
    DecOutOfRange(f64),
    #[error("coordinate is not finite")]
    NotFinite,
    #[error("vector ({0}, {1}, {2}) has zero length")]
    ZeroVector(f64, f64, f64),
    #[error("vector ({x}, {y}, {z}) is not unit length (norm {norm})")]
    NotUnit { x: f64, y: f64, z: f64, norm: f64 },
    #[error("angle {0} degrees is outside [0, 360]")]
    AngleOutOfRange(f64),
    #[error("half-space length {0} is outside [-1, 1]")]
    LengthOutOfRange(f64),
}

/// Plain 3-vector used for intermediate arithmetic (cross products, sums).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Scales to unit length; `None` for a zero or non-finite vector.
    pub fn normalize(self) -> Option<UnitVec3> {
        let n = self.norm();
        if !n.is_finite() || n == 0.0 {
            return None;
        }
        Some(UnitVec3 {
            x: self.x / n,
            y: self.y / n,
            z: self.z / n,
        })
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// A position on the celestial sphere in equatorial coordinates.
///
/// `ra` is normalized into `[0, 360)`; `dec` must lie in `[-90, 90]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkyPoint {
    ra: f64,
    dec: f64,
}

impl SkyPoint {
    pub fn new(ra: f64, dec: f64) -> Result<Self, GeomError> {
        if !ra.is_finite() || !dec.is_finite() {
            return Err(GeomError::NotFinite);
        }
        if !(-90.0..=90.0).contains(&dec) {
            return Err(GeomError::DecOutOfRange(dec));
        }
        Ok(Self {
            ra: normalize_ra(ra),
            dec,
        })
    }

    pub fn ra(&self) -> f64 {
        self.ra
    }

    pub fn dec(&self) -> f64 {
        self.dec
    }

    pub fn to_vec(&self) -> UnitVec3 {
        sky_to_vec(*self)
    }
}

/// Maps any finite right ascension into `[0, 360)`.
pub fn normalize_ra(ra: f64) -> f64 {
    let r = ra.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

/// A Cartesian unit vector. The norm is 1 within 1e-12 by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVec3 {
    x: f64,
    y: f64,
    z: f64,
}

impl UnitVec3 {
    pub const X: UnitVec3 = UnitVec3 { x: 1.0, y: 0.0, z: 0.0 };
    pub const Y: UnitVec3 = UnitVec3 { x: 0.0, y: 1.0, z: 0.0 };
    pub const Z: UnitVec3 = UnitVec3 { x: 0.0, y: 0.0, z: 1.0 };

    /// Normalizes an arbitrary non-zero vector.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self, GeomError> {
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(GeomError::NotFinite);
        }
        // already unit to rounding: keep the bits so printed normals reparse exactly
        if (x * x + y * y + z * z - 1.0).abs() <= 4.0 * f64::EPSILON {
            return Ok(Self { x, y, z });
        }
        Vec3::new(x, y, z)
            .normalize()
            .ok_or(GeomError::ZeroVector(x, y, z))
    }

    /// Accepts components that already form a unit vector (within
    /// [`UNIT_TOLERANCE`]) and rejects anything else.
    pub fn from_unit_components(x: f64, y: f64, z: f64) -> Result<Self, GeomError> {
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(GeomError::NotFinite);
        }
        let norm = (x * x + y * y + z * z).sqrt();
        if (norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(GeomError::NotUnit { x, y, z, norm });
        }
        Ok(Self {
            x: x / norm,
            y: y / norm,
            z: z / norm,
        })
    }

    /// Wraps components without checking; callers guarantee unit length.
    pub(crate) const fn new_unchecked(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn x(&self) -> f64 {
        self.x
    }
    #[inline]
    pub fn y(&self) -> f64 {
        self.y
    }
    #[inline]
    pub fn z(&self) -> f64 {
        self.z
    }

    #[inline]
    pub fn as_vec3(&self) -> Vec3 {
        Vec3::new(self.x, self.y, self.z)
    }

    #[inline]
    pub fn dot(&self, o: &UnitVec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn dot_vec(&self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(&self, o: &UnitVec3) -> Vec3 {
        self.as_vec3().cross(o.as_vec3())
    }

    pub fn negate(&self) -> UnitVec3 {
        UnitVec3::new_unchecked(-self.x, -self.y, -self.z)
    }

    pub fn to_sky(&self) -> SkyPoint {
        vec_to_sky(self)
    }
}

impl From<UnitVec3> for Vec3 {
    fn from(v: UnitVec3) -> Vec3 {
        v.as_vec3()
    }
}

/// `(ra, dec)` to the unit vector `(cos dec cos ra, cos dec sin ra, sin dec)`.
pub fn sky_to_vec(p: SkyPoint) -> UnitVec3 {
    let (sin_ra, cos_ra) = p.ra.to_radians().sin_cos();
    let (sin_dec, cos_dec) = p.dec.to_radians().sin_cos();
    UnitVec3::new_unchecked(cos_dec * cos_ra, cos_dec * sin_ra, sin_dec)
}

/// Inverse of [`sky_to_vec`]. At the poles the right ascension is undefined
/// and reported as 0.
pub fn vec_to_sky(v: &UnitVec3) -> SkyPoint {
    let z = v.z.clamp(-1.0, 1.0);
    if (z.abs() - 1.0).abs() <= 1e-12 {
        return SkyPoint {
            ra: 0.0,
            dec: if z > 0.0 { 90.0 } else { -90.0 },
        };
    }
    let dec = v.z.atan2(v.x.hypot(v.y)).to_degrees();
    let ra = normalize_ra(v.y.atan2(v.x).to_degrees());
    SkyPoint {
        ra,
        dec: dec.clamp(-90.0, 90.0),
    }
}

/// Angular distance in degrees from the chord length:
/// `degrees(2·asin(|a − b| / 2))`. Well conditioned for tiny separations,
/// unlike `acos(a·b)`.
pub fn arc_distance_deg(a: &UnitVec3, b: &UnitVec3) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    let dz = a.z - b.z;
    let half_chord = ((dx * dx + dy * dy + dz * dz).sqrt() / 2.0).min(1.0);
    (2.0 * half_chord.asin()).to_degrees()
}

/// Squared chord length between two unit vectors.
#[inline]
pub fn chord_sq(a: &UnitVec3, b: &UnitVec3) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    let dz = a.z - b.z;
    dx * dx + dy * dy + dz * dz
}

/// Squared chord length subtended by an arc of `radius_deg`: `4·sin²(r/2)`.
#[inline]
pub fn chord_sq_for_radius(radius_deg: f64) -> f64 {
    let s = (radius_deg.to_radians() / 2.0).sin();
    4.0 * s * s
}

/// A non-negative arc angle, stored in degrees, at most 360.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ArcAngle(f64);

impl ArcAngle {
    pub const ZERO: ArcAngle = ArcAngle(0.0);

    pub fn from_degrees(deg: f64) -> Result<Self, GeomError> {
        if !deg.is_finite() {
            return Err(GeomError::NotFinite);
        }
        if !(0.0..=360.0).contains(&deg) {
            return Err(GeomError::AngleOutOfRange(deg));
        }
        Ok(Self(deg))
    }

    pub fn from_arcmin(arcmin: f64) -> Result<Self, GeomError> {
        Self::from_degrees(arcmin / 60.0)
    }

    pub fn from_arcsec(arcsec: f64) -> Result<Self, GeomError> {
        Self::from_degrees(arcsec / 3600.0)
    }

    pub fn degrees(&self) -> f64 {
        self.0
    }

    pub fn radians(&self) -> f64 {
        self.0.to_radians()
    }

    pub fn arcmin(&self) -> f64 {
        self.0 * 60.0
    }
}

impl fmt::Display for ArcAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}°", self.0)
    }
}

/// The open cap `{p : p·normal > l}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfSpace {
    normal: UnitVec3,
    l: f64,
}

impl HalfSpace {
    pub fn new(normal: UnitVec3, l: f64) -> Result<Self, GeomError> {
        if !l.is_finite() {
            return Err(GeomError::NotFinite);
        }
        if !(-1.0..=1.0).contains(&l) {
            return Err(GeomError::LengthOutOfRange(l));
        }
        Ok(Self { normal, l })
    }

    /// Builds from raw `(x, y, z, l)`; the normal is normalized.
    pub fn from_components(x: f64, y: f64, z: f64, l: f64) -> Result<Self, GeomError> {
        Self::new(UnitVec3::new(x, y, z)?, l)
    }

    /// The cap of points strictly closer than `radius` to `center`.
    pub fn from_circle(center: UnitVec3, radius: ArcAngle) -> Self {
        let r = radius.degrees().min(180.0);
        Self {
            normal: center,
            l: r.to_radians().cos().clamp(-1.0, 1.0),
        }
    }

    pub fn normal(&self) -> UnitVec3 {
        self.normal
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    /// `(x, y, z, l)`.
    pub fn components(&self) -> [f64; 4] {
        [self.normal.x, self.normal.y, self.normal.z, self.l]
    }

    #[inline]
    pub fn contains(&self, p: &UnitVec3) -> bool {
        self.normal.dot(p) > self.l
    }

    /// Angular radius of the cap in degrees.
    pub fn radius_deg(&self) -> f64 {
        self.l.clamp(-1.0, 1.0).acos().to_degrees()
    }

    /// The complement (off the edge): every component multiplied by −1.
    pub fn negate(&self) -> HalfSpace {
        HalfSpace {
            normal: self.normal.negate(),
            l: -self.l,
        }
    }

    /// Grows the cap by `theta`: `l' = cos(acos(l) + θ)`, clamped to −1 once
    /// the cap would cover the whole sphere.
    pub fn buffer(&self, theta: ArcAngle) -> HalfSpace {
        if theta.degrees() == 0.0 {
            return *self;
        }
        let widened = self.l.clamp(-1.0, 1.0).acos() + theta.radians();
        let l = if widened >= std::f64::consts::PI {
            -1.0
        } else {
            widened.cos().min(self.l)
        };
        HalfSpace {
            normal: self.normal,
            l,
        }
    }
}

/// Intersection of half-spaces. No constraints means the whole sphere.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Convex {
    pub constraints: Vec<HalfSpace>,
}

impl Convex {
    pub fn new(constraints: Vec<HalfSpace>) -> Self {
        Self { constraints }
    }

    pub fn whole_sphere() -> Self {
        Self::default()
    }

    pub fn contains(&self, p: &UnitVec3) -> bool {
        self.constraints.iter().all(|h| h.contains(p))
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn buffer(&self, theta: ArcAngle) -> Convex {
        Convex::new(self.constraints.iter().map(|h| h.buffer(theta)).collect())
    }
}

/// Union of convexes. No convexes means the empty region.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Region {
    pub convexes: Vec<Convex>,
}

impl Region {
    pub fn new(convexes: Vec<Convex>) -> Self {
        Self { convexes }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn whole_sphere() -> Self {
        Self::new(vec![Convex::whole_sphere()])
    }

    pub fn from_halfspace(h: HalfSpace) -> Self {
        Self::new(vec![Convex::new(vec![h])])
    }

    pub fn circle(center: UnitVec3, radius: ArcAngle) -> Self {
        Self::from_halfspace(HalfSpace::from_circle(center, radius))
    }

    pub fn contains(&self, p: &UnitVec3) -> bool {
        self.convexes.iter().any(|c| c.contains(p))
    }

    pub fn buffer(&self, theta: ArcAngle) -> Region {
        Region::new(self.convexes.iter().map(|c| c.buffer(theta)).collect())
    }

    /// Iterates over every constraint of every convex.
    pub fn halfspaces(&self) -> impl Iterator<Item = &HalfSpace> {
        self.convexes.iter().flat_map(|c| c.constraints.iter())
    }

    /// Smallest `|p·n − l|` over all constraints; a measure of how close `p`
    /// is to an edge of the region.
    pub fn edge_margin(&self, p: &UnitVec3) -> f64 {
        self.halfspaces()
            .map(|h| (h.normal.dot(p) - h.l).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn inside_halfspace(h: &HalfSpace, p: &UnitVec3) -> bool {
    h.contains(p)
}

pub fn inside_convex(c: &Convex, p: &UnitVec3) -> bool {
    c.contains(p)
}

pub fn inside_region(r: &Region, p: &UnitVec3) -> bool {
    r.contains(p)
}

pub fn buffer_region(r: &Region, theta: ArcAngle) -> Region {
    r.buffer(theta)
}

pub fn circle_to_halfspace(center: UnitVec3, radius: ArcAngle) -> HalfSpace {
    HalfSpace::from_circle(center, radius)
}

/// Rotates `v` about the unit `axis` by `angle_rad` (Rodrigues).
pub fn rotate(v: &UnitVec3, axis: &UnitVec3, angle_rad: f64) -> UnitVec3 {
    let (s, c) = angle_rad.sin_cos();
    let k = axis.as_vec3();
    let vv = v.as_vec3();
    let r = vv * c + k.cross(vv) * s + k * (k.dot(vv) * (1.0 - c));
    r.normalize().unwrap_or(*v)
}

/// Any unit vector perpendicular to `v`.
pub fn any_perpendicular(v: &UnitVec3) -> UnitVec3 {
    let helper = if v.x.abs() < 0.9 { Vec3::new(1.0, 0.0, 0.0) } else { Vec3::new(0.0, 1.0, 0.0) };
    v.as_vec3()
        .cross(helper)
        .normalize()
        .expect("helper axis is never parallel to v")
}
