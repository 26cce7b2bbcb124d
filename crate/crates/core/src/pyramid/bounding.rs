//! Bounding circles and segmentation of long regions.

use crate::algebra::{region_and, simplify_region};
use crate::geom::{arc_distance_deg, rotate, Convex, HalfSpace, Region, UnitVec3, Vec3};

use super::PyramidError;

const FEASIBLE_TOL: f64 = 1e-12;
const CENTER_ITERATIONS: usize = 300;
const MAX_SEGMENTS: usize = 64;

/// Points on both circles `p·n1 = l1` and `p·n2 = l2`.
pub fn circle_intersections(a: &HalfSpace, b: &HalfSpace) -> Vec<UnitVec3> {
    let (n1, n2) = (a.normal(), b.normal());
    let c = n1.dot(&n2);
    let det = 1.0 - c * c;
    if det < 1e-15 {
        return Vec::new();
    }
    let x = (a.l() - b.l() * c) / det;
    let y = (b.l() - a.l() * c) / det;
    let base = n1.as_vec3() * x + n2.as_vec3() * y;
    let rest = 1.0 - base.dot(base);
    if rest < 0.0 {
        return Vec::new();
    }
    let m = n1.cross(&n2);
    let t = rest.sqrt() / m.norm();
    [base + m * t, base - m * t]
        .into_iter()
        .filter_map(|p| p.normalize())
        .collect()
}

fn feasible(c: &Convex, p: &UnitVec3) -> bool {
    c.constraints.iter().all(|h| h.normal().dot(p) >= h.l() - FEASIBLE_TOL)
}

fn convex_max_dot(c: &Convex, d: &UnitVec3) -> Option<(f64, UnitVec3)> {
    let mut best: Option<(f64, UnitVec3)> = None;
    let mut offer = |p: UnitVec3| {
        if feasible(c, &p) {
            let v = p.dot(d);
            if best.map_or(true, |(b, _)| v > b) {
                best = Some((v, p));
            }
        }
    };
    offer(*d);
    let hs = &c.constraints;
    for (i, h) in hs.iter().enumerate() {
        let n = h.normal();
        let s = (1.0 - h.l() * h.l()).max(0.0).sqrt();
        let t = d.as_vec3() - n.as_vec3() * d.dot(&n);
        let dir = t.normalize().unwrap_or_else(|| crate::geom::any_perpendicular(&n));
        if let Some(p) = (n.as_vec3() * h.l() + dir.as_vec3() * s).normalize() {
            offer(p);
        }
        for g in &hs[i + 1..] {
            for p in circle_intersections(h, g) {
                offer(p);
            }
        }
    }
    best
}

/// Maximum of `p·d` over the closure of the region, with the point that
/// attains it. `None` for an empty region.
///
/// The maximum is at `d` itself, at the point of a constraint circle
/// nearest `d`, or at a crossing of two circles; all three kinds are
/// tried.
pub fn max_dot(r: &Region, d: &UnitVec3) -> Option<(f64, UnitVec3)> {
    r.convexes
        .iter()
        .filter_map(|c| convex_max_dot(c, d))
        .max_by(|a, b| a.0.total_cmp(&b.0))
}

/// Largest distance (degrees) from `c` to a point of the region.
fn reach(r: &Region, c: &UnitVec3) -> Option<(f64, UnitVec3)> {
    let (v, p) = max_dot(r, &c.negate())?;
    Some(((-v).clamp(-1.0, 1.0).acos().to_degrees(), p))
}

/// A circle `(center, radius in degrees)` containing the region.
///
/// A single half-space gives its own circle. Otherwise the center is
/// found by Badoiu-Clarkson steps toward the farthest point; the radius is
/// the exact farthest distance from that center, so the circle always
/// contains the region even when the center is not optimal.
pub fn bounding_circle(r: &Region) -> Result<(UnitVec3, f64), PyramidError> {
    let s = simplify_region(r);
    if s.convexes.is_empty() {
        return Err(PyramidError::EmptyRegion);
    }
    if s.convexes.iter().any(Convex::is_empty) {
        return Ok((UnitVec3::Z, 180.0));
    }
    if s.convexes.len() == 1 && s.convexes[0].len() == 1 {
        let h = s.convexes[0].constraints[0];
        return Ok((h.normal(), h.radius_deg()));
    }
    let mut sum = Vec3::default();
    for d in [UnitVec3::X, UnitVec3::Y, UnitVec3::Z] {
        for e in [d, d.negate()] {
            if let Some((_, p)) = max_dot(&s, &e) {
                sum = sum + p.as_vec3();
            }
        }
    }
    let mut c = match sum.normalize() {
        Some(c) => c,
        None => s.convexes[0].constraints[0].normal(),
    };
    let (mut rad, mut far) = reach(&s, &c).ok_or(PyramidError::EmptyRegion)?;
    let mut best = (c, rad);
    for k in 1..=CENTER_ITERATIONS {
        let step = 1.0 / (k as f64 + 1.0);
        let next = c.as_vec3() + (far.as_vec3() - c.as_vec3()) * step;
        c = match next.normalize() {
            Some(v) => v,
            None => break,
        };
        (rad, far) = reach(&s, &c).ok_or(PyramidError::EmptyRegion)?;
        if rad < best.1 {
            best = (c, rad);
        }
    }
    let radius = (best.1 * (1.0 + 1e-12) + 1e-12).min(180.0);
    Ok((best.0, radius))
}

/// A piece of a segmented region; all pieces share the base id.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub base_id: i64,
    pub region: Region,
}

fn extreme_points(r: &Region) -> Vec<UnitVec3> {
    let mut pts = Vec::new();
    for c in &r.convexes {
        let hs = &c.constraints;
        for (i, h) in hs.iter().enumerate() {
            for g in &hs[i + 1..] {
                pts.extend(circle_intersections(h, g).into_iter().filter(|p| feasible(c, p)));
            }
        }
    }
    let mut dirs = vec![UnitVec3::X, UnitVec3::Y, UnitVec3::Z];
    dirs.extend(dirs.clone().iter().map(UnitVec3::negate));
    for c in &r.convexes {
        for h in &c.constraints {
            dirs.push(h.normal());
            dirs.push(h.normal().negate());
        }
    }
    for d in dirs {
        if let Some((_, p)) = max_dot(r, &d) {
            pts.push(p);
        }
    }
    pts
}

/// Splits a long, thin region into at most 64 pieces along its long axis,
/// aiming for pieces no longer than `max_aspect` times the width. A
/// compact region comes back as a single segment.
pub fn segment_elongated_region(r: &Region, base_id: i64, max_aspect: f64) -> Result<Vec<Segment>, PyramidError> {
    let s = simplify_region(r);
    if s.convexes.is_empty() {
        return Err(PyramidError::EmptyRegion);
    }
    let whole = || Ok(vec![Segment { base_id, region: s.clone() }]);
    if s.convexes.iter().any(Convex::is_empty) || !(max_aspect > 0.0) {
        return whole();
    }
    let pts = extreme_points(&s);
    let mut pair = None;
    let mut length = 0.0;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            let d = arc_distance_deg(a, b);
            if d > length {
                length = d;
                pair = Some((*a, *b));
            }
        }
    }
    let Some((a, b)) = pair else {
        return whole();
    };
    let Some(axis) = a.cross(&b).normalize() else {
        return whole();
    };
    let up = max_dot(&s, &axis).map_or(0.0, |(v, _)| v.clamp(-1.0, 1.0).asin());
    let down = max_dot(&s, &axis.negate()).map_or(0.0, |(v, _)| v.clamp(-1.0, 1.0).asin());
    let width = (up + down).to_degrees().max(1e-9);
    let n = ((length / (max_aspect * width)).ceil() as usize).clamp(1, MAX_SEGMENTS);
    if n == 1 {
        return whole();
    }
    // cut planes contain the axis pole; their normals are the direction of
    // travel at evenly spaced points from a to b
    let cuts: Vec<HalfSpace> = (1..n)
        .map(|k| {
            let q = rotate(&a, &axis, (length * k as f64 / n as f64).to_radians());
            let t = axis.cross(&q).normalize().expect("axis is perpendicular to q");
            HalfSpace::new(t, 0.0).expect("unit normal")
        })
        .collect();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut lune = Vec::new();
        if k > 0 {
            lune.push(cuts[k - 1]);
        }
        if k + 1 < n {
            lune.push(cuts[k].negate());
        }
        let piece = simplify_region(&region_and(&s, &Region::new(vec![Convex::new(lune)])));
        if !piece.convexes.is_empty() {
            out.push(Segment { base_id, region: piece });
        }
    }
    Ok(out)
}
