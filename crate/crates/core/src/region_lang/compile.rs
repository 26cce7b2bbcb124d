use super::hull::spherical_hull;
use super::{CompileError, ConvexSpec, Coord, RegionSpec};
use crate::geom::{ArcAngle, Convex, HalfSpace, Region, SkyPoint, UnitVec3, Vec3};

const EDGE_EPS: f64 = 1e-12;

/// Lowers a parsed specification to half-space normal form.
pub fn compile(spec: &RegionSpec) -> Result<Region, CompileError> {
    match spec {
        RegionSpec::Circle {
            center,
            radius_arcmin,
            ..
        } => {
            let c = coord_vec(center)?;
            let r = ArcAngle::from_arcmin(*radius_arcmin)?;
            Ok(Region::circle(c, r))
        }
        RegionSpec::Rect { corners } => Ok(Region::new(vec![compile_rect(corners)?])),
        RegionSpec::Poly { points, .. } => {
            let pts = points.iter().map(coord_vec).collect::<Result<Vec<_>, _>>()?;
            Ok(Region::new(vec![compile_polygon(&pts)?]))
        }
        RegionSpec::Chull { points, .. } => {
            let pts = points.iter().map(coord_vec).collect::<Result<Vec<_>, _>>()?;
            Ok(Region::new(vec![spherical_hull(&pts)?]))
        }
        RegionSpec::Convex(c) => Ok(Region::new(vec![compile_convex(c)?])),
        RegionSpec::Region(cs) => Ok(Region::new(
            cs.iter().map(compile_convex).collect::<Result<_, _>>()?,
        )),
    }
}

fn coord_vec(c: &Coord) -> Result<UnitVec3, CompileError> {
    Ok(match *c {
        Coord::Sky { ra, dec } => SkyPoint::new(ra, dec)?.to_vec(),
        Coord::Cartesian { x, y, z } => UnitVec3::new(x, y, z)?,
    })
}

fn compile_convex(c: &ConvexSpec) -> Result<Convex, CompileError> {
    let hs = c
        .constraints
        .iter()
        .map(|&[x, y, z, d]| HalfSpace::from_components(x, y, z, d))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Convex::new(hs))
}

fn compile_rect(corners: &[(f64, f64); 2]) -> Result<Convex, CompileError> {
    let [(ra1, dec1), (ra2, dec2)] = *corners;
    // validates ranges; ra is used as given so that 350..370 style boxes work
    SkyPoint::new(ra1, dec1)?;
    SkyPoint::new(ra2, dec2)?;
    let (ra_lo, ra_hi) = (ra1.min(ra2), ra1.max(ra2));
    let (dec_lo, dec_hi) = (dec1.min(dec2), dec1.max(dec2));
    let width = ra_hi - ra_lo;
    if !(width > 0.0 && width < 180.0) {
        return Err(CompileError::RectTooWide(width));
    }
    if dec_hi <= dec_lo {
        return Err(CompileError::DegenerateRect);
    }
    let (s_lo, c_lo) = ra_lo.to_radians().sin_cos();
    let (s_hi, c_hi) = ra_hi.to_radians().sin_cos();
    Ok(Convex::new(vec![
        HalfSpace::new(UnitVec3::Z, dec_lo.to_radians().sin())?,
        HalfSpace::new(UnitVec3::Z.negate(), -dec_hi.to_radians().sin())?,
        HalfSpace::from_components(-s_lo, c_lo, 0.0, 0.0)?,
        HalfSpace::from_components(s_hi, -c_hi, 0.0, 0.0)?,
    ]))
}

/// Builds the convex bounded by great-circle edges between consecutive
/// vertices.
///
/// The interior side is the one holding the vertex centroid, so listing
/// order does not matter. When every edge lies on one great circle the
/// centroid cannot decide and vertices are taken as clockwise seen from
/// outside the sphere. An edge between antipodal vertices is routed through
/// the interior pole of a neighbouring edge.
pub fn compile_polygon(points: &[UnitVec3]) -> Result<Convex, CompileError> {
    let n = points.len();
    if n < 3 {
        return Err(CompileError::DegeneratePolygon(format!(
            "need at least 3 vertices, got {n}"
        )));
    }
    let mut raw: Vec<Option<Vec3>> = Vec::with_capacity(n);
    for i in 0..n {
        let a = points[i];
        let b = points[(i + 1) % n];
        let c = a.cross(&b);
        if c.norm() < EDGE_EPS {
            if a.dot(&b) > 0.0 {
                return Err(CompileError::DegenerateEdge(i, (i + 1) % n));
            }
            raw.push(None);
        } else {
            raw.push(Some(c * (1.0 / c.norm())));
        }
    }
    if raw.iter().all(Option::is_none) {
        return Err(CompileError::DegeneratePolygon("all edges are antipodal".into()));
    }

    let centroid = points
        .iter()
        .fold(Vec3::default(), |acc, p| acc + p.as_vec3())
        .normalize();
    let (mut pos, mut neg) = (0, 0);
    if let Some(c) = centroid {
        for nrm in raw.iter().flatten() {
            let s = c.dot_vec(*nrm);
            if s > EDGE_EPS {
                pos += 1;
            } else if s < -EDGE_EPS {
                neg += 1;
            }
        }
    }
    if pos > 0 && neg > 0 {
        return Err(CompileError::NonConvexPolygon);
    }
    let sign = if pos > 0 { 1.0 } else { -1.0 };

    let mut normals: Vec<Option<Vec3>> = raw.iter().map(|o| o.map(|v| v * sign)).collect();
    for i in 0..n {
        if normals[i].is_some() {
            continue;
        }
        let prev = normals[(i + n - 1) % n];
        let next = normals[(i + 1) % n];
        let pole = prev.or(next).ok_or_else(|| {
            CompileError::DegeneratePolygon("consecutive antipodal edges".into())
        })?;
        let c = points[i].as_vec3().cross(pole);
        let v = c.normalize().ok_or_else(|| {
            CompileError::DegeneratePolygon("antipodal edge has no defined route".into())
        })?;
        normals[i] = Some(v.as_vec3() * sign);
    }

    let mut constraints = Vec::with_capacity(n);
    for nrm in normals.into_iter().flatten() {
        let u = nrm.normalize().expect("edge normals are non-zero");
        constraints.push(HalfSpace::new(u, 0.0)?);
    }
    for h in &constraints {
        for p in points {
            if h.normal().dot(p) < -EDGE_EPS {
                return Err(CompileError::NonConvexPolygon);
            }
        }
    }
    let convex = Convex::new(constraints);
    let inward = convex
        .constraints
        .iter()
        .fold(Vec3::default(), |acc, h| acc + h.normal().as_vec3());
    let candidates = [centroid, inward.normalize()];
    if !candidates.iter().flatten().any(|p| convex.contains(p)) {
        return Err(CompileError::DegeneratePolygon("polygon has no interior".into()));
    }
    Ok(convex)
}
