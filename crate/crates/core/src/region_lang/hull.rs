use super::CompileError;
use crate::geom::{any_perpendicular, Convex, HalfSpace, UnitVec3, Vec3};

const MAX_PERCEPTRON_STEPS: usize = 10_000;
const HEMISPHERE_MARGIN: f64 = 1e-9;

/// Smallest convex (great-circle edges) containing every point.
///
/// Finds a direction `w` with every point strictly in the open hemisphere
/// around it, projects onto the tangent plane at `w` (gnomonic projection
/// maps great circles to lines) and takes the planar hull there.
pub fn spherical_hull(points: &[UnitVec3]) -> Result<Convex, CompileError> {
    if points.len() < 3 {
        return Err(CompileError::DegenerateHull);
    }
    let w = hemisphere_direction(points).ok_or(CompileError::HullTooWide)?;
    let e1 = any_perpendicular(&w);
    let e2 = w.cross(&e1);
    let projected: Vec<(f64, f64, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let d = p.dot(&w);
            (p.dot_vec(e1.as_vec3()) / d, p.dot_vec(e2) / d, i)
        })
        .collect();
    let hull = planar_hull(projected);
    if hull.len() < 3 {
        return Err(CompileError::DegenerateHull);
    }
    let verts: Vec<UnitVec3> = hull.iter().map(|&i| points[i]).collect();
    let inside = verts
        .iter()
        .fold(Vec3::default(), |acc, v| acc + v.as_vec3())
        .normalize()
        .ok_or(CompileError::DegenerateHull)?;
    let mut constraints = Vec::with_capacity(verts.len());
    for i in 0..verts.len() {
        let a = verts[i];
        let b = verts[(i + 1) % verts.len()];
        let mut n = a.cross(&b).normalize().ok_or(CompileError::DegenerateHull)?;
        if n.dot(&inside) < 0.0 {
            n = n.negate();
        }
        constraints.push(HalfSpace::new(n, 0.0)?);
    }
    Ok(Convex::new(constraints))
}

/// A unit `w` with `w·p > 0` for every point, or `None` when the points do
/// not fit in an open hemisphere.
fn hemisphere_direction(points: &[UnitVec3]) -> Option<UnitVec3> {
    let sum = points.iter().fold(Vec3::default(), |acc, p| acc + p.as_vec3());
    let mut w = if sum.norm() > 1e-12 { sum * (1.0 / sum.norm()) } else { points[0].as_vec3() };
    for _ in 0..MAX_PERCEPTRON_STEPS {
        let unit = w.normalize()?;
        match points.iter().find(|p| p.dot(&unit) <= HEMISPHERE_MARGIN) {
            None => return Some(unit),
            Some(p) => w = unit.as_vec3() + p.as_vec3(),
        }
    }
    None
}

/// Andrew's monotone chain; returns indices of hull vertices in
/// counter-clockwise order without collinear points.
fn planar_hull(mut pts: Vec<(f64, f64, usize)>) -> Vec<usize> {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);
    if pts.len() < 3 {
        return pts.iter().map(|p| p.2).collect();
    }
    let cross = |o: &(f64, f64, usize), a: &(f64, f64, usize), b: &(f64, f64, usize)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut lower: Vec<(f64, f64, usize)> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<(f64, f64, usize)> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower.into_iter().map(|p| p.2).collect()
}
