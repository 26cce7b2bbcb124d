//! Region simplification.
//!
//! Every decision reduces to one question: is a convex empty? That is
//! answered constructively. A non-empty convex that is not the whole sphere
//! has a boundary made of arcs of its constraint circles, and every such
//! arc runs between two consecutive crossings with other circles (or is a
//! full circle). So for each circle we take the midpoints between its
//! crossings, step slightly to the inner side and test the point. If no
//! candidate (nor any cap center) satisfies every constraint, the convex is
//! empty up to slivers thinner than the smallest step.
//!
//! With that test:
//! * a constraint `h` of `C` is redundant when `(C - h) ∧ ¬h` is empty;
//!   this covers dropping looser limits and holes that miss the patch;
//! * a convex `X` is dropped when some other convex `Y` contains it, i.e.
//!   `X ∧ ¬y` is empty for every constraint `y` of `Y`;
//! * `S·h + S·¬h` is merged back into `S`.

use std::f64::consts::TAU;

use crate::geom::{any_perpendicular, Convex, HalfSpace, Region, UnitVec3};

const STEPS: [f64; 5] = [1e-4, 1e-6, 1e-8, 1e-10, 1e-12];

fn satisfies(hs: &[HalfSpace], p: &UnitVec3) -> bool {
    hs.iter().all(|h| h.contains(p))
}

/// Crossing angles of circle `h` (parametrized by `u`, `w`) with the other
/// circles.
fn crossing_angles(hs: &[HalfSpace], i: usize, u: &UnitVec3, w: &UnitVec3, s: f64) -> Vec<f64> {
    let h = hs[i];
    let n = h.normal();
    let mut angles = Vec::new();
    for (j, g) in hs.iter().enumerate() {
        if j == i || g.l() <= -1.0 {
            continue;
        }
        let m = g.normal();
        let a = s * u.dot(&m);
        let b = s * w.dot(&m);
        let c = g.l() - h.l() * n.dot(&m);
        let r = a.hypot(b);
        if r < 1e-15 || c.abs() > r {
            continue;
        }
        let phi = b.atan2(a);
        let delta = (c / r).clamp(-1.0, 1.0).acos();
        for t in [phi + delta, phi - delta] {
            angles.push(t.rem_euclid(TAU));
        }
    }
    angles.sort_by(f64::total_cmp);
    angles
}

/// A point strictly inside every constraint, if one can be found.
pub fn convex_witness(hs: &[HalfSpace]) -> Option<UnitVec3> {
    if hs.is_empty() {
        return Some(UnitVec3::Z);
    }
    if hs.iter().any(|h| h.l() >= 1.0) {
        return None;
    }
    if let Some(h) = hs.iter().find(|h| satisfies(hs, &h.normal())) {
        return Some(h.normal());
    }
    for (i, h) in hs.iter().enumerate() {
        let l = h.l();
        if l <= -1.0 {
            continue;
        }
        let n = h.normal();
        let u = any_perpendicular(&n);
        let w = n.cross(&u).normalize()?;
        let s = (1.0 - l * l).max(0.0).sqrt();
        let angles = crossing_angles(hs, i, &u, &w, s);
        let mids: Vec<f64> = if angles.is_empty() {
            vec![0.0, std::f64::consts::PI]
        } else {
            (0..angles.len())
                .map(|k| {
                    let a = angles[k];
                    let b = if k + 1 < angles.len() { angles[k + 1] } else { angles[0] + TAU };
                    0.5 * (a + b)
                })
                .collect()
        };
        for t in mids {
            let (st, ct) = t.sin_cos();
            let on = n.as_vec3() * l + (u.as_vec3() * ct + w.as_vec3() * st) * s;
            for step in STEPS {
                if let Some(p) = (on + n.as_vec3() * step).normalize() {
                    if satisfies(hs, &p) {
                        return Some(p);
                    }
                }
            }
        }
    }
    None
}

fn is_empty(hs: &[HalfSpace]) -> bool {
    convex_witness(hs).is_none()
}

/// `x ⊆ y` (up to edges).
fn contained_in(x: &Convex, y: &Convex) -> bool {
    y.constraints.iter().all(|g| {
        let mut test = x.constraints.clone();
        test.push(g.negate());
        is_empty(&test)
    })
}

/// Drops constant-true and duplicate constraints, then redundant ones.
/// `None` when the convex is empty.
pub fn simplify_convex(c: &Convex) -> Option<Convex> {
    let mut hs: Vec<HalfSpace> = Vec::with_capacity(c.constraints.len());
    for h in &c.constraints {
        if h.l() >= 1.0 {
            return None;
        }
        if h.l() > -1.0 && !hs.contains(h) {
            hs.push(*h);
        }
    }
    if is_empty(&hs) {
        return None;
    }
    'outer: loop {
        for i in 0..hs.len() {
            let mut test: Vec<HalfSpace> = hs.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, h)| *h).collect();
            test.push(hs[i].negate());
            if is_empty(&test) {
                hs.remove(i);
                continue 'outer;
            }
        }
        break;
    }
    Some(Convex::new(hs))
}

fn negation_of(a: &HalfSpace, b: &HalfSpace) -> bool {
    let [x, y, z, l] = a.components();
    let [u, v, w, m] = b.components();
    (x + u).abs() < 1e-12 && (y + v).abs() < 1e-12 && (z + w).abs() < 1e-12 && (l + m).abs() < 1e-12
}

/// If `x = S + h` and `y = S + ¬h`, returns `S`.
fn complementary_merge(x: &Convex, y: &Convex) -> Option<Convex> {
    if x.constraints.len() != y.constraints.len() || x.constraints.is_empty() {
        return None;
    }
    let only_x: Vec<&HalfSpace> = x.constraints.iter().filter(|h| !y.constraints.contains(h)).collect();
    let only_y: Vec<&HalfSpace> = y.constraints.iter().filter(|h| !x.constraints.contains(h)).collect();
    if only_x.len() == 1 && only_y.len() == 1 && negation_of(only_x[0], only_y[0]) {
        let h = only_x[0];
        return Some(Convex::new(x.constraints.iter().filter(|g| *g != h).copied().collect()));
    }
    None
}

/// Membership-preserving cleanup, run to a fixed point: empty convexes
/// and redundant constraints are removed, complementary pairs are merged
/// and convexes contained in another convex are dropped.
pub fn simplify_region(r: &Region) -> Region {
    let mut convexes: Vec<Convex> = r.convexes.clone();
    loop {
        let before = convexes.clone();
        convexes = convexes.iter().filter_map(simplify_convex).collect();

        let mut i = 0;
        while i < convexes.len() {
            let dominated = (0..convexes.len()).any(|j| j != i && contained_in(&convexes[i], &convexes[j]));
            if dominated {
                convexes.remove(i);
            } else {
                i += 1;
            }
        }

        'merge: for i in 0..convexes.len() {
            for j in i + 1..convexes.len() {
                if let Some(m) = complementary_merge(&convexes[i], &convexes[j]) {
                    convexes[i] = m;
                    convexes.remove(j);
                    break 'merge;
                }
            }
        }

        if convexes == before {
            return Region::new(convexes);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{region_and, region_not, region_or};
    use crate::random::FixtureRng;
    use crate::region_lang::parse_region;

    fn hs(x: f64, y: f64, z: f64, l: f64) -> HalfSpace {
        HalfSpace::from_components(x, y, z, l).unwrap()
    }

    fn agree(a: &Region, b: &Region, seed: u64) {
        let mut rng = FixtureRng::new(seed);
        for _ in 0..5000 {
            let p = rng.unit_vec();
            if a.edge_margin(&p) < 1e-9 {
                continue;
            }
            assert_eq!(a.contains(&p), b.contains(&p), "disagree at {p:?}");
        }
    }

    #[test]
    fn looser_limit_dropped() {
        let c = Convex::new(vec![hs(0.0, 0.0, 1.0, 0.0), hs(0.0, 0.0, 1.0, -0.5)]);
        let s = simplify_convex(&c).unwrap();
        assert_eq!(s.constraints, vec![hs(0.0, 0.0, 1.0, 0.0)]);
    }

    #[test]
    fn contradiction_removed() {
        let r = Region::new(vec![Convex::new(vec![hs(0.0, 0.0, 1.0, 0.0), hs(0.0, 0.0, -1.0, 0.0)])]);
        assert!(simplify_region(&r).convexes.is_empty());
    }

    #[test]
    fn annulus_is_not_empty() {
        // a cap with a concentric hole: no circle crossings, centers excluded
        let c = vec![hs(0.0, 0.0, 1.0, 0.5), hs(0.0, 0.0, -1.0, -0.99)];
        let p = convex_witness(&c).unwrap();
        assert!(c.iter().all(|h| h.contains(&p)));
    }

    #[test]
    fn hole_outside_patch_dropped() {
        let small = parse_region("CIRCLE J2000 0 0 60").unwrap().convexes[0].constraints[0];
        let far_hole = parse_region("CIRCLE J2000 90 0 60").unwrap().convexes[0].constraints[0].negate();
        let near_hole = parse_region("CIRCLE J2000 0 0 10").unwrap().convexes[0].constraints[0].negate();
        let s = simplify_convex(&Convex::new(vec![small, far_hole, near_hole])).unwrap();
        assert_eq!(s.constraints, vec![small, near_hole]);
    }

    #[test]
    fn complementary_pair_merges() {
        let a = parse_region("CIRCLE J2000 10 10 300").unwrap();
        let b = parse_region("CONVEX 0 0 1 0.17").unwrap();
        let r = region_or(&region_and(&a, &b), &region_and(&a, &region_not(&b)));
        let s = simplify_region(&r);
        assert!(s.convexes.len() <= r.convexes.len());
        assert_eq!(s.convexes.len(), 1);
        agree(&r, &s, 1);
        agree(&a, &s, 2);
    }

    #[test]
    fn contained_convex_dropped_and_idempotent() {
        let r = parse_region("REGION CONVEX 0 0 1 0 CONVEX 0 0 1 0.5 CONVEX 0 0 1 0.2 1 0 0 0").unwrap();
        let s = simplify_region(&r);
        assert_eq!(s.convexes.len(), 1);
        assert_eq!(simplify_region(&s), s);
        agree(&r, &s, 3);
    }

    #[test]
    fn whole_sphere_absorbs() {
        let r = region_or(&parse_region("CONVEX 0 0 1 0").unwrap(), &Region::whole_sphere());
        assert_eq!(simplify_region(&r), Region::whole_sphere());
    }

    #[test]
    fn not_of_union_simplifies_consistently() {
        let a = parse_region("REGION CONVEX 0 0 1 0.2 1 0 0 0 CONVEX 0 1 0 0.5 0 0 -1 -0.3").unwrap();
        let n = region_not(&a);
        let s = simplify_region(&n);
        agree(&n, &s, 4);
        assert_eq!(simplify_region(&s), s);
    }
}
