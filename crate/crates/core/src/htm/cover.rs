use super::{base_trixels, HtmId, HtmRange, Trixel};
use crate::geom::{Convex, HalfSpace, Region, UnitVec3};

const EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Inside,
    Outside,
    Partial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoverBudget {
    pub max_ranges: usize,
    pub max_depth: u32,
}

impl Default for CoverBudget {
    fn default() -> Self {
        Self {
            max_ranges: 20,
            max_depth: 20,
        }
    }
}

/// Largest `n·p` over the great-circle arc from `a` to `b`.
fn max_dot_on_arc(n: &UnitVec3, a: &UnitVec3, b: &UnitVec3) -> f64 {
    let ends = n.dot(a).max(n.dot(b));
    let Some(g) = a.cross(b).normalize() else {
        return ends;
    };
    let ng = n.dot(&g);
    let m = n.as_vec3() - g.as_vec3() * ng;
    let Some(m) = m.normalize() else {
        // n is a pole of the arc's circle: constant along it
        return ends;
    };
    let within = a.cross(&m).dot(g.as_vec3()) >= 0.0 && m.cross(b).dot(g.as_vec3()) >= 0.0;
    if within {
        ends.max(n.dot(&m))
    } else {
        ends
    }
}

fn max_dot_on_edges(t: &Trixel, n: &UnitVec3) -> f64 {
    let [a, b, c] = &t.v;
    max_dot_on_arc(n, a, b)
        .max(max_dot_on_arc(n, b, c))
        .max(max_dot_on_arc(n, c, a))
}

fn classify_halfspace(t: &Trixel, h: &HalfSpace) -> Classification {
    let n = h.normal();
    let l = h.l();
    let dots = t.v.map(|v| n.dot(&v));
    let all_in = dots.iter().all(|&d| d > l + EPS);
    let all_out = dots.iter().all(|&d| d < l - EPS);
    if l >= 0.0 {
        // the cap is spherically convex
        if all_in {
            return Classification::Inside;
        }
        if all_out && !t.contains(&n) && max_dot_on_edges(t, &n) < l - EPS {
            return Classification::Outside;
        }
    } else {
        // the complement is a convex cap (a hole) centred on -n
        let hole = n.negate();
        if all_in && !t.contains(&hole) && max_dot_on_edges(t, &hole) < -l - EPS {
            return Classification::Inside;
        }
        if all_out {
            return Classification::Outside;
        }
    }
    Classification::Partial
}

/// Conservative trixel-vs-convex test: `Inside` and `Outside` are only
/// reported when certain.
pub fn classify_trixel(t: &Trixel, c: &Convex) -> Classification {
    let mut all_inside = true;
    for h in &c.constraints {
        match classify_halfspace(t, h) {
            Classification::Outside => return Classification::Outside,
            Classification::Partial => all_inside = false,
            Classification::Inside => {}
        }
    }
    if all_inside {
        Classification::Inside
    } else {
        Classification::Partial
    }
}

pub fn classify_trixel_region(t: &Trixel, r: &Region) -> Classification {
    let mut all_outside = true;
    for c in &r.convexes {
        match classify_trixel(t, c) {
            Classification::Inside => return Classification::Inside,
            Classification::Partial => all_outside = false,
            Classification::Outside => {}
        }
    }
    if all_outside {
        Classification::Outside
    } else {
        Classification::Partial
    }
}

/// Sorted, disjoint id ranges at one depth whose trixels cover every point
/// of `r`.
///
/// Partial trixels are refined breadth first until the next level would
/// hold more than `4·max_ranges` of them or `max_depth` is reached. Each
/// level yields a candidate cover (accepted trixels plus that level's
/// partial trixels); candidates are coalesced, the smallest id gaps are
/// bridged until at most `max_ranges` ranges remain, and the candidate with
/// the smallest area is returned.
pub fn htm_cover(r: &Region, budget: CoverBudget) -> Vec<HtmRange> {
    let max_ranges = budget.max_ranges.max(1);
    let mut accepted: Vec<HtmId> = Vec::new();
    let mut frontier: Vec<(HtmId, Trixel)> = base_trixels()
        .into_iter()
        .enumerate()
        .map(|(f, t)| (HtmId::face(f as u8), t))
        .collect();
    let mut best: Option<(f64, Vec<HtmRange>)> = None;
    let mut depth = 0;
    loop {
        let mut partial = Vec::new();
        for (id, t) in frontier {
            match classify_trixel_region(&t, r) {
                Classification::Inside => accepted.push(id),
                Classification::Partial => partial.push((id, t)),
                Classification::Outside => {}
            }
        }
        let ids: Vec<HtmId> = accepted.iter().copied().chain(partial.iter().map(|p| p.0)).collect();
        let ranges = limit_ranges(coalesce(&ids, depth), max_ranges);
        let area: f64 = ranges.iter().map(HtmRange::area).sum();
        if best.as_ref().is_none_or(|(a, _)| area < *a) {
            best = Some((area, ranges));
        }
        if partial.is_empty() || depth >= budget.max_depth || partial.len() > max_ranges {
            break;
        }
        frontier = partial
            .iter()
            .flat_map(|(id, t)| id.children().into_iter().zip(t.subdivide()))
            .collect();
        depth += 1;
    }
    best.map(|(_, r)| r).unwrap_or_default()
}

/// Expands ids (depth <= `depth`) to `depth`, sorts and merges touching
/// ranges.
pub(crate) fn coalesce(ids: &[HtmId], depth: u32) -> Vec<HtmRange> {
    let mut ranges: Vec<HtmRange> = ids.iter().map(|id| id.range_at(depth)).collect();
    ranges.sort();
    let mut out: Vec<HtmRange> = Vec::with_capacity(ranges.len());
    for r in ranges {
        match out.last_mut() {
            Some(last) if r.begin.raw() <= last.end.raw() + 1 => {
                if r.end > last.end {
                    last.end = r.end;
                }
            }
            _ => out.push(r),
        }
    }
    out
}

/// Bridges the smallest gaps until at most `max` ranges remain.
fn limit_ranges(mut ranges: Vec<HtmRange>, max: usize) -> Vec<HtmRange> {
    if ranges.len() <= max {
        return ranges;
    }
    let mut gaps: Vec<(u64, usize)> = ranges
        .windows(2)
        .enumerate()
        .map(|(i, w)| (w[1].begin.raw() - w[0].end.raw(), i))
        .collect();
    gaps.sort();
    let mut bridge = vec![false; ranges.len()];
    for &(_, i) in gaps.iter().take(ranges.len() - max) {
        bridge[i] = true;
    }
    let mut out: Vec<HtmRange> = Vec::with_capacity(max);
    for (i, r) in ranges.drain(..).enumerate() {
        if i > 0 && bridge[i - 1] {
            out.last_mut().unwrap().end = r.end;
        } else {
            out.push(r);
        }
    }
    out
}
