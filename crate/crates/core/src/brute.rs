//! Linear-scan reference answers. Slow on purpose: every index is checked
//! against these.

use crate::geom::{arc_distance_deg, Region, SkyPoint, UnitVec3};
use crate::htm::{point_to_htm_id, HtmRange};
use crate::zone::NeighborRow;

/// Objects strictly closer than `r` degrees to `center`, sorted by id.
pub fn nearby(catalog: &[(i64, SkyPoint)], center: SkyPoint, r: f64) -> Vec<(i64, f64)> {
    let c = center.to_vec();
    let mut out: Vec<(i64, f64)> = catalog
        .iter()
        .filter_map(|(id, p)| {
            let d = arc_distance_deg(&p.to_vec(), &c);
            (d < r).then_some((*id, d))
        })
        .collect();
    out.sort_by_key(|m| m.0);
    out
}

/// Like [`nearby`] over precomputed vectors; ids only.
pub fn nearby_ids(points: &[(i64, UnitVec3)], center: &UnitVec3, r: f64) -> Vec<i64> {
    let mut out: Vec<i64> = points
        .iter()
        .filter(|(_, p)| arc_distance_deg(p, center) < r)
        .map(|(id, _)| *id)
        .collect();
    out.sort_unstable();
    out
}

/// Every ordered pair closer than `r`, sorted by `(obj_id, neighbor_id)`.
pub fn neighbors(catalog: &[(i64, SkyPoint)], r: f64) -> Vec<NeighborRow> {
    let vecs: Vec<(i64, UnitVec3)> = catalog.iter().map(|(id, p)| (*id, p.to_vec())).collect();
    let mut out = Vec::new();
    for (i, (a, pa)) in vecs.iter().enumerate() {
        for (b, pb) in &vecs[i + 1..] {
            let d = arc_distance_deg(pa, pb);
            if d < r {
                out.push(NeighborRow { obj_id: *a, neighbor_id: *b, distance: d });
                out.push(NeighborRow { obj_id: *b, neighbor_id: *a, distance: d });
            }
        }
    }
    out.sort_by_key(|row| (row.obj_id, row.neighbor_id));
    out
}

/// Circles overlapping the query circle: `dist(centers) < r1 + r2`.
pub fn overlaps(entries: &[(i64, SkyPoint, f64)], center: SkyPoint, r: f64) -> Vec<i64> {
    let c = center.to_vec();
    let mut out: Vec<i64> = entries
        .iter()
        .filter(|(_, p, rr)| arc_distance_deg(&p.to_vec(), &c) < r + rr)
        .map(|e| e.0)
        .collect();
    out.sort_unstable();
    out
}

/// Points inside the region, sorted by id.
pub fn points_in_region(points: &[(i64, UnitVec3)], region: &Region) -> Vec<i64> {
    let mut out: Vec<i64> = points.iter().filter(|(_, p)| region.contains(p)).map(|(id, _)| *id).collect();
    out.sort_unstable();
    out
}

/// Points whose id at the ranges' depth falls in some range.
pub fn points_in_ranges(points: &[(i64, UnitVec3)], ranges: &[HtmRange]) -> Vec<i64> {
    let Some(depth) = ranges.first().map(HtmRange::depth) else {
        return Vec::new();
    };
    let mut out: Vec<i64> = points
        .iter()
        .filter(|(_, p)| {
            let id = point_to_htm_id(p, depth).expect("depth from a valid range");
            ranges.iter().any(|r| r.contains(id))
        })
        .map(|(id, _)| *id)
        .collect();
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearby_wraps() {
        let cat = vec![
            (1, SkyPoint::new(359.9, 0.0).unwrap()),
            (2, SkyPoint::new(0.1, 0.0).unwrap()),
            (3, SkyPoint::new(1.0, 0.0).unwrap()),
        ];
        let got: Vec<i64> = nearby(&cat, SkyPoint::new(0.05, 0.0).unwrap(), 0.2).iter().map(|m| m.0).collect();
        assert_eq!(got, vec![1, 2]);
        let rows = neighbors(&cat, 0.25);
        assert_eq!(rows.len(), 2);
        assert_eq!((rows[0].obj_id, rows[0].neighbor_id), (1, 2));
    }
}
