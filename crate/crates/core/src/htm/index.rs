use super::{htm_cover, point_to_htm_id, CoverBudget, HtmError, HtmId, HtmRange};
use crate::geom::{arc_distance_deg, ArcAngle, Region, UnitVec3};

/// Points sorted by HTM id, queried through covers.
#[derive(Debug, Clone, PartialEq)]
pub struct HtmPointIndex {
    depth: u32,
    entries: Vec<(u64, i64, UnitVec3)>,
}

/// Work done by one index query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct HtmQueryStats {
    pub ranges: usize,
    pub candidates: usize,
    pub matches: usize,
}

impl HtmPointIndex {
    pub fn build(points: &[(i64, UnitVec3)], depth: u32) -> Result<Self, HtmError> {
        let mut entries = Vec::with_capacity(points.len());
        for (id, p) in points {
            entries.push((point_to_htm_id(p, depth)?.raw(), *id, *p));
        }
        entries.sort_by_key(|e| (e.0, e.1));
        Ok(Self { depth, entries })
    }

    /// Uses ids already computed at `depth`.
    pub fn from_ids(depth: u32, items: impl IntoIterator<Item = (HtmId, i64, UnitVec3)>) -> Self {
        let mut entries: Vec<(u64, i64, UnitVec3)> = items.into_iter().map(|(h, id, p)| (h.raw(), id, p)).collect();
        entries.sort_by_key(|e| (e.0, e.1));
        Self { depth, entries }
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Points whose ids fall in the ranges (which may be at any depth up to
    /// the index depth).
    pub fn scan<'a>(&'a self, ranges: &'a [HtmRange]) -> impl Iterator<Item = (i64, &'a UnitVec3)> + 'a {
        ranges.iter().flat_map(move |r| {
            let r = r.at_depth(self.depth);
            let a = self.entries.partition_point(|e| e.0 < r.begin.raw());
            let b = self.entries.partition_point(|e| e.0 <= r.end.raw());
            self.entries[a..b.max(a)].iter().map(|e| (e.1, &e.2))
        })
    }

    /// Cover the region, scan the ranges, then test each candidate.
    pub fn region_query(&self, region: &Region, budget: CoverBudget) -> (Vec<i64>, HtmQueryStats) {
        let budget = CoverBudget {
            max_depth: budget.max_depth.min(self.depth),
            ..budget
        };
        let ranges = htm_cover(region, budget);
        self.filtered(&ranges, |p| region.contains(p))
    }

    /// Points strictly closer than `r` degrees to `center`.
    pub fn cone(&self, center: &UnitVec3, r: f64, budget: CoverBudget) -> (Vec<i64>, HtmQueryStats) {
        let budget = CoverBudget {
            max_depth: budget.max_depth.min(self.depth),
            ..budget
        };
        let Ok(radius) = ArcAngle::from_degrees(r) else {
            return (Vec::new(), HtmQueryStats::default());
        };
        let ranges = htm_cover(&Region::circle(*center, radius), budget);
        self.filtered(&ranges, |p| arc_distance_deg(p, center) < r)
    }

    fn filtered(&self, ranges: &[HtmRange], keep: impl Fn(&UnitVec3) -> bool) -> (Vec<i64>, HtmQueryStats) {
        let mut stats = HtmQueryStats {
            ranges: ranges.len(),
            ..Default::default()
        };
        let mut out = Vec::new();
        for (id, p) in self.scan(ranges) {
            stats.candidates += 1;
            if keep(p) {
                out.push(id);
            }
        }
        out.sort_unstable();
        out.dedup();
        stats.matches = out.len();
        (out, stats)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brute;
    use crate::random::FixtureRng;

    #[test]
    fn cone_matches_scan() {
        let mut rng = FixtureRng::new(21);
        let pts: Vec<(i64, UnitVec3)> = (0..5000).map(|i| (i, rng.unit_vec())).collect();
        let idx = HtmPointIndex::build(&pts, 20).unwrap();
        for _ in 0..50 {
            let c = rng.unit_vec();
            let r = rng.uniform(0.5, 10.0);
            let (got, st) = idx.cone(&c, r, CoverBudget::default());
            assert_eq!(got, brute::nearby_ids(&pts, &c, r));
            assert!(st.candidates >= st.matches);
        }
    }
}
