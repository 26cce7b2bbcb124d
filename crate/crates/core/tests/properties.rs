use proptest::prelude::*;

use skyzone::algebra::{region_and, region_not, region_or, simplify_region, RegionStore};
use skyzone::brute;
use skyzone::catalog::{Catalog, Snapshot};
use skyzone::geom::{arc_distance_deg, normalize_ra};
use skyzone::htm::{htm_cover, point_to_htm_id, trixel, CoverBudget};
use skyzone::pyramid::{PyramidConfig, ZonePyramid};
use skyzone::region_lang::{parse_region, serialize_region};
use skyzone::zone::{build_neighbors, ZoneConfig, ZoneTable};
use skyzone::{ArcAngle, Convex, HalfSpace, Region, SkyPoint, UnitVec3};

fn unit() -> impl Strategy<Value = UnitVec3> {
    (-1.0f64..1.0, 0.0f64..360.0).prop_map(|(z, ra)| {
        let dec = z.asin().to_degrees();
        SkyPoint::new(ra, dec).unwrap().to_vec()
    })
}

fn halfspace() -> impl Strategy<Value = HalfSpace> {
    (unit(), -0.9f64..0.95).prop_map(|(n, l)| HalfSpace::new(n, l).unwrap())
}

fn convex() -> impl Strategy<Value = Convex> {
    prop::collection::vec(halfspace(), 1..4).prop_map(Convex::new)
}

fn region() -> impl Strategy<Value = Region> {
    prop::collection::vec(convex(), 1..3).prop_map(Region::new)
}

/// Points in a small cap near the pole, near ra = 0, or anywhere.
fn clustered_point() -> impl Strategy<Value = SkyPoint> {
    prop_oneof![
        (0.0f64..360.0, 88.5f64..90.0).prop_map(|(ra, dec)| SkyPoint::new(ra, dec).unwrap()),
        (0.0f64..360.0, -90.0f64..-88.5).prop_map(|(ra, dec)| SkyPoint::new(ra, dec).unwrap()),
        (-1.5f64..1.5, -5.0f64..5.0).prop_map(|(ra, dec)| SkyPoint::new(ra, dec).unwrap()),
        (0.0f64..360.0, -90.0f64..90.0).prop_map(|(ra, dec)| SkyPoint::new(ra, dec).unwrap()),
    ]
}

fn catalog() -> impl Strategy<Value = Vec<(i64, SkyPoint)>> {
    prop::collection::vec(clustered_point(), 1..300)
        .prop_map(|pts| pts.into_iter().enumerate().map(|(i, p)| (i as i64 + 1, p)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn distance_is_a_metric(a in unit(), b in unit(), c in unit()) {
        let ab = arc_distance_deg(&a, &b);
        prop_assert!((ab - arc_distance_deg(&b, &a)).abs() < 1e-12);
        prop_assert!((0.0..=180.0).contains(&ab));
        prop_assert!(ab <= arc_distance_deg(&a, &c) + arc_distance_deg(&c, &b) + 1e-9);
    }

    #[test]
    fn htm_prefix_and_containment(p in unit(), d in 1u32..=20, k in 0u32..20) {
        let k = k.min(d - 1);
        let deep = point_to_htm_id(&p, d).unwrap();
        let shallow = point_to_htm_id(&p, k).unwrap();
        prop_assert_eq!(deep.raw() >> (2 * (d - k)), shallow.raw());
        prop_assert!(trixel(deep).edge_margin(&p) >= -1e-12);
    }

    #[test]
    fn serialized_regions_parse_back(r in region(), probes in prop::collection::vec(unit(), 50)) {
        let text = serialize_region(&r);
        let back = parse_region(&text).unwrap();
        prop_assert_eq!(serialize_region(&back), text);
        for p in &probes {
            if r.edge_margin(p) > 1e-9 {
                prop_assert_eq!(r.contains(p), back.contains(p));
            }
        }
    }

    #[test]
    fn boolean_ops_match_pointwise(a in region(), b in region(), probes in prop::collection::vec(unit(), 200)) {
        let or = region_or(&a, &b);
        let and = region_and(&a, &b);
        let not = region_not(&a);
        for p in &probes {
            if a.edge_margin(p) < 1e-9 || b.edge_margin(p) < 1e-9 {
                continue;
            }
            let (x, y) = (a.contains(p), b.contains(p));
            prop_assert_eq!(or.contains(p), x || y);
            prop_assert_eq!(and.contains(p), x && y);
            prop_assert_eq!(not.contains(p), !x);
        }
    }

    #[test]
    fn simplify_keeps_membership(r in region(), probes in prop::collection::vec(unit(), 200)) {
        let s = simplify_region(&r);
        prop_assert_eq!(simplify_region(&s), s.clone());
        for p in &probes {
            if r.edge_margin(p) > 1e-9 {
                prop_assert_eq!(s.contains(p), r.contains(p));
            }
        }
    }

    #[test]
    fn cover_holds_every_inside_point(c in unit(), r in 0.05f64..20.0, probes in prop::collection::vec(unit(), 300)) {
        let region = Region::circle(c, ArcAngle::from_degrees(r).unwrap());
        let ranges = htm_cover(&region, CoverBudget::default());
        let pts: Vec<(i64, UnitVec3)> = probes.into_iter().enumerate().map(|(i, p)| (i as i64, p)).collect();
        let inside = brute::points_in_region(&pts, &region);
        let covered = brute::points_in_ranges(&pts, &ranges);
        prop_assert!(inside.iter().all(|id| covered.binary_search(id).is_ok()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn zone_nearby_matches_scan(cat in catalog(), q in clustered_point(), r in 0.0f64..1.0, h in 0.02f64..2.0) {
        let table = ZoneTable::build(&cat, ZoneConfig { zone_height: h, ..ZoneConfig::default() }).unwrap();
        let got: Vec<i64> = table.nearby(q, r).unwrap().into_iter().map(|m| m.0).collect();
        let want: Vec<i64> = brute::nearby(&cat, q, r).into_iter().map(|m| m.0).collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn zone_nearby_is_ra_shift_invariant(cat in catalog(), q in clustered_point(), r in 0.01f64..1.0, shift in 0.0f64..360.0) {
        let cfg = ZoneConfig::default();
        let moved: Vec<(i64, SkyPoint)> = cat
            .iter()
            .map(|(id, p)| (*id, SkyPoint::new(normalize_ra(p.ra() + shift), p.dec()).unwrap()))
            .collect();
        let q2 = SkyPoint::new(normalize_ra(q.ra() + shift), q.dec()).unwrap();
        let a = ZoneTable::build(&cat, cfg).unwrap().nearby(q, r).unwrap();
        let b = ZoneTable::build(&moved, cfg).unwrap().nearby(q2, r).unwrap();
        // rounding may move points sitting on the circle
        let firm = |m: &[(i64, f64)]| m.iter().filter(|x| x.1 < r - 1e-9).map(|x| x.0).collect::<Vec<_>>();
        prop_assert_eq!(firm(&a), firm(&b));
    }

    #[test]
    fn neighbors_match_scan(cat in catalog(), r in 0.01f64..1.0, tall in any::<bool>()) {
        let h = if tall { 4.0 * r } else { r };
        let t = build_neighbors(&cat, r, h).unwrap();
        let want: Vec<(i64, i64)> = brute::neighbors(&cat, r).iter().map(|x| (x.obj_id, x.neighbor_id)).collect();
        let got: Vec<(i64, i64)> = t.rows.iter().map(|x| (x.obj_id, x.neighbor_id)).collect();
        prop_assert_eq!(&got, &want);
        prop_assert_eq!(t.stats.half_pairs * 2, t.rows.len());
    }

    #[test]
    fn pyramid_matches_scan(
        centers in prop::collection::vec((clustered_point(), 0.001f64..5.0), 1..200),
        q in clustered_point(),
        r in 0.0f64..3.0,
    ) {
        let entries: Vec<(i64, SkyPoint, f64)> =
            centers.into_iter().enumerate().map(|(i, (c, rr))| (i as i64 + 1, c, rr)).collect();
        let cfg = PyramidConfig::new(0.5).unwrap();
        let mut p = ZonePyramid::new(cfg);
        p.extend(entries.iter().copied()).unwrap();
        for e in p.entries() {
            let s = e.scale;
            prop_assert!(cfg.zone_height(s) >= e.radius);
            prop_assert!(s == 0 || cfg.zone_height(s - 1) < e.radius);
        }
        let (got, st) = p.overlap_search_with_stats(q, r);
        prop_assert_eq!(got, brute::overlaps(&entries, q, r));
        let chain = [st.zone, st.ra, st.dec, st.geometry, st.exact];
        prop_assert!(chain.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn snapshot_round_trip(cat in catalog(), regions in prop::collection::vec(region(), 0..4), r in 0.01f64..1.0) {
        let mut store = RegionStore::new();
        for reg in &regions {
            store.insert("USER", "", reg).unwrap();
        }
        let mut pyr = ZonePyramid::new(PyramidConfig::default());
        pyr.extend(cat.iter().map(|(id, p)| (*id, *p, r))).unwrap();
        let snap = Snapshot {
            catalog: Some(Catalog::from_points(&cat, 20).unwrap()),
            zone: Some(ZoneTable::build(&cat, ZoneConfig::default()).unwrap()),
            neighbors: Some(build_neighbors(&cat, r, r).unwrap()),
            regions: store,
            pyramid: Some(pyr),
        };
        let bytes = snap.to_bytes();
        let back = Snapshot::from_bytes(&bytes).unwrap();
        prop_assert_eq!(&back, &snap);
        prop_assert_eq!(back.to_bytes(), bytes);
    }
}
