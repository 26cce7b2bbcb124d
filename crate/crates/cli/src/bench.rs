//! Oracle benches: every indexed answer is compared with a linear scan,
//! and any difference fails the run with exit code 5.

use std::time::{Duration, Instant};

use serde_json::json;

use skyzone::brute;
use skyzone::geom::UnitVec3;
use skyzone::htm::{CoverBudget, HtmPointIndex};
use skyzone::pyramid::{OverlapStats, PyramidConfig, ZonePyramid};
use skyzone::random::{circle_entries, cone_queries, uniform_catalog};
use skyzone::zone::{build_neighbors, NearbyStats, ZoneConfig, ZoneTable};

use crate::output::Out;
use crate::{BenchArgs, CliError};

const HTM_DEPTH: u32 = 20;

fn ms(d: Duration) -> f64 {
    (d.as_secs_f64() * 1e6).round() / 1e3
}

fn timings(a: &BenchArgs, out: &mut Out, rows: &[(&str, Duration)], baseline: Duration, per: usize) {
    if out.machine() && !a.timings {
        return;
    }
    for (method, d) in rows {
        out.record(
            "timing",
            vec![
                ("method", json!(method)),
                ("total_ms", json!(ms(*d))),
                ("per_query_us", json!((d.as_secs_f64() * 1e6 / per.max(1) as f64 * 10.0).round() / 10.0)),
                ("speedup", json!((baseline.as_secs_f64() / d.as_secs_f64().max(1e-9) * 100.0).round() / 100.0)),
            ],
        );
    }
}

fn verdict(label: &str, ok: usize, total: usize) -> Result<(), CliError> {
    if ok == total {
        Ok(())
    } else {
        Err(CliError::Mismatch(format!("{label}: {ok}/{total} queries matched the oracle")))
    }
}

pub fn nearby(a: &BenchArgs, cfg: ZoneConfig, out: &mut Out) -> Result<(), CliError> {
    let cat = uniform_catalog(a.seed, a.n);
    let vecs: Vec<(i64, UnitVec3)> = cat.iter().map(|(id, p)| (*id, p.to_vec())).collect();
    let table = ZoneTable::build(&cat, cfg)?;
    let htm = HtmPointIndex::build(&vecs, HTM_DEPTH)?;
    let queries = cone_queries(a.seed.wrapping_add(1), a.queries, cfg.max_radius.min(1.0));

    let t = Instant::now();
    let mut zone_sum = NearbyStats::default();
    let mut zone_res = Vec::with_capacity(queries.len());
    for (c, r) in &queries {
        let (m, s) = table.nearby_with_stats(*c, *r)?;
        zone_sum.zones_scanned += s.zones_scanned;
        zone_sum.ra_candidates += s.ra_candidates;
        zone_sum.dec_candidates += s.dec_candidates;
        zone_sum.matches += s.matches;
        zone_res.push(m.into_iter().map(|x| x.0).collect::<Vec<i64>>());
    }
    let zone_t = t.elapsed();

    let t = Instant::now();
    let mut htm_candidates = 0;
    let htm_res: Vec<Vec<i64>> = queries
        .iter()
        .map(|(c, r)| {
            let (ids, s) = htm.cone(&c.to_vec(), *r, CoverBudget::default());
            htm_candidates += s.candidates;
            ids
        })
        .collect();
    let htm_t = t.elapsed();

    let t = Instant::now();
    let oracle: Vec<Vec<i64>> = queries.iter().map(|(c, r)| brute::nearby_ids(&vecs, &c.to_vec(), *r)).collect();
    let brute_t = t.elapsed();

    let zone_ok = zone_res.iter().zip(&oracle).filter(|(x, y)| x == y).count();
    let htm_ok = htm_res.iter().zip(&oracle).filter(|(x, y)| x == y).count();
    let k = queries.len();
    out.record(
        "bench",
        vec![
            ("bench", json!("nearby")),
            ("n", json!(a.n)),
            ("queries", json!(k)),
            ("seed", json!(a.seed)),
            ("oracle_match", json!(format!("{zone_ok}/{k}"))),
            ("htm_oracle_match", json!(format!("{htm_ok}/{k}"))),
            ("matches", json!(zone_sum.matches)),
        ],
    );
    for (stage, n) in [
        ("zones scanned", zone_sum.zones_scanned),
        ("ra window", zone_sum.ra_candidates),
        ("dec band", zone_sum.dec_candidates),
        ("distance", zone_sum.matches),
        ("htm candidates", htm_candidates),
    ] {
        out.record("stage", vec![("stage", json!(stage)), ("count", json!(n))]);
    }
    timings(a, out, &[("brute", brute_t), ("zone", zone_t), ("htm", htm_t)], brute_t, k);
    verdict("zone", zone_ok, k)?;
    verdict("htm", htm_ok, k)
}

pub fn neighbors(a: &BenchArgs, out: &mut Out) -> Result<(), CliError> {
    let cat = uniform_catalog(a.seed, a.n);
    let t = Instant::now();
    let tight = build_neighbors(&cat, a.r, a.r)?;
    let tight_t = t.elapsed();
    let t = Instant::now();
    let tall = build_neighbors(&cat, a.r, 4.0 * a.r)?;
    let tall_t = t.elapsed();
    let t = Instant::now();
    let oracle = brute::neighbors(&cat, a.r);
    let brute_t = t.elapsed();

    let pairs = |rows: &[skyzone::zone::NeighborRow]| rows.iter().map(|r| (r.obj_id, r.neighbor_id)).collect::<Vec<_>>();
    let want = pairs(&oracle);
    let ok = [&tight, &tall].iter().filter(|t| pairs(&t.rows) == want).count();
    out.record(
        "bench",
        vec![
            ("bench", json!("neighbors")),
            ("n", json!(a.n)),
            ("radius", json!(a.r)),
            ("seed", json!(a.seed)),
            ("oracle_match", json!(format!("{ok}/2"))),
            ("rows", json!(tight.rows.len())),
            ("oracle_rows", json!(oracle.len())),
            ("half_pairs", json!(tight.stats.half_pairs)),
        ],
    );
    for (h, t) in [("r", &tight), ("4r", &tall)] {
        out.record(
            "zone_height",
            vec![("zone_height", json!(h)), ("candidate_pairs", json!(t.stats.candidate_pairs))],
        );
    }
    timings(
        a,
        out,
        &[("brute", brute_t), ("zones h=r", tight_t), ("zones h=4r", tall_t)],
        brute_t,
        1,
    );
    verdict("neighbors", ok, 2)
}

pub fn overlap(a: &BenchArgs, cfg: PyramidConfig, out: &mut Out) -> Result<(), CliError> {
    let entries = circle_entries(a.seed, a.n, 0.01, 2.0);
    let mut p = ZonePyramid::new(cfg);
    p.extend(entries.iter().copied())?;
    let queries = cone_queries(a.seed.wrapping_add(1), a.queries, 1.0);

    let t = Instant::now();
    let mut sum = OverlapStats::default();
    let mut got = Vec::with_capacity(queries.len());
    for (c, r) in &queries {
        let (ids, s) = p.overlap_search_with_stats(*c, *r);
        sum.candidate_zones += s.candidate_zones;
        sum.zone += s.zone;
        sum.ra += s.ra;
        sum.dec += s.dec;
        sum.geometry += s.geometry;
        sum.exact += s.exact;
        got.push(ids);
    }
    let pyr_t = t.elapsed();
    let t = Instant::now();
    let oracle: Vec<Vec<i64>> = queries.iter().map(|(c, r)| brute::overlaps(&entries, *c, *r)).collect();
    let brute_t = t.elapsed();

    let k = queries.len();
    let ok = got.iter().zip(&oracle).filter(|(x, y)| x == y).count();
    let ratio = if sum.dec > 0 { sum.geometry as f64 / sum.dec as f64 } else { 0.0 };
    out.record(
        "bench",
        vec![
            ("bench", json!("overlap")),
            ("n", json!(a.n)),
            ("queries", json!(k)),
            ("seed", json!(a.seed)),
            ("scales", json!(cfg.scale_count())),
            ("oracle_match", json!(format!("{ok}/{k}"))),
            ("geometry_pass_ratio", json!((ratio * 1e4).round() / 1e4)),
        ],
    );
    for (stage, n) in [
        ("candidate zones", sum.candidate_zones),
        ("zone", sum.zone),
        ("ra", sum.ra),
        ("dec", sum.dec),
        ("geometry", sum.geometry),
        ("exact", sum.exact),
    ] {
        out.record("stage", vec![("stage", json!(stage)), ("count", json!(n))]);
    }
    timings(a, out, &[("brute", brute_t), ("pyramid", pyr_t)], brute_t, k);
    verdict("overlap", ok, k)
}
