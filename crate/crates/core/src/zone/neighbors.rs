use rayon::prelude::*;

use super::{ra_half_width, ZoneConfig, ZoneError, ZoneTable, WINDOW_SLACK};
use crate::geom::{arc_distance_deg, SkyPoint};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborRow {
    pub obj_id: i64,
    pub neighbor_id: i64,
    /// Degrees.
    pub distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NeighborStats {
    /// Rows inside the ra windows of the zone joins.
    pub candidate_pairs: u64,
    /// Unordered pairs found before mirroring.
    pub half_pairs: usize,
}

/// Symmetric pair list sorted by `(obj_id, neighbor_id)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborTable {
    pub radius: f64,
    pub zone_height: f64,
    pub rows: Vec<NeighborRow>,
    pub stats: NeighborStats,
}

impl NeighborTable {
    pub fn neighbors_of(&self, obj_id: i64) -> &[NeighborRow] {
        let a = self.rows.partition_point(|r| r.obj_id < obj_id);
        let b = self.rows.partition_point(|r| r.obj_id <= obj_id);
        &self.rows[a..b]
    }
}

/// All pairs closer than `r` degrees, each in both orientations.
///
/// Every zone is joined with the zones within `r` of it (just its two
/// neighbours when `zone_height >= r`). Only main rows drive the join and
/// only pairs with `o1 < o2` are kept, so each unordered pair is found once
/// before the mirror rows are added.
pub fn build_neighbors(
    catalog: &[(i64, SkyPoint)],
    r: f64,
    zone_height: f64,
) -> Result<NeighborTable, ZoneError> {
    if !(r.is_finite() && r > 0.0 && r <= 180.0) {
        return Err(ZoneError::BadRadius(r));
    }
    let config = ZoneConfig {
        zone_height,
        max_radius: r,
        ..ZoneConfig::default()
    };
    let table = ZoneTable::build(catalog, config)?;
    let reach = (r / zone_height - 1e-12).ceil().max(1.0) as i64;
    let limit = 4.0 * (r.to_radians() / 2.0).sin().powi(2);
    let nzones = table.zone_count() as i64;

    let per_zone: Vec<(Vec<NeighborRow>, u64)> = (0..nzones)
        .into_par_iter()
        .map(|z| {
            let mut found = Vec::new();
            let mut candidates = 0u64;
            for o1 in table.main_rows(z as u32) {
                let w = ra_half_width(o1.dec, r, config.epsilon);
                for z2 in (z - reach).max(0)..=(z + reach).min(nzones - 1) {
                    let rows = if w >= 180.0 {
                        table.main_rows(z2 as u32)
                    } else {
                        table.scan(z2 as u32, o1.ra - w, o1.ra + w)
                    };
                    candidates += rows.len() as u64;
                    for o2 in rows {
                        if o1.obj_id >= o2.obj_id || (o1.dec - o2.dec).abs() > r + WINDOW_SLACK {
                            continue;
                        }
                        let (dx, dy, dz) = (o1.x - o2.x, o1.y - o2.y, o1.z - o2.z);
                        if dx * dx + dy * dy + dz * dz < limit {
                            found.push(NeighborRow {
                                obj_id: o1.obj_id,
                                neighbor_id: o2.obj_id,
                                distance: arc_distance_deg(&o1.vec(), &o2.vec()),
                            });
                        }
                    }
                }
            }
            (found, candidates)
        })
        .collect();

    let candidate_pairs = per_zone.iter().map(|p| p.1).sum();
    let mut rows: Vec<NeighborRow> = per_zone.into_iter().flat_map(|p| p.0).collect();
    let half_pairs = rows.len();
    let mirrored: Vec<NeighborRow> = rows
        .iter()
        .map(|n| NeighborRow {
            obj_id: n.neighbor_id,
            neighbor_id: n.obj_id,
            distance: n.distance,
        })
        .collect();
    rows.extend(mirrored);
    rows.sort_by(|a, b| a.obj_id.cmp(&b.obj_id).then(a.neighbor_id.cmp(&b.neighbor_id)));
    Ok(NeighborTable {
        radius: r,
        zone_height,
        rows,
        stats: NeighborStats {
            candidate_pairs,
            half_pairs,
        },
    })
}
