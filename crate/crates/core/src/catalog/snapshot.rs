//! Binary snapshot of all built state.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic    8 bytes  "SKYZSNAP"
//! version  u32      1
//! flags    u32      bit 0 catalog, 1 zone table, 2 neighbors,
//!                   3 region store, 4 pyramid
//! sections          one per set flag, in bit order; each is
//!                   u64 payload length followed by the payload
//! trailer  32 bytes SHA-256 of every preceding byte
//! ```
//!
//! Payloads:
//!
//! * catalog: `u32 htm_depth, u64 n`, then per row
//!   `i64 objID, f64 ra, dec, x, y, z, u64 htmID`;
//! * zone table: `f64 zone_height, max_radius, epsilon, u64 objects,
//!   u64 n`, then per row (margins included)
//!   `u32 zone, i64 objID, f64 ra, dec, x, y, z`;
//! * neighbors: `f64 radius, zone_height, u64 candidate_pairs,
//!   u64 half_pairs, u64 n`, then per row `i64 objID, i64 neighborID,
//!   f64 distance`;
//! * region store: `u64 next_region_id, u64 n`, then per region
//!   `u64 id, str kind, str comment, u32 next_convex_id, u64 convexes`,
//!   per convex `u32 id, u32 next_halfspace_id, u64 constraints`, per
//!   constraint `u32 id, f64 x, y, z, l`; `str` is `u32 length` plus UTF-8;
//! * pyramid: `f64 base_zone_height, epsilon, u64 n`, then per entry
//!   `i64 objID, f64 ra, dec, radius`; buckets and margin copies are
//!   rebuilt on load.
//!
//! Loading checks the magic, then the version, then the checksum, and
//! only then decodes; a failed load returns no state.

use std::collections::BTreeMap;
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{Catalog, CatalogRow};
use crate::algebra::{RegionStore, StoredConvex, StoredHalfSpace, StoredRegion};
use crate::geom::{HalfSpace, SkyPoint, UnitVec3, UNIT_TOLERANCE};
use crate::htm::HtmId;
use crate::pyramid::{PyramidConfig, ZonePyramid};
use crate::zone::{NeighborRow, NeighborStats, NeighborTable, ZoneConfig, ZoneRow, ZoneTable};

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"SKYZSNAP";
pub const SNAPSHOT_VERSION: u32 = 1;

const CATALOG: u32 = 1;
const ZONE: u32 = 1 << 1;
const NEIGHBORS: u32 = 1 << 2;
const REGIONS: u32 = 1 << 3;
const PYRAMID: u32 = 1 << 4;
const HEADER_LEN: usize = 16;
const TRAILER_LEN: usize = 32;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("snapshot I/O on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("not a snapshot (bad magic)")]
    BadMagic,
    #[error("snapshot version {found} is not supported (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("snapshot checksum mismatch (truncated or corrupted)")]
    Checksum,
    #[error("corrupt snapshot: {0}")]
    Corrupt(String),
}

/// Everything the CLI persists between invocations.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Snapshot {
    pub catalog: Option<Catalog>,
    pub zone: Option<ZoneTable>,
    pub neighbors: Option<NeighborTable>,
    pub regions: RegionStore,
    pub pyramid: Option<ZonePyramid>,
}

struct Writer(Vec<u8>);

impl Writer {
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn i64(&mut self, v: i64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn str(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.0.extend_from_slice(s.as_bytes());
    }
    fn section(&mut self, body: impl FnOnce(&mut Writer)) {
        let mut w = Writer(Vec::new());
        body(&mut w);
        self.u64(w.0.len() as u64);
        self.0.extend_from_slice(&w.0);
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

fn corrupt(msg: impl Into<String>) -> SnapshotError {
    SnapshotError::Corrupt(msg.into())
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], SnapshotError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or_else(|| corrupt("unexpected end of data"))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u32(&mut self) -> Result<u32, SnapshotError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
    fn u64(&mut self) -> Result<u64, SnapshotError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn i64(&mut self) -> Result<i64, SnapshotError> {
        Ok(i64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn f64(&mut self) -> Result<f64, SnapshotError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn len(&mut self) -> Result<usize, SnapshotError> {
        let n = self.u64()?;
        // every element takes at least 4 bytes
        if n > (self.buf.len() - self.pos) as u64 / 4 + 1 {
            return Err(corrupt(format!("count {n} exceeds data")));
        }
        Ok(n as usize)
    }
    fn str(&mut self) -> Result<String, SnapshotError> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| corrupt("invalid UTF-8"))
    }
    fn unit(&mut self) -> Result<UnitVec3, SnapshotError> {
        let (x, y, z) = (self.f64()?, self.f64()?, self.f64()?);
        let n = (x * x + y * y + z * z).sqrt();
        if !n.is_finite() || (n - 1.0).abs() > UNIT_TOLERANCE {
            return Err(corrupt(format!("vector ({x}, {y}, {z}) is not unit")));
        }
        Ok(UnitVec3::new_unchecked(x, y, z))
    }
    fn sky(&mut self) -> Result<SkyPoint, SnapshotError> {
        let (ra, dec) = (self.f64()?, self.f64()?);
        SkyPoint::new(ra, dec).map_err(|e| corrupt(e.to_string()))
    }
    fn section(&mut self) -> Result<Reader<'a>, SnapshotError> {
        let n = self.u64()?;
        let n = usize::try_from(n).map_err(|_| corrupt("section too long"))?;
        Ok(Reader { buf: self.take(n)?, pos: 0 })
    }
    fn finish(&self, what: &str) -> Result<(), SnapshotError> {
        if self.pos != self.buf.len() {
            return Err(corrupt(format!("trailing bytes in {what} section")));
        }
        Ok(())
    }
}

impl Snapshot {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer(Vec::new());
        w.0.extend_from_slice(SNAPSHOT_MAGIC);
        w.u32(SNAPSHOT_VERSION);
        let mut flags = REGIONS;
        for (present, bit) in [
            (self.catalog.is_some(), CATALOG),
            (self.zone.is_some(), ZONE),
            (self.neighbors.is_some(), NEIGHBORS),
            (self.pyramid.is_some(), PYRAMID),
        ] {
            if present {
                flags |= bit;
            }
        }
        w.u32(flags);
        if let Some(c) = &self.catalog {
            w.section(|w| write_catalog(w, c));
        }
        if let Some(z) = &self.zone {
            w.section(|w| write_zone(w, z));
        }
        if let Some(n) = &self.neighbors {
            w.section(|w| write_neighbors(w, n));
        }
        w.section(|w| write_regions(w, &self.regions));
        if let Some(p) = &self.pyramid {
            w.section(|w| write_pyramid(w, p));
        }
        let digest = Sha256::digest(&w.0);
        w.0.extend_from_slice(&digest);
        w.0
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, SnapshotError> {
        if bytes.len() < SNAPSHOT_MAGIC.len() || &bytes[..8] != SNAPSHOT_MAGIC {
            return Err(SnapshotError::BadMagic);
        }
        if bytes.len() < HEADER_LEN + TRAILER_LEN {
            return Err(SnapshotError::Checksum);
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
        if version != SNAPSHOT_VERSION {
            return Err(SnapshotError::Version {
                found: version,
                expected: SNAPSHOT_VERSION,
            });
        }
        let (body, trailer) = bytes.split_at(bytes.len() - TRAILER_LEN);
        if Sha256::digest(body).as_slice() != trailer {
            return Err(SnapshotError::Checksum);
        }
        let mut r = Reader { buf: body, pos: 12 };
        let flags = r.u32()?;
        if flags & !(CATALOG | ZONE | NEIGHBORS | REGIONS | PYRAMID) != 0 {
            return Err(corrupt(format!("unknown section flags {flags:#x}")));
        }
        let mut snap = Snapshot::default();
        if flags & CATALOG != 0 {
            snap.catalog = Some(read_catalog(&mut r.section()?)?);
        }
        if flags & ZONE != 0 {
            snap.zone = Some(read_zone(&mut r.section()?)?);
        }
        if flags & NEIGHBORS != 0 {
            snap.neighbors = Some(read_neighbors(&mut r.section()?)?);
        }
        if flags & REGIONS != 0 {
            snap.regions = read_regions(&mut r.section()?)?;
        }
        if flags & PYRAMID != 0 {
            snap.pyramid = Some(read_pyramid(&mut r.section()?)?);
        }
        r.finish("top-level")?;
        Ok(snap)
    }
}

pub fn save_snapshot(snap: &Snapshot, path: impl AsRef<Path>) -> Result<(), SnapshotError> {
    let path = path.as_ref();
    let io = |source| SnapshotError::Io {
        path: path.display().to_string(),
        source,
    };
    // write beside the target and rename so a crash never leaves half a file
    let tmp = path.with_extension("tmp-snapshot");
    std::fs::write(&tmp, snap.to_bytes()).map_err(io)?;
    std::fs::rename(&tmp, path).map_err(io)
}

pub fn load_snapshot(path: impl AsRef<Path>) -> Result<Snapshot, SnapshotError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| SnapshotError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Snapshot::from_bytes(&bytes)
}

fn write_catalog(w: &mut Writer, c: &Catalog) {
    w.u32(c.htm_depth());
    w.u64(c.len() as u64);
    for r in c.rows() {
        w.i64(r.obj_id);
        for v in [r.ra, r.dec, r.x, r.y, r.z] {
            w.f64(v);
        }
        w.u64(r.htm_id.raw());
    }
}

fn read_catalog(r: &mut Reader) -> Result<Catalog, SnapshotError> {
    let depth = r.u32()?;
    let n = r.len()?;
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let obj_id = r.i64()?;
        let p = r.sky()?;
        let v = r.unit()?;
        let htm_id = HtmId::new(r.u64()?).map_err(|e| corrupt(e.to_string()))?;
        if htm_id.depth() != depth {
            return Err(corrupt("htmID depth differs from catalog depth"));
        }
        rows.push(CatalogRow {
            obj_id,
            ra: p.ra(),
            dec: p.dec(),
            x: v.x(),
            y: v.y(),
            z: v.z(),
            htm_id,
        });
    }
    r.finish("catalog")?;
    Ok(Catalog::from_rows(depth, rows))
}

fn write_zone(w: &mut Writer, t: &ZoneTable) {
    let c = t.config();
    w.f64(c.zone_height);
    w.f64(c.max_radius);
    w.f64(c.epsilon);
    w.u64(t.object_count() as u64);
    w.u64(t.rows().len() as u64);
    for row in t.rows() {
        w.u32(row.zone);
        w.i64(row.obj_id);
        for v in [row.ra, row.dec, row.x, row.y, row.z] {
            w.f64(v);
        }
    }
}

fn read_zone(r: &mut Reader) -> Result<ZoneTable, SnapshotError> {
    let config = ZoneConfig {
        zone_height: r.f64()?,
        max_radius: r.f64()?,
        epsilon: r.f64()?,
    };
    config.validate().map_err(|e| corrupt(e.to_string()))?;
    let objects = r.u64()? as usize;
    let n = r.len()?;
    let zones = crate::zone::zone_count(config.zone_height);
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let zone = r.u32()?;
        if zone >= zones {
            return Err(corrupt(format!("zone {zone} out of range")));
        }
        let obj_id = r.i64()?;
        let (ra, dec) = (r.f64()?, r.f64()?);
        if !(ra.is_finite() && (-90.0..=90.0).contains(&dec)) {
            return Err(corrupt("zone row coordinates out of range"));
        }
        let v = r.unit()?;
        rows.push(ZoneRow {
            zone,
            obj_id,
            ra,
            dec,
            x: v.x(),
            y: v.y(),
            z: v.z(),
        });
    }
    r.finish("zone")?;
    Ok(ZoneTable::from_rows(config, rows, objects))
}

fn write_neighbors(w: &mut Writer, t: &NeighborTable) {
    w.f64(t.radius);
    w.f64(t.zone_height);
    w.u64(t.stats.candidate_pairs);
    w.u64(t.stats.half_pairs as u64);
    w.u64(t.rows.len() as u64);
    for row in &t.rows {
        w.i64(row.obj_id);
        w.i64(row.neighbor_id);
        w.f64(row.distance);
    }
}

fn read_neighbors(r: &mut Reader) -> Result<NeighborTable, SnapshotError> {
    let radius = r.f64()?;
    let zone_height = r.f64()?;
    let stats = NeighborStats {
        candidate_pairs: r.u64()?,
        half_pairs: r.u64()? as usize,
    };
    let n = r.len()?;
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        rows.push(NeighborRow {
            obj_id: r.i64()?,
            neighbor_id: r.i64()?,
            distance: r.f64()?,
        });
    }
    r.finish("neighbors")?;
    Ok(NeighborTable {
        radius,
        zone_height,
        rows,
        stats,
    })
}

fn write_regions(w: &mut Writer, s: &RegionStore) {
    w.u64(s.next_region_id());
    w.u64(s.len() as u64);
    for (id, reg) in s.iter() {
        w.u64(id);
        w.str(&reg.kind);
        w.str(&reg.comment);
        w.u32(reg.next_convex_id);
        w.u64(reg.convexes.len() as u64);
        for c in &reg.convexes {
            w.u32(c.id);
            w.u32(c.next_halfspace_id);
            w.u64(c.constraints.len() as u64);
            for h in &c.constraints {
                w.u32(h.id);
                for v in h.halfspace.components() {
                    w.f64(v);
                }
            }
        }
    }
}

fn read_regions(r: &mut Reader) -> Result<RegionStore, SnapshotError> {
    let next_id = r.u64()?;
    let n = r.len()?;
    let mut regions = BTreeMap::new();
    for _ in 0..n {
        let id = r.u64()?;
        if id >= next_id {
            return Err(corrupt(format!("region id {id} not below next id {next_id}")));
        }
        let kind = r.str()?;
        let comment = r.str()?;
        let next_convex_id = r.u32()?;
        let nc = r.len()?;
        let mut convexes = Vec::with_capacity(nc);
        for _ in 0..nc {
            let cid = r.u32()?;
            let next_halfspace_id = r.u32()?;
            let nh = r.len()?;
            let mut constraints = Vec::with_capacity(nh);
            for _ in 0..nh {
                let hid = r.u32()?;
                let normal = r.unit()?;
                let halfspace = HalfSpace::new(normal, r.f64()?).map_err(|e| corrupt(e.to_string()))?;
                constraints.push(StoredHalfSpace { id: hid, halfspace });
            }
            convexes.push(StoredConvex {
                id: cid,
                constraints,
                next_halfspace_id,
            });
        }
        let region = StoredRegion {
            kind,
            comment,
            convexes,
            next_convex_id,
        };
        if regions.insert(id, region).is_some() {
            return Err(corrupt(format!("duplicate region id {id}")));
        }
    }
    r.finish("region")?;
    Ok(RegionStore::from_parts(regions, next_id))
}

fn write_pyramid(w: &mut Writer, p: &ZonePyramid) {
    w.f64(p.config().base_zone_height);
    w.f64(p.config().epsilon);
    let mut entries: Vec<_> = p.entries().collect();
    entries.sort_by_key(|e| e.obj_id);
    w.u64(entries.len() as u64);
    for e in entries {
        w.i64(e.obj_id);
        w.f64(e.ra);
        w.f64(e.dec);
        w.f64(e.radius);
    }
}

fn read_pyramid(r: &mut Reader) -> Result<ZonePyramid, SnapshotError> {
    let mut config = PyramidConfig::new(r.f64()?).map_err(|e| corrupt(e.to_string()))?;
    config.epsilon = r.f64()?;
    let n = r.len()?;
    let mut items = Vec::with_capacity(n);
    for _ in 0..n {
        let id = r.i64()?;
        let c = r.sky()?;
        items.push((id, c, r.f64()?));
    }
    r.finish("pyramid")?;
    let mut p = ZonePyramid::new(config);
    p.extend(items).map_err(|e| corrupt(e.to_string()))?;
    Ok(p)
}
