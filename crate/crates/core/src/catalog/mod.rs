//! Catalog ingest and snapshot persistence.
//!
//! Input is CSV with the header `objID,ra,dec`. Each row gets its unit
//! vector and its HTM id at the configured depth when it is read.

mod snapshot;

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use thiserror::Error;

pub use snapshot::{load_snapshot, save_snapshot, Snapshot, SnapshotError, SNAPSHOT_MAGIC, SNAPSHOT_VERSION};

use crate::geom::{GeomError, SkyPoint, UnitVec3};
use crate::htm::{point_to_htm_id, HtmError, HtmId};

pub const DEFAULT_HTM_DEPTH: u32 = 20;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: expected header objID,ra,dec, found {found}")]
    Header { line: u64, found: String },
    #[error("line {line}, column {column}: {message}")]
    Parse { line: u64, column: usize, message: String },
    #[error("line {line}: duplicate objID {id} (first seen on line {first})")]
    DuplicateId { line: u64, id: i64, first: u64 },
    #[error("line {line}: {source}")]
    Coordinate { line: u64, source: GeomError },
    #[error(transparent)]
    Htm(#[from] HtmError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatalogRow {
    pub obj_id: i64,
    /// Degrees in `[0, 360)`.
    pub ra: f64,
    pub dec: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub htm_id: HtmId,
}

impl CatalogRow {
    pub fn new(obj_id: i64, p: SkyPoint, htm_depth: u32) -> Result<Self, HtmError> {
        let v = p.to_vec();
        Ok(Self {
            obj_id,
            ra: p.ra(),
            dec: p.dec(),
            x: v.x(),
            y: v.y(),
            z: v.z(),
            htm_id: point_to_htm_id(&v, htm_depth)?,
        })
    }

    pub fn sky(&self) -> SkyPoint {
        SkyPoint::new(self.ra, self.dec).expect("validated on ingest")
    }

    pub fn vec(&self) -> UnitVec3 {
        UnitVec3::new_unchecked(self.x, self.y, self.z)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    htm_depth: u32,
    rows: Vec<CatalogRow>,
}

impl Catalog {
    pub fn new(htm_depth: u32) -> Self {
        Self { htm_depth, rows: Vec::new() }
    }

    /// Builds rows from points; ids must be unique.
    pub fn from_points(points: &[(i64, SkyPoint)], htm_depth: u32) -> Result<Self, CatalogError> {
        let mut seen = HashMap::with_capacity(points.len());
        let mut rows = Vec::with_capacity(points.len());
        for (i, &(id, p)) in points.iter().enumerate() {
            let line = i as u64 + 1;
            if let Some(first) = seen.insert(id, line) {
                return Err(CatalogError::DuplicateId { line, id, first });
            }
            rows.push(CatalogRow::new(id, p, htm_depth)?);
        }
        Ok(Self { htm_depth, rows })
    }

    pub(crate) fn from_rows(htm_depth: u32, rows: Vec<CatalogRow>) -> Self {
        Self { htm_depth, rows }
    }

    pub fn htm_depth(&self) -> u32 {
        self.htm_depth
    }

    pub fn rows(&self) -> &[CatalogRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn points(&self) -> Vec<(i64, SkyPoint)> {
        self.rows.iter().map(|r| (r.obj_id, r.sky())).collect()
    }

    pub fn vectors(&self) -> Vec<(i64, UnitVec3)> {
        self.rows.iter().map(|r| (r.obj_id, r.vec())).collect()
    }
}

pub fn ingest_csv(path: impl AsRef<Path>, htm_depth: u32) -> Result<Catalog, CatalogError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| CatalogError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_csv(file, htm_depth)
}

/// Reads `objID,ra,dec` records. Line numbers in errors are 1-based and
/// count the header.
pub fn read_csv(input: impl Read, htm_depth: u32) -> Result<Catalog, CatalogError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);
    let mut records = reader.records();
    let header = match records.next() {
        Some(r) => r.map_err(csv_error)?,
        None => return Err(CatalogError::Header { line: 1, found: "end of file".into() }),
    };
    let names: Vec<&str> = header.iter().collect();
    if names.len() != 3 || !names.iter().zip(["objid", "ra", "dec"]).all(|(a, b)| a.eq_ignore_ascii_case(b)) {
        return Err(CatalogError::Header { line: 1, found: names.join(",") });
    }
    let mut seen: HashMap<i64, u64> = HashMap::new();
    let mut rows = Vec::new();
    for rec in records {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        let field = |i: usize| -> Result<&str, CatalogError> {
            rec.get(i).ok_or_else(|| CatalogError::Parse {
                line,
                column: i + 1,
                message: format!("expected 3 fields, found {}", rec.len()),
            })
        };
        let id: i64 = field(0)?.parse().map_err(|_| CatalogError::Parse {
            line,
            column: 1,
            message: format!("objID '{}' is not an integer", &rec[0]),
        })?;
        let ra = parse_real(field(1)?, line, 2)?;
        let dec = parse_real(field(2)?, line, 3)?;
        if rec.len() > 3 {
            return Err(CatalogError::Parse {
                line,
                column: 4,
                message: format!("expected 3 fields, found {}", rec.len()),
            });
        }
        if let Some(first) = seen.insert(id, line) {
            return Err(CatalogError::DuplicateId { line, id, first });
        }
        let p = SkyPoint::new(ra, dec).map_err(|source| CatalogError::Coordinate { line, source })?;
        rows.push(CatalogRow::new(id, p, htm_depth)?);
    }
    Ok(Catalog { htm_depth, rows })
}

fn parse_real(s: &str, line: u64, column: usize) -> Result<f64, CatalogError> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CatalogError::Parse {
            line,
            column,
            message: format!("'{s}' is not a decimal number"),
        }),
    }
}

fn csv_error(e: csv::Error) -> CatalogError {
    let line = e.position().map_or(0, |p| p.line());
    CatalogError::Parse {
        line,
        column: 0,
        message: e.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(s: &str) -> Result<Catalog, CatalogError> {
        read_csv(s.as_bytes(), DEFAULT_HTM_DEPTH)
    }

    #[test]
    fn three_rows() {
        let c = read("objID,ra,dec\r\n1,360.0,0.0\r\n2,30,20\n3,10.5,-45\n").unwrap();
        assert_eq!(c.len(), 3);
        for r in c.rows() {
            assert!(((r.x * r.x + r.y * r.y + r.z * r.z).sqrt() - 1.0).abs() < 1e-15);
            assert_eq!(r.htm_id.depth(), 20);
            assert_eq!(r.htm_id, point_to_htm_id(&r.vec(), 20).unwrap());
        }
        assert_eq!(c.rows()[0].ra, 0.0);
        let two = c.rows()[1];
        assert!((two.x - 0.8137977).abs() < 5e-8);
        assert!((two.y - 0.4698463).abs() < 5e-8);
        assert!((two.z - 0.3420201).abs() < 5e-8);
    }

    #[test]
    fn errors_carry_lines() {
        match read("objID,ra,dec\n1,0,0\n2,0,0\n1,5,5\n") {
            Err(CatalogError::DuplicateId { line: 4, id: 1, first: 2 }) => {}
            other => panic!("{other:?}"),
        }
        match read("objID,ra,dec\n1,0,0\n2,abc,0\n") {
            Err(CatalogError::Parse { line: 3, column: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        match read("objID,ra,dec\n1,0,95\n") {
            Err(CatalogError::Coordinate { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(matches!(read("id,ra,dec\n"), Err(CatalogError::Header { .. })));
        assert!(matches!(read("objID,ra,dec\n1,nan,0\n"), Err(CatalogError::Parse { .. })));
        assert!(matches!(read("objID,ra,dec\n1,0\n"), Err(CatalogError::Parse { line: 2, .. })));
    }

    #[test]
    fn deterministic_derivation() {
        let text = "objID,ra,dec\n5,123.456,-12.5\n6,0.0001,89.9999\n";
        let a = read(text).unwrap();
        let b = read(text).unwrap();
        for (x, y) in a.rows().iter().zip(b.rows()) {
            assert_eq!(x.x.to_bits(), y.x.to_bits());
            assert_eq!(x.htm_id, y.htm_id);
        }
    }
}
