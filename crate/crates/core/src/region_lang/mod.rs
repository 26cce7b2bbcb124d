//! Textual region notation.
//!
//! ```text
//! circleSpec := CIRCLE J2000 ra dec radArcMin
//!             | CIRCLE CARTESIAN x y z radArcMin
//! rectSpec   := RECT J2000 {ra dec}2
//! polySpec   := POLY J2000 {ra dec}3+     | POLY CARTESIAN {x y z}3+
//! hullSpec   := CHULL J2000 {ra dec}3+    | CHULL CARTESIAN {x y z}3+
//! convexSpec := CONVEX {x y z d}+
//! regionSpec := REGION {convexSpec}*
//! areaSpec   := circleSpec | rectSpec | polySpec | hullSpec
//!             | convexSpec | regionSpec
//! ```
//!
//! Keywords are case-insensitive and tokens are whitespace separated.
//! Point and constraint lists run until the next keyword or the end of the
//! input, so inside `REGION` every convex starts with the `CONVEX` keyword.
//! A `CONVEX` with no tuples is only accepted inside `REGION`, where it
//! stands for the whole sphere.
//!
//! [`serialize_region`] always emits the lossless `REGION CONVEX ...` form.

mod compile;
mod hull;
mod parser;

use std::fmt;

use thiserror::Error;

pub use compile::{compile, compile_polygon};
pub use hull::spherical_hull;
pub use parser::parse;

use crate::geom::{GeomError, Region};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    J2000,
    Cartesian,
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Frame::J2000 => "J2000",
            Frame::Cartesian => "CARTESIAN",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coord {
    Sky { ra: f64, dec: f64 },
    Cartesian { x: f64, y: f64, z: f64 },
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coord::Sky { ra, dec } => write!(f, "{ra} {dec}"),
            Coord::Cartesian { x, y, z } => write!(f, "{x} {y} {z}"),
        }
    }
}

/// One `CONVEX` clause: `(x, y, z, d)` tuples.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvexSpec {
    pub constraints: Vec<[f64; 4]>,
}

/// Parsed form of an area specification.
#[derive(Debug, Clone, PartialEq)]
pub enum RegionSpec {
    Circle {
        frame: Frame,
        center: Coord,
        radius_arcmin: f64,
    },
    /// Two `(ra, dec)` corners of an ra/dec aligned box.
    Rect { corners: [(f64, f64); 2] },
    Poly { frame: Frame, points: Vec<Coord> },
    Chull { frame: Frame, points: Vec<Coord> },
    Convex(ConvexSpec),
    Region(Vec<ConvexSpec>),
}

impl fmt::Display for ConvexSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CONVEX")?;
        for [x, y, z, d] in &self.constraints {
            write!(f, " {x} {y} {z} {d}")?;
        }
        Ok(())
    }
}

impl fmt::Display for RegionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegionSpec::Circle {
                frame,
                center,
                radius_arcmin,
            } => write!(f, "CIRCLE {frame} {center} {radius_arcmin}"),
            RegionSpec::Rect { corners } => write!(
                f,
                "RECT J2000 {} {} {} {}",
                corners[0].0, corners[0].1, corners[1].0, corners[1].1
            ),
            RegionSpec::Poly { frame, points } | RegionSpec::Chull { frame, points } => {
                let kw = if matches!(self, RegionSpec::Poly { .. }) { "POLY" } else { "CHULL" };
                write!(f, "{kw} {frame}")?;
                for p in points {
                    write!(f, " {p}")?;
                }
                Ok(())
            }
            RegionSpec::Convex(c) => write!(f, "{c}"),
            RegionSpec::Region(cs) => {
                f.write_str("REGION")?;
                for c in cs {
                    write!(f, " {c}")?;
                }
                Ok(())
            }
        }
    }
}

/// Syntax error at a byte offset of the input.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("syntax error at byte {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileError {
    #[error("non-convex or over-wide polygon")]
    NonConvexPolygon,
    #[error("degenerate polygon: {0}")]
    DegeneratePolygon(String),
    #[error("adjacent vertices {0} and {1} coincide or are antipodal")]
    DegenerateEdge(usize, usize),
    #[error("hull points span more than a hemisphere")]
    HullTooWide,
    #[error("hull points are degenerate (fewer than 3 extreme points)")]
    DegenerateHull,
    #[error("rectangle ra width {0} must be in (0, 180) degrees")]
    RectTooWide(f64),
    #[error("rectangle has zero height")]
    DegenerateRect,
    #[error(transparent)]
    Geom(#[from] GeomError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegionLangError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Compile(#[from] CompileError),
}

/// Parses and compiles in one step.
pub fn parse_region(text: &str) -> Result<Region, RegionLangError> {
    Ok(compile(&parse(text)?)?)
}

/// Canonical text of a region: `REGION CONVEX x y z l ... CONVEX ...`.
///
/// Numbers use the shortest representation that round-trips exactly.
pub fn serialize_region(r: &Region) -> String {
    let mut out = String::from("REGION");
    for c in &r.convexes {
        out.push_str(" CONVEX");
        for h in &c.constraints {
            let [x, y, z, l] = h.components();
            out.push_str(&format!(" {} {} {} {}", fmt_num(x), fmt_num(y), fmt_num(z), fmt_num(l)));
        }
    }
    out
}

/// Shortest round-trip form; `-0` prints as `0` and magnitudes outside
/// `[1e-4, 1e16)` use an exponent.
pub fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 {
        "0".to_string()
    } else if !(1e-4..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}
