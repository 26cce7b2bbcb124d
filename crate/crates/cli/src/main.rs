//! `skyzone`: ingest a catalog, build indexes, run queries and region
//! algebra, and check everything against brute-force scans.
//!
//! State lives in a single snapshot file (`--snapshot`). Exit codes: 0 ok,
//! 2 usage, 3 input (CSV, region text, snapshot), 4 query, 5 oracle
//! mismatch.

mod bench;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use skyzone::algebra::{AlgebraError, RegionId};
use skyzone::catalog::{self, CatalogError, Snapshot, SnapshotError, DEFAULT_HTM_DEPTH};
use skyzone::geom::{GeomError, SkyPoint};
use skyzone::htm::{htm_cover, point_to_htm_id, CoverBudget, HtmError};
use skyzone::pyramid::{bounding_circle, PyramidConfig, PyramidError, ZonePyramid};
use skyzone::region_lang::{parse_region, serialize_region, RegionLangError};
use skyzone::zone::{build_neighbors, ZoneConfig, ZoneError, ZoneTable};

use output::{Fields, Format, Out};

#[derive(Parser, Debug)]
#[command(name = "skyzone", version, about = "Spherical spatial search: zones, HTM and half-space regions")]
struct Cli {
    /// Snapshot file holding the catalog, indexes and region store.
    #[arg(long, global = true, default_value = "skyzone.snap")]
    snapshot: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    format: Format,
    #[command(flatten)]
    settings: Settings,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Settings {
    /// Zone height in degrees [default: 4 arcmin; r for neighbors build].
    #[arg(long, global = true)]
    zone_height: Option<f64>,
    /// Largest cone radius the zone table supports, degrees [default: 1].
    #[arg(long, global = true)]
    max_radius: Option<f64>,
    /// Guard added to cos(dec) in ra windows [default: 1e-6].
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// Depth of the HTM ids stored with catalog rows
    #[arg(long, global = true, default_value_t = DEFAULT_HTM_DEPTH)]
    htm_depth: u32,
    /// Finest pyramid zone height in degrees [default: 0.5 arcmin].
    #[arg(long, global = true)]
    base_zone_height: Option<f64>,
}

impl Settings {
    fn zone_config(&self) -> ZoneConfig {
        let d = ZoneConfig::default();
        ZoneConfig {
            zone_height: self.zone_height.unwrap_or(d.zone_height),
            max_radius: self.max_radius.unwrap_or(d.max_radius),
            epsilon: self.epsilon.unwrap_or(d.epsilon),
        }
    }

    fn pyramid_config(&self) -> Result<PyramidConfig, CliError> {
        let mut c = match self.base_zone_height {
            Some(b) => PyramidConfig::new(b)?,
            None => PyramidConfig::default(),
        };
        if let Some(e) = self.epsilon {
            c.epsilon = e;
        }
        Ok(c)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Read an `objID,ra,dec` CSV into the snapshot (replaces the catalog).
    Ingest { csv: PathBuf },
    /// Zone table: build and cone search
    #[command(subcommand)]
    Zone(ZoneCmd),
    /// Neighbor table: all close pairs
    #[command(subcommand)]
    Neighbors(NeighborsCmd),
    /// HTM ids and region covers
    #[command(subcommand)]
    Htm(HtmCmd),
    /// Region store and region algebra
    #[command(subcommand)]
    Region(RegionCmd),
    /// Zone pyramid over region bounding circles
    #[command(subcommand)]
    Pyramid(PyramidCmd),
    /// Seeded benchmarks checked against linear scans
    #[command(subcommand)]
    Bench(BenchCmd),
}

#[derive(Args, Debug, Clone, Copy)]
struct Cone {
    #[arg(long, allow_negative_numbers = true)]
    ra: f64,
    #[arg(long, allow_negative_numbers = true)]
    dec: f64,
    /// Radius in degrees.
    #[arg(long, allow_negative_numbers = true)]
    r: f64,
}

#[derive(Subcommand, Debug)]
enum ZoneCmd {
    /// Bucket the catalog into zones.
    Build,
    /// Objects strictly within r degrees of (ra, dec).
    Nearby(Cone),
}

#[derive(Subcommand, Debug)]
enum NeighborsCmd {
    /// All pairs closer than r degrees.
    Build {
        #[arg(long)]
        r: f64,
    },
    /// Stored neighbors of one object.
    Of {
        #[arg(long, allow_negative_numbers = true)]
        objid: i64,
    },
}

#[derive(Subcommand, Debug)]
enum HtmCmd {
    /// Trixel id of a point.
    Id {
        #[arg(long, allow_negative_numbers = true)]
        ra: f64,
        #[arg(long, allow_negative_numbers = true)]
        dec: f64,
        /// Defaults to --htm-depth.
        #[arg(long)]
        depth: Option<u32>,
    },
    /// Id ranges covering a region given in the region notation.
    Cover {
        #[arg(long)]
        region: String,
        #[arg(long, default_value_t = 20)]
        max_ranges: usize,
        #[arg(long, default_value_t = 20)]
        max_depth: u32,
    },
}

#[derive(Args, Debug)]
struct Naming {
    #[arg(long, default_value = "USER")]
    kind: String,
    #[arg(long, default_value = "")]
    comment: String,
}

#[derive(Subcommand, Debug)]
enum RegionCmd {
    /// Create a region, empty or from region notation.
    New {
        #[command(flatten)]
        naming: Naming,
        /// e.g. "CIRCLE J2000 30 20 3".
        #[arg(long)]
        spec: Option<String>,
    },
    /// Add an unconstrained convex to a region.
    Convex { id: RegionId },
    /// Add the constraint p·(x, y, z) > l to a convex.
    Constraint {
        id: RegionId,
        convex: u32,
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
        #[arg(long, allow_negative_numbers = true)]
        y: f64,
        #[arg(long, allow_negative_numbers = true)]
        z: f64,
        #[arg(long, allow_negative_numbers = true)]
        l: f64,
    },
    /// Delete a region
    Drop { id: RegionId },
    /// New region: union of two regions
    Or {
        a: RegionId,
        b: RegionId,
        #[command(flatten)]
        naming: Naming,
    },
    /// New region: intersection of two regions
    And {
        a: RegionId,
        b: RegionId,
        #[command(flatten)]
        naming: Naming,
    },
    /// New region: complement of a region
    Not {
        a: RegionId,
        #[command(flatten)]
        naming: Naming,
    },
    /// Remove empty convexes and redundant constraints in place
    Simplify { id: RegionId },
    /// Regions and convexes containing a point.
    Contains {
        #[arg(long, allow_negative_numbers = true)]
        ra: f64,
        #[arg(long, allow_negative_numbers = true)]
        dec: f64,
    },
    /// Catalog objects inside a region.
    PointsIn { id: RegionId },
    /// The region as a flat boolean expression over p.x, p.y, p.z.
    Predicate { id: RegionId },
    /// One region, or all of them.
    Show { id: Option<RegionId> },
}

#[derive(Subcommand, Debug)]
enum PyramidCmd {
    /// Index the bounding circle of every stored region.
    Build,
    /// Regions whose bounding circles overlap a query circle.
    Overlap {
        #[command(flatten)]
        cone: Cone,
        #[arg(long)]
        stage_counts: bool,
    },
}

#[derive(Args, Debug, Clone)]
pub struct BenchArgs {
    /// Catalog (or entry) count.
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub queries: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Pair radius for neighbors, degrees.
    #[arg(long, default_value_t = 0.5)]
    pub r: f64,
    /// Include wall-clock figures in machine output.
    #[arg(long)]
    pub timings: bool,
}

#[derive(Subcommand, Debug)]
enum BenchCmd {
    /// Cone search: zone and HTM paths against a linear scan.
    Nearby(BenchArgs),
    /// Pair join against the all-pairs scan.
    Neighbors(BenchArgs),
    /// Pyramid overlap against a linear scan.
    Overlap(BenchArgs),
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Query(String),
    Mismatch(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 3,
            CliError::Query(_) => 4,
            CliError::Mismatch(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Query(m) | CliError::Mismatch(m) => m,
        }
    }
}

macro_rules! error_class {
    ($class:ident: $($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::$class(e.to_string())
            }
        })*
    };
}

error_class!(Input: CatalogError, SnapshotError, RegionLangError);
error_class!(Query: AlgebraError, ZoneError, PyramidError, HtmError, GeomError);

fn load(path: &Path) -> Result<Snapshot, CliError> {
    if !path.exists() {
        return Err(CliError::Input(format!(
            "missing snapshot {} (run `skyzone ingest` or `skyzone region new` first)",
            path.display()
        )));
    }
    Ok(catalog::load_snapshot(path)?)
}

fn load_or_empty(path: &Path) -> Result<Snapshot, CliError> {
    if path.exists() {
        load(path)
    } else {
        Ok(Snapshot::default())
    }
}

fn save(path: &Path, snap: &Snapshot) -> Result<(), CliError> {
    Ok(catalog::save_snapshot(snap, path)?)
}

fn need<'a, T>(what: &'a Option<T>, hint: &str) -> Result<&'a T, CliError> {
    what.as_ref().ok_or_else(|| CliError::Query(hint.to_string()))
}

fn command_name(c: &Command) -> String {
    let sub = |s: &dyn std::fmt::Debug| {
        let d = format!("{s:?}");
        let word: String = d.chars().take_while(|c| c.is_alphanumeric()).collect();
        let mut kebab = String::new();
        for (i, ch) in word.chars().enumerate() {
            if ch.is_uppercase() && i > 0 {
                kebab.push('-');
            }
            kebab.push(ch.to_ascii_lowercase());
        }
        kebab
    };
    match c {
        Command::Ingest { .. } => "ingest".into(),
        Command::Zone(s) => format!("zone {}", sub(s)),
        Command::Neighbors(s) => format!("neighbors {}", sub(s)),
        Command::Htm(s) => format!("htm {}", sub(s)),
        Command::Region(s) => format!("region {}", sub(s)),
        Command::Pyramid(s) => format!("pyramid {}", sub(s)),
        Command::Bench(s) => format!("bench {}", sub(s)),
    }
}

fn echo_config(cli: &Cli, out: &mut Out) {
    let z = cli.settings.zone_config();
    out.record(
        "config",
        vec![
            ("command", json!(command_name(&cli.command))),
            ("snapshot", json!(cli.snapshot.display().to_string())),
            ("zone_height", json!(cli.settings.zone_height)),
            ("max_radius", json!(z.max_radius)),
            ("epsilon", json!(z.epsilon)),
            ("htm_depth", json!(cli.settings.htm_depth)),
            (
                "base_zone_height",
                json!(cli.settings.base_zone_height.unwrap_or(PyramidConfig::default().base_zone_height)),
            ),
        ],
    );
}

fn point(ra: f64, dec: f64) -> Result<SkyPoint, CliError> {
    Ok(SkyPoint::new(ra, dec)?)
}

fn htm_name(id: skyzone::htm::HtmId) -> String {
    let f = id.face_index();
    let mut s = format!("{}{}", if f < 4 { 'N' } else { 'S' }, f % 4);
    for d in id.digits() {
        s.push(char::from(b'0' + d));
    }
    s
}

fn run(cli: &Cli, out: &mut Out) -> Result<(), CliError> {
    let path = cli.snapshot.as_path();
    let settings = &cli.settings;
    match &cli.command {
        Command::Ingest { csv } => {
            let cat = catalog::ingest_csv(csv, settings.htm_depth)?;
            let mut snap = load_or_empty(path)?;
            let rows = cat.len();
            snap.catalog = Some(cat);
            snap.zone = None;
            snap.neighbors = None;
            save(path, &snap)?;
            out.record(
                "ingest",
                vec![("rows", json!(rows)), ("htm_depth", json!(settings.htm_depth))],
            );
        }
        Command::Zone(ZoneCmd::Build) => {
            let mut snap = load(path)?;
            let cat = need(&snap.catalog, "no catalog in snapshot; run `skyzone ingest` first")?;
            let table = ZoneTable::build(&cat.points(), settings.zone_config())?;
            let fields: Fields = vec![
                ("zones", json!(table.zone_count())),
                ("objects", json!(table.object_count())),
                ("rows", json!(table.rows().len())),
                ("margin_rows", json!(table.rows().len() - table.object_count())),
                ("zone_height", json!(table.config().zone_height)),
                ("max_radius", json!(table.config().max_radius)),
            ];
            snap.zone = Some(table);
            save(path, &snap)?;
            out.record("zone_table", fields);
        }
        Command::Zone(ZoneCmd::Nearby(c)) => {
            let snap = load(path)?;
            let table = need(&snap.zone, "no zone table in snapshot; run `skyzone zone build` first")?;
            let (found, stats) = table.nearby_with_stats(point(c.ra, c.dec)?, c.r)?;
            for (id, d) in &found {
                out.record("match", vec![("obj_id", json!(id)), ("distance", json!(d))]);
            }
            out.record(
                "summary",
                vec![
                    ("matches", json!(found.len())),
                    ("zones_scanned", json!(stats.zones_scanned)),
                    ("ra_candidates", json!(stats.ra_candidates)),
                    ("dec_candidates", json!(stats.dec_candidates)),
                ],
            );
        }
        Command::Neighbors(NeighborsCmd::Build { r }) => {
            let mut snap = load(path)?;
            let cat = need(&snap.catalog, "no catalog in snapshot; run `skyzone ingest` first")?;
            let h = settings.zone_height.unwrap_or(*r);
            let table = build_neighbors(&cat.points(), *r, h)?;
            let fields: Fields = vec![
                ("rows", json!(table.rows.len())),
                ("half_pairs", json!(table.stats.half_pairs)),
                ("candidate_pairs", json!(table.stats.candidate_pairs)),
                ("radius", json!(table.radius)),
                ("zone_height", json!(table.zone_height)),
            ];
            snap.neighbors = Some(table);
            save(path, &snap)?;
            out.record("neighbors", fields);
        }
        Command::Neighbors(NeighborsCmd::Of { objid }) => {
            let snap = load(path)?;
            let table = need(&snap.neighbors, "no neighbor table in snapshot; run `skyzone neighbors build` first")?;
            let rows = table.neighbors_of(*objid);
            for row in rows {
                out.record(
                    "neighbor",
                    vec![
                        ("obj_id", json!(row.obj_id)),
                        ("neighbor_id", json!(row.neighbor_id)),
                        ("distance", json!(row.distance)),
                    ],
                );
            }
            out.record("summary", vec![("neighbors", json!(rows.len()))]);
        }
        Command::Htm(HtmCmd::Id { ra, dec, depth }) => {
            let depth = depth.unwrap_or(settings.htm_depth);
            let id = point_to_htm_id(&point(*ra, *dec)?.to_vec(), depth)?;
            out.record(
                "htm_id",
                vec![("id", json!(id.raw())), ("depth", json!(depth)), ("name", json!(htm_name(id)))],
            );
        }
        Command::Htm(HtmCmd::Cover {
            region,
            max_ranges,
            max_depth,
        }) => {
            let r = parse_region(region)?;
            if *max_ranges == 0 || *max_depth > skyzone::htm::MAX_DEPTH {
                return Err(CliError::Query("--max-ranges must be positive and --max-depth at most 30".into()));
            }
            let ranges = htm_cover(
                &r,
                CoverBudget {
                    max_ranges: *max_ranges,
                    max_depth: *max_depth,
                },
            );
            for g in &ranges {
                out.record("range", vec![("begin", json!(g.begin.raw())), ("end", json!(g.end.raw()))]);
            }
            let area: f64 = ranges.iter().map(|g| g.area()).sum();
            out.record(
                "summary",
                vec![
                    ("ranges", json!(ranges.len())),
                    ("depth", json!(ranges.first().map(|g| g.depth()))),
                    ("area_sr", json!(area)),
                ],
            );
        }
        Command::Region(cmd) => region(cmd, path, out)?,
        Command::Pyramid(PyramidCmd::Build) => {
            let mut snap = load(path)?;
            let mut p = ZonePyramid::new(settings.pyramid_config()?);
            let mut skipped = 0;
            for (id, stored) in snap.regions.iter() {
                match bounding_circle(&stored.region()) {
                    Ok((c, radius)) => {
                        p.insert(id as i64, c.to_sky(), radius)?;
                    }
                    Err(PyramidError::EmptyRegion) => skipped += 1,
                    Err(e) => return Err(e.into()),
                }
            }
            let mut entries: Vec<_> = p.entries().copied().collect();
            entries.sort_by_key(|e| e.obj_id);
            for e in &entries {
                out.record(
                    "entry",
                    vec![
                        ("region_id", json!(e.obj_id)),
                        ("ra", json!(e.ra)),
                        ("dec", json!(e.dec)),
                        ("radius", json!(e.radius)),
                        ("scale", json!(e.scale)),
                        ("zone", json!(e.zone)),
                    ],
                );
            }
            out.record(
                "pyramid",
                vec![
                    ("entries", json!(p.len())),
                    ("skipped_empty", json!(skipped)),
                    ("scales", json!(p.config().scale_count())),
                    ("base_zone_height", json!(p.config().base_zone_height)),
                ],
            );
            snap.pyramid = Some(p);
            save(path, &snap)?;
        }
        Command::Pyramid(PyramidCmd::Overlap { cone, stage_counts }) => {
            let snap = load(path)?;
            let p = need(&snap.pyramid, "no pyramid in snapshot; run `skyzone pyramid build` first")?;
            if !(cone.r.is_finite() && cone.r >= 0.0) {
                return Err(CliError::Query(format!("radius {} must be a non-negative number", cone.r)));
            }
            let (ids, st) = p.overlap_search_with_stats(point(cone.ra, cone.dec)?, cone.r);
            for id in &ids {
                out.record("overlap", vec![("region_id", json!(id))]);
            }
            if *stage_counts {
                for (stage, n) in [
                    ("candidate zones", st.candidate_zones),
                    ("zone", st.zone),
                    ("ra", st.ra),
                    ("dec", st.dec),
                    ("geometry", st.geometry),
                    ("exact", st.exact),
                ] {
                    out.record("stage", vec![("stage", json!(stage)), ("count", json!(n))]);
                }
            }
            out.record("summary", vec![("overlaps", json!(ids.len()))]);
        }
        Command::Bench(BenchCmd::Nearby(a)) => bench::nearby(a, settings.zone_config(), out)?,
        Command::Bench(BenchCmd::Neighbors(a)) => bench::neighbors(a, out)?,
        Command::Bench(BenchCmd::Overlap(a)) => bench::overlap(a, settings.pyramid_config()?, out)?,
    }
    Ok(())
}

fn region(cmd: &RegionCmd, path: &Path, out: &mut Out) -> Result<(), CliError> {
    let created = |out: &mut Out, id: RegionId| out.record("region", vec![("region_id", json!(id))]);
    match cmd {
        RegionCmd::New { naming, spec } => {
            let mut snap = load_or_empty(path)?;
            let id = match spec {
                Some(text) => snap.regions.insert(&naming.kind, &naming.comment, &parse_region(text)?)?,
                None => snap.regions.new_region(&naming.kind, &naming.comment)?,
            };
            save(path, &snap)?;
            created(out, id);
        }
        RegionCmd::Convex { id } => {
            let mut snap = load(path)?;
            let c = snap.regions.new_convex(*id)?;
            save(path, &snap)?;
            out.record("convex", vec![("region_id", json!(id)), ("convex_id", json!(c))]);
        }
        RegionCmd::Constraint { id, convex, x, y, z, l } => {
            let mut snap = load(path)?;
            let h = snap.regions.new_constraint(*id, *convex, *x, *y, *z, *l)?;
            save(path, &snap)?;
            out.record(
                "constraint",
                vec![("region_id", json!(id)), ("convex_id", json!(convex)), ("halfspace_id", json!(h))],
            );
        }
        RegionCmd::Drop { id } => {
            let mut snap = load(path)?;
            snap.regions.drop_region(*id)?;
            save(path, &snap)?;
            out.record("dropped", vec![("region_id", json!(id))]);
        }
        RegionCmd::Or { a, b, naming } | RegionCmd::And { a, b, naming } => {
            let mut snap = load(path)?;
            let id = if matches!(cmd, RegionCmd::Or { .. }) {
                snap.regions.or(*a, *b, &naming.kind, &naming.comment)?
            } else {
                snap.regions.and(*a, *b, &naming.kind, &naming.comment)?
            };
            save(path, &snap)?;
            created(out, id);
        }
        RegionCmd::Not { a, naming } => {
            let mut snap = load(path)?;
            let id = snap.regions.not(*a, &naming.kind, &naming.comment)?;
            save(path, &snap)?;
            created(out, id);
        }
        RegionCmd::Simplify { id } => {
            let mut snap = load(path)?;
            snap.regions.simplify(*id)?;
            save(path, &snap)?;
            show(&snap, *id, out)?;
        }
        RegionCmd::Contains { ra, dec } => {
            let snap = load(path)?;
            let hits = snap.regions.regions_on_point(&point(*ra, *dec)?.to_vec());
            for (r, c) in &hits {
                out.record("hit", vec![("region_id", json!(r)), ("convex_id", json!(c))]);
            }
            out.record("summary", vec![("hits", json!(hits.len()))]);
        }
        RegionCmd::PointsIn { id } => {
            let snap = load(path)?;
            let cat = need(&snap.catalog, "no catalog in snapshot; run `skyzone ingest` first")?;
            let mut ids = snap.regions.points_in_region(&cat.vectors(), *id)?;
            ids.sort_unstable();
            for o in &ids {
                out.record("point", vec![("obj_id", json!(o))]);
            }
            out.record("summary", vec![("points", json!(ids.len()))]);
        }
        RegionCmd::Predicate { id } => {
            let snap = load(path)?;
            let p = snap.regions.predicate(*id)?;
            out.record(
                "predicate",
                vec![("region_id", json!(id)), ("tests", json!(p.test_count())), ("expression", json!(p.to_string()))],
            );
        }
        RegionCmd::Show { id } => {
            let snap = load(path)?;
            match id {
                Some(id) => show(&snap, *id, out)?,
                None => {
                    for (id, _) in snap.regions.iter() {
                        show(&snap, id, out)?;
                    }
                }
            }
        }
    }
    Ok(())
}

fn show(snap: &Snapshot, id: RegionId, out: &mut Out) -> Result<(), CliError> {
    let r = snap.regions.get(id)?;
    out.record(
        "region",
        vec![
            ("region_id", json!(id)),
            ("kind", json!(r.kind)),
            ("comment", json!(r.comment)),
            ("convexes", json!(r.convexes.len())),
            ("text", json!(serialize_region(&r.region()))),
        ],
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = Out::new(cli.format);
    if out.machine() {
        echo_config(&cli, &mut out);
    }
    let result = run(&cli, &mut out);
    out.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
