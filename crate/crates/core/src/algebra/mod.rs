//! Region store and Boolean algebra over half-space regions.
//!
//! Regions are unions of convexes and convexes are intersections of open
//! caps, so OR concatenates convex lists, AND takes the pairwise product of
//! convexes, and NOT applies De Morgan with a disjoint expansion:
//! `¬(a·b·c) = ¬a + a·¬b + a·b·¬c`.

mod predicate;
mod simplify;

use std::collections::BTreeMap;

use thiserror::Error;

pub use predicate::CompiledPredicate;
pub use simplify::{convex_witness, simplify_convex, simplify_region};

use crate::geom::{Convex, GeomError, HalfSpace, Region, UnitVec3};

pub type RegionId = u64;
pub type ConvexId = u32;
pub type HalfSpaceId = u32;

pub const MAX_KIND_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error("unknown region {0}")]
    UnknownRegion(RegionId),
    #[error("region {0} has no convex {1}")]
    UnknownConvex(RegionId, ConvexId),
    #[error("region type '{0}' is longer than 16 characters")]
    KindTooLong(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoredHalfSpace {
    pub id: HalfSpaceId,
    pub halfspace: HalfSpace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoredConvex {
    pub id: ConvexId,
    pub constraints: Vec<StoredHalfSpace>,
    pub next_halfspace_id: HalfSpaceId,
}

impl StoredConvex {
    fn new(id: ConvexId, c: &Convex) -> Self {
        let constraints: Vec<StoredHalfSpace> = c
            .constraints
            .iter()
            .enumerate()
            .map(|(i, h)| StoredHalfSpace {
                id: i as HalfSpaceId + 1,
                halfspace: *h,
            })
            .collect();
        Self {
            id,
            next_halfspace_id: constraints.len() as HalfSpaceId + 1,
            constraints,
        }
    }

    pub fn convex(&self) -> Convex {
        Convex::new(self.constraints.iter().map(|s| s.halfspace).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoredRegion {
    pub kind: String,
    pub comment: String,
    pub convexes: Vec<StoredConvex>,
    pub next_convex_id: ConvexId,
}

impl StoredRegion {
    fn new(kind: &str, comment: &str, r: &Region) -> Self {
        let mut s = Self {
            kind: kind.to_string(),
            comment: comment.to_string(),
            convexes: Vec::new(),
            next_convex_id: 1,
        };
        s.set_geometry(r);
        s
    }

    fn set_geometry(&mut self, r: &Region) {
        self.convexes = r
            .convexes
            .iter()
            .enumerate()
            .map(|(i, c)| StoredConvex::new(i as ConvexId + 1, c))
            .collect();
        self.next_convex_id = self.convexes.len() as ConvexId + 1;
    }

    pub fn region(&self) -> Region {
        Region::new(self.convexes.iter().map(StoredConvex::convex).collect())
    }
}

/// Named regions. Ids increase monotonically and are never reused, even
/// after a drop.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionStore {
    regions: BTreeMap<RegionId, StoredRegion>,
    next_region_id: RegionId,
}

impl Default for RegionStore {
    fn default() -> Self {
        Self {
            regions: BTreeMap::new(),
            next_region_id: 1,
        }
    }
}

fn check_kind(kind: &str) -> Result<(), AlgebraError> {
    if kind.chars().count() > MAX_KIND_LEN {
        return Err(AlgebraError::KindTooLong(kind.to_string()));
    }
    Ok(())
}

impl RegionStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rebuilds a store from persisted parts.
    pub fn from_parts(regions: BTreeMap<RegionId, StoredRegion>, next_region_id: RegionId) -> Self {
        let floor = regions.keys().next_back().map_or(1, |k| k + 1);
        Self {
            regions,
            next_region_id: next_region_id.max(floor),
        }
    }

    pub fn next_region_id(&self) -> RegionId {
        self.next_region_id
    }

    pub fn iter(&self) -> impl Iterator<Item = (RegionId, &StoredRegion)> {
        self.regions.iter().map(|(k, v)| (*k, v))
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn get(&self, id: RegionId) -> Result<&StoredRegion, AlgebraError> {
        self.regions.get(&id).ok_or(AlgebraError::UnknownRegion(id))
    }

    fn get_mut(&mut self, id: RegionId) -> Result<&mut StoredRegion, AlgebraError> {
        self.regions.get_mut(&id).ok_or(AlgebraError::UnknownRegion(id))
    }

    pub fn region(&self, id: RegionId) -> Result<Region, AlgebraError> {
        Ok(self.get(id)?.region())
    }

    /// A new region with no convexes (the empty area).
    pub fn new_region(&mut self, kind: &str, comment: &str) -> Result<RegionId, AlgebraError> {
        self.insert(kind, comment, &Region::empty())
    }

    /// Stores a copy of `r` under a fresh id.
    pub fn insert(&mut self, kind: &str, comment: &str, r: &Region) -> Result<RegionId, AlgebraError> {
        check_kind(kind)?;
        let id = self.next_region_id;
        self.next_region_id += 1;
        self.regions.insert(id, StoredRegion::new(kind, comment, r));
        Ok(id)
    }

    /// Appends an empty convex (whole sphere until constrained).
    pub fn new_convex(&mut self, region: RegionId) -> Result<ConvexId, AlgebraError> {
        let r = self.get_mut(region)?;
        let id = r.next_convex_id;
        r.next_convex_id += 1;
        r.convexes.push(StoredConvex {
            id,
            constraints: Vec::new(),
            next_halfspace_id: 1,
        });
        Ok(id)
    }

    /// Appends the constraint `p·(x, y, z) > l`; the normal is normalized.
    pub fn new_constraint(
        &mut self,
        region: RegionId,
        convex: ConvexId,
        x: f64,
        y: f64,
        z: f64,
        l: f64,
    ) -> Result<HalfSpaceId, AlgebraError> {
        let h = HalfSpace::from_components(x, y, z, l)?;
        let r = self.get_mut(region)?;
        let c = r
            .convexes
            .iter_mut()
            .find(|c| c.id == convex)
            .ok_or(AlgebraError::UnknownConvex(region, convex))?;
        let id = c.next_halfspace_id;
        c.next_halfspace_id += 1;
        c.constraints.push(StoredHalfSpace { id, halfspace: h });
        Ok(id)
    }

    pub fn drop_region(&mut self, id: RegionId) -> Result<(), AlgebraError> {
        self.regions
            .remove(&id)
            .map(|_| ())
            .ok_or(AlgebraError::UnknownRegion(id))
    }

    pub fn or(&mut self, a: RegionId, b: RegionId, kind: &str, comment: &str) -> Result<RegionId, AlgebraError> {
        let r = region_or(&self.region(a)?, &self.region(b)?);
        self.insert(kind, comment, &r)
    }

    pub fn and(&mut self, a: RegionId, b: RegionId, kind: &str, comment: &str) -> Result<RegionId, AlgebraError> {
        let r = region_and(&self.region(a)?, &self.region(b)?);
        self.insert(kind, comment, &r)
    }

    pub fn not(&mut self, a: RegionId, kind: &str, comment: &str) -> Result<RegionId, AlgebraError> {
        let r = region_not(&self.region(a)?);
        self.insert(kind, comment, &r)
    }

    /// Replaces the region's geometry with its simplified form; convex and
    /// constraint ids are renumbered.
    pub fn simplify(&mut self, id: RegionId) -> Result<(), AlgebraError> {
        let r = simplify_region(&self.region(id)?);
        self.get_mut(id)?.set_geometry(&r);
        Ok(())
    }

    /// Every `(region, convex)` whose convex contains `p`: a convex matches
    /// when none of its half-spaces excludes the point.
    pub fn regions_on_point(&self, p: &UnitVec3) -> Vec<(RegionId, ConvexId)> {
        let mut out = Vec::new();
        for (&rid, r) in &self.regions {
            for c in &r.convexes {
                let excluded = c.constraints.iter().filter(|h| !h.halfspace.contains(p)).count();
                if excluded == 0 {
                    out.push((rid, c.id));
                }
            }
        }
        out
    }

    pub fn points_in_region(&self, points: &[(i64, UnitVec3)], id: RegionId) -> Result<Vec<i64>, AlgebraError> {
        let pred = self.predicate(id)?;
        Ok(points.iter().filter(|(_, p)| pred.eval(p)).map(|(i, _)| *i).collect())
    }

    pub fn predicate(&self, id: RegionId) -> Result<CompiledPredicate, AlgebraError> {
        Ok(CompiledPredicate::compile(&self.region(id)?))
    }
}

pub fn region_or(a: &Region, b: &Region) -> Region {
    Region::new(a.convexes.iter().chain(&b.convexes).cloned().collect())
}

/// `N·M` convexes, one per pair, each the union of both constraint lists.
pub fn region_and(a: &Region, b: &Region) -> Region {
    let mut out = Vec::with_capacity(a.convexes.len() * b.convexes.len());
    for ca in &a.convexes {
        for cb in &b.convexes {
            let mut hs = ca.constraints.clone();
            hs.extend_from_slice(&cb.constraints);
            out.push(Convex::new(hs));
        }
    }
    Region::new(out)
}

/// Disjoint complement of one convex: convex `j` is
/// `{a1, .., a(j-1), ¬aj}`.
pub fn convex_not(c: &Convex) -> Region {
    Region::new(
        (0..c.constraints.len())
            .map(|j| {
                let mut hs = c.constraints[..j].to_vec();
                hs.push(c.constraints[j].negate());
                Convex::new(hs)
            })
            .collect(),
    )
}

/// Complement in membership semantics (points on edges excepted).
///
/// Multi-convex regions fold the per-convex complements with AND,
/// simplifying after each step to keep the product small.
pub fn region_not(r: &Region) -> Region {
    let mut iter = r.convexes.iter();
    let Some(first) = iter.next() else {
        return Region::whole_sphere();
    };
    let mut acc = convex_not(first);
    for c in iter {
        acc = simplify_region(&region_and(&acc, &convex_not(c)));
    }
    acc
}
