use std::fmt;

use crate::geom::{Region, UnitVec3};
use crate::region_lang::fmt_num;

/// A region flattened to plain `(x, y, z, l)` arrays, evaluated without
/// touching the store.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledPredicate {
    convexes: Vec<Vec<[f64; 4]>>,
}

impl CompiledPredicate {
    pub fn compile(r: &Region) -> Self {
        Self {
            convexes: r
                .convexes
                .iter()
                .map(|c| c.constraints.iter().map(|h| h.components()).collect())
                .collect(),
        }
    }

    #[inline]
    pub fn eval(&self, p: &UnitVec3) -> bool {
        let (px, py, pz) = (p.x(), p.y(), p.z());
        self.convexes
            .iter()
            .any(|c| c.iter().all(|&[x, y, z, l]| px * x + py * y + pz * z > l))
    }

    pub fn eval_batch(&self, points: &[UnitVec3]) -> Vec<bool> {
        points.iter().map(|p| self.eval(p)).collect()
    }

    /// Number of threshold tests in the expression.
    pub fn test_count(&self) -> usize {
        self.convexes.iter().map(Vec::len).sum()
    }
}

/// `((p.x*a + p.y*b + p.z*c) > l and ...) or (...)`; `false` for the empty
/// region, `(true)` for an unconstrained convex.
impl fmt::Display for CompiledPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.convexes.is_empty() {
            return f.write_str("false");
        }
        for (i, c) in self.convexes.iter().enumerate() {
            if i > 0 {
                f.write_str(" or ")?;
            }
            if c.is_empty() {
                f.write_str("(true)")?;
                continue;
            }
            f.write_str("(")?;
            for (j, [x, y, z, l]) in c.iter().enumerate() {
                if j > 0 {
                    f.write_str(" and ")?;
                }
                write!(
                    f,
                    "(p.x*{} + p.y*{} + p.z*{}) > {}",
                    fmt_num(*x),
                    fmt_num(*y),
                    fmt_num(*z),
                    fmt_num(*l)
                )?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}
