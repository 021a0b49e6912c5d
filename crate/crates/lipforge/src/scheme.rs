//! From a level description of the target set to a flattened sequence of
//! compacts arranged in a level-disjoint inclusion tree.
//!
//! The input lists, level by level, pairwise-disjoint compact sets whose
//! unions shrink. Refinement intersects each level with the previous one so
//! that every set of level n sits inside a single set of level n-1; the
//! flattening then enumerates all refined sets level-major. The resulting
//! sequence satisfies, exactly and checkably: if two sets intersect, the
//! later one is contained in the earlier one.

use crate::error::{Error, Result};
use crate::interval::Window;
use crate::rational::Rational;
use crate::set::IntervalSet;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// User-facing description of the target set: a window, per-level lists of
/// disjoint compacts with shrinking measure bounds, and (optionally) the
/// nested open levels of a separate G-delta part.
#[derive(Clone, Debug, PartialEq)]
pub struct SchemeSpec {
    pub window: Window,
    pub levels: Vec<Vec<IntervalSet>>,
    pub measure_bounds: Vec<Rational>,
    pub gdelta_levels: Vec<IntervalSet>,
}

impl SchemeSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::SpecValidation(msg));
        if self.levels.len() != self.measure_bounds.len() {
            return fail(format!(
                "{} levels but {} measure bounds",
                self.levels.len(),
                self.measure_bounds.len()
            ));
        }
        let whole = IntervalSet::from_interval(self.window.as_interval());
        let mut prev_union: Option<IntervalSet> = None;
        for (n, level) in self.levels.iter().enumerate() {
            let bound = &self.measure_bounds[n];
            if *bound > Rational::pow2(-(n as i64 + 1)) {
                return fail(format!(
                    "level {} measure bound {} exceeds 2^-{}",
                    n + 1,
                    bound,
                    n + 1
                ));
            }
            let mut union = IntervalSet::empty();
            for (m, set) in level.iter().enumerate() {
                if set.is_empty() {
                    return fail(format!("level {} set {} is empty", n + 1, m + 1));
                }
                if !set.is_closed() {
                    return fail(format!("level {} set {} is not closed", n + 1, m + 1));
                }
                if !set.subset_of(&whole) {
                    return fail(format!("level {} set {} leaves the window", n + 1, m + 1));
                }
                if !union.disjoint_with(set) {
                    return fail(format!(
                        "level {} sets are not pairwise disjoint (set {})",
                        n + 1,
                        m + 1
                    ));
                }
                union = union.union(set);
            }
            if union.measure() > *bound {
                return fail(format!(
                    "level {} union has measure {} > bound {}",
                    n + 1,
                    union.measure(),
                    bound
                ));
            }
            if let Some(prev) = &prev_union {
                if !union.subset_of(prev) {
                    return fail(format!("level {} union is not inside level {}", n + 1, n));
                }
            }
            prev_union = Some(union);
        }
        for (n, open) in self.gdelta_levels.iter().enumerate() {
            if open.components().iter().any(|p| p.lo_closed || p.hi_closed) {
                return fail(format!("g-delta level {} is not open", n + 1));
            }
            if !open.subset_of(&whole) {
                return fail(format!("g-delta level {} leaves the window", n + 1));
            }
            if n > 0 && !open.subset_of(&self.gdelta_levels[n - 1]) {
                return fail(format!("g-delta level {} is not nested in level {}", n + 1, n));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let file = SpecFile::from(self);
        serde_json::to_string_pretty(&file).expect("spec serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SpecFile = serde_json::from_str(text)?;
        file.into_spec()
    }

    pub fn load(path: &Path) -> Result<Self> {
        SchemeSpec::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

/// One serialized interval: `["p/q","r/s",lo_closed,hi_closed]`.
type SpecInterval = (String, String, bool, bool);

/// On-disk JSON shape.
#[derive(Serialize, Deserialize)]
struct SpecFile {
    window: (String, String),
    levels: Vec<Vec<Vec<SpecInterval>>>,
    measure_bounds: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    gdelta_levels: Vec<Vec<SpecInterval>>,
}

impl SpecFile {
    fn from(spec: &SchemeSpec) -> Self {
        let enc_set = |s: &IntervalSet| -> Vec<SpecInterval> {
            s.components()
                .iter()
                .map(|p| (p.lo.to_string(), p.hi.to_string(), p.lo_closed, p.hi_closed))
                .collect()
        };
        SpecFile {
            window: (spec.window.lo.to_string(), spec.window.hi.to_string()),
            levels: spec
                .levels
                .iter()
                .map(|lvl| lvl.iter().map(enc_set).collect())
                .collect(),
            measure_bounds: spec.measure_bounds.iter().map(|b| b.to_string()).collect(),
            gdelta_levels: spec.gdelta_levels.iter().map(enc_set).collect(),
        }
    }

    fn into_spec(self) -> Result<SchemeSpec> {
        let dec_set = |parts: &[SpecInterval]| -> Result<IntervalSet> {
            let ivs = parts
                .iter()
                .map(|(lo, hi, lc, hc)| {
                    crate::interval::Interval::new(lo.parse()?, hi.parse()?, *lc, *hc)
                })
                .collect::<Result<Vec<_>>>()?;
            IntervalSet::canonicalize(ivs)
        };
        Ok(SchemeSpec {
            window: Window::new(self.window.0.parse()?, self.window.1.parse()?)?,
            levels: self
                .levels
                .iter()
                .map(|lvl| lvl.iter().map(|s| dec_set(s)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?,
            measure_bounds: self
                .measure_bounds
                .iter()
                .map(|b| b.parse())
                .collect::<Result<Vec<_>>>()?,
            gdelta_levels: self
                .gdelta_levels
                .iter()
                .map(|s| dec_set(s))
                .collect::<Result<Vec<_>>>()?,
        })
    }
}

/// Split a list of compacts into pairwise-disjoint closed sets with the
/// same union: F_1, then F_2 minus F_1 grouped by the complement components
/// of F_1, and so on. Inputs whose overlap pattern would force a
/// non-closed remainder at this resolution are rejected, as are inputs
/// containing a long solid interval that is not a whole part of a single
/// input (the conservative certificate that the union is not fat).
pub fn dk_sigma_decompose(
    compacts: &[IntervalSet],
    w: &Window,
    resolution_l: u32,
) -> Result<Vec<IntervalSet>> {
    let whole = IntervalSet::from_interval(w.as_interval());
    let mut union_all = IntervalSet::empty();
    for (i, f) in compacts.iter().enumerate() {
        if !f.is_closed() {
            return Err(Error::NotClosed);
        }
        if !f.subset_of(&whole) {
            return Err(Error::SpecValidation(format!("input {} leaves the window", i + 1)));
        }
        union_all = union_all.union(f);
    }
    let threshold = Rational::pow2(-(resolution_l as i64));
    for part in union_all.components() {
        if part.is_point() || part.length() < threshold {
            continue;
        }
        let witnessed = compacts
            .iter()
            .any(|f| f.components().iter().any(|p| p == part));
        if !witnessed {
            return Err(Error::NotDecomposable(format!(
                "solid interval {} of the union is not a part of any single input",
                part
            )));
        }
    }

    let mut out: Vec<IntervalSet> = Vec::new();
    let mut prev = IntervalSet::empty();
    for f in compacts {
        let d = f.difference(&prev);
        if !d.is_empty() {
            if !d.is_closed() {
                return Err(Error::NotDecomposable(format!(
                    "remainder {} is not closed at this resolution",
                    d
                )));
            }
            // Group the remainder parts by complement component of what
            // came before; each group is one output piece.
            let comps = prev.complement_in(w);
            let mut groups: Vec<Vec<crate::interval::Interval>> =
                vec![Vec::new(); comps.num_parts()];
            for part in d.components() {
                let idx = comps
                    .components()
                    .iter()
                    .position(|c| c.contains(&part.lo))
                    .ok_or_else(|| {
                        Error::NotDecomposable(format!("part {} escapes the complement", part))
                    })?;
                groups[idx].push(part.clone());
            }
            for g in groups {
                if !g.is_empty() {
                    out.push(IntervalSet::canonicalize(g)?);
                }
            }
        }
        prev = prev.union(f);
    }
    Ok(out)
}

/// One refined set: the intersection that produced it and a link to the
/// containing set of the previous level.
#[derive(Clone, Debug)]
pub struct Refined {
    pub set: IntervalSet,
    pub parent: Option<usize>,
}

/// Intersect each level with the refined previous level, discarding empty
/// intersections, in (level-set, previous-piece) lexicographic order.
pub fn refine_levels(spec: &SchemeSpec) -> Result<Vec<Vec<Refined>>> {
    spec.validate()?;
    let mut out: Vec<Vec<Refined>> = Vec::with_capacity(spec.levels.len());
    for (n, level) in spec.levels.iter().enumerate() {
        if n == 0 {
            out.push(
                level
                    .iter()
                    .map(|s| Refined { set: s.clone(), parent: None })
                    .collect(),
            );
            continue;
        }
        let prev: &Vec<Refined> = &out[n - 1];
        let mut cur = Vec::new();
        for f in level {
            for (j, d) in prev.iter().enumerate() {
                let x = f.intersection(&d.set);
                if !x.is_empty() {
                    cur.push(Refined { set: x, parent: Some(j) });
                }
            }
        }
        out.push(cur);
    }
    Ok(out)
}

/// The flattened sequence of compacts: level-major enumeration of the
/// refined levels, with parent links into the sequence itself. Index 0 of
/// `sets` is the first set; the window plays the role of the sentinel
/// zeroth set containing everything.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuslinScheme {
    pub window: Window,
    pub sets: Vec<IntervalSet>,
    /// 1-based level number of each set.
    pub level_of: Vec<usize>,
    /// Index into `sets` of a previous-level set containing this one.
    pub parent: Vec<Option<usize>>,
}

pub fn flatten_scheme(spec: &SchemeSpec) -> Result<SuslinScheme> {
    let refined = refine_levels(spec)?;
    flatten_refined(&spec.window, &refined)
}

pub fn flatten_refined(w: &Window, refined: &[Vec<Refined>]) -> Result<SuslinScheme> {
    let mut sets = Vec::new();
    let mut level_of = Vec::new();
    let mut parent = Vec::new();
    let mut offsets = Vec::with_capacity(refined.len());
    for (n, level) in refined.iter().enumerate() {
        offsets.push(sets.len());
        for r in level {
            sets.push(r.set.clone());
            level_of.push(n + 1);
            parent.push(r.parent.map(|j| offsets[n - 1] + j));
        }
    }
    Ok(SuslinScheme { window: w.clone(), sets, level_of, parent })
}

impl SuslinScheme {
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// 1-based indices k ≤ k_max with x ∈ F_k, ascending.
    pub fn membership_levels(&self, x: &Rational, k_max: usize) -> Vec<usize> {
        self.sets
            .iter()
            .take(k_max.min(self.sets.len()))
            .enumerate()
            .filter(|(_, s)| s.contains(x))
            .map(|(i, _)| i + 1)
            .collect()
    }

    /// Exhaustive check of the tree property over the first k_max sets:
    /// whenever an earlier and a later set intersect, the later one is
    /// contained in the earlier one. Returns the first offending 1-based
    /// pair, if any.
    pub fn tree_property_violation(&self, k_max: usize) -> Option<(usize, usize)> {
        let upto = k_max.min(self.sets.len());
        for a in 0..upto {
            for b in (a + 1)..upto {
                if !self.sets[a].disjoint_with(&self.sets[b])
                    && !self.sets[b].subset_of(&self.sets[a])
                {
                    return Some((a + 1, b + 1));
                }
            }
        }
        None
    }

    /// Deterministic sample of target-set witnesses at this depth: part
    /// endpoints of the deepest level, capped.
    pub fn derive_witnesses(&self, cap: usize) -> Vec<Rational> {
        let deepest = match self.level_of.iter().max() {
            Some(d) => *d,
            None => return Vec::new(),
        };
        let mut pts: Vec<Rational> = Vec::new();
        for (i, s) in self.sets.iter().enumerate() {
            if self.level_of[i] != deepest {
                continue;
            }
            for p in s.components() {
                pts.push(p.lo.clone());
            }
        }
        pts.sort();
        pts.dedup();
        if pts.len() > cap && cap > 0 {
            let stride = pts.len().div_ceil(cap);
            pts = pts.into_iter().step_by(stride).collect();
        }
        pts
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, Rational};
    use crate::specs;

    #[test]
    fn dk_rejects_fat_overlap() {
        let w = Window::new(Rational::int(0), Rational::int(1)).unwrap();
        let a = IntervalSet::from_interval(
            crate::interval::Interval::closed(rat(0, 1), rat(1, 2)).unwrap(),
        );
        let b = IntervalSet::from_interval(
            crate::interval::Interval::closed(rat(1, 4), rat(3, 4)).unwrap(),
        );
        assert!(matches!(
            dk_sigma_decompose(&[a, b], &w, 12),
            Err(Error::NotDecomposable(_))
        ));
    }

    #[test]
    fn dk_point_sets() {
        let w = Window::new(Rational::int(0), Rational::int(1)).unwrap();
        let f1 = IntervalSet::points([rat(0, 1), rat(1, 1)]);
        let f2 = IntervalSet::points([rat(0, 1), rat(1, 2), rat(1, 1)]);
        let out = dk_sigma_decompose(&[f1.clone(), f2], &w, 12).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0], f1);
        assert_eq!(out[1], IntervalSet::point(rat(1, 2)));
        // Pairwise disjoint and union-preserving.
        assert!(out[0].disjoint_with(&out[1]));
    }

    #[test]
    fn dk_union_preserved_with_cantor_points() {
        let w = Window::new(Rational::int(0), Rational::int(1)).unwrap();
        let c2 = specs::cantor_approximation(2);
        let c2pts = IntervalSet::points(
            c2.components()
                .iter()
                .flat_map(|p| [p.lo.clone(), p.hi.clone()]),
        );
        let half = IntervalSet::point(rat(1, 2));
        let out = dk_sigma_decompose(&[c2pts.clone(), half.clone()], &w, 12).unwrap();
        let mut union = IntervalSet::empty();
        for (i, a) in out.iter().enumerate() {
            for b in out.iter().skip(i + 1) {
                assert!(a.disjoint_with(b));
            }
            union = union.union(a);
        }
        assert_eq!(union, c2pts.union(&half));
    }

    #[test]
    fn refine_identity_and_intersection() {
        let spec = specs::point_spec(3);
        let refined = refine_levels(&spec).unwrap();
        assert_eq!(refined[0].len(), 1);
        assert_eq!(refined[0][0].set, IntervalSet::point(rat(0, 1)));
        assert_eq!(refined[1][0].parent, Some(0));

        // Two disjoint level-1 sets, one level-2 set meeting both.
        let w = Window::new(Rational::int(0), Rational::int(1)).unwrap();
        let p = IntervalSet::point(rat(1, 4));
        let q = IntervalSet::point(rat(3, 4));
        let r = IntervalSet::points([rat(1, 4), rat(3, 4)]);
        let spec = SchemeSpec {
            window: w,
            levels: vec![vec![p.clone(), q.clone()], vec![r]],
            measure_bounds: vec![rat(1, 2), rat(1, 4)],
            gdelta_levels: vec![],
        };
        let refined = refine_levels(&spec).unwrap();
        assert_eq!(refined[1].len(), 2);
        assert_eq!(refined[1][0].set, p);
        assert_eq!(refined[1][1].set, q);
        assert_eq!(refined[1][0].parent, Some(0));
        assert_eq!(refined[1][1].parent, Some(1));
    }

    #[test]
    fn flatten_chain_for_single_point() {
        let spec = specs::point_spec(5);
        let scheme = flatten_scheme(&spec).unwrap();
        assert_eq!(scheme.len(), 5);
        for k in 0..5 {
            assert_eq!(scheme.sets[k], IntervalSet::point(rat(0, 1)));
            assert_eq!(scheme.parent[k], if k == 0 { None } else { Some(k - 1) });
        }
        assert_eq!(scheme.membership_levels(&rat(0, 1), 8), vec![1, 2, 3, 4, 5]);
        assert!(scheme.membership_levels(&rat(1, 2), 8).is_empty());
        assert_eq!(scheme.tree_property_violation(64), None);
    }

    #[test]
    fn flatten_alternating_for_two_points() {
        let spec = specs::two_point_spec(4);
        let scheme = flatten_scheme(&spec).unwrap();
        assert_eq!(scheme.len(), 8);
        for k in 0..8 {
            let expected = if k % 2 == 0 { rat(0, 1) } else { rat(1, 1) };
            assert_eq!(scheme.sets[k], IntervalSet::point(expected));
        }
        assert_eq!(scheme.tree_property_violation(64), None);
    }

    #[test]
    fn membership_replays_the_enumeration() {
        // 1/4 is the sixth rational of the fixed enumeration; each level
        // contributes ten flat indices, so its memberships are 6, 16, 26.
        let spec = specs::rationals_spec(3);
        let scheme = flatten_scheme(&spec).unwrap();
        assert_eq!(scheme.membership_levels(&rat(1, 4), 30), vec![6, 16, 26]);
        // Independent oracle: direct scan of the flattened sets.
        let direct: Vec<usize> = scheme
            .sets
            .iter()
            .enumerate()
            .filter(|(_, s)| s.contains(&rat(1, 4)))
            .map(|(i, _)| i + 1)
            .collect();
        assert_eq!(scheme.membership_levels(&rat(1, 4), 64), direct);
    }

    #[test]
    fn membership_monotone_in_depth() {
        let spec = specs::rationals_spec(10);
        let scheme = flatten_scheme(&spec).unwrap();
        let x = rat(1, 2);
        let mut last = 0;
        for k_max in [4, 8, 12, 64] {
            let count = scheme.membership_levels(&x, k_max).len();
            assert!(count >= last);
            last = count;
        }
    }

    #[test]
    fn spec_json_roundtrip() {
        for spec in [
            specs::point_spec(4),
            specs::two_point_spec(3),
            specs::cantor_spec(),
            specs::gdelta_point_spec(8),
        ] {
            let text = spec.to_json();
            let back = SchemeSpec::from_json(&text).unwrap();
            assert_eq!(spec, back);
        }
    }

    #[test]
    fn validation_rejects_broken_specs() {
        let mut spec = specs::point_spec(3);
        spec.measure_bounds[0] = Rational::int(2);
        assert!(spec.validate().is_err());

        let mut spec = specs::two_point_spec(3);
        // Break nesting: second level grows.
        spec.levels[1].push(IntervalSet::point(rat(1, 2)));
        assert!(spec.validate().is_err());

        let mut spec = specs::point_spec(3);
        spec.levels[0][0] = IntervalSet::from_interval(
            crate::interval::Interval::new(rat(0, 1), rat(1, 2), true, false).unwrap(),
        );
        assert!(spec.validate().is_err());
    }
}
