//! Canonical finite unions of disjoint intervals, with exact set algebra.
//!
//! The canonical form keeps parts pairwise disjoint, sorted, and
//! non-mergeable: no two parts whose союз is again an interval. All binary
//! operations are sweeps over inclusive position ranges (see
//! [`crate::interval::Pos`]), so endpoint flags are handled uniformly and
//! exactly.

use crate::error::{Error, Result};
use crate::interval::{Interval, Pos, Window};
use crate::rational::Rational;
use serde::{Deserialize, Serialize};
use std::fmt;

/// A component of the truncated hat-set complement. `merged` marks the
/// endpoint-adjacent regions into which all structure finer than the
/// resolution has been collapsed; everything else is a faithful component
/// of the ideal hat-set complement at this depth.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LadderGap {
    pub span: Interval,
    pub merged: bool,
}

/// Which boolean operation `IntervalSet::apply` performs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetOp {
    Union,
    Intersection,
    Difference,
    ComplementInWindow,
}

/// A canonical finite union of pairwise-disjoint intervals.
#[derive(Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IntervalSet {
    parts: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet { parts: Vec::new() }
    }

    pub fn from_interval(i: Interval) -> Self {
        IntervalSet { parts: vec![i] }
    }

    pub fn point(x: Rational) -> Self {
        IntervalSet::from_interval(Interval::point(x))
    }

    pub fn points<I: IntoIterator<Item = Rational>>(xs: I) -> Self {
        let parts: Vec<Interval> = xs.into_iter().map(Interval::point).collect();
        IntervalSet::canonicalize(parts).expect("points are well-formed")
    }

    /// Canonical form of an arbitrary list of intervals: sorted, merged
    /// wherever the union of two parts is an interval. Idempotent.
    pub fn canonicalize(parts: Vec<Interval>) -> Result<Self> {
        let mut ranges: Vec<(Pos, Pos)> =
            parts.into_iter().map(|i| (i.start_pos(), i.end_pos())).collect();
        ranges.sort();
        let mut merged: Vec<(Pos, Pos)> = Vec::with_capacity(ranges.len());
        for (s, e) in ranges {
            match merged.last_mut() {
                Some((_, last_e)) if reaches(last_e, &s) => {
                    if e > *last_e {
                        *last_e = e;
                    }
                }
                _ => merged.push((s, e)),
            }
        }
        Ok(IntervalSet {
            parts: merged.into_iter().map(|(s, e)| Interval::from_pos(s, e)).collect(),
        })
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Maximal intervals of the set, in increasing order.
    pub fn components(&self) -> &[Interval] {
        &self.parts
    }

    pub fn num_parts(&self) -> usize {
        self.parts.len()
    }

    /// True when every part is closed (so the set is closed).
    pub fn is_closed(&self) -> bool {
        self.parts.iter().all(Interval::is_closed)
    }

    /// Exact Lebesgue measure: the sum of part lengths.
    pub fn measure(&self) -> Rational {
        let mut m = Rational::zero();
        for p in &self.parts {
            m += &p.length();
        }
        m
    }

    pub fn min_point(&self) -> Option<&Rational> {
        self.parts.first().map(|p| &p.lo)
    }

    pub fn max_point(&self) -> Option<&Rational> {
        self.parts.last().map(|p| &p.hi)
    }

    /// Exact membership test.
    pub fn contains(&self, x: &Rational) -> bool {
        // Binary search on part.lo, then check the candidate part.
        let idx = self.parts.partition_point(|p| &p.lo <= x);
        if idx > 0 && self.parts[idx - 1].contains(x) {
            return true;
        }
        idx < self.parts.len() && self.parts[idx].contains(x)
    }

    /// Exact distance from x to the set; `None` when the set is empty.
    pub fn distance(&self, x: &Rational) -> Option<Rational> {
        if self.parts.is_empty() {
            return None;
        }
        let idx = self.parts.partition_point(|p| &p.lo <= x);
        let mut best: Option<Rational> = None;
        for j in [idx.wrapping_sub(1), idx] {
            if let Some(p) = self.parts.get(j) {
                let d = p.distance_to(x);
                best = Some(match best {
                    Some(b) => b.min(d),
                    None => d,
                });
            }
        }
        best
    }

    fn ranges(&self) -> impl Iterator<Item = (Pos, Pos)> + '_ {
        self.parts.iter().map(|p| (p.start_pos(), p.end_pos()))
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let mut all: Vec<Interval> = self.parts.clone();
        all.extend(other.parts.iter().cloned());
        IntervalSet::canonicalize(all).expect("inputs already well-formed")
    }

    /// The parts that meet [lo, hi], located by binary search. Parts may
    /// extend beyond the range; the result is canonical.
    pub fn clipped_to(&self, lo: &Rational, hi: &Rational) -> IntervalSet {
        let a = self.parts.partition_point(|p| &p.hi < lo);
        let b = self.parts.partition_point(|p| &p.lo <= hi);
        IntervalSet { parts: self.parts[a.min(b)..b].to_vec() }
    }

    /// Insert an interval known to be strictly separated from every part
    /// (no overlap, no abutment). Sorted-position splice, O(log n) search.
    pub fn insert_disjoint(&mut self, iv: Interval) {
        let idx = self.parts.partition_point(|p| p.lo < iv.lo);
        debug_assert!(idx == 0 || self.parts[idx - 1].hi < iv.lo);
        debug_assert!(idx == self.parts.len() || iv.hi < self.parts[idx].lo);
        self.parts.insert(idx, iv);
    }

    pub fn intersection(&self, other: &IntervalSet) -> IntervalSet {
        let mut out: Vec<(Pos, Pos)> = Vec::new();
        let (mut i, mut j) = (0, 0);
        let a: Vec<(Pos, Pos)> = self.ranges().collect();
        let b: Vec<(Pos, Pos)> = other.ranges().collect();
        while i < a.len() && j < b.len() {
            let s = a[i].0.clone().max(b[j].0.clone());
            let e = a[i].1.clone().min(b[j].1.clone());
            if s <= e {
                out.push((s, e));
            }
            if a[i].1 <= b[j].1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        IntervalSet {
            parts: out.into_iter().map(|(s, e)| Interval::from_pos(s, e)).collect(),
        }
    }

    /// Exact set difference self \ other.
    pub fn difference(&self, other: &IntervalSet) -> IntervalSet {
        let mut out: Vec<(Pos, Pos)> = Vec::new();
        let b: Vec<(Pos, Pos)> = other.ranges().collect();
        let mut j = 0;
        for (s, e) in self.ranges() {
            let mut cursor = s;
            // Skip subtrahend ranges entirely below the cursor's part.
            while j < b.len() && b[j].1 < cursor && b[j].1 < e {
                j += 1;
            }
            let mut k = j;
            while k < b.len() && b[k].0 <= e {
                if b[k].1 < cursor {
                    k += 1;
                    continue;
                }
                if b[k].0 > cursor {
                    let end = b[k].0.pred().expect("range starts are At or Above");
                    out.push((cursor.clone(), end));
                }
                match b[k].1.succ() {
                    Some(next) => {
                        cursor = cursor.max(next);
                        if cursor > e {
                            break;
                        }
                    }
                    None => {
                        // Subtrahend end is x⁺: nothing of this part remains
                        // at or beyond it only if it covers through e.
                        cursor = Pos::above(b[k].1.x.clone());
                        if cursor > e {
                            break;
                        }
                    }
                }
                k += 1;
            }
            if cursor <= e {
                out.push((cursor, e));
            }
        }
        IntervalSet {
            parts: merge_sorted_ranges(out)
                .into_iter()
                .map(|(s, e)| Interval::from_pos(s, e))
                .collect(),
        }
    }

    /// Complement relative to the closed window.
    pub fn complement_in(&self, w: &Window) -> IntervalSet {
        IntervalSet::from_interval(w.as_interval()).difference(self)
    }

    /// Single entry point mirroring the four boolean operations.
    pub fn apply(op: SetOp, a: &IntervalSet, b: &IntervalSet, w: &Window) -> IntervalSet {
        match op {
            SetOp::Union => a.union(b),
            SetOp::Intersection => a.intersection(b),
            SetOp::Difference => a.difference(b),
            SetOp::ComplementInWindow => a.complement_in(w),
        }
    }

    /// Exact subset test.
    pub fn subset_of(&self, other: &IntervalSet) -> bool {
        self.difference(other).is_empty()
    }

    /// Exact disjointness test.
    pub fn disjoint_with(&self, other: &IntervalSet) -> bool {
        self.intersection(other).is_empty()
    }

    /// The open ε-neighborhood of a closed set: every part dilated by ε.
    pub fn eps_neighborhood(&self, eps: &Rational) -> Result<IntervalSet> {
        if !eps.is_positive() {
            return Err(Error::NonPositiveEps(eps.clone()));
        }
        if !self.is_closed() {
            return Err(Error::NotClosed);
        }
        let dilated: Vec<Interval> = self
            .parts
            .iter()
            .map(|p| Interval::open(&p.lo - eps, &p.hi + eps).expect("eps > 0"))
            .collect();
        IntervalSet::canonicalize(dilated)
    }

    /// The set together with all points of the window at distance exactly
    /// 1/n from it, n = 1..2^L. In a complement component both endpoints of
    /// which touch the set, the ladder from either side stops at the
    /// midpoint (beyond it the distance is measured from the other side).
    pub fn hat_set(&self, w: &Window, resolution_l: u32) -> Result<IntervalSet> {
        if self.is_empty() {
            return Err(Error::EmptySet);
        }
        if !self.is_closed() {
            return Err(Error::NotClosed);
        }
        let n_max: u64 = 1u64 << resolution_l.min(62);
        let mut pts: Vec<Interval> = Vec::new();
        for gap in self.complement_gaps(w) {
            let (lo, hi) = (&gap.lo, &gap.hi);
            let len = hi - lo;
            // Ladder climbing from the left endpoint, when it lies in the set.
            if gap.from_set_left {
                let bound = if gap.from_set_right {
                    len.midpoint(&Rational::zero())
                } else {
                    len.clone()
                };
                for n in ladder_indices(&bound, n_max) {
                    let x = lo + &Rational::new(1, n as i64);
                    if w.contains(&x) {
                        pts.push(Interval::point(x));
                    }
                }
            }
            if gap.from_set_right {
                let bound = if gap.from_set_left {
                    len.midpoint(&Rational::zero())
                } else {
                    len.clone()
                };
                for n in ladder_indices(&bound, n_max) {
                    let x = hi - &Rational::new(1, n as i64);
                    if w.contains(&x) {
                        pts.push(Interval::point(x));
                    }
                }
            }
        }
        let mut all = self.parts.clone();
        all.extend(pts);
        IntervalSet::canonicalize(all)
    }

    /// Complement components clipped to the window, tagged with whether each
    /// end abuts the set (as opposed to the window boundary).
    fn complement_gaps(&self, w: &Window) -> Vec<Gap> {
        let mut gaps = Vec::new();
        let mut push = |lo: Rational, hi: Rational, from_left: bool, from_right: bool| {
            if lo < hi {
                gaps.push(Gap { lo, hi, from_set_left: from_left, from_set_right: from_right });
            }
        };
        if self.parts.is_empty() {
            push(w.lo.clone(), w.hi.clone(), false, false);
            return gaps;
        }
        let first = &self.parts[0];
        if first.lo > w.lo {
            push(w.lo.clone(), first.lo.clone(), false, true);
        }
        for pair in self.parts.windows(2) {
            push(pair[0].hi.clone(), pair[1].lo.clone(), true, true);
        }
        let last = self.parts.last().expect("nonempty");
        if last.hi < w.hi {
            push(last.hi.clone(), w.hi.clone(), true, false);
        }
        gaps
    }

    /// Ladder gaps: the components of the truncated hat-set complement
    /// inside the window interior, enumerated sparsely and without
    /// sub-resolution holes. The ladder on each set-side descends only
    /// while consecutive gaps keep length at least `min_len`; everything
    /// finer is merged into a single endpoint-adjacent gap, so the emitted
    /// gaps together with their shared boundary points tile each component.
    /// When `clip` is given only gaps entirely inside it survive.
    pub fn ladder_gaps(
        &self,
        w: &Window,
        resolution_l: u32,
        min_len: &Rational,
        clip: Option<&IntervalSet>,
    ) -> Vec<LadderGap> {
        let n_hard: u64 = 1u64 << resolution_l.min(62);
        let mut out: Vec<LadderGap> = Vec::new();
        let keep = |iv: &Interval| match clip {
            Some(c) => IntervalSet::from_interval(iv.clone()).subset_of(c),
            None => true,
        };
        let mut emit = |lo: Rational, hi: Rational, merged: bool| {
            if &hi - &lo >= *min_len {
                if let Ok(iv) = Interval::open(lo, hi) {
                    if keep(&iv) {
                        out.push(LadderGap { span: iv, merged });
                    }
                }
            }
        };
        for gap in self.complement_gaps(w) {
            let len = &gap.hi - &gap.lo;
            // Ladder from each set-side stops at the midpoint for two-sided
            // components (beyond it the distance is measured from the other
            // side) and runs through the whole component otherwise.
            let side_bound = if gap.from_set_left && gap.from_set_right {
                len.midpoint(&Rational::zero())
            } else {
                len.clone()
            };
            let ns = ladder_indices(&side_bound, n_hard);
            let (n_min, n_top) = (*ns.start(), *ns.end());
            // Deepest materialized ladder index: pair gaps must stay at
            // least min_len long.
            let mut deepest = n_min;
            if n_min <= n_top {
                let mut n = n_min;
                while n < n_top {
                    let gap_len = Rational::new(1, (n * (n + 1)) as i64);
                    if gap_len < *min_len {
                        break;
                    }
                    deepest = n + 1;
                    n += 1;
                }
            }
            let mut left_inner: Option<Rational> = None;
            let mut right_inner: Option<Rational> = None;
            if gap.from_set_left && n_min <= n_top {
                for n in n_min..deepest {
                    emit(
                        &gap.lo + &Rational::new(1, (n + 1) as i64),
                        &gap.lo + &Rational::new(1, n as i64),
                        false,
                    );
                }
                // Endpoint-adjacent merged gap below the deepest point.
                emit(gap.lo.clone(), &gap.lo + &Rational::new(1, deepest as i64), true);
                left_inner = Some(&gap.lo + &Rational::new(1, n_min as i64));
            }
            if gap.from_set_right && n_min <= n_top {
                for n in n_min..deepest {
                    emit(
                        &gap.hi - &Rational::new(1, n as i64),
                        &gap.hi - &Rational::new(1, (n + 1) as i64),
                        false,
                    );
                }
                emit(&gap.hi - &Rational::new(1, deepest as i64), gap.hi.clone(), true);
                right_inner = Some(&gap.hi - &Rational::new(1, n_min as i64));
            }
            // Residual region between the coarsest ladder points (the middle
            // gap, a faithful component), or between a ladder end and the
            // window edge. A component that could not host any ladder point
            // collapses entirely and is marked merged.
            let mid_lo = left_inner.clone().unwrap_or_else(|| gap.lo.clone());
            let mid_hi = right_inner.clone().unwrap_or_else(|| gap.hi.clone());
            let sides_present = left_inner.is_some() == gap.from_set_left
                && right_inner.is_some() == gap.from_set_right;
            if mid_lo < mid_hi {
                emit(mid_lo, mid_hi, !sides_present);
            }
        }
        out.sort_by(|a, b| a.span.cmp(&b.span));
        out
    }
}

struct Gap {
    lo: Rational,
    hi: Rational,
    from_set_left: bool,
    from_set_right: bool,
}

/// Indices n (ascending) whose ladder point at distance 1/n from the set
/// stays within `bound` of the near endpoint, capped at n ≤ n_max.
fn ladder_indices(bound: &Rational, n_max: u64) -> std::ops::RangeInclusive<u64> {
    use num_traits::ToPrimitive;
    // 1/n <= bound  ⟺  n >= 1/bound.
    let n_min = if bound.is_positive() {
        bound.recip().ceil_int().to_u64().unwrap_or(u64::MAX).max(1)
    } else {
        u64::MAX
    };
    if n_min > n_max {
        #[allow(clippy::reversed_empty_ranges)]
        return 1..=0; // empty
    }
    n_min..=n_max
}

fn reaches(end: &Pos, next_start: &Pos) -> bool {
    if next_start <= end {
        return true;
    }
    match end.succ() {
        Some(s) => s == *next_start,
        None => false,
    }
}

fn merge_sorted_ranges(ranges: Vec<(Pos, Pos)>) -> Vec<(Pos, Pos)> {
    let mut merged: Vec<(Pos, Pos)> = Vec::with_capacity(ranges.len());
    for (s, e) in ranges {
        match merged.last_mut() {
            Some((_, last_e)) if reaches(last_e, &s) => {
                if e > *last_e {
                    *last_e = e;
                }
            }
            _ => merged.push((s, e)),
        }
    }
    merged
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return write!(f, "{{}}");
        }
        let mut first = true;
        for p in &self.parts {
            if !first {
                write!(f, " ∪ ")?;
            }
            write!(f, "{}", p)?;
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn closed(a: (i64, i64), b: (i64, i64)) -> Interval {
        Interval::closed(rat(a.0, a.1), rat(b.0, b.1)).unwrap()
    }

    fn window(a: i64, b: i64) -> Window {
        Window::new(Rational::int(a), Rational::int(b)).unwrap()
    }

    #[test]
    fn canonicalize_overlapping_merge() {
        let s = IntervalSet::canonicalize(vec![closed((0, 1), (1, 2)), closed((1, 4), (3, 4))])
            .unwrap();
        assert_eq!(s.components(), &[closed((0, 1), (3, 4))]);
        assert_eq!(s.measure(), rat(3, 4));
    }

    #[test]
    fn canonicalize_empty() {
        let s = IntervalSet::canonicalize(vec![]).unwrap();
        assert!(s.is_empty());
        assert_eq!(s.measure(), Rational::zero());
    }

    #[test]
    fn canonicalize_touching_across_flags() {
        // (0,1/3) ∪ [1/3,1/2] = (0,1/2]
        let a = Interval::open(rat(0, 1), rat(1, 3)).unwrap();
        let b = closed((1, 3), (1, 2));
        let s = IntervalSet::canonicalize(vec![a, b]).unwrap();
        assert_eq!(
            s.components(),
            &[Interval::new(rat(0, 1), rat(1, 2), false, true).unwrap()]
        );
        // (0,1/3) ∪ (1/3,1/2) keeps the puncture.
        let a = Interval::open(rat(0, 1), rat(1, 3)).unwrap();
        let b = Interval::open(rat(1, 3), rat(1, 2)).unwrap();
        let s = IntervalSet::canonicalize(vec![a, b]).unwrap();
        assert_eq!(s.num_parts(), 2);
    }

    #[test]
    fn canonicalize_idempotent() {
        let s = IntervalSet::canonicalize(vec![
            Interval::open(rat(0, 1), rat(1, 3)).unwrap(),
            Interval::point(rat(1, 3)),
            closed((1, 2), (2, 3)),
        ])
        .unwrap();
        let again = IntervalSet::canonicalize(s.components().to_vec()).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn intersection_example() {
        let a = IntervalSet::from_interval(closed((0, 1), (1, 2)));
        let b = IntervalSet::from_interval(closed((1, 4), (3, 4)));
        assert_eq!(a.intersection(&b).components(), &[closed((1, 4), (1, 2))]);
    }

    #[test]
    fn complement_example() {
        let a = IntervalSet::from_interval(closed((1, 4), (1, 2)));
        let w = window(0, 1);
        let c = a.complement_in(&w);
        assert_eq!(
            c.components(),
            &[
                Interval::new(rat(0, 1), rat(1, 4), true, false).unwrap(),
                Interval::new(rat(1, 2), rat(1, 1), false, true).unwrap(),
            ]
        );
    }

    #[test]
    fn difference_cover_example() {
        // [0,1] minus the open cover (3/8, 5/8) of 1/2 with radius 1/8.
        let a = IntervalSet::from_interval(closed((0, 1), (1, 1)));
        let cover = IntervalSet::from_interval(Interval::open(rat(3, 8), rat(5, 8)).unwrap());
        let d = a.difference(&cover);
        assert_eq!(d.components(), &[closed((0, 1), (3, 8)), closed((5, 8), (1, 1))]);
    }

    #[test]
    fn difference_removes_points() {
        let a = IntervalSet::from_interval(closed((0, 1), (1, 1)));
        let p = IntervalSet::point(rat(1, 2));
        let d = a.difference(&p);
        assert_eq!(d.num_parts(), 2);
        assert!(!d.contains(&rat(1, 2)));
        assert_eq!(d.measure(), Rational::int(1));
        assert_eq!(d.union(&p), a);
    }

    #[test]
    fn measure_identity() {
        let a = IntervalSet::canonicalize(vec![closed((0, 1), (1, 2)), Interval::point(rat(3, 4))])
            .unwrap();
        let b = IntervalSet::canonicalize(vec![closed((1, 4), (2, 3))]).unwrap();
        let lhs = a.union(&b).measure() + a.intersection(&b).measure();
        let rhs = a.measure() + b.measure();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn distance_examples() {
        let s = IntervalSet::from_interval(closed((1, 4), (1, 2)));
        assert_eq!(s.distance(&rat(0, 1)), Some(rat(1, 4)));
        assert_eq!(s.distance(&rat(1, 3)), Some(Rational::zero()));
        let s2 = s.union(&IntervalSet::point(rat(7, 8)));
        assert_eq!(s2.distance(&rat(1, 1)), Some(rat(1, 8)));
        assert_eq!(IntervalSet::empty().distance(&rat(0, 1)), None);
    }

    #[test]
    fn eps_neighborhood_examples() {
        let s = IntervalSet::from_interval(closed((1, 4), (1, 2)));
        let n = s.eps_neighborhood(&rat(1, 8)).unwrap();
        assert_eq!(n.components(), &[Interval::open(rat(1, 8), rat(5, 8)).unwrap()]);

        let two = IntervalSet::points([rat(0, 1), rat(1, 1)]);
        let n = two.eps_neighborhood(&rat(1, 4)).unwrap();
        assert_eq!(
            n.components(),
            &[
                Interval::open(rat(-1, 4), rat(1, 4)).unwrap(),
                Interval::open(rat(3, 4), rat(5, 4)).unwrap(),
            ]
        );

        assert!(s.eps_neighborhood(&rat(0, 1)).is_err());
        let half_open = IntervalSet::from_interval(
            Interval::new(rat(0, 1), rat(1, 2), true, false).unwrap(),
        );
        assert!(half_open.eps_neighborhood(&rat(1, 8)).is_err());
    }

    #[test]
    fn eps_neighborhood_cantor_depth2() {
        let c2 = crate::specs::cantor_approximation(2);
        let n = c2.eps_neighborhood(&rat(1, 20)).unwrap();
        // Gaps of C_2 measure 1/9 and 1/3; dilation by 1/20 closes none.
        assert_eq!(n.num_parts(), 4);
        for (part, orig) in n.components().iter().zip(c2.components()) {
            assert_eq!(part.lo, &orig.lo - &rat(1, 20));
            assert_eq!(part.hi, &orig.hi + &rat(1, 20));
        }
    }

    #[test]
    fn hat_set_single_point() {
        let f = IntervalSet::point(rat(0, 1));
        let w = Window::new(rat(-1, 1), rat(1, 1)).unwrap();
        let hat = f.hat_set(&w, 2).unwrap();
        let mut expected = vec![rat(0, 1)];
        for n in 1..=4i64 {
            expected.push(rat(1, n));
            expected.push(rat(-1, n));
        }
        let expected = IntervalSet::points(expected);
        assert_eq!(hat, expected);
    }

    #[test]
    fn hat_set_interval_in_unit_window() {
        let f = IntervalSet::from_interval(closed((1, 4), (1, 2)));
        let w = window(0, 1);
        let hat = f.hat_set(&w, 2).unwrap();
        // Right side: 1/2 + 1/n for n = 2,3,4; left side: 1/4 - 1/4 = 0.
        let mut expected = vec![closed((1, 4), (1, 2))];
        for x in [rat(1, 1), rat(5, 6), rat(3, 4), rat(0, 1)] {
            expected.push(Interval::point(x));
        }
        assert_eq!(hat, IntervalSet::canonicalize(expected).unwrap());
    }

    #[test]
    fn hat_set_full_window() {
        let f = IntervalSet::from_interval(closed((0, 1), (1, 1)));
        let w = window(0, 1);
        assert_eq!(f.hat_set(&w, 4).unwrap(), f);
        assert!(IntervalSet::empty().hat_set(&w, 2).is_err());
    }

    #[test]
    fn hat_set_two_sided_component_stops_at_midpoint() {
        // F = {0} ∪ {1}: inside (0,1) ladders from both sides stop at 1/2.
        let f = IntervalSet::points([rat(0, 1), rat(1, 1)]);
        let w = window(-1, 2);
        let hat = f.hat_set(&w, 3).unwrap();
        // Inside (0,1): from left 1/2..1/8, from right 1/2..7/8; midpoint 1/2
        // is at distance exactly 1/2 from both endpoints.
        assert!(hat.contains(&rat(1, 2)));
        assert!(hat.contains(&rat(1, 8)));
        assert!(hat.contains(&rat(7, 8)));
        // 1/1-ladder from 0 would land on 1 (in F); from the outside both
        // ladders run to the window edge.
        assert!(hat.contains(&rat(-1, 1)));
        assert!(hat.contains(&rat(2, 1)));
        // Every hat point is at distance exactly 1/n from F.
        for p in hat.components() {
            if f.contains(&p.lo) {
                continue;
            }
            let d = f.distance(&p.lo).unwrap();
            let inv = d.recip();
            assert_eq!(inv.floor_int(), inv.ceil_int(), "distance {} is not 1/n", d);
        }
    }

    #[test]
    fn components_of_cantor_depth3_complement() {
        let c3 = crate::specs::cantor_approximation(3);
        let w = window(0, 1);
        let gaps = c3.complement_in(&w);
        assert_eq!(gaps.num_parts(), 7);
    }

    // With min_len = 2^(1-L) and L = 2j+1, the sparse enumerator descends
    // exactly to ladder index 2^j, so it must reproduce the components of
    // the materialized hat set at resolution j, endpoint-adjacent merged
    // gaps included.
    fn assert_sparse_matches_dense(f: &IntervalSet, w: &Window, j: u32) {
        let l = 2 * j + 1;
        let min_len = Rational::pow2(1 - l as i64);
        let hat = f.hat_set(w, j).unwrap();
        let dense: Vec<Interval> = hat
            .complement_in(w)
            .components()
            .iter()
            .map(|iv| Interval::open(iv.lo.clone(), iv.hi.clone()).unwrap())
            .collect();
        let sparse: Vec<Interval> =
            f.ladder_gaps(w, l, &min_len, None).into_iter().map(|g| g.span).collect();
        assert_eq!(sparse, dense);
    }

    #[test]
    fn ladder_gaps_match_hat_set_components() {
        let f = IntervalSet::points([rat(0, 1)]);
        let w = Window::new(rat(-1, 1), rat(1, 1)).unwrap();
        assert_sparse_matches_dense(&f, &w, 2);
        assert_sparse_matches_dense(&f, &w, 3);
    }

    #[test]
    fn ladder_gaps_two_sided_with_middle() {
        let f = IntervalSet::points([rat(0, 1), rat(1, 1)]);
        let w = window(-1, 2);
        assert_sparse_matches_dense(&f, &w, 2);
        assert_sparse_matches_dense(&f, &w, 3);
        let f2 = IntervalSet::canonicalize(vec![
            Interval::closed(rat(1, 4), rat(1, 2)).unwrap(),
            Interval::point(rat(7, 8)),
        ])
        .unwrap();
        assert_sparse_matches_dense(&f2, &w, 3);
    }

    #[test]
    fn ladder_gaps_tile_each_component() {
        // Gaps plus shared boundary points cover the complement exactly.
        let f = IntervalSet::points([rat(0, 1)]);
        let w = Window::new(rat(-1, 1), rat(1, 1)).unwrap();
        let min_len = Rational::pow2(-13);
        let gaps: Vec<Interval> =
            f.ladder_gaps(&w, 14, &min_len, None).into_iter().map(|g| g.span).collect();
        let mut union = IntervalSet::empty();
        for g in &gaps {
            union = union.union(&IntervalSet::from_interval(g.clone()));
        }
        for pair in gaps.windows(2) {
            assert!(pair[0].hi <= pair[1].lo);
        }
        // Adding the shared boundary points (the ladder, not the set)
        // closes the complement of {0} in (-1,1).
        let mut with_pts: Vec<Interval> = union.components().to_vec();
        for g in &gaps {
            for p in [&g.lo, &g.hi] {
                if !f.contains(p) {
                    with_pts.push(Interval::point(p.clone()));
                }
            }
        }
        let closed = IntervalSet::canonicalize(with_pts).unwrap();
        let expected = IntervalSet::from_interval(w.as_interval())
            .difference(&f);
        assert_eq!(closed, expected);
    }
}
