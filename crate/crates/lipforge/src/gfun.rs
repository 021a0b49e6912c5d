//! The per-stage density construction: an open cover G of the stage's
//! witness material with controlled measure near the exclusion set, the
//! family of ladder components inside G, the step density built from the
//! allocator pieces, and its exact integral g.
//!
//! The cover is a finite union of open spans around selected parts of F,
//! with span radii snapped to ladder values 1/m. Two exact inequalities
//! are enforced by construction and re-checked verbatim: the measure of G
//! stays below eps, and for every component I of the exclusion complement
//! and every boundary-anchored subinterval U of I the measure of G inside
//! U stays below (eps/4)|U|. The density is a sum of scaled indicators on
//! the pieces (one per ladder component inside G) plus the plain indicator
//! of F ∩ G, so g is piecewise linear and every property check below is an
//! exact rational comparison.

use crate::epm::FatCantorPiece;
use crate::error::{Error, Result};
use crate::hset::HBundle;
use crate::interval::{Interval, Window};
use crate::pl::PLFunction;
use crate::rational::Rational;
use crate::set::{IntervalSet, LadderGap};
use serde::{Deserialize, Serialize};

/// One covering span of G around a part of F.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Cover {
    pub part: Interval,
    pub span: Interval,
    pub radius: Rational,
}

/// One scaled-indicator summand of the density.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhiPart {
    pub j: Interval,
    pub weight: Rational,
    pub support: IntervalSet,
}

/// Everything stage k produces.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GBundle {
    pub k: usize,
    pub eps: Rational,
    pub f: IntervalSet,
    pub h: IntervalSet,
    pub e: IntervalSet,
    pub g_set: IntervalSet,
    pub covers: Vec<Cover>,
    pub j_list: Vec<LadderGap>,
    pub phi: Vec<PhiPart>,
    pub indicator: IntervalSet,
    pub g: PLFunction,
    /// Witnesses of this stage: sampled target points in F ∖ E, covered by G.
    pub witnesses: Vec<Rational>,
}

/// One exact check outcome.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), pass, detail: detail.into() }
    }
}

/// Open cover of the stage's witness material inside the exclusion
/// complement. The cover consists of small spans around witness points
/// and degenerate parts of F — never around whole solid parts, whose
/// measure alone could break the density bound. Radii shrink toward the
/// anchors; both the global measure bound and the anchored-density bound
/// are verified exactly, halving all radii and retrying when they fail.
pub fn build_g_set(
    f: &IntervalSet,
    e: &IntervalSet,
    eps: &Rational,
    window: &Window,
    resolution_l: u32,
    witnesses: &[Rational],
) -> Result<(IntervalSet, Vec<Cover>)> {
    let domain = IntervalSet::from_interval(window.interior()).difference(e);
    let exempt = Rational::pow2(-(resolution_l as i64));

    // Zone centers: witnesses lying in F ∖ E, plus degenerate parts of F.
    let mut centers: Vec<Rational> = witnesses
        .iter()
        .filter(|x| f.contains(x) && !e.contains(x))
        .cloned()
        .collect();
    for part in f.components() {
        if part.is_point() && !e.contains(&part.lo) {
            centers.push(part.lo.clone());
        }
    }
    centers.sort();
    centers.dedup();

    // Per-anchor zone counts split the density budget deterministically.
    let components: Vec<&Interval> = domain.components().iter().collect();
    let mut side_counts: Vec<(i64, i64)> = vec![(0, 0); components.len()];
    let mut placed: Vec<(usize, Rational, Rational)> = Vec::new();
    for x in centers {
        let Some(ci) = components.iter().position(|i| i.lo < x && x < i.hi) else {
            continue;
        };
        let i = components[ci];
        let d_lo = &x - &i.lo;
        let d_hi = &i.hi - &x;
        let delta = d_lo.clone().min(d_hi.clone());
        if delta < exempt {
            continue;
        }
        if d_lo <= d_hi {
            side_counts[ci].0 += 1;
        } else {
            side_counts[ci].1 += 1;
        }
        placed.push((ci, x, delta));
    }

    let mut shrink = Rational::one();
    for _round in 0..48 {
        let mut covers: Vec<Cover> = Vec::new();
        for (ci, x, delta) in &placed {
            let i = components[*ci];
            let d_lo = x - &i.lo;
            let d_hi = &i.hi - x;
            let near_count = if d_lo <= d_hi {
                side_counts[*ci].0
            } else {
                side_counts[*ci].1
            };
            let budget = &(&(eps * delta) / &Rational::int(8 * near_count.max(1))) * &shrink;
            let s_raw = (delta / &Rational::int(4)).min(budget);
            let Some(s) = snap_to_ladder(&s_raw) else { continue };
            let span = Interval::open(x - &s, x + &s).expect("s > 0");
            covers.push(Cover { part: Interval::point(x.clone()), span, radius: s });
        }
        let g_set = IntervalSet::canonicalize(
            covers.iter().map(|c| c.span.clone()).collect(),
        )?;
        let measure_ok = g_set.measure() < *eps;
        let anchored_ok = anchored_density_ok(&g_set, e, eps, window);
        if measure_ok && anchored_ok {
            // Every non-exempt witness must be covered.
            for x in witnesses {
                if f.contains(x) && !e.contains(x) {
                    let d_e = e.distance(x).unwrap_or_else(|| window.length());
                    let d_w = (x - &window.lo).min(&window.hi - x);
                    if d_e >= exempt && d_w >= exempt && !g_set.contains(x) {
                        return Err(Error::Construction {
                            stage: "cover",
                            index: 0,
                            detail: format!("witness {} left uncovered", x),
                        });
                    }
                }
            }
            return Ok((g_set, covers));
        }
        shrink = shrink / Rational::int(2);
    }
    Err(Error::Construction {
        stage: "cover",
        index: 0,
        detail: "density bounds unreachable even with vanishing radii".into(),
    })
}

/// Largest ladder value 1/m with 1/m <= s; None when s <= 0.
fn snap_to_ladder(s: &Rational) -> Option<Rational> {
    use num_traits::ToPrimitive;
    if !s.is_positive() {
        return None;
    }
    if *s >= Rational::one() {
        return Some(Rational::one());
    }
    let m = s.recip().ceil_int().to_i64()?;
    Some(Rational::new(1, m))
}

/// Exact check of the anchored density bound: for every component I of the
/// exclusion complement (window edges act as anchors) and every
/// boundary-anchored U ⊆ I, measure(G ∩ U) < (eps/4)|U|. The prefix
/// measure is piecewise linear in the endpoint of U with slopes in {0,1},
/// so it suffices to test U ending at each span boundary inside I.
pub fn anchored_density_ok(
    g_set: &IntervalSet,
    e: &IntervalSet,
    eps: &Rational,
    window: &Window,
) -> bool {
    let quarter_eps = eps / &Rational::int(4);
    let domain = IntervalSet::from_interval(window.interior()).difference(e);
    for i in domain.components() {
        let cell = IntervalSet::from_interval(i.clone());
        let g_in = g_set.intersection(&cell);
        if g_in.is_empty() {
            continue;
        }
        // Left anchor: U = (i.lo, c); the deficit (eps/4)|U| - |G∩U| has
        // local minima exactly at span right-ends.
        let mut prefix = Rational::zero();
        for part in g_in.components() {
            prefix += &part.length();
            let u_len = &part.hi - &i.lo;
            if prefix >= &quarter_eps * &u_len {
                return false;
            }
        }
        // Right anchor: U = (c, i.hi); minima at span left-ends.
        let mut suffix = Rational::zero();
        for part in g_in.components().iter().rev() {
            suffix += &part.length();
            let u_len = &i.hi - &part.lo;
            if suffix >= &quarter_eps * &u_len {
                return false;
            }
        }
    }
    true
}

/// The ladder components of F that lie inside G and carry a piece.
pub fn build_j(
    f: &IntervalSet,
    g_set: &IntervalSet,
    h_bundle: &HBundle,
    window: &Window,
    resolution_l: u32,
) -> Vec<LadderGap> {
    let min_len = Rational::pow2(1 - resolution_l as i64);
    f.ladder_gaps(window, resolution_l, &min_len, Some(g_set))
        .into_iter()
        .filter(|j| piece_for(h_bundle, &j.span).is_some())
        .collect()
}

pub fn piece_for<'a>(h_bundle: &'a HBundle, j: &Interval) -> Option<&'a FatCantorPiece> {
    h_bundle
        .pieces
        .binary_search_by(|(g, _)| g.cmp(j))
        .ok()
        .map(|idx| &h_bundle.pieces[idx].1)
}

/// Assemble the stage bundle: cover, families, density, exact integral.
#[allow(clippy::too_many_arguments)]
pub fn build_g_bundle(
    k: usize,
    f: &IntervalSet,
    h_bundle: &HBundle,
    e: &IntervalSet,
    window: &Window,
    resolution_l: u32,
    witnesses: &[Rational],
) -> Result<GBundle> {
    let eps = Rational::pow2(-(k as i64));
    let f_minus_e = f.difference(e);
    let (g_set, covers) = if f_minus_e.is_empty() {
        (IntervalSet::empty(), Vec::new())
    } else {
        build_g_set(f, e, &eps, window, resolution_l, witnesses).map_err(|err| match err {
            Error::Construction { stage, detail, .. } => {
                Error::Construction { stage, index: k, detail }
            }
            other => other,
        })?
    };
    let j_list = build_j(f, &g_set, h_bundle, window, resolution_l);
    let mut phi = Vec::with_capacity(j_list.len());
    let mut segments: Vec<(Interval, Rational)> = Vec::new();
    for j in &j_list {
        let piece = piece_for(h_bundle, &j.span).ok_or_else(|| Error::Construction {
            stage: "density",
            index: k,
            detail: format!("component {} has no piece", j.span),
        })?;
        let weight = &j.span.length() / &piece.measure;
        for part in piece.kept.components() {
            segments.push((part.clone(), weight.clone()));
        }
        phi.push(PhiPart { j: j.span.clone(), weight, support: piece.kept.clone() });
    }
    let indicator = f.intersection(&g_set);
    for part in indicator.components() {
        segments.push((part.clone(), Rational::one()));
    }
    let g = PLFunction::from_density(&segments)?;

    let stage_witnesses: Vec<Rational> = witnesses
        .iter()
        .filter(|x| f.contains(x) && !e.contains(x) && g_set.contains(x))
        .cloned()
        .collect();

    // Exact mass identity: total variation is the covered ladder mass plus
    // the indicator mass, and stays below eps.
    let mut mass = indicator.measure();
    for j in &j_list {
        mass += &j.span.length();
    }
    if g.total_variation() != mass {
        return Err(Error::Construction {
            stage: "density",
            index: k,
            detail: "integral mass does not match component mass".into(),
        });
    }
    if !g_set.is_empty() && mass >= eps {
        return Err(Error::Construction {
            stage: "density",
            index: k,
            detail: format!("stage mass {} reached eps {}", mass, eps),
        });
    }

    Ok(GBundle {
        k,
        eps,
        f: f.clone(),
        h: h_bundle.h.clone(),
        e: e.clone(),
        g_set,
        covers,
        j_list,
        phi,
        indicator,
        g,
        witnesses: stage_witnesses,
    })
}

/// The cheap per-stage checks: slope support, slope bound, total mass.
pub fn stage_checks(b: &GBundle, slope_cap: &Rational) -> Vec<Check> {
    let mut out = Vec::new();

    let support_ok = b
        .g
        .positive_slope_spans()
        .iter()
        .all(|span| IntervalSet::from_interval(span.clone()).subset_of(&b.h));
    out.push(Check::new(
        format!("stage {:02} slope support inside H", b.k),
        support_ok,
        String::new(),
    ));

    let max_slope = b.g.max_slope();
    out.push(Check::new(
        format!("stage {:02} slope bounded", b.k),
        max_slope <= *slope_cap,
        format!("max slope {}", max_slope),
    ));

    let tv = b.g.total_variation();
    out.push(Check::new(
        format!("stage {:02} total variation below eps", b.k),
        tv < b.eps,
        format!("tv {} vs eps {}", tv, b.eps),
    ));

    let disjoint_e = b.g_set.disjoint_with(&b.e);
    out.push(Check::new(
        format!("stage {:02} cover avoids exclusion set", b.k),
        disjoint_e,
        String::new(),
    ));

    out
}

/// Oscillation bound over intervals meeting the exclusion set:
/// osc(g, U) <= eps |U|, exactly, for every supplied U.
pub fn oscillation_checks(b: &GBundle, corpus: &[Interval]) -> Check {
    let mut worst: Option<(Interval, Rational, Rational)> = None;
    let mut pass = true;
    let mut tested = 0usize;
    for u in corpus {
        if b.e.disjoint_with(&IntervalSet::from_interval(u.clone())) {
            continue;
        }
        tested += 1;
        let osc = b.g.oscillation(u);
        let bound = &b.eps * &u.length();
        if osc > bound {
            pass = false;
            worst = Some((u.clone(), osc, bound));
            break;
        }
    }
    let detail = match worst {
        Some((u, osc, bound)) => format!("violated at {}: osc {} > {}", u, osc, bound),
        None => format!("{} intervals tested", tested),
    };
    Check::new(format!("stage {:02} oscillation near exclusion set", b.k), pass, detail)
}

/// One element of a covered chain: a ladder component of the family, or a
/// covered piece of F carrying density one.
#[derive(Clone, Debug)]
struct ChainElement {
    span: Interval,
    is_gap: bool,
    merged: bool,
}

/// Walk the covered region to one side of a witness: a maximal chain of
/// ladder components and indicator parts abutting at shared points. The
/// caller still confirms hulls against G, since abutting open gaps meeting
/// only at a point of two different covering spans are not connected in G.
fn covered_chain(b: &GBundle, x: &Rational, rightward: bool) -> Vec<ChainElement> {
    let mut elements: Vec<ChainElement> = b
        .j_list
        .iter()
        .map(|j| ChainElement { span: j.span.clone(), is_gap: true, merged: j.merged })
        .collect();
    elements.extend(
        b.indicator
            .components()
            .iter()
            .map(|p| ChainElement { span: p.clone(), is_gap: false, merged: false }),
    );
    elements.sort_by(|a, b| a.span.cmp(&b.span));
    let mut chain: Vec<ChainElement> = Vec::new();
    let mut pos = x.clone();
    // An indicator part containing x starts the chain from inside.
    if let Some(first) = elements
        .iter()
        .find(|e| !e.is_gap && !e.span.is_point() && e.span.contains(x))
    {
        if rightward && first.span.hi > *x {
            chain.push(first.clone());
            pos = first.span.hi.clone();
        } else if !rightward && first.span.lo < *x {
            chain.push(first.clone());
            pos = first.span.lo.clone();
        }
    }
    loop {
        let next = if rightward {
            elements.iter().find(|e| e.span.lo == pos && e.span.hi > pos)
        } else {
            elements.iter().find(|e| e.span.hi == pos && e.span.lo < pos)
        };
        match next {
            Some(e) => {
                pos = if rightward { e.span.hi.clone() } else { e.span.lo.clone() };
                chain.push(e.clone());
            }
            None => break,
        }
    }
    chain
}

/// The increment identity along covered ladder points: for every chain
/// endpoint y with the closed hull [x,y] inside G, the increment of g
/// equals |y - x| exactly. A chain ending inside a covered piece of F
/// (half-open indicator part) is tested at an interior point instead.
pub fn increment_identity_check(b: &GBundle) -> Check {
    let mut pairs = 0usize;
    for x in &b.witnesses {
        let gx = b.g.eval(x);
        for rightward in [true, false] {
            let chain = covered_chain(b, x, rightward);
            for e in &chain {
                let mut y = if rightward { e.span.hi.clone() } else { e.span.lo.clone() };
                if !e.is_gap && !hull_inside(b, x, &y) {
                    // Retreat to the midpoint of the covered piece.
                    let anchor = if rightward { &e.span.lo } else { &e.span.hi };
                    y = anchor.midpoint(&y);
                }
                if !hull_inside(b, x, &y) {
                    break;
                }
                pairs += 1;
                let inc = (b.g.eval(&y) - gx.clone()).abs();
                let dist = (&y - x).abs();
                if inc != dist {
                    return Check::new(
                        format!("stage {:02} increment identity", b.k),
                        false,
                        format!("x={} y={}: increment {} vs distance {}", x, y, inc, dist),
                    );
                }
            }
        }
    }
    Check::new(
        format!("stage {:02} increment identity", b.k),
        true,
        format!("{} ladder pairs exact", pairs),
    )
}

fn hull_inside(b: &GBundle, x: &Rational, y: &Rational) -> bool {
    let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
    if lo == hi {
        return true;
    }
    let hull = IntervalSet::from_interval(
        Interval::closed(lo.clone(), hi.clone()).expect("lo < hi"),
    );
    hull.subset_of(&b.g_set)
}

/// Difference-quotient bounds at covered scales: for every witness x,
/// every N in 2..=n_max, and every admissible y with 0 < |y - x| <= 1/N,
/// the quotient lies strictly inside ((N-1)/(N+1), (N+1)/(N-1)).
///
/// Admissible y: chain endpoints (shared hat points and piece boundaries),
/// and interior points of elements that faithfully represent the ideal
/// complement at this depth — proper ladder gaps and covered pieces of F.
/// Interiors of merged gaps hide sub-resolution structure, so quotients
/// there are only meaningful at the endpoints. Quotients of a piecewise
/// linear function are monotone between breakpoints, so testing the
/// breakpoints inside admissible elements together with all element
/// endpoints covers the admissible continuum exactly.
pub fn quotient_bound_check(b: &GBundle, n_max: i64) -> Check {
    let mut tested = 0usize;
    for x in &b.witnesses {
        let gx = b.g.eval(x);
        for rightward in [true, false] {
            let chain = covered_chain(b, x, rightward);
            if chain.is_empty() {
                continue;
            }
            // Quotients start beyond the innermost rung when the chain
            // opens with a gap abutting x.
            let first = &chain[0];
            let y_floor: Rational = if !first.is_gap {
                x.clone() // covered piece of F: density-one region from x on
            } else if rightward {
                first.span.hi.clone()
            } else {
                first.span.lo.clone()
            };
            // Collect admissible candidates along the verified hull.
            let mut endpoint_candidates: Vec<Rational> = Vec::new();
            let mut interior_elements: Vec<&ChainElement> = Vec::new();
            for (idx, e) in chain.iter().enumerate() {
                let y = if rightward { &e.span.hi } else { &e.span.lo };
                if !hull_inside(b, x, y) {
                    if !e.is_gap {
                        let anchor = if rightward { &e.span.lo } else { &e.span.hi };
                        let mid = anchor.midpoint(y);
                        if hull_inside(b, x, &mid) {
                            endpoint_candidates.push(mid);
                        }
                    }
                    break;
                }
                endpoint_candidates.push(y.clone());
                if !e.merged && (idx > 0 || !e.is_gap) {
                    interior_elements.push(e);
                }
            }
            if endpoint_candidates.is_empty() {
                continue;
            }
            for n in 2..=n_max {
                let scale = Rational::new(1, n);
                let lower = Rational::new(n - 1, n + 1);
                let upper = Rational::new(n + 1, n - 1);
                let mut candidates: Vec<Rational> = endpoint_candidates.clone();
                for e in &interior_elements {
                    for bp in b.g.breakpoints_within(&e.span.lo, &e.span.hi) {
                        candidates.push(bp.clone());
                    }
                    // The scale boundary, when it falls inside a faithful
                    // element.
                    let y_scale = if rightward { x + &scale } else { x - &scale };
                    if e.span.contains(&y_scale) {
                        candidates.push(y_scale);
                    }
                }
                for y in candidates {
                    if y == *x || y == y_floor {
                        continue;
                    }
                    let dist = (&y - x).abs();
                    if !dist.is_positive() || dist > scale || dist < (&y_floor - x).abs() {
                        continue;
                    }
                    tested += 1;
                    let q = (b.g.eval(&y) - gx.clone()).abs() / dist;
                    if q <= lower || q >= upper {
                        return Check::new(
                            format!("stage {:02} quotient bounds", b.k),
                            false,
                            format!(
                                "x={} y={} n={}: quotient {} outside ({}, {})",
                                x, y, n, q, lower, upper
                            ),
                        );
                    }
                }
            }
        }
    }
    Check::new(
        format!("stage {:02} quotient bounds", b.k),
        true,
        format!("{} quotient samples exact", tested),
    )
}
