//! Exact pointwise analysis of the built functions: scale-indexed
//! difference-quotient profiles, oscillations, and the witness-radius
//! recursion that certifies a finite lower Lipschitz estimate at points
//! off the target set.
//!
//! Profiles are reported as grid estimates with explicit semantics: the
//! minimum over a decreasing radius grid is an upper bound for the liminf
//! along that grid, the maximum a lower bound for the limsup. No true
//! limits are claimed.

use crate::assembly::BuildReport;
use crate::error::{Error, Result};
use crate::gfun::GBundle;
use crate::pl::PLFunction;
use crate::rational::Rational;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuotientRow {
    pub r: Rational,
    pub sup_quotient: Rational,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuotientProfile {
    pub x: Rational,
    /// Rows sorted by decreasing radius.
    pub rows: Vec<QuotientRow>,
}

impl QuotientProfile {
    /// Upper bound for the liminf along this grid: the smallest row.
    pub fn lip_estimate(&self) -> Option<Rational> {
        self.rows.iter().map(|r| r.sup_quotient.clone()).min()
    }

    /// Lower bound for the limsup along this grid: the largest row.
    pub fn big_lip_estimate(&self) -> Option<Rational> {
        self.rows.iter().map(|r| r.sup_quotient.clone()).max()
    }
}

/// sup over y in [x-r, x+r] of |f(y) - f(x)| / r. For a nondecreasing f
/// the supremum is attained at an endpoint of the ball.
pub fn sup_quotient(f: &PLFunction, x: &Rational, r: &Rational) -> Rational {
    assert!(r.is_positive(), "radius must be positive");
    let fx = f.eval(x);
    let up = f.eval(&(x + r)) - fx.clone();
    let down = fx - f.eval(&(x - r));
    up.max(down) / r.clone()
}

/// Evaluate the quotient over a strictly decreasing positive radius grid.
pub fn lip_profile(f: &PLFunction, x: &Rational, grid: &[Rational]) -> Result<QuotientProfile> {
    for w in grid.windows(2) {
        if w[0] <= w[1] {
            return Err(Error::SpecValidation(
                "radius grid must be strictly decreasing".into(),
            ));
        }
    }
    if grid.iter().any(|r| !r.is_positive()) {
        return Err(Error::SpecValidation("radius grid must be positive".into()));
    }
    Ok(QuotientProfile {
        x: x.clone(),
        rows: grid
            .iter()
            .map(|r| QuotientRow { r: r.clone(), sup_quotient: sup_quotient(f, x, r) })
            .collect(),
    })
}

/// The default dyadic radius grid 2^-1, ..., 2^-l.
pub fn default_grid(l: u32) -> Vec<Rational> {
    (1..=l as i64).map(|m| Rational::pow2(-m)).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceEntry {
    /// 1-based step number.
    pub p: usize,
    /// The selected stage index.
    pub j: usize,
    /// Distance from x to that stage's future closure.
    pub r: Rational,
    /// Increment of the selected-part sum over (x-r, x+r).
    pub osc: Rational,
    /// osc <= 2r, exactly.
    pub bound_ok: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessTrace {
    pub x: Rational,
    /// Largest stage whose enlarged support contains x (0 when none).
    pub last_support_index: usize,
    /// The same computed through future closures; must agree.
    pub last_closure_index: usize,
    pub indices_agree: bool,
    /// Stages past the support horizon whose exclusion set misses x.
    pub selected: Vec<usize>,
    pub entries: Vec<TraceEntry>,
    /// Oscillation of the excluded-part sum stays below r at every grid
    /// radius.
    pub excluded_part_ok: bool,
    /// 2 + 1 + slope_cap * last_support_index.
    pub combined_bound: Rational,
    /// Grid lip-estimate of the full sum at x.
    pub combined_estimate: Rational,
    pub combined_ok: bool,
}

/// Run the radius recursion at a point off the target set: repeatedly pick
/// the first selected stage whose future closure meets the current ball,
/// then shrink the ball to the distance of that closure. Every visited
/// ball certifies an exact oscillation bound for the selected-part sum.
pub fn witness_radii(report: &BuildReport, x: &Rational) -> Result<WitnessTrace> {
    let stages = report.stages;
    // Points in a deepest-level set are indistinguishable from target
    // points at this depth.
    let deepest = report
        .scheme
        .level_of
        .iter()
        .take(stages)
        .max()
        .copied()
        .unwrap_or(0);
    for k in 0..stages {
        if report.scheme.level_of[k] == deepest && report.scheme.sets[k].contains(x) {
            return Err(Error::SuspectedTargetPoint(x.clone()));
        }
    }

    let last_support_index = (1..=stages)
        .rev()
        .find(|&k| report.h_bundles[k - 1].h.contains(x))
        .unwrap_or(0);
    let last_closure_index = (1..=stages)
        .rev()
        .find(|&k| report.family.future_h[k - 1].contains(x))
        .unwrap_or(0);
    let indices_agree = last_support_index == last_closure_index;
    let l = last_support_index;

    let selected: Vec<usize> = ((l + 1)..=stages)
        .filter(|&j| !report.family.past_e[j - 1].contains(x))
        .collect();
    let selected_fns: Vec<PLFunction> = selected
        .iter()
        .map(|&j| report.g_bundles[j - 1].g.clone())
        .collect();
    let selected_sum = PLFunction::sum(&selected_fns);

    let mut entries = Vec::new();
    let mut radius = Rational::one();
    let mut last_j = 0usize;
    loop {
        let next = selected.iter().copied().find(|&j| {
            j > last_j
                && report.family.future_h[j - 1]
                    .distance(x)
                    .map(|d| d < radius)
                    .unwrap_or(false)
        });
        let Some(j) = next else { break };
        let r = report.family.future_h[j - 1]
            .distance(x)
            .expect("closure met the ball, so it is nonempty");
        debug_assert!(r.is_positive(), "selected stages avoid x");
        debug_assert!(r < radius);
        let osc = selected_sum.eval(&(x + &r)) - selected_sum.eval(&(x - &r));
        let bound_ok = osc <= Rational::int(2) * r.clone();
        entries.push(TraceEntry { p: entries.len() + 1, j, r: r.clone(), osc, bound_ok });
        radius = r;
        last_j = j;
    }

    // Excluded part: stages past l whose exclusion set contains x. Any
    // interval around x meets their exclusion set, so their oscillation
    // over (x-r, x+r) is below 2^-j * 2r; summed, below r.
    let excluded_fns: Vec<PLFunction> = ((l + 1)..=stages)
        .filter(|j| !selected.contains(j))
        .map(|j| report.g_bundles[j - 1].g.clone())
        .collect();
    let excluded_sum = PLFunction::sum(&excluded_fns);
    let mut excluded_part_ok = true;
    let grid: Vec<Rational> = if entries.is_empty() {
        default_grid(report.config.resolution_l)
    } else {
        entries.iter().map(|e| e.r.clone()).collect()
    };
    for r in &grid {
        let osc = excluded_sum.eval(&(x + r)) - excluded_sum.eval(&(x - r));
        if osc > *r {
            excluded_part_ok = false;
        }
    }

    let combined_bound =
        Rational::int(3) + &report.config.slope_cap * &Rational::int(l as i64);
    let profile = lip_profile(&report.g_sum, x, &grid)?;
    let combined_estimate = profile.lip_estimate().unwrap_or_else(Rational::zero);
    let combined_ok = combined_estimate <= combined_bound;

    Ok(WitnessTrace {
        x: x.clone(),
        last_support_index,
        last_closure_index,
        indices_agree,
        selected,
        entries,
        excluded_part_ok,
        combined_bound,
        combined_estimate,
        combined_ok,
    })
}

/// Stage mass inside (lo, hi], from provenance alone: full lengths of the
/// stage components contained in the interval plus the covered indicator
/// measure. This undercounts partially contained components, so it is a
/// sound lower bound for the increment of the stage function.
pub fn provenance_mass(b: &GBundle, lo: &Rational, hi: &Rational) -> Rational {
    let mut mass = Rational::zero();
    for j in &b.j_list {
        if &j.span.lo >= lo && &j.span.hi <= hi {
            mass += &j.span.length();
        }
    }
    for part in b.indicator.components() {
        let a = part.lo.clone().max(lo.clone());
        let b_ = part.hi.clone().min(hi.clone());
        if a < b_ {
            mass += &(&b_ - &a);
        }
    }
    mass
}

pub fn profiles_csv(profiles: &[QuotientProfile]) -> String {
    let mut s = String::from("x,r,sup_quotient\n");
    for p in profiles {
        for row in &p.rows {
            s.push_str(&format!("{},{},{}\n", p.x, row.r, row.sup_quotient));
        }
    }
    s
}

pub fn traces_csv(traces: &[WitnessTrace]) -> String {
    let mut s = String::from("x,p,j_p,r_p,osc,bound_ok\n");
    for t in traces {
        for e in &t.entries {
            s.push_str(&format!("{},{},{},{},{},{}\n", t.x, e.p, e.j, e.r, e.osc, e.bound_ok));
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{build_sum, BuildConfig};
    use crate::rational::rat;
    use crate::specs;

    #[test]
    fn sup_quotient_basics() {
        let identity = PLFunction::from_breakpoints(
            vec![rat(-10, 1), rat(10, 1)],
            vec![rat(-10, 1), rat(10, 1)],
        )
        .unwrap();
        assert_eq!(sup_quotient(&identity, &rat(1, 3), &rat(1, 5)), Rational::one());
        let constant = PLFunction::constant(rat(7, 2));
        assert_eq!(sup_quotient(&constant, &rat(0, 1), &rat(1, 2)), Rational::zero());
    }

    #[test]
    fn sup_quotient_localized_ramp() {
        // Slope 4 on a piece of length 1/12 inside (x, x+r), flat elsewhere:
        // quotient (4/12)/(1/4) = 4/3.
        let piece = crate::interval::Interval::closed(rat(1, 12), rat(2, 12)).unwrap();
        let f = PLFunction::from_density(&[(piece, Rational::int(4))]).unwrap();
        assert_eq!(sup_quotient(&f, &rat(0, 1), &rat(1, 4)), rat(4, 3));
    }

    #[test]
    fn sup_quotient_matches_sampled_oracle() {
        // Endpoint formula vs brute-force over interior sample points.
        let f = PLFunction::from_breakpoints(
            vec![rat(0, 1), rat(1, 4), rat(1, 2), rat(3, 4), rat(1, 1)],
            vec![rat(0, 1), rat(1, 8), rat(1, 8), rat(1, 2), rat(5, 8)],
        )
        .unwrap();
        let x = rat(3, 8);
        let r = rat(5, 16);
        let fast = sup_quotient(&f, &x, &r);
        let fx = f.eval(&x);
        let mut best = Rational::zero();
        let samples = 1000i64;
        for i in 0..=samples {
            let y = &x - &r + Rational::new(2 * i, samples) * r.clone();
            let q = (f.eval(&y) - fx.clone()).abs() / r.clone();
            if q > best {
                best = q;
            }
        }
        assert!(best <= fast);
        // The endpoint formula is attained: y = x + r or x - r is sampled.
        assert_eq!(best, fast);
    }

    #[test]
    fn lip_profile_of_staircase_at_ternary_radii() {
        // The depth-8 middle-thirds staircase rises 2^-8 over each of the
        // 2^8 kept intervals of length 3^-8; at x = 0 the quotient over
        // radius 3^-m is exactly (3/2)^m.
        let depth = 8u32;
        let slope = Rational::new(3i64.pow(depth), 2i64.pow(depth));
        let segments: Vec<(crate::interval::Interval, Rational)> =
            crate::specs::cantor_approximation(depth)
                .components()
                .iter()
                .map(|p| (p.clone(), slope.clone()))
                .collect();
        let staircase = PLFunction::from_density(&segments).unwrap();
        assert_eq!(staircase.total_variation(), Rational::one());
        let grid: Vec<Rational> =
            (1..=6i64).map(|m| Rational::new(1, 3i64.pow(m as u32))).collect();
        let profile = lip_profile(&staircase, &Rational::zero(), &grid).unwrap();
        for (m, row) in profile.rows.iter().enumerate() {
            let expected = Rational::new(3i64.pow(m as u32 + 1), 2i64.pow(m as u32 + 1));
            assert_eq!(row.sup_quotient, expected);
        }
        // r = 1/3 specifically: the rise is 1/2, so the quotient is 3/2.
        assert_eq!(profile.rows[0].sup_quotient, rat(3, 2));
    }

    #[test]
    fn lip_profile_linear() {
        let f = PLFunction::from_breakpoints(
            vec![rat(-10, 1), rat(10, 1)],
            vec![rat(-30, 1), rat(30, 1)],
        )
        .unwrap();
        let grid = default_grid(6);
        let p = lip_profile(&f, &rat(0, 1), &grid).unwrap();
        for row in &p.rows {
            assert_eq!(row.sup_quotient, Rational::int(3));
        }
        assert_eq!(p.lip_estimate().unwrap(), Rational::int(3));
        assert_eq!(p.big_lip_estimate().unwrap(), Rational::int(3));
    }

    #[test]
    fn witness_radii_off_target() {
        let spec = specs::point_spec(8);
        let cfg = BuildConfig::new(6, 12, 5).unwrap();
        let report = build_sum(&spec, &cfg).unwrap();
        let trace = witness_radii(&report, &rat(1, 3)).unwrap();
        assert!(trace.indices_agree);
        for e in &trace.entries {
            assert!(e.bound_ok, "oscillation bound failed at step {}", e.p);
        }
        for w in trace.entries.windows(2) {
            assert!(w[0].j < w[1].j);
            assert!(w[0].r > w[1].r);
        }
        assert!(trace.excluded_part_ok);
        assert!(trace.combined_ok);
    }

    #[test]
    fn witness_radii_rejects_target_points() {
        let spec = specs::point_spec(8);
        let cfg = BuildConfig::new(6, 12, 5).unwrap();
        let report = build_sum(&spec, &cfg).unwrap();
        assert!(matches!(
            witness_radii(&report, &Rational::zero()),
            Err(Error::SuspectedTargetPoint(_))
        ));
    }

    #[test]
    fn witness_radii_far_point_is_quiet() {
        let spec = specs::point_spec(8);
        let cfg = BuildConfig::new(4, 10, 5).unwrap();
        let report = build_sum(&spec, &cfg).unwrap();
        // Far beyond the first neighborhood: the sum is locally constant.
        let trace = witness_radii(&report, &rat(9, 10)).unwrap();
        assert_eq!(trace.last_support_index, 0);
        let profile = lip_profile(&report.g_sum, &rat(9, 10), &default_grid(8)).unwrap();
        assert_eq!(profile.lip_estimate().unwrap(), Rational::zero());
        let _ = trace;
    }
}
