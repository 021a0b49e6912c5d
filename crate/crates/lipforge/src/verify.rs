//! Verification suites over a build artifact: every invariant the pipeline
//! promises is re-checked exactly, from the flattened scheme's tree
//! property through the per-stage density properties to the off-target
//! witness traces. Randomized corpora are derived from a fixed seed, so a
//! suite run is reproducible.

use crate::analysis::{lip_profile, sup_quotient, witness_radii};
use crate::assembly::{sum_ac_check, witness_exclusion_checks, BuildReport};
use crate::epm::EpmRegistry;
use crate::error::{Error, Result};
use crate::gfun::{
    anchored_density_ok, increment_identity_check, oscillation_checks, piece_for,
    quotient_bound_check, stage_checks, Check,
};
use crate::interval::Interval;
use crate::rational::Rational;
use crate::scheme::SchemeSpec;
use crate::set::IntervalSet;
use serde::{Deserialize, Serialize};
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Scheme,
    LemmaH,
    LemmaG,
    Assembly,
    Analysis,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scheme" => Ok(Suite::Scheme),
            "lemma-h" => Ok(Suite::LemmaH),
            "lemma-g" => Ok(Suite::LemmaG),
            "assembly" => Ok(Suite::Assembly),
            "analysis" => Ok(Suite::Analysis),
            "all" => Ok(Suite::All),
            other => Err(Error::Parse {
                what: "suite name",
                detail: format!("{other:?} (expected scheme|lemma-h|lemma-g|assembly|analysis|all)"),
            }),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn summary(&self) -> String {
        let passed = self.checks.iter().filter(|c| c.pass).count();
        format!("{}: {}/{} checks passed", self.suite, passed, self.checks.len())
    }
}

/// Tiny deterministic generator for verification corpora.
pub struct Mix(u64);

impl Mix {
    pub fn new(seed: u64) -> Self {
        Mix(seed.wrapping_add(0x9e3779b97f4a7c15))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// A rational in [lo, hi] with denominator up to 2^10.
    pub fn rational_in(&mut self, lo: &Rational, hi: &Rational) -> Rational {
        let den = 1 + (self.next_u64() % 1024) as i64;
        let num = (self.next_u64() % (den as u64 + 1)) as i64;
        lo + &(&Rational::new(num, den) * &(hi - lo))
    }
}

pub fn run_suite(
    spec: &SchemeSpec,
    report: &BuildReport,
    suite: Suite,
    seed: u64,
) -> SuiteReport {
    let checks = match suite {
        Suite::Scheme => scheme_checks(spec, report),
        Suite::LemmaH => lemma_h_checks(report),
        Suite::LemmaG => lemma_g_checks(report, seed),
        Suite::Assembly => assembly_checks(report, seed),
        Suite::Analysis => analysis_checks(report, seed),
        Suite::All => {
            let mut all = scheme_checks(spec, report);
            all.extend(lemma_h_checks(report));
            all.extend(lemma_g_checks(report, seed));
            all.extend(assembly_checks(report, seed));
            all.extend(analysis_checks(report, seed));
            all
        }
    };
    let name = match suite {
        Suite::Scheme => "scheme",
        Suite::LemmaH => "lemma-h",
        Suite::LemmaG => "lemma-g",
        Suite::Assembly => "assembly",
        Suite::Analysis => "analysis",
        Suite::All => "all",
    };
    SuiteReport { suite: name.to_owned(), checks }
}

fn scheme_checks(spec: &SchemeSpec, report: &BuildReport) -> Vec<Check> {
    let mut out = Vec::new();
    let scheme = &report.scheme;

    let violation = scheme.tree_property_violation(scheme.len());
    out.push(Check::new(
        "tree property: later intersecting sets are contained",
        violation.is_none(),
        match violation {
            Some((k, l)) => format!("violated at pair ({}, {})", k, l),
            None => format!("{} sets, exhaustive pairwise", scheme.len()),
        },
    ));

    let mut parents_ok = true;
    let mut detail = String::new();
    for (i, parent) in scheme.parent.iter().enumerate() {
        if let Some(p) = parent {
            if !scheme.sets[i].subset_of(&scheme.sets[*p]) {
                parents_ok = false;
                detail = format!("set {} not inside its parent {}", i + 1, p + 1);
                break;
            }
        }
    }
    out.push(Check::new("parent links are inclusions", parents_ok, detail));

    // Refinement preserves level unions: the union of the flattened sets of
    // each level equals the spec level union intersected with the previous.
    let mut union_ok = true;
    let mut union_detail = String::new();
    let mut prev_union: Option<IntervalSet> = None;
    for n in 1..=spec.levels.len() {
        let spec_union = spec.levels[n - 1]
            .iter()
            .fold(IntervalSet::empty(), |a, s| a.union(s));
        let flat_union = scheme
            .sets
            .iter()
            .zip(&scheme.level_of)
            .filter(|(_, lvl)| **lvl == n)
            .fold(IntervalSet::empty(), |a, (s, _)| a.union(s));
        let expected = match &prev_union {
            Some(prev) => spec_union.intersection(prev),
            None => spec_union.clone(),
        };
        if flat_union != expected {
            union_ok = false;
            union_detail = format!("level {} union differs after refinement", n);
            break;
        }
        prev_union = Some(flat_union);
    }
    out.push(Check::new("refinement preserves level unions", union_ok, union_detail));

    // Membership counts are monotone in the truncation depth.
    let mut monotone_ok = true;
    for x in &report.witnesses {
        let mut last = 0;
        for frac in [3usize, 2, 1] {
            let k_max = (scheme.len() / frac).max(1);
            let count = scheme.membership_levels(x, k_max).len();
            if count < last {
                monotone_ok = false;
            }
            last = count;
        }
    }
    out.push(Check::new(
        "membership count monotone in truncation",
        monotone_ok,
        format!("{} witnesses sampled", report.witnesses.len()),
    ));

    out
}

fn lemma_h_checks(report: &BuildReport) -> Vec<Check> {
    let mut out = Vec::new();

    let allocations = match EpmRegistry::parse_dump(&report.registry_dump) {
        Ok(a) => a,
        Err(e) => {
            out.push(Check::new("registry dump replays", false, e.to_string()));
            return out;
        }
    };
    out.push(Check::new(
        "registry dump replays",
        true,
        format!("{} allocations", allocations.len()),
    ));

    let mut disjoint_ok = true;
    let mut detail = String::new();
    let mut running = IntervalSet::empty();
    for a in &allocations {
        if !a.piece.kept.disjoint_with(&running) {
            disjoint_ok = false;
            detail = format!("piece of owner {} overlaps earlier pieces", a.owner);
            break;
        }
        running = running.union(&a.piece.kept);
    }
    out.push(Check::new("all pieces pairwise disjoint", disjoint_ok, detail));

    for b in &report.h_bundles {
        let f_in_h = b.f.subset_of(&b.h);
        let neighborhood = b
            .f
            .eps_neighborhood(&b.eps)
            .expect("stage sets are closed and eps positive");
        let own: IntervalSet = allocations
            .iter()
            .filter(|a| a.owner == b.k)
            .fold(IntervalSet::empty(), |acc, a| acc.union(&a.piece.kept));
        let h_in_allowed = b.h.subset_of(&b.f.union(&own.intersection(&neighborhood)));
        out.push(Check::new(
            format!("stage {:02} support sandwich", b.k),
            f_in_h && h_in_allowed,
            String::new(),
        ));

        let mut third_ok = true;
        let mut third_detail = format!("{} components", b.pieces.len());
        for (j, piece) in &b.pieces {
            let mt = j.middle_third().expect("components are nondegenerate");
            let inside = piece.kept.subset_of(&IntervalSet::from_interval(mt));
            let want = &j.length() / &report.config.slope_cap;
            if !inside || piece.measure < want {
                third_ok = false;
                third_detail = format!("component {} has a thin or stray piece", j);
                break;
            }
        }
        out.push(Check::new(
            format!("stage {:02} middle-third measure", b.k),
            third_ok,
            third_detail,
        ));
    }

    // Future closures are monotone along descendants.
    let mut mono_ok = true;
    let mut mono_detail = String::new();
    'outer: for k in 0..report.stages {
        for l in 0..=k {
            if report.scheme.sets[k].subset_of(&report.scheme.sets[l])
                && !report.family.future_h[k].subset_of(&report.family.future_h[l])
            {
                mono_ok = false;
                mono_detail = format!("closure of {} escapes closure of {}", k + 1, l + 1);
                break 'outer;
            }
        }
    }
    out.push(Check::new("future closures monotone", mono_ok, mono_detail));

    // Closure material beyond the compacts comes from pieces, which avoid
    // their levels; so the closures minus every member compact miss the
    // deepest level union (the finite certificate that they miss the
    // target).
    let mut avoid_ok = true;
    let mut avoid_detail = String::new();
    let deepest_union = report
        .scheme
        .sets
        .iter()
        .zip(&report.scheme.level_of)
        .filter(|(_, lvl)| **lvl == report.scheme.level_of.iter().max().copied().unwrap_or(1))
        .fold(IntervalSet::empty(), |a, (s, _)| a.union(s));
    for k in 0..report.stages {
        let mut cores = IntervalSet::empty();
        for j in k..report.stages {
            if report.scheme.sets[j].subset_of(&report.scheme.sets[k]) {
                cores = cores.union(&report.scheme.sets[j]);
            }
        }
        let grown = report.family.future_h[k].difference(&cores);
        if !grown.disjoint_with(&deepest_union) {
            avoid_ok = false;
            avoid_detail = format!("closure {} grows onto the deepest level", k + 1);
            break;
        }
    }
    out.push(Check::new(
        "closures beyond their cores avoid the deepest level",
        avoid_ok,
        avoid_detail,
    ));

    // The exclusion sets match their defining unions.
    let mut e_ok = true;
    let mut e_detail = String::new();
    for k in 0..report.stages {
        let mut expected = IntervalSet::empty();
        for j in 0..k {
            if report.scheme.sets[j].disjoint_with(&report.scheme.sets[k]) {
                expected = expected.union(&report.family.future_h[j]);
            }
        }
        if expected != report.family.past_e[k] {
            e_ok = false;
            e_detail = format!("stage {} exclusion set differs", k + 1);
            break;
        }
    }
    out.push(Check::new("exclusion sets match their definition", e_ok, e_detail));

    out
}

fn lemma_g_checks(report: &BuildReport, seed: u64) -> Vec<Check> {
    let mut out = Vec::new();
    let mut mix = Mix::new(seed);
    for b in &report.g_bundles {
        out.extend(stage_checks(b, &report.config.slope_cap));
        out.push(Check::new(
            format!("stage {:02} anchored density bound", b.k),
            anchored_density_ok(&b.g_set, &b.e, &b.eps, &report.window),
            String::new(),
        ));
        if !b.e.is_empty() {
            let corpus = e_meeting_corpus(&b.e, &report.window, &mut mix, 200);
            out.push(oscillation_checks(b, &corpus));
        }
        out.push(increment_identity_check(b));
        out.push(quotient_bound_check(b, 16));
    }
    out
}

/// Random intervals meeting the given set, inside the window.
pub fn e_meeting_corpus(
    e: &IntervalSet,
    window: &crate::interval::Window,
    mix: &mut Mix,
    count: usize,
) -> Vec<Interval> {
    let mut out = Vec::new();
    let parts = e.components();
    if parts.is_empty() {
        return out;
    }
    for _ in 0..count {
        let part = &parts[(mix.next_u64() as usize) % parts.len()];
        let anchor = mix.rational_in(&part.lo, &part.hi);
        let left = mix.rational_in(&Rational::zero(), &Rational::new(1, 4));
        let right = mix.rational_in(&Rational::zero(), &Rational::new(1, 4));
        let lo = (&anchor - &left).max(window.lo.clone());
        let hi = (&anchor + &right).min(window.hi.clone());
        if lo < hi {
            out.push(Interval::closed(lo, hi).expect("lo < hi"));
        }
    }
    out
}

fn assembly_checks(report: &BuildReport, seed: u64) -> Vec<Check> {
    let mut out = Vec::new();
    let mut mix = Mix::new(seed ^ 0xa5a5_5a5a);

    // The merged function equals the pointwise stage sum.
    let mut sum_ok = true;
    let mut sum_detail = String::new();
    for _ in 0..1000 {
        let x = mix.rational_in(&report.window.lo, &report.window.hi);
        let direct = report
            .g_bundles
            .iter()
            .fold(Rational::zero(), |acc, b| acc + b.g.eval(&x));
        if report.g_sum.eval(&x) != direct {
            sum_ok = false;
            sum_detail = format!("pointwise mismatch at {}", x);
            break;
        }
    }
    out.push(Check::new("merged function equals stage sum", sum_ok, sum_detail));

    let stage_fns: Vec<crate::pl::PLFunction> =
        report.g_bundles.iter().map(|b| b.g.clone()).collect();
    out.push(sum_ac_check(&stage_fns, &report.g_sum, "stage sum"));
    if let (Some(r), Some(h)) = (&report.ramp, &report.combined) {
        out.push(sum_ac_check(&[r.f.clone(), report.g_sum.clone()], h, "combined sum"));
        let mut ramp_ok = true;
        let mut detail = String::new();
        for (k, u) in r.u_sets.iter().enumerate() {
            if u.measure() >= Rational::pow2(-(k as i64 + 1)) {
                ramp_ok = false;
                detail = format!("ramp level {} too fat", k + 1);
                break;
            }
        }
        out.push(Check::new("ramp levels under budget", ramp_ok, detail));
    }
    out.extend(witness_exclusion_checks(
        &report.scheme,
        &report.family,
        &report.witnesses,
        report.stages,
    ));

    let tv = report.g_sum.total_variation();
    out.push(Check::new(
        "stage sum total variation below 1",
        tv < Rational::one(),
        format!("tv {}", tv),
    ));

    out
}

fn analysis_checks(report: &BuildReport, seed: u64) -> Vec<Check> {
    let mut out = Vec::new();
    let mut mix = Mix::new(seed ^ 0x0ff5_e77e);

    // Endpoint quotient formula against a sampled oracle at random points.
    let mut formula_ok = true;
    let mut formula_detail = String::new();
    for _ in 0..50 {
        let x = mix.rational_in(&report.window.lo, &report.window.hi);
        let r = Rational::pow2(-((mix.next_u64() % 8) as i64 + 1));
        let fast = sup_quotient(&report.g_sum, &x, &r);
        let fx = report.g_sum.eval(&x);
        let mut best = Rational::zero();
        for i in 0..=64i64 {
            let y = &x - &r + Rational::new(2 * i, 64) * r.clone();
            let q = (report.g_sum.eval(&y) - fx.clone()).abs() / r.clone();
            if q > best {
                best = q;
            }
        }
        if best > fast {
            formula_ok = false;
            formula_detail = format!("sampled {} exceeds endpoint {}", best, fast);
            break;
        }
    }
    out.push(Check::new(
        "endpoint quotient formula dominates samples",
        formula_ok,
        formula_detail,
    ));

    // Witness traces at off-target points.
    let mut traces_ok = true;
    let mut trace_detail = String::new();
    let mut tested = 0usize;
    let mut attempts = 0usize;
    while tested < 40 && attempts < 400 {
        attempts += 1;
        let x = mix.rational_in(&report.window.lo, &report.window.hi);
        match witness_radii(report, &x) {
            Ok(trace) => {
                tested += 1;
                let entries_ok = trace.entries.iter().all(|e| e.bound_ok);
                if !(entries_ok && trace.excluded_part_ok && trace.combined_ok
                    && trace.indices_agree)
                {
                    traces_ok = false;
                    trace_detail = format!("trace at {} failed", x);
                    break;
                }
            }
            Err(Error::SuspectedTargetPoint(_)) => continue,
            Err(e) => {
                traces_ok = false;
                trace_detail = e.to_string();
                break;
            }
        }
    }
    out.push(Check::new(
        "off-target witness traces",
        traces_ok,
        if traces_ok {
            format!("{} points traced", tested)
        } else {
            trace_detail
        },
    ));

    // Profiles on witnesses are well-formed (decreasing grid, exact rows).
    let mut profile_ok = true;
    for x in report.witnesses.iter().take(4) {
        let grid = crate::analysis::default_grid(report.config.resolution_l.min(12));
        if lip_profile(&report.g_sum, x, &grid).is_err() {
            profile_ok = false;
        }
    }
    out.push(Check::new("witness profiles evaluate", profile_ok, String::new()));

    out
}

/// Convenience used by tests and the command line: piece lookup sanity for
/// a whole report.
pub fn stage_pieces_consistent(report: &BuildReport) -> bool {
    report.g_bundles.iter().all(|gb| {
        gb.j_list
            .iter()
            .all(|j| piece_for(&report.h_bundles[gb.k - 1], &j.span).is_some())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{build_sum, BuildConfig};
    use crate::specs;

    #[test]
    fn all_suites_pass_on_two_point_build() {
        let spec = specs::two_point_spec(8);
        let cfg = BuildConfig::new(8, 12, 21).unwrap();
        let report = build_sum(&spec, &cfg).unwrap();
        for suite in [Suite::Scheme, Suite::LemmaH, Suite::LemmaG, Suite::Assembly, Suite::Analysis]
        {
            let sr = run_suite(&spec, &report, suite, 77);
            for c in &sr.checks {
                assert!(c.pass, "{} / {}: {}", sr.suite, c.name, c.detail);
            }
        }
        assert!(stage_pieces_consistent(&report));
    }

    #[test]
    fn suite_parse() {
        assert_eq!("lemma-g".parse::<Suite>().unwrap(), Suite::LemmaG);
        assert!("bogus".parse::<Suite>().is_err());
    }
}
