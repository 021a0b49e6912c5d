//! The full pipeline: flatten the scheme, enlarge supports, form family
//! closures, build every stage density, and sum the stages exactly. When
//! the spec carries open G-delta levels, the classical ramp sum is built
//! alongside and the two parts are combined.
//!
//! A build is a pure function of (spec, depth, resolution, seed):
//! artifacts are byte-identical across reruns.

use crate::epm::EpmRegistry;
use crate::error::{Error, Result};
use crate::gfun::{build_g_bundle, Check, GBundle};
use crate::hset::{build_family_sets, build_h, FamilySets, HBundle};
use crate::interval::Window;
use crate::pl::PLFunction;
use crate::rational::Rational;
use crate::scheme::{flatten_scheme, SchemeSpec, SuslinScheme};
use crate::set::IntervalSet;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BuildConfig {
    pub depth_k: usize,
    pub resolution_l: u32,
    pub seed: u64,
    /// Uniform bound on the stage densities; pieces are requested with
    /// measure |J|/slope_cap so each scaled indicator has this height.
    pub slope_cap: Rational,
    /// Cap on the number of sampled target witnesses.
    pub witness_cap: usize,
}

impl BuildConfig {
    pub fn new(depth_k: usize, resolution_l: u32, seed: u64) -> Result<Self> {
        if depth_k < 1 {
            return Err(Error::SpecValidation("depth must be at least 1".into()));
        }
        if (resolution_l as usize) < depth_k {
            return Err(Error::SpecValidation(format!(
                "resolution {} is below depth {}",
                resolution_l, depth_k
            )));
        }
        Ok(BuildConfig {
            depth_k,
            resolution_l,
            seed,
            slope_cap: Rational::int(12),
            witness_cap: 12,
        })
    }
}

/// Everything a build produces, sufficient to rerun every verification.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BuildReport {
    pub config: BuildConfig,
    pub window: Window,
    pub scheme: SuslinScheme,
    /// Number of stages actually built (the flattening may be shorter than
    /// the requested depth).
    pub stages: usize,
    pub witnesses: Vec<Rational>,
    pub h_bundles: Vec<HBundle>,
    pub family: FamilySets,
    pub g_bundles: Vec<GBundle>,
    pub g_sum: PLFunction,
    /// Sup-norm bound on the tail cut off by the truncation.
    pub tail_bound: Rational,
    pub registry_dump: String,
    /// The ramp-sum part for the open levels, when present.
    pub ramp: Option<RampPart>,
    /// The combined function when both parts exist (ramp + g_sum).
    pub combined: Option<PLFunction>,
    pub checks: Vec<Check>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RampPart {
    pub f: PLFunction,
    pub u_sets: Vec<IntervalSet>,
}

/// Run the staged pipeline over a validated spec.
pub fn build_sum(spec: &SchemeSpec, cfg: &BuildConfig) -> Result<BuildReport> {
    spec.validate()?;
    let scheme = flatten_scheme(spec)?;
    let stages = cfg.depth_k.min(scheme.len());
    let witnesses = scheme.derive_witnesses(cfg.witness_cap);
    let level_unions: Vec<IntervalSet> = spec
        .levels
        .iter()
        .map(|lvl| lvl.iter().fold(IntervalSet::empty(), |a, s| a.union(s)))
        .collect();
    let mut registry = EpmRegistry::new(spec.window.clone(), cfg.seed, level_unions);

    let mut h_bundles = Vec::with_capacity(stages);
    for k in 1..=stages {
        let hb = build_h(
            k,
            &scheme.sets[k - 1],
            &spec.window,
            cfg.resolution_l,
            &cfg.slope_cap,
            &mut registry,
        )
        .map_err(|e| stage_error("support-enlargement", k, e))?;
        h_bundles.push(hb);
    }
    let family = build_family_sets(&scheme, &h_bundles)?;

    let mut g_bundles = Vec::with_capacity(stages);
    for k in 1..=stages {
        let gb = build_g_bundle(
            k,
            &scheme.sets[k - 1],
            &h_bundles[k - 1],
            &family.past_e[k - 1],
            &spec.window,
            cfg.resolution_l,
            &witnesses,
        )
        .map_err(|e| stage_error("density", k, e))?;
        g_bundles.push(gb);
    }
    let stage_fns: Vec<PLFunction> = g_bundles.iter().map(|b| b.g.clone()).collect();
    let g_sum = PLFunction::sum(&stage_fns);

    let ramp = if spec.gdelta_levels.is_empty() {
        None
    } else {
        let (f, u_sets) = ramp_sum(&spec.gdelta_levels, cfg.depth_k, &spec.window)?;
        Some(RampPart { f, u_sets })
    };
    let combined = ramp.as_ref().map(|r| combine_parts(&r.f, &g_sum));

    let mut checks = Vec::new();
    checks.extend(witness_exclusion_checks(&scheme, &family, &witnesses, stages));
    checks.push(sum_ac_check(&stage_fns, &g_sum, "stage sum"));
    if let (Some(r), Some(h)) = (&ramp, &combined) {
        let ramp_fns: Vec<PLFunction> = vec![r.f.clone(), g_sum.clone()];
        checks.push(sum_ac_check(&ramp_fns, h, "combined sum"));
    }

    Ok(BuildReport {
        config: cfg.clone(),
        window: spec.window.clone(),
        scheme,
        stages,
        witnesses,
        h_bundles,
        family,
        g_bundles,
        g_sum,
        tail_bound: Rational::pow2(-(stages as i64)),
        registry_dump: registry.dump(),
        ramp,
        combined,
        checks,
    })
}

fn stage_error(stage: &'static str, index: usize, e: Error) -> Error {
    match e {
        e @ Error::AllocationFailure(_) => e,
        Error::Construction { stage, index, detail } => {
            Error::Construction { stage, index, detail }
        }
        other => Error::Construction { stage, index, detail: other.to_string() },
    }
}

/// The ramp sum for nested open levels: U_k is the k-th level intersected
/// with an open cover of the deepest level of measure below 2^-k, and
/// f_k(x) is the measure of (-infinity, x) ∩ U_k. Returns the exact sum
/// and the U_k actually used.
pub fn ramp_sum(
    levels: &[IntervalSet],
    depth_k: usize,
    window: &Window,
) -> Result<(PLFunction, Vec<IntervalSet>)> {
    if levels.is_empty() {
        return Ok((PLFunction::zero(), Vec::new()));
    }
    for (n, open) in levels.iter().enumerate() {
        if open.components().iter().any(|p| p.lo_closed || p.hi_closed) {
            return Err(Error::SpecValidation(format!("level {} is not open", n + 1)));
        }
        if n > 0 && !open.subset_of(&levels[n - 1]) {
            return Err(Error::SpecValidation(format!(
                "open level {} is not nested in level {}",
                n + 1,
                n
            )));
        }
    }
    let core = levels.last().expect("nonempty");
    let interior = IntervalSet::from_interval(window.interior());
    let mut fns = Vec::with_capacity(depth_k);
    let mut u_sets = Vec::with_capacity(depth_k);
    for k in 1..=depth_k {
        let budget = Rational::pow2(-(k as i64));
        let base = core.measure();
        if base >= budget {
            return Err(Error::Construction {
                stage: "ramp",
                index: k,
                detail: format!(
                    "deepest open level has measure {} >= budget {}; supply deeper levels",
                    base, budget
                ),
            });
        }
        // Dilate the core to an open cover of measure strictly below the
        // budget: spread half the slack over the part endpoints.
        let parts = core.num_parts().max(1) as i64;
        let delta = &(&budget - &base) / &Rational::int(4 * parts);
        let cover = core.eps_neighborhood(&delta).unwrap_or_else(|_| {
            // The core may be open; dilate parts directly.
            IntervalSet::canonicalize(
                core.components()
                    .iter()
                    .map(|p| {
                        crate::interval::Interval::open(&p.lo - &delta, &p.hi + &delta)
                            .expect("delta > 0")
                    })
                    .collect(),
            )
            .expect("dilation is well-formed")
        });
        let tk = &levels[(k - 1).min(levels.len() - 1)];
        let u = tk.intersection(&cover).intersection(&interior);
        debug_assert!(u.measure() < budget);
        let segments: Vec<(crate::interval::Interval, Rational)> = u
            .components()
            .iter()
            .map(|p| (p.clone(), Rational::one()))
            .collect();
        fns.push(PLFunction::from_density(&segments)?);
        u_sets.push(u);
    }
    Ok((PLFunction::sum(&fns), u_sets))
}

/// Exact pointwise sum of the two monotone parts.
pub fn combine_parts(f: &PLFunction, g: &PLFunction) -> PLFunction {
    f.add(g)
}

/// The summable-variation certificate: the total variation of the sum
/// equals the sum of the stage variations, and the total stays below 1
/// per part family (2 for a combined function).
pub fn sum_ac_check(parts: &[PLFunction], sum: &PLFunction, label: &str) -> Check {
    let mut total = Rational::zero();
    for p in parts {
        total += &p.total_variation();
    }
    let additive = sum.total_variation() == total;
    let bound = Rational::int(2);
    let bounded = total < bound;
    Check::new(
        format!("{} is absolutely continuous by summable variation", label),
        additive && bounded,
        format!("sum of variations {}, additive: {}", total, additive),
    )
}

/// The mechanism that keeps witnesses outside every exclusion set: for a
/// witness x and every stage k with x in F_k, x must avoid past_e[k-1].
pub fn witness_exclusion_checks(
    scheme: &SuslinScheme,
    family: &FamilySets,
    witnesses: &[Rational],
    stages: usize,
) -> Vec<Check> {
    let mut pass = true;
    let mut detail = String::new();
    let mut tested = 0usize;
    'outer: for x in witnesses {
        for k in 1..=stages {
            if scheme.sets[k - 1].contains(x) {
                tested += 1;
                if family.past_e[k - 1].contains(x) {
                    pass = false;
                    detail = format!("witness {} lies in the stage-{} exclusion set", x, k);
                    break 'outer;
                }
            }
        }
    }
    if pass {
        detail = format!("{} (witness, stage) pairs exact", tested);
    }
    vec![Check::new("witnesses avoid every exclusion set", pass, detail)]
}

/// File layout of a build artifact directory.
pub mod artifact {
    use super::*;

    pub const SPEC_FILE: &str = "spec.json";
    pub const SCHEME_FILE: &str = "scheme.json";
    pub const REGISTRY_FILE: &str = "registry.txt";
    pub const REPORT_FILE: &str = "report.json";
    pub const SUM_FILE: &str = "g_sum.csv";
    pub const RAMP_FILE: &str = "f.csv";
    pub const COMBINED_FILE: &str = "h.csv";

    pub fn stage_file(k: usize) -> String {
        format!("g_{:03}.csv", k)
    }

    /// Write the artifact directory: the normalized spec, the flattened
    /// scheme, the replayable registry dump, one CSV per stage function,
    /// the merged CSVs, and the full machine-readable report.
    pub fn write(dir: &Path, spec: &SchemeSpec, report: &BuildReport) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(SPEC_FILE), spec.to_json())?;
        std::fs::write(
            dir.join(SCHEME_FILE),
            serde_json::to_string_pretty(&report.scheme)?,
        )?;
        std::fs::write(dir.join(REGISTRY_FILE), &report.registry_dump)?;
        for b in &report.g_bundles {
            std::fs::write(dir.join(stage_file(b.k)), b.g.to_csv())?;
        }
        std::fs::write(dir.join(SUM_FILE), report.g_sum.to_csv())?;
        if let Some(r) = &report.ramp {
            std::fs::write(dir.join(RAMP_FILE), r.f.to_csv())?;
        }
        if let Some(h) = &report.combined {
            std::fs::write(dir.join(COMBINED_FILE), h.to_csv())?;
        }
        std::fs::write(dir.join(REPORT_FILE), serde_json::to_string_pretty(report)?)?;
        Ok(())
    }

    /// Load a report back and cross-check the stage CSVs against it.
    pub fn load(dir: &Path) -> Result<BuildReport> {
        let report: BuildReport =
            serde_json::from_str(&std::fs::read_to_string(dir.join(REPORT_FILE))?)?;
        for b in &report.g_bundles {
            let csv = std::fs::read_to_string(dir.join(stage_file(b.k)))?;
            let f = PLFunction::from_csv(&csv)?;
            if f != b.g {
                return Err(Error::Artifact(format!(
                    "stage {} CSV does not match the report",
                    b.k
                )));
            }
        }
        let sum_csv = std::fs::read_to_string(dir.join(SUM_FILE))?;
        if PLFunction::from_csv(&sum_csv)? != report.g_sum {
            return Err(Error::Artifact("merged CSV does not match the report".into()));
        }
        Ok(report)
    }
}
