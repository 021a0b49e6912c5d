//! Enlargement of each compact F_k to a compact H_k that keeps positive
//! measure in the middle third of every represented ladder component, and
//! the family closures derived from the flattened scheme.
//!
//! H_k is the exact finite union of F_k with the allocator pieces drawn
//! for its components, so it is closed by construction. The future closure
//! of index k unions H_j over all scheme sets contained in F_k; the past
//! exclusion set unions the future closures of earlier unrelated indices.

use crate::epm::{EpmRegistry, FatCantorPiece};
use crate::error::{Error, Result};
use crate::interval::{Interval, Window};
use crate::rational::Rational;
use crate::scheme::SuslinScheme;
use crate::set::IntervalSet;
use serde::{Deserialize, Serialize};

/// Why a ladder component carries no piece for this owner.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SkipReason {
    /// The free measure left in the middle third cannot host another piece
    /// of the required size (earlier owners hold the capacity).
    CapacityExhausted,
}

/// The stage-k enlargement: F_k, its epsilon, the pieces per component.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HBundle {
    pub k: usize,
    pub f: IntervalSet,
    pub h: IntervalSet,
    pub eps: Rational,
    /// Represented ladder components and their pieces, in component order.
    pub pieces: Vec<(Interval, FatCantorPiece)>,
    /// Components enumerated but left without a piece, with the reason.
    pub skipped: Vec<(Interval, SkipReason)>,
}

/// Build H_k = F_k plus one positive-measure piece in the middle third of
/// every ladder component of F_k within its epsilon-neighborhood, at
/// resolution L. Components shorter than 2·2^-L are below resolution and
/// are not enumerated. A component whose middle third cannot host another
/// piece of measure |J|/slope_cap is recorded as skipped.
pub fn build_h(
    k: usize,
    f: &IntervalSet,
    window: &Window,
    resolution_l: u32,
    slope_cap: &Rational,
    registry: &mut EpmRegistry,
) -> Result<HBundle> {
    if f.is_empty() {
        return Err(Error::EmptySet);
    }
    if !f.is_closed() {
        return Err(Error::NotClosed);
    }
    let eps = Rational::pow2(-(k as i64));
    let neighborhood = f.eps_neighborhood(&eps)?;
    let min_len = Rational::pow2(1 - resolution_l as i64);
    let components = f.ladder_gaps(window, resolution_l, &min_len, Some(&neighborhood));
    let avoid_level = registry.avoid_level_for(k);

    let mut pieces: Vec<(Interval, FatCantorPiece)> = Vec::new();
    let mut skipped = Vec::new();
    let mut h_parts: Vec<Interval> = f.components().to_vec();
    for j in components {
        let mt = j.span.middle_third()?;
        let want = &j.span.length() / slope_cap;
        match registry.alloc_piece(k, &mt, &want, avoid_level) {
            Ok(piece) => {
                h_parts.extend(piece.kept.components().iter().cloned());
                pieces.push((j.span, piece));
            }
            Err(Error::AllocationFailure(_)) => {
                skipped.push((j.span, SkipReason::CapacityExhausted));
            }
            Err(other) => {
                return Err(Error::Construction {
                    stage: "support-enlargement",
                    index: k,
                    detail: other.to_string(),
                })
            }
        }
    }
    let h = IntervalSet::canonicalize(h_parts)?;
    Ok(HBundle { k, f: f.clone(), h, eps, pieces, skipped })
}

/// Future closures and past exclusion sets for a truncated scheme.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilySets {
    /// future_h[k-1] is the union of H_j over the descendants of F_k: all
    /// j with k ≤ j ≤ K and F_j ⊆ F_k. Restricting to j ≥ k matters when
    /// the same compact reappears at several indices: an earlier index with
    /// an equal set is an ancestor, not a descendant, and folding its
    /// support in would let a later closure reach points whose support
    /// horizon has already passed.
    pub future_h: Vec<IntervalSet>,
    /// past_e[k-1] is the union of future_h[j-1] over j < k with
    /// F_j ∩ F_k = ∅.
    pub past_e: Vec<IntervalSet>,
}

/// Exact unions per the defining formulas, over the first `bundles.len()`
/// scheme sets.
pub fn build_family_sets(scheme: &SuslinScheme, bundles: &[HBundle]) -> Result<FamilySets> {
    let k_max = bundles.len();
    if k_max > scheme.len() {
        return Err(Error::Artifact(format!(
            "{} bundles but only {} scheme sets",
            k_max,
            scheme.len()
        )));
    }
    let mut future_h = Vec::with_capacity(k_max);
    for k in 0..k_max {
        let mut u = IntervalSet::empty();
        for (j, bundle) in bundles.iter().enumerate().take(k_max).skip(k) {
            if scheme.sets[j].subset_of(&scheme.sets[k]) {
                u = u.union(&bundle.h);
            }
        }
        future_h.push(u);
    }
    let mut past_e = Vec::with_capacity(k_max);
    for k in 0..k_max {
        let mut u = IntervalSet::empty();
        for (j, closure) in future_h.iter().enumerate().take(k) {
            if scheme.sets[j].disjoint_with(&scheme.sets[k]) {
                u = u.union(closure);
            }
        }
        past_e.push(u);
    }
    Ok(FamilySets { future_h, past_e })
}
