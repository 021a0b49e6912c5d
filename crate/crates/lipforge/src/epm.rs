//! Lazy allocator of positive-measure compact pieces that provably avoid
//! the target set.
//!
//! Instead of materializing the disjoint everywhere-positive-measure sets
//! of the ideal construction, pieces are carved out on demand: each request
//! names an owner (the stage index), an open target interval, a minimum
//! measure, and a scheme level to avoid. A piece is a finite union of
//! closed intervals, pairwise disjoint from every other registered piece
//! and from the avoided level union, with its measure an exact rational.
//! Since the target set is contained in every level union, every piece is
//! disjoint from it.

use crate::error::{AllocationDeficit, Error, Result};
use crate::interval::{Interval, Window};
use crate::rational::Rational;
use crate::set::IntervalSet;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// A positive-measure compact carved from a host interval.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FatCantorPiece {
    pub host: Interval,
    pub kept: IntervalSet,
    pub measure: Rational,
    /// Number of closed chunks the piece consists of.
    pub depth: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Allocation {
    pub owner: usize,
    pub avoid_level: usize,
    pub piece: FatCantorPiece,
}

/// The single mutable object of the pipeline. Allocation calls must be
/// serialized; a frozen registry is safe to share.
#[derive(Clone, Debug)]
pub struct EpmRegistry {
    pub window: Window,
    pub seed: u64,
    /// Union of each refined level, indexed from 1; index 0 is empty.
    avoid_levels: Vec<IntervalSet>,
    allocations: Vec<Allocation>,
    /// Running union of all registered pieces, for fast disjointness.
    taken: IntervalSet,
}

impl EpmRegistry {
    /// `level_unions[0]` must be the union of level 1, and so on.
    pub fn new(window: Window, seed: u64, level_unions: Vec<IntervalSet>) -> Self {
        let mut avoid_levels = vec![IntervalSet::empty()];
        avoid_levels.extend(level_unions);
        EpmRegistry {
            window,
            seed,
            avoid_levels,
            allocations: Vec::new(),
            taken: IntervalSet::empty(),
        }
    }

    pub fn allocations(&self) -> &[Allocation] {
        &self.allocations
    }

    /// Number of scheme levels known to the registry.
    pub fn num_levels(&self) -> usize {
        self.avoid_levels.len() - 1
    }

    /// The level whose union owner k must avoid: level k when the scheme is
    /// that deep, otherwise the deepest level available.
    pub fn avoid_level_for(&self, owner: usize) -> usize {
        if self.num_levels() == 0 {
            0
        } else {
            owner.clamp(1, self.num_levels())
        }
    }

    pub fn avoid_union(&self, level: usize) -> &IntervalSet {
        &self.avoid_levels[level.min(self.avoid_levels.len() - 1)]
    }

    /// Union of all pieces registered to one owner.
    pub fn owner_union(&self, owner: usize) -> IntervalSet {
        let mut u = IntervalSet::empty();
        for a in &self.allocations {
            if a.owner == owner {
                u = u.union(&a.piece.kept);
            }
        }
        u
    }

    /// Union of every registered piece.
    pub fn taken_union(&self) -> &IntervalSet {
        &self.taken
    }

    /// Measure still free inside `target` after removing the avoided level
    /// and all prior allocations.
    pub fn free_measure_in(&self, target: &Interval, avoid_level: usize) -> Rational {
        self.free_region(target, avoid_level).measure()
    }

    fn free_region(&self, target: &Interval, avoid_level: usize) -> IntervalSet {
        // Only the parts meeting the target matter; the clipped views keep
        // the sweep proportional to the local population.
        let avoid = self.avoid_union(avoid_level).clipped_to(&target.lo, &target.hi);
        let taken = self.taken.clipped_to(&target.lo, &target.hi);
        IntervalSet::from_interval(target.clone())
            .difference(&avoid)
            .difference(&taken)
    }

    /// Carve a compact piece of exact measure `min_measure` out of the free
    /// region of `target`, register it under `owner`, and return it.
    pub fn alloc_piece(
        &mut self,
        owner: usize,
        target: &Interval,
        min_measure: &Rational,
        avoid_level: usize,
    ) -> Result<FatCantorPiece> {
        if target.is_point() {
            return Err(Error::DegenerateInterval(target.lo.clone()));
        }
        if !min_measure.is_positive() {
            return Err(Error::SpecValidation(format!(
                "piece measure must be positive, got {}",
                min_measure
            )));
        }
        let free = self.free_region(target, avoid_level);
        let available = free.measure();
        if available <= *min_measure {
            return Err(Error::AllocationFailure(Box::new(AllocationDeficit {
                owner,
                requested: min_measure.clone(),
                available: available.clone(),
                deficit: min_measure - &available,
            })));
        }
        // Fill from the fewest free parts that can host the piece: choose
        // the minimal largest-first prefix whose total strictly exceeds
        // the request, then spread the request proportionally inside it.
        // Each chunk stays strictly inside its open slot.
        let mut hosts: Vec<&Interval> =
            free.components().iter().filter(|p| !p.is_point()).collect();
        hosts.sort_by(|a, b| b.length().cmp(&a.length()).then(a.lo.cmp(&b.lo)));
        let mut prefix_sum = Rational::zero();
        let mut prefix_len = 0usize;
        for p in &hosts {
            prefix_sum += &p.length();
            prefix_len += 1;
            if prefix_sum > *min_measure {
                break;
            }
        }
        let mut hosts = hosts[..prefix_len].to_vec();
        hosts.sort_by(|a, b| a.lo.cmp(&b.lo));
        let mut chunks: Vec<Interval> = Vec::new();
        let mut remaining = min_measure.clone();
        let mut free_left = prefix_sum;
        for part in hosts {
            if remaining.is_zero() {
                break;
            }
            let part_len = part.length();
            let take = (&remaining * &part_len) / free_left.clone();
            let take = take.min(remaining.clone());
            free_left = &free_left - &part_len;
            if !take.is_positive() {
                continue;
            }
            let slack = &part_len - &take;
            // Deterministic off-center placement driven by the seed.
            let jitter = self.jitter(owner, chunks.len());
            let lead = &slack * &jitter;
            let lo = &part.lo + &lead;
            let hi = &lo + &take;
            chunks.push(Interval::closed(lo, hi).expect("take is positive"));
            remaining = &remaining - &take;
        }
        debug_assert!(remaining.is_zero(), "proportional fill is exact");
        let kept = IntervalSet::canonicalize(chunks)?;
        let piece = FatCantorPiece {
            host: target.clone(),
            measure: kept.measure(),
            depth: kept.num_parts(),
            kept,
        };
        debug_assert_eq!(piece.measure, *min_measure);
        // Chunks sit strictly inside open free parts, so they are strictly
        // separated from everything already taken.
        for chunk in piece.kept.components() {
            self.taken.insert_disjoint(chunk.clone());
        }
        self.allocations.push(Allocation { owner, avoid_level, piece: piece.clone() });
        Ok(piece)
    }

    /// A deterministic fraction in [1/4, 3/4] mixed from the seed, the
    /// owner, and the chunk counter.
    fn jitter(&self, owner: usize, chunk: usize) -> Rational {
        let mut x = self
            .seed
            .wrapping_mul(0x9e3779b97f4a7c15)
            .wrapping_add(owner as u64)
            .wrapping_mul(0xbf58476d1ce4e5b9)
            .wrapping_add((self.allocations.len() + chunk) as u64);
        x ^= x >> 31;
        x = x.wrapping_mul(0x94d049bb133111eb);
        x ^= x >> 29;
        let t = (x % 513) as i64; // 0..=512
        Rational::new(256 + t, 1024) // in [1/4, 3/4]
    }

    /// Realize the two-owner everywhere-positive-measure split over a basis
    /// of open intervals: each owner receives a positive-measure piece in
    /// every basis interval, all pieces pairwise disjoint.
    pub fn split_epm(&mut self, basis: &[Interval], owner_a: usize, owner_b: usize) -> Result<()> {
        for iv in basis {
            for owner in [owner_a, owner_b] {
                let free = self.free_measure_in(iv, 0);
                if !free.is_positive() {
                    return Err(Error::AllocationFailure(Box::new(AllocationDeficit {
                        owner,
                        requested: Rational::zero(),
                        available: free.clone(),
                        deficit: Rational::zero(),
                    })));
                }
                let want = free / Rational::int(8);
                self.alloc_piece(owner, iv, &want, 0)?;
            }
        }
        Ok(())
    }

    /// Parse a dump back into its allocation lines for replay checks.
    pub fn parse_dump(text: &str) -> Result<Vec<Allocation>> {
        let mut out = Vec::new();
        for line in text.lines() {
            if line.starts_with("seed=") || line.starts_with("window=") || line.trim().is_empty()
            {
                continue;
            }
            let field = |key: &str| -> Result<&str> {
                line.split_whitespace()
                    .find_map(|tok| tok.strip_prefix(key))
                    .ok_or_else(|| Error::Parse {
                        what: "registry dump",
                        detail: format!("missing {} in {:?}", key, line),
                    })
            };
            let owner: usize = field("owner=")?.parse().map_err(|_| Error::Parse {
                what: "registry dump",
                detail: "bad owner".into(),
            })?;
            let avoid_level: usize = field("avoid_level=")?.parse().map_err(|_| Error::Parse {
                what: "registry dump",
                detail: "bad avoid level".into(),
            })?;
            let host = parse_interval(field("host=")?)?;
            let measure: Rational = field("measure=")?.parse()?;
            let parts = field("parts=")?
                .split(';')
                .map(parse_interval)
                .collect::<Result<Vec<_>>>()?;
            let kept = IntervalSet::canonicalize(parts)?;
            if kept.measure() != measure {
                return Err(Error::Parse {
                    what: "registry dump",
                    detail: format!("measure mismatch on {:?}", line),
                });
            }
            let depth = kept.num_parts();
            out.push(Allocation {
                owner,
                avoid_level,
                piece: FatCantorPiece { host, kept, measure, depth },
            });
        }
        Ok(out)
    }

    /// Replayable plain-text dump: header with the seed, then one line per
    /// allocation.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "window={}", self.window);
        for a in &self.allocations {
            let parts: Vec<String> =
                a.piece.kept.components().iter().map(|p| p.to_string()).collect();
            let _ = writeln!(
                s,
                "owner={} avoid_level={} host={} measure={} parts={}",
                a.owner,
                a.avoid_level,
                a.piece.host,
                a.piece.measure,
                parts.join(";")
            );
        }
        s
    }
}

/// Parse an interval rendered by `Display`, e.g. `[1/4,1/2)`.
fn parse_interval(s: &str) -> Result<Interval> {
    let bad = || Error::Parse { what: "interval", detail: s.to_owned() };
    let mut chars = s.chars();
    let first = chars.next().ok_or_else(bad)?;
    let last = s.chars().last().ok_or_else(bad)?;
    let lo_closed = match first {
        '[' => true,
        '(' => false,
        _ => return Err(bad()),
    };
    let hi_closed = match last {
        ']' => true,
        ')' => false,
        _ => return Err(bad()),
    };
    let body = &s[1..s.len() - 1];
    let (a, b) = body.split_once(',').ok_or_else(bad)?;
    Interval::new(a.parse()?, b.parse()?, lo_closed, hi_closed)
}
