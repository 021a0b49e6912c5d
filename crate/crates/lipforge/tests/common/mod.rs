//! Shared oracles for the integration suites. These stay independent of
//! the set-algebra implementation: membership bitmaps are computed from
//! part endpoints by integer rounding, never through the sweep code.
#![allow(dead_code)] // each test binary uses its own subset

use lipforge::interval::Interval;
use lipforge::rational::Rational;
use lipforge::set::IntervalSet;
use rand::Rng;

/// Membership of every grid point i/denominator, i = 0..=spanned range,
/// over the window [0, 1], packed as bits.
pub struct GridMask {
    pub bits: Vec<u64>,
    pub points: usize,
}

impl GridMask {
    fn empty(points: usize) -> Self {
        GridMask { bits: vec![0; points.div_ceil(64)], points }
    }

    fn set(&mut self, i: usize) {
        self.bits[i / 64] |= 1 << (i % 64);
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn combine(&self, other: &GridMask, f: impl Fn(u64, u64) -> u64) -> GridMask {
        GridMask {
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(a, b)| f(*a, *b))
                .collect(),
            points: self.points,
        }
    }

    pub fn equals_masked(&self, other: &GridMask) -> bool {
        let full_words = self.points / 64;
        let rem = self.points % 64;
        if self.bits[..full_words] != other.bits[..full_words] {
            return false;
        }
        if rem == 0 {
            return true;
        }
        let mask = (1u64 << rem) - 1;
        (self.bits[full_words] & mask) == (other.bits[full_words] & mask)
    }
}

/// Grid membership computed directly from the membership definition: a
/// grid point i/den is in a part when lo (<|<=) i/den (<|<=) hi by flags,
/// decided with exact integer rounding of lo*den and hi*den.
pub fn grid_mask(set: &IntervalSet, den: u64) -> GridMask {
    let points = den as usize + 1;
    let mut mask = GridMask::empty(points);
    for part in set.components() {
        let scale = Rational::int(den as i64);
        let lo_scaled = &part.lo * &scale;
        let hi_scaled = &part.hi * &scale;
        let mut a = lo_scaled.ceil_i64().expect("grid indices fit i64");
        if !part.lo_closed && lo_scaled.is_integer() {
            a += 1;
        }
        let mut b = hi_scaled.floor_i64().expect("grid indices fit i64");
        if !part.hi_closed && hi_scaled.is_integer() {
            b -= 1;
        }
        let a = a.max(0);
        let b = b.min(den as i64);
        for i in a..=b {
            mask.set(i as usize);
        }
    }
    mask
}

/// A random canonical interval set in [0, 1] with at most `max_parts`
/// parts and endpoint denominators at most 2^10.
pub fn random_set<R: Rng>(rng: &mut R, max_parts: usize) -> IntervalSet {
    let n_parts = rng.random_range(0..=max_parts);
    let mut parts = Vec::with_capacity(n_parts);
    for _ in 0..n_parts {
        let den = rng.random_range(1..=1024i64);
        let a = rng.random_range(0..=den);
        let b = rng.random_range(0..=den);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let lo = Rational::new(lo, den);
        let hi = Rational::new(hi, den);
        if lo == hi {
            if rng.random_bool(0.5) {
                parts.push(Interval::point(lo));
            }
        } else {
            parts.push(
                Interval::new(lo, hi, rng.random_bool(0.5), rng.random_bool(0.5)).unwrap(),
            );
        }
    }
    IntervalSet::canonicalize(parts).unwrap()
}
