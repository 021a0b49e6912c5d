//! Bundled example specs: a single point, a point pair, the first ten
//! rationals of the unit interval, a middle-thirds Cantor approximation,
//! and a pure G-delta point target for the ramp-sum construction.

use crate::interval::{Interval, Window};
use crate::rational::{rat, Rational};
use crate::scheme::SchemeSpec;
use crate::set::IntervalSet;

/// Depth-d middle-thirds Cantor approximation inside [0,1]: 2^d closed
/// intervals of length 3^-d.
pub fn cantor_approximation(depth: u32) -> IntervalSet {
    let mut parts = vec![Interval::closed(Rational::zero(), Rational::one()).unwrap()];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(parts.len() * 2);
        for p in parts {
            let third = p.length() / Rational::int(3);
            next.push(Interval::closed(p.lo.clone(), &p.lo + &third).unwrap());
            next.push(Interval::closed(&p.hi - &third, p.hi.clone()).unwrap());
        }
        parts = next;
    }
    IntervalSet::canonicalize(parts).expect("parts are disjoint")
}

fn pow2_bounds(n_levels: usize) -> Vec<Rational> {
    (1..=n_levels as i64).map(|n| Rational::pow2(-n)).collect()
}

/// A = {0} in the window [-1,1]; the same singleton at every level.
pub fn point_spec(n_levels: usize) -> SchemeSpec {
    SchemeSpec {
        window: Window::new(rat(-1, 1), rat(1, 1)).unwrap(),
        levels: (0..n_levels)
            .map(|_| vec![IntervalSet::point(Rational::zero())])
            .collect(),
        measure_bounds: pow2_bounds(n_levels),
        gdelta_levels: vec![],
    }
}

/// A = {0,1} in the window [-1,2]; two singletons at every level.
pub fn two_point_spec(n_levels: usize) -> SchemeSpec {
    SchemeSpec {
        window: Window::new(rat(-1, 1), rat(2, 1)).unwrap(),
        levels: (0..n_levels)
            .map(|_| {
                vec![
                    IntervalSet::point(Rational::zero()),
                    IntervalSet::point(Rational::one()),
                ]
            })
            .collect(),
        measure_bounds: pow2_bounds(n_levels),
        gdelta_levels: vec![],
    }
}

/// The first `count` rationals of [0,1] in a fixed denominator-major
/// enumeration, each level listing all of them as singletons.
pub fn rational_enumeration(count: usize) -> Vec<Rational> {
    let mut out = Vec::with_capacity(count);
    let mut den: i64 = 1;
    'outer: loop {
        for num in 0..=den {
            let q = Rational::new(num, den);
            if !out.contains(&q) {
                out.push(q);
                if out.len() == count {
                    break 'outer;
                }
            }
        }
        den += 1;
    }
    out
}

/// A = the first ten rationals of [0,1], ten levels deep, window [-1/2,3/2].
pub fn rationals_spec(n_levels: usize) -> SchemeSpec {
    let points = rational_enumeration(10);
    SchemeSpec {
        window: Window::new(rat(-1, 2), rat(3, 2)).unwrap(),
        levels: (0..n_levels)
            .map(|_| points.iter().cloned().map(IntervalSet::point).collect())
            .collect(),
        measure_bounds: pow2_bounds(n_levels),
        gdelta_levels: vec![],
    }
}

/// A = the depth-8 Cantor approximation, approached through depths
/// 2, 4, 6, 8 (one compact per level), window [-2,3]. The measure of the
/// depth-2n approximation is (2/3)^{2n} <= 2^-n, so the level bounds hold.
pub fn cantor_spec() -> SchemeSpec {
    SchemeSpec {
        window: Window::new(rat(-2, 1), rat(3, 1)).unwrap(),
        levels: (1..=4u32)
            .map(|n| vec![cantor_approximation(2 * n)])
            .collect(),
        measure_bounds: pow2_bounds(4),
        gdelta_levels: vec![],
    }
}

/// G = {0} as a pure G-delta target: empty meagre part, open levels
/// (-2^-n, 2^-n) for n = 1..n_levels, window [-1,1].
pub fn gdelta_point_spec(n_levels: usize) -> SchemeSpec {
    SchemeSpec {
        window: Window::new(rat(-1, 1), rat(1, 1)).unwrap(),
        levels: vec![],
        measure_bounds: vec![],
        gdelta_levels: (1..=n_levels as i64)
            .map(|n| {
                IntervalSet::from_interval(
                    Interval::open(-Rational::pow2(-n), Rational::pow2(-n)).unwrap(),
                )
            })
            .collect(),
    }
}

/// The bundled specs by file stem, as shipped in `specs/`.
pub fn bundled() -> Vec<(&'static str, SchemeSpec)> {
    vec![
        ("point", point_spec(64)),
        ("two_points", two_point_spec(32)),
        ("rationals", rationals_spec(10)),
        ("cantor", cantor_spec()),
        ("gdelta_point", gdelta_point_spec(16)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cantor_measures() {
        for d in 0..=8u32 {
            let c = cantor_approximation(d);
            assert_eq!(c.num_parts(), 1usize << d);
            let expected = Rational::new(2i64.pow(d), 3i64.pow(d));
            assert_eq!(c.measure(), expected);
        }
    }

    #[test]
    fn cantor_nesting() {
        let c2 = cantor_approximation(2);
        let c4 = cantor_approximation(4);
        assert!(c4.subset_of(&c2));
    }

    #[test]
    fn enumeration_is_the_expected_prefix() {
        let q = rational_enumeration(10);
        let expected: Vec<Rational> = [
            (0, 1),
            (1, 1),
            (1, 2),
            (1, 3),
            (2, 3),
            (1, 4),
            (3, 4),
            (1, 5),
            (2, 5),
            (3, 5),
        ]
        .iter()
        .map(|&(n, d)| rat(n, d))
        .collect();
        assert_eq!(q, expected);
    }

    #[test]
    fn all_bundled_specs_validate() {
        for (name, spec) in bundled() {
            spec.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }
}
