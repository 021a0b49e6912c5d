//! Monotone piecewise-linear functions with rational breakpoints.
//!
//! A [`PLFunction`] is constant left of its first breakpoint and right of
//! its last one, and interpolates linearly in between. Values are
//! nondecreasing, so the total variation is simply `last - first` and the
//! oscillation over an interval is the increment over it. Everything is
//! exact.

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::rational::Rational;
use serde::{Deserialize, Serialize};

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct PLFunction {
    xs: Vec<Rational>,
    ys: Vec<Rational>,
}

impl PLFunction {
    /// The zero function.
    pub fn zero() -> Self {
        PLFunction { xs: vec![Rational::zero()], ys: vec![Rational::zero()] }
    }

    pub fn constant(c: Rational) -> Self {
        PLFunction { xs: vec![Rational::zero()], ys: vec![c] }
    }

    /// Build from breakpoints; xs must be strictly increasing and ys
    /// nondecreasing.
    pub fn from_breakpoints(xs: Vec<Rational>, ys: Vec<Rational>) -> Result<Self> {
        if xs.is_empty() || xs.len() != ys.len() {
            return Err(Error::Parse {
                what: "piecewise-linear function",
                detail: "need equally many breakpoints and values, at least one".into(),
            });
        }
        if xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parse {
                what: "piecewise-linear function",
                detail: "breakpoints must be strictly increasing".into(),
            });
        }
        if ys.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Parse {
                what: "piecewise-linear function",
                detail: "values must be nondecreasing".into(),
            });
        }
        Ok(PLFunction { xs, ys })
    }

    /// Integrate a nonnegative step density given as disjoint constant
    /// pieces `(support, slope)`; the result starts at value 0 left of
    /// everything. Pieces may touch; they must not overlap.
    pub fn from_density(pieces: &[(Interval, Rational)]) -> Result<Self> {
        let mut segs: Vec<(Rational, Rational, Rational)> = pieces
            .iter()
            .filter(|(iv, s)| !iv.is_point() && s.is_positive())
            .map(|(iv, s)| (iv.lo.clone(), iv.hi.clone(), s.clone()))
            .collect();
        segs.sort_by(|a, b| a.0.cmp(&b.0));
        for w in segs.windows(2) {
            if w[0].1 > w[1].0 {
                return Err(Error::Construction {
                    stage: "density-integration",
                    index: 0,
                    detail: format!("overlapping density pieces at {}", w[1].0),
                });
            }
        }
        let mut xs: Vec<Rational> = Vec::with_capacity(2 * segs.len() + 1);
        let mut ys: Vec<Rational> = Vec::with_capacity(2 * segs.len() + 1);
        let mut acc = Rational::zero();
        if segs.is_empty() {
            return Ok(PLFunction::zero());
        }
        for (lo, hi, slope) in segs {
            if xs.last() != Some(&lo) {
                xs.push(lo.clone());
                ys.push(acc.clone());
            }
            acc += &(&slope * &(&hi - &lo));
            xs.push(hi);
            ys.push(acc.clone());
        }
        Ok(PLFunction { xs, ys })
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.xs
    }

    pub fn values(&self) -> &[Rational] {
        &self.ys
    }

    /// Exact evaluation: constant outside the breakpoint span, linear
    /// interpolation inside.
    pub fn eval(&self, x: &Rational) -> Rational {
        let n = self.xs.len();
        if x <= &self.xs[0] {
            return self.ys[0].clone();
        }
        if x >= &self.xs[n - 1] {
            return self.ys[n - 1].clone();
        }
        // xs[i-1] < x < xs[n-1]; find first breakpoint >= x.
        let i = self.xs.partition_point(|b| b < x);
        if self.xs[i] == *x {
            return self.ys[i].clone();
        }
        let (x0, x1) = (&self.xs[i - 1], &self.xs[i]);
        let (y0, y1) = (&self.ys[i - 1], &self.ys[i]);
        y0 + &(&(&(y1 - y0) * &(x - x0)) / &(x1 - x0))
    }

    /// Total variation of a monotone function: last value minus first.
    pub fn total_variation(&self) -> Rational {
        self.ys.last().unwrap() - self.ys.first().unwrap()
    }

    /// Exact pointwise sum; breakpoints are the merged breakpoint sets.
    pub fn add(&self, other: &PLFunction) -> PLFunction {
        let mut xs: Vec<Rational> = Vec::with_capacity(self.xs.len() + other.xs.len());
        let (mut i, mut j) = (0, 0);
        while i < self.xs.len() || j < other.xs.len() {
            let next = match (self.xs.get(i), other.xs.get(j)) {
                (Some(a), Some(b)) => {
                    if a <= b {
                        if a == b {
                            j += 1;
                        }
                        i += 1;
                        a.clone()
                    } else {
                        j += 1;
                        b.clone()
                    }
                }
                (Some(a), None) => {
                    i += 1;
                    a.clone()
                }
                (None, Some(b)) => {
                    j += 1;
                    b.clone()
                }
                (None, None) => unreachable!(),
            };
            xs.push(next);
        }
        let ys: Vec<Rational> = xs.iter().map(|x| self.eval(x) + other.eval(x)).collect();
        PLFunction { xs, ys }
    }

    /// Sum of many functions, folded pairwise to keep merges balanced.
    pub fn sum(fns: &[PLFunction]) -> PLFunction {
        match fns.len() {
            0 => PLFunction::zero(),
            1 => fns[0].clone(),
            _ => {
                let mid = fns.len() / 2;
                PLFunction::sum(&fns[..mid]).add(&PLFunction::sum(&fns[mid..]))
            }
        }
    }

    /// Largest slope over all segments.
    pub fn max_slope(&self) -> Rational {
        let mut best = Rational::zero();
        for i in 1..self.xs.len() {
            let s = &(&self.ys[i] - &self.ys[i - 1]) / &(&self.xs[i] - &self.xs[i - 1]);
            if s > best {
                best = s;
            }
        }
        best
    }

    /// Closed spans of the segments with strictly positive slope.
    pub fn positive_slope_spans(&self) -> Vec<Interval> {
        let mut out = Vec::new();
        for i in 1..self.xs.len() {
            if self.ys[i] > self.ys[i - 1] {
                out.push(
                    Interval::closed(self.xs[i - 1].clone(), self.xs[i].clone())
                        .expect("breakpoints strictly increase"),
                );
            }
        }
        out
    }

    /// Oscillation over an interval: for a nondecreasing continuous
    /// function this is the increment between the endpoints.
    pub fn oscillation(&self, u: &Interval) -> Rational {
        self.eval(&u.hi) - self.eval(&u.lo)
    }

    /// Breakpoints strictly inside (lo, hi], in order.
    pub fn breakpoints_within(&self, lo: &Rational, hi: &Rational) -> &[Rational] {
        let a = self.xs.partition_point(|b| b <= lo);
        let b = self.xs.partition_point(|b| b <= hi);
        &self.xs[a..b]
    }

    /// Deterministic CSV serialization: header then one `x,y` row per
    /// breakpoint, rationals as `p/q`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("breakpoint,value\n");
        for (x, y) in self.xs.iter().zip(&self.ys) {
            s.push_str(&format!("{},{}\n", x, y));
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if lineno == 0 {
                if line.trim() != "breakpoint,value" {
                    return Err(Error::Parse {
                        what: "function CSV",
                        detail: format!("bad header: {line:?}"),
                    });
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let (a, b) = line.split_once(',').ok_or_else(|| Error::Parse {
                what: "function CSV",
                detail: format!("line {} has no comma", lineno + 1),
            })?;
            xs.push(a.parse()?);
            ys.push(b.parse()?);
        }
        PLFunction::from_breakpoints(xs, ys)
    }
}
