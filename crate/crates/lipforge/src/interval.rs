//! Intervals with rational endpoints and open/closed flags.
//!
//! Set algebra on finite interval unions is driven by a total order on
//! boundary *positions*: each real x contributes three positions
//! `x⁻ < x < x⁺`, and an interval is an inclusive range of positions.
//! With that encoding union, intersection, difference and complement are
//! one-dimensional range sweeps with no special-casing of endpoint flags.

use crate::error::{Error, Result};
use crate::rational::Rational;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Infinitesimal side marker: `Below` is x⁻, `At` is x, `Above` is x⁺.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Below = -1,
    At = 0,
    Above = 1,
}

/// A boundary position on the extended line of endpoint events.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pos {
    pub x: Rational,
    pub side: Side,
}

impl Pos {
    pub fn below(x: Rational) -> Self {
        Pos { x, side: Side::Below }
    }
    pub fn at(x: Rational) -> Self {
        Pos { x, side: Side::At }
    }
    pub fn above(x: Rational) -> Self {
        Pos { x, side: Side::Above }
    }

    /// Successor position, when one exists within the same real point.
    /// `x⁺` has no successor (the next position belongs to a larger real).
    pub fn succ(&self) -> Option<Pos> {
        match self.side {
            Side::Below => Some(Pos::at(self.x.clone())),
            Side::At => Some(Pos::above(self.x.clone())),
            Side::Above => None,
        }
    }

    /// Predecessor position within the same real point.
    pub fn pred(&self) -> Option<Pos> {
        match self.side {
            Side::Above => Some(Pos::at(self.x.clone())),
            Side::At => Some(Pos::below(self.x.clone())),
            Side::Below => None,
        }
    }
}

/// A nonempty bounded interval: either nondegenerate `lo < hi` with
/// independent endpoint flags, or a single closed point `lo = hi`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational, lo_closed: bool, hi_closed: bool) -> Result<Self> {
        if lo > hi || (lo == hi && !(lo_closed && hi_closed)) {
            return Err(Error::MalformedInterval { lo: lo.to_string(), hi: hi.to_string() });
        }
        Ok(Interval { lo, hi, lo_closed, hi_closed })
    }

    pub fn closed(lo: Rational, hi: Rational) -> Result<Self> {
        Interval::new(lo, hi, true, true)
    }

    pub fn open(lo: Rational, hi: Rational) -> Result<Self> {
        Interval::new(lo, hi, false, false)
    }

    pub fn point(x: Rational) -> Self {
        Interval { lo: x.clone(), hi: x, lo_closed: true, hi_closed: true }
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn is_closed(&self) -> bool {
        self.lo_closed && self.hi_closed
    }

    pub fn length(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn center(&self) -> Rational {
        self.lo.midpoint(&self.hi)
    }

    pub fn contains(&self, x: &Rational) -> bool {
        let pos = Pos::at(x.clone());
        self.start_pos() <= pos && pos <= self.end_pos()
    }

    /// First covered position.
    pub fn start_pos(&self) -> Pos {
        if self.lo_closed {
            Pos::at(self.lo.clone())
        } else {
            Pos::above(self.lo.clone())
        }
    }

    /// Last covered position.
    pub fn end_pos(&self) -> Pos {
        if self.hi_closed {
            Pos::at(self.hi.clone())
        } else {
            Pos::below(self.hi.clone())
        }
    }

    /// Rebuild an interval from an inclusive position range.
    pub fn from_pos(start: Pos, end: Pos) -> Interval {
        debug_assert!(start <= end);
        debug_assert!(start.side != Side::Below, "starts are At or Above");
        debug_assert!(end.side != Side::Above, "ends are At or Below");
        Interval {
            lo_closed: start.side == Side::At,
            hi_closed: end.side == Side::At,
            lo: start.x,
            hi: end.x,
        }
    }

    /// The open middle third B(c, r/3) of a nondegenerate interval B(c, r).
    pub fn middle_third(&self) -> Result<Interval> {
        if self.is_point() {
            return Err(Error::DegenerateInterval(self.lo.clone()));
        }
        let sixth = self.length() / Rational::int(6);
        let c = self.center();
        Interval::open(&c - &sixth, &c + &sixth)
    }

    /// Distance from a point to this interval (0 if inside).
    pub fn distance_to(&self, x: &Rational) -> Rational {
        if x < &self.lo {
            &self.lo - x
        } else if x > &self.hi {
            x - &self.hi
        } else {
            Rational::zero()
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = if self.lo_closed { '[' } else { '(' };
        let r = if self.hi_closed { ']' } else { ')' };
        write!(f, "{}{},{}{}", l, self.lo, self.hi, r)
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// The bounded working window. Every constructed set and function is
/// supported inside it; complements are taken relative to it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub lo: Rational,
    pub hi: Rational,
}

impl Window {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self> {
        if lo >= hi {
            return Err(Error::BadWindow { lo: lo.to_string(), hi: hi.to_string() });
        }
        Ok(Window { lo, hi })
    }

    pub fn length(&self) -> Rational {
        &self.hi - &self.lo
    }

    /// The window as a closed interval.
    pub fn as_interval(&self) -> Interval {
        Interval::closed(self.lo.clone(), self.hi.clone()).expect("window is nondegenerate")
    }

    /// The open interior of the window.
    pub fn interior(&self) -> Interval {
        Interval::open(self.lo.clone(), self.hi.clone()).expect("window is nondegenerate")
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.lo, self.hi)
    }
}
