//! lipforge: exact finite-depth construction and analysis of nondecreasing
//! absolutely continuous functions whose derivative is infinite exactly on
//! a prescribed measure-zero target set.
//!
//! Everything is computed in arbitrary-precision rational arithmetic: set
//! algebra on finite interval unions, measure allocation, the piecewise
//! linear functions themselves, and every verified inequality. See the
//! `book/` guide for a narrative walk through the pipeline.

pub mod analysis;
pub mod assembly;
pub mod epm;
pub mod gfun;
pub mod error;
pub mod hset;
pub mod interval;
pub mod pl;
pub mod rational;
pub mod scheme;
pub mod set;
pub mod specs;
pub mod verify;

pub use error::{Error, Result};
pub use interval::{Interval, Window};
pub use pl::PLFunction;
pub use rational::Rational;
pub use set::{IntervalSet, SetOp};

// The guide's code blocks compile and run with the test suite, one
// module per chapter so a failure names its chapter.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            mod $name {}
        };
    }
    chapter!(index, "../../../book/src/index.md");
    chapter!(rationals_and_intervals, "../../../book/src/rationals-and-intervals.md");
    chapter!(interval_sets, "../../../book/src/interval-sets.md");
    chapter!(schemes, "../../../book/src/schemes.md");
    chapter!(allocator, "../../../book/src/allocator.md");
    chapter!(supports, "../../../book/src/supports.md");
    chapter!(density, "../../../book/src/density.md");
    chapter!(assembly, "../../../book/src/assembly.md");
    chapter!(analysis, "../../../book/src/analysis.md");
    chapter!(cli, "../../../book/src/cli.md");
}
