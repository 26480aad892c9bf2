//! Exact shuffle-algebra engine for free, boolean and monotone cumulants.

pub mod algebra;
pub mod coproduct;
pub mod corpus;
pub mod cumulants;
pub mod error;
pub mod functional;
pub mod magnus;
pub mod partition;
pub mod products;
pub mod rational;
pub mod report;
pub mod verify;

pub use algebra::{BarWord, Letter, TensorSum, Word};
pub use coproduct::{Defects, HalfSide};
pub use cumulants::{CumulantKind, CumulantMap, Distribution, SeriesKind, TruncatedSeries};
pub use error::{Error, Result};
pub use functional::{Functional, Kind};
pub use products::{ConvolutionKind, LabeledContext};
pub use rational::Rational;
pub use report::{Check, Status, SuiteReport};
pub use verify::{Config, Report, Suite};
