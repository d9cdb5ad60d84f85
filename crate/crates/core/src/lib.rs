// Square boolean tables read more clearly with explicit indices.
#![allow(clippy::needless_range_loop)]

pub mod battery;
pub mod checker;
pub mod error;
pub mod filtration;
pub mod generate;
pub mod instance;
pub mod invariants;
pub mod orthogonal;
pub mod par;
pub mod parabolic;
pub mod pattern;
pub mod rational;
pub mod splitter;

pub use checker::{Element, Margin, StabilityClass, SubbundleCatalog, Verdict, Witness};
pub use error::{Error, Result};
pub use filtration::{Index, ValidationReport, WeightedFiltration};
pub use par::Execution;
pub use pattern::{KValue, VanishingPattern};
pub use rational::Rational;
pub use splitter::{CaseLabel, Piece, SplitDecomposition, SplitStep};
