//! Exact arithmetic on generalized series fields over Hahn-group
//! exponents, with Hardy-type series derivations, asymptotic integration,
//! pre-logarithms, exp-log towers and a numeric germ bridge.
//!
//! The library works at desk scale: every stored value has finite support
//! and exact rational coefficients. Operations whose true result is an
//! infinite series take a term budget and mark their output as inexact
//! when the budget binds.

pub mod coeff;
pub mod derivation;
pub mod el;
pub mod error;
pub mod field;
pub mod germ;
pub mod hahn;
pub mod integrate;
pub mod logarithm;
pub mod parse;
pub mod render;
pub mod series;

pub use coeff::{Coeff, CoeffHooks};
pub use error::{Error, Result};
pub use hahn::{Exponent, Spine, SpineIndex};
pub use series::Series;
