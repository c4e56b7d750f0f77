//! Desk-scale toolkit for analytic maps on direct limits of Banach spaces.
//!
//! * [`lie`]: matrix Lie algebra with a compatible norm, exp/log, truncated BCH.
//! * [`dirichlet`]: matrix-valued Dirichlet series with the convolution bracket.
//! * [`germ`]: truncated analytic germs fixing a finite anchor set; composition
//!   and certified inversion.
//! * [`estimate`]: Cauchy-integral coefficient bounds for bounded analytic maps.
//! * [`limit`]: neighborhood bases, continuity certificates and compact
//!   regularity moduli for the step spaces above.

pub mod dirichlet;
pub mod error;
pub mod estimate;
pub mod germ;
pub mod lie;
pub mod limit;
pub mod matrix;
pub mod sample;
pub mod series;
pub mod suite;

pub use error::{Error, Result};
pub use matrix::Matrix;
