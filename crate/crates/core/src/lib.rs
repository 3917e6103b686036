//! N-expansion continued fractions with a finite digit set.
//!
//! For an integer `N >= 2` and `0 < alpha <= sqrt(N) - 1` the map
//! `T(x) = N/x - floor(N/x - alpha)` sends `[alpha, alpha + 1]` into
//! `[alpha, alpha + 1)` using only finitely many digits. This crate covers
//! the pieces needed to study its entropy plateaux:
//!
//! * [`map`]: digits, orbits, cylinders and branch inverses.
//! * [`matching`]: the pairs `(d, i)` with `N (i - 1) = d (d + i)`, their
//!   plateau heights and three-step matching.
//! * [`natext`] and [`quilt`]: the planar natural extension and the quilting
//!   isomorphism between two parameters of one plateau.
//! * [`measure`]: invariant densities, the dilogarithm, closed-form and
//!   simulated entropy.
//! * [`gaps`]: attractors and gaps of `T`.

pub mod dilog;
pub mod error;
pub mod gaps;
pub mod map;
pub mod matching;
pub mod measure;
pub mod natext;
pub mod quadrature;
pub mod quilt;
pub mod rng;

pub use error::{Error, Result};
pub use map::{fixed_point, DigitRange, DoubleDouble, Interval, NExpParams, OrbitStep};
pub use matching::{
    enumerate_matching_pairs, sigma0, AlphaClass, Enumeration, MatchingPair, PlateauHeights,
};
pub use natext::{NatExtDomain, Point};
