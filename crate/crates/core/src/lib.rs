//! Numerical tools for `f'' + A(z) f' + B(z) f = 0` with exponential-polynomial
//! coefficients: expression parsing and scaled evaluation, sector geometry of
//! `e^{P(z)}`, Taylor solutions with order-of-growth estimates, ray-wise
//! probes of the solution, and instance classification.

pub mod dyadic;
pub mod error;
pub mod exppoly;
pub mod fit;
pub mod lab;
pub mod parse;
pub mod poly;
pub mod probe;
pub mod rays;
pub mod scaled;
pub mod series;

pub use error::{Error, Result};
pub use exppoly::{ExpPoly, Term};
pub use poly::{ComplexPoly, Degree};
pub use scaled::ScaledComplex;
pub use series::PowerSeries;
