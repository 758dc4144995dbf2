//! Quantum spectral curves, the quantum Miura transform and topological
//! recursion, over exact rationals or high-precision complex numbers.

pub mod bergman;
pub mod curve;
pub mod diffop;
pub mod diffsym;
pub mod error;
pub mod miura;
pub mod parse;
pub mod field;
pub mod formal;
pub mod io;
pub mod linalg;
pub mod loopcheck;
pub mod poly;
pub mod polesum;
pub mod quasi;
pub mod recursion;
pub mod report;
pub mod ratfunc;
pub mod roots;
pub mod series;

pub use error::{Error, Result};
pub use field::{Complex, Field, Rat, Ring};
pub use poly::Poly;
pub use quasi::{rational_exp_integral, QuasiRational};
pub use ratfunc::RatFunc;
pub use series::{Laurent, LocalSeries};
