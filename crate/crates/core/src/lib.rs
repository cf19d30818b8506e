//! Exact-arithmetic workbench for Rota-Baxter operators: coefficient
//! rings, truncated formal series in several bases, a catalog of
//! operators with a generic identity verifier, combinatorial species
//! with bijection witnesses, q-calculus, discrete integration on finite
//! posets, and field-theoretic constructions (Euler-Lagrange, Poisson
//! bracket, Moyal star product).
//!
//! All arithmetic is exact: arbitrary-precision integers, rationals, or
//! integer polynomials in a formal parameter q. Verification never
//! tolerates error; identities hold coefficient-by-coefficient through an
//! explicit truncation order or fail with a replayable witness.

pub mod coeff;
pub mod field;
pub mod matrix;
pub mod poset;
pub mod qcalc;
pub mod rb;
pub mod series;
pub mod species;

pub use coeff::{Coefficient, CoeffError, QPoly};
pub use matrix::SeriesMatrix;
pub use rb::{CheckError, CheckReport, RbOperator, Verdict, Weight, Witness};
pub use series::{Basis, Index, MultiIndex, SeriesError, TruncatedSeries, Truncation, VarId, Word};
