//! Exact computation of two-dimensional topological invariants attached to a
//! finite group: the Frobenius algebra of class functions, groupoid-span
//! quantization, surface invariants via a bordism DSL, and reconstruction of
//! genus-operator matrices as integer polynomials in q across primes.

pub mod bordism;
pub mod classfun;
pub mod correspondence;
pub mod fp;
pub mod group;
pub mod groupoid;
pub mod linalg;
pub mod poly;
pub mod schemes;
pub mod spancheck;
