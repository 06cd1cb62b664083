//! An interpreter and simulator for hy-tccp, a timed concurrent constraint
//! language extended with continuous variables that evolve at constant rates.
//!
//! The pieces build on each other:
//!
//! * [`constraints`] — the discrete constraint system (linear rational
//!   arithmetic, stream terms, signals);
//! * [`cstore`] and [`hstore`] — continuous and hybrid stores;
//! * [`lang`] — the `.hyt` surface syntax;
//! * [`engine`] — one-step successor derivation;
//! * [`explorer`] — runs under scheduling policies and bounded enumeration;
//! * [`trace_io`] — trace serialization and sampling.

pub mod constraints;
pub mod corpus;
pub mod cstore;
pub mod engine;
pub mod explorer;
pub mod hstore;
pub mod lang;
pub mod rational;
pub mod trace_io;
