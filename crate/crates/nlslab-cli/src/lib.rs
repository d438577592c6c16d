//! Library surface of the batch front end: run configuration parsing and
//! checkpoint persistence, shared by the binary and the test suites.

// validation guards use `!(x > y)` on purpose: the negation rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checkpoint;
pub mod config;
