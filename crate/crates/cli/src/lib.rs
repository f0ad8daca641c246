//! Library half of the `agv-outage` command-line tool.

// `!(x < y)` is used on purpose so that NaN takes the failure branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod app;
pub mod config;

pub use app::run;
